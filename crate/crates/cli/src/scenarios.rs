//! Scenario runners: each produces CSV files (and optional SVG panels) under
//! the output directory, plus a short stdout summary.

use num_complex::Complex;

use sctherm::qmatrix::{ComplexMatrix, DensityMatrix, HermitianMatrix};
use sctherm::spinboson::{build_model, gibbs_state, ModelConfig, ReducedMapFamily};
use sctherm::thermo::{
    equilibrium_eigenbasis, mean_force_thermo, thermo_driven, thermo_measured_general,
    thermo_static, DrivenProtocol, ThermoOptions, ThermoTrace,
};
use sctherm::witness::detect_negative_rate_with_maps;

use crate::config::{Drive, InitialState, MeasuredBasis, RunConfig};
use crate::csvout::CsvWriter;
use crate::svg::Chart;
use crate::CliError;

fn ground_state() -> DensityMatrix<f64> {
    DensityMatrix::pure(&[Complex::new(0.0, 0.0), Complex::new(1.0, 0.0)]).unwrap()
}

fn excited_state() -> DensityMatrix<f64> {
    DensityMatrix::pure(&[Complex::new(1.0, 0.0), Complex::new(0.0, 0.0)]).unwrap()
}

fn opts() -> ThermoOptions<f64> {
    ThermoOptions::default()
}

fn num(e: sctherm::Error) -> CliError {
    CliError::Numerical(e)
}

/// Validation pass before any CSV write: every row must carry finite values
/// and respect the second-law bound.
fn validate_points(points: &[sctherm::thermo::ThermoPoint<f64>]) -> Result<(), CliError> {
    for p in points {
        let values = [
            p.t,
            p.e_u,
            p.f,
            p.s,
            p.q,
            p.w,
            p.sigma,
            p.sigma_rate,
            p.e_u_weak,
            p.s_vn,
        ];
        if values.iter().any(|v| !v.is_finite()) {
            return Err(CliError::Numerical(sctherm::Error::Numerical(format!(
                "non-finite thermodynamic value at t = {}",
                p.t
            ))));
        }
        if p.sigma < -1e-6 {
            return Err(CliError::Numerical(sctherm::Error::Numerical(format!(
                "second-law violation at t = {}: σ = {:.3e}",
                p.t, p.sigma
            ))));
        }
    }
    Ok(())
}

/// Resolve the configured initial state for a model at one β.
fn initial_state(
    cfg: &RunConfig,
    model: &ModelConfig<f64>,
) -> Result<Option<DensityMatrix<f64>>, CliError> {
    Ok(match &cfg.initial_state {
        InitialState::Ground => Some(ground_state()),
        InitialState::Excited => Some(excited_state()),
        InitialState::Gibbs => {
            let h_s = build_model(model).map_err(num)?.h_system;
            Some(gibbs_state(&h_s, model.beta).map_err(num)?)
        }
        // Measured states are built inside the measured pipeline.
        InitialState::Measured(_) => None,
        InitialState::Custom(rows) => {
            if rows.len() != 2 || rows.iter().any(|r| r.len() != 2) {
                return Err(CliError::Config(
                    "initial_state.matrix must be a 2x2 matrix of [re, im] pairs".into(),
                ));
            }
            let m = ComplexMatrix::from_fn(2, |i, j| Complex::new(rows[i][j][0], rows[i][j][1]));
            let herm = HermitianMatrix::new(m)
                .map_err(|e| CliError::Config(format!("initial_state.matrix: {e}")))?;
            Some(
                DensityMatrix::new(herm)
                    .map_err(|e| CliError::Config(format!("initial_state.matrix: {e}")))?,
            )
        }
    })
}

fn measured_basis_vectors(
    basis: MeasuredBasis,
    model: &ModelConfig<f64>,
) -> Result<Vec<Vec<Complex<f64>>>, CliError> {
    let inv_sqrt2 = 1.0 / 2f64.sqrt();
    Ok(match basis {
        MeasuredBasis::Z => vec![
            vec![Complex::new(1.0, 0.0), Complex::new(0.0, 0.0)],
            vec![Complex::new(0.0, 0.0), Complex::new(1.0, 0.0)],
        ],
        MeasuredBasis::X => vec![
            vec![Complex::new(inv_sqrt2, 0.0), Complex::new(inv_sqrt2, 0.0)],
            vec![Complex::new(inv_sqrt2, 0.0), Complex::new(-inv_sqrt2, 0.0)],
        ],
        MeasuredBasis::Equilibrium => equilibrium_eigenbasis(model).map_err(num)?,
    })
}

fn protocol_for(drive: &Drive, model: &ModelConfig<f64>) -> DrivenProtocol<f64> {
    match drive {
        Drive::Ramp { factor, ramp_time } => {
            DrivenProtocol::frequency_ramp(model.omega0, *factor, *ramp_time / model.gamma_plus)
        }
    }
}

/// Run the shipped trace for one β under the configured initial state and
/// optional drive.
fn trace_for_beta(cfg: &RunConfig, beta: f64, grid: &[f64]) -> Result<ThermoTrace<f64>, CliError> {
    let model = cfg.model.clone().with_beta(beta);
    match (&cfg.initial_state, &cfg.drive) {
        (InitialState::Measured(basis), drive) => {
            let vectors = measured_basis_vectors(*basis, &model)?;
            let protocol = drive.as_ref().map(|d| protocol_for(d, &model));
            thermo_measured_general(&model, &vectors, protocol.as_ref(), grid, &opts()).map_err(num)
        }
        (_, Some(drive)) => {
            let rho0 = initial_state(cfg, &model)?.expect("non-measured state");
            let protocol = protocol_for(drive, &model);
            thermo_driven(&model, &protocol, &rho0, grid, &opts()).map_err(num)
        }
        (_, None) => {
            let rho0 = initial_state(cfg, &model)?.expect("non-measured state");
            thermo_static(&model, &rho0, grid, &opts()).map_err(num)
        }
    }
}

pub fn run_fig1(cfg: &RunConfig) -> Result<(), CliError> {
    let grid = cfg.grid();
    let mut csv = CsvWriter::new(&[
        "t",
        "beta",
        "e_u",
        "e_u_weak",
        "s",
        "q",
        "sigma",
        "sigma_rate",
    ]);
    let mut energy_chart = Chart::new(
        "Internal energy (ground-state start)",
        "t [1/ω₀]",
        "energy [ω₀]",
    );
    let mut sigma_chart = Chart::new("Entropy production", "t [1/ω₀]", "σ = ΔS - βQ");
    let mut min_sigma = f64::INFINITY;
    let mut any_negative_rate = false;
    for &beta in &cfg.betas {
        let model = cfg.model.clone().with_beta(beta);
        let trace = thermo_static(&model, &ground_state(), &grid, &opts()).map_err(num)?;
        validate_points(&trace.points)?;
        for p in &trace.points {
            csv.row(&[
                p.t,
                beta,
                p.e_u,
                p.e_u_weak,
                p.s,
                p.q,
                p.sigma,
                p.sigma_rate,
            ]);
            min_sigma = min_sigma.min(p.sigma);
            any_negative_rate |= p.sigma_rate < -1e-6;
        }
        energy_chart.add(
            &format!("E_U, β={beta}"),
            trace.points.iter().map(|p| (p.t, p.e_u)).collect(),
            false,
        );
        energy_chart.add(
            &format!("⟨H_S⟩, β={beta}"),
            trace.points.iter().map(|p| (p.t, p.e_u_weak)).collect(),
            true,
        );
        sigma_chart.add(
            &format!("β={beta}"),
            trace.points.iter().map(|p| (p.t, p.sigma)).collect(),
            false,
        );
    }
    csv.write(&cfg.out.join("fig1.csv"))?;
    if cfg.svg {
        energy_chart.write(&cfg.out.join("fig1_internal_energy.svg"))?;
        sigma_chart.write(&cfg.out.join("fig1_entropy_production.svg"))?;
    }
    println!(
        "fig1: {} betas x {} points -> {}; min σ = {min_sigma:.3e}, negative σ̇ present: {}",
        cfg.betas.len(),
        grid.len(),
        cfg.out.join("fig1.csv").display(),
        any_negative_rate
    );
    Ok(())
}

pub fn run_fig_s1(cfg: &RunConfig) -> Result<(), CliError> {
    let beta = cfg.betas[0];
    let mut csv = CsvWriter::new(&["c", "max_diff"]);
    let mut values = Vec::new();
    for &c in &cfg.c_list {
        let model = scaled_model(&cfg.model, c).with_beta(beta);
        let t_phys = cfg.t_max / model.gamma_plus;
        let grid: Vec<f64> = (0..cfg.points)
            .map(|k| t_phys * k as f64 / (cfg.points - 1) as f64)
            .collect();
        let trace = thermo_static(&model, &ground_state(), &grid, &opts()).map_err(num)?;
        let max_diff = trace
            .points
            .iter()
            .map(|p| (p.e_u - p.e_u_weak).abs())
            .fold(0.0f64, f64::max);
        csv.row(&[c, max_diff]);
        values.push((c, max_diff));
    }
    csv.write(&cfg.out.join("figS1.csv"))?;
    if cfg.svg {
        let mut chart = Chart::new(
            "Weak-coupling convergence",
            "c (coupling ∝ 1/c)",
            "max_t |E_U - ⟨H_S⟩| [ω₀]",
        )
        .log_log();
        chart.add("max difference", values.clone(), false);
        chart.write(&cfg.out.join("figS1_convergence.svg"))?;
    }
    let decreasing = values.windows(2).all(|w| w[1].1 < w[0].1);
    println!(
        "figS1: sweep over c = {:?} at β = {beta} -> {}; strictly decreasing: {decreasing}",
        cfg.c_list,
        cfg.out.join("figS1.csv").display()
    );
    if !decreasing {
        return Err(CliError::Numerical(sctherm::Error::Numerical(
            "weak-coupling sweep is not strictly decreasing".into(),
        )));
    }
    Ok(())
}

fn scaled_model(base: &ModelConfig<f64>, c: f64) -> ModelConfig<f64> {
    ModelConfig {
        kappa: base.kappa / c,
        gamma_plus: base.gamma_plus / c,
        gamma_minus: base.gamma_minus / c,
        ..base.clone()
    }
}

pub fn run_fig_s2(cfg: &RunConfig) -> Result<(), CliError> {
    let grid = cfg.grid();
    let mut csv = CsvWriter::new(&["t", "beta", "e_u", "e_u_weak", "e_u_star"]);
    for &beta in &cfg.betas {
        let model = cfg.model.clone().with_beta(beta);
        let trace = thermo_static(&model, &ground_state(), &grid, &opts()).map_err(num)?;
        validate_points(&trace.points)?;
        let mf = mean_force_thermo(&model, &trace.states, &grid, &opts()).map_err(num)?;
        for (p, m) in trace.points.iter().zip(&mf) {
            csv.row(&[p.t, beta, p.e_u, p.e_u_weak, m.e_u_star]);
        }
        if cfg.svg {
            let mut chart = Chart::new(
                &format!("Internal-energy comparison, β = {beta}"),
                "t [1/ω₀]",
                "energy [ω₀]",
            );
            chart.add(
                "E_U",
                trace.points.iter().map(|p| (p.t, p.e_u)).collect(),
                false,
            );
            chart.add(
                "⟨H_S⟩",
                trace.points.iter().map(|p| (p.t, p.e_u_weak)).collect(),
                true,
            );
            chart.add(
                "mean-force E_U*",
                mf.iter().map(|m| (m.t, m.e_u_star)).collect(),
                false,
            );
            chart.write(&cfg.out.join(format!("figS2_beta{beta}.svg")))?;
        }
    }
    csv.write(&cfg.out.join("figS2.csv"))?;
    println!(
        "figS2: {} betas x {} points -> {}",
        cfg.betas.len(),
        grid.len(),
        cfg.out.join("figS2.csv").display()
    );
    Ok(())
}

pub fn run_fig_s3(cfg: &RunConfig) -> Result<(), CliError> {
    let grid = cfg.grid();
    let mut csv = CsvWriter::new(&["t", "beta", "sigma_star", "sigma"]);
    let mut chart = Chart::new(
        "Mean-force entropy production (product-thermal start)",
        "t [1/ω₀]",
        "σ* = ΔS* - βQ*",
    );
    let mut min_sigma_star = f64::INFINITY;
    let mut max_abs_sigma = 0.0f64;
    for &beta in &cfg.betas {
        let model = cfg.model.clone().with_beta(beta);
        let h_s = build_model(&model).map_err(num)?.h_system;
        let rho0 = gibbs_state(&h_s, beta).map_err(num)?;
        let trace = thermo_static(&model, &rho0, &grid, &opts()).map_err(num)?;
        validate_points(&trace.points)?;
        let mf = mean_force_thermo(&model, &trace.states, &grid, &opts()).map_err(num)?;
        for (p, m) in trace.points.iter().zip(&mf) {
            csv.row(&[p.t, beta, m.sigma_star, p.sigma]);
            min_sigma_star = min_sigma_star.min(m.sigma_star);
            max_abs_sigma = max_abs_sigma.max(p.sigma.abs());
        }
        chart.add(
            &format!("σ*, β={beta}"),
            mf.iter().map(|m| (m.t, m.sigma_star)).collect(),
            false,
        );
        chart.add(
            &format!("σ, β={beta}"),
            trace.points.iter().map(|p| (p.t, p.sigma)).collect(),
            true,
        );
    }
    csv.write(&cfg.out.join("figS3.csv"))?;
    if cfg.svg {
        chart.write(&cfg.out.join("figS3_entropy_production.svg"))?;
    }
    println!(
        "figS3: κ = {} -> {}; min σ* = {min_sigma_star:.3e} (negative intervals expected), \
         max |σ| = {max_abs_sigma:.1e} (consistent approach stays at zero)",
        cfg.model.kappa,
        cfg.out.join("figS3.csv").display()
    );
    Ok(())
}

pub fn run_custom(cfg: &RunConfig) -> Result<(), CliError> {
    let grid = cfg.grid();
    let mut csv = CsvWriter::new(&[
        "t",
        "beta",
        "e_u",
        "f",
        "s",
        "q",
        "w",
        "sigma",
        "sigma_rate",
        "e_u_weak",
        "s_vn",
    ]);
    let mut energy_chart = Chart::new("Internal energy", "t [1/ω₀]", "energy [ω₀]");
    let mut sigma_chart = Chart::new("Entropy production", "t [1/ω₀]", "σ = ΔS - βQ");
    let mut min_sigma = f64::INFINITY;
    for &beta in &cfg.betas {
        let trace = trace_for_beta(cfg, beta, &grid)?;
        validate_points(&trace.points)?;
        for p in &trace.points {
            csv.row(&[
                p.t,
                beta,
                p.e_u,
                p.f,
                p.s,
                p.q,
                p.w,
                p.sigma,
                p.sigma_rate,
                p.e_u_weak,
                p.s_vn,
            ]);
            min_sigma = min_sigma.min(p.sigma);
        }
        energy_chart.add(
            &format!("E_U, β={beta}"),
            trace.points.iter().map(|p| (p.t, p.e_u)).collect(),
            false,
        );
        energy_chart.add(
            &format!("⟨H_S⟩, β={beta}"),
            trace.points.iter().map(|p| (p.t, p.e_u_weak)).collect(),
            true,
        );
        sigma_chart.add(
            &format!("β={beta}"),
            trace.points.iter().map(|p| (p.t, p.sigma)).collect(),
            false,
        );
    }
    csv.write(&cfg.out.join("custom.csv"))?;
    if cfg.svg {
        energy_chart.write(&cfg.out.join("custom_internal_energy.svg"))?;
        sigma_chart.write(&cfg.out.join("custom_entropy_production.svg"))?;
    }
    println!(
        "custom: {} betas x {} points -> {}; min σ = {min_sigma:.3e}",
        cfg.betas.len(),
        grid.len(),
        cfg.out.join("custom.csv").display()
    );
    Ok(())
}

pub fn run_witness(cfg: &RunConfig) -> Result<(), CliError> {
    let grid = cfg.grid();
    let mut csv = CsvWriter::new(&[
        "beta",
        "t_start",
        "t_end",
        "min_sigma_rate",
        "confirmed_non_cp",
    ]);
    let mut rate_chart = Chart::new("Entropy production rate", "t [1/ω₀]", "dσ/dt");
    let mut summaries = Vec::new();
    for &beta in &cfg.betas {
        let model = cfg.model.clone().with_beta(beta);
        let trace = trace_for_beta(cfg, beta, &grid)?;
        // Map family for the CP-divisibility cross-check (subsampled).
        let family = ReducedMapFamily::new(&model).map_err(num)?;
        let stride = (grid.len() / 400).max(1);
        let maps: Vec<_> = grid[1..]
            .iter()
            .step_by(stride)
            .map(|&t| family.at(t).map(|m| (t, m)))
            .collect::<Result<_, _>>()
            .map_err(num)?;
        let report =
            detect_negative_rate_with_maps(&trace.points, 1e-6, &maps, 1e-7).map_err(num)?;
        for iv in &report.intervals {
            csv.labeled_row(
                &crate::csvout::fmt(beta),
                &[
                    iv.t_start,
                    iv.t_end,
                    iv.min_rate,
                    match iv.confirmed_by_divisibility {
                        Some(true) => 1.0,
                        Some(false) => 0.0,
                        None => -1.0,
                    },
                ],
            );
        }
        rate_chart.add(
            &format!("β={beta}"),
            trace.points.iter().map(|p| (p.t, p.sigma_rate)).collect(),
            false,
        );
        let non_cp = report
            .divisibility
            .as_ref()
            .map(|scan| scan.iter().filter(|iv| iv.verdict.is_non_cp()).count())
            .unwrap_or(0);
        summaries.push(format!(
            "β={beta}: {} negative-rate intervals, negative area {:.3e}, {} non-CP scan intervals{}",
            report.intervals.len(),
            report.total_negative_area,
            non_cp,
            if report.non_markovian() {
                " -> non-Markovian"
            } else {
                " (witness silent: certifies nothing)"
            }
        ));
    }
    csv.write(&cfg.out.join("witness.csv"))?;
    if cfg.svg {
        rate_chart.write(&cfg.out.join("witness_sigma_rate.svg"))?;
    }
    println!("witness -> {}", cfg.out.join("witness.csv").display());
    for s in &summaries {
        println!("  {s}");
    }
    Ok(())
}
