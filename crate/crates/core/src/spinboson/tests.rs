use super::*;
use crate::dynmaps::is_cptp;
use crate::gkls::{ode_oracle, propagate};
use crate::qmatrix::devectorize;
use crate::qmatrix::tests::{approx_eq_mat, random_density};
use crate::scalar::cx;

fn fig1_config() -> ModelConfig<f64> {
    ModelConfig::default_model()
}

#[test]
fn full_hamiltonian_spectrum_on_resonance() {
    let ops = build_model(&fig1_config()).unwrap();
    let eig = ops.h_full.eig().unwrap();
    let want = [-1.0, -0.9, 0.9, 1.0];
    for (got, want) in eig.eigenvalues.iter().zip(want) {
        assert!((got - want).abs() < 1e-14, "eigenvalue {got} vs {want}");
    }
}

#[test]
fn decoupled_limit_spectrum() {
    let cfg = ModelConfig {
        kappa: 0.0,
        ..fig1_config()
    };
    let ops = build_model(&cfg).unwrap();
    approx_eq_mat(
        ops.h_full.matrix(),
        &ComplexMatrix::diag(&[1.0, 0.0, 0.0, -1.0]),
        1e-15,
    );
}

#[test]
fn eigenoperators_match_quoted_rationals_bitwise() {
    let (a_plus, a_minus) = eigenoperators(&fig1_config()).unwrap();
    let plus_want: [[f64; 4]; 4] = [
        [0.0, 0.0, 0.0, 0.0],
        [0.5, 0.0, 0.0, 0.0],
        [-0.5, 0.0, 0.0, 0.0],
        [0.0, 0.5, 0.5, 0.0],
    ];
    let minus_want: [[f64; 4]; 4] = [
        [0.0, 0.0, 0.0, 0.0],
        [0.5, 0.0, 0.0, 0.0],
        [0.5, 0.0, 0.0, 0.0],
        [0.0, -0.5, 0.5, 0.0],
    ];
    for i in 0..4 {
        for j in 0..4 {
            assert_eq!(a_plus[(i, j)].re, plus_want[i][j]);
            assert_eq!(a_plus[(i, j)].im, 0.0);
            assert_eq!(a_minus[(i, j)].re, minus_want[i][j]);
            assert_eq!(a_minus[(i, j)].im, 0.0);
        }
    }
}

#[test]
fn eigenoperator_commutators() {
    // [H, A(ω)] = -ω A(ω) for both Bohr frequencies.
    let cfg = fig1_config();
    let ops = build_model(&cfg).unwrap();
    let h = ops.h_full.matrix();
    for (a, omega) in [
        (&ops.a_plus, cfg.omega0 + cfg.kappa),
        (&ops.a_minus, cfg.omega0 - cfg.kappa),
    ] {
        let comm = &(h * a) - &(a * h);
        let want = a.scale_re(-omega);
        assert!(
            (&comm - &want).max_norm() < 1e-12,
            "commutator mismatch at ω = {omega}"
        );
    }
}

#[test]
fn eigenoperators_agree_with_projector_construction() {
    let cfg = fig1_config();
    let ops = build_model(&cfg).unwrap();
    let coupling = tensor(&ComplexMatrix::identity(2), &sigma_x::<f64>());
    let channels = eigenoperators_numeric(&ops.h_full, &coupling).unwrap();
    assert_eq!(channels.len(), 2, "two positive Bohr frequencies");
    let (w_minus, a_minus_num) = &channels[0];
    let (w_plus, a_plus_num) = &channels[1];
    assert!((w_minus - (cfg.omega0 - cfg.kappa)).abs() < 1e-12);
    assert!((w_plus - (cfg.omega0 + cfg.kappa)).abs() < 1e-12);
    // The numeric construction carries an arbitrary eigenvector phase; for
    // this model it reproduces the quoted matrices up to rounding.
    approx_eq_mat(a_plus_num, &ops.a_plus, 1e-12);
    approx_eq_mat(a_minus_num, &ops.a_minus, 1e-12);
    // Completeness: the two raising channels together reach both
    // single-excitation eigenstates |±⟩ = (|eg⟩ ± |ge⟩)/√2 from the ground
    // state (A₊† lands on |+⟩, A₋† on |-⟩).
    let ground = [cx(0.0, 0.0), cx(0.0, 0.0), cx(0.0, 0.0), cx(1.0, 0.0)];
    let from_plus = a_plus_num.adjoint().mul_vec(&ground);
    let from_minus = a_minus_num.adjoint().mul_vec(&ground);
    let overlap_plus = (from_plus[1] + from_plus[2]).norm() / 2f64.sqrt();
    let overlap_minus = (from_minus[1] - from_minus[2]).norm() / 2f64.sqrt();
    let inv_sqrt2 = 1.0 / 2f64.sqrt();
    assert!((overlap_plus - inv_sqrt2).abs() < 1e-12);
    assert!((overlap_minus - inv_sqrt2).abs() < 1e-12);
}

#[test]
fn eigenoperators_reject_off_resonance() {
    let cfg = ModelConfig {
        omega1: 1.1,
        allow_off_resonance: true,
        ..fig1_config()
    };
    assert!(matches!(
        eigenoperators(&cfg),
        Err(Error::UnsupportedConfig(_))
    ));
}

#[test]
fn adjoint_pairing_of_eigenoperators() {
    // A(-ω) = A†(ω): the raising channels used in the Davies generator.
    let cfg = fig1_config();
    let ops = build_model(&cfg).unwrap();
    let h = ops.h_full.matrix();
    let a_dag = ops.a_plus.adjoint();
    let comm = &(h * &a_dag) - &(&a_dag * h);
    let want = a_dag.scale_re(cfg.omega0 + cfg.kappa);
    assert!((&comm - &want).max_norm() < 1e-12);
}

#[test]
fn n_bar_values() {
    // βω = ln 2 gives n̄ = 1 exactly.
    assert!((n_bar(2f64.ln(), 1.0) - 1.0).abs() < 1e-14);
    // Extreme β underflows gracefully.
    assert_eq!(n_bar(1.0, 1e6), 0.0);
}

#[test]
fn zero_temperature_limit_reaches_ground_state() {
    let cfg = fig1_config().with_beta(200.0);
    let gen = davies_generator(&cfg).unwrap();
    // Only decay channels survive: every A† rate is n̄·γ ≈ 0.
    let liou = crate::gkls::build_liouvillian(&gen);
    let prop = crate::gkls::Propagator::new(&liou).unwrap();
    let excited = DensityMatrix::pure(&[cx::<f64>(1.0, 0.0), cx(0.0, 0.0)]).unwrap();
    let spin = gibbs_state(&build_model(&cfg).unwrap().h_spin, cfg.beta).unwrap();
    let joint = DensityMatrix::new(HermitianMatrix::from_exact(tensor(
        excited.matrix(),
        spin.matrix(),
    )))
    .unwrap();
    let late = propagate(&prop, &joint, 1e6).unwrap();
    // Ground state of h_full is |g,g⟩ (index 3).
    assert!((late.matrix()[(3, 3)].re - 1.0).abs() < 1e-6);
}

#[test]
fn davies_stationary_state_is_gibbs_of_full_hamiltonian() {
    for beta in [0.1, 1.0, 10.0] {
        let cfg = fig1_config().with_beta(beta);
        let gen = davies_generator(&cfg).unwrap();
        let ops = build_model(&cfg).unwrap();
        let gibbs = gibbs_state(&ops.h_full, beta).unwrap();
        // Detailed balance: L(ρ_β) = 0.
        let residual = gen.apply(gibbs.matrix()).max_norm();
        assert!(
            residual < 1e-10,
            "detailed balance violated at β = {beta}: {residual:.3e}"
        );
    }
}

#[test]
fn davies_nullspace_oracle_matches_gibbs() {
    // Independent route: smallest-|λ| eigenvector of the Liouvillian.
    let cfg = fig1_config();
    let gen = davies_generator(&cfg).unwrap();
    let liou = crate::gkls::build_liouvillian(&gen);
    let eig = crate::qmatrix::complex_eig(liou.matrix()).unwrap();
    let (k_min, _) = eig
        .values
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.norm().partial_cmp(&b.1.norm()).unwrap())
        .unwrap();
    assert!(eig.values[k_min].norm() < 1e-12, "no zero mode found");
    let col: Vec<_> = (0..16).map(|i| eig.vectors[(i, k_min)]).collect();
    let stat = devectorize(&col, 4).unwrap();
    let stat = stat.scale(Cx::new(1.0, 0.0) / stat.trace());
    let gibbs = gibbs_state(&build_model(&cfg).unwrap().h_full, cfg.beta).unwrap();
    assert!((&stat - gibbs.matrix()).max_norm() < 1e-9);
}

#[test]
fn gibbs_state_basics() {
    // H = 0 → maximally mixed.
    let flat = gibbs_state(&HermitianMatrix::<f64>::zeros(3), 2.0).unwrap();
    approx_eq_mat(
        flat.matrix(),
        &ComplexMatrix::identity(3).scale_re(1.0 / 3.0),
        1e-15,
    );
    // Two-level closed form.
    let h = HermitianMatrix::from_exact(sigma_z::<f64>().scale_re(0.5));
    let beta = 1.7;
    let z = (-beta * 0.5f64).exp() + (beta * 0.5f64).exp();
    let g = gibbs_state(&h, beta).unwrap();
    assert!((g.matrix()[(0, 0)].re - (-beta * 0.5f64).exp() / z).abs() < 1e-14);
    assert!((g.matrix()[(1, 1)].re - (beta * 0.5f64).exp() / z).abs() < 1e-14);
}

#[test]
fn mean_force_reduces_to_system_hamiltonian_at_zero_coupling() {
    let cfg = ModelConfig {
        kappa: 0.0,
        ..fig1_config()
    };
    let h_star = mean_force_hamiltonian(&cfg).unwrap();
    let h_s = build_model(&cfg).unwrap().h_system;
    assert!((h_star.matrix() - h_s.matrix()).max_norm() < 1e-12);
}

#[test]
fn mean_force_definitional_round_trip() {
    // exp(-βH*)/Z* equals the reduced Gibbs state.
    let cfg = fig1_config().with_beta(2.3);
    let ops = build_model(&cfg).unwrap();
    let h_star = mean_force_hamiltonian(&cfg).unwrap();
    let z_star = (log_partition(&ops.h_full, cfg.beta).unwrap()
        - log_partition(&ops.h_spin, cfg.beta).unwrap())
    .exp();
    let lhs = h_star.exp_scaled(-cfg.beta).unwrap().scale_re(1.0 / z_star);
    let reduced = partial_trace(
        gibbs_state(&ops.h_full, cfg.beta).unwrap().matrix(),
        (2, 2),
        Keep::System,
    )
    .unwrap();
    assert!((lhs.matrix() - &reduced).max_norm() < 1e-10);
    // Tr[exp(-βH*)] = Z* comes along for free.
    assert!((h_star.exp_scaled(-cfg.beta).unwrap().trace_re() - z_star).abs() < 1e-10 * z_star);
}

#[test]
fn mean_force_low_temperature_limit() {
    // limit_{β→∞} H*(β) = diag(ω₀/2 - κ, -ω₀/2); the finite-β deviation is
    // ln(2)/β in the excited entry (the two ±κ levels contribute the system
    // excitation with weight 1/2 each), so convergence is O(1/β).
    let kappa = 0.9;
    let limit = [0.5 - kappa, -0.5];
    let mut prev_dev = f64::INFINITY;
    for beta in [200.0, 400.0, 800.0] {
        let cfg = fig1_config().with_beta(beta);
        let h_star = mean_force_hamiltonian(&cfg).unwrap();
        assert!(h_star.matrix()[(0, 1)].norm() < 1e-14, "H* stays diagonal");
        let dev_e = h_star.matrix()[(0, 0)].re - limit[0];
        let dev_g = (h_star.matrix()[(1, 1)].re - limit[1]).abs();
        assert!(dev_g < 1e-9, "ground entry converges exponentially");
        // The excited-entry deviation is ln2/β to high relative accuracy.
        assert!(
            (dev_e - 2f64.ln() / beta).abs() < 1e-6 / beta,
            "β = {beta}: deviation {dev_e:.6e} vs ln2/β = {:.6e}",
            2f64.ln() / beta
        );
        assert!(dev_e < prev_dev, "deviation decreases with β");
        prev_dev = dev_e;
    }
}

#[test]
fn reduced_map_is_identity_at_zero_time() {
    let family = ReducedMapFamily::new(&fig1_config()).unwrap();
    let map = family.at(0.0).unwrap();
    approx_eq_mat(map.matrix(), &ComplexMatrix::identity(4), 1e-14);
}

#[test]
fn reduced_map_relaxes_to_equilibrium_reduction() {
    let cfg = fig1_config();
    let family = ReducedMapFamily::new(&cfg).unwrap();
    let ops = build_model(&cfg).unwrap();
    let rho_eq = partial_trace(
        gibbs_state(&ops.h_full, cfg.beta).unwrap().matrix(),
        (2, 2),
        Keep::System,
    )
    .unwrap();
    let mut seed = 23u64;
    for _ in 0..3 {
        let rho0 = random_density(2, &mut seed);
        let late = family.evolve(&rho0, 1e6).unwrap();
        assert!(
            (late.matrix() - &rho_eq).max_norm() < 1e-6,
            "Λ_∞ must produce the reduced equilibrium state"
        );
    }
}

#[test]
fn reduced_map_matches_joint_propagation() {
    let cfg = fig1_config();
    let family = ReducedMapFamily::new(&cfg).unwrap();
    let gen = davies_generator(&cfg).unwrap();
    let liou = crate::gkls::build_liouvillian(&gen);
    let prop = crate::gkls::Propagator::new(&liou).unwrap();
    let spin = family.spin_state().clone();
    let mut seed = 29u64;
    let rho0 = random_density(2, &mut seed);
    let joint0 = DensityMatrix::new(HermitianMatrix::from_exact(tensor(
        rho0.matrix(),
        spin.matrix(),
    )))
    .unwrap();
    for &t in &[0.0, 3.0, 47.0, 513.0] {
        let via_map = family.evolve(&rho0, t).unwrap();
        let joint_t = propagate(&prop, &joint0, t).unwrap();
        let traced = partial_trace(joint_t.matrix(), (2, 2), Keep::System).unwrap();
        assert!(
            (via_map.matrix() - &traced).max_norm() < 1e-10,
            "map/linearity mismatch at t = {t}"
        );
    }
}

#[test]
fn reduced_maps_are_cptp_across_times() {
    let family = ReducedMapFamily::new(&fig1_config()).unwrap();
    for &t in &[0.0, 0.5, 5.0, 50.0, 500.0, 5000.0] {
        let map = family.at(t).unwrap(); // the constructor validates CPTP
        let report = is_cptp(&map, 1e-7).unwrap();
        assert!(report.is_cptp(), "t = {t}: {report:?}");
    }
}

#[test]
fn map_evolved_gibbs_operator_stays_positive() {
    // Λ_t(e^{-βH_S}) must stay positive definite for the log to exist.
    let cfg = fig1_config();
    let family = ReducedMapFamily::new(&cfg).unwrap();
    let h_s = build_model(&cfg).unwrap().h_system;
    let gibbs_op = h_s.exp_scaled(-cfg.beta).unwrap();
    for &t in &[0.0, 1.0, 10.0, 100.0, 1000.0] {
        let pushed = family.at(t).unwrap().apply(gibbs_op.matrix());
        let h = HermitianMatrix::new(pushed).unwrap();
        let min = h.eig().unwrap().eigenvalues[0];
        assert!(min > 0.0, "positivity lost at t = {t}: min eig {min:.3e}");
    }
}

#[test]
fn davies_dynamics_agrees_with_rk4() {
    let cfg = fig1_config();
    let gen = davies_generator(&cfg).unwrap();
    let liou = crate::gkls::build_liouvillian(&gen);
    let prop = crate::gkls::Propagator::new(&liou).unwrap();
    let ops = build_model(&cfg).unwrap();
    let spin = gibbs_state(&ops.h_spin, cfg.beta).unwrap();
    let ground = DensityMatrix::pure(&[cx::<f64>(0.0, 0.0), cx(1.0, 0.0)]).unwrap();
    let joint0 = DensityMatrix::new(HermitianMatrix::from_exact(tensor(
        ground.matrix(),
        spin.matrix(),
    )))
    .unwrap();
    for &t in &[1.0, 60.0] {
        let exact = propagate(&prop, &joint0, t).unwrap();
        let rk4 = ode_oracle(&gen, &joint0, t, 1e-3).unwrap();
        assert!((exact.matrix() - rk4.matrix()).max_norm() < 1e-9);
    }
}

#[test]
fn energy_basis_populations_follow_classical_rate_equation() {
    // In the secular generator the energy-eigenbasis populations decouple
    // from the coherences and obey a classical 4-level Pauli rate equation
    // with transition weights |⟨a|A(ω)|b⟩|² = 1/2 per channel. Integrating
    // that scalar ODE is fully independent of the superoperator machinery.
    let cfg = fig1_config();
    let gen = davies_generator(&cfg).unwrap();
    let liou = crate::gkls::build_liouvillian(&gen);
    let prop = crate::gkls::Propagator::new(&liou).unwrap();
    let ops = build_model(&cfg).unwrap();
    let eig = ops.h_full.eig().unwrap();
    // herm_eig sorts ascending: columns are {-ω₀, -κ, κ, ω₀}; relabel to
    // descending energy {1: ω₀, 2: κ, 3: -κ, 4: -ω₀}.
    let order = [3usize, 2, 1, 0];
    let basis_vec = |level: usize| -> Vec<Cx<f64>> {
        (0..4)
            .map(|i| eig.eigenvectors[(i, order[level])])
            .collect()
    };

    // Initial state diagonal in the energy basis.
    let p0 = [0.4, 0.3, 0.2, 0.1];
    let mut rho0 = ComplexMatrix::<f64>::zeros(4);
    for (level, &p) in p0.iter().enumerate() {
        let v = basis_vec(level);
        for i in 0..4 {
            for j in 0..4 {
                rho0[(i, j)] += v[i] * v[j].conj() * cx(p, 0.0);
            }
        }
    }
    let rho0 = DensityMatrix::new(HermitianMatrix::new(rho0).unwrap()).unwrap();

    // Classical rate matrix: channel ω₊ connects 1↔3 and 2↔4, channel ω₋
    // connects 1↔2 and 3↔4, all with weight 1/2.
    let (np, nm) = (
        n_bar(cfg.omega0 + cfg.kappa, cfg.beta),
        n_bar(cfg.omega0 - cfg.kappa, cfg.beta),
    );
    let (gp, gm) = (cfg.gamma_plus, cfg.gamma_minus);
    let down_p = 0.5 * gp * (np + 1.0);
    let up_p = 0.5 * gp * np;
    let down_m = 0.5 * gm * (nm + 1.0);
    let up_m = 0.5 * gm * nm;
    let pairs = [
        (0usize, 2usize, down_p, up_p),
        (1, 3, down_p, up_p),
        (0, 1, down_m, up_m),
        (2, 3, down_m, up_m),
    ];
    let rhs = |p: &[f64; 4]| -> [f64; 4] {
        let mut dp = [0.0; 4];
        for &(hi_level, lo_level, down, up) in &pairs {
            dp[lo_level] += down * p[hi_level] - up * p[lo_level];
            dp[hi_level] += up * p[lo_level] - down * p[hi_level];
        }
        dp
    };
    let t_final = 800.0;
    let steps = 8000usize;
    let h = t_final / steps as f64;
    let mut p = p0;
    for _ in 0..steps {
        let k1 = rhs(&p);
        let mut p2 = p;
        for i in 0..4 {
            p2[i] += 0.5 * h * k1[i];
        }
        let k2 = rhs(&p2);
        let mut p3 = p;
        for i in 0..4 {
            p3[i] += 0.5 * h * k2[i];
        }
        let k3 = rhs(&p3);
        let mut p4 = p;
        for i in 0..4 {
            p4[i] += h * k3[i];
        }
        let k4 = rhs(&p4);
        for i in 0..4 {
            p[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
    }

    let rho_t = propagate(&prop, &rho0, t_final).unwrap();
    for (level, &want) in p.iter().enumerate() {
        let v = basis_vec(level);
        let mut got = cx::<f64>(0.0, 0.0);
        for i in 0..4 {
            for j in 0..4 {
                got += v[i].conj() * rho_t.matrix()[(i, j)] * v[j];
            }
        }
        assert!(
            (got.re - want).abs() < 1e-9 && got.im.abs() < 1e-12,
            "population {level}: {} vs rate-equation {want}",
            got.re
        );
    }
}

#[test]
fn model_builds_at_f32_precision() {
    let cfg = ModelConfig::<f32>::default_model();
    let ops = build_model(&cfg).unwrap();
    let eig = ops.h_full.eig().unwrap();
    let want = [-1.0f32, -0.9, 0.9, 1.0];
    for (got, want) in eig.eigenvalues.iter().zip(want) {
        assert!((got - want).abs() < 1e-5);
    }
    let gibbs = gibbs_state(&ops.h_full, cfg.beta).unwrap();
    assert!((gibbs.trace_re() - 1.0).abs() < 1e-5);
}

#[test]
fn config_validation() {
    assert!(fig1_config().validate().is_ok());
    let mut bad = fig1_config();
    bad.kappa = 1.0; // ω₀ - κ = 0 not allowed
    assert!(bad.validate().is_err());
    let mut off = fig1_config();
    off.omega1 = 1.2;
    assert!(off.validate().is_err());
    off.allow_off_resonance = true;
    assert!(off.validate().is_ok());
    let scaled = ModelConfig::<f64>::with_scaling(4.0).unwrap();
    assert!((scaled.kappa - 0.225).abs() < 1e-15);
    assert!((scaled.gamma_plus - 2.5e-4).abs() < 1e-18);
}
