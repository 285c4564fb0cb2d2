//! Measurement-prepared and equilibrium-correlated initial conditions.
//!
//! A nonselective projective measurement on the system turns the joint Gibbs
//! state into the zero-discord form `Σ_k p_k Π_k ⊗ ρ_{R|k}`, whose reduced
//! dynamics is a genuine CPTP family: dephase in the measured basis, then
//! propagate each branch jointly and trace out the spin. The thermodynamic
//! assembly is unchanged except that the t = 0 reference operator is the
//! equilibrium effective Hamiltonian
//!
//! ```text
//! H(eq,β) = H* + β⁻¹ log[Z_Ss / (Z_S Z_spin)] · I
//! ```
//!
//! (mean force plus the trace-preservation constant), whose Gibbs exponential
//! is exactly what the equilibrated map family carries forward.
//!
//! The driven-from-equilibrium scenario — joint Gibbs state, driving switched
//! on at t = 0 — runs through the same machinery with the non-disturbing
//! measurement (projectors in the eigenbasis of the reduced equilibrium
//! state) and a driven branch propagator.

use crate::error::{Error, Result};
use crate::gkls::{build_liouvillian, Propagator, SuperOperator};
use crate::qmatrix::{
    partial_trace, tensor, vectorize, ComplexMatrix, DensityMatrix, HermitianMatrix, Keep,
};
use crate::scalar::{Cx, Scalar};
use crate::spinboson::{
    build_model, davies_generator, gibbs_state, log_partition, mean_force_from_parts, ModelConfig,
};

use super::driven::compose_driven_joints;
use super::{
    assemble_trace, beta_derivative, trapezoid_cumulative, validate_grid, Anchors, BetaStencil,
    DrivenProtocol, ScenarioSlices, ThermoOptions, ThermoTrace,
};

/// Outcome of the nonselective measurement on the joint Gibbs state.
#[derive(Debug, Clone)]
pub struct MeasuredState<T: Scalar> {
    /// Measured rank-1 projectors Π_k (as unit vectors |k⟩).
    pub basis: Vec<Vec<Cx<T>>>,
    /// Branch probabilities p_k = Tr[(Π_k ⊗ I) ρ_SR,β].
    pub weights: Vec<T>,
    /// Conditional spin states ρ_{R|k}.
    pub conditional_spins: Vec<DensityMatrix<T>>,
    /// Post-measurement system state Σ p_k Π_k.
    pub rho0: DensityMatrix<T>,
}

fn validate_basis<T: Scalar>(basis: &[Vec<Cx<T>>]) -> Result<()> {
    if basis.len() != 2 {
        return Err(Error::InvalidInput(
            "measurement basis must contain exactly 2 vectors for the qubit system".into(),
        ));
    }
    let tol = crate::scalar::scaled_tol::<T>(1e-10, 1e3);
    for (i, v) in basis.iter().enumerate() {
        if v.len() != 2 {
            return Err(Error::Shape("basis vectors must have length 2".into()));
        }
        let norm: T = v.iter().map(|z| z.norm_sqr()).fold(T::zero(), |a, b| a + b);
        if (norm - T::one()).abs() > tol {
            return Err(Error::InvalidInput(format!(
                "basis vector {i} is not normalized"
            )));
        }
        for w in basis.iter().skip(i + 1) {
            let dot: Cx<T> = v
                .iter()
                .zip(w.iter())
                .map(|(a, b)| a.conj() * *b)
                .fold(Cx::new(T::zero(), T::zero()), |a, b| a + b);
            if dot.norm() > tol {
                return Err(Error::InvalidInput(
                    "basis vectors are not orthogonal".into(),
                ));
            }
        }
    }
    Ok(())
}

/// Nonselective projective measurement of a complete orthonormal system
/// basis on the joint Gibbs state `Gibbs(H, β)`.
pub fn measured_initial_state<T: Scalar>(
    cfg: &ModelConfig<T>,
    basis: &[Vec<Cx<T>>],
) -> Result<MeasuredState<T>> {
    measured_initial_state_at(cfg, basis, cfg.beta)
}

fn measured_initial_state_at<T: Scalar>(
    cfg: &ModelConfig<T>,
    basis: &[Vec<Cx<T>>],
    beta: T,
) -> Result<MeasuredState<T>> {
    validate_basis(basis)?;
    let ops = build_model(cfg)?;
    let joint_gibbs = gibbs_state(&ops.h_full, beta)?;
    let id2 = ComplexMatrix::<T>::identity(2);

    let mut weights = Vec::with_capacity(basis.len());
    let mut conditional_spins = Vec::with_capacity(basis.len());
    let mut rho0 = ComplexMatrix::<T>::zeros(2);
    for (k, v) in basis.iter().enumerate() {
        let projector = projector_from(v);
        let embedded = tensor(&projector, &id2);
        let selected = &(&embedded * joint_gibbs.matrix()) * &embedded;
        let p_k = selected.trace().re;
        if p_k < T::fl(1e-14) {
            return Err(Error::DegenerateBranch {
                index: k,
                weight: p_k.to_f64_lossy(),
            });
        }
        let spin = partial_trace(&selected, (2, 2), Keep::Reservoir)?.scale_re(T::one() / p_k);
        conditional_spins.push(DensityMatrix::new(HermitianMatrix::new(spin)?)?);
        weights.push(p_k);
        rho0 = rho0.add_scaled(&projector, Cx::new(p_k, T::zero()));
    }
    let rho0 = DensityMatrix::new(HermitianMatrix::new(rho0)?)?;
    Ok(MeasuredState {
        basis: basis.to_vec(),
        weights,
        conditional_spins,
        rho0,
    })
}

fn projector_from<T: Scalar>(v: &[Cx<T>]) -> ComplexMatrix<T> {
    let d = v.len();
    ComplexMatrix::from_fn(d, |i, j| v[i] * v[j].conj())
}

/// Equilibrium effective thermal Hamiltonian
/// `H(eq,β) = H*(β) + β⁻¹ log[Z_Ss/(Z_S Z_spin)]·I`; its Gibbs exponential
/// has trace Z_S by trace preservation of the map family.
pub fn equilibrium_reference_hamiltonian<T: Scalar>(
    cfg: &ModelConfig<T>,
) -> Result<HermitianMatrix<T>> {
    let beta = cfg.beta;
    let ops = build_model(cfg)?;
    let h_star = mean_force_from_parts(&ops, beta)?;
    let log_ratio = log_partition(&ops.h_full, beta)?
        - log_partition(&ops.h_system, beta)?
        - log_partition(&ops.h_spin, beta)?;
    Ok(h_star.shift(log_ratio / beta))
}

/// The measured-branch CPTP family at one β offset: Λ̃_t(X) = Σ_k ⟨k|X|k⟩ ·
/// Tr_spin[Φ_t(Π_k ⊗ ρ_{R|k})], where Φ_t is the joint propagator (static
/// or piecewise driven).
struct BranchFamily<T: Scalar> {
    maps: Vec<SuperOperator<T>>,
}

fn branch_family<T: Scalar>(
    cfg: &ModelConfig<T>,
    measured: &MeasuredState<T>,
    grid: &[T],
    beta: T,
    protocol: Option<&DrivenProtocol<T>>,
    cptp_tol: T,
) -> Result<BranchFamily<T>> {
    let cfg_b = cfg.clone().with_beta(beta);
    // Joint propagators per grid point.
    let joints: Vec<SuperOperator<T>> = match protocol {
        None => {
            let generator = davies_generator(&cfg_b)?;
            let prop = Propagator::new(&build_liouvillian(&generator))?;
            grid.iter().map(|&t| prop.at(t)).collect::<Result<_>>()?
        }
        Some(protocol) => compose_driven_joints(&cfg_b, protocol, grid)?,
    };

    let mut maps = Vec::with_capacity(grid.len());
    for (k, joint) in joints.iter().enumerate() {
        // Evolved branch outputs σ_k(t) = Tr_spin[Φ_t(Π_k ⊗ ρ_{R|k})].
        let evolved: Vec<ComplexMatrix<T>> = measured
            .basis
            .iter()
            .zip(&measured.conditional_spins)
            .map(|(v, spin)| {
                let branch = tensor(&projector_from(v), spin.matrix());
                partial_trace(&joint.apply(&branch), (2, 2), Keep::System)
            })
            .collect::<Result<_>>()?;
        // Λ̃(E_ij) = Σ_k ⟨k|E_ij|k⟩ σ_k = Σ_k conj(v_k[i]) v_k[j] σ_k.
        let mut matrix = ComplexMatrix::<T>::zeros(4);
        for j in 0..2 {
            for i in 0..2 {
                let mut image = ComplexMatrix::<T>::zeros(2);
                for (v, sigma_k) in measured.basis.iter().zip(&evolved) {
                    let amp = v[i].conj() * v[j];
                    image = image.add_scaled(sigma_k, amp);
                }
                for (row, z) in vectorize(&image).into_iter().enumerate() {
                    matrix[(row, i + 2 * j)] = z;
                }
            }
        }
        let map = SuperOperator::from_matrix(2, matrix)?;
        let report = crate::dynmaps::is_cptp(&map, cptp_tol)?;
        if !report.is_cptp() {
            return Err(Error::MapConstruction(format!(
                "measured-branch map at t = {} failed CPTP: min Choi {:.3e}, TP residual {:.3e}",
                grid[k].to_f64_lossy(),
                report.min_choi_eigenvalue.to_f64_lossy(),
                report.tp_residual.to_f64_lossy()
            )));
        }
        maps.push(map);
    }
    Ok(BranchFamily { maps })
}

/// Thermodynamic trace after a nonselective measurement of `basis` on the
/// equilibrated joint state, with optional driving switched on at t = 0.
///
/// The t = 0 anchors use the equilibrium reference operator; for a
/// measurement in the eigenbasis of the reduced equilibrium state the
/// effective-Hamiltonian family is continuous at t = 0.
pub fn thermo_measured_general<T: Scalar>(
    cfg: &ModelConfig<T>,
    basis: &[Vec<Cx<T>>],
    protocol: Option<&DrivenProtocol<T>>,
    grid: &[T],
    opts: &ThermoOptions<T>,
) -> Result<ThermoTrace<T>> {
    validate_grid(grid, true)?;
    cfg.validate()?;
    if let Some(p) = protocol {
        p.validate_consistency(grid)?;
    }
    let beta = cfg.beta;
    let stencil = BetaStencil::new(beta, opts);
    let cptp_tol = crate::scalar::scaled_tol::<T>(1e-6, 1e5);

    let measured = measured_initial_state(cfg, basis)?;
    let h0 = match protocol {
        Some(p) => p.hamiltonian(grid[0]),
        None => build_model(cfg)?.h_system,
    };

    let mut maps = Vec::new();
    let mut exponents = Vec::new();
    let mut base_maps: Option<Vec<SuperOperator<T>>> = None;
    for beta_b in stencil.offsets() {
        let measured_b = measured_initial_state_at(cfg, basis, beta_b)?;
        let family = branch_family(cfg, &measured_b, grid, beta_b, protocol, cptp_tol)?;
        let h_eq_b = equilibrium_reference_hamiltonian(&cfg.clone().with_beta(beta_b))?;
        let slice_exponents: Vec<HermitianMatrix<T>> = match protocol {
            None => vec![h_eq_b.clone(); grid.len()],
            Some(p) => {
                // Work-integral operators from the branch-family adjoints.
                let mut acc = HermitianMatrix::<T>::zeros(2);
                let mut ops_out = Vec::with_capacity(grid.len());
                let mut prev: Option<HermitianMatrix<T>> = None;
                for (k, map) in family.maps.iter().enumerate() {
                    let pushed = map.adjoint().apply(p.derivative(grid[k]).matrix());
                    let cur = HermitianMatrix::with_tolerance(
                        pushed,
                        crate::scalar::scaled_tol::<T>(1e-9, 1e3),
                    )?;
                    if let Some(prev) = prev.take() {
                        let dt = grid[k] - grid[k - 1];
                        acc = acc.add_scaled(
                            &prev.add_scaled(&cur, T::one()).scale_re(dt * T::fl(0.5)),
                            T::one(),
                        );
                    }
                    prev = Some(cur);
                    ops_out.push(h_eq_b.add_scaled(&acc, T::one()));
                }
                ops_out
            }
        };
        if base_maps.is_none() {
            base_maps = Some(family.maps.clone());
        }
        maps.push(family.maps);
        exponents.push(slice_exponents);
    }
    let base_maps = base_maps.expect("base offset present");

    // Work trace W(t_k) from the physical-β family.
    let work = match protocol {
        None => vec![T::zero(); grid.len()],
        Some(p) => {
            let mut wdot = Vec::with_capacity(grid.len());
            for (k, map) in base_maps.iter().enumerate() {
                let rho_k = map.apply(measured.rho0.matrix());
                wdot.push(p.derivative(grid[k]).expectation(&rho_k));
            }
            trapezoid_cumulative(grid, &wdot)
        }
    };

    // t = 0 anchors built on the equilibrium reference operator.
    let h_eq = equilibrium_reference_hamiltonian(cfg)?;
    let d_h_eq = beta_derivative(
        |b| equilibrium_reference_hamiltonian(&cfg.clone().with_beta(b)),
        beta,
        opts.beta_step_rel,
        opts.richardson,
    )?;
    let rho0 = measured.rho0.clone();
    let e_u0 = h_eq.expectation(rho0.matrix()) + beta * d_h_eq.expectation(rho0.matrix());
    let s0 = rho0.von_neumann_entropy()? + beta * beta * d_h_eq.expectation(rho0.matrix());

    let anchors = Anchors {
        e_u0,
        s0,
        e_weak0: h0.expectation(rho0.matrix()),
        s_vn0: rho0.von_neumann_entropy()?,
    };
    let h_of_k = |k: usize| match protocol {
        Some(p) => p.hamiltonian(grid[k]),
        None => h0.clone(),
    };
    assemble_trace(
        grid,
        beta,
        &stencil,
        &ScenarioSlices { maps, exponents },
        &rho0,
        &anchors,
        &work,
        h_of_k,
        opts.eps_pd,
    )
}

/// Static measured-state pipeline (no driving).
pub fn thermo_measured<T: Scalar>(
    cfg: &ModelConfig<T>,
    basis: &[Vec<Cx<T>>],
    grid: &[T],
    opts: &ThermoOptions<T>,
) -> Result<ThermoTrace<T>> {
    thermo_measured_general(cfg, basis, None, grid, opts)
}

/// Eigenbasis of the reduced equilibrium state — the non-disturbing
/// measurement used by the driven-from-equilibrium scenario.
pub fn equilibrium_eigenbasis<T: Scalar>(cfg: &ModelConfig<T>) -> Result<Vec<Vec<Cx<T>>>> {
    let ops = build_model(cfg)?;
    let reduced = partial_trace(
        gibbs_state(&ops.h_full, cfg.beta)?.matrix(),
        (2, 2),
        Keep::System,
    )?;
    let eig = HermitianMatrix::new(reduced)?.eig()?;
    Ok((0..2)
        .map(|k| (0..2).map(|i| eig.eigenvectors[(i, k)]).collect())
        .collect())
}

/// Driven-from-equilibrium scenario: the joint state starts in the global
/// Gibbs state and driving switches on at t = 0. Realized as the measured
/// pipeline with the non-disturbing measurement (projectors in the
/// eigenbasis of the reduced equilibrium state), so ρ(0) is exactly the
/// reduced equilibrium state and the t = 0 reference is the equilibrium
/// effective Hamiltonian.
pub fn thermo_driven_from_equilibrium<T: Scalar>(
    cfg: &ModelConfig<T>,
    protocol: &DrivenProtocol<T>,
    grid: &[T],
    opts: &ThermoOptions<T>,
) -> Result<ThermoTrace<T>> {
    let basis = equilibrium_eigenbasis(cfg)?;
    thermo_measured_general(cfg, &basis, Some(protocol), grid, opts)
}
