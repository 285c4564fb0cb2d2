//! Nonequilibrium thermodynamics at arbitrary coupling strength.
//!
//! The central object is the effective thermal Hamiltonian
//! `-β⁻¹ log[Λ_t e^{-βH_S}]` obtained by pushing the Gibbs operator of the
//! bare system Hamiltonian through the reduced dynamical map. Internal
//! energy, free energy and entropy follow from it and its β-derivative:
//!
//! ```text
//! E_U(t) = Tr{ρ(t) [H(t,β) + β ∂_β H(t,β)]}
//! F(t)   = Tr{ρ(t) [H(t,β) + β⁻¹ log ρ(t)]}
//! S(t)   = Tr{ρ(t) [-log ρ(t) + β² ∂_β H(t,β)]}
//! ```
//!
//! with heat fixed by the first law and entropy production `σ = ΔS - βQ`.
//! β-derivatives are taken through the full construction — the dynamical map
//! itself depends on the reservoir temperature — by rebuilding the pipeline
//! at shifted β and differencing centrally (optional Richardson step).
//!
//! Driven protocols and measurement-prepared initial states reuse the same
//! assembly with the map family, reference exponent and t = 0 anchors
//! swapped out; see [`thermo_driven`], [`thermo_measured`] and
//! [`thermo_driven_from_equilibrium`].

mod driven;
mod measured;

pub use driven::{
    auxiliary_reference_operator, driven_map_family, effective_hamiltonian_driven, thermo_driven,
    DrivenMaps, DrivenProtocol,
};
pub use measured::{
    equilibrium_eigenbasis, equilibrium_reference_hamiltonian, measured_initial_state,
    thermo_driven_from_equilibrium, thermo_measured, thermo_measured_general, MeasuredState,
};

use crate::error::{Error, Result};
use crate::gkls::{state_from_evolved, SuperOperator};
use crate::qmatrix::{gibbs_with_log_z, DensityMatrix, HermitianMatrix};
use crate::scalar::Scalar;
use crate::spinboson::{build_model, mean_force_from_parts, ModelConfig, ReducedMapFamily};

/// One record of the thermodynamic trace (units ħ = k_B = 1).
#[derive(Debug, Clone, Copy)]
pub struct ThermoPoint<T: Scalar> {
    pub t: T,
    /// Internal energy E_U(t).
    pub e_u: T,
    /// Free energy F(t).
    pub f: T,
    /// Thermodynamic entropy S(t).
    pub s: T,
    /// Accumulated heat Q(t).
    pub q: T,
    /// Accumulated work W(t).
    pub w: T,
    /// Entropy production σ(t) = ΔS - βQ.
    pub sigma: T,
    /// Entropy production rate dσ/dt (finite differences on the grid).
    pub sigma_rate: T,
    /// Weak-coupling internal energy ⟨H_S(t)⟩.
    pub e_u_weak: T,
    /// Von Neumann entropy of ρ(t).
    pub s_vn: T,
}

/// Weak-coupling reference record.
#[derive(Debug, Clone, Copy)]
pub struct WeakPoint<T: Scalar> {
    pub t: T,
    /// ⟨H_S(t)⟩.
    pub h_s_mean: T,
    /// Von Neumann entropy.
    pub s_vn: T,
    /// Weak-coupling heat Q^(w)(t).
    pub q_weak: T,
    /// Weak-coupling entropy production ΔS_vN - βQ^(w).
    pub sigma_weak: T,
}

/// Mean-force comparison record (the nonequilibrium extension of the
/// equilibrium mean-force functionals by the substitution ρ_eq → ρ(t)).
#[derive(Debug, Clone, Copy)]
pub struct MeanForcePoint<T: Scalar> {
    pub t: T,
    pub e_u_star: T,
    pub s_star: T,
    pub q_star: T,
    pub sigma_star: T,
}

/// Pipeline knobs.
#[derive(Debug, Clone)]
pub struct ThermoOptions<T: Scalar> {
    /// Relative step for β-derivatives: h = beta_step_rel · max(β, 1).
    pub beta_step_rel: T,
    /// Richardson step-halving for the β-derivative.
    pub richardson: bool,
    /// Positivity floor forwarded to the matrix logarithm.
    pub eps_pd: T,
}

impl<T: Scalar> Default for ThermoOptions<T> {
    fn default() -> Self {
        Self {
            beta_step_rel: T::fl(1e-4),
            richardson: true,
            eps_pd: T::fl(1e-300),
        }
    }
}

/// A full thermodynamic trace plus the evolved states it was computed from.
#[derive(Debug, Clone)]
pub struct ThermoTrace<T: Scalar> {
    pub points: Vec<ThermoPoint<T>>,
    pub states: Vec<DensityMatrix<T>>,
    pub weak: Vec<WeakPoint<T>>,
}

/// Effective thermal Hamiltonian of a map and a reference exponent:
/// `-β⁻¹ log[ map(e^{-β g}) ]`.
///
/// Computed through the normalized Gibbs pushforward
/// `-β⁻¹ log[ map(gibbs(g,β)) ] - β⁻¹ log Z_g · I`, which never overflows at
/// large β. Reduces to the bare `g` for the identity map.
pub fn effective_hamiltonian<T: Scalar>(
    map: &SuperOperator<T>,
    g: &HermitianMatrix<T>,
    beta: T,
    eps_pd: T,
) -> Result<HermitianMatrix<T>> {
    let (gibbs, log_z) = gibbs_with_log_z(g, beta)?;
    let pushed = map.apply(gibbs.matrix());
    let herm = HermitianMatrix::with_tolerance(pushed, crate::scalar::scaled_tol::<T>(1e-9, 1e4))
        .map_err(|e| Error::MapConstruction(format!("pushed Gibbs operator: {e}")))?;
    let log_m = herm.log_pd_with(eps_pd)?;
    Ok(log_m.scale_re(-T::one() / beta).shift(-log_z / beta))
}

/// Central-difference β-derivative of a β-parametrized Hermitian family,
/// `h = h_rel · max(β, 1)`, optionally Richardson-extrapolated with h/2.
pub fn beta_derivative<T: Scalar, F>(
    f: F,
    beta: T,
    h_rel: T,
    richardson: bool,
) -> Result<HermitianMatrix<T>>
where
    F: Fn(T) -> Result<HermitianMatrix<T>>,
{
    if !(h_rel > T::zero()) {
        return Err(Error::InvalidInput(
            "β-derivative step must be positive".into(),
        ));
    }
    let h = h_rel * beta.max(T::one());
    let d_h = central_difference(&f, beta, h)?;
    if !richardson {
        return Ok(d_h);
    }
    let d_h2 = central_difference(&f, beta, h / T::fl(2.0))?;
    // (4 D(h/2) - D(h)) / 3
    let third = T::one() / T::fl(3.0);
    Ok(d_h2.scale_re(T::fl(4.0) * third).add_scaled(&d_h, -third))
}

fn central_difference<T: Scalar, F>(f: &F, beta: T, h: T) -> Result<HermitianMatrix<T>>
where
    F: Fn(T) -> Result<HermitianMatrix<T>>,
{
    let plus = f(beta + h)?;
    let minus = f(beta - h)?;
    Ok(plus
        .add_scaled(&minus, -T::one())
        .scale_re(T::one() / (T::fl(2.0) * h)))
}

/// The β-offsets at which shifted pipelines are evaluated, and the matching
/// combination rule. Centralizes the finite-difference stencil so every
/// pipeline differentiates identically.
#[derive(Debug, Clone)]
pub(crate) struct BetaStencil<T: Scalar> {
    pub beta: T,
    pub h: T,
    pub richardson: bool,
}

impl<T: Scalar> BetaStencil<T> {
    pub fn new(beta: T, opts: &ThermoOptions<T>) -> Self {
        Self {
            beta,
            h: opts.beta_step_rel * beta.max(T::one()),
            richardson: opts.richardson,
        }
    }

    /// Shifted β values, base first.
    pub fn offsets(&self) -> Vec<T> {
        let mut v = vec![self.beta, self.beta + self.h, self.beta - self.h];
        if self.richardson {
            let h2 = self.h / T::fl(2.0);
            v.push(self.beta + h2);
            v.push(self.beta - h2);
        }
        v
    }

    /// Combine shifted samples (ordered as [`offsets`], base excluded) into
    /// the derivative estimate.
    pub fn combine(&self, shifted: &[HermitianMatrix<T>]) -> HermitianMatrix<T> {
        let two_h = T::fl(2.0) * self.h;
        let d_h = shifted[0]
            .add_scaled(&shifted[1], -T::one())
            .scale_re(T::one() / two_h);
        if !self.richardson {
            return d_h;
        }
        let d_h2 = shifted[2]
            .add_scaled(&shifted[3], -T::one())
            .scale_re(T::one() / self.h);
        let third = T::one() / T::fl(3.0);
        d_h2.scale_re(T::fl(4.0) * third).add_scaled(&d_h, -third)
    }
}

/// Cumulative trapezoid of sampled integrand values over the grid.
pub(crate) fn trapezoid_cumulative<T: Scalar>(grid: &[T], integrand: &[T]) -> Vec<T> {
    let mut acc = T::zero();
    let mut out = Vec::with_capacity(grid.len());
    out.push(T::zero());
    for k in 1..grid.len() {
        let dt = grid[k] - grid[k - 1];
        acc = acc + (integrand[k] + integrand[k - 1]) * dt * T::fl(0.5);
        out.push(acc);
    }
    out
}

/// Centered finite-difference rates on a (possibly nonuniform) grid,
/// one-sided at the endpoints.
pub(crate) fn grid_derivative<T: Scalar>(grid: &[T], values: &[T]) -> Vec<T> {
    let n = grid.len();
    let mut out = vec![T::zero(); n];
    if n < 2 {
        return out;
    }
    out[0] = (values[1] - values[0]) / (grid[1] - grid[0]);
    out[n - 1] = (values[n - 1] - values[n - 2]) / (grid[n - 1] - grid[n - 2]);
    for k in 1..n - 1 {
        out[k] = (values[k + 1] - values[k - 1]) / (grid[k + 1] - grid[k - 1]);
    }
    out
}

pub(crate) fn validate_grid<T: Scalar>(grid: &[T], require_zero_start: bool) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::InvalidInput("empty time grid".into()));
    }
    if !(grid[0] >= T::zero()) {
        return Err(Error::InvalidInput("grid times must be nonnegative".into()));
    }
    if require_zero_start && !grid[0].is_zero() {
        return Err(Error::InvalidInput(
            "this pipeline requires the grid to start at t = 0".into(),
        ));
    }
    for w in grid.windows(2) {
        if !(w[1] > w[0]) {
            return Err(Error::InvalidInput(
                "grid times must be strictly increasing".into(),
            ));
        }
    }
    Ok(())
}

/// Everything the generic assembly needs from a scenario, per β offset.
pub(crate) struct ScenarioSlices<T: Scalar> {
    /// Map families: `slices[b][k]` is the system map at grid time k for the
    /// b-th β offset (base first).
    pub maps: Vec<Vec<SuperOperator<T>>>,
    /// Reference exponents `G(t_k)` per offset (same indexing).
    pub exponents: Vec<Vec<HermitianMatrix<T>>>,
}

pub(crate) struct Anchors<T: Scalar> {
    /// E_U(0): the t = 0 internal-energy reference entering Q.
    pub e_u0: T,
    /// S(0): the t = 0 entropy reference entering σ.
    pub s0: T,
    /// ⟨H_S(0)⟩ in the weak-coupling reference.
    pub e_weak0: T,
    /// S_vN(0).
    pub s_vn0: T,
}

/// Generic per-point assembly shared by all pipelines.
#[allow(clippy::too_many_arguments)]
pub(crate) fn assemble_trace<T: Scalar>(
    grid: &[T],
    beta: T,
    stencil: &BetaStencil<T>,
    slices: &ScenarioSlices<T>,
    rho0: &DensityMatrix<T>,
    anchors: &Anchors<T>,
    work: &[T],
    h_system_at: impl Fn(usize) -> HermitianMatrix<T>,
    eps_pd: T,
) -> Result<ThermoTrace<T>> {
    let n = grid.len();
    let offsets = stencil.offsets();
    let mut states = Vec::with_capacity(n);
    let mut points = Vec::with_capacity(n);
    let mut weak = Vec::with_capacity(n);
    let mut sigmas = Vec::with_capacity(n);

    for k in 0..n {
        let t = grid[k];
        let rho_t = state_from_evolved(slices.maps[0][k].apply(rho0.matrix()), t)?;

        let h_eff =
            effective_hamiltonian(&slices.maps[0][k], &slices.exponents[0][k], beta, eps_pd)
                .map_err(|e| annotate_time(e, t))?;
        let mut shifted = Vec::with_capacity(slices.maps.len() - 1);
        for (b, &beta_b) in offsets.iter().enumerate().skip(1) {
            shifted.push(
                effective_hamiltonian(&slices.maps[b][k], &slices.exponents[b][k], beta_b, eps_pd)
                    .map_err(|e| annotate_time(e, t))?,
            );
        }
        let dh = stencil.combine(&shifted);

        let s_vn = rho_t.von_neumann_entropy()?;
        let mean_h = h_eff.expectation(rho_t.matrix());
        let mean_dh = dh.expectation(rho_t.matrix());
        let e_u = mean_h + beta * mean_dh;
        let s = s_vn + beta * beta * mean_dh;
        let f = mean_h - s_vn / beta;
        let w_k = work[k];
        let q = e_u - anchors.e_u0 - w_k;
        let sigma = s - anchors.s0 - beta * q;

        let h_s = h_system_at(k);
        let e_u_weak = h_s.expectation(rho_t.matrix());
        let q_weak = e_u_weak - anchors.e_weak0 - w_k;
        let sigma_weak = s_vn - anchors.s_vn0 - beta * q_weak;

        points.push(ThermoPoint {
            t,
            e_u,
            f,
            s,
            q,
            w: w_k,
            sigma,
            sigma_rate: T::zero(),
            e_u_weak,
            s_vn,
        });
        weak.push(WeakPoint {
            t,
            h_s_mean: e_u_weak,
            s_vn,
            q_weak,
            sigma_weak,
        });
        sigmas.push(sigma);
        states.push(rho_t);
    }

    let rates = grid_derivative(grid, &sigmas);
    for (p, r) in points.iter_mut().zip(rates) {
        p.sigma_rate = r;
    }

    Ok(ThermoTrace {
        points,
        states,
        weak,
    })
}

fn annotate_time<T: Scalar>(e: Error, t: T) -> Error {
    match e {
        Error::NotPositiveDefinite {
            min_eigenvalue,
            threshold,
            ..
        } => Error::NotPositiveDefinite {
            min_eigenvalue,
            threshold,
            context: format!("map-evolved Gibbs operator at t = {}", t.to_f64_lossy()),
        },
        other => other,
    }
}

/// Thermodynamic trace for the undriven model from a factorized initial
/// condition `ρ0 ⊗ ρ_spin,β`: heat is the full internal-energy change
/// (W = 0) and σ = ΔS - βQ.
pub fn thermo_static<T: Scalar>(
    cfg: &ModelConfig<T>,
    rho0: &DensityMatrix<T>,
    grid: &[T],
    opts: &ThermoOptions<T>,
) -> Result<ThermoTrace<T>> {
    validate_grid(grid, false)?;
    cfg.validate()?;
    if rho0.dim() != 2 {
        return Err(Error::Shape("initial system state must be 2x2".into()));
    }
    let stencil = BetaStencil::new(cfg.beta, opts);
    let ops = build_model(cfg)?;

    let mut maps = Vec::new();
    let mut exponents = Vec::new();
    for beta_b in stencil.offsets() {
        let cfg_b = cfg.clone().with_beta(beta_b);
        let family = ReducedMapFamily::new(&cfg_b)?;
        let mut slice_maps = Vec::with_capacity(grid.len());
        for &t in grid {
            slice_maps.push(family.at(t)?);
        }
        maps.push(slice_maps);
        exponents.push(vec![ops.h_system.clone(); grid.len()]);
    }

    let anchors = Anchors {
        e_u0: ops.h_system.expectation(rho0.matrix()),
        s0: rho0.von_neumann_entropy()?,
        e_weak0: ops.h_system.expectation(rho0.matrix()),
        s_vn0: rho0.von_neumann_entropy()?,
    };
    let work = vec![T::zero(); grid.len()];
    assemble_trace(
        grid,
        cfg.beta,
        &stencil,
        &ScenarioSlices { maps, exponents },
        rho0,
        &anchors,
        &work,
        |_| ops.h_system.clone(),
        opts.eps_pd,
    )
}

/// Thermodynamic trace for a directly specified β-parametrized GKLS
/// generator acting on the system itself (no reservoir reduction):
/// Λ_t = e^{tL(β)}.
///
/// This is the entry point for semigroup scenarios such as the single-qubit
/// weak-coupling reference dynamics; for a Davies generator with fixed point
/// `Gibbs(h_system, β)` the effective Hamiltonian stays pinned at `h_system`
/// and the trace reduces to the weak-coupling quantities exactly.
pub fn thermo_semigroup<T: Scalar, F>(
    generator_at: F,
    h_system: &HermitianMatrix<T>,
    beta: T,
    rho0: &DensityMatrix<T>,
    grid: &[T],
    opts: &ThermoOptions<T>,
) -> Result<ThermoTrace<T>>
where
    F: Fn(T) -> Result<crate::gkls::GKLSGenerator<T>>,
{
    validate_grid(grid, false)?;
    if rho0.dim() != h_system.dim() {
        return Err(Error::Shape(
            "state and Hamiltonian dimensions differ".into(),
        ));
    }
    let stencil = BetaStencil::new(beta, opts);
    let mut maps = Vec::new();
    let mut exponents = Vec::new();
    for beta_b in stencil.offsets() {
        let generator = generator_at(beta_b)?;
        let prop = crate::gkls::Propagator::new(&crate::gkls::build_liouvillian(&generator))?;
        let slice: Vec<SuperOperator<T>> =
            grid.iter().map(|&t| prop.at(t)).collect::<Result<_>>()?;
        maps.push(slice);
        exponents.push(vec![h_system.clone(); grid.len()]);
    }
    let anchors = Anchors {
        e_u0: h_system.expectation(rho0.matrix()),
        s0: rho0.von_neumann_entropy()?,
        e_weak0: h_system.expectation(rho0.matrix()),
        s_vn0: rho0.von_neumann_entropy()?,
    };
    let work = vec![T::zero(); grid.len()];
    assemble_trace(
        grid,
        beta,
        &stencil,
        &ScenarioSlices { maps, exponents },
        rho0,
        &anchors,
        &work,
        |_| h_system.clone(),
        opts.eps_pd,
    )
}

/// Weak-coupling reference columns for a given initial state: ⟨H_S⟩, S_vN,
/// the weak heat and the weak entropy production.
pub fn weak_reference<T: Scalar>(
    cfg: &ModelConfig<T>,
    rho0: &DensityMatrix<T>,
    grid: &[T],
) -> Result<Vec<WeakPoint<T>>> {
    validate_grid(grid, false)?;
    let family = ReducedMapFamily::new(cfg)?;
    let ops = build_model(cfg)?;
    let mut out = Vec::with_capacity(grid.len());
    let e0 = ops.h_system.expectation(rho0.matrix());
    let s0 = rho0.von_neumann_entropy()?;
    for &t in grid {
        let rho_t = family.evolve(rho0, t)?;
        let h_s_mean = ops.h_system.expectation(rho_t.matrix());
        let s_vn = rho_t.von_neumann_entropy()?;
        // Static Hamiltonian: Q^(w)(t) = ∫ Tr[H_S ρ̇] ds = ⟨H_S⟩(t) - ⟨H_S⟩(0).
        let q_weak = h_s_mean - e0;
        out.push(WeakPoint {
            t,
            h_s_mean,
            s_vn,
            q_weak,
            sigma_weak: s_vn - s0 - cfg.beta * q_weak,
        });
    }
    Ok(out)
}

/// Mean-force comparison trace over externally supplied states: applies the
/// equilibrium mean-force functionals with ρ_eq replaced by ρ(t).
pub fn mean_force_thermo<T: Scalar>(
    cfg: &ModelConfig<T>,
    states: &[DensityMatrix<T>],
    grid: &[T],
    opts: &ThermoOptions<T>,
) -> Result<Vec<MeanForcePoint<T>>> {
    validate_grid(grid, false)?;
    if states.len() != grid.len() {
        return Err(Error::Shape(format!(
            "{} states for {} grid times",
            states.len(),
            grid.len()
        )));
    }
    let beta = cfg.beta;
    let h_star = mean_force_from_parts(&build_model(cfg)?, beta)?;
    let d_h_star = beta_derivative(
        |b| mean_force_from_parts(&build_model(cfg)?, b),
        beta,
        opts.beta_step_rel,
        opts.richardson,
    )?;
    let aux = h_star.add_scaled(&d_h_star, beta);

    let mut out = Vec::with_capacity(grid.len());
    let mut first: Option<(T, T)> = None;
    for (&t, rho) in grid.iter().zip(states) {
        let e_u_star = aux.expectation(rho.matrix());
        let s_star = rho.von_neumann_entropy()? + beta * beta * d_h_star.expectation(rho.matrix());
        let (e0, s0) = *first.get_or_insert((e_u_star, s_star));
        let q_star = e_u_star - e0;
        out.push(MeanForcePoint {
            t,
            e_u_star,
            s_star,
            q_star,
            sigma_star: s_star - s0 - beta * q_star,
        });
    }
    Ok(out)
}
