//! Dynamical-map diagnostics: Choi matrices, CPTP verification, intermediate
//! maps Λ_{t,s}, and CP-divisibility scans.
//!
//! The Choi convention is `C = Σ_ij E_ij ⊗ S(E_ij)`, the action of `S ⊗ id`
//! on the unnormalized maximally entangled state; a map is completely
//! positive iff `C ⪰ 0`, and trace preserving iff `Tr_2`-partial traces of
//! `C` give the identity (checked here through the left-null-vector residual
//! of the superoperator instead).

use crate::error::{Error, Result};
use crate::gkls::SuperOperator;
use crate::qmatrix::{complex_eig, ComplexMatrix, HermitianMatrix, Lu};
use crate::scalar::{Cx, Scalar};

/// Choi matrix of a Hermiticity-preserving superoperator.
#[derive(Debug, Clone)]
pub struct ChoiMatrix<T: Scalar> {
    /// Operator dimension `d` of the underlying map.
    dim: usize,
    matrix: HermitianMatrix<T>,
}

impl<T: Scalar> ChoiMatrix<T> {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn matrix(&self) -> &HermitianMatrix<T> {
        &self.matrix
    }

    /// Trace; equals `d` for trace-preserving maps.
    pub fn trace(&self) -> T {
        self.matrix.trace_re()
    }

    pub fn min_eigenvalue(&self) -> Result<T> {
        Ok(self.matrix.eig()?.eigenvalues[0])
    }
}

/// Channel-state duality: `C[(i,k),(j,l)] = ⟨k| S(E_ij) |l⟩`.
pub fn choi<T: Scalar>(s: &SuperOperator<T>) -> Result<ChoiMatrix<T>> {
    let d = s.dim();
    let mut c = ComplexMatrix::<T>::zeros(d * d);
    for i in 0..d {
        for j in 0..d {
            let mut basis = ComplexMatrix::<T>::zeros(d);
            basis[(i, j)] = Cx::new(T::one(), T::zero());
            let image = s.apply(&basis);
            for k in 0..d {
                for l in 0..d {
                    c[(i * d + k, j * d + l)] = image[(k, l)];
                }
            }
        }
    }
    // Hermitian for Hermiticity-preserving maps; tolerate rounding noise but
    // reject genuinely non-Hermitian Chois.
    let scale = c.max_norm().max(T::one());
    let herm = HermitianMatrix::with_tolerance(c, T::fl(1e-9) * scale).map_err(|_| {
        Error::MapConstruction(
            "Choi matrix is not Hermitian: map does not preserve hermiticity".into(),
        )
    })?;
    Ok(ChoiMatrix {
        dim: d,
        matrix: herm,
    })
}

/// Rebuild the superoperator from its Choi matrix (duality round trip).
pub fn superop_from_choi<T: Scalar>(c: &ChoiMatrix<T>) -> Result<SuperOperator<T>> {
    let d = c.dim;
    let m = c.matrix.matrix();
    let mut s = ComplexMatrix::<T>::zeros(d * d);
    for i in 0..d {
        for j in 0..d {
            for k in 0..d {
                for l in 0..d {
                    // vec-index (row k + d*l) of S(E_ij), column (i + d*j)
                    s[(k + d * l, i + d * j)] = m[(i * d + k, j * d + l)];
                }
            }
        }
    }
    SuperOperator::from_matrix(d, s)
}

/// CPTP verdict with diagnostics.
#[derive(Debug, Clone)]
pub struct CptpReport<T: Scalar> {
    pub cp: bool,
    pub tp: bool,
    /// Minimum eigenvalue of the (hermitized) Choi matrix.
    pub min_choi_eigenvalue: T,
    /// Max deviation of `vec(I)† S` from `vec(I)†`.
    pub tp_residual: T,
}

impl<T: Scalar> CptpReport<T> {
    pub fn is_cptp(&self) -> bool {
        self.cp && self.tp
    }
}

/// Verdict-returning CPTP check: CP iff the Choi minimum eigenvalue is
/// ≥ -tol, TP iff the left-null-vector residual is ≤ tol.
pub fn is_cptp<T: Scalar>(s: &SuperOperator<T>, tol: T) -> Result<CptpReport<T>> {
    if !(tol > T::zero()) {
        return Err(Error::InvalidInput(
            "CPTP tolerance must be positive".into(),
        ));
    }
    let tp_residual = s.tp_residual();
    // For the CP side, hermitize unconditionally: a non-Hermitian Choi means
    // the hermiticity deviation shows up in the eigenvalue diagnostics anyway.
    let d = s.dim();
    let mut c = ComplexMatrix::<T>::zeros(d * d);
    for i in 0..d {
        for j in 0..d {
            let mut basis = ComplexMatrix::<T>::zeros(d);
            basis[(i, j)] = Cx::new(T::one(), T::zero());
            let image = s.apply(&basis);
            for k in 0..d {
                for l in 0..d {
                    c[(i * d + k, j * d + l)] = image[(k, l)];
                }
            }
        }
    }
    let herm_dev = c.hermiticity_deviation();
    let min_choi_eigenvalue = HermitianMatrix::from_exact(c).eig()?.eigenvalues[0];
    let cp = min_choi_eigenvalue >= -tol && herm_dev <= tol;
    let tp = tp_residual <= tol;
    Ok(CptpReport {
        cp,
        tp,
        min_choi_eigenvalue,
        tp_residual,
    })
}

/// Condition-number limit above which intermediate-map inversion refuses to
/// answer rather than silently regularize.
pub const CONDITION_LIMIT: f64 = 1e12;

/// Inverse of a superoperator through its complex eigendecomposition, with a
/// condition-number guard. No pseudo-inverse fallback: silent regularization
/// would corrupt divisibility verdicts.
pub fn superop_inverse<T: Scalar>(s: &SuperOperator<T>) -> Result<SuperOperator<T>> {
    let m = s.matrix();
    let eig = complex_eig(m)?;
    let scale = m.max_norm().max(T::min_positive_value());
    let min_mag = eig
        .values
        .iter()
        .map(|v| v.norm())
        .fold(T::infinity(), |a, b| a.min(b));
    if min_mag <= T::epsilon() * scale {
        return Err(Error::IllConditioned {
            cond: f64::INFINITY,
            limit: CONDITION_LIMIT,
        });
    }
    let lu = Lu::factor(&eig.vectors)?;
    let v_inv = lu.inverse();
    let n = m.dim();
    // V · diag(1/λ) · V⁻¹
    let mut scaled = eig.vectors.clone();
    for j in 0..n {
        let inv = Cx::new(T::one(), T::zero()) / eig.values[j];
        for i in 0..n {
            scaled[(i, j)] = scaled[(i, j)] * inv;
        }
    }
    let inv_matrix = &scaled * &v_inv;
    let cond = (m.inf_norm() * inv_matrix.inf_norm()).to_f64_lossy();
    if !cond.is_finite() || cond > CONDITION_LIMIT {
        return Err(Error::IllConditioned {
            cond,
            limit: CONDITION_LIMIT,
        });
    }
    SuperOperator::from_matrix(s.dim(), inv_matrix)
}

/// Intermediate map `Λ_{t,s} = Λ_t · Λ_s⁻¹`.
pub fn intermediate_map<T: Scalar>(
    s_t: &SuperOperator<T>,
    s_s: &SuperOperator<T>,
) -> Result<SuperOperator<T>> {
    if s_t.dim() != s_s.dim() {
        return Err(Error::Shape("map dimensions differ".into()));
    }
    let inv = superop_inverse(s_s)?;
    Ok(s_t.compose(&inv))
}

/// Verdict for one scan interval.
#[derive(Debug, Clone)]
pub enum DivisibilityVerdict<T: Scalar> {
    /// Intermediate map CPTP at the tolerance.
    CpDivisible { min_choi_eigenvalue: T },
    /// Intermediate map exists but is not CP (or not TP) at the tolerance —
    /// a non-Markovian interval.
    NonCpDivisible {
        min_choi_eigenvalue: T,
        tp_residual: T,
    },
    /// Inversion failed; no verdict.
    Indeterminate { reason: String },
}

impl<T: Scalar> DivisibilityVerdict<T> {
    pub fn is_cp_divisible(&self) -> bool {
        matches!(self, DivisibilityVerdict::CpDivisible { .. })
    }

    pub fn is_non_cp(&self) -> bool {
        matches!(self, DivisibilityVerdict::NonCpDivisible { .. })
    }
}

/// One interval of a divisibility scan.
#[derive(Debug, Clone)]
pub struct DivisibilityInterval<T: Scalar> {
    pub t_start: T,
    pub t_end: T,
    pub verdict: DivisibilityVerdict<T>,
}

/// Scan consecutive pairs of a time-indexed map family for CP-divisibility.
/// Inversion failures are recorded per interval without aborting the scan.
pub fn divisibility_scan<T: Scalar>(
    maps: &[(T, SuperOperator<T>)],
    tol: T,
) -> Result<Vec<DivisibilityInterval<T>>> {
    if maps.len() < 2 {
        return Err(Error::InvalidInput(
            "divisibility scan needs at least two time points".into(),
        ));
    }
    for pair in maps.windows(2) {
        if !(pair[1].0 > pair[0].0) {
            return Err(Error::InvalidInput(
                "scan times must be strictly increasing".into(),
            ));
        }
    }
    let mut out = Vec::with_capacity(maps.len() - 1);
    for pair in maps.windows(2) {
        let (s, map_s) = &pair[0];
        let (t, map_t) = &pair[1];
        let verdict = match intermediate_map(map_t, map_s) {
            Ok(inter) => {
                let report = is_cptp(&inter, tol)?;
                if report.is_cptp() {
                    DivisibilityVerdict::CpDivisible {
                        min_choi_eigenvalue: report.min_choi_eigenvalue,
                    }
                } else {
                    DivisibilityVerdict::NonCpDivisible {
                        min_choi_eigenvalue: report.min_choi_eigenvalue,
                        tp_residual: report.tp_residual,
                    }
                }
            }
            Err(e) => DivisibilityVerdict::Indeterminate {
                reason: e.to_string(),
            },
        };
        out.push(DivisibilityInterval {
            t_start: *s,
            t_end: *t,
            verdict,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gkls::{build_liouvillian, GKLSGenerator, Propagator};
    use crate::qmatrix::tests::approx_eq_mat;
    use crate::qmatrix::{DensityMatrix, HermitianMatrix};
    use crate::scalar::cx;

    fn damped_qubit_propagator(gamma: f64) -> Propagator<f64> {
        let h = HermitianMatrix::diag(&[0.5, -0.5]);
        let mut sm = ComplexMatrix::<f64>::zeros(2);
        sm[(1, 0)] = cx(1.0, 0.0);
        let g = GKLSGenerator::new(h, vec![(sm, gamma)]).unwrap();
        Propagator::new(&build_liouvillian(&g)).unwrap()
    }

    #[test]
    fn choi_of_identity_is_maximally_entangled_projector() {
        let id = SuperOperator::<f64>::identity(2);
        let c = choi(&id).unwrap();
        assert!((c.trace() - 2.0).abs() < 1e-14);
        // d·|Ω⟩⟨Ω| with |Ω⟩ = (|00⟩+|11⟩)/√2: entries 1 at (0,0),(0,3),(3,0),(3,3)
        let m = c.matrix().matrix();
        for (i, j, want) in [
            (0, 0, 1.0),
            (0, 3, 1.0),
            (3, 0, 1.0),
            (3, 3, 1.0),
            (1, 1, 0.0),
            (2, 2, 0.0),
        ] {
            assert!((m[(i, j)].re - want).abs() < 1e-14, "entry ({i},{j})");
        }
    }

    #[test]
    fn choi_of_depolarizing_map() {
        // Λ(ρ) = Tr[ρ]·I/2 has superoperator |vec(I/2)⟩⟨vec(I)|.
        let d = 2usize;
        let mut m = ComplexMatrix::<f64>::zeros(4);
        for i in 0..d {
            for j in 0..d {
                m[(i + d * i, j + d * j)] = cx(0.5, 0.0);
            }
        }
        let s = SuperOperator::from_matrix(2, m).unwrap();
        let c = choi(&s).unwrap();
        // I/2 ⊗ I scaled to trace d = I/2 on the doubled space.
        approx_eq_mat(
            c.matrix().matrix(),
            &ComplexMatrix::identity(4).scale_re(0.5),
            1e-14,
        );
        assert!(is_cptp(&s, 1e-10).unwrap().is_cptp());
    }

    #[test]
    fn choi_duality_round_trip() {
        let prop = damped_qubit_propagator(0.35);
        let map = prop.at(1.3).unwrap();
        let rebuilt = superop_from_choi(&choi(&map).unwrap()).unwrap();
        approx_eq_mat(rebuilt.matrix(), map.matrix(), 1e-11);
    }

    #[test]
    fn transpose_map_is_not_cp() {
        // The transpose map in the column-stacking convention is the SWAP.
        let d = 2usize;
        let mut m = ComplexMatrix::<f64>::zeros(4);
        for i in 0..d {
            for j in 0..d {
                m[(j + d * i, i + d * j)] = cx(1.0, 0.0);
            }
        }
        let s = SuperOperator::from_matrix(2, m).unwrap();
        let report = is_cptp(&s, 1e-10).unwrap();
        assert!(!report.cp, "transpose map must fail CP");
        assert!(report.tp, "transpose map is trace preserving");
        assert!((report.min_choi_eigenvalue + 1.0).abs() < 1e-12);
    }

    #[test]
    fn identity_map_is_cptp() {
        let report = is_cptp(&SuperOperator::<f64>::identity(3), 1e-12).unwrap();
        assert!(report.is_cptp());
        assert!(report.min_choi_eigenvalue.abs() < 1e-14);
        assert!(report.tp_residual < 1e-14);
    }

    #[test]
    fn intermediate_map_of_equal_maps_is_identity() {
        let prop = damped_qubit_propagator(0.5);
        let map = prop.at(0.8).unwrap();
        let inter = intermediate_map(&map, &map).unwrap();
        approx_eq_mat(inter.matrix(), &ComplexMatrix::identity(4), 1e-11);
    }

    #[test]
    fn semigroup_intermediate_map_is_shifted_propagator() {
        let prop = damped_qubit_propagator(0.4);
        let (t, s) = (2.0, 0.7);
        let inter = intermediate_map(&prop.at(t).unwrap(), &prop.at(s).unwrap()).unwrap();
        approx_eq_mat(inter.matrix(), prop.at(t - s).unwrap().matrix(), 1e-9);
    }

    #[test]
    fn intermediate_map_composition_identity() {
        let prop = damped_qubit_propagator(0.25);
        let (t, s) = (2.0, 1.0);
        let map_t = prop.at(t).unwrap();
        let map_s = prop.at(s).unwrap();
        let inter = intermediate_map(&map_t, &map_s).unwrap();
        let recomposed = inter.compose(&map_s);
        approx_eq_mat(recomposed.matrix(), map_t.matrix(), 1e-9);
    }

    #[test]
    fn inversion_guard_on_singular_map() {
        // Completely depolarizing map is singular.
        let d = 2usize;
        let mut m = ComplexMatrix::<f64>::zeros(4);
        for i in 0..d {
            for j in 0..d {
                m[(i + d * i, j + d * j)] = cx(0.5, 0.0);
            }
        }
        let s = SuperOperator::from_matrix(2, m).unwrap();
        assert!(matches!(
            superop_inverse(&s),
            Err(Error::IllConditioned { .. })
        ));
    }

    #[test]
    fn semigroup_scan_is_divisible_everywhere() {
        let prop = damped_qubit_propagator(0.3);
        let maps: Vec<(f64, SuperOperator<f64>)> = (0..8)
            .map(|k| {
                let t = 0.25 * (k + 1) as f64;
                (t, prop.at(t).unwrap())
            })
            .collect();
        let scan = divisibility_scan(&maps, 1e-7).unwrap();
        assert_eq!(scan.len(), 7);
        assert!(scan.iter().all(|iv| iv.verdict.is_cp_divisible()));
    }

    #[test]
    fn scan_rejects_unordered_times() {
        let id = SuperOperator::<f64>::identity(2);
        let maps = vec![(1.0, id.clone()), (0.5, id)];
        assert!(divisibility_scan(&maps, 1e-7).is_err());
    }

    #[test]
    fn choi_trace_equals_dim_for_tp_maps() {
        let prop = damped_qubit_propagator(0.2);
        for &t in &[0.1, 1.0, 4.0] {
            let c = choi(&prop.at(t).unwrap()).unwrap();
            assert!((c.trace() - 2.0).abs() < 1e-9);
        }
    }

    #[test]
    fn unital_dephasing_stays_cptp_under_scan() {
        // Two identical maps → identity intermediate, CP-divisible.
        let prop = damped_qubit_propagator(0.15);
        let m = prop.at(1.0).unwrap();
        let inter = intermediate_map(&m, &m).unwrap();
        let report = is_cptp(&inter, 1e-9).unwrap();
        assert!(report.is_cptp());
    }

    #[test]
    fn random_states_stay_positive_under_cptp_map() {
        let prop = damped_qubit_propagator(0.45);
        let map = prop.at(1.1).unwrap();
        let mut seed = 99u64;
        for _ in 0..10 {
            let rho = crate::qmatrix::tests::random_density(2, &mut seed);
            let out = map.apply(rho.matrix());
            let h = HermitianMatrix::new(out).unwrap();
            let d = DensityMatrix::with_tolerances(h, 1e-10, 1e-10);
            assert!(d.is_ok());
        }
    }
}
