//! Thermodynamic non-Markovianity detection.
//!
//! For a time-independent system Hamiltonian, CP-divisible (in fact already
//! P-divisible) dynamics forces a nonnegative entropy production rate, so a
//! negative rate on some interval is a rigorous indicator of non-Markovian
//! dynamics. The witness is strictly one-directional: an empty report
//! certifies nothing about Markovianity.

use crate::dynmaps::{divisibility_scan, DivisibilityInterval, DivisibilityVerdict};
use crate::error::{Error, Result};
use crate::gkls::SuperOperator;
use crate::scalar::Scalar;
use crate::thermo::ThermoPoint;

/// A maximal interval of grid points with σ̇ below `-threshold`.
#[derive(Debug, Clone)]
pub struct NegativeRateInterval<T: Scalar> {
    pub t_start: T,
    pub t_end: T,
    /// Most negative rate inside the interval.
    pub min_rate: T,
    /// When a map family was supplied: whether the divisibility scan found a
    /// non-CP intermediate map overlapping this interval.
    pub confirmed_by_divisibility: Option<bool>,
}

/// Witness report: negative-rate intervals and the integrated violation.
///
/// Intervals are disjoint and sorted; boundaries are grid points, so they
/// carry up to one grid step of jitter.
#[derive(Debug, Clone)]
pub struct WitnessReport<T: Scalar> {
    pub intervals: Vec<NegativeRateInterval<T>>,
    /// ∫ max(0, -σ̇) dt over the whole trace (trapezoid).
    pub total_negative_area: T,
    /// Divisibility scan intervals, when a map family was supplied.
    pub divisibility: Option<Vec<DivisibilityInterval<T>>>,
}

impl<T: Scalar> WitnessReport<T> {
    pub fn non_markovian(&self) -> bool {
        !self.intervals.is_empty()
    }
}

/// Locate maximal intervals where the entropy production rate drops below
/// `-threshold` (default 1e-6, tied to the finite-difference error budget of
/// the rate column).
pub fn detect_negative_rate<T: Scalar>(
    trace: &[ThermoPoint<T>],
    threshold: T,
) -> Result<WitnessReport<T>> {
    if trace.len() < 3 {
        return Err(Error::InvalidInput(
            "witness needs at least 3 grid points".into(),
        ));
    }
    if !(threshold > T::zero()) {
        return Err(Error::InvalidInput("threshold must be positive".into()));
    }
    let mut intervals = Vec::new();
    let mut active: Option<(usize, T)> = None;
    for (k, p) in trace.iter().enumerate() {
        let negative = p.sigma_rate < -threshold;
        match (&mut active, negative) {
            (None, true) => active = Some((k, p.sigma_rate)),
            (Some((_, min_rate)), true) => {
                if p.sigma_rate < *min_rate {
                    *min_rate = p.sigma_rate;
                }
            }
            (Some((start, min_rate)), false) => {
                intervals.push(NegativeRateInterval {
                    t_start: trace[*start].t,
                    t_end: trace[k - 1].t,
                    min_rate: *min_rate,
                    confirmed_by_divisibility: None,
                });
                active = None;
            }
            (None, false) => {}
        }
    }
    if let Some((start, min_rate)) = active {
        intervals.push(NegativeRateInterval {
            t_start: trace[start].t,
            t_end: trace[trace.len() - 1].t,
            min_rate,
            confirmed_by_divisibility: None,
        });
    }

    // ∫ max(0, -σ̇) dt by trapezoid.
    let mut area = T::zero();
    for w in trace.windows(2) {
        let a = (-w[0].sigma_rate).max(T::zero());
        let b = (-w[1].sigma_rate).max(T::zero());
        area = area + (a + b) * (w[1].t - w[0].t) * T::fl(0.5);
    }

    Ok(WitnessReport {
        intervals,
        total_negative_area: area,
        divisibility: None,
    })
}

/// Witness with a CP-divisibility cross-check over the supplied map family:
/// each negative-rate interval is marked with whether some overlapping scan
/// interval has a non-CP intermediate map.
pub fn detect_negative_rate_with_maps<T: Scalar>(
    trace: &[ThermoPoint<T>],
    threshold: T,
    maps: &[(T, SuperOperator<T>)],
    cptp_tol: T,
) -> Result<WitnessReport<T>> {
    let mut report = detect_negative_rate(trace, threshold)?;
    let scan = divisibility_scan(maps, cptp_tol)?;
    for interval in &mut report.intervals {
        let overlaps_non_cp = scan.iter().any(|iv| {
            iv.t_end >= interval.t_start
                && iv.t_start <= interval.t_end
                && matches!(iv.verdict, DivisibilityVerdict::NonCpDivisible { .. })
        });
        interval.confirmed_by_divisibility = Some(overlaps_non_cp);
    }
    report.divisibility = Some(scan);
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn point(t: f64, sigma_rate: f64) -> ThermoPoint<f64> {
        ThermoPoint {
            t,
            e_u: 0.0,
            f: 0.0,
            s: 0.0,
            q: 0.0,
            w: 0.0,
            sigma: 0.0,
            sigma_rate,
            e_u_weak: 0.0,
            s_vn: 0.0,
        }
    }

    #[test]
    fn no_intervals_for_positive_rates() {
        let trace: Vec<_> = (0..10).map(|k| point(k as f64, 1e-3)).collect();
        let report = detect_negative_rate(&trace, 1e-6).unwrap();
        assert!(report.intervals.is_empty());
        assert!(!report.non_markovian());
        assert_eq!(report.total_negative_area, 0.0);
    }

    #[test]
    fn finds_maximal_intervals_and_area() {
        let rates = [1.0, -2.0, -3.0, 1.0, 1.0, -1.0, 1.0];
        let trace: Vec<_> = rates
            .iter()
            .enumerate()
            .map(|(k, &r)| point(k as f64, r))
            .collect();
        let report = detect_negative_rate(&trace, 1e-6).unwrap();
        assert_eq!(report.intervals.len(), 2);
        assert_eq!(report.intervals[0].t_start, 1.0);
        assert_eq!(report.intervals[0].t_end, 2.0);
        assert_eq!(report.intervals[0].min_rate, -3.0);
        assert_eq!(report.intervals[1].t_start, 5.0);
        assert_eq!(report.intervals[1].t_end, 5.0);
        // Trapezoid of max(0, -σ̇): segments (0,2),(2,3),(3,0) → 1+2.5+1.5,
        // then (0,1),(1,0) around t=5 → 0.5+0.5.
        assert!((report.total_negative_area - 6.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_tiny_traces_and_bad_threshold() {
        let trace: Vec<_> = (0..2).map(|k| point(k as f64, 0.0)).collect();
        assert!(detect_negative_rate(&trace, 1e-6).is_err());
        let trace: Vec<_> = (0..5).map(|k| point(k as f64, 0.0)).collect();
        assert!(detect_negative_rate(&trace, 0.0).is_err());
    }

    #[test]
    fn threshold_filters_shallow_dips() {
        let rates = [1.0, -1e-8, 1.0, -1e-3, 1.0];
        let trace: Vec<_> = rates
            .iter()
            .enumerate()
            .map(|(k, &r)| point(k as f64, r))
            .collect();
        let report = detect_negative_rate(&trace, 1e-6).unwrap();
        assert_eq!(report.intervals.len(), 1);
        assert_eq!(report.intervals[0].t_start, 3.0);
    }
}
