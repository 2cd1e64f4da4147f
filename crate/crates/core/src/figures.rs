//! Plot data: kickback temperature curves, the distinguishability grid and
//! the sample-complexity table, plus the DJ readout hypotheses.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::query::virtual_swap_outcome;
use crate::readout::{
    classical_sample_complexity, distinguishability_report, mixed_query_samples, relative_entropy,
    sample_bound_from_threshold, total_variation, BinaryDistribution,
};
use crate::thermal::{build_dj_oracle, BooleanFunctionTable, ThermalQubit};

/// Truth table `0…01…1`, the representative balanced function.
fn half_and_half(n: usize) -> Result<BooleanFunctionTable> {
    let size = 1usize << n;
    BooleanFunctionTable::new(n, (0..size).map(|i| i >= size / 2).collect())
}

/// Probe temperatures after the virtual-qubit swap for the three DJ classes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KickbackRow {
    pub beta_m: f64,
    pub beta_s: f64,
    /// `f ≡ 1`, every machine gap `E1`.
    pub constant_e1: Option<f64>,
    /// `f ≡ 0`, every machine gap `E2`.
    pub constant_e2: Option<f64>,
    pub balanced: Option<f64>,
}

impl KickbackRow {
    /// Spread of the three curves at this point, `None` if any is undefined.
    pub fn spread(&self) -> Option<f64> {
        let (a, b, c) = (self.constant_e1?, self.constant_e2?, self.balanced?);
        Some(a.max(b).max(c) - a.min(b).min(c))
    }

    /// Balanced strictly between the two constants.
    pub fn balanced_between(&self) -> bool {
        match (self.constant_e1, self.constant_e2, self.balanced) {
            (Some(a), Some(b), Some(m)) => (a.min(b) < m) && (m < a.max(b)),
            _ => false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KickbackParams {
    pub n: usize,
    pub e1: f64,
    pub e2: f64,
    pub omega: f64,
    pub beta_m_grid: Vec<f64>,
    pub beta_s_grid: Vec<f64>,
}

/// `β'_S` against `β_S` for constant and balanced oracles at each `β_M`.
///
/// Rows are ordered by `β_M`, then `β_S`, in grid order.
pub fn dj_kickback_curves(p: &KickbackParams) -> Result<Vec<KickbackRow>> {
    if p.n == 0 {
        return Err(Error::param("n", "must be >= 1"));
    }
    if p.beta_m_grid.is_empty() {
        return Err(Error::Empty("beta_M grid"));
    }
    if p.beta_s_grid.is_empty() {
        return Err(Error::Empty("beta_S grid"));
    }
    let ones = BooleanFunctionTable::constant(p.n, true)?;
    let zeros = BooleanFunctionTable::constant(p.n, false)?;
    let balanced = half_and_half(p.n)?;
    let mut rows = Vec::with_capacity(p.beta_m_grid.len() * p.beta_s_grid.len());
    for &beta_m in &p.beta_m_grid {
        let o1 = build_dj_oracle(&ones, p.e1, p.e2, beta_m)?;
        let o2 = build_dj_oracle(&zeros, p.e1, p.e2, beta_m)?;
        let ob = build_dj_oracle(&balanced, p.e1, p.e2, beta_m)?;
        for &beta_s in &p.beta_s_grid {
            let probe = ThermalQubit::new(p.omega, beta_s)?;
            rows.push(KickbackRow {
                beta_m,
                beta_s,
                constant_e1: virtual_swap_outcome(&probe, &o1).beta_after,
                constant_e2: virtual_swap_outcome(&probe, &o2).beta_after,
                balanced: virtual_swap_outcome(&probe, &ob).beta_after,
            });
        }
    }
    Ok(rows)
}

/// Largest spread over `β_S` of the rows at one `β_M`.
pub fn max_spread(rows: &[KickbackRow], beta_m: f64) -> Option<f64> {
    rows.iter()
        .filter(|r| r.beta_m == beta_m)
        .map(KickbackRow::spread)
        .try_fold(0.0f64, |acc, s| s.map(|s| acc.max(s)))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DistinguishabilityRow {
    #[serde(rename = "N")]
    pub n_machine: usize,
    #[serde(rename = "E1")]
    pub e1: f64,
    #[serde(rename = "E2")]
    pub e2: f64,
    pub lhs: f64,
    pub chi: f64,
    pub chi_normalized: f64,
    pub satisfied: bool,
}

/// Distinguishability over all grid pairs with `E1 ≥ E2`, sorted by `(N, E1, E2)`.
pub fn distinguishability_grid(
    beta_m: f64,
    n_list: &[usize],
    e_grid: &[f64],
    t: f64,
) -> Result<Vec<DistinguishabilityRow>> {
    if n_list.is_empty() {
        return Err(Error::Empty("N list"));
    }
    if e_grid.is_empty() {
        return Err(Error::Empty("energy grid"));
    }
    let mut ns = n_list.to_vec();
    ns.sort_unstable();
    ns.dedup();
    let mut es = e_grid.to_vec();
    es.sort_by(f64::total_cmp);
    es.dedup();
    let per_n: Vec<Vec<DistinguishabilityRow>> = ns
        .par_iter()
        .map(|&n| {
            let mut rows = Vec::new();
            for (i, &e1) in es.iter().enumerate() {
                for &e2 in &es[..=i] {
                    let r = distinguishability_report(e1, e2, beta_m, n, t)?;
                    rows.push(DistinguishabilityRow {
                        n_machine: n,
                        e1,
                        e2,
                        lhs: r.lhs,
                        chi: r.chi,
                        chi_normalized: r.chi_normalized,
                        satisfied: r.satisfied,
                    });
                }
            }
            Ok(rows)
        })
        .collect::<Result<_>>()?;
    Ok(per_n.into_iter().flatten().collect())
}

/// Evenly spaced grid `step, 2·step, …, count·step`.
pub fn energy_grid(step: f64, count: usize) -> Vec<f64> {
    (1..=count).map(|k| step * k as f64).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SampleComplexityRow {
    pub delta: f64,
    pub t: f64,
    /// Thermal bound `⌈log(1/δ)/(2t²)⌉`.
    pub n_star: u64,
    /// Classical random sampling `⌈log₂(1/δ) + 1⌉`.
    pub k_classical: u64,
    /// Mixed-input query bound with divergence `log(4/3)`.
    pub mixed_query: u64,
}

/// Sample-complexity table sorted by `(delta, t)`.
pub fn sample_complexity_table(
    delta_grid: &[f64],
    t_grid: &[f64],
) -> Result<Vec<SampleComplexityRow>> {
    if delta_grid.is_empty() {
        return Err(Error::Empty("delta grid"));
    }
    if t_grid.is_empty() {
        return Err(Error::Empty("t grid"));
    }
    let mut deltas = delta_grid.to_vec();
    deltas.sort_by(f64::total_cmp);
    let mut ts = t_grid.to_vec();
    ts.sort_by(f64::total_cmp);
    let mut rows = Vec::new();
    for &delta in &deltas {
        let k = classical_sample_complexity(delta)?;
        let mixed = mixed_query_samples(delta)?;
        for &t in &ts {
            rows.push(SampleComplexityRow {
                delta,
                t,
                n_star: sample_bound_from_threshold(delta, t)?,
                k_classical: k,
                mixed_query: mixed,
            });
        }
    }
    Ok(rows)
}

/// Probe readout distributions after the virtual-qubit swap for each DJ class.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DjHypotheses {
    pub balanced: BinaryDistribution,
    pub constant_e1: BinaryDistribution,
    pub constant_e2: BinaryDistribution,
}

impl DjHypotheses {
    pub fn new(probe: &ThermalQubit, n: usize, e1: f64, e2: f64, beta_m: f64) -> Result<Self> {
        let dist = |f: &BooleanFunctionTable| -> Result<BinaryDistribution> {
            let oracle = build_dj_oracle(f, e1, e2, beta_m)?;
            BinaryDistribution::new(virtual_swap_outcome(probe, &oracle).p0_after)
        };
        Ok(DjHypotheses {
            balanced: dist(&half_and_half(n)?)?,
            constant_e1: dist(&BooleanFunctionTable::constant(n, true)?)?,
            constant_e2: dist(&BooleanFunctionTable::constant(n, false)?)?,
        })
    }

    /// The constant hypothesis with the smaller `D(balanced ‖ constant)`.
    pub fn closest_constant(&self) -> BinaryDistribution {
        if relative_entropy(&self.balanced, &self.constant_e2)
            < relative_entropy(&self.balanced, &self.constant_e1)
        {
            self.constant_e2
        } else {
            self.constant_e1
        }
    }

    /// Total variation between balanced and the closest constant.
    pub fn worst_case_distance(&self) -> f64 {
        total_variation(&self.balanced, &self.closest_constant())
    }
}

/// Finds `E2 ∈ (0, E1)` at which [`DjHypotheses::worst_case_distance`] equals `target` by bisection.
///
/// The distance must bracket `target` between `E2 → 0` and `E2 = E1`.
pub fn calibrate_e2(
    probe: &ThermalQubit,
    n: usize,
    e1: f64,
    beta_m: f64,
    target: f64,
) -> Result<f64> {
    let dist = |e2: f64| {
        DjHypotheses::new(probe, n, e1, e2, beta_m).map(|h| h.worst_case_distance() - target)
    };
    let mut lo = 1e-9 * e1;
    let mut hi = e1;
    let (f_lo, f_hi) = (dist(lo)?, dist(hi)?);
    if f_lo.signum() == f_hi.signum() {
        return Err(Error::param(
            "t",
            format!("distance {target} is not reachable for E1 = {e1}"),
        ));
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if (dist(mid)? > 0.0) == (f_lo > 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-15 * e1 {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
        (0..n)
            .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
            .collect()
    }

    fn fig4(beta_m_grid: Vec<f64>, e1: f64, e2: f64) -> Vec<KickbackRow> {
        dj_kickback_curves(&KickbackParams {
            n: 2,
            e1,
            e2,
            omega: 1.0,
            beta_m_grid,
            beta_s_grid: grid(0.0, 2.0, 21),
        })
        .unwrap()
    }

    #[test]
    fn balanced_between_constants() {
        let rows = fig4(vec![2.0, 1.0, 0.5], 1.0, 0.5);
        assert_eq!(rows.len(), 63);
        assert!(rows.iter().all(KickbackRow::balanced_between));
    }

    #[test]
    fn hot_machine_collapses_curves() {
        let rows = fig4(vec![1e-4], 1.0, 0.5);
        let s = max_spread(&rows, 1e-4).unwrap();
        assert!(s < 1e-3, "{s}");
    }

    #[test]
    fn equal_energies_identical_curves() {
        let rows = fig4(vec![1.0], 0.7, 0.7);
        assert!(rows.iter().all(|r| r.spread() == Some(0.0)));
    }

    #[test]
    fn distinguishability_grid_shape() {
        let rows = distinguishability_grid(1.0, &[4, 2], &[0.5, 0.1, 1.0], 0.1).unwrap();
        assert_eq!(rows.len(), 12);
        assert_eq!(rows[0].n_machine, 2);
        assert!(rows.iter().filter(|r| r.e1 == r.e2).all(|r| r.lhs == 0.0));
        assert!(rows.iter().all(|r| r.e1 >= r.e2));
        assert!(rows.iter().all(|r| r.lhs <= 1.0));
    }

    #[test]
    fn sample_table_reference_row() {
        let rows = sample_complexity_table(&[0.1], &[0.1]).unwrap();
        assert_eq!(rows[0].n_star, 116);
        assert_eq!(rows[0].k_classical, 5);
        assert_eq!(rows[0].mixed_query, 9);
    }

    #[test]
    fn calibration_hits_target() {
        let probe = ThermalQubit::new(1.0, 0.0).unwrap();
        let e2 = calibrate_e2(&probe, 2, 3.0, 1.0, 0.1).unwrap();
        let h = DjHypotheses::new(&probe, 2, 3.0, e2, 1.0).unwrap();
        assert!((h.worst_case_distance() - 0.1).abs() < 1e-12);
        assert!(calibrate_e2(&probe, 2, 3.0, 1.0, 0.9).is_err());
    }
}
