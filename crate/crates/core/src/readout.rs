//! Statistical readout of the probe.
//!
//! After a query the probe is a diagonal qubit state, so deciding between the
//! answer classes is a classical binary hypothesis test on energy-measurement
//! outcomes. Divergences are in nats throughout; only
//! [`classical_sample_complexity`] works in bits.

use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::function::factorial::ln_binomial;

use crate::error::{Error, Result};
use crate::numeric::softplus;

/// Outcome distribution of an energy measurement on a qubit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BinaryDistribution {
    p0: f64,
}

impl BinaryDistribution {
    pub fn new(p0: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p0) {
            return Err(Error::param("p0", format!("must lie in [0, 1], got {p0}")));
        }
        Ok(BinaryDistribution { p0 })
    }

    /// Probability of the ground outcome.
    pub fn p0(&self) -> f64 {
        self.p0
    }

    /// Probability of the excited outcome.
    pub fn p1(&self) -> f64 {
        1.0 - self.p0
    }

    pub fn prob(&self, outcome: Outcome) -> f64 {
        match outcome {
            Outcome::Ground => self.p0,
            Outcome::Excited => self.p1(),
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Outcome {
        if rng.gen::<f64>() < self.p0 {
            Outcome::Ground
        } else {
            Outcome::Excited
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Outcome {
    Ground,
    Excited,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Hypothesis {
    Balanced,
    Constant,
}

fn xlogy_ratio(p: f64, q: f64) -> f64 {
    if p == 0.0 {
        0.0
    } else if q == 0.0 {
        f64::INFINITY
    } else {
        p * (p / q).ln()
    }
}

/// `D(p‖q)` in nats; `+∞` when `p` is not absolutely continuous w.r.t. `q`.
pub fn relative_entropy(p: &BinaryDistribution, q: &BinaryDistribution) -> f64 {
    xlogy_ratio(p.p0(), q.p0()) + xlogy_ratio(p.p1(), q.p1())
}

pub fn total_variation(p: &BinaryDistribution, q: &BinaryDistribution) -> f64 {
    (p.p0() - q.p0()).abs()
}

/// Pinsker's lower bound `2·d_TV²` on the relative entropy.
pub fn pinsker_lower_bound(p: &BinaryDistribution, q: &BinaryDistribution) -> f64 {
    2.0 * total_variation(p, q).powi(2)
}

/// A sample-count lower bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SampleBound {
    Samples(u64),
    /// Zero divergence: the hypotheses cannot be told apart.
    Unbounded,
}

impl SampleBound {
    pub fn samples(self) -> Option<u64> {
        match self {
            SampleBound::Samples(n) => Some(n),
            SampleBound::Unbounded => None,
        }
    }
}

fn check_delta(delta: f64) -> Result<()> {
    if delta > 0.0 && delta < 1.0 {
        Ok(())
    } else {
        Err(Error::param(
            "delta",
            format!("must lie in (0, 1), got {delta}"),
        ))
    }
}

/// `log(1/δ) / D` before rounding.
pub fn chernoff_stein_bound_real(delta: f64, divergence: f64) -> Result<f64> {
    check_delta(delta)?;
    if divergence.is_nan() || divergence < 0.0 {
        return Err(Error::param(
            "divergence",
            format!("must be >= 0, got {divergence}"),
        ));
    }
    Ok(-delta.ln() / divergence)
}

/// `⌈log(1/δ) / D⌉`.
pub fn chernoff_stein_samples(delta: f64, divergence: f64) -> Result<SampleBound> {
    let real = chernoff_stein_bound_real(delta, divergence)?;
    Ok(if real.is_finite() {
        SampleBound::Samples(real.ceil() as u64)
    } else {
        SampleBound::Unbounded
    })
}

/// `⌈log(1/δ) / (2t²)⌉`, the Chernoff–Stein bound with Pinsker's divergence
/// floor. Independent of the problem size.
pub fn sample_bound_from_threshold(delta: f64, t: f64) -> Result<u64> {
    check_delta(delta)?;
    if !(t > 0.0 && t <= 1.0) {
        return Err(Error::param("t", format!("must lie in (0, 1], got {t}")));
    }
    Ok((-delta.ln() / (2.0 * t * t)).ceil() as u64)
}

/// Divergence `D(|0⟩⟨0| ‖ (|0⟩⟨0| + 1/2)/2) = log(4/3)` of the best mixed-input query.
pub fn mixed_query_divergence() -> f64 {
    (4.0f64 / 3.0).ln()
}

/// Sample bound of the mixed-input query at its best divergence `log(4/3)`.
pub fn mixed_query_samples(delta: f64) -> Result<u64> {
    chernoff_stein_samples(delta, mixed_query_divergence())
        .map(|b| b.samples().expect("log(4/3) > 0"))
}

/// Distinguishability of constant and balanced DJ oracles for a maximally mixed probe.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DistinguishabilityReport {
    pub t_threshold: f64,
    /// `1/Z_f^Const − 1/Z_f^Bal`.
    pub lhs: f64,
    /// `Z_f^Const·e^{-β_M|Γ_Bal|} − Z_f^Bal·e^{-β_M|Γ_Const|}`.
    pub chi: f64,
    /// `χ / (Z_f^Const·Z_f^Bal)`, the neglected term in the same units as `lhs`.
    pub chi_normalized: f64,
    pub log_z_const: f64,
    pub log_z_bal: f64,
    /// `lhs > 2t`, the condition with `χ` omitted.
    pub satisfied: bool,
}

/// Evaluates the distinguishability condition for machine size `n_machine`.
///
/// Requires `E1 ≥ E2 > 0` so that the constant-1 oracle is the colder one.
pub fn distinguishability_report(
    e1: f64,
    e2: f64,
    beta_m: f64,
    n_machine: usize,
    t: f64,
) -> Result<DistinguishabilityReport> {
    if !(e2 > 0.0 && e2.is_finite()) {
        return Err(Error::param("E2", format!("must be > 0, got {e2}")));
    }
    if !(e1 >= e2 && e1.is_finite()) {
        return Err(Error::param(
            "E1",
            format!("must be >= E2 = {e2}, got {e1}"),
        ));
    }
    if n_machine == 0 || !n_machine.is_multiple_of(2) {
        return Err(Error::param(
            "N",
            format!("must be even and positive, got {n_machine}"),
        ));
    }
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::param("t", format!("must be > 0, got {t}")));
    }
    if !beta_m.is_finite() {
        return Err(Error::param("beta_M", "must be finite"));
    }
    let n = n_machine as f64;
    let l1 = softplus(-beta_m * e1);
    let l2 = softplus(-beta_m * e2);
    let log_z_const = n * l1;
    let log_z_bal = 0.5 * n * (l1 + l2);
    let gamma_const = n * e1;
    let gamma_bal = 0.5 * n * (e1 + e2);

    let lhs = (-log_z_const).exp() - (-log_z_bal).exp();
    let chi = (log_z_const - beta_m * gamma_bal).exp() - (log_z_bal - beta_m * gamma_const).exp();
    let chi_normalized =
        (-log_z_bal - beta_m * gamma_bal).exp() - (-log_z_const - beta_m * gamma_const).exp();
    Ok(DistinguishabilityReport {
        t_threshold: t,
        lhs,
        chi,
        chi_normalized,
        log_z_const,
        log_z_bal,
        satisfied: lhs > 2.0 * t,
    })
}

fn count_outcomes(samples: &[Outcome]) -> (u64, u64) {
    let ground = samples.iter().filter(|&&o| o == Outcome::Ground).count() as u64;
    (ground, samples.len() as u64 - ground)
}

fn log_likelihood(dist: &BinaryDistribution, ground: u64, excited: u64) -> f64 {
    let term = |count: u64, p: f64| {
        if count == 0 {
            0.0
        } else {
            count as f64 * p.ln()
        }
    };
    term(ground, dist.p0()) + term(excited, dist.p1())
}

/// `log L_bal − log L_const` for `ground` ground and `excited` excited outcomes.
pub fn log_likelihood_ratio(
    hyp_balanced: &BinaryDistribution,
    hyp_constant: &BinaryDistribution,
    ground: u64,
    excited: u64,
) -> Result<f64> {
    let lb = log_likelihood(hyp_balanced, ground, excited);
    let lc = log_likelihood(hyp_constant, ground, excited);
    match (lb.is_finite(), lc.is_finite()) {
        (false, false) => Err(Error::NoSupport),
        (true, false) => Ok(f64::INFINITY),
        (false, true) => Ok(f64::NEG_INFINITY),
        (true, true) => Ok(lb - lc),
    }
}

/// Decides `Balanced` iff `log L_bal − log L_const ≥ log_threshold`.
pub fn likelihood_ratio_test_with_threshold(
    samples: &[Outcome],
    hyp_balanced: &BinaryDistribution,
    hyp_constant: &BinaryDistribution,
    log_threshold: f64,
) -> Result<Hypothesis> {
    if samples.is_empty() {
        return Err(Error::Empty("samples"));
    }
    let (ground, excited) = count_outcomes(samples);
    let llr = log_likelihood_ratio(hyp_balanced, hyp_constant, ground, excited)?;
    Ok(if llr >= log_threshold {
        Hypothesis::Balanced
    } else {
        Hypothesis::Constant
    })
}

/// Compares the product likelihoods; ties go to `Balanced`.
pub fn likelihood_ratio_test(
    samples: &[Outcome],
    hyp_balanced: &BinaryDistribution,
    hyp_constant: &BinaryDistribution,
) -> Result<Hypothesis> {
    likelihood_ratio_test_with_threshold(samples, hyp_balanced, hyp_constant, 0.0)
}

fn binomial_pmf(n: u64, k: u64, p: f64) -> f64 {
    if p == 0.0 {
        return (k == 0) as u8 as f64;
    }
    if p == 1.0 {
        return (k == n) as u8 as f64;
    }
    (ln_binomial(n, k) + k as f64 * p.ln() + (n - k) as f64 * (-p).ln_1p()).exp()
}

/// Per-count log-likelihood ratios and their probabilities under both hypotheses.
fn count_table(
    hyp_balanced: &BinaryDistribution,
    hyp_constant: &BinaryDistribution,
    n: u64,
) -> Result<Vec<(f64, f64, f64)>> {
    (0..=n)
        .filter_map(|k| {
            let pb = binomial_pmf(n, k, hyp_balanced.p0());
            let pc = binomial_pmf(n, k, hyp_constant.p0());
            if pb == 0.0 && pc == 0.0 {
                return None;
            }
            Some(
                log_likelihood_ratio(hyp_balanced, hyp_constant, k, n - k).map(|llr| (llr, pb, pc)),
            )
        })
        .collect()
}

/// Exact `(false_positive, false_negative)` of the threshold test with `n` samples.
///
/// False positive: deciding `Balanced` under the constant hypothesis.
/// False negative: deciding `Constant` under the balanced hypothesis.
pub fn exact_error_rates(
    hyp_balanced: &BinaryDistribution,
    hyp_constant: &BinaryDistribution,
    n: u64,
    log_threshold: f64,
) -> Result<(f64, f64)> {
    let mut fp = 0.0;
    let mut fneg = 0.0;
    for (llr, pb, pc) in count_table(hyp_balanced, hyp_constant, n)? {
        if llr >= log_threshold {
            fp += pc;
        } else {
            fneg += pb;
        }
    }
    Ok((fp, fneg))
}

/// Smallest log-likelihood-ratio threshold whose exact false-positive rate with
/// `n` samples does not exceed `delta` (a non-randomised Neyman–Pearson test).
pub fn neyman_pearson_threshold(
    hyp_balanced: &BinaryDistribution,
    hyp_constant: &BinaryDistribution,
    n: u64,
    delta: f64,
) -> Result<f64> {
    check_delta(delta)?;
    if n == 0 {
        return Err(Error::Empty("samples"));
    }
    let mut table = count_table(hyp_balanced, hyp_constant, n)?;
    table.sort_by(|a, b| b.0.total_cmp(&a.0));
    let mut threshold = f64::INFINITY;
    let mut fp = 0.0;
    let mut i = 0;
    while i < table.len() {
        let level = table[i].0;
        let mut mass = 0.0;
        while i < table.len() && table[i].0 == level {
            mass += table[i].2;
            i += 1;
        }
        if fp + mass > delta {
            break;
        }
        fp += mass;
        threshold = level;
    }
    Ok(threshold)
}

/// How the likelihood-ratio threshold is set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "rule")]
pub enum DecisionRule {
    /// Threshold zero: pick the more likely hypothesis.
    MaximumLikelihood,
    /// Threshold calibrated so the exact false-positive rate is at most `false_positive`.
    NeymanPearson { false_positive: f64 },
}

impl DecisionRule {
    pub fn log_threshold(
        &self,
        hyp_balanced: &BinaryDistribution,
        hyp_constant: &BinaryDistribution,
        n: u64,
    ) -> Result<f64> {
        match *self {
            DecisionRule::MaximumLikelihood => Ok(0.0),
            DecisionRule::NeymanPearson { false_positive } => {
                neyman_pearson_threshold(hyp_balanced, hyp_constant, n, false_positive)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReadoutConfig {
    pub n_samples: u64,
    pub trials: u64,
    pub seed: u64,
    /// Target false-positive rate used for the Chernoff–Stein bound.
    pub delta: f64,
    pub rule: DecisionRule,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HypothesisTestReport {
    pub n_samples: u64,
    pub trials: u64,
    pub seed: u64,
    pub delta: f64,
    pub rule: DecisionRule,
    pub log_threshold: f64,
    /// Majority decision over all trials.
    pub decision: Hypothesis,
    pub balanced_decisions: u64,
    pub divergence_unit: String,
    /// `D(hyp_balanced ‖ hyp_constant)`.
    pub divergence: f64,
    pub total_variation: f64,
    pub pinsker_lower: f64,
    pub chernoff_stein_bound: SampleBound,
    /// Fraction of trials deciding `Balanced`; the false-positive rate when the
    /// samples come from the constant hypothesis.
    pub empirical_false_positive: f64,
    /// Fraction of trials deciding `Constant`; the false-negative rate when the
    /// samples come from the balanced hypothesis.
    pub empirical_false_negative: f64,
    /// Binomial standard error of the two empirical rates.
    pub standard_error: f64,
    pub exact_false_positive: f64,
    pub exact_false_negative: f64,
}

/// Repeated sampling and likelihood-ratio readout.
///
/// Trial `i` draws from its own ChaCha stream `i` under the master seed, so
/// the report does not depend on scheduling.
pub fn monte_carlo_readout(
    true_dist: &BinaryDistribution,
    hyp_balanced: &BinaryDistribution,
    hyp_constant: &BinaryDistribution,
    config: &ReadoutConfig,
) -> Result<HypothesisTestReport> {
    if config.n_samples == 0 {
        return Err(Error::param("n_samples", "must be >= 1"));
    }
    if config.trials == 0 {
        return Err(Error::param("trials", "must be >= 1"));
    }
    let log_threshold = config
        .rule
        .log_threshold(hyp_balanced, hyp_constant, config.n_samples)?;
    let divergence = relative_entropy(hyp_balanced, hyp_constant);

    let balanced_decisions = (0..config.trials)
        .into_par_iter()
        .map(|trial| {
            let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
            rng.set_stream(trial);
            let samples: Vec<Outcome> = (0..config.n_samples)
                .map(|_| true_dist.sample(&mut rng))
                .collect();
            likelihood_ratio_test_with_threshold(
                &samples,
                hyp_balanced,
                hyp_constant,
                log_threshold,
            )
            .map(|h| (h == Hypothesis::Balanced) as u64)
        })
        .try_reduce(|| 0, |a, b| Ok(a + b))?;

    let trials = config.trials as f64;
    let rate = balanced_decisions as f64 / trials;
    let (exact_fp, exact_fn) =
        exact_error_rates(hyp_balanced, hyp_constant, config.n_samples, log_threshold)?;
    Ok(HypothesisTestReport {
        n_samples: config.n_samples,
        trials: config.trials,
        seed: config.seed,
        delta: config.delta,
        rule: config.rule,
        log_threshold,
        decision: if 2 * balanced_decisions >= config.trials {
            Hypothesis::Balanced
        } else {
            Hypothesis::Constant
        },
        balanced_decisions,
        divergence_unit: "nats".into(),
        divergence,
        total_variation: total_variation(hyp_balanced, hyp_constant),
        pinsker_lower: pinsker_lower_bound(hyp_balanced, hyp_constant),
        chernoff_stein_bound: chernoff_stein_samples(config.delta, divergence)?,
        empirical_false_positive: rate,
        empirical_false_negative: 1.0 - rate,
        standard_error: (rate * (1.0 - rate) / trials).sqrt(),
        exact_false_positive: exact_fp,
        exact_false_negative: exact_fn,
    })
}

/// Of the two constant hypotheses, the one closest to `balanced` in relative
/// entropy, with its index (0 for the first, 1 for the second).
pub fn closest_constant(
    balanced: &BinaryDistribution,
    const1: &BinaryDistribution,
    const2: &BinaryDistribution,
) -> (usize, BinaryDistribution) {
    if relative_entropy(balanced, const2) < relative_entropy(balanced, const1) {
        (1, *const2)
    } else {
        (0, *const1)
    }
}

/// Classical random sampling with replacement: `δ = 2^{-(k-1)}`.
pub fn classical_with_replacement_error(k: u64) -> Result<f64> {
    if k == 0 {
        return Err(Error::param("k", "must be >= 1"));
    }
    Ok(2f64.powi(1 - k as i32))
}

/// Largest `k` for which the falling-factorial product is used directly.
const PRODUCT_LIMIT: u64 = 4096;

/// Classical random sampling without replacement:
/// `δ' = 2·C(2^{n-1}, k) / C(2^n, k)`, zero once `k > 2^{n-1}`.
pub fn classical_without_replacement_error(n: u32, k: u64) -> Result<f64> {
    if n == 0 || n > 62 {
        return Err(Error::param("n", format!("must lie in [1, 62], got {n}")));
    }
    let domain = 1u64 << n;
    if k == 0 || k > domain {
        return Err(Error::param(
            "k",
            format!("must lie in [1, {domain}], got {k}"),
        ));
    }
    let half = domain / 2;
    if k > half {
        return Ok(0.0);
    }
    if k <= PRODUCT_LIMIT {
        // C(M, k) / C(2M, k) = Π_{i<k} (M − i) / (2M − i)
        let ratio: f64 = (0..k)
            .map(|i| (half - i) as f64 / (domain - i) as f64)
            .product();
        Ok(2.0 * ratio)
    } else {
        Ok(2.0 * (ln_binomial(half, k) - ln_binomial(domain, k)).exp())
    }
}

/// Samples needed by classical random sampling: `⌈log₂(1/δ) + 1⌉`.
pub fn classical_sample_complexity(delta: f64) -> Result<u64> {
    check_delta(delta)?;
    Ok((-delta.log2() + 1.0).ceil() as u64)
}

/// Worst-case deterministic classical queries, `2^{n-1} + 1`.
pub fn deterministic_classical_queries(n: u32) -> u64 {
    (1u64 << (n - 1)) + 1
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CrossoverRow {
    pub delta: f64,
    pub t: f64,
    pub n_star: u64,
    pub k_classical: u64,
    /// Smallest `n` with `n* < 2^{n-1} + 1`.
    pub n_crossover: u32,
    pub thermal_beats_probabilistic: bool,
}

/// Thermal sample bound against classical probabilistic and deterministic costs.
///
/// Rows come out sorted by `(delta, t)`.
pub fn crossover_analysis(delta_grid: &[f64], t_grid: &[f64]) -> Result<Vec<CrossoverRow>> {
    if delta_grid.is_empty() {
        return Err(Error::Empty("delta grid"));
    }
    if t_grid.is_empty() {
        return Err(Error::Empty("t grid"));
    }
    let mut deltas = delta_grid.to_vec();
    let mut ts = t_grid.to_vec();
    deltas.sort_by(f64::total_cmp);
    ts.sort_by(f64::total_cmp);
    let mut rows = Vec::with_capacity(deltas.len() * ts.len());
    for &delta in &deltas {
        let k_classical = classical_sample_complexity(delta)?;
        for &t in &ts {
            let n_star = sample_bound_from_threshold(delta, t)?;
            let n_crossover = (1..=63)
                .find(|&n| n_star < deterministic_classical_queries(n))
                .expect("2^62 exceeds any u64 sample bound");
            rows.push(CrossoverRow {
                delta,
                t,
                n_star,
                k_classical,
                n_crossover,
                thermal_beats_probabilistic: n_star < k_classical,
            });
        }
    }
    Ok(rows)
}

/// Writes rows as CSV with header
/// `delta,t,n_star,k_classical,n_crossover,thermal_beats_probabilistic`.
pub fn write_crossover_csv<W: Write>(rows: &[CrossoverRow], out: W) -> std::io::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()
}
