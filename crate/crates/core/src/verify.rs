//! Analytic formulas checked against the brute-force joint-state simulator.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::bits::BitString;
use crate::error::Result;
use crate::exact::{build_joint_state, DiagonalJointState};
use crate::problems::{dj_corpus, hamming_weight_population, sample_balanced_function, BVInstance};
use crate::query::{
    classify_regime, kickback_outcome, mixed_input_query, reset_costs, swap_query,
    virtual_swap_outcome, QueryMask, QueryOutcome, Regime,
};
use crate::thermal::{
    build_bv_oracle, build_dj_oracle, inverse_temperature_from_population, BooleanFunctionTable,
    ThermalMachineOracle, ThermalQubit,
};

/// Tolerance for analytic-versus-exact comparisons.
pub const EXACT_TOLERANCE: f64 = 1e-12;
/// Tolerance for the full-mask kickback against the closed-form swap.
pub const REDUCTION_TOLERANCE: f64 = 1e-14;

/// The query formulas under test.
pub trait KickbackFormula: Sync {
    fn virtual_swap(&self, probe: &ThermalQubit, oracle: &ThermalMachineOracle) -> QueryOutcome;

    fn kickback(
        &self,
        probe: &ThermalQubit,
        oracle: &ThermalMachineOracle,
        mask: &QueryMask,
    ) -> Result<QueryOutcome>;
}

/// The library formulas.
#[derive(Debug, Clone, Copy, Default)]
pub struct Analytic;

impl KickbackFormula for Analytic {
    fn virtual_swap(&self, probe: &ThermalQubit, oracle: &ThermalMachineOracle) -> QueryOutcome {
        virtual_swap_outcome(probe, oracle)
    }

    fn kickback(
        &self,
        probe: &ThermalQubit,
        oracle: &ThermalMachineOracle,
        mask: &QueryMask,
    ) -> Result<QueryOutcome> {
        kickback_outcome(probe, oracle, mask)
    }
}

/// Deliberately wrong: flips the sign of the population change of the
/// closed-form swap. The suite must reject it.
#[derive(Debug, Clone, Copy, Default)]
pub struct SignFlipped;

impl KickbackFormula for SignFlipped {
    fn virtual_swap(&self, probe: &ThermalQubit, oracle: &ThermalMachineOracle) -> QueryOutcome {
        let mut out = virtual_swap_outcome(probe, oracle);
        out.delta_p0 = -out.delta_p0;
        out.p0_after = out.p0_before + out.delta_p0;
        out.beta_after = inverse_temperature_from_population(out.p0_after, probe.gap()).ok();
        out
    }

    fn kickback(
        &self,
        probe: &ThermalQubit,
        oracle: &ThermalMachineOracle,
        mask: &QueryMask,
    ) -> Result<QueryOutcome> {
        kickback_outcome(probe, oracle, mask)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VerifyConfig {
    /// Largest DJ input size; every instance up to it is checked.
    pub max_dj_n: usize,
    /// Largest BV secret length.
    pub max_bv_n: usize,
    /// Random parameter tuples per DJ instance.
    pub trials: usize,
    /// Random masks per oracle family.
    pub mask_trials: usize,
    pub seed: u64,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig {
            max_dj_n: 3,
            max_bv_n: 6,
            trials: 100,
            mask_trials: 200,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckSummary {
    pub name: &'static str,
    pub cases: usize,
    pub max_error: f64,
    pub tolerance: f64,
    pub failures: usize,
}

impl CheckSummary {
    pub fn passed(&self) -> bool {
        self.failures == 0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Failure {
    pub check: &'static str,
    pub case: String,
    pub analytic: f64,
    pub exact: f64,
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}: {} analytic={:e} exact={:e} error={:e}",
            self.check,
            self.case,
            self.analytic,
            self.exact,
            (self.analytic - self.exact).abs()
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub config: VerifyConfig,
    pub checks: Vec<CheckSummary>,
    pub first_failure: Option<Failure>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.first_failure.is_none()
    }

    pub fn total_cases(&self) -> usize {
        self.checks.iter().map(|c| c.cases).sum()
    }
}

struct Recorder {
    checks: Vec<CheckSummary>,
    first_failure: Option<Failure>,
}

impl Recorder {
    fn check(&mut self, name: &'static str, tolerance: f64) -> usize {
        self.checks.push(CheckSummary {
            name,
            cases: 0,
            max_error: 0.0,
            tolerance,
            failures: 0,
        });
        self.checks.len() - 1
    }

    fn compare(&mut self, id: usize, analytic: f64, exact: f64, case: impl FnOnce() -> String) {
        let c = &mut self.checks[id];
        c.cases += 1;
        let err = if analytic == exact {
            0.0
        } else {
            (analytic - exact).abs()
        };
        if err.is_nan() || err > c.tolerance {
            c.failures += 1;
            c.max_error = c
                .max_error
                .max(if err.is_nan() { f64::INFINITY } else { err });
            if self.first_failure.is_none() {
                self.first_failure = Some(Failure {
                    check: c.name,
                    case: case(),
                    analytic,
                    exact,
                });
            }
        } else {
            c.max_error = c.max_error.max(err);
        }
    }

    fn agree(&mut self, id: usize, ok: bool, case: impl FnOnce() -> String) {
        self.compare(id, ok as u8 as f64, 1.0, case);
    }
}

struct Params {
    omega: f64,
    beta_s: f64,
    beta_m: f64,
    e1: f64,
    e2: f64,
}

impl fmt::Display for Params {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "omega={} beta_S={} beta_M={} E1={} E2={}",
            self.omega, self.beta_s, self.beta_m, self.e1, self.e2
        )
    }
}

fn random_params<R: Rng>(rng: &mut R) -> Params {
    Params {
        omega: rng.gen_range(0.1..2.0),
        beta_s: rng.gen_range(-0.5..2.0),
        beta_m: rng.gen_range(0.05..2.0),
        e1: rng.gen_range(0.05..2.0),
        e2: rng.gen_range(0.05..2.0),
    }
}

fn exact_outcome(
    state: &DiagonalJointState,
    mask: &BitString,
    probe: &ThermalQubit,
) -> Result<(f64, f64)> {
    let before = state.probe_marginal()?.p0();
    let after = state.apply_mask_exchange(mask)?.probe_marginal()?.p0();
    debug_assert!((before - probe.ground_population()).abs() < 1e-12);
    Ok((after, after - before))
}

fn compare_outcome(
    rec: &mut Recorder,
    ids: (usize, usize, usize),
    outcome: &QueryOutcome,
    exact_p0: f64,
    exact_delta: f64,
    probe: &ThermalQubit,
    case: &dyn Fn() -> String,
) {
    rec.compare(ids.0, outcome.p0_after, exact_p0, case);
    rec.compare(ids.1, outcome.delta_p0, exact_delta, case);
    let exact_beta = inverse_temperature_from_population(exact_p0, probe.gap()).ok();
    match (outcome.beta_after, exact_beta) {
        (Some(a), Some(e)) => rec.compare(ids.2, a, e, case),
        (None, None) => {}
        (a, e) => rec.compare(ids.2, a.unwrap_or(f64::NAN), e.unwrap_or(f64::NAN), case),
    }
}

/// Runs every cross-check with the library formulas.
pub fn run(config: &VerifyConfig) -> Result<VerifyReport> {
    run_with(config, &Analytic)
}

/// Runs every cross-check with the given formulas.
pub fn run_with(config: &VerifyConfig, formula: &dyn KickbackFormula) -> Result<VerifyReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut rec = Recorder {
        checks: Vec::new(),
        first_failure: None,
    };

    // Closed-form virtual-qubit swap over every DJ instance.
    let swap_ids = (
        rec.check("dj_swap_p0", EXACT_TOLERANCE),
        rec.check("dj_swap_delta_p0", EXACT_TOLERANCE),
        rec.check("dj_swap_beta", EXACT_TOLERANCE),
    );
    let regime_id = rec.check("dj_regime_sign", 0.0);
    let energy_id = rec.check("dj_reset_costs", EXACT_TOLERANCE);
    for n in 1..=config.max_dj_n {
        for inst in dj_corpus(n)? {
            for _ in 0..config.trials {
                let p = random_params(&mut rng);
                let probe = ThermalQubit::new(p.omega, p.beta_s)?;
                let oracle = build_dj_oracle(inst.function(), p.e1, p.e2, p.beta_m)?;
                let state = build_joint_state(&probe, &oracle)?;
                let full = BitString::ones(oracle.len());
                let (exact_p0, exact_delta) = exact_outcome(&state, &full, &probe)?;
                let outcome = formula.virtual_swap(&probe, &oracle);
                let case = || {
                    format!(
                        "f={} {p}",
                        inst.function()
                            .outputs()
                            .iter()
                            .map(|&b| if b { '1' } else { '0' })
                            .collect::<String>()
                    )
                };
                compare_outcome(
                    &mut rec,
                    swap_ids,
                    &outcome,
                    exact_p0,
                    exact_delta,
                    &probe,
                    &case,
                );

                let regime = classify_regime(&probe, &oracle);
                let sign_ok = match regime {
                    Regime::Cooling => exact_delta > 0.0,
                    Regime::Heating => exact_delta < 0.0,
                    Regime::Neutral => exact_delta.abs() < EXACT_TOLERANCE,
                };
                rec.agree(regime_id, sign_ok, case);

                let after = state.apply_mask_exchange(&full)?;
                let costs = reset_costs(&outcome, &oracle, &probe);
                rec.compare(
                    energy_id,
                    costs.dissipation,
                    after.machine_energy() - state.machine_energy(),
                    case,
                );
                rec.compare(
                    energy_id,
                    costs.reset_work,
                    state.probe_energy() - after.probe_energy(),
                    case,
                );
            }
        }
    }

    // General masks on DJ and BV oracles.
    let mask_ids = (
        rec.check("mask_p0", EXACT_TOLERANCE),
        rec.check("mask_delta_p0", EXACT_TOLERANCE),
        rec.check("mask_beta", EXACT_TOLERANCE),
    );
    let reduction_id = rec.check("full_mask_reduction", REDUCTION_TOLERANCE);
    for family in ["dj", "bv"] {
        for _ in 0..config.mask_trials {
            let p = random_params(&mut rng);
            let probe = ThermalQubit::new(p.omega, p.beta_s)?;
            let (oracle, label) = if family == "dj" {
                let n = rng.gen_range(1..=config.max_dj_n.max(1));
                let f = match rng.gen_range(0..4) {
                    0 => BooleanFunctionTable::constant(n, false)?,
                    1 => BooleanFunctionTable::constant(n, true)?,
                    _ => sample_balanced_function(n, &mut rng)?.function().clone(),
                };
                let label = f
                    .outputs()
                    .iter()
                    .map(|&b| if b { '1' } else { '0' })
                    .collect::<String>();
                (
                    build_dj_oracle(&f, p.e1, p.e2, p.beta_m)?,
                    format!("f={label}"),
                )
            } else {
                let n = rng.gen_range(1..=config.max_bv_n.max(1));
                let secret = BitString::new((0..n).map(|_| rng.gen()).collect());
                let label = format!("s={secret}");
                (build_bv_oracle(&secret, p.e1, p.beta_m)?, label)
            };
            let mask = BitString::new((0..oracle.len()).map(|_| rng.gen()).collect());
            let state = build_joint_state(&probe, &oracle)?;
            let (exact_p0, exact_delta) = exact_outcome(&state, &mask, &probe)?;
            let outcome =
                formula.kickback(&probe, &oracle, &QueryMask::new(mask.clone(), &oracle)?)?;
            let case = || format!("{label} X={mask} {p}");
            compare_outcome(
                &mut rec,
                mask_ids,
                &outcome,
                exact_p0,
                exact_delta,
                &probe,
                &case,
            );

            let full = formula.kickback(&probe, &oracle, &QueryMask::full(&oracle))?;
            let closed = formula.virtual_swap(&probe, &oracle);
            let case = || format!("{label} X=1^N {p}");
            rec.compare(reduction_id, full.p0_after, closed.p0_after, case);
            match (full.beta_after, closed.beta_after) {
                (Some(a), Some(b)) => rec.compare(reduction_id, a, b, case),
                (None, None) => {}
                (a, b) => rec.compare(
                    reduction_id,
                    a.unwrap_or(f64::NAN),
                    b.unwrap_or(f64::NAN),
                    case,
                ),
            }
        }
    }

    // Hamming-weight readout for every secret.
    let bv_id = rec.check("bv_hamming_population", EXACT_TOLERANCE);
    for n in 1..=config.max_bv_n {
        for secret in BitString::all(n) {
            let p = random_params(&mut rng);
            let probe = ThermalQubit::new(p.omega, p.beta_s)?;
            let oracle = build_bv_oracle(&secret, p.e1, p.beta_m)?;
            let state = build_joint_state(&probe, &oracle)?;
            let (exact_p0, _) = exact_outcome(&state, &BitString::ones(n), &probe)?;
            let analytic = hamming_weight_population(
                &BVInstance::new(secret.clone()),
                p.e1,
                &probe,
                p.beta_m,
            )?;
            rec.compare(bv_id, analytic, exact_p0, || {
                format!("s={secret} gamma={} {p}", p.e1)
            });
        }
    }

    // Swap and mixed-input queries.
    let swap_query_id = rec.check("swap_query", EXACT_TOLERANCE);
    let mixed_id = rec.check("mixed_input_query", EXACT_TOLERANCE);
    for n in 1..=config.max_dj_n {
        for inst in dj_corpus(n)? {
            let p = random_params(&mut rng);
            let probe = ThermalQubit::new(p.omega, p.beta_s)?;
            let oracle = build_dj_oracle(inst.function(), p.e1, p.e2, p.beta_m)?;
            let state = build_joint_state(&probe, &oracle)?;
            let mut average = 0.0;
            for i in 0..oracle.len() {
                let exact = state
                    .apply_swap_with_machine_qubit(i)?
                    .probe_marginal()?
                    .p0();
                let analytic = swap_query(&probe, &oracle, i)?.probe.ground_population();
                rec.compare(swap_query_id, analytic, exact, || format!("x={i} {p}"));
                average += exact;
            }
            average /= oracle.len() as f64;
            let analytic = mixed_input_query(&probe, &oracle)?.p0();
            rec.compare(mixed_id, analytic, average, || format!("n={n} {p}"));
        }
    }

    Ok(VerifyReport {
        config: *config,
        checks: rec.checks,
        first_failure: rec.first_failure,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> VerifyConfig {
        VerifyConfig {
            max_dj_n: 2,
            max_bv_n: 4,
            trials: 5,
            mask_trials: 20,
            seed: 11,
        }
    }

    #[test]
    fn analytic_passes() {
        let report = run(&small()).unwrap();
        assert!(report.passed(), "{:?}", report.first_failure);
        assert!(report.checks.iter().all(|c| c.cases > 0));
    }

    #[test]
    fn sign_flip_is_caught() {
        let report = run_with(&small(), &SignFlipped).unwrap();
        let failure = report.first_failure.expect("mutation must fail");
        assert_eq!(failure.check, "dj_swap_p0");
    }

    #[test]
    fn fixed_seed_is_reproducible() {
        assert_eq!(run(&small()).unwrap(), run(&small()).unwrap());
    }
}
