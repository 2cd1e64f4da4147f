//! `thermoquery`: plot data, readout experiments and verification runs.

mod output;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context as _, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use output::{Format, Sink};
use thermoquery::detuning::{bv3_sweep, write_sweep_csv, ExperimentConfig};
use thermoquery::figures::{
    calibrate_e2, distinguishability_grid, dj_kickback_curves, energy_grid,
    sample_complexity_table, DjHypotheses, KickbackParams,
};
use thermoquery::query::{
    classify_regime, kickback_outcome, reset_costs, temperature_well_defined, QueryMask,
};
use thermoquery::readout::{
    crossover_analysis, monte_carlo_readout, sample_bound_from_threshold, write_crossover_csv,
    DecisionRule, ReadoutConfig,
};
use thermoquery::verify::{self, SignFlipped, VerifyConfig};
use thermoquery::{BitString, ThermalMachineOracle, ThermalQubit};

const EXIT_VALIDATION: u8 = 1;
const EXIT_VERIFY: u8 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "thermoquery",
    version,
    about = "Thermal-machine query oracles: plot data, readout and verification"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Output file; standard output when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,

    /// Seed for every random draw.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Probe temperature after the virtual-qubit swap for constant and balanced oracles.
    DjKickback(KickbackArgs),
    /// Machine ground-population difference over an (E1, E2) grid.
    Distinguishability(DistinguishabilityArgs),
    /// Thermal, classical and mixed-query sample bounds.
    SampleComplexity(GridArgs),
    /// First problem size at which the thermal bound beats deterministic queries.
    Crossover(GridArgs),
    /// Detuned 3-bit secret-string sweep.
    DetuningSweep(DetuningArgs),
    /// One kickback query on an oracle given as JSON.
    Query(QueryArgs),
    /// Monte Carlo likelihood-ratio readout of a DJ query.
    Readout(ReadoutArgs),
    /// Cross-check analytic formulas against the exact simulator.
    Verify(VerifyArgs),
}

#[derive(Debug, Clone, Args, Serialize)]
struct BetaSGrid {
    #[arg(long, default_value_t = 0.0)]
    beta_s_min: f64,
    #[arg(long, default_value_t = 2.0)]
    beta_s_max: f64,
    #[arg(long, default_value_t = 41)]
    beta_s_steps: usize,
}

impl BetaSGrid {
    fn values(&self) -> Result<Vec<f64>> {
        linspace(self.beta_s_min, self.beta_s_max, self.beta_s_steps)
    }
}

fn linspace(lo: f64, hi: f64, steps: usize) -> Result<Vec<f64>> {
    if !(lo.is_finite() && hi.is_finite()) || hi < lo {
        bail!("grid bounds must be finite with min <= max, got [{lo}, {hi}]");
    }
    match steps {
        0 => bail!("grid needs at least one point"),
        1 => Ok(vec![lo]),
        n => Ok((0..n)
            .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
            .collect()),
    }
}

#[derive(Debug, Args, Serialize)]
struct KickbackArgs {
    /// Input bits; the machine has 2^n qubits.
    #[arg(long, default_value_t = 2)]
    n: usize,
    #[arg(long = "e1", default_value_t = 1.0)]
    e1: f64,
    #[arg(long = "e2", default_value_t = 0.5)]
    e2: f64,
    #[arg(long, default_value_t = 1.0)]
    omega: f64,
    #[arg(long = "beta-m", value_delimiter = ',', default_values_t = vec![2.0, 1.0, 0.5])]
    beta_m: Vec<f64>,
    #[command(flatten)]
    beta_s: BetaSGrid,
}

#[derive(Debug, Args, Serialize)]
struct DistinguishabilityArgs {
    #[arg(long = "beta-m", default_value_t = 1.0)]
    beta_m: f64,
    /// Machine sizes N (even).
    #[arg(long = "n-list", value_delimiter = ',', default_values_t = vec![2, 4, 8, 16])]
    n_list: Vec<usize>,
    /// Energy grid spacing; the grid is step, 2·step, …, count·step.
    #[arg(long, default_value_t = 0.01)]
    e_step: f64,
    #[arg(long, default_value_t = 200)]
    e_count: usize,
    /// Distinguishability threshold.
    #[arg(long, default_value_t = 0.1)]
    t: f64,
}

#[derive(Debug, Args, Serialize)]
struct GridArgs {
    #[arg(long, value_delimiter = ',', default_values_t = vec![0.1, 0.05, 0.01, 0.001])]
    delta: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_values_t = vec![0.05, 0.1, 0.2, 0.3, 0.4, 0.5, 0.5887])]
    t: Vec<f64>,
}

#[derive(Debug, Args, Serialize)]
struct DetuningArgs {
    /// The three machine gap scales.
    #[arg(long, value_delimiter = ',', default_values_t = vec![0.25, 0.33, 0.42])]
    gamma: Vec<f64>,
    #[arg(long, default_value_t = 0.05)]
    epsilon: f64,
    /// Coupling g.
    #[arg(long, default_value_t = 0.02)]
    g: f64,
    #[arg(long, default_value_t = 1.0)]
    omega: f64,
    #[arg(long = "beta-m", default_value_t = 1.0)]
    beta_m: f64,
    /// Interaction time; the short-time suppression factor is used when absent.
    #[arg(long)]
    time: Option<f64>,
    #[arg(long, default_value_t = 0.0)]
    beta_s_min: f64,
    #[arg(long, default_value_t = 3.0)]
    beta_s_max: f64,
    #[arg(long, default_value_t = 61)]
    beta_s_steps: usize,
}

#[derive(Debug, Args, Serialize)]
struct QueryArgs {
    /// Oracle JSON file.
    #[arg(long, conflicts_with = "oracle_json")]
    oracle: Option<PathBuf>,
    /// Oracle JSON given inline.
    #[arg(long)]
    oracle_json: Option<String>,
    #[arg(long, default_value_t = 1.0)]
    omega: f64,
    #[arg(long = "beta-s", default_value_t = 0.0)]
    beta_s: f64,
    /// Mask X over the machine qubits; all ones when absent.
    #[arg(long)]
    mask: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum Rule {
    /// Pick the more likely hypothesis.
    Ml,
    /// Threshold calibrated to keep false positives at or below delta.
    Np,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum Truth {
    Constant,
    Balanced,
}

#[derive(Debug, Args, Serialize)]
struct ReadoutArgs {
    /// Input bits; the machine has 2^n qubits.
    #[arg(long, default_value_t = 2)]
    n: usize,
    #[arg(long = "e1", default_value_t = 3.0)]
    e1: f64,
    /// Calibrated so the balanced and nearest constant readouts differ by --tv when absent.
    #[arg(long = "e2")]
    e2: Option<f64>,
    #[arg(long, default_value_t = 0.1)]
    tv: f64,
    #[arg(long = "beta-m", default_value_t = 1.0)]
    beta_m: f64,
    #[arg(long, default_value_t = 1.0)]
    omega: f64,
    #[arg(long = "beta-s", default_value_t = 0.0)]
    beta_s: f64,
    /// Samples per trial; the threshold bound at (delta, tv) when absent.
    #[arg(long)]
    samples: Option<u64>,
    #[arg(long, default_value_t = 10_000)]
    trials: u64,
    #[arg(long, default_value_t = 0.1)]
    delta: f64,
    #[arg(long, value_enum, default_value_t = Rule::Np)]
    rule: Rule,
    /// Hypothesis the samples are drawn from.
    #[arg(long, value_enum, default_value_t = Truth::Constant)]
    truth: Truth,
}

#[derive(Debug, Args, Serialize)]
struct VerifyArgs {
    #[arg(long = "max-n", default_value_t = 3)]
    max_n: usize,
    #[arg(long = "max-bv-n", default_value_t = 6)]
    max_bv_n: usize,
    /// Random parameter tuples per DJ instance.
    #[arg(long, default_value_t = 100)]
    trials: usize,
    #[arg(long, default_value_t = 200)]
    mask_trials: usize,
    /// Replace the closed-form swap by a sign-flipped version.
    #[arg(long, hide = true)]
    inject_sign_flip: bool,
}

/// Non-validation failure: the verification suite found a mismatch.
#[derive(Debug)]
struct VerificationFailed(String);

impl std::fmt::Display for VerificationFailed {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "verification failed: {}", self.0)
    }
}

impl std::error::Error for VerificationFailed {}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_VALIDATION)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) if e.is::<VerificationFailed>() => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_VERIFY)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_VALIDATION)
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    let open = |name| Sink::open(cli.out.as_deref(), cli.format, name, cli.seed);
    match &cli.command {
        Command::DjKickback(a) => {
            let mut sink = open("dj-kickback")?;
            let rows = dj_kickback_curves(&KickbackParams {
                n: a.n,
                e1: a.e1,
                e2: a.e2,
                omega: a.omega,
                beta_m_grid: a.beta_m.clone(),
                beta_s_grid: a.beta_s.values()?,
            })?;
            sink.rows(a, &rows)?;
            sink.finish()
        }
        Command::Distinguishability(a) => {
            let mut sink = open("distinguishability")?;
            if a.e_step.is_nan() || a.e_step <= 0.0 || a.e_count == 0 {
                bail!("energy grid needs e-step > 0 and e-count >= 1");
            }
            let rows = distinguishability_grid(
                a.beta_m,
                &a.n_list,
                &energy_grid(a.e_step, a.e_count),
                a.t,
            )?;
            sink.rows(a, &rows)?;
            sink.finish()
        }
        Command::SampleComplexity(a) => {
            let mut sink = open("sample-complexity")?;
            let rows = sample_complexity_table(&a.delta, &a.t)?;
            sink.comment("mixed_query uses divergence log(4/3)");
            sink.rows(a, &rows)?;
            sink.finish()
        }
        Command::Crossover(a) => {
            let mut sink = open("crossover")?;
            let rows = crossover_analysis(&a.delta, &a.t)?;
            sink.custom(a, &rows, |w| Ok(write_crossover_csv(&rows, w)?))?;
            sink.finish()
        }
        Command::DetuningSweep(a) => {
            let mut sink = open("detuning-sweep")?;
            if a.gamma.len() != 3 {
                bail!("gamma needs exactly 3 values, got {}", a.gamma.len());
            }
            let config = ExperimentConfig {
                machine_gaps: [a.gamma[0], a.gamma[1], a.gamma[2]],
                epsilon: a.epsilon,
                coupling: a.g,
                omega: a.omega,
                beta_m: a.beta_m,
                interaction_time: a.time,
            };
            let sweep = bv3_sweep(
                &config,
                &linspace(a.beta_s_min, a.beta_s_max, a.beta_s_steps)?,
            )?;
            sink.comment(&format!(
                "distinct_curves: {} min_separation: {:e} min_pointwise_gap: {:e}",
                sweep.distinct_curves, sweep.min_separation, sweep.min_pointwise_gap
            ));
            sink.custom(a, &sweep, |w| Ok(write_sweep_csv(&sweep, w)?))?;
            sink.finish()
        }
        Command::Query(a) => {
            let mut sink = open("query")?;
            let oracle = load_oracle(a.oracle.as_deref(), a.oracle_json.as_deref())?;
            let probe = ThermalQubit::new(a.omega, a.beta_s)?;
            let mask = match &a.mask {
                Some(bits) => QueryMask::new(bits.parse::<BitString>()?, &oracle)?,
                None => QueryMask::full(&oracle),
            };
            let outcome = kickback_outcome(&probe, &oracle, &mask)?;
            #[derive(Serialize)]
            struct QueryResult {
                mask: String,
                outcome: thermoquery::query::QueryOutcome,
                virtual_swap_regime: thermoquery::query::Regime,
                temperature_defined: bool,
                costs: thermoquery::query::ResetCosts,
            }
            let result = QueryResult {
                mask: mask.bits().to_string(),
                outcome,
                virtual_swap_regime: classify_regime(&probe, &oracle),
                temperature_defined: temperature_well_defined(&outcome, &probe),
                costs: reset_costs(&outcome, &oracle, &probe),
            };
            sink.record(a, &result)?;
            sink.finish()
        }
        Command::Readout(a) => {
            let mut sink = open("readout")?;
            let probe = ThermalQubit::new(a.omega, a.beta_s)?;
            let e2 = match a.e2 {
                Some(e2) => e2,
                None => calibrate_e2(&probe, a.n, a.e1, a.beta_m, a.tv)?,
            };
            let h = DjHypotheses::new(&probe, a.n, a.e1, e2, a.beta_m)?;
            let constant = h.closest_constant();
            let n_samples = match a.samples {
                Some(n) => n,
                None => sample_bound_from_threshold(a.delta, h.worst_case_distance())?,
            };
            let rule = match a.rule {
                Rule::Ml => DecisionRule::MaximumLikelihood,
                Rule::Np => DecisionRule::NeymanPearson {
                    false_positive: a.delta,
                },
            };
            let truth = match a.truth {
                Truth::Constant => constant,
                Truth::Balanced => h.balanced,
            };
            let report = monte_carlo_readout(
                &truth,
                &h.balanced,
                &constant,
                &ReadoutConfig {
                    n_samples,
                    trials: a.trials,
                    seed: cli.seed,
                    delta: a.delta,
                    rule,
                },
            )?;
            #[derive(Serialize)]
            struct ReadoutResult {
                #[serde(rename = "E2")]
                e2: f64,
                hypotheses: DjHypotheses,
                report: thermoquery::readout::HypothesisTestReport,
            }
            sink.record(
                a,
                &ReadoutResult {
                    e2,
                    hypotheses: h,
                    report,
                },
            )?;
            sink.finish()
        }
        Command::Verify(a) => {
            let mut sink = open("verify")?;
            let config = VerifyConfig {
                max_dj_n: a.max_n,
                max_bv_n: a.max_bv_n,
                trials: a.trials,
                mask_trials: a.mask_trials,
                seed: cli.seed,
            };
            if config.max_dj_n == 0 || config.max_dj_n > 4 {
                bail!("max-n must lie in [1, 4], got {}", config.max_dj_n);
            }
            if config.max_bv_n == 0 || config.max_bv_n > 18 {
                bail!("max-bv-n must lie in [1, 18], got {}", config.max_bv_n);
            }
            let report = if a.inject_sign_flip {
                verify::run_with(&config, &SignFlipped)?
            } else {
                verify::run(&config)?
            };
            let status = match &report.first_failure {
                None => "PASS".to_string(),
                Some(f) => format!("FAIL {f}"),
            };
            sink.comment(&format!("result: {status}"));
            sink.custom(a, &report, |w| {
                let mut csv = csv::Writer::from_writer(w);
                for c in &report.checks {
                    csv.serialize(c)?;
                }
                csv.flush()?;
                Ok(())
            })?;
            sink.finish()?;
            match report.first_failure {
                None => {
                    eprintln!("verify: PASS ({} comparisons)", report.total_cases());
                    Ok(())
                }
                Some(f) => Err(VerificationFailed(f.to_string()).into()),
            }
        }
    }
}

fn load_oracle(path: Option<&Path>, inline: Option<&str>) -> Result<ThermalMachineOracle> {
    let text = match (path, inline) {
        (Some(p), _) => {
            std::fs::read_to_string(p).with_context(|| format!("cannot read {}", p.display()))?
        }
        (None, Some(s)) => s.to_string(),
        (None, None) => bail!("an oracle is required: pass --oracle or --oracle-json"),
    };
    serde_json::from_str(&text).context("invalid oracle JSON")
}
