//! Thermal qubits, gap vectors and thermal-machine oracles.
//!
//! Energies are dimensionless with `k_B = 1` and every ground level at zero.
//! Partition functions are kept in log-domain; an oracle is stored in product
//! form (gap vector plus a common machine inverse temperature) and never as a
//! population vector.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::bits::BitString;
use crate::error::{Error, Result};
use crate::numeric::{sigmoid, softplus};

/// Ground population `1 / (1 + e^{-β·gap})` of a thermal qubit.
pub fn ground_state_population(gap: f64, beta: f64) -> Result<f64> {
    check_gap(gap)?;
    check_beta(beta)?;
    Ok(sigmoid(beta * gap))
}

/// Inverse of [`ground_state_population`]: `log(p0 / (1 - p0)) / gap`.
///
/// Pure states (`p0 ∈ {0, 1}`) have no finite inverse temperature.
pub fn inverse_temperature_from_population(p0: f64, gap: f64) -> Result<f64> {
    check_gap(gap)?;
    if !(p0 > 0.0 && p0 < 1.0) {
        return Err(Error::PureState(p0));
    }
    Ok((p0.ln() - (-p0).ln_1p()) / gap)
}

fn check_gap(gap: f64) -> Result<()> {
    if gap > 0.0 && gap.is_finite() {
        Ok(())
    } else {
        Err(Error::NonPositiveGap(gap))
    }
}

fn check_beta(beta: f64) -> Result<()> {
    if beta.is_finite() {
        Ok(())
    } else {
        Err(Error::param("beta", format!("must be finite, got {beta}")))
    }
}

/// A two-level system `H = gap·|1⟩⟨1|` in a Gibbs state at inverse temperature `beta`.
///
/// Any finite `beta` is allowed: zero is maximally mixed and negative values
/// describe population inversion.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThermalQubit {
    gap: f64,
    beta: f64,
}

impl ThermalQubit {
    pub fn new(gap: f64, beta: f64) -> Result<Self> {
        check_gap(gap)?;
        check_beta(beta)?;
        Ok(ThermalQubit { gap, beta })
    }

    pub fn gap(&self) -> f64 {
        self.gap
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn ground_population(&self) -> f64 {
        sigmoid(self.beta * self.gap)
    }

    pub fn excited_population(&self) -> f64 {
        sigmoid(-self.beta * self.gap)
    }

    /// `log Z = log(1 + e^{-β·gap})`.
    pub fn log_partition(&self) -> f64 {
        softplus(-self.beta * self.gap)
    }

    /// `β·gap`, the Boltzmann exponent of the excited level.
    pub fn energy_ratio(&self) -> f64 {
        self.beta * self.gap
    }
}

/// Ordered machine-qubit gaps `Γ` and their sum `|Γ|`.
#[derive(Debug, Clone, PartialEq)]
pub struct GapVector {
    gaps: Vec<f64>,
    total: f64,
}

impl GapVector {
    /// Entries must be finite and non-negative; zero gaps are allowed.
    pub fn new(gaps: Vec<f64>) -> Result<Self> {
        if let Some(&g) = gaps.iter().find(|g| !(g.is_finite() && **g >= 0.0)) {
            return Err(Error::param(
                "gaps",
                format!("entries must be finite and >= 0, got {g}"),
            ));
        }
        let total = gaps.iter().sum();
        Ok(GapVector { gaps, total })
    }

    pub fn gaps(&self) -> &[f64] {
        &self.gaps
    }

    /// `|Γ|`.
    pub fn total(&self) -> f64 {
        self.total
    }

    pub fn len(&self) -> usize {
        self.gaps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gaps.is_empty()
    }

    /// `log Z = Σ_i log(1 + e^{-β·Γ_i})`.
    pub fn log_partition(&self, beta: f64) -> f64 {
        self.gaps.iter().map(|&g| softplus(-beta * g)).sum()
    }

    /// Energy `X·Γ` of the machine level labelled by `mask`.
    pub fn level_energy(&self, mask: &BitString) -> Result<f64> {
        mask.dot(&self.gaps)
    }
}

/// Promise classes of a Boolean function.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FunctionClass {
    Constant0,
    Constant1,
    Balanced,
    Other,
}

impl FunctionClass {
    pub fn is_constant(self) -> bool {
        matches!(self, FunctionClass::Constant0 | FunctionClass::Constant1)
    }
}

/// Truth table of `f : {0,1}^n → {0,1}`, indexed by the big-endian value of `x`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BooleanFunctionTable {
    n: usize,
    outputs: Vec<bool>,
}

/// Largest `n` for which a truth table may be materialised.
pub const MAX_TABLE_BITS: usize = 24;

impl BooleanFunctionTable {
    pub fn new(n: usize, outputs: Vec<bool>) -> Result<Self> {
        if n > MAX_TABLE_BITS {
            return Err(Error::TooLarge {
                what: "truth table",
                n,
                limit: MAX_TABLE_BITS,
            });
        }
        if outputs.len() != 1 << n {
            return Err(Error::LengthMismatch {
                expected: 1 << n,
                actual: outputs.len(),
            });
        }
        Ok(BooleanFunctionTable { n, outputs })
    }

    pub fn from_fn(n: usize, f: impl Fn(&BitString) -> bool) -> Result<Self> {
        if n > MAX_TABLE_BITS {
            return Err(Error::TooLarge {
                what: "truth table",
                n,
                limit: MAX_TABLE_BITS,
            });
        }
        Self::new(n, BitString::all(n).map(|x| f(&x)).collect())
    }

    pub fn constant(n: usize, value: bool) -> Result<Self> {
        Self::from_fn(n, |_| value)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of inputs, `N = 2^n`.
    pub fn domain_size(&self) -> usize {
        self.outputs.len()
    }

    pub fn outputs(&self) -> &[bool] {
        &self.outputs
    }

    pub fn eval_index(&self, index: usize) -> Result<bool> {
        self.outputs
            .get(index)
            .copied()
            .ok_or(Error::IndexOutOfRange {
                index,
                len: self.outputs.len(),
            })
    }

    pub fn eval(&self, x: &BitString) -> Result<bool> {
        if x.len() != self.n {
            return Err(Error::LengthMismatch {
                expected: self.n,
                actual: x.len(),
            });
        }
        self.eval_index(x.to_index())
    }

    pub fn ones(&self) -> usize {
        self.outputs.iter().filter(|&&b| b).count()
    }

    pub fn classify(&self) -> FunctionClass {
        let ones = self.ones();
        let size = self.outputs.len();
        if ones == 0 {
            FunctionClass::Constant0
        } else if ones == size {
            FunctionClass::Constant1
        } else if 2 * ones == size {
            FunctionClass::Balanced
        } else {
            FunctionClass::Other
        }
    }
}

/// What an oracle's gap vector encodes.
#[derive(Debug, Clone, PartialEq)]
pub enum Problem {
    DeutschJozsa {
        function: BooleanFunctionTable,
        e1: f64,
        e2: f64,
    },
    BernsteinVazirani {
        secret: BitString,
        gamma: f64,
    },
    Custom,
}

/// Product of thermal qubits at a common inverse temperature `β_M`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "OracleSpec", into = "OracleSpec")]
pub struct ThermalMachineOracle {
    gap_vector: GapVector,
    beta_m: f64,
    problem: Problem,
    log_partition: f64,
}

impl ThermalMachineOracle {
    fn assemble(gap_vector: GapVector, beta_m: f64, problem: Problem) -> Result<Self> {
        check_beta(beta_m)?;
        let log_partition = gap_vector.log_partition(beta_m);
        if !log_partition.is_finite() {
            return Err(Error::param(
                "beta_M",
                "log partition function is not finite",
            ));
        }
        Ok(ThermalMachineOracle {
            gap_vector,
            beta_m,
            problem,
            log_partition,
        })
    }

    /// Oracle with arbitrary gaps, e.g. per-qubit energies `s_i·γ_i`.
    pub fn custom(gaps: Vec<f64>, beta_m: f64) -> Result<Self> {
        Self::assemble(GapVector::new(gaps)?, beta_m, Problem::Custom)
    }

    pub fn gap_vector(&self) -> &GapVector {
        &self.gap_vector
    }

    pub fn gaps(&self) -> &[f64] {
        self.gap_vector.gaps()
    }

    /// `|Γ|`.
    pub fn total_gap(&self) -> f64 {
        self.gap_vector.total()
    }

    /// Number of machine qubits `N`.
    pub fn len(&self) -> usize {
        self.gap_vector.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gap_vector.is_empty()
    }

    pub fn beta_m(&self) -> f64 {
        self.beta_m
    }

    pub fn problem(&self) -> &Problem {
        &self.problem
    }

    /// `log Z_f`.
    pub fn log_partition(&self) -> f64 {
        self.log_partition
    }

    /// Population of the machine ground level `0^N`, i.e. `1/Z_f`.
    pub fn ground_population(&self) -> f64 {
        (-self.log_partition).exp()
    }

    /// Gap and temperature of machine qubit `index` as `(gap, β_M)`.
    pub fn qubit_parameters(&self, index: usize) -> Result<(f64, f64)> {
        self.gaps()
            .get(index)
            .map(|&g| (g, self.beta_m))
            .ok_or(Error::IndexOutOfRange {
                index,
                len: self.len(),
            })
    }

    /// Machine qubit `index` as a [`ThermalQubit`]; fails for a zero gap.
    pub fn machine_qubit(&self, index: usize) -> Result<ThermalQubit> {
        let (gap, beta) = self.qubit_parameters(index)?;
        ThermalQubit::new(gap, beta)
    }

    /// Excited population of machine qubit `index`.
    pub fn excited_population(&self, index: usize) -> Result<f64> {
        let (gap, beta) = self.qubit_parameters(index)?;
        Ok(sigmoid(-beta * gap))
    }
}

/// Gap `E(x) = f(x)·E1 + (f(x)⊕1)·E2`.
pub fn dj_gap(value: bool, e1: f64, e2: f64) -> f64 {
    if value {
        e1
    } else {
        e2
    }
}

/// Deutsch–Jozsa oracle: one machine qubit per input `x`, with gap `E(x)`.
pub fn build_dj_oracle(
    f: &BooleanFunctionTable,
    e1: f64,
    e2: f64,
    beta_m: f64,
) -> Result<ThermalMachineOracle> {
    check_gap(e1).map_err(|_| Error::param("E1", format!("must be > 0, got {e1}")))?;
    check_gap(e2).map_err(|_| Error::param("E2", format!("must be > 0, got {e2}")))?;
    let gaps = f.outputs().iter().map(|&v| dj_gap(v, e1, e2)).collect();
    ThermalMachineOracle::assemble(
        GapVector::new(gaps)?,
        beta_m,
        Problem::DeutschJozsa {
            function: f.clone(),
            e1,
            e2,
        },
    )
}

/// Linear Bernstein–Vazirani oracle: qubit `i` has gap `s_i·γ`.
pub fn build_bv_oracle(
    secret: &BitString,
    gamma: f64,
    beta_m: f64,
) -> Result<ThermalMachineOracle> {
    if secret.is_empty() {
        return Err(Error::Empty("secret"));
    }
    check_gap(gamma).map_err(|_| Error::param("gamma", format!("must be > 0, got {gamma}")))?;
    let gaps = secret.iter().map(|s| if s { gamma } else { 0.0 }).collect();
    ThermalMachineOracle::assemble(
        GapVector::new(gaps)?,
        beta_m,
        Problem::BernsteinVazirani {
            secret: secret.clone(),
            gamma,
        },
    )
}

/// One run of the conditional thermalisation that prepares machine qubit `x`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionalPreparation {
    pub input: BitString,
    pub output: bool,
    /// `p_x = e^{-β_M·gap} / (1 + e^{-β_M·gap})`.
    pub excitation_probability: f64,
    pub excited: bool,
    pub target: ThermalQubit,
}

/// Conditional thermalisation of a fresh ground-state qubit.
///
/// On diagonal states the channel is a classical bit flip taken with
/// probability `p_x`, which leaves the qubit in the Gibbs state of
/// `target_gap` at `β_M`.
pub fn prepare_with_rng<R: Rng + ?Sized>(
    x: &BitString,
    f: &BooleanFunctionTable,
    target_gap: f64,
    beta_m: f64,
    rng: &mut R,
) -> Result<ConditionalPreparation> {
    let output = f.eval(x)?;
    let target = ThermalQubit::new(target_gap, beta_m)?;
    let p = target.excited_population();
    let excited = rng.gen::<f64>() < p;
    Ok(ConditionalPreparation {
        input: x.clone(),
        output,
        excitation_probability: p,
        excited,
        target,
    })
}

pub fn prepare_via_conditional_thermalization(
    x: &BitString,
    f: &BooleanFunctionTable,
    target_gap: f64,
    beta_m: f64,
    seed: u64,
) -> Result<ConditionalPreparation> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    prepare_with_rng(x, f, target_gap, beta_m, &mut rng)
}

/// Prepares every machine qubit of a DJ oracle with target gap `E(x)`.
pub fn prepare_dj_machine(
    f: &BooleanFunctionTable,
    e1: f64,
    e2: f64,
    beta_m: f64,
    seed: u64,
) -> Result<Vec<ConditionalPreparation>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    BitString::all(f.n())
        .map(|x| {
            let gap = dj_gap(f.eval(&x)?, e1, e2);
            prepare_with_rng(&x, f, gap, beta_m, &mut rng)
        })
        .collect()
}

/// JSON wire form of an oracle.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OracleSpec {
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub outputs: Option<Vec<u8>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub secret: Option<BitString>,
    #[serde(rename = "E1", default, skip_serializing_if = "Option::is_none")]
    pub e1: Option<f64>,
    #[serde(rename = "E2", default, skip_serializing_if = "Option::is_none")]
    pub e2: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gaps: Option<Vec<f64>>,
    #[serde(rename = "beta_M")]
    pub beta_m: f64,
}

fn required<T>(value: Option<T>, name: &'static str) -> Result<T> {
    value.ok_or_else(|| Error::param(name, "missing"))
}

impl TryFrom<OracleSpec> for ThermalMachineOracle {
    type Error = Error;

    fn try_from(spec: OracleSpec) -> Result<Self> {
        match spec.kind.as_str() {
            "dj" => {
                let outputs = required(spec.outputs, "outputs")?;
                let bits = outputs
                    .iter()
                    .map(|&o| match o {
                        0 => Ok(false),
                        1 => Ok(true),
                        other => Err(Error::param(
                            "outputs",
                            format!("entries must be 0 or 1, got {other}"),
                        )),
                    })
                    .collect::<Result<Vec<_>>>()?;
                let n = match spec.n {
                    Some(n) => n,
                    None => bits.len().trailing_zeros() as usize,
                };
                let f = BooleanFunctionTable::new(n, bits)?;
                build_dj_oracle(
                    &f,
                    required(spec.e1, "E1")?,
                    required(spec.e2, "E2")?,
                    spec.beta_m,
                )
            }
            "bv" => {
                let secret = required(spec.secret, "secret")?;
                if let Some(n) = spec.n {
                    if n != secret.len() {
                        return Err(Error::LengthMismatch {
                            expected: n,
                            actual: secret.len(),
                        });
                    }
                }
                build_bv_oracle(&secret, required(spec.gamma, "gamma")?, spec.beta_m)
            }
            "custom" => ThermalMachineOracle::custom(required(spec.gaps, "gaps")?, spec.beta_m),
            other => Err(Error::param(
                "kind",
                format!("unknown oracle kind {other:?}"),
            )),
        }
    }
}

impl From<ThermalMachineOracle> for OracleSpec {
    fn from(oracle: ThermalMachineOracle) -> Self {
        let mut spec = OracleSpec {
            kind: String::new(),
            n: None,
            outputs: None,
            secret: None,
            e1: None,
            e2: None,
            gamma: None,
            gaps: None,
            beta_m: oracle.beta_m,
        };
        match oracle.problem {
            Problem::DeutschJozsa { function, e1, e2 } => {
                spec.kind = "dj".into();
                spec.n = Some(function.n());
                spec.outputs = Some(function.outputs().iter().map(|&b| b as u8).collect());
                spec.e1 = Some(e1);
                spec.e2 = Some(e2);
            }
            Problem::BernsteinVazirani { secret, gamma } => {
                spec.kind = "bv".into();
                spec.n = Some(secret.len());
                spec.secret = Some(secret);
                spec.gamma = Some(gamma);
            }
            Problem::Custom => {
                spec.kind = "custom".into();
                spec.gaps = Some(oracle.gap_vector.gaps);
            }
        }
        spec
    }
}
