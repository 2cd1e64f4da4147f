//! Heat-exchange queries between a probe qubit and a thermal machine oracle.
//!
//! Three query models are provided:
//! - [`swap_query`]: swap the probe with a single machine qubit `τ_x`;
//! - [`mixed_input_query`]: the same swap with `x` drawn uniformly at random;
//! - [`kickback_outcome`]: the level exchange `V(X)` between `|0_S X⟩` and
//!   `|1_S X⊕1⟩`. With `X = 1^N` this is the virtual-qubit swap, see
//!   [`virtual_swap_outcome`].
//!
//! All Boltzmann factors are formed in log-domain and exponentiated once.

use serde::{Deserialize, Serialize};

use crate::bits::BitString;
use crate::error::{Error, Result};
use crate::readout::BinaryDistribution;
use crate::thermal::{Problem, ThermalMachineOracle, ThermalQubit};

/// Absolute tolerance on `β_M|Γ| − β_S·ω` below which a query is [`Regime::Neutral`].
pub const NEUTRAL_TOLERANCE: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Regime {
    Cooling,
    Heating,
    Neutral,
}

impl Regime {
    fn from_delta(delta_p0: f64) -> Self {
        if delta_p0 > 0.0 {
            Regime::Cooling
        } else if delta_p0 < 0.0 {
            Regime::Heating
        } else {
            Regime::Neutral
        }
    }
}

/// Selects which machine qubits take part in a kickback, one bit per qubit.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QueryMask(BitString);

impl QueryMask {
    pub fn new(bits: BitString, oracle: &ThermalMachineOracle) -> Result<Self> {
        if bits.len() != oracle.len() {
            return Err(Error::LengthMismatch {
                expected: oracle.len(),
                actual: bits.len(),
            });
        }
        Ok(QueryMask(bits))
    }

    /// `X = 1^N`.
    pub fn full(oracle: &ThermalMachineOracle) -> Self {
        QueryMask(BitString::ones(oracle.len()))
    }

    /// Mask with a 1 at every listed machine index.
    pub fn from_inputs(indices: &[usize], oracle: &ThermalMachineOracle) -> Result<Self> {
        let mut bits = vec![false; oracle.len()];
        for &i in indices {
            *bits.get_mut(i).ok_or(Error::IndexOutOfRange {
                index: i,
                len: oracle.len(),
            })? = true;
        }
        Ok(QueryMask(BitString::new(bits)))
    }

    pub fn bits(&self) -> &BitString {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Probe statistics before and after one query.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QueryOutcome {
    pub p0_before: f64,
    pub p0_after: f64,
    pub delta_p0: f64,
    /// `None` when the logarithm defining `β'_S` has a non-positive argument.
    pub beta_after: Option<f64>,
    pub regime: Regime,
}

/// Log-domain Boltzmann exponents of the two exchanged levels.
struct ExchangedLevels {
    /// `-β_S·ω − β_M·(X⊕1)·Γ`, level `|1_S X⊕1⟩`.
    probe_excited: f64,
    /// `-β_M·X·Γ`, level `|0_S X⟩`.
    probe_ground: f64,
}

impl ExchangedLevels {
    fn new(probe: &ThermalQubit, oracle: &ThermalMachineOracle, mask: &BitString) -> Result<Self> {
        let gv = oracle.gap_vector();
        let on = gv.level_energy(mask)?;
        let off = gv.level_energy(&mask.complement())?;
        Ok(ExchangedLevels {
            probe_excited: -probe.energy_ratio() - oracle.beta_m() * off,
            probe_ground: -oracle.beta_m() * on,
        })
    }

    /// `Z_S·Δp_0 = Z_f^{-1}(e^{a} − e^{b})`, zero within [`NEUTRAL_TOLERANCE`].
    fn scaled_delta(&self, log_zf: f64) -> f64 {
        let gap = self.probe_excited - self.probe_ground;
        if gap.abs() <= NEUTRAL_TOLERANCE {
            0.0
        } else {
            (self.probe_ground - log_zf).exp() * gap.exp_m1()
        }
    }
}

fn outcome_from_scaled_delta(probe: &ThermalQubit, scaled: f64) -> QueryOutcome {
    let p0_before = probe.ground_population();
    let delta_p0 = scaled * (-probe.log_partition()).exp();
    QueryOutcome {
        p0_before,
        p0_after: p0_before + delta_p0,
        delta_p0,
        beta_after: temperature_after(probe, scaled),
        regime: Regime::from_delta(delta_p0),
    }
}

/// `β'_S = ω^{-1} log((1 + Z_SΔp_0) / (e^{-β_Sω} − Z_SΔp_0))`.
fn temperature_after(probe: &ThermalQubit, scaled_delta: f64) -> Option<f64> {
    let numerator = 1.0 + scaled_delta;
    let denominator = (-probe.energy_ratio()).exp() - scaled_delta;
    (numerator > 0.0 && denominator > 0.0)
        .then(|| (numerator.ln() - denominator.ln()) / probe.gap())
}

/// Kickback `V(X)` for an arbitrary mask.
pub fn kickback_outcome(
    probe: &ThermalQubit,
    oracle: &ThermalMachineOracle,
    mask: &QueryMask,
) -> Result<QueryOutcome> {
    let levels = ExchangedLevels::new(probe, oracle, mask.bits())?;
    Ok(outcome_from_scaled_delta(
        probe,
        levels.scaled_delta(oracle.log_partition()),
    ))
}

/// Virtual-qubit swap `V(1^N)`, evaluated from the closed form in `|Γ|` and `Z_f` only.
pub fn virtual_swap_outcome(probe: &ThermalQubit, oracle: &ThermalMachineOracle) -> QueryOutcome {
    let p0_before = probe.ground_population();
    let log_zf = oracle.log_partition();
    let probe_factor = -probe.energy_ratio();
    let machine_factor = -oracle.beta_m() * oracle.total_gap();
    let gap = probe_factor - machine_factor;
    // Z_f^{-1}(e^{-β_Sω} − e^{-β_M|Γ|})
    let kick = if gap.abs() <= NEUTRAL_TOLERANCE {
        0.0
    } else {
        (machine_factor - log_zf).exp() * gap.exp_m1()
    };
    let delta_p0 = kick * (-probe.log_partition()).exp();
    let p0_after = p0_before + delta_p0;
    let numerator = 1.0 + kick;
    let denominator = probe_factor.exp() - kick;
    let beta_after = (numerator > 0.0 && denominator > 0.0)
        .then(|| (numerator / denominator).ln() / probe.gap());
    QueryOutcome {
        p0_before,
        p0_after,
        delta_p0,
        beta_after,
        regime: Regime::from_delta(delta_p0),
    }
}

/// Cooling iff `β_S·ω < β_M|Γ|`, heating iff `β_S·ω > β_M|Γ|`.
pub fn classify_regime(probe: &ThermalQubit, oracle: &ThermalMachineOracle) -> Regime {
    let diff = oracle.beta_m() * oracle.total_gap() - probe.energy_ratio();
    if diff > NEUTRAL_TOLERANCE {
        Regime::Cooling
    } else if diff < -NEUTRAL_TOLERANCE {
        Regime::Heating
    } else {
        Regime::Neutral
    }
}

/// Result of swapping the probe with one machine qubit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SwapOutcome {
    /// The probe after the swap: machine qubit `τ_x`.
    pub probe: ThermalQubit,
    /// The former probe, now sitting in the machine.
    pub displaced: ThermalQubit,
}

/// Swap the probe with machine qubit `index` (query model (i)).
pub fn swap_query(
    probe: &ThermalQubit,
    oracle: &ThermalMachineOracle,
    index: usize,
) -> Result<SwapOutcome> {
    Ok(SwapOutcome {
        probe: oracle.machine_qubit(index)?,
        displaced: *probe,
    })
}

/// Swap the probe into an explicit register of qubits, returning the new probe.
pub fn swap_with_register(
    probe: ThermalQubit,
    register: &mut [ThermalQubit],
    index: usize,
) -> Result<ThermalQubit> {
    let len = register.len();
    let slot = register
        .get_mut(index)
        .ok_or(Error::IndexOutOfRange { index, len })?;
    Ok(std::mem::replace(slot, probe))
}

/// Swap with a uniformly random machine qubit (query model (ii)).
///
/// The returned distribution is the probe's marginal after averaging over all
/// swap branches: `τ_1`, `τ_2` or `(τ_1 + τ_2)/2` for the three DJ classes.
pub fn mixed_input_query(
    _probe: &ThermalQubit,
    oracle: &ThermalMachineOracle,
) -> Result<BinaryDistribution> {
    if !matches!(oracle.problem(), Problem::DeutschJozsa { .. }) {
        return Err(Error::NotDeutschJozsa);
    }
    let n = oracle.len() as f64;
    let excited: f64 = (0..oracle.len())
        .map(|i| oracle.excited_population(i))
        .sum::<Result<f64>>()?;
    BinaryDistribution::new(1.0 - excited / n)
}

/// Outcome of [`sensitivity_check`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SensitivityReport {
    pub threshold: f64,
    pub delta_p0: f64,
    /// `|Δp_0| > c`.
    pub direct: bool,
    /// `−log(c·Z_S·Z_f + e^{-β_M|Γ|})`.
    pub cooling_rhs: f64,
    /// The cooling right-hand side is non-negative (`c·Z_S·Z_f + e^{-β_M|Γ|} ≤ 1`).
    pub cooling_rhs_positive: bool,
    /// `β_S·ω < cooling_rhs`.
    pub cooling_bound: bool,
    /// `−log(e^{-β_M|Γ|} − c·Z_S·Z_f)`, absent when the argument is non-positive.
    pub heating_rhs: Option<f64>,
    pub heating_rhs_positive: bool,
    /// `β_S·ω > heating_rhs`.
    pub heating_bound: bool,
    pub closed_form: bool,
    pub agree: bool,
}

/// Whether a virtual-qubit swap moves the probe population by more than `c`.
pub fn sensitivity_check(
    probe: &ThermalQubit,
    oracle: &ThermalMachineOracle,
    c: f64,
) -> Result<SensitivityReport> {
    let p0 = probe.ground_population();
    if !(c > 0.0 && c < 1.0 - p0) {
        return Err(Error::param(
            "c",
            format!("must lie in (0, {}), got {c}", 1.0 - p0),
        ));
    }
    let outcome = virtual_swap_outcome(probe, oracle);
    let direct = outcome.delta_p0.abs() > c;

    let czz = c * (probe.log_partition() + oracle.log_partition()).exp();
    let machine = (-oracle.beta_m() * oracle.total_gap()).exp();
    let x = probe.energy_ratio();

    let cooling_arg = czz + machine;
    let cooling_rhs = -cooling_arg.ln();
    let cooling_bound = x < cooling_rhs;

    let heating_arg = machine - czz;
    let heating_rhs = (heating_arg > 0.0).then(|| -heating_arg.ln());
    let heating_bound = heating_rhs.is_some_and(|rhs| x > rhs);

    let closed_form = cooling_bound || heating_bound;
    Ok(SensitivityReport {
        threshold: c,
        delta_p0: outcome.delta_p0,
        direct,
        cooling_rhs,
        cooling_rhs_positive: cooling_arg <= 1.0,
        cooling_bound,
        heating_rhs,
        heating_rhs_positive: heating_arg > 0.0 && heating_arg <= 1.0,
        heating_bound,
        closed_form,
        agree: closed_form == direct,
    })
}

/// Whether `β'_S` exists for this outcome.
///
/// Cooling needs `e^{-β_Sω} > Z_S·Δp_0`; heating needs a positive numerator
/// `1 + Z_S·Δp_0`.
pub fn temperature_well_defined(outcome: &QueryOutcome, probe: &ThermalQubit) -> bool {
    let scaled = outcome.delta_p0 * probe.log_partition().exp();
    match outcome.regime {
        Regime::Neutral => true,
        Regime::Cooling => (-probe.energy_ratio()).exp() > scaled,
        Regime::Heating => 1.0 + scaled > 0.0 && 1.0 > scaled,
    }
}

/// Energetic cost of restoring probe and machine after a query.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ResetCosts {
    /// `E_Diss = Δp_0·|Γ|`, dissipated while re-thermalising the machine.
    pub dissipation: f64,
    /// `E_reset = Δp_0·ω`, work to push the probe back out of equilibrium.
    pub reset_work: f64,
}

pub fn reset_costs(
    outcome: &QueryOutcome,
    oracle: &ThermalMachineOracle,
    probe: &ThermalQubit,
) -> ResetCosts {
    ResetCosts {
        dissipation: outcome.delta_p0 * oracle.total_gap(),
        reset_work: outcome.delta_p0 * probe.gap(),
    }
}
