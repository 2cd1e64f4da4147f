//! Detuned energy-selective exchange and the 3-bit secret-string sweep.
//!
//! The query is a resonant Rabi flip-flop between the probe and the machine's
//! collective transition. Detuning `δ` suppresses the transferred population
//! by `η = g²/(g² + δ²)`. The detuned model uses biased machine gaps
//! `s_i·γ_i` with `s_i ∈ {1 − ε, 1 + ε}`, so different secrets detune
//! differently. Detuning here is an energy and unrelated to the error rate
//! `delta` of [`crate::readout`].

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bits::BitString;
use crate::error::{Error, Result};
use crate::query::NEUTRAL_TOLERANCE;
use crate::thermal::{ThermalMachineOracle, ThermalQubit};

fn check_coupling(g: f64) -> Result<()> {
    if g > 0.0 && g.is_finite() {
        Ok(())
    } else {
        Err(Error::param("g", format!("must be > 0, got {g}")))
    }
}

/// Rabi flip-flop probability `η·sin²(√(g² + δ²)·t/2)`.
pub fn flip_probability(g: f64, detuning: f64, time: f64) -> Result<f64> {
    let eta = suppression_factor(g, detuning)?;
    let rabi = g.hypot(detuning);
    Ok(eta * (0.5 * rabi * time).sin().powi(2))
}

/// `η = g² / (g² + δ²)`.
pub fn suppression_factor(g: f64, detuning: f64) -> Result<f64> {
    check_coupling(g)?;
    let r = detuning / g;
    Ok(1.0 / (1.0 + r * r))
}

/// Fraction of the resonant population change that is transferred: `η`
/// without an interaction time, the full flip probability with one.
pub fn transfer_factor(g: f64, detuning: f64, time: Option<f64>) -> Result<f64> {
    match time {
        None => suppression_factor(g, detuning),
        Some(t) => flip_probability(g, detuning, t),
    }
}

/// Probe inverse temperature after a detuned virtual-qubit swap.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetunedTemperature {
    pub eta: f64,
    /// `Z_S·Δp_0` scaled by `η`.
    pub scaled_delta: f64,
    /// `ω^{-1} log((1 + η·Z_SΔp_0) / (Z_S − 1 − η·Z_SΔp_0))`; `None` if undefined.
    pub beta_prime: Option<f64>,
    /// Variant with `Z_f` in place of `Z_S` in the denominator; `None` if undefined.
    pub beta_prime_zf_denominator: Option<f64>,
}

/// `β'_S` with the population change `Δp_0` replaced by `η·Δp_0`.
///
/// Also evaluates the variant whose denominator reads `Z_f − η·K − 1`, with
/// `K = Z_f^{-1}(e^{-β_Sω} − e^{-β_M|Γ|})`. The two coincide only when
/// `Z_f = Z_S`.
pub fn detuned_probe_temperature(
    probe: &ThermalQubit,
    oracle: &ThermalMachineOracle,
    eta: f64,
) -> Result<DetunedTemperature> {
    if !(eta > 0.0 && eta <= 1.0) {
        return Err(Error::param(
            "eta",
            format!("must lie in (0, 1], got {eta}"),
        ));
    }
    let log_zf = oracle.log_partition();
    let probe_factor = -probe.energy_ratio();
    let machine_factor = -oracle.beta_m() * oracle.total_gap();
    let diff = probe_factor - machine_factor;
    let kick = if diff.abs() <= NEUTRAL_TOLERANCE {
        0.0
    } else {
        (machine_factor - log_zf).exp() * diff.exp_m1()
    };
    let scaled = eta * kick;
    let log_ratio =
        |num: f64, den: f64| (num > 0.0 && den > 0.0).then(|| (num.ln() - den.ln()) / probe.gap());
    Ok(DetunedTemperature {
        eta,
        scaled_delta: scaled,
        beta_prime: log_ratio(1.0 + scaled, probe_factor.exp() - scaled),
        beta_prime_zf_denominator: log_ratio(1.0 + scaled, log_zf.exp() - scaled - 1.0),
    })
}

/// Parameters of the detuned 3-bit Bernstein–Vazirani experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub machine_gaps: [f64; 3],
    /// Bias `ε`; the two scale factors are `1 − ε` and `1 + ε`.
    pub epsilon: f64,
    pub coupling: f64,
    pub omega: f64,
    pub beta_m: f64,
    /// Interaction time; `None` uses the short-time factor `η`.
    #[serde(default)]
    pub interaction_time: Option<f64>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            machine_gaps: [0.25, 0.33, 0.42],
            epsilon: 0.05,
            coupling: 0.02,
            omega: 1.0,
            beta_m: 1.0,
            interaction_time: None,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if let Some(g) = self
            .machine_gaps
            .iter()
            .find(|g| !(**g > 0.0 && g.is_finite()))
        {
            return Err(Error::param(
                "machine_gaps",
                format!("must be > 0, got {g}"),
            ));
        }
        if !(self.epsilon >= 0.0 && self.epsilon < 1.0) {
            return Err(Error::param(
                "epsilon",
                format!("must lie in [0, 1), got {}", self.epsilon),
            ));
        }
        check_coupling(self.coupling)?;
        if !(self.omega > 0.0 && self.omega.is_finite()) {
            return Err(Error::param(
                "omega",
                format!("must be > 0, got {}", self.omega),
            ));
        }
        if !self.beta_m.is_finite() {
            return Err(Error::param("beta_M", "must be finite"));
        }
        if let Some(t) = self.interaction_time {
            if !(t >= 0.0 && t.is_finite()) {
                return Err(Error::param(
                    "interaction_time",
                    format!("must be >= 0, got {t}"),
                ));
            }
        }
        Ok(())
    }

    /// Scale factors `s_i`: bit 1 selects `1 + ε`, bit 0 selects `1 − ε`.
    pub fn scales(&self, secret: &BitString) -> [f64; 3] {
        let mut s = [0.0; 3];
        for (i, bit) in secret.iter().take(3).enumerate() {
            s[i] = if bit {
                1.0 + self.epsilon
            } else {
                1.0 - self.epsilon
            };
        }
        s
    }

    /// `δ(s) = Σ s_i·γ_i − ω`.
    pub fn detuning(&self, secret: &BitString) -> f64 {
        let s = self.scales(secret);
        s.iter()
            .zip(&self.machine_gaps)
            .map(|(s, g)| s * g)
            .sum::<f64>()
            - self.omega
    }

    pub fn oracle(&self, secret: &BitString) -> Result<ThermalMachineOracle> {
        let s = self.scales(secret);
        let gaps = s
            .iter()
            .zip(&self.machine_gaps)
            .map(|(s, g)| s * g)
            .collect();
        ThermalMachineOracle::custom(gaps, self.beta_m)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepCurve {
    pub secret: BitString,
    pub scales: [f64; 3],
    pub delta_s: f64,
    pub eta: f64,
    pub beta_s: Vec<f64>,
    pub beta_s_prime: Vec<Option<f64>>,
    pub beta_s_prime_zf_denominator: Vec<Option<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bv3Sweep {
    pub config: ExperimentConfig,
    pub curves: Vec<SweepCurve>,
    /// Smallest sup-norm distance between two curves.
    pub min_separation: f64,
    /// Smallest pointwise distance between two curves at any grid point.
    pub min_pointwise_gap: f64,
    /// Number of curves after merging those within `1e-12` in sup-norm.
    pub distinct_curves: usize,
}

const SAME_CURVE: f64 = 1e-12;

fn sup_distance(a: &SweepCurve, b: &SweepCurve) -> (f64, f64) {
    let mut sup = 0.0f64;
    let mut inf = f64::INFINITY;
    for (x, y) in a.beta_s_prime.iter().zip(&b.beta_s_prime) {
        let d = match (x, y) {
            (Some(x), Some(y)) => (x - y).abs(),
            (None, None) => 0.0,
            _ => f64::INFINITY,
        };
        sup = sup.max(d);
        inf = inf.min(d);
    }
    (sup, inf)
}

/// `β'_S(δ(s))` against `β_S` for all eight secrets, in secret order `000`..`111`.
pub fn bv3_sweep(config: &ExperimentConfig, beta_s_grid: &[f64]) -> Result<Bv3Sweep> {
    config.validate()?;
    if beta_s_grid.is_empty() {
        return Err(Error::Empty("beta_S grid"));
    }
    if let Some(b) = beta_s_grid.iter().find(|b| !b.is_finite()) {
        return Err(Error::param("beta_S", format!("must be finite, got {b}")));
    }
    let secrets: Vec<BitString> = BitString::all(3).collect();
    let curves = secrets
        .par_iter()
        .map(|secret| {
            let oracle = config.oracle(secret)?;
            let delta_s = config.detuning(secret);
            let eta = transfer_factor(config.coupling, delta_s, config.interaction_time)?;
            let mut primary = Vec::with_capacity(beta_s_grid.len());
            let mut printed = Vec::with_capacity(beta_s_grid.len());
            for &beta_s in beta_s_grid {
                let probe = ThermalQubit::new(config.omega, beta_s)?;
                if eta == 0.0 {
                    primary.push(Some(beta_s));
                    printed.push(None);
                    continue;
                }
                let t = detuned_probe_temperature(&probe, &oracle, eta)?;
                primary.push(t.beta_prime);
                printed.push(t.beta_prime_zf_denominator);
            }
            Ok(SweepCurve {
                secret: secret.clone(),
                scales: config.scales(secret),
                delta_s,
                eta,
                beta_s: beta_s_grid.to_vec(),
                beta_s_prime: primary,
                beta_s_prime_zf_denominator: printed,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let mut min_separation = f64::INFINITY;
    let mut min_pointwise_gap = f64::INFINITY;
    let mut representatives: Vec<usize> = Vec::new();
    for i in 0..curves.len() {
        for j in i + 1..curves.len() {
            let (sup, inf) = sup_distance(&curves[i], &curves[j]);
            min_separation = min_separation.min(sup);
            min_pointwise_gap = min_pointwise_gap.min(inf);
        }
        if representatives
            .iter()
            .all(|&r| sup_distance(&curves[r], &curves[i]).0 > SAME_CURVE)
        {
            representatives.push(i);
        }
    }
    Ok(Bv3Sweep {
        config: config.clone(),
        curves,
        min_separation,
        min_pointwise_gap,
        distinct_curves: representatives.len(),
    })
}

/// Writes `secret,beta_S,delta_s,eta,beta_S_prime`, one row per curve point.
///
/// Undefined temperatures are left empty.
pub fn write_sweep_csv<W: Write>(sweep: &Bv3Sweep, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["secret", "beta_S", "delta_s", "eta", "beta_S_prime"])
        .map_err(|e| Error::Io(e.to_string()))?;
    for c in &sweep.curves {
        for (b, p) in c.beta_s.iter().zip(&c.beta_s_prime) {
            w.write_record([
                c.secret.to_string(),
                b.to_string(),
                c.delta_s.to_string(),
                c.eta.to_string(),
                p.map(|v| v.to_string()).unwrap_or_default(),
            ])
            .map_err(|e| Error::Io(e.to_string()))?;
        }
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::query::virtual_swap_outcome;
    use crate::thermal::inverse_temperature_from_population;
    use std::f64::consts::PI;

    fn grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
        (0..n)
            .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
            .collect()
    }

    #[test]
    fn resonant_pi_pulse() {
        assert!((flip_probability(0.7, 0.0, PI / 0.7).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(flip_probability(0.7, 0.3, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn flip_probability_direct_value() {
        let t = PI / 2f64.sqrt();
        let p = flip_probability(1.0, 1.0, t).unwrap();
        let expected = 0.5 * (2f64.sqrt() * t / 2.0).sin().powi(2);
        assert!((p - expected).abs() < 1e-15);
        assert!(p <= 0.5);
    }

    #[test]
    fn suppression_examples() {
        assert_eq!(suppression_factor(0.3, 0.0).unwrap(), 1.0);
        assert!((suppression_factor(0.3, 0.3).unwrap() - 0.5).abs() < 1e-15);
        assert!((suppression_factor(0.3, -0.3).unwrap() - 0.5).abs() < 1e-15);
        assert!(suppression_factor(0.0, 0.1).is_err());
        let etas: Vec<f64> = (0..20)
            .map(|k| suppression_factor(1.0, k as f64 * 0.1).unwrap())
            .collect();
        assert!(etas.windows(2).all(|w| w[1] < w[0]));
    }

    #[test]
    fn eta_one_matches_virtual_swap() {
        let probe = ThermalQubit::new(1.0, 0.4).unwrap();
        let oracle = ThermalMachineOracle::custom(vec![0.3, 0.4, 0.5], 1.2).unwrap();
        let t = detuned_probe_temperature(&probe, &oracle, 1.0).unwrap();
        let out = virtual_swap_outcome(&probe, &oracle);
        assert!((t.beta_prime.unwrap() - out.beta_after.unwrap()).abs() < 1e-12);
    }

    #[test]
    fn no_exchange_keeps_temperature() {
        let oracle = ThermalMachineOracle::custom(vec![0.5, 0.5], 1.0).unwrap();
        let probe = ThermalQubit::new(1.0, 1.0).unwrap();
        for &eta in &[0.1, 0.5, 1.0] {
            let t = detuned_probe_temperature(&probe, &oracle, eta).unwrap();
            assert!((t.beta_prime.unwrap() - 1.0).abs() < 1e-12);
        }
        assert!(detuned_probe_temperature(&probe, &oracle, 0.0).is_err());
        assert!(detuned_probe_temperature(&probe, &oracle, 1.5).is_err());
    }

    #[test]
    fn half_eta_two_paths_agree() {
        let cfg = ExperimentConfig::default();
        let probe = ThermalQubit::new(cfg.omega, 0.2).unwrap();
        let oracle = cfg.oracle(&"101".parse().unwrap()).unwrap();
        let t = detuned_probe_temperature(&probe, &oracle, 0.5).unwrap();
        let out = virtual_swap_outcome(&probe, &oracle);
        let p = out.p0_before + 0.5 * out.delta_p0;
        let beta = inverse_temperature_from_population(p, cfg.omega).unwrap();
        assert!((t.beta_prime.unwrap() - beta).abs() < 1e-12);
    }

    #[test]
    fn zf_variant_differs_from_substituted() {
        let probe = ThermalQubit::new(1.0, 0.4).unwrap();
        let oracle = ThermalMachineOracle::custom(vec![0.3, 0.4, 0.5], 1.2).unwrap();
        let t = detuned_probe_temperature(&probe, &oracle, 0.7).unwrap();
        let v = t.beta_prime_zf_denominator.unwrap();
        assert!((v - t.beta_prime.unwrap()).abs() > 1e-3);
    }

    #[test]
    fn config_validation() {
        assert!(ExperimentConfig::default().validate().is_ok());
        let bad = ExperimentConfig {
            coupling: 0.0,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
        let bad = ExperimentConfig {
            machine_gaps: [1.0, -1.0, 1.0],
            ..Default::default()
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn detuning_uses_biased_scales() {
        let cfg = ExperimentConfig {
            machine_gaps: [1.0, 2.0, 3.0],
            epsilon: 0.1,
            omega: 6.0,
            ..Default::default()
        };
        assert!((cfg.detuning(&"000".parse().unwrap()) + 0.6).abs() < 1e-12);
        assert!((cfg.detuning(&"111".parse().unwrap()) - 0.6).abs() < 1e-12);
        assert!((cfg.detuning(&"001".parse().unwrap()) - 0.0).abs() < 1e-12);
    }

    #[test]
    fn default_sweep_has_eight_curves() {
        let sweep = bv3_sweep(&ExperimentConfig::default(), &grid(0.0, 3.0, 31)).unwrap();
        assert_eq!(sweep.curves.len(), 8);
        assert_eq!(sweep.distinct_curves, 8);
        assert!(sweep.min_separation > 0.0);
    }

    #[test]
    fn zero_bias_collapses() {
        let cfg = ExperimentConfig {
            machine_gaps: [0.3, 0.3, 0.3],
            epsilon: 0.0,
            ..Default::default()
        };
        let sweep = bv3_sweep(&cfg, &grid(0.0, 3.0, 11)).unwrap();
        assert_eq!(sweep.distinct_curves, 1);
        assert_eq!(sweep.min_separation, 0.0);
    }

    #[test]
    fn equal_gaps_give_at_most_four_curves() {
        let cfg = ExperimentConfig {
            machine_gaps: [0.33, 0.33, 0.33],
            ..Default::default()
        };
        let sweep = bv3_sweep(&cfg, &grid(0.0, 3.0, 31)).unwrap();
        assert_eq!(sweep.distinct_curves, 4);
    }

    #[test]
    fn sweep_is_deterministic_and_csv_shaped() {
        let g = grid(0.0, 1.0, 3);
        let a = bv3_sweep(&ExperimentConfig::default(), &g).unwrap();
        let b = bv3_sweep(&ExperimentConfig::default(), &g).unwrap();
        assert_eq!(a, b);
        let mut buf = Vec::new();
        write_sweep_csv(&a, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(
            text.lines().next().unwrap(),
            "secret,beta_S,delta_s,eta,beta_S_prime"
        );
        assert_eq!(text.lines().count(), 1 + 8 * 3);
        assert!(bv3_sweep(&ExperimentConfig::default(), &[]).is_err());
    }
}
