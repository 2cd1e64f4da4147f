//! Deutsch–Jozsa and Bernstein–Vazirani problem instances.

use std::io::{BufRead, Write};

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::bits::BitString;
use crate::error::{Error, Result};
use crate::numeric::softplus;
use crate::query::NEUTRAL_TOLERANCE;
use crate::thermal::{BooleanFunctionTable, FunctionClass, ThermalQubit};

/// Largest `n` accepted by [`enumerate_balanced_functions`].
pub const MAX_ENUMERATION_BITS: usize = 4;

/// A function satisfying the DJ promise, with its class.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DJInstance {
    function: BooleanFunctionTable,
    classification: FunctionClass,
}

impl DJInstance {
    pub fn new(function: BooleanFunctionTable) -> Result<Self> {
        match function.classify() {
            FunctionClass::Other => Err(Error::PromiseViolated),
            classification => Ok(DJInstance {
                function,
                classification,
            }),
        }
    }

    pub fn function(&self) -> &BooleanFunctionTable {
        &self.function
    }

    pub fn classification(&self) -> FunctionClass {
        self.classification
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BVInstance {
    secret: BitString,
    hamming_weight: usize,
}

impl BVInstance {
    pub fn new(secret: BitString) -> Self {
        let hamming_weight = secret.hamming_weight();
        BVInstance {
            secret,
            hamming_weight,
        }
    }

    pub fn secret(&self) -> &BitString {
        &self.secret
    }

    pub fn hamming_weight(&self) -> usize {
        self.hamming_weight
    }
}

/// All balanced truth tables on `n` bits, or the first `limit` of them.
///
/// Tables are produced in increasing order of their output word read
/// little-endian (output `x` is bit `x`).
pub fn enumerate_balanced_functions(
    n: usize,
    limit: Option<usize>,
) -> Result<impl Iterator<Item = DJInstance>> {
    if n > MAX_ENUMERATION_BITS {
        return Err(Error::TooLarge {
            what: "exhaustive enumeration",
            n,
            limit: MAX_ENUMERATION_BITS,
        });
    }
    let size = 1usize << n;
    let half = (size / 2) as u32;
    let words = 0u32..(1u32 << size);
    Ok(words
        .filter(move |w| n > 0 && w.count_ones() == half)
        .map(move |w| {
            let outputs = (0..size).map(|i| w >> i & 1 == 1).collect();
            let f = BooleanFunctionTable::new(n, outputs).expect("size matches n");
            DJInstance {
                function: f,
                classification: FunctionClass::Balanced,
            }
        })
        .take(limit.unwrap_or(usize::MAX)))
}

/// The two constant functions followed by every balanced function on `n` bits.
pub fn dj_corpus(n: usize) -> Result<Vec<DJInstance>> {
    let mut out = vec![
        DJInstance::new(BooleanFunctionTable::constant(n, false)?)?,
        DJInstance::new(BooleanFunctionTable::constant(n, true)?)?,
    ];
    out.extend(enumerate_balanced_functions(n, None)?);
    Ok(out)
}

/// Uniformly random balanced function on `n ≥ 1` bits.
pub fn sample_balanced_function<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<DJInstance> {
    if n == 0 {
        return Err(Error::param("n", "balanced functions need n >= 1"));
    }
    if n > crate::thermal::MAX_TABLE_BITS {
        return Err(Error::TooLarge {
            what: "truth table",
            n,
            limit: crate::thermal::MAX_TABLE_BITS,
        });
    }
    let size = 1usize << n;
    let mut outputs: Vec<bool> = (0..size).map(|i| i < size / 2).collect();
    outputs.shuffle(rng);
    DJInstance::new(BooleanFunctionTable::new(n, outputs)?)
}

pub fn sample_secret<R: Rng + ?Sized>(n: usize, rng: &mut R) -> BVInstance {
    BVInstance::new(BitString::new((0..n).map(|_| rng.gen()).collect()))
}

/// `|Γ|` of a DJ oracle with `n_machine` qubits.
pub fn dj_gap_magnitude(
    classification: FunctionClass,
    n_machine: usize,
    e1: f64,
    e2: f64,
) -> Result<f64> {
    let n = n_machine as f64;
    match classification {
        FunctionClass::Constant1 => Ok(n * e1),
        FunctionClass::Constant0 => Ok(n * e2),
        FunctionClass::Balanced if n_machine.is_multiple_of(2) => Ok(0.5 * n * (e1 + e2)),
        FunctionClass::Balanced => Err(Error::param(
            "N",
            format!("must be even for a balanced function, got {n_machine}"),
        )),
        FunctionClass::Other => Err(Error::PromiseViolated),
    }
}

/// Probe ground population after the virtual-qubit swap with the linear BV oracle.
///
/// Depends on the secret only through its Hamming weight.
pub fn hamming_weight_population(
    instance: &BVInstance,
    gamma: f64,
    probe: &ThermalQubit,
    beta_m: f64,
) -> Result<f64> {
    if !(gamma > 0.0 && gamma.is_finite()) {
        return Err(Error::param("gamma", format!("must be > 0, got {gamma}")));
    }
    if !beta_m.is_finite() {
        return Err(Error::param("beta_M", "must be finite"));
    }
    let n = instance.secret.len() as f64;
    let w = instance.hamming_weight as f64;
    let log_zf = w * softplus(-beta_m * gamma) + (n - w) * std::f64::consts::LN_2;
    let machine = -beta_m * w * gamma;
    let diff = -probe.energy_ratio() - machine;
    let kick = if diff.abs() <= NEUTRAL_TOLERANCE {
        0.0
    } else {
        (machine - log_zf).exp() * diff.exp_m1()
    };
    Ok((1.0 + kick) * (-probe.log_partition()).exp())
}

/// Deterministic classical DJ: query inputs in order until the class is certain.
///
/// Returns the class and the number of evaluations, at most `2^{n-1} + 1`.
pub fn solve_dj_deterministic_classical(
    f: &BooleanFunctionTable,
) -> Result<(FunctionClass, usize)> {
    if f.classify() == FunctionClass::Other {
        return Err(Error::PromiseViolated);
    }
    let outputs = f.outputs();
    let budget = (outputs.len() / 2 + 1).min(outputs.len());
    let first = outputs[0];
    for (i, &v) in outputs.iter().enumerate().take(budget).skip(1) {
        if v != first {
            return Ok((FunctionClass::Balanced, i + 1));
        }
    }
    let class = if first {
        FunctionClass::Constant1
    } else {
        FunctionClass::Constant0
    };
    Ok((class, budget))
}

/// One line of a problem corpus file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CorpusEntry {
    Function { n: usize, outputs: Vec<u8> },
    Secret { secret: BitString },
}

impl From<&DJInstance> for CorpusEntry {
    fn from(inst: &DJInstance) -> Self {
        CorpusEntry::Function {
            n: inst.function.n(),
            outputs: inst.function.outputs().iter().map(|&b| b as u8).collect(),
        }
    }
}

impl From<&BVInstance> for CorpusEntry {
    fn from(inst: &BVInstance) -> Self {
        CorpusEntry::Secret {
            secret: inst.secret.clone(),
        }
    }
}

impl CorpusEntry {
    /// Truth table of a function entry; the promise is not checked.
    pub fn to_function(&self) -> Result<Option<BooleanFunctionTable>> {
        match self {
            CorpusEntry::Function { n, outputs } => {
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
                BooleanFunctionTable::new(*n, bits).map(Some)
            }
            CorpusEntry::Secret { .. } => Ok(None),
        }
    }
}

/// Writes one JSON object per line.
pub fn write_corpus<W: Write>(entries: &[CorpusEntry], mut out: W) -> Result<()> {
    for e in entries {
        serde_json::to_writer(&mut out, e)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

/// Reads one JSON object per line, skipping blank lines.
pub fn read_corpus<R: BufRead>(input: R) -> Result<Vec<CorpusEntry>> {
    let mut entries = Vec::new();
    for line in input.lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        entries.push(serde_json::from_str(&line)?);
    }
    Ok(entries)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::query::{kickback_outcome, QueryMask};
    use crate::thermal::{build_bv_oracle, build_dj_oracle};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn binomial(n: u64, k: u64) -> u64 {
        (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
    }

    #[test]
    fn balanced_counts() {
        assert_eq!(enumerate_balanced_functions(1, None).unwrap().count(), 2);
        assert_eq!(enumerate_balanced_functions(2, None).unwrap().count(), 6);
        assert_eq!(enumerate_balanced_functions(3, None).unwrap().count(), 70);
        assert_eq!(
            enumerate_balanced_functions(4, None).unwrap().count() as u64,
            binomial(16, 8)
        );
        assert_eq!(
            enumerate_balanced_functions(4, Some(10)).unwrap().count(),
            10
        );
        assert!(enumerate_balanced_functions(5, None).is_err());
    }

    #[test]
    fn n1_balanced_functions() {
        let tables: Vec<Vec<bool>> = enumerate_balanced_functions(1, None)
            .unwrap()
            .map(|i| i.function().outputs().to_vec())
            .collect();
        assert!(tables.contains(&vec![false, true]));
        assert!(tables.contains(&vec![true, false]));
    }

    #[test]
    fn enumerated_are_distinct_and_balanced() {
        let all: Vec<_> = enumerate_balanced_functions(3, None).unwrap().collect();
        let set: std::collections::HashSet<_> = all.iter().map(|i| i.function().clone()).collect();
        assert_eq!(set.len(), all.len());
        assert!(all
            .iter()
            .all(|i| i.function().classify() == FunctionClass::Balanced));
    }

    #[test]
    fn instance_rejects_promise_violation() {
        let f = BooleanFunctionTable::new(2, vec![true, false, false, false]).unwrap();
        assert_eq!(DJInstance::new(f), Err(Error::PromiseViolated));
    }

    #[test]
    fn gap_magnitude_examples() {
        assert_eq!(
            dj_gap_magnitude(FunctionClass::Constant1, 4, 1.0, 0.5).unwrap(),
            4.0
        );
        assert_eq!(
            dj_gap_magnitude(FunctionClass::Balanced, 4, 1.0, 0.5).unwrap(),
            3.0
        );
        assert_eq!(
            dj_gap_magnitude(FunctionClass::Constant0, 4, 1.0, 0.5).unwrap(),
            2.0
        );
        assert!(dj_gap_magnitude(FunctionClass::Balanced, 3, 1.0, 0.5).is_err());
    }

    #[test]
    fn gap_magnitude_matches_oracle() {
        for inst in dj_corpus(2).unwrap() {
            let oracle = build_dj_oracle(inst.function(), 1.3, 0.4, 1.0).unwrap();
            let expected = dj_gap_magnitude(inst.classification(), 4, 1.3, 0.4).unwrap();
            assert!((oracle.total_gap() - expected).abs() < 1e-15);
        }
    }

    #[test]
    fn zero_secret_gives_half() {
        let probe = ThermalQubit::new(0.7, 0.0).unwrap();
        let inst = BVInstance::new("000".parse().unwrap());
        assert_eq!(
            hamming_weight_population(&inst, 1.0, &probe, 1.0).unwrap(),
            0.5
        );
    }

    #[test]
    fn full_secret_reference_value() {
        let probe = ThermalQubit::new(1.0, 0.0).unwrap();
        let inst = BVInstance::new("111".parse().unwrap());
        let p = hamming_weight_population(&inst, 1.0, &probe, 1.0).unwrap();
        let expected = (1.0 + (1.0 - (-3.0f64).exp()) / (1.0 + (-1.0f64).exp()).powi(3)) / 2.0;
        assert!((p - expected).abs() < 1e-15);
    }

    #[test]
    fn population_increases_with_weight() {
        let probe = ThermalQubit::new(1.0, 0.0).unwrap();
        let ps: Vec<f64> = ["000", "100", "110", "111"]
            .iter()
            .map(|s| {
                hamming_weight_population(&BVInstance::new(s.parse().unwrap()), 0.8, &probe, 1.5)
                    .unwrap()
            })
            .collect();
        assert!(ps.windows(2).all(|w| w[1] > w[0]), "{ps:?}");
    }

    #[test]
    fn population_matches_kickback() {
        let probe = ThermalQubit::new(1.1, 0.4).unwrap();
        for secret in BitString::all(4) {
            let oracle = build_bv_oracle(&secret, 0.9, 1.2).unwrap();
            let out = kickback_outcome(&probe, &oracle, &QueryMask::full(&oracle)).unwrap();
            let p = hamming_weight_population(&BVInstance::new(secret), 0.9, &probe, 1.2).unwrap();
            assert!((p - out.p0_after).abs() < 1e-14);
        }
    }

    #[test]
    fn classical_solver_constant_worst_case() {
        let f = BooleanFunctionTable::constant(3, false).unwrap();
        assert_eq!(
            solve_dj_deterministic_classical(&f).unwrap(),
            (FunctionClass::Constant0, 5)
        );
    }

    #[test]
    fn classical_solver_early_exit() {
        let f = BooleanFunctionTable::new(2, vec![false, true, true, false]).unwrap();
        assert_eq!(
            solve_dj_deterministic_classical(&f).unwrap(),
            (FunctionClass::Balanced, 2)
        );
    }

    #[test]
    fn classical_solver_exhaustive() {
        for n in 1..=3 {
            let bound = (1 << (n - 1)) + 1;
            for inst in dj_corpus(n).unwrap() {
                let (class, queries) = solve_dj_deterministic_classical(inst.function()).unwrap();
                assert_eq!(class, inst.classification());
                assert!(queries <= bound);
            }
        }
        assert_eq!(dj_corpus(2).unwrap().len(), 8);
        let bad = BooleanFunctionTable::new(2, vec![true, true, true, false]).unwrap();
        assert_eq!(
            solve_dj_deterministic_classical(&bad),
            Err(Error::PromiseViolated)
        );
    }

    #[test]
    fn sampled_balanced_is_balanced() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for n in 1..8 {
            let inst = sample_balanced_function(n, &mut rng).unwrap();
            assert_eq!(inst.classification(), FunctionClass::Balanced);
        }
        let s = sample_secret(6, &mut rng);
        assert_eq!(s.hamming_weight(), s.secret().hamming_weight());
    }

    #[test]
    fn corpus_round_trip() {
        let mut entries: Vec<CorpusEntry> = dj_corpus(2)
            .unwrap()
            .iter()
            .map(CorpusEntry::from)
            .collect();
        entries.push(CorpusEntry::from(&BVInstance::new("1011".parse().unwrap())));
        let mut buf = Vec::new();
        write_corpus(&entries, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text
            .lines()
            .next()
            .unwrap()
            .starts_with(r#"{"n":2,"outputs":[0,0,0,0]}"#));
        assert!(text.lines().last().unwrap() == r#"{"secret":"1011"}"#);
        assert_eq!(read_corpus(&buf[..]).unwrap(), entries);
        let f = entries[2].to_function().unwrap().unwrap();
        assert_eq!(f.classify(), FunctionClass::Balanced);
    }
}
