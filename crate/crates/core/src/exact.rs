//! Dense diagonal simulation of probe plus machine.
//!
//! Level index layout: the probe bit is the most significant bit, followed by
//! the machine string big-endian, so machine qubit `0` is the next bit down.
//! All populations are computed term by term from the Boltzmann weights and a
//! brute-force normalisation; nothing here uses the product-form partition
//! functions of [`crate::thermal`].

use std::io::Write;

use serde::Serialize;

use crate::bits::BitString;
use crate::error::{Error, Result};
use crate::numeric::logsumexp;
use crate::readout::BinaryDistribution;
use crate::thermal::{ThermalMachineOracle, ThermalQubit};

/// Default cap on probe plus machine qubits.
pub const DEFAULT_QUBIT_LIMIT: usize = 20;

#[derive(Debug, Clone, PartialEq)]
pub struct DiagonalJointState {
    n_machine: usize,
    probe_gap: f64,
    machine_gaps: Vec<f64>,
    populations: Vec<f64>,
    level_energies: Vec<f64>,
    log_partition: f64,
}

/// Gibbs product state of `probe ⊗ oracle`, limited to [`DEFAULT_QUBIT_LIMIT`] qubits.
pub fn build_joint_state(
    probe: &ThermalQubit,
    oracle: &ThermalMachineOracle,
) -> Result<DiagonalJointState> {
    build_joint_state_with_limit(probe, oracle, DEFAULT_QUBIT_LIMIT)
}

pub fn build_joint_state_with_limit(
    probe: &ThermalQubit,
    oracle: &ThermalMachineOracle,
    qubit_limit: usize,
) -> Result<DiagonalJointState> {
    let n = oracle.len();
    if n + 1 > qubit_limit {
        return Err(Error::TooLarge {
            what: "joint state",
            n: n + 1,
            limit: qubit_limit,
        });
    }
    let gaps = oracle.gaps().to_vec();
    let size = 1usize << (n + 1);
    let mut level_energies = Vec::with_capacity(size);
    let mut exponents = Vec::with_capacity(size);
    for index in 0..size {
        let probe_bit = index >> n & 1;
        let machine_energy: f64 = (0..n)
            .filter(|&i| index >> (n - 1 - i) & 1 == 1)
            .map(|i| gaps[i])
            .sum();
        let probe_energy = probe_bit as f64 * probe.gap();
        level_energies.push(probe_energy + machine_energy);
        exponents.push(-probe.beta() * probe_energy - oracle.beta_m() * machine_energy);
    }
    let log_partition = logsumexp(&exponents);
    let populations = exponents
        .iter()
        .map(|e| (e - log_partition).exp())
        .collect();
    Ok(DiagonalJointState {
        n_machine: n,
        probe_gap: probe.gap(),
        machine_gaps: gaps,
        populations,
        level_energies,
        log_partition,
    })
}

impl DiagonalJointState {
    pub fn n_machine(&self) -> usize {
        self.n_machine
    }

    /// Number of levels, `2^{N+1}`.
    pub fn len(&self) -> usize {
        self.populations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.populations.is_empty()
    }

    pub fn populations(&self) -> &[f64] {
        &self.populations
    }

    pub fn level_energies(&self) -> &[f64] {
        &self.level_energies
    }

    /// Log of the brute-force sum of Boltzmann weights at construction.
    pub fn log_partition(&self) -> f64 {
        self.log_partition
    }

    pub fn total_population(&self) -> f64 {
        self.populations.iter().sum()
    }

    /// Level index of `|probe_bit, machine⟩`.
    pub fn level_index(&self, probe_bit: bool, machine: &BitString) -> Result<usize> {
        if machine.len() != self.n_machine {
            return Err(Error::LengthMismatch {
                expected: self.n_machine,
                actual: machine.len(),
            });
        }
        Ok((probe_bit as usize) << self.n_machine | machine.to_index())
    }

    /// Probe bit and machine string of a level index, as one string with the probe first.
    pub fn level_bits(&self, index: usize) -> BitString {
        BitString::from_index(index, self.n_machine + 1)
    }

    fn check_index(&self, index: usize) -> Result<()> {
        if index < self.len() {
            Ok(())
        } else {
            Err(Error::IndexOutOfRange {
                index,
                len: self.len(),
            })
        }
    }

    /// Swaps the populations of two distinct levels in place.
    pub fn exchange_levels(&mut self, level_a: usize, level_b: usize) -> Result<()> {
        self.check_index(level_a)?;
        self.check_index(level_b)?;
        if level_a == level_b {
            return Err(Error::param("level_b", "must differ from level_a"));
        }
        self.populations.swap(level_a, level_b);
        Ok(())
    }

    pub fn apply_level_exchange(&self, level_a: usize, level_b: usize) -> Result<Self> {
        let mut next = self.clone();
        next.exchange_levels(level_a, level_b)?;
        Ok(next)
    }

    /// Kickback `V(X)`: exchanges `|0, X⟩` with `|1, X⊕1⟩`.
    pub fn apply_mask_exchange(&self, mask: &BitString) -> Result<Self> {
        let a = self.level_index(false, mask)?;
        let b = self.level_index(true, &mask.complement())?;
        self.apply_level_exchange(a, b)
    }

    /// Exchanges the probe with machine qubit `machine_index` by permuting levels.
    pub fn apply_swap_with_machine_qubit(&self, machine_index: usize) -> Result<Self> {
        if machine_index >= self.n_machine {
            return Err(Error::IndexOutOfRange {
                index: machine_index,
                len: self.n_machine,
            });
        }
        let probe_bit = 1usize << self.n_machine;
        let machine_bit = 1usize << (self.n_machine - 1 - machine_index);
        let mut next = self.clone();
        for index in 0..self.len() {
            let p = index & probe_bit != 0;
            let m = index & machine_bit != 0;
            if p && !m {
                let partner = index ^ probe_bit ^ machine_bit;
                next.populations.swap(index, partner);
            }
        }
        Ok(next)
    }

    fn marginal(&self, bit: usize) -> Result<BinaryDistribution> {
        let (mut ground, mut excited) = (0.0, 0.0);
        for (index, &p) in self.populations.iter().enumerate() {
            if index & bit == 0 {
                ground += p;
            } else {
                excited += p;
            }
        }
        BinaryDistribution::new(ground / (ground + excited))
    }

    pub fn probe_marginal(&self) -> Result<BinaryDistribution> {
        self.marginal(1 << self.n_machine)
    }

    /// Probe excited population summed directly over the upper half of the levels.
    pub fn probe_excited_population(&self) -> f64 {
        self.populations[self.len() / 2..].iter().sum()
    }

    pub fn machine_marginal(&self, machine_index: usize) -> Result<BinaryDistribution> {
        if machine_index >= self.n_machine {
            return Err(Error::IndexOutOfRange {
                index: machine_index,
                len: self.n_machine,
            });
        }
        self.marginal(1 << (self.n_machine - 1 - machine_index))
    }

    /// Mean probe energy `ω·P(probe excited)`.
    pub fn probe_energy(&self) -> f64 {
        self.probe_gap * self.probe_excited_population()
    }

    /// Mean machine energy.
    pub fn machine_energy(&self) -> f64 {
        self.populations
            .iter()
            .zip(&self.level_energies)
            .enumerate()
            .map(|(index, (p, e))| p * (e - self.probe_gap * (index >> self.n_machine & 1) as f64))
            .sum()
    }

    pub fn total_energy(&self) -> f64 {
        self.populations
            .iter()
            .zip(&self.level_energies)
            .map(|(p, e)| p * e)
            .sum()
    }

    pub fn machine_gaps(&self) -> &[f64] {
        &self.machine_gaps
    }

    /// Dumps `index,bitstring,energy,population`, bit strings with the probe bit first.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        #[derive(Serialize)]
        struct Row {
            index: usize,
            bitstring: String,
            energy: f64,
            population: f64,
        }
        let mut w = csv::Writer::from_writer(out);
        for (index, (&population, &energy)) in self
            .populations
            .iter()
            .zip(&self.level_energies)
            .enumerate()
        {
            w.serialize(Row {
                index,
                bitstring: self.level_bits(index).to_string(),
                energy,
                population,
            })
            .map_err(|e| Error::Io(e.to_string()))?;
        }
        w.flush()?;
        Ok(())
    }
}
