//! Big-endian bit strings: the leftmost character is bit 1 (`x_1`).

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct BitString(Vec<bool>);

impl BitString {
    pub fn new(bits: Vec<bool>) -> Self {
        BitString(bits)
    }

    pub fn zeros(len: usize) -> Self {
        BitString(vec![false; len])
    }

    pub fn ones(len: usize) -> Self {
        BitString(vec![true; len])
    }

    /// `width` low bits of `value`, most significant first.
    pub fn from_index(value: usize, width: usize) -> Self {
        BitString(
            (0..width)
                .map(|i| (value >> (width - 1 - i)) & 1 == 1)
                .collect(),
        )
    }

    /// Big-endian integer value.
    pub fn to_index(&self) -> usize {
        self.0.iter().fold(0, |acc, &b| (acc << 1) | b as usize)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, i: usize) -> Option<bool> {
        self.0.get(i).copied()
    }

    pub fn bits(&self) -> &[bool] {
        &self.0
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        self.0.iter().copied()
    }

    pub fn hamming_weight(&self) -> usize {
        self.0.iter().filter(|&&b| b).count()
    }

    /// Bitwise complement, `X ⊕ 1`.
    pub fn complement(&self) -> Self {
        BitString(self.0.iter().map(|b| !b).collect())
    }

    pub fn is_all_ones(&self) -> bool {
        self.0.iter().all(|&b| b)
    }

    /// `Σ_i bits_i · weights_i`.
    pub fn dot(&self, weights: &[f64]) -> Result<f64> {
        if weights.len() != self.len() {
            return Err(Error::LengthMismatch {
                expected: weights.len(),
                actual: self.len(),
            });
        }
        Ok(self
            .0
            .iter()
            .zip(weights)
            .map(|(&b, &w)| if b { w } else { 0.0 })
            .sum())
    }

    /// All strings of the given width in increasing index order.
    pub fn all(width: usize) -> impl Iterator<Item = BitString> {
        (0..1usize << width).map(move |v| BitString::from_index(v, width))
    }
}

impl From<Vec<bool>> for BitString {
    fn from(bits: Vec<bool>) -> Self {
        BitString(bits)
    }
}

impl FromStr for BitString {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        s.chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                _ => Err(Error::InvalidBits(s.to_string())),
            })
            .collect::<Result<Vec<_>>>()
            .map(BitString)
    }
}

impl fmt::Display for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.0 {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitString({self})")
    }
}

impl Serialize for BitString {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for BitString {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}
