use std::fmt;

use num_complex::Complex64;

use crate::error::{check_len, Result};

/// Frequency band used for a transmission.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Band {
    One,
    Two,
}

impl fmt::Display for Band {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Band::One => f.write_str("BAND 1"),
            Band::Two => f.write_str("BAND 2"),
        }
    }
}

/// Per-subcarrier complex channel estimate.
///
/// The band and coherence-slot tags are set by the protocol layer; vectors
/// produced by the lower-level channel helpers are untagged.
#[derive(Debug, Clone, PartialEq)]
pub struct CsiVector {
    values: Vec<Complex64>,
    band: Option<Band>,
    slot: Option<u64>,
}

impl CsiVector {
    pub fn new(values: Vec<Complex64>) -> Self {
        CsiVector { values, band: None, slot: None }
    }

    pub fn tagged(mut self, band: Band, slot: u64) -> Self {
        self.band = Some(band);
        self.slot = Some(slot);
        self
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn band(&self) -> Option<Band> {
        self.band
    }

    pub fn slot(&self) -> Option<u64> {
        self.slot
    }

    /// Values at the given subcarrier indices.
    pub fn select(&self, positions: &[usize]) -> Vec<Complex64> {
        positions.iter().map(|&k| self.values[k]).collect()
    }

    /// Elementwise product, keeping this vector's tags.
    pub fn hadamard(&self, other: &CsiVector) -> Result<CsiVector> {
        check_len(self.len(), other.len())?;
        Ok(CsiVector {
            values: self.values.iter().zip(&other.values).map(|(a, b)| a * b).collect(),
            band: self.band,
            slot: self.slot,
        })
    }
}

impl From<Vec<Complex64>> for CsiVector {
    fn from(values: Vec<Complex64>) -> Self {
        CsiVector::new(values)
    }
}

impl std::ops::Index<usize> for CsiVector {
    type Output = Complex64;

    fn index(&self, k: usize) -> &Complex64 {
        &self.values[k]
    }
}
