use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// How signed weights map onto non-negative optical transmissions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SignedMode {
    /// `w = w⁺ − w⁻` on two columns, subtracted after readout.
    #[default]
    DifferentialPair,
    /// One column holding `w − lo`; the `lo·Σx` offset is added digitally.
    NonNegative,
}

/// Uniform `bits`-bit grid with levels at both endpoints of `[lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuantSpec {
    pub bits: u32,
    pub lo: f64,
    pub hi: f64,
    #[serde(default)]
    pub signed_mode: SignedMode,
}

impl QuantSpec {
    pub fn new(bits: u32, lo: f64, hi: f64) -> Result<Self> {
        let q = Self {
            bits,
            lo,
            hi,
            signed_mode: SignedMode::default(),
        };
        q.validate()?;
        Ok(q)
    }

    pub fn with_mode(mut self, mode: SignedMode) -> Self {
        self.signed_mode = mode;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(1..=24).contains(&self.bits) {
            return Err(Error::Precision(format!("{} bits outside 1..=24", self.bits)));
        }
        if !(self.lo.is_finite() && self.hi.is_finite() && self.hi > self.lo) {
            return Err(Error::Precision(format!("range [{}, {}] is empty", self.lo, self.hi)));
        }
        Ok(())
    }

    pub fn max_level(&self) -> u32 {
        (1u32 << self.bits) - 1
    }

    pub fn step(&self) -> f64 {
        (self.hi - self.lo) / f64::from(self.max_level())
    }

    pub fn dequantize(&self, level: u32) -> f64 {
        self.lo + f64::from(level.min(self.max_level())) * self.step()
    }

    /// Largest magnitude a differential pair must carry on either column.
    pub fn magnitude(&self) -> f64 {
        self.lo.abs().max(self.hi.abs())
    }

    /// Grid used for each column of a differential pair: `[0, magnitude]`.
    pub fn magnitude_spec(&self) -> Self {
        Self {
            bits: self.bits,
            lo: 0.0,
            hi: self.magnitude(),
            signed_mode: self.signed_mode,
        }
    }
}

/// Nearest level, ties away from zero, clamped to the range.
pub fn quantize(x: f64, q: &QuantSpec) -> (u32, f64) {
    let t = (x - q.lo) / q.step();
    let level = if t.is_nan() {
        0
    } else {
        t.round().clamp(0.0, f64::from(q.max_level())) as u32
    };
    (level, q.dequantize(level))
}

/// Signed level on the magnitude grid: `sign(x)·level(|x|)`.
pub fn quantize_signed(x: f64, q: &QuantSpec) -> (i32, f64) {
    let m = q.magnitude_spec();
    let (l, v) = quantize(x.abs(), &m);
    if x < 0.0 {
        (-(l as i32), -v)
    } else {
        (l as i32, v)
    }
}
