//! Reference implementations written independently of the library code.
#![allow(dead_code)]

use ptc_core::analog::{ConvWeights, Tensor3};

/// Small deterministic generator for test operands (SplitMix64).
pub struct Gen(u64);

impl Gen {
    pub fn new(seed: u64) -> Self {
        Gen(seed)
    }

    pub fn next_u64(&mut self) -> u64 {
        self.0 = self.0.wrapping_add(0x9e37_79b9_7f4a_7c15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^ (z >> 31)
    }

    /// Uniform in `lo..=hi`.
    pub fn int(&mut self, lo: i64, hi: i64) -> i64 {
        lo + (self.next_u64() % ((hi - lo + 1) as u64)) as i64
    }
}

/// Plain nested-loop convolution over integer operands.
pub fn direct_conv(
    x: &[Vec<Vec<i64>>],
    w: &[Vec<Vec<Vec<i64>>>],
    stride: usize,
    pad: usize,
) -> Vec<Vec<Vec<i64>>> {
    let c_in = x.len();
    let (h, wd) = (x[0].len(), x[0][0].len());
    let k = w[0][0].len();
    let ho = (h + 2 * pad - k) / stride + 1;
    let wo = (wd + 2 * pad - k) / stride + 1;
    let mut out = vec![vec![vec![0i64; wo]; ho]; w.len()];
    for (o, kern) in w.iter().enumerate() {
        for oy in 0..ho {
            for ox in 0..wo {
                let mut acc = 0i64;
                for c in 0..c_in {
                    for ky in 0..k {
                        for kx in 0..k {
                            let iy = (oy * stride + ky) as i64 - pad as i64;
                            let ix = (ox * stride + kx) as i64 - pad as i64;
                            if iy >= 0 && ix >= 0 && (iy as usize) < h && (ix as usize) < wd {
                                acc += x[c][iy as usize][ix as usize] * kern[c][ky][kx];
                            }
                        }
                    }
                }
                out[o][oy][ox] = acc;
            }
        }
    }
    out
}

pub fn to_tensor(x: &[Vec<Vec<i64>>]) -> Tensor3 {
    let (c, h, w) = (x.len(), x[0].len(), x[0][0].len());
    let data = x.iter().flatten().flatten().map(|&v| v as f64).collect();
    Tensor3::new(c, h, w, data).unwrap()
}

pub fn to_weights(w: &[Vec<Vec<Vec<i64>>>]) -> ConvWeights {
    let (co, ci, k) = (w.len(), w[0].len(), w[0][0].len());
    let data = w.iter().flatten().flatten().flatten().map(|&v| v as f64).collect();
    ConvWeights::new(co, ci, k, data).unwrap()
}

/// `y_j = Σ_i x_i·w_ij` in exact integer arithmetic.
pub fn int_mvm(x: &[i64], w: &[Vec<i64>]) -> Vec<i64> {
    let cols = w[0].len();
    (0..cols).map(|j| x.iter().zip(w).map(|(a, row)| a * row[j]).sum()).collect()
}

pub const F_PARETO: f64 = 342.1e12 / (2.0 * 144.0 * 256.0);

/// Baseline critical-path loss written out term by term from the shipped
/// catalog values.
pub fn baseline_il(w: u32) -> f64 {
    let stages = (w.div_ceil(8) as f64 - 1.0).max(0.0);
    1.5 + 5.0 * 0.1 + 0.14 + 3.0 + 0.02 * stages + 8.0 * 0.25 + 0.68 + 0.18 + 10.0 * (w as f64).log10()
}

pub fn laser_w(s: f64, il: f64, b: i32, er: f64, wpe: f64) -> f64 {
    10f64.powf((s + il) / 10.0) * 1e-3 * 2f64.powi(b) / wpe / (1.0 - 10f64.powf(-er / 10.0))
}
