//! Quantized, noise-injected matrix-vector product with hierarchical
//! accumulation: optical sum over one wavelength bus, photocurrent sum over
//! the ports of one detector, then a digital sum of detector readouts.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::quant::{quantize, quantize_signed, QuantSpec, SignedMode};
use super::rng::{inject_noise, KeyedRng, Site};
use crate::catalog::PdSpec;
use crate::error::{Error, Result};
use crate::geometry::WAVELENGTHS_PER_GROUP;
use crate::power::PrecisionSpec;

/// Row-major `rows × cols`; computes `y = Mᵀ·x` with `x` of length `rows`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Matrix {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

impl Matrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::Dimension(format!(
                "{rows}x{cols} matrix needs {} values, got {}",
                rows * cols,
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: f64) {
        self.data[r * self.cols + c] = v;
    }

    /// Copy of the block `[r0, r0+nr) × [c0, c0+nc)`.
    pub fn block(&self, r0: usize, nr: usize, c0: usize, nc: usize) -> Self {
        let mut out = Self::zeros(nr, nc);
        for r in 0..nr {
            let src = (r0 + r) * self.cols + c0;
            out.data[r * nc..(r + 1) * nc].copy_from_slice(&self.data[src..src + nc]);
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    pub sigma_in: f64,
    pub sigma_w: f64,
    pub sigma_out: f64,
    pub seed: u64,
}

impl Default for NoiseSpec {
    fn default() -> Self {
        Self {
            sigma_in: 0.0031,
            sigma_w: 0.01,
            sigma_out: 0.01,
            seed: 0,
        }
    }
}

impl NoiseSpec {
    pub fn zero(seed: u64) -> Self {
        Self {
            sigma_in: 0.0,
            sigma_w: 0.0,
            sigma_out: 0.0,
            seed,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        for (n, s) in [
            ("sigma_in", self.sigma_in),
            ("sigma_w", self.sigma_w),
            ("sigma_out", self.sigma_out),
        ] {
            if !(s >= 0.0 && s.is_finite()) {
                return Err(Error::field(n, "must be finite and >= 0"));
            }
        }
        Ok(())
    }
}

/// Fan-in at each summation level.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AccumulationTree {
    /// Rows summed optically on one bus.
    pub group: usize,
    /// Buses summed on one detector.
    pub pd_ports: usize,
}

impl Default for AccumulationTree {
    fn default() -> Self {
        Self {
            group: WAVELENGTHS_PER_GROUP as usize,
            pd_ports: 16,
        }
    }
}

impl AccumulationTree {
    pub fn for_detector(pd: &PdSpec) -> Self {
        Self {
            group: WAVELENGTHS_PER_GROUP as usize,
            pd_ports: pd.max_ports as usize,
        }
    }

    pub fn validate(&self, pd: Option<&PdSpec>) -> Result<()> {
        if self.group == 0 || self.pd_ports == 0 {
            return Err(Error::field("accumulation_tree", "fan-ins must be positive"));
        }
        if let Some(pd) = pd {
            if self.pd_ports > pd.max_ports as usize {
                return Err(Error::field(
                    "accumulation_tree.pd_ports",
                    format!("{} exceeds detector limit {}", self.pd_ports, pd.max_ports),
                ));
            }
        }
        Ok(())
    }

    /// Rows landing on one detector.
    pub fn rows_per_pd(&self) -> usize {
        self.group * self.pd_ports
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Readout {
    /// Detector output passed through unquantized.
    Ideal,
    /// `bits`-bit ADC on `[0, full_scale]` per detector. Without an explicit
    /// full scale, the largest value the detector can see is used.
    Adc { bits: u32, full_scale: Option<f64> },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MvmConfig {
    pub x_quant: QuantSpec,
    pub w_quant: QuantSpec,
    pub noise: NoiseSpec,
    pub tree: AccumulationTree,
    pub readout: Readout,
}

impl MvmConfig {
    /// Inputs on `[0, x_hi]`, weights on `[-w_max, w_max]`, ADC at `b_out`.
    pub fn from_precision(p: &PrecisionSpec, x_hi: f64, w_max: f64, mode: SignedMode, noise: NoiseSpec) -> Result<Self> {
        p.validate()?;
        Ok(Self {
            x_quant: QuantSpec::new(p.b_in, 0.0, x_hi)?,
            w_quant: QuantSpec::new(p.b_w, -w_max, w_max)?.with_mode(mode),
            noise,
            tree: AccumulationTree::default(),
            readout: Readout::Adc {
                bits: p.b_out,
                full_scale: None,
            },
        })
    }

    pub fn validate(&self) -> Result<()> {
        self.x_quant.validate()?;
        self.w_quant.validate()?;
        if self.x_quant.lo < 0.0 {
            return Err(Error::Precision("optical inputs are intensities; x range must start at >= 0".into()));
        }
        self.noise.validate()?;
        self.tree.validate(None)?;
        if let Readout::Adc { bits, full_scale } = self.readout {
            if !(1..=24).contains(&bits) {
                return Err(Error::Precision(format!("ADC bits {bits} outside 1..=24")));
            }
            if let Some(fs) = full_scale {
                if !(fs > 0.0 && fs.is_finite()) {
                    return Err(Error::Precision("ADC full scale must be positive".into()));
                }
            }
        }
        Ok(())
    }
}

/// Where one MVM sits in a larger computation; keys its noise draws.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct MvmKey {
    pub layer: u32,
    pub tile: u32,
    pub position: u32,
}

const POSITION_SHIFT: u32 = 24;

impl MvmKey {
    fn positioned(&self, cell: u64) -> u64 {
        (u64::from(self.position) << POSITION_SHIFT) | cell
    }
}

/// Quantized weights as non-negative transmissions on one or two columns.
struct Encoded {
    /// Per cell, per polarity (`[plus, minus]`; minus unused in offset mode).
    t: Vec<[f64; 2]>,
    polarities: usize,
    offset: f64,
    t_max: f64,
}

fn encode(w: &Matrix, q: &QuantSpec) -> Encoded {
    match q.signed_mode {
        SignedMode::DifferentialPair => {
            let t = w
                .data
                .iter()
                .map(|&v| {
                    let (_, s) = quantize_signed(v, q);
                    if s >= 0.0 {
                        [s, 0.0]
                    } else {
                        [0.0, -s]
                    }
                })
                .collect();
            Encoded {
                t,
                polarities: 2,
                offset: 0.0,
                t_max: q.magnitude(),
            }
        }
        SignedMode::NonNegative => {
            let t = w
                .data
                .iter()
                .map(|&v| {
                    let (l, _) = quantize(v, q);
                    [f64::from(l) * q.step(), 0.0]
                })
                .collect();
            Encoded {
                t,
                polarities: 1,
                offset: q.lo,
                t_max: q.hi - q.lo,
            }
        }
    }
}

/// Quantized (noise-free) inputs, as the DACs see them.
pub fn quantize_inputs(x: &[f64], q: &QuantSpec) -> Vec<f64> {
    x.iter().map(|&v| quantize(v, q).1).collect()
}

/// `y = Wᵀ·x` through the quantized, noisy analog chain. Columns are
/// evaluated in parallel; results do not depend on the thread count.
pub fn noisy_mvm(x: &[f64], w: &Matrix, cfg: &MvmConfig, key: MvmKey) -> Result<Vec<f64>> {
    mvm_impl(x, w, cfg, key, true)
}

/// Single-threaded evaluation of [`noisy_mvm`].
pub fn noisy_mvm_serial(x: &[f64], w: &Matrix, cfg: &MvmConfig, key: MvmKey) -> Result<Vec<f64>> {
    mvm_impl(x, w, cfg, key, false)
}

fn mvm_impl(x: &[f64], w: &Matrix, cfg: &MvmConfig, key: MvmKey, parallel: bool) -> Result<Vec<f64>> {
    cfg.validate()?;
    if x.len() != w.rows {
        return Err(Error::Dimension(format!(
            "input length {} does not match {} weight rows",
            x.len(),
            w.rows
        )));
    }
    let rng = KeyedRng::new(cfg.noise.seed);
    let n = cfg.noise;

    let xq = quantize_inputs(x, &cfg.x_quant);
    let x_eq: Vec<f64> = xq
        .iter()
        .enumerate()
        .map(|(i, &v)| {
            if n.sigma_in == 0.0 {
                return v;
            }
            let mut r = rng.stream(key.layer, key.tile, Site::Input, key.positioned(i as u64));
            inject_noise(v, n.sigma_in, &mut r)
        })
        .collect();
    let enc = encode(w, &cfg.w_quant);
    let offset_term = if enc.offset != 0.0 {
        enc.offset * xq.iter().sum::<f64>()
    } else {
        0.0
    };

    let per_pd = cfg.tree.rows_per_pd();
    let n_pd = w.rows.div_ceil(per_pd).max(1);
    let x_max = cfg.x_quant.hi;

    let column = |j: usize| -> f64 {
        let mut y = [0.0f64; 2];
        for (pol, acc) in y.iter_mut().enumerate().take(enc.polarities) {
            for pd in 0..n_pd {
                let r0 = pd * per_pd;
                let r1 = (r0 + per_pd).min(w.rows);
                let mut s_pd = 0.0;
                let mut r = r0;
                while r < r1 {
                    let bus_end = (r + cfg.tree.group).min(r1);
                    let mut s_bus = 0.0;
                    for i in r..bus_end {
                        let cell = i * w.cols + j;
                        let t = enc.t[cell][pol];
                        let t_eq = if n.sigma_w == 0.0 || t == 0.0 {
                            t
                        } else {
                            let mut g = rng.stream(key.layer, key.tile, Site::Weight, (cell as u64) << 1 | pol as u64);
                            inject_noise(t, n.sigma_w, &mut g)
                        };
                        s_bus += x_eq[i] * t_eq;
                    }
                    s_pd += s_bus;
                    r = bus_end;
                }
                if n.sigma_out != 0.0 {
                    let cell = ((pd * w.cols + j) as u64) << 1 | pol as u64;
                    let mut g = rng.stream(key.layer, key.tile, Site::Output, key.positioned(cell));
                    s_pd = inject_noise(s_pd, n.sigma_out, &mut g);
                }
                *acc += match cfg.readout {
                    Readout::Ideal => s_pd,
                    Readout::Adc { bits, full_scale } => {
                        let fs = full_scale.unwrap_or((r1 - r0) as f64 * x_max * enc.t_max);
                        let adc = QuantSpec {
                            bits,
                            lo: 0.0,
                            hi: fs,
                            signed_mode: SignedMode::NonNegative,
                        };
                        quantize(s_pd, &adc).1
                    }
                };
            }
        }
        y[0] - y[1] + offset_term
    };

    let out = if parallel {
        (0..w.cols).into_par_iter().map(column).collect()
    } else {
        (0..w.cols).map(column).collect()
    };
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn int_cfg(mode: SignedMode) -> MvmConfig {
        MvmConfig {
            x_quant: QuantSpec::new(6, 0.0, 63.0).unwrap(),
            w_quant: QuantSpec::new(7, -127.0, 127.0).unwrap().with_mode(mode),
            noise: NoiseSpec::zero(0),
            tree: AccumulationTree::default(),
            readout: Readout::Ideal,
        }
    }

    #[test]
    fn identity_block_one_hot() {
        let mut m = Matrix::zeros(9, 9);
        for i in 0..9 {
            m.set(i, i, 1.0);
        }
        let mut cfg = int_cfg(SignedMode::DifferentialPair);
        cfg.x_quant = QuantSpec::new(6, 0.0, 1.0).unwrap();
        cfg.w_quant = QuantSpec::new(7, -1.0, 1.0).unwrap();
        let mut x = vec![0.0; 9];
        x[4] = 1.0;
        let y = noisy_mvm(&x, &m, &cfg, MvmKey::default()).unwrap();
        let mut want = vec![0.0; 9];
        want[4] = 1.0;
        assert_eq!(y, want);
    }

    #[test]
    fn dimension_mismatch() {
        let m = Matrix::zeros(4, 2);
        assert!(matches!(
            noisy_mvm(&[1.0; 3], &m, &int_cfg(SignedMode::DifferentialPair), MvmKey::default()),
            Err(Error::Dimension(_))
        ));
        assert!(Matrix::new(2, 2, vec![1.0; 3]).is_err());
    }

    #[test]
    fn nonnegative_offset_mode_exact() {
        // Offset grid on [-127, 128] keeps integer values on an integer grid.
        let mut cfg = int_cfg(SignedMode::NonNegative);
        cfg.w_quant = QuantSpec::new(8, -127.0, 128.0).unwrap().with_mode(SignedMode::NonNegative);
        let m = Matrix::new(3, 2, vec![-5.0, 7.0, 100.0, -127.0, 0.0, 1.0]).unwrap();
        let y = noisy_mvm(&[1.0, 2.0, 3.0], &m, &cfg, MvmKey::default()).unwrap();
        assert_eq!(y, vec![-5.0 + 200.0, 7.0 - 254.0 + 3.0]);
    }

    #[test]
    fn adc_clamps_and_quantizes() {
        let mut cfg = int_cfg(SignedMode::DifferentialPair);
        cfg.readout = Readout::Adc {
            bits: 2,
            full_scale: Some(3.0),
        };
        let m = Matrix::new(1, 1, vec![1.0]).unwrap();
        let y = noisy_mvm(&[10.0], &m, &cfg, MvmKey::default()).unwrap();
        assert_eq!(y, vec![3.0]);
    }

    #[test]
    fn pd_port_limit() {
        let pd = crate::catalog::DeviceCatalog::shipped().pd;
        let t = AccumulationTree { group: 9, pd_ports: 17 };
        assert!(t.validate(Some(&pd)).is_err());
        assert!(AccumulationTree::for_detector(&pd).validate(Some(&pd)).is_ok());
    }
}
