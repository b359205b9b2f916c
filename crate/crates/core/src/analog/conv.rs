//! Convolution on the analog engine via im2col lowering and core-sized tiles.

use serde::{Deserialize, Serialize};

use super::mvm::{noisy_mvm_serial, Matrix, MvmConfig, MvmKey};
use crate::error::{Error, Result};
use crate::geometry::CoreGeometry;

/// Channel-major `c × h × w` activations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tensor3 {
    pub c: usize,
    pub h: usize,
    pub w: usize,
    pub data: Vec<f64>,
}

impl Tensor3 {
    pub fn new(c: usize, h: usize, w: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != c * h * w {
            return Err(Error::Dimension(format!("{c}x{h}x{w} tensor needs {} values", c * h * w)));
        }
        Ok(Self { c, h, w, data })
    }

    pub fn zeros(c: usize, h: usize, w: usize) -> Self {
        Self {
            c,
            h,
            w,
            data: vec![0.0; c * h * w],
        }
    }

    #[inline]
    pub fn get(&self, c: usize, y: usize, x: usize) -> f64 {
        self.data[(c * self.h + y) * self.w + x]
    }

    #[inline]
    pub fn set(&mut self, c: usize, y: usize, x: usize, v: f64) {
        self.data[(c * self.h + y) * self.w + x] = v;
    }
}

/// `c_out × c_in × k × k` kernel.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvWeights {
    pub c_out: usize,
    pub c_in: usize,
    pub k: usize,
    pub data: Vec<f64>,
}

impl ConvWeights {
    pub fn new(c_out: usize, c_in: usize, k: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != c_out * c_in * k * k {
            return Err(Error::Dimension(format!("{c_out}x{c_in}x{k}x{k} kernel size mismatch")));
        }
        Ok(Self { c_out, c_in, k, data })
    }

    #[inline]
    pub fn get(&self, o: usize, i: usize, ky: usize, kx: usize) -> f64 {
        self.data[((o * self.c_in + i) * self.k + ky) * self.k + kx]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConvParams {
    pub stride: usize,
    pub pad: usize,
}

impl Default for ConvParams {
    fn default() -> Self {
        Self { stride: 1, pad: 0 }
    }
}

pub fn output_size(input: usize, k: usize, p: ConvParams) -> Result<usize> {
    if p.stride == 0 {
        return Err(Error::Dimension("stride must be positive".into()));
    }
    let span = input + 2 * p.pad;
    if span < k {
        return Err(Error::Dimension(format!("kernel {k} larger than padded input {span}")));
    }
    Ok((span - k) / p.stride + 1)
}

/// One lowered row per output position: `k²·c_in` values ordered by
/// channel, then kernel row, then kernel column, so each channel's taps
/// stay contiguous (one wavelength group for `k = 3`).
pub fn im2col(input: &Tensor3, k: usize, p: ConvParams) -> Result<Matrix> {
    let ho = output_size(input.h, k, p)?;
    let wo = output_size(input.w, k, p)?;
    let width = k * k * input.c;
    let mut m = Matrix::zeros(ho * wo, width);
    for oy in 0..ho {
        for ox in 0..wo {
            let row = oy * wo + ox;
            for c in 0..input.c {
                for ky in 0..k {
                    for kx in 0..k {
                        let iy = (oy * p.stride + ky) as isize - p.pad as isize;
                        let ix = (ox * p.stride + kx) as isize - p.pad as isize;
                        let v = if iy < 0 || ix < 0 || iy >= input.h as isize || ix >= input.w as isize {
                            0.0
                        } else {
                            input.get(c, iy as usize, ix as usize)
                        };
                        m.set(row, (c * k + ky) * k + kx, v);
                    }
                }
            }
        }
    }
    Ok(m)
}

/// Kernel as a `k²·c_in × c_out` weight matrix in [`im2col`] row order.
pub fn lower_weights(w: &ConvWeights) -> Matrix {
    let rows = w.k * w.k * w.c_in;
    let mut m = Matrix::zeros(rows, w.c_out);
    for o in 0..w.c_out {
        for i in 0..w.c_in {
            for ky in 0..w.k {
                for kx in 0..w.k {
                    m.set((i * w.k + ky) * w.k + kx, o, w.get(o, i, ky, kx));
                }
            }
        }
    }
    m
}

/// Convolution executed tile by tile on a `geom`-sized core. Row tiles are
/// accumulated digitally. Noise draws are keyed by `(layer, tile, position)`.
pub fn conv2d_analog(
    input: &Tensor3,
    weights: &ConvWeights,
    p: ConvParams,
    geom: &CoreGeometry,
    cfg: &MvmConfig,
    layer: u32,
) -> Result<Tensor3> {
    if weights.c_in != input.c {
        return Err(Error::Dimension(format!(
            "kernel expects {} input channels, tensor has {}",
            weights.c_in, input.c
        )));
    }
    geom.validate()?;
    let ho = output_size(input.h, weights.k, p)?;
    let wo = output_size(input.w, weights.k, p)?;
    let lowered = im2col(input, weights.k, p)?;
    let wm = lower_weights(weights);
    let (th, tw) = (geom.rows as usize, geom.cols as usize);
    let tiles_col = wm.cols.div_ceil(tw);

    let mut out = Tensor3::zeros(weights.c_out, ho, wo);
    for (tr, r0) in (0..wm.rows).step_by(th).enumerate() {
        let nr = th.min(wm.rows - r0);
        for (tc, c0) in (0..wm.cols).step_by(tw).enumerate() {
            let nc = tw.min(wm.cols - c0);
            let block = wm.block(r0, nr, c0, nc);
            let tile = (tr * tiles_col + tc) as u32;
            for pos in 0..ho * wo {
                let x = &lowered.data[pos * lowered.cols + r0..pos * lowered.cols + r0 + nr];
                let key = MvmKey {
                    layer,
                    tile,
                    position: pos as u32,
                };
                let y = noisy_mvm_serial(x, &block, cfg, key)?;
                for (j, v) in y.into_iter().enumerate() {
                    out.data[(c0 + j) * ho * wo + pos] += v;
                }
            }
        }
    }
    Ok(out)
}

pub fn relu(t: &mut Tensor3) {
    for v in &mut t.data {
        *v = v.max(0.0);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn im2col_layout() {
        let t = Tensor3::new(2, 3, 3, (0..18).map(f64::from).collect()).unwrap();
        let m = im2col(&t, 3, ConvParams::default()).unwrap();
        assert_eq!((m.rows, m.cols), (1, 18));
        assert_eq!(m.data, (0..18).map(f64::from).collect::<Vec<_>>());
        let m = im2col(&t, 1, ConvParams { stride: 2, pad: 0 }).unwrap();
        assert_eq!((m.rows, m.cols), (4, 2));
        assert_eq!(&m.data[..2], &[0.0, 9.0]);
    }

    #[test]
    fn padding_and_sizes() {
        assert_eq!(output_size(6, 3, ConvParams { stride: 1, pad: 1 }).unwrap(), 6);
        assert_eq!(output_size(6, 3, ConvParams { stride: 2, pad: 0 }).unwrap(), 2);
        assert!(output_size(2, 3, ConvParams::default()).is_err());
    }
}
