//! A two-layer oriented-bar classifier with fixed, hand-set kernels, and a
//! synthetic dataset to run it on. Used to exercise the analog chain end to
//! end, not to reproduce any benchmark accuracy.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::conv::{conv2d_analog, relu, ConvParams, ConvWeights, Tensor3};
use super::mvm::{AccumulationTree, MvmConfig, NoiseSpec, Readout};
use super::quant::{QuantSpec, SignedMode};
use crate::error::Result;
use crate::geometry::CoreGeometry;
use crate::power::PrecisionSpec;

pub const IMAGE_SIZE: usize = 8;
pub const CLASSES: usize = 4;
const DATASET_SEED: u64 = 0x5eed_ba55;

#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub image: Tensor3,
    pub label: usize,
}

/// `per_class` images of each bar orientation: horizontal, vertical,
/// diagonal, anti-diagonal. Dim random background, bright bar.
pub fn oriented_bars(per_class: usize) -> Vec<Sample> {
    let mut rng = ChaCha8Rng::seed_from_u64(DATASET_SEED);
    let n = IMAGE_SIZE;
    let mut out = Vec::with_capacity(per_class * CLASSES);
    for i in 0..per_class * CLASSES {
        let label = i % CLASSES;
        let mut img = Tensor3::zeros(1, n, n);
        for v in &mut img.data {
            *v = rng.random_range(0.0..0.25);
        }
        let len = rng.random_range(5..=n);
        let a = rng.random_range(1..n - 1);
        let start = rng.random_range(0..=n - len);
        for t in start..start + len {
            let (y, x) = match label {
                0 => (a, t),
                1 => (t, a),
                2 => (t, t),
                _ => (t, n - 1 - t),
            };
            img.set(0, y, x, rng.random_range(0.75..1.0));
        }
        out.push(Sample { image: img, label });
    }
    out
}

fn bar_kernels() -> ConvWeights {
    let h = [-0.5, -0.5, -0.5, 1.0, 1.0, 1.0, -0.5, -0.5, -0.5];
    let v = [-0.5, 1.0, -0.5, -0.5, 1.0, -0.5, -0.5, 1.0, -0.5];
    let d = [1.0, -0.5, -0.5, -0.5, 1.0, -0.5, -0.5, -0.5, 1.0];
    let a = [-0.5, -0.5, 1.0, -0.5, 1.0, -0.5, 1.0, -0.5, -0.5];
    let data = [h, v, d, a].concat();
    ConvWeights::new(4, 1, 3, data).expect("static shape")
}

// Lateral inhibition between orientation channels.
fn mixing() -> ConvWeights {
    let mut data = vec![-0.25; 16];
    for i in 0..4 {
        data[i * 4 + i] = 1.0;
    }
    ConvWeights::new(4, 4, 1, data).expect("static shape")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayerStats {
    pub name: String,
    pub mean: f64,
    pub std: f64,
    pub min: f64,
    pub max: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationReport {
    pub model: String,
    pub samples: usize,
    pub accuracy: f64,
    pub noise: NoiseSpec,
    pub precision: PrecisionSpec,
    pub signed_mode: SignedMode,
    pub layers: Vec<LayerStats>,
}

fn stats(name: &str, values: &[f64]) -> LayerStats {
    let n = values.len().max(1) as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    LayerStats {
        name: name.to_string(),
        mean,
        std: var.sqrt(),
        min: values.iter().copied().fold(f64::INFINITY, f64::min),
        max: values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
    }
}

#[derive(Debug, Clone, Copy)]
pub struct TinyCnnOptions {
    pub per_class: usize,
    pub precision: PrecisionSpec,
    pub signed_mode: SignedMode,
    pub geometry: CoreGeometry,
}

impl Default for TinyCnnOptions {
    fn default() -> Self {
        Self {
            per_class: 16,
            precision: PrecisionSpec::default(),
            signed_mode: SignedMode::DifferentialPair,
            geometry: CoreGeometry { rows: 144, cols: 256 },
        }
    }
}

fn layer_cfg(p: &PrecisionSpec, x_hi: f64, mode: SignedMode, noise: NoiseSpec) -> Result<MvmConfig> {
    Ok(MvmConfig {
        x_quant: QuantSpec::new(p.b_in, 0.0, x_hi)?,
        w_quant: QuantSpec::new(p.b_w, -1.0, 1.0)?.with_mode(mode),
        noise,
        tree: AccumulationTree::default(),
        readout: Readout::Adc {
            bits: p.b_out,
            full_scale: None,
        },
    })
}

/// Classifies the synthetic dataset through the analog engine.
pub fn simulate_tinycnn(noise: &NoiseSpec, opts: &TinyCnnOptions) -> Result<SimulationReport> {
    noise.validate()?;
    let data = oriented_bars(opts.per_class);
    let k1 = bar_kernels();
    let k2 = mixing();
    let c1 = layer_cfg(&opts.precision, 1.0, opts.signed_mode, *noise)?;
    let c2 = layer_cfg(&opts.precision, 3.0, opts.signed_mode, *noise)?;
    let same = ConvParams { stride: 1, pad: 1 };

    let mut a1 = Vec::new();
    let mut a2 = Vec::new();
    let mut correct = 0usize;
    for (idx, s) in data.iter().enumerate() {
        // distinct layer ids per sample keep noise draws independent
        let base = (idx as u32) * 2;
        let mut h = conv2d_analog(&s.image, &k1, same, &opts.geometry, &c1, base)?;
        relu(&mut h);
        a1.extend_from_slice(&h.data);
        let mut o = conv2d_analog(&h, &k2, ConvParams::default(), &opts.geometry, &c2, base + 1)?;
        relu(&mut o);
        a2.extend_from_slice(&o.data);
        let plane = o.h * o.w;
        let scores: Vec<f64> = (0..o.c).map(|c| o.data[c * plane..(c + 1) * plane].iter().sum()).collect();
        let pred = scores
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .map(|(i, _)| i)
            .unwrap_or(0);
        if pred == s.label {
            correct += 1;
        }
    }
    Ok(SimulationReport {
        model: "tinycnn".into(),
        samples: data.len(),
        accuracy: correct as f64 / data.len() as f64,
        noise: *noise,
        precision: opts.precision,
        signed_mode: opts.signed_mode,
        layers: vec![stats("bars3x3", &a1), stats("mix1x1", &a2)],
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dataset_is_balanced_and_fixed() {
        let a = oriented_bars(5);
        assert_eq!(a.len(), 20);
        for c in 0..CLASSES {
            assert_eq!(a.iter().filter(|s| s.label == c).count(), 5);
        }
        assert_eq!(a, oriented_bars(5));
    }

    #[test]
    fn classifies_clean_and_noisy() {
        let opts = TinyCnnOptions {
            per_class: 8,
            ..Default::default()
        };
        let clean = simulate_tinycnn(&NoiseSpec::zero(0), &opts).unwrap();
        assert!(clean.accuracy >= 0.9, "{}", clean.accuracy);
        let noisy = simulate_tinycnn(&NoiseSpec::default().with_seed(3), &opts).unwrap();
        assert!(noisy.accuracy >= 0.85, "{}", noisy.accuracy);
        let again = simulate_tinycnn(&NoiseSpec::default().with_seed(3), &opts).unwrap();
        assert_eq!(noisy, again);
    }
}
