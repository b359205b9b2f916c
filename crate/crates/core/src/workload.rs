//! Convolution lowering, weight-stationary tile scheduling, and the
//! latency / throughput / energy roll-up.
//!
//! A `k×k` convolution with `c_in` input channels lowers to `k²·c_in` MVM
//! rows and `c_out` columns, evaluated once per output position. Row and
//! column overflow is tiled; partial sums across row tiles add digitally.
//! Each tile load reprograms the whole core in one PCM cycle, then every
//! output position streams through at the modulator clock.

use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::catalog::{DeviceCatalog, PcmSpec};
use crate::error::{Error, Result};
use crate::geometry::{CoreGeometry, WAVELENGTHS_PER_GROUP};
use crate::power::{cell_update_energy, PowerReport};

pub const RESNET50_JSON: &str = include_str!("../data/resnet50.json");

pub const DEFAULT_CLOCK_HZ: f64 = 1e9;
/// Peak rate of the nominal 144x256 design point, TOPS.
pub const PARETO_TOPS: f64 = 342.1;
/// Clock at which 144x256 reaches [`PARETO_TOPS`].
pub const F_PARETO_HZ: f64 = PARETO_TOPS * 1e12 / (2.0 * 144.0 * 256.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LayerKind {
    #[default]
    Conv,
    /// Fully connected; runs off-core.
    Fc,
    /// Any other op kept on the host (stem convolution, pooling).
    Host,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConvLayerSpec {
    pub name: String,
    #[serde(default)]
    pub kind: LayerKind,
    pub c_in: u32,
    pub c_out: u32,
    pub kernel: u32,
    pub h_out: u32,
    pub w_out: u32,
    #[serde(default = "one")]
    pub stride: u32,
}

fn one() -> u32 {
    1
}

impl ConvLayerSpec {
    pub fn conv(name: &str, c_in: u32, c_out: u32, kernel: u32, h_out: u32, w_out: u32) -> Self {
        Self {
            name: name.to_string(),
            kind: LayerKind::Conv,
            c_in,
            c_out,
            kernel,
            h_out,
            w_out,
            stride: 1,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |reason: &str| Error::Layer {
            name: self.name.clone(),
            reason: reason.to_string(),
        };
        if self.c_in == 0 || self.c_out == 0 || self.h_out == 0 || self.w_out == 0 || self.stride == 0 || self.kernel == 0 {
            return Err(bad("all dimensions must be positive"));
        }
        Ok(())
    }

    /// Multiply-accumulates per inference.
    pub fn macs(&self) -> u64 {
        u64::from(self.kernel).pow(2) * u64::from(self.c_in) * u64::from(self.c_out) * self.positions()
    }

    pub fn positions(&self) -> u64 {
        u64::from(self.h_out) * u64::from(self.w_out)
    }
}

/// How 1x1 layers occupy the wavelength groups.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MappingMode {
    /// Nine input channels share a group, all rows usable.
    #[default]
    Packed,
    /// One input channel per group, one tap of nine used.
    OneTapPerGroup,
}

impl FromStr for MappingMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "packed" => Ok(Self::Packed),
            "one_tap" | "one_tap_per_group" | "onetap" => Ok(Self::OneTapPerGroup),
            _ => Err(Error::Usage(format!("unknown mapping mode `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LoweredDims {
    pub rows: u64,
    pub cols: u64,
    pub positions: u64,
    /// Core rows this layer can actually fill per tile.
    pub usable_rows: u32,
    pub tiles_row: u64,
    pub tiles_col: u64,
    pub utilization: f64,
}

pub fn lower_conv(layer: &ConvLayerSpec, geom: &CoreGeometry) -> Result<LoweredDims> {
    lower_conv_with(layer, geom, MappingMode::Packed)
}

pub fn lower_conv_with(layer: &ConvLayerSpec, geom: &CoreGeometry, mode: MappingMode) -> Result<LoweredDims> {
    layer.validate()?;
    geom.validate()?;
    if !matches!(layer.kernel, 1 | 3) {
        return Err(Error::UnsupportedKernel(layer.kernel));
    }
    let rows = u64::from(layer.kernel).pow(2) * u64::from(layer.c_in);
    let cols = u64::from(layer.c_out);
    let usable_rows = match (layer.kernel, mode) {
        (1, MappingMode::OneTapPerGroup) => geom.groups(),
        _ => geom.rows,
    };
    let tiles_row = rows.div_ceil(u64::from(usable_rows));
    let tiles_col = cols.div_ceil(u64::from(geom.cols));
    let utilization = (rows * cols) as f64 / (tiles_row * tiles_col * geom.cells()) as f64;
    Ok(LoweredDims {
        rows,
        cols,
        positions: layer.positions(),
        usable_rows,
        tiles_row,
        tiles_col,
        utilization,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayerSchedule {
    pub name: String,
    pub kind: LayerKind,
    /// Charged zero photonic time.
    pub offloaded: bool,
    pub lowered: Option<LoweredDims>,
    pub tile_loads: u64,
    pub stream_cycles: u64,
    pub programmed_cells: u64,
    pub macs: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TileSchedule {
    pub geometry: CoreGeometry,
    pub mapping: MappingMode,
    pub tile_load_ns: f64,
    pub layers: Vec<LayerSchedule>,
}

impl TileSchedule {
    pub fn tile_loads(&self) -> u64 {
        self.layers.iter().map(|l| l.tile_loads).sum()
    }

    pub fn stream_cycles(&self) -> u64 {
        self.layers.iter().map(|l| l.stream_cycles).sum()
    }

    pub fn programmed_cells(&self) -> u64 {
        self.layers.iter().map(|l| l.programmed_cells).sum()
    }

    pub fn offloaded(&self) -> impl Iterator<Item = &LayerSchedule> {
        self.layers.iter().filter(|l| l.offloaded)
    }

    /// Rejects any schedule that would reprogram a core cell before the
    /// previous PCM cycle has completed. Consecutive loads of the same
    /// physical tile are spaced by one load plus the previous stream.
    pub fn check_refresh(&self, pcm: &PcmSpec, f: f64) -> Result<()> {
        let cycle = pcm.cycle_ns();
        if self.tile_load_ns < cycle {
            return Err(Error::RefreshViolation {
                cell: 0,
                interval_ns: self.tile_load_ns,
                cycle_ns: cycle,
            });
        }
        for l in self.layers.iter().filter(|l| !l.offloaded) {
            let Some(d) = l.lowered else { continue };
            let interval = self.tile_load_ns + d.positions as f64 * 1e9 / f;
            if interval < cycle {
                return Err(Error::RefreshViolation {
                    cell: 0,
                    interval_ns: interval,
                    cycle_ns: cycle,
                });
            }
        }
        Ok(())
    }
}

pub fn schedule(workload: &[ConvLayerSpec], geom: &CoreGeometry, pcm: &PcmSpec) -> Result<TileSchedule> {
    schedule_with(workload, geom, pcm, MappingMode::Packed)
}

pub fn schedule_with(
    workload: &[ConvLayerSpec],
    geom: &CoreGeometry,
    pcm: &PcmSpec,
    mode: MappingMode,
) -> Result<TileSchedule> {
    if workload.is_empty() {
        return Err(Error::EmptyWorkload);
    }
    let mut layers = Vec::with_capacity(workload.len());
    for layer in workload {
        layer.validate()?;
        let entry = if layer.kind == LayerKind::Conv {
            let d = lower_conv_with(layer, geom, mode)?;
            let tiles = d.tiles_row * d.tiles_col;
            LayerSchedule {
                name: layer.name.clone(),
                kind: layer.kind,
                offloaded: false,
                lowered: Some(d),
                tile_loads: tiles,
                stream_cycles: tiles * d.positions,
                programmed_cells: d.rows * d.cols,
                macs: layer.macs(),
            }
        } else {
            LayerSchedule {
                name: layer.name.clone(),
                kind: layer.kind,
                offloaded: true,
                lowered: None,
                tile_loads: 0,
                stream_cycles: 0,
                programmed_cells: 0,
                macs: layer.macs(),
            }
        };
        layers.push(entry);
    }
    Ok(TileSchedule {
        geometry: *geom,
        mapping: mode,
        tile_load_ns: pcm.cycle_ns(),
        layers,
    })
}

/// `2·H·W·f`, in TOPS.
pub fn peak_tops(geom: &CoreGeometry, f: f64) -> Result<f64> {
    if !(f > 0.0 && f.is_finite()) {
        return Err(Error::Frequency(f));
    }
    Ok(2.0 * geom.cells() as f64 * f / 1e12)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerfReport {
    pub frequency_hz: f64,
    pub latency_s: f64,
    pub weight_load_s: f64,
    pub stream_s: f64,
    pub fps: f64,
    pub peak_tops: f64,
    pub tops_per_w: f64,
    pub fps_per_w: f64,
    pub total_power_w: f64,
    pub energy_steady_j: f64,
    pub energy_programming_j: f64,
    pub energy_total_j: f64,
    pub tile_loads: u64,
    pub programmed_cells: u64,
    pub offloaded_layers: Vec<String>,
}

pub fn estimate_perf(sched: &TileSchedule, power: &PowerReport, f: f64, cat: &DeviceCatalog) -> Result<PerfReport> {
    if !(f > 0.0 && f.is_finite()) {
        return Err(Error::Frequency(f));
    }
    if sched.tile_loads() == 0 {
        return Err(Error::EmptyWorkload);
    }
    sched.check_refresh(&cat.pcm, f)?;
    let weight_load_s = sched.tile_loads() as f64 * sched.tile_load_ns / 1e9;
    let stream_s = sched.stream_cycles() as f64 / f;
    let latency_s = weight_load_s + stream_s;
    let total = power.total_w;
    let fps = 1.0 / latency_s;
    let peak = peak_tops(&sched.geometry, f)?;
    let energy_steady_j = total * latency_s;
    let energy_programming_j = sched.programmed_cells() as f64 * cell_update_energy(cat)?;
    Ok(PerfReport {
        frequency_hz: f,
        latency_s,
        weight_load_s,
        stream_s,
        fps,
        peak_tops: peak,
        tops_per_w: peak / total,
        fps_per_w: fps / total,
        total_power_w: total,
        energy_steady_j,
        energy_programming_j,
        energy_total_j: energy_steady_j + energy_programming_j,
        tile_loads: sched.tile_loads(),
        programmed_cells: sched.programmed_cells(),
        offloaded_layers: sched.offloaded().map(|l| l.name.clone()).collect(),
    })
}

/// Clock selection for a design point.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "profile", rename_all = "snake_case")]
pub enum FrequencyProfile {
    /// 1 GHz, within the modulator rating.
    #[default]
    Default,
    /// The clock that places 144x256 at 342.1 TOPS. Above the modulator
    /// rating; always flagged as overclocked.
    Pareto,
    Custom { hz: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Clock {
    pub hz: f64,
    pub overclocked: bool,
}

impl FrequencyProfile {
    pub fn resolve(&self, cat: &DeviceCatalog, allow_overclock: bool) -> Result<Clock> {
        let max = cat.modulator.max_rate_hz;
        let hz = match *self {
            Self::Default => DEFAULT_CLOCK_HZ,
            Self::Pareto => F_PARETO_HZ,
            Self::Custom { hz } => hz,
        };
        if !(hz > 0.0 && hz.is_finite()) {
            return Err(Error::Frequency(hz));
        }
        let overclocked = hz > max;
        if overclocked && !allow_overclock && !matches!(self, Self::Pareto) {
            return Err(Error::Overclock { requested: hz, max });
        }
        Ok(Clock { hz, overclocked })
    }
}

impl FromStr for FrequencyProfile {
    type Err = Error;

    /// `default`, `pareto`, `custom:HZ`, or a bare frequency in Hz.
    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim().to_ascii_lowercase();
        let parse_hz = |v: &str| {
            v.parse::<f64>()
                .map_err(|_| Error::Usage(format!("bad frequency `{v}`")))
        };
        match t.as_str() {
            "default" => Ok(Self::Default),
            "pareto" | "pareto-calibration" => Ok(Self::Pareto),
            _ => {
                let v = t.strip_prefix("custom:").unwrap_or(&t);
                let hz = parse_hz(v)?;
                if !(hz > 0.0 && hz.is_finite()) {
                    return Err(Error::Frequency(hz));
                }
                Ok(Self::Custom { hz })
            }
        }
    }
}

/// The bundled ResNet-50 layer list (256x256 input).
pub fn resnet50() -> Vec<ConvLayerSpec> {
    serde_json::from_str(RESNET50_JSON).expect("bundled workload is valid")
}

/// Loads a named bundled workload or a JSON layer-list file.
pub fn load_workload(name_or_path: &str) -> Result<Vec<ConvLayerSpec>> {
    let layers: Vec<ConvLayerSpec> = match name_or_path.to_ascii_lowercase().as_str() {
        "resnet50" | "resnet-50" => resnet50(),
        _ => {
            let p = Path::new(name_or_path);
            let text = std::fs::read_to_string(p).map_err(|source| Error::Io {
                path: p.to_path_buf(),
                source,
            })?;
            serde_json::from_str(&text)?
        }
    };
    if layers.is_empty() {
        return Err(Error::EmptyWorkload);
    }
    for l in &layers {
        l.validate()?;
    }
    Ok(layers)
}

/// Fraction of the group's taps a `k×k` layer fills in one-tap mode.
pub fn one_tap_utilization(kernel: u32) -> f64 {
    if kernel == 1 {
        1.0 / f64::from(WAVELENGTHS_PER_GROUP)
    } else {
        1.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::ArchitectureVariant;
    use crate::power::{total_power, LaserMode, PrecisionSpec};

    fn g(h: u32, w: u32) -> CoreGeometry {
        CoreGeometry::new(h, w).unwrap()
    }

    #[test]
    fn lowering_examples() {
        let d = lower_conv(&ConvLayerSpec::conv("a", 16, 256, 3, 8, 8), &g(144, 256)).unwrap();
        assert_eq!((d.rows, d.tiles_row, d.tiles_col), (144, 1, 1));
        let d = lower_conv(&ConvLayerSpec::conv("b", 1, 1, 1, 1, 1), &g(144, 256)).unwrap();
        assert_eq!((d.rows, d.cols, d.positions), (1, 1, 1));
        let d = lower_conv(&ConvLayerSpec::conv("c", 64, 256, 3, 4, 4), &g(144, 256)).unwrap();
        assert_eq!((d.tiles_row, d.tiles_col), (4, 1));
        assert!(matches!(
            lower_conv(&ConvLayerSpec::conv("d", 3, 64, 7, 4, 4), &g(144, 256)),
            Err(Error::UnsupportedKernel(7))
        ));
    }

    #[test]
    fn one_tap_mode_uses_one_row_per_group() {
        let l = ConvLayerSpec::conv("p", 64, 256, 1, 4, 4);
        let d = lower_conv_with(&l, &g(144, 256), MappingMode::OneTapPerGroup).unwrap();
        assert_eq!((d.usable_rows, d.tiles_row), (16, 4));
        assert_eq!(one_tap_utilization(1), 1.0 / 9.0);
    }

    #[test]
    fn tiles_cover_rows() {
        for l in resnet50().iter().filter(|l| l.kind == LayerKind::Conv) {
            let d = lower_conv(l, &g(144, 256)).unwrap();
            assert!(d.tiles_row * u64::from(d.usable_rows) >= d.rows);
            assert!(d.utilization > 0.0 && d.utilization <= 1.0);
        }
    }

    #[test]
    fn resnet_tile_loads() {
        let cat = DeviceCatalog::shipped();
        let big = schedule(&resnet50(), &g(144, 256), &cat.pcm).unwrap();
        assert_eq!(big.tile_loads(), 711);
        assert!((400..=900).contains(&big.tile_loads()));
        let tiny = schedule(&resnet50(), &g(9, 8), &cat.pcm).unwrap();
        assert!(tiny.tile_loads() >= 100 * big.tile_loads());
        let names: Vec<_> = big.offloaded().map(|l| l.name.as_str()).collect();
        assert_eq!(names, ["conv1", "fc"]);
    }

    #[test]
    fn single_layer_closed_form() {
        let cat = DeviceCatalog::shipped();
        let geom = g(144, 256);
        let s = schedule(&[ConvLayerSpec::conv("x", 1, 1, 1, 1, 1)], &geom, &cat.pcm).unwrap();
        let p = total_power(
            &geom,
            &cat,
            &ArchitectureVariant::Baseline3D,
            &PrecisionSpec::default(),
            1e9,
            LaserMode::default(),
        )
        .unwrap();
        let r = estimate_perf(&s, &p, 1e9, &cat).unwrap();
        assert_eq!(r.latency_s, 1e-6 + 1e-9);
        assert!((r.fps * r.latency_s - 1.0).abs() < 1e-12);
    }

    #[test]
    fn peak_examples() {
        assert!((peak_tops(&g(144, 256), F_PARETO_HZ).unwrap() - 342.1).abs() < 1e-9);
        assert_eq!(peak_tops(&g(1, 1), 1.0).unwrap(), 2e-12);
        assert!((peak_tops(&g(144, 256), 1e9).unwrap() - 73.728).abs() < 1e-9);
        assert!(peak_tops(&g(1, 1), 0.0).is_err());
    }

    #[test]
    fn empty_and_offload_only() {
        let cat = DeviceCatalog::shipped();
        assert!(matches!(schedule(&[], &g(9, 8), &cat.pcm), Err(Error::EmptyWorkload)));
        let mut fc = ConvLayerSpec::conv("fc", 8, 8, 1, 1, 1);
        fc.kind = LayerKind::Fc;
        let s = schedule(&[fc], &g(9, 8), &cat.pcm).unwrap();
        let p = total_power(
            &g(9, 8),
            &cat,
            &ArchitectureVariant::Baseline3D,
            &PrecisionSpec::default(),
            1e9,
            LaserMode::default(),
        )
        .unwrap();
        assert!(matches!(estimate_perf(&s, &p, 1e9, &cat), Err(Error::EmptyWorkload)));
    }

    #[test]
    fn profiles() {
        let cat = DeviceCatalog::shipped();
        let d = FrequencyProfile::Default.resolve(&cat, false).unwrap();
        assert_eq!((d.hz, d.overclocked), (1e9, false));
        let p = FrequencyProfile::Pareto.resolve(&cat, false).unwrap();
        assert!(p.overclocked);
        let c: FrequencyProfile = "custom:3e9".parse().unwrap();
        assert!(matches!(c.resolve(&cat, false), Err(Error::Overclock { .. })));
        assert!(c.resolve(&cat, true).unwrap().overclocked);
        assert_eq!("2.5e8".parse::<FrequencyProfile>().unwrap(), FrequencyProfile::Custom { hz: 2.5e8 });
        assert!("-1".parse::<FrequencyProfile>().is_err());
    }

    #[test]
    fn workload_file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("w.json");
        std::fs::write(&p, serde_json::to_string(&resnet50()).unwrap()).unwrap();
        assert_eq!(load_workload(p.to_str().unwrap()).unwrap(), resnet50());
        std::fs::write(&p, "[]").unwrap();
        assert!(matches!(load_workload(p.to_str().unwrap()), Err(Error::EmptyWorkload)));
    }
}
