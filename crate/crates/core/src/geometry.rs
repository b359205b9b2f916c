//! Core geometry and the architecture variants compared in ablations.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const WAVELENGTHS_PER_GROUP: u32 = 9;
pub const COLS_PER_MMI: u32 = 8;

/// Crossbar dimensions: `rows` WDM input channels by `cols` output columns.
///
/// Rows come in groups of nine wavelengths (one comb each) and columns in
/// groups of eight behind one 1x8 MMI. Cores smaller than a single group are
/// accepted as degenerate cases.
///
/// Deserializes from either `{"rows": H, "cols": W}` or `"HxW"`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "GeometryRepr")]
pub struct CoreGeometry {
    pub rows: u32,
    pub cols: u32,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum GeometryRepr {
    Fields { rows: u32, cols: u32 },
    Text(String),
}

impl TryFrom<GeometryRepr> for CoreGeometry {
    type Error = Error;

    fn try_from(r: GeometryRepr) -> Result<Self> {
        match r {
            GeometryRepr::Fields { rows, cols } => Ok(Self { rows, cols }),
            GeometryRepr::Text(s) => s.parse(),
        }
    }
}

impl CoreGeometry {
    pub fn new(rows: u32, cols: u32) -> Result<Self> {
        let g = Self { rows, cols };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        if self.rows == 0 || self.cols == 0 {
            return Err(Error::Geometry(format!(
                "{}x{}: rows and cols must be positive",
                self.rows, self.cols
            )));
        }
        if self.rows >= WAVELENGTHS_PER_GROUP && self.rows % WAVELENGTHS_PER_GROUP != 0 {
            return Err(Error::Geometry(format!(
                "rows = {} is not a multiple of the {WAVELENGTHS_PER_GROUP}-wavelength group",
                self.rows
            )));
        }
        if self.cols >= COLS_PER_MMI && self.cols % COLS_PER_MMI != 0 {
            return Err(Error::Geometry(format!(
                "cols = {} is not a multiple of {COLS_PER_MMI} (columns per MMI)",
                self.cols
            )));
        }
        Ok(())
    }

    pub fn wavelengths_per_group(&self) -> u32 {
        WAVELENGTHS_PER_GROUP
    }

    /// Number of wavelength groups, i.e. comb sources.
    pub fn groups(&self) -> u32 {
        self.rows.div_ceil(WAVELENGTHS_PER_GROUP)
    }

    pub fn cols_per_mmi(&self) -> u32 {
        COLS_PER_MMI
    }

    /// Cascaded 1x2 splitters on the critical path: `W/8 - 1`, floored at zero.
    pub fn splitter_stages(&self) -> u32 {
        self.cols.div_ceil(COLS_PER_MMI).saturating_sub(1)
    }

    pub fn cells(&self) -> u64 {
        u64::from(self.rows) * u64::from(self.cols)
    }
}

impl fmt::Display for CoreGeometry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}x{}", self.rows, self.cols)
    }
}

impl FromStr for CoreGeometry {
    type Err = Error;

    /// Parses `HxW`, e.g. `144x256`.
    fn from_str(s: &str) -> Result<Self> {
        let (h, w) = s
            .trim()
            .split_once(['x', 'X'])
            .ok_or_else(|| Error::Geometry(format!("expected HxW, got `{s}`")))?;
        let h = h
            .trim()
            .parse()
            .map_err(|_| Error::Geometry(format!("bad row count in `{s}`")))?;
        let w = w
            .trim()
            .parse()
            .map_err(|_| Error::Geometry(format!("bad column count in `{s}`")))?;
        Self::new(h, w)
    }
}

pub const DEFAULT_SOA_FANOUT: u32 = 128;
pub const DEFAULT_RING_LOSS_DB: f64 = 0.922_21;
pub const DEFAULT_COMBINER_STAGE_LOSS_DB: f64 = 3.0;

/// Topology / accumulation / weighting scheme being modeled.
///
/// Serializes as `{"kind": ..., params}`; also deserializes from the
/// `NAME[:k=v,...]` string form.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(remote = "Self", tag = "kind", rename_all = "snake_case")]
pub enum ArchitectureVariant {
    /// 3D Si/SiN crossbar, WSC + multi-port PD hierarchical accumulation, PCM weights.
    Baseline3D,
    /// SOAs restore the budget after `fanout_before_amp` columns.
    SoaAssisted { fanout_before_amp: u32 },
    /// Single-layer planar crossbar with cascaded crossings and Y-branches.
    /// `None` counts mean `W + 8` crossings and `W` Y-branches.
    Planar2D {
        crossings: Option<u32>,
        y_branches: Option<u32>,
    },
    /// Microring WDM accumulation, two rings per row.
    MrrAccumulation { ring_loss_db: f64 },
    /// Per-site detection with photocurrent summation only.
    KclOnly,
    /// Coherent combiner tree of depth `ceil(log2 H)`.
    CoherentCombining { stage_loss_db: f64 },
    /// Baseline optics with thermo-optic MZI weights in place of PCM.
    ThermoOpticWeights,
}

impl Serialize for ArchitectureVariant {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        ArchitectureVariant::serialize(self, s)
    }
}

impl<'de> Deserialize<'de> for ArchitectureVariant {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        match serde_json::Value::deserialize(d)? {
            serde_json::Value::String(text) => text.parse().map_err(D::Error::custom),
            v => ArchitectureVariant::deserialize(v).map_err(D::Error::custom),
        }
    }
}

impl ArchitectureVariant {
    pub fn soa_assisted() -> Self {
        Self::SoaAssisted {
            fanout_before_amp: DEFAULT_SOA_FANOUT,
        }
    }

    pub fn planar_2d() -> Self {
        Self::Planar2D {
            crossings: None,
            y_branches: None,
        }
    }

    pub fn mrr() -> Self {
        Self::MrrAccumulation {
            ring_loss_db: DEFAULT_RING_LOSS_DB,
        }
    }

    pub fn coherent() -> Self {
        Self::CoherentCombining {
            stage_loss_db: DEFAULT_COMBINER_STAGE_LOSS_DB,
        }
    }

    /// The seven configurations of the ablation study, baseline first.
    pub fn ablation_set() -> Vec<Self> {
        vec![
            Self::Baseline3D,
            Self::soa_assisted(),
            Self::planar_2d(),
            Self::ThermoOpticWeights,
            Self::mrr(),
            Self::KclOnly,
            Self::coherent(),
        ]
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::Baseline3D => "baseline3d",
            Self::SoaAssisted { .. } => "soa",
            Self::Planar2D { .. } => "planar2d",
            Self::MrrAccumulation { .. } => "mrr",
            Self::KclOnly => "kcl",
            Self::CoherentCombining { .. } => "coherent",
            Self::ThermoOpticWeights => "thermo",
        }
    }

    /// Whether weights are non-volatile PCM cells (and so need the VCSEL
    /// programming interface rather than hold power).
    pub fn uses_pcm(&self) -> bool {
        !matches!(self, Self::ThermoOpticWeights)
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            Self::SoaAssisted { fanout_before_amp: 0 } => {
                Err(Error::Variant("soa fanout must be positive".into()))
            }
            Self::Planar2D {
                crossings: Some(0), ..
            } => Err(Error::Variant("planar2d crossings must be positive".into())),
            Self::Planar2D {
                y_branches: Some(0),
                ..
            } => Err(Error::Variant("planar2d y_branches must be positive".into())),
            Self::MrrAccumulation { ring_loss_db } if !(ring_loss_db > 0.0 && ring_loss_db.is_finite()) => {
                Err(Error::Variant("mrr ring loss must be positive".into()))
            }
            Self::CoherentCombining { stage_loss_db } if !(stage_loss_db > 0.0 && stage_loss_db.is_finite()) => {
                Err(Error::Variant("coherent stage loss must be positive".into()))
            }
            _ => Ok(()),
        }
    }
}

impl fmt::Display for ArchitectureVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::SoaAssisted { fanout_before_amp } => write!(f, "soa:fanout={fanout_before_amp}"),
            Self::Planar2D { crossings, y_branches } => {
                write!(f, "planar2d")?;
                let mut sep = ':';
                if let Some(c) = crossings {
                    write!(f, "{sep}crossings={c}")?;
                    sep = ',';
                }
                if let Some(y) = y_branches {
                    write!(f, "{sep}ybranches={y}")?;
                }
                Ok(())
            }
            Self::MrrAccumulation { ring_loss_db } => write!(f, "mrr:ring_loss={ring_loss_db}"),
            Self::CoherentCombining { stage_loss_db } => write!(f, "coherent:stage_loss={stage_loss_db}"),
            other => f.write_str(other.name()),
        }
    }
}

impl FromStr for ArchitectureVariant {
    type Err = Error;

    /// Parses `NAME[:k=v,...]`.
    fn from_str(s: &str) -> Result<Self> {
        let (name, params) = match s.split_once(':') {
            Some((n, p)) => (n.trim(), p.trim()),
            None => (s.trim(), ""),
        };
        let mut kv = Vec::new();
        for item in params.split(',').filter(|p| !p.trim().is_empty()) {
            let (k, v) = item
                .split_once('=')
                .ok_or_else(|| Error::Variant(format!("expected k=v in `{item}`")))?;
            kv.push((k.trim().to_ascii_lowercase(), v.trim().to_string()));
        }
        let num = |v: &str| -> Result<f64> {
            v.parse::<f64>()
                .map_err(|_| Error::Variant(format!("`{v}` is not a number")))
        };
        let int = |v: &str| -> Result<u32> {
            v.parse::<u32>()
                .map_err(|_| Error::Variant(format!("`{v}` is not a count")))
        };
        let unknown = |k: &str, n: &str| Error::Variant(format!("unknown parameter `{k}` for `{n}`"));

        let variant = match name.to_ascii_lowercase().replace(['-', '_'], "").as_str() {
            "baseline" | "baseline3d" | "3d" => {
                if let Some((k, _)) = kv.first() {
                    return Err(unknown(k, name));
                }
                Self::Baseline3D
            }
            "soa" | "soaassisted" => {
                let mut fanout = DEFAULT_SOA_FANOUT;
                for (k, v) in &kv {
                    match k.as_str() {
                        "fanout" | "fanout_before_amp" => fanout = int(v)?,
                        _ => return Err(unknown(k, name)),
                    }
                }
                Self::SoaAssisted {
                    fanout_before_amp: fanout,
                }
            }
            "planar2d" | "2d" | "planar" => {
                let (mut c, mut y) = (None, None);
                for (k, v) in &kv {
                    match k.as_str() {
                        "crossings" => c = Some(int(v)?),
                        "ybranches" | "y_branches" => y = Some(int(v)?),
                        _ => return Err(unknown(k, name)),
                    }
                }
                Self::Planar2D {
                    crossings: c,
                    y_branches: y,
                }
            }
            "mrr" | "mrraccumulation" => {
                let mut ring = DEFAULT_RING_LOSS_DB;
                for (k, v) in &kv {
                    match k.as_str() {
                        "ring_loss" | "ring_loss_db" => ring = num(v)?,
                        _ => return Err(unknown(k, name)),
                    }
                }
                Self::MrrAccumulation { ring_loss_db: ring }
            }
            "kcl" | "kclonly" => {
                if let Some((k, _)) = kv.first() {
                    return Err(unknown(k, name));
                }
                Self::KclOnly
            }
            "coherent" | "coherentcombining" => {
                let mut stage = DEFAULT_COMBINER_STAGE_LOSS_DB;
                for (k, v) in &kv {
                    match k.as_str() {
                        "stage_loss" | "stage_loss_db" => stage = num(v)?,
                        _ => return Err(unknown(k, name)),
                    }
                }
                Self::CoherentCombining { stage_loss_db: stage }
            }
            "thermo" | "thermoopticweights" | "thermooptic" | "mzi" => {
                if let Some((k, _)) = kv.first() {
                    return Err(unknown(k, name));
                }
                Self::ThermoOpticWeights
            }
            _ => return Err(Error::Variant(format!("unknown variant `{name}`"))),
        };
        variant.validate()?;
        Ok(variant)
    }
}
