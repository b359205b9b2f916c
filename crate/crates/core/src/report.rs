//! Scenarios, combined evaluations, ablation and sweep tables, and
//! deterministic serialization.
//!
//! JSON output has sorted keys and floats rounded to nine significant
//! digits, so the same scenario always produces the same bytes.

use std::path::PathBuf;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::analog::{NoiseSpec, SignedMode};
use crate::area::{crossbar_area_with, AreaOptions, AreaReport};
use crate::catalog::DeviceCatalog;
use crate::error::{Error, Result};
use crate::geometry::{ArchitectureVariant, CoreGeometry};
use crate::link_budget::{critical_path_il, Feasibility, LinkBudgetReport};
use crate::power::{total_power, LaserMode, PowerReport, PrecisionSpec};
pub use crate::workload::{Clock, FrequencyProfile};
use crate::workload::{estimate_perf, load_workload, schedule_with, ConvLayerSpec, MappingMode, PerfReport};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    #[default]
    Json,
    Csv,
    Table,
}

impl FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "json" => Ok(Self::Json),
            "csv" => Ok(Self::Csv),
            "table" | "text" => Ok(Self::Table),
            _ => Err(Error::Usage(format!("unknown format `{s}` (json, csv, table)"))),
        }
    }
}

/// A fully specified design point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub core: CoreGeometry,
    #[serde(default = "baseline")]
    pub variant: ArchitectureVariant,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub catalog: Option<PathBuf>,
    #[serde(default)]
    pub precision: PrecisionSpec,
    #[serde(default)]
    pub profile: FrequencyProfile,
    #[serde(default)]
    pub allow_overclock: bool,
    #[serde(default)]
    pub laser_mode: LaserMode,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub workload: Option<String>,
    #[serde(default)]
    pub mapping: MappingMode,
    #[serde(default)]
    pub noise: NoiseSpec,
    #[serde(default)]
    pub signed_mode: SignedMode,
    #[serde(default)]
    pub area: AreaOptions,
    #[serde(default)]
    pub format: OutputFormat,
}

fn baseline() -> ArchitectureVariant {
    ArchitectureVariant::Baseline3D
}

impl Default for Scenario {
    fn default() -> Self {
        Self {
            core: CoreGeometry { rows: 144, cols: 256 },
            variant: ArchitectureVariant::Baseline3D,
            catalog: None,
            precision: PrecisionSpec::default(),
            profile: FrequencyProfile::default(),
            allow_overclock: false,
            laser_mode: LaserMode::default(),
            workload: None,
            mapping: MappingMode::default(),
            noise: NoiseSpec::default(),
            signed_mode: SignedMode::default(),
            area: AreaOptions::default(),
            format: OutputFormat::default(),
        }
    }
}

impl Scenario {
    pub fn from_json_str(text: &str) -> Result<Self> {
        let s: Self = serde_json::from_str(text)?;
        s.validate()?;
        Ok(s)
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_json_str(&text)
    }

    pub fn validate(&self) -> Result<()> {
        self.core.validate()?;
        self.variant.validate()?;
        self.precision.validate()?;
        self.noise.validate()
    }

    /// Loads the referenced catalog, or the shipped one.
    pub fn catalog(&self) -> Result<DeviceCatalog> {
        match &self.catalog {
            Some(p) => DeviceCatalog::load(p),
            None => Ok(DeviceCatalog::shipped()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Header {
    pub tool: String,
    pub version: String,
    pub catalog_hash: String,
    pub catalog_defaulted: Vec<String>,
}

impl Header {
    pub fn new(cat: &DeviceCatalog) -> Self {
        Self {
            tool: "ptc".into(),
            version: crate::VERSION.into(),
            catalog_hash: cat.hash().to_string(),
            catalog_defaulted: cat.defaulted().to_vec(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub header: Header,
    pub scenario: Scenario,
    pub clock: Clock,
    pub link_budget: LinkBudgetReport,
    pub power: PowerReport,
    pub area: AreaReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub perf: Option<PerfReport>,
    pub feasibility: Feasibility,
}

impl Evaluation {
    pub fn is_feasible(&self) -> bool {
        self.feasibility.is_feasible()
    }
}

pub fn evaluate(scenario: &Scenario, cat: &DeviceCatalog) -> Result<Evaluation> {
    scenario.validate()?;
    let clock = scenario.profile.resolve(cat, scenario.allow_overclock)?;
    let link = critical_path_il(&scenario.core, cat, &scenario.variant)?;
    let power = total_power(
        &scenario.core,
        cat,
        &scenario.variant,
        &scenario.precision,
        clock.hz,
        scenario.laser_mode,
    )?;
    let area = crossbar_area_with(&scenario.core, cat, &scenario.area)?;
    let perf = match &scenario.workload {
        Some(w) => {
            let layers = load_workload(w)?;
            let s = schedule_with(&layers, &scenario.core, &cat.pcm, scenario.mapping)?;
            Some(estimate_perf(&s, &power, clock.hz, cat)?)
        }
        None => None,
    };
    Ok(Evaluation {
        header: Header::new(cat),
        scenario: scenario.clone(),
        clock,
        feasibility: power.feasibility,
        link_budget: link,
        power,
        area,
        perf,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AblationRow {
    pub variant: String,
    pub il_db: f64,
    pub total_w: f64,
    pub laser_w: f64,
    pub top_contributor: String,
    pub fraction: f64,
    pub feasible: bool,
}

/// One row per variant, in the order given. Points evaluate concurrently.
pub fn ablate(
    variants: &[ArchitectureVariant],
    geom: &CoreGeometry,
    cat: &DeviceCatalog,
    precision: &PrecisionSpec,
    clock_hz: f64,
    mode: LaserMode,
) -> Result<Vec<AblationRow>> {
    if variants.is_empty() {
        return Err(Error::Usage("ablation needs at least one variant".into()));
    }
    variants
        .par_iter()
        .enumerate()
        .map(|(index, v)| {
            let p = total_power(geom, cat, v, precision, clock_hz, mode).map_err(|e| Error::Point {
                index,
                source: Box::new(e),
            })?;
            let top = p.dominant();
            Ok(AblationRow {
                variant: v.to_string(),
                il_db: p.assumptions.critical_path_il_db,
                total_w: p.total_w,
                laser_w: p.term("laser").map_or(0.0, |t| t.watts),
                top_contributor: top.label.clone(),
                fraction: top.fraction,
                feasible: p.feasibility.is_feasible(),
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub core: String,
    pub fps: f64,
    pub energy_mj: f64,
    pub energy_steady_mj: f64,
    pub energy_programming_mj: f64,
    pub total_w: f64,
    pub tile_loads: u64,
    pub fps_per_w: f64,
    pub tops_per_w: f64,
}

#[derive(Debug, Clone)]
pub struct SweepConfig<'a> {
    pub workload: &'a [ConvLayerSpec],
    pub variant: ArchitectureVariant,
    pub precision: PrecisionSpec,
    pub clock_hz: f64,
    pub laser_mode: LaserMode,
    pub mapping: MappingMode,
}

/// One row per core size, in the order given.
pub fn sweep(cores: &[CoreGeometry], cfg: &SweepConfig<'_>, cat: &DeviceCatalog) -> Result<Vec<SweepRow>> {
    if cores.is_empty() {
        return Err(Error::Usage("sweep needs at least one core size".into()));
    }
    cores
        .par_iter()
        .enumerate()
        .map(|(index, g)| {
            sweep_point(g, cfg, cat).map_err(|e| Error::Point {
                index,
                source: Box::new(e),
            })
        })
        .collect()
}

fn sweep_point(g: &CoreGeometry, cfg: &SweepConfig<'_>, cat: &DeviceCatalog) -> Result<SweepRow> {
    let p = total_power(g, cat, &cfg.variant, &cfg.precision, cfg.clock_hz, cfg.laser_mode)?;
    let s = schedule_with(cfg.workload, g, &cat.pcm, cfg.mapping)?;
    let r = estimate_perf(&s, &p, cfg.clock_hz, cat)?;
    Ok(SweepRow {
        core: g.to_string(),
        fps: r.fps,
        energy_mj: r.energy_total_j * 1e3,
        energy_steady_mj: r.energy_steady_j * 1e3,
        energy_programming_mj: r.energy_programming_j * 1e3,
        total_w: p.total_w,
        tile_loads: r.tile_loads,
        fps_per_w: r.fps_per_w,
        tops_per_w: r.tops_per_w,
    })
}

/// Cores of the standard size sweep, smallest first.
pub fn standard_sweep_cores() -> Vec<CoreGeometry> {
    [(9, 8), (18, 16), (36, 32), (72, 64), (144, 128), (144, 256)]
        .into_iter()
        .map(|(rows, cols)| CoreGeometry { rows, cols })
        .collect()
}

/// Rounds to nine significant digits.
pub fn round_sig(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{x:.8e}").parse().unwrap_or(x)
}

fn canonicalize(v: Value) -> Value {
    match v {
        Value::Number(n) if n.is_f64() => {
            let x = round_sig(n.as_f64().unwrap_or(0.0));
            serde_json::Number::from_f64(x).map_or(Value::Null, Value::Number)
        }
        Value::Array(a) => Value::Array(a.into_iter().map(canonicalize).collect()),
        Value::Object(m) => Value::Object(m.into_iter().map(|(k, v)| (k, canonicalize(v))).collect()),
        other => other,
    }
}

/// Deterministic pretty JSON: sorted keys, nine significant digits.
pub fn to_canonical_json<T: Serialize>(value: &T) -> Result<String> {
    let v = canonicalize(serde_json::to_value(value)?);
    let mut s = serde_json::to_string_pretty(&v)?;
    s.push('\n');
    Ok(s)
}

/// Header plus payload under `result`.
pub fn with_header<T: Serialize>(header: &Header, result: &T) -> Result<Value> {
    Ok(serde_json::json!({ "header": header, "result": result }))
}

fn fmt_num(x: f64) -> String {
    let r = round_sig(x);
    if r.is_finite() && r.abs() >= 1e-4 && r.abs() < 1e9 {
        format!("{r}")
    } else {
        format!("{r:e}")
    }
}

/// Header row plus string cells; renders as CSV or an aligned text table.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    pub headers: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(headers: &[&str]) -> Self {
        Self {
            headers: headers.iter().map(|h| h.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let io = |e: csv::Error| Error::Usage(format!("csv: {e}"));
        w.write_record(&self.headers).map_err(io)?;
        for r in &self.rows {
            w.write_record(r).map_err(io)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Usage(format!("csv: {e}")))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }

    pub fn to_text(&self) -> String {
        let mut width: Vec<usize> = self.headers.iter().map(|h| h.len()).collect();
        for r in &self.rows {
            for (i, c) in r.iter().enumerate() {
                if i < width.len() {
                    width[i] = width[i].max(c.len());
                }
            }
        }
        let line = |cells: &[String]| {
            let parts: Vec<String> = cells
                .iter()
                .enumerate()
                .map(|(i, c)| format!("{c:<w$}", w = width.get(i).copied().unwrap_or(0)))
                .collect();
            parts.join("  ").trim_end().to_string() + "\n"
        };
        let mut out = line(&self.headers);
        let rule: Vec<String> = width.iter().map(|w| "-".repeat(*w)).collect();
        out += &line(&rule);
        for r in &self.rows {
            out += &line(r);
        }
        out
    }
}

pub fn link_budget_table(r: &LinkBudgetReport) -> Table {
    let mut t = Table::new(&["term", "db"]);
    for term in &r.terms {
        t.push(vec![term.label.clone(), fmt_num(term.db)]);
    }
    t.push(vec!["total".into(), fmt_num(r.total_db)]);
    t
}

pub fn power_table(r: &PowerReport) -> Table {
    let mut t = Table::new(&["term", "watts", "fraction"]);
    for term in &r.breakdown {
        t.push(vec![term.label.clone(), fmt_num(term.watts), fmt_num(term.fraction)]);
    }
    t.push(vec!["total".into(), fmt_num(r.total_w), "1".into()]);
    t
}

pub fn area_table(r: &AreaReport) -> Table {
    let mut t = Table::new(&["quantity", "value"]);
    let mut kv = |k: &str, v: String| t.push(vec![k.to_string(), v]);
    kv("crossbar_w_mm", fmt_num(r.crossbar_w_mm));
    kv("crossbar_h_mm", fmt_num(r.crossbar_h_mm));
    kv("total_area_mm2", fmt_num(r.total_area_mm2));
    kv("unit_cell_um", format!("{}x{}", fmt_num(r.unit_cell_w_um), fmt_num(r.unit_cell_h_um)));
    kv("reticle_mm", format!("{}x{}", fmt_num(r.reticle_w_mm), fmt_num(r.reticle_h_mm)));
    kv("fits_reticle", r.fits_reticle.to_string());
    kv(
        "residual_area_mm2",
        r.residual_area_mm2.map_or_else(|| "-".into(), fmt_num),
    );
    t
}

pub fn evaluation_table(e: &Evaluation) -> Table {
    let mut t = Table::new(&["quantity", "value"]);
    let mut kv = |k: &str, v: String| t.push(vec![k.to_string(), v]);
    kv("core", e.scenario.core.to_string());
    kv("variant", e.scenario.variant.to_string());
    kv("clock_hz", fmt_num(e.clock.hz));
    kv("overclocked", e.clock.overclocked.to_string());
    kv("il_db", fmt_num(e.link_budget.total_db));
    kv("total_power_w", fmt_num(e.power.total_w));
    let top = e.power.dominant();
    kv("top_contributor", format!("{} ({})", top.label, fmt_num(top.fraction)));
    kv("area_mm", format!("{} x {}", fmt_num(e.area.crossbar_w_mm), fmt_num(e.area.crossbar_h_mm)));
    kv("fits_reticle", e.area.fits_reticle.to_string());
    match e.feasibility {
        Feasibility::Feasible { margin_db } => kv("feasibility", format!("feasible (margin {} dB)", fmt_num(margin_db))),
        Feasibility::Infeasible { shortfall_db } => {
            kv("feasibility", format!("infeasible (short {} dB)", fmt_num(shortfall_db)))
        }
    }
    if let Some(p) = &e.perf {
        kv("fps", fmt_num(p.fps));
        kv("latency_s", fmt_num(p.latency_s));
        kv("peak_tops", fmt_num(p.peak_tops));
        kv("tops_per_w", fmt_num(p.tops_per_w));
        kv("fps_per_w", fmt_num(p.fps_per_w));
        kv("energy_mj", fmt_num(p.energy_total_j * 1e3));
        kv("energy_steady_mj", fmt_num(p.energy_steady_j * 1e3));
        kv("energy_programming_mj", fmt_num(p.energy_programming_j * 1e3));
        kv("tile_loads", p.tile_loads.to_string());
        if !p.offloaded_layers.is_empty() {
            kv("offloaded_layers", p.offloaded_layers.join(" "));
        }
    }
    t
}

pub fn ablation_table(rows: &[AblationRow]) -> Table {
    let mut t = Table::new(&["variant", "il_db", "total_w", "top_contributor", "fraction", "feasible"]);
    for r in rows {
        t.push(vec![
            r.variant.clone(),
            fmt_num(r.il_db),
            fmt_num(r.total_w),
            r.top_contributor.clone(),
            fmt_num(r.fraction),
            r.feasible.to_string(),
        ]);
    }
    t
}

pub fn sweep_table(rows: &[SweepRow]) -> Table {
    let mut t = Table::new(&[
        "core",
        "fps",
        "mj_per_inference",
        "steady_mj",
        "programming_mj",
        "total_w",
        "tile_loads",
        "fps_per_w",
        "tops_per_w",
    ]);
    for r in rows {
        t.push(vec![
            r.core.clone(),
            fmt_num(r.fps),
            fmt_num(r.energy_mj),
            fmt_num(r.energy_steady_mj),
            fmt_num(r.energy_programming_mj),
            fmt_num(r.total_w),
            r.tile_loads.to_string(),
            fmt_num(r.fps_per_w),
            fmt_num(r.tops_per_w),
        ]);
    }
    t
}
