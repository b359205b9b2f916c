//! Device parameter catalog.
//!
//! A catalog file is a JSON object keyed by component name. Every component
//! entry, and every field inside one, is optional: whatever the file omits is
//! filled from the shipped default catalog and recorded in
//! [`DeviceCatalog::defaulted`]. Only `schema_version` is mandatory.
//!
//! Units: losses in dB, powers in mW, energies in pJ (fJ for modulator
//! switching), times in ns, areas in µm. Suffixes on every key spell the unit.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

pub const SCHEMA_VERSION: u64 = 1;

/// Default catalog as shipped with the crate.
pub const DEFAULT_CATALOG_JSON: &str = include_str!("../data/default_catalog.json");

/// Elementary charge, C.
const Q_E: f64 = 1.602_176_634e-19;

const COMPONENTS: &[&str] = &[
    "comb_laser",
    "awg",
    "voa",
    "sl_mzm",
    "wsc",
    "mmi",
    "splitter",
    "crossing",
    "y_branch",
    "escalator",
    "pcm",
    "soa",
    "photodetector",
    "grating_coupler",
    "vcsel",
    "converters",
    "thermo_optic",
    "layout",
];

/// Passive component: loss plus optional footprint and static power.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComponentSpec {
    #[serde(skip)]
    pub name: String,
    pub insertion_loss_db: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub area_width_um: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub area_height_um: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub static_power_mw: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub notes: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LaserSpec {
    pub channel_power_dbm: f64,
    pub channels_per_comb: u32,
    pub wpe: f64,
    /// Per-comb control overhead (pump, locking, temperature control).
    pub control_power_mw: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub notes: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VoaSpec {
    pub insertion_loss_db: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub area_width_um: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub area_height_um: Option<f64>,
    pub reference_power_mw: f64,
    pub reference_attenuation_db: f64,
    pub equalization_attenuation_db: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub notes: Option<String>,
}

impl VoaSpec {
    /// Drive power of one VOA holding the equalization attenuation, mW.
    pub fn power_mw(&self) -> f64 {
        self.reference_power_mw * self.equalization_attenuation_db / self.reference_attenuation_db
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModulatorSpec {
    pub insertion_loss_db: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub area_width_um: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub area_height_um: Option<f64>,
    pub extinction_ratio_db: f64,
    /// Switching energy keyed by input bit width (as a decimal string).
    pub energy_per_switch_fj: BTreeMap<String, f64>,
    pub max_rate_hz: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub notes: Option<String>,
}

impl ModulatorSpec {
    /// Switching energy at `bits`, interpolated linearly between tabulated
    /// widths and clamped outside them.
    pub fn energy_per_switch_fj(&self, bits: u32) -> f64 {
        let table: Vec<(f64, f64)> = {
            let mut t: Vec<(f64, f64)> = self
                .energy_per_switch_fj
                .iter()
                .filter_map(|(k, v)| k.parse::<f64>().ok().map(|b| (b, *v)))
                .collect();
            t.sort_by(|a, b| a.0.total_cmp(&b.0));
            t
        };
        let b = f64::from(bits);
        match table.as_slice() {
            [] => 0.0,
            [only] => only.1,
            t => {
                if b <= t[0].0 {
                    return t[0].1;
                }
                for w in t.windows(2) {
                    let (lo, hi) = (w[0], w[1]);
                    if b <= hi.0 {
                        let a = (b - lo.0) / (hi.0 - lo.0);
                        return lo.1 + a * (hi.1 - lo.1);
                    }
                }
                t[t.len() - 1].1
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PcmSpec {
    pub insertion_loss_db: f64,
    pub program_energy_pj: f64,
    pub erase_energy_pj: f64,
    pub program_time_ns: f64,
    pub stabilize_program_ns: f64,
    pub erase_time_ns: f64,
    pub stabilize_erase_ns: f64,
    pub levels_bits: u32,
    pub program_std: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub notes: Option<String>,
}

impl PcmSpec {
    /// Full weight-update cycle: program, settle, erase, settle.
    pub fn cycle_ns(&self) -> f64 {
        self.program_time_ns + self.stabilize_program_ns + self.erase_time_ns + self.stabilize_erase_ns
    }

    pub fn max_refresh_hz(&self) -> f64 {
        1e9 / self.cycle_ns()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SoaSpec {
    pub facet_loss_db: f64,
    pub gain_db: f64,
    pub drive_power_mw: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub area_width_um: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub notes: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PdSpec {
    pub responsivity_a_per_w: f64,
    pub dark_current_a: f64,
    pub bandwidth_hz: f64,
    pub sensitivity_dbm: f64,
    pub max_ports: u32,
    pub tia_power_mw: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub area_width_um: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub area_height_um: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub notes: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VcselSpec {
    pub efficiency: f64,
    pub driver_standby_mw: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub notes: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConverterCoeffs {
    pub p0_dac_ws: f64,
    pub p0_adc_ws: f64,
    pub weight_dac_rate_hz: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub notes: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThermoOpticSpec {
    pub hold_power_mw: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub notes: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LayoutSpec {
    pub unit_cell_width_um: f64,
    pub unit_cell_height_um: f64,
    pub comb_strip_um: f64,
    pub awg_strip_um: f64,
    pub voa_strip_um: f64,
    pub mzm_strip_um: f64,
    pub group_pitch_um: f64,
    pub pd_strip_um: f64,
    pub reticle_width_mm: f64,
    pub reticle_height_mm: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CatalogFile {
    schema_version: u64,
    comb_laser: LaserSpec,
    awg: ComponentSpec,
    voa: VoaSpec,
    sl_mzm: ModulatorSpec,
    wsc: ComponentSpec,
    mmi: ComponentSpec,
    splitter: ComponentSpec,
    crossing: ComponentSpec,
    y_branch: ComponentSpec,
    escalator: ComponentSpec,
    pcm: PcmSpec,
    soa: SoaSpec,
    photodetector: PdSpec,
    grating_coupler: ComponentSpec,
    vcsel: VcselSpec,
    converters: ConverterCoeffs,
    thermo_optic: ThermoOpticSpec,
    layout: LayoutSpec,
}

/// Immutable, validated component parameter set.
#[derive(Debug, Clone, PartialEq)]
pub struct DeviceCatalog {
    pub laser: LaserSpec,
    pub awg: ComponentSpec,
    pub voa: VoaSpec,
    pub modulator: ModulatorSpec,
    pub wsc: ComponentSpec,
    pub mmi: ComponentSpec,
    pub splitter: ComponentSpec,
    pub crossing: ComponentSpec,
    pub y_branch: ComponentSpec,
    pub escalator: ComponentSpec,
    pub pcm: PcmSpec,
    pub soa: SoaSpec,
    pub pd: PdSpec,
    pub grating_coupler: ComponentSpec,
    pub vcsel: VcselSpec,
    pub converters: ConverterCoeffs,
    pub thermo_optic: ThermoOpticSpec,
    pub layout: LayoutSpec,
    defaulted: Vec<String>,
    hash: String,
    canonical: Value,
}

impl DeviceCatalog {
    /// The shipped default catalog.
    pub fn shipped() -> Self {
        Self::from_json_str(DEFAULT_CATALOG_JSON).expect("shipped catalog is valid")
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        load_catalog(path)
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let user: Value = serde_json::from_str(text)?;
        Self::from_value(user)
    }

    pub fn from_value(user: Value) -> Result<Self> {
        let Value::Object(user) = user else {
            return Err(Error::field("<root>", "catalog must be a JSON object"));
        };
        match user.get("schema_version") {
            None => return Err(Error::MissingField("schema_version".into())),
            Some(v) => {
                let found = v
                    .as_u64()
                    .ok_or_else(|| Error::field("schema_version", "must be a non-negative integer"))?;
                if found != SCHEMA_VERSION {
                    return Err(Error::SchemaVersion {
                        found,
                        expected: SCHEMA_VERSION,
                    });
                }
            }
        }
        for key in user.keys() {
            if key != "schema_version" && !COMPONENTS.contains(&key.as_str()) {
                return Err(Error::UnknownComponent(key.clone()));
            }
        }

        let defaults: Value = serde_json::from_str(DEFAULT_CATALOG_JSON)?;
        let Value::Object(defaults) = defaults else {
            unreachable!("shipped catalog is an object")
        };
        let mut defaulted = Vec::new();
        let merged = merge(&defaults, &user, "", &mut defaulted)?;
        validate_numbers(&merged, "")?;

        let file: CatalogFile = serde_json::from_value(merged.clone())?;
        let cat = Self::from_file(file, defaulted, merged)?;
        cat.validate()?;
        Ok(cat)
    }

    fn from_file(f: CatalogFile, defaulted: Vec<String>, canonical: Value) -> Result<Self> {
        let named = |mut c: ComponentSpec, n: &str| {
            c.name = n.to_string();
            c
        };
        let text = serde_json::to_string(&canonical)?;
        let hash = hex::encode(Sha256::digest(text.as_bytes()));
        Ok(Self {
            laser: f.comb_laser,
            awg: named(f.awg, "awg"),
            voa: f.voa,
            modulator: f.sl_mzm,
            wsc: named(f.wsc, "wsc"),
            mmi: named(f.mmi, "mmi"),
            splitter: named(f.splitter, "splitter"),
            crossing: named(f.crossing, "crossing"),
            y_branch: named(f.y_branch, "y_branch"),
            escalator: named(f.escalator, "escalator"),
            pcm: f.pcm,
            soa: f.soa,
            pd: f.photodetector,
            grating_coupler: named(f.grating_coupler, "grating_coupler"),
            vcsel: f.vcsel,
            converters: f.converters,
            thermo_optic: f.thermo_optic,
            layout: f.layout,
            defaulted,
            hash,
            canonical,
        })
    }

    fn validate(&self) -> Result<()> {
        let l = &self.laser;
        if l.channels_per_comb < 1 {
            return Err(Error::field("comb_laser.channels_per_comb", "must be >= 1"));
        }
        if !(l.wpe > 0.0 && l.wpe <= 1.0) {
            return Err(Error::field("comb_laser.wpe", "must lie in (0, 1]"));
        }
        let pd = &self.pd;
        if !(pd.responsivity_a_per_w > 0.0 && pd.responsivity_a_per_w <= 1.2) {
            return Err(Error::field("photodetector.responsivity_a_per_w", "must lie in (0, 1.2]"));
        }
        if pd.sensitivity_dbm >= 0.0 {
            return Err(Error::field("photodetector.sensitivity_dbm", "must be < 0 dBm"));
        }
        if pd.max_ports < 1 {
            return Err(Error::field("photodetector.max_ports", "must be >= 1"));
        }
        if pd.bandwidth_hz <= 0.0 {
            return Err(Error::field("photodetector.bandwidth_hz", "must be > 0"));
        }
        if self.modulator.extinction_ratio_db <= 0.0 {
            return Err(Error::field("sl_mzm.extinction_ratio_db", "must be > 0 dB"));
        }
        if self.modulator.max_rate_hz <= 0.0 {
            return Err(Error::field("sl_mzm.max_rate_hz", "must be > 0"));
        }
        for k in self.modulator.energy_per_switch_fj.keys() {
            if k.parse::<u32>().is_err() {
                return Err(Error::field(
                    format!("sl_mzm.energy_per_switch_fj.{k}"),
                    "keys must be integer bit widths",
                ));
            }
        }
        let pcm = &self.pcm;
        if ![5, 7].contains(&pcm.levels_bits) {
            return Err(Error::field("pcm.levels_bits", "must be 5 (GST) or 7 (N-GST)"));
        }
        if pcm.cycle_ns() <= 0.0 {
            return Err(Error::field("pcm", "weight-update cycle must be positive"));
        }
        if self.converters.p0_dac_ws <= 0.0 {
            return Err(Error::field("converters.p0_dac_ws", "must be > 0"));
        }
        if self.converters.p0_adc_ws <= 0.0 {
            return Err(Error::field("converters.p0_adc_ws", "must be > 0"));
        }
        if !(self.vcsel.efficiency > 0.0 && self.vcsel.efficiency <= 1.0) {
            return Err(Error::field("vcsel.efficiency", "must lie in (0, 1]"));
        }
        if self.voa.reference_attenuation_db <= 0.0 {
            return Err(Error::field("voa.reference_attenuation_db", "must be > 0"));
        }
        let lay = &self.layout;
        for (name, v) in [
            ("layout.unit_cell_width_um", lay.unit_cell_width_um),
            ("layout.unit_cell_height_um", lay.unit_cell_height_um),
            ("layout.group_pitch_um", lay.group_pitch_um),
            ("layout.reticle_width_mm", lay.reticle_width_mm),
            ("layout.reticle_height_mm", lay.reticle_height_mm),
        ] {
            if v <= 0.0 {
                return Err(Error::field(name, "must be > 0"));
            }
        }
        Ok(())
    }

    /// Dotted paths of every field filled from the shipped defaults.
    pub fn defaulted(&self) -> &[String] {
        &self.defaulted
    }

    pub fn is_defaulted(&self, path: &str) -> bool {
        self.defaulted.iter().any(|p| p == path)
    }

    /// SHA-256 of the canonical (merged, key-sorted) catalog JSON.
    pub fn hash(&self) -> &str {
        &self.hash
    }

    pub fn to_json(&self) -> Value {
        self.canonical.clone()
    }

    /// Returns a copy with one field replaced, revalidated.
    pub fn with_override(&self, path: &str, value: Value) -> Result<Self> {
        let mut v = self.canonical.clone();
        let mut cur = &mut v;
        let parts: Vec<&str> = path.split('.').collect();
        for (i, p) in parts.iter().enumerate() {
            let obj = cur
                .as_object_mut()
                .ok_or_else(|| Error::field(path, "path does not name an object field"))?;
            if i + 1 == parts.len() {
                if !obj.contains_key(*p) {
                    return Err(Error::field(path, "no such field"));
                }
                obj.insert(p.to_string(), value);
                break;
            }
            cur = obj
                .get_mut(*p)
                .ok_or_else(|| Error::field(path, "no such field"))?;
        }
        Self::from_value(v)
    }
}

impl Default for DeviceCatalog {
    fn default() -> Self {
        Self::shipped()
    }
}

/// Reads and validates a catalog file.
pub fn load_catalog(path: impl AsRef<Path>) -> Result<DeviceCatalog> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    DeviceCatalog::from_json_str(&text)
}

fn join(prefix: &str, key: &str) -> String {
    if prefix.is_empty() {
        key.to_string()
    } else {
        format!("{prefix}.{key}")
    }
}

// Field-wise overlay of `user` onto `defaults`. Free-form maps (the modulator
// energy table) are taken whole from whichever side provides them.
fn merge(
    defaults: &Map<String, Value>,
    user: &Map<String, Value>,
    prefix: &str,
    defaulted: &mut Vec<String>,
) -> Result<Value> {
    let mut out = Map::new();
    for (k, dv) in defaults {
        let path = join(prefix, k);
        match (user.get(k), dv) {
            (None, Value::Object(d)) if path != "sl_mzm.energy_per_switch_fj" => {
                let sub = merge(d, &Map::new(), &path, defaulted)?;
                out.insert(k.clone(), sub);
            }
            (None, _) => {
                // notes are descriptive only
                if k != "notes" {
                    defaulted.push(path);
                }
                out.insert(k.clone(), dv.clone());
            }
            (Some(Value::Object(u)), Value::Object(d)) if path != "sl_mzm.energy_per_switch_fj" => {
                out.insert(k.clone(), merge(d, u, &path, defaulted)?);
            }
            (Some(Value::Null), _) => {
                return Err(Error::field(path, "null is not a valid value"));
            }
            (Some(uv), _) => {
                out.insert(k.clone(), uv.clone());
            }
        }
    }
    // Keys the defaults do not know are left in so serde rejects them by name.
    for (k, uv) in user {
        if !defaults.contains_key(k) {
            out.insert(k.clone(), uv.clone());
        }
    }
    Ok(Value::Object(out))
}

// Finite numbers everywhere; losses non-negative; areas positive.
fn validate_numbers(v: &Value, prefix: &str) -> Result<()> {
    match v {
        Value::Object(m) => {
            for (k, sub) in m {
                let path = join(prefix, k);
                if let Some(x) = sub.as_f64() {
                    if !x.is_finite() {
                        return Err(Error::field(path, "must be finite"));
                    }
                    if (k.ends_with("loss_db") || k.ends_with("_mw") || k.ends_with("_pj") || k.ends_with("_ns"))
                        && x < 0.0
                    {
                        return Err(Error::field(path, format!("must be >= 0, got {x}")));
                    }
                    if k.starts_with("area_") && x <= 0.0 {
                        return Err(Error::field(path, format!("must be > 0, got {x}")));
                    }
                    if k == "program_std" && x < 0.0 {
                        return Err(Error::field(path, "must be >= 0"));
                    }
                } else if sub.is_object() {
                    validate_numbers(sub, &path)?;
                }
            }
            Ok(())
        }
        _ => Ok(()),
    }
}

/// Minimum optical power (W) for a shot-noise-limited detector to reach
/// `snr_db`, solving `I² = snr · 2q(I + I_d)B` for the positive root.
pub fn pd_min_power(pd: &PdSpec, snr_db: f64) -> Result<f64> {
    if !snr_db.is_finite() {
        return Err(Error::NonFinite("pd_min_power"));
    }
    if snr_db < 0.0 {
        return Err(Error::field("snr_db", "must be >= 0 dB"));
    }
    let snr = crate::units::db_lin(snr_db);
    let k = snr * 2.0 * Q_E * pd.bandwidth_hz;
    // I² − kI − k·I_d = 0
    let disc = k * k + 4.0 * k * pd.dark_current_a;
    let root = 0.5 * (k + disc.sqrt());
    if root <= 0.0 || !root.is_finite() {
        return Err(Error::NoPositiveRoot);
    }
    Ok(root / pd.responsivity_a_per_w)
}

/// SNR of an ideal `bits`-bit quantizer, dB.
pub fn snr_required(bits: u32) -> f64 {
    6.02 * f64::from(bits) + 1.76
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn shipped_defaults() {
        let c = DeviceCatalog::shipped();
        assert_eq!(c.wsc.insertion_loss_db, 0.25);
        assert_eq!(c.escalator.insertion_loss_db, 0.1);
        assert_eq!(c.pcm.insertion_loss_db, 0.68);
        assert_eq!(c.pcm.cycle_ns(), 1000.0);
        assert_eq!(c.pcm.max_refresh_hz(), 1e6);
        assert_eq!(c.laser.channels_per_comb, 9);
        assert_eq!(c.pd.max_ports, 16);
        assert!(c.defaulted().is_empty());
    }

    #[test]
    fn negative_loss_names_field() {
        let err = DeviceCatalog::from_value(json!({
            "schema_version": 1,
            "awg": { "insertion_loss_db": -1.0 }
        }))
        .unwrap_err();
        match err {
            Error::InvalidField { field, .. } => assert_eq!(field, "awg.insertion_loss_db"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn missing_escalator_is_defaulted() {
        let mut v: Value = serde_json::from_str(DEFAULT_CATALOG_JSON).unwrap();
        v.as_object_mut().unwrap().remove("escalator");
        let c = DeviceCatalog::from_value(v).unwrap();
        assert_eq!(c.escalator.insertion_loss_db, 0.1);
        assert!(c.is_defaulted("escalator.insertion_loss_db"));
        assert_eq!(c.defaulted(), ["escalator.insertion_loss_db"]);
    }

    #[test]
    fn unknown_component_rejected() {
        let err = DeviceCatalog::from_value(json!({ "schema_version": 1, "flux_capacitor": {} })).unwrap_err();
        assert!(matches!(err, Error::UnknownComponent(ref n) if n == "flux_capacitor"));
    }

    #[test]
    fn unknown_field_rejected() {
        let err = DeviceCatalog::from_value(json!({ "schema_version": 1, "awg": { "gain_db": 3.0 } })).unwrap_err();
        assert!(err.to_string().contains("gain_db"), "{err}");
    }

    #[test]
    fn schema_version_required() {
        assert!(matches!(
            DeviceCatalog::from_value(json!({})).unwrap_err(),
            Error::MissingField(_)
        ));
        assert!(matches!(
            DeviceCatalog::from_value(json!({"schema_version": 2})).unwrap_err(),
            Error::SchemaVersion { found: 2, .. }
        ));
    }

    #[test]
    fn invariant_violations() {
        let bad = [
            (json!({"schema_version": 1, "comb_laser": {"wpe": 1.5}}), "comb_laser.wpe"),
            (json!({"schema_version": 1, "photodetector": {"sensitivity_dbm": 3.0}}), "photodetector.sensitivity_dbm"),
            (json!({"schema_version": 1, "photodetector": {"responsivity_a_per_w": 1.3}}), "photodetector.responsivity_a_per_w"),
            (json!({"schema_version": 1, "pcm": {"levels_bits": 6}}), "pcm.levels_bits"),
            (json!({"schema_version": 1, "sl_mzm": {"extinction_ratio_db": 0.0}}), "sl_mzm.extinction_ratio_db"),
            (json!({"schema_version": 1, "converters": {"p0_adc_ws": 0.0}}), "converters.p0_adc_ws"),
            (json!({"schema_version": 1, "wsc": {"area_width_um": 0.0}}), "wsc.area_width_um"),
        ];
        for (v, want) in bad {
            match DeviceCatalog::from_value(v) {
                Err(Error::InvalidField { field, .. }) => assert_eq!(field, want),
                other => panic!("{want}: {other:?}"),
            }
        }
    }

    #[test]
    fn reload_is_bit_identical() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("cat.json");
        std::fs::write(&p, DEFAULT_CATALOG_JSON).unwrap();
        let a = load_catalog(&p).unwrap();
        let b = load_catalog(&p).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.hash(), b.hash());
        assert_eq!(a.hash(), DeviceCatalog::shipped().hash());
    }

    #[test]
    fn override_changes_hash() {
        let c = DeviceCatalog::shipped();
        let d = c.with_override("escalator.insertion_loss_db", json!(0.2)).unwrap();
        assert_eq!(d.escalator.insertion_loss_db, 0.2);
        assert_ne!(c.hash(), d.hash());
        assert!(c.with_override("escalator.nope", json!(1)).is_err());
    }

    #[test]
    fn mzm_energy_lookup() {
        let m = DeviceCatalog::shipped().modulator;
        assert_eq!(m.energy_per_switch_fj(6), 119.8);
        assert_eq!(m.energy_per_switch_fj(2), 131.6);
        assert_eq!(m.energy_per_switch_fj(12), 117.1);
        assert!((m.energy_per_switch_fj(7) - 118.45).abs() < 1e-9);
    }

    #[test]
    fn snr_formula() {
        assert!((snr_required(8) - 49.92).abs() < 1e-9);
        assert!((snr_required(1) - 7.78).abs() < 1e-9);
        assert!((snr_required(6) - 37.88).abs() < 1e-9);
    }

    #[test]
    fn pd_min_power_closed_form() {
        let mut pd = DeviceCatalog::shipped().pd;
        pd.dark_current_a = 0.0;
        let p = pd_min_power(&pd, 0.0).unwrap();
        let expect = 2.0 * Q_E * pd.bandwidth_hz / pd.responsivity_a_per_w;
        assert!((p - expect).abs() <= 1e-12 * expect);
        pd.bandwidth_hz *= 2.0;
        let p2 = pd_min_power(&pd, 0.0).unwrap();
        assert!((p2 / p - 2.0).abs() < 1e-12);
    }

    #[test]
    fn pd_min_power_at_8_bits() {
        // Residual check of the quadratic at the table operating point.
        let pd = DeviceCatalog::shipped().pd;
        let p = pd_min_power(&pd, snr_required(8)).unwrap();
        assert!((p - 4.5e-4).abs() / 4.5e-4 < 0.02, "{p}");
        let i = p * pd.responsivity_a_per_w;
        let snr = 10f64.powf(snr_required(8) / 10.0);
        let resid = i * i - snr * 2.0 * Q_E * (i + pd.dark_current_a) * pd.bandwidth_hz;
        assert!(resid.abs() < 1e-9 * i * i);
    }

    #[test]
    fn pd_min_power_monotone() {
        let pd = DeviceCatalog::shipped().pd;
        let mut prev = 0.0;
        for s in [0.0, 10.0, 20.0, 37.88, 49.92] {
            let p = pd_min_power(&pd, s).unwrap();
            assert!(p > prev);
            prev = p;
        }
        let mut hi = pd.clone();
        hi.dark_current_a *= 10.0;
        assert!(pd_min_power(&hi, 20.0).unwrap() > pd_min_power(&pd, 20.0).unwrap());
        let mut wide = pd.clone();
        wide.bandwidth_hz *= 2.0;
        assert!(pd_min_power(&wide, 20.0).unwrap() > pd_min_power(&pd, 20.0).unwrap());
        assert!(pd_min_power(&pd, -1.0).is_err());
    }
}
