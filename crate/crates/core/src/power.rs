//! System power: inference laser, converters, modulator drivers, VOAs,
//! PD/TIA, comb control, SOA drive, weight hold or programming interface.
//!
//! All public functions return watts unless the name says otherwise.

use serde::{Deserialize, Serialize};

use crate::catalog::DeviceCatalog;
use crate::error::{Error, Result};
use crate::geometry::{ArchitectureVariant, CoreGeometry};
use crate::link_budget::{critical_path_il, variant_feasibility, Feasibility};
use crate::units::db_lin;

/// Bit widths of inputs, weights, and outputs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PrecisionSpec {
    pub b_in: u32,
    pub b_w: u32,
    pub b_out: u32,
}

impl Default for PrecisionSpec {
    fn default() -> Self {
        Self { b_in: 6, b_w: 7, b_out: 8 }
    }
}

impl PrecisionSpec {
    pub fn validate(&self) -> Result<()> {
        for (name, b) in [("b_in", self.b_in), ("b_w", self.b_w), ("b_out", self.b_out)] {
            if !(1..=16).contains(&b) {
                return Err(Error::Precision(format!("{name} = {b} outside 1..=16")));
            }
        }
        Ok(())
    }
}

/// How the laser wall-plug efficiency enters the laser power.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LaserMode {
    /// Efficiency fixed at 1. Reproduces the published ablation figures.
    #[default]
    AblationCalibrated,
    /// Divides by the catalog comb-laser wall-plug efficiency.
    WallPlug,
}

impl LaserMode {
    pub fn wpe(&self, cat: &DeviceCatalog) -> f64 {
        match self {
            Self::AblationCalibrated => 1.0,
            Self::WallPlug => cat.laser.wpe,
        }
    }
}

impl std::str::FromStr for LaserMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "calibrated" | "ablation" | "ablation_calibrated" => Ok(Self::AblationCalibrated),
            "wallplug" | "wall_plug" | "wpe" => Ok(Self::WallPlug),
            _ => Err(Error::Usage(format!("unknown laser mode `{s}`"))),
        }
    }
}

/// Electrical laser power needed so the detector still sees its sensitivity
/// after `il_db` of loss, scaled for `b_out` output levels and the
/// modulator's finite extinction.
pub fn laser_power(s_dbm: f64, il_db: f64, b_out: u32, er_db: f64, wpe: f64) -> Result<f64> {
    if !s_dbm.is_finite() || !il_db.is_finite() || er_db.is_nan() {
        return Err(Error::NonFinite("laser_power"));
    }
    if er_db <= 0.0 {
        return Err(Error::ZeroExtinction);
    }
    if !(wpe > 0.0 && wpe <= 1.0) {
        return Err(Error::field("wpe", "must lie in (0, 1]"));
    }
    let er_penalty = 1.0 / (1.0 - db_lin(-er_db));
    let p_mw = db_lin(s_dbm + il_db) * 2f64.powi(b_out as i32) / wpe * er_penalty;
    Ok(p_mw * 1e-3)
}

fn converter_power(b: u32, f: f64, p0: f64, who: &'static str) -> Result<f64> {
    if b == 0 {
        return Err(Error::Precision(format!("{who}: bits must be >= 1")));
    }
    if !(f > 0.0 && f.is_finite()) {
        return Err(Error::Frequency(f));
    }
    Ok(p0 * 2f64.powi(b as i32) / f64::from(b + 1) * f)
}

pub fn dac_power(b: u32, f: f64, p0: f64) -> Result<f64> {
    converter_power(b, f, p0, "dac_power")
}

pub fn adc_power(b: u32, f: f64, p0: f64) -> Result<f64> {
    converter_power(b, f, p0, "adc_power")
}

/// Electrical energy (pJ) one VCSEL spends to deliver `e_opt_pj` to a PCM
/// cell through a grating coupler of loss `l_gc_db`.
pub fn vcsel_program_energy(e_opt_pj: f64, l_gc_db: f64, eta: f64) -> Result<f64> {
    if !(eta > 0.0 && eta <= 1.0) {
        return Err(Error::field("eta_vcsel", "must lie in (0, 1]"));
    }
    if !e_opt_pj.is_finite() || !l_gc_db.is_finite() {
        return Err(Error::NonFinite("vcsel_program_energy"));
    }
    Ok(e_opt_pj * db_lin(l_gc_db) / eta)
}

/// Electrical program + erase energy of one cell update, J.
pub fn cell_update_energy(cat: &DeviceCatalog) -> Result<f64> {
    let gc = cat.grating_coupler.insertion_loss_db;
    let eta = cat.vcsel.efficiency;
    let prog = vcsel_program_energy(cat.pcm.program_energy_pj, gc, eta)?;
    let erase = vcsel_program_energy(cat.pcm.erase_energy_pj, gc, eta)?;
    Ok((prog + erase) * 1e-12)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerTerm {
    pub label: String,
    pub watts: f64,
    pub fraction: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerAssumptions {
    pub b_in: u32,
    pub b_w: u32,
    pub b_out: u32,
    pub frequency_hz: f64,
    pub variant: ArchitectureVariant,
    pub laser_mode: LaserMode,
    pub critical_path_il_db: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerReport {
    pub total_w: f64,
    pub breakdown: Vec<PowerTerm>,
    pub assumptions: PowerAssumptions,
    pub feasibility: Feasibility,
}

impl PowerReport {
    pub fn term(&self, label: &str) -> Option<&PowerTerm> {
        self.breakdown.iter().find(|t| t.label == label)
    }

    /// Largest contributor.
    pub fn dominant(&self) -> &PowerTerm {
        self.breakdown
            .iter()
            .max_by(|a, b| a.watts.total_cmp(&b.watts))
            .expect("breakdown is never empty")
    }

    /// The report with one term dropped and fractions renormalized.
    pub fn without(&self, label: &str) -> Self {
        let kept: Vec<(String, f64)> = self
            .breakdown
            .iter()
            .filter(|t| t.label != label)
            .map(|t| (t.label.clone(), t.watts))
            .collect();
        let (total_w, breakdown) = finish(kept);
        Self {
            total_w,
            breakdown,
            ..self.clone()
        }
    }
}

fn finish(terms: Vec<(String, f64)>) -> (f64, Vec<PowerTerm>) {
    let total: f64 = terms.iter().map(|t| t.1).sum();
    let breakdown = terms
        .into_iter()
        .map(|(label, watts)| PowerTerm {
            label,
            watts,
            fraction: if total > 0.0 { watts / total } else { 0.0 },
        })
        .collect();
    (total, breakdown)
}

pub fn total_power(
    geom: &CoreGeometry,
    cat: &DeviceCatalog,
    variant: &ArchitectureVariant,
    precision: &PrecisionSpec,
    f: f64,
    mode: LaserMode,
) -> Result<PowerReport> {
    precision.validate()?;
    if !(f > 0.0 && f.is_finite()) {
        return Err(Error::Frequency(f));
    }
    let link = critical_path_il(geom, cat, variant)?;
    let h = f64::from(geom.rows);
    let w = f64::from(geom.cols);
    let conv = &cat.converters;

    let mut terms: Vec<(String, f64)> = Vec::with_capacity(10);
    let mut push = |l: &str, v: f64| terms.push((l.to_string(), v));

    push(
        "laser",
        laser_power(
            cat.pd.sensitivity_dbm,
            link.total_db,
            precision.b_out,
            cat.modulator.extinction_ratio_db,
            mode.wpe(cat),
        )?,
    );
    push("input_dac", h * dac_power(precision.b_in, f, conv.p0_dac_ws)?);
    push(
        "mzm_driver",
        h * cat.modulator.energy_per_switch_fj(precision.b_in) * 1e-15 * f,
    );
    push("voa", h * cat.voa.power_mw() * 1e-3);
    push("pd_tia", w * cat.pd.tia_power_mw * 1e-3);
    push("output_adc", w * adc_power(precision.b_out, f, conv.p0_adc_ws)?);
    push(
        "comb_control",
        f64::from(geom.groups()) * cat.laser.control_power_mw * 1e-3,
    );
    if variant.uses_pcm() {
        // VCSEL driver standby plus one weight DAC per cell at the pulse rate.
        let per_cell = cat.vcsel.driver_standby_mw * 1e-3 + dac_power(precision.b_w, conv.weight_dac_rate_hz, conv.p0_dac_ws)?;
        push("pcm_programming", h * w * per_cell);
    } else {
        push("phase_shifter_hold", h * w * cat.thermo_optic.hold_power_mw * 1e-3);
    }
    if matches!(variant, ArchitectureVariant::SoaAssisted { .. }) {
        push("soa_drive", h * cat.soa.drive_power_mw * 1e-3);
    }

    let (total_w, breakdown) = finish(terms);
    Ok(PowerReport {
        total_w,
        breakdown,
        assumptions: PowerAssumptions {
            b_in: precision.b_in,
            b_w: precision.b_w,
            b_out: precision.b_out,
            frequency_hz: f,
            variant: *variant,
            laser_mode: mode,
            critical_path_il_db: link.total_db,
        },
        feasibility: variant_feasibility(&link, &cat.laser, &cat.pd),
    })
}
