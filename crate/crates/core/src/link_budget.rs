//! Worst-case optical insertion loss from the equalized comb output to the
//! photodetector, for the baseline topology and each ablation variant.
//!
//! The critical path is the last column: it sees every cascaded splitter of
//! the row fanout. Baseline terms, in path order:
//!
//! ```text
//! AWG + 5·escalator + MMI + SL-MZM + splitter·(W/8 − 1)
//!     + 8·WSC + PCM + VOA + 10·log10(W)
//! ```

use serde::{Deserialize, Serialize};

use crate::catalog::{DeviceCatalog, LaserSpec, PdSpec};
use crate::error::{Error, Result};
use crate::geometry::{ArchitectureVariant, CoreGeometry};

const ESCALATORS_ON_PATH: f64 = 5.0;
const WSCS_ON_PATH: f64 = 8.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LossTerm {
    pub label: String,
    pub db: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinkBudgetReport {
    pub total_db: f64,
    pub terms: Vec<LossTerm>,
    pub geometry: CoreGeometry,
    pub variant: ArchitectureVariant,
}

impl LinkBudgetReport {
    pub fn term(&self, label: &str) -> Option<f64> {
        self.terms.iter().find(|t| t.label == label).map(|t| t.db)
    }
}

/// Ideal `1:W` power-splitting loss.
pub fn fanout_loss(cols: u32) -> Result<f64> {
    if cols == 0 {
        return Err(Error::Geometry("fanout over zero columns".into()));
    }
    Ok(10.0 * f64::from(cols).log10())
}

pub fn critical_path_il(
    geom: &CoreGeometry,
    cat: &DeviceCatalog,
    variant: &ArchitectureVariant,
) -> Result<LinkBudgetReport> {
    geom.validate()?;
    variant.validate()?;

    let mut terms: Vec<LossTerm> = Vec::with_capacity(12);
    let mut push = |label: &str, db: f64| {
        terms.push(LossTerm {
            label: label.to_string(),
            db,
        })
    };

    // Fanout width seen before any amplification.
    let fanout_cols = match *variant {
        ArchitectureVariant::SoaAssisted { fanout_before_amp } => fanout_before_amp.min(geom.cols),
        _ => geom.cols,
    };
    let splitter_stages = CoreGeometry {
        rows: geom.rows,
        cols: fanout_cols,
    }
    .splitter_stages();

    push("awg", cat.awg.insertion_loss_db);
    push("escalators", ESCALATORS_ON_PATH * cat.escalator.insertion_loss_db);
    push("mmi", cat.mmi.insertion_loss_db);
    push("sl_mzm", cat.modulator.insertion_loss_db);
    push("splitters", cat.splitter.insertion_loss_db * f64::from(splitter_stages));

    let optical_accumulation = matches!(
        variant,
        ArchitectureVariant::Baseline3D
            | ArchitectureVariant::SoaAssisted { .. }
            | ArchitectureVariant::Planar2D { .. }
            | ArchitectureVariant::ThermoOpticWeights
    );
    if optical_accumulation {
        push("wsc", WSCS_ON_PATH * cat.wsc.insertion_loss_db);
    }
    push("pcm", cat.pcm.insertion_loss_db);
    push("voa", cat.voa.insertion_loss_db);
    push("fanout", fanout_loss(fanout_cols)?);

    match *variant {
        ArchitectureVariant::Baseline3D | ArchitectureVariant::ThermoOpticWeights => {}
        ArchitectureVariant::SoaAssisted { .. } => {
            // The SOA gain restores the downstream budget; only its facets
            // load the pre-amplifier path.
            push("soa_facets", 2.0 * cat.soa.facet_loss_db);
        }
        ArchitectureVariant::Planar2D { crossings, y_branches } => {
            let c = crossings.unwrap_or(geom.cols + 8);
            let y = y_branches.unwrap_or(geom.cols);
            push("crossings", f64::from(c) * cat.crossing.insertion_loss_db);
            push("y_branches", f64::from(y) * cat.y_branch.insertion_loss_db);
        }
        ArchitectureVariant::MrrAccumulation { ring_loss_db } => {
            push("rings", 2.0 * f64::from(geom.rows) * ring_loss_db);
        }
        ArchitectureVariant::KclOnly => {
            // Every site is detected; the row power is split H ways more.
            push("per_site_detection", 10.0 * f64::from(geom.rows).log10());
        }
        ArchitectureVariant::CoherentCombining { stage_loss_db } => {
            let depth = f64::from(geom.rows).log2().ceil();
            push("combiner_tree", depth * stage_loss_db);
        }
    }

    let total_db = terms.iter().map(|t| t.db).sum();
    Ok(LinkBudgetReport {
        total_db,
        terms,
        geometry: *geom,
        variant: *variant,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum Feasibility {
    Feasible { margin_db: f64 },
    Infeasible { shortfall_db: f64 },
}

impl Feasibility {
    pub fn is_feasible(&self) -> bool {
        matches!(self, Self::Feasible { .. })
    }
}

/// Does one comb line, after the path loss, still clear the PD sensitivity?
pub fn variant_feasibility(report: &LinkBudgetReport, laser: &LaserSpec, pd: &PdSpec) -> Feasibility {
    let received = laser.channel_power_dbm - report.total_db;
    let margin = received - pd.sensitivity_dbm;
    if margin >= 0.0 {
        Feasibility::Feasible { margin_db: margin }
    } else {
        Feasibility::Infeasible { shortfall_db: -margin }
    }
}
