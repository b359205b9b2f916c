//! Analytical model of a 3D photonic in-memory tensor core: link budget,
//! power, area, workload throughput and energy, plus a functional simulator
//! of the noisy analog datapath.

pub mod analog;
pub mod area;
pub mod catalog;
pub mod error;
pub mod geometry;
pub mod link_budget;
pub mod power;
pub mod report;
pub mod units;
pub mod workload;

pub use area::{crossbar_area, crossbar_area_with, reticle_check, reticle_fit, AreaOptions, AreaReport, ReticleVerdict};
pub use catalog::{load_catalog, pd_min_power, snr_required, DeviceCatalog};
pub use error::{Error, Result};
pub use geometry::{ArchitectureVariant, CoreGeometry};
pub use link_budget::{critical_path_il, fanout_loss, variant_feasibility, Feasibility, LinkBudgetReport};
pub use power::{
    adc_power, dac_power, laser_power, total_power, vcsel_program_energy, LaserMode, PowerReport, PrecisionSpec,
};
pub use report::{evaluate, Evaluation, OutputFormat, Scenario};
pub use units::{db_to_linear, dbm_to_mw, linear_to_db, mw_to_dbm};
pub use workload::{
    estimate_perf, load_workload, lower_conv, peak_tops, resnet50, schedule, schedule_with, Clock, ConvLayerSpec,
    FrequencyProfile, LayerKind, MappingMode, PerfReport, TileSchedule, F_PARETO_HZ,
};

/// Tool version embedded in every report header.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
