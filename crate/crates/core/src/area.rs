//! Crossbar footprint from unit-cell tiling plus peripheral strips, and
//! reticle fit.
//!
//! Width runs along the input side: comb, AWG, VOA and modulator strips,
//! then one group pitch per eight columns. Height is one unit cell per row
//! plus the detector strip. Lengths are summed in µm and converted once so
//! that nominal layouts come out exact.

use serde::{Deserialize, Serialize};

use crate::catalog::DeviceCatalog;
use crate::error::{Error, Result};
use crate::geometry::{CoreGeometry, COLS_PER_MMI};

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct AreaOptions {
    /// Shrunk unit-cell width, µm. The group pitch scales with it.
    pub compact_unit_cell_width_um: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Strip {
    pub label: String,
    pub mm: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReticleVerdict {
    pub fits: bool,
    /// Crossbar placed with its width along the reticle height.
    pub rotated: bool,
    pub residual_area_mm2: Option<f64>,
    /// Per-axis excess in the least-bad orientation, zero when it fits.
    pub shortfall_w_mm: f64,
    pub shortfall_h_mm: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AreaReport {
    pub crossbar_w_mm: f64,
    pub crossbar_h_mm: f64,
    pub total_area_mm2: f64,
    pub unit_cell_w_um: f64,
    pub unit_cell_h_um: f64,
    pub reticle_w_mm: f64,
    pub reticle_h_mm: f64,
    pub fits_reticle: bool,
    pub residual_area_mm2: Option<f64>,
    pub width_strips: Vec<Strip>,
    pub height_strips: Vec<Strip>,
}

pub fn crossbar_area(geom: &CoreGeometry, cat: &DeviceCatalog) -> Result<AreaReport> {
    crossbar_area_with(geom, cat, &AreaOptions::default())
}

pub fn crossbar_area_with(geom: &CoreGeometry, cat: &DeviceCatalog, opts: &AreaOptions) -> Result<AreaReport> {
    geom.validate()?;
    let lay = &cat.layout;
    let (cell_w, pitch) = match opts.compact_unit_cell_width_um {
        None => (lay.unit_cell_width_um, lay.group_pitch_um),
        Some(cw) if cw > 0.0 && cw.is_finite() => (cw, lay.group_pitch_um * cw / lay.unit_cell_width_um),
        Some(cw) => {
            return Err(Error::field(
                "compact_unit_cell_width_um",
                format!("must be positive, got {cw}"),
            ))
        }
    };
    let col_groups = f64::from(geom.cols.div_ceil(COLS_PER_MMI));
    let width_um = [
        ("comb", lay.comb_strip_um),
        ("awg", lay.awg_strip_um),
        ("voa", lay.voa_strip_um),
        ("sl_mzm", lay.mzm_strip_um),
        ("column_groups", col_groups * pitch),
    ];
    let height_um = [
        ("rows", f64::from(geom.rows) * lay.unit_cell_height_um),
        ("photodetectors", lay.pd_strip_um),
    ];
    let w_mm = width_um.iter().map(|s| s.1).sum::<f64>() / 1000.0;
    let h_mm = height_um.iter().map(|s| s.1).sum::<f64>() / 1000.0;
    let strips = |s: &[(&str, f64)]| {
        s.iter()
            .map(|(l, um)| Strip {
                label: l.to_string(),
                mm: um / 1000.0,
            })
            .collect()
    };

    let verdict = reticle_fit(w_mm, h_mm, lay.reticle_width_mm, lay.reticle_height_mm);
    Ok(AreaReport {
        crossbar_w_mm: w_mm,
        crossbar_h_mm: h_mm,
        total_area_mm2: w_mm * h_mm,
        unit_cell_w_um: cell_w,
        unit_cell_h_um: lay.unit_cell_height_um,
        reticle_w_mm: lay.reticle_width_mm,
        reticle_h_mm: lay.reticle_height_mm,
        fits_reticle: verdict.fits,
        residual_area_mm2: verdict.residual_area_mm2,
        width_strips: strips(&width_um),
        height_strips: strips(&height_um),
    })
}

/// Checks `report` against a `reticle_w × reticle_h` mm field.
pub fn reticle_check(report: &AreaReport, reticle_w_mm: f64, reticle_h_mm: f64) -> ReticleVerdict {
    reticle_fit(report.crossbar_w_mm, report.crossbar_h_mm, reticle_w_mm, reticle_h_mm)
}

pub fn reticle_fit(w: f64, h: f64, rw: f64, rh: f64) -> ReticleVerdict {
    let short = |a: f64, b: f64| ((a - rw).max(0.0), (b - rh).max(0.0));
    let upright = short(w, h);
    let turned = short(h, w);
    let residual = rw * rh - w * h;
    let ok = |s: (f64, f64)| s.0 == 0.0 && s.1 == 0.0;
    if ok(upright) || ok(turned) {
        return ReticleVerdict {
            fits: true,
            rotated: !ok(upright),
            residual_area_mm2: Some(residual),
            shortfall_w_mm: 0.0,
            shortfall_h_mm: 0.0,
        };
    }
    let (rotated, s) = if turned.0 + turned.1 < upright.0 + upright.1 {
        (true, turned)
    } else {
        (false, upright)
    };
    ReticleVerdict {
        fits: false,
        rotated,
        residual_area_mm2: None,
        shortfall_w_mm: s.0,
        shortfall_h_mm: s.1,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn area(h: u32, w: u32) -> AreaReport {
        crossbar_area(&CoreGeometry::new(h, w).unwrap(), &DeviceCatalog::shipped()).unwrap()
    }

    #[test]
    fn nominal_core_is_exact() {
        let a = area(144, 256);
        assert_eq!(a.crossbar_w_mm, 24.3);
        assert_eq!(a.crossbar_h_mm, 28.9);
        assert!(a.fits_reticle);
        assert!((a.residual_area_mm2.unwrap() - 155.73).abs() < 1e-9);
        assert_eq!((a.unit_cell_w_um, a.unit_cell_h_um), (100.0, 200.0));
    }

    #[test]
    fn minimum_group_core() {
        let a = area(9, 8);
        assert!((a.crossbar_w_mm - 2.6).abs() < 1e-12);
        assert!((a.crossbar_h_mm - 1.9).abs() < 1e-12);
    }

    #[test]
    fn zero_rows_rejected() {
        let g = CoreGeometry { rows: 0, cols: 8 };
        assert!(crossbar_area(&g, &DeviceCatalog::shipped()).is_err());
    }

    #[test]
    fn swap_and_shortfall() {
        let v = reticle_fit(27.0, 10.0, 26.0, 33.0);
        assert!(v.fits && v.rotated);
        let big = area(297, 512);
        assert!(!big.fits_reticle);
        let v = reticle_check(&big, 26.0, 33.0);
        assert!(!v.fits);
        assert!(v.shortfall_w_mm > 0.0 || v.shortfall_h_mm > 0.0);
        assert!(v.residual_area_mm2.is_none());
    }

    #[test]
    fn linear_in_rows_and_groups() {
        let a = area(144, 256);
        let b = area(153, 256);
        assert!(((b.crossbar_h_mm - a.crossbar_h_mm) - 9.0 * 0.2).abs() < 1e-12);
        let c = area(144, 264);
        assert!(((c.crossbar_w_mm - a.crossbar_w_mm) - 0.7).abs() < 1e-12);
        assert!(b.total_area_mm2 > a.total_area_mm2 && c.total_area_mm2 > a.total_area_mm2);
    }

    #[test]
    fn compact_cell_shrinks_width() {
        let g = CoreGeometry::new(144, 256).unwrap();
        let cat = DeviceCatalog::shipped();
        let opts = AreaOptions {
            compact_unit_cell_width_um: Some(75.0),
        };
        let a = crossbar_area_with(&g, &cat, &opts).unwrap();
        assert!((a.crossbar_w_mm - (1.9 + 32.0 * 0.525)).abs() < 1e-9);
        assert_eq!(a.crossbar_h_mm, 28.9);
    }
}
