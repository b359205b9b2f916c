mod common;

use common::{baseline_il, laser_w, F_PARETO};
use proptest::prelude::*;
use ptc_core::report::{standard_sweep_cores, sweep, SweepConfig};
use ptc_core::workload::schedule_with;
use ptc_core::*;
use serde_json::json;

fn cat() -> DeviceCatalog {
    DeviceCatalog::shipped()
}

fn g(h: u32, w: u32) -> CoreGeometry {
    CoreGeometry::new(h, w).unwrap()
}

#[test]
fn baseline_il_matches_term_by_term_oracle() {
    for w in [1, 8, 16, 64, 256, 1024] {
        let r = critical_path_il(&g(144, w), &cat(), &ArchitectureVariant::Baseline3D).unwrap();
        assert!((r.total_db - baseline_il(w)).abs() < 1e-9, "W={w}");
    }
}

#[test]
fn variant_deltas_match_oracle() {
    let c = cat();
    let geom = g(144, 256);
    let base = baseline_il(256);
    let il = |v: ArchitectureVariant| critical_path_il(&geom, &c, &v).unwrap().total_db;
    assert!((il(ArchitectureVariant::KclOnly) - (base - 2.0 + 10.0 * 144f64.log10())).abs() < 1e-9);
    assert!((il(ArchitectureVariant::planar_2d()) - (base + 264.0 * 0.23 + 256.0 * 0.1)).abs() < 1e-9);
    assert!((il(ArchitectureVariant::mrr()) - (base - 2.0 + 288.0 * 0.92221)).abs() < 1e-9);
    assert!((il(ArchitectureVariant::coherent()) - (base - 2.0 + 8.0 * 3.0)).abs() < 1e-9);
    let soa = base - 0.02 * 31.0 - 10.0 * 256f64.log10() + 0.02 * 15.0 + 10.0 * 128f64.log10() + 2.0;
    assert!((il(ArchitectureVariant::soa_assisted()) - soa).abs() < 1e-9);
    assert_eq!(il(ArchitectureVariant::ThermoOpticWeights), base);
}

#[test]
fn laser_power_matches_oracle_across_variants() {
    let c = cat();
    for v in ArchitectureVariant::ablation_set() {
        let p = total_power(&g(144, 256), &c, &v, &PrecisionSpec::default(), F_PARETO, LaserMode::AblationCalibrated)
            .unwrap();
        let il = p.assumptions.critical_path_il_db;
        let want = laser_w(-25.0, il, 8, 1.17, 1.0);
        let got = p.term("laser").unwrap().watts;
        assert!(((got - want) / want).abs() < 1e-12, "{v}");
    }
}

#[test]
fn converter_overhead_matches_oracle() {
    let p = total_power(
        &g(144, 256),
        &cat(),
        &ArchitectureVariant::Baseline3D,
        &PrecisionSpec::default(),
        F_PARETO,
        LaserMode::AblationCalibrated,
    )
    .unwrap();
    let dac = 144.0 * 2.5e-14 * 64.0 / 7.0 * F_PARETO;
    let adc = 256.0 * 2.5e-14 * 256.0 / 9.0 * F_PARETO;
    let prog = 36864.0 * (0.09e-3 + 2.5e-14 * 128.0 / 8.0 * 2e7);
    assert!((p.term("input_dac").unwrap().watts - dac).abs() < 1e-12);
    assert!((p.term("output_adc").unwrap().watts - adc).abs() < 1e-12);
    assert!((p.term("pcm_programming").unwrap().watts - prog).abs() < 1e-9);
    assert!((p.term("comb_control").unwrap().watts - 2.0).abs() < 1e-12);
}

#[test]
fn tops_and_fps_per_watt_identities() {
    let c = cat();
    let geom = g(144, 256);
    let p = total_power(&geom, &c, &ArchitectureVariant::Baseline3D, &PrecisionSpec::default(), F_PARETO, LaserMode::default())
        .unwrap();
    let s = schedule(&resnet50(), &geom, &c.pcm).unwrap();
    let r = estimate_perf(&s, &p, F_PARETO, &c).unwrap();
    assert!((r.tops_per_w * p.total_w / r.peak_tops - 1.0).abs() < 1e-9);
    assert!((r.fps_per_w * p.total_w / r.fps - 1.0).abs() < 1e-9);
    assert!((r.fps * r.latency_s - 1.0).abs() < 1e-12);
    let lat = 711.0 * 1e-6 + s.stream_cycles() as f64 / F_PARETO;
    assert!((r.latency_s - lat).abs() < 1e-15);
}

#[test]
fn enlarging_core_helps_fixed_workload() {
    let c = cat();
    let w = resnet50();
    let cfg = SweepConfig {
        workload: &w,
        variant: ArchitectureVariant::Baseline3D,
        precision: PrecisionSpec::default(),
        clock_hz: F_PARETO,
        laser_mode: LaserMode::default(),
        mapping: MappingMode::Packed,
    };
    let rows = sweep(&standard_sweep_cores(), &cfg, &c).unwrap();
    for pair in rows.windows(2) {
        assert!(pair[1].fps >= pair[0].fps, "{} -> {}", pair[0].core, pair[1].core);
        assert!(pair[1].energy_mj <= pair[0].energy_mj, "{} -> {}", pair[0].core, pair[1].core);
    }
    let fps_per_w_at_calibration = rows.last().unwrap().fps / rows.last().unwrap().total_w;
    assert!((fps_per_w_at_calibration - rows.last().unwrap().fps_per_w).abs() < 1e-9);
}

#[test]
fn one_tap_mapping_is_slower() {
    let c = cat();
    let geom = g(144, 256);
    let packed = schedule_with(&resnet50(), &geom, &c.pcm, MappingMode::Packed).unwrap();
    let sparse = schedule_with(&resnet50(), &geom, &c.pcm, MappingMode::OneTapPerGroup).unwrap();
    assert_eq!(sparse.tile_loads(), 3376);
    assert!(sparse.tile_loads() > packed.tile_loads());
}

#[test]
fn catalog_file_errors() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("c.json");
    std::fs::write(&p, "{ not json").unwrap();
    assert!(matches!(load_catalog(&p), Err(Error::Parse(_))));
    assert!(matches!(load_catalog(dir.path().join("missing.json")), Err(Error::Io { .. })));
    std::fs::write(&p, json!({"schema_version": 1, "escalator": {"insertion_loss_db": 0.3}}).to_string()).unwrap();
    let c = load_catalog(&p).unwrap();
    assert_eq!(c.escalator.insertion_loss_db, 0.3);
    assert!(c.is_defaulted("awg.insertion_loss_db"));
    assert!(!c.is_defaulted("escalator.insertion_loss_db"));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn il_sum_and_monotone_in_losses(
        awg in 0.0f64..5.0, wsc in 0.0f64..1.0, split in 0.0f64..0.5, extra in 0.0f64..2.0,
        groups in 1u32..64,
    ) {
        let w = groups * 8;
        let c = cat()
            .with_override("awg.insertion_loss_db", json!(awg)).unwrap()
            .with_override("wsc.insertion_loss_db", json!(wsc)).unwrap()
            .with_override("splitter.insertion_loss_db", json!(split)).unwrap();
        let more = c.with_override("wsc.insertion_loss_db", json!(wsc + extra)).unwrap();
        for v in ArchitectureVariant::ablation_set() {
            let r = critical_path_il(&g(144, w), &c, &v).unwrap();
            let s: f64 = r.terms.iter().map(|t| t.db).sum();
            prop_assert!((s - r.total_db).abs() < 1e-9);
            prop_assert!(r.terms.iter().all(|t| t.db >= 0.0));
            let r2 = critical_path_il(&g(144, w), &more, &v).unwrap();
            prop_assert!(r2.total_db >= r.total_db);
            let wider = critical_path_il(&g(144, w + 8), &c, &v).unwrap();
            prop_assert!(wider.total_db >= r.total_db);
        }
    }

    #[test]
    fn area_exactly_linear(groups in 1u32..40, rowgroups in 1u32..40) {
        let c = cat();
        let a = crossbar_area(&g(9 * rowgroups, 8 * groups), &c).unwrap();
        let taller = crossbar_area(&g(9 * rowgroups + 9, 8 * groups), &c).unwrap();
        let wider = crossbar_area(&g(9 * rowgroups, 8 * groups + 8), &c).unwrap();
        prop_assert!((taller.crossbar_h_mm - a.crossbar_h_mm - 1.8).abs() < 1e-9);
        prop_assert!((wider.crossbar_w_mm - a.crossbar_w_mm - 0.7).abs() < 1e-9);
        prop_assert!(taller.total_area_mm2 > a.total_area_mm2);
        prop_assert!(wider.total_area_mm2 > a.total_area_mm2);
        prop_assert_eq!(a.total_area_mm2, a.crossbar_w_mm * a.crossbar_h_mm);
    }

    #[test]
    fn power_breakdown_sums(groups in 1u32..32, rowgroups in 1u32..32, f in 1e8f64..1e9) {
        let c = cat();
        for v in ArchitectureVariant::ablation_set() {
            let r = total_power(&g(9 * rowgroups, 8 * groups), &c, &v, &PrecisionSpec::default(), f, LaserMode::WallPlug).unwrap();
            let fs: f64 = r.breakdown.iter().map(|t| t.fraction).sum();
            prop_assert!((fs - 1.0).abs() < 1e-9);
            let ws: f64 = r.breakdown.iter().map(|t| t.watts).sum();
            prop_assert!((ws - r.total_w).abs() <= 1e-12 * r.total_w);
        }
    }

    #[test]
    fn tiles_cover_lowered_rows(c_in in 1u32..600, c_out in 1u32..2100, k in prop_oneof![Just(1u32), Just(3u32)],
                                rg in 1u32..17, cg in 1u32..33) {
        let geom = g(9 * rg, 8 * cg);
        let l = ConvLayerSpec::conv("p", c_in, c_out, k, 4, 4);
        for mode in [MappingMode::Packed, MappingMode::OneTapPerGroup] {
            let d = workload::lower_conv_with(&l, &geom, mode).unwrap();
            prop_assert!(d.tiles_row * u64::from(d.usable_rows) >= d.rows);
            prop_assert!((d.tiles_row - 1) * u64::from(d.usable_rows) < d.rows);
            prop_assert!(d.tiles_col * u64::from(geom.cols) >= d.cols);
        }
    }
}
