use std::io::BufReader;

use netdiv_core::analysis::{analyze_scenario, MeasureOptions, PointStatus};
use netdiv_core::connectivity::{effective_diameter, relative_controllability, DiameterOptions};
use netdiv_core::degree::{gini_coefficient, jain_index, relative_entropy, DegreeStats};
use netdiv_core::graph::{build_snapshot, GraphSnapshot};
use netdiv_core::growth::{generate, GrowthConfig, GrowthModel};
use netdiv_core::ingest::{
    build_connected_series, build_full_series, parse_edge_file, write_edge_file, ParseOptions,
    Scenario, ScenarioConfig,
};
use netdiv_core::linkpred::fractional_rank;
use netdiv_core::spectral::SpectralOptions;
use netdiv_core::trend::MeasureId;
use proptest::prelude::*;

fn triangle_closing(n: usize, seed: u64) -> netdiv_core::graph::TemporalEdgeList {
    generate(&GrowthConfig {
        model: GrowthModel::TriangleClosing,
        n_target: n,
        seed,
        ..Default::default()
    })
    .unwrap()
    .list
}

#[test]
fn generated_lists_survive_a_file_round_trip() {
    for model in [
        GrowthModel::BarabasiAlbert,
        GrowthModel::EigenvectorPa,
        GrowthModel::TriangleClosing,
    ] {
        let list = generate(&GrowthConfig {
            model,
            n_target: 150,
            seed: 9,
            ..Default::default()
        })
        .unwrap()
        .list;
        let mut buf = Vec::new();
        write_edge_file(&list, &mut buf).unwrap();
        let back = parse_edge_file(BufReader::new(&buf[..]), ParseOptions::default()).unwrap();
        assert_eq!(back.list.edges(), list.edges(), "{model:?}");
    }
}

#[test]
fn connected_series_stays_on_the_anchor_vertices() {
    let list = triangle_closing(200, 3);
    let cfg = ScenarioConfig {
        scenario: Scenario::Connected,
        timepoints: 40,
        t1: 30,
        exclude_anchor: false,
    };
    let series = build_connected_series(&list, &cfg).unwrap();
    assert_eq!(series.timepoints, (30..=40).collect::<Vec<_>>());
    for g in &series.snapshots {
        assert_eq!(g.labels(), &series.anchor_vertices[..]);
        assert!(g.is_connected());
    }
    let edges: Vec<u64> = series.snapshots.iter().map(|g| g.m()).collect();
    assert!(edges.windows(2).all(|w| w[0] <= w[1]));

    let full = build_full_series(&list, &cfg).unwrap();
    assert_eq!(full.len(), 40);
    assert_eq!(full[39].m() as usize, list.len());
}

#[test]
fn scenario_analysis_reports_one_point_per_timepoint() {
    let list = triangle_closing(120, 4);
    let opts = MeasureOptions {
        measures: [
            MeasureId::Clustering,
            MeasureId::EffectiveDiameter,
            MeasureId::FractionalRank,
        ]
        .into_iter()
        .collect(),
        ..Default::default()
    };
    for scenario in [Scenario::Full, Scenario::Connected] {
        let cfg = ScenarioConfig {
            scenario,
            timepoints: 20,
            t1: 15,
            exclude_anchor: true,
        };
        let s = analyze_scenario(&list, "tc", &cfg, &opts).unwrap();
        assert_eq!(s.measures.len(), 3);
        for (_, points) in &s.measures {
            let want = cfg.series_timepoints();
            assert_eq!(points.iter().map(|p| p.timepoint).collect::<Vec<_>>(), want);
            assert!(points
                .iter()
                .all(|p| p.status == PointStatus::Ok && p.value.is_some()));
        }
    }
}

fn snapshot_from(pairs: &[(u64, u64)], n: u64) -> Option<GraphSnapshot> {
    let edges: Vec<(u64, u64)> = pairs
        .iter()
        .map(|&(a, b)| (a % n, b % n))
        .filter(|(a, b)| a != b)
        .collect();
    (!edges.is_empty()).then(|| GraphSnapshot::from_edges(edges, &[], false).unwrap())
}

proptest! {
    #[test]
    fn measures_stay_in_range(n in 3u64..40, pairs in prop::collection::vec((0u64..40, 0u64..40), 1..150)) {
        let Some(g) = snapshot_from(&pairs, n) else { return Ok(()) };
        let ds = DegreeStats::from_snapshot(&g).unwrap();
        if let Some(gini) = gini_coefficient(&ds) {
            prop_assert!((0.0..1.0).contains(&gini));
        }
        let j = jain_index(&ds);
        prop_assert!(j > 0.0 && j <= 1.0 + 1e-12);
        if let Some(h) = relative_entropy(&ds) {
            prop_assert!(h > 0.0 && h <= 1.0 + 1e-12);
        }
        let c = relative_controllability(&g).unwrap().relative;
        prop_assert!(c > 0.0 && c <= 1.0);
        prop_assert!(fractional_rank(&g, &SpectralOptions::default()).unwrap() >= 1.0 - 1e-9);
        if g.is_connected() && g.n() > 2 {
            let d = effective_diameter(&g, &DiameterOptions { sample_size: g.n(), ..Default::default() }).unwrap();
            prop_assert!(d >= 0.0 && d <= (g.n() - 1) as f64);
        }
    }

    #[test]
    fn snapshots_grow_monotonically(seed in 0u64..1000) {
        let list = triangle_closing(40, seed);
        let mut prev = (0usize, 0u64);
        for k in (1..=list.len()).step_by(7) {
            let g = build_snapshot(&list, k).unwrap();
            prop_assert!(g.n() >= prev.0 && g.m() > prev.1);
            prev = (g.n(), g.m());
        }
    }
}
