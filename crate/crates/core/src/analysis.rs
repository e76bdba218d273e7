//! Evaluation of the measure catalog over the snapshot series of one
//! dataset.

use std::collections::BTreeSet;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::connectivity::{
    algebraic_connectivity_measure, effective_diameter, relative_controllability,
    rw_return_probability, DiameterOptions,
};
use crate::degree::{
    gini_coefficient, jain_index, power_law_exponent, relative_entropy, DegreeStats,
};
use crate::error::{Error, Result};
use crate::graph::{
    average_degree, build_snapshot, induced_subgraph, largest_connected_component, GraphSnapshot,
    NodeId, TemporalEdgeList,
};
use crate::ingest::{make_timepoints, Scenario, ScenarioConfig};
use crate::linkpred::{clustering_coefficient, SpectrumSummary};
use crate::spectral::SpectralOptions;
use crate::trend::MeasureId;

/// Subgraph on which the return probability is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ThetaScope {
    Lcc,
    NonIsolated,
}

impl std::str::FromStr for ThetaScope {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "lcc" => Ok(ThetaScope::Lcc),
            "nonisolated" => Ok(ThetaScope::NonIsolated),
            _ => Err(Error::Config(format!("unknown theta scope {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasureOptions {
    pub measures: BTreeSet<MeasureId>,
    pub spectral: SpectralOptions,
    pub diameter: DiameterOptions,
    pub rw_steps: u32,
    pub theta_scope: ThetaScope,
}

impl Default for MeasureOptions {
    fn default() -> Self {
        Self {
            measures: MeasureId::ALL.into_iter().collect(),
            spectral: SpectralOptions::default(),
            diameter: DiameterOptions::default(),
            rw_steps: 4,
            theta_scope: ThetaScope::Lcc,
        }
    }
}

impl MeasureOptions {
    pub fn validate(&self) -> Result<()> {
        if self.measures.is_empty() {
            return Err(Error::Config("no measures selected".into()));
        }
        if self.rw_steps < 2 || !self.rw_steps.is_multiple_of(2) {
            return Err(Error::Config(format!(
                "random-walk length must be even and at least 2, got {}",
                self.rw_steps
            )));
        }
        if self.measures.contains(&MeasureId::EigenvalueExponent) && self.spectral.r < 2 {
            return Err(Error::Config("the eigenvalue exponent needs r >= 2".into()));
        }
        self.spectral.validate()?;
        self.diameter.validate()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PointStatus {
    Ok,
    /// Undefined at this size (e.g. fewer than two vertices).
    Undefined,
    /// The estimator diverged, e.g. γ for a regular degree sequence.
    Infinite,
    /// Not applicable to this dataset (clustering on two-mode graphs).
    Skipped,
    Error,
}

impl PointStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            PointStatus::Ok => "ok",
            PointStatus::Undefined => "undefined",
            PointStatus::Infinite => "infinite",
            PointStatus::Skipped => "skipped",
            PointStatus::Error => "error",
        }
    }
}

impl std::str::FromStr for PointStatus {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        [
            PointStatus::Ok,
            PointStatus::Undefined,
            PointStatus::Infinite,
            PointStatus::Skipped,
            PointStatus::Error,
        ]
        .into_iter()
        .find(|p| p.as_str() == s)
        .ok_or_else(|| Error::Config(format!("unknown point status {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeriesPoint {
    pub timepoint: usize,
    pub node_count: usize,
    pub edge_count: u64,
    pub value: Option<f64>,
    pub status: PointStatus,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioSeries {
    pub scenario: Scenario,
    pub measures: Vec<(MeasureId, Vec<SeriesPoint>)>,
}

fn classify(v: Option<f64>) -> (Option<f64>, PointStatus) {
    match v {
        None => (None, PointStatus::Undefined),
        Some(x) if x.is_infinite() => (None, PointStatus::Infinite),
        Some(x) if x.is_nan() => (None, PointStatus::Undefined),
        Some(x) => (Some(x), PointStatus::Ok),
    }
}

fn from_result(r: Result<Option<f64>>, what: MeasureId) -> (Option<f64>, PointStatus) {
    match r {
        Ok(v) => classify(v),
        Err(e) => failed(what, &e),
    }
}

fn failed(what: MeasureId, e: &dyn std::fmt::Display) -> (Option<f64>, PointStatus) {
    log::warn!("{what}: {e}");
    (None, PointStatus::Error)
}

/// One snapshot's values, in measure order.
pub type SnapshotValues = Vec<(MeasureId, Option<f64>, PointStatus)>;

/// Evaluates the selected measures on one snapshot. `seed` drives the
/// diameter sampler.
pub fn measure_snapshot(g: &GraphSnapshot, opts: &MeasureOptions, seed: u64) -> SnapshotValues {
    let wants = |m: MeasureId| opts.measures.contains(&m);
    let lcc = if g.is_connected() {
        None
    } else {
        largest_connected_component(g).ok().map(|(h, _)| h)
    };
    let lcc_ref = lcc.as_ref().unwrap_or(g);
    let degree = DegreeStats::from_snapshot(g);
    let spectrum = if wants(MeasureId::FractionalRank) || wants(MeasureId::EigenvalueExponent) {
        Some(SpectrumSummary::compute(g, opts.spectral.r, &opts.spectral))
    } else {
        None
    };

    let mut out = Vec::with_capacity(opts.measures.len());
    for &m in &opts.measures {
        let (value, status) = match m {
            MeasureId::AverageDegree => from_result(average_degree(g).map(Some), m),
            MeasureId::Gini
            | MeasureId::Jain
            | MeasureId::PowerLawExponent
            | MeasureId::RelativeEntropy => match &degree {
                Ok(d) => classify(match m {
                    MeasureId::Gini => gini_coefficient(d),
                    MeasureId::Jain => Some(jain_index(d)),
                    MeasureId::PowerLawExponent => power_law_exponent(d),
                    _ => relative_entropy(d),
                }),
                Err(e) => failed(m, e),
            },
            MeasureId::EffectiveDiameter => {
                let o = DiameterOptions {
                    seed,
                    ..opts.diameter
                };
                from_result(effective_diameter(lcc_ref, &o).map(Some), m)
            }
            MeasureId::ReturnProbability => {
                let r = match opts.theta_scope {
                    ThetaScope::Lcc => rw_return_probability(
                        lcc_ref,
                        opts.rw_steps,
                        opts.spectral.r,
                        &opts.spectral,
                    ),
                    ThetaScope::NonIsolated => rw_return_probability(
                        &g.without_isolated(),
                        opts.rw_steps,
                        opts.spectral.r,
                        &opts.spectral,
                    ),
                };
                from_result(r.map(Some), m)
            }
            MeasureId::Controllability => {
                from_result(relative_controllability(g).map(|c| Some(c.relative)), m)
            }
            MeasureId::AlgebraicConnectivity => from_result(
                algebraic_connectivity_measure(lcc_ref, &opts.spectral).map(Some),
                m,
            ),
            MeasureId::Clustering => match clustering_coefficient(g) {
                None => (None, PointStatus::Skipped),
                Some(c) => classify(Some(c)),
            },
            MeasureId::FractionalRank => match spectrum.as_ref().expect("spectrum computed") {
                Ok(s) => classify(Some(s.fractional_rank(g))),
                Err(e) => failed(m, e),
            },
            MeasureId::EigenvalueExponent => match spectrum.as_ref().expect("spectrum computed") {
                Ok(s) => classify(s.eigenvalue_exponent()),
                Err(e) => failed(m, e),
            },
        };
        out.push((m, value, status));
    }
    out
}

/// SplitMix64 finaliser, used to derive per-task seeds.
pub fn mix_seed(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Stable 64-bit hash of a dataset name (FNV-1a).
pub fn name_hash(name: &str) -> u64 {
    name.bytes().fold(0xcbf2_9ce4_8422_2325u64, |h, b| {
        (h ^ b as u64).wrapping_mul(0x0100_0000_01b3)
    })
}

fn task_seed(base: u64, dataset: &str, scenario: Scenario, t: usize) -> u64 {
    mix_seed(mix_seed(base ^ name_hash(dataset)) ^ ((scenario as u64) << 32) ^ t as u64)
}

fn evaluate(
    snapshots: Vec<(usize, Result<GraphSnapshot>)>,
    dataset: &str,
    scenario: Scenario,
    opts: &MeasureOptions,
) -> ScenarioSeries {
    let rows: Vec<(usize, usize, u64, SnapshotValues)> = snapshots
        .into_par_iter()
        .map(|(t, g)| match g {
            Ok(g) => {
                let seed = task_seed(opts.diameter.seed, dataset, scenario, t);
                (t, g.n(), g.m(), measure_snapshot(&g, opts, seed))
            }
            Err(e) => {
                log::warn!("{dataset} {} t={t}: {e}", scenario.as_str());
                let failed = opts
                    .measures
                    .iter()
                    .map(|&m| (m, None, PointStatus::Error))
                    .collect();
                (t, 0, 0, failed)
            }
        })
        .collect();
    let measures = opts
        .measures
        .iter()
        .enumerate()
        .map(|(k, &m)| {
            let points = rows
                .iter()
                .map(|(t, n, e, vals)| SeriesPoint {
                    timepoint: *t,
                    node_count: *n,
                    edge_count: *e,
                    value: vals[k].1,
                    status: vals[k].2,
                })
                .collect();
            (m, points)
        })
        .collect();
    ScenarioSeries { scenario, measures }
}

/// Measure series over the whole growing network.
pub fn analyze_full(
    elist: &TemporalEdgeList,
    dataset: &str,
    config: &ScenarioConfig,
    opts: &MeasureOptions,
) -> Result<ScenarioSeries> {
    let counts = make_timepoints(elist.len(), config.timepoints)?;
    // Snapshots are built inside the workers so only a few are alive at once.
    let tasks: Vec<(usize, usize)> = counts
        .iter()
        .enumerate()
        .map(|(i, &k)| (i + 1, k))
        .collect();
    let rows = tasks
        .into_par_iter()
        .map(|(t, k)| (t, build_snapshot(elist, k)))
        .collect::<Vec<_>>();
    Ok(evaluate(rows, dataset, Scenario::Full, opts))
}

/// Measure series on the vertex set of the largest component at `t1`.
pub fn analyze_connected(
    elist: &TemporalEdgeList,
    dataset: &str,
    config: &ScenarioConfig,
    opts: &MeasureOptions,
) -> Result<ScenarioSeries> {
    let cfg = ScenarioConfig {
        scenario: Scenario::Connected,
        ..*config
    };
    cfg.validate()?;
    let counts = make_timepoints(elist.len(), cfg.timepoints)?;
    let anchor = build_snapshot(elist, counts[cfg.t1 - 1])?;
    let (lcc, _) = largest_connected_component(&anchor)?;
    let keep: Vec<NodeId> = lcc.labels().to_vec();
    let rows = cfg
        .series_timepoints()
        .into_par_iter()
        .map(|t| {
            let g = if t == cfg.t1 {
                Ok(lcc.clone())
            } else {
                build_snapshot(elist, counts[t - 1]).and_then(|g| induced_subgraph(&g, &keep))
            };
            (t, g)
        })
        .collect::<Vec<_>>();
    Ok(evaluate(rows, dataset, Scenario::Connected, opts))
}

pub fn analyze_scenario(
    elist: &TemporalEdgeList,
    dataset: &str,
    config: &ScenarioConfig,
    opts: &MeasureOptions,
) -> Result<ScenarioSeries> {
    match config.scenario {
        Scenario::Full => analyze_full(elist, dataset, config, opts),
        Scenario::Connected => analyze_connected(elist, dataset, config, opts),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::TemporalEdge;

    fn ring_list(n: u64, rounds: u64) -> TemporalEdgeList {
        let mut edges = Vec::new();
        let mut t = 0;
        for r in 0..rounds {
            for i in 0..n {
                t += 1;
                edges.push(TemporalEdge::new(i, (i + 1 + r) % n, t));
            }
        }
        TemporalEdgeList::new(edges, None).unwrap()
    }

    fn opts() -> MeasureOptions {
        MeasureOptions {
            spectral: SpectralOptions {
                r: 8,
                ..Default::default()
            },
            diameter: DiameterOptions {
                sample_size: 20,
                ..Default::default()
            },
            ..Default::default()
        }
    }

    #[test]
    fn full_series_has_every_measure_at_every_timepoint() {
        let list = ring_list(30, 4);
        let cfg = ScenarioConfig {
            timepoints: 10,
            ..Default::default()
        };
        let s = analyze_full(&list, "ring", &cfg, &opts()).unwrap();
        assert_eq!(s.measures.len(), 12);
        for (m, pts) in &s.measures {
            assert_eq!(pts.len(), 10, "{m}");
            assert_eq!(
                pts.iter().map(|p| p.timepoint).collect::<Vec<_>>(),
                (1..=10).collect::<Vec<_>>()
            );
        }
        let (_, avg) = &s.measures[0];
        assert_eq!(avg[9].edge_count, 120);
        assert_eq!(avg[9].value, Some(8.0));
    }

    #[test]
    fn regular_snapshot_reports_infinite_gamma() {
        let list = ring_list(12, 1);
        let g = build_snapshot(&list, 12).unwrap();
        let vals = measure_snapshot(&g, &opts(), 1);
        let gamma = vals
            .iter()
            .find(|v| v.0 == MeasureId::PowerLawExponent)
            .unwrap();
        assert_eq!((gamma.1, gamma.2), (None, PointStatus::Infinite));
    }

    #[test]
    fn bipartite_clustering_is_skipped() {
        let edges = (0..20u64)
            .map(|i| TemporalEdge::new(i % 5, 100 + i % 7, i as i64))
            .collect();
        let list =
            TemporalEdgeList::new(edges, Some(crate::graph::Partition { right_offset: 100 }))
                .unwrap();
        let cfg = ScenarioConfig {
            timepoints: 4,
            ..Default::default()
        };
        let s = analyze_full(&list, "bip", &cfg, &opts()).unwrap();
        let (_, pts) = s
            .measures
            .iter()
            .find(|(m, _)| *m == MeasureId::Clustering)
            .unwrap();
        assert!(pts
            .iter()
            .all(|p| p.status == PointStatus::Skipped && p.value.is_none()));
    }

    #[test]
    fn connected_series_covers_t1_to_t() {
        let list = ring_list(30, 4);
        let cfg = ScenarioConfig {
            scenario: Scenario::Connected,
            timepoints: 20,
            t1: 15,
            exclude_anchor: false,
        };
        let s = analyze_scenario(&list, "ring", &cfg, &opts()).unwrap();
        let (_, pts) = &s.measures[0];
        assert_eq!(
            pts.iter().map(|p| p.timepoint).collect::<Vec<_>>(),
            (15..=20).collect::<Vec<_>>()
        );
        assert!(pts.iter().all(|p| p.node_count == 30));
    }

    #[test]
    fn runs_are_deterministic() {
        let list = ring_list(40, 3);
        let cfg = ScenarioConfig {
            timepoints: 6,
            ..Default::default()
        };
        let a = analyze_full(&list, "x", &cfg, &opts()).unwrap();
        let b = analyze_full(&list, "x", &cfg, &opts()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn empty_measure_set_is_rejected() {
        let o = MeasureOptions {
            measures: BTreeSet::new(),
            ..Default::default()
        };
        assert!(matches!(o.validate(), Err(Error::Config(_))));
    }
}
