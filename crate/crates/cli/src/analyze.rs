//! The `analyze` run: every dataset, scenario and measure, then the trend
//! tests and the aggregate table, written out as a report bundle.

use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use netdiv_core::analysis::{analyze_scenario, PointStatus, ScenarioSeries};
use netdiv_core::ingest::{
    parse_edge_file, parse_manifest, DatasetDescriptor, ParseOptions, Scenario,
};
use netdiv_core::trend::{
    mann_kendall, verdict_table, AggregateResult, Direction, MeasureId, TrendRecord, TrendResult,
};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::RunConfig;
use crate::BundleError;

pub const SERIES_FILE: &str = "series.csv";
pub const TRENDS_FILE: &str = "trends.csv";
pub const SUMMARY_FILE: &str = "summary.json";
pub const RUN_FILE: &str = "run.json";
pub const PLOTS_DIR: &str = "plots";

pub const SERIES_HEADER: [&str; 8] = [
    "dataset",
    "scenario",
    "measure",
    "timepoint",
    "node_count",
    "edge_count",
    "value",
    "status",
];
pub const TRENDS_HEADER: [&str; 9] = [
    "dataset",
    "scenario",
    "measure",
    "S",
    "variance",
    "z",
    "p",
    "direction",
    "significant",
];

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DatasetOutcome {
    pub name: String,
    pub bipartite: bool,
    pub edges: Option<usize>,
    /// `None` on success.
    pub error: Option<String>,
}

/// Provenance written to `run.json`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunMetadata {
    pub tool_version: String,
    pub config: RunConfig,
    pub datasets: Vec<DatasetOutcome>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub measure: MeasureId,
    pub symbol: String,
    pub scenario: Scenario,
    pub predicted: Direction,
    /// "Up", "Down" or "---".
    pub observed: String,
    pub k: u64,
    pub n: u64,
    pub p: f64,
    pub k_opposite: u64,
    pub p_opposite: f64,
    pub cell: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub sig_level: f64,
    pub two_sided: bool,
    pub rows: Vec<SummaryRow>,
    pub footnote: String,
}

impl Summary {
    pub fn from_table(rows: &[AggregateResult], sig_level: f64, two_sided: bool) -> Self {
        let bipartite_free = rows
            .iter()
            .find(|r| r.measure == MeasureId::Clustering)
            .map(|r| r.n)
            .unwrap_or(0);
        Summary {
            sig_level,
            two_sided,
            rows: rows
                .iter()
                .map(|r| SummaryRow {
                    measure: r.measure,
                    symbol: r.measure.spec().symbol.to_string(),
                    scenario: r.scenario,
                    predicted: r.predicted,
                    observed: r.verdict.label().to_string(),
                    k: r.k,
                    n: r.n,
                    p: r.p_binomial,
                    k_opposite: r.k_opposite,
                    p_opposite: r.p_opposite,
                    cell: r.cell(),
                })
                .collect(),
            footnote: format!(
                "clustering excludes bipartite datasets; the total number of networks is {bipartite_free}"
            ),
        }
    }
}

/// One measure series of one dataset, with its trend test.
#[derive(Debug, Clone)]
pub struct SeriesRecord {
    pub dataset: String,
    pub bipartite: bool,
    pub series: ScenarioSeries,
}

pub fn trend_of(
    points: &[netdiv_core::analysis::SeriesPoint],
    cfg: &RunConfig,
) -> Option<TrendResult> {
    let values: Vec<Option<f64>> = points.iter().map(|p| p.value).collect();
    mann_kendall(&values, &cfg.trend)
}

fn load_dataset(
    d: &DatasetDescriptor,
    cfg: &RunConfig,
) -> Result<netdiv_core::graph::TemporalEdgeList, BundleError> {
    let file = File::open(&d.path).map_err(|e| BundleError::io(d.path.clone(), e))?;
    let opts = ParseOptions {
        assume_order: cfg.assume_order,
        bipartite: d.bipartite,
    };
    Ok(parse_edge_file(BufReader::new(file), opts)?.list)
}

fn analyze_dataset(
    d: &DatasetDescriptor,
    cfg: &RunConfig,
) -> (DatasetOutcome, Vec<ScenarioSeries>) {
    let mut outcome = DatasetOutcome {
        name: d.name.clone(),
        bipartite: d.bipartite,
        edges: None,
        error: None,
    };
    let result = load_dataset(d, cfg).and_then(|list| {
        outcome.edges = Some(list.len());
        cfg.scenarios
            .iter()
            .map(|&s| {
                analyze_scenario(&list, &d.name, &cfg.scenario_config(s), &cfg.measure)
                    .map_err(BundleError::from)
            })
            .collect::<Result<Vec<_>, _>>()
    });
    match result {
        Ok(series) => (outcome, series),
        Err(e) => {
            log::error!("dataset {}: {e}", d.name);
            outcome.error = Some(e.to_string());
            (outcome, Vec::new())
        }
    }
}

/// Result of an `analyze` run before it is written out.
pub struct AnalysisRun {
    pub metadata: RunMetadata,
    pub records: Vec<SeriesRecord>,
    pub table: Vec<AggregateResult>,
}

pub fn run_analysis(cfg: &RunConfig) -> Result<AnalysisRun, BundleError> {
    cfg.validate()?;
    let manifest =
        File::open(&cfg.manifest).map_err(|e| BundleError::io(cfg.manifest.clone(), e))?;
    let base = cfg.manifest.parent().unwrap_or(Path::new("."));
    let datasets = parse_manifest(BufReader::new(manifest), base)?;

    let work = || -> Vec<(DatasetOutcome, Vec<ScenarioSeries>)> {
        datasets
            .par_iter()
            .map(|d| analyze_dataset(d, cfg))
            .collect()
    };
    let results = match cfg.jobs {
        Some(j) => rayon::ThreadPoolBuilder::new()
            .num_threads(j)
            .build()
            .map_err(|e| BundleError::Config(e.to_string()))?
            .install(work),
        None => work(),
    };

    let mut outcomes = Vec::new();
    let mut records = Vec::new();
    for (outcome, series) in results {
        for s in series {
            records.push(SeriesRecord {
                dataset: outcome.name.clone(),
                bipartite: outcome.bipartite,
                series: s,
            });
        }
        outcomes.push(outcome);
    }

    let trend_records: Vec<TrendRecord> = records
        .iter()
        .flat_map(|r| {
            r.series.measures.iter().map(move |(m, pts)| TrendRecord {
                dataset: r.dataset.clone(),
                bipartite: r.bipartite,
                scenario: r.series.scenario,
                measure: *m,
                result: trend_of(pts, cfg),
            })
        })
        .collect();
    let table = verdict_table(&trend_records, cfg.trend.sig_level);
    Ok(AnalysisRun {
        metadata: RunMetadata {
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            config: cfg.clone(),
            datasets: outcomes,
        },
        records,
        table,
    })
}

/// Shortest representation that parses back to the same `f64`.
pub fn fmt_f64(x: f64) -> String {
    if x.is_nan() {
        "NaN".into()
    } else if x.is_infinite() {
        if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        }
    } else {
        format!("{x:?}")
    }
}

fn direction_label(t: &TrendResult) -> &'static str {
    match t.s.signum() {
        1 => "up",
        -1 => "down",
        _ => "none",
    }
}

pub fn trend_row(
    dataset: &str,
    scenario: Scenario,
    measure: MeasureId,
    t: Option<&TrendResult>,
) -> Vec<String> {
    let mut row = vec![
        dataset.to_string(),
        scenario.as_str().to_string(),
        measure.as_str().to_string(),
    ];
    match t {
        Some(t) => row.extend([
            t.s.to_string(),
            fmt_f64(t.variance),
            fmt_f64(t.z),
            fmt_f64(t.p()),
            direction_label(t).to_string(),
            t.significant().to_string(),
        ]),
        None => row.extend(["", "", "", "", "na", "false"].map(String::from)),
    }
    row
}

fn plot_stem(dataset: &str, scenario: Scenario, measure: MeasureId) -> String {
    let clean: String = dataset
        .chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || c == '-' || c == '_' {
                c
            } else {
                '_'
            }
        })
        .collect();
    format!("{clean}__{}__{}", scenario.as_str(), measure.as_str())
}

#[derive(Serialize)]
struct PlotVerdict<'a> {
    dataset: &'a str,
    scenario: Scenario,
    measure: MeasureId,
    predicted: Direction,
    observed: Option<Direction>,
    p: Option<f64>,
    matches_prediction: bool,
}

fn create(path: &Path) -> Result<BufWriter<File>, BundleError> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| BundleError::io(path.to_path_buf(), e))
}

fn io_err(path: &Path) -> impl Fn(std::io::Error) -> BundleError + '_ {
    move |e| BundleError::io(path.to_path_buf(), e)
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), BundleError> {
    let mut w = create(path)?;
    serde_json::to_writer_pretty(&mut w, value).map_err(|e| BundleError::Schema(e.to_string()))?;
    writeln!(w).and_then(|_| w.flush()).map_err(io_err(path))
}

/// Writes the bundle into `cfg.out`.
pub fn write_bundle(run: &AnalysisRun, out: &Path) -> Result<(), BundleError> {
    let plots = out.join(PLOTS_DIR);
    fs::create_dir_all(&plots).map_err(io_err(&plots))?;
    let cfg = &run.metadata.config;

    let series_path = out.join(SERIES_FILE);
    let mut series = csv::Writer::from_writer(create(&series_path)?);
    series.write_record(SERIES_HEADER)?;
    let trends_path = out.join(TRENDS_FILE);
    let mut trends = csv::Writer::from_writer(create(&trends_path)?);
    trends.write_record(TRENDS_HEADER)?;

    for rec in &run.records {
        let scenario = rec.series.scenario;
        for (measure, points) in &rec.series.measures {
            let stem = plot_stem(&rec.dataset, scenario, *measure);
            let plot_path = plots.join(format!("{stem}.tsv"));
            let mut plot = create(&plot_path)?;
            writeln!(plot, "timepoint\t{}", measure.as_str()).map_err(io_err(&plot_path))?;
            for p in points {
                series.write_record([
                    rec.dataset.clone(),
                    scenario.as_str().to_string(),
                    measure.as_str().to_string(),
                    p.timepoint.to_string(),
                    p.node_count.to_string(),
                    p.edge_count.to_string(),
                    p.value.map(fmt_f64).unwrap_or_default(),
                    p.status.as_str().to_string(),
                ])?;
                if let (Some(v), PointStatus::Ok) = (p.value, p.status) {
                    writeln!(plot, "{}\t{}", p.timepoint, fmt_f64(v))
                        .map_err(io_err(&plot_path))?;
                }
            }
            plot.flush().map_err(io_err(&plot_path))?;

            let trend = trend_of(points, cfg);
            trends.write_record(trend_row(&rec.dataset, scenario, *measure, trend.as_ref()))?;
            let observed = trend.as_ref().and_then(|t| t.direction());
            write_json(
                &plots.join(format!("{stem}.verdict.json")),
                &PlotVerdict {
                    dataset: &rec.dataset,
                    scenario,
                    measure: *measure,
                    predicted: measure.predicted(),
                    observed,
                    p: trend.as_ref().map(|t| t.p()),
                    matches_prediction: observed == Some(measure.predicted()),
                },
            )?;
        }
    }
    series.flush().map_err(io_err(&series_path))?;
    trends.flush().map_err(io_err(&trends_path))?;

    write_json(
        &out.join(SUMMARY_FILE),
        &Summary::from_table(&run.table, cfg.trend.sig_level, cfg.trend.two_sided),
    )?;
    write_json(&out.join(RUN_FILE), &run.metadata)
}

pub fn run_analyze(cfg: &RunConfig) -> Result<AnalysisRun, BundleError> {
    let run = run_analysis(cfg)?;
    write_bundle(&run, &cfg.out)?;
    Ok(run)
}
