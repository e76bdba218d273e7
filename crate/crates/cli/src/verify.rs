//! Re-reads a report bundle, checks its schema and recomputes every
//! derived number from the series file.

use std::collections::{BTreeMap, HashSet};
use std::fs::File;
use std::io::BufReader;
use std::path::Path;

use netdiv_core::analysis::{PointStatus, SeriesPoint};
use netdiv_core::ingest::Scenario;
use netdiv_core::trend::{binomial_aggregate, mann_kendall, Direction, MeasureId, Verdict};

use crate::analyze::{
    fmt_f64, trend_row, RunMetadata, Summary, RUN_FILE, SERIES_FILE, SERIES_HEADER, SUMMARY_FILE,
    TRENDS_FILE, TRENDS_HEADER,
};
use crate::BundleError;

const REL_TOL: f64 = 1e-9;

type Key = (String, Scenario, MeasureId);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct VerifyReport {
    pub series: usize,
    pub points: usize,
    pub summary_rows: usize,
}

fn open(path: &Path) -> Result<BufReader<File>, BundleError> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| BundleError::io(path.to_path_buf(), e))
}

fn schema(file: &str, line: u64, msg: impl std::fmt::Display) -> BundleError {
    BundleError::Schema(format!("{file} line {line}: {msg}"))
}

fn reader(
    path: &Path,
    file: &str,
    header: &[&str],
) -> Result<csv::Reader<BufReader<File>>, BundleError> {
    let mut rdr = csv::Reader::from_reader(open(path)?);
    let found = rdr.headers().map_err(|e| schema(file, 1, e))?;
    if found.iter().ne(header.iter().copied()) {
        return Err(schema(file, 1, format!("unexpected header {found:?}")));
    }
    Ok(rdr)
}

fn field<T: std::str::FromStr>(
    file: &str,
    line: u64,
    name: &str,
    text: &str,
) -> Result<T, BundleError> {
    text.parse()
        .map_err(|_| schema(file, line, format!("invalid {name} {text:?}")))
}

fn close(a: f64, b: f64) -> bool {
    a == b || (a - b).abs() <= REL_TOL * a.abs().max(b.abs()) || (a.is_nan() && b.is_nan())
}

fn read_series(
    path: &Path,
    meta: &RunMetadata,
) -> Result<Vec<(Key, Vec<SeriesPoint>)>, BundleError> {
    let mut rdr = reader(path, SERIES_FILE, &SERIES_HEADER)?;
    let mut out: Vec<(Key, Vec<SeriesPoint>)> = Vec::new();
    let mut seen = HashSet::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| schema(SERIES_FILE, e.position().map_or(0, |p| p.line()), e))?;
        let line = rec.position().map_or(0, |p| p.line());
        let scenario: Scenario = field(SERIES_FILE, line, "scenario", &rec[1])?;
        let measure: MeasureId = field(SERIES_FILE, line, "measure", &rec[2])?;
        let status: PointStatus = field(SERIES_FILE, line, "status", &rec[7])?;
        let value = match (&rec[6], status) {
            ("", PointStatus::Ok) => {
                return Err(schema(SERIES_FILE, line, "status ok without a value"))
            }
            ("", _) => None,
            (v, PointStatus::Ok) => Some(field::<f64>(SERIES_FILE, line, "value", v)?),
            (_, s) => {
                return Err(schema(
                    SERIES_FILE,
                    line,
                    format!("value present with status {}", s.as_str()),
                ))
            }
        };
        let point = SeriesPoint {
            timepoint: field(SERIES_FILE, line, "timepoint", &rec[3])?,
            node_count: field(SERIES_FILE, line, "node_count", &rec[4])?,
            edge_count: field(SERIES_FILE, line, "edge_count", &rec[5])?,
            value,
            status,
        };
        let key = (rec[0].to_string(), scenario, measure);
        match out.last_mut() {
            Some((k, pts)) if *k == key => pts.push(point),
            _ => {
                if !seen.insert(key.clone()) {
                    return Err(schema(
                        SERIES_FILE,
                        line,
                        format!("series {key:?} is not contiguous"),
                    ));
                }
                out.push((key, vec![point]));
            }
        }
    }

    let cfg = &meta.config;
    let mut expected = Vec::new();
    for d in meta.datasets.iter().filter(|d| d.error.is_none()) {
        for &s in &cfg.scenarios {
            for &m in &cfg.measure.measures {
                expected.push((d.name.clone(), s, m));
            }
        }
    }
    for (i, key) in expected.iter().enumerate() {
        let Some((found, pts)) = out.get(i) else {
            return Err(BundleError::Schema(format!(
                "{SERIES_FILE}: series {}/{}/{} is missing",
                key.0,
                key.1.as_str(),
                key.2
            )));
        };
        if found != key {
            return Err(BundleError::Schema(format!(
                "{SERIES_FILE}: expected series {}/{}/{}, found {}/{}/{}",
                key.0,
                key.1.as_str(),
                key.2,
                found.0,
                found.1.as_str(),
                found.2
            )));
        }
        let want = cfg.scenario_config(key.1).series_timepoints();
        if pts.iter().map(|p| p.timepoint).ne(want.iter().copied()) {
            return Err(BundleError::Schema(format!(
                "{SERIES_FILE}: series {}/{}/{} has {} timepoints, expected {}",
                key.0,
                key.1.as_str(),
                key.2,
                pts.len(),
                want.len()
            )));
        }
    }
    if out.len() != expected.len() {
        return Err(BundleError::Schema(format!(
            "{SERIES_FILE}: {} series found, {} expected",
            out.len(),
            expected.len()
        )));
    }
    Ok(out)
}

struct TrendLine {
    significant: bool,
    direction: Option<Direction>,
    tested: bool,
}

fn check_trends(
    path: &Path,
    meta: &RunMetadata,
    series: &[(Key, Vec<SeriesPoint>)],
) -> Result<BTreeMap<(MeasureId, Scenario), Vec<TrendLine>>, BundleError> {
    let mut rdr = reader(path, TRENDS_FILE, &TRENDS_HEADER)?;
    let mut rows = rdr.records();
    let mut grouped: BTreeMap<(MeasureId, Scenario), Vec<TrendLine>> = BTreeMap::new();
    for ((dataset, scenario, measure), pts) in series {
        let values: Vec<Option<f64>> = pts.iter().map(|p| p.value).collect();
        let t = mann_kendall(&values, &meta.config.trend);
        let want = trend_row(dataset, *scenario, *measure, t.as_ref());
        let Some(rec) = rows.next() else {
            return Err(BundleError::Schema(format!(
                "{TRENDS_FILE}: no record for {dataset}/{}/{measure}",
                scenario.as_str()
            )));
        };
        let rec = rec.map_err(|e| schema(TRENDS_FILE, e.position().map_or(0, |p| p.line()), e))?;
        let line = rec.position().map_or(0, |p| p.line());
        for (i, name) in TRENDS_HEADER.iter().enumerate() {
            let (got, exp) = (&rec[i], want[i].as_str());
            let same = match i {
                4..=6 if !got.is_empty() && !exp.is_empty() => close(
                    field(TRENDS_FILE, line, name, got)?,
                    exp.parse().unwrap_or(f64::NAN),
                ),
                _ => got == exp,
            };
            if !same {
                return Err(BundleError::Mismatch(format!(
                    "{TRENDS_FILE} line {line} ({dataset}/{}/{measure}): {name} recorded {got:?}, recomputed {exp:?}",
                    scenario.as_str()
                )));
            }
        }
        grouped
            .entry((*measure, *scenario))
            .or_default()
            .push(TrendLine {
                significant: &rec[8] == "true",
                direction: match &rec[7] {
                    "up" => Some(Direction::Up),
                    "down" => Some(Direction::Down),
                    _ => None,
                },
                tested: !rec[3].is_empty(),
            });
    }
    if let Some(extra) = rows.next() {
        let line = extra
            .map(|r| r.position().map_or(0, |p| p.line()))
            .unwrap_or(0);
        return Err(schema(
            TRENDS_FILE,
            line,
            "record without a matching series",
        ));
    }
    Ok(grouped)
}

fn check_summary(
    path: &Path,
    meta: &RunMetadata,
    grouped: &BTreeMap<(MeasureId, Scenario), Vec<TrendLine>>,
) -> Result<usize, BundleError> {
    let summary: Summary = serde_json::from_reader(open(path)?)
        .map_err(|e| BundleError::Schema(format!("{SUMMARY_FILE}: {e}")))?;
    let alpha = meta.config.trend.sig_level;
    if summary.sig_level != alpha || summary.two_sided != meta.config.trend.two_sided {
        return Err(BundleError::Mismatch(format!(
            "{SUMMARY_FILE}: test settings differ from {RUN_FILE}"
        )));
    }
    if summary.rows.len() != grouped.len() {
        return Err(BundleError::Mismatch(format!(
            "{SUMMARY_FILE}: {} rows, {} expected",
            summary.rows.len(),
            grouped.len()
        )));
    }
    for (row, ((measure, scenario), lines)) in summary.rows.iter().zip(grouped) {
        let label = format!("{SUMMARY_FILE} row {}/{}", measure, scenario.as_str());
        if (row.measure, row.scenario) != (*measure, *scenario) {
            return Err(BundleError::Mismatch(format!(
                "{label}: found {}/{} instead",
                row.measure,
                row.scenario.as_str()
            )));
        }
        let predicted = measure.predicted();
        let n = lines.iter().filter(|l| l.tested).count() as u64;
        let count = |d: Direction| {
            lines
                .iter()
                .filter(|l| l.significant && l.direction == Some(d))
                .count() as u64
        };
        let (k, k_opp) = (count(predicted), count(predicted.opposite()));
        let (p, p_opp) = (
            binomial_aggregate(k, n, alpha),
            binomial_aggregate(k_opp, n, alpha),
        );
        let verdict = if n > 0 && p < alpha {
            Verdict::from(predicted)
        } else if n > 0 && p_opp < alpha {
            Verdict::from(predicted.opposite())
        } else {
            Verdict::NoTrend
        };
        let checks: [(&str, String, String); 6] = [
            ("n", row.n.to_string(), n.to_string()),
            ("k", row.k.to_string(), k.to_string()),
            ("k_opposite", row.k_opposite.to_string(), k_opp.to_string()),
            ("p", fmt_f64(row.p), fmt_f64(p)),
            ("p_opposite", fmt_f64(row.p_opposite), fmt_f64(p_opp)),
            (
                "observed",
                row.observed.clone(),
                verdict.label().to_string(),
            ),
        ];
        for (name, got, exp) in checks {
            let same = match name {
                "p" | "p_opposite" => close(
                    got.parse().unwrap_or(f64::NAN),
                    exp.parse().unwrap_or(f64::NAN),
                ),
                _ => got == exp,
            };
            if !same {
                return Err(BundleError::Mismatch(format!(
                    "{label}: {name} recorded {got}, recomputed {exp}"
                )));
            }
        }
    }
    Ok(summary.rows.len())
}

/// Checks a bundle directory written by `analyze`.
pub fn verify_bundle(dir: &Path) -> Result<VerifyReport, BundleError> {
    let meta: RunMetadata = serde_json::from_reader(open(&dir.join(RUN_FILE))?)
        .map_err(|e| BundleError::Schema(format!("{RUN_FILE}: {e}")))?;
    let series = read_series(&dir.join(SERIES_FILE), &meta)?;
    let grouped = check_trends(&dir.join(TRENDS_FILE), &meta, &series)?;
    let summary_rows = check_summary(&dir.join(SUMMARY_FILE), &meta, &grouped)?;
    Ok(VerifyReport {
        series: series.len(),
        points: series.iter().map(|(_, p)| p.len()).sum(),
        summary_rows,
    })
}
