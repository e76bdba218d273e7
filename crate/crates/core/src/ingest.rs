//! KONECT-style edge-list ingestion and the Full / Connected snapshot series.
//!
//! Input lines are `u v [weight [timestamp]]`, whitespace separated, with
//! `%` starting a comment line. Weights are parsed and dropped. For two-mode
//! datasets the second column lives in its own id space; it is shifted past
//! the largest left id so both partitions share one integer id range.

use std::collections::HashSet;
use std::io::{BufRead, Write};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{
    build_snapshot, induced_subgraph, largest_connected_component, GraphSnapshot, NodeId,
    Partition, TemporalEdge, TemporalEdgeList,
};

#[derive(Debug, Clone, Copy, Default)]
pub struct ParseOptions {
    /// Use file order as virtual time instead of the timestamp column.
    pub assume_order: bool,
    pub bipartite: bool,
}

#[derive(Debug, Clone)]
pub struct ParsedEdges {
    pub list: TemporalEdgeList,
    pub self_loops_dropped: usize,
}

fn parse_token<T: std::str::FromStr>(tok: &str, line: usize, what: &str) -> Result<T> {
    tok.parse().map_err(|_| Error::Parse {
        line,
        message: format!("invalid {what} {tok:?}"),
    })
}

fn parse_timestamp(tok: &str, line: usize) -> Result<i64> {
    if let Ok(t) = tok.parse::<i64>() {
        return Ok(t);
    }
    // Some exports write integral timestamps as floats ("1.0e9").
    match tok.parse::<f64>() {
        Ok(f) if f.is_finite() && f.fract() == 0.0 && f.abs() < 9.0e18 => Ok(f as i64),
        _ => Err(Error::Parse {
            line,
            message: format!("invalid timestamp {tok:?}"),
        }),
    }
}

/// Parses an edge file into a stably time-sorted, loop-free edge list.
pub fn parse_edge_file<R: BufRead>(source: R, opts: ParseOptions) -> Result<ParsedEdges> {
    let mut raw: Vec<TemporalEdge> = Vec::new();
    let mut self_loops = 0usize;
    for (idx, line) in source.lines().enumerate() {
        let line = line?;
        let lineno = idx + 1;
        let text = line.trim();
        if text.is_empty() || text.starts_with('%') {
            continue;
        }
        let toks: Vec<&str> = text.split_whitespace().collect();
        if toks.len() < 2 {
            return Err(Error::Parse {
                line: lineno,
                message: "expected at least two columns".into(),
            });
        }
        let u: NodeId = parse_token(toks[0], lineno, "node id")?;
        let v: NodeId = parse_token(toks[1], lineno, "node id")?;
        if let Some(w) = toks.get(2) {
            parse_token::<f64>(w, lineno, "weight")?;
        }
        let time = if opts.assume_order {
            if let Some(t) = toks.get(3) {
                parse_timestamp(t, lineno)?;
            }
            raw.len() as i64 + self_loops as i64
        } else {
            match toks.get(3) {
                Some(t) => parse_timestamp(t, lineno)?,
                None => {
                    return Err(Error::Parse {
                        line: lineno,
                        message: "missing timestamp".into(),
                    })
                }
            }
        };
        if u == v && !opts.bipartite {
            self_loops += 1;
            continue;
        }
        raw.push(TemporalEdge::new(u, v, time));
    }
    if raw.is_empty() {
        return Err(Error::EmptyInput("edge file contains no edges".into()));
    }
    if self_loops > 0 {
        log::warn!("dropped {self_loops} self-loop lines");
    }
    let partition = if opts.bipartite {
        let right_offset = raw.iter().map(|e| e.u).max().unwrap() + 1;
        for e in &mut raw {
            e.v += right_offset;
        }
        Some(Partition { right_offset })
    } else {
        None
    };
    Ok(ParsedEdges {
        list: TemporalEdgeList::new(raw, partition)?,
        self_loops_dropped: self_loops,
    })
}

/// Writes `list` in the canonical `u v 1 t` dialect that
/// [`parse_edge_file`] reads back to an identical list.
pub fn write_edge_file<W: Write>(list: &TemporalEdgeList, mut out: W) -> Result<()> {
    let kind = if list.is_bipartite() { "bip" } else { "sym" };
    writeln!(out, "% {kind} unweighted")?;
    writeln!(out, "% {} {}", list.len(), list.node_count_hint())?;
    let offset = list.partition().map_or(0, |p| p.right_offset);
    for e in list.edges() {
        writeln!(out, "{} {} 1 {}", e.u, e.v - offset, e.time)?;
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetDescriptor {
    pub name: String,
    pub path: PathBuf,
    pub bipartite: bool,
    pub notes: String,
}

/// Reads a manifest of `name<TAB>path<TAB>{unipartite|bipartite}[<TAB>notes]`
/// lines. Relative paths resolve against the manifest's directory.
pub fn parse_manifest<R: BufRead>(source: R, base_dir: &Path) -> Result<Vec<DatasetDescriptor>> {
    let mut out: Vec<DatasetDescriptor> = Vec::new();
    let mut seen = HashSet::new();
    for (idx, line) in source.lines().enumerate() {
        let line = line?;
        let lineno = idx + 1;
        if line.trim().is_empty() || line.trim_start().starts_with('#') {
            continue;
        }
        let cols: Vec<&str> = line.split('\t').collect();
        if cols.len() < 3 {
            return Err(Error::Parse {
                line: lineno,
                message: "expected name<TAB>path<TAB>kind".into(),
            });
        }
        let name = cols[0].trim();
        if name.is_empty() {
            return Err(Error::Parse {
                line: lineno,
                message: "empty dataset name".into(),
            });
        }
        if !seen.insert(name.to_string()) {
            return Err(Error::Parse {
                line: lineno,
                message: format!("duplicate dataset name {name:?}"),
            });
        }
        let bipartite = match cols[2].trim() {
            "unipartite" => false,
            "bipartite" => true,
            other => {
                return Err(Error::Parse {
                    line: lineno,
                    message: format!("unknown dataset kind {other:?}"),
                })
            }
        };
        let path = PathBuf::from(cols[1].trim());
        out.push(DatasetDescriptor {
            name: name.to_string(),
            path: if path.is_absolute() {
                path
            } else {
                base_dir.join(path)
            },
            bipartite,
            notes: cols
                .get(3)
                .map(|s| s.trim().to_string())
                .unwrap_or_default(),
        });
    }
    if out.is_empty() {
        return Err(Error::EmptyInput("manifest lists no datasets".into()));
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scenario {
    Full,
    Connected,
}

impl Scenario {
    pub fn as_str(self) -> &'static str {
        match self {
            Scenario::Full => "full",
            Scenario::Connected => "connected",
        }
    }
}

impl std::str::FromStr for Scenario {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "full" => Ok(Scenario::Full),
            "connected" => Ok(Scenario::Connected),
            _ => Err(Error::Config(format!("unknown scenario {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub scenario: Scenario,
    pub timepoints: usize,
    pub t1: usize,
    /// Start the Connected series at `t1 + 1` instead of `t1`.
    pub exclude_anchor: bool,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            scenario: Scenario::Full,
            timepoints: 100,
            t1: 75,
            exclude_anchor: false,
        }
    }
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<()> {
        if !(2..=10_000).contains(&self.timepoints) {
            return Err(Error::Config(format!(
                "timepoints must lie in [2, 10000], got {}",
                self.timepoints
            )));
        }
        if self.scenario == Scenario::Connected {
            if self.t1 < 1 || self.t1 >= self.timepoints {
                return Err(Error::Config(format!(
                    "t1 must lie in [1, {}), got {}",
                    self.timepoints, self.t1
                )));
            }
            if self.exclude_anchor && self.t1 + 1 > self.timepoints {
                return Err(Error::Config("connected series would be empty".into()));
            }
        }
        Ok(())
    }

    /// Timepoints (1-based) covered by this scenario's series.
    pub fn series_timepoints(&self) -> Vec<usize> {
        match self.scenario {
            Scenario::Full => (1..=self.timepoints).collect(),
            Scenario::Connected => {
                let start = if self.exclude_anchor {
                    self.t1 + 1
                } else {
                    self.t1
                };
                (start..=self.timepoints).collect()
            }
        }
    }
}

/// Edge counts ⌊total·t/T⌋ for t = 1..=T.
pub fn make_timepoints(total_edges: usize, timepoints: usize) -> Result<Vec<usize>> {
    if timepoints == 0 {
        return Err(Error::Config("timepoint count must be positive".into()));
    }
    if total_edges < timepoints {
        return Err(Error::Config(format!(
            "{total_edges} edges are too few to split into {timepoints} timepoints"
        )));
    }
    Ok((1..=timepoints)
        .map(|t| ((total_edges as u128 * t as u128) / timepoints as u128) as usize)
        .collect())
}

/// One snapshot per timepoint over the whole growing network.
///
/// Only `timepoints` is read from `config`, so a single-timepoint call is
/// allowed here even though a validated configuration needs two or more.
pub fn build_full_series(
    elist: &TemporalEdgeList,
    config: &ScenarioConfig,
) -> Result<Vec<GraphSnapshot>> {
    let counts = make_timepoints(elist.len(), config.timepoints)?;
    counts
        .par_iter()
        .map(|&k| build_snapshot(elist, k))
        .collect()
}

#[derive(Debug, Clone)]
pub struct ConnectedSeries {
    /// Original ids of the largest component at `t1`, ascending.
    pub anchor_vertices: Vec<NodeId>,
    /// 1-based timepoints matching `snapshots`.
    pub timepoints: Vec<usize>,
    pub snapshots: Vec<GraphSnapshot>,
}

/// Induced subgraphs on the vertex set of the largest component at `t1`.
pub fn build_connected_series(
    elist: &TemporalEdgeList,
    config: &ScenarioConfig,
) -> Result<ConnectedSeries> {
    let cfg = ScenarioConfig {
        scenario: Scenario::Connected,
        ..*config
    };
    cfg.validate()?;
    let counts = make_timepoints(elist.len(), cfg.timepoints)?;
    let anchor = build_snapshot(elist, counts[cfg.t1 - 1])?;
    let (lcc, _) = largest_connected_component(&anchor)?;
    let anchor_vertices = lcc.labels().to_vec();
    let timepoints = cfg.series_timepoints();
    let snapshots = timepoints
        .par_iter()
        .map(|&t| {
            if t == cfg.t1 {
                return Ok(lcc.clone());
            }
            let g = build_snapshot(elist, counts[t - 1])?;
            induced_subgraph(&g, &anchor_vertices)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ConnectedSeries {
        anchor_vertices,
        timepoints,
        snapshots,
    })
}
