//! Mann–Kendall trend tests, the measure catalog with predicted directions,
//! and binomial aggregation of per-dataset verdicts.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};
use statrs::function::factorial::ln_binomial;

use crate::error::{Error, Result};
use crate::ingest::Scenario;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Up,
    Down,
}

impl Direction {
    pub fn opposite(self) -> Self {
        match self {
            Direction::Up => Direction::Down,
            Direction::Down => Direction::Up,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Direction::Up => "Up",
            Direction::Down => "Down",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MeasureId {
    AverageDegree,
    Gini,
    Jain,
    PowerLawExponent,
    RelativeEntropy,
    EffectiveDiameter,
    ReturnProbability,
    Controllability,
    AlgebraicConnectivity,
    Clustering,
    FractionalRank,
    EigenvalueExponent,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MeasureSpec {
    pub id: MeasureId,
    pub symbol: &'static str,
    pub name: &'static str,
    pub range: &'static str,
    pub predicted: Direction,
    /// Adding an edge to a connected graph provably moves the value in the
    /// predicted direction (or leaves it unchanged).
    pub monotone: bool,
}

macro_rules! spec {
    ($id:ident, $sym:expr, $name:expr, $range:expr, $dir:ident, $mono:expr) => {
        MeasureSpec {
            id: MeasureId::$id,
            symbol: $sym,
            name: $name,
            range: $range,
            predicted: Direction::$dir,
            monotone: $mono,
        }
    };
}

pub const CATALOG: [MeasureSpec; 12] = [
    spec!(AverageDegree, "d", "Average degree", "(0,inf)", Up, true),
    spec!(Gini, "G", "Gini coefficient", "[0,1]", Up, false),
    spec!(Jain, "J", "Jain's index", "(0,1]", Down, false),
    spec!(
        PowerLawExponent,
        "gamma",
        "Power-law exponent",
        "(1,inf)",
        Down,
        false
    ),
    spec!(
        RelativeEntropy,
        "H_er",
        "Relative edge distribution entropy",
        "[0,1]",
        Down,
        false
    ),
    spec!(
        EffectiveDiameter,
        "delta_0.9",
        "90-percentile effective diameter",
        "(0,inf)",
        Down,
        true
    ),
    spec!(
        ReturnProbability,
        "theta_r(n)",
        "Random walk return probability",
        "[1,inf)",
        Down,
        false
    ),
    spec!(
        Controllability,
        "C_r",
        "Relative controllability",
        "(0,1]",
        Down,
        true
    ),
    spec!(
        AlgebraicConnectivity,
        "a",
        "Algebraic connectivity",
        "[0,inf)",
        Up,
        true
    ),
    spec!(
        Clustering,
        "c",
        "Clustering coefficient",
        "[0,1]",
        Up,
        false
    ),
    spec!(
        FractionalRank,
        "rank_F",
        "Fractional rank",
        "[1,inf)",
        Down,
        false
    ),
    spec!(
        EigenvalueExponent,
        "alpha",
        "Eigenvalue power-law exponent",
        "(1,inf)",
        Up,
        false
    ),
];

impl MeasureId {
    pub const ALL: [MeasureId; 12] = [
        MeasureId::AverageDegree,
        MeasureId::Gini,
        MeasureId::Jain,
        MeasureId::PowerLawExponent,
        MeasureId::RelativeEntropy,
        MeasureId::EffectiveDiameter,
        MeasureId::ReturnProbability,
        MeasureId::Controllability,
        MeasureId::AlgebraicConnectivity,
        MeasureId::Clustering,
        MeasureId::FractionalRank,
        MeasureId::EigenvalueExponent,
    ];

    pub fn spec(self) -> &'static MeasureSpec {
        &CATALOG[self as usize]
    }

    pub fn predicted(self) -> Direction {
        self.spec().predicted
    }

    pub fn as_str(self) -> &'static str {
        match self {
            MeasureId::AverageDegree => "avg_degree",
            MeasureId::Gini => "gini",
            MeasureId::Jain => "jain",
            MeasureId::PowerLawExponent => "gamma",
            MeasureId::RelativeEntropy => "entropy",
            MeasureId::EffectiveDiameter => "diameter",
            MeasureId::ReturnProbability => "rw_return",
            MeasureId::Controllability => "controllability",
            MeasureId::AlgebraicConnectivity => "algebraic_connectivity",
            MeasureId::Clustering => "clustering",
            MeasureId::FractionalRank => "fractional_rank",
            MeasureId::EigenvalueExponent => "alpha",
        }
    }
}

impl fmt::Display for MeasureId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for MeasureId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        MeasureId::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| Error::Config(format!("unknown measure {s:?}")))
    }
}

/// One measure evaluated over a snapshot series.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasureSeries {
    pub dataset: String,
    pub scenario: Scenario,
    pub measure: MeasureId,
    pub points: Vec<(usize, Option<f64>)>,
}

impl MeasureSeries {
    pub fn values(&self) -> Vec<Option<f64>> {
        self.points.iter().map(|&(_, v)| v).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrendOptions {
    pub sig_level: f64,
    pub two_sided: bool,
}

impl Default for TrendOptions {
    fn default() -> Self {
        Self {
            sig_level: 0.05,
            two_sided: false,
        }
    }
}

impl TrendOptions {
    pub fn validate(&self) -> Result<()> {
        if !(self.sig_level > 0.0 && self.sig_level < 1.0) {
            return Err(Error::Config(format!(
                "significance level must lie in (0, 1), got {}",
                self.sig_level
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrendResult {
    pub s: i64,
    pub variance: f64,
    pub z: f64,
    /// Points used (missing values removed).
    pub n: usize,
    /// One-sided p-values for an upward and a downward trend.
    pub p_up: f64,
    pub p_down: f64,
    /// Whether the null distribution was enumerated exactly.
    pub exact: bool,
    pub sig_level: f64,
    pub two_sided: bool,
}

impl TrendResult {
    pub fn p_toward(&self, dir: Direction) -> f64 {
        match dir {
            Direction::Up => self.p_up,
            Direction::Down => self.p_down,
        }
    }

    /// p-value of the reported test: the one-sided p on the side of `S`,
    /// or the two-sided p.
    pub fn p(&self) -> f64 {
        let one = if self.s >= 0 { self.p_up } else { self.p_down };
        if self.two_sided {
            (2.0 * self.p_up.min(self.p_down)).min(1.0)
        } else {
            one
        }
    }

    pub fn significant_in(&self, dir: Direction) -> bool {
        let side = match dir {
            Direction::Up => self.s > 0,
            Direction::Down => self.s < 0,
        };
        if self.two_sided {
            side && self.p() < self.sig_level
        } else {
            side && self.p_toward(dir) < self.sig_level
        }
    }

    pub fn direction(&self) -> Option<Direction> {
        [Direction::Up, Direction::Down]
            .into_iter()
            .find(|&d| self.significant_in(d))
    }

    pub fn significant(&self) -> bool {
        self.direction().is_some()
    }
}

/// Largest untied series length whose null distribution is enumerated.
pub const EXACT_MAX_N: usize = 9;

/// Counts of permutations of `n` items by number of inversions.
fn inversion_counts(n: usize) -> Vec<u64> {
    let mut counts = vec![1u64];
    for k in 1..n {
        let mut next = vec![0u64; counts.len() + k];
        for (i, &c) in counts.iter().enumerate() {
            for slot in &mut next[i..=i + k] {
                *slot += c;
            }
        }
        counts = next;
    }
    counts
}

fn variance(values: &[f64]) -> f64 {
    let n = values.len() as f64;
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut ties = 0.0;
    let mut i = 0;
    while i < sorted.len() {
        let mut j = i + 1;
        while j < sorted.len() && sorted[j] == sorted[i] {
            j += 1;
        }
        let t = (j - i) as f64;
        ties += t * (t - 1.0) * (2.0 * t + 5.0);
        i = j;
    }
    (n * (n - 1.0) * (2.0 * n + 5.0) - ties) / 18.0
}

/// Mann–Kendall test on a series with optional missing points.
///
/// `None` when fewer than three points are present.
pub fn mann_kendall(series: &[Option<f64>], opts: &TrendOptions) -> Option<TrendResult> {
    let x: Vec<f64> = series.iter().flatten().copied().collect();
    let n = x.len();
    if n < 3 {
        return None;
    }
    let mut s = 0i64;
    for i in 0..n {
        for j in i + 1..n {
            s += match x[j].partial_cmp(&x[i]) {
                Some(std::cmp::Ordering::Greater) => 1,
                Some(std::cmp::Ordering::Less) => -1,
                _ => 0,
            };
        }
    }
    let var = variance(&x);
    let sd = var.sqrt();
    let z = if var <= 0.0 {
        0.0
    } else if s > 0 {
        (s - 1) as f64 / sd
    } else if s < 0 {
        (s + 1) as f64 / sd
    } else {
        0.0
    };
    let untied = var == (n * (n - 1) * (2 * n + 5)) as f64 / 18.0;
    let (p_up, p_down, exact) = if untied && n <= EXACT_MAX_N {
        let counts = inversion_counts(n);
        let total: u64 = counts.iter().sum();
        let pairs = (n * (n - 1) / 2) as i64;
        // S = pairs − 2·inversions.
        let (mut ge, mut le) = (0u64, 0u64);
        for (inv, &c) in counts.iter().enumerate() {
            let si = pairs - 2 * inv as i64;
            if si >= s {
                ge += c;
            }
            if si <= s {
                le += c;
            }
        }
        (ge as f64 / total as f64, le as f64 / total as f64, true)
    } else if var <= 0.0 {
        (0.5, 0.5, false)
    } else {
        // Continuity-corrected tails P(S' ≥ S) and P(S' ≤ S).
        let normal = Normal::standard();
        (
            normal.sf((s - 1) as f64 / sd),
            normal.cdf((s + 1) as f64 / sd),
            false,
        )
    };
    Some(TrendResult {
        s,
        variance: var,
        z,
        n,
        p_up: p_up.clamp(0.0, 1.0),
        p_down: p_down.clamp(0.0, 1.0),
        exact,
        sig_level: opts.sig_level,
        two_sided: opts.two_sided,
    })
}

/// Upper tail `P(X ≥ k)` for `X ~ Binomial(n, p)`.
pub fn binomial_aggregate(k: u64, n: u64, p: f64) -> f64 {
    assert!(k <= n, "binomial_aggregate needs k <= n");
    if k == 0 {
        return 1.0;
    }
    let (lp, lq) = (p.ln(), (-p).ln_1p());
    let tail: f64 = (k..=n)
        .map(|x| (ln_binomial(n, x) + x as f64 * lp + (n - x) as f64 * lq).exp())
        .sum();
    tail.clamp(0.0, 1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    Up,
    Down,
    NoTrend,
}

impl Verdict {
    pub fn label(self) -> &'static str {
        match self {
            Verdict::Up => "Up",
            Verdict::Down => "Down",
            Verdict::NoTrend => "---",
        }
    }
}

impl From<Direction> for Verdict {
    fn from(d: Direction) -> Self {
        match d {
            Direction::Up => Verdict::Up,
            Direction::Down => Verdict::Down,
        }
    }
}

/// Per-dataset test outcome fed to [`verdict_table`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrendRecord {
    pub dataset: String,
    pub bipartite: bool,
    pub scenario: Scenario,
    pub measure: MeasureId,
    /// `None` for skipped or insufficient series.
    pub result: Option<TrendResult>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateResult {
    pub measure: MeasureId,
    pub scenario: Scenario,
    pub predicted: Direction,
    pub n: u64,
    /// Datasets significant in the predicted direction.
    pub k: u64,
    pub p_binomial: f64,
    pub k_opposite: u64,
    pub p_opposite: f64,
    pub verdict: Verdict,
}

impl AggregateResult {
    /// The count shown in parentheses: datasets following the reported
    /// trend, or the predicted one when there is none.
    pub fn shown_count(&self) -> u64 {
        if self.verdict == Verdict::from(self.predicted.opposite()) {
            self.k_opposite
        } else {
            self.k
        }
    }

    pub fn cell(&self) -> String {
        format!("({}) {}", self.shown_count(), self.verdict.label())
    }
}

/// Aggregates per-dataset results into one row per (measure, scenario).
///
/// The predicted direction wins when its binomial p is below `sig_level`;
/// otherwise the opposite direction is tried, else the row has no trend.
/// Bipartite datasets never count toward the clustering row.
pub fn verdict_table(records: &[TrendRecord], sig_level: f64) -> Vec<AggregateResult> {
    let mut groups: BTreeMap<(MeasureId, Scenario), Vec<&TrendResult>> = BTreeMap::new();
    for r in records {
        let entry = groups.entry((r.measure, r.scenario)).or_default();
        if r.measure == MeasureId::Clustering && r.bipartite {
            continue;
        }
        if let Some(t) = &r.result {
            entry.push(t);
        }
    }
    groups
        .into_iter()
        .map(|((measure, scenario), results)| {
            let predicted = measure.predicted();
            let n = results.len() as u64;
            let k = results
                .iter()
                .filter(|t| t.significant_in(predicted))
                .count() as u64;
            let k_opposite = results
                .iter()
                .filter(|t| t.significant_in(predicted.opposite()))
                .count() as u64;
            let p_binomial = binomial_aggregate(k, n, sig_level);
            let p_opposite = binomial_aggregate(k_opposite, n, sig_level);
            let verdict = if n > 0 && p_binomial < sig_level {
                predicted.into()
            } else if n > 0 && p_opposite < sig_level {
                predicted.opposite().into()
            } else {
                Verdict::NoTrend
            };
            AggregateResult {
                measure,
                scenario,
                predicted,
                n,
                k,
                p_binomial,
                k_opposite,
                p_opposite,
                verdict,
            }
        })
        .collect()
}

/// Plain-text rendering of the aggregate table, one measure per line.
pub fn format_table(rows: &[AggregateResult]) -> String {
    let mut by_measure: BTreeMap<MeasureId, BTreeMap<Scenario, &AggregateResult>> = BTreeMap::new();
    for r in rows {
        by_measure
            .entry(r.measure)
            .or_default()
            .insert(r.scenario, r);
    }
    let mut out = format!(
        "{:<12} {:<12} {:<12} {}\n",
        "measure", "full", "connected", "predicted"
    );
    for (measure, cells) in by_measure {
        let cell = |s| cells.get(&s).map(|r| r.cell()).unwrap_or_default();
        let mut symbol = measure.spec().symbol.to_string();
        if measure == MeasureId::Clustering {
            symbol.push_str(" *");
        }
        out.push_str(&format!(
            "{:<12} {:<12} {:<12} {}\n",
            symbol,
            cell(Scenario::Full),
            cell(Scenario::Connected),
            measure.predicted().as_str()
        ));
    }
    out.push_str("* bipartite datasets are excluded\n");
    out
}
