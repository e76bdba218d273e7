//! Degree-distribution measures: Gini, Jain's fairness index, the power-law
//! exponent estimate and the relative edge-distribution entropy.
//!
//! All four are functions of the multiset of positive degrees only. Isolated
//! vertices are dropped when the statistics are collected.

use crate::error::{Error, Result};
use crate::graph::GraphSnapshot;

#[derive(Debug, Clone, PartialEq)]
pub struct DegreeStats {
    sorted: Vec<u64>,
    sum: u64,
    sum_sq: u128,
}

impl DegreeStats {
    /// Collects the degrees of `g`, skipping isolated vertices.
    pub fn from_snapshot(g: &GraphSnapshot) -> Result<Self> {
        let isolated = g.isolated_count();
        if isolated > 0 {
            log::debug!("excluding {isolated} isolated vertices from degree statistics");
        }
        Self::from_degrees(g.degrees().iter().copied().filter(|&d| d > 0).collect())
    }

    pub fn from_degrees(mut degrees: Vec<u64>) -> Result<Self> {
        if degrees.is_empty() {
            return Err(Error::EmptyInput("degree sequence is empty".into()));
        }
        if degrees.contains(&0) {
            return Err(Error::Domain("degree sequence contains a zero".into()));
        }
        degrees.sort_unstable();
        let sum = degrees.iter().sum();
        let sum_sq = degrees.iter().map(|&d| (d as u128) * (d as u128)).sum();
        Ok(DegreeStats {
            sorted: degrees,
            sum,
            sum_sq,
        })
    }

    pub fn sorted_degrees(&self) -> &[u64] {
        &self.sorted
    }

    pub fn n(&self) -> usize {
        self.sorted.len()
    }

    pub fn sum(&self) -> u64 {
        self.sum
    }

    pub fn sum_sq(&self) -> u128 {
        self.sum_sq
    }

    pub fn d_min(&self) -> u64 {
        self.sorted[0]
    }

    pub fn is_regular(&self) -> bool {
        self.sorted[0] == self.sorted[self.sorted.len() - 1]
    }
}

/// Sample Gini coefficient of the degrees. `None` for fewer than two vertices.
pub fn gini_coefficient(ds: &DegreeStats) -> Option<f64> {
    let n = ds.n();
    if n < 2 {
        return None;
    }
    if ds.is_regular() {
        return Some(0.0);
    }
    // Integer accumulation keeps regular and near-regular inputs exact.
    let num: i128 = ds
        .sorted
        .iter()
        .enumerate()
        .map(|(i, &x)| (2 * (i as i128 + 1) - n as i128 - 1) * x as i128)
        .sum();
    Some(num as f64 / (n as f64 * ds.sum as f64))
}

/// Jain's fairness index `(Σd)² / (n Σd²)`.
pub fn jain_index(ds: &DegreeStats) -> f64 {
    if ds.is_regular() {
        return 1.0;
    }
    let s = ds.sum as f64;
    s * s / (ds.n() as f64 * ds.sum_sq as f64)
}

/// Closed-form power-law exponent `1 + n / Σ ln(d/d_min)`.
///
/// `None` below two vertices; `Some(+∞)` when every degree equals the
/// minimum.
pub fn power_law_exponent(ds: &DegreeStats) -> Option<f64> {
    if ds.n() < 2 {
        return None;
    }
    if ds.is_regular() {
        return Some(f64::INFINITY);
    }
    let dmin = ds.d_min() as f64;
    let s: f64 = ds.sorted.iter().map(|&d| (d as f64 / dmin).ln()).sum();
    Some(1.0 + ds.n() as f64 / s)
}

/// Entropy of the half-edge distribution normalised by `ln n`.
pub fn relative_entropy(ds: &DegreeStats) -> Option<f64> {
    let n = ds.n();
    if n < 2 {
        return None;
    }
    if ds.is_regular() {
        return Some(1.0);
    }
    let total = ds.sum as f64;
    let h: f64 = ds
        .sorted
        .iter()
        .map(|&d| {
            let p = d as f64 / total;
            -p * p.ln()
        })
        .sum();
    Some((h / (n as f64).ln()).clamp(0.0, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::fixtures::{complete, cycle, path, star};
    use proptest::prelude::*;

    fn stats(d: &[u64]) -> DegreeStats {
        DegreeStats::from_degrees(d.to_vec()).unwrap()
    }

    // Twice the area between the equality line and the Lorenz polyline.
    fn lorenz_gini(d: &[u64]) -> f64 {
        let mut x: Vec<f64> = d.iter().map(|&v| v as f64).collect();
        x.sort_by(f64::total_cmp);
        let n = x.len() as f64;
        let total: f64 = x.iter().sum();
        let mut area = 0.0;
        let mut prev = 0.0;
        let mut cum = 0.0;
        for v in &x {
            cum += v / total;
            area += (prev + cum) / 2.0 / n;
            prev = cum;
        }
        1.0 - 2.0 * area
    }

    // Mean absolute difference form: Σ_i Σ_j |x_i - x_j| / (2 n² mean).
    fn pairwise_gini(d: &[u64]) -> f64 {
        let n = d.len() as f64;
        let mean = d.iter().sum::<u64>() as f64 / n;
        let mut s = 0.0;
        for &a in d {
            for &b in d {
                s += (a as f64 - b as f64).abs();
            }
        }
        s / (2.0 * n * n * mean)
    }

    #[test]
    fn star_values() {
        let ds = DegreeStats::from_snapshot(&star(4)).unwrap();
        assert!((gini_coefficient(&ds).unwrap() - 0.3).abs() < 1e-12);
        assert!((jain_index(&ds) - 0.64).abs() < 1e-12);
        let want = 4f64.ln() / 5f64.ln();
        assert!((relative_entropy(&ds).unwrap() - want).abs() < 1e-12);
        assert!((lorenz_gini(&[1, 1, 1, 1, 4]) - 0.3).abs() < 1e-12);
        assert!((pairwise_gini(&[1, 1, 1, 1, 4]) - 0.3).abs() < 1e-12);
    }

    #[test]
    fn path_values() {
        let ds = DegreeStats::from_snapshot(&path(3)).unwrap();
        assert!((gini_coefficient(&ds).unwrap() - 1.0 / 6.0).abs() < 1e-12);
        assert!((jain_index(&ds) - 16.0 / 18.0).abs() < 1e-12);
        assert!((relative_entropy(&ds).unwrap() - 0.9464).abs() < 1e-4);
    }

    #[test]
    fn power_law_examples() {
        let want = 1.0 + 4.0 / (3.0 * 2f64.ln());
        assert!((power_law_exponent(&stats(&[1, 1, 2, 4])).unwrap() - want).abs() < 1e-12);
        assert!((want - 2.9236).abs() < 1e-4);
        let want = 1.0 + 4.0 / (6.0 * 2f64.ln());
        assert!((power_law_exponent(&stats(&[2, 4, 8, 16])).unwrap() - want).abs() < 1e-12);
        assert!((want - 1.9618).abs() < 1e-4);
    }

    #[test]
    fn regular_graphs() {
        for g in [complete(5), cycle(7)] {
            let ds = DegreeStats::from_snapshot(&g).unwrap();
            assert_eq!(gini_coefficient(&ds), Some(0.0));
            assert_eq!(jain_index(&ds), 1.0);
            assert_eq!(relative_entropy(&ds), Some(1.0));
            assert_eq!(power_law_exponent(&ds), Some(f64::INFINITY));
        }
    }

    #[test]
    fn small_inputs_are_undefined() {
        let ds = stats(&[3]);
        assert_eq!(gini_coefficient(&ds), None);
        assert_eq!(relative_entropy(&ds), None);
        assert_eq!(power_law_exponent(&ds), None);
        assert!(DegreeStats::from_degrees(vec![]).is_err());
        assert!(DegreeStats::from_degrees(vec![0, 1]).is_err());
    }

    #[test]
    fn isolated_vertices_are_excluded() {
        let g = GraphSnapshot::from_edges([(1, 2), (2, 3)], &[9, 10], false).unwrap();
        let ds = DegreeStats::from_snapshot(&g).unwrap();
        assert_eq!(ds.sorted_degrees(), &[1, 1, 2]);
        assert_eq!(ds.sum(), 4);
        assert_eq!(ds.sum_sq(), 6);
    }

    fn degrees() -> impl Strategy<Value = Vec<u64>> {
        prop::collection::vec(1u64..60, 2..40)
    }

    proptest! {
        #[test]
        fn bounds_hold(d in degrees()) {
            let ds = stats(&d);
            let n = d.len() as f64;
            let g = gini_coefficient(&ds).unwrap();
            prop_assert!(g >= 0.0 && g <= 1.0 - 1.0 / n + 1e-12);
            let j = jain_index(&ds);
            prop_assert!(j > 1.0 / n && j <= 1.0);
            let h = relative_entropy(&ds).unwrap();
            prop_assert!((0.0..=1.0).contains(&h));
            let gamma = power_law_exponent(&ds).unwrap();
            prop_assert!(gamma > 1.0);
        }

        #[test]
        fn gini_matches_independent_forms(d in degrees()) {
            let g = gini_coefficient(&stats(&d)).unwrap();
            prop_assert!((g - pairwise_gini(&d)).abs() < 1e-12);
            prop_assert!((g - lorenz_gini(&d)).abs() < 1e-12);
        }

        #[test]
        fn equality_characterisations_agree(d in degrees()) {
            let ds = stats(&d);
            let regular = ds.is_regular();
            prop_assert_eq!(gini_coefficient(&ds) == Some(0.0), regular);
            prop_assert_eq!(jain_index(&ds) == 1.0, regular);
            prop_assert_eq!(relative_entropy(&ds) == Some(1.0), regular);
            prop_assert_eq!(power_law_exponent(&ds) == Some(f64::INFINITY), regular);
        }

        #[test]
        fn duplicating_the_multiset_preserves_shape(d in degrees()) {
            let a = stats(&d);
            let mut dd = d.clone();
            dd.extend_from_slice(&d);
            let b = stats(&dd);
            prop_assert!((gini_coefficient(&a).unwrap() - gini_coefficient(&b).unwrap()).abs() < 1e-12);
            prop_assert!((jain_index(&a) - jain_index(&b)).abs() < 1e-12);
        }

        #[test]
        fn jain_is_at_least_the_star_bound(n in 3u64..40, extra in prop::collection::vec((0u64..40, 0u64..40), 0..80)) {
            // A spanning path plus random chords: simple and connected.
            let mut edges: Vec<(u64, u64)> = (0..n - 1).map(|i| (i, i + 1)).collect();
            for (a, b) in extra {
                let (a, b) = (a % n, b % n);
                if a != b && !edges.contains(&(a.min(b), a.max(b))) {
                    edges.push((a.min(b), a.max(b)));
                }
            }
            let g = GraphSnapshot::from_edges(edges, &[], false).unwrap();
            let j = jain_index(&DegreeStats::from_snapshot(&g).unwrap());
            let nf = n as f64;
            prop_assert!(j >= 4.0 * (nf - 1.0) / (nf * nf) - 1e-12);
        }
    }
}
