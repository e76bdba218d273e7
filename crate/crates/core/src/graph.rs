//! Timestamped edge histories and immutable undirected multigraph snapshots.
//!
//! A [`TemporalEdgeList`] is the single source of truth for a dataset: its
//! edges are kept in stable timestamp order, so a snapshot at edge count `k`
//! is simply the multigraph formed by the first `k` edges. Snapshots store
//! the adjacency in compressed sparse row form with one entry per distinct
//! neighbour plus its multiplicity; vertex indices are dense and ordered by
//! ascending original node id.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Node identifier as it appears in input files.
pub type NodeId = u64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TemporalEdge {
    pub u: NodeId,
    pub v: NodeId,
    pub time: i64,
}

impl TemporalEdge {
    pub fn new(u: NodeId, v: NodeId, time: i64) -> Self {
        Self { u, v, time }
    }
}

/// Two-mode node id layout: ids below `right_offset` form the left
/// partition, ids at or above it the right partition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Partition {
    pub right_offset: NodeId,
}

impl Partition {
    pub fn is_left(&self, id: NodeId) -> bool {
        id < self.right_offset
    }
}

/// Loop-free edge history sorted stably by timestamp.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TemporalEdgeList {
    edges: Vec<TemporalEdge>,
    partition: Option<Partition>,
    node_count_hint: usize,
}

impl TemporalEdgeList {
    /// Sorts `edges` stably by timestamp and validates the invariants.
    ///
    /// Self-loops are rejected here; ingestion filters them beforehand.
    pub fn new(mut edges: Vec<TemporalEdge>, partition: Option<Partition>) -> Result<Self> {
        if edges.is_empty() {
            return Err(Error::EmptyInput("edge list has no edges".into()));
        }
        if let Some(e) = edges.iter().find(|e| e.u == e.v) {
            return Err(Error::Domain(format!("self-loop on node {}", e.u)));
        }
        if let Some(p) = partition {
            if let Some(e) = edges.iter().find(|e| p.is_left(e.u) == p.is_left(e.v)) {
                return Err(Error::Domain(format!(
                    "edge {}-{} does not connect the two partitions",
                    e.u, e.v
                )));
            }
        }
        edges.sort_by_key(|e| e.time);
        let mut ids: Vec<NodeId> = edges.iter().flat_map(|e| [e.u, e.v]).collect();
        ids.sort_unstable();
        ids.dedup();
        Ok(Self {
            edges,
            partition,
            node_count_hint: ids.len(),
        })
    }

    pub fn edges(&self) -> &[TemporalEdge] {
        &self.edges
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn partition(&self) -> Option<Partition> {
        self.partition
    }

    pub fn is_bipartite(&self) -> bool {
        self.partition.is_some()
    }

    /// Number of distinct nodes over the whole history.
    pub fn node_count_hint(&self) -> usize {
        self.node_count_hint
    }
}

/// Immutable undirected multigraph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GraphSnapshot {
    labels: Vec<NodeId>,
    offsets: Vec<usize>,
    targets: Vec<usize>,
    multiplicity: Vec<u32>,
    degrees: Vec<u64>,
    edge_count: u64,
    bipartite: bool,
}

impl GraphSnapshot {
    /// Builds a snapshot over the endpoints of `edges` plus any ids in
    /// `extra_vertices` (which may end up isolated).
    pub fn from_edges<I>(edges: I, extra_vertices: &[NodeId], bipartite: bool) -> Result<Self>
    where
        I: IntoIterator<Item = (NodeId, NodeId)>,
    {
        let pairs: Vec<(NodeId, NodeId)> = edges.into_iter().collect();
        let mut labels: Vec<NodeId> = pairs
            .iter()
            .flat_map(|&(u, v)| [u, v])
            .chain(extra_vertices.iter().copied())
            .collect();
        labels.sort_unstable();
        labels.dedup();

        let mut arcs = Vec::with_capacity(2 * pairs.len());
        for &(u, v) in &pairs {
            if u == v {
                return Err(Error::Domain(format!("self-loop on node {u}")));
            }
            let a = labels.binary_search(&u).expect("endpoint indexed");
            let b = labels.binary_search(&v).expect("endpoint indexed");
            arcs.push((a, b));
            arcs.push((b, a));
        }
        Ok(Self::from_dense_arcs(
            labels,
            arcs,
            pairs.len() as u64,
            bipartite,
        ))
    }

    /// `arcs` holds both orientations of every edge, in dense indices.
    fn from_dense_arcs(
        labels: Vec<NodeId>,
        mut arcs: Vec<(usize, usize)>,
        edge_count: u64,
        bipartite: bool,
    ) -> Self {
        let n = labels.len();
        arcs.sort_unstable();
        let mut offsets = Vec::with_capacity(n + 1);
        let mut targets = Vec::new();
        let mut multiplicity: Vec<u32> = Vec::new();
        let mut degrees = vec![0u64; n];
        offsets.push(0);
        let mut i = 0;
        for src in 0..n {
            while i < arcs.len() && arcs[i].0 == src {
                let dst = arcs[i].1;
                if targets.len() > *offsets.last().unwrap() && *targets.last().unwrap() == dst {
                    *multiplicity.last_mut().unwrap() += 1;
                } else {
                    targets.push(dst);
                    multiplicity.push(1);
                }
                degrees[src] += 1;
                i += 1;
            }
            offsets.push(targets.len());
        }
        let g = Self {
            labels,
            offsets,
            targets,
            multiplicity,
            degrees,
            edge_count,
            bipartite,
        };
        debug_assert_eq!(g.degrees.iter().sum::<u64>(), 2 * g.edge_count);
        g
    }

    /// Vertex count |V|.
    pub fn n(&self) -> usize {
        self.labels.len()
    }

    /// Edge count |E|, parallel edges included.
    pub fn m(&self) -> u64 {
        self.edge_count
    }

    pub fn is_bipartite(&self) -> bool {
        self.bipartite
    }

    pub fn labels(&self) -> &[NodeId] {
        &self.labels
    }

    pub fn label(&self, i: usize) -> NodeId {
        self.labels[i]
    }

    pub fn index_of(&self, id: NodeId) -> Option<usize> {
        self.labels.binary_search(&id).ok()
    }

    pub fn degree(&self, i: usize) -> u64 {
        self.degrees[i]
    }

    pub fn degrees(&self) -> &[u64] {
        &self.degrees
    }

    pub fn max_degree(&self) -> u64 {
        self.degrees.iter().copied().max().unwrap_or(0)
    }

    /// Number of distinct neighbours (degree in the simple projection).
    pub fn simple_degree(&self, i: usize) -> usize {
        self.offsets[i + 1] - self.offsets[i]
    }

    /// Distinct neighbours of `i` in ascending order.
    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.targets[self.offsets[i]..self.offsets[i + 1]]
    }

    /// Distinct neighbours of `i` with their edge multiplicities.
    pub fn neighbors_with_multiplicity(&self, i: usize) -> impl Iterator<Item = (usize, u32)> + '_ {
        let r = self.offsets[i]..self.offsets[i + 1];
        self.targets[r.clone()]
            .iter()
            .copied()
            .zip(self.multiplicity[r].iter().copied())
    }

    /// A_{ij}: number of parallel edges between `i` and `j`.
    pub fn multiplicity(&self, i: usize, j: usize) -> u32 {
        match self.neighbors(i).binary_search(&j) {
            Ok(pos) => self.multiplicity[self.offsets[i] + pos],
            Err(_) => 0,
        }
    }

    /// Distinct vertex pairs `(i, j, mult)` with `i < j`.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, u32)> + '_ {
        (0..self.n()).flat_map(move |i| {
            self.neighbors_with_multiplicity(i)
                .filter(move |&(j, _)| j > i)
                .map(move |(j, k)| (i, j, k))
        })
    }

    pub fn isolated_count(&self) -> usize {
        self.degrees.iter().filter(|&&d| d == 0).count()
    }

    /// Degrees of the non-isolated vertices, in vertex order.
    pub fn degree_sequence(&self) -> Vec<u64> {
        self.degrees.iter().copied().filter(|&d| d > 0).collect()
    }

    /// y = A x, with multiplicities.
    pub fn adjacency_mul(&self, x: &[f64], y: &mut [f64]) {
        for (i, yi) in y.iter_mut().enumerate() {
            let r = self.offsets[i]..self.offsets[i + 1];
            *yi = self.targets[r.clone()]
                .iter()
                .zip(&self.multiplicity[r])
                .map(|(&j, &k)| k as f64 * x[j])
                .sum();
        }
    }

    /// Component label per vertex; components are numbered in order of
    /// their smallest vertex index.
    pub fn component_labels(&self) -> (Vec<usize>, usize) {
        let n = self.n();
        let mut comp = vec![usize::MAX; n];
        let mut queue = VecDeque::new();
        let mut count = 0;
        for s in 0..n {
            if comp[s] != usize::MAX {
                continue;
            }
            comp[s] = count;
            queue.push_back(s);
            while let Some(x) = queue.pop_front() {
                for &y in self.neighbors(x) {
                    if comp[y] == usize::MAX {
                        comp[y] = count;
                        queue.push_back(y);
                    }
                }
            }
            count += 1;
        }
        (comp, count)
    }

    pub fn is_connected(&self) -> bool {
        self.n() > 0 && self.component_labels().1 == 1
    }

    /// Subgraph on the given dense vertex indices (ascending), keeping
    /// every edge whose endpoints are both kept.
    fn restrict(&self, keep: &[usize]) -> Self {
        let mut new_index = vec![usize::MAX; self.n()];
        for (k, &i) in keep.iter().enumerate() {
            new_index[i] = k;
        }
        let mut arcs = Vec::new();
        let mut edge_count = 0u64;
        for &i in keep {
            for (j, mult) in self.neighbors_with_multiplicity(i) {
                if new_index[j] == usize::MAX {
                    continue;
                }
                for _ in 0..mult {
                    arcs.push((new_index[i], new_index[j]));
                }
                if i < j {
                    edge_count += mult as u64;
                }
            }
        }
        let labels = keep.iter().map(|&i| self.labels[i]).collect();
        Self::from_dense_arcs(labels, arcs, edge_count, self.bipartite)
    }

    /// Copy of this snapshot with vertices of degree zero removed.
    pub fn without_isolated(&self) -> Self {
        let keep: Vec<usize> = (0..self.n()).filter(|&i| self.degrees[i] > 0).collect();
        self.restrict(&keep)
    }

    /// Copy of this snapshot with one more edge between dense indices `a`
    /// and `b`.
    pub fn with_edge(&self, a: usize, b: usize) -> Result<Self> {
        if a == b || a >= self.n() || b >= self.n() {
            return Err(Error::Domain(format!("cannot add edge {a}-{b}")));
        }
        let mut arcs = Vec::with_capacity(2 * self.edge_count as usize + 2);
        for i in 0..self.n() {
            for (j, mult) in self.neighbors_with_multiplicity(i) {
                for _ in 0..mult {
                    arcs.push((i, j));
                }
            }
        }
        arcs.push((a, b));
        arcs.push((b, a));
        Ok(Self::from_dense_arcs(
            self.labels.clone(),
            arcs,
            self.edge_count + 1,
            self.bipartite,
        ))
    }
}

/// Snapshot formed by the `edge_count` oldest edges.
pub fn build_snapshot(elist: &TemporalEdgeList, edge_count: usize) -> Result<GraphSnapshot> {
    if edge_count == 0 || edge_count > elist.len() {
        return Err(Error::Range {
            what: "edge_count",
            value: edge_count as i64,
            min: 1,
            max: elist.len() as i64,
        });
    }
    GraphSnapshot::from_edges(
        elist.edges()[..edge_count].iter().map(|e| (e.u, e.v)),
        &[],
        elist.is_bipartite(),
    )
}

/// Largest connected component, ties going to the component holding the
/// smallest node id. The returned vector maps each new vertex index to
/// its index in `g`.
pub fn largest_connected_component(g: &GraphSnapshot) -> Result<(GraphSnapshot, Vec<usize>)> {
    if g.m() == 0 {
        return Err(Error::EmptyInput("graph has no edges".into()));
    }
    let (comp, count) = g.component_labels();
    let mut sizes = vec![0usize; count];
    for &c in &comp {
        sizes[c] += 1;
    }
    // Components are numbered by smallest member, so the first maximum wins ties.
    let best = (0..count).fold(0, |b, c| if sizes[c] > sizes[b] { c } else { b });
    let keep: Vec<usize> = (0..g.n()).filter(|&i| comp[i] == best).collect();
    if keep.len() == g.n() {
        return Ok((g.clone(), keep));
    }
    Ok((g.restrict(&keep), keep))
}

/// Subgraph on the vertices with the given original ids, multiplicities
/// preserved. Kept vertices may become isolated.
pub fn induced_subgraph(g: &GraphSnapshot, keep: &[NodeId]) -> Result<GraphSnapshot> {
    let mut idx = Vec::with_capacity(keep.len());
    for &id in keep {
        match g.index_of(id) {
            Some(i) => idx.push(i),
            None => return Err(Error::Domain(format!("node {id} is not in the graph"))),
        }
    }
    idx.sort_unstable();
    idx.dedup();
    Ok(g.restrict(&idx))
}

/// 2|E| / |V|.
pub fn average_degree(g: &GraphSnapshot) -> Result<f64> {
    if g.n() == 0 {
        return Err(Error::EmptyInput("graph has no vertices".into()));
    }
    Ok(2.0 * g.m() as f64 / g.n() as f64)
}

#[cfg(test)]
pub(crate) mod fixtures {
    use super::*;

    pub fn graph(edges: &[(NodeId, NodeId)]) -> GraphSnapshot {
        GraphSnapshot::from_edges(edges.iter().copied(), &[], false).unwrap()
    }

    pub fn complete(n: u64) -> GraphSnapshot {
        let mut e = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                e.push((i, j));
            }
        }
        graph(&e)
    }

    pub fn path(n: u64) -> GraphSnapshot {
        graph(&(0..n - 1).map(|i| (i, i + 1)).collect::<Vec<_>>())
    }

    pub fn cycle(n: u64) -> GraphSnapshot {
        graph(&(0..n).map(|i| (i, (i + 1) % n)).collect::<Vec<_>>())
    }

    pub fn star(leaves: u64) -> GraphSnapshot {
        graph(&(1..=leaves).map(|i| (0, i)).collect::<Vec<_>>())
    }
}

#[cfg(test)]
mod tests {
    use super::fixtures::*;
    use super::*;

    fn elist(edges: &[(NodeId, NodeId, i64)]) -> TemporalEdgeList {
        TemporalEdgeList::new(
            edges
                .iter()
                .map(|&(u, v, t)| TemporalEdge::new(u, v, t))
                .collect(),
            None,
        )
        .unwrap()
    }

    #[test]
    fn full_snapshot_keeps_everything() {
        let edges: Vec<_> = (0..10).map(|i| (i, i + 1, i as i64)).collect();
        let g = build_snapshot(&elist(&edges), 10).unwrap();
        assert_eq!(g.m(), 10);
        assert_eq!(g.n(), 11);
    }

    #[test]
    fn parallel_edges_count_in_degrees() {
        let g = build_snapshot(&elist(&[(0, 1, 1), (0, 1, 2), (1, 2, 3)]), 3).unwrap();
        assert_eq!(g.m(), 3);
        assert_eq!(g.degrees(), &[2, 3, 1]);
        assert_eq!(g.multiplicity(0, 1), 2);
        assert_eq!(g.multiplicity(1, 0), 2);
    }

    #[test]
    fn equal_timestamps_keep_file_order() {
        let el = elist(&[(5, 6, 7), (1, 2, 7)]);
        let g = build_snapshot(&el, 1).unwrap();
        assert_eq!(g.labels(), &[5, 6]);
    }

    #[test]
    fn snapshot_range_errors() {
        let el = elist(&[(1, 2, 0)]);
        assert!(matches!(build_snapshot(&el, 0), Err(Error::Range { .. })));
        assert!(matches!(build_snapshot(&el, 2), Err(Error::Range { .. })));
    }

    #[test]
    fn self_loops_are_rejected() {
        assert!(TemporalEdgeList::new(vec![TemporalEdge::new(3, 3, 0)], None).is_err());
    }

    #[test]
    fn bipartite_edges_must_cross() {
        let p = Some(Partition { right_offset: 10 });
        assert!(TemporalEdgeList::new(vec![TemporalEdge::new(1, 11, 0)], p).is_ok());
        assert!(TemporalEdgeList::new(vec![TemporalEdge::new(1, 2, 0)], p).is_err());
    }

    #[test]
    fn lcc_of_connected_graph_is_itself() {
        let g = cycle(6);
        let (h, map) = largest_connected_component(&g).unwrap();
        assert_eq!(h, g);
        assert_eq!(map, (0..6).collect::<Vec<_>>());
    }

    #[test]
    fn lcc_picks_largest() {
        let g = graph(&[(10, 11), (11, 12), (20, 21), (21, 22), (22, 23), (23, 24)]);
        let (h, _) = largest_connected_component(&g).unwrap();
        assert_eq!(h.labels(), &[20, 21, 22, 23, 24]);
        assert!(h.is_connected());
    }

    #[test]
    fn lcc_tie_goes_to_smallest_id() {
        let g = graph(&[(7, 8), (8, 9), (7, 9), (3, 4), (4, 5), (3, 5)]);
        let (h, map) = largest_connected_component(&g).unwrap();
        assert_eq!(h.labels(), &[3, 4, 5]);
        assert_eq!(map, vec![0, 1, 2]);
    }

    #[test]
    fn lcc_of_empty_graph_fails() {
        let g = GraphSnapshot::from_edges(std::iter::empty(), &[1, 2], false).unwrap();
        assert!(matches!(
            largest_connected_component(&g),
            Err(Error::EmptyInput(_))
        ));
    }

    #[test]
    fn induced_subgraph_cases() {
        let g = path(3);
        assert_eq!(induced_subgraph(&g, &[0, 1, 2]).unwrap(), g);
        let h = induced_subgraph(&g, &[0, 1]).unwrap();
        assert_eq!((h.n(), h.m()), (2, 1));

        let s = star(4);
        let h = induced_subgraph(&s, &[1, 2, 3, 4]).unwrap();
        assert_eq!((h.n(), h.m()), (4, 0));
        assert_eq!(h.isolated_count(), 4);

        assert!(matches!(
            induced_subgraph(&g, &[0, 99]),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn average_degree_examples() {
        assert_eq!(average_degree(&complete(4)).unwrap(), 3.0);
        assert_eq!(average_degree(&star(4)).unwrap(), 1.6);
        assert_eq!(average_degree(&graph(&[(0, 1), (0, 1)])).unwrap(), 2.0);
        let empty = GraphSnapshot::from_edges(std::iter::empty(), &[], false).unwrap();
        assert!(average_degree(&empty).is_err());
    }

    #[test]
    fn with_edge_adds_multiplicity() {
        let g = path(3).with_edge(0, 1).unwrap();
        assert_eq!(g.m(), 3);
        assert_eq!(g.multiplicity(0, 1), 2);
        assert!(path(3).with_edge(1, 1).is_err());
    }

    #[test]
    fn without_isolated_drops_zero_degree() {
        let g = GraphSnapshot::from_edges([(1, 2)], &[5, 9], false).unwrap();
        assert_eq!(g.n(), 4);
        let h = g.without_isolated();
        assert_eq!(h.labels(), &[1, 2]);
    }
}
