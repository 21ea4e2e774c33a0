//! Exact minimum terminal cuts with deterministic tie-breaking.
//!
//! Edge weights are perturbed to `c(e_i) * 2^(m+1) + 2^i` in exact
//! big-integer arithmetic, which makes every minimizer unique while keeping
//! base costs strictly dominant, and is symmetric in S and its complement.
//! Zero-weight edges get perturbed weight `2^i > 0`, so they never create
//! ambiguity yet cost nothing at base scale.

use std::collections::BTreeSet;

use num_bigint::BigUint;
use num_traits::One;

use crate::flow::FlowNetwork;
use crate::graph::{EdgeId, PlanarGraph, VertexId};
use crate::{Error, Result};

/// Terminal subset as a bitmask over the graph's ordered terminal list.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TerminalSet(pub u32);

impl TerminalSet {
    pub fn full(k: usize) -> Self {
        TerminalSet(((1u64 << k) - 1) as u32)
    }

    pub fn complement(self, k: usize) -> Self {
        TerminalSet(Self::full(k).0 & !self.0)
    }

    /// The canonical representative of {S, complement}: numerically smaller
    /// mask.
    pub fn canonical(self, k: usize) -> Self {
        let c = self.complement(k);
        if c.0 < self.0 {
            c
        } else {
            self
        }
    }

    pub fn is_proper_nonempty(self, k: usize) -> bool {
        self.0 != 0 && self.0 != Self::full(k).0
    }

    pub fn contains(self, idx: usize) -> bool {
        self.0 >> idx & 1 == 1
    }

    pub fn is_subset_of(self, other: TerminalSet) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn iter(self) -> impl Iterator<Item = usize> {
        (0..32).filter(move |&i| self.contains(i))
    }

    /// Mask of the terminals contained in a vertex set.
    pub fn of_vertices(g: &PlanarGraph, vs: &BTreeSet<VertexId>) -> Self {
        let mut mask = 0u32;
        for (i, t) in g.terminals().iter().enumerate() {
            if vs.contains(t) {
                mask |= 1 << i;
            }
        }
        TerminalSet(mask)
    }
}

/// Perturbed weight of edge `e`: `c(e) * 2^(m+1) + 2^e`.
pub fn perturbed_weight(g: &PlanarGraph, e: EdgeId) -> BigUint {
    let m = g.m();
    (BigUint::from(g.weight(e)) << (m + 1)) + (BigUint::one() << e)
}

/// Perturbed total of an edge set; distinct sets have distinct totals.
pub fn perturbed_cost(g: &PlanarGraph, edges: &BTreeSet<EdgeId>) -> BigUint {
    edges.iter().map(|&e| perturbed_weight(g, e)).sum()
}

/// Recover the base (true) cost from a perturbed total: the low `m+1` bits
/// hold the edge-set fingerprint, everything above is the base cost.
pub fn base_of_perturbed(g: &PlanarGraph, perturbed: &BigUint) -> u64 {
    let base: BigUint = perturbed >> (g.m() + 1);
    let digits = base.to_u64_digits();
    match digits.len() {
        0 => 0,
        1 => digits[0],
        _ => panic!("base cost exceeds u64"),
    }
}

/// A terminal subset together with its unique minimum cutset.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cutset {
    /// Canonical mask (numerically smaller of S and its complement).
    pub smask: TerminalSet,
    pub edges: BTreeSet<EdgeId>,
    pub base_cost: u64,
    pub perturbed_cost: BigUint,
}

/// Connected components of `G \ M` with per-component terminal masks.
#[derive(Debug, Clone)]
pub struct ComponentPartition {
    /// Vertex sets ordered by smallest member.
    pub comps: Vec<BTreeSet<VertexId>>,
    pub terminal_masks: Vec<TerminalSet>,
    /// Vertex -> component index.
    pub comp_of: Vec<usize>,
}

impl ComponentPartition {
    pub fn len(&self) -> usize {
        self.comps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.comps.is_empty()
    }
}

/// Connected components of the graph with edge set `M` removed.
pub fn components(g: &PlanarGraph, removed: &BTreeSet<EdgeId>) -> ComponentPartition {
    let n = g.n();
    let mut comp_of = vec![usize::MAX; n];
    let mut comps = Vec::new();
    for v0 in 0..n {
        if comp_of[v0] != usize::MAX {
            continue;
        }
        let idx = comps.len();
        let mut set = BTreeSet::new();
        let mut stack = vec![v0];
        comp_of[v0] = idx;
        set.insert(v0);
        while let Some(v) = stack.pop() {
            for e in g.emb().incident_edges(v) {
                if removed.contains(&e) {
                    continue;
                }
                let w = g.emb().edge(e).other(v);
                if comp_of[w] == usize::MAX {
                    comp_of[w] = idx;
                    set.insert(w);
                    stack.push(w);
                }
            }
        }
        comps.push(set);
    }
    let terminal_masks = comps
        .iter()
        .map(|c| TerminalSet::of_vertices(g, c))
        .collect();
    ComponentPartition {
        comps,
        terminal_masks,
        comp_of,
    }
}

/// Edges with exactly one endpoint in `c` (self-loops never cross).
pub fn boundary(g: &PlanarGraph, c: &BTreeSet<VertexId>) -> BTreeSet<EdgeId> {
    (0..g.m())
        .filter(|&e| {
            let rec = g.emb().edge(e);
            c.contains(&rec.u) != c.contains(&rec.v)
        })
        .collect()
}

/// The unique minimum S-separating cutset under perturbed weights, computed
/// by max-flow with S merged to a source and the remaining terminals to a
/// sink. The base cost equals the true minimum cut value because the
/// perturbation scale keeps base costs strictly dominant.
pub fn min_terminal_cut(g: &PlanarGraph, s: TerminalSet) -> Result<Cutset> {
    let k = g.k();
    if !s.is_proper_nonempty(k) {
        return Err(Error::InvalidSubset(format!(
            "mask {:#x} must be a proper nonempty terminal subset (k={})",
            s.0, k
        )));
    }
    // Nodes: 0 = source (S side), 1 = sink, 2.. = non-terminal vertices.
    let mut node_of = vec![usize::MAX; g.n()];
    for (i, &t) in g.terminals().iter().enumerate() {
        node_of[t] = if s.contains(i) { 0 } else { 1 };
    }
    let mut next = 2;
    for v in 0..g.n() {
        if node_of[v] == usize::MAX {
            node_of[v] = next;
            next += 1;
        }
    }
    let mut net = FlowNetwork::new(next);
    for e in 0..g.m() {
        let rec = g.emb().edge(e);
        let (u, v) = (node_of[rec.u], node_of[rec.v]);
        if u == v {
            continue;
        }
        net.add_undirected(u, v, perturbed_weight(g, e));
    }
    let (value, source_side_nodes) = net.max_flow(0, 1);

    let side: BTreeSet<VertexId> = (0..g.n())
        .filter(|&v| source_side_nodes[node_of[v]])
        .collect();
    let edges = boundary(g, &side);
    let perturbed = perturbed_cost(g, &edges);
    if perturbed != value {
        return Err(Error::Internal(format!(
            "max-flow value does not match cut cost for mask {:#x}",
            s.0
        )));
    }
    let base_cost = base_of_perturbed(g, &perturbed);
    Ok(Cutset {
        smask: s.canonical(k),
        edges,
        base_cost,
        perturbed_cost: perturbed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gen;
    use crate::oracle;

    #[test]
    fn series_path_takes_cheaper_edge() {
        let g = gen::path_weighted(&[3, 7]).unwrap();
        let cut = min_terminal_cut(&g, TerminalSet(0b01)).unwrap();
        assert_eq!(cut.base_cost, 3);
        assert_eq!(cut.edges, [0usize].into_iter().collect());
    }

    #[test]
    fn square_singleton_cut() {
        let g = crate::PlanarGraph::new(
            4,
            vec![
                EdgeRecTest::e(0, 1),
                EdgeRecTest::e(1, 2),
                EdgeRecTest::e(2, 3),
                EdgeRecTest::e(3, 0),
            ],
            vec![vec![0, 3], vec![1, 0], vec![2, 1], vec![3, 2]],
            vec![0, 1, 2, 3],
            None,
            None,
            None,
        )
        .unwrap();
        let cut = min_terminal_cut(&g, TerminalSet(0b0001)).unwrap();
        assert_eq!(cut.base_cost, 2);
        assert_eq!(cut.edges, [0usize, 3].into_iter().collect());
    }

    struct EdgeRecTest;
    impl EdgeRecTest {
        fn e(u: usize, v: usize) -> crate::EdgeRec {
            crate::EdgeRec::new(u, v, 1)
        }
    }

    #[test]
    fn grid_corner_cut_matches_oracle() {
        let g = gen::grid(3, 3, 4, gen::TerminalRule::Corners, 1, 1, 7).unwrap();
        let cut = min_terminal_cut(&g, TerminalSet(0b0001)).unwrap();
        assert_eq!(cut.base_cost, 2);
        let (oc, oedges) = oracle::mincut_bipartition(&g, TerminalSet(0b0001)).unwrap();
        assert_eq!(oc, 2);
        assert_eq!(cut.edges, oedges);
    }

    #[test]
    fn symmetric_in_complement() {
        let g = gen::grid(3, 4, 5, gen::TerminalRule::EvenBoundary, 1, 30, 11).unwrap();
        let k = g.k();
        for mask in 1..(1u32 << (k - 1)) {
            let s = TerminalSet(mask);
            let a = min_terminal_cut(&g, s).unwrap();
            let b = min_terminal_cut(&g, s.complement(k)).unwrap();
            assert_eq!(a.edges, b.edges);
            assert_eq!(a.smask, b.smask);
        }
    }

    #[test]
    fn components_cases() {
        let g = gen::grid(2, 2, 4, gen::TerminalRule::Corners, 1, 1, 0).unwrap();
        assert_eq!(components(&g, &BTreeSet::new()).len(), 1);
        let all: BTreeSet<_> = (0..g.m()).collect();
        assert_eq!(components(&g, &all).len(), g.n());
    }

    #[test]
    fn boundary_cases() {
        let g = gen::grid(2, 2, 4, gen::TerminalRule::Corners, 1, 1, 0).unwrap();
        let all: BTreeSet<_> = (0..g.n()).collect();
        assert!(boundary(&g, &all).is_empty());
        let one: BTreeSet<_> = [0usize].into_iter().collect();
        assert_eq!(boundary(&g, &one).len(), 2);
    }

    #[test]
    fn source_side_boundary_is_the_cutset() {
        let g = gen::grid(3, 3, 4, gen::TerminalRule::Corners, 1, 9, 2).unwrap();
        let k = g.k();
        for mask in 1..(1u32 << (k - 1)) {
            let s = TerminalSet(mask);
            let cut = min_terminal_cut(&g, s).unwrap();
            let parts = components(&g, &cut.edges);
            if parts.len() == 2 {
                for comp in &parts.comps {
                    assert_eq!(boundary(&g, comp), cut.edges);
                }
            }
        }
    }

    #[test]
    fn rejects_empty_and_full() {
        let g = gen::path(3, 1, 1, 0).unwrap();
        assert!(min_terminal_cut(&g, TerminalSet(0)).is_err());
        assert!(min_terminal_cut(&g, TerminalSet::full(2)).is_err());
    }
}
