//! Dual-cycle fragment machinery for terminals spread over several faces:
//! parity of dual faces, odd terminal sets, splitting elementary dual cycles
//! at cover-face dual vertices into path fragments, three-part labels with a
//! uniqueness guarantee, and the coarser two-vector labels.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use num_bigint::BigUint;
use serde::Serialize;

use crate::elementary::ElementaryCatalog;
use crate::graph::{build_dual, Dart, DualGraph, EdgeId, FaceCover, FaceId, PlanarGraph, VertexId};
use crate::mincut::{components, perturbed_weight, TerminalSet};
use crate::{Error, Result};

/// Multiset of dual edge ids (dual and primal edges share ids).
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Circuit(pub BTreeMap<EdgeId, usize>);

impl Circuit {
    pub fn from_edges<I: IntoIterator<Item = EdgeId>>(edges: I) -> Self {
        let mut m = BTreeMap::new();
        for e in edges {
            *m.entry(e).or_insert(0) += 1;
        }
        Circuit(m)
    }

    pub fn count(&self, e: EdgeId) -> usize {
        self.0.get(&e).copied().unwrap_or(0)
    }

    /// Multiset union (counts add).
    pub fn union(&self, other: &Circuit) -> Circuit {
        let mut m = self.0.clone();
        for (&e, &c) in &other.0 {
            *m.entry(e).or_insert(0) += c;
        }
        Circuit(m)
    }
}

/// Three-part fragment label: endpoint cover faces, entry gaps, and the
/// blockwise odd signature of fragment-plus-connector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct Label {
    /// Cover indices of the two endpoints (i <= j after canonicalization,
    /// except that orientation fixes the gap pairing).
    pub endpoints: (usize, usize),
    /// Entry gap at each endpoint, 1-based within that face's terminal
    /// cycle.
    pub gaps: (usize, usize),
    /// Bit r set when the whole terminal block of cover face r is odd with
    /// respect to fragment union connector.
    pub odd_blocks: u32,
}

/// A W-delimited piece of an elementary dual cycle.
#[derive(Debug, Clone)]
pub struct PathFragment {
    /// Dual darts in canonical orientation.
    pub darts: Vec<Dart>,
    pub label: Label,
    pub base_cost: u64,
    /// Canonical masks of the elementary subsets whose cycles contain it.
    pub sources: Vec<u32>,
    /// Dart-level incidences with cover-face dual vertices (2 for every
    /// fragment; whole cycles score 0).
    pub boundary_incidences: usize,
    /// True for the single-W closed-walk case.
    pub closed: bool,
}

impl PathFragment {
    pub fn edge_ids(&self) -> Vec<EdgeId> {
        self.darts.iter().map(|&d| d / 2).collect()
    }
}

/// An elementary dual cycle avoiding every cover-face dual vertex.
#[derive(Debug, Clone)]
pub struct WholeCycle {
    pub edges: BTreeSet<EdgeId>,
    pub odd_blocks: u32,
    pub odd_terminals: u32,
    pub base_cost: u64,
    pub sources: Vec<u32>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PoolRef {
    Fragment(usize),
    Cycle(usize),
}

/// All fragments and whole cycles over the catalog, deduplicated, with the
/// per-subset reconstruction.
#[derive(Debug, Clone)]
pub struct FragmentPool {
    pub fragments: Vec<PathFragment>,
    pub whole_cycles: Vec<WholeCycle>,
    pub per_s: BTreeMap<u32, Vec<PoolRef>>,
    /// 2^gamma * (1 + k^2), the hard pool-size bound.
    pub size_bound: u64,
}

impl FragmentPool {
    pub fn len(&self) -> usize {
        self.fragments.len() + self.whole_cycles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// `part1 part2 part3-signature cost edge-list` lines, fragments first.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for f in &self.fragments {
            let _ = write!(
                out,
                "w{},{} g{},{} {:x} {}",
                f.label.endpoints.0,
                f.label.endpoints.1,
                f.label.gaps.0,
                f.label.gaps.1,
                f.label.odd_blocks,
                f.base_cost
            );
            for e in f.edge_ids() {
                let _ = write!(out, " {e}");
            }
            out.push('\n');
        }
        for c in &self.whole_cycles {
            let _ = write!(out, "cycle - {:x} {}", c.odd_blocks, c.base_cost);
            for &e in &c.edges {
                let _ = write!(out, " {e}");
            }
            out.push('\n');
        }
        out
    }
}

/// Coarse per-face label: the two split positions of each cover face's
/// terminal cycle (1,1 when the cycle misses that face's dual vertex).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct NaiveLabel {
    pub x: Vec<usize>,
    pub y: Vec<usize>,
}

/// Shared context: the dual graph, cover-face terminal cycles, gap lookup,
/// the parity reference vertex, and its fixed spanning-tree paths.
pub struct LabelContext<'g> {
    pub g: &'g PlanarGraph,
    pub dual: DualGraph,
    pub cover: FaceCover,
    /// Ordered terminal cycle per cover face, walk order starting at the
    /// lowest-id assigned terminal.
    pub face_terms: Vec<Vec<VertexId>>,
    cover_index: BTreeMap<FaceId, usize>,
    pub v_inf: VertexId,
    /// BFS tree toward v_inf: parent vertex and connecting edge.
    parent: Vec<Option<(VertexId, EdgeId)>>,
    /// Dual dart leaving a cover-face vertex -> 1-based gap index.
    dart_gap: BTreeMap<Dart, usize>,
    /// Dual dart in a cover-face walk -> position in that walk.
    dart_walk_pos: BTreeMap<Dart, usize>,
}

impl<'g> LabelContext<'g> {
    pub fn new(g: &'g PlanarGraph) -> Result<Self> {
        let dual = build_dual(g);
        let cover = g.effective_cover();

        // v_inf: lowest-id vertex incident to the designated outer face, so
        // its dual face plays the role of the dual outer face.
        let v_inf = *g
            .emb()
            .face_vertices(g.outer_face())
            .iter()
            .next()
            .ok_or_else(|| Error::Structure("outer face has no vertices".into()))?;

        // Fixed paths: one BFS spanning tree rooted at v_inf, neighbors
        // explored in ascending edge-id order.
        let mut parent: Vec<Option<(VertexId, EdgeId)>> = vec![None; g.n()];
        let mut seen = vec![false; g.n()];
        seen[v_inf] = true;
        let mut queue = std::collections::VecDeque::from([v_inf]);
        while let Some(v) = queue.pop_front() {
            let mut inc = g.emb().incident_edges(v);
            inc.sort_unstable();
            for e in inc {
                let w = g.emb().edge(e).other(v);
                if !seen[w] {
                    seen[w] = true;
                    parent[w] = Some((v, e));
                    queue.push_back(w);
                }
            }
        }

        let mut face_terms = Vec::with_capacity(cover.faces.len());
        let mut cover_index = BTreeMap::new();
        let mut dart_gap = BTreeMap::new();
        let mut dart_walk_pos = BTreeMap::new();
        for (ci, &f) in cover.faces.iter().enumerate() {
            cover_index.insert(f, ci);
            let walk = &g.emb().face(f).walk;
            let l = walk.len();
            for (p, &d) in walk.iter().enumerate() {
                dart_walk_pos.insert(d, p);
            }
            // Assigned terminals by first corner position; the corner after
            // walk position p is the primal vertex dst(walk[p]).
            let assigned: BTreeSet<VertexId> = cover.assign[ci].iter().copied().collect();
            let mut first_pos: BTreeMap<VertexId, usize> = BTreeMap::new();
            for p in 0..l {
                let corner = g.emb().dart_dst(walk[p]);
                if assigned.contains(&corner) {
                    first_pos.entry(corner).or_insert(p);
                }
            }
            if first_pos.len() != assigned.len() {
                return Err(Error::Structure(format!(
                    "cover face {f} walk misses an assigned terminal"
                )));
            }
            let mut terms: Vec<VertexId> = assigned.iter().copied().collect();
            terms.sort_by_key(|t| first_pos[t]);
            // Rotate to start at the lowest-id terminal.
            let start = terms
                .iter()
                .enumerate()
                .min_by_key(|(_, t)| **t)
                .map(|(i, _)| i)
                .unwrap();
            terms.rotate_left(start);

            // Gap x (1-based) holds the walk darts strictly after terminal
            // x's corner, up to and including the dart just before terminal
            // x+1's corner: positions p with q_x < p <= q_{x+1} cyclically.
            let ki = terms.len();
            let positions: Vec<usize> = terms.iter().map(|t| first_pos[t]).collect();
            for (p, &d) in walk.iter().enumerate() {
                let gap = if ki == 1 {
                    1
                } else {
                    let mut found = 0;
                    for x in 1..=ki {
                        let qa = positions[x - 1];
                        let qb = positions[x % ki];
                        let inside = if qa < qb {
                            qa < p && p <= qb
                        } else {
                            p > qa || p <= qb
                        };
                        if inside {
                            found = x;
                            break;
                        }
                    }
                    debug_assert!(found >= 1);
                    found
                };
                dart_gap.insert(d, gap);
            }
            face_terms.push(terms);
        }
        Ok(LabelContext {
            g,
            dual,
            cover,
            face_terms,
            cover_index,
            v_inf,
            parent,
            dart_gap,
            dart_walk_pos,
        })
    }

    pub fn gamma(&self) -> usize {
        self.cover.faces.len()
    }

    /// Dual vertices of the cover faces (face id doubles as dual vertex id).
    pub fn w_vertices(&self) -> &[FaceId] {
        &self.cover.faces
    }

    fn is_w(&self, dual_vertex: usize) -> bool {
        self.cover_index.contains_key(&dual_vertex)
    }

    /// Crossing parity of the fixed v -> v_inf path with a dual circuit.
    pub fn parity(&self, v: VertexId, circuit: &Circuit) -> u8 {
        let mut total = 0usize;
        let mut cur = v;
        while let Some((p, e)) = self.parent[cur] {
            total += circuit.count(e);
            cur = p;
        }
        debug_assert_eq!(cur, self.v_inf);
        (total % 2) as u8
    }

    /// Terminals whose dual face is odd with respect to the circuit.
    pub fn odd_terminals(&self, circuit: &Circuit) -> TerminalSet {
        let mut mask = 0u32;
        for (i, &t) in self.g.terminals().iter().enumerate() {
            if self.parity(t, circuit) == 1 {
                mask |= 1 << i;
            }
        }
        TerminalSet(mask)
    }

    /// Blockwise compression of an odd set: bit r set when block r is odd.
    /// Errors if some block is split (the same-parity claim would be
    /// violated, meaning a bug).
    pub fn odd_blocks(&self, circuit: &Circuit) -> Result<u32> {
        let odd = self.odd_terminals(circuit);
        let mut blocks = 0u32;
        for (r, assign) in self.cover.assign.iter().enumerate() {
            let mut any = false;
            let mut all = true;
            for &t in assign {
                let idx = self.g.terminal_index(t).expect("assigned terminal");
                if odd.contains(idx) {
                    any = true;
                } else {
                    all = false;
                }
            }
            if any && !all {
                return Err(Error::Internal(format!(
                    "terminal block {r} is split by a circuit parity"
                )));
            }
            if any {
                blocks |= 1 << r;
            }
        }
        Ok(blocks)
    }

    /// The elementary dual cycle of a cutset as an ordered dart walk,
    /// starting at the lowest incident dual vertex via its lowest edge id.
    pub fn elementary_cycle(&self, cutset: &BTreeSet<EdgeId>) -> Result<Vec<Dart>> {
        let demb = self.dual.emb();
        let mut incident: BTreeMap<usize, Vec<Dart>> = BTreeMap::new();
        for &e in cutset {
            for d in [2 * e, 2 * e + 1] {
                incident.entry(demb.dart_src(d)).or_default().push(d);
            }
        }
        for (v, darts) in &incident {
            if darts.len() != 2 {
                return Err(Error::Internal(format!(
                    "dual vertex {v} has degree {} in an elementary cutset",
                    darts.len()
                )));
            }
        }
        let (&start_v, start_darts) = incident.iter().next().unwrap();
        let start = *start_darts.iter().min().unwrap();
        let mut walk = vec![start];
        let mut cur = start;
        loop {
            let nxt_v = demb.dart_dst(cur);
            if nxt_v == start_v && walk.len() == cutset.len() {
                break;
            }
            let darts = &incident[&nxt_v];
            let next = *darts
                .iter()
                .find(|&&d| d / 2 != cur / 2)
                .ok_or_else(|| Error::Internal("stuck while walking elementary cycle".into()))?;
            cur = next;
            walk.push(cur);
            if walk.len() > cutset.len() {
                return Err(Error::Internal("elementary cycle walk overruns".into()));
            }
        }
        if walk.len() != cutset.len() {
            return Err(Error::Internal("elementary cycle walk misses edges".into()));
        }
        Ok(walk)
    }

    /// Split the elementary cycle of S at its cover-face dual vertices.
    /// Returns the fragments in cycle order and, when the cycle avoids every
    /// cover vertex, the whole cycle separately.
    pub fn fragment_cycle(&self, s: TerminalSet) -> Result<(Vec<Vec<Dart>>, Option<Vec<Dart>>)> {
        let cut = crate::mincut::min_terminal_cut(self.g, s)?;
        if components(self.g, &cut.edges).len() != 2 {
            return Err(Error::InvalidSubset(format!(
                "mask {:#x} is not elementary",
                s.0
            )));
        }
        let walk = self.elementary_cycle(&cut.edges)?;
        self.split_walk(&walk)
    }

    fn split_walk(&self, walk: &[Dart]) -> Result<(Vec<Vec<Dart>>, Option<Vec<Dart>>)> {
        let demb = self.dual.emb();
        let w_positions: Vec<usize> = (0..walk.len())
            .filter(|&p| self.is_w(demb.dart_src(walk[p])))
            .collect();
        if w_positions.is_empty() {
            return Ok((Vec::new(), Some(walk.to_vec())));
        }
        let mut fragments = Vec::with_capacity(w_positions.len());
        let l = walk.len();
        for (idx, &p) in w_positions.iter().enumerate() {
            let q = w_positions[(idx + 1) % w_positions.len()];
            let mut darts = Vec::new();
            let mut cur = p;
            loop {
                darts.push(walk[cur]);
                cur = (cur + 1) % l;
                if cur == q {
                    break;
                }
                if darts.len() > l {
                    return Err(Error::Internal("fragment split overruns".into()));
                }
            }
            // Single-W case: one closed walk covering the whole cycle.
            if w_positions.len() == 1 {
                return Ok((vec![walk[p..].iter().chain(walk[..p].iter()).copied().collect()], None));
            }
            fragments.push(darts);
        }
        Ok((fragments, None))
    }

    fn orient_canonically(&self, darts: &[Dart]) -> (Vec<Dart>, (usize, usize), (usize, usize)) {
        let ends = |ds: &[Dart]| -> ((usize, usize), (usize, usize)) {
            let demb = self.dual.emb();
            let first = ds[0];
            let last = *ds.last().unwrap();
            let i = self.cover_index[&demb.dart_src(first)];
            let j = self.cover_index[&demb.dart_dst(last)];
            let x = self.dart_gap[&first];
            let y = self.dart_gap[&(last ^ 1)];
            ((i, j), (x, y))
        };
        let fwd = darts.to_vec();
        let rev: Vec<Dart> = darts.iter().rev().map(|&d| d ^ 1).collect();
        let (ef, gf) = ends(&fwd);
        let (er, gr) = ends(&rev);
        let keyf = (ef, gf, fwd.iter().map(|&d| d / 2).collect::<Vec<_>>(), fwd.clone());
        let keyr = (er, gr, rev.iter().map(|&d| d / 2).collect::<Vec<_>>(), rev.clone());
        if keyf <= keyr {
            (fwd, ef, gf)
        } else {
            (rev, er, gr)
        }
    }

    /// Minimum perturbed-cost dual path between cover vertices `i` and `j`
    /// that leaves through gap `x`, enters through gap `y`, and avoids every
    /// other cover vertex. Deterministic by perturbation.
    pub fn canonical_connector(
        &self,
        endpoints: (usize, usize),
        gaps: (usize, usize),
    ) -> Result<Vec<EdgeId>> {
        let (i, j) = endpoints;
        let (x, y) = gaps;
        let demb = self.dual.emb();
        let wi = self.cover.faces[i];
        let wj = self.cover.faces[j];
        let nf = demb.n();
        let src = nf;
        let dst = nf + 1;
        // Node images of a dual dart's source vertex under the endpoint
        // constraints.
        let images = |d: Dart| -> Vec<usize> {
            let v = demb.dart_src(d);
            if !self.is_w(v) {
                return vec![v];
            }
            let mut out = Vec::new();
            if v == wi && self.dart_gap[&d] == x {
                out.push(src);
            }
            if v == wj && self.dart_gap[&d] == y {
                out.push(dst);
            }
            out
        };
        let mut adj: Vec<Vec<(usize, EdgeId)>> = vec![Vec::new(); nf + 2];
        for e in 0..demb.m() {
            let du = 2 * e;
            let dv = 2 * e + 1;
            for &a in &images(du) {
                for &b in &images(dv) {
                    if a == b {
                        continue;
                    }
                    adj[a].push((b, e));
                    adj[b].push((a, e));
                }
            }
        }
        // Dijkstra with exact big-integer distances.
        let mut dist: Vec<Option<BigUint>> = vec![None; nf + 2];
        let mut from: Vec<Option<(usize, EdgeId)>> = vec![None; nf + 2];
        let mut heap: BTreeSet<(BigUint, usize)> = BTreeSet::new();
        dist[src] = Some(BigUint::from(0u8));
        heap.insert((BigUint::from(0u8), src));
        while let Some(entry) = heap.iter().next().cloned() {
            heap.remove(&entry);
            let (d, u) = entry;
            if dist[u].as_ref() != Some(&d) {
                continue;
            }
            if u == dst {
                break;
            }
            for &(v, e) in &adj[u] {
                let nd = &d + perturbed_weight(self.g, e);
                if dist[v].is_none() || dist[v].as_ref().unwrap() > &nd {
                    dist[v] = Some(nd.clone());
                    from[v] = Some((u, e));
                    heap.insert((nd, v));
                }
            }
        }
        if dist[dst].is_none() {
            return Err(Error::MissingConnector(i, j));
        }
        let mut edges = Vec::new();
        let mut cur = dst;
        while cur != src {
            let (p, e) = from[cur].expect("path reconstruction");
            edges.push(e);
            cur = p;
        }
        edges.reverse();
        Ok(edges)
    }

    /// Compute the three-part label of a fragment (given in canonical
    /// orientation).
    pub fn label_of(&self, darts: &[Dart]) -> Result<Label> {
        let (canon, endpoints, gaps) = self.orient_canonically(darts);
        let connector = self.canonical_connector(endpoints, gaps)?;
        let circuit = Circuit::from_edges(canon.iter().map(|&d| d / 2))
            .union(&Circuit::from_edges(connector.iter().copied()));
        let odd_blocks = self.odd_blocks(&circuit)?;
        Ok(Label {
            endpoints,
            gaps,
            odd_blocks,
        })
    }

    /// Two-vector label of an elementary subset, read off the cycle's entry
    /// and exit around each cover-face dual vertex.
    pub fn naive_label(&self, s: TerminalSet) -> Result<NaiveLabel> {
        let cut = crate::mincut::min_terminal_cut(self.g, s)?;
        if components(self.g, &cut.edges).len() != 2 {
            return Err(Error::InvalidSubset(format!(
                "mask {:#x} is not elementary",
                s.0
            )));
        }
        let walk = self.elementary_cycle(&cut.edges)?;
        let demb = self.dual.emb();
        let odd = self.odd_terminals(&Circuit::from_edges(cut.edges.iter().copied()));

        let gamma = self.gamma();
        let mut xs = vec![1usize; gamma];
        let mut ys = vec![1usize; gamma];
        for ci in 0..gamma {
            let f = self.cover.faces[ci];
            // The cycle visits w_ci at most once; find the leaving dart.
            let mut leave: Option<Dart> = None;
            let mut arrive: Option<Dart> = None;
            for (p, &d) in walk.iter().enumerate() {
                if demb.dart_src(d) == f {
                    leave = Some(d);
                    let prev = walk[(p + walk.len() - 1) % walk.len()];
                    arrive = Some(prev);
                }
            }
            let (Some(leave), Some(arrive)) = (leave, arrive) else {
                continue;
            };
            let face_walk_len = self.g.emb().face(f).walk.len();
            let a = self.dart_walk_pos[&leave];
            let b = self.dart_walk_pos[&(arrive ^ 1)];
            if a == b {
                return Err(Error::Internal("cycle enters and leaves via one dart".into()));
            }
            // Corners strictly between the two cut darts, each side scanned
            // in walk order.
            let collect = |from: usize, to: usize| -> Vec<VertexId> {
                let mut seen = BTreeSet::new();
                let mut run = Vec::new();
                let mut p = from;
                loop {
                    let corner = self.g.emb().dart_dst(self.g.emb().face(f).walk[p]);
                    if self.face_terms[ci].contains(&corner) && seen.insert(corner) {
                        run.push(corner);
                    }
                    if p == to {
                        break;
                    }
                    p = (p + 1) % face_walk_len;
                }
                run
            };
            let arc_a = collect(a, (b + face_walk_len - 1) % face_walk_len);
            let arc_b = collect(b, (a + face_walk_len - 1) % face_walk_len);
            if arc_a.iter().any(|t| arc_b.contains(t)) {
                return Err(Error::Internal(
                    "terminal corners straddle both sides of the cycle".into(),
                ));
            }
            let term_index = |t: VertexId| -> usize {
                self.face_terms[ci].iter().position(|&u| u == t).unwrap() + 1
            };
            let in_odd = |t: VertexId| odd.contains(self.g.terminal_index(t).unwrap());
            match (arc_a.is_empty(), arc_b.is_empty()) {
                (false, false) => {
                    for run in [&arc_a, &arc_b] {
                        let lead = in_odd(run[0]);
                        if run.iter().any(|&t| in_odd(t) != lead) {
                            return Err(Error::Internal("mixed parity within one arc".into()));
                        }
                    }
                    let (s_run, other) = if in_odd(arc_a[0]) {
                        (&arc_a, &arc_b)
                    } else {
                        (&arc_b, &arc_a)
                    };
                    xs[ci] = term_index(s_run[0]);
                    ys[ci] = term_index(other[0]);
                }
                (false, true) => {
                    let v = term_index(arc_a[0]);
                    xs[ci] = v;
                    ys[ci] = v;
                }
                (true, false) => {
                    let v = term_index(arc_b[0]);
                    xs[ci] = v;
                    ys[ci] = v;
                }
                (true, true) => {
                    return Err(Error::Internal("cover face lost all terminals".into()));
                }
            }
        }
        Ok(NaiveLabel { x: xs, y: ys })
    }

    /// Fragment and deduplicate every elementary cycle; label fragments and
    /// verify label uniqueness; pool the W-avoiding cycles separately.
    pub fn collect_fragments(&self, catalog: &ElementaryCatalog) -> Result<FragmentPool> {
        let mut fragments: Vec<PathFragment> = Vec::new();
        let mut frag_index: BTreeMap<Vec<Dart>, usize> = BTreeMap::new();
        let mut label_owner: BTreeMap<Label, usize> = BTreeMap::new();
        let mut whole_cycles: Vec<WholeCycle> = Vec::new();
        let mut cycle_index: BTreeMap<BTreeSet<EdgeId>, usize> = BTreeMap::new();
        let mut per_s = BTreeMap::new();

        for (mask, cut) in &catalog.entries {
            let walk = self.elementary_cycle(&cut.edges)?;
            let (frags, whole) = self.split_walk(&walk)?;
            let mut refs = Vec::new();
            if let Some(cycle_walk) = whole {
                let edges: BTreeSet<EdgeId> = cycle_walk.iter().map(|&d| d / 2).collect();
                let idx = match cycle_index.get(&edges) {
                    Some(&i) => i,
                    None => {
                        let circuit = Circuit::from_edges(edges.iter().copied());
                        let odd = self.odd_terminals(&circuit);
                        let odd_blocks = self.odd_blocks(&circuit)?;
                        let base_cost = edges.iter().map(|&e| self.g.weight(e)).sum();
                        let i = whole_cycles.len();
                        whole_cycles.push(WholeCycle {
                            edges: edges.clone(),
                            odd_blocks,
                            odd_terminals: odd.0,
                            base_cost,
                            sources: Vec::new(),
                        });
                        cycle_index.insert(edges, i);
                        i
                    }
                };
                whole_cycles[idx].sources.push(mask.0);
                refs.push(PoolRef::Cycle(idx));
            } else {
                for darts in frags {
                    let (canon, _, _) = self.orient_canonically(&darts);
                    let idx = match frag_index.get(&canon) {
                        Some(&i) => i,
                        None => {
                            let label = self.label_of(&canon)?;
                            let i = fragments.len();
                            if let Some(&other) = label_owner.get(&label) {
                                return Err(Error::LabelCollision(format!(
                                    "fragments {other} and {i} share label {label:?}"
                                )));
                            }
                            label_owner.insert(label, i);
                            let demb = self.dual.emb();
                            let boundary_incidences = canon
                                .iter()
                                .map(|&d| {
                                    usize::from(self.is_w(demb.dart_src(d)))
                                        + usize::from(self.is_w(demb.dart_dst(d)))
                                })
                                .sum();
                            let base_cost = canon.iter().map(|&d| self.g.weight(d / 2)).sum();
                            let closed =
                                demb.dart_src(canon[0]) == demb.dart_dst(*canon.last().unwrap());
                            fragments.push(PathFragment {
                                darts: canon.clone(),
                                label,
                                base_cost,
                                sources: Vec::new(),
                                boundary_incidences,
                                closed,
                            });
                            frag_index.insert(canon, i);
                            i
                        }
                    };
                    if !fragments[idx].sources.contains(&mask.0) {
                        fragments[idx].sources.push(mask.0);
                    }
                    refs.push(PoolRef::Fragment(idx));
                }
            }
            per_s.insert(mask.0, refs);
        }

        let k = self.g.k() as u64;
        let size_bound = (1u64 << self.gamma()) * (1 + k * k);
        let pool = FragmentPool {
            fragments,
            whole_cycles,
            per_s,
            size_bound,
        };
        if (pool.len() as u64) > pool.size_bound {
            return Err(Error::Internal(format!(
                "pool size {} exceeds bound {}",
                pool.len(),
                pool.size_bound
            )));
        }
        if (pool.whole_cycles.len() as u64) > (1u64 << self.gamma()) {
            return Err(Error::Internal(format!(
                "{} whole cycles exceed 2^gamma",
                pool.whole_cycles.len()
            )));
        }
        Ok(pool)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::elementary::enumerate_elementary;
    use crate::gen;
    use crate::mincut::min_terminal_cut;

    fn square_all_terminal() -> PlanarGraph {
        PlanarGraph::new(
            4,
            vec![
                crate::EdgeRec::new(0, 1, 1),
                crate::EdgeRec::new(1, 2, 1),
                crate::EdgeRec::new(2, 3, 1),
                crate::EdgeRec::new(3, 0, 1),
            ],
            vec![vec![0, 3], vec![1, 0], vec![2, 1], vec![3, 2]],
            vec![0, 1, 2, 3],
            None,
            None,
            None,
        )
        .unwrap()
    }

    #[test]
    fn parity_empty_circuit_and_root() {
        let g = gen::grid(3, 3, 4, gen::TerminalRule::Corners, 1, 9, 2).unwrap();
        let ctx = LabelContext::new(&g).unwrap();
        let empty = Circuit::default();
        for v in 0..g.n() {
            assert_eq!(ctx.parity(v, &empty), 0);
        }
        let cut = min_terminal_cut(&g, TerminalSet(1)).unwrap();
        let circuit = Circuit::from_edges(cut.edges.iter().copied());
        assert_eq!(ctx.parity(ctx.v_inf, &circuit), 0);
    }

    #[test]
    fn square_single_vertex_parity() {
        let g = square_all_terminal();
        let ctx = LabelContext::new(&g).unwrap();
        // Cut off vertex 2 (not v_inf): only its dual face is odd.
        let cut = min_terminal_cut(&g, TerminalSet(0b0100)).unwrap();
        let circuit = Circuit::from_edges(cut.edges.iter().copied());
        for v in 0..4 {
            assert_eq!(ctx.parity(v, &circuit), u8::from(v == 2), "vertex {v}");
        }
    }

    #[test]
    fn odd_terminals_matches_catalog_sides() {
        let g = gen::grid(3, 4, 5, gen::TerminalRule::EvenBoundary, 1, 30, 3).unwrap();
        let ctx = LabelContext::new(&g).unwrap();
        let catalog = enumerate_elementary(&g).unwrap();
        for (mask, cut) in &catalog.entries {
            let circuit = Circuit::from_edges(cut.edges.iter().copied());
            let odd = ctx.odd_terminals(&circuit);
            assert!(
                odd == *mask || odd == mask.complement(g.k()),
                "mask {:x} odd {:x}",
                mask.0,
                odd.0
            );
        }
    }

    #[test]
    fn disjoint_cycles_xor_odd_sets() {
        let g = gen::holed_grid(5, 5, &[(2, 2)], 4, 2, 1, 9, 8).unwrap();
        let ctx = LabelContext::new(&g).unwrap();
        let catalog = enumerate_elementary(&g).unwrap();
        let cuts: Vec<_> = catalog.entries.values().collect();
        let mut tested = 0;
        for i in 0..cuts.len() {
            for j in i + 1..cuts.len() {
                if cuts[i].edges.is_disjoint(&cuts[j].edges) {
                    let a = Circuit::from_edges(cuts[i].edges.iter().copied());
                    let b = Circuit::from_edges(cuts[j].edges.iter().copied());
                    let ab = a.union(&b);
                    let oa = ctx.odd_terminals(&a).0;
                    let ob = ctx.odd_terminals(&b).0;
                    let oab = ctx.odd_terminals(&ab).0;
                    assert_eq!(oab, oa ^ ob);
                    tested += 1;
                }
            }
        }
        assert!(tested > 0);
    }

    #[test]
    fn gamma1_single_fragment_per_cycle() {
        let g = gen::grid(3, 4, 5, gen::TerminalRule::EvenBoundary, 1, 20, 4).unwrap();
        let ctx = LabelContext::new(&g).unwrap();
        assert_eq!(ctx.gamma(), 1);
        let catalog = enumerate_elementary(&g).unwrap();
        for mask in catalog.masks() {
            let (frags, whole) = ctx.fragment_cycle(mask).unwrap();
            assert!(whole.is_none());
            assert_eq!(frags.len(), 1);
        }
    }

    #[test]
    fn pool_invariants_gamma2() {
        let g = gen::holed_grid(5, 5, &[(2, 2)], 4, 2, 1, 9, 8).unwrap();
        let ctx = LabelContext::new(&g).unwrap();
        assert_eq!(ctx.gamma(), 2);
        let catalog = enumerate_elementary(&g).unwrap();
        let pool = ctx.collect_fragments(&catalog).unwrap();
        // Reconstruction: each cycle is the disjoint union of its refs.
        for (mask, refs) in &pool.per_s {
            let cut = catalog.get(TerminalSet(*mask), g.k()).unwrap();
            let mut rebuilt: BTreeSet<EdgeId> = BTreeSet::new();
            for r in refs {
                let edges: Vec<EdgeId> = match r {
                    PoolRef::Fragment(i) => pool.fragments[*i].edge_ids(),
                    PoolRef::Cycle(i) => pool.whole_cycles[*i].edges.iter().copied().collect(),
                };
                for e in edges {
                    assert!(rebuilt.insert(e), "edge {e} repeated in reconstruction");
                }
            }
            assert_eq!(rebuilt, cut.edges);
        }
        for f in &pool.fragments {
            assert_eq!(f.boundary_incidences, 2);
        }
    }

    #[test]
    fn connector_direct_edge() {
        let g = gen::holed_grid(5, 5, &[(2, 2)], 4, 2, 1, 9, 8).unwrap();
        let ctx = LabelContext::new(&g).unwrap();
        let catalog = enumerate_elementary(&g).unwrap();
        let pool = ctx.collect_fragments(&catalog).unwrap();
        // Connector of a fragment's own label parts costs at most the
        // fragment.
        for f in &pool.fragments {
            let conn = ctx
                .canonical_connector(f.label.endpoints, f.label.gaps)
                .unwrap();
            let conn_cost: u64 = conn.iter().map(|&e| g.weight(e)).sum();
            assert!(conn_cost <= f.base_cost);
        }
    }

    #[test]
    fn naive_labels_bound_classes() {
        let g = gen::holed_grid(5, 5, &[(2, 2)], 4, 2, 1, 9, 8).unwrap();
        let ctx = LabelContext::new(&g).unwrap();
        let catalog = enumerate_elementary(&g).unwrap();
        let gamma = ctx.gamma();
        let mut classes: BTreeMap<NaiveLabel, usize> = BTreeMap::new();
        for mask in catalog.masks() {
            let label = ctx.naive_label(mask).unwrap();
            for (ci, terms) in ctx.face_terms.iter().enumerate() {
                assert!(label.x[ci] >= 1 && label.x[ci] <= terms.len());
                assert!(label.y[ci] >= 1 && label.y[ci] <= terms.len());
            }
            *classes.entry(label).or_insert(0) += 1;
        }
        let bound = 1usize << (2 * gamma);
        for (_, count) in classes {
            assert!(count <= bound);
        }
    }
}
