//! Rotation-system embedded planar multigraphs: face tracing, dual
//! construction, outer-face machinery, intervals, and face covers.
//!
//! The embedding is part of the instance. A graph arrives with an explicit
//! clockwise rotation of incident edge ids at every vertex; faces are traced
//! from that data and validated with Euler's formula. No planarity testing
//! or embedding computation happens here.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use serde::Serialize;

use crate::{Error, Result};

pub type VertexId = usize;
pub type EdgeId = usize;
pub type FaceId = usize;

/// Directed edge side. Dart `2e` leaves `edges[e].u`, dart `2e+1` leaves
/// `edges[e].v`. For a self-loop the first occurrence of `e` in the rotation
/// list is dart `2e`, the second is `2e+1`.
pub type Dart = usize;

pub const MAX_WEIGHT: u64 = 1 << 32;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EdgeRec {
    pub u: VertexId,
    pub v: VertexId,
    pub weight: u64,
}

impl EdgeRec {
    pub fn new(u: VertexId, v: VertexId, weight: u64) -> Self {
        EdgeRec { u, v, weight }
    }

    pub fn other(&self, x: VertexId) -> VertexId {
        if x == self.u {
            self.v
        } else {
            self.u
        }
    }

    pub fn is_loop(&self) -> bool {
        self.u == self.v
    }
}

/// A traced face: the closed walk of darts with the face on the left of
/// every dart.
#[derive(Debug, Clone)]
pub struct Face {
    pub id: FaceId,
    pub walk: Vec<Dart>,
}

impl Face {
    pub fn len(&self) -> usize {
        self.walk.len()
    }

    pub fn is_empty(&self) -> bool {
        self.walk.is_empty()
    }
}

/// A connected multigraph with a combinatorial embedding, faces already
/// traced. Immutable after construction.
#[derive(Debug, Clone)]
pub struct Embedding {
    n: usize,
    edges: Vec<EdgeRec>,
    /// Per-vertex clockwise rotation, stored as darts leaving the vertex.
    rot: Vec<Vec<Dart>>,
    faces: Vec<Face>,
    dart_face: Vec<FaceId>,
    /// Dart -> (vertex it leaves, index in that vertex's rotation).
    dart_pos: Vec<(VertexId, usize)>,
}

impl Embedding {
    /// Build and validate an embedding from per-vertex rotations given as
    /// edge-id lists (an edge id appears twice at a vertex for a self-loop;
    /// the first occurrence is side 0). This is the file-format convention.
    pub fn new(n: usize, edges: Vec<EdgeRec>, rot_edges: Vec<Vec<EdgeId>>) -> Result<Self> {
        if rot_edges.len() != n {
            return Err(Error::Embedding(format!(
                "expected {} rotation lists, got {}",
                n,
                rot_edges.len()
            )));
        }
        let m = edges.len();
        let mut rot: Vec<Vec<Dart>> = Vec::with_capacity(n);
        let mut seen_loop_side = vec![false; m];
        for (v, list) in rot_edges.iter().enumerate() {
            let mut darts = Vec::with_capacity(list.len());
            for &e in list {
                if e >= m {
                    return Err(Error::Embedding(format!(
                        "rotation at vertex {v} names unknown edge {e}"
                    )));
                }
                let rec = &edges[e];
                let d = if rec.is_loop() {
                    if rec.u != v {
                        return Err(Error::Embedding(format!(
                            "self-loop {e} listed at non-endpoint {v}"
                        )));
                    }
                    if !seen_loop_side[e] {
                        seen_loop_side[e] = true;
                        2 * e
                    } else {
                        2 * e + 1
                    }
                } else if rec.u == v {
                    2 * e
                } else if rec.v == v {
                    2 * e + 1
                } else {
                    return Err(Error::Embedding(format!(
                        "edge {e} listed at non-endpoint {v}"
                    )));
                };
                darts.push(d);
            }
            rot.push(darts);
        }
        Self::from_dart_rotations(n, edges, rot)
    }

    /// Build from explicit dart rotations. Dual construction and embedding
    /// surgery use this form so that self-loop sides stay unambiguous.
    pub fn from_dart_rotations(n: usize, edges: Vec<EdgeRec>, rot: Vec<Vec<Dart>>) -> Result<Self> {
        let m = edges.len();
        for (i, e) in edges.iter().enumerate() {
            if e.u >= n || e.v >= n {
                return Err(Error::Embedding(format!("edge {i} endpoint out of range")));
            }
        }
        if rot.len() != n {
            return Err(Error::Embedding(format!(
                "expected {} rotation lists, got {}",
                n,
                rot.len()
            )));
        }
        // A dart must sit in the rotation of its source vertex.
        for (v, darts) in rot.iter().enumerate() {
            for &d in darts {
                if d >= 2 * m {
                    return Err(Error::Embedding(format!("dart {d} out of range")));
                }
                let e = &edges[d / 2];
                let src = if d % 2 == 0 { e.u } else { e.v };
                if src != v {
                    return Err(Error::Embedding(format!(
                        "dart {d} listed at vertex {v} but leaves {src}"
                    )));
                }
            }
        }

        // Every dart must appear exactly once across all rotations.
        let mut dart_pos = vec![(usize::MAX, usize::MAX); 2 * m];
        for (v, darts) in rot.iter().enumerate() {
            for (idx, &d) in darts.iter().enumerate() {
                if d >= 2 * m || dart_pos[d].0 != usize::MAX {
                    return Err(Error::Embedding(format!(
                        "rotation lists are not a permutation of edge sides (dart {d} repeated or invalid)"
                    )));
                }
                dart_pos[d] = (v, idx);
            }
        }
        for (d, &(v, _)) in dart_pos.iter().enumerate() {
            if v == usize::MAX {
                return Err(Error::Embedding(format!(
                    "edge {} missing a rotation entry at one endpoint",
                    d / 2
                )));
            }
        }

        // Connectivity (required throughout; disconnected inputs rejected).
        if n == 0 {
            return Err(Error::Embedding("empty vertex set".into()));
        }
        let mut seen = vec![false; n];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(v) = stack.pop() {
            for &d in &rot[v] {
                let e = d / 2;
                let w = edges[e].other(v);
                if !seen[w] {
                    seen[w] = true;
                    stack.push(w);
                }
            }
        }
        if seen.iter().any(|s| !s) {
            return Err(Error::Embedding("graph is disconnected".into()));
        }

        let mut emb = Embedding {
            n,
            edges,
            rot,
            faces: Vec::new(),
            dart_face: Vec::new(),
            dart_pos,
        };
        emb.trace_faces();

        // Euler check: V - E + F = 2 for a connected embedding.
        let f = emb.faces.len() as i64;
        if n as i64 - m as i64 + f != 2 {
            return Err(Error::Embedding(format!(
                "Euler check failed: V={} E={} F={} (V-E+F={})",
                n,
                m,
                f,
                n as i64 - m as i64 + f
            )));
        }
        Ok(emb)
    }

    /// Face tracing: faces are numbered in trace order, starting from dart 0
    /// (edge 0, u->v) and continuing with the lowest-id untraced dart. The
    /// successor of dart `d` is the dart after `twin(d)` in the rotation at
    /// the head of `d`; each face lies on the left of its walk.
    fn trace_faces(&mut self) {
        let m = self.edges.len();
        self.dart_face = vec![usize::MAX; 2 * m];
        self.faces.clear();
        for start in 0..2 * m {
            if self.dart_face[start] != usize::MAX {
                continue;
            }
            let id = self.faces.len();
            let mut walk = Vec::new();
            let mut d = start;
            loop {
                self.dart_face[d] = id;
                walk.push(d);
                d = self.next_in_face(d);
                if d == start {
                    break;
                }
            }
            self.faces.push(Face { id, walk });
        }
        if m == 0 {
            // A single isolated vertex: one face (the whole plane).
            self.faces.push(Face {
                id: 0,
                walk: Vec::new(),
            });
        }
    }

    fn next_in_face(&self, d: Dart) -> Dart {
        let h = self.dart_dst(d);
        let (v, idx) = self.dart_pos[d ^ 1];
        debug_assert_eq!(v, h);
        let darts = &self.rot[h];
        darts[(idx + 1) % darts.len()]
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[EdgeRec] {
        &self.edges
    }

    pub fn edge(&self, e: EdgeId) -> &EdgeRec {
        &self.edges[e]
    }

    pub fn weight(&self, e: EdgeId) -> u64 {
        self.edges[e].weight
    }

    pub fn rotation(&self, v: VertexId) -> &[Dart] {
        &self.rot[v]
    }

    pub fn rotation_edges(&self, v: VertexId) -> Vec<EdgeId> {
        self.rot[v].iter().map(|&d| d / 2).collect()
    }

    pub fn degree(&self, v: VertexId) -> usize {
        self.rot[v].len()
    }

    pub fn faces(&self) -> &[Face] {
        &self.faces
    }

    pub fn face(&self, f: FaceId) -> &Face {
        &self.faces[f]
    }

    pub fn face_count(&self) -> usize {
        self.faces.len()
    }

    pub fn face_of_dart(&self, d: Dart) -> FaceId {
        self.dart_face[d]
    }

    pub fn dart_src(&self, d: Dart) -> VertexId {
        let e = &self.edges[d / 2];
        if d % 2 == 0 {
            e.u
        } else {
            e.v
        }
    }

    pub fn dart_dst(&self, d: Dart) -> VertexId {
        let e = &self.edges[d / 2];
        if d % 2 == 0 {
            e.v
        } else {
            e.u
        }
    }

    /// Vertices on the boundary walk of face `f`, deduplicated.
    pub fn face_vertices(&self, f: FaceId) -> BTreeSet<VertexId> {
        self.faces[f]
            .walk
            .iter()
            .map(|&d| self.dart_src(d))
            .collect()
    }

    /// Vertex sequence of the boundary walk of `f` (one entry per dart).
    pub fn face_vertex_walk(&self, f: FaceId) -> Vec<VertexId> {
        self.faces[f]
            .walk
            .iter()
            .map(|&d| self.dart_src(d))
            .collect()
    }

    /// Edge ids on the boundary of `f`, deduplicated.
    pub fn face_edges(&self, f: FaceId) -> BTreeSet<EdgeId> {
        self.faces[f].walk.iter().map(|&d| d / 2).collect()
    }

    pub fn incident_edges(&self, v: VertexId) -> Vec<EdgeId> {
        self.rotation_edges(v)
    }

    pub fn total_weight(&self) -> u64 {
        self.edges.iter().map(|e| e.weight).sum()
    }
}

/// Count faces of the plane subgraph spanned by `edge_set`, using the
/// inherited rotation. Returns (orbit count, plane face count, component
/// count over the subgraph's non-isolated vertices). The plane face count
/// merges the per-component outer orbits into the single common face:
/// F = orbits - (cc - 1), and for the empty edge set F = 1.
pub fn subgraph_face_count(emb: &Embedding, edge_set: &BTreeSet<EdgeId>) -> (usize, usize, usize) {
    if edge_set.is_empty() {
        return (0, 1, 0);
    }
    // Restricted rotations, order inherited.
    let mut sub_rot: BTreeMap<VertexId, Vec<Dart>> = BTreeMap::new();
    for v in 0..emb.n() {
        let darts: Vec<Dart> = emb.rot[v]
            .iter()
            .copied()
            .filter(|&d| edge_set.contains(&(d / 2)))
            .collect();
        if !darts.is_empty() {
            sub_rot.insert(v, darts);
        }
    }
    let pos_in = |v: VertexId, d: Dart| -> usize {
        sub_rot[&v].iter().position(|&x| x == d).unwrap()
    };
    let next = |d: Dart| -> Dart {
        let h = emb.dart_dst(d);
        let darts = &sub_rot[&h];
        let idx = pos_in(h, d ^ 1);
        darts[(idx + 1) % darts.len()]
    };
    let mut seen: BTreeSet<Dart> = BTreeSet::new();
    let mut orbits = 0;
    for &e in edge_set {
        for d in [2 * e, 2 * e + 1] {
            if seen.contains(&d) {
                continue;
            }
            orbits += 1;
            let mut x = d;
            loop {
                seen.insert(x);
                x = next(x);
                if x == d {
                    break;
                }
            }
        }
    }
    // Components over vertices touched by the edge set.
    let mut comp: BTreeMap<VertexId, usize> = BTreeMap::new();
    let mut cc = 0;
    for &v0 in sub_rot.keys() {
        if comp.contains_key(&v0) {
            continue;
        }
        let mut stack = vec![v0];
        comp.insert(v0, cc);
        while let Some(v) = stack.pop() {
            for &d in &sub_rot[&v] {
                let w = emb.edge(d / 2).other(v);
                if let std::collections::btree_map::Entry::Vacant(slot) = comp.entry(w) {
                    slot.insert(cc);
                    stack.push(w);
                }
            }
        }
        cc += 1;
    }
    (orbits, orbits - (cc - 1), cc)
}

/// Declared or computed face cover: `faces[i]` is incident to every terminal
/// in `assign[i]`, and the `assign` lists partition the terminal set.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FaceCover {
    pub faces: Vec<FaceId>,
    pub assign: Vec<Vec<VertexId>>,
}

impl FaceCover {
    pub fn gamma(&self) -> usize {
        self.faces.len()
    }
}

/// A contiguous run of outer-cycle positions (wraparound allowed).
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Interval {
    /// Start index into the outer-face vertex cycle.
    pub start: usize,
    /// End index (inclusive); `end < start` means the run wraps.
    pub end: usize,
    pub vertices: Vec<VertexId>,
}

/// Rotation-system embedded weighted multigraph with ordered terminals and a
/// designated outer face.
#[derive(Debug, Clone)]
pub struct PlanarGraph {
    emb: Embedding,
    terminals: Vec<VertexId>,
    outer: FaceId,
    cover: Option<FaceCover>,
}

impl PlanarGraph {
    pub fn new(
        n: usize,
        edges: Vec<EdgeRec>,
        rot_edges: Vec<Vec<EdgeId>>,
        terminals: Vec<VertexId>,
        outer: Option<FaceId>,
        cover_faces: Option<Vec<FaceId>>,
        cover_assign: Option<Vec<Vec<VertexId>>>,
    ) -> Result<Self> {
        for e in &edges {
            if e.weight > MAX_WEIGHT {
                return Err(Error::Parse(format!(
                    "edge weight {} exceeds maximum {}",
                    e.weight, MAX_WEIGHT
                )));
            }
        }
        let emb = Embedding::new(n, edges, rot_edges)?;

        if terminals.is_empty() {
            return Err(Error::Parse("at least one terminal required".into()));
        }
        let mut seen = BTreeSet::new();
        for &t in &terminals {
            if t >= n {
                return Err(Error::Parse(format!("terminal {t} out of range")));
            }
            if !seen.insert(t) {
                return Err(Error::Parse(format!("duplicate terminal {t}")));
            }
        }
        if terminals.len() > 32 {
            return Err(Error::Parse("more than 32 terminals unsupported".into()));
        }

        let outer = match outer {
            Some(f) => {
                if f >= emb.face_count() {
                    return Err(Error::Parse(format!("outer face id {f} out of range")));
                }
                f
            }
            // Longest boundary walk, lowest face id on ties.
            None => (0..emb.face_count())
                .max_by_key(|&f| (emb.face(f).len(), std::cmp::Reverse(f)))
                .unwrap(),
        };

        let cover = match cover_faces {
            None => {
                if cover_assign.is_some() {
                    return Err(Error::Parse("faceassign given without facecover".into()));
                }
                None
            }
            Some(faces) => {
                let mut fs = BTreeSet::new();
                for &f in &faces {
                    if f >= emb.face_count() {
                        return Err(Error::Parse(format!("cover face id {f} out of range")));
                    }
                    if !fs.insert(f) {
                        return Err(Error::Parse(format!("duplicate cover face {f}")));
                    }
                }
                let assign = match cover_assign {
                    Some(a) => {
                        if a.len() != faces.len() {
                            return Err(Error::Parse(
                                "faceassign count differs from facecover".into(),
                            ));
                        }
                        a
                    }
                    None => {
                        // Each terminal goes to the first declared face incident to it.
                        let mut a = vec![Vec::new(); faces.len()];
                        'term: for &t in &terminals {
                            for (i, &f) in faces.iter().enumerate() {
                                if emb.face_vertices(f).contains(&t) {
                                    a[i].push(t);
                                    continue 'term;
                                }
                            }
                            return Err(Error::Parse(format!(
                                "terminal {t} not incident to any cover face"
                            )));
                        }
                        a
                    }
                };
                let cover = FaceCover { faces, assign };
                validate_cover(&emb, &terminals, &cover)?;
                Some(cover)
            }
        };

        Ok(PlanarGraph {
            emb,
            terminals,
            outer,
            cover,
        })
    }

    /// Assemble from dart-level rotations (used by embedding surgery).
    pub fn from_dart_parts(
        n: usize,
        edges: Vec<EdgeRec>,
        rot: Vec<Vec<Dart>>,
        terminals: Vec<VertexId>,
        outer: Option<FaceId>,
    ) -> Result<Self> {
        let emb = Embedding::from_dart_rotations(n, edges, rot)?;
        if terminals.is_empty() {
            return Err(Error::Parse("at least one terminal required".into()));
        }
        let mut seen = BTreeSet::new();
        for &t in &terminals {
            if t >= n || !seen.insert(t) {
                return Err(Error::Parse(format!("bad terminal {t}")));
            }
        }
        let outer = match outer {
            Some(f) if f < emb.face_count() => f,
            Some(f) => return Err(Error::Parse(format!("outer face id {f} out of range"))),
            None => (0..emb.face_count())
                .max_by_key(|&f| (emb.face(f).len(), std::cmp::Reverse(f)))
                .unwrap(),
        };
        Ok(PlanarGraph {
            emb,
            terminals,
            outer,
            cover: None,
        })
    }

    /// Same structure with a different outer-face designation.
    pub fn with_outer_face(&self, outer: FaceId) -> Result<Self> {
        if outer >= self.emb.face_count() {
            return Err(Error::Parse(format!("outer face id {outer} out of range")));
        }
        let mut g = self.clone();
        g.outer = outer;
        Ok(g)
    }

    /// Same structure with a declared face cover.
    pub fn with_cover(&self, cover: FaceCover) -> Result<Self> {
        validate_cover(&self.emb, &self.terminals, &cover)?;
        let mut g = self.clone();
        g.cover = Some(cover);
        Ok(g)
    }

    /// Same embedding with new edge weights.
    pub fn with_edge_weights(&self, weights: &[u64]) -> Result<Self> {
        if weights.len() != self.m() {
            return Err(Error::Parse("weight list length mismatch".into()));
        }
        let mut g = self.clone();
        for (e, &w) in weights.iter().enumerate() {
            g.emb.edges[e].weight = w;
        }
        Ok(g)
    }

    pub fn emb(&self) -> &Embedding {
        &self.emb
    }

    pub fn n(&self) -> usize {
        self.emb.n()
    }

    pub fn m(&self) -> usize {
        self.emb.m()
    }

    pub fn k(&self) -> usize {
        self.terminals.len()
    }

    pub fn terminals(&self) -> &[VertexId] {
        &self.terminals
    }

    pub fn terminal_index(&self, v: VertexId) -> Option<usize> {
        self.terminals.iter().position(|&t| t == v)
    }

    pub fn is_terminal(&self, v: VertexId) -> bool {
        self.terminals.contains(&v)
    }

    pub fn weight(&self, e: EdgeId) -> u64 {
        self.emb.weight(e)
    }

    pub fn outer_face(&self) -> FaceId {
        self.outer
    }

    pub fn declared_cover(&self) -> Option<&FaceCover> {
        self.cover.as_ref()
    }

    /// True when the declared cover is exactly the outer face, i.e. the
    /// instance runs the single-face machinery.
    pub fn is_outer_gamma1(&self) -> bool {
        match &self.cover {
            Some(c) => c.faces.len() == 1 && c.faces[0] == self.outer,
            None => false,
        }
    }

    /// The declared cover if present, otherwise the computed minimum cover.
    pub fn effective_cover(&self) -> FaceCover {
        match &self.cover {
            Some(c) => c.clone(),
            None => self.face_cover_min(),
        }
    }

    /// Minimum-cardinality face cover by exhaustive search over subsets of
    /// terminal-incident faces; smallest cardinality wins, then lexicographic
    /// face-id order. Each terminal is assigned to the first cover face
    /// incident to it.
    pub fn face_cover_min(&self) -> FaceCover {
        let incident: Vec<BTreeSet<VertexId>> = (0..self.emb.face_count())
            .map(|f| {
                let vs = self.emb.face_vertices(f);
                self.terminals
                    .iter()
                    .copied()
                    .filter(|t| vs.contains(t))
                    .collect()
            })
            .collect();
        let candidates: Vec<FaceId> = (0..self.emb.face_count())
            .filter(|&f| !incident[f].is_empty())
            .collect();
        let want: BTreeSet<VertexId> = self.terminals.iter().copied().collect();
        for size in 1..=candidates.len() {
            let mut found: Option<Vec<FaceId>> = None;
            combinations(&candidates, size, &mut |subset| {
                if found.is_some() {
                    return;
                }
                let mut covered = BTreeSet::new();
                for &f in subset {
                    covered.extend(incident[f].iter().copied());
                }
                if covered == want {
                    found = Some(subset.to_vec());
                }
            });
            if let Some(faces) = found {
                let mut assign = vec![Vec::new(); faces.len()];
                'term: for &t in &self.terminals {
                    for (i, &f) in faces.iter().enumerate() {
                        if incident[f].contains(&t) {
                            assign[i].push(t);
                            continue 'term;
                        }
                    }
                    unreachable!("cover must reach every terminal");
                }
                return FaceCover { faces, assign };
            }
        }
        unreachable!("every terminal lies on at least one face");
    }

    /// The outer-face boundary as a vertex cycle. Errors if the walk repeats
    /// a vertex (the interval machinery needs a simple boundary cycle).
    pub fn outer_cycle(&self) -> Result<Vec<VertexId>> {
        let walk = self.emb.face_vertex_walk(self.outer);
        let mut seen = BTreeSet::new();
        for &v in &walk {
            if !seen.insert(v) {
                return Err(Error::Structure(format!(
                    "outer face walk revisits vertex {v}; boundary is not a simple cycle"
                )));
            }
        }
        Ok(walk)
    }

    /// Terminals in clockwise outer-face order, starting at the lowest-id
    /// terminal. Errors when some terminal is not on the outer face.
    pub fn outer_terminal_order(&self) -> Result<Vec<VertexId>> {
        let cycle = self.outer_cycle()?;
        let on_outer: Vec<VertexId> = cycle
            .iter()
            .copied()
            .filter(|v| self.is_terminal(*v))
            .collect();
        if on_outer.len() != self.k() {
            let missing: Vec<_> = self
                .terminals
                .iter()
                .filter(|t| !cycle.contains(t))
                .collect();
            return Err(Error::Structure(format!(
                "terminals {missing:?} are not on the outer face"
            )));
        }
        let lowest = on_outer.iter().enumerate().min_by_key(|(_, v)| **v).unwrap().0;
        let mut order = Vec::with_capacity(on_outer.len());
        for i in 0..on_outer.len() {
            order.push(on_outer[(lowest + i) % on_outer.len()]);
        }
        Ok(order)
    }

    /// Maximal intervals of the outer cycle with respect to `w`: the unique
    /// partition of `w` restricted to the outer-face vertices into runs that
    /// cannot be extended within `w`.
    pub fn maximal_intervals(&self, w: &BTreeSet<VertexId>) -> Result<Vec<Interval>> {
        let cycle = self.outer_cycle()?;
        let l = cycle.len();
        let inside: Vec<bool> = cycle.iter().map(|v| w.contains(v)).collect();
        if inside.iter().all(|&b| !b) {
            return Ok(Vec::new());
        }
        if inside.iter().all(|&b| b) {
            return Ok(vec![Interval {
                start: 0,
                end: l - 1,
                vertices: cycle,
            }]);
        }
        let mut intervals = Vec::new();
        for s in 0..l {
            // Run starts where the predecessor is outside.
            if inside[s] && !inside[(s + l - 1) % l] {
                let mut e = s;
                while inside[(e + 1) % l] {
                    e = (e + 1) % l;
                }
                let mut vertices = Vec::new();
                let mut i = s;
                loop {
                    vertices.push(cycle[i]);
                    if i == e {
                        break;
                    }
                    i = (i + 1) % l;
                }
                intervals.push(Interval {
                    start: s,
                    end: e,
                    vertices,
                });
            }
        }
        intervals.sort_by_key(|iv| iv.start);
        Ok(intervals)
    }

    /// Serialize to the line-oriented graph file format.
    pub fn to_file_string(&self) -> String {
        let mut out = String::new();
        out.push_str("planar-graph v1\n");
        let _ = writeln!(out, "n {}", self.n());
        let _ = writeln!(out, "m {}", self.m());
        for (i, e) in self.emb.edges().iter().enumerate() {
            let _ = writeln!(out, "e {} {} {} {}", i, e.u, e.v, e.weight);
        }
        for v in 0..self.n() {
            let mut line = format!("rot {v}");
            for e in self.emb.rotation_edges(v) {
                let _ = write!(line, " {e}");
            }
            out.push_str(&line);
            out.push('\n');
        }
        let mut tl = String::from("terminals");
        for &t in &self.terminals {
            let _ = write!(tl, " {t}");
        }
        out.push_str(&tl);
        out.push('\n');
        let _ = writeln!(out, "outerface {}", self.outer);
        if let Some(c) = &self.cover {
            let mut fl = String::from("facecover");
            for &f in &c.faces {
                let _ = write!(fl, " {f}");
            }
            out.push_str(&fl);
            out.push('\n');
            for (i, &f) in c.faces.iter().enumerate() {
                let mut al = format!("faceassign {f}:");
                for &t in &c.assign[i] {
                    let _ = write!(al, " {t}");
                }
                out.push_str(&al);
                out.push('\n');
            }
        }
        out
    }

    /// Parse the line-oriented graph file format.
    pub fn parse(text: &str) -> Result<Self> {
        let mut n: Option<usize> = None;
        let mut m: Option<usize> = None;
        let mut edges: Vec<Option<EdgeRec>> = Vec::new();
        let mut rot: Vec<Option<Vec<EdgeId>>> = Vec::new();
        let mut terminals: Option<Vec<VertexId>> = None;
        let mut outer: Option<FaceId> = None;
        let mut cover_faces: Option<Vec<FaceId>> = None;
        let mut assigns: BTreeMap<FaceId, Vec<VertexId>> = BTreeMap::new();

        let mut lines = text.lines().map(|l| match l.find('#') {
            Some(i) => &l[..i],
            None => l,
        });
        let header = loop {
            match lines.next() {
                Some(l) if l.trim().is_empty() => continue,
                Some(l) => break l.trim().to_string(),
                None => return Err(Error::Parse("empty graph file".into())),
            }
        };
        if header != "planar-graph v1" {
            return Err(Error::Parse(format!("bad header line: {header:?}")));
        }

        for line in lines {
            let toks: Vec<&str> = line.split_whitespace().collect();
            if toks.is_empty() {
                continue;
            }
            match toks[0] {
                "n" => {
                    let val = parse_num(toks.get(1), "n")?;
                    n = Some(val);
                    rot = vec![None; val];
                }
                "m" => {
                    let val = parse_num(toks.get(1), "m")?;
                    m = Some(val);
                    edges = vec![None; val];
                }
                "e" => {
                    if toks.len() != 5 {
                        return Err(Error::Parse(format!("bad edge line: {line:?}")));
                    }
                    let id: usize = parse_num(toks.get(1), "edge id")?;
                    let u: usize = parse_num(toks.get(2), "edge endpoint")?;
                    let v: usize = parse_num(toks.get(3), "edge endpoint")?;
                    let w: u64 = parse_num(toks.get(4), "edge weight")?;
                    if id >= edges.len() {
                        return Err(Error::Parse(format!("edge id {id} out of range")));
                    }
                    if edges[id].is_some() {
                        return Err(Error::Parse(format!("duplicate edge id {id}")));
                    }
                    edges[id] = Some(EdgeRec::new(u, v, w));
                }
                "rot" => {
                    let v: usize = parse_num(toks.get(1), "rot vertex")?;
                    if v >= rot.len() {
                        return Err(Error::Parse(format!("rot vertex {v} out of range")));
                    }
                    if rot[v].is_some() {
                        return Err(Error::Parse(format!("duplicate rot line for vertex {v}")));
                    }
                    let list = toks[2..]
                        .iter()
                        .map(|t| {
                            t.parse::<EdgeId>()
                                .map_err(|_| Error::Parse(format!("bad edge id {t:?} in rot")))
                        })
                        .collect::<Result<Vec<_>>>()?;
                    rot[v] = Some(list);
                }
                "terminals" => {
                    let list = toks[1..]
                        .iter()
                        .map(|t| {
                            t.parse::<VertexId>()
                                .map_err(|_| Error::Parse(format!("bad terminal {t:?}")))
                        })
                        .collect::<Result<Vec<_>>>()?;
                    terminals = Some(list);
                }
                "outerface" => {
                    outer = Some(parse_num(toks.get(1), "outerface")?);
                }
                "facecover" => {
                    let list = toks[1..]
                        .iter()
                        .map(|t| {
                            t.parse::<FaceId>()
                                .map_err(|_| Error::Parse(format!("bad face id {t:?}")))
                        })
                        .collect::<Result<Vec<_>>>()?;
                    cover_faces = Some(list);
                }
                "faceassign" => {
                    let ftok = toks
                        .get(1)
                        .ok_or_else(|| Error::Parse("faceassign missing face".into()))?;
                    let f: FaceId = ftok
                        .trim_end_matches(':')
                        .parse()
                        .map_err(|_| Error::Parse(format!("bad faceassign face {ftok:?}")))?;
                    let list = toks[2..]
                        .iter()
                        .map(|t| {
                            t.parse::<VertexId>()
                                .map_err(|_| Error::Parse(format!("bad terminal {t:?}")))
                        })
                        .collect::<Result<Vec<_>>>()?;
                    if assigns.insert(f, list).is_some() {
                        return Err(Error::Parse(format!("duplicate faceassign for face {f}")));
                    }
                }
                other => return Err(Error::Parse(format!("unknown directive {other:?}"))),
            }
        }

        let n = n.ok_or_else(|| Error::Parse("missing n line".into()))?;
        let _ = m.ok_or_else(|| Error::Parse("missing m line".into()))?;
        let edges = edges
            .into_iter()
            .enumerate()
            .map(|(i, e)| e.ok_or_else(|| Error::Parse(format!("missing edge {i}"))))
            .collect::<Result<Vec<_>>>()?;
        let rot = rot
            .into_iter()
            .enumerate()
            .map(|(v, r)| r.ok_or_else(|| Error::Parse(format!("missing rot line for vertex {v}"))))
            .collect::<Result<Vec<_>>>()?;
        let terminals = terminals.ok_or_else(|| Error::Parse("missing terminals line".into()))?;

        let cover_assign = match &cover_faces {
            Some(faces) if !assigns.is_empty() => {
                let mut a = Vec::with_capacity(faces.len());
                for &f in faces {
                    a.push(assigns.remove(&f).ok_or_else(|| {
                        Error::Parse(format!("faceassign missing for cover face {f}"))
                    })?);
                }
                if !assigns.is_empty() {
                    return Err(Error::Parse(
                        "faceassign given for face outside facecover".into(),
                    ));
                }
                Some(a)
            }
            Some(_) => None,
            None if !assigns.is_empty() => {
                return Err(Error::Parse("faceassign given without facecover".into()))
            }
            None => None,
        };

        PlanarGraph::new(n, edges, rot, terminals, outer, cover_faces, cover_assign)
    }
}

fn validate_cover(emb: &Embedding, terminals: &[VertexId], cover: &FaceCover) -> Result<()> {
    let mut assigned = BTreeSet::new();
    for (i, &f) in cover.faces.iter().enumerate() {
        let vs = emb.face_vertices(f);
        for &t in &cover.assign[i] {
            if !terminals.contains(&t) {
                return Err(Error::Parse(format!("assigned vertex {t} is not a terminal")));
            }
            if !vs.contains(&t) {
                return Err(Error::Parse(format!(
                    "terminal {t} not incident to its assigned face {f}"
                )));
            }
            if !assigned.insert(t) {
                return Err(Error::Parse(format!("terminal {t} assigned twice")));
            }
        }
    }
    if assigned.len() != terminals.len() {
        return Err(Error::Parse(
            "face cover assignment does not cover every terminal".into(),
        ));
    }
    Ok(())
}

fn parse_num<T: std::str::FromStr>(tok: Option<&&str>, what: &str) -> Result<T> {
    tok.ok_or_else(|| Error::Parse(format!("missing {what}")))?
        .parse::<T>()
        .map_err(|_| Error::Parse(format!("bad {what}")))
}

fn combinations<T: Copy>(items: &[T], size: usize, visit: &mut impl FnMut(&[T])) {
    fn rec<T: Copy>(items: &[T], size: usize, start: usize, cur: &mut Vec<T>, visit: &mut impl FnMut(&[T])) {
        if cur.len() == size {
            visit(cur);
            return;
        }
        let need = size - cur.len();
        for i in start..=items.len().saturating_sub(need) {
            cur.push(items[i]);
            rec(items, size, i + 1, cur, visit);
            cur.pop();
        }
    }
    let mut cur = Vec::with_capacity(size);
    rec(items, size, 0, &mut cur, visit);
}

/// Planar dual: one dual vertex per primal face, one dual edge per primal
/// edge (same id, same weight). Dual darts reuse primal dart ids: dual dart
/// `d` leaves the dual vertex of the primal face on the left of `d`, so the
/// rotation at a dual vertex is exactly the face walk order.
#[derive(Debug, Clone)]
pub struct DualGraph {
    emb: Embedding,
    /// Dual face id -> the primal vertex whose dual face it is.
    face_vertex: Vec<VertexId>,
    /// Primal vertex -> dual face id.
    vertex_face: Vec<FaceId>,
}

impl DualGraph {
    pub fn emb(&self) -> &Embedding {
        &self.emb
    }

    pub fn face_vertex(&self, dual_face: FaceId) -> VertexId {
        self.face_vertex[dual_face]
    }

    pub fn vertex_face(&self, primal_vertex: VertexId) -> FaceId {
        self.vertex_face[primal_vertex]
    }
}

/// Construct the dual of `g`'s embedding.
pub fn build_dual(g: &PlanarGraph) -> DualGraph {
    build_dual_of(g.emb())
}

pub fn build_dual_of(emb: &Embedding) -> DualGraph {
    let nf = emb.face_count();
    let m = emb.m();
    let mut edges = Vec::with_capacity(m);
    for e in 0..m {
        let fu = emb.face_of_dart(2 * e);
        let fv = emb.face_of_dart(2 * e + 1);
        edges.push(EdgeRec::new(fu, fv, emb.weight(e)));
    }
    // Rotation at dual vertex f = the face walk of f; dual dart ids reuse
    // primal dart ids, which keeps bridge/self-loop sides unambiguous.
    let mut rot_edges = Vec::with_capacity(nf);
    for f in 0..nf {
        rot_edges.push(emb.face(f).walk.clone());
    }
    let dual_emb = Embedding::from_dart_rotations(nf, edges, rot_edges)
        .expect("dual of a valid connected embedding is a valid connected embedding");

    // Identify each dual face with its primal vertex: the orbit of dual
    // darts around a dual face consists exactly of the primal darts leaving
    // one fixed primal vertex.
    let mut face_vertex = vec![usize::MAX; dual_emb.face_count()];
    let mut vertex_face = vec![usize::MAX; emb.n()];
    for df in 0..dual_emb.face_count() {
        let walk = &dual_emb.face(df).walk;
        assert!(!walk.is_empty());
        let src = emb.dart_src(walk[0]);
        for &d in walk {
            assert_eq!(emb.dart_src(d), src, "dual face orbit spans one primal vertex");
        }
        face_vertex[df] = src;
        assert_eq!(vertex_face[src], usize::MAX);
        vertex_face[src] = df;
    }
    DualGraph {
        emb: dual_emb,
        face_vertex,
        vertex_face,
    }
}

/// Check that two embeddings are isomorphic under an id-preserving edge map:
/// there is a vertex bijection sending every edge's endpoint pair (and
/// weight) to the matching edge's pair. Used for dual-of-dual and fold-back
/// identity checks.
pub fn edge_id_isomorphic(a: &Embedding, b: &Embedding) -> bool {
    if a.n() != b.n() || a.m() != b.m() {
        return false;
    }
    for e in 0..a.m() {
        if a.weight(e) != b.weight(e) {
            return false;
        }
    }
    // Match vertices by their incident edge-id multisets; identical
    // multisets (parallel-edge twins) may match either way, and either
    // choice yields an isomorphism, so pair them in order.
    let key = |emb: &Embedding, v: VertexId| -> Vec<EdgeId> {
        let mut ids = emb.rotation_edges(v);
        ids.sort_unstable();
        ids
    };
    let mut map_b: BTreeMap<Vec<EdgeId>, Vec<VertexId>> = BTreeMap::new();
    for v in 0..b.n() {
        map_b.entry(key(b, v)).or_default().push(v);
    }
    let mut assignment = vec![usize::MAX; a.n()];
    for v in 0..a.n() {
        match map_b.get_mut(&key(a, v)) {
            Some(pool) if !pool.is_empty() => assignment[v] = pool.remove(0),
            _ => return false,
        }
    }
    for e in 0..a.m() {
        let ea = a.edge(e);
        let eb = b.edge(e);
        let (x, y) = (assignment[ea.u], assignment[ea.v]);
        if !((x == eb.u && y == eb.v) || (x == eb.v && y == eb.u)) {
            return false;
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gen;

    fn square() -> PlanarGraph {
        // 0-1 top, 1-2 right, 2-3 bottom, 3-0 left; clockwise layout.
        PlanarGraph::new(
            4,
            vec![
                EdgeRec::new(0, 1, 1),
                EdgeRec::new(1, 2, 1),
                EdgeRec::new(2, 3, 1),
                EdgeRec::new(3, 0, 1),
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
    fn single_edge_accepted_one_face() {
        let g = PlanarGraph::new(
            2,
            vec![EdgeRec::new(0, 1, 5)],
            vec![vec![0], vec![0]],
            vec![0, 1],
            None,
            None,
            None,
        )
        .unwrap();
        assert_eq!(g.emb().face_count(), 1);
    }

    #[test]
    fn self_loop_two_faces() {
        let g = PlanarGraph::new(
            1,
            vec![EdgeRec::new(0, 0, 2)],
            vec![vec![0, 0]],
            vec![0],
            None,
            None,
            None,
        )
        .unwrap();
        assert_eq!(g.emb().face_count(), 2);
    }

    #[test]
    fn square_two_faces() {
        let g = square();
        assert_eq!(g.emb().face_count(), 2);
        for f in g.emb().faces() {
            assert_eq!(f.len(), 4);
        }
    }

    #[test]
    fn grid_3x3_five_faces() {
        let g = gen::grid(3, 3, 4, gen::TerminalRule::Corners, 1, 1, 7).unwrap();
        assert_eq!(g.n(), 9);
        assert_eq!(g.m(), 12);
        assert_eq!(g.emb().face_count(), 5);
    }

    #[test]
    fn grid_dual_counts_and_involution() {
        let g = gen::grid(3, 3, 4, gen::TerminalRule::Corners, 1, 1, 7).unwrap();
        let dual = build_dual(&g);
        assert_eq!(dual.emb().n(), 5);
        assert_eq!(dual.emb().m(), 12);
        assert_eq!(dual.emb().face_count(), 9);
        for e in 0..g.m() {
            assert_eq!(g.weight(e), dual.emb().weight(e));
        }
        let dd = build_dual_of(dual.emb());
        assert!(edge_id_isomorphic(dd.emb(), g.emb()));
    }

    #[test]
    fn square_dual_is_two_vertices_four_parallel_edges() {
        let g = square();
        let dual = build_dual(&g);
        assert_eq!(dual.emb().n(), 2);
        assert_eq!(dual.emb().m(), 4);
        for e in 0..4 {
            let rec = dual.emb().edge(e);
            assert_ne!(rec.u, rec.v);
        }
    }

    #[test]
    fn bridge_dualizes_to_self_loop() {
        // Path 0-1: the single edge is a bridge.
        let g = PlanarGraph::new(
            2,
            vec![EdgeRec::new(0, 1, 3)],
            vec![vec![0], vec![0]],
            vec![0, 1],
            None,
            None,
            None,
        )
        .unwrap();
        let dual = build_dual(&g);
        assert!(dual.emb().edge(0).is_loop());
    }

    #[test]
    fn rejects_bad_rotation() {
        let r = PlanarGraph::new(
            2,
            vec![EdgeRec::new(0, 1, 1)],
            vec![vec![0, 0], vec![0]],
            vec![0, 1],
            None,
            None,
            None,
        );
        assert!(r.is_err());
    }

    #[test]
    fn rejects_disconnected() {
        let r = PlanarGraph::new(
            4,
            vec![EdgeRec::new(0, 1, 1), EdgeRec::new(2, 3, 1)],
            vec![vec![0], vec![0], vec![1], vec![1]],
            vec![0, 2],
            None,
            None,
            None,
        );
        assert!(matches!(r, Err(Error::Embedding(_))));
    }

    #[test]
    fn rejects_duplicate_terminal() {
        let r = PlanarGraph::new(
            2,
            vec![EdgeRec::new(0, 1, 1)],
            vec![vec![0], vec![0]],
            vec![0, 0],
            None,
            None,
            None,
        );
        assert!(r.is_err());
    }

    #[test]
    fn outer_terminal_order_square() {
        let g = square();
        let order = g.outer_terminal_order().unwrap();
        assert_eq!(order.len(), 4);
        assert_eq!(order[0], 0);
        // Cyclic neighbors of 0 on the square are 1 and 3.
        assert!(order == vec![0, 1, 2, 3] || order == vec![0, 3, 2, 1]);
    }

    #[test]
    fn outer_terminal_order_grid_corners() {
        let g = gen::grid(3, 3, 4, gen::TerminalRule::Corners, 1, 1, 7).unwrap();
        let order = g.outer_terminal_order().unwrap();
        assert_eq!(order[0], 0);
        // Corners of a 3x3 grid in boundary order.
        assert!(order == vec![0, 2, 8, 6] || order == vec![0, 6, 8, 2]);
    }

    #[test]
    fn maximal_intervals_cases() {
        let g = square();
        let all: BTreeSet<_> = [0, 1, 2, 3].into_iter().collect();
        let ivs = g.maximal_intervals(&all).unwrap();
        assert_eq!(ivs.len(), 1);
        assert_eq!(ivs[0].vertices.len(), 4);

        assert!(g.maximal_intervals(&BTreeSet::new()).unwrap().is_empty());

        let opposite: BTreeSet<_> = [0, 2].into_iter().collect();
        let ivs = g.maximal_intervals(&opposite).unwrap();
        assert_eq!(ivs.len(), 2);
        for iv in &ivs {
            assert_eq!(iv.vertices.len(), 1);
        }
    }

    #[test]
    fn intervals_of_w_and_complement_partition_cycle() {
        let g = gen::grid(3, 4, 5, gen::TerminalRule::EvenBoundary, 1, 9, 3).unwrap();
        let cycle = g.outer_cycle().unwrap();
        let w: BTreeSet<_> = cycle.iter().copied().step_by(2).collect();
        let rest: BTreeSet<_> = cycle.iter().copied().filter(|v| !w.contains(v)).collect();
        let mut covered = BTreeSet::new();
        let mut count = 0;
        for iv in g
            .maximal_intervals(&w)
            .unwrap()
            .iter()
            .chain(g.maximal_intervals(&rest).unwrap().iter())
        {
            for &v in &iv.vertices {
                assert!(covered.insert(v));
                count += 1;
            }
        }
        assert_eq!(count, cycle.len());
    }

    #[test]
    fn face_cover_gamma1_outer() {
        let g = gen::grid(3, 3, 4, gen::TerminalRule::Corners, 1, 1, 7).unwrap();
        let cover = g.face_cover_min();
        assert_eq!(cover.gamma(), 1);
        assert_eq!(cover.faces[0], g.outer_face());
    }

    #[test]
    fn face_cover_single_terminal() {
        let g = PlanarGraph::new(
            2,
            vec![EdgeRec::new(0, 1, 1)],
            vec![vec![0], vec![0]],
            vec![0],
            None,
            None,
            None,
        )
        .unwrap();
        assert_eq!(g.face_cover_min().gamma(), 1);
    }

    #[test]
    fn file_roundtrip() {
        let g = gen::grid(3, 3, 4, gen::TerminalRule::Corners, 1, 20, 42).unwrap();
        let text = g.to_file_string();
        let h = PlanarGraph::parse(&text).unwrap();
        assert_eq!(h.to_file_string(), text);
    }

    #[test]
    fn parse_rejects_garbage() {
        assert!(PlanarGraph::parse("nope").is_err());
        assert!(PlanarGraph::parse("planar-graph v1\nn 2\nm 0\nrot 0\nrot 1\nterminals 0 1\n").is_err());
    }
}
