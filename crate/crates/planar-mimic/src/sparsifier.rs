//! Minor mimicking networks: contract every connected component of
//! G minus the union of elementary cutsets into a single vertex, with the
//! rotation system carried through the contractions so the result can be
//! fed back into the toolkit. Also the size-bound accounting and the dual
//! meeting-vertex statistics.

use std::collections::{BTreeMap, BTreeSet};

use rayon::prelude::*;
use serde::Serialize;

use crate::elementary::ElementaryCatalog;
use crate::graph::{
    build_dual, subgraph_face_count, Dart, EdgeId, EdgeRec, PlanarGraph,
};
use crate::mincut::{components, TerminalSet};
use crate::{Error, Result};

/// Parallel-edge handling after contraction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MergeMode {
    /// Keep every inter-component edge.
    KeepParallel,
    /// Merge positive-weight parallel edges by weight summation (onto the
    /// lowest edge id). Zero-weight edges are never merged: the duality
    /// reductions rely on them staying distinct.
    MergeParallel,
}

/// Result of contracting vertex blobs, with provenance maps.
#[derive(Debug, Clone)]
pub struct Contraction {
    pub h: PlanarGraph,
    /// Old vertex -> new vertex.
    pub vertex_map: Vec<usize>,
    /// Old edge -> new edge; None when contracted or merged away.
    pub edge_map: Vec<Option<usize>>,
}

/// Contract each blob of `comp_of` (a partition of the vertices into
/// connected sets) into a single vertex. Intra-blob edges are contracted
/// (spanning forest in ascending edge-id order) or removed as self-loops;
/// rotations are spliced at each step, so H inherits a valid embedding.
/// Terminals map to their blob's vertex and must stay distinct.
pub fn contract_components(
    g: &PlanarGraph,
    comp_of: &[usize],
    merge: MergeMode,
) -> Result<Contraction> {
    let n = g.n();
    let m = g.m();
    let mut edges: Vec<Option<EdgeRec>> = g.emb().edges().iter().cloned().map(Some).collect();
    let mut rot: Vec<Vec<Dart>> = (0..n).map(|v| g.emb().rotation(v).to_vec()).collect();

    // Union-find over current vertex ids, always pointing at the minimum.
    let mut cur = (0..n).collect::<Vec<usize>>();
    fn find(cur: &mut Vec<usize>, v: usize) -> usize {
        if cur[v] != v {
            let r = find(cur, cur[v]);
            cur[v] = r;
            r
        } else {
            v
        }
    }

    let mut to_delete: Vec<EdgeId> = Vec::new();
    for e in 0..m {
        let rec = g.emb().edge(e);
        if comp_of[rec.u] != comp_of[rec.v] {
            continue;
        }
        let a = find(&mut cur, rec.u);
        let b = find(&mut cur, rec.v);
        if a == b {
            to_delete.push(e);
            continue;
        }
        // Contract e, merging the larger current id into the smaller.
        let (keep, gone) = if a < b { (a, b) } else { (b, a) };
        let rec_now = edges[e].as_ref().unwrap();
        let d_keep = if rec_now.u == keep { 2 * e } else { 2 * e + 1 };
        let d_gone = d_keep ^ 1;
        let p = rot[keep].iter().position(|&d| d == d_keep).unwrap();
        let q = rot[gone].iter().position(|&d| d == d_gone).unwrap();
        let mut spliced = Vec::with_capacity(rot[keep].len() + rot[gone].len() - 2);
        spliced.extend_from_slice(&rot[keep][p + 1..]);
        spliced.extend_from_slice(&rot[keep][..p]);
        let absorbed: Vec<Dart> = rot[gone][q + 1..]
            .iter()
            .chain(rot[gone][..q].iter())
            .copied()
            .collect();
        for &d in &absorbed {
            let ee = d / 2;
            let r = edges[ee].as_mut().unwrap();
            if d % 2 == 0 {
                r.u = keep;
            } else {
                r.v = keep;
            }
        }
        spliced.extend_from_slice(&absorbed);
        rot[keep] = spliced;
        rot[gone] = Vec::new();
        edges[e] = None;
        cur[gone] = keep;
    }
    let delete_edge = |e: EdgeId, edges: &mut Vec<Option<EdgeRec>>, rot: &mut Vec<Vec<Dart>>| {
        let rec = edges[e].take().expect("edge deleted twice");
        rot[rec.u].retain(|&d| d / 2 != e);
        if rec.v != rec.u {
            rot[rec.v].retain(|&d| d / 2 != e);
        }
    };
    for e in to_delete {
        delete_edge(e, &mut edges, &mut rot);
    }

    if merge == MergeMode::MergeParallel {
        let mut classes: BTreeMap<(usize, usize), Vec<EdgeId>> = BTreeMap::new();
        for (e, rec) in edges.iter().enumerate() {
            if let Some(r) = rec {
                if r.weight > 0 {
                    let key = (r.u.min(r.v), r.u.max(r.v));
                    classes.entry(key).or_default().push(e);
                }
            }
        }
        for (_, ids) in classes {
            if ids.len() < 2 {
                continue;
            }
            let keep = ids[0];
            let mut total = edges[keep].as_ref().unwrap().weight;
            for &e in &ids[1..] {
                total += edges[e].as_ref().unwrap().weight;
                delete_edge(e, &mut edges, &mut rot);
            }
            edges[keep].as_mut().unwrap().weight = total;
        }
    }

    // Renumber.
    let mut reps: Vec<usize> = (0..n).filter(|&v| find(&mut cur, v) == v).collect();
    reps.sort_unstable();
    let mut new_vid = vec![usize::MAX; n];
    for (i, &r) in reps.iter().enumerate() {
        new_vid[r] = i;
    }
    let vertex_map: Vec<usize> = (0..n).map(|v| new_vid[find(&mut cur, v)]).collect();

    let mut edge_map: Vec<Option<usize>> = vec![None; m];
    let mut new_edges = Vec::new();
    for (e, rec) in edges.iter().enumerate() {
        if let Some(r) = rec {
            edge_map[e] = Some(new_edges.len());
            new_edges.push(EdgeRec::new(new_vid[r.u], new_vid[r.v], r.weight));
        }
    }
    let new_rot: Vec<Vec<Dart>> = reps
        .iter()
        .map(|&r| {
            rot[r]
                .iter()
                .map(|&d| 2 * edge_map[d / 2].expect("surviving dart") + d % 2)
                .collect()
        })
        .collect();

    let mut terminals = Vec::with_capacity(g.k());
    let mut tset = BTreeSet::new();
    for &t in g.terminals() {
        let nt = vertex_map[t];
        if !tset.insert(nt) {
            return Err(Error::Internal(format!(
                "terminals {t} and another terminal collapse to one vertex"
            )));
        }
        terminals.push(nt);
    }

    let h = PlanarGraph::from_dart_parts(reps.len(), new_edges, new_rot, terminals, None)?;
    Ok(Contraction {
        h,
        vertex_map,
        edge_map,
    })
}

/// Union of all elementary cutsets.
pub fn union_elementary(catalog: &ElementaryCatalog) -> BTreeSet<EdgeId> {
    catalog
        .entries
        .values()
        .flat_map(|c| c.edges.iter().copied())
        .collect()
}

/// Max over unordered pairs (including S = S') of the number of connected
/// components left by the union of two elementary cutsets.
pub fn alpha(g: &PlanarGraph, catalog: &ElementaryCatalog) -> usize {
    let cuts: Vec<&BTreeSet<EdgeId>> = catalog.entries.values().map(|c| &c.edges).collect();
    let pairs: Vec<(usize, usize)> = (0..cuts.len())
        .flat_map(|i| (i..cuts.len()).map(move |j| (i, j)))
        .collect();
    pairs
        .par_iter()
        .map(|&(i, j)| {
            let union: BTreeSet<EdgeId> = cuts[i].union(cuts[j]).copied().collect();
            components(g, &union).len()
        })
        .max()
        .unwrap_or(0)
}

#[derive(Debug, Clone, Serialize)]
pub struct BoundEntry {
    pub name: String,
    pub value: f64,
    /// |V(H)| / value; bounds are asymptotic, so ratios are reported, never
    /// asserted.
    pub ratio: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct BoundReport {
    pub n_g: usize,
    pub n_h: usize,
    pub k: usize,
    pub gamma: usize,
    pub t_e: usize,
    pub alpha: usize,
    pub bounds: Vec<BoundEntry>,
}

/// Minor mimicking network: contracted graph plus provenance and size
/// accounting.
#[derive(Debug, Clone)]
pub struct MimickingNetwork {
    pub h: PlanarGraph,
    pub vertex_map: Vec<usize>,
    pub union_edges: BTreeSet<EdgeId>,
    pub report: BoundReport,
}

impl MimickingNetwork {
    /// `mapping` side-file contents: one `<G-vertex> <H-vertex>` line each.
    pub fn mapping_file(&self) -> String {
        let mut out = String::new();
        for (v, &h) in self.vertex_map.iter().enumerate() {
            out.push_str(&format!("{v} {h}\n"));
        }
        out
    }
}

pub fn build_mimicking(g: &PlanarGraph) -> Result<MimickingNetwork> {
    let catalog = crate::elementary::enumerate_elementary(g)?;
    build_mimicking_with(g, &catalog, MergeMode::MergeParallel)
}

pub fn build_mimicking_with(
    g: &PlanarGraph,
    catalog: &ElementaryCatalog,
    merge: MergeMode,
) -> Result<MimickingNetwork> {
    let union = union_elementary(catalog);
    let parts = components(g, &union);
    let contraction = contract_components(g, &parts.comp_of, merge)?;
    if contraction.h.n() != parts.len() {
        return Err(Error::Internal(
            "contracted vertex count differs from component count".into(),
        ));
    }
    let report = size_report(g, catalog, &contraction.h)?;
    Ok(MimickingNetwork {
        h: contraction.h,
        vertex_map: contraction.vertex_map,
        union_edges: union,
        report,
    })
}

/// Evaluate the applicable size bounds with measured ratios.
pub fn size_report(
    g: &PlanarGraph,
    catalog: &ElementaryCatalog,
    h: &PlanarGraph,
) -> Result<BoundReport> {
    let k = g.k();
    let gamma = g.effective_cover().gamma();
    let te = catalog.len();
    let a = alpha(g, catalog);
    let n_h = h.n() as f64;
    let mut bounds = Vec::new();
    let mut push = |name: &str, value: f64| {
        bounds.push(BoundEntry {
            name: name.into(),
            value,
            ratio: if value > 0.0 { n_h / value } else { f64::NAN },
        });
    };
    push("alpha_te_sq", a as f64 * (te as f64) * (te as f64));
    push("k_4k", k as f64 * 4f64.powi(k as i32));
    push(
        "gamma_4gamma_k4",
        gamma as f64 * 4f64.powi(gamma as i32) * (k as f64).powi(4),
    );
    if gamma == 1 {
        push("k4", (k as f64).powi(4));
    }
    Ok(BoundReport {
        n_g: g.n(),
        n_h: h.n(),
        k,
        gamma,
        t_e: te,
        alpha: a,
        bounds,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct PairMeeting {
    pub s: u32,
    pub s_prime: u32,
    pub meeting_vertices: usize,
    pub cc_union: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct MeetingStats {
    pub pairs: Vec<PairMeeting>,
    pub max_meeting: usize,
    pub alpha: usize,
    /// Plane face count of the dual subgraph spanned by the union of all
    /// elementary dual cycles.
    pub union_dual_faces: usize,
    /// Components of G minus the union of elementary cutsets.
    pub union_components: usize,
    /// Components of the dual subgraph itself.
    pub union_dual_cc: usize,
}

/// Per-pair meeting vertices (degree >= 3 dual vertices in the union of two
/// elementary dual cycles), plus the global dual-face/component accounting.
pub fn meeting_vertex_stats(g: &PlanarGraph, catalog: &ElementaryCatalog) -> Result<MeetingStats> {
    let dual = build_dual(g);
    let masks: Vec<TerminalSet> = catalog.entries.keys().copied().collect();
    let cuts: Vec<&BTreeSet<EdgeId>> = catalog.entries.values().map(|c| &c.edges).collect();
    let idx_pairs: Vec<(usize, usize)> = (0..masks.len())
        .flat_map(|i| (i..masks.len()).map(move |j| (i, j)))
        .collect();
    let pairs: Vec<PairMeeting> = idx_pairs
        .par_iter()
        .map(|&(i, j)| {
            let union: BTreeSet<EdgeId> = cuts[i].union(cuts[j]).copied().collect();
            // Degree of a dual vertex f in the union subgraph = number of
            // face-walk darts of f whose edge lies in the union.
            let mut meeting = 0;
            for f in 0..g.emb().face_count() {
                let deg = g
                    .emb()
                    .face(f)
                    .walk
                    .iter()
                    .filter(|&&d| union.contains(&(d / 2)))
                    .count();
                if deg >= 3 {
                    meeting += 1;
                }
            }
            let cc_union = components(g, &union).len();
            PairMeeting {
                s: masks[i].0,
                s_prime: masks[j].0,
                meeting_vertices: meeting,
                cc_union,
            }
        })
        .collect();
    let max_meeting = pairs.iter().map(|p| p.meeting_vertices).max().unwrap_or(0);
    let a = pairs.iter().map(|p| p.cc_union).max().unwrap_or(0);

    let union = union_elementary(catalog);
    let (_, dual_faces, dual_cc) = subgraph_face_count(dual.emb(), &union);
    let union_components = components(g, &union).len();
    if dual_faces != union_components {
        return Err(Error::Internal(format!(
            "dual subgraph has {dual_faces} faces but the primal union leaves {union_components} components"
        )));
    }
    Ok(MeetingStats {
        pairs,
        max_meeting,
        alpha: a,
        union_dual_faces: dual_faces,
        union_components,
        union_dual_cc: dual_cc,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::elementary::{check_sparsifier, enumerate_elementary, CheckMode};
    use crate::gen;
    use crate::mincut::min_terminal_cut;

    #[test]
    fn star_union_is_all_edges_and_h_is_star() {
        let g = gen::star(3, 1, 1, 0).unwrap();
        let catalog = enumerate_elementary(&g).unwrap();
        let union = union_elementary(&catalog);
        assert_eq!(union.len(), 3);
        let mn = build_mimicking(&g).unwrap();
        assert_eq!(mn.h.n(), 4);
        assert_eq!(mn.h.m(), 3);
    }

    #[test]
    fn path_k2_union_is_min_edge() {
        let g = gen::path_weighted(&[4, 2, 7]).unwrap();
        let catalog = enumerate_elementary(&g).unwrap();
        let union = union_elementary(&catalog);
        assert_eq!(union, [1usize].into_iter().collect());
        let mn = build_mimicking(&g).unwrap();
        assert_eq!(mn.h.n(), 2);
        assert_eq!(min_terminal_cut(&mn.h, TerminalSet(1)).unwrap().base_cost, 2);
    }

    #[test]
    fn grid_mimicking_exact_and_minor() {
        let g = gen::grid(4, 4, 4, gen::TerminalRule::Corners, 1, 100, 1).unwrap();
        let mn = build_mimicking(&g).unwrap();
        let r = check_sparsifier(&g, &mn.h, (1, 1), CheckMode::AllSubsets).unwrap();
        assert!(r.passed(), "violations: {:?}", r.violations);
        assert!(mn.h.n() >= g.k());
        // Vertex map is a partition into blobs; edges of H are inter-blob.
        for e in 0..mn.h.m() {
            let rec = mn.h.emb().edge(e);
            assert_ne!(rec.u, rec.v);
        }
    }

    #[test]
    fn gamma1_alpha_at_most_4() {
        for seed in [1, 2, 3] {
            let g = gen::grid(3, 4, 6, gen::TerminalRule::EvenBoundary, 1, 60, seed).unwrap();
            let catalog = enumerate_elementary(&g).unwrap();
            assert!(alpha(&g, &catalog) <= 4);
        }
    }

    #[test]
    fn k2_alpha_is_2() {
        let g = gen::path_weighted(&[3, 1, 4]).unwrap();
        let catalog = enumerate_elementary(&g).unwrap();
        assert_eq!(alpha(&g, &catalog), 2);
    }

    #[test]
    fn meeting_stats_invariants() {
        let g = gen::grid(3, 4, 5, gen::TerminalRule::EvenBoundary, 1, 30, 9).unwrap();
        let catalog = enumerate_elementary(&g).unwrap();
        let stats = meeting_vertex_stats(&g, &catalog).unwrap();
        for p in &stats.pairs {
            assert!(p.meeting_vertices <= 2 * p.cc_union);
            if p.s == p.s_prime {
                assert_eq!(p.meeting_vertices, 0);
            }
        }
        let mn = build_mimicking(&g).unwrap();
        assert_eq!(stats.union_dual_faces, mn.h.n());
        assert!(stats.union_dual_cc <= g.k());
    }

    #[test]
    fn contraction_preserves_embedding_validity() {
        let g = gen::grid(4, 5, 6, gen::TerminalRule::EvenBoundary, 1, 9, 4).unwrap();
        let mn = build_mimicking(&g).unwrap();
        // Feeding H back through the file format revalidates everything.
        let text = mn.h.to_file_string();
        let h2 = PlanarGraph::parse(&text).unwrap();
        assert_eq!(h2.n(), mn.h.n());
    }

    #[test]
    fn size_report_has_gamma1_bound() {
        let g = gen::grid(3, 3, 4, gen::TerminalRule::Corners, 1, 9, 0).unwrap();
        let mn = build_mimicking(&g).unwrap();
        assert!(mn.report.bounds.iter().any(|b| b.name == "k4"));
        assert_eq!(mn.report.gamma, 1);
    }
}
