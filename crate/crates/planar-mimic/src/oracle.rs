//! Independent brute-force cut oracle.
//!
//! Two code paths, both deliberately separate from the flow routine in
//! `mincut`: an exhaustive sweep over all vertex bipartitions (n <= 14), and
//! a capacity-matrix DFS augmenting-path flow for larger graphs. Both use
//! the same perturbed weights, so they return the identical unique cutset.

use std::collections::BTreeSet;

use num_bigint::BigUint;
use num_traits::Zero;

use crate::graph::{EdgeId, PlanarGraph};
use crate::mincut::{base_of_perturbed, perturbed_weight, TerminalSet};
use crate::{Error, Result};

pub const EXHAUSTIVE_LIMIT: usize = 14;

/// Exhaustive minimum S-separating cut: sum boundary weights over all
/// 2^(n-1) bipartitions consistent with S. Guarded to n <= 14.
pub fn mincut_bipartition(g: &PlanarGraph, s: TerminalSet) -> Result<(u64, BTreeSet<EdgeId>)> {
    let n = g.n();
    if n > EXHAUSTIVE_LIMIT {
        return Err(Error::Guard(format!(
            "exhaustive oracle limited to n <= {EXHAUSTIVE_LIMIT}, got {n}"
        )));
    }
    let k = g.k();
    if !s.is_proper_nonempty(k) {
        return Err(Error::InvalidSubset(format!("mask {:#x}", s.0)));
    }
    let term_bit: Vec<Option<usize>> = (0..n).map(|v| g.terminal_index(v)).collect();
    let smask = s.0;
    let full = TerminalSet::full(k).0;
    let mut best: Option<(BigUint, BTreeSet<EdgeId>)> = None;
    // Fix vertex 0 on the W side; W and its complement describe the same cut.
    for bits in 0..(1u64 << (n - 1)) {
        let w = (bits << 1) | 1;
        let mut tmask = 0u32;
        for v in 0..n {
            if w >> v & 1 == 1 {
                if let Some(i) = term_bit[v] {
                    tmask |= 1 << i;
                }
            }
        }
        if tmask != smask && tmask != full & !smask {
            continue;
        }
        let mut cost = BigUint::zero();
        let mut edges = BTreeSet::new();
        for e in 0..g.m() {
            let rec = g.emb().edge(e);
            if (w >> rec.u & 1) != (w >> rec.v & 1) {
                cost += perturbed_weight(g, e);
                edges.insert(e);
            }
        }
        match &best {
            Some((c, _)) if *c <= cost => {}
            _ => best = Some((cost, edges)),
        }
    }
    let (cost, edges) = best.expect("every proper subset admits a separating bipartition");
    Ok((base_of_perturbed(g, &cost), edges))
}

/// Independent augmenting-path flow on a dense capacity matrix (DFS
/// augmentation). Used above the exhaustive limit.
pub fn mincut_flow_independent(g: &PlanarGraph, s: TerminalSet) -> Result<(u64, BTreeSet<EdgeId>)> {
    let k = g.k();
    if !s.is_proper_nonempty(k) {
        return Err(Error::InvalidSubset(format!("mask {:#x}", s.0)));
    }
    // Collapse terminals onto two poles, keep everything else.
    let mut node_of = vec![usize::MAX; g.n()];
    for (i, &t) in g.terminals().iter().enumerate() {
        node_of[t] = if s.contains(i) { 0 } else { 1 };
    }
    let mut nn = 2;
    for v in 0..g.n() {
        if node_of[v] == usize::MAX {
            node_of[v] = nn;
            nn += 1;
        }
    }
    let mut cap = vec![vec![BigUint::zero(); nn]; nn];
    for e in 0..g.m() {
        let rec = g.emb().edge(e);
        let (a, b) = (node_of[rec.u], node_of[rec.v]);
        if a == b {
            continue;
        }
        let w = perturbed_weight(g, e);
        cap[a][b] += &w;
        cap[b][a] += w;
    }

    fn dfs(
        cap: &mut Vec<Vec<BigUint>>,
        u: usize,
        t: usize,
        limit: BigUint,
        visited: &mut Vec<bool>,
    ) -> BigUint {
        if u == t {
            return limit;
        }
        visited[u] = true;
        for v in 0..cap.len() {
            if !visited[v] && !cap[u][v].is_zero() {
                let pushed = dfs(cap, v, t, limit.clone().min(cap[u][v].clone()), visited);
                if !pushed.is_zero() {
                    cap[u][v] -= &pushed;
                    cap[v][u] += &pushed;
                    return pushed;
                }
            }
        }
        BigUint::zero()
    }

    let infinite: BigUint = BigUint::from(1u8) << (4 * g.m() + 80);
    loop {
        let mut visited = vec![false; nn];
        let pushed = dfs(&mut cap, 0, 1, infinite.clone(), &mut visited);
        if pushed.is_zero() {
            break;
        }
    }
    // Source side of the (unique) minimum cut.
    let mut reach = vec![false; nn];
    reach[0] = true;
    let mut stack = vec![0usize];
    while let Some(u) = stack.pop() {
        for v in 0..nn {
            if !reach[v] && !cap[u][v].is_zero() {
                reach[v] = true;
                stack.push(v);
            }
        }
    }
    let side: BTreeSet<usize> = (0..g.n()).filter(|&v| reach[node_of[v]]).collect();
    let edges: BTreeSet<EdgeId> = (0..g.m())
        .filter(|&e| {
            let rec = g.emb().edge(e);
            side.contains(&rec.u) != side.contains(&rec.v)
        })
        .collect();
    let mut total = BigUint::zero();
    for &e in &edges {
        total += perturbed_weight(g, e);
    }
    Ok((base_of_perturbed(g, &total), edges))
}

/// Route to the exhaustive sweep when it fits, otherwise to the independent
/// flow.
pub fn mincut(g: &PlanarGraph, s: TerminalSet) -> Result<(u64, BTreeSet<EdgeId>)> {
    if g.n() <= EXHAUSTIVE_LIMIT {
        mincut_bipartition(g, s)
    } else {
        mincut_flow_independent(g, s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gen;
    use crate::mincut::min_terminal_cut;

    #[test]
    fn oracle_agrees_with_flow_module() {
        let g = gen::grid(3, 4, 5, gen::TerminalRule::EvenBoundary, 1, 40, 13).unwrap();
        for mask in 1..(1u32 << (g.k() - 1)) {
            let s = TerminalSet(mask);
            let cut = min_terminal_cut(&g, s).unwrap();
            let (c1, e1) = mincut_bipartition(&g, s).unwrap();
            let (c2, e2) = mincut_flow_independent(&g, s).unwrap();
            assert_eq!(cut.base_cost, c1);
            assert_eq!(cut.base_cost, c2);
            assert_eq!(cut.edges, e1);
            assert_eq!(cut.edges, e2);
        }
    }

    #[test]
    fn star_pair_cost() {
        // Separating {t1,t2} from {t3} cuts the single edge (center, t3).
        let g = gen::star(3, 1, 1, 0).unwrap();
        let (c, edges) = mincut_bipartition(&g, TerminalSet(0b011)).unwrap();
        assert_eq!(c, 1);
        assert_eq!(edges, [2usize].into_iter().collect());
    }

    #[test]
    fn path_k2() {
        let g = gen::path_weighted(&[3]).unwrap();
        let (c, _) = mincut_bipartition(&g, TerminalSet(0b01)).unwrap();
        assert_eq!(c, 3);
    }

    #[test]
    fn guard_respected() {
        let g = gen::grid(4, 4, 4, gen::TerminalRule::Corners, 1, 5, 0).unwrap();
        assert!(g.n() > EXHAUSTIVE_LIMIT);
        assert!(mincut_bipartition(&g, TerminalSet(1)).is_err());
        assert!(mincut_flow_independent(&g, TerminalSet(1)).is_ok());
    }
}
