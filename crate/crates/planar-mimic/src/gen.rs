//! Deterministic benchmark instance generators: grids, holed grids, stars,
//! and paths, with seeded random weights. Generated files always declare
//! their outer face and minimum face cover.

use std::collections::BTreeSet;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::graph::{EdgeRec, PlanarGraph, VertexId};
use crate::{Error, Result};

/// How grid terminals are placed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TerminalRule {
    /// The four grid corners, clockwise from vertex 0. Requires k = 4.
    Corners,
    /// k vertices spread evenly along the outer boundary cycle, clockwise
    /// from vertex 0.
    EvenBoundary,
}

#[derive(Debug, Clone)]
pub enum Generator {
    Grid {
        rows: usize,
        cols: usize,
        k: usize,
        rule: TerminalRule,
    },
    HoledGrid {
        rows: usize,
        cols: usize,
        /// Interior grid positions whose vertex is removed; each removal
        /// opens an 8-cycle hole face.
        holes: Vec<(usize, usize)>,
        k_outer: usize,
        k_per_hole: usize,
    },
    Star {
        leaves: usize,
    },
    Path {
        vertices: usize,
    },
}

#[derive(Debug, Clone)]
pub struct InstanceSpec {
    pub generator: Generator,
    pub weight_lo: u64,
    pub weight_hi: u64,
    pub seed: u64,
}

impl InstanceSpec {
    pub fn build(&self) -> Result<PlanarGraph> {
        if self.weight_lo > self.weight_hi {
            return Err(Error::Parse("empty weight range".into()));
        }
        match &self.generator {
            Generator::Grid { rows, cols, k, rule } => {
                grid(*rows, *cols, *k, *rule, self.weight_lo, self.weight_hi, self.seed)
            }
            Generator::HoledGrid {
                rows,
                cols,
                holes,
                k_outer,
                k_per_hole,
            } => holed_grid(
                *rows,
                *cols,
                holes,
                *k_outer,
                *k_per_hole,
                self.weight_lo,
                self.weight_hi,
                self.seed,
            ),
            Generator::Star { leaves } => star(*leaves, self.weight_lo, self.weight_hi, self.seed),
            Generator::Path { vertices } => {
                path(*vertices, self.weight_lo, self.weight_hi, self.seed)
            }
        }
    }
}

/// Outer boundary of an r x c grid as a clockwise vertex cycle starting at
/// the top-left corner.
fn grid_boundary(rows: usize, cols: usize) -> Vec<(usize, usize)> {
    if rows == 1 {
        return (0..cols).map(|c| (0, c)).collect();
    }
    if cols == 1 {
        return (0..rows).map(|r| (r, 0)).collect();
    }
    let mut cycle = Vec::new();
    for c in 0..cols {
        cycle.push((0, c));
    }
    for r in 1..rows {
        cycle.push((r, cols - 1));
    }
    for c in (0..cols - 1).rev() {
        cycle.push((rows - 1, c));
    }
    for r in (1..rows - 1).rev() {
        cycle.push((r, 0));
    }
    cycle
}

struct GridBuilder {
    rows: usize,
    cols: usize,
    alive: Vec<bool>,
}

impl GridBuilder {
    fn id(&self, r: usize, c: usize) -> usize {
        r * self.cols + c
    }

    /// Edges in deterministic id order: row-major per vertex, east edge then
    /// south edge.
    fn edge_list(&self) -> Vec<(usize, usize)> {
        let mut edges = Vec::new();
        for r in 0..self.rows {
            for c in 0..self.cols {
                if !self.alive[self.id(r, c)] {
                    continue;
                }
                if c + 1 < self.cols && self.alive[self.id(r, c + 1)] {
                    edges.push((self.id(r, c), self.id(r, c + 1)));
                }
                if r + 1 < self.rows && self.alive[self.id(r + 1, c)] {
                    edges.push((self.id(r, c), self.id(r + 1, c)));
                }
            }
        }
        edges
    }

    fn build(
        &self,
        terminals_old_ids: &[usize],
        lo: u64,
        hi: u64,
        seed: u64,
    ) -> Result<PlanarGraph> {
        let mut new_id = vec![usize::MAX; self.rows * self.cols];
        let mut n = 0;
        for (old, &a) in self.alive.iter().enumerate() {
            if a {
                new_id[old] = n;
                n += 1;
            }
        }
        let raw_edges = self.edge_list();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let edges: Vec<EdgeRec> = raw_edges
            .iter()
            .map(|&(u, v)| EdgeRec::new(new_id[u], new_id[v], rng.gen_range(lo..=hi)))
            .collect();
        // Edge id lookup by old endpoints.
        let mut eid = std::collections::BTreeMap::new();
        for (i, &(u, v)) in raw_edges.iter().enumerate() {
            eid.insert((u, v), i);
            eid.insert((v, u), i);
        }
        // Clockwise rotation: north, east, south, west.
        let mut rot = vec![Vec::new(); n];
        for r in 0..self.rows {
            for c in 0..self.cols {
                let v = self.id(r, c);
                if !self.alive[v] {
                    continue;
                }
                let mut list = Vec::new();
                if r > 0 {
                    if let Some(&e) = eid.get(&(self.id(r - 1, c), v)) {
                        list.push(e);
                    }
                }
                if c + 1 < self.cols {
                    if let Some(&e) = eid.get(&(v, self.id(r, c + 1))) {
                        list.push(e);
                    }
                }
                if r + 1 < self.rows {
                    if let Some(&e) = eid.get(&(v, self.id(r + 1, c))) {
                        list.push(e);
                    }
                }
                if c > 0 {
                    if let Some(&e) = eid.get(&(self.id(r, c - 1), v)) {
                        list.push(e);
                    }
                }
                rot[new_id[v]] = list;
            }
        }
        let terminals: Vec<VertexId> = terminals_old_ids.iter().map(|&t| new_id[t]).collect();

        // First pass without designations to locate the outer face, then
        // rebuild with the outer face and minimum cover declared.
        let g0 = PlanarGraph::new(n, edges.clone(), rot.clone(), terminals.clone(), None, None, None)?;
        let boundary: BTreeSet<usize> = grid_boundary(self.rows, self.cols)
            .into_iter()
            .filter(|&(r, c)| self.alive[self.id(r, c)])
            .map(|(r, c)| new_id[self.id(r, c)])
            .collect();
        let outer = (0..g0.emb().face_count())
            .find(|&f| boundary.is_subset(&g0.emb().face_vertices(f)))
            .ok_or_else(|| Error::Structure("no face contains the whole grid boundary".into()))?;
        let g1 = PlanarGraph::new(
            n,
            edges.clone(),
            rot.clone(),
            terminals.clone(),
            Some(outer),
            None,
            None,
        )?;
        let cover = g1.face_cover_min();
        PlanarGraph::new(
            n,
            edges,
            rot,
            terminals,
            Some(outer),
            Some(cover.faces),
            Some(cover.assign),
        )
    }
}

/// rows x cols grid with k boundary terminals and uniform random integer
/// weights in [lo, hi].
pub fn grid(
    rows: usize,
    cols: usize,
    k: usize,
    rule: TerminalRule,
    lo: u64,
    hi: u64,
    seed: u64,
) -> Result<PlanarGraph> {
    if rows < 1 || cols < 1 || rows * cols < 2 {
        return Err(Error::Parse("grid too small".into()));
    }
    let b = GridBuilder {
        rows,
        cols,
        alive: vec![true; rows * cols],
    };
    let boundary = grid_boundary(rows, cols);
    let terminals: Vec<usize> = match rule {
        TerminalRule::Corners => {
            if k != 4 || rows < 2 || cols < 2 {
                return Err(Error::Parse("corner rule needs k=4 on a 2D grid".into()));
            }
            vec![
                b.id(0, 0),
                b.id(0, cols - 1),
                b.id(rows - 1, cols - 1),
                b.id(rows - 1, 0),
            ]
        }
        TerminalRule::EvenBoundary => {
            if k < 1 || k > boundary.len() {
                return Err(Error::Parse(format!(
                    "k={} terminals do not fit on a boundary of {}",
                    k,
                    boundary.len()
                )));
            }
            (0..k)
                .map(|i| {
                    let (r, c) = boundary[i * boundary.len() / k];
                    b.id(r, c)
                })
                .collect()
        }
    };
    b.build(&terminals, lo, hi, seed)
}

/// Grid with interior vertices removed, opening one hole face per removal.
/// Terminals: `k_outer` spread on the outer boundary plus `k_per_hole` on
/// each hole ring, chosen among ring vertices that are not on the outer
/// boundary. The declared cover is the computed minimum cover; the build
/// fails if it does not have exactly `1 + holes.len()` faces.
#[allow(clippy::too_many_arguments)]
pub fn holed_grid(
    rows: usize,
    cols: usize,
    holes: &[(usize, usize)],
    k_outer: usize,
    k_per_hole: usize,
    lo: u64,
    hi: u64,
    seed: u64,
) -> Result<PlanarGraph> {
    if rows < 5 || cols < 5 {
        return Err(Error::Parse("holed grid needs at least 5x5".into()));
    }
    let mut b = GridBuilder {
        rows,
        cols,
        alive: vec![true; rows * cols],
    };
    for &(r, c) in holes {
        if r < 2 || c < 2 || r > rows - 3 || c > cols - 3 {
            return Err(Error::Parse(format!(
                "hole ({r},{c}) too close to the boundary"
            )));
        }
        let v = b.id(r, c);
        if !b.alive[v] {
            return Err(Error::Parse(format!("duplicate hole ({r},{c})")));
        }
        b.alive[v] = false;
    }

    let boundary = grid_boundary(rows, cols);
    let mut terminals: Vec<usize> = (0..k_outer)
        .map(|i| {
            let (r, c) = boundary[i * boundary.len() / k_outer];
            b.id(r, c)
        })
        .collect();
    let outer_set: BTreeSet<usize> = boundary.iter().map(|&(r, c)| b.id(r, c)).collect();
    for &(r, c) in holes {
        // Ring around the removed vertex, clockwise from its north-west.
        let ring = [
            (r - 1, c - 1),
            (r - 1, c),
            (r - 1, c + 1),
            (r, c + 1),
            (r + 1, c + 1),
            (r + 1, c),
            (r + 1, c - 1),
            (r, c - 1),
        ];
        let candidates: Vec<usize> = ring
            .iter()
            .map(|&(rr, cc)| b.id(rr, cc))
            .filter(|v| b.alive[*v] && !outer_set.contains(v) && !terminals.contains(v))
            .collect();
        if candidates.len() < k_per_hole {
            return Err(Error::Parse(format!(
                "hole ({r},{c}) has only {} usable ring vertices, need {}",
                candidates.len(),
                k_per_hole
            )));
        }
        for i in 0..k_per_hole {
            terminals.push(candidates[i * candidates.len() / k_per_hole]);
        }
    }

    let g = b.build(&terminals, lo, hi, seed)?;
    let gamma = g
        .declared_cover()
        .expect("generator declares a cover")
        .gamma();
    if gamma != 1 + holes.len() {
        return Err(Error::Structure(format!(
            "holed grid cover has {} faces, expected {}",
            gamma,
            1 + holes.len()
        )));
    }
    Ok(g)
}

/// Star with a non-terminal center (vertex 0) and `leaves` terminal leaves.
pub fn star(leaves: usize, lo: u64, hi: u64, seed: u64) -> Result<PlanarGraph> {
    if leaves < 2 {
        return Err(Error::Parse("star needs at least 2 leaves".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let edges: Vec<EdgeRec> = (0..leaves)
        .map(|i| EdgeRec::new(0, i + 1, rng.gen_range(lo..=hi)))
        .collect();
    let mut rot = vec![(0..leaves).collect::<Vec<_>>()];
    for i in 0..leaves {
        rot.push(vec![i]);
    }
    let terminals: Vec<usize> = (1..=leaves).collect();
    let g0 = PlanarGraph::new(leaves + 1, edges.clone(), rot.clone(), terminals.clone(), None, None, None)?;
    let cover = g0.face_cover_min();
    PlanarGraph::new(
        leaves + 1,
        edges,
        rot,
        terminals,
        Some(0),
        Some(cover.faces),
        Some(cover.assign),
    )
}

/// Path on `vertices` vertices; the two endpoints are the terminals.
pub fn path(vertices: usize, lo: u64, hi: u64, seed: u64) -> Result<PlanarGraph> {
    if vertices < 2 {
        return Err(Error::Parse("path needs at least 2 vertices".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let edges: Vec<EdgeRec> = (0..vertices - 1)
        .map(|i| EdgeRec::new(i, i + 1, rng.gen_range(lo..=hi)))
        .collect();
    let mut rot = Vec::with_capacity(vertices);
    for v in 0..vertices {
        let mut list = Vec::new();
        if v > 0 {
            list.push(v - 1);
        }
        if v + 1 < vertices {
            list.push(v);
        }
        rot.push(list);
    }
    let terminals = vec![0, vertices - 1];
    let g0 = PlanarGraph::new(vertices, edges.clone(), rot.clone(), terminals.clone(), None, None, None)?;
    let cover = g0.face_cover_min();
    PlanarGraph::new(
        vertices,
        edges,
        rot,
        terminals,
        Some(0),
        Some(cover.faces),
        Some(cover.assign),
    )
}

/// Explicitly weighted path, for hand-built test cases.
pub fn path_weighted(weights: &[u64]) -> Result<PlanarGraph> {
    let n = weights.len() + 1;
    let edges: Vec<EdgeRec> = weights
        .iter()
        .enumerate()
        .map(|(i, &w)| EdgeRec::new(i, i + 1, w))
        .collect();
    let mut rot = Vec::with_capacity(n);
    for v in 0..n {
        let mut list = Vec::new();
        if v > 0 {
            list.push(v - 1);
        }
        if v + 1 < n {
            list.push(v);
        }
        rot.push(list);
    }
    PlanarGraph::new(n, edges, rot, vec![0, n - 1], Some(0), None, None)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_deterministic() {
        let a = grid(4, 4, 6, TerminalRule::EvenBoundary, 1, 100, 1).unwrap();
        let b = grid(4, 4, 6, TerminalRule::EvenBoundary, 1, 100, 1).unwrap();
        assert_eq!(a.to_file_string(), b.to_file_string());
        let c = grid(4, 4, 6, TerminalRule::EvenBoundary, 1, 100, 2).unwrap();
        assert_ne!(a.to_file_string(), c.to_file_string());
    }

    #[test]
    fn grid_declares_gamma1() {
        let g = grid(4, 5, 7, TerminalRule::EvenBoundary, 1, 50, 3).unwrap();
        assert!(g.is_outer_gamma1());
    }

    #[test]
    fn holed_grid_gamma2() {
        let g = holed_grid(5, 5, &[(2, 2)], 4, 2, 1, 9, 5).unwrap();
        assert_eq!(g.declared_cover().unwrap().gamma(), 2);
        assert_eq!(g.face_cover_min().gamma(), 2);
    }

    #[test]
    fn holed_grid_gamma3() {
        let g = holed_grid(7, 7, &[(2, 2), (4, 4)], 3, 2, 1, 9, 5).unwrap();
        assert_eq!(g.declared_cover().unwrap().gamma(), 3);
    }

    #[test]
    fn star_and_path() {
        let s = star(3, 1, 1, 0).unwrap();
        assert_eq!(s.k(), 3);
        assert_eq!(s.emb().face_count(), 1);
        let p = path(4, 2, 7, 1).unwrap();
        assert_eq!(p.k(), 2);
    }
}
