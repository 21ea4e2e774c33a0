//! Exact max-flow on big-integer capacities (BFS augmenting paths).
//! Internal support for the minimum terminal cut computation.

use num_bigint::BigUint;
use num_traits::Zero;

pub struct FlowNetwork {
    n: usize,
    // Paired arcs: arc 2i and 2i+1 are the two directions of input edge i.
    to: Vec<usize>,
    cap: Vec<BigUint>,
    adj: Vec<Vec<usize>>,
}

impl FlowNetwork {
    pub fn new(n: usize) -> Self {
        FlowNetwork {
            n,
            to: Vec::new(),
            cap: Vec::new(),
            adj: vec![Vec::new(); n],
        }
    }

    /// Undirected edge: capacity `c` in both directions.
    pub fn add_undirected(&mut self, u: usize, v: usize, c: BigUint) {
        let a = self.to.len();
        self.to.push(v);
        self.cap.push(c.clone());
        self.to.push(u);
        self.cap.push(c);
        self.adj[u].push(a);
        self.adj[v].push(a + 1);
    }

    /// Edmonds-Karp. Returns the max-flow value and the source side of the
    /// minimum cut (vertices reachable from `s` in the residual network).
    pub fn max_flow(&mut self, s: usize, t: usize) -> (BigUint, Vec<bool>) {
        let mut total = BigUint::zero();
        loop {
            let mut pred: Vec<Option<usize>> = vec![None; self.n];
            let mut seen = vec![false; self.n];
            seen[s] = true;
            let mut queue = std::collections::VecDeque::new();
            queue.push_back(s);
            while let Some(u) = queue.pop_front() {
                if u == t {
                    break;
                }
                for &a in &self.adj[u] {
                    let v = self.to[a];
                    if !seen[v] && !self.cap[a].is_zero() {
                        seen[v] = true;
                        pred[v] = Some(a);
                        queue.push_back(v);
                    }
                }
            }
            if !seen[t] {
                return (total, seen);
            }
            // Bottleneck along the path.
            let mut bottleneck: Option<BigUint> = None;
            let mut v = t;
            while v != s {
                let a = pred[v].unwrap();
                bottleneck = Some(match bottleneck {
                    None => self.cap[a].clone(),
                    Some(b) => b.min(self.cap[a].clone()),
                });
                v = self.to[a ^ 1];
            }
            let f = bottleneck.unwrap();
            let mut v = t;
            while v != s {
                let a = pred[v].unwrap();
                self.cap[a] -= &f;
                self.cap[a ^ 1] += &f;
                v = self.to[a ^ 1];
            }
            total += f;
        }
    }
}
