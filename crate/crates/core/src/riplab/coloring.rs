//! Equitable coloring with `q > max_degree` colors: a size-aware greedy
//! coloring followed by rebalancing. Rebalancing shifts one vertex along
//! each arc of a path in the class accessibility digraph (`X -> Y` when some
//! vertex of `X` has no neighbor in `Y`), falls back to Kempe chain swaps
//! between a large and a small class, and finally to size-neutral moves.
//! Every emitted partition should still go through [`verify_partition`].

use std::collections::VecDeque;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::graph::Graph;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EquitablePartition {
    pub q: usize,
    /// `q` color classes of vertex indices, each sorted. Classes may be empty
    /// when there are fewer vertices than colors.
    pub classes: Vec<Vec<usize>>,
}

impl EquitablePartition {
    pub fn class_sizes(&self) -> Vec<usize> {
        self.classes.iter().map(Vec::len).collect()
    }
}

/// Evidence that a partition is a proper equitable coloring.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PartitionCertificate {
    pub vertices: usize,
    pub q: usize,
    pub floor: usize,
    pub ceil: usize,
    pub min_size: usize,
    pub max_size: usize,
    /// Vertex pairs checked non-adjacent inside each class, `C(|C_j|, 2)`.
    pub absent_edge_assertions: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PartitionViolation {
    #[error("expected {expected} classes, got {got}")]
    ClassCount { expected: usize, got: usize },
    #[error("vertex {0} out of range")]
    OutOfRange(usize),
    #[error("vertex {0} appears more than once")]
    Duplicate(usize),
    #[error("vertex {0} is not covered")]
    Uncovered(usize),
    #[error("class {class} contains adjacent vertices {a} and {b}")]
    Improper { class: usize, a: usize, b: usize },
    #[error("class {class} has size {size}, outside {floor}..={ceil}")]
    Unbalanced { class: usize, size: usize, floor: usize, ceil: usize },
}

/// Independent checker: exact cover of the vertices, every class an
/// independent set, and every class size within `floor(k/q)..=ceil(k/q)`.
pub fn verify_partition(
    g: &Graph,
    p: &EquitablePartition,
) -> std::result::Result<PartitionCertificate, PartitionViolation> {
    let k = g.len();
    if p.q == 0 || p.classes.len() != p.q {
        return Err(PartitionViolation::ClassCount { expected: p.q, got: p.classes.len() });
    }
    let mut seen = vec![false; k];
    for class in &p.classes {
        for &v in class {
            if v >= k {
                return Err(PartitionViolation::OutOfRange(v));
            }
            if std::mem::replace(&mut seen[v], true) {
                return Err(PartitionViolation::Duplicate(v));
            }
        }
    }
    if let Some(v) = seen.iter().position(|s| !s) {
        return Err(PartitionViolation::Uncovered(v));
    }
    let mut assertions = Vec::with_capacity(p.q);
    for (ci, class) in p.classes.iter().enumerate() {
        let mut count = 0;
        for (i, &a) in class.iter().enumerate() {
            for &b in &class[i + 1..] {
                if g.has_edge(a, b) {
                    return Err(PartitionViolation::Improper { class: ci, a, b });
                }
                count += 1;
            }
        }
        assertions.push(count);
    }
    let floor = k / p.q;
    let ceil = k.div_ceil(p.q);
    for (ci, class) in p.classes.iter().enumerate() {
        if class.len() < floor || class.len() > ceil {
            return Err(PartitionViolation::Unbalanced { class: ci, size: class.len(), floor, ceil });
        }
    }
    let sizes = p.class_sizes();
    Ok(PartitionCertificate {
        vertices: k,
        q: p.q,
        floor,
        ceil,
        min_size: *sizes.iter().min().unwrap_or(&0),
        max_size: *sizes.iter().max().unwrap_or(&0),
        absent_edge_assertions: assertions,
    })
}

struct State<'a> {
    g: &'a Graph,
    q: usize,
    color: Vec<usize>,
    sizes: Vec<usize>,
    /// `conflicts[v * q + c]`: neighbors of `v` colored `c`.
    conflicts: Vec<u32>,
}

impl<'a> State<'a> {
    fn greedy(g: &'a Graph, q: usize) -> Self {
        let k = g.len();
        let mut st = State { g, q, color: vec![usize::MAX; k], sizes: vec![0; q], conflicts: vec![0; k * q] };
        let mut order: Vec<usize> = (0..k).collect();
        order.sort_by_key(|&v| std::cmp::Reverse(g.degree(v)));
        for v in order {
            let c = (0..q)
                .filter(|&c| st.conflicts[v * q + c] == 0)
                .min_by_key(|&c| (st.sizes[c], c))
                .expect("q > max degree leaves a free color");
            st.place(v, c);
        }
        st
    }

    fn place(&mut self, v: usize, c: usize) {
        self.color[v] = c;
        self.sizes[c] += 1;
        for &u in self.g.neighbors(v) {
            self.conflicts[u * self.q + c] += 1;
        }
    }

    fn relocate(&mut self, v: usize, to: usize) {
        let from = self.color[v];
        self.sizes[from] -= 1;
        for &u in self.g.neighbors(v) {
            self.conflicts[u * self.q + from] -= 1;
        }
        self.place(v, to);
    }

    fn movable(&self, v: usize, to: usize) -> bool {
        self.color[v] != to && self.conflicts[v * self.q + to] == 0
    }

    fn spread(&self) -> (usize, usize) {
        let min = *self.sizes.iter().min().unwrap();
        let max = *self.sizes.iter().max().unwrap();
        (min, max)
    }

    /// `witness[x][y]`: lowest vertex of class `x` movable into class `y`.
    fn witnesses(&self) -> Vec<Vec<Option<usize>>> {
        let mut w = vec![vec![None; self.q]; self.q];
        for v in 0..self.color.len() {
            let x = self.color[v];
            for y in 0..self.q {
                if w[x][y].is_none() && self.movable(v, y) {
                    w[x][y] = Some(v);
                }
            }
        }
        w
    }

    /// Moves one vertex along a path from a class of size `a` to a class of
    /// size at most `a - 2`, preferring the largest `a`.
    fn shift_along_path(&mut self) -> Option<usize> {
        let (min, max) = self.spread();
        let w = self.witnesses();
        for level in (min + 2..=max).rev() {
            let mut prev: Vec<Option<usize>> = vec![None; self.q];
            let mut seen = vec![false; self.q];
            let mut queue = VecDeque::new();
            for c in 0..self.q {
                if self.sizes[c] == level {
                    seen[c] = true;
                    queue.push_back(c);
                }
            }
            while let Some(x) = queue.pop_front() {
                if self.sizes[x] + 2 <= level {
                    let mut path = vec![x];
                    let mut cur = x;
                    while let Some(p) = prev[cur] {
                        path.push(p);
                        cur = p;
                    }
                    path.reverse();
                    let movers: Vec<(usize, usize)> =
                        path.windows(2).map(|e| (w[e[0]][e[1]].expect("arc witness"), e[1])).collect();
                    for &(v, to) in &movers {
                        self.relocate(v, to);
                    }
                    return Some(movers.len());
                }
                for y in 0..self.q {
                    if !seen[y] && w[x][y].is_some() {
                        seen[y] = true;
                        prev[y] = Some(x);
                        queue.push_back(y);
                    }
                }
            }
        }
        None
    }

    fn kempe_component(&self, start: usize, x: usize, y: usize) -> Vec<usize> {
        let mut comp = vec![start];
        let mut mark = vec![false; self.color.len()];
        mark[start] = true;
        let mut i = 0;
        while i < comp.len() {
            let v = comp[i];
            for &u in self.g.neighbors(v) {
                if !mark[u] && (self.color[u] == x || self.color[u] == y) {
                    mark[u] = true;
                    comp.push(u);
                }
            }
            i += 1;
        }
        comp
    }

    /// Swaps a two-colored component between a larger class `x` and a
    /// smaller class `y` when that strictly narrows their size gap.
    fn kempe_swap(&mut self, allow_neutral: bool, rng: &mut ChaCha8Rng) -> Option<usize> {
        let mut candidates = Vec::new();
        for x in 0..self.q {
            for y in 0..self.q {
                let gap = self.sizes[x] as isize - self.sizes[y] as isize;
                if gap < if allow_neutral { 1 } else { 2 } {
                    continue;
                }
                let mut done = vec![false; self.color.len()];
                for v in 0..self.color.len() {
                    if self.color[v] != x || done[v] {
                        continue;
                    }
                    let comp = self.kempe_component(v, x, y);
                    let mut d = 0isize;
                    for &u in &comp {
                        done[u] = true;
                        d += if self.color[u] == x { 1 } else { -1 };
                    }
                    let ok = if allow_neutral { d >= 1 && d <= gap } else { d >= 1 && d < gap };
                    if ok {
                        candidates.push((comp, x, y));
                    }
                }
                if !allow_neutral && !candidates.is_empty() {
                    break;
                }
            }
            if !allow_neutral && !candidates.is_empty() {
                break;
            }
        }
        if candidates.is_empty() {
            return None;
        }
        let pick = if allow_neutral { rng.random_range(0..candidates.len()) } else { 0 };
        let (comp, x, y) = candidates.swap_remove(pick);
        let cx: Vec<usize> = comp.iter().copied().filter(|&u| self.color[u] == x).collect();
        let cy: Vec<usize> = comp.iter().copied().filter(|&u| self.color[u] == y).collect();
        // Recolor in two passes; the component is bipartite between x and y
        // and has no edges to the rest of x or y.
        for &u in &cx {
            self.sizes[x] -= 1;
            for &w in self.g.neighbors(u) {
                self.conflicts[w * self.q + x] -= 1;
            }
        }
        for &u in &cy {
            self.sizes[y] -= 1;
            for &w in self.g.neighbors(u) {
                self.conflicts[w * self.q + y] -= 1;
            }
        }
        for &u in &cx {
            self.place(u, y);
        }
        for &u in &cy {
            self.place(u, x);
        }
        Some(comp.len())
    }

    /// A single move that leaves the sum of squared class sizes unchanged.
    fn neutral_move(&mut self, rng: &mut ChaCha8Rng, last: Option<usize>) -> bool {
        let mut cands = Vec::new();
        for v in 0..self.color.len() {
            if Some(v) == last {
                continue;
            }
            let from = self.color[v];
            for to in 0..self.q {
                if self.sizes[to] + 1 == self.sizes[from] && self.movable(v, to) {
                    cands.push((v, to));
                }
            }
        }
        if cands.is_empty() {
            return false;
        }
        let (v, to) = cands[rng.random_range(0..cands.len())];
        self.relocate(v, to);
        true
    }

    fn into_partition(self) -> EquitablePartition {
        let mut classes = vec![Vec::new(); self.q];
        for (v, &c) in self.color.iter().enumerate() {
            classes[c].push(v);
        }
        EquitablePartition { q: self.q, classes }
    }
}

/// Partitions the vertices into `q` independent sets whose sizes differ by
/// at most one. Requires `q > max_degree`; gives up with
/// [`Error::ColoringFailed`] after `10 k q` vertex moves.
pub fn equitable_coloring(g: &Graph, q: usize) -> Result<EquitablePartition> {
    let delta = g.max_degree();
    if q == 0 || q <= delta {
        return Err(Error::TooFewColors { colors: q, max_degree: delta });
    }
    let k = g.len();
    let mut st = State::greedy(g, q);
    let guard = 10 * k * q;
    let mut moves = 0;
    let mut rng = ChaCha8Rng::seed_from_u64(0x6571_7569_7461_626c);
    let mut last_neutral = None;
    loop {
        let (min, max) = st.spread();
        if max - min <= 1 {
            return Ok(st.into_partition());
        }
        if moves >= guard {
            return Err(Error::ColoringFailed { moves, min, max });
        }
        if let Some(m) = st.shift_along_path() {
            moves += m;
            continue;
        }
        if let Some(m) = st.kempe_swap(false, &mut rng) {
            moves += m;
            continue;
        }
        // Stuck: wander among colorings with the same size profile.
        let before = moves;
        if rng.random_bool(0.5) {
            if let Some(m) = st.kempe_swap(true, &mut rng) {
                moves += m;
            }
        }
        if moves == before {
            if !st.neutral_move(&mut rng, last_neutral) {
                if st.kempe_swap(true, &mut rng).is_none() {
                    return Err(Error::ColoringFailed { moves, min, max });
                }
            } else {
                last_neutral = None;
            }
            moves += 1;
        }
    }
}
