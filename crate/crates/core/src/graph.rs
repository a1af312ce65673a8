//! Weighted task graphs: construction, seeded random generation, special
//! shapes, structural analyses and the plain-text DAG format.
//!
//! Random graphs use ChaCha8 seeded from a `u64`, so a seed always yields the
//! same graph on every platform.
//!
//! The text format is a header line `n m`, then `n` lines `id weight`, then
//! `m` lines `pred succ`, all whitespace separated with 0-based ids.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use rand::seq::index;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::model::Task;
use crate::scalar::Scalar;

/// Directed acyclic graph of weighted tasks. Task ids are `0..n`.
#[derive(Clone, Debug, PartialEq)]
pub struct TaskGraph<T> {
    tasks: Vec<Task<T>>,
    edges: Vec<(usize, usize)>,
    succs: Vec<Vec<usize>>,
    preds: Vec<Vec<usize>>,
}

/// Recipe for building a graph.
#[derive(Clone, Debug, PartialEq)]
pub enum GraphShape<T> {
    Random { nodes: usize, edges: usize, seed: u64 },
    Chain(Vec<T>),
    /// Source weight and leaf weights.
    Fork(T, Vec<T>),
    /// `leaves` leaves, all tasks of weight `w`.
    ForkIdentical { leaves: usize, w: T },
}

impl<T: Scalar> GraphShape<T> {
    /// Random graphs draw weights from `weight_range`; other shapes ignore it.
    pub fn build(&self, weight_range: (T, T)) -> Result<TaskGraph<T>> {
        match self {
            GraphShape::Random { nodes, edges, seed } => generate_random(*nodes, *edges, weight_range, *seed),
            GraphShape::Chain(ws) => TaskGraph::chain(ws),
            GraphShape::Fork(w0, leaves) => TaskGraph::fork(*w0, leaves),
            GraphShape::ForkIdentical { leaves, w } => TaskGraph::fork(*w, &vec![*w; *leaves]),
        }
    }
}

impl<T: Scalar> TaskGraph<T> {
    /// Builds and validates a graph; rejects bad weights, invalid endpoints,
    /// self-loops, duplicate edges and cycles.
    pub fn new(weights: Vec<T>, edges: Vec<(usize, usize)>) -> Result<Self> {
        let n = weights.len();
        if let Some((i, w)) = weights.iter().enumerate().find(|(_, w)| !(**w > T::zero() && w.is_finite())) {
            return Err(Error::InvalidGraph(format!("task {} has non-positive weight {}", i, w)));
        }
        let mut seen = BTreeSet::new();
        let mut succs = vec![Vec::new(); n];
        let mut preds = vec![Vec::new(); n];
        for &(u, v) in &edges {
            if u >= n || v >= n {
                return Err(Error::InvalidGraph(format!("edge {}->{} references a missing task", u, v)));
            }
            if u == v {
                return Err(Error::InvalidGraph(format!("self-loop on task {}", u)));
            }
            if !seen.insert((u, v)) {
                return Err(Error::InvalidGraph(format!("duplicate edge {}->{}", u, v)));
            }
            succs[u].push(v);
            preds[v].push(u);
        }
        let tasks = weights.into_iter().enumerate().map(|(id, weight)| Task { id, weight }).collect();
        let g = TaskGraph { tasks, edges, succs, preds };
        g.topological_order()?;
        Ok(g)
    }

    /// `T_0 -> T_1 -> ... -> T_{n-1}`.
    pub fn chain(weights: &[T]) -> Result<Self> {
        let edges = (1..weights.len()).map(|i| (i - 1, i)).collect();
        Self::new(weights.to_vec(), edges)
    }

    /// Source `T_0` with an edge to each leaf `T_1..T_n`.
    pub fn fork(source: T, leaves: &[T]) -> Result<Self> {
        let mut weights = vec![source];
        weights.extend_from_slice(leaves);
        let edges = (1..=leaves.len()).map(|i| (0, i)).collect();
        Self::new(weights, edges)
    }

    pub fn independent(weights: &[T]) -> Result<Self> {
        Self::new(weights.to_vec(), Vec::new())
    }

    pub fn len(&self) -> usize {
        self.tasks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tasks.is_empty()
    }

    pub fn tasks(&self) -> &[Task<T>] {
        &self.tasks
    }

    pub fn weight(&self, id: usize) -> T {
        self.tasks[id].weight
    }

    pub fn weights(&self) -> Vec<T> {
        self.tasks.iter().map(|t| t.weight).collect()
    }

    pub fn total_weight(&self) -> T {
        self.tasks.iter().map(|t| t.weight).sum()
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn successors(&self, id: usize) -> &[usize] {
        &self.succs[id]
    }

    pub fn predecessors(&self, id: usize) -> &[usize] {
        &self.preds[id]
    }

    /// Kahn's algorithm; among ready tasks the smallest id goes first.
    pub fn topological_order(&self) -> Result<Vec<usize>> {
        topological_sort(self.len(), |u| self.succs[u].iter().copied())
    }

    /// `bl(i) = w_i + max over successors bl(j)`, `w_i` for sinks.
    pub fn bottom_levels(&self) -> Vec<T> {
        let order = self.topological_order().expect("graph is acyclic by construction");
        let mut bl = vec![T::zero(); self.len()];
        for &u in order.iter().rev() {
            let tail = self.succs[u].iter().map(|&v| bl[v]).fold(T::zero(), T::max);
            bl[u] = self.tasks[u].weight + tail;
        }
        bl
    }

    /// Serializes to the plain-text DAG format.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        writeln!(out, "{} {}", self.len(), self.edges.len()).unwrap();
        for t in &self.tasks {
            writeln!(out, "{} {}", t.id, t.weight).unwrap();
        }
        for (u, v) in &self.edges {
            writeln!(out, "{} {}", u, v).unwrap();
        }
        out
    }

    /// Parses the plain-text DAG format. Blank lines and `#` comments are skipped.
    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
            .filter(|(_, l)| !l.is_empty());

        let parse_err = |line: usize, msg: String| Error::Parse { line, msg };
        let mut fields = |expected: &str| -> Result<(usize, Vec<String>)> {
            let (ln, l) = lines
                .next()
                .ok_or_else(|| parse_err(0, format!("unexpected end of input, expected {}", expected)))?;
            let f: Vec<String> = l.split_whitespace().map(str::to_owned).collect();
            if f.len() != 2 {
                return Err(parse_err(ln, format!("expected {}, got {:?}", expected, l)));
            }
            Ok((ln, f))
        };
        let num = |ln: usize, s: &str| -> Result<usize> {
            s.parse().map_err(|_| parse_err(ln, format!("not an integer: {:?}", s)))
        };

        let (ln, header) = fields("header `n m`")?;
        let n = num(ln, &header[0])?;
        let m = num(ln, &header[1])?;
        let mut weights = vec![None; n];
        for _ in 0..n {
            let (ln, f) = fields("`id weight`")?;
            let id = num(ln, &f[0])?;
            let w: f64 = f[1].parse().map_err(|_| parse_err(ln, format!("not a number: {:?}", f[1])))?;
            let slot = weights
                .get_mut(id)
                .ok_or_else(|| parse_err(ln, format!("task id {} out of range", id)))?;
            if slot.is_some() {
                return Err(parse_err(ln, format!("task {} listed twice", id)));
            }
            *slot = Some(T::lit(w));
        }
        let mut edges = Vec::with_capacity(m);
        for _ in 0..m {
            let (ln, f) = fields("`pred succ`")?;
            edges.push((num(ln, &f[0])?, num(ln, &f[1])?));
        }
        if let Some((ln, l)) = lines.next() {
            return Err(parse_err(ln, format!("trailing content {:?}", l)));
        }
        let weights = weights.into_iter().collect::<Option<Vec<_>>>().expect("all ids seen");
        Self::new(weights, edges)
    }
}

/// Topological sort of `0..n` given a successor function. Reports a task on a
/// cycle if there is one.
pub(crate) fn topological_sort<I>(n: usize, succs: impl Fn(usize) -> I) -> Result<Vec<usize>>
where
    I: Iterator<Item = usize>,
{
    let mut indeg = vec![0usize; n];
    for u in 0..n {
        for v in succs(u) {
            indeg[v] += 1;
        }
    }
    let mut ready: BTreeSet<usize> = (0..n).filter(|&u| indeg[u] == 0).collect();
    let mut order = Vec::with_capacity(n);
    while let Some(u) = ready.pop_first() {
        order.push(u);
        for v in succs(u) {
            indeg[v] -= 1;
            if indeg[v] == 0 {
                ready.insert(v);
            }
        }
    }
    if order.len() < n {
        let node = find_cycle_node(n, &indeg, &succs);
        return Err(Error::Cycle { node });
    }
    Ok(order)
}

// Every leftover task has a leftover predecessor, so walking backwards from
// any of them must revisit a node; follow successors instead and stop at the
// first repeat.
fn find_cycle_node<I>(n: usize, indeg: &[usize], succs: &impl Fn(usize) -> I) -> usize
where
    I: Iterator<Item = usize>,
{
    let start = (0..n).find(|&u| indeg[u] > 0).expect("some task is left over");
    let mut visited = vec![false; n];
    let mut u = start;
    loop {
        if visited[u] {
            return u;
        }
        visited[u] = true;
        u = succs(u).find(|&v| indeg[v] > 0).expect("leftover task has a leftover successor");
    }
}

/// Random DAG with exactly `nodes` tasks and `edges` edges.
///
/// Nodes are placed in a random order; edges are sampled uniformly without
/// replacement among the forward pairs of that order. Weights are uniform in
/// `weight_range`, redrawn if exactly zero.
pub fn generate_random<T: Scalar>(nodes: usize, edges: usize, weight_range: (T, T), seed: u64) -> Result<TaskGraph<T>> {
    let max_edges = nodes * nodes.saturating_sub(1) / 2;
    if edges > max_edges {
        return Err(Error::InvalidGraph(format!(
            "{} edges requested but a DAG on {} nodes has at most {}",
            edges, nodes, max_edges
        )));
    }
    let (lo, hi) = (weight_range.0.to_f64_lossy(), weight_range.1.to_f64_lossy());
    if !(lo >= 0.0 && hi > lo) {
        return Err(Error::InvalidGraph(format!("weight range [{}, {}] is not a positive interval", lo, hi)));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut perm: Vec<usize> = (0..nodes).collect();
    perm.shuffle(&mut rng);

    let mut pairs: Vec<(usize, usize)> = index::sample(&mut rng, max_edges, edges)
        .into_iter()
        .map(|k| {
            let (i, j) = unrank_pair(nodes, k);
            (perm[i], perm[j])
        })
        .collect();
    pairs.sort_unstable();

    let weights = (0..nodes)
        .map(|_| loop {
            let w: f64 = rng.random_range(lo..=hi);
            if w > 0.0 {
                break T::lit(w);
            }
        })
        .collect();
    TaskGraph::new(weights, pairs)
}

/// Maps `k` in `0..n(n-1)/2` to the `k`-th pair `(i, j)`, `i < j`, in
/// row-major order.
fn unrank_pair(n: usize, mut k: usize) -> (usize, usize) {
    let mut i = 0;
    loop {
        let row = n - 1 - i;
        if k < row {
            return (i, i + 1 + k);
        }
        k -= row;
        i += 1;
    }
}
