//! Fill-reducing orderings for the direct solvers.
//!
//! The nested-dissection ordering splits a connected graph at a middle BFS
//! level rooted at a pseudo-peripheral node, orders both halves recursively,
//! and numbers the separator last.

use std::collections::VecDeque;

use super::CsrMatrix;

/// Column ordering used by the factorizations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Ordering {
    Natural,
    NestedDissection,
    /// Nested dissection from [`AUTO_THRESHOLD`] unknowns upward, natural below.
    #[default]
    Auto,
}

pub const AUTO_THRESHOLD: usize = 64;
const LEAF_SIZE: usize = 48;

impl Ordering {
    /// Permutation `perm` with `perm[k]` the original index placed at position `k`.
    pub fn permutation(self, a: &CsrMatrix) -> Vec<usize> {
        let n = a.nrows();
        match self {
            Ordering::Natural => (0..n).collect(),
            Ordering::NestedDissection => nested_dissection(a),
            Ordering::Auto if n >= AUTO_THRESHOLD => nested_dissection(a),
            Ordering::Auto => (0..n).collect(),
        }
    }
}

pub fn invert_permutation(perm: &[usize]) -> Vec<usize> {
    let mut inv = vec![0; perm.len()];
    for (k, &i) in perm.iter().enumerate() {
        inv[i] = k;
    }
    inv
}

pub fn is_permutation(perm: &[usize]) -> bool {
    let mut seen = vec![false; perm.len()];
    perm.iter()
        .all(|&i| i < seen.len() && !std::mem::replace(&mut seen[i], true))
}

/// Nested-dissection ordering of the pattern of `A + A^T`.
pub fn nested_dissection(a: &CsrMatrix) -> Vec<usize> {
    assert_eq!(a.nrows(), a.ncols(), "ordering needs a square matrix");
    let (ptr, adj) = a.symmetric_adjacency();
    let n = a.nrows();
    let mut nd = Dissector {
        ptr: &ptr,
        adj: &adj,
        stamp: vec![0; n],
        level: vec![usize::MAX; n],
        next_stamp: 0,
        order: Vec::with_capacity(n),
    };
    let mut pending = vec![Task::Split((0..n).collect())];
    // Explicit stack: `Emit` tasks carry separators that must follow both halves.
    while let Some(task) = pending.pop() {
        match task {
            Task::Emit(nodes) => nd.order.extend(nodes),
            Task::Split(nodes) => nd.split(nodes, &mut pending),
        }
    }
    debug_assert!(is_permutation(&nd.order));
    nd.order
}

enum Task {
    Split(Vec<usize>),
    Emit(Vec<usize>),
}

struct Dissector<'a> {
    ptr: &'a [usize],
    adj: &'a [usize],
    stamp: Vec<usize>,
    level: Vec<usize>,
    next_stamp: usize,
    order: Vec<usize>,
}

impl Dissector<'_> {
    fn neighbours(&self, v: usize) -> &[usize] {
        &self.adj[self.ptr[v]..self.ptr[v + 1]]
    }

    fn mark(&mut self, nodes: &[usize]) -> usize {
        self.next_stamp += 1;
        for &v in nodes {
            self.stamp[v] = self.next_stamp;
        }
        self.next_stamp
    }

    /// BFS restricted to nodes carrying `stamp`; returns the visit order and
    /// fills `self.level`.
    fn bfs(&mut self, root: usize, stamp: usize, nodes: &[usize]) -> Vec<usize> {
        for &v in nodes {
            self.level[v] = usize::MAX;
        }
        let mut seen = Vec::with_capacity(nodes.len());
        let mut queue = VecDeque::new();
        self.level[root] = 0;
        queue.push_back(root);
        while let Some(v) = queue.pop_front() {
            seen.push(v);
            let lv = self.level[v];
            for i in self.ptr[v]..self.ptr[v + 1] {
                let w = self.adj[i];
                if self.stamp[w] == stamp && self.level[w] == usize::MAX {
                    self.level[w] = lv + 1;
                    queue.push_back(w);
                }
            }
        }
        seen
    }

    fn split(&mut self, nodes: Vec<usize>, pending: &mut Vec<Task>) {
        if nodes.len() <= LEAF_SIZE {
            self.order.extend(nodes);
            return;
        }
        let stamp = self.mark(&nodes);

        let mut visit = self.bfs(nodes[0], stamp, &nodes);
        if visit.len() < nodes.len() {
            // Disconnected: handle each component on its own.
            let mut components = vec![visit];
            for &v in &nodes {
                if self.level[v] == usize::MAX {
                    let comp = self.bfs_keep(v, stamp);
                    components.push(comp);
                }
            }
            for comp in components.into_iter().rev() {
                pending.push(Task::Split(comp));
            }
            return;
        }

        // Pseudo-peripheral root: restart from the farthest node of minimum degree
        // while the eccentricity keeps growing.
        let mut depth = self.level[*visit.last().expect("non-empty")];
        for _ in 0..8 {
            let candidate = self.farthest_min_degree(&visit, depth, stamp);
            let trial = self.bfs(candidate, stamp, &nodes);
            let trial_depth = self.level[*trial.last().expect("non-empty")];
            if trial_depth <= depth {
                visit = self.bfs(visit[0], stamp, &nodes);
                break;
            }
            depth = trial_depth;
            visit = trial;
        }

        if depth < 2 {
            self.order.extend(nodes);
            return;
        }
        let half = visit.len() / 2;
        let mid = self.level[visit[half]].clamp(1, depth - 1);

        let mut part_a = Vec::new();
        let mut part_b = Vec::new();
        let mut sep = Vec::new();
        for &v in &visit {
            match self.level[v].cmp(&mid) {
                std::cmp::Ordering::Less => part_a.push(v),
                std::cmp::Ordering::Greater => part_b.push(v),
                std::cmp::Ordering::Equal => sep.push(v),
            }
        }
        // Separator nodes without neighbours beyond the separator join the near side.
        let mut thin = Vec::with_capacity(sep.len());
        for &v in &sep {
            let touches_far = self
                .neighbours(v)
                .iter()
                .any(|&w| self.stamp[w] == stamp && self.level[w] == mid + 1);
            if touches_far {
                thin.push(v);
            } else {
                part_a.push(v);
            }
        }

        pending.push(Task::Emit(thin));
        pending.push(Task::Split(part_b));
        pending.push(Task::Split(part_a));
    }

    /// BFS over an unvisited component without clearing earlier levels.
    fn bfs_keep(&mut self, root: usize, stamp: usize) -> Vec<usize> {
        let mut seen = Vec::new();
        let mut queue = VecDeque::new();
        self.level[root] = 0;
        queue.push_back(root);
        while let Some(v) = queue.pop_front() {
            seen.push(v);
            for i in self.ptr[v]..self.ptr[v + 1] {
                let w = self.adj[i];
                if self.stamp[w] == stamp && self.level[w] == usize::MAX {
                    self.level[w] = 0;
                    queue.push_back(w);
                }
            }
        }
        seen
    }

    fn farthest_min_degree(&self, visit: &[usize], depth: usize, stamp: usize) -> usize {
        visit
            .iter()
            .rev()
            .take_while(|&&v| self.level[v] == depth)
            .min_by_key(|&&v| {
                self.neighbours(v)
                    .iter()
                    .filter(|&&w| self.stamp[w] == stamp)
                    .count()
            })
            .copied()
            .expect("last level is non-empty")
    }
}
