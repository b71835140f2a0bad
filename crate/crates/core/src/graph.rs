//! Undirected simple graph with dense node indices `0..n`.
//!
//! Adjacency is kept twice: per-node neighbor lists (for walk steps and
//! BFS) and a hashed edge set (for O(1) existence checks). Every mutation
//! goes through [`Graph::add_edge`] / [`Graph::remove_edge`], which keep
//! both views consistent; [`Graph::check_invariants`] verifies it.

use std::collections::{HashSet, VecDeque};
use std::io::{BufRead, Write};

use rayon::prelude::*;
use serde::Serialize;

use crate::error::GraphError;

#[derive(Debug, Clone, Default)]
pub struct Graph {
    adjacency: Vec<Vec<usize>>,
    edge_set: HashSet<(usize, usize)>,
}

#[inline]
fn key(i: usize, j: usize) -> (usize, usize) {
    if i < j {
        (i, j)
    } else {
        (j, i)
    }
}

impl PartialEq for Graph {
    fn eq(&self, other: &Self) -> bool {
        self.node_count() == other.node_count() && self.edge_set == other.edge_set
    }
}

impl Eq for Graph {}

impl Graph {
    pub fn new(node_count: usize) -> Self {
        Self {
            adjacency: vec![Vec::new(); node_count],
            edge_set: HashSet::new(),
        }
    }

    /// Builds a graph from an edge iterator. Duplicate edges are collapsed;
    /// self-loops and out-of-range indices are errors.
    pub fn from_edges<I>(node_count: usize, edges: I) -> Result<Self, GraphError>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        let mut g = Self::new(node_count);
        for (i, j) in edges {
            g.add_edge(i, j)?;
        }
        Ok(g)
    }

    pub fn complete(n: usize) -> Self {
        let mut g = Self::new(n);
        for i in 0..n {
            for j in (i + 1)..n {
                g.insert_unchecked(i, j);
            }
        }
        g
    }

    pub fn path(n: usize) -> Self {
        let mut g = Self::new(n);
        for i in 1..n {
            g.insert_unchecked(i - 1, i);
        }
        g
    }

    pub fn cycle(n: usize) -> Self {
        let mut g = Self::path(n);
        if n > 2 {
            g.insert_unchecked(n - 1, 0);
        }
        g
    }

    /// Star with node 0 as hub and `leaves` leaves.
    pub fn star(leaves: usize) -> Self {
        let mut g = Self::new(leaves + 1);
        for leaf in 1..=leaves {
            g.insert_unchecked(0, leaf);
        }
        g
    }

    pub fn node_count(&self) -> usize {
        self.adjacency.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edge_set.len()
    }

    pub fn degree(&self, i: usize) -> usize {
        self.adjacency[i].len()
    }

    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.adjacency[i]
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.edge_set.contains(&key(i, j))
    }

    fn check_index(&self, i: usize) -> Result<(), GraphError> {
        if i >= self.node_count() {
            Err(GraphError::OutOfRange {
                index: i,
                node_count: self.node_count(),
            })
        } else {
            Ok(())
        }
    }

    /// Inserts `{i, j}`. Returns `Ok(false)` if the edge already existed.
    pub fn add_edge(&mut self, i: usize, j: usize) -> Result<bool, GraphError> {
        self.check_index(i)?;
        self.check_index(j)?;
        if i == j {
            return Err(GraphError::SelfLoop(i));
        }
        if self.has_edge(i, j) {
            return Ok(false);
        }
        self.insert_unchecked(i, j);
        Ok(true)
    }

    fn insert_unchecked(&mut self, i: usize, j: usize) {
        if self.edge_set.insert(key(i, j)) {
            self.adjacency[i].push(j);
            self.adjacency[j].push(i);
        }
    }

    /// Removes `{i, j}`. Returns whether the edge was present.
    pub fn remove_edge(&mut self, i: usize, j: usize) -> Result<bool, GraphError> {
        self.check_index(i)?;
        self.check_index(j)?;
        if !self.edge_set.remove(&key(i, j)) {
            return Ok(false);
        }
        detach(&mut self.adjacency[i], j);
        detach(&mut self.adjacency[j], i);
        Ok(true)
    }

    /// Edges as `(i, j)` with `i < j`, sorted lexicographically.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out: Vec<(usize, usize)> = self
            .adjacency
            .iter()
            .enumerate()
            .flat_map(|(i, nbrs)| nbrs.iter().filter(move |&&j| i < j).map(move |&j| (i, j)))
            .collect();
        out.sort_unstable();
        out
    }

    pub fn degree_sequence(&self) -> Vec<usize> {
        self.adjacency.iter().map(Vec::len).collect()
    }

    pub fn isolated_count(&self) -> usize {
        self.adjacency.iter().filter(|a| a.is_empty()).count()
    }

    /// Verifies simplicity and agreement between neighbor lists and the edge set.
    pub fn check_invariants(&self) -> Result<(), GraphError> {
        let mut degree_sum = 0;
        for (i, nbrs) in self.adjacency.iter().enumerate() {
            degree_sum += nbrs.len();
            let mut seen = HashSet::with_capacity(nbrs.len());
            for &j in nbrs {
                if j == i {
                    return Err(GraphError::Invariant(format!("self-loop at {i}")));
                }
                if j >= self.node_count() {
                    return Err(GraphError::Invariant(format!(
                        "neighbor {j} of {i} out of range"
                    )));
                }
                if !seen.insert(j) {
                    return Err(GraphError::Invariant(format!("duplicate edge {{{i},{j}}}")));
                }
                if !self.edge_set.contains(&key(i, j)) {
                    return Err(GraphError::Invariant(format!(
                        "edge {{{i},{j}}} in adjacency but not in edge set"
                    )));
                }
            }
        }
        if degree_sum != 2 * self.edge_count() {
            return Err(GraphError::Invariant(format!(
                "handshake violated: degree sum {degree_sum} != 2 * {}",
                self.edge_count()
            )));
        }
        Ok(())
    }

    /// Component label per node; labels are assigned in order of the
    /// smallest node index of each component.
    pub fn component_labels(&self) -> (Vec<usize>, usize) {
        let n = self.node_count();
        let mut label = vec![usize::MAX; n];
        let mut count = 0;
        let mut stack = Vec::new();
        for s in 0..n {
            if label[s] != usize::MAX {
                continue;
            }
            label[s] = count;
            stack.push(s);
            while let Some(u) = stack.pop() {
                for &v in &self.adjacency[u] {
                    if label[v] == usize::MAX {
                        label[v] = count;
                        stack.push(v);
                    }
                }
            }
            count += 1;
        }
        (label, count)
    }

    pub fn connected_components(&self) -> ComponentReport {
        let (labels, count) = self.component_labels();
        let mut sizes = vec![0usize; count];
        for &l in &labels {
            sizes[l] += 1;
        }
        let giant_label = sizes
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(&a.0)))
            .map(|(l, _)| l);
        let giant_size = giant_label.map_or(0, |l| sizes[l]);
        let n = self.node_count();
        let mut component_sizes = sizes;
        component_sizes.sort_unstable_by(|a, b| b.cmp(a));
        ComponentReport {
            giant_fraction: if n == 0 {
                0.0
            } else {
                giant_size as f64 / n as f64
            },
            component_sizes,
            giant_size,
            giant_label,
            labels,
        }
    }

    /// BFS hop distances from `source`; unreachable nodes get `usize::MAX`.
    pub fn bfs_distances(&self, source: usize) -> Vec<usize> {
        let mut dist = vec![usize::MAX; self.node_count()];
        let mut queue = VecDeque::new();
        bfs_into(self, source, &mut dist, &mut queue);
        dist
    }

    /// Exact diameter by BFS from every node of the giant component.
    pub fn diameter(&self) -> Diameter {
        if self.edge_count() == 0 {
            return Diameter::Infinite;
        }
        let report = self.connected_components();
        let giant = report
            .giant_label
            .expect("graph with edges has a component");
        let members: Vec<usize> = (0..self.node_count())
            .filter(|&v| report.labels[v] == giant)
            .collect();
        let n = self.node_count();
        let hops = members
            .par_iter()
            .map_init(
                || (vec![usize::MAX; n], VecDeque::new()),
                |(dist, queue), &s| {
                    dist.fill(usize::MAX);
                    bfs_into(self, s, dist, queue)
                },
            )
            .max()
            .unwrap_or(0);
        Diameter::Finite {
            hops,
            giant_component_only: report.component_sizes.len() > 1,
        }
    }

    /// Subgraph induced by `keep`, relabelled to `0..keep.len()` in the
    /// order given.
    pub fn induced_subgraph(&self, keep: &[usize]) -> Graph {
        let mut new_index = vec![usize::MAX; self.node_count()];
        for (k, &v) in keep.iter().enumerate() {
            new_index[v] = k;
        }
        let mut g = Graph::new(keep.len());
        for (k, &v) in keep.iter().enumerate() {
            for &w in &self.adjacency[v] {
                let kw = new_index[w];
                if kw != usize::MAX && k < kw {
                    g.insert_unchecked(k, kw);
                }
            }
        }
        g
    }

    /// Writes the edge-list format: a `# nodes=<n>` header, optional extra
    /// `#` comment lines, then one `i j` pair per line.
    pub fn write_edge_list<W: Write>(&self, mut w: W, comments: &[String]) -> std::io::Result<()> {
        writeln!(w, "# nodes={}", self.node_count())?;
        for c in comments {
            writeln!(w, "# {c}")?;
        }
        for (i, j) in self.edges() {
            writeln!(w, "{i} {j}")?;
        }
        Ok(())
    }

    pub fn read_edge_list<R: BufRead>(r: R) -> Result<Graph, GraphError> {
        let mut graph: Option<Graph> = None;
        for (idx, line) in r.lines().enumerate() {
            let line = line?;
            let lineno = idx + 1;
            let trimmed = line.trim();
            if trimmed.is_empty() {
                continue;
            }
            if let Some(comment) = trimmed.strip_prefix('#') {
                if let Some(n) = comment.trim().strip_prefix("nodes=") {
                    if graph.is_some() {
                        return Err(GraphError::Parse {
                            line: lineno,
                            msg: "duplicate nodes header".into(),
                        });
                    }
                    let n = n.trim().parse::<usize>().map_err(|e| GraphError::Parse {
                        line: lineno,
                        msg: format!("bad node count: {e}"),
                    })?;
                    graph = Some(Graph::new(n));
                }
                continue;
            }
            let g = graph.as_mut().ok_or_else(|| GraphError::Parse {
                line: lineno,
                msg: "edge before `# nodes=<n>` header".into(),
            })?;
            let mut parts = trimmed.split_whitespace();
            let mut next = || -> Result<usize, GraphError> {
                parts
                    .next()
                    .ok_or_else(|| GraphError::Parse {
                        line: lineno,
                        msg: "expected two node indices".into(),
                    })?
                    .parse::<usize>()
                    .map_err(|e| GraphError::Parse {
                        line: lineno,
                        msg: e.to_string(),
                    })
            };
            let (i, j) = (next()?, next()?);
            if parts.next().is_some() {
                return Err(GraphError::Parse {
                    line: lineno,
                    msg: "trailing tokens".into(),
                });
            }
            g.add_edge(i, j)?;
        }
        graph.ok_or(GraphError::Parse {
            line: 0,
            msg: "missing `# nodes=<n>` header".into(),
        })
    }
}

fn detach(list: &mut Vec<usize>, target: usize) {
    if let Some(pos) = list.iter().position(|&x| x == target) {
        list.swap_remove(pos);
    }
}

/// BFS from `source` into a caller-owned buffer (must be pre-filled with
/// `usize::MAX`); returns the eccentricity of `source` in its component.
fn bfs_into(g: &Graph, source: usize, dist: &mut [usize], queue: &mut VecDeque<usize>) -> usize {
    queue.clear();
    dist[source] = 0;
    queue.push_back(source);
    let mut far = 0;
    while let Some(u) = queue.pop_front() {
        let du = dist[u];
        far = far.max(du);
        for &v in &g.adjacency[u] {
            if dist[v] == usize::MAX {
                dist[v] = du + 1;
                queue.push_back(v);
            }
        }
    }
    far
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComponentReport {
    /// Sizes in descending order; isolated nodes count as size-1 components.
    pub component_sizes: Vec<usize>,
    pub giant_size: usize,
    /// `giant_size / node_count`, and 0 for the empty graph.
    pub giant_fraction: f64,
    #[serde(skip)]
    pub giant_label: Option<usize>,
    #[serde(skip)]
    pub labels: Vec<usize>,
}

impl ComponentReport {
    pub fn component_count(&self) -> usize {
        self.component_sizes.len()
    }

    pub fn same_component(&self, i: usize, j: usize) -> bool {
        self.labels[i] == self.labels[j]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Diameter {
    Finite {
        hops: usize,
        /// Set when the graph is disconnected and the value is the giant
        /// component's diameter.
        giant_component_only: bool,
    },
    Infinite,
}

impl Diameter {
    pub fn hops(&self) -> Option<usize> {
        match self {
            Diameter::Finite { hops, .. } => Some(*hops),
            Diameter::Infinite => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_edge_degrees() {
        let mut g = Graph::new(3);
        assert!(g.add_edge(0, 1).unwrap());
        assert_eq!(g.degree_sequence(), vec![1, 1, 0]);
    }

    #[test]
    fn add_is_idempotent() {
        let mut g = Graph::new(3);
        assert!(g.add_edge(0, 1).unwrap());
        assert!(!g.add_edge(1, 0).unwrap());
        assert_eq!(g.edge_count(), 1);
    }

    #[test]
    fn self_loop_and_range_rejected() {
        let mut g = Graph::new(3);
        assert!(matches!(g.add_edge(0, 0), Err(GraphError::SelfLoop(0))));
        assert!(matches!(
            g.add_edge(0, 3),
            Err(GraphError::OutOfRange { .. })
        ));
        assert!(matches!(
            g.remove_edge(5, 0),
            Err(GraphError::OutOfRange { .. })
        ));
    }

    #[test]
    fn remove_and_restore() {
        let original = Graph::path(3);
        let mut g = original.clone();
        assert!(g.remove_edge(0, 1).unwrap());
        assert_eq!(g.edge_count(), 1);
        assert!(!g.remove_edge(0, 2).unwrap());
        assert_eq!(g.edge_count(), 1);
        g.add_edge(0, 1).unwrap();
        assert_eq!(g, original);
        g.check_invariants().unwrap();
    }

    #[test]
    fn components_examples() {
        let r = Graph::path(3).connected_components();
        assert_eq!(r.component_sizes, vec![3]);
        assert_eq!(r.giant_fraction, 1.0);

        let r = Graph::new(5).connected_components();
        assert_eq!(r.component_sizes, vec![1; 5]);
        assert!((r.giant_fraction - 0.2).abs() < 1e-15);

        let g = Graph::from_edges(6, [(0, 1), (1, 2), (2, 0), (3, 4), (4, 5), (5, 3)]).unwrap();
        let r = g.connected_components();
        assert_eq!(r.component_sizes, vec![3, 3]);
        assert_eq!(r.giant_fraction, 0.5);
        assert!(r.same_component(0, 2) && !r.same_component(0, 3));

        let r = Graph::new(0).connected_components();
        assert_eq!(r.giant_fraction, 0.0);
    }

    #[test]
    fn diameter_examples() {
        assert_eq!(Graph::path(4).diameter().hops(), Some(3));
        assert_eq!(Graph::complete(5).diameter().hops(), Some(1));
        assert_eq!(Graph::star(10).diameter().hops(), Some(2));
        assert_eq!(Graph::new(4).diameter(), Diameter::Infinite);
        let g = Graph::from_edges(7, [(0, 1), (1, 2), (2, 3), (4, 5)]).unwrap();
        assert_eq!(
            g.diameter(),
            Diameter::Finite {
                hops: 3,
                giant_component_only: true
            }
        );
    }

    #[test]
    fn degree_sequence_examples() {
        assert_eq!(Graph::complete(3).degree_sequence(), vec![2, 2, 2]);
        assert_eq!(Graph::star(4).degree_sequence(), vec![4, 1, 1, 1, 1]);
        assert_eq!(Graph::new(3).degree_sequence(), vec![0, 0, 0]);
    }

    #[test]
    fn edge_list_roundtrip() {
        let g = Graph::from_edges(5, [(0, 4), (1, 2), (3, 1)]).unwrap();
        let mut buf = Vec::new();
        g.write_edge_list(&mut buf, &["seed=1".to_string()])
            .unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert_eq!(text, "# nodes=5\n# seed=1\n0 4\n1 2\n1 3\n");
        let back = Graph::read_edge_list(buf.as_slice()).unwrap();
        assert_eq!(back, g);
    }

    #[test]
    fn edge_list_errors() {
        assert!(Graph::read_edge_list("0 1\n".as_bytes()).is_err());
        assert!(Graph::read_edge_list("# nodes=2\n0 x\n".as_bytes()).is_err());
        assert!(Graph::read_edge_list("# nodes=2\n0 0\n".as_bytes()).is_err());
        assert!(Graph::read_edge_list("# nodes=2\n0 1 2\n".as_bytes()).is_err());
    }

    #[test]
    fn induced_subgraph_relabels() {
        let g = Graph::complete(4);
        let h = g.induced_subgraph(&[3, 1]);
        assert_eq!(h.node_count(), 2);
        assert!(h.has_edge(0, 1));
    }
}
