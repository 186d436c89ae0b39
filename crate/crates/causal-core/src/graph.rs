//! Directed acyclic graphs and the graph-theoretic primitives used by the
//! rest of the crate: topological order, d-separation, skeletons and
//! v-structures, Markov equivalence classes, and Erdős–Rényi random DAGs.

use crate::prelude::*;
use crate::rng::Rng;
use crate::{CoreError, Result};

/// A sorted set of node indices.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct NodeSet(Vec<usize>);

impl NodeSet {
    pub fn new(mut ids: Vec<usize>) -> Self {
        ids.sort_unstable();
        ids.dedup();
        NodeSet(ids)
    }

    pub fn empty() -> Self {
        NodeSet(Vec::new())
    }

    pub fn contains(&self, v: usize) -> bool {
        self.0.binary_search(&v).is_ok()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().copied()
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn is_disjoint(&self, other: &NodeSet) -> bool {
        self.iter().all(|v| !other.contains(v))
    }
}

impl FromIterator<usize> for NodeSet {
    fn from_iter<I: IntoIterator<Item = usize>>(iter: I) -> Self {
        NodeSet::new(iter.into_iter().collect())
    }
}

/// A directed acyclic graph over labeled nodes.
///
/// Immutable after construction; every operation here is a pure function.
#[derive(Debug, Clone, PartialEq)]
pub struct Dag {
    labels: Vec<String>,
    parents: Vec<Vec<usize>>,
    children: Vec<Vec<usize>>,
}

impl Dag {
    /// Builds a DAG from labels and directed edges `(parent, child)`.
    ///
    /// Rejects self-loops, duplicate edges, out-of-range indices and cycles.
    pub fn new(labels: Vec<String>, edges: &[(usize, usize)]) -> Result<Self> {
        let d = labels.len();
        if d == 0 {
            return Err(CoreError::Graph("graph needs at least one node".into()));
        }
        let mut parents = vec![Vec::new(); d];
        let mut children = vec![Vec::new(); d];
        for &(p, c) in edges {
            if p >= d || c >= d {
                return Err(CoreError::Graph(format!(
                    "edge ({p}, {c}) out of range for {d} nodes"
                )));
            }
            if p == c {
                return Err(CoreError::Graph(format!("self-loop on node {p}")));
            }
            if children[p].contains(&c) {
                return Err(CoreError::Graph(format!("duplicate edge ({p}, {c})")));
            }
            parents[c].push(p);
            children[p].push(c);
        }
        for list in parents.iter_mut().chain(children.iter_mut()) {
            list.sort_unstable();
        }
        let dag = Dag {
            labels,
            parents,
            children,
        };
        if dag.try_topological_order().is_none() {
            return Err(CoreError::Graph("graph contains a directed cycle".into()));
        }
        Ok(dag)
    }

    /// Convenience constructor with labels `X0, X1, ...`.
    pub fn with_index_labels(d: usize, edges: &[(usize, usize)]) -> Result<Self> {
        Dag::new((0..d).map(|i| format!("X{i}")).collect(), edges)
    }

    pub fn node_count(&self) -> usize {
        self.labels.len()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, v: usize) -> &str {
        &self.labels[v]
    }

    pub fn parents(&self, v: usize) -> &[usize] {
        &self.parents[v]
    }

    pub fn children(&self, v: usize) -> &[usize] {
        &self.children[v]
    }

    pub fn has_edge(&self, p: usize, c: usize) -> bool {
        self.children[p].binary_search(&c).is_ok()
    }

    pub fn edge_count(&self) -> usize {
        self.children.iter().map(Vec::len).sum()
    }

    /// All edges as `(parent, child)`, sorted.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::with_capacity(self.edge_count());
        for p in 0..self.node_count() {
            for &c in &self.children[p] {
                out.push((p, c));
            }
        }
        out
    }

    fn try_topological_order(&self) -> Option<Vec<usize>> {
        let d = self.node_count();
        let mut indeg: Vec<usize> = (0..d).map(|v| self.parents[v].len()).collect();
        let mut ready: Vec<usize> = (0..d).filter(|&v| indeg[v] == 0).collect();
        // smallest index first keeps the order deterministic and makes the
        // edgeless graph come out in index order
        ready.sort_unstable_by(|a, b| b.cmp(a));
        let mut order = Vec::with_capacity(d);
        while let Some(v) = ready.pop() {
            order.push(v);
            let mut added = false;
            for &c in &self.children[v] {
                indeg[c] -= 1;
                if indeg[c] == 0 {
                    ready.push(c);
                    added = true;
                }
            }
            if added {
                ready.sort_unstable_by(|a, b| b.cmp(a));
            }
        }
        (order.len() == d).then_some(order)
    }
}

/// Topological order; every parent precedes its children.
pub fn topological_order(g: &Dag) -> Vec<usize> {
    g.try_topological_order()
        .expect("Dag invariant guarantees a topological order")
}

/// All strict ancestors of `v` (excludes `v` itself).
pub fn ancestors(g: &Dag, v: usize) -> NodeSet {
    let mut seen = vec![false; g.node_count()];
    let mut stack: Vec<usize> = g.parents(v).to_owned();
    let mut out = Vec::new();
    while let Some(u) = stack.pop() {
        if seen[u] {
            continue;
        }
        seen[u] = true;
        out.push(u);
        stack.extend_from_slice(g.parents(u));
    }
    NodeSet::new(out)
}

/// All strict descendants of `v` (excludes `v` itself).
pub fn descendants(g: &Dag, v: usize) -> NodeSet {
    let mut seen = vec![false; g.node_count()];
    let mut stack: Vec<usize> = g.children(v).to_owned();
    let mut out = Vec::new();
    while let Some(u) = stack.pop() {
        if seen[u] {
            continue;
        }
        seen[u] = true;
        out.push(u);
        stack.extend_from_slice(g.children(u));
    }
    NodeSet::new(out)
}

/// d-separation of `x` and `y` given `z`, by backward reachability over
/// `(node, entry direction)` states.
pub fn d_separated(g: &Dag, x: &NodeSet, y: &NodeSet, z: &NodeSet) -> Result<bool> {
    if !x.is_disjoint(y) || !x.is_disjoint(z) || !y.is_disjoint(z) {
        return Err(CoreError::Graph(
            "d-separation requires pairwise disjoint node sets".into(),
        ));
    }
    let d = g.node_count();
    for v in x.iter().chain(y.iter()).chain(z.iter()) {
        if v >= d {
            return Err(CoreError::Graph(format!("node {v} out of range")));
        }
    }
    // nodes that are in z or have a descendant in z (colliders open there)
    let mut anc_z = vec![false; d];
    let mut stack: Vec<usize> = z.iter().collect();
    while let Some(v) = stack.pop() {
        if anc_z[v] {
            continue;
        }
        anc_z[v] = true;
        stack.extend_from_slice(g.parents(v));
    }
    let in_z: Vec<bool> = (0..d).map(|v| z.contains(v)).collect();
    let in_y: Vec<bool> = (0..d).map(|v| y.contains(v)).collect();

    // state (v, entered_from_child)
    let mut visited = vec![[false; 2]; d];
    let mut queue: Vec<(usize, bool)> = x.iter().map(|v| (v, true)).collect();
    while let Some((v, from_child)) = queue.pop() {
        let dir = usize::from(from_child);
        if visited[v][dir] {
            continue;
        }
        visited[v][dir] = true;
        if from_child {
            // trail arrives against the edge direction; blocked iff v in z
            if in_z[v] {
                continue;
            }
            if in_y[v] {
                return Ok(false);
            }
            for &p in g.parents(v) {
                queue.push((p, true));
            }
            for &c in g.children(v) {
                queue.push((c, false));
            }
        } else {
            // trail arrives along the edge direction
            if !in_z[v] {
                if in_y[v] {
                    return Ok(false);
                }
                for &c in g.children(v) {
                    queue.push((c, false));
                }
            }
            if anc_z[v] {
                // collider at v is opened by z
                for &p in g.parents(v) {
                    queue.push((p, true));
                }
            }
        }
    }
    Ok(true)
}

/// Undirected skeleton and collider triples `(a, c, b)` with `a -> c <- b`
/// and `a`, `b` non-adjacent. Triples are stored with `a < b`.
pub fn skeleton_and_vstructures(g: &Dag) -> (Vec<(usize, usize)>, Vec<(usize, usize, usize)>) {
    let mut skel: Vec<(usize, usize)> = g
        .edges()
        .into_iter()
        .map(|(p, c)| if p < c { (p, c) } else { (c, p) })
        .collect();
    skel.sort_unstable();
    skel.dedup();
    let mut vs = Vec::new();
    for c in 0..g.node_count() {
        let ps = g.parents(c);
        for (ia, &a) in ps.iter().enumerate() {
            for &b in &ps[ia + 1..] {
                if !g.has_edge(a, b) && !g.has_edge(b, a) {
                    vs.push((a, c, b));
                }
            }
        }
    }
    vs.sort_unstable();
    (skel, vs)
}

/// Every DAG with the same skeleton and v-structures as `g`, found by
/// enumerating orientations of the skeleton. `g` itself is always a member.
pub fn markov_equivalence_class(g: &Dag, node_cap: usize) -> Result<Vec<Dag>> {
    if g.node_count() > node_cap {
        return Err(CoreError::CapExceeded(format!(
            "markov equivalence enumeration capped at {node_cap} nodes, got {}",
            g.node_count()
        )));
    }
    let (skel, vs) = skeleton_and_vstructures(g);
    let mut members = Vec::new();
    let mut chosen: Vec<(usize, usize)> = Vec::with_capacity(skel.len());
    orient_rec(g, &skel, &vs, 0, &mut chosen, &mut members);
    members.sort_by_key(|m| m.edges());
    Ok(members)
}

fn orient_rec(
    g: &Dag,
    skel: &[(usize, usize)],
    vs: &[(usize, usize, usize)],
    idx: usize,
    chosen: &mut Vec<(usize, usize)>,
    out: &mut Vec<Dag>,
) {
    if idx == skel.len() {
        if let Ok(candidate) = Dag::new(g.labels().to_owned(), chosen) {
            let (_, cvs) = skeleton_and_vstructures(&candidate);
            if cvs == vs {
                out.push(candidate);
            }
        }
        return;
    }
    let (a, b) = skel[idx];
    for edge in [(a, b), (b, a)] {
        chosen.push(edge);
        if !has_cycle_partial(g.node_count(), chosen) {
            orient_rec(g, skel, vs, idx + 1, chosen, out);
        }
        chosen.pop();
    }
}

fn has_cycle_partial(d: usize, edges: &[(usize, usize)]) -> bool {
    let mut adj = vec![Vec::new(); d];
    for &(p, c) in edges {
        adj[p].push(c);
    }
    // 0 = unvisited, 1 = on stack, 2 = done
    let mut state = vec![0u8; d];
    fn dfs(v: usize, adj: &[Vec<usize>], state: &mut [u8]) -> bool {
        state[v] = 1;
        for &c in &adj[v] {
            if state[c] == 1 || (state[c] == 0 && dfs(c, adj, state)) {
                return true;
            }
        }
        state[v] = 2;
        false
    }
    (0..d).any(|v| state[v] == 0 && dfs(v, &adj, &mut state))
}

/// Erdős–Rényi random DAG: each unordered pair is included with probability
/// `min(1, expected_degree / (d - 1))` and oriented along a uniform random
/// permutation, which makes the result acyclic by construction.
pub fn random_dag(d: usize, expected_degree: f64, seed: u64) -> Dag {
    assert!(d >= 1, "random_dag needs at least one node");
    assert!(expected_degree >= 0.0);
    let mut rng = Rng::new(seed);
    let perm = rng.permutation(d);
    let mut rank = vec![0usize; d];
    for (pos, &v) in perm.iter().enumerate() {
        rank[v] = pos;
    }
    let p = if d == 1 {
        0.0
    } else {
        (expected_degree / (d - 1) as f64).min(1.0)
    };
    let mut edges = Vec::new();
    for a in 0..d {
        for b in (a + 1)..d {
            if rng.uniform() < p {
                if rank[a] < rank[b] {
                    edges.push((a, b));
                } else {
                    edges.push((b, a));
                }
            }
        }
    }
    Dag::with_index_labels(d, &edges).expect("permutation orientation cannot create cycles")
}
