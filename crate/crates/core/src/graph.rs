//! Orbital graphs, connectivity-one structure, the tree-like graphs
//! `Gamma(Lambda, m)`, ends estimates and Cartesian products.

use std::collections::{BTreeSet, VecDeque};
use std::fmt::Write as _;

use serde::Serialize;

use crate::blocks::is_primitive;
use crate::error::{Error, Result};
use crate::group::PermGroup;

pub const DEFAULT_GRAPH_VERTEX_CAP: usize = 100_000;

/// A simple undirected graph with sorted adjacency lists.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    adj: Vec<Vec<usize>>,
}

/// A digraph without loops; arcs are distinct ordered pairs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Digraph {
    out: Vec<Vec<usize>>,
}

impl Graph {
    pub fn new(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut adj = vec![BTreeSet::new(); n];
        for &(a, b) in edges {
            if a >= n || b >= n {
                return Err(Error::PointOutOfRange { point: a.max(b), degree: n });
            }
            if a == b {
                return Err(Error::invalid(format!("loop at vertex {a}")));
            }
            adj[a].insert(b);
            adj[b].insert(a);
        }
        Ok(Graph {
            adj: adj.into_iter().map(|s| s.into_iter().collect()).collect(),
        })
    }

    pub fn complete(n: usize) -> Self {
        let edges: Vec<(usize, usize)> = (0..n).flat_map(|a| (a + 1..n).map(move |b| (a, b))).collect();
        Graph::new(n, &edges).unwrap()
    }

    pub fn path(n: usize) -> Self {
        let edges: Vec<(usize, usize)> = (1..n).map(|i| (i - 1, i)).collect();
        Graph::new(n, &edges).unwrap()
    }

    pub fn cycle(n: usize) -> Result<Self> {
        if n < 3 {
            return Err(Error::invalid("a cycle needs at least 3 vertices"));
        }
        let edges: Vec<(usize, usize)> = (0..n).map(|i| (i, (i + 1) % n)).collect();
        Graph::new(n, &edges)
    }

    pub fn len(&self) -> usize {
        self.adj.len()
    }

    pub fn is_empty(&self) -> bool {
        self.adj.is_empty()
    }

    pub fn neighbours(&self, v: usize) -> &[usize] {
        &self.adj[v]
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.adj[a].binary_search(&b).is_ok()
    }

    /// Edges `(a, b)` with `a < b`, sorted.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for (a, nb) in self.adj.iter().enumerate() {
            out.extend(nb.iter().filter(|&&b| a < b).map(|&b| (a, b)));
        }
        out
    }

    pub fn to_digraph(&self) -> Digraph {
        Digraph { out: self.adj.clone() }
    }

    /// Breadth-first distances from `source`, skipping `removed` vertices.
    pub fn distances(&self, source: usize, removed: Option<&[bool]>) -> Vec<usize> {
        let mut dist = vec![usize::MAX; self.len()];
        if removed.is_some_and(|r| r[source]) {
            return dist;
        }
        dist[source] = 0;
        let mut queue = VecDeque::from([source]);
        while let Some(v) = queue.pop_front() {
            for &w in &self.adj[v] {
                if dist[w] == usize::MAX && !removed.is_some_and(|r| r[w]) {
                    dist[w] = dist[v] + 1;
                    queue.push_back(w);
                }
            }
        }
        dist
    }

    pub fn is_connected(&self) -> bool {
        self.is_empty() || self.distances(0, None).iter().all(|&d| d != usize::MAX)
    }

    /// Induced subgraph on `vertices`, relabelled by position.
    pub fn induced(&self, vertices: &[usize]) -> Graph {
        let pos: std::collections::HashMap<usize, usize> = vertices.iter().enumerate().map(|(i, &v)| (v, i)).collect();
        let mut edges = Vec::new();
        for (i, &v) in vertices.iter().enumerate() {
            for w in &self.adj[v] {
                if let Some(&j) = pos.get(w) {
                    if i < j {
                        edges.push((i, j));
                    }
                }
            }
        }
        Graph::new(vertices.len(), &edges).unwrap()
    }
}

impl Digraph {
    pub fn new(n: usize, arcs: &[(usize, usize)]) -> Result<Self> {
        let mut out = vec![BTreeSet::new(); n];
        for &(a, b) in arcs {
            if a >= n || b >= n {
                return Err(Error::PointOutOfRange { point: a.max(b), degree: n });
            }
            if a == b {
                return Err(Error::invalid(format!("loop at vertex {a}")));
            }
            out[a].insert(b);
        }
        Ok(Digraph {
            out: out.into_iter().map(|s| s.into_iter().collect()).collect(),
        })
    }

    pub fn directed_cycle(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::invalid("a directed cycle needs at least 2 vertices"));
        }
        let arcs: Vec<(usize, usize)> = (0..n).map(|i| (i, (i + 1) % n)).collect();
        Digraph::new(n, &arcs)
    }

    pub fn len(&self) -> usize {
        self.out.len()
    }

    pub fn is_empty(&self) -> bool {
        self.out.is_empty()
    }

    pub fn has_arc(&self, a: usize, b: usize) -> bool {
        self.out[a].binary_search(&b).is_ok()
    }

    pub fn arcs(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for (a, nb) in self.out.iter().enumerate() {
            out.extend(nb.iter().map(|&b| (a, b)));
        }
        out
    }

    pub fn symmetrize(&self) -> Graph {
        Graph::new(self.len(), &self.arcs()).unwrap()
    }

    /// `true` when every arc's reverse is also an arc.
    pub fn is_symmetric(&self) -> bool {
        self.arcs().iter().all(|&(a, b)| self.has_arc(b, a))
    }

    /// `true` for a directed cycle on at least three vertices.
    pub fn is_directed_cycle(&self) -> bool {
        let n = self.len();
        if n < 3 || self.out.iter().any(|o| o.len() != 1) {
            return false;
        }
        let mut indeg = vec![0; n];
        for (_, b) in self.arcs() {
            indeg[b] += 1;
        }
        if indeg.iter().any(|&d| d != 1) {
            return false;
        }
        let mut v = 0;
        for step in 1..=n {
            v = self.out[v][0];
            if v == 0 {
                return step == n;
            }
        }
        false
    }

    pub fn induced(&self, vertices: &[usize]) -> Digraph {
        let pos: std::collections::HashMap<usize, usize> = vertices.iter().enumerate().map(|(i, &v)| (v, i)).collect();
        let mut arcs = Vec::new();
        for (i, &v) in vertices.iter().enumerate() {
            for w in &self.out[v] {
                if let Some(&j) = pos.get(w) {
                    arcs.push((i, j));
                }
            }
        }
        Digraph::new(vertices.len(), &arcs).unwrap()
    }
}

/// The digraph `(Omega, (alpha, beta)^G)`.
pub fn orbital_digraph(g: &PermGroup, alpha: usize, beta: usize) -> Result<Digraph> {
    let n = g.degree();
    if alpha == beta {
        return Err(Error::invalid("orbital digraphs need two distinct points"));
    }
    if alpha >= n || beta >= n {
        return Err(Error::PointOutOfRange { point: alpha.max(beta), degree: n });
    }
    if !g.is_transitive() {
        return Err(Error::NotTransitive);
    }
    Digraph::new(n, &crate::blocks::pair_orbit(g, (alpha, beta)))
}

/// Orbital digraph for the smallest nontrivial suborbit at 0, ties broken by
/// least point.
pub fn minimal_orbital_digraph(g: &PermGroup) -> Result<Digraph> {
    let rep = g.suborbits(0)?;
    let sd = rep.sd()?;
    let beta = rep
        .suborbits
        .iter()
        .find(|s| s.size == sd && !s.points.contains(&0))
        .map(|s| s.points[0])
        .expect("sd is attained");
    orbital_digraph(g, 0, beta)
}

pub fn minimal_orbital_graph(g: &PermGroup) -> Result<Graph> {
    Ok(minimal_orbital_digraph(g)?.symmetrize())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Connectivity {
    #[serde(rename = "0")]
    Zero,
    #[serde(rename = "1")]
    One,
    #[serde(rename = ">=2")]
    AtLeastTwo,
}

/// 0 when disconnected or a single vertex, 1 when there is a cut vertex (or
/// the graph is `K2`), at least 2 otherwise.
pub fn connectivity_small(g: &Graph) -> Connectivity {
    if g.len() <= 1 || !g.is_connected() {
        return Connectivity::Zero;
    }
    if g.len() == 2 || !articulation_points(g).is_empty() {
        return Connectivity::One;
    }
    Connectivity::AtLeastTwo
}

fn articulation_points(g: &Graph) -> Vec<usize> {
    biconnected(g).1
}

/// Biconnected components (as sorted vertex sets) and articulation points,
/// by an iterative Hopcroft-Tarjan search.
fn biconnected(g: &Graph) -> (Vec<Vec<usize>>, Vec<usize>) {
    let n = g.len();
    let mut disc = vec![usize::MAX; n];
    let mut low = vec![0usize; n];
    let mut is_cut = vec![false; n];
    let mut comps: Vec<Vec<usize>> = Vec::new();
    let mut edge_stack: Vec<(usize, usize)> = Vec::new();
    let mut time = 0;
    for root in 0..n {
        if disc[root] != usize::MAX {
            continue;
        }
        disc[root] = time;
        low[root] = time;
        time += 1;
        let mut root_children = 0;
        // (vertex, parent, next neighbour index)
        let mut stack: Vec<(usize, usize, usize)> = vec![(root, usize::MAX, 0)];
        while let Some(&mut (v, parent, ref mut i)) = stack.last_mut() {
            if *i < g.adj[v].len() {
                let w = g.adj[v][*i];
                *i += 1;
                if disc[w] == usize::MAX {
                    edge_stack.push((v, w));
                    disc[w] = time;
                    low[w] = time;
                    time += 1;
                    if v == root {
                        root_children += 1;
                    }
                    stack.push((w, v, 0));
                } else if w != parent && disc[w] < disc[v] {
                    edge_stack.push((v, w));
                    low[v] = low[v].min(disc[w]);
                }
            } else {
                stack.pop();
                if let Some(&(p, _, _)) = stack.last() {
                    low[p] = low[p].min(low[v]);
                    if low[v] >= disc[p] {
                        if p != root {
                            is_cut[p] = true;
                        }
                        let mut comp = BTreeSet::new();
                        while let Some((a, b)) = edge_stack.pop() {
                            comp.insert(a);
                            comp.insert(b);
                            if (a, b) == (p, v) {
                                break;
                            }
                        }
                        comps.push(comp.into_iter().collect());
                    }
                }
            }
        }
        if root_children > 1 {
            is_cut[root] = true;
        }
    }
    comps.sort();
    let cuts = (0..n).filter(|&v| is_cut[v]).collect();
    (comps, cuts)
}

/// Lobes, cut vertices, and the block-cut-vertex tree. BCV nodes `0..n` are
/// the original vertices and `n + j` is lobe `j`.
#[derive(Debug, Clone, Serialize)]
pub struct ConnOneDecomposition {
    pub vertex_count: usize,
    pub lobes: Vec<Vec<usize>>,
    pub cut_vertices: Vec<usize>,
    #[serde(skip)]
    pub bcv_tree: Graph,
}

impl ConnOneDecomposition {
    pub fn lobe_node(&self, j: usize) -> usize {
        self.vertex_count + j
    }
}

pub fn lobes_and_bcv_tree(g: &Graph) -> Result<ConnOneDecomposition> {
    if !g.is_connected() {
        return Err(Error::invalid("lobe decomposition needs a connected graph"));
    }
    let n = g.len();
    let (lobes, cut_vertices) = biconnected(g);
    let mut edges = Vec::new();
    for (j, lobe) in lobes.iter().enumerate() {
        for &v in lobe {
            edges.push((v, n + j));
        }
    }
    let bcv_tree = Graph::new(n + lobes.len(), &edges)?;
    Ok(ConnOneDecomposition {
        vertex_count: n,
        lobes,
        cut_vertices,
        bcv_tree,
    })
}

/// One copy of `Lambda` inside `Gamma(Lambda, m)`: `vertices[i]` is the image
/// of vertex `i` of `Lambda`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LobeRecord {
    pub vertices: Vec<usize>,
    pub generation: usize,
}

/// A truncation of `Gamma(Lambda, m)` with its lobe registry.
#[derive(Debug, Clone)]
pub struct GammaGraph {
    pub lambda: Digraph,
    pub m: usize,
    pub generations: usize,
    pub digraph: Digraph,
    pub graph: Graph,
    pub lobes: Vec<LobeRecord>,
    /// Lobe ids containing each vertex.
    pub lobes_of: Vec<Vec<usize>>,
    /// A vertex is complete when it lies in all `m` of its lobes.
    pub complete: Vec<bool>,
    /// `true` when `m = 1` and the result is just `Lambda`.
    pub degenerate: bool,
}

impl GammaGraph {
    /// Lobes whose vertices are all complete.
    pub fn interior_lobes(&self) -> Vec<usize> {
        (0..self.lobes.len())
            .filter(|&j| self.lobes[j].vertices.iter().all(|&v| self.complete[v]))
            .collect()
    }

    pub fn interior_points(&self) -> Vec<usize> {
        (0..self.graph.len()).filter(|&v| self.complete[v]).collect()
    }
}

/// `Gamma(Lambda, m)` grown for `generations` layers of lobes around vertex 0:
/// the first layer is the `m` lobes through 0, and every vertex created in a
/// layer below the last receives its remaining `m - 1` lobes in the next one.
pub fn gamma_graph(lambda: &Graph, m: usize, generations: usize) -> Result<GammaGraph> {
    gamma_digraph(&lambda.to_digraph(), m, generations)
}

pub fn gamma_digraph(lambda: &Digraph, m: usize, generations: usize) -> Result<GammaGraph> {
    gamma_digraph_with_cap(lambda, m, generations, DEFAULT_GRAPH_VERTEX_CAP)
}

pub fn gamma_digraph_with_cap(lambda: &Digraph, m: usize, generations: usize, cap: usize) -> Result<GammaGraph> {
    let k = lambda.len();
    if k < 3 {
        return Err(Error::hypothesis("lobes need at least three vertices"));
    }
    if connectivity_small(&lambda.symmetrize()) != Connectivity::AtLeastTwo {
        return Err(Error::hypothesis("the lobe graph must be 2-connected"));
    }
    if m == 0 || generations == 0 {
        return Err(Error::invalid("m and the number of generations must be positive"));
    }
    if m == 1 {
        return Ok(GammaGraph {
            lambda: lambda.clone(),
            m,
            generations,
            digraph: lambda.clone(),
            graph: lambda.symmetrize(),
            lobes: vec![LobeRecord {
                vertices: (0..k).collect(),
                generation: 1,
            }],
            lobes_of: vec![vec![0]; k],
            complete: vec![true; k],
            degenerate: true,
        });
    }
    let mut lobes: Vec<LobeRecord> = Vec::new();
    let mut lobes_of: Vec<Vec<usize>> = vec![Vec::new()];
    let mut frontier = vec![0usize];
    let mut count = 1usize;
    for gen in 1..=generations {
        let mut next = Vec::new();
        for &v in &frontier {
            while lobes_of[v].len() < m {
                count += k - 1;
                if count > cap {
                    return Err(Error::cap("Gamma vertex count", cap as u128, count as u128));
                }
                // v plays the role of vertex 0 of Lambda in the new copy
                let mut verts = vec![v];
                for _ in 1..k {
                    let w = lobes_of.len();
                    lobes_of.push(Vec::new());
                    verts.push(w);
                    next.push(w);
                }
                let j = lobes.len();
                for &w in &verts {
                    lobes_of[w].push(j);
                }
                lobes.push(LobeRecord {
                    vertices: verts,
                    generation: gen,
                });
            }
        }
        frontier = next;
    }
    let n = lobes_of.len();
    let mut arcs = Vec::new();
    for lobe in &lobes {
        for (a, b) in lambda.arcs() {
            arcs.push((lobe.vertices[a], lobe.vertices[b]));
        }
    }
    let digraph = Digraph::new(n, &arcs)?;
    let graph = digraph.symmetrize();
    let complete = lobes_of.iter().map(|l| l.len() == m).collect();
    Ok(GammaGraph {
        lambda: lambda.clone(),
        m,
        generations,
        digraph,
        graph,
        lobes,
        lobes_of,
        complete,
        degenerate: false,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Ends {
    Zero,
    One,
    Two,
    Many,
    Unknown,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EndsVerdict {
    pub verdict: Ends,
    pub base: usize,
    pub horizon: usize,
    /// `(k, c)`: after deleting the ball of radius `k`, `c` components reach the horizon.
    pub probes: Vec<(usize, usize)>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct EndsParams {
    /// Largest deleted-ball radius; defaults to `max(horizon / 2, 2)`,
    /// capped at `horizon - 1`.
    pub probe: Option<usize>,
    /// Distance a component must reach to count; defaults to
    /// `max(eccentricity(base), 2)`.
    pub horizon: Option<usize>,
    /// Base vertex; defaults to a centre (least eccentricity, then least index).
    pub base: Option<usize>,
}

const CENTRE_SEARCH_CAP: usize = 20_000;

/// Estimates the number of ends of the infinite graph that `g` truncates by
/// deleting balls of growing radius around a base vertex and counting the
/// components that still reach the horizon.
pub fn ends_estimate(g: &Graph, params: EndsParams) -> Result<EndsVerdict> {
    if g.is_empty() {
        return Err(Error::invalid("empty graph"));
    }
    let base = match params.base {
        Some(b) if b >= g.len() => return Err(Error::PointOutOfRange { point: b, degree: g.len() }),
        Some(b) => b,
        None if g.len() <= CENTRE_SEARCH_CAP => centre(g),
        None => 0,
    };
    let dist = g.distances(base, None);
    let ecc = dist.iter().copied().filter(|&d| d != usize::MAX).max().unwrap_or(0);
    let horizon = params.horizon.unwrap_or(ecc.max(2));
    // deleted balls past half the horizon start to see the truncation
    // boundary instead of the ends
    let probe = params.probe.unwrap_or((horizon / 2).max(2).min(horizon - 1));
    if probe >= horizon {
        return Err(Error::invalid(format!("horizon {horizon} must exceed probe radius {probe}")));
    }
    if !dist.iter().any(|&d| d != usize::MAX && d >= horizon) {
        return Ok(EndsVerdict {
            verdict: Ends::Zero,
            base,
            horizon,
            probes: Vec::new(),
        });
    }
    let radii: Vec<usize> = (1..=probe).collect();
    let counts = crate::par::map(&radii, |&k| {
        let removed: Vec<bool> = dist.iter().map(|&d| d <= k).collect();
        (k, horizon_components(g, &dist, &removed, horizon))
    });
    let verdict = match counts.as_slice() {
        [.., (_, a), (_, b)] if a == b && *b <= 2 => match b {
            0 => Ends::Zero,
            1 => Ends::One,
            _ => Ends::Two,
        },
        [.., (_, a), (_, b)] if *a >= 3 && b > a => Ends::Many,
        _ => Ends::Unknown,
    };
    Ok(EndsVerdict {
        verdict,
        base,
        horizon,
        probes: counts,
    })
}

fn centre(g: &Graph) -> usize {
    let ecc = crate::par::map_range(g.len(), |v| {
        g.distances(v, None).into_iter().filter(|&d| d != usize::MAX).max().unwrap_or(0)
    });
    (0..g.len()).min_by_key(|&v| (ecc[v], v)).unwrap()
}

fn horizon_components(g: &Graph, dist: &[usize], removed: &[bool], horizon: usize) -> usize {
    let mut comp = vec![usize::MAX; g.len()];
    let mut count = 0;
    for s in 0..g.len() {
        if removed[s] || comp[s] != usize::MAX || dist[s] == usize::MAX {
            continue;
        }
        let id = s;
        comp[s] = id;
        let mut reaches = false;
        let mut stack = vec![s];
        while let Some(v) = stack.pop() {
            reaches |= dist[v] >= horizon;
            for &w in g.neighbours(v) {
                if !removed[w] && comp[w] == usize::MAX {
                    comp[w] = id;
                    stack.push(w);
                }
            }
        }
        count += usize::from(reaches);
    }
    count
}

/// `A [] B` on vertices `a * |B| + b`.
pub fn cartesian_graph_product(a: &Graph, b: &Graph, cap: usize) -> Result<Graph> {
    let n = a.len().checked_mul(b.len()).filter(|&n| n <= cap);
    let n = n.ok_or_else(|| Error::cap("product vertex count", cap as u128, (a.len() as u128) * (b.len() as u128)))?;
    let nb = b.len();
    let mut edges = Vec::new();
    for (x, y) in a.edges() {
        for j in 0..nb {
            edges.push((x * nb + j, y * nb + j));
        }
    }
    for i in 0..a.len() {
        for (x, y) in b.edges() {
            edges.push((i * nb + x, i * nb + y));
        }
    }
    Graph::new(n, &edges)
}

/// Outcome of the connectivity-one primitivity criterion with the first
/// failing clause named.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ConnOneVerdict {
    pub primitive: bool,
    pub lobes_isomorphic: bool,
    pub at_least_three_vertices: bool,
    pub lobe_groups_primitive: bool,
    pub no_directed_cycle_lobes: bool,
    pub failing_clause: Option<String>,
}

/// Checks a connectivity-one (di)graph with a lobe registry against the
/// criterion: lobes pairwise isomorphic, with at least three vertices, lobe
/// groups primitive, and (for digraphs) no lobe a directed cycle. The groups
/// act on lobe vertices in registry order; one group applies to every lobe.
pub fn conn_one_primitivity_check(gamma: &GammaGraph, lobe_groups: &[PermGroup]) -> Result<ConnOneVerdict> {
    if gamma.lobes.is_empty() {
        return Err(Error::invalid("lobe registry is missing"));
    }
    if lobe_groups.is_empty() || (lobe_groups.len() != 1 && lobe_groups.len() != gamma.lobes.len()) {
        return Err(Error::invalid("need one lobe group, or one per lobe"));
    }
    let k = gamma.lambda.len();
    let lobes_isomorphic = gamma.lobes.iter().all(|l| {
        l.vertices.len() == k && {
            let induced = gamma.digraph.induced(&l.vertices);
            induced == gamma.lambda
        }
    });
    let at_least_three_vertices = gamma.lobes.iter().all(|l| l.vertices.len() >= 3);
    let lobe_groups_primitive = lobe_groups
        .iter()
        .all(|h| h.degree() == k && h.is_transitive() && is_primitive(h).unwrap_or(false));
    let directed = !gamma.digraph.is_symmetric();
    let no_directed_cycle_lobes = !directed || !gamma.lobes.iter().any(|l| gamma.digraph.induced(&l.vertices).is_directed_cycle());
    let failing_clause = [
        (lobes_isomorphic, "lobes pairwise isomorphic"),
        (at_least_three_vertices, "at least three vertices"),
        (lobe_groups_primitive, "lobe groups primitive"),
        (no_directed_cycle_lobes, "directed cycle"),
    ]
    .iter()
    .find(|(ok, _)| !ok)
    .map(|(_, name)| name.to_string());
    Ok(ConnOneVerdict {
        primitive: failing_clause.is_none(),
        lobes_isomorphic,
        at_least_three_vertices,
        lobe_groups_primitive,
        no_directed_cycle_lobes,
        failing_clause,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct OrbitalCartesianReport {
    pub equal: bool,
    pub sigma_edges: usize,
    pub product_edges: usize,
}

/// Compares the orbital graph of `{(gamma,..,gamma), (delta,gamma,..,gamma)}`
/// under `embedded` (acting on `Y^m`, row-major) with the `m`-fold Cartesian
/// power of the orbital graph of `{gamma, delta}` under `h`.
pub fn orbital_cartesian_check(
    h: &PermGroup,
    gamma: usize,
    delta: usize,
    embedded: &PermGroup,
    m: usize,
) -> Result<OrbitalCartesianReport> {
    let k = h.degree();
    if crate::products::pwr_degree(k, m) != Some(embedded.degree()) {
        return Err(Error::DegreeMismatch {
            expected: k.pow(m as u32),
            found: embedded.degree(),
        });
    }
    let base = orbital_digraph(h, gamma, delta)?.symmetrize();
    let mut power = base.clone();
    for _ in 1..m {
        power = cartesian_graph_product(&power, &base, DEFAULT_GRAPH_VERTEX_CAP)?;
    }
    let g_tuple = crate::products::encode(&vec![gamma; m], k);
    let mut d = vec![gamma; m];
    d[0] = delta;
    let d_tuple = crate::products::encode(&d, k);
    let sigma = orbital_digraph(embedded, g_tuple, d_tuple)?.symmetrize();
    Ok(OrbitalCartesianReport {
        equal: sigma == power,
        sigma_edges: sigma.edges().len(),
        product_edges: power.edges().len(),
    })
}

/// DOT text for a graph with vertices named `p<i>`.
pub fn graph_to_dot(g: &Graph, name: &str) -> String {
    let mut s = format!("graph {name} {{\n");
    for v in 0..g.len() {
        let _ = writeln!(s, "  p{v};");
    }
    for (a, b) in g.edges() {
        let _ = writeln!(s, "  p{a} -- p{b};");
    }
    s.push_str("}\n");
    s
}

pub fn digraph_to_dot(g: &Digraph, name: &str) -> String {
    let mut s = format!("digraph {name} {{\n");
    for v in 0..g.len() {
        let _ = writeln!(s, "  p{v};");
    }
    for (a, b) in g.arcs() {
        let _ = writeln!(s, "  p{a} -> p{b};");
    }
    s.push_str("}\n");
    s
}

/// DOT text for a block-cut-vertex tree: points `p<i>`, lobes `L<j>` (boxes).
pub fn bcv_to_dot(d: &ConnOneDecomposition, name: &str) -> String {
    let mut s = format!("graph {name} {{\n");
    for v in 0..d.vertex_count {
        let _ = writeln!(s, "  p{v} [shape=point];");
    }
    for j in 0..d.lobes.len() {
        let _ = writeln!(s, "  L{j} [shape=box];");
    }
    for (j, lobe) in d.lobes.iter().enumerate() {
        for &v in lobe {
            let _ = writeln!(s, "  L{j} -- p{v};");
        }
    }
    s.push_str("}\n");
    s
}
