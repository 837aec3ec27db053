//! Discretized metric-measure domains as finite weighted graphs.
//!
//! A `DomainGraph` carries a positive vertex measure `m`, undirected edges
//! with lengths and conductances, nominal curvature/dimension metadata
//! `(K, N)` and the mesh scale `h` (the largest edge length). The graph
//! metric is the shortest-path distance over edge lengths. Conductances are
//! calibrated per generator so that the weighted Laplacian
//! `Δf(x) = m(x)^{-1} Σ_y w_xy (f(y) - f(x))` is consistent with the
//! continuum operator of the model space:
//!
//! * path of spacing h:  m = h,  w = 1/h   →  Δf ≈ f''
//! * torus grid of spacing h:  m = h², w = 1  →  five-point stencil / h²
//! * hyperbolic disk mesh: m = one third of incident triangle area,
//!   w = intrinsic cotangent weights.
//!
//! `curvature_k` and `dimension_n` are declared metadata: a finite graph only
//! approximates an RCD condition, and every check that depends on them is a
//! trend diagnostic.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::sync::{Arc, RwLock};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DIST_CACHE_LIMIT: usize = 4096;
const HYPERBOLIC_VERTEX_LIMIT: usize = 1_000_000;

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
pub struct Edge {
    pub a: usize,
    pub b: usize,
    pub length: f64,
    pub conductance: f64,
}

/// Finite weighted graph standing in for a metric-measure space.
#[derive(Debug)]
pub struct DomainGraph {
    /// process-unique identity, used to key per-graph caches
    uid: u64,
    measure: Vec<f64>,
    edges: Vec<Edge>,
    /// adjacency[x] = (neighbor, edge length, conductance)
    adjacency: Vec<Vec<(usize, f64, f64)>>,
    curvature_k: f64,
    dimension_n: f64,
    mesh_scale: f64,
    /// Lazily memoized single-source distance rows (graphs up to
    /// `DIST_CACHE_LIMIT` vertices). Larger graphs recompute on demand.
    dist_rows: RwLock<Vec<Option<Arc<Vec<f64>>>>>,
}

fn next_uid() -> u64 {
    use std::sync::atomic::{AtomicU64, Ordering};
    static COUNTER: AtomicU64 = AtomicU64::new(1);
    COUNTER.fetch_add(1, Ordering::Relaxed)
}

impl Clone for DomainGraph {
    fn clone(&self) -> Self {
        DomainGraph {
            uid: next_uid(),
            measure: self.measure.clone(),
            edges: self.edges.clone(),
            adjacency: self.adjacency.clone(),
            curvature_k: self.curvature_k,
            dimension_n: self.dimension_n,
            mesh_scale: self.mesh_scale,
            dist_rows: RwLock::new(vec![None; self.measure.len()]),
        }
    }
}

impl DomainGraph {
    pub fn new(
        measure: Vec<f64>,
        edges: Vec<Edge>,
        curvature_k: f64,
        dimension_n: f64,
    ) -> Result<Self> {
        let n = measure.len();
        if n == 0 {
            return Err(Error::InvalidGraph("no vertices".into()));
        }
        if dimension_n < 1.0 {
            return Err(Error::InvalidGraph("dimension_n must be >= 1".into()));
        }
        if measure.iter().any(|&m| !(m > 0.0) || !m.is_finite()) {
            return Err(Error::InvalidGraph("vertex measure must be positive".into()));
        }
        let mut adjacency = vec![Vec::new(); n];
        let mut mesh_scale: f64 = 0.0;
        for e in &edges {
            if e.a >= n || e.b >= n {
                return Err(Error::InvalidGraph(format!("edge ({},{}) out of range", e.a, e.b)));
            }
            if e.a == e.b {
                return Err(Error::InvalidGraph("self-loop".into()));
            }
            if !(e.length > 0.0) || !(e.conductance > 0.0) {
                return Err(Error::InvalidGraph("edge length/conductance must be positive".into()));
            }
            adjacency[e.a].push((e.b, e.length, e.conductance));
            adjacency[e.b].push((e.a, e.length, e.conductance));
            mesh_scale = mesh_scale.max(e.length);
        }
        let g = DomainGraph {
            uid: next_uid(),
            measure,
            edges,
            adjacency,
            curvature_k,
            dimension_n,
            mesh_scale,
            dist_rows: RwLock::new(vec![None; n]),
        };
        if !g.is_connected() {
            return Err(Error::InvalidGraph("graph is not connected".into()));
        }
        Ok(g)
    }

    fn is_connected(&self) -> bool {
        let n = self.vertex_count();
        let mut seen = vec![false; n];
        let mut stack = vec![0usize];
        seen[0] = true;
        let mut count = 1;
        while let Some(x) = stack.pop() {
            for &(y, _, _) in &self.adjacency[x] {
                if !seen[y] {
                    seen[y] = true;
                    count += 1;
                    stack.push(y);
                }
            }
        }
        count == n
    }

    pub fn vertex_count(&self) -> usize {
        self.measure.len()
    }

    /// Process-unique identity of this graph value (clones get fresh ids).
    pub fn uid(&self) -> u64 {
        self.uid
    }

    pub fn measure(&self, x: usize) -> f64 {
        self.measure[x]
    }

    pub fn measures(&self) -> &[f64] {
        &self.measure
    }

    pub fn total_measure(&self) -> f64 {
        self.measure.iter().sum()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn neighbors(&self, x: usize) -> &[(usize, f64, f64)] {
        &self.adjacency[x]
    }

    pub fn curvature_k(&self) -> f64 {
        self.curvature_k
    }

    pub fn dimension_n(&self) -> f64 {
        self.dimension_n
    }

    pub fn mesh_scale(&self) -> f64 {
        self.mesh_scale
    }

    /// Σ_y w_xy, the total conductance at `x`.
    pub fn conductance_sum(&self, x: usize) -> f64 {
        self.adjacency[x].iter().map(|&(_, _, w)| w).sum()
    }

    fn dijkstra(&self, source: usize) -> Vec<f64> {
        #[derive(PartialEq)]
        struct Item(f64, usize);
        impl Eq for Item {}
        impl Ord for Item {
            fn cmp(&self, other: &Self) -> Ordering {
                // min-heap via reversed comparison on the distance
                other.0.partial_cmp(&self.0).unwrap_or(Ordering::Equal)
            }
        }
        impl PartialOrd for Item {
            fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
                Some(self.cmp(other))
            }
        }

        let n = self.vertex_count();
        let mut dist = vec![f64::INFINITY; n];
        dist[source] = 0.0;
        let mut heap = BinaryHeap::new();
        heap.push(Item(0.0, source));
        while let Some(Item(d, x)) = heap.pop() {
            if d > dist[x] {
                continue;
            }
            for &(y, len, _) in &self.adjacency[x] {
                let nd = d + len;
                if nd < dist[y] {
                    dist[y] = nd;
                    heap.push(Item(nd, y));
                }
            }
        }
        dist
    }

    /// All distances from `source`, memoized on graphs small enough to cache.
    pub fn distances_from(&self, source: usize) -> Arc<Vec<f64>> {
        if self.vertex_count() <= DIST_CACHE_LIMIT {
            if let Some(row) = &self.dist_rows.read().unwrap()[source] {
                return Arc::clone(row);
            }
            let row = Arc::new(self.dijkstra(source));
            self.dist_rows.write().unwrap()[source] = Some(Arc::clone(&row));
            row
        } else {
            Arc::new(self.dijkstra(source))
        }
    }

    pub fn distance(&self, x: usize, y: usize) -> f64 {
        if x == y {
            return 0.0;
        }
        self.distances_from(x)[y]
    }

    /// Open metric ball {y : d(center, y) < r} with its interior/boundary split.
    pub fn ball(&self, center: usize, r: f64) -> Result<VertexSubset> {
        if r < 0.0 {
            return Err(Error::InvalidArgument("ball radius must be >= 0".into()));
        }
        let dist = self.distances_from(center);
        let members: Vec<bool> = dist.iter().map(|&d| d < r).collect();
        VertexSubset::from_members(self, members)
    }
}

/// Builds a path graph with `n` vertices, spacing `h`, measure m = h and
/// conductance 1/h, so the Laplacian is the standard second difference / h².
pub fn build_path(n: usize, spacing: f64) -> Result<DomainGraph> {
    if n < 2 {
        return Err(Error::InvalidArgument("path needs at least 2 vertices".into()));
    }
    if !(spacing > 0.0) {
        return Err(Error::InvalidArgument("spacing must be positive".into()));
    }
    let measure = vec![spacing; n];
    let edges = (0..n - 1)
        .map(|i| Edge { a: i, b: i + 1, length: spacing, conductance: 1.0 / spacing })
        .collect();
    DomainGraph::new(measure, edges, 0.0, 1.0)
}

/// Builds a periodic nx × ny grid with spacing `h`, measure m = h² and unit
/// conductance: the five-point stencil divided by h². Flat model, K = 0.
pub fn build_torus_grid(nx: usize, ny: usize, spacing: f64) -> Result<DomainGraph> {
    if nx < 3 || ny < 3 {
        return Err(Error::InvalidArgument("torus grid needs nx, ny >= 3".into()));
    }
    if !(spacing > 0.0) {
        return Err(Error::InvalidArgument("spacing must be positive".into()));
    }
    let n = nx * ny;
    let idx = |i: usize, j: usize| (i % nx) + nx * (j % ny);
    let measure = vec![spacing * spacing; n];
    let mut edges = Vec::with_capacity(2 * n);
    for j in 0..ny {
        for i in 0..nx {
            edges.push(Edge { a: idx(i, j), b: idx(i + 1, j), length: spacing, conductance: 1.0 });
            edges.push(Edge { a: idx(i, j), b: idx(i, j + 1), length: spacing, conductance: 1.0 });
        }
    }
    DomainGraph::new(measure, edges, 0.0, 2.0)
}

/// Vertex index of grid coordinate (i, j) on a torus built by `build_torus_grid`.
pub fn torus_index(nx: usize, ny: usize, i: usize, j: usize) -> usize {
    (i % nx) + nx * (j % ny)
}

/// Triangulated mesh of a hyperbolic disk (hyperboloid-model sampling).
///
/// Vertices sit on concentric circles of hyperbolic radius k·δ with arc
/// spacing ≈ δ. Vertex measure is one third of the hyperbolic area of the
/// incident triangles (area by angle defect), edge lengths are hyperbolic
/// distances, and conductances are intrinsic cotangent weights clamped away
/// from zero. Curvature metadata K = -1, N = 2.
pub fn build_hyperbolic_disk(radius: f64, spacing: f64) -> Result<DomainGraph> {
    if !(radius > spacing && spacing > 0.0) {
        return Err(Error::InvalidArgument("need radius > spacing > 0".into()));
    }
    let rings = (radius / spacing).round().max(1.0) as usize;
    let delta = radius / rings as f64;

    // rough vertex count estimate: area / δ² up to constants
    let estimate = (std::f64::consts::TAU * ((radius).cosh() - 1.0) / (delta * delta)).ceil();
    if estimate > HYPERBOLIC_VERTEX_LIMIT as f64 {
        return Err(Error::InvalidArgument(format!(
            "hyperbolic mesh would need ~{estimate:.0} vertices (limit {HYPERBOLIC_VERTEX_LIMIT})"
        )));
    }

    // ring layout: ring 0 is the single center vertex
    let mut ring_start = vec![0usize];
    let mut ring_counts = vec![1usize];
    let mut positions: Vec<[f64; 3]> = vec![[1.0, 0.0, 0.0]];
    for k in 1..=rings {
        let r = k as f64 * delta;
        let circumference = std::f64::consts::TAU * r.sinh();
        let count = (circumference / delta).round().max(6.0) as usize;
        ring_start.push(positions.len());
        ring_counts.push(count);
        for i in 0..count {
            let theta = std::f64::consts::TAU * i as f64 / count as f64;
            positions.push([r.cosh(), r.sinh() * theta.cos(), r.sinh() * theta.sin()]);
        }
    }
    let n = positions.len();

    let hyper_dist = |p: &[f64; 3], q: &[f64; 3]| -> f64 {
        let inner = p[0] * q[0] - p[1] * q[1] - p[2] * q[2];
        inner.max(1.0).acosh()
    };

    // triangles as vertex triples; annuli triangulated by merging the two
    // rings in angular order
    let mut triangles: Vec<[usize; 3]> = Vec::new();
    {
        // center fan
        let c0 = ring_start[1];
        let n1 = ring_counts[1];
        for i in 0..n1 {
            triangles.push([0, c0 + i, c0 + (i + 1) % n1]);
        }
    }
    for k in 1..rings {
        let (s0, n0) = (ring_start[k], ring_counts[k]);
        let (s1, n1) = (ring_start[k + 1], ring_counts[k + 1]);
        let angle0 = |i: usize| std::f64::consts::TAU * i as f64 / n0 as f64;
        let angle1 = |j: usize| std::f64::consts::TAU * j as f64 / n1 as f64;
        let (mut i, mut j) = (0usize, 0usize);
        while i < n0 || j < n1 {
            let next_inner = if i < n0 { angle0(i + 1) } else { f64::INFINITY };
            let next_outer = if j < n1 { angle1(j + 1) } else { f64::INFINITY };
            if next_inner <= next_outer {
                // advance along the inner ring
                triangles.push([s0 + i % n0, s1 + j % n1, s0 + (i + 1) % n0]);
                i += 1;
            } else {
                triangles.push([s0 + i % n0, s1 + j % n1, s1 + (j + 1) % n1]);
                j += 1;
            }
        }
    }

    // accumulate edges with cotangent weights and vertex measures
    use std::collections::HashMap;
    let mut weights: HashMap<(usize, usize), f64> = HashMap::new();
    let mut lengths: HashMap<(usize, usize), f64> = HashMap::new();
    let mut measure = vec![0.0; n];
    let key = |a: usize, b: usize| if a < b { (a, b) } else { (b, a) };
    for t in &triangles {
        let [va, vb, vc] = *t;
        let la = hyper_dist(&positions[vb], &positions[vc]);
        let lb = hyper_dist(&positions[va], &positions[vc]);
        let lc = hyper_dist(&positions[va], &positions[vb]);
        // hyperbolic law of cosines: angle at va is opposite side a
        let angle = |opp: f64, s1: f64, s2: f64| -> f64 {
            let c = (s1.cosh() * s2.cosh() - opp.cosh()) / (s1.sinh() * s2.sinh());
            c.clamp(-1.0, 1.0).acos()
        };
        let aa = angle(la, lb, lc);
        let ab = angle(lb, la, lc);
        let ac = angle(lc, la, lb);
        let area = (std::f64::consts::PI - aa - ab - ac).max(0.0);
        for &v in t {
            measure[v] += area / 3.0;
        }
        let mut add = |x: usize, y: usize, len: f64, opposite: f64| {
            let k = key(x, y);
            *weights.entry(k).or_insert(0.0) += 0.5 / opposite.tan();
            lengths.entry(k).or_insert(len);
        };
        add(vb, vc, la, aa);
        add(va, vc, lb, ab);
        add(va, vb, lc, ac);
    }

    let mut edge_list: Vec<Edge> = weights
        .into_iter()
        .map(|((a, b), w)| Edge {
            a,
            b,
            length: lengths[&(a, b)],
            conductance: w.max(1e-9),
        })
        .collect();
    edge_list.sort_by_key(|e| (e.a, e.b));
    DomainGraph::new(measure, edge_list, -1.0, 2.0)
}

/// Shortest-path distance in the graph metric.
pub fn graph_distance(g: &DomainGraph, x: usize, y: usize) -> f64 {
    g.distance(x, y)
}

/// Subset of vertices with a designated interior/boundary split.
///
/// By default the boundary consists exactly of the members adjacent to a
/// non-member. Regions covering the whole graph (a path with endpoint data,
/// a torus) have no non-members, so an explicit boundary designation is also
/// supported; it must contain every adjacency-induced boundary vertex.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VertexSubset {
    members: Vec<bool>,
    boundary: Vec<bool>,
}

impl VertexSubset {
    pub fn from_members(g: &DomainGraph, members: Vec<bool>) -> Result<Self> {
        if members.len() != g.vertex_count() {
            return Err(Error::InvalidRegion("mask length != vertex count".into()));
        }
        let boundary = induced_boundary(g, &members);
        Ok(VertexSubset { members, boundary })
    }

    pub fn with_designated_boundary(
        g: &DomainGraph,
        members: Vec<bool>,
        boundary: Vec<bool>,
    ) -> Result<Self> {
        if members.len() != g.vertex_count() || boundary.len() != g.vertex_count() {
            return Err(Error::InvalidRegion("mask length != vertex count".into()));
        }
        let induced = induced_boundary(g, &members);
        for x in 0..members.len() {
            if boundary[x] && !members[x] {
                return Err(Error::InvalidRegion(format!("boundary vertex {x} is not a member")));
            }
            if induced[x] && !boundary[x] {
                return Err(Error::InvalidRegion(format!(
                    "vertex {x} is adjacent to a non-member and must be boundary"
                )));
            }
        }
        Ok(VertexSubset { members, boundary })
    }

    /// Whole graph as members; boundary must be designated by the caller.
    pub fn whole_graph_with_boundary(g: &DomainGraph, boundary: Vec<usize>) -> Result<Self> {
        let mut mask = vec![false; g.vertex_count()];
        for &x in &boundary {
            if x >= g.vertex_count() {
                return Err(Error::InvalidRegion(format!("boundary vertex {x} out of range")));
            }
            mask[x] = true;
        }
        Self::with_designated_boundary(g, vec![true; g.vertex_count()], mask)
    }

    pub fn len(&self) -> usize {
        self.members.iter().filter(|&&b| b).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.members.iter().any(|&b| b)
    }

    pub fn vertex_count(&self) -> usize {
        self.members.len()
    }

    pub fn is_member(&self, x: usize) -> bool {
        self.members[x]
    }

    pub fn is_boundary(&self, x: usize) -> bool {
        self.boundary[x]
    }

    pub fn is_interior(&self, x: usize) -> bool {
        self.members[x] && !self.boundary[x]
    }

    pub fn members(&self) -> impl Iterator<Item = usize> + '_ {
        self.members.iter().enumerate().filter(|(_, &b)| b).map(|(i, _)| i)
    }

    pub fn interior(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.members.len()).filter(move |&i| self.is_interior(i))
    }

    pub fn boundary(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.members.len()).filter(move |&i| self.boundary[i])
    }

    pub fn contains_all(&self, other: &VertexSubset) -> bool {
        other
            .members
            .iter()
            .enumerate()
            .all(|(i, &b)| !b || self.members[i])
    }
}

fn induced_boundary(g: &DomainGraph, members: &[bool]) -> Vec<bool> {
    (0..members.len())
        .map(|x| members[x] && g.neighbors(x).iter().any(|&(y, _, _)| !members[y]))
        .collect()
}

// ---------------------------------------------------------------------------
// JSON schema
// ---------------------------------------------------------------------------

#[derive(Serialize, Deserialize)]
struct VertexJson {
    id: usize,
    measure: f64,
}

/// Serialization schema: {vertices:[{id, measure}], edges:[{a, b, length,
/// conductance}], k, n, scale}.
#[derive(Serialize, Deserialize)]
pub struct GraphJson {
    vertices: Vec<VertexJson>,
    edges: Vec<Edge>,
    k: f64,
    n: f64,
    scale: f64,
}

impl From<&DomainGraph> for GraphJson {
    fn from(g: &DomainGraph) -> Self {
        GraphJson {
            vertices: (0..g.vertex_count())
                .map(|id| VertexJson { id, measure: g.measure(id) })
                .collect(),
            edges: g.edges().to_vec(),
            k: g.curvature_k(),
            n: g.dimension_n(),
            scale: g.mesh_scale(),
        }
    }
}

impl TryFrom<GraphJson> for DomainGraph {
    type Error = Error;

    fn try_from(json: GraphJson) -> Result<DomainGraph> {
        let count = json.vertices.len();
        let mut measure = vec![0.0; count];
        for v in &json.vertices {
            if v.id >= count {
                return Err(Error::InvalidGraph(format!("vertex id {} out of range", v.id)));
            }
            measure[v.id] = v.measure;
        }
        let g = DomainGraph::new(measure, json.edges, json.k, json.n)?;
        if (g.mesh_scale() - json.scale).abs() > 1e-12 * (1.0 + json.scale.abs()) {
            return Err(Error::InvalidGraph("declared scale != max edge length".into()));
        }
        Ok(g)
    }
}

pub fn graph_to_json(g: &DomainGraph) -> serde_json::Value {
    serde_json::to_value(GraphJson::from(g)).expect("graph serialization cannot fail")
}

pub fn graph_from_json(value: serde_json::Value) -> Result<DomainGraph> {
    let json: GraphJson = serde_json::from_value(value)
        .map_err(|e| Error::InvalidGraph(format!("bad graph json: {e}")))?;
    DomainGraph::try_from(json)
}
