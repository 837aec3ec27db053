//! Metric trees: combinatorial trees with edge lengths.
//!
//! Points live on edges as (edge id, offset in [0, length]). A point within
//! snapping distance of a vertex is canonicalized onto the lowest-indexed
//! edge incident to that vertex so that equal points compare equal.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const VERTEX_SNAP: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TreeEdge {
    pub a: usize,
    pub b: usize,
    pub length: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(try_from = "TreeJson", into = "TreeJson")]
pub struct MetricTree {
    vertex_count: usize,
    edges: Vec<TreeEdge>,
    /// vertex-to-vertex distances, row-major
    #[serde(skip)]
    dist: Vec<f64>,
    /// lowest-indexed incident edge per vertex
    #[serde(skip)]
    canonical_edge: Vec<usize>,
}

#[derive(Serialize, Deserialize)]
struct TreeJson {
    vertices: usize,
    edges: Vec<TreeEdge>,
}

impl From<MetricTree> for TreeJson {
    fn from(t: MetricTree) -> Self {
        TreeJson { vertices: t.vertex_count, edges: t.edges }
    }
}

impl TryFrom<TreeJson> for MetricTree {
    type Error = Error;
    fn try_from(j: TreeJson) -> Result<Self> {
        MetricTree::new(j.vertices, j.edges)
    }
}

impl MetricTree {
    pub fn new(vertex_count: usize, edges: Vec<TreeEdge>) -> Result<Self> {
        if vertex_count == 0 {
            return Err(Error::InvalidArgument("tree needs at least one vertex".into()));
        }
        if edges.len() + 1 != vertex_count {
            return Err(Error::InvalidArgument("a tree has exactly V-1 edges".into()));
        }
        let mut adjacency = vec![Vec::new(); vertex_count];
        let mut canonical_edge = vec![usize::MAX; vertex_count];
        for (i, e) in edges.iter().enumerate() {
            if e.a >= vertex_count || e.b >= vertex_count || e.a == e.b {
                return Err(Error::InvalidArgument("bad tree edge".into()));
            }
            if !(e.length > 0.0) {
                return Err(Error::InvalidArgument("tree edge length must be positive".into()));
            }
            adjacency[e.a].push((e.b, e.length));
            adjacency[e.b].push((e.a, e.length));
            canonical_edge[e.a] = canonical_edge[e.a].min(i);
            canonical_edge[e.b] = canonical_edge[e.b].min(i);
        }
        // connectivity (acyclicity then follows from the edge count)
        let mut dist = vec![f64::INFINITY; vertex_count * vertex_count];
        for s in 0..vertex_count {
            let row = &mut dist[s * vertex_count..(s + 1) * vertex_count];
            row[s] = 0.0;
            let mut stack = vec![s];
            while let Some(x) = stack.pop() {
                for &(y, len) in &adjacency[x] {
                    if row[y].is_infinite() {
                        row[y] = row[x] + len;
                        stack.push(y);
                    }
                }
            }
            if row.iter().any(|d| d.is_infinite()) {
                return Err(Error::InvalidArgument("tree is not connected".into()));
            }
        }
        Ok(MetricTree { vertex_count, edges, dist, canonical_edge })
    }

    /// Tripod: three unit edges meeting at vertex 0; tips are vertices 1..3.
    pub fn tripod() -> Self {
        MetricTree::new(
            4,
            vec![
                TreeEdge { a: 0, b: 1, length: 1.0 },
                TreeEdge { a: 0, b: 2, length: 1.0 },
                TreeEdge { a: 0, b: 3, length: 1.0 },
            ],
        )
        .expect("tripod is a valid tree")
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    pub fn edges(&self) -> &[TreeEdge] {
        &self.edges
    }

    pub fn vertex_distance(&self, a: usize, b: usize) -> f64 {
        self.dist[a * self.vertex_count + b]
    }

    pub fn validate_point(&self, edge: usize, offset: f64) -> Result<()> {
        if edge >= self.edges.len() {
            return Err(Error::KindMismatch(format!("tree edge {edge} out of range")));
        }
        let len = self.edges[edge].length;
        if !(-1e-10..=len + 1e-10).contains(&offset) {
            return Err(Error::KindMismatch(format!(
                "tree offset {offset} outside [0, {len}]"
            )));
        }
        Ok(())
    }

    /// Vertex as a canonical point on its lowest-indexed incident edge.
    pub fn vertex_point(&self, v: usize) -> (usize, f64) {
        let e = self.canonical_edge[v];
        let edge = self.edges[e];
        if edge.a == v {
            (e, 0.0)
        } else {
            (e, edge.length)
        }
    }

    /// Canonical form: clamp into the edge and snap near-vertex points.
    pub fn canonicalize(&self, edge: usize, offset: f64) -> (usize, f64) {
        let len = self.edges[edge].length;
        let offset = offset.clamp(0.0, len);
        if offset <= VERTEX_SNAP {
            self.vertex_point(self.edges[edge].a)
        } else if offset >= len - VERTEX_SNAP {
            self.vertex_point(self.edges[edge].b)
        } else {
            (edge, offset)
        }
    }

    /// Distances from a point to both endpoints of every path leaving it.
    /// For (edge e, offset o): distance to vertex v is
    /// min(o + d(a, v), len - o + d(b, v)).
    pub fn point_vertex_distance(&self, (e, o): (usize, f64), v: usize) -> f64 {
        let edge = self.edges[e];
        (o + self.vertex_distance(edge.a, v)).min(edge.length - o + self.vertex_distance(edge.b, v))
    }

    pub fn point_distance(&self, p: (usize, f64), q: (usize, f64)) -> f64 {
        if p.0 == q.0 {
            return (p.1 - q.1).abs();
        }
        let ep = self.edges[p.0];
        let eq = self.edges[q.0];
        let via = |pv: usize, qv: usize, pleg: f64, qleg: f64| -> f64 {
            pleg + self.vertex_distance(pv, qv) + qleg
        };
        let d = via(ep.a, eq.a, p.1, q.1)
            .min(via(ep.a, eq.b, p.1, eq.length - q.1))
            .min(via(ep.b, eq.a, ep.length - p.1, q.1))
            .min(via(ep.b, eq.b, ep.length - p.1, eq.length - q.1));
        // points on touching edges can double-count the shared vertex; the
        // min over exit combinations already handles that because vertex
        // distances satisfy the tree metric exactly
        d
    }

    /// Point at arclength `s` from `p` along the geodesic to `q`.
    pub fn geodesic_point(&self, p: (usize, f64), q: (usize, f64), s: f64) -> (usize, f64) {
        let total = self.point_distance(p, q);
        if total <= 0.0 {
            return self.canonicalize(p.0, p.1);
        }
        let s = s.clamp(0.0, total);
        if p.0 == q.0 {
            let o = p.1 + (q.1 - p.1).signum() * s;
            return self.canonicalize(p.0, o);
        }
        // pick exit/entry vertices attaining the minimum
        let ep = self.edges[p.0];
        let eq = self.edges[q.0];
        let mut best = (f64::INFINITY, ep.a, eq.a, p.1, q.1);
        for &(pv, pleg) in &[(ep.a, p.1), (ep.b, ep.length - p.1)] {
            for &(qv, qleg) in &[(eq.a, q.1), (eq.b, eq.length - q.1)] {
                let d = pleg + self.vertex_distance(pv, qv) + qleg;
                if d < best.0 {
                    best = (d, pv, qv, pleg, qleg);
                }
            }
        }
        let (_, pv, qv, pleg, qleg) = best;
        if s <= pleg {
            // still on p's edge, moving toward pv
            let o = if pv == ep.a { p.1 - s } else { p.1 + s };
            return self.canonicalize(p.0, o);
        }
        if s >= total - qleg {
            let from_q = total - s;
            let o = if qv == eq.a { q.1 - from_q } else { q.1 + from_q };
            return self.canonicalize(q.0, o);
        }
        // inside the vertex path from pv to qv
        let mut remaining = s - pleg;
        let mut cur = pv;
        loop {
            // step to the neighbor of cur on the path to qv
            let (next, eidx, len) = self
                .neighbor_toward(cur, qv)
                .expect("path exists in a connected tree");
            if remaining <= len + VERTEX_SNAP {
                let edge = self.edges[eidx];
                let o = if edge.a == cur { remaining } else { edge.length - remaining };
                return self.canonicalize(eidx, o);
            }
            remaining -= len;
            cur = next;
        }
    }

    fn neighbor_toward(&self, from: usize, target: usize) -> Option<(usize, usize, f64)> {
        if from == target {
            return None;
        }
        let base = self.vertex_distance(from, target);
        for (i, e) in self.edges.iter().enumerate() {
            let (nbr, len) = if e.a == from {
                (e.b, e.length)
            } else if e.b == from {
                (e.a, e.length)
            } else {
                continue;
            };
            if (self.vertex_distance(nbr, target) + len - base).abs() <= 1e-9 * (1.0 + base) {
                return Some((nbr, i, len));
            }
        }
        None
    }

    /// Exact minimizer of Σ wᵢ d(x, pᵢ)² over the tree.
    ///
    /// The objective restricted to an edge is convex piecewise quadratic in
    /// the offset with kinks where a point's geodesic switches exit vertex,
    /// so each edge is minimized in closed form between breakpoints. Ties
    /// between edges resolve to the lowest edge index.
    pub fn barycenter(&self, points: &[(usize, f64)], weights: &[f64]) -> (usize, f64) {
        let mut best_val = f64::INFINITY;
        let mut best_point = self.canonicalize(points[0].0, points[0].1);
        for e in 0..self.edges.len() {
            let len = self.edges[e].length;
            // distance from (e, o) to pᵢ is min(o + aᵢ, len - o + bᵢ), with
            // points on e handled by |o - oᵢ|; collect breakpoints
            let mut breaks = vec![0.0, len];
            #[derive(Clone, Copy)]
            enum Leg {
                OnEdge(f64),
                OffEdge(f64, f64), // (a_i, b_i)
            }
            let legs: Vec<Leg> = points
                .iter()
                .map(|&(pe, po)| {
                    if pe == e {
                        breaks.push(po);
                        Leg::OnEdge(po)
                    } else {
                        let a = self.point_vertex_distance((pe, po), self.edges[e].a);
                        let b = self.point_vertex_distance((pe, po), self.edges[e].b);
                        let cross = 0.5 * (len + b - a);
                        if cross > 0.0 && cross < len {
                            breaks.push(cross);
                        }
                        Leg::OffEdge(a, b)
                    }
                })
                .collect();
            breaks.sort_by(|x, y| x.partial_cmp(y).unwrap());
            for w in breaks.windows(2) {
                let (lo, hi) = (w[0], w[1]);
                if hi - lo <= 0.0 {
                    continue;
                }
                let mid = 0.5 * (lo + hi);
                // on (lo, hi) each dᵢ(o) is affine sᵢ·o + cᵢ
                let mut quad = 0.0; // Σ w sᵢ²
                let mut lin = 0.0; // Σ 2 w sᵢ cᵢ
                let mut cst = 0.0;
                for (i, leg) in legs.iter().enumerate() {
                    let (s, c) = match *leg {
                        Leg::OnEdge(po) => {
                            if mid >= po {
                                (1.0, -po)
                            } else {
                                (-1.0, po)
                            }
                        }
                        Leg::OffEdge(a, b) => {
                            if mid + a <= len - mid + b {
                                (1.0, a)
                            } else {
                                (-1.0, len + b)
                            }
                        }
                    };
                    quad += weights[i] * s * s;
                    lin += 2.0 * weights[i] * s * c;
                    cst += weights[i] * c * c;
                }
                let opt = if quad > 0.0 { (-lin / (2.0 * quad)).clamp(lo, hi) } else { mid };
                let val = quad * opt * opt + lin * opt + cst;
                if val < best_val - 1e-14 {
                    best_val = val;
                    best_point = self.canonicalize(e, opt);
                }
            }
        }
        best_point
    }
}
