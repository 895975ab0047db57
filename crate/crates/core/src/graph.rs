//! Weighted, connected graphs with a positive vertex measure, the discrete
//! differential operators on them, and hop-count balls around a base point.
//!
//! Vertices carry opaque string ids. Internally they are dense indices in
//! lexicographic id order, so every traversal and every report is ordered
//! the same way from run to run.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};

use crate::error::{Error, Result};
use crate::function::VertexFunction;

/// Distance value for vertices not reached by a search.
pub const UNREACHABLE: usize = usize::MAX;

/// Collects edges and measure entries before validation.
#[derive(Debug, Default, Clone)]
pub struct GraphBuilder {
    edges: BTreeMap<(String, String), f64>,
    measure: BTreeMap<String, f64>,
    vertices: BTreeSet<String>,
}

impl GraphBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds the undirected edge `xy`. Re-adding an edge is accepted only with
    /// the identical weight, so asymmetric input cannot slip through.
    pub fn add_edge(&mut self, x: &str, y: &str, weight: f64) -> Result<&mut Self> {
        if x == y {
            return Err(Error::input(format!("self-loop at vertex {x:?}")));
        }
        if !(weight.is_finite() && weight > 0.0) {
            return Err(Error::input(format!(
                "edge {x:?}-{y:?} has non-positive weight {weight}"
            )));
        }
        let key = if x < y {
            (x.to_owned(), y.to_owned())
        } else {
            (y.to_owned(), x.to_owned())
        };
        if let Some(&old) = self.edges.get(&key) {
            if old != weight {
                return Err(Error::input(format!(
                    "edge {x:?}-{y:?} listed with conflicting weights {old} and {weight}"
                )));
            }
            return Ok(self);
        }
        self.vertices.insert(key.0.clone());
        self.vertices.insert(key.1.clone());
        self.edges.insert(key, weight);
        Ok(self)
    }

    /// Adds a vertex without edges (only meaningful for a one-vertex graph).
    pub fn add_vertex(&mut self, x: &str) -> &mut Self {
        self.vertices.insert(x.to_owned());
        self
    }

    pub fn set_measure(&mut self, x: &str, mu: f64) -> Result<&mut Self> {
        if !(mu.is_finite() && mu > 0.0) {
            return Err(Error::input(format!(
                "vertex {x:?} has non-positive measure {mu}"
            )));
        }
        if let Some(&old) = self.measure.get(x) {
            if old != mu {
                return Err(Error::input(format!(
                    "vertex {x:?} listed with conflicting measures {old} and {mu}"
                )));
            }
        }
        self.measure.insert(x.to_owned(), mu);
        Ok(self)
    }

    /// Validates and freezes the graph. Vertices without a measure entry get
    /// measure 1. Measure entries must name vertices that occur on an edge
    /// (or were added explicitly).
    pub fn build(self) -> Result<WeightedGraph> {
        if self.vertices.is_empty() {
            return Err(Error::input("graph has no vertices"));
        }
        for x in self.measure.keys() {
            if !self.vertices.contains(x) {
                return Err(Error::input(format!(
                    "measure given for unknown vertex {x:?}"
                )));
            }
        }
        let ids: Vec<String> = self.vertices.into_iter().collect();
        let index: HashMap<String, usize> =
            ids.iter().enumerate().map(|(i, s)| (s.clone(), i)).collect();
        let measure: Vec<f64> = ids
            .iter()
            .map(|x| self.measure.get(x).copied().unwrap_or(1.0))
            .collect();

        let n = ids.len();
        let edges: Vec<(usize, usize, f64)> = self
            .edges
            .iter()
            .map(|((x, y), &w)| (index[x], index[y], w))
            .collect();

        let mut degree = vec![0usize; n];
        for &(a, b, _) in &edges {
            degree[a] += 1;
            degree[b] += 1;
        }
        let mut offsets = vec![0usize; n + 1];
        for i in 0..n {
            offsets[i + 1] = offsets[i] + degree[i];
        }
        let mut fill = offsets.clone();
        let mut neighbors = vec![0usize; offsets[n]];
        let mut weights = vec![0.0; offsets[n]];
        for &(a, b, w) in &edges {
            neighbors[fill[a]] = b;
            weights[fill[a]] = w;
            fill[a] += 1;
            neighbors[fill[b]] = a;
            weights[fill[b]] = w;
            fill[b] += 1;
        }
        // sort each adjacency list by neighbor index for deterministic sums
        for i in 0..n {
            let range = offsets[i]..offsets[i + 1];
            let mut pairs: Vec<(usize, f64)> = neighbors[range.clone()]
                .iter()
                .copied()
                .zip(weights[range.clone()].iter().copied())
                .collect();
            pairs.sort_by_key(|p| p.0);
            for (slot, (nb, w)) in range.zip(pairs) {
                neighbors[slot] = nb;
                weights[slot] = w;
            }
        }

        let graph = WeightedGraph {
            ids,
            index,
            measure,
            offsets,
            neighbors,
            weights,
            edges,
        };
        let dist = graph.distances_from(0);
        if let Some(lost) = dist.iter().position(|&d| d == UNREACHABLE) {
            return Err(Error::input(format!(
                "graph is not connected: vertex {:?} is unreachable from {:?}",
                graph.ids[lost], graph.ids[0]
            )));
        }
        Ok(graph)
    }
}

/// A finite, connected, symmetric weighted graph with a positive measure.
///
/// Immutable after construction.
#[derive(Debug, Clone)]
pub struct WeightedGraph {
    ids: Vec<String>,
    index: HashMap<String, usize>,
    measure: Vec<f64>,
    offsets: Vec<usize>,
    neighbors: Vec<usize>,
    weights: Vec<f64>,
    edges: Vec<(usize, usize, f64)>,
}

impl WeightedGraph {
    pub fn vertex_count(&self) -> usize {
        self.ids.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Each undirected edge once, as `(a, b, w)` with `a < b` by id.
    pub fn edges(&self) -> &[(usize, usize, f64)] {
        &self.edges
    }

    pub fn id(&self, x: usize) -> &str {
        &self.ids[x]
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn vertex(&self, id: &str) -> Result<usize> {
        self.index
            .get(id)
            .copied()
            .ok_or_else(|| Error::input(format!("unknown vertex {id:?}")))
    }

    pub fn check_vertex(&self, x: usize) -> Result<()> {
        if x < self.ids.len() {
            Ok(())
        } else {
            Err(Error::input(format!(
                "vertex index {x} out of range for a graph with {} vertices",
                self.ids.len()
            )))
        }
    }

    pub fn measure(&self, x: usize) -> f64 {
        self.measure[x]
    }

    pub fn measures(&self) -> &[f64] {
        &self.measure
    }

    pub fn degree(&self, x: usize) -> usize {
        self.offsets[x + 1] - self.offsets[x]
    }

    /// Neighbors of `x` with the edge weights, in index order.
    pub fn neighbors(&self, x: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let range = self.offsets[x]..self.offsets[x + 1];
        self.neighbors[range.clone()]
            .iter()
            .copied()
            .zip(self.weights[range].iter().copied())
    }

    /// Total edge weight at `x`.
    pub fn weighted_degree(&self, x: usize) -> f64 {
        self.neighbors(x).map(|(_, w)| w).sum()
    }

    pub fn min_weight(&self) -> Option<f64> {
        self.edges.iter().map(|e| e.2).reduce(f64::min)
    }

    pub fn min_measure(&self) -> f64 {
        self.measure.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Returns a copy with every edge weight multiplied by `s > 0`.
    pub fn scale_weights(&self, s: f64) -> Result<WeightedGraph> {
        if !(s.is_finite() && s > 0.0) {
            return Err(Error::input(format!("weight scale must be positive, got {s}")));
        }
        let mut g = self.clone();
        g.weights.iter_mut().for_each(|w| *w *= s);
        g.edges.iter_mut().for_each(|e| e.2 *= s);
        Ok(g)
    }

    /// Hop-count distances from `origin` by breadth-first search. Edge
    /// weights play no role.
    pub fn distances_from(&self, origin: usize) -> Vec<usize> {
        let mut dist = vec![UNREACHABLE; self.vertex_count()];
        let mut queue = VecDeque::new();
        dist[origin] = 0;
        queue.push_back(origin);
        while let Some(x) = queue.pop_front() {
            for (y, _) in self.neighbors(x) {
                if dist[y] == UNREACHABLE {
                    dist[y] = dist[x] + 1;
                    queue.push_back(y);
                }
            }
        }
        dist
    }

    /// Graph Laplacian `(1/μ(x)) Σ_{y~x} w_xy (u(y) − u(x))`.
    pub fn laplacian(&self, u: &VertexFunction, x: usize) -> Result<f64> {
        self.check_vertex(x)?;
        Ok(self.laplacian_unchecked(u.values(), x))
    }

    pub(crate) fn laplacian_unchecked(&self, u: &[f64], x: usize) -> f64 {
        let ux = u[x];
        let s: f64 = self.neighbors(x).map(|(y, w)| w * (u[y] - ux)).sum();
        s / self.measure[x]
    }

    /// Gradient form `Γ(u,v)(x) = (1/2μ(x)) Σ_{y~x} w_xy (u(y)−u(x))(v(y)−v(x))`.
    pub fn gradient_form(&self, u: &VertexFunction, v: &VertexFunction, x: usize) -> Result<f64> {
        self.check_vertex(x)?;
        let (u, v) = (u.values(), v.values());
        let s: f64 = self
            .neighbors(x)
            .map(|(y, w)| w * (u[y] - u[x]) * (v[y] - v[x]))
            .sum();
        Ok(s / (2.0 * self.measure[x]))
    }

    /// `|∇u|(x) = sqrt(Γ(u,u)(x))`.
    pub fn grad_norm(&self, u: &VertexFunction, x: usize) -> Result<f64> {
        Ok(self.gradient_form(u, u, x)?.sqrt())
    }

    /// `Σ_{x∈S} μ(x) f(x)`.
    pub fn integrate(&self, f: &VertexFunction, set: &[usize]) -> Result<f64> {
        for &x in set {
            self.check_vertex(x)?;
        }
        Ok(set.iter().map(|&x| self.measure[x] * f.value(x)).sum())
    }

    /// Integral over the whole vertex set.
    pub fn integrate_all(&self, f: &VertexFunction) -> f64 {
        f.values()
            .iter()
            .zip(&self.measure)
            .map(|(v, m)| v * m)
            .sum()
    }

    /// The ball `B_k(O) = {ρ < k}` together with its boundary `{ρ = k}`.
    pub fn ball(&self, origin: usize, radius: usize) -> Result<Ball> {
        self.check_vertex(origin)?;
        if radius < 1 {
            return Err(Error::input("ball radius must be at least 1"));
        }
        let dist = self.distances_from(origin);
        Ok(Ball::from_distances(origin, radius, &dist))
    }
}

/// Which region of the graph a [`Ball`] point belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Region {
    Interior,
    Boundary,
    Outside,
}

/// Interior/boundary partition of the vertices at hop distance `< k` and
/// `= k` from a center.
#[derive(Debug, Clone)]
pub struct Ball {
    center: usize,
    radius: usize,
    interior: Vec<usize>,
    boundary: Vec<usize>,
    /// position of each vertex inside `interior`, if it is interior
    slot: Vec<Option<usize>>,
    region: Vec<Region>,
}

impl Ball {
    pub fn from_distances(center: usize, radius: usize, dist: &[usize]) -> Ball {
        let mut interior = Vec::new();
        let mut boundary = Vec::new();
        let mut slot = vec![None; dist.len()];
        let mut region = vec![Region::Outside; dist.len()];
        for (x, &d) in dist.iter().enumerate() {
            if d < radius {
                slot[x] = Some(interior.len());
                interior.push(x);
                region[x] = Region::Interior;
            } else if d == radius {
                boundary.push(x);
                region[x] = Region::Boundary;
            }
        }
        Ball {
            center,
            radius,
            interior,
            boundary,
            slot,
            region,
        }
    }

    pub fn center(&self) -> usize {
        self.center
    }

    pub fn radius(&self) -> usize {
        self.radius
    }

    pub fn interior(&self) -> &[usize] {
        &self.interior
    }

    pub fn boundary(&self) -> &[usize] {
        &self.boundary
    }

    pub fn region(&self, x: usize) -> Region {
        self.region[x]
    }

    pub fn contains(&self, x: usize) -> bool {
        self.region[x] == Region::Interior
    }

    /// Index of `x` among the interior vertices.
    pub fn slot(&self, x: usize) -> Option<usize> {
        self.slot[x]
    }

    /// Number of vertices of the host graph.
    pub fn host_size(&self) -> usize {
        self.region.len()
    }

    /// True when the ball swallowed the whole graph.
    pub fn covers_graph(&self) -> bool {
        self.interior.len() == self.region.len()
    }

    /// Collects the interior values of `u` in slot order.
    pub fn restrict(&self, u: &VertexFunction) -> Vec<f64> {
        self.interior.iter().map(|&x| u.value(x)).collect()
    }

    /// Zero extension of interior values to the host graph.
    pub fn extend(&self, values: &[f64]) -> VertexFunction {
        assert_eq!(values.len(), self.interior.len());
        let mut out = vec![0.0; self.region.len()];
        for (&x, &v) in self.interior.iter().zip(values) {
            out[x] = v;
        }
        VertexFunction::on_ball(out, self)
    }

    /// Fails if `u` is nonzero somewhere outside the interior.
    pub fn check_support(&self, u: &VertexFunction) -> Result<()> {
        for (x, &v) in u.values().iter().enumerate() {
            if v != 0.0 && self.region[x] != Region::Interior {
                return Err(Error::input(format!(
                    "function is {v} at vertex index {x}, outside the ball interior"
                )));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path_abc() -> WeightedGraph {
        let mut b = GraphBuilder::new();
        b.add_edge("a", "b", 1.0).unwrap();
        b.add_edge("b", "c", 1.0).unwrap();
        b.build().unwrap()
    }

    fn bump(g: &WeightedGraph) -> VertexFunction {
        assert_eq!(g.vertex_count(), 3);
        VertexFunction::from_values(vec![0.0, 1.0, 0.0])
    }

    #[test]
    fn laplacian_on_path() {
        let g = path_abc();
        let u = bump(&g);
        assert_eq!(g.laplacian(&u, g.vertex("b").unwrap()).unwrap(), -2.0);
        assert_eq!(g.laplacian(&u, g.vertex("a").unwrap()).unwrap(), 1.0);
        let c = VertexFunction::constant(3, 4.5);
        for x in 0..3 {
            assert_eq!(g.laplacian(&c, x).unwrap(), 0.0);
        }
        assert!(matches!(g.laplacian(&u, 7), Err(Error::Input(_))));
    }

    #[test]
    fn gradient_form_on_path() {
        let g = path_abc();
        let u = bump(&g);
        let b = g.vertex("b").unwrap();
        assert_eq!(g.gradient_form(&u, &u, b).unwrap(), 1.0);
        let c = VertexFunction::constant(3, -2.0);
        for x in 0..3 {
            assert_eq!(g.gradient_form(&u, &c, x).unwrap(), 0.0);
        }
    }

    #[test]
    fn integrate_sets() {
        let g = path_abc();
        let two = VertexFunction::constant(3, 2.0);
        assert_eq!(g.integrate(&two, &[0, 1, 2]).unwrap(), 6.0);
        assert_eq!(g.integrate(&two, &[]).unwrap(), 0.0);
        assert_eq!(g.integrate(&VertexFunction::zeros(3), &[0, 1, 2]).unwrap(), 0.0);
    }

    #[test]
    fn balls() {
        let g = path_abc();
        let b = g.vertex("b").unwrap();
        let ball = g.ball(b, 1).unwrap();
        assert_eq!(ball.interior(), &[b]);
        assert_eq!(ball.boundary(), &[0, 2]);

        let big = g.ball(0, 10).unwrap();
        assert!(big.boundary().is_empty());
        assert!(big.covers_graph());
        assert!(g.ball(0, 0).is_err());
        assert!(g.ball(9, 1).is_err());
    }

    #[test]
    fn star_center_ball() {
        let mut b = GraphBuilder::new();
        for leaf in ["p", "q", "r", "s"] {
            b.add_edge("hub", leaf, 2.0).unwrap();
        }
        let g = b.build().unwrap();
        let hub = g.vertex("hub").unwrap();
        let ball = g.ball(hub, 1).unwrap();
        assert_eq!(ball.interior(), &[hub]);
        let mut nbrs: Vec<usize> = g.neighbors(hub).map(|(y, _)| y).collect();
        nbrs.sort();
        assert_eq!(ball.boundary(), nbrs.as_slice());
    }

    #[test]
    fn builder_rejects_bad_input() {
        let mut b = GraphBuilder::new();
        b.add_edge("a", "b", 1.0).unwrap();
        assert!(b.add_edge("b", "a", 2.0).is_err());
        assert!(b.add_edge("b", "a", 1.0).is_ok());
        assert!(b.add_edge("a", "a", 1.0).is_err());
        assert!(b.add_edge("a", "c", -1.0).is_err());
        assert!(b.set_measure("a", 0.0).is_err());

        let mut d = GraphBuilder::new();
        d.add_edge("a", "b", 1.0).unwrap();
        d.add_edge("c", "d", 1.0).unwrap();
        assert!(matches!(d.build(), Err(Error::Input(m)) if m.contains("not connected")));

        let mut m = GraphBuilder::new();
        m.add_edge("a", "b", 1.0).unwrap();
        m.set_measure("zz", 1.0).unwrap();
        assert!(m.build().is_err());
    }

    #[test]
    fn support_checks() {
        let g = path_abc();
        let ball = g.ball(1, 1).unwrap();
        assert!(ball.check_support(&ball.extend(&[3.0])).is_ok());
        assert!(ball.check_support(&VertexFunction::constant(3, 1.0)).is_err());
    }
}
