//! Weighted finite graphs, vertex functions, potentials and their wells.
//!
//! Vertex identifiers are opaque strings. Internally every vertex gets a dense
//! index in insertion order, and all kernels work on those indices. The
//! mapping never changes after construction and is what result files use to
//! key values back to ids.

use std::collections::{HashMap, HashSet, VecDeque};
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// An undirected edge stored once, read symmetrically.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub x: usize,
    pub y: usize,
    pub w: f64,
}

/// Vertex set, symmetric edge weights and vertex measure.
///
/// Construction rejects structural defects (self-loops, duplicate edges,
/// unknown endpoints, non-finite numbers). The analytic hypotheses (positive
/// weights, uniformly positive measure, bounded weighted degree,
/// connectivity) are checked by [`validate_graph`].
#[derive(Debug, Clone)]
pub struct WeightedGraph {
    ids: Vec<String>,
    index: HashMap<String, usize>,
    mu: Vec<f64>,
    edges: Vec<Edge>,
    adj: Vec<Vec<(usize, f64)>>,
}

impl WeightedGraph {
    pub fn new(ids: Vec<String>, mu: Vec<f64>, edges: &[(usize, usize, f64)]) -> Result<Self> {
        if ids.len() != mu.len() {
            return Err(Error::LengthMismatch {
                expected: ids.len(),
                got: mu.len(),
            });
        }
        let mut index = HashMap::with_capacity(ids.len());
        for (i, id) in ids.iter().enumerate() {
            if index.insert(id.clone(), i).is_some() {
                return Err(Error::DuplicateVertex(id.clone()));
            }
        }
        if let Some(i) = mu.iter().position(|m| !m.is_finite()) {
            return Err(Error::NonFiniteResult(format!("measure at `{}`", ids[i])));
        }
        let n = ids.len();
        let mut seen = HashSet::with_capacity(edges.len());
        let mut adj = vec![Vec::new(); n];
        let mut stored = Vec::with_capacity(edges.len());
        for &(x, y, w) in edges {
            if x >= n {
                return Err(Error::VertexIndex(x));
            }
            if y >= n {
                return Err(Error::VertexIndex(y));
            }
            if x == y {
                return Err(Error::SelfLoop(ids[x].clone()));
            }
            if !w.is_finite() {
                return Err(Error::NonFiniteResult(format!(
                    "weight of {{{}, {}}}",
                    ids[x], ids[y]
                )));
            }
            if !seen.insert((x.min(y), x.max(y))) {
                return Err(Error::DuplicateEdge(ids[x].clone(), ids[y].clone()));
            }
            adj[x].push((y, w));
            adj[y].push((x, w));
            stored.push(Edge { x, y, w });
        }
        Ok(WeightedGraph {
            ids,
            index,
            mu,
            edges: stored,
            adj,
        })
    }

    /// Builds a graph from id-labelled edges.
    pub fn from_labeled(
        ids: Vec<String>,
        mu: Vec<f64>,
        edges: &[(String, String, f64)],
    ) -> Result<Self> {
        let lookup: HashMap<&str, usize> = ids
            .iter()
            .enumerate()
            .map(|(i, id)| (id.as_str(), i))
            .collect();
        let mut indexed = Vec::with_capacity(edges.len());
        for (x, y, w) in edges {
            let xi = *lookup
                .get(x.as_str())
                .ok_or_else(|| Error::UnknownVertex(x.clone()))?;
            let yi = *lookup
                .get(y.as_str())
                .ok_or_else(|| Error::UnknownVertex(y.clone()))?;
            indexed.push((xi, yi, *w));
        }
        Self::new(ids, mu, &indexed)
    }

    /// Path `0 - 1 - ... - (n-1)` with unit weights and unit measure.
    pub fn path(n: usize) -> Self {
        let edges: Vec<_> = (1..n).map(|i| (i - 1, i, 1.0)).collect();
        Self::new(numbered_ids(n), vec![1.0; n], &edges).expect("path is well formed")
    }

    /// Cycle on `n >= 3` vertices with unit weights and unit measure.
    pub fn cycle(n: usize) -> Self {
        assert!(n >= 3, "a cycle needs at least three vertices");
        let mut edges: Vec<_> = (1..n).map(|i| (i - 1, i, 1.0)).collect();
        edges.push((n - 1, 0, 1.0));
        Self::new(numbered_ids(n), vec![1.0; n], &edges).expect("cycle is well formed")
    }

    /// `rows x cols` grid, row-major ids, unit weights and unit measure.
    pub fn grid(rows: usize, cols: usize) -> Self {
        let mut edges = Vec::new();
        for r in 0..rows {
            for c in 0..cols {
                let i = r * cols + c;
                if c + 1 < cols {
                    edges.push((i, i + 1, 1.0));
                }
                if r + 1 < rows {
                    edges.push((i, i + cols, 1.0));
                }
            }
        }
        let n = rows * cols;
        Self::new(numbered_ids(n), vec![1.0; n], &edges).expect("grid is well formed")
    }

    /// Returns a copy with a different vertex measure.
    pub fn with_measure(&self, mu: Vec<f64>) -> Result<Self> {
        let edges: Vec<_> = self.edges.iter().map(|e| (e.x, e.y, e.w)).collect();
        Self::new(self.ids.clone(), mu, &edges)
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn id(&self, i: usize) -> &str {
        &self.ids[i]
    }

    pub fn index_of(&self, id: &str) -> Result<usize> {
        self.index
            .get(id)
            .copied()
            .ok_or_else(|| Error::UnknownVertex(id.to_string()))
    }

    pub fn mu(&self) -> &[f64] {
        &self.mu
    }

    pub fn mu_min(&self) -> f64 {
        self.mu.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    /// Neighbours of `x` together with the edge weight.
    pub fn neighbors(&self, x: usize) -> &[(usize, f64)] {
        &self.adj[x]
    }

    /// Weight lookup; zero when `x` and `y` are not adjacent.
    pub fn weight(&self, x: usize, y: usize) -> f64 {
        self.adj[x]
            .iter()
            .find(|(z, _)| *z == y)
            .map_or(0.0, |&(_, w)| w)
    }

    /// `sum_{y ~ x} w_xy`.
    pub fn weighted_degree(&self, x: usize) -> f64 {
        self.adj[x].iter().map(|&(_, w)| w).sum()
    }

    /// Combinatorial distance from `source`; `None` for unreachable vertices.
    pub fn distances_from(&self, source: usize) -> Vec<Option<usize>> {
        let mut dist = vec![None; self.len()];
        let mut queue = VecDeque::new();
        dist[source] = Some(0);
        queue.push_back(source);
        while let Some(x) = queue.pop_front() {
            let d = dist[x].unwrap_or(0);
            for &(y, _) in &self.adj[x] {
                if dist[y].is_none() {
                    dist[y] = Some(d + 1);
                    queue.push_back(y);
                }
            }
        }
        dist
    }

    /// Whether the subgraph induced by `subset` is connected. Empty sets are not.
    pub fn is_connected_within(&self, subset: &VertexSubset) -> bool {
        let Some(start) = subset.iter().next() else {
            return false;
        };
        let mut seen = vec![false; self.len()];
        let mut stack = vec![start];
        seen[start] = true;
        let mut count = 1;
        while let Some(x) = stack.pop() {
            for &(y, _) in &self.adj[x] {
                if subset.contains(y) && !seen[y] {
                    seen[y] = true;
                    count += 1;
                    stack.push(y);
                }
            }
        }
        count == subset.len()
    }

    pub fn is_connected(&self) -> bool {
        self.is_connected_within(&VertexSubset::full(self.len()))
    }

    /// Vertex with the lexicographically smallest id.
    pub fn smallest_id_vertex(&self) -> usize {
        (0..self.len())
            .min_by(|&i, &j| self.ids[i].cmp(&self.ids[j]))
            .expect("graph has at least one vertex")
    }
}

fn numbered_ids(n: usize) -> Vec<String> {
    (0..n).map(|i| i.to_string()).collect()
}

/// Outcome of checking the standing graph hypotheses.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub violations: Vec<String>,
    pub mu_min: f64,
    pub max_weighted_degree: f64,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks positive weights, uniformly positive measure, the weighted-degree
/// bound `sum_{y~x} w_xy < c_deg` and connectivity.
pub fn validate_graph(g: &WeightedGraph, c_deg: f64) -> ValidationReport {
    let mut violations = Vec::new();
    if g.is_empty() {
        violations.push("graph has no vertices".to_string());
        return ValidationReport {
            violations,
            mu_min: f64::NAN,
            max_weighted_degree: 0.0,
        };
    }
    for e in g.edges() {
        if e.w <= 0.0 {
            violations.push(format!(
                "edge weight not positive on {{{}, {}}}",
                g.id(e.x),
                g.id(e.y)
            ));
        }
    }
    let mu_min = g.mu_min();
    if mu_min <= 0.0 {
        violations.push("measure not uniformly positive".to_string());
    }
    let mut max_deg: f64 = 0.0;
    for x in 0..g.len() {
        let d = g.weighted_degree(x);
        max_deg = max_deg.max(d);
        if d >= c_deg {
            violations.push(format!(
                "weighted degree {d} at `{}` is not below {c_deg}",
                g.id(x)
            ));
        }
    }
    if !g.is_connected() {
        violations.push("not connected".to_string());
    }
    ValidationReport {
        violations,
        mu_min,
        max_weighted_degree: max_deg,
    }
}

/// Real-valued function on the vertices, stored by dense vertex index.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct VertexFunction(Vec<f64>);

impl VertexFunction {
    pub fn new(values: Vec<f64>) -> Self {
        VertexFunction(values)
    }

    pub fn zeros(n: usize) -> Self {
        VertexFunction(vec![0.0; n])
    }

    pub fn constant(n: usize, c: f64) -> Self {
        VertexFunction(vec![c; n])
    }

    /// Indicator of a subset.
    pub fn indicator(set: &VertexSubset) -> Self {
        VertexFunction(
            (0..set.universe())
                .map(|i| if set.contains(i) { 1.0 } else { 0.0 })
                .collect(),
        )
    }

    pub fn from_fn(n: usize, f: impl FnMut(usize) -> f64) -> Self {
        VertexFunction((0..n).map(f).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.0
    }

    pub fn into_values(self) -> Vec<f64> {
        self.0
    }

    pub fn get(&self, x: usize) -> f64 {
        self.0[x]
    }

    pub fn scaled(&self, c: f64) -> Self {
        VertexFunction(self.0.iter().map(|v| v * c).collect())
    }

    pub fn sup_norm(&self) -> f64 {
        self.0.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&v| v == 0.0)
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|v| v.is_finite())
    }

    /// Checks that this function lives on `g`.
    pub fn check_on(&self, g: &WeightedGraph) -> Result<()> {
        if self.len() != g.len() {
            return Err(Error::LengthMismatch {
                expected: g.len(),
                got: self.len(),
            });
        }
        if !self.is_finite() {
            return Err(Error::NonFiniteResult("vertex function".into()));
        }
        Ok(())
    }
}

impl std::ops::Index<usize> for VertexFunction {
    type Output = f64;

    fn index(&self, x: usize) -> &f64 {
        &self.0[x]
    }
}

impl std::ops::IndexMut<usize> for VertexFunction {
    fn index_mut(&mut self, x: usize) -> &mut f64 {
        &mut self.0[x]
    }
}

/// The unknown pair `(u, v)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairState {
    pub u: VertexFunction,
    pub v: VertexFunction,
}

impl PairState {
    pub fn new(u: VertexFunction, v: VertexFunction) -> Self {
        assert_eq!(u.len(), v.len(), "pair components on different vertex sets");
        PairState { u, v }
    }

    pub fn zeros(n: usize) -> Self {
        PairState::new(VertexFunction::zeros(n), VertexFunction::zeros(n))
    }

    pub fn len(&self) -> usize {
        self.u.len()
    }

    pub fn is_empty(&self) -> bool {
        self.u.is_empty()
    }

    pub fn scaled(&self, t: f64) -> Self {
        PairState {
            u: self.u.scaled(t),
            v: self.v.scaled(t),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.u.is_zero() && self.v.is_zero()
    }

    /// `self + h * dir`.
    pub fn axpy(&self, h: f64, dir: &PairState) -> Self {
        let add = |a: &VertexFunction, b: &VertexFunction| {
            VertexFunction::new(
                a.values()
                    .iter()
                    .zip(b.values())
                    .map(|(x, y)| x + h * y)
                    .collect(),
            )
        };
        PairState {
            u: add(&self.u, &dir.u),
            v: add(&self.v, &dir.v),
        }
    }

    pub fn sup_norm(&self) -> f64 {
        self.u.sup_norm().max(self.v.sup_norm())
    }

    /// Flattened `[u..., v...]`.
    pub fn to_flat(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(2 * self.len());
        out.extend_from_slice(self.u.values());
        out.extend_from_slice(self.v.values());
        out
    }

    pub fn from_flat(flat: &[f64]) -> Self {
        let n = flat.len() / 2;
        PairState::new(
            VertexFunction::new(flat[..n].to_vec()),
            VertexFunction::new(flat[n..].to_vec()),
        )
    }

    pub fn check_on(&self, g: &WeightedGraph) -> Result<()> {
        self.u.check_on(g)?;
        self.v.check_on(g)
    }
}

/// A set of vertices of one graph, stored as a membership mask.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct VertexSubset {
    mask: Vec<bool>,
}

impl VertexSubset {
    pub fn empty(n: usize) -> Self {
        VertexSubset {
            mask: vec![false; n],
        }
    }

    pub fn full(n: usize) -> Self {
        VertexSubset {
            mask: vec![true; n],
        }
    }

    pub fn from_indices(n: usize, members: impl IntoIterator<Item = usize>) -> Result<Self> {
        let mut mask = vec![false; n];
        for i in members {
            if i >= n {
                return Err(Error::VertexIndex(i));
            }
            mask[i] = true;
        }
        Ok(VertexSubset { mask })
    }

    pub fn from_ids<'a>(g: &WeightedGraph, ids: impl IntoIterator<Item = &'a str>) -> Result<Self> {
        let mut set = Self::empty(g.len());
        for id in ids {
            set.mask[g.index_of(id)?] = true;
        }
        Ok(set)
    }

    pub fn from_mask(mask: Vec<bool>) -> Self {
        VertexSubset { mask }
    }

    /// Size of the ambient vertex set.
    pub fn universe(&self) -> usize {
        self.mask.len()
    }

    pub fn contains(&self, x: usize) -> bool {
        self.mask.get(x).copied().unwrap_or(false)
    }

    pub fn len(&self) -> usize {
        self.mask.iter().filter(|&&m| m).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.mask.iter().any(|&m| m)
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.mask
            .iter()
            .enumerate()
            .filter_map(|(i, &m)| m.then_some(i))
    }

    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    pub fn intersection(&self, other: &VertexSubset) -> VertexSubset {
        VertexSubset {
            mask: self
                .mask
                .iter()
                .zip(&other.mask)
                .map(|(a, b)| *a && *b)
                .collect(),
        }
    }

    pub fn union(&self, other: &VertexSubset) -> VertexSubset {
        VertexSubset {
            mask: self
                .mask
                .iter()
                .zip(&other.mask)
                .map(|(a, b)| *a || *b)
                .collect(),
        }
    }

    pub fn is_disjoint(&self, other: &VertexSubset) -> bool {
        self.intersection(other).is_empty()
    }

    pub fn ids<'g>(&self, g: &'g WeightedGraph) -> Vec<&'g str> {
        self.iter().map(|i| g.id(i)).collect()
    }
}

/// `{y in V \ omega : y ~ x for some x in omega}`.
pub fn boundary(g: &WeightedGraph, omega: &VertexSubset) -> VertexSubset {
    let mut mask = vec![false; g.len()];
    for x in omega.iter() {
        for &(y, _) in g.neighbors(x) {
            if !omega.contains(y) {
                mask[y] = true;
            }
        }
    }
    VertexSubset { mask }
}

/// `omega` together with its boundary.
pub fn closure(g: &WeightedGraph, omega: &VertexSubset) -> VertexSubset {
    omega.union(&boundary(g, omega))
}

/// Potentials `a, b >= 0` and the tolerance deciding `a(x) = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct PotentialPair {
    pub a: VertexFunction,
    pub b: VertexFunction,
    pub zero_tol: f64,
}

impl PotentialPair {
    pub fn new(a: VertexFunction, b: VertexFunction, zero_tol: f64) -> Result<Self> {
        if a.len() != b.len() {
            return Err(Error::LengthMismatch {
                expected: a.len(),
                got: b.len(),
            });
        }
        if !(zero_tol >= 0.0) {
            return Err(Error::InvalidConfig(format!(
                "zero_tol must be nonnegative, got {zero_tol}"
            )));
        }
        for f in [&a, &b] {
            if let Some(i) = f.values().iter().position(|v| !v.is_finite()) {
                return Err(Error::NonFiniteResult(format!("potential at index {i}")));
            }
            if let Some(i) = f.values().iter().position(|&v| v < 0.0) {
                return Err(Error::NegativePotential(i.to_string()));
            }
        }
        Ok(PotentialPair { a, b, zero_tol })
    }

    /// Zero potentials: every vertex belongs to both wells.
    pub fn zero(n: usize) -> Self {
        PotentialPair {
            a: VertexFunction::zeros(n),
            b: VertexFunction::zeros(n),
            zero_tol: 0.0,
        }
    }

    pub fn check_on(&self, g: &WeightedGraph) -> Result<()> {
        self.a.check_on(g)?;
        self.b.check_on(g)?;
        if let Some(i) = self.a.values().iter().position(|&v| v < 0.0) {
            return Err(Error::NegativePotential(g.id(i).to_string()));
        }
        if let Some(i) = self.b.values().iter().position(|&v| v < 0.0) {
            return Err(Error::NegativePotential(g.id(i).to_string()));
        }
        Ok(())
    }

    fn zero_set(&self, f: &VertexFunction) -> VertexSubset {
        VertexSubset::from_mask(f.values().iter().map(|&v| v <= self.zero_tol).collect())
    }
}

/// The wells `Omega_a`, `Omega_b`, their intersection and boundaries.
#[derive(Debug, Clone, PartialEq)]
pub struct Wells {
    pub omega_a: VertexSubset,
    pub omega_b: VertexSubset,
    pub both: VertexSubset,
    pub boundary_a: VertexSubset,
    pub boundary_b: VertexSubset,
}

impl Wells {
    pub fn closure_a(&self) -> VertexSubset {
        self.omega_a.union(&self.boundary_a)
    }

    pub fn closure_b(&self) -> VertexSubset {
        self.omega_b.union(&self.boundary_b)
    }

    pub fn either(&self) -> VertexSubset {
        self.omega_a.union(&self.omega_b)
    }
}

/// Zero sets of the potentials; each of them and their intersection must be
/// nonempty and connected.
pub fn wells(g: &WeightedGraph, pot: &PotentialPair) -> Result<Wells> {
    pot.check_on(g)?;
    let omega_a = pot.zero_set(&pot.a);
    let omega_b = pot.zero_set(&pot.b);
    let both = omega_a.intersection(&omega_b);
    for (name, set) in [
        ("Omega_a", &omega_a),
        ("Omega_b", &omega_b),
        ("Omega_a ∩ Omega_b", &both),
    ] {
        if set.is_empty() {
            return Err(Error::EmptyWell(name));
        }
        if !g.is_connected_within(set) {
            return Err(Error::DisconnectedWell(name));
        }
    }
    Ok(Wells {
        boundary_a: boundary(g, &omega_a),
        boundary_b: boundary(g, &omega_b),
        omega_a,
        omega_b,
        both,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VertexRecord {
    pub id: String,
    pub mu: f64,
    pub a: f64,
    pub b: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgeRecord {
    pub x: String,
    pub y: String,
    pub w: f64,
}

/// On-disk graph: `{"vertices": [{id, mu, a, b}], "edges": [{x, y, w}]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphFile {
    pub vertices: Vec<VertexRecord>,
    pub edges: Vec<EdgeRecord>,
}

impl GraphFile {
    pub fn read(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::parse(path, &e))
    }

    /// Builds graph and potentials and enforces every graph hypothesis.
    pub fn into_instance(
        self,
        c_deg: f64,
        zero_tol: f64,
    ) -> Result<(WeightedGraph, PotentialPair)> {
        let ids: Vec<String> = self.vertices.iter().map(|v| v.id.clone()).collect();
        let mu: Vec<f64> = self.vertices.iter().map(|v| v.mu).collect();
        let edges: Vec<_> = self
            .edges
            .iter()
            .map(|e| (e.x.clone(), e.y.clone(), e.w))
            .collect();
        let g = WeightedGraph::from_labeled(ids, mu, &edges)?;
        let report = validate_graph(&g, c_deg);
        if !report.passed() {
            return Err(Error::InvalidGraph(report.violations.join("; ")));
        }
        let a = VertexFunction::new(self.vertices.iter().map(|v| v.a).collect());
        let b = VertexFunction::new(self.vertices.iter().map(|v| v.b).collect());
        let pot = PotentialPair::new(a, b, zero_tol).map_err(|e| match e {
            Error::NegativePotential(i) => {
                let i: usize = i.parse().unwrap_or(0);
                Error::NegativePotential(self.vertices[i].id.clone())
            }
            other => other,
        })?;
        Ok((g, pot))
    }

    pub fn from_instance(g: &WeightedGraph, pot: &PotentialPair) -> Self {
        GraphFile {
            vertices: (0..g.len())
                .map(|i| VertexRecord {
                    id: g.id(i).to_string(),
                    mu: g.mu()[i],
                    a: pot.a[i],
                    b: pot.b[i],
                })
                .collect(),
            edges: g
                .edges()
                .iter()
                .map(|e| EdgeRecord {
                    x: g.id(e.x).to_string(),
                    y: g.id(e.y).to_string(),
                    w: e.w,
                })
                .collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ids(g: &WeightedGraph, s: &VertexSubset) -> Vec<String> {
        s.ids(g).into_iter().map(String::from).collect()
    }

    #[test]
    fn minimal_path_passes_validation() {
        let g = WeightedGraph::path(3);
        let r = validate_graph(&g, 10.0);
        assert!(r.passed(), "{:?}", r.violations);
        assert_eq!(r.mu_min, 1.0);
    }

    #[test]
    fn zero_measure_is_reported() {
        let g = WeightedGraph::path(3)
            .with_measure(vec![1.0, 0.0, 1.0])
            .unwrap();
        let r = validate_graph(&g, 10.0);
        assert!(!r.passed());
        assert!(r
            .violations
            .iter()
            .any(|v| v == "measure not uniformly positive"));
    }

    #[test]
    fn disconnected_graph_is_reported() {
        let g =
            WeightedGraph::new(numbered_ids(4), vec![1.0; 4], &[(0, 1, 1.0), (2, 3, 1.0)]).unwrap();
        let r = validate_graph(&g, 10.0);
        assert_eq!(r.violations, vec!["not connected".to_string()]);
    }

    #[test]
    fn degree_bound_and_weights_are_checked() {
        let g = WeightedGraph::new(numbered_ids(3), vec![1.0; 3], &[(0, 1, 6.0), (1, 2, -1.0)])
            .unwrap();
        let r = validate_graph(&g, 5.5);
        assert_eq!(r.violations.len(), 2);
        assert_eq!(r.max_weighted_degree, 6.0);
    }

    #[test]
    fn structural_defects_are_rejected() {
        assert!(matches!(
            WeightedGraph::new(numbered_ids(2), vec![1.0; 2], &[(0, 0, 1.0)]),
            Err(Error::SelfLoop(_))
        ));
        assert!(matches!(
            WeightedGraph::new(numbered_ids(2), vec![1.0; 2], &[(0, 1, 1.0), (1, 0, 2.0)]),
            Err(Error::DuplicateEdge(..))
        ));
        assert!(matches!(
            WeightedGraph::new(vec!["a".into(), "a".into()], vec![1.0; 2], &[]),
            Err(Error::DuplicateVertex(_))
        ));
    }

    #[test]
    fn boundary_of_interval_on_path() {
        let g = WeightedGraph::path(5);
        let omega = VertexSubset::from_indices(5, [1, 2]).unwrap();
        assert_eq!(ids(&g, &boundary(&g, &omega)), vec!["0", "3"]);

        let all = VertexSubset::full(5);
        assert!(boundary(&g, &all).is_empty());

        let g3 = WeightedGraph::path(3);
        let single = VertexSubset::from_indices(3, [0]).unwrap();
        assert_eq!(ids(&g3, &boundary(&g3, &single)), vec!["1"]);
    }

    #[test]
    fn wells_read_off_zero_sets() {
        let g = WeightedGraph::path(6);
        let pot = PotentialPair::new(
            VertexFunction::new(vec![1.0, 0.0, 0.0, 0.0, 1.0, 1.0]),
            VertexFunction::new(vec![1.0, 1.0, 0.0, 0.0, 0.0, 1.0]),
            0.0,
        )
        .unwrap();
        let w = wells(&g, &pot).unwrap();
        assert_eq!(ids(&g, &w.omega_a), vec!["1", "2", "3"]);
        assert_eq!(ids(&g, &w.omega_b), vec!["2", "3", "4"]);
        assert_eq!(ids(&g, &w.both), vec!["2", "3"]);
        assert_eq!(ids(&g, &w.boundary_a), vec!["0", "4"]);
    }

    #[test]
    fn empty_and_disconnected_wells() {
        let g = WeightedGraph::path(3);
        let ones = VertexFunction::constant(3, 1.0);
        let pot = PotentialPair::new(ones.clone(), ones.clone(), 0.0).unwrap();
        assert!(matches!(wells(&g, &pot), Err(Error::EmptyWell(_))));

        let split = VertexFunction::new(vec![0.0, 1.0, 0.0]);
        let pot = PotentialPair::new(split.clone(), split, 0.0).unwrap();
        assert!(matches!(wells(&g, &pot), Err(Error::DisconnectedWell(_))));
    }

    #[test]
    fn zero_tol_widens_wells() {
        let g = WeightedGraph::path(3);
        let a = VertexFunction::new(vec![1e-13, 0.0, 1.0]);
        let exact = PotentialPair::new(a.clone(), a.clone(), 0.0).unwrap();
        assert_eq!(wells(&g, &exact).unwrap().omega_a.len(), 1);
        let loose = PotentialPair::new(a.clone(), a, 1e-12).unwrap();
        assert_eq!(wells(&g, &loose).unwrap().omega_a.len(), 2);
    }

    #[test]
    fn graph_file_rejects_asymmetric_duplicates() {
        let text = r#"{
            "vertices": [{"id": "p", "mu": 1, "a": 0, "b": 0}, {"id": "q", "mu": 1, "a": 0, "b": 0}],
            "edges": [{"x": "p", "y": "q", "w": 1}, {"x": "q", "y": "p", "w": 2}]
        }"#;
        let file: GraphFile = serde_json::from_str(text).unwrap();
        assert!(matches!(
            file.into_instance(10.0, 0.0),
            Err(Error::DuplicateEdge(..))
        ));
    }

    #[test]
    fn graph_file_round_trip() {
        let g = WeightedGraph::grid(2, 3);
        let pot = PotentialPair::zero(6);
        let file = GraphFile::from_instance(&g, &pot);
        let (g2, pot2) = file.clone().into_instance(10.0, 0.0).unwrap();
        assert_eq!(g2.ids(), g.ids());
        assert_eq!(g2.edges(), g.edges());
        assert_eq!(pot2, pot);
    }

    #[test]
    fn distances_and_smallest_id() {
        let g = WeightedGraph::cycle(6);
        let d = g.distances_from(0);
        assert_eq!(d[3], Some(3));
        assert_eq!(d[5], Some(1));
        let g = WeightedGraph::from_labeled(
            vec!["b".into(), "a".into()],
            vec![1.0, 1.0],
            &[("a".into(), "b".into(), 1.0)],
        )
        .unwrap();
        assert_eq!(g.smallest_id_vertex(), 1);
    }
}
