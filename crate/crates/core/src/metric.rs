//! Exact finite metric spaces, subspaces, metric families and r-components.
//!
//! Distances are nonnegative integers. A space is either given by an explicit
//! distance table, by the hop metric of a connected graph, or by the word
//! metric of a group evaluated on normal forms.

use std::collections::{HashMap, VecDeque};
use std::fmt;
use std::sync::{Arc, OnceLock};

use rayon::prelude::*;
use thiserror::Error;

use crate::groups::{Element, GroupSpec};

pub type Point = usize;
pub type Dist = u64;

/// Group-backed spaces up to this many points cache their distance matrix.
const GROUP_CACHE_LIMIT: usize = 2500;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MetricError {
    #[error("metric axiom violated: {0}")]
    MetricAxiomViolation(String),
    #[error("distance missing for pair ({0}, {1})")]
    MissingDistance(String, String),
    #[error("unknown point {0:?}")]
    UnknownPoint(String),
    #[error("duplicate point {0:?}")]
    DuplicatePoint(String),
    #[error("graph is disconnected: no path from {0} to {1}")]
    DisconnectedGraph(String, String),
    #[error("empty set")]
    EmptySet,
    #[error("subspaces live in different ambient spaces ({0} vs {1})")]
    AmbientMismatch(String, String),
    #[error("point set is not contained in the ambient space")]
    NotSubspace,
}

#[derive(Debug)]
enum Backing {
    Dense(Vec<u32>),
    Group {
        spec: Arc<GroupSpec>,
        elements: Vec<Element>,
        cache: OnceLock<Option<Vec<u32>>>,
    },
}

/// A finite point set with an exact integer metric. Immutable once built.
#[derive(Debug)]
pub struct FiniteMetricSpace {
    id: String,
    names: Vec<String>,
    index: HashMap<String, Point>,
    edges: Option<Vec<(Point, Point)>>,
    backing: Backing,
}

fn name_index(names: &[String]) -> Result<HashMap<String, Point>, MetricError> {
    let mut index = HashMap::with_capacity(names.len());
    for (i, n) in names.iter().enumerate() {
        if index.insert(n.clone(), i).is_some() {
            return Err(MetricError::DuplicatePoint(n.clone()));
        }
    }
    Ok(index)
}

impl FiniteMetricSpace {
    /// Builds a space from an explicit distance list and validates the metric
    /// axioms. Every unordered pair of distinct points must be listed.
    pub fn build(
        id: impl Into<String>,
        names: Vec<String>,
        distances: &[(String, String, Dist)],
    ) -> Result<Self, MetricError> {
        let index = name_index(&names)?;
        let n = names.len();
        let mut d: Vec<Option<Dist>> = vec![None; n * n];
        for i in 0..n {
            d[i * n + i] = Some(0);
        }
        for (a, b, w) in distances {
            let i = *index.get(a).ok_or_else(|| MetricError::UnknownPoint(a.clone()))?;
            let j = *index.get(b).ok_or_else(|| MetricError::UnknownPoint(b.clone()))?;
            if i == j {
                if *w != 0 {
                    return Err(MetricError::MetricAxiomViolation(format!(
                        "d({a},{a}) = {w} ≠ 0"
                    )));
                }
                continue;
            }
            for (x, y) in [(i, j), (j, i)] {
                match d[x * n + y] {
                    Some(old) if old != *w => {
                        return Err(MetricError::MetricAxiomViolation(format!(
                            "asymmetric distance for ({a},{b}): {old} vs {w}"
                        )))
                    }
                    _ => d[x * n + y] = Some(*w),
                }
            }
        }
        let mut dense = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                match d[i * n + j] {
                    Some(w) => dense.push(w as u32),
                    None => {
                        return Err(MetricError::MissingDistance(
                            names[i].clone(),
                            names[j].clone(),
                        ))
                    }
                }
            }
        }
        for i in 0..n {
            for j in 0..n {
                if i != j && dense[i * n + j] == 0 {
                    return Err(MetricError::MetricAxiomViolation(format!(
                        "d({},{}) = 0 for distinct points",
                        names[i], names[j]
                    )));
                }
            }
        }
        for y in 0..n {
            for x in 0..n {
                let dxy = dense[x * n + y];
                for z in 0..n {
                    if dense[x * n + z] > dxy + dense[y * n + z] {
                        return Err(MetricError::MetricAxiomViolation(format!(
                            "triangle inequality fails: d({},{}) = {} > d({},{}) + d({},{}) = {}",
                            names[x],
                            names[z],
                            dense[x * n + z],
                            names[x],
                            names[y],
                            names[y],
                            names[z],
                            dxy + dense[y * n + z]
                        )));
                    }
                }
            }
        }
        Ok(Self { id: id.into(), names, index, edges: None, backing: Backing::Dense(dense) })
    }

    /// Shortest-path hop metric of a connected graph.
    pub fn from_graph(
        id: impl Into<String>,
        names: Vec<String>,
        edges: &[(String, String)],
    ) -> Result<Self, MetricError> {
        let index = name_index(&names)?;
        let mut idx_edges = Vec::with_capacity(edges.len());
        for (a, b) in edges {
            let i = *index.get(a).ok_or_else(|| MetricError::UnknownPoint(a.clone()))?;
            let j = *index.get(b).ok_or_else(|| MetricError::UnknownPoint(b.clone()))?;
            idx_edges.push((i, j));
        }
        Self::from_indexed_graph(id, names, idx_edges)
    }

    pub(crate) fn from_indexed_graph(
        id: impl Into<String>,
        names: Vec<String>,
        edges: Vec<(Point, Point)>,
    ) -> Result<Self, MetricError> {
        let index = name_index(&names)?;
        let n = names.len();
        let mut adj = vec![Vec::new(); n];
        for &(i, j) in &edges {
            if i != j {
                adj[i].push(j);
                adj[j].push(i);
            }
        }
        let rows: Vec<Vec<u32>> = (0..n)
            .into_par_iter()
            .map(|s| {
                let mut dist = vec![u32::MAX; n];
                dist[s] = 0;
                let mut queue = VecDeque::from([s]);
                while let Some(u) = queue.pop_front() {
                    for &v in &adj[u] {
                        if dist[v] == u32::MAX {
                            dist[v] = dist[u] + 1;
                            queue.push_back(v);
                        }
                    }
                }
                dist
            })
            .collect();
        let mut dense = Vec::with_capacity(n * n);
        for (i, row) in rows.into_iter().enumerate() {
            if let Some(j) = row.iter().position(|&d| d == u32::MAX) {
                return Err(MetricError::DisconnectedGraph(names[i].clone(), names[j].clone()));
            }
            dense.extend(row);
        }
        Ok(Self { id: id.into(), names, index, edges: Some(edges), backing: Backing::Dense(dense) })
    }

    /// A space from a precomputed symmetric distance matrix known to be a
    /// metric (e.g. produced by breadth-first search).
    pub(crate) fn from_trusted_matrix(
        id: impl Into<String>,
        names: Vec<String>,
        dense: Vec<u32>,
        edges: Option<Vec<(Point, Point)>>,
    ) -> Self {
        let index = name_index(&names).expect("distinct names");
        assert_eq!(dense.len(), names.len() * names.len());
        Self { id: id.into(), names, index, edges, backing: Backing::Dense(dense) }
    }

    /// Word-metric space on the given distinct group elements.
    pub fn from_group(
        id: impl Into<String>,
        spec: Arc<GroupSpec>,
        elements: Vec<Element>,
        edges: Option<Vec<(Point, Point)>>,
    ) -> Result<Self, MetricError> {
        let names: Vec<String> = elements.iter().map(|g| spec.format(g)).collect();
        let index = name_index(&names)?;
        Ok(Self {
            id: id.into(),
            names,
            index,
            edges,
            backing: Backing::Group { spec, elements, cache: OnceLock::new() },
        })
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn name(&self, p: Point) -> &str {
        &self.names[p]
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn point(&self, name: &str) -> Option<Point> {
        self.index.get(name).copied()
    }

    pub fn edges(&self) -> Option<&[(Point, Point)]> {
        self.edges.as_deref()
    }

    pub fn group(&self) -> Option<(&Arc<GroupSpec>, &[Element])> {
        match &self.backing {
            Backing::Group { spec, elements, .. } => Some((spec, elements)),
            Backing::Dense(_) => None,
        }
    }

    /// Explicit distance matrix, if the space is table- or graph-backed.
    pub fn dense(&self) -> Option<&[u32]> {
        match &self.backing {
            Backing::Dense(d) => Some(d),
            Backing::Group { .. } => None,
        }
    }

    #[inline]
    pub fn dist(&self, a: Point, b: Point) -> Dist {
        match &self.backing {
            Backing::Dense(d) => d[a * self.names.len() + b] as Dist,
            Backing::Group { spec, elements, cache } => {
                let n = elements.len();
                let cached = cache.get_or_init(|| {
                    (n <= GROUP_CACHE_LIMIT).then(|| {
                        (0..n)
                            .into_par_iter()
                            .flat_map_iter(|i| {
                                let inv = spec.inverse(&elements[i]);
                                elements
                                    .iter()
                                    .map(move |h| spec.length_unchecked(&spec.multiply(&inv, h)) as u32)
                                    .collect::<Vec<_>>()
                            })
                            .collect()
                    })
                });
                match cached {
                    Some(m) => m[a * n + b] as Dist,
                    None => spec.distance(&elements[a], &elements[b]),
                }
            }
        }
    }

    pub fn diameter(&self) -> Dist {
        let n = self.len();
        (0..n)
            .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
            .map(|(i, j)| self.dist(i, j))
            .max()
            .unwrap_or(0)
    }
}

/// Builds a validated space; see [`FiniteMetricSpace::build`].
pub fn build_space(
    id: impl Into<String>,
    points: Vec<String>,
    distances: &[(String, String, Dist)],
) -> Result<Arc<FiniteMetricSpace>, MetricError> {
    FiniteMetricSpace::build(id, points, distances).map(Arc::new)
}

/// Hop metric of a graph; disconnected input is rejected.
pub fn graph_metric(
    id: impl Into<String>,
    vertices: Vec<String>,
    edges: &[(String, String)],
) -> Result<Arc<FiniteMetricSpace>, MetricError> {
    FiniteMetricSpace::from_graph(id, vertices, edges).map(Arc::new)
}

/// A subset of an ambient space carrying the induced metric. Points are kept
/// sorted and distinct.
#[derive(Clone)]
pub struct Subspace {
    ambient: Arc<FiniteMetricSpace>,
    pts: Vec<Point>,
}

impl fmt::Debug for Subspace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<&str> = self.pts.iter().map(|&p| self.ambient.name(p)).collect();
        write!(f, "{}{{{}}}", self.ambient.id(), names.join(","))
    }
}

impl PartialEq for Subspace {
    fn eq(&self, other: &Self) -> bool {
        self.same_ambient(other) && self.pts == other.pts
    }
}

impl Eq for Subspace {}

impl Subspace {
    pub fn new(ambient: Arc<FiniteMetricSpace>, mut pts: Vec<Point>) -> Result<Self, MetricError> {
        pts.sort_unstable();
        pts.dedup();
        if pts.last().is_some_and(|&p| p >= ambient.len()) {
            return Err(MetricError::NotSubspace);
        }
        Ok(Self { ambient, pts })
    }

    pub(crate) fn from_sorted(ambient: Arc<FiniteMetricSpace>, pts: Vec<Point>) -> Self {
        debug_assert!(pts.windows(2).all(|w| w[0] < w[1]));
        Self { ambient, pts }
    }

    pub fn whole(ambient: Arc<FiniteMetricSpace>) -> Self {
        let pts = (0..ambient.len()).collect();
        Self { ambient, pts }
    }

    pub fn empty(ambient: Arc<FiniteMetricSpace>) -> Self {
        Self { ambient, pts: Vec::new() }
    }

    pub fn from_names(ambient: Arc<FiniteMetricSpace>, names: &[&str]) -> Result<Self, MetricError> {
        let pts = names
            .iter()
            .map(|n| ambient.point(n).ok_or_else(|| MetricError::UnknownPoint(n.to_string())))
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(ambient, pts)
    }

    pub fn ambient(&self) -> &Arc<FiniteMetricSpace> {
        &self.ambient
    }

    pub fn points(&self) -> &[Point] {
        &self.pts
    }

    pub fn len(&self) -> usize {
        self.pts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pts.is_empty()
    }

    pub fn same_ambient(&self, other: &Subspace) -> bool {
        Arc::ptr_eq(&self.ambient, &other.ambient) || self.ambient.id() == other.ambient.id()
    }

    pub fn contains(&self, p: Point) -> bool {
        self.pts.binary_search(&p).is_ok()
    }

    pub fn is_subset_of(&self, other: &Subspace) -> bool {
        if !self.same_ambient(other) {
            return self.is_empty();
        }
        self.pts.iter().all(|&p| other.contains(p))
    }

    pub fn dist(&self, a: Point, b: Point) -> Dist {
        self.ambient.dist(a, b)
    }

    pub fn diameter(&self) -> Dist {
        let pts = &self.pts;
        let mut best = 0;
        for (i, &a) in pts.iter().enumerate() {
            for &b in &pts[i + 1..] {
                best = best.max(self.ambient.dist(a, b));
            }
        }
        best
    }

    /// Distance from a single ambient point to this set.
    pub fn dist_to_point(&self, p: Point) -> Option<Dist> {
        self.pts.iter().map(|&q| self.ambient.dist(p, q)).min()
    }

    fn check_ambient(&self, other: &Subspace) -> Result<(), MetricError> {
        if self.same_ambient(other) {
            Ok(())
        } else {
            Err(MetricError::AmbientMismatch(
                self.ambient.id().to_string(),
                other.ambient.id().to_string(),
            ))
        }
    }

    pub fn union(&self, other: &Subspace) -> Result<Subspace, MetricError> {
        self.check_ambient(other)?;
        let mut pts = self.pts.clone();
        pts.extend_from_slice(&other.pts);
        Subspace::new(self.ambient.clone(), pts)
    }

    pub fn intersect(&self, other: &Subspace) -> Result<Subspace, MetricError> {
        self.check_ambient(other)?;
        let pts = self.pts.iter().copied().filter(|&p| other.contains(p)).collect();
        Ok(Subspace::from_sorted(self.ambient.clone(), pts))
    }

    pub fn minus(&self, other: &Subspace) -> Result<Subspace, MetricError> {
        self.check_ambient(other)?;
        let pts = self.pts.iter().copied().filter(|&p| !other.contains(p)).collect();
        Ok(Subspace::from_sorted(self.ambient.clone(), pts))
    }

    pub fn filter(&self, mut keep: impl FnMut(Point) -> bool) -> Subspace {
        let pts = self.pts.iter().copied().filter(|&p| keep(p)).collect();
        Subspace::from_sorted(self.ambient.clone(), pts)
    }

    /// Copies the induced metric into a standalone space.
    pub fn to_space(&self, id: impl Into<String>) -> Arc<FiniteMetricSpace> {
        let names: Vec<String> = self.pts.iter().map(|&p| self.ambient.name(p).to_string()).collect();
        if let Some((spec, elements)) = self.ambient.group() {
            let elems = self.pts.iter().map(|&p| elements[p].clone()).collect();
            return Arc::new(
                FiniteMetricSpace::from_group(id, spec.clone(), elems, None).expect("distinct"),
            );
        }
        let n = self.pts.len();
        let mut dense = Vec::with_capacity(n * n);
        for &a in &self.pts {
            for &b in &self.pts {
                dense.push(self.ambient.dist(a, b) as u32);
            }
        }
        Arc::new(FiniteMetricSpace::from_trusted_matrix(id, names, dense, None))
    }

    pub fn names(&self) -> Vec<&str> {
        self.pts.iter().map(|&p| self.ambient.name(p)).collect()
    }
}

/// `d(A, B) = min` over cross pairs.
pub fn set_distance(a: &Subspace, b: &Subspace) -> Result<Dist, MetricError> {
    a.check_ambient(b)?;
    if a.is_empty() || b.is_empty() {
        return Err(MetricError::EmptySet);
    }
    let amb = a.ambient();
    let mut best = Dist::MAX;
    for &x in a.points() {
        for &y in b.points() {
            best = best.min(amb.dist(x, y));
            if best == 0 {
                return Ok(0);
            }
        }
    }
    Ok(best)
}

/// Classes of the transitive closure of `dist ≤ r` on `s`. Classes are sorted
/// by their smallest point.
pub fn r_components(s: &Subspace, r: Dist) -> Vec<Subspace> {
    r_components_of(s.ambient(), s.points(), r)
        .into_iter()
        .map(|c| Subspace::from_sorted(s.ambient().clone(), c))
        .collect()
}

pub(crate) fn r_components_of(amb: &FiniteMetricSpace, pts: &[Point], r: Dist) -> Vec<Vec<Point>> {
    let n = pts.len();
    let mut comp = vec![usize::MAX; n];
    let mut classes = Vec::new();
    for start in 0..n {
        if comp[start] != usize::MAX {
            continue;
        }
        let id = classes.len();
        comp[start] = id;
        let mut members = vec![start];
        let mut stack = vec![start];
        while let Some(u) = stack.pop() {
            for v in 0..n {
                if comp[v] == usize::MAX && amb.dist(pts[u], pts[v]) <= r {
                    comp[v] = id;
                    members.push(v);
                    stack.push(v);
                }
            }
        }
        let mut class: Vec<Point> = members.into_iter().map(|i| pts[i]).collect();
        class.sort_unstable();
        classes.push(class);
    }
    classes
}

/// A finite list of subspaces, possibly over different ambients.
#[derive(Clone, Debug, Default)]
pub struct MetricFamily {
    pub members: Vec<Subspace>,
    pub bound: Option<Dist>,
}

impl MetricFamily {
    pub fn new(members: Vec<Subspace>) -> Self {
        Self { members, bound: None }
    }

    pub fn single(member: Subspace) -> Self {
        Self::new(vec![member])
    }

    pub fn max_diameter(&self) -> Dist {
        self.members.iter().map(Subspace::diameter).max().unwrap_or(0)
    }

    /// Whether the stated bound holds for every member.
    pub fn bound_holds(&self) -> bool {
        self.bound.is_none_or(|d| self.members.iter().all(|m| m.diameter() <= d))
    }

    /// Canonical multiset form: nonempty members as (ambient id, points), sorted.
    pub fn canonical(&self) -> Vec<(String, Vec<Point>)> {
        canonical_family(self.members.iter())
    }
}

pub(crate) fn canonical_family<'a>(
    members: impl Iterator<Item = &'a Subspace>,
) -> Vec<(String, Vec<Point>)> {
    let mut out: Vec<(String, Vec<Point>)> = members
        .filter(|m| !m.is_empty())
        .map(|m| (m.ambient().id().to_string(), m.points().to_vec()))
        .collect();
    out.sort();
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generate;

    fn names(n: usize) -> Vec<String> {
        (0..n).map(|i| i.to_string()).collect()
    }

    #[test]
    fn singleton_space_has_zero_diameter() {
        let s = build_space("one", names(1), &[]).unwrap();
        assert_eq!(s.diameter(), 0);
    }

    #[test]
    fn triangle_violation_is_named() {
        let d = vec![
            ("a".into(), "b".into(), 1),
            ("b".into(), "c".into(), 1),
            ("a".into(), "c".into(), 3),
        ];
        let err = build_space("bad", vec!["a".into(), "b".into(), "c".into()], &d).unwrap_err();
        match err {
            MetricError::MetricAxiomViolation(msg) => assert!(msg.contains("d(a,c) = 3"), "{msg}"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn missing_pair_rejected() {
        let d = vec![("a".into(), "b".into(), 1)];
        let err = build_space("m", vec!["a".into(), "b".into(), "c".into()], &d).unwrap_err();
        assert!(matches!(err, MetricError::MissingDistance(..)));
    }

    #[test]
    fn path_distances_valid() {
        let d: Vec<_> = (0..10)
            .flat_map(|i| (i + 1..10).map(move |j| (i.to_string(), j.to_string(), (j - i) as Dist)))
            .collect();
        let p = build_space("p10", names(10), &d).unwrap();
        assert_eq!(p.diameter(), 9);
    }

    #[test]
    fn graph_metrics() {
        let c3 = generate::cycle(3);
        assert!((0..3).all(|i| (0..3).all(|j| c3.dist(i, j) == (i != j) as Dist)));
        let g = generate::grid(3, 3);
        assert_eq!(g.dist(g.point("0,0").unwrap(), g.point("2,2").unwrap()), 4);
        let err = graph_metric(
            "two",
            names(4),
            &[("0".into(), "1".into()), ("2".into(), "3".into())],
        )
        .unwrap_err();
        assert!(matches!(err, MetricError::DisconnectedGraph(..)));
    }

    #[test]
    fn set_distances() {
        let p = generate::path(10);
        let a = Subspace::new(p.clone(), vec![0, 1, 2]).unwrap();
        let b = Subspace::new(p.clone(), vec![7, 8, 9]).unwrap();
        assert_eq!(set_distance(&a, &b).unwrap(), 5);
        let s = Subspace::new(p.clone(), vec![4]).unwrap();
        assert_eq!(set_distance(&s, &s).unwrap(), 0);
        let e = Subspace::empty(p.clone());
        assert_eq!(set_distance(&a, &e), Err(MetricError::EmptySet));
        let q = generate::path(10);
        let other = Subspace::new(Arc::new(FiniteMetricSpace::from_trusted_matrix(
            "other",
            names(1),
            vec![0],
            None,
        )), vec![0])
        .unwrap();
        assert!(matches!(set_distance(&a, &other), Err(MetricError::AmbientMismatch(..))));
        let z = generate::path(6);
        let x = Subspace::new(z, vec![0]).unwrap();
        let y = Subspace::new(x.ambient().clone(), vec![5]).unwrap();
        assert_eq!(set_distance(&x, &y).unwrap(), 5);
        drop(q);
    }

    #[test]
    fn component_examples() {
        let p = generate::path(10);
        assert_eq!(r_components(&Subspace::whole(p.clone()), 1).len(), 1);
        let s = Subspace::new(p.clone(), vec![0, 1, 2, 7, 8, 9]).unwrap();
        let comps = r_components(&s, 3);
        assert_eq!(comps.len(), 2);
        assert_eq!(comps[0].points(), &[0, 1, 2]);
        assert_eq!(comps[1].points(), &[7, 8, 9]);
        assert_eq!(r_components(&s, 0).len(), 6);
    }
}
