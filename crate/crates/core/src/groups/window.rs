//! Finite windows of a group: word-metric balls with their coset structure
//! and the truncated relative Cayley graph.

use std::collections::{HashMap, VecDeque};
use std::sync::{Arc, OnceLock};

use rayon::prelude::*;

use super::{Element, GroupError, GroupSpec, Syllable};
use crate::metric::{Dist, FiniteMetricSpace, Point, Subspace};

/// Element cap for window enumeration.
pub const DEFAULT_BUDGET: usize = 200_000;

/// Dense relative metrics are only built up to this many elements.
const REL_DENSE_LIMIT: usize = 6_000;

/// A finite set of group elements closed under prefixes of normal forms,
/// with exact word metric and the window-confined relative graph.
#[derive(Debug)]
pub struct GroupWindow {
    spec: Arc<GroupSpec>,
    radius: u64,
    syllable_cap: Option<usize>,
    elements: Vec<Element>,
    index: HashMap<Element, Point>,
    s_edges: Vec<(Point, Point)>,
    /// `classes[i]` partitions the window into cosets of factor `i`; each
    /// class is sorted, so its first point is the shortlex-least element.
    classes: Vec<Vec<Vec<Point>>>,
    class_of: Vec<Vec<usize>>,
    s_space: Arc<FiniteMetricSpace>,
    rel_space: OnceLock<Arc<FiniteMetricSpace>>,
}

pub fn enumerate_ball(spec: &GroupSpec, n: u64) -> Result<GroupWindow, GroupError> {
    enumerate_ball_with_budget(spec, n, DEFAULT_BUDGET)
}

/// All elements of word length at most `n`, found by breadth-first search
/// over the generators.
pub fn enumerate_ball_with_budget(spec: &GroupSpec, n: u64, budget: usize) -> Result<GroupWindow, GroupError> {
    spec.validate()?;
    let gens = spec.generators();
    let e = spec.identity();
    let mut seen: HashMap<Element, u64> = HashMap::from([(e.clone(), 0)]);
    let mut frontier = vec![e];
    for depth in 1..=n {
        let mut next = Vec::new();
        for g in &frontier {
            for s in &gens {
                let h = spec.multiply(g, s);
                if !seen.contains_key(&h) {
                    seen.insert(h.clone(), depth);
                    next.push(h);
                    if seen.len() > budget {
                        return Err(GroupError::BudgetExceeded(budget));
                    }
                }
            }
        }
        if next.is_empty() {
            break;
        }
        frontier = next;
    }
    let elements: Vec<Element> = seen.into_keys().collect();
    Ok(GroupWindow::seal(spec, n, None, elements, format!("ball{n}")))
}

/// Elements of word length at most `n` whose normal form has at most `m`
/// syllables. Only meaningful for free products.
pub fn enumerate_relative_window(spec: &GroupSpec, n: u64, m: usize) -> Result<GroupWindow, GroupError> {
    spec.validate()?;
    let GroupSpec::FreeProduct { factors } = spec else {
        return Err(GroupError::NoPeripherals);
    };
    let mut factor_balls = Vec::with_capacity(factors.len());
    for f in factors {
        let w = enumerate_ball(f, n)?;
        let mut nontrivial: Vec<(Element, u64)> = w
            .elements
            .into_iter()
            .filter(|g| !f.is_identity(g))
            .map(|g| {
                let len = f.length_unchecked(&g);
                (g, len)
            })
            .collect();
        nontrivial.sort_by(|a, b| a.1.cmp(&b.1).then_with(|| a.0.cmp(&b.0)));
        factor_balls.push(nontrivial);
    }
    let mut elements = vec![spec.identity()];
    let mut stack: Vec<(Vec<Syllable>, u64)> = vec![(Vec::new(), 0)];
    while let Some((word, len)) = stack.pop() {
        if word.len() == m {
            continue;
        }
        let last = word.last().map(|s| s.factor);
        for (i, ball) in factor_balls.iter().enumerate() {
            if Some(i) == last {
                continue;
            }
            for (g, l) in ball {
                if len + l > n {
                    break;
                }
                let mut w = word.clone();
                w.push(Syllable { factor: i, elem: g.clone() });
                elements.push(Element::Product(w.clone()));
                if elements.len() > DEFAULT_BUDGET {
                    return Err(GroupError::BudgetExceeded(DEFAULT_BUDGET));
                }
                stack.push((w, len + l));
            }
        }
    }
    Ok(GroupWindow::seal(spec, n, Some(m), elements, format!("ball{n}-syl{m}")))
}

impl GroupWindow {
    fn seal(spec: &GroupSpec, radius: u64, syllable_cap: Option<usize>, mut elements: Vec<Element>, id: String) -> Self {
        elements.sort_by(|a, b| spec.shortlex(a, b));
        let index: HashMap<Element, Point> = elements.iter().cloned().enumerate().map(|(i, g)| (g, i)).collect();
        let gens = spec.generators();
        let mut s_edges: Vec<(Point, Point)> = elements
            .par_iter()
            .enumerate()
            .flat_map_iter(|(i, g)| {
                gens.iter()
                    .filter_map(|s| index.get(&spec.multiply(g, s)).copied())
                    .filter(move |&j| j > i)
                    .map(move |j| (i, j))
                    .collect::<Vec<_>>()
            })
            .collect();
        s_edges.sort_unstable();
        s_edges.dedup();
        let peripherals = spec.peripheral_count();
        let mut classes = Vec::with_capacity(peripherals);
        let mut class_of = Vec::with_capacity(peripherals);
        for i in 0..peripherals {
            let mut by_key: HashMap<Element, usize> = HashMap::new();
            let mut cls: Vec<Vec<Point>> = Vec::new();
            let mut of = vec![0; elements.len()];
            for (p, g) in elements.iter().enumerate() {
                let key = spec.coset_key(g, i).expect("free product");
                let c = *by_key.entry(key).or_insert_with(|| {
                    cls.push(Vec::new());
                    cls.len() - 1
                });
                cls[c].push(p);
                of[p] = c;
            }
            classes.push(cls);
            class_of.push(of);
        }
        let spec = Arc::new(spec.clone());
        let s_space = Arc::new(
            FiniteMetricSpace::from_group(id, spec.clone(), elements.clone(), Some(s_edges.clone()))
                .expect("normal forms have distinct names"),
        );
        Self {
            spec,
            radius,
            syllable_cap,
            elements,
            index,
            s_edges,
            classes,
            class_of,
            s_space,
            rel_space: OnceLock::new(),
        }
    }

    pub fn spec(&self) -> &Arc<GroupSpec> {
        &self.spec
    }

    /// The word-length radius `N`.
    pub fn radius(&self) -> u64 {
        self.radius
    }

    /// Syllable bound of a relative window, `None` for a plain ball.
    pub fn syllable_cap(&self) -> Option<usize> {
        self.syllable_cap
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn elements(&self) -> &[Element] {
        &self.elements
    }

    pub fn element(&self, p: Point) -> &Element {
        &self.elements[p]
    }

    pub fn point_of(&self, g: &Element) -> Option<Point> {
        self.index.get(g).copied()
    }

    /// The identity is always point 0.
    pub fn identity_point(&self) -> Point {
        0
    }

    pub fn s_edges(&self) -> &[(Point, Point)] {
        &self.s_edges
    }

    /// The window with the exact word metric.
    pub fn s_space(&self) -> &Arc<FiniteMetricSpace> {
        &self.s_space
    }

    pub fn peripheral_count(&self) -> usize {
        self.classes.len()
    }

    /// Coset classes of factor `i` within the window.
    pub fn coset_classes(&self, i: usize) -> &[Vec<Point>] {
        &self.classes[i]
    }

    pub fn coset_class_of(&self, i: usize, p: Point) -> usize {
        self.class_of[i][p]
    }

    /// ℋ-edges: pairs in a common coset of some factor.
    pub fn h_edges(&self) -> Vec<(Point, Point)> {
        let mut out = Vec::new();
        for cls in &self.classes {
            for c in cls {
                for (a, &x) in c.iter().enumerate() {
                    out.extend(c[a + 1..].iter().map(|&y| (x, y)));
                }
            }
        }
        out.sort_unstable();
        out.dedup();
        out
    }

    /// Edges of the relative graph: S-edges plus ℋ-edges.
    pub fn rel_edges(&self) -> Vec<(Point, Point)> {
        let mut out = self.s_edges.clone();
        out.extend(self.h_edges());
        out.sort_unstable();
        out.dedup();
        out
    }

    /// Relative-graph distances from `src`, using paths inside the window.
    pub fn rel_distances_from(&self, src: Point) -> Vec<u32> {
        let n = self.len();
        let mut adj = vec![Vec::new(); n];
        for &(a, b) in &self.s_edges {
            adj[a].push(b);
            adj[b].push(a);
        }
        self.bfs(&adj, src)
    }

    fn bfs(&self, adj: &[Vec<Point>], src: Point) -> Vec<u32> {
        let n = self.len();
        let mut dist = vec![u32::MAX; n];
        let mut expanded: Vec<Vec<bool>> = self.classes.iter().map(|c| vec![false; c.len()]).collect();
        dist[src] = 0;
        let mut queue = VecDeque::from([src]);
        while let Some(u) = queue.pop_front() {
            let next = dist[u] + 1;
            for &v in &adj[u] {
                if dist[v] == u32::MAX {
                    dist[v] = next;
                    queue.push_back(v);
                }
            }
            // a whole coset is one ℋ-step away; expand each class once
            for (i, cls) in self.classes.iter().enumerate() {
                let c = self.class_of[i][u];
                if expanded[i][c] {
                    continue;
                }
                expanded[i][c] = true;
                for &v in &cls[c] {
                    if dist[v] == u32::MAX {
                        dist[v] = next;
                        queue.push_back(v);
                    }
                }
            }
        }
        dist
    }

    /// The window with the relative-graph metric, a dense table.
    pub fn rel_space(&self) -> Result<&Arc<FiniteMetricSpace>, GroupError> {
        if self.classes.is_empty() {
            return Err(GroupError::NoPeripherals);
        }
        if self.len() > REL_DENSE_LIMIT {
            return Err(GroupError::BudgetExceeded(REL_DENSE_LIMIT));
        }
        Ok(self.rel_space.get_or_init(|| {
            let n = self.len();
            let mut adj = vec![Vec::new(); n];
            for &(a, b) in &self.s_edges {
                adj[a].push(b);
                adj[b].push(a);
            }
            let rows: Vec<Vec<u32>> = (0..n).into_par_iter().map(|s| self.bfs(&adj, s)).collect();
            let dense = rows.concat();
            let id = format!("rel-{}", self.s_space.id());
            Arc::new(FiniteMetricSpace::from_trusted_matrix(
                id,
                self.s_space.names().to_vec(),
                dense,
                Some(self.rel_edges()),
            ))
        }))
    }

    fn require_peripherals(&self) -> Result<(), GroupError> {
        if self.classes.is_empty() {
            Err(GroupError::NoPeripherals)
        } else {
            Ok(())
        }
    }

    pub fn subspace(&self, pts: Vec<Point>) -> Subspace {
        Subspace::new(self.s_space.clone(), pts).expect("window points")
    }
}

/// `B(n)`: window points within relative distance `n` of the identity,
/// carrying the word metric. Truncated to the window.
pub fn relative_ball(w: &GroupWindow, n: Dist) -> Result<Subspace, GroupError> {
    w.require_peripherals()?;
    let dist = w.rel_distances_from(w.identity_point());
    let pts = (0..w.len()).filter(|&p| (dist[p] as Dist) <= n).collect();
    Ok(w.subspace(pts))
}

/// Cosets `rH_i ∩ window` meeting `base`, each with its shortlex-least
/// representative, ordered by representative.
pub fn coset_partition(w: &GroupWindow, i: usize, base: &Subspace) -> Result<Vec<(Point, Subspace)>, GroupError> {
    w.require_peripherals()?;
    if i >= w.peripheral_count() {
        return Err(GroupError::UnsupportedSpec(format!("no peripheral subgroup {i}")));
    }
    let mut hit: Vec<usize> = base.points().iter().map(|&p| w.class_of[i][p]).collect();
    hit.sort_unstable();
    hit.dedup();
    let mut out: Vec<(Point, Subspace)> = hit
        .into_iter()
        .map(|c| {
            let cls = &w.classes[i][c];
            (cls[0], w.subspace(cls.clone()))
        })
        .collect();
    out.sort_by_key(|(r, _)| *r);
    Ok(out)
}

/// Left translate `gX`; every image must lie in the window.
pub fn translate(w: &GroupWindow, g: &Element, x: &Subspace) -> Result<Subspace, GroupError> {
    let act = TranslationAction::new(w.spec.clone(), g.clone())?;
    let pts = act.map_points(w, w, x.points())?;
    Ok(w.subspace(pts))
}

/// Left multiplication by a fixed element.
#[derive(Clone, Debug)]
pub struct TranslationAction {
    spec: Arc<GroupSpec>,
    g: Element,
}

impl TranslationAction {
    pub fn new(spec: Arc<GroupSpec>, g: Element) -> Result<Self, GroupError> {
        spec.check(&g)?;
        Ok(Self { spec, g })
    }

    pub fn element(&self) -> &Element {
        &self.g
    }

    pub fn apply(&self, x: &Element) -> Element {
        self.spec.multiply(&self.g, x)
    }

    pub fn inverse(&self) -> Self {
        Self { spec: self.spec.clone(), g: self.spec.inverse(&self.g) }
    }

    /// Images of window points of `from` as points of `to`.
    pub fn map_points(&self, from: &GroupWindow, to: &GroupWindow, pts: &[Point]) -> Result<Vec<Point>, GroupError> {
        pts.iter()
            .map(|&p| {
                let img = self.apply(from.element(p));
                to.point_of(&img).ok_or_else(|| GroupError::LeavesWindow(self.spec.format(&img)))
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn z() -> GroupSpec {
        GroupSpec::FreeAbelian { rank: 1 }
    }

    fn f2_product() -> GroupSpec {
        GroupSpec::free_product(vec![z(), z()])
    }

    fn names(s: &Subspace) -> Vec<String> {
        let mut v: Vec<String> = s.names().into_iter().map(String::from).collect();
        v.sort();
        v
    }

    #[test]
    fn ball_sizes() {
        assert_eq!(enumerate_ball(&GroupSpec::Free { rank: 2 }, 2).unwrap().len(), 17);
        assert_eq!(enumerate_ball(&GroupSpec::FreeAbelian { rank: 2 }, 2).unwrap().len(), 13);
        assert_eq!(enumerate_ball(&GroupSpec::Cyclic { order: 3 }, 5).unwrap().len(), 3);
        assert_eq!(enumerate_ball(&f2_product(), 2).unwrap().len(), 17);
    }

    #[test]
    fn budget_enforced() {
        let err = enumerate_ball_with_budget(&GroupSpec::Free { rank: 2 }, 5, 100).unwrap_err();
        assert_eq!(err, GroupError::BudgetExceeded(100));
    }

    #[test]
    fn identity_first() {
        let w = enumerate_ball(&f2_product(), 3).unwrap();
        assert_eq!(w.s_space().name(0), "e");
    }

    #[test]
    fn relative_ball_examples() {
        let w = enumerate_ball(&f2_product(), 4).unwrap();
        let b1 = relative_ball(&w, 1).unwrap();
        assert_eq!(b1.len(), 17);
        for name in b1.names() {
            let g = w.spec().parse(name).unwrap();
            assert!(w.spec().is_identity(&g) || w.spec().in_factor(&g, 0) || w.spec().in_factor(&g, 1));
        }
        assert_eq!(names(&relative_ball(&w, 0).unwrap()), vec!["e"]);
        let plain = enumerate_ball(&GroupSpec::Free { rank: 2 }, 2).unwrap();
        assert_eq!(relative_ball(&plain, 1).unwrap_err(), GroupError::NoPeripherals);
    }

    #[test]
    fn coset_partitions() {
        let w = enumerate_ball(&f2_product(), 4).unwrap();
        let e = w.subspace(vec![0]);
        let parts = coset_partition(&w, 0, &e).unwrap();
        assert_eq!(parts.len(), 1);
        assert_eq!(parts[0].1.len(), 9);

        let b = w.point_of(&w.spec().parse("b").unwrap()).unwrap();
        let parts = coset_partition(&w, 0, &w.subspace(vec![0, b])).unwrap();
        let reps: Vec<&str> = parts.iter().map(|(r, _)| w.s_space().name(*r)).collect();
        assert_eq!(reps, vec!["e", "b"]);

        let ball1: Vec<Point> = (0..w.len()).filter(|&p| w.spec().length_unchecked(w.element(p)) <= 1).collect();
        let parts = coset_partition(&w, 0, &w.subspace(ball1)).unwrap();
        let mut reps: Vec<&str> = parts.iter().map(|(r, _)| w.s_space().name(*r)).collect();
        reps.sort();
        assert_eq!(reps, vec!["b", "b^-1", "e"]);
    }

    #[test]
    fn translations() {
        let w = enumerate_ball(&f2_product(), 4).unwrap();
        let sp = w.spec().clone();
        let x = Subspace::from_names(w.s_space().clone(), &["e", "b"]).unwrap();
        assert_eq!(translate(&w, &sp.identity(), &x).unwrap(), x);
        let ax = translate(&w, &sp.parse("a").unwrap(), &x).unwrap();
        assert_eq!(names(&ax), vec!["a", "ab"]);
        assert_eq!(ax.diameter(), 1);
        let a = Subspace::from_names(w.s_space().clone(), &["a"]).unwrap();
        let err = translate(&w, &sp.parse("a^4").unwrap(), &a).unwrap_err();
        assert_eq!(err, GroupError::LeavesWindow("a^5".into()));
    }

    #[test]
    fn relative_window_contents() {
        let w = enumerate_relative_window(&f2_product(), 3, 2).unwrap();
        // e, 12 one-syllable, and x^i y^j with i + j ≤ 3
        assert_eq!(w.len(), 1 + 12 + 8 * 3);
        let rel = w.rel_distances_from(0);
        assert!(rel.iter().all(|&d| d <= 2));
    }

    #[test]
    fn rel_space_is_contraction_of_word_metric() {
        let w = enumerate_ball(&GroupSpec::free_product(vec![GroupSpec::Cyclic { order: 2 }, GroupSpec::Cyclic { order: 3 }]), 6)
            .unwrap();
        let rel = w.rel_space().unwrap();
        for a in 0..w.len() {
            for b in 0..w.len() {
                assert!(rel.dist(a, b) <= w.s_space().dist(a, b));
            }
        }
    }
}
