//! Minimal decompositions: an exhaustive oracle over colorings, a net-based
//! heuristic, and scale-by-scale profiles.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::metric::{r_components_of, Dist, FiniteMetricSpace, Point, Subspace};
use crate::witness::{DecompositionWitness, TargetClass};

pub const DEFAULT_MAX_POINTS: usize = 12;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SearchError {
    #[error("{points} points exceed the exhaustive cutoff of {limit}")]
    TooLarge { points: usize, limit: usize },
    #[error("no decomposition with at most {max_k} colors")]
    NotFound { max_k: u32 },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SearchMode {
    Exhaustive,
    Heuristic,
    /// Exhaustive within the cutoff, heuristic beyond it.
    Auto,
}

#[derive(Clone, Copy, Debug)]
pub struct SearchBudget {
    pub max_k: u32,
    pub max_points: usize,
    pub mode: SearchMode,
}

impl Default for SearchBudget {
    fn default() -> Self {
        Self { max_k: 4, max_points: DEFAULT_MAX_POINTS, mode: SearchMode::Auto }
    }
}

#[derive(Clone, Debug)]
pub struct OracleResult {
    pub k: u32,
    pub witness: DecompositionWitness,
}

/// Smallest `k ≤ max_k` admitting a `(k, r)`-decomposition into pieces of
/// diameter at most `d`, with the lexicographically smallest coloring.
pub fn oracle_min_k(s: &Subspace, r: Dist, d: Dist, max_k: u32) -> Result<OracleResult, SearchError> {
    oracle_min_k_with(s, r, d, max_k, DEFAULT_MAX_POINTS)
}

pub fn oracle_min_k_with(
    s: &Subspace,
    r: Dist,
    d: Dist,
    max_k: u32,
    max_points: usize,
) -> Result<OracleResult, SearchError> {
    let n = s.len();
    if n > max_points {
        return Err(SearchError::TooLarge { points: n, limit: max_points });
    }
    let amb = s.ambient();
    let pts = s.points();
    for k in 1..=max_k {
        if let Some(colors) = first_coloring(amb, pts, r, d, k) {
            let witness = DecompositionWitness::from_coloring(s.clone(), k, r, TargetClass::Bounded(d), &colors);
            return Ok(OracleResult { k, witness });
        }
    }
    Err(SearchError::NotFound { max_k })
}

/// Points assigned in prefix order; prefixes of this length are searched in
/// parallel.
const PARALLEL_PREFIX: usize = 4;

fn first_coloring(amb: &FiniteMetricSpace, pts: &[Point], r: Dist, d: Dist, k: u32) -> Option<Vec<u32>> {
    let n = pts.len();
    let search = Colorer { amb, pts, r, d, k };
    if n <= PARALLEL_PREFIX + 2 {
        let mut colors = Vec::with_capacity(n);
        return search.extend(&mut colors).then_some(colors);
    }
    let mut prefixes = Vec::new();
    search.prefixes(&mut Vec::new(), PARALLEL_PREFIX, &mut prefixes);
    // prefixes are generated in lexicographic order, so the first hit wins
    prefixes.into_par_iter().find_map_first(|mut colors| search.extend(&mut colors).then_some(colors))
}

struct Colorer<'a> {
    amb: &'a FiniteMetricSpace,
    pts: &'a [Point],
    r: Dist,
    d: Dist,
    k: u32,
}

impl Colorer<'_> {
    /// Whether the component of the newest point within its color class,
    /// among points colored so far, stays within the diameter bound.
    fn admissible(&self, colors: &[u32]) -> bool {
        let last = colors.len() - 1;
        let c = colors[last];
        let mut comp = vec![last];
        let mut in_comp = vec![false; colors.len()];
        in_comp[last] = true;
        let mut head = 0;
        while head < comp.len() {
            let u = comp[head];
            head += 1;
            for v in 0..colors.len() {
                if !in_comp[v] && colors[v] == c && self.amb.dist(self.pts[u], self.pts[v]) <= self.r {
                    in_comp[v] = true;
                    comp.push(v);
                }
            }
        }
        comp.iter().all(|&u| comp.iter().all(|&v| self.amb.dist(self.pts[u], self.pts[v]) <= self.d))
    }

    fn choices(&self, colors: &[u32]) -> u32 {
        let used = colors.iter().max().map_or(0, |&m| m + 1);
        (used + 1).min(self.k)
    }

    fn extend(&self, colors: &mut Vec<u32>) -> bool {
        if colors.len() == self.pts.len() {
            return true;
        }
        for c in 0..self.choices(colors) {
            colors.push(c);
            if self.admissible(colors) && self.extend(colors) {
                return true;
            }
            colors.pop();
        }
        false
    }

    fn prefixes(&self, colors: &mut Vec<u32>, depth: usize, out: &mut Vec<Vec<u32>>) {
        if depth == 0 {
            out.push(colors.clone());
            return;
        }
        for c in 0..self.choices(colors) {
            colors.push(c);
            if self.admissible(colors) {
                self.prefixes(colors, depth - 1, out);
            }
            colors.pop();
        }
    }
}

/// Net-based decomposition: Voronoi cells around a maximal set of centers
/// pairwise more than `⌊d/2⌋` apart, conflicting cells merged when the union
/// stays within `d`, then greedy coloring of the remaining conflicts. The
/// result always verifies.
pub fn heuristic_decompose(s: &Subspace, r: Dist, d: Dist) -> DecompositionWitness {
    let target = TargetClass::Bounded(d);
    if s.diameter() <= d {
        return DecompositionWitness::trivial(s.clone(), r, target);
    }
    let amb = s.ambient();
    let pts = s.points();
    let half = d / 2;
    let mut centers: Vec<Point> = Vec::new();
    for &p in pts {
        if centers.iter().all(|&c| amb.dist(p, c) > half) {
            centers.push(p);
        }
    }
    let owner: Vec<usize> = pts
        .par_iter()
        .map(|&p| {
            (0..centers.len())
                .min_by_key(|&i| (amb.dist(p, centers[i]), i))
                .expect("at least one center")
        })
        .collect();
    let mut cells: Vec<Vec<Point>> = vec![Vec::new(); centers.len()];
    for (&p, &o) in pts.iter().zip(&owner) {
        cells[o].push(p);
    }
    let cells = merge_cells(amb, cells, r, d);
    let mut classes = color_cells(amb, &cells, r);
    if pts.len() <= FIRST_FIT_LIMIT {
        let alt = first_fit(amb, pts, r, d);
        if alt.len() < classes.len() {
            classes = alt;
        }
    }
    let k = classes.len() as u32;
    let mut w = DecompositionWitness::from_pieces(s.clone(), r, target, classes);
    w.k = k.max(1);
    w
}

/// Point-by-point first-fit is cubic; only tried on small spaces.
const FIRST_FIT_LIMIT: usize = 400;

/// Each point takes the first color whose `r`-component through it stays
/// within diameter `d`; pieces are the resulting components.
fn first_fit(amb: &FiniteMetricSpace, pts: &[Point], r: Dist, d: Dist) -> Vec<Vec<Vec<Point>>> {
    let mut classes: Vec<Vec<Point>> = Vec::new();
    for &p in pts {
        let fits = |cls: &Vec<Point>| {
            let mut with = cls.clone();
            with.push(p);
            let comp = r_components_of(amb, &with, r).into_iter().find(|c| c.contains(&p)).expect("p present");
            cell_diameter(amb, &comp) <= d
        };
        match classes.iter().position(fits) {
            Some(c) => classes[c].push(p),
            None => classes.push(vec![p]),
        }
    }
    classes.iter().map(|cls| r_components_of(amb, cls, r)).collect()
}

fn cell_distance(amb: &FiniteMetricSpace, a: &[Point], b: &[Point]) -> Dist {
    a.iter().flat_map(|&x| b.iter().map(move |&y| amb.dist(x, y))).min().unwrap_or(Dist::MAX)
}

fn cell_diameter(amb: &FiniteMetricSpace, a: &[Point]) -> Dist {
    a.iter().flat_map(|&x| a.iter().map(move |&y| amb.dist(x, y))).max().unwrap_or(0)
}

fn merge_cells(amb: &FiniteMetricSpace, mut cells: Vec<Vec<Point>>, r: Dist, d: Dist) -> Vec<Vec<Point>> {
    loop {
        let m = cells.len();
        let merge = (0..m).into_par_iter().find_map_first(|i| {
            (i + 1..m).find(|&j| {
                cell_distance(amb, &cells[i], &cells[j]) <= r && {
                    let mut u = cells[i].clone();
                    u.extend(&cells[j]);
                    cell_diameter(amb, &u) <= d
                }
            })
            .map(|j| (i, j))
        });
        let Some((i, j)) = merge else { break };
        let moved = cells.remove(j);
        cells[i].extend(moved);
        cells[i].sort_unstable();
    }
    cells
}

/// Greedy coloring of the conflict graph (cells within distance `r`), in
/// natural order and in decreasing-degree order; the smaller wins.
fn color_cells(amb: &FiniteMetricSpace, cells: &[Vec<Point>], r: Dist) -> Vec<Vec<Vec<Point>>> {
    let m = cells.len();
    let adj: Vec<Vec<usize>> = (0..m)
        .into_par_iter()
        .map(|i| (0..m).filter(|&j| j != i && cell_distance(amb, &cells[i], &cells[j]) <= r).collect())
        .collect();
    let greedy = |order: &[usize]| {
        let mut color = vec![u32::MAX; m];
        for &i in order {
            let mut c = 0;
            while adj[i].iter().any(|&j| color[j] == c) {
                c += 1;
            }
            color[i] = c;
        }
        color
    };
    let natural: Vec<usize> = (0..m).collect();
    let mut by_degree = natural.clone();
    by_degree.sort_by_key(|&i| (std::cmp::Reverse(adj[i].len()), i));
    let a = greedy(&natural);
    let b = greedy(&by_degree);
    let count = |c: &[u32]| c.iter().max().map_or(0, |&x| x + 1);
    let color = if count(&b) < count(&a) { b } else { a };
    let mut classes: Vec<Vec<Vec<Point>>> = vec![Vec::new(); count(&color) as usize];
    for (i, &c) in color.iter().enumerate() {
        classes[c as usize].push(cells[i].clone());
    }
    classes
}

/// How the diameter bound depends on the scale in a profile.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DRule {
    Linear { mul: Dist, add: Dist },
    Constant(Dist),
}

impl Default for DRule {
    fn default() -> Self {
        DRule::Linear { mul: 2, add: 0 }
    }
}

impl DRule {
    pub fn eval(&self, r: Dist) -> Dist {
        match *self {
            DRule::Linear { mul, add } => mul * r + add,
            DRule::Constant(d) => d,
        }
    }
}

#[derive(Clone, Debug)]
pub struct ProfileRow {
    pub r: Dist,
    pub d: Dist,
    pub k: u32,
    /// Whether `k` is the exact minimum.
    pub exact: bool,
    pub witness: DecompositionWitness,
}

/// Minimal (or best heuristic) number of colors at each scale.
pub fn asdim_profile(
    s: &Subspace,
    scales: &[Dist],
    rule: DRule,
    budget: SearchBudget,
) -> Result<Vec<ProfileRow>, SearchError> {
    scales
        .iter()
        .map(|&r| {
            let d = rule.eval(r);
            let exhaustive = match budget.mode {
                SearchMode::Exhaustive => true,
                SearchMode::Heuristic => false,
                SearchMode::Auto => s.len() <= budget.max_points,
            };
            if exhaustive {
                match oracle_min_k_with(s, r, d, budget.max_k, budget.max_points) {
                    Ok(o) => return Ok(ProfileRow { r, d, k: o.k, exact: true, witness: o.witness }),
                    Err(e) if budget.mode == SearchMode::Exhaustive => return Err(e),
                    Err(_) => {}
                }
            }
            let w = heuristic_decompose(s, r, d);
            Ok(ProfileRow { r, d, k: w.k, exact: false, witness: w })
        })
        .collect()
}

/// Canonical pieces of a coloring, as used by the oracle.
pub fn pieces_of_coloring(s: &Subspace, r: Dist, colors: &[u32]) -> Vec<Vec<Point>> {
    let k = colors.iter().max().map_or(0, |&m| m + 1);
    let mut out = Vec::new();
    for c in 0..k {
        let cls: Vec<Point> = s.points().iter().zip(colors).filter(|(_, &x)| x == c).map(|(&p, _)| p).collect();
        out.extend(r_components_of(s.ambient(), &cls, r));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generate;

    fn whole(sp: std::sync::Arc<FiniteMetricSpace>) -> Subspace {
        Subspace::whole(sp)
    }

    #[test]
    fn landmarks() {
        assert_eq!(oracle_min_k(&whole(generate::path(1)), 5, 0, 4).unwrap().k, 1);
        assert_eq!(oracle_min_k(&whole(generate::path(10)), 2, 3, 4).unwrap().k, 2);
        assert_eq!(oracle_min_k(&whole(generate::grid(3, 3)), 2, 2, 4).unwrap().k, 3);
        assert_eq!(oracle_min_k(&whole(generate::grid(3, 3)), 1, 0, 4).unwrap().k, 2);
        assert_eq!(oracle_min_k(&whole(generate::complete(5)), 2, 1, 4).unwrap().k, 1);
    }

    #[test]
    fn oracle_witness_is_valid_and_lexicographic() {
        let o = oracle_min_k(&whole(generate::path(10)), 2, 3, 4).unwrap();
        assert!(o.witness.verify().valid);
        let colors: Vec<u32> = (0..10).map(|p| o.witness.label(p).unwrap().color).collect();
        assert_eq!(colors, vec![0, 0, 0, 0, 1, 1, 0, 0, 0, 0]);
    }

    #[test]
    fn oracle_limits() {
        let big = whole(generate::path(13));
        assert_eq!(
            oracle_min_k(&big, 1, 1, 4).unwrap_err(),
            SearchError::TooLarge { points: 13, limit: 12 }
        );
        let k5 = whole(generate::complete(5));
        assert_eq!(oracle_min_k(&k5, 1, 0, 4).unwrap_err(), SearchError::NotFound { max_k: 4 });
    }

    #[test]
    fn heuristic_examples() {
        let p = whole(generate::path(10));
        let w = heuristic_decompose(&p, 2, 4);
        assert!(w.verify().valid);
        assert!(w.k <= 3);

        let g = whole(generate::grid(3, 3));
        let w = heuristic_decompose(&g, 1, 0);
        assert!(w.verify().valid);
        assert_eq!(w.k, 2);

        let k5 = whole(generate::complete(5));
        let w = heuristic_decompose(&k5, 2, 1);
        assert_eq!(w.k, 1);
        assert_eq!(w.pieces().len(), 1);
    }

    #[test]
    fn profiles() {
        let p = whole(generate::path(10));
        let rows = asdim_profile(&p, &[1, 2], DRule::default(), SearchBudget { max_points: 10, ..Default::default() })
            .unwrap();
        let ks: Vec<(Dist, u32)> = rows.iter().map(|r| (r.r, r.k)).collect();
        assert_eq!(ks, vec![(1, 2), (2, 2)]);
        assert!(rows.iter().all(|r| r.exact));

        let k5 = whole(generate::complete(5));
        let rows = asdim_profile(&k5, &[1, 2, 3], DRule::Constant(1), SearchBudget::default()).unwrap();
        assert!(rows.iter().all(|r| r.k == 1));

        let g = whole(generate::grid(5, 5));
        let rows = asdim_profile(&g, &[2], DRule::Constant(4), SearchBudget::default()).unwrap();
        assert!(!rows[0].exact);
        assert!(rows[0].k <= 3, "k = {}", rows[0].k);
        assert!(rows[0].witness.verify().valid);
    }

    #[test]
    fn exhaustive_mode_refuses_large_spaces() {
        let g = whole(generate::grid(5, 5));
        let budget = SearchBudget { mode: SearchMode::Exhaustive, ..Default::default() };
        assert!(matches!(asdim_profile(&g, &[2], DRule::Constant(4), budget), Err(SearchError::TooLarge { .. })));
    }
}
