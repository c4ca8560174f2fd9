//! Distance-control moduli and coarse map witnesses.

use std::sync::Arc;

use serde::Serialize;

use crate::metric::{Dist, FiniteMetricSpace, MetricError, Point};

/// A monotone step function given by a finite table. The value at `t` is the
/// entry with the largest key `≤ t`; the last entry extends rightward. Below
/// the first key the value is 0.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ModulusTable {
    entries: Vec<(Dist, Dist)>,
}

impl ModulusTable {
    pub fn new(mut entries: Vec<(Dist, Dist)>) -> Result<Self, MetricError> {
        entries.sort_unstable();
        entries.dedup();
        for w in entries.windows(2) {
            if w[0].0 == w[1].0 {
                return Err(MetricError::MetricAxiomViolation(format!(
                    "modulus table has two values at {}",
                    w[0].0
                )));
            }
            if w[1].1 < w[0].1 {
                return Err(MetricError::MetricAxiomViolation(format!(
                    "modulus table decreases between {} and {}",
                    w[0].0, w[1].0
                )));
            }
        }
        Ok(Self { entries })
    }

    /// Tabulates `f` on `0..=max`.
    pub fn from_fn(max: Dist, f: impl Fn(Dist) -> Dist) -> Result<Self, MetricError> {
        Self::new((0..=max).map(|t| (t, f(t))).collect())
    }

    pub fn identity(max: Dist) -> Self {
        Self::from_fn(max, |t| t).expect("identity is monotone")
    }

    pub fn eval(&self, t: Dist) -> Dist {
        match self.entries.partition_point(|&(k, _)| k <= t) {
            0 => 0,
            i => self.entries[i - 1].1,
        }
    }

    pub fn entries(&self) -> &[(Dist, Dist)] {
        &self.entries
    }

    /// Largest `t` in `1..=limit` with `eval(t) ≤ bound`.
    pub fn largest_below(&self, bound: Dist, limit: Dist) -> Option<Dist> {
        (1..=limit).rev().find(|&t| self.eval(t) <= bound)
    }
}

/// A point map between finite spaces with an upper modulus, an optional lower
/// modulus, and an optional contraction claim.
#[derive(Clone, Debug)]
pub struct CoarseMapWitness {
    pub source: Arc<FiniteMetricSpace>,
    pub target: Arc<FiniteMetricSpace>,
    /// `map[x]` is the image of source point `x`.
    pub map: Vec<Point>,
    pub rho_plus: ModulusTable,
    pub rho_minus: Option<ModulusTable>,
    pub contractive: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MapViolationKind {
    Upper,
    Lower,
    Contraction,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MapViolation {
    pub kind: MapViolationKind,
    pub x: String,
    pub y: String,
    pub source_dist: Dist,
    pub target_dist: Dist,
    pub bound: Dist,
}

#[derive(Clone, Debug, Serialize)]
pub struct CoarseMapReport {
    pub valid: bool,
    /// Whether the map is contractive on every pair, claimed or not.
    pub contractive: bool,
    pub pairs_checked: u64,
    pub violation_count: u64,
    /// The first violations found, in pair order.
    pub violations: Vec<MapViolation>,
}

const MAX_LISTED_VIOLATIONS: usize = 64;

impl CoarseMapWitness {
    pub fn identity(space: Arc<FiniteMetricSpace>) -> Self {
        let n = space.len();
        let diam = space.diameter();
        Self {
            source: space.clone(),
            target: space,
            map: (0..n).collect(),
            rho_plus: ModulusTable::identity(diam),
            rho_minus: Some(ModulusTable::identity(diam)),
            contractive: true,
        }
    }

    /// Checks every modulus inequality on every unordered source pair.
    pub fn check(&self) -> CoarseMapReport {
        let n = self.source.len();
        let mut report = CoarseMapReport {
            valid: self.map.len() == n && self.map.iter().all(|&y| y < self.target.len()),
            contractive: true,
            pairs_checked: 0,
            violation_count: 0,
            violations: Vec::new(),
        };
        if !report.valid {
            return report;
        }
        let push = |report: &mut CoarseMapReport, v: MapViolation| {
            report.valid = false;
            report.violation_count += 1;
            if report.violations.len() < MAX_LISTED_VIOLATIONS {
                report.violations.push(v);
            }
        };
        for x in 0..n {
            for y in x + 1..n {
                report.pairs_checked += 1;
                let ds = self.source.dist(x, y);
                let dt = self.target.dist(self.map[x], self.map[y]);
                let mk = |kind, bound| MapViolation {
                    kind,
                    x: self.source.name(x).to_string(),
                    y: self.source.name(y).to_string(),
                    source_dist: ds,
                    target_dist: dt,
                    bound,
                };
                let upper = self.rho_plus.eval(ds);
                if dt > upper {
                    push(&mut report, mk(MapViolationKind::Upper, upper));
                }
                if let Some(lower) = &self.rho_minus {
                    let lo = lower.eval(ds);
                    if lo > dt {
                        push(&mut report, mk(MapViolationKind::Lower, lo));
                    }
                }
                if dt > ds {
                    report.contractive = false;
                    if self.contractive {
                        push(&mut report, mk(MapViolationKind::Contraction, ds));
                    }
                }
            }
        }
        report
    }

    /// Source points mapping into the given target points.
    pub fn preimage(&self, target_pts: &[Point]) -> Vec<Point> {
        (0..self.map.len())
            .filter(|&x| target_pts.binary_search(&self.map[x]).is_ok())
            .collect()
    }
}

pub fn check_coarse_map(w: &CoarseMapWitness) -> CoarseMapReport {
    w.check()
}
