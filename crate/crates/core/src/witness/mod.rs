//! Decomposition witnesses, family witnesses and decomposition chains.
//!
//! A `(k, r)`-decomposition of `X` over a target class colors every point of
//! `X` with one of `k` colors and groups each color class into pieces; pieces
//! of one color must be pairwise more than `r` apart and every piece must be
//! accepted by the target class. Empty pieces and empty colors are allowed.

mod rewrite;

pub use rewrite::*;

use std::collections::BTreeMap;
use std::fmt;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::metric::{canonical_family, r_components_of, Dist, MetricError, MetricFamily, Point, Subspace};

#[derive(Debug, Error)]
pub enum WitnessError {
    #[error("invalid input certificate: {0}")]
    InvalidInput(String),
    #[error("cannot pad to k' = {requested} below k = {current}")]
    BadK { current: u32, requested: u32 },
    #[error("family mismatch: {0}")]
    FamilyMismatch(String),
    #[error("scale order violated: {0}")]
    ScaleOrderViolation(String),
    #[error("scales differ: {0} vs {1}")]
    RadiusMismatch(Dist, Dist),
    #[error("incompatible targets: {0}")]
    TargetClash(String),
    #[error("parts {i} and {j} are not separated: d({x}, {y}) = {d} ≤ r = {r}")]
    NotSeparated { i: usize, j: usize, x: String, y: String, d: Dist, r: Dist },
    #[error("not a subspace: {0}")]
    NotSubspace(String),
    #[error("coarse embedding lacks a lower modulus")]
    ModulusMissing,
    #[error("lower modulus is not strictly increasing on realized distances ({0})")]
    ModulusNotProper(String),
    #[error("no positive pulled-back scale for scale {0}")]
    ScaleCollapse(Dist),
    #[error(transparent)]
    Metric(#[from] MetricError),
}

/// Which pieces a decomposition may use.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TargetClass {
    /// Pieces of diameter at most the bound.
    Bounded(Dist),
    /// Pieces equal (as point sets) to a listed member.
    Explicit(Vec<Subspace>),
    /// Pieces contained in a listed member.
    ClosureOf(Vec<Subspace>),
}

impl TargetClass {
    /// `None` if accepted, otherwise the reason for rejection.
    pub fn rejection(&self, piece: &Subspace) -> Option<String> {
        match self {
            TargetClass::Bounded(d) => {
                let diam = piece.diameter();
                (diam > *d).then(|| format!("diameter {diam} > {d}"))
            }
            TargetClass::Explicit(members) => {
                if piece.is_empty() || members.iter().any(|m| m == piece) {
                    None
                } else {
                    Some("not a member of the target family".into())
                }
            }
            TargetClass::ClosureOf(members) => {
                if piece.is_empty() || members.iter().any(|m| piece.is_subset_of(m)) {
                    None
                } else {
                    Some("not contained in any target family member".into())
                }
            }
        }
    }

    pub fn accepts(&self, piece: &Subspace) -> bool {
        self.rejection(piece).is_none()
    }

    /// The class obtained by restricting accepted pieces to subsets.
    pub fn weakened(&self) -> TargetClass {
        match self {
            TargetClass::Bounded(d) => TargetClass::Bounded(*d),
            TargetClass::Explicit(m) | TargetClass::ClosureOf(m) => TargetClass::ClosureOf(m.clone()),
        }
    }
}

/// The subspace closure of a family: all subsets of its members.
pub fn subspace_closure(fam: &MetricFamily) -> TargetClass {
    TargetClass::ClosureOf(fam.members.clone())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Label {
    pub color: u32,
    pub piece: u32,
}

/// A labeled piece of a witness.
#[derive(Clone, Debug)]
pub struct Piece {
    pub color: u32,
    pub id: u32,
    pub set: Subspace,
}

#[derive(Clone, Debug)]
pub struct DecompositionWitness {
    pub space: Subspace,
    pub k: u32,
    pub r: Dist,
    pub labels: BTreeMap<Point, Label>,
    pub target: TargetClass,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    Uncovered { point: String },
    StrayLabel { point: String },
    ColorOutOfRange { point: String, color: u32, k: u32 },
    NotSeparated { color: u32, first: u32, second: u32, distance: Dist, r: Dist },
    Rejected { color: u32, piece: u32, reason: String },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Uncovered { point } => write!(f, "point {point} is not labeled"),
            Violation::StrayLabel { point } => write!(f, "label for point {point} outside the space"),
            Violation::ColorOutOfRange { point, color, k } => {
                write!(f, "point {point} has color {color} ≥ k = {k}")
            }
            Violation::NotSeparated { color, first, second, distance, r } => write!(
                f,
                "d(X_{{{color},{first}}}, X_{{{color},{second}}}) = {distance} ≤ r = {r}"
            ),
            Violation::Rejected { color, piece, reason } => {
                write!(f, "piece X_{{{color},{piece}}} rejected by target: {reason}")
            }
        }
    }
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct WitnessReport {
    pub valid: bool,
    pub violations: Vec<Violation>,
}

impl WitnessReport {
    pub fn messages(&self) -> Vec<String> {
        self.violations.iter().map(ToString::to_string).collect()
    }
}

impl DecompositionWitness {
    /// Witness with explicitly given pieces: `classes[c]` lists the pieces of
    /// color `c`; piece ids follow list order.
    pub fn from_pieces(
        space: Subspace,
        r: Dist,
        target: TargetClass,
        classes: Vec<Vec<Vec<Point>>>,
    ) -> Self {
        let mut labels = BTreeMap::new();
        for (c, pieces) in classes.iter().enumerate() {
            for (j, piece) in pieces.iter().enumerate() {
                for &p in piece {
                    labels.insert(p, Label { color: c as u32, piece: j as u32 });
                }
            }
        }
        Self { space, k: classes.len() as u32, r, labels, target }
    }

    /// Witness from a coloring, with pieces the `r`-components of each color
    /// class (the coarsest admissible choice). `colors` is aligned with
    /// `space.points()`.
    pub fn from_coloring(space: Subspace, k: u32, r: Dist, target: TargetClass, colors: &[u32]) -> Self {
        assert_eq!(colors.len(), space.len());
        let mut classes: Vec<Vec<Point>> = vec![Vec::new(); k as usize];
        for (&p, &c) in space.points().iter().zip(colors) {
            classes[c as usize].push(p);
        }
        let amb = space.ambient().clone();
        let pieces = classes.iter().map(|cls| r_components_of(&amb, cls, r)).collect();
        let mut w = Self::from_pieces(space, r, target, pieces);
        w.k = k;
        w
    }

    /// One color, one piece: the whole space.
    pub fn trivial(space: Subspace, r: Dist, target: TargetClass) -> Self {
        let pts = space.points().to_vec();
        Self::from_pieces(space, r, target, vec![vec![pts]])
    }

    pub fn label(&self, p: Point) -> Option<Label> {
        self.labels.get(&p).copied()
    }

    /// Nonempty pieces in `(color, id)` order, restricted to the space.
    pub fn pieces(&self) -> Vec<Piece> {
        let mut groups: BTreeMap<Label, Vec<Point>> = BTreeMap::new();
        for (&p, &l) in &self.labels {
            if self.space.contains(p) {
                groups.entry(l).or_default().push(p);
            }
        }
        groups
            .into_iter()
            .map(|(l, pts)| Piece {
                color: l.color,
                id: l.piece,
                set: Subspace::from_sorted(self.space.ambient().clone(), pts),
            })
            .collect()
    }

    pub fn color_class(&self, c: u32) -> Subspace {
        self.space.filter(|p| self.labels.get(&p).is_some_and(|l| l.color == c))
    }

    /// Pieces replaced by the `r`-components of each color class.
    pub fn canonical_pieces(&self) -> Vec<Piece> {
        let amb = self.space.ambient();
        let mut out = Vec::new();
        for c in 0..self.k {
            let cls = self.color_class(c);
            for (j, comp) in r_components_of(amb, cls.points(), self.r).into_iter().enumerate() {
                out.push(Piece { color: c, id: j as u32, set: Subspace::from_sorted(amb.clone(), comp) });
            }
        }
        out
    }

    pub fn verify(&self) -> WitnessReport {
        verify_witness(self)
    }
}

/// Checks coverage, per-color separation and target acceptance.
pub fn verify_witness(w: &DecompositionWitness) -> WitnessReport {
    let amb = w.space.ambient();
    let mut violations = Vec::new();
    for &p in w.space.points() {
        match w.labels.get(&p) {
            None => violations.push(Violation::Uncovered { point: amb.name(p).to_string() }),
            Some(l) if l.color >= w.k => violations.push(Violation::ColorOutOfRange {
                point: amb.name(p).to_string(),
                color: l.color,
                k: w.k,
            }),
            _ => {}
        }
    }
    for &p in w.labels.keys() {
        if !w.space.contains(p) {
            let point = if p < amb.len() { amb.name(p).to_string() } else { format!("#{p}") };
            violations.push(Violation::StrayLabel { point });
        }
    }
    let pieces = w.pieces();
    let mut by_color: BTreeMap<u32, Vec<&Piece>> = BTreeMap::new();
    for piece in &pieces {
        by_color.entry(piece.color).or_default().push(piece);
    }
    let separation: Vec<Violation> = by_color
        .par_iter()
        .flat_map_iter(|(&color, ps)| {
            let mut found = Vec::new();
            for (i, a) in ps.iter().enumerate() {
                for b in &ps[i + 1..] {
                    let close = a
                        .set
                        .points()
                        .iter()
                        .any(|&x| b.set.points().iter().any(|&y| amb.dist(x, y) <= w.r));
                    if close {
                        let distance = crate::metric::set_distance(&a.set, &b.set).unwrap_or(0);
                        found.push(Violation::NotSeparated {
                            color,
                            first: a.id,
                            second: b.id,
                            distance,
                            r: w.r,
                        });
                    }
                }
            }
            found
        })
        .collect();
    violations.extend(separation);
    let rejected: Vec<Violation> = pieces
        .par_iter()
        .filter_map(|p| {
            w.target.rejection(&p.set).map(|reason| Violation::Rejected {
                color: p.color,
                piece: p.id,
                reason,
            })
        })
        .collect();
    violations.extend(rejected);
    WitnessReport { valid: violations.is_empty(), violations }
}

/// One witness per member of a family, all at a shared `(k, r)`.
#[derive(Clone, Debug)]
pub struct FamilyWitness {
    pub k: u32,
    pub r: Dist,
    pub members: Vec<DecompositionWitness>,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct FamilyReport {
    pub valid: bool,
    pub problems: Vec<String>,
    pub members: Vec<WitnessReport>,
}

impl FamilyWitness {
    /// Pads every member to the largest `k` present.
    pub fn new(r: Dist, mut members: Vec<DecompositionWitness>) -> Self {
        let k = members.iter().map(|w| w.k).max().unwrap_or(1);
        for w in &mut members {
            w.k = k;
        }
        Self { k, r, members }
    }

    pub fn source_family(&self) -> Vec<Subspace> {
        self.members.iter().map(|w| w.space.clone()).collect()
    }

    /// The family of all nonempty pieces, member by member.
    pub fn piece_family(&self) -> Vec<Subspace> {
        self.members.iter().flat_map(|w| w.pieces().into_iter().map(|p| p.set)).collect()
    }

    pub fn verify(&self) -> FamilyReport {
        let mut problems = Vec::new();
        for (i, w) in self.members.iter().enumerate() {
            if w.k != self.k || w.r != self.r {
                problems.push(format!(
                    "member {i} witnessed at (k={}, r={}) instead of (k={}, r={})",
                    w.k, w.r, self.k, self.r
                ));
            }
        }
        let members: Vec<WitnessReport> = self.members.par_iter().map(verify_witness).collect();
        let valid = problems.is_empty() && members.iter().all(|m| m.valid);
        FamilyReport { valid, problems, members }
    }
}

/// A finite sequence of family-level decompositions starting from `start`
/// and ending in a family bounded by `final_bound`. Each step's source
/// family is the previous step's piece family.
#[derive(Clone, Debug)]
pub struct DecompositionChain {
    pub start: Vec<Subspace>,
    pub steps: Vec<FamilyWitness>,
    pub final_bound: Dist,
    /// Strictly increasing scales when set; nondecreasing otherwise.
    pub strict: bool,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct ChainReport {
    pub valid: bool,
    pub problems: Vec<String>,
    pub steps: Vec<FamilyReport>,
}

impl DecompositionChain {
    pub fn empty(start: Vec<Subspace>, final_bound: Dist) -> Self {
        Self { start, steps: Vec::new(), final_bound, strict: true }
    }

    pub fn scales(&self) -> Vec<Dist> {
        self.steps.iter().map(|s| s.r).collect()
    }

    pub fn k_sequence(&self) -> Vec<u32> {
        self.steps.iter().map(|s| s.k).collect()
    }

    pub fn final_family(&self) -> Vec<Subspace> {
        match self.steps.last() {
            Some(s) => s.piece_family(),
            None => self.start.iter().filter(|m| !m.is_empty()).cloned().collect(),
        }
    }

    pub fn verify(&self) -> ChainReport {
        verify_chain(self)
    }
}

pub(crate) fn same_family(a: &[Subspace], b: &[Subspace]) -> bool {
    canonical_family(a.iter()) == canonical_family(b.iter())
}

/// Checks every step, the family hand-off between steps, scale ordering and
/// the final bound.
pub fn verify_chain(c: &DecompositionChain) -> ChainReport {
    let mut problems = Vec::new();
    let mut family = c.start.clone();
    let mut steps = Vec::with_capacity(c.steps.len());
    for (i, step) in c.steps.iter().enumerate() {
        if !same_family(&family, &step.source_family()) {
            problems.push(format!("step {}: source family differs from the previous family", i + 1));
        }
        if i > 0 {
            let prev = c.steps[i - 1].r;
            let ok = if c.strict { prev < step.r } else { prev <= step.r };
            if !ok {
                problems.push(format!(
                    "step {}: scale ordering violated ({} then {}{})",
                    i + 1,
                    prev,
                    step.r,
                    if c.strict { ", strict" } else { "" }
                ));
            }
        }
        steps.push(step.verify());
        family = step.piece_family();
    }
    for m in c.final_family() {
        let d = m.diameter();
        if d > c.final_bound {
            problems.push(format!("final member {m:?} has diameter {d} > {}", c.final_bound));
            break;
        }
    }
    let valid = problems.is_empty() && steps.iter().all(|s| s.valid);
    ChainReport { valid, problems, steps }
}
