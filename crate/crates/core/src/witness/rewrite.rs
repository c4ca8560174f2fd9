//! Certificate rewrites: padding, k-fold to two-fold chains, stringing,
//! union assembly, restriction and transfer along coarse embeddings.

use std::collections::BTreeMap;
use std::sync::Arc;

use super::{
    same_family, DecompositionChain, DecompositionWitness, FamilyWitness, Label, TargetClass,
    WitnessError,
};
use crate::coarse::CoarseMapWitness;
use crate::metric::{r_components_of, set_distance, Dist, FiniteMetricSpace, Point, Subspace};

/// Same pieces, `k_new` colors; the extra colors are empty.
pub fn pad_witness(w: &DecompositionWitness, k_new: u32) -> Result<DecompositionWitness, WitnessError> {
    if k_new < w.k {
        return Err(WitnessError::BadK { current: w.k, requested: k_new });
    }
    let mut out = w.clone();
    out.k = k_new;
    Ok(out)
}

fn require_valid(fw: &FamilyWitness) -> Result<(), WitnessError> {
    let report = fw.verify();
    if report.valid {
        return Ok(());
    }
    let mut msgs = report.problems.clone();
    for m in &report.members {
        msgs.extend(m.messages());
    }
    Err(WitnessError::InvalidInput(msgs.join("; ")))
}

/// Largest bound of a family of targets; falls back to realized diameters.
fn bound_of(members: &[DecompositionWitness]) -> Dist {
    members
        .iter()
        .map(|w| match w.target {
            TargetClass::Bounded(d) => d,
            _ => w.pieces().iter().map(|p| p.set.diameter()).max().unwrap_or(0),
        })
        .max()
        .unwrap_or(0)
}

/// Rewrites a `(k, s)`-decomposition into `k` successive two-fold
/// decompositions at the same scale `s`.
///
/// Step `l` keeps the pieces of colors `< l` as trivially decomposed members
/// and splits the leftover union of colors `l..k` into the pieces of color
/// `l` versus the union of the remaining colors. The last step lands in the
/// pieces of the input witness.
pub fn chain_from_kfold(fw: &FamilyWitness) -> Result<DecompositionChain, WitnessError> {
    require_valid(fw)?;
    let start = fw.source_family();
    let final_bound = bound_of(&fw.members);
    if fw.k <= 1 {
        return Ok(DecompositionChain { start, steps: vec![fw.clone()], final_bound, strict: false });
    }
    let s = fw.r;
    let k = fw.k;
    let mut steps = Vec::with_capacity(k as usize);
    for c in 0..k {
        let last = c + 1 == k;
        let mut members = Vec::new();
        for w in &fw.members {
            let amb = w.space.ambient().clone();
            let pieces = w.pieces();
            // colors already split off: each piece passes through unchanged
            for p in pieces.iter().filter(|p| p.color < c) {
                members.push(DecompositionWitness::trivial(p.set.clone(), s, w.target.clone()));
            }
            let leftover = w.space.filter(|q| w.label(q).is_some_and(|l| l.color >= c));
            if leftover.is_empty() {
                continue;
            }
            let current: Vec<Vec<Point>> = pieces
                .iter()
                .filter(|p| p.color == c)
                .map(|p| p.set.points().to_vec())
                .collect();
            let rest: Vec<Point> = leftover
                .points()
                .iter()
                .copied()
                .filter(|&q| w.label(q).is_some_and(|l| l.color > c))
                .collect();
            let target = if last {
                w.target.clone()
            } else {
                let mut listed: Vec<Subspace> = current
                    .iter()
                    .map(|p| Subspace::from_sorted(amb.clone(), p.clone()))
                    .collect();
                if !rest.is_empty() {
                    listed.push(Subspace::from_sorted(amb.clone(), rest.clone()));
                }
                TargetClass::Explicit(listed)
            };
            let rest_class = if rest.is_empty() { vec![] } else { vec![rest] };
            let mut step_w = DecompositionWitness::from_pieces(leftover, s, target, vec![current, rest_class]);
            step_w.k = 2;
            members.push(step_w);
        }
        for m in &mut members {
            m.k = 2;
        }
        steps.push(FamilyWitness { k: 2, r: s, members });
    }
    Ok(DecompositionChain { start, steps, final_bound, strict: false })
}

/// Replaces the scales of a chain by a strictly increasing sequence, each
/// new scale no larger than the one it replaces.
pub fn relabel_scales(c: &DecompositionChain, scales: &[Dist]) -> Result<DecompositionChain, WitnessError> {
    if scales.len() != c.steps.len() {
        return Err(WitnessError::ScaleOrderViolation(format!(
            "{} scales for {} steps",
            scales.len(),
            c.steps.len()
        )));
    }
    if scales.windows(2).any(|w| w[0] >= w[1]) {
        return Err(WitnessError::ScaleOrderViolation("relabeled scales must increase strictly".into()));
    }
    let mut out = c.clone();
    for (step, &r) in out.steps.iter_mut().zip(scales) {
        if r > step.r {
            return Err(WitnessError::ScaleOrderViolation(format!(
                "cannot raise scale {} to {r}",
                step.r
            )));
        }
        step.r = r;
        for m in &mut step.members {
            m.r = r;
        }
    }
    out.strict = true;
    Ok(out)
}

/// Concatenates two chains. A same-scale head is first relabeled to
/// `head_scales`, or to `s-k+1, …, s` when none are given.
pub fn string_chains(
    head: &DecompositionChain,
    tail: &DecompositionChain,
    head_scales: Option<&[Dist]>,
) -> Result<DecompositionChain, WitnessError> {
    let head = match head_scales {
        Some(scales) => relabel_scales(head, scales)?,
        None if !head.strict && !head.steps.is_empty() => {
            let top = head.steps.iter().map(|s| s.r).min().unwrap_or(0);
            let k = head.steps.len() as Dist;
            if top < k {
                return Err(WitnessError::ScaleOrderViolation(format!(
                    "cannot fit {k} increasing positive scales below {top}"
                )));
            }
            let scales: Vec<Dist> = (0..k).map(|i| top + 1 - k + i).collect();
            relabel_scales(head, &scales)?
        }
        None => head.clone(),
    };
    if !same_family(&head.final_family(), &tail.start) {
        return Err(WitnessError::FamilyMismatch(
            "head's final family differs from tail's start family".into(),
        ));
    }
    if let (Some(h), Some(t)) = (head.steps.last(), tail.steps.first()) {
        if h.r >= t.r {
            return Err(WitnessError::ScaleOrderViolation(format!(
                "head ends at scale {} but tail starts at {}",
                h.r, t.r
            )));
        }
    }
    let mut steps = head.steps.clone();
    steps.extend(tail.steps.iter().cloned());
    Ok(DecompositionChain {
        start: head.start.clone(),
        steps,
        final_bound: tail.final_bound,
        strict: head.strict && tail.strict,
    })
}

fn merged_target(a: &DecompositionWitness, b: &DecompositionWitness) -> Result<TargetClass, WitnessError> {
    if b.space.is_empty() {
        return Ok(a.target.clone());
    }
    if a.space.is_empty() {
        return Ok(b.target.weakened());
    }
    use TargetClass::*;
    match (&a.target, &b.target) {
        (Bounded(x), Bounded(y)) => Ok(Bounded((*x).max(*y))),
        (Bounded(_), _) | (_, Bounded(_)) => Err(WitnessError::TargetClash(
            "cannot merge a bounded target with a family target".into(),
        )),
        (Explicit(x) | ClosureOf(x), Explicit(y) | ClosureOf(y)) => {
            let mut members = x.clone();
            members.extend(y.iter().cloned());
            Ok(ClosureOf(members))
        }
    }
}

/// Witness over `X₁ ∪ X₂` with `k₁ + k₂` colors. Points of the overlap keep
/// their first-witness labels; the second witness's truncated pieces are
/// re-split into `r`-components.
pub fn merge_union_witnesses(
    w1: &DecompositionWitness,
    w2: &DecompositionWitness,
) -> Result<DecompositionWitness, WitnessError> {
    if !w1.space.same_ambient(&w2.space) {
        return Err(crate::metric::MetricError::AmbientMismatch(
            w1.space.ambient().id().into(),
            w2.space.ambient().id().into(),
        )
        .into());
    }
    if w1.r != w2.r {
        return Err(WitnessError::RadiusMismatch(w1.r, w2.r));
    }
    let target = merged_target(w1, w2)?;
    let space = w1.space.union(&w2.space)?;
    let mut labels: BTreeMap<Point, Label> = w1
        .labels
        .iter()
        .filter(|(p, _)| w1.space.contains(**p))
        .map(|(&p, &l)| (p, l))
        .collect();
    let amb = space.ambient();
    let mut next_id: BTreeMap<u32, u32> = BTreeMap::new();
    for piece in w2.pieces() {
        let kept: Vec<Point> = piece.set.points().iter().copied().filter(|&p| !w1.space.contains(p)).collect();
        let color = piece.color + w1.k;
        for comp in r_components_of(amb, &kept, w2.r) {
            let id = next_id.entry(color).or_insert(0);
            for p in comp {
                labels.insert(p, Label { color, piece: *id });
            }
            *id += 1;
        }
    }
    Ok(DecompositionWitness { space, k: w1.k + w2.k, r: w1.r, labels, target })
}

/// Two-color witness over the union of `parts`: color 0 is `y` as a single
/// piece, color 1 the sets `Zᵢ = partsᵢ ∖ y`, which must be pairwise more
/// than `r` apart.
pub fn union_assemble(parts: &[Subspace], y: &Subspace, r: Dist) -> Result<DecompositionWitness, WitnessError> {
    let Some(first) = parts.first() else {
        return Err(WitnessError::InvalidInput("no parts given".into()));
    };
    let mut x = first.clone();
    for p in &parts[1..] {
        x = x.union(p)?;
    }
    if !y.is_subset_of(&x) {
        return Err(WitnessError::NotSubspace("Y is not contained in the union of the parts".into()));
    }
    let zs: Vec<Subspace> = parts.iter().map(|p| p.minus(y)).collect::<Result<_, _>>()?;
    let amb = x.ambient().clone();
    for i in 0..zs.len() {
        for j in i + 1..zs.len() {
            if zs[i].is_empty() || zs[j].is_empty() {
                continue;
            }
            let d = set_distance(&zs[i], &zs[j])?;
            if d <= r {
                let (a, b) = closest_pair(&amb, &zs[i], &zs[j]);
                return Err(WitnessError::NotSeparated {
                    i,
                    j,
                    x: amb.name(a).to_string(),
                    y: amb.name(b).to_string(),
                    d,
                    r,
                });
            }
        }
    }
    let mut listed = vec![y.clone()];
    listed.extend(zs.iter().filter(|z| !z.is_empty()).cloned());
    let color0 = if y.is_empty() { vec![] } else { vec![y.points().to_vec()] };
    let color1 = zs.iter().filter(|z| !z.is_empty()).map(|z| z.points().to_vec()).collect();
    let mut w = DecompositionWitness::from_pieces(x, r, TargetClass::ClosureOf(listed), vec![color0, color1]);
    w.k = 2;
    Ok(w)
}

fn closest_pair(amb: &FiniteMetricSpace, a: &Subspace, b: &Subspace) -> (Point, Point) {
    let mut best = (Dist::MAX, 0, 0);
    for &x in a.points() {
        for &y in b.points() {
            let d = amb.dist(x, y);
            if d < best.0 {
                best = (d, x, y);
            }
        }
    }
    (best.1, best.2)
}

/// Intersects a witness with a subspace of its space.
pub fn restrict_to_subspace(w: &DecompositionWitness, s: &Subspace) -> Result<DecompositionWitness, WitnessError> {
    if !s.is_subset_of(&w.space) {
        return Err(WitnessError::NotSubspace("restriction set is not inside the witnessed space".into()));
    }
    let space = if s.is_empty() { Subspace::empty(w.space.ambient().clone()) } else { s.clone() };
    let labels = w.labels.iter().filter(|(p, _)| space.contains(**p)).map(|(&p, &l)| (p, l)).collect();
    Ok(DecompositionWitness { space, k: w.k, r: w.r, labels, target: w.target.weakened() })
}

/// Intersects every member of every step, and every listed target member,
/// with `s`; empty members drop out.
pub fn restrict_chain(c: &DecompositionChain, s: &Subspace) -> Result<DecompositionChain, WitnessError> {
    let cut = |m: &Subspace| m.intersect(s);
    let start = c
        .start
        .iter()
        .map(cut)
        .collect::<Result<Vec<_>, _>>()?
        .into_iter()
        .filter(|m| !m.is_empty())
        .collect();
    let mut steps = Vec::with_capacity(c.steps.len());
    for step in &c.steps {
        let mut members = Vec::new();
        for w in &step.members {
            let sub = cut(&w.space)?;
            if !sub.is_empty() {
                let mut r = restrict_to_subspace(w, &sub)?;
                if let TargetClass::ClosureOf(listed) = &mut r.target {
                    *listed = listed.iter().map(cut).collect::<Result<Vec<_>, _>>()?;
                    listed.retain(|m| !m.is_empty());
                }
                members.push(r);
            }
        }
        steps.push(FamilyWitness { k: step.k, r: step.r, members });
    }
    Ok(DecompositionChain { start, steps, final_bound: c.final_bound, strict: c.strict })
}

/// Moves a chain into another ambient space along a point map. Every point
/// that occurs must have an image; target members are mapped where defined.
pub fn relocate_chain(
    c: &DecompositionChain,
    ambient: &Arc<FiniteMetricSpace>,
    f: &dyn Fn(Point) -> Option<Point>,
) -> Result<DecompositionChain, WitnessError> {
    let map_set = |s: &Subspace| -> Result<Subspace, WitnessError> {
        let pts = s
            .points()
            .iter()
            .map(|&p| {
                f(p).ok_or_else(|| {
                    WitnessError::NotSubspace(format!("point {} has no image", s.ambient().name(p)))
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Subspace::new(ambient.clone(), pts)?)
    };
    let map_partial = |s: &Subspace| -> Subspace {
        let pts: Vec<Point> = s.points().iter().filter_map(|&p| f(p)).collect();
        Subspace::new(ambient.clone(), pts).expect("mapped points are in range")
    };
    let map_target = |t: &TargetClass| match t {
        TargetClass::Bounded(d) => TargetClass::Bounded(*d),
        TargetClass::Explicit(m) => TargetClass::Explicit(m.iter().map(map_partial).collect()),
        TargetClass::ClosureOf(m) => TargetClass::ClosureOf(m.iter().map(map_partial).collect()),
    };
    let start = c.start.iter().map(map_set).collect::<Result<Vec<_>, _>>()?;
    let mut steps = Vec::with_capacity(c.steps.len());
    for step in &c.steps {
        let mut members = Vec::with_capacity(step.members.len());
        for w in &step.members {
            let space = map_set(&w.space)?;
            let labels = w
                .labels
                .iter()
                .filter(|(p, _)| w.space.contains(**p))
                .map(|(&p, &l)| (f(p).expect("mapped above"), l))
                .collect();
            members.push(DecompositionWitness { space, k: w.k, r: w.r, labels, target: map_target(&w.target) });
        }
        steps.push(FamilyWitness { k: step.k, r: step.r, members });
    }
    Ok(DecompositionChain { start, steps, final_bound: c.final_bound, strict: c.strict })
}

/// Scale and bound conversion for pulling certificates back along a coarse
/// embedding `Y → X`.
struct Pullback<'a> {
    emb: &'a CoarseMapWitness,
    y_diam: Dist,
    realized: Vec<Dist>,
}

impl<'a> Pullback<'a> {
    fn new(emb: &'a CoarseMapWitness) -> Result<Self, WitnessError> {
        let Some(lower) = &emb.rho_minus else {
            return Err(WitnessError::ModulusMissing);
        };
        let report = emb.check();
        if !report.valid {
            return Err(WitnessError::InvalidInput(format!(
                "embedding fails its moduli on {} pairs",
                report.violation_count
            )));
        }
        let y = &emb.source;
        let mut realized: Vec<Dist> =
            (0..y.len()).flat_map(|a| (a + 1..y.len()).map(move |b| y.dist(a, b))).collect();
        realized.sort_unstable();
        realized.dedup();
        for w in realized.windows(2) {
            if lower.eval(w[0]) >= lower.eval(w[1]) {
                return Err(WitnessError::ModulusNotProper(format!(
                    "ρ₋({}) = {} ≥ ρ₋({}) = {}",
                    w[0],
                    lower.eval(w[0]),
                    w[1],
                    lower.eval(w[1])
                )));
            }
        }
        let y_diam = realized.last().copied().unwrap_or(0);
        Ok(Self { emb, y_diam, realized })
    }

    fn scale(&self, r: Dist) -> Result<Dist, WitnessError> {
        self.emb
            .rho_plus
            .largest_below(r, r.max(self.y_diam))
            .ok_or(WitnessError::ScaleCollapse(r))
    }

    fn bound(&self, d: Dist) -> Dist {
        let lower = self.emb.rho_minus.as_ref().expect("checked");
        self.realized.iter().copied().filter(|&t| lower.eval(t) <= d).max().unwrap_or(0)
    }

    fn preimage(&self, s: &Subspace) -> Subspace {
        Subspace::from_sorted(self.emb.source.clone(), self.emb.preimage(s.points()))
    }

    fn witness(&self, w: &DecompositionWitness, r: Dist) -> DecompositionWitness {
        let space = self.preimage(&w.space);
        let labels = space
            .points()
            .iter()
            .filter_map(|&p| w.label(self.emb.map[p]).map(|l| (p, l)))
            .collect();
        let target = match &w.target {
            TargetClass::Bounded(d) => TargetClass::Bounded(self.bound(*d)),
            TargetClass::Explicit(m) | TargetClass::ClosureOf(m) => {
                TargetClass::ClosureOf(m.iter().map(|s| self.preimage(s)).collect())
            }
        };
        DecompositionWitness { space, k: w.k, r, labels, target }
    }
}

/// Pulls a witness on `X` back along a coarse embedding `Y → X`. The scale
/// becomes the largest `r'` with `ρ₊(r') ≤ r`.
pub fn transfer_witness(
    w: &DecompositionWitness,
    emb: &CoarseMapWitness,
) -> Result<DecompositionWitness, WitnessError> {
    check_embedding_target(&w.space, emb)?;
    let pb = Pullback::new(emb)?;
    let r = pb.scale(w.r)?;
    Ok(pb.witness(w, r))
}

/// Pulls every step of a chain back along a coarse embedding `Y → X`.
pub fn transfer_chain(
    c: &DecompositionChain,
    emb: &CoarseMapWitness,
) -> Result<DecompositionChain, WitnessError> {
    for m in &c.start {
        check_embedding_target(m, emb)?;
    }
    let pb = Pullback::new(emb)?;
    let start = c.start.iter().map(|m| pb.preimage(m)).filter(|m| !m.is_empty()).collect();
    let mut steps = Vec::with_capacity(c.steps.len());
    for step in &c.steps {
        let r = pb.scale(step.r)?;
        let members = step
            .members
            .iter()
            .map(|w| pb.witness(w, r))
            .filter(|w| !w.space.is_empty())
            .collect();
        steps.push(FamilyWitness { k: step.k, r, members });
    }
    let strict = c.strict && steps.windows(2).all(|w| w[0].r < w[1].r);
    Ok(DecompositionChain { start, steps, final_bound: pb.bound(c.final_bound), strict })
}

fn check_embedding_target(s: &Subspace, emb: &CoarseMapWitness) -> Result<(), WitnessError> {
    if s.ambient().id() != emb.target.id() {
        return Err(crate::metric::MetricError::AmbientMismatch(
            s.ambient().id().into(),
            emb.target.id().into(),
        )
        .into());
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coarse::ModulusTable;
    use crate::generate;
    use crate::witness::verify_chain;

    fn p10_valid() -> DecompositionWitness {
        let p = generate::path(10);
        DecompositionWitness::from_pieces(
            Subspace::whole(p),
            3,
            TargetClass::Bounded(4),
            vec![vec![vec![0, 1, 2], vec![7, 8, 9]], vec![vec![3, 4, 5, 6]]],
        )
    }

    #[test]
    fn padding() {
        let w = p10_valid();
        let same = pad_witness(&w, 2).unwrap();
        assert_eq!(same.labels, w.labels);
        assert_eq!(same.k, 2);
        let wide = pad_witness(&w, 5).unwrap();
        assert!(wide.verify().valid);
        assert_eq!(wide.k, 5);
        assert!((2..5).all(|c| wide.color_class(c).is_empty()));
        assert!(matches!(pad_witness(&w, 1), Err(WitnessError::BadK { .. })));
    }

    pub(crate) fn nine_point_kfold() -> FamilyWitness {
        let p = generate::path(9);
        let w = DecompositionWitness::from_pieces(
            Subspace::whole(p),
            2,
            TargetClass::Bounded(1),
            vec![vec![vec![0, 1], vec![5, 6]], vec![vec![2, 3]], vec![vec![4], vec![7, 8]]],
        );
        FamilyWitness::new(2, vec![w])
    }

    #[test]
    fn kfold_example_splits_first_color_off() {
        let fw = nine_point_kfold();
        assert!(fw.verify().valid);
        let chain = chain_from_kfold(&fw).unwrap();
        assert_eq!(chain.steps.len(), 3);
        let first = &chain.steps[0].members[0];
        let pieces: Vec<Vec<Point>> = first.pieces().iter().map(|p| p.set.points().to_vec()).collect();
        assert_eq!(pieces, vec![vec![0, 1], vec![5, 6], vec![2, 3, 4, 7, 8]]);
        for step in &chain.steps {
            assert_eq!(step.r, 2);
            for m in &step.members {
                assert!(m.verify().valid);
            }
        }
        let report = verify_chain(&chain);
        assert!(report.valid, "{report:?}");
        assert!(same_family(&chain.final_family(), &fw.piece_family()));
    }

    #[test]
    fn kfold_with_one_color_is_identity() {
        let p = generate::path(4);
        let w = DecompositionWitness::trivial(Subspace::whole(p), 1, TargetClass::Bounded(3));
        let fw = FamilyWitness::new(1, vec![w]);
        let chain = chain_from_kfold(&fw).unwrap();
        assert_eq!(chain.steps.len(), 1);
        assert_eq!(chain.steps[0].members[0].labels, fw.members[0].labels);
    }

    #[test]
    fn kfold_rejects_invalid_input() {
        let mut fw = nine_point_kfold();
        fw.members[0].labels.remove(&3);
        assert!(matches!(chain_from_kfold(&fw), Err(WitnessError::InvalidInput(_))));
    }

    #[test]
    fn string_with_empty_head_is_tail() {
        let fw = nine_point_kfold();
        let tail = relabel_scales(&chain_from_kfold(&fw).unwrap(), &[1, 2, 2]).err();
        assert!(tail.is_some(), "non-increasing relabel must fail");
        let tail = relabel_scales(&chain_from_kfold(&fw).unwrap(), &[0, 1, 2]).unwrap();
        let head = DecompositionChain::empty(tail.start.clone(), 0);
        let out = string_chains(&head, &tail, None).unwrap();
        assert_eq!(out.scales(), tail.scales());
        assert!(verify_chain(&out).valid);
    }

    #[test]
    fn string_family_mismatch() {
        let fw = nine_point_kfold();
        let head = chain_from_kfold(&fw).unwrap();
        let other = DecompositionChain::empty(vec![Subspace::whole(generate::path(3))], 2);
        assert!(matches!(
            string_chains(&head, &other, Some(&[0, 1, 2])),
            Err(WitnessError::FamilyMismatch(_))
        ));
    }

    #[test]
    fn merge_disjoint_halves() {
        let p = generate::path(10);
        let a = Subspace::new(p.clone(), (0..5).collect()).unwrap();
        let b = Subspace::new(p.clone(), (5..10).collect()).unwrap();
        let w1 = DecompositionWitness::trivial(a, 1, TargetClass::Bounded(4));
        let w2 = DecompositionWitness::trivial(b, 1, TargetClass::Bounded(4));
        let m = merge_union_witnesses(&w1, &w2).unwrap();
        assert_eq!(m.k, 2);
        assert!(m.verify().valid);
    }

    #[test]
    fn merge_with_empty_second_pads_first() {
        let w1 = p10_valid();
        let w2 = DecompositionWitness::from_pieces(
            Subspace::empty(w1.space.ambient().clone()),
            3,
            TargetClass::Bounded(0),
            vec![vec![]],
        );
        let m = merge_union_witnesses(&w1, &w2).unwrap();
        assert_eq!(m.labels, w1.labels);
        assert_eq!(m.k, 3);
        assert_eq!(m.target, w1.target);
    }

    #[test]
    fn merge_overlap_first_wins() {
        let p = generate::path(10);
        let a = Subspace::new(p.clone(), (0..7).collect()).unwrap();
        let b = Subspace::new(p.clone(), (4..10).collect()).unwrap();
        let w1 = DecompositionWitness::from_pieces(
            a,
            1,
            TargetClass::Bounded(3),
            vec![vec![vec![0, 1, 2, 3]], vec![vec![4, 5, 6]]],
        );
        let w2 = DecompositionWitness::from_pieces(
            b,
            1,
            TargetClass::Bounded(3),
            vec![vec![vec![4, 5, 6, 7]], vec![vec![8, 9]]],
        );
        let m = merge_union_witnesses(&w1, &w2).unwrap();
        assert_eq!(m.label(5), Some(Label { color: 1, piece: 0 }));
        assert_eq!(m.label(7).unwrap().color, 2);
        assert!(m.verify().valid, "{:?}", m.verify().messages());
    }

    #[test]
    fn merge_target_clash() {
        let p = generate::path(4);
        let w1 = DecompositionWitness::trivial(Subspace::new(p.clone(), vec![0, 1]).unwrap(), 1, TargetClass::Bounded(1));
        let all = Subspace::whole(p.clone());
        let w2 = DecompositionWitness::trivial(
            Subspace::new(p.clone(), vec![2, 3]).unwrap(),
            1,
            TargetClass::ClosureOf(vec![all]),
        );
        assert!(matches!(merge_union_witnesses(&w1, &w2), Err(WitnessError::TargetClash(_))));
    }

    #[test]
    fn union_assembly_examples() {
        let p = generate::path(21);
        let parts = vec![
            Subspace::new(p.clone(), (0..=10).collect()).unwrap(),
            Subspace::new(p.clone(), (10..=20).collect()).unwrap(),
        ];
        let y = Subspace::new(p.clone(), (8..=12).collect()).unwrap();
        let w = union_assemble(&parts, &y, 3).unwrap();
        assert!(w.verify().valid);
        let zs: Vec<_> = w.pieces().into_iter().filter(|p| p.color == 1).map(|p| p.set).collect();
        assert_eq!(zs[0].points(), (0..=7).collect::<Vec<_>>().as_slice());
        assert_eq!(zs[1].points(), (13..=20).collect::<Vec<_>>().as_slice());

        let y10 = Subspace::new(p.clone(), vec![10]).unwrap();
        match union_assemble(&parts, &y10, 3) {
            Err(WitnessError::NotSeparated { d, .. }) => assert_eq!(d, 2),
            other => panic!("expected NotSeparated, got {other:?}"),
        }

        let whole = Subspace::whole(p.clone());
        let w = union_assemble(&parts, &whole, 3).unwrap();
        assert_eq!(w.k, 2);
        assert!(w.color_class(1).is_empty());
        assert!(w.verify().valid);
    }

    #[test]
    fn restriction_examples() {
        let w = p10_valid();
        let same = restrict_to_subspace(&w, &w.space).unwrap();
        assert_eq!(same.labels, w.labels);
        let empty = restrict_to_subspace(&w, &Subspace::empty(w.space.ambient().clone())).unwrap();
        assert!(empty.verify().valid);
        let odd = Subspace::new(w.space.ambient().clone(), vec![1, 3, 5, 7, 9]).unwrap();
        let r = restrict_to_subspace(&w, &odd).unwrap();
        assert!(r.verify().valid);
        assert_eq!((r.k, r.r), (w.k, w.r));
        let foreign = Subspace::whole(generate::path(3));
        assert!(restrict_to_subspace(&w, &foreign).is_err());
    }

    fn evens_doubling() -> (CoarseMapWitness, Arc<FiniteMetricSpace>) {
        let p21 = generate::path(21);
        let y = Subspace::new(p21, (0..=20).step_by(2).collect()).unwrap().to_space("evens");
        let x = generate::path(41);
        let map = (0..y.len()).map(|i| 2 * (2 * i)).collect();
        let emb = CoarseMapWitness {
            source: y.clone(),
            target: x.clone(),
            map,
            rho_plus: ModulusTable::from_fn(40, |t| 2 * t).unwrap(),
            rho_minus: Some(ModulusTable::from_fn(40, |t| 2 * t).unwrap()),
            contractive: false,
        };
        (emb, x)
    }

    #[test]
    fn transfer_identity_keeps_scales() {
        let w = p10_valid();
        let emb = CoarseMapWitness::identity(w.space.ambient().clone());
        let out = transfer_witness(&w, &emb).unwrap();
        assert_eq!(out.r, 3);
        assert_eq!(out.labels, w.labels);
    }

    #[test]
    fn transfer_doubling_halves_scale() {
        let (emb, x) = evens_doubling();
        let blocks: Vec<Vec<Point>> = (0..41).collect::<Vec<_>>().chunks(7).map(|c| c.to_vec()).collect();
        let mut classes = vec![Vec::new(), Vec::new()];
        for (i, b) in blocks.into_iter().enumerate() {
            classes[i % 2].push(b);
        }
        let w = DecompositionWitness::from_pieces(Subspace::whole(x.clone()), 6, TargetClass::Bounded(6), classes);
        assert!(w.verify().valid);
        let chain = DecompositionChain {
            start: vec![Subspace::whole(x)],
            steps: vec![FamilyWitness::new(6, vec![w])],
            final_bound: 6,
            strict: true,
        };
        let out = transfer_chain(&chain, &emb).unwrap();
        assert_eq!(out.scales(), vec![3]);
        assert!(verify_chain(&out).valid, "{:?}", verify_chain(&out));
    }

    #[test]
    fn transfer_needs_lower_modulus() {
        let (mut emb, x) = evens_doubling();
        emb.rho_minus = None;
        let w = DecompositionWitness::trivial(Subspace::whole(x), 6, TargetClass::Bounded(40));
        assert!(matches!(transfer_witness(&w, &emb), Err(WitnessError::ModulusMissing)));
    }
}
