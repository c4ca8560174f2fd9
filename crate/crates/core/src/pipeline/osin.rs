//! Relative balls `B(n)` as finite unions of coset pieces, thickened
//! separation of cosets, and chains over `B(n)` with the word metric.

use rayon::prelude::*;

use super::{check_increasing, PipelineError};
use crate::groups::{coset_partition, relative_ball, Element, GroupError, GroupWindow};
use crate::metric::{set_distance, Dist, Point, Subspace};
use crate::search::heuristic_decompose;
use crate::witness::{
    merge_union_witnesses, union_assemble, DecompositionChain, DecompositionWitness, FamilyWitness,
    TargetClass,
};

/// `B(n) ∩ W` together with the sets `B(n−1)H_i ∩ W` and `B(n−1)s ∩ W`.
#[derive(Clone, Debug)]
pub struct OsinCover {
    pub n: Dist,
    pub ball: Subspace,
    pub peripheral: Vec<Subspace>,
    pub generators: Vec<(Element, Subspace)>,
}

impl OsinCover {
    pub fn parts(&self) -> impl Iterator<Item = &Subspace> {
        self.peripheral.iter().chain(self.generators.iter().map(|(_, s)| s))
    }
}

pub fn osin_cover(w: &GroupWindow, n: Dist) -> Result<OsinCover, PipelineError> {
    if n == 0 {
        return Err(PipelineError::InvalidInput("the cover needs n ≥ 1".into()));
    }
    if w.peripheral_count() == 0 {
        return Err(GroupError::NoPeripherals.into());
    }
    let too_small = PipelineError::WindowTooSmall { radius: w.radius(), n };
    if w.radius() <= n || w.syllable_cap().is_some_and(|m| (m as Dist) < n) {
        return Err(too_small);
    }
    let spec = w.spec();
    let rel = w.rel_distances_from(w.identity_point());
    let inner = |q: Option<Point>| q.is_some_and(|q| (rel[q] as Dist) < n);
    let all = 0..w.len();
    let peripheral = (0..w.peripheral_count())
        .map(|i| {
            let pts = all
                .clone()
                .filter(|&p| inner(spec.coset_key(w.element(p), i).and_then(|k| w.point_of(&k))))
                .collect();
            w.subspace(pts)
        })
        .collect::<Vec<_>>();
    let generators = spec
        .generators()
        .into_iter()
        .map(|s| {
            let s_inv = spec.inverse(&s);
            let pts = all
                .clone()
                .filter(|&p| inner(w.point_of(&spec.multiply(w.element(p), &s_inv))))
                .collect();
            (s, w.subspace(pts))
        })
        .collect::<Vec<_>>();
    let ball = relative_ball(w, n)?;
    let cover = OsinCover { n, ball, peripheral, generators };
    let mut union = Subspace::empty(w.s_space().clone());
    for part in cover.parts() {
        union = union.union(part)?;
    }
    if union != cover.ball {
        return Err(too_small);
    }
    Ok(cover)
}

/// Result of the thickening search: the cosets of `base·H_i` in the
/// window, the thickened base `Y`, and the radius `t` used.
#[derive(Clone, Debug)]
pub struct Separation {
    pub t: Dist,
    pub y: Subspace,
    pub parts: Vec<Subspace>,
    pub representatives: Vec<Point>,
}

/// Smallest `t ≤ t_max` such that the cosets `rH_i ∩ W` meeting `base`,
/// minus `Y_t = {x : d_S(x, base) ≤ t}`, are pairwise more than `s` apart.
///
/// Thickening may not empty all but one coset unless that was already the
/// case at `t = 0`, so separation cannot be bought by deleting everything.
pub fn find_separating_radius(
    w: &GroupWindow,
    base: &Subspace,
    i: usize,
    s: Dist,
    t_max: Dist,
) -> Result<Separation, PipelineError> {
    let cosets = coset_partition(w, i, base)?;
    let representatives: Vec<Point> = cosets.iter().map(|(r, _)| *r).collect();
    let parts: Vec<Subspace> = cosets.into_iter().map(|(_, c)| c).collect();
    let mut domain = Subspace::empty(w.s_space().clone());
    for p in &parts {
        domain = domain.union(p)?;
    }
    let to_base: Vec<(Point, Dist)> = domain
        .points()
        .par_iter()
        .map(|&x| (x, base.dist_to_point(x).unwrap_or(Dist::MAX)))
        .collect();
    let near = |t: Dist| -> Subspace {
        let pts = to_base.iter().filter(|(_, d)| *d <= t).map(|(x, _)| *x).collect();
        w.subspace(pts)
    };
    let mut floor = None;
    for t in 0..=t_max {
        let y = near(t);
        let zs: Vec<Subspace> = parts
            .iter()
            .map(|p| p.minus(&y))
            .collect::<Result<Vec<_>, _>>()?
            .into_iter()
            .filter(|z| !z.is_empty())
            .collect();
        let floor = *floor.get_or_insert(zs.len().min(2));
        if zs.len() < floor {
            break;
        }
        let separated = (0..zs.len()).into_par_iter().all(|a| {
            (a + 1..zs.len()).all(|b| set_distance(&zs[a], &zs[b]).is_ok_and(|d| d > s))
        });
        if separated {
            return Ok(Separation { t, y, parts, representatives });
        }
    }
    Err(PipelineError::NotFound(t_max))
}

/// A chain over `B(n) ∩ W` with the word metric, plus the thickening radius
/// found for each peripheral (`None` when the whole coset union was used).
#[derive(Clone, Debug)]
pub struct BallChain {
    pub chain: DecompositionChain,
    pub radii: Vec<Option<Dist>>,
}

/// Decomposes `B(n) ∩ W` following the coset cover.
///
/// The first step, at the first scale, splits each `B(n−1)H_i` into the
/// thickened base and the separated coset remainders and merges these
/// witnesses across the cover. Later steps decompose every member still
/// above diameter `d` with the net heuristic until all pieces are bounded.
pub fn ball_chain(w: &GroupWindow, n: Dist, scales: &[Dist], d: Dist) -> Result<BallChain, PipelineError> {
    check_increasing(scales)?;
    let ball = relative_ball(w, n)?;
    if n == 0 || ball.diameter() <= d {
        return Ok(BallChain { chain: DecompositionChain::empty(vec![ball], d), radii: Vec::new() });
    }
    let Some(&r1) = scales.first() else {
        return Err(PipelineError::InvalidInput("no scales given".into()));
    };
    let cover = osin_cover(w, n)?;
    let base = relative_ball(w, n - 1)?;
    let t_max = 2 * w.radius();
    let mut radii = Vec::new();
    let mut merged: Option<DecompositionWitness> = None;
    let add = |merged: &mut Option<DecompositionWitness>, wi: DecompositionWitness| -> Result<(), PipelineError> {
        *merged = Some(match merged.take() {
            None => wi,
            Some(m) => merge_union_witnesses(&m, &wi)?,
        });
        Ok(())
    };
    for i in 0..w.peripheral_count() {
        let (parts, y, t) = match find_separating_radius(w, &base, i, r1, t_max) {
            Ok(sep) => (sep.parts, sep.y, Some(sep.t)),
            Err(PipelineError::NotFound(_)) => {
                let parts: Vec<Subspace> = coset_partition(w, i, &base)?.into_iter().map(|(_, c)| c).collect();
                let mut all = Subspace::empty(w.s_space().clone());
                for p in &parts {
                    all = all.union(p)?;
                }
                (parts, all, None)
            }
            Err(e) => return Err(e),
        };
        radii.push(t);
        add(&mut merged, union_assemble(&parts, &y, r1)?)?;
    }
    for (_, part) in &cover.generators {
        let covered = merged.as_ref().map(|m| part.is_subset_of(&m.space)).unwrap_or(false);
        if !covered {
            let wi = DecompositionWitness::trivial(part.clone(), r1, TargetClass::ClosureOf(vec![part.clone()]));
            add(&mut merged, wi)?;
        }
    }
    let first = merged.expect("at least one peripheral");
    if first.space != ball {
        return Err(PipelineError::InvalidInput("coset pieces do not cover the relative ball".into()));
    }
    let mut steps = vec![FamilyWitness::new(r1, vec![first])];
    let mut rest = scales[1..].iter();
    loop {
        let family = steps.last().expect("nonempty").piece_family();
        if family.iter().all(|m| m.diameter() <= d) {
            break;
        }
        let Some(&r) = rest.next() else {
            return Err(PipelineError::ScaleMismatch(format!(
                "scales {scales:?} run out before all pieces have diameter ≤ {d}"
            )));
        };
        let members: Vec<DecompositionWitness> = family
            .par_iter()
            .map(|m| {
                if m.diameter() <= d {
                    DecompositionWitness::trivial(m.clone(), r, TargetClass::Bounded(d))
                } else {
                    heuristic_decompose(m, r, d)
                }
            })
            .collect();
        steps.push(FamilyWitness::new(r, members));
    }
    let chain = DecompositionChain { start: vec![ball], steps, final_bound: d, strict: true };
    Ok(BallChain { chain, radii })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groups::{enumerate_ball, enumerate_relative_window, GroupSpec};
    use crate::witness::verify_chain;

    fn f2() -> GroupSpec {
        GroupSpec::free_product(vec![GroupSpec::FreeAbelian { rank: 1 }, GroupSpec::FreeAbelian { rank: 1 }])
    }

    #[test]
    fn first_cover_is_generators_and_factors() {
        let w = enumerate_ball(&f2(), 4).unwrap();
        let c = osin_cover(&w, 1).unwrap();
        assert_eq!(c.peripheral[0].len(), 9);
        assert_eq!(c.peripheral[1].len(), 9);
        for (s, part) in &c.generators {
            assert_eq!(part.names(), vec![w.spec().format(s)]);
        }
        assert_eq!(c.ball.len(), 17);
    }

    #[test]
    fn cover_equals_ball_two() {
        let w = enumerate_ball(&f2(), 6).unwrap();
        let c = osin_cover(&w, 2).unwrap();
        assert_eq!(c.ball, relative_ball(&w, 2).unwrap());
    }

    #[test]
    fn small_window_rejected() {
        let w = enumerate_ball(&f2(), 2).unwrap();
        assert!(matches!(osin_cover(&w, 2), Err(PipelineError::WindowTooSmall { .. })));
    }

    #[test]
    fn separation_examples() {
        let w = enumerate_ball(&f2(), 8).unwrap();
        let e = w.subspace(vec![0]);
        assert_eq!(find_separating_radius(&w, &e, 0, 3, 8).unwrap().t, 0);

        let b1 = relative_ball(&w, 1).unwrap();
        let sep = find_separating_radius(&w, &b1, 0, 2, 8).unwrap();
        assert!(sep.t <= 8);
        let w2 = union_assemble(&sep.parts, &sep.y, 2).unwrap();
        assert!(w2.verify().valid);

        let small = enumerate_ball(&f2(), 2).unwrap();
        let b1 = relative_ball(&small, 1).unwrap();
        assert!(matches!(
            find_separating_radius(&small, &b1, 0, 100, 8),
            Err(PipelineError::NotFound(8))
        ));
    }

    #[test]
    fn ball_chains_verify() {
        let w = enumerate_ball(&f2(), 5).unwrap();
        let c = ball_chain(&w, 0, &[1], 0).unwrap();
        assert!(c.chain.steps.is_empty());
        assert!(verify_chain(&c.chain).valid);

        let c = ball_chain(&w, 1, &[1, 2], 2).unwrap();
        let report = verify_chain(&c.chain);
        assert!(report.valid, "{:?}", report.problems);

        let w8 = enumerate_relative_window(&f2(), 8, 2).unwrap();
        let c = ball_chain(&w8, 2, &[1, 2, 4], 8).unwrap();
        let report = verify_chain(&c.chain);
        assert!(report.valid, "{:?}", report.problems);
    }
}
