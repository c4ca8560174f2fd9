//! Pulling a base chain back along a uniformly expansive map and continuing
//! with chains on the fibers over the bounded base pieces.

use std::sync::Arc;

use super::{check_increasing, PipelineError};
use crate::coarse::CoarseMapWitness;
use crate::groups::{GroupWindow, TranslationAction};
use crate::metric::{Dist, Point, Subspace};
use crate::witness::{
    relocate_chain, restrict_chain, same_family, DecompositionChain, DecompositionWitness, FamilyWitness,
    TargetClass,
};

/// Supplies a chain over `{fiber}` for the fiber over a bounded base piece.
pub trait FiberProvider {
    fn fiber_chain(&self, base_piece: &Subspace, fiber: &Subspace, scales: &[Dist])
        -> Result<DecompositionChain, PipelineError>;
}

impl<F> FiberProvider for F
where
    F: Fn(&Subspace, &Subspace, &[Dist]) -> Result<DecompositionChain, PipelineError>,
{
    fn fiber_chain(&self, base_piece: &Subspace, fiber: &Subspace, scales: &[Dist])
        -> Result<DecompositionChain, PipelineError> {
        self(base_piece, fiber, scales)
    }
}

/// Fiber chains given up front, looked up by their start set.
#[derive(Clone, Debug, Default)]
pub struct ExplicitFibers {
    pub chains: Vec<DecompositionChain>,
}

impl FiberProvider for ExplicitFibers {
    fn fiber_chain(&self, base_piece: &Subspace, fiber: &Subspace, _scales: &[Dist])
        -> Result<DecompositionChain, PipelineError> {
        let want = [fiber.clone()];
        self.chains
            .iter()
            .find(|c| same_family(&c.start, &want))
            .cloned()
            .ok_or_else(|| PipelineError::MissingFiber(format!("{base_piece:?}")))
    }
}

pub struct FiberingInput<'a> {
    /// `f: E → B`.
    pub map: &'a CoarseMapWitness,
    /// Chain over `{B}` at scales `ρ(R₁) < … < ρ(R_m)`.
    pub base_chain: &'a DecompositionChain,
    pub fibers: &'a dyn FiberProvider,
}

/// Chain over `{E}`: the base steps pulled back at scales `R₁ … R_m`, then
/// the fiber chains at `R_{m+1} …`, merged step by step across fibers.
/// Shorter fiber chains are padded with trivial steps.
pub fn pullback_chain(input: &FiberingInput<'_>, scales: &[Dist]) -> Result<DecompositionChain, PipelineError> {
    check_increasing(scales)?;
    let f = input.map;
    let base = input.base_chain;
    let m = base.steps.len();
    if scales.len() < m {
        return Err(PipelineError::ScaleMismatch(format!(
            "{} scales for a base chain of {m} steps",
            scales.len()
        )));
    }
    for (i, step) in base.steps.iter().enumerate() {
        let expect = f.rho_plus.eval(scales[i]);
        if step.r != expect {
            return Err(PipelineError::ScaleMismatch(format!(
                "base step {} has scale {} but ρ({}) = {expect}",
                i + 1,
                step.r,
                scales[i]
            )));
        }
    }
    if base.start.iter().any(|s| s.ambient().id() != f.target.id()) {
        return Err(PipelineError::InvalidInput("base chain does not live on the map's target".into()));
    }
    let preimage = |s: &Subspace| Subspace::new(f.source.clone(), f.preimage(s.points())).expect("source points");
    let start: Vec<Subspace> = base.start.iter().map(preimage).filter(|s| !s.is_empty()).collect();
    let mut steps = Vec::with_capacity(scales.len());
    for (step, &r) in base.steps.iter().zip(scales) {
        let members = step
            .members
            .iter()
            .map(|w| {
                let space = preimage(&w.space);
                let labels = space
                    .points()
                    .iter()
                    .filter_map(|&p| w.label(f.map[p]).map(|l| (p, l)))
                    .collect();
                let target = TargetClass::ClosureOf(w.pieces().iter().map(|p| preimage(&p.set)).collect());
                DecompositionWitness { space, k: w.k, r, labels, target }
            })
            .filter(|w| !w.space.is_empty())
            .collect();
        steps.push(FamilyWitness { k: step.k, r, members });
    }

    let tail = &scales[m..];
    let mut fiber_chains = Vec::new();
    for piece in base.final_family() {
        let fiber = preimage(&piece);
        if fiber.is_empty() {
            continue;
        }
        let c = input.fibers.fiber_chain(&piece, &fiber, tail)?;
        if !same_family(&c.start, std::slice::from_ref(&fiber)) {
            return Err(PipelineError::MissingFiber(format!("chain supplied for {piece:?} starts elsewhere")));
        }
        if c.steps.len() > tail.len() || c.scales().iter().zip(tail).any(|(a, b)| a != b) {
            return Err(PipelineError::ScaleMismatch(format!(
                "fiber chain scales {:?} are not a prefix of {tail:?}",
                c.scales()
            )));
        }
        fiber_chains.push(c);
    }
    let depth = fiber_chains.iter().map(|c| c.steps.len()).max().unwrap_or(0);
    for (j, &r) in tail.iter().enumerate().take(depth) {
        let mut members = Vec::new();
        for c in &fiber_chains {
            match c.steps.get(j) {
                Some(step) => members.extend(step.members.iter().cloned()),
                None => members.extend(c.final_family().into_iter().map(|s| {
                    DecompositionWitness::trivial(s.clone(), r, TargetClass::ClosureOf(vec![s]))
                })),
            }
        }
        steps.push(FamilyWitness::new(r, members));
    }
    let final_bound = fiber_chains
        .iter()
        .map(|c| c.final_bound)
        .max()
        .unwrap_or(base.final_bound);
    Ok(DecompositionChain { start, steps, final_bound, strict: true })
}

/// Fibers of the identity map from a word-metric window onto its relative
/// graph, decomposed by translating one chain over `B(n)` in a fiber window.
pub struct GroupFibers<'a> {
    pub window: &'a GroupWindow,
    pub fiber_window: &'a GroupWindow,
    /// Chain over `{B(n) ∩ fiber_window}`.
    pub ball_chain: &'a DecompositionChain,
}

impl FiberProvider for GroupFibers<'_> {
    fn fiber_chain(&self, base_piece: &Subspace, fiber: &Subspace, scales: &[Dist])
        -> Result<DecompositionChain, PipelineError> {
        let _ = base_piece;
        let spec = self.window.spec();
        let z = *fiber.points().first().ok_or_else(|| PipelineError::MissingFiber("empty fiber".into()))?;
        let back = TranslationAction::new(spec.clone(), spec.inverse(self.window.element(z)))?;
        let local = back
            .map_points(self.window, self.fiber_window, fiber.points())
            .map_err(|e| PipelineError::TranslateFailure(e.to_string()))?;
        let local = self.fiber_window.subspace(local);
        let ball = &self.ball_chain.start[0];
        if !local.is_subset_of(ball) {
            return Err(PipelineError::TranslateFailure(format!(
                "translate of {fiber:?} is not inside the relative ball"
            )));
        }
        if self.ball_chain.scales().iter().zip(scales).any(|(a, b)| a != b) {
            return Err(PipelineError::ScaleMismatch("fiber ball chain built at other scales".into()));
        }
        let restricted = restrict_chain(self.ball_chain, &local)?;
        let there = back.inverse();
        let target: &Arc<_> = self.window.s_space();
        let image = |p: Point| -> Option<Point> { self.window.point_of(&there.apply(self.fiber_window.element(p))) };
        for (i, &a) in local.points().iter().enumerate() {
            for &b in &local.points()[i + 1..] {
                let (ia, ib) = (image(a), image(b));
                let same = matches!((ia, ib), (Some(x), Some(y))
                    if target.dist(x, y) == self.fiber_window.s_space().dist(a, b));
                if !same {
                    return Err(PipelineError::TranslateFailure(format!(
                        "translation does not preserve d({}, {})",
                        self.fiber_window.s_space().name(a),
                        self.fiber_window.s_space().name(b)
                    )));
                }
            }
        }
        Ok(relocate_chain(&restricted, target, &image)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coarse::ModulusTable;
    use crate::generate;
    use crate::witness::verify_chain;

    fn blocks(space: &Subspace, r: Dist, width: usize, target: TargetClass) -> DecompositionWitness {
        let mut classes = vec![Vec::new(), Vec::new()];
        for (i, chunk) in space.points().chunks(width).enumerate() {
            classes[i % 2].push(chunk.to_vec());
        }
        DecompositionWitness::from_pieces(space.clone(), r, target, classes)
    }

    #[test]
    fn identity_map_appends_singleton_fibers() {
        let p = generate::path(12);
        let whole = Subspace::whole(p.clone());
        let w = blocks(&whole, 2, 3, TargetClass::Bounded(2));
        let base = DecompositionChain {
            start: vec![whole.clone()],
            steps: vec![FamilyWitness::new(2, vec![w])],
            final_bound: 2,
            strict: true,
        };
        let map = CoarseMapWitness::identity(p.clone());
        let fibers = |_: &Subspace, fiber: &Subspace, scales: &[Dist]| -> Result<DecompositionChain, PipelineError> {
            let classes = fiber.points().iter().map(|&q| vec![vec![q]]).collect();
            let first = DecompositionWitness::from_pieces(fiber.clone(), scales[0], TargetClass::Bounded(0), classes);
            Ok(DecompositionChain {
                start: vec![fiber.clone()],
                steps: vec![FamilyWitness::new(scales[0], vec![first])],
                final_bound: 0,
                strict: true,
            })
        };
        let input = FiberingInput { map: &map, base_chain: &base, fibers: &fibers };
        let out = pullback_chain(&input, &[2, 3]).unwrap();
        assert_eq!(out.scales(), vec![2, 3]);
        let report = verify_chain(&out);
        assert!(report.valid, "{report:?}");
        assert_eq!(out.final_bound, 0);
    }

    #[test]
    fn base_scale_mismatch() {
        let p = generate::path(6);
        let whole = Subspace::whole(p.clone());
        let base = DecompositionChain {
            start: vec![whole.clone()],
            steps: vec![FamilyWitness::new(3, vec![DecompositionWitness::trivial(whole, 3, TargetClass::Bounded(5))])],
            final_bound: 5,
            strict: true,
        };
        let mut map = CoarseMapWitness::identity(p);
        map.rho_plus = ModulusTable::from_fn(10, |t| 2 * t).unwrap();
        let input = FiberingInput { map: &map, base_chain: &base, fibers: &ExplicitFibers::default() };
        assert!(matches!(pullback_chain(&input, &[3]), Err(PipelineError::ScaleMismatch(_))));
    }
}
