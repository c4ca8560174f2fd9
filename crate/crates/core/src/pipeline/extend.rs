//! From a decomposition of the relative Cayley graph window to a chain over
//! the word-metric window, stage by stage.

use serde::Serialize;
use serde_json::Value;

use super::{ball_chain, check_increasing, pullback_chain, FiberingInput, GroupFibers, PipelineError};
use crate::coarse::{CoarseMapWitness, ModulusTable};
use crate::groups::{enumerate_ball, enumerate_relative_window, GroupSpec, GroupWindow};
use crate::io::Certificate;
use crate::metric::{Dist, Subspace};
use crate::search::{asdim_profile, DRule, SearchBudget, SearchMode};
use crate::witness::{verify_chain, DecompositionChain, FamilyWitness};

#[derive(Clone, Debug, Serialize)]
pub struct Stage {
    pub name: String,
    pub valid: bool,
    /// Self-contained certificate, when the stage produces one.
    pub certificate: Option<Value>,
    pub report: Value,
    pub error: Option<String>,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct PipelineParameters {
    pub window: u64,
    pub rel_radius: Dist,
    pub scales: Vec<Dist>,
    pub window_size: usize,
    /// Diameter bound of base pieces in the relative metric.
    pub base_bound: Dist,
    pub base_colors: u32,
    pub fiber_window: u64,
    pub fiber_window_size: usize,
    pub fiber_bound: Dist,
    /// Thickening radius per peripheral subgroup; `None` if none was found.
    pub separation_radii: Vec<Option<Dist>>,
    /// Base pieces containing an element on the window boundary, where
    /// relative distances are most affected by truncation.
    pub boundary_pieces: usize,
    pub base_pieces: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct PipelineReport {
    pub spec: GroupSpec,
    pub stages: Vec<Stage>,
    pub overall: bool,
    pub parameters: PipelineParameters,
    #[serde(skip)]
    pub chain: Option<DecompositionChain>,
}

struct Run {
    stages: Vec<Stage>,
}

impl Run {
    /// Certificates are embedded only when they verified.
    fn push(&mut self, name: &str, certificate: Option<Certificate>, report: Value, valid: bool) {
        self.stages.push(Stage {
            name: name.into(),
            valid,
            certificate: certificate.filter(|_| valid).map(|c| c.to_json()),
            report,
            error: None,
        });
    }

    fn fail(&mut self, name: &str, e: PipelineError) {
        self.stages.push(Stage {
            name: name.into(),
            valid: false,
            certificate: None,
            report: Value::Null,
            error: Some(e.to_string()),
        });
    }
}

fn chain_stage(run: &mut Run, name: &str, c: &DecompositionChain) -> bool {
    let report = verify_chain(c);
    let valid = report.valid;
    run.push(name, Some(Certificate::Chain(c.clone())), serde_json::to_value(&report).expect("report"), valid);
    valid
}

/// Runs the five stages: window, base decomposition of the relative
/// metric, contraction check of the identity map, fiber chain over `B(n)`,
/// and the pullback. Stops at the first failing stage.
pub fn extend_group_chain(spec: &GroupSpec, window: u64, n: Dist, scales: &[Dist]) -> PipelineReport {
    let mut run = Run { stages: Vec::new() };
    let mut params = PipelineParameters { window, rel_radius: n, scales: scales.to_vec(), ..Default::default() };
    let chain = stages(spec, window, n, scales, &mut run, &mut params);
    let overall = chain.is_some() && run.stages.iter().all(|s| s.valid);
    PipelineReport { spec: spec.clone(), stages: run.stages, overall, parameters: params, chain }
}

fn stages(
    spec: &GroupSpec,
    window: u64,
    n: Dist,
    scales: &[Dist],
    run: &mut Run,
    params: &mut PipelineParameters,
) -> Option<DecompositionChain> {
    // 1. window
    let w = match build_window(spec, window, n, scales) {
        Ok(w) => w,
        Err(e) => {
            run.fail("window", e);
            return None;
        }
    };
    params.window_size = w.len();
    let rel = match w.rel_space() {
        Ok(r) => r.clone(),
        Err(e) => {
            run.fail("window", e.into());
            return None;
        }
    };
    let summary = serde_json::json!({
        "elements": w.len(),
        "s_edges": w.s_edges().len(),
        "h_edges": w.h_edges().len(),
        "peripherals": w.peripheral_count(),
    });
    run.push("window", None, summary, true);

    // 2. base: the relative metric decomposed at the first scale
    let r1 = scales[0];
    let whole_rel = Subspace::whole(rel.clone());
    let budget = SearchBudget { max_k: u32::MAX, max_points: 0, mode: SearchMode::Heuristic };
    let row = match asdim_profile(&whole_rel, &[r1], DRule::Constant(n), budget) {
        Ok(mut rows) => rows.remove(0),
        Err(e) => {
            run.fail("base", e.into());
            return None;
        }
    };
    params.base_bound = n;
    params.base_colors = row.k;
    let base_chain = DecompositionChain {
        start: vec![whole_rel],
        steps: vec![FamilyWitness::new(r1, vec![row.witness])],
        final_bound: n,
        strict: true,
    };
    if !chain_stage(run, "base", &base_chain) {
        return None;
    }

    // 3. the identity map from the word metric onto the relative metric
    let s_space = w.s_space().clone();
    let p = CoarseMapWitness {
        source: s_space.clone(),
        target: rel.clone(),
        map: (0..w.len()).collect(),
        rho_plus: ModulusTable::identity(s_space.diameter().max(1)),
        rho_minus: None,
        contractive: true,
    };
    let report = p.check();
    let valid = report.valid && report.contractive;
    run.push("contraction", Some(Certificate::Map(p.clone())), serde_json::to_value(&report).expect("report"), valid);
    if !valid {
        return None;
    }

    // 4. one chain over B(n) in a window large enough for every translated fiber
    let pieces = base_chain.final_family();
    params.base_pieces = pieces.len();
    params.boundary_pieces = pieces
        .iter()
        .filter(|z| z.points().iter().any(|&q| w.spec().length_unchecked(w.element(q)) == window))
        .count();
    let reach = pieces
        .iter()
        .map(|z| {
            let first = w.element(z.points()[0]);
            let inv = spec.inverse(first);
            z.points().iter().map(|&q| spec.length_unchecked(&spec.multiply(&inv, w.element(q)))).max().unwrap_or(0)
        })
        .max()
        .unwrap_or(0);
    let fiber_radius = reach.max(n + 1);
    params.fiber_window = fiber_radius;
    let fw = match enumerate_relative_window(spec, fiber_radius, n as usize) {
        Ok(fw) => fw,
        Err(e) => {
            run.fail("fibers", e.into());
            return None;
        }
    };
    params.fiber_window_size = fw.len();
    let fiber_scales = &scales[1..];
    let fiber_bound = 2 * scales[1];
    params.fiber_bound = fiber_bound;
    let bc = match ball_chain(&fw, n, fiber_scales, fiber_bound) {
        Ok(bc) => bc,
        Err(e) => {
            run.fail("fibers", e);
            return None;
        }
    };
    params.separation_radii = bc.radii.clone();
    if !chain_stage(run, "fibers", &bc.chain) {
        return None;
    }

    // 5. pullback
    let provider = GroupFibers { window: &w, fiber_window: &fw, ball_chain: &bc.chain };
    let input = FiberingInput { map: &p, base_chain: &base_chain, fibers: &provider };
    let chain = match pullback_chain(&input, scales) {
        Ok(c) => c,
        Err(e) => {
            run.fail("pullback", e);
            return None;
        }
    };
    chain_stage(run, "pullback", &chain).then_some(chain)
}

fn build_window(spec: &GroupSpec, window: u64, n: Dist, scales: &[Dist]) -> Result<GroupWindow, PipelineError> {
    check_increasing(scales)?;
    if scales.len() < 2 {
        return Err(PipelineError::InvalidInput("need a base scale and at least one fiber scale".into()));
    }
    if !matches!(spec, GroupSpec::FreeProduct { .. }) {
        return Err(PipelineError::InvalidInput("the pipeline needs a free product".into()));
    }
    if window <= n {
        return Err(PipelineError::WindowTooSmall { radius: window, n });
    }
    Ok(enumerate_ball(spec, window)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn too_small_window_fails_first_stage() {
        let zz = GroupSpec::free_product(vec![GroupSpec::Cyclic { order: 2 }, GroupSpec::Cyclic { order: 3 }]);
        let report = extend_group_chain(&zz, 2, 2, &[1, 2]);
        assert!(!report.overall);
        assert_eq!(report.stages.len(), 1);
        assert_eq!(report.stages[0].name, "window");
        assert!(report.stages[0].error.as_deref().unwrap().contains("too small"));
    }

    #[test]
    fn small_free_product_runs_through() {
        let zz = GroupSpec::free_product(vec![GroupSpec::Cyclic { order: 2 }, GroupSpec::Cyclic { order: 3 }]);
        let report = extend_group_chain(&zz, 5, 2, &[1, 2, 3, 5, 8]);
        let names: Vec<&str> = report.stages.iter().map(|s| s.name.as_str()).collect();
        assert_eq!(names, vec!["window", "base", "contraction", "fibers", "pullback"], "{:?}", report.stages);
        assert!(report.overall);
    }
}
