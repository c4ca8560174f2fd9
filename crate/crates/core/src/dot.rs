//! Graphviz output for graph-backed spaces and group windows.

use std::collections::BTreeMap;
use std::fmt::Write;

use crate::groups::GroupWindow;
use crate::metric::{FiniteMetricSpace, Point};
use crate::witness::DecompositionWitness;

const PALETTE: [&str; 10] = [
    "#8dd3c7", "#ffffb3", "#bebada", "#fb8072", "#80b1d3", "#fdb462", "#b3de69", "#fccde5", "#d9d9d9", "#bc80bd",
];

fn quote(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

fn node_lines(out: &mut String, space: &FiniteMetricSpace, witness: Option<&DecompositionWitness>) {
    let pieces: BTreeMap<Point, (u32, u32)> = witness
        .map(|w| {
            w.pieces()
                .into_iter()
                .enumerate()
                .flat_map(|(i, p)| p.set.points().iter().map(move |&q| (q, (p.color, i as u32))).collect::<Vec<_>>())
                .collect()
        })
        .unwrap_or_default();
    for p in 0..space.len() {
        let name = quote(space.name(p));
        match pieces.get(&p) {
            Some(&(color, piece)) => {
                let fill = PALETTE[color as usize % PALETTE.len()];
                let _ = writeln!(
                    out,
                    "  {name} [style=filled, fillcolor=\"{fill}\", group=\"piece{piece}\", tooltip=\"color {color}, piece {piece}\"];"
                );
            }
            None => {
                let _ = writeln!(out, "  {name};");
            }
        }
    }
}

/// The graph of a graph-backed space; group-backed spaces use their
/// generator edges (pairs at distance one). `None` for explicit metrics.
pub fn space_to_dot(space: &FiniteMetricSpace, witness: Option<&DecompositionWitness>) -> Option<String> {
    let edges: Vec<(Point, Point)> = match (space.edges(), space.group()) {
        (Some(e), _) => e.to_vec(),
        (None, Some(_)) => (0..space.len())
            .flat_map(|a| (a + 1..space.len()).map(move |b| (a, b)))
            .filter(|&(a, b)| space.dist(a, b) == 1)
            .collect(),
        (None, None) => return None,
    };
    let mut out = format!("graph {} {{\n", quote(space.id()));
    node_lines(&mut out, space, witness);
    for (a, b) in edges {
        let _ = writeln!(out, "  {} -- {};", quote(space.name(a)), quote(space.name(b)));
    }
    out.push_str("}\n");
    Some(out)
}

/// The relative Cayley graph of a window: S-edges solid, ℋ-edges dashed.
pub fn window_to_dot(w: &GroupWindow, witness: Option<&DecompositionWitness>) -> String {
    let space = w.s_space();
    let mut out = format!("graph {} {{\n", quote(&format!("rel-{}", space.id())));
    node_lines(&mut out, space, witness);
    for &(a, b) in w.s_edges() {
        let _ = writeln!(out, "  {} -- {};", quote(space.name(a)), quote(space.name(b)));
    }
    let s: std::collections::HashSet<(Point, Point)> = w.s_edges().iter().copied().collect();
    for (a, b) in w.h_edges() {
        if !s.contains(&(a, b)) {
            let _ = writeln!(out, "  {} -- {} [style=dashed];", quote(space.name(a)), quote(space.name(b)));
        }
    }
    out.push_str("}\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generate;
    use crate::groups::{enumerate_ball, GroupSpec};
    use crate::metric::Subspace;
    use crate::witness::TargetClass;

    #[test]
    fn path_with_coloring() {
        let p = generate::path(4);
        let w = DecompositionWitness::from_coloring(Subspace::whole(p.clone()), 2, 1, TargetClass::Bounded(1), &[0, 0, 1, 1]);
        let dot = space_to_dot(&p, Some(&w)).unwrap();
        assert_eq!(dot.matches(" -- ").count(), 3);
        assert_eq!(dot.matches("fillcolor=\"#8dd3c7\"").count(), 2);
        assert!(dot.contains("group=\"piece1\""));
    }

    #[test]
    fn explicit_metric_has_no_graph() {
        let s = generate::random_space(3, 5, 4);
        assert!(space_to_dot(&s, None).is_none());
    }

    #[test]
    fn window_styles_edges() {
        let f2 = GroupSpec::free_product(vec![GroupSpec::FreeAbelian { rank: 1 }, GroupSpec::FreeAbelian { rank: 1 }]);
        let w = enumerate_ball(&f2, 2).unwrap();
        let dot = window_to_dot(&w, None);
        let solid = dot.lines().filter(|l| l.contains(" -- ") && !l.contains("dashed")).count();
        assert_eq!(solid, w.s_edges().len());
        assert_eq!(solid, 16);
        assert!(dot.lines().any(|l| l.contains("dashed")));
    }
}
