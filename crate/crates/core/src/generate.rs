//! Standard test spaces and seeded random instances.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::metric::{Dist, FiniteMetricSpace, Point};

fn graph(id: String, names: Vec<String>, edges: Vec<(Point, Point)>) -> Arc<FiniteMetricSpace> {
    Arc::new(FiniteMetricSpace::from_indexed_graph(id, names, edges).expect("connected generator"))
}

/// Path graph on points `0..n`.
pub fn path(n: usize) -> Arc<FiniteMetricSpace> {
    let names = (0..n).map(|i| i.to_string()).collect();
    let edges = (1..n).map(|i| (i - 1, i)).collect();
    graph(format!("P{n}"), names, edges)
}

pub fn cycle(n: usize) -> Arc<FiniteMetricSpace> {
    let names = (0..n).map(|i| i.to_string()).collect();
    let edges = (0..n).map(|i| (i, (i + 1) % n)).collect();
    graph(format!("C{n}"), names, edges)
}

/// Grid graph with points named `"x,y"` for `x < cols`, `y < rows`; point
/// index is `y * cols + x`.
pub fn grid(rows: usize, cols: usize) -> Arc<FiniteMetricSpace> {
    let mut names = Vec::with_capacity(rows * cols);
    let mut edges = Vec::new();
    for y in 0..rows {
        for x in 0..cols {
            names.push(format!("{x},{y}"));
            let i = y * cols + x;
            if x > 0 {
                edges.push((i - 1, i));
            }
            if y > 0 {
                edges.push((i - cols, i));
            }
        }
    }
    graph(format!("G{rows}x{cols}"), names, edges)
}

pub fn complete(n: usize) -> Arc<FiniteMetricSpace> {
    let names = (0..n).map(|i| i.to_string()).collect();
    let edges = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
    graph(format!("K{n}"), names, edges)
}

/// A random finite metric: shortest-path closure of a connected graph on `n`
/// points with integer edge weights in `1..=max_weight`.
pub fn random_space(seed: u64, n: usize, max_weight: Dist) -> Arc<FiniteMetricSpace> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let inf = Dist::MAX / 4;
    let mut d = vec![inf; n * n];
    for i in 0..n {
        d[i * n + i] = 0;
    }
    let set = |d: &mut Vec<Dist>, i: usize, j: usize, w: Dist| {
        d[i * n + j] = d[i * n + j].min(w);
        d[j * n + i] = d[j * n + i].min(w);
    };
    // random spanning tree, then extra edges
    for i in 1..n {
        let j = rng.gen_range(0..i);
        let w = rng.gen_range(1..=max_weight);
        set(&mut d, i, j, w);
    }
    let extra = if n > 1 { rng.gen_range(0..=n) } else { 0 };
    for _ in 0..extra {
        let i = rng.gen_range(0..n);
        let j = rng.gen_range(0..n);
        if i != j {
            let w = rng.gen_range(1..=max_weight);
            set(&mut d, i, j, w);
        }
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                let via = d[i * n + k] + d[k * n + j];
                if via < d[i * n + j] {
                    d[i * n + j] = via;
                }
            }
        }
    }
    let names = (0..n).map(|i| i.to_string()).collect();
    let dense = d.into_iter().map(|x| x as u32).collect();
    Arc::new(FiniteMetricSpace::from_trusted_matrix(format!("rand{seed}n{n}"), names, dense, None))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn random_spaces_satisfy_axioms() {
        for seed in 0..20 {
            let s = random_space(seed, 1 + (seed as usize % 8), 3);
            let n = s.len();
            for x in 0..n {
                for y in 0..n {
                    assert_eq!(s.dist(x, y), s.dist(y, x));
                    assert_eq!(s.dist(x, y) == 0, x == y);
                    for z in 0..n {
                        assert!(s.dist(x, z) <= s.dist(x, y) + s.dist(y, z));
                    }
                }
            }
        }
    }

    #[test]
    fn generators_are_deterministic() {
        let a = random_space(7, 6, 3);
        let b = random_space(7, 6, 3);
        assert_eq!(a.dense(), b.dense());
    }
}
