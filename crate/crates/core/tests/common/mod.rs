//! Independent oracles for the integration tests. Nothing here calls the
//! solver or norm code under test; only graph accessors are shared.

#![allow(dead_code)]

use std::collections::VecDeque;

use graphvar::{GraphBuilder, VertexFunction, WeightedGraph};
use rand::Rng;

/// Random connected graph: a random recursive tree plus extra chords.
pub fn random_connected_graph(
    rng: &mut impl Rng,
    n: usize,
    weights: (f64, f64),
    measures: (f64, f64),
    chord_prob: f64,
) -> WeightedGraph {
    let id = |i: usize| format!("v{i:03}");
    let mut b = GraphBuilder::new();
    for i in 0..n {
        b.add_vertex(&id(i));
    }
    for i in 1..n {
        let j = rng.random_range(0..i);
        b.add_edge(&id(i), &id(j), rng.random_range(weights.0..=weights.1))
            .unwrap();
    }
    for i in 0..n {
        for j in i + 2..n {
            if rng.random_bool(chord_prob) {
                // may duplicate a tree edge; keep the existing weight then
                let w = rng.random_range(weights.0..=weights.1);
                if b.add_edge(&id(i), &id(j), w).is_err() {
                    continue;
                }
            }
        }
    }
    for i in 0..n {
        b.set_measure(&id(i), rng.random_range(measures.0..=measures.1))
            .unwrap();
    }
    b.build().unwrap()
}

pub fn path(n: usize) -> WeightedGraph {
    let mut b = GraphBuilder::new();
    for i in 0..n - 1 {
        b.add_edge(&format!("{i:04}"), &format!("{:04}", i + 1), 1.0)
            .unwrap();
    }
    b.build().unwrap()
}

/// Hop distances by breadth-first search.
pub fn bfs(graph: &WeightedGraph, origin: usize) -> Vec<usize> {
    let mut dist = vec![usize::MAX; graph.vertex_count()];
    dist[origin] = 0;
    let mut queue = VecDeque::from([origin]);
    while let Some(x) = queue.pop_front() {
        for (y, _) in graph.neighbors(x) {
            if dist[y] == usize::MAX {
                dist[y] = dist[x] + 1;
                queue.push_back(y);
            }
        }
    }
    dist
}

/// Vertices with `ρ < radius`.
pub fn interior(graph: &WeightedGraph, origin: usize, radius: usize) -> Vec<usize> {
    bfs(graph, origin)
        .iter()
        .enumerate()
        .filter(|(_, &d)| d < radius)
        .map(|(x, _)| x)
        .collect()
}

/// `Δu(x) = (1/μ(x)) Σ_y w_xy (u(y) − u(x))`.
pub fn laplacian(graph: &WeightedGraph, u: &[f64], x: usize) -> f64 {
    graph
        .neighbors(x)
        .map(|(y, w)| w * (u[y] - u[x]))
        .sum::<f64>()
        / graph.measure(x)
}

/// `∫_V |∇u|² dμ + ∫_V h u² dμ`, each undirected edge counted once.
pub fn h_norm_sq(graph: &WeightedGraph, u: &[f64], h: &[f64]) -> f64 {
    let mut grad = 0.0;
    for x in 0..graph.vertex_count() {
        for (y, w) in graph.neighbors(x) {
            if x < y {
                grad += w * (u[y] - u[x]).powi(2);
            }
        }
    }
    let pot: f64 = (0..graph.vertex_count())
        .map(|x| graph.measure(x) * h[x] * u[x] * u[x])
        .sum();
    grad + pot
}

/// Gaussian elimination with partial pivoting.
pub fn dense_solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
            .unwrap();
        a.swap(col, piv);
        b.swap(col, piv);
        for row in col + 1..n {
            let factor = a[row][col] / a[col][col];
            if factor != 0.0 {
                for k in col..n {
                    a[row][k] -= factor * a[col][k];
                }
                b[row] -= factor * b[col];
            }
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let s: f64 = (row + 1..n).map(|k| a[row][k] * x[k]).sum();
        x[row] = (b[row] - s) / a[row][row];
    }
    x
}

/// Matrix of `u ↦ (−Δu + c u)` restricted to `set`, with `u = 0` off `set`.
pub fn dirichlet_matrix(graph: &WeightedGraph, set: &[usize], c: &[f64]) -> Vec<Vec<f64>> {
    let n = set.len();
    let slot = |y: usize| set.iter().position(|&s| s == y);
    let mut a = vec![vec![0.0; n]; n];
    for (i, &x) in set.iter().enumerate() {
        let mu = graph.measure(x);
        a[i][i] += c[x];
        for (y, w) in graph.neighbors(x) {
            a[i][i] += w / mu;
            if let Some(j) = slot(y) {
                a[i][j] -= w / mu;
            }
        }
    }
    a
}

/// Direct solve of `−Δu + hu = f` on `set` with zero values elsewhere.
pub fn dense_schrodinger(graph: &WeightedGraph, set: &[usize], h: &[f64], f: &[f64]) -> Vec<f64> {
    let a = dirichlet_matrix(graph, set, h);
    let b = set.iter().map(|&x| f[x]).collect();
    let sol = dense_solve(a, b);
    let mut u = vec![0.0; graph.vertex_count()];
    for (i, &x) in set.iter().enumerate() {
        u[x] = sol[i];
    }
    u
}

pub fn schrodinger_residual(graph: &WeightedGraph, h: &[f64], f: &[f64], u: &[f64], at: &[usize]) -> f64 {
    at.iter()
        .map(|&x| (-laplacian(graph, u, x) + h[x] * u[x] - f[x]).abs())
        .fold(0.0, f64::max)
}

pub fn negative_mf_residual(graph: &WeightedGraph, f: &[f64], g: &[f64], u: &[f64], at: &[usize]) -> f64 {
    at.iter()
        .map(|&x| (laplacian(graph, u, x) - f[x] + g[x] * u[x].exp()).abs())
        .fold(0.0, f64::max)
}

/// Residual of the normalized equation with `γ = ∫_{set} g e^u` recomputed.
pub fn normalized_mf_residual(
    graph: &WeightedGraph,
    h: &[f64],
    f: &[f64],
    g: &[f64],
    u: &[f64],
    set: &[usize],
) -> f64 {
    let gamma: f64 = set.iter().map(|&x| graph.measure(x) * g[x] * u[x].exp()).sum();
    set.iter()
        .map(|&x| (-laplacian(graph, u, x) + h[x] * u[x] - g[x] * u[x].exp() / gamma + f[x]).abs())
        .fold(0.0, f64::max)
}

pub fn yamabe_residual(graph: &WeightedGraph, h: &[f64], q: f64, u: &[f64], at: &[usize]) -> f64 {
    at.iter()
        .map(|&x| (-laplacian(graph, u, x) + h[x] * u[x] - u[x].abs().powf(q - 2.0) * u[x]).abs())
        .fold(0.0, f64::max)
}

pub fn integral(graph: &WeightedGraph, set: &[usize], f: impl Fn(usize) -> f64) -> f64 {
    set.iter().map(|&x| graph.measure(x) * f(x)).sum()
}

pub fn all(graph: &WeightedGraph) -> Vec<usize> {
    (0..graph.vertex_count()).collect()
}

pub fn values(u: &VertexFunction) -> Vec<f64> {
    u.values().to_vec()
}

pub fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}
