//! Sparse Dirichlet operators on ball interiors and a Jacobi-preconditioned
//! conjugate gradient solver for them.

use crate::error::{Error, Result};
use crate::graph::{Ball, WeightedGraph};

/// The Dirichlet form of a ball, restricted to interior vertices.
///
/// Row `i` (interior vertex `x`) has `Σ_{y~x} w_xy` on the diagonal, summed
/// over all neighbors including boundary ones, and `−w_xy` for each interior
/// neighbor `y`. Boundary values are pinned at zero, so they drop out.
#[derive(Debug, Clone)]
pub struct InteriorOperator {
    vertices: Vec<usize>,
    mass: Vec<f64>,
    degree: Vec<f64>,
    offsets: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
}

impl InteriorOperator {
    pub fn new(graph: &WeightedGraph, ball: &Ball) -> Self {
        let vertices = ball.interior().to_vec();
        let mut mass = Vec::with_capacity(vertices.len());
        let mut degree = Vec::with_capacity(vertices.len());
        let mut offsets = vec![0];
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        for &x in &vertices {
            mass.push(graph.measure(x));
            let mut d = 0.0;
            for (y, w) in graph.neighbors(x) {
                d += w;
                if let Some(j) = ball.slot(y) {
                    cols.push(j);
                    vals.push(w);
                }
            }
            degree.push(d);
            offsets.push(cols.len());
        }
        InteriorOperator {
            vertices,
            mass,
            degree,
            offsets,
            cols,
            vals,
        }
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    /// Host-graph vertex of each row.
    pub fn vertices(&self) -> &[usize] {
        &self.vertices
    }

    /// Vertex measures in row order.
    pub fn mass(&self) -> &[f64] {
        &self.mass
    }

    /// `out = K x + shift ∘ x`.
    pub fn apply(&self, shift: &[f64], x: &[f64], out: &mut [f64]) {
        for i in 0..self.len() {
            let mut s = (self.degree[i] + shift[i]) * x[i];
            for k in self.offsets[i]..self.offsets[i + 1] {
                s -= self.vals[k] * x[self.cols[k]];
            }
            out[i] = s;
        }
    }

    /// `xᵀ K x`, i.e. the sum over edges touching the interior of
    /// `w_xy (x_y − x_x)²` with boundary values zero.
    pub fn dirichlet_form(&self, x: &[f64]) -> f64 {
        let mut out = vec![0.0; self.len()];
        self.apply(&vec![0.0; self.len()], x, &mut out);
        dot(x, &out)
    }

    pub fn diagonal(&self, shift: &[f64]) -> Vec<f64> {
        self.degree.iter().zip(shift).map(|(d, s)| d + s).collect()
    }

    /// Dense copy of `K + diag(shift)`, row-major. Meant for small systems.
    pub fn to_dense(&self, shift: &[f64]) -> Vec<Vec<f64>> {
        let n = self.len();
        let mut a = vec![vec![0.0; n]; n];
        for i in 0..n {
            a[i][i] = self.degree[i] + shift[i];
            for k in self.offsets[i]..self.offsets[i + 1] {
                a[i][self.cols[k]] -= self.vals[k];
            }
        }
        a
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Largest `|r_i| / scale_i`.
pub fn scaled_max(r: &[f64], scale: &[f64]) -> f64 {
    r.iter()
        .zip(scale)
        .map(|(v, s)| (v / s).abs())
        .fold(0.0, f64::max)
}

#[derive(Debug, Clone, Copy)]
pub struct CgStats {
    pub iterations: usize,
    /// Final `max_i |b − A x|_i / scale_i`.
    pub residual: f64,
}

/// Solves `(K + diag(shift)) x = b` by Jacobi-preconditioned conjugate
/// gradients, starting from the contents of `x`.
///
/// Stops once the true residual satisfies `max_i |r_i| / scale_i ≤ tol`.
/// With `scale = μ` this is the vertex-wise residual of the difference
/// equation rather than of the assembled system.
pub fn solve_shifted(
    op: &InteriorOperator,
    shift: &[f64],
    b: &[f64],
    x: &mut [f64],
    scale: &[f64],
    tol: f64,
) -> Result<CgStats> {
    let n = op.len();
    let max_iter = 20 * n + 1000;
    let diag = op.diagonal(shift);
    let mut ax = vec![0.0; n];
    let mut r = vec![0.0; n];
    let true_residual = |x: &[f64], ax: &mut [f64], r: &mut [f64]| {
        op.apply(shift, x, ax);
        for i in 0..n {
            r[i] = b[i] - ax[i];
        }
    };
    true_residual(x, &mut ax, &mut r);
    let mut res = scaled_max(&r, scale);
    if res <= tol {
        return Ok(CgStats {
            iterations: 0,
            residual: res,
        });
    }

    let mut z: Vec<f64> = r.iter().zip(&diag).map(|(r, d)| r / d).collect();
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut ap = vec![0.0; n];
    for it in 1..=max_iter {
        op.apply(shift, &p, &mut ap);
        let pap = dot(&p, &ap);
        if !(pap > 0.0) {
            return Err(Error::NotConverged {
                method: "conjugate gradient (operator not positive definite)",
                iterations: it,
                residual: res,
            });
        }
        let alpha = rz / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        res = scaled_max(&r, scale);
        if res <= 0.5 * tol {
            true_residual(x, &mut ax, &mut r);
            res = scaled_max(&r, scale);
            if res <= tol {
                return Ok(CgStats {
                    iterations: it,
                    residual: res,
                });
            }
            // recursive residual drifted; restart from the true one
            for i in 0..n {
                z[i] = r[i] / diag[i];
            }
            p.copy_from_slice(&z);
            rz = dot(&r, &z);
            continue;
        }
        for i in 0..n {
            z[i] = r[i] / diag[i];
        }
        let rz_next = dot(&r, &z);
        let beta = rz_next / rz;
        rz = rz_next;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    Err(Error::NotConverged {
        method: "conjugate gradient",
        iterations: max_iter,
        residual: res,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::GraphBuilder;

    #[test]
    fn operator_rows_on_path() {
        // a - b - c - d - e, ball around c with radius 2 has interior b,c,d
        let mut bld = GraphBuilder::new();
        for (x, y) in [("a", "b"), ("b", "c"), ("c", "d"), ("d", "e")] {
            bld.add_edge(x, y, 1.0).unwrap();
        }
        let g = bld.build().unwrap();
        let ball = g.ball(g.vertex("c").unwrap(), 2).unwrap();
        let op = InteriorOperator::new(&g, &ball);
        let dense = op.to_dense(&[0.0; 3]);
        assert_eq!(
            dense,
            vec![
                vec![2.0, -1.0, 0.0],
                vec![-1.0, 2.0, -1.0],
                vec![0.0, -1.0, 2.0]
            ]
        );
        assert_eq!(op.dirichlet_form(&[0.0, 1.0, 0.0]), 2.0);
    }

    #[test]
    fn cg_solves_tridiagonal() {
        let mut bld = GraphBuilder::new();
        for i in 0..30 {
            bld.add_edge(&format!("{i:02}"), &format!("{:02}", i + 1), 1.0)
                .unwrap();
        }
        let g = bld.build().unwrap();
        let ball = g.ball(15, 15).unwrap();
        let op = InteriorOperator::new(&g, &ball);
        let n = op.len();
        let shift = vec![0.5; n];
        let b: Vec<f64> = (0..n).map(|i| (i as f64).sin()).collect();
        let mut x = vec![0.0; n];
        let stats = solve_shifted(&op, &shift, &b, &mut x, &vec![1.0; n], 1e-12).unwrap();
        let mut ax = vec![0.0; n];
        op.apply(&shift, &x, &mut ax);
        for i in 0..n {
            assert!((ax[i] - b[i]).abs() <= 1e-12);
        }
        assert!(stats.residual <= 1e-12);
    }
}
