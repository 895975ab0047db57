//! The linear equation `−Δu + hu = f`: local Dirichlet problems on balls,
//! their energies, and the a-priori bounds that keep the local solutions
//! uniformly controlled as the ball grows.

use crate::error::{Error, Result};
use crate::function::VertexFunction;
use crate::graph::{Ball, WeightedGraph};
use crate::linalg::{solve_shifted, InteriorOperator};
use crate::spaces::{
    distance_embedding_constant, distance_lp_norm, local_dirichlet_energy, power_sum,
    HypothesisConstants, INEQUALITY_SLACK,
};

/// The Euler–Lagrange system of the local energy, on interior vertices:
/// `(K + diag(μh)) u = μ f`.
#[derive(Debug, Clone)]
pub struct LocalLinearSystem {
    op: InteriorOperator,
    shift: Vec<f64>,
    rhs: Vec<f64>,
}

impl LocalLinearSystem {
    pub fn assemble(
        graph: &WeightedGraph,
        ball: &Ball,
        h: &VertexFunction,
        f: &VertexFunction,
    ) -> Result<Self> {
        for &x in ball.interior() {
            if !(h.value(x) > 0.0) {
                return Err(Error::hypothesis(format!(
                    "h must be positive on the ball, but h = {} at vertex {:?}",
                    h.value(x),
                    graph.id(x)
                )));
            }
        }
        let op = InteriorOperator::new(graph, ball);
        let shift = op
            .vertices()
            .iter()
            .map(|&x| graph.measure(x) * h.value(x))
            .collect();
        let rhs = op
            .vertices()
            .iter()
            .map(|&x| graph.measure(x) * f.value(x))
            .collect();
        Ok(LocalLinearSystem { op, shift, rhs })
    }

    pub fn operator(&self) -> &InteriorOperator {
        &self.op
    }

    pub fn shift(&self) -> &[f64] {
        &self.shift
    }

    pub fn rhs(&self) -> &[f64] {
        &self.rhs
    }

    pub fn dense_matrix(&self) -> Vec<Vec<f64>> {
        self.op.to_dense(&self.shift)
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        let a = self.dense_matrix();
        (0..a.len()).all(|i| (0..i).all(|j| (a[i][j] - a[j][i]).abs() <= tol))
    }

    pub fn is_strictly_diagonally_dominant(&self) -> bool {
        let a = self.dense_matrix();
        a.iter().enumerate().all(|(i, row)| {
            let off: f64 = row
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .map(|(_, v)| v.abs())
                .sum();
            row[i] > off
        })
    }
}

/// `J_k(u) = ½‖u‖²_{W_0^{1,2}(B_k)} − ∫_{B_k} f u dμ`.
pub fn jk_energy(
    graph: &WeightedGraph,
    ball: &Ball,
    h: &VertexFunction,
    f: &VertexFunction,
    u: &VertexFunction,
) -> Result<f64> {
    let quad = local_dirichlet_energy(graph, ball, u, h)?;
    let lin: f64 = ball
        .interior()
        .iter()
        .map(|&x| graph.measure(x) * f.value(x) * u.value(x))
        .sum();
    Ok(0.5 * quad - lin)
}

/// Vertex-wise `|−Δu + hu − f|` using the full graph neighborhood of each
/// vertex in `at`; returns the maximum.
pub fn schrodinger_residual(
    graph: &WeightedGraph,
    h: &VertexFunction,
    f: &VertexFunction,
    u: &VertexFunction,
    at: &[usize],
) -> f64 {
    at.iter()
        .map(|&x| {
            (-graph.laplacian_unchecked(u.values(), x) + h.value(x) * u.value(x) - f.value(x)).abs()
        })
        .fold(0.0, f64::max)
}

/// A converged local solve.
#[derive(Debug, Clone)]
pub struct LocalSolution {
    /// Zero-extended minimizer.
    pub u: VertexFunction,
    /// `Λ_k = J_k(u_k)`.
    pub energy: f64,
    /// `‖u_k‖²_{W_0^{1,2}(B_k)}`.
    pub norm_sq: f64,
    /// Largest vertex-wise residual over the interior.
    pub residual: f64,
    pub iterations: usize,
    /// Certified `[−‖f‖²_{L²}/a0, 0]` with `a0 = min h` on the interior.
    pub bracket: (f64, f64),
}

pub fn solve_local_schrodinger(
    graph: &WeightedGraph,
    ball: &Ball,
    h: &VertexFunction,
    f: &VertexFunction,
    tol: f64,
) -> Result<LocalSolution> {
    solve_local_schrodinger_from(graph, ball, h, f, tol, &VertexFunction::zeros(graph.vertex_count()))
}

/// Same as [`solve_local_schrodinger`] with an explicit starting guess; the
/// values of `start` outside the interior are ignored.
pub fn solve_local_schrodinger_from(
    graph: &WeightedGraph,
    ball: &Ball,
    h: &VertexFunction,
    f: &VertexFunction,
    tol: f64,
    start: &VertexFunction,
) -> Result<LocalSolution> {
    if !(tol > 0.0) {
        return Err(Error::input(format!("tolerance must be positive, got {tol}")));
    }
    let system = LocalLinearSystem::assemble(graph, ball, h, f)?;
    let mut x = ball.restrict(start);
    let stats = solve_shifted(
        &system.op,
        &system.shift,
        &system.rhs,
        &mut x,
        system.op.mass(),
        0.5 * tol,
    )?;
    let u = ball.extend(&x);
    let residual = schrodinger_residual(graph, h, f, &u, ball.interior());
    if residual > tol {
        return Err(Error::NotConverged {
            method: "local Schrödinger solve",
            iterations: stats.iterations,
            residual,
        });
    }
    let energy = jk_energy(graph, ball, h, f, &u)?;
    let norm_sq = local_dirichlet_energy(graph, ball, &u, h)?;

    let a0 = ball
        .interior()
        .iter()
        .map(|&x| h.value(x))
        .fold(f64::INFINITY, f64::min);
    let f_l2_sq: f64 = power_sum(graph, f, 2.0);
    let bracket = (-f_l2_sq / a0, 0.0);
    let slack = INEQUALITY_SLACK * f_l2_sq.max(1.0);
    if energy > bracket.1 + slack || energy < bracket.0 - slack {
        return Err(Error::Invariant(format!(
            "local energy {energy} escaped the bracket [{}, {}]",
            bracket.0, bracket.1
        )));
    }
    Ok(LocalSolution {
        u,
        energy,
        norm_sq,
        residual,
        iterations: stats.iterations,
        bracket,
    })
}

/// Sign check from the maximum principle: with `f ≥ 0` on the interior the
/// solution is nonnegative there, and strictly positive when `f ≢ 0`.
///
/// Returns `true` iff `u ≥ 0` on the interior and, when `f` is not
/// identically zero on the interior, `u > 0` at every interior vertex.
pub fn check_positivity(
    graph: &WeightedGraph,
    ball: &Ball,
    u: &VertexFunction,
    f: &VertexFunction,
) -> Result<bool> {
    for &x in ball.interior() {
        if f.value(x) < 0.0 {
            return Err(Error::hypothesis(format!(
                "positivity needs f >= 0, but f = {} at vertex {:?}",
                f.value(x),
                graph.id(x)
            )));
        }
    }
    let nonzero_data = ball.interior().iter().any(|&x| f.value(x) != 0.0);
    let ok = ball.interior().iter().all(|&x| {
        let v = u.value(x);
        if nonzero_data {
            v > 0.0
        } else {
            v >= 0.0
        }
    });
    Ok(ok)
}

/// Which integrability hypothesis on `f` drives the a-priori bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BoundCase {
    /// `f ∈ L²`: `Λ_k ≥ −‖f‖²_{L²}/a0`.
    L2,
    /// `μ ≥ μ0`, `f ∈ L¹`: `Λ_k ≥ −‖f‖²_{L¹}/(μ0 min(1, a0))`.
    L1 { mu0: f64 },
    /// `w ≥ w0`, `ρ ∈ L^p`, `f ∈ L^{p/(p−1)}`: `Λ_k ≥ −C²‖f‖²_{L^{p/(p−1)}}`.
    Distance { w0: f64, p: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AprioriBound {
    pub case: BoundCase,
    /// Lower bound for every `Λ_k`.
    pub energy_floor: f64,
    /// Upper bound for every `‖u_k‖²_{W_0^{1,2}(B_k)}`, equal to `−4 · energy_floor`.
    pub norm_sq_bound: f64,
    /// Set for `p = 1` in the distance case, which lies outside the stated
    /// range `p > 1` of the existence result.
    pub outside_theorem: bool,
}

/// Picks the bound case from the supplied constants: the distance case when
/// `w0` and `p` are present, else the `L¹` case when `μ0` is present, else
/// the `L²` case.
pub fn select_bound_case(consts: &HypothesisConstants) -> BoundCase {
    match (consts.w0, consts.p, consts.mu0) {
        (Some(w0), Some(p), _) => BoundCase::Distance { w0, p },
        (_, _, Some(mu0)) => BoundCase::L1 { mu0 },
        _ => BoundCase::L2,
    }
}

/// The uniform a-priori bound for the given case.
///
/// The `L¹` and distance cases pass through the `W^{1,2}` norm, which the
/// local norm with potential `h ≥ a0` controls only up to `1/min(1, a0)`.
pub fn apriori_bound(
    graph: &WeightedGraph,
    f: &VertexFunction,
    consts: &HypothesisConstants,
    origin: usize,
    case: BoundCase,
) -> Result<AprioriBound> {
    let a0 = consts.a0;
    let damp = a0.min(1.0);
    let (floor, outside) = match case {
        BoundCase::L2 => (-power_sum(graph, f, 2.0) / a0, false),
        BoundCase::L1 { mu0 } => {
            let l1 = power_sum(graph, f, 1.0);
            (-l1 * l1 / (mu0 * damp), false)
        }
        BoundCase::Distance { w0, p } => {
            if !(p >= 1.0) {
                return Err(Error::hypothesis(format!(
                    "the distance case needs p >= 1, got {p}"
                )));
            }
            let rho = distance_lp_norm(graph, origin, p)?;
            let c = distance_embedding_constant(p, w0, graph.measure(origin)) * (rho + 1.0)
                / damp.sqrt();
            let dual = if p == 1.0 {
                f.values().iter().fold(0.0, |m: f64, v| m.max(v.abs()))
            } else {
                let r = p / (p - 1.0);
                power_sum(graph, f, r).powf(1.0 / r)
            };
            (-c * c * dual * dual, p == 1.0)
        }
    };
    Ok(AprioriBound {
        case,
        energy_floor: floor,
        norm_sq_bound: -4.0 * floor,
        outside_theorem: outside,
    })
}

/// Energy and norm of one exhaustion level.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LevelEnergy {
    pub k: usize,
    pub energy: f64,
    pub norm_sq: f64,
}

#[derive(Debug, Clone)]
pub struct UniformBoundReport {
    pub bound: AprioriBound,
    pub running_max: f64,
    /// Radii whose norm or energy broke the bound.
    pub violations: Vec<usize>,
}

impl UniformBoundReport {
    pub fn holds(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks `‖u_k‖² ≤ norm_sq_bound` and `Λ_k ≥ energy_floor` on every level.
pub fn uniform_bound_check(levels: &[LevelEnergy], bound: AprioriBound) -> UniformBoundReport {
    let mut running_max: f64 = 0.0;
    let mut violations = Vec::new();
    let norm_slack = INEQUALITY_SLACK * bound.norm_sq_bound.max(1.0);
    let energy_slack = INEQUALITY_SLACK * bound.energy_floor.abs().max(1.0);
    for lvl in levels {
        running_max = running_max.max(lvl.norm_sq);
        if lvl.norm_sq > bound.norm_sq_bound + norm_slack
            || lvl.energy < bound.energy_floor - energy_slack
        {
            violations.push(lvl.k);
        }
    }
    UniformBoundReport {
        bound,
        running_max,
        violations,
    }
}
