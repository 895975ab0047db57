//! Mean field equations.
//!
//! * Negative case `Δu = f − g e^u` with `g ≤ f < 0`: the local energy
//!   `½∫|∇u|² + ∫fu − ∫g e^u` is strictly convex, minimized by damped Newton.
//! * Normalized case `−Δu + hu = g e^u / ∫g e^u − f` with `g ≥ 0`: the local
//!   energy `½‖u‖² + ∫fu − log ∫g e^u` is bounded below but not convex,
//!   minimized by Barzilai–Borwein gradient descent.

use crate::error::{Error, Result};
use crate::function::VertexFunction;
use crate::graph::{Ball, WeightedGraph};
use crate::linalg::{dot, scaled_max, solve_shifted, InteriorOperator};
use crate::spaces::{
    local_dirichlet_energy, local_gradient_energy, lq_embedding_constant, power_sum,
    HypothesisConstants, INEQUALITY_SLACK,
};

const ARMIJO: f64 = 1e-4;
const MAX_NEWTON: usize = 200;
const MAX_HALVINGS: usize = 60;
const MAX_DESCENT: usize = 200_000;
const NONMONOTONE_WINDOW: usize = 10;

/// Result of a local mean field solve.
#[derive(Debug, Clone)]
pub struct MeanFieldState {
    pub radius: usize,
    pub u: VertexFunction,
    /// `Λ_k`, the local energy at the minimizer.
    pub energy: f64,
    /// `γ_k = ∫_{B_k} g e^{u_k} dμ`, normalized case only.
    pub gamma: Option<f64>,
    /// Largest vertex-wise residual of the governing equation on the interior.
    pub residual: f64,
    pub iterations: usize,
    /// Certified energy bracket `(lower, upper)`; the normalized case has no
    /// lower end without `μ0`.
    pub bracket: (Option<f64>, f64),
}

fn check_negative_data(
    graph: &WeightedGraph,
    ball: &Ball,
    f: &VertexFunction,
    g: &VertexFunction,
) -> Result<()> {
    for &x in ball.interior() {
        let (fx, gx) = (f.value(x), g.value(x));
        if !(gx <= fx && fx < 0.0) {
            return Err(Error::hypothesis(format!(
                "need g <= f < 0, but f = {fx}, g = {gx} at vertex {:?}",
                graph.id(x)
            )));
        }
    }
    Ok(())
}

/// `½∫_{B_k}|∇u|² + ∫_{B_k} f u − ∫_{B_k} g e^u`.
pub fn mf_energy_negative(
    graph: &WeightedGraph,
    ball: &Ball,
    f: &VertexFunction,
    g: &VertexFunction,
    u: &VertexFunction,
) -> Result<f64> {
    check_negative_data(graph, ball, f, g)?;
    let grad = local_gradient_energy(graph, ball, u)?;
    let rest: f64 = ball
        .interior()
        .iter()
        .map(|&x| {
            let ux = u.value(x);
            graph.measure(x) * (f.value(x) * ux - g.value(x) * ux.exp())
        })
        .sum();
    Ok(0.5 * grad + rest)
}

/// Vertex-wise `|Δu − f + g e^u|` with full graph neighborhoods.
pub fn negative_residual(
    graph: &WeightedGraph,
    f: &VertexFunction,
    g: &VertexFunction,
    u: &VertexFunction,
    at: &[usize],
) -> f64 {
    at.iter()
        .map(|&x| {
            let ux = u.value(x);
            (graph.laplacian_unchecked(u.values(), x) - f.value(x) + g.value(x) * ux.exp()).abs()
        })
        .fold(0.0, f64::max)
}

struct NegativeProblem<'a> {
    op: InteriorOperator,
    mf: Vec<f64>,
    mg: Vec<f64>,
    mass: &'a [f64],
}

impl NegativeProblem<'_> {
    fn energy(&self, u: &[f64]) -> f64 {
        let quad = self.op.dirichlet_form(u);
        let rest: f64 = (0..u.len())
            .map(|i| self.mf[i] * u[i] - self.mg[i] * u[i].exp())
            .sum();
        0.5 * quad + rest
    }

    fn gradient(&self, u: &[f64], out: &mut [f64]) {
        self.op.apply(&vec![0.0; u.len()], u, out);
        for i in 0..u.len() {
            out[i] += self.mf[i] - self.mg[i] * u[i].exp();
        }
    }
}

pub fn solve_meanfield_negative(
    graph: &WeightedGraph,
    ball: &Ball,
    f: &VertexFunction,
    g: &VertexFunction,
    tol: f64,
) -> Result<MeanFieldState> {
    solve_meanfield_negative_from(graph, ball, f, g, tol, &VertexFunction::zeros(graph.vertex_count()))
}

/// Damped Newton with Armijo backtracking (`c = 1e−4`, halving) from the
/// interior values of `start`.
pub fn solve_meanfield_negative_from(
    graph: &WeightedGraph,
    ball: &Ball,
    f: &VertexFunction,
    g: &VertexFunction,
    tol: f64,
    start: &VertexFunction,
) -> Result<MeanFieldState> {
    if !(tol > 0.0) {
        return Err(Error::input(format!("tolerance must be positive, got {tol}")));
    }
    check_negative_data(graph, ball, f, g)?;
    let op = InteriorOperator::new(graph, ball);
    let mass = op.mass().to_vec();
    let prob = NegativeProblem {
        mf: op
            .vertices()
            .iter()
            .zip(&mass)
            .map(|(&x, m)| m * f.value(x))
            .collect(),
        mg: op
            .vertices()
            .iter()
            .zip(&mass)
            .map(|(&x, m)| m * g.value(x))
            .collect(),
        op,
        mass: &mass,
    };
    let n = prob.op.len();
    let mut u = ball.restrict(start);
    let mut grad = vec![0.0; n];
    let mut energy = prob.energy(&u);
    let mut iterations = 0;
    let mut previous = f64::INFINITY;
    loop {
        prob.gradient(&u, &mut grad);
        let res = scaled_max(&grad, prob.mass);
        // stop at half the tolerance, or inside it once Newton stops gaining
        if res <= 0.5 * tol || (res <= tol && res > 0.5 * previous) {
            break;
        }
        previous = res;
        iterations += 1;
        if iterations > MAX_NEWTON {
            return Err(Error::NotConverged {
                method: "damped Newton (negative mean field)",
                iterations: MAX_NEWTON,
                residual: res,
            });
        }
        let curvature: Vec<f64> = (0..n).map(|i| -prob.mg[i] * u[i].exp()).collect();
        let rhs: Vec<f64> = grad.iter().map(|v| -v).collect();
        let mut step = vec![0.0; n];
        let inner = (0.05 * tol).max(1e-4 * res);
        solve_shifted(&prob.op, &curvature, &rhs, &mut step, prob.mass, inner)?;
        let slope = dot(&grad, &step);
        let mut t = 1.0;
        let mut accepted = false;
        let mut trial = vec![0.0; n];
        for _ in 0..MAX_HALVINGS {
            for i in 0..n {
                trial[i] = u[i] + t * step[i];
            }
            let e = prob.energy(&trial);
            // near the minimum the energy test drowns in roundoff; a full
            // step that halves the residual is accepted regardless
            let sufficient = e <= energy + ARMIJO * t * slope
                || (t == 1.0 && {
                    let mut g_trial = vec![0.0; n];
                    prob.gradient(&trial, &mut g_trial);
                    scaled_max(&g_trial, prob.mass) <= 0.5 * res
                });
            if e.is_finite() && sufficient {
                u.copy_from_slice(&trial);
                energy = e;
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        if !accepted {
            return Err(Error::NotConverged {
                method: "Armijo line search (negative mean field)",
                iterations,
                residual: res,
            });
        }
    }

    let u = ball.extend(&u);
    let residual = negative_residual(graph, f, g, &u, ball.interior());
    if residual > tol {
        return Err(Error::NotConverged {
            method: "damped Newton (negative mean field)",
            iterations,
            residual,
        });
    }
    let energy = mf_energy_negative(graph, ball, f, g, &u)?;
    let lower: f64 = ball
        .interior()
        .iter()
        .map(|&x| -graph.measure(x) * f.value(x))
        .sum();
    let upper = power_sum(graph, g, 1.0);
    let slack = INEQUALITY_SLACK * upper.max(1.0);
    if energy < lower - slack || energy > upper + slack {
        return Err(Error::Invariant(format!(
            "negative mean field energy {energy} escaped [{lower}, {upper}]"
        )));
    }
    Ok(MeanFieldState {
        radius: ball.radius(),
        u,
        energy,
        gamma: None,
        residual,
        iterations,
        bracket: (Some(lower), upper),
    })
}

/// Pointwise control of `u_k` on a finite set `A` inside the ball, from
/// `J_k(u_k) − ∫_{B_k} g ≥ μ(x)|f(x)| max(|u⁻(x)|, (u⁺(x))²/2)` at each `x ∈ A`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalUniformBound {
    /// Bound for `max_A |u⁻|`.
    pub negative_part: f64,
    /// Bound for `max_A u⁺`.
    pub positive_part: f64,
    pub max_negative: f64,
    pub max_positive: f64,
    pub holds: bool,
}

pub fn local_uniform_bound(
    graph: &WeightedGraph,
    ball: &Ball,
    f: &VertexFunction,
    g: &VertexFunction,
    state: &MeanFieldState,
    set: &[usize],
) -> Result<LocalUniformBound> {
    if set.is_empty() {
        return Err(Error::input("local bound needs a nonempty vertex set"));
    }
    for &x in set {
        if !ball.contains(x) {
            return Err(Error::input(format!(
                "vertex {:?} lies outside the ball interior",
                graph.id(x)
            )));
        }
    }
    let g_ball: f64 = ball
        .interior()
        .iter()
        .map(|&x| graph.measure(x) * g.value(x))
        .sum();
    let excess = state.energy - g_ball;
    let weight = set
        .iter()
        .map(|&x| graph.measure(x) * f.value(x).abs())
        .fold(f64::INFINITY, f64::min);
    let negative_part = excess / weight;
    let positive_part = (2.0 * excess / weight).max(0.0).sqrt();
    let max_negative = set
        .iter()
        .map(|&x| (-state.u.value(x)).max(0.0))
        .fold(0.0, f64::max);
    let max_positive = set
        .iter()
        .map(|&x| state.u.value(x).max(0.0))
        .fold(0.0, f64::max);
    let holds = max_negative <= negative_part + INEQUALITY_SLACK * negative_part.abs().max(1.0)
        && max_positive <= positive_part + INEQUALITY_SLACK * positive_part.max(1.0);
    Ok(LocalUniformBound {
        negative_part,
        positive_part,
        max_negative,
        max_positive,
        holds,
    })
}

fn check_normalized_data(
    graph: &WeightedGraph,
    ball: &Ball,
    h: &VertexFunction,
    g: &VertexFunction,
) -> Result<()> {
    for x in 0..graph.vertex_count() {
        if g.value(x) < 0.0 {
            return Err(Error::hypothesis(format!(
                "g must be nonnegative, but g = {} at vertex {:?}",
                g.value(x),
                graph.id(x)
            )));
        }
    }
    for &x in ball.interior() {
        if !(h.value(x) > 0.0) {
            return Err(Error::hypothesis(format!(
                "h must be positive, but h = {} at vertex {:?}",
                h.value(x),
                graph.id(x)
            )));
        }
    }
    if ball.interior().iter().all(|&x| g.value(x) == 0.0) {
        return Err(Error::Degenerate(
            "g vanishes on the ball; log of its integral is undefined".into(),
        ));
    }
    Ok(())
}

/// `log Σ_i m_i g_i e^{u_i}`, shifted by the max exponent to avoid overflow.
/// Also fills `weights` with `m_i g_i e^{u_i} / Σ` when given.
fn log_weighted_exp(mg: &[f64], u: &[f64], weights: Option<&mut [f64]>) -> f64 {
    let top = u
        .iter()
        .zip(mg)
        .filter(|(_, &w)| w > 0.0)
        .map(|(&v, _)| v)
        .fold(f64::NEG_INFINITY, f64::max);
    let terms: Vec<f64> = u
        .iter()
        .zip(mg)
        .map(|(&v, &w)| if w > 0.0 { w * (v - top).exp() } else { 0.0 })
        .collect();
    let sum: f64 = terms.iter().sum();
    if let Some(out) = weights {
        for (o, t) in out.iter_mut().zip(&terms) {
            *o = t / sum;
        }
    }
    sum.ln() + top
}

/// `½‖u‖²_{W_0^{1,2}(B_k)} + ∫_{B_k} f u − log ∫_{B_k} g e^u`.
pub fn mf_energy_normalized(
    graph: &WeightedGraph,
    ball: &Ball,
    h: &VertexFunction,
    f: &VertexFunction,
    g: &VertexFunction,
    u: &VertexFunction,
) -> Result<f64> {
    check_normalized_data(graph, ball, h, g)?;
    let quad = local_dirichlet_energy(graph, ball, u, h)?;
    let lin: f64 = ball
        .interior()
        .iter()
        .map(|&x| graph.measure(x) * f.value(x) * u.value(x))
        .sum();
    let mg: Vec<f64> = ball
        .interior()
        .iter()
        .map(|&x| graph.measure(x) * g.value(x))
        .collect();
    let log = log_weighted_exp(&mg, &ball.restrict(u), None);
    Ok(0.5 * quad + lin - log)
}

/// `γ = ∫_{B_k} g e^u dμ` over the interior of `ball`.
pub fn gamma_of(graph: &WeightedGraph, ball: &Ball, g: &VertexFunction, u: &VertexFunction) -> f64 {
    ball.interior()
        .iter()
        .map(|&x| graph.measure(x) * g.value(x) * u.value(x).exp())
        .sum()
}

/// Vertex-wise `|−Δu + hu − g e^u/γ + f|` with the given `γ`.
pub fn normalized_residual(
    graph: &WeightedGraph,
    h: &VertexFunction,
    f: &VertexFunction,
    g: &VertexFunction,
    u: &VertexFunction,
    gamma: f64,
    at: &[usize],
) -> f64 {
    at.iter()
        .map(|&x| {
            let ux = u.value(x);
            (-graph.laplacian_unchecked(u.values(), x) + h.value(x) * ux
                - g.value(x) * ux.exp() / gamma
                + f.value(x))
            .abs()
        })
        .fold(0.0, f64::max)
}

struct NormalizedProblem {
    op: InteriorOperator,
    shift: Vec<f64>,
    mf: Vec<f64>,
    mg: Vec<f64>,
}

impl NormalizedProblem {
    fn energy(&self, u: &[f64]) -> f64 {
        let mut ku = vec![0.0; u.len()];
        self.op.apply(&self.shift, u, &mut ku);
        0.5 * dot(u, &ku) + dot(&self.mf, u) - log_weighted_exp(&self.mg, u, None)
    }

    fn gradient(&self, u: &[f64], out: &mut [f64]) {
        let mut w = vec![0.0; u.len()];
        log_weighted_exp(&self.mg, u, Some(&mut w));
        self.op.apply(&self.shift, u, out);
        for i in 0..u.len() {
            out[i] += self.mf[i] - w[i];
        }
    }
}

pub fn solve_meanfield_normalized(
    graph: &WeightedGraph,
    ball: &Ball,
    h: &VertexFunction,
    f: &VertexFunction,
    g: &VertexFunction,
    tol: f64,
) -> Result<MeanFieldState> {
    solve_meanfield_normalized_from(
        graph,
        ball,
        h,
        f,
        g,
        tol,
        &VertexFunction::zeros(graph.vertex_count()),
    )
}

/// Barzilai–Borwein descent in the Jacobi metric with a nonmonotone
/// acceptance test; falls back to step 0.1 with halving when the BB step is
/// not a descent. If the result ends above `J_k(0)` the solve is repeated
/// from zero so that `Λ_k ≤ −log ∫_{B_k} g` is certified.
pub fn solve_meanfield_normalized_from(
    graph: &WeightedGraph,
    ball: &Ball,
    h: &VertexFunction,
    f: &VertexFunction,
    g: &VertexFunction,
    tol: f64,
    start: &VertexFunction,
) -> Result<MeanFieldState> {
    if !(tol > 0.0) {
        return Err(Error::input(format!("tolerance must be positive, got {tol}")));
    }
    check_normalized_data(graph, ball, h, g)?;
    let op = InteriorOperator::new(graph, ball);
    let mass = op.mass().to_vec();
    let verts = op.vertices().to_vec();
    let prob = NormalizedProblem {
        shift: verts
            .iter()
            .map(|&x| graph.measure(x) * h.value(x))
            .collect(),
        mf: verts
            .iter()
            .map(|&x| graph.measure(x) * f.value(x))
            .collect(),
        mg: verts
            .iter()
            .map(|&x| graph.measure(x) * g.value(x))
            .collect(),
        op,
    };
    let upper = -log_weighted_exp(&prob.mg, &vec![0.0; verts.len()], None);
    let slack = INEQUALITY_SLACK * upper.abs().max(1.0);

    let (mut x, mut iterations) = bb_descent(&prob, &mass, ball.restrict(start), tol)?;
    if prob.energy(&x) > upper + slack {
        let (x0, it0) = bb_descent(&prob, &mass, vec![0.0; verts.len()], tol)?;
        x = x0;
        iterations += it0;
    }
    let u = ball.extend(&x);
    let gamma = gamma_of(graph, ball, g, &u);
    let residual = normalized_residual(graph, h, f, g, &u, gamma, ball.interior());
    if residual > tol {
        return Err(Error::NotConverged {
            method: "Barzilai-Borwein descent (normalized mean field)",
            iterations,
            residual,
        });
    }
    let energy = mf_energy_normalized(graph, ball, h, f, g, &u)?;
    if energy > upper + slack {
        return Err(Error::Invariant(format!(
            "normalized mean field energy {energy} exceeds -log of the integral of g, {upper}"
        )));
    }
    Ok(MeanFieldState {
        radius: ball.radius(),
        u,
        energy,
        gamma: Some(gamma),
        residual,
        iterations,
        bracket: (None, upper),
    })
}

fn bb_descent(
    prob: &NormalizedProblem,
    mass: &[f64],
    mut u: Vec<f64>,
    tol: f64,
) -> Result<(Vec<f64>, usize)> {
    let n = u.len();
    let diag = prob.op.diagonal(&prob.shift);
    let mut grad = vec![0.0; n];
    prob.gradient(&u, &mut grad);
    let mut energy = prob.energy(&u);
    let mut history = vec![energy];
    let mut prev: Option<(Vec<f64>, Vec<f64>)> = None;
    let mut trial = vec![0.0; n];
    let mut trial_grad = vec![0.0; n];
    for it in 0..MAX_DESCENT {
        let res = scaled_max(&grad, mass);
        if res <= 0.5 * tol {
            return Ok((u, it));
        }
        let dir: Vec<f64> = grad.iter().zip(&diag).map(|(g, d)| -g / d).collect();
        let decrease = -dot(&grad, &dir);
        let bb = prev.as_ref().and_then(|(du, dg)| {
            let sy = dot(du, dg);
            let sds: f64 = du.iter().zip(&diag).map(|(s, d)| s * d * s).sum();
            let a = sds / sy;
            (sy > 0.0 && a.is_finite() && a > 0.0).then_some(a)
        });
        let reference = history.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mut accepted = None;
        if let Some(alpha) = bb {
            for i in 0..n {
                trial[i] = u[i] + alpha * dir[i];
            }
            let e = prob.energy(&trial);
            if e.is_finite() && e <= reference - ARMIJO * alpha * decrease {
                accepted = Some(e);
            }
        }
        if accepted.is_none() {
            let mut alpha = 0.1;
            for _ in 0..MAX_HALVINGS {
                for i in 0..n {
                    trial[i] = u[i] + alpha * dir[i];
                }
                let e = prob.energy(&trial);
                if e.is_finite() && e <= energy - ARMIJO * alpha * decrease {
                    accepted = Some(e);
                    break;
                }
                alpha *= 0.5;
            }
        }
        let Some(e) = accepted else {
            return Err(Error::NotConverged {
                method: "Barzilai-Borwein descent (stagnated)",
                iterations: it,
                residual: res,
            });
        };
        prob.gradient(&trial, &mut trial_grad);
        let du: Vec<f64> = trial.iter().zip(&u).map(|(a, b)| a - b).collect();
        let dg: Vec<f64> = trial_grad.iter().zip(&grad).map(|(a, b)| a - b).collect();
        prev = Some((du, dg));
        std::mem::swap(&mut u, &mut trial);
        std::mem::swap(&mut grad, &mut trial_grad);
        energy = e;
        history.push(e);
        if history.len() > NONMONOTONE_WINDOW {
            history.remove(0);
        }
    }
    Err(Error::NotConverged {
        method: "Barzilai-Borwein descent",
        iterations: MAX_DESCENT,
        residual: scaled_max(&grad, mass),
    })
}

/// Constant `C` in `|∫ f u| ≤ C ‖f‖_{L^q} ‖u‖_{W_0^{1,2}(B_k)}` for
/// `q ∈ [1, 2]`, `μ ≥ μ0`, `h ≥ a0`.
pub fn dual_embedding_constant(q: f64, mu0: f64, a0: f64) -> f64 {
    let conj = if q == 1.0 { f64::INFINITY } else { q / (q - 1.0) };
    lq_embedding_constant(conj, mu0) / a0.min(1.0).sqrt()
}

/// Lower bound `⅛‖u‖² − C²‖f‖²_{L^q} − log‖g‖_{L¹} − 2/(μ0 a0)` for the
/// normalized energy of any `u` with `‖u‖²_{W_0^{1,2}(B_k)} = norm_sq`.
pub fn normalized_energy_floor(
    graph: &WeightedGraph,
    consts: &HypothesisConstants,
    f: &VertexFunction,
    g: &VertexFunction,
    norm_sq: f64,
) -> Result<f64> {
    let mu0 = consts
        .mu0
        .ok_or_else(|| Error::hypothesis("the normalized energy bound needs mu0"))?;
    let q = consts.q;
    if !(1.0..=2.0).contains(&q) {
        return Err(Error::hypothesis(format!(
            "the normalized energy bound needs q in [1, 2], got {q}"
        )));
    }
    let c = dual_embedding_constant(q, mu0, consts.a0);
    let fq = power_sum(graph, f, q).powf(1.0 / q);
    let g1 = power_sum(graph, g, 1.0);
    Ok(norm_sq / 8.0 - c * c * fq * fq - g1.ln() - 2.0 / (mu0 * consts.a0))
}

/// `[e^{−C} ‖g‖_{L¹(B_k)}, e^{C} ‖g‖_{L¹(B_k)}]` with `C` the a-priori sup
/// bound of the local solution derived from its energy.
pub fn gamma_bracket(
    graph: &WeightedGraph,
    ball: &Ball,
    consts: &HypothesisConstants,
    f: &VertexFunction,
    g: &VertexFunction,
    energy: f64,
) -> Result<(f64, f64)> {
    let mu0 = consts
        .mu0
        .ok_or_else(|| Error::hypothesis("the gamma bracket needs mu0"))?;
    // ⅛‖u‖² ≤ Λ + C²‖f‖² + log‖g‖ + 2/(μ0 a0)
    let offset = normalized_energy_floor(graph, consts, f, g, 0.0)?;
    let norm_sq = (8.0 * (energy - offset)).max(0.0);
    let sup = (norm_sq / (mu0 * consts.a0)).sqrt();
    let g_ball: f64 = ball
        .interior()
        .iter()
        .map(|&x| graph.measure(x) * g.value(x))
        .sum();
    Ok(((-sup).exp() * g_ball, sup.exp() * g_ball))
}

/// Consistency of the limiting constraint with the final level.
#[derive(Debug, Clone)]
pub struct GammaReport {
    pub gamma_final: f64,
    /// `∫_V g e^{u*} dμ` with `u*` zero outside the final ball.
    pub integral: f64,
    pub defect: f64,
    /// `(ℓ, ∫_{V∖B_ℓ} g dμ)` for `ℓ = 1..=K`.
    pub tails: Vec<(usize, f64)>,
}

pub fn gamma_limit_check(
    graph: &WeightedGraph,
    origin: usize,
    levels: &[MeanFieldState],
    u_star: &VertexFunction,
    g: &VertexFunction,
) -> Result<GammaReport> {
    let last = levels
        .last()
        .ok_or_else(|| Error::input("gamma check needs at least one level"))?;
    let gamma_final = last
        .gamma
        .ok_or_else(|| Error::input("gamma check needs normalized mean field levels"))?;
    let dist = graph.distances_from(origin);
    let integral: f64 = (0..graph.vertex_count())
        .map(|x| graph.measure(x) * g.value(x) * u_star.value(x).exp())
        .sum();
    let tails = (1..=last.radius)
        .map(|l| {
            let tail = (0..graph.vertex_count())
                .filter(|&x| dist[x] >= l)
                .map(|x| graph.measure(x) * g.value(x))
                .sum();
            (l, tail)
        })
        .collect();
    Ok(GammaReport {
        gamma_final,
        integral,
        defect: (gamma_final - integral).abs(),
        tails,
    })
}
