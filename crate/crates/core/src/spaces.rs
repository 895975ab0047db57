//! Norms, energies and embedding inequalities as computable quantities.
//!
//! Conventions: `∫|∇u|² dμ = Σ_x μ(x) Γ(u)(x)` counts every undirected edge
//! exactly once, `Σ_{xy∈E} w_xy (u(y) − u(x))²`. Local energies on a ball
//! sum over the edges with at least one interior endpoint, with the function
//! zero-extended; for such functions this equals the global sum.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::function::VertexFunction;
use crate::graph::{Ball, WeightedGraph};
use crate::linalg::{dot, solve_shifted, InteriorOperator};

/// Absolute slack for inequality checks on quantities of order one. Larger
/// quantities get the same slack relative to their size.
pub const INEQUALITY_SLACK: f64 = 1e-10;

fn slack(rhs: f64) -> f64 {
    INEQUALITY_SLACK * rhs.abs().max(1.0)
}

/// Lower bounds and exponents that the embedding theorems and solvers rely on.
#[derive(Debug, Clone, PartialEq)]
pub struct HypothesisConstants {
    /// Lower bound of the vertex measure.
    pub mu0: Option<f64>,
    /// Lower bound of the edge weights.
    pub w0: Option<f64>,
    /// Lower bound of the potential `h`.
    pub a0: f64,
    /// Exponent with `ρ ∈ L^p`.
    pub p: Option<f64>,
    /// Integrability exponent used by the `L^q` checks.
    pub q: f64,
}

impl HypothesisConstants {
    pub fn new(a0: f64, q: f64) -> Self {
        HypothesisConstants {
            mu0: None,
            w0: None,
            a0,
            p: None,
            q,
        }
    }

    pub fn with_mu0(mut self, mu0: f64) -> Self {
        self.mu0 = Some(mu0);
        self
    }

    pub fn with_w0(mut self, w0: f64) -> Self {
        self.w0 = Some(w0);
        self
    }

    pub fn with_p(mut self, p: f64) -> Self {
        self.p = Some(p);
        self
    }

    /// Checks the constants against a graph and, if given, the potential `h`.
    /// Violations name the offending vertex or edge.
    pub fn validate(&self, graph: &WeightedGraph, h: Option<&VertexFunction>) -> Result<()> {
        if !(self.a0 > 0.0 && self.a0.is_finite()) {
            return Err(Error::hypothesis(format!("a0 must be positive, got {}", self.a0)));
        }
        if !(self.q >= 1.0) {
            return Err(Error::hypothesis(format!("q must be at least 1, got {}", self.q)));
        }
        if let Some(p) = self.p {
            if !(p > 0.0) {
                return Err(Error::hypothesis(format!("p must be positive, got {p}")));
            }
        }
        if let Some(mu0) = self.mu0 {
            if !(mu0 > 0.0) {
                return Err(Error::hypothesis(format!("mu0 must be positive, got {mu0}")));
            }
            for x in 0..graph.vertex_count() {
                if graph.measure(x) < mu0 {
                    return Err(Error::hypothesis(format!(
                        "measure {} at vertex {:?} is below mu0 = {mu0}",
                        graph.measure(x),
                        graph.id(x)
                    )));
                }
            }
        }
        if let Some(w0) = self.w0 {
            if !(w0 > 0.0) {
                return Err(Error::hypothesis(format!("w0 must be positive, got {w0}")));
            }
            for &(a, b, w) in graph.edges() {
                if w < w0 {
                    return Err(Error::hypothesis(format!(
                        "weight {w} on edge {:?}-{:?} is below w0 = {w0}",
                        graph.id(a),
                        graph.id(b)
                    )));
                }
            }
        }
        if let Some(h) = h {
            for x in 0..graph.vertex_count() {
                if h.value(x) < self.a0 {
                    return Err(Error::hypothesis(format!(
                        "h = {} at vertex {:?} is below a0 = {}",
                        h.value(x),
                        graph.id(x),
                        self.a0
                    )));
                }
            }
        }
        Ok(())
    }
}

/// `Σ_x μ(x) |u(x)|^p` for any `p > 0`.
pub fn power_sum(graph: &WeightedGraph, u: &VertexFunction, p: f64) -> f64 {
    u.values()
        .iter()
        .zip(graph.measures())
        .map(|(v, m)| m * v.abs().powf(p))
        .sum()
}

/// `‖u‖_{L^q}`; pass `f64::INFINITY` for the sup norm.
pub fn lq_norm(graph: &WeightedGraph, u: &VertexFunction, q: f64) -> Result<f64> {
    if q == f64::INFINITY {
        return Ok(u.values().iter().fold(0.0, |m, v| m.max(v.abs())));
    }
    if !(q >= 1.0) {
        return Err(Error::input(format!("L^q norm needs q >= 1, got {q}")));
    }
    if q == 2.0 {
        return Ok(power_sum_squared(graph, u).sqrt());
    }
    Ok(power_sum(graph, u, q).powf(1.0 / q))
}

fn power_sum_squared(graph: &WeightedGraph, u: &VertexFunction) -> f64 {
    u.values()
        .iter()
        .zip(graph.measures())
        .map(|(v, m)| m * v * v)
        .sum()
}

/// `∫_V |∇u|² dμ`.
pub fn dirichlet_energy(graph: &WeightedGraph, u: &VertexFunction) -> f64 {
    let u = u.values();
    graph
        .edges()
        .iter()
        .map(|&(a, b, w)| w * (u[b] - u[a]) * (u[b] - u[a]))
        .sum()
}

/// `‖u‖_{W^{1,2}(V)}`.
pub fn w12_norm(graph: &WeightedGraph, u: &VertexFunction) -> f64 {
    (dirichlet_energy(graph, u) + power_sum_squared(graph, u)).sqrt()
}

fn check_positive_potential(graph: &WeightedGraph, h: &VertexFunction) -> Result<()> {
    for x in 0..graph.vertex_count() {
        if !(h.value(x) > 0.0) {
            return Err(Error::hypothesis(format!(
                "h must be positive, but h = {} at vertex {:?}",
                h.value(x),
                graph.id(x)
            )));
        }
    }
    Ok(())
}

/// `⟨u,v⟩_H = ∫ (Γ(u,v) + h u v) dμ`.
pub fn h_inner(
    graph: &WeightedGraph,
    u: &VertexFunction,
    v: &VertexFunction,
    h: &VertexFunction,
) -> Result<f64> {
    check_positive_potential(graph, h)?;
    let (uu, vv) = (u.values(), v.values());
    let grad: f64 = graph
        .edges()
        .iter()
        .map(|&(a, b, w)| w * (uu[b] - uu[a]) * (vv[b] - vv[a]))
        .sum();
    let pot: f64 = (0..graph.vertex_count())
        .map(|x| graph.measure(x) * h.value(x) * uu[x] * vv[x])
        .sum();
    Ok(grad + pot)
}

/// `‖u‖_H = (∫ |∇u|² + h u² dμ)^{1/2}`.
pub fn h_norm(graph: &WeightedGraph, u: &VertexFunction, h: &VertexFunction) -> Result<f64> {
    Ok(h_inner(graph, u, u, h)?.sqrt())
}

/// Gradient part of the local energy: edges with an interior endpoint.
pub fn local_gradient_energy(graph: &WeightedGraph, ball: &Ball, u: &VertexFunction) -> Result<f64> {
    ball.check_support(u)?;
    let vals = u.values();
    Ok(graph
        .edges()
        .iter()
        .filter(|&&(a, b, _)| ball.contains(a) || ball.contains(b))
        .map(|&(a, b, w)| w * (vals[b] - vals[a]) * (vals[b] - vals[a]))
        .sum())
}

/// `‖u‖²_{W_0^{1,2}(B_k)} = ∫_{B_k} |∇u|² dμ + ∫_{B_k} h u² dμ` for `u`
/// supported in the ball interior.
pub fn local_dirichlet_energy(
    graph: &WeightedGraph,
    ball: &Ball,
    u: &VertexFunction,
    h: &VertexFunction,
) -> Result<f64> {
    let grad = local_gradient_energy(graph, ball, u)?;
    let pot: f64 = ball
        .interior()
        .iter()
        .map(|&x| graph.measure(x) * h.value(x) * u.value(x) * u.value(x))
        .sum();
    Ok(grad + pot)
}

/// `‖u‖_{L^∞} ≤ C ‖u‖_{W^{1,2}}` constant for `μ ≥ μ0`: `1/√μ0`.
pub fn sup_embedding_constant(mu0: f64) -> f64 {
    1.0 / mu0.sqrt()
}

/// `‖u‖_{L^q} ≤ C ‖u‖_{W^{1,2}}` constant for `μ ≥ μ0` and `2 ≤ q ≤ ∞`,
/// from `∫|u|^q ≤ ‖u‖_∞^{q−2} ∫u²`: `μ0^{1/q − 1/2}`.
pub fn lq_embedding_constant(q: f64, mu0: f64) -> f64 {
    if q == f64::INFINITY {
        sup_embedding_constant(mu0)
    } else {
        mu0.powf(1.0 / q - 0.5)
    }
}

/// The explicit constant `C` in `‖u‖_{L^p} ≤ C (‖ρ‖_{L^p} + 1) ‖u‖_{W^{1,2}}`
/// under `w ≥ w0`, assembled from the pointwise bound
/// `|u(x)| ≤ (ρ(x)/√w0 + 1/√μ(O)) ‖u‖_{W^{1,2}}` and
/// `‖1‖_{L^p} ≤ 2^{1/p} max(‖ρ‖_{L^p}, μ(O)^{1/p})`.
///
/// For `p < 1` the quasi-triangle inequality costs an extra `2^{1/p − 1}`.
pub fn distance_embedding_constant(p: f64, w0: f64, mu_origin: f64) -> f64 {
    let two_p = 2f64.powf(1.0 / p);
    let slope = 1.0 / w0.sqrt() + two_p / mu_origin.sqrt();
    let offset = two_p * mu_origin.powf(1.0 / p - 0.5);
    let quasi = if p < 1.0 { 2f64.powf(1.0 / p - 1.0) } else { 1.0 };
    quasi * slope.max(offset)
}

/// `‖ρ‖_{L^p}` for the hop distance from `origin`.
pub fn distance_lp_norm(graph: &WeightedGraph, origin: usize, p: f64) -> Result<f64> {
    graph.check_vertex(origin)?;
    let dist = graph.distances_from(origin);
    let s: f64 = dist
        .iter()
        .zip(graph.measures())
        .map(|(&d, m)| m * (d as f64).powf(p))
        .sum();
    if !s.is_finite() {
        return Err(Error::hypothesis(format!(
            "the distance function is not numerically in L^{p} (sum diverged)"
        )));
    }
    Ok(s.powf(1.0 / p))
}

/// Outcome of the pointwise distance bound at one vertex.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointwiseBound {
    pub bound: f64,
    pub holds: bool,
}

/// `|u(x)| ≤ (ρ(x,O)/√w0 + 1/√μ(O)) ‖u‖_{W^{1,2}(V)}`.
pub fn pointwise_distance_bound(
    graph: &WeightedGraph,
    consts: &HypothesisConstants,
    u: &VertexFunction,
    x: usize,
    origin: usize,
) -> Result<PointwiseBound> {
    graph.check_vertex(x)?;
    graph.check_vertex(origin)?;
    let w0 = consts
        .w0
        .ok_or_else(|| Error::hypothesis("pointwise bound needs the weight lower bound w0"))?;
    let dist = graph.distances_from(origin);
    Ok(pointwise_with(graph, w0, u, x, origin, dist[x], w12_norm(graph, u)))
}

fn pointwise_with(
    graph: &WeightedGraph,
    w0: f64,
    u: &VertexFunction,
    x: usize,
    origin: usize,
    rho: usize,
    norm: f64,
) -> PointwiseBound {
    let bound = (rho as f64 / w0.sqrt() + 1.0 / graph.measure(origin).sqrt()) * norm;
    PointwiseBound {
        bound,
        holds: u.value(x).abs() <= bound + 1e-12 * bound.max(1.0),
    }
}

/// One inequality `lhs ≤ rhs` evaluated on a concrete function.
#[derive(Debug, Clone, PartialEq)]
pub struct InequalityCheck {
    pub name: &'static str,
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

impl InequalityCheck {
    fn new(name: &'static str, lhs: f64, rhs: f64) -> Self {
        InequalityCheck {
            name,
            lhs,
            rhs,
            holds: lhs <= rhs + slack(rhs),
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct EmbeddingReport {
    pub checks: Vec<InequalityCheck>,
}

impl EmbeddingReport {
    pub fn all_hold(&self) -> bool {
        self.checks.iter().all(|c| c.holds)
    }

    pub fn get(&self, name: &str) -> Option<&InequalityCheck> {
        self.checks.iter().find(|c| c.name == name)
    }
}

/// Evaluates every embedding inequality whose constants are available:
///
/// * `sup`: `‖u‖_∞ ≤ ‖u‖_{W^{1,2}} / √μ0`
/// * `lq`: `‖u‖_{L^q} ≤ μ0^{1/q−1/2} ‖u‖_{W^{1,2}}` for `q ≥ 2`
/// * `distance_lp`: `‖u‖_{L^p} ≤ C (‖ρ‖_{L^p} + 1) ‖u‖_{W^{1,2}}`
/// * `pointwise`: the distance bound at the worst vertex (as `|u(x)|` vs bound)
/// * `interpolation`: `∫|u|^q ≤ (∫|u|)^λ (∫|u|^p)^{1−λ}`, `q = λ + (1−λ)p`, `1 < q < p`
pub fn check_embeddings(
    graph: &WeightedGraph,
    consts: &HypothesisConstants,
    u: &VertexFunction,
    origin: usize,
) -> Result<EmbeddingReport> {
    graph.check_vertex(origin)?;
    let dist = graph.distances_from(origin);
    let rho_norm = match consts.p {
        Some(p) => Some(distance_lp_norm(graph, origin, p)?),
        None => None,
    };
    Ok(embedding_checks(graph, consts, u, origin, &dist, rho_norm))
}

fn embedding_checks(
    graph: &WeightedGraph,
    consts: &HypothesisConstants,
    u: &VertexFunction,
    origin: usize,
    dist: &[usize],
    rho_norm: Option<f64>,
) -> EmbeddingReport {
    let norm = w12_norm(graph, u);
    let mut checks = Vec::new();
    if let Some(mu0) = consts.mu0 {
        let sup = u.values().iter().fold(0.0, |m: f64, v| m.max(v.abs()));
        checks.push(InequalityCheck::new(
            "sup",
            sup,
            sup_embedding_constant(mu0) * norm,
        ));
        if consts.q >= 2.0 && consts.q.is_finite() {
            let lq = power_sum(graph, u, consts.q).powf(1.0 / consts.q);
            checks.push(InequalityCheck::new(
                "lq",
                lq,
                lq_embedding_constant(consts.q, mu0) * norm,
            ));
        }
    }
    if let (Some(w0), Some(p), Some(rho)) = (consts.w0, consts.p, rho_norm) {
        let c = distance_embedding_constant(p, w0, graph.measure(origin));
        let lp = power_sum(graph, u, p).powf(1.0 / p);
        checks.push(InequalityCheck::new("distance_lp", lp, c * (rho + 1.0) * norm));
    }
    if let Some(w0) = consts.w0 {
        // report the vertex with the smallest margin
        let mut worst: Option<(f64, f64, f64)> = None;
        for x in 0..graph.vertex_count() {
            let pb = pointwise_with(graph, w0, u, x, origin, dist[x], norm);
            let lhs = u.value(x).abs();
            let margin = pb.bound - lhs;
            if worst.is_none_or(|w| margin < w.0) {
                worst = Some((margin, lhs, pb.bound));
            }
        }
        if let Some((_, lhs, bound)) = worst {
            checks.push(InequalityCheck {
                name: "pointwise",
                lhs,
                rhs: bound,
                holds: lhs <= bound + 1e-12 * bound.max(1.0),
            });
        }
    }
    if let Some(p) = consts.p {
        let q = consts.q;
        if q > 1.0 && q < p {
            let lambda = (p - q) / (p - 1.0);
            let lhs = power_sum(graph, u, q);
            let rhs = power_sum(graph, u, 1.0).powf(lambda) * power_sum(graph, u, p).powf(1.0 - lambda);
            checks.push(InequalityCheck::new("interpolation", lhs, rhs));
        }
    }
    EmbeddingReport { checks }
}

/// Both sides of the exponential-integrability bound
/// `log ∫_{B_k} g e^u ≤ log ‖g‖_{L^1} + 1/(4 ε μ0 a0) + ε ‖u‖²_{W_0^{1,2}(B_k)}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrudingerMoser {
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

pub fn trudinger_moser_bound(
    graph: &WeightedGraph,
    ball: &Ball,
    consts: &HypothesisConstants,
    h: &VertexFunction,
    g: &VertexFunction,
    u: &VertexFunction,
    eps: f64,
) -> Result<TrudingerMoser> {
    let mu0 = consts
        .mu0
        .ok_or_else(|| Error::hypothesis("exponential bound needs the measure lower bound mu0"))?;
    if !(eps > 0.0) {
        return Err(Error::input(format!("eps must be positive, got {eps}")));
    }
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
        if h.value(x) < consts.a0 {
            return Err(Error::hypothesis(format!(
                "h = {} at vertex {:?} is below a0 = {}",
                h.value(x),
                graph.id(x),
                consts.a0
            )));
        }
    }
    let g_l1 = power_sum(graph, g, 1.0);
    if g_l1 == 0.0 {
        return Err(Error::Degenerate("g vanishes identically".into()));
    }
    let energy = local_dirichlet_energy(graph, ball, u, h)?;
    let weighted: f64 = ball
        .interior()
        .iter()
        .map(|&x| graph.measure(x) * g.value(x) * u.value(x).exp())
        .sum();
    if !(weighted > 0.0) {
        return Err(Error::Degenerate(
            "integral of g e^u over the ball is zero; its logarithm is undefined".into(),
        ));
    }
    let lhs = weighted.ln();
    let rhs = g_l1.ln() + 1.0 / (4.0 * eps * mu0 * consts.a0) + eps * energy;
    Ok(TrudingerMoser {
        lhs,
        rhs,
        holds: lhs <= rhs + slack(rhs),
    })
}

/// Smallest `C_k` with `∫_{B_k} u² dμ ≤ C_k ∫ |∇u|² dμ` over functions
/// vanishing outside the interior: the reciprocal of the smallest eigenvalue
/// of `K v = λ M v`, found by inverse power iteration.
pub fn poincare_constant(graph: &WeightedGraph, ball: &Ball) -> Result<f64> {
    const EIG_TOL: f64 = 1e-8;
    const MAX_ITER: usize = 100_000;
    if ball.interior().is_empty() {
        return Err(Error::input("ball interior is empty"));
    }
    if ball.boundary().is_empty() {
        return Err(Error::input(
            "ball has no boundary; the Dirichlet form is singular and no Poincaré constant exists",
        ));
    }
    let op = InteriorOperator::new(graph, ball);
    let n = op.len();
    let mass = op.mass().to_vec();
    let zero = vec![0.0; n];
    let ones = vec![1.0; n];
    let mut x = vec![1.0; n];
    let mut y = vec![0.0; n];
    let mut ky = vec![0.0; n];
    let mut residual = f64::INFINITY;
    for _ in 0..MAX_ITER {
        let mut b: Vec<f64> = x.iter().zip(&mass).map(|(v, m)| v * m).collect();
        let scale = b.iter().fold(0.0, |m: f64, v| m.max(v.abs()));
        b.iter_mut().for_each(|v| *v /= scale);
        solve_shifted(&op, &zero, &b, &mut y, &ones, 1e-11)?;
        op.apply(&zero, &y, &mut ky);
        let my: Vec<f64> = y.iter().zip(&mass).map(|(v, m)| v * m).collect();
        let lambda = dot(&y, &ky) / dot(&y, &my);
        // eigen-residual in the M^{-1} norm, relative to λ‖y‖_M
        let r2: f64 = (0..n)
            .map(|i| {
                let r = ky[i] - lambda * my[i];
                r * r / mass[i]
            })
            .sum();
        residual = r2.sqrt() / (lambda * dot(&y, &my).sqrt());
        let ymax = y.iter().fold(0.0, |m: f64, v| m.max(v.abs()));
        x.iter_mut().zip(&y).for_each(|(xi, yi)| *xi = yi / ymax);
        y.iter_mut().for_each(|v| *v /= ymax);
        if residual <= EIG_TOL {
            return Ok(1.0 / lambda);
        }
    }
    Err(Error::NotConverged {
        method: "inverse power iteration",
        iterations: MAX_ITER,
        residual,
    })
}

/// Summary of a randomized run of the embedding and exponential checks.
#[derive(Debug, Clone, Default)]
pub struct FuzzSummary {
    pub samples: usize,
    /// check name → (passed, failed)
    pub counts: BTreeMap<String, (usize, usize)>,
    /// first failing instance, if any: (sample index, check)
    pub first_failure: Option<(usize, InequalityCheck)>,
}

impl FuzzSummary {
    pub fn all_pass(&self) -> bool {
        self.counts.values().all(|&(_, fail)| fail == 0)
    }

    fn record(&mut self, sample: usize, check: InequalityCheck) {
        let entry = self.counts.entry(check.name.to_string()).or_default();
        if check.holds {
            entry.0 += 1;
        } else {
            entry.1 += 1;
            if self.first_failure.is_none() {
                self.first_failure = Some((sample, check));
            }
        }
    }
}

/// Settings for [`fuzz_embeddings`].
#[derive(Debug, Clone)]
pub struct FuzzSettings {
    pub samples: usize,
    pub seed: u64,
    /// Radius of the ball used for the exponential bound.
    pub radius: usize,
    pub eps: Vec<f64>,
}

impl Default for FuzzSettings {
    fn default() -> Self {
        FuzzSettings {
            samples: 1000,
            seed: 0,
            radius: 3,
            eps: vec![0.125, 0.25],
        }
    }
}

/// Draws random functions and evaluates every available inequality on them.
/// The exponential bound runs only when a weight `g` and potential `h` are
/// supplied.
pub fn fuzz_embeddings(
    graph: &WeightedGraph,
    consts: &HypothesisConstants,
    origin: usize,
    weight: Option<(&VertexFunction, &VertexFunction)>,
    settings: &FuzzSettings,
) -> Result<FuzzSummary> {
    graph.check_vertex(origin)?;
    let dist = graph.distances_from(origin);
    let rho_norm = match consts.p {
        Some(p) => Some(distance_lp_norm(graph, origin, p)?),
        None => None,
    };
    let ball = graph.ball(origin, settings.radius.max(1))?;
    let mut rng = ChaCha8Rng::seed_from_u64(settings.seed);
    let n = graph.vertex_count();
    let mut summary = FuzzSummary {
        samples: settings.samples,
        ..Default::default()
    };
    for sample in 0..settings.samples {
        let u = random_function(&mut rng, n);
        for check in embedding_checks(graph, consts, &u, origin, &dist, rho_norm).checks {
            summary.record(sample, check);
        }
        if let Some((h, g)) = weight {
            let local = u.restricted(ball.interior());
            for &eps in &settings.eps {
                let tm = trudinger_moser_bound(graph, &ball, consts, h, g, &local, eps)?;
                summary.record(
                    sample,
                    InequalityCheck {
                        name: "trudinger_moser",
                        lhs: tm.lhs,
                        rhs: tm.rhs,
                        holds: tm.holds,
                    },
                );
            }
        }
    }
    Ok(summary)
}

/// Random test function: a random amplitude over several decades, a random
/// fraction of vertices switched off, occasionally a single spike.
pub fn random_function(rng: &mut impl Rng, n: usize) -> VertexFunction {
    let scale = 10f64.powf(rng.random_range(-2.0..1.5));
    let density: f64 = rng.random_range(0.1..=1.0);
    let mut values: Vec<f64> = (0..n)
        .map(|_| {
            if rng.random_bool(density) {
                scale * rng.random_range(-1.0..=1.0)
            } else {
                0.0
            }
        })
        .collect();
    if rng.random_bool(0.1) {
        values.iter_mut().for_each(|v| *v = 0.0);
        let x = rng.random_range(0..n);
        values[x] = scale;
    }
    VertexFunction::from_values(values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::GraphBuilder;

    fn path(n: usize) -> WeightedGraph {
        let mut b = GraphBuilder::new();
        for i in 0..n - 1 {
            b.add_edge(&format!("{i:03}"), &format!("{:03}", i + 1), 1.0)
                .unwrap();
        }
        b.build().unwrap()
    }

    fn bump() -> VertexFunction {
        VertexFunction::from_values(vec![0.0, 1.0, 0.0])
    }

    #[test]
    fn lq_norms() {
        let g = path(3);
        assert_eq!(lq_norm(&g, &bump(), 2.0).unwrap(), 1.0);
        assert_eq!(lq_norm(&g, &bump(), f64::INFINITY).unwrap(), 1.0);
        assert_eq!(lq_norm(&g, &VertexFunction::zeros(3), 3.5).unwrap(), 0.0);
        assert!(lq_norm(&g, &bump(), 0.5).is_err());
    }

    #[test]
    fn sobolev_norms() {
        let g = path(3);
        assert!((w12_norm(&g, &bump()) - 3f64.sqrt()).abs() < 1e-15);
        assert_eq!(w12_norm(&g, &VertexFunction::zeros(3)), 0.0);
        let one = VertexFunction::constant(3, 1.0);
        assert!((h_norm(&g, &bump(), &one).unwrap() - w12_norm(&g, &bump())).abs() < 1e-15);
        let two = VertexFunction::constant(3, 2.0);
        assert_eq!(h_norm(&g, &bump(), &two).unwrap(), 2.0);
        let bad = VertexFunction::from_values(vec![1.0, 0.0, 1.0]);
        assert!(matches!(h_norm(&g, &bump(), &bad), Err(Error::Hypothesis(_))));
    }

    #[test]
    fn norm_ignores_far_zero_region() {
        let long = path(9);
        let mut v = vec![0.0; 9];
        v[1] = 1.0;
        let u = VertexFunction::from_values(v);
        assert!((w12_norm(&long, &u) - 3f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn local_energy_single_vertex() {
        let g = path(3);
        let ball = g.ball(1, 1).unwrap();
        let one = VertexFunction::constant(3, 1.0);
        let u = ball.extend(&[1.0]);
        assert_eq!(local_dirichlet_energy(&g, &ball, &u, &one).unwrap(), 3.0);
        assert_eq!(
            local_dirichlet_energy(&g, &ball, &u.scaled(2.0), &one).unwrap(),
            12.0
        );
        assert_eq!(
            local_dirichlet_energy(&g, &ball, &ball.extend(&[0.0]), &one).unwrap(),
            0.0
        );
        assert!(local_dirichlet_energy(&g, &ball, &one, &one).is_err());
    }

    #[test]
    fn pointwise_bound_examples() {
        let g = path(3);
        let consts = HypothesisConstants::new(1.0, 2.0).with_w0(1.0);
        let b = bump();
        let pb = pointwise_distance_bound(&g, &consts, &b, 0, 1).unwrap();
        assert!((pb.bound - 2.0 * 3f64.sqrt()).abs() < 1e-14);
        assert!(pb.holds);
        let at_origin = pointwise_distance_bound(&g, &consts, &b, 1, 1).unwrap();
        assert!((at_origin.bound - 3f64.sqrt()).abs() < 1e-14);
        assert!(at_origin.holds);
        let zero = pointwise_distance_bound(&g, &consts, &VertexFunction::zeros(3), 2, 1).unwrap();
        assert_eq!(zero.bound, 0.0);
        assert!(zero.holds);
        let no_w0 = HypothesisConstants::new(1.0, 2.0);
        assert!(pointwise_distance_bound(&g, &no_w0, &b, 0, 1).is_err());
    }

    #[test]
    fn embedding_examples() {
        let g = path(3);
        let consts = HypothesisConstants::new(1.0, 3.0).with_mu0(1.0).with_w0(1.0).with_p(4.0);
        let report = check_embeddings(&g, &consts, &bump(), 1).unwrap();
        let sup = report.get("sup").unwrap();
        assert_eq!(sup.lhs, 1.0);
        assert!((sup.rhs - 3f64.sqrt()).abs() < 1e-15);
        assert!(report.all_hold());
        for name in ["sup", "lq", "distance_lp", "pointwise", "interpolation"] {
            assert!(report.get(name).is_some(), "{name} missing");
        }
        let zero = check_embeddings(&g, &consts, &VertexFunction::zeros(3), 1).unwrap();
        assert!(zero.all_hold());
    }

    #[test]
    fn trudinger_moser_examples() {
        let g = path(3);
        let ball = g.ball(1, 1).unwrap();
        let consts = HypothesisConstants::new(1.0, 2.0).with_mu0(1.0);
        let one = VertexFunction::constant(3, 1.0);
        let delta = VertexFunction::dirac(3, 1);
        let zero = trudinger_moser_bound(&g, &ball, &consts, &one, &delta, &ball.extend(&[0.0]), 0.25)
            .unwrap();
        assert_eq!(zero.lhs, 0.0);
        assert!(zero.holds);
        for t in [-30.0, -1.0, 0.5, 2.0, 7.0, 40.0] {
            let u = ball.extend(&[t]);
            for eps in [0.125, 0.25] {
                let tm = trudinger_moser_bound(&g, &ball, &consts, &one, &delta, &u, eps).unwrap();
                assert!((tm.lhs - t).abs() < 1e-12);
                assert!(tm.holds, "t = {t}, eps = {eps}");
            }
        }
        let off = VertexFunction::dirac(3, 0);
        assert!(matches!(
            trudinger_moser_bound(&g, &ball, &consts, &one, &off, &ball.extend(&[1.0]), 0.25),
            Err(Error::Degenerate(_))
        ));
    }

    #[test]
    fn poincare_single_vertex() {
        let g = path(3);
        let ball = g.ball(1, 1).unwrap();
        assert!((poincare_constant(&g, &ball).unwrap() - 0.5).abs() < 1e-12);
        let scaled = g.scale_weights(4.0).unwrap();
        let ball = scaled.ball(1, 1).unwrap();
        assert!((poincare_constant(&scaled, &ball).unwrap() - 0.125).abs() < 1e-12);
        let whole = g.ball(1, 5).unwrap();
        assert!(poincare_constant(&g, &whole).is_err());
    }

    #[test]
    fn poincare_on_path_matches_sine_mode() {
        // Dirichlet path with m interior vertices: λ = 2 − 2 cos(π/(m+1))
        let g = path(41);
        for k in 1..=19 {
            let ball = g.ball(20, k).unwrap();
            let m = ball.interior().len() as f64;
            let lambda = 2.0 - 2.0 * (std::f64::consts::PI / (m + 1.0)).cos();
            let c = poincare_constant(&g, &ball).unwrap();
            assert!((c * lambda - 1.0).abs() < 1e-8, "k = {k}");
        }
    }

    #[test]
    fn constants_validation_names_vertex() {
        let mut b = GraphBuilder::new();
        b.add_edge("a", "b", 1.0).unwrap();
        b.add_edge("b", "c", 0.25).unwrap();
        b.set_measure("c", 0.5).unwrap();
        let g = b.build().unwrap();
        let consts = HypothesisConstants::new(1.0, 2.0).with_mu0(1.0);
        let err = consts.validate(&g, None).unwrap_err().to_string();
        assert!(err.contains("\"c\""), "{err}");
        let consts = HypothesisConstants::new(1.0, 2.0).with_w0(0.5);
        let err = consts.validate(&g, None).unwrap_err().to_string();
        assert!(err.contains("\"b\"-\"c\""), "{err}");
        let h = VertexFunction::from_values(vec![1.0, 0.5, 1.0]);
        let err = HypothesisConstants::new(1.0, 2.0)
            .validate(&g, Some(&h))
            .unwrap_err()
            .to_string();
        assert!(err.contains("\"b\""), "{err}");
    }
}
