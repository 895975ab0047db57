//! The equation `−Δu + hu = |u|^{q−2}u` with `q > 2`: ground states by a
//! Nehari-normalized fixed-point iteration and checks of the mountain-pass
//! geometry of `J(u) = ½‖u‖²_H − ∫ |u|^q/q`.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::function::VertexFunction;
use crate::graph::{Ball, WeightedGraph};
use crate::linalg::{dot, scaled_max, solve_shifted, InteriorOperator};
use crate::spaces::{h_norm, local_dirichlet_energy, INEQUALITY_SLACK};

const MAX_RESTARTS: usize = 5;
const MAX_FIXED_POINT: usize = 20_000;
const POLISH_THRESHOLD: f64 = 1e-4;
/// Largest interior for which the dense Newton polish is attempted.
const POLISH_MAX_DIM: usize = 1500;
const SPHERE_SAMPLES: usize = 64;

fn check_exponent(q: f64) -> Result<()> {
    if q > 2.0 && q.is_finite() {
        Ok(())
    } else {
        Err(Error::input(format!("the exponent q must exceed 2, got {q}")))
    }
}

/// `(f(s), F(s)) = (|s|^{q−2} s, |s|^q / q)`.
pub fn nonlinearity(s: f64, q: f64) -> Result<(f64, f64)> {
    check_exponent(q)?;
    Ok(pair(s, q))
}

fn pair(s: f64, q: f64) -> (f64, f64) {
    let a = s.abs();
    (a.powf(q - 2.0) * s, a.powf(q) / q)
}

/// `J(u) = ½‖u‖²_H − ∫ F(u) dμ`, either over `V` or, when a ball is given,
/// with the local norm and integral over its interior.
pub fn yamabe_energy(
    graph: &WeightedGraph,
    ball: Option<&Ball>,
    h: &VertexFunction,
    q: f64,
    u: &VertexFunction,
) -> Result<f64> {
    check_exponent(q)?;
    let (norm_sq, set): (f64, Vec<usize>) = match ball {
        Some(b) => (
            local_dirichlet_energy(graph, b, u, h)?,
            b.interior().to_vec(),
        ),
        None => (
            h_norm(graph, u, h)?.powi(2),
            (0..graph.vertex_count()).collect(),
        ),
    };
    let potential: f64 = set
        .iter()
        .map(|&x| graph.measure(x) * pair(u.value(x), q).1)
        .sum();
    Ok(0.5 * norm_sq - potential)
}

/// Largest `|−Δu + hu − |u|^{q−2}u|` over `at`, full neighborhoods.
pub fn yamabe_residual(
    graph: &WeightedGraph,
    h: &VertexFunction,
    q: f64,
    u: &VertexFunction,
    at: &[usize],
) -> f64 {
    at.iter()
        .map(|&x| {
            let ux = u.value(x);
            (-graph.laplacian_unchecked(u.values(), x) + h.value(x) * ux - pair(ux, q).0).abs()
        })
        .fold(0.0, f64::max)
}

#[derive(Debug, Clone)]
pub struct YamabeReport {
    pub u_star: VertexFunction,
    /// `J(u*)`.
    pub energy: f64,
    /// `[inf of sampled J on the δ-sphere, J(u*)]`; the mountain-pass level
    /// lies in between.
    pub mp_level_bracket: (f64, f64),
    /// `|‖u*‖²_H − ∫|u*|^q dμ|`.
    pub nehari_defect: f64,
    /// Radius of the sphere sampled for the bracket.
    pub delta: f64,
    pub residual: f64,
    pub norm_sq: f64,
    pub iterations: usize,
    pub restarts: usize,
    pub geometry: GeometryReport,
}

struct Local {
    op: InteriorOperator,
    shift: Vec<f64>,
    mass: Vec<f64>,
    q: f64,
}

impl Local {
    fn norm_sq(&self, u: &[f64]) -> f64 {
        let mut au = vec![0.0; u.len()];
        self.op.apply(&self.shift, u, &mut au);
        dot(u, &au)
    }

    fn power(&self, u: &[f64]) -> f64 {
        u.iter()
            .zip(&self.mass)
            .map(|(v, m)| m * v.abs().powf(self.q))
            .sum()
    }

    /// `A u − M f(u)`.
    fn equation(&self, u: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; u.len()];
        self.op.apply(&self.shift, u, &mut out);
        for i in 0..u.len() {
            out[i] -= self.mass[i] * pair(u[i], self.q).0;
        }
        out
    }

    fn residual(&self, u: &[f64]) -> f64 {
        scaled_max(&self.equation(u), &self.mass)
    }

    /// Scales `u` onto the Nehari manifold `‖u‖² = ∫|u|^q`.
    fn nehari_scale(&self, u: &mut [f64]) -> bool {
        let a = self.norm_sq(u);
        let b = self.power(u);
        if !(a > 0.0 && b > 0.0 && a.is_finite() && b.is_finite()) {
            return false;
        }
        let t = (a / b).powf(1.0 / (self.q - 2.0));
        if !(t.is_finite() && t > 0.0) {
            return false;
        }
        u.iter_mut().for_each(|v| *v *= t);
        true
    }

    /// Dense Newton steps on `A u − M f(u) = 0`, kept only while they reduce
    /// the residual.
    fn newton_polish(&self, u: &mut Vec<f64>, tol: f64) -> usize {
        let n = u.len();
        if n > POLISH_MAX_DIM {
            return 0;
        }
        let base = self.op.to_dense(&self.shift);
        let mut steps = 0;
        let mut res = self.residual(u);
        while res > 0.5 * tol && steps < 20 {
            let mut jac = DMatrix::from_fn(n, n, |i, j| base[i][j]);
            for i in 0..n {
                jac[(i, i)] -= (self.q - 1.0) * self.mass[i] * u[i].abs().powf(self.q - 2.0);
            }
            let rhs = DVector::from_vec(self.equation(u));
            let Some(step) = jac.lu().solve(&rhs) else {
                break;
            };
            let trial: Vec<f64> = u.iter().zip(step.iter()).map(|(a, d)| a - d).collect();
            let r = self.residual(&trial);
            if !(r < res) {
                break;
            }
            *u = trial;
            res = r;
            steps += 1;
        }
        steps
    }
}

/// Ground state on `ball` by the iteration `A w = M f(u_n)`,
/// `u_{n+1} = t_n w` with `t_n` placing `u_{n+1}` on the Nehari manifold,
/// seeded with a spike at the center and finished by Newton steps.
///
/// The inner linear solves use the Schrödinger operator `A = −Δ + h` on the
/// ball. Nonnegative seeds stay nonnegative, so this finds the nonnegative
/// ground state.
pub fn solve_yamabe(
    graph: &WeightedGraph,
    ball: &Ball,
    h: &VertexFunction,
    q: f64,
    tol: f64,
) -> Result<YamabeReport> {
    check_exponent(q)?;
    if !(tol > 0.0) {
        return Err(Error::input(format!("tolerance must be positive, got {tol}")));
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
    let op = InteriorOperator::new(graph, ball);
    let mass = op.mass().to_vec();
    let shift = op
        .vertices()
        .iter()
        .map(|&x| graph.measure(x) * h.value(x))
        .collect();
    let local = Local {
        op,
        shift,
        mass,
        q,
    };
    let n = local.op.len();
    let center = ball
        .slot(ball.center())
        .expect("center lies in the interior of its ball");

    let mut total = 0;
    for restart in 0..=MAX_RESTARTS {
        let mut u = vec![0.1 * restart as f64; n];
        u[center] += 1.0;
        match fixed_point(&local, &mut u, tol) {
            Ok(iterations) => {
                total += iterations;
                return finish(graph, ball, h, q, tol, &local, u, total, restart);
            }
            Err(Collapse(iterations)) => total += iterations,
        }
    }
    Err(Error::NotConverged {
        method: "ground-state iteration (collapsed to zero)",
        iterations: total,
        residual: f64::NAN,
    })
}

struct Collapse(usize);

fn fixed_point(local: &Local, u: &mut Vec<f64>, tol: f64) -> std::result::Result<usize, Collapse> {
    if !local.nehari_scale(u) {
        return Err(Collapse(0));
    }
    let mut rhs = vec![0.0; u.len()];
    let mut w = u.clone();
    for it in 1..=MAX_FIXED_POINT {
        let res = local.residual(u);
        if res <= 0.5 * tol {
            return Ok(it - 1);
        }
        if res < POLISH_THRESHOLD {
            local.newton_polish(u, tol);
            if local.residual(u) <= 0.5 * tol {
                return Ok(it);
            }
        }
        for i in 0..u.len() {
            rhs[i] = local.mass[i] * pair(u[i], local.q).0;
        }
        w.copy_from_slice(u);
        let inner = (0.1 * tol).min(0.1 * res);
        if solve_shifted(&local.op, &local.shift, &rhs, &mut w, &local.mass, inner).is_err() {
            return Err(Collapse(it));
        }
        if !local.nehari_scale(&mut w) {
            return Err(Collapse(it));
        }
        std::mem::swap(u, &mut w);
    }
    Ok(MAX_FIXED_POINT)
}

#[allow(clippy::too_many_arguments)]
fn finish(
    graph: &WeightedGraph,
    ball: &Ball,
    h: &VertexFunction,
    q: f64,
    tol: f64,
    local: &Local,
    u: Vec<f64>,
    iterations: usize,
    restarts: usize,
) -> Result<YamabeReport> {
    let norm_sq = local.norm_sq(&u);
    let power = local.power(&u);
    let u_star = ball.extend(&u);
    let residual = yamabe_residual(graph, h, q, &u_star, ball.interior());
    if residual > tol {
        return Err(Error::NotConverged {
            method: "ground-state iteration",
            iterations,
            residual,
        });
    }
    let energy = yamabe_energy(graph, Some(ball), h, q, &u_star)?;
    if !(energy > 0.0) {
        return Err(Error::Invariant(format!(
            "ground state has nonpositive energy {energy}"
        )));
    }
    let delta = 0.01 * norm_sq.sqrt();
    let geometry = mp_geometry_check(graph, ball, h, q, delta, 0)?;
    Ok(YamabeReport {
        u_star,
        energy,
        mp_level_bracket: (geometry.sphere_min, energy),
        nehari_defect: (norm_sq - power).abs(),
        delta,
        residual,
        norm_sq,
        iterations,
        restarts,
        geometry,
    })
}

/// Outcome of the mountain-pass geometry checks on a ball.
#[derive(Debug, Clone, PartialEq)]
pub struct GeometryReport {
    pub delta: f64,
    /// `J(0)`, which must be exactly zero.
    pub j_zero: f64,
    /// Smallest `J` over the sampled directions with `‖u‖_H = δ`.
    pub sphere_min: f64,
    pub samples: usize,
    /// Scale `t` with `J(t u0) < 0` and `‖t u0‖_H > δ` for the center spike
    /// `u0`, if one was found.
    pub escape_t: Option<f64>,
    pub escape_energy: f64,
    pub escape_norm: f64,
}

impl GeometryReport {
    pub fn h1(&self) -> bool {
        self.j_zero == 0.0
    }

    pub fn h2(&self) -> bool {
        self.sphere_min > 0.0
    }

    pub fn h3(&self) -> bool {
        self.escape_t.is_some()
    }

    pub fn holds(&self) -> bool {
        self.h1() && self.h2() && self.h3()
    }
}

/// Checks `J(0) = 0`, `J > 0` on sampled points of the sphere `‖u‖_H = δ`
/// (64 directions from a ChaCha8 stream with the given seed), and finds a
/// multiple of the center spike outside the sphere with negative energy.
/// A failed check is reported, not raised.
pub fn mp_geometry_check(
    graph: &WeightedGraph,
    ball: &Ball,
    h: &VertexFunction,
    q: f64,
    delta: f64,
    seed: u64,
) -> Result<GeometryReport> {
    check_exponent(q)?;
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(Error::input(format!("delta must be positive, got {delta}")));
    }
    let energy = |u: &VertexFunction| yamabe_energy(graph, Some(ball), h, q, u);
    let norm = |u: &VertexFunction| local_dirichlet_energy(graph, ball, u, h).map(f64::sqrt);
    let n = ball.interior().len();
    let j_zero = energy(&VertexFunction::zeros(graph.vertex_count()))?;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut sphere_min = f64::INFINITY;
    for _ in 0..SPHERE_SAMPLES {
        let dir: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..=1.0)).collect();
        let v = ball.extend(&dir);
        let len = norm(&v)?;
        if len == 0.0 {
            continue;
        }
        let e = energy(&v.scaled(delta / len))?;
        sphere_min = sphere_min.min(e);
    }

    let spike = ball.extend(
        &(0..n)
            .map(|i| if ball.interior()[i] == ball.center() { 1.0 } else { 0.0 })
            .collect::<Vec<_>>(),
    );
    let spike_norm = norm(&spike)?;
    let mut t = 1.0;
    let mut escape_t = None;
    let (mut escape_energy, mut escape_norm) = (f64::NAN, f64::NAN);
    for _ in 0..200 {
        let v = spike.scaled(t);
        escape_energy = energy(&v)?;
        escape_norm = t * spike_norm;
        if escape_energy < 0.0 && escape_norm > delta {
            escape_t = Some(t);
            break;
        }
        t *= 2.0;
    }
    Ok(GeometryReport {
        delta,
        j_zero,
        sphere_min,
        samples: SPHERE_SAMPLES,
        escape_t,
        escape_energy,
        escape_norm,
    })
}

/// Behavior of `t ↦ J(t u)` on `t > 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalingCheck {
    /// `(‖u‖²_H / ∫|u|^q)^{1/(q−2)}`.
    pub critical_t: f64,
    /// Sign changes of `d/dt J(t u)` on a uniform grid over `(0, 3 t*]`.
    pub sign_changes: usize,
}

pub fn scaling_map_check(
    graph: &WeightedGraph,
    ball: &Ball,
    h: &VertexFunction,
    q: f64,
    u: &VertexFunction,
    grid: usize,
) -> Result<ScalingCheck> {
    check_exponent(q)?;
    let a = local_dirichlet_energy(graph, ball, u, h)?;
    let b: f64 = ball
        .interior()
        .iter()
        .map(|&x| graph.measure(x) * u.value(x).abs().powf(q))
        .sum();
    if !(a > 0.0 && b > 0.0) {
        return Err(Error::input("scaling map check needs a nonzero function"));
    }
    let critical_t = (a / b).powf(1.0 / (q - 2.0));
    // d/dt J(t u) = a t − b t^{q−1}
    let slope = |t: f64| a * t - b * t.powf(q - 1.0);
    let grid = grid.max(2);
    let mut sign_changes = 0;
    let mut prev = slope(3.0 * critical_t / grid as f64).signum();
    for i in 2..=grid {
        let s = slope(3.0 * critical_t * i as f64 / grid as f64);
        if s != 0.0 && s.signum() != prev {
            sign_changes += 1;
            prev = s.signum();
        }
    }
    Ok(ScalingCheck {
        critical_t,
        sign_changes,
    })
}

/// `|J(u*) − (½ − 1/q)‖u*‖²_H|`, which vanishes on the Nehari manifold.
pub fn nehari_energy_gap(report: &YamabeReport, q: f64) -> f64 {
    (report.energy - (0.5 - 1.0 / q) * report.norm_sq).abs()
}

/// True when the reported energy respects its certified bracket.
pub fn bracket_holds(report: &YamabeReport) -> bool {
    let (lo, hi) = report.mp_level_bracket;
    lo <= hi + INEQUALITY_SLACK * hi.abs().max(1.0)
}
