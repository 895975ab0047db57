//! Local-to-global exhaustion: solve on the balls `B_k` for growing `k`,
//! watch the solutions settle on a fixed witness ball `B_ℓ`, and certify the
//! limit against the equation on the whole graph.

use std::fmt;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::function::VertexFunction;
use crate::graph::{Ball, WeightedGraph};
use crate::meanfield::{
    gamma_limit_check, negative_residual, normalized_residual, solve_meanfield_negative_from,
    solve_meanfield_normalized_from, GammaReport, MeanFieldState,
};
use crate::schrodinger::{schrodinger_residual, solve_local_schrodinger_from};
use crate::spaces::{h_inner, local_dirichlet_energy, INEQUALITY_SLACK};
use crate::yamabe::{solve_yamabe, yamabe_residual};

/// Which equation to solve, with its coefficients evaluated on the graph.
#[derive(Debug, Clone)]
pub enum LocalProblem {
    /// `−Δu + hu = f`.
    Schrodinger { h: VertexFunction, f: VertexFunction },
    /// `Δu = f − g e^u` with `g ≤ f < 0`.
    MeanFieldNegative { f: VertexFunction, g: VertexFunction },
    /// `−Δu + hu = g e^u / ∫ g e^u − f` with `g ≥ 0`.
    MeanFieldNormalized {
        h: VertexFunction,
        f: VertexFunction,
        g: VertexFunction,
    },
    /// `−Δu + hu = |u|^{q−2} u`.
    Yamabe { h: VertexFunction, q: f64 },
}

impl LocalProblem {
    pub fn name(&self) -> &'static str {
        match self {
            LocalProblem::Schrodinger { .. } => "schrodinger",
            LocalProblem::MeanFieldNegative { .. } => "meanfield-negative",
            LocalProblem::MeanFieldNormalized { .. } => "meanfield-normalized",
            LocalProblem::Yamabe { .. } => "yamabe",
        }
    }

    /// The potential used in the norm; the negative mean field equation has
    /// none, so `h ≡ 1` (the plain `W^{1,2}` norm) is used for reporting.
    fn norm_potential(&self, n: usize) -> VertexFunction {
        match self {
            LocalProblem::Schrodinger { h, .. }
            | LocalProblem::MeanFieldNormalized { h, .. }
            | LocalProblem::Yamabe { h, .. } => h.clone(),
            LocalProblem::MeanFieldNegative { .. } => VertexFunction::constant(n, 1.0),
        }
    }

    /// Largest vertex-wise residual at `at` with full neighborhoods; `gamma`
    /// is the normalizing constant of the level that produced `u`.
    pub fn residual(
        &self,
        graph: &WeightedGraph,
        u: &VertexFunction,
        gamma: Option<f64>,
        at: &[usize],
    ) -> f64 {
        match self {
            LocalProblem::Schrodinger { h, f } => schrodinger_residual(graph, h, f, u, at),
            LocalProblem::MeanFieldNegative { f, g } => negative_residual(graph, f, g, u, at),
            LocalProblem::MeanFieldNormalized { h, f, g } => {
                normalized_residual(graph, h, f, g, u, gamma.unwrap_or(f64::NAN), at)
            }
            LocalProblem::Yamabe { h, q } => yamabe_residual(graph, h, *q, u, at),
        }
    }
}

#[derive(Debug, Clone)]
pub struct ExhaustionOptions {
    pub origin: usize,
    pub k_min: usize,
    pub k_max: usize,
    /// Witness radius; defaults to `max(2, k_min − 2)`, capped at `k_min − 1`
    /// (or 1 when `k_min = 1`).
    pub ell: Option<usize>,
    /// Residual tolerance of the local solves and of the global certificate.
    pub tol: f64,
    /// Tolerance for the Cauchy gap on the witness ball.
    pub gap_tol: f64,
    /// Stop at the first level that certifies convergence.
    pub early_stop: bool,
    /// Solve all levels independently on the rayon pool, without warm starts.
    pub parallel: bool,
}

impl ExhaustionOptions {
    pub fn new(origin: usize, k_min: usize, k_max: usize, tol: f64) -> Self {
        ExhaustionOptions {
            origin,
            k_min,
            k_max,
            ell: None,
            tol,
            gap_tol: tol,
            early_stop: false,
            parallel: false,
        }
    }

    pub fn witness_radius(&self) -> Result<usize> {
        let ell = match self.ell {
            Some(l) => l,
            None => 2.max(self.k_min.saturating_sub(2)).min(self.k_min.saturating_sub(1).max(1)),
        };
        if ell == 0 || ell > self.k_min {
            return Err(Error::input(format!(
                "witness radius must satisfy 1 <= ell <= k_min, got ell = {ell}, k_min = {}",
                self.k_min
            )));
        }
        Ok(ell)
    }

    fn validate(&self, graph: &WeightedGraph) -> Result<usize> {
        graph.check_vertex(self.origin)?;
        if self.k_min > self.k_max {
            return Err(Error::input(format!(
                "k_min = {} exceeds k_max = {}",
                self.k_min, self.k_max
            )));
        }
        if !(self.tol > 0.0 && self.gap_tol > 0.0) {
            return Err(Error::input("tolerances must be positive"));
        }
        self.witness_radius()
    }
}

/// `‖u_k‖²_H` of the zero extension against `2‖u_k‖²_{W_0^{1,2}(B_k)}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DoublingCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

pub fn doubling_check(
    graph: &WeightedGraph,
    ball: &Ball,
    u: &VertexFunction,
    h: &VertexFunction,
) -> Result<DoublingCheck> {
    let local = local_dirichlet_energy(graph, ball, u, h)?;
    let lhs = h_inner(graph, u, u, h)?;
    let rhs = 2.0 * local;
    Ok(DoublingCheck {
        lhs,
        rhs,
        holds: lhs <= rhs + INEQUALITY_SLACK,
    })
}

/// One level of the exhaustion.
#[derive(Debug, Clone)]
pub struct LevelRecord {
    pub k: usize,
    /// `Λ_k`.
    pub energy: f64,
    /// `‖u_k‖²_{W_0^{1,2}(B_k)}`.
    pub norm_sq: f64,
    /// Largest interior residual of the local equation.
    pub residual: f64,
    pub iterations: usize,
    /// Certified energy bracket of the local solver, if it has one.
    pub bracket: (Option<f64>, Option<f64>),
    pub gamma: Option<f64>,
    pub u_min: f64,
    pub u_max: f64,
    pub doubling: DoublingCheck,
    /// Whether `u_k > 0` on the witness ball, when the data is nonnegative
    /// and nonzero (Schrödinger only). Far from the data the solution is
    /// below the solver tolerance, so its sign is only meaningful near `O`.
    pub positive: Option<bool>,
    pub nehari_defect: Option<f64>,
    /// `max_{B_ℓ} |u_k − u_{k−1}|`; absent on the first level.
    pub gap: Option<f64>,
    pub ball_size: usize,
}

impl LevelRecord {
    pub fn bracket_holds(&self) -> bool {
        let slack = INEQUALITY_SLACK * self.energy.abs().max(1.0);
        self.bracket.0.is_none_or(|lo| self.energy >= lo - slack)
            && self.bracket.1.is_none_or(|hi| self.energy <= hi + slack)
    }
}

#[derive(Debug, Clone)]
pub struct ExhaustionReport {
    pub equation: &'static str,
    pub origin: usize,
    pub levels: Vec<LevelRecord>,
    /// Final-level solution restricted to the witness ball.
    pub u_star: VertexFunction,
    /// Final-level solution on the whole graph (zero outside its ball).
    pub final_solution: VertexFunction,
    pub witness_radius: usize,
    pub cauchy_gap: f64,
    pub global_residual: f64,
    pub converged: bool,
    /// `B_{k_max+1} = V`: the boundary vanished instead of being outgrown.
    pub finite_graph_mode: bool,
    /// Levels whose gap exceeded the previous level's gap.
    pub nonmonotone_gaps: Vec<usize>,
    /// Levels whose energy rose above the previous one, where theory says it
    /// cannot (Schrödinger and negative mean field).
    pub energy_increases: Vec<usize>,
    pub gamma: Option<GammaReport>,
}

impl ExhaustionReport {
    pub fn final_k(&self) -> Option<usize> {
        self.levels.last().map(|l| l.k)
    }

    /// The machine-readable last line of a run.
    pub fn summary_line(&self) -> String {
        let k = self.final_k().unwrap_or(0);
        let head = if self.converged {
            "CONVERGED"
        } else {
            "NOT_CONVERGED"
        };
        format!(
            "{head} k={k} gap={:?} residual={:?}",
            self.cauchy_gap, self.global_residual
        )
    }
}

/// A failed exhaustion, carrying everything computed before the failure.
#[derive(Debug)]
pub struct ExhaustionError {
    pub partial: Box<ExhaustionReport>,
    pub source: Error,
}

impl fmt::Display for ExhaustionError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let after = match self.partial.final_k() {
            Some(k) => format!("after level {k}"),
            None => "before the first level".to_string(),
        };
        write!(f, "exhaustion aborted {after}: {}", self.source)
    }
}

impl std::error::Error for ExhaustionError {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        Some(&self.source)
    }
}

impl From<ExhaustionError> for Error {
    fn from(e: ExhaustionError) -> Self {
        e.source
    }
}

struct Solved {
    k: usize,
    ball: Ball,
    u: VertexFunction,
    energy: f64,
    residual: f64,
    iterations: usize,
    bracket: (Option<f64>, Option<f64>),
    gamma: Option<f64>,
    nehari_defect: Option<f64>,
}

fn solve_level(
    graph: &WeightedGraph,
    problem: &LocalProblem,
    ball: Ball,
    tol: f64,
    start: Option<&VertexFunction>,
) -> Result<Solved> {
    let zeros = VertexFunction::zeros(graph.vertex_count());
    let start = start.unwrap_or(&zeros);
    let k = ball.radius();
    let from_mf = |s: MeanFieldState, ball: Ball| Solved {
        k,
        ball,
        u: s.u,
        energy: s.energy,
        residual: s.residual,
        iterations: s.iterations,
        bracket: (s.bracket.0, Some(s.bracket.1)),
        gamma: s.gamma,
        nehari_defect: None,
    };
    Ok(match problem {
        LocalProblem::Schrodinger { h, f } => {
            let s = solve_local_schrodinger_from(graph, &ball, h, f, tol, start)?;
            Solved {
                k,
                ball,
                u: s.u,
                energy: s.energy,
                residual: s.residual,
                iterations: s.iterations,
                bracket: (Some(s.bracket.0), Some(s.bracket.1)),
                gamma: None,
                nehari_defect: None,
            }
        }
        LocalProblem::MeanFieldNegative { f, g } => {
            let s = solve_meanfield_negative_from(graph, &ball, f, g, tol, start)?;
            from_mf(s, ball)
        }
        LocalProblem::MeanFieldNormalized { h, f, g } => {
            let s = solve_meanfield_normalized_from(graph, &ball, h, f, g, tol, start)?;
            from_mf(s, ball)
        }
        LocalProblem::Yamabe { h, q } => {
            let r = solve_yamabe(graph, &ball, h, *q, tol)?;
            Solved {
                k,
                ball,
                u: r.u_star,
                energy: r.energy,
                residual: r.residual,
                iterations: r.iterations,
                bracket: (Some(r.mp_level_bracket.0), None),
                gamma: None,
                nehari_defect: Some(r.nehari_defect),
            }
        }
    })
}

struct Tracker<'a> {
    graph: &'a WeightedGraph,
    problem: &'a LocalProblem,
    options: &'a ExhaustionOptions,
    witness: Ball,
    potential: VertexFunction,
    levels: Vec<LevelRecord>,
    last: Option<Solved>,
    nonmonotone_gaps: Vec<usize>,
    energy_increases: Vec<usize>,
}

impl Tracker<'_> {
    fn push(&mut self, s: Solved) -> Result<()> {
        let graph = self.graph;
        let norm_sq = local_dirichlet_energy(graph, &s.ball, &s.u, &self.potential)?;
        let doubling = doubling_check(graph, &s.ball, &s.u, &self.potential)?;
        let positive = match self.problem {
            LocalProblem::Schrodinger { f, .. }
                if s.ball.interior().iter().all(|&x| f.value(x) >= 0.0)
                    && s.ball.interior().iter().any(|&x| f.value(x) > 0.0) =>
            {
                Some(self.witness.interior().iter().all(|&x| s.u.value(x) > 0.0))
            }
            _ => None,
        };
        let gap = self.last.as_ref().map(|prev| {
            self.witness
                .interior()
                .iter()
                .map(|&x| (s.u.value(x) - prev.u.value(x)).abs())
                .fold(0.0, f64::max)
        });
        if let (Some(g), Some(prev_gap)) = (gap, self.levels.last().and_then(|l| l.gap)) {
            if g > prev_gap {
                self.nonmonotone_gaps.push(s.k);
            }
        }
        let monotone_energy = matches!(
            self.problem,
            LocalProblem::Schrodinger { .. } | LocalProblem::MeanFieldNegative { .. }
        );
        if let Some(prev) = &self.last {
            let slack = INEQUALITY_SLACK * prev.energy.abs().max(1.0);
            if monotone_energy && s.energy > prev.energy + slack {
                self.energy_increases.push(s.k);
            }
        }
        let interior = s.ball.interior();
        self.levels.push(LevelRecord {
            k: s.k,
            energy: s.energy,
            norm_sq,
            residual: s.residual,
            iterations: s.iterations,
            bracket: s.bracket,
            gamma: s.gamma,
            u_min: s.u.min_on(interior),
            u_max: s.u.max_on(interior),
            doubling,
            positive,
            nehari_defect: s.nehari_defect,
            gap,
            ball_size: interior.len(),
        });
        self.last = Some(s);
        Ok(())
    }

    fn certify(&self) -> (f64, f64, bool) {
        let Some(last) = &self.last else {
            return (f64::INFINITY, f64::INFINITY, false);
        };
        let gap = self.levels.last().and_then(|l| l.gap).unwrap_or(f64::INFINITY);
        let residual = self
            .problem
            .residual(self.graph, &last.u, last.gamma, self.witness.interior());
        let converged = gap <= self.options.gap_tol && residual <= self.options.tol;
        (gap, residual, converged)
    }

    fn report(self) -> Result<ExhaustionReport> {
        let (cauchy_gap, global_residual, converged) = self.certify();
        let graph = self.graph;
        let options = self.options;
        let finite_graph_mode = graph.ball(options.origin, options.k_max + 1)?.covers_graph();
        let final_solution = self
            .last
            .as_ref()
            .map(|s| s.u.clone())
            .unwrap_or_else(|| VertexFunction::zeros(graph.vertex_count()));
        let gamma = match (self.problem, &self.last) {
            (LocalProblem::MeanFieldNormalized { g, .. }, Some(last)) => {
                let state = MeanFieldState {
                    radius: last.k,
                    u: last.u.clone(),
                    energy: last.energy,
                    gamma: last.gamma,
                    residual: last.residual,
                    iterations: last.iterations,
                    bracket: (last.bracket.0, last.bracket.1.unwrap_or(f64::INFINITY)),
                };
                Some(gamma_limit_check(
                    graph,
                    options.origin,
                    &[state],
                    &final_solution,
                    g,
                )?)
            }
            _ => None,
        };
        Ok(ExhaustionReport {
            equation: self.problem.name(),
            origin: options.origin,
            u_star: final_solution.restricted(self.witness.interior()),
            final_solution,
            levels: self.levels,
            witness_radius: self.witness.radius(),
            cauchy_gap,
            global_residual,
            converged,
            finite_graph_mode,
            nonmonotone_gaps: self.nonmonotone_gaps,
            energy_increases: self.energy_increases,
            gamma,
        })
    }
}

/// Runs levels `k_min..=k_max` and certifies the limit on the witness ball.
///
/// Reaching `k_max` without convergence is not an error; the report says
/// `converged = false`. A failing local solve aborts with the levels done so
/// far attached.
pub fn run_exhaustion(
    graph: &WeightedGraph,
    problem: &LocalProblem,
    options: &ExhaustionOptions,
) -> std::result::Result<ExhaustionReport, ExhaustionError> {
    let ell = options.validate(graph).map_err(|e| abort_empty(graph, problem, options, e))?;
    let dist = graph.distances_from(options.origin);
    let mut tracker = Tracker {
        graph,
        problem,
        options,
        witness: Ball::from_distances(options.origin, ell, &dist),
        potential: problem.norm_potential(graph.vertex_count()),
        levels: Vec::new(),
        last: None,
        nonmonotone_gaps: Vec::new(),
        energy_increases: Vec::new(),
    };
    let ks = options.k_min..=options.k_max;

    let fail = |tracker: Tracker, source: Error| -> ExhaustionError {
        match tracker.report() {
            Ok(partial) => ExhaustionError {
                partial: Box::new(partial),
                source,
            },
            Err(e) => abort_empty(graph, problem, options, e),
        }
    };

    if options.parallel {
        let solved: Vec<Result<Solved>> = ks
            .into_par_iter()
            .map(|k| {
                let ball = Ball::from_distances(options.origin, k, &dist);
                solve_level(graph, problem, ball, options.tol, None)
            })
            .collect();
        for s in solved {
            match s.and_then(|s| tracker.push(s)) {
                Ok(()) => {
                    if options.early_stop && tracker.certify().2 {
                        break;
                    }
                }
                Err(e) => return Err(fail(tracker, e)),
            }
        }
    } else {
        for k in ks {
            let ball = Ball::from_distances(options.origin, k, &dist);
            let start = tracker.last.as_ref().map(|s| s.u.clone());
            let step = solve_level(graph, problem, ball, options.tol, start.as_ref())
                .and_then(|s| tracker.push(s));
            if let Err(e) = step {
                return Err(fail(tracker, e));
            }
            if options.early_stop && tracker.certify().2 {
                break;
            }
        }
    }
    tracker.report().map_err(|e| abort_empty(graph, problem, options, e))
}

fn abort_empty(
    graph: &WeightedGraph,
    problem: &LocalProblem,
    options: &ExhaustionOptions,
    source: Error,
) -> ExhaustionError {
    let zeros = VertexFunction::zeros(graph.vertex_count());
    ExhaustionError {
        partial: Box::new(ExhaustionReport {
            equation: problem.name(),
            origin: options.origin,
            levels: Vec::new(),
            u_star: zeros.clone(),
            final_solution: zeros,
            witness_radius: options.ell.unwrap_or(0),
            cauchy_gap: f64::INFINITY,
            global_residual: f64::INFINITY,
            converged: false,
            finite_graph_mode: false,
            nonmonotone_gaps: Vec::new(),
            energy_increases: Vec::new(),
            gamma: None,
        }),
        source,
    }
}
