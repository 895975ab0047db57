//! Problem descriptions: coefficient descriptors, the `key = value` config
//! format, and validation of a problem against its graph.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::exhaustion::{ExhaustionOptions, LocalProblem};
use crate::function::VertexFunction;
use crate::graph::{WeightedGraph, UNREACHABLE};
use crate::io::{read_function, read_graph, read_text};
use crate::spaces::{distance_lp_norm, HypothesisConstants};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Equation {
    Schrodinger,
    MeanFieldNegative,
    MeanFieldNormalized,
    Yamabe,
}

impl Equation {
    pub fn name(self) -> &'static str {
        match self {
            Equation::Schrodinger => "schrodinger",
            Equation::MeanFieldNegative => "meanfield-negative",
            Equation::MeanFieldNormalized => "meanfield-normalized",
            Equation::Yamabe => "yamabe",
        }
    }
}

impl fmt::Display for Equation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Equation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        [
            Equation::Schrodinger,
            Equation::MeanFieldNegative,
            Equation::MeanFieldNormalized,
            Equation::Yamabe,
        ]
        .into_iter()
        .find(|e| e.name() == s)
        .ok_or_else(|| Error::input(format!("unknown equation {s:?}")))
    }
}

/// One summand of a coefficient descriptor.
#[derive(Debug, Clone, PartialEq)]
pub enum Term {
    Const(f64),
    /// Values from an `x value` file; unlisted vertices are zero.
    File(PathBuf),
    /// `c δ_x`.
    Dirac { vertex: String, c: f64 },
    /// `ρ(x, O)^α`.
    RhoPow(f64),
    /// `e^{−β ρ(x, O)}`.
    ExpRho(f64),
}

const TERM_PREFIXES: [&str; 5] = ["const:", "file:", "dirac:", "rhopow:", "exp-rho:"];

/// A sum of [`Term`]s, e.g. `dirac:a:1.5+dirac:b:-2+const:0.1`.
#[derive(Debug, Clone, PartialEq)]
pub struct Coefficient {
    pub terms: Vec<Term>,
}

impl Coefficient {
    /// Parses a descriptor; relative file paths are resolved against `base`.
    pub fn parse(s: &str, base: &Path) -> Result<Self> {
        let s = s.trim();
        // split on '+' only where a new term starts, so "1e+5" survives
        let mut pieces = Vec::new();
        let mut start = 0;
        for (i, _) in s.match_indices('+') {
            let rest = &s[i + 1..];
            if TERM_PREFIXES.iter().any(|p| rest.trim_start().starts_with(p)) {
                pieces.push(&s[start..i]);
                start = i + 1;
            }
        }
        pieces.push(&s[start..]);
        let terms = pieces
            .into_iter()
            .map(|p| parse_term(p.trim(), base))
            .collect::<Result<Vec<_>>>()?;
        Ok(Coefficient { terms })
    }

    pub fn constant(c: f64) -> Self {
        Coefficient {
            terms: vec![Term::Const(c)],
        }
    }

    /// Values on every vertex of `graph`, with `ρ` measured from `origin`.
    pub fn evaluate(&self, graph: &WeightedGraph, origin: usize) -> Result<VertexFunction> {
        graph.check_vertex(origin)?;
        let n = graph.vertex_count();
        let dist = graph.distances_from(origin);
        let rho = |x: usize| {
            debug_assert_ne!(dist[x], UNREACHABLE);
            dist[x] as f64
        };
        let mut values = vec![0.0; n];
        for term in &self.terms {
            match term {
                Term::Const(c) => values.iter_mut().for_each(|v| *v += c),
                Term::File(path) => {
                    let f = read_function(graph, path)?;
                    for (v, a) in values.iter_mut().zip(f.values()) {
                        *v += a;
                    }
                }
                Term::Dirac { vertex, c } => values[graph.vertex(vertex)?] += c,
                Term::RhoPow(alpha) => {
                    for (x, v) in values.iter_mut().enumerate() {
                        *v += rho(x).powf(*alpha);
                    }
                }
                Term::ExpRho(beta) => {
                    for (x, v) in values.iter_mut().enumerate() {
                        *v += (-beta * rho(x)).exp();
                    }
                }
            }
        }
        if let Some(x) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::input(format!(
                "coefficient is not finite at vertex {:?}",
                graph.id(x)
            )));
        }
        Ok(VertexFunction::from_values(values))
    }
}

fn parse_term(s: &str, base: &Path) -> Result<Term> {
    let bad = |why: &str| Error::input(format!("bad coefficient term {s:?}: {why}"));
    let num = |t: &str| {
        t.trim()
            .parse::<f64>()
            .map_err(|_| bad("expected a number"))
    };
    let (kind, rest) = s.split_once(':').ok_or_else(|| bad("missing ':'"))?;
    match kind {
        "const" => Ok(Term::Const(num(rest)?)),
        "file" => {
            let path = Path::new(rest);
            Ok(Term::File(if path.is_absolute() {
                path.to_path_buf()
            } else {
                base.join(path)
            }))
        }
        "dirac" => {
            // vertex ids may contain ':'; the coefficient is after the last one
            let (vertex, c) = rest
                .rsplit_once(':')
                .ok_or_else(|| bad("expected dirac:<vertex>:<c>"))?;
            if vertex.is_empty() {
                return Err(bad("empty vertex id"));
            }
            Ok(Term::Dirac {
                vertex: vertex.to_string(),
                c: num(c)?,
            })
        }
        "rhopow" => Ok(Term::RhoPow(num(rest)?)),
        "exp-rho" => Ok(Term::ExpRho(num(rest)?)),
        _ => Err(bad("unknown kind")),
    }
}

/// Everything a run needs besides the graph.
#[derive(Debug, Clone)]
pub struct ProblemSpec {
    pub equation: Equation,
    pub h: Option<Coefficient>,
    pub f: Option<Coefficient>,
    pub g: Option<Coefficient>,
    pub q: Option<f64>,
    pub p: Option<f64>,
    pub mu0: Option<f64>,
    pub w0: Option<f64>,
    /// Lower bound of `h`; defaults to `min h` when `h` is given, else 1.
    pub a0: Option<f64>,
    /// Origin vertex id; defaults to the first vertex.
    pub origin: Option<String>,
    pub k_min: usize,
    pub k_max: usize,
    pub ell: Option<usize>,
    pub tol: f64,
    /// Cauchy gap tolerance; defaults to `tol`.
    pub gap_tol: Option<f64>,
    pub samples: usize,
    pub seed: u64,
    pub delta: Option<f64>,
    /// Ball radius for the Poincaré and exponential-bound checks.
    pub radius: usize,
}

impl ProblemSpec {
    pub fn new(equation: Equation) -> Self {
        ProblemSpec {
            equation,
            h: None,
            f: None,
            g: None,
            q: None,
            p: None,
            mu0: None,
            w0: None,
            a0: None,
            origin: None,
            k_min: 3,
            k_max: 50,
            ell: None,
            tol: 1e-8,
            gap_tol: None,
            samples: 1000,
            seed: 0,
            delta: None,
            radius: 3,
        }
    }

    /// Parses `key = value` lines. Unknown and repeated keys are errors.
    pub fn parse(text: &str, path: &Path) -> Result<Self> {
        let base = path.parent().unwrap_or(Path::new("."));
        let mut entries: BTreeMap<String, (usize, String)> = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let parse_error = |message: String| Error::Parse {
                path: path.to_path_buf(),
                line: i + 1,
                message,
            };
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| parse_error("expected \"key = value\"".into()))?;
            let key = key.trim().to_string();
            if entries
                .insert(key.clone(), (i + 1, value.trim().to_string()))
                .is_some()
            {
                return Err(parse_error(format!("key {key:?} given twice")));
            }
        }
        let at = |key: &str, line: usize, e: Error| Error::Parse {
            path: path.to_path_buf(),
            line,
            message: format!("{key}: {e}"),
        };
        let (eq_line, eq) = entries
            .remove("equation")
            .ok_or_else(|| Error::input(format!("{}: missing key \"equation\"", path.display())))?;
        let mut spec = ProblemSpec::new(eq.parse().map_err(|e| at("equation", eq_line, e))?);
        for (key, (line, value)) in entries {
            let wrap = |e: Error| at(&key, line, e);
            let real = || {
                value
                    .parse::<f64>()
                    .map_err(|_| wrap(Error::input(format!("not a number: {value:?}"))))
            };
            let int = || {
                value
                    .parse::<usize>()
                    .map_err(|_| wrap(Error::input(format!("not a nonnegative integer: {value:?}"))))
            };
            match key.as_str() {
                "h" => spec.h = Some(Coefficient::parse(&value, base).map_err(wrap)?),
                "f" => spec.f = Some(Coefficient::parse(&value, base).map_err(wrap)?),
                "g" => spec.g = Some(Coefficient::parse(&value, base).map_err(wrap)?),
                "q" => spec.q = Some(real()?),
                "p" => spec.p = Some(real()?),
                "mu0" => spec.mu0 = Some(real()?),
                "w0" => spec.w0 = Some(real()?),
                "a0" => spec.a0 = Some(real()?),
                "origin" => spec.origin = Some(value.clone()),
                "k_min" => spec.k_min = int()?,
                "k_max" => spec.k_max = int()?,
                "ell" => spec.ell = Some(int()?),
                "tol" => spec.tol = real()?,
                "gap_tol" => spec.gap_tol = Some(real()?),
                "samples" => spec.samples = int()?,
                "seed" => {
                    spec.seed = value
                        .parse()
                        .map_err(|_| wrap(Error::input(format!("not a seed: {value:?}"))))?
                }
                "delta" => spec.delta = Some(real()?),
                "radius" => spec.radius = int()?,
                _ => return Err(wrap(Error::input("unknown key"))),
            }
        }
        Ok(spec)
    }

    pub fn read(path: &Path) -> Result<Self> {
        Self::parse(&read_text(path)?, path)
    }

    /// Evaluates the coefficients on `graph` and checks the hypotheses of
    /// the chosen equation, naming the first offending vertex.
    pub fn resolve(&self, graph: &WeightedGraph) -> Result<Resolved> {
        let origin = match &self.origin {
            Some(id) => graph.vertex(id)?,
            None => 0,
        };
        let equation = self.equation;
        fn need<'a>(c: &'a Option<Coefficient>, name: &str, equation: Equation) -> Result<&'a Coefficient> {
            c.as_ref()
                .ok_or_else(|| Error::input(format!("equation {equation} needs coefficient {name}")))
        }
        let eval = |c: &Coefficient| c.evaluate(graph, origin);
        let h = match self.equation {
            Equation::MeanFieldNegative => None,
            _ => Some(eval(need(&self.h, "h", equation)?)?),
        };
        let f = match self.equation {
            Equation::Yamabe => None,
            _ => Some(eval(need(&self.f, "f", equation)?)?),
        };
        let g = match self.equation {
            Equation::MeanFieldNegative | Equation::MeanFieldNormalized => Some(eval(need(&self.g, "g", equation)?)?),
            _ => None,
        };
        if self.equation == Equation::Yamabe && self.q.is_none() {
            return Err(Error::input("equation yamabe needs the exponent q"));
        }
        let a0 = self.a0.unwrap_or_else(|| h.as_ref().map_or(1.0, |h| h.min()));
        let q = self.q.unwrap_or(2.0);
        let mut constants = HypothesisConstants::new(a0, q);
        constants.mu0 = self.mu0;
        constants.w0 = self.w0;
        constants.p = self.p;
        constants.validate(graph, h.as_ref())?;
        if let Some(p) = self.p {
            distance_lp_norm(graph, origin, p)?;
        }

        let vertex_error = |x: usize, what: String| {
            Error::hypothesis(format!("{what} at vertex {:?}", graph.id(x)))
        };
        let problem = match self.equation {
            Equation::Schrodinger => LocalProblem::Schrodinger {
                h: h.clone().expect("evaluated above"),
                f: f.clone().expect("evaluated above"),
            },
            Equation::MeanFieldNegative => {
                let (f, g) = (f.clone().expect("evaluated above"), g.clone().expect("evaluated above"));
                for x in 0..graph.vertex_count() {
                    let (fx, gx) = (f.value(x), g.value(x));
                    if !(gx <= fx && fx < 0.0) {
                        return Err(vertex_error(x, format!("need g <= f < 0, found f = {fx}, g = {gx}")));
                    }
                }
                LocalProblem::MeanFieldNegative { f, g }
            }
            Equation::MeanFieldNormalized => {
                let g = g.clone().expect("evaluated above");
                if let Some(x) = (0..graph.vertex_count()).find(|&x| g.value(x) < 0.0) {
                    return Err(vertex_error(x, format!("need g >= 0, found g = {}", g.value(x))));
                }
                if g.is_zero() {
                    return Err(Error::hypothesis("need g >= 0 with g not identically zero"));
                }
                if !(1.0..=2.0).contains(&q) && self.q.is_some() {
                    return Err(Error::hypothesis(format!(
                        "the normalized mean field bounds need q in [1, 2], got {q}"
                    )));
                }
                LocalProblem::MeanFieldNormalized {
                    h: h.clone().expect("evaluated above"),
                    f: f.clone().expect("evaluated above"),
                    g,
                }
            }
            Equation::Yamabe => {
                if !(q > 2.0) {
                    return Err(Error::hypothesis(format!("yamabe needs q > 2, got {q}")));
                }
                if let Some(p) = self.p {
                    if !(q < p) {
                        return Err(Error::hypothesis(format!("yamabe needs q < p, got q = {q}, p = {p}")));
                    }
                }
                LocalProblem::Yamabe {
                    h: h.clone().expect("evaluated above"),
                    q,
                }
            }
        };

        let mut options = ExhaustionOptions::new(origin, self.k_min, self.k_max, self.tol);
        options.ell = self.ell;
        options.gap_tol = self.gap_tol.unwrap_or(self.tol);
        options.witness_radius()?;
        Ok(Resolved {
            problem,
            origin,
            constants,
            options,
            h,
            f,
            g,
        })
    }
}

/// A [`ProblemSpec`] evaluated on a concrete graph.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub problem: LocalProblem,
    pub origin: usize,
    pub constants: HypothesisConstants,
    pub options: ExhaustionOptions,
    pub h: Option<VertexFunction>,
    pub f: Option<VertexFunction>,
    pub g: Option<VertexFunction>,
}

/// Reads the graph, optional measure file and config, and validates them
/// together.
pub fn load_problem(
    graph_path: &Path,
    measure_path: Option<&Path>,
    config_path: &Path,
) -> Result<(WeightedGraph, ProblemSpec, Resolved)> {
    let graph = read_graph(graph_path, measure_path)?;
    let spec = ProblemSpec::read(config_path)?;
    let resolved = spec.resolve(&graph)?;
    Ok((graph, spec, resolved))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::GraphBuilder;

    fn abc() -> WeightedGraph {
        let mut b = GraphBuilder::new();
        b.add_edge("a", "b", 1.0).unwrap();
        b.add_edge("b", "c", 1.0).unwrap();
        b.build().unwrap()
    }

    #[test]
    fn descriptors() {
        let g = abc();
        let base = Path::new(".");
        let h = Coefficient::parse("const:1.0", base).unwrap();
        assert_eq!(h.evaluate(&g, 0).unwrap().values(), &[1.0, 1.0, 1.0]);
        let f = Coefficient::parse("dirac:b:3.0", base).unwrap();
        assert_eq!(f.evaluate(&g, 0).unwrap().values(), &[0.0, 3.0, 0.0]);
        let s = Coefficient::parse("dirac:a:1e+2 + const:1e-1+rhopow:2", base).unwrap();
        assert_eq!(s.terms.len(), 3);
        assert_eq!(s.evaluate(&g, 0).unwrap().values(), &[100.1, 1.1, 4.1]);
        let e = Coefficient::parse("exp-rho:0.7", base).unwrap();
        assert_eq!(e.evaluate(&g, 1).unwrap().values()[0], (-0.7f64).exp());
        assert!(Coefficient::parse("dirac:zz:1", base).unwrap().evaluate(&g, 0).is_err());
        assert!(Coefficient::parse("wave:1", base).is_err());
    }

    #[test]
    fn config_parsing() {
        let text = "equation = schrodinger # linear\nh = const:1\nf = dirac:b:3\nk_min = 2\nk_max = 4\n";
        let spec = ProblemSpec::parse(text, Path::new("run.cfg")).unwrap();
        assert_eq!(spec.equation, Equation::Schrodinger);
        assert_eq!((spec.k_min, spec.k_max), (2, 4));
        let r = spec.resolve(&abc()).unwrap();
        assert_eq!(r.constants.a0, 1.0);
        assert!(ProblemSpec::parse("equation = schrodinger\ncolor = red\n", Path::new("x")).is_err());
        assert!(ProblemSpec::parse("h = const:1\n", Path::new("x")).is_err());
    }

    #[test]
    fn hypothesis_errors_name_vertex() {
        let text = "equation = meanfield-normalized\nh = const:1\nf = const:0\ng = dirac:c:-1\n";
        let spec = ProblemSpec::parse(text, Path::new("x")).unwrap();
        let err = spec.resolve(&abc()).unwrap_err().to_string();
        assert!(err.contains("\"c\""), "{err}");
        let text = "equation = yamabe\nh = const:1\n";
        assert!(ProblemSpec::parse(text, Path::new("x")).unwrap().resolve(&abc()).is_err());
    }
}
