//! Deterministic example graphs: paths, grids and regular trees.
//!
//! Vertex ids are zero-padded so that lexicographic order matches generation
//! order; the first generated vertex is the natural origin.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::graph::{GraphBuilder, WeightedGraph};

/// Shape of a generated graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GraphKind {
    Path { n: usize },
    Grid { n: usize, m: usize },
    Tree { branching: usize, depth: usize },
}

impl std::str::FromStr for GraphKind {
    type Err = Error;

    /// `path:n`, `grid:nxm`, `tree:b:d`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::input(format!("unknown graph kind {s:?}; expected path:n, grid:nxm or tree:b:d"));
        let num = |t: &str| t.parse::<usize>().map_err(|_| bad());
        let parts: Vec<&str> = s.split(':').collect();
        let kind = match parts.as_slice() {
            ["path", n] => GraphKind::Path { n: num(n)? },
            ["grid", dims] => {
                let (n, m) = dims.split_once(['x', '×']).ok_or_else(bad)?;
                GraphKind::Grid {
                    n: num(n)?,
                    m: num(m)?,
                }
            }
            ["tree", b, d] => GraphKind::Tree {
                branching: num(b)?,
                depth: num(d)?,
            },
            _ => return Err(bad()),
        };
        let sizes_ok = match kind {
            GraphKind::Path { n } => n >= 1,
            GraphKind::Grid { n, m } => n >= 1 && m >= 1,
            GraphKind::Tree { branching, .. } => branching >= 1,
        };
        if !sizes_ok {
            return Err(Error::input(format!("graph sizes must be at least 1 in {s:?}")));
        }
        Ok(kind)
    }
}

/// How edge weights are assigned.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum WeightRule {
    Const(f64),
    /// Independent uniform draws from `[lo, hi]`, seeded.
    Uniform { lo: f64, hi: f64, seed: u64 },
}

impl std::str::FromStr for WeightRule {
    type Err = Error;

    /// `const:w` or `uniform:lo:hi:seed`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::input(format!("unknown weight rule {s:?}"));
        let parts: Vec<&str> = s.split(':').collect();
        match parts.as_slice() {
            ["const", w] => Ok(WeightRule::Const(w.parse().map_err(|_| bad())?)),
            ["uniform", lo, hi, seed] => {
                let lo: f64 = lo.parse().map_err(|_| bad())?;
                let hi: f64 = hi.parse().map_err(|_| bad())?;
                if !(lo <= hi) {
                    return Err(bad());
                }
                Ok(WeightRule::Uniform {
                    lo,
                    hi,
                    seed: seed.parse().map_err(|_| bad())?,
                })
            }
            _ => Err(bad()),
        }
    }
}

/// How vertex measures are assigned, in terms of the hop distance `ρ` from
/// the first vertex.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MeasureRule {
    Const(f64),
    /// `e^{−β ρ}`.
    ExpRho(f64),
    /// `(1 + ρ)^α`.
    RhoPow(f64),
    Uniform { lo: f64, hi: f64, seed: u64 },
}

impl std::str::FromStr for MeasureRule {
    type Err = Error;

    /// `const:m`, `exp-rho:β`, `rhopow:α` or `uniform:lo:hi:seed`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::input(format!("unknown measure rule {s:?}"));
        let num = |t: &str| t.parse::<f64>().map_err(|_| bad());
        if s.starts_with("uniform:") {
            return match s.parse::<WeightRule>() {
                Ok(WeightRule::Uniform { lo, hi, seed }) => Ok(MeasureRule::Uniform { lo, hi, seed }),
                _ => Err(bad()),
            };
        }
        match s.split_once(':') {
            Some(("const", v)) => Ok(MeasureRule::Const(num(v)?)),
            Some(("exp-rho", v)) => Ok(MeasureRule::ExpRho(num(v)?)),
            Some(("rhopow", v)) => Ok(MeasureRule::RhoPow(num(v)?)),
            _ => Err(bad()),
        }
    }
}

fn width(count: usize) -> usize {
    count.saturating_sub(1).to_string().len()
}

/// Builds the graph; fails if the measure rule yields a nonpositive or
/// non-finite measure anywhere.
pub fn generate_graph(kind: GraphKind, weights: WeightRule, measures: MeasureRule) -> Result<WeightedGraph> {
    // (id, hop distance from the first vertex), plus edges by position
    let mut vertices: Vec<(String, usize)> = Vec::new();
    let mut edges: Vec<(usize, usize)> = Vec::new();
    match kind {
        GraphKind::Path { n } => {
            let w = width(n);
            for i in 0..n {
                vertices.push((format!("{i:0w$}"), i));
                if i > 0 {
                    edges.push((i - 1, i));
                }
            }
        }
        GraphKind::Grid { n, m } => {
            let (wi, wj) = (width(n), width(m));
            for i in 0..n {
                for j in 0..m {
                    vertices.push((format!("{i:0wi$}_{j:0wj$}"), i + j));
                    let here = i * m + j;
                    if j > 0 {
                        edges.push((here - 1, here));
                    }
                    if i > 0 {
                        edges.push((here - m, here));
                    }
                }
            }
        }
        GraphKind::Tree { branching, depth } => {
            let mut count = 0usize;
            let mut level = 1usize;
            for _ in 0..=depth {
                count = count
                    .checked_add(level)
                    .ok_or_else(|| Error::input("tree too large"))?;
                level = level.saturating_mul(branching);
            }
            let w = width(count);
            let mut depth_of = vec![0usize; count];
            for i in 0..count {
                if i > 0 {
                    let parent = (i - 1) / branching;
                    depth_of[i] = depth_of[parent] + 1;
                    edges.push((parent, i));
                }
                vertices.push((format!("{i:0w$}"), depth_of[i]));
            }
        }
    }

    let mut builder = GraphBuilder::new();
    let mut weight_rng = match weights {
        WeightRule::Uniform { seed, .. } => Some(ChaCha8Rng::seed_from_u64(seed)),
        WeightRule::Const(_) => None,
    };
    for (id, _) in &vertices {
        builder.add_vertex(id);
    }
    for &(a, b) in &edges {
        let w = match (weights, weight_rng.as_mut()) {
            (WeightRule::Uniform { lo, hi, .. }, Some(rng)) => rng.random_range(lo..=hi),
            (WeightRule::Const(w), _) => w,
            _ => unreachable!(),
        };
        builder.add_edge(&vertices[a].0, &vertices[b].0, w)?;
    }
    let mut measure_rng = match measures {
        MeasureRule::Uniform { seed, .. } => Some(ChaCha8Rng::seed_from_u64(seed)),
        _ => None,
    };
    for (id, rho) in &vertices {
        let rho = *rho as f64;
        let mu = match measures {
            MeasureRule::Const(m) => m,
            MeasureRule::ExpRho(beta) => (-beta * rho).exp(),
            MeasureRule::RhoPow(alpha) => (1.0 + rho).powf(alpha),
            MeasureRule::Uniform { lo, hi, .. } => measure_rng
                .as_mut()
                .expect("seeded for uniform rule")
                .random_range(lo..=hi),
        };
        if !(mu > 0.0 && mu.is_finite()) {
            return Err(Error::input(format!(
                "measure rule gives mu = {mu} at vertex {id:?}"
            )));
        }
        builder.set_measure(id, mu)?;
    }
    builder.build()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit(kind: &str) -> WeightedGraph {
        generate_graph(kind.parse().unwrap(), WeightRule::Const(1.0), MeasureRule::Const(1.0)).unwrap()
    }

    #[test]
    fn sizes() {
        let p = unit("path:3");
        assert_eq!((p.vertex_count(), p.edge_count()), (3, 2));
        assert_eq!(p.ids(), &["0", "1", "2"]);
        let g = unit("grid:5x5");
        assert_eq!((g.vertex_count(), g.edge_count()), (25, 40));
        let t = unit("tree:2:3");
        assert_eq!((t.vertex_count(), t.edge_count()), (15, 14));
        assert_eq!(unit("path:11").id(0), "00");
    }

    #[test]
    fn first_vertex_is_origin() {
        let t = generate_graph(
            "tree:2:4".parse().unwrap(),
            WeightRule::Const(1.0),
            MeasureRule::ExpRho(1.0),
        )
        .unwrap();
        assert_eq!(t.measure(0), 1.0);
        let d = t.distances_from(0);
        for x in 0..t.vertex_count() {
            assert_eq!(t.measure(x), (-(d[x] as f64)).exp());
        }
    }

    #[test]
    fn rules_parse_and_reject() {
        assert!("path:0".parse::<GraphKind>().is_err());
        assert!("ring:4".parse::<GraphKind>().is_err());
        assert_eq!(
            "uniform:0.5:2:7".parse::<MeasureRule>().unwrap(),
            MeasureRule::Uniform {
                lo: 0.5,
                hi: 2.0,
                seed: 7
            }
        );
        assert!(generate_graph(
            "path:3".parse().unwrap(),
            WeightRule::Const(1.0),
            MeasureRule::Const(0.0)
        )
        .is_err());
    }

    #[test]
    fn uniform_weights_are_seeded() {
        let rule: WeightRule = "uniform:0.5:2:11".parse().unwrap();
        let a = generate_graph("grid:3x4".parse().unwrap(), rule, MeasureRule::Const(1.0)).unwrap();
        let b = generate_graph("grid:3x4".parse().unwrap(), rule, MeasureRule::Const(1.0)).unwrap();
        assert_eq!(a.edges(), b.edges());
        assert!(a.edges().iter().all(|e| (0.5..=2.0).contains(&e.2)));
    }
}
