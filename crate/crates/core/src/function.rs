use crate::graph::Ball;

/// Where a [`VertexFunction`] is meant to live.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Domain {
    Whole,
    BallInterior { center: usize, radius: usize },
}

/// A real function on the vertices of a graph, stored densely.
///
/// Functions tied to a ball are zero-extended: every vertex outside the
/// support holds exactly `0.0`.
#[derive(Debug, Clone, PartialEq)]
pub struct VertexFunction {
    values: Vec<f64>,
    domain: Domain,
}

impl VertexFunction {
    pub fn from_values(values: Vec<f64>) -> Self {
        VertexFunction {
            values,
            domain: Domain::Whole,
        }
    }

    pub(crate) fn on_ball(values: Vec<f64>, ball: &Ball) -> Self {
        VertexFunction {
            values,
            domain: Domain::BallInterior {
                center: ball.center(),
                radius: ball.radius(),
            },
        }
    }

    pub fn zeros(n: usize) -> Self {
        Self::from_values(vec![0.0; n])
    }

    pub fn constant(n: usize, c: f64) -> Self {
        Self::from_values(vec![c; n])
    }

    /// The indicator of a single vertex.
    pub fn dirac(n: usize, x: usize) -> Self {
        let mut v = vec![0.0; n];
        v[x] = 1.0;
        Self::from_values(v)
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Value at `x`; vertices beyond the stored range read as zero.
    pub fn value(&self, x: usize) -> f64 {
        self.values.get(x).copied().unwrap_or(0.0)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        VertexFunction {
            values: self.values.iter().map(|&v| f(v)).collect(),
            domain: self.domain,
        }
    }

    pub fn scaled(&self, s: f64) -> Self {
        self.map(|v| s * v)
    }

    /// Pointwise sum. Both operands must live on the same graph.
    pub fn add(&self, other: &VertexFunction) -> Self {
        assert_eq!(self.len(), other.len());
        let domain = if self.domain == other.domain {
            self.domain
        } else {
            Domain::Whole
        };
        VertexFunction {
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a + b)
                .collect(),
            domain,
        }
    }

    /// Keeps the values on `keep` and zeroes the rest.
    pub fn restricted(&self, keep: &[usize]) -> Self {
        let mut values = vec![0.0; self.values.len()];
        for &x in keep {
            values[x] = self.values[x];
        }
        VertexFunction::from_values(values)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min_on(&self, set: &[usize]) -> f64 {
        set.iter().map(|&x| self.values[x]).fold(f64::INFINITY, f64::min)
    }

    pub fn max_on(&self, set: &[usize]) -> f64 {
        set.iter()
            .map(|&x| self.values[x])
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|&v| v == 0.0)
    }
}
