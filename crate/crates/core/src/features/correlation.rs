use crate::trace::Trace;

/// Pearson coefficient; `degenerate` when either input is constant (`r = 0`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Correlation {
    pub r: f64,
    pub degenerate: bool,
}

/// Pearson correlation with population moments, clamped to `[-1, 1]`.
///
/// Panics if the inputs differ in length or hold fewer than two samples.
pub fn pearson(x: &[f64], y: &[f64]) -> Correlation {
    assert_eq!(x.len(), y.len(), "pearson: length mismatch");
    assert!(x.len() >= 2, "pearson: need at least two samples");
    let constant = |v: &[f64]| v.iter().all(|&a| a == v[0]);
    if constant(x) || constant(y) {
        return Correlation {
            r: 0.0,
            degenerate: true,
        };
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (da, db) = (a - mx, b - my);
        sxy += da * db;
        sxx += da * da;
        syy += db * db;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Correlation {
            r: 0.0,
            degenerate: true,
        };
    }
    Correlation {
        r: (sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0),
        degenerate: false,
    }
}

/// Symmetric `n x n` Pearson matrix of a trace's metrics.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationMatrix {
    n: usize,
    values: Vec<f64>,
    degenerate: Vec<bool>,
}

impl CorrelationMatrix {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.n + j]
    }

    pub fn is_degenerate(&self, i: usize, j: usize) -> bool {
        self.degenerate[i * self.n + j]
    }

    /// Upper triangle (`i < j`) in row-major order.
    pub fn upper_triangle(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.n).flat_map(move |i| (i + 1..self.n).map(move |j| (i, j, self.get(i, j))))
    }
}

pub fn correlation_matrix(trace: &Trace) -> CorrelationMatrix {
    let n = trace.schema().len();
    let mut values = vec![0.0; n * n];
    let mut degenerate = vec![false; n * n];
    for i in 0..n {
        let xi = trace.metric(i).values();
        let own = xi.iter().all(|&v| v == xi[0]);
        values[i * n + i] = if own { 0.0 } else { 1.0 };
        degenerate[i * n + i] = own;
        for j in i + 1..n {
            let c = pearson(xi, trace.metric(j).values());
            values[i * n + j] = c.r;
            values[j * n + i] = c.r;
            degenerate[i * n + j] = c.degenerate;
            degenerate[j * n + i] = c.degenerate;
        }
    }
    CorrelationMatrix { n, values, degenerate }
}
