//! Binary soft-margin C-SVM with an RBF kernel, trained by SMO.
//!
//! The dual is solved in the form
//!
//! ```text
//! min  1/2 a'Qa - e'a   s.t.  y'a = 0,  0 <= a_i <= C,   Q_ij = y_i y_j K(x_i, x_j)
//! ```
//!
//! Each step picks the maximal violating pair `(i, j)` from the gradient and
//! solves the two-variable subproblem in closed form, clipped to the box.

use serde::{Deserialize, Serialize};

use super::{sq_dist, SvmError};

const TAU: f64 = 1e-12;
/// A pair update moving the multipliers by less than this counts as a stall.
const STALL_STEP: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SvmParams {
    pub c: f64,
    pub gamma: f64,
    pub kkt_tolerance: f64,
    /// Stop after `max_passes * n` consecutive pair updates without progress.
    pub max_passes: usize,
}

impl Default for SvmParams {
    fn default() -> Self {
        Self {
            c: 1.0,
            gamma: 1.0,
            kkt_tolerance: 1e-3,
            max_passes: 10,
        }
    }
}

impl SvmParams {
    pub fn new(c: f64, gamma: f64) -> Self {
        Self {
            c,
            gamma,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<(), SvmError> {
        let ok = |v: f64| v.is_finite() && v > 0.0;
        if !ok(self.c) || !ok(self.gamma) || !ok(self.kkt_tolerance) || self.max_passes == 0 {
            return Err(SvmError::InvalidParams(*self));
        }
        Ok(())
    }
}

/// Full solver state at termination.
#[derive(Debug, Clone, PartialEq)]
pub struct DualSolution {
    pub alpha: Vec<f64>,
    /// Gradient of the minimized objective, `Q a - e`.
    pub gradient: Vec<f64>,
    pub bias: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Final maximal KKT violation `m(a) - M(a)`.
    pub gap: f64,
}

impl DualSolution {
    /// Dual objective `sum a - 1/2 a'Qa` (to be maximized).
    pub fn objective(&self) -> f64 {
        // G = Qa - e  =>  a'Qa = a'(G + e)
        let quad: f64 = self.alpha.iter().zip(&self.gradient).map(|(a, g)| a * (g + 1.0)).sum();
        self.alpha.iter().sum::<f64>() - 0.5 * quad
    }
}

/// Dual objective evaluated from scratch on a kernel matrix.
pub fn dual_objective(kernel: &[Vec<f64>], targets: &[f64], alpha: &[f64]) -> f64 {
    let n = alpha.len();
    let mut quad = 0.0;
    for i in 0..n {
        for j in 0..n {
            quad += alpha[i] * alpha[j] * targets[i] * targets[j] * kernel[i][j];
        }
    }
    alpha.iter().sum::<f64>() - 0.5 * quad
}

/// Solves the dual for a precomputed kernel matrix and `±1` targets.
pub fn solve_dual(kernel: &[Vec<f64>], targets: &[f64], params: &SvmParams) -> Result<DualSolution, SvmError> {
    params.validate()?;
    let n = targets.len();
    if kernel.len() != n || kernel.iter().any(|r| r.len() != n) {
        return Err(SvmError::DimensionMismatch {
            expected: n,
            found: kernel.len(),
        });
    }
    if !targets.iter().any(|&y| y > 0.0) || !targets.iter().any(|&y| y < 0.0) {
        return Err(SvmError::SingleClass);
    }
    let c = params.c;
    let y = targets;
    let mut alpha = vec![0.0; n];
    let mut grad = vec![-1.0; n];
    let stall_limit = params.max_passes * n;
    let hard_limit = 1_000_000usize.max(100 * n * n);

    let in_up = |a: f64, y: f64| (y > 0.0 && a < c) || (y < 0.0 && a > 0.0);
    let in_low = |a: f64, y: f64| (y > 0.0 && a > 0.0) || (y < 0.0 && a < c);

    let mut iterations = 0;
    let mut stalls = 0;
    let mut converged = false;
    let mut gap;
    loop {
        let mut i = usize::MAX;
        let mut j = usize::MAX;
        let mut m = f64::NEG_INFINITY;
        let mut big_m = f64::INFINITY;
        for t in 0..n {
            let v = -y[t] * grad[t];
            if in_up(alpha[t], y[t]) && v > m {
                m = v;
                i = t;
            }
            if in_low(alpha[t], y[t]) && v < big_m {
                big_m = v;
                j = t;
            }
        }
        gap = m - big_m;
        if i == usize::MAX || j == usize::MAX || gap < params.kkt_tolerance {
            converged = true;
            break;
        }
        if stalls >= stall_limit || iterations >= hard_limit {
            break;
        }
        iterations += 1;

        let (old_i, old_j) = (alpha[i], alpha[j]);
        let kij = kernel[i][j];
        if y[i] != y[j] {
            let quad = (kernel[i][i] + kernel[j][j] - 2.0 * kij).max(TAU);
            let delta = (-grad[i] - grad[j]) / quad;
            let diff = alpha[i] - alpha[j];
            alpha[i] += delta;
            alpha[j] += delta;
            if diff > 0.0 {
                if alpha[j] < 0.0 {
                    alpha[j] = 0.0;
                    alpha[i] = diff;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = -diff;
            }
            if diff > 0.0 {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = c - diff;
                }
            } else if alpha[j] > c {
                alpha[j] = c;
                alpha[i] = c + diff;
            }
        } else {
            let quad = (kernel[i][i] + kernel[j][j] - 2.0 * kij).max(TAU);
            let delta = (grad[i] - grad[j]) / quad;
            let sum = alpha[i] + alpha[j];
            alpha[i] -= delta;
            alpha[j] += delta;
            if sum > c {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = sum - c;
                }
            } else if alpha[j] < 0.0 {
                alpha[j] = 0.0;
                alpha[i] = sum;
            }
            if sum > c {
                if alpha[j] > c {
                    alpha[j] = c;
                    alpha[i] = sum - c;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = sum;
            }
        }

        let (di, dj) = (alpha[i] - old_i, alpha[j] - old_j);
        if di.abs() + dj.abs() < STALL_STEP {
            stalls += 1;
        } else {
            stalls = 0;
        }
        for t in 0..n {
            grad[t] += y[t] * (y[i] * kernel[t][i] * di + y[j] * kernel[t][j] * dj);
        }
    }

    let bias = bias_from_gradient(&alpha, &grad, y, c);
    Ok(DualSolution {
        alpha,
        gradient: grad,
        bias,
        iterations,
        converged,
        gap,
    })
}

/// Average of `-y_t G_t` over free multipliers; midpoint of the feasible
/// interval when every multiplier is at a bound.
fn bias_from_gradient(alpha: &[f64], grad: &[f64], y: &[f64], c: f64) -> f64 {
    let mut free_sum = 0.0;
    let mut free = 0usize;
    let mut upper = f64::INFINITY;
    let mut lower = f64::NEG_INFINITY;
    for t in 0..alpha.len() {
        let v = -y[t] * grad[t];
        if alpha[t] > 0.0 && alpha[t] < c {
            free_sum += v;
            free += 1;
        } else {
            let at_upper_side = (alpha[t] >= c && y[t] < 0.0) || (alpha[t] <= 0.0 && y[t] > 0.0);
            if at_upper_side {
                // t is only in I_up: b >= v
                lower = lower.max(v);
            } else {
                upper = upper.min(v);
            }
        }
    }
    if free > 0 {
        free_sum / free as f64
    } else if lower.is_finite() && upper.is_finite() {
        0.5 * (lower + upper)
    } else if lower.is_finite() {
        lower
    } else {
        upper
    }
}

/// A trained binary classifier; positive decision values mean target `+1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinarySvmModel {
    pub support_vectors: Vec<Vec<f64>>,
    /// `alpha_i * y_i` per support vector.
    pub dual_coef: Vec<f64>,
    pub bias: f64,
    pub params: SvmParams,
    pub iterations: usize,
    pub converged: bool,
}

impl BinarySvmModel {
    pub fn dim(&self) -> usize {
        self.support_vectors.first().map_or(0, Vec::len)
    }

    pub fn decision_value(&self, input: &[f64]) -> Result<f64, SvmError> {
        if !self.support_vectors.is_empty() && input.len() != self.dim() {
            return Err(SvmError::DimensionMismatch {
                expected: self.dim(),
                found: input.len(),
            });
        }
        Ok(self.decision_unchecked(input))
    }

    pub(crate) fn decision_unchecked(&self, input: &[f64]) -> f64 {
        let gamma = self.params.gamma;
        self.support_vectors
            .iter()
            .zip(&self.dual_coef)
            .map(|(sv, coef)| coef * (-gamma * sq_dist(sv, input)).exp())
            .sum::<f64>()
            + self.bias
    }

    /// `+1` or `-1`; a zero decision value maps to `+1`.
    pub fn predict(&self, input: &[f64]) -> Result<f64, SvmError> {
        Ok(if self.decision_value(input)? >= 0.0 { 1.0 } else { -1.0 })
    }
}

pub fn kernel_matrix(inputs: &[Vec<f64>], gamma: f64) -> Vec<Vec<f64>> {
    let n = inputs.len();
    let mut k = vec![vec![0.0; n]; n];
    for i in 0..n {
        k[i][i] = 1.0;
        for j in 0..i {
            let v = (-gamma * sq_dist(&inputs[i], &inputs[j])).exp();
            k[i][j] = v;
            k[j][i] = v;
        }
    }
    k
}

pub fn train_binary(inputs: &[Vec<f64>], targets: &[f64], params: &SvmParams) -> Result<BinarySvmModel, SvmError> {
    if inputs.len() != targets.len() {
        return Err(SvmError::DimensionMismatch {
            expected: inputs.len(),
            found: targets.len(),
        });
    }
    if let Some(first) = inputs.first() {
        if let Some(bad) = inputs.iter().find(|x| x.len() != first.len()) {
            return Err(SvmError::DimensionMismatch {
                expected: first.len(),
                found: bad.len(),
            });
        }
    }
    if let Some(t) = targets.iter().find(|t| **t != 1.0 && **t != -1.0) {
        return Err(SvmError::BadTarget(*t));
    }
    params.validate()?;
    let kernel = kernel_matrix(inputs, params.gamma);
    let sol = solve_dual(&kernel, targets, params)?;
    if !sol.converged {
        log::warn!(
            "SMO stopped after {} iterations with KKT gap {:.3e}",
            sol.iterations,
            sol.gap
        );
    }
    let mut support_vectors = Vec::new();
    let mut dual_coef = Vec::new();
    for ((x, a), y) in inputs.iter().zip(&sol.alpha).zip(targets) {
        if *a > 0.0 {
            support_vectors.push(x.clone());
            dual_coef.push(a * y);
        }
    }
    Ok(BinarySvmModel {
        support_vectors,
        dual_coef,
        bias: sol.bias,
        params: *params,
        iterations: sol.iterations,
        converged: sol.converged,
    })
}
