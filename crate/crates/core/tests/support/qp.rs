//! Shared by the classifier tests and the acceptance suite.
#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rcfp::classifier::{train_binary, SvmParams};

/// Log-barrier interior-point method on `min 1/2 a'Qa - e'a` subject to
/// `y'a = 0, 0 <= a <= c`; returns the maximized dual objective. Each Newton
/// step solves the bordered system `[H y; y' 0]`.
pub fn qp_oracle(kernel: &[Vec<f64>], y: &[f64], c: f64) -> f64 {
    let n = y.len();
    let q = DMatrix::from_fn(n, n, |i, j| y[i] * y[j] * kernel[i][j]);
    let f = |a: &DVector<f64>| 0.5 * a.dot(&(&q * a)) - a.sum();
    let pos = y.iter().filter(|&&t| t > 0.0).count() as f64;
    let neg = n as f64 - pos;
    let mut a = DVector::from_fn(n, |i, _| 0.5 * c * pos.min(neg) / if y[i] > 0.0 { pos } else { neg });
    let barrier = |a: &DVector<f64>, t: f64| -> f64 { t * f(a) - a.iter().map(|v| v.ln() + (c - v).ln()).sum::<f64>() };
    let mut t = 1.0;
    while 2.0 * n as f64 / t > 1e-11 * c.max(1.0) {
        for _ in 0..200 {
            let grad = (&q * &a).add_scalar(-1.0) * t - DVector::from_fn(n, |i, _| 1.0 / a[i] - 1.0 / (c - a[i]));
            let mut kkt = DMatrix::zeros(n + 1, n + 1);
            kkt.view_mut((0, 0), (n, n)).copy_from(&(&q * t));
            for i in 0..n {
                kkt[(i, i)] += 1.0 / (a[i] * a[i]) + 1.0 / ((c - a[i]) * (c - a[i]));
                kkt[(i, n)] = y[i];
                kkt[(n, i)] = y[i];
            }
            let mut rhs = DVector::zeros(n + 1);
            rhs.rows_mut(0, n).copy_from(&(-&grad));
            let sol = kkt.lu().solve(&rhs).expect("nonsingular KKT system");
            let step = sol.rows(0, n).into_owned();
            let decrement = -grad.dot(&step);
            if decrement < 1e-14 {
                break;
            }
            let mut s = 1.0;
            while (0..n).any(|i| a[i] + s * step[i] <= 0.0 || a[i] + s * step[i] >= c) {
                s *= 0.5;
            }
            let current = barrier(&a, t);
            while barrier(&(&a + &step * s), t) > current - 0.25 * s * decrement && s > 1e-20 {
                s *= 0.5;
            }
            a += &step * s;
        }
        t *= 10.0;
    }
    -f(&a)
}

pub fn random_problem(rng: &mut ChaCha8Rng) -> (Vec<Vec<f64>>, Vec<f64>, SvmParams) {
    let n = rng.random_range(4..=12);
    let dim = rng.random_range(1..=4);
    let x: Vec<Vec<f64>> = (0..n)
        .map(|_| (0..dim).map(|_| rng.random_range(-2.0..2.0)).collect())
        .collect();
    let mut y: Vec<f64> = (0..n).map(|_| if rng.random::<bool>() { 1.0 } else { -1.0 }).collect();
    y[0] = 1.0;
    y[1] = -1.0;
    let c = [0.1, 1.0, 10.0, 100.0][rng.random_range(0..4)];
    let gamma = [0.1, 0.5, 1.0, 4.0][rng.random_range(0..4)];
    (x, y, SvmParams::new(c, gamma))
}

/// Checks the box, the equality constraint and the margin conditions of a
/// trained binary model against its own training set.
pub fn kkt_check(x: &[Vec<f64>], y: &[f64], params: &SvmParams) -> Result<(), String> {
    let model = train_binary(x, y, params).map_err(|e| e.to_string())?;
    let tol = params.kkt_tolerance;
    let c = params.c;
    let sum: f64 = model.dual_coef.iter().sum();
    if sum.abs() >= 1e-9 * c.max(1.0) {
        return Err(format!("sum alpha*y = {sum}"));
    }
    for (xi, &yi) in x.iter().zip(y) {
        let yf = yi * model.decision_value(xi).map_err(|e| e.to_string())?;
        let alpha = model
            .support_vectors
            .iter()
            .position(|sv| sv == xi)
            .map_or(0.0, |p| model.dual_coef[p] * yi);
        if !(alpha >= 0.0 && alpha <= c + 1e-12) {
            return Err(format!("alpha {alpha} outside [0, {c}]"));
        }
        if alpha == 0.0 && yf < 1.0 - tol {
            return Err(format!("alpha=0 but y*f={yf}"));
        }
        if alpha >= c && alpha != 0.0 && yf > 1.0 + tol {
            return Err(format!("alpha=C but y*f={yf}"));
        }
        if alpha > 0.0 && alpha < c && (yf - 1.0).abs() > tol {
            return Err(format!("free alpha but y*f={yf}"));
        }
    }
    Ok(())
}
