//! Adaptive Gauss-Kronrod quadrature and series-acceleration helpers.

use std::collections::BinaryHeap;

use crate::error::{Result, TlfError};

// 15-point Kronrod abscissae (positive half) and weights, 7-point Gauss
// weights; the classic QUADPACK dqk15 constants.
const XGK: [f64; 8] = [
    0.991455371120813,
    0.949107912342759,
    0.864864423359769,
    0.741531185599394,
    0.586087235467691,
    0.405845151377397,
    0.207784955007898,
    0.000000000000000,
];
const WGK: [f64; 8] = [
    0.022935322010529,
    0.063092092629979,
    0.104790010322250,
    0.140653259715525,
    0.169004726639267,
    0.190350578064785,
    0.204432940075298,
    0.209482141084728,
];
const WG: [f64; 4] = [
    0.129484966168870,
    0.279705391489277,
    0.381830050505119,
    0.417959183673469,
];

/// Result of a quadrature: value and an error estimate.
#[derive(Debug, Clone, Copy)]
pub struct QuadResult {
    pub value: f64,
    pub abs_error: f64,
}

/// One Gauss-Kronrod 15 panel on [a, b].
pub fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> QuadResult {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let f_center = f(center);

    let mut res_gauss = WG[3] * f_center;
    let mut res_kronrod = WGK[7] * f_center;
    let mut res_abs = res_kronrod.abs();

    let mut fv = [0.0_f64; 15];
    fv[7] = f_center;

    for j in 0..7 {
        let x = half * XGK[j];
        let f1 = f(center - x);
        let f2 = f(center + x);
        fv[j] = f1;
        fv[14 - j] = f2;
        let fsum = f1 + f2;
        res_kronrod += WGK[j] * fsum;
        res_abs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            res_gauss += WG[j / 2] * fsum;
        }
    }

    let mean = res_kronrod * 0.5;
    let mut res_asc = WGK[7] * (f_center - mean).abs();
    for j in 0..7 {
        res_asc += WGK[j] * ((fv[j] - mean).abs() + (fv[14 - j] - mean).abs());
    }

    let err = ((res_kronrod - res_gauss) * half).abs();
    let res_abs = res_abs * half.abs();
    let res_asc = res_asc * half.abs();

    let mut scaled = err;
    if res_asc != 0.0 && err != 0.0 {
        let scale = (200.0 * err / res_asc).powf(1.5);
        scaled = if scale < 1.0 { res_asc * scale } else { res_asc };
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        scaled = scaled.max(50.0 * f64::EPSILON * res_abs);
    }

    QuadResult {
        value: res_kronrod * half,
        abs_error: scaled,
    }
}

struct Interval {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Interval {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Interval {}
impl PartialOrd for Interval {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Interval {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.error.total_cmp(&other.error)
    }
}

/// Adaptive bisection GK15 over a finite interval.
///
/// Terminates when the summed error estimate drops below
/// `max(abs_tol, rel_tol * |integral|)`; errors out past `max_intervals`.
pub fn adaptive<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    rel_tol: f64,
    abs_tol: f64,
    max_intervals: usize,
) -> Result<QuadResult> {
    if a == b {
        return Ok(QuadResult {
            value: 0.0,
            abs_error: 0.0,
        });
    }
    let first = gk15(f, a, b);
    let mut heap = BinaryHeap::new();
    let mut total = first.value;
    let mut total_err = first.abs_error;
    heap.push(Interval {
        a,
        b,
        value: first.value,
        error: first.abs_error,
    });
    let mut count = 1usize;

    while total_err > abs_tol.max(rel_tol * total.abs()) {
        if count >= max_intervals {
            return Err(TlfError::QuadratureNonconvergence(format!(
                "interval budget {max_intervals} exhausted on [{a}, {b}]: \
                 estimate {total:e}, error {total_err:e}"
            )));
        }
        let worst = heap.pop().expect("heap drained before tolerance met");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // interval at floating point resolution; accept its estimate
            total_err = f64::max(total_err - worst.error, 0.0);
            continue;
        }
        let left = gk15(f, worst.a, mid);
        let right = gk15(f, mid, worst.b);
        total += left.value + right.value - worst.value;
        total_err += left.abs_error + right.abs_error - worst.error;
        heap.push(Interval {
            a: worst.a,
            b: mid,
            value: left.value,
            error: left.abs_error,
        });
        heap.push(Interval {
            a: mid,
            b: worst.b,
            value: right.value,
            error: right.abs_error,
        });
        count += 1;
    }

    Ok(QuadResult {
        value: total,
        abs_error: total_err,
    })
}

/// Estimate the full sum of an alternating series tail from its first
/// computed terms via the Euler transformation (iterated averaging of
/// partial sums). `terms` carry their signs and must alternate.
pub fn euler_alternating_tail(terms: &[f64]) -> f64 {
    if terms.is_empty() {
        return 0.0;
    }
    let mut s = Vec::with_capacity(terms.len());
    let mut acc = 0.0;
    for &t in terms {
        acc += t;
        s.push(acc);
    }
    while s.len() > 1 {
        for i in 0..s.len() - 1 {
            s[i] = 0.5 * (s[i] + s[i + 1]);
        }
        s.pop();
    }
    s[0]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_is_exact() {
        let r = gk15(&|x: f64| 3.0 * x * x, 0.0, 2.0);
        assert!((r.value - 8.0).abs() < 1e-13);
    }

    #[test]
    fn adaptive_handles_peaked_integrand() {
        // int_0^1 1/sqrt(x) dx = 2, integrable endpoint singularity
        let r = adaptive(&|x: f64| 1.0 / x.sqrt().max(1e-300), 1e-30, 1.0, 1e-10, 0.0, 20_000)
            .unwrap();
        assert!((r.value - 2.0).abs() < 1e-7, "got {}", r.value);
    }

    #[test]
    fn adaptive_exp_decay() {
        let r = adaptive(&|x: f64| (-x).exp(), 0.0, 60.0, 1e-12, 0.0, 2000).unwrap();
        assert!((r.value - 1.0).abs() < 1e-11);
    }

    #[test]
    fn adaptive_reports_budget_exhaustion() {
        let res = adaptive(&|x: f64| (1e6 * x).sin(), 0.0, 1.0, 1e-14, 0.0, 8);
        assert!(matches!(res, Err(TlfError::QuadratureNonconvergence(_))));
    }

    #[test]
    fn euler_sums_slow_alternating_series() {
        // ln 2 = sum (-1)^{k+1}/k, terribly slow directly
        let terms: Vec<f64> = (1..40)
            .map(|k| if k % 2 == 1 { 1.0 / k as f64 } else { -1.0 / k as f64 })
            .collect();
        let got = euler_alternating_tail(&terms);
        assert!((got - std::f64::consts::LN_2).abs() < 1e-12, "got {got}");
    }
}
