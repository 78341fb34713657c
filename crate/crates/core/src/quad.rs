//! Adaptive Gauss–Legendre quadrature on (0,1), the semi-axis (via the
//! rational map t = u/(1−u)) and iterated products over R_+^d.

use std::sync::OnceLock;

use crate::error::{Error, Result};

const NODES: usize = 20;

/// Gauss–Legendre nodes/weights on [-1, 1], computed by Newton iteration on
/// P_n with the usual Chebyshev-based initial guesses.
fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = (n + 1) / 2;
    for i in 0..m {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            // recurrence for P_n(x) and P'_n(x)
            let mut p0 = 1.0;
            let mut p1 = x;
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

fn gl20() -> &'static (Vec<f64>, Vec<f64>) {
    static CACHE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    CACHE.get_or_init(|| gauss_legendre(NODES))
}

fn panel<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> f64 {
    let (x, w) = gl20();
    let c = 0.5 * (a + b);
    let hl = 0.5 * (b - a);
    let mut s = 0.0;
    for i in 0..NODES {
        s += w[i] * f(c + hl * x[i]);
    }
    s * hl
}

/// ∫_a^b f, bisecting panels until the GL20 refinement error of every panel
/// drops below abs_tol scaled by its share of the interval.
fn adaptive<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, abs_tol: f64) -> Result<f64> {
    struct Seg {
        a: f64,
        b: f64,
        whole: f64,
        depth: u32,
    }
    const MAX_DEPTH: u32 = 48;
    let mut stack = vec![Seg {
        a,
        b,
        whole: panel(f, a, b),
        depth: 0,
    }];
    let mut total = 0.0;
    let len = b - a;
    while let Some(seg) = stack.pop() {
        let mid = 0.5 * (seg.a + seg.b);
        let left = panel(f, seg.a, mid);
        let right = panel(f, mid, seg.b);
        let refined = left + right;
        let err = (refined - seg.whole).abs();
        if err <= abs_tol * (seg.b - seg.a) / len || (seg.b - seg.a) < 1e-14 * len {
            total += refined;
        } else if seg.depth >= MAX_DEPTH {
            return Err(Error::QuadratureNonConvergent { err_est: err });
        } else {
            stack.push(Seg {
                a: seg.a,
                b: mid,
                whole: left,
                depth: seg.depth + 1,
            });
            stack.push(Seg {
                a: mid,
                b: seg.b,
                whole: right,
                depth: seg.depth + 1,
            });
        }
    }
    Ok(total)
}

/// ∫_0^1 f with relative tolerance `rel_tol` against the coarse estimate.
pub fn integrate_01<F: Fn(f64) -> f64>(f: F, rel_tol: f64) -> Result<f64> {
    let coarse = panel(&f, 0.0, 1.0).abs().max(1e-300);
    adaptive(&f, 0.0, 1.0, rel_tol * coarse)
}

/// ∫_0^∞ f(t) dt via t = u/(1−u), dt = du/(1−u)².
pub fn integrate_semi_axis<F: Fn(f64) -> f64>(f: F, rel_tol: f64) -> Result<f64> {
    integrate_01(
        move |u| {
            if u >= 1.0 {
                return 0.0;
            }
            let s = 1.0 - u;
            let v = f(u / s) / (s * s);
            if v.is_finite() {
                v
            } else {
                0.0
            }
        },
        rel_tol,
    )
}

/// ∫_{R_+^d} f(t) dt by iterated semi-axis quadrature over the last
/// coordinate; inner integrals are evaluated one decimal digit tighter.
pub fn integrate_rplus<F>(dim: usize, f: &F, rel_tol: f64) -> Result<f64>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    let mut point = vec![0.0; dim];
    iterate_axis(dim, 0, &mut point, f, rel_tol)
}

fn iterate_axis<F>(dim: usize, axis: usize, point: &mut Vec<f64>, f: &F, rel_tol: f64) -> Result<f64>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    if axis + 1 == dim {
        let base = point.clone();
        return integrate_semi_axis(
            move |t| {
                let mut p = base.clone();
                p[axis] = t;
                f(&p)
            },
            rel_tol,
        );
    }
    let base = point.clone();
    let inner_tol = rel_tol * 0.1;
    integrate_semi_axis(
        move |t| {
            let mut p = base.clone();
            p[axis] = t;
            iterate_axis(dim, axis + 1, &mut p, f, inner_tol).unwrap_or(f64::NAN)
        },
        rel_tol,
    )
    .and_then(|v| {
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::QuadratureNonConvergent { err_est: f64::NAN })
        }
    })
}
