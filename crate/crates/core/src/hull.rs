//! Convex-hull membership for the finiteness condition on exponent vectors:
//! the shifted exponent k + ½·1 must lie in the interior of the hull of
//! {r⁰, …, r^m}. Dimensions here are tiny (d ≤ 4, m ≤ 4), so membership is
//! decided by enumerating Carathéodory vertex subsets and solving the
//! barycentric system directly.

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HullStatus {
    Interior,
    Boundary,
    Outside,
}

/// Certificate for membership of a target point in conv{r⁰, …, r^m}.
#[derive(Clone, Debug)]
pub struct HullCertificate {
    pub status: HullStatus,
    /// Barycentric coefficients over the full vertex list (zeros for
    /// vertices outside the witnessing subset); present unless Outside.
    pub coefficients: Option<Vec<f64>>,
    /// Dimension of the affine span of the vertices; a hull of affine rank
    /// below the ambient dimension has empty interior.
    pub affine_rank: usize,
}

const RESIDUAL_TOL: f64 = 1e-10;
const COEF_TOL: f64 = 1e-12;

/// Dense Gaussian elimination with partial pivoting; returns None when the
/// system is numerically singular.
fn solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col].abs() < 1e-13 {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for row in col + 1..n {
            let f = a[row][col] / a[col][col];
            for k in col..n {
                a[row][k] -= f * a[col][k];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for col in (0..n).rev() {
        let mut s = b[col];
        for k in col + 1..n {
            s -= a[col][k] * x[k];
        }
        x[col] = s / a[col][col];
    }
    Some(x)
}

/// Least-squares barycentric coefficients for `target` over `verts`
/// (subset of vertices), via the normal equations of the (d+1)-row system
/// [r ; 1] λ = [target ; 1]. Returns (coefficients, residual).
fn barycentric(verts: &[&[f64]], target: &[f64]) -> Option<(Vec<f64>, f64)> {
    let d = target.len();
    let s = verts.len();
    let rows = d + 1;
    // A column j = (verts[j], 1)
    let col = |j: usize, row: usize| if row < d { verts[j][row] } else { 1.0 };
    let mut ata = vec![vec![0.0; s]; s];
    let mut atb = vec![0.0; s];
    for i in 0..s {
        for j in 0..s {
            let mut v = 0.0;
            for row in 0..rows {
                v += col(i, row) * col(j, row);
            }
            ata[i][j] = v;
        }
        let mut v = 0.0;
        for row in 0..rows {
            let b = if row < d { target[row] } else { 1.0 };
            v += col(i, row) * b;
        }
        atb[i] = v;
    }
    let lam = solve(ata, atb)?;
    let mut res = 0.0f64;
    for row in 0..rows {
        let b = if row < d { target[row] } else { 1.0 };
        let mut v = -b;
        for j in 0..s {
            v += col(j, row) * lam[j];
        }
        res += v * v;
    }
    Some((lam, res.sqrt()))
}

fn subsets(n: usize, max_size: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    for mask in 1u32..(1 << n) {
        let size = mask.count_ones() as usize;
        if size <= max_size {
            out.push((0..n).filter(|i| mask >> i & 1 == 1).collect());
        }
    }
    out.sort_by_key(|s: &Vec<usize>| s.len());
    out
}

/// True iff `target` admits a nonnegative barycentric representation.
fn in_hull(target: &[f64], r_list: &[Vec<f64>]) -> Option<Vec<f64>> {
    let d = target.len();
    let scale = r_list
        .iter()
        .flat_map(|r| r.iter().map(|v| v.abs()))
        .fold(1.0f64, f64::max);
    for idx in subsets(r_list.len(), d + 1) {
        let verts: Vec<&[f64]> = idx.iter().map(|&i| r_list[i].as_slice()).collect();
        if let Some((lam, res)) = barycentric(&verts, target) {
            if res <= RESIDUAL_TOL * scale && lam.iter().all(|&l| l >= -COEF_TOL) {
                let mut full = vec![0.0; r_list.len()];
                for (slot, &i) in idx.iter().enumerate() {
                    full[i] = lam[slot].max(0.0);
                }
                let sum: f64 = full.iter().sum();
                for v in &mut full {
                    *v /= sum;
                }
                return Some(full);
            }
        }
    }
    None
}

fn affine_rank(r_list: &[Vec<f64>]) -> usize {
    let d = r_list[0].len();
    let mut rows: Vec<Vec<f64>> = r_list[1..]
        .iter()
        .map(|r| r.iter().zip(&r_list[0]).map(|(a, b)| a - b).collect())
        .collect();
    let mut rank = 0;
    for col in 0..d {
        let Some(piv) = (rank..rows.len()).max_by(|&i, &j| rows[i][col].abs().total_cmp(&rows[j][col].abs()))
        else {
            break;
        };
        if rows[piv][col].abs() < 1e-10 {
            continue;
        }
        rows.swap(rank, piv);
        for row in rank + 1..rows.len() {
            let f = rows[row][col] / rows[rank][col];
            for k in col..d {
                rows[row][k] -= f * rows[rank][k];
            }
        }
        rank += 1;
    }
    rank
}

/// Decides where `target` sits relative to conv{r_list}. Geometric
/// interior is tested by hull membership of an ε-ball of axis perturbations
/// for shrinking ε, so hulls of deficient affine rank are always Boundary
/// (never Interior), which is what the finiteness condition needs.
pub fn hull_membership(target: &[f64], r_list: &[Vec<f64>]) -> Result<HullCertificate> {
    let d = target.len();
    if r_list.is_empty() || r_list.iter().any(|r| r.len() != d) {
        return Err(Error::InvalidArgument(
            "hull vertices must be nonempty and match the target dimension".into(),
        ));
    }
    let rank = affine_rank(r_list);
    let Some(coefficients) = in_hull(target, r_list) else {
        return Ok(HullCertificate {
            status: HullStatus::Outside,
            coefficients: None,
            affine_rank: rank,
        });
    };
    let interior = rank == d
        && [1e-4, 1e-6, 1e-8].iter().any(|&eps| {
            (0..d).all(|axis| {
                [eps, -eps].iter().all(|&delta| {
                    let mut p = target.to_vec();
                    p[axis] += delta;
                    in_hull(&p, r_list).is_some()
                })
            })
        });
    Ok(HullCertificate {
        status: if interior {
            HullStatus::Interior
        } else {
            HullStatus::Boundary
        },
        coefficients: Some(coefficients),
        affine_rank: rank,
    })
}
