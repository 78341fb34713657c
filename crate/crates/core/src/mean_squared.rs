//! Mean-squared sharp constants: the Taikov-type sum constant, the HLP
//! sup constant under the orthogonal-image reduction, additive
//! coefficients, extremal elements and empirical no-violation scans.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::special::pow_weight;
use crate::spectral::{
    tilde_sum, tilde_sup, ExtendedSum, IndexSet, Membership, PowerWeights, SeriesSum,
    SpectralModel, TailPolicy, WeightVector,
};

/// Flattened 1-D power weights: both weights depend on |n| only, so the
/// two-sided lattice folds onto the positive integers (numerators carry
/// the requested multiplicity). This keeps the longest certified series
/// (~10^8 levels) inside a branch-light monomorphized loop.
struct FoldedPower {
    mult: f64,
    e_c: f64,
    rho: Option<f64>,
    /// (h_j, exponent of b_j) pairs.
    hb: Vec<(f64, f64)>,
}

impl FoldedPower {
    fn new(pw: &PowerWeights, hs: &[f64], mult: f64) -> Self {
        FoldedPower {
            mult: mult * pw.fold,
            e_c: pw.two_k[0],
            rho: pw.damping.as_ref().map(|d| d[0]),
            hb: hs.iter().zip(&pw.two_r).map(|(&h, r)| (h, r[0])).collect(),
        }
    }
}

/// Branch-free 1-D kernel for integer-order models: with y = n², the
/// numerator is mult·y^p (optionally damped) and the combined weight is a
/// polynomial in y. Covers orders 2k, 2r_j ∈ {0, 2, 4, 6, 8}, which is
/// every catalog torus/g-power model with integer derivative orders.
struct DenseFolded {
    mult: f64,
    num_pow: u32,
    rho: Option<f64>,
    den: [f64; 5],
}

fn dense_folded(pw: &PowerWeights, hs: &[f64], mult: f64) -> Option<DenseFolded> {
    let half_even = |e: f64| -> Option<usize> {
        ((0.0..=8.0).contains(&e) && e % 2.0 == 0.0).then(|| (e / 2.0) as usize)
    };
    let num_pow = half_even(pw.two_k[0])? as u32;
    let mut den = [0.0f64; 5];
    for (&h, r) in hs.iter().zip(&pw.two_r) {
        den[half_even(r[0])?] += h;
    }
    Some(DenseFolded {
        mult: mult * pw.fold,
        num_pow,
        rho: pw.damping.as_ref().map(|d| d[0]),
        den,
    })
}

/// Chunked direct evaluation for dense kernels with nonnegative
/// coefficients and a declared decay certificate. Nonnegative numerator and
/// a weight polynomial that is strictly positive on n >= 1 make every term
/// finite and nonnegative, so the per-point validity dispatch of the
/// generic walker is vacuous and the inner ratio loop can vectorize.
const DENSE_CHUNK: u64 = 1 << 16;

#[inline(always)]
fn dense_term(num: &[f64; 5], den: &[f64; 5], n: u64) -> f64 {
    let x = n as f64;
    let y = x * x;
    let mut a = num[4];
    let mut b = den[4];
    for i in (0..4).rev() {
        a = a * y + num[i];
        b = b * y + den[i];
    }
    a / b
}

fn dense_certified_sum(df: &DenseFolded, policy: &TailPolicy) -> Option<Result<SeriesSum>> {
    // dimension 1: level-N shells carry O(1) points, so the block decay
    // exponent equals the declared point decay
    let q = policy.decay?;
    if q <= 1.0 || df.rho.is_some() || !(df.mult > 0.0) {
        return None;
    }
    if df.den.iter().any(|&c| c < 0.0) || df.den.iter().all(|&c| c == 0.0) {
        return None;
    }
    let mut num = [0.0f64; 5];
    num[df.num_pow as usize] = df.mult;
    let den = df.den;
    let mut partial = 0.0f64;
    let mut comp = 0.0f64;
    let mut start = 1u64;
    while start <= policy.max_level {
        let end = policy.max_level.min(start + DENSE_CHUNK - 1);
        let mut sum = 0.0f64;
        for n in start..=end {
            sum += dense_term(&num, &den, n);
        }
        // compensated accumulation: chunks fall below partial * eps long
        // before the stopping rule fires
        let yk = sum - comp;
        let t = partial + yk;
        comp = (t - partial) - yk;
        partial = t;
        let block = dense_term(&num, &den, end);
        if end >= policy.min_levels && partial > 0.0 && block <= policy.rel_tol * partial {
            let tail = block * end as f64 / (q - 1.0);
            if tail <= policy.rel_tol * partial {
                return Some(Ok(SeriesSum {
                    value: ExtendedSum::Finite(partial),
                    tail_bound: tail,
                    levels: end,
                    converged: true,
                    certified: true,
                }));
            }
        }
        start = end + 1;
    }
    Some(Err(Error::NonConvergent {
        max_level: policy.max_level,
        tail_bound: f64::INFINITY,
    }))
}

#[inline(never)]
fn dense_tilde_sum(df: DenseFolded, policy: &TailPolicy) -> Result<SeriesSum> {
    let DenseFolded { mult, num_pow, rho, den } = df;
    tilde_sum(
        |n: &[i64]| {
            let x = n[0] as f64;
            let y = x * x;
            let mut a = mult;
            for _ in 0..num_pow {
                a *= y;
            }
            if let Some(r) = rho {
                a *= (-2.0 * r * x).exp();
            }
            a
        },
        |n: &[i64]| {
            let y = (n[0] as f64) * (n[0] as f64);
            let mut s = den[4];
            for i in (0..4).rev() {
                s = s * y + den[i];
            }
            s
        },
        &IndexSet::positive_integers(),
        policy,
    )
}

#[inline(never)]
fn dense_tilde_sup(df: DenseFolded, policy: &TailPolicy) -> Result<SeriesSum> {
    let DenseFolded { mult, num_pow, rho, den } = df;
    tilde_sup(
        |n: &[i64]| {
            let x = n[0] as f64;
            let y = x * x;
            let mut a = mult;
            for _ in 0..num_pow {
                a *= y;
            }
            if let Some(r) = rho {
                a *= (-2.0 * r * x).exp();
            }
            a
        },
        |n: &[i64]| {
            let y = (n[0] as f64) * (n[0] as f64);
            let mut s = den[4];
            for i in (0..4).rev() {
                s = s * y + den[i];
            }
            s
        },
        &IndexSet::positive_integers(),
        policy,
    )
}

/// Isolated instantiation with frame-local weights: the series kernel runs
/// ~10^8 iterations here, and loads through an escaped reference would not
/// be hoisted out of the loop.
#[inline(never)]
fn folded_tilde_sum(fp: FoldedPower, policy: &TailPolicy) -> Result<SeriesSum> {
    let FoldedPower { mult, e_c, rho, hb } = fp;
    tilde_sum(
        |n: &[i64]| {
            let x = n[0] as f64;
            let mut v = mult * pow_weight(x, e_c);
            if let Some(r) = rho {
                v *= (-2.0 * r * x).exp();
            }
            v
        },
        |n: &[i64]| {
            let x = n[0] as f64;
            let mut s = 0.0;
            for &(h, e) in &hb {
                s += h * pow_weight(x, e);
            }
            s
        },
        &IndexSet::positive_integers(),
        policy,
    )
}

#[inline(never)]
fn folded_tilde_sup(fp: FoldedPower, policy: &TailPolicy) -> Result<SeriesSum> {
    let FoldedPower { mult, e_c, rho, hb } = fp;
    tilde_sup(
        |n: &[i64]| {
            let x = n[0] as f64;
            let mut v = mult * pow_weight(x, e_c);
            if let Some(r) = rho {
                v *= (-2.0 * r * x).exp();
            }
            v
        },
        |n: &[i64]| {
            let x = n[0] as f64;
            let mut s = 0.0;
            for &(h, e) in &hb {
                s += h * pow_weight(x, e);
            }
            s
        },
        &IndexSet::positive_integers(),
        policy,
    )
}

fn folded_dim1(model: &SpectralModel) -> Option<&PowerWeights> {
    match (model.power_weights(), model.index_set().membership()) {
        (Some(pw), Membership::Lattice { dim: 1 }) => Some(pw),
        _ => None,
    }
}

fn check_h(model: &SpectralModel, h: &WeightVector) -> Result<()> {
    if h.len() != model.m() + 1 {
        return Err(Error::InvalidWeightVector {
            expected: model.m() + 1,
            got: h.as_slice().to_vec(),
        });
    }
    Ok(())
}

/// K² = tilde-sum of c(n)/b_{n,h}; the sharp mean-squared constant is √K².
pub fn taikov_constant(
    model: &SpectralModel,
    h: &WeightVector,
    policy: &TailPolicy,
) -> Result<SeriesSum> {
    check_h(model, h)?;
    let hs = h.as_slice();
    if let Some(pw) = folded_dim1(model) {
        // each level {n, -n} carries two equal terms
        if let Some(df) = dense_folded(pw, hs, 2.0) {
            if let Some(r) = dense_certified_sum(&df, policy) {
                return r;
            }
            return dense_tilde_sum(df, policy);
        }
        return folded_tilde_sum(FoldedPower::new(pw, hs, 2.0), policy);
    }
    if let Some(pw) = model.power_weights() {
        return tilde_sum(
            |n: &[i64]| pw.c(n),
            |n: &[i64]| pw.combined(hs, n),
            model.index_set(),
            policy,
        );
    }
    tilde_sum(
        |n: &[i64]| model.c_at(n),
        |n: &[i64]| model.combined_weight_unchecked(hs, n),
        model.index_set(),
        policy,
    )
}

/// tilde-sup of c(n)/b_{n,h}; valid only when the A-images are pairwise
/// orthogonal, which the model must declare.
pub fn hlp_constant(
    model: &SpectralModel,
    h: &WeightVector,
    policy: &TailPolicy,
) -> Result<SeriesSum> {
    check_h(model, h)?;
    if !model.orthogonal_images() {
        return Err(Error::NotOrthogonal);
    }
    let hs = h.as_slice();
    if let Some(pw) = folded_dim1(model) {
        // the sup over {n, -n} equals the one-sided sup; no multiplicity
        if let Some(df) = dense_folded(pw, hs, 1.0) {
            return dense_tilde_sup(df, policy);
        }
        return folded_tilde_sup(FoldedPower::new(pw, hs, 1.0), policy);
    }
    tilde_sup(
        |n: &[i64]| model.c_at(n),
        |n: &[i64]| model.combined_weight_unchecked(hs, n),
        model.index_set(),
        policy,
    )
}

/// The pair of additive coefficients: the inequality reads
/// |⟨f,Ax⟩| ≤ coef_C·‖x‖_{C,h'} + coef_D·‖x‖_{D,h''}.
#[derive(Clone, Debug)]
pub struct AdditiveCoeffs {
    pub coef_c: SeriesSum,
    pub coef_d: SeriesSum,
}

/// Coefficients √(~Σ c·c'/(c'+d)²) and √(~Σ c·d/(c'+d)²), where
/// c' = c_{n,h'} comes from `model_c` and d = d_{n,h''} from `model_d`.
/// Both models must share the index set and the numerator weights c.
pub fn additive_taikov(
    model_c: &SpectralModel,
    model_d: &SpectralModel,
    h1: &WeightVector,
    h2: &WeightVector,
    policy: &TailPolicy,
) -> Result<AdditiveCoeffs> {
    check_h(model_c, h1)?;
    check_h(model_d, h2)?;
    let hc = h1.as_slice();
    let hd = h2.as_slice();
    let set = model_c.index_set();
    let coef_c = tilde_sum(
        |n: &[i64]| model_c.c_at(n) * model_c.combined_weight_unchecked(hc, n),
        |n: &[i64]| {
            let b = model_c.combined_weight_unchecked(hc, n)
                + model_d.combined_weight_unchecked(hd, n);
            b * b
        },
        set,
        policy,
    )?;
    let coef_d = tilde_sum(
        |n: &[i64]| model_c.c_at(n) * model_d.combined_weight_unchecked(hd, n),
        |n: &[i64]| {
            let b = model_c.combined_weight_unchecked(hc, n)
                + model_d.combined_weight_unchecked(hd, n);
            b * b
        },
        set,
        policy,
    )?;
    Ok(AdditiveCoeffs {
        coef_c: SeriesSum {
            value: coef_c.value.sqrt(),
            ..coef_c
        },
        coef_d: SeriesSum {
            value: coef_d.value.sqrt(),
            ..coef_d
        },
    })
}

/// Truncated extremal element x_{h,N}: coefficient √c(n)/b_{n,h} at every
/// index of M_N with b_{n,h} ≠ 0 (the phase convention takes ⟨f,Ae_n⟩ ≥ 0).
#[derive(Clone, Debug)]
pub struct ExtremalElement {
    pub coefficients: Vec<(Vec<i64>, f64)>,
    pub level: u64,
}

pub fn extremal_element(
    model: &SpectralModel,
    h: &WeightVector,
    level: u64,
) -> Result<ExtremalElement> {
    check_h(model, h)?;
    let hs = h.as_slice();
    let mut coefficients = Vec::new();
    let last = model.index_set().level_count().map_or(level, |c| c.min(level));
    for lvl in 1..=last {
        model.index_set().for_each_in_level(lvl, &mut |n: &[i64]| {
            let b = model.combined_weight_unchecked(hs, n);
            if b != 0.0 {
                let c = model.c_at(n);
                if c != 0.0 {
                    coefficients.push((n.to_vec(), c.sqrt() / b));
                }
            }
        });
    }
    Ok(ExtremalElement {
        coefficients,
        level,
    })
}

/// |⟨f,Ax_{h,N}⟩|² / ‖x_{h,N}‖²_{B,h}, evaluated literally from the
/// truncated extremal element; algebraically this equals the partial sum
/// of the constant's series over M_N.
pub fn sharpness_ratio(model: &SpectralModel, h: &WeightVector, level: u64) -> Result<f64> {
    check_h(model, h)?;
    let hs = h.as_slice();
    let mut pairing = 0.0f64; // ⟨f, A x⟩ = Σ √c · (√c / b)
    let mut norm_sq = 0.0f64; // Σ b · (√c / b)²
    let last = model.index_set().level_count().map_or(level, |c| c.min(level));
    for lvl in 1..=last {
        model.index_set().for_each_in_level(lvl, &mut |n: &[i64]| {
            let b = model.combined_weight_unchecked(hs, n);
            if b != 0.0 {
                let x = model.c_at(n).sqrt() / b;
                pairing += model.c_at(n).sqrt() * x;
                norm_sq += b * x * x;
            }
        });
    }
    if norm_sq == 0.0 {
        return Err(Error::InsufficientTruncation { level });
    }
    Ok(pairing * pairing / norm_sq)
}

/// Partial sums of the constant's series by truncation level, for
/// convergence curves.
pub fn convergence_curve(
    model: &SpectralModel,
    h: &WeightVector,
    max_level: u64,
) -> Result<Vec<(u64, f64)>> {
    check_h(model, h)?;
    let hs = h.as_slice();
    let mut out = Vec::with_capacity(max_level as usize);
    let mut partial = 0.0f64;
    let last = model
        .index_set()
        .level_count()
        .map_or(max_level, |c| c.min(max_level));
    for lvl in 1..=last {
        model.index_set().for_each_in_level(lvl, &mut |n: &[i64]| {
            let b = model.combined_weight_unchecked(hs, n);
            if b != 0.0 {
                partial += model.c_at(n) / b;
            }
        });
        out.push((lvl, partial));
    }
    Ok(out)
}

/// Maximum of |⟨f,Ax⟩|²/‖x‖²_{B,h} over seeded pseudorandom coefficient
/// vectors supported inside M_{level}: support size uniform in
/// [1, |M_level|], standard complex Gaussian coefficients, one counter
/// stream per trial so the scan is order-independent and reproducible.
pub fn random_violation_scan(
    model: &SpectralModel,
    h: &WeightVector,
    level: u64,
    trials: u64,
    seed: u64,
) -> Result<f64> {
    check_h(model, h)?;
    let hs = h.as_slice();
    let indices = model.index_set().indices_up_to(level);
    // precompute (√c, b) per index; drop b = 0 rows (they cannot enter a
    // finite-constant ratio)
    let rows: Vec<(f64, f64)> = indices
        .iter()
        .filter_map(|n| {
            let b = model.combined_weight_unchecked(hs, n);
            (b != 0.0).then(|| (model.c_at(n).sqrt(), b))
        })
        .collect();
    if rows.is_empty() {
        return Err(Error::InsufficientTruncation { level });
    }
    let max = (0..trials)
        .into_par_iter()
        .map(|trial| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(trial);
            let support = rng.random_range(1..=rows.len());
            // sample a subset by partial Fisher-Yates over row ids
            let mut ids: Vec<usize> = (0..rows.len()).collect();
            for i in 0..support {
                let j = rng.random_range(i..ids.len());
                ids.swap(i, j);
            }
            let mut pairing = Complex64::new(0.0, 0.0);
            let mut norm_sq = 0.0f64;
            for &id in &ids[..support] {
                let re: f64 = rng.sample(StandardNormal);
                let im: f64 = rng.sample(StandardNormal);
                let x = Complex64::new(re, im);
                let (sqrt_c, b) = rows[id];
                pairing += x * sqrt_c;
                norm_sq += b * x.norm_sqr();
            }
            if norm_sq == 0.0 {
                0.0
            } else {
                pairing.norm_sqr() / norm_sq
            }
        })
        .reduce(|| 0.0, f64::max);
    Ok(max)
}

/// HLP-form scan: maximum of ‖Ax‖²/‖x‖²_{B,h} = Σc|x_n|²/Σb|x_n|² over the
/// same seeded random vectors; bounded by the sup constant.
pub fn random_violation_scan_hlp(
    model: &SpectralModel,
    h: &WeightVector,
    level: u64,
    trials: u64,
    seed: u64,
) -> Result<f64> {
    check_h(model, h)?;
    let hs = h.as_slice();
    let indices = model.index_set().indices_up_to(level);
    let rows: Vec<(f64, f64)> = indices
        .iter()
        .filter_map(|n| {
            let b = model.combined_weight_unchecked(hs, n);
            (b != 0.0).then(|| (model.c_at(n), b))
        })
        .collect();
    if rows.is_empty() {
        return Err(Error::InsufficientTruncation { level });
    }
    let max = (0..trials)
        .into_par_iter()
        .map(|trial| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(trial);
            let support = rng.random_range(1..=rows.len());
            let mut ids: Vec<usize> = (0..rows.len()).collect();
            for i in 0..support {
                let j = rng.random_range(i..ids.len());
                ids.swap(i, j);
            }
            let mut num = 0.0f64;
            let mut den = 0.0f64;
            for &id in &ids[..support] {
                let re: f64 = rng.sample(StandardNormal);
                let im: f64 = rng.sample(StandardNormal);
                let w = re * re + im * im;
                let (c, b) = rows[id];
                num += c * w;
                den += b * w;
            }
            if den == 0.0 {
                0.0
            } else {
                num / den
            }
        })
        .reduce(|| 0.0, f64::max);
    Ok(max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::{build_torus, Functional, TorusSpec};
    use crate::spectral::{ExtendedSum, IndexSet};
    use std::f64::consts::PI;
    use std::sync::Arc;

    fn torus_01() -> SpectralModel {
        build_torus(&TorusSpec {
            a: 1,
            k: vec![0.0],
            r_list: vec![vec![0.0], vec![1.0]],
            functional: Functional::PointEvaluation,
            damping: None,
        })
        .unwrap()
    }

    fn single_index(c: f64, b: Vec<f64>) -> SpectralModel {
        let bs: Vec<crate::spectral::Weight> = b
            .into_iter()
            .map(|v| Arc::new(move |_: &[i64]| v) as crate::spectral::Weight)
            .collect();
        SpectralModel::new(
            IndexSet::explicit(vec![vec![1]]),
            Arc::new(move |_: &[i64]| c),
            bs,
        )
        .unwrap()
    }

    #[test]
    fn single_index_constant() {
        let m = single_index(1.0, vec![2.0]);
        let h = WeightVector::new(vec![1.0]).unwrap();
        let r = taikov_constant(&m, &h, &TailPolicy::default()).unwrap();
        assert_eq!(r.value, ExtendedSum::Finite(0.5));
    }

    #[test]
    fn torus_taikov_closed_form() {
        let m = torus_01();
        let h = WeightVector::new(vec![1.0, 1.0]).unwrap();
        let policy = TailPolicy::default().with_rel_tol(1e-7).with_decay(2.0);
        let r = taikov_constant(&m, &h, &policy).unwrap();
        let oracle = PI / PI.tanh() - 1.0;
        let got = r.value.unwrap_finite();
        assert!((got - oracle).abs() < 2.0 * r.tail_bound + 1e-12);
    }

    #[test]
    fn hlp_requires_orthogonality_flag() {
        let m = torus_01();
        let h = WeightVector::new(vec![1.0, 1.0]).unwrap();
        assert!(matches!(
            hlp_constant(&m, &h, &TailPolicy::default()),
            Err(Error::NotOrthogonal)
        ));
    }

    #[test]
    fn hlp_sup_value() {
        // c(n) = n², b = 1 + n⁴ → sup 1/2 at n = ±1
        let m = build_torus(&TorusSpec {
            a: 1,
            k: vec![1.0],
            r_list: vec![vec![0.0], vec![2.0]],
            functional: Functional::Norm,
            damping: None,
        })
        .unwrap();
        let h = WeightVector::new(vec![1.0, 1.0]).unwrap();
        let policy = TailPolicy::default().with_decay(2.0);
        let r = hlp_constant(&m, &h, &policy).unwrap();
        assert!((r.value.unwrap_finite() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn additive_single_index() {
        let mc = single_index(1.0, vec![1.0]);
        let md = single_index(1.0, vec![1.0]);
        let h = WeightVector::new(vec![1.0]).unwrap();
        let r = additive_taikov(&mc, &md, &h, &h, &TailPolicy::default()).unwrap();
        assert_eq!(r.coef_c.value, ExtendedSum::Finite(0.5));
        assert_eq!(r.coef_d.value, ExtendedSum::Finite(0.5));
    }

    #[test]
    fn additive_degenerate_d() {
        // d ≡ 0: coef_D = 0 and coef_C reduces to the plain constant
        let mc = torus_01();
        let zero_d = SpectralModel::new(
            IndexSet::lattice(1),
            Arc::new(|_: &[i64]| 1.0),
            vec![Arc::new(|_: &[i64]| 0.0) as crate::spectral::Weight],
        )
        .unwrap();
        let h1 = WeightVector::new(vec![1.0, 1.0]).unwrap();
        let h2 = WeightVector::new(vec![1.0]).unwrap();
        let policy = TailPolicy::default().with_rel_tol(1e-6).with_decay(2.0);
        let r = additive_taikov(&mc, &zero_d, &h1, &h2, &policy).unwrap();
        assert_eq!(r.coef_d.value, ExtendedSum::Finite(0.0));
        let k = taikov_constant(&mc, &h1, &policy).unwrap();
        let expect = k.value.unwrap_finite().sqrt();
        assert!((r.coef_c.value.unwrap_finite() - expect).abs() < 1e-5);
    }

    #[test]
    fn extremal_coefficients_torus() {
        let m = torus_01();
        let h = WeightVector::new(vec![1.0, 1.0]).unwrap();
        let e = extremal_element(&m, &h, 3).unwrap();
        assert_eq!(e.coefficients.len(), 6);
        for (n, coef) in &e.coefficients {
            let expect = 1.0 / (1.0 + (n[0] * n[0]) as f64);
            assert!((coef - expect).abs() < 1e-15);
        }
    }

    #[test]
    fn sharpness_ratio_is_partial_sum() {
        let m = torus_01();
        let h = WeightVector::new(vec![1.0, 1.0]).unwrap();
        assert!((sharpness_ratio(&m, &h, 1).unwrap() - 1.0).abs() < 1e-14);
        for level in [2u64, 7, 100] {
            let curve = convergence_curve(&m, &h, level).unwrap();
            let partial = curve.last().unwrap().1;
            let ratio = sharpness_ratio(&m, &h, level).unwrap();
            assert!((ratio - partial).abs() <= 1e-12 * partial);
        }
    }

    #[test]
    fn scan_single_index_is_exact() {
        let m = single_index(1.0, vec![2.0]);
        let h = WeightVector::new(vec![1.0]).unwrap();
        let max = random_violation_scan(&m, &h, 1, 64, 7).unwrap();
        assert!((max - 0.5).abs() < 1e-12);
    }

    #[test]
    fn scan_zero_trials() {
        let m = torus_01();
        let h = WeightVector::new(vec![1.0, 1.0]).unwrap();
        assert_eq!(random_violation_scan(&m, &h, 10, 0, 1).unwrap(), 0.0);
    }

    #[test]
    fn hlp_scan_bounded_by_sup() {
        let m = build_torus(&TorusSpec {
            a: 1,
            k: vec![1.0],
            r_list: vec![vec![0.0], vec![2.0]],
            functional: Functional::Norm,
            damping: None,
        })
        .unwrap();
        let h = WeightVector::new(vec![1.0, 1.0]).unwrap();
        let sup = hlp_constant(&m, &h, &TailPolicy::default().with_decay(2.0))
            .unwrap()
            .value
            .unwrap_finite();
        let max = random_violation_scan_hlp(&m, &h, 30, 500, 11).unwrap();
        assert!(max <= sup * (1.0 + 1e-12), "{max} vs sup {sup}");
    }

    #[test]
    fn scan_reproducible() {
        let m = torus_01();
        let h = WeightVector::new(vec![1.0, 1.0]).unwrap();
        let a = random_violation_scan(&m, &h, 20, 200, 42).unwrap();
        let b = random_violation_scan(&m, &h, 20, 200, 42).unwrap();
        assert_eq!(a.to_bits(), b.to_bits());
    }
}
