//! Builders for the concrete model families: the torus T^a, the compact
//! rank-one symmetric spaces, the continuous R^d Fourier model, and
//! general power-of-g multiplier models.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::hull::{hull_membership, HullStatus};
use crate::quad::integrate_rplus;
use crate::spectral::{ExtendedSum, IndexSet, PowerWeights, SpectralModel, Weight, WeightVector};
use crate::special::{ln_gamma, pow_weight};

/// Which functional the weight c(n) encodes: a point evaluation (mean-squared
/// Taikov setting) or the operator norm (HLP setting, orthogonal images).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Functional {
    PointEvaluation,
    Norm,
}

/// Torus model over Z^a_*: c(n) = Π|n_i|^{2k_i} (optionally damped),
/// b_j(n) = Π|n_i|^{2 r^j_i}.
#[derive(Clone, Debug)]
pub struct TorusSpec {
    pub a: usize,
    pub k: Vec<f64>,
    pub r_list: Vec<Vec<f64>>,
    pub functional: Functional,
    /// Per-axis exponential damping rates ρ_i; c is scaled by Π e^{−2ρ_i|n_i|}.
    pub damping: Option<Vec<f64>>,
}

impl TorusSpec {
    fn validate(&self) -> Result<()> {
        if self.a == 0 {
            return Err(Error::InvalidArgument("torus dimension must be >= 1".into()));
        }
        if self.k.len() != self.a
            || self.r_list.is_empty()
            || self.r_list.iter().any(|r| r.len() != self.a)
            || self.damping.as_ref().is_some_and(|d| d.len() != self.a)
        {
            return Err(Error::InvalidArgument(
                "torus order vectors must match the dimension".into(),
            ));
        }
        Ok(())
    }

    /// Decay exponent of the ratio c/b_h in |n|, for the tail certificate:
    /// with every h_j > 0 the denominator grows like the largest order.
    pub fn suggested_decay(&self) -> Option<f64> {
        if self.damping.as_ref().is_some_and(|d| d.iter().any(|&r| r > 0.0)) {
            // exponential damping beats any power law
            return Some(1e3);
        }
        let mut p = 0.0;
        for i in 0..self.a {
            let rmax = self.r_list.iter().map(|r| r[i]).fold(f64::MIN, f64::max);
            p += 2.0 * (rmax - self.k[i]);
        }
        (p > 1.0).then_some(p)
    }
}

pub fn build_torus(spec: &TorusSpec) -> Result<SpectralModel> {
    spec.validate()?;
    let pw = PowerWeights {
        two_k: spec.k.iter().map(|&k| 2.0 * k).collect(),
        two_r: spec
            .r_list
            .iter()
            .map(|r| r.iter().map(|&v| 2.0 * v).collect())
            .collect(),
        damping: spec.damping.clone(),
        fold: 1.0,
    };
    let c_pw = pw.clone();
    let c: Weight = Arc::new(move |n: &[i64]| c_pw.c(n));
    let b: Vec<Weight> = (0..spec.r_list.len())
        .map(|j| {
            let b_pw = pw.clone();
            Arc::new(move |n: &[i64]| b_pw.b(j, n)) as Weight
        })
        .collect();
    Ok(SpectralModel::new(IndexSet::lattice(spec.a), c, b)?
        .with_orthogonal_images(spec.functional == Functional::Norm)
        .with_power_weights(pw))
}

/// The compact rank-one symmetric spaces, by family and rank parameter.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CrossFamily {
    Sphere,
    RealProjective,
    ComplexProjective,
    Quaternionic,
    Cayley,
}

#[derive(Clone, Copy, Debug)]
pub struct CrossSpace {
    pub family: CrossFamily,
    pub b: u32,
}

impl CrossSpace {
    pub fn new(family: CrossFamily, b: u32) -> Result<Self> {
        let min_b = match family {
            CrossFamily::Sphere | CrossFamily::RealProjective => 2,
            CrossFamily::ComplexProjective | CrossFamily::Quaternionic => 1,
            CrossFamily::Cayley => 2,
        };
        if b < min_b || (family == CrossFamily::Cayley && b != 2) {
            return Err(Error::InvalidArgument(format!(
                "invalid rank parameter b = {b} for {family:?}"
            )));
        }
        Ok(CrossSpace { family, b })
    }

    /// Real dimension d.
    pub fn dimension(&self) -> u32 {
        match self.family {
            CrossFamily::Sphere | CrossFamily::RealProjective => self.b,
            CrossFamily::ComplexProjective => 2 * self.b,
            CrossFamily::Quaternionic => 4 * self.b,
            CrossFamily::Cayley => 16,
        }
    }

    pub fn alpha(&self) -> f64 {
        (self.dimension() as f64 - 2.0) / 2.0
    }

    pub fn beta(&self) -> f64 {
        match self.family {
            CrossFamily::Sphere => self.alpha(),
            CrossFamily::RealProjective => -0.5,
            CrossFamily::ComplexProjective => 0.0,
            CrossFamily::Quaternionic => 1.0,
            CrossFamily::Cayley => 3.0,
        }
    }

    /// Laplace eigenvalue γ_j² of the j-th band.
    pub fn gamma_sq(&self, j: u64) -> f64 {
        let j = j as f64;
        let b = self.b as f64;
        match self.family {
            CrossFamily::Sphere => j * (j + b - 1.0),
            CrossFamily::RealProjective => 2.0 * j * (2.0 * j + b - 1.0),
            CrossFamily::ComplexProjective => 4.0 * j * (j + b),
            CrossFamily::Quaternionic => 4.0 * j * (j + 2.0 * b + 1.0),
            CrossFamily::Cayley => 4.0 * j * (j + 11.0),
        }
    }
}

/// Band multiplicity ν_j, evaluated in the log-Gamma domain so large j
/// cannot overflow; ν_0 = 1 by convention.
pub fn cross_multiplicity(space: &CrossSpace, j: u64) -> f64 {
    if j == 0 {
        return 1.0;
    }
    let a = space.alpha();
    let b = space.beta();
    let jf = j as f64;
    let log = (ln_gamma(b + 1.0) + ln_gamma(jf + a + 1.0) + ln_gamma(jf + a + b + 1.0))
        - (ln_gamma(a + b + 2.0) + ln_gamma(a + 1.0) + ln_gamma(jf + 1.0) + ln_gamma(jf + b + 1.0));
    (2.0 * jf + a + b + 1.0) * log.exp()
}

/// Weyl-law diagnostic: γ_j divided by the d-th root of the eigenvalue
/// count up to band j (multiplicities included). This ratio stabilizes as
/// j grows on every catalog space.
pub fn weyl_ratio(space: &CrossSpace, j: u64) -> f64 {
    let mut count = 1.0; // ν_0
    for i in 1..=j {
        count += cross_multiplicity(space, i);
    }
    space.gamma_sq(j).sqrt() / count.powf(1.0 / space.dimension() as f64)
}

/// Spectral model of a CROSS space, indexed by the band j ≥ 1:
/// c(j) = ν_j · γ_j^{4k}, b_l(j) = γ_j^{4 r_l}.
pub fn build_cross(space: &CrossSpace, k: f64, r_list: &[f64]) -> Result<SpectralModel> {
    if r_list.is_empty() {
        return Err(Error::InvalidArgument("r_list must be nonempty".into()));
    }
    let sp = *space;
    let c: Weight = Arc::new(move |n: &[i64]| {
        let j = n[0] as u64;
        cross_multiplicity(&sp, j) * pow_weight(sp.gamma_sq(j), 2.0 * k)
    });
    let b: Vec<Weight> = r_list
        .iter()
        .map(|&r| {
            Arc::new(move |n: &[i64]| pow_weight(sp.gamma_sq(n[0] as u64), 2.0 * r)) as Weight
        })
        .collect();
    // eigenspace projections are mutually orthogonal, so the HLP gate holds
    Ok(SpectralModel::new(IndexSet::positive_integers(), c, b)?.with_orthogonal_images(true))
}

/// Ratio-decay hint for a CROSS model: ν_j ~ j^{d−1} and γ_j² ~ j², so
/// c/b_h ~ j^{d−1+4k−4·max r}.
pub fn cross_suggested_decay(space: &CrossSpace, k: f64, r_list: &[f64]) -> Option<f64> {
    let rmax = r_list.iter().cloned().fold(f64::MIN, f64::max);
    let p = 4.0 * (rmax - k) - (space.dimension() as f64 - 1.0);
    (p > 1.0).then_some(p)
}

/// Continuous Fourier model on R^d.
#[derive(Clone, Debug)]
pub struct RdModel {
    pub d: usize,
    pub k: Vec<f64>,
    pub r_list: Vec<Vec<f64>>,
    /// Certified relative quadrature tolerance.
    pub rel_tol: f64,
}

impl RdModel {
    pub fn new(d: usize, k: Vec<f64>, r_list: Vec<Vec<f64>>) -> Result<Self> {
        if d == 0 || k.len() != d || r_list.is_empty() || r_list.iter().any(|r| r.len() != d) {
            return Err(Error::InvalidArgument(
                "R^d model orders must match the dimension".into(),
            ));
        }
        Ok(RdModel {
            d,
            k,
            r_list,
            rel_tol: 1e-9,
        })
    }

    /// True iff k + ½·1 sits in the interior of the hull of the orders —
    /// exactly when the weight integral converges.
    pub fn integrable(&self) -> Result<bool> {
        let target: Vec<f64> = self.k.iter().map(|&v| v + 0.5).collect();
        Ok(hull_membership(&target, &self.r_list)?.status == HullStatus::Interior)
    }
}

/// (1/π^d) ∫_{R_+^d} t^{2k} / Σ_l h_l t^{2r^l} dt, or Infinite when the
/// hull condition rules out convergence.
pub fn rd_integral(model: &RdModel, h: &WeightVector) -> Result<ExtendedSum> {
    if h.len() != model.r_list.len() {
        return Err(Error::InvalidWeightVector {
            expected: model.r_list.len(),
            got: h.as_slice().to_vec(),
        });
    }
    if !model.integrable()? {
        return Ok(ExtendedSum::Infinite);
    }
    let k = model.k.clone();
    let r_list = model.r_list.clone();
    let hv = h.as_slice().to_vec();
    let integrand = move |t: &[f64]| {
        let mut num = 1.0;
        for (i, &ki) in k.iter().enumerate() {
            num *= pow_weight(t[i], 2.0 * ki);
        }
        let mut den = 0.0;
        for (l, &hl) in hv.iter().enumerate() {
            let mut b = hl;
            for (i, &ri) in r_list[l].iter().enumerate() {
                b *= pow_weight(t[i], 2.0 * ri);
            }
            den += b;
        }
        if den == 0.0 {
            0.0
        } else {
            num / den
        }
    };
    let v = integrate_rplus(model.d, &integrand, model.rel_tol)?;
    Ok(ExtendedSum::Finite(
        v / std::f64::consts::PI.powi(model.d as i32),
    ))
}

/// Power-of-g multiplier model: per coordinate a nonnegative symbol g, with
/// c(n) = Π g(n_i)^{2k_i}, b_j(n) = Π g(n_i)^{2 r^j_i} and 0⁰ := 1.
#[derive(Clone)]
pub struct GPowerSpec {
    pub dim: usize,
    pub g: Arc<dyn Fn(i64) -> f64 + Send + Sync>,
    pub k: Vec<f64>,
    pub r_list: Vec<Vec<f64>>,
    pub functional: Functional,
    pub damping: Option<Vec<f64>>,
}

pub fn build_gpower(spec: &GPowerSpec) -> Result<SpectralModel> {
    if spec.dim == 0
        || spec.k.len() != spec.dim
        || spec.r_list.is_empty()
        || spec.r_list.iter().any(|r| r.len() != spec.dim)
        || spec.damping.as_ref().is_some_and(|d| d.len() != spec.dim)
    {
        return Err(Error::InvalidArgument(
            "g-power order vectors must match the dimension".into(),
        ));
    }
    let g = spec.g.clone();
    let k = spec.k.clone();
    let damping = spec.damping.clone();
    let c: Weight = Arc::new(move |n: &[i64]| {
        let mut v = 1.0;
        for (i, &ki) in k.iter().enumerate() {
            v *= pow_weight(g(n[i]), 2.0 * ki);
        }
        if let Some(rho) = &damping {
            for (i, &r) in rho.iter().enumerate() {
                v *= (-2.0 * r * n[i].unsigned_abs() as f64).exp();
            }
        }
        v
    });
    let b: Vec<Weight> = spec
        .r_list
        .iter()
        .map(|r| {
            let g = spec.g.clone();
            let r = r.clone();
            Arc::new(move |n: &[i64]| {
                let mut v = 1.0;
                for (i, &ri) in r.iter().enumerate() {
                    v *= pow_weight(g(n[i]), 2.0 * ri);
                }
                v
            }) as Weight
        })
        .collect();
    Ok(SpectralModel::new(IndexSet::lattice(spec.dim), c, b)?
        .with_orthogonal_images(spec.functional == Functional::Norm))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{tilde_sum, TailPolicy};

    fn torus_1d(k: f64, r: &[f64]) -> SpectralModel {
        build_torus(&TorusSpec {
            a: 1,
            k: vec![k],
            r_list: r.iter().map(|&v| vec![v]).collect(),
            functional: Functional::PointEvaluation,
            damping: None,
        })
        .unwrap()
    }

    #[test]
    fn torus_weights() {
        let m = torus_1d(0.0, &[0.0, 1.0]);
        assert_eq!(m.c_at(&[2]), 1.0);
        assert_eq!(m.b_at(0, &[2]), 1.0);
        assert_eq!(m.b_at(1, &[2]), 4.0);
        let m = torus_1d(1.0, &[0.0, 1.0]);
        assert_eq!(m.c_at(&[1]), 1.0);
    }

    #[test]
    fn torus_2d_mixed_orders() {
        let m = build_torus(&TorusSpec {
            a: 2,
            k: vec![1.0, 0.0],
            r_list: vec![vec![0.0, 0.0], vec![1.0, 1.0]],
            functional: Functional::PointEvaluation,
            damping: None,
        })
        .unwrap();
        assert_eq!(m.c_at(&[2, 3]), 4.0);
    }

    #[test]
    fn sphere_multiplicities_closed_forms() {
        let s2 = CrossSpace::new(CrossFamily::Sphere, 2).unwrap();
        let s3 = CrossSpace::new(CrossFamily::Sphere, 3).unwrap();
        for j in 1..=100u64 {
            let m2 = cross_multiplicity(&s2, j);
            let m3 = cross_multiplicity(&s3, j);
            assert_eq!(m2.round() as u64, 2 * j + 1, "S² j={j}");
            assert_eq!(m3.round() as u64, (j + 1) * (j + 1), "S³ j={j}");
            assert!((m2 - m2.round()).abs() < 1e-6);
            assert!((m3 - m3.round()).abs() < 1e-6);
        }
    }

    #[test]
    fn complex_projective_multiplicity() {
        // CP²: α=1, β=0, j=1 → (2+2)·Γ(1)Γ(3)Γ(3)/(Γ(3)Γ(2)Γ(2)Γ(2)) = 8
        let cp2 = CrossSpace::new(CrossFamily::ComplexProjective, 2).unwrap();
        assert!((cross_multiplicity(&cp2, 1) - 8.0).abs() < 1e-10);
    }

    #[test]
    fn eigenvalue_laws() {
        let s3 = CrossSpace::new(CrossFamily::Sphere, 3).unwrap();
        assert_eq!(s3.gamma_sq(1), 3.0);
        let cap = CrossSpace::new(CrossFamily::Cayley, 2).unwrap();
        assert_eq!(cap.gamma_sq(1), 48.0);
        assert_eq!(cap.dimension(), 16);
        assert_eq!(cap.beta(), 3.0);
    }

    #[test]
    fn cross_model_weights() {
        let s2 = CrossSpace::new(CrossFamily::Sphere, 2).unwrap();
        let m = build_cross(&s2, 0.0, &[0.0, 1.0]).unwrap();
        // γ_1² = 2, ν_1 = 3
        assert!((m.c_at(&[1]) - 3.0).abs() < 1e-12);
        assert_eq!(m.b_at(0, &[1]), 1.0);
        assert!((m.b_at(1, &[1]) - 4.0).abs() < 1e-12);
    }

    #[test]
    fn weyl_ratio_stabilizes() {
        for space in [
            CrossSpace::new(CrossFamily::Sphere, 2).unwrap(),
            CrossSpace::new(CrossFamily::Sphere, 3).unwrap(),
            CrossSpace::new(CrossFamily::ComplexProjective, 2).unwrap(),
        ] {
            let r3 = weyl_ratio(&space, 1_000);
            let r4 = weyl_ratio(&space, 10_000);
            assert!(
                (r3 / r4 - 1.0).abs() < 0.05,
                "{:?}: {r3} vs {r4}",
                space.family
            );
        }
    }

    #[test]
    fn rd_integral_lorentzian() {
        let m = RdModel::new(1, vec![0.0], vec![vec![0.0], vec![1.0]]).unwrap();
        let h = WeightVector::new(vec![1.0, 1.0]).unwrap();
        let v = rd_integral(&m, &h).unwrap().unwrap_finite();
        assert!((v - 0.5).abs() < 1e-8, "{v}");
        let h = WeightVector::new(vec![4.0, 1.0]).unwrap();
        let v = rd_integral(&m, &h).unwrap().unwrap_finite();
        assert!((v - 0.25).abs() < 1e-8, "{v}");
    }

    #[test]
    fn rd_integral_hull_failure_is_infinite() {
        let m = RdModel::new(1, vec![0.0], vec![vec![0.0], vec![0.4]]).unwrap();
        let h = WeightVector::new(vec![1.0, 1.0]).unwrap();
        assert!(rd_integral(&m, &h).unwrap().is_infinite());
    }

    #[test]
    fn gpower_matches_torus_bitwise() {
        let torus = torus_1d(1.0, &[0.0, 2.0]);
        let gp = build_gpower(&GPowerSpec {
            dim: 1,
            g: Arc::new(|n: i64| n.unsigned_abs() as f64),
            k: vec![1.0],
            r_list: vec![vec![0.0], vec![2.0]],
            functional: Functional::PointEvaluation,
            damping: None,
        })
        .unwrap();
        for n in 1..=10_000i64 {
            assert_eq!(torus.c_at(&[n]).to_bits(), gp.c_at(&[n]).to_bits());
            for j in 0..2 {
                assert_eq!(torus.b_at(j, &[n]).to_bits(), gp.b_at(j, &[n]).to_bits());
            }
        }
    }

    #[test]
    fn gpower_zero_symbol_convention() {
        let gp = build_gpower(&GPowerSpec {
            dim: 1,
            g: Arc::new(|_| 0.0),
            k: vec![0.0],
            r_list: vec![vec![0.0]],
            functional: Functional::PointEvaluation,
            damping: None,
        })
        .unwrap();
        assert_eq!(gp.c_at(&[1]), 1.0);
    }

    #[test]
    fn damped_torus_sums_fast() {
        let m = build_torus(&TorusSpec {
            a: 1,
            k: vec![1.0],
            r_list: vec![vec![0.0]],
            functional: Functional::PointEvaluation,
            damping: Some(vec![0.5]),
        })
        .unwrap();
        // Σ_{Z_*} n² e^{-|n|} = 2 Σ n² x^n at x = e^{-1} = 2x(1+x)/(1-x)³
        let policy = TailPolicy::default().with_decay(50.0);
        let r = tilde_sum(|n: &[i64]| m.c_at(n), |n: &[i64]| m.b_at(0, n), m.index_set(), &policy)
            .unwrap();
        let x = (-1.0f64).exp();
        let oracle = 2.0 * x * (1.0 + x) / (1.0 - x).powi(3);
        assert!((r.value.unwrap_finite() - oracle).abs() < 1e-9 * oracle);
    }
}
