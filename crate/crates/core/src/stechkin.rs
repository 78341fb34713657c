//! The Stechkin best-approximation problem for f∘A on the class bounded in
//! the D-seminorm: the G_μ family, the norm-budget equation, the error
//! E(N), the limiting budget N*, and lower-bound certificates from
//! truncated extremal elements.

use crate::error::{Error, Result};
use crate::spectral::{tilde_sum, ExtendedSum, SeriesSum, SpectralModel, TailPolicy, WeightVector};

/// The displayed budget series carries no square root relative to the dual
/// norm it names; both readings are supported and the caller picks one.
/// `AsDisplayed` equates the budget N with the displayed sum itself;
/// `Sqrt` equates N with the square root of that sum.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum BudgetConvention {
    #[default]
    AsDisplayed,
    Sqrt,
}

/// Stechkin problem data: the first `split` constraint weights of `model`
/// are the C-operators (weighted by h'), the rest the D-operators
/// (weighted by h'').
pub struct StechkinProblem {
    model: SpectralModel,
    split: usize,
    h_c: WeightVector,
    h_d: WeightVector,
    pub policy: TailPolicy,
    pub convention: BudgetConvention,
}

#[derive(Clone, Debug)]
pub struct StechkinSolution {
    pub mu: f64,
    /// The budget actually matched, in the problem's convention.
    pub budget: f64,
    pub error: ExtendedSum,
    pub n_star: ExtendedSum,
}

impl StechkinProblem {
    pub fn new(
        model: SpectralModel,
        split: usize,
        h_c: WeightVector,
        h_d: WeightVector,
        policy: TailPolicy,
    ) -> Result<Self> {
        let m1 = model.m() + 1;
        if split == 0 || split >= m1 || h_c.len() != split || h_d.len() != m1 - split {
            return Err(Error::InvalidArgument(format!(
                "split {split} with |h'| = {} and |h''| = {} does not partition {m1} operators",
                h_c.len(),
                h_d.len()
            )));
        }
        Ok(StechkinProblem {
            model,
            split,
            h_c,
            h_d,
            policy,
            convention: BudgetConvention::default(),
        })
    }

    pub fn with_convention(mut self, convention: BudgetConvention) -> Self {
        self.convention = convention;
        self
    }

    /// c_{n,h'} = Σ_{j<split} h'_j b_j(n).
    fn c_weight(&self, n: &[i64]) -> f64 {
        let mut v = 0.0;
        for (j, &hj) in self.h_c.as_slice().iter().enumerate() {
            v += hj * self.model.b_at(j, n);
        }
        v
    }

    /// d_{n,h''} = Σ_{j≥split} h''_j b_j(n).
    fn d_weight(&self, n: &[i64]) -> f64 {
        let mut v = 0.0;
        for (j, &hj) in self.h_d.as_slice().iter().enumerate() {
            v += hj * self.model.b_at(self.split + j, n);
        }
        v
    }

    pub fn model(&self) -> &SpectralModel {
        &self.model
    }
}

/// The displayed budget series ~Σ c·c'/(c' + μd)². Divergence at μ = 0 is
/// reported as Infinite: the G_0 functional is unbounded there.
pub fn g_mu_norm_sq(problem: &StechkinProblem, mu: f64) -> Result<SeriesSum> {
    if !(mu >= 0.0) {
        return Err(Error::InvalidArgument(format!("mu must be >= 0, got {mu}")));
    }
    let r = tilde_sum(
        |n: &[i64]| problem.model.c_at(n) * problem.c_weight(n),
        |n: &[i64]| {
            let denom = problem.c_weight(n) + mu * problem.d_weight(n);
            denom * denom
        },
        problem.model.index_set(),
        &problem.policy,
    );
    match r {
        Ok(s) => Ok(s),
        Err(Error::NonConvergent { max_level, .. }) => Ok(SeriesSum {
            value: ExtendedSum::Infinite,
            tail_bound: 0.0,
            levels: max_level,
            converged: false,
            certified: false,
        }),
        Err(e) => Err(e),
    }
}

/// N* = ~Σ_{M*} c/c' over M* = {n : c_{n,h'} ≠ 0, d_{n,h''} = 0}, the
/// infimum of budgets with finite approximation error (displayed
/// convention).
pub fn n_star(problem: &StechkinProblem) -> Result<SeriesSum> {
    tilde_sum(
        |n: &[i64]| {
            if problem.d_weight(n) == 0.0 {
                problem.model.c_at(n)
            } else {
                0.0
            }
        },
        |n: &[i64]| {
            if problem.d_weight(n) == 0.0 {
                problem.c_weight(n)
            } else {
                1.0
            }
        },
        problem.model.index_set(),
        &problem.policy,
    )
}

/// E at μ: μ·√(~Σ c·d/(c' + μd)²).
fn error_at_mu(problem: &StechkinProblem, mu: f64) -> Result<ExtendedSum> {
    let s = tilde_sum(
        |n: &[i64]| problem.model.c_at(n) * problem.d_weight(n),
        |n: &[i64]| {
            let denom = problem.c_weight(n) + mu * problem.d_weight(n);
            denom * denom
        },
        problem.model.index_set(),
        &problem.policy,
    )?;
    Ok(match s.value {
        ExtendedSum::Finite(v) => ExtendedSum::Finite(mu * v.sqrt()),
        ExtendedSum::Infinite => ExtendedSum::Infinite,
    })
}

fn to_displayed(convention: BudgetConvention, budget: f64) -> f64 {
    match convention {
        BudgetConvention::AsDisplayed => budget,
        BudgetConvention::Sqrt => budget * budget,
    }
}

fn from_displayed(convention: BudgetConvention, displayed: f64) -> f64 {
    match convention {
        BudgetConvention::AsDisplayed => displayed,
        BudgetConvention::Sqrt => displayed.sqrt(),
    }
}

/// Solves the budget equation ‖G_μ‖ = N for μ by monotone bracketing and
/// bisection, then evaluates the approximation error at that μ.
pub fn solve_budget(problem: &StechkinProblem, budget: f64) -> Result<StechkinSolution> {
    if !(budget > 0.0) || !budget.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "budget must be positive and finite, got {budget}"
        )));
    }
    let target = to_displayed(problem.convention, budget);
    let ns_displayed = n_star(problem)?;
    let n_star_value = match ns_displayed.value {
        ExtendedSum::Finite(v) => ExtendedSum::Finite(from_displayed(problem.convention, v)),
        ExtendedSum::Infinite => ExtendedSum::Infinite,
    };
    let ns = match ns_displayed.value {
        ExtendedSum::Finite(v) => v,
        // every budget sits below an infinite N*: error is +∞
        ExtendedSum::Infinite => {
            return Ok(StechkinSolution {
                mu: f64::INFINITY,
                budget,
                error: ExtendedSum::Infinite,
                n_star: ExtendedSum::Infinite,
            })
        }
    };
    if target < ns {
        // best approximation under an infeasible budget has infinite error
        return Ok(StechkinSolution {
            mu: f64::INFINITY,
            budget,
            error: ExtendedSum::Infinite,
            n_star: n_star_value,
        });
    }
    if target == ns {
        // μ = +∞ endpoint: error over the complement of M*
        let s = tilde_sum(
            |n: &[i64]| {
                if problem.d_weight(n) == 0.0 {
                    0.0
                } else {
                    problem.model.c_at(n)
                }
            },
            |n: &[i64]| {
                if problem.d_weight(n) == 0.0 {
                    1.0
                } else {
                    problem.d_weight(n)
                }
            },
            problem.model.index_set(),
            &problem.policy,
        )?;
        return Ok(StechkinSolution {
            mu: f64::INFINITY,
            budget,
            error: s.value.sqrt(),
            n_star: n_star_value,
        });
    }
    let g0 = g_mu_norm_sq(problem, 0.0)?;
    if let ExtendedSum::Finite(g0v) = g0.value {
        if target > g0v {
            return Err(Error::BudgetOutOfRange {
                budget,
                lo: from_displayed(problem.convention, ns),
                hi: Some(from_displayed(problem.convention, g0v)),
            });
        }
        if target == g0v {
            return Ok(StechkinSolution {
                mu: 0.0,
                budget,
                error: ExtendedSum::Finite(0.0),
                n_star: n_star_value,
            });
        }
    }
    let eval = |mu: f64| -> Result<f64> {
        match g_mu_norm_sq(problem, mu)?.value {
            ExtendedSum::Finite(v) => Ok(v),
            ExtendedSum::Infinite => Err(Error::NonConvergent {
                max_level: problem.policy.max_level,
                tail_bound: f64::INFINITY,
            }),
        }
    };
    // bracket: g is nonincreasing in μ with g(∞) = N* < target
    let mut lo = 0.0f64;
    let mut hi = 1.0f64;
    while eval(hi)? > target {
        lo = hi;
        hi *= 2.0;
        if hi > 1e300 {
            return Err(Error::OptimizerStagnation {
                best: target,
                h: vec![hi],
            });
        }
    }
    if lo == 0.0 && g0.value.is_infinite() {
        // g(0) = ∞: shrink a positive lower endpoint until it encloses the target
        lo = hi / 2.0;
        while eval(lo)? < target {
            lo /= 2.0;
            if lo < 1e-300 {
                break;
            }
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let g = eval(mid)?;
        if (g - target).abs() <= 1e-13 * target {
            lo = mid;
            hi = mid;
            break;
        }
        if g > target {
            lo = mid;
        } else {
            hi = mid;
        }
        if (hi - lo) <= 1e-15 * hi {
            break;
        }
    }
    let mu = 0.5 * (lo + hi);
    Ok(StechkinSolution {
        mu,
        budget,
        error: error_at_mu(problem, mu)?,
        n_star: n_star_value,
    })
}

/// Lower-bound certificate at truncation L from the element
/// x^μ_L = Σ_{M_L} conj(⟨f,Ae_n⟩)/(c'+μd) e_n:
/// (⟨f,Ax^μ_L⟩ − N·‖x^μ_L‖_{C,h'}) / ‖x^μ_L‖_{D,h''}, with the budget N
/// converted to the norm scale (square root of the displayed sum).
pub fn stechkin_lower_bound(
    problem: &StechkinProblem,
    solution: &StechkinSolution,
    level: u64,
) -> Result<f64> {
    let mu = solution.mu;
    if !mu.is_finite() {
        return Err(Error::InvalidArgument(
            "lower bound needs a finite μ from solve_budget".into(),
        ));
    }
    let n_norm = to_displayed(problem.convention, solution.budget).sqrt();
    let mut pairing = 0.0f64;
    let mut norm_c_sq = 0.0f64;
    let mut norm_d_sq = 0.0f64;
    let set = problem.model.index_set();
    let last = set.level_count().map_or(level, |c| c.min(level));
    for lvl in 1..=last {
        set.for_each_in_level(lvl, &mut |n: &[i64]| {
            let denom = problem.c_weight(n) + mu * problem.d_weight(n);
            if denom != 0.0 {
                let c = problem.model.c_at(n);
                let x_sq = c / (denom * denom);
                pairing += c / denom;
                norm_c_sq += problem.c_weight(n) * x_sq;
                norm_d_sq += problem.d_weight(n) * x_sq;
            }
        });
    }
    if norm_d_sq == 0.0 {
        return Err(Error::InsufficientTruncation { level });
    }
    Ok((pairing - n_norm * norm_c_sq.sqrt()) / norm_d_sq.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::{build_torus, Functional, TorusSpec};
    use crate::spectral::IndexSet;
    use std::f64::consts::PI;
    use std::sync::Arc;

    fn single_mode() -> StechkinProblem {
        // c = 1, c' = 1, d = 1 on one index
        let model = SpectralModel::new(
            IndexSet::explicit(vec![vec![1]]),
            Arc::new(|_: &[i64]| 1.0),
            vec![
                Arc::new(|_: &[i64]| 1.0) as crate::spectral::Weight,
                Arc::new(|_: &[i64]| 1.0) as crate::spectral::Weight,
            ],
        )
        .unwrap();
        StechkinProblem::new(
            model,
            1,
            WeightVector::new(vec![1.0]).unwrap(),
            WeightVector::new(vec![1.0]).unwrap(),
            TailPolicy::default(),
        )
        .unwrap()
    }

    /// Torus problem with C = D¹ (weights n²) and D = D² (weights n⁴), k=0.
    fn torus_derivative_problem() -> StechkinProblem {
        let model = build_torus(&TorusSpec {
            a: 1,
            k: vec![0.0],
            r_list: vec![vec![1.0], vec![2.0]],
            functional: Functional::PointEvaluation,
            damping: None,
        })
        .unwrap();
        StechkinProblem::new(
            model,
            1,
            WeightVector::new(vec![1.0]).unwrap(),
            WeightVector::new(vec![1.0]).unwrap(),
            // 1e-7 keeps the slowest series (the μ = 0 budget, ~Σ 1/n²)
            // certifiable within the level cap
            TailPolicy::default().with_rel_tol(1e-7).with_decay(2.0),
        )
        .unwrap()
    }

    #[test]
    fn single_mode_g_norm() {
        let p = single_mode();
        let g = g_mu_norm_sq(&p, 1.0).unwrap();
        assert_eq!(g.value, ExtendedSum::Finite(0.25));
    }

    #[test]
    fn single_mode_budget_solution() {
        let p = single_mode();
        let s = solve_budget(&p, 0.25).unwrap();
        assert!((s.mu - 1.0).abs() < 1e-10);
        assert!((s.error.unwrap_finite() - 0.5).abs() < 1e-12);
        // exact reproduction at N = ‖G_0‖ = 1
        let s = solve_budget(&p, 1.0).unwrap();
        assert_eq!(s.mu, 0.0);
        assert_eq!(s.error, ExtendedSum::Finite(0.0));
    }

    #[test]
    fn single_mode_lower_bound_exact() {
        let p = single_mode();
        let s = solve_budget(&p, 0.25).unwrap();
        let lb = stechkin_lower_bound(&p, &s, 1).unwrap();
        assert!((lb - 0.5).abs() < 1e-12);
    }

    #[test]
    fn n_star_cases() {
        // all d > 0 → N* = 0
        let p = torus_derivative_problem();
        assert_eq!(n_star(&p).unwrap().value, ExtendedSum::Finite(0.0));
        // one index with c = 1, c' = 2, d = 0 → 1/2
        let model = SpectralModel::new(
            IndexSet::explicit(vec![vec![1]]),
            Arc::new(|_: &[i64]| 1.0),
            vec![
                Arc::new(|_: &[i64]| 2.0) as crate::spectral::Weight,
                Arc::new(|_: &[i64]| 0.0) as crate::spectral::Weight,
            ],
        )
        .unwrap();
        let p = StechkinProblem::new(
            model,
            1,
            WeightVector::new(vec![1.0]).unwrap(),
            WeightVector::new(vec![1.0]).unwrap(),
            TailPolicy::default(),
        )
        .unwrap();
        assert_eq!(n_star(&p).unwrap().value, ExtendedSum::Finite(0.5));
    }

    #[test]
    fn basel_budget_at_mu_zero() {
        // C = D¹: ‖G_0‖ = Σ_{Z_*} 1/n² = π²/3
        let p = torus_derivative_problem();
        let g = g_mu_norm_sq(&p, 0.0).unwrap();
        let oracle = PI * PI / 3.0;
        let got = g.value.unwrap_finite();
        assert!((got - oracle).abs() < 1e-6 * oracle, "{got}");
    }

    #[test]
    fn g_monotone_in_mu() {
        let p = torus_derivative_problem();
        let mut prev = f64::INFINITY;
        for i in 0..60 {
            let mu = 1e-3 * 1.3f64.powi(i);
            let g = g_mu_norm_sq(&p, mu).unwrap().value.unwrap_finite();
            assert!(g <= prev * (1.0 + 1e-14), "mu={mu}");
            prev = g;
        }
    }

    #[test]
    fn budget_roundtrip_and_error_decreasing() {
        let p = torus_derivative_problem();
        let g0 = g_mu_norm_sq(&p, 0.0).unwrap().value.unwrap_finite();
        let mut prev_err = f64::INFINITY;
        for i in 1..=10 {
            let budget = g0 * i as f64 / 11.0;
            let s = solve_budget(&p, budget).unwrap();
            let g = g_mu_norm_sq(&p, s.mu).unwrap().value.unwrap_finite();
            assert!((g - budget).abs() <= 1e-10 * budget, "budget {budget}: {g}");
            let e = s.error.unwrap_finite();
            assert!(e < prev_err, "E must decrease with the budget");
            prev_err = e;
        }
    }

    #[test]
    fn infeasible_budget_is_infinite_error() {
        let model = SpectralModel::new(
            IndexSet::explicit(vec![vec![1]]),
            Arc::new(|_: &[i64]| 1.0),
            vec![
                Arc::new(|_: &[i64]| 1.0) as crate::spectral::Weight,
                Arc::new(|_: &[i64]| 0.0) as crate::spectral::Weight,
            ],
        )
        .unwrap();
        let p = StechkinProblem::new(
            model,
            1,
            WeightVector::new(vec![1.0]).unwrap(),
            WeightVector::new(vec![1.0]).unwrap(),
            TailPolicy::default(),
        )
        .unwrap();
        // N* = 1; any budget below it is infeasible
        let s = solve_budget(&p, 0.5).unwrap();
        assert_eq!(s.error, ExtendedSum::Infinite);
    }

    #[test]
    fn sqrt_convention_consistency() {
        let p = single_mode().with_convention(BudgetConvention::Sqrt);
        // N = 1/2 in norm scale ⇒ displayed 1/4 ⇒ μ = 1
        let s = solve_budget(&p, 0.5).unwrap();
        assert!((s.mu - 1.0).abs() < 1e-10);
        assert!((s.error.unwrap_finite() - 0.5).abs() < 1e-12);
        let lb = stechkin_lower_bound(&p, &s, 1).unwrap();
        assert!((lb - 0.5).abs() < 1e-12);
    }

    #[test]
    fn lower_bound_below_error_and_converging() {
        let p = torus_derivative_problem();
        let g0 = g_mu_norm_sq(&p, 0.0).unwrap().value.unwrap_finite();
        let s = solve_budget(&p, 0.4 * g0).unwrap();
        let e = s.error.unwrap_finite();
        let mut prev = f64::NEG_INFINITY;
        for level in [10u64, 100, 1_000, 10_000] {
            let lb = stechkin_lower_bound(&p, &s, level).unwrap();
            // E itself carries the series tolerance; compare relatively
            assert!(lb <= e * (1.0 + 1e-6), "lb {lb} vs E {e}");
            assert!(lb >= prev - 1e-12);
            prev = lb;
        }
        assert!((e - prev).abs() <= 1e-6 * e, "gap {} at L=10⁴", e - prev);
    }
}
