//! Index sets, truncation schedules, combined weights and the tilde-sum /
//! tilde-sup evaluation with the +infinity convention: a ratio family
//! {a_n / b_n} sums to +infinity as soon as some index carries a_n != 0
//! with b_n = 0; indices with b_n = 0 and a_n = 0 are skipped.

use std::sync::Arc;

use crate::error::{Error, Result};

/// Weight stream over a countable index set. Indices are lattice points
/// handed to the closure as a slice of coordinates.
pub type Weight = Arc<dyn Fn(&[i64]) -> f64 + Send + Sync>;

/// A nonnegative extended real: the value of a tilde-sum or tilde-sup.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ExtendedSum {
    Finite(f64),
    Infinite,
}

impl ExtendedSum {
    pub fn finite(self) -> Option<f64> {
        match self {
            ExtendedSum::Finite(v) => Some(v),
            ExtendedSum::Infinite => None,
        }
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, ExtendedSum::Infinite)
    }

    pub fn sqrt(self) -> ExtendedSum {
        match self {
            ExtendedSum::Finite(v) => ExtendedSum::Finite(v.sqrt()),
            ExtendedSum::Infinite => ExtendedSum::Infinite,
        }
    }

    /// Unwraps the finite value, panicking on +infinity. Test helper.
    pub fn unwrap_finite(self) -> f64 {
        self.finite().expect("expected a finite extended sum")
    }
}

impl std::fmt::Display for ExtendedSum {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ExtendedSum::Finite(v) => write!(f, "{v}"),
            ExtendedSum::Infinite => write!(f, "inf"),
        }
    }
}

/// Membership rule of a countable index set.
#[derive(Clone, Debug)]
pub enum Membership {
    /// {1, 2, 3, ...}; level N contributes the single index {N}.
    PositiveIntegers,
    /// Z^d with every coordinate nonzero; level N is the box shell
    /// {n : 0 < |n_i| <= N for all i, max_i |n_i| = N}.
    Lattice { dim: usize },
    /// A finite, explicitly listed set; everything sits at level 1.
    Explicit(Vec<Vec<i64>>),
}

/// An index set together with its nested truncation schedule M_1 ⊆ M_2 ⊆ …
#[derive(Clone, Debug)]
pub struct IndexSet {
    membership: Membership,
}

impl IndexSet {
    pub fn positive_integers() -> Self {
        IndexSet {
            membership: Membership::PositiveIntegers,
        }
    }

    pub fn lattice(dim: usize) -> Self {
        assert!(dim >= 1, "lattice dimension must be >= 1");
        IndexSet {
            membership: Membership::Lattice { dim },
        }
    }

    pub fn explicit(list: Vec<Vec<i64>>) -> Self {
        IndexSet {
            membership: Membership::Explicit(list),
        }
    }

    pub fn membership(&self) -> &Membership {
        &self.membership
    }

    pub fn dimension(&self) -> usize {
        match &self.membership {
            Membership::PositiveIntegers => 1,
            Membership::Lattice { dim } => *dim,
            Membership::Explicit(list) => list.first().map_or(1, |v| v.len()),
        }
    }

    pub fn contains(&self, n: &[i64]) -> bool {
        match &self.membership {
            Membership::PositiveIntegers => n.len() == 1 && n[0] >= 1,
            Membership::Lattice { dim } => n.len() == *dim && n.iter().all(|&c| c != 0),
            Membership::Explicit(list) => list.iter().any(|v| v.as_slice() == n),
        }
    }

    /// Number of truncation levels, when finite (explicit sets only).
    pub fn level_count(&self) -> Option<u64> {
        match &self.membership {
            Membership::Explicit(_) => Some(1),
            _ => None,
        }
    }

    /// Visits every index in M_level \ M_{level-1}.
    pub fn for_each_in_level<F: FnMut(&[i64])>(&self, level: u64, f: &mut F) {
        debug_assert!(level >= 1);
        match &self.membership {
            Membership::PositiveIntegers => {
                f(&[level as i64]);
            }
            Membership::Lattice { dim } => {
                // stack scratch: the shell walker runs ~10^8 times on the
                // longest series and must not touch the heap
                if *dim == 1 {
                    // unrolled: the recursive walker is too slow at 10^8 calls
                    let n = level as i64;
                    f(&[n]);
                    f(&[-n]);
                } else if *dim <= 8 {
                    let mut scratch = [0i64; 8];
                    lattice_shell(*dim, level as i64, 0, false, &mut scratch[..*dim], f);
                } else {
                    let mut scratch = vec![0i64; *dim];
                    lattice_shell(*dim, level as i64, 0, false, &mut scratch, f);
                }
            }
            Membership::Explicit(list) => {
                if level == 1 {
                    for v in list {
                        f(v);
                    }
                }
            }
        }
    }

    /// All indices in M_level, materialized.
    pub fn indices_up_to(&self, level: u64) -> Vec<Vec<i64>> {
        let mut out = Vec::new();
        let last = self.level_count().map_or(level, |c| c.min(level));
        for lvl in 1..=last {
            self.for_each_in_level(lvl, &mut |n: &[i64]| out.push(n.to_vec()));
        }
        out
    }
}

/// Enumerates lattice points with all coordinates in [-n, -1] ∪ [1, n] and
/// at least one coordinate of absolute value n, without visiting the
/// interior of the box.
fn lattice_shell<F: FnMut(&[i64])>(
    dim: usize,
    n: i64,
    pos: usize,
    hit: bool,
    scratch: &mut [i64],
    f: &mut F,
) {
    if pos == dim {
        f(scratch);
        return;
    }
    let last = pos + 1 == dim;
    if last && !hit {
        // remaining coordinate must realize the shell radius
        for v in [-n, n] {
            scratch[pos] = v;
            f(scratch);
        }
        return;
    }
    for v in 1..=n {
        for s in [-v, v] {
            scratch[pos] = s;
            lattice_shell(dim, n, pos + 1, hit || v == n, scratch, f);
        }
    }
}

/// Strictly positive weights h = (h_0, …, h_m) over the constraint operators.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightVector(Vec<f64>);

impl WeightVector {
    pub fn new(h: Vec<f64>) -> Result<Self> {
        if h.is_empty() || h.iter().any(|&v| !(v > 0.0) || !v.is_finite()) {
            return Err(Error::InvalidWeightVector {
                expected: h.len().max(1),
                got: h,
            });
        }
        Ok(WeightVector(h))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn scaled(&self, t: f64) -> Result<Self> {
        WeightVector::new(self.0.iter().map(|&v| t * v).collect())
    }
}

/// Power-law weight description: c(n) = fold · damping(n) · Π |n_i|^{two_k_i},
/// b_j(n) = Π |n_i|^{two_r[j]_i}. Enables an allocation-free fast path in
/// the series kernels for the torus / g-power catalog models.
#[derive(Clone, Debug)]
pub struct PowerWeights {
    pub two_k: Vec<f64>,
    pub two_r: Vec<Vec<f64>>,
    /// Optional per-axis exponential damping rates ρ_i applied to c as
    /// Π exp(-2 ρ_i |n_i|).
    pub damping: Option<Vec<f64>>,
    pub fold: f64,
}

impl PowerWeights {
    #[inline(always)]
    pub fn c(&self, n: &[i64]) -> f64 {
        let mut v = self.fold;
        for (i, &e) in self.two_k.iter().enumerate() {
            v *= crate::special::pow_weight(n[i].unsigned_abs() as f64, e);
        }
        if let Some(rho) = &self.damping {
            for (i, &r) in rho.iter().enumerate() {
                v *= (-2.0 * r * n[i].unsigned_abs() as f64).exp();
            }
        }
        v
    }

    #[inline(always)]
    pub fn b(&self, j: usize, n: &[i64]) -> f64 {
        let mut v = 1.0;
        for (i, &e) in self.two_r[j].iter().enumerate() {
            v *= crate::special::pow_weight(n[i].unsigned_abs() as f64, e);
        }
        v
    }

    #[inline(always)]
    pub fn combined(&self, h: &[f64], n: &[i64]) -> f64 {
        let mut v = 0.0;
        for (j, &hj) in h.iter().enumerate() {
            v += hj * self.b(j, n);
        }
        v
    }
}

/// Indexed family of nonnegative weights: c(n) = |⟨f, Ae_n⟩|² and
/// b_j(n) = ‖B_j e_n‖²  for j = 0..m.
#[derive(Clone)]
pub struct SpectralModel {
    index_set: IndexSet,
    c: Weight,
    b: Vec<Weight>,
    /// Set when the A-images {Ae_n} are pairwise orthogonal, which is what
    /// licenses the sup reduction of the HLP constant.
    orthogonal_images: bool,
    power: Option<PowerWeights>,
}

impl std::fmt::Debug for SpectralModel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SpectralModel")
            .field("index_set", &self.index_set)
            .field("m", &(self.b.len() - 1))
            .field("orthogonal_images", &self.orthogonal_images)
            .field("power", &self.power)
            .finish()
    }
}

impl SpectralModel {
    pub fn new(index_set: IndexSet, c: Weight, b: Vec<Weight>) -> Result<Self> {
        if b.is_empty() {
            return Err(Error::InvalidArgument(
                "at least one constraint operator weight b_0 is required".into(),
            ));
        }
        let model = SpectralModel {
            index_set,
            c,
            b,
            orthogonal_images: false,
            power: None,
        };
        model.validate_samples()?;
        Ok(model)
    }

    pub fn with_orthogonal_images(mut self, flag: bool) -> Self {
        self.orthogonal_images = flag;
        self
    }

    pub(crate) fn with_power_weights(mut self, pw: PowerWeights) -> Self {
        self.power = Some(pw);
        self
    }

    /// NaN / negative weights are rejected up front on the first few
    /// truncation levels; the series kernels re-check lazily as they scan.
    fn validate_samples(&self) -> Result<()> {
        let mut bad: Option<(Vec<i64>, f64)> = None;
        let last = self.index_set.level_count().unwrap_or(4).min(4);
        for lvl in 1..=last {
            self.index_set.for_each_in_level(lvl, &mut |n: &[i64]| {
                if bad.is_some() {
                    return;
                }
                let cv = (self.c)(n);
                if !(cv >= 0.0) || !cv.is_finite() {
                    bad = Some((n.to_vec(), cv));
                    return;
                }
                for bj in &self.b {
                    let bv = bj(n);
                    if !(bv >= 0.0) || !bv.is_finite() {
                        bad = Some((n.to_vec(), bv));
                        return;
                    }
                }
            });
        }
        match bad {
            Some((index, value)) => Err(Error::InvalidWeight { index, value }),
            None => Ok(()),
        }
    }

    pub fn index_set(&self) -> &IndexSet {
        &self.index_set
    }

    /// Count of constraint operators minus one.
    pub fn m(&self) -> usize {
        self.b.len() - 1
    }

    pub fn orthogonal_images(&self) -> bool {
        self.orthogonal_images
    }

    pub fn power_weights(&self) -> Option<&PowerWeights> {
        self.power.as_ref()
    }

    pub fn c_at(&self, n: &[i64]) -> f64 {
        match &self.power {
            Some(pw) => pw.c(n),
            None => (self.c)(n),
        }
    }

    pub fn b_at(&self, j: usize, n: &[i64]) -> f64 {
        match &self.power {
            Some(pw) => pw.b(j, n),
            None => self.b[j](n),
        }
    }

    /// b_{n,h} = Σ_j h_j ‖B_j e_n‖².
    pub fn combined_weight(&self, h: &WeightVector, n: &[i64]) -> Result<f64> {
        if h.len() != self.b.len() {
            return Err(Error::InvalidWeightVector {
                expected: self.b.len(),
                got: h.as_slice().to_vec(),
            });
        }
        if !self.index_set.contains(n) {
            return Err(Error::IndexOutsideSet { index: n.to_vec() });
        }
        Ok(self.combined_weight_unchecked(h.as_slice(), n))
    }

    #[inline(always)]
    pub(crate) fn combined_weight_unchecked(&self, h: &[f64], n: &[i64]) -> f64 {
        match &self.power {
            Some(pw) => pw.combined(h, n),
            None => {
                let mut v = 0.0;
                for (j, bj) in self.b.iter().enumerate() {
                    v += h[j] * bj(n);
                }
                v
            }
        }
    }
}

/// Stopping rule for truncated series: certify the dropped tail against a
/// power-law integral majorant driven by the declared decay exponent.
#[derive(Clone, Debug)]
pub struct TailPolicy {
    /// Stop once the last block and the tail majorant both fall below
    /// rel_tol · (current partial sum).
    pub rel_tol: f64,
    /// Hard cap on the truncation level; exceeding it is reported as
    /// non-convergence, never silently truncated.
    pub max_level: u64,
    /// Declared asymptotic decay of the ratio a_n / b_n ~ |n|^{-decay}.
    /// When absent the decay is estimated from the scanned blocks and the
    /// certificate is marked heuristic.
    pub decay: Option<f64>,
    /// Levels scanned unconditionally before the stopping rule may fire.
    pub min_levels: u64,
}

impl Default for TailPolicy {
    fn default() -> Self {
        TailPolicy {
            rel_tol: 1e-10,
            max_level: 10_000_000,
            decay: None,
            min_levels: 32,
        }
    }
}

impl TailPolicy {
    pub fn with_rel_tol(mut self, rel_tol: f64) -> Self {
        self.rel_tol = rel_tol;
        self
    }

    pub fn with_max_level(mut self, max_level: u64) -> Self {
        self.max_level = max_level;
        self
    }

    pub fn with_decay(mut self, decay: f64) -> Self {
        self.decay = Some(decay);
        self
    }
}

/// Outcome of a truncated tilde-sum / tilde-sup.
#[derive(Clone, Debug)]
pub struct SeriesSum {
    pub value: ExtendedSum,
    /// Certified upper bound on the dropped tail (0 for explicit sets and
    /// for +infinity outcomes).
    pub tail_bound: f64,
    /// Truncation level reached.
    pub levels: u64,
    /// True when the stopping rule fired (or the set was exhausted);
    /// false means the max level was hit first.
    pub converged: bool,
    /// True when the tail bound rests on a declared decay exponent rather
    /// than a measured one.
    pub certified: bool,
}

impl SeriesSum {
    fn infinite(levels: u64) -> Self {
        SeriesSum {
            value: ExtendedSum::Infinite,
            tail_bound: 0.0,
            levels,
            converged: true,
            certified: true,
        }
    }
}

struct BlockState {
    partial: f64,
    /// Kahan compensation: naive accumulation absorbs blocks below
    /// partial·ε, which caps long series at ~1e-8 absolute error.
    comp: f64,
    zero_run: u64,
    checkpoint_level: u64,
    checkpoint_block: f64,
}

impl BlockState {
    #[inline(always)]
    fn add(&mut self, block: f64) {
        let y = block - self.comp;
        let t = self.partial + y;
        self.comp = (t - self.partial) - y;
        self.partial = t;
    }
}

/// Keeps the weight-validation failure path (which allocates) out of the
/// per-point visitor so the hot loop stays small enough to inline.
#[cold]
#[inline(never)]
fn record_invalid(slot: &mut Option<(Vec<i64>, f64)>, n: &[i64], value: f64) {
    if slot.is_none() {
        *slot = Some((n.to_vec(), value));
    }
}

/// Tail majorant by integral comparison: block sums decaying like L^{-q}
/// past level N obey  Σ_{L>N} block(L) ≤ block(N) · N / (q − 1).
fn tail_majorant(block: f64, level: u64, q: f64) -> Option<f64> {
    if q > 1.0 {
        Some(block * level as f64 / (q - 1.0))
    } else {
        None
    }
}

fn block_decay_exponent(policy: &TailPolicy, dim: usize, state: &BlockState, block: f64, level: u64) -> (Option<f64>, bool) {
    if let Some(p) = policy.decay {
        // ratio decay |n|^{-p}; a level-N shell in Z^d carries O(N^{d-1}) terms
        return (Some(p - (dim as f64 - 1.0)), true);
    }
    // measured estimate between the last power-of-two checkpoint and here
    if state.checkpoint_block > 0.0 && block > 0.0 && level > state.checkpoint_level {
        let q = (state.checkpoint_block / block).ln() / (level as f64 / state.checkpoint_level as f64).ln();
        (Some(0.9 * q), false)
    } else {
        (None, false)
    }
}

/// Tilde-sum of a_n / b_n over the truncation schedule of `set`.
pub fn tilde_sum<FA, FB>(num: FA, den: FB, set: &IndexSet, policy: &TailPolicy) -> Result<SeriesSum>
where
    FA: Fn(&[i64]) -> f64,
    FB: Fn(&[i64]) -> f64,
{
    let dim = set.dimension();
    let mut state = BlockState {
        partial: 0.0,
        comp: 0.0,
        zero_run: 0,
        checkpoint_level: 1,
        checkpoint_block: 0.0,
    };
    let finite_levels = set.level_count();
    let last_level = finite_levels.unwrap_or(policy.max_level);
    for level in 1..=last_level {
        let mut block = 0.0f64;
        let mut infinite = false;
        let mut invalid: Option<(Vec<i64>, f64)> = None;
        set.for_each_in_level(level, &mut |n: &[i64]| {
            if infinite || invalid.is_some() {
                return;
            }
            let a = num(n);
            let b = den(n);
            if !(a >= 0.0) || !a.is_finite() {
                record_invalid(&mut invalid, n, a);
                return;
            }
            if !(b >= 0.0) || !b.is_finite() {
                record_invalid(&mut invalid, n, b);
                return;
            }
            if b == 0.0 {
                if a != 0.0 {
                    infinite = true;
                }
            } else {
                block += a / b;
            }
        });
        if let Some((index, value)) = invalid {
            return Err(Error::InvalidWeight { index, value });
        }
        if infinite {
            return Ok(SeriesSum::infinite(level));
        }
        state.add(block);
        if block == 0.0 {
            state.zero_run += 1;
        } else {
            state.zero_run = 0;
        }

        if let Some(total) = finite_levels {
            if level == total {
                return Ok(SeriesSum {
                    value: ExtendedSum::Finite(state.partial),
                    tail_bound: 0.0,
                    levels: level,
                    converged: true,
                    certified: true,
                });
            }
        }

        if level >= policy.min_levels {
            if state.partial == 0.0 {
                // all-zero numerators: stop after a sustained run of empty blocks
                if state.zero_run >= policy.min_levels {
                    return Ok(SeriesSum {
                        value: ExtendedSum::Finite(0.0),
                        tail_bound: 0.0,
                        levels: level,
                        converged: true,
                        certified: policy.decay.is_some(),
                    });
                }
            } else if block <= policy.rel_tol * state.partial {
                let (q, certified) = block_decay_exponent(policy, dim, &state, block, level);
                if let Some(tail) = q.and_then(|q| tail_majorant(block, level, q)) {
                    if tail <= policy.rel_tol * state.partial {
                        return Ok(SeriesSum {
                            value: ExtendedSum::Finite(state.partial),
                            tail_bound: tail,
                            levels: level,
                            converged: true,
                            certified,
                        });
                    }
                }
            }
        }

        if level.is_power_of_two() && block > 0.0 {
            state.checkpoint_level = level;
            state.checkpoint_block = block;
        }
    }
    Err(Error::NonConvergent {
        max_level: last_level,
        tail_bound: f64::INFINITY,
    })
}

/// Tilde-sup of a_n / b_n. For eventually monotone ratios the scan stops
/// once the per-level maxima have stayed below the incumbent for a
/// sustained confirmation window.
pub fn tilde_sup<FA, FB>(num: FA, den: FB, set: &IndexSet, policy: &TailPolicy) -> Result<SeriesSum>
where
    FA: Fn(&[i64]) -> f64,
    FB: Fn(&[i64]) -> f64,
{
    const CONFIRM: u64 = 16;
    let mut best = 0.0f64;
    let mut below_run = 0u64;
    let finite_levels = set.level_count();
    let last_level = finite_levels.unwrap_or(policy.max_level);
    for level in 1..=last_level {
        let mut block_max = 0.0f64;
        let mut infinite = false;
        let mut invalid: Option<(Vec<i64>, f64)> = None;
        set.for_each_in_level(level, &mut |n: &[i64]| {
            if infinite || invalid.is_some() {
                return;
            }
            let a = num(n);
            let b = den(n);
            if !(a >= 0.0) || !a.is_finite() {
                record_invalid(&mut invalid, n, a);
                return;
            }
            if !(b >= 0.0) || !b.is_finite() {
                record_invalid(&mut invalid, n, b);
                return;
            }
            if b == 0.0 {
                if a != 0.0 {
                    infinite = true;
                }
            } else {
                block_max = block_max.max(a / b);
            }
        });
        if let Some((index, value)) = invalid {
            return Err(Error::InvalidWeight { index, value });
        }
        if infinite {
            return Ok(SeriesSum::infinite(level));
        }
        if block_max > best {
            best = block_max;
            below_run = 0;
        } else {
            below_run += 1;
        }

        if let Some(total) = finite_levels {
            if level == total {
                return Ok(SeriesSum {
                    value: ExtendedSum::Finite(best),
                    tail_bound: 0.0,
                    levels: level,
                    converged: true,
                    certified: true,
                });
            }
        }

        if level >= policy.min_levels && below_run >= CONFIRM && (best == 0.0 || block_max < best) {
            return Ok(SeriesSum {
                value: ExtendedSum::Finite(best),
                tail_bound: 0.0,
                levels: level,
                converged: true,
                certified: policy.decay.is_some(),
            });
        }
    }
    Err(Error::NonConvergent {
        max_level: last_level,
        tail_bound: f64::INFINITY,
    })
}
