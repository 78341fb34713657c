//! Deterministic derivative-free maximization for the weight-vector
//! suprema. Plain Nelder–Mead with a fixed initial simplex and fixed
//! restart offsets — every run visits identical points, so results are
//! reproducible bit for bit.

/// Softmax onto the open simplex; the h-objectives are scale-invariant so
/// optimizing over softmax(θ) loses nothing and keeps every h strictly
/// positive.
pub fn softmax(theta: &[f64]) -> Vec<f64> {
    let top = theta.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = theta.iter().map(|&t| (t - top).exp()).collect();
    let sum: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / sum).collect()
}

/// Maximizes f by Nelder–Mead from `x0` with initial edge length `step`.
/// Returns the best point and value seen. Deterministic: no randomness,
/// ties broken by index order.
pub fn nelder_mead_max<F: Fn(&[f64]) -> f64>(
    f: F,
    x0: &[f64],
    step: f64,
    max_iter: usize,
    tol: f64,
) -> (Vec<f64>, f64) {
    let dim = x0.len();
    let g = |x: &[f64]| -f(x);
    // initial simplex: x0 plus axis offsets
    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(dim + 1);
    simplex.push((x0.to_vec(), g(x0)));
    for i in 0..dim {
        let mut v = x0.to_vec();
        v[i] += step;
        let fv = g(&v);
        simplex.push((v, fv));
    }
    let (alpha, gamma, rho, sigma) = (1.0, 2.0, 0.5, 0.5);

    for _ in 0..max_iter {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let spread = simplex[dim].1 - simplex[0].1;
        if spread.abs() <= tol * (1.0 + simplex[0].1.abs()) {
            break;
        }
        let mut centroid = vec![0.0; dim];
        for (v, _) in &simplex[..dim] {
            for (c, x) in centroid.iter_mut().zip(v) {
                *c += x / dim as f64;
            }
        }
        let worst = simplex[dim].clone();
        let mk = |t: f64| -> Vec<f64> {
            centroid
                .iter()
                .zip(&worst.0)
                .map(|(&c, &w)| c + t * (c - w))
                .collect()
        };
        let refl = mk(alpha);
        let f_refl = g(&refl);
        if f_refl < simplex[0].1 {
            let exp = mk(gamma);
            let f_exp = g(&exp);
            simplex[dim] = if f_exp < f_refl { (exp, f_exp) } else { (refl, f_refl) };
            continue;
        }
        if f_refl < simplex[dim - 1].1 {
            simplex[dim] = (refl, f_refl);
            continue;
        }
        let contr = mk(-rho);
        let f_contr = g(&contr);
        if f_contr < simplex[dim].1 {
            simplex[dim] = (contr, f_contr);
            continue;
        }
        // shrink toward the best vertex
        let best = simplex[0].0.clone();
        for entry in simplex.iter_mut().skip(1) {
            for (x, &b) in entry.0.iter_mut().zip(&best) {
                *x = b + sigma * (*x - b);
            }
            entry.1 = g(&entry.0);
        }
    }
    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    let (x, fx) = simplex.swap_remove(0);
    (x, -fx)
}

/// Fixed restart offsets for a `dim`-dimensional search: the origin plus
/// deterministic axis/diagonal perturbations, 8 in total.
pub fn restart_seeds(dim: usize) -> Vec<Vec<f64>> {
    let mut seeds = vec![vec![0.0; dim]];
    for i in 0..dim.min(3) {
        let mut v = vec![0.0; dim];
        v[i] = 2.0;
        seeds.push(v.clone());
        v[i] = -2.0;
        seeds.push(v);
    }
    seeds.push(vec![1.0; dim]);
    seeds.push(vec![-1.0; dim]);
    seeds.truncate(8);
    seeds
}
