//! Small special-function kernel: log-Gamma via the Lanczos approximation.

/// ln(Gamma(x)) for x > 0, Lanczos approximation with g = 5 and 6 terms.
///
/// Relative accuracy is about 2e-10 over the positive axis, which is enough
/// for multiplicity ratios up to j ~ 1e6 without overflow.
pub fn ln_gamma(x: f64) -> f64 {
    debug_assert!(x > 0.0, "ln_gamma requires x > 0, got {x}");
    const COEFFS: [f64; 6] = [
        76.18009172947146,
        -86.50532032941677,
        24.01409824083091,
        -1.231739572450155,
        0.1208650973866179e-2,
        -0.5395239384953e-5,
    ];
    let tmp = x + 5.5;
    let log = (x + 0.5) * tmp.ln() - tmp;
    let mut a = 1.000000000190015;
    let mut denom = x;
    for coeff in &COEFFS {
        denom += 1.0;
        a += coeff / denom;
    }
    log + (2.5066282746310005 * a / x).ln()
}

/// `base^exp` with the convention 0^0 := 1 and fast paths for the
/// exponents that dominate the spectral weight streams.
#[inline(always)]
pub fn pow_weight(base: f64, exp: f64) -> f64 {
    if exp == 0.0 {
        1.0
    } else if exp == 1.0 {
        base
    } else if exp == 2.0 {
        base * base
    } else if exp == 4.0 {
        let s = base * base;
        s * s
    } else {
        base.powf(exp)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ln_gamma_matches_factorials() {
        let mut fact = 1.0f64;
        for n in 1..20u32 {
            if n > 1 {
                fact *= (n - 1) as f64;
            }
            let rel = (ln_gamma(n as f64) - fact.ln()).abs() / fact.ln().abs().max(1.0);
            assert!(rel < 1e-10, "n = {n}, rel = {rel}");
        }
    }

    #[test]
    fn ln_gamma_half_integer() {
        // Gamma(1/2) = sqrt(pi)
        let expect = std::f64::consts::PI.sqrt().ln();
        assert!((ln_gamma(0.5) - expect).abs() < 1e-10);
    }

    #[test]
    fn pow_weight_zero_convention() {
        assert_eq!(pow_weight(0.0, 0.0), 1.0);
        assert_eq!(pow_weight(0.0, 2.0), 0.0);
        assert_eq!(pow_weight(3.0, 2.0), 9.0);
        assert_eq!(pow_weight(2.0, 0.5), 2.0f64.powf(0.5));
    }
}
