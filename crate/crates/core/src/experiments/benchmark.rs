//! Rates with full CSI at the base station and unbounded blocklength.
//!
//! The inputs are the instantaneous single-user SIRs
//! `rho_i = h_i r_i^-alpha P_T / I_i`. The user with the smaller `rho` is
//! decoded first, and the post-SIC SIRs at split `beta` have the same form
//! as the CSI-free thresholds with `rho` in place of `phi`.

use crate::error::Result;
use crate::pair::{
    equal_rate_gamma, oma_rates, sum_rate_gamma_tilde_rational, Objective, OrderedPair,
};

/// Golden-section search tolerance on `beta`.
pub const BETA_TOL: f64 = 1e-6;

/// Maximizer of `f` on `[lo, hi]`, comparing the golden-section result with
/// both end points.
pub fn golden_section_max<F>(f: F, lo: f64, hi: f64, tol: f64) -> Result<(f64, f64)>
where
    F: Fn(f64) -> Result<f64>,
{
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (lo, hi);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (f(c)?, f(d)?);
    while b - a > tol {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d)?;
        }
    }
    let mid = 0.5 * (a + b);
    let mut best = (mid, f(mid)?);
    for x in [lo, hi] {
        let v = f(x)?;
        if v > best.1 {
            best = (x, v);
        }
    }
    Ok(best)
}

/// Per-user rate with both SIRs equalized.
pub fn equal_rate(rho_a: f64, rho_b: f64, mu: f64) -> Result<f64> {
    let pair = OrderedPair::new(rho_a, rho_b)?;
    Ok(equal_rate_gamma(&pair, mu)?.ln_1p() / std::f64::consts::LN_2)
}

/// Best split in `[1/2, 1]` and the resulting sum rate.
pub fn sum_rate(rho_a: f64, rho_b: f64, mu: f64) -> Result<(f64, f64)> {
    let pair = OrderedPair::new(rho_a, rho_b)?;
    let (beta, tilde) = golden_section_max(
        |b| sum_rate_gamma_tilde_rational(&pair, mu, b),
        0.5,
        1.0,
        BETA_TOL,
    )?;
    Ok((beta, tilde.log2()))
}

/// Equal-partition OMA: the per-user rate for equal-rate, the sum of both
/// rates otherwise.
pub fn oma_rate(rho_a: f64, rho_b: f64, objective: Objective) -> Result<f64> {
    let pair = OrderedPair::new(rho_a, rho_b)?;
    let [r1, r2] = oma_rates(&pair, objective);
    Ok(match objective {
        Objective::EqualRate => r1,
        Objective::MaxSumRate => r1 + r2,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pair::user_gammas;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn golden_section_finds_interior_and_end_maxima() {
        let (x, v) = golden_section_max(|x| Ok(-(x - 0.7) * (x - 0.7)), 0.5, 1.0, 1e-9).unwrap();
        assert!((x - 0.7).abs() < 1e-6 && v <= 0.0);
        let (x, _) = golden_section_max(|x| Ok(x), 0.5, 1.0, 1e-6).unwrap();
        assert_eq!(x, 1.0);
        let (x, _) = golden_section_max(|x| Ok(-x), 0.5, 1.0, 1e-6).unwrap();
        assert_eq!(x, 0.5);
    }

    #[test]
    fn oma_rows() {
        // 1/2 log2(1 + 3) = 1, 1/2 log2(4 * 16) = 3
        assert_relative_eq!(
            oma_rate(3.0, 15.0, Objective::EqualRate).unwrap(),
            1.0,
            max_relative = 1e-15
        );
        assert_relative_eq!(
            oma_rate(15.0, 3.0, Objective::MaxSumRate).unwrap(),
            3.0,
            max_relative = 1e-15
        );
    }

    #[test]
    fn perfect_sic_sum_rate_uses_half_split() {
        let (beta, rate) = sum_rate(2.0, 9.0, 0.0).unwrap();
        assert_eq!(beta, 0.5);
        let pair = OrderedPair::new(2.0, 9.0).unwrap();
        let [g1, g2] = user_gammas(&pair, 0.0, 0.5).unwrap();
        assert_relative_eq!(rate, ((1.0 + g1) * (1.0 + g2)).log2(), max_relative = 1e-14);
    }

    proptest! {
        #[test]
        fn sum_rate_dominates_grid(a in 0.01f64..100.0, b in 0.01f64..100.0, mu in 0.0f64..=1.0) {
            let (_, best) = sum_rate(a, b, mu).unwrap();
            let pair = OrderedPair::new(a, b).unwrap();
            for k in 0..=100 {
                let beta = 0.5 + 0.005 * k as f64;
                let v = sum_rate_gamma_tilde_rational(&pair, mu, beta).unwrap().log2();
                prop_assert!(best >= v - 1e-9);
            }
        }

        #[test]
        fn equal_rate_equalizes(a in 0.01f64..100.0, b in 0.01f64..100.0, mu in 0.0f64..=1.0) {
            let pair = OrderedPair::new(a, b).unwrap();
            let beta = crate::pair::equal_rate_beta(&pair, mu).unwrap();
            let [g1, g2] = user_gammas(&pair, mu, beta).unwrap();
            let r = equal_rate(a, b, mu).unwrap();
            prop_assert!((r - g1.ln_1p() / std::f64::consts::LN_2).abs() <= 1e-9 * r.max(1e-3));
            prop_assert!((g1 - g2).abs() <= 1e-9 * g1);
        }
    }
}
