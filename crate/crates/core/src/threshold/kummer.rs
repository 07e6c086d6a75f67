//! The confluent hypergeometric function `1F1(-delta; 1-delta; -s)`.
//!
//! Its reciprocal is the Laplace transform of the sum of relative path gains
//! `sum_j (r / r_j)^alpha` seen from a user served by its nearest BS in a
//! Poisson network. Three evaluation routes are used:
//!
//! * `|s| <= 1`: the defining series `1 - delta sum_k (-s)^k / (k! (k - delta))`;
//! * real `1 < s <= 40`: the Kummer transform `e^-s sum_k s^k / (1-delta)_k`,
//!   whose terms are all positive;
//! * otherwise: `Gamma(1-delta) s^delta + e^-s (1 - s C(s))`, where `C` is
//!   the continued fraction of the upper incomplete gamma function.

use num_complex::Complex64;
use statrs::function::gamma::gamma;

use crate::error::{Error, Result};

const MAX_TERMS: usize = 10_000;
const TOL: f64 = 1e-16;

fn check_delta(delta: f64) -> Result<()> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::invalid(
            "delta",
            format!("must lie in (0, 1), got {delta}"),
        ));
    }
    Ok(())
}

/// `1F1(-delta; 1-delta; -s)` for real `s >= 0`.
pub fn kummer_1f1(delta: f64, s: f64) -> Result<f64> {
    check_delta(delta)?;
    if !(s >= 0.0 && s.is_finite()) {
        return Err(Error::invalid(
            "s",
            format!("must be finite and non-negative, got {s}"),
        ));
    }
    if s <= 1.0 {
        Ok(direct_series(delta, Complex64::new(s, 0.0))?.re)
    } else if s <= 40.0 {
        transformed_series(delta, s)
    } else {
        Ok(continued_fraction(delta, Complex64::new(s, 0.0))?.re)
    }
}

/// `1F1(-delta; 1-delta; -s)` for complex `s` with `Re s >= 0`.
pub fn kummer_1f1_complex(delta: f64, s: Complex64) -> Result<Complex64> {
    check_delta(delta)?;
    if !(s.re >= 0.0 && s.re.is_finite() && s.im.is_finite()) {
        return Err(Error::invalid(
            "s",
            format!("need finite s with Re s >= 0, got {s}"),
        ));
    }
    if s.im == 0.0 {
        return kummer_1f1(delta, s.re).map(|v| Complex64::new(v, 0.0));
    }
    if s.norm() <= 1.0 {
        direct_series(delta, s)
    } else {
        continued_fraction(delta, s)
    }
}

fn direct_series(delta: f64, s: Complex64) -> Result<Complex64> {
    let mut power = Complex64::new(1.0, 0.0);
    let mut sum = Complex64::new(0.0, 0.0);
    for k in 1..MAX_TERMS {
        power *= -s / k as f64;
        let term = power / (k as f64 - delta);
        sum += term;
        if term.norm() <= TOL * sum.norm().max(1e-300) {
            return Ok(1.0 - delta * sum);
        }
    }
    Err(Error::SeriesDivergence {
        what: "1F1 direct series",
        terms: MAX_TERMS,
    })
}

fn transformed_series(delta: f64, s: f64) -> Result<f64> {
    let b = 1.0 - delta;
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 0..MAX_TERMS {
        term *= s / (b + k as f64);
        sum += term;
        if term <= TOL * sum {
            return Ok((-s).exp() * sum);
        }
    }
    Err(Error::SeriesDivergence {
        what: "1F1 Kummer-transformed series",
        terms: MAX_TERMS,
    })
}

/// Modified Lentz evaluation of
/// `C(s) = 1 / (s + 1 - a - 1 (1 - a) / (s + 3 - a - 2 (2 - a) / (s + 5 - a - ...)))`
/// with `a = 1 - delta`, so that `Gamma(a, s) = e^-s s^a C(s)`.
fn continued_fraction(delta: f64, s: Complex64) -> Result<Complex64> {
    let a = 1.0 - delta;
    let tiny = 1e-300;
    let mut b = s + 1.0 - a;
    let mut c = Complex64::new(1.0 / tiny, 0.0);
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..MAX_TERMS {
        let an = -(i as f64) * (i as f64 - a);
        b += 2.0;
        d = an * d + b;
        if d.norm() < tiny {
            d = Complex64::new(tiny, 0.0);
        }
        c = b + an / c;
        if c.norm() < tiny {
            c = Complex64::new(tiny, 0.0);
        }
        d = 1.0 / d;
        let step = d * c;
        h *= step;
        if (step - 1.0).norm() <= TOL {
            let lead = gamma(a) * s.powf(delta);
            return Ok(lead + (-s).exp() * (1.0 - s * h));
        }
    }
    Err(Error::SeriesDivergence {
        what: "1F1 continued fraction",
        terms: MAX_TERMS,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    // Reference values computed at 30 significant digits.
    #[test]
    fn real_reference_values() {
        let cases = [
            (0.5, 0.3, 1.2858539469013681874),
            (0.5, 2.0, 2.5279113098818290978),
            (0.5, 10.0, 5.6049932100626172976),
            (0.5, 50.0, 12.533141373155002512),
            (2.0 / 3.0, 0.7, 2.2920291475922242772),
            (2.0 / 3.0, 8.0, 10.715777634154418248),
        ];
        for (delta, s, want) in cases {
            assert_relative_eq!(kummer_1f1(delta, s).unwrap(), want, max_relative = 1e-12);
        }
    }

    #[test]
    fn complex_reference_values() {
        let cases = [
            (
                Complex64::new(1.0, 2.0),
                Complex64::new(2.1993130365897430936, 1.3723954181910245495),
            ),
            (
                Complex64::new(5.0, 30.0),
                Complex64::new(7.4585198946051795863, 6.3182278787707839247),
            ),
            (
                Complex64::new(0.2, -0.7),
                Complex64::new(1.2649109796949924755, -0.6462157681501257863),
            ),
            (
                Complex64::new(40.0, 400.0),
                Complex64::new(26.349272503958944189, 23.845763886784904567),
            ),
        ];
        for (s, want) in cases {
            let got = kummer_1f1_complex(0.5, s).unwrap();
            assert!(
                (got - want).norm() <= 1e-12 * want.norm(),
                "s = {s}: {got} vs {want}"
            );
        }
    }

    #[test]
    fn routes_agree_at_boundaries() {
        for delta in [0.3, 0.5, 0.8] {
            for s in [1.0, 40.0] {
                let lo = kummer_1f1(delta, s * (1.0 - 1e-12)).unwrap();
                let hi = kummer_1f1(delta, s * (1.0 + 1e-12)).unwrap();
                assert_relative_eq!(lo, hi, max_relative = 1e-11);
            }
            let z = Complex64::new(0.6, 0.8);
            let inside = kummer_1f1_complex(delta, z * (1.0 - 1e-12)).unwrap();
            let outside = kummer_1f1_complex(delta, z * (1.0 + 1e-12)).unwrap();
            assert!((inside - outside).norm() <= 1e-11 * inside.norm());
            // continued fraction against the positive series on the real axis
            let cf = continued_fraction(delta, Complex64::new(12.0, 0.0))
                .unwrap()
                .re;
            assert_relative_eq!(
                cf,
                transformed_series(delta, 12.0).unwrap(),
                max_relative = 1e-12
            );
        }
    }

    #[test]
    fn origin_and_slope() {
        assert_eq!(kummer_1f1(0.5, 0.0).unwrap(), 1.0);
        let delta = 0.5;
        let h = 1e-6;
        let slope = (kummer_1f1(delta, h).unwrap() - 1.0) / h;
        assert_relative_eq!(slope, delta / (1.0 - delta), max_relative = 1e-5);
        let s = 0.01;
        let two_terms = 1.0 + delta * s / (1.0 - delta) - delta * s * s / (2.0 * (2.0 - delta));
        assert_relative_eq!(
            kummer_1f1(delta, s).unwrap(),
            two_terms,
            max_relative = 1e-7
        );
    }

    #[test]
    fn rejects_bad_input() {
        assert!(kummer_1f1(0.0, 1.0).is_err());
        assert!(kummer_1f1(1.0, 1.0).is_err());
        assert!(kummer_1f1(0.5, -1.0).is_err());
        assert!(kummer_1f1_complex(0.5, Complex64::new(-1.0, 1.0)).is_err());
    }
}
