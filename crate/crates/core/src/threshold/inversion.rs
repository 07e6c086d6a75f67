//! Numerical inverse Laplace transforms.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Gaver-Stehfest inversion. Uses the transform on the positive real axis
/// only. `n` must be even.
#[derive(Debug, Clone, PartialEq)]
pub struct GaverStehfest {
    weights: Vec<f64>,
}

impl GaverStehfest {
    pub const DEFAULT_TERMS: usize = 14;

    pub fn new(n: usize) -> Result<Self> {
        if n < 2 || n % 2 != 0 || n > 30 {
            return Err(Error::invalid(
                "terms",
                format!("need an even count in [2, 30], got {n}"),
            ));
        }
        let half = n / 2;
        let fact = |k: usize| (1..=k).fold(1.0f64, |acc, j| acc * j as f64);
        let weights = (1..=n)
            .map(|k| {
                let lo = (k + 1) / 2;
                let hi = k.min(half);
                let sum: f64 = (lo..=hi)
                    .map(|j| {
                        (j as f64).powi(half as i32) * fact(2 * j)
                            / (fact(half - j)
                                * fact(j)
                                * fact(j - 1)
                                * fact(k - j)
                                * fact(2 * j - k))
                    })
                    .sum();
                if (k + half) % 2 == 0 {
                    sum
                } else {
                    -sum
                }
            })
            .collect();
        Ok(GaverStehfest { weights })
    }

    pub fn terms(&self) -> usize {
        self.weights.len()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn invert<F>(&self, transform: F, x: f64) -> Result<f64>
    where
        F: Fn(f64) -> Result<f64>,
    {
        check_x(x)?;
        let ln2_x = std::f64::consts::LN_2 / x;
        let mut sum = 0.0;
        let mut comp = 0.0;
        for (k, w) in self.weights.iter().enumerate() {
            let t = w * transform((k + 1) as f64 * ln2_x)?;
            let s = sum + t;
            comp += if sum.abs() >= t.abs() {
                (sum - s) + t
            } else {
                (t - s) + sum
            };
            sum = s;
        }
        finite(ln2_x * (sum + comp), x)
    }
}

impl Default for GaverStehfest {
    fn default() -> Self {
        Self::new(Self::DEFAULT_TERMS).expect("default term count is valid")
    }
}

/// Fourier-series inversion along a Bromwich line with Euler summation of
/// the alternating tail.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EulerInversion {
    /// Discretization parameter; the aliasing error is about `e^-a`.
    pub a: f64,
    /// Terms summed directly.
    pub n: usize,
    /// Terms averaged by binomial weights.
    pub m: usize,
}

impl Default for EulerInversion {
    fn default() -> Self {
        EulerInversion {
            a: 18.4,
            n: 38,
            m: 11,
        }
    }
}

impl EulerInversion {
    pub fn invert<F>(&self, transform: F, x: f64) -> Result<f64>
    where
        F: Fn(Complex64) -> Result<Complex64>,
    {
        check_x(x)?;
        let scale = (0.5 * self.a).exp() / x;
        let shift = self.a / (2.0 * x);
        let step = std::f64::consts::PI / x;
        let mut partial = 0.5 * transform(Complex64::new(shift, 0.0))?.re;
        let mut sums = Vec::with_capacity(self.m + 1);
        for k in 1..=(self.n + self.m) {
            let term = transform(Complex64::new(shift, k as f64 * step))?.re;
            partial += if k % 2 == 0 { term } else { -term };
            if k >= self.n {
                sums.push(partial);
            }
        }
        let mut binom = 1.0;
        let mut acc = 0.0;
        for (k, s) in sums.iter().enumerate() {
            acc += binom * s;
            binom *= (self.m - k) as f64 / (k + 1) as f64;
        }
        finite(scale * acc * 0.5f64.powi(self.m as i32), x)
    }
}

/// Choice of inversion algorithm.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum InverterKind {
    GaverStehfest,
    #[default]
    Euler,
}

fn check_x(x: f64) -> Result<()> {
    if !(x > 0.0 && x.is_finite()) {
        return Err(Error::Inversion {
            x,
            reason: "argument must be positive and finite".into(),
        });
    }
    Ok(())
}

fn finite(v: f64, x: f64) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::Inversion {
            x,
            reason: format!("non-finite result {v}"),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn stehfest_weights_sum_to_zero() {
        let gs = GaverStehfest::default();
        assert_eq!(gs.terms(), 14);
        let sum: f64 = gs.weights().iter().sum();
        assert!(sum.abs() < 1e-6, "{sum}");
        assert!(GaverStehfest::new(7).is_err());
    }

    #[test]
    fn known_pairs() {
        // L{e^-t} = 1/(s+1), L{1 - e^-t} = 1/(s(s+1))
        let gs = GaverStehfest::default();
        let euler = EulerInversion::default();
        for x in [0.1, 1.0, 3.0] {
            let gs_val = gs.invert(|s| Ok(1.0 / (s + 1.0)), x).unwrap();
            assert_abs_diff_eq!(gs_val, (-x).exp(), epsilon = 1e-4);
            let eu_val = euler.invert(|s| Ok(1.0 / (s * (s + 1.0))), x).unwrap();
            assert_abs_diff_eq!(eu_val, 1.0 - (-x).exp(), epsilon = 1e-7);
        }
    }

    #[test]
    fn rejects_bad_argument() {
        let gs = GaverStehfest::default();
        assert!(matches!(
            gs.invert(|_| Ok(1.0), 0.0),
            Err(Error::Inversion { .. })
        ));
        assert!(gs.invert(|_| Ok(f64::NAN), 1.0).is_err());
    }
}
