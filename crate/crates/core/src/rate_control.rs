//! CSI-free SIR threshold selection.
//!
//! For a fixed deployment the conditional success probability of a Rayleigh
//! link is `prod_j 1 / (1 + phi * (r / r_j)^alpha)`. The single-user
//! threshold `phi*` makes that product equal to `1 - epsilon`. With
//! superposition coding the threshold of user `i` shrinks to
//! `gamma_i = phi* P_i / (P_T + phi* * residual_i)`.

use serde::{Deserialize, Serialize};

use crate::channel::PowerProfile;
use crate::error::{Error, Result};

/// Error probability above which the closed-form threshold is flagged.
pub const APPROX_EPSILON_LIMIT: f64 = 0.1;

const ROOT_MAX_ITER: usize = 200;

/// Topology summary of one link plus its reliability target.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinkSpec {
    serving_distance: f64,
    interferer_distances: Vec<f64>,
    epsilon: f64,
    alpha: f64,
}

impl LinkSpec {
    pub fn new(
        serving_distance: f64,
        interferer_distances: Vec<f64>,
        epsilon: f64,
        alpha: f64,
    ) -> Result<Self> {
        if !(serving_distance > 0.0 && serving_distance.is_finite()) {
            return Err(Error::invalid(
                "serving_distance",
                format!("must be positive, got {serving_distance}"),
            ));
        }
        if interferer_distances.is_empty() {
            return Err(Error::NoInterferers);
        }
        if interferer_distances
            .iter()
            .any(|d| !(*d > 0.0 && d.is_finite()))
        {
            return Err(Error::invalid(
                "interferer_distances",
                "distances must be positive",
            ));
        }
        if interferer_distances.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::invalid(
                "interferer_distances",
                "must be sorted ascending",
            ));
        }
        check_epsilon(epsilon)?;
        if !(alpha > 2.0 && alpha.is_finite()) {
            return Err(Error::invalid(
                "alpha",
                format!("must exceed 2, got {alpha}"),
            ));
        }
        Ok(LinkSpec {
            serving_distance,
            interferer_distances,
            epsilon,
            alpha,
        })
    }

    pub fn serving_distance(&self) -> f64 {
        self.serving_distance
    }

    pub fn interferer_distances(&self) -> &[f64] {
        &self.interferer_distances
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn with_epsilon(&self, epsilon: f64) -> Result<Self> {
        check_epsilon(epsilon)?;
        Ok(LinkSpec {
            epsilon,
            ..self.clone()
        })
    }

    pub fn with_alpha(&self, alpha: f64) -> Result<Self> {
        Self::new(
            self.serving_distance,
            self.interferer_distances.clone(),
            self.epsilon,
            alpha,
        )
    }

    /// `(r / r_j)^alpha` for every interferer.
    pub fn relative_gains(&self) -> impl Iterator<Item = f64> + '_ {
        let r = self.serving_distance;
        let alpha = self.alpha;
        self.interferer_distances
            .iter()
            .map(move |rj| (r / rj).powf(alpha))
    }

    /// Mean signal to mean interference power ratio
    /// `r^-alpha / sum_j r_j^-alpha`.
    pub fn mean_power_ratio(&self) -> f64 {
        1.0 / self.relative_gains().sum::<f64>()
    }
}

fn check_epsilon(epsilon: f64) -> Result<()> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::invalid(
            "epsilon",
            format!("must lie in (0, 1), got {epsilon}"),
        ));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PhiMethod {
    Exact,
    Approximate,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhiValue {
    pub value: f64,
    pub method: PhiMethod,
    /// Set when the closed form is used above [`APPROX_EPSILON_LIMIT`].
    pub outside_accuracy_range: bool,
}

/// Exact single-user threshold: the positive root of
/// `prod_j (1 + phi (r/r_j)^alpha) = 1 / (1 - epsilon)`.
///
/// Solved in log form with a safeguarded Newton iteration. The closed-form
/// value is always a lower bound of the root, so it seeds the bracket and
/// is doubled until the residual changes sign.
pub fn phi_exact(link: &LinkSpec) -> Result<PhiValue> {
    let gains: Vec<f64> = link.relative_gains().collect();
    let target = -(-link.epsilon).ln_1p();
    let residual = |phi: f64| gains.iter().map(|a| (phi * a).ln_1p()).sum::<f64>() - target;
    let slope = |phi: f64| gains.iter().map(|a| a / (1.0 + phi * a)).sum::<f64>();

    let mut lo = 0.0;
    let mut hi = phi_approx(link).value;
    let mut doublings = 0;
    while residual(hi) < 0.0 {
        lo = hi;
        hi *= 2.0;
        doublings += 1;
        if doublings > 1100 || !hi.is_finite() {
            return Err(Error::NoConvergence {
                iterations: doublings,
                lo,
                hi,
                residual: residual(lo),
            });
        }
    }

    let mut x = 0.5 * (lo + hi);
    for _ in 0..ROOT_MAX_ITER {
        let f = residual(x);
        if f == 0.0 {
            return Ok(exact_value(x));
        }
        if f < 0.0 {
            lo = x;
        } else {
            hi = x;
        }
        let newton = x - f / slope(x);
        let next = if newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
        if (next - x).abs() <= 4.0 * f64::EPSILON * x || hi - lo <= 4.0 * f64::EPSILON * hi {
            return Ok(exact_value(next));
        }
        x = next;
    }
    Err(Error::NoConvergence {
        iterations: ROOT_MAX_ITER,
        lo,
        hi,
        residual: residual(x),
    })
}

fn exact_value(value: f64) -> PhiValue {
    PhiValue {
        value,
        method: PhiMethod::Exact,
        outside_accuracy_range: false,
    }
}

/// Closed-form threshold `epsilon * r^-alpha / sum_j r_j^-alpha`.
pub fn phi_approx(link: &LinkSpec) -> PhiValue {
    PhiValue {
        value: link.epsilon * link.mean_power_ratio(),
        method: PhiMethod::Approximate,
        outside_accuracy_range: link.epsilon > APPROX_EPSILON_LIMIT,
    }
}

/// Threshold obtained by replacing the product with its arithmetic-mean
/// bound: `f(n, epsilon) * r^-alpha / sum_j r_j^-alpha`.
pub fn phi_mean_surrogate(link: &LinkSpec) -> f64 {
    f_of_n(link.interferer_distances.len() as u64, link.epsilon) * link.mean_power_ratio()
}

/// Relative residual of the defining product at `phi`.
pub fn reliability_residual(link: &LinkSpec, phi: f64) -> f64 {
    let log_product: f64 = link.relative_gains().map(|a| (phi * a).ln_1p()).sum();
    (log_product + (-link.epsilon).ln_1p()).exp_m1().abs()
}

/// `n ((1 - epsilon)^(-1/n) - 1)`, decreasing in `n`.
pub fn f_of_n(n: u64, epsilon: f64) -> f64 {
    let n = n as f64;
    n * (-(-epsilon).ln_1p() / n).exp_m1()
}

/// Limit of [`f_of_n`] as `n` grows: `-ln(1 - epsilon)`.
pub fn f_limit(epsilon: f64) -> f64 {
    -(-epsilon).ln_1p()
}

/// SIR threshold of user `i` (0-based decoding position) under `profile`.
pub fn gamma_from_phi(phi: f64, i: usize, profile: &PowerProfile) -> Result<f64> {
    if !(phi > 0.0) {
        return Err(Error::invalid(
            "phi",
            format!("must be positive, got {phi}"),
        ));
    }
    let own = profile.power(i)?;
    let residual = profile.residual(i)?;
    Ok(phi * own / (profile.total() + phi * residual))
}

/// Transmission rate in bps/Hz for an SIR threshold.
pub fn rate_from_gamma(gamma: f64) -> Result<f64> {
    if !(gamma >= 0.0) {
        return Err(Error::invalid(
            "gamma",
            format!("must be non-negative, got {gamma}"),
        ));
    }
    Ok(gamma.ln_1p() / std::f64::consts::LN_2)
}
