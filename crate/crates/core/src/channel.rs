//! Rayleigh fading, inter-cell interference and the post-SIC SIR.
//!
//! The network is interference limited, so noise never appears. Users are
//! indexed from 0 in decoding order: user 0 is decoded first and receives the
//! largest power.

use rand::Rng;
use rand_distr::{Distribution, Exp1};

use crate::error::{Error, Result};

/// Transmit powers of the users superposed by one BS.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerProfile {
    total: f64,
    powers: Vec<f64>,
    mu: f64,
}

impl PowerProfile {
    /// `powers` must be non-increasing, sum to `total` and start with a
    /// positive entry. `mu` is the fraction of already-decoded power that SIC
    /// fails to remove.
    pub fn new(total: f64, powers: Vec<f64>, mu: f64) -> Result<Self> {
        if !(total > 0.0 && total.is_finite()) {
            return Err(Error::invalid(
                "total_power",
                format!("must be positive, got {total}"),
            ));
        }
        if powers.is_empty() {
            return Err(Error::invalid("powers", "no users"));
        }
        if !(0.0..=1.0).contains(&mu) {
            return Err(Error::invalid(
                "mu",
                format!("must lie in [0, 1], got {mu}"),
            ));
        }
        if powers.iter().any(|p| !(*p >= 0.0 && p.is_finite())) || powers[0] <= 0.0 {
            return Err(Error::invalid(
                "powers",
                format!("non-positive power in {powers:?}"),
            ));
        }
        if powers.windows(2).any(|w| w[1] > w[0]) {
            return Err(Error::invalid(
                "powers",
                format!("must be non-increasing in decoding order, got {powers:?}"),
            ));
        }
        let sum: f64 = powers.iter().sum();
        if (sum - total).abs() > 1e-12 * total {
            return Err(Error::invalid(
                "powers",
                format!("sum {sum} differs from total power {total}"),
            ));
        }
        Ok(PowerProfile { total, powers, mu })
    }

    /// A single user with the whole budget (OMA).
    pub fn single(total: f64) -> Result<Self> {
        Self::new(total, vec![total], 0.0)
    }

    /// Two users with `P_1 = beta * total`, `P_2 = (1 - beta) * total`.
    pub fn two_user(total: f64, beta: f64, mu: f64) -> Result<Self> {
        if !(0.5..=1.0).contains(&beta) {
            return Err(Error::invalid(
                "beta",
                format!("must lie in [1/2, 1], got {beta}"),
            ));
        }
        Self::new(total, vec![beta * total, (1.0 - beta) * total], mu)
    }

    pub fn total(&self) -> f64 {
        self.total
    }

    pub fn powers(&self) -> &[f64] {
        &self.powers
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn users(&self) -> usize {
        self.powers.len()
    }

    pub fn power(&self, i: usize) -> Result<f64> {
        self.powers.get(i).copied().ok_or(Error::UserIndex {
            index: i,
            users: self.powers.len(),
        })
    }

    /// Intra-cell power still present when user `i` decodes its own signal:
    /// `mu * sum_{j<i} P_j + sum_{j>i} P_j`.
    pub fn residual(&self, i: usize) -> Result<f64> {
        self.power(i)?;
        let earlier: f64 = self.powers[..i].iter().sum();
        let later: f64 = self.powers[i + 1..].iter().sum();
        Ok(self.mu * earlier + later)
    }
}

/// `I = P_T * sum_j g_j r_j^-alpha`.
pub fn interference(
    distances: &[f64],
    fading: &[f64],
    total_power: f64,
    alpha: f64,
) -> Result<f64> {
    if distances.is_empty() {
        return Err(Error::NoInterferers);
    }
    if distances.len() != fading.len() {
        return Err(Error::invalid(
            "fading",
            format!("{} gains for {} interferers", fading.len(), distances.len()),
        ));
    }
    if !(alpha > 2.0) {
        return Err(Error::invalid(
            "alpha",
            format!("must exceed 2, got {alpha}"),
        ));
    }
    let sum: f64 = distances
        .iter()
        .zip(fading)
        .map(|(r, g)| g * r.powf(-alpha))
        .sum();
    Ok(total_power * sum)
}

/// SIR of user `i` after SIC with residual factor `mu`.
pub fn sir_after_sic(
    i: usize,
    h: f64,
    r: f64,
    profile: &PowerProfile,
    interference: f64,
    alpha: f64,
) -> Result<f64> {
    if !(interference > 0.0) {
        return Err(Error::invalid(
            "interference",
            format!("must be positive, got {interference}"),
        ));
    }
    let gain = h * r.powf(-alpha);
    let own = profile.power(i)?;
    let residual = profile.residual(i)?;
    Ok(gain * own / (gain * residual + interference))
}

/// Single-user instantaneous SIR `h r^-alpha P_T / I`.
pub fn instantaneous_ratio(
    h: f64,
    r: f64,
    total_power: f64,
    interference: f64,
    alpha: f64,
) -> Result<f64> {
    if !(interference > 0.0) {
        return Err(Error::invalid(
            "interference",
            format!("must be positive, got {interference}"),
        ));
    }
    Ok(h * r.powf(-alpha) * total_power / interference)
}

/// Unit-mean exponential power gains for each user's own link and for every
/// interfering link.
#[derive(Debug, Clone, PartialEq)]
pub struct FadingDraw {
    pub signal: Vec<f64>,
    pub interferers: Vec<Vec<f64>>,
}

impl FadingDraw {
    /// `interferer_counts[k]` gains are drawn for user `k`.
    pub fn sample<R: Rng + ?Sized>(rng: &mut R, interferer_counts: &[usize]) -> Self {
        let mut signal = Vec::with_capacity(interferer_counts.len());
        let mut interferers = Vec::with_capacity(interferer_counts.len());
        for &n in interferer_counts {
            signal.push(Exp1.sample(rng));
            interferers.push((0..n).map(|_| Exp1.sample(rng)).collect());
        }
        FadingDraw {
            signal,
            interferers,
        }
    }
}
