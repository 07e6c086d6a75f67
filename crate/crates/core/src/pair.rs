//! Two-user NOMA: decoding order, power split and the NOMA versus OMA gates.
//!
//! Everything here works on the single-user thresholds `phi_1 <= phi_2` of an
//! ordered pair. User 1 is decoded first and receives `beta P_T` with
//! `beta` in `[1/2, 1]`. The same functions accept instantaneous SIRs in place
//! of the thresholds, which is how the full-CSI benchmark reuses them.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::channel::PowerProfile;
use crate::error::{Error, Result};
use crate::rate_control::{gamma_from_phi, phi_approx, rate_from_gamma, LinkSpec};

const BETA_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum UeLabel {
    A,
    B,
}

impl UeLabel {
    pub fn other(self) -> UeLabel {
        match self {
            UeLabel::A => UeLabel::B,
            UeLabel::B => UeLabel::A,
        }
    }
}

impl fmt::Display for UeLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            UeLabel::A => "A",
            UeLabel::B => "B",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Objective {
    EqualRate,
    MaxSumRate,
}

impl Objective {
    pub fn name(self) -> &'static str {
        match self {
            Objective::EqualRate => "equal-rate",
            Objective::MaxSumRate => "max-sum-rate",
        }
    }
}

impl fmt::Display for Objective {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Objective {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "equal-rate" => Ok(Objective::EqualRate),
            "max-sum-rate" | "sum-rate" => Ok(Objective::MaxSumRate),
            other => Err(Error::invalid(
                "objective",
                format!("expected equal-rate or max-sum-rate, got `{other}`"),
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scheme {
    Noma,
    Oma,
}

/// Thresholds in decoding order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrderedPair {
    phi1: f64,
    phi2: f64,
    first: UeLabel,
    tie: bool,
}

impl OrderedPair {
    /// Orders `(phi_a, phi_b)` so the smaller threshold is decoded first.
    /// Ties go to `A`.
    pub fn new(phi_a: f64, phi_b: f64) -> Result<Self> {
        check_phi("phi_a", phi_a)?;
        check_phi("phi_b", phi_b)?;
        let (phi1, phi2, first) = if phi_b < phi_a {
            (phi_b, phi_a, UeLabel::B)
        } else {
            (phi_a, phi_b, UeLabel::A)
        };
        Ok(OrderedPair {
            phi1,
            phi2,
            first,
            tie: phi_a == phi_b,
        })
    }

    /// Keeps the given decoding order even if `phi1 > phi2`. Used to evaluate
    /// the non-optimal order.
    pub fn from_decoding_order(phi1: f64, phi2: f64) -> Result<Self> {
        check_phi("phi1", phi1)?;
        check_phi("phi2", phi2)?;
        Ok(OrderedPair {
            phi1,
            phi2,
            first: UeLabel::A,
            tie: phi1 == phi2,
        })
    }

    pub fn phi1(&self) -> f64 {
        self.phi1
    }

    pub fn phi2(&self) -> f64 {
        self.phi2
    }

    /// Label of the user decoded first.
    pub fn first(&self) -> UeLabel {
        self.first
    }

    pub fn tie(&self) -> bool {
        self.tie
    }

    pub fn is_optimal_order(&self) -> bool {
        self.phi1 <= self.phi2
    }

    pub fn swapped(&self) -> OrderedPair {
        OrderedPair {
            phi1: self.phi2,
            phi2: self.phi1,
            first: self.first.other(),
            tie: self.tie,
        }
    }

    fn product(&self) -> f64 {
        self.phi1 * self.phi2
    }
}

fn check_phi(name: &'static str, phi: f64) -> Result<()> {
    if !(phi > 0.0 && phi.is_finite()) {
        return Err(Error::invalid(name, format!("must be positive, got {phi}")));
    }
    Ok(())
}

fn check_mu(mu: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&mu) {
        return Err(Error::invalid(
            "mu",
            format!("must lie in [0, 1], got {mu}"),
        ));
    }
    Ok(())
}

fn check_beta(beta: f64) -> Result<()> {
    if !(0.5..=1.0).contains(&beta) {
        return Err(Error::invalid(
            "beta",
            format!("must lie in [1/2, 1], got {beta}"),
        ));
    }
    Ok(())
}

pub fn order_pair(phi_a: f64, phi_b: f64) -> Result<OrderedPair> {
    OrderedPair::new(phi_a, phi_b)
}

/// Discriminant shared by the equal-rate split and SIR,
/// `(phi1 + phi2)^2 + 4 phi1 phi2 (phi1 + mu phi2 (1 + phi1))`.
fn equal_rate_discriminant(pair: &OrderedPair, mu: f64) -> f64 {
    let s = pair.phi1 + pair.phi2;
    s * s + 4.0 * pair.product() * equal_rate_k(pair, mu)
}

fn equal_rate_k(pair: &OrderedPair, mu: f64) -> f64 {
    pair.phi1 + mu * pair.phi2 * (1.0 + pair.phi1)
}

/// Root of `phi1 phi2 (1-mu) b^2 - (phi1 + phi2 + 2 phi1 phi2) b + phi2 (1 + phi1)`
/// without computing a difference of nearly equal terms. Not range checked.
fn equal_rate_beta_raw(pair: &OrderedPair, mu: f64) -> f64 {
    let b = pair.phi1 + pair.phi2 + 2.0 * pair.product();
    let c = pair.phi2 * (1.0 + pair.phi1);
    2.0 * c / (b + equal_rate_discriminant(pair, mu).sqrt())
}

/// Power fraction of user 1 that equalizes both SIR thresholds.
///
/// Fails with [`Error::Infeasible`] when the split would put less power on
/// the first-decoded user, which happens only for the non-optimal order.
pub fn equal_rate_beta(pair: &OrderedPair, mu: f64) -> Result<f64> {
    check_mu(mu)?;
    let beta = equal_rate_beta_raw(pair, mu);
    if beta < 0.5 - BETA_SLACK {
        return Err(Error::Infeasible { beta });
    }
    Ok(beta.clamp(0.5, 1.0))
}

/// Common SIR threshold reached by the equal-rate split.
pub fn equal_rate_gamma(pair: &OrderedPair, mu: f64) -> Result<f64> {
    check_mu(mu)?;
    let s = pair.phi1 + pair.phi2;
    Ok(2.0 * pair.product() / (s + equal_rate_discriminant(pair, mu).sqrt()))
}

/// Whether the equal-rate split lands in `[1/2, 1]`:
/// `2 phi1 / (2 + phi1 (1 - mu)) <= phi2`.
pub fn feasibility_equal_rate(pair: &OrderedPair, mu: f64) -> bool {
    2.0 * pair.phi1 / (2.0 + pair.phi1 * (1.0 - mu)) <= pair.phi2
}

/// SIC imperfection below which equal-rate NOMA beats equal-partition OMA.
pub fn equal_rate_mu_threshold(pair: &OrderedPair) -> f64 {
    let root = (1.0 + pair.phi1).sqrt();
    (pair.phi2 - pair.phi1) * (1.0 + root) / (pair.product() * root)
}

pub fn noma_beats_oma_equal_rate(pair: &OrderedPair, mu: f64) -> bool {
    mu < equal_rate_mu_threshold(pair)
}

/// Per-user thresholds `(gamma_1, gamma_2)` at split `beta`.
pub fn user_gammas(pair: &OrderedPair, mu: f64, beta: f64) -> Result<[f64; 2]> {
    check_beta(beta)?;
    let profile = PowerProfile::two_user(1.0, beta, mu)?;
    Ok([
        gamma_from_phi(pair.phi1, 0, &profile)?,
        gamma_from_phi(pair.phi2, 1, &profile)?,
    ])
}

/// `(1 + gamma_1)(1 + gamma_2)` at split `beta`.
pub fn sum_rate_gamma_tilde(pair: &OrderedPair, mu: f64, beta: f64) -> Result<f64> {
    let [g1, g2] = user_gammas(pair, mu, beta)?;
    Ok((1.0 + g1) * (1.0 + g2))
}

/// Same quantity as [`sum_rate_gamma_tilde`], written as one rational
/// function of `beta`.
pub fn sum_rate_gamma_tilde_rational(pair: &OrderedPair, mu: f64, beta: f64) -> Result<f64> {
    check_mu(mu)?;
    check_beta(beta)?;
    let (p1, p2) = (pair.phi1, pair.phi2);
    Ok((1.0 + p1) * (1.0 + p2 - beta * p2 * (1.0 - mu))
        / ((1.0 + (1.0 - beta) * p1) * (1.0 + beta * mu * p2)))
}

/// `gamma_1 + gamma_2` at any split in `[1/2, 1]`.
pub fn gamma_sum(pair: &OrderedPair, mu: f64, beta: f64) -> Result<f64> {
    let [g1, g2] = user_gammas(pair, mu, beta)?;
    Ok(g1 + g2)
}

/// `gamma_1 + gamma_2` at the two candidate splits.
pub fn sum_rate_gamma_bar(pair: &OrderedPair, mu: f64, beta: f64) -> Result<f64> {
    check_mu(mu)?;
    if beta == 0.5 {
        Ok(pair.phi1 / (2.0 + pair.phi1) + pair.phi2 / (2.0 + mu * pair.phi2))
    } else if beta == 1.0 {
        Ok(pair.phi1)
    } else {
        Err(Error::invalid(
            "beta",
            format!("sum of thresholds is tabulated for 1/2 and 1 only, got {beta}"),
        ))
    }
}

/// SIC imperfection below which the half-power split beats giving all power
/// to user 1, judged by `gamma_1 + gamma_2`:
/// `(2 phi2 + phi1 phi2 - 2 phi1 - 2 phi1^2) / (phi1 phi2 (1 + phi1))`.
pub fn sum_rate_mu_threshold(pair: &OrderedPair) -> f64 {
    let (p1, p2) = (pair.phi1, pair.phi2);
    (2.0 * p2 + p1 * p2 - 2.0 * p1 - 2.0 * p1 * p1) / (pair.product() * (1.0 + p1))
}

/// Max-sum-rate split, always one of the interval ends.
///
/// With perfect SIC `(1 + gamma_1)(1 + gamma_2)` is monotone in `beta`, so
/// the half-power split is optimal whenever `phi2 >= phi1`. Otherwise the
/// split is chosen from [`sum_rate_mu_threshold`].
pub fn sum_rate_beta_star(pair: &OrderedPair, mu: f64) -> Result<f64> {
    check_mu(mu)?;
    let half = if mu == 0.0 {
        pair.phi2 >= pair.phi1
    } else {
        mu < sum_rate_mu_threshold(pair)
    };
    Ok(if half { 0.5 } else { 1.0 })
}

/// `(1 + (gamma_1 + gamma_2) / 2)^2`, an upper bound of `(1+gamma_1)(1+gamma_2)`.
pub fn gamma_tilde_approx(gamma1: f64, gamma2: f64) -> f64 {
    let m = 1.0 + 0.5 * (gamma1 + gamma2);
    m * m
}

/// Relative error of [`gamma_tilde_approx`] in percent.
pub fn xi_relative_error(gamma1: f64, gamma2: f64) -> f64 {
    let (a, b) = (1.0 + gamma1, 1.0 + gamma2);
    25.0 * (a / b + b / a) - 50.0
}

/// SIC imperfection below which max-sum-rate NOMA at the half-power split
/// beats equal-partition OMA, derived with the mean approximation of the
/// product of SIR terms.
pub fn sum_rate_oma_mu_threshold(pair: &OrderedPair) -> f64 {
    let (p1, p2) = (pair.phi1, pair.phi2);
    let q = (p1 + 2.0) * (p1 + 2.0);
    let d = p1 * p1 * (2.0 * p1 + 3.0) + 2.0 * p2 * q;
    let lead = std::f64::consts::SQRT_2 * q * (2.0 + p1 + p2).sqrt() / d;
    let tail =
        (4.0 * p1.powi(3) + 6.0 * p1 * p1 + p1 * p1 * p2 + 6.0 * p1 * p2 + 8.0 * p2) / (p2 * d);
    lead - tail
}

/// Max-sum-rate gate: always true with perfect SIC, otherwise
/// [`sum_rate_oma_mu_threshold`] decides. The gate relies on an
/// approximation, so [`AllocationResult`] also records the direct comparison.
pub fn noma_beats_oma_sum_rate(pair: &OrderedPair, mu: f64) -> bool {
    mu == 0.0 || mu < sum_rate_oma_mu_threshold(pair)
}

/// Per-user OMA rates with an equal time or frequency partition.
pub fn oma_rates(pair: &OrderedPair, objective: Objective) -> [f64; 2] {
    let half = |phi: f64| 0.5 * phi.ln_1p() / std::f64::consts::LN_2;
    match objective {
        Objective::EqualRate => {
            let r = half(pair.phi1.min(pair.phi2));
            [r, r]
        }
        Objective::MaxSumRate => [half(pair.phi1), half(pair.phi2)],
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FairnessScheme {
    Oma,
    NomaSumRate,
}

/// Ratio `kappa_1` of user 1's threshold to user 2's.
///
/// For NOMA this is only defined at the half-power split, so it fails with
/// [`Error::FairnessUndefined`] when the sum-rate optimum is `beta = 1`.
pub fn fairness_kappa(pair: &OrderedPair, mu: f64, scheme: FairnessScheme) -> Result<f64> {
    check_mu(mu)?;
    let oma = pair.phi1 / pair.phi2;
    match scheme {
        FairnessScheme::Oma => Ok(oma),
        FairnessScheme::NomaSumRate => {
            if sum_rate_beta_star(pair, mu)? != 0.5 {
                return Err(Error::FairnessUndefined);
            }
            Ok(kappa_noma_half_power(pair, mu))
        }
    }
}

/// `kappa_1` of NOMA at `beta = 1/2`:
/// `(phi1 / phi2) (2 + mu phi2) / (2 + phi1)`.
pub fn kappa_noma_half_power(pair: &OrderedPair, mu: f64) -> f64 {
    pair.phi1 / pair.phi2 * (2.0 + mu * pair.phi2) / (2.0 + pair.phi1)
}

/// Output of the two-user allocation procedure.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AllocationResult {
    pub objective: Objective,
    pub scheme: Scheme,
    /// Label of the user decoded first.
    pub first: UeLabel,
    pub tie: bool,
    pub phi: [f64; 2],
    pub beta: f64,
    pub powers: [f64; 2],
    pub gammas: [f64; 2],
    pub rates: [f64; 2],
    pub oma_rates: [f64; 2],
    /// Closed-form equal-rate gate.
    pub equal_rate_gate: bool,
    /// Closed-form max-sum-rate gate.
    pub sum_rate_gate: bool,
    /// NOMA rate total above the OMA total for the chosen objective,
    /// evaluated directly.
    pub beats_oma: bool,
}

impl AllocationResult {
    pub fn sum_rate(&self) -> f64 {
        self.rates[0] + self.rates[1]
    }

    pub fn oma_sum_rate(&self) -> f64 {
        self.oma_rates[0] + self.oma_rates[1]
    }
}

/// Two-user rate and power allocation from link statistics.
///
/// Thresholds come from the closed-form approximation; the user with the
/// smaller threshold is decoded first.
pub fn allocate(
    link_a: &LinkSpec,
    link_b: &LinkSpec,
    mu: f64,
    total_power: f64,
    objective: Objective,
) -> Result<AllocationResult> {
    allocate_phi(
        phi_approx(link_a).value,
        phi_approx(link_b).value,
        mu,
        total_power,
        objective,
    )
}

/// [`allocate`] starting from the single-user thresholds.
pub fn allocate_phi(
    phi_a: f64,
    phi_b: f64,
    mu: f64,
    total_power: f64,
    objective: Objective,
) -> Result<AllocationResult> {
    check_mu(mu)?;
    let pair = OrderedPair::new(phi_a, phi_b)?;
    let beta = match objective {
        Objective::EqualRate => equal_rate_beta(&pair, mu)?,
        Objective::MaxSumRate => sum_rate_beta_star(&pair, mu)?,
    };
    let profile = PowerProfile::two_user(total_power, beta, mu)?;
    let gammas = [
        gamma_from_phi(pair.phi1, 0, &profile)?,
        gamma_from_phi(pair.phi2, 1, &profile)?,
    ];
    let rates = [rate_from_gamma(gammas[0])?, rate_from_gamma(gammas[1])?];
    let oma = oma_rates(&pair, objective);
    let beats_oma = match objective {
        Objective::EqualRate => rates[0].min(rates[1]) > oma[0],
        Objective::MaxSumRate => rates[0] + rates[1] > oma[0] + oma[1],
    };
    Ok(AllocationResult {
        objective,
        scheme: Scheme::Noma,
        first: pair.first,
        tie: pair.tie,
        phi: [pair.phi1, pair.phi2],
        beta,
        powers: [profile.powers()[0], profile.powers()[1]],
        gammas,
        rates,
        oma_rates: oma,
        equal_rate_gate: noma_beats_oma_equal_rate(&pair, mu),
        sum_rate_gate: noma_beats_oma_sum_rate(&pair, mu),
        beats_oma,
    })
}

/// OMA counterpart of [`allocate_phi`]: each user gets half the resources
/// and the whole power budget.
pub fn allocate_oma(
    phi_a: f64,
    phi_b: f64,
    total_power: f64,
    objective: Objective,
) -> Result<AllocationResult> {
    let pair = OrderedPair::new(phi_a, phi_b)?;
    let rates = oma_rates(&pair, objective);
    let gammas = rates.map(|r| (r * std::f64::consts::LN_2).exp_m1());
    Ok(AllocationResult {
        objective,
        scheme: Scheme::Oma,
        first: pair.first,
        tie: pair.tie,
        phi: [pair.phi1, pair.phi2],
        beta: 1.0,
        powers: [total_power, total_power],
        gammas,
        rates,
        oma_rates: rates,
        equal_rate_gate: false,
        sum_rate_gate: false,
        beats_oma: false,
    })
}
