//! Distribution of the allocated SIR threshold over network realizations.
//!
//! With the closed-form threshold, `gamma_i <= theta` exactly when the sum
//! of relative path gains `Psi = sum_j (r_i / r_j)^alpha` exceeds
//! `z_i(theta) = (P_i / theta - residual_i) epsilon / P_T`. Hence
//! `F_gamma(theta) = 1 - F_Psi(z)`. The Laplace transform of `F_Psi` is
//! `1 / (s 1F1(-delta; 1-delta; -s))` with `delta = 2 / alpha`, and
//! `F_Psi(x) = sinc(delta) x^delta` for `x <= 1`.

pub mod inversion;
pub mod kummer;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::PowerProfile;
use crate::error::{Error, Result};
use crate::geometry::{sample_ppp_with, DeploymentConfig, UePlacement};
use crate::rate_control::{gamma_from_phi, phi_approx};
use crate::rng::substream;
use crate::row;
use crate::table::Table;

pub use inversion::{EulerInversion, GaverStehfest, InverterKind};
pub use kummer::{kummer_1f1, kummer_1f1_complex};

/// Normalized sinc, `sin(pi x) / (pi x)`.
pub fn sinc(x: f64) -> f64 {
    if x == 0.0 {
        1.0
    } else {
        let px = std::f64::consts::PI * x;
        px.sin() / px
    }
}

/// Numerical inversion of the transform of `F_Psi`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PsiInverter {
    pub kind: InverterKind,
    pub stehfest: GaverStehfest,
    pub euler: EulerInversion,
}

impl PsiInverter {
    pub fn new(kind: InverterKind) -> Self {
        PsiInverter {
            kind,
            ..Default::default()
        }
    }

    /// `F_Psi(x)` by the selected method, clamped to `[0, 1]`.
    pub fn cdf(&self, x: f64, delta: f64) -> Result<f64> {
        self.cdf_with(self.kind, x, delta)
    }

    pub fn cdf_with(&self, kind: InverterKind, x: f64, delta: f64) -> Result<f64> {
        let raw = match kind {
            InverterKind::GaverStehfest => self
                .stehfest
                .invert(|s| Ok(1.0 / (s * kummer_1f1(delta, s)?)), x)?,
            InverterKind::Euler => self
                .euler
                .invert(|s| Ok(1.0 / (s * kummer_1f1_complex(delta, s)?)), x)?,
        };
        Ok(raw.clamp(0.0, 1.0))
    }

    /// Change in the selected method's output when its resolution is
    /// increased, used as an error estimate.
    pub fn error_estimate(&self, x: f64, delta: f64) -> Result<f64> {
        let base = self.cdf(x, delta)?;
        let finer = match self.kind {
            InverterKind::GaverStehfest => {
                let n = self.stehfest.terms() - 2;
                let coarse = PsiInverter {
                    stehfest: GaverStehfest::new(n.max(2))?,
                    ..self.clone()
                };
                coarse.cdf(x, delta)?
            }
            InverterKind::Euler => {
                let finer = PsiInverter {
                    euler: EulerInversion {
                        a: self.euler.a + 4.0,
                        n: self.euler.n + 10,
                        m: self.euler.m,
                    },
                    ..self.clone()
                };
                finer.cdf(x, delta)?
            }
        };
        Ok((base - finer).abs())
    }

    /// Absolute disagreement between the two inverters at `x`.
    pub fn disagreement(&self, x: f64, delta: f64) -> Result<f64> {
        let a = self.cdf_with(InverterKind::GaverStehfest, x, delta)?;
        let b = self.cdf_with(InverterKind::Euler, x, delta)?;
        Ok((a - b).abs())
    }
}

/// `F_Psi(x)` with the default inverter.
pub fn psi_cdf(x: f64, delta: f64) -> Result<f64> {
    check_delta(delta)?;
    PsiInverter::default().cdf(x, delta)
}

/// `sinc(delta) x^delta`; equals `F_Psi(x)` for `x <= 1`.
pub fn psi_cdf_closed(x: f64, delta: f64) -> f64 {
    sinc(delta) * x.powf(delta)
}

fn check_delta(delta: f64) -> Result<()> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::invalid(
            "delta",
            format!("must lie in (0, 1), got {delta}"),
        ));
    }
    Ok(())
}

/// One point of the threshold distribution.
#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdQuery {
    pub theta: f64,
    pub epsilon: f64,
    pub alpha: f64,
    pub profile: PowerProfile,
    /// 0-based position in decoding order.
    pub user: usize,
}

impl ThresholdQuery {
    pub fn new(
        theta: f64,
        epsilon: f64,
        alpha: f64,
        profile: PowerProfile,
        user: usize,
    ) -> Result<Self> {
        if !(theta > 0.0 && theta.is_finite()) {
            return Err(Error::invalid(
                "theta",
                format!("must be positive, got {theta}"),
            ));
        }
        if !(epsilon > 0.0 && epsilon < 1.0) {
            return Err(Error::invalid(
                "epsilon",
                format!("must lie in (0, 1), got {epsilon}"),
            ));
        }
        if !(alpha > 2.0 && alpha.is_finite()) {
            return Err(Error::invalid(
                "alpha",
                format!("must exceed 2, got {alpha}"),
            ));
        }
        profile.power(user)?;
        Ok(ThresholdQuery {
            theta,
            epsilon,
            alpha,
            profile,
            user,
        })
    }

    /// Single-user query with the whole power budget.
    pub fn oma(theta: f64, epsilon: f64, alpha: f64) -> Result<Self> {
        Self::new(theta, epsilon, alpha, PowerProfile::single(1.0)?, 0)
    }

    pub fn delta(&self) -> f64 {
        2.0 / self.alpha
    }

    pub fn at(&self, theta: f64) -> Result<Self> {
        Self::new(
            theta,
            self.epsilon,
            self.alpha,
            self.profile.clone(),
            self.user,
        )
    }
}

/// `z_i(theta) = (P_i / theta - residual_i) epsilon / P_T`. Non-positive
/// values mean `theta` is out of reach for this power profile.
pub fn z_of_theta(query: &ThresholdQuery) -> Result<f64> {
    let own = query.profile.power(query.user)?;
    let residual = query.profile.residual(query.user)?;
    Ok((own / query.theta - residual) * query.epsilon / query.profile.total())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CdfMethod {
    Inversion,
    ClosedForm,
    MonteCarlo,
}

impl CdfMethod {
    pub fn name(self) -> &'static str {
        match self {
            CdfMethod::Inversion => "inversion",
            CdfMethod::ClosedForm => "closed-form",
            CdfMethod::MonteCarlo => "monte-carlo",
        }
    }
}

/// How a returned CDF value relates to the true distribution.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CdfKind {
    /// Exact up to the stated numerical error.
    Exact,
    /// Closed form evaluated where it only bounds the CDF from below.
    LowerBound,
    /// `z <= 0`: the threshold can never reach `theta`.
    Unreachable,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CdfValue {
    pub value: f64,
    pub kind: CdfKind,
    pub error: f64,
}

/// `F_gamma(theta)` by Laplace inversion or by the closed form.
///
/// For inversion the error estimate comes from
/// [`PsiInverter::error_estimate`]; the closed form carries no numerical
/// error.
pub fn threshold_cdf(
    query: &ThresholdQuery,
    method: CdfMethod,
    inverter: &PsiInverter,
) -> Result<CdfValue> {
    let z = z_of_theta(query)?;
    if z <= 0.0 {
        return Ok(CdfValue {
            value: 1.0,
            kind: CdfKind::Unreachable,
            error: 0.0,
        });
    }
    let delta = query.delta();
    match method {
        CdfMethod::Inversion => {
            let f = inverter.cdf(z, delta)?;
            Ok(CdfValue {
                value: 1.0 - f,
                kind: CdfKind::Exact,
                error: inverter.error_estimate(z, delta)?,
            })
        }
        // The series exceeds one for large z.
        CdfMethod::ClosedForm => Ok(CdfValue {
            value: (1.0 - psi_cdf_closed(z, delta)).max(0.0),
            kind: if z <= 1.0 {
                CdfKind::Exact
            } else {
                CdfKind::LowerBound
            },
            error: 0.0,
        }),
        CdfMethod::MonteCarlo => Err(Error::invalid(
            "method",
            "use threshold_cdf_montecarlo for sampled curves",
        )),
    }
}

/// Tabulated threshold distribution.
#[derive(Debug, Clone, PartialEq)]
pub struct CdfCurve {
    pub method: CdfMethod,
    pub theta: Vec<f64>,
    pub values: Vec<f64>,
    /// Numerical error estimate, or the 95% half-width for sampled curves.
    pub errors: Vec<f64>,
}

impl CdfCurve {
    pub fn to_table(&self, comment: &str) -> Table {
        let mut t = Table::new(comment, &["theta", "F", "method", "error"]);
        for k in 0..self.theta.len() {
            t.push(row![
                self.theta[k],
                self.values[k],
                self.method.name(),
                self.errors[k]
            ]);
        }
        t
    }

    pub fn is_monotone(&self) -> bool {
        self.values.windows(2).all(|w| w[1] >= w[0])
    }
}

fn check_grid(thetas: &[f64]) -> Result<()> {
    if thetas.is_empty() || thetas.windows(2).any(|w| w[1] <= w[0]) || thetas[0] <= 0.0 {
        return Err(Error::invalid(
            "theta",
            "grid must be positive and strictly ascending",
        ));
    }
    Ok(())
}

/// Analytical curve over `thetas`; the query's own `theta` is ignored.
pub fn cdf_curve(
    query: &ThresholdQuery,
    thetas: &[f64],
    method: CdfMethod,
    inverter: &PsiInverter,
) -> Result<CdfCurve> {
    check_grid(thetas)?;
    let points: Vec<CdfValue> = thetas
        .par_iter()
        .map(|&t| threshold_cdf(&query.at(t)?, method, inverter))
        .collect::<Result<_>>()?;
    let mut values: Vec<f64> = points.iter().map(|p| p.value).collect();
    // Inversion noise can break monotonicity by a hair; restore it.
    for k in 1..values.len() {
        if values[k] < values[k - 1] {
            values[k] = values[k - 1];
        }
    }
    Ok(CdfCurve {
        method,
        theta: thetas.to_vec(),
        values,
        errors: points.iter().map(|p| p.error).collect(),
    })
}

/// Thresholds `gamma_i` of the tagged user over `runs` deployments. Run `k`
/// uses substream `k` of `config.seed`.
pub fn sample_thresholds(
    query: &ThresholdQuery,
    config: &DeploymentConfig,
    runs: usize,
    placement: UePlacement,
) -> Result<Vec<f64>> {
    if runs == 0 {
        return Err(Error::invalid("runs", "need at least one run"));
    }
    (0..runs as u64)
        .into_par_iter()
        .map(|k| {
            let mut rng = substream(config.seed, k);
            let net = sample_ppp_with(config, &mut rng, placement)?;
            let link = net.links[0].link(query.epsilon, query.alpha)?;
            gamma_from_phi(phi_approx(&link).value, query.user, &query.profile)
        })
        .collect()
}

/// Empirical curve with normal-approximation 95% half-widths.
pub fn threshold_cdf_montecarlo(
    query: &ThresholdQuery,
    config: &DeploymentConfig,
    runs: usize,
    thetas: &[f64],
    placement: UePlacement,
) -> Result<CdfCurve> {
    check_grid(thetas)?;
    let mut samples = sample_thresholds(query, config, runs, placement)?;
    samples.sort_by(f64::total_cmp);
    Ok(empirical_curve(&samples, thetas))
}

/// ECDF of sorted `samples` on `thetas`.
pub fn empirical_curve(sorted: &[f64], thetas: &[f64]) -> CdfCurve {
    let n = sorted.len() as f64;
    let values: Vec<f64> = thetas
        .iter()
        .map(|&t| sorted.partition_point(|&g| g <= t) as f64 / n)
        .collect();
    let errors = values
        .iter()
        .map(|&f| 1.96 * (f * (1.0 - f) / n).sqrt())
        .collect();
    CdfCurve {
        method: CdfMethod::MonteCarlo,
        theta: thetas.to_vec(),
        values,
        errors,
    }
}

/// `n` points log-spaced between `lo` and `hi` inclusive.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..n)
        .map(|k| (a + (b - a) * k as f64 / (n - 1) as f64).exp())
        .collect()
}

/// Laplace transform of `F_Psi` at real `s`, as used by the inverters.
pub fn psi_cdf_transform(s: f64, delta: f64) -> Result<f64> {
    Ok(1.0 / (s * kummer_1f1(delta, s)?))
}

/// Complex counterpart of [`psi_cdf_transform`].
pub fn psi_cdf_transform_complex(s: Complex64, delta: f64) -> Result<Complex64> {
    Ok(1.0 / (s * kummer_1f1_complex(delta, s)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    #[test]
    fn sinc_convention() {
        assert_relative_eq!(sinc(0.5), 2.0 / std::f64::consts::PI, max_relative = 1e-15);
        // alpha = 4: 1 - sinc(1/2) z^(1/2) = 1 - 1 / (Gamma(3/2) sqrt(pi / z))
        let gamma_1_5 = statrs::function::gamma::gamma(1.5);
        for z in [0.01, 0.3, 1.0] {
            let via_gamma = 1.0 - 1.0 / (gamma_1_5 * (std::f64::consts::PI / z).sqrt());
            assert_relative_eq!(
                1.0 - psi_cdf_closed(z, 0.5),
                via_gamma,
                max_relative = 1e-12
            );
        }
    }

    #[test]
    fn z_examples() {
        let oma = ThresholdQuery::oma(0.2, 0.01, 4.0).unwrap();
        assert_relative_eq!(z_of_theta(&oma).unwrap(), 0.01 / 0.2, max_relative = 1e-15);
        for mu in [0.0, 0.4] {
            let p = PowerProfile::two_user(1.0, 0.5, mu).unwrap();
            let q1 = ThresholdQuery::new(0.3, 0.1, 4.0, p.clone(), 0).unwrap();
            assert_relative_eq!(
                z_of_theta(&q1).unwrap(),
                0.05 * (1.0 / 0.3 - 1.0),
                max_relative = 1e-14
            );
            let q2 = ThresholdQuery::new(0.3, 0.1, 4.0, p, 1).unwrap();
            let want = 0.05 * (1.0 / 0.3 + (1.0 - mu) - 1.0);
            assert_relative_eq!(z_of_theta(&q2).unwrap(), want, max_relative = 1e-14);
        }
    }

    #[test]
    fn unreachable_threshold() {
        let p = PowerProfile::two_user(1.0, 0.5, 0.0).unwrap();
        let q = ThresholdQuery::new(1.5, 0.1, 4.0, p, 0).unwrap();
        let v = threshold_cdf(&q, CdfMethod::ClosedForm, &PsiInverter::default()).unwrap();
        assert_eq!((v.value, v.kind), (1.0, CdfKind::Unreachable));
    }

    #[test]
    fn closed_form_at_z_one() {
        let q = ThresholdQuery::oma(0.01, 0.01, 4.0).unwrap();
        let v = threshold_cdf(&q, CdfMethod::ClosedForm, &PsiInverter::default()).unwrap();
        assert_relative_eq!(
            v.value,
            1.0 - 2.0 / std::f64::consts::PI,
            max_relative = 1e-14
        );
        assert_eq!(v.kind, CdfKind::Exact);
    }

    #[test]
    fn ten_db_shift() {
        let inv = PsiInverter::default();
        for theta in [1e-3, 0.02, 0.5, 4.0] {
            let a = threshold_cdf(
                &ThresholdQuery::oma(theta, 0.1, 4.0).unwrap(),
                CdfMethod::ClosedForm,
                &inv,
            )
            .unwrap();
            let b = threshold_cdf(
                &ThresholdQuery::oma(theta / 10.0, 0.01, 4.0).unwrap(),
                CdfMethod::ClosedForm,
                &inv,
            )
            .unwrap();
            assert_eq!(a.value, b.value);
        }
    }

    // Reference values computed with 30-digit de Hoog and Talbot inversion.
    #[test]
    fn psi_cdf_reference_values() {
        let inv = PsiInverter::default();
        let half = [
            (0.25, 0.31830988618379),
            (1.0, 0.63661977236758),
            (1.5, 0.76361888),
            (2.0, 0.84570297),
            (5.0, 0.98809800),
        ];
        for (x, want) in half {
            let euler = inv.cdf_with(InverterKind::Euler, x, 0.5).unwrap();
            assert_abs_diff_eq!(euler, want, epsilon = 1e-6);
            let stehfest = inv.cdf_with(InverterKind::GaverStehfest, x, 0.5).unwrap();
            assert_abs_diff_eq!(stehfest, want, epsilon = 1e-3);
        }
        let two_thirds = [(0.5, 0.2604844), (2.0, 0.6334900), (5.0, 0.9104475)];
        for (x, want) in two_thirds {
            let got = inv.cdf_with(InverterKind::Euler, x, 2.0 / 3.0).unwrap();
            assert_abs_diff_eq!(got, want, epsilon = 1e-5);
        }
    }

    #[test]
    fn laplace_self_check() {
        // Re-transform the inverted CDF by quadrature and compare with
        // 1 / (s 1F1).
        let delta = 0.5;
        let inv = PsiInverter::new(InverterKind::Euler);
        let n = 4000;
        let (t0, t1) = (1e-6f64, 400.0f64);
        let h = (t1 / t0).ln() / n as f64;
        let nodes: Vec<(f64, f64)> = (0..=n)
            .map(|k| {
                let t = t0 * (h * k as f64).exp();
                let f = if t <= 1.0 {
                    psi_cdf_closed(t, delta)
                } else {
                    inv.cdf(t, delta).unwrap()
                };
                (t, f)
            })
            .collect();
        for s in [0.5, 1.0, 2.0, 5.0] {
            // integral of e^-st F(t) dt in log coordinates, trapezoid rule
            let g = |&(t, f): &(f64, f64)| (-s * t).exp() * f * t;
            let mut acc = 0.5 * (g(&nodes[0]) + g(&nodes[n]));
            acc += nodes[1..n].iter().map(g).sum::<f64>();
            let head = psi_cdf_closed(t0, delta) * t0 / (1.0 + delta);
            let got = acc * h + head;
            let want = psi_cdf_transform(s, delta).unwrap();
            assert_abs_diff_eq!(got, want, epsilon = 1e-3);
        }
    }

    #[test]
    fn log_grid_endpoints() {
        let g = log_grid(1e-3, 10.0, 5);
        assert_eq!(g.len(), 5);
        assert_relative_eq!(g[0], 1e-3, max_relative = 1e-14);
        assert_relative_eq!(g[4], 10.0, max_relative = 1e-14);
    }
}
