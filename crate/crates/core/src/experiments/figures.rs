//! Data behind each published figure, as plot-ready tables.

use std::fmt;
use std::str::FromStr;

use super::benchmark::golden_section_max;
use super::config::{ExperimentConfig, SchemeKind};
use super::sweep::run_sweep;
use crate::error::{Error, Result};
use crate::geometry::{make_fixture, FixtureRule, Point, UePlacement};
use crate::pair::{
    equal_rate_gamma, equal_rate_mu_threshold, fairness_kappa, kappa_noma_half_power, oma_rates,
    sum_rate_beta_star, sum_rate_gamma_tilde, sum_rate_oma_mu_threshold, user_gammas,
    xi_relative_error, FairnessScheme, Objective, OrderedPair,
};
use crate::rate_control::{f_limit, f_of_n, phi_approx, phi_exact, rate_from_gamma};
use crate::row;
use crate::table::Table;
use crate::threshold::{
    cdf_curve, log_grid, threshold_cdf_montecarlo, CdfMethod, PsiInverter, ThresholdQuery,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FigureId {
    F2a,
    F2b,
    F3a,
    F3b,
    F4,
    F5a,
    F5b,
    F6,
    F7a,
    F7b,
    F8a,
    F8b,
    F9,
    F10,
}

impl FigureId {
    pub const ALL: [FigureId; 14] = [
        FigureId::F2a,
        FigureId::F2b,
        FigureId::F3a,
        FigureId::F3b,
        FigureId::F4,
        FigureId::F5a,
        FigureId::F5b,
        FigureId::F6,
        FigureId::F7a,
        FigureId::F7b,
        FigureId::F8a,
        FigureId::F8b,
        FigureId::F9,
        FigureId::F10,
    ];

    pub fn name(self) -> &'static str {
        match self {
            FigureId::F2a => "2a",
            FigureId::F2b => "2b",
            FigureId::F3a => "3a",
            FigureId::F3b => "3b",
            FigureId::F4 => "4",
            FigureId::F5a => "5a",
            FigureId::F5b => "5b",
            FigureId::F6 => "6",
            FigureId::F7a => "7a",
            FigureId::F7b => "7b",
            FigureId::F8a => "8a",
            FigureId::F8b => "8b",
            FigureId::F9 => "9",
            FigureId::F10 => "10",
        }
    }

    /// Whether the figure is built from Monte-Carlo runs.
    pub fn is_stochastic(self) -> bool {
        matches!(
            self,
            FigureId::F2b
                | FigureId::F6
                | FigureId::F7a
                | FigureId::F7b
                | FigureId::F8a
                | FigureId::F8b
        )
    }
}

impl fmt::Display for FigureId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FigureId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().trim_start_matches("fig").trim_start_matches('-');
        FigureId::ALL
            .into_iter()
            .find(|f| f.name() == key)
            .ok_or_else(|| Error::UnknownFigure(s.to_string()))
    }
}

/// SIC imperfections of the optimum-ratio figures.
pub const RATIO_MU_GRID: [f64; 6] = [0.0, 0.05, 0.1, 0.2, 0.5, 1.0];

/// Reproduces figure `id`. Stochastic figures take runs, seed and the
/// deployment scale from `config`; their parameter grids are fixed by the
/// figure.
pub fn reproduce_figure(id: FigureId, config: &ExperimentConfig) -> Result<Table> {
    match id {
        FigureId::F2a => fig_2a(),
        FigureId::F2b => fig_2b(config),
        FigureId::F3a => optimum_ratio_table(Objective::EqualRate),
        FigureId::F3b => fig_3b(),
        FigureId::F4 => optimum_ratio_table(Objective::MaxSumRate),
        FigureId::F5a => fig_5a(),
        FigureId::F5b => fig_5b(),
        FigureId::F6 => fig_6(config),
        FigureId::F7a => rate_vs_alpha(config, Objective::EqualRate),
        FigureId::F7b => rate_vs_mu(config, Objective::EqualRate),
        FigureId::F8a => rate_vs_alpha(config, Objective::MaxSumRate),
        FigureId::F8b => rate_vs_mu(config, Objective::MaxSumRate),
        FigureId::F9 => fig_9(),
        FigureId::F10 => fig_10(),
    }
}

/// `lo, lo + step, ..., hi` with `n` points.
fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64)
        .collect()
}

fn fig_2a() -> Result<Table> {
    let mut t = Table::new(
        "single-user SIR threshold vs target error probability; affine interferer layouts \
         r_j = 40 + spacing*j (100 interferers), serving distance 30 m, alpha = 4",
        &[
            "layout",
            "epsilon",
            "phi_exact",
            "phi_approx",
            "relative_error",
        ],
    );
    for rule in FixtureRule::ALL {
        let fixture = make_fixture(rule, 100, 30.0)?;
        for eps in log_grid(1e-3, 0.3, 25) {
            let link = fixture.link(eps, 4.0)?;
            let exact = phi_exact(&link)?.value;
            let approx = phi_approx(&link).value;
            t.push(row![
                rule.name(),
                eps,
                exact,
                approx,
                (exact - approx) / exact
            ]);
        }
    }
    Ok(t)
}

fn fig_2b(config: &ExperimentConfig) -> Result<Table> {
    let mut t = Table::new(
        "distribution of the OMA SIR threshold over Poisson deployments, alpha = 4; \
         analytic by Laplace inversion, closed form, and Monte Carlo with 95% half-width",
        &[
            "epsilon",
            "theta_db",
            "F_analytic",
            "F_closed",
            "F_mc",
            "ci",
        ],
    );
    let lambda = config.lambda_grid.first().copied().unwrap_or(1e-4);
    let deployment = config.deployment(lambda, config.seed)?;
    let inverter = PsiInverter::default();
    let thetas_db = linspace(-40.0, 10.0, 51);
    let thetas: Vec<f64> = thetas_db.iter().map(|d| 10f64.powf(d / 10.0)).collect();
    for eps in [1e-1, 1e-2] {
        let query = ThresholdQuery::oma(1.0, eps, 4.0)?;
        let analytic = cdf_curve(&query, &thetas, CdfMethod::Inversion, &inverter)?;
        let closed = cdf_curve(&query, &thetas, CdfMethod::ClosedForm, &inverter)?;
        let mc = threshold_cdf_montecarlo(
            &query,
            &deployment,
            config.runs,
            &thetas,
            UePlacement::At(Point::new(0.0, 0.0)),
        )?;
        for k in 0..thetas.len() {
            t.push(row![
                eps,
                thetas_db[k],
                analytic.values[k],
                closed.values[k],
                mc.values[k],
                mc.errors[k]
            ]);
        }
    }
    Ok(t)
}

/// Objective maximized by the optimum-ratio figures.
fn pair_objective(pair: &OrderedPair, mu: f64, objective: Objective) -> Result<f64> {
    match objective {
        Objective::EqualRate => equal_rate_gamma(pair, mu),
        Objective::MaxSumRate => sum_rate_gamma_tilde(pair, mu, 0.5),
    }
}

/// Ratio `phi1 / phi2` in `(0, 1]` that maximizes the objective at a fixed
/// sum `phi1 + phi2`: a grid scan followed by golden-section refinement.
pub fn optimum_ratio(sum: f64, mu: f64, objective: Objective) -> Result<f64> {
    let eval = |ratio: f64| -> Result<f64> {
        let phi2 = sum / (1.0 + ratio);
        let pair = OrderedPair::from_decoding_order(sum - phi2, phi2)?;
        pair_objective(&pair, mu, objective)
    };
    let n = 1000;
    let grid: Vec<f64> = (1..=n).map(|k| k as f64 / n as f64).collect();
    let mut best = 0;
    let mut best_v = f64::NEG_INFINITY;
    for (k, &r) in grid.iter().enumerate() {
        let v = eval(r)?;
        if v > best_v {
            best = k;
            best_v = v;
        }
    }
    let lo = if best == 0 { grid[0] } else { grid[best - 1] };
    let hi = grid[(best + 1).min(n - 1)];
    Ok(golden_section_max(eval, lo, hi, 1e-9)?.0)
}

fn optimum_ratio_table(objective: Objective) -> Result<Table> {
    let comment = match objective {
        Objective::EqualRate => "threshold ratio phi1/phi2 maximizing the equal-rate SIR threshold at fixed phi1 + phi2",
        Objective::MaxSumRate => {
            "threshold ratio phi1/phi2 maximizing (1 + gamma1)(1 + gamma2) at fixed phi1 + phi2, half-power split"
        }
    };
    let mut t = Table::new(comment, &["mu", "phi_sum", "ratio"]);
    for mu in RATIO_MU_GRID {
        for sum in log_grid(0.1, 100.0, 31) {
            t.push(row![mu, sum, optimum_ratio(sum, mu, objective)?]);
        }
    }
    Ok(t)
}

fn fig_3b() -> Result<Table> {
    let mut t = Table::new(
        "equal-rate per-user rate (bps/Hz) vs SIC imperfection for NOMA and equal-partition OMA, phi2 = 0.6",
        &["phi1", "phi2", "mu", "rate_noma", "rate_oma", "mu_threshold"],
    );
    for phi1 in [0.4, 0.5] {
        let pair = OrderedPair::from_decoding_order(phi1, 0.6)?;
        let oma = oma_rates(&pair, Objective::EqualRate)[0];
        for mu in linspace(0.0, 1.0, 21) {
            let noma = rate_from_gamma(equal_rate_gamma(&pair, mu)?)?;
            t.push(row![
                phi1,
                0.6,
                mu,
                noma,
                oma,
                equal_rate_mu_threshold(&pair)
            ]);
        }
    }
    Ok(t)
}

fn fig_5a() -> Result<Table> {
    let mut t = Table::new(
        "max-sum-rate total rate (bps/Hz) vs SIC imperfection for NOMA and equal-partition OMA, phi1 = 0.1",
        &["phi1", "phi2", "mu", "beta", "rate_noma", "rate_oma", "mu_threshold_oma"],
    );
    for phi2 in [0.2, 0.6] {
        let pair = OrderedPair::from_decoding_order(0.1, phi2)?;
        let [o1, o2] = oma_rates(&pair, Objective::MaxSumRate);
        for mu in linspace(0.0, 1.0, 21) {
            let beta = sum_rate_beta_star(&pair, mu)?;
            let [g1, g2] = user_gammas(&pair, mu, beta)?;
            let noma = rate_from_gamma(g1)? + rate_from_gamma(g2)?;
            t.push(row![
                0.1,
                phi2,
                mu,
                beta,
                noma,
                o1 + o2,
                sum_rate_oma_mu_threshold(&pair)
            ]);
        }
    }
    Ok(t)
}

fn fig_5b() -> Result<Table> {
    let mut t = Table::new(
        "fairness coefficient gamma1/gamma2 vs SIC imperfection at the half-power split, and phi1/phi2 for OMA; \
         phi1 = 0.1",
        &["phi1", "phi2", "mu", "kappa_noma", "kappa_oma", "noma_split_optimal"],
    );
    for phi2 in [0.2, 0.6] {
        let pair = OrderedPair::from_decoding_order(0.1, phi2)?;
        let oma = fairness_kappa(&pair, 0.0, FairnessScheme::Oma)?;
        for mu in linspace(0.0, 1.0, 21) {
            let optimal = sum_rate_beta_star(&pair, mu)? == 0.5;
            t.push(row![
                0.1,
                phi2,
                mu,
                kappa_noma_half_power(&pair, mu),
                oma,
                optimal
            ]);
        }
    }
    Ok(t)
}

fn scaled_config(config: &ExperimentConfig) -> ExperimentConfig {
    ExperimentConfig {
        lambda_grid: vec![1e-4],
        alpha_grid: vec![4.0],
        mu_grid: vec![0.1],
        epsilon: vec![[1e-1, 1e-1], [1e-2, 1e-2]],
        ..config.clone()
    }
}

fn fig_6(config: &ExperimentConfig) -> Result<Table> {
    let cfg = ExperimentConfig {
        lambda_grid: vec![0.5e-4, 1e-4, 2e-4],
        epsilon: vec![[1e-2, 1e-2]],
        objectives: vec![Objective::EqualRate, Objective::MaxSumRate],
        schemes: vec![SchemeKind::NomaCsifree, SchemeKind::OmaCsifree],
        ..scaled_config(config)
    };
    Ok(run_sweep(&cfg)?.to_table(
        "average rate (bps/Hz) vs BS density, CSI-free NOMA and OMA, alpha = 4, mu = 0.1",
    ))
}

fn rate_vs_alpha(config: &ExperimentConfig, objective: Objective) -> Result<Table> {
    let cfg = ExperimentConfig {
        alpha_grid: vec![3.0, 3.5, 4.0, 4.5, 5.0, 5.5, 6.0],
        objectives: vec![objective],
        schemes: SchemeKind::ALL.to_vec(),
        ..scaled_config(config)
    };
    let comment = format!("average {objective} rate (bps/Hz) vs path-loss exponent, mu = 0.1");
    Ok(run_sweep(&cfg)?.to_table(&comment))
}

fn rate_vs_mu(config: &ExperimentConfig, objective: Objective) -> Result<Table> {
    let cfg = ExperimentConfig {
        mu_grid: linspace(0.0, 1.0, 11),
        objectives: vec![objective],
        schemes: SchemeKind::ALL.to_vec(),
        ..scaled_config(config)
    };
    let comment = format!("average {objective} rate (bps/Hz) vs SIC imperfection, alpha = 4");
    Ok(run_sweep(&cfg)?.to_table(&comment))
}

fn fig_9() -> Result<Table> {
    let mut t = Table::new(
        "threshold factor f(n, epsilon) with unit mean power ratio, with its bounds epsilon/(1-epsilon) and -ln(1-epsilon)",
        &["n", "epsilon", "f", "upper", "lower"],
    );
    for n in [1u64, 2, 5, 10, 100, 1000] {
        for eps in log_grid(1e-3, 0.5, 25) {
            t.push(row![
                n,
                eps,
                f_of_n(n, eps),
                eps / (1.0 - eps),
                f_limit(eps)
            ]);
        }
    }
    Ok(t)
}

fn fig_10() -> Result<Table> {
    let mut t = Table::new(
        "relative error (percent) of ((2 + gamma1 + gamma2)/2)^2 as an estimate of (1 + gamma1)(1 + gamma2)",
        &["gamma2", "gamma1", "xi_percent"],
    );
    for g2 in [1e-2, 1e-1, 1.0] {
        for g1 in log_grid(1e-3, 10.0, 41) {
            t.push(row![g2, g1, xi_relative_error(g1, g2)]);
        }
    }
    Ok(t)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ids_round_trip() {
        for id in FigureId::ALL {
            assert_eq!(id.name().parse::<FigureId>().unwrap(), id);
        }
        assert_eq!("fig-7b".parse::<FigureId>().unwrap(), FigureId::F7b);
        assert!(matches!(
            "11".parse::<FigureId>(),
            Err(Error::UnknownFigure(_))
        ));
    }

    #[test]
    fn ratio_never_exceeds_one() {
        let t = reproduce_figure(FigureId::F3a, &ExperimentConfig::default()).unwrap();
        let ratios = t.numeric_column("ratio").unwrap();
        assert!(ratios.iter().all(|&r| r > 0.0 && r <= 1.0));
        // with SIC always failing, equal thresholds are best
        let mus = t.numeric_column("mu").unwrap();
        for (mu, r) in mus.iter().zip(&ratios) {
            if *mu == 1.0 {
                assert!((r - 1.0).abs() < 1e-6, "{r}");
            }
        }
    }

    #[test]
    fn f_curves_lie_between_bounds() {
        let t = fig_9().unwrap();
        let f = t.numeric_column("f").unwrap();
        let up = t.numeric_column("upper").unwrap();
        let lo = t.numeric_column("lower").unwrap();
        for k in 0..f.len() {
            assert!(lo[k] <= f[k] * (1.0 + 1e-12) && f[k] <= up[k] * (1.0 + 1e-12));
        }
    }

    #[test]
    fn xi_vanishes_on_diagonal() {
        for g in [1e-2, 0.1, 1.0] {
            assert!(xi_relative_error(g, g).abs() < 1e-12);
        }
        let t = fig_10().unwrap();
        assert!(t
            .numeric_column("xi_percent")
            .unwrap()
            .iter()
            .all(|&x| x >= -1e-12));
    }

    #[test]
    fn analytic_figures_have_rows() {
        for id in FigureId::ALL.into_iter().filter(|f| !f.is_stochastic()) {
            let t = reproduce_figure(id, &ExperimentConfig::default()).unwrap();
            assert!(!t.rows.is_empty(), "{id}");
            assert!(t.rows.iter().all(|r| r.len() == t.header.len()));
        }
    }
}
