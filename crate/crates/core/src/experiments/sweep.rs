//! Average rates over Poisson deployments with two co-cell users.

use rayon::prelude::*;

use super::benchmark;
use super::config::{ExperimentConfig, SchemeKind};
use super::stats::{mean_with_ci, MeanCi};
use crate::channel::{instantaneous_ratio, interference, FadingDraw};
use crate::error::{Error, Result};
use crate::geometry::{sample_cocell_pair, Association};
use crate::pair::{allocate_phi, oma_rates, Objective, OrderedPair};
use crate::rate_control::phi_approx;
use crate::rng::{mix_seed, substream};
use crate::row;
use crate::table::Table;

/// Skipped realizations above this fraction of the requested runs flag a row.
pub const SKIP_FLAG_FRACTION: f64 = 0.01;

/// Mean rate of one scheme at one grid point.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub lambda: f64,
    pub alpha: f64,
    pub epsilon: [f64; 2],
    pub mu: f64,
    pub objective: Objective,
    pub scheme: SchemeKind,
    /// Per-user rate for equal-rate, sum rate for max-sum-rate, in bps/Hz.
    pub rate: MeanCi,
    pub skipped: usize,
}

impl SweepRow {
    pub fn flagged(&self, requested: usize) -> bool {
        self.skipped as f64 > SKIP_FLAG_FRACTION * requested as f64
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub runs_requested: usize,
    pub rows: Vec<SweepRow>,
}

impl SweepResult {
    /// Rows matching the given scheme and objective, in grid order.
    pub fn select(
        &self,
        scheme: SchemeKind,
        objective: Objective,
    ) -> impl Iterator<Item = &SweepRow> {
        self.rows
            .iter()
            .filter(move |r| r.scheme == scheme && r.objective == objective)
    }

    pub fn to_table(&self, comment: &str) -> Table {
        let mut t = Table::new(
            comment,
            &[
                "lambda",
                "alpha",
                "epsilon_a",
                "epsilon_b",
                "mu",
                "objective",
                "scheme",
                "mean",
                "ci",
                "runs",
                "skipped",
                "flagged",
            ],
        );
        for r in &self.rows {
            t.push(row![
                r.lambda,
                r.alpha,
                r.epsilon[0],
                r.epsilon[1],
                r.mu,
                r.objective.name(),
                r.scheme.name(),
                r.rate.mean,
                r.rate.half_width,
                r.rate.n,
                r.skipped,
                r.flagged(self.runs_requested)
            ]);
        }
        t
    }
}

/// Average rate of the CSI-free schemes for thresholds `phi_a`, `phi_b`.
pub fn csifree_rate(
    phi_a: f64,
    phi_b: f64,
    mu: f64,
    objective: Objective,
    scheme: SchemeKind,
) -> Result<f64> {
    match scheme {
        SchemeKind::NomaCsifree => {
            let alloc = allocate_phi(phi_a, phi_b, mu, 1.0, objective)?;
            Ok(match objective {
                Objective::EqualRate => alloc.rates[0],
                Objective::MaxSumRate => alloc.sum_rate(),
            })
        }
        SchemeKind::OmaCsifree => {
            let [r1, r2] = oma_rates(&OrderedPair::new(phi_a, phi_b)?, objective);
            Ok(match objective {
                Objective::EqualRate => r1,
                Objective::MaxSumRate => r1 + r2,
            })
        }
        other => Err(Error::invalid(
            "scheme",
            format!("{other} needs instantaneous SIRs"),
        )),
    }
}

/// Average rate of the full-CSI schemes for instantaneous SIRs.
pub fn benchmark_rate(
    rho_a: f64,
    rho_b: f64,
    mu: f64,
    objective: Objective,
    scheme: SchemeKind,
) -> Result<f64> {
    match (scheme, objective) {
        (SchemeKind::NomaBenchmark, Objective::EqualRate) => {
            benchmark::equal_rate(rho_a, rho_b, mu)
        }
        (SchemeKind::NomaBenchmark, Objective::MaxSumRate) => {
            Ok(benchmark::sum_rate(rho_a, rho_b, mu)?.1)
        }
        (SchemeKind::OmaBenchmark, _) => benchmark::oma_rate(rho_a, rho_b, objective),
        (other, _) => Err(Error::invalid(
            "scheme",
            format!("{other} is not a benchmark scheme"),
        )),
    }
}

fn ratio(link: &Association, h: f64, fading: &[f64], total_power: f64, alpha: f64) -> Result<f64> {
    let i = interference(&link.interferer_distances, fading, total_power, alpha)?;
    instantaneous_ratio(h, link.serving_distance, total_power, i, alpha)
}

/// Grid cells of one realization, in the row order of [`run_sweep`].
fn realization_values(
    config: &ExperimentConfig,
    links: &[Association],
    fading: &FadingDraw,
) -> Result<Vec<f64>> {
    let mut out = Vec::new();
    for &alpha in &config.alpha_grid {
        let rho = if config.schemes.iter().any(|s| s.is_benchmark()) {
            Some([
                ratio(
                    &links[0],
                    fading.signal[0],
                    &fading.interferers[0],
                    config.total_power,
                    alpha,
                )?,
                ratio(
                    &links[1],
                    fading.signal[1],
                    &fading.interferers[1],
                    config.total_power,
                    alpha,
                )?,
            ])
        } else {
            None
        };
        for eps in &config.epsilon {
            let phi_a = phi_approx(&links[0].link(eps[0], alpha)?).value;
            let phi_b = phi_approx(&links[1].link(eps[1], alpha)?).value;
            for &mu in &config.mu_grid {
                for &objective in &config.objectives {
                    for &scheme in &config.schemes {
                        let v = match (scheme.is_benchmark(), rho) {
                            (true, Some([ra, rb])) => {
                                benchmark_rate(ra, rb, mu, objective, scheme)?
                            }
                            _ => csifree_rate(phi_a, phi_b, mu, objective, scheme)?,
                        };
                        out.push(v);
                    }
                }
            }
        }
    }
    Ok(out)
}

/// Seed of the deployments drawn at density `lambda`.
pub fn lambda_seed(seed: u64, lambda: f64) -> u64 {
    mix_seed(seed, lambda.to_bits())
}

/// Full sweep. Each realization is evaluated on every grid point, so
/// schemes and parameters are compared on common random numbers. Results
/// are independent of the number of worker threads.
pub fn run_sweep(config: &ExperimentConfig) -> Result<SweepResult> {
    config.validate()?;
    let mut rows = Vec::new();
    for &lambda in &config.lambda_grid {
        let seed = lambda_seed(config.seed, lambda);
        let deployment = config.deployment(lambda, seed)?;
        let per_run: Vec<Option<Vec<f64>>> = (0..config.runs as u64)
            .into_par_iter()
            .map(|k| {
                let mut rng = substream(seed, k);
                let net = match sample_cocell_pair(&deployment, &mut rng, config.max_pair_attempts)
                {
                    Ok(net) => net,
                    Err(Error::PairPlacement(_)) => return Ok(None),
                    Err(e) => return Err(e),
                };
                let counts = [
                    net.links[0].interferer_distances.len(),
                    net.links[1].interferer_distances.len(),
                ];
                let fading = FadingDraw::sample(&mut rng, &counts);
                realization_values(config, &net.links, &fading).map(Some)
            })
            .collect::<Result<_>>()?;
        let kept: Vec<&Vec<f64>> = per_run.iter().flatten().collect();
        let skipped = per_run.len() - kept.len();

        let mut cell = 0;
        for &alpha in &config.alpha_grid {
            for &eps in &config.epsilon {
                for &mu in &config.mu_grid {
                    for &objective in &config.objectives {
                        for &scheme in &config.schemes {
                            let samples: Vec<f64> = kept.iter().map(|v| v[cell]).collect();
                            rows.push(SweepRow {
                                lambda,
                                alpha,
                                epsilon: eps,
                                mu,
                                objective,
                                scheme,
                                rate: mean_with_ci(&samples)?,
                                skipped,
                            });
                            cell += 1;
                        }
                    }
                }
            }
        }
    }
    Ok(SweepResult {
        runs_requested: config.runs,
        rows,
    })
}

fn restricted(config: &ExperimentConfig, benchmark: bool) -> ExperimentConfig {
    let mut c = config.clone();
    c.schemes.retain(|s| s.is_benchmark() == benchmark);
    if c.schemes.is_empty() {
        c.schemes = SchemeKind::ALL
            .into_iter()
            .filter(|s| s.is_benchmark() == benchmark)
            .collect();
    }
    c
}

/// Sweep restricted to the CSI-free schemes.
pub fn run_csifree(config: &ExperimentConfig) -> Result<SweepResult> {
    run_sweep(&restricted(config, false))
}

/// Sweep restricted to the full-CSI benchmark schemes.
pub fn run_benchmark(config: &ExperimentConfig) -> Result<SweepResult> {
    run_sweep(&restricted(config, true))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pair::{equal_rate_gamma, OrderedPair};
    use crate::rate_control::rate_from_gamma;

    fn small() -> ExperimentConfig {
        ExperimentConfig {
            runs: 60,
            mean_bs_count: 60.0,
            mu_grid: vec![0.0, 0.5],
            ..Default::default()
        }
    }

    #[test]
    fn row_layout_and_determinism() {
        let cfg = small();
        let a = run_sweep(&cfg).unwrap();
        assert_eq!(a.rows.len(), 2 * 2 * 4);
        assert_eq!(a.rows[0].scheme, SchemeKind::NomaCsifree);
        assert_eq!(a.rows[4].objective, Objective::MaxSumRate);
        let b = run_sweep(&cfg).unwrap();
        assert_eq!(a, b);
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap();
        let c = pool.install(|| run_sweep(&cfg)).unwrap();
        assert_eq!(a.to_table("x").to_csv(), c.to_table("x").to_csv());
    }

    #[test]
    fn restricted_runs_match_full_sweep() {
        let cfg = small();
        let full = run_sweep(&cfg).unwrap();
        let free = run_csifree(&cfg).unwrap();
        for r in &free.rows {
            let same = full
                .rows
                .iter()
                .find(|f| f.scheme == r.scheme && f.objective == r.objective && f.mu == r.mu)
                .unwrap();
            assert_eq!(same.rate, r.rate);
        }
        assert!(run_benchmark(&cfg)
            .unwrap()
            .rows
            .iter()
            .all(|r| r.scheme.is_benchmark()));
    }

    #[test]
    fn equal_rate_estimator_matches_closed_form() {
        for (a, b) in [(0.3, 2.0), (1.5, 0.2), (0.7, 0.7)] {
            for mu in [0.0, 0.3, 1.0] {
                let via_alloc =
                    csifree_rate(a, b, mu, Objective::EqualRate, SchemeKind::NomaCsifree).unwrap();
                let pair = OrderedPair::new(a, b).unwrap();
                let direct = rate_from_gamma(equal_rate_gamma(&pair, mu).unwrap()).unwrap();
                assert!(
                    (via_alloc - direct).abs() <= 1e-12,
                    "{via_alloc} vs {direct}"
                );
            }
        }
    }

    #[test]
    fn csifree_rejects_benchmark_scheme() {
        assert!(csifree_rate(
            1.0,
            2.0,
            0.1,
            Objective::EqualRate,
            SchemeKind::OmaBenchmark
        )
        .is_err());
        assert!(
            benchmark_rate(1.0, 2.0, 0.1, Objective::EqualRate, SchemeKind::OmaCsifree).is_err()
        );
    }
}
