//! Empirical outage of allocated thresholds over fading, with the network
//! geometry held fixed.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::{interference, sir_after_sic, FadingDraw, PowerProfile};
use crate::error::{Error, Result};
use crate::geometry::{sample_cocell_pair, DeploymentConfig, NetworkRealization};
use crate::pair::{allocate_phi, Objective, UeLabel};
use crate::rate_control::{phi_approx, phi_exact};
use crate::rng::{mix_seed, substream};
use crate::row;
use crate::table::Table;

const CHUNK: usize = 2_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AuditConfig {
    pub realizations: usize,
    pub draws: usize,
    pub epsilons: Vec<f64>,
    pub mu: f64,
    pub alpha: f64,
    pub objective: Objective,
    pub density: f64,
    pub mean_bs_count: f64,
    pub guard_fraction: f64,
    pub seed: u64,
}

impl Default for AuditConfig {
    fn default() -> Self {
        AuditConfig {
            realizations: 20,
            draws: 100_000,
            epsilons: vec![1e-1, 1e-2],
            mu: 0.1,
            alpha: 4.0,
            objective: Objective::EqualRate,
            density: 1e-4,
            mean_bs_count: 200.0,
            guard_fraction: 0.2,
            seed: 1,
        }
    }
}

/// Outage of one user in one realization at one reliability target.
#[derive(Debug, Clone, PartialEq)]
pub struct AuditRow {
    pub realization: usize,
    pub epsilon: f64,
    pub user: UeLabel,
    pub gamma_exact: f64,
    pub outage_exact: f64,
    pub gamma_approx: f64,
    pub outage_approx: f64,
    /// Binomial standard deviation `sqrt(eps (1 - eps) / draws)`.
    pub sigma: f64,
}

impl AuditRow {
    /// Exact-threshold outage within three standard deviations of the target.
    pub fn passes(&self) -> bool {
        (self.outage_exact - self.epsilon).abs() <= 3.0 * self.sigma
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AuditReport {
    pub draws: usize,
    pub rows: Vec<AuditRow>,
}

impl AuditReport {
    pub fn passes(&self) -> bool {
        self.rows.iter().all(AuditRow::passes)
    }

    pub fn passes_at(&self, epsilon: f64) -> bool {
        self.rows
            .iter()
            .filter(|r| r.epsilon == epsilon)
            .all(AuditRow::passes)
    }

    pub fn to_table(&self, comment: &str) -> Table {
        let mut t = Table::new(
            comment,
            &[
                "realization",
                "epsilon",
                "user",
                "gamma_exact",
                "outage_exact",
                "gamma_approx",
                "outage_approx",
                "sigma",
                "pass",
            ],
        );
        for r in &self.rows {
            t.push(row![
                r.realization,
                r.epsilon,
                r.user.to_string(),
                r.gamma_exact,
                r.outage_exact,
                r.gamma_approx,
                r.outage_approx,
                r.sigma,
                r.passes()
            ]);
        }
        t
    }
}

/// Allocation of one pair at one target with one threshold method.
struct Setup {
    epsilon: usize,
    /// 0 for exact thresholds, 1 for the approximation.
    method: usize,
    profile: PowerProfile,
    /// Decoding position of users `[A, B]`.
    position: [usize; 2],
    /// Allocated thresholds of users `[A, B]`.
    gamma: [f64; 2],
}

fn setups(net: &NetworkRealization, config: &AuditConfig) -> Result<Vec<Setup>> {
    let mut out = Vec::new();
    for (e, &epsilon) in config.epsilons.iter().enumerate() {
        let links = [
            net.links[0].link(epsilon, config.alpha)?,
            net.links[1].link(epsilon, config.alpha)?,
        ];
        let phis = [
            [phi_exact(&links[0])?.value, phi_exact(&links[1])?.value],
            [phi_approx(&links[0]).value, phi_approx(&links[1]).value],
        ];
        for (method, phi) in phis.iter().enumerate() {
            let alloc = allocate_phi(phi[0], phi[1], config.mu, 1.0, config.objective)?;
            let (position, gamma) = match alloc.first {
                UeLabel::A => ([0, 1], alloc.gammas),
                UeLabel::B => ([1, 0], [alloc.gammas[1], alloc.gammas[0]]),
            };
            out.push(Setup {
                epsilon: e,
                method,
                profile: PowerProfile::two_user(1.0, alloc.beta, config.mu)?,
                position,
                gamma,
            });
        }
    }
    Ok(out)
}

/// Runs the audit: each realization gets its own deployment and pair, both
/// users are allocated with exact and approximate thresholds, and outage is
/// counted over `draws` independent fading draws.
pub fn reliability_audit(config: &AuditConfig) -> Result<AuditReport> {
    if config.realizations == 0 || config.draws == 0 {
        return Err(Error::invalid(
            "audit",
            "need at least one realization and one draw",
        ));
    }
    let deployment = DeploymentConfig::square_with_mean_count(
        config.density,
        config.mean_bs_count,
        config.guard_fraction,
        config.seed,
    )?;
    let n = config.draws as f64;
    let mut rows = Vec::new();
    for k in 0..config.realizations {
        let mut rng = substream(config.seed, k as u64);
        let net = sample_cocell_pair(&deployment, &mut rng, 1_000_000)?;
        let setups = setups(&net, config)?;
        let counts = outage_counts(&net, &setups, config, mix_seed(config.seed, k as u64))?;

        for (e, &epsilon) in config.epsilons.iter().enumerate() {
            let pick = |method: usize| {
                setups
                    .iter()
                    .position(|s| s.epsilon == e && s.method == method)
                    .expect("setup exists")
            };
            let (exact, approx) = (pick(0), pick(1));
            for (u, user) in [UeLabel::A, UeLabel::B].into_iter().enumerate() {
                rows.push(AuditRow {
                    realization: k,
                    epsilon,
                    user,
                    gamma_exact: setups[exact].gamma[u],
                    outage_exact: counts[exact][u] as f64 / n,
                    gamma_approx: setups[approx].gamma[u],
                    outage_approx: counts[approx][u] as f64 / n,
                    sigma: (epsilon * (1.0 - epsilon) / n).sqrt(),
                });
            }
        }
    }
    Ok(AuditReport {
        draws: config.draws,
        rows,
    })
}

/// Outage counts of users `[A, B]` for every setup.
fn outage_counts(
    net: &NetworkRealization,
    setups: &[Setup],
    config: &AuditConfig,
    seed: u64,
) -> Result<Vec<[u64; 2]>> {
    let counts = [
        net.links[0].interferer_distances.len(),
        net.links[1].interferer_distances.len(),
    ];
    let chunks = config.draws.div_ceil(CHUNK);
    let per_chunk: Vec<Vec<[u64; 2]>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = substream(seed, c as u64);
            let draws = CHUNK.min(config.draws - c * CHUNK);
            let mut out = vec![[0u64; 2]; setups.len()];
            for _ in 0..draws {
                let fading = FadingDraw::sample(&mut rng, &counts);
                let mut interf = [0.0; 2];
                for u in 0..2 {
                    interf[u] = interference(
                        &net.links[u].interferer_distances,
                        &fading.interferers[u],
                        1.0,
                        config.alpha,
                    )?;
                }
                for (s, setup) in setups.iter().enumerate() {
                    for u in 0..2 {
                        let sir = sir_after_sic(
                            setup.position[u],
                            fading.signal[u],
                            net.links[u].serving_distance,
                            &setup.profile,
                            interf[u],
                            config.alpha,
                        )?;
                        if sir < setup.gamma[u] {
                            out[s][u] += 1;
                        }
                    }
                }
            }
            Ok(out)
        })
        .collect::<Result<_>>()?;

    let mut total = vec![[0u64; 2]; setups.len()];
    for chunk in per_chunk {
        for (t, c) in total.iter_mut().zip(chunk) {
            t[0] += c[0];
            t[1] += c[1];
        }
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_audit_is_deterministic_and_calibrated() {
        let cfg = AuditConfig {
            realizations: 2,
            draws: 20_000,
            epsilons: vec![0.1],
            mean_bs_count: 60.0,
            ..Default::default()
        };
        let a = reliability_audit(&cfg).unwrap();
        assert_eq!(a.rows.len(), 4);
        for r in &a.rows {
            // 5 sigma keeps this unit test far from chance failures
            assert!((r.outage_exact - 0.1).abs() <= 5.0 * r.sigma, "{r:?}");
            assert!(r.gamma_approx <= r.gamma_exact);
            assert!(r.outage_approx <= r.outage_exact);
        }
        assert_eq!(a, reliability_audit(&cfg).unwrap());
    }

    #[test]
    fn rejects_empty_audit() {
        let cfg = AuditConfig {
            draws: 0,
            ..Default::default()
        };
        assert!(reliability_audit(&cfg).is_err());
    }
}
