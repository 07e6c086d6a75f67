use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};
use noma_core::channel::PowerProfile;
use noma_core::experiments::{reliability_audit, reproduce_figure, run_sweep, FigureId};
use noma_core::geometry::{DeploymentConfig, Point, UePlacement};
use noma_core::pair::{self, allocate_oma, allocate_phi, AllocationResult, UeLabel};
use noma_core::rate_control::LinkSpec;
use noma_core::row;
use noma_core::table::Table;
use noma_core::threshold::{
    cdf_curve, threshold_cdf, threshold_cdf_montecarlo, CdfKind, CdfMethod, PsiInverter,
    ThresholdQuery,
};

use crate::config::{FileConfig, LinkConfig, ManifestInfo};
use crate::RunContext;

const DEFAULT_MU: f64 = 0.1;

fn write_outputs(
    cfg: &mut FileConfig,
    ctx: &RunContext,
    command: &str,
    tables: &[(String, Table)],
) -> Result<()> {
    fs::create_dir_all(&ctx.out).with_context(|| format!("creating {}", ctx.out.display()))?;
    for (name, table) in tables {
        write_file(&ctx.out.join(name), &table.to_csv())?;
        if !ctx.quiet {
            println!(
                "wrote {} ({} rows)",
                ctx.out.join(name).display(),
                table.rows.len()
            );
        }
    }
    cfg.manifest = Some(ManifestInfo {
        tool: "noma-lab".into(),
        version: env!("CARGO_PKG_VERSION").into(),
        command: command.into(),
        outputs: tables.iter().map(|(n, _)| n.clone()).collect(),
    });
    write_file(&ctx.out.join("manifest.toml"), &cfg.to_toml()?)
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn link_spec(link: &LinkConfig) -> Result<LinkSpec> {
    let mut distances = link.interferer_distances.clone();
    distances.sort_by(f64::total_cmp);
    Ok(LinkSpec::new(
        link.serving_distance,
        distances,
        link.epsilon,
        link.alpha,
    )?)
}

fn verdict(noma: bool) -> &'static str {
    if noma {
        "noma"
    } else {
        "oma"
    }
}

pub fn allocate(cfg: &mut FileConfig, ctx: &RunContext) -> Result<()> {
    let a = &mut cfg.allocate;
    let mu = match a.mu {
        Some(mu) => mu,
        None => {
            eprintln!("note: mu not given, using {DEFAULT_MU}");
            a.mu = Some(DEFAULT_MU);
            DEFAULT_MU
        }
    };
    let noma = match (a.phi_a, a.phi_b, &a.link_a, &a.link_b) {
        (Some(pa), Some(pb), _, _) => allocate_phi(pa, pb, mu, a.total_power, a.objective)?,
        (None, None, Some(la), Some(lb)) => pair::allocate(
            &link_spec(la)?,
            &link_spec(lb)?,
            mu,
            a.total_power,
            a.objective,
        )?,
        _ => bail!("allocate needs phi_a and phi_b, or link_a and link_b"),
    };
    let (phi_a, phi_b) = match noma.first {
        UeLabel::A => (noma.phi[0], noma.phi[1]),
        UeLabel::B => (noma.phi[1], noma.phi[0]),
    };
    let oma = allocate_oma(phi_a, phi_b, a.total_power, a.objective)?;
    if !ctx.quiet {
        print_allocation(&noma, &oma, mu);
    }
    if ctx.out_given {
        let mut t = Table::new(
            format!("two-user allocation, {}, mu = {mu}", noma.objective),
            &[
                "scheme", "position", "user", "phi", "power", "gamma", "rate",
            ],
        );
        for r in [&noma, &oma] {
            let scheme = format!("{:?}", r.scheme).to_lowercase();
            for k in 0..2 {
                let user = if k == 0 { r.first } else { r.first.other() };
                t.push(row![
                    scheme.as_str(),
                    (k + 1) as f64,
                    user.to_string(),
                    r.phi[k],
                    r.powers[k],
                    r.gammas[k],
                    r.rates[k]
                ]);
            }
        }
        write_outputs(cfg, ctx, "allocate", &[("allocation.csv".into(), t)])?;
    }
    Ok(())
}

fn print_allocation(noma: &AllocationResult, oma: &AllocationResult, mu: f64) {
    let second = noma.first.other();
    let tie = if noma.tie { " (tie)" } else { "" };
    println!("objective: {}", noma.objective);
    println!("mu: {mu}");
    println!("order: {}, {}{tie}", noma.first, second);
    println!("phi: {} {}", noma.phi[0], noma.phi[1]);
    println!("beta: {}", noma.beta);
    println!("power: {} {}", noma.powers[0], noma.powers[1]);
    println!("gamma: {} {}", noma.gammas[0], noma.gammas[1]);
    println!("rate: {} {}", noma.rates[0], noma.rates[1]);
    println!("oma_rate: {} {}", oma.rates[0], oma.rates[1]);
    println!("sum_rate: {} (oma {})", noma.sum_rate(), oma.sum_rate());
    println!("equal_rate_gate: {}", verdict(noma.equal_rate_gate));
    println!("sum_rate_gate: {}", verdict(noma.sum_rate_gate));
    println!("direct: {}", verdict(noma.beats_oma));
}

pub fn cdf(cfg: &mut FileConfig, ctx: &RunContext) -> Result<()> {
    let c = &cfg.cdf;
    if c.points < 2 || c.theta_max_db <= c.theta_min_db {
        bail!("cdf needs at least 2 points and theta_max_db above theta_min_db");
    }
    let profile = match c.beta {
        Some(beta) => PowerProfile::two_user(1.0, beta, c.mu)?,
        None => PowerProfile::single(1.0)?,
    };
    let query = ThresholdQuery::new(1.0, c.epsilon, c.alpha, profile, c.user)?;
    let step = (c.theta_max_db - c.theta_min_db) / (c.points - 1) as f64;
    let thetas_db: Vec<f64> = (0..c.points)
        .map(|k| c.theta_min_db + step * k as f64)
        .collect();
    let thetas: Vec<f64> = thetas_db.iter().map(|d| 10f64.powf(d / 10.0)).collect();
    let inverter = PsiInverter::new(c.inverter);
    let analytic = cdf_curve(&query, &thetas, CdfMethod::Inversion, &inverter)?;
    let closed = thetas
        .iter()
        .map(|&t| threshold_cdf(&query.at(t)?, CdfMethod::ClosedForm, &inverter))
        .collect::<noma_core::Result<Vec<_>>>()?;
    let sampled = if c.runs > 0 {
        let deployment = DeploymentConfig::square_with_mean_count(
            c.density,
            c.mean_bs_count,
            c.guard_fraction,
            c.seed,
        )?;
        Some(threshold_cdf_montecarlo(
            &query,
            &deployment,
            c.runs,
            &thetas,
            UePlacement::At(Point::new(0.0, 0.0)),
        )?)
    } else {
        None
    };

    let mut t = Table::new(
        format!(
            "SIR threshold distribution, epsilon = {}, alpha = {}, user {}, inverter {}",
            c.epsilon,
            c.alpha,
            c.user,
            format!("{:?}", c.inverter).to_lowercase()
        ),
        &[
            "theta_db",
            "theta",
            "F_inversion",
            "error",
            "F_closed",
            "closed_kind",
            "F_mc",
            "ci",
        ],
    );
    for k in 0..thetas.len() {
        let kind = match closed[k].kind {
            CdfKind::Exact => "exact",
            CdfKind::LowerBound => "lower-bound",
            CdfKind::Unreachable => "unreachable",
        };
        let (mc, ci) = match &sampled {
            Some(s) => (s.values[k].to_string(), s.errors[k].to_string()),
            None => (String::new(), String::new()),
        };
        t.push(row![
            thetas_db[k],
            thetas[k],
            analytic.values[k],
            analytic.errors[k],
            closed[k].value,
            kind,
            mc,
            ci
        ]);
    }
    write_outputs(cfg, ctx, "cdf", &[("cdf.csv".into(), t)])
}

pub fn sweep(cfg: &mut FileConfig, ctx: &RunContext) -> Result<()> {
    let result = run_sweep(&cfg.sweep)?;
    for row in &result.rows {
        if row.flagged(result.runs_requested) {
            eprintln!(
                "warning: lambda {} alpha {} mu {} {} {}: skipped {} of {} runs",
                row.lambda,
                row.alpha,
                row.mu,
                row.objective,
                row.scheme,
                row.skipped,
                result.runs_requested
            );
        }
    }
    let table = result.to_table("mean rate per user pair in bit/s/Hz with 95% half-width");
    write_outputs(cfg, ctx, "sweep", &[("sweep.csv".into(), table)])
}

pub fn audit(cfg: &mut FileConfig, ctx: &RunContext) -> Result<()> {
    let report = reliability_audit(&cfg.audit)?;
    if !ctx.quiet {
        for &eps in &cfg.audit.epsilons {
            let rows: Vec<_> = report.rows.iter().filter(|r| r.epsilon == eps).collect();
            let worst = rows
                .iter()
                .map(|r| (r.outage_exact - r.epsilon).abs() / r.sigma)
                .fold(0.0, f64::max);
            println!(
                "epsilon {eps}: {} ({} checks, worst {:.2} sigma)",
                if report.passes_at(eps) {
                    "PASS"
                } else {
                    "FAIL"
                },
                rows.len(),
                worst
            );
        }
    }
    let table = report.to_table(&format!(
        "empirical outage over {} fading draws per realization",
        report.draws
    ));
    write_outputs(cfg, ctx, "audit", &[("audit.csv".into(), table)])
}

pub fn figure(cfg: &mut FileConfig, ctx: &RunContext) -> Result<()> {
    if cfg.figure.ids.is_empty() {
        bail!("no figure requested; pass --figure <id> or --figure all");
    }
    let ids: Vec<FigureId> = if cfg.figure.ids.iter().any(|s| s.eq_ignore_ascii_case("all")) {
        FigureId::ALL.to_vec()
    } else {
        cfg.figure
            .ids
            .iter()
            .map(|s| s.parse())
            .collect::<noma_core::Result<_>>()?
    };
    cfg.figure.ids = ids.iter().map(|id| id.name().to_string()).collect();
    let mut tables = Vec::with_capacity(ids.len());
    for id in ids {
        tables.push((
            format!("fig-{}.csv", id.name()),
            reproduce_figure(id, &cfg.sweep)?,
        ));
    }
    write_outputs(cfg, ctx, "figure", &tables)
}
