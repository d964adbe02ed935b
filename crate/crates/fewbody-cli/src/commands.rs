use std::path::PathBuf;

use serde::Serialize;
use serde_json::json;

use fewbody::core::{RunConfig, TwoBodyChannel};
use fewbody::faddeev::{assemble_a, count_above_one, counting_curve, FaddeevSystem, WRoute};
use fewbody::jacobi::{identity_check, JacobiFrame, Pair};
use fewbody::oracle::{shooting_critical_coupling, variational_count, VariationalBasis};
use fewbody::specfun::Psi1Convention;
use fewbody::twobody::{
    bs_gap_samples, classify_virtual_level, critical_channel, default_quadrature, extract_tau,
    find_critical_coupling, fit_w_expansion, gap_on_complement, resonance_profile, singularity_fit,
    tail_coefficient, DEFAULT_ELEMENTS,
};

use crate::output::Run;
use crate::{Cli, Command, Failure};

/// Two-body and three-body runs default to d = 4.
const DEFAULT_D: usize = 4;
const JACOBI_SAMPLES: usize = 1000;
const DEFAULT_ORACLE_ENERGIES: [f64; 2] = [-0.5, -0.1];

struct Ctx<'a> {
    cli: &'a Cli,
    cfg: &'a RunConfig,
}

impl Ctx<'_> {
    fn d(&self) -> usize {
        self.cli.d.map(usize::from).unwrap_or_else(|| self.cfg.dimension_or(DEFAULT_D))
    }

    fn out_dir(&self) -> PathBuf {
        self.cli
            .out
            .clone()
            .or_else(|| self.cfg.output_dir.clone())
            .unwrap_or_else(|| PathBuf::from("out").join(&self.cfg.experiment))
    }

    fn run(&self) -> Result<Run, Failure> {
        Run::new(&self.out_dir(), self.cli.command.name())
    }

    /// Channel with unit depth (critical runs rescale it).
    fn unit_channel(&self) -> Result<TwoBodyChannel, Failure> {
        let mut cfg = self.cfg.clone();
        cfg.coupling_factor = None;
        Ok(cfg.two_body_channel(self.d())?.with_strength(1.0)?)
    }

    fn critical(&self) -> Result<TwoBodyChannel, Failure> {
        let ch = self.unit_channel()?;
        Ok(critical_channel(&ch, &default_quadrature(&ch)?)?)
    }

    /// Channel at `coupling_factor · λ*`, critical when the factor is absent.
    fn scaled_channel(&self) -> Result<TwoBodyChannel, Failure> {
        let mut cfg = self.cfg.clone();
        cfg.coupling_factor.get_or_insert(1.0);
        Ok(cfg.two_body_channel(self.d())?)
    }

    fn system(&self, default_factor: Option<f64>) -> Result<FaddeevSystem, Failure> {
        let mut cfg = self.cfg.clone();
        if cfg.coupling_factor.is_none() && cfg.system.potentials.is_none() {
            cfg.coupling_factor = default_factor;
        }
        Ok(cfg.faddeev_system(self.d())?)
    }

    fn basis(&self) -> VariationalBasis {
        let mut b = self.cfg.basis.clone();
        if let Some(s) = self.cli.seed.or(self.cfg.seed) {
            b.seed = s;
        }
        b
    }
}

pub fn dispatch(cli: &Cli, cfg: &RunConfig) -> Result<(), Failure> {
    let ctx = Ctx { cli, cfg };
    match cli.command {
        Command::CriticalCoupling => critical_coupling(&ctx),
        Command::Resonance => resonance(&ctx),
        Command::Tau { literal_psi } => tau(&ctx, literal_psi),
        Command::BsScan => bs_scan(&ctx),
        Command::Gap => gap(&ctx),
        Command::JacobiCheck => jacobi_check(&ctx),
        Command::FaddeevCount => faddeev_count(&ctx),
        Command::EfimovScan => efimov_scan(&ctx),
        Command::OracleCount => oracle_count(&ctx),
    }
}

#[derive(Serialize)]
struct CriticalRow {
    d: usize,
    l: usize,
    mass: f64,
    range: f64,
    lambda_star: f64,
    lambda_star_refined: f64,
    lambda_star_shooting: f64,
}

fn critical_coupling(ctx: &Ctx) -> Result<(), Failure> {
    let ch = ctx.unit_channel()?;
    let q = default_quadrature(&ch)?;
    let lam = find_critical_coupling(&ch, &q)?;
    let refined = find_critical_coupling(&ch, &q.refined())?;
    let r_match = ch.potential.support_radius(1e-13).max(ch.potential.range);
    let shooting = shooting_critical_coupling(&ch, r_match)?;
    let row = CriticalRow {
        d: ch.d,
        l: ch.l,
        mass: ch.mass,
        range: ch.potential.range,
        lambda_star: lam,
        lambda_star_refined: refined,
        lambda_star_shooting: shooting,
    };
    let mut run = ctx.run()?;
    run.csv("critical_coupling.csv", &[&row])?;
    run.finish(ctx.cfg, Some(ch.d), json!(row))
}

#[derive(Serialize)]
struct ProfileRow {
    r: f64,
    f: f64,
    r2_f: f64,
}

fn resonance(ctx: &Ctx) -> Result<(), Failure> {
    let ch = ctx.critical()?;
    let q = default_quadrature(&ch)?;
    let p = resonance_profile(&ch, &q)?;
    let level = classify_virtual_level(&ch, &q)?;
    let rows: Vec<ProfileRow> = p
        .radii
        .iter()
        .zip(&p.f)
        .chain(p.tail_radii.iter().zip(&p.tail_f))
        .map(|(&r, &f)| ProfileRow { r, f, r2_f: r * r * f })
        .collect();
    let tail = if ch.d == 4 && ch.l == 0 {
        Some(tail_coefficient(&p, ch.mass)?)
    } else {
        None
    };
    let summary = json!({
        "d": ch.d,
        "l": ch.l,
        "lambda_star": ch.potential.strength,
        "classification": level.kind,
        "p_tail": p.p_tail,
        "c_tail": p.c_tail,
        "square_integrable": p.square_integrable,
        "remainder_norm": p.remainder_norm,
        "tail_coefficient": tail,
    });
    let mut run = ctx.run()?;
    run.csv("resonance_profile.csv", &rows)?;
    run.json("resonance.json", &summary)?;
    run.finish(ctx.cfg, Some(ch.d), summary)
}

#[derive(Serialize)]
struct WSample {
    z: f64,
    mu_w: f64,
}

fn tau(ctx: &Ctx, literal_psi: bool) -> Result<(), Failure> {
    let ch = ctx.critical()?;
    let q = default_quadrature(&ch)?;
    let conv = if literal_psi { Psi1Convention::MinusOne } else { Psi1Convention::Exact };
    let w = extract_tau(&ch, &q, conv)?;
    let zs = ctx.cfg.schedule.energies()?;
    let w = fit_w_expansion(&ch, &q, &zs, w)?;
    let rows: Vec<WSample> = w.samples.iter().map(|&(z, mu_w)| WSample { z, mu_w }).collect();
    let record = json!({
        "tau": w.tau,
        "mu_alpha": w.mu_alpha,
        "fit_residual": w.fit_residual,
        "tau_fit": w.tau_fit,
        "g2_check": w.g2_check,
        "convention": w.convention,
    });
    let mut run = ctx.run()?;
    run.csv("w_samples.csv", &rows)?;
    run.json("w_expansion.json", &record)?;
    run.finish(ctx.cfg, Some(ch.d), record)
}

#[derive(Serialize)]
struct BsRow {
    z: f64,
    mu_max: f64,
    one_minus_mu: f64,
}

fn bs_scan(ctx: &Ctx) -> Result<(), Failure> {
    let ch = ctx.scaled_channel()?;
    let q = default_quadrature(&ch)?;
    let zs = ctx.cfg.schedule.energies()?;
    let rows: Vec<BsRow> = bs_gap_samples(&ch, &q, &zs)?
        .into_iter()
        .map(|(z, gap)| BsRow {
            z,
            mu_max: 1.0 - gap,
            one_minus_mu: gap,
        })
        .collect();
    let fit = if zs.len() >= 3 && zs.iter().all(|&z| z < 0.0) {
        Some(singularity_fit(&ch, &q, &zs)?)
    } else {
        None
    };
    let summary = json!({ "d": ch.d, "strength": ch.potential.strength, "singularity_fit": fit });
    let mut run = ctx.run()?;
    run.csv("bs_scan.csv", &rows)?;
    run.finish(ctx.cfg, Some(ch.d), summary)
}

#[derive(Serialize)]
struct SectorRow {
    l: usize,
    mu: f64,
}

fn gap(ctx: &Ctx) -> Result<(), Failure> {
    let ch = ctx.critical()?;
    let q = default_quadrature(&ch)?;
    let p = resonance_profile(&ch, &q)?;
    let g = gap_on_complement(&ch, &p, DEFAULT_ELEMENTS)?;
    let rows: Vec<SectorRow> = g.sectors.iter().map(|&(l, mu)| SectorRow { l, mu }).collect();
    let mut run = ctx.run()?;
    run.csv("gap_sectors.csv", &rows)?;
    run.json("gap.json", &g)?;
    run.finish(ctx.cfg, Some(ch.d), json!(g))
}

#[derive(Serialize)]
struct CoefficientRow {
    alpha: &'static str,
    beta: &'static str,
    d: f64,
    e: f64,
    quad_a: f64,
    quad_b: f64,
    quad_c: f64,
}

fn jacobi_check(ctx: &Ctx) -> Result<(), Failure> {
    let frame = JacobiFrame::new(ctx.cfg.system.masses)?;
    let dim = ctx.cli.d.map(usize::from).unwrap_or_else(|| ctx.cfg.dimension_or(3));
    let seed = ctx.cli.seed.or(ctx.cfg.seed).unwrap_or(1);
    let check = identity_check(&frame, JACOBI_SAMPLES, dim, seed)?;
    let mut rows = Vec::new();
    for a in Pair::ALL {
        for b in Pair::ALL.into_iter().filter(|&b| b != a) {
            let [qa, qb, qc] = frame.quad[a.index()][b.index()];
            rows.push(CoefficientRow {
                alpha: a.label(),
                beta: b.label(),
                d: frame.d[a.index()][b.index()],
                e: frame.e[a.index()][b.index()],
                quad_a: qa,
                quad_b: qb,
                quad_c: qc,
            });
        }
    }
    let summary = json!({
        "masses": frame.masses,
        "reduced_masses": frame.m,
        "spectator_masses": frame.n,
        "coefficients": rows,
        "residuals": check,
        "max_residual": check.max(),
    });
    let mut run = ctx.run()?;
    run.csv("jacobi_coefficients.csv", &rows)?;
    run.json("jacobi_check.json", &summary)?;
    run.finish(ctx.cfg, Some(dim), summary)
}

#[derive(Serialize)]
struct CountRow {
    z: f64,
    count: usize,
    top_eigenvalue: f64,
    gap_to_one: f64,
}

fn grid_record(sys: &FaddeevSystem) -> serde_json::Value {
    json!({
        "grid": sys.grid,
        "nx": sys.nx(),
        "np": sys.np(),
        "angular_order": sys.grid.angular_order,
        "couplings": sys.channels.iter().map(|c| c.potential.strength).collect::<Vec<_>>(),
        "critical_factor": sys.critical_factor,
        "symmetry": sys.symmetry,
    })
}

fn faddeev_count(ctx: &Ctx) -> Result<(), Failure> {
    let sys = ctx.system(None)?;
    let zs = ctx.cfg.schedule.energies()?;
    let rows = zs
        .iter()
        .map(|&z| {
            let c = count_above_one(&assemble_a(&sys, z, WRoute::Direct)?)?;
            Ok(CountRow {
                z,
                count: c.count,
                top_eigenvalue: c.eigenvalues[0],
                gap_to_one: c.gap_to_one,
            })
        })
        .collect::<Result<Vec<_>, fewbody::Error>>()?;
    let summary = json!({ "system": grid_record(&sys), "counts": rows.iter().map(|r| r.count).collect::<Vec<_>>() });
    let mut run = ctx.run()?;
    run.csv("faddeev_count.csv", &rows)?;
    run.finish(ctx.cfg, Some(sys.d), summary)
}

fn efimov_scan(ctx: &Ctx) -> Result<(), Failure> {
    let sys = ctx.system(Some(1.0))?;
    let zs = ctx.cfg.schedule.energies()?;
    let curve = counting_curve(&sys, &zs, WRoute::Direct)?;
    let rows: Vec<CountRow> = curve
        .samples
        .iter()
        .map(|s| CountRow {
            z: s.z,
            count: s.count,
            top_eigenvalue: s.top_eigenvalue,
            gap_to_one: s.gap_to_one,
        })
        .collect();
    let fit = json!({
        "mode": curve.mode,
        "slope_per_decade": curve.slope,
        "level": curve.level,
        "residual": curve.residual,
        "non_decreasing_towards_zero": curve.is_non_decreasing_towards_zero(),
        "counts": curve.counts(),
    });
    let mut run = ctx.run()?;
    run.csv("counting_curve.csv", &rows)?;
    run.json("counting_fit.json", &fit)?;
    run.finish(ctx.cfg, Some(sys.d), json!({ "fit": fit, "system": grid_record(&sys) }))
}

#[derive(Serialize)]
struct OracleRow {
    z: f64,
    variational_count: usize,
    faddeev_count: usize,
    basis_size: usize,
    kept: usize,
    condition_number: f64,
    pruned: bool,
}

fn oracle_count(ctx: &Ctx) -> Result<(), Failure> {
    let sys = ctx.system(None)?;
    let zs = match &ctx.cfg.schedule.values {
        Some(v) => v.clone(),
        None => DEFAULT_ORACLE_ENERGIES.to_vec(),
    };
    let basis = ctx.basis();
    let rows = zs
        .iter()
        .map(|&z| {
            let v = variational_count(&sys, z, &basis)?;
            let f = count_above_one(&assemble_a(&sys, z, WRoute::Direct)?)?;
            Ok(OracleRow {
                z,
                variational_count: v.count,
                faddeev_count: f.count,
                basis_size: v.basis_size,
                kept: v.kept,
                condition_number: v.condition_number,
                pruned: v.pruned,
            })
        })
        .collect::<Result<Vec<_>, fewbody::Error>>()?;
    let summary = json!({
        "basis": basis,
        "all_match": rows.iter().all(|r| r.variational_count == r.faddeev_count),
        "system": grid_record(&sys),
    });
    let mut run = ctx.run()?;
    run.csv("oracle_count.csv", &rows)?;
    run.finish(ctx.cfg, Some(sys.d), summary)
}
