//! Subcommand bodies. Each writes its outputs atomically and echoes the
//! resolved configuration to `run.json` beside them.

use std::path::Path;

use serde::Serialize;
use serde_json::{json, Value};
use shiftsim_core::model::simulate as simulate_data;
use shiftsim_core::nets::{default_net_cutoff, fano_tv_pair, FanoNet};
use shiftsim_core::posterior::{
    contraction_experiment, gibbs_posterior, importance_posterior, ContractionConfig, ContractionRow,
    Diagnostics, GibbsOptions, PosteriorEnsemble, SievePreset,
};
use shiftsim_core::priors::{interval_mass, sample_dp_with_tail, sample_f, sample_smooth};
use shiftsim_core::rng::substream;
use shiftsim_core::special::{bessel_i, bessel_i_scaled};
use shiftsim_core::ShiftDistribution;

use crate::cli::{
    BesselTableArgs, ContractionArgs, FanoNetArgs, PosteriorArgs, Preset, PriorKind, PriorSampleArgs, SimulateArgs,
    VerifyArgs,
};
use crate::config::{gibbs_json, shift_prior_json, sieve_json, smooth_json, Method, Settings};
use crate::error::{CliError, Result};
use crate::formats::{read_dataset, read_series, read_shift, DatasetJson, SeriesJson, ShiftJson};
use crate::output::{write_json, OutPath, Table};
use crate::parallel::try_par_map;
use crate::suites::{self, SuiteOptions};

/// Global flags shared by every subcommand.
pub struct Context<'a> {
    pub seed: u64,
    pub threads: usize,
    pub out: &'a Path,
    pub command: &'static str,
}

impl Context<'_> {
    fn run_json(&self, args: &impl Serialize, resolved: Value) -> Value {
        json!({
            "command": self.command,
            "version": env!("CARGO_PKG_VERSION"),
            "seed": self.seed,
            "threads": self.threads,
            "out": self.out.display().to_string(),
            "args": serde_json::to_value(args).unwrap_or(Value::Null),
            "resolved": resolved,
        })
    }
}

fn num(x: f64) -> String {
    x.to_string()
}

fn settings(path: Option<&Path>) -> Result<Settings> {
    path.map_or_else(|| Ok(Settings::default()), Settings::read)
}

pub fn simulate(ctx: &Context, a: &SimulateArgs) -> Result<()> {
    let theta = read_series(&a.theta)?;
    let g = read_shift(&a.g)?;
    let obs = simulate_data(&theta, &g, a.n, a.cutoff, a.sigma, ctx.seed)?;
    let out = OutPath::file(ctx.out, "dataset.json")?;
    write_json(out.main_file(), &DatasetJson::from(&obs))?;
    out.write_run(&ctx.run_json(a, json!({ "theta": SeriesJson::from(&theta), "g": ShiftJson::from(&g) })))
}

pub fn prior_sample(ctx: &Context, a: &PriorSampleArgs) -> Result<()> {
    let s = settings(a.config.as_deref())?;
    let out = OutPath::directory(ctx.out)?;
    let (draws, table, resolved) = match a.kind {
        PriorKind::Sieve => {
            let cfg = s.sieve(100)?;
            let fs = try_par_map(a.count, ctx.threads, |i| Ok::<_, CliError>(sample_f(&cfg, &mut substream(ctx.seed, i as u64))))?;
            let mut t = Table::new(&["index", "level", "l2_norm"])?;
            for (i, f) in fs.iter().enumerate() {
                t.row([i.to_string(), f.cutoff().to_string(), num(f.l2_norm())])?;
            }
            let draws: Vec<Value> = fs.iter().map(|f| json!(SeriesJson::from(f))).collect();
            (draws, t, sieve_json(&cfg))
        }
        PriorKind::Dp => {
            let cfg = s.dirichlet()?;
            let gs = try_par_map(a.count, ctx.threads, |i| sample_dp_with_tail(&cfg, &mut substream(ctx.seed, i as u64)))?;
            let mut t = Table::new(&["index", "atoms", "mass_first_half", "tail_mass"])?;
            for (i, (g, tail)) in gs.iter().enumerate() {
                let atoms = match g {
                    ShiftDistribution::Discrete { atoms } => atoms.iter().filter(|a| a.1 > 0.0).count(),
                    _ => 0,
                };
                t.row([i.to_string(), atoms.to_string(), num(interval_mass(g, 0.0, 0.5)), num(*tail)])?;
            }
            let draws: Vec<Value> = gs.iter().map(|(g, _)| json!(ShiftJson::from(g))).collect();
            (draws, t, shift_prior_json(&shiftsim_core::posterior::ShiftPrior::Dirichlet(cfg)))
        }
        PriorKind::Smooth => {
            let cfg = s.smooth()?;
            let ds = try_par_map(a.count, ctx.threads, |i| sample_smooth(&cfg, &mut substream(ctx.seed, i as u64)))?;
            let mut t = Table::new(&["index", "rejections", "sobolev_radius", "min_density"])?;
            for (i, d) in ds.iter().enumerate() {
                let min = match &d.density {
                    ShiftDistribution::Grid { values } => values.iter().copied().fold(f64::INFINITY, f64::min),
                    _ => f64::NAN,
                };
                t.row([i.to_string(), d.rejections.to_string(), num(d.density.sobolev_radius(cfg.nu)), num(min)])?;
            }
            let draws: Vec<Value> = ds.iter().map(|d| json!(ShiftJson::from(&d.density))).collect();
            (draws, t, smooth_json(&cfg))
        }
    };
    write_json(&out.join("draws.json"), &draws)?;
    table.write(&out.join("summary.csv"))?;
    out.write_run(&ctx.run_json(a, json!({ "prior": resolved })))
}

fn diagnostics_json(d: &Diagnostics) -> Value {
    json!({
        "ess": d.ess,
        "low_ess": d.low_ess,
        "level_acceptance": d.level_acceptance,
        "pcn_acceptance": d.pcn_acceptance,
        "pcn_beta": d.pcn_beta,
        "sigma_used": d.sigma_used,
        "steps": d.steps,
    })
}

fn write_samples(ens: &PosteriorEnsemble, path: &Path) -> Result<()> {
    let cut = ens.samples.iter().map(|s| s.theta.cutoff()).max().unwrap_or(0) as i64;
    let mut header = vec!["weight".to_string(), "level".to_string()];
    for k in -cut..=cut {
        header.push(format!("re_{k}"));
        header.push(format!("im_{k}"));
    }
    let mut t = Table::new(&header)?;
    for s in &ens.samples {
        let al = s.aligned();
        let mut row = vec![num(s.weight), s.theta.cutoff().to_string()];
        for k in -cut..=cut {
            let c = al.theta.get(k);
            row.push(num(c.re));
            row.push(num(c.im));
        }
        t.row(row)?;
    }
    t.write(path)
}

pub fn posterior(ctx: &Context, a: &PosteriorArgs) -> Result<()> {
    let obs = read_dataset(&a.data)?;
    let s = settings(a.prior.as_deref())?;
    let prior = s.prior(obs.n().max(2))?;
    let method = s.method()?;
    if a.bins == 0 {
        return Err(CliError::Validation("--bins must be positive".into()));
    }
    let mut rng = substream(ctx.seed, 0);
    let (ens, sampler) = match method {
        Method::Gibbs => {
            let opts: GibbsOptions = s.gibbs(a.steps)?;
            (gibbs_posterior(&obs, &prior, &opts, &mut rng)?, json!({ "method": "gibbs", "options": gibbs_json(&opts) }))
        }
        Method::Importance => {
            (importance_posterior(&obs, &prior, a.steps, &mut rng)?, json!({ "method": "importance", "draws": a.steps }))
        }
    };
    let out = OutPath::directory(ctx.out)?;
    write_samples(&ens, &out.join("samples.csv"))?;

    let mut g = Table::new(&["bin", "x", "density"])?;
    for (i, v) in ens.mean_g_aligned(a.bins).iter().enumerate() {
        g.row([i.to_string(), num((i as f64 + 0.5) / a.bins as f64), num(*v)])?;
    }
    g.write(&out.join("mean_g.csv"))?;

    let (m1, se1) = ens.mean_se(|s| s.theta.get(1).norm());
    let (ml, sel) = ens.mean_se(|s| s.theta.cutoff() as f64);
    let summary = json!({
        "samples": ens.len(),
        "diagnostics": diagnostics_json(&ens.diagnostics),
        "mean_theta_aligned": SeriesJson::from(&ens.mean_theta_aligned()),
        "abs_theta1": { "mean": m1, "std_error": se1 },
        "level": { "mean": ml, "std_error": sel },
    });
    write_json(&out.join("summary.json"), &summary)?;
    let resolved = json!({
        "sieve": sieve_json(&prior.sieve),
        "shift": shift_prior_json(&prior.shift),
        "sampler": sampler,
        "data": { "n": obs.n(), "cutoff": obs.cutoff(), "sigma": obs.sigma() },
    });
    out.write_run(&ctx.run_json(a, resolved))
}

pub fn contraction(ctx: &Context, a: &ContractionArgs) -> Result<()> {
    let theta = read_series(&a.truth.join("theta.json"))?;
    let g = read_shift(&a.truth.join("g.json"))?;
    if a.ns.is_empty() || a.ns.windows(2).any(|w| w[0] >= w[1]) {
        return Err(CliError::Validation("--ns must be a strictly increasing list".into()));
    }
    let defaults = ContractionConfig::default();
    let cfg = ContractionConfig {
        sieve: match a.preset {
            Preset::Adaptive => SievePreset::Adaptive,
            Preset::Nonadaptive => SievePreset::NonAdaptive { s: a.s },
        },
        l_max: a.l_max,
        gibbs: GibbsOptions { steps: a.steps, burn_in: a.burn_in, ..defaults.gibbs.clone() },
        obs_cutoff: a.obs_cutoff,
        sigma: a.sigma,
        s: a.s,
        distance_draws: a.distance_draws,
        distance_samples: a.distance_samples,
        ..defaults
    };
    // sample sizes are independent runs, so they can go to separate workers
    let rows: Vec<ContractionRow> = try_par_map(a.ns.len(), ctx.threads, |i| {
        contraction_experiment(&theta, &g, &a.ns[i..=i], &cfg, ctx.seed).map(|mut r| r.remove(0))
    })?;
    let out = OutPath::file(ctx.out, "table.csv")?;
    let mut t = Table::new(&["n", "eps_n", "median_dh", "f_err_aligned", "f_err_raw", "g_err", "level_acceptance"])?;
    for r in &rows {
        t.row([
            r.n.to_string(),
            num(r.eps_n),
            num(r.median_dh),
            num(r.f_err_aligned),
            num(r.f_err_raw),
            num(r.g_err),
            num(r.level_acceptance),
        ])?;
    }
    t.write(out.main_file())?;
    let resolved = json!({
        "theta": SeriesJson::from(&theta),
        "g": ShiftJson::from(&g),
        "shift_prior": shift_prior_json(&cfg.shift),
        "gibbs": gibbs_json(&cfg.gibbs),
        "bins": cfg.bins,
    });
    out.write_run(&ctx.run_json(a, resolved))
}

pub fn fano_net(ctx: &Context, a: &FanoNetArgs) -> Result<()> {
    let cutoff = a.cutoff.unwrap_or_else(|| default_net_cutoff(a.p));
    let net = FanoNet::with_cutoff(a.p, a.s, a.beta, a.nu, a.radius, cutoff)?;
    let out = OutPath::directory(ctx.out)?;
    let doc = json!({
        "p": net.p,
        "s": net.s,
        "beta": net.beta,
        "nu": net.nu,
        "A": net.radius,
        "amplitude": net.amplitude,
        "cutoff": cutoff,
        "fs": net.fs.iter().map(SeriesJson::from).collect::<Vec<_>>(),
        "gs": net.gs.iter().map(ShiftJson::from).collect::<Vec<_>>(),
    });
    write_json(&out.join("net.json"), &doc)?;
    if a.certify {
        let pairs = try_par_map(net.p, ctx.threads, |j| fano_tv_pair(&net, j, a.samples, ctx.seed))?;
        let mut t = Table::new(&["j", "matched_tv", "matched_se", "mismatched_tv", "mismatched_se", "ordered"])?;
        for (j, (m, x)) in pairs.iter().enumerate().skip(1) {
            t.row([
                j.to_string(),
                num(m.value),
                num(m.std_error),
                num(x.value),
                num(x.std_error),
                (m.value < x.value).to_string(),
            ])?;
        }
        t.write(&out.join("certificate.csv"))?;
    }
    out.write_run(&ctx.run_json(a, json!({ "cutoff": cutoff })))
}

pub fn verify(ctx: &Context, a: &VerifyArgs) -> Result<()> {
    let opts = SuiteOptions { instances: a.instances, samples: a.samples, seed: ctx.seed, threads: ctx.threads };
    let rows = suites::run(a.suite, &opts)?;
    let out = OutPath::file(ctx.out, "report.csv")?;
    let mut t = Table::new(&["check", "value", "bound", "std_error", "pass"])?;
    for r in &rows {
        t.row([r.check.clone(), num(r.value), num(r.bound), num(r.std_error), r.pass.to_string()])?;
    }
    t.write(out.main_file())?;
    out.write_run(&ctx.run_json(a, Value::Null))?;
    let failed = rows.iter().filter(|r| !r.pass).count();
    if failed > 0 {
        return Err(CliError::ChecksFailed { failed, total: rows.len() });
    }
    Ok(())
}

pub fn bessel_table(ctx: &Context, a: &BesselTableArgs) -> Result<()> {
    if !(a.step > 0.0 && a.step.is_finite()) || !(a.a_max >= 0.0 && a.a_max.is_finite()) {
        return Err(CliError::Validation("--step must be positive and --a-max nonnegative".into()));
    }
    let points = (a.a_max / a.step + 1e-9).floor() as usize;
    let out = OutPath::file(ctx.out, "table.csv")?;
    let mut t = Table::new(&["n", "a", "bessel_i", "bessel_i_scaled"])?;
    for n in 0..=a.n_max {
        for i in 0..=points {
            let x = i as f64 * a.step;
            t.row([n.to_string(), num(x), num(bessel_i(n, x)), num(bessel_i_scaled(n, x))])?;
        }
    }
    t.write(out.main_file())?;
    out.write_run(&ctx.run_json(a, Value::Null))
}
