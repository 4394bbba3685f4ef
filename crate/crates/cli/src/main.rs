mod args;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use capcond::harness::config::{default_t_grid, geometric_grid};
use capcond::harness::persist::RunOutput;
use capcond::harness::properties::CheckStatus;
use capcond::harness::{run_experiment, write_outputs, CenterSource, ExperimentConfig, ExperimentKind, TubeCase};
use capcond::io::{format_instance, read_h_table, read_instance, write_instance};
use capcond::sic::{sic_with, SicMethod};
use capcond::{cond_and_class, AdversarialParams, CapSampler, DeltaMode, HSpec, RngStream};

use args::{Command, LawArgs, ParseFailure, RunArgs};

/// Exit status when every check ran but at least one bound was violated.
const BOUND_FAILURE: u8 = 2;

fn main() -> ExitCode {
    let cli = match args::parse(std::env::args_os().collect()) {
        Ok(cli) => cli,
        Err(ParseFailure::Clap(e)) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
        Err(ParseFailure::Other(e)) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(1);
        }
    };
    match run(cli.command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(BOUND_FAILURE),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

/// Compact decimal rendering: at most ten decimals, trailing zeros dropped.
fn num(x: f64) -> String {
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let s = format!("{x:.10}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" { "0".into() } else { s.into() }
}

fn params(law: &LawArgs) -> Result<AdversarialParams> {
    let h = match &law.h_table {
        Some(p) => HSpec::Table(read_h_table(p)?),
        None => HSpec::ConstantOne,
    };
    let mode: DeltaMode = law.delta_mode.parse()?;
    Ok(AdversarialParams::new(law.m, law.alpha, law.beta, h, mode)?)
}

fn center_source(s: &str) -> Result<CenterSource> {
    Ok(match s {
        "random" => CenterSource::Random,
        "coincident" => CenterSource::Coincident,
        "great-circle" => CenterSource::GreatCircle,
        other => match other.strip_prefix("file:") {
            Some(p) if !p.is_empty() => CenterSource::File(PathBuf::from(p)),
            _ => bail!("--center `{other}`: expected file:PATH, random, coincident or great-circle"),
        },
    })
}

fn config(kind: ExperimentKind, m: usize, run: &RunArgs) -> ExperimentConfig {
    let mut cfg = ExperimentConfig::new(kind);
    cfg.m = m;
    cfg.samples = run.samples;
    cfg.seed = run.seed;
    cfg.workers = run.workers;
    cfg.out_dir = Some(run.out.clone());
    cfg.tube_cases = TubeCase::battery(m);
    cfg
}

fn with_law(mut cfg: ExperimentConfig, law: &LawArgs) -> Result<ExperimentConfig> {
    cfg.params = params(law)?;
    cfg.t_grid = default_t_grid(&cfg.params, cfg.m);
    Ok(cfg)
}

fn finish(out: RunOutput, dir: &Path) -> Result<bool> {
    let (csv, json) = write_outputs(dir, &out)?;
    let s = &out.summary;
    if let Some(table) = &s.tail_table {
        let c = &s.counts;
        println!("counts: sf={} ip={} if={} overflow={} failed={}", c.sf, c.ip, c.infeasible, c.overflow, c.failed);
        println!("{:>12} {:>10} {:>10} {:>6} {:>10} {:>10} {:>6}", "t", "emp_F", "bound_F", "F", "emp_I", "bound_I", "I");
        let verdict = |p: Option<bool>, vacuous: bool| match p {
            None => "-",
            Some(true) if vacuous => "vac",
            Some(true) => "ok",
            Some(false) => "FAIL",
        };
        for r in table {
            println!(
                "{:>12.4e} {:>10.3e} {:>10.3e} {:>6} {:>10.3e} {:>10.3e} {:>6}",
                r.t,
                r.emp_f,
                r.bound_f,
                verdict(r.pass_f, r.vacuous_f),
                r.emp_i,
                r.bound_i,
                verdict(r.pass_i, r.vacuous_i)
            );
        }
    }
    if let Some(e) = &s.expectation {
        for r in &e.sweep {
            let bound = r.bound.map(num).unwrap_or_else(|| "informational".into());
            let se = r.se.map(num).unwrap_or_else(|| "-".into());
            let pass = match r.pass {
                Some(true) => "ok",
                Some(false) => "FAIL",
                None => "-",
            };
            println!("center={} mean_ln_cond={} se={se} bound={bound} overflow={} {pass}", r.center, num(r.mean), r.overflow);
        }
    }
    if let Some(w) = &s.wendel_table {
        for r in &w.rows {
            let pass = if r.pass { "ok" } else { "FAIL" };
            println!("k={} p={} ({}) p_hat={} tol={} {pass}", r.k, r.p_exact, num(r.p), num(r.p_hat), num(r.tolerance));
        }
        println!("series sum_(k>4m) k p(k,m) = {}", num(w.series_limit));
    }
    if let Some(rows) = &s.tube_table {
        for r in rows {
            let pass = if r.passed() { "ok" } else { "FAIL" };
            println!(
                "alpha={} phi={} eps={} bound={} outer={} inner={} {pass}",
                num(r.case.alpha),
                num(r.case.phi),
                num(r.eps),
                num(r.bound),
                num(r.outer),
                num(r.inner)
            );
        }
    }
    if let Some(p) = &s.property_suite {
        for c in &p.checks {
            let status = match c.status {
                CheckStatus::Pass => "ok",
                CheckStatus::Fail => "FAIL",
                CheckStatus::Inconclusive => "inconclusive",
            };
            println!("{}: qualifying={} violations={} skipped={} {status}", c.name, c.qualifying, c.violations, c.skipped);
        }
    }
    if let Some(r) = &s.sampler_check {
        let ks = |k: &capcond::harness::sampler_check::KsResult| {
            format!("D={} threshold={} {}", num(k.statistic), num(k.threshold), if k.pass { "ok" } else { "FAIL" })
        };
        println!("support violations: {}", r.support_violations);
        println!("radial: {}", ks(&r.radial));
        for (name, k) in [("direction", r.direction), ("rejection", r.rejection), ("rejection-oracle", r.rejection_oracle)] {
            if let Some(k) = k {
                println!("{name}: {}", ks(&k));
            }
        }
    }
    println!("wrote {} and {}", csv.display(), json.display());
    if !s.failures.is_empty() {
        eprintln!("warning: {} samples could not be solved; they are listed in {}", s.failures.len(), json.display());
    }
    let passed = s.passed();
    println!("{}", if passed { "bounds: pass" } else { "bounds: FAIL" });
    Ok(passed)
}

fn run(command: Command) -> Result<bool> {
    match command {
        Command::Classify(a) => {
            let inst = read_instance(args::require_instance(&a)?)?;
            let r = cond_and_class(&inst)?;
            println!("class={}", r.class.code());
        }
        Command::Cond(a) => {
            let inst = read_instance(args::require_instance(&a)?)?;
            let r = cond_and_class(&inst)?;
            println!("class={} cond={}", r.class.code(), num(r.cond));
        }
        Command::Sic(a) => {
            let inst = read_instance(args::require_instance(&a)?)?;
            let r = sic_with(&inst, SicMethod::Auto)?;
            let center: Vec<_> = r.center.coords().iter().map(|&x| num(x)).collect();
            println!(
                "rho={} center=[{}] support={:?} class={} cond={}",
                num(r.rho),
                center.join(", "),
                r.support,
                r.class.code(),
                num(r.cond)
            );
        }
        Command::Sample(a) => {
            let p = params(&a.law)?;
            let center = center_source(&a.center.center)?.build(a.center.n, a.law.m, a.seed)?;
            let inst = CapSampler::new(p)?.sample_instance(&center, RngStream::new(a.seed, 0))?;
            print!("{}", format_instance(&inst));
            if let Some(dir) = a.out {
                std::fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
                write_instance(&dir.join("instance.txt"), &inst)?;
            }
        }
        Command::ExpTail(a) => {
            let mut cfg = with_law(config(ExperimentKind::Tail, a.law.m, &a.run), &a.law)?;
            cfg.n = a.center.n;
            cfg.center = center_source(&a.center.center)?;
            if let Some((lo, hi, points)) = a.t_grid {
                cfg.t_grid = geometric_grid(lo, hi, points);
            }
            return finish(run_experiment(&cfg)?, &a.run.out);
        }
        Command::ExpMean(a) => {
            let mut cfg = with_law(config(ExperimentKind::Expectation, a.law.m, &a.run), &a.law)?;
            cfg.n = a.center.n;
            cfg.center = center_source(&a.center.center)?;
            return finish(run_experiment(&cfg)?, &a.run.out);
        }
        Command::ExpWendel(a) => {
            let mut cfg = config(ExperimentKind::Wendel, a.m, &a.run);
            cfg.params = AdversarialParams::uniform(a.m, cfg.params.alpha)?;
            cfg.k_range = a.k;
            return finish(run_experiment(&cfg)?, &a.run.out);
        }
        Command::ExpTube(a) => {
            let mut cfg = config(ExperimentKind::Tube, a.m, &a.run);
            cfg.params = AdversarialParams::uniform(a.m, cfg.params.alpha)?;
            return finish(run_experiment(&cfg)?, &a.run.out);
        }
        Command::ExpProperties(a) => {
            let mut cfg = with_law(config(ExperimentKind::PropertySuite, a.law.m, &a.run), &a.law)?;
            cfg.n = a.n;
            cfg.phi = a.phi;
            return finish(run_experiment(&cfg)?, &a.run.out);
        }
        Command::ValidateSampler(a) => {
            let cfg = with_law(config(ExperimentKind::SamplerCheck, a.law.m, &a.run), &a.law)?;
            return finish(run_experiment(&cfg)?, &a.run.out);
        }
    }
    Ok(true)
}
