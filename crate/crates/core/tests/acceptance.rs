//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits nonzero if any fail.

use std::f64::consts::{FRAC_PI_2, PI};
use std::process::ExitCode;
use std::time::Instant;

use capcond::cone::{cap_distance_suite, distance_to_dual, distance_to_sconv};
use capcond::harness::bounds::wendel_probability_factorial;
use capcond::harness::persist::{records_csv, summary_json, CSV_FILE, JSON_FILE};
use capcond::harness::properties::{run_property_suite, CheckStatus};
use capcond::harness::sampler_check::run_sampler_check;
use capcond::harness::tail::{run_expectation_experiment, run_tail_experiment};
use capcond::harness::tube::run_tube_experiment;
use capcond::harness::wendel::feasibility_frequency;
use capcond::harness::{run_experiment, write_outputs, CenterSource, ExperimentConfig, ExperimentKind, TubeCase};
use capcond::rng::{RngStream, Substream};
use capcond::sampler::uniform_instance;
use capcond::{
    gordan_classify, sic_bruteforce, sic_solve, AdversarialParams, Cap, CapSampler, DeltaMode, FeasibilityClass, HSpec,
    Instance, SpherePoint, SpherePolytope,
};
use num_bigint::BigInt;
use num_rational::Ratio;

type Outcome = Result<String, String>;

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

fn tangent_step(x: &[f64], angle: f64, rng: &mut Substream) -> SpherePoint<f64> {
    let mut u = rng.normals(x.len());
    let d: f64 = u.iter().zip(x).map(|(a, b)| a * b).sum();
    u.iter_mut().zip(x).for_each(|(a, b)| *a -= d * b);
    let n = u.iter().map(|a| a * a).sum::<f64>().sqrt();
    let v = x.iter().zip(&u).map(|(a, b)| angle.cos() * a + angle.sin() * b / n).collect();
    SpherePoint::normalized(v).expect("nonzero")
}

/// Instances for the SIC checks: m in {2, 3}, n in m+2..=10, alternately uniform and drawn
/// from a cap law around a random center.
fn oracle_instances(count: usize) -> Result<Vec<Instance<f64>>, String> {
    let seed = 2024;
    (0..count)
        .map(|i| {
            let mut rng = RngStream::new(seed, 1 << 40 | i as u64).substream(u64::MAX);
            let m = 2 + i % 2;
            let n = m + 2 + (rng.next_u64() % (9 - m as u64)) as usize;
            let stream = RngStream::new(seed, i as u64);
            if i % 4 < 2 {
                return uniform_instance(n, m, stream).map_err(err);
            }
            let alpha = 0.2 + 1.2 * rng.uniform();
            let beta = [0.0, 0.5, 1.0][(rng.next_u64() % 3) as usize];
            let params = AdversarialParams::new(m, alpha, beta, HSpec::ConstantOne, DeltaMode::Lemma).map_err(err)?;
            let center = uniform_instance(n, m, RngStream::new(seed, 2 << 40 | i as u64)).map_err(err)?;
            CapSampler::new(params).map_err(err)?.sample_instance(&center, stream).map_err(err)
        })
        .collect()
}

fn wendel() -> Outcome {
    let n = 200_000;
    let expected = [(4, (7, 8)), (6, (1, 2)), (8, (29, 128))];
    let mut notes = Vec::new();
    for (k, (num, den)) in expected {
        let exact = wendel_probability_factorial(k, 2);
        if exact != Ratio::new(BigInt::from(num), BigInt::from(den)) {
            return Err(format!("p({k},2) = {exact}, expected {num}/{den}"));
        }
        let p = num as f64 / den as f64;
        let hat = feasibility_frequency(2, k, n, 11, None).map_err(err)?;
        let tol = 4.0 * (p * (1.0 - p) / n as f64).sqrt();
        notes.push(format!("k={k} p={num}/{den} p_hat={:.5}", hat.estimate));
        if (hat.estimate - p).abs() > tol {
            return Err(format!("k={k}: |{} - {p}| > {tol}", hat.estimate));
        }
    }
    Ok(notes.join(", "))
}

fn sic_oracle(instances: &[Instance<f64>]) -> Outcome {
    let mut worst = 0.0f64;
    let mut bad = 0;
    for (i, a) in instances.iter().enumerate() {
        let s = sic_solve(a).map_err(|e| format!("instance {i}: {e}"))?;
        let b = sic_bruteforce(a).map_err(|e| format!("instance {i}: {e}"))?;
        let d = (s.rho - b.rho).abs();
        worst = worst.max(d);
        if d > 1e-8 {
            bad += 1;
        }
    }
    let msg = format!("{} instances, max |rho_solve - rho_brute| = {worst:.2e}", instances.len());
    if bad == 0 {
        Ok(msg)
    } else {
        Err(format!("{bad} disagreements; {msg}"))
    }
}

fn classification(instances: &[Instance<f64>]) -> Outcome {
    let mut band = 0;
    let mut mismatches = Vec::new();
    for (i, a) in instances.iter().enumerate() {
        let s = sic_solve(a).map_err(err)?;
        if (s.rho - FRAC_PI_2).abs() <= 1e-8 {
            band += 1;
            continue;
        }
        let g = gordan_classify(a).map_err(err)?;
        if g != s.class {
            mismatches.push(format!("#{i} sic={} lp={}", s.class.code(), g.code()));
        }
    }
    let msg = format!("{} instances, band hits {band}", instances.len());
    if mismatches.is_empty() {
        Ok(msg)
    } else {
        Err(format!("{msg}; mismatches: {}", mismatches.join(" ")))
    }
}

fn perturbation() -> Outcome {
    let (instances, perturbations) = (100, 200);
    let mut violations = 0;
    let mut classes = [0usize; 2];
    for i in 0..instances {
        let m = 2 + i % 2;
        let n = m + 2 + i % (9 - m);
        let a = uniform_instance(n, m, RngStream::new(77, i as u64)).map_err(err)?;
        let s = sic_solve(&a).map_err(err)?;
        if s.class == FeasibilityClass::IllPosed {
            return Err(format!("instance {i} is ill-posed"));
        }
        let base = gordan_classify(&a).map_err(err)?;
        classes[usize::from(base == FeasibilityClass::Infeasible)] += 1;
        let step = 0.9 * s.dist_to_sigma;
        for j in 0..perturbations {
            let mut rng = RngStream::new(78, (i as u64) << 40 | j as u64).substream(0);
            let b = Instance::new(a.rows().iter().map(|r| tangent_step(r.coords(), step, &mut rng)).collect())
                .map_err(err)?;
            if gordan_classify(&b).map_err(err)? != base {
                violations += 1;
            }
        }
    }
    let msg = format!("{instances}x{perturbations} perturbations ({} SF, {} IF bases)", classes[0], classes[1]);
    if violations == 0 {
        Ok(msg)
    } else {
        Err(format!("{violations} class changes; {msg}"))
    }
}

fn tail_config(beta: f64) -> Result<ExperimentConfig, String> {
    let mut cfg = ExperimentConfig::new(ExperimentKind::Tail);
    cfg.params = AdversarialParams::new(2, PI / 6.0, beta, HSpec::ConstantOne, DeltaMode::Lemma).map_err(err)?;
    cfg.t_grid = capcond::harness::config::default_t_grid(&cfg.params, 2);
    Ok(cfg)
}

fn tails() -> (Outcome, Outcome) {
    let mut f_notes = Vec::new();
    let mut i_notes = Vec::new();
    for beta in [0.0, 1.0] {
        let report = match tail_config(beta).and_then(|c| run_tail_experiment(&c).map_err(err)) {
            Ok(r) => r,
            Err(e) => return (Err(e.clone()), Err(e)),
        };
        if let Err(e) = report.batch.check_failures() {
            return (Err(err(&e)), Err(err(e)));
        }
        let covered: Vec<_> = report.table.iter().filter(|r| r.covered).collect();
        let informative = covered.iter().filter(|r| !r.vacuous_f).count();
        let f_fail: Vec<_> = covered.iter().filter(|r| r.pass_f != Some(true)).map(|r| r.t).collect();
        f_notes.push(if covered.is_empty() || informative == 0 {
            Err(format!("beta={beta}: no informative covered grid point"))
        } else if f_fail.is_empty() {
            Ok(format!("beta={beta}: {} covered points ({informative} non-vacuous)", covered.len()))
        } else {
            Err(format!("beta={beta}: bound exceeded at t = {f_fail:?}"))
        });
        let at_least_one: Vec<_> = report.table.iter().filter(|r| r.t >= 1.0).collect();
        let i_fail: Vec<_> = at_least_one.iter().filter(|r| r.pass_i != Some(true)).map(|r| r.t).collect();
        i_notes.push(if at_least_one.is_empty() {
            Err(format!("beta={beta}: no grid point with t >= 1"))
        } else if i_fail.is_empty() {
            let worst = at_least_one.iter().map(|r| r.emp_i - 3.0 * r.se_i - r.bound_i).fold(f64::MIN, f64::max);
            Ok(format!("beta={beta}: {} points, max(emp - 3SE - bound) = {worst:.3e}", at_least_one.len()))
        } else {
            Err(format!("beta={beta}: bound exceeded at t = {i_fail:?}"))
        });
    }
    let merge = |v: Vec<Outcome>| {
        let fail: Vec<_> = v.iter().filter_map(|r| r.as_ref().err().cloned()).collect();
        let ok: Vec<_> = v.into_iter().filter_map(Result::ok).collect();
        if fail.is_empty() { Ok(ok.join("; ")) } else { Err(fail.join("; ")) }
    };
    (merge(f_notes), merge(i_notes))
}

fn expectation() -> Outcome {
    let cfg = ExperimentConfig::new(ExperimentKind::Expectation);
    let r = run_expectation_experiment(&cfg).map_err(err)?;
    let rows: Vec<String> = r
        .sweep
        .iter()
        .map(|row| format!("{}: mean {:.3} + 3SE vs {:.2}", row.center, row.mean, row.bound.unwrap_or(f64::NAN)))
        .collect();
    let decided = r.sweep.iter().all(|row| row.pass == Some(true));
    if decided && r.sweep.len() == 3 {
        Ok(rows.join("; "))
    } else {
        Err(format!("{r:?}"))
    }
}

fn dkk() -> Outcome {
    let mut rng = RngStream::new(90, 0).substream(0);
    let mut worst_cap = 0.0f64;
    let mut done = 0;
    while done < 1000 {
        let m = 1 + (rng.next_u64() % 4) as usize;
        let center = SpherePoint::new(rng.unit_vector(m + 1)).map_err(err)?;
        let cap = Cap::new(center, FRAC_PI_2 * rng.uniform()).map_err(err)?;
        let a = SpherePoint::new(rng.unit_vector(m + 1)).map_err(err)?;
        let d = cap_distance_suite(&a, &cap).map_err(err)?;
        if d.to_set <= 0.0 || d.to_dual <= 0.0 {
            continue;
        }
        worst_cap = worst_cap.max((d.to_set + d.to_dual - FRAC_PI_2).abs());
        done += 1;
    }
    let mut worst_poly = 0.0f64;
    let mut done = 0;
    while done < 200 {
        let m = 2 + (rng.next_u64() % 3) as usize;
        let k = m + 1 + (rng.next_u64() % 5) as usize;
        let axis = rng.unit_vector(m + 1);
        let spread = 0.2 + rng.uniform();
        let gens: Vec<_> = (0..k)
            .map(|_| {
                let v = rng.unit_vector(m + 1);
                SpherePoint::normalized(axis.iter().zip(&v).map(|(a, b)| a + spread * b).collect())
            })
            .collect::<Result<_, _>>()
            .map_err(err)?;
        let p = SpherePolytope::new(gens).map_err(err)?;
        if !p.is_properly_convex() {
            continue;
        }
        let a = SpherePoint::new(rng.unit_vector(m + 1)).map_err(err)?;
        let ds = distance_to_sconv(&a, &p).map_err(err)?;
        let dd = distance_to_dual(&a, &p).map_err(err)?;
        if ds < 1e-6 || dd < 1e-6 {
            continue;
        }
        worst_poly = worst_poly.max((ds + dd - FRAC_PI_2).abs());
        done += 1;
    }
    let msg = format!("caps max err {worst_cap:.2e} (1000), polytopes max err {worst_poly:.2e} (200)");
    if worst_cap <= 1e-10 && worst_poly <= 1e-6 {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn tube() -> Outcome {
    let mut cfg = ExperimentConfig::new(ExperimentKind::Tube);
    cfg.samples = 200_000;
    cfg.tube_cases = [2, 3].iter().flat_map(|&m| TubeCase::battery(m)).collect();
    for c in &cfg.tube_cases {
        if c.eps() > c.sigma() / (2.0 * c.m as f64) * (1.0 + 1e-12) {
            return Err(format!("case {c:?} has eps > sigma/(2m)"));
        }
    }
    let rows = run_tube_experiment(&cfg).map_err(err)?;
    let worst = rows
        .iter()
        .map(|r| ((r.outer - 3.0 * r.outer_se).max(r.inner - 3.0 * r.inner_se)) / r.bound)
        .fold(0.0, f64::max);
    let msg = format!("{} configurations, worst (estimate - 3SE)/bound = {worst:.3}", rows.len());
    if rows.len() == 6 && rows.iter().all(|r| r.passed()) {
        Ok(msg)
    } else {
        Err(format!("{msg}; {rows:?}"))
    }
}

fn properties() -> Outcome {
    let mut cfg = ExperimentConfig::new(ExperimentKind::PropertySuite);
    cfg.samples = 1000;
    let r = run_property_suite(&cfg).map_err(err)?;
    let notes: Vec<_> = r.checks.iter().map(|c| format!("{} {}/{}", c.name, c.violations, c.qualifying)).collect();
    let ok = r.checks.len() == 5
        && r.checks.iter().all(|c| c.status == CheckStatus::Pass && c.violations == 0 && c.qualifying >= 200);
    let msg = format!("violations/qualifying: {}", notes.join(", "));
    if ok {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn sampler() -> Outcome {
    let mut notes = Vec::new();
    let mut ok = true;
    for beta in [0.0, 0.5, 1.0] {
        let mut cfg = ExperimentConfig::new(ExperimentKind::SamplerCheck);
        cfg.params = AdversarialParams::new(2, PI / 6.0, beta, HSpec::ConstantOne, DeltaMode::Lemma).map_err(err)?;
        cfg.samples = 100_000;
        let r = run_sampler_check(&cfg).map_err(err)?;
        ok &= r.passed() && (beta != 0.0 || (r.rejection.is_some() && r.rejection_oracle.is_some()));
        let mut line = format!("beta={beta}: radial D={:.4}/{:.4}", r.radial.statistic, r.radial.threshold);
        if let Some(k) = r.rejection {
            line += &format!(" rejection D={:.4}/{:.4}", k.statistic, k.threshold);
        }
        notes.push(line);
    }
    if ok {
        Ok(notes.join("; "))
    } else {
        Err(notes.join("; "))
    }
}

fn determinism() -> Outcome {
    let mut configs = Vec::new();
    let mut tail = ExperimentConfig::new(ExperimentKind::Tail);
    tail.samples = 20_000;
    configs.push(tail);
    let mut mean = ExperimentConfig::new(ExperimentKind::Expectation);
    mean.samples = 5_000;
    mean.center = CenterSource::GreatCircle;
    configs.push(mean);
    let mut wendel = ExperimentConfig::new(ExperimentKind::Wendel);
    wendel.samples = 20_000;
    configs.push(wendel);
    let mut tube = ExperimentConfig::new(ExperimentKind::Tube);
    tube.samples = 20_000;
    configs.push(tube);
    let mut props = ExperimentConfig::new(ExperimentKind::PropertySuite);
    props.samples = 100;
    configs.push(props);

    let dir = tempfile::tempdir().map_err(err)?;
    for base in configs {
        let mut seen: Option<(Vec<u8>, Vec<u8>)> = None;
        for workers in [Some(1), Some(3), None] {
            let mut cfg = base.clone();
            cfg.workers = workers;
            let out = run_experiment(&cfg).map_err(err)?;
            let sub = dir.path().join(format!("{:?}-{workers:?}", cfg.kind));
            write_outputs(&sub, &out).map_err(err)?;
            let csv = std::fs::read(sub.join(CSV_FILE)).map_err(err)?;
            let json = std::fs::read(sub.join(JSON_FILE)).map_err(err)?;
            if csv != records_csv(&out.records).into_bytes() || json != summary_json(&out.summary).map_err(err)?.into_bytes() {
                return Err(format!("{:?}: written files differ from in-memory output", cfg.kind));
            }
            match &seen {
                None => seen = Some((csv, json)),
                Some((c, j)) if *c == csv && *j == json => {}
                Some(_) => return Err(format!("{:?}: outputs differ with workers = {workers:?}", cfg.kind)),
            }
        }
    }
    Ok("5 experiment kinds x worker counts {1, 3, all}: identical bytes".into())
}

fn main() -> ExitCode {
    let mut failed = 0;
    let mut report = |id: u32, name: &str, start: Instant, outcome: Outcome| {
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(msg) => println!("PASS {id:>2} {name} [{secs:.1}s]: {msg}"),
            Err(msg) => {
                failed += 1;
                println!("FAIL {id:>2} {name} [{secs:.1}s]: {msg}");
            }
        }
    };

    let t = Instant::now();
    report(1, "wendel", t, wendel());

    let t = Instant::now();
    match oracle_instances(500) {
        Ok(instances) => {
            report(2, "sic-oracle", t, sic_oracle(&instances));
            let t = Instant::now();
            report(3, "classification", t, classification(&instances));
        }
        Err(e) => {
            report(2, "sic-oracle", t, Err(e.clone()));
            report(3, "classification", t, Err(e));
        }
    }

    let t = Instant::now();
    report(4, "perturbation", t, perturbation());

    let t = Instant::now();
    let (f, i) = tails();
    report(5, "tail-feasible", t, f);
    report(6, "tail-infeasible", t, i);

    let t = Instant::now();
    report(7, "expectation", t, expectation());

    let t = Instant::now();
    report(8, "dual-distance", t, dkk());

    let t = Instant::now();
    report(9, "tube", t, tube());

    let t = Instant::now();
    report(10, "properties", t, properties());

    let t = Instant::now();
    report(11, "sampler", t, sampler());

    let t = Instant::now();
    report(12, "determinism", t, determinism());

    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    }
}
