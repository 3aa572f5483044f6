//! Acceptance criteria. Each criterion prints one PASS/FAIL line; the binary
//! exits non-zero if any criterion fails.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::time::{Duration, Instant};

use gsfde::bounds::{
    check_bdg, check_boundedness, check_chebyshev, check_coefficients, check_error_estimate,
    check_exponential, check_uniqueness, fit_growth, BdgConstants, BdgKind, Experiment, Integrand,
};
use gsfde::expectation::audit_axioms;
use gsfde::integrals::{ito_integral, GridProcess};
use gsfde::runner::{execute, ExperimentConfig, Subcommand};
use gsfde::scenarios::derive_seed;
use gsfde::sfde::{euler_solve, picard_iterate, sup_distance};
use gsfde::{
    BoundConstants, DrivingPath, EmpiricalLaw, InitialData, InitialSegment, JumpLaw, LevyScenario,
    Model, Scenario, ScenarioFamily, TimeGrid, Verdict, VolatilityControl,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn two_sigma() -> ScenarioFamily {
    ScenarioFamily::new(vec![Scenario::brownian(0.5), Scenario::brownian(1.0)]).unwrap()
}

fn constants_for(
    model: &Model,
    family: &ScenarioFamily,
    horizon: f64,
    zeta_norm_sq: f64,
) -> BoundConstants {
    let k = BdgConstants::defaults(family.sigma_bar());
    BoundConstants::compute(model.c1, model.c2, k.k1, k.k2, k.k3, horizon, zeta_norm_sq).unwrap()
}

fn verdicts_hold(reports: &[gsfde::BoundReport]) -> Result<(), String> {
    match reports.iter().find(|r| r.holds != Verdict::Holds) {
        None => Ok(()),
        Some(r) => Err(format!(
            "{} {}: lhs {:.4e} vs rhs {:.4e} ({})",
            r.check, r.name, r.lhs, r.rhs, r.holds
        )),
    }
}

fn discrete_ito_identity() -> Outcome {
    let grid = TimeGrid::new(1.0, 1000).unwrap();
    let scenario = Scenario::brownian(1.0);
    let mut worst = 0.0_f64;
    for k in 0..100 {
        let p = DrivingPath::generate(&grid, &scenario, derive_seed(77, 0, k)).unwrap();
        let b = GridProcess::new(grid, p.b.clone()).unwrap();
        let ito = ito_integral(&b, &p.b, 1000).unwrap();
        let bt = p.b[1000];
        let qv = p.qv[1000];
        let scale = (bt * bt).max(qv).max(2.0 * ito.abs());
        worst = worst.max((bt * bt - 2.0 * ito - qv).abs() / scale);
    }
    if worst <= 1e-12 {
        Ok(format!(
            "worst relative residual {worst:.2e} over 100 paths"
        ))
    } else {
        Err(format!("relative residual {worst:.2e} > 1e-12"))
    }
}

fn random_functional(rng: &mut ChaCha8Rng) -> impl Fn(&DrivingPath) -> f64 + Sync {
    let a: f64 = rng.random_range(-2.0..2.0);
    let b: f64 = rng.random_range(-2.0..2.0);
    let c: f64 = rng.random_range(-1.0..1.0);
    let d: f64 = rng.random_range(-1.0..1.0);
    move |p: &DrivingPath| {
        let n = p.b.len() - 1;
        a * p.b[n] + b * p.qv[n] + c * p.b[n / 2].powi(2) + d * (p.b[n] * 3.0).sin() + p.jump_mass()
    }
}

fn sublinearity_axioms() -> Outcome {
    let grid = TimeGrid::new(1.0, 100).unwrap();
    let family = ScenarioFamily::new(vec![
        Scenario::brownian(0.5),
        Scenario::new(
            VolatilityControl::bang_bang(0.5, 1.0, 0.25),
            LevyScenario::new(2.0, JumpLaw::Atoms(vec![(1.0, 0.5), (-1.0, 0.5)])),
        ),
    ])
    .unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(20);
    let mut monotone_checked = 0;
    for pair in 0..20 {
        let seed = 1000 + pair as u64;
        let f = random_functional(&mut rng);
        let x = EmpiricalLaw::sample(&family, &grid, 200, seed, &f).unwrap();
        let y = if pair % 2 == 0 {
            let shift: f64 = rng.random_range(0.0..1.0);
            let weight: f64 = rng.random_range(0.0..2.0);
            EmpiricalLaw::sample(&family, &grid, 200, seed, |p| {
                f(p) + shift + weight * p.terminal().abs()
            })
            .unwrap()
        } else {
            let g = random_functional(&mut rng);
            EmpiricalLaw::sample(&family, &grid, 200, seed, g).unwrap()
        };
        let constant: f64 = rng.random_range(-5.0..5.0);
        let kappa: f64 = rng.random_range(0.1..10.0);
        let audit = audit_axioms(&x, &y, constant, kappa).unwrap();
        if pair % 2 == 0 {
            if audit.monotone != Some(true) {
                return Err(format!("pair {pair}: monotonicity {:?}", audit.monotone));
            }
            monotone_checked += 1;
        }
        if !audit.all_hold() {
            return Err(format!("pair {pair}: {audit:?}"));
        }
    }
    Ok(format!(
        "20 pairs, {monotone_checked} with monotonicity, all axioms exact"
    ))
}

fn gbm_oracle() -> Outcome {
    let (mu, sigma) = (0.05, 0.2);
    let model = Model::gbm(mu, sigma);
    let fine = TimeGrid::new(1.0, 2000).unwrap();
    let coarse = TimeGrid::new(1.0, 1000).unwrap();
    let init_fine = InitialData::new(&InitialSegment::Constant(1.0), 0.01, fine.dt()).unwrap();
    let init_coarse = InitialData::new(&InitialSegment::Constant(1.0), 0.01, coarse.dt()).unwrap();
    let scenario = Scenario::brownian(1.0);
    let (mut err_c, mut err_f, mut scale) = (0.0, 0.0, 0.0);
    let n = 256;
    for k in 0..n {
        let pf = DrivingPath::generate(&fine, &scenario, derive_seed(3, 0, k)).unwrap();
        let pc = pf.coarsen(2).unwrap();
        let exact = ((mu - 0.5 * sigma * sigma) + sigma * pf.terminal()).exp();
        let xf = euler_solve(&model, &init_fine, &pf).unwrap().terminal();
        let xc = euler_solve(&model, &init_coarse, &pc).unwrap().terminal();
        err_f += (xf - exact).powi(2) / n as f64;
        err_c += (xc - exact).powi(2) / n as f64;
        scale += exact * exact / n as f64;
    }
    let (rms_c, rms_f, rms_scale) = (err_c.sqrt(), err_f.sqrt(), scale.sqrt());
    let bound = 3.0 * coarse.dt().sqrt() * rms_scale;
    let ratio = rms_c / rms_f;
    let detail =
        format!("RMS error {rms_c:.3e} (bound {bound:.3e}), halving dt reduces it by {ratio:.3}");
    if rms_c <= bound && ratio >= 1.3 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn picard_factorial_law() -> Outcome {
    // analytic part: x' = x, x(0) = 1, no noise
    let grid = TimeGrid::new(1.0, 1000).unwrap();
    let init = InitialData::new(&InitialSegment::Constant(1.0), 0.01, grid.dt()).unwrap();
    let its = picard_iterate(
        &Model::linear_drift(1.0),
        &init,
        &DrivingPath::quiet(&grid),
        9,
    )
    .unwrap();
    let mut worst = (0, 0.0_f64);
    let mut first_bad = None;
    let mut factorial = 1.0;
    for n in 0..=8 {
        factorial *= (n + 1) as f64;
        let oracle = 1.0 / factorial;
        let e_n = sup_distance(&its[n + 1], &its[n]).unwrap();
        let rel = (e_n - oracle).abs() / oracle;
        if rel > worst.1 {
            worst = (n, rel);
        }
        if rel > 0.01 && first_bad.is_none() {
            first_bad = Some((n, rel));
        }
    }

    // envelope part: GBM on two scenarios
    let family = two_sigma();
    let model = Model::gbm(0.05, 0.2);
    let initial = InitialSegment::Constant(1.0);
    let exp = Experiment {
        model: &model,
        family: &family,
        grid,
        initial: &initial,
        delay_window: 0.01,
        n_paths: 256,
        seed: 404,
    };
    let k = constants_for(&model, &family, 1.0, init.norm_sq());
    let reports = check_error_estimate(&exp, &k, 8).unwrap();
    let envelope = verdicts_hold(&reports);

    let analytic = format!(
        "worst factorial-law deviation {:.2}% at n = {}",
        100.0 * worst.1,
        worst.0
    );
    match (first_bad, envelope) {
        (None, Ok(())) => Ok(format!("{analytic}; envelope dominates n = 0..8")),
        (Some((n, rel)), env) => Err(format!(
            "factorial law off by {:.2}% at n = {n} (limit 1%); {analytic}; envelope {}",
            100.0 * rel,
            if env.is_ok() {
                "dominates n = 0..8"
            } else {
                "also fails"
            }
        )),
        (None, Err(e)) => Err(format!("{analytic}; envelope fails: {e}")),
    }
}

fn boundedness() -> Outcome {
    let family = two_sigma();
    let grid = TimeGrid::new(1.0, 1000).unwrap();
    let initial = InitialSegment::Constant(1.0);
    let mut details = Vec::new();
    for model in [Model::gbm(0.05, 0.2), Model::delayed_linear(0.5, 0.3, 0.2)] {
        let exp = Experiment {
            model: &model,
            family: &family,
            grid,
            initial: &initial,
            delay_window: 0.2,
            n_paths: 256,
            seed: 55,
        };
        let zeta = exp.initial_data(&grid).unwrap().norm_sq();
        let k = constants_for(&model, &family, 1.0, zeta);
        verdicts_hold(&check_coefficients(&exp).unwrap())
            .map_err(|e| format!("{}: audit {e}", model.name()))?;
        let reports = check_boundedness(&exp, &k).unwrap();
        let display = reports.iter().find(|r| r.name == "proof_display").unwrap();
        verdicts_hold(std::slice::from_ref(display))
            .map_err(|e| format!("{}: {e}", model.name()))?;
        details.push(format!(
            "{} {:.3} <= {:.3e}",
            model.name(),
            display.lhs,
            display.rhs
        ));
    }
    Ok(details.join("; "))
}

fn bdg_suite() -> Outcome {
    let grid = TimeGrid::new(1.0, 1000).unwrap();
    let family = ScenarioFamily::new(vec![
        Scenario::new(
            VolatilityControl::constant(1.0),
            LevyScenario::new(2.0, JumpLaw::Atoms(vec![(1.0, 0.5), (-1.0, 0.5)])),
        ),
        Scenario::new(
            VolatilityControl::bang_bang(0.5, 1.0, 0.25),
            LevyScenario::new(1.0, JumpLaw::Uniform { lo: 0.2, hi: 0.8 }),
        ),
    ])
    .unwrap();
    let bdg = BdgConstants::defaults(family.sigma_bar());
    let corpus = Integrand::corpus();
    let mut details = Vec::new();
    for kind in BdgKind::ALL {
        let reports = check_bdg(kind, &corpus, &family, &grid, &bdg, 1000, 66).unwrap();
        verdicts_hold(&reports)?;
        let k_max = reports
            .iter()
            .map(|r| r.details["calibrated_k"])
            .fold(0.0, f64::max);
        if kind == BdgKind::Jump && k_max > 8.0 {
            return Err(format!("calibrated jump constant {k_max:.3} > 8"));
        }
        details.push(format!("{} calibrated k <= {k_max:.3}", kind.label()));
    }
    Ok(details.join(", "))
}

fn chebyshev() -> Outcome {
    let grid = TimeGrid::new(1.0, 100).unwrap();
    let mut details = Vec::new();
    for (label, family) in [
        ("family", two_sigma()),
        (
            "singleton",
            ScenarioFamily::singleton(Scenario::brownian(1.0)).unwrap(),
        ),
    ] {
        let reports = check_chebyshev(&family, &grid, &[0.5, 1.0, 2.0], 2.0, 10_000, 8).unwrap();
        let printed: Vec<_> = reports
            .iter()
            .filter(|r| r.name.starts_with("printed"))
            .cloned()
            .collect();
        verdicts_hold(&printed).map_err(|e| format!("{label}: {e}"))?;
        let markov: Vec<String> = reports
            .iter()
            .filter(|r| r.name.starts_with("markov"))
            .map(|r| format!("{:.3}<={:.3}", r.lhs, r.rhs))
            .collect();
        details.push(format!("{label} printed ok, c^p form {}", markov.join(" ")));
    }
    Ok(details.join("; "))
}

fn uniqueness() -> Outcome {
    let family = two_sigma();
    let model = Model::gbm(0.05, 0.2);
    let initial = InitialSegment::Constant(1.0);
    let exp = Experiment {
        model: &model,
        family: &family,
        grid: TimeGrid::new(1.0, 1000).unwrap(),
        initial: &initial,
        delay_window: 0.01,
        n_paths: 32,
        seed: 88,
    };
    let r = &check_uniqueness(&exp, 1.0, 40, 1e-8).unwrap()[0];
    let detail = format!(
        "max distance {:.2e} after at most {} iterations",
        r.lhs, r.details["max_iterations"]
    );
    if r.holds == Verdict::Holds {
        Ok(detail)
    } else {
        Err(format!("{detail} ({})", r.holds))
    }
}

fn exponential() -> Outcome {
    let a = 0.3;
    let model = Model::linear_drift(a);
    let family = ScenarioFamily::singleton(Scenario::brownian(1.0)).unwrap();
    let initial = InitialSegment::Constant(1.0);
    let exp = Experiment {
        model: &model,
        family: &family,
        grid: TimeGrid::new(1.0, 1000).unwrap(),
        initial: &initial,
        delay_window: 0.01,
        n_paths: 4,
        seed: 99,
    };
    let k = constants_for(&model, &family, 1.0, 1.0);
    let fit = fit_growth(&exp, 20, 1000).unwrap();
    let report = &check_exponential(&exp, &k, 20, 1000).unwrap()[0];
    let detail = format!(
        "fitted rate {:.5} vs a = {a}, bound {:.3}",
        fit.rate, report.rhs
    );
    if (fit.rate - a).abs() <= 0.05 * a && report.holds == Verdict::Holds {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn read_artifacts(dir: &Path, seed: u64) -> (Vec<u8>, Vec<u8>) {
    (
        std::fs::read(dir.join(format!("verify_{seed}.csv"))).unwrap(),
        std::fs::read(dir.join(format!("verify_{seed}.json"))).unwrap(),
    )
}

fn determinism() -> Outcome {
    let cfg = ExperimentConfig::load(Path::new(concat!(
        env!("CARGO_MANIFEST_DIR"),
        "/configs/gbm.json"
    )))
    .unwrap();
    let max_threads = std::thread::available_parallelism()
        .map(|n| n.get())
        .unwrap_or(1)
        .max(8);
    let mut runs = Vec::new();
    for threads in [None, Some(1), Some(max_threads)] {
        let dir = tempfile::tempdir().unwrap();
        let go = || execute(Subcommand::Verify, &cfg, dir.path()).unwrap();
        match threads {
            None => go(),
            Some(t) => rayon::ThreadPoolBuilder::new()
                .num_threads(t)
                .build()
                .unwrap()
                .install(go),
        };
        runs.push(read_artifacts(dir.path(), cfg.seed));
    }
    if runs.windows(2).all(|w| w[0] == w[1]) {
        Ok(format!(
            "3 runs (default, 1 and {max_threads} threads): identical {}-byte CSV and JSON",
            runs[0].0.len()
        ))
    } else {
        Err("artifacts differ between runs".into())
    }
}

type Criterion = (&'static str, Duration, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 10] = [
        (
            "discrete Ito identity",
            Duration::from_secs(1),
            discrete_ito_identity,
        ),
        (
            "sublinearity axioms",
            Duration::from_secs(5),
            sublinearity_axioms,
        ),
        (
            "GBM closed-form oracle",
            Duration::from_secs(30),
            gbm_oracle,
        ),
        (
            "Picard factorial law and error envelope",
            Duration::from_secs(120),
            picard_factorial_law,
        ),
        (
            "second-moment boundedness",
            Duration::from_secs(60),
            boundedness,
        ),
        ("BDG-type inequalities", Duration::from_secs(60), bdg_suite),
        ("capacity tail bound", Duration::from_secs(10), chebyshev),
        (
            "uniqueness of the Picard limit",
            Duration::from_secs(60),
            uniqueness,
        ),
        (
            "exponential growth rate",
            Duration::from_secs(60),
            exponential,
        ),
        (
            "deterministic verify artifacts",
            Duration::from_secs(120),
            determinism,
        ),
    ];
    let mut failed = 0;
    for (i, (name, budget, check)) in criteria.into_iter().enumerate() {
        let start = Instant::now();
        let outcome =
            catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|_| Err("panicked".into()));
        let elapsed = start.elapsed();
        let outcome = match outcome {
            Ok(d) if elapsed > budget => Err(format!("{d}; took {elapsed:.1?}, budget {budget:?}")),
            other => other,
        };
        match outcome {
            Ok(detail) => println!(
                "criterion {:>2} PASS  {name}: {detail} [{elapsed:.2?}]",
                i + 1
            ),
            Err(detail) => {
                failed += 1;
                println!(
                    "criterion {:>2} FAIL  {name}: {detail} [{elapsed:.2?}]",
                    i + 1
                );
            }
        }
    }
    println!("acceptance: {} of 10 criteria pass", 10 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
