//! Acceptance run: one PASS/FAIL line per criterion, non-zero exit if any
//! criterion fails. Tolerances are pinned below.

mod common;

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use sijc::dressed::{diagonalize_dressed, s_matrix};
use sijc::grid::{convergence_study, default_grid, shape_invariance_residual, verify_spectrum, GridSpec};
use sijc::linalg::eig_symmetric;
use sijc::{
    energy_level, jc_eigenvalue, level_count, morse_closed_form, parameter_chain, remainder, Branch, LevelCount,
    LevelLabel, PotentialFamily,
};

const SEED: u64 = 0x005e_ed1c;

const C1_REL_TOL: f64 = 1e-12;
const C1_SAMPLES: usize = 100;
const C2_ABS_TOL: f64 = 1e-10;
const C3_REL_TOL: f64 = 1e-3;
const C3_GROUND_ABS_TOL: f64 = 1e-2;
const C3_LEAKAGE_TOL: f64 = 1e-6;
const C4_ABS_TOL: f64 = 1e-4;
const C5_ORDER_RANGE: (f64, f64) = (1.6, 2.4);
const C6_RATIO_RANGE: (f64, f64) = (3.0, 5.0);
const C6_BROKEN_MIN: f64 = 0.5;
const C7_PAIR_SUM_TOL: f64 = 1e-13;
const C7_PAIR_PRODUCT_TOL: f64 = 1e-12;
const C7_TELESCOPE_TOL: f64 = 1e-12;
const C7_S_EIGEN_TOL: f64 = 1e-12;
const C7_SAMPLES: usize = 60;

type Check = fn() -> Outcome;

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        passed,
        detail: detail.into(),
    }
}

fn reference_morse() -> PotentialFamily {
    PotentialFamily::morse(25.0, 1.0, 0.5).expect("reference set")
}

fn random_morse(rng: &mut ChaCha8Rng) -> PotentialFamily {
    loop {
        let v0 = rng.gen_range(1.0..200.0);
        let lambda = rng.gen_range(0.05..3.0);
        let mass = rng.gen_range(0.1..10.0);
        let hbar = rng.gen_range(0.2..2.0);
        if let Ok(f) = PotentialFamily::morse(v0, lambda, mass).and_then(|f| f.with_hbar(hbar)) {
            if matches!(level_count(&f), LevelCount::Finite(n) if n >= 1) {
                return f;
            }
        }
    }
}

fn random_family(rng: &mut ChaCha8Rng, which: usize) -> PotentialFamily {
    match which % 3 {
        0 => PotentialFamily::harmonic(rng.gen_range(0.1..10.0), rng.gen_range(0.1..5.0))
            .and_then(|f| f.with_hbar(rng.gen_range(0.2..3.0)))
            .expect("valid oscillator"),
        1 => random_morse(rng),
        _ => {
            PotentialFamily::scaling(rng.gen_range(0.1..10.0), rng.gen_range(0.05..0.95)).expect("valid scaling chain")
        }
    }
}

fn top_level(family: &PotentialFamily) -> usize {
    match level_count(family) {
        LevelCount::Finite(n) => n,
        LevelCount::Unbounded => 8,
    }
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut worst: f64 = 0.0;
    let mut checks = 0;
    for _ in 0..C1_SAMPLES {
        let family = random_morse(&mut rng);
        let omega = rng.gen_range(0.0..20.0);
        let m = rng.gen_range(0..top_level(&family));
        let scale = jc_eigenvalue(&family, omega, m, Branch::Plus).expect("in range");
        for branch in Branch::BOTH {
            let chain = jc_eigenvalue(&family, omega, m, branch).expect("in range");
            let literal = morse_closed_form(&family, omega, m, branch).expect("in range");
            worst = worst.max((chain - literal).abs() / scale);
            checks += 1;
        }
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(
        worst <= C1_REL_TOL && secs < 1.0,
        format!("{checks} comparisons, worst rel {worst:.2e} (tol {C1_REL_TOL:.0e}), {secs:.3}s"),
    )
}

fn criterion_2() -> Outcome {
    let start = Instant::now();
    let spec = match diagonalize_dressed(&reference_morse(), 2.0, 3) {
        Ok(s) => s,
        Err(e) => return outcome(false, e.to_string()),
    };
    let mut expected = vec![
        0.0,
        4.0,
        12.0,
        14.0 - 28f64.sqrt(),
        14.0 + 28f64.sqrt(),
        12.0,
        24.0,
        20.0 - 40f64.sqrt(),
        20.0 + 40f64.sqrt(),
    ];
    expected.sort_by(f64::total_cmp);
    let numeric: Vec<f64> = spec.levels.iter().map(|l| l.numeric).collect();
    let worst = numeric
        .iter()
        .zip(&expected)
        .fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()));
    let secs = start.elapsed().as_secs_f64();
    outcome(
        numeric.len() == expected.len() && worst <= C2_ABS_TOL && secs < 1.0,
        format!("9 eigenvalues, worst abs {worst:.2e} (tol {C2_ABS_TOL:.0e}), {secs:.3}s"),
    )
}

fn criterion_3() -> Outcome {
    let start = Instant::now();
    let grid = GridSpec::new(-2.5, 14.0, 1000).expect("reference grid");
    let report = match verify_spectrum(&reference_morse(), 2.0, &grid, 5) {
        Ok(r) => r,
        Err(e) => return outcome(false, e.to_string()),
    };
    let ground = report.level(LevelLabel::Ground).expect("ground level");
    let excited_ok = report
        .levels
        .iter()
        .filter(|l| l.label != LevelLabel::Ground)
        .all(|l| l.rel_error <= C3_REL_TOL);
    let secs = start.elapsed().as_secs_f64();
    outcome(
        excited_ok && ground.abs_error <= C3_GROUND_ABS_TOL && report.ground_leakage <= C3_LEAKAGE_TOL && secs <= 120.0,
        format!(
            "max rel {:.2e} (tol {C3_REL_TOL:.0e}), ground abs {:.2e} (tol {C3_GROUND_ABS_TOL:.0e}), leakage {:.2e} (tol {C3_LEAKAGE_TOL:.0e}), {secs:.2}s",
            report.max_rel_error(),
            ground.abs_error,
            report.ground_leakage
        ),
    )
}

fn criterion_4() -> Outcome {
    let start = Instant::now();
    let family = PotentialFamily::harmonic(1.0, 1.0).expect("oscillator");
    let result = default_grid(&family, 3)
        .and_then(|g| sijc::grid::build_two_channel(&family, 4.0, &g))
        .and_then(|h| h.eigenvalues());
    let values = match result {
        Ok(v) => v,
        Err(e) => return outcome(false, e.to_string()),
    };
    let lowest = &values[..values.len().min(10)];
    let mut worst: f64 = 0.0;
    for target in [-1.0, 0.0, 3.0] {
        let nearest = lowest.iter().fold(f64::INFINITY, |m, v| m.min((v - target).abs()));
        worst = worst.max(nearest);
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(
        worst <= C4_ABS_TOL && secs <= 60.0,
        format!("{{-1, 0, 3}} among lowest 10, worst abs {worst:.2e} (tol {C4_ABS_TOL:.0e}), {secs:.2}s"),
    )
}

fn criterion_5() -> Outcome {
    let start = Instant::now();
    let grid = GridSpec::new(-2.5, 14.0, 1000).expect("reference grid");
    let study = match convergence_study(&reference_morse(), 2.0, &grid, 5) {
        Ok(s) => s,
        Err(e) => return outcome(false, e.to_string()),
    };
    let orders: Vec<f64> = study.fitted_orders().collect();
    let (lo, hi) = C5_ORDER_RANGE;
    let min = orders.iter().copied().fold(f64::INFINITY, f64::min);
    let max = orders.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let secs = start.elapsed().as_secs_f64();
    outcome(
        !orders.is_empty() && orders.iter().all(|p| (lo..=hi).contains(p)),
        format!(
            "{} fitted orders in [{min:.4}, {max:.4}] (accepted [{lo}, {hi}]), {secs:.2}s",
            orders.len()
        ),
    )
}

fn criterion_6() -> Outcome {
    let (lo, hi) = C6_RATIO_RANGE;
    let mut parts = Vec::new();
    let mut passed = true;
    let ho = PotentialFamily::harmonic(1.0, 1.0).expect("oscillator");
    let cases = [
        ("ho", ho, default_grid(&ho, 1)),
        ("morse", reference_morse(), GridSpec::new(-2.5, 14.0, 1000)),
    ];
    for (name, family, grid) in cases {
        let run = grid.and_then(|g| {
            let coarse = shape_invariance_residual(&family, &g, 0.0)?;
            let fine = shape_invariance_residual(&family, &g.refined(), 0.0)?;
            let broken = shape_invariance_residual(&family, &g, 1.0)?;
            Ok((coarse / fine, broken))
        });
        match run {
            Ok((ratio, broken)) => {
                passed &= (lo..=hi).contains(&ratio) && broken >= C6_BROKEN_MIN;
                parts.push(format!("{name} ratio {ratio:.4}, broken {broken:.4}"));
            }
            Err(e) => {
                passed = false;
                parts.push(format!("{name}: {e}"));
            }
        }
    }
    outcome(
        passed,
        format!(
            "{} (ratio in [{lo}, {hi}], broken >= {C6_BROKEN_MIN})",
            parts.join("; ")
        ),
    )
}

fn criterion_7() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 7);
    let mut failures: Vec<String> = Vec::new();
    let mut worst = [0.0_f64; 4];
    for i in 0..C7_SAMPLES {
        let family = random_family(&mut rng, i);
        let omega = rng.gen_range(0.0..20.0);
        let top = top_level(&family);
        let hbar_omega = family.hbar() * omega;

        // telescoping: eps_n is the partial sum of remainders (and a_1^2 - a_{n+1}^2 for Morse)
        let mut sum = 0.0;
        for n in 1..=top {
            sum += remainder(&family, n).expect("in range");
            let eps = energy_level(&family, n).expect("in range").epsilon;
            let mut err = (sum - eps).abs() / eps;
            if let Ok(chain) = parameter_chain(&family, n) {
                if matches!(level_count(&family), LevelCount::Finite(_)) {
                    let a = &chain.values;
                    err = err.max((a[0] * a[0] - a[n] * a[n] - eps).abs() / eps);
                }
            }
            worst[2] = worst[2].max(err);
        }

        for m in 0..top {
            let eps = energy_level(&family, m + 1).expect("in range").epsilon;
            let plus = jc_eigenvalue(&family, omega, m, Branch::Plus).expect("in range");
            let minus = jc_eigenvalue(&family, omega, m, Branch::Minus).expect("in range");
            worst[0] = worst[0].max((plus + minus - 2.0 * eps).abs() / (2.0 * eps));
            let product = eps * eps - hbar_omega * eps;
            worst[1] = worst[1].max((plus * minus - product).abs() / (eps * eps + hbar_omega * eps));

            let p0 = jc_eigenvalue(&family, 0.0, m, Branch::Plus).expect("in range");
            let m0 = jc_eigenvalue(&family, 0.0, m, Branch::Minus).expect("in range");
            if p0 != eps || m0 != eps {
                failures.push(format!("{family}: zero-drive doublet m={m} not degenerate"));
            }
        }

        let n_max = top - 1;
        match s_matrix(&family, n_max).and_then(|s| Ok(eig_symmetric(&s.matrix, false)?.values)) {
            Ok(values) => {
                let mut expected = vec![0.0];
                for n in 1..=n_max + 1 {
                    let root = energy_level(&family, n).expect("in range").epsilon.sqrt();
                    expected.extend([root, -root]);
                }
                expected.sort_by(f64::total_cmp);
                let scale = expected.last().copied().unwrap_or(1.0).max(1.0);
                for (a, b) in values.iter().zip(&expected) {
                    worst[3] = worst[3].max((a - b).abs() / scale);
                }
            }
            Err(e) => failures.push(format!("{family}: {e}")),
        }
        match diagonalize_dressed(&family, 0.0, n_max) {
            Ok(spec)
                if spec.max_deviation <= C7_S_EIGEN_TOL * spec.levels.last().map_or(1.0, |l| l.analytic.max(1.0)) => {}
            Ok(spec) => failures.push(format!(
                "{family}: zero-drive dressed deviation {:.2e}",
                spec.max_deviation
            )),
            Err(e) => failures.push(format!("{family}: {e}")),
        }
    }
    let tols = [C7_PAIR_SUM_TOL, C7_PAIR_PRODUCT_TOL, C7_TELESCOPE_TOL, C7_S_EIGEN_TOL];
    let within = worst.iter().zip(&tols).all(|(w, t)| w <= t);
    let mut detail = format!(
        "{C7_SAMPLES} families: pair-sum {:.1e}, pair-product {:.1e}, telescoping {:.1e}, S-eigen {:.1e}, zero-drive degeneracy {}",
        worst[0],
        worst[1],
        worst[2],
        worst[3],
        if failures.is_empty() { "ok" } else { "broken" }
    );
    if let Some(first) = failures.first() {
        detail.push_str(&format!("; first failure: {first}"));
    }
    outcome(within && failures.is_empty(), detail)
}

fn criterion_8() -> Outcome {
    let mut problems = Vec::new();
    let runs = common::golden_runs();
    for (name, args) in &runs {
        if let Err(e) = common::check_golden(name, args) {
            problems.push(e.lines().next().unwrap_or_default().to_string());
        }
    }
    let morse = common::MORSE;
    let expectations: Vec<(&str, Vec<String>, i32)> = vec![
        ("unknown subcommand", vec!["bogus".into()], 2),
        (
            "level out of range",
            common::with(&morse, "spectrum", &["--levels", "9"]),
            3,
        ),
        (
            "tolerance breach",
            common::with(
                &morse,
                "verify",
                &["--omega-drive", "2", "--n-points", "300", "--tolerance", "1e-6"],
            ),
            4,
        ),
        (
            "dressed self-check",
            common::with(&morse, "dressed", &["--omega-drive", "2", "--n-max", "3"]),
            0,
        ),
        (
            "analytic-only family",
            ["verify", "--family", "scaling", "--r1", "1", "--q", "0.5"]
                .map(String::from)
                .into(),
            3,
        ),
    ];
    for (what, args, want) in &expectations {
        let a: Vec<&str> = args.iter().map(String::as_str).collect();
        let got = common::sijc(&a).status.code();
        if got != Some(*want) {
            problems.push(format!("{what}: exit {got:?}, expected {want}"));
        }
    }
    outcome(
        problems.is_empty(),
        if problems.is_empty() {
            format!(
                "{} golden files byte-identical, {} exit-code paths as documented",
                runs.len(),
                expectations.len()
            )
        } else {
            problems.join("; ")
        },
    )
}

fn main() {
    let criteria: [(&str, Check); 8] = [
        ("closed-form self-consistency", criterion_1),
        ("dressed-matrix oracle", criterion_2),
        ("grid oracle, Morse", criterion_3),
        ("grid oracle, oscillator reduction", criterion_4),
        ("convergence order", criterion_5),
        ("shape-invariance residual", criterion_6),
        ("spectral algebra properties", criterion_7),
        ("CLI determinism and exit codes", criterion_8),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let result = check();
        if !result.passed {
            failed += 1;
        }
        println!(
            "criterion {}: {} [{}] {}",
            i + 1,
            if result.passed { "PASS" } else { "FAIL" },
            name,
            result.detail
        );
    }
    println!(
        "acceptance: {} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
