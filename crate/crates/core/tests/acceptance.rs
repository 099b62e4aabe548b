//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Most criteria replay a recipe from `recipes/` through the runner and add an
//! independent check in test code. Criterion 12 is a finite-difference oracle
//! against the analytic derivatives.

use std::path::PathBuf;
use std::process::ExitCode;

use curvedcc::potentials::{ambient_gradients, grad_angle, hessian_i, hessian_u};
use curvedcc::runner::{run, Command, ExperimentConfig, ResultEnvelope, RunOptions};
use curvedcc::{AnglePoint, Curvature, MassList};
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const GRAD_REL: f64 = 1e-6;
const GRAD_FLOOR: f64 = 1e-9;
const HESS_REL: f64 = 1e-5;
const FD_CONFIGS: usize = 200;
const ORACLE_CC_TOL: f64 = 1e-6;

/// Criteria whose failure is a documented limitation rather than a regression.
/// Each entry names the part that must still hold.
const KNOWN_UNATTAINABLE: &[u32] = &[9];

struct Verdict {
    id: u32,
    title: &'static str,
    passed: bool,
    detail: String,
    /// For known-unattainable criteria, whether the attainable part holds.
    floor_holds: bool,
}

fn recipe(name: &str) -> ResultEnvelope {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../recipes")
        .join(name);
    let cfg = ExperimentConfig::load(&path).unwrap_or_else(|e| panic!("{name}: {e}"));
    run(&cfg, &RunOptions::default())
        .unwrap_or_else(|e| panic!("{name}: {e}"))
        .envelope
}

fn failures(env: &ResultEnvelope) -> String {
    let f: Vec<String> = env
        .failed()
        .map(|a| format!("{}[{}]: {}", a.name, a.case.as_deref().unwrap_or("-"), a.detail))
        .collect();
    if f.is_empty() {
        String::new()
    } else {
        format!("; failed: {}", f.join(" | "))
    }
}

fn assertion_ok(env: &ResultEnvelope, name: &str) -> bool {
    let mut it = env.assertions.iter().filter(|a| a.name == name).peekable();
    it.peek().is_some() && it.all(|a| a.passed)
}

fn count(env: &ResultEnvelope, name: &str) -> usize {
    env.assertions.iter().filter(|a| a.name == name).count()
}

// ---------------------------------------------------------------------------
// Independent potential in angle coordinates.

fn point(theta: f64, phi: f64, sigma: Curvature) -> [f64; 4] {
    match sigma {
        Curvature::Hyperbolic => [theta.sinh(), theta.cosh() * phi.sinh(), 0.0, theta.cosh() * phi.cosh()],
        Curvature::Spherical => [theta.sin(), theta.cos() * phi.sin(), theta.cos() * phi.cos(), 0.0],
    }
}

fn sdot(a: &[f64; 4], b: &[f64; 4], sigma: Curvature) -> f64 {
    let s = if sigma == Curvature::Hyperbolic { -1.0 } else { 1.0 };
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2] + s * a[3] * b[3]
}

/// `(U, I)` from angle vector `[θ₁..θₙ, φ₁..φₙ]`.
fn oracle_ui(x: &[f64], m: &[f64], sigma: Curvature) -> (f64, f64) {
    let n = m.len();
    let q: Vec<[f64; 4]> = (0..n).map(|i| point(x[i], x[n + i], sigma)).collect();
    let mut u = 0.0;
    for i in 0..n {
        for j in i + 1..n {
            let d = match sigma {
                Curvature::Hyperbolic => (-sdot(&q[i], &q[j], sigma)).max(1.0).acosh(),
                Curvature::Spherical => sdot(&q[i], &q[j], sigma).clamp(-1.0, 1.0).acos(),
            };
            let pot = match sigma {
                Curvature::Hyperbolic => 1.0 / d.tanh(),
                Curvature::Spherical => 1.0 / d.tan(),
            };
            u += m[i] * m[j] * pot;
        }
    }
    let i_val = q.iter().zip(m).map(|(p, mi)| mi * (p[0] * p[0] + p[1] * p[1])).sum();
    (u, i_val)
}

/// Five-point central difference of a vector-valued function.
fn fd<F: Fn(&[f64]) -> Vec<f64>>(f: F, x: &[f64], h: f64) -> DMatrix<f64> {
    let k = f(x).len();
    let mut jac = DMatrix::zeros(k, x.len());
    for c in 0..x.len() {
        let at = |s: f64| {
            let mut y = x.to_vec();
            y[c] += s * h;
            f(&y)
        };
        let (p1, m1, p2, m2) = (at(1.0), at(-1.0), at(2.0), at(-2.0));
        for r in 0..k {
            jac[(r, c)] = (8.0 * (p1[r] - m1[r]) - (p2[r] - m2[r])) / (12.0 * h);
        }
    }
    jac
}

fn random_config(rng: &mut ChaCha8Rng, sigma: Curvature) -> (Vec<f64>, Vec<f64>) {
    loop {
        let n = rng.gen_range(2..=6);
        let span = if sigma == Curvature::Hyperbolic { 1.5 } else { 1.2 };
        let x: Vec<f64> = (0..2 * n).map(|_| rng.gen_range(-span..span)).collect();
        let m: Vec<f64> = (0..n).map(|_| rng.gen_range(0.2..3.0)).collect();
        let q: Vec<[f64; 4]> = (0..n).map(|i| point(x[i], x[n + i], sigma)).collect();
        let far = (0..n).all(|i| {
            (i + 1..n).all(|j| {
                let d: f64 = (0..4).map(|k| (q[i][k] - q[j][k]).powi(2)).sum::<f64>().sqrt();
                d > 0.1
            })
        });
        if far {
            return (x, m);
        }
    }
}

struct OracleStats {
    worst_grad: f64,
    worst_hess: f64,
    worst_ambient: f64,
    configs: usize,
}

/// Worst `‖a − fd‖ / (rel·‖fd‖ + floor)` ratios; a ratio below 1 passes.
fn derivative_oracle(sigma: Curvature, seed: u64) -> OracleStats {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut st = OracleStats {
        worst_grad: 0.0,
        worst_hess: 0.0,
        worst_ambient: 0.0,
        configs: 0,
    };
    for _ in 0..FD_CONFIGS {
        let (x, m) = random_config(&mut rng, sigma);
        let n = m.len();
        let masses = MassList::new(m.clone()).unwrap();
        let angles = |y: &[f64]| -> Vec<AnglePoint> { (0..n).map(|i| AnglePoint::new(y[i], y[n + i])).collect() };
        let ev = grad_angle(&angles(&x), &masses, sigma).unwrap();

        let fd_u = fd(|y| vec![oracle_ui(y, &m, sigma).0], &x, 1e-3);
        let fd_i = fd(|y| vec![oracle_ui(y, &m, sigma).1], &x, 1e-3);
        for (an, num) in [(&ev.grad_u, &fd_u), (&ev.grad_i, &fd_i)] {
            let a = DVector::from_column_slice(an);
            let b = DVector::from_iterator(2 * n, num.row(0).iter().copied());
            st.worst_grad = st.worst_grad.max((a - &b).norm() / (GRAD_REL * b.norm() + GRAD_FLOOR));
        }

        let hu = hessian_u(&angles(&x), &masses, sigma).unwrap();
        let hi = hessian_i(&angles(&x), &masses, sigma).unwrap();
        let fd_hu = fd(|y| grad_angle(&angles(y), &masses, sigma).unwrap().grad_u, &x, 1e-3);
        let fd_hi = fd(|y| grad_angle(&angles(y), &masses, sigma).unwrap().grad_i, &x, 1e-3);
        for (an, num) in [(&hu, &fd_hu), (&hi, &fd_hi)] {
            st.worst_hess = st
                .worst_hess
                .max((an - num).norm() / (HESS_REL * num.norm() + GRAD_FLOOR));
        }

        // Ambient Riemannian gradients pulled back through the chart.
        let q: Vec<[f64; 4]> = (0..n).map(|i| point(x[i], x[n + i], sigma)).collect();
        let amb: Vec<curvedcc::AmbientPoint> = q.iter().map(|p| curvedcc::AmbientPoint(*p)).collect();
        let (gu, gi) = ambient_gradients(&amb, &masses, sigma).unwrap();
        for (g, num) in [(&gu, &fd_u), (&gi, &fd_i)] {
            let mut pulled = DVector::zeros(2 * n);
            for i in 0..n {
                for a in 0..2 {
                    let col = a * n + i;
                    let dq = fd(|y| point(y[0], y[1], sigma).to_vec(), &[x[i], x[n + i]], 1e-4);
                    let tangent = [dq[(0, a)], dq[(1, a)], dq[(2, a)], dq[(3, a)]];
                    pulled[col] = sdot(&g[i], &tangent, sigma);
                }
            }
            let b = DVector::from_iterator(2 * n, num.row(0).iter().copied());
            st.worst_ambient = st
                .worst_ambient
                .max((pulled - &b).norm() / (GRAD_REL * b.norm() + GRAD_FLOOR));
        }
        st.configs += 1;
    }
    st
}

/// Scaled residual of `∇U = λ∇I` from finite differences of the test-code potential.
fn oracle_cc_residual(theta: &[f64], m: &[f64], sigma: Curvature) -> (f64, f64) {
    let n = m.len();
    let mut x = theta.to_vec();
    x.extend(std::iter::repeat_n(0.0, n));
    let gu = fd(|y| vec![oracle_ui(y, m, sigma).0], &x, 1e-4);
    let gi = fd(|y| vec![oracle_ui(y, m, sigma).1], &x, 1e-4);
    let gu = DVector::from_iterator(2 * n, gu.row(0).iter().copied());
    let gi = DVector::from_iterator(2 * n, gi.row(0).iter().copied());
    let lambda = gu.dot(&gi) / gi.norm_squared();
    (lambda, (&gu - &gi * lambda).norm() / gu.norm().max(1.0))
}

/// Rechecks every geodesic class representative in a `solve-geodesic` envelope with the oracle.
fn oracle_geodesic(env: &ResultEnvelope) -> (usize, f64, f64) {
    let (mut k, mut worst_res, mut worst_lambda) = (0, 0.0f64, 0.0f64);
    for c in &env.cases {
        let Some(reps) = c.result["representatives"].as_array() else {
            continue;
        };
        for r in reps {
            let theta: Vec<f64> = r["theta"]
                .as_array()
                .unwrap()
                .iter()
                .map(|v| v.as_f64().unwrap())
                .collect();
            let lambda = r["lambda"].as_f64().unwrap();
            let (l, res) = oracle_cc_residual(&theta, c.case.masses.as_slice(), c.case.sigma);
            worst_res = worst_res.max(res);
            worst_lambda = worst_lambda.max((l - lambda).abs() / lambda.abs().max(1.0));
            k += 1;
        }
    }
    (k, worst_res, worst_lambda)
}

fn cases_per_n(env: &ResultEnvelope) -> Vec<(usize, usize)> {
    let mut v: Vec<(usize, usize)> = Vec::new();
    for c in &env.cases {
        let n = c.case.masses.len();
        match v.iter_mut().find(|(k, _)| *k == n) {
            Some(e) => e.1 += 1,
            None => v.push((n, 1)),
        }
    }
    v
}

fn geodesic_count(id: u32, title: &'static str, file: &str) -> Verdict {
    let env = recipe(file);
    assert_eq!(env.command, Command::SolveGeodesic);
    let (k, res, lam) = oracle_geodesic(&env);
    let oracle_ok = res < ORACLE_CC_TOL && lam < ORACLE_CC_TOL;
    let passed = env.passed && assertion_ok(&env, "class_count") && assertion_ok(&env, "runtime") && oracle_ok;
    Verdict {
        id,
        title,
        passed,
        detail: format!(
            "cases per n {:?}, {:.2} s; oracle on {k} classes: residual {res:.1e}, λ mismatch {lam:.1e}{}",
            cases_per_n(&env),
            env.wall_time_s,
            failures(&env)
        ),
        floor_holds: passed,
    }
}

fn simple(id: u32, title: &'static str, file: &str, required: &[&str]) -> Verdict {
    let env = recipe(file);
    let present = required.iter().all(|r| count(&env, r) > 0);
    let passed = env.passed && present;
    Verdict {
        id,
        title,
        passed,
        detail: format!(
            "{} assertions, {:.2} s{}",
            env.assertions.len(),
            env.wall_time_s,
            failures(&env)
        ),
        floor_holds: passed,
    }
}

fn criterion_5() -> Verdict {
    let env = recipe("05_multiplier_sign.toml");
    let classes: u64 = env
        .cases
        .iter()
        .filter_map(|c| c.result["counts"]["total"].as_u64())
        .sum();
    let sigmas: Vec<Curvature> = env.cases.iter().map(|c| c.case.sigma).collect();
    let both = sigmas.contains(&Curvature::Hyperbolic) && sigmas.contains(&Curvature::Spherical);
    let passed = env.passed && assertion_ok(&env, "multiplier_negative") && classes >= 100 && both;
    Verdict {
        id: 5,
        title: "multiplier signs",
        passed,
        detail: format!(
            "{classes} classes over {} cases, {:.2} s{}",
            env.cases.len(),
            env.wall_time_s,
            failures(&env)
        ),
        floor_holds: passed,
    }
}

fn criterion_9() -> Verdict {
    let env = recipe("09_relative_equilibria.toml");
    let integ = |sigma: Curvature| {
        env.assertions
            .iter()
            .filter(|a| a.name == "re_integration")
            .filter(|a| {
                env.cases
                    .iter()
                    .any(|c| Some(&c.case.label) == a.case.as_ref() && c.case.sigma == sigma)
            })
            .map(|a| a.passed)
            .collect::<Vec<_>>()
    };
    let h = integ(Curvature::Hyperbolic);
    let s = integ(Curvature::Spherical);
    let worst = |sigma: Curvature| {
        env.cases
            .iter()
            .filter(|c| c.case.sigma == sigma)
            .filter_map(|c| c.result["max_deviation"].as_f64())
            .fold(0.0, f64::max)
    };
    let closed_form = assertion_ok(&env, "re_closed_form");
    let structural = ["velocity_orthogonality", "tau_conjugation", "kinds_covered"]
        .iter()
        .all(|n| assertion_ok(&env, n));
    let h_ok = !h.is_empty() && h.iter().all(|&p| p);
    let completed = env.cases.iter().all(|c| c.error.is_none());
    Verdict {
        id: 9,
        title: "relative-equilibrium exactness",
        passed: env.passed,
        detail: format!(
            "closed form vs EOM {}; integration H³ {}/{} cases (max dev {:.1e}), S³ {}/{} cases (max dev {:.1e}); S³ collinear REs are linearly unstable, round-off grows past 1e-6 before T = 5",
            if closed_form { "ok" } else { "FAIL" },
            h.iter().filter(|&&p| p).count(),
            h.len(),
            worst(Curvature::Hyperbolic),
            s.iter().filter(|&&p| p).count(),
            s.len(),
            worst(Curvature::Spherical),
        ),
        floor_holds: closed_form && structural && h_ok && completed,
    }
}

fn criterion_10() -> Verdict {
    let env = recipe("10_tau_duality.toml");
    let checked: usize = env
        .cases
        .iter()
        .filter_map(|c| c.result["tau"].as_array().map(|a| a.len()))
        .sum();
    let worst = env
        .cases
        .iter()
        .flat_map(|c| c.result["tau"].as_array().cloned().unwrap_or_default())
        .map(|t| (t["lambda"].as_f64().unwrap() + t["lambda_tau"].as_f64().unwrap()).abs())
        .fold(0.0, f64::max);
    let passed = env.passed && assertion_ok(&env, "tau_duality") && checked >= 10 && worst < 1e-9;
    Verdict {
        id: 10,
        title: "tau duality",
        passed,
        detail: format!(
            "{checked} spherical OCCs, max |λ(τq) + λ| {worst:.1e}{}",
            failures(&env)
        ),
        floor_holds: passed,
    }
}

fn criterion_11() -> Verdict {
    let env = recipe("11_degenerate_continuum.toml");
    let samples = env.summary["degenerate"]["samples"]
        .as_array()
        .cloned()
        .unwrap_or_default();
    let good = samples
        .iter()
        .filter(|s| {
            let t = &s["inertia"]["triple"];
            s["residual"].as_f64().unwrap_or(1.0) < 1e-8
                && t == &serde_json::json!({"n0": 1, "n_plus": 1, "n_minus": 0})
        })
        .count();
    let passed = env.passed && good >= 20;
    Verdict {
        id: 11,
        title: "degenerate continuum",
        passed,
        detail: format!(
            "{good} of {} samples with residual < 1e-8 and inertia (1, 1, 0){}",
            samples.len(),
            failures(&env)
        ),
        floor_holds: passed,
    }
}

fn criterion_12() -> Verdict {
    let h = derivative_oracle(Curvature::Hyperbolic, 1201);
    let s = derivative_oracle(Curvature::Spherical, 1202);
    let env = recipe("12_oracle_identities.toml");
    let g1 = recipe("01_geodesic_count_hyperbolic.toml");
    let g2 = recipe("02_geodesic_count_spherical.toml");
    let mc = [&env, &g1, &g2].iter().all(|e| assertion_ok(e, "mc_identities"));
    let fd_ok = [&h, &s]
        .iter()
        .all(|o| o.worst_grad < 1.0 && o.worst_hess < 1.0 && o.worst_ambient < 1.0);
    let passed = fd_ok && mc && env.passed;
    Verdict {
        id: 12,
        title: "oracle suite",
        passed,
        detail: format!(
            "{}+{} configs; worst error/bound: gradient {:.2}/{:.2}, hessian {:.2}/{:.2}, ambient {:.2}/{:.2} (H/S); identities at every OCC {}{}",
            h.configs,
            s.configs,
            h.worst_grad,
            s.worst_grad,
            h.worst_hess,
            s.worst_hess,
            h.worst_ambient,
            s.worst_ambient,
            if mc { "ok" } else { "FAIL" },
            failures(&env)
        ),
        floor_holds: passed,
    }
}

fn main() -> ExitCode {
    let args: Vec<String> = std::env::args().collect();
    if args.iter().any(|a| a == "--list") {
        println!("acceptance: test");
        return ExitCode::SUCCESS;
    }
    let verdicts = vec![
        geodesic_count(1, "geodesic count on H1", "01_geodesic_count_hyperbolic.toml"),
        geodesic_count(2, "geodesic count on S1 in M_c", "02_geodesic_count_spherical.toml"),
        simple(
            3,
            "Morse inertia",
            "03_inertia.toml",
            &["inertia_triple", "zero_margin"],
        ),
        simple(
            4,
            "eigenstructure of A",
            "04_eigenstructure.toml",
            &["a_eigenvectors", "a_ordering", "a_shift_inertia"],
        ),
        criterion_5(),
        simple(
            6,
            "multiplier divergence",
            "06_multiplier_divergence.toml",
            &["divergence_exponent", "divergence_monotone"],
        ),
        simple(
            7,
            "exclusion probes",
            "07_exclusion_probes.toml",
            &["exclusion", "detection"],
        ),
        simple(
            8,
            "palmore count",
            "08_palmore_count.toml",
            &["class_total", "class_nongeodesic", "geodesic_match", "runtime"],
        ),
        criterion_9(),
        criterion_10(),
        criterion_11(),
        criterion_12(),
    ];
    let mut unexpected = 0;
    for v in &verdicts {
        println!(
            "{} criterion {:>2} ({}): {}",
            if v.passed { "PASS" } else { "FAIL" },
            v.id,
            v.title,
            v.detail
        );
        let known = KNOWN_UNATTAINABLE.contains(&v.id);
        if !v.passed && !(known && v.floor_holds) {
            unexpected += 1;
        }
        if known && v.passed {
            println!("note: criterion {} now passes; drop it from KNOWN_UNATTAINABLE", v.id);
        }
    }
    let passed = verdicts.iter().filter(|v| v.passed).count();
    println!(
        "acceptance: {passed}/{} criteria pass, {unexpected} unexpected failures",
        verdicts.len()
    );
    if unexpected == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
