//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any
//! criterion fails.

mod common;

use std::process::ExitCode;
use std::time::Instant;

use common::*;
use proptest::strategy::{Strategy, ValueTree};
use proptest::test_runner::{Config, TestRng, TestRunner};
use squeezecool::cooling::{
    exact_limit, maximize_rate, min_phonon_floor, minimize_phonons, rate_equation_limit, OptimizationResult, SearchSpec,
};
use squeezecool::fullmodel::{adiabatic_report, classical_steady_state, FullModelParams, RESIDUAL_TOL};
use squeezecool::gaussian::{stability, steady_state, PHYSICALITY_TOL};
use squeezecool::model::{make_bath, optimal_detuning, ReducedParams, Scheme};
use squeezecool::response::{rates, solve_suppression, spectrum};

struct Outcome {
    pass: bool,
    detail: String,
}

fn within(value: f64, target: f64, rel: f64) -> bool {
    (value - target).abs() <= rel * target.abs()
}

fn sweep_grid() -> Vec<f64> {
    (0..=12).map(|k| 10f64.powf(-1.0 + k as f64 / 4.0)).collect()
}

fn runner(seed: u8) -> TestRunner {
    TestRunner::new_with_rng(
        Config::default(),
        TestRng::from_seed(proptest::test_runner::RngAlgorithm::ChaCha, &[seed; 32]),
    )
}

fn draw<S: Strategy>(strategy: &S, runner: &mut TestRunner) -> S::Value {
    strategy.new_tree(runner).unwrap().current()
}

fn criterion_1() -> Outcome {
    let base = ReducedParams::benchmark(100.0);
    let spec = SearchSpec::default();
    let sb = maximize_rate(&base, Scheme::SB, &spec).unwrap().gamma_opt_normalized;
    let es = maximize_rate(&base, Scheme::ES, &spec).unwrap().gamma_opt_normalized;
    Outcome {
        pass: (sb - 0.005).abs() <= 0.001 && rel_diff(es, sb) <= 0.02,
        detail: format!("SB {sb:.6}, ES {es:.6} (target 0.005 +- 0.001, ES = SB within 2%)"),
    }
}

fn criterion_2() -> Outcome {
    let r = maximize_rate(&ReducedParams::benchmark(100.0), Scheme::IS, &SearchSpec::default()).unwrap();
    Outcome {
        pass: (r.gamma_opt_normalized - 0.5).abs() <= 0.05,
        detail: format!(
            "IS {:.5} at |eps| {:.4} (target 0.5 +- 0.05)",
            r.gamma_opt_normalized, r.eps_opt
        ),
    }
}

fn criterion_3() -> Outcome {
    let spec = SearchSpec::default();
    let at_100 = maximize_rate(&ReducedParams::benchmark(100.0), Scheme::ESIS, &spec).unwrap();
    let curve: Vec<f64> = sweep_grid()
        .iter()
        .map(|&q| {
            maximize_rate(&ReducedParams::benchmark(q), Scheme::ESIS, &spec)
                .unwrap()
                .gamma_opt_normalized
        })
        .collect();
    let monotone = curve.windows(2).all(|w| w[1] > w[0]);
    Outcome {
        pass: within(at_100.gamma_opt_normalized, 481.0, 0.10) && monotone,
        detail: format!(
            "ESIS {:.2} at |eps| {:.4} (target 481 +- 10%); monotone over {} grid points: {monotone}",
            at_100.gamma_opt_normalized,
            at_100.eps_opt,
            curve.len()
        ),
    }
}

fn phonon_line(label: &str, r: &OptimizationResult) -> String {
    format!(
        "{label}: n_f {:.5} (rate equation at same point {:.4}), G {:.4}, |eps| {:.4}",
        r.n_f_min.unwrap(),
        r.n_f_rate_equation.unwrap_or(f64::NAN),
        r.g_opt,
        r.eps_opt
    )
}

fn criterion_4() -> (Outcome, f64) {
    let base = ReducedParams::benchmark(100.0);
    let spec = SearchSpec::default();
    let is = minimize_phonons(&base, Scheme::IS, &spec).unwrap();
    let esis = minimize_phonons(&base, Scheme::ESIS, &spec).unwrap();
    let pinned = minimize_phonons(
        &base,
        Scheme::ESIS,
        &SearchSpec {
            eps_fixed: Some(141.4),
            ..spec
        },
    )
    .unwrap();
    let n = |r: &OptimizationResult| r.n_f_min.unwrap();
    let pass = within(n(&is), 0.121, 0.10)
        && within(is.g_opt, 5.32, 0.15)
        && within(n(&esis), 0.1211, 0.10)
        && within(esis.g_opt, 0.23, 0.20)
        && within(esis.eps_opt, 141.1, 0.01)
        && within(n(&pinned), 0.4456, 0.10)
        && within(pinned.g_opt, 0.08, 0.25);
    let detail = [
        phonon_line("IS", &is),
        phonon_line("ESIS", &esis),
        phonon_line("ESIS |eps|=141.4", &pinned),
    ]
    .join("; ");
    (Outcome { pass, detail }, n(&is))
}

/// Log-interpolated crossing of `n_f = 1` going up in `q`.
fn crossing(qs: &[f64], ns: &[f64]) -> Option<f64> {
    qs.windows(2).zip(ns.windows(2)).find_map(|(q, n)| {
        (n[0] < 1.0 && n[1] >= 1.0).then(|| {
            let t = (1.0f64.ln() - n[0].ln()) / (n[1].ln() - n[0].ln());
            (q[0].ln() + t * (q[1].ln() - q[0].ln())).exp()
        })
    })
}

fn criterion_5() -> Outcome {
    let spec = SearchSpec::default();
    let qs = sweep_grid();
    let curve = |s: Scheme| -> Vec<f64> {
        qs.iter()
            .map(|&q| {
                minimize_phonons(&ReducedParams::benchmark(q), s, &spec)
                    .unwrap()
                    .n_f_min
                    .unwrap()
            })
            .collect()
    };
    let [sb, es, is, esis] = Scheme::ALL.map(curve);
    let sb_ok = qs.iter().zip(&sb).filter(|(q, _)| **q > 1.0).all(|(_, n)| *n > 1.0);
    let es_cross = crossing(&qs, &es);
    let spread = |ns: &[f64]| {
        let window: Vec<f64> = qs
            .iter()
            .zip(ns)
            .filter(|(q, _)| (1.0 - 1e-12..=100.0 + 1e-9).contains(*q))
            .map(|(_, n)| *n)
            .collect();
        let max = window.iter().cloned().fold(f64::MIN, f64::max);
        let min = window.iter().cloned().fold(f64::MAX, f64::min);
        max / min - 1.0
    };
    let (is_spread, esis_spread) = (spread(&is), spread(&esis));
    let pass = sb_ok && es_cross.is_some_and(|q| within(q, 20.0, 0.25)) && is_spread < 0.2 && esis_spread < 0.2;
    Outcome {
        pass,
        detail: format!(
            "SB n_f > 1 for q > 1: {sb_ok} (n_f(q=1.78) {:.3}); ES crossing q = {} (target 20 +- 25%); \
             IS spread {:.1}%, ESIS spread {:.1}% over q in [1, 100] (target < 20%)",
            sb[5],
            es_cross.map_or("none".to_string(), |q| format!("{q:.2}")),
            100.0 * is_spread,
            100.0 * esis_spread
        ),
    }
}

fn criterion_6(is_n_f: f64) -> Outcome {
    let floor = min_phonon_floor(1e5, 1e3).unwrap();
    let pass = (floor - 0.12).abs() <= 1e-15 && floor <= is_n_f && is_n_f <= 1.05 * floor + 0.01;
    Outcome {
        pass,
        detail: format!("floor {floor:.15}, IS optimum {is_n_f:.5} (window [floor, 1.05 floor + 0.01])"),
    }
}

fn criterion_7() -> Outcome {
    let strategy = reduced_params();
    let mut failures = Vec::new();

    // (a) reductions
    let mut rng = runner(1);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let p = draw(&strategy, &mut rng);
        let w = draw(&(-20.0f64..20.0), &mut rng);
        let vacuum = make_bath(0.0, 0.0).unwrap();
        let sb = spectrum(w, &p.with_eps(0.0, 0.0).with_bath(vacuum), Scheme::ESIS)
            .unwrap()
            .s_ff;
        let es = spectrum(w, &p.with_eps(0.0, 0.0), Scheme::ESIS).unwrap().s_ff;
        let is = spectrum(w, &p.with_bath(vacuum), Scheme::ESIS).unwrap().s_ff;
        worst = worst
            .max(rel_diff(sb, sb_spectrum(w, &p)))
            .max(rel_diff(es, es_spectrum(w, &p)))
            .max(rel_diff(is, is_spectrum(w, &p)));
    }
    if worst > 1e-9 {
        failures.push(format!("reduction {worst:e}"));
    }
    let a = format!("(a) worst reduction {worst:.1e}");

    // (b) suppression zeros
    let mut rng = runner(2);
    let (mut feasible, mut worst_ratio) = (0, 0.0f64);
    while feasible < 1000 {
        let p = draw(&strategy, &mut rng);
        let sol = solve_suppression(&p).unwrap();
        if !sol.feasible || sol.r_s > 15.0 {
            continue;
        }
        feasible += 1;
        let r = rates(&p.with_bath(sol.bath().unwrap()), Scheme::ESIS, false).unwrap();
        if r.gamma_minus > 0.0 {
            worst_ratio = worst_ratio.max(r.gamma_plus / r.gamma_minus);
        }
    }
    if worst_ratio > 1e-10 {
        failures.push(format!("suppression {worst_ratio:e}"));
    }
    let b = format!("(b) worst Gamma+/Gamma- {worst_ratio:.1e}");

    // (c) Lyapunov residual and physicality
    let mut rng = runner(3);
    let (mut accepted, mut worst_res, mut worst_eig) = (0, 0.0f64, f64::MAX);
    for _ in 0..1000 {
        if let Ok(ss) = steady_state(&draw(&strategy, &mut rng)) {
            accepted += 1;
            worst_res = worst_res.max(ss.residual);
            worst_eig = worst_eig.min(ss.min_uncertainty_eig);
        }
    }
    if worst_res > 1e-9 || worst_eig < -PHYSICALITY_TOL {
        failures.push("steady state".into());
    }
    let c = format!("(c) {accepted} states, worst residual {worst_res:.1e}, min eig {worst_eig:.2e}");

    // (d) weak coupling
    let mut rng = runner(4);
    let (mut compared, mut worst_weak) = (0, 0.0f64);
    while compared < 100 {
        let kappa = 10f64.powf(draw(&(-1.5f64..1.0), &mut rng));
        let mut p = ReducedParams {
            delta: draw(&(0.5f64..2.0), &mut rng) * optimal_detuning(kappa, 1.0),
            kappa,
            omega_m: 1.0,
            gamma: 10f64.powf(draw(&(-5.0f64..-3.0), &mut rng)),
            g_coupling: 1e-3 * kappa.min(1.0),
            eps_mag: 0.0,
            eps_phase: draw(&(0.0f64..std::f64::consts::TAU), &mut rng),
            bath: make_bath(
                draw(&(0.0f64..1.0), &mut rng),
                draw(&(0.0f64..std::f64::consts::PI), &mut rng),
            )
            .unwrap(),
            n_th: draw(&(10.0f64..1e3), &mut rng),
        };
        p.eps_mag = draw(&(0.0f64..0.3), &mut rng) * p.opo_threshold();
        let Ok(rate) = rate_equation_limit(&p, Scheme::ESIS) else {
            continue;
        };
        if !stability(&p).0 {
            continue;
        }
        compared += 1;
        worst_weak = worst_weak.max(rel_diff(exact_limit(&p, Scheme::ESIS).unwrap().n_f, rate.n_f));
    }
    if worst_weak > 0.01 {
        failures.push(format!("weak coupling {worst_weak}"));
    }
    let d = format!("(d) worst weak-coupling mismatch {:.3}%", 100.0 * worst_weak);

    // (e) m_s identity, G^2 scaling, determinism
    let mut rng = runner(5);
    let (mut worst_ms, mut worst_scale) = (0.0f64, 0.0f64);
    for _ in 0..1000 {
        let p = draw(&strategy, &mut rng);
        let b = p.bath;
        worst_ms = worst_ms.max(rel_diff(b.m_s * b.m_s, b.n_s * (b.n_s + 1.0)));
        let w = draw(&(-20.0f64..20.0), &mut rng);
        let one = spectrum(w, &p, Scheme::ESIS).unwrap().s_ff;
        let two = spectrum(w, &p.with_coupling(2.0 * p.g_coupling), Scheme::ESIS)
            .unwrap()
            .s_ff;
        worst_scale = worst_scale.max(rel_diff(two, 4.0 * one));
    }
    let spec = SearchSpec {
        seed: 11,
        ..Default::default()
    };
    let base = ReducedParams::benchmark(10.0);
    let deterministic =
        minimize_phonons(&base, Scheme::ESIS, &spec).unwrap() == minimize_phonons(&base, Scheme::ESIS, &spec).unwrap();
    if worst_ms > 1e-12 || worst_scale > 1e-14 || !deterministic {
        failures.push("identities".into());
    }
    let e = format!("(e) m_s identity {worst_ms:.1e}, G^2 scaling {worst_scale:.1e}, deterministic {deterministic}");

    Outcome {
        pass: failures.is_empty(),
        detail: [a, b, c, d, e].join("; "),
    }
}

fn criterion_8() -> Outcome {
    let full = FullModelParams::reference();
    let css = classical_steady_state(&full, None).unwrap();
    let rep = adiabatic_report(&full, &css).unwrap();
    let r1 = (full.g_p.powi(2) * css.alpha_p.norm_sqr() * full.kappa_p / full.omega_m).sqrt();
    let r2 = (full.kappa_p / full.kappa_s).sqrt() * 2.0 * full.eps0.norm() * css.alpha_s.norm();
    let margin = css.delta_p_eff / r1.max(r2);
    let margin_ok = rel_diff(rep.margin, margin) <= 1e-12 && rep.valid == (margin >= 10.0);

    let (pf, pcss) = pole_fit_point();
    let (fit_detuning, fit_kappa) = fitted_shifts(&pf, &pcss);
    let prep = adiabatic_report(&pf, &pcss).unwrap();
    let det_err = rel_diff(fit_detuning, prep.detuning_shift_s);
    let kap_err = rel_diff(fit_kappa, prep.dissipation_shift_s);
    Outcome {
        pass: css.residual <= RESIDUAL_TOL && det_err < 0.05 && kap_err < 0.05 && margin_ok,
        detail: format!(
            "reference residual {:.1e}; pole fit detuning shift {fit_detuning:.5} vs {:.5} ({:.2}%), \
             dissipation shift {fit_kappa:.5} vs {:.5} ({:.2}%); margin {:.3} valid {}",
            css.residual,
            prep.detuning_shift_s,
            100.0 * det_err,
            prep.dissipation_shift_s,
            100.0 * kap_err,
            rep.margin,
            rep.valid
        ),
    }
}

fn main() -> ExitCode {
    let mut all = true;
    let mut report = |n: usize, start: Instant, o: Outcome| {
        all &= o.pass;
        println!(
            "criterion {n}: {} [{:.1}s] {}",
            if o.pass { "PASS" } else { "FAIL" },
            start.elapsed().as_secs_f64(),
            o.detail
        );
    };
    let t = Instant::now();
    report(1, t, criterion_1());
    let t = Instant::now();
    report(2, t, criterion_2());
    let t = Instant::now();
    report(3, t, criterion_3());
    let t = Instant::now();
    let (c4, is_n_f) = criterion_4();
    report(4, t, c4);
    let t = Instant::now();
    report(5, t, criterion_5());
    let t = Instant::now();
    report(6, t, criterion_6(is_n_f));
    let t = Instant::now();
    report(7, t, criterion_7());
    let t = Instant::now();
    report(8, t, criterion_8());
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
