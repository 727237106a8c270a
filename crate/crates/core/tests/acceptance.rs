//! Acceptance criteria, one PASS/FAIL line each. Runs as a plain binary so
//! the lines are printed whether or not a criterion fails.

use std::f64::consts::PI;
use std::time::{Duration, Instant};

use bernstein_core::asymptotics::{
    cdf_bias_boundary, cdf_mse, cdf_variance_boundary, density_bias_boundary, density_bias_terms, density_m_opt,
    density_m_opt_shoulder, density_two_term, BoundaryProfile, MOpt,
};
use bernstein_core::estimators::{bernstein_cdf, Dataset};
use bernstein_core::lattice_sums::{coupling_diagnostic, square_sum_diagnostic, sum_pmf_power};
use bernstein_core::moments::{central_moment_analytic, central_moment_bruteforce, fourth_moment_scaling, MomentQuery};
use bernstein_core::montecarlo::{mc_bias_variance, rate_fit, sample, DirichletModel, Experiment, Target};
use bernstein_core::special::{bessel_i, BesselOrder};
use bernstein_core::{EstimatorKind, SimplexPoint};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Criterion = (&'static str, Duration, fn() -> Outcome);

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn pt(v: &[f64]) -> SimplexPoint {
    SimplexPoint::new(v.to_vec()).unwrap()
}

/// A uniformly random point of `S_d`.
fn random_point(rng: &mut ChaCha8Rng, d: usize) -> SimplexPoint {
    let w: Vec<f64> = (0..=d).map(|_| -rng.random::<f64>().ln()).collect();
    let s: f64 = w.iter().sum();
    SimplexPoint::with_tolerance(w[..d].iter().map(|v| v / s).collect(), 1e-12).unwrap()
}

/// All index tuples of the given length over `0..d`.
fn tuples(d: usize, len: usize) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for _ in 0..len {
        out = out
            .into_iter()
            .flat_map(|t| {
                (0..d).map(move |i| {
                    let mut t = t.clone();
                    t.push(i);
                    t
                })
            })
            .collect();
    }
    out
}

fn c1_moment_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst = 0.0f64;
    let mut count = 0;
    for d in 1..=3 {
        for m in 1..=6u64 {
            for _ in 0..10 {
                let x = random_point(&mut rng, d);
                for len in [2, 3] {
                    for idx in tuples(d, len) {
                        let q = MomentQuery::new(m, x.clone(), idx).unwrap();
                        let gap = (central_moment_analytic(&q).unwrap() - central_moment_bruteforce(&q).unwrap()).abs();
                        worst = worst.max(gap);
                        count += 1;
                    }
                }
            }
        }
    }
    outcome(
        worst <= 1e-12,
        format!("{count} queries, max |analytic - brute| = {worst:.2e}"),
    )
}

fn c2_fourth_moment() -> Outcome {
    let grid = [4u64, 8, 16, 32];
    let cases: Vec<(Vec<f64>, Vec<usize>)> = vec![
        (vec![0.5], vec![0; 4]),
        (vec![0.2], vec![0; 4]),
        (vec![0.2, 0.3], vec![0, 0, 1, 1]),
        (vec![0.2, 0.3], vec![0, 1, 0, 1]),
        (vec![0.2, 0.3], vec![1, 1, 1, 1]),
        (vec![0.2, 0.3], vec![0, 0, 0, 1]),
        (vec![1.0 / 3.0, 1.0 / 3.0], vec![0, 0, 0, 0]),
    ];
    let mut pass = true;
    let mut worst_step = 0.0f64;
    let mut worst_value = 0.0f64;
    for (x, idx) in cases {
        let r = fourth_moment_scaling(&grid, &pt(&x), &idx).unwrap();
        let earlier = r[..3].iter().cloned().fold(0.0, f64::max);
        let step = r[3] / r[2];
        worst_step = worst_step.max(step);
        worst_value = worst_value.max(r.iter().cloned().fold(0.0, f64::max));
        pass &= r.iter().all(|&v| v <= 1.0) && r[3] <= 1.05 * earlier && step <= 1.05;
    }
    outcome(
        pass,
        format!("max |mu4|/m^2 = {worst_value:.4}, max ratio r(32)/r(16) = {worst_step:.4}"),
    )
}

/// `I_ν(2)` from the series, with the tail after `K` terms bounded by a
/// geometric series of ratio `1/((K+1)(K+1+ν))`.
fn bessel_oracle(nu: u32, z: f64) -> (f64, f64) {
    let half = z / 2.0;
    let mut term = half.powi(nu as i32) / (1..=nu).map(f64::from).product::<f64>();
    let mut sum = term;
    let mut k = 0u32;
    loop {
        k += 1;
        term *= half * half / (k as f64 * (k + nu) as f64);
        sum += term;
        let ratio = half * half / ((k + 1) as f64 * (k + 1 + nu) as f64);
        let tail = term * ratio / (1.0 - ratio);
        if tail < 1e-17 * sum {
            return (sum, tail);
        }
    }
}

fn c3_bessel() -> Outcome {
    let (o0, t0) = bessel_oracle(0, 2.0);
    let (o1, t1) = bessel_oracle(1, 2.0);
    let v0 = bessel_i(BesselOrder::Zero, 2.0, 1e-15).unwrap().value;
    let v1 = bessel_i(BesselOrder::One, 2.0, 1e-15).unwrap().value;
    let r0 = (v0 - o0).abs() / o0;
    let r1 = (v1 - o1).abs() / o1;
    let known = (v0 - 2.279_585_302_336_067).abs() < 1e-12 && (v1 - 1.590_636_854_637_329).abs() < 1e-12;
    outcome(
        r0 <= 1e-12 && r1 <= 1e-12 && known && t0 < 1e-15 && t1 < 1e-15,
        format!("I0(2) = {v0:.15}, I1(2) = {v1:.15}, rel err {r0:.1e} / {r1:.1e}"),
    )
}

fn c4_square_sum_interior() -> Outcome {
    let a = 1000f64.sqrt() * sum_pmf_power(1000, &pt(&[0.5]), 2).unwrap();
    let third = 1.0 / 3.0;
    let b = 300.0 * sum_pmf_power(300, &pt(&[third, third]), 2).unwrap();
    let ta = 1.0 / PI.sqrt();
    let tb = 27f64.sqrt() / (4.0 * PI);
    let (ga, gb) = ((a - ta).abs() / ta, (b - tb).abs() / tb);
    outcome(
        ga <= 0.02 && gb <= 0.05,
        format!(
            "d=1: {a:.6} vs {ta:.6} ({:.3}%), d=2: {b:.6} vs {tb:.6} ({:.3}%)",
            100.0 * ga,
            100.0 * gb
        ),
    )
}

fn c5_square_sum_boundary() -> Outcome {
    let profile = BoundaryProfile::near_vertex(&[1.0]).unwrap();
    let lo = square_sum_diagnostic(&profile, 100).unwrap();
    let hi = square_sum_diagnostic(&profile, 1000).unwrap();
    let shrink = lo.rel_gap / hi.rel_gap;
    outcome(
        hi.rel_gap <= 0.01 && shrink >= 4.0,
        format!(
            "m=1000: {:.6} vs {:.6} (gap {:.3}%), gap shrinks {shrink:.1}x from m=100",
            hi.scaled_exact,
            hi.prediction,
            100.0 * hi.rel_gap
        ),
    )
}

fn c6_coupling() -> Outcome {
    let inner = BoundaryProfile::new(1, vec![], vec![(0, 0.25)]).unwrap();
    let edge = BoundaryProfile::near_vertex(&[1.0]).unwrap();
    let a = coupling_diagnostic(&inner, 0, 2000).unwrap();
    let b = coupling_diagnostic(&edge, 0, 2000).unwrap();
    let known = (a.prediction + 0.244301).abs() < 1e-6 && (b.prediction + 0.523778).abs() < 1e-6;
    outcome(
        a.rel_gap <= 0.02 && b.rel_gap <= 0.01 && known,
        format!(
            "interior {:.6} vs {:.6} ({:.3}%), boundary {:.6} vs {:.6} ({:.3}%)",
            a.scaled_exact,
            a.prediction,
            100.0 * a.rel_gap,
            b.scaled_exact,
            b.prediction,
            100.0 * b.rel_gap
        ),
    )
}

fn c7_density_bias() -> Outcome {
    let model = DirichletModel::new(vec![2.0, 2.0]).unwrap();
    let x = pt(&[0.3]);
    let m = 40u64;
    let r = mc_bias_variance(
        &model,
        &Target::Point(x.clone()),
        m,
        1_000_000,
        200,
        7,
        EstimatorKind::Density,
    )
    .unwrap();
    let (d1, d2) = density_bias_terms(&model, &x).unwrap();
    let mf = m as f64;
    let predicted = d1 + d2 / mf;
    let gap = (r.bias * mf - predicted).abs();
    let se = r.bias_se * mf;
    outcome(
        gap <= 3.0 * se && (d1 + 0.78).abs() < 1e-12,
        format!(
            "m*bias = {:.5} vs {predicted:.5}, |gap| = {:.2} SE",
            r.bias * mf,
            gap / se
        ),
    )
}

fn c8_density_variance() -> Outcome {
    let uniform = DirichletModel::uniform(1).unwrap();
    let (m, n) = (2000u64, 10_000usize);
    let a = mc_bias_variance(
        &uniform,
        &Target::Point(pt(&[0.5])),
        m,
        n,
        1000,
        8,
        EstimatorKind::Density,
    )
    .unwrap();
    let scale = n as f64 / (m as f64).sqrt();
    let ta = 1.0 / PI.sqrt();
    let za = (a.var * scale - ta).abs() / (a.var_se * scale);

    let edge = DirichletModel::new(vec![1.0, 2.0]).unwrap();
    let profile = BoundaryProfile::near_vertex(&[1.0]).unwrap();
    let m = 1000u64;
    let b = mc_bias_variance(&edge, &Target::Profile(profile), m, n, 1000, 9, EstimatorKind::Density).unwrap();
    let scale = n as f64 / m as f64;
    let tb = 2.0 * 0.308_508_322_553_671;
    let zb = (b.var * scale - tb).abs() / (b.var_se * scale);
    outcome(
        za <= 3.0 && zb <= 3.0,
        format!(
            "interior n*m^-1/2*var = {:.4} vs {ta:.4} ({za:.2} SE), boundary n*m^-1*var = {:.4} vs {tb:.4} ({zb:.2} SE)",
            a.var * n as f64 / 2000f64.sqrt(),
            b.var * scale
        ),
    )
}

fn c9_cdf_variance() -> Outcome {
    let model = DirichletModel::new(vec![2.0, 2.0]).unwrap();
    let (m, n) = (100u64, 10_000usize);
    let x = pt(&[0.3]);
    let r = mc_bias_variance(&model, &Target::Point(x.clone()), m, n, 500, 10, EstimatorKind::Cdf).unwrap();
    let profile = BoundaryProfile::interior_point(&x).unwrap();
    let theory = cdf_variance_boundary(&model, &profile, m, n as u64).unwrap().value * n as f64;
    let hand = 0.16934 - 0.32570 / (m as f64).sqrt();
    let z = (r.var * n as f64 - theory).abs() / (r.var_se * n as f64);
    outcome(
        z <= 3.0 && (theory - hand).abs() < 1e-4,
        format!("n*var = {:.5} vs {theory:.5} ({z:.2} SE)", r.var * n as f64),
    )
}

fn rate_experiment(model: &str, profile: &str, seed: u64) -> (f64, Vec<(u64, u64)>) {
    let cfg = format!(
        r#"{{"model": {model}, "profile": {profile}, "m_opt": true,
            "n_grid": [1000, 10000, 100000, 1000000], "replicates": 200, "seed": {seed}, "kind": "density"}}"#
    );
    let e = Experiment::from_json(&cfg).unwrap();
    let rows = e.run().unwrap();
    let fit = rate_fit(&rows.iter().map(|r| (r.n as f64, r.mse)).collect::<Vec<_>>()).unwrap();
    (fit.slope, rows.iter().map(|r| (r.n, r.m)).collect())
}

fn c10_rates() -> Outcome {
    let (s0, cells0) = rate_experiment(
        r#"{"family": "dirichlet", "alpha": [2, 2]}"#,
        r#"{"d": 1, "interior": {"1": 0.3}}"#,
        11,
    );
    let (s1, cells1) = rate_experiment(
        r#"{"family": "dirichlet", "alpha": [1, 2]}"#,
        r#"{"d": 1, "lambda": {"1": 1.0}}"#,
        12,
    );
    let ms = |c: &[(u64, u64)]| c.iter().map(|x| x.1.to_string()).collect::<Vec<_>>().join(",");
    outcome(
        (s0 + 0.8).abs() <= 0.1 && (s1 + 2.0 / 3.0).abs() <= 0.12,
        format!(
            "J=empty slope {s0:.3} (m={}), J={{1}} slope {s1:.3} (m={})",
            ms(&cells0),
            ms(&cells1)
        ),
    )
}

/// Golden-section search for the minimizer of `f` over `ln m ∈ [lo, hi]`.
fn golden_min<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64) -> f64 {
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let mut a = hi - r * (hi - lo);
    let mut b = lo + r * (hi - lo);
    let (mut fa, mut fb) = (f(a.exp()), f(b.exp()));
    while hi - lo > 1e-12 {
        if fa < fb {
            hi = b;
            b = a;
            fb = fa;
            a = hi - r * (hi - lo);
            fa = f(a.exp());
        } else {
            lo = a;
            a = b;
            fa = fb;
            b = lo + r * (hi - lo);
            fb = f(b.exp());
        }
    }
    (0.5 * (lo + hi)).exp()
}

fn c11_m_opt() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let mut worst = 0.0f64;
    let mut done = 0;
    while done < 20 {
        let d = rng.random_range(1..=2usize);
        let mut alpha: Vec<f64> = (0..=d).map(|_| rng.random_range(2.0..4.0)).collect();
        let (mut boundary, mut inner) = (Vec::new(), Vec::new());
        for (i, a) in alpha.iter_mut().take(d).enumerate() {
            if rng.random_bool(0.5) {
                *a = 1.0;
                boundary.push((i, rng.random_range(0.1..3.0)));
            } else {
                inner.push((i, rng.random_range(0.05..0.45)));
            }
        }
        let model = DirichletModel::new(alpha).unwrap();
        let profile = BoundaryProfile::new(d, boundary, inner).unwrap();
        let n = 10f64.powf(rng.random_range(3.0..7.0)).round();
        let two = density_two_term(&model, &profile).unwrap();
        let Some(closed) = density_m_opt(&model, &profile, n as u64).unwrap().m_opt.value() else {
            continue;
        };
        let numeric = golden_min(|m| two.eval(m, n), (1e-6f64).ln(), (1e12f64).ln());
        worst = worst.max((numeric - closed).abs() / closed);
        done += 1;
    }
    outcome(
        worst <= 1e-3,
        format!("20 configurations, max relative gap {worst:.2e}"),
    )
}

fn c12_degenerate() -> Outcome {
    let mut pass = true;
    let beta = DirichletModel::new(vec![2.0, 3.0]).unwrap();
    let tri = DirichletModel::new(vec![2.0, 2.0, 2.0]).unwrap();
    let cases = [
        (&beta, BoundaryProfile::near_vertex(&[0.0]).unwrap()),
        (&tri, BoundaryProfile::new(2, vec![(0, 0.0)], vec![(1, 0.4)]).unwrap()),
        (&tri, BoundaryProfile::near_vertex(&[0.0, 1.5]).unwrap()),
    ];
    for (model, profile) in &cases {
        let b = cdf_bias_boundary(*model, profile, 50).unwrap();
        let v = cdf_variance_boundary(*model, profile, 50, 100).unwrap();
        let r = cdf_mse(*model, profile, 50, 100).unwrap();
        pass &= b.value == 0.0 && v.value == 0.0 && r.mse == 0.0 && r.bias == 0.0 && r.var_leading == 0.0;
    }
    // the estimator itself is 0 on such faces
    let data: Dataset = sample(&tri, 500, 3).unwrap();
    pass &= bernstein_cdf(&data, 30, &pt(&[0.0, 0.6])).unwrap() == 0.0;

    for d in 1..=2 {
        let uniform = DirichletModel::uniform(d).unwrap();
        let x = random_point(&mut ChaCha8Rng::seed_from_u64(d as u64), d);
        pass &= density_bias_terms(&uniform, &x).unwrap() == (0.0, 0.0);
        let lambda = vec![1.0; d];
        let vertex = BoundaryProfile::near_vertex(&lambda).unwrap();
        let b = density_bias_boundary(&uniform, &vertex, 20).unwrap();
        pass &= b.m1 == 0.0 && b.m2 == 0.0;
        let inner = BoundaryProfile::interior_point(&pt(&vec![0.2; d])).unwrap();
        pass &= density_m_opt(&uniform, &inner, 1000).unwrap().m_opt == MOpt::None("none (zero bias bracket)".into());
        pass &= density_m_opt(&uniform, &vertex, 1000).unwrap().m_opt.value().is_none();
        pass &= density_m_opt_shoulder(&uniform, &vertex, 1000)
            .unwrap()
            .m_opt
            .value()
            .is_none();
    }
    outcome(
        pass,
        "CDF terms exactly 0 on faces; uniform brackets 0 with no optimum".into(),
    )
}

fn main() {
    let criteria: [Criterion; 12] = [
        ("moment oracle equivalence", Duration::from_secs(10), c1_moment_oracle),
        ("fourth-moment scaling", Duration::from_secs(30), c2_fourth_moment),
        ("Bessel values", Duration::from_secs(1), c3_bessel),
        ("square sum, interior", Duration::from_secs(60), c4_square_sum_interior),
        ("square sum, boundary", Duration::from_secs(10), c5_square_sum_boundary),
        ("min-coupling sum", Duration::from_secs(10), c6_coupling),
        ("density bias", Duration::from_secs(300), c7_density_bias),
        ("density variance", Duration::from_secs(300), c8_density_variance),
        ("CDF variance", Duration::from_secs(120), c9_cdf_variance),
        ("rate exponents", Duration::from_secs(600), c10_rates),
        ("m_opt correctness", Duration::from_secs(5), c11_m_opt),
        ("degenerate cases", Duration::from_secs(1), c12_degenerate),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (i, (name, budget, run)) in criteria.iter().enumerate() {
        let label = format!("{} {name}", i + 1);
        if !filter.is_empty() && !filter.iter().any(|f| label.contains(f.as_str())) {
            continue;
        }
        let start = Instant::now();
        let result = run();
        let elapsed = start.elapsed();
        let in_time = elapsed <= *budget;
        let pass = result.pass && in_time;
        if !pass {
            failed += 1;
        }
        println!(
            "{} criterion {label}: {} [{:.2}s of {}s]",
            if pass { "PASS" } else { "FAIL" },
            result.detail,
            elapsed.as_secs_f64(),
            budget.as_secs()
        );
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
