//! Acceptance suite. Each criterion prints one `PASS`/`FAIL` line with its
//! wall time; run with `cargo test --test acceptance`.

use std::io::Write;
use std::sync::Arc;
use std::time::{Duration, Instant};

use num_bigint::BigInt;
use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use charclass::algebra::{rat, GradedRing, Rational, UnivariateSeries};
use charclass::classes::power_sums;
use charclass::cli::scenario::{cutoff_independence, two_path};
use charclass::numeric::bott_chern::{bott_chern_numeric, verify_downstairs};
use charclass::numeric::forms::{degree, MetricFn};
use charclass::numeric::{BottChernOptions, CMat, Chart, ChartGrid, DeformationDatum, HermitianMetric, C64};
use charclass::rr::{
    build_tower, err_transfer_o, err_transfer_ominus1, euler_characteristic, solve_r, tower_identity_check,
};
use charclass::spaces::{
    grassmannian_quotient_classes, normalized_hyperplane, projective_bundle, projective_space, universal_rank2_base,
};
use charclass::{CharSeries, FormalBundle};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

/// Binomial coefficient by the multiplicative formula, independent of the
/// library's own helper.
fn choose(n: u64, k: u64) -> BigInt {
    (0..k).fold(BigInt::from(1), |acc, i| acc * BigInt::from(n - i) / BigInt::from(i + 1))
}

fn hrr_table() -> Outcome {
    let mut bad = Vec::new();
    for n in 0..=4u32 {
        for k in -(n as i64)..=5 {
            let expected = if k < 0 { Rational::zero() } else { Rational::from_integer(choose(n as u64 + k as u64, n as u64)) };
            let got = euler_characteristic(n, k);
            if got != expected {
                bad.push(format!("chi(P{n}, O({k})) = {got}, want {expected}"));
            }
        }
    }
    outcome(bad.is_empty(), if bad.is_empty() { "40 entries exact".into() } else { bad.join("; ") })
}

fn push_forward_table() -> Outcome {
    let y = universal_rank2_base(8);
    let s = y.tautological().expect("universal base carries S").clone();
    let (_x, p) = projective_bundle(&y, &s).expect("P(S)");
    let a = normalized_hyperplane(&p, &s).expect("A");
    let ring = y.ring();
    let (c1, c2) = (ring.generator(0), ring.generator(1));
    let u = &c1.pow(2).scale(&rat(1, 4)) - &c2;
    let mut bad = Vec::new();
    for j in 0..=7u32 {
        let got = y.reduce(&p.pushforward(&a.pow(j)).expect("push")).expect("reduce");
        let expected = if j % 2 == 0 { ring.zero() } else { u.pow((j - 1) / 2) };
        if got != expected {
            bad.push(format!("p_*A^{j} = {got}, want {expected}"));
        }
    }
    outcome(bad.is_empty(), if bad.is_empty() { "p_*A^j exact for j = 0..7".into() } else { bad.join("; ") })
}

fn grassmannian_recurrence() -> Outcome {
    let y = universal_rank2_base(8);
    let s = y.tautological().expect("S");
    let q = grassmannian_quotient_classes(&y, 8).expect("recurrence");
    let inv = s.total_chern().inverse().expect("unit");
    let bad: Vec<_> = (0..=8u32).filter(|&k| q[k as usize] != inv.grade_part(k)).collect();
    outcome(bad.is_empty(), if bad.is_empty() { "c_k(Q) = [c(S)^-1]_k for k <= 8".into() } else { format!("mismatch at k = {bad:?}") })
}

fn newton_oracle() -> Outcome {
    let mut bad = Vec::new();
    for roots in 1..=4usize {
        let names: Vec<(String, u32)> = (1..=roots).map(|i| (format!("x{i}"), 1)).collect();
        let ring = GradedRing::with_generators(names, 6).expect("ring");
        let xs: Vec<_> = (0..roots).map(|i| ring.generator(i)).collect();
        let total = xs.iter().fold(ring.one(), |acc, x| &acc * &(&ring.one() + x));
        let bundle = FormalBundle::new(roots as i64, total).expect("bundle");
        let sums = power_sums(&bundle, 6).expect("power sums");
        for k in 1..=6u32 {
            let brute = xs.iter().fold(ring.zero(), |acc, x| &acc + &x.pow(k));
            if sums[k as usize - 1] != brute {
                bad.push(format!("{roots} roots, weight {k}"));
            }
        }
    }
    outcome(bad.is_empty(), if bad.is_empty() { "1..4 roots, weights 1..6".into() } else { bad.join("; ") })
}

fn random_series(rng: &mut ChaCha8Rng, order: usize, zero_constant: bool) -> UnivariateSeries {
    let coeffs = (0..=order)
        .map(|k| if k == 0 && zero_constant { Rational::zero() } else { rat(rng.gen_range(-5..=5), rng.gen_range(1..=4)) })
        .collect();
    UnivariateSeries::new(coeffs, order)
}

fn random_bundle(rng: &mut ChaCha8Rng, y: &charclass::SpaceModel, universal: bool) -> FormalBundle {
    let ring = y.ring();
    let g0 = ring.generator(0);
    if universal {
        let s = y.tautological().expect("S").clone();
        match rng.gen_range(0..4) {
            0 => s,
            1 => s.dual(),
            2 => s.sum(&FormalBundle::trivial(ring, 1)).expect("sum"),
            _ => FormalBundle::line(g0),
        }
    } else {
        let rank = rng.gen_range(1..=3);
        (0..rank)
            .map(|_| FormalBundle::line(g0.scale(&rat(rng.gen_range(-2..=2), 1))))
            .reduce(|a, b| a.sum(&b).expect("sum"))
            .expect("rank >= 1")
    }
}

fn tower_configs() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x70e7);
    let mut failures = Vec::new();
    let mut nontrivial = 0;
    let runs = 12;
    for i in 0..runs {
        let universal = i % 2 == 1;
        let y = if universal { universal_rank2_base(6) } else { projective_space(2) };
        let f = random_bundle(&mut rng, &y, universal);
        let fp = random_bundle(&mut rng, &y, universal);
        let tower = build_tower(&y, &f, &fp).expect("tower");
        let xr = tower.x.ring();
        let xi_x = xr.generator(xr.ngens() - 1);
        let xi_z = xr.generator(tower.z.ring().ngens() - 1);
        let e = match rng.gen_range(0..4) {
            0 => FormalBundle::trivial(xr, 1),
            1 => FormalBundle::line(xi_x.clone()),
            2 => FormalBundle::line(-&xi_x),
            _ => FormalBundle::line(xi_x).sum(&FormalBundle::line(xi_z)).expect("sum"),
        };
        let order = rng.gen_range(1..=5);
        let p = random_series(&mut rng, order, true);
        let report = tower_identity_check(&tower, &p, &e).expect("tower check");
        if !report.holds() {
            failures.push(format!("config {i}: residual {}", report.residual));
        }
        if !report.lhs.is_zero() {
            nontrivial += 1;
        }
    }
    let pass = failures.is_empty() && nontrivial > 0;
    outcome(pass, if failures.is_empty() { format!("{runs} configs, residual 0 ({nontrivial} with nonzero sides)") } else { failures.join("; ") })
}

fn r_round_trips() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut bad = Vec::new();
    for i in 0..20 {
        let order = rng.gen_range(1..=8);
        let r = random_series(&mut rng, order, true);
        let m = order / 2;
        let a = err_transfer_o(&r, m).expect("Err O");
        let b = err_transfer_ominus1(&r, m).expect("Err O(-1)");
        let got = solve_r(&a, &b, order).expect("solve").series();
        if got != r.with_order(order) {
            bad.push(format!("trial {i}: {got} != {r}"));
        }
        let even: Vec<Rational> =
            r.coeffs().iter().enumerate().map(|(k, c)| if k % 2 == 0 { c.clone() } else { Rational::zero() }).collect();
        let even = UnivariateSeries::new(even, order);
        if !err_transfer_ominus1(&even, m).expect("Err O(-1)").series_in_u.is_zero() {
            bad.push(format!("trial {i}: parity"));
        }
    }
    outcome(bad.is_empty(), if bad.is_empty() { "20 round trips and parity exact".into() } else { bad.join("; ") })
}

fn numeric_degree() -> Outcome {
    let mut parts = Vec::new();
    let mut pass = true;
    for k in 1..=3 {
        let v = degree(&HermitianMetric::fubini_study(k), 256).expect("degree");
        let err = (v - k as f64).abs();
        pass &= err < 1e-5;
        parts.push(format!("k={k}: {err:.2e}"));
    }
    outcome(pass, parts.join(", "))
}

fn two_path_agreement() -> Outcome {
    let weighted = HermitianMetric::line(2, Arc::new(|z: C64| 0.5 * z.norm_sqr() / (1.0 + z.norm_sqr())));
    let cases = [("FS^1", HermitianMetric::fubini_study(1)), ("FS^3", HermitianMetric::fubini_study(3)), ("weighted FS^2", weighted)];
    let mut parts = Vec::new();
    let mut pass = true;
    for (name, m) in &cases {
        let d = two_path(m, 256).expect("two path");
        pass &= d < 1e-6;
        parts.push(format!("{name}: {d:.2e}"));
    }
    outcome(pass, parts.join(", "))
}

fn fs_line() -> MetricFn {
    Arc::new(|y: C64| CMat::scalar(1.0 / (1.0 + y.norm_sqr())))
}

fn rescaled_fs_line() -> MetricFn {
    Arc::new(|y: C64| {
        let t = y.norm_sqr();
        CMat::scalar((-0.5 * t / (1.0 + t) + 0.3 * (y.re / (1.0 + t))).exp() / (1.0 + t))
    })
}

fn line_datum() -> DeformationDatum {
    DeformationDatum::metric_change(fs_line(), rescaled_fs_line())
}

fn downstairs_rule() -> Outcome {
    let d = line_datum();
    let opts = BottChernOptions::default();
    let phi = CharSeries::ChernCharacter;
    let coarse = verify_downstairs(&d, &phi, &ChartGrid::new(Chart::Z, 64), &opts).expect("N=64");
    let fine = verify_downstairs(&d, &phi, &ChartGrid::new(Chart::Z, 128), &opts).expect("N=128");
    let ratio = coarse.max_residual / fine.max_residual;
    let nontrivial = fine.lhs.max_abs_inside(3) > 1e-2;
    outcome(
        fine.max_residual < 1e-3 && ratio >= 1.8 && nontrivial,
        format!("residual {:.2e} at N=128, {:.2e} at N=64, ratio {ratio:.1}", fine.max_residual, coarse.max_residual),
    )
}

fn splitting_axiom() -> Outcome {
    let h3: MetricFn = Arc::new(|y: C64| CMat::scalar(2.0 + y.re / (1.0 + y.norm_sqr())));
    let d = DeformationDatum::split(rescaled_fs_line(), h3, 1, 1);
    let grid = ChartGrid::new(Chart::Z, 128);
    let mut parts = Vec::new();
    let mut pass = true;
    for pullback in [true, false] {
        let opts = BottChernOptions { split_pullback: pullback, ..Default::default() };
        let m = bott_chern_numeric(&d, &CharSeries::Todd, &grid, &opts).expect("split").grade0.max_abs();
        pass &= m < 1e-8;
        parts.push(format!("{} {m:.2e}", if pullback { "pull-back" } else { "direct" }));
    }
    outcome(pass, parts.join(", "))
}

/// `0 -> E1 -> E2 -> E3 -> 0` with `E2` of rank 2 and a non-split metric.
fn rank2_datum() -> DeformationDatum {
    let g2: MetricFn = Arc::new(|y: C64| {
        let b = C64::new(0.3, 0.1) * y;
        CMat::from_rows(&[&[C64::new(1.0 + y.norm_sqr(), 0.0), b], &[b.conj(), C64::new(2.0, 0.0)]])
    });
    let e1: MetricFn = Arc::new(|y: C64| CMat::scalar(1.0 + 0.2 * y.norm_sqr()));
    let e3: MetricFn = Arc::new(|y: C64| CMat::scalar(0.5 / (1.0 + y.norm_sqr())));
    let iota = CMat::from_real_rows(&[&[1.0], &[0.0]]);
    let pi = CMat::from_real_rows(&[&[0.0, 1.0]]);
    DeformationDatum::new(e1, g2, Some(e3), iota, pi).expect("exact sequence")
}

fn cutoff_check() -> Outcome {
    let cases = [("line, ch", line_datum(), CharSeries::ChernCharacter), ("rank 2, td", rank2_datum(), CharSeries::Todd)];
    let mut parts = Vec::new();
    let mut pass = true;
    for (name, d, phi) in &cases {
        let (ddc_diff, raw) = cutoff_independence(d, phi, 128).expect("cutoffs");
        pass &= ddc_diff < 1e-3;
        parts.push(format!("{name}: dd^c difference {ddc_diff:.2e} (raw {raw:.2e})"));
    }
    outcome(pass, parts.join(", "))
}

#[test]
fn acceptance() {
    type Criterion = (u32, &'static str, fn() -> Outcome, Duration);
    let s = Duration::from_secs;
    let criteria: [Criterion; 11] = [
        (1, "HRR table", hrr_table, s(5)),
        (2, "push-forward table in P(S)", push_forward_table, s(5)),
        (3, "Grassmannian recurrence", grassmannian_recurrence, s(1)),
        (4, "Newton identities", newton_oracle, s(5)),
        (5, "tower identity", tower_configs, s(60)),
        (6, "R-solver round trip", r_round_trips, s(30)),
        (7, "numeric degree", numeric_degree, s(30)),
        (8, "two-path c1", two_path_agreement, s(30)),
        (9, "downstairs rule", downstairs_rule, s(120)),
        (10, "splitting axiom", splitting_axiom, s(30)),
        (11, "cutoff independence", cutoff_check, s(120)),
    ];
    let mut failed = Vec::new();
    for (id, name, run, limit) in criteria {
        let start = Instant::now();
        let out = run();
        let elapsed = start.elapsed();
        let pass = out.pass && elapsed < limit;
        // written to the raw handle so the line shows even when output is captured
        let _ = writeln!(
            std::io::stderr(),
            "criterion {id:>2} {}: {name}: {} [{:.2}s / {}s]",
            if pass { "PASS" } else { "FAIL" },
            out.detail,
            elapsed.as_secs_f64(),
            limit.as_secs()
        );
        if !pass {
            failed.push(id);
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
