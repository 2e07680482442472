//! Acceptance suite. Each test prints one `[PASS]`/`[FAIL]` line with the
//! measured quantities, then asserts. Run with `--nocapture` to see them.

use std::time::Instant;

use sparseweak::defaults;
use sparseweak::experiments::{
    case2_sweep, characteristic_slope, duality_sweep, sharpness_sweep, TestGenerator,
};
use sparseweak::norms::{holder_indicator_bound, structured_tests, weak_opnorm_lower};
use sparseweak::operators::{decompose_levels, sparse_apply};
use sparseweak::random;
use sparseweak::testing::{
    bound_cor41_cor42, bound_prop13, bound_thm11, bound_thm43, bound_thm45, testing_constant, two_sided_report,
    Characteristics, RATIO_LOWER_TESTING, RATIO_TESTING_PROP13,
};
use sparseweak::weights::{
    a_infty_char, a_pq_alpha_char, a_pq_char, calibrate_reverse_holder, reverse_holder_check,
};
use sparseweak::{DyadicCube, ExponentParams, GridFunction, SparseFamily, Weight};

fn report(id: u32, name: &str, pass: bool, start: Instant, detail: String) {
    println!(
        "[{}] criterion {id:>2} {name}: {detail} ({:.2}s)",
        if pass { "PASS" } else { "FAIL" },
        start.elapsed().as_secs_f64()
    );
    assert!(pass, "criterion {id} ({name}) failed: {detail}");
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

#[test]
fn criterion_01_trivial_weights() {
    let t = Instant::now();
    let one = Weight::constant(1, 1.0).unwrap();
    let unit = SparseFamily::verify([DyadicCube::unit(1)], 0.5).unwrap();
    let depth = 8;
    let mut worst: f64 = 0.0;
    let mut seen = 0;
    let mut note = |v: f64| {
        worst = worst.max(rel(v, 1.0));
        seen += 1;
    };
    for (q, alpha, nu) in [(2.0, 0.0, 1.0), (4.0, 0.25, 1.0), (8.0, 0.25, 2.0), (3.0, 0.5, 1.5)] {
        let prm = ExponentParams::sobolev(1, q, alpha, nu).unwrap();
        let ch = Characteristics::compute(&one, &one, &prm, depth).unwrap();
        note(ch.a_pq_alpha);
        note(ch.w_a_infty);
        note(ch.sigma_a_infty);
        note(a_pq_char(&one, prm.p(), q, depth).unwrap());
        note(a_infty_char(&one.powf(q).unwrap(), depth).unwrap());
        let thm11 = bound_thm11(&one, &one, &prm, depth).unwrap();
        thm11.branches.values().for_each(|v| note(*v));
        if prm.p() > nu {
            note(testing_constant(&unit, &one, &one, &prm).unwrap());
            note(bound_prop13(&one, &one, &prm, depth).unwrap().value);
        }
        note(bound_thm43(&one, &prm, depth).unwrap().value);
        note(bound_thm45(&one, &prm, depth).unwrap().value);
        if nu == 2.0 {
            let sq = bound_cor41_cor42(&one, &prm, depth).unwrap();
            note(sq.mixed.value);
            note(sq.pure.value);
        }
        let f = GridFunction::constant(1, depth, 1.0).unwrap();
        let a = sparse_apply(&unit, &f, &prm).unwrap();
        a.values().iter().for_each(|v| note(*v));
    }
    report(
        1,
        "trivial weights",
        worst <= 1e-12 && t.elapsed().as_secs_f64() < 1.0,
        t,
        format!("{seen} quantities, max relative deviation from 1 = {worst:.1e}"),
    );
}

#[test]
fn criterion_02_characteristic_slope() {
    let t = Instant::now();
    let res = characteristic_slope(2.0, 2.0, &defaults::theta_grid(), 20).unwrap();
    let s = res.fit.slope;
    report(
        2,
        "characteristic slope",
        (s - 1.0).abs() <= 0.05,
        t,
        format!("p = q = 2, K = 20: slope {s:.4} +- {:.4}, target 1 +- 0.05", res.fit.stderr),
    );
}

#[test]
fn criterion_03_indicator_lower_bound() {
    let t = Instant::now();
    let prm = ExponentParams::new(1, 2.0, 3.0, 0.25, 1.5).unwrap();
    let mut worst: f64 = 0.0;
    let mut dominated = true;
    let mut n = 0;
    for depth in 3..=6u32 {
        for i in 0..20u64 {
            let mut rng = random::rng(1000 * depth as u64 + i);
            let w = random::grid_weight(&mut rng, 1, depth);
            let sigma = random::grid_weight(&mut rng, 1, depth);
            let h = holder_indicator_bound(&w, &sigma, &prm, depth).unwrap();
            let c = a_pq_alpha_char(&w, &sigma, &prm, depth).unwrap().powf(1.0 / prm.q());
            worst = worst.max(rel(h.value, c));
            let mut cubes = random::sparse_family(&mut rng, 1, depth, 0.5).cubes().to_vec();
            cubes.push(h.cube);
            let s = SparseFamily::verify(cubes.iter().copied(), 0.5)
                .or_else(|_| SparseFamily::verify([h.cube], 0.5))
                .unwrap();
            let tests = structured_tests(&mut rng, 1, depth, defaults::RANDOM_TESTS);
            let lower = weak_opnorm_lower(&s, &w, &sigma, &prm, &tests).unwrap().value;
            dominated &= lower >= h.value * (1.0 - 1e-12);
            n += 1;
        }
    }
    report(
        3,
        "indicator lower bound",
        worst <= 1e-12 && dominated,
        t,
        format!("{n} instances: max |bound - char^(1/q)| / char^(1/q) = {worst:.1e}, structured lower >= bound: {dominated}"),
    );
}

#[test]
fn criterion_04_ratio_stability() {
    let t = Instant::now();
    let prm = ExponentParams::new(1, 2.0, 3.0, 0.25, 1.5).unwrap();
    let mut max_lt = Vec::new();
    let mut max_tp = Vec::new();
    let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
    for depth in 3..=6u32 {
        let (mut a, mut b) = (0.0f64, 0.0f64);
        for i in 0..50u64 {
            let mut rng = random::rng(7_000 + i);
            let s = random::sparse_family(&mut rng, 1, depth, 0.5);
            let w = random::grid_weight(&mut rng, 1, depth);
            let sigma = random::grid_weight(&mut rng, 1, depth);
            let tests = structured_tests(&mut rng, 1, depth, defaults::RANDOM_TESTS);
            let r = two_sided_report(&s, &w, &sigma, &prm, &tests, depth).unwrap();
            let lt = r.ratios[RATIO_LOWER_TESTING];
            a = a.max(lt);
            b = b.max(r.ratios[RATIO_TESTING_PROP13]);
            lo = lo.min(lt);
            hi = hi.max(lt);
        }
        max_lt.push(a);
        max_tp.push(b);
    }
    let spread = |v: &[f64]| v.iter().copied().fold(0.0, f64::max) / v.iter().copied().fold(f64::INFINITY, f64::min);
    let (s1, s2) = (spread(&max_lt), spread(&max_tp));
    report(
        4,
        "ratio stability",
        s1 < 4.0 && s2 < 4.0,
        t,
        format!(
            "max lower^nu/T* per K = {max_lt:.3?} (spread {s1:.2}), max T*/prop13 per K = {max_tp:.3?} (spread {s2:.2}); lower^nu/T* ranges over [{lo:.3}, {hi:.3}]"
        ),
    );
}

#[test]
fn criterion_05_duality_slopes() {
    let t = Instant::now();
    let prm = ExponentParams::sobolev(1, 8.0, 0.25, 2.0).unwrap();
    let res = duality_sweep(&prm, &defaults::theta_grid()).unwrap();
    report(
        5,
        "duality slopes",
        res.within(0.1),
        t,
        format!(
            "lhs {:.4} (target {:.4}), rhs {:.4} (target {:.4})",
            res.lhs_fit.slope, res.lhs_target, res.rhs_fit.slope, res.rhs_target
        ),
    );
}

#[test]
fn criterion_06_case2_slope() {
    let t = Instant::now();
    let mut pass = true;
    let mut parts = Vec::new();
    for (alpha, q) in [(0.25, 8.0), (0.5, 4.0)] {
        let prm = ExponentParams::sobolev(1, q, alpha, 1.0).unwrap();
        let res = case2_sweep(&prm, &defaults::theta_grid(), defaults::DEPTH).unwrap();
        let ok = (res.fit.slope - (1.0 - alpha)).abs() <= 0.1;
        pass &= ok;
        parts.push(format!("alpha = {alpha}, q = {q}: slope {:.4} target {:.4}", res.fit.slope, 1.0 - alpha));
    }
    report(6, "case 2 slope", pass, t, parts.join("; "));
}

#[test]
fn criterion_07_sharpness_sweep() {
    let t = Instant::now();
    let gens = [TestGenerator::Indicator, TestGenerator::Extremal];
    let mut pass = true;
    let mut parts = Vec::new();
    for (prm, lo, hi) in [
        (ExponentParams::sobolev(1, 8.0, 0.25, 2.0).unwrap(), 0.15, 0.35),
        (ExponentParams::new(1, 2.0, 2.0, 0.0, 1.0).unwrap(), 0.40, 0.60),
    ] {
        let res = sharpness_sweep(&prm, &defaults::theta_grid(), &gens, defaults::DEPTH).unwrap();
        pass &= res.within(lo, hi);
        parts.push(format!(
            "nu = {}, alpha = {}, q = {}: slope {:.4} +- {:.4} in [{lo}, {hi}]",
            prm.nu(),
            prm.alpha(),
            prm.q(),
            res.fitted_slope,
            res.slope_stderr
        ));
    }
    report(7, "sharpness sweep", pass, t, parts.join("; "));
}

#[test]
fn criterion_08_reverse_holder() {
    let t = Instant::now();
    let corpus: Vec<Weight> = (1..=10).map(|k| Weight::power(k as f64 / 10.0 - 1.0).unwrap()).collect();
    let calibrated = calibrate_reverse_holder(&corpus, 14, 1e-3).unwrap();
    let mut worst: f64 = 0.0;
    let mut pass = calibrated <= defaults::REVERSE_HOLDER_C;
    for w in &corpus {
        let r = reverse_holder_check(w, defaults::REVERSE_HOLDER_C, 14).unwrap();
        worst = worst.max(r.worst_ratio);
        pass &= r.pass;
    }
    report(
        8,
        "reverse Hölder",
        pass,
        t,
        format!(
            "calibrated c = {calibrated:.4}, default c = {}, worst ratio {worst:.4} <= 2 at level <= 14",
            defaults::REVERSE_HOLDER_C
        ),
    );
}

#[test]
fn criterion_09_overlap_tail_decay() {
    let t = Instant::now();
    let prm = ExponentParams::new(1, 2.0, 2.0, 0.0, 1.0).unwrap();
    let mut ratios = Vec::new();
    let mut checked = 0;
    let unit = Weight::constant(1, 1.0).unwrap();
    for i in 0..10u64 {
        let mut rng = random::rng(9_000 + i);
        let s = random::sparse_family(&mut rng, 1, 12, 0.5);
        // Cell values in [0.56, 0.95]: every average lands in S_0, so the
        // overlap of the whole family is exercised.
        let f = random::positive_grid(&mut rng, 1, 12).map(|x| 0.55 + 0.2 * x).unwrap();
        let d = decompose_levels(&s, &f, &unit, &prm).unwrap();
        let r = d.tail_report(2);
        checked += r.ratios_checked;
        ratios.push(r.max_ratio);
    }
    let worst = ratios.iter().copied().fold(0.0, f64::max);
    report(
        9,
        "overlap tail decay",
        worst <= 0.75 && checked > 0,
        t,
        format!("{checked} ratios for lambda >= 2, per-instance max {ratios:.3?}"),
    );
}

#[test]
fn criterion_10_retention() {
    let t = Instant::now();
    let prm = ExponentParams::new(1, 2.0, 2.0, 0.0, 2.0).unwrap();
    let (mut checked, mut violations) = (0, 0);
    let mut min_ratio = f64::INFINITY;
    for i in 0..100u64 {
        let mut rng = random::rng(10_000 + i);
        let s = random::extra_sparse_family(&mut rng, 1, 12, 0.0);
        let f = random::positive_grid(&mut rng, 1, 12);
        let sigma = random::grid_weight(&mut rng, 1, 12);
        let r = decompose_levels(&s, &f, &sigma, &prm).unwrap().retention();
        checked += r.checked;
        violations += r.violations;
        min_ratio = min_ratio.min(r.min_ratio);
    }

    // Same suite with alpha > 0: not asserted, the half-retention can fail.
    let (mut pos_checked, mut pos_viol) = (0, 0);
    let mut pos_min = f64::INFINITY;
    for i in 0..100u64 {
        let alpha = 0.5;
        let prm = ExponentParams::new(1, 2.0, 2.0, alpha, 2.0).unwrap();
        let mut rng = random::rng(10_000 + i);
        let s = random::extra_sparse_family(&mut rng, 1, 12, alpha);
        let f = random::positive_grid(&mut rng, 1, 12);
        let sigma = random::grid_weight(&mut rng, 1, 12);
        let r = decompose_levels(&s, &f, &sigma, &prm).unwrap().retention();
        pos_checked += r.checked;
        pos_viol += r.violations;
        pos_min = pos_min.min(r.min_ratio);
    }
    println!(
        "[INFO] criterion 10 alpha = 1/2: {pos_viol} of {pos_checked} cubes below 1/2, min ratio {pos_min:.4} (not asserted)"
    );
    report(
        10,
        "retention",
        violations == 0 && min_ratio >= 0.5,
        t,
        format!("alpha = 0: {checked} cubes in S_m, {violations} violations, min ratio {min_ratio:.4}"),
    );
}
