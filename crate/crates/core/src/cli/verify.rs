//! Built-in invariant checks for the `verify` command.

use super::config::Config;
use crate::defaults;
use crate::dyadic::{ExponentParams, SparseFamily};
use crate::fit::ols;
use crate::grid::GridFunction;
use crate::norms::{holder_indicator_bound, lorentz_norm, lp_norm, structured_tests, weak_norm, weak_opnorm_lower};
use crate::operators::{decompose_levels, frac_integral_nodes};
use crate::random;
use crate::testing::thm45_formula;
use crate::weights::{a_infty_char, a_p_char, a_pq_alpha_char, a_pq_char, reverse_holder_check, Weight};

type Check = std::result::Result<(), String>;
type CheckFn = fn(&Config) -> Check;

pub struct Outcome {
    pub name: &'static str,
    pub result: Check,
}

const DEPTH: u32 = 5;

fn close(a: f64, b: f64, rtol: f64) -> bool {
    (a - b).abs() <= rtol * a.abs().max(b.abs()).max(1.0)
}

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Check {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn lib<T>(r: crate::Result<T>) -> std::result::Result<T, String> {
    r.map_err(|e| e.to_string())
}

fn prm(p: f64, q: f64, alpha: f64, nu: f64) -> std::result::Result<ExponentParams, String> {
    lib(ExponentParams::new(1, p, q, alpha, nu))
}

fn trivial_weights(_: &Config) -> Check {
    let one = lib(Weight::constant(1, 1.0))?;
    let pr = prm(2.0, 2.0, 0.0, 1.0)?;
    for (name, v) in [
        ("[1]_{A_pq}", lib(a_pq_char(&one, 2.0, 3.0, DEPTH))?),
        ("[1]_{A_inf}", lib(a_infty_char(&one, DEPTH))?),
        ("[1]_{A_2}", lib(a_p_char(&one, 2.0, DEPTH))?),
    ] {
        ensure(close(v, 1.0, defaults::EXACT_RTOL), || format!("{name} = {v}"))?;
    }
    let v = lib(a_pq_alpha_char(&one, &one, &pr, DEPTH))?;
    ensure(close(v, 1.0, defaults::EXACT_RTOL), || format!("[1,1]_(A_pq,0) = {v}"))
}

fn characteristic_identities(cfg: &Config) -> Check {
    for i in 0..cfg.verify.instances as u64 {
        let mut rng = random::rng(cfg.seed.wrapping_add(i));
        let w = random::grid_weight(&mut rng, 1, DEPTH);
        let (p, q) = (1.5, 3.0);
        let pp = 3.0;
        let lhs = lib(a_pq_char(&w, p, q, DEPTH))?;
        let rhs = lib(a_p_char(&lib(w.powf(q))?, 1.0 + q / pp, DEPTH))?;
        ensure(close(lhs, rhs, 1e-10), || format!("instance {i}: [w]_(A_pq) = {lhs}, [w^q]_(A_r) = {rhs}"))?;
    }
    Ok(())
}

fn sparseness(cfg: &Config) -> Check {
    for i in 0..cfg.verify.instances as u64 {
        let mut rng = random::rng(cfg.seed.wrapping_add(i));
        let s = random::sparse_family(&mut rng, 1, 8, cfg.gamma);
        lib(SparseFamily::verify(s.cubes().iter().copied(), cfg.gamma)).map_err(|e| format!("random family {i}: {e}"))?;
    }
    for (i, f) in cfg.verify.families.iter().enumerate() {
        lib(SparseFamily::verify(f.cubes.iter().copied(), f.gamma)).map_err(|e| format!("configured family {i}: {e}"))?;
    }
    Ok(())
}

fn indicator_bound(cfg: &Config) -> Check {
    let pr = prm(2.0, 3.0, 0.25, 1.0)?;
    for i in 0..cfg.verify.instances as u64 {
        let mut rng = random::rng(cfg.seed.wrapping_add(i));
        let w = random::grid_weight(&mut rng, 1, DEPTH);
        let sigma = random::grid_weight(&mut rng, 1, DEPTH);
        let h = lib(holder_indicator_bound(&w, &sigma, &pr, DEPTH))?;
        let c = lib(a_pq_alpha_char(&w, &sigma, &pr, DEPTH))?.powf(1.0 / pr.q());
        ensure(close(h.value, c, defaults::EXACT_RTOL), || format!("instance {i}: {} vs {c}", h.value))?;
        let s = lib(SparseFamily::verify([h.cube], cfg.gamma))?;
        let tests = structured_tests(&mut rng, 1, DEPTH, defaults::RANDOM_TESTS);
        let lower = lib(weak_opnorm_lower(&s, &w, &sigma, &pr, &tests))?.value;
        ensure(lower >= h.value * (1.0 - 1e-12), || format!("instance {i}: lower {lower} < {}", h.value))?;
    }
    Ok(())
}

fn retention(cfg: &Config) -> Check {
    let pr = prm(2.0, 2.0, 0.0, 2.0)?;
    for i in 0..cfg.verify.instances as u64 {
        let mut rng = random::rng(cfg.seed.wrapping_add(i));
        let s = random::extra_sparse_family(&mut rng, 1, 8, 0.0);
        let f = random::positive_grid(&mut rng, 1, 8);
        let sigma = random::grid_weight(&mut rng, 1, 8);
        let rep = lib(decompose_levels(&s, &f, &sigma, &pr))?.retention();
        ensure(rep.violations == 0, || format!("instance {i}: {rep:?}"))?;
    }
    Ok(())
}

fn tail_decay(cfg: &Config) -> Check {
    let pr = prm(2.0, 2.0, 0.0, 1.0)?;
    let unit = lib(Weight::constant(1, 1.0))?;
    for i in 0..cfg.verify.instances as u64 {
        let mut rng = random::rng(cfg.seed.wrapping_add(i));
        let s = random::sparse_family(&mut rng, 1, 8, 0.5);
        let f = random::positive_grid(&mut rng, 1, 8);
        let rep = lib(decompose_levels(&s, &f, &unit, &pr))?.tail_report(2);
        ensure(rep.max_ratio <= 0.75, || format!("instance {i}: {rep:?}"))?;
    }
    Ok(())
}

fn level_split(cfg: &Config) -> Check {
    let pr = prm(1.1, 2.0, 0.2, 3.0)?;
    for i in 0..cfg.verify.instances as u64 {
        let mut rng = random::rng(cfg.seed.wrapping_add(i));
        let s = random::sparse_family(&mut rng, 1, 6, 0.5);
        let f = lib(random::positive_grid(&mut rng, 1, 6).scale(3.0))?;
        let sigma = random::grid_weight(&mut rng, 1, 6);
        let w = random::grid_weight(&mut rng, 1, 6);
        let rep = lib(lib(decompose_levels(&s, &f, &sigma, &pr))?.split(&w, pr.q()))?;
        ensure(rep.holds, || format!("instance {i}: {rep:?}"))?;
    }
    Ok(())
}

fn reverse_holder(_: &Config) -> Check {
    for k in 1..=10 {
        let theta = k as f64 / 10.0;
        let w = lib(Weight::power(theta - 1.0))?;
        let rep = lib(reverse_holder_check(&w, defaults::REVERSE_HOLDER_C, defaults::DEPTH))?;
        ensure(rep.pass, || format!("theta = {theta}: worst ratio {}", rep.worst_ratio))?;
    }
    Ok(())
}

fn riesz_endpoints(_: &Config) -> Check {
    let one = lib(GridFunction::constant(1, 6, 1.0))?;
    let nodes = lib(frac_integral_nodes(&one, 0.5))?;
    let (a, m) = (nodes[0].1, nodes[32].1);
    ensure(close(a, 2.0, 1e-12) && close(m, 2.0 * 2f64.sqrt(), 1e-12), || {
        format!("I_(1/2) 1 = {a} at 0 and {m} at 1/2")
    })
}

fn norm_ordering(cfg: &Config) -> Check {
    for i in 0..cfg.verify.instances as u64 {
        let mut rng = random::rng(cfg.seed.wrapping_add(i));
        let g = random::positive_grid(&mut rng, 1, DEPTH);
        let w = random::grid_weight(&mut rng, 1, DEPTH);
        for r in [1.5, 2.0, 4.0] {
            let weak = lib(weak_norm(&g, &w, r))?.value;
            let strong = lib(lp_norm(&g, &w, r))?;
            let lor = lib(lorentz_norm(&g, &w, r))?;
            let tol = 1.0 + 1e-12;
            ensure(weak <= strong * tol && strong <= lor * tol, || {
                format!("instance {i}, r = {r}: {weak} / {strong} / {lor}")
            })?;
        }
    }
    Ok(())
}

fn fit_recovery(_: &Config) -> Check {
    let x: Vec<f64> = (0..6).map(|i| i as f64).collect();
    let y: Vec<f64> = x.iter().map(|x| 0.75 * x - 2.0).collect();
    let f = lib(ols(&x, &y))?;
    ensure(close(f.slope, 0.75, 1e-12) && close(f.intercept, -2.0, 1e-12), || format!("{f:?}"))
}

fn formula_monotonicity(_: &Config) -> Check {
    let pr = lib(ExponentParams::sobolev(1, 8.0, 0.25, 2.0))?;
    let mut last = 0.0;
    for a in [1.0, 2.0, 4.0, 8.0, 16.0] {
        let v = lib(thm45_formula(a, a, &pr))?.value;
        ensure(v > last, || format!("bound not increasing at [w] = {a}: {v} <= {last}"))?;
        last = v;
    }
    Ok(())
}

const CHECKS: &[(&str, CheckFn)] = &[
    ("trivial_weights", trivial_weights),
    ("characteristic_identities", characteristic_identities),
    ("sparseness", sparseness),
    ("indicator_bound", indicator_bound),
    ("retention", retention),
    ("tail_decay", tail_decay),
    ("level_split", level_split),
    ("reverse_holder", reverse_holder),
    ("riesz_endpoints", riesz_endpoints),
    ("norm_ordering", norm_ordering),
    ("fit_recovery", fit_recovery),
    ("formula_monotonicity", formula_monotonicity),
];

pub fn run_checks(cfg: &Config) -> Vec<Outcome> {
    CHECKS
        .iter()
        .map(|(name, f)| Outcome {
            name,
            result: f(cfg),
        })
        .collect()
}
