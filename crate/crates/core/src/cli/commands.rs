use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::Serialize;

use super::config::{Config, Experiment};
use super::output::{num, opt, Outputs};
use crate::dyadic::ExponentParams;
use crate::error::{Error, Result};
use crate::experiments::{
    case2_sweep, characteristic_slope, duality_sweep, sharpness_sweep, Case2Result, CharacteristicSweep,
    DualityResult, SweepResult,
};
use crate::norms::structured_tests;
use crate::operators::{frac_integral, frac_integral_nodes, frac_maximal, sparse_apply, sparse_apply_weighted};
use crate::random;
use crate::testing::{two_sided_report, BoundReport, RATIO_LOWER_TESTING, RATIO_TESTING_PROP13};
use crate::weights::{a_infty_char, a_pq_alpha_sup, a_pq_char, Supremum};

#[derive(Serialize)]
struct Report<'a, T: Serialize> {
    command: &'static str,
    config: &'a Config,
    result: T,
}

pub struct Finished {
    pub outputs: Outputs,
    pub summary: String,
}

#[derive(Serialize)]
struct Characteristics {
    depth: u32,
    a_pq_alpha: Supremum,
    a_pq: f64,
    /// `[w^s]_{A_inf}` keyed by `s`.
    a_infty_w: BTreeMap<String, f64>,
    a_infty_sigma: f64,
}

pub fn char(cfg: &Config, prm: &ExponentParams) -> Result<Finished> {
    let mut rng = random::rng(cfg.seed);
    let w = cfg.weight.build(prm, cfg.depth, &mut rng)?;
    let sigma = cfg.sigma.build(prm, cfg.depth, &mut rng)?;
    let powers = cfg.powers.clone().unwrap_or_else(|| vec![1.0, prm.q(), -prm.p_prime()]);
    let a_infty_w = powers
        .iter()
        .map(|s| Ok((num(*s), a_infty_char(&w.powf(*s)?, cfg.depth)?)))
        .collect::<Result<BTreeMap<_, _>>>()?;
    let result = Characteristics {
        depth: cfg.depth,
        a_pq_alpha: a_pq_alpha_sup(&w, &sigma, prm, cfg.depth)?,
        a_pq: a_pq_char(&w, prm.p(), prm.q(), cfg.depth)?,
        a_infty_w,
        a_infty_sigma: a_infty_char(&sigma, cfg.depth)?,
    };
    let report = Report {
        command: "char",
        config: cfg,
        result,
    };
    let mut outputs = Outputs::default();
    outputs.json("characteristics.json", &report);
    let summary = serde_json::to_string_pretty(&report.result).expect("serializable");
    Ok(Finished { outputs, summary })
}

#[derive(Serialize)]
struct ApplySummary {
    depth: u32,
    family_size: usize,
    min: f64,
    max: f64,
    columns: Vec<String>,
}

pub fn apply(cfg: &Config, prm: &ExponentParams) -> Result<Finished> {
    let mut rng = random::rng(cfg.seed);
    let s = cfg.family.build(prm, cfg.depth, cfg.gamma, &mut rng)?;
    let f = cfg.function.build(prm.d(), cfg.depth, &mut rng)?;
    let a = if cfg.apply.weighted {
        let sigma = cfg.sigma.build(prm, cfg.depth, &mut rng)?;
        sparse_apply_weighted(&s, &f, &sigma, prm)?
    } else {
        sparse_apply(&s, &f, prm)?
    };
    let mut header: Vec<String> = vec!["cell".into()];
    match prm.d() {
        1 => header.extend(["x_lo".into(), "x_hi".into()]),
        _ => header.extend(["x_lo".into(), "x_hi".into(), "y_lo".into(), "y_hi".into()]),
    }
    header.extend(["f".into(), "A".into()]);
    let mut extra = Vec::new();
    if cfg.apply.maximal {
        header.push("M_alpha".into());
        extra.push(frac_maximal(&f, prm.alpha(), f.depth())?);
    }
    let mut outputs = Outputs::default();
    if cfg.apply.riesz {
        header.push("I_alpha".into());
        extra.push(frac_integral(&f, prm.alpha())?);
        let nodes = frac_integral_nodes(&f, prm.alpha())?;
        let rows: Vec<Vec<String>> = nodes.iter().map(|(x, v)| vec![num(*x), num(*v)]).collect();
        outputs.csv("riesz_nodes.csv", &["x", "I_alpha"], &rows);
    }
    let rows: Vec<Vec<String>> = (0..f.len())
        .map(|i| {
            let cell = f.cell(i);
            let mut r = vec![i.to_string()];
            let side = cell.side();
            for j in cell.index() {
                r.push(num(*j as f64 * side));
                r.push(num((*j + 1) as f64 * side));
            }
            r.push(num(f.values()[i]));
            r.push(num(a.values()[i]));
            r.extend(extra.iter().map(|g| num(g.values()[i])));
            r
        })
        .collect();
    let header_refs: Vec<&str> = header.iter().map(String::as_str).collect();
    outputs.csv("apply.csv", &header_refs, &rows);
    let values = a.values();
    let result = ApplySummary {
        depth: f.depth(),
        family_size: s.len(),
        min: values.iter().copied().fold(f64::INFINITY, f64::min),
        max: values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        columns: header,
    };
    let summary = format!(
        "A on {} cells: min {} max {} ({} cubes)",
        f.len(),
        num(result.min),
        num(result.max),
        result.family_size
    );
    outputs.json(
        "apply.json",
        &Report {
            command: "apply",
            config: cfg,
            result,
        },
    );
    Ok(Finished { outputs, summary })
}

#[derive(Serialize)]
struct Extremes {
    min: f64,
    max: f64,
}

fn extremes(v: impl Iterator<Item = f64>) -> Extremes {
    let (mut min, mut max) = (f64::INFINITY, f64::NEG_INFINITY);
    for x in v {
        min = min.min(x);
        max = max.max(x);
    }
    Extremes { min, max }
}

#[derive(Serialize)]
struct TestingResult {
    depth: u32,
    instances: Vec<BoundReport>,
    ratio_extremes: BTreeMap<String, Extremes>,
}

pub fn testing(cfg: &Config, prm: &ExponentParams) -> Result<Finished> {
    if prm.p() <= prm.nu() {
        return Err(Error::Hypothesis(format!(
            "the testing characterization needs p > nu, got p = {}, nu = {}",
            prm.p(),
            prm.nu()
        )));
    }
    let depth = cfg.testing.depth;
    let d = prm.d();
    let reports: Vec<BoundReport> = match cfg.testing.suite {
        None => {
            let mut rng = random::rng(cfg.seed);
            let s = cfg.family.build(prm, depth, cfg.gamma, &mut rng)?;
            let w = cfg.weight.build(prm, depth, &mut rng)?;
            let sigma = cfg.sigma.build(prm, depth, &mut rng)?;
            let tests = structured_tests(&mut rng, d, depth, cfg.testing.random_tests);
            vec![two_sided_report(&s, &w, &sigma, prm, &tests, depth)?]
        }
        Some(n) => (0..n as u64)
            .into_par_iter()
            .map(|i| {
                let mut rng = random::rng(cfg.seed.wrapping_add(i));
                let s = random::sparse_family(&mut rng, d, depth, cfg.gamma);
                let w = random::grid_weight(&mut rng, d, depth);
                let sigma = random::grid_weight(&mut rng, d, depth);
                let tests = structured_tests(&mut rng, d, depth, cfg.testing.random_tests);
                two_sided_report(&s, &w, &sigma, prm, &tests, depth)
            })
            .collect::<Result<Vec<_>>>()?,
    };
    let rows: Vec<Vec<String>> = reports
        .iter()
        .enumerate()
        .map(|(i, r)| {
            vec![
                i.to_string(),
                num(r.lower),
                num(r.testing),
                r.prop13.label.clone(),
                num(r.prop13.value),
                num(r.ratios[RATIO_LOWER_TESTING]),
                num(r.ratios[RATIO_TESTING_PROP13]),
            ]
        })
        .collect();
    let mut ratio_extremes = BTreeMap::new();
    for key in reports[0].ratios.keys() {
        ratio_extremes.insert(key.clone(), extremes(reports.iter().map(|r| r.ratios[key])));
    }
    let summary = ratio_extremes
        .iter()
        .map(|(k, e)| format!("{k}: min {} max {}", num(e.min), num(e.max)))
        .collect::<Vec<_>>()
        .join("\n");
    let mut outputs = Outputs::default();
    outputs.csv(
        "testing.csv",
        &["instance_id", "lower", "testing", "bound_case", "bound_value", "ratio1", "ratio2"],
        &rows,
    );
    outputs.json(
        "testing.json",
        &Report {
            command: "testing",
            config: cfg,
            result: TestingResult {
                depth,
                instances: reports,
                ratio_extremes,
            },
        },
    );
    Ok(Finished { outputs, summary })
}

#[derive(Serialize)]
struct SlopeCheck {
    fitted_slope: f64,
    stderr: f64,
    target: f64,
    pass: bool,
}

#[derive(Serialize, Default)]
struct SharpnessResult {
    #[serde(skip_serializing_if = "Option::is_none")]
    sweep: Option<SweepResult>,
    #[serde(skip_serializing_if = "Option::is_none")]
    duality: Option<DualityResult>,
    #[serde(skip_serializing_if = "Option::is_none")]
    case2: Option<Case2Result>,
    #[serde(skip_serializing_if = "Option::is_none")]
    characteristic: Option<CharacteristicSweep>,
    checks: BTreeMap<String, SlopeCheck>,
    skipped: BTreeMap<String, String>,
}

fn check(slope: f64, stderr: f64, target: f64, tol: f64) -> SlopeCheck {
    SlopeCheck {
        fitted_slope: slope,
        stderr,
        target,
        pass: (slope - target).abs() <= tol,
    }
}

pub fn sharpness(cfg: &Config, prm: &ExponentParams) -> Result<Finished> {
    let opts = &cfg.sharpness;
    let thetas = &opts.theta_grid;
    let tol = opts.tolerance;
    crate::experiments::check_theta_grid(thetas)?;
    let full = opts.experiment == Experiment::Full;
    let mut res = SharpnessResult::default();
    let mut outputs = Outputs::default();

    if full || opts.experiment == Experiment::Indicator {
        let sw = sharpness_sweep(prm, thetas, &opts.generators, cfg.depth)?;
        let rows: Vec<Vec<String>> = sw
            .records
            .iter()
            .map(|r| {
                vec![
                    num(r.theta),
                    r.n_annuli.to_string(),
                    num(r.a_pq),
                    num(r.wq_a_infty),
                    num(r.lower),
                    opt(r.lower_indicator),
                    opt(r.lower_extremal),
                    opt(r.bound),
                ]
            })
            .collect();
        outputs.csv(
            "sweep.csv",
            &["theta", "n_annuli", "char", "wq_a_infty", "lower", "lower_indicator", "lower_extremal", "bound"],
            &rows,
        );
        let pts: Vec<(f64, f64)> = sw.records.iter().map(|r| (r.a_pq.ln(), r.lower.ln())).collect();
        outputs.dat("sweep.dat", "ln [w]_{A_pq}  ln lower", &pts);
        res.checks.insert("sweep".into(), check(sw.fitted_slope, sw.slope_stderr, sw.target, tol));
        res.sweep = Some(sw);
    }

    let duality_ok = prm.nu() > 1.0 && prm.is_sobolev() && prm.d() == 1;
    if opts.experiment == Experiment::Duality || (full && duality_ok) {
        let du = duality_sweep(prm, thetas)?;
        let rows: Vec<Vec<String>> = du
            .records
            .iter()
            .map(|r| vec![num(r.theta), r.n_annuli.to_string(), num(r.lhs), num(r.rhs)])
            .collect();
        outputs.csv("duality.csv", &["theta", "n_annuli", "lhs", "rhs"], &rows);
        let lhs: Vec<(f64, f64)> = du.records.iter().map(|r| (r.theta.ln(), r.lhs.ln())).collect();
        let rhs: Vec<(f64, f64)> = du.records.iter().map(|r| (r.theta.ln(), r.rhs.ln())).collect();
        outputs.dat("duality_lhs.dat", "ln theta  ln lhs", &lhs);
        outputs.dat("duality_rhs.dat", "ln theta  ln rhs", &rhs);
        res.checks.insert("duality_lhs".into(), check(du.lhs_fit.slope, du.lhs_fit.stderr, du.lhs_target, tol));
        res.checks.insert("duality_rhs".into(), check(du.rhs_fit.slope, du.rhs_fit.stderr, du.rhs_target, tol));
        res.duality = Some(du);
    } else if full {
        res.skipped.insert("duality".into(), "needs nu > 1 on the Sobolev line in d = 1".into());
    }

    let case2_ok = prm.nu() == 1.0 && prm.alpha() > 0.0 && prm.is_sobolev() && prm.d() == 1;
    if opts.experiment == Experiment::Case2 || (full && case2_ok) {
        let c2 = case2_sweep(prm, thetas, cfg.depth)?;
        let rows: Vec<Vec<String>> = c2
            .records
            .iter()
            .map(|r| {
                vec![
                    num(r.theta),
                    num(r.a1),
                    num(r.u_ball),
                    num(r.f_norm),
                    num(r.x_theta),
                    num(r.lower),
                    num(r.ratio),
                ]
            })
            .collect();
        outputs.csv("case2.csv", &["theta", "a1", "u_ball", "f_norm", "x_theta", "lower", "ratio"], &rows);
        let pts: Vec<(f64, f64)> = c2.records.iter().map(|r| ((1.0 / r.theta).ln(), r.ratio.ln())).collect();
        outputs.dat("case2.dat", "ln(1/theta)  ln ratio", &pts);
        res.checks.insert("case2".into(), check(c2.fit.slope, c2.fit.stderr, c2.target, tol));
        res.case2 = Some(c2);
    } else if full {
        res.skipped.insert("case2".into(), "needs nu = 1, alpha > 0 on the Sobolev line in d = 1".into());
    }

    if full {
        let ch = characteristic_slope(prm.p(), prm.q(), thetas, cfg.depth)?;
        let rows: Vec<Vec<String>> = ch
            .theta_grid
            .iter()
            .zip(&ch.values)
            .map(|(t, v)| vec![num(*t), num(*v)])
            .collect();
        outputs.csv("characteristic.csv", &["theta", "char"], &rows);
        let pts: Vec<(f64, f64)> = ch.theta_grid.iter().zip(&ch.values).map(|(t, v)| ((1.0 / t).ln(), v.ln())).collect();
        outputs.dat("characteristic.dat", "ln(1/theta)  ln [w]_{A_pq}", &pts);
        res.checks.insert("characteristic".into(), check(ch.fit.slope, ch.fit.stderr, 1.0, tol));
        res.characteristic = Some(ch);
    }

    let summary = res
        .checks
        .iter()
        .map(|(k, c)| {
            format!(
                "{} {k}: slope {:.4} +- {:.4}, target {:.4}",
                if c.pass { "pass" } else { "FAIL" },
                c.fitted_slope,
                c.stderr,
                c.target
            )
        })
        .chain(res.skipped.iter().map(|(k, why)| format!("skip {k}: {why}")))
        .collect::<Vec<_>>()
        .join("\n");
    outputs.json(
        "sharpness.json",
        &Report {
            command: "sharpness",
            config: cfg,
            result: res,
        },
    );
    Ok(Finished { outputs, summary })
}
