//! Subcommand implementations.

use rayon::prelude::*;
use relay_fbl::evaluate::{Evaluator, McConfig, Metric, PointValues, SchemeKind, Variable, ETA_MAX, ETA_MIN};
use relay_fbl::optimize::{linspace, try_maximize_unimodal, turns, OptFlag};
use relay_fbl::relay::select_rate_avg_csi;
use relay_fbl::scenario::Scenario;
use relay_fbl::validation::{check_point, random_points};
use relay_fbl::{Error, Result};

use crate::table::{num, opt, Table};
use crate::{DirectModeArg, GridArgs, Objective, Pair, EXIT_CHECKS_FAILED, EXIT_NONCONVERGENCE};

/// Relative gap below which finite-blocklength and infinite-blocklength
/// results are considered converged.
const CONVERGED_GAP: f64 = 0.02;

/// Margin, bits per channel use, by which a throughput may exceed its outage
/// capacity before it is reported.
const OUTAGE_SLACK: f64 = 1e-6;

/// Default blocklength grid, channel uses.
const DEFAULT_BLOCKLENGTHS: [f64; 5] = [100.0, 200.0, 500.0, 1000.0, 2000.0];

fn invalid(field: &str, reason: impl Into<String>) -> Error {
    Error::Invalid {
        field: field.into(),
        reason: reason.into(),
    }
}

/// Grid of `var` from explicit values or `(lo, hi, n)`, with defaults per variable.
fn resolve_grid(var: Variable, args: &GridArgs, ev: &Evaluator) -> Result<Vec<f64>> {
    let grid = if let Some(g) = &args.grid {
        g.clone()
    } else {
        let (lo, hi, n) = match var {
            Variable::Eta => (ETA_MIN, ETA_MAX, 100),
            Variable::Blocklength => {
                if args.lo.is_none() && args.hi.is_none() && args.n.is_none() {
                    return Ok(DEFAULT_BLOCKLENGTHS.to_vec());
                }
                (100.0, 2000.0, 5)
            }
            Variable::CodingRate => {
                let top = select_rate_avg_csi(ev.gains(), &ev.params().with_eta(ETA_MAX))?.rate;
                (top / 50.0, top, 50)
            }
        };
        let (lo, hi, n) = (args.lo.unwrap_or(lo), args.hi.unwrap_or(hi), args.n.unwrap_or(n));
        if n > 1 && !(lo < hi) {
            return Err(invalid("grid", format!("lo {lo} must be below hi {hi}")));
        }
        let mut g = linspace(lo, hi, n);
        if var == Variable::Blocklength {
            g.iter_mut().for_each(|x| *x = x.round());
            g.dedup();
        }
        g
    };
    if grid.is_empty() {
        return Err(invalid("grid", "the grid is empty"));
    }
    for &x in &grid {
        Evaluator::check(var, x)?;
    }
    Ok(grid)
}

/// Every scheme at every grid point, rows in grid order.
fn evaluate_grid(ev: &Evaluator, var: Variable, grid: &[f64], schemes: &[SchemeKind]) -> Result<Vec<Vec<PointValues>>> {
    grid.par_iter()
        .map(|&x| schemes.iter().map(|&s| ev.eval(var, x, s)).collect::<Result<Vec<_>>>())
        .collect()
}

fn has_msdr(s: SchemeKind) -> bool {
    matches!(
        s,
        SchemeKind::RelayAvg | SchemeKind::RelayPerfect | SchemeKind::DirectMatched | SchemeKind::DirectWeighted
    )
}

fn col(scheme: SchemeKind, what: &str, unit: &str) -> String {
    format!("{}.{what} [{unit}]", scheme.name())
}

fn sweep_table(
    var: Variable,
    grid: &[f64],
    schemes: &[SchemeKind],
    metrics: &[Metric],
    values: &[Vec<PointValues>],
) -> Table {
    let mut header = vec![format!("{} [{}]", var.name(), var.unit())];
    for &s in schemes {
        for &m in metrics {
            header.push(col(s, m.name(), m.unit()));
            if m == Metric::BlThroughput && s.is_stochastic() {
                header.push(col(s, "bl_throughput_se", "bits/cu"));
            }
            if m == Metric::Msdr && has_msdr(s) {
                header.push(col(s, "msdr_feasible", "bool"));
            }
        }
    }
    let mut t = Table::new(header);
    for (x, row) in grid.iter().zip(values) {
        let mut cells = vec![num(*x)];
        for (&s, v) in schemes.iter().zip(row) {
            for &m in metrics {
                cells.push(opt(v.get(m)));
                if m == Metric::BlThroughput && s.is_stochastic() {
                    cells.push(opt(v.std_err));
                }
                if m == Metric::Msdr && has_msdr(s) {
                    cells.push((!v.msdr_infeasible).to_string());
                }
            }
        }
        t.rows.push(cells);
    }
    t
}

pub fn sweep(
    scenario: &Scenario,
    mc: McConfig,
    var: Variable,
    grid_args: &GridArgs,
    schemes: &[SchemeKind],
    metrics: &[Metric],
) -> Result<u8> {
    if schemes.is_empty() {
        return Err(invalid("schemes", "no scheme selected"));
    }
    if metrics.is_empty() {
        return Err(invalid("metrics", "no metric selected"));
    }
    let ev = Evaluator::new(scenario, mc)?;
    let grid = resolve_grid(var, grid_args, &ev)?;
    let values = evaluate_grid(&ev, var, &grid, schemes)?;
    let mut t = sweep_table(var, &grid, schemes, metrics, &values);
    for (i, &s) in schemes.iter().enumerate() {
        for &m in metrics {
            let series: Vec<f64> = values.iter().filter_map(|row| row[i].get(m)).collect();
            if series.len() == grid.len() && grid.len() > 2 {
                let shape = turns(&series, 1e-9);
                t.note(format!(
                    "shape {}.{}: peaks={} valleys={} unimodal={}",
                    s.name(),
                    m.name(),
                    shape.peaks,
                    shape.valleys,
                    shape.is_unimodal()
                ));
            }
            if values.iter().any(|row| row[i].rate_clamped) {
                t.note(format!("{}: rate rule clamped to 0 at some grid points", s.name()));
            }
        }
    }
    t.note(format!("seed={} mc_samples={}", mc.seed, mc.samples));
    t.emit()?;
    Ok(0)
}

pub fn optimize(scenario: &Scenario, mc: McConfig, objective: Objective, tol: f64) -> Result<u8> {
    if !(tol > 0.0) {
        return Err(invalid("tol", format!("{tol} must be positive")));
    }
    let ev = Evaluator::new(scenario, mc)?;
    let targets: &[Metric] = match objective {
        Objective::BlThroughput => &[Metric::BlThroughput],
        Objective::Msdr => &[Metric::Msdr],
        Objective::Both => &[Metric::BlThroughput, Metric::Msdr],
    };
    let mut t = Table::new(
        [
            "objective",
            "eta_star [1]",
            "value [bits/cu]",
            "coding_rate [bits/cu]",
            "expected_error [prob]",
            "flag",
            "evaluations",
            "bracket [1]",
        ]
        .map(String::from)
        .to_vec(),
    );
    let mut status = 0;
    let mut stars = Vec::new();
    for &metric in targets {
        let res = try_maximize_unimodal(
            |eta| {
                let v = ev.eval(Variable::Eta, eta, SchemeKind::RelayAvg)?;
                Ok(v.get(metric).unwrap_or(0.0))
            },
            ETA_MIN,
            ETA_MAX,
            tol,
        )?;
        let at = ev.eval(Variable::Eta, res.argmax, SchemeKind::RelayAvg)?;
        match res.flag {
            OptFlag::NonUnimodalDetected => log::warn!("{}: objective is not unimodal over eta", metric.name()),
            OptFlag::BudgetExhausted => status = EXIT_NONCONVERGENCE,
            OptFlag::Converged => {}
        }
        t.rows.push(vec![
            metric.name().to_string(),
            num(res.argmax),
            num(res.value),
            opt(at.coding_rate),
            opt(at.expected_error),
            res.flag.as_str().to_string(),
            res.iterations.to_string(),
            num(res.bracket),
        ]);
        stars.push(res.argmax);
    }
    if stars.len() == 2 {
        t.note(format!(
            "eta_star(msdr) - eta_star(bl_throughput) = {}",
            num(stars[1] - stars[0])
        ));
    }
    t.note(format!(
        "search interval [{}, {}] tol={}",
        num(ETA_MIN),
        num(ETA_MAX),
        num(tol)
    ));
    t.emit()?;
    Ok(status)
}

fn rel_gap(reference: f64, value: f64) -> Option<f64> {
    (reference != 0.0).then(|| (reference - value) / reference)
}

pub fn compare(
    scenario: &Scenario,
    mc: McConfig,
    pair: Pair,
    var: Variable,
    grid_args: &GridArgs,
    direct_mode: DirectModeArg,
) -> Result<u8> {
    if var == Variable::CodingRate {
        return Err(invalid("variable", "compare sweeps eta or blocklength"));
    }
    let ev = Evaluator::new(scenario, mc)?;
    let grid = resolve_grid(var, grid_args, &ev)?;
    let direct = match direct_mode {
        DirectModeArg::Matched => SchemeKind::DirectMatched,
        DirectModeArg::Weighted => SchemeKind::DirectWeighted,
    };
    let (schemes, metrics): (Vec<SchemeKind>, Vec<Metric>) = match pair {
        Pair::RelayVsDirect => (
            vec![SchemeKind::RelayAvg, direct],
            vec![Metric::BlThroughput, Metric::Msdr],
        ),
        Pair::AvgVsPerfect => (
            vec![
                SchemeKind::RelayAvg,
                SchemeKind::RelayPerfect,
                SchemeKind::ShannonErgodic,
                SchemeKind::Outage,
            ],
            vec![Metric::BlThroughput],
        ),
        Pair::FblVsOutage => (
            vec![
                SchemeKind::RelayAvg,
                SchemeKind::Outage,
                SchemeKind::DirectWeighted,
                SchemeKind::OutageDirect,
            ],
            vec![Metric::BlThroughput],
        ),
    };
    let values = evaluate_grid(&ev, var, &grid, &schemes)?;
    let mut t = sweep_table(var, &grid, &schemes, &metrics, &values);
    let thr = |row: &[PointValues], i: usize| row[i].bl_throughput.unwrap_or(0.0);

    match pair {
        Pair::RelayVsDirect => {
            for m in [Metric::BlThroughput, Metric::Msdr] {
                t.header.push(format!("ratio.{} [1]", m.name()));
            }
            let mut ratios = [Vec::new(), Vec::new()];
            for (cells, row) in t.rows.iter_mut().zip(&values) {
                for (k, m) in [Metric::BlThroughput, Metric::Msdr].into_iter().enumerate() {
                    let (a, b) = (row[0].get(m).unwrap_or(0.0), row[1].get(m).unwrap_or(0.0));
                    let r = (b > 0.0).then(|| a / b);
                    cells.push(opt(r));
                    ratios[k].push((a, b, r));
                }
            }
            for (k, m) in [Metric::BlThroughput, Metric::Msdr].into_iter().enumerate() {
                let strict = ratios[k].iter().filter(|(a, b, _)| a > b).count();
                let ties_zero = ratios[k].iter().filter(|(a, b, _)| *a == 0.0 && *b == 0.0).count();
                let min_ratio = ratios[k].iter().filter_map(|x| x.2).fold(f64::INFINITY, f64::min);
                t.note(format!(
                    "relay_dominates.{}: strict at {strict}/{n} points, both zero at {ties_zero}, direct ahead at {}",
                    m.name(),
                    ratios[k].len() - strict - ties_zero,
                    n = ratios[k].len()
                ));
                if min_ratio.is_finite() {
                    t.note(format!("min_ratio.{} = {}", m.name(), num(min_ratio)));
                }
            }
        }
        Pair::AvgVsPerfect => {
            t.header.push("gap_perfect_to_shannon [1]".into());
            t.header.push("gap_avg_to_outage [1]".into());
            t.header.push("ratio_perfect_to_avg [1]".into());
            let mut perfect_ge = 0;
            let mut slower = 0;
            for (cells, row) in t.rows.iter_mut().zip(&values) {
                let (avg, perfect, erg, out) = (thr(row, 0), thr(row, 1), thr(row, 2), thr(row, 3));
                let gp = rel_gap(erg, perfect);
                let ga = rel_gap(out, avg);
                cells.push(opt(gp));
                cells.push(opt(ga));
                cells.push(opt((avg > 0.0).then(|| perfect / avg)));
                if perfect >= avg {
                    perfect_ge += 1;
                }
                if let (Some(gp), Some(ga)) = (gp, ga) {
                    if gp > ga.abs() {
                        slower += 1;
                    }
                }
            }
            let n = values.len();
            t.note(format!("perfect_ge_avg at {perfect_ge}/{n} points"));
            t.note(format!(
                "gap_perfect_to_shannon exceeds |gap_avg_to_outage| at {slower}/{n} points"
            ));
        }
        Pair::FblVsOutage => {
            t.header.push("gap_relay [1]".into());
            t.header.push("gap_direct [1]".into());
            let mut max_gap = [0.0f64; 2];
            let mut first_converged: [Option<f64>; 2] = [None, None];
            let mut above_outage = [0usize; 2];
            for ((cells, row), &x) in t.rows.iter_mut().zip(&values).zip(&grid) {
                let gaps = [rel_gap(thr(row, 1), thr(row, 0)), rel_gap(thr(row, 3), thr(row, 2))];
                above_outage[0] += (thr(row, 0) > thr(row, 1) + OUTAGE_SLACK) as usize;
                above_outage[1] += (thr(row, 2) > thr(row, 3) + OUTAGE_SLACK) as usize;
                for (k, g) in gaps.iter().enumerate() {
                    cells.push(opt(*g));
                    if let Some(g) = g {
                        max_gap[k] = max_gap[k].max(g.abs());
                        if g.abs() < CONVERGED_GAP && first_converged[k].is_none() {
                            first_converged[k] = Some(x);
                        }
                    }
                }
            }
            for (k, name) in ["relay", "direct"].into_iter().enumerate() {
                t.note(format!(
                    "max_abs_gap.{name} = {} (below {}: {})",
                    num(max_gap[k]),
                    num(CONVERGED_GAP),
                    max_gap[k] < CONVERGED_GAP
                ));
                if above_outage[k] > 0 {
                    log::warn!("{name}: throughput exceeds its outage capacity at {} grid points", above_outage[k]);
                    t.note(format!("throughput_above_outage.{name} at {}/{} points", above_outage[k], grid.len()));
                }
                if var == Variable::Blocklength {
                    t.note(format!(
                        "first blocklength with |gap| below {}: {name} = {}",
                        num(CONVERGED_GAP),
                        first_converged[k].map(num).unwrap_or_else(|| "none".into())
                    ));
                }
            }
        }
    }
    t.note(format!("seed={} mc_samples={}", mc.seed, mc.samples));
    t.emit()?;
    Ok(0)
}

pub fn validate(mc: McConfig, points: usize, sigma: f64) -> Result<u8> {
    if points == 0 {
        return Err(invalid("points", "at least one point is required"));
    }
    if !(sigma > 0.0) {
        return Err(invalid("sigma", format!("{sigma} must be positive")));
    }
    let battery = random_points(mc.seed, points);
    let mut t = Table::new(
        [
            "point",
            "m [cu]",
            "r [bits/cu]",
            "snr1 [1]",
            "snr2 [1]",
            "snr3 [1]",
            "quantity",
            "analytic",
            "mc_mean",
            "mc_std_err",
            "z",
            "pass",
        ]
        .map(String::from)
        .to_vec(),
    );
    let (mut passed, mut total) = (0, 0);
    for (i, p) in battery.iter().enumerate() {
        log::info!("validation point {}/{points}", i + 1);
        for c in check_point(p, mc.samples, mc.seed.wrapping_add(i as u64))? {
            let ok = c.passes(sigma);
            passed += ok as usize;
            total += 1;
            t.rows.push(vec![
                i.to_string(),
                p.m.to_string(),
                num(p.r),
                num(p.gains.g1),
                num(p.gains.g2),
                num(p.gains.g3),
                c.quantity.name().to_string(),
                num(c.analytic),
                num(c.mc_mean),
                num(c.mc_std_err),
                num(c.z_score()),
                ok.to_string(),
            ]);
        }
    }
    t.note(format!("passed {passed}/{total} within {} standard errors", num(sigma)));
    t.note(format!("seed={} mc_samples={}", mc.seed, mc.samples));
    t.emit()?;
    Ok(if passed == total { 0 } else { EXIT_CHECKS_FAILED })
}
