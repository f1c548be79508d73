//! Formula evaluation: exact values on a chain, extremal values over the
//! finitely branching quotient, and the error radii that connect the two.

use std::ops::RangeInclusive;

use crate::abstraction::{
    build_interval_abstraction, build_standard_abstraction, imdpa_to_mdpa, Mdpa,
};
use crate::model::{LabelPartition, LabeledMarkovChain};
use crate::pctl::{
    desugar, parse_formula, PathFormula, QueryMode, StateFormula,
};
use crate::{Error, Result};

/// Residual threshold for unbounded value iteration.
pub const FIXPOINT_TOL: f64 = 1e-10;
/// Iteration cap before unbounded evaluation reports failure.
pub const MAX_ITERATIONS: usize = 1_000_000;

/// Error radius attached to a verdict computed on a quotient.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorBound {
    /// Worst per-block radius of the quotient.
    pub xi: f64,
    /// Step bound of the outermost path operator, when it has one.
    pub k: Option<u32>,
    /// Radius propagated over that many steps.
    pub eps_k: f64,
    /// Worst radius over every probability operator evaluated.
    pub eps_max: f64,
    /// True when the bound no longer constrains anything.
    pub vacuous: bool,
}

/// Outcome of checking one formula against one model.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    /// Per-state (or per-block) verdicts; all true for numeric queries.
    pub sat_set: Vec<bool>,
    /// Per-state values for numeric queries.
    pub values: Option<Vec<f64>>,
    /// Action chosen per block by the optimising evaluation.
    pub policy: Option<Vec<usize>>,
    /// Present when the model is a quotient.
    pub error_bound: Option<ErrorBound>,
}

/// Radius after `k` steps: each step can divert mass `xi`, so the
/// accumulated gap is `1 - (1 - xi)^k`; without a bound the radius is
/// trivial unless `xi` is zero.
pub fn propagate_error(xi: f64, k: Option<u32>) -> f64 {
    match k {
        Some(k) => (1.0 - (1.0 - xi).powi(k as i32)).clamp(0.0, 1.0),
        None => {
            if xi > 0.0 {
                1.0
            } else {
                0.0
            }
        }
    }
}

/// Step bound of the outermost path operator.
pub fn path_bound(path: &PathFormula) -> Option<u32> {
    match path {
        PathFormula::Next(_) => Some(1),
        PathFormula::Until { bound, .. } | PathFormula::Globally { bound, .. } => *bound,
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn indicator(sat: &[bool]) -> Vec<f64> {
    sat.iter().map(|&s| if s { 1.0 } else { 0.0 }).collect()
}

/// Probability of reaching `sat2` through `sat1`, within `bound` steps if
/// given, from every state. Backward iteration from the target indicator.
pub fn until_values(
    chain: &LabeledMarkovChain,
    sat1: &[bool],
    sat2: &[bool],
    bound: Option<u32>,
) -> Result<Vec<f64>> {
    let n = chain.n_states();
    let step = |x: &[f64]| -> Vec<f64> {
        (0..n)
            .map(|s| {
                if sat2[s] {
                    1.0
                } else if !sat1[s] {
                    0.0
                } else {
                    dot(&chain.matrix()[s], x)
                }
            })
            .collect()
    };
    let mut x = indicator(sat2);
    match bound {
        Some(k) => {
            for _ in 0..k {
                x = step(&x);
            }
            Ok(x)
        }
        None => {
            for _ in 0..MAX_ITERATIONS {
                let next = step(&x);
                let residual = x
                    .iter()
                    .zip(&next)
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0, f64::max);
                x = next;
                if residual <= FIXPOINT_TOL {
                    return Ok(x);
                }
            }
            let residual = {
                let next = step(&x);
                x.iter().zip(&next).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
            };
            Err(Error::NonConvergence { iterations: MAX_ITERATIONS, residual })
        }
    }
}

fn eval_sat(chain: &LabeledMarkovChain, f: &StateFormula) -> Result<Vec<bool>> {
    let n = chain.n_states();
    match f {
        StateFormula::True => Ok(vec![true; n]),
        StateFormula::Atom(a) => {
            Ok((0..n).map(|s| chain.label(s).contains(a)).collect())
        }
        StateFormula::Not(inner) => {
            Ok(eval_sat(chain, inner)?.into_iter().map(|b| !b).collect())
        }
        StateFormula::And(l, r) => {
            let lv = eval_sat(chain, l)?;
            let rv = eval_sat(chain, r)?;
            Ok(lv.into_iter().zip(rv).map(|(a, b)| a && b).collect())
        }
        StateFormula::Prob { cmp, threshold, path } => {
            let values = path_values(chain, path)?;
            Ok(values.into_iter().map(|v| cmp.holds(v, *threshold)).collect())
        }
        StateFormula::ProbQuery { .. } => Err(Error::NestedQuery),
    }
}

fn path_values(chain: &LabeledMarkovChain, path: &PathFormula) -> Result<Vec<f64>> {
    match path {
        PathFormula::Next(s) => {
            let ind = indicator(&eval_sat(chain, s)?);
            Ok(chain.matrix().iter().map(|row| dot(row, &ind)).collect())
        }
        PathFormula::Until { lhs, rhs, bound } => {
            let sat1 = eval_sat(chain, lhs)?;
            let sat2 = eval_sat(chain, rhs)?;
            until_values(chain, &sat1, &sat2, *bound)
        }
        PathFormula::Globally { .. } => {
            unreachable!("G is rewritten away before evaluation")
        }
    }
}

/// Checks a formula against a chain. Numeric queries fill `values`;
/// min and max queries coincide with the plain one here, there being no
/// nondeterminism to resolve.
pub fn check_lmc(chain: &LabeledMarkovChain, formula: &StateFormula) -> Result<CheckResult> {
    let d = desugar(formula)?;
    match &d.formula {
        StateFormula::ProbQuery { path, .. } => {
            let mut values = path_values(chain, path)?;
            if d.complemented {
                for v in &mut values {
                    *v = 1.0 - *v;
                }
            }
            Ok(CheckResult {
                sat_set: vec![true; chain.n_states()],
                values: Some(values),
                policy: None,
                error_bound: None,
            })
        }
        other => Ok(CheckResult {
            sat_set: eval_sat(chain, other)?,
            values: None,
            policy: None,
            error_bound: None,
        }),
    }
}

fn optimise(actions: &[Vec<f64>], x: &[f64], maximise: bool) -> (f64, usize) {
    let mut best_v = dot(&actions[0], x);
    let mut best_a = 0;
    for (a, row) in actions.iter().enumerate().skip(1) {
        let v = dot(row, x);
        let better = if maximise { v > best_v } else { v < best_v };
        if better {
            best_v = v;
            best_a = a;
        }
    }
    (best_v, best_a)
}

/// Extremal probability of reaching `sat2` through `sat1` on the
/// quotient, per block, together with the action each block preferred in
/// the final iteration. Each step optimises independently.
pub fn mdpa_until_values(
    mdpa: &Mdpa,
    sat1: &[bool],
    sat2: &[bool],
    bound: Option<u32>,
    maximise: bool,
) -> Result<(Vec<f64>, Vec<usize>)> {
    let n = mdpa.n_blocks();
    let step = |x: &[f64]| -> (Vec<f64>, Vec<usize>) {
        let mut next = vec![0.0; n];
        let mut pol = vec![0usize; n];
        for b in 0..n {
            if sat2[b] {
                next[b] = 1.0;
            } else if sat1[b] {
                let (v, a) = optimise(&mdpa.actions()[b], x, maximise);
                next[b] = v;
                pol[b] = a;
            }
        }
        (next, pol)
    };
    let mut x = indicator(sat2);
    match bound {
        Some(k) => {
            let mut pol = vec![0usize; n];
            for _ in 0..k {
                let (nx, np) = step(&x);
                x = nx;
                pol = np;
            }
            Ok((x, pol))
        }
        None => {
            for _ in 0..MAX_ITERATIONS {
                let (next, pol) = step(&x);
                let residual = x
                    .iter()
                    .zip(&next)
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0, f64::max);
                x = next;
                if residual <= FIXPOINT_TOL {
                    return Ok((x, pol));
                }
            }
            let residual = {
                let (next, _) = step(&x);
                x.iter().zip(&next).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
            };
            Err(Error::NonConvergence { iterations: MAX_ITERATIONS, residual })
        }
    }
}

fn eval_sat_mdpa(mdpa: &Mdpa, f: &StateFormula, worst: &mut f64) -> Result<Vec<bool>> {
    let n = mdpa.n_blocks();
    match f {
        StateFormula::True => Ok(vec![true; n]),
        StateFormula::Atom(a) => {
            Ok((0..n).map(|b| mdpa.block_labels()[b].contains(a)).collect())
        }
        StateFormula::Not(inner) => {
            Ok(eval_sat_mdpa(mdpa, inner, worst)?.into_iter().map(|b| !b).collect())
        }
        StateFormula::And(l, r) => {
            let lv = eval_sat_mdpa(mdpa, l, worst)?;
            let rv = eval_sat_mdpa(mdpa, r, worst)?;
            Ok(lv.into_iter().zip(rv).map(|(a, b)| a && b).collect())
        }
        StateFormula::Prob { cmp, threshold, path } => {
            let eps = propagate_error(mdpa.xi_max(), path_bound(path));
            *worst = worst.max(eps);
            // a lower-bound comparator is checked against the best value
            // discounted by the radius, an upper-bound one against the
            // worst value inflated by it
            let maximise = matches!(cmp, crate::pctl::Comparison::Gt | crate::pctl::Comparison::Ge);
            let (values, _) = extremal_inner(mdpa, path, maximise, worst)?;
            Ok(values
                .into_iter()
                .map(|v| {
                    let adjusted = if maximise { v - eps } else { v + eps };
                    cmp.holds(adjusted.clamp(0.0, 1.0), *threshold)
                })
                .collect())
        }
        StateFormula::ProbQuery { .. } => Err(Error::NestedQuery),
    }
}

fn extremal_inner(
    mdpa: &Mdpa,
    path: &PathFormula,
    maximise: bool,
    worst: &mut f64,
) -> Result<(Vec<f64>, Vec<usize>)> {
    match path {
        PathFormula::Next(s) => {
            let ind = indicator(&eval_sat_mdpa(mdpa, s, worst)?);
            let mut values = Vec::with_capacity(mdpa.n_blocks());
            let mut policy = Vec::with_capacity(mdpa.n_blocks());
            for actions in mdpa.actions() {
                let (v, a) = optimise(actions, &ind, maximise);
                values.push(v);
                policy.push(a);
            }
            Ok((values, policy))
        }
        PathFormula::Until { lhs, rhs, bound } => {
            let sat1 = eval_sat_mdpa(mdpa, lhs, worst)?;
            let sat2 = eval_sat_mdpa(mdpa, rhs, worst)?;
            mdpa_until_values(mdpa, &sat1, &sat2, *bound, maximise)
        }
        PathFormula::Globally { inner, bound } => {
            let stay = eval_sat_mdpa(mdpa, inner, worst)?;
            let leave: Vec<bool> = stay.iter().map(|&b| !b).collect();
            let all_true = vec![true; mdpa.n_blocks()];
            let (values, policy) = mdpa_until_values(mdpa, &all_true, &leave, *bound, !maximise)?;
            Ok((values.into_iter().map(|v| 1.0 - v).collect(), policy))
        }
    }
}

/// Extremal path probability per block, with the action each block's
/// final iteration preferred. Optimising `G` delegates to the
/// complemented reachability with the opposite objective.
pub fn extremal_probability(
    mdpa: &Mdpa,
    path: &PathFormula,
    mode: QueryMode,
) -> Result<(Vec<f64>, Vec<usize>)> {
    let maximise = match mode {
        QueryMode::Plain => {
            return Err(Error::NotApplicable(
                "plain queries need a single chain; ask for Pmin=? or Pmax=?".into(),
            ))
        }
        QueryMode::Min => false,
        QueryMode::Max => true,
    };
    let mut worst = 0.0;
    extremal_inner(mdpa, path, maximise, &mut worst)
}

/// Checks a formula against the quotient. Numeric queries must pick a
/// side; threshold operators compare the side their comparator needs,
/// adjusted by the propagated radius.
pub fn check_mdpa(mdpa: &Mdpa, formula: &StateFormula) -> Result<CheckResult> {
    let d = desugar(formula)?;
    let xi = mdpa.xi_max();
    let mut worst = 0.0f64;
    match &d.formula {
        StateFormula::ProbQuery { mode, path } => {
            let maximise = match mode {
                QueryMode::Plain => {
                    return Err(Error::NotApplicable(
                        "plain queries need a single chain; ask for Pmin=? or Pmax=?".into(),
                    ))
                }
                QueryMode::Min => false,
                QueryMode::Max => true,
            };
            let k = path_bound(path);
            let eps_k = propagate_error(xi, k);
            worst = worst.max(eps_k);
            let (mut values, policy) = extremal_inner(mdpa, path, maximise, &mut worst)?;
            if d.complemented {
                for v in &mut values {
                    *v = 1.0 - *v;
                }
            }
            Ok(CheckResult {
                sat_set: vec![true; mdpa.n_blocks()],
                values: Some(values),
                policy: Some(policy),
                error_bound: Some(ErrorBound {
                    xi,
                    k,
                    eps_k,
                    eps_max: worst,
                    vacuous: worst >= 1.0,
                }),
            })
        }
        other => {
            let sat = eval_sat_mdpa(mdpa, other, &mut worst)?;
            let (k, eps_k) = match other {
                StateFormula::Prob { path, .. } => {
                    let k = path_bound(path);
                    (k, propagate_error(xi, k))
                }
                _ => (None, worst),
            };
            Ok(CheckResult {
                sat_set: sat,
                values: None,
                policy: None,
                error_bound: Some(ErrorBound {
                    xi,
                    k,
                    eps_k,
                    eps_max: worst,
                    vacuous: worst >= 1.0,
                }),
            })
        }
    }
}

/// One row of the side-by-side comparison of both quotients against the
/// concrete chain.
#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonRow {
    pub k: u32,
    pub p_concrete: f64,
    pub std_p: f64,
    pub std_lo: f64,
    pub std_hi: f64,
    pub mdpa_pmin: f64,
    pub mdpa_pmax: f64,
    pub mdpa_lo: f64,
    pub mdpa_hi: f64,
    pub eps_k: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonTable {
    pub rows: Vec<ComparisonRow>,
}

/// Replaces every `K` outside quoted atoms with the step count.
pub fn substitute_k(template: &str, k: u32) -> String {
    let mut out = String::new();
    let mut in_quotes = false;
    for c in template.chars() {
        if c == '"' {
            in_quotes = !in_quotes;
            out.push(c);
        } else if c == 'K' && !in_quotes {
            out.push_str(&k.to_string());
        } else {
            out.push(c);
        }
    }
    out
}

fn initial_value(chain: &LabeledMarkovChain, values: &[f64]) -> f64 {
    dot(&chain.initial_distribution(), values)
}

/// Sweeps the step parameter through a path template and tabulates, per
/// step count: the concrete value, the lumped chain's value with its
/// propagated band, and the quotient's extremal values with theirs.
pub fn compare_abstractions(
    chain: &LabeledMarkovChain,
    partition: &LabelPartition,
    template: &str,
    ks: RangeInclusive<u32>,
) -> Result<ComparisonTable> {
    let lumped = build_standard_abstraction(chain, partition, None)?;
    let mdpa = imdpa_to_mdpa(&build_interval_abstraction(chain, partition)?)?;
    let mut rows = Vec::new();
    for k in ks {
        let path_text = substitute_k(template, k);
        let plain = parse_formula(&format!("P=? [ {path_text} ]"))?;
        let bound = match &plain {
            StateFormula::ProbQuery { path, .. } => path_bound(path),
            _ => None,
        };
        let concrete = check_lmc(chain, &plain)?;
        let p_concrete = initial_value(chain, concrete.values.as_ref().expect("query values"));
        let std = check_lmc(lumped.chain(), &plain)?;
        let std_p = initial_value(lumped.chain(), std.values.as_ref().expect("query values"));
        let std_eps = propagate_error(lumped.epsilon(), bound);
        let pmin_f = parse_formula(&format!("Pmin=? [ {path_text} ]"))?;
        let pmax_f = parse_formula(&format!("Pmax=? [ {path_text} ]"))?;
        let rmin = check_mdpa(&mdpa, &pmin_f)?;
        let rmax = check_mdpa(&mdpa, &pmax_f)?;
        let mdpa_pmin = rmin.values.as_ref().expect("query values")[mdpa.initial_block()];
        let mdpa_pmax = rmax.values.as_ref().expect("query values")[mdpa.initial_block()];
        let eps_k = propagate_error(mdpa.xi_max(), bound);
        rows.push(ComparisonRow {
            k,
            p_concrete,
            std_p,
            std_lo: (std_p - std_eps).clamp(0.0, 1.0),
            std_hi: (std_p + std_eps).clamp(0.0, 1.0),
            mdpa_pmin,
            mdpa_pmax,
            mdpa_lo: (mdpa_pmin - eps_k).clamp(0.0, 1.0),
            mdpa_hi: (mdpa_pmax + eps_k).clamp(0.0, 1.0),
            eps_k,
        });
    }
    Ok(ComparisonTable { rows })
}
