#![allow(dead_code)]

use std::collections::BTreeSet;

use imdpa::abstraction::Mdpa;
use imdpa::interval::{sup_distance, IntervalRow};
use imdpa::model::LabeledMarkovChain;
use imdpa::pctl::{Comparison, PathFormula, QueryMode, StateFormula};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn case_study() -> LabeledMarkovChain {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/../../data/case_study.json");
    let json = std::fs::read_to_string(path).expect("case study data file");
    imdpa::format::parse_model(&json).expect("case study parses")
}

pub fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol
}

pub fn rows_close(a: &[Vec<f64>], b: &[Vec<f64>], tol: f64) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| sup_distance(x, y) <= tol)
}

/// Reachability probability of `sat2` through `sat1` within `k` steps,
/// computed by direct recursion over all continuations. Exponential in
/// `k`; only for small instances.
pub fn until_exhaustive(
    chain: &LabeledMarkovChain,
    sat1: &[bool],
    sat2: &[bool],
    k: u32,
    s: usize,
) -> f64 {
    if sat2[s] {
        return 1.0;
    }
    if k == 0 || !sat1[s] {
        return 0.0;
    }
    (0..chain.n_states())
        .map(|t| {
            let p = chain.transition(s, t);
            if p == 0.0 {
                0.0
            } else {
                p * until_exhaustive(chain, sat1, sat2, k - 1, t)
            }
        })
        .sum()
}

/// Probability of staying inside `sat` for `k` steps, by direct
/// recursion over all continuations.
pub fn globally_exhaustive(chain: &LabeledMarkovChain, sat: &[bool], k: u32, s: usize) -> f64 {
    if !sat[s] {
        return 0.0;
    }
    if k == 0 {
        return 1.0;
    }
    (0..chain.n_states())
        .map(|t| {
            let p = chain.transition(s, t);
            if p == 0.0 {
                0.0
            } else {
                p * globally_exhaustive(chain, sat, k - 1, t)
            }
        })
        .sum()
}

fn for_each_sequence(n: usize, k: usize, mut f: impl FnMut(&[usize])) {
    let mut idx = vec![0usize; k];
    loop {
        f(&idx);
        let mut i = 0;
        loop {
            idx[i] += 1;
            if idx[i] < n {
                break;
            }
            idx[i] = 0;
            i += 1;
            if i == k {
                return;
            }
        }
    }
}

/// Trace-set probability by summing over every state sequence of the
/// trace length whose labels match one of the traces.
pub fn trace_set_exhaustive(chain: &LabeledMarkovChain, traces: &[Vec<BTreeSet<String>>]) -> f64 {
    let n = chain.n_states();
    let p0 = chain.initial_distribution();
    let mut total = 0.0;
    for trace in traces {
        let k = trace.len();
        for_each_sequence(n, k, |seq| {
            if (0..k).any(|i| chain.label(seq[i]) != &trace[i]) {
                return;
            }
            let mut w = p0[seq[0]];
            for i in 1..k {
                w *= chain.transition(seq[i - 1], seq[i]);
            }
            total += w;
        });
    }
    total
}

/// Vertices of the distributions inside `row`, found by fixing all but
/// one coordinate at raw endpoints and solving the remaining one against
/// the sum constraint. Works on the untightened bounds, unlike the
/// library, which tightens first.
pub fn vertices_oracle(row: &IntervalRow) -> Vec<Vec<f64>> {
    let m = row.len();
    let lo = row.lower();
    let up = row.upper();
    let mut verts: Vec<Vec<f64>> = Vec::new();
    for free in 0..m {
        let others: Vec<usize> = (0..m).filter(|&j| j != free).collect();
        for mask in 0u32..1 << others.len() {
            let mut v = vec![0.0; m];
            for (bit, &j) in others.iter().enumerate() {
                v[j] = if mask >> bit & 1 == 1 { up[j] } else { lo[j] };
            }
            let residual = 1.0 - others.iter().map(|&j| v[j]).sum::<f64>();
            if residual < lo[free] - 1e-12 || residual > up[free] + 1e-12 {
                continue;
            }
            v[free] = residual.clamp(lo[free], up[free]);
            if !verts.iter().any(|w| sup_distance(w, &v) <= 1e-12) {
                verts.push(v);
            }
        }
    }
    verts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    verts
}

/// Extremal block values for bounded reachability on a quotient, by
/// evaluating every memoryless policy separately and taking the
/// componentwise extremum. Exponential in block count.
pub fn extremal_oracle(
    mdpa: &Mdpa,
    sat1: &[bool],
    sat2: &[bool],
    k: u32,
    maximise: bool,
) -> Vec<f64> {
    let n = mdpa.n_blocks();
    let counts: Vec<usize> = mdpa.actions().iter().map(|a| a.len()).collect();
    let mut policy = vec![0usize; n];
    let mut best: Option<Vec<f64>> = None;
    loop {
        let mut x: Vec<f64> = sat2.iter().map(|&s| if s { 1.0 } else { 0.0 }).collect();
        for _ in 0..k {
            x = (0..n)
                .map(|s| {
                    if sat2[s] {
                        1.0
                    } else if !sat1[s] {
                        0.0
                    } else {
                        mdpa.actions()[s][policy[s]]
                            .iter()
                            .zip(&x)
                            .map(|(p, v)| p * v)
                            .sum()
                    }
                })
                .collect();
        }
        best = Some(match best {
            None => x,
            Some(b) => b
                .iter()
                .zip(&x)
                .map(|(&a, &c)| if maximise { a.max(c) } else { a.min(c) })
                .collect(),
        });
        let mut i = 0;
        loop {
            policy[i] += 1;
            if policy[i] < counts[i] {
                break;
            }
            policy[i] = 0;
            i += 1;
            if i == n {
                return best.unwrap();
            }
        }
    }
}

/// Draws a distribution from a non-empty interval row by walking the
/// coordinates and sampling each inside the range that keeps the rest
/// feasible.
pub fn sample_member(rng: &mut ChaCha8Rng, row: &IntervalRow) -> Vec<f64> {
    let m = row.len();
    let lo = row.lower();
    let up = row.upper();
    let mut v = vec![0.0; m];
    let mut assigned = 0.0;
    for i in 0..m {
        let rest_lo: f64 = lo[i + 1..].iter().sum();
        let rest_up: f64 = up[i + 1..].iter().sum();
        let feas_lo = lo[i].max(1.0 - assigned - rest_up);
        let feas_hi = up[i].min(1.0 - assigned - rest_lo);
        let x = if i == m - 1 {
            (1.0 - assigned).clamp(lo[i], up[i])
        } else if feas_hi - feas_lo < 1e-13 {
            feas_lo
        } else {
            rng.gen_range(feas_lo..=feas_hi)
        };
        v[i] = x;
        assigned += x;
    }
    v
}

pub fn random_stochastic_row(rng: &mut ChaCha8Rng, m: usize) -> Vec<f64> {
    let mut w: Vec<f64> = (0..m).map(|_| rng.gen_range(0.01..1.0)).collect();
    let s: f64 = w.iter().sum();
    for x in &mut w {
        *x /= s;
    }
    w
}

pub fn random_rows(rng: &mut ChaCha8Rng, count: usize, m: usize) -> Vec<Vec<f64>> {
    (0..count).map(|_| random_stochastic_row(rng, m)).collect()
}

pub fn random_chain(rng: &mut ChaCha8Rng, n: usize, atom_count: usize) -> LabeledMarkovChain {
    let ids: Vec<String> = (0..n).map(|i| format!("s{i}")).collect();
    let labels: Vec<BTreeSet<String>> = (0..n)
        .map(|_| BTreeSet::from([format!("l{}", rng.gen_range(0..atom_count))]))
        .collect();
    let matrix: Vec<Vec<f64>> = (0..n).map(|_| random_stochastic_row(rng, n)).collect();
    LabeledMarkovChain::new(ids, labels, matrix, "s0", None).expect("generated chain is valid")
}

/// Interval row centred on a random distribution, so the denoted set is
/// never empty. Roughly a fifth of the coordinates are pinned.
pub fn random_interval_row(rng: &mut ChaCha8Rng, m: usize) -> IntervalRow {
    let c = random_stochastic_row(rng, m);
    let mut lo = Vec::with_capacity(m);
    let mut up = Vec::with_capacity(m);
    for &x in &c {
        if rng.gen_bool(0.2) {
            lo.push(x);
            up.push(x);
        } else {
            lo.push((x - rng.gen_range(0.0..0.25)).max(0.0));
            up.push((x + rng.gen_range(0.0..0.25)).min(1.0));
        }
    }
    IntervalRow::new(lo, up).expect("generated row is valid")
}

const ATOMS: [&str; 5] = ["a", "b", "c", "ok", "fail"];

pub fn random_comparison(rng: &mut ChaCha8Rng) -> Comparison {
    *[Comparison::Lt, Comparison::Le, Comparison::Gt, Comparison::Ge]
        .choose(rng)
        .unwrap()
}

fn random_bound(rng: &mut ChaCha8Rng) -> Option<u32> {
    if rng.gen_bool(0.5) {
        Some(rng.gen_range(0..=9))
    } else {
        None
    }
}

pub fn random_state_formula(rng: &mut ChaCha8Rng, depth: u32) -> StateFormula {
    let pick = if depth == 0 { rng.gen_range(0..2) } else { rng.gen_range(0..6) };
    match pick {
        0 => StateFormula::True,
        1 => StateFormula::Atom(ATOMS.choose(rng).unwrap().to_string()),
        2 => StateFormula::Not(Box::new(random_state_formula(rng, depth - 1))),
        3 => StateFormula::And(
            Box::new(random_state_formula(rng, depth - 1)),
            Box::new(random_state_formula(rng, depth - 1)),
        ),
        _ => StateFormula::Prob {
            cmp: random_comparison(rng),
            threshold: rng.gen_range(0..=1000) as f64 / 1000.0,
            path: Box::new(random_path_formula(rng, depth - 1)),
        },
    }
}

pub fn random_path_formula(rng: &mut ChaCha8Rng, depth: u32) -> PathFormula {
    match rng.gen_range(0..3) {
        0 => PathFormula::Next(random_state_formula(rng, depth)),
        1 => PathFormula::Until {
            lhs: random_state_formula(rng, depth),
            rhs: random_state_formula(rng, depth),
            bound: random_bound(rng),
        },
        _ => PathFormula::Globally {
            inner: random_state_formula(rng, depth),
            bound: random_bound(rng),
        },
    }
}

/// Random top-level formula: half the time a query, otherwise a plain
/// state formula.
pub fn random_query(rng: &mut ChaCha8Rng, depth: u32) -> StateFormula {
    if rng.gen_bool(0.5) {
        let mode = *[QueryMode::Plain, QueryMode::Min, QueryMode::Max]
            .choose(rng)
            .unwrap();
        StateFormula::ProbQuery {
            mode,
            path: Box::new(random_path_formula(rng, depth)),
        }
    } else {
        random_state_formula(rng, depth)
    }
}
