//! Quotient constructions over a label partition: a lumped chain under a
//! chosen representative per block, and interval- or vertex-valued
//! abstractions whose rows capture every member state's behaviour at once.

use std::collections::BTreeSet;

use crate::interval::{sup_distance, IntervalKind, IntervalMatrix, IntervalRow};
use crate::model::{
    abstraction_rows, LabelPartition, LabeledMarkovChain, STOCHASTIC_TOL,
};
use crate::{Error, Result};

fn check_rows(rows: &[Vec<f64>]) -> Result<usize> {
    let first = rows.first().ok_or(Error::DimensionMismatch { expected: 1, got: 0 })?;
    let m = first.len();
    if m == 0 {
        return Err(Error::DimensionMismatch { expected: 1, got: 0 });
    }
    for (i, row) in rows.iter().enumerate() {
        if row.len() != m {
            return Err(Error::DimensionMismatch { expected: m, got: row.len() });
        }
        for (j, &p) in row.iter().enumerate() {
            if p < 0.0 {
                return Err(Error::NegativeEntry { row: i, col: j, value: p });
            }
        }
        let sum: f64 = row.iter().sum();
        if (sum - 1.0).abs() > STOCHASTIC_TOL {
            return Err(Error::NonStochasticRow { row: i, sum });
        }
    }
    Ok(m)
}

/// Worst sup-norm distance from row `j` to the other rows: the error
/// incurred by letting row `j` speak for the whole collection.
pub fn representative_error(rows: &[Vec<f64>], j: usize) -> Result<f64> {
    check_rows(rows)?;
    if j >= rows.len() {
        return Err(Error::IndexOutOfRange(j));
    }
    Ok(rows
        .iter()
        .map(|r| sup_distance(&rows[j], r))
        .fold(0.0, f64::max))
}

/// Half the diameter of the row collection in sup norm: no single
/// distribution can sit closer than this to every row.
pub fn optimal_error(rows: &[Vec<f64>]) -> Result<f64> {
    check_rows(rows)?;
    let mut worst = 0.0f64;
    for (i, a) in rows.iter().enumerate() {
        for b in &rows[i + 1..] {
            worst = worst.max(sup_distance(a, b));
        }
    }
    Ok(worst / 2.0)
}

/// Componentwise min and max over the rows.
pub fn envelope(rows: &[Vec<f64>]) -> Result<IntervalRow> {
    let m = check_rows(rows)?;
    let lower = (0..m)
        .map(|l| rows.iter().map(|r| r[l]).fold(f64::INFINITY, f64::min))
        .collect();
    let upper = (0..m)
        .map(|l| rows.iter().map(|r| r[l]).fold(f64::NEG_INFINITY, f64::max))
        .collect();
    IntervalRow::new(lower, upper)
}

/// The set of distributions within `beta` of every row: per coordinate,
/// at least the envelope max minus `beta` and at most the envelope min
/// plus `beta`. May denote the empty set.
pub fn optimal_set(envelope: &IntervalRow, beta: f64) -> Result<IntervalRow> {
    IntervalRow::new(
        envelope.upper().iter().map(|&u| u - beta).collect(),
        envelope.lower().iter().map(|&v| v + beta).collect(),
    )
}

/// Least `t >= 0` with `sum_l max(0, lower_l - t) <= 1`, by water-filling
/// over the descending prefix sums.
fn slack_lower(lower: &[f64]) -> f64 {
    let mut sorted = lower.to_vec();
    sorted.sort_by(|a, b| b.partial_cmp(a).expect("finite bound"));
    let mut prefix = 0.0;
    let mut t = 0.0f64;
    for (j, &v) in sorted.iter().enumerate() {
        prefix += v;
        t = t.max((prefix - 1.0) / (j + 1) as f64);
    }
    t
}

/// Least `t >= 0` with `sum_l min(1, upper_l + t) >= 1`, walking the
/// saturation breakpoints in ascending order.
fn slack_upper(upper: &[f64]) -> f64 {
    let mut current: f64 = upper.iter().map(|&u| u.min(1.0)).sum();
    if current >= 1.0 {
        return 0.0;
    }
    let mut caps: Vec<f64> = upper.iter().map(|&u| 1.0 - u).filter(|&c| c > 0.0).collect();
    caps.sort_by(|a, b| a.partial_cmp(b).expect("finite bound"));
    let mut prev = 0.0;
    for (idx, &cap) in caps.iter().enumerate() {
        let slope = (caps.len() - idx) as f64;
        let reach = current + slope * (cap - prev);
        if reach >= 1.0 {
            return prev + (1.0 - current) / slope;
        }
        current = reach;
        prev = cap;
    }
    prev
}

/// Outcome of widening an empty common-error set just enough to touch the
/// probability simplex again.
#[derive(Debug, Clone, PartialEq)]
pub struct GammaRelaxation {
    /// Total error radius after widening.
    pub gamma: f64,
    /// The widening amount added on top of the half-diameter.
    pub gamma_prime: f64,
    /// The widened interval row; denotes exactly one distribution.
    pub relaxed_row: IntervalRow,
    /// That single distribution.
    pub r_star: Vec<f64>,
    /// Its worst sup-norm distance to the original rows; never exceeds
    /// `gamma`.
    pub eps_star: f64,
}

/// Widens the per-coordinate bounds of an empty common-error set by the
/// least uniform amount that makes some distribution satisfy them.
pub fn gamma_relaxation(
    rows: &[Vec<f64>],
    beta: f64,
    envelope: &IntervalRow,
) -> Result<GammaRelaxation> {
    check_rows(rows)?;
    let raw_lower: Vec<f64> = envelope.upper().iter().map(|&u| u - beta).collect();
    let raw_upper: Vec<f64> = envelope.lower().iter().map(|&v| v + beta).collect();
    let optimal = IntervalRow::new(raw_lower.clone(), raw_upper.clone())?;
    if optimal.classify() != IntervalKind::Empty {
        return Err(Error::NotApplicable(
            "widening applies only when the common-error set is empty".into(),
        ));
    }
    let t = slack_lower(&raw_lower).max(slack_upper(&raw_upper));
    let relaxed = IntervalRow::new(
        raw_lower.iter().map(|&l| l - t).collect(),
        raw_upper.iter().map(|&u| u + t).collect(),
    )?;
    let lo_gap = (relaxed.lower().iter().sum::<f64>() - 1.0).abs();
    let up_gap = (relaxed.upper().iter().sum::<f64>() - 1.0).abs();
    let r_star = if lo_gap <= up_gap {
        relaxed.lower().to_vec()
    } else {
        relaxed.upper().to_vec()
    };
    let eps_star = rows
        .iter()
        .map(|r| sup_distance(&r_star, r))
        .fold(0.0, f64::max);
    Ok(GammaRelaxation {
        gamma: beta + t,
        gamma_prime: t,
        relaxed_row: relaxed,
        r_star,
        eps_star,
    })
}

/// Everything computed for one block's row collection.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockAbstraction {
    pub rows: Vec<Vec<f64>>,
    pub beta: f64,
    pub envelope: IntervalRow,
    pub optimal_set: IntervalRow,
    pub gamma: Option<f64>,
    pub gamma_prime: Option<f64>,
    pub r_star: Option<Vec<f64>>,
    pub eps_star: Option<f64>,
    /// The interval row the abstraction keeps: the common-error set when
    /// it is non-empty, otherwise the widened row.
    pub chosen_row: IntervalRow,
    /// Error radius certified for the chosen row.
    pub xi: f64,
}

pub fn analyze_block(rows: &[Vec<f64>]) -> Result<BlockAbstraction> {
    let beta = optimal_error(rows)?;
    let env = envelope(rows)?;
    let optimal = optimal_set(&env, beta)?;
    if optimal.classify() != IntervalKind::Empty {
        return Ok(BlockAbstraction {
            rows: rows.to_vec(),
            beta,
            envelope: env,
            optimal_set: optimal.clone(),
            gamma: None,
            gamma_prime: None,
            r_star: None,
            eps_star: None,
            chosen_row: optimal,
            xi: beta,
        });
    }
    let relax = gamma_relaxation(rows, beta, &env)?;
    Ok(BlockAbstraction {
        rows: rows.to_vec(),
        beta,
        envelope: env,
        optimal_set: optimal,
        gamma: Some(relax.gamma),
        gamma_prime: Some(relax.gamma_prime),
        r_star: Some(relax.r_star),
        eps_star: Some(relax.eps_star),
        chosen_row: relax.relaxed_row,
        xi: relax.gamma,
    })
}

/// A quotient chain whose block rows are copied from one representative
/// state each, together with the certified error radius.
#[derive(Debug, Clone, PartialEq)]
pub struct LumpedChain {
    chain: LabeledMarkovChain,
    representative_ids: Vec<String>,
    epsilon: f64,
}

impl LumpedChain {
    pub fn chain(&self) -> &LabeledMarkovChain {
        &self.chain
    }

    pub fn representatives(&self) -> &[String] {
        &self.representative_ids
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }
}

/// Builds the lumped chain. With no representatives given, each block gets
/// the member minimising its representative error, ties resolved towards
/// the earlier state. Explicitly given representatives may arrive in any
/// order; exactly one per block is required.
pub fn build_standard_abstraction(
    chain: &LabeledMarkovChain,
    partition: &LabelPartition,
    representatives: Option<&[String]>,
) -> Result<LumpedChain> {
    let n = partition.n_blocks();
    let block_rows: Vec<Vec<Vec<f64>>> = (0..n)
        .map(|i| abstraction_rows(chain, partition, i))
        .collect::<Result<_>>()?;
    let chosen: Vec<usize> = match representatives {
        Some(ids) => {
            if ids.len() != n {
                return Err(Error::InvalidRepresentative(format!(
                    "expected {n} representatives, got {}",
                    ids.len()
                )));
            }
            let mut slots: Vec<Option<usize>> = vec![None; n];
            for id in ids {
                let s = chain
                    .state_index(id)
                    .map_err(|_| Error::InvalidRepresentative(format!("unknown state `{id}`")))?;
                let b = partition.block_of(s);
                let pos = partition.block(b)?.iter().position(|&t| t == s).expect("member");
                if slots[b].replace(pos).is_some() {
                    return Err(Error::InvalidRepresentative(format!(
                        "block {b} received two representatives"
                    )));
                }
            }
            slots
                .into_iter()
                .enumerate()
                .map(|(b, s)| {
                    s.ok_or_else(|| {
                        Error::InvalidRepresentative(format!("block {b} has no representative"))
                    })
                })
                .collect::<Result<_>>()?
        }
        None => block_rows
            .iter()
            .map(|rows| {
                let mut best = (0usize, f64::INFINITY);
                for j in 0..rows.len() {
                    let e = representative_error(rows, j)?;
                    if e < best.1 {
                        best = (j, e);
                    }
                }
                Ok(best.0)
            })
            .collect::<Result<_>>()?,
    };
    let epsilon = chosen
        .iter()
        .zip(&block_rows)
        .map(|(&j, rows)| representative_error(rows, j))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .fold(0.0, f64::max);
    let names = partition.block_names();
    let matrix: Vec<Vec<f64>> = chosen
        .iter()
        .zip(&block_rows)
        .map(|(&j, rows)| rows[j].clone())
        .collect();
    let initial_block = partition.block_of(chain.initial_index());
    let lumped_distribution = chain.explicit_initial_distribution().map(|dist| {
        partition
            .blocks()
            .iter()
            .map(|b| b.iter().map(|&s| dist[s]).sum())
            .collect()
    });
    let lumped = LabeledMarkovChain::new(
        names.clone(),
        partition.block_labels().to_vec(),
        matrix,
        &names[initial_block],
        lumped_distribution,
    )?;
    let representative_ids = chosen
        .iter()
        .enumerate()
        .map(|(b, &j)| chain.state_id(partition.blocks()[b][j]).to_string())
        .collect();
    Ok(LumpedChain { chain: lumped, representative_ids, epsilon })
}

/// A quotient whose block rows are interval-valued, each annotated with a
/// certified per-block error radius.
#[derive(Debug, Clone, PartialEq)]
pub struct Imdpa {
    block_names: Vec<String>,
    block_labels: Vec<BTreeSet<String>>,
    rows: IntervalMatrix,
    xi: Vec<f64>,
    initial_block: usize,
}

impl Imdpa {
    pub fn new(
        block_names: Vec<String>,
        block_labels: Vec<BTreeSet<String>>,
        rows: IntervalMatrix,
        xi: Vec<f64>,
        initial_block: usize,
    ) -> Result<Self> {
        let n = rows.n();
        if block_names.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: block_names.len() });
        }
        if block_labels.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: block_labels.len() });
        }
        if xi.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: xi.len() });
        }
        if block_names.iter().collect::<BTreeSet<_>>().len() != n {
            return Err(Error::Parse("duplicate block name".into()));
        }
        if let Some(x) = xi.iter().find(|x| !x.is_finite() || **x < 0.0) {
            return Err(Error::Parse(format!("invalid error radius {x}")));
        }
        if initial_block >= n {
            return Err(Error::BlockOutOfRange(initial_block));
        }
        Ok(Self { block_names, block_labels, rows, xi, initial_block })
    }

    pub fn n_blocks(&self) -> usize {
        self.rows.n()
    }

    pub fn block_names(&self) -> &[String] {
        &self.block_names
    }

    pub fn block_labels(&self) -> &[BTreeSet<String>] {
        &self.block_labels
    }

    pub fn rows(&self) -> &IntervalMatrix {
        &self.rows
    }

    pub fn xi(&self) -> &[f64] {
        &self.xi
    }

    pub fn xi_max(&self) -> f64 {
        self.xi.iter().copied().fold(0.0, f64::max)
    }

    pub fn initial_block(&self) -> usize {
        self.initial_block
    }

    pub fn block_index(&self, name: &str) -> Result<usize> {
        self.block_names
            .iter()
            .position(|n| n == name)
            .ok_or_else(|| Error::UnknownState(name.to_string()))
    }
}

/// Builds the interval-valued quotient: per block, the common-error set
/// around its rows, or the widened row when that set is empty.
pub fn build_interval_abstraction(
    chain: &LabeledMarkovChain,
    partition: &LabelPartition,
) -> Result<Imdpa> {
    let n = partition.n_blocks();
    let mut interval_rows = Vec::with_capacity(n);
    let mut xi = Vec::with_capacity(n);
    for i in 0..n {
        let rows = abstraction_rows(chain, partition, i)?;
        let block = analyze_block(&rows)?;
        interval_rows.push(block.chosen_row);
        xi.push(block.xi);
    }
    Imdpa::new(
        partition.block_names(),
        partition.block_labels().to_vec(),
        IntervalMatrix::new(interval_rows)?,
        xi,
        partition.block_of(chain.initial_index()),
    )
}

/// A quotient with finitely many transition rows per block, carrying the
/// same per-block error radii.
#[derive(Debug, Clone, PartialEq)]
pub struct Mdpa {
    block_names: Vec<String>,
    block_labels: Vec<BTreeSet<String>>,
    actions: Vec<Vec<Vec<f64>>>,
    xi: Vec<f64>,
    initial_block: usize,
}

impl Mdpa {
    pub fn new(
        block_names: Vec<String>,
        block_labels: Vec<BTreeSet<String>>,
        actions: Vec<Vec<Vec<f64>>>,
        xi: Vec<f64>,
        initial_block: usize,
    ) -> Result<Self> {
        let n = actions.len();
        if n == 0 {
            return Err(Error::DimensionMismatch { expected: 1, got: 0 });
        }
        if block_names.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: block_names.len() });
        }
        if block_labels.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: block_labels.len() });
        }
        if xi.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: xi.len() });
        }
        if block_names.iter().collect::<BTreeSet<_>>().len() != n {
            return Err(Error::Parse("duplicate block name".into()));
        }
        if let Some(x) = xi.iter().find(|x| !x.is_finite() || **x < 0.0) {
            return Err(Error::Parse(format!("invalid error radius {x}")));
        }
        if initial_block >= n {
            return Err(Error::BlockOutOfRange(initial_block));
        }
        for (b, rows) in actions.iter().enumerate() {
            if rows.is_empty() {
                return Err(Error::InvalidAction(format!("block {b} has no actions")));
            }
            for (a, row) in rows.iter().enumerate() {
                if row.len() != n {
                    return Err(Error::DimensionMismatch { expected: n, got: row.len() });
                }
                if row.iter().any(|&p| p < 0.0) {
                    return Err(Error::InvalidAction(format!(
                        "block {b} action {a} has a negative entry"
                    )));
                }
                let sum: f64 = row.iter().sum();
                if (sum - 1.0).abs() > STOCHASTIC_TOL {
                    return Err(Error::InvalidAction(format!(
                        "block {b} action {a} sums to {sum}"
                    )));
                }
                if rows[..a].iter().any(|prev| sup_distance(prev, row) <= 1e-12) {
                    return Err(Error::InvalidAction(format!(
                        "block {b} action {a} duplicates an earlier action"
                    )));
                }
            }
        }
        Ok(Self { block_names, block_labels, actions, xi, initial_block })
    }

    pub fn n_blocks(&self) -> usize {
        self.actions.len()
    }

    pub fn block_names(&self) -> &[String] {
        &self.block_names
    }

    pub fn block_labels(&self) -> &[BTreeSet<String>] {
        &self.block_labels
    }

    pub fn actions(&self) -> &[Vec<Vec<f64>>] {
        &self.actions
    }

    pub fn xi(&self) -> &[f64] {
        &self.xi
    }

    pub fn xi_max(&self) -> f64 {
        self.xi.iter().copied().fold(0.0, f64::max)
    }

    pub fn initial_block(&self) -> usize {
        self.initial_block
    }

    pub fn block_index(&self, name: &str) -> Result<usize> {
        self.block_names
            .iter()
            .position(|n| n == name)
            .ok_or_else(|| Error::UnknownState(name.to_string()))
    }
}

/// Replaces each interval row by its finitely many extreme distributions.
pub fn imdpa_to_mdpa(imdpa: &Imdpa) -> Result<Mdpa> {
    let actions = imdpa
        .rows()
        .rows()
        .iter()
        .map(|row| row.vertices())
        .collect::<Result<Vec<_>>>()?;
    Mdpa::new(
        imdpa.block_names().to_vec(),
        imdpa.block_labels().to_vec(),
        actions,
        imdpa.xi().to_vec(),
        imdpa.initial_block(),
    )
}
