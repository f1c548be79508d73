//! Labelled Markov chains: validation, block masses, path and trace
//! probabilities, and the label-induced state partition.

use std::collections::{BTreeMap, BTreeSet};

use crate::{Error, Result};

/// Tolerance for row sums and distribution sums.
pub const STOCHASTIC_TOL: f64 = 1e-9;

/// A finite Markov chain whose states carry observation label sets.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledMarkovChain {
    states: Vec<String>,
    labels: Vec<BTreeSet<String>>,
    matrix: Vec<Vec<f64>>,
    initial: usize,
    initial_distribution: Option<Vec<f64>>,
    index: BTreeMap<String, usize>,
}

impl LabeledMarkovChain {
    /// Validates and builds a chain: one label set per state, square
    /// row-stochastic matrix, known initial state, and (if given) a proper
    /// start distribution.
    pub fn new(
        states: Vec<String>,
        labels: Vec<BTreeSet<String>>,
        matrix: Vec<Vec<f64>>,
        initial_state: &str,
        initial_distribution: Option<Vec<f64>>,
    ) -> Result<Self> {
        let n = states.len();
        if n == 0 {
            return Err(Error::DimensionMismatch { expected: 1, got: 0 });
        }
        if labels.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: labels.len() });
        }
        if matrix.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: matrix.len() });
        }
        let mut index = BTreeMap::new();
        for (i, id) in states.iter().enumerate() {
            if index.insert(id.clone(), i).is_some() {
                return Err(Error::Parse(format!("duplicate state id `{id}`")));
            }
        }
        for (i, row) in matrix.iter().enumerate() {
            if row.len() != n {
                return Err(Error::DimensionMismatch { expected: n, got: row.len() });
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
        let initial = *index
            .get(initial_state)
            .ok_or_else(|| Error::UnknownState(initial_state.to_string()))?;
        if let Some(dist) = &initial_distribution {
            if dist.len() != n {
                return Err(Error::DimensionMismatch { expected: n, got: dist.len() });
            }
            if let Some(p) = dist.iter().find(|p| **p < 0.0) {
                return Err(Error::InvalidDistribution(format!("has negative entry {p}")));
            }
            let sum: f64 = dist.iter().sum();
            if (sum - 1.0).abs() > STOCHASTIC_TOL {
                return Err(Error::InvalidDistribution(format!("sums to {sum}")));
            }
        }
        Ok(Self { states, labels, matrix, initial, initial_distribution, index })
    }

    pub fn n_states(&self) -> usize {
        self.states.len()
    }

    pub fn state_ids(&self) -> &[String] {
        &self.states
    }

    pub fn state_id(&self, i: usize) -> &str {
        &self.states[i]
    }

    pub fn state_index(&self, id: &str) -> Result<usize> {
        self.index.get(id).copied().ok_or_else(|| Error::UnknownState(id.to_string()))
    }

    pub fn label(&self, i: usize) -> &BTreeSet<String> {
        &self.labels[i]
    }

    pub fn labels(&self) -> &[BTreeSet<String>] {
        &self.labels
    }

    pub fn matrix(&self) -> &[Vec<f64>] {
        &self.matrix
    }

    pub fn transition(&self, from: usize, to: usize) -> f64 {
        self.matrix[from][to]
    }

    pub fn initial_index(&self) -> usize {
        self.initial
    }

    pub fn initial_state(&self) -> &str {
        &self.states[self.initial]
    }

    pub fn explicit_initial_distribution(&self) -> Option<&[f64]> {
        self.initial_distribution.as_deref()
    }

    /// The start distribution: the explicit one if present, otherwise a
    /// point mass on the initial state.
    pub fn initial_distribution(&self) -> Vec<f64> {
        match &self.initial_distribution {
            Some(d) => d.clone(),
            None => {
                let mut d = vec![0.0; self.n_states()];
                d[self.initial] = 1.0;
                d
            }
        }
    }

    /// Total transition mass from `s` into the state set `q`.
    pub fn block_probability(&self, s: &str, q: &[&str]) -> Result<f64> {
        let i = self.state_index(s)?;
        let mut targets = BTreeSet::new();
        for id in q {
            targets.insert(self.state_index(id)?);
        }
        Ok(targets.iter().map(|&j| self.matrix[i][j]).sum())
    }

    pub(crate) fn mass(&self, s: usize, block: &[usize]) -> f64 {
        block.iter().map(|&t| self.matrix[s][t]).sum()
    }

    /// Product of the transition probabilities along the path; 1 for a
    /// single state.
    pub fn path_probability(&self, path: &Path) -> f64 {
        path.indices().windows(2).map(|w| self.matrix[w[0]][w[1]]).product()
    }

    /// Probability that the chain, started from its initial distribution,
    /// emits one of the given label sequences. Computed by a layered pass
    /// per trace: states contribute only while their labels match the
    /// trace position.
    pub fn trace_set_probability(&self, traces: &TraceSet) -> f64 {
        let n = self.n_states();
        let p0 = self.initial_distribution();
        let mut total = 0.0;
        for trace in traces.traces() {
            let mut w: Vec<f64> = (0..n)
                .map(|s| if self.labels[s] == trace[0] { p0[s] } else { 0.0 })
                .collect();
            for step in &trace[1..] {
                let mut next = vec![0.0; n];
                for s in 0..n {
                    if w[s] == 0.0 {
                        continue;
                    }
                    for t in 0..n {
                        if self.labels[t] == *step {
                            next[t] += w[s] * self.matrix[s][t];
                        }
                    }
                }
                w = next;
            }
            total += w.iter().sum::<f64>();
        }
        total
    }
}

/// A state sequence following transitions of strictly positive probability.
#[derive(Debug, Clone, PartialEq)]
pub struct Path(Vec<usize>);

impl Path {
    pub fn new(chain: &LabeledMarkovChain, states: &[&str]) -> Result<Self> {
        if states.is_empty() {
            return Err(Error::EmptyPath);
        }
        let mut idx = Vec::with_capacity(states.len());
        for id in states {
            idx.push(chain.state_index(id)?);
        }
        for w in idx.windows(2) {
            if chain.transition(w[0], w[1]) <= 0.0 {
                return Err(Error::ZeroProbabilityStep {
                    from: chain.state_id(w[0]).to_string(),
                    to: chain.state_id(w[1]).to_string(),
                });
            }
        }
        Ok(Self(idx))
    }

    pub fn indices(&self) -> &[usize] {
        &self.0
    }
}

/// A set of equal-length label sequences.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceSet {
    traces: Vec<Vec<BTreeSet<String>>>,
}

impl TraceSet {
    /// Duplicates are dropped; all traces must share one nonzero length.
    pub fn new(traces: Vec<Vec<BTreeSet<String>>>) -> Result<Self> {
        if let Some(first) = traces.first() {
            let k = first.len();
            if k == 0 || traces.iter().any(|t| t.len() != k) {
                return Err(Error::LengthMismatch);
            }
        }
        let set: BTreeSet<_> = traces.into_iter().collect();
        Ok(Self { traces: set.into_iter().collect() })
    }

    /// Convenience constructor from singleton-label words, one character
    /// per position.
    pub fn from_words(words: &[&str]) -> Result<Self> {
        let traces = words
            .iter()
            .map(|w| {
                w.chars()
                    .map(|c| BTreeSet::from([c.to_string()]))
                    .collect::<Vec<_>>()
            })
            .collect();
        Self::new(traces)
    }

    pub fn traces(&self) -> &[Vec<BTreeSet<String>>] {
        &self.traces
    }

    pub fn len(&self) -> usize {
        self.traces.len()
    }

    pub fn is_empty(&self) -> bool {
        self.traces.is_empty()
    }
}

/// The partition of the state space into maximal same-label blocks, ordered
/// by first occurrence in state order.
#[derive(Debug, Clone, PartialEq)]
pub struct LabelPartition {
    blocks: Vec<Vec<usize>>,
    block_labels: Vec<BTreeSet<String>>,
    block_of: Vec<usize>,
}

pub fn partition_by_labels(chain: &LabeledMarkovChain) -> LabelPartition {
    let mut blocks: Vec<Vec<usize>> = Vec::new();
    let mut block_labels: Vec<BTreeSet<String>> = Vec::new();
    let mut block_of = vec![0usize; chain.n_states()];
    for s in 0..chain.n_states() {
        let lab = chain.label(s);
        match block_labels.iter().position(|l| l == lab) {
            Some(b) => {
                blocks[b].push(s);
                block_of[s] = b;
            }
            None => {
                block_of[s] = blocks.len();
                blocks.push(vec![s]);
                block_labels.push(lab.clone());
            }
        }
    }
    LabelPartition { blocks, block_labels, block_of }
}

impl LabelPartition {
    pub fn n_blocks(&self) -> usize {
        self.blocks.len()
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    pub fn block(&self, i: usize) -> Result<&[usize]> {
        self.blocks.get(i).map(|b| b.as_slice()).ok_or(Error::BlockOutOfRange(i))
    }

    pub fn block_label(&self, i: usize) -> &BTreeSet<String> {
        &self.block_labels[i]
    }

    pub fn block_labels(&self) -> &[BTreeSet<String>] {
        &self.block_labels
    }

    pub fn block_of(&self, s: usize) -> usize {
        self.block_of[s]
    }

    /// Display names for blocks: `S_` plus the sorted atoms joined by `+`
    /// (`S_empty` for an empty label set), deduplicated deterministically.
    pub fn block_names(&self) -> Vec<String> {
        let mut used = BTreeSet::new();
        let mut names = Vec::with_capacity(self.blocks.len());
        for labels in &self.block_labels {
            let base = if labels.is_empty() {
                "S_empty".to_string()
            } else {
                format!("S_{}", labels.iter().cloned().collect::<Vec<_>>().join("+"))
            };
            let mut name = base.clone();
            let mut suffix = 2;
            while !used.insert(name.clone()) {
                name = format!("{base}_{suffix}");
                suffix += 1;
            }
            names.push(name);
        }
        names
    }
}

/// The block-mass rows of block `i`: one vector per member state, entry `j`
/// holding that state's total mass into block `j`.
pub fn abstraction_rows(
    chain: &LabeledMarkovChain,
    partition: &LabelPartition,
    i: usize,
) -> Result<Vec<Vec<f64>>> {
    let block = partition.block(i)?;
    Ok(block
        .iter()
        .map(|&s| partition.blocks().iter().map(|b| chain.mass(s, b)).collect())
        .collect())
}
