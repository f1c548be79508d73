//! Interval-valued probability rows: each coordinate carries a closed
//! bound pair, and the denoted set is the slice of the probability simplex
//! inside the box.

use crate::model::STOCHASTIC_TOL;
use crate::{Error, Result};

/// Deadband for bound tightening, edge membership, and vertex dedup.
pub const INTERVAL_TOL: f64 = 1e-12;

/// Componentwise sup norm distance between two equal-length vectors.
pub fn sup_distance(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len(), "sup_distance on unequal lengths");
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// What the interval row denotes: no distribution, exactly one, or
/// infinitely many.
#[derive(Debug, Clone, PartialEq)]
pub enum IntervalKind {
    Empty,
    Singleton(Vec<f64>),
    Infinite,
}

/// Per-coordinate probability bounds, stored clamped into `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct IntervalRow {
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl IntervalRow {
    /// Clamps both bound vectors into `[0, 1]` and stores them. Crossed
    /// bounds are representable; they denote the empty set.
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if lower.is_empty() {
            return Err(Error::DimensionMismatch { expected: 1, got: 0 });
        }
        if lower.len() != upper.len() {
            return Err(Error::DimensionMismatch { expected: lower.len(), got: upper.len() });
        }
        let clamp = |v: Vec<f64>| v.into_iter().map(|x| x.clamp(0.0, 1.0)).collect();
        Ok(Self { lower: clamp(lower), upper: clamp(upper) })
    }

    /// Degenerate row whose bounds coincide with the given vector.
    pub fn point(row: &[f64]) -> Result<Self> {
        Self::new(row.to_vec(), row.to_vec())
    }

    #[allow(clippy::len_without_is_empty)]
    pub fn len(&self) -> usize {
        self.lower.len()
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    /// True when no probability vector satisfies the bounds: a crossed
    /// coordinate, lower bounds exceeding total mass one, or upper bounds
    /// failing to reach it.
    pub fn is_empty_set(&self) -> bool {
        let crossed = self
            .lower
            .iter()
            .zip(&self.upper)
            .any(|(&lo, &up)| lo > up + INTERVAL_TOL);
        let lo_sum: f64 = self.lower.iter().sum();
        let up_sum: f64 = self.upper.iter().sum();
        crossed || lo_sum > 1.0 + INTERVAL_TOL || up_sum < 1.0 - INTERVAL_TOL
    }

    /// One simultaneous pass that removes slack no member can use: an
    /// upper bound drops to what the other lower bounds leave over, and a
    /// lower bound rises to what the other upper bounds cannot cover.
    /// Changes outside the deadband only, so the pass is idempotent.
    fn tightened_bounds(&self) -> (Vec<f64>, Vec<f64>) {
        let lo_sum: f64 = self.lower.iter().sum();
        let up_sum: f64 = self.upper.iter().sum();
        let mut lower = self.lower.clone();
        let mut upper = self.upper.clone();
        for i in 0..self.len() {
            let rest_lo = lo_sum - self.lower[i];
            let rest_up = up_sum - self.upper[i];
            if self.upper[i] + rest_lo > 1.0 + INTERVAL_TOL {
                upper[i] = 1.0 - rest_lo;
            }
            if self.lower[i] + rest_up < 1.0 - INTERVAL_TOL {
                lower[i] = 1.0 - rest_up;
            }
        }
        (lower, upper)
    }

    /// The equivalent row with unreachable slack removed. Errors when the
    /// denoted set is empty.
    pub fn tighten(&self) -> Result<Self> {
        if self.is_empty_set() {
            return Err(Error::EmptyInterval);
        }
        let (lower, upper) = self.tightened_bounds();
        Self::new(lower, upper)
    }

    pub fn classify(&self) -> IntervalKind {
        if self.is_empty_set() {
            return IntervalKind::Empty;
        }
        let (lower, upper) = self.tightened_bounds();
        let lo_sum: f64 = lower.iter().sum();
        let up_sum: f64 = upper.iter().sum();
        if (lo_sum - 1.0).abs() <= INTERVAL_TOL {
            return IntervalKind::Singleton(lower);
        }
        if (up_sum - 1.0).abs() <= INTERVAL_TOL {
            return IntervalKind::Singleton(upper);
        }
        let free: Vec<usize> = (0..lower.len())
            .filter(|&i| upper[i] - lower[i] > INTERVAL_TOL)
            .collect();
        if free.len() <= 1 {
            let mut point = lower.clone();
            if let Some(&i) = free.first() {
                point[i] = 1.0 - (lo_sum - lower[i]);
            }
            return IntervalKind::Singleton(point);
        }
        IntervalKind::Infinite
    }

    /// Whether `x` is a probability vector inside the bounds.
    pub fn contains(&self, x: &[f64]) -> Result<bool> {
        if x.len() != self.len() {
            return Err(Error::DimensionMismatch { expected: self.len(), got: x.len() });
        }
        let sum: f64 = x.iter().sum();
        if (sum - 1.0).abs() > STOCHASTIC_TOL {
            return Ok(false);
        }
        Ok(x
            .iter()
            .zip(self.lower.iter().zip(&self.upper))
            .all(|(&v, (&lo, &up))| v >= lo - INTERVAL_TOL && v <= up + INTERVAL_TOL))
    }

    /// Extreme points of the denoted polytope, sorted lexicographically.
    /// At a vertex every coordinate but at most one sits on a bound, so
    /// enumeration fixes all-but-one coordinate at endpoints and solves
    /// the last against total mass one.
    pub fn vertices(&self) -> Result<Vec<Vec<f64>>> {
        let tight = self.tighten()?;
        if let IntervalKind::Singleton(p) = tight.classify() {
            return Ok(vec![p]);
        }
        let m = tight.len();
        let mut verts: Vec<Vec<f64>> = Vec::new();
        for free in 0..m {
            let others: Vec<usize> = (0..m).filter(|&j| j != free).collect();
            for mask in 0u32..(1 << others.len()) {
                let mut v = vec![0.0; m];
                for (bit, &j) in others.iter().enumerate() {
                    v[j] = if mask >> bit & 1 == 1 { tight.upper[j] } else { tight.lower[j] };
                }
                let residual = 1.0 - (v.iter().sum::<f64>() - v[free]);
                if residual < tight.lower[free] - INTERVAL_TOL
                    || residual > tight.upper[free] + INTERVAL_TOL
                {
                    continue;
                }
                // near-degenerate bounds can cross by fp dust; order them
                // before clamping
                let lo = tight.lower[free].min(tight.upper[free]);
                let up = tight.lower[free].max(tight.upper[free]);
                v[free] = residual.clamp(lo, up);
                if !verts.iter().any(|w| sup_distance(w, &v) <= INTERVAL_TOL) {
                    verts.push(v);
                }
            }
        }
        verts.sort_by(|a, b| a.partial_cmp(b).expect("finite coordinates"));
        Ok(verts)
    }
}

/// A square matrix of interval rows, one per source state, each denoting a
/// non-empty set of distributions.
#[derive(Debug, Clone, PartialEq)]
pub struct IntervalMatrix {
    rows: Vec<IntervalRow>,
}

impl IntervalMatrix {
    pub fn new(rows: Vec<IntervalRow>) -> Result<Self> {
        let n = rows.len();
        if n == 0 {
            return Err(Error::DimensionMismatch { expected: 1, got: 0 });
        }
        for row in &rows {
            if row.len() != n {
                return Err(Error::DimensionMismatch { expected: n, got: row.len() });
            }
            if row.is_empty_set() {
                return Err(Error::EmptyInterval);
            }
        }
        Ok(Self { rows })
    }

    pub fn n(&self) -> usize {
        self.rows.len()
    }

    pub fn rows(&self) -> &[IntervalRow] {
        &self.rows
    }

    pub fn row(&self, i: usize) -> Result<&IntervalRow> {
        self.rows.get(i).ok_or(Error::IndexOutOfRange(i))
    }
}
