use serde::Serialize;

use crate::error::{Error, Result};

/// Largest magnitude at which every integer is still an `f64`.
pub(crate) const EXACT_INT_LIMIT: f64 = 9_007_199_254_740_992.0;

/// A nonempty tuple of finite reals, tagged with whether every entry is an
/// integer.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RealVector {
    entries: Vec<f64>,
    is_integral: bool,
}

impl RealVector {
    pub fn new(entries: Vec<f64>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::EmptyVector);
        }
        let mut entries = entries;
        for (index, x) in entries.iter_mut().enumerate() {
            if !x.is_finite() {
                return Err(Error::NonFinite { index, value: *x });
            }
            // -0.0 and 0.0 must count as the same value.
            if *x == 0.0 {
                *x = 0.0;
            }
        }
        let is_integral = entries.iter().all(|x| x.round() == *x);
        Ok(RealVector {
            entries,
            is_integral,
        })
    }

    pub fn from_ints<I: IntoIterator<Item = i64>>(values: I) -> Result<Self> {
        Self::new(values.into_iter().map(|v| v as f64).collect())
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn is_integral(&self) -> bool {
        self.is_integral
    }

    pub fn max(&self) -> f64 {
        self.entries
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.entries.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Fails with the first non-integral entry.
    pub fn require_integral(&self) -> Result<()> {
        if self.is_integral {
            return Ok(());
        }
        let (index, value) = self
            .entries
            .iter()
            .copied()
            .enumerate()
            .find(|(_, x)| x.round() != *x)
            .expect("non-integral vector has a fractional entry");
        Err(Error::NonIntegral { index, value })
    }

    /// Entries as `i64`, failing when the vector is not integral or leaves the
    /// range where `f64` integers are exact.
    pub fn to_i64(&self) -> Result<Vec<i64>> {
        self.require_integral()?;
        self.entries
            .iter()
            .map(|&x| {
                if x.abs() > EXACT_INT_LIMIT {
                    Err(Error::RangeLimit(format!(
                        "integer entry {x} exceeds 2^53 and is not exact"
                    )))
                } else {
                    Ok(x as i64)
                }
            })
            .collect()
    }

    pub fn negated(&self) -> RealVector {
        RealVector {
            entries: self
                .entries
                .iter()
                .map(|&x| if x == 0.0 { 0.0 } else { -x })
                .collect(),
            is_integral: self.is_integral,
        }
    }

    pub fn scaled(&self, factor: f64) -> Result<RealVector> {
        RealVector::new(self.entries.iter().map(|x| x * factor).collect())
    }
}

/// Exact sort-and-count description of a vector: the ground truth every
/// approximation is measured against.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VectorSummary {
    pub max: f64,
    pub min: f64,
    pub distinct_count: usize,
    /// Distinct values, strictly decreasing.
    pub distinct_desc: Vec<f64>,
    /// `multiplicities[i]` counts occurrences of `distinct_desc[i]`.
    pub multiplicities: Vec<usize>,
    /// `gaps[i] = max - distinct_desc[i]`.
    pub gaps: Vec<f64>,
}

impl VectorSummary {
    pub fn multiplicity_of(&self, value: f64) -> usize {
        self.distinct_desc
            .iter()
            .position(|&w| w == value)
            .map_or(0, |i| self.multiplicities[i])
    }

    pub fn max_multiplicity(&self) -> usize {
        self.multiplicities[0]
    }

    pub fn min_multiplicity(&self) -> usize {
        self.multiplicities[self.distinct_count - 1]
    }

    /// Gap between the two largest distinct values, if there are two.
    pub fn second_gap(&self) -> Option<f64> {
        self.gaps.get(1).copied()
    }

    pub fn second_value(&self) -> Option<f64> {
        self.distinct_desc.get(1).copied()
    }

    pub fn len(&self) -> usize {
        self.multiplicities.iter().sum()
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

pub fn summarize(v: &RealVector) -> VectorSummary {
    let mut sorted = v.entries().to_vec();
    sorted.sort_by(|a, b| b.partial_cmp(a).expect("entries are finite"));

    let mut distinct_desc: Vec<f64> = Vec::new();
    let mut multiplicities: Vec<usize> = Vec::new();
    for x in sorted {
        match distinct_desc.last() {
            Some(&last) if last == x => *multiplicities.last_mut().unwrap() += 1,
            _ => {
                distinct_desc.push(x);
                multiplicities.push(1);
            }
        }
    }
    let max = distinct_desc[0];
    let min = *distinct_desc.last().unwrap();
    let gaps = distinct_desc.iter().map(|w| max - w).collect();
    VectorSummary {
        max,
        min,
        distinct_count: distinct_desc.len(),
        distinct_desc,
        multiplicities,
        gaps,
    }
}
