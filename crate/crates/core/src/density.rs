//! Natural-density bookkeeping for sets of hit levels over a finite horizon.

use std::collections::BTreeSet;
use std::fmt::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{encode_rational, Rational, Scalar};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DensityProfile {
    horizon: usize,
    warmup: usize,
    /// `counts[n - 1] = c_n = |S ∩ [1, n]|`.
    counts: Vec<u64>,
}

pub fn profile<'a>(hits: impl IntoIterator<Item = &'a usize>, horizon: usize, warmup: usize) -> Result<DensityProfile> {
    if horizon == 0 {
        return Err(Error::InvalidArgument("horizon must be at least 1".into()));
    }
    if warmup >= horizon {
        return Err(Error::InvalidArgument(format!(
            "warmup {warmup} must be below horizon {horizon}"
        )));
    }
    let mut marks = vec![false; horizon];
    for &n in hits {
        if n == 0 || n > horizon {
            return Err(Error::InvalidArgument(format!("hit level {n} outside [1, {horizon}]")));
        }
        marks[n - 1] = true;
    }
    let mut c = 0;
    let counts = marks
        .into_iter()
        .map(|m| {
            c += m as u64;
            c
        })
        .collect();
    Ok(DensityProfile {
        horizon,
        warmup,
        counts,
    })
}

impl DensityProfile {
    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn warmup(&self) -> usize {
        self.warmup
    }

    /// `c_n` for `1 ≤ n ≤ horizon`.
    pub fn count(&self, n: usize) -> u64 {
        self.counts[n - 1]
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    /// `r_n = c_n / n`.
    pub fn ratio(&self, n: usize) -> Rational {
        Rational::from_ratio(self.count(n) as i64, n as i64)
    }

    pub fn ratios(&self) -> Vec<Rational> {
        (1..=self.horizon).map(|n| self.ratio(n)).collect()
    }

    pub fn hits(&self) -> BTreeSet<usize> {
        let mut prev = 0;
        let mut out = BTreeSet::new();
        for (i, &c) in self.counts.iter().enumerate() {
            if c > prev {
                out.insert(i + 1);
            }
            prev = c;
        }
        out
    }

    /// Profile of `[1, horizon] \ S` with the same window.
    pub fn complement(&self) -> DensityProfile {
        DensityProfile {
            horizon: self.horizon,
            warmup: self.warmup,
            counts: self
                .counts
                .iter()
                .enumerate()
                .map(|(i, &c)| (i + 1) as u64 - c)
                .collect(),
        }
    }

    fn window(&self) -> impl Iterator<Item = usize> {
        self.warmup.max(1)..=self.horizon
    }

    /// Lines `n,c_n,ratio,ratio_exact`, with a header.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("n,c_n,ratio,ratio_exact\n");
        for n in 1..=self.horizon {
            let r = self.ratio(n);
            writeln!(out, "{n},{},{},{}", self.count(n), Scalar::to_f64(&r), encode_rational(&r)).expect("string write");
        }
        out
    }
}

/// `max_{warmup ≤ n ≤ horizon} r_n`.
pub fn empirical_upper_density(p: &DensityProfile) -> Rational {
    p.window().map(|n| p.ratio(n)).max().expect("non-empty window")
}

/// `min_{warmup ≤ n ≤ horizon} r_n`.
pub fn empirical_lower_density(p: &DensityProfile) -> Rational {
    p.window().map(|n| p.ratio(n)).min().expect("non-empty window")
}
