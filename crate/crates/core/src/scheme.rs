//! Coefficient indices and truncation schemes of the expansion.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::wavelet::{Base, DyadicIndex, WaveletPair};

/// Scaling coefficient ξ_{0k} or detail coefficient η_{jk}.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum CoefficientIndex {
    Scaling { k: i64 },
    Detail { j: u32, k: i64 },
}

impl CoefficientIndex {
    pub fn base(&self) -> Base {
        match self {
            Self::Scaling { .. } => Base::Phi,
            Self::Detail { .. } => Base::Psi,
        }
    }

    pub fn level(&self) -> u32 {
        match *self {
            Self::Scaling { .. } => 0,
            Self::Detail { j, .. } => j,
        }
    }

    pub fn shift(&self) -> i64 {
        match *self {
            Self::Scaling { k } | Self::Detail { k, .. } => k,
        }
    }

    pub fn dyadic(&self) -> DyadicIndex {
        DyadicIndex::new(self.level(), self.shift())
    }

    /// Centre `k / 2^j` of the basis function in time.
    pub fn centre(&self) -> f64 {
        self.shift() as f64 / (self.level() as f64).exp2()
    }

    /// Basis function value at time `t`.
    pub fn eval_time(&self, pair: &WaveletPair, t: f64) -> Result<f64> {
        pair.eval_time(self.base(), self.dyadic(), t)
    }

    /// Short label used in CSV dumps.
    pub fn label(&self) -> String {
        match *self {
            Self::Scaling { k } => format!("xi[{k}]"),
            Self::Detail { j, k } => format!("eta[{j},{k}]"),
        }
    }
}

/// Level count `n`, scaling shift bound `k0` and per-level detail bounds.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawScheme")]
pub struct TruncationScheme {
    n: u32,
    k0: u64,
    kj: Vec<u64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScheme {
    n: u32,
    k0: u64,
    kj: Vec<u64>,
}

impl TryFrom<RawScheme> for TruncationScheme {
    type Error = Error;

    fn try_from(raw: RawScheme) -> Result<Self> {
        Self::new(raw.n, raw.k0, raw.kj)
    }
}

impl TruncationScheme {
    pub fn new(n: u32, k0: u64, kj: Vec<u64>) -> Result<Self> {
        if kj.len() != n as usize {
            return Err(Error::LengthMismatch {
                expected: n as usize,
                got: kj.len(),
            });
        }
        Ok(Self { n, k0, kj })
    }

    /// `k0 = k_j = k` on every level.
    pub fn uniform(n: u32, k: u64) -> Self {
        Self {
            n,
            k0: k,
            kj: vec![k; n as usize],
        }
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn k0(&self) -> u64 {
        self.k0
    }

    pub fn kj(&self) -> &[u64] {
        &self.kj
    }

    /// Largest shift bound over all levels.
    pub fn max_shift(&self) -> u64 {
        self.kj.iter().copied().fold(self.k0, u64::max)
    }

    pub fn count(&self) -> usize {
        (2 * self.k0 as usize + 1) + self.kj.iter().map(|&k| 2 * k as usize + 1).sum::<usize>()
    }

    /// Scaling indices in increasing k, then detail levels in increasing j.
    pub fn indices(&self) -> Vec<CoefficientIndex> {
        let mut out = Vec::with_capacity(self.count());
        let k0 = self.k0 as i64;
        out.extend((-k0..=k0).map(|k| CoefficientIndex::Scaling { k }));
        for (j, &kb) in self.kj.iter().enumerate() {
            let kb = kb as i64;
            out.extend((-kb..=kb).map(|k| CoefficientIndex::Detail { j: j as u32, k }));
        }
        out
    }

    pub fn contains(&self, idx: &CoefficientIndex) -> bool {
        match *idx {
            CoefficientIndex::Scaling { k } => k.unsigned_abs() <= self.k0,
            CoefficientIndex::Detail { j, k } => {
                (j as usize) < self.kj.len() && k.unsigned_abs() <= self.kj[j as usize]
            }
        }
    }
}
