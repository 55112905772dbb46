//! Computational-basis enumeration for symmetry sectors.
//!
//! Site `i` is bit `i` of a pattern; a set bit is spin up. States of a
//! total-Sz sector are stored in ascending pattern order, which coincides
//! with the colexicographic order of the up-spin positions, so the rank of a
//! pattern is `Σ_k C(p_k, k + 1)` over its up positions `p_0 < p_1 < …`.

use crate::error::{Error, Result};
use crate::model::{ModelKind, ModelSpec};

/// Default cap on basis dimension.
pub const DEFAULT_DIMENSION_CAP: usize = 5_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Conservation {
    /// Fixed total Sz, stored as the integer `2 Sz`.
    TotalSz { two_sz: i32 },
    None,
}

#[derive(Debug, Clone)]
pub struct SymmetrySector {
    sites: usize,
    conserved: Conservation,
    states: Vec<u64>,
    /// `binom[n][k]` for `n <= sites`.
    binom: Vec<Vec<u64>>,
}

fn binomial_table(n: usize) -> Vec<Vec<u64>> {
    let mut t = vec![vec![0u64; n + 2]; n + 1];
    for i in 0..=n {
        t[i][0] = 1;
        for k in 1..=i {
            t[i][k] = t[i - 1][k - 1] + if k < i { t[i - 1][k] } else { 0 };
        }
    }
    t
}

pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc
}

/// Total-Sz sector `sz = two_sz / 2` of a chain model, with the default cap.
pub fn sector_basis(spec: &ModelSpec, two_sz: i32) -> Result<SymmetrySector> {
    sector_basis_capped(spec, two_sz, DEFAULT_DIMENSION_CAP)
}

pub fn sector_basis_capped(spec: &ModelSpec, two_sz: i32, cap: usize) -> Result<SymmetrySector> {
    let l = spec.sites;
    if two_sz.unsigned_abs() as usize > l || (two_sz.rem_euclid(2) as usize) != l % 2 {
        return Err(Error::EmptySector { sites: l, two_sz });
    }
    let n_up = ((l as i32 + two_sz) / 2) as usize;
    let dimension = binomial(l, n_up);
    if dimension > cap as u128 {
        return Err(Error::CapacityExceeded { dimension, cap });
    }
    let mut states = Vec::with_capacity(dimension as usize);
    if n_up == 0 {
        states.push(0);
    } else {
        // Gosper's hack walks fixed-popcount patterns in ascending order.
        let mut s: u64 = (1u64 << n_up) - 1;
        let limit: u64 = 1u64 << l;
        while s < limit {
            states.push(s);
            let c = s & s.wrapping_neg();
            let r = s + c;
            s = (((r ^ s) >> 2) / c) | r;
        }
    }
    debug_assert_eq!(states.len() as u128, dimension);
    Ok(SymmetrySector {
        sites: l,
        conserved: Conservation::TotalSz { two_sz },
        states,
        binom: binomial_table(l),
    })
}

/// The whole `2^L` space, no conserved quantity.
pub fn full_space(spec: &ModelSpec) -> Result<SymmetrySector> {
    full_space_capped(spec, DEFAULT_DIMENSION_CAP)
}

pub fn full_space_capped(spec: &ModelSpec, cap: usize) -> Result<SymmetrySector> {
    let dimension = 1u128 << spec.sites;
    if dimension > cap as u128 {
        return Err(Error::CapacityExceeded { dimension, cap });
    }
    Ok(SymmetrySector {
        sites: spec.sites,
        conserved: Conservation::None,
        states: (0..dimension as u64).collect(),
        binom: Vec::new(),
    })
}

/// Sector used when none is requested: Sz = 0 for XXZ, full space otherwise.
/// XXZ with an odd number of sites has no Sz = 0 sector and is rejected.
pub fn default_sector(spec: &ModelSpec) -> Result<SymmetrySector> {
    default_sector_capped(spec, DEFAULT_DIMENSION_CAP)
}

pub fn default_sector_capped(spec: &ModelSpec, cap: usize) -> Result<SymmetrySector> {
    match spec.kind {
        ModelKind::Xxz => {
            if spec.sites % 2 == 1 {
                return Err(Error::SectorMismatch(format!(
                    "XXZ ground states are searched in Sz = 0, which needs even L (got {})",
                    spec.sites
                )));
            }
            sector_basis_capped(spec, 0, cap)
        }
        _ => full_space_capped(spec, cap),
    }
}

impl SymmetrySector {
    pub fn sites(&self) -> usize {
        self.sites
    }

    pub fn conserved(&self) -> Conservation {
        self.conserved
    }

    pub fn dimension(&self) -> usize {
        self.states.len()
    }

    pub fn states(&self) -> &[u64] {
        &self.states
    }

    pub fn unrank(&self, index: usize) -> u64 {
        self.states[index]
    }

    /// Index of `pattern` in the sector, `None` if it lies outside.
    pub fn rank(&self, pattern: u64) -> Option<usize> {
        if pattern >> self.sites != 0 {
            return None;
        }
        match self.conserved {
            Conservation::None => Some(pattern as usize),
            Conservation::TotalSz { two_sz } => {
                let n_up = ((self.sites as i32 + two_sz) / 2) as u32;
                if pattern.count_ones() != n_up {
                    return None;
                }
                let mut rank = 0u64;
                let mut k = 0usize;
                let mut bits = pattern;
                while bits != 0 {
                    let p = bits.trailing_zeros() as usize;
                    k += 1;
                    rank += self.binom[p][k];
                    bits &= bits - 1;
                }
                Some(rank as usize)
            }
        }
    }

    /// Permutation `perm[i] = rank(T unrank(i))` for the cyclic shift
    /// `T: site j -> site j + 1 (mod L)`.
    pub fn translation_permutation(&self) -> Vec<usize> {
        let l = self.sites;
        let mask = (1u64 << l) - 1;
        self.states
            .iter()
            .map(|&s| {
                let t = ((s << 1) | (s >> (l - 1))) & mask;
                self.rank(t).expect("translation preserves total Sz")
            })
            .collect()
    }
}
