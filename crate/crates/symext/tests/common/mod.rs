//! Shared generators for the integration suites.
#![allow(dead_code)] // each suite uses a subset

use symext::criterion::{boundary_between, f_value};
use symext::states::{random_density, RngSeed};
use symext::DensityOp4;

/// Ginibre draw with the index folded into the base seed.
pub fn ginibre(base: u64, index: u64, rank: usize) -> DensityOp4 {
    random_density::<4>(RngSeed::derive(base, index), rank).expect("valid rank")
}

/// Random full-rank boundary state: bisect f to zero on the segment from 𝕀/4
/// to a non-extendible draw.
pub fn boundary_state(base: u64, index: &mut u64) -> DensityOp4 {
    loop {
        *index += 1;
        let cand = ginibre(base, *index, 4);
        if f_value(&cand).expect("valid state") >= 0.0 {
            continue;
        }
        return boundary_between(&DensityOp4::maximally_mixed(), &cand).expect("bracketed root");
    }
}

/// Random extendible state with f at least `margin`.
pub fn member_state(base: u64, index: &mut u64, margin: f64) -> DensityOp4 {
    loop {
        *index += 1;
        let cand = ginibre(base, *index, 4);
        if f_value(&cand).expect("valid state") >= margin {
            return cand;
        }
    }
}

/// Random rank-deficient member of the extendible set.
pub fn low_rank_member(base: u64, index: &mut u64, rank: usize, margin: f64) -> DensityOp4 {
    loop {
        *index += 1;
        let cand = ginibre(base, *index, rank);
        if f_value(&cand).expect("valid state") >= margin {
            return cand;
        }
    }
}
