//! Exhaustive enumeration of full realizations.

use crate::model::DicNetwork;
use crate::oracle::OracleError;
use crate::realization::{EdgeDraw, FullRealization};

/// Largest number of realizations (or decision-tree leaves) the oracle will visit.
pub const ENUMERATION_LIMIT: u128 = 1 << 24;

/// `Π_v 2^B · Π_e 2|D_e|`, saturating.
pub fn realization_count(net: &DicNetwork) -> u128 {
    let seeds = 1u128
        .checked_shl((net.node_count() * net.budget()) as u32)
        .unwrap_or(u128::MAX);
    net.edges()
        .iter()
        .fold(seeds, |acc, e| acc.saturating_mul(2 * e.dist.len() as u128))
}

pub fn check_guard(net: &DicNetwork) -> Result<u128, OracleError> {
    let count = realization_count(net);
    if count > ENUMERATION_LIMIT {
        return Err(OracleError::Guard {
            count,
            limit: ENUMERATION_LIMIT,
        });
    }
    Ok(count)
}

/// Every full realization exactly once, with its probability. Impossible realizations
/// (probability 0) are included so the count matches the combinatorial formula.
pub fn enumerate_realizations(
    net: &DicNetwork,
) -> Result<impl Iterator<Item = (FullRealization, f64)> + '_, OracleError> {
    let count = check_guard(net)? as u64;
    let n = net.node_count();
    let b = net.budget();
    let bits = n * b;
    Ok((0..count).map(move |mut index| {
        let seed_mask = index & ((1u64 << bits) - 1);
        index >>= bits;
        let mut prob = 1.0;
        let mut seeds = vec![vec![false; b]; n];
        for v in net.nodes() {
            let p = net.activation(v);
            for (j, slot) in seeds[v.index()].iter_mut().enumerate() {
                *slot = seed_mask >> (v.index() * b + j) & 1 == 1;
                prob *= if *slot { p } else { 1.0 - p };
            }
        }
        let mut draws = Vec::with_capacity(net.edge_count());
        for e in net.edges() {
            let radix = 2 * e.dist.len() as u64;
            let digit = index % radix;
            index /= radix;
            let atom = (digit / 2) as usize;
            let live = digit % 2 == 1;
            let value = e.dist.value(atom);
            prob *= e.dist.mass(atom) * if live { value } else { 1.0 - value };
            draws.push(EdgeDraw {
                atom: atom as u16,
                live,
            });
        }
        let x = FullRealization::new(net, seeds, draws)
            .expect("enumerated realization matches network");
        (x, prob)
    }))
}
