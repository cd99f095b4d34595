//! Linear-layout constraint on CZ layers.
//!
//! `order[q]` is the position of qubit `q` in the row of atoms. Within a
//! layer, sorting gates by their left end must also sort their right ends:
//! no gate interval may sit strictly inside another.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

const EXHAUSTIVE_MAX: usize = 8;
const SEARCH_MAX: usize = 20;
const RESTARTS: u64 = 32;
const MOVES_PER_RESTART: usize = 20_000;

/// Number of nested gate pairs across all layers under `order`.
pub fn violations(layers: &[Vec<(usize, usize)>], order: &[usize]) -> usize {
    let mut bad = 0;
    for layer in layers {
        let mut iv: Vec<(usize, usize)> = layer
            .iter()
            .map(|&(a, b)| {
                let (pa, pb) = (order[a], order[b]);
                (pa.min(pb), pa.max(pb))
            })
            .collect();
        iv.sort_unstable();
        for i in 0..iv.len() {
            for j in i + 1..iv.len() {
                if iv[j].1 <= iv[i].1 {
                    bad += 1;
                }
            }
        }
    }
    bad
}

pub fn check_order(layers: &[Vec<(usize, usize)>], order: &[usize]) -> bool {
    violations(layers, order) == 0
}

fn displacement(order: &[usize]) -> usize {
    order.iter().enumerate().map(|(q, &p)| q.abs_diff(p)).sum()
}

/// A valid order with the least total displacement from the identity, or
/// `None`. Exhaustive up to 8 qubits; randomized swap search up to 20.
pub fn search_order(layers: &[Vec<(usize, usize)>], n: usize) -> Option<Vec<usize>> {
    search_order_seeded(layers, n, 0)
}

pub fn search_order_seeded(layers: &[Vec<(usize, usize)>], n: usize, seed: u64) -> Option<Vec<usize>> {
    if n > SEARCH_MAX || layers.iter().flatten().any(|&(a, b)| a >= n || b >= n) {
        return None;
    }
    let identity: Vec<usize> = (0..n).collect();
    if check_order(layers, &identity) {
        return Some(identity);
    }
    if n <= EXHAUSTIVE_MAX {
        return exhaustive(layers, n);
    }
    (0..RESTARTS)
        .into_par_iter()
        .filter_map(|r| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(r);
            local_search(layers, n, &mut rng, r != 0)
        })
        .min_by_key(|o| (displacement(o), o.clone()))
}

fn exhaustive(layers: &[Vec<(usize, usize)>], n: usize) -> Option<Vec<usize>> {
    let mut perm: Vec<usize> = (0..n).collect();
    let mut best: Option<(usize, Vec<usize>)> = None;
    loop {
        if check_order(layers, &perm) {
            let d = displacement(&perm);
            if best.as_ref().is_none_or(|b| d < b.0) {
                best = Some((d, perm.clone()));
            }
        }
        if !next_permutation(&mut perm) {
            break;
        }
    }
    best.map(|b| b.1)
}

fn next_permutation(p: &mut [usize]) -> bool {
    let Some(i) = (1..p.len()).rev().find(|&i| p[i - 1] < p[i]) else {
        return false;
    };
    let j = (i..p.len()).rev().find(|&j| p[j] > p[i - 1]).expect("exists");
    p.swap(i - 1, j);
    p[i..].reverse();
    true
}

/// Swap moves accepted when they do not increase (violations, displacement),
/// plus an occasional uphill move;
/// the first restart starts from the identity, the rest from a shuffle.
fn local_search(layers: &[Vec<(usize, usize)>], n: usize, rng: &mut ChaCha8Rng, shuffle: bool) -> Option<Vec<usize>> {
    let mut order: Vec<usize> = (0..n).collect();
    if shuffle {
        order.shuffle(rng);
    }
    let cost = |o: &[usize]| (violations(layers, o), displacement(o));
    let mut cur = cost(&order);
    let mut best: Option<(usize, Vec<usize>)> = None;
    for _ in 0..MOVES_PER_RESTART {
        let a = rng.random_range(0..n);
        let b = rng.random_range(0..n);
        if a == b {
            continue;
        }
        order.swap(a, b);
        let c = cost(&order);
        if c <= cur || rng.random_bool(0.02) {
            cur = c;
            if c.0 == 0 && best.as_ref().is_none_or(|b| c.1 < b.0) {
                best = Some((c.1, order.clone()));
            }
        } else {
            order.swap(a, b);
        }
    }
    best.map(|b| b.1)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nested_pair_is_invalid() {
        assert!(!check_order(&[vec![(0, 3), (1, 2)]], &[0, 1, 2, 3]));
        assert!(check_order(&[vec![(0, 2), (1, 3)]], &[0, 1, 2, 3]));
    }

    #[test]
    fn single_gate_layers_always_valid() {
        let layers = vec![vec![(0, 5)], vec![(2, 3)], vec![(4, 1)]];
        assert!(check_order(&layers, &[5, 4, 3, 2, 1, 0]));
    }

    #[test]
    fn empty_circuit_gets_identity() {
        assert_eq!(search_order(&[], 5), Some(vec![0, 1, 2, 3, 4]));
    }

    #[test]
    fn all_three_matchings_of_four_cannot_be_laid_out() {
        // any 4 positions: one of the three matchings is nested
        let layers = vec![vec![(0, 1), (2, 3)], vec![(0, 2), (1, 3)], vec![(0, 3), (1, 2)]];
        assert_eq!(search_order(&layers, 4), None);
    }

    #[test]
    fn reordering_fixes_a_single_nested_layer() {
        let layers = vec![vec![(0, 3), (1, 2)]];
        let o = search_order(&layers, 4).unwrap();
        assert!(check_order(&layers, &o));
        assert!(displacement(&o) > 0);
    }

    #[test]
    fn permutation_enumeration_is_complete() {
        let mut p = vec![0, 1, 2, 3, 4];
        let mut count = 1;
        while next_permutation(&mut p) {
            count += 1;
        }
        assert_eq!(count, 120);
    }
}
