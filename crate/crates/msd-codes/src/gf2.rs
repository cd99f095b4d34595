//! Small GF(2) helpers over `u64` row masks.

/// Row-reduced basis of the span, pivot = lowest set bit of each row.
pub fn basis(rows: &[u64]) -> Vec<u64> {
    let mut out: Vec<u64> = Vec::new();
    for &r in rows {
        let v = reduce(&out, r);
        if v != 0 {
            let p = v & v.wrapping_neg();
            for b in out.iter_mut() {
                if *b & p != 0 {
                    *b ^= v;
                }
            }
            out.push(v);
        }
    }
    out
}

/// Reduce `v` against a basis produced by [`basis`].
pub fn reduce(basis: &[u64], mut v: u64) -> u64 {
    for &b in basis {
        let p = b & b.wrapping_neg();
        if v & p != 0 {
            v ^= b;
        }
    }
    v
}

pub fn rank(rows: &[u64]) -> usize {
    basis(rows).len()
}

pub fn in_span(rows: &[u64], v: u64) -> bool {
    reduce(&basis(rows), v) == 0
}

pub fn parity(v: u64) -> bool {
    v.count_ones() % 2 == 1
}

/// All `n`-bit masks of the given weight, in increasing numeric order.
pub fn masks_of_weight(n: usize, w: usize) -> impl Iterator<Item = u64> {
    // Gosper's hack
    let limit = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
    let mut cur = if w == 0 { Some(0u64) } else if w > n { None } else { Some((1u64 << w) - 1) };
    std::iter::from_fn(move || {
        let v = cur?;
        cur = if v == 0 {
            None
        } else {
            let c = v & v.wrapping_neg();
            let r = v.wrapping_add(c);
            let next = (((r ^ v) >> 2) / c) | r;
            if r == 0 || next > limit || next < v {
                None
            } else {
                Some(next)
            }
        };
        Some(v)
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weight_enumeration_counts() {
        assert_eq!(masks_of_weight(7, 3).count(), 35);
        assert_eq!(masks_of_weight(17, 5).count(), 6188);
        assert_eq!(masks_of_weight(4, 0).collect::<Vec<_>>(), vec![0]);
        assert!(masks_of_weight(5, 2).all(|m| m.count_ones() == 2 && m < 32));
    }

    #[test]
    fn span_and_rank() {
        let rows = [0b1100, 0b0110, 0b1010];
        assert_eq!(rank(&rows), 2);
        assert!(in_span(&rows, 0b1010));
        assert!(!in_span(&rows, 0b0001));
    }
}
