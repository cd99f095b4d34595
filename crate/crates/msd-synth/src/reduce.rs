//! Layered row-reduction search.
//!
//! Iterative deepening on the number of layers. At each node the candidate
//! row ops are scored by (weight removed, column weight of the removed
//! entries, −distance of the new row to its nearest nonzero row), so the
//! search prefers ops that shrink the matrix, clear heavy columns first, and
//! make rows that the next layer can cancel. A layer is a set of ops on
//! disjoint rows assembled from the `branch` best compatible candidates.

use msd_codes::CssCode;

use crate::matrix::{ColumnOp, ReductionMatrix, RowOp, RowOpSequence};
use crate::{Result, SynthError};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ReduceOptions {
    /// How many of the best compatible ops are tried at each pick.
    pub branch: usize,
    /// Node budget for each layer-count attempt.
    pub node_budget: u64,
    /// Largest layer count tried; defaults to twice the qubit count.
    pub max_layers: Option<usize>,
}

impl Default for ReduceOptions {
    fn default() -> Self {
        ReduceOptions { branch: 3, node_budget: 100_000, max_layers: None }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Reduction {
    pub ops: RowOpSequence,
    pub column_ops: Vec<ColumnOp>,
    pub final_matrix: ReductionMatrix,
}

pub fn reduce(code: &CssCode) -> Result<Reduction> {
    reduce_with(code, ReduceOptions::default())
}

pub fn reduce_with(code: &CssCode, opts: ReduceOptions) -> Result<Reduction> {
    let m0 = ReductionMatrix::from_code(code)?;
    let n = m0.n_rows();
    let max_layers = opts.max_layers.unwrap_or(2 * n);
    let mut search = Search {
        nchk: m0.n_checks(),
        ncol: m0.n_cols(),
        branch: opts.branch.max(1),
        budget: opts.node_budget,
        nodes: 0,
    };
    let mut spent = 0;
    for depth in 0..=max_layers {
        search.nodes = 0;
        if let Some(layers) = search.dfs(m0.rows().to_vec(), depth) {
            let ops = RowOpSequence::from_layers(layers)?;
            let reduced = ops.replay(&m0)?;
            let column_ops = derive_column_ops(&reduced)
                .ok_or_else(|| SynthError::Malformed("search ended on a non-reducible matrix".into()))?;
            let mut final_matrix = reduced;
            for &c in &column_ops {
                final_matrix.apply_column_op(c)?;
            }
            debug_assert!(final_matrix.is_final());
            return Ok(Reduction { ops, column_ops, final_matrix });
        }
        spent += search.nodes;
    }
    Err(SynthError::Budget { nodes: spent, layers: max_layers })
}

/// Column ops taking a row-reduced matrix to final form, or `None` if row
/// reduction is not finished. Check columns are brought to unit vectors by
/// elimination among themselves, then cleared out of the logical columns.
pub fn derive_column_ops(m: &ReductionMatrix) -> Option<Vec<ColumnOp>> {
    if !terminal(m.rows(), m.n_checks(), m.n_cols()) {
        return None;
    }
    let mut work = m.clone();
    let mut ops = Vec::new();
    let mut pivots: Vec<(usize, usize)> = Vec::new();
    for r in 0..work.n_rows() {
        let Some(c) = (0..work.n_checks()).find(|&c| work.entry(r, c) && !pivots.iter().any(|p| p.0 == c)) else {
            continue;
        };
        for other in 0..work.n_checks() {
            if other != c && work.entry(r, other) {
                let op = ColumnOp { source: c, target: other };
                work.apply_column_op(op).ok()?;
                ops.push(op);
            }
        }
        pivots.push((c, r));
    }
    for l in work.n_checks()..work.n_cols() {
        for &(c, r) in &pivots {
            if work.entry(r, l) {
                let op = ColumnOp { source: c, target: l };
                work.apply_column_op(op).ok()?;
                ops.push(op);
            }
        }
    }
    work.is_final().then_some(ops)
}

/// Rows with any check entry must number exactly the check count and carry
/// a full-rank check block; off that set, each logical column is a single
/// 1 on its own row and everything else is zero.
fn terminal(rows: &[u64], nchk: usize, ncol: usize) -> bool {
    let chk = if nchk == 64 { u64::MAX } else { (1u64 << nchk) - 1 };
    let in_s: Vec<bool> = rows.iter().map(|&v| v & chk != 0).collect();
    if in_s.iter().filter(|&&b| b).count() != nchk {
        return false;
    }
    let block: Vec<u64> = rows.iter().zip(&in_s).filter(|(_, &s)| s).map(|(&v, _)| v & chk).collect();
    if msd_codes::gf2::rank(&block) != nchk {
        return false;
    }
    let mut used = vec![false; rows.len()];
    for l in nchk..ncol {
        let mut host = None;
        for (r, &v) in rows.iter().enumerate() {
            if v >> l & 1 == 1 && !in_s[r] {
                if host.is_some() {
                    return false;
                }
                host = Some(r);
            }
        }
        match host {
            Some(r) if !used[r] => used[r] = true,
            _ => return false,
        }
    }
    rows.iter().enumerate().all(|(r, &v)| in_s[r] || used[r] || v == 0)
}

struct Search {
    nchk: usize,
    ncol: usize,
    branch: usize,
    budget: u64,
    nodes: u64,
}

#[derive(Clone, Copy)]
struct Cand {
    score: (i32, u32, i32),
    op: RowOp,
}

impl Search {
    fn exhausted(&self) -> bool {
        self.nodes > self.budget
    }

    fn dfs(&mut self, rows: Vec<u64>, depth: usize) -> Option<Vec<Vec<RowOp>>> {
        self.nodes += 1;
        if self.exhausted() {
            return None;
        }
        if terminal(&rows, self.nchk, self.ncol) {
            return Some(Vec::new());
        }
        if depth == 0 {
            return None;
        }
        // each layer removes at most n/2 nonzero rows
        let nz = rows.iter().filter(|&&v| v != 0).count();
        if nz.saturating_sub(self.ncol) > depth * (rows.len() / 2) {
            return None;
        }
        let cands = candidates(&rows, self.ncol);
        let mut chosen = Vec::new();
        self.pick(&rows, &cands, 0, 0, &mut chosen, depth)
    }

    /// Assemble layers from the candidate list; each completed (or partial
    /// but nonempty) layer is handed straight to the next DFS level.
    fn pick(
        &mut self,
        rows: &[u64],
        cands: &[Cand],
        start: usize,
        used: u128,
        chosen: &mut Vec<RowOp>,
        depth: usize,
    ) -> Option<Vec<Vec<RowOp>>> {
        let free = |c: &Cand| used >> c.op.source & 1 == 0 && used >> c.op.target & 1 == 0;
        let opts: Vec<usize> = (start..cands.len()).filter(|&j| free(&cands[j])).take(self.branch).collect();
        for &j in &opts {
            let op = cands[j].op;
            chosen.push(op);
            let found = self.pick(rows, cands, j + 1, used | 1 << op.source | 1 << op.target, chosen, depth);
            chosen.pop();
            if found.is_some() || self.exhausted() {
                return found;
            }
        }
        if chosen.is_empty() {
            return None;
        }
        let mut next = rows.to_vec();
        for op in chosen.iter() {
            next[op.target] ^= next[op.source];
        }
        let mut rest = self.dfs(next, depth - 1)?;
        rest.insert(0, chosen.clone());
        Some(rest)
    }
}

fn candidates(rows: &[u64], ncol: usize) -> Vec<Cand> {
    let colw: Vec<u32> = (0..ncol).map(|c| rows.iter().filter(|&&v| v >> c & 1 == 1).count() as u32).collect();
    let mut out = Vec::new();
    for (s, &rs) in rows.iter().enumerate() {
        for (t, &rt) in rows.iter().enumerate() {
            if s == t || rs == 0 || rt == 0 {
                continue;
            }
            let new = rt ^ rs;
            let gain = rt.count_ones() as i32 - new.count_ones() as i32;
            if gain < 0 {
                continue;
            }
            let removed = rt & rs;
            let cw = (0..ncol).filter(|&c| removed >> c & 1 == 1).map(|c| colw[c]).sum();
            let sim = rows
                .iter()
                .enumerate()
                .filter(|&(r, &v)| r != t && v != 0)
                .map(|(_, &v)| (new ^ v).count_ones() as i32)
                .min()
                .unwrap_or(0);
            out.push(Cand { score: (gain, cw, -sim), op: RowOp::new(s, t) });
        }
    }
    out.sort_by(|a, b| b.score.cmp(&a.score).then(a.op.cmp(&b.op)));
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use msd_codes::{color_code, trivial_code};

    #[test]
    fn d3_reduces_in_nine_ops_three_layers() {
        let r = reduce(&color_code(3).unwrap()).unwrap();
        assert_eq!((r.ops.len(), r.ops.depth()), (9, 3));
        assert!(r.final_matrix.is_final());
    }

    #[test]
    fn trivial_code_needs_no_ops() {
        let r = reduce(&trivial_code()).unwrap();
        assert!(r.ops.is_empty() && r.column_ops.is_empty());
    }

    #[test]
    fn published_d3_sequence_reaches_published_final_matrix() {
        let m0 = ReductionMatrix::from_code(&color_code(3).unwrap()).unwrap();
        let seq = RowOpSequence::parse("0->1, 3->2, 5->4, 0->3, 2->5, 4->6, 2->1, 4->3, 6->5").unwrap();
        let reduced = seq.replay(&m0).unwrap();
        let cops = derive_column_ops(&reduced).unwrap();
        assert_eq!(cops, vec![ColumnOp { source: 0, target: 3 }, ColumnOp { source: 2, target: 3 }]);
        let mut fin = reduced;
        for c in cops {
            fin.apply_column_op(c).unwrap();
        }
        // S0 on q0, S1 on q2, S2 on q4, L on q6, all else empty
        assert_eq!(fin.rows(), &[0b0001, 0, 0b0010, 0, 0b0100, 0, 0b1000]);
    }

    #[test]
    fn unfinished_matrix_has_no_column_ops() {
        let m0 = ReductionMatrix::from_code(&color_code(3).unwrap()).unwrap();
        assert!(derive_column_ops(&m0).is_none());
    }

    #[test]
    fn zero_budget_reports_exhaustion() {
        let opts = ReduceOptions { node_budget: 0, ..Default::default() };
        assert!(matches!(reduce_with(&color_code(3).unwrap(), opts), Err(SynthError::Budget { .. })));
    }
}
