use std::fmt;
use std::str::FromStr;

use msd_codes::CssCode;

use crate::{Result, SynthError};

/// Binary matrix with one row per qubit; columns are the Z checks followed
/// by the Z logicals. Row `q` is stored as a bit mask over columns.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReductionMatrix {
    rows: Vec<u64>,
    n_checks: usize,
    n_logicals: usize,
}

/// `source → target`: row (or column) `target` += row `source`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RowOp {
    pub source: usize,
    pub target: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct ColumnOp {
    pub source: usize,
    pub target: usize,
}

impl RowOp {
    pub fn new(source: usize, target: usize) -> RowOp {
        RowOp { source, target }
    }
}

impl fmt::Display for RowOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}->{}", self.source, self.target)
    }
}

impl FromStr for RowOp {
    type Err = SynthError;
    fn from_str(s: &str) -> Result<RowOp> {
        let (a, b) = s
            .split_once("->")
            .or_else(|| s.split_once('→'))
            .ok_or_else(|| SynthError::Malformed(format!("row op `{s}`")))?;
        let num = |t: &str| t.trim().parse::<usize>().map_err(|_| SynthError::Malformed(format!("row op `{s}`")));
        Ok(RowOp::new(num(a)?, num(b)?))
    }
}

impl ReductionMatrix {
    pub fn from_code(code: &CssCode) -> Result<ReductionMatrix> {
        if !code.is_self_dual() {
            return Err(SynthError::NotSelfDual);
        }
        let cols: Vec<u64> = code.z_checks.iter().chain(&code.logical_z).copied().collect();
        if cols.len() > 64 {
            return Err(SynthError::Malformed("more than 64 columns".into()));
        }
        let mut rows = vec![0u64; code.n];
        for (c, &m) in cols.iter().enumerate() {
            for (q, row) in rows.iter_mut().enumerate() {
                if m >> q & 1 == 1 {
                    *row |= 1 << c;
                }
            }
        }
        Ok(ReductionMatrix { rows, n_checks: code.z_checks.len(), n_logicals: code.logical_z.len() })
    }

    pub fn from_rows(rows: Vec<u64>, n_checks: usize, n_logicals: usize) -> Result<ReductionMatrix> {
        let ncol = n_checks + n_logicals;
        if ncol > 64 || rows.iter().any(|&r| ncol < 64 && r >> ncol != 0) {
            return Err(SynthError::Malformed("row entries outside the column range".into()));
        }
        Ok(ReductionMatrix { rows, n_checks, n_logicals })
    }

    pub fn rows(&self) -> &[u64] {
        &self.rows
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn n_checks(&self) -> usize {
        self.n_checks
    }

    pub fn n_logicals(&self) -> usize {
        self.n_logicals
    }

    pub fn n_cols(&self) -> usize {
        self.n_checks + self.n_logicals
    }

    pub fn is_logical(&self, c: usize) -> bool {
        c >= self.n_checks && c < self.n_cols()
    }

    pub fn entry(&self, r: usize, c: usize) -> bool {
        self.rows[r] >> c & 1 == 1
    }

    pub fn column(&self, c: usize) -> Vec<usize> {
        (0..self.rows.len()).filter(|&r| self.entry(r, c)).collect()
    }

    pub fn apply_row_op(&mut self, op: RowOp) -> Result<()> {
        let n = self.rows.len();
        if op.source >= n || op.target >= n || op.source == op.target {
            return Err(SynthError::Malformed(format!("row op {op} on {n} rows")));
        }
        self.rows[op.target] ^= self.rows[op.source];
        Ok(())
    }

    /// Column ops may target logical columns but never use them as source.
    pub fn apply_column_op(&mut self, op: ColumnOp) -> Result<()> {
        if op.source >= self.n_checks || op.target >= self.n_cols() || op.source == op.target {
            return Err(SynthError::Malformed(format!("column op {}->{}", op.source, op.target)));
        }
        for r in self.rows.iter_mut() {
            if *r >> op.source & 1 == 1 {
                *r ^= 1 << op.target;
            }
        }
        Ok(())
    }

    /// The row holding column `c`'s single 1, if the column has weight one.
    pub fn host(&self, c: usize) -> Option<usize> {
        match self.column(c)[..] {
            [r] => Some(r),
            _ => None,
        }
    }

    /// Every column is weight one, on distinct rows.
    pub fn is_final(&self) -> bool {
        let mut used = 0u128;
        for c in 0..self.n_cols() {
            match self.host(c) {
                Some(r) if used >> r & 1 == 0 => used |= 1 << r,
                _ => return false,
            }
        }
        true
    }
}

impl fmt::Display for ReductionMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "   ")?;
        for c in 0..self.n_cols() {
            if self.is_logical(c) {
                write!(f, " L{}", c - self.n_checks)?;
            } else {
                write!(f, " S{c}")?;
            }
        }
        writeln!(f)?;
        for (q, _) in self.rows.iter().enumerate() {
            write!(f, "q{q:<2}")?;
            for c in 0..self.n_cols() {
                let w = if self.is_logical(c) { c - self.n_checks } else { c }.to_string().len() + 1;
                write!(f, " {:>w$}", if self.entry(q, c) { "1" } else { "-" })?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

/// Row operations grouped into layers of disjoint rows.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct RowOpSequence {
    pub layers: Vec<Vec<RowOp>>,
}

impl RowOpSequence {
    /// Layer an ordered op list as early as possible: an op lands one layer
    /// after the last op touching either of its rows. Ops on disjoint rows
    /// commute, so the product is unchanged.
    pub fn from_ops(ops: &[RowOp]) -> RowOpSequence {
        let mut ready: Vec<usize> = Vec::new();
        let mut layers: Vec<Vec<RowOp>> = Vec::new();
        for &op in ops {
            let hi = op.source.max(op.target);
            if ready.len() <= hi {
                ready.resize(hi + 1, 0);
            }
            let k = ready[op.source].max(ready[op.target]);
            if layers.len() <= k {
                layers.resize(k + 1, Vec::new());
            }
            layers[k].push(op);
            ready[op.source] = k + 1;
            ready[op.target] = k + 1;
        }
        RowOpSequence { layers }
    }

    pub fn from_layers(layers: Vec<Vec<RowOp>>) -> Result<RowOpSequence> {
        for (i, l) in layers.iter().enumerate() {
            let mut rows: Vec<usize> = l.iter().flat_map(|o| [o.source, o.target]).collect();
            rows.sort_unstable();
            if rows.windows(2).any(|w| w[0] == w[1]) {
                return Err(SynthError::Malformed(format!("layer {i} reuses a row")));
            }
        }
        Ok(RowOpSequence { layers: layers.into_iter().filter(|l| !l.is_empty()).collect() })
    }

    pub fn ops(&self) -> Vec<RowOp> {
        self.layers.iter().flatten().copied().collect()
    }

    pub fn len(&self) -> usize {
        self.layers.iter().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn depth(&self) -> usize {
        self.layers.len()
    }

    pub fn replay(&self, m: &ReductionMatrix) -> Result<ReductionMatrix> {
        let mut out = m.clone();
        for op in self.ops() {
            out.apply_row_op(op)?;
        }
        Ok(out)
    }

    pub fn parse(s: &str) -> Result<RowOpSequence> {
        let ops: Vec<RowOp> = s
            .trim_matches(|c| c == '[' || c == ']')
            .split(',')
            .map(str::trim)
            .filter(|t| !t.is_empty())
            .map(str::parse)
            .collect::<Result<_>>()?;
        Ok(RowOpSequence::from_ops(&ops))
    }
}

impl fmt::Display for RowOpSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.ops().iter().map(|o| o.to_string()).collect();
        write!(f, "[{}]", parts.join(", "))
    }
}
