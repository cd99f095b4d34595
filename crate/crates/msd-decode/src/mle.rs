use std::collections::{BinaryHeap, HashMap};
use std::sync::OnceLock;

use msd_noisy::DetectorModel;

use crate::{DecodeError, Result};

/// Weights closer than this are treated as equal, so that tie-breaking is
/// not at the mercy of summation order.
const EPS: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
pub struct Solution {
    /// Σ w_j over the chosen mechanisms.
    pub weight: f64,
    /// Logical flips of the chosen set, over the solver's compact logical bits.
    pub logical: u32,
    /// Chosen mechanisms, ascending, as indices into [`MleSolver::mechanisms`].
    pub errors: Vec<usize>,
}

#[derive(Clone, Debug)]
struct Column {
    rows: u128,
    w: f64,
    /// Index into the solver's mechanism list.
    id: usize,
}

/// Exact shortest-path tables cover systems with at most this many rows.
const TABLE_ROWS: usize = 20;
/// Row-group size for the search's pattern-database bound.
const GROUP_ROWS: usize = 16;

/// How [`MleSolver`] finds optima. Both methods are exact and share the
/// tie-break; `Auto` uses the table whenever it fits.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Method {
    #[default]
    Auto,
    Search,
    Table,
}

/// Columns plus, per row, the columns touching it in (weight, id) order.
#[derive(Debug)]
struct System {
    nrows: usize,
    cols: Vec<Column>,
    row_cols: Vec<Vec<u32>>,
    /// Minimum weight of every syndrome over all rows (small systems).
    table: OnceLock<Vec<f64>>,
    groups: OnceLock<Bounds>,
}

impl Clone for System {
    fn clone(&self) -> System {
        System {
            nrows: self.nrows,
            cols: self.cols.clone(),
            row_cols: self.row_cols.clone(),
            table: self.table.clone(),
            groups: self.groups.clone(),
        }
    }
}

/// Pattern tables on a partition of the rows: `whole` keeps full column
/// weights (bound = max over groups), `split` divides each column's weight
/// among the groups it touches (bound = sum over groups).
#[derive(Clone, Debug)]
struct Bounds {
    whole: Vec<(u128, Vec<f64>)>,
    split: Vec<(u128, Vec<f64>)>,
}

impl Bounds {
    fn at(&self, s: u128) -> f64 {
        let max = self.whole.iter().fold(0.0, |b: f64, (m, d)| b.max(d[pext(s, *m) as usize]));
        let sum: f64 = self.split.iter().map(|(m, d)| d[pext(s, *m) as usize]).sum();
        max.max(sum)
    }
}

/// Partition rows into groups of at most GROUP_ROWS, greedily merging the
/// pair of groups that share the most columns.
fn cluster_rows(nrows: usize, cols: &[Column]) -> Vec<u128> {
    let mut parts: Vec<u128> = (0..nrows).map(|r| 1u128 << r).collect();
    loop {
        let mut best: Option<(usize, usize, usize)> = None;
        for a in 0..parts.len() {
            for b in a + 1..parts.len() {
                if (parts[a] | parts[b]).count_ones() as usize > GROUP_ROWS {
                    continue;
                }
                let shared = cols.iter().filter(|c| c.rows & parts[a] != 0 && c.rows & parts[b] != 0).count();
                if shared > 0 && best.is_none_or(|x| shared > x.0) {
                    best = Some((shared, a, b));
                }
            }
        }
        let Some((_, a, b)) = best else { break };
        parts[a] |= parts[b];
        parts.remove(b);
    }
    parts
}

#[derive(PartialEq)]
struct Entry(f64, usize);

impl Eq for Entry {}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Entry {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        // min-heap on distance
        other.0.total_cmp(&self.0).then(other.1.cmp(&self.1))
    }
}

/// Dijkstra from the empty syndrome over all 2^bits patterns, with one
/// edge per distinct column.
fn shortest_paths(bits: usize, cols: &[(usize, f64)]) -> Vec<f64> {
    let mut dist = vec![f64::INFINITY; 1 << bits];
    dist[0] = 0.0;
    let mut heap = BinaryHeap::from([Entry(0.0, 0)]);
    while let Some(Entry(d, s)) = heap.pop() {
        if d > dist[s] {
            continue;
        }
        for &(c, w) in cols {
            let t = s ^ c;
            if d + w < dist[t] {
                dist[t] = d + w;
                heap.push(Entry(d + w, t));
            }
        }
    }
    dist
}

fn pext(x: u128, mask: u128) -> u128 {
    let (mut out, mut m, mut i) = (0u128, mask, 0);
    while m != 0 {
        let b = m.trailing_zeros();
        out |= (x >> b & 1) << i;
        m &= m - 1;
        i += 1;
    }
    out
}

impl System {
    fn new(mut cols: Vec<Column>, nrows: usize) -> System {
        // identical columns: only the lightest can appear in an optimum
        cols.sort_by(|a, b| a.rows.cmp(&b.rows).then(a.w.total_cmp(&b.w)).then(a.id.cmp(&b.id)));
        cols.dedup_by(|b, a| a.rows == b.rows);
        cols.retain(|c| c.rows != 0);
        cols.sort_by_key(|c| c.id);
        let mut row_cols = vec![Vec::new(); nrows];
        for (j, c) in cols.iter().enumerate() {
            for (r, rc) in row_cols.iter_mut().enumerate() {
                if c.rows >> r & 1 == 1 {
                    rc.push(j as u32);
                }
            }
        }
        for rc in &mut row_cols {
            rc.sort_by(|&a, &b| cols[a as usize].w.total_cmp(&cols[b as usize].w).then(a.cmp(&b)));
        }
        System { nrows, cols, row_cols, table: OnceLock::new(), groups: OnceLock::new() }
    }

    fn table(&self) -> &[f64] {
        self.table.get_or_init(|| {
            let cols: Vec<(usize, f64)> = self.cols.iter().map(|c| (c.rows as usize, c.w)).collect();
            shortest_paths(self.nrows, &cols)
        })
    }

    fn groups(&self) -> &Bounds {
        self.groups.get_or_init(|| {
            let parts = cluster_rows(self.nrows, &self.cols);
            let project = |mask: u128, split: bool| -> Vec<f64> {
                let mut cols: Vec<(usize, f64)> = self
                    .cols
                    .iter()
                    .filter_map(|c| {
                        let r = pext(c.rows, mask) as usize;
                        if r == 0 {
                            return None;
                        }
                        // uniform cost partitioning: each touched group gets an equal share
                        let share = if split { parts.iter().filter(|&&m| c.rows & m != 0).count() as f64 } else { 1.0 };
                        Some((r, c.w / share))
                    })
                    .collect();
                cols.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.total_cmp(&b.1)));
                cols.dedup_by_key(|c| c.0);
                shortest_paths(mask.count_ones() as usize, &cols)
            };
            Bounds {
                whole: parts.iter().map(|&m| (m, project(m, false))).collect(),
                split: parts.iter().map(|&m| (m, project(m, true))).collect(),
            }
        })
    }

    fn solve(&self, target: u128, method: Method) -> Option<(f64, Vec<usize>)> {
        let use_table = match method {
            Method::Auto => self.nrows <= TABLE_ROWS,
            Method::Search => false,
            Method::Table => true,
        };
        if use_table {
            assert!(self.nrows <= 26, "{} rows is too many for a table", self.nrows);
            return self.solve_table(target);
        }
        self.solve_search(target)
    }

    /// Branch and bound for the optimum weight (ties pruned), then the same
    /// greedy rebuild as the table, asking "is w_j + D(s ⊕ c_j) = D(s)" by a
    /// search that stops at the first remainder light enough.
    fn solve_search(&self, target: u128) -> Option<(f64, Vec<usize>)> {
        let groups = self.groups();
        let mut opt = Search::new(self, groups, Goal::Optimize);
        opt.descend(target, 0.0);
        let total = opt.limit;
        if !total.is_finite() {
            return None;
        }
        let mut ids = Vec::new();
        let (mut s, mut left, mut next) = (target, total, 0);
        while s != 0 {
            let j = (next..self.cols.len())
                .find(|&j| {
                    let c = &self.cols[j];
                    if c.w > left + EPS {
                        return false;
                    }
                    let rest = s ^ c.rows;
                    if rest == 0 {
                        return (left - c.w).abs() <= EPS;
                    }
                    let mut probe = Search::new(self, groups, Goal::Reach);
                    probe.limit = left - c.w;
                    probe.descend(rest, 0.0);
                    probe.found
                })
                .expect("an optimal column exists");
            ids.push(self.cols[j].id);
            s ^= self.cols[j].rows;
            left -= self.cols[j].w;
            next = j + 1;
        }
        Some((total, ids))
    }

    /// Read the optimum weight off the table, then rebuild the
    /// lexicographically smallest optimal set greedily: the smallest column
    /// j with w_j + D(s ⊕ c_j) = D(s) belongs to it, and every optimum of
    /// the remainder avoids all smaller columns.
    fn solve_table(&self, target: u128) -> Option<(f64, Vec<usize>)> {
        let dist = self.table();
        let total = dist[target as usize];
        if !total.is_finite() {
            return None;
        }
        let mut ids = Vec::new();
        let mut s = target as usize;
        let mut next = 0;
        while s != 0 {
            let j = (next..self.cols.len())
                .find(|&j| {
                    let c = &self.cols[j];
                    (c.w + dist[s ^ c.rows as usize] - dist[s]).abs() <= EPS
                })
                .expect("an optimal column exists");
            ids.push(self.cols[j].id);
            s ^= self.cols[j].rows as usize;
            next = j + 1;
        }
        Some((total, ids))
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Goal {
    /// Lower `limit` to the optimum; solutions tying the incumbent are pruned.
    Optimize,
    /// Stop at the first solution weighing at most `limit`.
    Reach,
}

struct Search<'a> {
    sys: &'a System,
    bounds: &'a Bounds,
    goal: Goal,
    limit: f64,
    found: bool,
    /// Lightest partial weight at which each residual was expanded; a
    /// later visit no lighter can find nothing new.
    seen: HashMap<u128, f64>,
}

impl<'a> Search<'a> {
    fn new(sys: &'a System, bounds: &'a Bounds, goal: Goal) -> Search<'a> {
        Search { sys, bounds, goal, limit: f64::INFINITY, found: false, seen: HashMap::new() }
    }

    /// Would a solution reaching weight `w` be worth having?
    fn worth(&self, w: f64) -> bool {
        match self.goal {
            Goal::Optimize => w < self.limit - EPS,
            Goal::Reach => w <= self.limit + EPS,
        }
    }

    fn group_bound(&self, s: u128) -> f64 {
        self.bounds.at(s)
    }

    /// `s` is the residual syndrome, `g` the weight chosen so far.
    fn descend(&mut self, s: u128, g: f64) {
        if self.found {
            return;
        }
        if s == 0 {
            match self.goal {
                Goal::Optimize => self.limit = self.limit.min(g),
                Goal::Reach => self.found = true,
            }
            return;
        }
        match self.seen.get(&s) {
            Some(&h) if h <= g + EPS => return,
            _ => {
                self.seen.insert(s, g);
            }
        }
        // Each violated row needs some column; a column covering c violated
        // rows pays w/c toward each of them. The row with the fewest
        // candidates is branched on (a single candidate is forced).
        let mut bound = 0.0;
        let mut branch_row = usize::MAX;
        let mut fewest = usize::MAX;
        let mut rest = s;
        while rest != 0 {
            let r = rest.trailing_zeros() as usize;
            rest &= rest - 1;
            let cands = &self.sys.row_cols[r];
            if cands.is_empty() {
                return;
            }
            let share = cands.iter().fold(f64::INFINITY, |m, &j| {
                let c = &self.sys.cols[j as usize];
                m.min(c.w / (c.rows & s).count_ones() as f64)
            });
            bound += share;
            if cands.len() < fewest {
                fewest = cands.len();
                branch_row = r;
            }
        }
        bound = bound.max(self.group_bound(s));
        if !self.worth(g + bound) {
            return;
        }
        // Some column through `branch_row` must be chosen; try the ones
        // whose completion looks cheapest first.
        let mut kids: Vec<(f64, u32)> = self.sys.row_cols[branch_row]
            .iter()
            .map(|&j| {
                let c = &self.sys.cols[j as usize];
                (c.w + self.group_bound(s ^ c.rows), j)
            })
            .collect();
        kids.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        for (f, j) in kids {
            if !self.worth(g + f) {
                break;
            }
            let c = &self.sys.cols[j as usize];
            self.descend(s ^ c.rows, g + c.w);
        }
    }
}

/// Exact most-likely-error decoding on a detector subset of a model, with
/// logical flips tracked on an observable subset.
///
/// Mechanisms are restricted to the chosen rows; ones that then flip
/// nothing are dropped, and among identical restricted columns only the
/// most likely survives (using two identical columns is never optimal).
#[derive(Clone, Debug)]
pub struct MleSolver {
    det_mask: u128,
    obs_mask: u32,
    k: usize,
    l: usize,
    /// (compact detectors, compact observables, weight, index)
    mechanisms: Vec<(u128, u32, f64, usize)>,
    plain: System,
    classed: System,
    method: Method,
}

fn compact_u32(x: u32, mask: u32) -> u32 {
    pext(x as u128, mask as u128) as u32
}

impl MleSolver {
    /// `det_mask` and `obs_mask` select the detectors and observables of
    /// `model`; inside the solver they are renumbered 0.. in increasing order.
    pub fn new(model: &DetectorModel, det_mask: u128, obs_mask: u32) -> Result<MleSolver> {
        let det_mask = det_mask & model.detector_mask();
        let obs_mask = obs_mask & if model.num_observables >= 32 { u32::MAX } else { (1 << model.num_observables) - 1 };
        let (k, l) = (det_mask.count_ones() as usize, obs_mask.count_ones() as usize);
        if k + l > 128 {
            return Err(DecodeError::TooManyRows(k + l));
        }
        let mut merged: HashMap<(u128, u32), f64> = HashMap::new();
        for m in &model.mechanisms {
            let key = (pext(m.detectors, det_mask), compact_u32(m.observables, obs_mask));
            if key == (0, 0) || m.p <= 0.0 {
                continue;
            }
            // best single representative of this restricted column
            let w = ((1.0 - m.p) / m.p).ln();
            let e = merged.entry(key).or_insert(f64::INFINITY);
            *e = e.min(w);
        }
        let mut mechanisms: Vec<(u128, u32, f64, usize)> =
            merged.into_iter().map(|((d, o), w)| (d, o, w, 0)).collect();
        mechanisms.sort_by_key(|a| (a.0, a.1));
        for (i, m) in mechanisms.iter_mut().enumerate() {
            m.3 = i;
        }
        let plain = System::new(
            mechanisms.iter().map(|&(d, _, w, id)| Column { rows: d, w, id }).collect(),
            k,
        );
        let classed = System::new(
            mechanisms.iter().map(|&(d, o, w, id)| Column { rows: d | (o as u128) << k, w, id }).collect(),
            k + l,
        );
        Ok(MleSolver { det_mask, obs_mask, k, l, mechanisms, plain, classed, method: Method::Auto })
    }

    pub fn with_method(mut self, method: Method) -> MleSolver {
        self.method = method;
        self
    }

    pub fn det_mask(&self) -> u128 {
        self.det_mask
    }

    pub fn obs_mask(&self) -> u32 {
        self.obs_mask
    }

    pub fn num_detectors(&self) -> usize {
        self.k
    }

    pub fn num_logicals(&self) -> usize {
        self.l
    }

    /// Restricted mechanisms as (detectors, logicals, weight, index), in
    /// compact bit numbering.
    pub fn mechanisms(&self) -> &[(u128, u32, f64, usize)] {
        &self.mechanisms
    }

    /// Restrict a full-model detector word to this solver's compact rows.
    pub fn syndrome_of(&self, detectors: u128) -> u128 {
        pext(detectors, self.det_mask)
    }

    /// Restrict a full-model observable word to the compact logical bits.
    pub fn logical_of(&self, observables: u32) -> u32 {
        compact_u32(observables, self.obs_mask)
    }

    /// Expand compact logical bits back to full-model observable positions.
    pub fn expand_logical(&self, logical: u32) -> u32 {
        let (mut out, mut m, mut i) = (0u32, self.obs_mask, 0);
        while m != 0 {
            let b = m.trailing_zeros();
            out |= (logical >> i & 1) << b;
            m &= m - 1;
            i += 1;
        }
        out
    }

    fn finish(&self, sol: Option<(f64, Vec<usize>)>, syndrome: u128) -> Result<Solution> {
        let (weight, errors) = sol.ok_or(DecodeError::Infeasible(syndrome))?;
        let logical = errors.iter().fold(0, |a, &i| a ^ self.mechanisms[i].1);
        Ok(Solution { weight, logical, errors })
    }

    /// Lightest mechanism set reproducing `syndrome` (compact bits).
    pub fn solve(&self, syndrome: u128) -> Result<Solution> {
        self.finish(self.plain.solve(syndrome, self.method), syndrome)
    }

    /// Lightest set reproducing `syndrome` whose logical flips equal `class`.
    pub fn solve_class(&self, syndrome: u128, class: u32) -> Result<Solution> {
        let target = syndrome | (class as u128) << self.k;
        self.finish(self.classed.solve(target, self.method), syndrome)
    }

    /// MLE plus the gap to the best solution in any other logical class
    /// (+∞ when no other class is reachable).
    pub fn smle_gap(&self, syndrome: u128) -> Result<(Solution, f64)> {
        let best = self.solve(syndrome)?;
        let second = (0..1u32 << self.l)
            .filter(|&c| c != best.logical)
            .filter_map(|c| self.solve_class(syndrome, c).ok())
            .map(|s| s.weight)
            .fold(f64::INFINITY, f64::min);
        let gap = (second - best.weight).max(0.0);
        Ok((best, gap))
    }

    /// Every subset of the restricted mechanisms, for small test models.
    pub fn exhaustive(&self, syndrome: u128) -> Result<Solution> {
        let m = self.mechanisms.len();
        assert!(m <= 24, "exhaustive enumeration over {m} mechanisms");
        let mut best: Option<(f64, Vec<usize>)> = None;
        for set in 0u32..1 << m {
            let (mut s, mut w) = (0u128, 0.0);
            for i in 0..m {
                if set >> i & 1 == 1 {
                    s ^= self.mechanisms[i].0;
                    w += self.mechanisms[i].2;
                }
            }
            if s != syndrome {
                continue;
            }
            let ids: Vec<usize> = (0..m).filter(|&i| set >> i & 1 == 1).collect();
            let take = match &best {
                None => true,
                Some((bw, bids)) => w < bw - EPS || (w <= bw + EPS && ids < *bids),
            };
            if take {
                best = Some((w, ids));
            }
        }
        self.finish(best, syndrome)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use msd_noisy::Mechanism;

    fn model(k: usize, l: usize, mechs: &[(f64, u128, u32)]) -> DetectorModel {
        DetectorModel {
            num_detectors: k,
            num_observables: l,
            mechanisms: mechs
                .iter()
                .map(|&(p, detectors, observables)| Mechanism { p, detectors, observables, sources: vec![] })
                .collect(),
            faults: vec![],
            benign: vec![],
        }
    }

    #[test]
    fn likelier_mechanism_wins() {
        let m = model(1, 1, &[(0.01, 1, 0), (0.001, 1, 1)]);
        let s = MleSolver::new(&m, 1, 1).unwrap();
        let sol = s.solve(1).unwrap();
        assert_eq!(sol.logical, 0);
        assert!((sol.weight - (0.99f64 / 0.01).ln()).abs() < 1e-12);
    }

    #[test]
    fn empty_syndrome_is_free() {
        let m = model(1, 1, &[(0.01, 1, 0)]);
        let sol = MleSolver::new(&m, 1, 1).unwrap().solve(0).unwrap();
        assert_eq!((sol.weight, sol.errors.len()), (0.0, 0));
    }

    #[test]
    fn gap_between_two_classes() {
        let m = model(1, 1, &[(0.01, 1, 0), (0.001, 1, 1)]);
        let (sol, gap) = MleSolver::new(&m, 1, 1).unwrap().smle_gap(1).unwrap();
        assert_eq!(sol.logical, 0);
        let expect = (0.999f64 / 0.001).ln() - (0.99f64 / 0.01).ln();
        assert!((gap - expect).abs() < 1e-12 && (gap - 2.31).abs() < 0.01, "{gap}");
    }

    #[test]
    fn symmetric_classes_have_zero_gap() {
        let m = model(1, 1, &[(0.01, 1, 0), (0.01, 1, 1)]);
        assert_eq!(MleSolver::new(&m, 1, 1).unwrap().smle_gap(1).unwrap().1, 0.0);
    }

    #[test]
    fn single_class_gap_is_infinite() {
        let m = model(1, 1, &[(0.01, 1, 0)]);
        assert_eq!(MleSolver::new(&m, 1, 1).unwrap().smle_gap(1).unwrap().1, f64::INFINITY);
    }

    #[test]
    fn own_class_resolve_returns_the_mle() {
        let m = model(2, 1, &[(0.01, 0b01, 0), (0.02, 0b11, 1), (0.03, 0b10, 0), (0.005, 0b10, 1)]);
        let s = MleSolver::new(&m, 0b11, 1).unwrap();
        for syn in 0..4 {
            let a = s.solve(syn).unwrap();
            assert_eq!(s.solve_class(syn, a.logical).unwrap(), a);
        }
    }

    #[test]
    fn infeasible_is_reported() {
        let m = model(2, 0, &[(0.01, 0b01, 0)]);
        assert_eq!(MleSolver::new(&m, 0b11, 0).unwrap().solve(0b10), Err(DecodeError::Infeasible(0b10)));
    }

    #[test]
    fn ties_go_to_the_lexicographically_smallest_set() {
        // {a,b} and {c} both give syndrome 11 at equal weight
        let p = 0.1f64;
        let pc = 1.0 / (1.0 + ((1.0 - p) / p).powi(2));
        let m = model(2, 1, &[(pc, 0b11, 1), (p, 0b01, 0), (p, 0b10, 0)]);
        let s = MleSolver::new(&m, 0b11, 1).unwrap();
        let sol = s.solve(0b11).unwrap();
        assert_eq!(sol, s.exhaustive(0b11).unwrap());
        // mechanisms sort as [01, 10, 11]
        assert_eq!(sol.errors, vec![0, 1]);
    }

    #[test]
    fn restriction_renumbers_rows() {
        let m = model(3, 2, &[(0.01, 0b100, 0b10), (0.02, 0b001, 0b01)]);
        let s = MleSolver::new(&m, 0b101, 0b10).unwrap();
        assert_eq!(s.syndrome_of(0b100), 0b10);
        let sol = s.solve(0b10).unwrap();
        assert_eq!(sol.logical, 1);
        assert_eq!(s.expand_logical(sol.logical), 0b10);
    }
}
