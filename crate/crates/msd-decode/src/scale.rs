//! Sliding-scale postselection: rank shots by decoding confidence and keep
//! a prefix of the ranking.

use msd_noisy::distill::OUTPUT_BIT;
use msd_noisy::ShotRecord;

use crate::stage::ShotDecode;

/// One cut of the ranking: the first `kept` shots of the order are kept.
#[derive(Clone, Debug, PartialEq)]
pub struct ScalePoint {
    /// Score threshold for threshold sweeps; the lowest kept score for
    /// fraction sweeps.
    pub threshold: f64,
    pub kept: usize,
    pub total: usize,
    /// Of the kept shots: corrected ancilla outcome is the accept pattern.
    pub accepted: usize,
    /// Of the kept and accepted shots: the corrected output flip is wrong.
    pub output_errors: usize,
}

impl ScalePoint {
    pub fn kept_fraction(&self) -> f64 {
        self.kept as f64 / self.total.max(1) as f64
    }

    pub fn accepted_fraction(&self) -> f64 {
        self.accepted as f64 / self.total.max(1) as f64
    }

    pub fn output_error(&self) -> f64 {
        self.output_errors as f64 / self.accepted.max(1) as f64
    }

    /// Binomial standard error of [`output_error`](Self::output_error).
    pub fn output_error_sigma(&self) -> f64 {
        let e = self.output_error();
        (e * (1.0 - e) / self.accepted.max(1) as f64).sqrt()
    }
}

/// Shot indices by descending score, ties by index.
pub fn ranking(decoded: &[ShotDecode]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..decoded.len()).collect();
    order.sort_by(|&a, &b| decoded[b].score.total_cmp(&decoded[a].score).then(a.cmp(&b)));
    order
}

fn tally(
    recs: &[ShotRecord],
    decoded: &[ShotDecode],
    order: &[usize],
    cuts: impl IntoIterator<Item = (f64, usize)>,
) -> Vec<ScalePoint> {
    // prefix counts along the ranking
    let mut acc = vec![0usize; order.len() + 1];
    let mut err = vec![0usize; order.len() + 1];
    for (i, &s) in order.iter().enumerate() {
        let d = &decoded[s];
        let ok = d.factory.accepted;
        let wrong = (recs[s].observables ^ d.correction) & OUTPUT_BIT != 0;
        acc[i + 1] = acc[i] + ok as usize;
        err[i + 1] = err[i] + (ok && wrong) as usize;
    }
    cuts.into_iter()
        .map(|(threshold, kept)| ScalePoint {
            threshold,
            kept,
            total: order.len(),
            accepted: acc[kept],
            output_errors: err[kept],
        })
        .collect()
}

/// Keep shots scoring at least each threshold (−∞ keeps everything).
pub fn by_threshold(recs: &[ShotRecord], decoded: &[ShotDecode], thresholds: &[f64]) -> Vec<ScalePoint> {
    let order = ranking(decoded);
    let cuts: Vec<(f64, usize)> =
        thresholds.iter().map(|&t| (t, order.partition_point(|&s| decoded[s].score >= t))).collect();
    tally(recs, decoded, &order, cuts)
}

/// Keep the top ⌈q·N⌉ shots of the ranking for each fraction q.
pub fn by_fraction(recs: &[ShotRecord], decoded: &[ShotDecode], fractions: &[f64]) -> Vec<ScalePoint> {
    let order = ranking(decoded);
    let n = order.len();
    let cuts: Vec<(f64, usize)> = fractions
        .iter()
        .map(|&q| {
            let kept = ((q.clamp(0.0, 1.0) * n as f64).ceil() as usize).min(n);
            let t = if kept == 0 { f64::INFINITY } else { decoded[order[kept - 1]].score };
            (t, kept)
        })
        .collect();
    tally(recs, decoded, &order, cuts)
}

/// Keep only shots whose ancilla blocks show no detector firing.
pub fn perfect_point(recs: &[ShotRecord], decoded: &[ShotDecode]) -> ScalePoint {
    let order: Vec<usize> = (0..decoded.len()).filter(|&s| decoded[s].perfect).collect();
    let mut p = tally(recs, decoded, &order, [(f64::INFINITY, order.len())]).remove(0);
    p.total = decoded.len();
    p
}
