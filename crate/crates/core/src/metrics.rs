//! Line segmentation metrics.
//!
//! Both suites compare regions as sets of foreground pixels.
//!
//! *ICDAR 2013*: `MatchScore(g, r) = |G ∩ R| / |G ∪ R|`; a pair is a
//! one-to-one match when its score reaches the threshold (0.90 by default).
//! `DR = M / N1`, `RA = M / N2`, `FM = 2 DR RA / (DR + RA)`.
//!
//! *ICDAR 2017*: GT and predicted regions are paired by maximum IU. Per pair,
//! line TP/FP/FN are the intersecting, predicted-only and GT-only pixels.
//! `pixel IU = ΣTP / (ΣTP + ΣFP + ΣFN)`. A pair is a correct line when both
//! line precision and line recall reach the threshold, a missed line when the
//! recall falls below it and an extra line when the precision does.
//! `line IU = CL / (CL + ML + EL)`.
//!
//! One-to-one conflicts are resolved greedily by descending score, ties by
//! ascending (GT index, prediction index).

use std::collections::HashMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::geometry::{rasterize_ring, Ring};
use crate::raster::{BinaryPage, LabelRaster};
use crate::{Error, Result};

pub const DEFAULT_MATCH_THRESHOLD: f64 = 0.90;
pub const DEFAULT_IU_THRESHOLD: f64 = 0.75;

/// A region as a sorted set of linear pixel indices (`y * width + x`).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EvalRegion {
    pub id: u32,
    pixels: Vec<u32>,
}

impl EvalRegion {
    /// `None` for an empty pixel set.
    pub fn new(id: u32, pixels: impl IntoIterator<Item = u32>) -> Option<Self> {
        let mut pixels: Vec<u32> = pixels.into_iter().collect();
        pixels.sort_unstable();
        pixels.dedup();
        (!pixels.is_empty()).then_some(EvalRegion { id, pixels })
    }

    pub fn pixels(&self) -> &[u32] {
        &self.pixels
    }

    pub fn len(&self) -> usize {
        self.pixels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pixels.is_empty()
    }

    pub fn intersection_len(&self, other: &EvalRegion) -> usize {
        let (mut i, mut j, mut n) = (0, 0, 0);
        while i < self.pixels.len() && j < other.pixels.len() {
            match self.pixels[i].cmp(&other.pixels[j]) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    n += 1;
                    i += 1;
                    j += 1;
                }
            }
        }
        n
    }
}

/// One region per non-zero id of the raster.
pub fn regions_from_label_raster(raster: &LabelRaster) -> Vec<EvalRegion> {
    let mut by_id: HashMap<u32, Vec<u32>> = HashMap::new();
    for (i, &l) in raster.labels().iter().enumerate() {
        if l != 0 {
            by_id.entry(l).or_default().push(i as u32);
        }
    }
    let mut ids: Vec<u32> = by_id.keys().copied().collect();
    ids.sort_unstable();
    ids.into_iter()
        .filter_map(|id| EvalRegion::new(id, by_id.remove(&id).unwrap()))
        .collect()
}

/// Regions from line polygons, restricted to the page foreground.
///
/// With `merge` off a line made of several polygons is represented by its
/// largest polygon only (the behaviour of the ICDAR 2017 tool); with `merge`
/// on all its polygons are united.
pub fn regions_from_rings(
    lines: &[(u32, Vec<Ring>)],
    foreground: &BinaryPage,
    merge: bool,
) -> Vec<EvalRegion> {
    let (w, h) = foreground.size();
    let pixel_set = |ring: &Ring| -> Vec<u32> {
        let mask = rasterize_ring(ring, w, h);
        mask.pixels()
            .iter()
            .zip(foreground.pixels())
            .enumerate()
            .filter(|(_, (&m, &f))| m && f)
            .map(|(i, _)| i as u32)
            .collect()
    };
    lines
        .iter()
        .filter_map(|(id, rings)| {
            let sets: Vec<Vec<u32>> = rings.iter().map(pixel_set).collect();
            let pixels = if merge {
                sets.concat()
            } else {
                // Largest polygon by area, first on ties.
                let best = rings
                    .iter()
                    .enumerate()
                    .fold(None::<(usize, f64)>, |acc, (i, r)| match acc {
                        Some((_, a)) if a >= r.area() => acc,
                        _ => Some((i, r.area())),
                    })?
                    .0;
                sets.into_iter().nth(best).unwrap()
            };
            EvalRegion::new(*id, pixels)
        })
        .collect()
}

pub fn match_score(g: &EvalRegion, r: &EvalRegion) -> f64 {
    let inter = g.intersection_len(r);
    let union = g.len() + r.len() - inter;
    if union == 0 {
        0.0
    } else {
        inter as f64 / union as f64
    }
}

fn check_threshold(t: f64) -> Result<()> {
    if t > 0.0 && t <= 1.0 {
        Ok(())
    } else {
        Err(Error::Threshold(t))
    }
}

/// Intersection sizes of all overlapping (gt index, pred index) pairs.
fn overlaps(gt: &[EvalRegion], pred: &[EvalRegion]) -> Vec<(usize, usize, usize)> {
    let mut owners: HashMap<u32, Vec<usize>> = HashMap::new();
    for (j, r) in pred.iter().enumerate() {
        for &p in r.pixels() {
            owners.entry(p).or_default().push(j);
        }
    }
    let mut out = Vec::new();
    let mut counts: HashMap<usize, usize> = HashMap::new();
    for (i, g) in gt.iter().enumerate() {
        counts.clear();
        for p in g.pixels() {
            if let Some(js) = owners.get(p) {
                for &j in js {
                    *counts.entry(j).or_default() += 1;
                }
            }
        }
        let mut row: Vec<(usize, usize, usize)> = counts.iter().map(|(&j, &n)| (i, j, n)).collect();
        row.sort_unstable();
        out.extend(row);
    }
    out
}

/// Greedy one-to-one selection over `(gt, pred, score)` candidates.
fn greedy_matching(
    mut candidates: Vec<(usize, usize, f64)>,
    n_gt: usize,
    n_pred: usize,
) -> Vec<(usize, usize, f64)> {
    candidates.sort_by(|a, b| b.2.total_cmp(&a.2).then(a.0.cmp(&b.0)).then(a.1.cmp(&b.1)));
    let (mut used_g, mut used_p) = (vec![false; n_gt], vec![false; n_pred]);
    let mut out = Vec::new();
    for (i, j, s) in candidates {
        if !used_g[i] && !used_p[j] {
            used_g[i] = true;
            used_p[j] = true;
            out.push((i, j, s));
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegionMatch {
    pub gt: u32,
    pub pred: u32,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Icdar2013Report {
    pub threshold: f64,
    pub n1: usize,
    pub n2: usize,
    pub m: usize,
    pub dr: f64,
    pub ra: f64,
    pub fm: f64,
    pub matches: Vec<RegionMatch>,
}

pub fn f_measure(dr: f64, ra: f64) -> f64 {
    if dr + ra > 0.0 {
        2.0 * dr * ra / (dr + ra)
    } else {
        0.0
    }
}

pub fn evaluate_icdar2013(
    gt: &[EvalRegion],
    pred: &[EvalRegion],
    threshold: f64,
) -> Result<Icdar2013Report> {
    check_threshold(threshold)?;
    let candidates = overlaps(gt, pred)
        .into_iter()
        .map(|(i, j, inter)| {
            (
                i,
                j,
                inter as f64 / (gt[i].len() + pred[j].len() - inter) as f64,
            )
        })
        .filter(|c| c.2 >= threshold)
        .collect();
    let matched = greedy_matching(candidates, gt.len(), pred.len());
    let m = matched.len();
    let rate = |n: usize| if n == 0 { 0.0 } else { m as f64 / n as f64 };
    let (dr, ra) = (rate(gt.len()), rate(pred.len()));
    Ok(Icdar2013Report {
        threshold,
        n1: gt.len(),
        n2: pred.len(),
        m,
        dr,
        ra,
        fm: f_measure(dr, ra),
        matches: matched
            .into_iter()
            .map(|(i, j, score)| RegionMatch {
                gt: gt[i].id,
                pred: pred[j].id,
                score,
            })
            .collect(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LineStatus {
    Correct,
    Missed,
    Extra,
    /// A matched pair failing both precision and recall.
    MissedAndExtra,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LineDiagnostic {
    pub gt: Option<u32>,
    pub pred: Option<u32>,
    pub iu: f64,
    pub tp: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
    pub precision: f64,
    pub recall: f64,
    pub status: LineStatus,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Icdar2017Report {
    pub threshold: f64,
    pub pixel_iu: f64,
    pub line_iu: f64,
    pub tp: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
    pub correct_lines: usize,
    pub missed_lines: usize,
    pub extra_lines: usize,
    pub lines: Vec<LineDiagnostic>,
}

/// Unmatched GT regions count as missed lines and their pixels as false
/// negatives; unmatched predictions count as extra lines and false positives.
pub fn evaluate_icdar2017(
    gt: &[EvalRegion],
    pred: &[EvalRegion],
    threshold: f64,
) -> Result<Icdar2017Report> {
    check_threshold(threshold)?;
    let inter: HashMap<(usize, usize), usize> = overlaps(gt, pred)
        .into_iter()
        .map(|(i, j, n)| ((i, j), n))
        .collect();
    let candidates = inter
        .iter()
        .map(|(&(i, j), &n)| (i, j, n as f64 / (gt[i].len() + pred[j].len() - n) as f64))
        .collect();
    let mut matched = greedy_matching(candidates, gt.len(), pred.len());
    matched.sort_by_key(|m| (m.0, m.1));

    let (mut tp, mut fp, mut fn_) = (0usize, 0usize, 0usize);
    let (mut cl, mut ml, mut el) = (0usize, 0usize, 0usize);
    let mut lines = Vec::new();
    let (mut seen_g, mut seen_p) = (vec![false; gt.len()], vec![false; pred.len()]);
    for &(i, j, iu) in &matched {
        seen_g[i] = true;
        seen_p[j] = true;
        let t = inter[&(i, j)];
        let (f_p, f_n) = (pred[j].len() - t, gt[i].len() - t);
        tp += t;
        fp += f_p;
        fn_ += f_n;
        let precision = t as f64 / (t + f_p) as f64;
        let recall = t as f64 / (t + f_n) as f64;
        let status = match (precision >= threshold, recall >= threshold) {
            (true, true) => {
                cl += 1;
                LineStatus::Correct
            }
            (true, false) => {
                ml += 1;
                LineStatus::Missed
            }
            (false, true) => {
                el += 1;
                LineStatus::Extra
            }
            (false, false) => {
                ml += 1;
                el += 1;
                LineStatus::MissedAndExtra
            }
        };
        lines.push(LineDiagnostic {
            gt: Some(gt[i].id),
            pred: Some(pred[j].id),
            iu,
            tp: t,
            fp: f_p,
            fn_: f_n,
            precision,
            recall,
            status,
        });
    }
    for (i, g) in gt.iter().enumerate().filter(|(i, _)| !seen_g[*i]) {
        ml += 1;
        fn_ += g.len();
        lines.push(LineDiagnostic {
            gt: Some(gt[i].id),
            pred: None,
            iu: 0.0,
            tp: 0,
            fp: 0,
            fn_: g.len(),
            precision: 0.0,
            recall: 0.0,
            status: LineStatus::Missed,
        });
    }
    for (j, p) in pred.iter().enumerate().filter(|(j, _)| !seen_p[*j]) {
        el += 1;
        fp += p.len();
        lines.push(LineDiagnostic {
            gt: None,
            pred: Some(pred[j].id),
            iu: 0.0,
            tp: 0,
            fp: p.len(),
            fn_: 0,
            precision: 0.0,
            recall: 0.0,
            status: LineStatus::Extra,
        });
    }
    let ratio = |num: usize, den: usize| {
        if den == 0 {
            0.0
        } else {
            num as f64 / den as f64
        }
    };
    Ok(Icdar2017Report {
        threshold,
        pixel_iu: ratio(tp, tp + fp + fn_),
        line_iu: ratio(cl, cl + ml + el),
        tp,
        fp,
        fn_,
        correct_lines: cl,
        missed_lines: ml,
        extra_lines: el,
        lines,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    Icdar2013,
    Icdar2017,
    #[default]
    Both,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub icdar2013: Option<Icdar2013Report>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub icdar2017: Option<Icdar2017Report>,
}

pub fn evaluate(
    gt: &[EvalRegion],
    pred: &[EvalRegion],
    suite: Suite,
    match_threshold: f64,
    iu_threshold: f64,
) -> Result<EvalReport> {
    Ok(EvalReport {
        icdar2013: match suite {
            Suite::Icdar2013 | Suite::Both => Some(evaluate_icdar2013(gt, pred, match_threshold)?),
            Suite::Icdar2017 => None,
        },
        icdar2017: match suite {
            Suite::Icdar2017 | Suite::Both => Some(evaluate_icdar2017(gt, pred, iu_threshold)?),
            Suite::Icdar2013 => None,
        },
    })
}

impl EvalReport {
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        if let Some(r) = &self.icdar2013 {
            let _ = writeln!(s, "ICDAR 2013 (MatchScore >= {})", r.threshold);
            let _ = writeln!(s, "  N1 {}  N2 {}  M {}", r.n1, r.n2, r.m);
            let _ = writeln!(s, "  DR {:.4}  RA {:.4}  FM {:.4}", r.dr, r.ra, r.fm);
        }
        if let Some(r) = &self.icdar2017 {
            let _ = writeln!(s, "ICDAR 2017 (threshold {})", r.threshold);
            let _ = writeln!(s, "  TP {}  FP {}  FN {}", r.tp, r.fp, r.fn_);
            let _ = writeln!(
                s,
                "  CL {}  ML {}  EL {}",
                r.correct_lines, r.missed_lines, r.extra_lines
            );
            let _ = writeln!(s, "  Pixel IU {:.4}  Line IU {:.4}", r.pixel_iu, r.line_iu);
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Pixels of the `w x h` rectangle at `(x, y)` on a 1000-wide grid.
    fn rect(id: u32, x: u32, y: u32, w: u32, h: u32) -> EvalRegion {
        EvalRegion::new(
            id,
            (y..y + h).flat_map(|r| (x..x + w).map(move |c| r * 1000 + c)),
        )
        .unwrap()
    }

    #[test]
    fn match_score_examples() {
        let g = rect(1, 0, 0, 10, 10);
        assert_eq!(match_score(&g, &g), 1.0);
        assert_eq!(match_score(&g, &rect(2, 50, 0, 10, 10)), 0.0);
        // 10x10 squares overlapping in a 9x10 block: 90 / 110.
        let r = rect(2, 1, 0, 10, 10);
        assert_eq!(g.intersection_len(&r), 90);
        assert_eq!(match_score(&g, &r), 90.0 / 110.0);
    }

    #[test]
    fn icdar2013_examples() {
        let gt = vec![rect(1, 0, 0, 50, 10), rect(2, 0, 20, 50, 10)];
        let same = evaluate_icdar2013(&gt, &gt, DEFAULT_MATCH_THRESHOLD).unwrap();
        assert_eq!((same.dr, same.ra, same.fm), (1.0, 1.0, 1.0));

        let mut pred = gt.clone();
        pred.push(rect(3, 0, 40, 50, 10));
        let r = evaluate_icdar2013(&gt, &pred, DEFAULT_MATCH_THRESHOLD).unwrap();
        assert_eq!(r.m, 2);
        assert_eq!(r.dr, 1.0);
        assert_eq!(r.ra, 2.0 / 3.0);
        assert_eq!(r.fm, 2.0 * (2.0 / 3.0) / (1.0 + 2.0 / 3.0));
        assert!((r.fm - 0.8).abs() < 1e-15);

        let (g, p) = (vec![rect(1, 0, 0, 10, 10)], vec![rect(1, 1, 0, 10, 10)]);
        let strict = evaluate_icdar2013(&g, &p, 0.9).unwrap();
        assert_eq!((strict.m, strict.fm), (0, 0.0));
        assert_eq!(evaluate_icdar2013(&g, &p, 0.5).unwrap().m, 1);
    }

    #[test]
    fn icdar2017_examples() {
        let gt = vec![rect(1, 0, 0, 50, 10)];
        let same = evaluate_icdar2017(&gt, &gt, DEFAULT_IU_THRESHOLD).unwrap();
        assert_eq!((same.pixel_iu, same.line_iu), (1.0, 1.0));

        let half = vec![rect(1, 0, 0, 25, 10)];
        let r = evaluate_icdar2017(&gt, &half, DEFAULT_IU_THRESHOLD).unwrap();
        assert_eq!(r.lines[0].recall, 0.5);
        assert_eq!(r.lines[0].status, LineStatus::Missed);
        assert_eq!(r.line_iu, 0.0);
        assert_eq!(r.pixel_iu, 0.5);

        let gt3 = vec![
            rect(1, 0, 0, 50, 10),
            rect(2, 0, 20, 50, 10),
            rect(3, 0, 40, 50, 10),
        ];
        let mut pred = gt3.clone();
        pred.push(rect(9, 0, 60, 50, 10));
        let r = evaluate_icdar2017(&gt3, &pred, DEFAULT_IU_THRESHOLD).unwrap();
        assert_eq!((r.correct_lines, r.missed_lines, r.extra_lines), (3, 0, 1));
        assert_eq!(r.line_iu, 0.75);
    }

    #[test]
    fn empty_inputs() {
        let r = evaluate(&[], &[], Suite::Both, 0.9, 0.75).unwrap();
        let a = r.icdar2013.unwrap();
        let b = r.icdar2017.unwrap();
        assert_eq!((a.dr, a.ra, a.fm), (0.0, 0.0, 0.0));
        assert_eq!((b.pixel_iu, b.line_iu), (0.0, 0.0));
        assert!(b.lines.is_empty());
    }

    #[test]
    fn threshold_validated() {
        assert!(matches!(
            evaluate_icdar2013(&[], &[], 0.0),
            Err(Error::Threshold(_))
        ));
        assert!(matches!(
            evaluate_icdar2017(&[], &[], 1.5),
            Err(Error::Threshold(_))
        ));
    }

    #[test]
    fn largest_polygon_versus_merged() {
        let fg = BinaryPage::from_fn(100, 20, |_, _| true).unwrap();
        let lines = vec![(
            1,
            vec![
                Ring::rectangle(0, 0, 30, 10),
                Ring::rectangle(50, 0, 40, 10),
            ],
        )];
        let largest = regions_from_rings(&lines, &fg, false);
        let merged = regions_from_rings(&lines, &fg, true);
        assert_eq!(largest[0].len(), 400);
        assert_eq!(merged[0].len(), 700);
    }

    fn arb_regions() -> impl Strategy<Value = Vec<EvalRegion>> {
        proptest::collection::vec((0u32..40, 0u32..40, 1u32..15, 1u32..15), 0..6).prop_map(|v| {
            v.into_iter()
                .enumerate()
                .map(|(i, (x, y, w, h))| rect(i as u32 + 1, x, y, w, h))
                .collect()
        })
    }

    proptest! {
        #[test]
        fn score_symmetric_and_bounded(a in arb_regions(), b in arb_regions()) {
            for g in &a {
                for r in &b {
                    let s = match_score(g, r);
                    prop_assert_eq!(s, match_score(r, g));
                    prop_assert!((0.0..=1.0).contains(&s));
                }
            }
        }

        #[test]
        fn rates_invariant_under_permutation(gt in arb_regions(), pred in arb_regions(), t in 0.05f64..1.0) {
            let r = evaluate(&gt, &pred, Suite::Both, t, t).unwrap();
            let a = r.icdar2013.as_ref().unwrap();
            prop_assert!(a.m <= gt.len().min(pred.len()));
            let mut pg = gt.clone();
            pg.reverse();
            let mut pp = pred.clone();
            let shift = pp.len().min(1);
            pp.rotate_left(shift);
            let q = evaluate(&pg, &pp, Suite::Both, t, t).unwrap();
            // Tie-breaking follows index order, so only totals are compared.
            let b = r.icdar2017.as_ref().unwrap();
            let qb = q.icdar2017.as_ref().unwrap();
            prop_assert_eq!(b.tp + b.fn_, qb.tp + qb.fn_);
            let gt_total: usize = gt.iter().map(|g| g.len()).sum();
            prop_assert_eq!(b.tp + b.fn_, gt_total);
        }

        #[test]
        fn identical_partition_scores_one(gt in arb_regions()) {
            // Make a disjoint partition by keeping only pixels not claimed earlier.
            let mut claimed = std::collections::HashSet::new();
            let parts: Vec<EvalRegion> = gt
                .iter()
                .filter_map(|g| EvalRegion::new(g.id, g.pixels().iter().copied().filter(|p| claimed.insert(*p)).collect::<Vec<_>>()))
                .collect();
            let r = evaluate_icdar2017(&parts, &parts, 0.75).unwrap();
            if !parts.is_empty() {
                prop_assert_eq!(r.pixel_iu, 1.0);
                prop_assert_eq!(r.line_iu, 1.0);
            }
        }
    }
}
