//! Cutpoints over the observed range of a continuous attribute.
//!
//! Every method returns `cp_0 = min(data)` and `cp_l = max(data)` so that the
//! bins span all observations. Bin `0` is `[cp_0, cp_1]` and bin `i > 0` is
//! `(cp_i, cp_{i+1}]`; see [`Discretization::bin_index`].

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::error::{Error, Result};
use crate::math;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Method {
    EqualWidth,
    EqualFrequency,
    EntropyDistance,
}

impl Method {
    /// Short name used in stats records and on the command line.
    pub fn short_name(self) -> &'static str {
        match self {
            Method::EqualWidth => "ew",
            Method::EqualFrequency => "ef",
            Method::EntropyDistance => "distance",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.short_name())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Discretization {
    pub method: Method,
    /// Bin count that was asked for; `bins()` can be smaller after merges.
    pub requested_bins: usize,
    pub cutpoints: Vec<f64>,
    /// Supervised splitting ran out of class boundaries before reaching
    /// `requested_bins`.
    pub exhausted: bool,
}

impl Discretization {
    pub fn bins(&self) -> usize {
        self.cutpoints.len() - 1
    }

    pub fn min(&self) -> f64 {
        self.cutpoints[0]
    }

    pub fn max(&self) -> f64 {
        self.cutpoints[self.cutpoints.len() - 1]
    }

    /// Bin holding `x`: the first bin is closed, later bins are open on the left.
    pub fn bin_index(&self, x: f64) -> Option<usize> {
        if !(self.min()..=self.max()).contains(&x) {
            return None;
        }
        let above = self.cutpoints[1..].partition_point(|&c| c < x);
        Some(above.min(self.bins() - 1))
    }

    /// Number of `data` values per bin.
    pub fn occupancy(&self, data: &[f64]) -> Vec<usize> {
        let mut counts = vec![0; self.bins()];
        for &x in data {
            if let Some(i) = self.bin_index(x) {
                counts[i] += 1;
            }
        }
        counts
    }
}

fn finite_range(data: &[f64]) -> Result<(f64, f64)> {
    if data.iter().any(|x| !x.is_finite()) {
        return Err(Error::Contract("data must be finite".into()));
    }
    let lo = data.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = data.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !(lo < hi) {
        return Err(Error::DegenerateInput("need at least two distinct values".into()));
    }
    Ok((lo, hi))
}

fn check_bins(l: usize) -> Result<()> {
    if l < 1 {
        return Err(Error::DegenerateInput("bin count must be at least 1".into()));
    }
    Ok(())
}

fn check_sorted(data: &[f64]) -> Result<()> {
    if data.windows(2).any(|w| !(w[0] <= w[1])) {
        return Err(Error::Contract("data must be sorted ascending".into()));
    }
    Ok(())
}

/// `l` intervals of width `(max - min) / l`.
pub fn equal_width(data: &[f64], l: usize) -> Result<Discretization> {
    check_bins(l)?;
    let (lo, hi) = finite_range(data)?;
    let width = (hi - lo) / l as f64;
    let mut cutpoints: Vec<f64> = (0..l).map(|i| lo + width * i as f64).collect();
    cutpoints.push(hi);
    if cutpoints.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::DegenerateInput(format!(
            "range [{lo}, {hi}] is too narrow for {l} bins"
        )));
    }
    Ok(Discretization {
        method: Method::EqualWidth,
        requested_bins: l,
        cutpoints,
        exhausted: false,
    })
}

/// Cutpoints at order statistics so bins hold (nearly) equal counts.
///
/// The `i`-th interior cutpoint is the `m_i`-th smallest value with
/// `m_i = round(i * n / l)`, which keeps bin counts within one of each other.
/// A cutpoint whose value continues past it (a tie) or equals the minimum
/// moves to the midpoint between that value and the next distinct one;
/// cutpoints that would not be strictly increasing are dropped, merging their
/// bins.
pub fn equal_frequency(sorted: &[f64], l: usize) -> Result<Discretization> {
    check_bins(l)?;
    let (lo, hi) = finite_range(sorted)?;
    check_sorted(sorted)?;
    let n = sorted.len();
    let distinct = 1 + sorted.windows(2).filter(|w| w[0] < w[1]).count();
    if l > distinct {
        return Err(Error::DegenerateInput(format!(
            "{l} bins requested but only {distinct} distinct values"
        )));
    }

    let mut cutpoints = vec![lo];
    for i in 1..l {
        // 1-based rank rounded half up
        let m = (2 * i * n + l) / (2 * l);
        let idx = m.clamp(1, n) - 1;
        let v = sorted[idx];
        let cut = if (idx + 1 < n && sorted[idx + 1] == v) || v == lo {
            match sorted[idx + 1..].iter().find(|&&x| x > v) {
                Some(&next) => v + (next - v) / 2.0,
                None => continue,
            }
        } else {
            v
        };
        if cut > cutpoints[cutpoints.len() - 1] && cut < hi {
            cutpoints.push(cut);
        }
    }
    cutpoints.push(hi);
    Ok(Discretization {
        method: Method::EqualFrequency,
        requested_bins: l,
        cutpoints,
        exhausted: false,
    })
}

/// Entropy terms of a partition, kept incrementally while splitting.
struct PartitionEntropy {
    total: f64,
    class_entropy: f64,
}

impl PartitionEntropy {
    fn term(&self, count: f64) -> f64 {
        if count <= 0.0 {
            0.0
        } else {
            let p = count / self.total;
            -p * math::ln(p)
        }
    }

    /// (joint entropy term, partition entropy term) of one cell.
    fn cell(&self, counts: &[f64]) -> (f64, f64) {
        let joint = counts.iter().map(|&c| self.term(c)).sum();
        let size: f64 = counts.iter().sum();
        (joint, self.term(size))
    }

    /// `1 - I(C;P) / H(C,P)` from summed cell terms.
    fn distance(&self, joint: f64, part: f64) -> f64 {
        if joint <= 0.0 {
            return 0.0;
        }
        let mutual = self.class_entropy + part - joint;
        1.0 - mutual / joint
    }
}

/// Normalized entropy distance `1 - I(C;P)/H(C,P)` between class labels and
/// the partition induced by `cutpoints` (interior cuts only).
pub fn mantaras_distance<L: Ord>(pairs: &[(f64, L)], cuts: &[f64]) -> f64 {
    let mut classes: Vec<&L> = pairs.iter().map(|(_, c)| c).collect();
    classes.sort();
    classes.dedup();
    let mut counts = vec![vec![0.0; classes.len()]; cuts.len() + 1];
    for (x, c) in pairs {
        let cell = cuts.partition_point(|&cut| cut < *x);
        let k = classes.binary_search(&c).unwrap_or(0);
        counts[cell][k] += 1.0;
    }
    let total = pairs.len() as f64;
    let mut class_counts = vec![0.0; classes.len()];
    for cell in &counts {
        for (k, c) in cell.iter().enumerate() {
            class_counts[k] += c;
        }
    }
    let mut ent = PartitionEntropy {
        total,
        class_entropy: 0.0,
    };
    ent.class_entropy = class_counts.iter().map(|&c| ent.term(c)).sum();
    let (joint, part) = counts
        .iter()
        .map(|c| ent.cell(c))
        .fold((0.0, 0.0), |(a, b), (j, p)| (a + j, b + p));
    ent.distance(joint, part)
}

/// Candidate cuts between consecutive distinct values whose class content
/// differs: midpoints, in ascending order, with the index of the last group
/// left of each cut.
fn boundary_candidates<L: Ord>(pairs: &[(f64, L)]) -> Vec<(f64, usize)> {
    let mut groups: Vec<(f64, &L, bool)> = Vec::new(); // value, first label, pure
    for (x, c) in pairs {
        match groups.last_mut() {
            Some(g) if g.0 == *x => {
                if g.1 != c {
                    g.2 = false;
                }
            }
            _ => groups.push((*x, c, true)),
        }
    }
    groups
        .windows(2)
        .enumerate()
        .filter(|(_, w)| !(w[0].2 && w[1].2 && w[0].1 == w[1].1))
        .map(|(i, w)| (w[0].0 + (w[1].0 - w[0].0) / 2.0, i))
        .collect()
}

/// Supervised cutpoints by greedy splitting on the Mantaras distance.
///
/// Candidate cuts are the boundary points between adjacent distinct values of
/// differing class. Each step adds the candidate whose resulting partition has
/// the smallest distance (ties go to the smaller cut) until `l` bins exist or
/// no candidate remains, in which case `exhausted` is set.
pub fn entropy_distance<L: Ord>(pairs: &[(f64, L)], l: usize) -> Result<Discretization> {
    check_bins(l)?;
    let values: Vec<f64> = pairs.iter().map(|p| p.0).collect();
    let (lo, hi) = finite_range(&values)?;
    check_sorted(&values)?;

    let mut classes: Vec<&L> = pairs.iter().map(|(_, c)| c).collect();
    classes.sort();
    classes.dedup();
    let nc = classes.len();

    // prefix[i][k]: count of class k among the first i points
    let mut prefix = vec![vec![0.0; nc]; pairs.len() + 1];
    for (i, (_, c)) in pairs.iter().enumerate() {
        let k = classes.binary_search(&c).unwrap_or(0);
        prefix[i + 1] = prefix[i].clone();
        prefix[i + 1][k] += 1.0;
    }
    let range_counts =
        |from: usize, to: usize| -> Vec<f64> { (0..nc).map(|k| prefix[to][k] - prefix[from][k]).collect() };

    let mut ent = PartitionEntropy {
        total: pairs.len() as f64,
        class_entropy: 0.0,
    };
    ent.class_entropy = prefix[pairs.len()].iter().map(|&c| ent.term(c)).sum();

    // candidate cut -> split position in the point sequence
    let candidates: Vec<(f64, usize)> = boundary_candidates(pairs)
        .into_iter()
        .map(|(cut, _)| (cut, values.partition_point(|&x| x < cut)))
        .collect();
    let mut chosen = vec![false; candidates.len()];
    // cell boundaries as point positions, always containing 0 and n
    let mut splits: Vec<usize> = vec![0, pairs.len()];
    let (mut joint, mut part) = ent.cell(&range_counts(0, pairs.len()));

    while splits.len() - 1 < l {
        let mut best: Option<(f64, usize, f64, f64)> = None;
        for (ci, &(_, pos)) in candidates.iter().enumerate() {
            if chosen[ci] {
                continue;
            }
            let cell = splits.partition_point(|&s| s < pos);
            let (a, b) = (splits[cell - 1], splits[cell]);
            let (j_old, p_old) = ent.cell(&range_counts(a, b));
            let (j_l, p_l) = ent.cell(&range_counts(a, pos));
            let (j_r, p_r) = ent.cell(&range_counts(pos, b));
            let j = joint - j_old + j_l + j_r;
            let p = part - p_old + p_l + p_r;
            let d = ent.distance(j, p);
            if best.is_none_or(|(bd, ..)| d < bd) {
                best = Some((d, ci, j, p));
            }
        }
        let Some((_, ci, j, p)) = best else { break };
        chosen[ci] = true;
        joint = j;
        part = p;
        let pos = candidates[ci].1;
        let at = splits.partition_point(|&s| s < pos);
        splits.insert(at, pos);
    }

    let mut cutpoints = vec![lo];
    cutpoints.extend(
        candidates
            .iter()
            .zip(&chosen)
            .filter(|(_, &c)| c)
            .map(|((cut, _), _)| *cut),
    );
    cutpoints.push(hi);
    let bins = cutpoints.len() - 1;
    Ok(Discretization {
        method: Method::EntropyDistance,
        requested_bins: l,
        cutpoints,
        exhausted: bins < l,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn range(lo: i32, hi: i32) -> Vec<f64> {
        (lo..=hi).map(f64::from).collect()
    }

    #[test]
    fn equal_width_examples() {
        let d = equal_width(&[0.0, 3.0, 10.0], 5).unwrap();
        assert_eq!(d.cutpoints, vec![0.0, 2.0, 4.0, 6.0, 8.0, 10.0]);
        assert_eq!(equal_width(&[0.0, 10.0], 1).unwrap().cutpoints, vec![0.0, 10.0]);
        assert_eq!(
            equal_width(&[-1.0, 1.0], 4).unwrap().cutpoints,
            vec![-1.0, -0.5, 0.0, 0.5, 1.0]
        );
    }

    #[test]
    fn equal_width_errors() {
        assert!(matches!(equal_width(&[1.0, 2.0], 0), Err(Error::DegenerateInput(_))));
        assert!(matches!(
            equal_width(&[3.0, 3.0, 3.0], 2),
            Err(Error::DegenerateInput(_))
        ));
    }

    #[test]
    fn equal_frequency_examples() {
        assert_eq!(
            equal_frequency(&range(1, 10), 2).unwrap().cutpoints,
            vec![1.0, 5.0, 10.0]
        );
        let d = equal_frequency(&range(1, 9), 3).unwrap();
        assert_eq!(d.cutpoints, vec![1.0, 3.0, 6.0, 9.0]);
        assert_eq!(d.occupancy(&range(1, 9)), vec![3, 3, 3]);
        assert_eq!(equal_frequency(&range(1, 9), 1).unwrap().cutpoints, vec![1.0, 9.0]);
    }

    #[test]
    fn equal_frequency_ties_shift_to_midpoint() {
        let data = [1.0, 2.0, 2.0, 2.0, 3.0, 4.0];
        // rank 3 is a 2 that continues at rank 4
        let d = equal_frequency(&data, 2).unwrap();
        assert_eq!(d.cutpoints, vec![1.0, 2.5, 4.0]);
    }

    #[test]
    fn equal_frequency_first_cut_leaves_the_minimum() {
        let d = equal_frequency(&range(1, 3), 3).unwrap();
        assert_eq!(d.cutpoints, vec![1.0, 1.5, 2.0, 3.0]);
        assert_eq!(d.occupancy(&range(1, 3)), vec![1, 1, 1]);
    }

    #[test]
    fn equal_frequency_merges_when_no_room() {
        let low_ties = [1.0, 1.0, 1.0, 1.0, 1.0, 2.0];
        assert_eq!(equal_frequency(&low_ties, 2).unwrap().cutpoints, vec![1.0, 1.5, 2.0]);
        // the tied value is the maximum, so the cut has nowhere to go
        let high_ties = [1.0, 2.0, 2.0, 2.0, 2.0, 2.0];
        let d = equal_frequency(&high_ties, 2).unwrap();
        assert_eq!(d.cutpoints, vec![1.0, 2.0]);
        assert_eq!(d.bins(), 1);
        assert!(equal_frequency(&high_ties, 3).is_err());
        assert!(equal_frequency(&[2.0, 1.0], 1).is_err());
    }

    #[test]
    fn entropy_distance_examples() {
        let pairs = [(1.0, 'A'), (2.0, 'A'), (3.0, 'B'), (4.0, 'B')];
        let d = entropy_distance(&pairs, 2).unwrap();
        assert_eq!(d.cutpoints, vec![1.0, 2.5, 4.0]);
        assert!(!d.exhausted);

        let same = [(1.0, 'A'), (2.0, 'A'), (3.0, 'A')];
        let d = entropy_distance(&same, 2).unwrap();
        assert_eq!(d.cutpoints, vec![1.0, 3.0]);
        assert!(d.exhausted);

        assert_eq!(entropy_distance(&pairs, 1).unwrap().cutpoints, vec![1.0, 4.0]);
    }

    #[test]
    fn distance_prefers_the_class_boundary() {
        let pairs = [(1.0, 'A'), (2.0, 'A'), (3.0, 'B'), (4.0, 'B')];
        let at = |c: f64| mantaras_distance(&pairs, &[c]);
        assert!(at(2.5) < at(1.5));
        assert!(at(2.5) < at(3.5));
        assert!(at(2.5).abs() < 1e-12);
    }

    #[test]
    fn mixed_groups_are_boundaries() {
        // value 2 carries both classes, so cuts on both sides of it qualify
        let pairs = [(1.0, 0), (2.0, 0), (2.0, 1), (3.0, 1)];
        let cands: Vec<f64> = boundary_candidates(&pairs).iter().map(|c| c.0).collect();
        assert_eq!(cands, vec![1.5, 2.5]);
    }

    #[test]
    fn bin_index_convention() {
        let d = equal_frequency(&range(1, 9), 3).unwrap();
        assert_eq!(d.bin_index(1.0), Some(0));
        assert_eq!(d.bin_index(3.0), Some(0));
        assert_eq!(d.bin_index(3.5), Some(1));
        assert_eq!(d.bin_index(9.0), Some(2));
        assert_eq!(d.bin_index(9.5), None);
    }
}
