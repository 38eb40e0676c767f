use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{Dataset, Label};
use crate::error::{Error, Result};

/// Assignment of every report to one of `k` folds.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoldPlan {
    pub k: usize,
    pub assignments: Vec<usize>,
}

impl FoldPlan {
    /// Row indices held out in fold `fold`, ascending.
    pub fn test_indices(&self, fold: usize) -> Vec<usize> {
        (0..self.assignments.len())
            .filter(|&i| self.assignments[i] == fold)
            .collect()
    }

    /// Row indices used for training when `fold` is held out, ascending.
    pub fn train_indices(&self, fold: usize) -> Vec<usize> {
        (0..self.assignments.len())
            .filter(|&i| self.assignments[i] != fold)
            .collect()
    }

    pub fn fold_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.k];
        for &f in &self.assignments {
            sizes[f] += 1;
        }
        sizes
    }
}

/// Indices of each class in dataset order, `[bug, non-bug]`.
fn class_indices(ds: &Dataset) -> [Vec<usize>; 2] {
    let mut classes = [Vec::new(), Vec::new()];
    for (i, r) in ds.reports.iter().enumerate() {
        classes[r.label.index()].push(i);
    }
    classes
}

/// Stratified k-fold assignment.
///
/// Each class is shuffled with `seed` and the classes, bug first, are then
/// dealt round-robin over the folds as one sequence. Fold sizes and per-fold
/// class counts therefore differ from the ideal by less than one.
pub fn stratified_kfold(ds: &Dataset, k: usize, seed: u64) -> Result<FoldPlan> {
    if k < 2 {
        return Err(Error::InvalidArgument(format!(
            "fold count must be at least 2, got {k}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut classes = class_indices(ds);
    for (label, members) in Label::ALL.iter().zip(&classes) {
        if members.len() < k {
            return Err(Error::InfeasibleStratification {
                class: label.as_str(),
                size: members.len(),
                k,
            });
        }
    }
    let mut assignments = vec![0; ds.len()];
    let mut position = 0;
    for members in classes.iter_mut() {
        members.shuffle(&mut rng);
        for &i in members.iter() {
            assignments[i] = position % k;
            position += 1;
        }
    }
    Ok(FoldPlan { k, assignments })
}

/// Stratified split into `(train, test)` with
/// `|test| = round(len × test_fraction)`. Both parts keep dataset order.
pub fn train_test_split(ds: &Dataset, test_fraction: f64, seed: u64) -> Result<(Dataset, Dataset)> {
    if !(test_fraction > 0.0 && test_fraction < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "test fraction must lie strictly between 0 and 1, got {test_fraction}"
        )));
    }
    let target = (ds.len() as f64 * test_fraction).round() as usize;
    let mut classes = class_indices(ds);

    // Largest-remainder apportionment of the test quota over the classes.
    let exact: Vec<f64> = classes.iter().map(|c| c.len() as f64 * test_fraction).collect();
    let mut quota: Vec<usize> = exact.iter().map(|q| q.floor() as usize).collect();
    let mut order: Vec<usize> = (0..classes.len()).collect();
    order.sort_by(|&a, &b| {
        let ra = exact[a] - exact[a].floor();
        let rb = exact[b] - exact[b].floor();
        rb.total_cmp(&ra).then(a.cmp(&b))
    });
    let mut remaining = target - quota.iter().sum::<usize>();
    for &c in order.iter().cycle().take(2 * classes.len()) {
        if remaining == 0 {
            break;
        }
        if quota[c] < classes[c].len() {
            quota[c] += 1;
            remaining -= 1;
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut in_test = vec![false; ds.len()];
    for (members, &q) in classes.iter_mut().zip(&quota) {
        members.shuffle(&mut rng);
        for &i in &members[..q] {
            in_test[i] = true;
        }
    }
    let (test, train): (Vec<usize>, Vec<usize>) = (0..ds.len()).partition(|&i| in_test[i]);
    Ok((ds.subset(&train), ds.subset(&test)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::tests::report;
    use crate::corpus::Intention;
    use proptest::prelude::*;
    use std::collections::BTreeSet;

    fn dataset(bugs: usize, nonbugs: usize) -> Dataset {
        let mut reports = Vec::new();
        for i in 0..bugs + nonbugs {
            let label = if i < bugs { Label::Bug } else { Label::NonBug };
            reports.push(report(&i.to_string(), label, Intention::Explanation));
        }
        Dataset::new(reports, "t")
    }

    #[test]
    fn balanced_hundred_into_ten() {
        let ds = dataset(50, 50);
        let plan = stratified_kfold(&ds, 10, 7).unwrap();
        for fold in 0..10 {
            let test = plan.test_indices(fold);
            assert_eq!(test.len(), 10);
            let bugs = test.iter().filter(|&&i| ds.reports[i].label == Label::Bug).count();
            assert_eq!(bugs, 5);
        }
    }

    #[test]
    fn class_smaller_than_k_is_infeasible() {
        let ds = dataset(10, 1);
        assert!(matches!(
            stratified_kfold(&ds, 10, 0),
            Err(Error::InfeasibleStratification {
                class: "non-bug",
                size: 1,
                k: 10
            })
        ));
    }

    #[test]
    fn kfold_is_deterministic() {
        let ds = dataset(37, 23);
        assert_eq!(
            stratified_kfold(&ds, 10, 3).unwrap(),
            stratified_kfold(&ds, 10, 3).unwrap()
        );
        assert_ne!(
            stratified_kfold(&ds, 10, 3).unwrap(),
            stratified_kfold(&ds, 10, 4).unwrap()
        );
    }

    #[test]
    fn eighty_twenty() {
        let ds = dataset(60, 40);
        let (train, test) = train_test_split(&ds, 0.2, 1).unwrap();
        assert_eq!((train.len(), test.len()), (80, 20));
        let test_bugs = test.reports.iter().filter(|r| r.label == Label::Bug).count();
        assert_eq!(test_bugs, 12);
    }

    #[test]
    fn fraction_out_of_range() {
        let ds = dataset(5, 5);
        for f in [0.0, 1.0, -0.1, 1.5, f64::NAN] {
            assert!(matches!(train_test_split(&ds, f, 0), Err(Error::InvalidArgument(_))));
        }
    }

    proptest! {
        #[test]
        fn kfold_invariants(bugs in 10usize..80, nonbugs in 10usize..80, k in 2usize..11, seed in any::<u64>()) {
            let ds = dataset(bugs, nonbugs);
            let plan = stratified_kfold(&ds, k, seed).unwrap();
            prop_assert_eq!(plan.assignments.len(), ds.len());
            let sizes = plan.fold_sizes();
            prop_assert!(sizes.iter().max().unwrap() - sizes.iter().min().unwrap() <= 1);
            let mut all = Vec::new();
            for fold in 0..k {
                let test = plan.test_indices(fold);
                for (label, n) in [(Label::Bug, bugs), (Label::NonBug, nonbugs)] {
                    let count = test.iter().filter(|&&i| ds.reports[i].label == label).count() as f64;
                    prop_assert!((count - n as f64 / k as f64).abs() < 1.0);
                }
                all.extend(test);
            }
            all.sort_unstable();
            prop_assert_eq!(all, (0..ds.len()).collect::<Vec<_>>());
        }

        #[test]
        fn split_is_a_partition(bugs in 1usize..60, nonbugs in 1usize..60, f in 0.05f64..0.95, seed in any::<u64>()) {
            let ds = dataset(bugs, nonbugs);
            let (train, test) = train_test_split(&ds, f, seed).unwrap();
            prop_assert_eq!(test.len(), (ds.len() as f64 * f).round() as usize);
            let a: BTreeSet<_> = train.reports.iter().map(|r| r.id.clone()).collect();
            let b: BTreeSet<_> = test.reports.iter().map(|r| r.id.clone()).collect();
            prop_assert!(a.is_disjoint(&b));
            let all: BTreeSet<_> = ds.reports.iter().map(|r| r.id.clone()).collect();
            prop_assert_eq!(a.union(&b).cloned().collect::<BTreeSet<_>>(), all);
        }
    }
}
