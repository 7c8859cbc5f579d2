use std::collections::BTreeSet;

use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use vulnrank_eval::{kfold_split, precision_at_k, prefix_len, rank, recall_at_k, MetricReport, K_VALUES};

/// Set-intersection recomputation with the prefix size taken from real
/// arithmetic rather than integer division.
fn brute(ranked: &[usize], tps: &BTreeSet<usize>, k: u32) -> (f64, Option<f64>) {
    let n = (k as f64 * ranked.len() as f64 / 100.0).ceil() as usize;
    let prefix: BTreeSet<usize> = ranked.iter().take(n).copied().collect();
    let actual: BTreeSet<usize> = ranked.iter().copied().filter(|i| tps.contains(i)).collect();
    let hit = prefix.intersection(&actual).count();
    let p = if n == 0 { 0.0 } else { hit as f64 / n as f64 };
    (p, (!actual.is_empty()).then(|| hit as f64 / actual.len() as f64))
}

#[test]
fn brute_force_agreement_on_random_instances() {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    for _ in 0..1000 {
        let n = rng.gen_range(1..=20);
        let mut ranked: Vec<usize> = (0..n).collect();
        ranked.shuffle(&mut rng);
        let tps: BTreeSet<usize> = (0..n).filter(|_| rng.gen_bool(0.3)).collect();
        let tv: Vec<usize> = tps.iter().copied().collect();
        for k in K_VALUES.into_iter().chain([1, 33, 100]) {
            let (p, r) = brute(&ranked, &tps, k);
            assert_eq!(precision_at_k(&ranked, &tv, k), p);
            assert_eq!(recall_at_k(&ranked, &tv, k), r);
        }
    }
}

#[test]
fn hand_computed_fixture() {
    // N = 100, 10 TPs, all five top-5% entries are TPs.
    let ranked: Vec<usize> = (0..100).collect();
    let tps: Vec<usize> = vec![0, 1, 2, 3, 4, 50, 60, 70, 80, 90];
    assert_eq!(precision_at_k(&ranked, &tps, 5), 1.0);
    assert_eq!(recall_at_k(&ranked, &tps, 5), Some(0.5));
    assert_eq!(recall_at_k(&ranked, &tps, 50), Some(0.5));
    assert_eq!(precision_at_k(&ranked, &tps, 60), 0.1);
    assert_eq!(recall_at_k(&ranked, &tps, 61), Some(0.7));
    assert_eq!(recall_at_k(&ranked, &tps, 100), Some(1.0));
}

#[test]
fn rank_fixture_and_permutations() {
    assert_eq!(rank(&[0.2, 0.9, 0.9], &[0, 1, 2]).unwrap(), [1, 2, 0]);
    // Every permutation of five distinct scores yields the same order.
    let scores = [0.5, 0.1, 0.9, 0.3, 0.7];
    let expected = [2, 4, 0, 3, 1];
    let mut perm: Vec<usize> = (0..5).collect();
    let mut count = 0;
    loop {
        let s: Vec<f64> = perm.iter().map(|&i| scores[i]).collect();
        assert_eq!(rank(&s, &perm).unwrap(), expected);
        count += 1;
        // Next lexicographic permutation.
        let Some(i) = (0..4).rev().find(|&i| perm[i] < perm[i + 1]) else { break };
        let j = (i + 1..5).rev().find(|&j| perm[j] > perm[i]).unwrap();
        perm.swap(i, j);
        perm[i + 1..].reverse();
    }
    assert_eq!(count, 120);
}

proptest! {
    #[test]
    fn recall_monotone_in_k(labels in prop::collection::vec(any::<bool>(), 1..60), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let scores: Vec<f64> = labels.iter().map(|_| rng.gen()).collect();
        let r = MetricReport::from_scores(&scores, &labels).unwrap();
        let rec: Vec<Option<f64>> = r.at.iter().map(|a| a.recall).collect();
        for w in rec.windows(2) {
            if let (Some(a), Some(b)) = (w[0], w[1]) {
                prop_assert!(a <= b);
            }
        }
        for a in &r.at {
            prop_assert!((0.0..=1.0).contains(&a.precision));
            prop_assert!(a.recall.is_none_or(|v| (0.0..=1.0).contains(&v)));
        }
    }

    #[test]
    fn precision_at_100_is_base_rate(labels in prop::collection::vec(any::<bool>(), 1..80)) {
        let ranked: Vec<usize> = (0..labels.len()).collect();
        let tps: Vec<usize> = ranked.iter().copied().filter(|&i| labels[i]).collect();
        prop_assert_eq!(precision_at_k(&ranked, &tps, 100), tps.len() as f64 / labels.len() as f64);
    }

    #[test]
    fn label_ranker_recall(labels in prop::collection::vec(any::<bool>(), 1..80)) {
        let t = labels.iter().filter(|&&b| b).count();
        prop_assume!(t > 0);
        let scores: Vec<f64> = labels.iter().map(|&b| b as u8 as f64).collect();
        let r = MetricReport::from_scores(&scores, &labels).unwrap();
        for a in &r.at {
            let expected = (prefix_len(a.k, labels.len()) as f64 / t as f64).min(1.0);
            prop_assert_eq!(a.recall, Some(expected));
        }
    }

    #[test]
    fn folds_partition_and_stratify(labels in prop::collection::vec(any::<bool>(), 5..120), k in 2usize..6, seed in any::<u64>()) {
        let folds = kfold_split(&labels, k, seed).unwrap();
        let t = labels.iter().filter(|&&b| b).count();
        let n = labels.len();
        for f in 0..k {
            let members: Vec<usize> = (0..n).filter(|&i| folds[i] == f).collect();
            prop_assert!(members.len() == n / k || members.len() == n.div_ceil(k));
            let ft = members.iter().filter(|&&i| labels[i]).count();
            prop_assert!(ft == t / k || ft == t.div_ceil(k));
        }
    }
}
