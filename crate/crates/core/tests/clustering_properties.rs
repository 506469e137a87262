use proptest::prelude::*;
use tleak_core::clustering::{clustering_accuracy, hungarian, kmeans, KMeansConfig};
use tleak_core::{EmbeddingSet, LabelVector};

/// Minimum over all permutations, each summed in row order.
fn brute_force(cost: &[Vec<f64>]) -> (f64, Vec<usize>) {
    fn rec(cost: &[Vec<f64>], row: usize, used: &mut Vec<bool>, cur: &mut Vec<usize>, best: &mut (f64, Vec<usize>)) {
        let n = cost.len();
        if row == n {
            let total = cur.iter().enumerate().map(|(i, &j)| cost[i][j]).fold(0.0, |a, c| a + c);
            if total < best.0 {
                *best = (total, cur.clone());
            }
            return;
        }
        for j in 0..n {
            if !used[j] {
                used[j] = true;
                cur.push(j);
                rec(cost, row + 1, used, cur, best);
                cur.pop();
                used[j] = false;
            }
        }
    }
    let mut best = (f64::INFINITY, Vec::new());
    rec(cost, 0, &mut vec![false; cost.len()], &mut Vec::new(), &mut best);
    best
}

fn cost_matrix() -> impl Strategy<Value = Vec<Vec<f64>>> {
    (1usize..=6).prop_flat_map(|n| {
        prop_oneof![
            prop::collection::vec(prop::collection::vec(-100.0f64..100.0, n), n),
            prop::collection::vec(prop::collection::vec((0i32..4).prop_map(f64::from), n), n),
        ]
    })
}

fn labels_pair() -> impl Strategy<Value = (Vec<usize>, Vec<usize>)> {
    (1usize..60, 1usize..7).prop_flat_map(|(n, c)| {
        (prop::collection::vec(0..c, n), prop::collection::vec(0..c, n))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn hungarian_matches_enumeration(cost in cost_matrix()) {
        let a = hungarian(&cost).unwrap();
        let (best, best_perm) = brute_force(&cost);
        prop_assert_eq!(a.total_cost, best);
        // brute force keeps the first minimum in lexicographic order
        prop_assert_eq!(a.permutation, best_perm);
    }

    #[test]
    fn accuracy_permutation_invariant((t, p) in labels_pair(), seed in any::<u64>()) {
        let yt = LabelVector::truth(t).unwrap();
        let yp = LabelVector::truth(p.clone()).unwrap();
        let c = yp.num_classes();
        let mut perm: Vec<usize> = (0..c).collect();
        let mut s = tleak_core::rng::stream(seed);
        for i in (1..c).rev() {
            perm.swap(i, tleak_core::rng::index_below(&mut s, i + 1));
        }
        let yq = LabelVector::truth(p.iter().map(|&l| perm[l]).collect()).unwrap();
        let a = clustering_accuracy(&yt, &yp).unwrap();
        let b = clustering_accuracy(&yt, &yq).unwrap();
        prop_assert_eq!(a.accuracy, b.accuracy);
        prop_assert!(a.accuracy <= 1.0);
        let c_eff = yt.num_classes().max(yp.num_classes()) as f64;
        prop_assert!(a.accuracy >= 1.0 / c_eff - 1e-12);
        let matched = (0..yt.len())
            .filter(|&i| a.mapping[yp.labels()[i]] == yt.labels()[i])
            .count();
        prop_assert_eq!(matched, a.correct);
        prop_assert_eq!(clustering_accuracy(&yt, &yt).unwrap().accuracy, 1.0);
    }

    #[test]
    fn lloyd_never_increases_inertia(
        v in prop::collection::vec(-10.0f64..10.0, 40..120),
        k in 1usize..6,
        seed in any::<u64>(),
    ) {
        let n = v.len() / 2;
        let data = EmbeddingSet::new(n, 2, v[..2 * n].to_vec()).unwrap();
        let cfg = KMeansConfig { n_init: 2, tol: 0.0, ..KMeansConfig::new(k) }.with_seed(seed);
        let r = kmeans(&data, &cfg).unwrap();
        for w in r.inertia_history.windows(2) {
            prop_assert!(w[1] <= w[0] * (1.0 + 1e-12), "{:?}", r.inertia_history);
        }
        // assignment is nearest-centroid with lowest-index ties, inertia recomputes
        let mut inertia = 0.0;
        for (i, x) in data.iter_rows().enumerate() {
            let d: Vec<f64> = r.centroids.iter()
                .map(|c| c.iter().zip(x).map(|(a, b)| (a - b) * (a - b)).sum())
                .collect();
            let best = (0..k).fold(0, |b, j| if d[j] < d[b] { j } else { b });
            prop_assert_eq!(r.assignment.labels()[i], best);
            inertia += d[best];
        }
        prop_assert!((inertia - r.inertia).abs() <= 1e-9 * (1.0 + inertia));
        prop_assert_eq!(&r, &kmeans(&data, &cfg).unwrap());
    }
}
