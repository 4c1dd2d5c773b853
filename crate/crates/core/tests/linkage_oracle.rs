mod common;

use causal_cluster::linkage::{agglomerate, LinkageKind};
use common::{brute_hausdorff, lattice_points, naive_agglomerate, uniform_points};
use causal_cluster::density::hausdorff;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn agglomerate_matches_naive_recompute(seed in any::<u64>(), n in 2usize..30, dim in 1usize..4, lattice in any::<bool>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let points = if lattice {
            lattice_points(&mut rng, n, dim, 4)
        } else {
            uniform_points(&mut rng, n, dim, 1.0)
        };
        for kind in LinkageKind::ALL {
            let tree = agglomerate(&points, kind).unwrap();
            let naive = naive_agglomerate(&points, kind);
            prop_assert_eq!(tree.merges(), naive.as_slice());
        }
    }

    #[test]
    fn hausdorff_matches_brute_force(seed in any::<u64>(), n in 1usize..40, m in 1usize..40, dim in 1usize..4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = uniform_points(&mut rng, n, dim, 2.0);
        let b = uniform_points(&mut rng, m, dim, 2.0);
        prop_assert_eq!(hausdorff(&a, &b).unwrap(), brute_hausdorff(&a, &b));
    }
}

#[test]
fn lattice_ties_follow_member_order() {
    let points = causal_cluster::model::PointSet::new(1, vec![0.0, 1.0, 2.0, 3.0]).unwrap();
    let tree = agglomerate(&points, LinkageKind::Single).unwrap();
    let pairs: Vec<(usize, usize)> = tree.merges().iter().map(|m| (m.left, m.right)).collect();
    assert_eq!(pairs, vec![(1, 2), (5, 3), (6, 4)]);
}
