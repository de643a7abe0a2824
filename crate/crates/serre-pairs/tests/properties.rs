//! Randomized invariants across the library surface.

use proptest::prelude::*;
use serre_pairs::arith::sieve_primes;
use serre_pairs::curves::{factor, WeierstrassCurve};
use serre_pairs::entanglement::{kummer_tag, quadratic_tag, verify_pair, VerifyOptions};
use serre_pairs::ffgroup::{count_points, sample_stream};
use serre_pairs::matgroups::{
    group_order, Ambient, GroupKind, ProductElement, ResidueMatrix, SubgroupSet,
};
use serre_pairs::FactorBudget;

fn small_model() -> impl Strategy<Value = [i64; 5]> {
    [-50i64..=50, -50..=50, -50..=50, -50..=50, -50..=50]
}

// Immutable-after-construction values are shareable across workers.
#[test]
fn core_values_are_send_and_sync() {
    fn check<T: Send + Sync>() {}
    check::<WeierstrassCurve>();
    check::<serre_pairs::FrobeniusSample>();
    check::<SubgroupSet>();
    check::<ProductElement>();
    check::<serre_pairs::PairVerdict>();
    check::<serre_pairs::GoursatInvariant>();
}

/// Affine-pair counting oracle, independent of the production path.
fn naive_count(e: &WeierstrassCurve, q: u64) -> u64 {
    let [a1, a2, a3, a4, a6] = e.model().map(|a| (a as i128).rem_euclid(q as i128) as u64);
    let mut affine = 0u64;
    for x in 0..q {
        for y in 0..q {
            let lhs = (y * y + a1 * x * y + a3 * y) % q;
            let rhs = (x * x * x % q + a2 * x * x + a4 * x + a6) % q;
            if lhs == rhs {
                affine += 1;
            }
        }
    }
    affine + 1
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn curve_identities_hold_exactly(model in small_model()) {
        if let Ok(e) = WeierstrassCurve::new(model) {
            let (b2, b4, b6, b8) = e.b_invariants();
            prop_assert_eq!(4 * b8, b2 * b6 - b4 * b4);
            let c4 = e.c4();
            let c6 = e.c6();
            prop_assert_eq!(c4 * c4 * c4 - c6 * c6, 1728 * e.discriminant());
            let (j_num, j_den) = e.j_invariant();
            prop_assert!(j_den > 0);
            // Reduced fraction times disc reproduces c4^3.
            prop_assert_eq!(j_num * (e.discriminant() / j_den), c4 * c4 * c4);
        }
    }

    #[test]
    fn factor_reconstructs(n in -1_000_000_000_000i128..=1_000_000_000_000) {
        prop_assume!(n != 0);
        let f = factor(n).unwrap();
        prop_assert_eq!(f.reconstruct(), n);
        for w in f.factors.windows(2) {
            prop_assert!(w[0].0 < w[1].0);
        }
        for (p, e) in &f.factors {
            prop_assert!(serre_pairs::arith::is_prime(*p));
            prop_assert!(*e >= 1);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn quadratic_tag_square_invariant(d in -1_000_000i128..=1_000_000, k in 1i128..=300) {
        prop_assume!(d != 0);
        let b = FactorBudget::default();
        prop_assert_eq!(
            quadratic_tag(d, &b).unwrap(),
            quadratic_tag(d * k * k, &b).unwrap()
        );
    }

    #[test]
    fn kummer_tag_cube_and_square_invariant(m in -100_000i128..=100_000, c in 2i128..=50) {
        prop_assume!(m != 0);
        let b = FactorBudget::default();
        let t = kummer_tag(m, &b).unwrap();
        prop_assert_eq!(kummer_tag(m * c * c * c, &b).unwrap(), t.clone());
        prop_assert_eq!(kummer_tag(m * m, &b).unwrap(), t);
    }

    #[test]
    fn counting_matches_oracle(model in small_model(), q_idx in 0usize..6) {
        let q = [2u64, 3, 5, 7, 11, 13][q_idx];
        if let Ok(e) = WeierstrassCurve::new(model) {
            if e.discriminant().rem_euclid(q as i128) != 0 {
                prop_assert_eq!(count_points(&e, q).unwrap(), naive_count(&e, q));
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn closure_satisfies_lagrange_and_idempotence(
        n_idx in 0usize..4,
        raw in proptest::collection::vec([-6i64..=6, -6..=6, -6..=6, -6..=6], 1..=2),
    ) {
        let n = [2u64, 3, 4, 5][n_idx];
        let gens: Vec<ProductElement> = raw
            .iter()
            .filter_map(|e| {
                let det = (e[0] * e[3] - e[1] * e[2]).rem_euclid(n as i64) as u64;
                if num_integer::gcd(det, n) == 1 {
                    Some(ProductElement::single(ResidueMatrix::new(n, [e[0], e[1], e[2], e[3]])))
                } else {
                    None
                }
            })
            .collect();
        let g = SubgroupSet::closure(Ambient::new(1, n), &gens).unwrap();
        prop_assert_eq!(group_order(n, GroupKind::Gl2) % g.order() as u128, 0);
        let elems: Vec<ProductElement> = g.elements().cloned().collect();
        let again = SubgroupSet::closure(Ambient::new(1, n), &elems).unwrap();
        prop_assert_eq!(g.element_set(), again.element_set());
    }

    #[test]
    fn hasse_bound_on_random_streams(l_idx in 0usize..4, q_max in 20u64..200) {
        let l = [3u64, 5, 11, 13][l_idx];
        let e = WeierstrassCurve::serre_family(l).unwrap();
        for s in sample_stream(&[e], 7, q_max) {
            for &a in &s.traces {
                prop_assert!((a as i128) * (a as i128) <= 4 * s.q as i128);
            }
            prop_assert_eq!(s.det_residue, s.q % 7);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn verify_pair_symmetric(i in 0usize..6, j in 0usize..6) {
        let pool: Vec<u64> = sieve_primes(50)
            .into_iter()
            .filter(|&l| l % 2 == 1 && l != 7)
            .collect();
        let a = WeierstrassCurve::serre_family(pool[i]).unwrap();
        let b = WeierstrassCurve::serre_family(pool[j]).unwrap();
        let opts = VerifyOptions::default();
        prop_assert_eq!(
            verify_pair(&a, &b, &opts).serre_pair,
            verify_pair(&b, &a, &opts).serre_pair
        );
    }
}
