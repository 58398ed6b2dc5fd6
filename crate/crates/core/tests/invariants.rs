use bandforge::fixtures;
use bandforge::leaf::{self, Transversal};
use bandforge::rational::{int, rat};
use bandforge::rips;
use bandforge::{BandComplex, ComplexBuilder, ComponentId, DPoint, Rational};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_complex(seed: u64) -> BandComplex {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    loop {
        let lengths: Vec<i64> = (0..rng.gen_range(1..=2)).map(|_| rng.gen_range(2..=5)).collect();
        let mut b = ComplexBuilder::new();
        for &l in &lengths {
            b = b.component(int(l));
        }
        for _ in 0..rng.gen_range(1..=4) {
            let (c0, c1) = (rng.gen_range(0..lengths.len()), rng.gen_range(0..lengths.len()));
            let w = rng.gen_range(0..=3 * lengths[c0].min(lengths[c1]));
            let o0 = rng.gen_range(0..=3 * lengths[c0] - w);
            let o1 = rng.gen_range(0..=3 * lengths[c1] - w);
            b = b.band(rat(w, 3), c0 as u32, rat(o0, 3), c1 as u32, rat(o1, 3));
        }
        if let Ok(c) = b.build() {
            return c;
        }
    }
}

fn rotation(p: i64, q: i64) -> BandComplex {
    fixtures::rotation(rat(p, q))
}

fn whole(c: &BandComplex) -> Transversal {
    Transversal::Support {
        component: ComponentId(0),
        lo: int(0),
        hi: c.components()[0].length.clone(),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn degree_equals_coverage(seed in any::<u64>(), u in 0u32..=1000, radius in 1usize..6) {
        let c = random_complex(seed);
        let k = &c.components()[0];
        let p = DPoint::new(k.id, &k.length * rat(i64::from(u), 1000));
        let ball = leaf::trace_leaf(&c, &p, radius).unwrap();
        let d = ball.degrees();
        for (i, v) in ball.vertices.iter().enumerate() {
            if v.distance < radius {
                prop_assert_eq!(d[i], v.coverage);
            }
        }
    }

    #[test]
    fn moves_keep_excess(seed in any::<u64>(), pick in any::<prop::sample::Index>(), cut in 1i64..6) {
        let c = random_complex(seed);
        let b = pick.get(c.bands());
        prop_assert_eq!(rips::subdivide_band(&c, b.id).unwrap().excess(), c.excess());
        let at = &b.width * rat(cut, 6);
        prop_assert_eq!(rips::cut_vertical(&c, b.id, &at).unwrap().excess(), c.excess());
        for arc in rips::free_arcs(&c) {
            prop_assert_eq!(rips::collapse(&c, &arc).unwrap().excess(), c.excess());
        }
    }

    #[test]
    fn families_partition_both_sides(q in 2i64..9, p in 1i64..9) {
        prop_assume!(p < q);
        let c = rotation(p, q);
        let f = leaf::first_return(&c, &whole(&c), 10_000).unwrap();
        prop_assert!(!f.has_open_families());
        let covered: Rational = f.families.iter().map(|fam| fam.width() * int(fam.members.len() as i64)).sum();
        prop_assert_eq!(covered, int(2) * f.length());
    }

    #[test]
    fn correspondence_is_symmetric(q in 2i64..9, p in 1i64..9) {
        prop_assume!(p < q);
        let c = rotation(p, q);
        let f = leaf::first_return(&c, &whole(&c), 10_000).unwrap();
        for fam in &f.families {
            for ((x, e), (y, g)) in fam.pairs() {
                prop_assert!(f.related(&x, e, &y, g));
                prop_assert!(f.related(&y, g, &x, e));
            }
        }
    }

    #[test]
    fn similar_under_rescaling(q in 2i64..9, p in 1i64..9, k in 1i64..7) {
        prop_assume!(p < q);
        let c = rotation(p, q);
        let a = leaf::first_return(&c, &whole(&c), 10_000).unwrap();
        let big = c.scaled(&rat(k, 2));
        let b = leaf::first_return(&big, &whole(&big), 10_000).unwrap();
        prop_assert!(leaf::similar(&a, &a));
        prop_assert!(leaf::similar(&a, &b));
        prop_assert!(leaf::similar(&b, &a));
    }

    #[test]
    fn product_blocks_bind_with_minus_excess(q in 2i64..9, p in 1i64..9) {
        prop_assume!(p < q);
        let c = rotation(p, q);
        let d = leaf::block_decomposition(&c, &whole(&c), 10_000).unwrap();
        prop_assert!(d.unresolved.is_empty());
        for b in &d.blocks {
            if b.is_product {
                prop_assert!(b.excess <= int(0));
                for a in &b.binding_arcs {
                    prop_assert_eq!(a.arc.length(), -b.excess.clone());
                }
            } else {
                prop_assert_eq!(b.excess.clone(), int(0));
            }
        }
    }

    #[test]
    fn end_statistics_depend_only_on_the_seed(seed in any::<u64>()) {
        let c = random_complex(seed);
        let a = leaf::end_statistics(&c, 12, 8, seed).unwrap();
        let b = leaf::end_statistics(&c, 12, 8, seed).unwrap();
        prop_assert_eq!(a, b);
    }
}
