use ccx_core::covering::{length_budget, machine_length_budget, HSequence, Source};
use ccx_core::machine::{constant_machine, Numbering};
use ccx_core::numerals::{encode_rational, encode_rational_list, parse_star_system, decode_rational, rat, Rational};
use ccx_core::polygon::{PolygonalFunction, Side, TaggedPartition, Tagging};
use proptest::prelude::*;

fn unit_rational() -> impl Strategy<Value = Rational> {
    (1i64..=64).prop_flat_map(|d| (0..=d).prop_map(move |n| rat(n, d)))
}

fn open_unit_rational() -> impl Strategy<Value = Rational> {
    (2i64..=64).prop_flat_map(|d| (1..d).prop_map(move |n| rat(n, d)))
}

fn positive(max_denom: i64) -> impl Strategy<Value = Rational> {
    (1i64..=max_denom, 1i64..=max_denom).prop_map(|(n, d)| rat(n, d))
}

fn polygon() -> impl Strategy<Value = PolygonalFunction> {
    (proptest::collection::btree_set(1i64..32, 0..8), proptest::collection::vec(-32i64..=32, 10)).prop_map(|(inner, ys)| {
        let mut xs = vec![0i64];
        xs.extend(inner);
        xs.push(32);
        let pts = xs.iter().zip(ys.iter().cycle()).map(|(&x, &y)| (rat(x, 32), rat(y, 8))).collect();
        PolygonalFunction::new(pts).unwrap()
    })
}

fn registry_of(points: &[Rational]) -> Numbering {
    Numbering::new(points.iter().map(|x| constant_machine(&encode_rational(x))).collect())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn covering_and_h_sequence_invariants(points in proptest::collection::vec(unit_rational(), 1..10), inj in proptest::collection::vec(unit_rational(), 0..4)) {
        let injections: Vec<(Rational, u32)> = inj.into_iter().enumerate().map(|(i, x)| (x, i as u32)).collect();
        let mut hs = HSequence::build(registry_of(&points), 200, &injections, None).unwrap();

        let mut total = Rational::zero();
        let mut machine = Rational::zero();
        for iv in hs.covering().intervals() {
            prop_assert!(iv.a < iv.b);
            total += &iv.length();
            if let Source::Machine(_) = iv.source {
                machine += &iv.length();
            }
            prop_assert!(total < rat(1, 6));
            prop_assert!(total <= length_budget());
            prop_assert!(machine <= machine_length_budget());
        }
        prop_assert!(hs.covering().len() >= points.len() + injections.len());

        let top = hs.max_index();
        let mut prev = PolygonalFunction::zero();
        for n in 0..=top {
            let h = hs.h(n).unwrap().clone();
            prop_assert!(prev.le_everywhere(&h));
            prop_assert!(h.min_value() >= 0);
            prop_assert!(h.max_value() <= 2);
            prop_assert!(h.integral() < rat(1, 2));
            prev = h;
        }
        let intervals = hs.covering().intervals().to_vec();
        for (n, iv) in intervals.iter().enumerate() {
            let h = hs.h(n + 1).unwrap().clone();
            for x in [&iv.a, &iv.b, &iv.a.midpoint(&iv.b)] {
                if x.in_unit_interval() {
                    prop_assert_eq!(h.eval(x).unwrap(), rat(2, 1));
                }
            }
        }
    }

    #[test]
    fn bump_shape(alpha in positive(16), beta in positive(64), zeta in open_unit_rational()) {
        let b = PolygonalFunction::bump(&alpha, &beta, &zeta).unwrap();
        prop_assert_eq!(b.eval(&zeta).unwrap(), alpha.clone());
        prop_assert!(b.min_value() >= 0);
        prop_assert_eq!(b.max_value(), alpha.clone());
        for x in [&zeta - &beta, &zeta + &beta] {
            if x.in_unit_interval() {
                prop_assert!(b.eval(&x).unwrap().is_zero());
            }
        }
        if (&zeta - &beta) >= 0 && (&zeta + &beta) <= 1 {
            prop_assert_eq!(b.integral(), &alpha * &beta);
        } else {
            prop_assert!(b.integral() < &alpha * &beta);
        }
    }

    #[test]
    fn trapezoid_plateau(a in unit_rational(), w in positive(64)) {
        let b = &a + &w;
        let phi = PolygonalFunction::trapezoid_phi(&a, &b).unwrap();
        prop_assert!(phi.max_value() <= 1);
        prop_assert!(phi.min_value() >= 0);
        for x in [a.clone(), a.midpoint(&b), b.clone()] {
            if x.in_unit_interval() {
                prop_assert_eq!(phi.eval(&x).unwrap(), Rational::one());
            }
        }
        let half = &w / &rat(2, 1);
        for x in [&a - &half, &b + &half] {
            if x.in_unit_interval() {
                prop_assert!(phi.eval(&x).unwrap().is_zero());
            }
        }
    }

    #[test]
    fn strict_level_radius_is_sound(f in polygon(), x0 in unit_rational(), c in -32i64..=32) {
        let c = rat(c, 8);
        let fx = f.eval(&x0).unwrap();
        for side in [Side::Below, Side::Above] {
            let holds = |y: &Rational| match side { Side::Below => y < &c, Side::Above => y > &c };
            if !holds(&fx) {
                continue;
            }
            let rho = f.strict_level_radius(&x0, &c, side).unwrap();
            prop_assert!(rho.is_positive());
            let lo = (&x0 - &rho).clamp_unit();
            let hi = (&x0 + &rho).clamp_unit();
            let mut probes: Vec<Rational> = f.breakpoints().filter(|x| &lo < *x && *x < &hi).cloned().collect();
            probes.push(lo.midpoint(&x0));
            probes.push(x0.midpoint(&hi));
            for x in probes {
                prop_assert!(holds(&f.eval(&x).unwrap()), "f({}) fails against {} within radius {}", x, c, rho);
            }
        }
    }

    #[test]
    fn midpoint_sums_are_exact_on_common_refinements(f in polygon(), k in 0u32..3) {
        // Every breakpoint sits on the 1/32 grid, so f is linear on each cell
        // of a uniform partition with 32·2^k cells.
        let tau = TaggedPartition::uniform(32 << k, Tagging::Midpoint);
        prop_assert_eq!(f.riemann_sum(&tau), f.integral());
        let left = f.riemann_sum(&TaggedPartition::uniform(32 << k, Tagging::Left));
        let right = f.riemann_sum(&TaggedPartition::uniform(32 << k, Tagging::Right));
        prop_assert_eq!(&(&left + &right) / &rat(2, 1), f.integral());
    }

    #[test]
    fn rational_lists_roundtrip(values in proptest::collection::vec((-500i64..500, 1i64..500), 1..8)) {
        let values: Vec<Rational> = values.into_iter().map(|(n, d)| rat(n, d)).collect();
        let word = encode_rational_list(&values);
        let back: Vec<Rational> = parse_star_system(&word).unwrap().iter().map(|w| decode_rational(w).unwrap()).collect();
        prop_assert_eq!(back, values);
    }
}

#[test]
fn empty_list_has_no_encoding() {
    assert!(parse_star_system(&encode_rational_list(&[])).is_err());
}
