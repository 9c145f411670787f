use japdr_core::builder::CircuitBuilder;
use japdr_core::oracle::{brute_debug_set, check_laws};
use japdr_core::random::{random_system, RandomConfig};
use japdr_core::{gen_counter, Circuit, PropertySpec};

#[test]
fn counter_debugging_set() {
    for bits in 3..=6 {
        let (c, props) = gen_counter(bits).unwrap();
        assert_eq!(brute_debug_set(&c, &props).unwrap(), vec![0]);
        let r = check_laws(&c, &props).unwrap();
        assert!(r.all_hold(), "{r:?}");
        assert_eq!(r.local_holds, vec![false, true]);
        assert_eq!(r.global_holds, vec![false, false]);
    }
}

/// Two latches that can only rise together; P0 = !a, P1 = !b. Their
/// conjunction is inductive, neither is inductive alone.
fn mutual() -> (Circuit, Vec<PropertySpec>) {
    let mut b = CircuitBuilder::new(0, 2);
    let (la, lb) = (b.latch(0), b.latch(1));
    let either = b.or(la, lb);
    b.set_next(0, either);
    b.set_next(1, either);
    b.add_bad(la);
    b.add_bad(lb);
    let c = b.build().unwrap();
    let p = c.properties();
    (c, p)
}

#[test]
fn inductive_aggregate_makes_each_property_relatively_inductive() {
    let (c, props) = mutual();
    let r = check_laws(&c, &props).unwrap();
    assert_eq!(r.inductive_aggregate, Some(true));
    assert!(r.all_hold());
    assert!(r.debug_set.is_empty());
}

#[test]
fn random_suite() {
    let cfg = RandomConfig::default();
    let mut inductive = 0;
    let mut split = 0;
    for seed in 0..300 {
        let s = random_system(seed, &cfg);
        let r = check_laws(&s.circuit, &s.properties).unwrap();
        assert!(r.all_hold(), "seed {seed}: {r:?}");
        inductive += r.inductive_aggregate.is_some() as usize;
        split += r
            .local_holds
            .iter()
            .zip(&r.global_holds)
            .filter(|(l, g)| **l && !**g)
            .count();
    }
    assert!(inductive > 20, "{inductive}");
    assert!(split > 0, "no property holds locally but fails globally");
}
