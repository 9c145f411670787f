use japdr_core::oracle::{brute_check_constrained, reachable, BruteVerdict};
use japdr_core::pdr::{certify, check_property, LiftMode, PdrOptions, PdrResult};
use japdr_core::random::{random_system, RandomConfig};
use japdr_core::{gen_counter, replay_trace, PropertySpec};

fn others(props: &[PropertySpec], i: usize) -> Vec<PropertySpec> {
    props.iter().filter(|p| p.index != i).copied().collect()
}

#[test]
fn counter_local_proof_needs_no_clauses() {
    for bits in [3, 8, 16] {
        let (c, props) = gen_counter(bits).unwrap();
        let out = check_property(&c, &props[1], &props[..1], &[], &PdrOptions::default());
        let inv = out.invariant().expect("P1 holds under P0");
        assert!(inv.clauses.is_empty());
        assert_eq!(out.stats.frames, 2);
        assert!(certify(&c, &props[..1], &inv.clauses, &props[1]));

        let out = check_property(&c, &props[0], &props[1..], &[], &PdrOptions::default());
        assert_eq!(out.counterexample().unwrap().frames.len(), 1);
    }
}

#[test]
fn counter_global_cex_is_shortest() {
    for bits in 3..=6 {
        let (c, props) = gen_counter(bits).unwrap();
        let out = check_property(&c, &props[1], &[], &[], &PdrOptions::default());
        let cex = out.counterexample().expect("P1 fails globally");
        assert_eq!(cex.depth(), (1 << (bits - 1)) + 1);
        assert!(replay_trace(&c, cex, &[]).is_valid());
    }
}

#[test]
fn verdicts_match_oracle() {
    let cfg = RandomConfig::default();
    let mut fails = 0;
    let mut holds = 0;
    for seed in 0..250 {
        let sys = random_system(seed, &cfg);
        let c = &sys.circuit;
        for p in &sys.properties {
            for local in [false, true] {
                let cons = if local {
                    others(&sys.properties, p.index)
                } else {
                    vec![]
                };
                let truth = brute_check_constrained(c, p, &cons).unwrap();
                for lifting in [LiftMode::Respect, LiftMode::Ignore] {
                    let opts = PdrOptions {
                        lifting,
                        ..PdrOptions::default()
                    };
                    let out = check_property(c, p, &cons, &[], &opts);
                    let ctx = format!("seed {seed} prop {} local {local} {lifting:?}", p.index);
                    match (&out.result, &truth) {
                        (PdrResult::Holds(inv), BruteVerdict::Holds) => {
                            holds += 1;
                            assert!(certify(c, &cons, &inv.clauses, p), "{ctx}");
                            let mut proj = cons.clone();
                            proj.push(*p);
                            let reach = reachable(c, Some(&proj), None).unwrap();
                            for s in reach.states() {
                                for cl in &inv.clauses {
                                    assert!(cl.holds_on(c, &s), "{ctx}: {cl:?} fails on {s:?}");
                                }
                            }
                        }
                        (PdrResult::Fails(cex), _) => {
                            let r = replay_trace(c, cex, &cons);
                            assert!(r.is_valid(), "{ctx}: {r:?}");
                            if lifting == LiftMode::Respect || !r.is_spurious() {
                                let BruteVerdict::Fails(best) = &truth else {
                                    panic!("{ctx}: engine fails, oracle holds")
                                };
                                assert!(!r.is_spurious(), "{ctx}");
                                if lifting == LiftMode::Respect {
                                    assert_eq!(cex.depth(), best.depth(), "{ctx}");
                                }
                                fails += 1;
                            }
                        }
                        (res, t) => panic!("{ctx}: engine {res:?} oracle {t:?}"),
                    }
                }
            }
        }
    }
    eprintln!("fails {fails} holds {holds}");
    assert!(fails > 50 && holds > 50, "fails {fails} holds {holds}");
}

#[test]
fn larger_systems_match_oracle() {
    let cfg = RandomConfig {
        latches: 8..=14,
        inputs: 1..=4,
        gates: 20..=60,
        ..RandomConfig::default()
    };
    for seed in 1000..1080 {
        let sys = random_system(seed, &cfg);
        let c = &sys.circuit;
        for p in &sys.properties {
            let cons = others(&sys.properties, p.index);
            let truth = brute_check_constrained(c, p, &cons).unwrap();
            let opts = PdrOptions {
                lifting: LiftMode::Respect,
                ..PdrOptions::default()
            };
            let out = check_property(c, p, &cons, &[], &opts);
            let ctx = format!("seed {seed} prop {}", p.index);
            match (&out.result, &truth) {
                (PdrResult::Holds(inv), BruteVerdict::Holds) => {
                    assert!(certify(c, &cons, &inv.clauses, p), "{ctx}");
                }
                (PdrResult::Fails(cex), BruteVerdict::Fails(best)) => {
                    assert!(replay_trace(c, cex, &cons).is_valid(), "{ctx}");
                    assert_eq!(cex.depth(), best.depth(), "{ctx}");
                }
                (res, t) => panic!("{ctx}: engine {res:?} oracle {t:?}"),
            }
        }
    }
}
