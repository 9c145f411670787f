//! Seeded random transition systems for cross-checking engines against the
//! explicit-state oracle.

use crate::builder::CircuitBuilder;
use crate::model::{eval_circuit, Circuit, Lit, PropertySpec, TraceFrame};
use crate::oracle::reachable;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Clone, Debug)]
pub struct RandomConfig {
    pub latches: std::ops::RangeInclusive<usize>,
    pub inputs: std::ops::RangeInclusive<usize>,
    pub properties: std::ops::RangeInclusive<usize>,
    pub gates: std::ops::RangeInclusive<usize>,
    /// Probability of mutating one next-state function after the
    /// properties were chosen.
    pub bug_probability: f64,
    pub constraint_probability: f64,
}

impl Default for RandomConfig {
    fn default() -> Self {
        RandomConfig {
            latches: 2..=6,
            inputs: 1..=3,
            properties: 2..=4,
            gates: 3..=12,
            bug_probability: 0.5,
            constraint_probability: 0.2,
        }
    }
}

#[derive(Clone, Debug)]
pub struct RandomSystem {
    pub seed: u64,
    pub circuit: Circuit,
    pub properties: Vec<PropertySpec>,
    pub planted_bug: bool,
}

#[derive(Clone, Copy, Debug)]
enum Node {
    Input(usize),
    Latch(usize),
    Gate(usize),
}

#[derive(Clone, Copy, Debug)]
struct Ref {
    node: Node,
    neg: bool,
}

struct Recipe {
    inputs: usize,
    latches: usize,
    init: Vec<bool>,
    gates: Vec<(Ref, Ref)>,
    next: Vec<Ref>,
    constraint: Option<(Ref, Ref)>,
}

impl Recipe {
    fn build(&self, bads: &[Vec<Ref>]) -> Circuit {
        let mut b = CircuitBuilder::new(self.inputs, self.latches);
        let mut gates: Vec<Lit> = Vec::with_capacity(self.gates.len());
        fn lit(b: &CircuitBuilder, gates: &[Lit], r: Ref) -> Lit {
            let l = match r.node {
                Node::Input(k) => b.input(k),
                Node::Latch(k) => b.latch(k),
                Node::Gate(g) => gates[g],
            };
            if r.neg {
                !l
            } else {
                l
            }
        }
        for &(x, y) in &self.gates {
            let (a, c) = (lit(&b, &gates, x), lit(&b, &gates, y));
            let g = b.and(a, c);
            gates.push(g);
        }
        for (k, &r) in self.next.iter().enumerate() {
            let l = lit(&b, &gates, r);
            b.set_next(k, l);
            b.set_init(k, self.init[k]);
        }
        if let Some((x, y)) = self.constraint {
            let (a, c) = (lit(&b, &gates, x), lit(&b, &gates, y));
            let l = b.or(a, c);
            b.add_constraint(l);
        }
        for cube in bads {
            let ls: Vec<Lit> = cube.iter().map(|&r| lit(&b, &gates, r)).collect();
            let l = b.and_all(ls);
            b.add_bad(l);
        }
        b.build().expect("generated circuits are well formed")
    }
}

fn pick_ref(rng: &mut ChaCha8Rng, inputs: usize, latches: usize, gates: usize) -> Ref {
    let n = inputs + latches + gates;
    let i = rng.gen_range(0..n);
    let node = if i < inputs {
        Node::Input(i)
    } else if i < inputs + latches {
        Node::Latch(i - inputs)
    } else {
        Node::Gate(i - inputs - latches)
    };
    Ref {
        node,
        neg: rng.gen_bool(0.5),
    }
}

/// Generates a system whose properties all hold before the optional bug is
/// planted. Each property is a small cube over latches and inputs that no
/// reachable frame of the unmutated system satisfies.
pub fn random_system(seed: u64, cfg: &RandomConfig) -> RandomSystem {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let latches = rng.gen_range(cfg.latches.clone());
    let inputs = rng.gen_range(cfg.inputs.clone());
    let ngates = rng.gen_range(cfg.gates.clone());
    let mut gates = Vec::with_capacity(ngates);
    for g in 0..ngates {
        let x = pick_ref(&mut rng, inputs, latches, g);
        let y = pick_ref(&mut rng, inputs, latches, g);
        gates.push((x, y));
    }
    let next = (0..latches)
        .map(|_| pick_ref(&mut rng, inputs, latches, ngates))
        .collect();
    let init = (0..latches).map(|_| rng.gen_bool(0.3)).collect();
    let constraint = (inputs > 0 && rng.gen_bool(cfg.constraint_probability)).then(|| {
        let a = Ref {
            node: Node::Input(rng.gen_range(0..inputs)),
            neg: rng.gen_bool(0.5),
        };
        (a, pick_ref(&mut rng, 0, latches, 0))
    });
    let mut recipe = Recipe {
        inputs,
        latches,
        init,
        gates,
        next,
        constraint,
    };
    let base = recipe.build(&[]);
    let frames = reachable_frames(&base);

    let nprops = rng.gen_range(cfg.properties.clone());
    let mut bads: Vec<Vec<Ref>> = Vec::with_capacity(nprops);
    for _ in 0..nprops {
        let mut chosen = None;
        for _ in 0..64 {
            let size = rng.gen_range(1..=3.min(latches + 1));
            let mut cube: Vec<Ref> = Vec::with_capacity(size);
            let mut used = Vec::new();
            while cube.len() < size {
                let (node, key) = if inputs > 0 && rng.gen_bool(0.15) {
                    let k = rng.gen_range(0..inputs);
                    (Node::Input(k), k)
                } else {
                    let k = rng.gen_range(0..latches);
                    (Node::Latch(k), inputs + k)
                };
                if used.contains(&key) {
                    if used.len() == inputs + latches {
                        break;
                    }
                    continue;
                }
                used.push(key);
                cube.push(Ref {
                    node,
                    neg: rng.gen_bool(0.5),
                });
            }
            if frames.iter().all(|f| !cube_holds(&cube, f)) {
                chosen = Some(cube);
                break;
            }
        }
        // a contradictory cube: the property trivially holds
        bads.push(chosen.unwrap_or_else(|| {
            let r = Ref {
                node: Node::Latch(0),
                neg: false,
            };
            vec![r, Ref { neg: true, ..r }]
        }));
    }

    let planted_bug = rng.gen_bool(cfg.bug_probability);
    if planted_bug {
        let k = rng.gen_range(0..latches);
        recipe.next[k] = if rng.gen_bool(0.5) {
            Ref {
                neg: !recipe.next[k].neg,
                ..recipe.next[k]
            }
        } else {
            pick_ref(&mut rng, inputs, latches, recipe.gates.len())
        };
    }
    let circuit = recipe.build(&bads);
    let properties = circuit.properties();
    RandomSystem {
        seed,
        circuit,
        properties,
        planted_bug,
    }
}

fn reachable_frames(c: &Circuit) -> Vec<TraceFrame> {
    let reach = reachable(c, None, None).expect("random systems fit the oracle");
    let n = c.num_inputs();
    let mut out = Vec::new();
    for s in reach.states() {
        for m in 0u32..1 << n {
            let f = TraceFrame::new(s.clone(), (0..n).map(|k| m >> k & 1 == 1).collect());
            let a = eval_circuit(c, &f).unwrap();
            if c.constraints().iter().all(|&l| a.lit(l)) {
                out.push(f);
            }
        }
    }
    out
}

fn cube_holds(cube: &[Ref], f: &TraceFrame) -> bool {
    cube.iter().all(|r| {
        let v = match r.node {
            Node::Input(k) => f.inputs[k],
            Node::Latch(k) => f.latches[k],
            Node::Gate(_) => unreachable!("property cubes range over latches and inputs"),
        };
        v != r.neg
    })
}

/// A random permutation of `0..n`.
pub fn shuffled(seed: u64, n: usize) -> Vec<usize> {
    let mut v: Vec<usize> = (0..n).collect();
    v.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    v
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{brute_check, Semantics};

    #[test]
    fn deterministic() {
        let cfg = RandomConfig::default();
        let a = random_system(7, &cfg);
        let b = random_system(7, &cfg);
        assert_eq!(a.circuit, b.circuit);
        assert_eq!(a.planted_bug, b.planted_bug);
    }

    #[test]
    fn bug_free_systems_hold() {
        let cfg = RandomConfig {
            bug_probability: 0.0,
            ..RandomConfig::default()
        };
        for seed in 0..40 {
            let s = random_system(seed, &cfg);
            assert!(!s.planted_bug);
            assert!((2..=6).contains(&s.circuit.num_latches()));
            for p in &s.properties {
                let v = brute_check(&s.circuit, &s.properties, p.index, Semantics::Global).unwrap();
                assert!(v.holds(), "seed {seed} property {}", p.index);
            }
        }
    }

    #[test]
    fn bugs_produce_failures() {
        let cfg = RandomConfig::default();
        let failing = (0..100)
            .map(|seed| random_system(seed, &cfg))
            .filter(|s| {
                s.properties.iter().any(|p| {
                    !brute_check(&s.circuit, &s.properties, p.index, Semantics::Global)
                        .unwrap()
                        .holds()
                })
            })
            .count();
        assert!(failing >= 10, "only {failing} failing systems");
    }

    #[test]
    fn shuffle_is_permutation() {
        let mut v = shuffled(3, 10);
        v.sort_unstable();
        assert_eq!(v, (0..10).collect::<Vec<_>>());
    }
}
