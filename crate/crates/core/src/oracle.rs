//! Explicit-state ground truth for small circuits, plus SAT-based bounded
//! model checking.

use crate::model::{eval_circuit, Circuit, Counterexample, PropertySpec, TraceFrame};
use crate::sat::{SolveResult, Solver};
use crate::unroll::{FirstFrame, Unroller};
use std::collections::{HashMap, VecDeque};
use std::time::Instant;
use thiserror::Error;

/// Default bound on latch plus input bits for explicit exploration.
pub const DEFAULT_CAP: usize = 24;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum OracleError {
    #[error("circuit has {bits} latch and input bits, explicit exploration is capped at {cap}")]
    CapExceeded { bits: usize, cap: usize },
    #[error("no property with index {0}")]
    UnknownProperty(usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Semantics {
    /// Non-final frames satisfy every property.
    Local,
    /// Non-final frames satisfy the target only.
    Global,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ReachMode {
    Global,
    LocalProjected,
}

#[derive(Clone, Debug)]
pub struct ReachSet {
    pub mode: ReachMode,
    depth: HashMap<u32, usize>,
    num_latches: usize,
}

impl ReachSet {
    pub fn len(&self) -> usize {
        self.depth.len()
    }

    pub fn is_empty(&self) -> bool {
        self.depth.is_empty()
    }

    pub fn contains(&self, state: &[bool]) -> bool {
        self.depth.contains_key(&pack(state))
    }

    /// Shortest distance from the initial state.
    pub fn depth(&self, state: &[bool]) -> Option<usize> {
        self.depth.get(&pack(state)).copied()
    }

    /// Reachable states in ascending encoding order.
    pub fn states(&self) -> Vec<Vec<bool>> {
        let mut v: Vec<u32> = self.depth.keys().copied().collect();
        v.sort_unstable();
        v.into_iter().map(|s| unpack(s, self.num_latches)).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum BruteVerdict {
    Holds,
    Fails(Counterexample),
}

impl BruteVerdict {
    pub fn holds(&self) -> bool {
        matches!(self, BruteVerdict::Holds)
    }

    pub fn counterexample(&self) -> Option<&Counterexample> {
        match self {
            BruteVerdict::Fails(c) => Some(c),
            BruteVerdict::Holds => None,
        }
    }
}

fn pack(state: &[bool]) -> u32 {
    state
        .iter()
        .enumerate()
        .fold(0, |acc, (k, &b)| acc | ((b as u32) << k))
}

fn unpack(s: u32, n: usize) -> Vec<bool> {
    (0..n).map(|k| s >> k & 1 == 1).collect()
}

/// Input vectors in lexicographic order, input 0 most significant.
fn input_vector(m: u32, n: usize) -> Vec<bool> {
    (0..n).map(|k| m >> (n - 1 - k) & 1 == 1).collect()
}

fn check_cap(circuit: &Circuit, cap: usize) -> Result<(), OracleError> {
    let bits = circuit.num_latches() + circuit.num_inputs();
    if bits > cap || circuit.num_latches() > 31 || circuit.num_inputs() > 31 {
        return Err(OracleError::CapExceeded { bits, cap });
    }
    Ok(())
}

/// Per-frame facts needed by the explorers.
struct FrameEval {
    cc: bool,
    bads: Vec<bool>,
    next: u32,
}

fn eval(circuit: &Circuit, state: u32, m: u32, watch: &[PropertySpec]) -> FrameEval {
    let frame = TraceFrame::new(
        unpack(state, circuit.num_latches()),
        input_vector(m, circuit.num_inputs()),
    );
    let a = eval_circuit(circuit, &frame).expect("dimensions match");
    let next = circuit
        .latches()
        .iter()
        .enumerate()
        .fold(0, |acc, (k, l)| acc | ((a.lit(l.next) as u32) << k));
    FrameEval {
        cc: circuit.constraints().iter().all(|&c| a.lit(c)),
        bads: watch.iter().map(|p| a.lit(p.bad)).collect(),
        next,
    }
}

/// States reachable from the initial state. With a projection, frames
/// violating one of its properties only loop back to their own state. Only
/// states with at least one input satisfying the circuit constraints count.
pub fn reachable(
    circuit: &Circuit,
    projection: Option<&[PropertySpec]>,
    depth_limit: Option<usize>,
) -> Result<ReachSet, OracleError> {
    reachable_with_cap(circuit, projection, depth_limit, DEFAULT_CAP)
}

pub fn reachable_with_cap(
    circuit: &Circuit,
    projection: Option<&[PropertySpec]>,
    depth_limit: Option<usize>,
    cap: usize,
) -> Result<ReachSet, OracleError> {
    check_cap(circuit, cap)?;
    let props = projection.unwrap_or(&[]);
    let n_in = 1u32 << circuit.num_inputs();
    let init = pack(&circuit.init_values());
    let mut seen: HashMap<u32, usize> = HashMap::from([(init, 0)]);
    let mut depth = HashMap::new();
    let mut queue = VecDeque::from([init]);
    while let Some(s) = queue.pop_front() {
        let d = seen[&s];
        let mut live = false;
        for m in 0..n_in {
            let f = eval(circuit, s, m, props);
            if !f.cc {
                continue;
            }
            live = true;
            if f.bads.iter().any(|&b| b) || depth_limit.is_some_and(|l| d >= l) {
                continue;
            }
            if let std::collections::hash_map::Entry::Vacant(e) = seen.entry(f.next) {
                e.insert(d + 1);
                queue.push_back(f.next);
            }
        }
        if live {
            depth.insert(s, d);
        }
    }
    Ok(ReachSet {
        mode: if projection.is_some() {
            ReachMode::LocalProjected
        } else {
            ReachMode::Global
        },
        depth,
        num_latches: circuit.num_latches(),
    })
}

/// Shortest trace whose non-final frames satisfy the target and every
/// constraint property and whose final frame violates the target. Circuit
/// constraints hold on every frame. Ties go to the lexicographically
/// smallest input sequence.
pub fn brute_check_constrained(
    circuit: &Circuit,
    target: &PropertySpec,
    constraints: &[PropertySpec],
) -> Result<BruteVerdict, OracleError> {
    check_cap(circuit, DEFAULT_CAP)?;
    let mut watch = vec![*target];
    watch.extend_from_slice(constraints);
    let n_in = 1u32 << circuit.num_inputs();
    let init = pack(&circuit.init_values());
    let mut parent: HashMap<u32, Option<(u32, u32)>> = HashMap::from([(init, None)]);
    let mut queue = VecDeque::from([init]);
    while let Some(s) = queue.pop_front() {
        for m in 0..n_in {
            let f = eval(circuit, s, m, &watch);
            if !f.cc {
                continue;
            }
            if f.bads[0] {
                let mut ms = vec![m];
                let mut cur = s;
                while let Some((p, pm)) = parent[&cur] {
                    ms.push(pm);
                    cur = p;
                }
                ms.reverse();
                let ins = ms
                    .into_iter()
                    .map(|m| input_vector(m, circuit.num_inputs()))
                    .collect();
                let cex =
                    Counterexample::simulate(circuit, ins, target.index).expect("dimensions match");
                return Ok(BruteVerdict::Fails(cex));
            }
            if f.bads[1..].iter().any(|&b| b) {
                continue;
            }
            if let std::collections::hash_map::Entry::Vacant(e) = parent.entry(f.next) {
                e.insert(Some((s, m)));
                queue.push_back(f.next);
            }
        }
    }
    Ok(BruteVerdict::Holds)
}

/// Checks the property with index `target_index` among `props`.
pub fn brute_check(
    circuit: &Circuit,
    props: &[PropertySpec],
    target_index: usize,
    mode: Semantics,
) -> Result<BruteVerdict, OracleError> {
    let target = props
        .iter()
        .find(|p| p.index == target_index)
        .ok_or(OracleError::UnknownProperty(target_index))?;
    let others: Vec<PropertySpec> = match mode {
        Semantics::Local => props
            .iter()
            .filter(|p| p.index != target_index)
            .copied()
            .collect(),
        Semantics::Global => Vec::new(),
    };
    brute_check_constrained(circuit, target, &others)
}

/// Indices of the properties failing locally.
pub fn brute_debug_set(
    circuit: &Circuit,
    props: &[PropertySpec],
) -> Result<Vec<usize>, OracleError> {
    let mut out = Vec::new();
    for p in props {
        if !brute_check(circuit, props, p.index, Semantics::Local)?.holds() {
            out.push(p.index);
        }
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum BmcResult {
    Cex(Counterexample),
    NoneUpTo(usize),
    /// Deadline hit; no counterexample of depth below the given one exists.
    Unknown(usize),
}

/// Searches depth by depth for a trace of the constrained system; depth
/// counts transitions.
pub fn bmc(
    circuit: &Circuit,
    target: &PropertySpec,
    constraint_props: &[PropertySpec],
    max_depth: usize,
    deadline: Option<Instant>,
) -> BmcResult {
    let mut s = Solver::new();
    s.set_deadline(deadline);
    let mut u = Unroller::new(circuit, &mut s, FirstFrame::Init);
    for d in 0..=max_depth {
        if d > 0 {
            u.add_frame();
        }
        for &cc in circuit.constraints() {
            let l = u.lit(&mut s, d, cc);
            s.add_clause(&[l]);
        }
        let bad = u.lit(&mut s, d, target.bad);
        match s.solve(&[bad]) {
            SolveResult::Sat => {
                let ins: Vec<Vec<bool>> = (0..=d)
                    .map(|t| {
                        (0..circuit.num_inputs())
                            .map(|k| {
                                let l = u.input(&mut s, t, k);
                                s.model_value(l)
                            })
                            .collect()
                    })
                    .collect();
                let cex =
                    Counterexample::simulate(circuit, ins, target.index).expect("dimensions match");
                return BmcResult::Cex(cex);
            }
            SolveResult::Unknown => return BmcResult::Unknown(d),
            SolveResult::Unsat => {}
        }
        s.add_clause(&[!bad]);
        for p in constraint_props {
            let l = !u.lit(&mut s, d, p.bad);
            s.add_clause(&[l]);
        }
    }
    BmcResult::NoneUpTo(max_depth)
}

/// Outcome of checking the relations between local, global and aggregate
/// verdicts on one system. `inductive_aggregate` is `None` unless the
/// conjunction of all properties is inductive on its own.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LawCheck {
    pub debug_set: Vec<usize>,
    pub global_holds: Vec<bool>,
    pub local_holds: Vec<bool>,
    /// Each property is inductive relative to the others, given an
    /// inductive aggregate.
    pub inductive_aggregate: Option<bool>,
    /// Global success implies local success.
    pub global_implies_local: bool,
    /// Global counterexamples of locally holding properties pass through at
    /// least two distinct states violating the aggregate.
    pub two_bad_states: bool,
    /// The aggregate holds iff every property holds globally.
    pub aggregate_iff_all_global: bool,
    /// The aggregate holds under the plain and the projected relation alike.
    pub aggregate_projection_invariant: bool,
    /// The aggregate holds iff every property holds locally.
    pub aggregate_iff_all_local: bool,
    /// Every reachable violation of the aggregate violates a member of the
    /// debugging set.
    pub violations_hit_debug_set: bool,
}

impl LawCheck {
    pub fn all_hold(&self) -> bool {
        self.inductive_aggregate != Some(false)
            && self.global_implies_local
            && self.two_bad_states
            && self.aggregate_iff_all_global
            && self.aggregate_projection_invariant
            && self.aggregate_iff_all_local
            && self.violations_hit_debug_set
    }
}

/// Initial frames satisfy every property and so do all successors of
/// frames that satisfy every property.
fn aggregate_inductive(circuit: &Circuit, props: &[PropertySpec]) -> bool {
    let n_in = 1u32 << circuit.num_inputs();
    let violates = |s: u32, m: u32| {
        let f = eval(circuit, s, m, props);
        f.cc && f.bads.iter().any(|&b| b)
    };
    let init = pack(&circuit.init_values());
    if (0..n_in).any(|m| violates(init, m)) {
        return false;
    }
    for s in 0..1u32 << circuit.num_latches() {
        for m in 0..n_in {
            let f = eval(circuit, s, m, props);
            if !f.cc || f.bads.iter().any(|&b| b) {
                continue;
            }
            if (0..n_in).any(|m2| violates(f.next, m2)) {
                return false;
            }
        }
    }
    true
}

/// Checks every relation between local, global and aggregate verdicts on a
/// small system by explicit enumeration.
pub fn check_laws(circuit: &Circuit, props: &[PropertySpec]) -> Result<LawCheck, OracleError> {
    check_cap(circuit, DEFAULT_CAP)?;
    let mut global = Vec::new();
    let mut local = Vec::new();
    for p in props {
        global.push(brute_check(circuit, props, p.index, Semantics::Global)?);
        local.push(brute_check(circuit, props, p.index, Semantics::Local)?);
    }
    let global_holds: Vec<bool> = global.iter().map(BruteVerdict::holds).collect();
    let local_holds: Vec<bool> = local.iter().map(BruteVerdict::holds).collect();
    let debug_set: Vec<usize> = props
        .iter()
        .zip(&local_holds)
        .filter(|(_, h)| !**h)
        .map(|(p, _)| p.index)
        .collect();

    let global_implies_local = global_holds.iter().zip(&local_holds).all(|(g, l)| !g || *l);

    let two_bad_states = global.iter().zip(&local_holds).all(|(g, &l)| {
        let (true, BruteVerdict::Fails(cex)) = (l, g) else {
            return true;
        };
        let mut states: Vec<&Vec<bool>> = cex
            .frames
            .iter()
            .filter(|f| {
                props
                    .iter()
                    .any(|p| crate::model::property_violated(circuit, f, p))
            })
            .map(|f| &f.latches)
            .collect();
        states.sort();
        states.dedup();
        states.len() >= 2
    });

    let (agg, spec) = circuit.with_aggregate_bad(&props.iter().map(|p| p.bad).collect::<Vec<_>>());
    let agg_holds = brute_check_constrained(&agg, &spec, &[])?.holds();
    let aggregate_iff_all_global = agg_holds == global_holds.iter().all(|&h| h);
    let aggregate_iff_all_local = agg_holds == local_holds.iter().all(|&h| h);

    let projected = reachable(circuit, Some(props), None)?;
    let n_in = 1u32 << circuit.num_inputs();
    let mut projected_violation = false;
    let mut violations_hit_debug_set = true;
    for s in projected.states() {
        for m in 0..n_in {
            let f = eval(circuit, pack(&s), m, props);
            if !f.cc || !f.bads.iter().any(|&b| b) {
                continue;
            }
            projected_violation = true;
            let hit = props
                .iter()
                .zip(&f.bads)
                .any(|(p, &b)| b && debug_set.contains(&p.index));
            violations_hit_debug_set &= hit;
        }
    }
    let aggregate_projection_invariant = agg_holds == !projected_violation;

    let inductive_aggregate = aggregate_inductive(circuit, props).then(|| {
        props.iter().all(|p| {
            let others: Vec<PropertySpec> = props
                .iter()
                .filter(|q| q.index != p.index)
                .copied()
                .collect();
            crate::pdr::certify(circuit, &others, &[], p)
        })
    });

    Ok(LawCheck {
        debug_set,
        global_holds,
        local_holds,
        inductive_aggregate,
        global_implies_local,
        two_bad_states,
        aggregate_iff_all_global,
        aggregate_projection_invariant,
        aggregate_iff_all_local,
        violations_hit_debug_set,
    })
}
