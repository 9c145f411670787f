//! IC3/PDR for one property under a set of constraint properties.
//!
//! Constraint properties are asserted on every present-state frame the
//! engine reasons about, which makes the search operate on the projected
//! transition relation: frames violating a constraint have no successors.

mod certify;
mod frames;
mod lift;

pub use certify::certify;
pub use frames::{FrameError, Frames};
pub use lift::{LiftTarget, Lifter};

use crate::cube::{Clause, Cube};
use crate::model::{self, Circuit, Counterexample, PropertySpec, TraceFrame};
use crate::sat::{self, SolveResult, Solver};
use crate::unroll::{FirstFrame, Unroller};
use serde::{Deserialize, Serialize};
use std::cmp::Reverse;
use std::collections::BinaryHeap;
use std::time::{Duration, Instant};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LiftMode {
    /// Lifted cubes may contain states violating constraint properties.
    #[default]
    Ignore,
    /// Lifted cubes only contain states satisfying every constraint property.
    Respect,
}

#[derive(Clone, Debug, Default)]
pub struct PdrOptions {
    pub lifting: LiftMode,
    pub timeout: Option<Duration>,
    /// Absolute deadline; the earlier of this and `timeout` applies.
    pub deadline: Option<Instant>,
    pub conflict_budget: Option<u64>,
    /// Give up once this many frames are open.
    pub max_frames: Option<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PdrStatus {
    Holds,
    Fails,
    Exhausted,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PdrStats {
    pub frames: usize,
    /// Solver calls of the frame and lifting solvers.
    pub sat_calls: u64,
    pub obligations: u64,
    pub learned_clauses: u64,
    pub seed_clauses: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Invariant {
    /// All clauses of the inductive frame, seeds included.
    pub clauses: Vec<Clause>,
    /// The clauses that were not given as seeds.
    pub learned: Vec<Clause>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PdrResult {
    Holds(Invariant),
    Fails(Counterexample),
    Exhausted,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PdrOutcome {
    pub result: PdrResult,
    pub stats: PdrStats,
}

impl PdrOutcome {
    pub fn status(&self) -> PdrStatus {
        match self.result {
            PdrResult::Holds(_) => PdrStatus::Holds,
            PdrResult::Fails(_) => PdrStatus::Fails,
            PdrResult::Exhausted => PdrStatus::Exhausted,
        }
    }

    pub fn invariant(&self) -> Option<&Invariant> {
        match &self.result {
            PdrResult::Holds(i) => Some(i),
            _ => None,
        }
    }

    pub fn counterexample(&self) -> Option<&Counterexample> {
        match &self.result {
            PdrResult::Fails(c) => Some(c),
            _ => None,
        }
    }
}

/// Checks `target` assuming `constraint_props` hold on every non-final frame.
/// `seeds` must be clauses known to hold on all frames reachable under the
/// same assumptions.
pub fn check_property(
    circuit: &Circuit,
    target: &PropertySpec,
    constraint_props: &[PropertySpec],
    seeds: &[Clause],
    options: &PdrOptions,
) -> PdrOutcome {
    Pdr::new(circuit, target, constraint_props, seeds, options).run()
}

#[derive(Debug)]
pub struct Exhausted;

struct Obligation {
    cube: Cube,
    level: usize,
    /// Inputs applied in the obligation's own frame.
    inputs: Vec<bool>,
    /// Obligation this one leads to, or the inputs of the violating frame.
    next: Result<usize, Vec<bool>>,
}

pub struct Pdr<'c> {
    circuit: &'c Circuit,
    target: PropertySpec,
    options: PdrOptions,
    deadline: Option<Instant>,
    solver: Solver,
    unroll: Unroller<'c>,
    frames: Frames,
    acts: Vec<sat::Lit>,
    lifter: Lifter<'c>,
    init: Vec<bool>,
    activity: Vec<f64>,
    present: Vec<sat::Lit>,
    inputs: [Vec<sat::Lit>; 2],
    bad_next: Vec<sat::Lit>,
    obligations: Vec<Obligation>,
    stats: PdrStats,
}

impl<'c> Pdr<'c> {
    pub fn new(
        circuit: &'c Circuit,
        target: &PropertySpec,
        constraint_props: &[PropertySpec],
        seeds: &[Clause],
        options: &PdrOptions,
    ) -> Self {
        let deadline = match (
            options.timeout.map(|t| Instant::now() + t),
            options.deadline,
        ) {
            (Some(a), Some(b)) => Some(a.min(b)),
            (a, b) => a.or(b),
        };
        let mut s = Solver::new();
        s.set_deadline(deadline);
        s.set_conflict_budget(options.conflict_budget);
        let mut u = Unroller::new(circuit, &mut s, FirstFrame::Free);
        u.add_frame();
        let n = circuit.num_latches();
        let present: Vec<_> = (0..n).map(|k| u.latch(&mut s, 0, k)).collect();
        let inputs = [0, 1].map(|t| {
            (0..circuit.num_inputs())
                .map(|k| u.input(&mut s, t, k))
                .collect::<Vec<_>>()
        });
        let nb = !u.lit(&mut s, 0, target.bad);
        s.add_clause(&[nb]);
        for p in constraint_props {
            let l = !u.lit(&mut s, 0, p.bad);
            s.add_clause(&[l]);
        }
        for &cc in circuit.constraints() {
            let l = u.lit(&mut s, 0, cc);
            s.add_clause(&[l]);
        }
        let mut bad_next = vec![u.lit(&mut s, 1, target.bad)];
        for &cc in circuit.constraints() {
            bad_next.push(u.lit(&mut s, 1, cc));
        }
        for c in seeds {
            let lits: Vec<_> = c.lits().iter().map(|&l| u.lit(&mut s, 0, l)).collect();
            s.add_clause(&lits);
        }
        let init = circuit.init_values();
        let a0 = s.new_var().lit(true);
        for (k, &v) in init.iter().enumerate() {
            s.add_clause(&[!a0, if v { present[k] } else { !present[k] }]);
        }
        let mut lifter = Lifter::new(circuit, target, constraint_props);
        lifter.set_deadline(deadline);
        Pdr {
            circuit,
            target: *target,
            options: options.clone(),
            deadline,
            solver: s,
            unroll: u,
            frames: Frames::new(seeds.to_vec()),
            acts: vec![a0],
            lifter,
            init,
            activity: vec![0.0; n],
            present,
            inputs,
            bad_next,
            obligations: Vec::new(),
            stats: PdrStats {
                seed_clauses: seeds.len(),
                ..PdrStats::default()
            },
        }
    }

    pub fn frames(&self) -> &Frames {
        &self.frames
    }

    pub fn run(mut self) -> PdrOutcome {
        let result = self.search().unwrap_or(PdrResult::Exhausted);
        self.stats.frames = self.frames.top();
        self.stats.sat_calls = self.solver.stats().solves + self.lifter.sat_calls();
        if let PdrResult::Holds(inv) = &result {
            debug_assert!(inv
                .clauses
                .iter()
                .all(|c| c.holds_on(self.circuit, &self.init)));
        }
        PdrOutcome {
            result,
            stats: self.stats,
        }
    }

    fn check_time(&self) -> Result<(), Exhausted> {
        match self.deadline {
            Some(d) if Instant::now() >= d => Err(Exhausted),
            _ => Ok(()),
        }
    }

    fn solve(&mut self, assumps: &[sat::Lit]) -> Result<bool, Exhausted> {
        match self.solver.solve(assumps) {
            SolveResult::Sat => Ok(true),
            SolveResult::Unsat => Ok(false),
            SolveResult::Unknown => Err(Exhausted),
        }
    }

    fn open_level(&mut self) -> usize {
        let a = self.solver.new_var().lit(true);
        self.acts.push(a);
        self.frames.push_level()
    }

    /// Activation assumptions selecting `F_level`.
    fn frame_assumptions(&self, level: usize) -> Vec<sat::Lit> {
        self.acts[level..].to_vec()
    }

    fn read(&self, latches: &[sat::Lit], inputs: &[sat::Lit]) -> TraceFrame {
        TraceFrame::new(
            latches
                .iter()
                .map(|&l| self.solver.model_value(l))
                .collect(),
            inputs.iter().map(|&l| self.solver.model_value(l)).collect(),
        )
    }

    fn cube_lit(&mut self, frame: usize, l: model::Lit) -> sat::Lit {
        self.unroll.lit(&mut self.solver, frame, l)
    }

    /// A frame of `F_level` with a successor violating the target.
    fn bad_predecessor(
        &mut self,
        level: usize,
    ) -> Result<Option<(TraceFrame, Vec<bool>)>, Exhausted> {
        let mut a = self.frame_assumptions(level);
        a.extend_from_slice(&self.bad_next);
        if !self.solve(&a)? {
            return Ok(None);
        }
        let pred = self.read(&self.present, &self.inputs[0]);
        let nxt = self.inputs[1]
            .iter()
            .map(|&l| self.solver.model_value(l))
            .collect();
        Ok(Some((pred, nxt)))
    }

    /// Decides `F_level ∧ ¬cube ∧ T → ¬cube'`. On success returns the
    /// sub-cube of literals needed for the proof, otherwise a predecessor
    /// frame of `F_level` stepping into the cube.
    fn consecution(
        &mut self,
        cube: &Cube,
        level: usize,
    ) -> Result<Result<Cube, TraceFrame>, Exhausted> {
        let neg: Vec<sat::Lit> = cube.lits().iter().map(|&l| !self.cube_lit(0, l)).collect();
        let h = self.solver.add_retractable(&neg);
        let mut a = self.frame_assumptions(level);
        let nexts: Vec<sat::Lit> = cube.lits().iter().map(|&l| self.cube_lit(1, l)).collect();
        a.extend_from_slice(&nexts);
        let r = self.solve(&a);
        let out = match r {
            Ok(true) => Ok(Err(self.read(&self.present, &self.inputs[0]))),
            Ok(false) => {
                let core = self.solver.core();
                let kept: Vec<model::Lit> = cube
                    .lits()
                    .iter()
                    .zip(&nexts)
                    .filter(|(_, n)| core.contains(n))
                    .map(|(&l, _)| l)
                    .collect();
                Ok(Ok(self.exclude_init(Cube::new(kept), cube)))
            }
            Err(e) => Err(e),
        };
        self.solver.retract(h).expect("live handle");
        out
    }

    fn intersects_init(&self, cube: &Cube) -> bool {
        cube.contains_state(self.circuit, &self.init)
    }

    /// Restores one literal of `orig` that disagrees with the initial state
    /// if `cube` lost them all.
    fn exclude_init(&self, cube: Cube, orig: &Cube) -> Cube {
        if !self.intersects_init(&cube) {
            return cube;
        }
        let l = orig
            .lits()
            .iter()
            .copied()
            .find(|&l| !Cube::new(vec![l]).contains_state(self.circuit, &self.init))
            .expect("original cube excludes the initial state");
        let mut lits = cube.lits().to_vec();
        lits.push(l);
        Cube::new(lits)
    }

    /// Public relative-induction check: does clause `c` hold initially and is
    /// it inductive relative to `F_level`? On success also returns the
    /// core-reduced clause.
    pub fn relative_induction_check(
        &mut self,
        c: &Clause,
        level: usize,
    ) -> Result<(bool, Option<Clause>), Exhausted> {
        let cube = c.negate();
        if self.intersects_init(&cube) {
            return Ok((false, None));
        }
        Ok(match self.consecution(&cube, level)? {
            Ok(core) => (true, Some(core.negate())),
            Err(_) => (false, None),
        })
    }

    /// Records `c` as holding in `F_1..=level`.
    pub fn add_lemma(&mut self, level: usize, c: Clause) {
        while self.frames.top() < level {
            self.open_level();
        }
        let lits: Vec<sat::Lit> = c.lits().iter().map(|&l| self.cube_lit(0, l)).collect();
        let mut cl = vec![!self.acts[level]];
        cl.extend(lits);
        self.solver.add_clause(&cl);
        self.frames.add(level, c);
    }

    fn bump(&mut self, cube: &Cube) {
        for &l in cube.lits() {
            if let Some(k) = self.circuit.latch_index(l.var()) {
                self.activity[k] += 1.0;
            }
        }
    }

    /// Drops literals of `cube` while it stays inductive relative to
    /// `F_{level-1}` and excludes the initial state.
    fn generalize(&mut self, cube: Cube, level: usize) -> Result<Cube, Exhausted> {
        let mut cube = cube;
        let mut order: Vec<model::Lit> = cube.lits().to_vec();
        let act = |l: &model::Lit| self.activity[self.circuit.latch_index(l.var()).unwrap()];
        order.sort_by(|a, b| act(a).partial_cmp(&act(b)).unwrap());
        for l in order {
            if !cube.contains_lit(l) {
                continue;
            }
            let cand = cube.without(l);
            if cand.is_empty() || self.intersects_init(&cand) {
                continue;
            }
            match self.consecution(&cand, level - 1)? {
                Ok(core) => cube = core,
                Err(cti) => {
                    // retry once on the literals the counterexample agrees with
                    let joined = cand.filter(|x| {
                        let k = self.circuit.latch_index(x.var()).unwrap();
                        cti.latches[k] != x.is_negated()
                    });
                    if joined.len() < cand.len()
                        && !joined.is_empty()
                        && !self.intersects_init(&joined)
                    {
                        if let Ok(core) = self.consecution(&joined, level - 1)? {
                            cube = core;
                        }
                    }
                }
            }
        }
        Ok(cube)
    }

    fn build_cex(&self, head: Option<Vec<bool>>, start: usize) -> Counterexample {
        let mut ins = Vec::new();
        ins.extend(head);
        let mut i = start;
        loop {
            let o = &self.obligations[i];
            ins.push(o.inputs.clone());
            match &o.next {
                Ok(n) => i = *n,
                Err(last) => {
                    ins.push(last.clone());
                    break;
                }
            }
        }
        Counterexample::simulate(self.circuit, ins, self.target.index).expect("well-formed inputs")
    }

    fn push_obligation(
        &mut self,
        heap: &mut BinaryHeap<Reverse<(usize, usize)>>,
        o: Obligation,
    ) -> usize {
        self.stats.obligations += 1;
        let id = self.obligations.len();
        heap.push(Reverse((o.level, id)));
        self.obligations.push(o);
        id
    }

    /// Blocks the obligation `root` and everything it spawns, or returns a
    /// counterexample.
    fn block(&mut self, root: Obligation) -> Result<Option<Counterexample>, Exhausted> {
        let mut heap = BinaryHeap::new();
        self.push_obligation(&mut heap, root);
        while let Some(Reverse((level, id))) = heap.pop() {
            self.check_time()?;
            let cube = self.obligations[id].cube.clone();
            if self.intersects_init(&cube) {
                return Ok(Some(self.build_cex(None, id)));
            }
            if self.frames.is_blocked(&cube, level) {
                continue;
            }
            match self.consecution(&cube, level - 1)? {
                Ok(core) => {
                    let g = self.generalize(core, level)?;
                    let mut lvl = level;
                    while lvl < self.frames.top() {
                        match self.consecution(&g, lvl)? {
                            Ok(_) => lvl += 1,
                            Err(_) => break,
                        }
                    }
                    self.bump(&g);
                    self.stats.learned_clauses += 1;
                    self.add_lemma(lvl, g.negate());
                }
                Err(pred) => {
                    if level == 1 {
                        return Ok(Some(self.build_cex(Some(pred.inputs), id)));
                    }
                    let pc = self
                        .lifter
                        .lift(&pred, LiftTarget::Cube(&cube), self.options.lifting);
                    self.push_obligation(
                        &mut heap,
                        Obligation {
                            cube: pc,
                            level: level - 1,
                            inputs: pred.inputs,
                            next: Ok(id),
                        },
                    );
                    heap.push(Reverse((level, id)));
                }
            }
        }
        Ok(None)
    }

    /// Moves clauses forward; returns the invariant at a fixpoint.
    fn propagate(&mut self, k: usize) -> Result<Option<Invariant>, Exhausted> {
        for j in 1..=k {
            for c in self.frames.delta(j).to_vec() {
                self.check_time()?;
                if !self.frames.delta(j).contains(&c) {
                    continue;
                }
                if let Ok(core) = self.consecution(&c.negate(), j)? {
                    self.frames.remove(j, &c);
                    self.add_lemma(j + 1, core.negate());
                }
            }
            if self.frames.delta(j).is_empty() {
                let clauses = self.frames.extract_invariant().expect("fixpoint exists");
                let seeds = self.frames.inf();
                let learned = clauses
                    .iter()
                    .filter(|c| !seeds.contains(c))
                    .cloned()
                    .collect();
                return Ok(Some(Invariant { clauses, learned }));
            }
        }
        Ok(None)
    }

    fn search(&mut self) -> Result<PdrResult, Exhausted> {
        if let Some(i) = self.lifter.init_violation() {
            let cex = Counterexample::simulate(self.circuit, vec![i], self.target.index)
                .expect("well-formed inputs");
            return Ok(PdrResult::Fails(cex));
        }
        self.check_time()?;
        if let Some((pred, nxt)) = self.bad_predecessor(0)? {
            let cex =
                Counterexample::simulate(self.circuit, vec![pred.inputs, nxt], self.target.index)
                    .expect("well-formed inputs");
            return Ok(PdrResult::Fails(cex));
        }
        self.open_level();
        loop {
            let k = self.frames.top();
            while let Some((pred, nxt)) = self.bad_predecessor(k)? {
                self.check_time()?;
                let cube = self.lifter.lift(
                    &pred,
                    LiftTarget::Bad { next_inputs: &nxt },
                    self.options.lifting,
                );
                let o = Obligation {
                    cube,
                    level: k,
                    inputs: pred.inputs,
                    next: Err(nxt),
                };
                if let Some(cex) = self.block(o)? {
                    return Ok(PdrResult::Fails(cex));
                }
            }
            self.open_level();
            if let Some(inv) = self.propagate(k)? {
                return Ok(PdrResult::Holds(inv));
            }
            if self
                .options
                .max_frames
                .is_some_and(|m| self.frames.top() >= m)
            {
                return Err(Exhausted);
            }
        }
    }
}
