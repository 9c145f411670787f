use super::LiftMode;
use crate::cube::Cube;
use crate::model::{Circuit, PropertySpec, TraceFrame};
use crate::sat::{self, SolveResult, Solver};
use crate::unroll::{FirstFrame, Unroller};

/// What the lifted predecessor cube must still reach in one step.
#[derive(Clone, Copy, Debug)]
pub enum LiftTarget<'a> {
    /// Every state of the cube steps into this cube.
    Cube(&'a Cube),
    /// Every state of the cube steps, under the given next inputs, into a
    /// frame violating the target property while the circuit constraints hold.
    Bad { next_inputs: &'a [bool] },
}

/// Shrinks concrete predecessor states to cubes with a dedicated two-frame
/// solver, keeping only the latches in the unsatisfiable core.
pub struct Lifter<'c> {
    solver: Solver,
    unroll: Unroller<'c>,
    target: PropertySpec,
    constraints: Vec<PropertySpec>,
}

impl<'c> Lifter<'c> {
    pub fn new(circuit: &'c Circuit, target: &PropertySpec, constraints: &[PropertySpec]) -> Self {
        let mut solver = Solver::new();
        let mut unroll = Unroller::new(circuit, &mut solver, FirstFrame::Free);
        unroll.add_frame();
        Lifter {
            solver,
            unroll,
            target: *target,
            constraints: constraints.to_vec(),
        }
    }

    pub fn sat_calls(&self) -> u64 {
        self.solver.stats().solves
    }

    pub fn set_deadline(&mut self, d: Option<std::time::Instant>) {
        self.solver.set_deadline(d);
    }

    /// Inputs under which the initial state already violates the target while
    /// satisfying the circuit constraints.
    pub fn init_violation(&mut self) -> Option<Vec<bool>> {
        let c = self.unroll.circuit();
        let s = &mut self.solver;
        let mut assumps: Vec<sat::Lit> = c
            .init_values()
            .iter()
            .enumerate()
            .map(|(k, &v)| {
                let l = self.unroll.latch(s, 0, k);
                if v {
                    l
                } else {
                    !l
                }
            })
            .collect();
        assumps.push(self.unroll.lit(s, 0, self.target.bad));
        for &cc in c.constraints() {
            assumps.push(self.unroll.lit(s, 0, cc));
        }
        let ins: Vec<sat::Lit> = (0..c.num_inputs())
            .map(|k| self.unroll.input(s, 0, k))
            .collect();
        match s.solve(&assumps) {
            SolveResult::Sat => Some(ins.iter().map(|&l| s.model_value(l)).collect()),
            _ => None,
        }
    }

    /// A cube containing `pred.latches` all of whose states, under
    /// `pred.inputs`, reach `succ`. In respect mode the states must also
    /// satisfy every constraint property.
    pub fn lift(&mut self, pred: &TraceFrame, succ: LiftTarget<'_>, mode: LiftMode) -> Cube {
        let c = self.unroll.circuit();
        let s = &mut self.solver;
        let u = &mut self.unroll;
        let mut viol = Vec::new();
        match succ {
            LiftTarget::Cube(cube) => {
                for &l in cube.lits() {
                    viol.push(!u.lit(s, 1, l));
                }
            }
            LiftTarget::Bad { .. } => {
                viol.push(!u.lit(s, 1, self.target.bad));
                for &cc in c.constraints() {
                    viol.push(!u.lit(s, 1, cc));
                }
            }
        }
        for &cc in c.constraints() {
            viol.push(!u.lit(s, 0, cc));
        }
        if mode == LiftMode::Respect {
            for p in &self.constraints {
                viol.push(u.lit(s, 0, p.bad));
            }
        }
        let h = s.add_retractable(&viol);
        let mut assumps = Vec::new();
        for (k, &v) in pred.inputs.iter().enumerate() {
            let l = u.input(s, 0, k);
            assumps.push(if v { l } else { !l });
        }
        if let LiftTarget::Bad { next_inputs } = succ {
            for (k, &v) in next_inputs.iter().enumerate() {
                let l = u.input(s, 1, k);
                assumps.push(if v { l } else { !l });
            }
        }
        let first_latch = assumps.len();
        for (k, &v) in pred.latches.iter().enumerate() {
            let l = u.latch(s, 0, k);
            assumps.push(if v { l } else { !l });
        }
        let res = s.solve(&assumps);
        let cube = if res == SolveResult::Unsat {
            let core = s.core();
            let lits = assumps[first_latch..]
                .iter()
                .enumerate()
                .filter(|(_, l)| core.contains(l))
                .map(|(k, l)| crate::model::Lit::pos(c.latch_var(k)).with_polarity(!l.is_negated()))
                .collect();
            Cube::new(lits)
        } else {
            debug_assert!(
                res != SolveResult::Sat,
                "lifting query must be unsatisfiable"
            );
            Cube::from_state(c, &pred.latches)
        };
        s.retract(h).expect("live handle");
        cube
    }
}
