//! Lazy Tseitin encoding of time frames of a circuit into a SAT solver. Only
//! the cone of the literals actually requested is encoded.

use crate::model::{self, Circuit, VarKind};
use crate::sat::{self, Solver};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FirstFrame {
    /// Latches of frame 0 are unconstrained variables.
    Free,
    /// Latches of frame 0 are fixed to their initial values.
    Init,
}

pub struct Unroller<'c> {
    circuit: &'c Circuit,
    first: FirstFrame,
    true_lit: sat::Lit,
    frames: Vec<Vec<Option<sat::Lit>>>,
}

impl<'c> Unroller<'c> {
    pub fn new(circuit: &'c Circuit, solver: &mut Solver, first: FirstFrame) -> Self {
        let t = solver.new_var().lit(true);
        solver.add_clause(&[t]);
        let mut u = Unroller {
            circuit,
            first,
            true_lit: t,
            frames: Vec::new(),
        };
        u.add_frame();
        u
    }

    pub fn circuit(&self) -> &'c Circuit {
        self.circuit
    }

    pub fn true_lit(&self) -> sat::Lit {
        self.true_lit
    }

    pub fn num_frames(&self) -> usize {
        self.frames.len()
    }

    /// Opens a frame whose latches are the next-state values of the previous one.
    pub fn add_frame(&mut self) -> usize {
        self.frames
            .push(vec![None; self.circuit.max_var() as usize + 1]);
        self.frames.len() - 1
    }

    pub fn input(&mut self, s: &mut Solver, frame: usize, k: usize) -> sat::Lit {
        self.lit(s, frame, model::Lit::pos(self.circuit.input_var(k)))
    }

    pub fn latch(&mut self, s: &mut Solver, frame: usize, k: usize) -> sat::Lit {
        self.lit(s, frame, model::Lit::pos(self.circuit.latch_var(k)))
    }

    /// Solver literal equivalent to the latch's next-state function in `frame`.
    pub fn next_latch(&mut self, s: &mut Solver, frame: usize, k: usize) -> sat::Lit {
        self.lit(s, frame, self.circuit.latches()[k].next)
    }

    /// Literal already encoded for `l` in `frame`, if any.
    pub fn get(&self, frame: usize, l: model::Lit) -> Option<sat::Lit> {
        self.frames[frame][l.var() as usize].map(|x| if l.is_negated() { !x } else { x })
    }

    pub fn lit(&mut self, s: &mut Solver, frame: usize, l: model::Lit) -> sat::Lit {
        let v = self.var(s, frame, l.var());
        if l.is_negated() {
            !v
        } else {
            v
        }
    }

    fn var(&mut self, s: &mut Solver, frame: usize, root: model::Var) -> sat::Lit {
        if let Some(x) = self.frames[frame][root as usize] {
            return x;
        }
        let c = self.circuit;
        let mut stack = vec![(frame, root)];
        while let Some(&(t, v)) = stack.last() {
            if self.frames[t][v as usize].is_some() {
                stack.pop();
                continue;
            }
            let enc = match c.var_kind(v) {
                VarKind::Const => Some(self.true_lit),
                VarKind::Input(_) => Some(s.new_var().lit(true)),
                VarKind::Latch(k) if t == 0 => Some(match self.first {
                    FirstFrame::Free => s.new_var().lit(true),
                    FirstFrame::Init if c.latches()[k].init => self.true_lit,
                    FirstFrame::Init => !self.true_lit,
                }),
                VarKind::Latch(k) => {
                    let nx = c.latches()[k].next;
                    match self.get(t - 1, nx) {
                        Some(x) => Some(x),
                        None => {
                            stack.push((t - 1, nx.var()));
                            None
                        }
                    }
                }
                VarKind::And(k) => {
                    let g = c.ands()[k];
                    match (self.get(t, g.lhs), self.get(t, g.rhs)) {
                        (Some(a), Some(b)) => {
                            let o = s.new_var().lit(true);
                            s.add_clause(&[!o, a]);
                            s.add_clause(&[!o, b]);
                            s.add_clause(&[o, !a, !b]);
                            Some(o)
                        }
                        (a, b) => {
                            if a.is_none() {
                                stack.push((t, g.lhs.var()));
                            }
                            if b.is_none() {
                                stack.push((t, g.rhs.var()));
                            }
                            None
                        }
                    }
                }
            };
            if let Some(x) = enc {
                self.frames[t][v as usize] = Some(x);
                stack.pop();
            }
        }
        self.frames[frame][root as usize].unwrap()
    }
}
