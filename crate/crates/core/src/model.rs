//! And-inverter-graph transition systems, traces and their exact simulation
//! semantics, including the projection of the transition relation onto an
//! aggregate property (transitions out of a violating frame become self-loops).

use serde::{Deserialize, Serialize};
use std::fmt;
use std::ops::Not;
use thiserror::Error;

pub type Var = u32;

/// A possibly negated variable. Variable 0 is the constant: `Lit::TRUE` is
/// variable 0 in positive polarity, `Lit::FALSE` its negation.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Lit(u32);

impl Lit {
    pub const TRUE: Lit = Lit(0);
    pub const FALSE: Lit = Lit(1);

    #[inline]
    pub fn new(var: Var, negated: bool) -> Lit {
        Lit(var << 1 | negated as u32)
    }

    #[inline]
    pub fn pos(var: Var) -> Lit {
        Lit::new(var, false)
    }

    #[inline]
    pub fn var(self) -> Var {
        self.0 >> 1
    }

    #[inline]
    pub fn is_negated(self) -> bool {
        self.0 & 1 == 1
    }

    #[inline]
    pub fn is_const(self) -> bool {
        self.var() == 0
    }

    /// `self` if `cond`, otherwise its negation.
    #[inline]
    pub fn with_polarity(self, cond: bool) -> Lit {
        if cond {
            self
        } else {
            !self
        }
    }
}

impl Not for Lit {
    type Output = Lit;
    #[inline]
    fn not(self) -> Lit {
        Lit(self.0 ^ 1)
    }
}

impl fmt::Debug for Lit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Lit::TRUE => write!(f, "T"),
            Lit::FALSE => write!(f, "F"),
            l if l.is_negated() => write!(f, "!v{}", l.var()),
            l => write!(f, "v{}", l.var()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Latch {
    pub var: Var,
    pub next: Lit,
    pub init: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct AndGate {
    pub out: Var,
    pub lhs: Lit,
    pub rhs: Lit,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ModelError {
    #[error("frame has {got_latches} latches and {got_inputs} inputs, circuit expects {latches} and {inputs}")]
    DimensionMismatch {
        latches: usize,
        inputs: usize,
        got_latches: usize,
        got_inputs: usize,
    },
    #[error("invalid circuit: {0}")]
    Invalid(String),
}

/// Variables are dense: `1..=num_inputs` are inputs, then one variable per
/// latch, then one per AND gate in topological order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Circuit {
    num_inputs: usize,
    latches: Vec<Latch>,
    ands: Vec<AndGate>,
    bads: Vec<Lit>,
    constraints: Vec<Lit>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PropertyKind {
    /// Expected to hold.
    Eth,
    /// Expected to fail.
    Etf,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PropertySpec {
    pub index: usize,
    pub bad: Lit,
    pub kind: PropertyKind,
}

impl PropertySpec {
    pub fn eth(index: usize, bad: Lit) -> Self {
        PropertySpec {
            index,
            bad,
            kind: PropertyKind::Eth,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum VarKind {
    Const,
    Input(usize),
    Latch(usize),
    And(usize),
}

impl Circuit {
    pub fn new(
        num_inputs: usize,
        latches: Vec<Latch>,
        ands: Vec<AndGate>,
        bads: Vec<Lit>,
        constraints: Vec<Lit>,
    ) -> Result<Circuit, ModelError> {
        let c = Circuit {
            num_inputs,
            latches,
            ands,
            bads,
            constraints,
        };
        c.validate()?;
        Ok(c)
    }

    fn validate(&self) -> Result<(), ModelError> {
        let err = |m: String| Err(ModelError::Invalid(m));
        let first_latch = 1 + self.num_inputs;
        for (k, l) in self.latches.iter().enumerate() {
            if l.var as usize != first_latch + k {
                return err(format!(
                    "latch {k} has variable {}, expected {}",
                    l.var,
                    first_latch + k
                ));
            }
        }
        let first_and = first_latch + self.latches.len();
        for (k, g) in self.ands.iter().enumerate() {
            let out = first_and + k;
            if g.out as usize != out {
                return err(format!(
                    "and gate {k} has variable {}, expected {out}",
                    g.out
                ));
            }
            for op in [g.lhs, g.rhs] {
                if op.var() as usize >= out {
                    return err(format!(
                        "and gate v{out} reads v{} which is not defined earlier",
                        op.var()
                    ));
                }
            }
        }
        let max = self.max_var();
        for l in self
            .latches
            .iter()
            .map(|l| l.next)
            .chain(self.bads.iter().copied())
            .chain(self.constraints.iter().copied())
        {
            if l.var() > max {
                return err(format!("literal {l:?} exceeds maximum variable {max}"));
            }
        }
        Ok(())
    }

    pub fn num_inputs(&self) -> usize {
        self.num_inputs
    }

    pub fn num_latches(&self) -> usize {
        self.latches.len()
    }

    pub fn latches(&self) -> &[Latch] {
        &self.latches
    }

    pub fn ands(&self) -> &[AndGate] {
        &self.ands
    }

    pub fn bads(&self) -> &[Lit] {
        &self.bads
    }

    pub fn constraints(&self) -> &[Lit] {
        &self.constraints
    }

    pub fn max_var(&self) -> Var {
        (self.num_inputs + self.latches.len() + self.ands.len()) as Var
    }

    #[inline]
    pub fn input_var(&self, k: usize) -> Var {
        (1 + k) as Var
    }

    #[inline]
    pub fn latch_var(&self, k: usize) -> Var {
        (1 + self.num_inputs + k) as Var
    }

    #[inline]
    pub fn var_kind(&self, v: Var) -> VarKind {
        let v = v as usize;
        if v == 0 {
            VarKind::Const
        } else if v <= self.num_inputs {
            VarKind::Input(v - 1)
        } else if v <= self.num_inputs + self.latches.len() {
            VarKind::Latch(v - 1 - self.num_inputs)
        } else {
            VarKind::And(v - 1 - self.num_inputs - self.latches.len())
        }
    }

    /// Latch index of `v`, if it is a latch variable.
    pub fn latch_index(&self, v: Var) -> Option<usize> {
        match self.var_kind(v) {
            VarKind::Latch(k) => Some(k),
            _ => None,
        }
    }

    pub fn init_values(&self) -> Vec<bool> {
        self.latches.iter().map(|l| l.init).collect()
    }

    /// One property per bad literal, all expected to hold.
    pub fn properties(&self) -> Vec<PropertySpec> {
        self.bads
            .iter()
            .enumerate()
            .map(|(i, &b)| PropertySpec::eth(i, b))
            .collect()
    }

    /// Appends gates computing the disjunction of `lits`.
    pub fn with_disjunction(&self, lits: &[Lit]) -> (Circuit, Lit) {
        let mut c = self.clone();
        let mut acc = Lit::FALSE;
        for &l in lits {
            acc = if acc == Lit::FALSE {
                l
            } else {
                !c.push_and(!acc, !l)
            };
        }
        (c, acc)
    }

    /// Appends the disjunction of `lits` as a new bad literal.
    pub fn with_aggregate_bad(&self, lits: &[Lit]) -> (Circuit, PropertySpec) {
        let (mut c, bad) = self.with_disjunction(lits);
        c.bads.push(bad);
        let spec = PropertySpec::eth(c.bads.len() - 1, bad);
        (c, spec)
    }

    pub(crate) fn push_and(&mut self, lhs: Lit, rhs: Lit) -> Lit {
        let out = self.max_var() + 1;
        self.ands.push(AndGate { out, lhs, rhs });
        Lit::pos(out)
    }

    /// Latch indices in the combinational and sequential cone of `root`.
    pub fn cone_of_influence(&self, root: Lit) -> Vec<usize> {
        let mut seen = vec![false; self.max_var() as usize + 1];
        let mut stack = vec![root.var()];
        let mut latches = Vec::new();
        while let Some(v) = stack.pop() {
            if seen[v as usize] {
                continue;
            }
            seen[v as usize] = true;
            match self.var_kind(v) {
                VarKind::Latch(k) => {
                    latches.push(k);
                    stack.push(self.latches[k].next.var());
                }
                VarKind::And(k) => {
                    stack.push(self.ands[k].lhs.var());
                    stack.push(self.ands[k].rhs.var());
                }
                _ => {}
            }
        }
        latches.sort_unstable();
        latches
    }

    fn check_frame(&self, frame: &TraceFrame) -> Result<(), ModelError> {
        if frame.latches.len() != self.latches.len() || frame.inputs.len() != self.num_inputs {
            return Err(ModelError::DimensionMismatch {
                latches: self.latches.len(),
                inputs: self.num_inputs,
                got_latches: frame.latches.len(),
                got_inputs: frame.inputs.len(),
            });
        }
        Ok(())
    }
}

/// Values of every variable of a circuit under one frame.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Assignment(Vec<bool>);

impl Assignment {
    #[inline]
    pub fn var(&self, v: Var) -> bool {
        self.0[v as usize]
    }

    #[inline]
    pub fn lit(&self, l: Lit) -> bool {
        self.0[l.var() as usize] ^ l.is_negated()
    }
}

/// Latch and input values of one time step.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TraceFrame {
    #[serde(with = "bits")]
    pub latches: Vec<bool>,
    #[serde(with = "bits")]
    pub inputs: Vec<bool>,
}

impl TraceFrame {
    pub fn new(latches: Vec<bool>, inputs: Vec<bool>) -> Self {
        TraceFrame { latches, inputs }
    }
}

/// Serializes bit vectors as strings of `0`/`1`.
pub mod bits {
    use serde::{de::Error, Deserialize, Deserializer, Serializer};

    pub fn to_string(v: &[bool]) -> String {
        v.iter().map(|&b| if b { '1' } else { '0' }).collect()
    }

    pub fn from_str(s: &str) -> Option<Vec<bool>> {
        s.chars()
            .map(|c| match c {
                '0' => Some(false),
                '1' => Some(true),
                _ => None,
            })
            .collect()
    }

    pub fn serialize<S: Serializer>(v: &[bool], s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&to_string(v))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<bool>, D::Error> {
        let s = String::deserialize(d)?;
        from_str(&s).ok_or_else(|| D::Error::custom(format!("invalid bit string {s:?}")))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counterexample {
    pub frames: Vec<TraceFrame>,
    pub violated_property: usize,
}

impl Counterexample {
    /// Number of transitions in the trace.
    pub fn depth(&self) -> usize {
        self.frames.len().saturating_sub(1)
    }

    /// Rebuilds a trace from the initial state by simulating `inputs`.
    pub fn simulate(
        circuit: &Circuit,
        inputs: Vec<Vec<bool>>,
        violated_property: usize,
    ) -> Result<Counterexample, ModelError> {
        let mut state = circuit.init_values();
        let mut frames = Vec::with_capacity(inputs.len());
        let n = inputs.len();
        for (t, ins) in inputs.into_iter().enumerate() {
            let frame = TraceFrame::new(state, ins);
            if t + 1 < n {
                state = eval_transition(circuit, &frame)?;
            } else {
                state = Vec::new();
            }
            frames.push(frame);
        }
        Ok(Counterexample {
            frames,
            violated_property,
        })
    }
}

pub fn eval_circuit(circuit: &Circuit, frame: &TraceFrame) -> Result<Assignment, ModelError> {
    circuit.check_frame(frame)?;
    let mut vals = Vec::with_capacity(circuit.max_var() as usize + 1);
    vals.push(true);
    vals.extend_from_slice(&frame.inputs);
    vals.extend_from_slice(&frame.latches);
    for g in &circuit.ands {
        let a = vals[g.lhs.var() as usize] ^ g.lhs.is_negated();
        let b = vals[g.rhs.var() as usize] ^ g.rhs.is_negated();
        vals.push(a && b);
    }
    Ok(Assignment(vals))
}

pub fn eval_transition(circuit: &Circuit, frame: &TraceFrame) -> Result<Vec<bool>, ModelError> {
    let a = eval_circuit(circuit, frame)?;
    Ok(circuit.latches.iter().map(|l| a.lit(l.next)).collect())
}

pub fn property_violated(circuit: &Circuit, frame: &TraceFrame, prop: &PropertySpec) -> bool {
    eval_circuit(circuit, frame)
        .map(|a| a.lit(prop.bad))
        .unwrap_or(false)
}

/// True iff every circuit-level invariant constraint holds on `frame`.
pub fn constraints_hold(circuit: &Circuit, frame: &TraceFrame) -> bool {
    eval_circuit(circuit, frame)
        .map(|a| circuit.constraints.iter().all(|&c| a.lit(c)))
        .unwrap_or(false)
}

/// The projected transition relation: a frame satisfying every property
/// steps by the circuit, a frame violating one may only self-loop.
pub fn is_valid_local_transition(
    circuit: &Circuit,
    props: &[PropertySpec],
    frame: &TraceFrame,
    next_latches: &[bool],
) -> bool {
    let Ok(a) = eval_circuit(circuit, frame) else {
        return false;
    };
    if next_latches.len() != circuit.num_latches() {
        return false;
    }
    if props.iter().all(|p| !a.lit(p.bad)) {
        circuit
            .latches
            .iter()
            .zip(next_latches)
            .all(|(l, &n)| a.lit(l.next) == n)
    } else {
        frame.latches == next_latches
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ReplayResult {
    /// Set when the trace is structurally unusable (empty, wrong widths).
    pub structural_error: Option<String>,
    pub initialized: bool,
    pub transitions_consistent: bool,
    pub final_violates: bool,
    /// Circuit-level constraints hold on every frame.
    pub circuit_constraints_hold: bool,
    /// Every non-final frame satisfies all constraint properties.
    pub constraints_respected: bool,
    /// First non-final frame violating a constraint property.
    pub first_constraint_violation: Option<usize>,
}

impl ReplayResult {
    /// A genuine trace of the circuit ending in the claimed violation.
    pub fn is_valid(&self) -> bool {
        self.structural_error.is_none()
            && self.initialized
            && self.transitions_consistent
            && self.final_violates
            && self.circuit_constraints_hold
    }

    /// Valid, but it steps out of a frame violating a constraint property.
    pub fn is_spurious(&self) -> bool {
        self.is_valid() && !self.constraints_respected
    }
}

pub fn replay_trace(
    circuit: &Circuit,
    cex: &Counterexample,
    constraint_props: &[PropertySpec],
) -> ReplayResult {
    let mut r = ReplayResult::default();
    if cex.frames.is_empty() {
        r.structural_error = Some("empty trace".into());
        return r;
    }
    if cex.violated_property >= circuit.bads().len() {
        r.structural_error = Some(format!("no property {}", cex.violated_property));
        return r;
    }
    let mut evals = Vec::with_capacity(cex.frames.len());
    for (t, f) in cex.frames.iter().enumerate() {
        match eval_circuit(circuit, f) {
            Ok(a) => evals.push(a),
            Err(e) => {
                r.structural_error = Some(format!("frame {t}: {e}"));
                return r;
            }
        }
    }
    r.initialized = cex.frames[0].latches == circuit.init_values();
    r.transitions_consistent = cex.frames.windows(2).zip(&evals).all(|(w, a)| {
        circuit
            .latches
            .iter()
            .zip(&w[1].latches)
            .all(|(l, &n)| a.lit(l.next) == n)
    });
    let last = evals.last().unwrap();
    r.final_violates = last.lit(circuit.bads()[cex.violated_property]);
    r.circuit_constraints_hold = evals
        .iter()
        .all(|a| circuit.constraints.iter().all(|&c| a.lit(c)));
    r.first_constraint_violation = evals[..evals.len() - 1]
        .iter()
        .position(|a| constraint_props.iter().any(|p| a.lit(p.bad)));
    r.constraints_respected = r.first_constraint_violation.is_none();
    r
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::aiger::gen_counter;

    fn counter_frame(val: u32, bits: usize, enable: bool, req: bool) -> TraceFrame {
        TraceFrame::new(
            (0..bits).map(|b| val >> b & 1 == 1).collect(),
            vec![enable, req],
        )
    }

    fn val_of(latches: &[bool]) -> u32 {
        latches
            .iter()
            .enumerate()
            .map(|(b, &v)| (v as u32) << b)
            .sum()
    }

    /// Reset literal of the counter: (val == rval) && req.
    fn reset_value(c: &Circuit, f: &TraceFrame) -> bool {
        let rval = 1u32 << (c.num_latches() - 1);
        val_of(&f.latches) == rval && f.inputs[1]
    }

    #[test]
    fn constants_evaluate() {
        let (c, _) = gen_counter(3).unwrap();
        let a = eval_circuit(&c, &counter_frame(0, 3, false, false)).unwrap();
        assert!(a.lit(Lit::TRUE));
        assert!(!a.lit(Lit::FALSE));
    }

    #[test]
    fn reset_equation() {
        let (c, _) = gen_counter(3).unwrap();
        // reset fires only on val == 4 with req; observable as next val == 0
        let f = counter_frame(3, 3, true, false);
        assert!(!reset_value(&c, &f));
        assert_eq!(val_of(&eval_transition(&c, &f).unwrap()), 4);
        let f = counter_frame(4, 3, true, true);
        assert!(reset_value(&c, &f));
        assert_eq!(val_of(&eval_transition(&c, &f).unwrap()), 0);
    }

    #[test]
    fn counter_transitions() {
        let (c, _) = gen_counter(3).unwrap();
        for req in [false, true] {
            assert_eq!(
                val_of(&eval_transition(&c, &counter_frame(4, 3, false, req)).unwrap()),
                4
            );
        }
        assert_eq!(
            val_of(&eval_transition(&c, &counter_frame(4, 3, true, false)).unwrap()),
            5
        );
        assert_eq!(
            val_of(&eval_transition(&c, &counter_frame(7, 3, true, false)).unwrap()),
            0
        );
    }

    #[test]
    fn counter_properties() {
        let (c, props) = gen_counter(3).unwrap();
        let f = counter_frame(2, 3, true, false);
        assert!(property_violated(&c, &f, &props[0]));
        let f = counter_frame(0, 3, false, true);
        assert!(!property_violated(&c, &f, &props[0]));
        assert!(!property_violated(&c, &f, &props[1]));
        let f = counter_frame(5, 3, false, true);
        assert!(property_violated(&c, &f, &props[1]));
    }

    #[test]
    fn dimension_mismatch() {
        let (c, _) = gen_counter(3).unwrap();
        let f = TraceFrame::new(vec![false; 2], vec![false; 2]);
        assert!(matches!(
            eval_circuit(&c, &f),
            Err(ModelError::DimensionMismatch { .. })
        ));
        assert!(eval_transition(&c, &f).is_err());
    }

    #[test]
    fn local_transition_cases() {
        let (c, props) = gen_counter(3).unwrap();
        let bits = |v: u32| (0..3).map(|b| v >> b & 1 == 1).collect::<Vec<_>>();
        assert!(is_valid_local_transition(
            &c,
            &props,
            &counter_frame(2, 3, true, true),
            &bits(3)
        ));
        assert!(is_valid_local_transition(
            &c,
            &props,
            &counter_frame(2, 3, true, false),
            &bits(2)
        ));
        assert!(!is_valid_local_transition(
            &c,
            &props,
            &counter_frame(2, 3, true, false),
            &bits(3)
        ));
    }

    #[test]
    fn self_loop_law_exhaustive() {
        let (c, props) = gen_counter(3).unwrap();
        for v in 0..8u32 {
            for ins in 0..4u32 {
                let f = counter_frame(v, 3, ins & 1 == 1, ins & 2 == 2);
                let violating = props.iter().any(|p| property_violated(&c, &f, p));
                let succ = eval_transition(&c, &f).unwrap();
                let accepted: Vec<u32> = (0..8u32)
                    .filter(|&n| {
                        let nb: Vec<bool> = (0..3).map(|b| n >> b & 1 == 1).collect();
                        is_valid_local_transition(&c, &props, &f, &nb)
                    })
                    .collect();
                // exactly one successor in every case
                let expect = if violating { v } else { val_of(&succ) };
                assert_eq!(accepted, vec![expect]);
            }
        }
    }

    #[test]
    fn replay_reports_each_defect() {
        let (c, props) = gen_counter(3).unwrap();
        let global = Counterexample::simulate(&c, vec![vec![true, false]; 6], 1).unwrap();
        let r = replay_trace(&c, &global, &props[..1]);
        assert!(r.is_valid());
        assert!(r.is_spurious());
        assert_eq!(r.first_constraint_violation, Some(0));

        let p0 = Counterexample::simulate(&c, vec![vec![true, false]], 0).unwrap();
        let r = replay_trace(&c, &p0, &props[1..]);
        assert!(r.is_valid() && !r.is_spurious());

        let mut bad_init = p0.clone();
        bad_init.frames[0].latches[1] = true;
        let r = replay_trace(&c, &bad_init, &[]);
        assert!(!r.initialized && !r.is_valid());

        let empty = Counterexample {
            frames: vec![],
            violated_property: 0,
        };
        assert!(replay_trace(&c, &empty, &[]).structural_error.is_some());
    }

    #[test]
    fn disjunction_gate() {
        let (c, props) = gen_counter(3).unwrap();
        let (agg, bad) = c.with_disjunction(&[props[0].bad, props[1].bad]);
        for v in 0..8u32 {
            for req in [false, true] {
                let f = counter_frame(v, 3, true, req);
                let a = eval_circuit(&agg, &f).unwrap();
                assert_eq!(a.lit(bad), !req || v > 4);
            }
        }
    }
}
