use crate::model::{Circuit, Lit};
use std::fmt;

/// Conjunction of latch literals, sorted by variable, at most one literal
/// per variable.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Cube(Vec<Lit>);

/// Disjunction of latch literals, the negation of a [`Cube`].
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Clause(Vec<Lit>);

fn normalize(mut lits: Vec<Lit>) -> Vec<Lit> {
    lits.sort_unstable();
    lits.dedup();
    lits
}

impl Cube {
    pub fn new(lits: Vec<Lit>) -> Self {
        Cube(normalize(lits))
    }

    /// Full cube of a concrete latch state.
    pub fn from_state(circuit: &Circuit, state: &[bool]) -> Self {
        Cube(
            state
                .iter()
                .enumerate()
                .map(|(k, &v)| Lit::pos(circuit.latch_var(k)).with_polarity(v))
                .collect(),
        )
    }

    pub fn lits(&self) -> &[Lit] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn negate(&self) -> Clause {
        Clause(self.0.iter().map(|&l| !l).collect())
    }

    pub fn contains_lit(&self, l: Lit) -> bool {
        self.0.binary_search(&l).is_ok()
    }

    /// True iff the concrete latch state lies in the cube.
    pub fn contains_state(&self, circuit: &Circuit, state: &[bool]) -> bool {
        self.0.iter().all(|&l| {
            let k = circuit.latch_index(l.var()).expect("cube over latches");
            state[k] != l.is_negated()
        })
    }

    pub fn without(&self, l: Lit) -> Cube {
        Cube(self.0.iter().copied().filter(|&x| x != l).collect())
    }

    pub fn filter(&self, mut keep: impl FnMut(Lit) -> bool) -> Cube {
        Cube(self.0.iter().copied().filter(|&l| keep(l)).collect())
    }

    /// Every literal of `self` is in `other` (so `other` is the smaller set).
    pub fn subsumes(&self, other: &Cube) -> bool {
        self.0.len() <= other.0.len() && self.0.iter().all(|&l| other.contains_lit(l))
    }
}

impl Clause {
    pub fn new(lits: Vec<Lit>) -> Self {
        Clause(normalize(lits))
    }

    pub fn lits(&self) -> &[Lit] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn negate(&self) -> Cube {
        Cube(self.0.iter().map(|&l| !l).collect())
    }

    pub fn holds_on(&self, circuit: &Circuit, state: &[bool]) -> bool {
        !self.negate().contains_state(circuit, state)
    }

    /// `self` implies `other`: every literal of `self` occurs in `other`.
    pub fn subsumes(&self, other: &Clause) -> bool {
        self.0.len() <= other.0.len() && self.0.iter().all(|l| other.0.binary_search(l).is_ok())
    }
}

impl fmt::Debug for Cube {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Cube{:?}", self.0)
    }
}

impl fmt::Debug for Clause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Clause{:?}", self.0)
    }
}
