use crate::cube::{Clause, Cube};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum FrameError {
    #[error("no level with an empty delta below the top frame")]
    NoFixpoint,
}

/// Delta-encoded frame sequence. `delta[j]` holds the clauses whose highest
/// proven level is `j`; frame `F_j` is the union of `delta[j..]` and the
/// clauses valid at every level. Level 0 is the initial states and owns no
/// clauses of its own.
#[derive(Clone, Debug, Default)]
pub struct Frames {
    delta: Vec<Vec<Clause>>,
    inf: Vec<Clause>,
}

impl Frames {
    pub fn new(inf: Vec<Clause>) -> Self {
        Frames {
            delta: vec![Vec::new()],
            inf,
        }
    }

    pub fn top(&self) -> usize {
        self.delta.len() - 1
    }

    pub fn push_level(&mut self) -> usize {
        self.delta.push(Vec::new());
        self.top()
    }

    pub fn delta(&self, level: usize) -> &[Clause] {
        &self.delta[level]
    }

    pub fn inf(&self) -> &[Clause] {
        &self.inf
    }

    /// Adds `c` at `level`, dropping clauses at or below it that `c` subsumes.
    pub fn add(&mut self, level: usize, c: Clause) {
        for d in self.delta[1..=level].iter_mut() {
            d.retain(|x| !c.subsumes(x));
        }
        self.delta[level].push(c);
    }

    pub fn remove(&mut self, level: usize, c: &Clause) -> bool {
        let d = &mut self.delta[level];
        match d.iter().position(|x| x == c) {
            Some(p) => {
                d.swap_remove(p);
                true
            }
            None => false,
        }
    }

    /// Clauses of `F_level`.
    pub fn frame(&self, level: usize) -> impl Iterator<Item = &Clause> {
        self.delta[level.max(1)..].iter().flatten().chain(&self.inf)
    }

    /// Every state of `cube` is already excluded by a single clause of `F_level`.
    pub fn is_blocked(&self, cube: &Cube, level: usize) -> bool {
        self.frame(level).any(|c| c.negate().subsumes(cube))
    }

    pub fn fixpoint_level(&self) -> Option<usize> {
        (1..self.top()).find(|&j| self.delta[j].is_empty())
    }

    /// The clauses of the first frame equal to its successor.
    pub fn extract_invariant(&self) -> Result<Vec<Clause>, FrameError> {
        let j = self.fixpoint_level().ok_or(FrameError::NoFixpoint)?;
        Ok(self.frame(j + 1).cloned().collect())
    }

    pub fn num_clauses(&self) -> usize {
        self.delta.iter().map(Vec::len).sum::<usize>() + self.inf.len()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Lit;

    fn cl(v: &[(u32, bool)]) -> Clause {
        Clause::new(v.iter().map(|&(x, n)| Lit::new(x, n)).collect())
    }

    #[test]
    fn empty_fixpoint() {
        let mut f = Frames::new(vec![]);
        assert_eq!(f.extract_invariant(), Err(FrameError::NoFixpoint));
        f.push_level();
        f.push_level();
        assert_eq!(f.extract_invariant().unwrap(), vec![]);
    }

    #[test]
    fn delta_semantics() {
        let mut f = Frames::new(vec![cl(&[(9, false)])]);
        f.push_level();
        f.push_level();
        f.push_level();
        f.add(1, cl(&[(1, false), (2, false)]));
        f.add(2, cl(&[(3, true)]));
        assert_eq!(f.frame(1).count(), 3);
        assert_eq!(f.frame(2).count(), 2);
        // stronger clause at a higher level subsumes the lower one
        f.add(2, cl(&[(1, false)]));
        assert!(f.delta(1).is_empty());
        assert_eq!(f.fixpoint_level(), Some(1));
        let inv = f.extract_invariant().unwrap();
        assert_eq!(inv.len(), 3);
        let cube = Cube::new(vec![Lit::new(1, true), Lit::new(2, false)]);
        assert!(f.is_blocked(&cube, 2));
        assert!(!f.is_blocked(&Cube::new(vec![Lit::new(2, true)]), 2));
    }
}
