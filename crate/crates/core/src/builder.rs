use crate::model::{AndGate, Circuit, Latch, Lit, ModelError};

/// Incremental construction of a dense circuit with a fixed number of inputs
/// and latches. Gates are folded against constants and trivially equal operands.
#[derive(Debug)]
pub struct CircuitBuilder {
    num_inputs: usize,
    latches: Vec<Latch>,
    ands: Vec<AndGate>,
    bads: Vec<Lit>,
    constraints: Vec<Lit>,
}

impl CircuitBuilder {
    pub fn new(num_inputs: usize, num_latches: usize) -> Self {
        let latches = (0..num_latches)
            .map(|k| Latch {
                var: (1 + num_inputs + k) as u32,
                next: Lit::FALSE,
                init: false,
            })
            .collect();
        CircuitBuilder {
            num_inputs,
            latches,
            ands: Vec::new(),
            bads: Vec::new(),
            constraints: Vec::new(),
        }
    }

    pub fn input(&self, k: usize) -> Lit {
        assert!(k < self.num_inputs);
        Lit::pos((1 + k) as u32)
    }

    pub fn latch(&self, k: usize) -> Lit {
        Lit::pos(self.latches[k].var)
    }

    pub fn set_next(&mut self, k: usize, next: Lit) {
        self.latches[k].next = next;
    }

    pub fn set_init(&mut self, k: usize, init: bool) {
        self.latches[k].init = init;
    }

    pub fn add_bad(&mut self, l: Lit) -> usize {
        self.bads.push(l);
        self.bads.len() - 1
    }

    pub fn add_constraint(&mut self, l: Lit) {
        self.constraints.push(l);
    }

    pub fn and(&mut self, a: Lit, b: Lit) -> Lit {
        if a == Lit::FALSE || b == Lit::FALSE || a == !b {
            return Lit::FALSE;
        }
        if a == Lit::TRUE || a == b {
            return b;
        }
        if b == Lit::TRUE {
            return a;
        }
        let out = (1 + self.num_inputs + self.latches.len() + self.ands.len()) as u32;
        let (lhs, rhs) = if a > b { (a, b) } else { (b, a) };
        self.ands.push(AndGate { out, lhs, rhs });
        Lit::pos(out)
    }

    pub fn or(&mut self, a: Lit, b: Lit) -> Lit {
        !self.and(!a, !b)
    }

    pub fn xor(&mut self, a: Lit, b: Lit) -> Lit {
        let x = self.and(a, !b);
        let y = self.and(!a, b);
        self.or(x, y)
    }

    /// `sel ? t : e`
    pub fn mux(&mut self, sel: Lit, t: Lit, e: Lit) -> Lit {
        let x = self.and(sel, t);
        let y = self.and(!sel, e);
        self.or(x, y)
    }

    pub fn and_all(&mut self, lits: impl IntoIterator<Item = Lit>) -> Lit {
        lits.into_iter().fold(Lit::TRUE, |acc, l| self.and(acc, l))
    }

    pub fn or_all(&mut self, lits: impl IntoIterator<Item = Lit>) -> Lit {
        lits.into_iter().fold(Lit::FALSE, |acc, l| self.or(acc, l))
    }

    /// Unsigned `bits > value`, bits given LSB first.
    pub fn greater_than_const(&mut self, bits: &[Lit], value: u64) -> Lit {
        if bits.len() < 64 && value >> bits.len() != 0 {
            return Lit::FALSE;
        }
        let mut gt = Lit::FALSE;
        for (b, &v) in bits.iter().enumerate() {
            gt = if value >> b & 1 == 1 {
                self.and(v, gt)
            } else {
                self.or(v, gt)
            };
        }
        gt
    }

    pub fn equals_const(&mut self, bits: &[Lit], value: u64) -> Lit {
        let lits: Vec<Lit> = bits
            .iter()
            .enumerate()
            .map(|(b, &v)| v.with_polarity(value >> b & 1 == 1))
            .collect();
        self.and_all(lits)
    }

    /// Ripple-carry `bits + 1` modulo `2^bits.len()`.
    pub fn increment(&mut self, bits: &[Lit]) -> Vec<Lit> {
        let mut carry = Lit::TRUE;
        let mut out = Vec::with_capacity(bits.len());
        for &v in bits {
            out.push(self.xor(v, carry));
            carry = self.and(v, carry);
        }
        out
    }

    pub fn build(self) -> Result<Circuit, ModelError> {
        Circuit::new(
            self.num_inputs,
            self.latches,
            self.ands,
            self.bads,
            self.constraints,
        )
    }
}
