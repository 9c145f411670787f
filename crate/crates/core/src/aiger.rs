//! AIGER 1.9 reading and writing (ASCII `aag` and binary `aig`), the counter
//! circuit family, and HWMCC-style witness files.
//!
//! Only the `M I L O A B C` sections are supported. Justice and fairness
//! sections are rejected, as are latches without a concrete reset value.
//! When a file declares no bad-state section its outputs are read as bad
//! literals, which is how pre-1.9 benchmark files encode safety properties.
//!
//! Witness inputs are written in AIGER variable order, latches in
//! declaration order.

use crate::builder::CircuitBuilder;
use crate::model::{
    bits, eval_circuit, eval_transition, AndGate, Circuit, Counterexample, Latch, Lit, ModelError,
    PropertySpec, TraceFrame, Var,
};
use std::collections::HashMap;
use std::fmt::Write as _;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum AigerError {
    #[error("malformed header: {0}")]
    Header(String),
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("unexpected end of input while reading {0}")]
    UnexpectedEof(&'static str),
    #[error("latch {0} has no concrete initial value")]
    UninitializedLatch(u32),
    #[error("justice/fairness sections are not supported")]
    Liveness,
    #[error("binary and gate {index}: non-monotone delta encoding")]
    NonMonotoneDelta { index: usize },
    #[error("combinational cycle through variable {0}")]
    Cycle(u32),
    #[error(transparent)]
    Model(#[from] ModelError),
}

struct Header {
    binary: bool,
    m: usize,
    i: usize,
    l: usize,
    o: usize,
    a: usize,
    b: usize,
    c: usize,
}

struct Reader<'a> {
    data: &'a [u8],
    pos: usize,
    line: usize,
}

impl<'a> Reader<'a> {
    fn next_line(&mut self, what: &'static str) -> Result<&'a str, AigerError> {
        if self.pos >= self.data.len() {
            return Err(AigerError::UnexpectedEof(what));
        }
        let rest = &self.data[self.pos..];
        let end = rest.iter().position(|&b| b == b'\n').unwrap_or(rest.len());
        self.pos += (end + 1).min(rest.len());
        self.line += 1;
        let line = std::str::from_utf8(&rest[..end]).map_err(|_| AigerError::Syntax {
            line: self.line,
            msg: "invalid utf-8".into(),
        })?;
        Ok(line.trim_end_matches('\r'))
    }

    fn numbers(
        &mut self,
        what: &'static str,
        min: usize,
        max: usize,
    ) -> Result<Vec<u64>, AigerError> {
        let line = self.next_line(what)?;
        let nums: Result<Vec<u64>, _> = line.split_whitespace().map(str::parse).collect();
        let nums =
            nums.map_err(|_| self.syntax(format!("expected numbers in {what} line: {line:?}")))?;
        if nums.len() < min || nums.len() > max {
            return Err(self.syntax(format!("wrong field count in {what} line: {line:?}")));
        }
        Ok(nums)
    }

    fn syntax(&self, msg: String) -> AigerError {
        AigerError::Syntax {
            line: self.line,
            msg,
        }
    }

    fn delta(&mut self) -> Result<u64, AigerError> {
        let mut x = 0u64;
        let mut shift = 0;
        loop {
            let Some(&byte) = self.data.get(self.pos) else {
                return Err(AigerError::UnexpectedEof("binary and gates"));
            };
            self.pos += 1;
            if shift > 63 {
                return Err(self.syntax("delta overflow".into()));
            }
            x |= ((byte & 0x7f) as u64) << shift;
            if byte & 0x80 == 0 {
                return Ok(x);
            }
            shift += 7;
        }
    }
}

fn parse_header(r: &mut Reader) -> Result<Header, AigerError> {
    let line = r.next_line("header")?;
    let mut it = line.split_whitespace();
    let binary = match it.next() {
        Some("aag") => false,
        Some("aig") => true,
        other => return Err(AigerError::Header(format!("unknown format tag {other:?}"))),
    };
    let nums: Result<Vec<usize>, _> = it.map(str::parse).collect();
    let nums = nums.map_err(|_| AigerError::Header(line.to_string()))?;
    if nums.len() < 5 || nums.len() > 9 {
        return Err(AigerError::Header(format!(
            "expected 5 to 9 counts, got {}",
            nums.len()
        )));
    }
    let get = |k: usize| nums.get(k).copied().unwrap_or(0);
    let h = Header {
        binary,
        m: get(0),
        i: get(1),
        l: get(2),
        o: get(3),
        a: get(4),
        b: get(5),
        c: get(6),
    };
    if get(7) != 0 || get(8) != 0 {
        return Err(AigerError::Liveness);
    }
    if h.m < h.i + h.l + h.a || (binary && h.m != h.i + h.l + h.a) {
        return Err(AigerError::Header(format!(
            "M={} inconsistent with I+L+A={}",
            h.m,
            h.i + h.l + h.a
        )));
    }
    Ok(h)
}

enum Def {
    Input,
    Latch,
    And(u64, u64),
}

/// Parses an ASCII or binary AIGER file into a dense circuit and one
/// property per bad literal (or per output when no bad section exists).
pub fn parse(data: &[u8]) -> Result<(Circuit, Vec<PropertySpec>), AigerError> {
    let mut r = Reader {
        data,
        pos: 0,
        line: 0,
    };
    let h = parse_header(&mut r)?;
    let max_lit = 2 * h.m as u64 + 1;
    let mut defs: HashMap<u64, Def> = HashMap::new();
    let mut input_vars = Vec::with_capacity(h.i);
    let check_lit = |r: &Reader, l: u64| {
        if l > max_lit {
            Err(r.syntax(format!("literal {l} exceeds 2M+1")))
        } else {
            Ok(l)
        }
    };
    let define = |r: &Reader, defs: &mut HashMap<u64, Def>, lit: u64, d: Def| {
        if lit < 2 || lit & 1 == 1 || lit > max_lit {
            return Err(r.syntax(format!("invalid definition literal {lit}")));
        }
        if defs.insert(lit >> 1, d).is_some() {
            return Err(r.syntax(format!("variable {} defined twice", lit >> 1)));
        }
        Ok(())
    };

    if h.binary {
        for k in 0..h.i {
            input_vars.push(k as u64 + 1);
            defs.insert(k as u64 + 1, Def::Input);
        }
    } else {
        for _ in 0..h.i {
            let n = r.numbers("input", 1, 1)?;
            define(&r, &mut defs, n[0], Def::Input)?;
            input_vars.push(n[0] >> 1);
        }
    }

    let mut latch_rows = Vec::with_capacity(h.l);
    for k in 0..h.l {
        let (lit, next, init) = if h.binary {
            let n = r.numbers("latch", 1, 2)?;
            let lit = 2 * (h.i + k + 1) as u64;
            (lit, n[0], n.get(1).copied().unwrap_or(0))
        } else {
            let n = r.numbers("latch", 2, 3)?;
            (n[0], n[1], n.get(2).copied().unwrap_or(0))
        };
        check_lit(&r, next)?;
        let init = match init {
            0 => false,
            1 => true,
            x if x == lit => return Err(AigerError::UninitializedLatch((lit >> 1) as u32)),
            x => return Err(r.syntax(format!("invalid latch reset value {x}"))),
        };
        define(&r, &mut defs, lit, Def::Latch)?;
        latch_rows.push((lit >> 1, next, init));
    }

    let read_lits =
        |r: &mut Reader, n: usize, what: &'static str| -> Result<Vec<u64>, AigerError> {
            (0..n)
                .map(|_| {
                    let v = r.numbers(what, 1, 1)?[0];
                    check_lit(r, v)
                })
                .collect()
        };
    let outputs = read_lits(&mut r, h.o, "output")?;
    let bads = read_lits(&mut r, h.b, "bad")?;
    let constraints = read_lits(&mut r, h.c, "constraint")?;

    let mut and_order = Vec::with_capacity(h.a);
    for k in 0..h.a {
        if h.binary {
            let lhs = 2 * (h.i + h.l + k + 1) as u64;
            let d0 = r.delta()?;
            let d1 = r.delta()?;
            if d0 == 0 || d0 > lhs || d1 > lhs - d0 {
                return Err(AigerError::NonMonotoneDelta { index: k });
            }
            let rhs0 = lhs - d0;
            defs.insert(lhs >> 1, Def::And(rhs0, rhs0 - d1));
            and_order.push(lhs >> 1);
        } else {
            let n = r.numbers("and", 3, 3)?;
            check_lit(&r, n[1])?;
            check_lit(&r, n[2])?;
            define(&r, &mut defs, n[0], Def::And(n[1], n[2]))?;
            and_order.push(n[0] >> 1);
        }
    }

    // Renumber: inputs, latches, then gates in dependency order.
    let mut map: HashMap<u64, Var> = HashMap::new();
    for (k, &v) in input_vars.iter().enumerate() {
        map.insert(v, (1 + k) as Var);
    }
    for (k, &(v, _, _)) in latch_rows.iter().enumerate() {
        map.insert(v, (1 + h.i + k) as Var);
    }
    let mut gates: Vec<AndGate> = Vec::with_capacity(h.a);
    let first_and = (1 + h.i + h.l) as Var;
    let conv = |map: &HashMap<u64, Var>, l: u64| -> Option<Lit> {
        if l >> 1 == 0 {
            Some(if l == 0 { Lit::FALSE } else { Lit::TRUE })
        } else {
            map.get(&(l >> 1)).map(|&v| Lit::new(v, l & 1 == 1))
        }
    };
    let mut on_stack: HashMap<u64, bool> = HashMap::new();
    for &root in &and_order {
        if map.contains_key(&root) {
            continue;
        }
        let mut stack = vec![(root, false)];
        while let Some((v, expanded)) = stack.pop() {
            if map.contains_key(&v) {
                continue;
            }
            let Some(Def::And(a, b)) = defs.get(&v) else {
                return Err(r.syntax(format!("variable {v} used but never defined")));
            };
            let (a, b) = (*a, *b);
            if expanded {
                let lhs = conv(&map, a).unwrap();
                let rhs = conv(&map, b).unwrap();
                let out = first_and + gates.len() as Var;
                gates.push(AndGate { out, lhs, rhs });
                map.insert(v, out);
                on_stack.remove(&v);
            } else {
                if on_stack.insert(v, true).is_some() {
                    return Err(AigerError::Cycle(v as u32));
                }
                stack.push((v, true));
                for op in [a >> 1, b >> 1] {
                    if op != 0 && !map.contains_key(&op) {
                        if on_stack.contains_key(&op) {
                            return Err(AigerError::Cycle(op as u32));
                        }
                        stack.push((op, false));
                    }
                }
            }
        }
    }
    let resolve = |l: u64| -> Result<Lit, AigerError> {
        conv(&map, l).ok_or_else(|| AigerError::Syntax {
            line: 0,
            msg: format!("literal {l} refers to an undefined variable"),
        })
    };
    let latches = latch_rows
        .iter()
        .enumerate()
        .map(|(k, &(_, next, init))| {
            Ok(Latch {
                var: (1 + h.i + k) as Var,
                next: resolve(next)?,
                init,
            })
        })
        .collect::<Result<Vec<_>, AigerError>>()?;
    let bad_src = if h.b > 0 { &bads } else { &outputs };
    let bads = bad_src
        .iter()
        .map(|&l| resolve(l))
        .collect::<Result<Vec<_>, _>>()?;
    let constraints = constraints
        .iter()
        .map(|&l| resolve(l))
        .collect::<Result<Vec<_>, _>>()?;
    let circuit = Circuit::new(h.i, latches, gates, bads, constraints)?;
    let props = circuit.properties();
    Ok((circuit, props))
}

fn aiger_lit(l: Lit) -> u64 {
    match l {
        Lit::FALSE => 0,
        Lit::TRUE => 1,
        l => 2 * l.var() as u64 + l.is_negated() as u64,
    }
}

/// Canonical ASCII form: no outputs, bad and constraint sections always present.
pub fn emit_ascii(c: &Circuit) -> Vec<u8> {
    let mut s = String::new();
    writeln!(
        s,
        "aag {} {} {} 0 {} {} {}",
        c.max_var(),
        c.num_inputs(),
        c.num_latches(),
        c.ands().len(),
        c.bads().len(),
        c.constraints().len()
    )
    .unwrap();
    for k in 0..c.num_inputs() {
        writeln!(s, "{}", 2 * c.input_var(k)).unwrap();
    }
    for l in c.latches() {
        writeln!(s, "{} {} {}", 2 * l.var, aiger_lit(l.next), l.init as u8).unwrap();
    }
    for &b in c.bads().iter().chain(c.constraints()) {
        writeln!(s, "{}", aiger_lit(b)).unwrap();
    }
    for g in c.ands() {
        writeln!(s, "{} {} {}", 2 * g.out, aiger_lit(g.lhs), aiger_lit(g.rhs)).unwrap();
    }
    s.into_bytes()
}

pub fn emit_binary(c: &Circuit) -> Vec<u8> {
    let mut s = String::new();
    writeln!(
        s,
        "aig {} {} {} 0 {} {} {}",
        c.max_var(),
        c.num_inputs(),
        c.num_latches(),
        c.ands().len(),
        c.bads().len(),
        c.constraints().len()
    )
    .unwrap();
    for l in c.latches() {
        writeln!(s, "{} {}", aiger_lit(l.next), l.init as u8).unwrap();
    }
    for &b in c.bads().iter().chain(c.constraints()) {
        writeln!(s, "{}", aiger_lit(b)).unwrap();
    }
    let mut out = s.into_bytes();
    let mut put = |mut x: u64| {
        while x & !0x7f != 0 {
            out.push((x & 0x7f) as u8 | 0x80);
            x >>= 7;
        }
        out.push(x as u8);
    };
    for g in c.ands() {
        let lhs = 2 * g.out as u64;
        let (a, b) = (aiger_lit(g.lhs), aiger_lit(g.rhs));
        let (r0, r1) = if a >= b { (a, b) } else { (b, a) };
        put(lhs - r0);
        put(r0 - r1);
    }
    out
}

/// The counter with the faulty reset: `bits` latches holding `val` (init 0),
/// inputs `enable` and `req`, property 0 `req == 1`, property 1
/// `val <= 2^(bits-1)`.
pub fn gen_counter(bits: usize) -> Result<(Circuit, Vec<PropertySpec>), ModelError> {
    if !(2..=62).contains(&bits) {
        return Err(ModelError::Invalid(format!(
            "counter width {bits} outside 2..=62"
        )));
    }
    let (mut b, val) = counter_core(bits, true);
    let req = b.input(1);
    b.add_bad(!req);
    let gt = b.greater_than_const(&val, 1 << (bits - 1));
    b.add_bad(gt);
    let c = b.build()?;
    let props = c.properties();
    Ok((c, props))
}

/// Counter with `count` threshold properties `val <= 2^(bits-1) + j`. With
/// `faulty_reset` the reset is gated by `req` as in [`gen_counter`];
/// otherwise it always fires at `2^(bits-1)` and every threshold holds, but
/// none is inductive on its own.
pub fn gen_counter_thresholds(
    bits: usize,
    count: usize,
    faulty_reset: bool,
) -> Result<(Circuit, Vec<PropertySpec>), ModelError> {
    if !(2..=62).contains(&bits) || (1u64 << (bits - 1)) + count as u64 > (1u64 << bits) {
        return Err(ModelError::Invalid(format!(
            "{count} thresholds do not fit a {bits}-bit counter"
        )));
    }
    let (mut b, val) = counter_core(bits, faulty_reset);
    for j in 0..count {
        let gt = b.greater_than_const(&val, (1 << (bits - 1)) + j as u64);
        b.add_bad(gt);
    }
    let c = b.build()?;
    let props = c.properties();
    Ok((c, props))
}

fn counter_core(bits: usize, faulty_reset: bool) -> (CircuitBuilder, Vec<Lit>) {
    let mut b = CircuitBuilder::new(2, bits);
    let enable = b.input(0);
    let req = b.input(1);
    let val: Vec<Lit> = (0..bits).map(|k| b.latch(k)).collect();
    let at_rval = b.equals_const(&val, 1 << (bits - 1));
    let reset = if faulty_reset {
        b.and(at_rval, req)
    } else {
        at_rval
    };
    let inc = b.increment(&val);
    for k in 0..bits {
        let counted = b.mux(reset, Lit::FALSE, inc[k]);
        let next = b.mux(enable, counted, val[k]);
        b.set_next(k, next);
    }
    (b, val)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum WitnessStatus {
    Sat,
    Unsat,
    Unknown,
}

pub enum WitnessEvidence<'a> {
    Counterexample(&'a Counterexample),
    Proof,
    Unknown,
}

pub fn emit_witness(property: usize, evidence: WitnessEvidence) -> Vec<u8> {
    let mut s = String::new();
    match evidence {
        WitnessEvidence::Counterexample(cex) => {
            writeln!(s, "1\nb{}", cex.violated_property).unwrap();
            let init = cex
                .frames
                .first()
                .map(|f| bits::to_string(&f.latches))
                .unwrap_or_default();
            writeln!(s, "{init}").unwrap();
            for f in &cex.frames {
                writeln!(s, "{}", bits::to_string(&f.inputs)).unwrap();
            }
            s.push_str(".\n");
        }
        WitnessEvidence::Proof => writeln!(s, "0\nb{property}").unwrap(),
        WitnessEvidence::Unknown => writeln!(s, "2\nb{property}").unwrap(),
    }
    s.into_bytes()
}

#[derive(Debug, Error)]
pub enum WitnessError {
    #[error("line {0}: {1}")]
    Syntax(usize, String),
    #[error(transparent)]
    Model(#[from] ModelError),
}

#[derive(Debug, Clone)]
pub struct Witness {
    pub status: WitnessStatus,
    pub properties: Vec<usize>,
    /// Reconstructed by simulation for satisfiable witnesses.
    pub trace: Option<Counterexample>,
}

/// Reads a witness and simulates its input lines from the recorded initial
/// latch values.
pub fn parse_witness(circuit: &Circuit, data: &[u8]) -> Result<Witness, WitnessError> {
    let text = String::from_utf8_lossy(data);
    let mut lines = text
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.starts_with('c'));
    let mut next = |what: &str| {
        lines
            .next()
            .map(|(n, l)| (n + 1, l.trim()))
            .ok_or_else(|| WitnessError::Syntax(0, format!("missing {what}")))
    };
    let (n, st) = next("status line")?;
    let status = match st {
        "1" => WitnessStatus::Sat,
        "0" => WitnessStatus::Unsat,
        "2" => WitnessStatus::Unknown,
        _ => return Err(WitnessError::Syntax(n, format!("bad status {st:?}"))),
    };
    let (n, tags) = next("property line")?;
    let properties = tags
        .split_whitespace()
        .map(|t| t.strip_prefix('b').and_then(|x| x.parse().ok()))
        .collect::<Option<Vec<usize>>>()
        .ok_or_else(|| WitnessError::Syntax(n, format!("bad property tags {tags:?}")))?;
    if status != WitnessStatus::Sat {
        return Ok(Witness {
            status,
            properties,
            trace: None,
        });
    }
    let (n, init) = next("initial latch line")?;
    let mut state = bits::from_str(init)
        .filter(|v| v.len() == circuit.num_latches())
        .ok_or_else(|| WitnessError::Syntax(n, "bad latch line".into()))?;
    let mut frames = Vec::new();
    loop {
        let (n, l) = next("terminator")?;
        if l == "." {
            break;
        }
        let inputs = bits::from_str(l)
            .filter(|v| v.len() == circuit.num_inputs())
            .ok_or_else(|| WitnessError::Syntax(n, "bad input line".into()))?;
        let f = TraceFrame::new(state, inputs);
        state = eval_transition(circuit, &f)?;
        frames.push(f);
    }
    let violated_property = match properties.first() {
        Some(&p) => p,
        None => return Err(WitnessError::Syntax(2, "no property tag".into())),
    };
    if let Some(last) = frames.last() {
        eval_circuit(circuit, last)?;
    }
    Ok(Witness {
        status,
        properties,
        trace: Some(Counterexample {
            frames,
            violated_property,
        }),
    })
}
