//! Persistent store of strengthening clauses and the filter that keeps only
//! clauses valid under the current assumptions.

use crate::aiger::emit_ascii;
use crate::cube::Clause;
use crate::model::{Circuit, Lit, PropertySpec};
use crate::sat::{self, SolveResult, Solver};
use crate::unroll::{FirstFrame, Unroller};
use sha2::{Digest, Sha256};
use std::fmt::Write as _;
use std::path::Path;
use std::time::Instant;
use thiserror::Error;

const MAGIC: &str = "japdr-clausedb";
const VERSION: &str = "v1";

#[derive(Debug, Error)]
pub enum ClauseDbError {
    #[error("cannot access clause database: {0}")]
    Io(#[from] std::io::Error),
    #[error("line {line}: unsupported clause database version {found:?}")]
    Version { line: usize, found: String },
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ClauseRecord {
    pub clause: Clause,
    pub origin: usize,
    /// Sorted indices of the properties assumed when the clause was proved.
    pub context: Vec<usize>,
    pub fingerprint: String,
}

/// SHA-256 of the canonical ASCII emission, lowercase hex.
pub fn fingerprint(circuit: &Circuit) -> String {
    let digest = Sha256::digest(emit_ascii(circuit));
    digest.iter().fold(String::with_capacity(64), |mut s, b| {
        write!(s, "{b:02x}").unwrap();
        s
    })
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Loaded {
    pub records: Vec<ClauseRecord>,
    /// Records skipped because they belong to another circuit.
    pub skipped: usize,
}

fn latch_number(circuit: &Circuit, l: Lit) -> i64 {
    let k = circuit.latch_index(l.var()).expect("clause over latches") as i64 + 1;
    if l.is_negated() {
        -k
    } else {
        k
    }
}

/// Serializes records grouped into one section per fingerprint, the
/// section of `circuit` first and always present.
pub fn to_text(circuit: &Circuit, records: &[ClauseRecord]) -> String {
    let own = fingerprint(circuit);
    let mut fps: Vec<&str> = vec![&own];
    for r in records {
        if !fps.contains(&r.fingerprint.as_str()) {
            fps.push(&r.fingerprint);
        }
    }
    let mut out = String::new();
    for fp in fps {
        writeln!(out, "{MAGIC} {VERSION} {fp} {}", circuit.num_latches()).unwrap();
        for r in records.iter().filter(|r| r.fingerprint == fp) {
            let ctx = if r.context.is_empty() {
                "-".to_string()
            } else {
                r.context
                    .iter()
                    .map(usize::to_string)
                    .collect::<Vec<_>>()
                    .join(",")
            };
            write!(out, "{ctx} {}", r.origin).unwrap();
            for &l in r.clause.lits() {
                write!(out, " {}", latch_number(circuit, l)).unwrap();
            }
            out.push('\n');
        }
    }
    out
}

/// Parses a database, keeping only records of `circuit`.
pub fn from_text(circuit: &Circuit, text: &str) -> Result<Loaded, ClauseDbError> {
    let fp = fingerprint(circuit);
    let mut loaded = Loaded::default();
    let mut current: Option<bool> = None;
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let t = raw.trim();
        if t.is_empty() || t.starts_with('#') {
            continue;
        }
        let perr = |msg: String| ClauseDbError::Parse { line, msg };
        if let Some(rest) = t.strip_prefix(MAGIC) {
            let f: Vec<&str> = rest.split_whitespace().collect();
            if f.first() != Some(&VERSION) {
                return Err(ClauseDbError::Version {
                    line,
                    found: f.first().unwrap_or(&"").to_string(),
                });
            }
            if f.len() != 3 {
                return Err(perr("header needs a fingerprint and a latch count".into()));
            }
            let n: usize = f[2]
                .parse()
                .map_err(|_| perr(format!("bad latch count {:?}", f[2])))?;
            let matches = f[1] == fp && n == circuit.num_latches();
            if !matches {
                log::warn!("clause database line {line}: skipping section for another circuit");
            }
            current = Some(matches);
            continue;
        }
        let Some(matches) = current else {
            return Err(perr("record before header".into()));
        };
        if !matches {
            loaded.skipped += 1;
            continue;
        }
        let mut f = t.split_whitespace();
        let ctx = f.next().ok_or_else(|| perr("missing context".into()))?;
        let context = if ctx == "-" {
            Vec::new()
        } else {
            let mut v = ctx
                .split(',')
                .map(|x| {
                    x.parse::<usize>()
                        .map_err(|_| perr(format!("bad context index {x:?}")))
                })
                .collect::<Result<Vec<_>, _>>()?;
            v.sort_unstable();
            v
        };
        let origin = f
            .next()
            .ok_or_else(|| perr("missing origin".into()))?
            .parse::<usize>()
            .map_err(|_| perr("bad origin".into()))?;
        let mut lits = Vec::new();
        for tok in f {
            let v: i64 = tok
                .parse()
                .map_err(|_| perr(format!("malformed literal {tok:?}")))?;
            let k = v.unsigned_abs() as usize;
            if v == 0 || k > circuit.num_latches() {
                return Err(perr(format!("literal {v} is not a latch")));
            }
            lits.push(Lit::new(circuit.latch_var(k - 1), v < 0));
        }
        loaded.records.push(ClauseRecord {
            clause: Clause::new(lits),
            origin,
            context,
            fingerprint: fp.clone(),
        });
    }
    Ok(loaded)
}

pub fn save(circuit: &Circuit, records: &[ClauseRecord], path: &Path) -> Result<(), ClauseDbError> {
    std::fs::write(path, to_text(circuit, records))?;
    Ok(())
}

/// Loads records of `circuit`; a missing file is an empty database.
pub fn load(circuit: &Circuit, path: &Path) -> Result<Loaded, ClauseDbError> {
    match std::fs::read_to_string(path) {
        Ok(t) => from_text(circuit, &t),
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(Loaded::default()),
        Err(e) => Err(e.into()),
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct FilterResult {
    pub survivors: Vec<Clause>,
    pub sat_calls: u64,
}

/// Greatest subset of `candidates` that holds initially and is inductive
/// on frames satisfying every property in `assumed` and the circuit
/// constraints. A solver timeout deletes the clause under test.
pub fn filter_invariant(
    candidates: &[Clause],
    circuit: &Circuit,
    assumed: &[PropertySpec],
    deadline: Option<Instant>,
) -> FilterResult {
    let init = circuit.init_values();
    let mut alive: Vec<Clause> = Vec::new();
    for c in candidates {
        if c.holds_on(circuit, &init) && !alive.contains(c) {
            alive.push(c.clone());
        }
    }
    if alive.is_empty() {
        return FilterResult::default();
    }
    let mut s = Solver::new();
    s.set_deadline(deadline);
    let mut u = Unroller::new(circuit, &mut s, FirstFrame::Free);
    u.add_frame();
    for p in assumed {
        let l = !u.lit(&mut s, 0, p.bad);
        s.add_clause(&[l]);
    }
    for &cc in circuit.constraints() {
        for t in 0..2 {
            let l = u.lit(&mut s, t, cc);
            s.add_clause(&[l]);
        }
    }
    let mut acts: Vec<sat::Lit> = Vec::with_capacity(alive.len());
    for c in &alive {
        let a = s.new_var().lit(true);
        let mut cl = vec![!a];
        cl.extend(c.lits().iter().map(|&l| u.lit(&mut s, 0, l)));
        s.add_clause(&cl);
        acts.push(a);
    }
    let mut live = vec![true; alive.len()];
    loop {
        let mut changed = false;
        for i in 0..alive.len() {
            if !live[i] {
                continue;
            }
            let mut a: Vec<sat::Lit> = (0..alive.len())
                .filter(|&j| live[j])
                .map(|j| acts[j])
                .collect();
            a.extend(alive[i].lits().iter().map(|&l| !u.lit(&mut s, 1, l)));
            if s.solve(&a) != SolveResult::Unsat {
                live[i] = false;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    FilterResult {
        survivors: alive
            .into_iter()
            .zip(live)
            .filter(|(_, l)| *l)
            .map(|(c, _)| c)
            .collect(),
        sat_calls: s.stats().solves,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::aiger::gen_counter;

    fn records(c: &Circuit) -> Vec<ClauseRecord> {
        let fp = fingerprint(c);
        let l = |k: usize, n: bool| Lit::new(c.latch_var(k), n);
        vec![
            ClauseRecord {
                clause: Clause::new(vec![l(0, true), l(2, false)]),
                origin: 1,
                context: vec![0],
                fingerprint: fp.clone(),
            },
            ClauseRecord {
                clause: Clause::new(vec![l(1, true)]),
                origin: 0,
                context: vec![],
                fingerprint: fp,
            },
        ]
    }

    #[test]
    fn fingerprint_is_hex_sha256() {
        let (c, _) = gen_counter(3).unwrap();
        let f = fingerprint(&c);
        assert_eq!(f.len(), 64);
        assert!(f.chars().all(|ch| ch.is_ascii_hexdigit()));
        assert_ne!(f, fingerprint(&gen_counter(4).unwrap().0));
    }

    #[test]
    fn roundtrip() {
        let (c, _) = gen_counter(3).unwrap();
        let recs = records(&c);
        let text = to_text(&c, &recs);
        assert!(text.starts_with(&format!("japdr-clausedb v1 {} 3\n", fingerprint(&c))));
        assert!(text.contains("0 1 -1 3\n"));
        assert!(text.contains("- 0 -2\n"));
        let back = from_text(&c, &text).unwrap();
        assert_eq!(back.records, recs);
        assert_eq!(back.skipped, 0);

        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("db.txt");
        save(&c, &recs, &p).unwrap();
        assert_eq!(load(&c, &p).unwrap().records, recs);
        assert!(load(&c, &dir.path().join("none"))
            .unwrap()
            .records
            .is_empty());
    }

    #[test]
    fn other_circuit_is_skipped() {
        let (c, _) = gen_counter(3).unwrap();
        let (d, _) = gen_counter(4).unwrap();
        let text = to_text(&c, &records(&c));
        let got = from_text(&d, &text).unwrap();
        assert!(got.records.is_empty());
        assert_eq!(got.skipped, 2);
    }

    #[test]
    fn malformed_input() {
        let (c, _) = gen_counter(3).unwrap();
        let hdr = format!("japdr-clausedb v1 {} 3\n", fingerprint(&c));
        let e = from_text(&c, &format!("{hdr}- 0 1\n0 1 x2\n")).unwrap_err();
        assert!(matches!(e, ClauseDbError::Parse { line: 3, .. }), "{e}");
        assert!(e.to_string().contains("x2"));
        let e = from_text(&c, "japdr-clausedb v2 abc 3\n").unwrap_err();
        assert!(matches!(e, ClauseDbError::Version { line: 1, .. }));
        let e = from_text(&c, &format!("{hdr}- 0 4\n")).unwrap_err();
        assert!(matches!(e, ClauseDbError::Parse { line: 2, .. }));
        let e = from_text(&c, "- 0 1\n").unwrap_err();
        assert!(matches!(e, ClauseDbError::Parse { line: 1, .. }));
    }

    #[test]
    fn filter_removes_non_invariants() {
        let (c, props) = gen_counter(3).unwrap();
        let l = |k: usize, n: bool| Lit::new(c.latch_var(k), n);
        // val != 5, val != 6, val != 7 hold under req = 1 as a set
        let not5 = Clause::new(vec![l(0, true), l(1, false), l(2, true)]);
        let not67 = Clause::new(vec![l(1, true), l(2, true)]);
        // violated initially
        let bit0 = Clause::new(vec![l(0, false)]);
        // not inductive: val != 3
        let not3 = Clause::new(vec![l(0, true), l(1, true), l(2, false)]);
        let cands = vec![not5.clone(), not67.clone(), bit0, not3];
        let r = filter_invariant(&cands, &c, &props, None);
        assert_eq!(r.survivors, vec![not5.clone(), not67.clone()]);
        assert!(r.sat_calls > 0);
        // without assuming req the counter passes 4 and the set collapses
        let r = filter_invariant(&cands, &c, &[], None);
        assert!(r.survivors.is_empty());
    }
}
