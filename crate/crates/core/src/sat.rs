//! Incremental CDCL solver with assumptions, final-conflict cores and
//! retractable clauses.
//!
//! The search follows the MiniSat design: two watched literals with blocker
//! literals, first-UIP learning with local minimization, VSIDS with a binary
//! heap, phase saving, Luby restarts and activity-based learnt deletion.
//! Retractable clauses carry a fresh activation literal that is assumed on
//! every call until the clause is retracted, after which the activation
//! literal is fixed false at the root and the clause is garbage collected.

use std::io::{self, Write};
use std::ops::Not;
use std::time::Instant;
use thiserror::Error;

#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct Var(u32);

impl Var {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }

    #[inline]
    pub fn lit(self, positive: bool) -> Lit {
        Lit(self.0 << 1 | (!positive) as u32)
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Lit(u32);

impl Lit {
    #[inline]
    pub fn var(self) -> Var {
        Var(self.0 >> 1)
    }

    #[inline]
    pub fn is_negated(self) -> bool {
        self.0 & 1 == 1
    }

    #[inline]
    fn code(self) -> usize {
        self.0 as usize
    }

    /// DIMACS form (1-based, signed).
    pub fn to_dimacs(self) -> i64 {
        let v = self.var().0 as i64 + 1;
        if self.is_negated() {
            -v
        } else {
            v
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

impl std::fmt::Debug for Lit {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.to_dimacs())
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum SolveResult {
    Sat,
    Unsat,
    /// Conflict budget or deadline exhausted before an answer.
    Unknown,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SatError {
    #[error("unknown or already retracted clause handle {0}")]
    UnknownHandle(u32),
}

/// Handle to a retractable clause.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub struct ClauseHandle(u32);

const UNDEF: i8 = 0;
const TRUE: i8 = 1;
const FALSE: i8 = -1;

type CRef = u32;

#[derive(Clone, Copy)]
struct Watcher {
    cref: CRef,
    blocker: Lit,
}

struct ClauseData {
    lits: Vec<Lit>,
    learnt: bool,
    removed: bool,
    activity: f64,
}

#[derive(Default, Clone, Debug)]
pub struct SolverStats {
    pub solves: u64,
    pub conflicts: u64,
    pub decisions: u64,
    pub propagations: u64,
}

/// Max-heap of variables keyed by activity.
#[derive(Default)]
struct VarHeap {
    heap: Vec<u32>,
    pos: Vec<i32>,
}

impl VarHeap {
    fn grow(&mut self, n: usize) {
        self.pos.resize(n, -1);
    }

    fn contains(&self, v: u32) -> bool {
        self.pos[v as usize] >= 0
    }

    fn up(&mut self, mut i: usize, act: &[f64]) {
        let v = self.heap[i];
        while i > 0 {
            let p = (i - 1) / 2;
            if act[self.heap[p] as usize] >= act[v as usize] {
                break;
            }
            self.heap[i] = self.heap[p];
            self.pos[self.heap[i] as usize] = i as i32;
            i = p;
        }
        self.heap[i] = v;
        self.pos[v as usize] = i as i32;
    }

    fn down(&mut self, mut i: usize, act: &[f64]) {
        let v = self.heap[i];
        let n = self.heap.len();
        loop {
            let l = 2 * i + 1;
            if l >= n {
                break;
            }
            let r = l + 1;
            let c = if r < n && act[self.heap[r] as usize] > act[self.heap[l] as usize] {
                r
            } else {
                l
            };
            if act[self.heap[c] as usize] <= act[v as usize] {
                break;
            }
            self.heap[i] = self.heap[c];
            self.pos[self.heap[i] as usize] = i as i32;
            i = c;
        }
        self.heap[i] = v;
        self.pos[v as usize] = i as i32;
    }

    fn insert(&mut self, v: u32, act: &[f64]) {
        if self.contains(v) {
            return;
        }
        self.heap.push(v);
        let i = self.heap.len() - 1;
        self.pos[v as usize] = i as i32;
        self.up(i, act);
    }

    fn bumped(&mut self, v: u32, act: &[f64]) {
        if self.contains(v) {
            let i = self.pos[v as usize] as usize;
            self.up(i, act);
        }
    }

    fn pop(&mut self, act: &[f64]) -> Option<u32> {
        let top = *self.heap.first()?;
        let last = self.heap.pop().unwrap();
        self.pos[top as usize] = -1;
        if !self.heap.is_empty() {
            self.heap[0] = last;
            self.pos[last as usize] = 0;
            self.down(0, act);
        }
        Some(top)
    }
}

fn luby(y: f64, mut x: u64) -> f64 {
    let mut size = 1u64;
    let mut seq = 0i32;
    while size < x + 1 {
        seq += 1;
        size = 2 * size + 1;
    }
    while size - 1 != x {
        size = (size - 1) >> 1;
        seq -= 1;
        x %= size;
    }
    y.powi(seq)
}

pub struct Solver {
    clauses: Vec<ClauseData>,
    free: Vec<CRef>,
    learnts: Vec<CRef>,
    watches: Vec<Vec<Watcher>>,
    assigns: Vec<i8>,
    level: Vec<u32>,
    reason: Vec<Option<CRef>>,
    phase: Vec<bool>,
    activity: Vec<f64>,
    seen: Vec<bool>,
    heap: VarHeap,
    trail: Vec<Lit>,
    trail_lim: Vec<usize>,
    qhead: usize,
    ok: bool,
    var_inc: f64,
    cla_inc: f64,
    model: Vec<i8>,
    core: Vec<Lit>,
    live_acts: Vec<Lit>,
    retired: Vec<bool>,
    max_learnts: f64,
    simp_trail: usize,
    simp_props: i64,
    num_original_lits: usize,
    conflict_budget: Option<u64>,
    deadline: Option<Instant>,
    stats: SolverStats,
}

impl Default for Solver {
    fn default() -> Self {
        Self::new()
    }
}

impl Solver {
    pub fn new() -> Self {
        Solver {
            clauses: Vec::new(),
            free: Vec::new(),
            learnts: Vec::new(),
            watches: Vec::new(),
            assigns: Vec::new(),
            level: Vec::new(),
            reason: Vec::new(),
            phase: Vec::new(),
            activity: Vec::new(),
            seen: Vec::new(),
            heap: VarHeap::default(),
            trail: Vec::new(),
            trail_lim: Vec::new(),
            qhead: 0,
            ok: true,
            var_inc: 1.0,
            cla_inc: 1.0,
            model: Vec::new(),
            core: Vec::new(),
            live_acts: Vec::new(),
            retired: Vec::new(),
            max_learnts: 0.0,
            simp_trail: 0,
            simp_props: 0,
            num_original_lits: 0,
            conflict_budget: None,
            deadline: None,
            stats: SolverStats::default(),
        }
    }

    pub fn new_var(&mut self) -> Var {
        let v = self.assigns.len() as u32;
        self.assigns.push(UNDEF);
        self.level.push(0);
        self.reason.push(None);
        self.phase.push(false);
        self.activity.push(0.0);
        self.seen.push(false);
        self.retired.push(false);
        self.watches.push(Vec::new());
        self.watches.push(Vec::new());
        self.heap.grow(self.assigns.len());
        self.heap.insert(v, &self.activity);
        Var(v)
    }

    pub fn num_vars(&self) -> usize {
        self.assigns.len()
    }

    pub fn stats(&self) -> &SolverStats {
        &self.stats
    }

    /// Conflict limit for each subsequent `solve`; `None` is unlimited.
    pub fn set_conflict_budget(&mut self, budget: Option<u64>) {
        self.conflict_budget = budget;
    }

    pub fn set_deadline(&mut self, deadline: Option<Instant>) {
        self.deadline = deadline;
    }

    #[inline]
    fn value(&self, l: Lit) -> i8 {
        let a = self.assigns[l.var().index()];
        if l.is_negated() {
            -a
        } else {
            a
        }
    }

    #[inline]
    fn decision_level(&self) -> usize {
        self.trail_lim.len()
    }

    /// Value of `l` in the last satisfying assignment.
    pub fn model_value(&self, l: Lit) -> bool {
        let a = self.model.get(l.var().index()).copied().unwrap_or(FALSE);
        (a == TRUE) ^ l.is_negated()
    }

    /// Subset of the last call's assumptions that is already unsatisfiable
    /// together with the clause store.
    pub fn core(&self) -> &[Lit] {
        &self.core
    }

    /// Root-level value of `l`, if fixed.
    pub fn fixed_value(&self, l: Lit) -> Option<bool> {
        match self.value(l) {
            TRUE if self.level[l.var().index()] == 0 => Some(true),
            FALSE if self.level[l.var().index()] == 0 => Some(false),
            _ => None,
        }
    }

    pub fn add_clause(&mut self, lits: &[Lit]) -> bool {
        debug_assert_eq!(self.decision_level(), 0);
        if !self.ok {
            return false;
        }
        let mut ps: Vec<Lit> = lits.to_vec();
        ps.sort_unstable();
        ps.dedup();
        let mut j = 0;
        for i in 0..ps.len() {
            let l = ps[i];
            if self.value(l) == TRUE || (i + 1 < ps.len() && ps[i + 1] == !l) {
                return true;
            }
            if self.value(l) != FALSE {
                ps[j] = l;
                j += 1;
            }
        }
        ps.truncate(j);
        match ps.len() {
            0 => {
                self.ok = false;
                false
            }
            1 => {
                self.enqueue(ps[0], None);
                if self.propagate().is_some() {
                    self.ok = false;
                }
                self.ok
            }
            _ => {
                self.num_original_lits += ps.len();
                self.attach(ps, false);
                true
            }
        }
    }

    /// Adds `lits` guarded by a fresh activation literal.
    pub fn add_retractable(&mut self, lits: &[Lit]) -> ClauseHandle {
        let act = self.new_var();
        let mut c = lits.to_vec();
        c.push(act.lit(false));
        self.add_clause(&c);
        self.live_acts.push(act.lit(true));
        ClauseHandle(act.0)
    }

    pub fn retract(&mut self, h: ClauseHandle) -> Result<(), SatError> {
        let lit = Var(h.0).lit(true);
        let Some(pos) = self.live_acts.iter().position(|&l| l == lit) else {
            return Err(SatError::UnknownHandle(h.0));
        };
        self.live_acts.swap_remove(pos);
        self.retired[h.0 as usize] = true;
        self.add_clause(&[!lit]);
        Ok(())
    }

    fn attach(&mut self, lits: Vec<Lit>, learnt: bool) -> CRef {
        let w0 = Watcher {
            cref: 0,
            blocker: lits[1],
        };
        let w1 = Watcher {
            cref: 0,
            blocker: lits[0],
        };
        let (l0, l1) = (lits[0], lits[1]);
        let data = ClauseData {
            lits,
            learnt,
            removed: false,
            activity: 0.0,
        };
        let cref = match self.free.pop() {
            Some(c) => {
                self.clauses[c as usize] = data;
                c
            }
            None => {
                self.clauses.push(data);
                (self.clauses.len() - 1) as CRef
            }
        };
        self.watches[(!l0).code()].push(Watcher { cref, ..w0 });
        self.watches[(!l1).code()].push(Watcher { cref, ..w1 });
        if learnt {
            self.learnts.push(cref);
        }
        cref
    }

    #[inline]
    fn enqueue(&mut self, l: Lit, reason: Option<CRef>) {
        let v = l.var().index();
        self.assigns[v] = if l.is_negated() { FALSE } else { TRUE };
        self.level[v] = self.decision_level() as u32;
        self.reason[v] = reason;
        self.trail.push(l);
    }

    fn propagate(&mut self) -> Option<CRef> {
        let mut conflict = None;
        while self.qhead < self.trail.len() {
            let p = self.trail[self.qhead];
            self.qhead += 1;
            self.stats.propagations += 1;
            let false_lit = !p;
            let mut ws = std::mem::take(&mut self.watches[p.code()]);
            let mut i = 0;
            let mut j = 0;
            'watch: while i < ws.len() {
                let w = ws[i];
                i += 1;
                if self.value(w.blocker) == TRUE {
                    ws[j] = w;
                    j += 1;
                    continue;
                }
                let cref = w.cref;
                let lits = &mut self.clauses[cref as usize].lits;
                if lits[0] == false_lit {
                    lits.swap(0, 1);
                }
                let first = lits[0];
                let nw = Watcher {
                    cref,
                    blocker: first,
                };
                if first != w.blocker && value_of(&self.assigns, first) == TRUE {
                    ws[j] = nw;
                    j += 1;
                    continue;
                }
                for k in 2..lits.len() {
                    if value_of(&self.assigns, lits[k]) != FALSE {
                        lits.swap(1, k);
                        let l1 = lits[1];
                        self.watches[(!l1).code()].push(nw);
                        continue 'watch;
                    }
                }
                ws[j] = nw;
                j += 1;
                if value_of(&self.assigns, first) == FALSE {
                    conflict = Some(cref);
                    self.qhead = self.trail.len();
                    while i < ws.len() {
                        ws[j] = ws[i];
                        j += 1;
                        i += 1;
                    }
                } else {
                    self.enqueue(first, Some(cref));
                }
            }
            ws.truncate(j);
            self.watches[p.code()] = ws;
            if conflict.is_some() {
                break;
            }
        }
        conflict
    }

    fn bump_var(&mut self, v: usize) {
        self.activity[v] += self.var_inc;
        if self.activity[v] > 1e100 {
            for a in self.activity.iter_mut() {
                *a *= 1e-100;
            }
            self.var_inc *= 1e-100;
        }
        self.heap.bumped(v as u32, &self.activity);
    }

    fn bump_clause(&mut self, c: CRef) {
        let cd = &mut self.clauses[c as usize];
        cd.activity += self.cla_inc;
        if cd.activity > 1e20 {
            for &l in &self.learnts {
                self.clauses[l as usize].activity *= 1e-20;
            }
            self.cla_inc *= 1e-20;
        }
    }

    fn analyze(&mut self, mut confl: CRef) -> (Vec<Lit>, usize) {
        let mut learnt = vec![Lit(0)];
        let mut path = 0;
        let mut p: Option<Lit> = None;
        let mut index = self.trail.len();
        let mut to_clear = Vec::new();
        loop {
            if self.clauses[confl as usize].learnt {
                self.bump_clause(confl);
            }
            let start = p.is_some() as usize;
            let n = self.clauses[confl as usize].lits.len();
            for k in start..n {
                let q = self.clauses[confl as usize].lits[k];
                let v = q.var().index();
                if !self.seen[v] && self.level[v] > 0 {
                    self.bump_var(v);
                    self.seen[v] = true;
                    to_clear.push(v);
                    if self.level[v] as usize >= self.decision_level() {
                        path += 1;
                    } else {
                        learnt.push(q);
                    }
                }
            }
            loop {
                index -= 1;
                if self.seen[self.trail[index].var().index()] {
                    break;
                }
            }
            let pl = self.trail[index];
            p = Some(pl);
            self.seen[pl.var().index()] = false;
            path -= 1;
            if path == 0 {
                break;
            }
            confl = self.reason[pl.var().index()].expect("implied literal without reason");
        }
        learnt[0] = !p.unwrap();

        // local minimization: drop literals implied by the rest of the clause
        let mut j = 1;
        for i in 1..learnt.len() {
            let v = learnt[i].var().index();
            let redundant = match self.reason[v] {
                None => false,
                Some(r) => self.clauses[r as usize].lits[1..].iter().all(|q| {
                    let u = q.var().index();
                    self.seen[u] || self.level[u] == 0
                }),
            };
            if !redundant {
                learnt[j] = learnt[i];
                j += 1;
            }
        }
        learnt.truncate(j);
        for v in to_clear {
            self.seen[v] = false;
        }

        let bt = if learnt.len() == 1 {
            0
        } else {
            let mut max_i = 1;
            for i in 2..learnt.len() {
                if self.level[learnt[i].var().index()] > self.level[learnt[max_i].var().index()] {
                    max_i = i;
                }
            }
            learnt.swap(1, max_i);
            self.level[learnt[1].var().index()] as usize
        };
        (learnt, bt)
    }

    /// Collects the assumptions responsible for `p` being false.
    fn analyze_final(&mut self, p: Lit) {
        self.core.clear();
        self.core.push(p);
        if self.decision_level() == 0 {
            return;
        }
        self.seen[p.var().index()] = true;
        for i in (self.trail_lim[0]..self.trail.len()).rev() {
            let x = self.trail[i].var().index();
            if !self.seen[x] {
                continue;
            }
            match self.reason[x] {
                None => self.core.push(self.trail[i]),
                Some(r) => {
                    for k in 1..self.clauses[r as usize].lits.len() {
                        let u = self.clauses[r as usize].lits[k].var().index();
                        if self.level[u] > 0 {
                            self.seen[u] = true;
                        }
                    }
                }
            }
            self.seen[x] = false;
        }
        self.seen[p.var().index()] = false;
    }

    fn cancel_until(&mut self, lvl: usize) {
        if self.decision_level() <= lvl {
            return;
        }
        let lim = self.trail_lim[lvl];
        for i in (lim..self.trail.len()).rev() {
            let l = self.trail[i];
            let v = l.var().index();
            self.assigns[v] = UNDEF;
            self.reason[v] = None;
            self.phase[v] = !l.is_negated();
            self.heap.insert(v as u32, &self.activity);
        }
        self.trail.truncate(lim);
        self.trail_lim.truncate(lvl);
        self.qhead = lim;
    }

    fn pick_branch(&mut self) -> Option<Lit> {
        while let Some(v) = self.heap.pop(&self.activity) {
            if self.assigns[v as usize] == UNDEF && !self.retired[v as usize] {
                return Some(Var(v).lit(self.phase[v as usize]));
            }
        }
        None
    }

    fn locked(&self, c: CRef) -> bool {
        let l0 = self.clauses[c as usize].lits[0];
        self.value(l0) == TRUE && self.reason[l0.var().index()] == Some(c)
    }

    fn remove_clauses(&mut self, dead: &[CRef]) {
        if dead.is_empty() {
            return;
        }
        for &c in dead {
            let cd = &mut self.clauses[c as usize];
            cd.removed = true;
            if !cd.learnt {
                self.num_original_lits -= cd.lits.len();
            }
        }
        let clauses = &self.clauses;
        for ws in self.watches.iter_mut() {
            ws.retain(|w| !clauses[w.cref as usize].removed);
        }
        self.learnts.retain(|&c| !clauses[c as usize].removed);
        for &c in dead {
            self.clauses[c as usize].lits = Vec::new();
            self.free.push(c);
        }
    }

    fn reduce_db(&mut self) {
        let mut ls: Vec<CRef> = self.learnts.clone();
        ls.sort_by(|&a, &b| {
            let (ca, cb) = (&self.clauses[a as usize], &self.clauses[b as usize]);
            (ca.lits.len() > 2, ca.activity)
                .partial_cmp(&(cb.lits.len() > 2, cb.activity))
                .unwrap()
                .reverse()
        });
        let extra = self.cla_inc / ls.len().max(1) as f64;
        let mut dead = Vec::new();
        let half = ls.len() / 2;
        for (i, &c) in ls.iter().enumerate() {
            let cd = &self.clauses[c as usize];
            if cd.lits.len() > 2 && !self.locked(c) && (i >= half || cd.activity < extra) {
                dead.push(c);
            }
        }
        self.remove_clauses(&dead);
    }

    /// Removes clauses satisfied at the root level.
    fn simplify(&mut self) {
        if self.trail.len() == self.simp_trail || self.simp_props > 0 {
            return;
        }
        let mut dead = Vec::new();
        for (c, cd) in self.clauses.iter().enumerate() {
            if cd.removed || cd.lits.is_empty() {
                continue;
            }
            if cd
                .lits
                .iter()
                .any(|&l| self.value(l) == TRUE && self.level[l.var().index()] == 0)
            {
                dead.push(c as CRef);
            }
        }
        // root-level reasons are never inspected
        for &l in &self.trail {
            self.reason[l.var().index()] = None;
        }
        self.remove_clauses(&dead);
        self.simp_trail = self.trail.len();
        self.simp_props = (self.num_original_lits + self.learnts.len() * 4) as i64;
    }

    fn out_of_budget(&self, conflicts_at_start: u64) -> bool {
        if let Some(b) = self.conflict_budget {
            if self.stats.conflicts - conflicts_at_start >= b {
                return true;
            }
        }
        if let Some(d) = self.deadline {
            if Instant::now() >= d {
                return true;
            }
        }
        false
    }

    fn search(&mut self, nof_conflicts: u64, assumptions: &[Lit], start: u64) -> SolveResult {
        let mut conflicts = 0u64;
        loop {
            if let Some(confl) = self.propagate() {
                self.stats.conflicts += 1;
                conflicts += 1;
                if self.decision_level() == 0 {
                    self.ok = false;
                    return SolveResult::Unsat;
                }
                let (learnt, bt) = self.analyze(confl);
                self.cancel_until(bt);
                if learnt.len() == 1 {
                    self.enqueue(learnt[0], None);
                } else {
                    let l0 = learnt[0];
                    let c = self.attach(learnt, true);
                    self.bump_clause(c);
                    self.enqueue(l0, Some(c));
                }
                self.var_inc *= 1.0 / 0.95;
                self.cla_inc *= 1.0 / 0.999;
                if conflicts.is_multiple_of(256) && self.out_of_budget(start) {
                    self.cancel_until(0);
                    return SolveResult::Unknown;
                }
            } else {
                if conflicts >= nof_conflicts || self.out_of_budget(start) {
                    self.cancel_until(0);
                    return SolveResult::Unknown;
                }
                if self.decision_level() == 0 {
                    self.simplify();
                }
                if self.learnts.len() as f64 - self.trail.len() as f64 >= self.max_learnts {
                    self.reduce_db();
                }
                let mut next = None;
                while self.decision_level() < assumptions.len() {
                    let p = assumptions[self.decision_level()];
                    match self.value(p) {
                        TRUE => self.trail_lim.push(self.trail.len()),
                        FALSE => {
                            self.analyze_final(p);
                            return SolveResult::Unsat;
                        }
                        _ => {
                            next = Some(p);
                            break;
                        }
                    }
                }
                let next = match next {
                    Some(p) => p,
                    None => {
                        self.stats.decisions += 1;
                        match self.pick_branch() {
                            Some(l) => l,
                            None => return SolveResult::Sat,
                        }
                    }
                };
                self.trail_lim.push(self.trail.len());
                self.enqueue(next, None);
            }
        }
    }

    /// Decides satisfiability of the clause store under `assumptions`.
    pub fn solve(&mut self, assumptions: &[Lit]) -> SolveResult {
        self.stats.solves += 1;
        self.core.clear();
        self.model.clear();
        if !self.ok {
            return SolveResult::Unsat;
        }
        let mut assumps: Vec<Lit> = Vec::with_capacity(self.live_acts.len() + assumptions.len());
        assumps.extend_from_slice(&self.live_acts);
        assumps.extend_from_slice(assumptions);
        self.max_learnts = (self.num_original_lits as f64 / 3.0).max(2000.0);
        let start = self.stats.conflicts;
        let mut restart = 0;
        let status = loop {
            let budget = (luby(2.0, restart) * 100.0) as u64;
            restart += 1;
            let before = self.stats.propagations;
            let st = self.search(budget, &assumps, start);
            self.simp_props -= (self.stats.propagations - before) as i64;
            match st {
                SolveResult::Unknown if !self.out_of_budget(start) => {
                    self.max_learnts *= 1.05;
                    continue;
                }
                st => break st,
            }
        };
        match status {
            SolveResult::Sat => {
                self.model = self.assigns.clone();
            }
            SolveResult::Unsat => {
                let live = &self.live_acts;
                self.core.retain(|l| !live.contains(l));
            }
            SolveResult::Unknown => {}
        }
        self.cancel_until(0);
        status
    }

    /// Writes the original clauses and root-level units in DIMACS form.
    pub fn write_dimacs<W: Write>(&self, mut w: W) -> io::Result<()> {
        let units: Vec<Lit> = self
            .trail
            .iter()
            .copied()
            .filter(|l| self.level[l.var().index()] == 0)
            .collect();
        let clauses: Vec<&ClauseData> = self
            .clauses
            .iter()
            .filter(|c| !c.removed && !c.learnt && !c.lits.is_empty())
            .collect();
        let extra = if self.ok { 0 } else { 1 };
        writeln!(
            w,
            "p cnf {} {}",
            self.num_vars(),
            units.len() + clauses.len() + extra
        )?;
        if !self.ok {
            writeln!(w, "0")?;
        }
        for l in units {
            writeln!(w, "{} 0", l.to_dimacs())?;
        }
        for c in clauses {
            for l in &c.lits {
                write!(w, "{} ", l.to_dimacs())?;
            }
            writeln!(w, "0")?;
        }
        Ok(())
    }
}

#[inline]
fn value_of(assigns: &[i8], l: Lit) -> i8 {
    let a = assigns[l.var().index()];
    if l.is_negated() {
        -a
    } else {
        a
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn lits(s: &mut Solver, n: usize) -> Vec<Lit> {
        (0..n).map(|_| s.new_var().lit(true)).collect()
    }

    fn brute_sat(n: usize, cnf: &[Vec<(usize, bool)>]) -> bool {
        (0..1u32 << n).any(|m| {
            cnf.iter()
                .all(|c| c.iter().any(|&(v, pos)| (m >> v & 1 == 1) == pos))
        })
    }

    fn to_lits(x: &[Lit], c: &[(usize, bool)]) -> Vec<Lit> {
        c.iter()
            .map(|&(v, p)| if p { x[v] } else { !x[v] })
            .collect()
    }

    #[test]
    fn unit_and_contradiction() {
        let mut s = Solver::new();
        let x = lits(&mut s, 1);
        s.add_clause(&[x[0]]);
        assert_eq!(s.solve(&[]), SolveResult::Sat);
        assert!(s.model_value(x[0]));
        s.add_clause(&[!x[0]]);
        assert_eq!(s.solve(&[]), SolveResult::Unsat);
        assert!(s.core().is_empty());
    }

    #[test]
    fn retraction_is_exact() {
        let mut s = Solver::new();
        let x = lits(&mut s, 1);
        let h = s.add_retractable(&[!x[0]]);
        assert_eq!(s.solve(&[x[0]]), SolveResult::Unsat);
        assert_eq!(s.core(), &[x[0]]);
        s.retract(h).unwrap();
        assert_eq!(s.solve(&[x[0]]), SolveResult::Sat);
        assert_eq!(s.retract(h), Err(SatError::UnknownHandle(h.0)));
    }

    #[test]
    fn core_from_resolution() {
        let mut s = Solver::new();
        let v = lits(&mut s, 4);
        let (a, b, x, c) = (v[0], v[1], v[2], v[3]);
        s.add_clause(&[!a, x]);
        s.add_clause(&[!b, !x]);
        assert_eq!(s.solve(&[c, a, b]), SolveResult::Unsat);
        let core = s.core().to_vec();
        assert!(core.iter().all(|l| [a, b].contains(l)));
        assert_eq!(s.solve(&core), SolveResult::Unsat);
        assert_eq!(s.solve(&[a]), SolveResult::Sat);
    }

    /// PHP(3,2): three pigeons, two holes.
    #[test]
    fn pigeonhole() {
        let cnf: Vec<Vec<(usize, bool)>> = {
            let p = |i: usize, h: usize| i * 2 + h;
            let mut c = Vec::new();
            for i in 0..3 {
                c.push(vec![(p(i, 0), true), (p(i, 1), true)]);
            }
            for h in 0..2 {
                for i in 0..3 {
                    for j in i + 1..3 {
                        c.push(vec![(p(i, h), false), (p(j, h), false)]);
                    }
                }
            }
            c
        };
        assert!(!brute_sat(6, &cnf));
        let mut s = Solver::new();
        let x = lits(&mut s, 6);
        for c in &cnf {
            s.add_clause(&to_lits(&x, c));
        }
        assert_eq!(s.solve(&[]), SolveResult::Unsat);
    }

    #[test]
    fn conflict_budget_reports_unknown() {
        // PHP(7,6) needs many conflicts
        let mut s = Solver::new();
        let x = lits(&mut s, 42);
        let p = |i: usize, h: usize| x[i * 6 + h];
        for i in 0..7 {
            s.add_clause(&(0..6).map(|h| p(i, h)).collect::<Vec<_>>());
        }
        for h in 0..6 {
            for i in 0..7 {
                for j in i + 1..7 {
                    s.add_clause(&[!p(i, h), !p(j, h)]);
                }
            }
        }
        s.set_conflict_budget(Some(10));
        assert_eq!(s.solve(&[]), SolveResult::Unknown);
        s.set_conflict_budget(None);
        assert_eq!(s.solve(&[]), SolveResult::Unsat);
    }

    #[test]
    fn dimacs_dump() {
        let mut s = Solver::new();
        let x = lits(&mut s, 2);
        s.add_clause(&[x[0], !x[1]]);
        s.add_clause(&[x[1]]);
        let mut out = Vec::new();
        s.write_dimacs(&mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        assert!(text.starts_with("p cnf 2 "));
        assert!(text.contains("2 0"));
    }

    fn clause_strategy(n: usize) -> impl Strategy<Value = Vec<(usize, bool)>> {
        prop::collection::vec((0..n, any::<bool>()), 3)
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(200))]

        #[test]
        fn random_3cnf_matches_enumeration(cnf in prop::collection::vec(clause_strategy(12), 20..70)) {
            let mut s = Solver::new();
            let x = lits(&mut s, 12);
            for c in &cnf {
                s.add_clause(&to_lits(&x, c));
            }
            let r = s.solve(&[]);
            prop_assert_eq!(r == SolveResult::Sat, brute_sat(12, &cnf));
            if r == SolveResult::Sat {
                for c in &cnf {
                    prop_assert!(to_lits(&x, c).iter().any(|&l| s.model_value(l)));
                }
            }
        }

        #[test]
        fn assumption_cores_are_sufficient(
            cnf in prop::collection::vec(clause_strategy(10), 10..40),
            assume in prop::collection::vec((0..10usize, any::<bool>()), 1..6),
        ) {
            let mut s = Solver::new();
            let x = lits(&mut s, 10);
            for c in &cnf {
                s.add_clause(&to_lits(&x, c));
            }
            let a = to_lits(&x, &assume);
            let mut with_units = cnf.clone();
            with_units.extend(assume.iter().map(|&u| vec![u]));
            let expected = brute_sat(10, &with_units);
            match s.solve(&a) {
                SolveResult::Sat => {
                    prop_assert!(expected);
                    prop_assert!(a.iter().all(|&l| s.model_value(l)));
                }
                SolveResult::Unsat => {
                    prop_assert!(!expected);
                    let core = s.core().to_vec();
                    prop_assert!(core.iter().all(|l| a.contains(l)));
                    prop_assert_eq!(s.solve(&core), SolveResult::Unsat);
                }
                SolveResult::Unknown => prop_assert!(false),
            }
        }

        #[test]
        fn incremental_matches_fresh(
            ops in prop::collection::vec((clause_strategy(8), any::<bool>(), any::<bool>()), 1..30),
        ) {
            let mut s = Solver::new();
            let x = lits(&mut s, 8);
            let mut live: Vec<(ClauseHandle, Vec<(usize, bool)>)> = Vec::new();
            let mut permanent: Vec<Vec<(usize, bool)>> = Vec::new();
            for (c, retractable, drop_one) in ops {
                if retractable {
                    let h = s.add_retractable(&to_lits(&x, &c));
                    live.push((h, c));
                } else {
                    s.add_clause(&to_lits(&x, &c));
                    permanent.push(c);
                }
                if drop_one && !live.is_empty() {
                    let (h, _) = live.remove(0);
                    s.retract(h).unwrap();
                }
                let mut all = permanent.clone();
                all.extend(live.iter().map(|(_, c)| c.clone()));
                let expected = brute_sat(8, &all);
                prop_assert_eq!(s.solve(&[]) == SolveResult::Sat, expected);
            }
        }
    }
}
