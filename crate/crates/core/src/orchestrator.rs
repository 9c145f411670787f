//! Verification modes over all properties of a circuit: local proofs under
//! mutual assumptions (JA), an aggregate restart loop (joint), and separate
//! global proofs.

use crate::clause_db::{self, filter_invariant, ClauseDbError, ClauseRecord};
use crate::cube::Clause;
use crate::model::{replay_trace, Circuit, Counterexample, PropertyKind, PropertySpec};
use crate::pdr::{certify, check_property, LiftMode, PdrOptions, PdrOutcome, PdrResult};
use serde::{Deserialize, Serialize};
use std::path::PathBuf;
use std::time::{Duration, Instant};
use thiserror::Error;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Ja,
    Joint,
    SepGlobal,
}

#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub enum PropertyOrder {
    /// File order.
    #[default]
    Given,
    /// An explicit permutation of the expected-to-hold property indices.
    Explicit(Vec<usize>),
    /// Ascending number of latches in the property's cone of influence.
    EasyFirst,
}

#[derive(Clone, Debug)]
pub struct TaskOptions {
    pub reuse_clauses: bool,
    pub lifting: LiftMode,
    pub per_prop_timeout: Option<Duration>,
    pub total_timeout: Option<Duration>,
    pub order: PropertyOrder,
    pub clause_db: Option<PathBuf>,
    /// Certify every proof. Proofs that used re-used clauses are always certified.
    pub certify: bool,
    pub max_frames: Option<usize>,
}

impl Default for TaskOptions {
    fn default() -> Self {
        TaskOptions {
            reuse_clauses: true,
            lifting: LiftMode::Ignore,
            per_prop_timeout: None,
            total_timeout: None,
            order: PropertyOrder::Given,
            clause_db: None,
            certify: true,
            max_frames: None,
        }
    }
}

#[derive(Debug, Error)]
pub enum OrchestratorError {
    #[error("invalid task: {0}")]
    InvalidTask(String),
    #[error(transparent)]
    ClauseDb(#[from] ClauseDbError),
    #[error("internal error on property {index}: {msg}")]
    Internal { index: usize, msg: String },
}

#[derive(Clone, Debug)]
pub struct VerificationTask {
    pub circuit: Circuit,
    pub properties: Vec<PropertySpec>,
    pub mode: Mode,
    pub options: TaskOptions,
}

impl VerificationTask {
    pub fn new(
        circuit: Circuit,
        properties: Vec<PropertySpec>,
        mode: Mode,
        options: TaskOptions,
    ) -> Result<Self, OrchestratorError> {
        let bad = |m: String| Err(OrchestratorError::InvalidTask(m));
        for t in [options.per_prop_timeout, options.total_timeout]
            .into_iter()
            .flatten()
        {
            if t.is_zero() {
                return bad("timeouts must be positive".into());
            }
        }
        for p in &properties {
            if circuit.bads().get(p.index) != Some(&p.bad) {
                return bad(format!("property {} does not match the circuit", p.index));
            }
        }
        if let PropertyOrder::Explicit(order) = &options.order {
            let mut got = order.clone();
            got.sort_unstable();
            let mut eth: Vec<usize> = properties
                .iter()
                .filter(|p| p.kind == PropertyKind::Eth)
                .map(|p| p.index)
                .collect();
            eth.sort_unstable();
            if got != eth {
                return bad("order is not a permutation of the expected-to-hold properties".into());
            }
        }
        Ok(VerificationTask {
            circuit,
            properties,
            mode,
            options,
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum VerdictStatus {
    HoldsLocal,
    FailsLocal,
    HoldsGlobal,
    FailsGlobal,
    EtfConfirmed,
    EtfHoldsLocal,
    Unknown,
}

impl VerdictStatus {
    pub fn holds(self) -> bool {
        matches!(self, VerdictStatus::HoldsLocal | VerdictStatus::HoldsGlobal)
    }

    pub fn fails(self) -> bool {
        matches!(self, VerdictStatus::FailsLocal | VerdictStatus::FailsGlobal)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub index: usize,
    pub kind: PropertyKind,
    pub status: VerdictStatus,
    pub invariant_clauses: Option<usize>,
    /// Invariant clauses not taken from the clause database.
    pub learned_clauses: Option<usize>,
    pub seed_clauses: usize,
    pub counterexample: Option<Counterexample>,
    pub time_s: f64,
    pub frames: usize,
    pub sat_calls: u64,
    pub certified: Option<bool>,
    pub spurious_retry: bool,
    #[serde(default)]
    pub witness_file: Option<String>,
    #[serde(skip)]
    pub invariant: Option<Vec<Clause>>,
}

impl Verdict {
    fn new(p: &PropertySpec, status: VerdictStatus) -> Self {
        Verdict {
            index: p.index,
            kind: p.kind,
            status,
            invariant_clauses: None,
            learned_clauses: None,
            seed_clauses: 0,
            counterexample: None,
            time_s: 0.0,
            frames: 0,
            sat_calls: 0,
            certified: None,
            spurious_retry: false,
            witness_file: None,
            invariant: None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Aggregate {
    /// Every expected-to-hold property holds globally.
    Holds,
    /// Some expected-to-hold property fails.
    Fails,
    Unknown,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TaskEcho {
    pub mode: Mode,
    pub lifting: LiftMode,
    pub reuse_clauses: bool,
    pub certify: bool,
    pub num_properties: usize,
    pub etf: Vec<usize>,
    pub order: Vec<usize>,
    pub per_prop_timeout_s: Option<f64>,
    pub total_timeout_s: Option<f64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Totals {
    pub time_s: f64,
    /// Solver calls made by the proof engine.
    pub sat_calls: u64,
    /// Solver calls spent filtering re-used clauses.
    pub filter_sat_calls: u64,
    pub certify_calls: u64,
    pub holds: usize,
    pub fails: usize,
    pub unknown: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub task: TaskEcho,
    pub verdicts: Vec<Verdict>,
    pub debugging_set: Vec<usize>,
    pub aggregate: Aggregate,
    pub totals: Totals,
}

impl RunReport {
    pub fn verdict(&self, index: usize) -> Option<&Verdict> {
        self.verdicts.iter().find(|v| v.index == index)
    }
}

fn min_deadline(a: Option<Instant>, b: Option<Instant>) -> Option<Instant> {
    match (a, b) {
        (Some(x), Some(y)) => Some(x.min(y)),
        (x, y) => x.or(y),
    }
}

struct Runner<'t> {
    task: &'t VerificationTask,
    start: Instant,
    total_deadline: Option<Instant>,
    db: Vec<ClauseRecord>,
    fingerprint: String,
    totals: Totals,
}

fn sorted(mut v: Vec<usize>) -> Vec<usize> {
    v.sort_unstable();
    v
}

impl<'t> Runner<'t> {
    fn new(task: &'t VerificationTask) -> Result<Self, OrchestratorError> {
        let start = Instant::now();
        let fingerprint = clause_db::fingerprint(&task.circuit);
        let db = match (&task.options.clause_db, task.options.reuse_clauses) {
            (Some(path), true) => clause_db::load(&task.circuit, path)?.records,
            _ => Vec::new(),
        };
        Ok(Runner {
            task,
            start,
            total_deadline: task.options.total_timeout.map(|t| start + t),
            db,
            fingerprint,
            totals: Totals::default(),
        })
    }

    fn eth_order(&self) -> Vec<PropertySpec> {
        let t = self.task;
        let eth: Vec<PropertySpec> = t
            .properties
            .iter()
            .filter(|p| p.kind == PropertyKind::Eth)
            .copied()
            .collect();
        match &t.options.order {
            PropertyOrder::Given => eth,
            PropertyOrder::Explicit(order) => order
                .iter()
                .map(|i| *eth.iter().find(|p| p.index == *i).expect("validated order"))
                .collect(),
            PropertyOrder::EasyFirst => {
                let mut v: Vec<(usize, PropertySpec)> = eth
                    .into_iter()
                    .map(|p| (t.circuit.cone_of_influence(p.bad).len(), p))
                    .collect();
                v.sort_by_key(|(n, _)| *n);
                v.into_iter().map(|(_, p)| p).collect()
            }
        }
    }

    fn deadline(&self) -> Option<Instant> {
        min_deadline(
            self.task
                .options
                .per_prop_timeout
                .map(|t| Instant::now() + t),
            self.total_deadline,
        )
    }

    fn out_of_time(&self) -> bool {
        self.total_deadline.is_some_and(|d| Instant::now() >= d)
    }

    /// Re-usable clauses valid under `constraints` for `target`.
    fn seeds(
        &mut self,
        target: &PropertySpec,
        constraints: &[PropertySpec],
        deadline: Option<Instant>,
    ) -> Vec<Clause> {
        if !self.task.options.reuse_clauses || self.db.is_empty() {
            return Vec::new();
        }
        let mut cands: Vec<Clause> = Vec::new();
        for r in &self.db {
            if !cands.contains(&r.clause) {
                cands.push(r.clause.clone());
            }
        }
        let mut assumed = constraints.to_vec();
        assumed.push(*target);
        let key = sorted(assumed.iter().map(|p| p.index).collect());
        let same_context = self.db.iter().all(|r| {
            let mut k = r.context.clone();
            k.push(r.origin);
            sorted(k) == key
        });
        if same_context {
            return cands;
        }
        let f = filter_invariant(&cands, &self.task.circuit, &assumed, deadline);
        self.totals.filter_sat_calls += f.sat_calls;
        f.survivors
    }

    fn record(&mut self, target: &PropertySpec, constraints: &[PropertySpec], clauses: &[Clause]) {
        let context = sorted(constraints.iter().map(|p| p.index).collect());
        for c in clauses {
            let r = ClauseRecord {
                clause: c.clone(),
                origin: target.index,
                context: context.clone(),
                fingerprint: self.fingerprint.clone(),
            };
            if !self.db.contains(&r) {
                self.db.push(r);
            }
        }
    }

    /// One property under `constraints`, with spurious retry and
    /// certification.
    fn check_one(
        &mut self,
        target: &PropertySpec,
        constraints: &[PropertySpec],
        reuse: bool,
        holds: VerdictStatus,
        fails: VerdictStatus,
    ) -> Result<Verdict, OrchestratorError> {
        let mut v = Verdict::new(target, VerdictStatus::Unknown);
        if self.out_of_time() {
            return Ok(v);
        }
        let started = Instant::now();
        let deadline = self.deadline();
        let seeds = if reuse {
            self.seeds(target, constraints, deadline)
        } else {
            Vec::new()
        };
        v.seed_clauses = seeds.len();
        let mut opts = PdrOptions {
            lifting: self.task.options.lifting,
            deadline,
            max_frames: self.task.options.max_frames,
            ..PdrOptions::default()
        };
        let c = &self.task.circuit;
        let mut out: PdrOutcome = check_property(c, target, constraints, &seeds, &opts);
        v.sat_calls += out.stats.sat_calls;
        if let PdrResult::Fails(cex) = &out.result {
            let r = replay_trace(c, cex, constraints);
            if r.is_spurious() && opts.lifting == LiftMode::Ignore {
                v.spurious_retry = true;
                opts.lifting = LiftMode::Respect;
                out = check_property(c, target, constraints, &seeds, &opts);
                v.sat_calls += out.stats.sat_calls;
            }
        }
        v.frames = out.stats.frames;
        self.totals.sat_calls += v.sat_calls;
        match out.result {
            PdrResult::Fails(cex) => {
                let r = replay_trace(c, &cex, constraints);
                if !r.is_valid() || r.is_spurious() {
                    return Err(OrchestratorError::Internal {
                        index: target.index,
                        msg: format!("counterexample does not replay: {r:?}"),
                    });
                }
                v.status = fails;
                v.counterexample = Some(cex);
            }
            PdrResult::Holds(inv) => {
                if self.task.options.certify || !seeds.is_empty() {
                    let mut assumed = constraints.to_vec();
                    assumed.retain(|p| p.index != target.index);
                    let ok = certify(c, &assumed, &inv.clauses, target);
                    self.totals.certify_calls += 1;
                    if !ok {
                        return Err(OrchestratorError::Internal {
                            index: target.index,
                            msg: "invariant failed certification".into(),
                        });
                    }
                    v.certified = Some(true);
                }
                if reuse {
                    self.record(target, constraints, &inv.clauses);
                }
                v.status = holds;
                v.invariant_clauses = Some(inv.clauses.len());
                v.learned_clauses = Some(inv.learned.len());
                v.invariant = Some(inv.clauses);
            }
            PdrResult::Exhausted => {}
        }
        v.time_s = started.elapsed().as_secs_f64();
        Ok(v)
    }

    fn run_ja(&mut self) -> Result<Vec<Verdict>, OrchestratorError> {
        let order = self.eth_order();
        let reuse = self.task.options.reuse_clauses;
        let mut verdicts = Vec::new();
        for p in &order {
            let constraints: Vec<PropertySpec> = order
                .iter()
                .filter(|q| q.index != p.index)
                .copied()
                .collect();
            verdicts.push(self.check_one(
                p,
                &constraints,
                reuse,
                VerdictStatus::HoldsLocal,
                VerdictStatus::FailsLocal,
            )?);
        }
        if verdicts
            .iter()
            .all(|v| v.status == VerdictStatus::HoldsLocal)
        {
            for v in &mut verdicts {
                v.status = VerdictStatus::HoldsGlobal;
            }
        }
        Ok(verdicts)
    }

    fn run_separate_global(&mut self) -> Result<Vec<Verdict>, OrchestratorError> {
        let order = self.eth_order();
        let reuse = self.task.options.reuse_clauses;
        let mut verdicts = Vec::new();
        for p in &order {
            verdicts.push(self.check_one(
                p,
                &[],
                reuse,
                VerdictStatus::HoldsGlobal,
                VerdictStatus::FailsGlobal,
            )?);
        }
        Ok(verdicts)
    }

    fn run_joint(&mut self) -> Result<Vec<Verdict>, OrchestratorError> {
        let c = &self.task.circuit;
        let mut remaining = self.eth_order();
        let mut verdicts = Vec::new();
        while !remaining.is_empty() {
            if self.out_of_time() {
                break;
            }
            let started = Instant::now();
            let bads: Vec<_> = remaining.iter().map(|p| p.bad).collect();
            let (agg, spec) = c.with_aggregate_bad(&bads);
            let opts = PdrOptions {
                lifting: self.task.options.lifting,
                deadline: self.deadline(),
                max_frames: self.task.options.max_frames,
                ..PdrOptions::default()
            };
            let out = check_property(&agg, &spec, &[], &[], &opts);
            let elapsed = started.elapsed().as_secs_f64();
            self.totals.sat_calls += out.stats.sat_calls;
            let stamp = |v: &mut Verdict| {
                v.time_s = elapsed;
                v.frames = out.stats.frames;
                v.sat_calls = out.stats.sat_calls;
            };
            match &out.result {
                PdrResult::Holds(inv) => {
                    if self.task.options.certify {
                        self.totals.certify_calls += 1;
                        if !certify(&agg, &[], &inv.clauses, &spec) {
                            return Err(OrchestratorError::Internal {
                                index: spec.index,
                                msg: "aggregate invariant failed certification".into(),
                            });
                        }
                    }
                    for p in remaining.drain(..) {
                        let mut v = Verdict::new(&p, VerdictStatus::HoldsGlobal);
                        stamp(&mut v);
                        v.invariant_clauses = Some(inv.clauses.len());
                        v.learned_clauses = Some(inv.learned.len());
                        v.certified = self.task.options.certify.then_some(true);
                        verdicts.push(v);
                    }
                }
                PdrResult::Fails(cex) => {
                    let last = cex.frames.last().expect("non-empty trace");
                    let (hit, rest): (Vec<PropertySpec>, Vec<PropertySpec>) = remaining
                        .iter()
                        .partition(|p| crate::model::property_violated(c, last, p));
                    if hit.is_empty() {
                        return Err(OrchestratorError::Internal {
                            index: spec.index,
                            msg: "aggregate counterexample violates no property".into(),
                        });
                    }
                    for p in hit {
                        let mut v = Verdict::new(&p, VerdictStatus::FailsGlobal);
                        stamp(&mut v);
                        v.counterexample = Some(Counterexample {
                            frames: cex.frames.clone(),
                            violated_property: p.index,
                        });
                        verdicts.push(v);
                    }
                    remaining = rest;
                }
                PdrResult::Exhausted => break,
            }
        }
        for p in remaining {
            verdicts.push(Verdict::new(&p, VerdictStatus::Unknown));
        }
        Ok(verdicts)
    }

    /// Expected-to-fail properties, each under every expected-to-hold one.
    fn handle_etf(&mut self) -> Result<Vec<Verdict>, OrchestratorError> {
        let eth: Vec<PropertySpec> = self
            .task
            .properties
            .iter()
            .filter(|p| p.kind == PropertyKind::Eth)
            .copied()
            .collect();
        let etf: Vec<PropertySpec> = self
            .task
            .properties
            .iter()
            .filter(|p| p.kind == PropertyKind::Etf)
            .copied()
            .collect();
        let mut out = Vec::new();
        for p in &etf {
            out.push(self.check_one(
                p,
                &eth,
                false,
                VerdictStatus::EtfHoldsLocal,
                VerdictStatus::EtfConfirmed,
            )?);
        }
        Ok(out)
    }
}

/// Runs the task in its mode and assembles the report.
pub fn run(task: &VerificationTask) -> Result<RunReport, OrchestratorError> {
    let mut r = Runner::new(task)?;
    let order: Vec<usize> = r.eth_order().iter().map(|p| p.index).collect();
    let mut verdicts = match task.mode {
        Mode::Ja => r.run_ja()?,
        Mode::Joint => r.run_joint()?,
        Mode::SepGlobal => r.run_separate_global()?,
    };
    verdicts.extend(r.handle_etf()?);
    verdicts.sort_by_key(|v| v.index);
    if let (Some(path), true) = (&task.options.clause_db, task.options.reuse_clauses) {
        clause_db::save(&task.circuit, &r.db, path)?;
    }

    let debugging_set: Vec<usize> = verdicts
        .iter()
        .filter(|v| v.status == VerdictStatus::FailsLocal)
        .map(|v| v.index)
        .collect();
    let eth: Vec<&Verdict> = verdicts
        .iter()
        .filter(|v| v.kind == PropertyKind::Eth)
        .collect();
    let aggregate = if eth.iter().any(|v| v.status.fails()) {
        Aggregate::Fails
    } else if eth.iter().all(|v| v.status == VerdictStatus::HoldsGlobal) {
        Aggregate::Holds
    } else {
        Aggregate::Unknown
    };
    let mut totals = r.totals;
    totals.time_s = r.start.elapsed().as_secs_f64();
    totals.holds = verdicts.iter().filter(|v| v.status.holds()).count();
    totals.fails = verdicts.iter().filter(|v| v.status.fails()).count();
    totals.unknown = verdicts
        .iter()
        .filter(|v| v.status == VerdictStatus::Unknown)
        .count();
    let o = &task.options;
    Ok(RunReport {
        task: TaskEcho {
            mode: task.mode,
            lifting: o.lifting,
            reuse_clauses: o.reuse_clauses,
            certify: o.certify,
            num_properties: task.properties.len(),
            etf: task
                .properties
                .iter()
                .filter(|p| p.kind == PropertyKind::Etf)
                .map(|p| p.index)
                .collect(),
            order,
            per_prop_timeout_s: o.per_prop_timeout.map(|d| d.as_secs_f64()),
            total_timeout_s: o.total_timeout.map(|d| d.as_secs_f64()),
        },
        verdicts,
        debugging_set,
        aggregate,
        totals,
    })
}
