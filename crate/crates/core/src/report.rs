//! Report serialization and the exit-code contract.

use crate::model::PropertyKind;
use crate::orchestrator::{RunReport, VerdictStatus};
use std::fmt::Write as _;
use std::str::FromStr;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_PARSE: i32 = 3;
pub const EXIT_FAILURES: i32 = 10;
pub const EXIT_UNKNOWN: i32 = 20;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ReportFormat {
    Text,
    Json,
    Csv,
}

impl FromStr for ReportFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "text" => Ok(ReportFormat::Text),
            "json" => Ok(ReportFormat::Json),
            "csv" => Ok(ReportFormat::Csv),
            _ => Err(format!("unknown report format {s:?}")),
        }
    }
}

/// 10 when an expected-to-hold property fails or an expected-to-fail one
/// holds, otherwise 20 when any verdict is unknown, otherwise 0.
pub fn exit_code<'a>(statuses: impl IntoIterator<Item = &'a VerdictStatus>) -> i32 {
    let mut unknown = false;
    for s in statuses {
        match s {
            VerdictStatus::FailsLocal
            | VerdictStatus::FailsGlobal
            | VerdictStatus::EtfHoldsLocal => return EXIT_FAILURES,
            VerdictStatus::Unknown => unknown = true,
            _ => {}
        }
    }
    if unknown {
        EXIT_UNKNOWN
    } else {
        EXIT_OK
    }
}

pub fn report_exit_code(report: &RunReport) -> i32 {
    exit_code(report.verdicts.iter().map(|v| &v.status))
}

fn kind_str(k: PropertyKind) -> &'static str {
    match k {
        PropertyKind::Eth => "eth",
        PropertyKind::Etf => "etf",
    }
}

pub fn to_json(report: &RunReport) -> String {
    serde_json::to_string_pretty(report).expect("reports serialize")
}

pub fn from_json(s: &str) -> serde_json::Result<RunReport> {
    serde_json::from_str(s)
}

pub fn to_csv(report: &RunReport) -> String {
    let mut out = String::from("index,kind,status,time_s,frames,sat_calls,witness_file\n");
    for v in &report.verdicts {
        writeln!(
            out,
            "{},{},{:?},{:.6},{},{},{}",
            v.index,
            kind_str(v.kind),
            v.status,
            v.time_s,
            v.frames,
            v.sat_calls,
            v.witness_file.as_deref().unwrap_or("")
        )
        .unwrap();
    }
    out
}

pub fn to_text(report: &RunReport) -> String {
    let mut out = String::new();
    writeln!(
        out,
        "{:>6}  {:<4} {:<14} {:>9} {:>7} {:>9}  evidence",
        "prop", "kind", "status", "time[s]", "frames", "sat"
    )
    .unwrap();
    for v in &report.verdicts {
        let evidence = match (&v.counterexample, v.invariant_clauses) {
            (Some(c), _) => format!("cex of {} frames", c.frames.len()),
            (None, Some(n)) => format!(
                "invariant of {n} clauses{}",
                if v.seed_clauses > 0 {
                    format!(", {} re-used", v.seed_clauses)
                } else {
                    String::new()
                }
            ),
            _ => "-".into(),
        };
        let flag = if v.status == VerdictStatus::EtfHoldsLocal {
            "  (unexpected)"
        } else {
            ""
        };
        writeln!(
            out,
            "{:>6}  {:<4} {:<14} {:>9.3} {:>7} {:>9}  {evidence}{flag}",
            v.index,
            kind_str(v.kind),
            format!("{:?}", v.status),
            v.time_s,
            v.frames,
            v.sat_calls
        )
        .unwrap();
    }
    let ds: Vec<String> = report.debugging_set.iter().map(usize::to_string).collect();
    writeln!(out, "debugging set: {{{}}}", ds.join(", ")).unwrap();
    writeln!(out, "aggregate: {:?}", report.aggregate).unwrap();
    let t = &report.totals;
    writeln!(
        out,
        "total: {:.3} s, {} sat calls ({} filtering, {} certificates), {} hold, {} fail, {} unknown",
        t.time_s, t.sat_calls, t.filter_sat_calls, t.certify_calls, t.holds, t.fails, t.unknown
    )
    .unwrap();
    out
}

/// Rendered report and the process exit code.
pub fn format_report(report: &RunReport, format: ReportFormat) -> (String, i32) {
    let body = match format {
        ReportFormat::Text => to_text(report),
        ReportFormat::Json => to_json(report) + "\n",
        ReportFormat::Csv => to_csv(report),
    };
    (body, report_exit_code(report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::aiger::gen_counter;
    use crate::orchestrator::{run, Mode, TaskOptions, VerificationTask};
    use proptest::prelude::*;

    fn counter_report() -> RunReport {
        let (c, props) = gen_counter(4).unwrap();
        run(&VerificationTask::new(c, props, Mode::Ja, TaskOptions::default()).unwrap()).unwrap()
    }

    #[test]
    fn formats() {
        let r = counter_report();
        let (text, code) = format_report(&r, ReportFormat::Text);
        assert_eq!(code, EXIT_FAILURES);
        assert!(text.contains("debugging set: {0}"));
        assert!(text.contains("FailsLocal"));
        let (csv, _) = format_report(&r, ReportFormat::Csv);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(
            lines[0],
            "index,kind,status,time_s,frames,sat_calls,witness_file"
        );
        assert!(lines[1].starts_with("0,eth,FailsLocal,"));
        assert!(lines[2].starts_with("1,eth,HoldsLocal,"));
        let (json, _) = format_report(&r, ReportFormat::Json);
        let back = from_json(&json).unwrap();
        assert_eq!(to_json(&back), to_json(&r));
        assert_eq!(back.debugging_set, vec![0]);
    }

    fn status() -> impl Strategy<Value = VerdictStatus> {
        prop_oneof![
            Just(VerdictStatus::HoldsLocal),
            Just(VerdictStatus::FailsLocal),
            Just(VerdictStatus::HoldsGlobal),
            Just(VerdictStatus::FailsGlobal),
            Just(VerdictStatus::EtfConfirmed),
            Just(VerdictStatus::EtfHoldsLocal),
            Just(VerdictStatus::Unknown),
        ]
    }

    proptest! {
        #[test]
        fn exit_code_depends_on_multiset_only(mut v in prop::collection::vec(status(), 0..8), seed in any::<u64>()) {
            let a = exit_code(&v);
            let n = v.len();
            if n > 1 {
                v.rotate_left((seed as usize) % n);
            }
            prop_assert_eq!(a, exit_code(&v));
            let any_fail = v.iter().any(|s| s.fails() || *s == VerdictStatus::EtfHoldsLocal);
            let any_unknown = v.contains(&VerdictStatus::Unknown);
            prop_assert_eq!(a, if any_fail { 10 } else if any_unknown { 20 } else { 0 });
        }
    }
}
