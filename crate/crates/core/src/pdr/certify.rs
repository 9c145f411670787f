use crate::cube::Clause;
use crate::model::{Circuit, PropertySpec};
use crate::sat::{self, SolveResult, Solver};
use crate::unroll::{FirstFrame, Unroller};

fn clause_lits(u: &mut Unroller<'_>, s: &mut Solver, frame: usize, c: &Clause) -> Vec<sat::Lit> {
    c.lits().iter().map(|&l| u.lit(s, frame, l)).collect()
}

/// Independently checks that `invariant` proves `target` under the
/// constraint properties: no initial frame violates the target, every
/// clause holds initially, and from any frame satisfying the invariant, the
/// target and the constraint properties, every successor frame satisfies the
/// invariant and the target. Circuit constraints hold on both frames.
pub fn certify(
    circuit: &Circuit,
    constraint_props: &[PropertySpec],
    invariant: &[Clause],
    target: &PropertySpec,
) -> bool {
    let init = circuit.init_values();
    if !invariant.iter().all(|c| c.holds_on(circuit, &init)) {
        return false;
    }

    let mut s = Solver::new();
    let mut u = Unroller::new(circuit, &mut s, FirstFrame::Init);
    let mut assumps = vec![u.lit(&mut s, 0, target.bad)];
    for &cc in circuit.constraints() {
        assumps.push(u.lit(&mut s, 0, cc));
    }
    if s.solve(&assumps) != SolveResult::Unsat {
        return false;
    }

    let mut s = Solver::new();
    let mut u = Unroller::new(circuit, &mut s, FirstFrame::Free);
    u.add_frame();
    for c in invariant {
        let lits = clause_lits(&mut u, &mut s, 0, c);
        s.add_clause(&lits);
    }
    let nb = !u.lit(&mut s, 0, target.bad);
    s.add_clause(&[nb]);
    for p in constraint_props {
        let l = !u.lit(&mut s, 0, p.bad);
        s.add_clause(&[l]);
    }
    for &cc in circuit.constraints() {
        for t in 0..2 {
            let l = u.lit(&mut s, t, cc);
            s.add_clause(&[l]);
        }
    }
    let bad_next = u.lit(&mut s, 1, target.bad);
    if s.solve(&[bad_next]) != SolveResult::Unsat {
        return false;
    }
    invariant.iter().all(|c| {
        let negated: Vec<sat::Lit> = clause_lits(&mut u, &mut s, 1, c)
            .into_iter()
            .map(|l| !l)
            .collect();
        s.solve(&negated) == SolveResult::Unsat
    })
}
