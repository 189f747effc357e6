//! Static checks for patterns the engine cannot execute faithfully.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::program::Program;
use crate::store::Relop;
use crate::term::{Constraint, Guard, Name, Process, Term, VarRef};
use crate::vars::VariableRegistry;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Rule {
    /// `!` over a choice between different values for one variable.
    InconsistentReplicatedChoice,
    /// Persistent membership or inequality against another variable.
    PersistentStructured,
    /// Indexed access to a variable declared without that many dimensions.
    MissingDimension,
    /// A cycle of calls with no `next`/`unless` delay on it.
    UnguardedRecursion,
    /// A procedure that `main` never reaches.
    UnusedProcedure,
    UnknownName,
    /// Any other elaboration problem.
    Malformed,
}

impl Rule {
    pub fn code(self) -> &'static str {
        match self {
            Rule::InconsistentReplicatedChoice => "inconsistent-replicated-choice",
            Rule::PersistentStructured => "persistent-structured-rhs",
            Rule::MissingDimension => "missing-dimension",
            Rule::UnguardedRecursion => "unguarded-recursion",
            Rule::UnusedProcedure => "unused-procedure",
            Rule::UnknownName => "unknown-name",
            Rule::Malformed => "malformed",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Severity {
    Warning,
    Error,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    pub rule: Rule,
    pub severity: Severity,
    pub message: String,
}

impl Violation {
    fn new(rule: Rule, severity: Severity, message: String) -> Violation {
        Violation {
            rule,
            severity,
            message,
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sev = match self.severity {
            Severity::Warning => "warning",
            Severity::Error => "error",
        };
        write!(f, "{sev}[{}]: {}", self.rule.code(), self.message)
    }
}

/// Checks one process tree. Dimension checks need `reg`.
pub fn validate_process(p: &Process, reg: Option<&VariableRegistry>) -> Vec<Violation> {
    let mut out = Vec::new();
    walk(p, reg, &mut out);
    out
}

/// Checks the main process, every procedure body and the call graph.
pub fn validate(program: &Program, general_recursion: bool) -> Vec<Violation> {
    let reg = Some(&program.registry);
    let mut out = validate_process(&program.main, reg);
    let mut names: Vec<&Name> = program.procedures.keys().collect();
    names.sort();
    for n in &names {
        out.extend(validate_process(&program.procedures[*n].body, reg));
    }
    let graph: BTreeMap<Name, BTreeSet<Name>> = names
        .iter()
        .map(|n| {
            let mut calls = BTreeSet::new();
            immediate_calls(&program.procedures[*n].body, &mut calls);
            ((*n).clone(), calls)
        })
        .collect();
    let severity = if general_recursion {
        Severity::Warning
    } else {
        Severity::Error
    };
    for cycle in cycles(&graph) {
        out.push(Violation::new(
            Rule::UnguardedRecursion,
            severity,
            format!(
                "recursive call cycle {} is not delayed by next or unless",
                cycle.join(" -> ")
            ),
        ));
    }
    let mut reached = BTreeSet::new();
    let mut todo = Vec::new();
    all_calls(&program.main, &mut todo);
    while let Some(n) = todo.pop() {
        if reached.insert(n.clone()) {
            if let Some(d) = program.procedures.get(&n) {
                all_calls(&d.body, &mut todo);
            }
        }
    }
    for n in names {
        if !reached.contains(n) {
            out.push(Violation::new(
                Rule::UnusedProcedure,
                Severity::Warning,
                format!("procedure `{n}` is never called from main"),
            ));
        }
    }
    out
}

fn all_calls(p: &Process, out: &mut Vec<Name>) {
    if let Process::Call(n, _) = p {
        out.push(n.clone());
    }
    for c in p.children() {
        all_calls(c, out);
    }
}

fn strip_bangs(mut p: &Process) -> &Process {
    while let Process::Bang(q) = p {
        p = q;
    }
    p
}

/// Variable and value of a `(tell (= x c))`.
fn eq_tell(p: &Process) -> Option<(&VarRef, i64)> {
    match p {
        Process::Tell(Constraint::Rel(Term::Var(x), Relop::Eq, Term::Expr(e))) => match e.fold() {
            crate::term::Expr::Int(v) => Some((x, v)),
            _ => None,
        },
        _ => None,
    }
}

fn check_replicated_choice(body: &Process, out: &mut Vec<Violation>) {
    let Process::Sum(branches) = strip_bangs(body) else {
        return;
    };
    let tells: Vec<_> = branches.iter().map(|(_, p)| eq_tell(p)).collect();
    if tells.len() < 2 || tells.iter().any(Option::is_none) {
        return;
    }
    let first = tells[0].expect("checked").0;
    let values: BTreeSet<i64> = tells.iter().map(|t| t.expect("checked").1).collect();
    if tells.iter().all(|t| t.expect("checked").0 == first) && values.len() > 1 {
        out.push(Violation::new(
            Rule::InconsistentReplicatedChoice,
            Severity::Warning,
            format!(
                "replicated choice between different values of {first} makes later units inconsistent"
            ),
        ));
    }
}

fn check_ref(r: &VarRef, reg: Option<&VariableRegistry>, out: &mut Vec<Violation>) {
    if r.indices.is_empty() {
        return;
    }
    let Some(reg) = reg else { return };
    match reg.get(&r.name) {
        Some(d) if d.dims.len() == r.indices.len() => {}
        Some(d) => out.push(Violation::new(
            Rule::MissingDimension,
            Severity::Error,
            format!(
                "{r} uses {} index(es) but `{}` is declared with {} dimension(s)",
                r.indices.len(),
                r.name,
                d.dims.len()
            ),
        )),
        None => out.push(Violation::new(
            Rule::MissingDimension,
            Severity::Error,
            format!("array `{}` has no declared dimension", r.name),
        )),
    }
}

fn term_refs<'a>(t: &'a Term, out: &mut Vec<&'a VarRef>) {
    if let Term::Var(r) = t {
        out.push(r);
    }
}

fn constraint_refs<'a>(c: &'a Constraint, out: &mut Vec<&'a VarRef>) {
    match c {
        Constraint::Rel(x, _, y) => {
            term_refs(x, out);
            term_refs(y, out);
        }
        Constraint::In(e, s) | Constraint::NotIn(e, s) => {
            term_refs(e, out);
            out.push(s);
        }
        Constraint::SetRange(s, _, _) => out.push(s),
    }
}

fn guard_refs<'a>(g: &'a Guard, out: &mut Vec<&'a VarRef>) {
    match g {
        Guard::True | Guard::False => {}
        Guard::Rel(x, _, y) => {
            term_refs(x, out);
            term_refs(y, out);
        }
        Guard::In(e, s) => {
            term_refs(e, out);
            out.push(s);
        }
        Guard::And(gs) | Guard::Or(gs) => gs.iter().for_each(|g| guard_refs(g, out)),
        Guard::Not(g) => guard_refs(g, out),
    }
}

fn walk(p: &Process, reg: Option<&VariableRegistry>, out: &mut Vec<Violation>) {
    let mut refs = Vec::new();
    match p {
        // Nested bangs are reported once, at the innermost one.
        Process::Bang(body) if !matches!(**body, Process::Bang(_)) => {
            check_replicated_choice(body, out)
        }
        Process::Tell(c) => constraint_refs(c, &mut refs),
        Process::PersistentTell(c) => {
            constraint_refs(c, &mut refs);
            let structured = match c {
                Constraint::In(Term::Var(_), _) | Constraint::NotIn(Term::Var(_), _) => true,
                Constraint::Rel(Term::Var(_), op, Term::Var(_)) => *op != Relop::Eq,
                _ => false,
            };
            if structured {
                out.push(Violation::new(
                    Rule::PersistentStructured,
                    Severity::Warning,
                    format!("persistent {c} depends on a variable; only its end-of-unit bounds carry over"),
                ));
            }
        }
        Process::When(g, _) | Process::Unless(g, _) => guard_refs(g, &mut refs),
        Process::Sum(bs) => bs.iter().for_each(|(g, _)| guard_refs(g, &mut refs)),
        Process::ForSum { guard, .. } => guard_refs(guard, &mut refs),
        Process::Call(_, args) => args.iter().for_each(|a| term_refs(a, &mut refs)),
        _ => {}
    }
    for r in refs {
        check_ref(r, reg, out);
    }
    for c in p.children() {
        walk(c, reg, out);
    }
}

/// Calls that run in the same unit as the process itself.
fn immediate_calls(p: &Process, out: &mut BTreeSet<Name>) {
    match p {
        Process::Call(n, _) => {
            out.insert(n.clone());
        }
        Process::Next(..) | Process::Unless(..) => {}
        _ => {
            for c in p.children() {
                immediate_calls(c, out);
            }
        }
    }
}

/// Strongly connected components that contain a cycle, each listed from its
/// smallest name.
fn cycles(graph: &BTreeMap<Name, BTreeSet<Name>>) -> Vec<Vec<String>> {
    // Tarjan's algorithm, recursion depth bounded by the number of procedures.
    struct St<'a> {
        graph: &'a BTreeMap<Name, BTreeSet<Name>>,
        index: BTreeMap<&'a Name, usize>,
        low: BTreeMap<&'a Name, usize>,
        stack: Vec<&'a Name>,
        on: BTreeSet<&'a Name>,
        out: Vec<Vec<String>>,
    }
    fn visit<'a>(st: &mut St<'a>, v: &'a Name) {
        let i = st.index.len();
        st.index.insert(v, i);
        st.low.insert(v, i);
        st.stack.push(v);
        st.on.insert(v);
        for w in &st.graph[v] {
            let Some((w, _)) = st.graph.get_key_value(w) else {
                continue;
            };
            if !st.index.contains_key(w) {
                visit(st, w);
                let lw = st.low[w];
                let lv = st.low.get_mut(v).expect("visited");
                *lv = (*lv).min(lw);
            } else if st.on.contains(w) {
                let iw = st.index[w];
                let lv = st.low.get_mut(v).expect("visited");
                *lv = (*lv).min(iw);
            }
        }
        if st.low[v] == st.index[v] {
            let mut comp = Vec::new();
            loop {
                let w = st.stack.pop().expect("on stack");
                st.on.remove(w);
                comp.push(w.to_string());
                if w == v {
                    break;
                }
            }
            if comp.len() > 1 || st.graph[v].contains(v) {
                comp.sort();
                st.out.push(comp);
            }
        }
    }
    let mut st = St {
        graph,
        index: BTreeMap::new(),
        low: BTreeMap::new(),
        stack: Vec::new(),
        on: BTreeSet::new(),
        out: Vec::new(),
    };
    for v in graph.keys() {
        if !st.index.contains_key(v) {
            visit(&mut st, v);
        }
    }
    st.out.sort();
    st.out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::term::{Expr, Param, ProcedureDef};

    fn choice(a: i64, b: i64) -> std::sync::Arc<Process> {
        Process::sum(vec![
            (Guard::True, Process::tell(Constraint::eq("A", a))),
            (Guard::True, Process::tell(Constraint::eq("A", b))),
        ])
    }

    #[test]
    fn replicated_choice() {
        let p = Process::bang(Process::bang(choice(1, 2)));
        let v = validate_process(&p, None);
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].rule, Rule::InconsistentReplicatedChoice);
        assert!(validate_process(&Process::bang(choice(1, 1)), None).is_empty());
        assert!(validate_process(&choice(1, 2), None).is_empty());
        assert!(validate_process(&Process::Skip, None).is_empty());
    }

    #[test]
    fn recursion_must_be_delayed() {
        let i = || Term::Expr(Expr::param("i"));
        let mut prog = Program::new(Process::par(vec![
            Process::call("Sync", vec![Term::int(1)]),
            Process::call("Loop", vec![Term::int(1)]),
        ]));
        prog.define(ProcedureDef {
            name: "Sync".into(),
            params: vec![Param::Int("i".into())],
            body: Process::next(1, Process::call("Sync", vec![i()])),
        });
        assert!(validate(&prog, false).is_empty());
        prog.define(ProcedureDef {
            name: "Loop".into(),
            params: vec![Param::Int("i".into())],
            body: Process::when(Guard::True, Process::call("Loop", vec![i()])),
        });
        let v = validate(&prog, false);
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].rule, Rule::UnguardedRecursion);
        assert_eq!(v[0].severity, Severity::Error);
        assert_eq!(validate(&prog, true)[0].severity, Severity::Warning);
    }
}
