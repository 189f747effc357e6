//! Name resolution from syntax trees to [`Program`]s, and back.

use std::collections::{BTreeSet, HashMap};
use std::sync::Arc;

use crate::ntcc::validate::{self, Rule, Severity, Violation};
use crate::program::Program;
use crate::store::{INT_MAX, INT_MIN};
use crate::term::{
    Constraint, Expr, Guard, Lambda, LocalDecl, Name, Param, ProcedureDef, Process, Term, VarRef,
    VarType,
};

use super::ast::*;
use super::{DslError, Span};

/// Type given to cells that are used without a declaration.
pub const CELL_DEFAULT: VarType = VarType::Int {
    lo: INT_MIN as i64,
    hi: INT_MAX as i64,
};

#[derive(Clone, Copy, Debug)]
enum Bind {
    /// Integer parameter, loop index or lambda argument.
    Int,
    Const(i64),
    /// Variable parameter or local.
    Var,
}

struct Elab<'a> {
    program: Program,
    sigs: HashMap<&'a str, &'a [Param]>,
    scope: Vec<(String, Bind)>,
    /// Record errors and keep going instead of stopping at the first.
    lenient: bool,
    diags: Vec<DslError>,
}

impl<'a> Elab<'a> {
    fn report(&mut self, e: DslError) -> Result<(), DslError> {
        if self.lenient {
            self.diags.push(e);
            Ok(())
        } else {
            Err(e)
        }
    }

    fn lookup(&self, n: &str) -> Option<Bind> {
        self.scope
            .iter()
            .rev()
            .find(|(m, _)| m == n)
            .map(|(_, b)| *b)
    }

    fn with<T>(
        &mut self,
        binds: impl IntoIterator<Item = (String, Bind)>,
        f: impl FnOnce(&mut Self) -> Result<T, DslError>,
    ) -> Result<T, DslError> {
        let depth = self.scope.len();
        self.scope.extend(binds);
        let r = f(self);
        self.scope.truncate(depth);
        r
    }

    fn unknown(&mut self, name: &str, span: Span) -> Result<(), DslError> {
        self.report(DslError::UnknownName {
            name: name.to_string(),
            line: span.line,
            col: span.col,
        })
    }

    fn expr(&mut self, e: &Ex) -> Result<Expr, DslError> {
        Ok(match &e.kind {
            ExKind::Int(v) => Expr::Int(*v),
            ExKind::Ref(n, ix) => {
                match (self.lookup(n), ix.is_empty()) {
                    (Some(Bind::Int), true) => {}
                    (Some(Bind::Const(v)), true) => return Ok(Expr::Int(v)),
                    (None, _) if self.program.registry.get(n).is_none() => {
                        self.unknown(n, e.span)?
                    }
                    _ => self.report(DslError::Invalid {
                        line: e.span.line,
                        col: e.span.col,
                        msg: format!(
                            "`{}` is a variable where an integer is expected",
                            e.to_sexp()
                        ),
                    })?,
                }
                Expr::Param(n.as_str().into())
            }
            ExKind::Bin(op, a, b) => {
                let (a, b) = (Box::new(self.expr(a)?), Box::new(self.expr(b)?));
                match op {
                    ArithOp::Add => Expr::Add(a, b),
                    ArithOp::Sub => Expr::Sub(a, b),
                    ArithOp::Mul => Expr::Mul(a, b),
                }
            }
            ExKind::Neg(a) => Expr::Neg(Box::new(self.expr(a)?)),
        })
    }

    fn var_ref(&mut self, e: &Ex) -> Result<VarRef, DslError> {
        let ExKind::Ref(n, ix) = &e.kind else {
            self.report(DslError::Invalid {
                line: e.span.line,
                col: e.span.col,
                msg: format!("expected a variable, found `{}`", e.to_sexp()),
            })?;
            return Ok(VarRef::scalar("_"));
        };
        let indices = ix
            .iter()
            .map(|i| self.expr(i).map(|x| x.fold()))
            .collect::<Result<Vec<_>, _>>()?;
        let dims = match self.lookup(n) {
            Some(Bind::Var) => Some(0),
            Some(_) => {
                self.report(DslError::Invalid {
                    line: e.span.line,
                    col: e.span.col,
                    msg: format!("`{n}` is an integer where a variable is expected"),
                })?;
                None
            }
            None => match self.program.registry.get(n) {
                Some(d) => Some(d.dims.len()),
                None => {
                    self.unknown(n, e.span)?;
                    None
                }
            },
        };
        // Dimension errors are left to `validate` when linting.
        if let Some(d) = dims {
            if d != indices.len() && !self.lenient {
                return Err(DslError::Dimension {
                    line: e.span.line,
                    col: e.span.col,
                    msg: format!(
                        "`{n}` has {d} dimension(s) but is used with {} index(es)",
                        indices.len()
                    ),
                });
            }
        }
        Ok(VarRef {
            name: n.as_str().into(),
            indices,
        })
    }

    fn term(&mut self, e: &Ex) -> Result<Term, DslError> {
        if let ExKind::Ref(n, ix) = &e.kind {
            // Unbound names are taken as variables so that `var_ref`
            // reports them.
            let is_var = match self.lookup(n) {
                Some(Bind::Var) | None => true,
                Some(_) => !ix.is_empty(),
            };
            if is_var {
                return Ok(Term::Var(self.var_ref(e)?));
            }
        }
        Ok(Term::Expr(self.expr(e)?))
    }

    fn guard(&mut self, g: &AGuard) -> Result<Guard, DslError> {
        Ok(match &g.kind {
            GuardKind::True => Guard::True,
            GuardKind::False => Guard::False,
            GuardKind::Rel(a, op, b) => Guard::Rel(self.term(a)?, *op, self.term(b)?),
            GuardKind::In(e, s) => Guard::In(self.term(e)?, self.var_ref(s)?),
            GuardKind::And(gs) => {
                Guard::And(gs.iter().map(|g| self.guard(g)).collect::<Result<_, _>>()?)
            }
            GuardKind::Or(gs) => {
                Guard::Or(gs.iter().map(|g| self.guard(g)).collect::<Result<_, _>>()?)
            }
            GuardKind::Not(g) => Guard::Not(Box::new(self.guard(g)?)),
        })
    }

    fn constraint(&mut self, c: &ATell) -> Result<Constraint, DslError> {
        Ok(match &c.kind {
            TellKind::Rel(a, op, b) => Constraint::Rel(self.term(a)?, *op, self.term(b)?),
            TellKind::In(e, s) => Constraint::In(self.term(e)?, self.var_ref(s)?),
            TellKind::NotIn(e, s) => Constraint::NotIn(self.term(e)?, self.var_ref(s)?),
            TellKind::SetRange(s, lo, hi) => {
                Constraint::SetRange(self.var_ref(s)?, self.expr(lo)?, self.expr(hi)?)
            }
        })
    }

    fn lambda(&mut self, l: &ALambda) -> Result<Lambda, DslError> {
        let body = self.with([(l.param.clone(), Bind::Int)], |s| s.expr(&l.body))?;
        Ok(Lambda {
            param: l.param.as_str().into(),
            body,
        })
    }

    fn cell(&mut self, x: &str, span: Span) -> Result<Name, DslError> {
        match self.program.registry.get(x) {
            Some(d) if d.dims.is_empty() && matches!(d.ty, VarType::Int { .. }) => {}
            Some(_) => self.report(DslError::Invalid {
                line: span.line,
                col: span.col,
                msg: format!("cell `{x}` must be a scalar integer variable"),
            })?,
            None => self.unknown(x, span)?,
        }
        Ok(x.into())
    }

    fn process(&mut self, p: &AProc) -> Result<Arc<Process>, DslError> {
        let q = match &p.kind {
            ProcKind::Skip => Process::Skip,
            ProcKind::Tell(c) => Process::Tell(self.constraint(c)?),
            ProcKind::PTell(c) => Process::PersistentTell(self.constraint(c)?),
            ProcKind::When(g, b) => Process::When(self.guard(g)?, self.process(b)?),
            ProcKind::Unless(g, b) => Process::Unless(self.guard(g)?, self.process(b)?),
            ProcKind::Par(ps) => Process::Par(
                ps.iter()
                    .map(|q| self.process(q))
                    .collect::<Result<_, _>>()?,
            ),
            ProcKind::Local(ds, b) => {
                let binds = ds.iter().map(|d| (d.name.to_string(), Bind::Var));
                let body = self.with(binds, |s| s.process(b))?;
                Process::Local(ds.clone(), body)
            }
            ProcKind::Next(k, b) => Process::Next(*k, self.process(b)?),
            ProcKind::Bang(b) => Process::Bang(self.process(b)?),
            ProcKind::Star(b) => Process::Star(self.process(b)?),
            ProcKind::Sum(bs) => Process::Sum(
                bs.iter()
                    .map(|(g, q)| Ok((self.guard(g)?, self.process(q)?)))
                    .collect::<Result<_, DslError>>()?,
            ),
            ProcKind::For { var, lo, hi, body } => {
                let (lo, hi) = (self.expr(lo)?, self.expr(hi)?);
                let body = self.with([(var.clone(), Bind::Int)], |s| s.process(body))?;
                Process::ForPar {
                    var: var.as_str().into(),
                    lo,
                    hi,
                    body,
                }
            }
            ProcKind::SumFor {
                var,
                lo,
                hi,
                guard,
                body,
            } => {
                let (lo, hi) = (self.expr(lo)?, self.expr(hi)?);
                let (guard, body) = self.with([(var.clone(), Bind::Int)], |s| {
                    Ok((s.guard(guard)?, s.process(body)?))
                })?;
                Process::ForSum {
                    var: var.as_str().into(),
                    lo,
                    hi,
                    guard,
                    body,
                }
            }
            ProcKind::Call(n, args) => {
                let Some(params) = self.sigs.get(n.as_str()).copied() else {
                    self.unknown(n, p.span)?;
                    let args = args
                        .iter()
                        .map(|a| self.term(a))
                        .collect::<Result<_, _>>()?;
                    return Ok(Arc::new(Process::Call(n.as_str().into(), args)));
                };
                if params.len() != args.len() {
                    self.report(DslError::Arity {
                        name: n.clone(),
                        expected: params.len(),
                        found: args.len(),
                        line: p.span.line,
                        col: p.span.col,
                    })?;
                }
                let mut out = Vec::new();
                for (i, a) in args.iter().enumerate() {
                    out.push(match params.get(i) {
                        Some(Param::Var(_)) => Term::Var(self.var_ref(a)?),
                        Some(Param::Int(_)) => Term::Expr(self.expr(a)?),
                        None => self.term(a)?,
                    });
                }
                Process::Call(n.as_str().into(), out)
            }
            ProcKind::Cell(x, e) => Process::CellNew(self.cell(x, p.span)?, self.expr(e)?),
            ProcKind::Assign(x, g) => Process::CellAssign(self.cell(x, p.span)?, self.lambda(g)?),
            ProcKind::Exch(x, y, g) => Process::CellExch(
                self.cell(x, p.span)?,
                self.cell(y, p.span)?,
                self.lambda(g)?,
            ),
        };
        Ok(Arc::new(q))
    }
}

fn cells_of<'a>(p: &'a AProc, out: &mut Vec<(&'a str, Span)>) {
    match &p.kind {
        ProcKind::Cell(x, _) => out.push((x, p.span)),
        ProcKind::When(_, b)
        | ProcKind::Unless(_, b)
        | ProcKind::Local(_, b)
        | ProcKind::Next(_, b)
        | ProcKind::Bang(b)
        | ProcKind::Star(b)
        | ProcKind::For { body: b, .. }
        | ProcKind::SumFor { body: b, .. } => cells_of(b, out),
        ProcKind::Par(ps) => ps.iter().for_each(|q| cells_of(q, out)),
        ProcKind::Sum(bs) => bs.iter().for_each(|(_, q)| cells_of(q, out)),
        _ => {}
    }
}

fn run(
    ast: &SpecAst,
    main_args: Option<&[i64]>,
    lenient: bool,
) -> Result<(Program, Vec<DslError>), DslError> {
    let mut el = Elab {
        program: Program::default(),
        sigs: HashMap::new(),
        scope: Vec::new(),
        lenient,
        diags: Vec::new(),
    };
    let mut bodies = Vec::new();
    for item in &ast.items {
        match &item.kind {
            ItemKind::DeclareVar { name, ty, dims } => {
                if let Err(e) = el.program.registry.declare(name, *ty, dims.clone()) {
                    el.report(DslError::Invalid {
                        line: item.span.line,
                        col: item.span.col,
                        msg: e.to_string(),
                    })?;
                }
            }
            ItemKind::Defproc { name, params, body } => {
                if el.sigs.insert(name, params).is_some() {
                    el.report(DslError::Invalid {
                        line: item.span.line,
                        col: item.span.col,
                        msg: format!("procedure `{name}` defined twice"),
                    })?;
                }
                bodies.push(body);
            }
            ItemKind::Main { body, .. } => bodies.push(body),
        }
    }
    let mut cells = Vec::new();
    for b in bodies {
        cells_of(b, &mut cells);
    }
    for (x, _) in cells {
        if el.program.registry.get(x).is_none() {
            el.program
                .registry
                .declare(x, CELL_DEFAULT, Vec::new())
                .expect("checked above");
        }
    }
    for item in &ast.items {
        match &item.kind {
            ItemKind::DeclareVar { .. } => {}
            ItemKind::Defproc { name, params, body } => {
                let binds = params.iter().map(|p| match p {
                    Param::Int(n) => (n.to_string(), Bind::Int),
                    Param::Var(n) => (n.to_string(), Bind::Var),
                });
                let body = el.with(binds, |s| s.process(body))?;
                el.program.define(ProcedureDef {
                    name: name.as_str().into(),
                    params: params.clone(),
                    body,
                });
            }
            ItemKind::Main { params, body } => {
                let binds: Vec<(String, Bind)> = match main_args {
                    Some(args) => {
                        if args.len() != params.len() {
                            el.report(DslError::Arity {
                                name: "main".into(),
                                expected: params.len(),
                                found: args.len(),
                                line: item.span.line,
                                col: item.span.col,
                            })?;
                        }
                        params
                            .iter()
                            .zip(
                                args.iter()
                                    .copied()
                                    .map(Bind::Const)
                                    .chain(std::iter::repeat(Bind::Int)),
                            )
                            .map(|(p, b)| (p.clone(), b))
                            .collect()
                    }
                    None => params.iter().map(|p| (p.clone(), Bind::Int)).collect(),
                };
                el.program.main = el.with(binds, |s| s.process(body))?;
            }
        }
    }
    if let Some(args) = main_args {
        let has_main = ast
            .items
            .iter()
            .any(|i| matches!(i.kind, ItemKind::Main { .. }));
        if !has_main && !args.is_empty() {
            el.report(DslError::Arity {
                name: "main".into(),
                expected: 0,
                found: args.len(),
                line: 1,
                col: 1,
            })?;
        }
    }
    Ok((el.program, el.diags))
}

/// Resolves every name, binding `main`'s parameters to `main_args`.
pub fn elaborate(ast: &SpecAst, main_args: &[i64]) -> Result<Program, DslError> {
    run(ast, Some(main_args), false).map(|(p, _)| p)
}

/// Advisory findings: elaboration problems, the engine's validation rules
/// and procedures that `main` never reaches.
pub fn lint(ast: &SpecAst) -> Vec<Violation> {
    let (program, diags) = match run(ast, None, true) {
        Ok(r) => r,
        Err(e) => return vec![as_violation(&e)],
    };
    let mut out: Vec<Violation> = diags.iter().map(as_violation).collect();
    out.extend(validate::validate(&program, false));
    let mut seen = BTreeSet::new();
    out.retain(|v| seen.insert(v.to_string()));
    out
}

fn as_violation(e: &DslError) -> Violation {
    let rule = match e {
        DslError::UnknownName { .. } => Rule::UnknownName,
        DslError::Dimension { .. } => Rule::MissingDimension,
        _ => Rule::Malformed,
    };
    Violation {
        rule,
        severity: Severity::Error,
        message: e.to_string(),
    }
}

// ---- back to syntax ----

fn sp() -> Span {
    Span::default()
}

fn ex(kind: ExKind) -> Ex {
    Ex { kind, span: sp() }
}

fn from_expr(e: &Expr) -> Ex {
    ex(match e {
        Expr::Int(v) => ExKind::Int(*v),
        Expr::Param(n) => ExKind::Ref(n.to_string(), Vec::new()),
        Expr::Add(a, b) => {
            ExKind::Bin(ArithOp::Add, Box::new(from_expr(a)), Box::new(from_expr(b)))
        }
        Expr::Sub(a, b) => {
            ExKind::Bin(ArithOp::Sub, Box::new(from_expr(a)), Box::new(from_expr(b)))
        }
        Expr::Mul(a, b) => {
            ExKind::Bin(ArithOp::Mul, Box::new(from_expr(a)), Box::new(from_expr(b)))
        }
        Expr::Neg(a) => ExKind::Neg(Box::new(from_expr(a))),
    })
}

fn from_ref(r: &VarRef) -> Ex {
    ex(ExKind::Ref(
        r.name.to_string(),
        r.indices.iter().map(from_expr).collect(),
    ))
}

fn from_term(t: &Term) -> Ex {
    match t {
        Term::Expr(e) => from_expr(e),
        Term::Var(r) => from_ref(r),
    }
}

fn from_guard(g: &Guard) -> AGuard {
    let kind = match g {
        Guard::True => GuardKind::True,
        Guard::False => GuardKind::False,
        Guard::Rel(a, op, b) => GuardKind::Rel(from_term(a), *op, from_term(b)),
        Guard::In(e, s) => GuardKind::In(from_term(e), from_ref(s)),
        Guard::And(gs) => GuardKind::And(gs.iter().map(from_guard).collect()),
        Guard::Or(gs) => GuardKind::Or(gs.iter().map(from_guard).collect()),
        Guard::Not(g) => GuardKind::Not(Box::new(from_guard(g))),
    };
    AGuard { kind, span: sp() }
}

fn from_constraint(c: &Constraint) -> ATell {
    let kind = match c {
        Constraint::Rel(a, op, b) => TellKind::Rel(from_term(a), *op, from_term(b)),
        Constraint::In(e, s) => TellKind::In(from_term(e), from_ref(s)),
        Constraint::NotIn(e, s) => TellKind::NotIn(from_term(e), from_ref(s)),
        Constraint::SetRange(s, lo, hi) => {
            TellKind::SetRange(from_ref(s), from_expr(lo), from_expr(hi))
        }
    };
    ATell { kind, span: sp() }
}

fn from_lambda(l: &Lambda) -> ALambda {
    ALambda {
        param: l.param.to_string(),
        body: from_expr(&l.body),
    }
}

pub fn from_process(p: &Process) -> AProc {
    let b = |q: &Arc<Process>| Box::new(from_process(q));
    let kind = match p {
        Process::Skip => ProcKind::Skip,
        Process::Tell(c) => ProcKind::Tell(from_constraint(c)),
        Process::PersistentTell(c) => ProcKind::PTell(from_constraint(c)),
        Process::When(g, q) => ProcKind::When(from_guard(g), b(q)),
        Process::Unless(g, q) => ProcKind::Unless(from_guard(g), b(q)),
        Process::Par(ps) => ProcKind::Par(ps.iter().map(|q| from_process(q)).collect()),
        Process::Local(ds, q) => ProcKind::Local(ds.iter().map(LocalDecl::clone).collect(), b(q)),
        Process::Next(k, q) => ProcKind::Next(*k, b(q)),
        Process::Bang(q) => ProcKind::Bang(b(q)),
        Process::Star(q) => ProcKind::Star(b(q)),
        Process::Sum(bs) => ProcKind::Sum(
            bs.iter()
                .map(|(g, q)| (from_guard(g), from_process(q)))
                .collect(),
        ),
        Process::ForPar { var, lo, hi, body } => ProcKind::For {
            var: var.to_string(),
            lo: from_expr(lo),
            hi: from_expr(hi),
            body: b(body),
        },
        Process::ForSum {
            var,
            lo,
            hi,
            guard,
            body,
        } => ProcKind::SumFor {
            var: var.to_string(),
            lo: from_expr(lo),
            hi: from_expr(hi),
            guard: from_guard(guard),
            body: b(body),
        },
        Process::Call(n, args) => {
            ProcKind::Call(n.to_string(), args.iter().map(from_term).collect())
        }
        Process::CellNew(x, e) => ProcKind::Cell(x.to_string(), from_expr(e)),
        Process::CellAssign(x, g) => ProcKind::Assign(x.to_string(), from_lambda(g)),
        Process::CellExch(x, y, g) => ProcKind::Exch(x.to_string(), y.to_string(), from_lambda(g)),
    };
    AProc { kind, span: sp() }
}

/// Syntax tree for a program: declarations in order, procedures by name,
/// then `main`.
pub fn from_program(p: &Program) -> SpecAst {
    let item = |kind| Item { kind, span: sp() };
    let mut items: Vec<Item> = p
        .registry
        .decls()
        .iter()
        .map(|d| {
            item(ItemKind::DeclareVar {
                name: d.name.to_string(),
                ty: d.ty,
                dims: d.dims.clone(),
            })
        })
        .collect();
    let mut names: Vec<&Name> = p.procedures.keys().collect();
    names.sort();
    for n in names {
        let def = &p.procedures[n];
        items.push(item(ItemKind::Defproc {
            name: n.to_string(),
            params: def.params.clone(),
            body: from_process(&def.body),
        }));
    }
    items.push(item(ItemKind::Main {
        params: Vec::new(),
        body: from_process(&p.main),
    }));
    SpecAst { items }
}
