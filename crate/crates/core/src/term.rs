//! Process terms shared by the CCP kernel and the timed engine.
//!
//! `Display` renders every term in the concrete syntax accepted by the
//! [`crate::dsl`] parser.

use std::fmt;
use std::sync::Arc;

use crate::store::Relop;

pub type Name = Arc<str>;

/// Integer arithmetic over literals and integer parameters.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Expr {
    Int(i64),
    Param(Name),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Neg(Box<Expr>),
}

impl Expr {
    pub fn param(name: &str) -> Expr {
        Expr::Param(name.into())
    }

    /// Evaluates with `lookup` resolving parameters. Overflow wraps.
    pub fn eval<E>(&self, lookup: &impl Fn(&str) -> Result<i64, E>) -> Result<i64, E> {
        Ok(match self {
            Expr::Int(v) => *v,
            Expr::Param(n) => lookup(n)?,
            Expr::Add(a, b) => a.eval(lookup)?.wrapping_add(b.eval(lookup)?),
            Expr::Sub(a, b) => a.eval(lookup)?.wrapping_sub(b.eval(lookup)?),
            Expr::Mul(a, b) => a.eval(lookup)?.wrapping_mul(b.eval(lookup)?),
            Expr::Neg(a) => a.eval(lookup)?.wrapping_neg(),
        })
    }

    /// Folds constant subtrees.
    pub fn fold(&self) -> Expr {
        let bin =
            |a: &Expr, b: &Expr, f: fn(i64, i64) -> i64, mk: fn(Box<Expr>, Box<Expr>) -> Expr| {
                match (a.fold(), b.fold()) {
                    (Expr::Int(x), Expr::Int(y)) => Expr::Int(f(x, y)),
                    (x, y) => mk(Box::new(x), Box::new(y)),
                }
            };
        match self {
            Expr::Int(_) | Expr::Param(_) => self.clone(),
            Expr::Add(a, b) => bin(a, b, i64::wrapping_add, Expr::Add),
            Expr::Sub(a, b) => bin(a, b, i64::wrapping_sub, Expr::Sub),
            Expr::Mul(a, b) => bin(a, b, i64::wrapping_mul, Expr::Mul),
            Expr::Neg(a) => match a.fold() {
                Expr::Int(x) => Expr::Int(x.wrapping_neg()),
                x => Expr::Neg(Box::new(x)),
            },
        }
    }

    /// Parameter names used, in order of appearance.
    pub fn params(&self, out: &mut Vec<Name>) {
        match self {
            Expr::Int(_) => {}
            Expr::Param(n) => out.push(n.clone()),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) => {
                a.params(out);
                b.params(out);
            }
            Expr::Neg(a) => a.params(out),
        }
    }
}

impl From<i64> for Expr {
    fn from(v: i64) -> Self {
        Expr::Int(v)
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Int(v) => write!(f, "{v}"),
            Expr::Param(n) => f.write_str(n),
            Expr::Add(a, b) => write!(f, "(+ {a} {b})"),
            Expr::Sub(a, b) => write!(f, "(- {a} {b})"),
            Expr::Mul(a, b) => write!(f, "(* {a} {b})"),
            Expr::Neg(a) => write!(f, "(- {a})"),
        }
    }
}

/// Reference to a scalar variable or an array element.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct VarRef {
    pub name: Name,
    pub indices: Vec<Expr>,
}

impl VarRef {
    pub fn scalar(name: &str) -> VarRef {
        VarRef {
            name: name.into(),
            indices: Vec::new(),
        }
    }

    pub fn indexed(name: &str, indices: Vec<Expr>) -> VarRef {
        VarRef {
            name: name.into(),
            indices,
        }
    }
}

impl fmt::Display for VarRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name)?;
        for i in &self.indices {
            write!(f, "[{i}]")?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Term {
    Expr(Expr),
    Var(VarRef),
}

impl Term {
    pub fn var(name: &str) -> Term {
        Term::Var(VarRef::scalar(name))
    }

    pub fn int(v: i64) -> Term {
        Term::Expr(Expr::Int(v))
    }
}

impl From<i64> for Term {
    fn from(v: i64) -> Self {
        Term::int(v)
    }
}

impl From<Expr> for Term {
    fn from(e: Expr) -> Self {
        Term::Expr(e)
    }
}

impl From<VarRef> for Term {
    fn from(v: VarRef) -> Self {
        Term::Var(v)
    }
}

impl From<&str> for Term {
    fn from(n: &str) -> Self {
        Term::var(n)
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Expr(e) => write!(f, "{e}"),
            Term::Var(v) => write!(f, "{v}"),
        }
    }
}

/// Tellable constraints.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Constraint {
    Rel(Term, Relop, Term),
    In(Term, VarRef),
    NotIn(Term, VarRef),
    /// Set variable equals `{lo..hi}`.
    SetRange(VarRef, Expr, Expr),
}

impl Constraint {
    pub fn eq(x: impl Into<Term>, y: impl Into<Term>) -> Constraint {
        Constraint::Rel(x.into(), Relop::Eq, y.into())
    }

    pub fn rel(x: impl Into<Term>, op: Relop, y: impl Into<Term>) -> Constraint {
        Constraint::Rel(x.into(), op, y.into())
    }
}

impl fmt::Display for Constraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Constraint::Rel(x, op, y) => write!(f, "({} {x} {y})", op.symbol()),
            Constraint::In(e, s) => write!(f, "(in {e} {s})"),
            Constraint::NotIn(e, s) => write!(f, "(notin {e} {s})"),
            Constraint::SetRange(s, lo, hi) => write!(f, "(set= {s} {lo} {hi})"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Guard {
    True,
    False,
    Rel(Term, Relop, Term),
    In(Term, VarRef),
    And(Vec<Guard>),
    Or(Vec<Guard>),
    Not(Box<Guard>),
}

impl Guard {
    pub fn eq(x: impl Into<Term>, y: impl Into<Term>) -> Guard {
        Guard::Rel(x.into(), Relop::Eq, y.into())
    }

    pub fn rel(x: impl Into<Term>, op: Relop, y: impl Into<Term>) -> Guard {
        Guard::Rel(x.into(), op, y.into())
    }

    pub fn guard_symbol(op: Relop) -> &'static str {
        match op {
            Relop::Eq => "=",
            Relop::Ne => "!=",
            Relop::Lt => "v<",
            Relop::Le => "v<=",
            Relop::Gt => "v>",
            Relop::Ge => "v>=",
        }
    }
}

fn write_list<T: fmt::Display>(f: &mut fmt::Formatter<'_>, head: &str, items: &[T]) -> fmt::Result {
    write!(f, "({head}")?;
    for i in items {
        write!(f, " {i}")?;
    }
    write!(f, ")")
}

impl fmt::Display for Guard {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Guard::True => f.write_str("true"),
            Guard::False => f.write_str("false"),
            Guard::Rel(x, op, y) => write!(f, "({} {x} {y})", Guard::guard_symbol(*op)),
            Guard::In(e, s) => write!(f, "(in {e} {s})"),
            Guard::And(gs) => write_list(f, "and", gs),
            Guard::Or(gs) => write_list(f, "or", gs),
            Guard::Not(g) => write!(f, "(not {g})"),
        }
    }
}

/// Single-parameter integer function used by cell updates.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Lambda {
    pub param: Name,
    pub body: Expr,
}

impl Lambda {
    pub fn new(param: &str, body: Expr) -> Lambda {
        Lambda {
            param: param.into(),
            body,
        }
    }

    /// Applies the function. Parameters other than the lambda's own are
    /// resolved by `outer`.
    pub fn apply<E>(&self, v: i64, outer: &impl Fn(&str) -> Result<i64, E>) -> Result<i64, E> {
        self.body
            .eval(&|n: &str| if n == &*self.param { Ok(v) } else { outer(n) })
    }
}

impl fmt::Display for Lambda {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(lambda ({}) {})", self.param, self.body)
    }
}

/// Domain of a locally declared variable.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum VarType {
    Int { lo: i64, hi: i64 },
    Bool,
    Set { lo: i64, hi: i64 },
}

/// Default domain for locals declared without a type: `[0, 2^16)`.
pub const LOCAL_DEFAULT: VarType = VarType::Int { lo: 0, hi: 65_535 };

impl fmt::Display for VarType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            VarType::Int { lo, hi } => write!(f, "int {lo} {hi}"),
            VarType::Bool => f.write_str("bool"),
            VarType::Set { lo, hi } => write!(f, "set {lo} {hi}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct LocalDecl {
    pub name: Name,
    pub ty: VarType,
}

impl fmt::Display for LocalDecl {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.ty == LOCAL_DEFAULT {
            f.write_str(&self.name)
        } else {
            write!(f, "({} {})", self.name, self.ty)
        }
    }
}

/// CCP and NTCC agents.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Process {
    Skip,
    Tell(Constraint),
    When(Guard, Arc<Process>),
    Par(Vec<Arc<Process>>),
    Local(Vec<LocalDecl>, Arc<Process>),
    /// Runs the body `k >= 1` units later.
    Next(u32, Arc<Process>),
    /// Runs the body next unit unless the guard is entailed at the end of
    /// this one.
    Unless(Guard, Arc<Process>),
    Bang(Arc<Process>),
    Star(Arc<Process>),
    Sum(Vec<(Guard, Arc<Process>)>),
    /// Parallel composition of the body for every integer in `lo..=hi`.
    ForPar {
        var: Name,
        lo: Expr,
        hi: Expr,
        body: Arc<Process>,
    },
    /// Nondeterministic choice over `lo..=hi`, with a guard per instance.
    ForSum {
        var: Name,
        lo: Expr,
        hi: Expr,
        guard: Guard,
        body: Arc<Process>,
    },
    Call(Name, Vec<Term>),
    CellNew(Name, Expr),
    CellAssign(Name, Lambda),
    CellExch(Name, Name, Lambda),
    PersistentTell(Constraint),
}

impl Process {
    pub fn tell(c: Constraint) -> Arc<Process> {
        Arc::new(Process::Tell(c))
    }

    pub fn when(g: Guard, p: Arc<Process>) -> Arc<Process> {
        Arc::new(Process::When(g, p))
    }

    pub fn par(ps: Vec<Arc<Process>>) -> Arc<Process> {
        Arc::new(Process::Par(ps))
    }

    pub fn next(k: u32, p: Arc<Process>) -> Arc<Process> {
        Arc::new(Process::Next(k, p))
    }

    pub fn unless(g: Guard, p: Arc<Process>) -> Arc<Process> {
        Arc::new(Process::Unless(g, p))
    }

    pub fn bang(p: Arc<Process>) -> Arc<Process> {
        Arc::new(Process::Bang(p))
    }

    pub fn star(p: Arc<Process>) -> Arc<Process> {
        Arc::new(Process::Star(p))
    }

    pub fn sum(branches: Vec<(Guard, Arc<Process>)>) -> Arc<Process> {
        Arc::new(Process::Sum(branches))
    }

    pub fn call(name: &str, args: Vec<Term>) -> Arc<Process> {
        Arc::new(Process::Call(name.into(), args))
    }

    pub fn skip() -> Arc<Process> {
        Arc::new(Process::Skip)
    }

    /// Direct children.
    pub fn children(&self) -> Vec<&Arc<Process>> {
        match self {
            Process::Skip
            | Process::Tell(_)
            | Process::Call(..)
            | Process::CellNew(..)
            | Process::CellAssign(..)
            | Process::CellExch(..)
            | Process::PersistentTell(_) => Vec::new(),
            Process::When(_, p)
            | Process::Local(_, p)
            | Process::Next(_, p)
            | Process::Unless(_, p)
            | Process::Bang(p)
            | Process::Star(p)
            | Process::ForPar { body: p, .. }
            | Process::ForSum { body: p, .. } => vec![p],
            Process::Par(ps) => ps.iter().collect(),
            Process::Sum(bs) => bs.iter().map(|b| &b.1).collect(),
        }
    }
}

impl fmt::Display for Process {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Process::Skip => f.write_str("(skip)"),
            Process::Tell(c) => write!(f, "(tell {c})"),
            Process::When(g, p) => write!(f, "(when {g} {p})"),
            Process::Par(ps) => write_list(f, "par", ps),
            Process::Local(ds, p) => {
                f.write_str("(local (")?;
                for (i, d) in ds.iter().enumerate() {
                    if i > 0 {
                        f.write_str(" ")?;
                    }
                    write!(f, "{d}")?;
                }
                write!(f, ") {p})")
            }
            Process::Next(1, p) => write!(f, "(next {p})"),
            Process::Next(k, p) => write!(f, "(nextn {k} {p})"),
            Process::Unless(g, p) => write!(f, "(unless {g} {p})"),
            Process::Bang(p) => write!(f, "(! {p})"),
            Process::Star(p) => write!(f, "(* {p})"),
            Process::Sum(bs) => {
                f.write_str("(sum")?;
                for (g, p) in bs {
                    write!(f, " ({g} {p})")?;
                }
                f.write_str(")")
            }
            Process::ForPar { var, lo, hi, body } => write!(f, "(for {var} {lo} {hi} {body})"),
            Process::ForSum {
                var,
                lo,
                hi,
                guard,
                body,
            } => write!(f, "(sum-for {var} {lo} {hi} {guard} {body})"),
            Process::Call(n, args) => {
                write!(f, "(call {n}")?;
                for a in args {
                    write!(f, " {a}")?;
                }
                f.write_str(")")
            }
            Process::CellNew(x, e) => write!(f, "(cell {x} {e})"),
            Process::CellAssign(x, g) => write!(f, "(assign {x} {g})"),
            Process::CellExch(x, y, g) => write!(f, "(exch {x} {y} {g})"),
            Process::PersistentTell(c) => write!(f, "(ptell {c})"),
        }
    }
}

/// Procedure parameter: an integer or a variable passed by reference.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Param {
    Int(Name),
    Var(Name),
}

impl Param {
    pub fn name(&self) -> &Name {
        match self {
            Param::Int(n) | Param::Var(n) => n,
        }
    }
}

impl fmt::Display for Param {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Param::Int(n) => f.write_str(n),
            Param::Var(n) => write!(f, "(var {n})"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ProcedureDef {
    pub name: Name,
    pub params: Vec<Param>,
    pub body: Arc<Process>,
}

impl fmt::Display for ProcedureDef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(defproc {} (", self.name)?;
        for (i, p) in self.params.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{p}")?;
        }
        write!(f, ") {})", self.body)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn folding_and_display() {
        let e = Expr::Sub(Box::new(Expr::param("i")), Box::new(Expr::Int(1)));
        assert_eq!(e.to_string(), "(- i 1)");
        let r = VarRef::indexed("S", vec![e.clone()]);
        assert_eq!(r.to_string(), "S[(- i 1)]");
        let k = Expr::Add(Box::new(Expr::Int(2)), Box::new(Expr::Int(3)));
        assert_eq!(k.fold(), Expr::Int(5));
        assert_eq!(e.fold(), e);
        let v = e.eval(&|_: &str| Ok::<i64, ()>(4));
        assert_eq!(v, Ok(3));
    }

    #[test]
    fn process_display() {
        let p = Process::par(vec![
            Process::when(
                Guard::rel("go", Relop::Ge, Term::Expr(Expr::param("i"))),
                Process::next(1, Process::call("Sync", vec![Expr::param("i").into()])),
            ),
            Process::tell(Constraint::eq("x", 5)),
        ]);
        assert_eq!(
            p.to_string(),
            "(par (when (v>= go i) (next (call Sync i))) (tell (= x 5)))"
        );
    }
}
