//! Syntax tree for spec files. Names are unresolved here; `elaborate`
//! decides whether a name is an integer parameter or a store variable.

use crate::store::Relop;
use crate::term::{LocalDecl, Param, VarType, LOCAL_DEFAULT};

use super::sexp::{Sexp, SexpKind};
use super::{DslError, Span};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
}

impl ArithOp {
    fn symbol(self) -> &'static str {
        match self {
            ArithOp::Add => "+",
            ArithOp::Sub => "-",
            ArithOp::Mul => "*",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ExKind {
    Int(i64),
    /// A name, possibly indexed.
    Ref(String, Vec<Ex>),
    Bin(ArithOp, Box<Ex>, Box<Ex>),
    Neg(Box<Ex>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Ex {
    pub kind: ExKind,
    pub span: Span,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum GuardKind {
    True,
    False,
    Rel(Ex, Relop, Ex),
    In(Ex, Ex),
    And(Vec<AGuard>),
    Or(Vec<AGuard>),
    Not(Box<AGuard>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AGuard {
    pub kind: GuardKind,
    pub span: Span,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TellKind {
    Rel(Ex, Relop, Ex),
    In(Ex, Ex),
    NotIn(Ex, Ex),
    SetRange(Ex, Ex, Ex),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ATell {
    pub kind: TellKind,
    pub span: Span,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ALambda {
    pub param: String,
    pub body: Ex,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ProcKind {
    Skip,
    Tell(ATell),
    When(AGuard, Box<AProc>),
    Par(Vec<AProc>),
    Local(Vec<LocalDecl>, Box<AProc>),
    Next(u32, Box<AProc>),
    Unless(AGuard, Box<AProc>),
    Bang(Box<AProc>),
    Star(Box<AProc>),
    Sum(Vec<(AGuard, AProc)>),
    For {
        var: String,
        lo: Ex,
        hi: Ex,
        body: Box<AProc>,
    },
    SumFor {
        var: String,
        lo: Ex,
        hi: Ex,
        guard: AGuard,
        body: Box<AProc>,
    },
    Call(String, Vec<Ex>),
    Cell(String, Ex),
    Assign(String, ALambda),
    Exch(String, String, ALambda),
    PTell(ATell),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AProc {
    pub kind: ProcKind,
    pub span: Span,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ItemKind {
    DeclareVar {
        name: String,
        ty: VarType,
        dims: Vec<usize>,
    },
    Defproc {
        name: String,
        params: Vec<Param>,
        body: AProc,
    },
    /// `params` are bound to the integers given on the command line.
    Main { params: Vec<String>, body: AProc },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Item {
    pub kind: ItemKind,
    pub span: Span,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SpecAst {
    pub items: Vec<Item>,
}

// ---- reading ----

fn err(span: Span, msg: impl Into<String>) -> DslError {
    DslError::Syntax {
        line: span.line,
        col: span.col,
        msg: msg.into(),
    }
}

const KEYWORDS: &[&str] = &[
    "skip", "tell", "ptell", "when", "unless", "par", "||", "next", "nextnp", "nextn", "!", "*",
    "sum", "+", "local", "for", "sum-for", "call", "cell", "assign", "exch", "lambda", "var",
    "defproc", "main", "true", "false", "and", "or", "not", "in", "notin",
];

fn is_ident(s: &str) -> bool {
    s.starts_with(|c: char| c.is_alphabetic() || c == '_')
        && s.chars().all(|c| c.is_alphanumeric() || c == '_')
        && !KEYWORDS.contains(&s)
}

fn ident(s: &Sexp, what: &str) -> Result<String, DslError> {
    match s.as_atom() {
        Some(a) if is_ident(a) => Ok(a.to_string()),
        _ => Err(err(s.span, format!("expected {what}, found `{s}`"))),
    }
}

fn int_lit(s: &Sexp, what: &str) -> Result<i64, DslError> {
    match s.kind {
        SexpKind::Int(v) => Ok(v),
        _ => Err(err(s.span, format!("expected {what}, found `{s}`"))),
    }
}

/// Splits `(head args…)`.
fn form(s: &Sexp) -> Option<(&str, &[Sexp])> {
    match &s.kind {
        SexpKind::List(items) => {
            let head = items.first()?.as_atom()?;
            Some((head, &items[1..]))
        }
        _ => None,
    }
}

fn arity(s: &Sexp, head: &str, args: &[Sexp], n: usize) -> Result<(), DslError> {
    if args.len() == n {
        Ok(())
    } else {
        Err(err(
            s.span,
            format!("`{head}` takes {n} argument(s), found {}", args.len()),
        ))
    }
}

fn tell_op(s: &str) -> Option<Relop> {
    Some(match s {
        "=" => Relop::Eq,
        "!=" => Relop::Ne,
        "<" => Relop::Lt,
        "<=" => Relop::Le,
        ">" => Relop::Gt,
        ">=" => Relop::Ge,
        _ => return None,
    })
}

fn guard_op(s: &str) -> Option<Relop> {
    Some(match s {
        "v<" => Relop::Lt,
        "v<=" => Relop::Le,
        "v>" => Relop::Gt,
        "v>=" => Relop::Ge,
        _ => return tell_op(s),
    })
}

pub(super) fn read_ex(s: &Sexp) -> Result<Ex, DslError> {
    let kind = match &s.kind {
        SexpKind::Int(v) => ExKind::Int(*v),
        SexpKind::Atom(a) if is_ident(a) => ExKind::Ref(a.clone(), Vec::new()),
        SexpKind::Atom(a) => {
            return Err(err(s.span, format!("expected an expression, found `{a}`")))
        }
        SexpKind::Indexed(n, ix) => {
            if !is_ident(n) {
                return Err(err(s.span, format!("`{n}` cannot be indexed")));
            }
            ExKind::Ref(n.clone(), ix.iter().map(read_ex).collect::<Result<_, _>>()?)
        }
        SexpKind::List(_) => {
            let Some((head, args)) = form(s) else {
                return Err(err(s.span, "expected an expression"));
            };
            let op = match head {
                "+" => ArithOp::Add,
                "-" => ArithOp::Sub,
                "*" => ArithOp::Mul,
                _ => return Err(err(s.span, format!("unknown operator `{head}`"))),
            };
            let args: Vec<Ex> = args.iter().map(read_ex).collect::<Result<_, _>>()?;
            match (op, args.len()) {
                (_, 0) => return Err(err(s.span, format!("`{head}` needs arguments"))),
                (ArithOp::Sub, 1) => ExKind::Neg(Box::new(args.into_iter().next().expect("one"))),
                (_, 1) => return Err(err(s.span, format!("`{head}` needs two arguments"))),
                _ => {
                    let mut it = args.into_iter();
                    let mut acc = it.next().expect("nonempty");
                    for b in it {
                        acc = Ex {
                            kind: ExKind::Bin(op, Box::new(acc), Box::new(b)),
                            span: s.span,
                        };
                    }
                    return Ok(acc);
                }
            }
        }
    };
    Ok(Ex { kind, span: s.span })
}

fn read_guard(s: &Sexp) -> Result<AGuard, DslError> {
    let kind = match s.as_atom() {
        Some("true") => GuardKind::True,
        Some("false") => GuardKind::False,
        _ => {
            let Some((head, args)) = form(s) else {
                return Err(err(s.span, format!("expected a guard, found `{s}`")));
            };
            match head {
                "and" => GuardKind::And(args.iter().map(read_guard).collect::<Result<_, _>>()?),
                "or" => GuardKind::Or(args.iter().map(read_guard).collect::<Result<_, _>>()?),
                "not" => {
                    arity(s, head, args, 1)?;
                    GuardKind::Not(Box::new(read_guard(&args[0])?))
                }
                "in" => {
                    arity(s, head, args, 2)?;
                    GuardKind::In(read_ex(&args[0])?, read_ex(&args[1])?)
                }
                _ => match guard_op(head) {
                    Some(op) => {
                        arity(s, head, args, 2)?;
                        GuardKind::Rel(read_ex(&args[0])?, op, read_ex(&args[1])?)
                    }
                    None => return Err(err(s.span, format!("unknown guard `{head}`"))),
                },
            }
        }
    };
    Ok(AGuard { kind, span: s.span })
}

fn read_tell(s: &Sexp) -> Result<ATell, DslError> {
    let Some((head, args)) = form(s) else {
        return Err(err(s.span, format!("expected a constraint, found `{s}`")));
    };
    let kind = match head {
        "in" | "notin" => {
            arity(s, head, args, 2)?;
            let (e, set) = (read_ex(&args[0])?, read_ex(&args[1])?);
            if head == "in" {
                TellKind::In(e, set)
            } else {
                TellKind::NotIn(e, set)
            }
        }
        "set=" => {
            arity(s, head, args, 3)?;
            TellKind::SetRange(read_ex(&args[0])?, read_ex(&args[1])?, read_ex(&args[2])?)
        }
        _ => match tell_op(head) {
            Some(op) => {
                arity(s, head, args, 2)?;
                TellKind::Rel(read_ex(&args[0])?, op, read_ex(&args[1])?)
            }
            None => return Err(err(s.span, format!("unknown constraint `{head}`"))),
        },
    };
    Ok(ATell { kind, span: s.span })
}

fn read_lambda(s: &Sexp) -> Result<ALambda, DslError> {
    match form(s) {
        Some(("lambda", [ps, body])) => match &ps.kind {
            SexpKind::List(p) if p.len() == 1 => Ok(ALambda {
                param: ident(&p[0], "a lambda parameter")?,
                body: read_ex(body)?,
            }),
            _ => Err(err(ps.span, "a lambda takes exactly one parameter")),
        },
        _ => Err(err(
            s.span,
            format!("expected `(lambda (v) e)`, found `{s}`"),
        )),
    }
}

fn read_type(kind: &Sexp, rest: &[Sexp]) -> Result<(VarType, usize), DslError> {
    match kind.as_atom() {
        Some("bool") => Ok((VarType::Bool, 0)),
        Some(k @ ("int" | "set")) => {
            if rest.len() < 2 {
                return Err(err(kind.span, format!("`{k}` needs bounds")));
            }
            let lo = int_lit(&rest[0], "a lower bound")?;
            let hi = int_lit(&rest[1], "an upper bound")?;
            let ty = if k == "int" {
                VarType::Int { lo, hi }
            } else {
                VarType::Set { lo, hi }
            };
            Ok((ty, 2))
        }
        _ => Err(err(kind.span, format!("unknown variable kind `{kind}`"))),
    }
}

fn read_local(s: &Sexp) -> Result<LocalDecl, DslError> {
    if s.as_atom().is_some() {
        return Ok(LocalDecl {
            name: ident(s, "a variable name")?.into(),
            ty: LOCAL_DEFAULT,
        });
    }
    match &s.kind {
        SexpKind::List(items) if items.len() >= 2 => {
            let name = ident(&items[0], "a variable name")?;
            let (ty, used) = read_type(&items[1], &items[2..])?;
            if items.len() != 2 + used {
                return Err(err(s.span, "unexpected tokens after local type"));
            }
            Ok(LocalDecl {
                name: name.into(),
                ty,
            })
        }
        _ => Err(err(
            s.span,
            format!("expected a local declaration, found `{s}`"),
        )),
    }
}

fn boxed(s: &Sexp) -> Result<Box<AProc>, DslError> {
    read_proc(s).map(Box::new)
}

pub(super) fn read_proc(s: &Sexp) -> Result<AProc, DslError> {
    if s.as_atom() == Some("skip") {
        return Ok(AProc {
            kind: ProcKind::Skip,
            span: s.span,
        });
    }
    let Some((head, args)) = form(s) else {
        return Err(err(s.span, format!("expected a process, found `{s}`")));
    };
    let kind = match head {
        "skip" => {
            arity(s, head, args, 0)?;
            ProcKind::Skip
        }
        "tell" | "ptell" => {
            arity(s, head, args, 1)?;
            let c = read_tell(&args[0])?;
            if head == "tell" {
                ProcKind::Tell(c)
            } else {
                ProcKind::PTell(c)
            }
        }
        "when" | "unless" => {
            arity(s, head, args, 2)?;
            let (g, p) = (read_guard(&args[0])?, boxed(&args[1])?);
            if head == "when" {
                ProcKind::When(g, p)
            } else {
                ProcKind::Unless(g, p)
            }
        }
        "par" | "||" => ProcKind::Par(args.iter().map(read_proc).collect::<Result<_, _>>()?),
        "next" | "nextnp" => {
            arity(s, head, args, 1)?;
            ProcKind::Next(1, boxed(&args[0])?)
        }
        "nextn" => {
            arity(s, head, args, 2)?;
            let k = int_lit(&args[0], "a delay")?;
            let k = u32::try_from(k)
                .ok()
                .filter(|k| *k >= 1)
                .ok_or_else(|| err(args[0].span, "the delay must be at least 1"))?;
            ProcKind::Next(k, boxed(&args[1])?)
        }
        "!" => {
            arity(s, head, args, 1)?;
            ProcKind::Bang(boxed(&args[0])?)
        }
        "*" => {
            arity(s, head, args, 1)?;
            ProcKind::Star(boxed(&args[0])?)
        }
        "sum" => {
            let mut bs = Vec::new();
            for b in args {
                match &b.kind {
                    SexpKind::List(gp) if gp.len() == 2 => {
                        bs.push((read_guard(&gp[0])?, read_proc(&gp[1])?))
                    }
                    _ => return Err(err(b.span, "a sum branch is `(guard process)`")),
                }
            }
            ProcKind::Sum(bs)
        }
        "+" => ProcKind::Sum(
            args.iter()
                .map(|p| {
                    Ok((
                        AGuard {
                            kind: GuardKind::True,
                            span: p.span,
                        },
                        read_proc(p)?,
                    ))
                })
                .collect::<Result<_, DslError>>()?,
        ),
        "local" => {
            arity(s, head, args, 2)?;
            let SexpKind::List(ds) = &args[0].kind else {
                return Err(err(args[0].span, "expected a list of local variables"));
            };
            ProcKind::Local(
                ds.iter().map(read_local).collect::<Result<_, _>>()?,
                boxed(&args[1])?,
            )
        }
        "for" => {
            arity(s, head, args, 4)?;
            ProcKind::For {
                var: ident(&args[0], "a loop variable")?,
                lo: read_ex(&args[1])?,
                hi: read_ex(&args[2])?,
                body: boxed(&args[3])?,
            }
        }
        "sum-for" => {
            arity(s, head, args, 5)?;
            ProcKind::SumFor {
                var: ident(&args[0], "a loop variable")?,
                lo: read_ex(&args[1])?,
                hi: read_ex(&args[2])?,
                guard: read_guard(&args[3])?,
                body: boxed(&args[4])?,
            }
        }
        "call" => {
            if args.is_empty() {
                return Err(err(s.span, "`call` needs a procedure name"));
            }
            ProcKind::Call(
                ident(&args[0], "a procedure name")?,
                args[1..].iter().map(read_ex).collect::<Result<_, _>>()?,
            )
        }
        "cell" => {
            arity(s, head, args, 2)?;
            ProcKind::Cell(ident(&args[0], "a cell name")?, read_ex(&args[1])?)
        }
        "assign" => {
            arity(s, head, args, 2)?;
            ProcKind::Assign(ident(&args[0], "a cell name")?, read_lambda(&args[1])?)
        }
        "exch" => {
            arity(s, head, args, 3)?;
            ProcKind::Exch(
                ident(&args[0], "a cell name")?,
                ident(&args[1], "a cell name")?,
                read_lambda(&args[2])?,
            )
        }
        // `(Name args…)` is shorthand for a call.
        h if is_ident(h) => ProcKind::Call(
            h.to_string(),
            args.iter().map(read_ex).collect::<Result<_, _>>()?,
        ),
        _ => return Err(err(s.span, format!("unknown process form `{head}`"))),
    };
    Ok(AProc { kind, span: s.span })
}

fn read_param(s: &Sexp) -> Result<Param, DslError> {
    if s.as_atom().is_some() {
        return Ok(Param::Int(ident(s, "a parameter name")?.into()));
    }
    match form(s) {
        Some(("var", [n])) => Ok(Param::Var(ident(n, "a parameter name")?.into())),
        _ => Err(err(s.span, format!("expected a parameter, found `{s}`"))),
    }
}

fn read_item(s: &Sexp) -> Result<Item, DslError> {
    let Some((head, args)) = form(s) else {
        return Err(err(
            s.span,
            format!("expected a top-level form, found `{s}`"),
        ));
    };
    let kind = match head {
        "declare-var" => {
            if args.len() < 2 {
                return Err(err(s.span, "`declare-var` needs a name and a kind"));
            }
            let name = ident(&args[0], "a variable name")?;
            let (ty, used) = read_type(&args[1], &args[2..])?;
            let dims = args[2 + used..]
                .iter()
                .map(|d| {
                    let v = int_lit(d, "a dimension")?;
                    usize::try_from(v)
                        .ok()
                        .filter(|v| *v >= 1)
                        .ok_or_else(|| err(d.span, "dimensions must be positive"))
                })
                .collect::<Result<_, _>>()?;
            ItemKind::DeclareVar { name, ty, dims }
        }
        "defproc" => {
            arity(s, head, args, 3)?;
            let SexpKind::List(ps) = &args[1].kind else {
                return Err(err(args[1].span, "expected a parameter list"));
            };
            ItemKind::Defproc {
                name: ident(&args[0], "a procedure name")?,
                params: ps.iter().map(read_param).collect::<Result<_, _>>()?,
                body: read_proc(&args[2])?,
            }
        }
        "main" => match args {
            [body] => ItemKind::Main {
                params: Vec::new(),
                body: read_proc(body)?,
            },
            [ps, body] => {
                let SexpKind::List(ps) = &ps.kind else {
                    return Err(err(ps.span, "expected a parameter list"));
                };
                ItemKind::Main {
                    params: ps
                        .iter()
                        .map(|p| ident(p, "a parameter name"))
                        .collect::<Result<_, _>>()?,
                    body: read_proc(body)?,
                }
            }
            _ => {
                return Err(err(
                    s.span,
                    "`main` takes a process, optionally after a parameter list",
                ))
            }
        },
        _ => return Err(err(s.span, format!("unknown top-level form `{head}`"))),
    };
    Ok(Item { kind, span: s.span })
}

pub(super) fn read_spec(forms: &[Sexp]) -> Result<SpecAst, DslError> {
    let items: Vec<Item> = forms.iter().map(read_item).collect::<Result<_, _>>()?;
    let mains: Vec<&Item> = items
        .iter()
        .filter(|i| matches!(i.kind, ItemKind::Main { .. }))
        .collect();
    if mains.len() > 1 {
        return Err(err(mains[1].span, "more than one `main`"));
    }
    Ok(SpecAst { items })
}

// ---- writing ----

fn atom(s: &str) -> Sexp {
    Sexp::atom(s)
}

fn list(items: Vec<Sexp>) -> Sexp {
    Sexp::list(items)
}

fn head(h: &str, rest: impl IntoIterator<Item = Sexp>) -> Sexp {
    let mut v = vec![atom(h)];
    v.extend(rest);
    list(v)
}

impl Ex {
    pub fn to_sexp(&self) -> Sexp {
        match &self.kind {
            ExKind::Int(v) => Sexp::int(*v),
            ExKind::Ref(n, ix) if ix.is_empty() => atom(n),
            ExKind::Ref(n, ix) => Sexp {
                kind: SexpKind::Indexed(n.clone(), ix.iter().map(Ex::to_sexp).collect()),
                span: Span::default(),
            },
            ExKind::Bin(op, a, b) => head(op.symbol(), [a.to_sexp(), b.to_sexp()]),
            ExKind::Neg(a) => head("-", [a.to_sexp()]),
        }
    }
}

impl AGuard {
    pub fn to_sexp(&self) -> Sexp {
        match &self.kind {
            GuardKind::True => atom("true"),
            GuardKind::False => atom("false"),
            GuardKind::Rel(a, op, b) => head(
                crate::term::Guard::guard_symbol(*op),
                [a.to_sexp(), b.to_sexp()],
            ),
            GuardKind::In(e, s) => head("in", [e.to_sexp(), s.to_sexp()]),
            GuardKind::And(gs) => head("and", gs.iter().map(AGuard::to_sexp)),
            GuardKind::Or(gs) => head("or", gs.iter().map(AGuard::to_sexp)),
            GuardKind::Not(g) => head("not", [g.to_sexp()]),
        }
    }
}

impl ATell {
    pub fn to_sexp(&self) -> Sexp {
        match &self.kind {
            TellKind::Rel(a, op, b) => head(op.symbol(), [a.to_sexp(), b.to_sexp()]),
            TellKind::In(e, s) => head("in", [e.to_sexp(), s.to_sexp()]),
            TellKind::NotIn(e, s) => head("notin", [e.to_sexp(), s.to_sexp()]),
            TellKind::SetRange(s, lo, hi) => {
                head("set=", [s.to_sexp(), lo.to_sexp(), hi.to_sexp()])
            }
        }
    }
}

impl ALambda {
    fn to_sexp(&self) -> Sexp {
        head(
            "lambda",
            [list(vec![atom(&self.param)]), self.body.to_sexp()],
        )
    }
}

fn type_sexps(ty: &VarType) -> Vec<Sexp> {
    match *ty {
        VarType::Int { lo, hi } => vec![atom("int"), Sexp::int(lo), Sexp::int(hi)],
        VarType::Bool => vec![atom("bool")],
        VarType::Set { lo, hi } => vec![atom("set"), Sexp::int(lo), Sexp::int(hi)],
    }
}

impl AProc {
    pub fn to_sexp(&self) -> Sexp {
        match &self.kind {
            ProcKind::Skip => head("skip", []),
            ProcKind::Tell(c) => head("tell", [c.to_sexp()]),
            ProcKind::PTell(c) => head("ptell", [c.to_sexp()]),
            ProcKind::When(g, p) => head("when", [g.to_sexp(), p.to_sexp()]),
            ProcKind::Unless(g, p) => head("unless", [g.to_sexp(), p.to_sexp()]),
            ProcKind::Par(ps) => head("par", ps.iter().map(AProc::to_sexp)),
            ProcKind::Local(ds, p) => {
                let ds = ds
                    .iter()
                    .map(|d| {
                        if d.ty == LOCAL_DEFAULT {
                            atom(&d.name)
                        } else {
                            let mut v = vec![atom(&d.name)];
                            v.extend(type_sexps(&d.ty));
                            list(v)
                        }
                    })
                    .collect();
                head("local", [list(ds), p.to_sexp()])
            }
            ProcKind::Next(1, p) => head("next", [p.to_sexp()]),
            ProcKind::Next(k, p) => head("nextn", [Sexp::int(*k as i64), p.to_sexp()]),
            ProcKind::Bang(p) => head("!", [p.to_sexp()]),
            ProcKind::Star(p) => head("*", [p.to_sexp()]),
            ProcKind::Sum(bs) => head(
                "sum",
                bs.iter().map(|(g, p)| list(vec![g.to_sexp(), p.to_sexp()])),
            ),
            ProcKind::For { var, lo, hi, body } => head(
                "for",
                [atom(var), lo.to_sexp(), hi.to_sexp(), body.to_sexp()],
            ),
            ProcKind::SumFor {
                var,
                lo,
                hi,
                guard,
                body,
            } => head(
                "sum-for",
                [
                    atom(var),
                    lo.to_sexp(),
                    hi.to_sexp(),
                    guard.to_sexp(),
                    body.to_sexp(),
                ],
            ),
            ProcKind::Call(n, args) => head(
                "call",
                std::iter::once(atom(n)).chain(args.iter().map(Ex::to_sexp)),
            ),
            ProcKind::Cell(x, e) => head("cell", [atom(x), e.to_sexp()]),
            ProcKind::Assign(x, g) => head("assign", [atom(x), g.to_sexp()]),
            ProcKind::Exch(x, y, g) => head("exch", [atom(x), atom(y), g.to_sexp()]),
        }
    }
}

impl Item {
    pub fn to_sexp(&self) -> Sexp {
        match &self.kind {
            ItemKind::DeclareVar { name, ty, dims } => {
                let mut v = vec![atom("declare-var"), atom(name)];
                v.extend(type_sexps(ty));
                v.extend(dims.iter().map(|d| Sexp::int(*d as i64)));
                list(v)
            }
            ItemKind::Defproc { name, params, body } => {
                let ps = params
                    .iter()
                    .map(|p| match p {
                        Param::Int(n) => atom(n),
                        Param::Var(n) => head("var", [atom(n)]),
                    })
                    .collect();
                head("defproc", [atom(name), list(ps), body.to_sexp()])
            }
            ItemKind::Main { params, body } if params.is_empty() => head("main", [body.to_sexp()]),
            ItemKind::Main { params, body } => head(
                "main",
                [
                    list(params.iter().map(|p| atom(p)).collect()),
                    body.to_sexp(),
                ],
            ),
        }
    }
}
