//! Process execution against a single space.
//!
//! [`Exec`] walks process terms with an explicit work stack. Tells go to the
//! store, `when` becomes a reified guard plus an ask propagator whose
//! continuation is stored here and run from inside propagation when it
//! fires. Temporal agents need a [`Timeline`]; without one they are
//! rejected, which gives plain CCP.

use std::collections::HashMap;
use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::Serialize;
use thiserror::Error;

use crate::ntcc::Timeline;
use crate::store::{
    Condition, ContId, IntDomain, Operand, Relop, Space, Status, StoreError, Tell, VarId, VarView,
};
use crate::term::{
    Constraint, Expr, Guard, Name, Param, ProcedureDef, Process, Term, VarRef, VarType,
};
use crate::vars::{new_var, Binding, Env, RegistryError, VarKey, VariableRegistry};

pub type Procedures = HashMap<Name, ProcedureDef>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ExecError {
    #[error("unbound name `{0}`")]
    UnknownName(Name),
    #[error("`{0}` is a variable where an integer is expected")]
    NotInteger(Name),
    #[error("`{0}` is an integer where a variable is expected")]
    NotVariable(Name),
    #[error(transparent)]
    Registry(#[from] RegistryError),
    #[error(transparent)]
    Store(#[from] StoreError),
    #[error("unknown procedure `{0}`")]
    UnknownProcedure(Name),
    #[error("`{name}` takes {expected} argument(s), got {found}")]
    Arity {
        name: Name,
        expected: usize,
        found: usize,
    },
    #[error("unknown cell `{0}`")]
    UnknownCell(Name),
    #[error("cell `{0}` assigned twice in one time unit")]
    DoubleAssign(Name),
    #[error("`{0}` needs the timed engine")]
    Untimed(&'static str),
    #[error("process budget of {0} per time unit exceeded")]
    BudgetExceeded(u64),
}

/// Value of one variable in a snapshot. Unassigned integers are `null`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(untagged)]
pub enum VarValue {
    Int(i32),
    Set { glb: Vec<i32>, lub: Vec<i32> },
    Unset,
}

impl VarValue {
    pub fn from_view(v: &VarView) -> VarValue {
        match v {
            VarView::Int(d) => d.value().map_or(VarValue::Unset, VarValue::Int),
            VarView::Set { glb, lub } => VarValue::Set {
                glb: glb.iter().copied().collect(),
                lub: lub.iter().copied().collect(),
            },
        }
    }

    pub fn as_int(&self) -> Option<i32> {
        match self {
            VarValue::Int(v) => Some(*v),
            _ => None,
        }
    }
}

/// Read-only result of a CCP run.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StoreSnapshot {
    pub vars: Vec<(String, VarValue)>,
    pub failed: bool,
    /// Guards of asks still waiting at quiescence.
    pub blocked: Vec<String>,
    pub fired: u64,
}

impl StoreSnapshot {
    pub fn get(&self, name: &str) -> Option<&VarValue> {
        self.vars.iter().find(|(n, _)| n == name).map(|(_, v)| v)
    }
}

struct Cont {
    guard: Guard,
    body: Arc<Process>,
    env: Env,
}

/// A persistent tell with its right-hand side fixed at the end of a unit.
#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) enum GroundTell {
    Domain(VarKey, IntDomain),
    Rel(VarKey, Relop, i64),
    Member(i64, VarKey, bool),
    SetRange(VarKey, i32, i32),
    Const(bool),
}

pub struct Exec<'a> {
    reg: &'a VariableRegistry,
    procs: &'a Procedures,
    locals: &'a mut Vec<VarType>,
    time: Option<&'a mut Timeline>,
    globals: Vec<VarId>,
    local_vars: HashMap<u32, VarId>,
    conts: Vec<Cont>,
    executed: u64,
    budget: Option<u64>,
}

impl<'a> Exec<'a> {
    /// Materializes the registry in `space`.
    pub(crate) fn new(
        space: &mut Space,
        reg: &'a VariableRegistry,
        procs: &'a Procedures,
        locals: &'a mut Vec<VarType>,
        time: Option<&'a mut Timeline>,
    ) -> Result<Self, ExecError> {
        let globals = reg.materialize(space)?;
        Ok(Exec {
            reg,
            procs,
            locals,
            time,
            globals,
            local_vars: HashMap::new(),
            conts: Vec::new(),
            executed: 0,
            budget: None,
        })
    }

    pub(crate) fn set_budget(&mut self, budget: Option<u64>) {
        self.budget = budget;
    }

    /// Process items executed so far.
    pub fn executed(&self) -> u64 {
        self.executed
    }

    pub(crate) fn timeline(&mut self) -> Option<&mut Timeline> {
        self.time.as_deref_mut()
    }

    pub fn global(&self, flat: usize) -> VarId {
        self.globals[flat]
    }

    fn int_of(&self, env: &Env, name: &str) -> Result<i64, ExecError> {
        match env.get(name) {
            Some(Binding::Int(v)) => Ok(v),
            Some(Binding::Var(_)) => Err(ExecError::NotInteger(name.into())),
            None => Err(ExecError::UnknownName(name.into())),
        }
    }

    pub(crate) fn eval(&self, e: &Expr, env: &Env) -> Result<i64, ExecError> {
        e.eval(&|n: &str| self.int_of(env, n))
    }

    fn key(&self, r: &VarRef, env: &Env) -> Result<VarKey, ExecError> {
        if r.indices.is_empty() {
            match env.get(&r.name) {
                Some(Binding::Var(k)) => return Ok(k),
                Some(Binding::Int(_)) => return Err(ExecError::NotVariable(r.name.clone())),
                None => {}
            }
        }
        let idx = r
            .indices
            .iter()
            .map(|e| self.eval(e, env))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(VarKey::Global(self.reg.resolve(&r.name, &idx)? as u32))
    }

    pub(crate) fn var_of(&mut self, space: &mut Space, key: VarKey) -> Result<VarId, ExecError> {
        match key {
            VarKey::Global(i) => Ok(self.globals[i as usize]),
            VarKey::Local(id) => {
                if let Some(&v) = self.local_vars.get(&id) {
                    return Ok(v);
                }
                let v = new_var(space, self.locals[id as usize])?;
                self.local_vars.insert(id, v);
                Ok(v)
            }
        }
    }

    fn var(&mut self, space: &mut Space, r: &VarRef, env: &Env) -> Result<VarId, ExecError> {
        let k = self.key(r, env)?;
        self.var_of(space, k)
    }

    fn term_int(&self, t: &Term, env: &Env) -> Result<i64, ExecError> {
        match t {
            Term::Expr(e) => self.eval(e, env),
            Term::Var(r) if r.indices.is_empty() => self.int_of(env, &r.name),
            Term::Var(r) => Err(ExecError::NotInteger(r.name.clone())),
        }
    }

    fn operand(&mut self, space: &mut Space, t: &Term, env: &Env) -> Result<Operand, ExecError> {
        match t {
            Term::Expr(e) => Ok(Operand::Const(self.eval(e, env)?)),
            Term::Var(r) => {
                if r.indices.is_empty() {
                    if let Some(Binding::Int(v)) = env.get(&r.name) {
                        return Ok(Operand::Const(v));
                    }
                }
                Ok(Operand::Var(self.var(space, r, env)?))
            }
        }
    }

    pub(crate) fn condition(
        &mut self,
        space: &mut Space,
        g: &Guard,
        env: &Env,
    ) -> Result<Condition, ExecError> {
        Ok(match g {
            Guard::True => Condition::True,
            Guard::False => Condition::False,
            Guard::Rel(x, op, y) => Condition::Rel(
                self.operand(space, x, env)?,
                *op,
                self.operand(space, y, env)?,
            ),
            Guard::In(e, s) => {
                Condition::In(self.operand(space, e, env)?, self.var(space, s, env)?)
            }
            Guard::And(gs) => Condition::And(
                gs.iter()
                    .map(|g| self.condition(space, g, env))
                    .collect::<Result<_, _>>()?,
            ),
            Guard::Or(gs) => Condition::Or(
                gs.iter()
                    .map(|g| self.condition(space, g, env))
                    .collect::<Result<_, _>>()?,
            ),
            Guard::Not(g) => Condition::Not(Box::new(self.condition(space, g, env)?)),
        })
    }

    fn post(&mut self, space: &mut Space, c: &Constraint, env: &Env) -> Result<(), ExecError> {
        let tell = match c {
            Constraint::Rel(x, op, y) => Tell::Rel(
                self.operand(space, x, env)?,
                *op,
                self.operand(space, y, env)?,
            ),
            Constraint::In(e, s) => {
                Tell::In(self.operand(space, e, env)?, self.var(space, s, env)?)
            }
            Constraint::NotIn(e, s) => {
                Tell::NotIn(self.operand(space, e, env)?, self.var(space, s, env)?)
            }
            Constraint::SetRange(s, lo, hi) => {
                let set = self.var(space, s, env)?;
                let lo = self.eval(lo, env)?;
                let hi = self.eval(hi, env)?;
                let bad = || StoreError::Bounds { lo, hi };
                Tell::SetRange {
                    set,
                    lo: i32::try_from(lo).map_err(|_| bad())?,
                    hi: i32::try_from(hi).map_err(|_| bad())?,
                }
            }
        };
        space.tell(tell)?;
        Ok(())
    }

    fn add_cont(&mut self, guard: &Guard, body: &Arc<Process>, env: &Env) -> ContId {
        self.conts.push(Cont {
            guard: guard.clone(),
            body: body.clone(),
            env: env.clone(),
        });
        ContId(self.conts.len() as u32 - 1)
    }

    fn time(&mut self, what: &'static str) -> Result<&mut Timeline, ExecError> {
        self.time.as_deref_mut().ok_or(ExecError::Untimed(what))
    }

    fn choice(
        &mut self,
        space: &mut Space,
        branches: Vec<(Guard, Arc<Process>, Env)>,
    ) -> Result<(), ExecError> {
        let mut order: Vec<usize> = (0..branches.len()).collect();
        if let Some(t) = self.time.as_deref_mut() {
            order.shuffle(&mut t.rng);
        }
        let mut bs = Vec::with_capacity(order.len());
        let mut conts = Vec::with_capacity(order.len());
        for i in order {
            let (g, p, env) = &branches[i];
            let c = self.condition(space, g, env)?;
            bs.push(space.reify(&c)?);
            conts.push(self.add_cont(g, p, env));
        }
        space.choice(bs, conts);
        Ok(())
    }

    fn range(
        &self,
        lo: &Expr,
        hi: &Expr,
        env: &Env,
    ) -> Result<std::ops::RangeInclusive<i64>, ExecError> {
        Ok(self.eval(lo, env)?..=self.eval(hi, env)?)
    }

    /// Executes `p` to completion, without forcing a fixpoint.
    pub fn execute(
        &mut self,
        space: &mut Space,
        p: &Arc<Process>,
        env: &Env,
    ) -> Result<(), ExecError> {
        let mut stack = vec![(p.clone(), env.clone())];
        while let Some((p, env)) = stack.pop() {
            self.executed += 1;
            if let Some(b) = self.budget {
                if self.executed > b {
                    return Err(ExecError::BudgetExceeded(b));
                }
            }
            match &*p {
                Process::Skip => {}
                Process::Tell(c) => self.post(space, c, &env)?,
                Process::When(g, body) => {
                    let c = self.condition(space, g, &env)?;
                    let b = space.reify(&c)?;
                    let k = self.add_cont(g, body, &env);
                    space.ask(b, k);
                }
                Process::Par(ps) => {
                    for q in ps.iter().rev() {
                        stack.push((q.clone(), env.clone()));
                    }
                }
                Process::Local(decls, body) => {
                    let mut env = env.clone();
                    for d in decls {
                        let id = self.locals.len() as u32;
                        self.locals.push(d.ty);
                        env = env.bind(d.name.clone(), Binding::Var(VarKey::Local(id)));
                    }
                    stack.push((body.clone(), env));
                }
                Process::Next(k, body) => {
                    let (k, body) = (*k, body.clone());
                    self.time("next")?.schedule(k, body, env);
                }
                Process::Unless(g, body) => {
                    let c = self.condition(space, g, &env)?;
                    self.time("unless")?.unless.push((c, body.clone(), env));
                }
                Process::Bang(body) => {
                    self.time("!")?.schedule(1, p.clone(), env.clone());
                    stack.push((body.clone(), env));
                }
                Process::Star(body) => {
                    let t = self.time("*")?;
                    let u = t.rng.random_range(t.now..t.horizon);
                    if u == t.now {
                        stack.push((body.clone(), env));
                    } else {
                        let delay = u - t.now;
                        t.schedule(delay, body.clone(), env);
                    }
                }
                Process::Sum(bs) => {
                    let branches = bs
                        .iter()
                        .map(|(g, q)| (g.clone(), q.clone(), env.clone()))
                        .collect();
                    self.choice(space, branches)?;
                }
                Process::ForPar { var, lo, hi, body } => {
                    for i in self.range(lo, hi, &env)?.rev() {
                        stack.push((body.clone(), env.bind(var.clone(), Binding::Int(i))));
                    }
                }
                Process::ForSum {
                    var,
                    lo,
                    hi,
                    guard,
                    body,
                } => {
                    let branches: Vec<_> = self
                        .range(lo, hi, &env)?
                        .map(|i| {
                            (
                                guard.clone(),
                                body.clone(),
                                env.bind(var.clone(), Binding::Int(i)),
                            )
                        })
                        .collect();
                    if !branches.is_empty() {
                        self.choice(space, branches)?;
                    }
                }
                Process::Call(name, args) => {
                    let def = self
                        .procs
                        .get(name)
                        .ok_or_else(|| ExecError::UnknownProcedure(name.clone()))?;
                    if def.params.len() != args.len() {
                        return Err(ExecError::Arity {
                            name: name.clone(),
                            expected: def.params.len(),
                            found: args.len(),
                        });
                    }
                    let mut callee = Env::new();
                    for (param, arg) in def.params.iter().zip(args) {
                        let b = match param {
                            Param::Int(_) => Binding::Int(self.term_int(arg, &env)?),
                            Param::Var(_) => match arg {
                                Term::Var(r) => Binding::Var(self.key(r, &env)?),
                                Term::Expr(Expr::Param(n)) => match env.get(n) {
                                    Some(b @ Binding::Var(_)) => b,
                                    _ => return Err(ExecError::NotVariable(n.clone())),
                                },
                                Term::Expr(e) => {
                                    return Err(ExecError::NotVariable(e.to_string().into()))
                                }
                            },
                        };
                        callee = callee.bind(param.name().clone(), b);
                    }
                    stack.push((def.body.clone(), callee));
                }
                Process::CellNew(x, e) => {
                    let v = self.eval(e, &env)?;
                    self.time("cell")?
                        .cells
                        .insert(x.clone(), crate::ntcc::Cell::new(v));
                    let var = self.var(space, &VarRef::scalar(x), &Env::new())?;
                    space.tell(Tell::Rel(var.into(), Relop::Eq, Operand::Const(v)))?;
                }
                Process::CellAssign(x, g) => {
                    let cur = self.time("assign")?.cell(x)?.value;
                    let next = g.apply(cur, &|n: &str| self.int_of(&env, n))?;
                    self.time("assign")?.cell_mut(x)?.set_next(x, next)?;
                }
                Process::CellExch(x, y, g) => {
                    let t = self.time("exch")?;
                    let cur = t.cell(x)?.value;
                    t.cell(y)?;
                    let next = g.apply(cur, &|n: &str| self.int_of(&env, n))?;
                    let t = self.time("exch")?;
                    t.cell_mut(x)?.set_next(x, next)?;
                    t.cell_mut(y)?.set_next(y, cur)?;
                }
                Process::PersistentTell(c) => {
                    let c = c.clone();
                    self.time("ptell")?.persistent.push((c, env));
                }
            }
        }
        Ok(())
    }

    fn fire(&mut self, space: &mut Space, k: ContId) -> Result<(), ExecError> {
        let c = &self.conts[k.0 as usize];
        let (body, env) = (c.body.clone(), c.env.clone());
        self.execute(space, &body, &env)
    }

    /// Propagates, running fired continuations.
    pub fn fixpoint(&mut self, space: &mut Space) -> Result<Status, ExecError> {
        space.propagate_with(|sp, k| self.fire(sp, k))
    }

    /// Guards of asks that have not fired or been discarded.
    pub fn blocked(&self, space: &Space) -> Vec<String> {
        space
            .blocked_asks()
            .into_iter()
            .map(|k| self.conts[k.0 as usize].guard.to_string())
            .collect()
    }

    /// Values of the registry variables, in declaration order.
    pub fn snapshot(&self, space: &Space, names: &[String]) -> Vec<(String, VarValue)> {
        names
            .iter()
            .zip(&self.globals)
            .map(|(n, &v)| (n.clone(), VarValue::from_view(&space.read_var(v))))
            .collect()
    }

    fn key_of_term(&self, t: &Term, env: &Env) -> Result<Option<VarKey>, ExecError> {
        match t {
            Term::Var(r) => {
                if r.indices.is_empty() {
                    if let Some(Binding::Int(_)) = env.get(&r.name) {
                        return Ok(None);
                    }
                }
                Ok(Some(self.key(r, env)?))
            }
            Term::Expr(_) => Ok(None),
        }
    }

    /// Fixes a persistent tell against the final store of this unit.
    pub(crate) fn ground(
        &mut self,
        space: &mut Space,
        c: &Constraint,
        env: &Env,
    ) -> Result<Option<GroundTell>, ExecError> {
        Ok(Some(match c {
            Constraint::Rel(x, op, y) => {
                let (x, op, y) = match self.key_of_term(x, env)? {
                    Some(_) => (x, *op, y),
                    None => (y, op.flip(), x),
                };
                let Some(kx) = self.key_of_term(x, env)? else {
                    let a = self.term_int(x, env)?;
                    let b = self.term_int(y, env)?;
                    return Ok(Some(GroundTell::Const(op.holds(a, b))));
                };
                match self.operand(space, y, env)? {
                    Operand::Const(c) => GroundTell::Rel(kx, op, c),
                    Operand::Var(vy) => {
                        let d = space.int_domain(vy)?.clone();
                        match (d.value(), op) {
                            (Some(v), _) => GroundTell::Rel(kx, op, v as i64),
                            (None, Relop::Eq) => GroundTell::Domain(kx, d),
                            (None, Relop::Lt | Relop::Le) => {
                                GroundTell::Rel(kx, op, d.max() as i64)
                            }
                            (None, Relop::Gt | Relop::Ge) => {
                                GroundTell::Rel(kx, op, d.min() as i64)
                            }
                            (None, Relop::Ne) => return Ok(None),
                        }
                    }
                }
            }
            Constraint::In(e, s) | Constraint::NotIn(e, s) => {
                let positive = matches!(c, Constraint::In(..));
                let ks = self.key(s, env)?;
                let v = match self.operand(space, e, env)? {
                    Operand::Const(v) => v,
                    Operand::Var(ve) => match space.int_domain(ve)?.value() {
                        Some(v) => v as i64,
                        None => return Ok(None),
                    },
                };
                GroundTell::Member(v, ks, positive)
            }
            Constraint::SetRange(s, lo, hi) => {
                let ks = self.key(s, env)?;
                let (lo, hi) = (self.eval(lo, env)?, self.eval(hi, env)?);
                let bad = || StoreError::Bounds { lo, hi };
                GroundTell::SetRange(
                    ks,
                    i32::try_from(lo).map_err(|_| bad())?,
                    i32::try_from(hi).map_err(|_| bad())?,
                )
            }
        }))
    }

    pub(crate) fn apply_ground(
        &mut self,
        space: &mut Space,
        g: &GroundTell,
    ) -> Result<(), ExecError> {
        match g {
            GroundTell::Domain(k, d) => {
                let v = self.var_of(space, *k)?;
                space.tell(Tell::Dom(v, d.clone()))?;
            }
            GroundTell::Rel(k, op, c) => {
                let v = self.var_of(space, *k)?;
                space.tell(Tell::Rel(v.into(), *op, Operand::Const(*c)))?;
            }
            GroundTell::Member(e, k, positive) => {
                let s = self.var_of(space, *k)?;
                let e = Operand::Const(*e);
                space.tell(if *positive {
                    Tell::In(e, s)
                } else {
                    Tell::NotIn(e, s)
                })?;
            }
            GroundTell::SetRange(k, lo, hi) => {
                let set = self.var_of(space, *k)?;
                space.tell(Tell::SetRange {
                    set,
                    lo: *lo,
                    hi: *hi,
                })?;
            }
            GroundTell::Const(true) => {}
            GroundTell::Const(false) => {
                space.tell(Tell::Rel(Operand::Const(0), Relop::Eq, Operand::Const(1)))?;
            }
        }
        Ok(())
    }
}

/// Runs an untimed program: fresh space, execute, one fixpoint.
pub fn run_ccp(
    reg: &VariableRegistry,
    procs: &Procedures,
    main: &Arc<Process>,
) -> Result<StoreSnapshot, ExecError> {
    let mut space = Space::new();
    let mut locals = Vec::new();
    let mut exec = Exec::new(&mut space, reg, procs, &mut locals, None)?;
    exec.execute(&mut space, main, &Env::new())?;
    let status = exec.fixpoint(&mut space)?;
    Ok(StoreSnapshot {
        vars: exec.snapshot(&space, &reg.element_names()),
        failed: status == Status::Failed,
        blocked: exec.blocked(&space),
        fired: space.fired_asks(),
    })
}
