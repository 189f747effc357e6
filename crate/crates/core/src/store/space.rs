use std::collections::{BTreeSet, VecDeque};
use std::fmt;

use thiserror::Error;

use super::domain::{IntDomain, Narrowed, SetDomain, Wipeout, INT_MAX, INT_MIN};
use super::propagator::{self, Outcome, Prop};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum VarKind {
    Int,
    Bool,
    Set,
}

impl fmt::Display for VarKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            VarKind::Int => "int",
            VarKind::Bool => "bool",
            VarKind::Set => "set",
        })
    }
}

/// Handle to a variable of one particular space.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VarId {
    index: u32,
    kind: VarKind,
}

impl VarId {
    pub fn index(self) -> usize {
        self.index as usize
    }

    pub fn kind(self) -> VarKind {
        self.kind
    }

    fn is_set(self) -> bool {
        self.kind == VarKind::Set
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Operand {
    Var(VarId),
    Const(i64),
}

impl From<VarId> for Operand {
    fn from(v: VarId) -> Self {
        Operand::Var(v)
    }
}

impl From<i64> for Operand {
    fn from(c: i64) -> Self {
        Operand::Const(c)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Relop {
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
}

impl Relop {
    /// Logical complement.
    pub fn negate(self) -> Relop {
        match self {
            Relop::Eq => Relop::Ne,
            Relop::Ne => Relop::Eq,
            Relop::Lt => Relop::Ge,
            Relop::Le => Relop::Gt,
            Relop::Gt => Relop::Le,
            Relop::Ge => Relop::Lt,
        }
    }

    /// Same relation with the operands swapped.
    pub fn flip(self) -> Relop {
        match self {
            Relop::Lt => Relop::Gt,
            Relop::Le => Relop::Ge,
            Relop::Gt => Relop::Lt,
            Relop::Ge => Relop::Le,
            op => op,
        }
    }

    pub fn holds(self, a: i64, b: i64) -> bool {
        match self {
            Relop::Eq => a == b,
            Relop::Ne => a != b,
            Relop::Lt => a < b,
            Relop::Le => a <= b,
            Relop::Gt => a > b,
            Relop::Ge => a >= b,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Relop::Eq => "=",
            Relop::Ne => "!=",
            Relop::Lt => "<",
            Relop::Le => "<=",
            Relop::Gt => ">",
            Relop::Ge => ">=",
        }
    }
}

/// Three-valued entailment result.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Truth {
    True,
    False,
    Unknown,
}

impl Truth {
    pub fn from_bool(b: bool) -> Truth {
        if b {
            Truth::True
        } else {
            Truth::False
        }
    }

    pub fn negate(self) -> Truth {
        match self {
            Truth::True => Truth::False,
            Truth::False => Truth::True,
            Truth::Unknown => Truth::Unknown,
        }
    }
}

/// Basic constraints accepted by [`Space::tell`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Tell {
    Rel(Operand, Relop, Operand),
    In(Operand, VarId),
    NotIn(Operand, VarId),
    /// The set variable equals `{lo..hi}`.
    SetRange {
        set: VarId,
        lo: i32,
        hi: i32,
    },
    /// Integer variable restricted to a domain.
    Dom(VarId, IntDomain),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Global {
    Linear {
        terms: Vec<(i64, VarId)>,
        op: Relop,
        rhs: i64,
    },
    Distinct(Vec<VarId>),
    /// `#{ x in vars | x cmp value } op rhs`
    Count {
        vars: Vec<VarId>,
        cmp: Relop,
        value: i64,
        op: Relop,
        rhs: i64,
    },
    /// `c = a \ b`
    SetMinus {
        a: VarId,
        b: VarId,
        c: VarId,
    },
}

/// Boolean combination of basic constraints, reifiable into a truth variable.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Condition {
    True,
    False,
    Rel(Operand, Relop, Operand),
    In(Operand, VarId),
    And(Vec<Condition>),
    Or(Vec<Condition>),
    Not(Box<Condition>),
}

/// Index of a continuation owned by whoever posted the ask.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ContId(pub u32);

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Fixpoint,
    Failed,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum VarSel {
    InOrder,
    SmallestDomain,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ValSel {
    Min,
    Max,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Branching {
    pub vars: Vec<VarId>,
    pub var_sel: VarSel,
    pub val_sel: ValSel,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum StoreError {
    #[error("invalid bounds [{lo}, {hi}]")]
    Bounds { lo: i64, hi: i64 },
    #[error("set glb is not contained in lub")]
    Domain,
    #[error("global constraint over an empty variable list")]
    Arity,
    #[error("expected a {expected} variable, found {found}")]
    Kind { expected: VarKind, found: VarKind },
}

/// Read-only view of one variable.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum VarView {
    Int(IntDomain),
    Set {
        glb: BTreeSet<i32>,
        lub: BTreeSet<i32>,
    },
}

impl VarView {
    pub fn assigned(&self) -> bool {
        match self {
            VarView::Int(d) => d.is_assigned(),
            VarView::Set { glb, lub } => glb.len() == lub.len(),
        }
    }

    pub fn value(&self) -> Option<i32> {
        match self {
            VarView::Int(d) => d.value(),
            VarView::Set { .. } => None,
        }
    }
}

#[derive(Clone, Debug)]
enum Dom {
    Int(IntDomain),
    Set(SetDomain),
}

/// Variable table with modification tracking, shared with propagators.
#[derive(Clone, Debug, Default)]
pub(crate) struct Domains {
    doms: Vec<Dom>,
    modified: Vec<u32>,
}

impl Domains {
    pub(crate) fn int(&self, v: VarId) -> &IntDomain {
        match &self.doms[v.index()] {
            Dom::Int(d) => d,
            Dom::Set(_) => panic!("variable {} is a set", v.index),
        }
    }

    pub(crate) fn set(&self, v: VarId) -> &SetDomain {
        match &self.doms[v.index()] {
            Dom::Set(d) => d,
            Dom::Int(_) => panic!("variable {} is not a set", v.index),
        }
    }

    pub(crate) fn narrow_int(
        &mut self,
        v: VarId,
        f: impl FnOnce(&mut IntDomain) -> Narrowed,
    ) -> Narrowed {
        let Dom::Int(d) = &mut self.doms[v.index()] else {
            panic!("variable {} is a set", v.index);
        };
        let changed = f(d)?;
        if changed {
            self.modified.push(v.index);
        }
        Ok(changed)
    }

    fn narrow_set(&mut self, v: VarId, f: impl FnOnce(&mut SetDomain) -> Narrowed) -> Narrowed {
        let Dom::Set(d) = &mut self.doms[v.index()] else {
            panic!("variable {} is not a set", v.index);
        };
        let changed = f(d)?;
        if changed {
            self.modified.push(v.index);
        }
        Ok(changed)
    }

    pub(crate) fn include(&mut self, set: VarId, v: i32) -> Narrowed {
        self.narrow_set(set, |d| d.include(v))
    }

    pub(crate) fn exclude(&mut self, set: VarId, v: i32) -> Narrowed {
        self.narrow_set(set, |d| d.exclude(v))
    }
}

#[derive(Clone, Debug)]
struct Slot {
    prop: Prop,
    dead: bool,
    queued: bool,
}

/// A constraint store: variables, propagators and a pending queue.
#[derive(Clone, Debug, Default)]
pub struct Space {
    doms: Domains,
    kinds: Vec<VarKind>,
    subs: Vec<Vec<u32>>,
    props: Vec<Slot>,
    queue: VecDeque<u32>,
    failed: bool,
    in_propagation: bool,
    branching: Option<Branching>,
    fired: u64,
}

impl Space {
    pub fn new() -> Self {
        Self::default()
    }

    fn push_var(&mut self, kind: VarKind, dom: Dom) -> VarId {
        let index = self.doms.doms.len() as u32;
        self.doms.doms.push(dom);
        self.kinds.push(kind);
        self.subs.push(Vec::new());
        VarId { index, kind }
    }

    pub fn new_int_var(&mut self, lo: i64, hi: i64) -> Result<VarId, StoreError> {
        if lo > hi || lo < INT_MIN as i64 || hi > INT_MAX as i64 {
            return Err(StoreError::Bounds { lo, hi });
        }
        Ok(self.push_var(
            VarKind::Int,
            Dom::Int(IntDomain::interval(lo as i32, hi as i32)),
        ))
    }

    pub fn new_bool_var(&mut self) -> VarId {
        self.push_var(VarKind::Bool, Dom::Int(IntDomain::interval(0, 1)))
    }

    fn const_bool(&mut self, v: bool) -> VarId {
        self.push_var(VarKind::Bool, Dom::Int(IntDomain::singleton(v as i32)))
    }

    pub fn new_set_var(
        &mut self,
        glb: BTreeSet<i32>,
        lub: BTreeSet<i32>,
    ) -> Result<VarId, StoreError> {
        if !glb.is_subset(&lub) {
            return Err(StoreError::Domain);
        }
        if let (Some(&lo), Some(&hi)) = (lub.first(), lub.last()) {
            if lo < INT_MIN || hi > INT_MAX {
                return Err(StoreError::Bounds {
                    lo: lo as i64,
                    hi: hi as i64,
                });
            }
        }
        Ok(self.push_var(VarKind::Set, Dom::Set(SetDomain::new(glb, lub))))
    }

    pub fn var_count(&self) -> usize {
        self.kinds.len()
    }

    pub fn vars(&self) -> impl Iterator<Item = VarId> + '_ {
        self.kinds.iter().enumerate().map(|(i, &kind)| VarId {
            index: i as u32,
            kind,
        })
    }

    /// Number of propagators that are not subsumed.
    pub fn propagator_count(&self) -> usize {
        self.props.iter().filter(|s| !s.dead).count()
    }

    pub fn is_failed(&self) -> bool {
        self.failed
    }

    /// Number of asks that have fired in this space.
    pub fn fired_asks(&self) -> u64 {
        self.fired
    }

    /// Continuations of asks that are still waiting for their guard.
    pub fn blocked_asks(&self) -> Vec<ContId> {
        let mut out = Vec::new();
        for s in self.props.iter().filter(|s| !s.dead) {
            match &s.prop {
                Prop::Ask { cont, .. } => out.push(*cont),
                Prop::Choice { conts, .. } => out.extend(conts.iter().copied()),
                _ => {}
            }
        }
        out
    }

    pub fn branching(&self) -> Option<&Branching> {
        self.branching.as_ref()
    }

    pub fn post_branching(&mut self, b: Branching) {
        self.branching = Some(b);
    }

    fn check_int(&self, v: VarId) -> Result<(), StoreError> {
        if v.is_set() {
            Err(StoreError::Kind {
                expected: VarKind::Int,
                found: VarKind::Set,
            })
        } else {
            Ok(())
        }
    }

    fn check_set(&self, v: VarId) -> Result<(), StoreError> {
        if v.is_set() {
            Ok(())
        } else {
            Err(StoreError::Kind {
                expected: VarKind::Set,
                found: v.kind,
            })
        }
    }

    fn check_operand(&self, o: Operand) -> Result<(), StoreError> {
        match o {
            Operand::Var(v) => self.check_int(v),
            Operand::Const(_) => Ok(()),
        }
    }

    pub fn int_domain(&self, v: VarId) -> Result<&IntDomain, StoreError> {
        self.check_int(v)?;
        Ok(self.doms.int(v))
    }

    pub fn set_domain(&self, v: VarId) -> Result<&SetDomain, StoreError> {
        self.check_set(v)?;
        Ok(self.doms.set(v))
    }

    /// Assigned value of an integer or boolean variable.
    pub fn value(&self, v: VarId) -> Result<Option<i32>, StoreError> {
        Ok(self.int_domain(v)?.value())
    }

    pub fn read_var(&self, v: VarId) -> VarView {
        match &self.doms.doms[v.index()] {
            Dom::Int(d) => VarView::Int(d.clone()),
            Dom::Set(d) => VarView::Set {
                glb: d.glb().clone(),
                lub: d.lub().clone(),
            },
        }
    }

    fn apply(&mut self, r: Result<impl Sized, Wipeout>) {
        if r.is_err() {
            self.fail();
        }
    }

    fn fail(&mut self) {
        self.failed = true;
        self.queue.clear();
        self.doms.modified.clear();
    }

    fn add_prop(&mut self, prop: Prop) {
        let id = self.props.len() as u32;
        for v in prop.vars() {
            self.subs[v.index()].push(id);
        }
        self.props.push(Slot {
            prop,
            dead: false,
            queued: true,
        });
        self.queue.push_back(id);
    }

    /// Posts a basic constraint. Unary constraints narrow immediately;
    /// failures are recorded on the space.
    pub fn tell(&mut self, t: Tell) -> Result<(), StoreError> {
        match &t {
            Tell::Rel(x, _, y) => {
                self.check_operand(*x)?;
                self.check_operand(*y)?;
            }
            Tell::In(e, s) | Tell::NotIn(e, s) => {
                self.check_operand(*e)?;
                self.check_set(*s)?;
            }
            Tell::SetRange { set, .. } => self.check_set(*set)?,
            Tell::Dom(x, _) => self.check_int(*x)?,
        }
        if self.failed {
            return Ok(());
        }
        match t {
            Tell::Rel(x, op, y) => match (x, y) {
                (Operand::Var(x), Operand::Var(y)) => self.add_prop(Prop::Rel { x, op, y }),
                _ => {
                    let r = propagator::enforce_rel(&mut self.doms, x, op, y);
                    self.apply(r);
                }
            },
            Tell::In(Operand::Const(c), s) => {
                let r = match i32::try_from(c) {
                    Ok(c) => self.doms.include(s, c),
                    Err(_) => Err(Wipeout),
                };
                self.apply(r);
            }
            Tell::NotIn(Operand::Const(c), s) => {
                if let Ok(c) = i32::try_from(c) {
                    let r = self.doms.exclude(s, c);
                    self.apply(r);
                }
            }
            Tell::In(Operand::Var(e), s) => self.add_prop(Prop::Member {
                elem: e,
                set: s,
                positive: true,
            }),
            Tell::NotIn(Operand::Var(e), s) => self.add_prop(Prop::Member {
                elem: e,
                set: s,
                positive: false,
            }),
            Tell::SetRange { set, lo, hi } => {
                let r = self.doms.narrow_set(set, |d| {
                    let mut changed = d.include_all((lo..=hi).collect::<Vec<_>>().iter())?;
                    changed |= d.restrict_lub(|v| lo <= v && v <= hi)?;
                    Ok(changed)
                });
                self.apply(r);
            }
            Tell::Dom(x, d) => {
                let r = self.doms.narrow_int(x, |dom| dom.intersect(&d));
                self.apply(r);
            }
        }
        Ok(())
    }

    pub fn post_global(&mut self, g: Global) -> Result<(), StoreError> {
        match g {
            Global::Linear { terms, op, rhs } => {
                if terms.is_empty() {
                    return Err(StoreError::Arity);
                }
                for &(_, v) in &terms {
                    self.check_int(v)?;
                }
                if self.failed {
                    return Ok(());
                }
                let neg = |terms: &[(i64, VarId)]| terms.iter().map(|&(a, v)| (-a, v)).collect();
                let (terms, op, rhs) = match op {
                    Relop::Eq | Relop::Ne | Relop::Le => (terms, op, rhs),
                    Relop::Lt => (terms, Relop::Le, rhs - 1),
                    Relop::Ge => (neg(&terms), Relop::Le, -rhs),
                    Relop::Gt => (neg(&terms), Relop::Le, -rhs - 1),
                };
                self.add_prop(Prop::Linear { terms, op, rhs });
            }
            Global::Distinct(vars) => {
                if vars.is_empty() {
                    return Err(StoreError::Arity);
                }
                for &v in &vars {
                    self.check_int(v)?;
                }
                if !self.failed {
                    self.add_prop(Prop::Distinct { vars });
                }
            }
            Global::Count {
                vars,
                cmp,
                value,
                op,
                rhs,
            } => {
                if vars.is_empty() {
                    return Err(StoreError::Arity);
                }
                let mut terms = Vec::with_capacity(vars.len());
                for v in vars {
                    self.check_int(v)?;
                    let b = self.reify(&Condition::Rel(v.into(), cmp, value.into()))?;
                    terms.push((1, b));
                }
                self.post_global(Global::Linear { terms, op, rhs })?;
            }
            Global::SetMinus { a, b, c } => {
                self.check_set(a)?;
                self.check_set(b)?;
                self.check_set(c)?;
                if !self.failed {
                    self.add_prop(Prop::SetMinus { a, b, c });
                }
            }
        }
        Ok(())
    }

    /// Current domain entailment of `cond`.
    pub fn entailment(&self, cond: &Condition) -> Truth {
        match cond {
            Condition::True => Truth::True,
            Condition::False => Truth::False,
            Condition::Rel(x, op, y) => propagator::entail_rel(&self.doms, *x, *op, *y),
            Condition::In(e, s) => propagator::entail_in(&self.doms, *e, *s),
            Condition::And(cs) => {
                let mut out = Truth::True;
                for c in cs {
                    match self.entailment(c) {
                        Truth::False => return Truth::False,
                        Truth::Unknown => out = Truth::Unknown,
                        Truth::True => {}
                    }
                }
                out
            }
            Condition::Or(cs) => {
                let mut out = Truth::False;
                for c in cs {
                    match self.entailment(c) {
                        Truth::True => return Truth::True,
                        Truth::Unknown => out = Truth::Unknown,
                        Truth::False => {}
                    }
                }
                out
            }
            Condition::Not(c) => self.entailment(c).negate(),
        }
    }

    fn check_condition(&self, cond: &Condition) -> Result<(), StoreError> {
        match cond {
            Condition::True | Condition::False => Ok(()),
            Condition::Rel(x, _, y) => {
                self.check_operand(*x)?;
                self.check_operand(*y)
            }
            Condition::In(e, s) => {
                self.check_operand(*e)?;
                self.check_set(*s)
            }
            Condition::And(cs) | Condition::Or(cs) => {
                cs.iter().try_for_each(|c| self.check_condition(c))
            }
            Condition::Not(c) => self.check_condition(c),
        }
    }

    /// Returns a boolean variable mirroring the truth of `cond`.
    pub fn reify(&mut self, cond: &Condition) -> Result<VarId, StoreError> {
        self.check_condition(cond)?;
        Ok(self.reify_checked(cond))
    }

    fn reify_checked(&mut self, cond: &Condition) -> VarId {
        match self.entailment(cond) {
            Truth::True => return self.const_bool(true),
            Truth::False => return self.const_bool(false),
            Truth::Unknown => {}
        }
        match cond {
            Condition::True | Condition::False => unreachable!("constant conditions are decided"),
            Condition::Rel(x, op, y) => {
                let b = self.new_bool_var();
                let (x, op, y) = match (x, y) {
                    (Operand::Const(_), Operand::Var(_)) => (*y, op.flip(), *x),
                    _ => (*x, *op, *y),
                };
                self.add_prop(Prop::ReifRel { x, op, y, b });
                b
            }
            Condition::In(e, s) => {
                let b = self.new_bool_var();
                self.add_prop(Prop::ReifIn {
                    elem: *e,
                    set: *s,
                    b,
                });
                b
            }
            Condition::And(cs) | Condition::Or(cs) => {
                let xs: Vec<VarId> = cs.iter().map(|c| self.reify_checked(c)).collect();
                let b = self.new_bool_var();
                if matches!(cond, Condition::And(_)) {
                    self.add_prop(Prop::And { xs, b });
                } else {
                    self.add_prop(Prop::Or { xs, b });
                }
                b
            }
            Condition::Not(c) => {
                let a = self.reify_checked(c);
                let b = self.new_bool_var();
                self.add_prop(Prop::Not { a, b });
                b
            }
        }
    }

    /// Installs an ask on truth variable `b`; the continuation fires when
    /// `b` becomes 1.
    pub fn ask(&mut self, b: VarId, cont: ContId) {
        if !self.failed {
            self.add_prop(Prop::Ask { b, cont });
        }
    }

    /// Parallel conditional: fires the continuation of the first truth
    /// variable (in list order) that becomes 1.
    pub fn choice(&mut self, bs: Vec<VarId>, conts: Vec<ContId>) {
        debug_assert_eq!(bs.len(), conts.len());
        if !self.failed && !bs.is_empty() {
            self.add_prop(Prop::Choice { bs, conts });
        }
    }

    fn wake(&mut self) {
        let modified = std::mem::take(&mut self.doms.modified);
        for v in modified {
            let subs = &mut self.subs[v as usize];
            let props = &mut self.props;
            let queue = &mut self.queue;
            subs.retain(|&p| {
                let slot = &mut props[p as usize];
                if slot.dead {
                    return false;
                }
                if !slot.queued {
                    slot.queued = true;
                    queue.push_back(p);
                }
                true
            });
        }
    }

    pub fn status(&mut self) -> Status {
        self.propagate_with(|_, _| Ok::<(), std::convert::Infallible>(()))
            .unwrap_or_else(|e| match e {})
    }

    pub fn propagate_to_fixpoint(&mut self) -> Status {
        self.status()
    }

    /// Runs propagators until quiescence. Fired asks are handed to `fire`,
    /// which may post new constraints and asks before propagation resumes.
    /// A nested call from inside `fire` returns immediately; the outer loop
    /// picks up whatever was posted.
    pub fn propagate_with<E>(
        &mut self,
        mut fire: impl FnMut(&mut Space, ContId) -> Result<(), E>,
    ) -> Result<Status, E> {
        if self.failed {
            return Ok(Status::Failed);
        }
        if self.in_propagation {
            return Ok(Status::Fixpoint);
        }
        self.in_propagation = true;
        self.wake();
        while let Some(p) = self.queue.pop_front() {
            let p = p as usize;
            self.props[p].queued = false;
            if self.props[p].dead {
                continue;
            }
            match self.props[p].prop.run(&mut self.doms) {
                Outcome::Fix => {}
                Outcome::Subsumed => self.props[p].dead = true,
                Outcome::Failed => {
                    self.fail();
                    break;
                }
                Outcome::Fire(c) => {
                    self.props[p].dead = true;
                    self.fired += 1;
                    if let Err(e) = fire(self, c) {
                        self.in_propagation = false;
                        return Err(e);
                    }
                    if self.failed {
                        break;
                    }
                }
            }
            self.wake();
        }
        self.in_propagation = false;
        Ok(if self.failed {
            Status::Failed
        } else {
            Status::Fixpoint
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(v: i64) -> Operand {
        Operand::Const(v)
    }

    #[test]
    fn empty_space_is_quiescent() {
        let mut s = Space::new();
        assert_eq!(s.var_count(), 0);
        assert_eq!(s.propagator_count(), 0);
        assert_eq!(s.status(), Status::Fixpoint);
    }

    #[test]
    fn var_creation_checks_bounds() {
        let mut s = Space::new();
        let x = s.new_int_var(0, 11).unwrap();
        assert_eq!(s.int_domain(x).unwrap().size(), 12);
        let y = s.new_int_var(5, 5).unwrap();
        assert_eq!(s.value(y), Ok(Some(5)));
        assert_eq!(
            s.new_int_var(3, 2),
            Err(StoreError::Bounds { lo: 3, hi: 2 })
        );
        assert!(s.new_int_var(0, i32::MAX as i64).is_err());
        assert_eq!(
            s.new_set_var([9].into(), (1..=8).collect()),
            Err(StoreError::Domain)
        );
        let set = s.new_set_var(BTreeSet::new(), (1..=8).collect()).unwrap();
        assert!(!s.read_var(set).assigned());
        assert!(matches!(s.value(set), Err(StoreError::Kind { .. })));
    }

    #[test]
    fn contradictory_tells_fail() {
        let mut s = Space::new();
        let x = s.new_int_var(0, 11).unwrap();
        s.tell(Tell::Rel(x.into(), Relop::Eq, c(5))).unwrap();
        assert_eq!(s.status(), Status::Fixpoint);
        assert_eq!(s.value(x), Ok(Some(5)));
        s.tell(Tell::Rel(x.into(), Relop::Eq, c(6))).unwrap();
        assert_eq!(s.status(), Status::Failed);
        s.tell(Tell::Rel(x.into(), Relop::Ne, c(0))).unwrap();
        assert!(s.is_failed());
    }

    #[test]
    fn empty_bound_intersection_fails() {
        let mut s = Space::new();
        let x = s.new_int_var(0, 9).unwrap();
        s.tell(Tell::Rel(x.into(), Relop::Ge, c(4))).unwrap();
        s.tell(Tell::Rel(x.into(), Relop::Le, c(3))).unwrap();
        assert_eq!(s.status(), Status::Failed);
    }

    #[test]
    fn set_difference() {
        let mut s = Space::new();
        let a = s.new_set_var(BTreeSet::new(), (1..=5).collect()).unwrap();
        let b = s.new_set_var(BTreeSet::new(), (3..=8).collect()).unwrap();
        let cset = s.new_set_var(BTreeSet::new(), (1..=8).collect()).unwrap();
        s.tell(Tell::SetRange {
            set: a,
            lo: 1,
            hi: 5,
        })
        .unwrap();
        s.tell(Tell::SetRange {
            set: b,
            lo: 3,
            hi: 8,
        })
        .unwrap();
        s.post_global(Global::SetMinus { a, b, c: cset }).unwrap();
        assert_eq!(s.status(), Status::Fixpoint);
        assert_eq!(
            s.read_var(cset),
            VarView::Set {
                glb: [1, 2].into(),
                lub: [1, 2].into()
            }
        );
    }

    #[test]
    fn reification_follows_domains() {
        let mut s = Space::new();
        let x = s.new_int_var(0, 11).unwrap();
        let b = s.reify(&Condition::Rel(x.into(), Relop::Gt, c(3))).unwrap();
        s.status();
        assert_eq!(s.value(b), Ok(None));
        s.tell(Tell::Rel(x.into(), Relop::Eq, c(5))).unwrap();
        s.status();
        assert_eq!(s.value(b), Ok(Some(1)));
    }

    #[test]
    fn transitivity_is_not_discovered() {
        let mut s = Space::new();
        let x = s.new_int_var(0, 127).unwrap();
        let y = s.new_int_var(0, 127).unwrap();
        let z = s.new_int_var(0, 127).unwrap();
        s.tell(Tell::Rel(x.into(), Relop::Gt, y.into())).unwrap();
        s.tell(Tell::Rel(y.into(), Relop::Gt, z.into())).unwrap();
        let b = s
            .reify(&Condition::Rel(x.into(), Relop::Gt, z.into()))
            .unwrap();
        assert_eq!(s.status(), Status::Fixpoint);
        assert_eq!(s.value(b), Ok(None));
        assert_eq!(s.int_domain(x).unwrap().min(), 2);
        assert_eq!(s.int_domain(z).unwrap().max(), 125);
    }

    #[test]
    fn two_guards_on_one_var() {
        let mut s = Space::new();
        let x1 = s.new_int_var(0, 10).unwrap();
        let b1 = s
            .reify(&Condition::Rel(x1.into(), Relop::Gt, c(3)))
            .unwrap();
        let b2 = s
            .reify(&Condition::Rel(x1.into(), Relop::Eq, c(5)))
            .unwrap();
        s.tell(Tell::Rel(x1.into(), Relop::Eq, c(5))).unwrap();
        s.status();
        assert_eq!(s.value(b1), Ok(Some(1)));
        assert_eq!(s.value(b2), Ok(Some(1)));
    }

    #[test]
    fn count_over_assigned_vars_is_entailed() {
        let mut s = Space::new();
        let vs: Vec<VarId> = [2, 0, 2]
            .iter()
            .map(|&v| s.new_int_var(v, v).unwrap())
            .collect();
        s.post_global(Global::Count {
            vars: vs,
            cmp: Relop::Eq,
            value: 2,
            op: Relop::Ge,
            rhs: 2,
        })
        .unwrap();
        assert_eq!(s.status(), Status::Fixpoint);
        assert_eq!(s.propagator_count(), 0);
        assert_eq!(
            s.post_global(Global::Distinct(vec![])),
            Err(StoreError::Arity)
        );
    }

    #[test]
    fn clone_is_independent() {
        let mut s = Space::new();
        let x = s.new_int_var(0, 11).unwrap();
        let mut t = s.clone();
        t.tell(Tell::Rel(x.into(), Relop::Eq, c(3))).unwrap();
        t.status();
        assert_eq!(s.int_domain(x).unwrap().size(), 12);
        assert_eq!(t.value(x), Ok(Some(3)));
    }

    #[test]
    fn asks_fire_through_handler() {
        let mut s = Space::new();
        let x = s.new_int_var(0, 11).unwrap();
        let y = s.new_int_var(0, 1).unwrap();
        let b = s.reify(&Condition::Rel(x.into(), Relop::Gt, c(3))).unwrap();
        s.ask(b, ContId(7));
        s.tell(Tell::Rel(x.into(), Relop::Eq, c(5))).unwrap();
        let mut seen = Vec::new();
        let st = s
            .propagate_with(|sp, k| {
                seen.push(k);
                sp.tell(Tell::Rel(y.into(), Relop::Eq, c(1)))
            })
            .unwrap();
        assert_eq!(st, Status::Fixpoint);
        assert_eq!(seen, vec![ContId(7)]);
        assert_eq!(s.value(y), Ok(Some(1)));
        assert_eq!(s.fired_asks(), 1);
        assert!(s.blocked_asks().is_empty());
    }
}
