use num_integer::Integer;

use super::domain::{IntDomain, Narrowed, Wipeout};
use super::space::{ContId, Domains, Operand, Relop, Truth, VarId};

#[derive(Clone, Debug)]
pub(crate) enum Prop {
    /// `x op y` over two integer variables.
    Rel {
        x: VarId,
        op: Relop,
        y: VarId,
    },
    /// `sum(coeff * var) op rhs` with `op` normalized to Eq, Ne or Le.
    Linear {
        terms: Vec<(i64, VarId)>,
        op: Relop,
        rhs: i64,
    },
    Distinct {
        vars: Vec<VarId>,
    },
    ReifRel {
        x: Operand,
        op: Relop,
        y: Operand,
        b: VarId,
    },
    ReifIn {
        elem: Operand,
        set: VarId,
        b: VarId,
    },
    /// `elem ∈ set` (or `∉` when `positive` is false) for a variable element.
    Member {
        elem: VarId,
        set: VarId,
        positive: bool,
    },
    /// `c = a \ b`
    SetMinus {
        a: VarId,
        b: VarId,
        c: VarId,
    },
    And {
        xs: Vec<VarId>,
        b: VarId,
    },
    Or {
        xs: Vec<VarId>,
        b: VarId,
    },
    Not {
        a: VarId,
        b: VarId,
    },
    Ask {
        b: VarId,
        cont: ContId,
    },
    Choice {
        bs: Vec<VarId>,
        conts: Vec<ContId>,
    },
}

pub(crate) enum Outcome {
    Fix,
    Subsumed,
    Fire(ContId),
    Failed,
}

impl From<Result<bool, Wipeout>> for Outcome {
    /// `Ok(true)` means entailed.
    fn from(r: Result<bool, Wipeout>) -> Self {
        match r {
            Ok(true) => Outcome::Subsumed,
            Ok(false) => Outcome::Fix,
            Err(Wipeout) => Outcome::Failed,
        }
    }
}

impl Prop {
    pub(crate) fn vars(&self) -> Vec<VarId> {
        fn opnd(o: &Operand, out: &mut Vec<VarId>) {
            if let Operand::Var(v) = o {
                out.push(*v);
            }
        }
        let mut out = Vec::new();
        match self {
            Prop::Rel { x, y, .. } => out.extend([*x, *y]),
            Prop::Linear { terms, .. } => out.extend(terms.iter().map(|t| t.1)),
            Prop::Distinct { vars } => out.extend(vars.iter().copied()),
            Prop::ReifRel { x, y, b, .. } => {
                opnd(x, &mut out);
                opnd(y, &mut out);
                out.push(*b);
            }
            Prop::ReifIn { elem, set, b } => {
                opnd(elem, &mut out);
                out.extend([*set, *b]);
            }
            Prop::Member { elem, set, .. } => out.extend([*elem, *set]),
            Prop::SetMinus { a, b, c } => out.extend([*a, *b, *c]),
            Prop::And { xs, b } | Prop::Or { xs, b } => {
                out.extend(xs.iter().copied());
                out.push(*b);
            }
            Prop::Not { a, b } => out.extend([*a, *b]),
            Prop::Ask { b, .. } => out.push(*b),
            Prop::Choice { bs, .. } => out.extend(bs.iter().copied()),
        }
        out.sort();
        out.dedup();
        out
    }

    pub(crate) fn run(&self, d: &mut Domains) -> Outcome {
        match self {
            Prop::Rel { x, op, y } => rel_vv(d, *x, *op, *y).into(),
            Prop::Linear { terms, op, rhs } => linear(d, terms, *op, *rhs).into(),
            Prop::Distinct { vars } => distinct(d, vars).into(),
            Prop::ReifRel { x, op, y, b } => match d.int(*b).value() {
                Some(1) => enforce_rel(d, *x, *op, *y).into(),
                Some(_) => enforce_rel(d, *x, op.negate(), *y).into(),
                None => decide(d, *b, entail_rel(d, *x, *op, *y)),
            },
            Prop::ReifIn { elem, set, b } => match d.int(*b).value() {
                Some(v) => match elem {
                    Operand::Var(e) => member(d, *e, *set, v == 1).into(),
                    Operand::Const(c) => {
                        let c = *c as i32;
                        let r = if v == 1 {
                            d.include(*set, c)
                        } else {
                            d.exclude(*set, c)
                        };
                        match r {
                            Ok(_) => Outcome::Subsumed,
                            Err(_) => Outcome::Failed,
                        }
                    }
                },
                None => decide(d, *b, entail_in(d, *elem, *set)),
            },
            Prop::Member {
                elem,
                set,
                positive,
            } => member(d, *elem, *set, *positive).into(),
            Prop::SetMinus { a, b, c } => set_minus(d, *a, *b, *c).into(),
            Prop::And { xs, b } => bool_and(d, xs, *b, false).into(),
            Prop::Or { xs, b } => bool_and(d, xs, *b, true).into(),
            Prop::Not { a, b } => bool_not(d, *a, *b).into(),
            Prop::Ask { b, cont } => match d.int(*b).value() {
                Some(1) => Outcome::Fire(*cont),
                Some(_) => Outcome::Subsumed,
                None => Outcome::Fix,
            },
            Prop::Choice { bs, conts } => {
                let mut falses = 0;
                for (b, c) in bs.iter().zip(conts) {
                    match d.int(*b).value() {
                        Some(1) => return Outcome::Fire(*c),
                        Some(_) => falses += 1,
                        None => {}
                    }
                }
                if falses == bs.len() {
                    Outcome::Subsumed
                } else {
                    Outcome::Fix
                }
            }
        }
    }
}

fn decide(d: &mut Domains, b: VarId, t: Truth) -> Outcome {
    let v = match t {
        Truth::True => 1,
        Truth::False => 0,
        Truth::Unknown => return Outcome::Fix,
    };
    match d.narrow_int(b, |dom| dom.assign(v)) {
        Ok(_) => Outcome::Subsumed,
        Err(_) => Outcome::Failed,
    }
}

/// Unary narrowing for `x op c`.
pub(crate) fn rel_vc(d: &mut Domains, x: VarId, op: Relop, c: i64) -> Narrowed {
    d.narrow_int(x, |dom| match op {
        Relop::Eq => dom.assign(c),
        Relop::Ne => dom.remove(c),
        Relop::Lt => dom.restrict_max(c - 1),
        Relop::Le => dom.restrict_max(c),
        Relop::Gt => dom.restrict_min(c + 1),
        Relop::Ge => dom.restrict_min(c),
    })
}

/// Returns `Ok(true)` when the relation is entailed after narrowing.
pub(crate) fn rel_vv(d: &mut Domains, x: VarId, op: Relop, y: VarId) -> Result<bool, Wipeout> {
    if x == y {
        return if op.holds(0, 0) {
            Ok(true)
        } else {
            Err(Wipeout)
        };
    }
    match op {
        Relop::Eq => {
            let dy = d.int(y).clone();
            d.narrow_int(x, |dom| dom.intersect(&dy))?;
            let dx = d.int(x).clone();
            d.narrow_int(y, |dom| dom.intersect(&dx))?;
            Ok(d.int(x).is_assigned())
        }
        Relop::Ne => {
            if let Some(v) = d.int(x).value() {
                d.narrow_int(y, |dom| dom.remove(v as i64))?;
            }
            if let Some(v) = d.int(y).value() {
                d.narrow_int(x, |dom| dom.remove(v as i64))?;
            }
            Ok(d.int(x).disjoint(d.int(y)))
        }
        Relop::Le | Relop::Lt => {
            let gap = if op == Relop::Lt { 1 } else { 0 };
            let ymax = d.int(y).max() as i64;
            d.narrow_int(x, |dom| dom.restrict_max(ymax - gap))?;
            let xmin = d.int(x).min() as i64;
            d.narrow_int(y, |dom| dom.restrict_min(xmin + gap))?;
            Ok((d.int(x).max() as i64) + gap <= d.int(y).min() as i64)
        }
        Relop::Ge => rel_vv(d, y, Relop::Le, x),
        Relop::Gt => rel_vv(d, y, Relop::Lt, x),
    }
}

pub(crate) fn enforce_rel(
    d: &mut Domains,
    x: Operand,
    op: Relop,
    y: Operand,
) -> Result<bool, Wipeout> {
    match (x, y) {
        (Operand::Var(x), Operand::Var(y)) => rel_vv(d, x, op, y),
        (Operand::Var(x), Operand::Const(c)) => rel_vc(d, x, op, c).map(|_| true),
        (Operand::Const(c), Operand::Var(y)) => rel_vc(d, y, op.flip(), c).map(|_| true),
        (Operand::Const(a), Operand::Const(b)) => {
            if op.holds(a, b) {
                Ok(true)
            } else {
                Err(Wipeout)
            }
        }
    }
}

fn bounds(d: &Domains, o: Operand) -> (i64, i64) {
    match o {
        Operand::Var(v) => {
            let dom = d.int(v);
            (dom.min() as i64, dom.max() as i64)
        }
        Operand::Const(c) => (c, c),
    }
}

/// Domain entailment of `x op y`.
pub(crate) fn entail_rel(d: &Domains, x: Operand, op: Relop, y: Operand) -> Truth {
    if let (Operand::Var(a), Operand::Var(b)) = (x, y) {
        if a == b {
            return Truth::from_bool(op.holds(0, 0));
        }
    }
    let (xl, xh) = bounds(d, x);
    let (yl, yh) = bounds(d, y);
    match op {
        Relop::Eq | Relop::Ne => {
            let eq = if xl == xh && yl == yh && xl == yl {
                Truth::True
            } else {
                let disjoint = match (x, y) {
                    (Operand::Var(a), Operand::Var(b)) => d.int(a).disjoint(d.int(b)),
                    (Operand::Var(a), Operand::Const(c)) | (Operand::Const(c), Operand::Var(a)) => {
                        !(c >= i32::MIN as i64
                            && c <= i32::MAX as i64
                            && d.int(a).contains(c as i32))
                    }
                    (Operand::Const(a), Operand::Const(b)) => a != b,
                };
                if disjoint {
                    Truth::False
                } else {
                    Truth::Unknown
                }
            };
            if op == Relop::Eq {
                eq
            } else {
                eq.negate()
            }
        }
        Relop::Le => {
            if xh <= yl {
                Truth::True
            } else if xl > yh {
                Truth::False
            } else {
                Truth::Unknown
            }
        }
        Relop::Lt => {
            if xh < yl {
                Truth::True
            } else if xl >= yh {
                Truth::False
            } else {
                Truth::Unknown
            }
        }
        Relop::Ge => entail_rel(d, y, Relop::Le, x),
        Relop::Gt => entail_rel(d, y, Relop::Lt, x),
    }
}

pub(crate) fn entail_in(d: &Domains, elem: Operand, set: VarId) -> Truth {
    let s = d.set(set);
    match elem {
        Operand::Const(c) => {
            let c = match i32::try_from(c) {
                Ok(c) => c,
                Err(_) => return Truth::False,
            };
            if s.glb().contains(&c) {
                Truth::True
            } else if !s.lub().contains(&c) {
                Truth::False
            } else {
                Truth::Unknown
            }
        }
        Operand::Var(e) => {
            let dom = d.int(e);
            if dom.size() <= s.glb().len() as u64 && dom.values().all(|v| s.glb().contains(&v)) {
                Truth::True
            } else if s.lub().iter().all(|&v| !dom.contains(v)) {
                Truth::False
            } else {
                Truth::Unknown
            }
        }
    }
}

fn member(d: &mut Domains, elem: VarId, set: VarId, positive: bool) -> Result<bool, Wipeout> {
    if positive {
        let lub = IntDomain::from_values(d.set(set).lub().iter().copied()).ok_or(Wipeout)?;
        d.narrow_int(elem, |dom| dom.intersect(&lub))?;
        if let Some(v) = d.int(elem).value() {
            d.include(set, v)?;
            return Ok(true);
        }
    } else {
        let glb: Vec<i32> = d.set(set).glb().iter().copied().collect();
        d.narrow_int(elem, |dom| {
            let mut changed = false;
            for v in &glb {
                changed |= dom.remove(*v as i64)?;
            }
            Ok(changed)
        })?;
        if let Some(v) = d.int(elem).value() {
            d.exclude(set, v)?;
            return Ok(true);
        }
    }
    Ok(false)
}

fn set_minus(d: &mut Domains, a: VarId, b: VarId, c: VarId) -> Result<bool, Wipeout> {
    loop {
        let mut changed = false;
        // glb(c) ⊇ glb(a) \ lub(b)
        let add: Vec<i32> = d
            .set(a)
            .glb()
            .iter()
            .copied()
            .filter(|v| !d.set(b).lub().contains(v))
            .collect();
        for v in add {
            changed |= d.include(c, v)?;
        }
        // lub(c) ⊆ lub(a) \ glb(b)
        let drop: Vec<i32> = d
            .set(c)
            .lub()
            .iter()
            .copied()
            .filter(|v| !d.set(a).lub().contains(v) || d.set(b).glb().contains(v))
            .collect();
        for v in drop {
            changed |= d.exclude(c, v)?;
        }
        // glb(a) ⊇ glb(c); lub(b) ∩ glb(c) = ∅
        let cglb: Vec<i32> = d.set(c).glb().iter().copied().collect();
        for v in cglb {
            changed |= d.include(a, v)?;
            changed |= d.exclude(b, v)?;
        }
        // lub(a) ⊆ lub(c) ∪ lub(b)
        let drop: Vec<i32> = d
            .set(a)
            .lub()
            .iter()
            .copied()
            .filter(|v| !d.set(c).lub().contains(v) && !d.set(b).lub().contains(v))
            .collect();
        for v in drop {
            changed |= d.exclude(a, v)?;
        }
        // glb(b) ⊇ glb(a) \ lub(c)
        let add: Vec<i32> = d
            .set(a)
            .glb()
            .iter()
            .copied()
            .filter(|v| !d.set(c).lub().contains(v))
            .collect();
        for v in add {
            changed |= d.include(b, v)?;
        }
        if !changed {
            break;
        }
    }
    Ok(d.set(a).is_assigned() && d.set(b).is_assigned() && d.set(c).is_assigned())
}

fn distinct(d: &mut Domains, vars: &[VarId]) -> Result<bool, Wipeout> {
    let mut done = vec![false; vars.len()];
    loop {
        let mut progress = false;
        for i in 0..vars.len() {
            if done[i] {
                continue;
            }
            let Some(v) = d.int(vars[i]).value() else {
                continue;
            };
            done[i] = true;
            progress = true;
            for (j, &other) in vars.iter().enumerate() {
                if j != i && other != vars[i] {
                    d.narrow_int(other, |dom| dom.remove(v as i64))?;
                } else if j != i {
                    return Err(Wipeout);
                }
            }
        }
        if !progress {
            break;
        }
    }
    Ok(done.iter().all(|&x| x))
}

fn term_bounds(d: &Domains, a: i64, v: VarId) -> (i128, i128) {
    let dom = d.int(v);
    let (lo, hi) = (a as i128 * dom.min() as i128, a as i128 * dom.max() as i128);
    if lo <= hi {
        (lo, hi)
    } else {
        (hi, lo)
    }
}

fn clamp64(v: i128) -> i64 {
    v.clamp(i64::MIN as i128, i64::MAX as i128) as i64
}

/// `sum <= rhs`, returns entailment.
fn linear_le(d: &mut Domains, terms: &[(i64, VarId)], rhs: i128) -> Result<bool, Wipeout> {
    let mut min_sum: i128 = terms.iter().map(|&(a, v)| term_bounds(d, a, v).0).sum();
    if min_sum > rhs {
        return Err(Wipeout);
    }
    for &(a, v) in terms {
        if a == 0 {
            continue;
        }
        let (tmin, _) = term_bounds(d, a, v);
        let slack = rhs - (min_sum - tmin);
        if a > 0 {
            let bound = clamp64(Integer::div_floor(&slack, &(a as i128)));
            d.narrow_int(v, |dom| dom.restrict_max(bound))?;
        } else {
            let bound = clamp64(Integer::div_ceil(&slack, &(a as i128)));
            d.narrow_int(v, |dom| dom.restrict_min(bound))?;
        }
        let (nmin, _) = term_bounds(d, a, v);
        min_sum += nmin - tmin;
    }
    let max_sum: i128 = terms.iter().map(|&(a, v)| term_bounds(d, a, v).1).sum();
    Ok(max_sum <= rhs)
}

fn linear(d: &mut Domains, terms: &[(i64, VarId)], op: Relop, rhs: i64) -> Result<bool, Wipeout> {
    match op {
        Relop::Le => linear_le(d, terms, rhs as i128),
        Relop::Eq => {
            let neg: Vec<(i64, VarId)> = terms.iter().map(|&(a, v)| (-a, v)).collect();
            loop {
                let before: Vec<(i64, i64)> = terms
                    .iter()
                    .map(|&(_, v)| (d.int(v).min() as i64, d.int(v).max() as i64))
                    .collect();
                let a = linear_le(d, terms, rhs as i128)?;
                let b = linear_le(d, &neg, -(rhs as i128))?;
                if a && b {
                    return Ok(true);
                }
                let after: Vec<(i64, i64)> = terms
                    .iter()
                    .map(|&(_, v)| (d.int(v).min() as i64, d.int(v).max() as i64))
                    .collect();
                if before == after {
                    return Ok(false);
                }
            }
        }
        Relop::Ne => {
            let mut rest: i128 = 0;
            let mut open: Option<(i64, VarId)> = None;
            for &(a, v) in terms {
                match d.int(v).value() {
                    Some(x) => rest += a as i128 * x as i128,
                    None => {
                        if open.is_some() {
                            return Ok(false);
                        }
                        open = Some((a, v));
                    }
                }
            }
            match open {
                None => {
                    if rest == rhs as i128 {
                        Err(Wipeout)
                    } else {
                        Ok(true)
                    }
                }
                Some((a, v)) => {
                    let r = rhs as i128 - rest;
                    if a != 0 && r % a as i128 == 0 {
                        let x = clamp64(r / a as i128);
                        d.narrow_int(v, |dom| dom.remove(x))?;
                    }
                    Ok(a != 0 || r != 0)
                }
            }
        }
        _ => unreachable!("linear ops are normalized at post time"),
    }
}

/// Conjunction (or disjunction when `or` is set) of booleans reified into `b`.
fn bool_and(d: &mut Domains, xs: &[VarId], b: VarId, or: bool) -> Result<bool, Wipeout> {
    // For OR, reason on the dual: b = ¬AND(¬x).
    let (unit, zero) = if or { (0, 1) } else { (1, 0) };
    let mut open = Vec::new();
    for &x in xs {
        match d.int(x).value() {
            Some(v) if v == zero => {
                d.narrow_int(b, |dom| dom.assign(zero as i64))?;
                return Ok(true);
            }
            Some(_) => {}
            None => open.push(x),
        }
    }
    if open.is_empty() {
        d.narrow_int(b, |dom| dom.assign(unit as i64))?;
        return Ok(true);
    }
    match d.int(b).value() {
        Some(v) if v == unit => {
            for x in open {
                d.narrow_int(x, |dom| dom.assign(unit as i64))?;
            }
            Ok(true)
        }
        Some(_) if open.len() == 1 => {
            d.narrow_int(open[0], |dom| dom.assign(zero as i64))?;
            Ok(true)
        }
        _ => Ok(false),
    }
}

fn bool_not(d: &mut Domains, a: VarId, b: VarId) -> Result<bool, Wipeout> {
    if let Some(v) = d.int(a).value() {
        d.narrow_int(b, |dom| dom.assign(1 - v as i64))?;
        return Ok(true);
    }
    if let Some(v) = d.int(b).value() {
        d.narrow_int(a, |dom| dom.assign(1 - v as i64))?;
        return Ok(true);
    }
    Ok(false)
}
