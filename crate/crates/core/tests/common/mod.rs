//! Generators and brute-force references shared by the integration tests.
#![allow(dead_code)]

use std::collections::BTreeSet;

use rand::Rng;

use ntccrt::models::graph_path::{self, GraphSpec, PathResult};
use ntccrt::models::knets::{KnetProblem, Label};
use ntccrt::ntcc::cells::{CellOp, CellProgram};
use ntccrt::ntcc::Trace;
use ntccrt::store::{Condition, Operand, Relop, Space, VarId};
use ntccrt::term::{Expr, Lambda};

pub const RELOPS: [Relop; 6] = [
    Relop::Eq,
    Relop::Ne,
    Relop::Lt,
    Relop::Le,
    Relop::Gt,
    Relop::Ge,
];

/// `vertices` in 2..=max, each ordered pair an edge with probability `density`.
pub fn random_digraph(rng: &mut impl Rng, max: u32, density: f64) -> GraphSpec {
    let n = rng.random_range(2..=max);
    let mut edges = BTreeSet::new();
    for i in 0..n {
        for j in 0..n {
            if i != j && rng.random_bool(density) {
                edges.insert((i, j));
            }
        }
    }
    GraphSpec {
        edges,
        source: rng.random_range(0..n),
        target: rng.random_range(0..n),
    }
}

/// Path found iff reachable, and any path is a walk.
pub fn graph_agrees(g: &GraphSpec) -> Result<(), String> {
    let got = graph_path::run(g).map_err(|e| e.to_string())?;
    let reach = graph_path::bfs_reachable(g);
    match got {
        PathResult::Path(p) if reach && graph_path::is_walk(g, &p) => Ok(()),
        PathResult::Unreachable if !reach => Ok(()),
        other => Err(format!("{g:?}: got {other:?}, reachable = {reach}")),
    }
}

/// Cells `c0..ck` in 0..=40 with one update per unit at distinct units.
pub fn random_cell_program(rng: &mut impl Rng, units: u32) -> CellProgram {
    let k = rng.random_range(1..=3);
    let init = (0..k).map(|_| rng.random_range(0..=5)).collect();
    let mut ops = Vec::new();
    for u in 0..units {
        if !rng.random_bool(0.5) {
            continue;
        }
        let add = rng.random_range(0..=3);
        let g = Lambda::new(
            "v",
            Expr::Add(Box::new(Expr::param("v")), Box::new(Expr::Int(add))),
        );
        let x = rng.random_range(0..k);
        let y = rng.random_range(0..k);
        let op = if k > 1 && x != y && rng.random_bool(0.3) {
            CellOp::Exch { x, y, g }
        } else {
            CellOp::Assign { cell: x, g }
        };
        ops.push((u, op));
    }
    CellProgram {
        init,
        ops,
        lo: 0,
        hi: 40,
    }
}

/// Values of `c0..ck` per unit.
pub fn cell_columns(t: &Trace, k: usize) -> Vec<Vec<Option<i32>>> {
    t.units
        .iter()
        .map(|u| (0..k).map(|i| u.int(&format!("c{i}"))).collect())
        .collect()
}

/// Every word over `alphabet` of length `0..=max`.
pub fn words(alphabet: &[i64], max: usize) -> Vec<Vec<i64>> {
    let mut out = vec![Vec::new()];
    let mut layer = vec![Vec::new()];
    for _ in 0..max {
        let mut next = Vec::new();
        for w in &layer {
            for &c in alphabet {
                let mut w2: Vec<i64> = w.clone();
                w2.push(c);
                next.push(w2);
            }
        }
        out.extend(next.iter().cloned());
        layer = next;
    }
    out
}

fn random_operand(rng: &mut impl Rng, vars: &[VarId]) -> Operand {
    if rng.random_bool(0.7) {
        Operand::Var(vars[rng.random_range(0..vars.len())])
    } else {
        Operand::Const(rng.random_range(-1..=6))
    }
}

/// Random condition over integer `vars` and small constants.
pub fn random_condition<R: Rng>(rng: &mut R, vars: &[VarId], depth: u32) -> Condition {
    if depth == 0 || rng.random_bool(0.5) {
        let x = random_operand(rng, vars);
        let y = random_operand(rng, vars);
        return Condition::Rel(x, RELOPS[rng.random_range(0..6)], y);
    }
    let some = |rng: &mut R| -> Vec<Condition> {
        (0..rng.random_range(1..=3))
            .map(|_| random_condition(rng, vars, depth - 1))
            .collect()
    };
    match rng.random_range(0..3) {
        0 => Condition::And(some(rng)),
        1 => Condition::Or(some(rng)),
        _ => Condition::Not(Box::new(random_condition(rng, vars, depth - 1))),
    }
}

/// Truth of `c` under a full assignment.
pub fn eval_condition(c: &Condition, value: &dyn Fn(VarId) -> i64) -> bool {
    let op = |o: &Operand| match o {
        Operand::Var(v) => value(*v),
        Operand::Const(k) => *k,
    };
    match c {
        Condition::True => true,
        Condition::False => false,
        Condition::Rel(x, r, y) => r.holds(op(x), op(y)),
        Condition::In(..) => unimplemented!("integer conditions only"),
        Condition::And(cs) => cs.iter().all(|c| eval_condition(c, value)),
        Condition::Or(cs) => cs.iter().any(|c| eval_condition(c, value)),
        Condition::Not(c) => !eval_condition(c, value),
    }
}

/// Every point of the product of the current domains of `vars`.
pub fn assignments(space: &Space, vars: &[VarId]) -> Vec<Vec<i64>> {
    let mut out = vec![Vec::new()];
    for &v in vars {
        let vals: Vec<i64> = space
            .int_domain(v)
            .unwrap()
            .values()
            .map(i64::from)
            .collect();
        out = out
            .into_iter()
            .flat_map(|p| {
                vals.iter().map(move |&x| {
                    let mut q = p.clone();
                    q.push(x);
                    q
                })
            })
            .collect();
    }
    out
}

/// Labels agree with their pitch arithmetic.
pub fn labels_hold(p: &KnetProblem, labels: &[Vec<Label>]) -> bool {
    let n = p.pitches.len();
    (0..n).all(|i| {
        (0..n).all(|j| {
            let (a, b) = (p.pitches[i], p.pitches[j]);
            match labels[i][j] {
                Label::None => true,
                Label::T(m) => (a + m) % 12 == b,
                Label::I(v) => (a + b) % 12 == v,
            }
        })
    })
}
