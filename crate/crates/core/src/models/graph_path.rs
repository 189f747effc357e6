//! Path finding by forward and backward signals in one CCP run.
//!
//! Each edge `(i, j)` is three agents: forward reachability flows from `i`
//! to `j`, backward reachability flows from `j` to `i`, and when both meet
//! on the edge it records `j` in the successor set `S[i]`.

use std::collections::{BTreeSet, VecDeque};

use crate::ccp::{run_ccp, ExecError, StoreSnapshot, VarValue};
use crate::program::Program;
use crate::term::{Constraint, Expr, Guard, Process, Term, VarRef, VarType};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GraphSpec {
    pub edges: BTreeSet<(u32, u32)>,
    pub source: u32,
    pub target: u32,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PathResult {
    Path(Vec<u32>),
    Unreachable,
}

impl GraphSpec {
    pub fn new(edges: impl IntoIterator<Item = (u32, u32)>, source: u32, target: u32) -> Self {
        GraphSpec {
            edges: edges.into_iter().collect(),
            source,
            target,
        }
    }

    fn vertices(&self) -> usize {
        self.edges
            .iter()
            .flat_map(|&(i, j)| [i, j])
            .chain([self.source, self.target])
            .max()
            .unwrap_or(0) as usize
            + 1
    }
}

fn at(name: &str, v: u32) -> VarRef {
    VarRef::indexed(name, vec![Expr::Int(v as i64)])
}

fn on(name: &str, v: u32) -> Guard {
    Guard::eq(at(name, v), 1)
}

/// The CCP program for `spec`.
pub fn program(spec: &GraphSpec) -> Program {
    let n = spec.vertices();
    let mut agents = Vec::new();
    for &(i, j) in &spec.edges {
        agents.push(Process::when(
            on("fwd", i),
            Process::tell(Constraint::eq(at("fwd", j), 1)),
        ));
        agents.push(Process::when(
            on("back", j),
            Process::tell(Constraint::eq(at("back", i), 1)),
        ));
        agents.push(Process::when(
            Guard::And(vec![on("fwd", i), on("back", j)]),
            Process::par(vec![
                Process::tell(Constraint::eq("path", 1)),
                Process::tell(Constraint::In(Term::int(j as i64), at("S", i))),
            ]),
        ));
    }
    agents.push(Process::tell(Constraint::eq(at("fwd", spec.source), 1)));
    agents.push(Process::tell(Constraint::eq(at("back", spec.target), 1)));
    let mut p = Program::new(Process::par(agents));
    p.declare_array("fwd", VarType::Bool, vec![n])
        .expect("fresh");
    p.declare_array("back", VarType::Bool, vec![n])
        .expect("fresh");
    p.declare("path", VarType::Bool).expect("fresh");
    p.declare_array(
        "S",
        VarType::Set {
            lo: 0,
            hi: n as i64 - 1,
        },
        vec![n],
    )
    .expect("fresh");
    p
}

fn successors(snap: &StoreSnapshot, v: u32) -> Vec<u32> {
    match snap.get(&format!("S[{v}]")) {
        Some(VarValue::Set { glb, .. }) => glb.iter().map(|&x| x as u32).collect(),
        _ => Vec::new(),
    }
}

/// Runs the program and reads a path off the successor sets, always taking
/// the smallest unvisited successor and backing up at dead ends.
pub fn run(spec: &GraphSpec) -> Result<PathResult, ExecError> {
    if spec.source == spec.target {
        return Ok(PathResult::Path(vec![spec.source]));
    }
    let p = program(spec);
    let snap = run_ccp(&p.registry, &p.procedures, &p.main)?;
    if snap.get("path") != Some(&VarValue::Int(1)) {
        return Ok(PathResult::Unreachable);
    }
    let mut path = vec![spec.source];
    let mut seen = BTreeSet::from([spec.source]);
    while let Some(&v) = path.last() {
        if v == spec.target {
            return Ok(PathResult::Path(path));
        }
        match successors(&snap, v).into_iter().find(|w| !seen.contains(w)) {
            Some(w) => {
                seen.insert(w);
                path.push(w);
            }
            None => {
                path.pop();
            }
        }
    }
    // The successor sets only hold edges on some source-to-target path.
    unreachable!("successor sets lead to the target")
}

/// Breadth-first reachability, used as the reference.
pub fn bfs_reachable(spec: &GraphSpec) -> bool {
    let mut seen = BTreeSet::from([spec.source]);
    let mut q = VecDeque::from([spec.source]);
    while let Some(v) = q.pop_front() {
        if v == spec.target {
            return true;
        }
        for &(i, j) in spec.edges.range((v, 0)..=(v, u32::MAX)) {
            debug_assert_eq!(i, v);
            if seen.insert(j) {
                q.push_back(j);
            }
        }
    }
    false
}

/// True if consecutive vertices of `path` are edges and it runs from source
/// to target.
pub fn is_walk(spec: &GraphSpec, path: &[u32]) -> bool {
    path.first() == Some(&spec.source)
        && path.last() == Some(&spec.target)
        && path.windows(2).all(|w| spec.edges.contains(&(w[0], w[1])))
}

/// One `i j` pair per line; `#` starts a comment.
pub fn parse_edges(text: &str) -> Result<Vec<(u32, u32)>, String> {
    let mut out = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let nums: Vec<&str> = line.split_whitespace().collect();
        let parse = |s: &str| {
            s.parse::<u32>()
                .map_err(|_| format!("line {}: bad vertex `{s}`", n + 1))
        };
        match nums.as_slice() {
            [a, b] => out.push((parse(a)?, parse(b)?)),
            _ => return Err(format!("line {}: expected two vertices", n + 1)),
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chain() {
        let g = GraphSpec::new([(1, 2), (2, 3), (3, 5)], 1, 5);
        assert_eq!(run(&g).unwrap(), PathResult::Path(vec![1, 2, 3, 5]));
        let g = GraphSpec::new([(1, 2), (3, 5)], 1, 5);
        assert_eq!(run(&g).unwrap(), PathResult::Unreachable);
        assert!(!bfs_reachable(&g));
        let g = GraphSpec::new([(1, 2)], 4, 4);
        assert_eq!(run(&g).unwrap(), PathResult::Path(vec![4]));
    }

    #[test]
    fn cycles_do_not_trap_the_walk() {
        // 0 -> 1 -> 0 and 1 -> 2; the smallest successor of 1 is 0.
        let g = GraphSpec::new([(0, 1), (1, 0), (1, 2)], 0, 2);
        assert_eq!(run(&g).unwrap(), PathResult::Path(vec![0, 1, 2]));
    }

    #[test]
    fn edge_files() {
        assert_eq!(
            parse_edges("# g\n1 2\n\n2 3 # x\n").unwrap(),
            vec![(1, 2), (2, 3)]
        );
        assert!(parse_edges("1\n").is_err());
        assert!(parse_edges("1 -2\n").is_err());
    }
}
