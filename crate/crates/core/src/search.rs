//! Copying depth-first and branch-and-bound search over [`Space`]s.
//!
//! Each choice point clones the space: the left child receives `x = v`
//! (or `v ∈ S`), the right child `x ≠ v` (or `v ∉ S`).

use crate::store::{Operand, Relop, Space, Status, Tell, ValSel, VarId, VarKind, VarSel};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Stats {
    pub nodes: u64,
    pub failures: u64,
    pub solutions: u64,
}

#[derive(Clone, Copy, Debug, Default)]
pub struct Limits {
    pub nodes: Option<u64>,
    pub solutions: Option<u64>,
}

enum Decision {
    Int(VarId, i32),
    Set(VarId, i32),
}

fn undecided_size(space: &Space, v: VarId) -> u64 {
    if v.kind() == VarKind::Set {
        let d = space.set_domain(v).expect("set var");
        (d.lub().len() - d.glb().len()) as u64
    } else {
        space.int_domain(v).expect("int var").size()
    }
}

fn choose(space: &Space) -> Option<Decision> {
    let b = space.branching()?;
    let mut open = b.vars.iter().copied().filter(|&v| {
        let n = undecided_size(space, v);
        if v.kind() == VarKind::Set {
            n > 0
        } else {
            n > 1
        }
    });
    let var = match b.var_sel {
        VarSel::InOrder => open.next()?,
        VarSel::SmallestDomain => open.min_by_key(|&v| undecided_size(space, v))?,
    };
    if var.kind() == VarKind::Set {
        let d = space.set_domain(var).expect("set var");
        let e = match b.val_sel {
            ValSel::Min => d.first_undecided()?,
            ValSel::Max => d
                .lub()
                .iter()
                .rev()
                .copied()
                .find(|e| !d.glb().contains(e))?,
        };
        Some(Decision::Set(var, e))
    } else {
        let d = space.int_domain(var).expect("int var");
        let v = match b.val_sel {
            ValSel::Min => d.min(),
            ValSel::Max => d.max(),
        };
        Some(Decision::Int(var, v))
    }
}

fn commit(space: &mut Space, d: &Decision, left: bool) {
    let tell = match *d {
        Decision::Int(x, v) => {
            let op = if left { Relop::Eq } else { Relop::Ne };
            Tell::Rel(x.into(), op, Operand::Const(v as i64))
        }
        Decision::Set(s, e) => {
            let e = Operand::Const(e as i64);
            if left {
                Tell::In(e, s)
            } else {
                Tell::NotIn(e, s)
            }
        }
    };
    space
        .tell(tell)
        .expect("branching vars belong to the space");
}

/// Depth-first search, leftmost child first.
pub struct Dfs {
    stack: Vec<Space>,
    stats: Stats,
    limits: Limits,
    stopped: bool,
}

impl Dfs {
    pub fn new(root: Space) -> Self {
        Self::with_limits(root, Limits::default())
    }

    pub fn with_limits(root: Space, limits: Limits) -> Self {
        Dfs {
            stack: vec![root],
            stats: Stats::default(),
            limits,
            stopped: false,
        }
    }

    pub fn stats(&self) -> Stats {
        self.stats
    }

    /// True when a node or solution limit cut the search short.
    pub fn stopped(&self) -> bool {
        self.stopped
    }

    fn over_limit(&self) -> bool {
        self.limits.nodes.is_some_and(|n| self.stats.nodes >= n)
            || self
                .limits
                .solutions
                .is_some_and(|n| self.stats.solutions >= n)
    }

    /// Next solution, or `None` when the tree is exhausted.
    pub fn next_solution(&mut self) -> Option<Space> {
        self.next_with(|_| {})
    }

    fn next_with(&mut self, mut before: impl FnMut(&mut Space)) -> Option<Space> {
        loop {
            if self.stopped {
                return None;
            }
            let mut space = self.stack.pop()?;
            if self.over_limit() {
                self.stopped = true;
                self.stack.clear();
                return None;
            }
            before(&mut space);
            self.stats.nodes += 1;
            if space.status() == Status::Failed {
                self.stats.failures += 1;
                continue;
            }
            match choose(&space) {
                None => {
                    self.stats.solutions += 1;
                    return Some(space);
                }
                Some(d) => {
                    let mut left = space.clone();
                    commit(&mut left, &d, true);
                    commit(&mut space, &d, false);
                    self.stack.push(space);
                    self.stack.push(left);
                }
            }
        }
    }
}

impl Iterator for Dfs {
    type Item = Space;

    fn next(&mut self) -> Option<Space> {
        self.next_solution()
    }
}

/// Branch and bound minimizing an integer variable. Every emitted solution
/// is strictly cheaper than the previous one.
pub struct Bab {
    dfs: Dfs,
    cost: VarId,
    best: Option<i64>,
}

impl Bab {
    pub fn new(root: Space, cost: VarId) -> Self {
        Bab {
            dfs: Dfs::new(root),
            cost,
            best: None,
        }
    }

    pub fn stats(&self) -> Stats {
        self.dfs.stats()
    }

    pub fn next_solution(&mut self) -> Option<Space> {
        let (cost, best) = (self.cost, self.best);
        let sol = self.dfs.next_with(|s| {
            if let Some(b) = best {
                s.tell(Tell::Rel(cost.into(), Relop::Lt, Operand::Const(b)))
                    .expect("cost var belongs to the space");
            }
        })?;
        self.best = Some(sol.int_domain(cost).expect("int cost").min() as i64);
        Some(sol)
    }

    /// Runs to exhaustion and returns the optimal solution, if any.
    pub fn best(mut self) -> Option<Space> {
        let mut last = None;
        while let Some(s) = self.next_solution() {
            last = Some(s);
        }
        last
    }
}
