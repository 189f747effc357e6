//! K-net search: label the edges between pitch classes with transpositions
//! and inversions.
//!
//! `x[i][j]` is 0 (no edge), 1 (transposition) or 2 (inversion). The
//! matrix has a zero diagonal and is symmetric, at least `2n` cells are
//! nonzero and exactly `2K` cells are inversions.

use std::collections::{BTreeSet, VecDeque};
use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::search::Dfs;
use crate::store::{Branching, Global, Operand, Relop, Space, Tell, ValSel, VarId, VarSel};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum KnetError {
    #[error("need at least two pitches, got {0}")]
    TooFew(usize),
    #[error("pitch class {0} is not in 0..12")]
    Pitch(u8),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KnetProblem {
    pub pitches: Vec<u8>,
    /// Desired number of inversions.
    pub k: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Label {
    None,
    /// `(a + m) mod 12 = b`
    T(u8),
    /// `(a + b) mod 12 = v`
    I(u8),
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Label::None => f.write_str("--"),
            Label::T(m) => write!(f, "T{m}"),
            Label::I(v) => write!(f, "I{v}"),
        }
    }
}

impl Serialize for Label {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Solution {
    pub matrix: Vec<Vec<u8>>,
    pub labels: Vec<Vec<Label>>,
}

impl Solution {
    fn decode(pitches: &[u8], matrix: Vec<Vec<u8>>) -> Solution {
        let labels = matrix
            .iter()
            .enumerate()
            .map(|(i, row)| {
                row.iter()
                    .enumerate()
                    .map(|(j, &x)| {
                        let (a, b) = (pitches[i], pitches[j]);
                        match x {
                            1 => Label::T((b + 12 - a) % 12),
                            2 => Label::I((a + b) % 12),
                            _ => Label::None,
                        }
                    })
                    .collect()
            })
            .collect();
        Solution { matrix, labels }
    }

    /// One line per row, labels separated by spaces.
    pub fn render(&self) -> String {
        self.labels
            .iter()
            .map(|row| {
                row.iter()
                    .map(|l| format!("{:<3}", l.to_string()))
                    .collect::<Vec<_>>()
                    .join(" ")
                    .trim_end()
                    .to_string()
            })
            .collect::<Vec<_>>()
            .join("\n")
    }
}

impl KnetProblem {
    pub fn new(pitches: Vec<u8>, k: usize) -> Result<Self, KnetError> {
        if pitches.len() < 2 {
            return Err(KnetError::TooFew(pitches.len()));
        }
        if let Some(&p) = pitches.iter().find(|&&p| p >= 12) {
            return Err(KnetError::Pitch(p));
        }
        Ok(KnetProblem { pitches, k })
    }

    fn n(&self) -> usize {
        self.pitches.len()
    }

    /// The root space with all constraints and a branching over the matrix
    /// in row order.
    pub fn space(&self) -> Space {
        let n = self.n();
        let mut s = Space::new();
        let x: Vec<Vec<VarId>> = (0..n)
            .map(|_| {
                (0..n)
                    .map(|_| s.new_int_var(0, 2).expect("small domain"))
                    .collect()
            })
            .collect();
        let tell = |s: &mut Space, t: Tell| {
            // A failure here just leaves the space failed.
            let _ = s.tell(t);
        };
        for (i, row) in x.iter().enumerate() {
            tell(
                &mut s,
                Tell::Rel(row[i].into(), Relop::Eq, Operand::Const(0)),
            );
            for (j, &v) in row.iter().enumerate().skip(i + 1) {
                tell(&mut s, Tell::Rel(v.into(), Relop::Eq, x[j][i].into()));
            }
        }
        let all: Vec<VarId> = x.iter().flatten().copied().collect();
        let mut post = |g: Global| {
            let _ = s.post_global(g);
        };
        post(Global::Count {
            vars: all.clone(),
            cmp: Relop::Ne,
            value: 0,
            op: Relop::Ge,
            rhs: 2 * n as i64,
        });
        post(Global::Count {
            vars: all.clone(),
            cmp: Relop::Eq,
            value: 2,
            op: Relop::Eq,
            rhs: 2 * self.k as i64,
        });
        s.post_branching(Branching {
            vars: all,
            var_sel: VarSel::InOrder,
            val_sel: ValSel::Min,
        });
        s
    }

    /// Enumerates solutions in search order. `connected` drops labelings
    /// whose edges do not connect all pitches.
    pub fn solve(&self, limit: Option<usize>, connected: bool) -> Vec<Solution> {
        let n = self.n();
        let mut dfs = Dfs::new(self.space());
        let mut out = Vec::new();
        while limit.is_none_or(|l| out.len() < l) {
            let Some(sol) = dfs.next_solution() else {
                break;
            };
            let vars: Vec<VarId> = sol.vars().collect();
            let m: Vec<Vec<u8>> = (0..n)
                .map(|i| {
                    (0..n)
                        .map(|j| {
                            sol.value(vars[i * n + j])
                                .ok()
                                .flatten()
                                .expect("solutions are assigned") as u8
                        })
                        .collect()
                })
                .collect();
            if !connected || is_connected(&m) {
                out.push(Solution::decode(&self.pitches, m));
            }
        }
        out
    }

    /// Every symmetric `{0,1,2}` matrix satisfying the constraints, found
    /// by enumerating the upper triangle. Used as the reference.
    pub fn brute_force(&self, connected: bool) -> Vec<Vec<Vec<u8>>> {
        let n = self.n();
        let cells: Vec<(usize, usize)> = (0..n)
            .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
            .collect();
        let total = 3usize.pow(cells.len() as u32);
        let mut out = Vec::new();
        for code in 0..total {
            let mut m = vec![vec![0u8; n]; n];
            let mut c = code;
            for &(i, j) in &cells {
                let v = (c % 3) as u8;
                c /= 3;
                m[i][j] = v;
                m[j][i] = v;
            }
            let flat = m.iter().flatten();
            let nonzero = flat.clone().filter(|&&v| v != 0).count();
            let inversions = flat.filter(|&&v| v == 2).count();
            if nonzero >= 2 * n && inversions == 2 * self.k && (!connected || is_connected(&m)) {
                out.push(m);
            }
        }
        out
    }
}

fn is_connected(m: &[Vec<u8>]) -> bool {
    let n = m.len();
    let mut seen = BTreeSet::from([0]);
    let mut q = VecDeque::from([0]);
    while let Some(i) = q.pop_front() {
        for (j, &e) in m[i].iter().enumerate() {
            if e != 0 && seen.insert(j) {
                q.push_back(j);
            }
        }
    }
    seen.len() == n
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn three_pitches_one_inversion() {
        let p = KnetProblem::new(vec![3, 10, 11], 1).unwrap();
        let sols = p.solve(None, false);
        assert_eq!(sols.len(), 3);
        for s in &sols {
            let inv = s.matrix.iter().flatten().filter(|&&v| v == 2).count();
            assert_eq!(inv, 2);
        }
        let mut bf = p.brute_force(false);
        let mut got: Vec<_> = sols.into_iter().map(|s| s.matrix).collect();
        bf.sort();
        got.sort();
        assert_eq!(got, bf);
    }

    #[test]
    fn two_pitches_cannot_reach_2n_edges() {
        // Two off-diagonal cells can never make four nonzero entries.
        let p = KnetProblem::new(vec![3, 10], 0).unwrap();
        assert!(p.solve(None, false).is_empty());
        assert!(p.brute_force(false).is_empty());
    }

    #[test]
    fn labels() {
        let p = KnetProblem::new(vec![3, 10, 11], 0).unwrap();
        let sols = p.solve(None, false);
        assert_eq!(sols.len(), 1);
        assert_eq!(sols[0].labels[0][1], Label::T(7));
        assert_eq!(sols[0].labels[1][0], Label::T(5));
        assert_eq!(sols[0].render(), "--  T7  T8\nT5  --  T1\nT4  T11 --");
        let p = KnetProblem::new(vec![3, 10, 11], 3).unwrap();
        let sols = p.solve(None, false);
        assert_eq!(sols[0].labels[0][1], Label::I(1));
    }

    #[test]
    fn bad_problems() {
        assert_eq!(KnetProblem::new(vec![1], 0), Err(KnetError::TooFew(1)));
        assert_eq!(KnetProblem::new(vec![1, 12], 0), Err(KnetError::Pitch(12)));
        assert!(KnetProblem::new(vec![0, 1], 5)
            .unwrap()
            .solve(None, false)
            .is_empty());
    }
}
