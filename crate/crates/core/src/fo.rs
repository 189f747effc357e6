//! Incremental factor oracle over integer symbols.

use std::collections::BTreeMap;
use std::fmt::Write;

use serde::Serialize;
use thiserror::Error;

pub type Symbol = i64;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("state {state} out of range (oracle has {m} symbols)")]
pub struct RangeError {
    pub state: usize,
    pub m: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct FactorOracle {
    /// Factor links out of each state, `m + 1` rows.
    delta: Vec<BTreeMap<Symbol, usize>>,
    /// Suffix links; `suffix[0] == -1`.
    suffix: Vec<i64>,
    seq: Vec<Symbol>,
    /// Suffix-chain states visited by all `add` calls so far.
    steps: u64,
}

#[derive(Serialize)]
struct Dump<'a> {
    m: usize,
    delta: Vec<[i64; 3]>,
    suffix: &'a [i64],
}

impl FactorOracle {
    pub fn new() -> Self {
        FactorOracle {
            delta: vec![BTreeMap::new()],
            suffix: vec![-1],
            seq: Vec::new(),
            steps: 0,
        }
    }

    pub fn from_symbols(s: &[Symbol]) -> Self {
        let mut fo = FactorOracle::new();
        for &c in s {
            fo.add(c);
        }
        fo
    }

    /// Appends `sigma`, creating state `m + 1`.
    pub fn add(&mut self, sigma: Symbol) {
        let i = self.seq.len() + 1;
        self.seq.push(sigma);
        self.delta.push(BTreeMap::new());
        self.delta[i - 1].insert(sigma, i);
        let mut k = self.suffix[i - 1];
        let mut link = 0;
        while k > -1 {
            self.steps += 1;
            let row = &mut self.delta[k as usize];
            if let Some(&j) = row.get(&sigma) {
                link = j as i64;
                break;
            }
            row.insert(sigma, i);
            k = self.suffix[k as usize];
        }
        self.suffix.push(link);
    }

    /// Number of symbols learned.
    pub fn len(&self) -> usize {
        self.seq.len()
    }

    pub fn is_empty(&self) -> bool {
        self.seq.is_empty()
    }

    pub fn symbols(&self) -> &[Symbol] {
        &self.seq
    }

    fn check(&self, state: usize) -> Result<(), RangeError> {
        if state <= self.len() {
            Ok(())
        } else {
            Err(RangeError {
                state,
                m: self.len(),
            })
        }
    }

    pub fn transitions(&self, state: usize) -> Result<&BTreeMap<Symbol, usize>, RangeError> {
        self.check(state)?;
        Ok(&self.delta[state])
    }

    pub fn delta(&self, state: usize, sigma: Symbol) -> Result<Option<usize>, RangeError> {
        Ok(self.transitions(state)?.get(&sigma).copied())
    }

    pub fn suffix(&self, state: usize) -> Result<i64, RangeError> {
        self.check(state)?;
        Ok(self.suffix[state])
    }

    pub fn suffixes(&self) -> &[i64] {
        &self.suffix
    }

    /// Walks `word` from state 0.
    pub fn is_factor(&self, word: &[Symbol]) -> bool {
        let mut q = 0;
        for c in word {
            match self.delta[q].get(c) {
                Some(&j) => q = j,
                None => return false,
            }
        }
        true
    }

    /// Total number of factor links.
    pub fn link_count(&self) -> usize {
        self.delta.iter().map(BTreeMap::len).sum()
    }

    pub fn chain_steps(&self) -> u64 {
        self.steps
    }

    /// `(from, symbol, to)` for every factor link, by state then symbol.
    pub fn links(&self) -> Vec<(usize, Symbol, usize)> {
        self.delta
            .iter()
            .enumerate()
            .flat_map(|(k, row)| row.iter().map(move |(&c, &j)| (k, c, j)))
            .collect()
    }

    /// Graphviz text: factor links solid, suffix links dashed.
    pub fn to_dot(&self) -> String {
        let mut s = String::from("digraph fo {\n  rankdir=LR;\n");
        for q in 0..=self.len() {
            let _ = writeln!(s, "  {q};");
        }
        for (k, c, j) in self.links() {
            let _ = writeln!(s, "  {k} -> {j} [label=\"{c}\"];");
        }
        for (i, &t) in self.suffix.iter().enumerate().skip(1) {
            let _ = writeln!(s, "  {i} -> {t} [style=dashed];");
        }
        s.push_str("}\n");
        s
    }

    /// `{"m": …, "delta": [[from, symbol, to], …], "suffix": […]}`.
    pub fn to_json(&self) -> serde_json::Value {
        let d = Dump {
            m: self.len(),
            delta: self
                .links()
                .into_iter()
                .map(|(k, c, j)| [k as i64, c, j as i64])
                .collect(),
            suffix: &self.suffix,
        };
        serde_json::to_value(d).expect("plain data")
    }

    /// One row per state: `state  suffix  symbol->target …`.
    pub fn table(&self) -> String {
        let mut s = String::from("state\tsuffix\tlinks\n");
        for (q, row) in self.delta.iter().enumerate() {
            let links: Vec<String> = row.iter().map(|(c, j)| format!("{c}->{j}")).collect();
            let _ = writeln!(s, "{q}\t{}\t{}", self.suffix[q], links.join(" "));
        }
        s
    }
}
