//! Improvisation over a factor oracle learned by NTCC processes.
//!
//! The model is generated as DSL text and loaded like any other spec. Four
//! process families run side by side:
//!
//! * `Player j` waits for the j-th note on `note`, records it in `l[j]`
//!   and announces it through `go`.
//! * `Sync i` starts `Add i` once note `i` is known and state `i-1` has its
//!   suffix link.
//! * `Add i` / `Walk` / `Step` build the oracle: one factor link per
//!   suffix-chain state, one time unit per state visited.
//! * `Choice k` improvises from state `k`: on a `coin` of 1 it follows a
//!   factor link and outputs its symbol, on 0 it jumps back along `S[k]`.
//!
//! Variable encoding:
//!
//! | name | meaning |
//! |------|---------|
//! | `l[j]` | symbol of note `j`, as `pitch - lo` |
//! | `delta[k][a]` | target of the link from `k` on symbol `a`; `-1` while unknown |
//! | `S[i]` | suffix link; `-2` while unknown, `S[0] = -1` |
//! | `F[k]` | symbols with a link out of `k` |
//!
//! Every learned fact is told under `!` so that it survives into each
//! following store.

use std::fmt::Write;

use rand::Rng;
use serde::Serialize;
use thiserror::Error;

use crate::dsl::{self, DslError};
use crate::fo::FactorOracle;
use crate::ntcc::io::InputTell;
use crate::ntcc::{EngineConfig, EngineError, TimedEngine, Trace, UnitReport};
use crate::program::Program;
use crate::VarValue;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("n must be at least 1")]
    ZeroN,
    #[error("q must lie in [0, 1], got {0}")]
    Probability(f64),
    #[error("empty pitch range {lo}..{hi}")]
    Range { lo: i64, hi: i64 },
    #[error("note {0} is outside the pitch range")]
    Note(i64),
    #[error("{notes} notes do not fit in {states} states")]
    TooManyNotes { notes: usize, states: usize },
    #[error("n = {n} exceeds the {states} available states")]
    StartPastStates { n: usize, states: usize },
}

#[derive(Debug, Error)]
pub enum CcfomiError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("generated spec does not load: {0}")]
    Dsl(#[from] DslError),
    #[error(transparent)]
    Engine(#[from] EngineError),
}

#[derive(Clone, Debug, PartialEq)]
pub struct CcfomiConfig {
    /// Pitch played in each unit, `None` for silence. Without a script the
    /// player picks notes and pauses at random.
    pub script: Option<Vec<Option<i64>>>,
    /// Improvisation starts once note `n` has been played.
    pub n: usize,
    /// Probability of following a factor link rather than a suffix link.
    pub q: f64,
    pub horizon: u32,
    pub seed: u64,
    /// Oracle capacity: states `0..=states`.
    pub states: usize,
    pub lo: i64,
    pub hi: i64,
}

impl CcfomiConfig {
    /// Plays `notes` one per unit and leaves enough silent units for the
    /// last suffix chain to finish. Improvisation starts after the last
    /// note.
    pub fn learn(notes: &[i64]) -> CcfomiConfig {
        let lo = notes.iter().copied().min().unwrap_or(60);
        let hi = notes.iter().copied().max().unwrap_or(60);
        let m = notes.len();
        CcfomiConfig {
            script: Some(notes.iter().map(|&p| Some(p)).collect()),
            n: m.max(1),
            q: 0.5,
            horizon: (m + 3 * m + 2) as u32,
            seed: 0,
            states: m.max(1),
            lo,
            hi,
        }
    }

    fn alphabet(&self) -> i64 {
        self.hi - self.lo + 1
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.n == 0 {
            return Err(ConfigError::ZeroN);
        }
        if !(0.0..=1.0).contains(&self.q) {
            return Err(ConfigError::Probability(self.q));
        }
        if self.lo > self.hi {
            return Err(ConfigError::Range {
                lo: self.lo,
                hi: self.hi,
            });
        }
        if self.n > self.states {
            return Err(ConfigError::StartPastStates {
                n: self.n,
                states: self.states,
            });
        }
        if let Some(script) = &self.script {
            let notes: Vec<i64> = script.iter().flatten().copied().collect();
            if let Some(&p) = notes.iter().find(|&&p| p < self.lo || p > self.hi) {
                return Err(ConfigError::Note(p));
            }
            if notes.len() > self.states {
                return Err(ConfigError::TooManyNotes {
                    notes: notes.len(),
                    states: self.states,
                });
            }
        }
        Ok(())
    }

    /// The model as spec text.
    pub fn spec_text(&self) -> Result<String, ConfigError> {
        self.validate()?;
        let (lo, hi, n) = (self.lo, self.hi, self.n);
        let a_max = self.alphabet() - 1;
        let big_n = self.states;
        let mut s = String::new();
        let mut line = |t: String| {
            s.push_str(&t);
            s.push('\n');
        };
        line(format!("(declare-var note int {} {hi})", lo - 1));
        line("(declare-var coin int 0 1)".into());
        // One above the last state, so `go = n` stops holding after note n.
        line(format!("(declare-var go int 0 {})", big_n + 1));
        line(format!("(declare-var out int {lo} {hi})"));
        line("(declare-var moved bool)".into());
        line(format!("(declare-var at int 0 {big_n})"));
        line(format!("(declare-var pos int 0 {big_n})"));
        line(format!("(declare-var l int 0 {a_max} {})", big_n + 1));
        line(format!("(declare-var S int -2 {big_n} {})", big_n + 1));
        line(format!(
            "(declare-var delta int -1 {big_n} {} {})",
            big_n + 1,
            a_max + 1
        ));
        line(format!("(declare-var F set 0 {a_max} {})", big_n + 1));

        let play = format!(
            "(par (! (tell (= l[j] (- p {lo})))) (tell (= go j)) (! (tell (>= go j))) \
             (next (Player (+ j 1))))"
        );
        match self.script {
            Some(_) => line(format!(
                "(defproc Player (j)
                   (par (sum-for p {lo} {hi} (= note p) {play})
                        (unless (v>= note {lo}) (Player j))))"
            )),
            None => line(format!(
                "(defproc Player (j)
                   (when (v<= j {big_n})
                     (+ (sum-for p {lo} {hi} true {play}) (next (Player j)))))"
            )),
        }
        line(
            "(defproc Sync (i)
               (par (when (and (v>= S[(- i 1)] -1) (v>= go i))
                      (par (Add i) (next (Sync (+ i 1)))))
                    (unless (and (v>= S[(- i 1)] -1) (v>= go i)) (Sync i))))"
                .into(),
        );
        line(format!(
            "(defproc Add (i)
               (for a 0 {a_max}
                 (when (= l[i] a)
                   (par (! (tell (= delta[(- i 1)][a] i)))
                        (! (tell (in a F[(- i 1)])))
                        (Walk i (- i 1) a)))))"
        ));
        line(
            "(defproc Walk (i p a)
               (par (when (= S[p] -1) (! (tell (= S[i] 0))))
                    (for k 0 (- p 1) (when (= S[p] k) (Step i k a)))))"
                .into(),
        );
        line(
            "(defproc Step (i k a)
               (par (when (v>= delta[k][a] 0) (! (tell (= S[i] delta[k][a]))))
                    (unless (v>= delta[k][a] 0)
                      (par (! (tell (= delta[k][a] i)))
                           (! (tell (in a F[k])))
                           (Walk i k a)))))"
                .into(),
        );
        line(format!(
            "(defproc Choice (k)
               (par (sum-for a 0 {a_max} (and (or (= coin 1) (= S[k] -1)) (in a F[k]))
                      (par (tell (= out (+ a {lo}))) (tell (= moved 1))
                           (tell (= at k)) (tell (= pos delta[k][a]))
                           (for j 1 {big_n} (when (= delta[k][a] j) (next (Choice j))))))
                    (when (and (= coin 0) (v>= S[k] 0))
                      (par (tell (= moved 1)) (tell (= at k)) (tell (= pos S[k]))
                           (for j 0 {big_n} (when (= S[k] j) (next (Choice j))))))
                    (unless (= moved 1) (Choice k))))"
        ));
        line(format!(
            "(main (par (! (tell (= S[0] -1))) (Player 1) (Sync 1)
                        (! (when (= go {n}) (Choice {n})))))"
        ));
        Ok(s)
    }

    /// Environment input for unit `tu`: the scripted note and a fresh coin.
    fn inputs(&self, tu: u32, rng: &mut impl Rng) -> Vec<InputTell> {
        let mut out = Vec::new();
        let note = self
            .script
            .as_ref()
            .and_then(|s| s.get(tu as usize).copied().flatten());
        if let Some(p) = note {
            out.push(InputTell::eq("note", p));
        }
        out.push(InputTell::eq("coin", rng.random_bool(self.q) as i64));
        out
    }
}

/// Parses the generated spec.
pub fn build(cfg: &CcfomiConfig) -> Result<Program, CcfomiError> {
    Ok(dsl::load(&cfg.spec_text()?, &[])?)
}

/// One improvisation step: a factor link with its symbol, or a jump back.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Move {
    pub tu: u32,
    pub from: usize,
    pub to: usize,
    /// Output pitch; `None` for a suffix jump.
    pub symbol: Option<i64>,
}

/// The oracle as held by the store at some unit.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Learned {
    /// `(from, pitch, to)` sorted by state then pitch.
    pub links: Vec<(usize, i64, usize)>,
    /// Suffix links of the states learned so far, from state 0.
    pub suffix: Vec<i64>,
}

impl Learned {
    /// Exact comparison with a reference oracle.
    pub fn matches(&self, fo: &FactorOracle) -> bool {
        self.links == fo.links() && self.suffix == fo.suffixes()
    }
}

pub fn decode(report: &UnitReport, cfg: &CcfomiConfig) -> Learned {
    let mut links = Vec::new();
    for k in 0..=cfg.states {
        for a in 0..cfg.alphabet() {
            if let Some(j) = report.int(&format!("delta[{k}][{a}]")) {
                links.push((k, a + cfg.lo, j as usize));
            }
        }
    }
    let suffix = (0..=cfg.states)
        .map_while(|i| report.int(&format!("S[{i}]")).map(i64::from))
        .collect();
    Learned { links, suffix }
}

fn read_move(r: &UnitReport) -> Option<Move> {
    if r.int("moved") != Some(1) {
        return None;
    }
    Some(Move {
        tu: r.tu,
        from: r.int("at")? as usize,
        to: r.int("pos")? as usize,
        symbol: r.int("out").map(i64::from),
    })
}

#[derive(Clone, Debug)]
pub struct CcfomiRun {
    pub trace: Trace,
    pub moves: Vec<Move>,
    /// The oracle at the last unit.
    pub learned: Learned,
    pub mean_us: f64,
    pub max_us: u64,
    pub mean_scheduled: f64,
}

impl CcfomiRun {
    /// Every move is a link of `fo`: factor moves match `delta`, jumps
    /// match the suffix link.
    pub fn moves_follow(&self, fo: &FactorOracle) -> bool {
        self.moves.iter().all(|m| match m.symbol {
            Some(c) => fo.delta(m.from, c) == Ok(Some(m.to)),
            None => fo.suffix(m.from) == Ok(m.to as i64),
        })
    }

    pub fn output(&self) -> Vec<i64> {
        self.moves.iter().filter_map(|m| m.symbol).collect()
    }
}

/// Simulates the model for `cfg.horizon` units.
pub fn run(cfg: &CcfomiConfig) -> Result<CcfomiRun, CcfomiError> {
    let program = build(cfg)?;
    let config = EngineConfig {
        horizon: cfg.horizon,
        seed: cfg.seed,
        ..EngineConfig::default()
    };
    let mut engine = TimedEngine::new(program, config)?;
    let hook_cfg = cfg.clone();
    engine.set_input(Box::new(move |tu, rng| hook_cfg.inputs(tu, rng)));
    let trace = engine.simulate()?;
    let moves = trace.units.iter().filter_map(read_move).collect();
    let learned = trace
        .units
        .last()
        .map(|r| decode(r, cfg))
        .unwrap_or_default();
    let units = trace.units.len().max(1) as f64;
    let mean_us = trace.units.iter().map(|u| u.elapsed_us as f64).sum::<f64>() / units;
    let max_us = trace.units.iter().map(|u| u.elapsed_us).max().unwrap_or(0);
    let mean_scheduled = trace.units.iter().map(|u| u.scheduled as f64).sum::<f64>() / units;
    Ok(CcfomiRun {
        trace,
        moves,
        learned,
        mean_us,
        max_us,
        mean_scheduled,
    })
}

/// A run of `units` units whose mean scheduled work is close to `target`
/// process items per unit. The size is found by bisection over the number
/// of notes played.
pub fn bench_config(target: u64, units: u32) -> Result<CcfomiConfig, CcfomiError> {
    let make = |notes: usize| {
        let pitches: Vec<i64> = (0..notes).map(|i| 60 + (i * 5 % 7) as i64).collect();
        let mut cfg = CcfomiConfig::learn(&pitches);
        cfg.script = Some(pitches.into_iter().map(Some).collect());
        cfg.lo = 60;
        cfg.hi = 66;
        cfg.horizon = units;
        cfg.n = notes.clamp(1, 8);
        cfg
    };
    let mean = |notes: usize| -> Result<f64, CcfomiError> { Ok(run(&make(notes))?.mean_scheduled) };
    let (mut lo, mut hi) = (1usize, (units as usize).max(1));
    if mean(hi)? <= target as f64 {
        return Ok(make(hi));
    }
    while hi - lo > 1 {
        let mid = (lo + hi) / 2;
        if mean(mid)? <= target as f64 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let pick = if target as f64 - mean(lo)? <= mean(hi)? - target as f64 {
        lo
    } else {
        hi
    };
    Ok(make(pick))
}

/// Plain-text listing of moves, one per line.
pub fn render_moves(moves: &[Move]) -> String {
    let mut s = String::new();
    for m in moves {
        let what = m.symbol.map_or("back".to_string(), |c| c.to_string());
        let _ = writeln!(s, "{}\t{} -> {}\t{what}", m.tu, m.from, m.to);
    }
    s
}

/// Pulls `out` per unit, `None` where nothing was played.
pub fn outputs(trace: &Trace) -> Vec<Option<i64>> {
    trace
        .units
        .iter()
        .map(|u| match u.get("out") {
            Some(VarValue::Int(v)) if u.int("moved") == Some(1) => Some(*v as i64),
            _ => None,
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn three_notes_learn_the_oracle() {
        let notes = [60, 62, 62];
        let cfg = CcfomiConfig {
            horizon: 3,
            ..CcfomiConfig::learn(&notes)
        };
        let r = run(&cfg).unwrap();
        let fo = FactorOracle::from_symbols(&notes);
        assert_eq!(r.learned.suffix, fo.suffixes());
        assert_eq!(r.learned.links, fo.links());
        assert!(r.learned.matches(&fo));
    }

    #[test]
    fn improvisation_stays_on_the_oracle() {
        let notes = [60, 62, 62, 61, 60, 62];
        for seed in 0..5 {
            let cfg = CcfomiConfig {
                n: 3,
                horizon: 40,
                seed,
                ..CcfomiConfig::learn(&notes)
            };
            let r = run(&cfg).unwrap();
            let fo = FactorOracle::from_symbols(&notes);
            assert!(r.learned.matches(&fo));
            assert!(!r.moves.is_empty());
            assert!(r.moves_follow(&fo), "{}", render_moves(&r.moves));
        }
    }

    #[test]
    fn certain_continuity_never_jumps_back() {
        let notes = [60, 61, 60, 61, 62];
        let cfg = CcfomiConfig {
            q: 1.0,
            n: 1,
            horizon: 30,
            ..CcfomiConfig::learn(&notes)
        };
        let r = run(&cfg).unwrap();
        assert!(!r.moves.is_empty());
        assert!(r.moves.iter().all(|m| m.symbol.is_some() && m.to > m.from));
    }

    #[test]
    fn silent_player_never_improvises() {
        let cfg = CcfomiConfig {
            script: Some(vec![None; 10]),
            n: 1,
            horizon: 10,
            ..CcfomiConfig::learn(&[60])
        };
        let r = run(&cfg).unwrap();
        assert!(r.moves.is_empty());
        assert_eq!(r.learned.suffix, vec![-1]);
        assert!(outputs(&r.trace).iter().all(Option::is_none));
    }

    #[test]
    fn random_player() {
        let cfg = CcfomiConfig {
            script: None,
            n: 2,
            horizon: 60,
            states: 6,
            ..CcfomiConfig::learn(&[60, 64])
        };
        let r = run(&cfg).unwrap();
        let played: Vec<i64> = (1..=6)
            .map_while(|j| r.trace.units.last().unwrap().int(&format!("l[{j}]")))
            .map(|a| a as i64 + 60)
            .collect();
        assert_eq!(played.len(), 6);
        let fo = FactorOracle::from_symbols(&played);
        assert!(r.learned.matches(&fo));
        assert!(r.moves_follow(&fo));
    }

    #[test]
    fn bad_configs() {
        let ok = CcfomiConfig::learn(&[60, 62]);
        assert!(ok.validate().is_ok());
        let bad = |f: fn(&mut CcfomiConfig)| {
            let mut c = ok.clone();
            f(&mut c);
            c.validate().unwrap_err()
        };
        assert_eq!(bad(|c| c.n = 0), ConfigError::ZeroN);
        assert_eq!(bad(|c| c.q = 1.5), ConfigError::Probability(1.5));
        assert_eq!(bad(|c| c.lo = 70), ConfigError::Range { lo: 70, hi: 62 });
        assert_eq!(
            bad(|c| c.script = Some(vec![Some(59)])),
            ConfigError::Note(59)
        );
        assert!(matches!(
            bad(|c| c.states = 1),
            ConfigError::StartPastStates { .. }
        ));
    }
}
