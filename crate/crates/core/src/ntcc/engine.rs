use std::collections::BTreeMap;
use std::sync::Arc;
use std::time::{Duration, Instant};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use super::io::InputTell;
use super::validate::{validate, Severity, Violation};
use crate::ccp::{Exec, ExecError, GroundTell, Procedures, VarValue};
use crate::program::Program;
use crate::store::{Condition, Space, Status, Truth};
use crate::term::{Constraint, Name, Process, VarType};
use crate::vars::{Env, VariableRegistry};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EngineError {
    /// `inputs` lists what the environment and cells told before the program ran.
    #[error("time unit {tu} is inconsistent{}", inputs_note(inputs))]
    InconsistentUnit { tu: u32, inputs: Vec<String> },
    #[error("time unit {tu}: {source}")]
    Exec {
        tu: u32,
        #[source]
        source: ExecError,
    },
    #[error("time unit {tu}: bad input: {msg}")]
    Input { tu: u32, msg: String },
    #[error("simulation already reached its horizon of {0} units")]
    PastHorizon(u32),
    #[error("program rejected: {}", .0.iter().map(|v| v.message.as_str()).collect::<Vec<_>>().join("; "))]
    Invalid(Vec<Violation>),
}

fn inputs_note(inputs: &[String]) -> String {
    if inputs.is_empty() {
        String::new()
    } else {
        format!(" (inputs: {})", inputs.join(", "))
    }
}

impl EngineError {
    /// Time unit the error refers to, if any.
    pub fn unit(&self) -> Option<u32> {
        match self {
            EngineError::InconsistentUnit { tu, .. }
            | EngineError::Exec { tu, .. }
            | EngineError::Input { tu, .. } => Some(*tu),
            _ => None,
        }
    }
}

/// Engine-side state of a cell.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Cell {
    pub value: i64,
    next: Option<i64>,
}

impl Cell {
    pub(crate) fn new(value: i64) -> Cell {
        Cell { value, next: None }
    }

    pub(crate) fn set_next(&mut self, name: &Name, v: i64) -> Result<(), ExecError> {
        if self.next.is_some() {
            return Err(ExecError::DoubleAssign(name.clone()));
        }
        self.next = Some(v);
        Ok(())
    }
}

/// Queues, RNG and cells that outlive a single time unit.
pub struct Timeline {
    pub(crate) now: u32,
    pub(crate) horizon: u32,
    queues: Vec<Vec<(Arc<Process>, Env)>>,
    pub(crate) unless: Vec<(Condition, Arc<Process>, Env)>,
    pub(crate) persistent: Vec<(Constraint, Env)>,
    pub(crate) rng: ChaCha8Rng,
    pub(crate) cells: BTreeMap<Name, Cell>,
    dropped: u64,
}

impl Timeline {
    fn new(horizon: u32, seed: u64) -> Timeline {
        Timeline {
            now: 0,
            horizon,
            queues: (0..horizon).map(|_| Vec::new()).collect(),
            unless: Vec::new(),
            persistent: Vec::new(),
            rng: ChaCha8Rng::seed_from_u64(seed),
            cells: BTreeMap::new(),
            dropped: 0,
        }
    }

    /// Enqueues `p` for unit `now + delay`; past the horizon it is dropped.
    pub(crate) fn schedule(&mut self, delay: u32, p: Arc<Process>, env: Env) {
        let target = self.now as u64 + delay as u64;
        if target >= self.horizon as u64 {
            self.dropped += 1;
        } else {
            self.queues[target as usize].push((p, env));
        }
    }

    pub(crate) fn cell(&self, x: &Name) -> Result<&Cell, ExecError> {
        self.cells
            .get(x)
            .ok_or_else(|| ExecError::UnknownCell(x.clone()))
    }

    pub(crate) fn cell_mut(&mut self, x: &Name) -> Result<&mut Cell, ExecError> {
        self.cells
            .get_mut(x)
            .ok_or_else(|| ExecError::UnknownCell(x.clone()))
    }
}

#[derive(Clone, Debug)]
pub struct EngineConfig {
    /// Number of time units to simulate.
    pub horizon: u32,
    pub seed: u64,
    /// Accept unguarded recursive calls, bounded by `budget`.
    pub general_recursion: bool,
    /// Maximum process items executed per unit.
    pub budget: u64,
    /// Pads every unit to this wall duration.
    pub fixed_unit: Option<Duration>,
}

impl Default for EngineConfig {
    fn default() -> Self {
        EngineConfig {
            horizon: 1,
            seed: 0,
            general_recursion: false,
            budget: 10_000_000,
            fixed_unit: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UnitReport {
    pub tu: u32,
    pub vars: Vec<(String, VarValue)>,
    pub fired_asks: u64,
    pub blocked_asks: usize,
    /// Process items executed during the unit.
    pub scheduled: u64,
    pub elapsed_us: u64,
    /// Processes scheduled past the horizon during the unit.
    pub dropped: u64,
    /// Set in fixed-duration mode when the unit's work exceeded the slot.
    pub overrun: bool,
}

impl UnitReport {
    pub fn get(&self, name: &str) -> Option<&VarValue> {
        self.vars.iter().find(|(n, _)| n == name).map(|(_, v)| v)
    }

    pub fn int(&self, name: &str) -> Option<i32> {
        self.get(name).and_then(VarValue::as_int)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Trace {
    pub units: Vec<UnitReport>,
    pub cells: BTreeMap<String, i64>,
    pub dropped: u64,
}

pub type InputHook = Box<dyn FnMut(u32, &mut ChaCha8Rng) -> Vec<InputTell>>;
pub type OutputHook = Box<dyn FnMut(&UnitReport)>;

/// NTCC interpreter: one fresh store per time unit.
pub struct TimedEngine {
    registry: VariableRegistry,
    names: Vec<String>,
    procs: Procedures,
    main: Arc<Process>,
    locals: Vec<VarType>,
    timeline: Timeline,
    grounded: Vec<GroundTell>,
    config: EngineConfig,
    input: Option<InputHook>,
    output: Option<OutputHook>,
}

impl TimedEngine {
    /// Validates `program` and prepares unit 0.
    pub fn new(program: Program, config: EngineConfig) -> Result<Self, EngineError> {
        let errors: Vec<Violation> = validate(&program, config.general_recursion)
            .into_iter()
            .filter(|v| v.severity == Severity::Error)
            .collect();
        if !errors.is_empty() {
            return Err(EngineError::Invalid(errors));
        }
        Ok(TimedEngine {
            names: program.registry.element_names(),
            registry: program.registry,
            procs: program.procedures,
            main: program.main,
            locals: Vec::new(),
            timeline: Timeline::new(config.horizon, config.seed),
            grounded: Vec::new(),
            config,
            input: None,
            output: None,
        })
    }

    pub fn set_input(&mut self, hook: InputHook) {
        self.input = Some(hook);
    }

    pub fn set_output(&mut self, hook: OutputHook) {
        self.output = Some(hook);
    }

    pub fn now(&self) -> u32 {
        self.timeline.now
    }

    pub fn horizon(&self) -> u32 {
        self.timeline.horizon
    }

    pub fn dropped(&self) -> u64 {
        self.timeline.dropped
    }

    pub fn cells(&self) -> BTreeMap<String, i64> {
        self.timeline
            .cells
            .iter()
            .map(|(k, c)| (k.to_string(), c.value))
            .collect()
    }

    /// Processes waiting in the queue of unit `tu`.
    pub fn queued(&self, tu: u32) -> usize {
        self.timeline.queues.get(tu as usize).map_or(0, Vec::len)
    }

    pub fn run_time_unit(&mut self) -> Result<UnitReport, EngineError> {
        let tu = self.timeline.now;
        if tu >= self.timeline.horizon {
            return Err(EngineError::PastHorizon(self.timeline.horizon));
        }
        let start = Instant::now();
        let exec_err = |source| EngineError::Exec { tu, source };

        // 1-2: fresh space and variables
        let mut space = Space::new();
        let inputs = match &mut self.input {
            Some(h) => h(tu, &mut self.timeline.rng),
            None => Vec::new(),
        };
        let queue = std::mem::take(&mut self.timeline.queues[tu as usize]);
        let dropped_before = self.timeline.dropped;
        let cells: Vec<(Name, i64)> = self
            .timeline
            .cells
            .iter()
            .map(|(k, c)| (k.clone(), c.value))
            .collect();
        let mut exec = Exec::new(
            &mut space,
            &self.registry,
            &self.procs,
            &mut self.locals,
            Some(&mut self.timeline),
        )
        .map_err(exec_err)?;
        exec.set_budget(Some(self.config.budget));
        let env = Env::new();

        // 3: environment input, cell values, persistent tells
        let mut given = Vec::new();
        for it in &inputs {
            let cs = it
                .to_constraints(&self.registry)
                .map_err(|msg| EngineError::Input { tu, msg })?;
            for c in cs {
                given.push(c.to_string());
                exec.execute(&mut space, &Arc::new(Process::Tell(c)), &env)
                    .map_err(exec_err)?;
            }
        }
        for (x, v) in cells {
            given.push(format!("(= {x} {v})"));
            let c = Constraint::eq(&*x, v);
            exec.execute(&mut space, &Arc::new(Process::Tell(c)), &env)
                .map_err(exec_err)?;
        }
        for g in &self.grounded {
            exec.apply_ground(&mut space, g).map_err(exec_err)?;
        }
        if !self.grounded.is_empty() {
            given.push(format!("{} persistent tell(s)", self.grounded.len()));
        }

        // 4: main
        if tu == 0 {
            exec.execute(&mut space, &self.main, &env)
                .map_err(exec_err)?;
        }

        // 5-7: this unit's queue
        for (p, penv) in queue {
            exec.execute(&mut space, &p, &penv).map_err(exec_err)?;
        }

        // 8: fixpoint
        if exec.fixpoint(&mut space).map_err(exec_err)? == Status::Failed {
            return Err(EngineError::InconsistentUnit { tu, inputs: given });
        }

        // 9: unless
        let tl = exec.timeline().expect("timed");
        let unless = std::mem::take(&mut tl.unless);
        let persistent = std::mem::take(&mut tl.persistent);
        for (c, p, penv) in unless {
            if space.entailment(&c) != Truth::True {
                exec.timeline().expect("timed").schedule(1, p, penv);
            }
        }

        // 10: persistent tells and cell carry-over
        for (c, penv) in persistent {
            if let Some(g) = exec.ground(&mut space, &c, &penv).map_err(exec_err)? {
                if !self.grounded.contains(&g) {
                    self.grounded.push(g);
                }
            }
        }
        for cell in exec.timeline().expect("timed").cells.values_mut() {
            if let Some(v) = cell.next.take() {
                cell.value = v;
            }
        }

        // 11: report
        let vars = exec.snapshot(&space, &self.names);
        let scheduled = exec.executed();
        drop(exec);
        let work = start.elapsed();
        let report = UnitReport {
            tu,
            vars,
            fired_asks: space.fired_asks(),
            blocked_asks: space.blocked_asks().len(),
            scheduled,
            elapsed_us: work.as_micros() as u64,
            dropped: self.timeline.dropped - dropped_before,
            overrun: self.config.fixed_unit.is_some_and(|slot| work > slot),
        };
        if let Some(out) = &mut self.output {
            out(&report);
        }

        // 12: discard the space
        drop(space);
        self.timeline.now += 1;
        if let Some(slot) = self.config.fixed_unit {
            if let Some(rest) = slot.checked_sub(start.elapsed()) {
                std::thread::sleep(rest);
            }
        }
        Ok(report)
    }

    /// Runs every remaining unit.
    pub fn simulate(&mut self) -> Result<Trace, EngineError> {
        let mut units = Vec::new();
        while self.timeline.now < self.timeline.horizon {
            units.push(self.run_time_unit()?);
        }
        Ok(Trace {
            units,
            cells: self.cells(),
            dropped: self.timeline.dropped,
        })
    }
}

/// Runs `program` for `units` time units with the default configuration.
pub fn simulate(program: Program, units: u32, seed: u64) -> Result<Trace, EngineError> {
    let config = EngineConfig {
        horizon: units,
        seed,
        ..EngineConfig::default()
    };
    TimedEngine::new(program, config)?.simulate()
}
