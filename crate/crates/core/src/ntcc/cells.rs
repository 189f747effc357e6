//! Cell programs in two forms: engine cells, and the process encoding of
//! cells with a change flag per cell, used as a reference for the engine.

use std::sync::Arc;

use crate::program::Program;
use crate::term::{Constraint, Expr, Guard, Lambda, Param, ProcedureDef, Process, Term, VarType};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CellOp {
    Assign { cell: usize, g: Lambda },
    Exch { x: usize, y: usize, g: Lambda },
}

/// Cells `c0, c1, …` created at unit 0, plus updates at given units.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CellProgram {
    pub init: Vec<i64>,
    pub ops: Vec<(u32, CellOp)>,
    /// Domain of every cell variable.
    pub lo: i64,
    pub hi: i64,
}

pub fn cell_name(i: usize) -> String {
    format!("c{i}")
}

fn flag_name(i: usize) -> String {
    format!("ch{i}")
}

fn proc_name(i: usize) -> String {
    format!("Cell{i}")
}

fn at(unit: u32, p: Arc<Process>) -> Arc<Process> {
    if unit == 0 {
        p
    } else {
        Process::next(unit, p)
    }
}

impl CellProgram {
    fn declare(&self, prog: &mut Program) {
        for i in 0..self.init.len() {
            prog.declare(
                &cell_name(i),
                VarType::Int {
                    lo: self.lo,
                    hi: self.hi,
                },
            )
            .expect("fresh names");
        }
    }

    pub fn engine_program(&self) -> Program {
        let mut ps: Vec<Arc<Process>> = self
            .init
            .iter()
            .enumerate()
            .map(|(i, &v)| Arc::new(Process::CellNew(cell_name(i).into(), Expr::Int(v))))
            .collect();
        for (u, op) in &self.ops {
            let p = match op {
                CellOp::Assign { cell, g } => {
                    Process::CellAssign(cell_name(*cell).into(), g.clone())
                }
                CellOp::Exch { x, y, g } => {
                    Process::CellExch(cell_name(*x).into(), cell_name(*y).into(), g.clone())
                }
            };
            ps.push(at(*u, Arc::new(p)));
        }
        let mut prog = Program::new(Process::par(ps));
        self.declare(&mut prog);
        prog
    }

    pub fn reference_program(&self) -> Program {
        let mut prog = Program::default();
        self.declare(&mut prog);
        let mut ps = Vec::new();
        for (i, &v) in self.init.iter().enumerate() {
            prog.declare(&flag_name(i), VarType::Bool)
                .expect("fresh names");
            // Cell_i(v) = tell(c_i = v) || unless change_i next Cell_i(v)
            let value = || Term::Expr(Expr::param("v"));
            prog.define(ProcedureDef {
                name: proc_name(i).into(),
                params: vec![Param::Int("v".into())],
                body: Process::par(vec![
                    Process::tell(Constraint::eq(cell_name(i).as_str(), value())),
                    Process::unless(
                        Guard::eq(flag_name(i).as_str(), 1),
                        Process::call(&proc_name(i), vec![value()]),
                    ),
                ]),
            });
            ps.push(Process::call(&proc_name(i), vec![Term::int(v)]));
        }
        for (u, op) in &self.ops {
            let (x, g, next) = match op {
                CellOp::Assign { cell, g } => {
                    let next = Process::call(&proc_name(*cell), vec![Term::Expr(g.body.clone())]);
                    (*cell, g, next)
                }
                CellOp::Exch { x, y, g } => {
                    let next = Process::par(vec![
                        Process::call(&proc_name(*x), vec![Term::Expr(g.body.clone())]),
                        Process::call(
                            &proc_name(*y),
                            vec![Term::Expr(Expr::Param(g.param.clone()))],
                        ),
                    ]);
                    (*x, g, next)
                }
            };
            let mut flags = vec![Process::tell(Constraint::eq(flag_name(x).as_str(), 1))];
            if let CellOp::Exch { y, .. } = op {
                flags.push(Process::tell(Constraint::eq(flag_name(*y).as_str(), 1)));
            }
            flags.push(Arc::new(Process::ForPar {
                var: g.param.clone(),
                lo: Expr::Int(self.lo),
                hi: Expr::Int(self.hi),
                body: Process::when(
                    Guard::eq(
                        cell_name(x).as_str(),
                        Term::Expr(Expr::Param(g.param.clone())),
                    ),
                    Process::next(1, next),
                ),
            }));
            ps.push(at(*u, Process::par(flags)));
        }
        prog.main = Process::par(ps);
        prog
    }
}
