mod common;

use std::collections::BTreeSet;
use std::sync::Arc;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use common::*;
use ntccrt::dsl;
use ntccrt::fo::FactorOracle;
use ntccrt::models::ccfomi::{self, CcfomiConfig};
use ntccrt::models::knets::KnetProblem;
use ntccrt::ntcc::simulate;
use ntccrt::store::{Operand, Relop, Space, Status, Tell, VarId};
use ntccrt::term::{Constraint, Guard, Process, VarType};
use ntccrt::Program;

fn program(main: Arc<Process>) -> Program {
    let mut p = Program::new(main);
    for v in ["x", "y", "z"] {
        p.declare(v, VarType::Int { lo: 0, hi: 9 }).unwrap();
    }
    p
}

fn relop() -> impl Strategy<Value = Relop> {
    prop::sample::select(RELOPS.to_vec())
}

fn var_name() -> impl Strategy<Value = &'static str> {
    prop::sample::select(vec!["x", "y", "z"])
}

fn guard() -> impl Strategy<Value = Guard> {
    let atom = (var_name(), relop(), 0i64..10).prop_map(|(v, op, k)| Guard::rel(v, op, k));
    atom.prop_recursive(2, 6, 2, |g| {
        prop_oneof![
            prop::collection::vec(g.clone(), 1..3).prop_map(Guard::And),
            prop::collection::vec(g.clone(), 1..3).prop_map(Guard::Or),
            g.prop_map(|g| Guard::Not(Box::new(g))),
        ]
    })
}

/// Random processes over `x`, `y`, `z`. Tells may conflict, so a run can end
/// in an inconsistent unit.
fn process() -> impl Strategy<Value = Arc<Process>> {
    let leaf = prop_oneof![
        Just(Arc::new(Process::Skip)),
        (var_name(), 0i64..10).prop_map(|(v, k)| Process::tell(Constraint::eq(v, k))),
    ];
    leaf.prop_recursive(4, 24, 3, |p| {
        prop_oneof![
            prop::collection::vec(p.clone(), 1..4).prop_map(Process::par),
            (guard(), p.clone()).prop_map(|(g, p)| Process::when(g, p)),
            (guard(), p.clone()).prop_map(|(g, p)| Process::unless(g, p)),
            (1u32..4, p.clone()).prop_map(|(k, p)| Process::next(k, p)),
            p.clone().prop_map(Process::bang),
            p.clone().prop_map(Process::star),
            prop::collection::vec((guard(), p), 1..3).prop_map(Process::sum),
        ]
    })
}

fn domains(s: &Space, vars: &[VarId]) -> Vec<Vec<i32>> {
    vars.iter()
        .map(|&v| s.int_domain(v).unwrap().values().collect())
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn oracle_accepts_every_factor(w in prop::collection::vec(0i64..3, 0..30)) {
        let fo = FactorOracle::from_symbols(&w);
        for i in 0..=w.len() {
            for j in i..=w.len() {
                prop_assert!(fo.is_factor(&w[i..j]));
            }
        }
    }

    #[test]
    fn oracle_shape(w in prop::collection::vec(0i64..4, 1..40)) {
        let fo = FactorOracle::from_symbols(&w);
        let m = w.len();
        prop_assert!(fo.link_count() < 2 * m);
        for i in 1..=m {
            prop_assert_eq!(fo.delta(i - 1, w[i - 1]), Ok(Some(i)));
            let s = fo.suffix(i).unwrap();
            prop_assert!((0..i as i64).contains(&s));
        }
        // building one symbol at a time gives the same automaton
        let mut inc = FactorOracle::new();
        for &c in &w {
            inc.add(c);
        }
        prop_assert_eq!(inc, fo);
    }

    #[test]
    fn tells_narrow_and_fixpoints_are_stable(
        bounds in prop::collection::vec((0i64..4, 0i64..6), 3),
        tells in prop::collection::vec((0usize..3, relop(), prop::option::of(0usize..3), 0i64..8), 1..8),
    ) {
        let mut s = Space::new();
        let vars: Vec<VarId> = bounds.iter().map(|&(lo, w)| s.new_int_var(lo, lo + w).unwrap()).collect();
        for (x, op, y, k) in tells {
            let before = domains(&s, &vars);
            let y = y.map_or(Operand::Const(k), |y| Operand::Var(vars[y]));
            if s.tell(Tell::Rel(vars[x].into(), op, y)).is_err() || s.status() == Status::Failed {
                break;
            }
            let after = domains(&s, &vars);
            for (b, a) in before.iter().zip(&after) {
                prop_assert!(a.iter().all(|v| b.contains(v)));
            }
            prop_assert_eq!(s.status(), Status::Fixpoint);
            prop_assert_eq!(domains(&s, &vars), after);
        }
    }

    #[test]
    fn same_seed_same_trace(p in process(), seed in 0u64..1000) {
        let vars = |r: Result<ntccrt::ntcc::Trace, _>| {
            r.map(|t| t.units.into_iter().map(|u| u.vars).collect::<Vec<_>>())
        };
        prop_assert_eq!(vars(simulate(program(p.clone()), 4, seed)), vars(simulate(program(p), 4, seed)));
    }

    #[test]
    fn processes_print_and_parse_back(p in process()) {
        let prog = program(p);
        let text = dsl::to_dsl(&prog);
        let back = dsl::load(&text, &[]).map_err(|e| TestCaseError::fail(format!("{e}\n{text}")))?;
        prop_assert_eq!(back, prog);
    }

    #[test]
    fn bang_equals_unrolled_next(n in 1u32..=8, v in 0i64..10) {
        let p = Process::tell(Constraint::eq("x", v));
        let unrolled = Process::par(
            (0..n).map(|k| if k == 0 { p.clone() } else { Process::next(k, p.clone()) }).collect(),
        );
        let a = simulate(program(Process::bang(p)), n, 0).unwrap();
        let b = simulate(program(unrolled), n, 0).unwrap();
        prop_assert!(a.units.iter().map(|u| &u.vars).eq(b.units.iter().map(|u| &u.vars)));
    }

    #[test]
    fn star_runs_exactly_once(seed in any::<u64>(), horizon in 1u32..12) {
        let t = simulate(program(Process::star(Process::tell(Constraint::eq("x", 1)))), horizon, seed).unwrap();
        prop_assert_eq!(t.units.iter().filter(|u| u.int("x").is_some()).count(), 1);
    }

    #[test]
    fn when_and_unless_split_decided_guards(x in 0i64..10, k in 0i64..10, op in relop()) {
        let main = Process::par(vec![
            Process::tell(Constraint::eq("x", x)),
            Process::when(Guard::rel("x", op, k), Process::tell(Constraint::eq("y", 1))),
            Process::unless(Guard::rel("x", op, k), Process::tell(Constraint::eq("z", 1))),
        ]);
        let t = simulate(program(main), 2, 0).unwrap();
        prop_assert_eq!(t.units[0].int("y").is_some(), op.holds(x, k));
        prop_assert_eq!(t.units[1].int("z").is_some(), !op.holds(x, k));
    }

    #[test]
    fn engine_cells_match_their_encoding(seed in any::<u64>()) {
        let cp = random_cell_program(&mut ChaCha8Rng::seed_from_u64(seed), 6);
        let k = cp.init.len();
        let a = simulate(cp.engine_program(), 8, 0).unwrap();
        let b = simulate(cp.reference_program(), 8, 0).unwrap();
        prop_assert_eq!(cell_columns(&a, k), cell_columns(&b, k));
    }

    #[test]
    fn graph_paths_agree_with_bfs(seed in any::<u64>()) {
        let g = random_digraph(&mut ChaCha8Rng::seed_from_u64(seed), 12, 0.15);
        graph_agrees(&g).map_err(TestCaseError::fail)?;
    }

    #[test]
    fn knet_labels_obey_arithmetic(pitches in prop::collection::vec(0u8..12, 2..=4), k in 0usize..=3) {
        let p = KnetProblem::new(pitches, k).unwrap();
        let sols = p.solve(None, false);
        for s in &sols {
            prop_assert!(labels_hold(&p, &s.labels));
        }
        let got: BTreeSet<_> = sols.into_iter().map(|s| s.matrix).collect();
        let want: BTreeSet<_> = p.brute_force(false).into_iter().collect();
        prop_assert_eq!(got, want);
        let connected: BTreeSet<_> = p.solve(None, true).into_iter().map(|s| s.matrix).collect();
        let want: BTreeSet<_> = p.brute_force(true).into_iter().collect();
        prop_assert_eq!(connected, want);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn ccfomi_learns_the_oracle(
        notes in prop::collection::vec(60i64..=63, 1..=8),
        q in 0.0f64..=1.0,
        seed in any::<u64>(),
    ) {
        let cfg = CcfomiConfig { q, seed, lo: 60, hi: 63, ..CcfomiConfig::learn(&notes) };
        let run = ccfomi::run(&cfg).unwrap();
        let fo = FactorOracle::from_symbols(&notes);
        prop_assert!(run.learned.matches(&fo), "{:?} vs {:?} {:?}", run.learned, fo.links(), fo.suffixes());
        prop_assert!(run.moves_follow(&fo));
    }
}
