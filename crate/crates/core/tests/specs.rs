//! The bundled spec corpus under `specs/`.
//!
//! Model specs are generated; set `UPDATE_SPECS=1` to rewrite them.

use std::fs;
use std::path::{Path, PathBuf};

use ntccrt::dsl;
use ntccrt::models::ccfomi::{self, CcfomiConfig};
use ntccrt::models::graph_path::{self, GraphSpec};
use ntccrt::ntcc::simulate;
use ntccrt::ntcc::validate::{Rule, Severity};

fn dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../specs")
}

fn corpus() -> Vec<(String, String)> {
    let mut out: Vec<(String, String)> = fs::read_dir(dir())
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "ntcc"))
        .map(|p| {
            let name = p.file_stem().unwrap().to_string_lossy().into_owned();
            (name, fs::read_to_string(&p).unwrap())
        })
        .collect();
    out.sort();
    out
}

fn chain() -> GraphSpec {
    let text = fs::read_to_string(dir().join("chain.edges")).unwrap();
    GraphSpec::new(graph_path::parse_edges(&text).unwrap(), 1, 5)
}

fn ccfomi_random() -> CcfomiConfig {
    CcfomiConfig {
        script: None,
        n: 4,
        horizon: 40,
        states: 8,
        lo: 60,
        hi: 64,
        ..CcfomiConfig::learn(&[60])
    }
}

fn generated() -> Vec<(&'static str, String)> {
    let pretty = |cfg: &CcfomiConfig| dsl::print(&dsl::parse(&cfg.spec_text().unwrap()).unwrap());
    vec![
        ("graph-path", dsl::to_dsl(&graph_path::program(&chain()))),
        ("ccfomi", pretty(&CcfomiConfig::learn(&[60, 62, 62]))),
        ("ccfomi-random", pretty(&ccfomi_random())),
    ]
}

#[test]
fn generated_specs_are_current() {
    let update = std::env::var_os("UPDATE_SPECS").is_some();
    for (name, text) in generated() {
        let path = dir().join(format!("{name}.ntcc"));
        if update {
            fs::write(&path, &text).unwrap();
        }
        let on_disk = fs::read_to_string(&path).unwrap_or_default();
        assert_eq!(
            on_disk, text,
            "{name}.ntcc is stale; rerun with UPDATE_SPECS=1"
        );
    }
}

#[test]
fn corpus_round_trips() {
    let specs = corpus();
    assert!(specs.len() >= 20, "{} specs", specs.len());
    for (name, text) in specs {
        let ast = dsl::parse(&text).unwrap_or_else(|e| panic!("{name}: {e}"));
        let printed = dsl::print(&ast);
        assert_eq!(dsl::parse(&printed).unwrap(), ast, "{name}");
        assert_eq!(
            dsl::print(&dsl::parse(&printed).unwrap()),
            printed,
            "{name}"
        );
    }
}

#[test]
fn models_survive_the_dsl() {
    let g = graph_path::program(&chain());
    assert_eq!(dsl::load(&dsl::to_dsl(&g), &[]).unwrap(), g);
    for cfg in [CcfomiConfig::learn(&[60, 62, 62]), ccfomi_random()] {
        let p = ccfomi::build(&cfg).unwrap();
        assert_eq!(dsl::load(&dsl::to_dsl(&p), &[]).unwrap(), p);
    }
}

#[test]
fn lint_expectations() {
    for (name, text) in corpus() {
        let found = dsl::lint(&dsl::parse(&text).unwrap());
        let rules: Vec<Rule> = found.iter().map(|v| v.rule).collect();
        let expect: &[Rule] = match name.as_str() {
            "lint-replicated-choice" => &[Rule::InconsistentReplicatedChoice],
            "lint-unguarded" => &[Rule::UnguardedRecursion],
            "lint-dimension" => &[Rule::MissingDimension],
            "lint-persistent" => &[Rule::PersistentStructured],
            _ => &[],
        };
        assert_eq!(rules, expect, "{name}: {found:?}");
    }
}

#[test]
fn runnable_specs_run() {
    for (name, text) in corpus() {
        if name.starts_with("lint-") {
            continue;
        }
        let args: &[i64] = if name == "main-args" { &[3] } else { &[] };
        let p = dsl::load(&text, args).unwrap_or_else(|e| panic!("{name}: {e}"));
        let errors = ntccrt::ntcc::validate::validate(&p, false)
            .into_iter()
            .filter(|v| v.severity == Severity::Error)
            .count();
        assert_eq!(errors, 0, "{name}");
        simulate(p, 5, 0).unwrap_or_else(|e| panic!("{name}: {e}"));
    }
}
