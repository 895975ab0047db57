mod common;

use std::fs;

use common::*;
use graphvar::io::{read_function, read_graph, write_function};
use graphvar::{load_problem, run_exhaustion, Error};

fn write(dir: &std::path::Path, name: &str, text: &str) -> std::path::PathBuf {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p
}

#[test]
fn scalar_problem_from_files() {
    let dir = tempfile::tempdir().unwrap();
    let graph = write(dir.path(), "g.txt", "# three vertices\na b 1\nb c 1.0\n");
    let measure = write(dir.path(), "m.txt", "a 1\nb 1\nc 1\n");
    write(dir.path(), "f.txt", "b 3\n");
    let config = write(
        dir.path(),
        "run.cfg",
        "equation = schrodinger\nh = const:1\nf = file:f.txt\norigin = b\nk_min = 2\nk_max = 3\nell = 1\n",
    );
    let (g, spec, resolved) = load_problem(&graph, Some(&measure), &config).unwrap();
    assert_eq!(spec.k_max, 3);
    assert_eq!(g.id(resolved.origin), "b");
    let report = run_exhaustion(&g, &resolved.problem, &resolved.options).unwrap();
    assert!(report.converged && report.finite_graph_mode);
    let u = report.final_solution.values();
    // the ball covers the path, so this is the free problem: u = (0.75, 1.5, 0.75)
    let oracle = dense_schrodinger(&g, &all(&g), &[1.0; 3], &[0.0, 3.0, 0.0]);
    assert!(max_diff(u, &oracle) <= 1e-9, "{u:?} vs {oracle:?}");

    let out = dir.path().join("u.tsv");
    write_function(&g, &report.final_solution, &out).unwrap();
    let back = read_function(&g, &out).unwrap();
    assert_eq!(back.values(), report.final_solution.values());
}

#[test]
fn parallel_levels_agree_with_sequential() {
    let dir = tempfile::tempdir().unwrap();
    let edges: String = (0..60).map(|i| format!("{i} {} 1\n", i + 1)).collect();
    let graph = write(dir.path(), "g.txt", &edges);
    let config = write(
        dir.path(),
        "run.cfg",
        "equation = schrodinger\nh = const:2 + rhopow:1\nf = dirac:30:1 + dirac:31:0.5\norigin = 30\nk_min = 3\nk_max = 12\ntol = 1e-11\n",
    );
    let (g, _, resolved) = load_problem(&graph, None, &config).unwrap();
    let seq = run_exhaustion(&g, &resolved.problem, &resolved.options).unwrap();
    let mut options = resolved.options.clone();
    options.parallel = true;
    let par = run_exhaustion(&g, &resolved.problem, &options).unwrap();
    assert_eq!(seq.levels.len(), par.levels.len());
    for (a, b) in seq.levels.iter().zip(&par.levels) {
        assert!((a.energy - b.energy).abs() <= 1e-10 * a.energy.abs().max(1.0));
    }
    assert!(max_diff(seq.final_solution.values(), par.final_solution.values()) <= 1e-9);
}

#[test]
fn malformed_inputs_are_input_errors() {
    let dir = tempfile::tempdir().unwrap();
    let cases = [
        ("a b\n", "missing weight"),
        ("a b -1\n", "negative weight"),
        ("a a 1\n", "self loop"),
        ("a b 1\nb a 2\n", "conflicting weights"),
        ("a b nan\n", "not a number"),
    ];
    for (text, why) in cases {
        let p = write(dir.path(), "bad.txt", text);
        let err = read_graph(&p, None).expect_err(why);
        assert!(err.is_input_error(), "{why}: {err}");
    }
    let graph = write(dir.path(), "g.txt", "a b 1\n");
    let measure = write(dir.path(), "m.txt", "a 1\nb 0\n");
    assert!(read_graph(&graph, Some(&measure)).is_err());

    let g = read_graph(&graph, None).unwrap();
    let f = write(dir.path(), "f.txt", "a 1\na 2\n");
    assert!(read_function(&g, &f).is_err());
    let f = write(dir.path(), "f.txt", "z 1\n");
    assert!(read_function(&g, &f).is_err());
}

#[test]
fn violated_hypotheses_are_reported() {
    let dir = tempfile::tempdir().unwrap();
    let graph = write(dir.path(), "g.txt", "a b 1\nb c 1\n");
    // f must be negative and g ≤ f everywhere
    let config = write(
        dir.path(),
        "run.cfg",
        "equation = meanfield-negative\nf = const:-1\ng = const:-2 + dirac:c:1.5\n",
    );
    let err = load_problem(&graph, None, &config).unwrap_err();
    assert!(matches!(err, Error::Hypothesis(_)), "{err}");
    assert!(err.to_string().contains("\"c\""), "{err}");

    let config = write(dir.path(), "run.cfg", "equation = yamabe\nh = const:1\nq = 4\np = 3\n");
    assert!(matches!(load_problem(&graph, None, &config).unwrap_err(), Error::Hypothesis(_)));
}
