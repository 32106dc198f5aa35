use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn dg(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dg"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

const TRIVIAL: &str = r#"{"name":"t","source":"a","vertices":["a"],"edges":[]}"#;
const CHAIN4: &str =
    r#"{"name":"chain4","source":"a","vertices":["a","b","c","d"],"edges":[["a","b"],["b","c"],["c","d"]]}"#;
const IRREDUCIBLE: &str = "digraph { s [source=true]; s -> a; s -> b; a -> b; b -> a; a -> t; }";

#[test]
fn check_trivial() {
    let dir = TempDir::new().unwrap();
    let f = write(dir.path(), "trivial.json", TRIVIAL);
    let out = dg(&["check", path(&f)]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout(&out), "DIJKSTRA (k=0)\n");
}

#[test]
fn check_with_witness() {
    let dir = TempDir::new().unwrap();
    let f = write(
        dir.path(),
        "nested.dot",
        "digraph { v [source=true]; v -> w; v -> t; w -> x; x -> t; }",
    );
    let out = dg(&["check", "--witness", "--verify-witness", path(&f)]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(
        stdout(&out),
        "DIJKSTRA (k=2)\n1. sequence at w: w x\n2. if-then at v: t v w\nwitness verified: replay ends with 1 vertex\n"
    );
    let quiet = dg(&["check", "--witness", "--quiet", path(&f)]);
    assert_eq!(stdout(&quiet), "DIJKSTRA (k=2)\n");
}

#[test]
fn check_rejections_exit_one() {
    let dir = TempDir::new().unwrap();
    let stuck = write(dir.path(), "stuck.dot", IRREDUCIBLE);
    let out = dg(&["check", path(&stuck)]);
    assert_eq!(out.status.code(), Some(1));
    assert!(
        stdout(&out).starts_with("NOT-DIJKSTRA (no prime left"),
        "{}",
        stdout(&out)
    );

    let unreachable = write(dir.path(), "u.dot", "digraph { a [source=true]; a -> b; c; }");
    let out = dg(&["check", path(&unreachable)]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stdout(&out).starts_with("NOT-FLOW-GRAPH"));

    let dense = write(
        dir.path(),
        "dense.dot",
        "digraph { a [source=true]; a -> b; a -> c; b -> c; c -> b; b -> a; }",
    );
    let out = dg(&["check", path(&dense)]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(stdout(&out), "NOT-DIJKSTRA (edge bound exceeded: m=5 >= 2n-1=5)\n");

    let parallel = write(
        dir.path(),
        "p.dot",
        "digraph {\n a [source=true];\n a -> b;\n a -> b;\n}\n",
    );
    let out = dg(&["check", path(&parallel)]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(
        stdout(&out),
        "NOT-DIJKSTRA (malformed input: line 4: parallel edge `a` -> `b`)\n"
    );
}

#[test]
fn input_errors_exit_two() {
    let dir = TempDir::new().unwrap();
    let bad = write(dir.path(), "bad.dot", "digraph { a -> ; }");
    let out = dg(&["check", path(&bad)]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 1"));

    let two_sources = write(
        dir.path(),
        "two.dot",
        "digraph { a [source=true]; b [source=true]; a -> b; }",
    );
    assert_eq!(dg(&["check", path(&two_sources)]).status.code(), Some(2));

    let missing = dir.path().join("nope.json");
    assert_eq!(dg(&["check", path(&missing)]).status.code(), Some(2));
    assert_eq!(dg(&["frobnicate"]).status.code(), Some(2));
}

#[test]
fn canon_chain_and_provenance() {
    let dir = TempDir::new().unwrap();
    let f = write(dir.path(), "chain4.json", CHAIN4);
    let out = dg(&["canon", path(&f)]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout(&out), "1 2 1 2 1 2 1\n");
    let out = dg(&["canon", "--provenance", path(&f)]);
    assert_eq!(stdout(&out), "1 2 1 2 1 2 1\n0 a\n2 b\n4 c\n6 d\n");

    let stuck = write(dir.path(), "stuck.dot", IRREDUCIBLE);
    assert_eq!(dg(&["canon", path(&stuck)]).status.code(), Some(1));
}

#[test]
fn format_flag_overrides_extension() {
    let dir = TempDir::new().unwrap();
    let f = write(
        dir.path(),
        "graph.txt",
        "digraph { v [source=true]; v -> w; w -> v; v -> t; }",
    );
    let out = dg(&["--format", "dot", "canon", path(&f)]);
    assert_eq!(stdout(&out), "1 4 1 1\n");
    assert_eq!(dg(&["canon", path(&f)]).status.code(), Some(2));
}

#[test]
fn iso_with_renamed_copy() {
    let dir = TempDir::new().unwrap();
    let g = write(dir.path(), "g.json", CHAIN4);
    let renamed = write(
        dir.path(),
        "g_renamed.dot",
        "digraph { p [source=true]; p -> q; q -> r; r -> s; }",
    );
    let out = dg(&["iso", path(&g), path(&renamed)]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout(&out), "MATCH\na -> p\nb -> q\nc -> r\nd -> s\n");

    let w = write(
        dir.path(),
        "while.dot",
        "digraph { v [source=true]; v -> w; w -> v; v -> t; }",
    );
    let chain3 = write(dir.path(), "chain3.dot", "digraph { a [source=true]; a -> b; b -> c; }");
    let out = dg(&["iso", path(&chain3), path(&w)]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(stdout(&out), "NO-MATCH\n");

    let stuck = write(dir.path(), "stuck.dot", IRREDUCIBLE);
    let out = dg(&["iso", path(&w), path(&stuck)]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stdout(&out).starts_with("graph 2 is not a Dijkstra graph"));
}

#[test]
fn gen_is_reproducible_and_recognized() {
    let dir = TempDir::new().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    let script = dir.path().join("a.script.json");
    for (out_file, extra) in [(&a, Some(&script)), (&b, None)] {
        let mut args = vec!["gen", "--seed", "11", "--size", "30", "-o", path(out_file)];
        if let Some(s) = extra {
            args.extend(["--script", path(s)]);
        }
        assert_eq!(dg(&args).status.code(), Some(0));
    }
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
    let out = dg(&["check", path(&a)]);
    assert_eq!(out.status.code(), Some(0));
    let script: serde_json::Value = serde_json::from_slice(&fs::read(&script).unwrap()).unwrap();
    assert_eq!(script["seed"], 11);

    let stdout_doc = dg(&[
        "--format", "dot", "gen", "--seed", "2", "--size", "3", "--kinds", "while",
    ]);
    let text = stdout(&stdout_doc);
    assert!(text.contains("v0 [source=true];"));
    assert!(text.contains("v1 -> v0;"));
    assert_eq!(
        dg(&["gen", "--seed", "1", "--size", "5", "--kinds", "loop"])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn batch_report() {
    let dir = TempDir::new().unwrap();
    write(dir.path(), "a.json", CHAIN4);
    write(
        dir.path(),
        "b.dot",
        "digraph { p [source=true]; p -> q; q -> r; r -> s; }",
    );
    write(
        dir.path(),
        "c.dot",
        "digraph { v [source=true]; v -> w; w -> v; v -> t; }",
    );
    write(dir.path(), "d.dot", IRREDUCIBLE);
    write(dir.path(), "e.dot", "digraph { broken");
    write(dir.path(), "notes.txt", "ignored");
    let out = dg(&["batch", "--mappings", path(dir.path())]);
    assert_eq!(out.status.code(), Some(0));
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let entries = report["entries"].as_array().unwrap();
    assert_eq!(entries.len(), 5);
    assert_eq!(entries[0]["code"], "1 2 1 2 1 2 1");
    assert_eq!(entries[3]["status"], "NOT-DIJKSTRA");
    assert_eq!(entries[4]["status"], "INPUT-ERROR");
    let clusters = report["clusters"].as_array().unwrap();
    let chain = clusters.iter().find(|c| c["key"] == "1 2 1 2 1 2 1").unwrap();
    assert_eq!(chain["members"], serde_json::json!(["a.json", "b.dot"]));
    assert_eq!(report["mappings"][0]["pairs"][0], serde_json::json!(["a", "p"]));

    let again = dg(&["batch", "--mappings", path(dir.path())]);
    assert_eq!(again.stdout, out.stdout);
}
