use std::path::{Path, PathBuf};
use std::process::Command;

use jsonschema::JSONSchema;
use serde_json::Value;

const BIN: &str = env!("CARGO_BIN_EXE_cgdl");

fn cgdl(args: &[&str]) -> (i32, String, String) {
    let out = Command::new(BIN).args(args).env_remove("CGDL_SEED").output().expect("run cgdl");
    (
        out.status.code().expect("exit code"),
        String::from_utf8(out.stdout).unwrap(),
        String::from_utf8(out.stderr).unwrap(),
    )
}

fn write_model(dir: &Path, name: &str, json: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, json).unwrap();
    p
}

const MODEL: &str = r#"{
  "lattice": "godel:3",
  "states": ["w1", "w2"],
  "valuation": { "p": { "w1": "1", "w2": "1/2" }, "q": { "w2": 2 } },
  "programs": {
    "a": [ { "from": "w1", "to": { "w2": "1" } }, { "from": "w2", "to": ["w1", "w2"] } ],
    "b": [ { "from": "w1", "to": ["w1"] } ]
  },
  "queries": ["<a>p", "[a*]p", "<a & b>(p | q)"]
}"#;

fn schema_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("schemas")
}

fn schema(name: &str) -> JSONSchema {
    let load = |n: &str| -> Value {
        serde_json::from_str(&std::fs::read_to_string(schema_dir().join(n)).unwrap()).unwrap()
    };
    let mut opts = JSONSchema::options();
    for doc in ["model.schema.json", "modes.schema.json"] {
        opts.with_document(format!("https://cgdl.local/schemas/{doc}"), load(doc));
    }
    opts.compile(&load(name)).expect("schema compiles")
}

fn assert_valid(schema_name: &str, json: &str) -> Value {
    let v: Value = serde_json::from_str(json).expect("report is JSON");
    let s = schema(schema_name);
    if let Err(errors) = s.validate(&v) {
        let msgs: Vec<String> = errors.map(|e| format!("{} at {}", e, e.instance_path)).collect();
        panic!("{schema_name}: {msgs:?}");
    }
    v
}

#[test]
fn eval_queries_and_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let m = write_model(dir.path(), "m.json", MODEL);
    let m = m.to_str().unwrap();
    let (code, out, _) = cgdl(&["eval", m]);
    assert_eq!(code, 0);
    assert!(out.contains("seq=support-guarded diamond=definition"));
    assert_eq!(cgdl(&["eval", m, "<c>p"]).0, 3);
    assert_eq!(cgdl(&["eval", m, "<a>r"]).0, 3);
    assert_eq!(cgdl(&["eval", m, "<a>(p"]).0, 2);
    assert_eq!(cgdl(&["eval", m, "<a*>p", "--star-limit", "1"]).0, 4);
    assert_eq!(cgdl(&["gdl", m, "<a & b>p"]).0, 3);
    assert_eq!(cgdl(&["gdl", m, "<a;b>p"]).0, 0);
    assert_eq!(cgdl(&["eval", "/nonexistent/model.json"]).0, 2);
    let bad = write_model(dir.path(), "bad.json", r#"{"lattice":"boolean","states":["w1"],"programs":{"a":[{"from":"w9","to":["w1"]}]}}"#);
    assert_eq!(cgdl(&["eval", bad.to_str().unwrap(), "<a>T"]).0, 3);
    let broken = write_model(dir.path(), "broken.json", "{ not json");
    assert_eq!(cgdl(&["eval", broken.to_str().unwrap(), "T"]).0, 2);
}

#[test]
fn eval_json_validates_and_matches_text() {
    let dir = tempfile::tempdir().unwrap();
    let m = write_model(dir.path(), "m.json", MODEL);
    let m = m.to_str().unwrap();
    let (_, json, _) = cgdl(&["--format", "json", "eval", m, "--trace"]);
    let v = assert_valid("eval.schema.json", &json);
    let (_, text, _) = cgdl(&["eval", m]);
    let mut expected = format!("lattice {}, seq=support-guarded diamond=definition\n", v["lattice"].as_str().unwrap());
    for r in v["results"].as_array().unwrap() {
        expected.push_str(r["formula"].as_str().unwrap());
        if r["valid"].as_bool().unwrap() {
            expected.push_str("  (valid)");
        }
        expected.push('\n');
        for sv in r["values"].as_array().unwrap() {
            expected.push_str(&format!("  {}  {}\n", sv["state"].as_str().unwrap(), sv["value"].as_str().unwrap()));
        }
    }
    assert_eq!(text, expected);
}

#[test]
fn gdl_json_validates() {
    let dir = tempfile::tempdir().unwrap();
    let m = write_model(dir.path(), "m.json", MODEL);
    let (code, json, _) = cgdl(&["--format", "json", "gdl", m.to_str().unwrap(), "<a*>p"]);
    assert_eq!(code, 0);
    assert_valid("gdl.schema.json", &json);
}

#[test]
fn audit_json_validates_and_matches_text() {
    for lattice in ["boolean", "godel:3", "lukasiewicz:4"] {
        let (code, json, _) = cgdl(&["--format", "json", "audit", "--lattice", lattice]);
        assert_eq!(code, 0);
        let v = assert_valid("audit.schema.json", &json);
        let (_, text, _) = cgdl(&["audit", "--lattice", lattice]);
        for e in v["entries"].as_array().unwrap() {
            let line = format!(
                "{}  ({} checked)",
                if e["passed"].as_bool().unwrap() { "pass" } else { "FAIL" },
                e["checked"]
            );
            let law = e["law"].as_str().unwrap();
            assert!(
                text.lines().any(|l| l.trim_start().starts_with(&format!("{law} ")) && l.ends_with(&line)),
                "{law}"
            );
        }
    }
}

#[test]
fn lattice_file_with_failing_law_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    // Three-element chain whose star is the identity map: `1 ≤ 0*` fails.
    let table = r#"{"kind":"table","elements":["0","h","1"],
        "join":[[0,1,2],[1,1,2],[2,2,2]],
        "meet":[[0,0,0],[0,1,1],[0,1,2]],
        "seq":[[0,0,0],[0,1,1],[0,1,2]],
        "residuum":[[2,2,2],[0,2,2],[0,1,2]],
        "star":[0,1,2],"one":2}"#;
    let p = write_model(dir.path(), "l.json", table);
    let (code, out, _) = cgdl(&["audit", "--lattice-file", p.to_str().unwrap()]);
    assert_eq!(code, 1, "{out}");
    assert!(out.contains("FAIL"));
}

#[test]
fn compare_json_validates_and_matches_text() {
    let (code, json, _) = cgdl(&["--format", "json", "compare", "--states", "3", "--samples", "200", "--seed", "1"]);
    assert_eq!(code, 0);
    let v = assert_valid("compare.schema.json", &json);
    let (_, text, _) = cgdl(&["compare", "--states", "3", "--samples", "200", "--seed", "1"]);
    for p in v["pairs"].as_array().unwrap() {
        let line = format!(
            "{:.2}%  ({}/200)",
            p["percent"].as_f64().unwrap(),
            p["agreements"]
        );
        assert!(text.lines().any(|l| {
            let w: Vec<&str> = l.split_whitespace().collect();
            w.len() >= 2 && w[0] == p["left"].as_str().unwrap() && w[1] == p["right"].as_str().unwrap() && l.ends_with(&line)
        }));
    }
    assert_eq!(cgdl(&["compare", "--samples", "0"]).0, 2);
}

#[test]
fn axioms_json_validates_and_matches_text() {
    let args = ["axioms", "--lattice", "godel:3", "--samples", "40", "--seed", "5", "--all-modes", "--axiom", "2.5", "--axiom", "2.3"];
    let mut with_json = vec!["--format", "json"];
    with_json.extend(args);
    let (code, json, _) = cgdl(&with_json);
    let v = assert_valid("search.schema.json", &json);
    let (code_text, text, _) = cgdl(&args);
    assert_eq!(code, code_text);
    let rows = v["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 8);
    for r in rows {
        let result = match (r["failures"].as_u64().unwrap() == 0, r["claimed"].as_bool().unwrap()) {
            (true, _) => "pass",
            (false, true) => "FAIL",
            (false, false) => "fail*",
        };
        let want = vec![
            r["axiom"].as_str().unwrap().to_string(),
            r["modes"]["seq"].as_str().unwrap().to_string(),
            r["modes"]["diamond"].as_str().unwrap().to_string(),
            result.to_string(),
            r["checked"].to_string(),
            r["failures"].to_string(),
            r["unconverged"].to_string(),
        ];
        assert!(
            text.lines().any(|l| l.split_whitespace().map(str::to_string).collect::<Vec<_>>() == want),
            "{want:?}\n{text}"
        );
    }
    let failing = rows.iter().any(|r| r["failures"].as_u64().unwrap() > 0);
    assert_eq!(code, if failing { 1 } else { 0 });
    for w in v["witnesses"].as_array().unwrap() {
        assert!(text.contains(w["instance"].as_str().unwrap()));
    }
}

#[test]
fn axioms_default_to_one_mode() {
    let (code, out, _) = cgdl(&["axioms", "--lattice", "boolean", "--max-states", "2", "--exhaustive"]);
    assert_eq!(code, 0, "{out}");
    assert!(out.contains("coverage exhaustive"));
    assert!(!out.contains("proof-form"));
    assert!(!out.contains("literal"));
}

#[test]
fn search_witness_models_validate_and_load() {
    let (code, json, _) = cgdl(&[
        "--format", "json", "search", "--lattice", "boolean", "--exhaustive", "--all-modes", "--axiom", "2.5",
    ]);
    assert_eq!(code, 1);
    let v = assert_valid("search.schema.json", &json);
    let ws = v["witnesses"].as_array().unwrap();
    assert!(!ws.is_empty());
    let dir = tempfile::tempdir().unwrap();
    for w in ws {
        let model = assert_valid("model.schema.json", &w["model"].to_string());
        let p = write_model(dir.path(), "w.json", &model.to_string());
        let modes = &w["modes"];
        let (code, out, _) = cgdl(&[
            "eval",
            p.to_str().unwrap(),
            w["instance"].as_str().unwrap(),
            "--seq",
            modes["seq"].as_str().unwrap(),
            "--diamond",
            modes["diamond"].as_str().unwrap(),
        ]);
        assert_eq!(code, 0);
        assert!(!out.contains("(valid)"), "{out}");
    }
}

#[test]
fn search_config_file_and_errors() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_model(
        dir.path(),
        "c.json",
        r#"{"lattice":"godel:2","max_states":1,"axioms":["2.4","2.6"],"budget":{"kind":"exhaustive","cap":1000}}"#,
    );
    let (code, out, _) = cgdl(&["search", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code, 0, "{out}");
    assert!(out.contains("2.6"));
    let unknown = write_model(dir.path(), "u.json", r#"{"colour":"blue"}"#);
    assert_eq!(cgdl(&["search", "--config", unknown.to_str().unwrap()]).0, 2);
    assert_eq!(cgdl(&["search", "--formula", "<z>p"]).0, 3);
    assert_eq!(cgdl(&["search", "--program", "a;"]).0, 2);
    assert_eq!(cgdl(&["axioms", "--axiom", "9.9"]).0, 2);
}

#[test]
fn seed_falls_back_to_environment() {
    let run = |env: Option<&str>, extra: &[&str]| {
        let mut c = Command::new(BIN);
        c.args(["--format", "json", "compare", "--samples", "30"]).args(extra).env_remove("CGDL_SEED");
        if let Some(s) = env {
            c.env("CGDL_SEED", s);
        }
        String::from_utf8(c.output().unwrap().stdout).unwrap()
    };
    let from_env = run(Some("9"), &[]);
    assert_eq!(from_env, run(None, &["--seed", "9"]));
    assert_ne!(from_env, run(None, &[]));
}
