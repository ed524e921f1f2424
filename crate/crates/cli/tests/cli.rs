use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use flanders::io::{format_space, parse_map, parse_space, space_to_json};
use flanders::verify::parse_report;
use flanders::{named_space, CatalogName, FieldSpec};
use jsonschema::{Resource, Validator};
use serde_json::Value;
use tempfile::TempDir;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_flanders"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited")
}

fn schema_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../schemas")
}

fn load(name: &str) -> Value {
    serde_json::from_str(&fs::read_to_string(schema_dir().join(name)).unwrap()).unwrap()
}

/// Validator for `#/$defs/<def>` of `file`, or the whole schema when `def` is empty.
fn validator(file: &str, def: &str) -> Validator {
    let root = load(file);
    let schema = if def.is_empty() {
        root.clone()
    } else {
        serde_json::json!({ "$ref": format!("{}#/$defs/{def}", root["$id"].as_str().unwrap()) })
    };
    let mut opts = jsonschema::options();
    for f in ["matspace", "map", "census-report", "check-report", "query"] {
        let v = load(&format!("{f}.schema.json"));
        opts = opts.with_resource(format!("urn:flanders:{f}"), Resource::from_contents(v).expect("resource"));
    }
    opts.build(&schema).expect("schema compiles")
}

fn assert_valid(v: &Validator, doc: &str) {
    let value: Value = serde_json::from_str(doc).expect("json output");
    let errors: Vec<String> = v.iter_errors(&value).map(|e| e.to_string()).collect();
    assert!(errors.is_empty(), "{errors:?}\n{doc}");
}

fn emit(dir: &TempDir, name: &str, args: &[&str]) -> PathBuf {
    let o = run(&[&["catalog", "emit"], args].concat());
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let path = dir.path().join(name);
    fs::write(&path, &o.stdout).unwrap();
    path
}

#[test]
fn verify_second_u4_passes() {
    let o = run(&["verify", "second-u4"]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("PASS"));
}

#[test]
fn urank_of_j3_is_two() {
    let dir = TempDir::new().unwrap();
    let j3 = emit(&dir, "j3.txt", &["j3"]);
    let o = run(&["urank", j3.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    assert_eq!(stdout(&o).trim(), "2");
    let o = run(&["urank", j3.to_str().unwrap(), "--json"]);
    assert_valid(&validator("query.schema.json", "urank"), &stdout(&o));
}

#[test]
fn u3_has_no_two_decomposition() {
    let dir = TempDir::new().unwrap();
    let u3 = emit(&dir, "u3.txt", &["u3"]);
    let o = run(&["decomp", u3.to_str().unwrap(), "-r", "2"]);
    assert_eq!(code(&o), 1);
    assert!(stdout(&o).contains("no witness"));
    let o = run(&["decomp", u3.to_str().unwrap(), "-r", "2", "--json"]);
    assert_valid(&validator("query.schema.json", "decomp"), &stdout(&o));
}

#[test]
fn decomp_finds_triangular_split() {
    let dir = TempDir::new().unwrap();
    let t = emit(&dir, "t.txt", &["triang", "--q", "3", "--n", "3"]);
    let o = run(&["decomp", t.to_str().unwrap(), "-r", "3", "--split", "1,2"]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("sub-R(1,2)"));
    // a split that does not sum to r is a usage error
    assert_eq!(code(&run(&["decomp", t.to_str().unwrap(), "-r", "3", "--split", "1,1"])), 2);
}

#[test]
fn emitted_catalog_files_round_trip() {
    let dir = TempDir::new().unwrap();
    let schema = validator("matspace.schema.json", "");
    for c in CatalogName::ALL {
        let q = c.defining_field().unwrap_or(2);
        let size = c.fixed_size().unwrap_or(3);
        let entry = named_space(c, FieldSpec::new(q as u32).unwrap(), Some(size)).unwrap();
        let (qs, ns) = (q.to_string(), size.to_string());
        let text = fs::read_to_string(emit(&dir, "a.txt", &[&c.to_string(), "--q", &qs, "--n", &ns])).unwrap();
        assert_eq!(parse_space(&text).unwrap(), entry.space);
        assert_eq!(parse_space(&format_space(&entry.space)).unwrap(), entry.space);
        let json =
            fs::read_to_string(emit(&dir, "a.json", &[&c.to_string(), "--q", &qs, "--n", &ns, "--json"])).unwrap();
        assert_eq!(parse_space(&json).unwrap(), entry.space);
        assert_eq!(json, space_to_json(&entry.space));
        assert_valid(&schema, &json);
    }
}

#[test]
fn equiv_exit_codes() {
    let dir = TempDir::new().unwrap();
    let u3 = emit(&dir, "u3.txt", &["u3"]);
    let a3 = emit(&dir, "a3.txt", &["alt", "--q", "3", "--n", "3"]);
    let t3 = emit(&dir, "t3.txt", &["triang", "--q", "3", "--n", "3"]);
    let (u3, a3, t3) = (u3.to_str().unwrap(), a3.to_str().unwrap(), t3.to_str().unwrap());
    let schema = validator("query.schema.json", "equiv");
    let o = run(&["equiv", u3, u3, "--json"]);
    assert_eq!(code(&o), 0);
    assert_valid(&schema, &stdout(&o));
    let o = run(&["equiv", a3, t3, "--json"]);
    assert_eq!(code(&o), 1);
    assert_valid(&schema, &stdout(&o));
    // shapes must agree
    let j3 = emit(&dir, "j3.txt", &["j3"]);
    assert_eq!(code(&run(&["equiv", j3.to_str().unwrap(), a3])), 2);
}

#[test]
fn primitive_reports() {
    let dir = TempDir::new().unwrap();
    let a3 = emit(&dir, "a3.txt", &["alt", "--q", "2", "--n", "3"]);
    let o = run(&["primitive", a3.to_str().unwrap(), "--reduce", "--json"]);
    assert_eq!(code(&o), 0);
    assert_valid(&validator("query.schema.json", "primitive"), &stdout(&o));
    let t3 = emit(&dir, "t3.txt", &["triang", "--q", "2", "--n", "3"]);
    let o = run(&["primitive", t3.to_str().unwrap()]);
    assert_eq!(code(&o), 1);
    assert!(stdout(&o).contains("not primitive"));
}

const PLANE_MAP: &str = "matspace 1
q=3 n=3 p=1 kind=linear dim=1
base:
0
0
0
gen 1:
1
0
0
F(base): 0 0 0
F(gen 1): 0 0 1
";

#[test]
fn rc_check_plane_form_and_local() {
    let dir = TempDir::new().unwrap();
    let path = dir.path().join("m.txt");
    fs::write(&path, PLANE_MAP).unwrap();
    assert!(parse_map(PLANE_MAP).is_ok());
    let o = run(&["rc", "check", path.to_str().unwrap(), "--json"]);
    assert_eq!(code(&o), 1);
    assert_valid(&validator("query.schema.json", "rc"), &stdout(&o));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["quasi_range_compatible"], true);
    assert!(v["shape"]["PlaneForm"].is_object());

    fs::write(&path, PLANE_MAP.replace("F(gen 1): 0 0 1", "F(gen 1): 2 0 0")).unwrap();
    let o = run(&["rc", "check", path.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("local"));
}

#[test]
fn census_reports_round_trip() {
    let args = ["census", "--q", "2", "--n", "2", "--p", "2", "--r", "1", "--dim", "2", "--kind", "affine"];
    let text = run(&args);
    assert_eq!(code(&text), 0);
    let json = run(&[&args[..], &["--json"]].concat());
    assert_valid(&validator("census-report.schema.json", ""), &stdout(&json));
    let (mut a, mut b) = (parse_report(&stdout(&text)).unwrap(), parse_report(&stdout(&json)).unwrap());
    a.wall_time_ms = 0;
    b.wall_time_ms = 0;
    assert_eq!(a, b);
    assert_eq!(a.classes["U2"], 9);
}

#[test]
fn verify_json_and_listing() {
    let o = run(&["verify", "convexity", "--json"]);
    assert_eq!(code(&o), 0);
    assert_valid(&validator("check-report.schema.json", ""), &stdout(&o));
    let o = run(&["verify", "list"]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).lines().any(|l| l.starts_with("rc-plane")));
    assert_eq!(code(&run(&["verify", "no-such-check"])), 2);
}

#[test]
fn usage_and_budget_errors() {
    assert_eq!(code(&run(&["urank", "/nonexistent/file"])), 2);
    assert_eq!(code(&run(&["census", "--q", "4", "--n", "2", "--p", "2", "--r", "1", "--dim", "1"])), 2);
    assert_eq!(code(&run(&["bogus"])), 2);
    let o = bin()
        .args(["census", "--q", "2", "--n", "3", "--p", "3", "--r", "2", "--dim", "4"])
        .env("FLANDERS_BUDGET", "10")
        .output()
        .unwrap();
    assert_eq!(code(&o), 3);
}
