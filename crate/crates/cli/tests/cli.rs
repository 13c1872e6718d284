use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn condpath(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_condpath")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn write(dir: &TempDir, name: &str, body: &str) -> PathBuf {
    let p = dir.path().join(name);
    std::fs::write(&p, body).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

const CHAIN: &str = "# X -> Y -> Z\nX -> Y = 1\nY -> Z = 1\n";
const CHILD_AND_SPOUSE: &str = "X -> R = 0.8\nR -> Y = 0.9\nR -> S = 0.7\nR <-> S = 0.3\n";

#[test]
fn pcov_of_the_chain() {
    let dir = TempDir::new().unwrap();
    let f = write(&dir, "chain.txt", CHAIN);
    let o = condpath(&["-d", s(&f), "pcov", "X", "Y", "--given", "Z"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "0.333333333\n");
}

#[test]
fn dsep_disconnected() {
    let dir = TempDir::new().unwrap();
    let f = write(&dir, "two.txt", "var A = 1\nvar B = 2\n");
    let o = condpath(&["-d", s(&f), "dsep", "A", "B", "--given"]);
    assert_eq!(o.status.code(), Some(5), "--given needs a value");
    let o = condpath(&["-d", s(&f), "dsep", "A", "B"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "separated\n");
}

#[test]
fn child_and_spouse_is_not_applicable() {
    let dir = TempDir::new().unwrap();
    let f = write(&dir, "cs.txt", CHILD_AND_SPOUSE);
    let o = condpath(&["-d", s(&f), "factorize", "X", "Y", "--given", "S"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stdout(&o).contains("reentrant-route"));
    let o = condpath(&["-d", s(&f), "--json", "factorize", "X", "Y", "--given", "S"]);
    assert_eq!(o.status.code(), Some(3));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["applicable"], false);
    assert_eq!(v["failures"][0]["kind"], "reentrant-route");
}

#[test]
fn exit_codes() {
    let dir = TempDir::new().unwrap();
    let bad_syntax = write(&dir, "syntax.txt", "X -> Y = 1\nX => Y\n");
    let cyclic = write(&dir, "cycle.txt", "X -> Y = 1\nY -> X = 1\n");
    let singular = write(&dir, "pd.txt", "var X = 1\nvar Y = 1\nX <-> Y = 1.5\n");
    let chain = write(&dir, "chain.txt", CHAIN);

    let o = condpath(&["-d", s(&bad_syntax), "validate"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 2"));
    let o = condpath(&["-d", s(&cyclic), "validate"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stdout(&o).contains("directed cycle"));
    assert_eq!(condpath(&["-d", s(&singular), "cov", "X", "Y"]).status.code(), Some(2));
    assert_eq!(condpath(&["-d", s(&chain), "pcov", "X", "Q"]).status.code(), Some(5));
    assert_eq!(condpath(&["-d", s(&chain), "pcov", "X", "Y", "--given", "X"]).status.code(), Some(5));
    assert_eq!(condpath(&["pcov", "X", "Y"]).status.code(), Some(5));
    assert_eq!(condpath(&["frobnicate"]).status.code(), Some(5));
    assert_eq!(condpath(&["--help"]).status.code(), Some(0));
}

#[test]
fn json_and_text_carry_the_same_numbers() {
    let dir = TempDir::new().unwrap();
    let f = write(&dir, "f.txt", "A -> X = 0.7\nX -> Y = -0.4\nY -> B = 1.1\nvar A = 1.3\n");
    let text = stdout(&condpath(&["-d", s(&f), "factorize", "X", "Y", "--given", "B"]));
    let json: Value =
        serde_json::from_str(&stdout(&condpath(&["-d", s(&f), "--json", "factorize", "X", "Y", "--given", "B"]))).unwrap();
    let field = |key: &str| -> f64 {
        let line = text.lines().find(|l| l.starts_with(key)).unwrap();
        line.rsplit(' ').next().unwrap().parse().unwrap()
    };
    assert_eq!(field("value:"), json["value"].as_f64().unwrap());
    assert_eq!(field("oracle:"), json["oracle"].as_f64().unwrap());

    let text = stdout(&condpath(&["-d", s(&f), "pcov", "X", "Y", "--given", "A"]));
    let json: Value = serde_json::from_str(&stdout(&condpath(&["-d", s(&f), "--json", "pcov", "X", "Y", "--given", "A"]))).unwrap();
    assert_eq!(text.trim().parse::<f64>().unwrap(), json["partial_covariance"].as_f64().unwrap());
}

#[test]
fn output_is_deterministic() {
    let a = condpath(&["sweep", "--trials", "50", "--nodes", "6", "--seed", "9"]);
    let b = condpath(&["sweep", "--trials", "50", "--nodes", "6", "--seed", "9"]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(condpath(&["gen", "--seed", "4"]).stdout, condpath(&["gen", "--seed", "4"]).stdout);
}

#[test]
fn condition_writes_a_parseable_file() {
    let dir = TempDir::new().unwrap();
    let f = write(&dir, "chain.txt", CHAIN);
    let out = dir.path().join("out.txt");
    let o = condpath(&["-d", s(&f), "condition", "--on", "Y", "-o", s(&out)]);
    assert_eq!(o.status.code(), Some(0));
    let body = std::fs::read_to_string(&out).unwrap();
    assert!(body.contains("Y__Z -> Z = 1"));
    let o = condpath(&["-d", s(&out), "pcov", "X", "Z", "--given", "Y", "Y__Z"]);
    assert_eq!(stdout(&o), "0\n");
}

#[test]
fn generated_diagrams_validate() {
    let dir = TempDir::new().unwrap();
    for seed in 0..5 {
        let g = condpath(&["gen", "--nodes", "9", "--seed", &seed.to_string()]);
        let f = write(&dir, "g.txt", &stdout(&g));
        let o = condpath(&["-d", s(&f), "validate"]);
        assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    }
}

#[test]
fn simpson_search_finds_reversal() {
    let dir = TempDir::new().unwrap();
    let f = write(&dir, "tri.txt", "X -> Y = 1\nS -> X = 1\nS -> Y = 1\n");
    let o = condpath(&["-d", s(&f), "simpson", "X", "Y", "--given", "S", "--search", "1000", "--seed", "2"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.contains("sign reversal at trial"), "{text}");
    // the emitted witness parameters are a diagram file
    let body: String = text.lines().skip_while(|l| !l.starts_with("# witness")).map(|l| format!("{l}\n")).collect();
    let w = write(&dir, "w.txt", &body);
    assert_eq!(condpath(&["-d", s(&w), "validate"]).status.code(), Some(0));
}

#[test]
fn sweep_artifact_replays() {
    let dir = TempDir::new().unwrap();
    let art = dir.path().join("first.txt");
    let o = condpath(&["sweep", "--kind", "simpson", "--trials", "300", "--nodes", "6", "--artifact", s(&art)]);
    assert_eq!(o.status.code(), Some(0));
    assert!(art.exists(), "general sweeps produce reversals; {}", stdout(&o));
    let o = condpath(&["replay", s(&art)]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.ends_with("reproduced\n") && !text.contains("not reproduced"), "{text}");

    let body = std::fs::read_to_string(&art).unwrap().replace("# expect: reversal", "# expect: mismatch");
    let tampered = write(&dir, "tampered.txt", &body);
    let o = condpath(&["replay", s(&tampered)]);
    assert_eq!(o.status.code(), Some(4));
    assert!(stdout(&o).ends_with("not reproduced\n"));
}
