use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

use normalvol_core::fan::MarkedFan;
use normalvol_core::fixtures;
use normalvol_core::matroid::bergman_fan_at;
use normalvol_core::normalcx::ZValues;

const QUADRANT: &str = r#"{
  "ambient_dim": 2,
  "rays": [
    {"id": "x+", "u": ["1", "0"]}, {"id": "y+", "u": ["0", "1"]},
    {"id": "x-", "u": ["-1", "0"]}, {"id": "y-", "u": ["0", "-1"]}
  ],
  "max_cones": [
    {"rays": ["x+", "y+"], "weight": "1"}, {"rays": ["y+", "x-"], "weight": "1"},
    {"rays": ["x-", "y-"], "weight": "1"}, {"rays": ["y-", "x+"], "weight": "1"}
  ]
}"#;

const K4: &str = r#"{"ground_set": ["01","02","03","12","13","23"], "kind": "graphic",
  "edges": [["0","1"],["0","2"],["0","3"],["1","2"],["1","3"],["2","3"]]}"#;

struct Dir(TempDir);

impl Dir {
    fn new() -> Self {
        Dir(tempfile::tempdir().unwrap())
    }

    fn file(&self, name: &str, body: &str) -> PathBuf {
        let p = self.0.path().join(name);
        fs::write(&p, body).unwrap();
        p
    }

    fn path(&self, name: &str) -> PathBuf {
        self.0.path().join(name)
    }
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_normalvol")).args(args).env_remove("NORMALVOL_CAPS").output().unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap()
}

#[test]
fn fan_validate_reports() {
    let d = Dir::new();
    let q = d.file("q.json", QUADRANT);
    let o = run(&["fan-validate", "--fan", s(&q)]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(json(&o)["tropical"], true);

    let skewed = r#"{"ambient_dim":1,"rays":[{"id":"+","u":["1"]},{"id":"-","u":["-1"]}],
      "max_cones":[{"rays":["+"],"weight":"1"},{"rays":["-"],"weight":"2"}]}"#;
    let o = run(&["fan-validate", "--fan", s(&d.file("pm.json", skewed))]);
    assert_eq!(o.status.code(), Some(2));
    let r = json(&o);
    assert_eq!(r["valid"], true);
    assert_eq!(r["tropical"], false);
    assert_eq!(r["unbalanced"], serde_json::json!([[]]));

    let overlap = r#"{"ambient_dim":2,"rays":[{"id":"a","u":["1","0"]},{"id":"b","u":["0","1"]},{"id":"c","u":["1","1"]}],
      "max_cones":[{"rays":["a","b"],"weight":"1"},{"rays":["a","c"],"weight":"1"}]}"#;
    let o = run(&["fan-validate", "--fan", s(&d.file("bad.json", overlap))]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(json(&o)["valid"], false);
}

#[test]
fn volume_of_quadrant() {
    let d = Dir::new();
    let q = d.file("q.json", QUADRANT);
    let z = d.file("z.json", r#"{"z": {"x+": "1", "y+": "2", "x-": "3", "y-": "4"}}"#);
    let o = run(&["volume", "--fan", s(&q), "--z", s(&z)]);
    assert_eq!(stdout(&o).trim(), "48");
    let zero = d.file("zero.json", r#"{"z": {"x+": "0", "y+": "0", "x-": "0", "y-": "0"}}"#);
    for m in ["recursive", "poly", "geom", "chow"] {
        let o = run(&["volume", "--fan", s(&q), "--z", s(&zero), "--method", m]);
        assert_eq!(stdout(&o).trim(), "0", "{m}");
    }
    let half = d.file("h.json", r#"{"z": {"x+": "1/2", "y+": "1/2", "x-": "1/2", "y-": "1/2"}}"#);
    let o = run(&["volume", "--fan", s(&q), "--z", s(&half), "--all"]);
    assert_eq!(o.status.code(), Some(0));
    let r = json(&o);
    assert_eq!(r["agree"], true);
    assert_eq!(r["values"]["geom"], "2");
}

#[test]
fn missing_ray_value_is_an_error() {
    let d = Dir::new();
    let q = d.file("q.json", QUADRANT);
    let z = d.file("z.json", r#"{"z": {"x+": "1"}}"#);
    let o = run(&["volume", "--fan", s(&q), "--z", s(&z)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).starts_with("error:"));
}

#[test]
fn bergman_round_trip_and_volumes() {
    let d = Dir::new();
    let m = d.file("k4.json", K4);
    let out = d.path("k4");
    let o = run(&["bergman", "--matroid", s(&m), "--out", s(&out)]);
    assert_eq!(o.status.code(), Some(0));
    let fan = MarkedFan::parse(&fs::read_to_string(out.join("fan.json")).unwrap()).unwrap();
    assert_eq!(fan, bergman_fan_at(&fixtures::k4(), "01").unwrap());
    let za = ZValues::parse(&fs::read_to_string(out.join("z_alpha.json")).unwrap()).unwrap();
    assert_eq!(za.map().len(), fan.n_rays());

    let (f, g) = (out.join("fan.json"), out.join("gram.json"));
    assert_eq!(run(&["fan-validate", "--fan", s(&f)]).status.code(), Some(0));
    let o = run(&["volume", "--fan", s(&f), "--gram", s(&g), "--z", s(&out.join("z_beta.json")), "--all"]);
    let r = json(&o);
    assert_eq!(r["agree"], true);
    assert_eq!(r["values"]["chow"], "6");
    let o = run(&[
        "mixed-volume",
        "--fan",
        s(&f),
        "--gram",
        s(&g),
        "--z",
        s(&out.join("z_alpha.json")),
        "--z",
        s(&out.join("z_beta.json")),
    ]);
    assert_eq!(stdout(&o).trim(), "5");
    let o = run(&["deg", "--fan", s(&f), "--z", s(&out.join("z_alpha.json")), "--z", s(&out.join("z_beta.json"))]);
    assert_eq!(stdout(&o).trim(), "5");
}

#[test]
fn hrw_on_u23() {
    let d = Dir::new();
    let m = d.file("u23.json", r#"{"ground_set": ["a","b","c"], "kind": "uniform", "rank": 2}"#);
    let o = run(&["hrw", "--matroid", s(&m)]);
    assert_eq!(o.status.code(), Some(0));
    let r = json(&o);
    assert_eq!(r["mu_bar_charpoly"], serde_json::json!(["1", "2"]));
    assert_eq!(r["verdict"], "pass");
    assert_eq!(r["agree"], true);
}

#[test]
fn caps_from_environment() {
    let d = Dir::new();
    let m = d.file("k4.json", K4);
    let o = Command::new(env!("CARGO_BIN_EXE_normalvol"))
        .args(["hrw", "--matroid", s(&m)])
        .env("NORMALVOL_CAPS", "ground_set=4")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(1));
    let q = d.file("q.json", QUADRANT);
    let o = run(&["--caps", "rays=3", "fan-validate", "--fan", s(&q)]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn export_mesh_of_quadrant() {
    let d = Dir::new();
    let q = d.file("q.json", QUADRANT);
    let z = d.file("z.json", r#"{"z": {"x+": "1", "y+": "2", "x-": "3", "y-": "4"}}"#);
    let out = d.path("q.obj");
    let o = run(&["export-mesh", "--fan", s(&q), "--z", s(&z), "--out", s(&out)]);
    assert_eq!(o.status.code(), Some(0));
    let obj = fs::read_to_string(out).unwrap();
    assert_eq!(obj.lines().filter(|l| l.starts_with("g ")).count(), 4);
    let bad = d.file("bad.json", r#"{"z": {"x+": "1", "y+": "-2", "x-": "3", "y-": "4"}}"#);
    let o = run(&["export-mesh", "--fan", s(&q), "--z", s(&bad), "--out", s(&d.path("x.obj"))]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn af_check_is_seed_deterministic() {
    let d = Dir::new();
    let m = d.file("k4.json", K4);
    let out = d.path("k4");
    run(&["bergman", "--matroid", s(&m), "--out", s(&out)]);
    let (f, g) = (out.join("fan.json"), out.join("gram.json"));
    let args = ["af-check", "--fan", s(&f), "--gram", s(&g), "--samples", "6", "--seed", "11"];
    let a = run(&args);
    let b = run(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let r = json(&a);
    assert_eq!(r["basis"], "sufficient-conditions");
    assert_eq!(r["samples"]["triples"].as_array().unwrap().len(), 6);
    let other = run(&["af-check", "--fan", s(&f), "--gram", s(&g), "--samples", "6", "--seed", "12"]);
    assert_ne!(a.stdout, other.stdout);
}

#[test]
fn af_check_with_given_values() {
    let d = Dir::new();
    let q = d.file("q.json", QUADRANT);
    let z1 = d.file("a.json", r#"{"z": {"x+": "1", "y+": "2", "x-": "3", "y-": "4"}}"#);
    let z2 = d.file("b.json", r#"{"z": {"x+": "1", "y+": "1", "x-": "1", "y-": "1"}}"#);
    let o = run(&["af-check", "--fan", s(&q), "--z", s(&z1), "--z", s(&z2), "--lorentzian", "--samples", "3"]);
    assert_eq!(o.status.code(), Some(0));
    let r = json(&o);
    assert_eq!(r["given"]["margin"], "16");
    assert_eq!(r["lorentzian"]["pass"], true);
    let edge = d.file("e.json", r#"{"z": {"x+": "1", "y+": "0", "x-": "1", "y-": "1"}}"#);
    let o = run(&["af-check", "--fan", s(&q), "--z", s(&edge), "--z", s(&z2)]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn cubical_find_report_is_a_z_file() {
    let d = Dir::new();
    let q = d.file("q.json", QUADRANT);
    let c = d.path("c.json");
    assert_eq!(run(&["cubical-find", "--fan", s(&q), "--out", s(&c)]).status.code(), Some(0));
    let o = run(&["volume", "--fan", s(&q), "--z", s(&c)]);
    assert_eq!(stdout(&o).trim(), "1/2");
}

#[test]
fn reduce_check_on_quadrant() {
    let d = Dir::new();
    let q = d.file("q.json", QUADRANT);
    let o = run(&["reduce-check", "--fan", s(&q)]);
    assert_eq!(o.status.code(), Some(0));
    let r = json(&o);
    assert_eq!(r["condition_ii"]["stars"][0]["signature"]["n_plus"], 1);
    assert_eq!(r["verdict"], "pass");
}
