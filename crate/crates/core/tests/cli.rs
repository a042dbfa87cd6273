use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use freeconvex::oracles::parse_svg_polygon;
use serde_json::Value;

fn data(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data").join(name).to_string_lossy().into_owned()
}

fn scratch(name: &str) -> PathBuf {
    let dir = Path::new(env!("CARGO_TARGET_TMPDIR")).join("cli");
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_freeconvex")).args(args).output().expect("binary runs")
}

fn report(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&out.stderr)))
}

#[test]
fn membership_of_the_generator() {
    let out = run(&["--quick", "membership", "--set", &data("ando.set.json"), "--point", &data("x.tuple.json")]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let r = report(&out);
    assert_eq!(r["schema"], "freeconvex/1");
    assert_eq!(r["result"]["verdict"], "IN");

    let out = run(&["--quick", "membership", "--set", &data("ando.set.json"), "--point", &data("y.tuple.json")]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(report(&out)["result"]["verdict"], "OUT");
}

#[test]
fn beta_of_ando_from_the_command_line() {
    let out = run(&["--quick", "constants", "beta", "--set", &data("ando.set.json"), "--k", "1"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let r = report(&out);
    let b = &r["result"]["bounds"];
    assert_eq!(r["result"]["name"], "beta");
    let (lo, hi) = (b["lower"].as_f64().unwrap(), b["upper"].as_f64().unwrap());
    assert!(lo >= 1.95 && hi <= 2.05, "[{lo}, {hi}]");
}

#[test]
fn plot_of_the_pauli_range() {
    let svg = scratch("pauli.svg");
    let out = run(&["plot-range", "--set", &data("pauli.set.json"), "--resolution", "720", "--svg", svg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let poly = parse_svg_polygon(&std::fs::read_to_string(&svg).unwrap());
    assert_eq!(poly.len(), 721);
    let worst = poly.iter().map(|(x, y)| (x.hypot(*y) - 1.0).abs()).fold(0.0, f64::max);
    assert!(worst < 1e-3, "{worst}");
}

#[test]
fn reports_are_reproducible_and_verify() {
    let (a, b) = (scratch("beta_a.json"), scratch("beta_b.json"));
    for p in [&a, &b] {
        let out = run(&["--quick", "--seed", "7", "--out", p.to_str().unwrap(), "constants", "gamma", "--set", &data("ando.set.json")]);
        assert_eq!(out.status.code(), Some(0));
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    // wall time sits in a sidecar
    let sidecar = format!("{}.timing.json", a.display());
    assert!(Path::new(&sidecar).exists());
    let out = run(&["--quick", "verify", a.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));

    let m = scratch("member.json");
    let out = run(&["--quick", "--out", m.to_str().unwrap(), "membership", "--set", &data("ando.set.json"), "--point", &data("y.tuple.json")]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(run(&["--quick", "verify", m.to_str().unwrap()]).status.code(), Some(0));

    // a tampered report fails verification
    let mut r: Value = serde_json::from_slice(&std::fs::read(&m).unwrap()).unwrap();
    r["result"]["verdict"] = "IN".into();
    let bad = scratch("tampered.json");
    std::fs::write(&bad, serde_json::to_vec(&r).unwrap()).unwrap();
    assert_eq!(run(&["--quick", "verify", bad.to_str().unwrap()]).status.code(), Some(1));
}

#[test]
fn exit_codes() {
    assert_eq!(run(&["membership", "--set", "no/such/file.json", "--point", &data("x.tuple.json")]).status.code(), Some(1));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(1));
    let bad = scratch("bad.json");
    std::fs::write(&bad, "{ not json").unwrap();
    let out = run(&["membership", "--set", bad.to_str().unwrap(), "--point", &data("x.tuple.json")]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("bad.json"));
    // d = 1 point against a d = 2 set
    let out = run(&["membership", "--set", &data("pauli.set.json"), "--point", &data("x.tuple.json")]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn catalog_and_set_algebra_commands() {
    let out = run(&["catalog"]);
    assert_eq!(out.status.code(), Some(0));
    let out = run(&["polar", "--set", "catalog:ando"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).contains("contraction"));
    let out = run(&["boxsum", "--left", &data("ando.tuple.json"), "--right", &data("ando.tuple.json")]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    assert_eq!((r["result"]["d"].as_u64(), r["result"]["n"].as_u64()), (Some(2), Some(4)));
}
