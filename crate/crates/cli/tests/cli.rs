use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn corpus() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../corpus")
}

fn kit(args: &[&str]) -> Output {
    kit_env(args, &[])
}

fn kit_env(args: &[&str], env: &[(&str, &str)]) -> Output {
    let mut c = Command::new(env!("CARGO_BIN_EXE_ptss-kit"));
    c.args(args).env_remove("PTSS_KIT_THREADS");
    for (k, v) in env {
        c.env(k, v);
    }
    c.output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn file(name: &str) -> String {
    corpus().join(name).to_string_lossy().into_owned()
}

#[test]
fn whole_corpus_meets_its_expectations() {
    let dir = corpus();
    let o = kit(&["corpus-run", dir.to_str().unwrap()]);
    let out = stdout(&o);
    assert_eq!(o.status.code(), Some(0), "{out}{}", stderr(&o));
    assert!(out.ends_with(" 0 mismatches\n"));
    assert!(!out.contains("FAIL"));
    let headers: usize = fs::read_dir(&dir)
        .unwrap()
        .map(|e| fs::read_to_string(e.unwrap().path()).unwrap())
        .map(|t| t.lines().filter(|l| l.starts_with("#!")).count())
        .sum();
    assert_eq!(out.lines().filter(|l| l.starts_with("ok ")).count(), headers);
}

#[test]
fn flipped_expectation_is_reported() {
    let tmp = tempfile::tempdir().unwrap();
    let src = fs::read_to_string(corpus().join("mixed_match.pts")).unwrap();
    let flipped = src.replace("#! bisim ; branching t0 u1 ; no", "#! bisim ; branching t0 u1 ; yes");
    assert_ne!(src, flipped);
    fs::write(tmp.path().join("flipped.pts"), flipped).unwrap();
    fs::copy(corpus().join("inert_tau.pts"), tmp.path().join("inert_tau.pts")).unwrap();
    let o = kit(&["corpus-run", tmp.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    let out = stdout(&o);
    let fails: Vec<&str> = out.lines().filter(|l| l.starts_with("FAIL")).collect();
    assert_eq!(fails.len(), 1, "{out}");
    assert!(fails[0].contains("flipped.pts:2"));
    assert!(fails[0].contains("expected yes, got no"));
    assert!(out.ends_with(" 1 mismatches\n"));
}

#[test]
fn empty_directory_passes() {
    let tmp = tempfile::tempdir().unwrap();
    fs::write(tmp.path().join("notes.txt"), "not a corpus file").unwrap();
    let o = kit(&["corpus-run", tmp.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "0 files, 0 checks, 0 mismatches\n");
}

#[test]
fn malformed_headers_are_usage_errors() {
    for header in [
        "#! bisim ; branching t0 ; no",
        "#! bisim ; branching t0 u1 ; maybe",
        "#! frobnicate ; x",
        "#! oracle ; six ; agree",
        "#! format ; fail ; g",
    ] {
        let tmp = tempfile::tempdir().unwrap();
        let src = fs::read_to_string(corpus().join("mixed_match.pts")).unwrap();
        fs::write(tmp.path().join("bad.pts"), format!("{header}\n{src}")).unwrap();
        let o = kit(&["corpus-run", tmp.path().to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(2), "{header}");
        assert!(stderr(&o).contains("bad.pts:1"), "{}", stderr(&o));
    }
}

#[test]
fn missing_directory_is_a_usage_error() {
    let o = kit(&["corpus-run", "/nonexistent/corpus"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn output_independent_of_thread_count() {
    let dir = corpus();
    let d = dir.to_str().unwrap();
    let one = kit_env(&["corpus-run", d], &[("PTSS_KIT_THREADS", "1")]);
    let four = kit_env(&["corpus-run", d], &[("PTSS_KIT_THREADS", "4")]);
    assert_eq!(one.status.code(), Some(0));
    assert_eq!(stdout(&one), stdout(&four));
    let bad = kit_env(&["corpus-run", d], &[("PTSS_KIT_THREADS", "many")]);
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn bisim_exit_codes_on_mixed_match() {
    let f = file("mixed_match.pts");
    let no = kit(&["bisim", &f, "--kind", "branching", "t0", "u1"]);
    assert_eq!(no.status.code(), Some(1));
    let out = stdout(&no);
    assert!(out.starts_with("NO\nwitness: "), "{out}");
    let yes = kit(&["bisim", &f, "--kind", "pbranching", "t0", "u1"]);
    assert_eq!(yes.status.code(), Some(0));
    assert_eq!(stdout(&yes), "YES\n");
    let rooted = kit(&["bisim", &f, "--kind", "rooted", "t0", "t1"]);
    assert_eq!(rooted.status.code(), Some(1));
    let unknown = kit(&["bisim", &f, "t0", "nowhere"]);
    assert_eq!(unknown.status.code(), Some(2));
    let lone = kit(&["bisim", &f, "t0"]);
    assert_eq!(lone.status.code(), Some(2));
}

#[test]
fn bisim_json_and_partition() {
    let f = file("mixed_match.pts");
    let o = kit(&["--json", "bisim", &f, "--kind", "branching", "t1", "u1"]);
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["related"], Value::Bool(false));
    assert!(v["witness"]["label"].is_string());
    let p = kit(&["bisim", &file("inert_tau.pts")]);
    assert_eq!(p.status.code(), Some(0));
    let text = stdout(&p);
    let classes: Vec<&str> = text.lines().collect();
    assert!(classes.contains(&"{ z }"));
    assert_eq!(classes.len(), 2);
    assert_eq!(kit(&["bisim", &file("inert_tau.pts"), "--kind", "rooted"]).status.code(), Some(2));
}

#[test]
fn bisim_on_a_specification() {
    let f = file("running.ptss");
    let o = kit(&["bisim", &f, "+(a.delta(0), a.delta(0))", "a.delta(0)"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let o = kit(&["bisim", &f, "a.delta(0)", "b.delta(0)"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn stable_model_exit_codes() {
    let o = kit(&["stable-model", &file("mutual_negation.ptss")]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("unknown (2):"));
    let o = kit(&["stable-model", &file("single_negation.ptss")]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("  g --b-> ^g\n"));
    let deep = kit(&[
        "stable-model",
        &file("running.ptss"),
        "--root",
        "a.delta(a.delta(a.delta(0)))",
        "--max-depth",
        "2",
    ]);
    assert_eq!(deep.status.code(), Some(3));
    let wide = kit(&["stable-model", &file("running.ptss"), "--root", "a.delta(b.delta(0))", "--max-states", "2"]);
    assert_eq!(wide.status.code(), Some(3));
    let o = kit(&["--json", "stable-model", &file("single_negation.ptss")]);
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["complete"], Value::Bool(true));
    assert_eq!(v["iterations"], Value::from(2));
}

#[test]
fn pts_round_trips_through_a_file() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("running.pts");
    let root = "+(a.delta(0), b.oplus{1/2: delta(0), 1/2: delta(a.delta(0))})";
    let o = kit(&["pts", &file("running.ptss"), "--root", root, "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(stdout(&o), "wrote 3 states, 3 transitions\n");
    let printed = kit(&["pts", &file("running.ptss"), "--root", root]);
    assert_eq!(stdout(&printed), fs::read_to_string(&out).unwrap());
    let o = kit(&["bisim", out.to_str().unwrap(), "a.delta(0)", "a.delta(0)"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let o = kit(&["pts", &file("mutual_negation.ptss")]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn check_format_exit_codes() {
    let o = kit(&["check-format", &file("wild_untested.ptss")]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("g violates 2b"));
    let o = kit(&["--json", "check-format", &file("wild_patience.ptss")]);
    assert_eq!(o.status.code(), Some(0));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["overall"], Value::from("pass"));
    let patience = v["rules"].as_array().unwrap().iter().find(|r| r["rule"] == "g_patience").unwrap();
    assert_eq!(patience["verdict"]["kind"], Value::from("patience_rule"));
}

#[test]
fn parse_errors_name_the_location() {
    let tmp = tempfile::tempdir().unwrap();
    let bad = tmp.path().join("bad.ptss");
    fs::write(&bad, "ptss bad\nactions a\nop 0 : -> s\n0 --a-> \n").unwrap();
    let o = kit(&["check-format", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("bad.ptss:4:"), "{}", stderr(&o));
}

#[test]
fn probe_congruence_files() {
    let tmp = tempfile::tempdir().unwrap();
    let pairs = tmp.path().join("pairs");
    let contexts = tmp.path().join("contexts");
    fs::write(&pairs, "# u ; v\na.delta(b.delta(0)) ; a.delta(tau.delta(b.delta(0)))\n").unwrap();
    fs::write(&contexts, "f([])\n\n[]\n").unwrap();
    let (p, c) = (pairs.to_str().unwrap(), contexts.to_str().unwrap());
    let o = kit(&["probe-congruence", &file("wild_untested.ptss"), p, c]);
    assert_eq!(o.status.code(), Some(1), "{}", stderr(&o));
    let out = stdout(&o);
    assert!(out.starts_with("checked 2 instances, 1 violations\n"), "{out}");
    assert!(out.contains("  f([]) : "));
    let o = kit(&["probe-congruence", &file("wild_patience.ptss"), p, c]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let o = kit(&["--json", "probe-congruence", &file("wild_untested.ptss"), p, c, "--kind", "branching"]);
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["violations"].as_array().unwrap().len(), 1);
    fs::write(&contexts, "g([], [])\n").unwrap();
    let o = kit(&["probe-congruence", &file("wild_untested.ptss"), p, c]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("contexts:1"));
}

#[test]
fn json_errors_carry_the_exit_code() {
    let o = kit(&["--json", "stable-model", &file("running.ptss"), "--root", "a.delta(b.delta(0))", "--max-states", "2"]);
    assert_eq!(o.status.code(), Some(3));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["exit"], Value::from(3));
    assert!(v["error"].as_str().unwrap().contains("max states 2"));
    assert!(stderr(&o).starts_with("error: "));
}

#[test]
fn unknown_subcommand_is_a_usage_error() {
    assert_eq!(kit(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(kit(&["bisim", &file("mixed_match.pts"), "--kind", "strong"]).status.code(), Some(2));
}
