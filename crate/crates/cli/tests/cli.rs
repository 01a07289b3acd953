use std::path::Path;
use std::process::{Command, Output};

use fctp::formulations::{build_ip_z, FormulationCounts};
use fctp::io;

fn fctp() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_fctp"));
    cmd.env_remove("FCTP_OUT_DIR");
    cmd
}

fn run(args: &[&str]) -> Output {
    fctp().args(args).output().expect("binary runs")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn gen_tree(dir: &Path, seed: u64) -> std::path::PathBuf {
    let path = dir.join(format!("tree{seed}.json"));
    let out = run(&["gen", "tree", "--n", "6", "--b-max", "3", "--seed", &seed.to_string(), "-o", p(&path)]);
    assert!(out.status.success(), "{}", stderr(&out));
    path
}

#[test]
fn gen_is_reproducible_and_defaults_to_stdout() {
    let a = run(&["gen", "bipartite", "--n", "3", "--B", "4", "--r", "1", "--seed", "9"]);
    let b = run(&["gen", "bipartite", "--n", "3", "--B", "4", "--r", "1", "--seed", "9"]);
    assert!(a.status.success(), "{}", stderr(&a));
    assert_eq!(a.stdout, b.stdout);
    let doc: serde_json::Value = serde_json::from_slice(&a.stdout).unwrap();
    assert_eq!(doc["provenance"]["seed"], 9);
    let inst = io::instance_from_str(&stdout(&a)).unwrap().instance;
    assert_eq!(inst.num_arcs(), 9);
}

#[test]
fn out_dir_variable_picks_default_names() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("nested");
    let out = fctp().args(["gen", "tree", "--n", "4", "--seed", "2"]).env("FCTP_OUT_DIR", &out_dir).output().unwrap();
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(out.stdout.is_empty());
    let written = out_dir.join("tree-n4-s2.json");
    assert!(written.is_file());

    let out = fctp()
        .args(["export", p(&written), "--formulation", "qdp", "--format", "mps"])
        .env("FCTP_OUT_DIR", &out_dir)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", stderr(&out));
    let mps = std::fs::read_to_string(out_dir.join("tree-n4-s2.qdp.mps")).unwrap();
    assert!(mps.contains("NAME fctp-qdp\n") && mps.ends_with("ENDATA\n"));
}

#[test]
fn tree_dp_and_brute_force_agree() {
    let dir = tempfile::tempdir().unwrap();
    for seed in 0..4 {
        let inst = gen_tree(dir.path(), seed);
        let dp = dir.path().join("dp.json");
        let bf = dir.path().join("bf.json");
        let a = run(&["solve", p(&inst), "-o", p(&dp)]);
        let b = run(&["solve", p(&inst), "--method", "brute", "-o", p(&bf)]);
        assert!(a.status.success() && b.status.success(), "{}{}", stderr(&a), stderr(&b));
        let loaded = io::read_instance(&inst).unwrap();
        let sa = io::solution_from_str(&loaded, &std::fs::read_to_string(&dp).unwrap()).unwrap();
        let sb = io::solution_from_str(&loaded, &std::fs::read_to_string(&bf).unwrap()).unwrap();
        assert_eq!(sa.objective, sb.objective, "seed {seed}");
        assert!(stderr(&a).contains(&format!("objective {}", fctp::rational::to_text(&sa.objective))));
    }
}

#[test]
fn certificate_is_written() {
    let dir = tempfile::tempdir().unwrap();
    let inst = gen_tree(dir.path(), 5);
    let cert = dir.path().join("cert.json");
    let out = run(&["solve", p(&inst), "--root", "2", "--certificate", p(&cert)]);
    assert!(out.status.success(), "{}", stderr(&out));
    let (values, objective) = io::assignment_from_str(&std::fs::read_to_string(&cert).unwrap()).unwrap();
    assert!(values.values.keys().any(|k| k.starts_with("u_")) && values.values.keys().any(|k| k.starts_with("v_")));
    // the solution itself went to stdout
    let sol = io::solution_from_str(&io::read_instance(&inst).unwrap(), &stdout(&out)).unwrap();
    assert_eq!(objective, Some(sol.objective));

    let refused = run(&["solve", p(&inst), "--method", "brute", "--certificate", p(&cert)]);
    assert_eq!(refused.status.code(), Some(2));
}

#[test]
fn export_reports_z_count_and_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let inst = gen_tree(dir.path(), 7);
    let lp = dir.path().join("m.lp");
    let out = run(&["export", p(&inst), "--formulation", "ipz", "-o", p(&lp)]);
    assert!(out.status.success(), "{}", stderr(&out));
    let loaded = io::read_instance(&inst).unwrap();
    let z: u64 = loaded.arcs().iter().map(|a| a.cap + 1).sum();
    assert!(stderr(&out).contains(&format!(", {z} z")), "{}", stderr(&out));

    let model = io::read_model_lp(&lp).unwrap();
    let direct = build_ip_z(&loaded);
    assert_eq!(FormulationCounts::of(&model), FormulationCounts::of(&direct));
    assert_eq!(io::model_to_lp(&model).unwrap(), std::fs::read_to_string(&lp).unwrap());
}

#[test]
fn tree_formulations_refuse_cycles() {
    let dir = tempfile::tempdir().unwrap();
    let inst = dir.path().join("k22.json");
    let out = run(&["gen", "bipartite", "--n", "2", "--B", "3", "--r", "1", "--seed", "1", "-o", p(&inst)]);
    assert!(out.status.success(), "{}", stderr(&out));
    let solve = run(&["solve", p(&inst)]);
    assert_eq!(solve.status.code(), Some(2));
    assert!(stderr(&solve).starts_with("error:"));
    let export = run(&["export", p(&inst), "--formulation", "qsn"]);
    assert_eq!(export.status.code(), Some(2));
    // the generic formulations still export
    let ip = run(&["export", p(&inst), "--formulation", "ip", "--relax-eq"]);
    assert!(ip.status.success(), "{}", stderr(&ip));
    assert!(stdout(&ip).contains("Subject To"));
}

#[test]
fn stats_lists_every_formulation() {
    let dir = tempfile::tempdir().unwrap();
    let inst = gen_tree(dir.path(), 3);
    let out = run(&["stats", p(&inst)]);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = stdout(&out);
    assert!(text.starts_with("nodes 6\narcs 5\n"), "{text}");
    for tag in ["ip:", "ipz:", "qdp:", "qsn:", "qsnz:"] {
        assert!(text.lines().any(|l| l.starts_with(tag)), "{tag} missing in {text}");
    }
}

#[test]
fn three_partition_reduction() {
    let out = run(&["gen", "from-3partition", "--numbers", "4,5,6", "--b", "15"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let inst = io::instance_from_str(&stdout(&out)).unwrap().instance;
    assert_eq!(inst.num_nodes(), 4);
    let bad = run(&["gen", "from-3partition", "--numbers", "3,4,5", "--b", "12"]);
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn verify_exit_codes() {
    let ok = run(&["verify", "--suite", "lift-z", "--trials", "2", "--seed", "3"]);
    assert_eq!(ok.status.code(), Some(0), "{}", stderr(&ok));
    assert!(stdout(&ok).starts_with("PASS lift-z:"));
    let unknown = run(&["verify", "--suite", "nope"]);
    assert_eq!(unknown.status.code(), Some(2));
}
