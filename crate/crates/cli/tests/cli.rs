use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use mmdc_cli::format::{AnyInstance, InstanceFile, SolutionFile};
use mmdc_cli::gadget_dump::{parse_dump, GadgetDump};
use serde_json::json;
use tempfile::TempDir;

fn mmdc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mmdc"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn write_instance(
    dir: &Path,
    name: &str,
    bounds: [&[usize]; 4],
    costs: serde_json::Value,
) -> PathBuf {
    let doc = json!({
        "format": "mmdc-instance",
        "version": 1,
        "s": bounds[0].len(),
        "t": bounds[2].len(),
        "alpha": bounds[0],
        "alpha_cap": bounds[1],
        "beta": bounds[2],
        "beta_cap": bounds[3],
        "costs": costs,
    });
    let path = dir.join(name);
    std::fs::write(&path, serde_json::to_string_pretty(&doc).unwrap()).unwrap();
    path
}

fn trivial(dir: &Path) -> PathBuf {
    write_instance(dir, "trivial.json", [&[1], &[1], &[1], &[1]], json!([[5]]))
}

fn two_by_three(dir: &Path) -> PathBuf {
    write_instance(
        dir,
        "two_by_three.json",
        [&[1, 1], &[3, 3], &[1, 1, 1], &[2, 2, 2]],
        json!([[1, 2, 3], [4, 5, 6]]),
    )
}

fn two_by_two(dir: &Path) -> PathBuf {
    write_instance(
        dir,
        "two_by_two.json",
        [&[1, 1], &[2, 2], &[1, 1], &[2, 2]],
        json!([[3, 1], [4, 9]]),
    )
}

fn over_demanded(dir: &Path) -> PathBuf {
    write_instance(
        dir,
        "over_demanded.json",
        [&[2, 2], &[2, 2], &[0, 0], &[1, 1]],
        json!([[1, 1], [1, 1]]),
    )
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn solve_trivial_instance() {
    let dir = TempDir::new().unwrap();
    let out_path = dir.path().join("sol.json");
    let out = mmdc(&["solve", p(&trivial(dir.path())), "--output", p(&out_path)]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let sol = SolutionFile::read(&out_path).unwrap();
    assert_eq!(sol.cost, json!(5));
    assert_eq!(sol.pairs, vec![[0, 0]]);
    let cert = sol.certificate.unwrap();
    assert_eq!(cert.gadget_size, 1);
    assert_eq!(cert.nonmain_weight, json!(0));
}

#[test]
fn infeasible_instance_exits_three_and_writes_nothing() {
    let dir = TempDir::new().unwrap();
    let out_path = dir.path().join("sol.json");
    let out = mmdc(&["solve", p(&over_demanded(dir.path())), "--output", p(&out_path)]);
    assert_eq!(code(&out), 3);
    assert!(!out_path.exists());
    assert!(String::from_utf8_lossy(&out.stderr).contains("infeasible"));
}

#[test]
fn solve_two_by_three_costs_nine_and_verifies() {
    let dir = TempDir::new().unwrap();
    let inst = two_by_three(dir.path());
    let out_path = dir.path().join("sol.json");
    let out = mmdc(&["solve", p(&inst), "--check-oracle", "--check-invariants", "--output", p(&out_path)]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(SolutionFile::read(&out_path).unwrap().cost, json!(9));
    let verify = mmdc(&["verify", p(&inst), p(&out_path)]);
    assert_eq!(code(&verify), 0);
    assert!(String::from_utf8_lossy(&verify.stdout).starts_with("ok"));
}

#[test]
fn parse_errors_exit_two() {
    let dir = TempDir::new().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{ not json").unwrap();
    assert_eq!(code(&mmdc(&["solve", p(&bad)])), 2);
    assert_eq!(code(&mmdc(&["solve", p(&dir.path().join("missing.json"))])), 2);
    let negative = write_instance(dir.path(), "neg.json", [&[1], &[1], &[1], &[1]], json!([[-1]]));
    assert_eq!(code(&mmdc(&["solve", p(&negative)])), 2);
}

#[test]
fn verify_rejects_tampered_solutions() {
    let dir = TempDir::new().unwrap();
    let inst = two_by_three(dir.path());
    let sol_path = dir.path().join("sol.json");
    assert_eq!(code(&mmdc(&["solve", p(&inst), "--output", p(&sol_path)])), 0);
    let good = SolutionFile::read(&sol_path).unwrap();

    // stated cost differs from the pair sum
    let mut wrong_cost = good.clone();
    wrong_cost.cost = json!(8);
    let path = dir.path().join("wrong_cost.json");
    std::fs::write(&path, wrong_cost.to_json()).unwrap();
    let out = mmdc(&["verify", p(&inst), p(&path)]);
    assert_eq!(code(&out), 1);
    assert!(String::from_utf8_lossy(&out.stderr).contains("differs from recomputed cost"));

    // a1 loses every partner
    let mut dropped = good.clone();
    dropped.pairs.retain(|pair| pair[0] != 0);
    let path = dir.path().join("dropped.json");
    std::fs::write(&path, dropped.to_json()).unwrap();
    let out = mmdc(&["verify", p(&inst), p(&path)]);
    assert_eq!(code(&out), 1);
    assert!(String::from_utf8_lossy(&out.stderr).contains("below its demand"));
}

#[test]
fn oracle_matches_solver_and_respects_caps() {
    let dir = TempDir::new().unwrap();
    let inst = two_by_three(dir.path());
    let out_path = dir.path().join("oracle.json");
    let out = mmdc(&["oracle", p(&inst), "--check-oracle", "--output", p(&out_path)]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let sol = SolutionFile::read(&out_path).unwrap();
    assert_eq!(sol.cost, json!(9));
    assert_eq!(sol.pairs, vec![[0, 0], [0, 1], [1, 2]]);
    assert_eq!(sol.solver.method, "oracle");

    assert_eq!(code(&mmdc(&["oracle", p(&over_demanded(dir.path()))])), 3);

    let big = write_instance(
        dir.path(),
        "big.json",
        [&[0; 5], &[1; 5], &[0; 5], &[1; 5]],
        json!(vec![vec![1; 5]; 5]),
    );
    assert_eq!(code(&mmdc(&["oracle", p(&big)])), 4);
}

#[test]
fn gen_is_deterministic_and_feasible() {
    let dir = TempDir::new().unwrap();
    for mode in ["uniform", "euclidean"] {
        let a = dir.path().join(format!("{mode}_a.json"));
        let b = dir.path().join(format!("{mode}_b.json"));
        for path in [&a, &b] {
            let out = mmdc(&["gen", "--mode", mode, "-s", "3", "-t", "4", "--seed", "17", "--output", p(path)]);
            assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
        }
        let bytes = std::fs::read(&a).unwrap();
        assert_eq!(bytes, std::fs::read(&b).unwrap());
        let out = mmdc(&["solve", p(&a)]);
        assert_eq!(code(&out), 0);
    }
    let f = InstanceFile::read(&dir.path().join("euclidean_a.json")).unwrap();
    assert!(matches!(f.instance, AnyInstance::Float(_)));
    assert!(f.metadata.points_a.is_some());
}

#[test]
fn gen_rejects_impossible_parameters() {
    let out = mmdc(&["gen", "-s", "2", "-t", "2", "--min-demand", "3", "--max-bound", "3"]);
    assert_eq!(code(&out), 2);
}

#[test]
fn dump_gadget_trivial_and_two_by_two() {
    let dir = TempDir::new().unwrap();
    let out = mmdc(&["dump-gadget", p(&trivial(dir.path()))]);
    assert_eq!(code(&out), 0);
    let dump: GadgetDump<i64> = parse_dump(&String::from_utf8(out.stdout).unwrap()).unwrap();
    assert_eq!(dump.n, 1);
    assert_eq!(dump.weights, vec![5]);

    let inst = two_by_two(dir.path());
    let dump_path = dir.path().join("gadget.txt");
    assert_eq!(code(&mmdc(&["dump-gadget", p(&inst), "--output", p(&dump_path)])), 0);
    let text = std::fs::read_to_string(&dump_path).unwrap();
    let dump: GadgetDump<i64> = parse_dump(&text).unwrap();
    assert_eq!(dump.n, 6);
    let check = mmdc(&["dump-gadget", p(&inst), "--check", p(&dump_path)]);
    assert_eq!(code(&check), 0, "{}", String::from_utf8_lossy(&check.stderr));

    // a tampered weight no longer matches the instance
    let (head, weights) = text.split_once("weights\n").unwrap();
    let first_row_end = weights.find(' ').unwrap();
    let tampered = format!("{head}weights\n0{}", &weights[first_row_end..]);
    assert_ne!(tampered, text);
    std::fs::write(&dump_path, tampered).unwrap();
    assert_eq!(code(&mmdc(&["dump-gadget", p(&inst), "--check", p(&dump_path)])), 1);

    assert_eq!(code(&mmdc(&["dump-gadget", p(&over_demanded(dir.path()))])), 3);
}

#[test]
fn bench_counts_repeat_across_repetitions() {
    let out = mmdc(&["bench", "--sizes", "30,60", "--max-costs", "1,50", "--instances", "2", "--reps", "3", "--seed", "9"]);
    assert_eq!(code(&out), 0);
    let text = String::from_utf8(out.stdout).unwrap();
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    let rows: Vec<csv::StringRecord> = reader.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 2 * 2 * 2 * 3);
    // columns 6..=9: gadget_n, label_updates, augmentations, tree_growths
    let counts = |r: &csv::StringRecord| (6..=9).map(|k| r[k].to_string()).collect::<Vec<_>>();
    for run in rows.chunks(3) {
        assert!(run.iter().all(|r| counts(r) == counts(&run[0])));
    }
}
