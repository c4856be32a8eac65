mod common;

use std::path::Path;
use std::process::{Command, Output};

use sbibench::synth::OccluderColor;

fn sbibench(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sbibench"))
        .args(args)
        .env_remove("SBI_DATA")
        .output()
        .unwrap()
}

fn text(b: &[u8]) -> String {
    String::from_utf8_lossy(b).into_owned()
}

fn write_script(dir: &Path) -> String {
    let mut s = common::gradient_scene(20);
    s.name = "Hall&Box".into();
    s.occluders.push(common::static_box(
        16,
        16,
        16,
        16,
        OccluderColor::Fixed(vec![255, 0, 0]),
        (0, 7),
    ));
    let path = dir.join("scene.txt");
    std::fs::write(&path, s.to_text()).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn synth_then_eval_then_aggregate() {
    let dir = tempfile::tempdir().unwrap();
    let script = write_script(dir.path());
    let data = dir.path().join("data");
    let out = sbibench(&[
        "synth",
        "--script",
        &script,
        "--out",
        data.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", text(&out.stderr));
    let manifest = data.join("manifest.txt");
    assert!(manifest.exists());

    let res = dir.path().join("res");
    let out = sbibench(&[
        "eval",
        "--manifest",
        manifest.to_str().unwrap(),
        "--methods",
        "median,ws2006:eps_stable=8,min_len=5",
        "--out",
        res.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", text(&out.stderr));
    assert!(res.join("Hall_Box__median.png").exists());
    assert!(res
        .join("Hall_Box__ws2006_eps_stable_8_min_len_5_delta_consensus_10.png")
        .exists());
    let report = std::fs::read_to_string(res.join("report.csv")).unwrap();
    assert_eq!(report.lines().count(), 3);
    assert!(
        report.contains("Hall&Box,median,0.0000,0,0.000000,0,0.000000,1.0000,inf,inf"),
        "{report}"
    );

    let out = sbibench(&[
        "aggregate",
        "--table",
        res.join("report.csv").to_str().unwrap(),
    ]);
    // one sequence cannot be ranked
    assert_eq!(out.status.code(), Some(2));

    let out = sbibench(&[
        "metrics",
        "--gt",
        data.join("gt.png").to_str().unwrap(),
        "--cb",
        res.join("Hall_Box__median.png").to_str().unwrap(),
    ]);
    assert!(out.status.success());
    assert_eq!(
        text(&out.stdout).trim(),
        "AGE=0.0000 EPs=0 pEPs=0.000000 CEPs=0 pCEPs=0.000000 MSSSIM=1.0000 PSNR=inf CQM=inf"
    );
}

#[test]
fn aggregate_fixture_markdown() {
    let table = concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures/table3.csv");
    let out = sbibench(&["aggregate", "--table", table]);
    assert!(out.status.success(), "{}", text(&out.stderr));
    let md = text(&out.stdout);
    assert_eq!(md.lines().count(), 9);
    assert!(md.lines().nth(2).unwrap().starts_with("| HighwayI |"));
    assert!(md.lines().last().unwrap().starts_with("| Snellen |"));

    let out = sbibench(&["aggregate", "--table", table, "--format", "csv"]);
    assert!(text(&out.stdout).starts_with("sequence,avg_rank,"));
}

#[test]
fn exit_codes() {
    assert_eq!(sbibench(&["--help"]).status.code(), Some(0));
    assert_eq!(sbibench(&["--version"]).status.code(), Some(0));
    assert_eq!(sbibench(&[]).status.code(), Some(1));
    assert_eq!(sbibench(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(
        sbibench(&["eval", "--methods", "nope", "--out", "x"])
            .status
            .code(),
        Some(1)
    );
    assert_eq!(
        sbibench(&["aggregate", "--table", "t.csv", "--format", "xml"])
            .status
            .code(),
        Some(1)
    );
    // no manifest and no SBI_DATA
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("o");
    assert_eq!(
        sbibench(&[
            "eval",
            "--methods",
            "median",
            "--out",
            out.to_str().unwrap()
        ])
        .status
        .code(),
        Some(1)
    );
    assert_eq!(
        sbibench(&["metrics", "--gt", "/missing.png", "--cb", "/missing.png"])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn eval_reports_missing_sequences_with_data_error() {
    let dir = tempfile::tempdir().unwrap();
    let m = dir.path().join("m.txt");
    std::fs::write(&m, "[sequence]\nname = gone\ndir = nowhere\npattern = %d.png\nfirst = 0\nlast = 2\ngt = gt.png\n").unwrap();
    let res = dir.path().join("res");
    let out = sbibench(&[
        "eval",
        "--manifest",
        m.to_str().unwrap(),
        "--methods",
        "median",
        "--out",
        res.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(text(&out.stderr).contains("gone"));
    assert!(res.join("report.csv").exists());
}
