//! End-to-end smoke tests of the `smws` binary.

use std::fs;
use std::process::{Command, Output};

fn smws(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_smws"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

#[test]
fn gen_writes_deterministic_valid_json() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    for path in [&a, &b] {
        let out = smws(&[
            "gen",
            "--family",
            "montage-like",
            "--tasks",
            "50",
            "--seed",
            "1",
            "--out",
            path.to_str().unwrap(),
        ]);
        assert!(out.status.success());
    }
    let bytes_a = fs::read(&a).unwrap();
    assert!(!bytes_a.is_empty());
    assert_eq!(bytes_a, fs::read(&b).unwrap());
    // The output parses back as a valid workflow.
    let dag = smws_core::ingest::parse_json(&fs::read_to_string(&a).unwrap()).unwrap();
    assert_eq!(dag.task_count(), 50);
}

#[test]
fn gen_rejects_undersized_requests() {
    let out = smws(&["gen", "--family", "montage-like", "--tasks", "0"]);
    assert!(!out.status.success());
}

#[test]
fn schedule_prints_one_summary_row() {
    let dir = tempfile::tempdir().unwrap();
    let wf = dir.path().join("wf.json");
    assert!(smws(&[
        "gen",
        "--family",
        "epigenomics-like",
        "--tasks",
        "40",
        "--seed",
        "3",
        "--out",
        wf.to_str().unwrap(),
    ])
    .status
    .success());

    let trace = dir.path().join("trace.json");
    let out = smws(&[
        "schedule",
        "--algo",
        "smwso",
        "--alpha",
        "4",
        "--beta",
        "4",
        "--out",
        trace.to_str().unwrap(),
        wf.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{out:?}");
    let line = stdout(&out);
    for key in [
        "algo=smwso",
        "makespan_s=",
        "cost=",
        "energy_kwh=",
        "cr=",
        "tr=",
        "success=",
    ] {
        assert!(line.contains(key), "missing {key} in `{line}`");
    }
    // The trace JSON has the stable row shapes.
    let trace_json: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(&trace).unwrap()).unwrap();
    let task0 = &trace_json["tasks"][0];
    for field in ["task", "vm", "type", "ast", "aft", "utilization"] {
        assert!(!task0[field].is_null(), "task row missing {field}");
    }
    let vm0 = &trace_json["vms"][0];
    for field in ["lease_start", "lease_end", "billed_periods", "energy_kwh"] {
        assert!(!vm0[field].is_null(), "vm row missing {field}");
    }

    // Absolute QoS bypasses the factors.
    let out = smws(&[
        "schedule",
        "--algo",
        "heft",
        "--deadline",
        "1e9",
        "--budget",
        "1e9",
        wf.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    assert!(stdout(&out).contains("algo=heft"));
}

#[test]
fn schedule_rejects_unknown_algorithms_and_formats() {
    let dir = tempfile::tempdir().unwrap();
    let wf = dir.path().join("wf.json");
    assert!(smws(&[
        "gen",
        "--family",
        "ligo-like",
        "--tasks",
        "20",
        "--out",
        wf.to_str().unwrap(),
    ])
    .status
    .success());
    let out = smws(&["schedule", "--algo", "bogus", wf.to_str().unwrap()]);
    assert!(!out.status.success());

    let txt = dir.path().join("wf.txt");
    fs::write(&txt, "not a workflow").unwrap();
    let out = smws(&["schedule", txt.to_str().unwrap()]);
    assert!(!out.status.success());
}

#[test]
fn schedule_reads_dax_files() {
    let dax = r#"<adag>
  <job id="a" runtime="100">
    <uses file="f1" link="output" size="40000000"/>
  </job>
  <job id="b" runtime="50">
    <uses file="f1" link="input" size="40000000"/>
  </job>
  <child ref="b"><parent ref="a"/></child>
</adag>"#;
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("wf.dax");
    fs::write(&path, dax).unwrap();
    let out = smws(&[
        "schedule",
        "--algo",
        "smwsh",
        "--reference-mips",
        "4",
        "--deadline",
        "100000",
        "--budget",
        "1000",
        path.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{out:?}");
    assert!(stdout(&out).contains("tasks=2"));
}

#[test]
fn sweep_row_count_matches_the_grid() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("out");
    let out = smws(&[
        "sweep",
        "--families",
        "sipht-like,ligo-like",
        "--sizes",
        "20",
        "--alphas",
        "8,16",
        "--betas",
        "16",
        "--reps",
        "2",
        "--seed",
        "5",
        "--algos",
        "smwso,smwsh,heft",
        "--out-dir",
        out_dir.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{out:?}");
    let csv = fs::read_to_string(out_dir.join("results.csv")).unwrap();
    let rows = csv.lines().count() - 1;
    let (families, sizes, alphas, betas, reps, algos) = (2, 1, 2, 1, 2, 3);
    assert_eq!(rows, families * sizes * alphas * betas * reps * algos);
    assert!(out_dir.join("stats.json").exists());
    assert!(stdout(&out).contains("energy-saving ranking"));
}

#[test]
fn sweep_accepts_a_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("sweep.cfg");
    fs::write(
        &cfg,
        "families = ligo-like\nsizes = 20\nalphas = 16\nbetas = 16\nreps = 1\nseed = 3\nalgorithms = smwso\n",
    )
    .unwrap();
    let out_dir = dir.path().join("out");
    let out = smws(&[
        "sweep",
        "--config",
        cfg.to_str().unwrap(),
        "--out-dir",
        out_dir.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{out:?}");
    let csv = fs::read_to_string(out_dir.join("results.csv")).unwrap();
    assert_eq!(csv.lines().count() - 1, 1);
}

#[test]
fn stats_reproduces_reference_f_from_a_realizing_csv() {
    // Three 25-sample groups whose mean and sample variance realize the
    // reference summaries: two symmetric outliers around the mean carry the
    // whole variance.
    let spec: [(&str, f64, f64); 3] = [
        ("reews", 93.0, 183.33),
        ("smwso", 98.0, 47.92),
        ("smwsh", 88.52, 311.43),
    ];
    let mut csv = String::from(smws_core::stats::RESULTS_CSV_HEADER);
    for (algo, mean, var) in spec {
        let spread = (var * 24.0 / 2.0).sqrt();
        for i in 0..25 {
            let energy = match i {
                0 => mean + spread,
                1 => mean - spread,
                _ => mean,
            };
            csv.push_str(&format!(
                "\n{algo},montage-like,50,4,4,1,10,1,{energy},0.5,0.5,true"
            ));
        }
    }
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("results.csv");
    let report_path = dir.path().join("report.json");
    fs::write(&path, csv).unwrap();
    let out = smws(&[
        "stats",
        path.to_str().unwrap(),
        "--out",
        report_path.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{out:?}");
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(&report_path).unwrap()).unwrap();
    let f = report["cells"][0]["anova"]["f_stat"].as_f64().unwrap();
    assert!((f - 3.11).abs() < 0.01, "F {f}");
}

#[test]
fn stats_with_one_algorithm_skips_anova_with_notice() {
    let mut csv = String::from(smws_core::stats::RESULTS_CSV_HEADER);
    for i in 0..4 {
        csv.push_str(&format!(
            "\nsmwso,ligo-like,20,4,4,{i},10,1,2.5,0.5,0.5,true"
        ));
    }
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("solo.csv");
    fs::write(&path, csv).unwrap();
    let out = smws(&["stats", path.to_str().unwrap()]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("anova skipped"), "{text}");

    // Missing columns are named.
    let broken = dir.path().join("broken.csv");
    fs::write(&broken, "algorithm,family\nx,y").unwrap();
    let out = smws(&["stats", broken.to_str().unwrap()]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("size"));
}

#[test]
fn catalog_env_var_and_flag_are_honored() {
    let dir = tempfile::tempdir().unwrap();
    let catalog = dir.path().join("catalog.csv");
    fs::write(
        &catalog,
        "name,vcpu,cost_per_hour,power_min_w,power_max_w\ntiny,1,0.05,100,200\nbig,10,0.50,120,260\n",
    )
    .unwrap();
    let wf = dir.path().join("wf.json");
    assert!(smws(&[
        "gen",
        "--family",
        "ligo-like",
        "--tasks",
        "20",
        "--out",
        wf.to_str().unwrap(),
    ])
    .status
    .success());
    let out = smws(&[
        "schedule",
        "--catalog",
        catalog.to_str().unwrap(),
        wf.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{out:?}");

    let out = Command::new(env!("CARGO_BIN_EXE_smws"))
        .env("SMWS_CATALOG", &catalog)
        .args(["schedule", wf.to_str().unwrap()])
        .output()
        .unwrap();
    assert!(out.status.success(), "{out:?}");

    let out = Command::new(env!("CARGO_BIN_EXE_smws"))
        .env("SMWS_CATALOG", dir.path().join("missing.csv"))
        .args(["schedule", wf.to_str().unwrap()])
        .output()
        .unwrap();
    assert!(!out.status.success());
}
