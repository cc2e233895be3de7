use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn noma_lab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_noma-lab"))
        .args(args)
        .env_remove("NOMA_LAB_THREADS")
        .output()
        .expect("spawn noma-lab")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn path_str(p: &Path) -> &str {
    p.to_str().expect("utf-8 path")
}

fn read_csv(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let mut r = csv::Reader::from_path(path).expect("csv");
    let header = r.headers().unwrap().iter().map(String::from).collect();
    let rows = r
        .records()
        .map(|rec| rec.unwrap().iter().map(String::from).collect())
        .collect();
    (header, rows)
}

#[test]
fn lattice_prints_generator() {
    let o = noma_lab(&["lattice", "--p", "7"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.starts_with("lattice p=7 n=3"), "{text}");
}

#[test]
fn bad_prime_is_a_config_error_naming_p() {
    let o = noma_lab(&["lattice", "--p", "9"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("`p`"), "{}", stderr(&o));
}

#[test]
fn constellation_dump_schema() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("c.csv");
    let o = noma_lab(&[
        "constellation",
        "dump",
        "--p",
        "7",
        "--m1",
        "1",
        "--m2",
        "1",
        "--alpha",
        "0.3",
        "--out",
        path_str(&out),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let (header, rows) = read_csv(&out);
    assert_eq!(
        header,
        ["label1", "label2", "coord_1", "coord_2", "coord_3"]
    );
    assert_eq!(rows.len(), 64);
    let digits = |s: &str| s.trim_start_matches('-').replace(['.', '0'], "").len();
    assert!(rows
        .iter()
        .flat_map(|r| &r[2..])
        .all(|v| digits(v.split('e').next().unwrap()) <= 12));
}

#[test]
fn lattice_partition_with_alpha_is_rejected() {
    let o = noma_lab(&[
        "constellation",
        "--mode",
        "lattice_partition",
        "--alpha",
        "0.3",
        "--out",
        "-",
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("`alpha`"));
}

#[test]
fn dpmin_sweep_dominance_and_idempotence() {
    let dir = TempDir::new().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    let svg = dir.path().join("plot.svg");
    for (out, extra) in [(&a, vec!["--svg", path_str(&svg)]), (&b, vec![])] {
        let mut args = vec![
            "dpmin-sweep",
            "--p",
            "5",
            "--m1",
            "3",
            "--m2",
            "3",
            "--grid",
            "512",
            "--out",
            path_str(out),
        ];
        args.extend(extra);
        let o = noma_lab(&args);
        assert!(o.status.success(), "{}", stderr(&o));
    }
    let (header, rows) = read_csv(&a);
    assert_eq!(
        header,
        [
            "alpha",
            "dpmin_exact",
            "dpmin_bound",
            "demin_exact",
            "is_lattice_partition_alpha"
        ]
    );
    assert!(rows.len() >= 512);
    for r in &rows {
        let exact: f64 = r[1].parse().unwrap();
        let bound: f64 = r[2].parse().unwrap();
        assert!(bound >= exact - 1e-12, "{r:?}");
    }
    assert!(rows.iter().any(|r| r[4] == "true"));
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
    assert!(fs::read_to_string(&svg).unwrap().starts_with("<svg"));
}

#[test]
fn mindet_sweep_schema() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("m.csv");
    let o = noma_lab(&["mindet-sweep", "--grid", "11", "--out", path_str(&out)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let (header, rows) = read_csv(&out);
    assert_eq!(header, ["alpha", "min_det"]);
    assert_eq!(rows.len(), 11);
}

#[test]
fn ser_sim_writes_csv_and_metadata_reproducibly() {
    let dir = TempDir::new().unwrap();
    let run = |name: &str, threads: &str| {
        let out = dir.path().join(format!("{name}.csv"));
        let o = Command::new(env!("CARGO_BIN_EXE_noma-lab"))
            .args([
                "ser-sim",
                "--snr-db",
                "5:15:5",
                "--trials",
                "20000",
                "--seed",
                "42",
                "--out",
                path_str(&out),
            ])
            .env("NOMA_LAB_THREADS", threads)
            .output()
            .unwrap();
        assert!(o.status.success(), "{}", stderr(&o));
        out
    };
    let a = run("a", "1");
    let b = run("b", "3");
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
    let (header, rows) = read_csv(&a);
    assert_eq!(header, ["user", "snr_db", "trials", "errors", "ser"]);
    assert_eq!(rows.len(), 6);
    let meta: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(a.with_extension("json")).unwrap()).unwrap();
    assert_eq!(meta["seed"], 42);
    assert!(meta["rng"].as_str().unwrap().contains("ChaCha8"));
}

#[test]
fn config_file_sets_values_and_flags_override() {
    let dir = TempDir::new().unwrap();
    let cfg = dir.path().join("lab.ini");
    fs::write(&cfg, "[lattice]\np = 11\n\n[dpmin-sweep]\ngrid = 4\n").unwrap();
    let o = noma_lab(&["lattice", "--config", path_str(&cfg)]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(String::from_utf8_lossy(&o.stdout).starts_with("lattice p=11 n=5"));
    let o = noma_lab(&["lattice", "--config", path_str(&cfg), "--p", "5"]);
    assert!(String::from_utf8_lossy(&o.stdout).starts_with("lattice p=5 n=2"));
}

#[test]
fn unknown_config_key_names_the_field() {
    let dir = TempDir::new().unwrap();
    let cfg = dir.path().join("lab.ini");
    fs::write(&cfg, "[ser-sim]\ntrails = 5\n").unwrap();
    let o = noma_lab(&["lattice", "--config", path_str(&cfg)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("`trails`"), "{}", stderr(&o));

    fs::write(&cfg, "[nonsense]\np = 5\n").unwrap();
    let o = noma_lab(&["lattice", "--config", path_str(&cfg)]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn invalid_values_exit_two() {
    for args in [
        vec!["ser-sim", "--trials", "10", "--out", "-"],
        vec!["ser-sim", "--decoder", "magic"],
        vec!["dpmin-sweep", "--alpha-min", "-1"],
        vec!["reproduce", "fig99"],
        vec!["lattice", "--threads", "0"],
    ] {
        let o = noma_lab(&args);
        assert_eq!(o.status.code(), Some(2), "{args:?}: {}", stderr(&o));
    }
    let o = Command::new(env!("CARGO_BIN_EXE_noma-lab"))
        .args(["lattice"])
        .env("NOMA_LAB_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn reproduce_mindet_table_passes() {
    let dir = TempDir::new().unwrap();
    let o = noma_lab(&[
        "reproduce",
        "mindet-table",
        "--out-dir",
        path_str(dir.path()),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = String::from_utf8(o.stdout).unwrap();
    assert_eq!(
        text.lines().filter(|l| l.starts_with("PASS")).count(),
        4,
        "{text}"
    );
    assert!(dir.path().join("mindet_table.csv").exists());
}
