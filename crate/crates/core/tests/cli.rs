//! End-to-end checks of the `cod` binary.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn cod(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cod"))
        .args(args)
        .output()
        .expect("spawn cod")
}

fn cod_env(args: &[&str], threads: &str) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cod"))
        .args(args)
        .env("COD_THREADS", threads)
        .output()
        .expect("spawn cod")
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn summary(dir: &Path) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(dir.join("summary.json")).unwrap()).unwrap()
}

fn generate(preset: &str, dir: &Path, extra: &[&str]) {
    let mut args = vec!["generate", preset, "-o", p(dir)];
    args.extend_from_slice(extra);
    let o = cod(&args);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
}

fn decompose(gen: &Path, out: &Path, dt: &str, extra: &[&str]) -> Output {
    let grid = gen.join("grid.csv");
    let signal = gen.join("signal.csv");
    let mut args = vec![
        "decompose",
        "--grid",
        p(&grid),
        "--signal",
        p(&signal),
        "--dt",
        dt,
        "-o",
        p(out),
    ];
    args.extend_from_slice(extra);
    cod(&args)
}

#[test]
fn help_and_version_exit_zero() {
    assert_eq!(cod(&["--help"]).status.code(), Some(0));
    assert_eq!(cod(&["--version"]).status.code(), Some(0));
}

#[test]
fn usage_errors_exit_one() {
    let o = cod(&["decompose", "--bogus"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("Usage"), "{}", stderr(&o));
    assert_eq!(cod(&[]).status.code(), Some(1));
    assert_eq!(
        cod(&["generate", "no-such-preset", "-o", "x"])
            .status
            .code(),
        Some(1)
    );
}

#[test]
fn sloshing_round_trip_recovers_amplitudes() {
    let d = tempfile::tempdir().unwrap();
    let gen = d.path().join("gen");
    generate("sloshing", &gen, &[]);
    let meta: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(gen.join("meta.json")).unwrap()).unwrap();
    assert_eq!(meta["nt"], 1000);
    assert_eq!(meta["nx"], 250);
    let out = d.path().join("out");
    let o = decompose(&gen, &out, "0.0221", &[]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let s = summary(&out);
    let a1 = s["modes"][0]["amplitude"].as_f64().unwrap();
    let a2 = s["modes"][1]["amplitude"].as_f64().unwrap();
    assert!((a1 / 15.0 - 1.0).abs() < 5e-3, "{a1}");
    assert!((a2 / 4.0 - 1.0).abs() < 5e-3, "{a2}");
    for m in &s["modes"].as_array().unwrap()[..2] {
        assert!(m["energy_fraction"].as_f64().unwrap() > 1e-6);
        assert!(m["travelling_index"].as_f64().unwrap() < 5e-3);
    }
    assert_eq!(s["degenerate"], false);
}

#[test]
fn summary_matches_schema() {
    let d = tempfile::tempdir().unwrap();
    let gen = d.path().join("gen");
    generate("sloshing", &gen, &["--nt", "128", "--nx", "20"]);
    let out = d.path().join("out");
    assert_eq!(
        decompose(&gen, &out, "0.0221", &["-k", "3"]).status.code(),
        Some(0)
    );
    let schema: serde_json::Value =
        serde_json::from_str(include_str!("../schema/summary.schema.json")).unwrap();
    let validator = jsonschema::validator_for(&schema).unwrap();
    let instance = summary(&out);
    let errors: Vec<String> = validator
        .iter_errors(&instance)
        .map(|e| e.to_string())
        .collect();
    assert!(errors.is_empty(), "{errors:#?}");
    assert_eq!(instance["modes"].as_array().unwrap().len(), 3);

    let mut broken = instance.clone();
    broken["modes"][0]["travelling_index"] = serde_json::json!(1.5);
    assert!(!validator.is_valid(&broken));
}

#[test]
fn rank_one_writes_one_column_pair() {
    let d = tempfile::tempdir().unwrap();
    let gen = d.path().join("gen");
    generate("fm-cubic", &gen, &["--nt", "200", "--nx", "15"]);
    let out = d.path().join("out");
    let o = decompose(&gen, &out, "0.05", &["-k", "1"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let modes = fs::read_to_string(out.join("modes.csv")).unwrap();
    let mut lines = modes.lines();
    assert_eq!(lines.next(), Some("x,w,re_phi1,im_phi1"));
    assert_eq!(lines.count(), 15);
    let coeffs = fs::read_to_string(out.join("coeffs.csv")).unwrap();
    assert_eq!(coeffs.lines().next(), Some("t,re_a1,im_a1"));
    assert_eq!(coeffs.lines().count(), 201);
    let spectra = fs::read_to_string(out.join("spectra.csv")).unwrap();
    assert_eq!(spectra.lines().next(), Some("frequency,amplitude1"));
    assert_eq!(spectra.lines().count(), 102);
    assert!(o.status.success());
}

#[test]
fn mismatched_dimensions_name_both_files() {
    let d = tempfile::tempdir().unwrap();
    let grid = d.path().join("grid.csv");
    let signal = d.path().join("signal.csv");
    fs::write(&grid, "0\n1\n2\n").unwrap();
    fs::write(&signal, "1,2\n3,4\n5,6\n7,8\n").unwrap();
    let out = d.path().join("out");
    let o = cod(&[
        "decompose",
        "--grid",
        p(&grid),
        "--signal",
        p(&signal),
        "--dt",
        "0.1",
        "-o",
        p(&out),
    ]);
    assert_eq!(o.status.code(), Some(1));
    let err = stderr(&o);
    assert!(err.contains(p(&grid)) && err.contains(p(&signal)), "{err}");
}

#[test]
fn malformed_files_report_line_numbers() {
    let d = tempfile::tempdir().unwrap();
    let grid = d.path().join("grid.csv");
    let signal = d.path().join("signal.csv");
    let out = d.path().join("out");
    fs::write(&grid, "0\n1\n").unwrap();
    fs::write(&signal, "1,2\n3,4\n5,abc\n7,8\n").unwrap();
    let o = cod(&[
        "decompose",
        "--grid",
        p(&grid),
        "--signal",
        p(&signal),
        "--dt",
        "0.1",
        "-o",
        p(&out),
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(
        stderr(&o).contains(&format!("{}:3:2", p(&signal))),
        "{}",
        stderr(&o)
    );

    fs::write(&signal, "1,2\n3,4\n5,6\n").unwrap();
    let o = cod(&[
        "decompose",
        "--grid",
        p(&grid),
        "--signal",
        p(&signal),
        "--dt",
        "0.1",
        "-o",
        p(&out),
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("count ≥ 4"), "{}", stderr(&o));

    let o = cod(&[
        "decompose",
        "--grid",
        p(&grid),
        "--signal",
        p(&d.path().join("missing.csv")),
        "--dt",
        "0.1",
        "-o",
        p(&out),
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("missing.csv"));
}

#[test]
fn zero_field_is_degenerate() {
    let d = tempfile::tempdir().unwrap();
    let grid = d.path().join("grid.csv");
    let signal = d.path().join("signal.csv");
    fs::write(&grid, "0\n1\n2\n").unwrap();
    fs::write(&signal, "0,0,0\n".repeat(8)).unwrap();
    let out = d.path().join("out");
    let o = cod(&[
        "decompose",
        "--grid",
        p(&grid),
        "--signal",
        p(&signal),
        "--dt",
        "0.1",
        "-o",
        p(&out),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let s = summary(&out);
    assert_eq!(s["degenerate"], true);
    assert_eq!(s["total_energy"].as_f64(), Some(0.0));
}

#[test]
fn weighting_modes_differ_only_on_irregular_grids() {
    let d = tempfile::tempdir().unwrap();
    let gen = d.path().join("gen");
    generate("sloshing-chebyshev", &gen, &["--nt", "256", "--nx", "40"]);
    let mut amps = Vec::new();
    for w in ["auto", "on", "off"] {
        let out = d.path().join(w);
        let o = decompose(&gen, &out, "0.0221", &["--weighted", w]);
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
        assert_eq!(summary(&out)["config"]["weighted"], w);
        amps.push(summary(&out)["modes"][0]["energy"].as_f64().unwrap());
    }
    assert_eq!(amps[0], amps[1]);
    assert_ne!(amps[0], amps[2]);
}

#[test]
fn thread_count_does_not_change_results() {
    let d = tempfile::tempdir().unwrap();
    let gen = d.path().join("gen");
    generate("damped", &gen, &["--nt", "128", "--nx", "64"]);
    let mut files = Vec::new();
    for threads in ["1", "3"] {
        let out = d.path().join(threads);
        let grid = gen.join("grid.csv");
        let signal = gen.join("signal.csv");
        let o = cod_env(
            &[
                "decompose",
                "--grid",
                p(&grid),
                "--signal",
                p(&signal),
                "--dt",
                "0.007",
                "-o",
                p(&out),
            ],
            threads,
        );
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
        files.push(
            ["summary.json", "modes.csv", "coeffs.csv"].map(|f| fs::read(out.join(f)).unwrap()),
        );
    }
    assert!(files[0] == files[1]);
    assert_eq!(
        cod_env(&["generate", "damped", "-o", p(&d.path().join("x"))], "0")
            .status
            .code(),
        Some(1)
    );
}

#[test]
fn noise_flags_are_seeded() {
    let d = tempfile::tempdir().unwrap();
    let (a, b, c) = (d.path().join("a"), d.path().join("b"), d.path().join("c"));
    for (dir, seed) in [(&a, "5"), (&b, "5"), (&c, "6")] {
        generate(
            "sloshing",
            dir,
            &["--nt", "32", "--nx", "8", "--noise", "0.5", "--seed", seed],
        );
    }
    let read = |dir: &Path| fs::read(dir.join("signal.csv")).unwrap();
    assert_eq!(read(&a), read(&b));
    assert_ne!(read(&a), read(&c));
}

#[test]
fn preset_rejects_foreign_flags() {
    let d = tempfile::tempdir().unwrap();
    let o = cod(&["generate", "damped", "--epsilon", "2", "-o", p(d.path())]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("--epsilon"));
}

#[test]
fn spectrum_subcommand_reads_peaks() {
    let d = tempfile::tempdir().unwrap();
    let gen = d.path().join("gen");
    generate("sloshing", &gen, &[]);
    let out = d.path().join("spectrum_out");
    let signal = gen.join("signal.csv");
    let o = cod(&[
        "spectrum",
        "--signal",
        p(&signal),
        "--dt",
        "0.0221",
        "--column",
        "0",
        "-o",
        p(&out),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = fs::read_to_string(out.join("spectrum.csv")).unwrap();
    let rows: Vec<(f64, f64)> = text
        .lines()
        .skip(1)
        .map(|l| {
            let mut c = l.split(',').map(|v| v.parse::<f64>().unwrap());
            (c.next().unwrap(), c.next().unwrap())
        })
        .collect();
    assert_eq!(rows.len(), 501);
    let mut sorted = rows.clone();
    sorted.sort_by(|a, b| b.1.total_cmp(&a.1));
    // column 0 sits at x = -200 mm, an antinode of both modes
    assert!((sorted[0].1 / 15.0 - 1.0).abs() < 0.01, "{:?}", sorted[0]);
    assert!((sorted[1].1 / 4.0 - 1.0).abs() < 0.01, "{:?}", sorted[1]);
    let o = cod(&[
        "spectrum",
        "--signal",
        p(&signal),
        "--dt",
        "0.0221",
        "--column",
        "250",
        "-o",
        p(&out),
    ]);
    assert_eq!(o.status.code(), Some(1));
}
