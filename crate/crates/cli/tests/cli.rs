use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use std::time::{Duration, Instant};

use nrflow_cli::{read_table, ScenarioConfig, SystemConfig};

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn shipped(name: &str) -> PathBuf {
    configs().join(format!("{name}.toml"))
}

fn nrflow(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nrflow")).args(args).output().expect("run nrflow")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn field(out: &str, key: &str) -> f64 {
    let prefix = format!("{key}: ");
    out.lines()
        .find_map(|l| l.strip_prefix(&prefix))
        .and_then(|v| v.split_whitespace().next())
        .and_then(|v| v.parse().ok())
        .unwrap_or_else(|| panic!("no numeric `{key}` in\n{out}"))
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// Parses a CSV whose last column is text.
fn sweep_rows(path: &Path) -> Vec<(f64, f64, f64, String)> {
    let mut rd = csv::Reader::from_path(path).unwrap();
    assert_eq!(
        rd.headers().unwrap().iter().collect::<Vec<_>>(),
        ["alpha", "tail_max_ref_pred_error", "tail_max_tracking_error", "status"]
    );
    rd.records()
        .map(|r| {
            let r = r.unwrap();
            let n = |k: usize| r[k].parse::<f64>().unwrap();
            (n(0), n(1), n(2), r[3].to_string())
        })
        .collect()
}

fn check_trace_file(path: &Path, n: usize, m: usize) {
    let t = read_table(path).unwrap();
    assert_eq!(t.header.len(), 1 + n + 4 * m + 1, "{}", path.display());
    assert_eq!(t.header.first().map(String::as_str), Some("t"));
    assert_eq!(t.header.last().map(String::as_str), Some("V"));
    let times = t.column("t").unwrap();
    assert!(!times.is_empty());
    assert!(times.windows(2).all(|w| w[1] > w[0]), "t not monotone in {}", path.display());
}

#[test]
fn shipped_scenarios_run_cleanly() {
    let dir = tempfile::tempdir().unwrap();
    let cases = [
        ("pendulum", None, 2, 1),
        ("pendulum_attenuated", None, 2, 1),
        ("lti_speedup", None, 2, 1),
        ("memoryless_sine", None, 0, 1),
        ("platoon_unicycle", Some(4), 3, 2),
        ("platoon_bicycle", Some(4), 6, 2),
    ];
    for (name, agents, n, m) in cases {
        let out = dir.path().join(format!("{name}.csv"));
        let start = Instant::now();
        let o = nrflow(&["simulate", s(&shipped(name)), "--out", s(&out)]);
        assert!(start.elapsed() < Duration::from_secs(60), "{name} took {:?}", start.elapsed());
        assert_eq!(code(&o), 0, "{name}: {}", stderr(&o));
        let text = stdout(&o);
        assert!(text.contains("status: ok"), "{text}");
        match agents {
            None => {
                check_trace_file(&out, n, m);
                for key in ["tail_max_tracking_error", "peak_input", "lyapunov_slope"] {
                    assert!(field(&text, key).is_finite(), "{key}");
                }
            }
            Some(k) => {
                for i in 1..=k {
                    check_trace_file(&dir.path().join(format!("{name}_agent{i}.csv")), n, m);
                }
                let metrics = read_table(&dir.path().join(format!("{name}_platoon.csv"))).unwrap();
                assert_eq!(metrics.header.iter().filter(|h| h.starts_with("distance_")).count(), k - 1);
                assert_eq!(field(&text, "ordering_violations"), 0.0);
            }
        }
    }
}

#[test]
fn shipped_configs_round_trip() {
    for entry in std::fs::read_dir(configs()).unwrap() {
        let path = entry.unwrap().path();
        let text = std::fs::read_to_string(&path).unwrap();
        if text.contains("[system]") {
            let cfg = SystemConfig::load(&path).unwrap();
            assert_eq!(toml::from_str::<SystemConfig>(&cfg.to_toml()).unwrap(), cfg);
        } else {
            let cfg = ScenarioConfig::load(&path).unwrap();
            let again = ScenarioConfig::parse_str(&path, &cfg.to_toml()).unwrap();
            assert_eq!(again, cfg, "{}", path.display());
        }
    }
}

#[test]
fn attenuated_swing_needs_far_less_force() {
    let dir = tempfile::tempdir().unwrap();
    let peak = |name: &str| {
        let o = nrflow(&["simulate", s(&shipped(name)), "--out", s(&dir.path().join("t.csv"))]);
        assert_eq!(code(&o), 0, "{}", stderr(&o));
        field(&stdout(&o), "peak_input")
    };
    let (full, soft) = (peak("pendulum"), peak("pendulum_attenuated"));
    assert!(full >= 5.0 * soft, "full {full}, attenuated {soft}");
}

#[test]
fn default_trace_path_uses_scenario_name() {
    let dir = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_nrflow"))
        .current_dir(dir.path())
        .args(["simulate", s(&shipped("memoryless_sine"))])
        .output()
        .unwrap();
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    check_trace_file(&dir.path().join("memoryless_sine_trace.csv"), 0, 1);
}

#[test]
fn inverted_grid_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let text = std::fs::read_to_string(shipped("pendulum")).unwrap().replace("tf = 25.0", "tf = -1.0");
    let cfg = write(dir.path(), "bad.toml", &text);
    let o = nrflow(&["simulate", s(&cfg), "--out", s(&dir.path().join("t.csv"))]);
    assert_eq!(code(&o), 2, "{}", stderr(&o));
}

#[test]
fn parse_errors_exit_2_with_position() {
    let dir = tempfile::tempdir().unwrap();
    let text = std::fs::read_to_string(shipped("pendulum")).unwrap().replace("alpha = 35.0", "alpha = 35.0\ngain = 2.0");
    let cfg = write(dir.path(), "unknown.toml", &text);
    let o = nrflow(&["simulate", s(&cfg)]);
    assert_eq!(code(&o), 2);
    let err = stderr(&o);
    assert!(err.contains("line") && err.contains("column") && err.contains("gain"), "{err}");

    let cfg = write(dir.path(), "broken.toml", "name = \"x\"\n[plant\nkind = 1\n");
    let o = nrflow(&["simulate", s(&cfg)]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("line 2"), "{}", stderr(&o));
}

#[test]
fn singular_jacobian_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let text = std::fs::read_to_string(shipped("memoryless_sine")).unwrap().replace("k = [[1.0]]", "k = [[0.0]]");
    let cfg = write(dir.path(), "sing.toml", &text);
    let o = nrflow(&["simulate", s(&cfg), "--out", s(&dir.path().join("t.csv"))]);
    assert_eq!(code(&o), 3, "{}", stdout(&o));
    assert!(stdout(&o).contains("status: singular_jacobian"));
}

#[test]
fn overflow_exits_4() {
    let dir = tempfile::tempdir().unwrap();
    let text = std::fs::read_to_string(shipped("memoryless_sine"))
        .unwrap()
        .replace("alpha = 10.0", "alpha = 1e300")
        .replace("amplitude = [1.0]", "amplitude = [1e10]")
        .replace("dt = 0.001", "dt = 0.5");
    let cfg = write(dir.path(), "ovf.toml", &text);
    let o = nrflow(&["simulate", s(&cfg), "--out", s(&dir.path().join("t.csv"))]);
    assert_eq!(code(&o), 4, "{}", stdout(&o));
    assert!(stdout(&o).contains("status: overflow"));
}

#[test]
fn certify_example_prints_q() {
    let o = nrflow(&["certify", s(&shipped("linstab_unstable_nonminphase"))]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let text = stdout(&o);
    assert!(text.contains("Q(s) = s + 1"), "{text}");
    assert!(text.contains("verdict: alpha_stable"), "{text}");
    assert!(!text.contains("advisory"));

    let o = nrflow(&["certify", "--json", s(&shipped("linstab_unstable_nonminphase"))]);
    assert_eq!(code(&o), 0);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["verdict"], "alpha_stable");
    let q: Vec<f64> = serde_json::from_value(v["q"]["coeffs"].clone()).unwrap();
    assert_eq!(q.len(), 2);
    assert!((q[0] - 1.0).abs() <= 1e-6 && (q[1] - 1.0).abs() <= 1e-6, "{q:?}");
    let p0: Vec<f64> = serde_json::from_value(v["p0"]["coeffs"].clone()).unwrap();
    for (got, want) in p0.iter().zip([97.18, 16.19, 1.0]) {
        assert!((got - want).abs() <= 0.05, "{p0:?}");
    }
    assert!(v["witness_alpha"].as_f64().is_some());
}

#[test]
fn certify_rhp_root_exits_5() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "rhp.toml",
        "[system]\na = [[0.0, 1.0], [0.0, 0.0]]\nb = [[0.0], [1.0]]\nc = [[1.0, -3.0]]\nhorizon = 0.25\n",
    );
    let o = nrflow(&["certify", s(&cfg)]);
    assert_eq!(code(&o), 5);
    assert!(stdout(&o).contains("verdict: not_certified"));
    assert!(stderr(&o).contains("root in RHP"), "{}", stderr(&o));
}

#[test]
fn certify_bad_dimensions_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let ragged = write(
        dir.path(),
        "ragged.toml",
        "[system]\na = [[2.0, 1.0], [-1.0]]\nb = [[0.0], [1.0]]\nc = [[-10.0, 1.0]]\nhorizon = 0.25\n",
    );
    let mismatched = write(
        dir.path(),
        "mismatch.toml",
        "[system]\na = [[2.0, 1.0], [-1.0, -1.0]]\nb = [[0.0], [1.0], [2.0]]\nc = [[-10.0, 1.0]]\nhorizon = 0.25\n",
    );
    for cfg in [ragged, mismatched] {
        let o = nrflow(&["certify", s(&cfg)]);
        assert_eq!(code(&o), 2, "{}", stderr(&o));
    }
}

#[test]
fn rootlocus_example_branches() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("locus.csv");
    let sys = shipped("linstab_unstable_nonminphase");
    let o = nrflow(&["rootlocus", s(&sys), "--alphas", "1:1e4:50", "--out", s(&out)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let t = read_table(&out).unwrap();
    assert_eq!(t.header, ["alpha", "branch_id", "re", "im"]);
    assert_eq!(t.rows.len(), 150);
    let last: Vec<&Vec<f64>> = t.rows.iter().filter(|r| r[0] == 1e4).collect();
    assert_eq!(last.len(), 3);

    let cert = nrflow(&["certify", "--json", s(&sys)]);
    let v: serde_json::Value = serde_json::from_slice(&cert.stdout).unwrap();
    let p0_roots: Vec<[f64; 2]> = serde_json::from_value(v["p0"]["roots"].clone()).unwrap();
    let mut unbounded = 0;
    let mut near_p0 = 0;
    for r in &last {
        let (re, im) = (r[2], r[3]);
        if ((re * re + im * im).sqrt() / 1e4 - 1.0).abs() <= 0.05 {
            unbounded += 1;
        } else if p0_roots.iter().any(|z| ((re - z[0]).powi(2) + (im - z[1]).powi(2)).sqrt() <= 1e-2) {
            near_p0 += 1;
        }
    }
    assert_eq!((unbounded, near_p0), (1, 2), "{last:?}");
}

#[test]
fn rootlocus_single_gain() {
    let o = nrflow(&["rootlocus", s(&shipped("linstab_unstable_nonminphase")), "--alphas", "10"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let text = stdout(&o);
    let rows: Vec<&str> = text.lines().skip(1).collect();
    assert_eq!(rows.len(), 3);
    let ids: Vec<&str> = rows.iter().map(|r| r.split(',').nth(1).unwrap()).collect();
    assert_eq!(ids, ["0", "1", "2"]);
}

#[test]
fn rootlocus_bad_alphas_exit_2() {
    let o = nrflow(&["rootlocus", s(&shipped("linstab_unstable_nonminphase")), "--alphas", "0:10:5"]);
    assert_eq!(code(&o), 2);
}

#[test]
fn sweep_injected_error_attenuates_per_decade() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("sweep.csv");
    let o = Command::new(env!("CARGO_BIN_EXE_nrflow"))
        .env("NRFLOW_THREADS", "3")
        .args(["sweep-alpha", s(&shipped("lti_speedup")), "--alphas", "100,1,10", "--out", s(&out)])
        .output()
        .unwrap();
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let rows = sweep_rows(&out);
    assert_eq!(rows.iter().map(|r| r.0).collect::<Vec<_>>(), [1.0, 10.0, 100.0]);
    assert!(rows.iter().all(|r| r.3 == "ok"));
    for w in rows.windows(2) {
        assert!(w[0].1 / w[1].1 >= 9.0, "{rows:?}");
    }
}

#[test]
fn sweep_without_injection_converges() {
    let dir = tempfile::tempdir().unwrap();
    let text = std::fs::read_to_string(shipped("lti_speedup"))
        .unwrap()
        .replace("variant = \"full\"", "variant = \"enhanced\"")
        .replace("e2 = [1.0]\n", "")
        .replace(
            "kind = \"sinusoid\"\noffset = [0.0]\namplitude = [1.0]\nfrequency = [1.0]",
            "kind = \"constant\"\nvalue = [0.5]",
        );
    assert!(text.contains("kind = \"constant\""));
    let cfg = write(dir.path(), "enhanced.toml", &text);
    let out = dir.path().join("sweep.csv");
    let o = nrflow(&["sweep-alpha", s(&cfg), "--alphas", "1,10,100", "--out", s(&out)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    for r in sweep_rows(&out) {
        assert_eq!(r.3, "ok");
        assert!(r.1 <= 1e-6, "{r:?}");
    }
}

#[test]
fn sweep_memoryless_bound() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("sweep.csv");
    let o = nrflow(&["sweep-alpha", s(&shipped("memoryless_sine")), "--alphas", "10,100", "--out", s(&out)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let rows = sweep_rows(&out);
    assert_eq!(rows.len(), 2);
    for r in rows {
        assert!(r.2 <= 1.05 / r.0, "{r:?}");
    }
}

#[test]
fn sweep_records_failures_per_row() {
    let dir = tempfile::tempdir().unwrap();
    let text = std::fs::read_to_string(shipped("memoryless_sine"))
        .unwrap()
        .replace("amplitude = [1.0]", "amplitude = [1e10]")
        .replace("dt = 0.001", "dt = 0.5");
    let cfg = write(dir.path(), "mixed.toml", &text);
    let out = dir.path().join("sweep.csv");
    let o = nrflow(&["sweep-alpha", s(&cfg), "--alphas", "1,1e300", "--out", s(&out)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let status: Vec<String> = sweep_rows(&out).into_iter().map(|r| r.3).collect();
    assert_eq!(status, ["ok", "overflow"]);
}
