use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn zdl(cache: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_zdl"))
        .args(args)
        .env("ZDL_CACHE_DIR", cache)
        .output()
        .expect("zdl runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn csv_rows(text: &str) -> Vec<Vec<String>> {
    text.lines()
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

#[test]
fn delta_star_single_row() {
    let dir = TempDir::new().unwrap();
    let o = zdl(
        dir.path(),
        &[
            "compute",
            "--what",
            "delta-star",
            "--x",
            "1000",
            "--n-max",
            "4096",
        ],
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let rows = csv_rows(&stdout(&o));
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[0], ["x", "delta_star"]);
    let table = zdl_core::divisor::DivisorTable::sieve(4096).unwrap();
    let want = zdl_core::divisor::delta_star_exact(1000.0, &table).unwrap();
    assert_eq!(rows[1][1].parse::<f64>().unwrap(), want);
    assert!(dir.path().join("divisors-4096.dtab").exists());
}

#[test]
fn too_small_table_names_the_flag() {
    let dir = TempDir::new().unwrap();
    let o = zdl(
        dir.path(),
        &[
            "compute",
            "--what",
            "delta-star",
            "--x",
            "1000",
            "--n-max",
            "100",
        ],
    );
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("--n-max"), "{}", stderr(&o));
}

#[test]
fn e_star_range_shape_and_determinism() {
    let dir = TempDir::new().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    let cache = dir.path().join("cache");
    let args = |out: &Path| {
        vec![
            "compute".to_string(),
            "--what".into(),
            "e-star".into(),
            "--t-range".into(),
            "100:5000:1".into(),
            "--mode".into(),
            "quadrature".into(),
            "--out".into(),
            out.to_str().unwrap().into(),
        ]
    };
    let run = |cache: &Path, out: &Path, extra: &[&str]| {
        let mut v = args(out);
        v.extend(extra.iter().map(|s| s.to_string()));
        let refs: Vec<&str> = v.iter().map(String::as_str).collect();
        let o = zdl(cache, &refs);
        assert!(o.status.success(), "{}", stderr(&o));
    };
    run(&cache, &a, &["--threads", "1"]);
    let text = fs::read_to_string(&a).unwrap();
    let rows = csv_rows(&text);
    assert_eq!(
        rows[0],
        [
            "t",
            "E",
            "method",
            "est_err",
            "delta_star",
            "e_star",
            "source"
        ]
    );
    assert_eq!(rows.len(), 4902);
    let ts: Vec<f64> = rows[1..].iter().map(|r| r[0].parse().unwrap()).collect();
    assert!(ts.windows(2).all(|w| w[1] > w[0]));
    assert_eq!(ts[0], 100.0);
    assert_eq!(*ts.last().unwrap(), 5000.0);
    assert!(rows[1..].iter().all(|r| r[6] == "quadrature"));
    assert_eq!(rows[1][2], "euler_maclaurin");
    assert_eq!(rows.last().unwrap()[2], "riemann_siegel");

    // second run is served from the cache
    run(&cache, &b, &[]);
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());

    // a fresh cache with more threads gives the same bytes
    let cache2 = dir.path().join("cache2");
    let c = dir.path().join("c.csv");
    run(&cache2, &c, &["--threads", "3"]);
    assert_eq!(fs::read(&a).unwrap(), fs::read(&c).unwrap());
}

#[test]
fn random_points_follow_the_seed() {
    let dir = TempDir::new().unwrap();
    let go = |seed: &str| {
        let o = zdl(
            dir.path(),
            &[
                "compute",
                "--what",
                "delta",
                "--t-range",
                "1:500:1",
                "--random",
                "20",
                "--seed",
                seed,
            ],
        );
        assert!(o.status.success(), "{}", stderr(&o));
        stdout(&o)
    };
    assert_eq!(go("7"), go("7"));
    assert_ne!(go("7"), go("8"));
    assert_eq!(go("7").lines().count(), 21);
}

#[test]
fn plotdata_empty_range_is_header_only() {
    let dir = TempDir::new().unwrap();
    for (what, header) in [
        ("e-star", "t,e_star"),
        ("moment", "logT,log_integral,fit"),
        ("r-slope", "T,mean_integral,three_pi_over_4"),
    ] {
        let out = dir.path().join(format!("{what}.csv"));
        let o = zdl(
            dir.path(),
            &[
                "plotdata",
                "--what",
                what,
                "--t-range",
                "10:5:1",
                "--out",
                out.to_str().unwrap(),
            ],
        );
        assert!(o.status.success(), "{}", stderr(&o));
        assert_eq!(fs::read_to_string(&out).unwrap(), format!("{header}\n"));
    }
}

#[test]
fn plotdata_without_cache_names_the_compute_command() {
    let dir = TempDir::new().unwrap();
    let o = zdl(
        dir.path(),
        &["plotdata", "--what", "e-star", "--t-range", "100:200:1"],
    );
    assert_eq!(o.status.code(), Some(2));
    let err = stderr(&o);
    assert!(
        err.contains("zdl compute --what e-star --t-range 100:200:1"),
        "{err}"
    );
}

#[test]
fn plotdata_from_cached_grid() {
    let dir = TempDir::new().unwrap();
    let o = zdl(
        dir.path(),
        &[
            "compute",
            "--what",
            "e-star",
            "--t-range",
            "0:2000:0.05",
            "--out",
            "/dev/null",
        ],
    );
    assert!(o.status.success(), "{}", stderr(&o));

    let o = zdl(
        dir.path(),
        &[
            "plotdata",
            "--what",
            "moment",
            "--k",
            "2",
            "--t-range",
            "500:2000:100",
        ],
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let rows = csv_rows(&stdout(&o));
    assert_eq!(rows[0], ["logT", "log_integral", "fit"]);
    assert_eq!(rows.len(), 17);
    for r in &rows[1..] {
        let (x, y, f): (f64, f64, f64) = (
            r[0].parse().unwrap(),
            r[1].parse().unwrap(),
            r[2].parse().unwrap(),
        );
        assert!(x > 6.0 && y.is_finite() && (y - f).abs() < 0.5);
    }

    let o = zdl(
        dir.path(),
        &[
            "plotdata",
            "--what",
            "r-slope",
            "--t-range",
            "1000:2000:250",
        ],
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let rows = csv_rows(&stdout(&o));
    assert_eq!(rows.len(), 6);
    for r in &rows[1..] {
        assert_eq!(
            r[2].parse::<f64>().unwrap(),
            3.0 * std::f64::consts::PI / 4.0
        );
    }

    let o = zdl(
        dir.path(),
        &["plotdata", "--what", "e-star", "--t-range", "100:110:0.5"],
    );
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(stdout(&o).lines().count(), 22);
}

#[test]
fn held_lock_is_rejected() {
    let dir = TempDir::new().unwrap();
    fs::write(dir.path().join(".lock"), "12345\n").unwrap();
    let o = zdl(dir.path(), &["compute", "--what", "delta", "--x", "10"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("in use"), "{}", stderr(&o));
    // the foreign lock is left alone
    assert!(dir.path().join(".lock").exists());
}

#[test]
fn lock_is_released_after_a_run() {
    let dir = TempDir::new().unwrap();
    let o = zdl(dir.path(), &["compute", "--what", "delta", "--x", "10"]);
    assert!(o.status.success());
    assert!(!dir.path().join(".lock").exists());
}

#[test]
fn usage_errors_exit_two() {
    let dir = TempDir::new().unwrap();
    for args in [
        &["compute", "--what", "nothing", "--x", "1"][..],
        &["compute", "--what", "e", "--t-range", "1:2"][..],
        &["compute", "--what", "delta"][..],
        &["verify", "--suite", "nope"][..],
        &["compute", "--what", "j", "--x", "1000"][..],
    ] {
        let o = zdl(dir.path(), args);
        assert_eq!(o.status.code(), Some(2), "{args:?}: {}", stderr(&o));
    }
}

#[test]
fn quadruple_table() {
    let dir = TempDir::new().unwrap();
    let o = zdl(
        dir.path(),
        &[
            "compute",
            "--what",
            "quadruples",
            "--n",
            "16,8",
            "--delta",
            "0.1,0.01",
        ],
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let rows = csv_rows(&stdout(&o));
    assert_eq!(rows[0], ["N", "k", "delta", "count", "bound", "ratio"]);
    assert_eq!(rows.len(), 5);
    assert_eq!(rows[1][0], "8");
    let direct = zdl_core::quadruple::count_quadruples(8, 2, 0.01).unwrap();
    assert_eq!(rows[1][3], direct.count.to_string());
}

#[test]
fn atkinson_and_j_outputs() {
    let dir = TempDir::new().unwrap();
    let o = zdl(
        dir.path(),
        &["compute", "--what", "atkinson", "--x", "500,1000"],
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let rows = csv_rows(&stdout(&o));
    assert_eq!(
        rows[0],
        ["T", "N", "N_prime", "sigma1", "sigma2", "E_approx", "E_quad", "abs_err"]
    );
    for r in &rows[1..] {
        let err: f64 = r[7].parse().unwrap();
        let t: f64 = r[0].parse().unwrap();
        assert!(err <= 10.0 * t.ln().powi(2));
    }
    let o = zdl(
        dir.path(),
        &[
            "compute", "--what", "j", "--x", "1000", "--k", "1", "--g", "10",
        ],
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let rows = csv_rows(&stdout(&o));
    assert_eq!(rows[0], ["T", "G", "k", "J"]);
    // J_1 is a smoothed mean of |ζ|², close to log(T/2π) + 2γ on average
    let j: f64 = rows[1][3].parse().unwrap();
    assert!(j > 0.0 && j < 20.0);
}

#[test]
fn verify_identities_writes_json() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("report.json");
    let o = zdl(
        dir.path(),
        &[
            "verify",
            "--suite",
            "identities",
            "--T-max",
            "3000",
            "--out",
            out.to_str().unwrap(),
        ],
    );
    assert_eq!(o.status.code(), Some(0), "{}{}", stdout(&o), stderr(&o));
    let text = stdout(&o);
    assert_eq!(text.lines().filter(|l| l.starts_with("PASS")).count(), 4);
    let doc: serde_json::Value = serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
    let reports = doc["reports"].as_array().unwrap();
    assert_eq!(reports.len(), 4);
    for r in reports {
        assert_eq!(r["status"], "pass");
        for key in [
            "claim_id",
            "anchor",
            "statistic",
            "band",
            "runtime_s",
            "config",
        ] {
            assert!(r.get(key).is_some(), "missing {key}");
        }
    }
    // the E* grid built for the identity check went into the cache
    assert!(dir
        .path()
        .join("estar-quadrature-0.0-3000.0-0.05.json")
        .exists());
}

#[test]
fn verify_lemma1_passes_at_n_128() {
    let dir = TempDir::new().unwrap();
    let o = zdl(
        dir.path(),
        &["verify", "--suite", "lemma1", "--N-max", "128"],
    );
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
}

#[test]
fn verify_exit_code_follows_statuses() {
    // at T = 3000 the moment claims run on a short range; whatever they
    // report, the exit code must follow the gated statuses
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("r.json");
    let o = zdl(
        dir.path(),
        &[
            "verify",
            "--suite",
            "thm1",
            "--T-max",
            "3000",
            "--out",
            out.to_str().unwrap(),
        ],
    );
    let doc: serde_json::Value = serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
    let statuses: Vec<&str> = doc["reports"]
        .as_array()
        .unwrap()
        .iter()
        .map(|r| r["status"].as_str().unwrap())
        .collect();
    let want = if statuses.contains(&"fail") {
        1
    } else if statuses.contains(&"errored") {
        3
    } else {
        0
    };
    assert_eq!(o.status.code(), Some(want));
    assert_eq!(doc["exit_code"], want);
}
