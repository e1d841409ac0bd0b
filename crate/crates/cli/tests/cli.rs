use std::fs;
use std::process::{Command, Output};

fn freqbound(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_freqbound")).args(args).output().expect("run freqbound")
}

fn stdout(args: &[&str]) -> String {
    let out = freqbound(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

const SMALL: [&str; 12] = [
    "sweep",
    "--figure",
    "13",
    "--seed",
    "7",
    "--snr-start",
    "-6",
    "--snr-stop",
    "0",
    "--trials",
    "300",
    "--snr-step=3",
];

#[test]
fn reruns_are_byte_identical() {
    let a = stdout(&SMALL);
    assert_eq!(a, stdout(&SMALL));
    // WWB, ZZB and MAP at -6, -3, 0 dB plus the header
    assert_eq!(a.lines().count(), 10);
    assert!(a.starts_with("kind,snr_db,k,kappa,mu_rad,s,trio,value_rad2,value_db,extra\n"));
}

#[test]
fn seed_changes_only_map_rows() {
    let a = stdout(&SMALL);
    let mut args = SMALL.to_vec();
    args[4] = "8";
    let b = stdout(&args);
    for (x, y) in a.lines().zip(b.lines()) {
        if x.starts_with("MAP") {
            assert_ne!(x, y);
        } else {
            assert_eq!(x, y);
        }
    }
}

#[test]
fn empty_kappa_exits_with_two() {
    let out = freqbound(&["sweep", "--figure", "13", "--kappa", ""]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("kappa_values"));
}

#[test]
fn bad_values_exit_with_two() {
    for args in [
        &["sweep", "--snr-start", "-50"][..],
        &["sweep", "--snr-step", "0"],
        &["sweep", "--figure", "7"],
        &["sweep", "--figure", "9"],
        &["wwb", "--trio", "3,1,1"],
        &["sweep", "--kinds", "crb"],
        &["map-sim", "--grid-size", "8"],
        &["zzb", "--k", "1"],
    ] {
        assert_eq!(freqbound(args).status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn point_commands_emit_one_row() {
    for cmd in ["wwb", "bcrb", "zzb"] {
        let out = stdout(&[cmd, "--snr-db", "-5", "--kappa", "1"]);
        let rows: Vec<&str> = out.lines().collect();
        assert_eq!(rows.len(), 2, "{cmd}");
        assert!(rows[1].starts_with(&cmd.to_uppercase()));
    }
    let map = stdout(&["map-sim", "--snr-db", "0", "--trials", "200", "--linear-error"]);
    assert!(map.lines().nth(1).unwrap().contains("\"\"trials\"\":200"));
}

#[test]
fn fixed_exponents_give_a_row_each() {
    let out = stdout(&["wwb", "--snr-db", "-5", "--kappa", "2", "--s", "0.3,0.7"]);
    let rows: Vec<Vec<&str>> = out.lines().skip(1).map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 2);
    // WWB(s) = WWB(1 - s)
    let v: Vec<f64> = rows.iter().map(|r| r[r.len() - 3].parse().unwrap()).collect();
    assert!((v[0] - v[1]).abs() < 1e-9 * v[0]);
}

#[test]
fn json_and_hertz_outputs() {
    let json = stdout(&["bcrb", "--snr-db", "0", "--format", "json"]);
    assert!(json.trim_start().starts_with('[') && json.contains("\"kind\": \"BCRB\""));
    let csv = stdout(&["bcrb", "--snr-db", "0", "--kappa", "1", "--f-int", "1000"]);
    let header: Vec<&str> = csv.lines().next().unwrap().split(',').collect();
    assert_eq!(*header.last().unwrap(), "rmse_hz");
    let row: Vec<&str> = csv.lines().nth(1).unwrap().split(',').collect();
    let mse: f64 = row[7].parse().unwrap();
    let hz: f64 = row.last().unwrap().parse().unwrap();
    assert!((hz - mse.sqrt() * 1000.0 / (2.0 * std::f64::consts::PI)).abs() < 1e-9 * hz);
}

#[test]
fn testpoints_listing() {
    let out = stdout(&["testpoints", "--k", "20", "--trio", "2,9,0"]);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines[0], "h_rad,h_over_pi,provenance");
    assert_eq!(lines.len(), 12);
    assert_eq!(lines.iter().filter(|l| l.ends_with(",S")).count(), 9);
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.conf");
    let out = dir.path().join("out.csv");
    fs::write(&cfg, "# point run\nsnr_db = -3\nkappa = 5\nformat = csv\nlinear_error = true\ntrials = 100\n").unwrap();
    let status =
        freqbound(&["map-sim", "--config-file", cfg.to_str().unwrap(), "--kappa", "2", "--out", out.to_str().unwrap()]);
    assert!(status.status.success(), "{}", String::from_utf8_lossy(&status.stderr));
    let text = fs::read_to_string(&out).unwrap();
    let row: Vec<&str> = text.lines().nth(1).unwrap().split(',').collect();
    assert_eq!(row[0], "MAP");
    assert_eq!(row[1].parse::<f64>().unwrap(), -3.0);
    assert_eq!(row[3].parse::<f64>().unwrap(), 2.0);
    fs::write(&cfg, "no_such_flag = 1\n").unwrap();
    assert_eq!(freqbound(&["bcrb", "--config-file", cfg.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn unwritable_output_is_an_io_error() {
    let out = freqbound(&["bcrb", "--out", "/nonexistent-dir/x.csv"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("/nonexistent-dir/x.csv"));
}
