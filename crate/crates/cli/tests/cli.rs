use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

const SINGLE_PEAK: &str = r#"
omega0_eV = 1.95
gamma0_eV = 1e-4
z_nm = 5.0
lorentzians = [[100.0, 1.95, 2e-3]]
support_eV = [1.7, 2.2]
tmax_fs = 800.0
dt_fs = 0.5
"#;

fn qedyn(verb: &str, dir: &TempDir, config: &str, extra: &[&str]) -> (Output, PathBuf) {
    let cfg = dir.path().join("run.toml");
    fs::write(&cfg, config).unwrap();
    let out = dir.path().join("out");
    let output = Command::new(env!("CARGO_BIN_EXE_qedyn"))
        .arg(verb)
        .arg("--config")
        .arg(&cfg)
        .arg("--output")
        .arg(&out)
        .args(extra)
        .output()
        .unwrap();
    (output, out)
}

fn summary(out: &Path) -> Vec<Vec<String>> {
    let text = fs::read_to_string(out.join("summary.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "point_id,param,value,delta_ndyn_eV,markov_rate_eV,regime,t99_fs,solver,converged"
    );
    lines.map(|l| l.split(',').map(str::to_owned).collect()).collect()
}

fn population(path: &Path) -> Vec<f64> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .filter(|l| !l.starts_with('#') && !l.starts_with("t_fs"))
        .map(|l| l.rsplit(',').next().unwrap().parse().unwrap())
        .collect()
}

#[test]
fn two_spectrum_sources_are_rejected() {
    let dir = TempDir::new().unwrap();
    let cfg = format!("{SINGLE_PEAK}spectrum_csv = \"lambda.csv\"\n");
    let (out, _) = qedyn("simulate", &dir, &cfg, &[]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("exclusive"));
}

#[test]
fn markov_rate_is_linear_in_gamma0() {
    let dir = TempDir::new().unwrap();
    let cfg = format!("{SINGLE_PEAK}sweep_param = \"gamma0_eV\"\nsweep_values = [59e-6, 413.5e-6]\n");
    let (out, dir_out) = qedyn("sweep", &dir, &cfg, &["--jobs", "2"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let rows = summary(&dir_out);
    assert_eq!(rows.len(), 2);
    let rate: Vec<f64> = rows.iter().map(|r| r[4].parse().unwrap()).collect();
    let ratio = rate[1] / rate[0];
    assert!((ratio - 413.5 / 59.0).abs() <= 1e-12 * ratio, "ratio {ratio}");
}

#[test]
fn decay_time_shrinks_as_the_rate_grows() {
    let dir = TempDir::new().unwrap();
    let cfg = r#"
omega0_eV = 1.95
gamma0_eV = 1e-4
z_nm = 5.0
lorentzians = [[2.0, 1.95, 0.1]]
support_eV = [1.5, 2.4]
tmax_fs = 6000.0
dt_fs = 1.0
sweep_param = "gamma0_eV"
sweep_values = [2e-4, 4e-4, 6e-4, 8e-4]
"#;
    let (out, dir_out) = qedyn("sweep", &dir, cfg, &[]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let rows = summary(&dir_out);
    assert!(rows.iter().all(|r| r[5] == "markovian"), "{rows:?}");
    let t99: Vec<f64> = rows.iter().map(|r| r[6].parse().unwrap()).collect();
    assert!(t99.windows(2).all(|w| w[1] <= w[0]), "{t99:?}");
}

#[test]
fn all_solvers_agree_on_a_single_lorentzian() {
    let dir = TempDir::new().unwrap();
    let cfg = format!("{SINGLE_PEAK}solver = \"all\"\npseudomode_background = false\nhost_eps = 1.0\n");
    let (out, dir_out) = qedyn("simulate", &dir, &cfg, &[]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let rows = summary(&dir_out);
    let solvers: Vec<&str> = rows.iter().map(|r| r[7].as_str()).collect();
    assert_eq!(solvers, ["volterra", "pseudomode", "analytic"]);
    let id = &rows[0][0];
    let traj: Vec<Vec<f64>> = solvers
        .iter()
        .map(|s| population(&dir_out.join(format!("traj_{id}_{s}.csv"))))
        .collect();
    // The numerical solver keeps the √ε continuum and the finite support;
    // the closed form and the background-free pseudomode set do not.
    let diff = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
    assert!(diff(&traj[1], &traj[2]) <= 1e-6);
    assert!(diff(&traj[0], &traj[2]) <= 2e-2);
}

#[test]
fn spectrum_verb_writes_lambda_and_conductivity() {
    let dir = TempDir::new().unwrap();
    let cfg = format!("{SINGLE_PEAK}quality = \"high\"\nsigma0 = 1.0\ngrid_eV = [1.8, 2.2, 5]\n");
    let (out, dir_out) = qedyn("spectrum", &dir, &cfg, &[]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let spectrum = fs::read_to_string(dir_out.join("spectrum.csv")).unwrap();
    let rows: Vec<(f64, f64)> = spectrum
        .lines()
        .skip(1)
        .map(|l| {
            let (w, v) = l.split_once(',').unwrap();
            (w.parse().unwrap(), v.parse().unwrap())
        })
        .collect();
    assert_eq!(rows.len(), 5);
    let (w, v) = rows[1];
    assert!((w - 1.9).abs() < 1e-12);
    let expected = 1.0 + 100.0 * 4e-6 / ((w - 1.95).powi(2) + 4e-6);
    assert!((v - expected).abs() <= 1e-12 * expected);
    let cond = fs::read_to_string(dir_out.join("conductivity.csv")).unwrap();
    assert!(cond.starts_with("omega_eV,re_sigma_res,im_sigma_res,re_sigma_inter\n"));
    assert_eq!(cond.lines().count(), 6);
}

#[test]
fn empty_grid_is_an_error() {
    let dir = TempDir::new().unwrap();
    let cfg = format!("{SINGLE_PEAK}grid_eV = [1.8, 2.2, 0]\n");
    let (out, _) = qedyn("spectrum", &dir, &cfg, &[]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("grid is empty"));
}

#[test]
fn kernel_and_fit_verbs_write_headers() {
    let dir = TempDir::new().unwrap();
    let cfg = format!("{SINGLE_PEAK}fit_peaks = 1\n");
    let (out, dir_out) = qedyn("kernel", &dir, &cfg, &[]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let kernel = fs::read_to_string(dir_out.join("kernel.csv")).unwrap();
    assert!(kernel.lines().any(|l| l == "tau_fs,re_K,im_K"));
    assert!(kernel.contains("filon-linear"));

    let (out, dir_out) = qedyn("fit", &dir, &cfg, &[]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let fit = fs::read_to_string(dir_out.join("fit.csv")).unwrap();
    let row = fit.lines().find(|l| l.starts_with("0,")).unwrap();
    let fields: Vec<f64> = row.split(',').map(|x| x.parse().unwrap()).collect();
    assert!((fields[1] - 100.0).abs() < 1e-6 * 100.0);
    assert!((fields[2] - 1.95).abs() < 1e-9);
}

#[test]
fn failing_sweep_points_are_recorded_and_others_continue() {
    let dir = TempDir::new().unwrap();
    let cfg = format!("{SINGLE_PEAK}sweep_param = \"gamma0_eV\"\nsweep_values = [1e-4, -1.0]\n");
    let (out, dir_out) = qedyn("sweep", &dir, &cfg, &[]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let rows = summary(&dir_out);
    assert_eq!(rows.len(), 2);
    assert!(!rows[0][5].starts_with("error:"));
    assert!(rows[1][5].starts_with("error:"), "{:?}", rows[1]);
}
