use std::path::Path;
use std::process::{Command, Output};

use chaoscope_cli::{resolve, verify_manifest, RunConfig};
use proptest::prelude::*;

const BIN: &str = env!("CARGO_BIN_EXE_chaoscope");

fn chaoscope(args: &[&str]) -> Output {
    Command::new(BIN).args(args).env_remove("CHAOSCOPE_THREADS").output().unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn read(dir: &Path, name: &str) -> String {
    std::fs::read_to_string(dir.join(name)).unwrap()
}

#[test]
fn single_step_orbit_row() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = chaoscope(&["orbit", "--k", "0.3", "--q", "2.5", "--steps", "1", "--transient", "0", "--phi0", "0", "--v0", "0", "--out", out]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(read(dir.path(), "orbit.csv"), "n,phi,v\n1,0,1.3\n");
    verify_manifest(dir.path()).unwrap();
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();

    let o = chaoscope(&["orbit", "--k", "0.3", "--q", "2", "--wobble", "3"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("--wobble"));

    let o = chaoscope(&["orbit", "--k", "1.2", "--q", "2", "--out", out]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("0 < k < 1"));

    let o = chaoscope(&["reproduce", "fig8"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("fig1a") && stderr(&o).contains("fig7"));

    let o = chaoscope(&["lyapunov", "--k", "0.3", "--q", "2", "--q-min", "1", "--q-max", "3"]);
    assert_eq!(o.status.code(), Some(1));

    // a finite periodic set has no scaling region to fit
    let o = chaoscope(&["corrdim", "--k", "0.3", "--q", "2", "--points", "600", "--out", out]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
    assert!(stderr(&o).contains("fit window"));

    for flag in ["--help", "--version"] {
        let o = chaoscope(&[flag]);
        assert_eq!(o.status.code(), Some(0));
        assert!(!o.stdout.is_empty());
    }
    assert_eq!(chaoscope(&["corrdim", "--help"]).status.code(), Some(0));
}

#[test]
fn config_file_with_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.ini");
    std::fs::write(&cfg, "# bifurcation run\nsubcommand = bifurcate\nk = 0.3\nq_min = 1\nq_max = 2\nq_steps = 3\nsamples = 4\n").unwrap();
    let out = dir.path().join("out");
    let o = chaoscope(&["bifurcate", "--config", cfg.to_str().unwrap(), "--q-steps", "2", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let csv = read(&out, "bifurcation.csv");
    assert_eq!(csv.lines().count(), 1 + 2 * 4);
    let written = RunConfig::from_text(&read(&out, "config.ini")).unwrap();
    assert_eq!(written.q_steps, Some(2));
    assert_eq!(written.samples, Some(4));
    assert_eq!(written.transient, Some(1000));

    // the written snapshot reproduces the run on its own
    let again = dir.path().join("again");
    let o = chaoscope(&["bifurcate", "--config", out.join("config.ini").to_str().unwrap(), "--out", again.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(read(&again, "bifurcation.csv"), csv);

    std::fs::write(&cfg, "subcommand = bifurcate\npool_size = 3\n").unwrap();
    assert_eq!(chaoscope(&["bifurcate", "--config", cfg.to_str().unwrap()]).status.code(), Some(1));
}

#[test]
fn formats_and_plot_script() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = chaoscope(&["lyapunov", "--k", "0.3", "--q", "3.8", "--steps", "500", "--format", "both", "--plot", "--out", out]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    for f in ["lce_series.csv", "lce_series.json", "lce_summary.json", "plot.gp", "config.ini"] {
        assert!(dir.path().join(f).exists(), "{f}");
    }
    assert!(read(dir.path(), "plot.gp").contains("'lce_series.csv'"));
    let json: serde_json::Value = serde_json::from_str(&read(dir.path(), "lce_series.json")).unwrap();
    assert_eq!(json["rows"].as_array().unwrap().len(), 500);
    assert_eq!(read(dir.path(), "lce_series.csv").lines().count(), 501);
    assert_eq!(chaoscope(&["orbit", "--k", "0.3", "--q", "2", "--format", "xml"]).status.code(), Some(1));
}

#[test]
fn entropy_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = chaoscope(&["entropy", "--k", "0.3", "--q", "2", "--pool-size", "256", "--epsilons", "0.2,0.1", "--out", out]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let table = read(dir.path(), "entropy_table.csv");
    assert!(table.starts_with("epsilon,n,N\n0.2,1,2\n"), "{table}");
    let summary: serde_json::Value = serde_json::from_str(&read(dir.path(), "entropy.json")).unwrap();
    assert_eq!(summary["h"], 0.0);
    assert_eq!(summary["quality_flag"], "ok");
}

#[test]
fn threads_never_enter_the_config() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = chaoscope(&["orbit", "--k", "0.3", "--q", "2", "--steps", "5", "--threads", "2", "--out", out]);
    assert_eq!(o.status.code(), Some(0));
    assert!(!read(dir.path(), "config.ini").contains("thread"));
    assert_eq!(chaoscope(&["orbit", "--k", "0.3", "--q", "2", "--threads", "0"]).status.code(), Some(1));
}

#[test]
fn resolve_fills_defaults() {
    let mut c = RunConfig::new("corrdim");
    c.k = Some(0.3);
    c.q = Some(3.8);
    let r = resolve(c).unwrap();
    assert_eq!(r.points, Some(4000));
    assert_eq!(r.metric.as_deref(), Some("toroidal"));
    assert_eq!(r.r_points, Some(64));
    assert_eq!((r.phi0, r.v0), (Some(0.1), Some(0.1)));
}

fn finite() -> impl Strategy<Value = f64> {
    prop_oneof![-1e6f64..1e6, any::<f64>().prop_filter("finite", |x| x.is_finite())]
}

prop_compose! {
    fn configs()(
        sub in prop::sample::select(chaoscope_cli::config::SUBCOMMANDS.to_vec()),
        k in prop::option::of(finite()),
        q in prop::option::of(finite()),
        steps in prop::option::of(any::<usize>()),
        seed in prop::option::of(any::<u64>()),
        eps in prop::option::of(prop::collection::vec(finite(), 1..5)),
        metric in prop::option::of("[a-z]{1,10}"),
        out in prop::option::of("[a-zA-Z0-9_./-]{1,20}"),
        wrap in prop::option::of(any::<bool>()),
        fit in prop::option::of((finite(), finite())),
    ) -> RunConfig {
        let mut c = RunConfig::new(sub);
        c.k = k;
        c.q = q;
        c.steps = steps;
        c.seed = seed;
        c.epsilons = eps;
        c.metric = metric;
        c.out = out;
        c.wrap = wrap;
        c.fit_low = fit.map(|f| f.0);
        c.fit_high = fit.map(|f| f.1);
        c
    }
}

proptest! {
    #[test]
    fn config_text_round_trips(c in configs()) {
        let text = c.to_text();
        let back = RunConfig::from_text(&text).unwrap();
        prop_assert_eq!(&back, &c);
        prop_assert_eq!(back.to_text(), text);
    }
}
