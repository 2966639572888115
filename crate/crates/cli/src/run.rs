use std::ffi::OsString;
use std::path::PathBuf;
use std::time::Instant;

use chaoscope_core::bifurcation::{self, ScanSettings};
use chaoscope_core::corrdim::{self, Metric, RadiusGrid};
use chaoscope_core::entropy::{self, EntropyConfig};
use chaoscope_core::lyapunov::{self, LyapunovSweep};
use chaoscope_core::map::{self, MapParams, PhaseState};
use clap::error::ErrorKind;
use clap::Parser;
use serde_json::json;

use crate::args::Cli;
use crate::config::RunConfig;
use crate::error::CliError;
use crate::figures;
use crate::output::{num, Outputs};
use crate::table::Table;

pub const DEFAULT_OUT: &str = "chaoscope-out";

const COMMON_KEYS: [&str; 3] = ["out", "format", "plot"];
const START_KEYS: [&str; 4] = ["k", "phi0", "v0", "transient"];
const ENTROPY_KEYS: [&str; 6] = ["pool_size", "n_max", "epsilons", "stride", "stride_jitter", "seed"];

fn keys_for(sub: &str) -> Option<Vec<&'static str>> {
    let mut keys: Vec<&str> = match sub {
        "orbit" => vec!["q", "steps", "wrap"],
        "bifurcate" => vec!["q_min", "q_max", "q_steps", "samples", "continuation"],
        "lyapunov" => vec!["q", "q_min", "q_max", "q_steps", "steps", "continuation"],
        "entropy" => [&["q", "q_min", "q_max", "q_steps"][..], &ENTROPY_KEYS].concat(),
        "entropy-grid" => [
            &["q_min", "q_max", "q_steps", "k_min", "k_max", "k_steps", "phi0", "v0", "transient"][..],
            &ENTROPY_KEYS,
        ]
        .concat(),
        "corrdim" => vec!["q", "points", "r_min", "r_max", "r_points", "fit_low", "fit_high", "metric", "wrap"],
        "reproduce" => vec!["figure"],
        _ => return None,
    };
    if !matches!(sub, "entropy-grid" | "reproduce") {
        keys.extend(START_KEYS);
    }
    keys.extend(COMMON_KEYS);
    Some(keys)
}

fn need<T: Copy>(v: Option<T>, key: &str, sub: &str) -> Result<T, CliError> {
    v.ok_or_else(|| CliError::Usage(format!("`{sub}` needs --{}", key.replace('_', "-"))))
}

/// Either one `q` or a `q` range, never both.
fn single_q(c: &RunConfig) -> Result<bool, CliError> {
    let ranged = c.q_min.is_some() || c.q_max.is_some() || c.q_steps.is_some();
    match (c.q.is_some(), ranged) {
        (true, true) => Err(CliError::Usage(format!(
            "`{}` takes either --q or a --q-min/--q-max range, not both",
            c.subcommand
        ))),
        (false, false) => Err(CliError::Usage(format!("`{}` needs --q or --q-min/--q-max", c.subcommand))),
        (single, _) => Ok(single),
    }
}

fn check_k(k: f64) -> Result<(), CliError> {
    if k > 0.0 && k < 1.0 {
        Ok(())
    } else {
        Err(CliError::Usage(format!("k must satisfy 0 < k < 1, got {k}")))
    }
}

/// Checks the keys against the subcommand and fills every default, so the
/// result describes the run completely.
pub fn resolve(mut c: RunConfig) -> Result<RunConfig, CliError> {
    let sub = c.subcommand.clone();
    let allowed = keys_for(&sub).ok_or_else(|| CliError::Usage(format!("unknown subcommand `{sub}`")))?;
    if let Some(key) = c.to_map().keys().find(|k| !allowed.contains(&k.as_str())) {
        return Err(CliError::Usage(format!("`{key}` does not apply to `{sub}`")));
    }
    c.format.get_or_insert_with(|| "csv".into());
    if !matches!(c.format.as_deref(), Some("csv" | "json" | "both")) {
        return Err(CliError::Usage(format!(
            "--format must be csv, json or both, got `{}`",
            c.format.unwrap_or_default()
        )));
    }
    c.plot.get_or_insert(false);
    if sub == "reproduce" {
        let id = c.figure.clone().unwrap_or_default();
        if figures::jobs(&id).is_none() {
            return Err(CliError::Usage(format!(
                "unknown figure id `{id}`; valid ids: {}",
                figures::FIGURE_IDS.join(", ")
            )));
        }
        return Ok(c);
    }
    if sub == "entropy-grid" {
        need(c.q_min, "q_min", &sub)?;
        need(c.q_max, "q_max", &sub)?;
        check_k(need(c.k_min, "k_min", &sub)?)?;
        check_k(need(c.k_max, "k_max", &sub)?)?;
        c.q_steps.get_or_insert(20);
        c.k_steps.get_or_insert(6);
    } else {
        check_k(need(c.k, "k", &sub)?)?;
    }
    c.phi0.get_or_insert(map::DEFAULT_INITIAL.phi);
    c.v0.get_or_insert(map::DEFAULT_INITIAL.v);
    c.transient.get_or_insert(map::DEFAULT_TRANSIENT);
    match sub.as_str() {
        "orbit" => {
            need(c.q, "q", &sub)?;
            c.steps.get_or_insert(1000);
            c.wrap.get_or_insert(true);
        }
        "bifurcate" => {
            need(c.q_min, "q_min", &sub)?;
            need(c.q_max, "q_max", &sub)?;
            c.q_steps.get_or_insert(400);
            c.samples.get_or_insert(bifurcation::DEFAULT_SAMPLES);
            c.continuation.get_or_insert(true);
        }
        "lyapunov" => {
            if !single_q(&c)? {
                need(c.q_min, "q_min", &sub)?;
                need(c.q_max, "q_max", &sub)?;
                c.q_steps.get_or_insert(100);
                c.continuation.get_or_insert(true);
            }
            c.steps.get_or_insert(lyapunov::DEFAULT_STEPS);
        }
        "entropy" | "entropy-grid" => {
            if sub == "entropy" && !single_q(&c)? {
                need(c.q_min, "q_min", &sub)?;
                need(c.q_max, "q_max", &sub)?;
                c.q_steps.get_or_insert(20);
            }
            let d = EntropyConfig::default();
            c.pool_size.get_or_insert(d.pool_size);
            c.n_max.get_or_insert(d.n_max);
            c.epsilons.get_or_insert(d.epsilon_grid);
            c.stride.get_or_insert(d.stride);
            c.stride_jitter.get_or_insert(d.stride_jitter);
            c.seed.get_or_insert(d.seed);
        }
        "corrdim" => {
            need(c.q, "q", &sub)?;
            c.points.get_or_insert(4000);
            c.r_points.get_or_insert(corrdim::DEFAULT_R_POINTS);
            c.metric.get_or_insert_with(|| "toroidal".into());
            c.metric.as_deref().unwrap().parse::<Metric>()?;
            c.wrap.get_or_insert(true);
            if c.fit_low.is_some() != c.fit_high.is_some() {
                return Err(CliError::Usage("--fit-low and --fit-high go together".into()));
            }
        }
        _ => unreachable!(),
    }
    Ok(c)
}

fn initial(c: &RunConfig) -> PhaseState {
    PhaseState::new(c.phi0.unwrap(), c.v0.unwrap())
}

fn entropy_config(c: &RunConfig) -> EntropyConfig {
    EntropyConfig {
        pool_size: c.pool_size.unwrap(),
        n_max: c.n_max.unwrap(),
        epsilon_grid: c.epsilons.clone().unwrap(),
        transient: c.transient.unwrap(),
        initial: initial(c),
        stride: c.stride.unwrap(),
        stride_jitter: c.stride_jitter.unwrap(),
        seed: c.seed.unwrap(),
    }
}

/// Adds `table` as CSV and/or JSON per the configured format.
fn emit(out: &mut Outputs, c: &RunConfig, name: &str, table: &Table) {
    let fmt = c.format.as_deref().unwrap_or("csv");
    if fmt != "json" {
        out.add(format!("{name}.csv"), table.to_csv());
    }
    if fmt != "csv" {
        out.add_json(format!("{name}.json"), &table.to_json());
    }
}

/// Runs one resolved, non-reproduce config. Files are named `prefix` + stem.
pub fn execute(c: &RunConfig, prefix: &str, out: &mut Outputs) -> Result<(), CliError> {
    let started = Instant::now();
    let p = |stem: &str| format!("{prefix}{stem}");
    let mut plot = None;
    match c.subcommand.as_str() {
        "orbit" => {
            let params = MapParams::new(c.k.unwrap(), c.q.unwrap())?;
            let o = map::orbit(&params, &initial(c), c.transient.unwrap(), c.steps.unwrap(), c.wrap.unwrap())?;
            let mut t = Table::new(&["n", "phi", "v"]);
            for (i, s) in o.points.iter().enumerate() {
                t.push(vec![o.iteration_index(i).into(), s.phi.into(), s.v.into()]);
            }
            emit(out, c, &p("orbit"), &t);
            plot = Some(format!("set xlabel 'phi'\nset ylabel 'v'\nplot '{}' using 2:3 with dots notitle\n", p("orbit.csv")));
        }
        "bifurcate" => {
            let mut s = ScanSettings::new(c.k.unwrap(), c.q_min.unwrap(), c.q_max.unwrap(), c.q_steps.unwrap());
            s.transient = c.transient.unwrap();
            s.samples = c.samples.unwrap();
            s.initial = initial(c);
            s.continuation = c.continuation.unwrap();
            let scan = bifurcation::scan(&s)?;
            let mut t = Table::new(&["q", "v"]);
            for (q, v) in scan.rows() {
                t.push(vec![q.into(), v.into()]);
            }
            emit(out, c, &p("bifurcation"), &t);
            plot = Some(format!("set xlabel 'q'\nset ylabel 'v'\nplot '{}' using 1:2 with dots notitle\n", p("bifurcation.csv")));
        }
        "lyapunov" if c.q.is_some() => {
            let params = MapParams::new(c.k.unwrap(), c.q.unwrap())?;
            let s = lyapunov::lce_series(&params, &initial(c), c.transient.unwrap(), c.steps.unwrap())?;
            let mut t = Table::new(&["n", "lambda1", "lambda2"]);
            for (i, (a, b)) in s.lambda1_series.iter().zip(&s.lambda2_series).enumerate() {
                t.push(vec![(i + 1).into(), (*a).into(), (*b).into()]);
            }
            emit(out, c, &p("lce_series"), &t);
            out.add_json(
                p("lce_summary.json"),
                &json!({
                    "k": params.k(), "q": params.q(), "n_steps": s.n_steps,
                    "lambda1": num(s.lambda1), "lambda2": num(s.lambda2),
                    "sum": num(s.sum()), "ln_k": params.k().ln(),
                    "last_decade_variation": num(s.last_decade_variation()),
                }),
            );
            plot = Some(format!(
                "set logscale x\nset xlabel 'n'\nset ylabel 'LCE'\nplot '{0}' using 1:2 with lines title 'lambda1', '{0}' using 1:3 with lines title 'lambda2'\n",
                p("lce_series.csv")
            ));
        }
        "lyapunov" => {
            let mut sw = LyapunovSweep::new(c.k.unwrap(), c.q_min.unwrap(), c.q_max.unwrap(), c.q_steps.unwrap());
            sw.transient = c.transient.unwrap();
            sw.n_steps = c.steps.unwrap();
            sw.initial = initial(c);
            sw.continuation = c.continuation.unwrap();
            let rows = lyapunov::lce_vs_q(&sw)?;
            let mut t = Table::new(&["q", "lambda1", "lambda2"]);
            for r in &rows {
                t.push(vec![r.q.into(), r.lambda1.into(), r.lambda2.into()]);
            }
            emit(out, c, &p("lce_sweep"), &t);
            plot = Some(format!(
                "set xlabel 'q'\nset ylabel 'LCE'\nplot '{0}' using 1:2 with lines title 'lambda1', '{0}' using 1:3 with lines title 'lambda2'\n",
                p("lce_sweep.csv")
            ));
        }
        "entropy" if c.q.is_some() => {
            let params = MapParams::new(c.k.unwrap(), c.q.unwrap())?;
            let est = entropy::entropy_estimate(&params, &entropy_config(c))?;
            let mut t = Table::new(&["epsilon", "n", "N"]);
            for (eps, n, count) in est.table.entries() {
                t.push(vec![eps.into(), n.into(), count.into()]);
            }
            emit(out, c, &p("entropy_table"), &t);
            let per: Vec<_> = est
                .per_epsilon
                .iter()
                .map(|s| {
                    json!({
                        "epsilon": s.epsilon, "slope": num(s.slope), "r_squared": num(s.r_squared),
                        "window": s.window, "accepted": s.accepted,
                    })
                })
                .collect();
            out.add_json(
                p("entropy.json"),
                &json!({
                    "k": params.k(), "q": params.q(), "h": num(est.h),
                    "quality_flag": est.quality_flag(), "pool_size": est.table.pool_size,
                    "per_epsilon": per,
                }),
            );
            plot = Some(format!(
                "set logscale y\nset xlabel 'n'\nset ylabel 'N(n, eps)'\nplot '{}' using 2:3:1 with linespoints palette notitle\n",
                p("entropy_table.csv")
            ));
        }
        "entropy" => {
            let cells = entropy::entropy_sweep_q(
                c.k.unwrap(),
                c.q_min.unwrap(),
                c.q_max.unwrap(),
                c.q_steps.unwrap(),
                &entropy_config(c),
            )?;
            let mut t = Table::new(&["q", "h", "quality_flag"]);
            for cell in &cells {
                t.push(vec![cell.q.into(), cell.h.into(), cell.quality_flag().into()]);
            }
            emit(out, c, &p("entropy_sweep"), &t);
            plot = Some(format!("set xlabel 'q'\nset ylabel 'h'\nplot '{}' using 1:2 with linespoints notitle\n", p("entropy_sweep.csv")));
        }
        "entropy-grid" => {
            let cells = entropy::entropy_grid(
                c.q_min.unwrap(),
                c.q_max.unwrap(),
                c.q_steps.unwrap(),
                c.k_min.unwrap(),
                c.k_max.unwrap(),
                c.k_steps.unwrap(),
                &entropy_config(c),
            )?;
            let mut t = Table::new(&["k", "q", "h", "quality_flag"]);
            for cell in &cells {
                t.push(vec![cell.k.into(), cell.q.into(), cell.h.into(), cell.quality_flag().into()]);
            }
            emit(out, c, &p("entropy_grid"), &t);
            plot = Some(format!(
                "set xlabel 'q'\nset ylabel 'k'\nset datafile separator ','\nplot '{}' using 2:1:3 every ::1 with points pt 5 palette notitle\n",
                p("entropy_grid.csv")
            ));
        }
        "corrdim" => corrdim_job(c, &p, out, &mut plot)?,
        other => return Err(CliError::Usage(format!("unknown subcommand `{other}`"))),
    }
    out.time(p(&c.subcommand), started.elapsed());
    if c.plot == Some(true) {
        match plot {
            Some(script) if c.format.as_deref() != Some("json") => {
                out.add(p("plot.gp"), format!("set datafile separator ','\nset key autotitle columnhead\n{script}"));
            }
            _ => log::warn!("plot script needs csv output; skipped"),
        }
    }
    Ok(())
}

fn corrdim_job(
    c: &RunConfig,
    p: &dyn Fn(&str) -> String,
    out: &mut Outputs,
    plot: &mut Option<String>,
) -> Result<(), CliError> {
    let params = MapParams::new(c.k.unwrap(), c.q.unwrap())?;
    let metric: Metric = c.metric.as_deref().unwrap().parse()?;
    let o = map::orbit(&params, &initial(c), c.transient.unwrap(), c.points.unwrap(), c.wrap.unwrap())?;
    let grid = RadiusGrid {
        r_min: c.r_min,
        r_max: c.r_max,
        count: c.r_points.unwrap(),
    };
    let curve = corrdim::correlation_curve(&o, grid, metric)?;
    let mut t = Table::new(&["r", "C", "log10_r", "log10_C"]);
    for &(r, cr) in &curve.points {
        t.push(vec![r.into(), cr.into(), r.log10().into(), cr.log10().into()]);
    }
    emit(out, c, &p("corrdim_curve"), &t);
    let window = c.fit_low.zip(c.fit_high);
    let fit = corrdim::fit_correlation_dimension(&curve, window)?;
    let intercept10 = fit.intercept / std::f64::consts::LN_10;
    out.add_json(
        p("corrdim_fit.json"),
        &json!({
            "slope": num(fit.slope),
            "intercept": num(intercept10),
            "intercept_ln": num(fit.intercept),
            "d_c_slope_reading": num(fit.d_c),
            "d_c_paper_intercept_reading": num(intercept10),
            "window_low": fit.fit_window.0,
            "window_high": fit.fit_window.1,
            "r_squared": num(fit.r_squared),
            "n_points": fit.n_used,
            "orbit_points": curve.n,
            "metric": metric.name(),
            "k": params.k(),
            "q": params.q(),
        }),
    );
    *plot = Some(format!(
        "set xlabel 'log10 r'\nset ylabel 'log10 C'\nf(x) = {intercept10} + {slope} * x\nplot '{0}' using 3:4 with points title 'C(r)', f(x) title 'fit'\n",
        p("corrdim_curve.csv"),
        slope = fit.slope
    ));
    Ok(())
}

/// Resolves `cli` over the optional config file, runs it and writes the
/// outputs with a manifest.
pub fn run_config(cli: RunConfig, config_file: Option<&str>) -> Result<PathBuf, CliError> {
    let merged = match config_file {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Usage(format!("cannot read config file {path}: {e}")))?;
            cli.layered_over(&RunConfig::from_text(&text)?)?
        }
        None => cli,
    };
    let c = resolve(merged)?;
    let dir = PathBuf::from(c.out.clone().unwrap_or_else(|| DEFAULT_OUT.into()));
    // the snapshot leaves out the output directory so runs compare byte for byte
    let snapshot = RunConfig { out: None, ..c.clone() };
    let mut out = Outputs::default();
    out.add("config.ini", snapshot.to_text());
    if c.subcommand == "reproduce" {
        for (prefix, mut job) in figures::jobs(c.figure.as_deref().unwrap()).unwrap() {
            job.format = c.format.clone();
            job.plot = c.plot;
            let job = resolve(job)?;
            if !prefix.is_empty() {
                out.add(format!("{prefix}config.ini"), job.to_text());
            }
            execute(&job, &prefix, &mut out)?;
        }
    } else {
        execute(&c, "", &mut out)?;
    }
    out.write(&dir, &snapshot.to_text())?;
    Ok(dir)
}

/// Entry point behind the binary; returns the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).try_init();
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return code;
        }
    };
    let common = cli.command.common();
    let result = (|| {
        let config = cli.command.to_config()?;
        let job = || run_config(config.clone(), common.config.as_deref());
        match common.threads {
            Some(0) => Err(CliError::Usage("--threads must be at least 1".into())),
            Some(n) => rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| CliError::Usage(format!("cannot start {n} threads: {e}")))?
                .install(job),
            None => job(),
        }
    })();
    match result {
        Ok(dir) => {
            eprintln!("wrote {}", dir.display());
            0
        }
        Err(e) => {
            eprintln!("chaoscope: {e}");
            e.exit_code()
        }
    }
}
