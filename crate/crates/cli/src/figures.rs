//! Built-in parameter sets, one per figure id.

use crate::config::RunConfig;

pub const FIGURE_IDS: [&str; 15] = [
    "fig1a", "fig1b", "fig1c", "fig1d", "fig1e", "fig1f", "fig2", "fig3", "fig4", "fig5a", "fig5b", "fig5c",
    "fig5d", "fig6", "fig7",
];

const K: f64 = 0.3;

// entropy presets use a smaller pool so whole sweeps finish in minutes
const SWEEP_POOL: usize = 1024;

fn bifurcate(q_min: f64, q_max: f64) -> RunConfig {
    let mut c = RunConfig::new("bifurcate");
    c.k = Some(K);
    c.q_min = Some(q_min);
    c.q_max = Some(q_max);
    c.q_steps = Some(800);
    c
}

fn with_q(sub: &str, q: f64) -> RunConfig {
    let mut c = RunConfig::new(sub);
    c.k = Some(K);
    c.q = Some(q);
    c
}

fn orbit(q: f64) -> RunConfig {
    let mut c = with_q("orbit", q);
    c.steps = Some(2000);
    c
}

fn entropy_sweep(q_min: f64, q_max: f64) -> RunConfig {
    let mut c = RunConfig::new("entropy");
    c.k = Some(K);
    c.q_min = Some(q_min);
    c.q_max = Some(q_max);
    c.q_steps = Some(40);
    c.pool_size = Some(SWEEP_POOL);
    c
}

fn tag(q: f64) -> String {
    format!("q{q}_")
}

/// `(file prefix, job config)` pairs for a figure id, or `None` if unknown.
pub fn jobs(id: &str) -> Option<Vec<(String, RunConfig)>> {
    let one = |c: RunConfig| vec![(String::new(), c)];
    Some(match id {
        "fig1a" => one(bifurcate(1.0, 5.0)),
        "fig1b" => one(bifurcate(1.5, 24.0)),
        "fig1c" => one(bifurcate(1.5, 3.4)),
        "fig1d" => one(bifurcate(1.5, 3.5)),
        "fig1e" => one(bifurcate(3.95, 4.2)),
        "fig1f" => one(bifurcate(9.1, 9.7)),
        "fig2" => [2.5, 3.8].map(|q| (tag(q), orbit(q))).into(),
        "fig3" => [2.5, 3.8].map(|q| (tag(q), with_q("lyapunov", q))).into(),
        "fig4" => one(with_q("lyapunov", 3.31)),
        "fig5a" => one(entropy_sweep(0.1, 2.5)),
        "fig5b" => one(entropy_sweep(1.0, 3.8)),
        "fig5c" => one(entropy_sweep(3.5, 4.5)),
        "fig5d" => one(entropy_sweep(6.0, 8.5)),
        "fig6" => {
            let mut c = RunConfig::new("entropy-grid");
            c.q_min = Some(1.0);
            c.q_max = Some(3.8);
            c.q_steps = Some(15);
            c.k_min = Some(0.1);
            c.k_max = Some(0.6);
            c.k_steps = Some(6);
            c.pool_size = Some(SWEEP_POOL);
            one(c)
        }
        "fig7" => {
            let mut c = with_q("corrdim", 3.8);
            c.points = Some(4000);
            one(c)
        }
        _ => return None,
    })
}
