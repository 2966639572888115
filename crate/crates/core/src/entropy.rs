//! Topological entropy from (n, eps)-separated sets.
//!
//! Two seeds are (n, eps)-separated when their orbits differ by more than
//! `eps` at some step `0 <= i < n`. `N(n, eps)` is the size of a maximal
//! separated subset of a seed pool drawn from the attractor, and the entropy
//! is the growth rate of `ln N(n, eps)` in `n` as `eps` shrinks.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::bifurcation::uniform_grid;
use crate::error::{Error, Result};
use crate::fit::least_squares;
use crate::map::{self, MapParams, PhaseState};
use crate::par;

/// Goodness of fit a growth window needs to be accepted.
pub const MIN_R_SQUARED: f64 = 0.98;

/// Fewest orbit lengths a growth window may span.
pub const MIN_WINDOW: usize = 3;

/// Counts above this fraction of the pool are limited by the pool rather
/// than the dynamics and are left out of growth fits.
pub const SATURATION_FRACTION: f64 = 0.25;

/// A discrete dynamical system with a metric, as seen by the estimator.
pub trait Dynamics: Sync {
    type State: Copy + Send + Sync;

    /// Image of `s`, or `None` when the orbit has left the finite range.
    fn advance(&self, s: &Self::State) -> Option<Self::State>;

    fn distance(&self, a: &Self::State, b: &Self::State) -> f64;
}

/// Wrapped-phase bouncing-ball map with the cylinder metric.
impl Dynamics for MapParams {
    type State = PhaseState;

    fn advance(&self, s: &PhaseState) -> Option<PhaseState> {
        let next = map::step_unchecked(self, s, true);
        (next.is_finite() && next.v.abs() <= map::DIVERGENCE_LIMIT).then_some(next)
    }

    fn distance(&self, a: &PhaseState, b: &PhaseState) -> f64 {
        map::toroidal_distance(a, b)
    }
}

/// Orbit segments `f^0 x .. f^(len-1) x` for every seed that stays finite.
struct Segments<S> {
    len: usize,
    data: Vec<S>,
}

impl<S: Copy> Segments<S> {
    fn build<D: Dynamics<State = S>>(sys: &D, pool: &[S], len: usize) -> Self {
        let mut data = Vec::with_capacity(pool.len() * len);
        'seeds: for (idx, seed) in pool.iter().enumerate() {
            let start = data.len();
            let mut s = *seed;
            data.push(s);
            for i in 1..len {
                match sys.advance(&s) {
                    Some(next) => {
                        s = next;
                        data.push(s);
                    }
                    None => {
                        log::warn!("pool seed {idx} diverged at step {i}; dropped");
                        data.truncate(start);
                        continue 'seeds;
                    }
                }
            }
        }
        Self { len, data }
    }

    fn count(&self) -> usize {
        self.data.len() / self.len
    }

    fn seed(&self, i: usize) -> &[S] {
        &self.data[i * self.len..(i + 1) * self.len]
    }
}

/// Greedy maximal separated subset, scanning seeds in pool order.
fn greedy_count<D: Dynamics>(sys: &D, segs: &Segments<D::State>, n: usize, eps: f64) -> usize {
    let mut kept: Vec<usize> = Vec::new();
    for x in 0..segs.count() {
        let xs = &segs.seed(x)[..n];
        let separated_from_all = kept.iter().all(|&y| {
            let ys = &segs.seed(y)[..n];
            xs.iter().zip(ys).any(|(a, b)| sys.distance(a, b) > eps)
        });
        if separated_from_all {
            kept.push(x);
        }
    }
    kept.len()
}

fn check_count_args(pool_len: usize, n: usize, eps: f64) -> Result<()> {
    if pool_len == 0 {
        return Err(Error::Domain("seed pool is empty".into()));
    }
    if n == 0 {
        return Err(Error::Domain("orbit length n must be >= 1".into()));
    }
    if !(eps.is_finite() && eps > 0.0) {
        return Err(Error::Domain(format!("epsilon must be > 0, got {eps}")));
    }
    Ok(())
}

/// Size of the greedy maximal (n, eps)-separated subset of `pool`.
/// Seeds whose orbits diverge are dropped.
pub fn separated_count<D: Dynamics>(sys: &D, pool: &[D::State], n: usize, eps: f64) -> Result<usize> {
    check_count_args(pool.len(), n, eps)?;
    let segs = Segments::build(sys, pool, n);
    Ok(greedy_count(sys, &segs, n, eps))
}

/// `N(n, eps)` for every grid pair.
///
/// A set that is separated at `(n', eps')` stays separated for any `n >= n'`
/// and `eps <= eps'`, so each entry is the largest separated set witnessed at
/// any such coarser pair. That keeps the table monotone even where the greedy
/// pass alone would not be.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeparatedCountTable {
    /// Strictly decreasing.
    pub epsilon_grid: Vec<f64>,
    /// `1..=n_max`.
    pub n_grid: Vec<usize>,
    /// `counts[e][j]` is `N(n_grid[j], epsilon_grid[e])`.
    pub counts: Vec<Vec<usize>>,
    /// Seeds that survived (the upper bound for every count).
    pub pool_size: usize,
}

impl SeparatedCountTable {
    pub fn build<D: Dynamics>(sys: &D, pool: &[D::State], n_max: usize, epsilon_grid: &[f64]) -> Result<Self> {
        if n_max == 0 {
            return Err(Error::Domain("n_max must be >= 1".into()));
        }
        check_epsilon_grid(epsilon_grid)?;
        check_count_args(pool.len(), n_max, epsilon_grid[0])?;
        let segs = Segments::build(sys, pool, n_max);
        if segs.count() == 0 {
            return Err(Error::Degenerate("every pool seed diverged".into()));
        }
        let ne = epsilon_grid.len();
        let raw = par::map_indexed(ne * n_max, |idx| {
            greedy_count(sys, &segs, idx % n_max + 1, epsilon_grid[idx / n_max])
        });
        let mut counts: Vec<Vec<usize>> = raw.chunks(n_max).map(<[usize]>::to_vec).collect();
        for e in 0..ne {
            for j in 0..n_max {
                let mut best = counts[e][j];
                if j > 0 {
                    best = best.max(counts[e][j - 1]);
                }
                if e > 0 {
                    best = best.max(counts[e - 1][j]);
                }
                counts[e][j] = best;
            }
        }
        Ok(Self {
            epsilon_grid: epsilon_grid.to_vec(),
            n_grid: (1..=n_max).collect(),
            counts,
            pool_size: segs.count(),
        })
    }

    /// `(epsilon, n, N)` triples, epsilon-major.
    pub fn entries(&self) -> impl Iterator<Item = (f64, usize, usize)> + '_ {
        self.epsilon_grid.iter().zip(&self.counts).flat_map(move |(&eps, row)| {
            self.n_grid.iter().zip(row).map(move |(&n, &c)| (eps, n, c))
        })
    }

    /// Checks bounds and monotonicity in both arguments.
    pub fn is_consistent(&self) -> bool {
        let bounded = self
            .counts
            .iter()
            .flatten()
            .all(|&c| c >= 1 && c <= self.pool_size);
        let in_n = self.counts.iter().all(|row| row.windows(2).all(|w| w[0] <= w[1]));
        let in_eps = self
            .counts
            .windows(2)
            .all(|w| w[0].iter().zip(&w[1]).all(|(a, b)| a <= b));
        bounded && in_n && in_eps
    }
}

fn check_epsilon_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::Domain("epsilon grid is empty".into()));
    }
    if grid.iter().any(|e| !(e.is_finite() && *e > 0.0)) {
        return Err(Error::Domain("epsilon values must be finite and > 0".into()));
    }
    if grid.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::Domain("epsilon grid must be strictly decreasing".into()));
    }
    Ok(())
}

/// Growth-rate regression at one resolution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpsilonSlope {
    pub epsilon: f64,
    /// Slope of `ln N` against `n` over the chosen window, clamped at 0.
    pub slope: f64,
    pub r_squared: f64,
    /// Inclusive range of orbit lengths used.
    pub window: Option<(usize, usize)>,
    pub accepted: bool,
}

/// Longest contiguous run of unsaturated lengths whose `ln N` is linear in
/// `n` with `R^2 >= MIN_R_SQUARED`. Ties go to the shorter orbits.
fn fit_growth(epsilon: f64, n_grid: &[usize], counts: &[usize], pool_size: usize) -> EpsilonSlope {
    let cap = SATURATION_FRACTION * pool_size as f64;
    let usable = counts.iter().take_while(|&&c| c as f64 <= cap).count();
    let xs: Vec<f64> = n_grid[..usable].iter().map(|&n| n as f64).collect();
    let ys: Vec<f64> = counts[..usable].iter().map(|&c| (c as f64).ln()).collect();
    for len in (MIN_WINDOW..=usable).rev() {
        for lo in 0..=usable - len {
            let hi = lo + len;
            if let Some(f) = least_squares(&xs[lo..hi], &ys[lo..hi]) {
                if f.r_squared >= MIN_R_SQUARED {
                    return EpsilonSlope {
                        epsilon,
                        slope: f.slope.max(0.0),
                        r_squared: f.r_squared,
                        window: Some((n_grid[lo], n_grid[hi - 1])),
                        accepted: true,
                    };
                }
            }
        }
    }
    let fallback = least_squares(&xs, &ys);
    EpsilonSlope {
        epsilon,
        slope: fallback.map_or(0.0, |f| f.slope.max(0.0)),
        r_squared: fallback.map_or(f64::NAN, |f| f.r_squared),
        window: (usable >= 2).then(|| (n_grid[0], n_grid[usable - 1])),
        accepted: false,
    }
}

/// Entropy read off a count table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntropyFit {
    /// Nats per iteration, never negative.
    pub h: f64,
    /// False when no resolution produced an accepted window; `h` is then the
    /// fallback slope at the finest resolution.
    pub reliable: bool,
    pub per_epsilon: Vec<EpsilonSlope>,
    pub table: SeparatedCountTable,
}

impl EntropyFit {
    /// `h` is the slope at the smallest epsilon whose window was accepted.
    /// Without one it falls back to the smallest epsilon that still has a
    /// fitted slope, and is flagged unreliable.
    pub fn from_table(table: SeparatedCountTable) -> Self {
        let per_epsilon: Vec<EpsilonSlope> = table
            .epsilon_grid
            .iter()
            .zip(&table.counts)
            .map(|(&eps, row)| fit_growth(eps, &table.n_grid, row, table.pool_size))
            .collect();
        let chosen = per_epsilon.iter().rev().find(|s| s.accepted);
        let (h, reliable) = match chosen {
            Some(s) => (s.slope, true),
            None => (
                per_epsilon
                    .iter()
                    .rev()
                    .find(|s| s.window.is_some())
                    .map_or(0.0, |s| s.slope),
                false,
            ),
        };
        Self {
            h,
            reliable,
            per_epsilon,
            table,
        }
    }

    pub fn quality_flag(&self) -> &'static str {
        if self.reliable {
            "ok"
        } else {
            "unreliable"
        }
    }
}

/// Estimates the entropy of any [`Dynamics`] from an explicit seed pool.
pub fn estimate_from_pool<D: Dynamics>(
    sys: &D,
    pool: &[D::State],
    n_max: usize,
    epsilon_grid: &[f64],
) -> Result<EntropyFit> {
    if n_max < 4 {
        return Err(Error::Domain(format!("n_max must be >= 4, got {n_max}")));
    }
    let table = SeparatedCountTable::build(sys, pool, n_max, epsilon_grid)?;
    Ok(EntropyFit::from_table(table))
}

/// Estimator settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntropyConfig {
    pub pool_size: usize,
    pub n_max: usize,
    pub epsilon_grid: Vec<f64>,
    pub transient: usize,
    pub initial: PhaseState,
    /// Iterations between consecutive pool seeds along the sampling orbit.
    pub stride: usize,
    /// Up to this many extra iterations are added to each stride at random.
    pub stride_jitter: usize,
    pub seed: u64,
}

impl Default for EntropyConfig {
    fn default() -> Self {
        Self {
            pool_size: 4096,
            n_max: 12,
            epsilon_grid: vec![0.2, 0.1, 0.05, 0.02],
            transient: map::DEFAULT_TRANSIENT,
            initial: map::DEFAULT_INITIAL,
            stride: 5,
            stride_jitter: 0,
            seed: 0,
        }
    }
}

impl EntropyConfig {
    fn validate(&self) -> Result<()> {
        if self.pool_size == 0 {
            return Err(Error::Domain("pool_size must be >= 1".into()));
        }
        if self.stride < 5 {
            return Err(Error::Domain(format!("stride must be >= 5, got {}", self.stride)));
        }
        if self.n_max < 4 {
            return Err(Error::Domain(format!("n_max must be >= 4, got {}", self.n_max)));
        }
        check_epsilon_grid(&self.epsilon_grid)
    }
}

/// Seeds sampled along one post-transient orbit with the configured stride.
pub fn attractor_pool(params: &MapParams, config: &EntropyConfig, seed: u64) -> Result<Vec<PhaseState>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut it = map::Iterate::new(*params, map::settle(params, &config.initial, config.transient, true)?, true);
    let mut pool = Vec::with_capacity(config.pool_size);
    for _ in 0..config.pool_size {
        let gap = config.stride
            + if config.stride_jitter > 0 {
                rng.gen_range(0..=config.stride_jitter)
            } else {
                0
            };
        for _ in 0..gap {
            it.try_next()?;
        }
        pool.push(it.state());
    }
    Ok(pool)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntropyEstimate {
    pub params: MapParams,
    pub h: f64,
    pub reliable: bool,
    pub per_epsilon: Vec<EpsilonSlope>,
    pub table: SeparatedCountTable,
}

impl EntropyEstimate {
    pub fn quality_flag(&self) -> &'static str {
        if self.reliable {
            "ok"
        } else {
            "unreliable"
        }
    }
}

/// Entropy of the bouncing-ball map at `params` from an attractor-sampled pool.
pub fn entropy_estimate(params: &MapParams, config: &EntropyConfig) -> Result<EntropyEstimate> {
    entropy_estimate_seeded(params, config, config.seed)
}

fn entropy_estimate_seeded(params: &MapParams, config: &EntropyConfig, seed: u64) -> Result<EntropyEstimate> {
    config.validate()?;
    let pool = attractor_pool(params, config, seed)?;
    let fit = estimate_from_pool(params, &pool, config.n_max, &config.epsilon_grid)?;
    Ok(EntropyEstimate {
        params: *params,
        h: fit.h,
        reliable: fit.reliable,
        per_epsilon: fit.per_epsilon,
        table: fit.table,
    })
}

/// One sweep or grid cell. `h` is NaN and `failure` set when the cell failed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntropyCell {
    pub k: f64,
    pub q: f64,
    pub h: f64,
    pub reliable: bool,
    pub failure: Option<String>,
}

impl EntropyCell {
    pub fn quality_flag(&self) -> &'static str {
        match (&self.failure, self.reliable) {
            (Some(_), _) => "failed",
            (None, true) => "ok",
            (None, false) => "unreliable",
        }
    }
}

/// Per-cell rng seed: distinct cells draw independent stride jitter.
fn cell_seed(base: u64, index: usize) -> u64 {
    base ^ (index as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

fn cell(k: f64, q: f64, config: &EntropyConfig, seed: u64) -> EntropyCell {
    let result = MapParams::new(k, q).and_then(|p| entropy_estimate_seeded(&p, config, seed));
    match result {
        Ok(est) => EntropyCell {
            k,
            q,
            h: est.h,
            reliable: est.reliable,
            failure: None,
        },
        Err(e) => {
            log::warn!("entropy cell k={k} q={q} failed: {e}");
            EntropyCell {
                k,
                q,
                h: f64::NAN,
                reliable: false,
                failure: Some(e.to_string()),
            }
        }
    }
}

fn check_range(name: &str, min: f64, max: f64, steps: usize) -> Result<()> {
    if !(min.is_finite() && max.is_finite() && min <= max) || steps == 0 || (steps > 1 && min == max) {
        return Err(Error::Domain(format!(
            "{name} range [{min}, {max}] with {steps} steps is invalid"
        )));
    }
    Ok(())
}

fn axis(min: f64, max: f64, steps: usize) -> Vec<f64> {
    if steps == 1 {
        vec![min]
    } else {
        uniform_grid(min, max, steps)
    }
}

/// Entropy along a `q` grid at fixed `k`; each `q` gets its own pool.
pub fn entropy_sweep_q(
    k: f64,
    q_min: f64,
    q_max: f64,
    q_steps: usize,
    config: &EntropyConfig,
) -> Result<Vec<EntropyCell>> {
    MapParams::new(k, 1.0)?;
    check_range("q", q_min, q_max, q_steps)?;
    config.validate()?;
    let qs = axis(q_min, q_max, q_steps);
    Ok(par::map_indexed(qs.len(), |i| cell(k, qs[i], config, cell_seed(config.seed, i))))
}

/// Entropy over a `(k, q)` grid, `k` outer and `q` inner. Cells are
/// independent; a failed cell is flagged and the grid still completes.
pub fn entropy_grid(
    q_min: f64,
    q_max: f64,
    q_steps: usize,
    k_min: f64,
    k_max: f64,
    k_steps: usize,
    config: &EntropyConfig,
) -> Result<Vec<EntropyCell>> {
    check_range("q", q_min, q_max, q_steps)?;
    check_range("k", k_min, k_max, k_steps)?;
    if !(k_min > 0.0 && k_max < 1.0) {
        return Err(Error::Domain(format!(
            "need 0 < k_min <= k_max < 1, got [{k_min}, {k_max}]"
        )));
    }
    config.validate()?;
    let qs = axis(q_min, q_max, q_steps);
    let ks = axis(k_min, k_max, k_steps);
    let nq = qs.len();
    Ok(par::map_indexed(ks.len() * nq, |i| {
        cell(ks[i / nq], qs[i % nq], config, cell_seed(config.seed, i % nq))
    }))
}
