//! Correlation integral and correlation dimension.
//!
//! `C(r)` is the fraction of ordered pairs `(i, j)`, `i != j`, with
//! `d(x_i, x_j) <= r`: the step function is 1 at zero, so pairs exactly `r`
//! apart count. The dimension is the slope of `ln C` against `ln r` over a
//! scaling window.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fit::least_squares;
use crate::map::{euclidean_distance, toroidal_distance, Orbit, PhaseState};

/// Target histogram resolution between `r_min` and `r_max`.
pub const HISTOGRAM_BINS: usize = 512;

pub const DEFAULT_R_POINTS: usize = 64;

/// Default grid spans `[R_MIN_FACTOR, R_MAX_FACTOR] * diameter`.
pub const R_MIN_FACTOR: f64 = 1e-3;
pub const R_MAX_FACTOR: f64 = 2.0;

/// Auto-window bounds on `C` and allowed spread of local slopes.
pub const WINDOW_C_LOW: f64 = 1e-3;
pub const WINDOW_C_HIGH: f64 = 0.5;
pub const WINDOW_SLOPE_VARIATION: f64 = 0.15;

/// Fewest curve points a fit may use.
pub const MIN_FIT_POINTS: usize = 5;

/// Orbits shorter than this give noisy curves.
pub const RECOMMENDED_POINTS: usize = 500;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Metric {
    /// Phase on the circle, velocity on the line.
    Toroidal,
    Euclidean,
}

impl Metric {
    #[inline]
    pub fn distance(self, a: &PhaseState, b: &PhaseState) -> f64 {
        match self {
            Metric::Toroidal => toroidal_distance(a, b),
            Metric::Euclidean => euclidean_distance(a, b),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Metric::Toroidal => "toroidal",
            Metric::Euclidean => "euclidean",
        }
    }
}

impl std::str::FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "toroidal" => Ok(Metric::Toroidal),
            "euclidean" => Ok(Metric::Euclidean),
            other => Err(Error::Domain(format!(
                "unknown metric '{other}' (expected toroidal or euclidean)"
            ))),
        }
    }
}

fn ordered_pair_total(n: usize) -> f64 {
    n as f64 * (n - 1) as f64
}

/// Correlation integral at a single radius, by direct pair counting.
pub fn correlation_integral(points: &[PhaseState], r: f64, metric: Metric) -> Result<f64> {
    if points.len() < 2 {
        return Err(Error::Domain("correlation integral needs at least 2 points".into()));
    }
    if !(r > 0.0) {
        return Err(Error::Domain(format!("radius must be > 0, got {r}")));
    }
    let mut close: u64 = 0;
    for (i, a) in points.iter().enumerate() {
        for b in &points[i + 1..] {
            if metric.distance(a, b) <= r {
                close += 1;
            }
        }
    }
    Ok(2.0 * close as f64 / ordered_pair_total(points.len()))
}

/// Where the points of a curve came from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveSource {
    pub k: Option<f64>,
    pub q: Option<f64>,
    pub transient: Option<usize>,
    pub wrapped: Option<bool>,
}

impl CurveSource {
    pub fn synthetic() -> Self {
        Self {
            k: None,
            q: None,
            transient: None,
            wrapped: None,
        }
    }

    pub fn from_orbit(orbit: &Orbit) -> Self {
        Self {
            k: Some(orbit.params.k()),
            q: Some(orbit.params.q()),
            transient: Some(orbit.transient_len),
            wrapped: Some(orbit.wrapped),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationCurve {
    /// `(r, C(r))` on an increasing logarithmic grid.
    pub points: Vec<(f64, f64)>,
    pub n: usize,
    pub metric: Metric,
    pub diameter: f64,
    pub source: CurveSource,
}

impl CorrelationCurve {
    pub fn radii(&self) -> impl Iterator<Item = f64> + '_ {
        self.points.iter().map(|p| p.0)
    }

    /// Bounds `0 <= C <= 1`, monotone in `r`, and `C = 1` beyond the diameter.
    pub fn is_consistent(&self) -> bool {
        self.points.iter().all(|&(_, c)| (0.0..=1.0).contains(&c))
            && self.points.windows(2).all(|w| w[0].1 <= w[1].1)
            && self
                .points
                .iter()
                .filter(|(r, _)| *r >= self.diameter)
                .all(|&(_, c)| c == 1.0)
    }
}

/// Increasing geometric grid with exact endpoints.
pub fn log_grid(r_min: f64, r_max: f64, count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![r_min],
        _ => {
            let ratio = (r_max / r_min).ln() / (count - 1) as f64;
            (0..count)
                .map(|i| match i {
                    0 => r_min,
                    _ if i + 1 == count => r_max,
                    _ => r_min * (ratio * i as f64).exp(),
                })
                .collect()
        }
    }
}

/// Log-spaced histogram whose edges include every requested radius. A
/// distance `d` lands in the first bin whose upper edge satisfies
/// `d <= edge`, which is the same comparison the direct count makes, so the
/// cumulative counts at grid radii are exact.
struct PairHistogram {
    edges: Vec<f64>,
    /// Edge index of each grid radius.
    grid_at: Vec<usize>,
    log_lo: f64,
    inv_width: f64,
}

impl PairHistogram {
    fn new(grid: &[f64]) -> Self {
        let per_interval = if grid.len() > 1 {
            HISTOGRAM_BINS.div_ceil(grid.len() - 1)
        } else {
            1
        };
        let mut edges = Vec::with_capacity((grid.len().max(2) - 1) * per_interval + 1);
        let mut grid_at = Vec::with_capacity(grid.len());
        for (i, &r) in grid.iter().enumerate() {
            if i > 0 {
                let (a, b) = (grid[i - 1], r);
                let step = (b / a).ln() / per_interval as f64;
                for s in 1..per_interval {
                    let e = a * (step * s as f64).exp();
                    if e > *edges.last().unwrap() && e < b {
                        edges.push(e);
                    }
                }
            }
            grid_at.push(edges.len());
            edges.push(r);
        }
        let (lo, hi) = (edges[0], *edges.last().unwrap());
        let span = (hi / lo).ln();
        let inv_width = if span > 0.0 { (edges.len() - 1) as f64 / span } else { 0.0 };
        Self {
            edges,
            grid_at,
            log_lo: lo.ln(),
            inv_width,
        }
    }

    /// Index of the first edge `>= d`, or `edges.len()` for overflow.
    #[inline]
    fn slot(&self, d: f64) -> usize {
        let last = self.edges.len() - 1;
        if d <= self.edges[0] {
            return 0;
        }
        if d > self.edges[last] {
            return last + 1;
        }
        let guess = ((d.ln() - self.log_lo) * self.inv_width).ceil();
        let mut i = if guess.is_finite() { (guess.max(0.0) as usize).min(last) } else { last };
        while i < last && d > self.edges[i] {
            i += 1;
        }
        while i > 0 && d <= self.edges[i - 1] {
            i -= 1;
        }
        i
    }
}

fn pair_histogram(points: &[PhaseState], metric: Metric, hist: &PairHistogram) -> Vec<u64> {
    let slots = hist.edges.len() + 1;
    let n = points.len();
    let row_counts = |i: usize, acc: &mut Vec<u64>| {
        let a = &points[i];
        for b in &points[i + 1..] {
            acc[hist.slot(metric.distance(a, b))] += 1;
        }
    };
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        // blocks of rows with private histograms; integer merge is order-independent
        const BLOCK: usize = 64;
        (0..n.div_ceil(BLOCK))
            .into_par_iter()
            .map(|blk| {
                let mut acc = vec![0u64; slots];
                for i in blk * BLOCK..((blk + 1) * BLOCK).min(n) {
                    row_counts(i, &mut acc);
                }
                acc
            })
            .reduce(
                || vec![0u64; slots],
                |mut a, b| {
                    a.iter_mut().zip(&b).for_each(|(x, y)| *x += y);
                    a
                },
            )
    }
    #[cfg(not(feature = "parallel"))]
    {
        let mut acc = vec![0u64; slots];
        for i in 0..n {
            row_counts(i, &mut acc);
        }
        acc
    }
}

/// Largest pairwise distance.
pub fn diameter(points: &[PhaseState], metric: Metric) -> f64 {
    let row_max = |i: usize| {
        points[i + 1..]
            .iter()
            .map(|b| metric.distance(&points[i], b))
            .fold(0.0, f64::max)
    };
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        (0..points.len()).into_par_iter().map(row_max).reduce(|| 0.0, f64::max)
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..points.len()).map(row_max).fold(0.0, f64::max)
    }
}

/// Radius grid for [`correlation_curve_points`]; `None` bounds default to
/// fractions of the diameter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadiusGrid {
    pub r_min: Option<f64>,
    pub r_max: Option<f64>,
    pub count: usize,
}

impl Default for RadiusGrid {
    fn default() -> Self {
        Self {
            r_min: None,
            r_max: None,
            count: DEFAULT_R_POINTS,
        }
    }
}

/// Correlation integral over a logarithmic radius grid from a single
/// pair-distance pass.
pub fn correlation_curve_points(
    points: &[PhaseState],
    grid: RadiusGrid,
    metric: Metric,
    source: CurveSource,
) -> Result<CorrelationCurve> {
    let n = points.len();
    if n < 2 {
        return Err(Error::Domain("correlation curve needs at least 2 points".into()));
    }
    if n < RECOMMENDED_POINTS {
        log::warn!("correlation curve from only {n} points (recommended >= {RECOMMENDED_POINTS})");
    }
    if grid.count < 2 {
        return Err(Error::Domain("radius grid needs at least 2 points".into()));
    }
    let diam = diameter(points, metric);
    if !(diam > 0.0) {
        return Err(Error::Degenerate("all points coincide".into()));
    }
    let r_min = grid.r_min.unwrap_or(R_MIN_FACTOR * diam);
    let r_max = grid.r_max.unwrap_or(R_MAX_FACTOR * diam);
    if !(r_min > 0.0 && r_min < r_max && r_max.is_finite()) {
        return Err(Error::Domain(format!(
            "need 0 < r_min < r_max, got [{r_min}, {r_max}]"
        )));
    }
    let radii = log_grid(r_min, r_max, grid.count);
    let hist = PairHistogram::new(&radii);
    let counts = pair_histogram(points, metric, &hist);
    let total = ordered_pair_total(n);
    let mut cumulative = Vec::with_capacity(counts.len());
    let mut running = 0u64;
    for c in &counts {
        running += c;
        cumulative.push(running);
    }
    let curve = radii
        .iter()
        .zip(&hist.grid_at)
        .map(|(&r, &slot)| (r, 2.0 * cumulative[slot] as f64 / total))
        .collect();
    Ok(CorrelationCurve {
        points: curve,
        n,
        metric,
        diameter: diam,
        source,
    })
}

/// Correlation curve of an orbit's points.
pub fn correlation_curve(orbit: &Orbit, grid: RadiusGrid, metric: Metric) -> Result<CorrelationCurve> {
    correlation_curve_points(&orbit.points, grid, metric, CurveSource::from_orbit(orbit))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorrelationFit {
    /// Slope of `ln C` against `ln r`.
    pub slope: f64,
    /// Intercept of the same line (natural logs).
    pub intercept: f64,
    pub fit_window: (f64, f64),
    pub r_squared: f64,
    pub n_used: usize,
    /// Correlation dimension, `|slope|`.
    pub d_c: f64,
}

fn usable(c: f64) -> bool {
    c > 0.0 && c < 1.0
}

/// Longest contiguous run of curve points with `WINDOW_C_LOW <= C <= WINDOW_C_HIGH`
/// whose consecutive local slopes spread by at most `WINDOW_SLOPE_VARIATION`
/// of their mean. Ties go to smaller radii. Returns index range `[lo, hi)`.
fn auto_window(logs: &[(f64, f64)], c: &[f64]) -> Option<(usize, usize)> {
    let m = logs.len();
    let local: Vec<f64> = logs
        .windows(2)
        .map(|w| (w[1].1 - w[0].1) / (w[1].0 - w[0].0))
        .collect();
    let mut best: Option<(usize, usize)> = None;
    for lo in 0..m {
        if !(WINDOW_C_LOW..=WINDOW_C_HIGH).contains(&c[lo]) {
            continue;
        }
        let (mut smin, mut smax, mut ssum) = (f64::INFINITY, f64::NEG_INFINITY, 0.0);
        let mut hi = lo + 1;
        while hi < m && (WINDOW_C_LOW..=WINDOW_C_HIGH).contains(&c[hi]) {
            let s = local[hi - 1];
            let (nmin, nmax, nsum) = (smin.min(s), smax.max(s), ssum + s);
            let mean = nsum / (hi - lo) as f64;
            if !(mean > 0.0) || nmax - nmin > WINDOW_SLOPE_VARIATION * mean {
                break;
            }
            (smin, smax, ssum) = (nmin, nmax, nsum);
            hi += 1;
        }
        if hi - lo >= MIN_FIT_POINTS && best.is_none_or(|(a, b)| hi - lo > b - a) {
            best = Some((lo, hi));
        }
    }
    best
}

/// Least-squares line through `(ln r, ln C)`. With an explicit window only
/// radii inside `[r_low, r_high]` are used; otherwise the scaling window is
/// chosen automatically.
pub fn fit_correlation_dimension(curve: &CorrelationCurve, window: Option<(f64, f64)>) -> Result<CorrelationFit> {
    let kept: Vec<(f64, f64)> = curve
        .points
        .iter()
        .copied()
        .filter(|&(r, c)| usable(c) && window.is_none_or(|(lo, hi)| r >= lo && r <= hi))
        .collect();
    let logs: Vec<(f64, f64)> = kept.iter().map(|&(r, c)| (r.ln(), c.ln())).collect();
    let (lo, hi) = match window {
        Some(_) => (0, logs.len()),
        None => {
            let c: Vec<f64> = kept.iter().map(|p| p.1).collect();
            auto_window(&logs, &c).ok_or_else(|| {
                Error::NoFitWindow(format!(
                    "{} curve points have 0 < C < 1; none of their runs in \
                     [{WINDOW_C_LOW}, {WINDOW_C_HIGH}] reach {MIN_FIT_POINTS} points \
                     with local slope spread <= {WINDOW_SLOPE_VARIATION}",
                    kept.len()
                ))
            })?
        }
    };
    if hi - lo < MIN_FIT_POINTS {
        return Err(Error::NoFitWindow(format!(
            "window holds {} usable points, need {MIN_FIT_POINTS}",
            hi - lo
        )));
    }
    let xs: Vec<f64> = logs[lo..hi].iter().map(|p| p.0).collect();
    let ys: Vec<f64> = logs[lo..hi].iter().map(|p| p.1).collect();
    let f = least_squares(&xs, &ys)
        .ok_or_else(|| Error::NoFitWindow("window radii are not distinct".into()))?;
    Ok(CorrelationFit {
        slope: f.slope,
        intercept: f.intercept,
        fit_window: (kept[lo].0, kept[hi - 1].0),
        r_squared: f.r_squared,
        n_used: hi - lo,
        d_c: f.slope.abs(),
    })
}
