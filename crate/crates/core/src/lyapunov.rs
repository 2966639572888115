//! Lyapunov spectrum of the map by tangent-space evolution.
//!
//! An orthonormal frame is pushed through the exact Jacobian and
//! re-orthonormalised (Gram-Schmidt QR) after every step. The logarithms of
//! the diagonal of R are the one-step stretches; their running means are the
//! finite-time exponents. Logarithms are natural, rates are per iteration.

use serde::{Deserialize, Serialize};

use crate::bifurcation::uniform_grid;
use crate::error::{Error, Result};
use crate::map::{self, MapParams, PhaseState};
use crate::par;

/// Iterations averaged when a caller does not choose.
pub const DEFAULT_STEPS: usize = 100_000;

/// Closure tolerance for cycles handed to [`lce_exact_periodic`].
pub const CYCLE_TOLERANCE: f64 = 1e-9;

/// Running exponent estimates along one orbit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LyapunovSeries {
    pub params: MapParams,
    pub initial: PhaseState,
    pub n_steps: usize,
    /// `lambda1_series[n - 1]` is the mean of the first `n` stretches.
    pub lambda1_series: Vec<f64>,
    pub lambda2_series: Vec<f64>,
    pub lambda1: f64,
    pub lambda2: f64,
}

impl LyapunovSeries {
    pub fn sum(&self) -> f64 {
        self.lambda1 + self.lambda2
    }

    /// Spread (max - min) of the largest-exponent estimate over the last
    /// decade of iterations, `n` in `[n_steps / 10, n_steps]`.
    pub fn last_decade_variation(&self) -> f64 {
        let tail = &self.lambda1_series[self.n_steps / 10..];
        let (lo, hi) = tail
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| (lo.min(x), hi.max(x)));
        hi - lo
    }
}

/// Log-stretches of one tangent step, `[ln r11, ln r22]`.
pub type Stretch = [f64; 2];

/// Evolves the state and an orthonormal frame `n` steps, calling `visit`
/// with the 1-based step index and the stretches. Returns the final state.
fn evolve(
    params: &MapParams,
    start: PhaseState,
    n: usize,
    mut visit: impl FnMut(usize, Stretch),
) -> Result<PhaseState> {
    let mut it = map::Iterate::new(*params, start, true);
    let (mut e1, mut e2) = ([1.0, 0.0], [0.0, 1.0]);
    for m in 1..=n {
        let jac = map::jacobian_unchecked(params, &it.state());
        it.try_next()?;
        let (x1, y1) = jac.apply(e1[0], e1[1]);
        let (x2, y2) = jac.apply(e2[0], e2[1]);
        let r11 = x1.hypot(y1);
        if !(r11.is_finite() && r11 > 0.0) {
            return Err(Error::SingularFrame { step: m });
        }
        e1 = [x1 / r11, y1 / r11];
        let proj = e1[0] * x2 + e1[1] * y2;
        let (ox, oy) = (x2 - proj * e1[0], y2 - proj * e1[1]);
        let r22 = ox.hypot(oy);
        if !(r22.is_finite() && r22 > 0.0) {
            return Err(Error::SingularFrame { step: m });
        }
        e2 = [ox / r22, oy / r22];
        visit(m, [r11.ln(), r22.ln()]);
    }
    Ok(it.state())
}

fn check_steps(n_steps: usize) -> Result<()> {
    if n_steps < 100 {
        return Err(Error::Domain(format!("n_steps must be >= 100, got {n_steps}")));
    }
    Ok(())
}

/// One-step tangent stretches after a burn-in, for diagnostics.
pub fn local_stretches(
    params: &MapParams,
    initial: &PhaseState,
    transient: usize,
    n_steps: usize,
) -> Result<Vec<Stretch>> {
    let start = map::settle(params, initial, transient, true)?;
    let mut out = Vec::with_capacity(n_steps);
    evolve(params, start, n_steps, |_, s| out.push(s))?;
    Ok(out)
}

/// Finite-time Lyapunov exponents along the orbit of `initial`.
///
/// Each running pair is reported in decreasing order, so `lambda1 >= lambda2`
/// holds entry by entry.
pub fn lce_series(
    params: &MapParams,
    initial: &PhaseState,
    transient: usize,
    n_steps: usize,
) -> Result<LyapunovSeries> {
    check_steps(n_steps)?;
    let start = map::settle(params, initial, transient, true)?;
    let mut l1 = Vec::with_capacity(n_steps);
    let mut l2 = Vec::with_capacity(n_steps);
    let (mut s1, mut s2) = (0.0, 0.0);
    evolve(params, start, n_steps, |m, [a, b]| {
        s1 += a;
        s2 += b;
        let (x, y) = (s1 / m as f64, s2 / m as f64);
        l1.push(x.max(y));
        l2.push(x.min(y));
    })?;
    Ok(LyapunovSeries {
        params: *params,
        initial: *initial,
        n_steps,
        lambda1: l1[n_steps - 1],
        lambda2: l2[n_steps - 1],
        lambda1_series: l1,
        lambda2_series: l2,
    })
}

/// Exact exponents of a periodic cycle: `ln|mu_i| / p` for the eigenvalues
/// `mu_i` of the product of the `p` Jacobians along the cycle.
pub fn lce_exact_periodic(params: &MapParams, cycle: &[PhaseState]) -> Result<(f64, f64)> {
    if cycle.is_empty() {
        return Err(Error::Domain("cycle must contain at least one state".into()));
    }
    let p = cycle.len();
    let mut product = map::JacobianMatrix::IDENTITY;
    for (i, s) in cycle.iter().enumerate() {
        let next = map::step(params, s, true)?;
        let mismatch = map::toroidal_distance(&next, &cycle[(i + 1) % p]);
        if !(mismatch <= CYCLE_TOLERANCE) {
            return Err(Error::OpenCycle { index: i, mismatch });
        }
        product = map::jacobian_unchecked(params, s).mul(&product);
    }
    let (tr, det) = (product.trace(), product.determinant());
    let disc = tr * tr - 4.0 * det;
    let pf = p as f64;
    if disc >= 0.0 {
        let root = disc.sqrt();
        // larger-magnitude root first, the other from the determinant to avoid cancellation
        let big = if tr >= 0.0 { (tr + root) / 2.0 } else { (tr - root) / 2.0 };
        let small = det / big;
        let (a, b) = (big.abs().ln() / pf, small.abs().ln() / pf);
        Ok((a.max(b), a.min(b)))
    } else {
        // complex pair: |mu|^2 = det
        let l = det.abs().ln() / (2.0 * pf);
        Ok((l, l))
    }
}

/// Settings for a sweep of converged exponents over `q`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LyapunovSweep {
    pub k: f64,
    pub q_min: f64,
    pub q_max: f64,
    pub q_steps: usize,
    pub transient: usize,
    pub n_steps: usize,
    pub initial: PhaseState,
    pub continuation: bool,
}

impl LyapunovSweep {
    pub fn new(k: f64, q_min: f64, q_max: f64, q_steps: usize) -> Self {
        Self {
            k,
            q_min,
            q_max,
            q_steps,
            transient: map::DEFAULT_TRANSIENT,
            n_steps: DEFAULT_STEPS,
            initial: map::DEFAULT_INITIAL,
            continuation: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub q: f64,
    pub lambda1: f64,
    pub lambda2: f64,
    /// Set when this `q` failed; exponents are NaN then.
    pub failure: Option<String>,
}

fn sweep_point(params: &MapParams, seed: &PhaseState, transient: usize, n: usize) -> (SweepRow, Option<PhaseState>) {
    let run = || -> Result<(f64, f64, PhaseState)> {
        let start = map::settle(params, seed, transient, true)?;
        let (mut s1, mut s2) = (0.0, 0.0);
        let end = evolve(params, start, n, |_, [a, b]| {
            s1 += a;
            s2 += b;
        })?;
        let (x, y) = (s1 / n as f64, s2 / n as f64);
        Ok((x.max(y), x.min(y), end))
    };
    match run() {
        Ok((lambda1, lambda2, end)) => (
            SweepRow { q: params.q(), lambda1, lambda2, failure: None },
            Some(end),
        ),
        Err(e) => {
            log::warn!("lyapunov sweep q={} failed: {e}", params.q());
            (
                SweepRow {
                    q: params.q(),
                    lambda1: f64::NAN,
                    lambda2: f64::NAN,
                    failure: Some(e.to_string()),
                },
                None,
            )
        }
    }
}

/// Converged exponents for every `q` of the sweep grid, in grid order.
pub fn lce_vs_q(sweep: &LyapunovSweep) -> Result<Vec<SweepRow>> {
    crate::bifurcation::ScanSettings {
        k: sweep.k,
        q_min: sweep.q_min,
        q_max: sweep.q_max,
        q_steps: sweep.q_steps,
        transient: sweep.transient,
        samples: 1,
        initial: sweep.initial,
        continuation: sweep.continuation,
    }
    .validate()?;
    check_steps(sweep.n_steps)?;
    let grid = uniform_grid(sweep.q_min, sweep.q_max, sweep.q_steps);
    let params: Vec<MapParams> = grid
        .iter()
        .map(|&q| MapParams::new(sweep.k, q))
        .collect::<Result<_>>()?;
    if sweep.continuation {
        let mut seed = sweep.initial;
        Ok(params
            .iter()
            .map(|p| {
                let (row, end) = sweep_point(p, &seed, sweep.transient, sweep.n_steps);
                seed = end.as_ref().map_or(sweep.initial, crate::bifurcation::continuation_seed);
                row
            })
            .collect())
    } else {
        Ok(par::map_indexed(params.len(), |i| {
            sweep_point(&params[i], &sweep.initial, sweep.transient, sweep.n_steps).0
        }))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_2;

    fn p(k: f64, q: f64) -> MapParams {
        MapParams::new(k, q).unwrap()
    }

    #[test]
    fn fixed_point_exponents() {
        // eigenvalues of [[1, .5], [-1.3, -.95]], via mpmath: 0.5732928..., -0.5232928...
        let (l1, l2) = lce_exact_periodic(&p(0.3, 0.5), &[PhaseState::new(FRAC_PI_2, 0.0)]).unwrap();
        assert!((l1 - (-0.556_358_689_318_309_3)).abs() < 1e-12, "{l1}");
        assert!((l2 - (-0.647_614_115_007_626_7)).abs() < 1e-12, "{l2}");
    }

    #[test]
    fn series_matches_exact_two_cycle() {
        let params = p(0.3, 2.0);
        let cycle = crate::map::tests::symmetric_two_cycle(0.3, 2.0);
        let (e1, e2) = lce_exact_periodic(&params, &cycle).unwrap();
        assert!((e1 + e2 - 0.3f64.ln()).abs() < 1e-12);
        let s = lce_series(&params, &map::DEFAULT_INITIAL, 1000, 100_000).unwrap();
        assert!((s.lambda1 - e1).abs() < 5e-3, "{} vs {e1}", s.lambda1);
        assert!((s.lambda2 - e2).abs() < 5e-3, "{} vs {e2}", s.lambda2);
    }

    #[test]
    fn open_cycle_rejected() {
        let r = lce_exact_periodic(&p(0.3, 2.5), &[PhaseState::new(0.3, 0.2)]);
        assert!(matches!(r, Err(Error::OpenCycle { index: 0, .. })));
        assert!(lce_exact_periodic(&p(0.3, 2.5), &[]).is_err());
    }

    #[test]
    fn short_series_rejected() {
        assert!(lce_series(&p(0.3, 2.5), &map::DEFAULT_INITIAL, 0, 50).is_err());
    }

    #[test]
    fn series_shape_and_order() {
        let s = lce_series(&p(0.3, 3.8), &map::DEFAULT_INITIAL, 100, 2000).unwrap();
        assert_eq!(s.lambda1_series.len(), 2000);
        assert_eq!(s.lambda2_series.len(), 2000);
        assert!(s
            .lambda1_series
            .iter()
            .zip(&s.lambda2_series)
            .all(|(a, b)| a >= b));
        assert_eq!(s.lambda1, *s.lambda1_series.last().unwrap());
    }

    #[test]
    fn stretches_sum_to_log_k() {
        let st = local_stretches(&p(0.4, 3.1), &map::DEFAULT_INITIAL, 10, 500).unwrap();
        for [a, b] in st {
            assert!((a + b - 0.4f64.ln()).abs() < 1e-12);
        }
    }

    #[test]
    fn sweep_rows_follow_grid() {
        let mut sw = LyapunovSweep::new(0.3, 2.0, 4.0, 5);
        sw.n_steps = 2000;
        let rows = lce_vs_q(&sw).unwrap();
        let q: Vec<f64> = rows.iter().map(|r| r.q).collect();
        assert_eq!(q, vec![2.0, 2.5, 3.0, 3.5, 4.0]);
        for r in &rows {
            assert!(r.failure.is_none());
            assert!((r.lambda1 + r.lambda2 - 0.3f64.ln()).abs() < 1e-2);
        }
    }
}
