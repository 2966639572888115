//! Driving-frequency sweeps of the post-transient velocity.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::map::{self, MapParams, PhaseState};
use crate::par;

/// Post-transient samples kept per `q` when a caller does not choose.
pub const DEFAULT_SAMPLES: usize = 200;

/// Two samples closer than this count as the same value.
pub const PERIOD_TOLERANCE: f64 = 1e-6;

/// Longest cycle the period detector looks for by default.
pub const MAX_PERIOD: usize = 64;

/// Velocity offset applied to continuation seeds. Without it an orbit that
/// landed exactly on a floating-point fixed point stays there after the
/// point loses stability.
pub const CONTINUATION_NUDGE: f64 = 1e-8;

/// Seed for the next grid point under continuation.
pub fn continuation_seed(last: &PhaseState) -> PhaseState {
    PhaseState::new(last.phi, last.v + CONTINUATION_NUDGE)
}

/// Uniform grid on `[min, max]` with both endpoints included.
pub fn uniform_grid(min: f64, max: f64, steps: usize) -> Vec<f64> {
    match steps {
        0 => Vec::new(),
        1 => vec![min],
        _ => {
            let h = (max - min) / (steps - 1) as f64;
            (0..steps)
                .map(|i| if i + 1 == steps { max } else { min + h * i as f64 })
                .collect()
        }
    }
}

/// Settings shared by every column of a scan.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanSettings {
    pub k: f64,
    pub q_min: f64,
    pub q_max: f64,
    pub q_steps: usize,
    pub transient: usize,
    pub samples: usize,
    pub initial: PhaseState,
    /// Seed each column with the final state of the previous one.
    pub continuation: bool,
}

impl ScanSettings {
    pub fn new(k: f64, q_min: f64, q_max: f64, q_steps: usize) -> Self {
        Self {
            k,
            q_min,
            q_max,
            q_steps,
            transient: map::DEFAULT_TRANSIENT,
            samples: DEFAULT_SAMPLES,
            initial: map::DEFAULT_INITIAL,
            continuation: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        MapParams::new(self.k, 1.0)?;
        if !(self.q_min.is_finite() && self.q_max.is_finite() && self.q_min < self.q_max) {
            return Err(Error::Domain(format!(
                "need q_min < q_max, got [{}, {}]",
                self.q_min, self.q_max
            )));
        }
        if self.q_min <= 0.0 {
            return Err(Error::Domain(format!("q_min must be > 0, got {}", self.q_min)));
        }
        if self.q_steps < 2 {
            return Err(Error::Domain("q_steps must be at least 2".into()));
        }
        if self.samples == 0 {
            return Err(Error::Domain("samples must be at least 1".into()));
        }
        if !self.initial.is_finite() {
            return Err(Error::Domain("initial state must be finite".into()));
        }
        Ok(())
    }

    pub fn q_grid(&self) -> Vec<f64> {
        uniform_grid(self.q_min, self.q_max, self.q_steps)
    }
}

/// Post-transient samples at one `q`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BifurcationColumn {
    pub q: f64,
    pub v: Vec<f64>,
    /// Final state reached (the seed for the next column under continuation).
    pub last: Option<PhaseState>,
    /// Step index at which the orbit diverged, if it did.
    pub diverged_at: Option<usize>,
}

impl BifurcationColumn {
    pub fn is_diverged(&self) -> bool {
        self.diverged_at.is_some()
    }

    /// Minimal period of the velocity samples, see [`detect_period`].
    pub fn period(&self, max_period: usize) -> Option<usize> {
        if self.is_diverged() {
            return None;
        }
        detect_period(&self.v, max_period, PERIOD_TOLERANCE)
    }

    pub fn distinct_values(&self) -> usize {
        count_distinct(&self.v, PERIOD_TOLERANCE)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BifurcationScan {
    pub settings: ScanSettings,
    pub columns: Vec<BifurcationColumn>,
}

impl BifurcationScan {
    /// `(q, v)` rows in grid order; a diverged column yields one `(q, NaN)` row.
    pub fn rows(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.columns.iter().flat_map(|c| {
            let sentinel = c.is_diverged().then_some((c.q, f64::NAN));
            c.v.iter().map(move |&v| (c.q, v)).chain(sentinel)
        })
    }

    pub fn diverged_q(&self) -> Vec<f64> {
        self.columns
            .iter()
            .filter(|c| c.is_diverged())
            .map(|c| c.q)
            .collect()
    }

    pub fn column_at(&self, q: f64) -> Option<&BifurcationColumn> {
        self.columns
            .iter()
            .min_by(|a, b| (a.q - q).abs().total_cmp(&(b.q - q).abs()))
    }
}

fn run_column(params: &MapParams, seed: &PhaseState, transient: usize, samples: usize) -> BifurcationColumn {
    let q = params.q();
    let mut it = map::Iterate::new(*params, seed.wrapped(), true);
    let mut v = Vec::with_capacity(samples);
    for i in 0..transient + samples {
        match it.try_next() {
            Ok(s) if i >= transient => v.push(s.v),
            Ok(_) => {}
            Err(Error::Diverged { step }) => {
                log::warn!("bifurcation column q={q} diverged at step {step}");
                return BifurcationColumn {
                    q,
                    v: Vec::new(),
                    last: None,
                    diverged_at: Some(step),
                };
            }
            Err(e) => unreachable!("{e}"),
        }
    }
    BifurcationColumn {
        q,
        v,
        last: Some(it.state()),
        diverged_at: None,
    }
}

/// Sweeps `q` over the settings' grid at fixed `k`. With continuation the
/// sweep is sequential in `q`; without it columns run in parallel. Either way
/// the output order is the grid order.
pub fn scan(settings: &ScanSettings) -> Result<BifurcationScan> {
    settings.validate()?;
    let grid = settings.q_grid();
    let base = MapParams::new(settings.k, settings.q_min)?;
    let columns = if settings.continuation {
        let mut seed = settings.initial;
        let mut columns = Vec::with_capacity(grid.len());
        for &q in &grid {
            let col = run_column(&base.with_q(q)?, &seed, settings.transient, settings.samples);
            seed = col.last.as_ref().map_or(settings.initial, continuation_seed);
            columns.push(col);
        }
        columns
    } else {
        let params: Vec<MapParams> = grid.iter().map(|&q| base.with_q(q)).collect::<Result<_>>()?;
        par::map_indexed(params.len(), |i| {
            run_column(&params[i], &settings.initial, settings.transient, settings.samples)
        })
    };
    Ok(BifurcationScan {
        settings: *settings,
        columns,
    })
}

/// Post-transient `(phi mod 2pi, v)` points for a phase portrait.
pub fn attractor_section(
    k: f64,
    q: f64,
    transient: usize,
    samples: usize,
    initial: &PhaseState,
) -> Result<Vec<PhaseState>> {
    let params = MapParams::new(k, q)?;
    Ok(map::orbit(&params, initial, transient, samples, true)?.points)
}

/// Smallest `p <= max_period` such that `values[i + p]` matches `values[i]`
/// within `tol` for every `i`. Needs at least `2p` samples to accept `p`.
pub fn detect_period(values: &[f64], max_period: usize, tol: f64) -> Option<usize> {
    (1..=max_period)
        .take_while(|&p| 2 * p <= values.len())
        .find(|&p| values.iter().zip(&values[p..]).all(|(a, b)| (a - b).abs() <= tol))
}

/// Number of clusters after merging sorted values whose gaps are `<= tol`.
pub fn count_distinct(values: &[f64], tol: f64) -> usize {
    let mut sorted: Vec<f64> = values.iter().copied().filter(|v| v.is_finite()).collect();
    if sorted.is_empty() {
        return 0;
    }
    sorted.sort_by(f64::total_cmp);
    1 + sorted.windows(2).filter(|w| w[1] - w[0] > tol).count()
}

/// Settles onto the attractor and returns one period of it if the orbit is
/// periodic with period `<= max_period` (states matching within `tol`).
pub fn find_cycle(
    params: &MapParams,
    initial: &PhaseState,
    transient: usize,
    max_period: usize,
    tol: f64,
) -> Result<Option<Vec<PhaseState>>> {
    let o = map::orbit(params, initial, transient, 2 * max_period.max(1), true)?;
    let pts = &o.points;
    let period = (1..=max_period).find(|&p| {
        pts.iter()
            .zip(&pts[p..])
            .all(|(a, b)| map::toroidal_distance(a, b) <= tol)
    });
    Ok(period.map(|p| pts[..p].to_vec()))
}

/// First grid `q` certified as period 2 when the last certified column
/// before it was period 1. Columns without a certified period (slow
/// convergence right at the flip) are skipped.
pub fn first_period_doubling(scan: &BifurcationScan) -> Option<f64> {
    let mut previous = None;
    for c in &scan.columns {
        match c.period(MAX_PERIOD) {
            Some(2) if previous == Some(1) => return Some(c.q),
            Some(p) => previous = Some(p),
            None => {}
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::map::toroidal_distance;

    #[test]
    fn finds_closed_form_cycle() {
        let params = MapParams::new(0.3, 2.0).unwrap();
        let cycle = find_cycle(&params, &map::DEFAULT_INITIAL, 2000, 8, 1e-9).unwrap().unwrap();
        assert_eq!(cycle.len(), 2);
        let exact = crate::map::tests::symmetric_two_cycle(0.3, 2.0);
        for s in &cycle {
            assert!(exact.iter().any(|e| toroidal_distance(e, s) < 1e-9));
        }
        let chaotic = MapParams::new(0.3, 3.8).unwrap();
        assert!(find_cycle(&chaotic, &map::DEFAULT_INITIAL, 1000, 8, 1e-6).unwrap().is_none());
    }

    #[test]
    fn grid_is_inclusive() {
        let g = uniform_grid(1.0, 5.0, 5);
        assert_eq!(g, vec![1.0, 2.0, 3.0, 4.0, 5.0]);
        let g = uniform_grid(0.1, 0.7, 7);
        assert_eq!(*g.last().unwrap(), 0.7);
    }

    #[test]
    fn validate_catches_bad_ranges() {
        assert!(ScanSettings::new(0.3, 3.0, 2.0, 10).validate().is_err());
        assert!(ScanSettings::new(0.3, 1.0, 2.0, 1).validate().is_err());
        assert!(ScanSettings::new(1.2, 1.0, 2.0, 10).validate().is_err());
        assert!(ScanSettings::new(0.3, 1.0, 2.0, 10).validate().is_ok());
    }

    #[test]
    fn period_detection() {
        let v = [1.0, 2.0, 1.0, 2.0, 1.0, 2.0];
        assert_eq!(detect_period(&v, 8, 1e-6), Some(2));
        assert_eq!(detect_period(&[3.0; 10], 8, 1e-6), Some(1));
        let v: Vec<f64> = (0..100).map(|i| (i as f64 * 1.7).sin()).collect();
        assert_eq!(detect_period(&v, 8, 1e-6), None);
        // too short to certify a 3-cycle
        assert_eq!(detect_period(&[1.0, 2.0, 3.0, 1.0], 8, 1e-6), None);
    }

    #[test]
    fn distinct_counting() {
        assert_eq!(count_distinct(&[1.0, 1.0 + 1e-9, 2.0], 1e-6), 2);
        assert_eq!(count_distinct(&[], 1e-6), 0);
    }

    fn column(q: f64) -> BifurcationColumn {
        let mut s = ScanSettings::new(0.3, q, q + 1e-3, 2);
        s.continuation = false;
        scan(&s).unwrap().columns.remove(0)
    }

    #[test]
    fn period_two_column() {
        let c = column(2.0);
        assert_eq!(c.distinct_values(), 2);
        assert_eq!(c.period(MAX_PERIOD), Some(2));
    }

    #[test]
    fn chaotic_column_spreads() {
        let c = column(3.8);
        assert_eq!(c.v.len(), 200);
        assert!(c.distinct_values() >= 50, "{}", c.distinct_values());
        assert_eq!(c.period(MAX_PERIOD), None);
    }

    #[test]
    fn fixed_point_column() {
        let c = column(1.0);
        assert_eq!(c.distinct_values(), 1);
        assert!(c.v.iter().all(|v| v.abs() < 1e-6));
    }

    #[test]
    fn rows_grouped_in_grid_order() {
        let mut s = ScanSettings::new(0.3, 2.0, 3.0, 6);
        s.samples = 7;
        let sc = scan(&s).unwrap();
        let rows: Vec<_> = sc.rows().collect();
        assert_eq!(rows.len(), 42);
        for (i, chunk) in rows.chunks(7).enumerate() {
            assert!(chunk.iter().all(|r| r.0 == sc.columns[i].q));
        }
        assert!(sc.diverged_q().is_empty());
    }

    #[test]
    fn scans_are_reproducible() {
        for cont in [true, false] {
            let mut s = ScanSettings::new(0.3, 1.5, 4.0, 40);
            s.continuation = cont;
            assert_eq!(scan(&s).unwrap(), scan(&s).unwrap());
        }
    }

    #[test]
    fn section_shapes() {
        let two = attractor_section(0.3, 2.0, 1000, 200, &map::DEFAULT_INITIAL).unwrap();
        let mut reps: Vec<PhaseState> = Vec::new();
        for s in &two {
            if !reps.iter().any(|r| toroidal_distance(r, s) < 1e-6) {
                reps.push(*s);
            }
        }
        assert_eq!(reps.len(), 2);

        let chaotic = attractor_section(0.3, 3.8, 1000, 2000, &map::DEFAULT_INITIAL).unwrap();
        let worst = chaotic
            .iter()
            .map(|a| chaotic.iter().filter(|b| toroidal_distance(a, b) <= 1e-4).count())
            .max()
            .unwrap();
        assert!(worst * 10 <= chaotic.len(), "cluster of {worst}");

        let single = attractor_section(0.3, 3.8, 50, 1, &map::DEFAULT_INITIAL).unwrap();
        let end = map::orbit(&MapParams::new(0.3, 3.8).unwrap(), &map::DEFAULT_INITIAL, 50, 1, true)
            .unwrap();
        assert_eq!(single, end.points);
    }
}
