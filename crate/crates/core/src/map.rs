//! The kinematic bouncing-ball map
//!
//! ```text
//! phi' = phi + q v
//! v'   = -k v + (1 + k) cos(phi')
//! ```
//!
//! `k` is the restitution coefficient and `q` the driving frequency. The
//! velocity update uses the *new* phase, so the Jacobian carries the chain
//! rule through `phi'` and its determinant is `-k` everywhere.

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// |v| above this aborts an orbit.
pub const DIVERGENCE_LIMIT: f64 = 1e12;

/// Burn-in used when a caller does not choose one.
pub const DEFAULT_TRANSIENT: usize = 1000;

/// Starting point used when a caller does not choose one.
pub const DEFAULT_INITIAL: PhaseState = PhaseState { phi: 0.1, v: 0.1 };

/// Control parameters of the map.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MapParams {
    k: f64,
    q: f64,
}

impl MapParams {
    /// Validated constructor: requires `0 < k < 1` and `q > 0`, both finite.
    pub fn new(k: f64, q: f64) -> Result<Self> {
        if !(k.is_finite() && k > 0.0 && k < 1.0) {
            return Err(Error::Domain(format!(
                "restitution k must satisfy 0 < k < 1, got {k}"
            )));
        }
        if !(q.is_finite() && q > 0.0) {
            return Err(Error::Domain(format!(
                "driving frequency q must be finite and > 0, got {q}"
            )));
        }
        Ok(Self { k, q })
    }

    #[inline]
    pub fn k(&self) -> f64 {
        self.k
    }

    #[inline]
    pub fn q(&self) -> f64 {
        self.q
    }

    /// The same restitution with a different driving frequency.
    pub fn with_q(&self, q: f64) -> Result<Self> {
        Self::new(self.k, q)
    }
}

/// One point `(phi, v)` of phase space.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseState {
    pub phi: f64,
    pub v: f64,
}

impl PhaseState {
    pub const fn new(phi: f64, v: f64) -> Self {
        Self { phi, v }
    }

    #[inline]
    pub fn is_finite(&self) -> bool {
        self.phi.is_finite() && self.v.is_finite()
    }

    /// Copy with the phase reduced into `[0, 2pi)`.
    pub fn wrapped(&self) -> Self {
        Self {
            phi: wrap_angle(self.phi),
            v: self.v,
        }
    }
}

/// Reduces an angle into `[0, 2pi)`.
#[inline]
pub fn wrap_angle(phi: f64) -> f64 {
    let r = phi.rem_euclid(TAU);
    // rem_euclid rounds up to TAU for tiny negative inputs
    if r >= TAU {
        0.0
    } else {
        r
    }
}

/// Shortest distance between two angles on the circle, in `[0, pi]`.
#[inline]
pub fn circle_distance(a: f64, b: f64) -> f64 {
    let d = (a - b).abs().rem_euclid(TAU);
    d.min(TAU - d)
}

/// Distance on the cylinder: phase on the circle, velocity on the line.
#[inline]
pub fn toroidal_distance(a: &PhaseState, b: &PhaseState) -> f64 {
    circle_distance(a.phi, b.phi).hypot(a.v - b.v)
}

/// Plain Euclidean distance in the `(phi, v)` plane.
#[inline]
pub fn euclidean_distance(a: &PhaseState, b: &PhaseState) -> f64 {
    (a.phi - b.phi).hypot(a.v - b.v)
}

/// 2x2 Jacobian `[[a11, a12], [a21, a22]]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JacobianMatrix {
    pub a11: f64,
    pub a12: f64,
    pub a21: f64,
    pub a22: f64,
}

impl JacobianMatrix {
    pub const IDENTITY: Self = Self {
        a11: 1.0,
        a12: 0.0,
        a21: 0.0,
        a22: 1.0,
    };

    pub fn determinant(&self) -> f64 {
        self.a11 * self.a22 - self.a12 * self.a21
    }

    pub fn trace(&self) -> f64 {
        self.a11 + self.a22
    }

    /// Matrix product `self * rhs`.
    pub fn mul(&self, rhs: &Self) -> Self {
        Self {
            a11: self.a11 * rhs.a11 + self.a12 * rhs.a21,
            a12: self.a11 * rhs.a12 + self.a12 * rhs.a22,
            a21: self.a21 * rhs.a11 + self.a22 * rhs.a21,
            a22: self.a21 * rhs.a12 + self.a22 * rhs.a22,
        }
    }

    /// Applies the matrix to the column vector `(x, y)`.
    #[inline]
    pub fn apply(&self, x: f64, y: f64) -> (f64, f64) {
        (self.a11 * x + self.a12 * y, self.a21 * x + self.a22 * y)
    }
}

fn check_state(s: &PhaseState) -> Result<()> {
    if s.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!(
            "state must be finite, got ({}, {})",
            s.phi, s.v
        )))
    }
}

/// One application of the map. With `wrap` the new phase is reduced into
/// `[0, 2pi)`; the velocity does not depend on the wrap mode.
pub fn step(params: &MapParams, s: &PhaseState, wrap: bool) -> Result<PhaseState> {
    check_state(s)?;
    Ok(step_unchecked(params, s, wrap))
}

#[inline]
pub(crate) fn step_unchecked(params: &MapParams, s: &PhaseState, wrap: bool) -> PhaseState {
    let phi = s.phi + params.q * s.v;
    let v = -params.k * s.v + (1.0 + params.k) * phi.cos();
    PhaseState {
        phi: if wrap { wrap_angle(phi) } else { phi },
        v,
    }
}

/// Exact Jacobian of [`step`] at `s`.
pub fn jacobian(params: &MapParams, s: &PhaseState) -> Result<JacobianMatrix> {
    check_state(s)?;
    Ok(jacobian_unchecked(params, s))
}

#[inline]
pub(crate) fn jacobian_unchecked(params: &MapParams, s: &PhaseState) -> JacobianMatrix {
    let (k, q) = (params.k, params.q);
    let sin_new = (s.phi + q * s.v).sin();
    JacobianMatrix {
        a11: 1.0,
        a12: q,
        a21: -(1.0 + k) * sin_new,
        a22: -k - (1.0 + k) * q * sin_new,
    }
}

/// A post-transient run of the map.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Orbit {
    pub params: MapParams,
    pub initial: PhaseState,
    pub transient_len: usize,
    pub points: Vec<PhaseState>,
    pub wrapped: bool,
}

impl Orbit {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Absolute iteration index of `points[i]` (the initial state is index 0).
    pub fn iteration_index(&self, i: usize) -> usize {
        self.transient_len + i + 1
    }

    pub fn last(&self) -> Option<&PhaseState> {
        self.points.last()
    }
}

/// Iterates `transient` steps silently then records `length` states.
pub fn orbit(
    params: &MapParams,
    initial: &PhaseState,
    transient: usize,
    length: usize,
    wrap: bool,
) -> Result<Orbit> {
    if length == 0 {
        return Err(Error::Domain("orbit length must be at least 1".into()));
    }
    check_state(initial)?;
    let start = if wrap { initial.wrapped() } else { *initial };
    let mut it = Iterate::new(*params, start, wrap);
    for _ in 0..transient {
        it.try_next()?;
    }
    let mut points = Vec::with_capacity(length);
    for _ in 0..length {
        points.push(it.try_next()?);
    }
    Ok(Orbit {
        params: *params,
        initial: *initial,
        transient_len: transient,
        points,
        wrapped: wrap,
    })
}

/// Runs `transient` steps and returns only the final state.
pub fn settle(
    params: &MapParams,
    initial: &PhaseState,
    transient: usize,
    wrap: bool,
) -> Result<PhaseState> {
    check_state(initial)?;
    let start = if wrap { initial.wrapped() } else { *initial };
    let mut it = Iterate::new(*params, start, wrap);
    for _ in 0..transient {
        it.try_next()?;
    }
    Ok(it.state())
}

/// Stepping cursor with the divergence guard applied.
#[derive(Debug, Clone)]
pub struct Iterate {
    params: MapParams,
    state: PhaseState,
    wrap: bool,
    count: usize,
}

impl Iterate {
    pub fn new(params: MapParams, state: PhaseState, wrap: bool) -> Self {
        Self {
            params,
            state,
            wrap,
            count: 0,
        }
    }

    pub fn state(&self) -> PhaseState {
        self.state
    }

    /// Advances one step; fails with the 1-based step index on divergence.
    pub fn try_next(&mut self) -> Result<PhaseState> {
        let next = step_unchecked(&self.params, &self.state, self.wrap);
        self.count += 1;
        if !next.is_finite() || next.v.abs() > DIVERGENCE_LIMIT {
            return Err(Error::Diverged { step: self.count });
        }
        self.state = next;
        Ok(next)
    }
}
