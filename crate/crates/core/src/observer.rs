//! Hybrid high-gain sampled-data observer: continuous estimation dynamics
//! between samples, a jump of the inter-sample output predictor `w` to the
//! fresh measurement at each sampling time.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg::check_hurwitz;
use crate::plant::{DerivedConstants, LtiPlant, StrictFeedbackPlant};

/// Observer injection gains `p` and high-gain parameter `theta >= 1`.
/// Construction verifies that `A + p c'` (canonical chain pair) is Hurwitz.
#[derive(Debug, Clone, PartialEq)]
pub struct ObserverGains {
    injection: DVector<f64>,
    theta: f64,
}

impl ObserverGains {
    pub fn new(injection: DVector<f64>, theta: f64) -> Result<Self> {
        if injection.is_empty() {
            return Err(Error::invalid("observer gains must be non-empty"));
        }
        if !(theta >= 1.0) {
            return Err(Error::invalid(format!("theta = {theta} must be >= 1")));
        }
        let n = injection.len();
        let mut m = DMatrix::<f64>::zeros(n, n);
        for i in 0..n.saturating_sub(1) {
            m[(i, i + 1)] = 1.0;
        }
        for i in 0..n {
            m[(i, 0)] += injection[i];
        }
        let report = check_hurwitz(&m)?;
        if !report.is_hurwitz {
            return Err(Error::NotHurwitz {
                abscissa: report.spectral_abscissa,
            });
        }
        Ok(Self { injection, theta })
    }

    pub fn injection(&self) -> &DVector<f64> {
        &self.injection
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn dim(&self) -> usize {
        self.injection.len()
    }
}

/// The observer state pair: `z` estimates the delayed plant state
/// `x(t - r)`, `w` propagates the delayed output between measurements.
#[derive(Debug, Clone, PartialEq)]
pub struct ObserverState {
    pub z: DVector<f64>,
    pub w: f64,
}

impl ObserverState {
    pub fn new(z: DVector<f64>, w: f64) -> Result<Self> {
        if z.iter().any(|v| !v.is_finite()) || !w.is_finite() {
            return Err(Error::invalid("observer state must be finite"));
        }
        Ok(Self { z, w })
    }
}

/// Continuous observer dynamics. `u_lagged` is `u(t - r - tau)`, the input
/// the delayed state actually received. The innovation is `z_1 - w`, scaled
/// through `theta^i p_i` per component; `w` follows the drift of the first
/// state equation.
pub fn observer_rhs(
    plant: &StrictFeedbackPlant,
    gains: &ObserverGains,
    state: &ObserverState,
    u_lagged: f64,
) -> Result<(DVector<f64>, f64)> {
    let n = plant.dim();
    if gains.dim() != n || state.z.len() != n {
        return Err(Error::invalid("observer_rhs: dimension mismatch"));
    }
    let zs = state.z.as_slice();
    let innovation = state.z[0] - state.w;
    let mut dz = DVector::<f64>::zeros(n);
    for i in 0..n {
        let mut v = plant.drift(i, &zs[..=i])
            + gains.theta().powi(i as i32 + 1) * gains.injection()[i] * innovation;
        if i + 1 < n {
            v += state.z[i + 1];
        } else {
            v += u_lagged;
        }
        dz[i] = v;
    }
    // Inter-sample drift of the delayed output estimate; for a scalar plant
    // the chain term is the lagged input itself.
    let dw = plant.drift(0, &zs[..1]) + if n >= 2 { state.z[1] } else { u_lagged };
    Ok((dz, dw))
}

/// Measurement jump: `z` is untouched, `w` is reset to the received output.
pub fn observer_jump(state: &ObserverState, y: f64) -> ObserverState {
    ObserverState {
        z: state.z.clone(),
        w: y,
    }
}

/// Continuous dynamics of the LTI observer: state injection through `p`,
/// output predictor driven by `c' A z + c' B u`.
pub fn lti_observer_rhs(
    plant: &LtiPlant,
    injection: &DVector<f64>,
    state: &ObserverState,
    u_lagged: f64,
) -> Result<(DVector<f64>, f64)> {
    let n = plant.dim();
    if injection.len() != n || state.z.len() != n {
        return Err(Error::invalid("lti_observer_rhs: dimension mismatch"));
    }
    let innovation = plant.c.dot(&state.z) - state.w;
    let dz = &plant.a * &state.z + &plant.b * u_lagged + injection * innovation;
    let dw = plant.c.dot(&(&plant.a * &state.z)) + plant.c.dot(&plant.b) * u_lagged;
    Ok((dz, dw))
}

/// Minimum normalized margin of the observer energy bound along a finished
/// run: at every trace row the decayed energy
/// `exp(-2 omega t)(|z|^2 + w^2)` must stay below the bound assembled from
/// the initial data and the running suprema of the delayed state, the
/// measurement error and the lagged input. A minimum at or above a small
/// negative tolerance certifies the bound on this run.
pub fn observer_bound_monitor(
    trace: &crate::simulator::SimTrace,
    constants: &DerivedConstants,
) -> crate::error::Result<f64> {
    Ok(crate::simulator::run_monitors(trace, constants)?.observer_bound_min)
}

/// Right-hand side of the hybrid observer energy bound at time `t`:
///
/// ```text
/// |z0|^2 + w0^2 + sup|u_lag|^2 / (2 omega)
///   + (sup|x(. - r)| + sup|xi|)^2 / (1 - exp(-2 omega T1 exp(-sup b)))
/// ```
///
/// The caller supplies the running suprema over `[0, t]`; the margin is
/// this value minus `exp(-2 omega t) (|z(t)|^2 + w(t)^2)`.
#[allow(clippy::too_many_arguments)]
pub fn observer_energy_bound_rhs(
    constants: &DerivedConstants,
    z0_norm: f64,
    w0: f64,
    sup_u_lagged: f64,
    sup_x_delayed: f64,
    sup_xi: f64,
    sup_b: f64,
    t1: f64,
) -> f64 {
    let omega = constants.omega;
    let denom = 1.0 - (-2.0 * omega * t1 * (-sup_b).exp()).exp();
    z0_norm * z0_norm
        + w0 * w0
        + sup_u_lagged * sup_u_lagged / (2.0 * omega)
        + (sup_x_delayed + sup_xi).powi(2) / denom
}
