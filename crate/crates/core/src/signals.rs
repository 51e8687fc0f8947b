//! Time bookkeeping: sampling schedules, zero-order-hold input records with
//! exact integration, dense interpolable state histories and the exogenous
//! test signals fed to the closed loop.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Measurement sampling clock.
///
/// Emits `tau_0 = 0` and then `tau_{i+1} = tau_i + T1 * exp(-b(tau_i))`,
/// where `b >= 0` is an exogenous perturbation of the schedule. Since
/// `b >= 0`, the gaps never exceed `T1` and the sequence is strictly
/// increasing and unbounded.
#[derive(Debug, Clone)]
pub struct SamplingSchedule {
    base_period: f64,
    perturbation: ExogenousSignal,
    current: f64,
}

impl SamplingSchedule {
    pub fn new(base_period: f64, perturbation: ExogenousSignal) -> Result<Self> {
        if !(base_period > 0.0) || !base_period.is_finite() {
            return Err(Error::invalid(format!(
                "sampling base period T1 must be positive and finite, got {base_period}"
            )));
        }
        Ok(Self {
            base_period,
            perturbation,
            current: 0.0,
        })
    }

    /// The most recently emitted sampling time.
    pub fn current(&self) -> f64 {
        self.current
    }

    /// Advances the clock and returns the next sampling time.
    pub fn advance(&mut self) -> Result<f64> {
        let b_val = self.perturbation.eval(self.current);
        let next = schedule_next(self.current, self.base_period, b_val)?;
        self.current = next;
        Ok(next)
    }
}

/// Next sampling time `tau_i + T1 * exp(-b_val)`.
pub fn schedule_next(tau_i: f64, t1: f64, b_val: f64) -> Result<f64> {
    if !tau_i.is_finite() || !t1.is_finite() || !b_val.is_finite() {
        return Err(Error::invalid("schedule_next: non-finite input"));
    }
    if t1 <= 0.0 {
        return Err(Error::invalid(format!(
            "schedule_next: T1 = {t1} must be > 0"
        )));
    }
    if b_val < 0.0 {
        return Err(Error::invalid(format!(
            "schedule_next: perturbation value {b_val} must be >= 0"
        )));
    }
    Ok(tau_i + t1 * (-b_val).exp())
}

/// A right-open piecewise-constant signal.
///
/// Segment `j` holds `values[j]` on `[starts[j], starts[j+1])`; the last
/// segment extends to `+inf`. The record is exact: integrals are finite sums
/// of `length * value` terms and suprema are maxima over finitely many
/// segment values, so no quadrature enters anywhere a ZOH input is consumed.
#[derive(Debug, Clone, PartialEq)]
pub struct ZohSignal {
    starts: Vec<f64>,
    values: Vec<f64>,
}

impl ZohSignal {
    /// Builds a signal from `(start, value)` pairs with strictly increasing
    /// starts.
    pub fn new(segments: &[(f64, f64)]) -> Result<Self> {
        if segments.is_empty() {
            return Err(Error::invalid("ZohSignal needs at least one segment"));
        }
        let mut starts = Vec::with_capacity(segments.len());
        let mut values = Vec::with_capacity(segments.len());
        for &(start, value) in segments {
            if !start.is_finite() || !value.is_finite() {
                return Err(Error::invalid("ZohSignal: non-finite segment"));
            }
            if let Some(&last) = starts.last() {
                if start <= last {
                    return Err(Error::invalid(format!(
                        "ZohSignal: segment starts must strictly increase ({start} after {last})"
                    )));
                }
            }
            starts.push(start);
            values.push(value);
        }
        Ok(Self { starts, values })
    }

    /// A single constant segment starting at `start`.
    pub fn constant(start: f64, value: f64) -> Self {
        Self {
            starts: vec![start],
            values: vec![value],
        }
    }

    pub fn domain_start(&self) -> f64 {
        self.starts[0]
    }

    pub fn segments(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.starts.iter().copied().zip(self.values.iter().copied())
    }

    /// Appends a new hold starting at `start`, which must lie strictly after
    /// every existing breakpoint.
    pub fn push(&mut self, start: f64, value: f64) -> Result<()> {
        let last = *self.starts.last().unwrap();
        if !(start > last) {
            return Err(Error::invalid(format!(
                "ZohSignal::push: start {start} must exceed last breakpoint {last}"
            )));
        }
        if !value.is_finite() {
            return Err(Error::invalid("ZohSignal::push: non-finite value"));
        }
        self.starts.push(start);
        self.values.push(value);
        Ok(())
    }

    /// Index of the segment covering `t` (right-open convention).
    fn segment_index(&self, t: f64) -> Result<usize> {
        if t < self.starts[0] {
            return Err(Error::OutOfDomain {
                t,
                start: self.starts[0],
                end: f64::INFINITY,
            });
        }
        // Last start <= t.
        Ok(self.starts.partition_point(|&s| s <= t) - 1)
    }

    /// Value at `t`; right-continuous, so an exact breakpoint belongs to the
    /// segment it opens.
    pub fn eval(&self, t: f64) -> Result<f64> {
        Ok(self.values[self.segment_index(t)?])
    }

    /// Exact integral over `[a, b]` as a sum of segment contributions.
    pub fn integral(&self, a: f64, b: f64) -> Result<f64> {
        if !(a <= b) {
            return Err(Error::invalid(format!(
                "ZohSignal::integral: reversed interval [{a}, {b}]"
            )));
        }
        if a < self.starts[0] {
            return Err(Error::OutOfDomain {
                t: a,
                start: self.starts[0],
                end: f64::INFINITY,
            });
        }
        if a == b {
            return Ok(0.0);
        }
        let mut acc = 0.0;
        let mut j = self.segment_index(a)?;
        let mut lo = a;
        while lo < b {
            let hi = match self.starts.get(j + 1) {
                Some(&next) if next < b => next,
                _ => b,
            };
            acc += (hi - lo) * self.values[j];
            lo = hi;
            j += 1;
        }
        Ok(acc)
    }

    /// Exact supremum of `|u|` over `[a, b)`; for `a == b` the window is
    /// empty and the supremum is 0.
    pub fn sup_abs(&self, a: f64, b: f64) -> Result<f64> {
        if !(a <= b) {
            return Err(Error::invalid(format!(
                "ZohSignal::sup_abs: reversed interval [{a}, {b}]"
            )));
        }
        if a == b {
            return Ok(0.0);
        }
        if a < self.starts[0] {
            return Err(Error::OutOfDomain {
                t: a,
                start: self.starts[0],
                end: f64::INFINITY,
            });
        }
        let mut j = self.segment_index(a)?;
        let mut sup = 0.0f64;
        loop {
            sup = sup.max(self.values[j].abs());
            j += 1;
            match self.starts.get(j) {
                Some(&next) if next < b => {}
                _ => break,
            }
        }
        Ok(sup)
    }

    /// Restriction of the signal to `[a, b)`, translated so the output lives
    /// on `[0, b - a)`. Breakpoints are carried over exactly.
    pub fn slice(&self, a: f64, b: f64) -> Result<ZohSignal> {
        if !(a < b) {
            return Err(Error::invalid(format!(
                "ZohSignal::slice: empty window [{a}, {b})"
            )));
        }
        if a < self.starts[0] {
            return Err(Error::invalid(format!(
                "ZohSignal::slice: window start {a} precedes domain start {}",
                self.starts[0]
            )));
        }
        let j0 = self.segment_index(a)?;
        let mut starts = vec![0.0];
        let mut values = vec![self.values[j0]];
        for j in (j0 + 1)..self.starts.len() {
            let s = self.starts[j];
            if s >= b {
                break;
            }
            starts.push(s - a);
            values.push(self.values[j]);
        }
        Ok(ZohSignal { starts, values })
    }
}

/// The shift operator restricted to the open history window: returns the
/// signal `v` on `[0, r_plus_tau)` with `v(s) = u(t_now - r_plus_tau + s)`.
pub fn shift_history(u: &ZohSignal, t_now: f64, r_plus_tau: f64) -> Result<ZohSignal> {
    if !(r_plus_tau > 0.0) {
        return Err(Error::invalid(format!(
            "shift_history: window length {r_plus_tau} must be > 0"
        )));
    }
    u.slice(t_now - r_plus_tau, t_now)
}

/// Dense record of a state trajectory with stored derivatives.
///
/// Queries between nodes use cubic Hermite interpolation, which matches the
/// fourth-order accuracy of the fixed-step integrator that produces the
/// nodes; queries at stored nodes reproduce the stored value exactly.
#[derive(Debug, Clone, Default)]
pub struct StateHistory {
    times: Vec<f64>,
    states: Vec<DVector<f64>>,
    derivs: Vec<DVector<f64>>,
    // Outgoing derivative where it differs from the incoming one (corner
    // nodes: a held input switched value exactly there).
    derivs_out: Vec<Option<DVector<f64>>>,
}

impl StateHistory {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_capacity(cap: usize) -> Self {
        Self {
            times: Vec::with_capacity(cap),
            states: Vec::with_capacity(cap),
            derivs: Vec::with_capacity(cap),
            derivs_out: Vec::with_capacity(cap),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn start(&self) -> Option<f64> {
        self.times.first().copied()
    }

    pub fn end(&self) -> Option<f64> {
        self.times.last().copied()
    }

    /// Appends a node; times must strictly increase.
    pub fn push(&mut self, t: f64, x: DVector<f64>, dx: DVector<f64>) -> Result<()> {
        if let Some(&last) = self.times.last() {
            if t <= last {
                return Err(Error::invalid(format!(
                    "StateHistory::push: time {t} must exceed last node {last}"
                )));
            }
        }
        if x.len() != dx.len() {
            return Err(Error::invalid(
                "StateHistory::push: state/derivative dim mismatch",
            ));
        }
        self.times.push(t);
        self.states.push(x);
        self.derivs.push(dx);
        self.derivs_out.push(None);
        Ok(())
    }

    /// Marks the last node as a corner: interpolation to its right uses
    /// `dx` instead of the incoming derivative.
    pub fn set_outgoing(&mut self, dx: DVector<f64>) -> Result<()> {
        match self.derivs_out.last_mut() {
            Some(slot) => {
                *slot = Some(dx);
                Ok(())
            }
            None => Err(Error::invalid("StateHistory::set_outgoing: empty history")),
        }
    }

    /// Interpolated state at `t`. Exact at stored nodes, cubic Hermite
    /// between adjacent nodes.
    pub fn sample(&self, t: f64) -> Result<DVector<f64>> {
        let (first, last) = match (self.start(), self.end()) {
            (Some(a), Some(b)) => (a, b),
            _ => return Err(Error::invalid("StateHistory::sample: empty history")),
        };
        if t < first || t > last {
            return Err(Error::OutOfDomain {
                t,
                start: first,
                end: last,
            });
        }
        // partition_point gives the first index with time > t.
        let hi = self.times.partition_point(|&s| s <= t);
        if hi == 0 {
            return Ok(self.states[0].clone());
        }
        let lo = hi - 1;
        if self.times[lo] == t || hi == self.times.len() {
            return Ok(self.states[lo].clone());
        }
        let (t0, t1) = (self.times[lo], self.times[hi]);
        let h = t1 - t0;
        let s = (t - t0) / h;
        let s2 = s * s;
        let s3 = s2 * s;
        let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
        let h10 = s3 - 2.0 * s2 + s;
        let h01 = -2.0 * s3 + 3.0 * s2;
        let h11 = s3 - s2;
        let d_lo = self.derivs_out[lo].as_ref().unwrap_or(&self.derivs[lo]);
        Ok(&self.states[lo] * h00
            + d_lo * (h10 * h)
            + &self.states[hi] * h01
            + &self.derivs[hi] * (h11 * h))
    }

    /// Maximum Euclidean norm over the stored nodes in `[a, b]`.
    pub fn sup_norm(&self, a: f64, b: f64) -> f64 {
        self.times
            .iter()
            .zip(&self.states)
            .filter(|(&t, _)| t >= a && t <= b)
            .map(|(_, x)| x.norm())
            .fold(0.0, f64::max)
    }
}

/// Deterministic exogenous test signals: disturbances, measurement error and
/// the sampling-schedule perturbation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ExogenousSignal {
    Zero,
    Constant {
        value: f64,
    },
    /// `amplitude * sin(frequency * t + phase)`.
    Sinusoid {
        amplitude: f64,
        frequency: f64,
        #[serde(default)]
        phase: f64,
    },
    /// Zero-order-hold table `(t_j, value_j)`; 0 before the first breakpoint.
    PiecewiseConstant {
        table: Vec<(f64, f64)>,
    },
    /// Deterministic per-query noise, uniform on `[0, amplitude)`. The value
    /// at a time depends only on `(seed, t)`, so replays are bit-identical.
    SeededUniformNoise {
        amplitude: f64,
        seed: u64,
    },
}

impl ExogenousSignal {
    pub fn eval(&self, t: f64) -> f64 {
        match self {
            ExogenousSignal::Zero => 0.0,
            ExogenousSignal::Constant { value } => *value,
            ExogenousSignal::Sinusoid {
                amplitude,
                frequency,
                phase,
            } => amplitude * (frequency * t + phase).sin(),
            ExogenousSignal::PiecewiseConstant { table } => table
                .iter()
                .take_while(|(s, _)| *s <= t)
                .last()
                .map(|(_, v)| *v)
                .unwrap_or(0.0),
            ExogenousSignal::SeededUniformNoise { amplitude, seed } => {
                amplitude * uniform01(*seed, t)
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            ExogenousSignal::Zero => true,
            ExogenousSignal::Constant { value } => *value == 0.0,
            ExogenousSignal::Sinusoid { amplitude, .. }
            | ExogenousSignal::SeededUniformNoise { amplitude, .. } => *amplitude == 0.0,
            ExogenousSignal::PiecewiseConstant { table } => table.iter().all(|(_, v)| *v == 0.0),
        }
    }

    /// Replaces the signal's amplitude parameter; used by parameter sweeps.
    /// Fails for `zero`, which has no amplitude to scale.
    pub fn with_amplitude(&self, amplitude: f64) -> Result<Self> {
        match self {
            ExogenousSignal::Zero => Err(Error::invalid(
                "cannot set an amplitude on the zero signal; pick a parameterized kind",
            )),
            ExogenousSignal::Constant { .. } => Ok(ExogenousSignal::Constant { value: amplitude }),
            ExogenousSignal::Sinusoid {
                frequency, phase, ..
            } => Ok(ExogenousSignal::Sinusoid {
                amplitude,
                frequency: *frequency,
                phase: *phase,
            }),
            ExogenousSignal::PiecewiseConstant { table } => {
                let peak = table.iter().map(|(_, v)| v.abs()).fold(0.0, f64::max);
                if peak == 0.0 {
                    return Err(Error::invalid("cannot rescale an all-zero table"));
                }
                Ok(ExogenousSignal::PiecewiseConstant {
                    table: table
                        .iter()
                        .map(|(t, v)| (*t, v * amplitude / peak))
                        .collect(),
                })
            }
            ExogenousSignal::SeededUniformNoise { seed, .. } => {
                Ok(ExogenousSignal::SeededUniformNoise {
                    amplitude,
                    seed: *seed,
                })
            }
        }
    }

    /// Peak `|value|` the signal can attain, used by monitor bookkeeping.
    pub fn amplitude_bound(&self) -> f64 {
        match self {
            ExogenousSignal::Zero => 0.0,
            ExogenousSignal::Constant { value } => value.abs(),
            ExogenousSignal::Sinusoid { amplitude, .. } => amplitude.abs(),
            ExogenousSignal::PiecewiseConstant { table } => {
                table.iter().map(|(_, v)| v.abs()).fold(0.0, f64::max)
            }
            ExogenousSignal::SeededUniformNoise { amplitude, .. } => amplitude.abs(),
        }
    }
}

/// SplitMix64-style hash of `(seed, t)` mapped to `[0, 1)`.
fn uniform01(seed: u64, t: f64) -> f64 {
    let mut z = seed ^ t.to_bits().wrapping_mul(0x9e37_79b9_7f4a_7c15);
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^= z >> 31;
    // 53 high bits -> [0, 1).
    (z >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}
