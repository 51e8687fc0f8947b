//! Deterministic hybrid closed-loop integration: fixed-step RK4 between
//! events, a merged event stream of measurement samples and input holds,
//! measurement generation from the interpolated delayed state, trace
//! recording and the runtime bound monitors.

use nalgebra::DVector;

use crate::controller::{lti_control_update, FeedbackGains};
use crate::error::{Error, Result};
use crate::linalg;
use crate::observer::{lti_observer_rhs, observer_energy_bound_rhs, ObserverGains, ObserverState};
use crate::plant::{
    catalog_get, lti_rhs, plant_rhs, CatalogPlant, DerivedConstants, StrictFeedbackPlant,
};
use crate::predictor::{lti_predict, phi, PredictorConfig};
use crate::signals::{ExogenousSignal, SamplingSchedule, StateHistory, ZohSignal};

/// How the controller predicts the future state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PredictorSpec {
    /// Chained successive approximations (strict-feedback plants).
    Approx {
        picard_depth: usize,
        sub_intervals: usize,
        quadrature_nodes: usize,
    },
    /// Exact matrix-exponential predictor (LTI plants only).
    ExactLti,
}

/// Initial state history on `[-r, 0]`.
#[derive(Debug, Clone, PartialEq)]
pub enum InitialHistory {
    /// Constant history (the usual benchmark setup).
    Constant(Vec<f64>),
    /// Explicit Hermite nodes `(t, x, dx)` covering `[-r, 0]`. Piecewise-
    /// smooth data is accepted; interpolation order degrades at corners.
    Nodes(Vec<(f64, Vec<f64>, Vec<f64>)>),
}

impl InitialHistory {
    fn build(&self, n: usize, r: f64) -> Result<StateHistory> {
        let mut h = StateHistory::new();
        match self {
            InitialHistory::Constant(v) => {
                if v.len() != n {
                    return Err(Error::Config(format!(
                        "initial state history has dimension {}, plant needs {n}",
                        v.len()
                    )));
                }
                let x = DVector::from_column_slice(v);
                if r > 0.0 {
                    h.push(-r, x.clone(), DVector::zeros(n))?;
                }
                h.push(0.0, x, DVector::zeros(n))?;
            }
            InitialHistory::Nodes(nodes) => {
                for (t, x, dx) in nodes {
                    if x.len() != n || dx.len() != n {
                        return Err(Error::Config(
                            "initial history node dimension mismatch".into(),
                        ));
                    }
                    h.push(
                        *t,
                        DVector::from_column_slice(x),
                        DVector::from_column_slice(dx),
                    )?;
                }
                let (start, end) = (h.start().unwrap_or(0.0), h.end().unwrap_or(-1.0));
                if start > -r || end != 0.0 {
                    return Err(Error::Config(format!(
                        "initial history must cover [-{r}, 0]; got [{start}, {end}]"
                    )));
                }
            }
        }
        Ok(h)
    }
}

/// Initial input record on `[-r-tau, 0)`.
#[derive(Debug, Clone, PartialEq)]
pub enum InitialInput {
    Constant(f64),
    /// Explicit ZOH segments with starts in `[-r-tau, 0)`.
    Segments(Vec<(f64, f64)>),
}

impl InitialInput {
    fn build(&self, window: f64) -> Result<ZohSignal> {
        match self {
            InitialInput::Constant(v) => Ok(ZohSignal::constant(-window, *v)),
            InitialInput::Segments(segments) => {
                let u = ZohSignal::new(segments)
                    .map_err(|e| Error::Config(format!("initial input: {e}")))?;
                if u.domain_start() > -window {
                    return Err(Error::Config(format!(
                        "initial input must cover [-{window}, 0); starts at {}",
                        u.domain_start()
                    )));
                }
                if segments.last().map(|s| s.0) >= Some(0.0) {
                    return Err(Error::Config(
                        "initial input breakpoints must precede t = 0".into(),
                    ));
                }
                Ok(u)
            }
        }
    }
}

/// Full closed-loop scenario description. Everything a run needs is here;
/// two runs from equal configurations produce bit-identical traces.
#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    /// Catalog plant id.
    pub plant: String,
    /// Observer injection gains `p`.
    pub injection: Vec<f64>,
    /// High-gain parameter `theta >= 1`.
    pub theta: f64,
    /// Nominal feedback gains `k`.
    pub feedback: Vec<f64>,
    pub predictor: PredictorSpec,
    /// Upper diameter of the sampling partition.
    pub t1: f64,
    /// Holding period of the zero-order hold.
    pub t2: f64,
    /// Integrator step.
    pub h: f64,
    pub t_end: f64,
    pub x0: InitialHistory,
    pub u0: InitialInput,
    pub z0: Vec<f64>,
    pub w0: f64,
    /// Scalar disturbance, broadcast to every channel through the plant's
    /// disturbance gains.
    pub d: ExogenousSignal,
    /// Measurement error added at sampling times.
    pub xi: ExogenousSignal,
    /// Sampling-schedule perturbation (non-negative).
    pub b: ExogenousSignal,
    pub monitors: bool,
    pub seed: u64,
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.t1 > 0.0) || !(self.t2 > 0.0) {
            return Err(Error::Config("T1 and T2 must be positive".into()));
        }
        if !(self.h > 0.0) {
            return Err(Error::Config("integrator step h must be positive".into()));
        }
        if self.h > self.t1.min(self.t2) / 4.0 {
            return Err(Error::Config(format!(
                "integrator step h = {} must not exceed min(T1, T2)/4 = {}",
                self.h,
                self.t1.min(self.t2) / 4.0
            )));
        }
        if !(self.t_end > 0.0) {
            return Err(Error::Config("t_end must be positive".into()));
        }
        if !(self.theta >= 1.0) {
            return Err(Error::Config("theta must be >= 1".into()));
        }
        Ok(())
    }
}

/// One recorded integration step.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceRow {
    pub t: f64,
    pub x: DVector<f64>,
    pub z: DVector<f64>,
    pub w: f64,
    /// Input currently applied by the hold, `u(t)`.
    pub u: f64,
    /// Input reaching the plant, `u(t - tau)`.
    pub u_delayed: f64,
    /// Most recent measurement (NaN before the first sample).
    pub y: f64,
    pub d: f64,
    /// Most recent measurement error (NaN before the first sample).
    pub xi: f64,
}

/// Dispatching view over the prescribed pre-history and the recorded run.
#[derive(Debug, Clone, Default)]
pub struct PlantHistory {
    pub pre: StateHistory,
    pub run: StateHistory,
}

impl PlantHistory {
    pub fn sample(&self, t: f64) -> Result<DVector<f64>> {
        match self.run.start() {
            Some(start) if t >= start => self.run.sample(t),
            _ => self.pre.sample(t),
        }
    }

    /// Largest node norm over `[a, b]` across both records.
    pub fn sup_norm(&self, a: f64, b: f64) -> f64 {
        self.pre.sup_norm(a, b).max(self.run.sup_norm(a, b))
    }
}

/// Delayed output measurement: the first output component of the state
/// interpolated at `t_sample - r`, plus the measurement error.
pub fn measure(history: &PlantHistory, t_sample: f64, r: f64, xi_val: f64) -> Result<f64> {
    Ok(history.sample(t_sample - r)?[0] + xi_val)
}

/// Complete record of a closed-loop run.
#[derive(Debug, Clone)]
pub struct SimTrace {
    pub rows: Vec<TraceRow>,
    pub history: PlantHistory,
    /// Exact input record from `-r-tau` through the end of the run.
    pub u_record: ZohSignal,
    /// First hold index at or past `r + T1`; the theory's estimates only
    /// speak after this point.
    pub jbar: u64,
    pub n: usize,
    pub cfg: SimConfig,
}

impl SimTrace {
    pub fn state_at(&self, t: f64) -> Result<DVector<f64>> {
        self.history.sample(t)
    }

    pub fn final_row(&self) -> &TraceRow {
        self.rows.last().expect("a trace always has the t = 0 row")
    }
}

struct EventClocks {
    schedule: SamplingSchedule,
    next_sample: f64,
    next_hold_index: u64,
    t2: f64,
}

impl EventClocks {
    fn next_hold(&self) -> f64 {
        self.next_hold_index as f64 * self.t2
    }
}

/// Runs the closed loop described by `cfg`. Strict-feedback plants pair
/// with the successive-approximation predictor, LTI plants with the exact
/// one. Divergence (state norm beyond 1e12) aborts with the partial trace.
pub fn run_closed_loop(cfg: &SimConfig) -> Result<SimTrace> {
    cfg.validate()?;
    let plant = catalog_get(&cfg.plant)?;
    match (&plant, cfg.predictor) {
        (CatalogPlant::StrictFeedback(p), PredictorSpec::Approx { .. }) => {
            run_strict_feedback(cfg, p)
        }
        (CatalogPlant::Lti(p), PredictorSpec::ExactLti) => run_lti(cfg, p),
        (CatalogPlant::StrictFeedback(_), PredictorSpec::ExactLti) => Err(Error::Config(
            "the exact predictor applies to LTI plants only".into(),
        )),
        (CatalogPlant::Lti(_), PredictorSpec::Approx { .. }) => Err(Error::Config(
            "the successive-approximation predictor needs a strict-feedback plant; \
             use the exact predictor for LTI catalog entries"
                .into(),
        )),
    }
}

fn run_strict_feedback(cfg: &SimConfig, plant: &StrictFeedbackPlant) -> Result<SimTrace> {
    let n = plant.dim();
    let (l, m, nq) = match cfg.predictor {
        PredictorSpec::Approx {
            picard_depth,
            sub_intervals,
            quadrature_nodes,
        } => (picard_depth, sub_intervals, quadrature_nodes),
        PredictorSpec::ExactLti => unreachable!("dispatched above"),
    };
    let pcfg = PredictorConfig::for_plant(plant, l, m, nq)?;
    let gains = ObserverGains::new(DVector::from_column_slice(&cfg.injection), cfg.theta)?;
    let feedback = FeedbackGains::new(DVector::from_column_slice(&cfg.feedback))?;
    if gains.dim() != n || feedback.dim() != n || cfg.z0.len() != n {
        return Err(Error::Config(
            "gain/state dimensions must match the plant".into(),
        ));
    }

    let d_sig = cfg.d.clone();
    let plant_for_rhs = plant.clone();
    let plant_rhs_fn = move |t: f64, x: &DVector<f64>, u_delayed: f64| {
        let d = DVector::from_element(plant_for_rhs.dim(), d_sig.eval(t));
        plant_rhs(&plant_for_rhs, x, u_delayed, &d)
    };
    let plant_for_obs = plant.clone();
    let gains_obs = gains.clone();
    let observer_rhs_fn = move |z: &DVector<f64>, w: f64, u_lagged: f64| {
        let state = ObserverState { z: z.clone(), w };
        crate::observer::observer_rhs(&plant_for_obs, &gains_obs, &state, u_lagged)
    };
    let plant_for_ctrl = plant.clone();
    let control_fn = move |z: &DVector<f64>, u_record: &ZohSignal, t: f64| {
        let predicted = phi(&plant_for_ctrl, &pcfg, z, u_record, t)?;
        Ok(feedback.k().dot(&predicted))
    };
    let output_fn = |x: &DVector<f64>| x[0];

    drive_loop(
        cfg,
        n,
        plant.measurement_delay(),
        plant.input_delay(),
        plant_rhs_fn,
        observer_rhs_fn,
        control_fn,
        output_fn,
    )
}

fn run_lti(cfg: &SimConfig, plant: &crate::plant::LtiPlant) -> Result<SimTrace> {
    let n = plant.dim();
    if cfg.injection.len() != n || cfg.feedback.len() != n || cfg.z0.len() != n {
        return Err(Error::Config(
            "gain/state dimensions must match the plant".into(),
        ));
    }
    let p = DVector::from_column_slice(&cfg.injection);
    let k = DVector::from_column_slice(&cfg.feedback);
    // Hurwitz requirements on the actual system matrices.
    let obs_mat = &plant.a + &p * plant.c.transpose();
    let report = linalg::check_hurwitz(&obs_mat)?;
    if !report.is_hurwitz {
        return Err(Error::NotHurwitz {
            abscissa: report.spectral_abscissa,
        });
    }
    let fb_mat = &plant.a + &plant.b * k.transpose();
    let report = linalg::check_hurwitz(&fb_mat)?;
    if !report.is_hurwitz {
        return Err(Error::NotHurwitz {
            abscissa: report.spectral_abscissa,
        });
    }

    let d_sig = cfg.d.clone();
    let plant_for_rhs = plant.clone();
    let plant_rhs_fn = move |t: f64, x: &DVector<f64>, u_delayed: f64| {
        let d = DVector::from_element(plant_for_rhs.dim(), d_sig.eval(t));
        lti_rhs(&plant_for_rhs, x, u_delayed, &d)
    };
    let plant_for_obs = plant.clone();
    let p_obs = p.clone();
    let observer_rhs_fn = move |z: &DVector<f64>, w: f64, u_lagged: f64| {
        let state = ObserverState { z: z.clone(), w };
        lti_observer_rhs(&plant_for_obs, &p_obs, &state, u_lagged)
    };
    let plant_for_ctrl = plant.clone();
    // Bypasses the companion-form check: the pair was verified against the
    // actual (A, B) above.
    let feedback = FeedbackGains::new_unchecked(k);
    let control_fn = move |z: &DVector<f64>, u_record: &ZohSignal, t: f64| {
        lti_control_update(&feedback, &plant_for_ctrl, z, u_record, t)
    };
    let c = plant.c.clone();
    let output_fn = move |x: &DVector<f64>| c.dot(x);

    drive_loop(
        cfg,
        n,
        plant.measurement_delay,
        plant.input_delay,
        plant_rhs_fn,
        observer_rhs_fn,
        control_fn,
        output_fn,
    )
}

#[allow(clippy::too_many_arguments)]
fn drive_loop<RP, RO, CU, OM>(
    cfg: &SimConfig,
    n: usize,
    r: f64,
    tau: f64,
    plant_rhs_fn: RP,
    observer_rhs_fn: RO,
    control_fn: CU,
    output_fn: OM,
) -> Result<SimTrace>
where
    RP: Fn(f64, &DVector<f64>, f64) -> Result<DVector<f64>>,
    RO: Fn(&DVector<f64>, f64, f64) -> Result<(DVector<f64>, f64)>,
    CU: Fn(&DVector<f64>, &ZohSignal, f64) -> Result<f64>,
    OM: Fn(&DVector<f64>) -> f64,
{
    const DIVERGENCE_GUARD: f64 = 1e12;
    let window = r + tau;

    let pre = cfg.x0.build(n, r)?;
    let mut u_record = cfg.u0.build(window)?;
    let mut history = PlantHistory {
        pre,
        run: StateHistory::with_capacity((cfg.t_end / cfg.h) as usize + 16),
    };

    let mut x = history
        .pre
        .sample(0.0)
        .map_err(|_| Error::Config("initial state history does not reach t = 0".into()))?;
    let mut z = DVector::from_column_slice(&cfg.z0);
    let mut w = cfg.w0;

    let mut clocks = EventClocks {
        schedule: SamplingSchedule::new(cfg.t1, cfg.b.clone())?,
        next_sample: 0.0,
        next_hold_index: 0,
        t2: cfg.t2,
    };
    // The clock at tau_0 = 0 takes no measurement; jumps start at tau_1.
    clocks.next_sample = clocks.schedule.advance()?;

    // Step boundaries where a delayed input breakpoint crosses the plant or
    // observer channel; keeping RK4 steps off these kinks preserves the
    // integrator's order. Each entry carries the held value that applies
    // after the crossing.
    let mut plant_kinks: std::collections::VecDeque<(f64, f64)> = std::collections::VecDeque::new();
    let mut obs_kinks: std::collections::VecDeque<f64> = std::collections::VecDeque::new();
    for (s, v) in u_record.segments() {
        if s + tau > 0.0 {
            plant_kinks.push_back((s + tau, v));
        }
        if s + window > 0.0 {
            obs_kinks.push_back(s + window);
        }
    }

    let mut rows: Vec<TraceRow> = Vec::with_capacity((cfg.t_end / cfg.h) as usize + 16);
    let mut y_latest = f64::NAN;
    let mut xi_latest = f64::NAN;

    let mut t = 0.0f64;

    // First hold fires at t = 0 from the initial data.
    let u_new = control_fn(&z, &u_record, 0.0)?;
    u_record.push(0.0, u_new)?;
    if tau > 0.0 {
        plant_kinks.push_back((tau, u_new));
    }
    obs_kinks.push_back(window);
    clocks.next_hold_index = 1;

    let dx0 = plant_rhs_fn(0.0, &x, u_record.eval(-tau)?)?;
    history.run.push(0.0, x.clone(), dx0)?;
    rows.push(TraceRow {
        t: 0.0,
        x: x.clone(),
        z: z.clone(),
        w,
        u: u_record.eval(0.0)?,
        u_delayed: u_record.eval(-tau)?,
        y: y_latest,
        d: cfg.d.eval(0.0),
        xi: xi_latest,
    });

    while t < cfg.t_end {
        let mut t_stop = (t + cfg.h).min(cfg.t_end);
        t_stop = t_stop.min(clocks.next_sample).min(clocks.next_hold());
        if let Some(&(kink, _)) = plant_kinks.front() {
            if kink > t {
                t_stop = t_stop.min(kink);
            }
        }
        if let Some(&kink) = obs_kinks.front() {
            if kink > t {
                t_stop = t_stop.min(kink);
            }
        }

        if t_stop > t {
            // Held input values are constant over the whole step; reading
            // them at the midpoint keeps a breakpoint within rounding
            // distance of a step edge from flipping the value.
            let step = t_stop - t;
            let t_mid = t + 0.5 * step;
            let u_p = u_record.eval(t_mid - tau)?;
            let u_o = u_record.eval(t_mid - window)?;
            let eval = |s: f64, xs: &DVector<f64>, zs: &DVector<f64>, ws: f64| -> Result<_> {
                let dx = plant_rhs_fn(s, xs, u_p)?;
                let (dz, dw) = observer_rhs_fn(zs, ws, u_o)?;
                Ok((dx, dz, dw))
            };
            let k1 = eval(t, &x, &z, w)?;
            let half = 0.5 * step;
            let k2 = eval(
                t + half,
                &(&x + &k1.0 * half),
                &(&z + &k1.1 * half),
                w + k1.2 * half,
            )?;
            let k3 = eval(
                t + half,
                &(&x + &k2.0 * half),
                &(&z + &k2.1 * half),
                w + k2.2 * half,
            )?;
            let k4 = eval(
                t + step,
                &(&x + &k3.0 * step),
                &(&z + &k3.1 * step),
                w + k3.2 * step,
            )?;
            let sixth = step / 6.0;
            x += (&k1.0 + &k2.0 * 2.0 + &k3.0 * 2.0 + &k4.0) * sixth;
            z += (&k1.1 + &k2.1 * 2.0 + &k3.1 * 2.0 + &k4.1) * sixth;
            w += (k1.2 + 2.0 * k2.2 + 2.0 * k3.2 + k4.2) * sixth;
            t = t_stop;

            // Arrival derivative under the step's held input.
            let dx = plant_rhs_fn(t, &x, u_p)?;
            history.run.push(t, x.clone(), dx)?;
        }

        // A delayed breakpoint landing exactly here makes the node a corner:
        // record the outgoing derivative under the value that applies next.
        let mut crossed_value: Option<f64> = None;
        while let Some(&(k, v)) = plant_kinks.front() {
            if k > t {
                break;
            }
            crossed_value = Some(v);
            plant_kinks.pop_front();
        }
        if let Some(v) = crossed_value {
            if !history.run.is_empty() {
                let dx_out = plant_rhs_fn(t, &x, v)?;
                history.run.set_outgoing(dx_out)?;
            }
        }
        while obs_kinks.front().is_some_and(|&k| k <= t) {
            obs_kinks.pop_front();
        }

        // Samples before holds at coincident times: the controller sees the
        // freshest measurement.
        if clocks.next_sample == t {
            let xi_val = cfg.xi.eval(t);
            let y = output_fn(&history.sample(t - r)?) + xi_val;
            w = y;
            y_latest = y;
            xi_latest = xi_val;
            clocks.next_sample = clocks.schedule.advance()?;
        }
        if clocks.next_hold() == t {
            let u_new = control_fn(&z, &u_record, t)?;
            u_record.push(t, u_new)?;
            if tau > 0.0 {
                plant_kinks.push_back((t + tau, u_new));
            } else if !history.run.is_empty() {
                // Immediate actuation: the new hold kinks the trajectory at
                // this very node.
                let dx_out = plant_rhs_fn(t, &x, u_new)?;
                history.run.set_outgoing(dx_out)?;
            }
            obs_kinks.push_back(t + window);
            clocks.next_hold_index += 1;
        }

        rows.push(TraceRow {
            t,
            x: x.clone(),
            z: z.clone(),
            w,
            u: u_record.eval(t)?,
            u_delayed: u_record.eval(t - tau)?,
            y: y_latest,
            d: cfg.d.eval(t),
            xi: xi_latest,
        });

        let magnitude = x.amax().max(z.amax()).max(w.abs());
        if !magnitude.is_finite() || magnitude > DIVERGENCE_GUARD {
            let jbar = jbar_index(r, cfg.t1, cfg.t2);
            return Err(Error::Divergence {
                t,
                trace: Box::new(SimTrace {
                    rows,
                    history,
                    u_record,
                    jbar,
                    n,
                    cfg: cfg.clone(),
                }),
            });
        }
    }

    Ok(SimTrace {
        rows,
        history,
        u_record,
        jbar: jbar_index(r, cfg.t1, cfg.t2),
        n,
        cfg: cfg.clone(),
    })
}

/// Smallest hold index `j` with `j T2 >= r + T1`.
fn jbar_index(r: f64, t1: f64, t2: f64) -> u64 {
    let mut j = ((r + t1) / t2).ceil() as u64;
    while j > 0 && (j - 1) as f64 * t2 >= r + t1 {
        j -= 1;
    }
    while (j as f64) * t2 < r + t1 {
        j += 1;
    }
    j
}

/// Per-bound minima of the normalized monitor margins, plus the per-row
/// margin series in trace order.
#[derive(Debug, Clone)]
pub struct MonitorReport {
    /// Forward-completeness envelope margin.
    pub forward_bound_min: f64,
    /// Predictor growth bound margin (evaluated at hold events).
    pub growth_bound_min: f64,
    /// Hybrid observer energy bound margin.
    pub observer_bound_min: f64,
    /// Existence (per-hold compounding) bound margin.
    pub existence_bound_min: f64,
    /// Rows of `[m24, m214, m223, m224]` aligned with the trace rows.
    pub per_row: Vec<[f64; 4]>,
}

impl MonitorReport {
    pub fn minima(&self) -> [f64; 4] {
        [
            self.forward_bound_min,
            self.growth_bound_min,
            self.observer_bound_min,
            self.existence_bound_min,
        ]
    }
}

/// Normalized margin `(rhs - lhs) / max(1, rhs)` computed from `ln(rhs)`,
/// so bounds that compound per hold period never overflow.
fn normalized_margin(ln_rhs: f64, lhs: f64) -> f64 {
    if ln_rhs <= 0.0 {
        ln_rhs.exp() - lhs
    } else if ln_rhs < 700.0 {
        let rhs = ln_rhs.exp();
        (rhs - lhs) / rhs
    } else if lhs <= 0.0 {
        1.0
    } else {
        1.0 - (lhs.ln() - ln_rhs).exp()
    }
}

/// Evaluates the four theorem-backed bounds along a finished run and
/// returns the minimum normalized margin of each; a minimum at or above
/// `-1e-6` means the bound held to integrator-and-interpolation tolerance.
pub fn run_monitors(trace: &SimTrace, constants: &DerivedConstants) -> Result<MonitorReport> {
    let cfg = &trace.cfg;
    let plant = catalog_get(&cfg.plant)?;
    let (lipschitz, gain_bound) = match &plant {
        CatalogPlant::StrictFeedback(p) => (p.lipschitz(), p.gain_bound()),
        CatalogPlant::Lti(p) => (0.0, p.gain_bound()),
    };
    let n = trace.n as f64;
    let r = plant.measurement_delay();
    let tau = plant.input_delay();
    let window = r + tau;
    let rate = (n + 1.0) * lipschitz + 3.0;

    // Predictor evaluation for the growth-bound monitor.
    let predict_at = |z: &DVector<f64>, t: f64| -> Result<DVector<f64>> {
        match (&plant, cfg.predictor) {
            (
                CatalogPlant::StrictFeedback(p),
                PredictorSpec::Approx {
                    picard_depth,
                    sub_intervals,
                    quadrature_nodes,
                },
            ) => {
                let pcfg =
                    PredictorConfig::for_plant(p, picard_depth, sub_intervals, quadrature_nodes)?;
                phi(p, &pcfg, z, &trace.u_record, t)
            }
            (CatalogPlant::Lti(p), PredictorSpec::ExactLti) => {
                lti_predict(p, z, &trace.u_record, t)
            }
            _ => Err(Error::Config(
                "trace predictor spec does not match the plant".into(),
            )),
        }
    };

    let x0_norm = trace.rows.first().map(|row| row.x.norm()).unwrap_or(0.0);
    let z0 = DVector::from_column_slice(&cfg.z0);
    let z0_norm = z0.norm();
    let pre_sup_x = trace.history.pre.sup_norm(-r, 0.0);
    let u0_sup = trace.u_record.sup_abs(-window, 0.0)?;
    let existence_xi = |sup_xi: f64, sup_d: f64| {
        z0_norm + cfg.w0.abs() + pre_sup_x + u0_sup + sup_xi + gain_bound * sup_d
    };

    let mut per_row = Vec::with_capacity(trace.rows.len());
    let mut mins = [f64::INFINITY; 4];
    let mut sup_d = 0.0f64;
    let mut sup_xi = 0.0f64;
    let mut sup_b = 0.0f64;
    let mut sup_zw = 0.0f64;
    let mut sup_x_run = 0.0f64;
    let mut sup_x_delayed = 0.0f64;
    let mut delayed_idx = 0usize;
    let mut latest_growth_margin = f64::INFINITY;
    let mut next_hold = 0u64;

    for row in &trace.rows {
        let t = row.t;
        sup_d = sup_d.max(row.d.abs());
        sup_xi = sup_xi.max(cfg.xi.eval(t).abs());
        sup_b = sup_b.max(cfg.b.eval(t).abs());
        sup_zw = sup_zw.max(row.z.norm() + row.w.abs());
        sup_x_run = sup_x_run.max(row.x.norm());

        // Running sup of |x(s - r)| for s <= t.
        while delayed_idx < trace.rows.len() && trace.rows[delayed_idx].t <= t - r {
            sup_x_delayed = sup_x_delayed.max(trace.rows[delayed_idx].x.norm());
            delayed_idx += 1;
        }
        let x_delayed_now = trace.history.sample(t - r)?.norm();
        let pre_part = trace.history.pre.sup_norm(-r, (t - r).min(0.0));
        let sup_x_del_t = sup_x_delayed.max(x_delayed_now).max(pre_part);

        // Forward-completeness envelope.
        let sup_u_fwd = trace.u_record.sup_abs(-tau, t - tau)?;
        let coef = x0_norm + (gain_bound * sup_d + sup_u_fwd) / rate.sqrt();
        let ln_rhs_fwd = if coef > 0.0 {
            coef.ln() + rate * t / 2.0
        } else {
            f64::NEG_INFINITY
        };
        let m24 = normalized_margin(ln_rhs_fwd, row.x.norm());

        // Predictor growth bound, refreshed at each hold event.
        if (next_hold as f64) * cfg.t2 == t {
            let predicted = predict_at(&row.z, t)?;
            let sup_u_window = trace.u_record.sup_abs(t - window, t)?;
            let rhs = constants.growth * (row.z.norm() + sup_u_window);
            latest_growth_margin = normalized_margin(
                if rhs > 0.0 {
                    rhs.ln()
                } else {
                    f64::NEG_INFINITY
                },
                predicted.norm(),
            );
            next_hold += 1;
        }
        let m214 = latest_growth_margin;

        // Hybrid observer energy bound.
        let sup_u_lag = trace.u_record.sup_abs(-window, t - window)?;
        let energy_rhs = observer_energy_bound_rhs(
            constants,
            z0_norm,
            cfg.w0,
            sup_u_lag,
            sup_x_del_t,
            sup_xi,
            sup_b,
            cfg.t1,
        );
        let energy_lhs =
            (-2.0 * constants.omega * t).exp() * (row.z.norm_squared() + row.w * row.w);
        let m223 = normalized_margin(
            if energy_rhs > 0.0 {
                energy_rhs.ln()
            } else {
                f64::NEG_INFINITY
            },
            energy_lhs,
        );

        // Existence bound, compounding once per hold period; evaluated in
        // log space because the base is raised to t / T2.
        let xi_big = existence_xi(sup_xi, sup_d);
        let denom = 1.0 - (-2.0 * constants.omega * cfg.t1 * (-sup_b).exp()).exp();
        let ln_base =
            (7.0 * (1.0 + constants.growth)).ln() + constants.beta * cfg.t2 - 0.5 * denom.ln();
        let g_count = (t / cfg.t2).ceil();
        let ln_rhs_exist = if xi_big > 0.0 {
            g_count * ln_base + xi_big.ln()
        } else {
            f64::NEG_INFINITY
        };
        let lhs_exist = sup_zw
            + trace.history.pre.sup_norm(-r, 0.0).max(sup_x_run)
            + trace.u_record.sup_abs(-window, t)?;
        let m224 = normalized_margin(ln_rhs_exist, lhs_exist);

        let margins = [m24, m214, m223, m224];
        for (slot, m) in mins.iter_mut().zip(margins) {
            *slot = slot.min(m);
        }
        per_row.push(margins);
    }

    Ok(MonitorReport {
        forward_bound_min: mins[0],
        growth_bound_min: mins[1],
        observer_bound_min: mins[2],
        existence_bound_min: mins[3],
        per_row,
    })
}

/// Least-squares exponential fit of strictly positive samples `(t, v)`:
/// returns `(rate, r_squared)` for the model `v ~ C exp(-rate t)`.
pub fn fit_exponential_decay(samples: &[(f64, f64)]) -> Result<(f64, f64)> {
    let pts: Vec<(f64, f64)> = samples
        .iter()
        .filter(|(_, v)| *v > 0.0)
        .map(|(t, v)| (*t, v.ln()))
        .collect();
    if pts.len() < 2 {
        return Err(Error::UndefinedFit);
    }
    let n = pts.len() as f64;
    let mean_t = pts.iter().map(|(t, _)| t).sum::<f64>() / n;
    let mean_y = pts.iter().map(|(_, y)| y).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|(t, _)| (t - mean_t).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::UndefinedFit);
    }
    let sxy: f64 = pts.iter().map(|(t, y)| (t - mean_t) * (y - mean_y)).sum();
    let slope = sxy / sxx;
    let ss_tot: f64 = pts.iter().map(|(_, y)| (y - mean_y).powi(2)).sum();
    let ss_res: f64 = pts
        .iter()
        .map(|(t, y)| (y - (mean_y + slope * (t - mean_t))).powi(2))
        .sum();
    let r_squared = if ss_tot > 0.0 {
        1.0 - ss_res / ss_tot
    } else {
        // A perfectly flat series is fit exactly by a zero slope.
        1.0
    };
    Ok((-slope, r_squared))
}

/// Exponential decay fit of `|x(t)| + |z(t) - x(t - r)|` over a trace
/// window. A positive rate with good fit quality is the empirical
/// convergence certificate.
pub fn decay_fit(trace: &SimTrace, t_start: f64, t_end: f64) -> Result<(f64, f64)> {
    let r = catalog_get(&trace.cfg.plant)?.measurement_delay();
    let mut samples = Vec::new();
    for row in &trace.rows {
        if row.t < t_start || row.t > t_end {
            continue;
        }
        let x_del = trace.history.sample(row.t - r)?;
        samples.push((row.t, row.x.norm() + (&row.z - x_del).norm()));
    }
    fit_exponential_decay(&samples)
}

/// Largest `|x_1|` over trace rows in `[t_start, t_end]`.
pub fn sup_output(trace: &SimTrace, t_start: f64, t_end: f64) -> f64 {
    trace
        .rows
        .iter()
        .filter(|row| row.t >= t_start && row.t <= t_end)
        .map(|row| row.x[0].abs())
        .fold(0.0, f64::max)
}

/// Largest state norm over the whole run.
pub fn sup_state(trace: &SimTrace) -> f64 {
    trace
        .rows
        .iter()
        .map(|row| row.x.norm())
        .fold(0.0, f64::max)
}
