//! Parameter-sweep harness and empirical studies: stability maps over the
//! sampling/holding/gain/depth axes, predictor convergence curves and
//! disturbance response.

use rayon::prelude::*;

use nalgebra::DVector;

use crate::controller::{
    check_design_conditions, synthesize_certificates, ConditionId, FeedbackGains,
};
use crate::error::{Error, Result};
use crate::plant::{catalog_get, CatalogPlant, StrictFeedbackPlant};
use crate::predictor::{delay_free_flow, estimate_k, predict, PredictorConfig};
use crate::signals::ZohSignal;
use crate::simulator::{
    decay_fit, run_closed_loop, sup_output, sup_state, PredictorSpec, SimConfig,
};

/// Tunable axis of a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepParam {
    T1,
    T2,
    Theta,
    PicardDepth,
    SubIntervals,
    DisturbanceAmplitude,
}

impl SweepParam {
    pub fn parse(name: &str) -> Result<Self> {
        match name {
            "t1" => Ok(SweepParam::T1),
            "t2" => Ok(SweepParam::T2),
            "theta" => Ok(SweepParam::Theta),
            "l" => Ok(SweepParam::PicardDepth),
            "m" => Ok(SweepParam::SubIntervals),
            "d-amplitude" | "d_amplitude" => Ok(SweepParam::DisturbanceAmplitude),
            other => Err(Error::Config(format!(
                "unknown sweep parameter {other:?}; expected one of t1, t2, theta, l, m, d-amplitude"
            ))),
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            SweepParam::T1 => "t1",
            SweepParam::T2 => "t2",
            SweepParam::Theta => "theta",
            SweepParam::PicardDepth => "l",
            SweepParam::SubIntervals => "m",
            SweepParam::DisturbanceAmplitude => "d-amplitude",
        }
    }

    fn apply(&self, cfg: &mut SimConfig, value: f64) -> Result<()> {
        match self {
            SweepParam::T1 => cfg.t1 = value,
            SweepParam::T2 => cfg.t2 = value,
            SweepParam::Theta => cfg.theta = value,
            SweepParam::PicardDepth | SweepParam::SubIntervals => {
                let iv = value.round() as usize;
                if iv == 0 || (value - iv as f64).abs() > 1e-9 {
                    return Err(Error::Config(format!(
                        "{} axis values must be positive integers, got {value}",
                        self.label()
                    )));
                }
                match cfg.predictor {
                    PredictorSpec::Approx {
                        ref mut picard_depth,
                        ref mut sub_intervals,
                        ..
                    } => {
                        if *self == SweepParam::PicardDepth {
                            *picard_depth = iv;
                        } else {
                            *sub_intervals = iv;
                        }
                    }
                    PredictorSpec::ExactLti => {
                        return Err(Error::Config(
                            "predictor axes do not apply to the exact LTI predictor".into(),
                        ))
                    }
                }
            }
            SweepParam::DisturbanceAmplitude => {
                cfg.d = cfg.d.with_amplitude(value)?;
            }
        }
        Ok(())
    }
}

/// Success test attached to each grid point. The default picks by scenario
/// kind: exponential decay for disturbance-free runs, a bounded-response
/// test (sup|x1| at most ten times the forcing amplitude over the trailing
/// window) for forced ones.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SuccessCriterion {
    /// Positive fitted decay rate with at least the given fit quality over
    /// the trailing fraction of the horizon.
    Decay { min_r_squared: f64 },
    /// `sup |x_1|` over the trailing window stays at or below the bound.
    Bound { sup_limit: f64 },
}

impl SuccessCriterion {
    pub fn default_for(cfg: &SimConfig) -> Self {
        if cfg.d.is_zero() {
            SuccessCriterion::Decay { min_r_squared: 0.9 }
        } else {
            SuccessCriterion::Bound {
                sup_limit: 10.0 * cfg.d.amplitude_bound(),
            }
        }
    }
}

/// Sweep description: base scenario, axes (cartesian product), success
/// criterion.
#[derive(Debug, Clone)]
pub struct SweepSpec {
    pub base: SimConfig,
    pub axes: Vec<(SweepParam, Vec<f64>)>,
    pub criterion: Option<SuccessCriterion>,
}

/// One evaluated grid point.
#[derive(Debug, Clone)]
pub struct SweepPoint {
    /// Axis values in spec order.
    pub coords: Vec<f64>,
    pub success: bool,
    pub decay_rate: f64,
    pub r_squared: f64,
    pub sup_state: f64,
    /// Margins of the five design inequalities, in report order; NaN when
    /// the condition checker is inapplicable at the point.
    pub condition_margins: [f64; 5],
}

#[derive(Debug, Clone)]
pub struct SweepResult {
    pub axes: Vec<SweepParam>,
    pub points: Vec<SweepPoint>,
}

/// Runs every grid point (in parallel) and attaches design-condition
/// margins evaluated with synthesized certificates. Divergent runs are
/// recorded as failures; they never abort the sweep.
pub fn run_sweep(spec: &SweepSpec) -> Result<SweepResult> {
    if spec.axes.is_empty() || spec.axes.iter().any(|(_, vals)| vals.is_empty()) {
        return Err(Error::Config("sweep axes must be non-empty".into()));
    }
    spec.base.validate()?;
    let criterion = spec
        .criterion
        .unwrap_or_else(|| SuccessCriterion::default_for(&spec.base));

    // Cartesian product in row-major axis order.
    let mut grid: Vec<Vec<f64>> = vec![Vec::new()];
    for (_, values) in &spec.axes {
        let mut next = Vec::with_capacity(grid.len() * values.len());
        for prefix in &grid {
            for &v in values {
                let mut point = prefix.clone();
                point.push(v);
                next.push(point);
            }
        }
        grid = next;
    }

    // Truncation constants per sub-interval count, computed up front so the
    // parallel phase stays deterministic.
    let plant = catalog_get(&spec.base.plant)?;
    let mut k_by_m: std::collections::BTreeMap<usize, f64> = std::collections::BTreeMap::new();
    if let (CatalogPlant::StrictFeedback(sf), PredictorSpec::Approx { sub_intervals, .. }) =
        (&plant, spec.base.predictor)
    {
        let mut m_values: Vec<usize> = vec![sub_intervals];
        for (param, values) in &spec.axes {
            if *param == SweepParam::SubIntervals {
                m_values.extend(values.iter().map(|v| v.round() as usize));
            }
        }
        m_values.sort_unstable();
        m_values.dedup();
        for m in m_values {
            if let Ok(cfg) = PredictorConfig::for_plant(sf, 1, m, 128) {
                if let Ok(est) = estimate_k(sf, &cfg, 16, 4, 1e-4, spec.base.seed) {
                    k_by_m.insert(m, est.k_hat);
                }
            }
        }
    }

    let points: Vec<SweepPoint> = grid
        .par_iter()
        .map(|coords| evaluate_point(spec, coords, criterion, &k_by_m))
        .collect();

    Ok(SweepResult {
        axes: spec.axes.iter().map(|(p, _)| *p).collect(),
        points,
    })
}

fn evaluate_point(
    spec: &SweepSpec,
    coords: &[f64],
    criterion: SuccessCriterion,
    k_by_m: &std::collections::BTreeMap<usize, f64>,
) -> SweepPoint {
    let mut cfg = spec.base.clone();
    for ((param, _), &value) in spec.axes.iter().zip(coords) {
        if let Err(e) = param.apply(&mut cfg, value) {
            return failed_point(coords, format!("axis error: {e}"));
        }
    }
    if let Err(e) = cfg.validate() {
        return failed_point(coords, format!("config error: {e}"));
    }

    let margins = condition_margins(&cfg, k_by_m);

    let trace = match run_closed_loop(&cfg) {
        Ok(trace) => trace,
        Err(Error::Divergence { .. }) => {
            return SweepPoint {
                coords: coords.to_vec(),
                success: false,
                decay_rate: f64::NAN,
                r_squared: f64::NAN,
                sup_state: f64::INFINITY,
                condition_margins: margins,
            }
        }
        Err(e) => return failed_point(coords, format!("run error: {e}")),
    };

    let (success, rate, r2) = match criterion {
        SuccessCriterion::Decay { min_r_squared } => {
            let window_start = cfg.t_end * 0.4;
            match decay_fit(&trace, window_start, cfg.t_end) {
                Ok((rate, r2)) => (rate > 0.0 && r2 >= min_r_squared, rate, r2),
                Err(_) => {
                    // All-zero tail: converged to the origin exactly.
                    (true, f64::INFINITY, 1.0)
                }
            }
        }
        SuccessCriterion::Bound { sup_limit } => {
            let window_start = cfg.t_end * 0.7;
            let sup = sup_output(&trace, window_start, cfg.t_end);
            (sup <= sup_limit, f64::NAN, f64::NAN)
        }
    };

    SweepPoint {
        coords: coords.to_vec(),
        success,
        decay_rate: rate,
        r_squared: r2,
        sup_state: sup_state(&trace),
        condition_margins: margins,
    }
}

fn failed_point(coords: &[f64], _why: String) -> SweepPoint {
    SweepPoint {
        coords: coords.to_vec(),
        success: false,
        decay_rate: f64::NAN,
        r_squared: f64::NAN,
        sup_state: f64::NAN,
        condition_margins: [f64::NAN; 5],
    }
}

fn condition_margins(cfg: &SimConfig, k_by_m: &std::collections::BTreeMap<usize, f64>) -> [f64; 5] {
    let plant = match catalog_get(&cfg.plant) {
        Ok(CatalogPlant::StrictFeedback(p)) => p,
        _ => return [f64::NAN; 5],
    };
    let (l, m, nq) = match cfg.predictor {
        PredictorSpec::Approx {
            picard_depth,
            sub_intervals,
            quadrature_nodes,
        } => (picard_depth, sub_intervals, quadrature_nodes),
        PredictorSpec::ExactLti => return [f64::NAN; 5],
    };
    let result = (|| -> Result<[f64; 5]> {
        let pcfg = PredictorConfig::for_plant(&plant, l, m, nq)?;
        let injection = DVector::from_column_slice(&cfg.injection);
        let gains = FeedbackGains::new(DVector::from_column_slice(&cfg.feedback))?;
        let cert = synthesize_certificates(&plant, &injection, &gains, 1.0, 1.0)?;
        // Conservative safety factor on the empirical constant.
        let k_hat = 2.0 * k_by_m.get(&m).copied().unwrap_or(1.0);
        let report = check_design_conditions(
            &plant, &injection, &gains, &cert, cfg.theta, cfg.t1, cfg.t2, &pcfg, k_hat,
        )?;
        let ids = [
            ConditionId::SamplingDiameter,
            ConditionId::HoldingPeriod,
            ConditionId::SamplingWithGain,
            ConditionId::GainFloor,
            ConditionId::HoldingWithPredictor,
        ];
        let mut margins = [f64::NAN; 5];
        for (slot, id) in margins.iter_mut().zip(ids) {
            *slot = report.get(id).map(|e| e.margin).unwrap_or(f64::NAN);
        }
        Ok(margins)
    })();
    result.unwrap_or([f64::NAN; 5])
}

/// Maximum predictor error against the RK4 reference per Picard depth, plus
/// the fitted geometric ratio of the error curve.
#[derive(Debug, Clone)]
pub struct ConvergenceCurve {
    pub max_error: Vec<(usize, f64)>,
    pub fitted_ratio: f64,
}

/// Sweeps the Picard depth over seeded random draws and reports the worst
/// error at each depth. The fitted ratio is the geometric slope of the
/// error curve; convergence demands it stay below the contraction factor
/// (plus slack).
pub fn predictor_convergence_study(
    plant: &StrictFeedbackPlant,
    sub_intervals: usize,
    depths: std::ops::RangeInclusive<usize>,
    trials: usize,
    seed: u64,
) -> Result<ConvergenceCurve> {
    use rand::{Rng, SeedableRng};

    let base = PredictorConfig::for_plant(plant, 1, sub_intervals, 1024)?;
    let n = plant.dim();
    let window = plant.total_delay();
    let depth_list: Vec<usize> = depths.collect();
    if depth_list.is_empty() || trials == 0 {
        return Err(Error::invalid("convergence study needs depths and trials"));
    }

    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let draws: Vec<(DVector<f64>, ZohSignal)> = (0..trials)
        .map(|_| {
            let x0 = DVector::from_fn(n, |_, _| rng.random_range(-5.0..5.0));
            let val: f64 = rng.random_range(-5.0..5.0);
            (x0, ZohSignal::constant(0.0, val))
        })
        .collect();

    let oracles: Vec<DVector<f64>> = draws
        .par_iter()
        .map(|(x0, u)| delay_free_flow(plant, x0, u, window, 1e-4).expect("valid draw"))
        .collect();

    let max_error: Vec<(usize, f64)> = depth_list
        .par_iter()
        .map(|&l| {
            let cfg = base.with_picard_depth(l);
            let worst = draws
                .iter()
                .zip(&oracles)
                .map(|((x0, u), oracle)| {
                    (predict(plant, &cfg, x0, u).expect("valid draw") - oracle).norm()
                })
                .fold(0.0, f64::max);
            (l, worst)
        })
        .collect();

    // Geometric fit: slope of ln(err) against depth.
    let pts: Vec<(f64, f64)> = max_error
        .iter()
        .filter(|(_, e)| *e > 0.0)
        .map(|(l, e)| (*l as f64, e.ln()))
        .collect();
    if pts.len() < 2 {
        return Err(Error::UndefinedFit);
    }
    let n_pts = pts.len() as f64;
    let mean_l = pts.iter().map(|(l, _)| l).sum::<f64>() / n_pts;
    let mean_e = pts.iter().map(|(_, e)| e).sum::<f64>() / n_pts;
    let sxx: f64 = pts.iter().map(|(l, _)| (l - mean_l).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|(l, e)| (l - mean_l) * (e - mean_e)).sum();
    let fitted_ratio = (sxy / sxx).exp();

    Ok(ConvergenceCurve {
        max_error,
        fitted_ratio,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signals::ExogenousSignal;
    use crate::simulator::{InitialHistory, InitialInput};

    fn base_cfg() -> SimConfig {
        SimConfig {
            plant: "example4".into(),
            injection: vec![-3.0, -3.0],
            theta: 1.0,
            feedback: vec![-15.0, -8.0],
            predictor: PredictorSpec::Approx {
                picard_depth: 1,
                sub_intervals: 2,
                quadrature_nodes: 256,
            },
            t1: 0.03,
            t2: 0.01,
            h: 1e-3,
            t_end: 6.0,
            x0: InitialHistory::Constant(vec![1.0, 1.0]),
            u0: InitialInput::Constant(-2.0),
            z0: vec![0.0, 0.0],
            w0: 0.0,
            d: ExogenousSignal::Zero,
            xi: ExogenousSignal::Zero,
            b: ExogenousSignal::Zero,
            monitors: false,
            seed: 42,
        }
    }

    #[test]
    fn empty_axes_rejected() {
        let spec = SweepSpec {
            base: base_cfg(),
            axes: vec![],
            criterion: None,
        };
        assert!(matches!(run_sweep(&spec), Err(Error::Config(_))));
        let spec = SweepSpec {
            base: base_cfg(),
            axes: vec![(SweepParam::T2, vec![])],
            criterion: None,
        };
        assert!(run_sweep(&spec).is_err());
    }

    #[test]
    fn sweep_param_parsing() {
        assert_eq!(SweepParam::parse("t1").unwrap(), SweepParam::T1);
        assert_eq!(SweepParam::parse("l").unwrap(), SweepParam::PicardDepth);
        assert_eq!(
            SweepParam::parse("d-amplitude").unwrap(),
            SweepParam::DisturbanceAmplitude
        );
        assert!(SweepParam::parse("bogus").is_err());
    }

    #[test]
    fn single_point_sweep_succeeds() {
        let spec = SweepSpec {
            base: base_cfg(),
            axes: vec![(SweepParam::T2, vec![0.01])],
            criterion: None,
        };
        let result = run_sweep(&spec).unwrap();
        assert_eq!(result.points.len(), 1);
        assert!(result.points[0].success, "{:?}", result.points[0]);
        assert!(result.points[0]
            .condition_margins
            .iter()
            .all(|m| m.is_finite()));
    }

    #[test]
    fn sweep_deterministic_and_grid_ordered() {
        let spec = SweepSpec {
            base: SimConfig {
                t_end: 2.0,
                ..base_cfg()
            },
            axes: vec![
                (SweepParam::Theta, vec![1.0, 2.0]),
                (SweepParam::T2, vec![0.01, 0.02]),
            ],
            criterion: Some(SuccessCriterion::Bound { sup_limit: 1e6 }),
        };
        let a = run_sweep(&spec).unwrap();
        let b = run_sweep(&spec).unwrap();
        assert_eq!(a.points.len(), 4);
        let coords: Vec<Vec<f64>> = a.points.iter().map(|p| p.coords.clone()).collect();
        assert_eq!(
            coords,
            vec![
                vec![1.0, 0.01],
                vec![1.0, 0.02],
                vec![2.0, 0.01],
                vec![2.0, 0.02]
            ]
        );
        for (pa, pb) in a.points.iter().zip(&b.points) {
            assert_eq!(pa.success, pb.success);
            assert!(
                pa.sup_state == pb.sup_state || (pa.sup_state.is_nan() && pb.sup_state.is_nan())
            );
        }
    }

    #[test]
    fn holding_period_failures_are_prefix_monotone() {
        // Once the holding period is too coarse the loop stays broken;
        // divergent points must be recorded, not fatal.
        let spec = SweepSpec {
            base: SimConfig {
                t_end: 15.0,
                h: 2.5e-3,
                ..base_cfg()
            },
            axes: vec![(SweepParam::T2, vec![0.01, 0.1, 0.5, 1.0])],
            criterion: None,
        };
        let result = run_sweep(&spec).unwrap();
        let flags: Vec<bool> = result.points.iter().map(|p| p.success).collect();
        assert!(
            flags[0],
            "nominal point must succeed: {:?}",
            result.points[0]
        );
        let mut seen_failure = false;
        for &ok in &flags {
            if !ok {
                seen_failure = true;
            }
            if seen_failure {
                assert!(!ok, "success flags are not prefix-monotone: {flags:?}");
            }
        }
    }

    #[test]
    fn convergence_study_on_linear_plant() {
        let plant = match catalog_get("linear2").unwrap() {
            CatalogPlant::StrictFeedback(p) => p,
            _ => unreachable!(),
        };
        let curve = predictor_convergence_study(&plant, 2, 1..=5, 20, 3).unwrap();
        let rho = (2.0 * plant.lipschitz() + 1.0) * 0.25;
        assert!(curve.fitted_ratio <= rho + 0.1);
        for w in curve.max_error.windows(2) {
            // Exact after the chain's nilpotency index; below the oracle
            // floor the comparison is vacuous.
            assert!(w[1].1 < w[0].1 || w[1].1 <= 1e-11);
        }
    }
}
