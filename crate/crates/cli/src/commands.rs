//! Subcommand implementations. Each returns a process exit code:
//! 0 success, 2 configuration or usage error, 3 condition failure (strict
//! mode) or contraction violation, 4 divergence.

use std::path::{Path, PathBuf};

use nalgebra::DVector;
use predictorlab::{
    catalog_get, check_design_conditions, check_nonlinear_lyapunov, decay_fit, derived_constants,
    estimate_k, lti_predict, phi, run_closed_loop, run_monitors, run_sweep,
    synthesize_certificates, CatalogPlant, DerivedConstants, Error, FeedbackGains, PredictorConfig,
    PredictorSpec, Result, SimConfig, SimTrace, ZohSignal,
};

use crate::config::{ScenarioFile, SweepFile};
use crate::output;

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_CONDITION: i32 = 3;
pub const EXIT_DIVERGENCE: i32 = 4;

fn exit_code_for(err: &Error) -> i32 {
    match err {
        Error::ContractionViolated { .. } => EXIT_CONDITION,
        Error::Divergence { .. } => EXIT_DIVERGENCE,
        _ => EXIT_CONFIG,
    }
}

fn report_error(err: &Error) -> i32 {
    eprintln!("error: {err}");
    exit_code_for(err)
}

/// Overrides applied on top of the scenario file.
#[derive(Debug, Clone, Copy, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub h: Option<f64>,
    pub t_end: Option<f64>,
}

impl Overrides {
    fn apply(&self, cfg: &mut SimConfig) {
        if let Some(seed) = self.seed {
            cfg.seed = seed;
        }
        if let Some(h) = self.h {
            cfg.h = h;
        }
        if let Some(t_end) = self.t_end {
            cfg.t_end = t_end;
        }
    }
}

fn load_config(path: &Path, overrides: Overrides) -> Result<(ScenarioFile, SimConfig)> {
    let file = ScenarioFile::load(path)?;
    let mut cfg = file.to_sim_config()?;
    overrides.apply(&mut cfg);
    cfg.validate()?;
    Ok((file, cfg))
}

/// Truncation constant for monitors and condition checks: the configured
/// value if present, otherwise a seeded empirical estimate.
fn resolve_k_hat(file: &ScenarioFile, cfg: &SimConfig) -> Result<f64> {
    if let Some(k) = file.monitors.k_hat {
        return Ok(k);
    }
    match (catalog_get(&cfg.plant)?, cfg.predictor) {
        (CatalogPlant::StrictFeedback(plant), PredictorSpec::Approx { sub_intervals, .. }) => {
            let pcfg = PredictorConfig::for_plant(&plant, 1, sub_intervals, 128)?;
            Ok(estimate_k(&plant, &pcfg, 16, 4, 1e-4, cfg.seed)?.k_hat)
        }
        // The exact predictor has no truncation error.
        _ => Ok(0.0),
    }
}

fn monitor_constants(file: &ScenarioFile, cfg: &SimConfig) -> Result<DerivedConstants> {
    let k_hat = resolve_k_hat(file, cfg)?;
    match (catalog_get(&cfg.plant)?, cfg.predictor) {
        (
            CatalogPlant::StrictFeedback(plant),
            PredictorSpec::Approx {
                picard_depth,
                sub_intervals,
                quadrature_nodes,
            },
        ) => {
            let pcfg =
                PredictorConfig::for_plant(&plant, picard_depth, sub_intervals, quadrature_nodes)?;
            derived_constants(
                &plant,
                cfg.theta,
                &DVector::from_column_slice(&cfg.injection),
                &pcfg,
                k_hat,
            )
        }
        (CatalogPlant::Lti(plant), PredictorSpec::ExactLti) => {
            // The strict-feedback constants specialize with L = 0 and exact
            // prediction (K = 0).
            let n = plant.dim();
            let theta = cfg.theta;
            let max_inj = (1..=n)
                .map(|i| theta.powi(2 * i as i32) * cfg.injection[i - 1].powi(2))
                .fold(0.0, f64::max);
            let nf = n as f64;
            let omega = f64::max(2.0 + 2.0 * nf * max_inj, 1.0) / 2.0;
            let rate = 3.0;
            Ok(DerivedConstants {
                omega,
                beta: omega + rate / 2.0,
                rho: 0.0,
                error_coeff: 0.0,
                growth: (rate * plant.total_delay() / 2.0).exp(),
            })
        }
        _ => Err(Error::Config(
            "predictor kind does not match the plant".into(),
        )),
    }
}

fn write_trace(path: &Path, trace: &SimTrace, file: &ScenarioFile, cfg: &SimConfig) -> Result<()> {
    let monitors = if cfg.monitors {
        let constants = monitor_constants(file, cfg)?;
        Some(run_monitors(trace, &constants)?)
    } else {
        None
    };
    let csv = output::trace_csv(trace, monitors.as_ref());
    std::fs::write(path, csv)
        .map_err(|e| Error::Config(format!("cannot write {}: {e}", path.display())))?;

    if let Some(report) = &monitors {
        println!(
            "monitor minima: m24 {:.3e}, m214 {:.3e}, m223 {:.3e}, m224 {:.3e}",
            report.forward_bound_min,
            report.growth_bound_min,
            report.observer_bound_min,
            report.existence_bound_min
        );
    }
    Ok(())
}

pub fn cmd_simulate(config_path: &Path, out_path: Option<PathBuf>, overrides: Overrides) -> i32 {
    let (file, cfg) = match load_config(config_path, overrides) {
        Ok(v) => v,
        Err(e) => return report_error(&e),
    };
    let out_path = out_path.unwrap_or_else(|| PathBuf::from("trace.csv"));

    match run_closed_loop(&cfg) {
        Ok(trace) => {
            println!(
                "simulated {} rows over [0, {}]",
                trace.rows.len(),
                cfg.t_end
            );
            println!("first hold index covered by the theory: {}", trace.jbar);
            let last = trace.final_row();
            println!(
                "final |x| = {:.6e}, |z| = {:.6e}",
                last.x.norm(),
                last.z.norm()
            );
            println!("sup |x| over run = {:.6e}", predictorlab::sup_state(&trace));
            match decay_fit(&trace, 0.4 * cfg.t_end, cfg.t_end) {
                Ok((rate, r2)) => {
                    println!("decay fit over trailing 60%: rate {rate:.4}, r^2 {r2:.4}")
                }
                Err(_) => println!("decay fit over trailing 60%: trajectory identically zero"),
            }
            if let Err(e) = write_trace(&out_path, &trace, &file, &cfg) {
                return report_error(&e);
            }
            println!("trace written to {}", out_path.display());
            EXIT_OK
        }
        Err(Error::Divergence { t, trace }) => {
            eprintln!("error: state diverged at t = {t}; writing partial trace");
            let csv = output::trace_csv(&trace, None);
            if let Err(e) = std::fs::write(&out_path, csv) {
                eprintln!("error: cannot write {}: {e}", out_path.display());
            }
            EXIT_DIVERGENCE
        }
        Err(e) => report_error(&e),
    }
}

pub fn cmd_check(config_path: &Path, strict: bool, overrides: Overrides) -> i32 {
    let (file, cfg) = match load_config(config_path, overrides) {
        Ok(v) => v,
        Err(e) => return report_error(&e),
    };
    let result = (|| -> Result<bool> {
        let plant = match catalog_get(&cfg.plant)? {
            CatalogPlant::StrictFeedback(p) => p,
            CatalogPlant::Lti(_) => {
                return Err(Error::Config(
                    "condition checking applies to strict-feedback plants".into(),
                ))
            }
        };
        let (l, m, nq) = match cfg.predictor {
            PredictorSpec::Approx {
                picard_depth,
                sub_intervals,
                quadrature_nodes,
            } => (picard_depth, sub_intervals, quadrature_nodes),
            PredictorSpec::ExactLti => {
                return Err(Error::Config(
                    "condition checking needs the successive-approximation predictor".into(),
                ))
            }
        };
        let pcfg = PredictorConfig::for_plant(&plant, l, m, nq)?;
        let injection = DVector::from_column_slice(&cfg.injection);
        let gains = FeedbackGains::new(DVector::from_column_slice(&cfg.feedback))?;
        let cert = synthesize_certificates(&plant, &injection, &gains, 1.0, 1.0)?;
        println!(
            "certificates: q = {}, mu = {:.6e}, gamma = {:.6e}, a = {:.6e}, K1 = {:.6e}, K2 = {:.6e}",
            cert.q, cert.mu, cert.gamma, cert.a, cert.k1, cert.k2
        );
        // Conservative safety factor on the empirical truncation constant.
        let k_hat = 2.0 * resolve_k_hat(&file, &cfg)?;
        println!("truncation constant (with safety factor 2): {k_hat:.6e}");

        let mut report = check_nonlinear_lyapunov(&plant, &gains, &cert, 2000, cfg.seed)?;
        let design = check_design_conditions(
            &plant, &injection, &gains, &cert, cfg.theta, cfg.t1, cfg.t2, &pcfg, k_hat,
        )?;
        report.entries.extend(design.entries);
        print!("{}", output::condition_table(&report));
        Ok(report.all_pass())
    })();
    match result {
        Ok(all_pass) => {
            if strict && !all_pass {
                EXIT_CONDITION
            } else {
                EXIT_OK
            }
        }
        Err(e) => report_error(&e),
    }
}

pub fn cmd_predict(config_path: &Path, state: &str, exact: bool, approx: bool) -> i32 {
    let (_file, cfg) = match load_config(config_path, Overrides::default()) {
        Ok(v) => v,
        Err(e) => return report_error(&e),
    };
    let result = (|| -> Result<Vec<f64>> {
        let plant = catalog_get(&cfg.plant)?;
        let n = plant.dim();
        let parsed: std::result::Result<Vec<f64>, _> =
            state.split(',').map(|s| s.trim().parse::<f64>()).collect();
        let z = match parsed {
            Ok(v) if v.len() == n => DVector::from_column_slice(&v),
            Ok(v) => {
                return Err(Error::Config(format!(
                    "state has {} components, plant needs {n}",
                    v.len()
                )))
            }
            Err(e) => return Err(Error::Config(format!("cannot parse state: {e}"))),
        };
        // The open input history over [-r-tau, 0) comes from the scenario's
        // initial input.
        let window = plant.total_delay();
        let u_record: ZohSignal = match &cfg.u0 {
            predictorlab::InitialInput::Constant(v) => ZohSignal::constant(-window, *v),
            predictorlab::InitialInput::Segments(segments) => ZohSignal::new(segments)?,
        };

        let use_exact = match (exact, approx) {
            (true, false) => true,
            (false, true) => false,
            (false, false) => matches!(cfg.predictor, PredictorSpec::ExactLti),
            (true, true) => return Err(Error::Config("choose one of --exact or --approx".into())),
        };
        let predicted = if use_exact {
            match &plant {
                CatalogPlant::Lti(p) => lti_predict(p, &z, &u_record, 0.0)?,
                CatalogPlant::StrictFeedback(_) => {
                    return Err(Error::Config(
                        "the exact predictor applies to LTI plants only".into(),
                    ))
                }
            }
        } else {
            match &plant {
                CatalogPlant::StrictFeedback(p) => {
                    let (l, m, nq) = match cfg.predictor {
                        PredictorSpec::Approx {
                            picard_depth,
                            sub_intervals,
                            quadrature_nodes,
                        } => (picard_depth, sub_intervals, quadrature_nodes),
                        PredictorSpec::ExactLti => (1, 2, 256),
                    };
                    let pcfg = PredictorConfig::for_plant(p, l, m, nq)?;
                    phi(p, &pcfg, &z, &u_record, 0.0)?
                }
                CatalogPlant::Lti(_) => {
                    return Err(Error::Config(
                        "the successive-approximation predictor needs a strict-feedback plant"
                            .into(),
                    ))
                }
            }
        };
        Ok(predicted.iter().copied().collect())
    })();
    match result {
        Ok(components) => {
            for v in components {
                // 17 significant digits round-trip any double.
                println!("{v:.16e}");
            }
            EXIT_OK
        }
        Err(e) => report_error(&e),
    }
}

pub fn cmd_sweep(sweep_path: &Path, out_path: Option<PathBuf>, overrides: Overrides) -> i32 {
    let result = (|| -> Result<String> {
        let file = SweepFile::load(sweep_path)?;
        let mut spec = file.to_spec(sweep_path)?;
        overrides.apply(&mut spec.base);
        let result = run_sweep(&spec)?;
        Ok(output::sweep_csv(&result))
    })();
    match result {
        Ok(csv) => {
            let out_path = out_path.unwrap_or_else(|| PathBuf::from("sweep.csv"));
            if let Err(e) = std::fs::write(&out_path, csv) {
                eprintln!("error: cannot write {}: {e}", out_path.display());
                return EXIT_CONFIG;
            }
            println!("sweep written to {}", out_path.display());
            EXIT_OK
        }
        Err(e) => report_error(&e),
    }
}

pub fn cmd_config_dump(config_path: &Path, out_path: Option<PathBuf>) -> i32 {
    let file = match ScenarioFile::load(config_path) {
        Ok(f) => f,
        Err(e) => return report_error(&e),
    };
    match file.dump() {
        Ok(text) => match out_path {
            Some(path) => {
                if let Err(e) = std::fs::write(&path, text) {
                    eprintln!("error: cannot write {}: {e}", path.display());
                    return EXIT_CONFIG;
                }
                EXIT_OK
            }
            None => {
                print!("{text}");
                EXIT_OK
            }
        },
        Err(e) => report_error(&e),
    }
}

pub fn cmd_estimate_k(config_path: &Path, trials: usize, overrides: Overrides) -> i32 {
    let (_file, cfg) = match load_config(config_path, overrides) {
        Ok(v) => v,
        Err(e) => return report_error(&e),
    };
    let result = (|| -> Result<()> {
        let plant = match catalog_get(&cfg.plant)? {
            CatalogPlant::StrictFeedback(p) => p,
            CatalogPlant::Lti(_) => {
                return Err(Error::Config(
                    "the truncation constant applies to the successive-approximation predictor"
                        .into(),
                ))
            }
        };
        let (m, nq) = match cfg.predictor {
            PredictorSpec::Approx {
                sub_intervals,
                quadrature_nodes,
                ..
            } => (sub_intervals, quadrature_nodes),
            PredictorSpec::ExactLti => (2, 256),
        };
        let pcfg = PredictorConfig::for_plant(&plant, 1, m, nq)?;
        let est = estimate_k(&plant, &pcfg, trials, 6, 1e-4, cfg.seed)?;
        println!(
            "K estimate over {trials} trials (m = {m}): {:.6e}",
            est.k_hat
        );
        println!("{:<8} {:>14} {:>14}", "depth", "per-depth", "running");
        for ((l, per), (_, cum)) in est.per_depth.iter().zip(&est.cumulative) {
            println!("{l:<8} {per:>14.6e} {cum:>14.6e}");
        }
        Ok(())
    })();
    match result {
        Ok(()) => EXIT_OK,
        Err(e) => report_error(&e),
    }
}
