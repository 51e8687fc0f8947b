//! The strict-feedback system family, its delay-free companion, the LTI
//! family, the plant catalog and the derived closed-loop constants.

use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg;
use crate::predictor::PredictorConfig;

/// Scalar drift component `f_i(x_1, ..., x_i)`; receives the leading slice
/// of the state.
pub type DriftFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;
/// Bounded disturbance gain `g_i(x, u)`.
pub type GainFn = Arc<dyn Fn(&[f64], f64) -> f64 + Send + Sync>;

/// Strict-feedback plant:
///
/// ```text
/// x_i' = f_i(x_1..x_i) + x_{i+1} + g_i(x, u) d_i      (i < n)
/// x_n' = f_n(x)        + u(t - tau) + g_n(x, u) d_n
/// ```
///
/// with globally Lipschitz `f_i` (constant `L`, `f_i(0) = 0`), bounded
/// `|g_i| <= G`, measurement delay `r` and input delay `tau`. `L` and `G`
/// are declared by the caller and spot-audited numerically; symbolic
/// verification is out of scope.
#[derive(Clone)]
pub struct StrictFeedbackPlant {
    drifts: Vec<DriftFn>,
    gains: Vec<GainFn>,
    lipschitz: f64,
    gain_bound: f64,
    measurement_delay: f64,
    input_delay: f64,
}

impl fmt::Debug for StrictFeedbackPlant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("StrictFeedbackPlant")
            .field("n", &self.drifts.len())
            .field("lipschitz", &self.lipschitz)
            .field("gain_bound", &self.gain_bound)
            .field("measurement_delay", &self.measurement_delay)
            .field("input_delay", &self.input_delay)
            .finish()
    }
}

impl StrictFeedbackPlant {
    pub fn new(
        drifts: Vec<DriftFn>,
        gains: Vec<GainFn>,
        lipschitz: f64,
        gain_bound: f64,
        measurement_delay: f64,
        input_delay: f64,
    ) -> Result<Self> {
        if drifts.is_empty() || drifts.len() != gains.len() {
            return Err(Error::invalid(
                "plant needs matching, non-empty drift and gain lists",
            ));
        }
        if !(lipschitz >= 0.0) || !(gain_bound >= 0.0) {
            return Err(Error::invalid("L and G must be non-negative"));
        }
        if !(measurement_delay >= 0.0) || !(input_delay >= 0.0) {
            return Err(Error::invalid("delays must be non-negative"));
        }
        if measurement_delay + input_delay <= 0.0 {
            return Err(Error::invalid(
                "the combined delay r + tau must be positive",
            ));
        }
        let zeros = vec![0.0; drifts.len()];
        for (i, f) in drifts.iter().enumerate() {
            let v = f(&zeros[..=i]);
            if v != 0.0 {
                return Err(Error::invalid(format!(
                    "drift component {} violates f_i(0) = 0 (got {v})",
                    i + 1
                )));
            }
        }
        Ok(Self {
            drifts,
            gains,
            lipschitz,
            gain_bound,
            measurement_delay,
            input_delay,
        })
    }

    pub fn dim(&self) -> usize {
        self.drifts.len()
    }

    pub fn lipschitz(&self) -> f64 {
        self.lipschitz
    }

    pub fn gain_bound(&self) -> f64 {
        self.gain_bound
    }

    pub fn measurement_delay(&self) -> f64 {
        self.measurement_delay
    }

    pub fn input_delay(&self) -> f64 {
        self.input_delay
    }

    pub fn total_delay(&self) -> f64 {
        self.measurement_delay + self.input_delay
    }

    pub fn drift(&self, i: usize, x_lead: &[f64]) -> f64 {
        (self.drifts[i])(x_lead)
    }

    pub fn gain(&self, i: usize, x: &[f64], u: f64) -> f64 {
        (self.gains[i])(x, u)
    }

    /// The canonical chain-of-integrators pair `(A, b)` of the family, with
    /// the superdiagonal of ones and input entering the last component.
    pub fn canonical_a(&self) -> DMatrix<f64> {
        let n = self.dim();
        let mut a = DMatrix::<f64>::zeros(n, n);
        for i in 0..n - 1 {
            a[(i, i + 1)] = 1.0;
        }
        a
    }

    pub fn canonical_b(&self) -> DVector<f64> {
        let n = self.dim();
        let mut b = DVector::<f64>::zeros(n);
        b[n - 1] = 1.0;
        b
    }

    /// Spot-audit of the declared Lipschitz constant and gain bound on
    /// seeded random points with `|x| <= radius`. Returns the worst observed
    /// ratio `|f_i(x) - f_i(z)| / |x - z|` and the largest `|g_i|`.
    pub fn audit(&self, radius: f64, pairs: usize, seed: u64) -> Result<(f64, f64)> {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let n = self.dim();
        let mut worst_ratio = 0.0f64;
        let mut worst_gain = 0.0f64;
        for _ in 0..pairs {
            let x: Vec<f64> = (0..n).map(|_| rng.random_range(-radius..radius)).collect();
            let z: Vec<f64> = (0..n).map(|_| rng.random_range(-radius..radius)).collect();
            let u: f64 = rng.random_range(-radius..radius);
            for i in 0..n {
                let dist = x[..=i]
                    .iter()
                    .zip(&z[..=i])
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum::<f64>()
                    .sqrt();
                if dist > 0.0 {
                    let df = (self.drift(i, &x[..=i]) - self.drift(i, &z[..=i])).abs();
                    worst_ratio = worst_ratio.max(df / dist);
                }
                worst_gain = worst_gain.max(self.gain(i, &x, u).abs());
            }
        }
        if worst_ratio > self.lipschitz + 1e-9 {
            return Err(Error::invalid(format!(
                "declared Lipschitz constant {} violated: observed {worst_ratio}",
                self.lipschitz
            )));
        }
        if worst_gain > self.gain_bound + 1e-9 {
            return Err(Error::invalid(format!(
                "declared gain bound {} violated: observed {worst_gain}",
                self.gain_bound
            )));
        }
        Ok((worst_ratio, worst_gain))
    }
}

/// Right-hand side of the delayed plant. `u_delayed` is `u(t - tau)` and
/// `d` the current disturbance vector.
pub fn plant_rhs(
    plant: &StrictFeedbackPlant,
    x: &DVector<f64>,
    u_delayed: f64,
    d: &DVector<f64>,
) -> Result<DVector<f64>> {
    let n = plant.dim();
    if x.len() != n || d.len() != n {
        return Err(Error::invalid(format!(
            "plant_rhs: expected dimension {n}, got x: {}, d: {}",
            x.len(),
            d.len()
        )));
    }
    let xs = x.as_slice();
    let mut dx = DVector::<f64>::zeros(n);
    for i in 0..n {
        let mut v = plant.drift(i, &xs[..=i]) + plant.gain(i, xs, u_delayed) * d[i];
        if i + 1 < n {
            v += x[i + 1];
        } else {
            v += u_delayed;
        }
        dx[i] = v;
    }
    Ok(dx)
}

/// Right-hand side of the delay-free companion system, i.e. the drift the
/// predictor integrates: `f(x) + A x + b u`.
pub fn delay_free_rhs(
    plant: &StrictFeedbackPlant,
    x: &DVector<f64>,
    u: f64,
) -> Result<DVector<f64>> {
    let n = plant.dim();
    if x.len() != n {
        return Err(Error::invalid(format!(
            "delay_free_rhs: expected dimension {n}, got {}",
            x.len()
        )));
    }
    let xs = x.as_slice();
    let mut dx = DVector::<f64>::zeros(n);
    for i in 0..n {
        let mut v = plant.drift(i, &xs[..=i]);
        if i + 1 < n {
            v += x[i + 1];
        } else {
            v += u;
        }
        dx[i] = v;
    }
    Ok(dx)
}

/// Forward-completeness envelope: every solution satisfies
///
/// ```text
/// |x(t)| <= (|x(0)| + (G sup|d| + sup|u|) / sqrt((n+1)L + 3))
///           * exp(((n+1)L + 3) t / 2)
/// ```
pub fn forward_bound(
    plant: &StrictFeedbackPlant,
    x0_norm: f64,
    sup_d: f64,
    sup_u: f64,
    t: f64,
) -> Result<f64> {
    for (name, v) in [
        ("x0_norm", x0_norm),
        ("sup_d", sup_d),
        ("sup_u", sup_u),
        ("t", t),
    ] {
        if !v.is_finite() || v < 0.0 {
            return Err(Error::invalid(format!(
                "forward_bound: {name} must be finite and non-negative, got {v}"
            )));
        }
    }
    let c = ((plant.dim() + 1) as f64) * plant.lipschitz() + 3.0;
    Ok((x0_norm + (plant.gain_bound() * sup_d + sup_u) / c.sqrt()) * (c * t / 2.0).exp())
}

/// Linear time-invariant plant `x' = A x + B u(t - tau) + G d` with output
/// `y = c' x` read `r` seconds late.
#[derive(Debug, Clone, PartialEq)]
pub struct LtiPlant {
    pub a: DMatrix<f64>,
    pub b: DVector<f64>,
    pub g: DMatrix<f64>,
    pub c: DVector<f64>,
    pub measurement_delay: f64,
    pub input_delay: f64,
}

impl LtiPlant {
    pub fn new(
        a: DMatrix<f64>,
        b: DVector<f64>,
        g: DMatrix<f64>,
        c: DVector<f64>,
        measurement_delay: f64,
        input_delay: f64,
    ) -> Result<Self> {
        let n = a.nrows();
        if a.ncols() != n || b.len() != n || c.len() != n || g.nrows() != n || g.ncols() != n {
            return Err(Error::invalid("LtiPlant: inconsistent dimensions"));
        }
        if !(measurement_delay >= 0.0) || !(input_delay >= 0.0) {
            return Err(Error::invalid("delays must be non-negative"));
        }
        if measurement_delay + input_delay <= 0.0 {
            return Err(Error::invalid(
                "the combined delay r + tau must be positive",
            ));
        }
        Ok(Self {
            a,
            b,
            g,
            c,
            measurement_delay,
            input_delay,
        })
    }

    pub fn dim(&self) -> usize {
        self.a.nrows()
    }

    pub fn total_delay(&self) -> f64 {
        self.measurement_delay + self.input_delay
    }

    /// Operator norm of the disturbance matrix, used by the monitors.
    pub fn gain_bound(&self) -> f64 {
        linalg::operator_norm(&self.g)
    }
}

/// RHS of the LTI plant.
pub fn lti_rhs(
    plant: &LtiPlant,
    x: &DVector<f64>,
    u_delayed: f64,
    d: &DVector<f64>,
) -> Result<DVector<f64>> {
    if x.len() != plant.dim() || d.len() != plant.dim() {
        return Err(Error::invalid("lti_rhs: dimension mismatch"));
    }
    Ok(&plant.a * x + &plant.b * u_delayed + &plant.g * d)
}

/// Catalog entry: either family.
#[derive(Debug, Clone)]
pub enum CatalogPlant {
    StrictFeedback(StrictFeedbackPlant),
    Lti(LtiPlant),
}

impl CatalogPlant {
    pub fn dim(&self) -> usize {
        match self {
            CatalogPlant::StrictFeedback(p) => p.dim(),
            CatalogPlant::Lti(p) => p.dim(),
        }
    }

    pub fn measurement_delay(&self) -> f64 {
        match self {
            CatalogPlant::StrictFeedback(p) => p.measurement_delay(),
            CatalogPlant::Lti(p) => p.measurement_delay,
        }
    }

    pub fn input_delay(&self) -> f64 {
        match self {
            CatalogPlant::StrictFeedback(p) => p.input_delay(),
            CatalogPlant::Lti(p) => p.input_delay,
        }
    }

    pub fn total_delay(&self) -> f64 {
        self.measurement_delay() + self.input_delay()
    }

    pub fn as_strict_feedback(&self) -> Result<&StrictFeedbackPlant> {
        match self {
            CatalogPlant::StrictFeedback(p) => Ok(p),
            CatalogPlant::Lti(_) => Err(Error::invalid(
                "this operation needs a strict-feedback plant; the catalog entry is LTI",
            )),
        }
    }

    pub fn as_lti(&self) -> Result<&LtiPlant> {
        match self {
            CatalogPlant::Lti(p) => Ok(p),
            CatalogPlant::StrictFeedback(_) => Err(Error::invalid(
                "this operation needs an LTI plant; the catalog entry is strict-feedback",
            )),
        }
    }
}

/// Saturating quadratic: `x^2 sgn(x) / sqrt(1 + x^2)`. Its derivative peaks
/// at `4 sqrt(2) / (3 sqrt(3))`, which is the Lipschitz constant declared
/// for the worked example.
pub fn saturating_quadratic(x: f64) -> f64 {
    x * x * x.signum() / (1.0 + x * x).sqrt()
}

/// Lipschitz constant of [`saturating_quadratic`].
pub fn saturating_quadratic_lipschitz() -> f64 {
    4.0 * 2.0f64.sqrt() / (3.0 * 3.0f64.sqrt())
}

/// Looks up a registered plant.
///
/// * `"example4"` — the two-dimensional saturating-quadratic benchmark with
///   `r = tau = 1/4`, unit disturbance gain into the first component.
/// * `"smooth2"`  — the same chain with `f_1 = sin`, everywhere smooth;
///   used where integrator-order tests need a C-infinity right-hand side
///   (the saturating quadratic is only C1 at the origin).
/// * `"linear2"`  — the same chain with zero drift (double integrator) in
///   strict-feedback form, for predictor studies with `L = 0`.
/// * `"lti"`      — the double integrator as an [`LtiPlant`], served by the
///   exact matrix-exponential predictor.
pub fn catalog_get(name: &str) -> Result<CatalogPlant> {
    match name {
        "example4" => {
            let f1: DriftFn = Arc::new(|x: &[f64]| saturating_quadratic(x[0]));
            let f2: DriftFn = Arc::new(|_x: &[f64]| 0.0);
            let g1: GainFn = Arc::new(|_x: &[f64], _u: f64| 1.0);
            let g2: GainFn = Arc::new(|_x: &[f64], _u: f64| 0.0);
            Ok(CatalogPlant::StrictFeedback(StrictFeedbackPlant::new(
                vec![f1, f2],
                vec![g1, g2],
                saturating_quadratic_lipschitz(),
                1.0,
                0.25,
                0.25,
            )?))
        }
        "smooth2" => {
            let f1: DriftFn = Arc::new(|x: &[f64]| x[0].sin());
            let f2: DriftFn = Arc::new(|_x: &[f64]| 0.0);
            let g1: GainFn = Arc::new(|_x: &[f64], _u: f64| 1.0);
            let g2: GainFn = Arc::new(|_x: &[f64], _u: f64| 0.0);
            Ok(CatalogPlant::StrictFeedback(StrictFeedbackPlant::new(
                vec![f1, f2],
                vec![g1, g2],
                1.0,
                1.0,
                0.25,
                0.25,
            )?))
        }
        "linear2" => {
            let f1: DriftFn = Arc::new(|_x: &[f64]| 0.0);
            let f2: DriftFn = Arc::new(|_x: &[f64]| 0.0);
            let g1: GainFn = Arc::new(|_x: &[f64], _u: f64| 1.0);
            let g2: GainFn = Arc::new(|_x: &[f64], _u: f64| 0.0);
            Ok(CatalogPlant::StrictFeedback(StrictFeedbackPlant::new(
                vec![f1, f2],
                vec![g1, g2],
                0.0,
                1.0,
                0.25,
                0.25,
            )?))
        }
        "lti" => {
            let a = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 0.0, 0.0]);
            let b = DVector::from_column_slice(&[0.0, 1.0]);
            let g = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 0.0]);
            let c = DVector::from_column_slice(&[1.0, 0.0]);
            Ok(CatalogPlant::Lti(LtiPlant::new(a, b, g, c, 0.25, 0.25)?))
        }
        other => Err(Error::UnknownPlant(other.to_string())),
    }
}

/// Constants derived from the plant, observer gains and predictor
/// configuration that parameterize the runtime bound monitors:
///
/// * `omega` — exponential rate bounding the hybrid observer energy,
/// * `beta = omega + ((n+1)L + 3)/2` — per-hold growth rate of the
///   existence bound,
/// * `rho = (nL + 1) T` — Picard contraction factor (must be below one),
/// * `error_coeff = K rho^{l+1} / (1 - rho)` — predictor error coefficient,
/// * `growth = error_coeff + exp(((n+1)L + 3)(r + tau)/2)` — gain of the
///   predictor growth bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivedConstants {
    pub omega: f64,
    pub beta: f64,
    pub rho: f64,
    pub error_coeff: f64,
    pub growth: f64,
}

pub fn derived_constants(
    plant: &StrictFeedbackPlant,
    theta: f64,
    injection_gains: &DVector<f64>,
    cfg: &PredictorConfig,
    k_const: f64,
) -> Result<DerivedConstants> {
    let n = plant.dim();
    if injection_gains.len() != n {
        return Err(Error::invalid("derived_constants: gain dimension mismatch"));
    }
    if !(theta >= 1.0) {
        return Err(Error::invalid("derived_constants: theta must be >= 1"));
    }
    if !(k_const >= 0.0) {
        return Err(Error::invalid("derived_constants: K must be >= 0"));
    }
    let l = plant.lipschitz();
    let nf = n as f64;
    let rho = (nf * l + 1.0) * cfg.sub_interval();
    if rho >= 1.0 {
        return Err(Error::ContractionViolated { rho });
    }

    let max_inj = (1..=n)
        .map(|i| theta.powi(2 * i as i32) * injection_gains[i - 1].powi(2))
        .fold(0.0, f64::max);
    let omega = f64::max(l * (nf + 1.0) + 2.0 + 2.0 * nf * max_inj, 1.0 + l * l) / 2.0;
    let rate = (nf + 1.0) * l + 3.0;
    let beta = omega + rate / 2.0;
    let error_coeff = k_const * rho.powi(cfg.picard_depth() as i32 + 1) / (1.0 - rho);
    let growth = error_coeff + (rate * plant.total_delay() / 2.0).exp();
    Ok(DerivedConstants {
        omega,
        beta,
        rho,
        error_coeff,
        growth,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn example4() -> StrictFeedbackPlant {
        match catalog_get("example4").unwrap() {
            CatalogPlant::StrictFeedback(p) => p,
            _ => unreachable!(),
        }
    }

    #[test]
    fn catalog_lookup() {
        let p = example4();
        assert_eq!(p.dim(), 2);
        assert_eq!(p.measurement_delay(), 0.25);
        assert_eq!(p.input_delay(), 0.25);
        let expected_l = 4.0 * 2.0f64.sqrt() / (3.0 * 3.0f64.sqrt());
        assert_eq!(p.lipschitz(), expected_l);
        assert!(matches!(catalog_get("lti").unwrap(), CatalogPlant::Lti(_)));
        assert!(matches!(catalog_get("nosuch"), Err(Error::UnknownPlant(_))));
    }

    #[test]
    fn rhs_examples() {
        let p = example4();
        let zero = plant_rhs(&p, &DVector::zeros(2), 0.0, &DVector::zeros(2)).unwrap();
        assert_eq!(zero, DVector::zeros(2));

        let f1 = 1.0 / 2.0f64.sqrt();
        let dx = plant_rhs(
            &p,
            &DVector::from_column_slice(&[1.0, 1.0]),
            0.0,
            &DVector::zeros(2),
        )
        .unwrap();
        assert!((dx[0] - (f1 + 1.0)).abs() < 1e-15);
        assert_eq!(dx[1], 0.0);

        // Disturbance enters the first component with unit gain, input the
        // second.
        let dx = plant_rhs(
            &p,
            &DVector::from_column_slice(&[1.0, 1.0]),
            5.0,
            &DVector::from_column_slice(&[0.5, 0.0]),
        )
        .unwrap();
        assert!((dx[0] - (f1 + 1.0 + 0.5)).abs() < 1e-15);
        assert_eq!(dx[1], 5.0);

        let dx = delay_free_rhs(&p, &DVector::from_column_slice(&[1.0, 0.5]), -2.0).unwrap();
        assert!((dx[0] - (f1 + 0.5)).abs() < 1e-15);
        assert_eq!(dx[1], -2.0);

        assert!(plant_rhs(&p, &DVector::zeros(3), 0.0, &DVector::zeros(3)).is_err());
    }

    #[test]
    fn delay_free_matches_plant_without_disturbance() {
        let p = example4();
        for k in 0..50 {
            let x = DVector::from_fn(2, |i, _| ((k * 7 + i * 3) as f64 * 0.13).sin() * 4.0);
            let u = (k as f64 * 0.31).cos() * 3.0;
            let a = plant_rhs(&p, &x, u, &DVector::zeros(2)).unwrap();
            let b = delay_free_rhs(&p, &x, u).unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn forward_bound_values() {
        let p = example4();
        assert_eq!(forward_bound(&p, 0.0, 0.0, 0.0, 7.0).unwrap(), 0.0);
        assert_eq!(forward_bound(&p, 1.0, 0.0, 0.0, 0.0).unwrap(), 1.0);
        // (n+1)L + 3 for the example: 3L + 3.
        let c = 3.0 * p.lipschitz() + 3.0;
        assert!((c - 6.265986).abs() < 1e-5);
        let b = forward_bound(&p, 1.0, 0.0, 0.0, 1.0).unwrap();
        assert!((b - (c / 2.0).exp()).abs() < 1e-12);
        assert!(forward_bound(&p, -1.0, 0.0, 0.0, 0.0).is_err());
    }

    #[test]
    fn lipschitz_audit_passes() {
        let p = example4();
        let (ratio, gain) = p.audit(10.0, 10_000, 1234).unwrap();
        assert!(ratio <= p.lipschitz() + 1e-12);
        assert!(gain <= 1.0);
    }

    #[test]
    fn audit_catches_understated_constant() {
        let f1: DriftFn = Arc::new(|x: &[f64]| 2.0 * x[0]);
        let f2: DriftFn = Arc::new(|_: &[f64]| 0.0);
        let g: GainFn = Arc::new(|_: &[f64], _: f64| 0.0);
        let p = StrictFeedbackPlant::new(
            vec![f1, f2],
            vec![g.clone(), g],
            0.5, // declared too small
            0.0,
            0.25,
            0.25,
        )
        .unwrap();
        assert!(p.audit(5.0, 200, 1).is_err());
    }

    #[test]
    fn construction_rejects_nonzero_origin() {
        let f1: DriftFn = Arc::new(|_x: &[f64]| 1.0);
        let g: GainFn = Arc::new(|_: &[f64], _: f64| 0.0);
        assert!(StrictFeedbackPlant::new(vec![f1], vec![g], 1.0, 0.0, 0.25, 0.25).is_err());
    }

    #[test]
    fn construction_rejects_zero_total_delay() {
        let f1: DriftFn = Arc::new(|_x: &[f64]| 0.0);
        let g: GainFn = Arc::new(|_: &[f64], _: f64| 0.0);
        assert!(StrictFeedbackPlant::new(vec![f1], vec![g], 1.0, 0.0, 0.0, 0.0).is_err());
    }

    #[test]
    fn derived_constants_example() {
        let p = example4();
        let cfg = PredictorConfig::for_plant(&p, 1, 2, 256).unwrap();
        let gains = DVector::from_column_slice(&[-3.0, -3.0]);
        let c = derived_constants(&p, 1.0, &gains, &cfg, 0.0).unwrap();
        // omega = (3L + 2 + 4 * 9) / 2; the quadratic branch 1 + L^2 loses.
        let l = p.lipschitz();
        let expected_omega = (3.0 * l + 2.0 + 36.0) / 2.0;
        assert!((c.omega - expected_omega).abs() < 1e-12);
        assert!((c.omega - 20.633).abs() < 1e-3);
        assert!((c.rho - (2.0 * l + 1.0) * 0.25).abs() < 1e-12);
        assert!(c.rho < 1.0 && (c.rho - 0.794).abs() < 1e-3);
        // K = 0 collapses the error term.
        assert_eq!(c.error_coeff, 0.0);
        let rate = 3.0 * l + 3.0;
        assert!((c.growth - (rate * 0.5 / 2.0).exp()).abs() < 1e-12);
        assert!((c.beta - (c.omega + rate / 2.0)).abs() < 1e-12);
    }

    #[test]
    fn derived_constants_rejects_bad_contraction() {
        let p = example4();
        // m = 1 gives T = 0.5 and rho = 1.59 >= 1; the config constructor
        // already refuses it.
        assert!(matches!(
            PredictorConfig::for_plant(&p, 1, 1, 256),
            Err(Error::ContractionViolated { .. })
        ));
    }
}
