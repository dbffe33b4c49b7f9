//! Hamiltonian flows of closed-form functions in global charts.
//!
//! The plane uses coordinates `(q, p)` with `dq ^ dp`, the cylinder `(theta, y)`
//! with `dtheta ^ dy`. In both, `X_H = (dH/d2, -dH/d1)`. Angles are integrated
//! unwrapped and compared modulo `2 pi`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::decomposition::CutoffProfile;
use crate::field::FieldPreset;
use crate::surface::ChartKind;

#[derive(Debug, Error)]
pub enum FlowError {
    #[error("point ({0}, {1}) is outside the chart")]
    OutsideChart(f64, f64),
    #[error("energy drift {drift:e} exceeds the bound {bound:e}; reduce the step")]
    StepTooLarge { drift: f64, bound: f64 },
    #[error("invalid flow parameters: {0}")]
    InvalidParams(String),
}

/// Closed-form Hamiltonians on a chart.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ClosedForm {
    Zero,
    /// `a * x1 + b * x2`.
    Linear { a: f64, b: f64 },
    /// `omega * (x1^2 + x2^2) / 2`.
    Harmonic { omega: f64 },
    Preset { preset: FieldPreset },
    /// `rho(base)`.
    Cutoff { base: Box<ClosedForm>, cutoff: CutoffProfile },
    /// `base - rho(base)`.
    Remainder { base: Box<ClosedForm>, cutoff: CutoffProfile },
    Sum { terms: Vec<ClosedForm> },
}

impl ClosedForm {
    /// Value and gradient in chart coordinates.
    pub fn eval(&self, chart: ChartKind, x: [f64; 2]) -> (f64, [f64; 2]) {
        match self {
            ClosedForm::Zero => (0.0, [0.0, 0.0]),
            ClosedForm::Linear { a, b } => (a * x[0] + b * x[1], [*a, *b]),
            ClosedForm::Harmonic { omega } => {
                (0.5 * omega * (x[0] * x[0] + x[1] * x[1]), [omega * x[0], omega * x[1]])
            }
            ClosedForm::Preset { preset } => preset.eval(chart, x),
            ClosedForm::Cutoff { base, cutoff } => {
                let (h, g) = base.eval(chart, x);
                let d = cutoff.deriv(h);
                (cutoff.eval(h), [d * g[0], d * g[1]])
            }
            ClosedForm::Remainder { base, cutoff } => {
                let (h, g) = base.eval(chart, x);
                let d = 1.0 - cutoff.deriv(h);
                (h - cutoff.eval(h), [d * g[0], d * g[1]])
            }
            ClosedForm::Sum { terms } => terms.iter().fold((0.0, [0.0, 0.0]), |(v, g), t| {
                let (tv, tg) = t.eval(chart, x);
                (v + tv, [g[0] + tg[0], g[1] + tg[1]])
            }),
        }
    }

    pub fn value(&self, chart: ChartKind, x: [f64; 2]) -> f64 {
        self.eval(chart, x).0
    }
}

/// `(K, H0) = (rho o H, H - rho o H)` for a closed-form `H`.
pub fn decomposed_pair(base: &ClosedForm, cutoff: &CutoffProfile) -> (ClosedForm, ClosedForm) {
    (
        ClosedForm::Cutoff { base: Box::new(base.clone()), cutoff: cutoff.clone() },
        ClosedForm::Remainder { base: Box::new(base.clone()), cutoff: cutoff.clone() },
    )
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChartFlowSpec {
    pub chart: ChartKind,
    pub hamiltonian: ClosedForm,
    pub step: f64,
    pub t_final: f64,
    /// Fail with `StepTooLarge` when the energy drift exceeds this.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub drift_bound: Option<f64>,
}

impl ChartFlowSpec {
    pub fn new(chart: ChartKind, hamiltonian: ClosedForm, step: f64, t_final: f64) -> Self {
        Self { chart, hamiltonian, step, t_final, drift_bound: None }
    }

    fn check(&self) -> Result<(), FlowError> {
        if !(self.step > 0.0 && self.step.is_finite()) {
            return Err(FlowError::InvalidParams(format!("step must be positive, got {}", self.step)));
        }
        if !self.t_final.is_finite() {
            return Err(FlowError::InvalidParams("t_final must be finite".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub samples: Vec<(f64, [f64; 2])>,
    /// `max_t |H(x(t)) - H(x0)|`.
    pub energy_drift: f64,
    /// `|det D phi - 1|` at the final time, by central differences.
    pub jacobian_drift: f64,
}

impl Trajectory {
    pub fn end(&self) -> [f64; 2] {
        self.samples.last().expect("trajectory has a start sample").1
    }
}

fn in_chart(x: [f64; 2]) -> Result<(), FlowError> {
    if x[0].is_finite() && x[1].is_finite() {
        Ok(())
    } else {
        Err(FlowError::OutsideChart(x[0], x[1]))
    }
}

fn field_at(chart: ChartKind, h: &ClosedForm, x: [f64; 2]) -> [f64; 2] {
    let (_, g) = h.eval(chart, x);
    [g[1], -g[0]]
}

pub fn hamiltonian_vector_field(spec: &ChartFlowSpec, point: [f64; 2]) -> Result<[f64; 2], FlowError> {
    in_chart(point)?;
    Ok(field_at(spec.chart, &spec.hamiltonian, point))
}

fn rk4_step(chart: ChartKind, h: &ClosedForm, x: [f64; 2], dt: f64) -> [f64; 2] {
    let add = |a: [f64; 2], k: [f64; 2], s: f64| [a[0] + s * k[0], a[1] + s * k[1]];
    let k1 = field_at(chart, h, x);
    let k2 = field_at(chart, h, add(x, k1, dt / 2.0));
    let k3 = field_at(chart, h, add(x, k2, dt / 2.0));
    let k4 = field_at(chart, h, add(x, k3, dt));
    [
        x[0] + dt / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]),
        x[1] + dt / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]),
    ]
}

/// Step count and last step for integrating over `t` with nominal `step`.
fn schedule(t: f64, step: f64) -> (usize, f64) {
    let n = (t.abs() / step).ceil() as usize;
    if n == 0 {
        (0, 0.0)
    } else {
        (n, t / n as f64)
    }
}

/// Endpoint of the flow without recording samples.
fn flow_point(chart: ChartKind, h: &ClosedForm, x0: [f64; 2], t: f64, step: f64) -> [f64; 2] {
    let (n, dt) = schedule(t, step);
    (0..n).fold(x0, |x, _| rk4_step(chart, h, x, dt))
}

/// Time-`t` map of `h` by fixed-step RK4, with angles left unwrapped.
pub fn flow_map(chart: ChartKind, h: &ClosedForm, x0: [f64; 2], t: f64, step: f64) -> [f64; 2] {
    flow_point(chart, h, x0, t, step)
}

pub fn integrate(spec: &ChartFlowSpec, x0: [f64; 2]) -> Result<Trajectory, FlowError> {
    spec.check()?;
    in_chart(x0)?;
    let (chart, h) = (spec.chart, &spec.hamiltonian);
    let (n, dt) = schedule(spec.t_final, spec.step);
    let e0 = h.value(chart, x0);
    let mut samples = Vec::with_capacity(n + 1);
    samples.push((0.0, x0));
    let mut x = x0;
    let mut energy_drift: f64 = 0.0;
    for i in 1..=n {
        x = rk4_step(chart, h, x, dt);
        in_chart(x)?;
        energy_drift = energy_drift.max((h.value(chart, x) - e0).abs());
        let t = if i == n { spec.t_final } else { i as f64 * dt };
        samples.push((t, x));
    }
    if let Some(bound) = spec.drift_bound {
        if energy_drift > bound {
            return Err(FlowError::StepTooLarge { drift: energy_drift, bound });
        }
    }
    let jacobian_drift = if n == 0 {
        0.0
    } else {
        let delta = 1e-6;
        let col = |k: usize| {
            let mut a = x0;
            let mut b = x0;
            a[k] += delta;
            b[k] -= delta;
            let fa = flow_point(chart, h, a, spec.t_final, spec.step);
            let fb = flow_point(chart, h, b, spec.t_final, spec.step);
            [(fa[0] - fb[0]) / (2.0 * delta), (fa[1] - fb[1]) / (2.0 * delta)]
        };
        let (c0, c1) = (col(0), col(1));
        (c0[0] * c1[1] - c0[1] * c1[0] - 1.0).abs()
    };
    Ok(Trajectory { samples, energy_drift, jacobian_drift })
}

/// Step-halving ratio `|x_h - x_{h/2}| / |x_{h/2} - x_{h/4}|` of the time-`t`
/// endpoint. Tends to 16 for a 4th-order method; `None` when the finer
/// difference vanishes.
pub fn convergence_ratio(chart: ChartKind, h: &ClosedForm, x0: [f64; 2], t: f64, step: f64) -> Option<f64> {
    let [a, b, c] = [step, step / 2.0, step / 4.0].map(|dt| flow_point(chart, h, x0, t, dt));
    let fine = chart_distance(chart, b, c);
    (fine > 0.0).then(|| chart_distance(chart, a, b) / fine)
}

/// Chart distance; the angle is compared modulo `2 pi` on the cylinder.
pub fn chart_distance(chart: ChartKind, a: [f64; 2], b: [f64; 2]) -> f64 {
    let d = crate::field::chart_delta(chart, a, b);
    d[0].hypot(d[1])
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CommutationReport {
    /// `max dist(Phi^s Psi^t x, Psi^t Phi^s x)`.
    pub commute_error: f64,
    /// `max dist(phi_H^t x, Phi^t Psi^t x)` with `H = K + H0`.
    pub composition_error: f64,
}

impl CommutationReport {
    pub fn max_error(&self) -> f64 {
        self.commute_error.max(self.composition_error)
    }
}

/// Checks that the flows `Psi` of `k` and `Phi` of `h0` commute and compose
/// to the flow of `k + h0` on the sample points.
pub fn verify_commutation(
    chart: ChartKind,
    k: &ClosedForm,
    h0: &ClosedForm,
    points: &[[f64; 2]],
    t: f64,
    s: f64,
    step: f64,
) -> Result<CommutationReport, FlowError> {
    if !(step > 0.0 && step.is_finite()) {
        return Err(FlowError::InvalidParams(format!("step must be positive, got {step}")));
    }
    for &p in points {
        in_chart(p)?;
    }
    let sum = ClosedForm::Sum { terms: vec![k.clone(), h0.clone()] };
    let errors: Vec<(f64, f64)> = points
        .par_iter()
        .map(|&x| {
            let psi_t = flow_point(chart, k, x, t, step);
            let a = flow_point(chart, h0, psi_t, s, step);
            let phi_s = flow_point(chart, h0, x, s, step);
            let b = flow_point(chart, k, phi_s, t, step);
            let whole = flow_point(chart, &sum, x, t, step);
            let split = flow_point(chart, h0, psi_t, t, step);
            (chart_distance(chart, a, b), chart_distance(chart, whole, split))
        })
        .collect();
    Ok(CommutationReport {
        commute_error: errors.iter().map(|e| e.0).fold(0.0, f64::max),
        composition_error: errors.iter().map(|e| e.1).fold(0.0, f64::max),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::decomposition::build_cutoff;
    use std::f64::consts::PI;

    #[test]
    fn vector_fields() {
        let spec = ChartFlowSpec::new(ChartKind::Plane, ClosedForm::Linear { a: 0.0, b: 1.0 }, 0.1, 1.0);
        assert_eq!(hamiltonian_vector_field(&spec, [3.0, -2.0]).unwrap(), [1.0, 0.0]);
        let zero = ChartFlowSpec::new(ChartKind::Cylinder, ClosedForm::Zero, 0.1, 1.0);
        assert_eq!(hamiltonian_vector_field(&zero, [1.0, 1.0]).unwrap(), [0.0, 0.0]);
        assert!(matches!(
            hamiltonian_vector_field(&zero, [f64::NAN, 0.0]),
            Err(FlowError::OutsideChart(..))
        ));
    }

    #[test]
    fn oscillator_period() {
        let spec = ChartFlowSpec::new(ChartKind::Plane, ClosedForm::Harmonic { omega: 1.0 }, 1e-3, 2.0 * PI);
        let tr = integrate(&spec, [1.0, 0.0]).unwrap();
        let end = tr.end();
        assert!((end[0] - 1.0).abs() < 1e-6 && end[1].abs() < 1e-6, "{end:?}");
        assert!(tr.energy_drift < 1e-8);
        assert!(tr.jacobian_drift < 1e-6);
    }

    #[test]
    fn zero_time() {
        let spec = ChartFlowSpec::new(ChartKind::Plane, ClosedForm::Harmonic { omega: 1.0 }, 1e-3, 0.0);
        let tr = integrate(&spec, [0.3, 0.2]).unwrap();
        assert_eq!(tr.samples, vec![(0.0, [0.3, 0.2])]);
    }

    #[test]
    fn drift_bound_is_enforced() {
        let mut spec = ChartFlowSpec::new(ChartKind::Plane, ClosedForm::Harmonic { omega: 1.0 }, 0.5, 20.0);
        spec.drift_bound = Some(1e-12);
        assert!(matches!(integrate(&spec, [1.0, 0.0]), Err(FlowError::StepTooLarge { .. })));
    }

    #[test]
    fn zero_remainder_commutes_exactly() {
        let h = ClosedForm::Harmonic { omega: 1.0 };
        let r = verify_commutation(ChartKind::Plane, &h, &ClosedForm::Zero, &[[1.0, 0.5], [0.2, -0.3]], 1.0, 1.0, 1e-2)
            .unwrap();
        assert_eq!(r.max_error(), 0.0);
    }

    #[test]
    fn cylinder_angle_distance() {
        assert!(chart_distance(ChartKind::Cylinder, [0.01, 0.0], [2.0 * PI - 0.01, 0.0]) < 0.021);
        assert!((chart_distance(ChartKind::Cylinder, [4.0 * PI + 1.0, 0.0], [1.0, 0.0])).abs() < 1e-12);
    }

    #[test]
    fn cutoff_pair_sums_to_base() {
        let base = ClosedForm::Harmonic { omega: 1.0 };
        let (k, h0) = decomposed_pair(&base, &build_cutoff(-0.1, 0.2, 0.1).unwrap());
        for x in [[0.1, 0.2], [0.5, 0.6], [1.5, -1.0]] {
            let s = k.value(ChartKind::Plane, x) + h0.value(ChartKind::Plane, x);
            assert!((s - base.value(ChartKind::Plane, x)).abs() < 1e-15);
        }
    }
}
