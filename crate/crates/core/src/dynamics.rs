//! The four isochronous flows, an adaptive Dormand–Prince 5(4) integrator
//! for complex states, central-difference Jacobians, and the linearized
//! evolution around an equilibrium.
//!
//! * `gamma1`: `dγ_m/dt = i [γ_m - sum_{l != m} (γ_m - γ_l)^-1]`
//! * `zeta1`: the zeros of the monic polynomial whose coefficients follow `gamma1`
//! * `gamma2`: `d²γ_m/dt² = -γ_m + 2 sum_{l != m} (γ_m - γ_l)^-3`
//! * `zeta2`: the zeros of the polynomial whose coefficients follow `gamma2`
//!   (a goldfish-type system with velocity coupling `2 ζ'_n ζ'_l / (ζ_n - ζ_l)`)
//!
//! Every solution near an equilibrium returns to its start after `2π`.

use std::f64::consts::PI;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::eigen::{eigen_decomposition, DenseComplexMatrix, EigenOptions, Lu};
use crate::error::{Error, Result};
use crate::hermite::{hermite_zeros, permuted_polynomial, PermutationId};
use crate::matrices::{build, DiophantineMatrix, MatrixKind};
use crate::poly::{min_separation, roots, vieta_jacobian_apply, MonicPolynomial, RootOptions, ZeroVector};
use crate::C64;

/// Pairwise gap below which a vector field refuses to evaluate.
pub const COLLISION_GAP: f64 = 1e-10;
/// Smallest step the integrator will attempt.
pub const STEP_FLOOR: f64 = 1e-12;
pub const PERIOD: f64 = 2.0 * PI;

const I: C64 = C64::new(0.0, 1.0);
const ZERO: C64 = C64::new(0.0, 0.0);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FlowSystem {
    Gamma1,
    Zeta1,
    Gamma2,
    Zeta2,
}

impl FlowSystem {
    pub const ALL: [FlowSystem; 4] = [FlowSystem::Gamma1, FlowSystem::Zeta1, FlowSystem::Gamma2, FlowSystem::Zeta2];

    pub fn is_second_order(self) -> bool {
        matches!(self, FlowSystem::Gamma2 | FlowSystem::Zeta2)
    }

    pub fn on_zeros(self) -> bool {
        matches!(self, FlowSystem::Zeta1 | FlowSystem::Zeta2)
    }

    pub fn name(self) -> &'static str {
        match self {
            FlowSystem::Gamma1 => "gamma1",
            FlowSystem::Zeta1 => "zeta1",
            FlowSystem::Gamma2 => "gamma2",
            FlowSystem::Zeta2 => "zeta2",
        }
    }
}

impl std::fmt::Display for FlowSystem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for FlowSystem {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        FlowSystem::ALL
            .into_iter()
            .find(|f| f.name() == s.to_ascii_lowercase())
            .ok_or_else(|| Error::InvalidInput(format!("unknown system {s:?}")))
    }
}

fn check_gap(values: &[C64]) -> Result<()> {
    let separation = min_separation(values);
    if separation < COLLISION_GAP {
        return Err(Error::NearCollision { separation });
    }
    Ok(())
}

fn check_order(values: &[C64]) -> Result<()> {
    if values.len() < 2 {
        return Err(Error::InvalidInput("flows need N >= 2".into()));
    }
    crate::poly::ensure_finite(values, "state")
}

/// `γ_m - sum_{l != m} (γ_m - γ_l)^-1`
fn first_order_force(gamma: &[C64]) -> Result<Vec<C64>> {
    check_gap(gamma)?;
    Ok(gamma
        .iter()
        .enumerate()
        .map(|(m, &gm)| {
            let s: C64 = gamma.iter().enumerate().filter(|&(l, _)| l != m).map(|(_, &gl)| (gm - gl).inv()).sum();
            gm - s
        })
        .collect())
}

/// `-γ_m + 2 sum_{l != m} (γ_m - γ_l)^-3`
fn second_order_force(gamma: &[C64]) -> Result<Vec<C64>> {
    check_gap(gamma)?;
    Ok(gamma
        .iter()
        .enumerate()
        .map(|(m, &gm)| {
            let s: C64 =
                gamma.iter().enumerate().filter(|&(l, _)| l != m).map(|(_, &gl)| (gm - gl).powi(-3)).sum();
            -gm + s * 2.0
        })
        .collect())
}

/// Zero velocities induced by coefficient velocities:
/// `-[prod_{l != n} (ζ_n - ζ_l)]^-1 sum_m rate_m ζ_n^(N-m)`.
fn zeros_from_coefficient_rates(zeta: &[C64], rates: &[C64]) -> Vec<C64> {
    zeta.iter()
        .enumerate()
        .map(|(n, &zn)| {
            let prod: C64 = zeta.iter().enumerate().filter(|&(l, _)| l != n).map(|(_, &zl)| zn - zl).product();
            let horner = rates.iter().fold(ZERO, |acc, &r| acc * zn + r);
            -horner / prod
        })
        .collect()
}

fn coefficients_of(zeta: &[C64]) -> Vec<C64> {
    MonicPolynomial::from_zeros(&ZeroVector::new(zeta.to_vec()).expect("checked state")).coefficients().to_vec()
}

pub fn rhs_gamma_first(gamma: &[C64]) -> Result<Vec<C64>> {
    check_order(gamma)?;
    Ok(first_order_force(gamma)?.into_iter().map(|f| I * f).collect())
}

/// Velocities of the zeros; the coefficients are recomputed from `zeta`.
pub fn rhs_zeta_first(zeta: &[C64]) -> Result<Vec<C64>> {
    check_order(zeta)?;
    check_gap(zeta)?;
    let gamma = coefficients_of(zeta);
    let rates: Vec<C64> = first_order_force(&gamma)?.into_iter().map(|f| I * f).collect();
    Ok(zeros_from_coefficient_rates(zeta, &rates))
}

pub fn rhs_gamma_second(gamma: &[C64]) -> Result<Vec<C64>> {
    check_order(gamma)?;
    second_order_force(gamma)
}

/// Positions and velocities of a second-order flow.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SecondOrderState {
    pub t: f64,
    pub zeta: Vec<C64>,
    pub zeta_dot: Vec<C64>,
}

impl SecondOrderState {
    pub fn to_vec(&self) -> Vec<C64> {
        self.zeta.iter().chain(&self.zeta_dot).copied().collect()
    }
}

/// Accelerations of the zeros under the second-order flow.
pub fn rhs_zeta_second(zeta: &[C64], zeta_dot: &[C64]) -> Result<Vec<C64>> {
    check_order(zeta)?;
    if zeta_dot.len() != zeta.len() {
        return Err(Error::DimensionMismatch { expected: zeta.len(), actual: zeta_dot.len() });
    }
    check_gap(zeta)?;
    let gamma = coefficients_of(zeta);
    let force = second_order_force(&gamma)?;
    let mut acc = zeros_from_coefficient_rates(zeta, &force);
    for (n, a) in acc.iter_mut().enumerate() {
        for l in 0..zeta.len() {
            if l != n {
                *a += zeta_dot[n] * zeta_dot[l] * 2.0 / (zeta[n] - zeta[l]);
            }
        }
    }
    Ok(acc)
}

/// Accelerations at zero velocity.
pub fn zeta_force(zeta: &[C64]) -> Result<Vec<C64>> {
    rhs_zeta_second(zeta, &vec![ZERO; zeta.len()])
}

/// A right-hand side `dy/dt = f(y)` on a complex state.
pub trait VectorField {
    fn dim(&self) -> usize;
    fn eval(&self, y: &[C64]) -> Result<Vec<C64>>;
    /// Smallest pairwise gap among the colliding coordinates of `y`.
    fn separation(&self, y: &[C64]) -> f64;
}

/// One of the four flows on `N` particles. Second-order flows use the
/// doubled state `[positions, velocities]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Flow {
    pub system: FlowSystem,
    pub n: usize,
}

impl Flow {
    pub fn new(system: FlowSystem, n: usize) -> Self {
        Self { system, n }
    }
}

impl VectorField for Flow {
    fn dim(&self) -> usize {
        if self.system.is_second_order() {
            2 * self.n
        } else {
            self.n
        }
    }

    fn eval(&self, y: &[C64]) -> Result<Vec<C64>> {
        if y.len() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), actual: y.len() });
        }
        let n = self.n;
        match self.system {
            FlowSystem::Gamma1 => rhs_gamma_first(y),
            FlowSystem::Zeta1 => rhs_zeta_first(y),
            FlowSystem::Gamma2 => {
                let mut out = y[n..].to_vec();
                out.extend(rhs_gamma_second(&y[..n])?);
                Ok(out)
            }
            FlowSystem::Zeta2 => {
                let mut out = y[n..].to_vec();
                out.extend(rhs_zeta_second(&y[..n], &y[n..])?);
                Ok(out)
            }
        }
    }

    fn separation(&self, y: &[C64]) -> f64 {
        let positions = &y[..self.n];
        if self.system.on_zeros() {
            min_separation(positions).min(min_separation(&coefficients_of(positions)))
        } else {
            min_separation(positions)
        }
    }
}

/// The exact flow rewritten for `u = (y - center) / eps`, so that the
/// integrator's error control acts on the scale of the perturbation.
#[derive(Clone, Debug, PartialEq)]
pub struct DeviationFlow {
    pub flow: Flow,
    pub center: Vec<C64>,
    pub eps: f64,
}

impl DeviationFlow {
    fn absolute(&self, u: &[C64]) -> Vec<C64> {
        self.center.iter().zip(u).map(|(c, u)| c + u * self.eps).collect()
    }
}

impl VectorField for DeviationFlow {
    fn dim(&self) -> usize {
        self.flow.dim()
    }

    fn eval(&self, u: &[C64]) -> Result<Vec<C64>> {
        let y = self.absolute(u);
        Ok(self.flow.eval(&y)?.into_iter().map(|v| v / self.eps).collect())
    }

    fn separation(&self, u: &[C64]) -> f64 {
        self.flow.separation(&self.absolute(u))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IntegrateOptions {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_steps: usize,
    /// Keep every accepted step, not only the requested output times.
    pub record_steps: bool,
}

impl Default for IntegrateOptions {
    fn default() -> Self {
        Self { rel_tol: 1e-10, abs_tol: 1e-12, max_steps: 1_000_000, record_steps: true }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub t: f64,
    pub state: Vec<C64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRecord {
    pub system: Option<FlowSystem>,
    pub samples: Vec<Sample>,
    pub accepted: usize,
    pub rejected: usize,
    pub min_separation_seen: f64,
}

impl TrajectoryRecord {
    pub fn last(&self) -> &Sample {
        self.samples.last().expect("trajectory holds the initial sample")
    }

    /// `max_i |y_i(t_end) - y_i(0)|`.
    pub fn return_distance(&self) -> f64 {
        max_distance(&self.samples[0].state, &self.last().state)
    }

    /// State at an exact output time, if it was requested.
    pub fn at(&self, t: f64) -> Option<&Sample> {
        self.samples.iter().find(|s| s.t == t)
    }
}

pub fn max_distance(a: &[C64], b: &[C64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

// Dormand–Prince 5(4) tableau.
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
// fifth- minus fourth-order weights
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

fn combine(y: &[C64], h: f64, terms: &[(f64, &[C64])]) -> Vec<C64> {
    (0..y.len())
        .map(|i| y[i] + terms.iter().map(|(a, k)| k[i] * *a).sum::<C64>() * h)
        .collect()
}

struct StepResult {
    y: Vec<C64>,
    f: Vec<C64>,
    err: f64,
}

fn dopri_step<F: VectorField>(field: &F, y: &[C64], k1: &[C64], h: f64, opts: &IntegrateOptions) -> Result<StepResult> {
    let k2 = field.eval(&combine(y, h, &[(A21, k1)]))?;
    let k3 = field.eval(&combine(y, h, &[(A31, k1), (A32, &k2)]))?;
    let k4 = field.eval(&combine(y, h, &[(A41, k1), (A42, &k2), (A43, &k3)]))?;
    let k5 = field.eval(&combine(y, h, &[(A51, k1), (A52, &k2), (A53, &k3), (A54, &k4)]))?;
    let k6 = field.eval(&combine(y, h, &[(A61, k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]))?;
    let y_new = combine(y, h, &[(B1, k1), (B3, &k3), (B4, &k4), (B5, &k5), (B6, &k6)]);
    let k7 = field.eval(&y_new)?;
    let mut sum = 0.0;
    for i in 0..y.len() {
        let e = (k1[i] * E1 + k3[i] * E3 + k4[i] * E4 + k5[i] * E5 + k6[i] * E6 + k7[i] * E7) * h;
        let scale = opts.abs_tol + opts.rel_tol * y[i].norm().max(y_new[i].norm());
        sum += (e.norm() / scale).powi(2);
    }
    let err = (sum / y.len() as f64).sqrt();
    Ok(StepResult { y: y_new, f: k7, err })
}

/// Integrates `field` from `y0` at `t = 0`, stopping exactly at every time in
/// `outputs` (strictly increasing, positive). The record starts with the
/// initial sample and ends at the last output time.
pub fn integrate_field<F: VectorField>(
    field: &F,
    y0: &[C64],
    outputs: &[f64],
    opts: &IntegrateOptions,
) -> Result<TrajectoryRecord> {
    if y0.len() != field.dim() {
        return Err(Error::DimensionMismatch { expected: field.dim(), actual: y0.len() });
    }
    if !(opts.rel_tol > 0.0 && opts.abs_tol > 0.0) {
        return Err(Error::InvalidInput("integration tolerances must be positive".into()));
    }
    if outputs.is_empty() || outputs[0] <= 0.0 || outputs.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidInput("output times must be positive and increasing".into()));
    }
    crate::poly::ensure_finite(y0, "initial state")?;

    let mut record = TrajectoryRecord {
        system: None,
        samples: vec![Sample { t: 0.0, state: y0.to_vec() }],
        accepted: 0,
        rejected: 0,
        min_separation_seen: field.separation(y0),
    };
    let mut t = 0.0;
    let mut y = y0.to_vec();
    let mut f = field.eval(&y)?;

    let y_norm = y.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let f_norm = f.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let t_end = *outputs.last().unwrap();
    let mut h = if f_norm > 0.0 { 0.01 * (y_norm.max(opts.abs_tol) / f_norm) } else { t_end };
    h = h.clamp(STEP_FLOOR, t_end);

    let mut next_output = 0;
    let mut steps = 0;
    while next_output < outputs.len() {
        let target = outputs[next_output];
        let hit = t + h >= target;
        let step = if hit { target - t } else { h };
        steps += 1;
        if steps > opts.max_steps {
            return Err(Error::StepFloorReached { t, h: step });
        }
        match dopri_step(field, &y, &f, step, opts) {
            Ok(res) if res.err <= 1.0 => {
                t = if hit { target } else { t + step };
                y = res.y;
                f = res.f;
                record.accepted += 1;
                record.min_separation_seen = record.min_separation_seen.min(field.separation(&y));
                if hit {
                    record.samples.push(Sample { t, state: y.clone() });
                    next_output += 1;
                } else if opts.record_steps {
                    record.samples.push(Sample { t, state: y.clone() });
                }
                let grow = if res.err == 0.0 { 5.0 } else { (0.9 * res.err.powf(-0.2)).clamp(0.2, 5.0) };
                // a step shortened to land on an output says little about the next one
                h = if hit { h.max(step * grow) } else { step * grow };
            }
            Ok(res) => {
                record.rejected += 1;
                h = step * (0.9 * res.err.powf(-0.2)).clamp(0.1, 0.9);
                if h < STEP_FLOOR {
                    return Err(Error::StepFloorReached { t, h });
                }
            }
            Err(Error::NearCollision { separation }) => {
                record.rejected += 1;
                record.min_separation_seen = record.min_separation_seen.min(separation);
                h = step * 0.5;
                if h < STEP_FLOOR {
                    return Err(Error::CollisionAbort { t, separation });
                }
            }
            Err(e) => return Err(e),
        }
    }
    Ok(record)
}

/// Integrates one of the four flows from `initial` to `t_end`.
pub fn integrate(
    system: FlowSystem,
    initial: &[C64],
    t_end: f64,
    opts: &IntegrateOptions,
) -> Result<TrajectoryRecord> {
    if !(t_end > 0.0) {
        return Err(Error::InvalidInput("t_end must be positive".into()));
    }
    let n = if system.is_second_order() { initial.len() / 2 } else { initial.len() };
    let mut rec = integrate_field(&Flow::new(system, n), initial, &[t_end], opts)?;
    rec.system = Some(system);
    Ok(rec)
}

/// Positions of the equilibrium: Hermite zeros for the coefficient flows,
/// zeros of the permuted polynomial for the zero flows.
pub fn equilibrium(system: FlowSystem, n: usize, perm: &PermutationId, root_opts: RootOptions) -> Result<Vec<C64>> {
    let h = hermite_zeros(n)?;
    if system.on_zeros() {
        let p = permuted_polynomial(&h, perm)?;
        Ok(roots(&p, root_opts)?.into_inner())
    } else {
        Ok(h.as_complex())
    }
}

/// Uniform point in the complex disk of the given radius.
fn disk_point<R: Rng>(rng: &mut R, radius: f64) -> C64 {
    let r = radius * rng.gen::<f64>().sqrt();
    C64::from_polar(r, 2.0 * PI * rng.gen::<f64>())
}

/// Equilibrium state (positions, plus zero velocities for second-order
/// flows) with every component moved by at most `radius`.
pub fn perturbed_state<R: Rng>(system: FlowSystem, positions: &[C64], radius: f64, rng: &mut R) -> Vec<C64> {
    let mut state: Vec<C64> = positions.iter().map(|&p| p + disk_point(rng, radius)).collect();
    if system.is_second_order() {
        state.extend((0..positions.len()).map(|_| disk_point(rng, radius)));
    }
    state
}

/// Random direction with unit Euclidean norm.
pub fn random_direction<R: Rng>(n: usize, rng: &mut R) -> Vec<C64> {
    let v: Vec<C64> = (0..n).map(|_| disk_point(rng, 1.0)).collect();
    let norm = v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
    v.into_iter().map(|x| x / norm).collect()
}

/// Smallest `k` in `1..=max_multiple` for which the flow returns within
/// `threshold` after `k` periods. Zeros that trade places along the way
/// show up as `k > 1`.
pub fn period_multiple(
    system: FlowSystem,
    initial: &[C64],
    max_multiple: usize,
    threshold: f64,
    opts: &IntegrateOptions,
) -> Result<Option<usize>> {
    let n = if system.is_second_order() { initial.len() / 2 } else { initial.len() };
    let times: Vec<f64> = (1..=max_multiple).map(|k| k as f64 * PERIOD).collect();
    let quiet = IntegrateOptions { record_steps: false, ..*opts };
    let rec = integrate_field(&Flow::new(system, n), initial, &times, &quiet)?;
    Ok(rec.samples[1..]
        .iter()
        .position(|s| max_distance(&s.state, initial) < threshold)
        .map(|k| k + 1))
}

/// Central-difference Jacobian `J[n][m] = d f_n / d y_m` of a holomorphic
/// field, stepping each coordinate along the real axis.
pub fn fd_jacobian_of<F>(f: F, z: &[C64], h: f64) -> Result<DenseComplexMatrix>
where
    F: Fn(&[C64]) -> Result<Vec<C64>>,
{
    if !(h > 0.0) {
        return Err(Error::InvalidInput("finite-difference step must be positive".into()));
    }
    let n = z.len();
    let mut jac = DenseComplexMatrix::zeros(n);
    let mut probe = z.to_vec();
    for m in 0..n {
        probe[m] = z[m] + h;
        let plus = f(&probe)?;
        probe[m] = z[m] - h;
        let minus = f(&probe)?;
        probe[m] = z[m];
        if plus.len() != n {
            return Err(Error::DimensionMismatch { expected: n, actual: plus.len() });
        }
        for row in 0..n {
            jac[(row, m)] = (plus[row] - minus[row]) / (2.0 * h);
        }
    }
    Ok(jac)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum JacobianField {
    /// Velocity field of `zeta1`; its Jacobian at equilibrium is `i M1`.
    Zeta1,
    /// Zero-velocity acceleration of `zeta2`; its Jacobian is `-M2`.
    Zeta2Force,
}

pub const FD_STEP_RANGE: (f64, f64) = (1e-8, 1e-4);

pub fn fd_jacobian(field: JacobianField, z: &ZeroVector, h: f64) -> Result<DenseComplexMatrix> {
    if !(FD_STEP_RANGE.0..=FD_STEP_RANGE.1).contains(&h) {
        return Err(Error::InvalidInput(format!("h = {h} outside [1e-8, 1e-4]")));
    }
    match field {
        JacobianField::Zeta1 => fd_jacobian_of(rhs_zeta_first, z.as_slice(), h),
        JacobianField::Zeta2Force => fd_jacobian_of(zeta_force, z.as_slice(), h),
    }
}

/// The matrix a finite-difference Jacobian predicts: `-i J` for `M1`,
/// `-J` for `M2`.
pub fn matrix_from_jacobian(kind: MatrixKind, jac: &DenseComplexMatrix) -> DenseComplexMatrix {
    match kind {
        MatrixKind::M1 => jac.scale(-I),
        MatrixKind::M2 => jac.scale(C64::new(-1.0, 0.0)),
    }
}

/// `max |M - M_fd| / max |M|` between the closed form and the
/// finite-difference linearization at `z`.
pub fn oracle_deviation(kind: MatrixKind, z: &ZeroVector, c: &[C64], h: f64) -> Result<f64> {
    let closed = build(kind, z, c)?;
    let field = match kind {
        MatrixKind::M1 => JacobianField::Zeta1,
        MatrixKind::M2 => JacobianField::Zeta2Force,
    };
    let predicted = matrix_from_jacobian(kind, &fd_jacobian(field, z, h)?);
    Ok((&closed.entries - &predicted).max_abs() / closed.entries.max_abs())
}

/// Eigen-expansion of the linearized flow around an equilibrium.
#[derive(Clone, Debug)]
pub struct LinearModes {
    pub kind: MatrixKind,
    pub eigenvalues: Vec<C64>,
    pub vectors: DenseComplexMatrix,
    lu: Lu,
}

impl LinearModes {
    pub fn new(m: &DiophantineMatrix, opts: EigenOptions) -> Result<Self> {
        let dec = eigen_decomposition(&m.entries, opts)?;
        let vectors = dec.eigenvectors.expect("decomposition returns vectors");
        let lu = vectors.lu();
        Ok(Self { kind: m.kind, eigenvalues: dec.eigenvalues, vectors, lu })
    }

    fn expand(&self, v: &[C64]) -> Result<Vec<C64>> {
        self.lu.solve(v)
    }

    fn recombine(&self, weights: &[C64]) -> Vec<C64> {
        self.vectors.mul_vec(weights)
    }

    /// `v(t) = sum_m a_m exp(i λ_m t) u_m` with `v(0) = sum_m a_m u_m`.
    pub fn evolve_first(&self, v0: &[C64], t: f64) -> Result<Vec<C64>> {
        if self.kind != MatrixKind::M1 {
            return Err(Error::InvalidInput("first-order evolution needs an M1 matrix".into()));
        }
        let a = self.expand(v0)?;
        let w: Vec<C64> = a.iter().zip(&self.eigenvalues).map(|(a, l)| a * (I * l * t).exp()).collect();
        Ok(self.recombine(&w))
    }

    /// `v(t) = sum_m [a_m cos(ω_m t) + b_m sin(ω_m t) / ω_m] u_m` with
    /// `ω_m = sqrt(λ_m)`, `v(0) = sum a_m u_m`, `v'(0) = sum b_m u_m`.
    pub fn evolve_second(&self, v0: &[C64], vdot0: &[C64], t: f64) -> Result<Vec<C64>> {
        if self.kind != MatrixKind::M2 {
            return Err(Error::InvalidInput("second-order evolution needs an M2 matrix".into()));
        }
        if let Some(bad) = self.eigenvalues.iter().find(|l| !(l.re > 0.0)) {
            return Err(Error::InvalidInput(format!("eigenvalue {bad} has no positive real part")));
        }
        let a = self.expand(v0)?;
        let b = self.expand(vdot0)?;
        let w: Vec<C64> = self
            .eigenvalues
            .iter()
            .zip(a.iter().zip(&b))
            .map(|(l, (a, b))| {
                let omega = l.sqrt();
                a * (omega * t).cos() + b * (omega * t).sin() / omega
            })
            .collect();
        Ok(self.recombine(&w))
    }
}

pub fn linear_evolution_first(m: &DiophantineMatrix, v0: &[C64], t: f64) -> Result<Vec<C64>> {
    LinearModes::new(m, EigenOptions::default())?.evolve_first(v0, t)
}

pub fn linear_evolution_second(m: &DiophantineMatrix, v0: &[C64], vdot0: &[C64], t: f64) -> Result<Vec<C64>> {
    LinearModes::new(m, EigenOptions::default())?.evolve_second(v0, vdot0, t)
}

/// Time derivative of the coefficients implied by moving zeros,
/// `d/dt γ(ζ(t)) = J_vieta(ζ) ζ'`.
pub fn coefficient_rate(zeta: &[C64], zeta_dot: &[C64]) -> Result<Vec<C64>> {
    vieta_jacobian_apply(&ZeroVector::new(zeta.to_vec())?, zeta_dot)
}
