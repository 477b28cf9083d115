//! Complex monic polynomials in the descending-coefficient convention
//! `z^N + c_1 z^(N-1) + ... + c_N`, the Vieta maps between zeros and
//! coefficients, and a simultaneous (Aberth–Ehrlich) root finder.

use std::cmp::Ordering;
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::C64;

/// Subset enumeration is only offered up to this many entries.
pub const MAX_ENUMERATION_LEN: usize = 12;

/// Separation below which zeros are treated as near-coincident.
pub const NEAR_COINCIDENT: f64 = 1e-8;

pub(crate) fn ensure_finite(values: &[C64], what: &str) -> Result<()> {
    if let Some(i) = values.iter().position(|v| !(v.re.is_finite() && v.im.is_finite())) {
        return Err(Error::InvalidInput(format!("{what}[{i}] is not finite")));
    }
    Ok(())
}

/// Minimum pairwise distance; `+inf` for fewer than two entries.
pub fn min_separation(values: &[C64]) -> f64 {
    let mut best = f64::INFINITY;
    for (i, a) in values.iter().enumerate() {
        for b in &values[i + 1..] {
            best = best.min((a - b).norm());
        }
    }
    best
}

/// Lexicographic `(re, im)` ordering used for every sorted zero list.
pub fn lexicographic(a: &C64, b: &C64) -> Ordering {
    a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im))
}

/// `z^N + sum_m c_m z^(N-m)`; the unit leading coefficient is implicit.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MonicPolynomial {
    coefficients: Vec<C64>,
}

impl MonicPolynomial {
    pub fn new(coefficients: Vec<C64>) -> Result<Self> {
        if coefficients.is_empty() {
            return Err(Error::InvalidInput("a monic polynomial needs degree >= 1".into()));
        }
        ensure_finite(&coefficients, "coefficient")?;
        Ok(Self { coefficients })
    }

    pub fn from_real(coefficients: &[f64]) -> Result<Self> {
        Self::new(coefficients.iter().map(|&c| C64::new(c, 0.0)).collect())
    }

    /// Expands `prod_n (z - z_n)` one linear factor at a time, so that
    /// `c_m = (-1)^m sigma_m(z)`.
    pub fn from_zeros(zeros: &ZeroVector) -> Self {
        let e = elementary_symmetric(zeros.as_slice());
        let coefficients = e[1..]
            .iter()
            .enumerate()
            .map(|(i, &s)| if i % 2 == 0 { -s } else { s })
            .collect();
        Self { coefficients }
    }

    pub fn degree(&self) -> usize {
        self.coefficients.len()
    }

    /// `[c_1, ..., c_N]`.
    pub fn coefficients(&self) -> &[C64] {
        &self.coefficients
    }

    pub fn max_coefficient_norm(&self) -> f64 {
        self.coefficients.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// Horner evaluation.
    pub fn evaluate(&self, x: C64) -> C64 {
        self.coefficients.iter().fold(C64::new(1.0, 0.0), |acc, &c| acc * x + c)
    }

    /// Value and first derivative in one Horner pass.
    pub fn evaluate_with_derivative(&self, x: C64) -> (C64, C64) {
        let mut p = C64::new(1.0, 0.0);
        let mut dp = C64::new(0.0, 0.0);
        for &c in &self.coefficients {
            dp = dp * x + p;
            p = p * x + c;
        }
        (p, dp)
    }

    /// `sum_k |a_k| |x|^k`, the size of the terms Horner adds up at `x`.
    pub fn evaluation_scale(&self, x: C64) -> f64 {
        let r = x.norm();
        self.coefficients.iter().fold(1.0, |acc, c| acc * r + c.norm())
    }
}

/// Free-function form of [`MonicPolynomial::evaluate`].
pub fn evaluate(p: &MonicPolynomial, x: C64) -> C64 {
    p.evaluate(x)
}

/// Free-function form of [`MonicPolynomial::from_zeros`].
pub fn poly_from_zeros(z: &ZeroVector) -> MonicPolynomial {
    MonicPolynomial::from_zeros(z)
}

/// Ordered zeros `[z_1, ..., z_N]`. The order indexes matrix rows and
/// columns downstream, so it is preserved exactly as given.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ZeroVector(Vec<C64>);

impl ZeroVector {
    pub fn new(zeros: Vec<C64>) -> Result<Self> {
        if zeros.is_empty() {
            return Err(Error::InvalidInput("zero vector must be non-empty".into()));
        }
        ensure_finite(&zeros, "zero")?;
        Ok(Self(zeros))
    }

    pub fn from_real(zeros: &[f64]) -> Result<Self> {
        Self::new(zeros.iter().map(|&x| C64::new(x, 0.0)).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<C64> {
        self.0
    }

    /// `min_{n != l} |z_n - z_l|`.
    pub fn separation(&self) -> f64 {
        min_separation(&self.0)
    }

    pub fn is_near_coincident(&self) -> bool {
        self.separation() < NEAR_COINCIDENT
    }

    /// Copy with entries `a` and `b` (zero-based) exchanged.
    pub fn swapped(&self, a: usize, b: usize) -> Self {
        let mut v = self.0.clone();
        v.swap(a, b);
        Self(v)
    }
}

impl std::ops::Index<usize> for ZeroVector {
    type Output = C64;
    fn index(&self, i: usize) -> &C64 {
        &self.0[i]
    }
}

/// All elementary symmetric functions `[sigma_0 = 1, sigma_1, ..., sigma_N]`
/// by the incremental-product recurrence.
pub fn elementary_symmetric(z: &[C64]) -> Vec<C64> {
    let mut e = vec![C64::new(0.0, 0.0); z.len() + 1];
    e[0] = C64::new(1.0, 0.0);
    for (k, &zk) in z.iter().enumerate() {
        for j in (1..=k + 1).rev() {
            e[j] = e[j] + zk * e[j - 1];
        }
    }
    e
}

fn check_index(what: &'static str, value: i64, min: i64, max: i64) -> Result<()> {
    if value < min || value > max {
        return Err(Error::IndexOutOfRange { what, value, min, max });
    }
    Ok(())
}

/// `sigma_j(z)`; `j = 0` gives the empty product 1.
pub fn sigma(j: i64, z: &ZeroVector) -> Result<C64> {
    check_index("j", j, 0, z.len() as i64)?;
    Ok(elementary_symmetric(z.as_slice())[j as usize])
}

/// `sigma_j(z)` by explicit enumeration of `j`-subsets. Only for
/// cross-checking the recurrence on short vectors.
pub fn sigma_enumerated(j: i64, z: &ZeroVector) -> Result<C64> {
    let n = z.len();
    check_index("j", j, 0, n as i64)?;
    if n > MAX_ENUMERATION_LEN {
        return Err(Error::InvalidInput(format!(
            "subset enumeration limited to N <= {MAX_ENUMERATION_LEN}"
        )));
    }
    let j = j as usize;
    let mut total = C64::new(0.0, 0.0);
    for mask in 0u32..(1 << n) {
        if mask.count_ones() as usize == j {
            total += (0..n)
                .filter(|i| mask & (1 << i) != 0)
                .fold(C64::new(1.0, 0.0), |acc, i| acc * z[i]);
        }
    }
    Ok(total)
}

/// `sigma_{m,j}(z)`: sum of `(j-1)`-fold products of components other than
/// `z_m` (1-based `m`, `j`). `j = 1` is an empty sum and returns exactly 0.
pub fn sigma_excluding(m: i64, j: i64, z: &ZeroVector) -> Result<C64> {
    let n = z.len() as i64;
    check_index("m", m, 1, n)?;
    check_index("j", j, 1, n)?;
    if j == 1 {
        return Ok(C64::new(0.0, 0.0));
    }
    Ok(excluded_symmetric(z.as_slice(), (m - 1) as usize)[(j - 1) as usize])
}

/// `[e_0, ..., e_{N-1}]` of `z` with entry `skip` removed.
pub(crate) fn excluded_symmetric(z: &[C64], skip: usize) -> Vec<C64> {
    let rest: Vec<C64> = z
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != skip)
        .map(|(_, &v)| v)
        .collect();
    elementary_symmetric(&rest)
}

/// First-order change of the coefficients `c_j = (-1)^j sigma_j(z)` under
/// `z -> z + eps v`, i.e. the Jacobian of [`poly_from_zeros`] applied to `v`.
pub fn vieta_jacobian_apply(z: &ZeroVector, v: &[C64]) -> Result<Vec<C64>> {
    let n = z.len();
    if v.len() != n {
        return Err(Error::DimensionMismatch { expected: n, actual: v.len() });
    }
    let zero = C64::new(0.0, 0.0);
    let mut e = vec![zero; n + 1];
    let mut de = vec![zero; n + 1];
    e[0] = C64::new(1.0, 0.0);
    for (k, (&zk, &vk)) in z.as_slice().iter().zip(v).enumerate() {
        for j in (1..=k + 1).rev() {
            de[j] = de[j] + zk * de[j - 1] + vk * e[j - 1];
            e[j] = e[j] + zk * e[j - 1];
        }
    }
    Ok(de[1..]
        .iter()
        .enumerate()
        .map(|(i, &d)| if i % 2 == 0 { -d } else { d })
        .collect())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RootOptions {
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for RootOptions {
    fn default() -> Self {
        Self { tol: 1e-12, max_iter: 500 }
    }
}

/// All `N` zeros of `p` by Aberth–Ehrlich iteration followed by a Newton
/// polish, sorted by `(re, im)`.
///
/// Accepted zeros satisfy `|p(z)| <= tol (1 + max|c|)`, or sit at the
/// rounding floor `64 eps sum_k |a_k| |z|^k` of Horner evaluation when that
/// floor is larger.
pub fn roots(p: &MonicPolynomial, opts: RootOptions) -> Result<ZeroVector> {
    if !(opts.tol > 0.0) {
        return Err(Error::InvalidInput("root tolerance must be positive".into()));
    }
    let n = p.degree();
    let c = p.coefficients();
    if n == 1 {
        return ZeroVector::new(vec![-c[0]]);
    }

    let radius = 1.0 + p.max_coefficient_norm();
    let golden = PI * (3.0 - 5f64.sqrt());
    let mut z: Vec<C64> = (0..n)
        .map(|k| C64::from_polar(radius, 0.4 + golden * k as f64))
        .collect();

    let mut converged = false;
    let mut iterations = 0;
    while iterations < opts.max_iter {
        iterations += 1;
        let mut worst = 0.0f64;
        for k in 0..n {
            let (pv, dp) = p.evaluate_with_derivative(z[k]);
            if pv == C64::new(0.0, 0.0) {
                continue;
            }
            let ratio = pv / dp;
            let repulsion: C64 = (0..n).filter(|&j| j != k).map(|j| (z[k] - z[j]).inv()).sum();
            let mut delta = ratio / (C64::new(1.0, 0.0) - ratio * repulsion);
            if !(delta.re.is_finite() && delta.im.is_finite()) {
                // derivative vanished; nudge off the critical point
                delta = C64::new(1e-3 * radius, 1e-3 * radius);
            }
            z[k] -= delta;
            worst = worst.max(delta.norm() / (1.0 + z[k].norm()));
        }
        if worst <= 4.0 * f64::EPSILON {
            converged = true;
            break;
        }
    }

    for zk in z.iter_mut() {
        for _ in 0..2 {
            let (pv, dp) = p.evaluate_with_derivative(*zk);
            let candidate = *zk - pv / dp;
            if candidate.re.is_finite()
                && candidate.im.is_finite()
                && p.evaluate(candidate).norm() < pv.norm()
            {
                *zk = candidate;
            } else {
                break;
            }
        }
    }

    let bound = opts.tol * (1.0 + p.max_coefficient_norm());
    let acceptable = z.iter().all(|&zk| {
        let r = p.evaluate(zk).norm();
        r <= bound || r <= 64.0 * f64::EPSILON * p.evaluation_scale(zk)
    });
    if !acceptable || (!converged && min_separation(&z) == 0.0) {
        return Err(Error::NonConvergence { what: "Aberth root finder", iterations });
    }

    z.sort_by(lexicographic);
    ZeroVector::new(z)
}
