//! The matrices `M1` and `M2` assembled from the zeros `z` of a permuted
//! polynomial and its coefficients `c`, and certification of their spectra
//! `1..=N` and `1, 4, ..., N^2`.

use serde::{Deserialize, Serialize};

use crate::eigen::{eigenvalues, DenseComplexMatrix, EigenOptions};
use crate::error::{Error, Result};
use crate::hermite::{factorial, PermutationId};
use crate::poly::{excluded_symmetric, lexicographic, min_separation, ZeroVector};
use crate::C64;

/// Separation below which a build is flagged as ill conditioned.
pub const CONDITIONING_THRESHOLD: f64 = 1e-6;
/// Default pass/fail tolerance on eigenvalue deviation.
pub const DEFAULT_PASS_TOL: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum MatrixKind {
    M1,
    M2,
}

impl MatrixKind {
    /// `(factor, power)` in `w_jm + factor sum_s (w_jm - w_sm) / (c_j - c_s)^power`.
    fn coupling(self) -> (f64, i32) {
        match self {
            MatrixKind::M1 => (1.0, 2),
            MatrixKind::M2 => (6.0, 4),
        }
    }

    /// `m` for `M1`, `m^2` for `M2`, `m = 1..=n`.
    pub fn expected_spectrum(self, n: usize) -> Vec<u64> {
        (1..=n as u64)
            .map(|m| match self {
                MatrixKind::M1 => m,
                MatrixKind::M2 => m * m,
            })
            .collect()
    }

    pub fn expected_trace(self, n: usize) -> f64 {
        let n = n as f64;
        match self {
            MatrixKind::M1 => n * (n + 1.0) / 2.0,
            MatrixKind::M2 => n * (n + 1.0) * (2.0 * n + 1.0) / 6.0,
        }
    }

    pub fn expected_determinant(self, n: usize) -> f64 {
        let f = factorial(n).map_or(f64::INFINITY, |f| f as f64);
        match self {
            MatrixKind::M1 => f,
            MatrixKind::M2 => f * f,
        }
    }
}

impl std::fmt::Display for MatrixKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            MatrixKind::M1 => "M1",
            MatrixKind::M2 => "M2",
        })
    }
}

impl std::str::FromStr for MatrixKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "m1" | "1" => Ok(MatrixKind::M1),
            "m2" | "2" => Ok(MatrixKind::M2),
            other => Err(Error::InvalidInput(format!("unknown matrix kind {other:?}"))),
        }
    }
}

/// `w_{j,m} = (-1)^j [delta_{j1} + sigma_{m,j}(z)]`, stored with zero-based
/// `(j, m)`. Row `j = 1` is identically `-1`.
#[derive(Clone, Debug, PartialEq)]
pub struct WTable {
    pub entries: DenseComplexMatrix,
}

pub fn w_table(z: &ZeroVector) -> WTable {
    let n = z.len();
    let mut entries = DenseComplexMatrix::zeros(n);
    for m in 0..n {
        // delta_{j1} + sigma_{m,j} is e_{j-1} of z without z_m, for every j
        let e = excluded_symmetric(z.as_slice(), m);
        for j in 0..n {
            let sign = if j % 2 == 0 { -1.0 } else { 1.0 };
            entries[(j, m)] = e[j] * sign;
        }
    }
    WTable { entries }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiophantineMatrix {
    pub kind: MatrixKind,
    pub n: usize,
    pub entries: DenseComplexMatrix,
    pub source_perm: Option<PermutationId>,
    /// `min |z_n - z_l|`
    pub zero_separation: f64,
    /// `min |c_j - c_s|`
    pub coeff_separation: f64,
    pub conditioning_warning: bool,
}

impl DiophantineMatrix {
    /// Wraps an arbitrary matrix, e.g. for checking a hand-built spectrum.
    pub fn from_entries(kind: MatrixKind, entries: DenseComplexMatrix) -> Self {
        Self {
            kind,
            n: entries.dim(),
            entries,
            source_perm: None,
            zero_separation: f64::INFINITY,
            coeff_separation: f64::INFINITY,
            conditioning_warning: false,
        }
    }

    pub fn with_source(mut self, perm: PermutationId) -> Self {
        self.source_perm = Some(perm);
        self
    }

    /// `|tr M - expected| / expected`.
    pub fn trace_deviation(&self) -> f64 {
        let expected = self.kind.expected_trace(self.n);
        (self.entries.trace() - expected).norm() / expected
    }

    /// `|det M - expected| / expected`.
    pub fn determinant_deviation(&self) -> f64 {
        let expected = self.kind.expected_determinant(self.n);
        (self.entries.determinant() - expected).norm() / expected
    }
}

/// Builds `M1` (`kind = M1`) or `M2` (`kind = M2`):
///
/// `M_nm = -[prod_{l != n} (z_n - z_l)]^-1 sum_j z_n^(N-j) [w_jm + k sum_{s != j} (w_jm - w_sm) / (c_j - c_s)^p]`
///
/// with `(k, p) = (1, 2)` for `M1` and `(6, 4)` for `M2`.
pub fn build(kind: MatrixKind, z: &ZeroVector, c: &[C64]) -> Result<DiophantineMatrix> {
    let n = z.len();
    if c.len() != n {
        return Err(Error::DimensionMismatch { expected: n, actual: c.len() });
    }
    crate::poly::ensure_finite(c, "coefficient")?;
    let zs = z.as_slice();
    let zero_separation = min_separation(zs);
    let coeff_separation = min_separation(c);
    if zero_separation == 0.0 {
        return Err(Error::SingularConfiguration("two zeros coincide".into()));
    }
    if coeff_separation == 0.0 {
        return Err(Error::SingularConfiguration("two coefficients coincide".into()));
    }

    let (factor, power) = kind.coupling();
    let w = w_table(z).entries;
    let mut coupling = DenseComplexMatrix::zeros(n);
    for j in 0..n {
        let mut diag = C64::new(1.0, 0.0);
        for s in 0..n {
            if s != j {
                let d = (c[j] - c[s]).powi(-power) * factor;
                coupling[(j, s)] = -d;
                diag += d;
            }
        }
        coupling[(j, j)] = diag;
    }
    // inner[j][m] = w_jm + k sum_s (w_jm - w_sm)/(c_j - c_s)^p
    let inner = &coupling * &w;

    let mut entries = DenseComplexMatrix::zeros(n);
    for (row, &zn) in zs.iter().enumerate() {
        let prod: C64 = zs
            .iter()
            .enumerate()
            .filter(|&(l, _)| l != row)
            .map(|(_, &zl)| zn - zl)
            .product();
        let pref = -prod.inv();
        for m in 0..n {
            // Horner over j: sum_j z_n^(N-j) inner[j][m]
            let acc = (0..n).fold(C64::new(0.0, 0.0), |acc, j| acc * zn + inner[(j, m)]);
            entries[(row, m)] = pref * acc;
        }
    }
    crate::poly::ensure_finite(entries.as_slice(), "matrix entry")?;
    Ok(DiophantineMatrix {
        kind,
        n,
        entries,
        source_perm: None,
        zero_separation,
        coeff_separation,
        conditioning_warning: zero_separation < CONDITIONING_THRESHOLD
            || coeff_separation < CONDITIONING_THRESHOLD,
    })
}

pub fn build_m1(z: &ZeroVector, c: &[C64]) -> Result<DiophantineMatrix> {
    build(MatrixKind::M1, z, c)
}

pub fn build_m2(z: &ZeroVector, c: &[C64]) -> Result<DiophantineMatrix> {
    build(MatrixKind::M2, z, c)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
    /// Failed, but the build carried a conditioning warning.
    Inconclusive,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectrumReport {
    pub kind: MatrixKind,
    /// Sorted by real part, then imaginary part.
    pub eigenvalues: Vec<C64>,
    pub expected: Vec<u64>,
    pub max_deviation: f64,
    pub pass: bool,
    pub verdict: Verdict,
    pub perm: Option<PermutationId>,
}

/// Sorted eigenvalues against `1..=N` (or their squares), compared
/// position by position.
pub fn spectrum_check(m: &DiophantineMatrix, tol: f64, eig: EigenOptions) -> Result<SpectrumReport> {
    if !(tol > 0.0) {
        return Err(Error::InvalidInput("spectrum tolerance must be positive".into()));
    }
    let mut values = eigenvalues(&m.entries, eig)?.eigenvalues;
    values.sort_by(lexicographic);
    let expected = m.kind.expected_spectrum(m.n);
    let max_deviation = values
        .iter()
        .zip(&expected)
        .map(|(l, &e)| (l - e as f64).norm())
        .fold(0.0, f64::max);
    let pass = max_deviation <= tol;
    let verdict = match (pass, m.conditioning_warning) {
        (true, _) => Verdict::Pass,
        (false, true) => Verdict::Inconclusive,
        (false, false) => Verdict::Fail,
    };
    Ok(SpectrumReport {
        kind: m.kind,
        eigenvalues: values,
        expected,
        max_deviation,
        pass,
        verdict,
        perm: m.source_perm.clone(),
    })
}

/// `max |build(P z) - P build(z) P^T|` for the transposition `P` of the
/// 1-based indices `swap = (a, b)`, `a < b`.
pub fn permutation_similarity_check(
    z: &ZeroVector,
    c: &[C64],
    kind: MatrixKind,
    swap: (usize, usize),
) -> Result<f64> {
    let n = z.len();
    let (a, b) = swap;
    if !(1 <= a && a < b && b <= n) {
        return Err(Error::InvalidInput(format!("swap {swap:?} must satisfy 1 <= a < b <= {n}")));
    }
    let base = build(kind, z, c)?;
    let swapped = build(kind, &z.swapped(a - 1, b - 1), c)?;
    let mut perm: Vec<usize> = (0..n).collect();
    perm.swap(a - 1, b - 1);
    let conjugated = base.entries.permuted(&perm);
    Ok((&swapped.entries - &conjugated).max_abs())
}
