//! Run configuration, batch pipelines, and serialized reports.
//!
//! JSON output writes every float with 17 significant digits, complex
//! numbers as `{"re": .., "im": ..}`, and keeps wall-clock timing in its own
//! field so that [`VerificationReport::digest`] is reproducible.

use std::io;
use std::str::FromStr;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::dynamics::{self, FlowSystem, IntegrateOptions, Sample};
use crate::eigen::{DenseComplexMatrix, EigenOptions};
use crate::error::{Error, Result};
use crate::hermite::{enumerate_orderings, factorial, hermite_zeros, mu_table_n3, permuted_polynomial, PermutationId};
use crate::matrices::{build, spectrum_check, MatrixKind, Verdict};
use crate::poly::{roots, RootOptions};
use crate::C64;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
/// Largest `N` for which `orderings = all` runs without `force`.
pub const MAX_EXHAUSTIVE_N: usize = 8;
/// Return distance below which a simulated trajectory counts as periodic.
pub const RETURN_THRESHOLD: f64 = 1e-5;

pub const NOTE_MU5: &str = "N = 3, mu = 5 (word 1,3,2): p(z) = z^3 - sqrt(3/2) z^2 + sqrt(3/2) z has zeros \
{0, 0.6124 +/- 0.9219i}; the printed table repeats the real zeros of mu = 4 \
{-1.8772, 0, 0.6524} for this row, which is a transcription duplicate.";
pub const NOTE_FREQUENCY: &str = "Second-order linear evolution uses angular frequency omega_m = sqrt(lambda_m) \
of the M2 eigenvalue lambda_m = m^2; the source text writes the same symbol for the matrix eigenvalue and \
for the argument of cos/sin, and only the square-root reading is 2*pi-periodic.";

/// Exit status for an error: 2 usage, 3 numerical failure, 4 collision.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::InvalidInput(_) | Error::IndexOutOfRange { .. } | Error::DimensionMismatch { .. } => 2,
        Error::NearCollision { .. } | Error::CollisionAbort { .. } => 4,
        _ => 3,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Complex {
    pub re: f64,
    pub im: f64,
}

impl From<C64> for Complex {
    fn from(z: C64) -> Self {
        Self { re: z.re, im: z.im }
    }
}

impl From<Complex> for C64 {
    fn from(z: Complex) -> Self {
        C64::new(z.re, z.im)
    }
}

fn complexes(values: &[C64]) -> Vec<Complex> {
    values.iter().copied().map(Complex::from).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Json,
    Csv,
}

impl FromStr for OutputFormat {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "json" => Ok(OutputFormat::Json),
            "csv" => Ok(OutputFormat::Csv),
            other => Err(Error::InvalidInput(format!("unknown format {other:?}"))),
        }
    }
}

/// Which coefficient orderings a run visits.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "lowercase")]
pub enum OrderingSelection {
    All,
    Ranks { ranks: Vec<u128> },
    Sample { k: usize, seed: u64 },
}

impl OrderingSelection {
    /// Parses `all`, `sample:K`, `sample:K:SEED`, or comma-separated ranks.
    /// `default_seed` applies to `sample:K`.
    pub fn parse(s: &str, default_seed: u64) -> Result<Self> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("all") {
            return Ok(Self::All);
        }
        let bad = || Error::InvalidInput(format!("bad ordering selection {s:?}"));
        if let Some(rest) = s.strip_prefix("sample:") {
            let mut parts = rest.split(':');
            let k = parts.next().ok_or_else(bad)?.parse().map_err(|_| bad())?;
            let seed = match parts.next() {
                Some(p) => p.parse().map_err(|_| bad())?,
                None => default_seed,
            };
            if parts.next().is_some() {
                return Err(bad());
            }
            return Ok(Self::Sample { k, seed });
        }
        let ranks = s
            .split(',')
            .map(|r| r.trim().parse::<u128>().map_err(|_| bad()))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self::Ranks { ranks })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub root_tol: f64,
    pub eig_tol: f64,
    pub pass_tol: f64,
    pub ode_rel_tol: f64,
    pub ode_abs_tol: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { root_tol: 1e-12, eig_tol: f64::EPSILON, pass_tol: 1e-6, ode_rel_tol: 1e-10, ode_abs_tol: 1e-12 }
    }
}

impl Tolerances {
    fn validate(&self) -> Result<()> {
        let all = [self.root_tol, self.eig_tol, self.pass_tol, self.ode_rel_tol, self.ode_abs_tol];
        if all.iter().all(|t| *t > 0.0 && t.is_finite()) {
            Ok(())
        } else {
            Err(Error::InvalidInput("tolerances must be positive and finite".into()))
        }
    }

    pub fn root_options(&self) -> RootOptions {
        RootOptions { tol: self.root_tol, ..RootOptions::default() }
    }

    pub fn eigen_options(&self) -> EigenOptions {
        EigenOptions { tol: self.eig_tol, ..EigenOptions::default() }
    }

    pub fn integrate_options(&self) -> IntegrateOptions {
        IntegrateOptions { rel_tol: self.ode_rel_tol, abs_tol: self.ode_abs_tol, ..IntegrateOptions::default() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub n: usize,
    pub kinds: Vec<MatrixKind>,
    pub orderings: OrderingSelection,
    pub tolerances: Tolerances,
    pub format: OutputFormat,
    pub seed: u64,
    pub force: bool,
}

impl RunConfig {
    pub fn new(n: usize) -> Self {
        Self {
            n,
            kinds: vec![MatrixKind::M1, MatrixKind::M2],
            orderings: OrderingSelection::All,
            tolerances: Tolerances::default(),
            format: OutputFormat::Json,
            seed: 42,
            force: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        check_order(self.n)?;
        if self.kinds.is_empty() {
            return Err(Error::InvalidInput("at least one matrix kind is required".into()));
        }
        self.tolerances.validate()?;
        match &self.orderings {
            OrderingSelection::All if self.n > MAX_EXHAUSTIVE_N && !self.force => Err(Error::InvalidInput(format!(
                "all orderings of N = {} is {} builds; pass force to run it anyway",
                self.n,
                factorial(self.n).map_or("too many".to_string(), |f| f.to_string())
            ))),
            OrderingSelection::Ranks { ranks } if ranks.is_empty() => {
                Err(Error::InvalidInput("rank list is empty".into()))
            }
            OrderingSelection::Sample { k: 0, .. } => Err(Error::InvalidInput("sample size must be positive".into())),
            _ => Ok(()),
        }
    }

    /// The orderings this configuration visits, in ascending rank.
    pub fn resolve_orderings(&self) -> Result<Vec<PermutationId>> {
        self.validate()?;
        let n = self.n;
        match &self.orderings {
            OrderingSelection::All => Ok(enumerate_orderings(n, None)?.collect()),
            OrderingSelection::Ranks { ranks } => ranks.iter().map(|&r| PermutationId::from_ordinal(n, r)).collect(),
            OrderingSelection::Sample { k, seed } => {
                let total = factorial(n).ok_or_else(|| Error::Overflow(format!("{n}! exceeds u128")))?;
                if *k as u128 >= total {
                    return Ok(enumerate_orderings(n, None)?.collect());
                }
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                let mut picked = std::collections::BTreeSet::new();
                while picked.len() < *k {
                    picked.insert(rng.gen_range(1..=total));
                }
                picked.into_iter().map(|r| PermutationId::from_ordinal(n, r)).collect()
            }
        }
    }
}

fn check_order(n: usize) -> Result<()> {
    if (2..=crate::hermite::MAX_ORDER).contains(&n) {
        Ok(())
    } else {
        Err(Error::IndexOutOfRange { what: "N", value: n as i64, min: 2, max: crate::hermite::MAX_ORDER as i64 })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OrderingId {
    pub rank: u128,
    pub word: Vec<usize>,
}

impl From<&PermutationId> for OrderingId {
    fn from(p: &PermutationId) -> Self {
        Self { rank: p.ordinal, word: p.word.clone() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OrderingResult {
    pub ordering: OrderingId,
    pub kind: MatrixKind,
    pub verdict: Verdict,
    /// Sorted by real part, then imaginary part.
    pub eigenvalues: Vec<Complex>,
    pub expected: Vec<u64>,
    pub max_deviation: Option<f64>,
    pub trace_deviation: Option<f64>,
    pub determinant_deviation: Option<f64>,
    pub zero_separation: Option<f64>,
    pub conditioning_warning: bool,
    /// Numerical failure that prevented a verdict.
    pub error: Option<String>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub pass: usize,
    pub fail: usize,
    pub inconclusive: usize,
    /// Results without a verdict because a numerical stage failed.
    pub errors: usize,
    pub max_deviation: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub wall_seconds: f64,
    pub jobs: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub config: RunConfig,
    pub results: Vec<OrderingResult>,
    pub aggregate: Aggregate,
    pub notes: Vec<String>,
    pub version: String,
    pub timing: Option<Timing>,
}

impl VerificationReport {
    /// Hex SHA-256 of the JSON report with timing removed.
    pub fn digest(&self) -> String {
        let stripped = VerificationReport { timing: None, ..self.clone() };
        let bytes = to_json_bytes(&stripped, false).expect("report serializes");
        Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect()
    }

    /// 0 when nothing failed, 3 when a numerical stage failed, 1 on a
    /// spectral failure.
    pub fn exit_code(&self) -> i32 {
        if self.aggregate.errors > 0 {
            3
        } else if self.aggregate.fail > 0 {
            1
        } else {
            0
        }
    }
}

fn verify_one(h: &crate::hermite::HermiteZeros, perm: &PermutationId, kinds: &[MatrixKind], tol: &Tolerances) -> Vec<OrderingResult> {
    let failed = |kind, err: &Error| OrderingResult {
        ordering: perm.into(),
        kind,
        verdict: Verdict::Inconclusive,
        eigenvalues: vec![],
        expected: kind.expected_spectrum(perm.n),
        max_deviation: None,
        trace_deviation: None,
        determinant_deviation: None,
        zero_separation: None,
        conditioning_warning: false,
        error: Some(err.to_string()),
    };
    let zeros = permuted_polynomial(h, perm).and_then(|p| Ok((roots(&p, tol.root_options())?, p)));
    let (z, p) = match zeros {
        Ok(v) => v,
        Err(e) => return kinds.iter().map(|&k| failed(k, &e)).collect(),
    };
    kinds
        .iter()
        .map(|&kind| {
            let checked = build(kind, &z, p.coefficients())
                .and_then(|m| Ok((spectrum_check(&m, tol.pass_tol, tol.eigen_options())?, m)));
            match checked {
                Ok((report, m)) => OrderingResult {
                    ordering: perm.into(),
                    kind,
                    verdict: report.verdict,
                    eigenvalues: complexes(&report.eigenvalues),
                    expected: report.expected,
                    max_deviation: Some(report.max_deviation),
                    trace_deviation: Some(m.trace_deviation()),
                    determinant_deviation: Some(m.determinant_deviation()),
                    zero_separation: Some(m.zero_separation),
                    conditioning_warning: m.conditioning_warning,
                    error: None,
                },
                Err(e) => failed(kind, &e),
            }
        })
        .collect()
}

/// Permute, find zeros, build and check the spectrum for every selected
/// ordering and kind. Work is spread over `jobs` threads; results keep the
/// ordering of the selection.
pub fn run_verification(config: &RunConfig, jobs: usize) -> Result<VerificationReport> {
    let start = Instant::now();
    let orderings = config.resolve_orderings()?;
    let h = hermite_zeros(config.n)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| Error::InvalidInput(format!("thread pool: {e}")))?;
    let results: Vec<OrderingResult> = pool.install(|| {
        orderings
            .par_iter()
            .flat_map_iter(|perm| verify_one(&h, perm, &config.kinds, &config.tolerances))
            .collect()
    });

    let mut aggregate = Aggregate::default();
    for r in &results {
        match r.verdict {
            Verdict::Pass => aggregate.pass += 1,
            Verdict::Fail => aggregate.fail += 1,
            Verdict::Inconclusive => aggregate.inconclusive += 1,
        }
        if r.error.is_some() {
            aggregate.errors += 1;
        }
        if let Some(d) = r.max_deviation {
            aggregate.max_deviation = aggregate.max_deviation.max(d);
        }
    }
    let mut notes = Vec::new();
    if config.n == 3 {
        notes.push(NOTE_MU5.to_string());
    }
    if config.kinds.contains(&MatrixKind::M2) {
        notes.push(NOTE_FREQUENCY.to_string());
    }
    Ok(VerificationReport {
        config: config.clone(),
        results,
        aggregate,
        notes,
        version: VERSION.to_string(),
        timing: Some(Timing { wall_seconds: start.elapsed().as_secs_f64(), jobs: jobs.max(1) }),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HermiteReport {
    pub n: usize,
    pub zeros: Vec<f64>,
    pub residual_first: f64,
    pub residual_second: f64,
    pub version: String,
}

pub fn hermite_report(n: usize) -> Result<HermiteReport> {
    check_order(n)?;
    let h = hermite_zeros(n)?;
    Ok(HermiteReport {
        n,
        zeros: h.zeros,
        residual_first: h.residual_first,
        residual_second: h.residual_second,
        version: VERSION.to_string(),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimulationConfig {
    pub system: FlowSystem,
    pub n: usize,
    pub rank: u128,
    pub t_end: f64,
    /// Perturbation radius around the equilibrium (and velocity scale for
    /// second-order flows).
    pub radius: f64,
    pub seed: u64,
    pub tolerances: Tolerances,
    /// Look for a return after up to this many periods when the first one
    /// misses.
    pub detect_period: Option<usize>,
}

impl SimulationConfig {
    pub fn new(system: FlowSystem, n: usize) -> Self {
        Self {
            system,
            n,
            rank: 1,
            t_end: dynamics::PERIOD,
            radius: 1e-2,
            seed: 42,
            tolerances: Tolerances::default(),
            detect_period: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrajectorySample {
    pub t: f64,
    pub state: Vec<Complex>,
}

impl From<&Sample> for TrajectorySample {
    fn from(s: &Sample) -> Self {
        Self { t: s.t, state: complexes(&s.state) }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimulationReport {
    pub config: SimulationConfig,
    pub ordering: OrderingId,
    pub equilibrium: Vec<Complex>,
    pub return_distance: f64,
    pub returned: bool,
    pub threshold: f64,
    pub accepted_steps: usize,
    pub rejected_steps: usize,
    pub min_separation_seen: f64,
    pub period_multiple: Option<usize>,
    pub samples: Vec<TrajectorySample>,
    pub notes: Vec<String>,
    pub version: String,
}

/// Integrates a seeded perturbation of the equilibrium for the chosen
/// ordering and reports how far the state is from its start at `t_end`.
pub fn run_simulation(config: &SimulationConfig) -> Result<SimulationReport> {
    check_order(config.n)?;
    config.tolerances.validate()?;
    if !(config.t_end >= 0.0 && config.t_end.is_finite()) {
        return Err(Error::InvalidInput("t_end must be finite and non-negative".into()));
    }
    if !(config.radius >= 0.0 && config.radius.is_finite()) {
        return Err(Error::InvalidInput("radius must be finite and non-negative".into()));
    }
    let perm = PermutationId::from_ordinal(config.n, config.rank)?;
    let eq = dynamics::equilibrium(config.system, config.n, &perm, config.tolerances.root_options())?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let y0 = dynamics::perturbed_state(config.system, &eq, config.radius, &mut rng);
    let opts = config.tolerances.integrate_options();

    let (samples, accepted, rejected, min_sep, distance) = if config.t_end == 0.0 {
        let sample = Sample { t: 0.0, state: y0.clone() };
        let sep = dynamics::Flow::new(config.system, config.n);
        let min_sep = dynamics::VectorField::separation(&sep, &y0);
        (vec![sample], 0, 0, min_sep, 0.0)
    } else {
        let rec = dynamics::integrate(config.system, &y0, config.t_end, &opts)?;
        let d = rec.return_distance();
        (rec.samples, rec.accepted, rec.rejected, rec.min_separation_seen, d)
    };
    let returned = distance < RETURN_THRESHOLD;
    let period_multiple = match config.detect_period {
        Some(k) if k > 0 && !returned => dynamics::period_multiple(config.system, &y0, k, RETURN_THRESHOLD, &opts)?,
        _ => None,
    };
    let mut notes = Vec::new();
    if let Some(k) = period_multiple.filter(|&k| k > 1) {
        notes.push(format!("state returns after {k} periods: zeros exchanged places along the way"));
    }
    Ok(SimulationReport {
        config: config.clone(),
        ordering: (&perm).into(),
        equilibrium: complexes(&eq),
        return_distance: distance,
        returned,
        threshold: RETURN_THRESHOLD,
        accepted_steps: accepted,
        rejected_steps: rejected,
        min_separation_seen: min_sep,
        period_multiple,
        samples: samples.iter().map(TrajectorySample::from).collect(),
        notes,
        version: VERSION.to_string(),
    })
}

/// Default finite-difference step per kind.
pub fn default_fd_step(kind: MatrixKind) -> f64 {
    match kind {
        MatrixKind::M1 => 1e-6,
        MatrixKind::M2 => 1e-5,
    }
}

/// Agreement required between closed form and finite differences.
pub fn oracle_tolerance(kind: MatrixKind) -> f64 {
    match kind {
        MatrixKind::M1 => 1e-5,
        MatrixKind::M2 => 1e-4,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OracleReport {
    pub n: usize,
    pub ordering: OrderingId,
    pub kind: MatrixKind,
    pub h: f64,
    pub deviation: f64,
    pub tolerance: f64,
    pub pass: bool,
    pub version: String,
}

pub fn run_oracle(n: usize, rank: u128, kind: MatrixKind, h: Option<f64>, tol: &Tolerances) -> Result<OracleReport> {
    check_order(n)?;
    let perm = PermutationId::from_ordinal(n, rank)?;
    let p = permuted_polynomial(&hermite_zeros(n)?, &perm)?;
    let z = roots(&p, tol.root_options())?;
    let h = h.unwrap_or_else(|| default_fd_step(kind));
    let deviation = dynamics::oracle_deviation(kind, &z, p.coefficients(), h)?;
    let tolerance = oracle_tolerance(kind);
    Ok(OracleReport {
        n,
        ordering: (&perm).into(),
        kind,
        h,
        deviation,
        tolerance,
        pass: deviation < tolerance,
        version: VERSION.to_string(),
    })
}

/// Finite differences of a fixed linear field `A v` against `A`; exact up
/// to rounding.
pub fn oracle_self_test() -> Result<f64> {
    let a = DenseComplexMatrix::from_rows(vec![
        vec![C64::new(2.0, -1.0), C64::new(0.5, 0.25), C64::new(-1.0, 0.0)],
        vec![C64::new(0.0, 3.0), C64::new(-0.75, 0.0), C64::new(1.5, 1.5)],
        vec![C64::new(1.0, 1.0), C64::new(0.0, -2.0), C64::new(4.0, 0.0)],
    ])?;
    let at = [C64::new(0.3, -0.2), C64::new(-1.1, 0.4), C64::new(0.7, 0.9)];
    let jac = dynamics::fd_jacobian_of(|v| Ok(a.mul_vec(v)), &at, 1e-5)?;
    Ok((&jac - &a).max_abs() / a.max_abs())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MuRow {
    pub mu: u32,
    pub word: Vec<usize>,
    pub rank: u128,
    pub coefficients: Vec<f64>,
    pub zeros: Vec<Complex>,
}

/// The six `N = 3` labels of the original worked example, with ranks and
/// recomputed zeros.
pub fn mu_table(tol: &Tolerances) -> Result<Vec<MuRow>> {
    let h = hermite_zeros(3)?;
    mu_table_n3()
        .into_iter()
        .map(|(mu, perm)| {
            let p = permuted_polynomial(&h, &perm)?;
            let z = roots(&p, tol.root_options())?;
            Ok(MuRow {
                mu,
                rank: perm.ordinal,
                coefficients: perm.apply(&h.zeros),
                word: perm.word,
                zeros: complexes(z.as_slice()),
            })
        })
        .collect()
}

/// Writes `f64` with 17 significant digits, delegating layout to either
/// the compact or the pretty formatter.
struct Precise<F>(F);

macro_rules! delegate {
    ($($name:ident($($arg:ident: $ty:ty),*)),* $(,)?) => {
        $(fn $name<W: ?Sized + io::Write>(&mut self, w: &mut W $(, $arg: $ty)*) -> io::Result<()> {
            self.0.$name(w $(, $arg)*)
        })*
    };
}

impl<F: serde_json::ser::Formatter> serde_json::ser::Formatter for Precise<F> {
    fn write_f64<W: ?Sized + io::Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        write!(w, "{value:.16e}")
    }

    delegate!(
        begin_array(),
        end_array(),
        begin_array_value(first: bool),
        end_array_value(),
        begin_object(),
        end_object(),
        begin_object_key(first: bool),
        end_object_key(),
        begin_object_value(),
        end_object_value(),
    );
}

pub fn to_json_bytes<T: Serialize>(value: &T, pretty: bool) -> Result<Vec<u8>> {
    let mut out = Vec::new();
    let res = if pretty {
        let mut ser = serde_json::Serializer::with_formatter(&mut out, Precise(serde_json::ser::PrettyFormatter::new()));
        value.serialize(&mut ser)
    } else {
        let mut ser = serde_json::Serializer::with_formatter(&mut out, Precise(serde_json::ser::CompactFormatter));
        value.serialize(&mut ser)
    };
    res.map_err(|e| Error::InvalidInput(format!("serialization failed: {e}")))?;
    Ok(out)
}

pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut bytes = to_json_bytes(value, true)?;
    bytes.push(b'\n');
    Ok(String::from_utf8(bytes).expect("JSON is UTF-8"))
}

fn csv_string<R: Serialize>(rows: impl IntoIterator<Item = R>) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in rows {
        w.serialize(row).map_err(|e| Error::InvalidInput(format!("csv: {e}")))?;
    }
    let bytes = w.into_inner().map_err(|e| Error::InvalidInput(format!("csv: {e}")))?;
    Ok(String::from_utf8(bytes).expect("CSV is UTF-8"))
}

#[derive(Serialize)]
struct VerificationRow<'a> {
    rank: String,
    word: String,
    kind: MatrixKind,
    verdict: Verdict,
    max_deviation: Option<f64>,
    trace_deviation: Option<f64>,
    determinant_deviation: Option<f64>,
    zero_separation: Option<f64>,
    conditioning_warning: bool,
    eigenvalues: String,
    error: Option<&'a str>,
}

fn join<T: ToString>(values: &[T], sep: &str) -> String {
    values.iter().map(T::to_string).collect::<Vec<_>>().join(sep)
}

/// `a+bi` tokens, space separated, each part in shortest round-trip form.
fn join_complex(values: &[Complex]) -> String {
    values
        .iter()
        .map(|z| format!("{:?}{}{:?}i", z.re, if z.im.is_sign_negative() { "-" } else { "+" }, z.im.abs()))
        .collect::<Vec<_>>()
        .join(" ")
}

/// One row per (ordering, kind).
pub fn verification_csv(report: &VerificationReport) -> Result<String> {
    csv_string(report.results.iter().map(|r| VerificationRow {
        rank: r.ordering.rank.to_string(),
        word: join(&r.ordering.word, " "),
        kind: r.kind,
        verdict: r.verdict,
        max_deviation: r.max_deviation,
        trace_deviation: r.trace_deviation,
        determinant_deviation: r.determinant_deviation,
        zero_separation: r.zero_separation,
        conditioning_warning: r.conditioning_warning,
        eigenvalues: join_complex(&r.eigenvalues),
        error: r.error.as_deref(),
    }))
}

pub fn hermite_csv(report: &HermiteReport) -> Result<String> {
    #[derive(Serialize)]
    struct Row {
        index: usize,
        zero: f64,
    }
    let mut out = csv_string(report.zeros.iter().enumerate().map(|(i, &zero)| Row { index: i + 1, zero }))?;
    out.push_str(&format!("# residual_first,{}\n# residual_second,{}\n", report.residual_first, report.residual_second));
    Ok(out)
}

/// One row per (sample time, particle); second-order states list
/// velocities after positions.
pub fn simulation_csv(report: &SimulationReport) -> Result<String> {
    #[derive(Serialize)]
    struct Row {
        t: f64,
        index: usize,
        re: f64,
        im: f64,
    }
    csv_string(report.samples.iter().flat_map(|s| {
        s.state.iter().enumerate().map(move |(i, z)| Row { t: s.t, index: i + 1, re: z.re, im: z.im })
    }))
}

pub fn oracle_csv(report: &OracleReport) -> Result<String> {
    #[derive(Serialize)]
    struct Row {
        n: usize,
        rank: String,
        word: String,
        kind: MatrixKind,
        h: f64,
        deviation: f64,
        tolerance: f64,
        pass: bool,
    }
    csv_string([Row {
        n: report.n,
        rank: report.ordering.rank.to_string(),
        word: join(&report.ordering.word, " "),
        kind: report.kind,
        h: report.h,
        deviation: report.deviation,
        tolerance: report.tolerance,
        pass: report.pass,
    }])
}

pub fn mu_table_csv(rows: &[MuRow]) -> Result<String> {
    #[derive(Serialize)]
    struct Row {
        mu: u32,
        rank: String,
        word: String,
        coefficients: String,
        zeros: String,
    }
    csv_string(rows.iter().map(|r| Row {
        mu: r.mu,
        rank: r.rank.to_string(),
        word: join(&r.word, " "),
        coefficients: r.coefficients.iter().map(|c| format!("{c:?}")).collect::<Vec<_>>().join(" "),
        zeros: join_complex(&r.zeros),
    }))
}
