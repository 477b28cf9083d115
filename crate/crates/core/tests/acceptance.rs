//! End-to-end acceptance run: one PASS/FAIL line per criterion, non-zero
//! exit if any criterion fails.

use std::process::ExitCode;
use std::time::Instant;

use diophantine_core::dynamics::{
    equilibrium, integrate, integrate_field, max_distance, oracle_deviation, perturbed_state, period_multiple,
    random_direction, DeviationFlow, Flow, FlowSystem, IntegrateOptions, LinearModes, PERIOD,
};
use diophantine_core::eigen::{DenseComplexMatrix, EigenOptions};
use diophantine_core::hermite::{enumerate_orderings, factorial, hermite_zeros, permuted_polynomial, PermutationId};
use diophantine_core::matrices::{build, permutation_similarity_check, MatrixKind, Verdict};
use diophantine_core::poly::{lexicographic, poly_from_zeros, roots, RootOptions, ZeroVector};
use diophantine_core::report::{default_fd_step, mu_table, run_verification, RunConfig, Tolerances};
use diophantine_core::{Result, C64};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

type Check = fn() -> Result<Outcome>;

struct Outcome {
    pass: bool,
    detail: String,
}

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn jobs() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

fn poly_coefficients_of(zeros: &[C64]) -> Result<Vec<C64>> {
    Ok(poly_from_zeros(&ZeroVector::new(zeros.to_vec())?).coefficients().to_vec())
}

fn equilibrium_of(n: usize, perm: &PermutationId) -> Result<(ZeroVector, Vec<C64>)> {
    let p = permuted_polynomial(&hermite_zeros(n)?, perm)?;
    Ok((roots(&p, RootOptions::default())?, p.coefficients().to_vec()))
}

/// Criteria 1 and 2: every ordering of N = 2..=7 has the integer spectrum.
fn spectrum_sweep(kind: MatrixKind) -> Result<Outcome> {
    let mut worst: f64 = 0.0;
    let mut bad = 0;
    let mut total = 0;
    for n in 2..=7 {
        let config = RunConfig { kinds: vec![kind], ..RunConfig::new(n) };
        let report = run_verification(&config, jobs())?;
        total += report.results.len();
        bad += report.results.iter().filter(|r| r.verdict != Verdict::Pass).count();
        worst = worst.max(report.aggregate.max_deviation);
    }
    Ok(Outcome {
        pass: bad == 0 && worst < 1e-6,
        detail: format!("{kind}: {total} orderings, N = 2..7, {bad} not passing, max deviation {worst:.2e} (< 1e-6)"),
    })
}

fn n2_closed_form(z: &[C64], diagonal: f64, k: f64) -> Result<DenseComplexMatrix> {
    let (z1, z2) = (z[0], z[1]);
    let d = z1 - z2;
    let one = c(1.0, 0.0);
    let q = (one - z1 * z2) * k / d;
    DenseComplexMatrix::from_rows(vec![
        vec![c(diagonal, 0.0) - q, -(one - z1 * z1) * k / d],
        vec![(one - z2 * z2) * k / d, c(diagonal, 0.0) + q],
    ])
}

fn sorted(mut v: Vec<C64>) -> Vec<C64> {
    v.sort_by(lexicographic);
    v
}

fn pointwise_gap(a: &[C64], b: &[C64]) -> f64 {
    max_distance(&sorted(a.to_vec()), &sorted(b.to_vec()))
}

/// Criterion 3: closed forms for N = 2 and the printed N = 3 zero table.
fn golden_values() -> Result<Outcome> {
    let r2 = 2f64.sqrt();
    let mut n2: f64 = 0.0;
    for s in [-1.0, 1.0] {
        let coeffs = vec![c(-s / r2, 0.0), c(s / r2, 0.0)];
        let disc = c(1.0 - s * 4.0 * r2, 0.0).sqrt();
        let z = vec![(c(s, 0.0) + disc) / (2.0 * r2), (c(s, 0.0) - disc) / (2.0 * r2)];
        let zv = ZeroVector::new(z.clone())?;
        for (kind, diagonal, k) in [(MatrixKind::M1, 1.5, 0.5), (MatrixKind::M2, 2.5, 1.5)] {
            let expected = n2_closed_form(&z, diagonal, k)?;
            let built = build(kind, &zv, &coeffs)?.entries;
            n2 = n2.max((&built - &expected).max_abs() / expected.max_abs());
        }
    }

    let printed: [(u32, [C64; 3]); 6] = [
        (1, [c(0.7090, 0.0), c(-0.3545, -1.2656), c(-0.3545, 1.2656)]),
        (2, [c(0.7202, -0.5758), c(0.7202, 0.5758), c(-1.4405, 0.0)]),
        (3, [c(-1.0031, 0.7492), c(-1.0031, -0.7492), c(0.7814, 0.0)]),
        (4, [c(0.0, 0.0), c(-1.8772, 0.0), c(0.6524, 0.0)]),
        (5, [c(0.0, 0.0), c(-1.8772, 0.0), c(0.6524, 0.0)]),
        (6, [c(-0.7814, 0.0), c(1.0031, -0.7492), c(1.0031, 0.7492)]),
    ];
    let rows = mu_table(&Tolerances::default())?;
    let mut table: f64 = 0.0;
    let mut mu5 = (0.0, 0.0);
    for row in &rows {
        let z: Vec<C64> = row.zeros.iter().map(|x| c(x.re, x.im)).collect();
        let (_, expected) = printed.iter().find(|(mu, _)| *mu == row.mu).expect("six labels");
        if row.mu == 5 {
            // z (z^2 - a z + a), a = sqrt(3/2)
            let a = 1.5f64.sqrt();
            let half = (4.0 * a - a * a).sqrt() / 2.0;
            let oracle = [c(0.0, 0.0), c(a / 2.0, half), c(a / 2.0, -half)];
            mu5 = (pointwise_gap(&z, &oracle), pointwise_gap(&z, expected));
        } else {
            table = table.max(pointwise_gap(&z, expected));
        }
    }
    println!(
        "  note: mu = 5 zeros match z(z^2 - a z + a), a = sqrt(3/2), to {:.1e}; \
         the printed mu = 5 row repeats mu = 4 and is off by {:.3}",
        mu5.0, mu5.1
    );
    Ok(Outcome {
        pass: n2 < 1e-12 && table < 5e-4 && mu5.0 < 1e-12,
        detail: format!(
            "N = 2 closed forms to {n2:.1e} (< 1e-12 rel), N = 3 rows 1,2,3,4,6 to {table:.1e} (< 5e-4), \
             mu = 5 oracle to {:.1e}",
            mu5.0
        ),
    })
}

/// Criterion 4: trace and determinant identities, N <= 6.
fn trace_and_determinant() -> Result<Outcome> {
    let (mut tr, mut det): (f64, f64) = (0.0, 0.0);
    for n in 2..=6 {
        let report = run_verification(&RunConfig::new(n), jobs())?;
        for r in &report.results {
            tr = tr.max(r.trace_deviation.unwrap_or(f64::INFINITY));
            det = det.max(r.determinant_deviation.unwrap_or(f64::INFINITY));
        }
    }
    Ok(Outcome {
        pass: tr < 1e-8 && det < 1e-6,
        detail: format!("both kinds, N = 2..6: trace {tr:.1e} (< 1e-8 rel), determinant {det:.1e} (< 1e-6 rel)"),
    })
}

/// Criterion 5: Hermite zeros are equilibria of both flows, N <= 20.
fn hermite_equilibria() -> Result<Outcome> {
    let mut worst: f64 = 0.0;
    for n in 2..=20 {
        let h = hermite_zeros(n)?;
        worst = worst.max(h.residual_first).max(h.residual_second);
    }
    Ok(Outcome { pass: worst < 1e-10, detail: format!("N = 2..20, max residual {worst:.1e} (< 1e-10)") })
}

/// Criterion 6: closed forms against finite-difference Jacobians.
fn jacobian_oracle() -> Result<Outcome> {
    let mut worst = [0.0f64; 2];
    for n in 2..=5 {
        for perm in enumerate_orderings(n, None)? {
            let (z, coeffs) = equilibrium_of(n, &perm)?;
            for (i, kind) in [MatrixKind::M1, MatrixKind::M2].into_iter().enumerate() {
                worst[i] = worst[i].max(oracle_deviation(kind, &z, &coeffs, default_fd_step(kind))?);
            }
        }
    }
    Ok(Outcome {
        pass: worst.iter().all(|&w| w < 1e-4),
        detail: format!("N = 2..5, all orderings: M1 {:.1e}, M2 {:.1e} (< 1e-4 rel)", worst[0], worst[1]),
    })
}

fn tight() -> IntegrateOptions {
    IntegrateOptions { rel_tol: 1e-10, abs_tol: 1e-12, record_steps: false, ..Default::default() }
}

/// Criterion 7: seeded starts within 1e-2 of an equilibrium return after one
/// period. N cycles through 2..=4 and the ordering through all N! ranks.
fn isochrony() -> Result<Outcome> {
    let mut worst: f64 = 0.0;
    let mut misses = Vec::new();
    for system in FlowSystem::ALL {
        for seed in 0..20u64 {
            let n = 2 + (seed % 3) as usize;
            let perm = PermutationId::from_ordinal(n, seed as u128 % factorial(n).unwrap() + 1)?;
            let eq = equilibrium(system, n, &perm, RootOptions::default())?;
            let y0 = perturbed_state(system, &eq, 1e-2, &mut ChaCha8Rng::seed_from_u64(seed));
            let d = integrate(system, &y0, PERIOD, &tight())?.return_distance();
            worst = worst.max(d);
            if d >= 1e-5 {
                misses.push(format!("{system} seed {seed}"));
            }
        }
    }
    exchange_census()?;
    Ok(Outcome {
        pass: misses.is_empty(),
        detail: format!("4 flows x 20 seeds, N = 2..4: worst return {worst:.1e} (< 1e-5); misses {misses:?}"),
    })
}

/// At N = 5 some orderings have two nearly coincident zeros, and a 1e-2 push
/// can make them trade places over one period. Reported, not graded.
fn exchange_census() -> Result<()> {
    let n = 5;
    let (mut exchanged, mut other) = (Vec::new(), Vec::new());
    for seed in 0..20u64 {
        let perm = PermutationId::from_ordinal(n, seed as u128 % factorial(n).unwrap() + 1)?;
        let eq = equilibrium(FlowSystem::Zeta1, n, &perm, RootOptions::default())?;
        let y0 = perturbed_state(FlowSystem::Zeta1, &eq, 1e-2, &mut ChaCha8Rng::seed_from_u64(seed));
        let rec = integrate(FlowSystem::Zeta1, &y0, PERIOD, &tight())?;
        if rec.return_distance() < 1e-5 {
            continue;
        }
        let same_coefficients =
            max_distance(&poly_coefficients_of(&y0)?, &poly_coefficients_of(&rec.last().state)?) < 1e-5;
        let multiple = period_multiple(FlowSystem::Zeta1, &y0, 4, 1e-5, &tight())?;
        match multiple {
            Some(k) if same_coefficients => exchanged.push(format!("seed {seed} ({:?}, period x{k})", perm.word)),
            _ => other.push(seed),
        }
    }
    println!(
        "  info: zeta1 at N = 5, radius 1e-2: {} of 20 seeds exchange zeros {:?}; unexplained misses {:?}",
        exchanged.len(),
        exchanged,
        other
    );
    Ok(())
}

/// Criterion 8: relabelling two zeros conjugates the matrix by the swap.
fn permutation_similarity() -> Result<Outcome> {
    let mut worst: f64 = 0.0;
    let mut checks = 0;
    for n in 2..=5 {
        for perm in enumerate_orderings(n, None)? {
            let (z, coeffs) = equilibrium_of(n, &perm)?;
            for a in 1..n {
                for b in a + 1..=n {
                    for kind in [MatrixKind::M1, MatrixKind::M2] {
                        worst = worst.max(permutation_similarity_check(&z, &coeffs, kind, (a, b))?);
                        checks += 1;
                    }
                }
            }
        }
    }
    Ok(Outcome { pass: worst < 1e-10, detail: format!("{checks} transpositions, N = 2..5: max {worst:.1e} (< 1e-10)") })
}

/// Criterion 9: a 1e-6 perturbation follows the eigenmode reconstruction.
fn linear_consistency() -> Result<Outcome> {
    let eps = 1e-6;
    let times: Vec<f64> = (1..=10).map(|k| k as f64 * PERIOD / 10.0).collect();
    let opts = IntegrateOptions { rel_tol: 1e-11, abs_tol: 1e-13, record_steps: false, ..Default::default() };
    let zero = |n: usize| vec![c(0.0, 0.0); n];
    let mut worst: f64 = 0.0;
    for n in 2..=4 {
        for (kind, system) in [(MatrixKind::M1, FlowSystem::Zeta1), (MatrixKind::M2, FlowSystem::Zeta2)] {
            for perm in enumerate_orderings(n, None)? {
                let (z, coeffs) = equilibrium_of(n, &perm)?;
                let modes = LinearModes::new(&build(kind, &z, &coeffs)?, EigenOptions::default())?;
                let v0 = random_direction(n, &mut ChaCha8Rng::seed_from_u64(perm.ordinal as u64));
                let (mut center, mut u0) = (z.as_slice().to_vec(), v0.clone());
                if system.is_second_order() {
                    center.extend(zero(n));
                    u0.extend(zero(n));
                }
                let field = DeviationFlow { flow: Flow::new(system, n), center, eps };
                let rec = integrate_field(&field, &u0, &times, &opts)?;
                for &t in &times {
                    let linear = if system.is_second_order() {
                        modes.evolve_second(&v0, &zero(n), t)?
                    } else {
                        modes.evolve_first(&v0, t)?
                    };
                    let sample = rec.at(t).expect("output time recorded");
                    worst = worst.max(max_distance(&sample.state[..n], &linear));
                }
            }
        }
    }
    Ok(Outcome {
        pass: worst < 1e-4,
        detail: format!("eps = 1e-6, N = 2..4, both kinds, 10 times: max {worst:.1e} eps (< 1e-4 eps)"),
    })
}

fn main() -> ExitCode {
    let criteria: [(&str, Check); 9] = [
        ("first-order spectrum", || spectrum_sweep(MatrixKind::M1)),
        ("second-order spectrum", || spectrum_sweep(MatrixKind::M2)),
        ("golden values", golden_values),
        ("trace and determinant", trace_and_determinant),
        ("Hermite equilibria", hermite_equilibria),
        ("Jacobian oracle", jacobian_oracle),
        ("isochrony", isochrony),
        ("permutation similarity", permutation_similarity),
        ("linear/nonlinear consistency", linear_consistency),
    ];
    let mut failed = 0;
    for (k, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = check().unwrap_or_else(|e| Outcome { pass: false, detail: format!("error: {e}") });
        let secs = start.elapsed().as_secs_f64();
        let tag = if outcome.pass { "PASS" } else { "FAIL" };
        println!("{tag} criterion {}: {name} — {} [{secs:.1}s]", k + 1, outcome.detail);
        failed += usize::from(!outcome.pass);
    }
    println!("acceptance: {} of 9 criteria passed", 9 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
