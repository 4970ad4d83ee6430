//! Acceptance gate: one PASS/FAIL line per criterion, nonzero exit on any
//! failure.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::{Arc, OnceLock};

use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crystal_ground::coulomb::{apply_q, EwaldParams};
use crystal_ground::diagnose::{self, check_gradients};
use crystal_ground::lattice::make_kgrid;
use crystal_ground::optimize::{initial_psi, minimize_with, IterationRecord};
use crystal_ground::{
    Error, Ewald, GroundState, IonSet, Lattice, Model, SolverConfig, SpectralField, Vec3,
};

use common::{green_cubic, model, random_state, self_potential_smeared, skewed_lattice};

type Outcome = Result<String, String>;

fn ensure(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

struct Benchmark {
    model: Model<f64>,
    state: GroundState<f64>,
    trace: Vec<IterationRecord<f64>>,
}

/// Single ion, Z = 1, unit cubic cell, 16³ grid, default tolerances.
fn benchmark(seed: u64) -> Benchmark {
    let lattice = Lattice::cubic(1.0).unwrap();
    let model = model(&lattice, [16, 16, 16]);
    let ions = IonSet::new(&lattice, vec![Vec3::new(0.5, 0.5, 0.5)], vec![1.0]).unwrap();
    let psi = initial_psi(model.basis(), 1.0, seed, 0.1).unwrap();
    let cfg = SolverConfig {
        seed,
        ..SolverConfig::default()
    };
    let mut trace = Vec::new();
    let state = match minimize_with(&model, &psi, &ions, &cfg, |r| trace.push(*r)) {
        Ok(s) => s,
        Err(crystal_ground::MinimizeError::NotConverged(s)) => *s,
        Err(e) => panic!("benchmark solve failed: {e}"),
    };
    Benchmark { model, state, trace }
}

fn shared_benchmark() -> &'static Benchmark {
    static CELL: OnceLock<Benchmark> = OnceLock::new();
    CELL.get_or_init(|| benchmark(1))
}

fn ac1() -> Outcome {
    let lattice = skewed_lattice();
    let grid = Arc::new(make_kgrid(lattice.dual(), [10, 8, 12]).unwrap());
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let mut coeffs: Vec<_> = (0..grid.len())
            .map(|_| Complex::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect();
        coeffs[grid.zero_index()] = Complex::new(0.0, 0.0);
        let rho = SpectralField::new(grid.clone(), coeffs).unwrap();
        let back = apply_q(&rho).map_err(|e| e.to_string())?.neg_laplacian();
        let num: f64 = back.coeffs().iter().zip(rho.coeffs()).map(|(a, b)| (a - b).norm_sqr()).sum();
        let den: f64 = rho.coeffs().iter().map(|c| c.norm_sqr()).sum();
        worst = worst.max((num / den).sqrt());
    }
    let mut charged = SpectralField::zeros(grid.clone());
    charged.coeffs_mut()[grid.zero_index()] = Complex::new(0.3, 0.0);
    charged.coeffs_mut()[1] = Complex::new(1.0, 0.0);
    let rejected = matches!(apply_q(&charged), Err(Error::NonNeutralSource { .. }));
    ensure(
        worst <= 1e-12 && rejected,
        format!("max relative error {worst:.2e} over 100 densities; non-neutral source rejected: {rejected}"),
    )
}

fn ac2() -> Outcome {
    let lattice = Lattice::cubic(1.0).unwrap();
    let auto = EwaldParams::auto(&lattice).eta;
    let etas = [auto / 2.0, auto, auto * 2.0, auto * 4.0];
    let ewalds: Vec<_> = etas
        .iter()
        .map(|&eta| Ewald::new(&lattice, EwaldParams::with_eta(eta)).unwrap())
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(202);
    let mut spread: f64 = 0.0;
    let mut asym: f64 = 0.0;
    for _ in 0..20 {
        let x = Vec3::from_f64([0, 1, 2].map(|_| rng.random_range(-0.5..0.5)));
        let values: Vec<f64> = ewalds.iter().map(|e| e.green(x).unwrap()).collect();
        let (lo, hi) = values.iter().fold((f64::MAX, f64::MIN), |(l, h), &v| (l.min(v), h.max(v)));
        spread = spread.max(hi - lo);
        asym = asym.max((ewalds[1].green(x).unwrap() - ewalds[1].green(-x).unwrap()).abs());
    }
    let center = ewalds[1].green(Vec3::new(0.5, 0.5, 0.5)).unwrap();
    let oracle = green_cubic(1.0, [0.5, 0.5, 0.5]);
    let err = (center - oracle).abs();
    ensure(
        spread <= 1e-10 && asym <= 1e-10 && err <= 1e-8,
        format!(
            "eta spread {spread:.2e} (8x range), G(x)-G(-x) {asym:.2e}, G(L/2,L/2,L/2) = {center:.12} vs oracle {oracle:.12} (diff {err:.2e})"
        ),
    )
}

fn ac3() -> Outcome {
    let mut worst_grad: f64 = 0.0;
    let mut worst_rel: f64 = 0.0;
    let mut detail = String::new();
    for lattice in [Lattice::cubic(1.0).unwrap(), skewed_lattice()] {
        let ewald = Ewald::auto(&lattice).unwrap();
        let h = 1e-4 * lattice.scale();
        for a in 0..3 {
            let e = Vec3::unit(a) * h;
            let g = (ewald.regularized(e) - ewald.regularized(-e)) / (2.0 * h);
            worst_grad = worst_grad.max(g.abs());
        }
        let d0 = ewald.self_potential();
        let s = 0.1 * lattice.scale();
        let oracle = self_potential_smeared(&lattice, s, 0.7 * s);
        let rel = ((d0 - oracle) / oracle).abs();
        worst_rel = worst_rel.max(rel);
        detail.push_str(&format!("D(0) = {d0:.12} vs oracle {oracle:.12}; "));
    }
    ensure(
        worst_grad <= 1e-8 && worst_rel <= 1e-6,
        format!("{detail}max |FD grad D(0)| {worst_grad:.2e}, max relative D(0) error {worst_rel:.2e}"),
    )
}

fn ac4() -> Outcome {
    let lattice = skewed_lattice();
    let model = model(&lattice, [8, 8, 8]);
    let mut worst_psi: f64 = 0.0;
    let mut worst_ion: f64 = 0.0;
    for seed in 0..10 {
        let (psi, ions) = random_state(&model, 400 + seed, 1 + (seed as usize % 3));
        let r = check_gradients(&model, &psi, &ions, &[1e-3, 5e-4], 3, seed).map_err(|e| e.to_string())?;
        worst_psi = worst_psi.max(r.psi);
        worst_ion = worst_ion.max(r.ion);
    }
    ensure(
        worst_psi <= 1e-6 && worst_ion <= 1e-6,
        format!("worst relative mismatch: psi {worst_psi:.2e}, ions {worst_ion:.2e} over 10 states"),
    )
}

fn ac5() -> Outcome {
    let b = shared_benchmark();
    let s = &b.state;
    let ok = s.converged
        && s.iterations <= 2000
        && s.residuals.schrodinger <= 1e-6
        && s.residuals.force <= 1e-6
        && s.residuals.poisson <= 1e-12
        && s.lambda_imag.abs() <= 1e-12;
    ensure(
        ok,
        format!(
            "converged {} in {} iterations; schrodinger {:.2e}, force {:.2e}, poisson {:.2e}, Im form {:.2e}; E_r = {:.10e}, lambda = {:.10e}",
            s.converged,
            s.iterations,
            s.residuals.schrodinger,
            s.residuals.force,
            s.residuals.poisson,
            s.lambda_imag,
            s.energy.total,
            s.lambda
        ),
    )
}

fn ac6() -> Outcome {
    let b = shared_benchmark();
    // a run with ion moves as well
    let lattice = Lattice::cubic(1.0).unwrap();
    let m = model(&lattice, [8, 8, 8]);
    let ions = IonSet::new(&lattice, vec![Vec3::new(0.4, 0.5, 0.5), Vec3::new(0.6, 0.5, 0.5)], vec![1.0, 1.0]).unwrap();
    let psi = initial_psi(m.basis(), 2.0, 5, 0.1).unwrap();
    let mut trace2 = Vec::new();
    minimize_with(&m, &psi, &ions, &SolverConfig::default(), |r| trace2.push(*r)).map_err(|e| e.to_string())?;
    let mut defect: f64 = 0.0;
    let mut rise: f64 = f64::MIN;
    let mut steps = 0;
    for trace in [&b.trace, &trace2] {
        for r in trace.iter() {
            defect = defect.max(r.norm_defect);
        }
        for w in trace.windows(2) {
            rise = rise.max(w[1].energy - w[0].energy);
            steps += 1;
        }
    }
    ensure(
        defect <= 1e-10 && rise <= 1e-12,
        format!("max |norm^2 - Z| {defect:.2e}; largest energy change between iterates {rise:.2e} over {steps} steps"),
    )
}

fn ac7() -> Outcome {
    let lattice = Lattice::cubic(1.0).unwrap();
    let m = model(&lattice, [8, 8, 8]);
    let cfg = SolverConfig {
        fix_ions: true,
        ..SolverConfig::default()
    };
    let mut rows = Vec::new();
    for d in [0.4, 0.2, 0.1, 0.05] {
        let ions = IonSet::new(&lattice, vec![Vec3::new(0.3, 0.5, 0.5), Vec3::new(0.3 + d, 0.5, 0.5)], vec![1.0, 1.0]).unwrap();
        let psi = initial_psi(m.basis(), 2.0, 9, 0.1).unwrap();
        let gs = crystal_ground::minimize(&m, &psi, &ions, &cfg).map_err(|e| e.to_string())?;
        rows.push((d, gs.energy.e2, gs.energy.total));
    }
    let increasing = rows.windows(2).all(|w| w[1].1 > w[0].1);
    let bounded = rows.iter().all(|r| r.2.is_finite());

    let ions = IonSet::new(&lattice, vec![Vec3::new(0.45, 0.5, 0.5), Vec3::new(0.55, 0.52, 0.5)], vec![1.0, 1.0]).unwrap();
    let psi = initial_psi(m.basis(), 2.0, 3, 0.1).unwrap();
    let free = crystal_ground::minimize(&m, &psi, &ions, &SolverConfig::default()).map_err(|e| e.to_string())?;
    let d_final = free.min_separation(&m).unwrap_or(f64::INFINITY);
    let e2: Vec<String> = rows.iter().map(|r| format!("d={} E2={:.6}", r.0, r.1)).collect();
    ensure(
        increasing && bounded && d_final >= 0.25,
        format!("{}; free minimization from d=0.10 ends at d={d_final:.4}", e2.join(", ")),
    )
}

fn ac8() -> Outcome {
    let b = shared_benchmark();
    let m = &b.model;
    let s = &b.state;
    let mut shift_err: f64 = 0.0;
    for shift in [[1, 0, 0], [0, 3, -2], [5, 7, 11], [16, 16, 16]] {
        shift_err = shift_err.max(diagnose::check_translation(m, &s.psi, &s.ions, shift).map_err(|e| e.to_string())?);
    }
    // a generic state with two ions on a skewed cell
    let lattice = skewed_lattice();
    let m2 = model(&lattice, [8, 8, 8]);
    let (psi, ions) = random_state(&m2, 808, 2);
    let e_ref = m2.energy(&psi, &ions).unwrap().total.abs().max(1.0);
    let mut rel_err: f64 = 0.0;
    let mut phase_err: f64 = 0.0;
    for shift in [[1, 0, 0], [2, -3, 5]] {
        rel_err = rel_err.max(diagnose::check_translation(&m2, &psi, &ions, shift).unwrap() / e_ref);
    }
    for theta in [0.3, 1.7, 3.0] {
        phase_err = phase_err.max(diagnose::check_phase(m, &s.psi, &s.ions, theta).unwrap());
        phase_err = phase_err.max(diagnose::check_phase(&m2, &psi, &ions, theta).unwrap() / e_ref);
    }
    let other = benchmark(2);
    let e1 = s.energy.total;
    let e2 = other.state.energy.total;
    let seed_rel = ((e1 - e2) / e1).abs();
    ensure(
        shift_err <= 1e-12 && rel_err <= 1e-12 && phase_err <= 1e-13 && seed_rel <= 1e-6 && other.state.converged,
        format!(
            "grid shifts: ground state {shift_err:.2e}, random state {rel_err:.2e} (relative); phase {phase_err:.2e}; seeds 1 and 2: E_r {e1:.12e} vs {e2:.12e} (relative {seed_rel:.2e})"
        ),
    )
}

fn ac9() -> Outcome {
    let mut worst: f64 = 0.0;
    for (i, lattice) in [Lattice::cubic(1.0).unwrap(), skewed_lattice()].into_iter().enumerate() {
        let m = model(&lattice, [8, 8, 8]);
        for seed in 0..10 {
            let (psi, ions) = random_state(&m, 900 + 10 * i as u64 + seed, 1 + seed as usize % 3);
            let (a, b) = m.e3_crosscheck(&psi, &ions).map_err(|e| e.to_string())?;
            worst = worst.max((a - b).abs() / a.abs());
        }
    }
    ensure(worst <= 1e-9, format!("max relative difference {worst:.2e} over 20 states"))
}

type Criterion = (&'static str, &'static str, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 9] = [
        ("AC1", "Poisson inverse exactness", ac1),
        ("AC2", "Ewald Green function", ac2),
        ("AC3", "regular part D", ac3),
        ("AC4", "gradient fidelity", ac4),
        ("AC5", "Euler-Lagrange at convergence", ac5),
        ("AC6", "constraint and descent", ac6),
        ("AC7", "lower-bound behavior", ac7),
        ("AC8", "symmetry", ac8),
        ("AC9", "E3 cross-check", ac9),
    ];
    let mut failed = 0;
    for (id, name, run) in criteria {
        let start = std::time::Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS {id} {name}: {detail} [{secs:.1}s]"),
            Err(detail) => {
                failed += 1;
                println!("FAIL {id} {name}: {detail} [{secs:.1}s]");
            }
        }
    }
    if failed > 0 {
        println!("{failed} of 9 criteria failed");
        std::process::exit(1);
    }
    println!("all 9 criteria passed");
}
