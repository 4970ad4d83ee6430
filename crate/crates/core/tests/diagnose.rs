mod common;

use crystal_ground::diagnose::{
    check_force, check_neutrality, check_poisson, check_schrodinger, check_translation, force_residual,
    ion_fields, report, schrodinger_residual, Thresholds,
};
use crystal_ground::optimize::initial_psi;
use crystal_ground::{minimize, GroundState, IonSet, Lattice, Model, SolverConfig, SpectralField, Vec3};
use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::model;

fn solved() -> (Model<f64>, GroundState<f64>) {
    let lat = Lattice::cubic(1.0).unwrap();
    let m = model(&lat, [8, 8, 8]);
    let ions = IonSet::new(&lat, vec![Vec3::new(0.3, 0.6, 0.2)], vec![1.0]).unwrap();
    let psi = initial_psi(m.basis(), 1.0, 21, 0.2).unwrap();
    let gs = minimize(&m, &psi, &ions, &SolverConfig::default()).unwrap();
    (m, gs)
}

#[test]
fn solver_state_passes_report() {
    let (m, gs) = solved();
    let r = report(&m, &gs, &Thresholds::default()).unwrap();
    assert!(r.pass, "{r:?}");
    assert_eq!(r.checks.len(), 4);
}

#[test]
fn noisy_psi_raises_schrodinger_residual() {
    let (m, gs) = solved();
    let base = check_schrodinger(&m, &gs);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let amp = (1.0 / m.basis().volume()).sqrt() * 1e-3;
    let noisy: Vec<_> = gs
        .psi
        .values()
        .iter()
        .map(|v| v + Complex::new(rng.random_range(-amp..amp), rng.random_range(-amp..amp)))
        .collect();
    let tampered = GroundState {
        psi: crystal_ground::fields::normalize(&gs.psi.with_values(noisy)).unwrap(),
        ..gs.clone()
    };
    let r = check_schrodinger(&m, &tampered);
    assert!(r >= 10.0 * base, "{r} vs {base}");
    assert!(!report(&m, &tampered, &Thresholds::default()).unwrap().pass);
}

#[test]
fn tampered_potential_fails_poisson() {
    let (m, gs) = solved();
    assert!(check_poisson(&gs) <= 1e-12);
    let mut phi = gs.phi.clone();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for c in phi.coeffs_mut().iter_mut().skip(1).step_by(7) {
        *c *= 1.0 + rng.random_range(-0.01..0.01);
    }
    let tampered = GroundState { phi, ..gs.clone() };
    assert!(check_poisson(&tampered) > 1e-6);
    let mut gauge = gs.phi.clone();
    let z = gauge.grid().zero_index();
    gauge.coeffs_mut()[z] = Complex::new(1e-6, 0.0);
    assert!(check_poisson(&GroundState { phi: gauge, ..gs.clone() }) >= 1e-6);
    let zero = SpectralField::zeros(m.basis().density_grid().clone());
    assert_eq!(check_poisson(&GroundState { phi: zero.clone(), rho_hat: zero, ..gs }), 0.0);
}

#[test]
fn neutrality_tracks_norm_and_charge() {
    let (m, gs) = solved();
    assert!(check_neutrality(&m, &gs) <= 1e-10);
    let stretched = GroundState {
        psi: gs.psi.scaled(Complex::new(1.1, 0.0)),
        ..gs.clone()
    };
    // |e|Z + e·1.21·Z with e = -1, Z = 1
    assert!((check_neutrality(&m, &stretched) - 0.21).abs() < 1e-12);
    let lat = m.basis().lattice().clone();
    let heavier = GroundState {
        ions: IonSet::new(&lat, gs.ions.positions().to_vec(), vec![2.0]).unwrap(),
        ..gs
    };
    assert!((check_neutrality(&m, &heavier) - 1.0).abs() < 1e-12);
}

#[test]
fn displaced_ion_fails_force() {
    let (m, gs) = solved();
    assert!(check_force(&m, &gs).unwrap() <= 1e-6);
    let lat = m.basis().lattice().clone();
    let moved = GroundState {
        ions: gs.ions.displaced(&lat, &[Vec3::new(0.05, 0.0, 0.0)]),
        ..gs
    };
    // ν is not symmetric about the new position
    let f = check_force(&m, &moved).unwrap();
    assert!(f > 0.0);
}

#[test]
fn symmetric_density_has_no_force() {
    let lat = Lattice::cubic(1.0).unwrap();
    let m = model(&lat, [6, 6, 6]);
    let ions = IonSet::new(&lat, vec![Vec3::new(0.5, 0.5, 0.5)], vec![2.0]).unwrap();
    let (_, nu_hat) = m.basis().density(&m.basis().constant_wave(2.0), m.params());
    assert!(force_residual(&m, &ions, &nu_hat).unwrap() < 1e-14);
}

#[test]
fn two_ion_force_matches_pair_energy_slope() {
    let lat = Lattice::cubic(1.0).unwrap();
    let m = model(&lat, [6, 6, 6]);
    let ions = IonSet::new(&lat, vec![Vec3::new(0.4, 0.5, 0.5), Vec3::new(0.55, 0.6, 0.5)], vec![1.0, 1.0]).unwrap();
    let psi = m.basis().constant_wave(2.0);
    let (_, nu_hat) = m.basis().density(&psi, m.params());
    let field = ion_fields(&m, &ions, &nu_hat).unwrap();
    let h = 1e-5;
    for a in 0..3 {
        let mut delta = vec![Vec3::zero(); 2];
        delta[0] = Vec3::unit(a) * h;
        let up = m.pair_energy(&ions.displaced(&lat, &delta)).unwrap();
        delta[0] = Vec3::unit(a) * -h;
        let down = m.pair_energy(&ions.displaced(&lat, &delta)).unwrap();
        let slope = (up - down) / (2.0 * h);
        // |e| Z_0 ∇φ̃_0 is the energy gradient; force is its negative
        assert!((field[0][a] - slope).abs() < 1e-6 * field[0].norm(), "{a}: {} {}", field[0][a], slope);
    }
    assert!(field[0].norm() > 0.1);
}

#[test]
fn free_plane_wave_has_zero_residual() {
    let lat = Lattice::cubic(2.0).unwrap();
    let m = model(&lat, [4, 4, 4]);
    let b = lat.dual().vectors()[2];
    let amp = (1.0 / lat.volume()).sqrt();
    let values = (0..64)
        .map(|i| {
            let t = -b.dot(m.basis().node([i / 16, (i / 4) % 4, i % 4]));
            Complex::new(amp * t.cos(), amp * t.sin())
        })
        .collect();
    let psi = m.basis().wave_field(values, 1.0).unwrap();
    let zero = SpectralField::zeros(m.basis().density_grid().clone());
    assert!(schrodinger_residual(&m, &psi, &zero, 0.5 * b.norm2()) < 1e-13);
}

#[test]
fn full_period_shift_is_identity() {
    let (m, gs) = solved();
    // samples return exactly; ion positions pick up wrapping roundoff
    assert!(check_translation(&m, &gs.psi, &gs.ions, [8, -8, 16]).unwrap() <= 1e-15);
    assert!(check_translation(&m, &gs.psi, &gs.ions, [1, 0, 0]).unwrap() <= 1e-12);
}
