#![allow(dead_code)]

use std::f64::consts::PI;

use crystal_ground::optimize::initial_psi;
use crystal_ground::{Basis, Ewald, IonSet, Lattice, Model, PhysParams, Vec3, WaveField};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// `Σ_{m≥1} cos(mt)/m²` for `0 ≤ t ≤ 2π`.
fn cos_over_square(t: f64) -> f64 {
    PI * PI / 6.0 - PI * t / 2.0 + t * t / 4.0
}

/// `Σ_{m∈ℤ} cos(mt)/(m² + a²)` for `a > 0`, `0 ≤ t ≤ 2π`, without overflow.
fn cos_over_shifted_square(t: f64, a: f64) -> f64 {
    let u = a * (PI - t);
    ((u - PI * a).exp() + (-u - PI * a).exp()) / (1.0 - (-2.0 * PI * a).exp()) * PI / a
}

/// Lattice Green function of the cubic cell of side `l` at fractional
/// point `f`, by summing the third lattice index in closed form. The
/// remaining double sum decays like `exp(-|m| min(t, 2π - t))`, so `f[2]`
/// must stay away from the cell faces.
pub fn green_cubic(l: f64, f: [f64; 3]) -> f64 {
    let t: Vec<f64> = f.iter().map(|v| 2.0 * PI * v.rem_euclid(1.0)).collect();
    let reach = (40.0 / t[2].min(2.0 * PI - t[2])).ceil() as i64;
    let mut s = 2.0 * cos_over_square(t[2]);
    for m1 in -reach..=reach {
        for m2 in -reach..=reach {
            if m1 == 0 && m2 == 0 {
                continue;
            }
            let a = ((m1 * m1 + m2 * m2) as f64).sqrt();
            s += (m1 as f64 * t[0] + m2 as f64 * t[1]).cos() * cos_over_shifted_square(t[2], a);
        }
    }
    s / (l * l * l) * (l / (2.0 * PI)).powi(2)
}

/// `D(0)` for a general lattice from the potential of a Gaussian charge of
/// width `s`: `Φ_s(0) - √(2/π)/(4πs)` tends to `D(0)` linearly in `s²`; two
/// widths give the extrapolated value.
pub fn self_potential_smeared(lattice: &Lattice<f64>, s1: f64, s2: f64) -> f64 {
    let f = |s: f64| {
        let kmax = (2.0 * 40.0f64).sqrt() / s;
        let b = lattice.dual().vectors();
        let reach: Vec<i64> = (0..3)
            .map(|a| {
                let other = lattice.vectors()[a].norm();
                (kmax * other / (2.0 * PI)).ceil() as i64 + 1
            })
            .collect();
        let mut sum = 0.0;
        for n0 in -reach[0]..=reach[0] {
            for n1 in -reach[1]..=reach[1] {
                for n2 in -reach[2]..=reach[2] {
                    if (n0, n1, n2) == (0, 0, 0) {
                        continue;
                    }
                    let k = b[0] * n0 as f64 + b[1] * n1 as f64 + b[2] * n2 as f64;
                    let k2 = k.norm2();
                    sum += (-k2 * s * s / 2.0).exp() / k2;
                }
            }
        }
        sum / lattice.volume() - (2.0 / PI).sqrt() / (4.0 * PI * s)
    };
    let (f1, f2) = (f(s1), f(s2));
    (s1 * s1 * f2 - s2 * s2 * f1) / (s1 * s1 - s2 * s2)
}

pub fn skewed_lattice() -> Lattice<f64> {
    Lattice::from_rows([[1.0, 0.0, 0.0], [0.25, 0.9, 0.0], [0.1, -0.15, 1.1]]).unwrap()
}

pub fn model(lattice: &Lattice<f64>, dims: [usize; 3]) -> Model<f64> {
    Model::new(
        Basis::new(lattice, dims).unwrap(),
        PhysParams::dimensionless(),
        Ewald::auto(lattice).unwrap(),
    )
}

/// Random ions (charges 1..=3, separation above `0.15·scale`) and a noisy
/// normalized `ψ` carrying their total charge.
pub fn random_state(model: &Model<f64>, seed: u64, n_ions: usize) -> (WaveField<f64>, IonSet<f64>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let lattice = model.basis().lattice();
    let ions = loop {
        let positions: Vec<_> = (0..n_ions)
            .map(|_| Vec3::from_f64([0, 1, 2].map(|_| rng.random_range(0.0..1.0))))
            .collect();
        let charges: Vec<f64> = (0..n_ions).map(|_| rng.random_range(1..=3) as f64).collect();
        let ions = IonSet::new(lattice, positions, charges).unwrap();
        if ions.min_separation(lattice).is_none_or(|d| d > 0.15 * lattice.scale()) {
            break ions;
        }
    };
    let psi = initial_psi(model.basis(), ions.total_charge(), rng.random(), 0.5).unwrap();
    (psi, ions)
}
