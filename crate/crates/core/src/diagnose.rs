//! Independent checks of the Euler-Lagrange system and of the invariances of
//! `E_r`. Nothing here mutates its inputs.

use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::coulomb::{inverse_laplacian_dropping_mean, SpectralField};
use crate::energy::Model;
use crate::error::Result;
use crate::fields::{inner_product, neutrality_defect, IonSet, WaveField};
use crate::optimize::{retract, GroundState};
use crate::scalar::Real;
use crate::vec3::Vec3;

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub threshold: f64,
    pub pass: bool,
}

impl Check {
    pub fn new(name: &str, value: f64, threshold: f64) -> Self {
        Check {
            name: name.to_string(),
            value,
            threshold,
            pass: value <= threshold,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Report {
    pub checks: Vec<Check>,
    pub pass: bool,
}

impl Report {
    pub fn new(checks: Vec<Check>) -> Self {
        let pass = checks.iter().all(|c| c.pass);
        Report { checks, pass }
    }

    pub fn get(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Thresholds {
    pub schrodinger: f64,
    pub force: f64,
    pub poisson: f64,
    pub neutrality: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Thresholds {
            schrodinger: 1e-6,
            force: 1e-6,
            poisson: 1e-12,
            neutrality: 1e-10,
        }
    }
}

/// `‖Hψ - λψ‖/√Z` for a given potential and eigenvalue.
pub fn schrodinger_residual<T: Real>(model: &Model<T>, psi: &WaveField<T>, phi: &SpectralField<T>, lambda: T) -> T {
    let h = model.hamiltonian_samples(psi, phi);
    let r: Vec<_> = h.iter().zip(psi.values()).map(|(a, p)| a - p * lambda).collect();
    inner_product(&r, &r, psi.weight()).re.sqrt() / psi.target_norm().sqrt()
}

/// `‖k²φ̂ - ρ̂‖/‖ρ̂‖` over `k ≠ 0`, plus `|φ̂(0)|`. The relative part falls
/// back to the absolute norm when `ρ̂` vanishes.
pub fn poisson_residual<T: Real>(phi: &SpectralField<T>, rho_hat: &SpectralField<T>) -> T {
    let mut num = T::zero();
    let mut den = T::zero();
    let mut gauge = T::zero();
    for ((p, r), &k2) in phi.coeffs().iter().zip(rho_hat.coeffs()).zip(phi.grid().k2()) {
        if k2 == T::zero() {
            gauge = p.norm_sqr().sqrt();
            continue;
        }
        num += (p * k2 - r).norm_sqr();
        den += r.norm_sqr();
    }
    let rel = if den > T::zero() { (num / den).sqrt() } else { num.sqrt() };
    rel + gauge
}

/// `max_j |e| Z_j |∇φ̃_j(x_j)|` with `φ̃_j = φ - |e| Z_j/(4π|x - x_j|)`:
/// pair Green gradients, the regular part `|e| Z_j ∇D(0)` and the electron
/// field `∇(Qν)(x_j)`.
pub fn force_residual<T: Real>(model: &Model<T>, ions: &IonSet<T>, nu_hat: &SpectralField<T>) -> Result<T> {
    Ok(ion_fields(model, ions, nu_hat)?
        .iter()
        .zip(ions.charges())
        .fold(T::zero(), |m, (f, &z)| m.max(f.norm() * z * model.params().abs_charge())))
}

/// `∇φ̃_j(x_j)` for every ion.
pub fn ion_fields<T: Real>(model: &Model<T>, ions: &IonSet<T>, nu_hat: &SpectralField<T>) -> Result<Vec<Vec3<T>>> {
    let lattice = model.basis().lattice();
    let ewald = model.ewald();
    let abs_e = model.params().abs_charge();
    let q_nu = inverse_laplacian_dropping_mean(nu_hat);
    let self_slope = ewald.regularized_gradient(Vec3::zero());
    let mut out = Vec::with_capacity(ions.len());
    for j in 0..ions.len() {
        let xj = ions.cartesian(lattice, j);
        let mut field = self_slope * (abs_e * ions.charges()[j]);
        for k in (0..ions.len()).filter(|&k| k != j) {
            field += ewald.green_gradient(xj - ions.cartesian(lattice, k))? * (abs_e * ions.charges()[k]);
        }
        field += Vec3(q_nu.gradient_at(xj).map(|c| c.re));
        out.push(field);
    }
    Ok(out)
}

pub fn check_schrodinger<T: Real>(model: &Model<T>, state: &GroundState<T>) -> T {
    schrodinger_residual(model, &state.psi, &state.phi, state.omega0 * model.params().hbar)
}

pub fn check_poisson<T: Real>(state: &GroundState<T>) -> T {
    poisson_residual(&state.phi, &state.rho_hat)
}

/// Recomputes `ν` from the stored `ψ`, so a tampered `ψ` shows up here.
pub fn check_force<T: Real>(model: &Model<T>, state: &GroundState<T>) -> Result<T> {
    let (_, nu_hat) = model.basis().density(&state.psi, model.params());
    force_residual(model, &state.ions, &nu_hat)
}

pub fn check_neutrality<T: Real>(model: &Model<T>, state: &GroundState<T>) -> T {
    neutrality_defect(&state.ions, &state.psi, model.params()).abs()
}

/// All four residual checks on a stored state.
pub fn report<T: Real>(model: &Model<T>, state: &GroundState<T>, th: &Thresholds) -> Result<Report> {
    Ok(Report::new(vec![
        Check::new("schrodinger", check_schrodinger(model, state).as_f64(), th.schrodinger),
        Check::new("force", check_force(model, state)?.as_f64(), th.force),
        Check::new("poisson", check_poisson(state).as_f64(), th.poisson),
        Check::new("neutrality", check_neutrality(model, state).as_f64(), th.neutrality),
    ]))
}

/// Worst mismatches found by [`check_gradients`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GradientCheck<T> {
    /// Relative mismatch of the `ψ` derivative along random tangents.
    pub psi: T,
    /// Relative mismatch of the ion derivative along random displacements.
    pub ion: T,
    /// Derivative along the phase direction `iψ` (exactly zero), relative
    /// to `‖grad‖ √Z`.
    pub phase: T,
}

impl<T: Real> GradientCheck<T> {
    pub fn worst(&self) -> T {
        self.psi.max(self.ion)
    }
}

/// Central differences along the retraction and along ion displacements,
/// Richardson-extrapolated over the last two entries of `eps` (which must
/// halve). `eps` is relative: `ψ` steps are `eps·√Z`, ion steps `eps·scale`.
pub fn check_gradients<T: Real>(
    model: &Model<T>,
    psi: &WaveField<T>,
    ions: &IonSet<T>,
    eps: &[T],
    directions: usize,
    seed: u64,
) -> Result<GradientCheck<T>> {
    assert!(eps.len() >= 2, "need at least two step sizes");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let eval = model.evaluate(psi, ions)?;
    let grad = model.psi_gradient_with(psi, &eval.phi);
    let ion_grad = model.ion_gradient_with(ions, &eval)?;
    let w = psi.weight();
    let (h1, h2) = (eps[eps.len() - 2], eps[eps.len() - 1]);
    let richardson = |d1: T, d2: T| {
        let r = h1 / h2;
        (r * r * d2 - d1) / (r * r - T::one())
    };

    let energy_along = |tau: &[Complex<T>], t: T| -> Result<T> {
        Ok(model.energy(&retract(psi, tau, t)?, ions)?.total)
    };
    let central = |tau: &[Complex<T>], h: T| -> Result<T> {
        Ok((energy_along(tau, h)? - energy_along(tau, -h)?) / (T::lit(2.0) * h))
    };

    let mut worst_psi = T::zero();
    for _ in 0..directions {
        let mut tau = smooth_tangent(model, psi, &mut rng);
        // mix in the gradient so the derivative is well away from zero
        let gn = inner_product(&grad.tangential, &grad.tangential, w).re.sqrt();
        if gn > T::zero() {
            let tn = inner_product(&tau, &tau, w).re.sqrt();
            for (t, g) in tau.iter_mut().zip(&grad.tangential) {
                *t += g * (tn / gn);
            }
        }
        let tn = inner_product(&tau, &tau, w).re.sqrt();
        let unit = psi.target_norm().sqrt() / tn;
        for t in tau.iter_mut() {
            *t *= unit;
        }
        let exact = inner_product(&grad.grad, &tau, w).re;
        let est = richardson(central(&tau, h1)?, central(&tau, h2)?);
        worst_psi = worst_psi.max((est - exact).abs() / exact.abs());
    }

    let phase_dir: Vec<_> = psi.values().iter().map(|v| v * Complex::new(T::zero(), T::one())).collect();
    let grad_norm = inner_product(&grad.grad, &grad.grad, w).re.sqrt();
    let phase = richardson(central(&phase_dir, h1)?, central(&phase_dir, h2)?).abs()
        / (grad_norm * psi.target_norm().sqrt());

    let lattice = model.basis().lattice();
    let scale = lattice.scale();
    let mut worst_ion = T::zero();
    if !ions.is_empty() {
        for _ in 0..directions {
            let u: Vec<Vec3<T>> = (0..ions.len())
                .map(|_| Vec3::from_f64([0, 1, 2].map(|_| rng.random_range(-1.0..1.0))))
                .collect();
            let exact = u.iter().zip(&ion_grad).fold(T::zero(), |s, (a, b)| s + a.dot(*b));
            let moved = |h: T| -> Result<T> {
                let delta: Vec<_> = u.iter().map(|v| *v * h).collect();
                Ok(model.energy(psi, &ions.displaced(lattice, &delta))?.total)
            };
            let diff = |h: T| -> Result<T> { Ok((moved(h)? - moved(-h)?) / (T::lit(2.0) * h)) };
            let est = richardson(diff(h1 * scale)?, diff(h2 * scale)?);
            let norm = ion_grad.iter().fold(T::zero(), |s, g| s + g.norm2()).sqrt();
            let uscale = u.iter().fold(T::zero(), |s, g| s + g.norm2()).sqrt();
            // a displacement orthogonal to the gradient has no scale of its own
            let den = exact.abs().max(T::lit(1e-3) * norm * uscale);
            if den > T::zero() {
                worst_ion = worst_ion.max((est - exact).abs() / den);
            }
        }
    }
    Ok(GradientCheck {
        psi: worst_psi,
        ion: worst_ion,
        phase,
    })
}

/// Random tangent direction built from the lowest few plane waves.
fn smooth_tangent<T: Real>(model: &Model<T>, psi: &WaveField<T>, rng: &mut ChaCha8Rng) -> Vec<Complex<T>> {
    let grid = model.basis().wave_grid();
    let coeffs = grid
        .indices()
        .iter()
        .map(|n| {
            if n.iter().all(|m| m.abs() <= 2) {
                Complex::new(T::lit(rng.random_range(-1.0..1.0)), T::lit(rng.random_range(-1.0..1.0)))
            } else {
                Complex::new(T::zero(), T::zero())
            }
        })
        .collect();
    let mut tau = model.basis().samples(coeffs);
    let c = psi.inner(&tau).conj().re / psi.norm2();
    for (t, p) in tau.iter_mut().zip(psi.values()) {
        *t -= p * c;
    }
    tau
}

/// `|E_r(ψ(· - a), x̄ + a) - E_r(ψ, x̄)|` for `a` a whole number of grid steps.
pub fn check_translation<T: Real>(model: &Model<T>, psi: &WaveField<T>, ions: &IonSet<T>, shift: [i64; 3]) -> Result<T> {
    let dims = model.basis().wave_dims();
    let frac = Vec3([0, 1, 2].map(|a| T::from_i64_lossy(shift[a]) / T::from_usize_lossy(dims[a])));
    let moved = shifted_ions(ions, frac);
    let e0 = model.energy(psi, ions)?.total;
    let e1 = model.energy(&psi.rolled(shift), &moved)?.total;
    Ok((e1 - e0).abs())
}

/// As [`check_translation`] for an arbitrary fractional shift, applied to
/// `ψ` by band-limited interpolation.
pub fn check_translation_spectral<T: Real>(
    model: &Model<T>,
    psi: &WaveField<T>,
    ions: &IonSet<T>,
    shift: Vec3<T>,
) -> Result<T> {
    let moved = shifted_ions(ions, shift);
    let e0 = model.energy(psi, ions)?.total;
    let e1 = model.energy(&model.basis().translated(psi, shift), &moved)?.total;
    Ok((e1 - e0).abs())
}

fn shifted_ions<T: Real>(ions: &IonSet<T>, frac: Vec3<T>) -> IonSet<T> {
    ions.with_positions(ions.positions().iter().map(|p| *p + frac).collect())
}

/// `|E_r(e^{iθ}ψ) - E_r(ψ)|`.
pub fn check_phase<T: Real>(model: &Model<T>, psi: &WaveField<T>, ions: &IonSet<T>, theta: T) -> Result<T> {
    let (s, c) = theta.sin_cos();
    let e0 = model.energy(psi, ions)?.total;
    let e1 = model.energy(&psi.scaled(Complex::new(c, s)), ions)?.total;
    Ok((e1 - e0).abs())
}
