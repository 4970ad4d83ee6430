//! Minimization of `E_r` over normalized `ψ` and distinct ion positions.
//!
//! Each iteration takes one nonlinear conjugate-gradient step for `ψ` on the
//! sphere `∫|ψ|² = Z` and one gradient step for the ions, both with Armijo
//! backtracking. Every accepted step lowers the energy.

use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::basis::Basis;
use crate::coulomb::SpectralField;
use crate::diagnose;
use crate::energy::{EnergyBreakdown, Evaluation, Model, PsiGradient};
use crate::error::Error;
use crate::fields::{inner_product, normalize, IonSet, WaveField};
use crate::scalar::Real;
use crate::vec3::Vec3;

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig<T> {
    /// Target for `‖Hψ - λψ‖/√Z`.
    pub tol_psi: T,
    /// Target for `max_j |∇_j E_r|`.
    pub tol_force: T,
    pub max_iter: usize,
    /// First trial step, in units of the preconditioned Newton step.
    pub initial_step: T,
    /// Armijo constant `c₁`.
    pub armijo: T,
    /// Backtracking ratio in `(0, 1)`.
    pub backtrack: T,
    pub max_backtracks: usize,
    /// Smallest allowed ion separation, relative to the cell scale.
    pub d_min: T,
    /// Largest displacement of any ion in one step, relative to the cell scale.
    pub max_ion_step: T,
    pub seed: u64,
    /// Amplitude of the random perturbation of the constant start, relative
    /// to the constant value.
    pub noise: T,
    /// Kinetic preconditioning of the `ψ` gradient.
    pub precondition: bool,
    /// Hold the ions in place and minimize over `ψ` only.
    pub fix_ions: bool,
}

impl<T: Real> Default for SolverConfig<T> {
    fn default() -> Self {
        SolverConfig {
            tol_psi: T::lit(1e-6),
            tol_force: T::lit(1e-6),
            max_iter: 2000,
            initial_step: T::one(),
            armijo: T::lit(1e-4),
            backtrack: T::lit(0.5),
            max_backtracks: 40,
            d_min: T::lit(1e-3),
            max_ion_step: T::lit(0.05),
            seed: 0,
            noise: T::lit(0.1),
            precondition: true,
            fix_ions: false,
        }
    }
}

impl<T: Real> SolverConfig<T> {
    pub fn validate(&self) -> Result<(), Error> {
        let positive = [
            ("tol_psi", self.tol_psi),
            ("tol_force", self.tol_force),
            ("initial_step", self.initial_step),
            ("armijo", self.armijo),
            ("d_min", self.d_min),
            ("max_ion_step", self.max_ion_step),
        ];
        for (name, v) in positive {
            if !(v > T::zero()) || !v.is_finite() {
                return Err(Error::InvalidParams(format!("solver.{name} must be positive, got {v}")));
            }
        }
        if !(self.armijo < T::one()) {
            return Err(Error::InvalidParams("solver.armijo must be below 1".into()));
        }
        if !(self.backtrack > T::zero() && self.backtrack < T::one()) {
            return Err(Error::InvalidParams(format!(
                "solver.backtrack must lie in (0, 1), got {}",
                self.backtrack
            )));
        }
        if !(self.noise >= T::zero()) {
            return Err(Error::InvalidParams("solver.noise must be non-negative".into()));
        }
        Ok(())
    }
}

/// Residuals of the Euler-Lagrange system at a state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Residuals<T> {
    /// `‖Hψ - λψ‖/√Z`.
    pub schrodinger: T,
    /// `max_j |e| Z_j |∇φ̃_j(x_j)|`.
    pub force: T,
    /// Relative spectral residual of `-Δφ = ρ` plus `|φ̂(0)|`.
    pub poisson: T,
    /// `|∫ρ|`.
    pub neutrality: T,
}

/// Final state of a minimization.
#[derive(Debug, Clone)]
pub struct GroundState<T: Real> {
    pub psi: WaveField<T>,
    /// Mean-zero potential on the density grid.
    pub phi: SpectralField<T>,
    /// `ρ̂ = σ̂ + ν̂` on the density grid.
    pub rho_hat: SpectralField<T>,
    pub ions: IonSet<T>,
    pub lambda: T,
    /// Imaginary part of the Rayleigh form, kept as a diagnostic.
    pub lambda_imag: T,
    /// `λ/ℏ`.
    pub omega0: T,
    pub energy: EnergyBreakdown<T>,
    pub residuals: Residuals<T>,
    pub iterations: usize,
    pub converged: bool,
}

impl<T: Real> GroundState<T> {
    /// Evaluates every derived quantity of `(psi, ions)`.
    pub fn assemble(
        model: &Model<T>,
        psi: WaveField<T>,
        ions: IonSet<T>,
        iterations: usize,
        converged: bool,
    ) -> Result<Self, Error> {
        let eval = model.evaluate(&psi, &ions)?;
        let (lambda, lambda_imag) = rayleigh_lambda(model, &psi, &eval.phi);
        let residuals = Residuals {
            schrodinger: diagnose::schrodinger_residual(model, &psi, &eval.phi, lambda),
            force: diagnose::force_residual(model, &ions, &eval.densities.nu_hat)?,
            poisson: diagnose::poisson_residual(&eval.phi, &eval.densities.rho_hat),
            neutrality: crate::fields::neutrality_defect(&ions, &psi, model.params()).abs(),
        };
        Ok(GroundState {
            omega0: lambda / model.params().hbar,
            phi: eval.phi,
            rho_hat: eval.densities.rho_hat,
            energy: eval.energy,
            psi,
            ions,
            lambda,
            lambda_imag,
            residuals,
            iterations,
            converged,
        })
    }

    /// `d(x̄)`, or `None` for a single ion.
    pub fn min_separation(&self, model: &Model<T>) -> Option<T> {
        self.ions.min_separation(model.basis().lattice())
    }
}

#[derive(Debug, thiserror::Error)]
pub enum MinimizeError<T: Real> {
    #[error("no convergence after {} iterations (Schrodinger residual {:e}, force residual {:e})",
        .0.iterations, .0.residuals.schrodinger, .0.residuals.force)]
    NotConverged(Box<GroundState<T>>),

    #[error("no admissible ion step keeps the separation above {d_min:e} (current {distance:e})")]
    IonsCollapsed { distance: f64, d_min: f64 },

    #[error(transparent)]
    Model(#[from] Error),
}

/// One line of optimizer progress.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterationRecord<T> {
    pub iter: usize,
    pub energy: T,
    pub res_psi: T,
    pub res_force: T,
    /// `|∫|ψ|² - Z|`.
    pub norm_defect: T,
    pub min_separation: Option<T>,
}

impl<T: Real> IterationRecord<T> {
    /// Tab-separated progress line.
    pub fn line(&self) -> String {
        let d = self
            .min_separation
            .map_or_else(|| "-".to_string(), |d| format!("{d:.6e}"));
        format!(
            "{}\t{:.16e}\t{:.6e}\t{:.6e}\t{:.3e}\t{}",
            self.iter, self.energy, self.res_psi, self.res_force, self.norm_defect, d
        )
    }

    pub const HEADER: &'static str = "iter\tenergy\tres_psi\tres_force\tnorm_defect\td_min";
}

/// `√Z (ψ + tτ)/‖ψ + tτ‖`.
pub fn retract<T: Real>(psi: &WaveField<T>, direction: &[Complex<T>], step: T) -> Result<WaveField<T>, Error> {
    let values = psi
        .values()
        .iter()
        .zip(direction)
        .map(|(p, d)| p + d * step)
        .collect();
    normalize(&psi.with_values(values))
}

/// `⟨Hψ, ψ⟩/Z` split into real and imaginary parts.
pub fn rayleigh_lambda<T: Real>(model: &Model<T>, psi: &WaveField<T>, phi: &SpectralField<T>) -> (T, T) {
    let h = model.hamiltonian_samples(psi, phi);
    let q = inner_product(&h, psi.values(), psi.weight()) / psi.target_norm();
    (q.re, q.im)
}

/// Normalized constant plus seeded complex noise.
pub fn initial_psi<T: Real>(basis: &Basis<T>, target_norm: T, seed: u64, noise: T) -> Result<WaveField<T>, Error> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let base = basis.constant_wave(target_norm);
    let amp = (target_norm / basis.volume()).sqrt() * noise;
    let values = base
        .values()
        .iter()
        .map(|v| {
            let re: f64 = rng.random_range(-1.0..1.0);
            let im: f64 = rng.random_range(-1.0..1.0);
            v + Complex::new(T::lit(re), T::lit(im)) * amp
        })
        .collect();
    normalize(&base.with_values(values))
}

pub fn minimize<T: Real>(
    model: &Model<T>,
    psi: &WaveField<T>,
    ions: &IonSet<T>,
    cfg: &SolverConfig<T>,
) -> Result<GroundState<T>, MinimizeError<T>> {
    minimize_with(model, psi, ions, cfg, |_| {})
}

/// [`minimize`] reporting every iteration to `observer`.
pub fn minimize_with<T: Real>(
    model: &Model<T>,
    psi: &WaveField<T>,
    ions: &IonSet<T>,
    cfg: &SolverConfig<T>,
    mut observer: impl FnMut(&IterationRecord<T>),
) -> Result<GroundState<T>, MinimizeError<T>> {
    cfg.validate()?;
    let lattice = model.basis().lattice();
    let d_min = cfg.d_min * lattice.scale();
    if let Some(d) = ions.min_separation(lattice) {
        if !(d > d_min) {
            return Err(MinimizeError::IonsCollapsed {
                distance: d.as_f64(),
                d_min: d_min.as_f64(),
            });
        }
    }
    let mut state = State::new(model, normalize(psi)?, ions.clone(), cfg.fix_ions)?;
    let precond = Preconditioner::new(model.basis(), model, cfg.precondition);
    let mut cg = Conjugate::default();
    let mut psi_step = cfg.initial_step / (T::lit(2.0) * precond.e_ref);
    let mut ion_step: Option<T> = None;
    let mut stalls = 0;
    let mut converged = false;
    let mut iterations = 0;
    let sqrt_z = psi.target_norm().sqrt();

    loop {
        let res_psi = state.tangential_norm() / (T::lit(2.0) * sqrt_z);
        let res_force = state.max_force();
        observer(&IterationRecord {
            iter: iterations,
            energy: state.eval.energy.total,
            res_psi,
            res_force,
            norm_defect: (state.psi.norm2() - state.psi.target_norm()).abs(),
            min_separation: state.ions.min_separation(lattice),
        });
        if res_psi <= cfg.tol_psi && (cfg.fix_ions || res_force <= cfg.tol_force) {
            converged = true;
            break;
        }
        if iterations >= cfg.max_iter || stalls >= 3 {
            break;
        }
        iterations += 1;

        let mut progressed = false;
        if res_psi > T::zero() {
            match psi_block(model, &mut state, &mut cg, &precond, psi_step, cfg)? {
                Some(t) => {
                    psi_step = t;
                    progressed = true;
                }
                None => cg = Conjugate::default(),
            }
        }
        if !cfg.fix_ions && res_force > cfg.tol_force {
            match ion_block(model, &mut state, ion_step, d_min, cfg)? {
                IonStep::Taken(t) => {
                    ion_step = Some(t);
                    progressed = true;
                }
                IonStep::NoDescent => {}
            }
        }
        stalls = if progressed { 0 } else { stalls + 1 };
    }

    let State { psi, ions, .. } = state;
    let ground = GroundState::assemble(model, psi, ions, iterations, converged)?;
    if converged {
        Ok(ground)
    } else {
        Err(MinimizeError::NotConverged(Box::new(ground)))
    }
}

struct State<T: Real> {
    psi: WaveField<T>,
    ions: IonSet<T>,
    eval: Evaluation<T>,
    grad: PsiGradient<T>,
    ion_grad: Vec<Vec3<T>>,
    fix_ions: bool,
}

impl<T: Real> State<T> {
    fn new(model: &Model<T>, psi: WaveField<T>, ions: IonSet<T>, fix_ions: bool) -> Result<Self, Error> {
        let eval = model.evaluate(&psi, &ions)?;
        Self::from_eval(model, psi, ions, eval, fix_ions)
    }

    fn from_eval(
        model: &Model<T>,
        psi: WaveField<T>,
        ions: IonSet<T>,
        eval: Evaluation<T>,
        fix_ions: bool,
    ) -> Result<Self, Error> {
        let grad = model.psi_gradient_with(&psi, &eval.phi);
        let ion_grad = if fix_ions {
            vec![Vec3::zero(); ions.len()]
        } else {
            model.ion_gradient_with(&ions, &eval)?
        };
        Ok(State {
            psi,
            ions,
            eval,
            grad,
            ion_grad,
            fix_ions,
        })
    }

    fn tangential_norm(&self) -> T {
        inner_product(&self.grad.tangential, &self.grad.tangential, self.psi.weight())
            .re
            .sqrt()
    }

    fn max_force(&self) -> T {
        self.ion_grad.iter().fold(T::zero(), |m, g| m.max(g.norm()))
    }
}

/// Diagonal kinetic preconditioner `1/(1 + (ℏ²/2m)k²/E_ref)`.
struct Preconditioner<T: Real> {
    weights: Option<Vec<T>>,
    e_ref: T,
    basis: Basis<T>,
}

impl<T: Real> Preconditioner<T> {
    fn new(basis: &Basis<T>, model: &Model<T>, enabled: bool) -> Self {
        let kin = model.params().kinetic_prefactor();
        let k2_min = basis
            .wave_grid()
            .k2()
            .iter()
            .copied()
            .filter(|&k2| k2 > T::zero())
            .fold(T::infinity(), |a, b| a.min(b));
        let e_ref = kin * k2_min;
        let weights = enabled.then(|| {
            basis
                .wave_grid()
                .k2()
                .iter()
                .map(|&k2| T::one() / (T::one() + kin * k2 / e_ref))
                .collect()
        });
        Preconditioner {
            weights,
            e_ref,
            basis: basis.clone(),
        }
    }

    fn apply(&self, g: &[Complex<T>]) -> Vec<Complex<T>> {
        match &self.weights {
            None => g.to_vec(),
            Some(w) => {
                let mut c = self.basis.coefficients(g);
                for (v, &wk) in c.iter_mut().zip(w) {
                    *v *= wk;
                }
                self.basis.samples(c)
            }
        }
    }
}

/// Polak-Ribière memory for the `ψ` block.
struct Conjugate<T> {
    direction: Option<Vec<Complex<T>>>,
    gradient: Vec<Complex<T>>,
    /// `Re⟨g, Pg⟩` at the previous step.
    g_pg: T,
}

impl<T: Real> Default for Conjugate<T> {
    fn default() -> Self {
        Conjugate {
            direction: None,
            gradient: Vec::new(),
            g_pg: T::zero(),
        }
    }
}

fn project_tangent<T: Real>(psi: &WaveField<T>, v: &mut [Complex<T>]) {
    let c = psi.inner(v).conj().re / psi.norm2();
    for (x, p) in v.iter_mut().zip(psi.values()) {
        *x -= p * c;
    }
}

fn real_inner<T: Real>(a: &[Complex<T>], b: &[Complex<T>], w: T) -> T {
    inner_product(a, b, w).re
}

/// One CG step for `ψ`. Returns the accepted step length, or `None` when the
/// line search finds no decrease.
fn psi_block<T: Real>(
    model: &Model<T>,
    state: &mut State<T>,
    cg: &mut Conjugate<T>,
    precond: &Preconditioner<T>,
    step_guess: T,
    cfg: &SolverConfig<T>,
) -> Result<Option<T>, Error> {
    let w = state.psi.weight();
    let g = &state.grad.tangential;
    let mut pg = precond.apply(g);
    project_tangent(&state.psi, &mut pg);
    let g_pg = real_inner(g, &pg, w);

    let mut direction: Vec<Complex<T>> = pg.iter().map(|v| -v).collect();
    if let Some(prev) = &cg.direction {
        let diff: Vec<_> = g.iter().zip(&cg.gradient).map(|(a, b)| a - b).collect();
        let beta = (real_inner(&diff, &pg, w) / cg.g_pg).max(T::zero());
        if beta > T::zero() && beta.is_finite() {
            let mut carried = prev.clone();
            project_tangent(&state.psi, &mut carried);
            for (d, c) in direction.iter_mut().zip(&carried) {
                *d += c * beta;
            }
        }
    }
    let mut slope = real_inner(g, &direction, w);
    if !(slope < T::zero()) {
        direction = pg.iter().map(|v| -v).collect();
        slope = -g_pg;
    }
    if !(slope < T::zero()) {
        return Ok(None);
    }

    let e0 = state.eval.energy.total;
    let psi0 = state.psi.clone();
    let ions = state.ions.clone();
    let trial = |t: T| -> Trial<T, (WaveField<T>, Evaluation<T>)> {
        let psi = retract(&psi0, &direction, t)?;
        let eval = model.evaluate(&psi, &ions)?;
        Ok(Some((eval.energy.total, (psi, eval))))
    };
    let found = line_search(e0, slope, step_guess, T::infinity(), cfg, trial)?;
    let Some((t, (psi, eval))) = found else {
        return Ok(None);
    };

    let g_old = std::mem::take(&mut state.grad.tangential);
    *state = State::from_eval(model, psi, state.ions.clone(), eval, state.fix_ions)?;
    cg.direction = Some(direction);
    cg.gradient = g_old;
    cg.g_pg = g_pg;
    Ok(Some(t))
}

enum IonStep<T> {
    Taken(T),
    NoDescent,
}

fn ion_block<T: Real>(
    model: &Model<T>,
    state: &mut State<T>,
    step_guess: Option<T>,
    d_min: T,
    cfg: &SolverConfig<T>,
) -> Result<IonStep<T>, MinimizeError<T>> {
    let lattice = model.basis().lattice();
    let g = state.ion_grad.clone();
    let gmax = g.iter().fold(T::zero(), |m, v| m.max(v.norm()));
    if !(gmax > T::zero()) {
        return Ok(IonStep::NoDescent);
    }
    let t_max = cfg.max_ion_step * lattice.scale() / gmax;
    let slope = -g.iter().fold(T::zero(), |s, v| s + v.norm2());
    let guess = step_guess.unwrap_or(t_max).min(t_max);

    let e0 = state.eval.energy.total;
    let psi = state.psi.clone();
    let ions0 = state.ions.clone();
    let mut blocked = false;
    let trial = |t: T| -> Trial<T, (IonSet<T>, Evaluation<T>)> {
        let delta: Vec<_> = g.iter().map(|v| *v * (-t)).collect();
        let ions = ions0.displaced(lattice, &delta);
        if ions.min_separation(lattice).is_some_and(|d| !(d > d_min)) {
            blocked = true;
            return Ok(None);
        }
        let eval = model.evaluate(&psi, &ions)?;
        Ok(Some((eval.energy.total, (ions, eval))))
    };
    let found = line_search(e0, slope, guess, t_max, cfg, trial)?;
    match found {
        Some((t, (ions, eval))) => {
            *state = State::from_eval(model, state.psi.clone(), ions, eval, state.fix_ions)?;
            Ok(IonStep::Taken(t))
        }
        None if blocked => Err(MinimizeError::IonsCollapsed {
            distance: ions0.min_separation(lattice).map_or(f64::INFINITY, |d| d.as_f64()),
            d_min: d_min.as_f64(),
        }),
        None => Ok(IonStep::NoDescent),
    }
}

/// Armijo backtracking with a parabolic first guess.
///
/// `f(t)` returns the energy and payload at step `t`, or `None` if `t` is
/// inadmissible. A probe at `guess` fixes the curvature of the model
/// `f(0) + slope t + c t²`; its minimizer (clamped to `t_max`) starts the
/// backtracking, and the first step meeting the Armijo condition wins.
/// Energy and payload at a trial step, `None` if the step is inadmissible.
type Trial<T, P> = Result<Option<(T, P)>, Error>;

fn line_search<T: Real, P>(
    f0: T,
    slope: T,
    guess: T,
    t_max: T,
    cfg: &SolverConfig<T>,
    mut f: impl FnMut(T) -> Trial<T, P>,
) -> Trial<T, P> {
    let armijo = |t: T, ft: T| ft <= f0 + cfg.armijo * t * slope;
    let mut t = guess.min(t_max);
    let mut probe = None;
    for _ in 0..cfg.max_backtracks {
        if let Some(hit) = f(t)? {
            probe = Some(hit);
            break;
        }
        t *= cfg.backtrack;
    }
    let Some((ft, payload)) = probe else {
        return Ok(None);
    };
    let curvature = (ft - f0 - slope * t) / (t * t);
    let mut candidate = if curvature > T::zero() {
        (-slope / (T::lit(2.0) * curvature)).min(t_max)
    } else {
        (t * T::lit(2.0)).min(t_max)
    };
    if !candidate.is_finite() || !(candidate > T::zero()) {
        candidate = t;
    }
    // the probe itself is reused when the fit lands on it
    let close = (candidate - t).abs() <= T::lit(1e-3) * t;
    if close && armijo(t, ft) {
        return Ok(Some((t, payload)));
    }
    let mut t = candidate;
    for _ in 0..cfg.max_backtracks {
        if let Some((ft, payload)) = f(t)? {
            if armijo(t, ft) {
                return Ok(Some((t, payload)));
            }
        }
        t *= cfg.backtrack;
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coulomb::Ewald;
    use crate::fields::PhysParams;
    use crate::lattice::Lattice;

    fn model(n: usize) -> Model<f64> {
        let lat = Lattice::cubic(1.0).unwrap();
        Model::new(
            Basis::new(&lat, [n, n, n]).unwrap(),
            PhysParams::dimensionless(),
            Ewald::auto(&lat).unwrap(),
        )
    }

    #[test]
    fn retract_keeps_norm_and_zero_step() {
        let m = model(4);
        let psi = initial_psi(m.basis(), 2.0, 3, 0.3).unwrap();
        let dir: Vec<_> = (0..64).map(|i| Complex::new((i as f64).sin(), 0.5)).collect();
        let r = retract(&psi, &dir, 0.7).unwrap();
        assert!((r.norm2() - 2.0).abs() < 1e-13);
        let r0 = retract(&psi, &dir, 0.0).unwrap();
        for (a, b) in r0.values().iter().zip(psi.values()) {
            assert!((a - b).norm() < 1e-14);
        }
    }

    #[test]
    fn retract_derivative_is_direction() {
        let m = model(4);
        let psi = initial_psi(m.basis(), 1.0, 5, 0.3).unwrap();
        let mut tau: Vec<_> = (0..64).map(|i| Complex::new((0.3 * i as f64).cos(), 0.2)).collect();
        project_tangent(&psi, &mut tau);
        let w = psi.weight();
        let err = |eps: f64| {
            let r = retract(&psi, &tau, eps).unwrap();
            let d: Vec<_> = r
                .values()
                .iter()
                .zip(psi.values())
                .zip(&tau)
                .map(|((a, b), t)| (a - b) / eps - t)
                .collect();
            real_inner(&d, &d, w).sqrt()
        };
        let (e1, e2) = (err(1e-3), err(5e-4));
        assert!(e2 < e1 && (e1 / e2 - 2.0).abs() < 0.1, "{e1} {e2}");
    }

    #[test]
    fn rayleigh_shift_by_constant_potential() {
        let m = model(4);
        let psi = initial_psi(m.basis(), 1.0, 1, 0.3).unwrap();
        let zero = SpectralField::zeros(m.basis().density_grid().clone());
        let mut c = zero.clone();
        let z = c.grid().zero_index();
        c.coeffs_mut()[z] = Complex::new(0.4, 0.0);
        let (l0, _) = rayleigh_lambda(&m, &psi, &zero);
        let (l1, im) = rayleigh_lambda(&m, &psi, &c);
        assert!((l1 - l0 - m.params().charge * 0.4).abs() < 1e-12);
        assert!(im.abs() < 1e-12);
    }

    #[test]
    fn single_ion_converges_below_constant_state() {
        let m = model(6);
        let lat = m.basis().lattice().clone();
        let ions = IonSet::new(&lat, vec![Vec3::new(0.5, 0.5, 0.5)], vec![1.0]).unwrap();
        let psi = initial_psi(m.basis(), 1.0, 7, 0.1).unwrap();
        let mut energies = Vec::new();
        let gs = minimize_with(&m, &psi, &ions, &SolverConfig::default(), |r| energies.push(r.energy)).unwrap();
        assert!(gs.converged);
        assert!(gs.energy.total < 0.0);
        assert!(gs.residuals.schrodinger <= 1e-6 && gs.residuals.force <= 1e-6);
        for w in energies.windows(2) {
            assert!(w[1] <= w[0] + 1e-12);
        }
    }

    #[test]
    fn invalid_config_rejected() {
        let cfg = SolverConfig::<f64> {
            backtrack: 1.5,
            ..Default::default()
        };
        assert!(cfg.validate().is_err());
    }
}
