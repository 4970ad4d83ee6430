//! Renormalized energy per cell and its gradients.
//!
//! ```text
//! E_r = (ℏ²/2m)∫|∇ψ|² + ½e² Σ_{j≠k} Z_j Z_k G(x_j - x_k) + ⟨Qσ, ν⟩ + ½⟨Qν, ν⟩
//! ```
//!
//! with `σ = |e| Σ_j Z_j δ(x - x_j)` and `ν = e|ψ|²`. The ion self-terms
//! `j = k` are absent from the pair sum.

use num_complex::Complex;

use crate::basis::Basis;
use crate::coulomb::{inverse_laplacian_dropping_mean, Ewald, SpectralField};
use crate::error::Result;
use crate::fields::{ion_sigma_hat, DensitySet, IonSet, PhysParams, WaveField, COINCIDENCE_TOL};
use crate::scalar::Real;
use crate::vec3::Vec3;

/// The four parts of `E_r` and their sum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyBreakdown<T> {
    /// Kinetic.
    pub e1: T,
    /// Ion-ion.
    pub e2: T,
    /// Ion-electron.
    pub e3: T,
    /// Electron-electron.
    pub e4: T,
    pub total: T,
}

impl<T: Real> EnergyBreakdown<T> {
    pub fn new(e1: T, e2: T, e3: T, e4: T) -> Self {
        EnergyBreakdown {
            e1,
            e2,
            e3,
            e4,
            total: e1 + e2 + e3 + e4,
        }
    }
}

/// Everything derived from one `(ψ, x̄)`: energy, densities and the
/// mean-zero potential `φ = Q(σ + ν)` on the density grid.
#[derive(Debug, Clone)]
pub struct Evaluation<T> {
    pub energy: EnergyBreakdown<T>,
    pub densities: DensitySet<T>,
    pub phi: SpectralField<T>,
}

/// Gradient of `E_r` in `ψ` with respect to the real inner product
/// `Re⟨f, g⟩`, as wave-grid samples.
#[derive(Debug, Clone)]
pub struct PsiGradient<T> {
    /// `2Hψ`.
    pub grad: Vec<Complex<T>>,
    /// `grad` minus its component along `ψ`.
    pub tangential: Vec<Complex<T>>,
    /// `Re⟨Hψ, ψ⟩ / Z`.
    pub lambda: T,
    /// `Im⟨Hψ, ψ⟩ / Z`; zero up to roundoff since `H` is Hermitian.
    pub lambda_imag: T,
}

/// Discretized energy functional: basis, physical constants and lattice
/// Green function.
#[derive(Debug, Clone)]
pub struct Model<T: Real> {
    basis: Basis<T>,
    params: PhysParams<T>,
    ewald: Ewald<T>,
}

impl<T: Real> Model<T> {
    pub fn new(basis: Basis<T>, params: PhysParams<T>, ewald: Ewald<T>) -> Self {
        Model {
            basis,
            params,
            ewald,
        }
    }

    pub fn basis(&self) -> &Basis<T> {
        &self.basis
    }

    pub fn params(&self) -> &PhysParams<T> {
        &self.params
    }

    pub fn ewald(&self) -> &Ewald<T> {
        &self.ewald
    }

    fn check(&self, psi: &WaveField<T>, ions: &IonSet<T>) -> Result<()> {
        let expected = self.basis.wave_grid().len();
        if psi.values().len() != expected {
            return Err(crate::Error::ShapeMismatch {
                expected,
                found: psi.values().len(),
            });
        }
        let lattice = self.basis.lattice();
        ions.check_separation(lattice, T::lit(COINCIDENCE_TOL) * lattice.scale())
    }

    /// `σ̂`, `ν` and `ρ̂ = σ̂ + ν̂` on the density grid.
    pub fn densities(&self, psi: &WaveField<T>, ions: &IonSet<T>) -> DensitySet<T> {
        let (nu, nu_hat) = self.basis.density(psi, &self.params);
        let sigma_hat = ion_sigma_hat(ions, &self.params, self.basis.density_grid());
        let rho = sigma_hat
            .coeffs()
            .iter()
            .zip(nu_hat.coeffs())
            .map(|(s, n)| s + n)
            .collect();
        let rho_hat = SpectralField::new(self.basis.density_grid().clone(), rho)
            .expect("density grid length");
        DensitySet {
            nu,
            nu_hat,
            sigma_hat,
            rho_hat,
        }
    }

    /// `E₂ = e² Σ_{j<k} Z_j Z_k G(x_j - x_k)`.
    pub fn pair_energy(&self, ions: &IonSet<T>) -> Result<T> {
        let lattice = self.basis.lattice();
        let e2 = self.params.charge * self.params.charge;
        let mut sum = T::zero();
        for j in 0..ions.len() {
            for k in j + 1..ions.len() {
                let r = ions.cartesian(lattice, j) - ions.cartesian(lattice, k);
                sum += ions.charges()[j] * ions.charges()[k] * self.ewald.green(r)?;
            }
        }
        Ok(e2 * sum)
    }

    pub fn evaluate(&self, psi: &WaveField<T>, ions: &IonSet<T>) -> Result<Evaluation<T>> {
        self.check(psi, ions)?;
        let e2 = self.pair_energy(ions)?;
        let coeffs = self.basis.coefficients(psi.values());
        let volume = self.basis.volume();

        let wave = self.basis.wave_grid();
        let e1 = coeffs
            .iter()
            .zip(wave.k2())
            .fold(T::zero(), |s, (c, &k2)| s + c.norm_sqr() * k2)
            * volume
            * self.params.kinetic_prefactor();

        let densities = self.densities(psi, ions);
        let grid = self.basis.density_grid();
        let mut e3 = T::zero();
        let mut e4 = T::zero();
        for ((s, n), &k2) in densities
            .sigma_hat
            .coeffs()
            .iter()
            .zip(densities.nu_hat.coeffs())
            .zip(grid.k2())
        {
            if k2 == T::zero() {
                continue;
            }
            e3 += (s * n.conj()).re / k2;
            e4 += n.norm_sqr() / k2;
        }
        e3 *= volume;
        e4 *= volume * T::lit(0.5);

        let phi = inverse_laplacian_dropping_mean(&densities.rho_hat);
        Ok(Evaluation {
            energy: EnergyBreakdown::new(e1, e2, e3, e4),
            densities,
            phi,
        })
    }

    pub fn energy(&self, psi: &WaveField<T>, ions: &IonSet<T>) -> Result<EnergyBreakdown<T>> {
        Ok(self.evaluate(psi, ions)?.energy)
    }

    /// Wave coefficients of `Hψ = -(ℏ²/2m)Δψ + e P(φψ)`, `P` the projection
    /// onto the wave band.
    pub fn apply_hamiltonian(&self, psi_coeffs: &[Complex<T>], phi: &SpectralField<T>) -> Vec<Complex<T>> {
        let fine_psi = self.basis.fine_samples(psi_coeffs);
        let fine_phi = self.basis.fine_field_samples(phi);
        let product = fine_psi.iter().zip(&fine_phi).map(|(a, b)| a * b).collect();
        let projected = self.basis.restrict(&self.basis.fine_coefficients(product));
        let kin = self.params.kinetic_prefactor();
        let e = self.params.charge;
        psi_coeffs
            .iter()
            .zip(self.basis.wave_grid().k2())
            .zip(projected)
            .map(|((c, &k2), v)| *c * (kin * k2) + v * e)
            .collect()
    }

    /// `Hψ` as wave-grid samples.
    pub fn hamiltonian_samples(&self, psi: &WaveField<T>, phi: &SpectralField<T>) -> Vec<Complex<T>> {
        let coeffs = self.basis.coefficients(psi.values());
        self.basis.samples(self.apply_hamiltonian(&coeffs, phi))
    }

    /// Gradient in `ψ` for a given potential.
    pub fn psi_gradient_with(&self, psi: &WaveField<T>, phi: &SpectralField<T>) -> PsiGradient<T> {
        let h = self.hamiltonian_samples(psi, phi);
        let z = psi.target_norm();
        let rayleigh = psi.inner(&h).conj() / z;
        let two = T::lit(2.0);
        let grad: Vec<_> = h.iter().map(|v| v * two).collect();
        let radial = two * rayleigh.re;
        let tangential = grad
            .iter()
            .zip(psi.values())
            .map(|(g, p)| g - p * radial)
            .collect();
        PsiGradient {
            grad,
            tangential,
            lambda: rayleigh.re,
            lambda_imag: rayleigh.im,
        }
    }

    pub fn psi_gradient(&self, psi: &WaveField<T>, ions: &IonSet<T>) -> Result<PsiGradient<T>> {
        let eval = self.evaluate(psi, ions)?;
        Ok(self.psi_gradient_with(psi, &eval.phi))
    }

    /// `∇_{x_j} E_r = e² Z_j Σ_{k≠j} Z_k ∇G(x_j - x_k) + |e| Z_j ∇(Qν)(x_j)`.
    pub fn ion_gradient_with(&self, ions: &IonSet<T>, eval: &Evaluation<T>) -> Result<Vec<Vec3<T>>> {
        let lattice = self.basis.lattice();
        let q_nu = inverse_laplacian_dropping_mean(&eval.densities.nu_hat);
        let e2 = self.params.charge * self.params.charge;
        let abs_e = self.params.abs_charge();
        let z = ions.charges();
        let mut out = Vec::with_capacity(ions.len());
        for j in 0..ions.len() {
            let xj = ions.cartesian(lattice, j);
            let mut pair = Vec3::zero();
            for k in (0..ions.len()).filter(|&k| k != j) {
                let r = xj - ions.cartesian(lattice, k);
                pair += self.ewald.green_gradient(r)? * z[k];
            }
            let field = q_nu.gradient_at(xj).map(|c| c.re);
            out.push(pair * (e2 * z[j]) + Vec3(field) * (abs_e * z[j]));
        }
        Ok(out)
    }

    pub fn ion_gradient(&self, psi: &WaveField<T>, ions: &IonSet<T>) -> Result<Vec<Vec3<T>>> {
        let eval = self.evaluate(psi, ions)?;
        self.ion_gradient_with(ions, &eval)
    }

    /// `E₃` twice: by Parseval over the density grid and as
    /// `Σ_j |e| Z_j (Qν)(x_j)`.
    pub fn e3_crosscheck(&self, psi: &WaveField<T>, ions: &IonSet<T>) -> Result<(T, T)> {
        let eval = self.evaluate(psi, ions)?;
        let lattice = self.basis.lattice();
        let q_nu = inverse_laplacian_dropping_mean(&eval.densities.nu_hat);
        let point = (0..ions.len()).fold(T::zero(), |s, j| {
            s + self.params.abs_charge() * ions.charges()[j] * q_nu.eval_at(ions.cartesian(lattice, j)).re
        });
        Ok((eval.energy.e3, point))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::Lattice;

    fn model(dims: [usize; 3]) -> Model<f64> {
        let lat = Lattice::cubic(1.0).unwrap();
        Model::new(
            Basis::new(&lat, dims).unwrap(),
            PhysParams::dimensionless(),
            Ewald::auto(&lat).unwrap(),
        )
    }

    fn wavy(m: &Model<f64>, z: f64) -> WaveField<f64> {
        let n = m.basis().wave_grid().len();
        let values = (0..n)
            .map(|i| {
                let t = i as f64;
                Complex::new(1.0 + 0.2 * (0.37 * t).sin(), 0.15 * (0.91 * t).cos())
            })
            .collect();
        crate::fields::normalize(&m.basis().wave_field(values, z).unwrap()).unwrap()
    }

    #[test]
    fn constant_state_with_one_ion_has_zero_energy() {
        let m = model([8, 8, 8]);
        let lat = m.basis().lattice().clone();
        let ions = IonSet::new(&lat, vec![Vec3::new(0.3, 0.1, 0.7)], vec![1.0]).unwrap();
        let psi = m.basis().constant_wave(1.0);
        let e = m.energy(&psi, &ions).unwrap();
        for v in [e.e1, e.e2, e.e3, e.e4, e.total] {
            assert!(v.abs() < 1e-13, "{e:?}");
        }
    }

    #[test]
    fn two_ions_constant_state_is_pair_green() {
        let m = model([8, 8, 8]);
        let lat = m.basis().lattice().clone();
        let energy_at = |d: f64| {
            let ions = IonSet::new(&lat, vec![Vec3::zero(), Vec3::new(d, 0.0, 0.0)], vec![1.0, 1.0]).unwrap();
            m.energy(&m.basis().constant_wave(2.0), &ions).unwrap().total
        };
        let g = m.ewald().green(Vec3::new(0.2, 0.0, 0.0)).unwrap();
        assert!((energy_at(0.2) - g).abs() < 1e-12);
        assert!(energy_at(0.1) > energy_at(0.2));
    }

    #[test]
    fn plane_wave_is_free_eigenfunction() {
        let m = model([6, 6, 6]);
        let b1 = m.basis().lattice().dual().vectors()[0];
        let z = 1.0;
        let amp = (z / m.basis().volume()).sqrt();
        let values = (0..216)
            .map(|i| {
                let x = m.basis().node([i / 36, (i / 6) % 6, i % 6]);
                let t = -b1.dot(x);
                Complex::new(amp * t.cos(), amp * t.sin())
            })
            .collect();
        let psi = m.basis().wave_field(values, z).unwrap();
        let zero = SpectralField::zeros(m.basis().density_grid().clone());
        let g = m.psi_gradient_with(&psi, &zero);
        let expect = 0.5 * b1.norm2();
        assert!((g.lambda - expect).abs() < 1e-11);
        for (gv, pv) in g.grad.iter().zip(psi.values()) {
            assert!((gv - pv * (2.0 * expect)).norm() < 1e-10);
        }
        assert!(g.tangential.iter().all(|t| t.norm() < 1e-10));
    }

    #[test]
    fn tangential_is_orthogonal() {
        let m = model([6, 6, 6]);
        let lat = m.basis().lattice().clone();
        let ions = IonSet::new(&lat, vec![Vec3::new(0.2, 0.5, 0.1)], vec![1.0]).unwrap();
        let psi = wavy(&m, 1.0);
        let g = m.psi_gradient(&psi, &ions).unwrap();
        let scale = psi.norm2().sqrt() * crate::fields::inner_product(&g.grad, &g.grad, psi.weight()).re.sqrt();
        assert!(psi.inner(&g.tangential).re.abs() < 1e-12 * scale);
        assert!(g.lambda_imag.abs() < 1e-12 * g.lambda.abs().max(1.0));
    }

    #[test]
    fn energy_parts_have_expected_signs() {
        let m = model([6, 6, 6]);
        let lat = m.basis().lattice().clone();
        let ions = IonSet::new(
            &lat,
            vec![Vec3::new(0.1, 0.1, 0.1), Vec3::new(0.25, 0.2, 0.1)],
            vec![1.0, 1.0],
        )
        .unwrap();
        let e = m.energy(&wavy(&m, 2.0), &ions).unwrap();
        assert!(e.e1 >= 0.0 && e.e4 >= 0.0 && e.e2 > 0.0);
        assert_eq!(e.total, e.e1 + e.e2 + e.e3 + e.e4);
    }

    #[test]
    fn e3_forms_agree() {
        let m = model([6, 6, 6]);
        let lat = m.basis().lattice().clone();
        let ions = IonSet::new(
            &lat,
            vec![Vec3::new(0.13, 0.71, 0.4), Vec3::new(0.6, 0.2, 0.9)],
            vec![1.0, 2.0],
        )
        .unwrap();
        let (a, b) = m.e3_crosscheck(&wavy(&m, 3.0), &ions).unwrap();
        assert!((a - b).abs() <= 1e-10 * a.abs(), "{a} {b}");
        let (a, b) = m.e3_crosscheck(&m.basis().constant_wave(3.0), &ions).unwrap();
        assert!(a.abs() < 1e-14 && b.abs() < 1e-14);
    }

    #[test]
    fn repulsion_pushes_ions_apart() {
        let m = model([6, 6, 6]);
        let lat = m.basis().lattice().clone();
        let ions = IonSet::new(&lat, vec![Vec3::zero(), Vec3::new(0.1, 0.0, 0.0)], vec![1.0, 1.0]).unwrap();
        let g = m.ion_gradient(&m.basis().constant_wave(2.0), &ions).unwrap();
        // descent direction -g on ion 0 points away from ion 1 (towards -x)
        assert!(g[0][0] > 0.0 && g[1][0] < 0.0);
    }

    #[test]
    fn coincident_ions_rejected() {
        let m = model([4, 4, 4]);
        let lat = m.basis().lattice().clone();
        let ions = IonSet::new(&lat, vec![Vec3::zero(), Vec3::new(0.5, 0.0, 0.0)], vec![1.0, 1.0])
            .unwrap()
            .with_positions(vec![Vec3::zero(), Vec3::new(1e-12, 0.0, 0.0)]);
        assert!(matches!(
            m.energy(&m.basis().constant_wave(2.0), &ions),
            Err(crate::Error::IonsCoincide { .. })
        ));
    }
}
