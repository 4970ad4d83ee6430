//! Plane-wave discretization: a wave grid for `ψ` and a density grid with
//! twice the points per axis for `|ψ|²`, the potential and their products.
//!
//! `ψ` carries the frequencies of its own grid. Products of two such fields
//! have at most twice that band, so on the doubled grid `ν = e|ψ|²` is exact,
//! and the product `φψ` projected back to the wave band is alias-free.

use std::sync::Arc;

use num_complex::Complex;

use crate::coulomb::SpectralField;
use crate::error::Result;
use crate::fft::Fft3;
use crate::fields::{PhysParams, WaveField};
use crate::lattice::{make_kgrid, storage_index, KGrid, Lattice};
use crate::scalar::Real;
use crate::vec3::Vec3;

#[derive(Debug, Clone)]
pub struct Basis<T: Real> {
    lattice: Lattice<T>,
    wave: Arc<KGrid<T>>,
    density: Arc<KGrid<T>>,
    wave_fft: Fft3<T>,
    density_fft: Fft3<T>,
    /// Density-grid position of each wave-grid frequency.
    embed: Vec<usize>,
}

impl<T: Real> Basis<T> {
    pub fn new(lattice: &Lattice<T>, wave_dims: [usize; 3]) -> Result<Self> {
        let wave = Arc::new(make_kgrid(lattice.dual(), wave_dims)?);
        let density_dims = wave_dims.map(|n| 2 * n);
        let density = Arc::new(make_kgrid(lattice.dual(), density_dims)?);
        let embed = wave
            .indices()
            .iter()
            .map(|n| {
                density
                    .position_of(*n)
                    .expect("doubled grid contains every wave frequency")
            })
            .collect();
        Ok(Basis {
            lattice: lattice.clone(),
            wave_fft: Fft3::new(wave_dims),
            density_fft: Fft3::new(density_dims),
            wave,
            density,
            embed,
        })
    }

    pub fn lattice(&self) -> &Lattice<T> {
        &self.lattice
    }

    pub fn volume(&self) -> T {
        self.lattice.volume()
    }

    pub fn wave_grid(&self) -> &Arc<KGrid<T>> {
        &self.wave
    }

    pub fn density_grid(&self) -> &Arc<KGrid<T>> {
        &self.density
    }

    pub fn wave_dims(&self) -> [usize; 3] {
        self.wave.dims()
    }

    pub fn density_dims(&self) -> [usize; 3] {
        self.density.dims()
    }

    /// Cartesian position of wave-grid node `r`.
    pub fn node(&self, r: [usize; 3]) -> Vec3<T> {
        let dims = self.wave_dims();
        let frac = Vec3([0, 1, 2].map(|a| T::from_usize_lossy(r[a]) / T::from_usize_lossy(dims[a])));
        self.lattice.to_cartesian(frac)
    }

    /// Wave field with the given samples.
    pub fn wave_field(&self, values: Vec<Complex<T>>, target_norm: T) -> Result<WaveField<T>> {
        WaveField::new(self.wave_dims(), self.volume(), values, target_norm)
    }

    pub fn constant_wave(&self, target_norm: T) -> WaveField<T> {
        WaveField::constant(self.wave_dims(), self.volume(), target_norm)
    }

    /// Plane-wave coefficients of `ψ`.
    pub fn coefficients(&self, samples: &[Complex<T>]) -> Vec<Complex<T>> {
        let mut buf = samples.to_vec();
        self.wave_fft.to_coefficients(&mut buf);
        buf
    }

    /// Wave-grid samples from wave coefficients.
    pub fn samples(&self, mut coeffs: Vec<Complex<T>>) -> Vec<Complex<T>> {
        self.wave_fft.to_samples(&mut coeffs);
        coeffs
    }

    /// Samples on the density grid of the band-limited field with the given
    /// wave coefficients.
    pub fn fine_samples(&self, wave_coeffs: &[Complex<T>]) -> Vec<Complex<T>> {
        let mut buf = vec![Complex::new(T::zero(), T::zero()); self.density.len()];
        for (c, &j) in wave_coeffs.iter().zip(&self.embed) {
            buf[j] = *c;
        }
        self.density_fft.to_samples(&mut buf);
        buf
    }

    /// Keeps the wave-band part of density-grid coefficients.
    pub fn restrict(&self, fine_coeffs: &[Complex<T>]) -> Vec<Complex<T>> {
        self.embed.iter().map(|&j| fine_coeffs[j]).collect()
    }

    /// Coefficients on the density grid of real density-grid samples.
    pub fn fine_transform(&self, samples: &[T]) -> SpectralField<T> {
        let mut buf: Vec<_> = samples.iter().map(|&v| Complex::new(v, T::zero())).collect();
        self.density_fft.to_coefficients(&mut buf);
        SpectralField::new(self.density.clone(), buf).expect("density grid length")
    }

    /// Coefficients of complex density-grid samples.
    pub fn fine_coefficients(&self, mut samples: Vec<Complex<T>>) -> Vec<Complex<T>> {
        self.density_fft.to_coefficients(&mut samples);
        samples
    }

    /// Density-grid samples of a density-grid field.
    pub fn fine_field_samples(&self, field: &SpectralField<T>) -> Vec<Complex<T>> {
        let mut buf = field.coeffs().to_vec();
        self.density_fft.to_samples(&mut buf);
        buf
    }

    /// Real parts of the density-grid samples of a density-grid field.
    pub fn fine_real_samples(&self, field: &SpectralField<T>) -> Vec<T> {
        let mut buf = field.coeffs().to_vec();
        self.density_fft.to_samples(&mut buf);
        buf.into_iter().map(|c| c.re).collect()
    }

    /// `ν = e|ψ|²` on the density grid and its coefficients.
    pub fn density(&self, psi: &WaveField<T>, p: &PhysParams<T>) -> (Vec<T>, SpectralField<T>) {
        let coeffs = self.coefficients(psi.values());
        let fine = self.fine_samples(&coeffs);
        let nu: Vec<T> = fine.iter().map(|v| p.charge * v.norm_sqr()).collect();
        let nu_hat = self.fine_transform(&nu);
        (nu, nu_hat)
    }

    /// `ψ(x - s)` for a fractional shift `s`, by phase factors on the
    /// coefficients. For shifts by whole grid steps this equals
    /// [`WaveField::rolled`].
    pub fn translated(&self, psi: &WaveField<T>, shift: Vec3<T>) -> WaveField<T> {
        let mut coeffs = self.coefficients(psi.values());
        for (c, n) in coeffs.iter_mut().zip(self.wave.indices()) {
            let theta = T::TAU()
                * (T::from_i64_lossy(n[0]) * shift[0]
                    + T::from_i64_lossy(n[1]) * shift[1]
                    + T::from_i64_lossy(n[2]) * shift[2]);
            let (s, co) = theta.sin_cos();
            *c *= Complex::new(co, s);
        }
        psi.with_values(self.samples(coeffs))
    }

    /// Signed frequencies of the wave band along each axis.
    pub fn wave_band(&self) -> [(i64, i64); 3] {
        self.wave_dims().map(|n| (-((n / 2) as i64), n.div_ceil(2) as i64 - 1))
    }

    /// Whether a signed frequency vector lies in the wave band.
    pub fn in_wave_band(&self, n: [i64; 3]) -> bool {
        let dims = self.wave_dims();
        (0..3).all(|a| storage_index(n[a], dims[a]).is_some())
    }
}
