//! Wave function, point ions, charge densities and the normalization that
//! ties them together (`∫|ψ|² = Z` is cell neutrality).

use std::sync::Arc;

use num_complex::Complex;

use crate::coulomb::{PhaseTables, SpectralField};
use crate::error::{Error, Result};
use crate::lattice::{wrap_fractional, KGrid, Lattice};
use crate::scalar::Real;
use crate::vec3::Vec3;

/// Ions closer than this (times the cell scale) count as coincident.
pub const COINCIDENCE_TOL: f64 = 1e-8;
const ZERO_FIELD_TOL: f64 = 1e-14;

/// Reduced Planck constant, electron mass and (negative) electron charge.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysParams<T> {
    pub hbar: T,
    pub mass: T,
    pub charge: T,
}

impl<T: Real> PhysParams<T> {
    pub fn new(hbar: T, mass: T, charge: T) -> Result<Self> {
        if !(hbar > T::zero()) {
            return Err(Error::InvalidParams(format!("hbar must be positive, got {hbar}")));
        }
        if !(mass > T::zero()) {
            return Err(Error::InvalidParams(format!("mass must be positive, got {mass}")));
        }
        if !(charge < T::zero()) {
            return Err(Error::InvalidParams(format!(
                "electron charge must be negative, got {charge}"
            )));
        }
        Ok(PhysParams { hbar, mass, charge })
    }

    /// `ħ = m = 1`, `e = -1`.
    pub fn dimensionless() -> Self {
        PhysParams {
            hbar: T::one(),
            mass: T::one(),
            charge: -T::one(),
        }
    }

    /// CODATA 2018 SI values.
    pub fn si() -> Self {
        PhysParams {
            hbar: T::lit(1.054_571_817e-34),
            mass: T::lit(9.109_383_701_5e-31),
            charge: T::lit(-1.602_176_634e-19),
        }
    }

    /// `|e|`.
    pub fn abs_charge(&self) -> T {
        -self.charge
    }

    /// `ħ²/2m`.
    pub fn kinetic_prefactor(&self) -> T {
        self.hbar * self.hbar / (T::lit(2.0) * self.mass)
    }
}

impl<T: Real> Default for PhysParams<T> {
    fn default() -> Self {
        Self::dimensionless()
    }
}

/// Point ions: fractional positions in `[0,1)³` and charge numbers `Z_j > 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct IonSet<T> {
    positions: Vec<Vec3<T>>,
    charges: Vec<T>,
}

impl<T: Real> IonSet<T> {
    /// Validates positivity of every charge and distinctness of positions.
    pub fn new(lattice: &Lattice<T>, positions: Vec<Vec3<T>>, charges: Vec<T>) -> Result<Self> {
        if positions.len() != charges.len() {
            return Err(Error::IonCountMismatch {
                positions: positions.len(),
                charges: charges.len(),
            });
        }
        for (index, &z) in charges.iter().enumerate() {
            if !(z > T::zero()) || !z.is_finite() {
                return Err(Error::NonPositiveCharge {
                    index,
                    charge: z.as_f64(),
                });
            }
        }
        let ions = IonSet {
            positions: positions.into_iter().map(wrap_fractional).collect(),
            charges,
        };
        ions.check_separation(lattice, T::lit(COINCIDENCE_TOL) * lattice.scale())?;
        Ok(ions)
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    /// Fractional coordinates.
    pub fn positions(&self) -> &[Vec3<T>] {
        &self.positions
    }

    pub fn charges(&self) -> &[T] {
        &self.charges
    }

    /// `Z = Σ Z_j`.
    pub fn total_charge(&self) -> T {
        self.charges.iter().fold(T::zero(), |s, &z| s + z)
    }

    pub fn cartesian(&self, lattice: &Lattice<T>, j: usize) -> Vec3<T> {
        lattice.to_cartesian(self.positions[j])
    }

    /// `d(x̄) = min_{j≠k} dist(x_j, x_k)`, or `None` for fewer than two ions.
    pub fn min_separation(&self, lattice: &Lattice<T>) -> Option<T> {
        self.closest_pair(lattice).map(|(_, _, d)| d)
    }

    fn closest_pair(&self, lattice: &Lattice<T>) -> Option<(usize, usize, T)> {
        let mut best: Option<(usize, usize, T)> = None;
        for j in 0..self.len() {
            for k in j + 1..self.len() {
                let d = lattice.torus_distance_frac(self.positions[j], self.positions[k]);
                if best.is_none_or(|(_, _, b)| d < b) {
                    best = Some((j, k, d));
                }
            }
        }
        best
    }

    /// Fails with [`Error::IonsCoincide`] when two ions are closer than `tol`.
    pub fn check_separation(&self, lattice: &Lattice<T>, tol: T) -> Result<()> {
        match self.closest_pair(lattice) {
            Some((first, second, d)) if d < tol => Err(Error::IonsCoincide {
                first,
                second,
                distance: d.as_f64(),
            }),
            _ => Ok(()),
        }
    }

    /// Same charges at new fractional positions (wrapped into the cell).
    /// Separation is not checked.
    pub fn with_positions(&self, positions: Vec<Vec3<T>>) -> Self {
        assert_eq!(positions.len(), self.len());
        IonSet {
            positions: positions.into_iter().map(wrap_fractional).collect(),
            charges: self.charges.clone(),
        }
    }

    /// Every ion moved by a Cartesian displacement (one per ion).
    pub fn displaced(&self, lattice: &Lattice<T>, delta: &[Vec3<T>]) -> Self {
        let positions = self
            .positions
            .iter()
            .zip(delta)
            .map(|(&p, &d)| p + lattice.to_fractional(d))
            .collect();
        self.with_positions(positions)
    }
}

/// Samples of `ψ` on the real-space grid of a cell with volume `|T³|`,
/// together with the target norm `Z`.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveField<T> {
    dims: [usize; 3],
    volume: T,
    values: Vec<Complex<T>>,
    target_norm: T,
}

impl<T: Real> WaveField<T> {
    pub fn new(dims: [usize; 3], volume: T, values: Vec<Complex<T>>, target_norm: T) -> Result<Self> {
        let expected = dims.iter().product();
        if values.len() != expected {
            return Err(Error::ShapeMismatch {
                expected,
                found: values.len(),
            });
        }
        Ok(WaveField {
            dims,
            volume,
            values,
            target_norm,
        })
    }

    /// `ψ ≡ √(Z/|T³|)`.
    pub fn constant(dims: [usize; 3], volume: T, target_norm: T) -> Self {
        let v = (target_norm / volume).sqrt();
        let n = dims.iter().product();
        WaveField {
            dims,
            volume,
            values: vec![Complex::new(v, T::zero()); n],
            target_norm,
        }
    }

    pub fn dims(&self) -> [usize; 3] {
        self.dims
    }

    pub fn volume(&self) -> T {
        self.volume
    }

    pub fn values(&self) -> &[Complex<T>] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Complex<T>] {
        &mut self.values
    }

    pub fn target_norm(&self) -> T {
        self.target_norm
    }

    /// Quadrature weight `|T³| / (n1 n2 n3)`.
    pub fn weight(&self) -> T {
        self.volume / T::from_usize_lossy(self.values.len())
    }

    /// `∫ f conj(g)` by grid quadrature (exact for band-limited fields).
    pub fn inner(&self, other: &[Complex<T>]) -> Complex<T> {
        inner_product(&self.values, other, self.weight())
    }

    /// `∫|ψ|²`.
    pub fn norm2(&self) -> T {
        self.values.iter().fold(T::zero(), |s, v| s + v.norm_sqr()) * self.weight()
    }

    /// Same grid and target, new samples.
    pub fn with_values(&self, values: Vec<Complex<T>>) -> Self {
        assert_eq!(values.len(), self.values.len());
        WaveField {
            values,
            ..self.clone()
        }
    }

    pub fn scaled(&self, s: Complex<T>) -> Self {
        self.with_values(self.values.iter().map(|v| *v * s).collect())
    }

    /// Cyclic shift of the samples by `shift` grid steps per axis:
    /// `ψ'(x) = ψ(x - Σ_a shift_a a_a / n_a)`.
    pub fn rolled(&self, shift: [i64; 3]) -> Self {
        let [n0, n1, n2] = self.dims;
        let mut out = self.values.clone();
        for i0 in 0..n0 {
            for i1 in 0..n1 {
                for i2 in 0..n2 {
                    let j0 = (i0 as i64 + shift[0]).rem_euclid(n0 as i64) as usize;
                    let j1 = (i1 as i64 + shift[1]).rem_euclid(n1 as i64) as usize;
                    let j2 = (i2 as i64 + shift[2]).rem_euclid(n2 as i64) as usize;
                    out[(j0 * n1 + j1) * n2 + j2] = self.values[(i0 * n1 + i1) * n2 + i2];
                }
            }
        }
        self.with_values(out)
    }
}

/// `∫ f conj(g)` by grid quadrature with weight `|T³|/N`.
pub fn inner_product<T: Real>(f: &[Complex<T>], g: &[Complex<T>], weight: T) -> Complex<T> {
    f.iter()
        .zip(g)
        .fold(Complex::new(T::zero(), T::zero()), |s, (a, b)| s + a * b.conj())
        * weight
}

/// Electron charge density `ν = e|ψ|²` at the samples of `psi`.
pub fn electron_density<T: Real>(psi: &WaveField<T>, p: &PhysParams<T>) -> Vec<T> {
    psi.values.iter().map(|v| p.charge * v.norm_sqr()).collect()
}

/// Plane-wave coefficients of the ion measure,
/// `σ(k) = (|e|/|T³|) Σ_j Z_j e^{ik·x_j}`.
pub fn ion_sigma_hat<T: Real>(
    ions: &IonSet<T>,
    p: &PhysParams<T>,
    grid: &Arc<KGrid<T>>,
) -> SpectralField<T> {
    let dims = grid.dims();
    let mut coeffs = vec![Complex::new(T::zero(), T::zero()); grid.len()];
    let prefactor = p.abs_charge() / grid.dual().cell_volume();
    for (pos, &z) in ions.positions.iter().zip(&ions.charges) {
        // tables hold e^{-ik·x}; conjugate for e^{+ik·x}
        let tables = PhaseTables::from_fractional(dims, *pos);
        let w = prefactor * z;
        let mut i = 0;
        for i0 in 0..dims[0] {
            for i1 in 0..dims[1] {
                let p01 = tables.axes[0][i0] * tables.axes[1][i1];
                for i2 in 0..dims[2] {
                    coeffs[i] += (p01 * tables.axes[2][i2]).conj() * w;
                    i += 1;
                }
            }
        }
    }
    SpectralField::new(grid.clone(), coeffs).expect("coefficient count matches grid")
}

/// Total charge per cell `∫ρ = |e|Z + e∫|ψ|²`; zero exactly when `∫|ψ|² = Z`.
pub fn neutrality_defect<T: Real>(ions: &IonSet<T>, psi: &WaveField<T>, p: &PhysParams<T>) -> T {
    p.abs_charge() * ions.total_charge() + p.charge * psi.norm2()
}

/// Rescales `psi` to `∫|ψ|² = Z` without changing its direction.
pub fn normalize<T: Real>(psi: &WaveField<T>) -> Result<WaveField<T>> {
    let norm = psi.norm2().sqrt();
    if !(norm >= T::lit(ZERO_FIELD_TOL)) {
        return Err(Error::ZeroField);
    }
    let s = psi.target_norm.sqrt() / norm;
    Ok(psi.scaled(Complex::new(s, T::zero())))
}

/// Ion measure, electron density and total charge of one configuration.
#[derive(Debug, Clone)]
pub struct DensitySet<T> {
    /// `ν = e|ψ|²` on the density grid.
    pub nu: Vec<T>,
    pub nu_hat: SpectralField<T>,
    pub sigma_hat: SpectralField<T>,
    pub rho_hat: SpectralField<T>,
}
