//! The periodic Coulomb problem on the torus.
//!
//! [`apply_q`] inverts `-Δ` on neutral band-limited data. [`Ewald`] evaluates
//! the lattice Green function
//!
//! ```text
//! G(x) = (1/|T³|) Σ_{k≠0} e^{-ik·x} / k²,    -ΔG = δ - 1/|T³|,    ∫G = 0
//! ```
//!
//! through the usual Gaussian split with parameter `η`:
//!
//! ```text
//! G(x) = (1/|T³|) Σ_{k≠0} e^{-k²/4η} cos(k·x)/k²
//!      + Σ_n erfc(√η |x+n|) / (4π|x+n|)
//!      - 1/(4η|T³|)
//! ```
//!
//! and its regular part `D(x) = G(x) - 1/(4π|x|)` near the origin.

use std::sync::Arc;

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::lattice::{KGrid, Lattice};
use crate::scalar::Real;
use crate::vec3::Vec3;

/// Relative threshold on `|c(0)|` for a source to count as neutral.
const NEUTRALITY_TOL: f64 = 1e-10;
/// Points closer than this (times the cell scale) to a lattice point are singular.
const SINGULAR_TOL: f64 = 1e-10;

/// Plane-wave coefficients `c(k)` of a periodic field on a [`KGrid`].
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralField<T> {
    grid: Arc<KGrid<T>>,
    coeffs: Vec<Complex<T>>,
}

impl<T: Real> SpectralField<T> {
    pub fn new(grid: Arc<KGrid<T>>, coeffs: Vec<Complex<T>>) -> Result<Self> {
        if coeffs.len() != grid.len() {
            return Err(Error::ShapeMismatch {
                expected: grid.len(),
                found: coeffs.len(),
            });
        }
        Ok(SpectralField { grid, coeffs })
    }

    pub fn zeros(grid: Arc<KGrid<T>>) -> Self {
        let coeffs = vec![Complex::new(T::zero(), T::zero()); grid.len()];
        SpectralField { grid, coeffs }
    }

    pub fn grid(&self) -> &Arc<KGrid<T>> {
        &self.grid
    }

    pub fn coeffs(&self) -> &[Complex<T>] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [Complex<T>] {
        &mut self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<Complex<T>> {
        self.coeffs
    }

    /// The `k = 0` coefficient, i.e. the cell average.
    pub fn mean(&self) -> Complex<T> {
        self.coeffs[self.grid.zero_index()]
    }

    pub fn is_mean_zero(&self) -> bool {
        self.mean() == Complex::new(T::zero(), T::zero())
    }

    pub fn max_abs(&self) -> T {
        self.coeffs.iter().fold(T::zero(), |m, c| m.max(c.norm_sqr()))
            .sqrt()
    }

    /// `c(-k) = conj(c(k))` on every representable pair, to `tol` relative to
    /// the largest coefficient.
    pub fn is_real(&self, tol: T) -> bool {
        let scale = self.max_abs();
        (0..self.coeffs.len()).all(|i| match self.grid.negated(i) {
            Some(j) => (self.coeffs[j] - self.coeffs[i].conj()).norm_sqr().sqrt() <= tol * scale,
            None => true,
        })
    }

    /// Spectral `-Δ`: multiplies each coefficient by `|k|²`.
    pub fn neg_laplacian(&self) -> Self {
        let coeffs = self
            .coeffs
            .iter()
            .zip(self.grid.k2())
            .map(|(c, &k2)| *c * k2)
            .collect();
        SpectralField {
            grid: self.grid.clone(),
            coeffs,
        }
    }

    /// `Σ_k conj(a(k)) b(k)`.
    pub fn dot(&self, other: &Self) -> Complex<T> {
        self.coeffs
            .iter()
            .zip(&other.coeffs)
            .fold(Complex::new(T::zero(), T::zero()), |acc, (a, b)| acc + a.conj() * b)
    }

    /// Exact trigonometric evaluation `Σ_k c(k) e^{-ik·x}` at a Cartesian point.
    pub fn eval_at(&self, x: Vec3<T>) -> Complex<T> {
        let tables = PhaseTables::new(&self.grid, x);
        let mut acc = Complex::new(T::zero(), T::zero());
        self.for_each_phase(&tables, |i, phase| acc += self.coeffs[i] * phase);
        acc
    }

    /// Exact gradient `Σ_k c(k) (-ik) e^{-ik·x}` at a Cartesian point.
    pub fn gradient_at(&self, x: Vec3<T>) -> [Complex<T>; 3] {
        let tables = PhaseTables::new(&self.grid, x);
        let zero = Complex::new(T::zero(), T::zero());
        let mut acc = [zero; 3];
        let kvecs = self.grid.kvecs();
        self.for_each_phase(&tables, |i, phase| {
            // (-i) c e^{-ik·x}
            let v = self.coeffs[i] * phase;
            let minus_i_v = Complex::new(v.im, -v.re);
            for (a, slot) in acc.iter_mut().enumerate() {
                *slot += minus_i_v * kvecs[i][a];
            }
        });
        acc
    }

    fn for_each_phase(&self, tables: &PhaseTables<T>, mut f: impl FnMut(usize, Complex<T>)) {
        let [n0, n1, n2] = self.grid.dims();
        let mut i = 0;
        for i0 in 0..n0 {
            for i1 in 0..n1 {
                let p01 = tables.axes[0][i0] * tables.axes[1][i1];
                for i2 in 0..n2 {
                    f(i, p01 * tables.axes[2][i2]);
                    i += 1;
                }
            }
        }
    }
}

/// Per-axis factors `e^{-2πi m_a f_a}` whose products give `e^{-ik·x}`.
pub(crate) struct PhaseTables<T> {
    pub(crate) axes: [Vec<Complex<T>>; 3],
}

impl<T: Real> PhaseTables<T> {
    fn new(grid: &KGrid<T>, x: Vec3<T>) -> Self {
        Self::from_fractional(grid.dims(), grid.fractional(x))
    }

    pub(crate) fn from_fractional(dims: [usize; 3], frac: Vec3<T>) -> Self {
        let axes = [0, 1, 2].map(|a| {
            (0..dims[a])
                .map(|i| {
                    let m = crate::lattice::centered_index(i, dims[a]);
                    let theta = -T::TAU() * T::from_i64_lossy(m) * frac[a];
                    let (s, c) = theta.sin_cos();
                    Complex::new(c, s)
                })
                .collect()
        });
        PhaseTables { axes }
    }
}

/// Solves `-Δφ = ρ` for a neutral source: `φ(k) = ρ(k)/k²`, `φ(0) = 0`.
pub fn apply_q<T: Real>(rho: &SpectralField<T>) -> Result<SpectralField<T>> {
    let mean = rho.mean().norm_sqr().sqrt();
    let largest = rho.max_abs();
    if mean > T::lit(NEUTRALITY_TOL) * largest {
        return Err(Error::NonNeutralSource {
            mean: mean.as_f64(),
            largest: largest.as_f64(),
        });
    }
    Ok(inverse_laplacian_dropping_mean(rho))
}

/// `-Δ⁻¹` on the mean-zero part of `rho`; the `k = 0` mode is discarded.
pub fn inverse_laplacian_dropping_mean<T: Real>(rho: &SpectralField<T>) -> SpectralField<T> {
    let coeffs = rho
        .coeffs
        .iter()
        .zip(rho.grid.k2())
        .map(|(c, &k2)| {
            if k2 == T::zero() {
                Complex::new(T::zero(), T::zero())
            } else {
                *c / k2
            }
        })
        .collect();
    SpectralField {
        grid: rho.grid.clone(),
        coeffs,
    }
}

/// Point evaluation of a spectral field (see [`SpectralField::eval_at`]).
pub fn eval_potential_at<T: Real>(phi: &SpectralField<T>, x: Vec3<T>) -> Complex<T> {
    phi.eval_at(x)
}

/// Gaussian splitting parameter and truncation radii of the Ewald sums.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EwaldParams<T> {
    /// Splitting parameter, inverse length squared.
    pub eta: T,
    /// Real-space image cutoff.
    pub rcut: T,
    /// Reciprocal-space cutoff.
    pub kcut: T,
}

impl<T: Real> EwaldParams<T> {
    /// `η = π / L²` with `L = |T³|^{1/3}`, and both tails below the scalar's
    /// tail tolerance.
    pub fn auto(lattice: &Lattice<T>) -> Self {
        let l = lattice.scale();
        Self::with_eta(T::PI() / (l * l))
    }

    /// Cutoffs chosen so `erfc(√η rcut)` and `exp(-kcut²/4η)` fall below the
    /// tail tolerance.
    pub fn with_eta(eta: T) -> Self {
        let tol = T::tail_tolerance();
        let z = erfc_inverse(tol);
        let root = eta.sqrt();
        EwaldParams {
            eta,
            rcut: z / root,
            kcut: T::lit(2.0) * root * (-tol.ln()).sqrt(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("eta", self.eta), ("rcut", self.rcut), ("kcut", self.kcut)] {
            if !(v > T::zero() && v.is_finite()) {
                return Err(Error::InvalidEwald(format!("{name} must be positive and finite, got {v}")));
            }
        }
        Ok(())
    }
}

/// Smallest `z ≥ 0` with `erfc(z) ≤ tol`, by bisection.
fn erfc_inverse<T: Real>(tol: T) -> T {
    let (mut lo, mut hi) = (T::zero(), T::lit(12.0));
    for _ in 0..200 {
        let mid = (lo + hi) * T::lit(0.5);
        if mid.erfc() > tol {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    hi
}

/// `erf(z)/z`, smooth through `z = 0`.
fn erf_over_z<T: Real>(z: T) -> T {
    if z < T::lit(0.5) {
        let z2 = z * z;
        let mut term = T::one();
        let mut sum = T::one();
        for n in 1..16 {
            let nf = T::from_usize_lossy(n);
            term = -term * z2 / nf;
            sum += term / (T::lit(2.0) * nf + T::one());
        }
        sum * T::lit(2.0) / T::PI().sqrt()
    } else {
        z.erf() / z
    }
}

/// `(d/dz)(erf(z)/z) / z`, smooth through `z = 0`.
fn erf_over_z_slope<T: Real>(z: T) -> T {
    let two_over_sqrt_pi = T::lit(2.0) / T::PI().sqrt();
    if z < T::lit(0.5) {
        let z2 = z * z;
        // Σ_{n≥1} (-1)^n 2n z^{2n-2} / (n! (2n+1))
        let mut power = T::one(); // (-1)^n z^{2n-2} / n!
        let mut sum = T::zero();
        for n in 1..16 {
            let nf = T::from_usize_lossy(n);
            power = if n == 1 { -T::one() } else { -power * z2 / nf };
            sum += power * T::lit(2.0) * nf / (T::lit(2.0) * nf + T::one());
        }
        sum * two_over_sqrt_pi
    } else {
        let d = two_over_sqrt_pi * (-z * z).exp() / z - z.erf() / (z * z);
        d / z
    }
}

/// Ewald evaluator for the lattice Green function and its regular part.
#[derive(Debug, Clone)]
pub struct Ewald<T> {
    lattice: Lattice<T>,
    params: EwaldParams<T>,
    alpha: T,
    images: Vec<Vec3<T>>,
    /// One representative per ±k pair, weighted `2 e^{-k²/4η} / (k² |T³|)`.
    kterms: Vec<(Vec3<T>, T)>,
    background: T,
}

impl<T: Real> Ewald<T> {
    pub fn new(lattice: &Lattice<T>, params: EwaldParams<T>) -> Result<Self> {
        params.validate()?;
        let alpha = params.eta.sqrt();
        let volume = lattice.volume();

        // minimum images lie within half the sum of the period lengths
        let reach_x = lattice
            .vectors()
            .iter()
            .fold(T::zero(), |s, a| s + a.norm())
            * T::lit(0.5);
        let radius = params.rcut + reach_x;
        let b = lattice.dual().vectors();
        let bounds: Vec<i64> = b
            .iter()
            .map(|bv| (radius * bv.norm() / T::TAU()).ceil().to_i64().unwrap_or(0))
            .collect();
        let mut images = Vec::new();
        for n0 in -bounds[0]..=bounds[0] {
            for n1 in -bounds[1]..=bounds[1] {
                for n2 in -bounds[2]..=bounds[2] {
                    let v = lattice.point([n0, n1, n2]);
                    if v.norm() <= radius {
                        images.push(v);
                    }
                }
            }
        }

        let a = lattice.vectors();
        let kb: Vec<i64> = a
            .iter()
            .map(|av| (params.kcut * av.norm() / T::TAU()).ceil().to_i64().unwrap_or(0))
            .collect();
        let mut kterms = Vec::new();
        let four_eta = T::lit(4.0) * params.eta;
        for m0 in 0..=kb[0] {
            for m1 in -kb[1]..=kb[1] {
                for m2 in -kb[2]..=kb[2] {
                    let first_positive = m0 > 0 || (m0 == 0 && (m1 > 0 || (m1 == 0 && m2 > 0)));
                    if !first_positive {
                        continue;
                    }
                    let k = lattice.dual().point([m0, m1, m2]);
                    let k2 = k.norm2();
                    if k2 > params.kcut * params.kcut {
                        continue;
                    }
                    let w = T::lit(2.0) * (-k2 / four_eta).exp() / (k2 * volume);
                    kterms.push((k, w));
                }
            }
        }

        Ok(Ewald {
            lattice: lattice.clone(),
            params,
            alpha,
            images,
            kterms,
            background: T::one() / (four_eta * volume),
        })
    }

    /// Evaluator with auto-tuned parameters.
    pub fn auto(lattice: &Lattice<T>) -> Result<Self> {
        Self::new(lattice, EwaldParams::auto(lattice))
    }

    pub fn params(&self) -> &EwaldParams<T> {
        &self.params
    }

    pub fn lattice(&self) -> &Lattice<T> {
        &self.lattice
    }

    fn four_pi() -> T {
        T::lit(4.0) * T::PI()
    }

    fn reciprocal(&self, v: Vec3<T>) -> T {
        self.kterms
            .iter()
            .fold(T::zero(), |s, (k, w)| s + *w * k.dot(v).cos())
    }

    fn reciprocal_gradient(&self, v: Vec3<T>) -> Vec3<T> {
        self.kterms
            .iter()
            .fold(Vec3::zero(), |s, (k, w)| s - *k * (*w * k.dot(v).sin()))
    }

    /// Real-space sum over images, skipping the `n = 0` image when
    /// `skip_origin` is set.
    fn direct(&self, v: Vec3<T>, skip_origin: bool) -> T {
        let mut sum = T::zero();
        for img in &self.images {
            if skip_origin && *img == Vec3::zero() {
                continue;
            }
            let r = (v + *img).norm();
            if r < self.params.rcut {
                sum += (self.alpha * r).erfc() / r;
            }
        }
        sum / Self::four_pi()
    }

    fn direct_gradient(&self, v: Vec3<T>, skip_origin: bool) -> Vec3<T> {
        let two_over_sqrt_pi = T::lit(2.0) / T::PI().sqrt();
        let mut sum = Vec3::zero();
        for img in &self.images {
            if skip_origin && *img == Vec3::zero() {
                continue;
            }
            let y = v + *img;
            let r = y.norm();
            if r < self.params.rcut {
                let ar = self.alpha * r;
                let dphi = -ar.erfc() / (r * r) - two_over_sqrt_pi * self.alpha * (-ar * ar).exp() / r;
                sum += y * (dphi / r);
            }
        }
        sum / Self::four_pi()
    }

    fn checked_image(&self, x: Vec3<T>) -> Result<Vec3<T>> {
        let v = self.lattice.minimum_image(x);
        let d = v.norm();
        if d < T::lit(SINGULAR_TOL) * self.lattice.scale() {
            return Err(Error::SingularPoint { distance: d.as_f64() });
        }
        Ok(v)
    }

    /// Green function `G(x)` at a Cartesian point away from the lattice.
    pub fn green(&self, x: Vec3<T>) -> Result<T> {
        let v = self.checked_image(x)?;
        Ok(self.reciprocal(v) + self.direct(v, false) - self.background)
    }

    /// `∇G(x)`.
    pub fn green_gradient(&self, x: Vec3<T>) -> Result<Vec3<T>> {
        let v = self.checked_image(x)?;
        Ok(self.reciprocal_gradient(v) + self.direct_gradient(v, false))
    }

    /// Regular part `D(x) = G(x) - 1/(4π|x|)`, with `|x|` the distance to the
    /// nearest lattice point. Finite at `x = 0`.
    pub fn regularized(&self, x: Vec3<T>) -> T {
        let v = self.lattice.minimum_image(x);
        let r = v.norm();
        let origin = -self.alpha * erf_over_z(self.alpha * r) / Self::four_pi();
        self.reciprocal(v) + self.direct(v, true) + origin - self.background
    }

    /// `∇D(x)`; vanishes at `x = 0` by reflection symmetry.
    pub fn regularized_gradient(&self, x: Vec3<T>) -> Vec3<T> {
        let v = self.lattice.minimum_image(x);
        let r = v.norm();
        let a3 = self.alpha * self.alpha * self.alpha;
        let origin = v * (-a3 * erf_over_z_slope(self.alpha * r) / Self::four_pi());
        self.reciprocal_gradient(v) + self.direct_gradient(v, true) + origin
    }

    /// `D(0)`, the self-potential constant of a point charge in its lattice.
    pub fn self_potential(&self) -> T {
        self.regularized(Vec3::zero())
    }
}
