//! Crystal lattice, its dual, the periodic cell and plane-wave index grids.
//!
//! Positions on the torus are carried in fractional coordinates (components
//! along `a1, a2, a3`); Cartesian vectors are produced on demand.

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::vec3::Vec3;

/// Relative threshold below which the period matrix counts as singular.
const DEGENERACY_TOL: f64 = 1e-12;

/// Reciprocal periods `b_k` with `b_k · a_k' = 2π δ_kk'`.
#[derive(Debug, Clone, PartialEq)]
pub struct DualLattice<T> {
    vectors: [Vec3<T>; 3],
    cell_volume: T,
}

impl<T: Real> DualLattice<T> {
    pub fn vectors(&self) -> &[Vec3<T>; 3] {
        &self.vectors
    }

    /// Volume `|T³|` of the direct cell this basis is dual to.
    pub fn cell_volume(&self) -> T {
        self.cell_volume
    }

    /// `n1 b1 + n2 b2 + n3 b3`.
    pub fn point(&self, n: [i64; 3]) -> Vec3<T> {
        self.vectors[0] * T::from_i64_lossy(n[0])
            + self.vectors[1] * T::from_i64_lossy(n[1])
            + self.vectors[2] * T::from_i64_lossy(n[2])
    }
}

/// Computes the reciprocal basis `2π A^{-T}` of three period vectors.
pub fn dual_basis<T: Real>(a: &[Vec3<T>; 3]) -> Result<DualLattice<T>> {
    let det = a[0].dot(a[1].cross(a[2]));
    let scale = a[0].norm() * a[1].norm() * a[2].norm();
    if !(det.abs() >= T::lit(DEGENERACY_TOL) * scale) || scale == T::zero() {
        return Err(Error::DegenerateLattice {
            det: det.as_f64(),
            scale: scale.as_f64(),
        });
    }
    let f = T::TAU() / det;
    Ok(DualLattice {
        vectors: [
            a[1].cross(a[2]) * f,
            a[2].cross(a[0]) * f,
            a[0].cross(a[1]) * f,
        ],
        cell_volume: det.abs(),
    })
}

/// The lattice `Γ = {n1 a1 + n2 a2 + n3 a3}` and the cell `T³ = ℝ³/Γ`.
#[derive(Debug, Clone, PartialEq)]
pub struct Lattice<T> {
    vectors: [Vec3<T>; 3],
    volume: T,
    dual: DualLattice<T>,
}

impl<T: Real> Lattice<T> {
    pub fn new(a1: Vec3<T>, a2: Vec3<T>, a3: Vec3<T>) -> Result<Self> {
        let vectors = [a1, a2, a3];
        let dual = dual_basis(&vectors)?;
        let volume = a1.dot(a2.cross(a3)).abs();
        Ok(Lattice {
            vectors,
            volume,
            dual,
        })
    }

    /// Simple cubic lattice with period `side`.
    pub fn cubic(side: T) -> Result<Self> {
        Self::new(
            Vec3::unit(0) * side,
            Vec3::unit(1) * side,
            Vec3::unit(2) * side,
        )
    }

    pub fn from_rows(rows: [[f64; 3]; 3]) -> Result<Self> {
        Self::new(
            Vec3::from_f64(rows[0]),
            Vec3::from_f64(rows[1]),
            Vec3::from_f64(rows[2]),
        )
    }

    pub fn vectors(&self) -> &[Vec3<T>; 3] {
        &self.vectors
    }

    pub fn dual(&self) -> &DualLattice<T> {
        &self.dual
    }

    /// Cell volume `|T³| = |det[a1 a2 a3]|`.
    pub fn volume(&self) -> T {
        self.volume
    }

    /// Characteristic length `|T³|^{1/3}`.
    pub fn scale(&self) -> T {
        self.volume.cbrt()
    }

    /// `n1 a1 + n2 a2 + n3 a3` for integer `n`.
    pub fn point(&self, n: [i64; 3]) -> Vec3<T> {
        self.to_cartesian(Vec3(n.map(T::from_i64_lossy)))
    }

    pub fn to_cartesian(&self, frac: Vec3<T>) -> Vec3<T> {
        self.vectors[0] * frac[0] + self.vectors[1] * frac[1] + self.vectors[2] * frac[2]
    }

    pub fn to_fractional(&self, x: Vec3<T>) -> Vec3<T> {
        let b = self.dual.vectors();
        Vec3([b[0].dot(x), b[1].dot(x), b[2].dot(x)]) / T::TAU()
    }

    /// Fractional coordinates of `x` reduced into `[0, 1)³`.
    pub fn wrap_to_cell(&self, x: Vec3<T>) -> Vec3<T> {
        wrap_fractional(self.to_fractional(x))
    }

    /// Shortest Cartesian representative of `x` modulo `Γ`.
    pub fn minimum_image(&self, x: Vec3<T>) -> Vec3<T> {
        let f = self.to_fractional(x).map(centered_fraction);
        let base = self.to_cartesian(f);
        let r0 = base.norm();
        let b = self.dual.vectors();
        let mut best = base;
        let mut best2 = base.norm2();
        let mut ranges = [(0i64, 0i64); 3];
        for (a, range) in ranges.iter_mut().enumerate() {
            let reach = r0 * b[a].norm() / T::TAU();
            let lo = (-f[a] - reach).floor().to_i64().unwrap_or(0);
            let hi = (-f[a] + reach).ceil().to_i64().unwrap_or(0);
            *range = (lo, hi);
        }
        for n0 in ranges[0].0..=ranges[0].1 {
            for n1 in ranges[1].0..=ranges[1].1 {
                for n2 in ranges[2].0..=ranges[2].1 {
                    if n0 == 0 && n1 == 0 && n2 == 0 {
                        continue;
                    }
                    let v = base + self.point([n0, n1, n2]);
                    let v2 = v.norm2();
                    if v2 < best2 {
                        best = v;
                        best2 = v2;
                    }
                }
            }
        }
        best
    }

    /// Distance between `x` and `y` on the torus (Cartesian inputs).
    pub fn torus_distance(&self, x: Vec3<T>, y: Vec3<T>) -> T {
        self.minimum_image(x - y).norm()
    }

    /// Torus distance between two points given in fractional coordinates.
    pub fn torus_distance_frac(&self, x: Vec3<T>, y: Vec3<T>) -> T {
        self.minimum_image(self.to_cartesian((x - y).map(centered_fraction)))
            .norm()
    }

    /// Length of the shortest nonzero lattice vector.
    pub fn shortest_period(&self) -> T {
        let mut best = T::infinity();
        for v in self.vectors {
            best = best.min(v.norm());
        }
        // Any shorter vector has |n_a| <= best |b_a| / 2π.
        let b = self.dual.vectors();
        let reach: Vec<i64> = (0..3)
            .map(|a| (best * b[a].norm() / T::TAU()).ceil().to_i64().unwrap_or(1))
            .collect();
        for n0 in -reach[0]..=reach[0] {
            for n1 in -reach[1]..=reach[1] {
                for n2 in -reach[2]..=reach[2] {
                    if n0 == 0 && n1 == 0 && n2 == 0 {
                        continue;
                    }
                    best = best.min(self.point([n0, n1, n2]).norm());
                }
            }
        }
        best
    }

    /// Radius of the largest ball around 0 that embeds in the torus.
    pub fn injectivity_radius(&self) -> T {
        self.shortest_period() * T::lit(0.5)
    }
}

/// Reduces each fractional coordinate into `[0, 1)`.
pub fn wrap_fractional<T: Real>(f: Vec3<T>) -> Vec3<T> {
    f.map(|v| {
        let w = v - v.floor();
        // v slightly below an integer can round up to exactly 1
        if w >= T::one() {
            T::zero()
        } else {
            w
        }
    })
}

/// Reduces a fractional coordinate into `[-1/2, 1/2)`.
pub fn centered_fraction<T: Real>(v: T) -> T {
    let half = T::lit(0.5);
    let w = v - (v + half).floor();
    if w >= half {
        w - T::one()
    } else {
        w
    }
}

/// Signed frequency of FFT storage index `i` on an axis of length `n`:
/// `0, 1, …, ⌈n/2⌉-1, -⌊n/2⌋, …, -1`.
#[inline]
pub fn centered_index(i: usize, n: usize) -> i64 {
    if i < n.div_ceil(2) {
        i as i64
    } else {
        i as i64 - n as i64
    }
}

/// Storage index of signed frequency `m` on an axis of length `n`, if present.
#[inline]
pub fn storage_index(m: i64, n: usize) -> Option<usize> {
    let lo = -((n / 2) as i64);
    let hi = n.div_ceil(2) as i64 - 1;
    if m < lo || m > hi {
        None
    } else if m >= 0 {
        Some(m as usize)
    } else {
        Some((m + n as i64) as usize)
    }
}

/// Plane-wave vectors `k = n1 b1 + n2 b2 + n3 b3` on an `n1 × n2 × n3` grid.
///
/// Entries follow FFT storage order: row-major in the storage indices with
/// the third axis fastest. Along each axis the storage index `i` carries the
/// signed frequency [`centered_index`], so the integer ranges are
/// `⌈-n/2⌉ … ⌈n/2⌉-1`.
#[derive(Debug, Clone, PartialEq)]
pub struct KGrid<T> {
    dual: DualLattice<T>,
    dims: [usize; 3],
    kvecs: Vec<Vec3<T>>,
    k2: Vec<T>,
    indices: Vec<[i64; 3]>,
}

impl<T: Real> KGrid<T> {
    pub fn dims(&self) -> [usize; 3] {
        self.dims
    }

    pub fn dual(&self) -> &DualLattice<T> {
        &self.dual
    }

    /// Fractional coordinates `b_a · x / 2π` of a Cartesian point.
    pub fn fractional(&self, x: Vec3<T>) -> Vec3<T> {
        let b = self.dual.vectors();
        Vec3([b[0].dot(x), b[1].dot(x), b[2].dot(x)]) / T::TAU()
    }

    pub fn len(&self) -> usize {
        self.kvecs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.kvecs.is_empty()
    }

    pub fn kvecs(&self) -> &[Vec3<T>] {
        &self.kvecs
    }

    /// `|k|²` for every entry.
    pub fn k2(&self) -> &[T] {
        &self.k2
    }

    /// Signed integer indices `(n1, n2, n3)` for every entry.
    pub fn indices(&self) -> &[[i64; 3]] {
        &self.indices
    }

    /// Position of the zero mode (always the first entry).
    pub fn zero_index(&self) -> usize {
        0
    }

    #[inline]
    pub fn flat(&self, i: [usize; 3]) -> usize {
        (i[0] * self.dims[1] + i[1]) * self.dims[2] + i[2]
    }

    /// Flat position of the signed index `n`, if it lies on the grid.
    pub fn position_of(&self, n: [i64; 3]) -> Option<usize> {
        let i0 = storage_index(n[0], self.dims[0])?;
        let i1 = storage_index(n[1], self.dims[1])?;
        let i2 = storage_index(n[2], self.dims[2])?;
        Some(self.flat([i0, i1, i2]))
    }

    /// Position of `-k` for the entry at `idx`, unless it is an unpaired
    /// Nyquist mode of an even axis.
    pub fn negated(&self, idx: usize) -> Option<usize> {
        let n = self.indices[idx];
        self.position_of([-n[0], -n[1], -n[2]])
    }
}

/// Enumerates the plane-wave vectors of an `n1 × n2 × n3` grid.
pub fn make_kgrid<T: Real>(dual: &DualLattice<T>, dims: [usize; 3]) -> Result<KGrid<T>> {
    if dims.iter().any(|&n| n < 2) {
        return Err(Error::InvalidGrid { dims });
    }
    let total = dims[0] * dims[1] * dims[2];
    let mut kvecs = Vec::with_capacity(total);
    let mut k2 = Vec::with_capacity(total);
    let mut indices = Vec::with_capacity(total);
    for i0 in 0..dims[0] {
        for i1 in 0..dims[1] {
            for i2 in 0..dims[2] {
                let n = [
                    centered_index(i0, dims[0]),
                    centered_index(i1, dims[1]),
                    centered_index(i2, dims[2]),
                ];
                let k = dual.point(n);
                kvecs.push(k);
                k2.push(k.norm2());
                indices.push(n);
            }
        }
    }
    Ok(KGrid {
        dual: dual.clone(),
        dims,
        kvecs,
        k2,
        indices,
    })
}
