//! Three-dimensional transforms between grid samples and plane-wave
//! coefficients.
//!
//! Convention: `f(x) = Σ_k c(k) e^{-ik·x}` and `c(k) = (1/|T³|) ∫ f e^{ik·x}`.
//! With grid nodes `x_r = Σ_a (r_a / n_a) a_a` this makes
//! `c = (1/N) Σ_r f_r e^{+2πi m·r/n}` (an unnormalized inverse DFT scaled by
//! `1/N`) and `f_r = Σ_m c_m e^{-2πi m·r/n}` (a forward DFT).

use std::sync::Arc;

use num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use crate::scalar::Real;

pub struct Fft3<T: Real> {
    dims: [usize; 3],
    forward: [Arc<dyn Fft<T>>; 3],
    inverse: [Arc<dyn Fft<T>>; 3],
}

impl<T: Real> Clone for Fft3<T> {
    fn clone(&self) -> Self {
        Fft3 {
            dims: self.dims,
            forward: self.forward.clone(),
            inverse: self.inverse.clone(),
        }
    }
}

impl<T: Real> std::fmt::Debug for Fft3<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Fft3").field("dims", &self.dims).finish()
    }
}

impl<T: Real> Fft3<T> {
    pub fn new(dims: [usize; 3]) -> Self {
        let mut planner = FftPlanner::new();
        let forward = dims.map(|n| planner.plan_fft_forward(n));
        let inverse = dims.map(|n| planner.plan_fft_inverse(n));
        Fft3 {
            dims,
            forward,
            inverse,
        }
    }

    pub fn dims(&self) -> [usize; 3] {
        self.dims
    }

    pub fn len(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Grid samples to plane-wave coefficients, in place.
    pub fn to_coefficients(&self, data: &mut [Complex<T>]) {
        self.apply(&self.inverse, data);
        let scale = T::one() / T::from_usize_lossy(self.len());
        for v in data.iter_mut() {
            *v *= scale;
        }
    }

    /// Plane-wave coefficients to grid samples, in place.
    pub fn to_samples(&self, data: &mut [Complex<T>]) {
        self.apply(&self.forward, data);
    }

    fn apply(&self, plans: &[Arc<dyn Fft<T>>; 3], data: &mut [Complex<T>]) {
        assert_eq!(data.len(), self.len(), "buffer does not match grid");
        let [n0, n1, n2] = self.dims;
        // last axis is contiguous
        plans[2].process(data);

        let mut line = vec![Complex::new(T::zero(), T::zero()); n0.max(n1)];
        for i0 in 0..n0 {
            let base = i0 * n1 * n2;
            for i2 in 0..n2 {
                for i1 in 0..n1 {
                    line[i1] = data[base + i1 * n2 + i2];
                }
                plans[1].process(&mut line[..n1]);
                for i1 in 0..n1 {
                    data[base + i1 * n2 + i2] = line[i1];
                }
            }
        }
        let stride = n1 * n2;
        for rest in 0..stride {
            for i0 in 0..n0 {
                line[i0] = data[i0 * stride + rest];
            }
            plans[0].process(&mut line[..n0]);
            for i0 in 0..n0 {
                data[i0 * stride + rest] = line[i0];
            }
        }
    }
}
