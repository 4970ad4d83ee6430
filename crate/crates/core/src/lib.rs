//! Variational ground states of a periodic crystal: point ions and one
//! electron field on a torus, coupled through the periodic Coulomb kernel.
//!
//! Everything is generic over the scalar type; the `*F64` and `*F32` aliases
//! fix it.
//!
//! ```
//! use crystal_ground::optimize::initial_psi;
//! use crystal_ground::{minimize, Basis, Ewald, IonSet, Lattice, Model, PhysParams, SolverConfig, Vec3};
//!
//! # fn main() -> Result<(), Box<dyn std::error::Error>> {
//! let lattice = Lattice::cubic(1.0)?;
//! let ions = IonSet::new(&lattice, vec![Vec3::new(0.5, 0.5, 0.5)], vec![1.0])?;
//! let model = Model::new(Basis::new(&lattice, [8; 3])?, PhysParams::dimensionless(), Ewald::auto(&lattice)?);
//! let cfg = SolverConfig::default();
//! let psi0 = initial_psi(model.basis(), ions.total_charge(), cfg.seed, cfg.noise)?;
//! let state = minimize(&model, &psi0, &ions, &cfg)?;
//! assert!(state.converged && state.energy.total < 0.0);
//! # Ok(())
//! # }
//! ```

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod basis;
pub mod coulomb;
pub mod diagnose;
pub mod energy;
pub mod error;
pub mod fft;
pub mod fields;
pub mod lattice;
pub mod optimize;
pub mod scalar;
pub mod vec3;

pub use basis::Basis;
pub use coulomb::{Ewald, EwaldParams, SpectralField};
pub use energy::{EnergyBreakdown, Evaluation, Model, PsiGradient};
pub use error::{Error, Result};
pub use fields::{IonSet, PhysParams, WaveField};
pub use lattice::{KGrid, Lattice};
pub use scalar::Real;
pub use vec3::Vec3;
pub use optimize::{minimize, GroundState, MinimizeError, SolverConfig};

pub use num_complex;

pub type LatticeF64 = Lattice<f64>;
pub type BasisF64 = Basis<f64>;
pub type EwaldF64 = Ewald<f64>;
pub type ModelF64 = Model<f64>;
pub type IonSetF64 = IonSet<f64>;
pub type WaveFieldF64 = WaveField<f64>;
pub type GroundStateF64 = GroundState<f64>;
pub type SolverConfigF64 = SolverConfig<f64>;

pub type LatticeF32 = Lattice<f32>;
pub type BasisF32 = Basis<f32>;
pub type EwaldF32 = Ewald<f32>;
pub type ModelF32 = Model<f32>;
pub type IonSetF32 = IonSet<f32>;
pub type WaveFieldF32 = WaveField<f32>;
pub type GroundStateF32 = GroundState<f32>;
pub type SolverConfigF32 = SolverConfig<f32>;
