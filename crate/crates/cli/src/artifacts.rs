//! Result files: the TOML summary, the JSON state dump and the CSV tables.

use std::fmt::Write as _;
use std::path::Path;

use crystal_ground::diagnose::Report;
use crystal_ground::num_complex::Complex;
use crystal_ground::{Basis, GroundState, IonSet, Lattice, Model, SpectralField, WaveField};
use serde::{Deserialize, Serialize};

use crate::config::{IonConfig, RunConfig};
use crate::CliError;

pub const ARTIFACT_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyRecord {
    pub total: f64,
    pub e1: f64,
    pub e2: f64,
    pub e3: f64,
    pub e4: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResidualRecord {
    pub schrodinger: f64,
    pub force: f64,
    pub poisson: f64,
    pub neutrality: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckRecord {
    pub name: String,
    pub value: f64,
    pub threshold: f64,
    pub pass: bool,
}

/// What `solve` writes to `summary.toml`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub version: String,
    pub converged: bool,
    pub iterations: usize,
    pub wall_time_s: f64,
    pub lambda: f64,
    pub lambda_imag: f64,
    pub omega0: f64,
    /// Absent for a single ion.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub min_separation: Option<f64>,
    pub energy: EnergyRecord,
    pub residuals: ResidualRecord,
    /// Final ion positions (fractional).
    pub ions: Vec<IonConfig>,
    pub checks: Vec<CheckRecord>,
    pub config: RunConfig,
}

impl Summary {
    pub fn new(model: &Model<f64>, state: &GroundState<f64>, report: &Report, config: &RunConfig, wall_time_s: f64) -> Self {
        let e = &state.energy;
        let r = &state.residuals;
        Summary {
            version: ARTIFACT_VERSION.to_string(),
            converged: state.converged,
            iterations: state.iterations,
            wall_time_s,
            lambda: state.lambda,
            lambda_imag: state.lambda_imag,
            omega0: state.omega0,
            min_separation: state.min_separation(model),
            energy: EnergyRecord {
                total: e.total,
                e1: e.e1,
                e2: e.e2,
                e3: e.e3,
                e4: e.e4,
            },
            residuals: ResidualRecord {
                schrodinger: r.schrodinger,
                force: r.force,
                poisson: r.poisson,
                neutrality: r.neutrality,
            },
            ions: ion_records(&state.ions),
            checks: check_records(report),
            config: config.clone(),
        }
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("summary serializes")
    }

    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Input(format!("invalid summary: {e}")))
    }
}

pub fn ion_records(ions: &IonSet<f64>) -> Vec<IonConfig> {
    ions.positions()
        .iter()
        .zip(ions.charges())
        .map(|(p, &charge)| IonConfig {
            charge,
            position: p.to_f64(),
        })
        .collect()
}

pub fn check_records(report: &Report) -> Vec<CheckRecord> {
    report
        .checks
        .iter()
        .map(|c| CheckRecord {
            name: c.name.clone(),
            value: c.value,
            threshold: c.threshold,
            pass: c.pass,
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComplexArray {
    pub re: Vec<f64>,
    pub im: Vec<f64>,
}

impl ComplexArray {
    fn from_slice(v: &[Complex<f64>]) -> Self {
        ComplexArray {
            re: v.iter().map(|c| c.re).collect(),
            im: v.iter().map(|c| c.im).collect(),
        }
    }

    fn to_vec(&self) -> Result<Vec<Complex<f64>>, CliError> {
        if self.re.len() != self.im.len() {
            return Err(CliError::Input("state: real and imaginary parts differ in length".into()));
        }
        Ok(self.re.iter().zip(&self.im).map(|(&re, &im)| Complex::new(re, im)).collect())
    }
}

/// Everything `check` needs to re-verify a solver result: the run
/// configuration, the final ions, wave-grid samples of `ψ`, density-grid
/// coefficients of `φ` and the eigenvalue.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateDump {
    pub version: String,
    pub config: RunConfig,
    pub ions: Vec<IonConfig>,
    pub lambda: f64,
    pub omega0: f64,
    pub iterations: usize,
    pub converged: bool,
    pub psi: ComplexArray,
    pub phi: ComplexArray,
}

impl StateDump {
    pub fn new(state: &GroundState<f64>, config: &RunConfig) -> Self {
        StateDump {
            version: ARTIFACT_VERSION.to_string(),
            config: config.clone(),
            ions: ion_records(&state.ions),
            lambda: state.lambda,
            omega0: state.omega0,
            iterations: state.iterations,
            converged: state.converged,
            psi: ComplexArray::from_slice(state.psi.values()),
            phi: ComplexArray::from_slice(state.phi.coeffs()),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("state serializes")
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| CliError::Input(format!("{}: invalid state: {e}", path.display())))
    }

    /// Rebuilds the stored state. `ρ̂` and the derived residuals are
    /// recomputed from `ψ` and the ions; `φ` and `λ` are taken as stored.
    pub fn restore(&self, model: &Model<f64>, lattice: &Lattice<f64>) -> Result<GroundState<f64>, CliError> {
        let mut cfg = self.config.clone();
        cfg.ions = self.ions.clone();
        let ions = cfg.ions(lattice).map_err(|e| CliError::Input(format!("state: {e}")))?;
        let z = ions.total_charge();
        let psi = model
            .basis()
            .wave_field(self.psi.to_vec()?, z)
            .map_err(|e| CliError::Input(format!("state psi: {e}")))?;
        let phi = SpectralField::new(model.basis().density_grid().clone(), self.phi.to_vec()?)
            .map_err(|e| CliError::Input(format!("state phi: {e}")))?;
        let mut state = GroundState::assemble(model, psi, ions, self.iterations, self.converged)?;
        state.phi = phi;
        state.lambda = self.lambda;
        state.omega0 = self.omega0;
        Ok(state)
    }
}

/// `fields.csv`: `ψ`, `ν = e|ψ|²` and `φ` at every wave-grid node.
pub fn fields_csv(basis: &Basis<f64>, psi: &WaveField<f64>, phi: &SpectralField<f64>, charge: f64) -> String {
    let [n0, n1, n2] = basis.wave_dims();
    let [_, m1, m2] = basis.density_dims();
    let phi_samples = basis.fine_real_samples(phi);
    let mut out = String::from("ix,iy,iz,x,y,z,re_psi,im_psi,nu,phi\n");
    for i0 in 0..n0 {
        for i1 in 0..n1 {
            for i2 in 0..n2 {
                let v = psi.values()[(i0 * n1 + i1) * n2 + i2];
                let x = basis.node([i0, i1, i2]);
                let p = phi_samples[((2 * i0) * m1 + 2 * i1) * m2 + 2 * i2];
                writeln!(
                    out,
                    "{i0},{i1},{i2},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
                    x[0],
                    x[1],
                    x[2],
                    v.re,
                    v.im,
                    charge * v.norm_sqr(),
                    p
                )
                .unwrap();
            }
        }
    }
    out
}
