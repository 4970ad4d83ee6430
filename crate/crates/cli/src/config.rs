//! Run configuration, read from TOML.

use std::path::{Path, PathBuf};

use crystal_ground::coulomb::EwaldParams;
use crystal_ground::{Basis, Ewald, IonSet, Lattice, Model, PhysParams, SolverConfig, Vec3};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub lattice: LatticeConfig,
    pub ions: Vec<IonConfig>,
    pub grid: GridConfig,
    #[serde(default)]
    pub units: UnitsConfig,
    #[serde(default)]
    pub ewald: EwaldConfig,
    #[serde(default)]
    pub solver: SolverSection,
    #[serde(default)]
    pub output: OutputConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub green: Option<GreenConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepConfig>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LatticeConfig {
    /// Period vectors `a_1, a_2, a_3` as rows.
    pub vectors: [[f64; 3]; 3],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IonConfig {
    pub charge: f64,
    /// Fractional coordinates.
    pub position: [f64; 3],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub dims: [usize; 3],
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum UnitsPreset {
    #[default]
    Dimensionless,
    Si,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UnitsConfig {
    #[serde(default)]
    pub preset: UnitsPreset,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hbar: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mass: Option<f64>,
    /// Electron charge (negative).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub charge: Option<f64>,
}

/// Omitted `eta` means automatic; omitted cutoffs follow from `eta`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EwaldConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rcut: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kcut: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverSection {
    pub tol_psi: f64,
    pub tol_force: f64,
    pub max_iter: usize,
    pub initial_step: f64,
    pub armijo: f64,
    pub backtrack: f64,
    pub max_backtracks: usize,
    pub d_min: f64,
    pub max_ion_step: f64,
    pub seed: u64,
    pub noise: f64,
    pub precondition: bool,
    pub fix_ions: bool,
}

impl Default for SolverSection {
    fn default() -> Self {
        let c = SolverConfig::<f64>::default();
        SolverSection {
            tol_psi: c.tol_psi,
            tol_force: c.tol_force,
            max_iter: c.max_iter,
            initial_step: c.initial_step,
            armijo: c.armijo,
            backtrack: c.backtrack,
            max_backtracks: c.max_backtracks,
            d_min: c.d_min,
            max_ion_step: c.max_ion_step,
            seed: c.seed,
            noise: c.noise,
            precondition: c.precondition,
            fix_ions: c.fix_ions,
        }
    }
}

impl SolverSection {
    pub fn to_solver(&self) -> SolverConfig<f64> {
        SolverConfig {
            tol_psi: self.tol_psi,
            tol_force: self.tol_force,
            max_iter: self.max_iter,
            initial_step: self.initial_step,
            armijo: self.armijo,
            backtrack: self.backtrack,
            max_backtracks: self.max_backtracks,
            d_min: self.d_min,
            max_ion_step: self.max_ion_step,
            seed: self.seed,
            noise: self.noise,
            precondition: self.precondition,
            fix_ions: self.fix_ions,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    pub dir: PathBuf,
    /// Write `fields.csv` next to the summary.
    pub dump_fields: bool,
    /// Write `green.csv` for the `[green]` segment after a solve.
    pub dump_green: bool,
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig {
            dir: PathBuf::from("out"),
            dump_fields: false,
            dump_green: false,
        }
    }
}

/// Straight segment `from + t (to - from)`, `t ∈ [0, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GreenConfig {
    pub from: [f64; 3],
    pub to: [f64; 3],
    pub samples: usize,
    /// Endpoints in fractional rather than Cartesian coordinates.
    #[serde(default)]
    pub fractional: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepParameter {
    /// Distance of ion `ion` from ion 0 along `direction`; ions held fixed.
    Separation,
    /// Uniform scaling of the lattice vectors at fixed fractional positions.
    LatticeScale,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub parameter: SweepParameter,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub values: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub start: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stop: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub count: Option<usize>,
    /// Cartesian direction for `separation`.
    #[serde(default = "default_direction")]
    pub direction: [f64; 3],
    /// Index of the ion moved by `separation`.
    #[serde(default = "default_ion")]
    pub ion: usize,
}

fn default_direction() -> [f64; 3] {
    [1.0, 0.0, 0.0]
}

fn default_ion() -> usize {
    1
}

impl SweepConfig {
    /// Explicit `values`, or `count` evenly spaced points from `start` to `stop`.
    pub fn points(&self) -> Result<Vec<f64>, CliError> {
        let points = match (&self.values, self.start, self.stop, self.count) {
            (Some(v), None, None, None) => v.clone(),
            (None, Some(a), Some(b), Some(n)) => match n {
                0 => Vec::new(),
                1 => vec![a],
                _ => (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect(),
            },
            _ => {
                return Err(CliError::Config(
                    "sweep: give either `values` or all of `start`, `stop`, `count`".into(),
                ))
            }
        };
        if points.is_empty() {
            return Err(CliError::Config("sweep: empty parameter range".into()));
        }
        if let Some(bad) = points.iter().find(|v| !(v.is_finite() && **v > 0.0)) {
            return Err(CliError::Config(format!("sweep: parameter values must be positive, got {bad}")));
        }
        Ok(points)
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Config(format!("invalid config: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text).map_err(|e| match e {
            CliError::Config(m) => CliError::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn lattice(&self) -> Result<Lattice<f64>, CliError> {
        Lattice::from_rows(self.lattice.vectors).map_err(|e| CliError::Config(format!("lattice: {e}")))
    }

    pub fn params(&self) -> Result<PhysParams<f64>, CliError> {
        let base = match self.units.preset {
            UnitsPreset::Dimensionless => PhysParams::dimensionless(),
            UnitsPreset::Si => PhysParams::si(),
        };
        PhysParams::new(
            self.units.hbar.unwrap_or(base.hbar),
            self.units.mass.unwrap_or(base.mass),
            self.units.charge.unwrap_or(base.charge),
        )
        .map_err(|e| CliError::Config(format!("units: {e}")))
    }

    pub fn ewald_params(&self, lattice: &Lattice<f64>) -> Result<EwaldParams<f64>, CliError> {
        let mut p = match self.ewald.eta {
            Some(eta) => EwaldParams::with_eta(eta),
            None => EwaldParams::auto(lattice),
        };
        if let Some(r) = self.ewald.rcut {
            p.rcut = r;
        }
        if let Some(k) = self.ewald.kcut {
            p.kcut = k;
        }
        p.validate().map_err(|e| CliError::Config(format!("ewald: {e}")))?;
        Ok(p)
    }

    pub fn ewald(&self, lattice: &Lattice<f64>) -> Result<Ewald<f64>, CliError> {
        Ewald::new(lattice, self.ewald_params(lattice)?).map_err(|e| CliError::Config(format!("ewald: {e}")))
    }

    pub fn ions(&self, lattice: &Lattice<f64>) -> Result<IonSet<f64>, CliError> {
        if self.ions.is_empty() {
            return Err(CliError::Config("ions: at least one ion is required".into()));
        }
        let positions = self.ions.iter().map(|i| Vec3::from_f64(i.position)).collect();
        let charges = self.ions.iter().map(|i| i.charge).collect();
        IonSet::new(lattice, positions, charges).map_err(|e| CliError::Config(format!("ions: {e}")))
    }

    pub fn model(&self, lattice: &Lattice<f64>) -> Result<Model<f64>, CliError> {
        let basis = Basis::new(lattice, self.grid.dims).map_err(|e| CliError::Config(format!("grid: {e}")))?;
        Ok(Model::new(basis, self.params()?, self.ewald(lattice)?))
    }

    pub fn solver(&self) -> Result<SolverConfig<f64>, CliError> {
        let s = self.solver.to_solver();
        s.validate().map_err(|e| CliError::Config(e.to_string()))?;
        Ok(s)
    }

    /// Output directory: `--out` wins over the config.
    pub fn out_dir(&self, flag: Option<&Path>) -> PathBuf {
        flag.map_or_else(|| self.output.dir.clone(), Path::to_path_buf)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
[lattice]
vectors = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]

[[ions]]
charge = 1.0
position = [0.5, 0.5, 0.5]

[grid]
dims = [8, 8, 8]
"#;

    #[test]
    fn defaults_fill_in() {
        let c = RunConfig::from_toml(MINIMAL).unwrap();
        assert_eq!(c.units.preset, UnitsPreset::Dimensionless);
        assert_eq!(c.solver.tol_psi, 1e-6);
        assert!(c.ewald.eta.is_none());
        assert_eq!(c.output.dir, PathBuf::from("out"));
        let lat = c.lattice().unwrap();
        assert!(c.model(&lat).is_ok());
        assert_eq!(RunConfig::from_toml(&c.to_toml()).unwrap(), c);
    }

    #[test]
    fn unknown_field_names_its_location() {
        let text = MINIMAL.replace("dims", "dimz");
        let err = RunConfig::from_toml(&text).unwrap_err().to_string();
        assert!(err.contains("dimz") && err.contains("line"), "{err}");
    }

    #[test]
    fn negative_charge_cites_positivity() {
        let text = MINIMAL.replace("charge = 1.0", "charge = -1.0");
        let c = RunConfig::from_toml(&text).unwrap();
        let err = c.ions(&c.lattice().unwrap()).unwrap_err().to_string();
        assert!(err.contains("positivity"), "{err}");
    }

    #[test]
    fn sweep_points() {
        let mut s = SweepConfig {
            parameter: SweepParameter::Separation,
            values: None,
            start: Some(0.1),
            stop: Some(0.4),
            count: Some(4),
            direction: default_direction(),
            ion: 1,
        };
        let p = s.points().unwrap();
        assert_eq!(p.len(), 4);
        assert!((p[3] - 0.4).abs() < 1e-15);
        s.count = Some(0);
        assert!(s.points().is_err());
        s.values = Some(vec![0.2]);
        assert!(s.points().is_err());
    }
}
