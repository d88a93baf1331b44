//! Model constants and solver settings.

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::lattice::NeighborOrder;

/// When the chemotactic term contributes to a copy's energy change.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ChemotaxisMode {
    /// Only when the copied id is a cell (the cell extends into the destination).
    #[default]
    Extension,
    /// For every copy, including medium overwriting a cell.
    Both,
}

/// All model constants plus the run and solver settings.
///
/// Field names in the config file match the usual parameter names
/// (`lambda_volume`, `V_target`, `J_cell_medium`, `H_prime`, ...). Missing keys
/// take the defaults below.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ParamSet {
    pub lambda_volume: f64,
    #[serde(rename = "V_target")]
    pub v_target: f64,
    pub lambda_surface: f64,
    #[serde(rename = "S_target")]
    pub s_target: f64,
    #[serde(rename = "J_cell_medium")]
    pub j_cell_medium: f64,
    #[serde(rename = "J_cell_cell")]
    pub j_cell_cell: f64,
    pub lambda_chemotaxis: f64,
    /// Chemotactic saturation constant.
    pub s: f64,
    /// Field decay rate per unit time.
    pub k: f64,
    /// Metropolis temperature.
    #[serde(rename = "H_prime")]
    pub h_prime: f64,
    /// Diffusion constant, sites² per unit time.
    #[serde(rename = "D")]
    pub d: f64,
    pub secretion_rate: f64,
    pub diffusion_substeps: u32,
    pub dt: f64,
    pub contact_order: NeighborOrder,
    pub copy_order: NeighborOrder,
    pub chemotaxis_mode: ChemotaxisMode,
    pub width: usize,
    pub height: usize,
    pub cell_count: usize,
}

impl Default for ParamSet {
    fn default() -> Self {
        ParamSet {
            lambda_volume: 5.0,
            v_target: 50.0,
            lambda_surface: 1.0,
            s_target: 16.8,
            j_cell_medium: 8.2,
            j_cell_cell: 6.0,
            lambda_chemotaxis: 2000.0,
            s: 0.5,
            k: 0.6,
            h_prime: 8.0,
            d: 4.0,
            secretion_rate: 0.5,
            diffusion_substeps: 20,
            dt: 0.05,
            contact_order: NeighborOrder::Second,
            copy_order: NeighborOrder::Second,
            chemotaxis_mode: ChemotaxisMode::Extension,
            width: 256,
            height: 256,
            cell_count: 1000,
        }
    }
}

impl ParamSet {
    /// Parameters with every energy term switched off.
    pub fn zero_energy() -> Self {
        ParamSet {
            lambda_volume: 0.0,
            lambda_surface: 0.0,
            j_cell_medium: 0.0,
            j_cell_cell: 0.0,
            lambda_chemotaxis: 0.0,
            ..ParamSet::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParams(msg));
        let reals = [
            ("lambda_volume", self.lambda_volume),
            ("V_target", self.v_target),
            ("lambda_surface", self.lambda_surface),
            ("S_target", self.s_target),
            ("J_cell_medium", self.j_cell_medium),
            ("J_cell_cell", self.j_cell_cell),
            ("lambda_chemotaxis", self.lambda_chemotaxis),
            ("s", self.s),
            ("k", self.k),
            ("H_prime", self.h_prime),
            ("D", self.d),
            ("secretion_rate", self.secretion_rate),
            ("dt", self.dt),
        ];
        for (name, value) in reals {
            if !value.is_finite() {
                return bad(format!("{name} must be finite, got {value}"));
            }
        }
        for (name, value) in [
            ("lambda_volume", self.lambda_volume),
            ("lambda_surface", self.lambda_surface),
            ("lambda_chemotaxis", self.lambda_chemotaxis),
            ("s", self.s),
            ("k", self.k),
            ("D", self.d),
            ("secretion_rate", self.secretion_rate),
        ] {
            if value < 0.0 {
                return bad(format!("{name} must be >= 0, got {value}"));
            }
        }
        if self.h_prime <= 0.0 {
            return bad(format!("H_prime must be > 0, got {}", self.h_prime));
        }
        if self.dt <= 0.0 {
            return bad(format!("dt must be > 0, got {}", self.dt));
        }
        if self.diffusion_substeps == 0 {
            return bad("diffusion_substeps must be >= 1".into());
        }
        if self.d * self.dt > 0.25 {
            return bad(format!(
                "unstable diffusion: D*dt = {} exceeds 0.25",
                self.d * self.dt
            ));
        }
        if self.k * self.dt > 1.0 {
            return bad(format!(
                "unstable decay: k*dt = {} exceeds 1",
                self.k * self.dt
            ));
        }
        if self.width < 8 || self.height < 8 {
            return Err(Error::LatticeTooSmall {
                width: self.width,
                height: self.height,
            });
        }
        Ok(())
    }

    /// Parses a TOML (`key = value`) config. Unknown keys are rejected.
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let params: ParamSet = toml::from_str(text).map_err(|e| Error::Config {
            path: "<string>".into(),
            message: e.to_string(),
        })?;
        params.validate()?;
        Ok(params)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let params: ParamSet = toml::from_str(&text).map_err(|e| Error::Config {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
        params.validate().map_err(|e| e.in_file(path))?;
        Ok(params)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("ParamSet always serializes")
    }

    /// SHA-256 of the canonical JSON encoding, hex encoded.
    pub fn hash_hex(&self) -> String {
        let json = serde_json::to_vec(self).expect("ParamSet always serializes");
        hex::encode(Sha256::digest(json))
    }
}

impl fmt::Display for ParamSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_toml_string())
    }
}
