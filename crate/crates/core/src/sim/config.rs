//! Run configuration, read from TOML with dotted `key=value` overrides.
//!
//! ```toml
//! [grid]
//! nx = 64
//! ny = 64
//! lx = 1.0
//! ly = 1.0
//!
//! [time]
//! dt = 1e-3
//! t_max = 1.0
//! cfl_safety = 0.4
//! record_every = 10
//!
//! [tolerances]
//! poisson = 1e-10
//! pb = 1e-10
//! projection = 1e-10
//!
//! [initial]
//! preset = "relax-small-mass"
//! M = 0.05
//! N = 0.1
//!
//! [output]
//! dir = "out"
//! snapshot_every = 0
//! rho0_warn = 1.0
//! ```

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::presets::{generate, InitialData, PresetParams};
use super::Tolerances;
use crate::error::{EhdError, Result};
use crate::grid::{Grid2D, MacVectorField, ScalarField};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridConfig {
    pub nx: usize,
    pub ny: usize,
    pub lx: f64,
    pub ly: f64,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self {
            nx: 64,
            ny: 64,
            lx: 1.0,
            ly: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TimeConfig {
    pub dt: f64,
    pub t_max: f64,
    pub cfl_safety: f64,
    pub record_every: usize,
}

impl Default for TimeConfig {
    fn default() -> Self {
        Self {
            dt: 1e-3,
            t_max: 1.0,
            cfl_safety: 0.4,
            record_every: 10,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ToleranceConfig {
    pub poisson: f64,
    pub pb: f64,
    pub projection: f64,
}

impl Default for ToleranceConfig {
    fn default() -> Self {
        let t = Tolerances::default();
        Self {
            poisson: t.poisson,
            pb: t.pb,
            projection: t.projection,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct InitialConfig {
    pub preset: String,
    #[serde(rename = "M")]
    pub m: f64,
    #[serde(rename = "N")]
    pub n: f64,
    pub epsilon: f64,
    pub u_amplitude: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub v_file: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub w_file: Option<PathBuf>,
}

impl Default for InitialConfig {
    fn default() -> Self {
        let p = PresetParams::default();
        Self {
            preset: "relax-small-mass".into(),
            m: p.m,
            n: p.n,
            epsilon: p.epsilon,
            u_amplitude: p.u_amplitude,
            v_file: None,
            w_file: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dir: Option<PathBuf>,
    pub snapshot_every: usize,
    /// Warn when `M + N` exceeds this.
    pub rho0_warn: f64,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            dir: None,
            snapshot_every: 0,
            rho0_warn: 1.0,
        }
    }
}

/// Complete run description.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimConfig {
    pub grid: GridConfig,
    pub time: TimeConfig,
    pub tolerances: ToleranceConfig,
    pub initial: InitialConfig,
    pub output: OutputConfig,
}

impl SimConfig {
    /// Parses TOML text, then applies `section.key=value` overrides.
    pub fn from_toml_str(text: &str, overrides: &[String]) -> Result<Self> {
        let mut table: toml::Table = text
            .parse()
            .map_err(|e: toml::de::Error| EhdError::Config(e.to_string()))?;
        for o in overrides {
            apply_override(&mut table, o)?;
        }
        let cfg: SimConfig = toml::Value::Table(table)
            .try_into()
            .map_err(|e: toml::de::Error| EhdError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: &Path, overrides: &[String]) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| EhdError::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml_str(&text, overrides)
    }

    /// Defaults with overrides applied.
    pub fn with_overrides(overrides: &[String]) -> Result<Self> {
        Self::from_toml_str("", overrides)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(EhdError::Config(m));
        self.grid()?;
        let t = &self.time;
        if !(t.dt > 0.0 && t.dt.is_finite()) {
            return bad(format!("time.dt must be positive, got {}", t.dt));
        }
        if !(t.t_max >= 0.0 && t.t_max.is_finite()) {
            return bad(format!("time.t_max must be nonnegative, got {}", t.t_max));
        }
        if !(t.cfl_safety > 0.0 && t.cfl_safety <= 1.0) {
            return bad(format!(
                "time.cfl_safety must lie in (0, 1], got {}",
                t.cfl_safety
            ));
        }
        if t.record_every == 0 {
            return bad("time.record_every must be at least 1".into());
        }
        let tol = &self.tolerances;
        for (name, v) in [
            ("poisson", tol.poisson),
            ("pb", tol.pb),
            ("projection", tol.projection),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return bad(format!("tolerances.{name} must be positive, got {v}"));
            }
        }
        let i = &self.initial;
        if !(i.m > 0.0 && i.n > 0.0 && i.m.is_finite() && i.n.is_finite()) {
            return bad(format!(
                "initial masses must be positive, got M = {}, N = {}",
                i.m, i.n
            ));
        }
        if i.v_file.is_some() != i.w_file.is_some() {
            return bad("initial.v_file and initial.w_file must be given together".into());
        }
        Ok(())
    }

    pub fn grid(&self) -> Result<Grid2D> {
        let g = &self.grid;
        Grid2D::new(g.nx, g.ny, g.lx, g.ly).map_err(|e| EhdError::Config(e.to_string()))
    }

    pub fn tolerances(&self) -> Tolerances {
        Tolerances {
            poisson: self.tolerances.poisson,
            pb: self.tolerances.pb,
            projection: self.tolerances.projection,
        }
    }

    pub fn preset_params(&self) -> PresetParams {
        PresetParams {
            m: self.initial.m,
            n: self.initial.n,
            epsilon: self.initial.epsilon,
            u_amplitude: self.initial.u_amplitude,
        }
    }

    /// Initial data from the matrix files when given, else from the preset.
    pub fn initial_data(&self) -> Result<InitialData> {
        let grid = self.grid()?;
        match (&self.initial.v_file, &self.initial.w_file) {
            (Some(vf), Some(wf)) => {
                let v = ScalarField::read_matrix(grid, vf)?;
                let w = ScalarField::read_matrix(grid, wf)?;
                if v.min() < 0.0 || w.min() < 0.0 {
                    return Err(EhdError::InvalidInput(
                        "initial densities must be nonnegative".into(),
                    ));
                }
                Ok(InitialData {
                    v,
                    w,
                    u: MacVectorField::zeros(grid),
                })
            }
            _ => generate(
                &self.initial.preset,
                grid,
                &self.preset_params(),
                self.tolerances.pb,
            ),
        }
    }
}

fn apply_override(table: &mut toml::Table, item: &str) -> Result<()> {
    let (key, raw) = item
        .split_once('=')
        .ok_or_else(|| EhdError::Config(format!("override '{item}' is not KEY=VALUE")))?;
    let key = key.trim();
    let raw = raw.trim();
    let value = parse_value(raw);
    let parts: Vec<&str> = key.split('.').collect();
    if parts.iter().any(|p| p.is_empty()) {
        return Err(EhdError::Config(format!("bad override key '{key}'")));
    }
    let mut cur = table;
    for p in &parts[..parts.len() - 1] {
        let entry = cur
            .entry(p.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()));
        cur = entry
            .as_table_mut()
            .ok_or_else(|| EhdError::Config(format!("override '{key}': '{p}' is not a section")))?;
    }
    cur.insert(parts[parts.len() - 1].to_string(), value);
    Ok(())
}

/// Interprets an override value as a TOML literal, falling back to a string.
fn parse_value(raw: &str) -> toml::Value {
    let doc = format!("x = {raw}");
    match doc.parse::<toml::Table>() {
        Ok(mut t) => t
            .remove("x")
            .unwrap_or_else(|| toml::Value::String(raw.into())),
        Err(_) => toml::Value::String(raw.into()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid() {
        let c = SimConfig::default();
        c.validate().unwrap();
        assert_eq!(c.time.cfl_safety, 0.4);
    }

    #[test]
    fn parse_and_override() {
        let text = "[grid]\nnx = 16\nny = 8\nlx = 2.0\nly = 1.0\n[initial]\npreset = \"symmetric-null\"\nM = 0.2\nN = 0.2\n";
        let c = SimConfig::from_toml_str(
            text,
            &[
                "grid.nx=32".into(),
                "initial.preset=vortex-charge".into(),
                "time.dt=5e-4".into(),
            ],
        )
        .unwrap();
        assert_eq!(c.grid.nx, 32);
        assert_eq!(c.grid.ny, 8);
        assert_eq!(c.initial.preset, "vortex-charge");
        assert_eq!(c.time.dt, 5e-4);
    }

    #[test]
    fn unknown_keys_are_errors() {
        assert!(SimConfig::from_toml_str("[grid]\nnz = 3\n", &[]).is_err());
        assert!(SimConfig::from_toml_str("[mesh]\n", &[]).is_err());
        assert!(SimConfig::with_overrides(&["time.dtt=1".into()]).is_err());
        assert!(SimConfig::with_overrides(&["nonsense".into()]).is_err());
    }

    #[test]
    fn invalid_values_rejected() {
        assert!(SimConfig::with_overrides(&["time.dt=0".into()]).is_err());
        assert!(SimConfig::with_overrides(&["initial.M=-1".into()]).is_err());
        assert!(SimConfig::with_overrides(&["grid.nx=2".into()]).is_err());
    }

    #[test]
    fn round_trip() {
        let c = SimConfig::with_overrides(&["output.dir=\"x/y\"".into()]).unwrap();
        let back = SimConfig::from_toml_str(&c.to_toml_string(), &[]).unwrap();
        assert_eq!(c, back);
    }
}
