//! The on-disk landscape file: self-describing JSON that reloads into a
//! [`Landscape`] interpolating bit-identically to the original.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::calib::{Landscape, ReferencePulse, RoundLog};
use crate::error::{Error, Result};
use crate::gatefam::{GateFamily, Granularity};
use crate::mesh::SimplicialMesh;
use crate::pulsemodel::{ControlAnsatz, HamiltonianModel};

pub const FORMAT_VERSION: &str = "pulse-landscape/1";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LandscapeFile {
    pub version: String,
    pub family: GateFamily,
    pub granularity: Granularity,
    pub ansatz: ControlAnsatz,
    pub lambda: f64,
    pub seed: u64,
    pub references: Vec<ReferencePulse>,
    pub simplices: Vec<Vec<usize>>,
    pub log: Vec<RoundLog>,
}

impl From<&Landscape> for LandscapeFile {
    fn from(l: &Landscape) -> Self {
        Self {
            version: FORMAT_VERSION.to_string(),
            family: l.family,
            granularity: l.granularity,
            ansatz: l.ansatz,
            lambda: l.lambda,
            seed: l.seed,
            references: l.references.clone(),
            simplices: l.mesh.simplices().to_vec(),
            log: l.log.clone(),
        }
    }
}

impl LandscapeFile {
    /// Checks consistency and rebuilds the mesh from the stored simplices.
    pub fn into_landscape(self) -> Result<Landscape> {
        let bad = |msg: String| Err(Error::Format(msg));
        if self.version != FORMAT_VERSION {
            return bad(format!("unsupported version `{}` (expected `{FORMAT_VERSION}`)", self.version));
        }
        self.ansatz.validate()?;
        let n_controls = HamiltonianModel::for_family(self.family).n_controls();
        if self.ansatz.n_controls != n_controls {
            return bad(format!(
                "{} needs {n_controls} controls, file has {}",
                self.family.name(),
                self.ansatz.n_controls
            ));
        }
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return bad(format!("invalid lambda {}", self.lambda));
        }
        if self.references.is_empty() {
            return bad("no reference pulses".into());
        }
        for r in &self.references {
            self.family.check_domain(&r.point)?;
            r.alpha.check_shape(&self.ansatz)?;
            r.alpha.check_bounds(&self.ansatz)?;
        }
        let vertices = self.references.iter().map(|r| r.point.clone()).collect();
        let mesh = SimplicialMesh::from_parts(vertices, self.simplices)?;
        Ok(Landscape {
            family: self.family,
            granularity: self.granularity,
            ansatz: self.ansatz,
            lambda: self.lambda,
            seed: self.seed,
            references: self.references,
            mesh,
            log: self.log,
        })
    }
}

pub fn to_json(landscape: &Landscape) -> Result<String> {
    serde_json::to_string_pretty(&LandscapeFile::from(landscape)).map_err(|e| Error::Format(e.to_string()))
}

/// Parses a landscape file. The version tag is checked before anything else
/// so that files from other versions fail with a clear message.
pub fn from_json(text: &str) -> Result<Landscape> {
    let value: serde_json::Value = serde_json::from_str(text).map_err(|e| Error::Format(e.to_string()))?;
    match value.get("version").and_then(|v| v.as_str()) {
        Some(FORMAT_VERSION) => {}
        Some(other) => {
            return Err(Error::Format(format!(
                "unsupported version `{other}` (expected `{FORMAT_VERSION}`)"
            )))
        }
        None => return Err(Error::Format("missing version tag".into())),
    }
    let file: LandscapeFile = serde_json::from_value(value).map_err(|e| Error::Format(e.to_string()))?;
    file.into_landscape()
}

pub fn save(landscape: &Landscape, path: impl AsRef<Path>) -> Result<()> {
    let mut text = to_json(landscape)?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

pub fn load(path: impl AsRef<Path>) -> Result<Landscape> {
    from_json(&fs::read_to_string(path)?)
}
