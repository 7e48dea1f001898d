//! JSON state files with complex numbers as `[re, im]` pairs.

use gme_core::{CMat, CVec, DensityMatrix, DimsLayout, PureState, Subspace, C64};
use serde::{Deserialize, Serialize};
use std::path::Path;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Pure,
    Mixed,
    Subspace,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateFile {
    #[serde(rename = "type")]
    pub kind: Kind,
    pub dims: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub amplitudes: Option<Vec<[f64; 2]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matrix: Option<Vec<Vec<[f64; 2]>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spanning: Option<Vec<Vec<[f64; 2]>>>,
}

/// Any object a state file can hold.
#[derive(Debug, Clone)]
pub enum Loaded {
    Pure(PureState),
    Mixed(DensityMatrix),
    Subspace(Subspace),
}

#[derive(Debug)]
pub enum FileError {
    Io(String),
    Schema(String),
}

impl std::fmt::Display for FileError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            FileError::Io(m) | FileError::Schema(m) => f.write_str(m),
        }
    }
}

fn pairs(v: &CVec) -> Vec<[f64; 2]> {
    v.iter().map(|z| [z.re, z.im]).collect()
}

fn complex(field: &str, v: &[[f64; 2]]) -> Result<CVec, FileError> {
    if let Some(i) = v.iter().position(|p| !p[0].is_finite() || !p[1].is_finite()) {
        return Err(FileError::Schema(format!("{field}[{i}]: non-finite entry")));
    }
    Ok(CVec::from_iterator(v.len(), v.iter().map(|p| C64::new(p[0], p[1]))))
}

impl StateFile {
    pub fn from_loaded(obj: &Loaded) -> Self {
        let blank = |kind, layout: &DimsLayout| StateFile {
            kind,
            dims: layout.dims().to_vec(),
            amplitudes: None,
            matrix: None,
            spanning: None,
        };
        match obj {
            Loaded::Pure(p) => StateFile { amplitudes: Some(pairs(p.amplitudes())), ..blank(Kind::Pure, p.layout()) },
            Loaded::Mixed(r) => {
                let m = r.matrix();
                let rows = (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect());
                StateFile { matrix: Some(rows.collect()), ..blank(Kind::Mixed, r.layout()) }
            }
            Loaded::Subspace(s) => StateFile {
                spanning: Some(s.spanning().iter().map(|p| pairs(p.amplitudes())).collect()),
                ..blank(Kind::Subspace, s.layout())
            },
        }
    }

    /// Builds the core object, enforcing its invariants.
    pub fn to_loaded(&self) -> Result<Loaded, FileError> {
        let schema = |e: gme_core::QError| FileError::Schema(e.to_string());
        let layout = DimsLayout::new(self.dims.clone()).map_err(|e| FileError::Schema(format!("dims: {e}")))?;
        let n = layout.total();
        let present = [
            ("amplitudes", self.amplitudes.is_some(), Kind::Pure),
            ("matrix", self.matrix.is_some(), Kind::Mixed),
            ("spanning", self.spanning.is_some(), Kind::Subspace),
        ];
        for (field, has, kind) in present {
            if has != (kind == self.kind) {
                let verb = if has { "not allowed" } else { "required" };
                return Err(FileError::Schema(format!("field `{field}` {verb} for type {:?}", self.kind)));
            }
        }
        match self.kind {
            Kind::Pure => {
                let v = complex("amplitudes", self.amplitudes.as_ref().unwrap())?;
                Ok(Loaded::Pure(PureState::new(v, layout).map_err(schema)?))
            }
            Kind::Mixed => {
                let rows = self.matrix.as_ref().unwrap();
                if rows.len() != n {
                    return Err(FileError::Schema(format!("matrix: {} rows, expected {n}", rows.len())));
                }
                let mut m = CMat::zeros(n, n);
                for (i, row) in rows.iter().enumerate() {
                    if row.len() != n {
                        return Err(FileError::Schema(format!("matrix[{i}]: {} entries, expected {n}", row.len())));
                    }
                    let row = complex(&format!("matrix[{i}]"), row)?;
                    for j in 0..n {
                        m[(i, j)] = row[j];
                    }
                }
                Ok(Loaded::Mixed(DensityMatrix::new(m, layout).map_err(schema)?))
            }
            Kind::Subspace => {
                let span = self.spanning.as_ref().unwrap();
                if span.is_empty() {
                    return Err(FileError::Schema("spanning: no vectors".into()));
                }
                let states = span
                    .iter()
                    .enumerate()
                    .map(|(i, v)| {
                        let v = complex(&format!("spanning[{i}]"), v)?;
                        PureState::new(v, layout.clone()).map_err(|e| FileError::Schema(format!("spanning[{i}]: {e}")))
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                Ok(Loaded::Subspace(Subspace::new(states).map_err(schema)?))
            }
        }
    }
}

pub fn parse_state(text: &str) -> Result<Loaded, FileError> {
    let file: StateFile = serde_json::from_str(text).map_err(|e| FileError::Schema(e.to_string()))?;
    file.to_loaded()
}

pub fn load_state(path: &Path) -> Result<Loaded, FileError> {
    let text = std::fs::read_to_string(path).map_err(|e| FileError::Io(format!("{}: {e}", path.display())))?;
    parse_state(&text).map_err(|e| match e {
        FileError::Schema(m) => FileError::Schema(format!("{}: {m}", path.display())),
        other => other,
    })
}

pub fn to_json(obj: &Loaded) -> String {
    serde_json::to_string_pretty(&StateFile::from_loaded(obj)).expect("state files always serialize") + "\n"
}

pub fn save_state(obj: &Loaded, path: &Path) -> Result<(), FileError> {
    std::fs::write(path, to_json(obj)).map_err(|e| FileError::Io(format!("{}: {e}", path.display())))
}
