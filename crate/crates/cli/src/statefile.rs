//! JSON state files: a versioned layout, a row-major matrix of `[re, im]`
//! pairs and optional generator metadata.

use std::collections::BTreeMap;

use csent::qmat::{c, ComplexMatrix};
use csent::{CsentError, Factor, MultipartiteState, Party, SubsystemLayout};
use serde::{Deserialize, Serialize};

pub const STATE_FILE_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PartyName {
    A,
    B,
}

impl From<Party> for PartyName {
    fn from(p: Party) -> Self {
        match p {
            Party::A => PartyName::A,
            Party::B => PartyName::B,
        }
    }
}

impl From<PartyName> for Party {
    fn from(p: PartyName) -> Self {
        match p {
            PartyName::A => Party::A,
            PartyName::B => Party::B,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LayoutEntry {
    pub label: String,
    pub dim: usize,
    pub party: PartyName,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Metadata {
    pub family: String,
    #[serde(default)]
    pub params: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateFile {
    pub version: u32,
    pub layout: Vec<LayoutEntry>,
    pub matrix: Vec<Vec<[f64; 2]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub metadata: Option<Metadata>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum LoadError {
    /// Syntax, schema or shape problem; exit code 2.
    Parse(String),
    /// Well-formed file whose state violates an invariant; exit code 3.
    Validation { invariant: &'static str, message: String },
}

impl std::fmt::Display for LoadError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            LoadError::Parse(m) => write!(f, "parse error: {m}"),
            LoadError::Validation { invariant, message } => {
                write!(f, "validation error: invariant `{invariant}` violated: {message}")
            }
        }
    }
}

/// Name of the state invariant an error reports, if it is a validation error.
pub fn violated_invariant(e: &CsentError) -> Option<&'static str> {
    match e {
        CsentError::NotPsd { .. } => Some("psd"),
        CsentError::NotHermitian { .. } => Some("hermitian"),
        CsentError::Trace { .. } => Some("unit-trace"),
        CsentError::Normalization { .. } => Some("normalized"),
        _ => None,
    }
}

impl StateFile {
    pub fn from_state(state: &MultipartiteState, metadata: Option<Metadata>) -> Self {
        let m = state.matrix();
        StateFile {
            version: STATE_FILE_VERSION,
            layout: state
                .layout()
                .factors()
                .iter()
                .map(|f| LayoutEntry {
                    label: f.label.clone(),
                    dim: f.dim,
                    party: f.party.into(),
                })
                .collect(),
            matrix: (0..m.nrows())
                .map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect())
                .collect(),
            metadata,
        }
    }

    pub fn parse(text: &str) -> Result<Self, LoadError> {
        let file: StateFile = serde_json::from_str(text)
            .map_err(|e| LoadError::Parse(format!("line {} column {}: {e}", e.line(), e.column())))?;
        if file.version != STATE_FILE_VERSION {
            return Err(LoadError::Parse(format!(
                "unsupported version {} (expected {STATE_FILE_VERSION})",
                file.version
            )));
        }
        Ok(file)
    }

    pub fn layout(&self) -> Result<SubsystemLayout, LoadError> {
        let factors = self
            .layout
            .iter()
            .map(|e| Factor::new(e.label.clone(), e.dim, e.party.into()))
            .collect();
        SubsystemLayout::new(factors).map_err(|e| LoadError::Parse(format!("layout: {e}")))
    }

    /// Matrix checked for shape against the layout; no state invariants yet.
    pub fn raw_matrix(&self) -> Result<(ComplexMatrix, SubsystemLayout), LoadError> {
        let layout = self.layout()?;
        let n = layout.total_dim();
        if n > csent::qmat::MAX_DIM {
            return Err(LoadError::Parse(format!("total dimension {n} exceeds {}", csent::qmat::MAX_DIM)));
        }
        if self.matrix.len() != n {
            return Err(LoadError::Parse(format!("matrix has {} rows, layout needs {n}", self.matrix.len())));
        }
        for (i, row) in self.matrix.iter().enumerate() {
            if row.len() != n {
                return Err(LoadError::Parse(format!("matrix row {i} has {} entries, expected {n}", row.len())));
            }
        }
        let m = ComplexMatrix::from_fn(n, n, |i, j| c(self.matrix[i][j][0], self.matrix[i][j][1]));
        Ok((m, layout))
    }

    /// Validated state (Hermitian, PSD, unit trace).
    pub fn state(&self) -> Result<MultipartiteState, LoadError> {
        let (m, layout) = self.raw_matrix()?;
        MultipartiteState::new(m, layout).map_err(|e| match violated_invariant(&e) {
            Some(invariant) => LoadError::Validation {
                invariant,
                message: e.to_string(),
            },
            None => LoadError::Parse(e.to_string()),
        })
    }

    /// JSON with one matrix row per line; floats use the shortest exact representation.
    pub fn to_text(&self) -> String {
        let mut s = String::from("{\n");
        s.push_str(&format!("  \"version\": {},\n", self.version));
        s.push_str("  \"layout\": [\n");
        let entries: Vec<String> = self
            .layout
            .iter()
            .map(|e| format!("    {}", serde_json::to_string(e).expect("layout entry serializes")))
            .collect();
        s.push_str(&entries.join(",\n"));
        s.push_str("\n  ],\n  \"matrix\": [\n");
        let rows: Vec<String> = self
            .matrix
            .iter()
            .map(|r| format!("    {}", serde_json::to_string(r).expect("finite entries serialize")))
            .collect();
        s.push_str(&rows.join(",\n"));
        s.push_str("\n  ]");
        if let Some(meta) = &self.metadata {
            s.push_str(",\n  \"metadata\": ");
            s.push_str(&serde_json::to_string(meta).expect("metadata serializes"));
        }
        s.push_str("\n}\n");
        s
    }
}

pub fn load(path: &std::path::Path) -> Result<MultipartiteState, LoadError> {
    let text = std::fs::read_to_string(path).map_err(|e| LoadError::Parse(format!("{}: {e}", path.display())))?;
    StateFile::parse(&text)?.state()
}

#[cfg(test)]
mod tests {
    use super::*;
    use csent::states::{bell_state, werner};

    #[test]
    fn text_round_trip_is_exact() {
        let w = werner(0.1 + 0.2);
        let f = StateFile::from_state(&w, None);
        let text = f.to_text();
        let back = StateFile::parse(&text).unwrap();
        assert_eq!(back, f);
        assert_eq!(back.to_text(), text);
        assert_eq!(back.state().unwrap(), w);
    }

    #[test]
    fn unknown_fields_are_rejected() {
        let text = StateFile::from_state(&bell_state(0), None).to_text().replacen("\"version\"", "\"extra\": 1, \"version\"", 1);
        assert!(matches!(StateFile::parse(&text), Err(LoadError::Parse(_))));
    }

    #[test]
    fn short_row_is_a_parse_error() {
        let mut f = StateFile::from_state(&bell_state(0), None);
        f.matrix[1].pop();
        let e = f.state().unwrap_err();
        assert!(matches!(&e, LoadError::Parse(m) if m.contains("row 1")), "{e}");
    }

    #[test]
    fn indefinite_matrix_is_a_validation_error() {
        let mut f = StateFile::from_state(&werner(0.5), None);
        f.matrix[0][0][0] += 0.3;
        f.matrix[3][3][0] -= 0.3;
        let e = f.state().unwrap_err();
        assert!(matches!(e, LoadError::Validation { invariant: "psd", .. }), "{e}");
    }

    #[test]
    fn syntax_errors_carry_a_position() {
        let e = StateFile::parse("{\n  \"version\": 1,\n  \"layout\": [\n}").unwrap_err();
        assert!(matches!(&e, LoadError::Parse(m) if m.starts_with("line 4")), "{e}");
    }
}
