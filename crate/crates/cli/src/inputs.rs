use std::path::Path;
use std::sync::Arc;

use polyext::polytope::builtin;
use polyext::{rat_parse, Operator, OperatorFile, PolyhedralSpace, QMatrix, QVector, SpaceFile};
use serde::de::DeserializeOwned;
use sha2::{Digest, Sha256};

use crate::report::CliError;
use crate::CliResult;

/// Loads inputs and hashes everything that was read.
pub struct Inputs {
    hasher: Sha256,
}

impl Inputs {
    pub fn new() -> Self {
        Inputs { hasher: Sha256::new() }
    }

    fn record(&mut self, tag: &str, bytes: &[u8]) {
        self.hasher.update(tag.as_bytes());
        self.hasher.update((bytes.len() as u64).to_le_bytes());
        self.hasher.update(bytes);
    }

    pub fn literal(&mut self, text: &str) {
        self.record("literal", text.as_bytes());
    }

    pub fn json<T: DeserializeOwned>(&mut self, path: &Path) -> CliResult<T> {
        let shown = path.display().to_string();
        let bytes = std::fs::read(path).map_err(|source| CliError::Io { path: shown.clone(), source })?;
        self.record("file", &bytes);
        serde_json::from_slice(&bytes).map_err(|source| CliError::Json { path: shown, source })
    }

    /// A built-in name such as `hex`, or a path to a space file.
    pub fn space(&mut self, arg: &str) -> CliResult<Arc<PolyhedralSpace>> {
        if let Some(s) = builtin(arg) {
            self.record("builtin", arg.as_bytes());
            return Ok(Arc::new(s));
        }
        let path = Path::new(arg);
        if !path.exists() {
            return Err(CliError::Usage(format!("{arg:?} is neither a built-in space nor a file")));
        }
        let file: SpaceFile = self.json(path)?;
        Ok(Arc::new(PolyhedralSpace::from_file(&file)?))
    }

    pub fn operator(&mut self, path: &Path) -> CliResult<Operator> {
        let file: OperatorFile = self.json(path)?;
        Ok(file.load()?)
    }

    pub fn digest(self) -> String {
        hex::encode(self.hasher.finalize())
    }
}

/// `1,-1/2,0.25`
pub fn parse_vector(text: &str) -> CliResult<QVector> {
    text.split(',')
        .map(|t| rat_parse(t.trim()).map_err(CliError::from))
        .collect::<CliResult<Vec<_>>>()
        .map(QVector::new)
}

/// Rows separated by `;`, entries by `,`.
pub fn parse_matrix(text: &str) -> CliResult<QMatrix> {
    let rows: Vec<QVector> = text.split(';').map(parse_vector).collect::<CliResult<_>>()?;
    let cols = rows.first().map_or(0, QVector::dim);
    Ok(QMatrix::from_rows(&rows, cols)?)
}
