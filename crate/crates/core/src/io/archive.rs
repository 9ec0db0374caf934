use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::FittedModel;

pub const FORMAT_VERSION: u64 = 1;

/// A fitted model as stored on disk.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelArchive {
    pub format_version: u64,
    /// Version of the library that wrote the archive.
    pub writer: String,
    pub model: FittedModel,
}

impl ModelArchive {
    pub fn new(model: FittedModel) -> Self {
        Self {
            format_version: FORMAT_VERSION,
            writer: env!("CARGO_PKG_VERSION").to_string(),
            model,
        }
    }
}

pub fn write_model<W: Write>(writer: W, model: &FittedModel) -> Result<()> {
    let mut w = BufWriter::new(writer);
    serde_json::to_writer(&mut w, &ModelArchive::new(model.clone()))?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(())
}

pub fn save_model(path: impl AsRef<Path>, model: &FittedModel) -> Result<()> {
    write_model(File::create(path.as_ref())?, model)
}

/// Reads an archive, checking the format version before the schema.
/// Unknown fields are ignored.
pub fn read_model<R: Read>(reader: R) -> Result<ModelArchive> {
    let value: serde_json::Value =
        serde_json::from_reader(BufReader::new(reader)).map_err(|e| Error::ArchiveSchema(e.to_string()))?;
    let version = value
        .get("format_version")
        .ok_or_else(|| Error::ArchiveSchema("missing `format_version`".into()))?
        .as_u64()
        .ok_or_else(|| Error::ArchiveSchema("`format_version` is not a non-negative integer".into()))?;
    if version != FORMAT_VERSION {
        return Err(Error::ArchiveVersion {
            found: version,
            supported: FORMAT_VERSION,
        });
    }
    let archive: ModelArchive = serde_json::from_value(value).map_err(|e| Error::ArchiveSchema(e.to_string()))?;
    archive.model.validate()?;
    Ok(archive)
}

pub fn load_model(path: impl AsRef<Path>) -> Result<ModelArchive> {
    read_model(File::open(path.as_ref())?)
}
