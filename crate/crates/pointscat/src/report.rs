//! Report plumbing: 17-significant-digit CSV writers, JSON summaries and
//! the manifest fingerprint embedded in every output file.

use std::io::Write;

use serde::Serialize;

use crate::error::Result;
use crate::numutil::fnv1a64;

/// Render a real with 17 significant digits (full f64 round-trip fidelity).
pub fn sig17(x: f64) -> String {
    format!("{x:.16e}")
}

/// Stable fingerprint of a serializable configuration.
pub fn manifest_hash<T: Serialize>(config: &T) -> Result<String> {
    let canonical = serde_json::to_string(config)
        .map_err(|e| crate::error::Error::Config(format!("manifest serialization: {e}")))?;
    Ok(format!("{:016x}", fnv1a64(canonical.as_bytes())))
}

/// CSV writer that pins the column schema and prepends the manifest hash as
/// a comment line, so every output file carries its provenance.
pub struct CsvWriter<W: Write> {
    out: W,
    columns: usize,
}

impl<W: Write> CsvWriter<W> {
    pub fn new(mut out: W, manifest: &str, header: &[&str]) -> Result<Self> {
        writeln!(out, "# manifest {manifest}")?;
        writeln!(out, "{}", header.join(","))?;
        Ok(Self {
            out,
            columns: header.len(),
        })
    }

    pub fn row(&mut self, fields: &[String]) -> Result<()> {
        debug_assert_eq!(fields.len(), self.columns);
        writeln!(self.out, "{}", fields.join(","))?;
        Ok(())
    }

    pub fn into_inner(self) -> W {
        self.out
    }
}

/// JSON report wrapper: payload plus manifest hash and crate version.
#[derive(Debug, Serialize)]
pub struct JsonReport<T: Serialize> {
    pub manifest_hash: String,
    pub version: &'static str,
    pub payload: T,
}

impl<T: Serialize> JsonReport<T> {
    pub fn new(manifest_hash: &str, payload: T) -> Self {
        Self {
            manifest_hash: manifest_hash.to_string(),
            version: env!("CARGO_PKG_VERSION"),
            payload,
        }
    }

    pub fn write<W: Write>(&self, mut out: W) -> Result<()> {
        let text = serde_json::to_string_pretty(self)
            .map_err(|e| crate::error::Error::Config(format!("report serialization: {e}")))?;
        out.write_all(text.as_bytes())?;
        out.write_all(b"\n")?;
        Ok(())
    }
}
