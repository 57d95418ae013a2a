//! Output files: fixed-name CSV/JSON/jet-text artifacts under --out, each
//! hashed into a manifest.json that echoes the config and the seed so a rerun
//! can be checked byte for byte.

use std::fs;
use std::path::{Path, PathBuf};

use dulac::jets::PolyMapJet;
use dulac::linalg::CMat;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::error::CliError;

/// Every float goes through this: 16 significant digits, enough to
/// reconstruct the double exactly on read-back.
pub fn sig(x: f64) -> String {
    format!("{x:.15e}")
}

pub struct Outputs {
    dir: PathBuf,
    /// (file name, sha256 hex), in write order.
    written: Vec<(String, String)>,
}

impl Outputs {
    pub fn create(dir: &Path) -> Result<Self, CliError> {
        fs::create_dir_all(dir).map_err(|e| CliError::io("creating output directory", e))?;
        Ok(Outputs { dir: dir.to_path_buf(), written: Vec::new() })
    }

    pub fn write(&mut self, name: &str, bytes: &[u8]) -> Result<(), CliError> {
        let mut h = Sha256::new();
        h.update(bytes);
        let hex = format!("{:x}", h.finalize());
        fs::write(self.dir.join(name), bytes)
            .map_err(|e| CliError::io(&format!("writing {name}"), e))?;
        self.written.push((name.to_string(), hex));
        Ok(())
    }

    pub fn write_json(&mut self, name: &str, value: &Value) -> Result<(), CliError> {
        let mut text = serde_json::to_string_pretty(value).expect("serializing json");
        text.push('\n');
        self.write(name, text.as_bytes())
    }

    /// Writes manifest.json: tool + library version, the subcommand, the seed
    /// (null when the run draws no samples), the raw config text and a hash
    /// per output file. Nothing environment-dependent goes in, so identical
    /// config and seed give an identical manifest.
    pub fn finish(
        mut self,
        subcommand: &str,
        config_text: &str,
        seed: Option<u64>,
    ) -> Result<(), CliError> {
        let outputs: serde_json::Map<String, Value> = self
            .written
            .iter()
            .map(|(name, hash)| (name.clone(), Value::String(hash.clone())))
            .collect();
        let manifest = json!({
            "tool": "dulac",
            "version": dulac::VERSION,
            "subcommand": subcommand,
            "seed": seed,
            "config": config_text,
            "outputs": outputs,
        });
        self.write_json("manifest.json", &manifest)
    }
}

/// Plain text jet dump. Line one is `jets <period> <dim> <degree>`, then for
/// each step a `germ <i>` line followed by one `comp alpha.. re im` line per
/// stored coefficient, sorted by component and multi-index.
pub fn jets_text(maps: &[PolyMapJet]) -> String {
    let dim = maps.first().map_or(0, |m| m.dim());
    let degree = maps.first().map_or(0, |m| m.degree());
    let mut out = format!("jets {} {} {}\n", maps.len(), dim, degree);
    for (i, m) in maps.iter().enumerate() {
        out.push_str(&format!("germ {i}\n"));
        let mut terms: Vec<(usize, Vec<usize>, num_complex::Complex64)> =
            m.iter().map(|(c, mi, v)| (c, mi.entries().collect(), v)).collect();
        terms.sort_by(|a, b| (a.0, &a.1).cmp(&(b.0, &b.1)));
        for (comp, alpha, v) in terms {
            out.push_str(&comp.to_string());
            for e in alpha {
                out.push_str(&format!(" {e}"));
            }
            out.push_str(&format!(" {} {}\n", sig(v.re), sig(v.im)));
        }
    }
    out
}

/// CSV dump of a matrix list: index,row,col,re,im.
pub fn matrices_csv(mats: &[CMat]) -> Result<Vec<u8>, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["index", "row", "col", "re", "im"])
        .map_err(|e| CliError::Io(format!("csv: {e}")))?;
    for (idx, m) in mats.iter().enumerate() {
        for i in 0..m.rows() {
            for j in 0..m.cols() {
                let z = m[(i, j)];
                w.write_record([
                    idx.to_string(),
                    i.to_string(),
                    j.to_string(),
                    sig(z.re),
                    sig(z.im),
                ])
                .map_err(|e| CliError::Io(format!("csv: {e}")))?;
            }
        }
    }
    w.into_inner().map_err(|e| CliError::Io(format!("csv: {e}")))
}

pub fn csv_bytes(header: &[String], rows: &[Vec<String>]) -> Result<Vec<u8>, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).map_err(|e| CliError::Io(format!("csv: {e}")))?;
    for row in rows {
        w.write_record(row).map_err(|e| CliError::Io(format!("csv: {e}")))?;
    }
    w.into_inner().map_err(|e| CliError::Io(format!("csv: {e}")))
}
