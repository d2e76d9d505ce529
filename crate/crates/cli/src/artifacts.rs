//! Artifact emission: atomic writes, a checksum manifest, JSON with
//! exact 17-significant-digit floats, and gnuplot-ready plot files.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use anyhow::Context as _;
use cefoliator_core::stability::format_g17;
use cefoliator_core::surface::{write_surface_file, SurfaceFile};
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::RunError;

pub const MANIFEST_NAME: &str = "manifest.txt";

/// Collects run artifacts in one output directory. Every file is
/// written to a temporary name and renamed into place; `finish` writes
/// a manifest listing the SHA-256 checksum of every artifact (the
/// manifest itself excluded), in `sha256sum -c` format.
pub struct ArtifactWriter {
    dir: PathBuf,
    checksums: BTreeMap<String, String>,
}

fn sha256_hex(bytes: &[u8]) -> String {
    let digest = Sha256::digest(bytes);
    let mut out = String::with_capacity(64);
    for b in digest {
        out.push_str(&format!("{b:02x}"));
    }
    out
}

fn check_name(name: &str) -> Result<(), RunError> {
    let ok = !name.is_empty()
        && name != MANIFEST_NAME
        && !name.starts_with('.')
        && name
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || matches!(c, '.' | '_' | '-'));
    if ok {
        Ok(())
    } else {
        Err(RunError::Config(format!("invalid artifact name {name:?}")))
    }
}

impl ArtifactWriter {
    pub fn new(dir: &Path) -> Result<Self, RunError> {
        fs::create_dir_all(dir)
            .with_context(|| format!("creating output directory {}", dir.display()))
            .map_err(RunError::Io)?;
        Ok(ArtifactWriter {
            dir: dir.to_path_buf(),
            checksums: BTreeMap::new(),
        })
    }

    fn place(&mut self, name: &str, tmp: &Path, bytes: &[u8]) -> Result<(), RunError> {
        let target = self.dir.join(name);
        fs::rename(tmp, &target)
            .with_context(|| format!("renaming {} into place", target.display()))
            .map_err(RunError::Io)?;
        self.checksums.insert(name.to_string(), sha256_hex(bytes));
        Ok(())
    }

    pub fn write_bytes(&mut self, name: &str, bytes: &[u8]) -> Result<(), RunError> {
        check_name(name)?;
        let tmp = self.dir.join(format!(".{name}.tmp"));
        let mut f = fs::File::create(&tmp)
            .with_context(|| format!("creating {}", tmp.display()))
            .map_err(RunError::Io)?;
        f.write_all(bytes)
            .and_then(|_| f.sync_all())
            .with_context(|| format!("writing {}", tmp.display()))
            .map_err(RunError::Io)?;
        drop(f);
        self.place(name, &tmp, bytes)
    }

    pub fn write_text(&mut self, name: &str, text: &str) -> Result<(), RunError> {
        self.write_bytes(name, text.as_bytes())
    }

    /// Serializes with floats rendered at 17 significant digits and a
    /// trailing newline.
    pub fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<(), RunError> {
        self.write_text(name, &to_json_g17(value)?)
    }

    /// Writes a surface dump through the library encoder, then records
    /// its checksum.
    pub fn write_surface(&mut self, name: &str, file: &SurfaceFile) -> Result<(), RunError> {
        check_name(name)?;
        let tmp = self.dir.join(format!(".{name}.tmp"));
        write_surface_file(&tmp, file).map_err(RunError::Solver)?;
        let bytes = fs::read(&tmp)
            .with_context(|| format!("reading back {}", tmp.display()))
            .map_err(RunError::Io)?;
        self.place(name, &tmp, &bytes)
    }

    /// Writes the manifest. Call last; artifacts written after this are
    /// not recorded.
    pub fn finish(&mut self) -> Result<(), RunError> {
        let mut text = String::new();
        for (name, sum) in &self.checksums {
            text.push_str(&format!("{sum}  {name}\n"));
        }
        let tmp = self.dir.join(format!(".{MANIFEST_NAME}.tmp"));
        fs::write(&tmp, &text)
            .with_context(|| format!("writing {}", tmp.display()))
            .map_err(RunError::Io)?;
        fs::rename(&tmp, self.dir.join(MANIFEST_NAME))
            .context("renaming manifest into place")
            .map_err(RunError::Io)?;
        Ok(())
    }

    pub fn artifact_count(&self) -> usize {
        self.checksums.len()
    }

    /// Emits a two-column gnuplot file `plot_<name>.dat`. With `loglog`
    /// (for decay fits) a `plot_<name>_loglog.dat` variant is added,
    /// provided every pair is strictly positive — a series touching
    /// zero has no log-log representation and the variant is omitted.
    /// Errors on an empty series and writes nothing.
    pub fn write_plot(
        &mut self,
        name: &str,
        xs: &[f64],
        ys: &[f64],
        loglog: bool,
    ) -> Result<(), RunError> {
        let linear = plot_columns(xs, ys)?;
        self.write_text(&format!("plot_{name}.dat"), &linear)?;
        if loglog && xs.iter().chain(ys).all(|v| *v > 0.0) {
            let lx: Vec<f64> = xs.iter().map(|v| v.ln()).collect();
            let ly: Vec<f64> = ys.iter().map(|v| v.ln()).collect();
            let logs = plot_columns(&lx, &ly)?;
            self.write_text(&format!("plot_{name}_loglog.dat"), &logs)?;
        }
        Ok(())
    }
}

/// Renders a two-column table (space-separated, 17 significant digits).
/// An empty or mismatched series is an error and produces no output.
pub fn plot_columns(xs: &[f64], ys: &[f64]) -> Result<String, RunError> {
    if xs.is_empty() {
        return Err(RunError::Config("cannot plot an empty series".into()));
    }
    if xs.len() != ys.len() {
        return Err(RunError::Config(format!(
            "plot series length mismatch: {} vs {}",
            xs.len(),
            ys.len()
        )));
    }
    let mut out = String::new();
    for (x, y) in xs.iter().zip(ys) {
        out.push_str(&format!("{} {}\n", format_g17(*x), format_g17(*y)));
    }
    Ok(out)
}

/// JSON serialization with every float rendered by the same
/// 17-significant-digit formatter the CSV artifacts use.
pub fn to_json_g17<T: Serialize>(value: &T) -> Result<String, RunError> {
    struct G17Formatter;
    impl serde_json::ser::Formatter for G17Formatter {
        fn write_f64<W: ?Sized + std::io::Write>(
            &mut self,
            writer: &mut W,
            value: f64,
        ) -> std::io::Result<()> {
            writer.write_all(format_g17(value).as_bytes())
        }
    }
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, G17Formatter);
    value
        .serialize(&mut ser)
        .map_err(|e| RunError::Config(format!("report serialization failed: {e}")))?;
    buf.push(b'\n');
    Ok(String::from_utf8(buf).expect("JSON output is UTF-8"))
}
