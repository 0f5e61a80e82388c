//! Report envelopes, 17-digit JSON and file writers.

use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;

use anyhow::{Context, Result};
use serde::Serialize;
use serde_json::ser::{Formatter, PrettyFormatter};
use sha2::{Digest, Sha256};

use crate::config::RunConfig;

/// Pretty JSON with every float written as `{:.16e}` (17 significant digits).
struct Precise(PrettyFormatter<'static>);

impl Formatter for Precise {
    fn write_f64<W: ?Sized + Write>(&mut self, w: &mut W, v: f64) -> io::Result<()> {
        write!(w, "{v:.16e}")
    }

    fn write_f32<W: ?Sized + Write>(&mut self, w: &mut W, v: f32) -> io::Result<()> {
        write!(w, "{:.16e}", v as f64)
    }

    fn begin_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_array(w)
    }

    fn end_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array(w)
    }

    fn begin_array_value<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_array_value(w, first)
    }

    fn end_array_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array_value(w)
    }

    fn begin_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object(w)
    }

    fn end_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object(w)
    }

    fn begin_object_key<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_object_key(w, first)
    }

    fn begin_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object_value(w)
    }

    fn end_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object_value(w)
    }
}

pub fn to_json<T: Serialize>(value: &T) -> Result<Vec<u8>> {
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, Precise(PrettyFormatter::new()));
    value.serialize(&mut ser)?;
    out.push(b'\n');
    Ok(out)
}

/// SHA-256 of the canonical (compact, 17-digit) serialization of the resolved config.
pub fn config_hash(config: &RunConfig) -> Result<String> {
    let mut bytes = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut bytes, Compact17);
    config.serialize(&mut ser)?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

struct Compact17;

impl Formatter for Compact17 {
    fn write_f64<W: ?Sized + Write>(&mut self, w: &mut W, v: f64) -> io::Result<()> {
        write!(w, "{v:.16e}")
    }
}

#[derive(Debug, Serialize)]
pub struct Envelope<'a, T: Serialize> {
    pub command: &'a str,
    pub version: &'a str,
    pub input_hash: String,
    pub config: &'a RunConfig,
    pub result: &'a T,
}

/// Output directory for one run.
pub struct RunDir {
    pub path: PathBuf,
}

impl RunDir {
    pub fn create(config: &RunConfig) -> Result<Self> {
        let path = config.output_dir.clone();
        fs::create_dir_all(&path).with_context(|| format!("creating output directory {}", path.display()))?;
        Ok(Self { path })
    }

    pub fn file(&self, name: &str) -> PathBuf {
        self.path.join(name)
    }

    pub fn write_report<T: Serialize>(&self, name: &str, command: &str, config: &RunConfig, result: &T) -> Result<PathBuf> {
        let env = Envelope {
            command,
            version: env!("CARGO_PKG_VERSION"),
            input_hash: config_hash(config)?,
            config,
            result,
        };
        let path = self.file(name);
        fs::write(&path, to_json(&env)?).with_context(|| format!("writing {}", path.display()))?;
        Ok(path)
    }

    /// Writes `header` then one row per record, floats at 17 significant digits.
    pub fn write_csv(&self, name: &str, header: &[&str], rows: impl IntoIterator<Item = Vec<Cell>>) -> Result<PathBuf> {
        let path = self.file(name);
        let mut w = BufWriter::new(File::create(&path).with_context(|| format!("creating {}", path.display()))?);
        writeln!(w, "{}", header.join(","))?;
        for row in rows {
            let cells: Vec<String> = row.iter().map(Cell::render).collect();
            writeln!(w, "{}", cells.join(","))?;
        }
        w.flush()?;
        Ok(path)
    }

    pub fn write_with(&self, name: &str, f: impl FnOnce(&mut BufWriter<File>) -> io::Result<()>) -> Result<PathBuf> {
        let path = self.file(name);
        let mut w = BufWriter::new(File::create(&path).with_context(|| format!("creating {}", path.display()))?);
        f(&mut w).with_context(|| format!("writing {}", path.display()))?;
        w.flush()?;
        Ok(path)
    }
}

pub enum Cell {
    F(f64),
    U(u64),
    S(String),
    B(bool),
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::F(v) if v.is_finite() => format!("{v:.16e}"),
            Cell::F(_) => String::new(),
            Cell::U(v) => v.to_string(),
            Cell::S(s) => s.clone(),
            Cell::B(b) => b.to_string(),
        }
    }
}

impl From<Option<f64>> for Cell {
    fn from(v: Option<f64>) -> Self {
        Cell::F(v.unwrap_or(f64::NAN))
    }
}
