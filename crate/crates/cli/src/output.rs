//! Output files. Every file carries the schema version and the config hash:
//! JSON files as top-level fields, CSV files as a leading `#` comment line.

use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use definetti_core::priors::fmt17;
use serde::Serialize;
use serde_json::ser::Formatter;

use crate::config::SCHEMA_VERSION;
use crate::CliError;

/// Compact JSON layout (the trait defaults) with every float written to 17 significant digits.
struct Digits17;

impl Formatter for Digits17 {
    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        writer.write_all(fmt17(value).as_bytes())
    }

    fn write_f32<W: ?Sized + Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(writer, value as f64)
    }
}

#[derive(Serialize)]
struct Envelope<'a, T: Serialize> {
    schema: u32,
    config_hash: &'a str,
    command: &'a str,
    #[serde(flatten)]
    body: &'a T,
}

pub fn to_json_string<T: Serialize>(value: &T) -> String {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, Digits17);
    value.serialize(&mut ser).expect("in-memory serialization");
    String::from_utf8(buf).expect("serde_json emits UTF-8")
}

pub struct OutputDir {
    dir: PathBuf,
    config_hash: String,
    command: &'static str,
}

impl OutputDir {
    pub fn create(dir: &Path, config_hash: String, command: &'static str) -> Result<Self, CliError> {
        fs::create_dir_all(dir).map_err(|e| CliError::Io(dir.to_path_buf(), e))?;
        Ok(Self { dir: dir.to_path_buf(), config_hash, command })
    }

    fn write(&self, name: &str, fill: impl FnOnce(&mut BufWriter<fs::File>) -> io::Result<()>) -> Result<(), CliError> {
        let path = self.dir.join(name);
        let io_err = |e| CliError::Io(path.clone(), e);
        let mut out = BufWriter::new(fs::File::create(&path).map_err(io_err)?);
        fill(&mut out).and_then(|_| out.flush()).map_err(io_err)
    }

    /// `body` must serialize as a JSON object.
    pub fn json<T: Serialize>(&self, name: &str, body: &T) -> Result<(), CliError> {
        let env = Envelope { schema: SCHEMA_VERSION, config_hash: &self.config_hash, command: self.command, body };
        let text = to_json_string(&env);
        self.write(name, |out| writeln!(out, "{text}"))
    }

    pub fn csv(&self, name: &str, rows: impl FnOnce(&mut BufWriter<fs::File>) -> io::Result<()>) -> Result<(), CliError> {
        self.write(name, |out| {
            writeln!(out, "# schema={SCHEMA_VERSION},config_hash={},command={}", self.config_hash, self.command)?;
            rows(out)
        })
    }
}
