use super::{CliError, VERSION_TAG};
use serde::Serialize;
use std::io::Write;
use std::path::{Path, PathBuf};

/// Bytes bound for a declared output path, or standard output.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Artifact {
    pub path: Option<PathBuf>,
    pub bytes: Vec<u8>,
}

impl Artifact {
    pub(crate) fn emit(&self) -> Result<(), CliError> {
        match &self.path {
            Some(p) => write_atomic(p, &self.bytes),
            None => {
                let mut out = std::io::stdout().lock();
                out.write_all(&self.bytes)?;
                out.flush()?;
                Ok(())
            }
        }
    }
}

/// Write to a temporary file in the target directory, then rename over `path`.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| CliError::Io(format!("{}: {}", path.display(), e.error)))?;
    Ok(())
}

#[derive(Serialize)]
struct Header<'a> {
    version: &'static str,
    subcommand: &'a str,
    config: &'a serde_json::Value,
}

#[derive(Serialize)]
struct Envelope<'a, P: Serialize> {
    version: &'static str,
    subcommand: &'a str,
    config: &'a serde_json::Value,
    payload: P,
}

/// Pretty JSON envelope with a trailing newline.
pub(crate) fn json_envelope<P: Serialize>(
    subcommand: &str,
    config: &serde_json::Value,
    payload: P,
) -> Result<Vec<u8>, CliError> {
    let env = Envelope { version: VERSION_TAG, subcommand, config, payload };
    let mut s = serde_json::to_string_pretty(&env).map_err(|e| CliError::Io(e.to_string()))?;
    s.push('\n');
    Ok(s.into_bytes())
}

/// `# config: {...}` followed by a header row and the records.
pub(crate) fn csv_table<R: Serialize>(
    subcommand: &str,
    config: &serde_json::Value,
    rows: &[R],
) -> Result<Vec<u8>, CliError> {
    let header = serde_json::to_string(&Header { version: VERSION_TAG, subcommand, config })
        .map_err(|e| CliError::Io(e.to_string()))?;
    let mut out = format!("# config: {header}\n").into_bytes();
    {
        let mut w = csv::Writer::from_writer(&mut out);
        for r in rows {
            w.serialize(r).map_err(|e| CliError::Io(e.to_string()))?;
        }
        w.flush()?;
    }
    Ok(out)
}

/// Binary greyscale pixmap, rows top to bottom.
pub(crate) fn pgm(width: usize, height: usize, pixels: &[u8]) -> Vec<u8> {
    debug_assert_eq!(pixels.len(), width * height);
    let mut out = format!("P5\n{width} {height}\n255\n").into_bytes();
    out.extend_from_slice(pixels);
    out
}
