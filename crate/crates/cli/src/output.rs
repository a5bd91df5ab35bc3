use std::io::{self, BufWriter, Stdout, Write};
use std::path::{Path, PathBuf};

use tempfile::NamedTempFile;

use crate::CliError;

/// CSV destination. Files are written to a temporary sibling and renamed into
/// place on [`Output::finish`], so a failed run never leaves a partial report.
pub enum Output {
    Stdout(BufWriter<Stdout>),
    File {
        tmp: BufWriter<NamedTempFile>,
        path: PathBuf,
    },
}

impl Output {
    pub fn open(path: Option<&Path>) -> Result<Self, CliError> {
        let Some(path) = path else {
            return Ok(Output::Stdout(BufWriter::new(io::stdout())));
        };
        let dir = match path.parent() {
            Some(p) if !p.as_os_str().is_empty() => p,
            _ => Path::new("."),
        };
        let tmp = NamedTempFile::new_in(dir).map_err(|e| CliError::io(path, e))?;
        Ok(Output::File {
            tmp: BufWriter::new(tmp),
            path: path.to_path_buf(),
        })
    }

    /// Whether the report goes to stdout, in which case summaries go to stderr.
    pub fn is_stdout(&self) -> bool {
        matches!(self, Output::Stdout(_))
    }

    pub fn write_str(&mut self, s: &str) -> Result<(), CliError> {
        let res = match self {
            Output::Stdout(w) => w.write_all(s.as_bytes()),
            Output::File { tmp, .. } => tmp.write_all(s.as_bytes()),
        };
        res.map_err(|e| self.err(e))
    }

    pub fn finish(self) -> Result<(), CliError> {
        match self {
            Output::Stdout(mut w) => w
                .flush()
                .map_err(|e| CliError::io(Path::new("<stdout>"), e)),
            Output::File { tmp, path } => {
                let tmp = tmp
                    .into_inner()
                    .map_err(|e| CliError::io(&path, e.into_error()))?;
                tmp.as_file()
                    .sync_all()
                    .map_err(|e| CliError::io(&path, e))?;
                // temp files are created owner-only
                #[cfg(unix)]
                {
                    use std::os::unix::fs::PermissionsExt;
                    let mode = std::fs::Permissions::from_mode(0o644);
                    tmp.as_file()
                        .set_permissions(mode)
                        .map_err(|e| CliError::io(&path, e))?;
                }
                tmp.persist(&path)
                    .map_err(|e| CliError::io(&path, e.error))?;
                Ok(())
            }
        }
    }

    fn err(&self, e: io::Error) -> CliError {
        match self {
            Output::Stdout(_) => CliError::io(Path::new("<stdout>"), e),
            Output::File { path, .. } => CliError::io(path, e),
        }
    }
}

/// Writes a whole report in one go.
pub fn write_report(path: Option<&Path>, text: &str) -> Result<bool, CliError> {
    let mut out = Output::open(path)?;
    let to_stdout = out.is_stdout();
    out.write_str(text)?;
    out.finish()?;
    Ok(to_stdout)
}

pub fn read_text(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))
}
