use std::fs::File;
use std::path::{Path, PathBuf};
use std::process::{Command, Stdio};
use std::time::Duration;

use wait_timeout::ChildExt;

use super::Codec;
use crate::error::CodecError;
use crate::image::ImageBuffer;
use crate::io::{decode_pgm, encode_pgm};

/// Environment variable naming the directory for per-call temp files.
pub const TEMP_DIR_ENV: &str = "PNPCOMP_TMPDIR";

const DEFAULT_TIMEOUT: Duration = Duration::from_secs(60);

fn shell_quote(p: &Path) -> String {
    format!("'{}'", p.to_string_lossy().replace('\'', r"'\''"))
}

/// Writes `img` as PGM, runs the shell command made from `template`, and
/// reads the output PGM back.
///
/// `{in}` and `{out}` expand to quoted paths inside a fresh temp directory,
/// so concurrent calls never share files. `extra` adds further
/// placeholder substitutions such as `{sigma}`. The directory is removed
/// when the call returns.
pub fn run_pgm_command(
    template: &str,
    img: &ImageBuffer,
    extra: &[(&str, String)],
    workdir: Option<&Path>,
    timeout: Duration,
) -> Result<ImageBuffer, CodecError> {
    let mut builder = tempfile::Builder::new();
    builder.prefix("pnpcomp-");
    let dir = match std::env::var_os(TEMP_DIR_ENV) {
        Some(base) => builder.tempdir_in(base),
        None => builder.tempdir(),
    }
    .map_err(CodecError::TempFile)?;
    let input = dir.path().join("in.pgm");
    let output = dir.path().join("out.pgm");
    std::fs::write(&input, encode_pgm(img)).map_err(CodecError::TempFile)?;

    let mut command = template
        .replace("{in}", &shell_quote(&input))
        .replace("{out}", &shell_quote(&output));
    for (key, value) in extra {
        command = command.replace(&format!("{{{key}}}"), value);
    }

    let stderr_path = dir.path().join("stderr.txt");
    let stderr = File::create(&stderr_path).map_err(CodecError::TempFile)?;
    let mut cmd = Command::new("sh");
    cmd.arg("-c")
        .arg(&command)
        .stdin(Stdio::null())
        .stdout(Stdio::null())
        .stderr(stderr);
    if let Some(wd) = workdir {
        cmd.current_dir(wd);
    }
    let mut child = cmd.spawn().map_err(|source| CodecError::Spawn {
        command: command.clone(),
        source,
    })?;
    let status = match child.wait_timeout(timeout).map_err(|source| CodecError::Spawn {
        command: command.clone(),
        source,
    })? {
        Some(status) => status,
        None => {
            let _ = child.kill();
            let _ = child.wait();
            return Err(CodecError::Timeout { command, timeout });
        }
    };
    if !status.success() {
        let stderr = std::fs::read_to_string(&stderr_path).unwrap_or_default();
        return Err(CodecError::ExitStatus {
            command,
            status: status.code().unwrap_or(-1),
            stderr: stderr.trim().to_string(),
        });
    }
    let bytes = match std::fs::read(&output) {
        Ok(b) => b,
        Err(_) => {
            return Err(CodecError::MissingOutput {
                command,
                path: output,
            })
        }
    };
    let decoded = decode_pgm(&bytes).map_err(CodecError::Unparsable)?;
    if decoded.dims() != img.dims() {
        return Err(CodecError::OutputDimensions {
            expected: img.dims(),
            actual: decoded.dims(),
        });
    }
    Ok(decoded)
}

/// External codec driven through PGM temp files.
///
/// Inputs are clipped to `[0, 255]` and rounded to 8 bits on the way out,
/// which adds its own quantization to anything estimated through it.
#[derive(Debug, Clone)]
pub struct SubprocessCodec {
    template: String,
    workdir: Option<PathBuf>,
    timeout: Duration,
}

impl SubprocessCodec {
    pub fn new(template: impl Into<String>) -> Result<Self, CodecError> {
        let template = template.into();
        if !template.contains("{in}") || !template.contains("{out}") {
            return Err(CodecError::InvalidParameter(format!(
                "command template needs {{in}} and {{out}}: {template:?}"
            )));
        }
        Ok(Self {
            template,
            workdir: None,
            timeout: DEFAULT_TIMEOUT,
        })
    }

    pub fn with_workdir(mut self, dir: PathBuf) -> Self {
        self.workdir = Some(dir);
        self
    }

    pub fn with_timeout(mut self, timeout: Duration) -> Self {
        self.timeout = timeout;
        self
    }

    pub fn template(&self) -> &str {
        &self.template
    }
}

impl Codec for SubprocessCodec {
    fn apply(&self, x: &ImageBuffer) -> Result<ImageBuffer, CodecError> {
        run_pgm_command(&self.template, x, &[], self.workdir.as_deref(), self.timeout)
    }

    fn descriptor(&self) -> String {
        format!("subprocess({})", self.template)
    }
}
