use std::io::Write;
use std::process::{Command, Stdio};

/// Graphviz layout engine looked up on `PATH`.
pub const DEFAULT_RENDERER: &str = "dot";

#[derive(Debug, thiserror::Error)]
pub enum SvgError {
    #[error("SVG output requires the Graphviz `{renderer}` executable on PATH ({reason})")]
    MissingRenderer { renderer: String, reason: String },
    #[error("`{renderer}` failed with {status}: {stderr}")]
    RendererFailed {
        renderer: String,
        status: String,
        stderr: String,
    },
    #[error("running `{renderer}`: {source}")]
    Io { renderer: String, source: std::io::Error },
}

/// Pipes `dot_text` through `<renderer> -Tsvg` and returns its stdout.
pub fn render_svg(dot_text: &str, renderer: &str) -> Result<Vec<u8>, SvgError> {
    let program = which::which(renderer).map_err(|e| SvgError::MissingRenderer {
        renderer: renderer.to_string(),
        reason: e.to_string(),
    })?;
    let io_err = |source| SvgError::Io {
        renderer: renderer.to_string(),
        source,
    };
    let mut child = Command::new(program)
        .arg("-Tsvg")
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .map_err(io_err)?;
    let mut stdin = child.stdin.take().expect("stdin is piped");
    let input = dot_text.as_bytes().to_vec();
    let writer = std::thread::spawn(move || stdin.write_all(&input));
    let output = child.wait_with_output().map_err(io_err)?;
    // A renderer that exits early closes its stdin; its status explains why.
    let _ = writer.join();
    if !output.status.success() {
        return Err(SvgError::RendererFailed {
            renderer: renderer.to_string(),
            status: output.status.to_string(),
            stderr: String::from_utf8_lossy(&output.stderr).trim().to_string(),
        });
    }
    Ok(output.stdout)
}
