use std::fs;
use std::io::{Read, Write};
use std::path::PathBuf;

use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::Failure;

pub const TRACE_DIR_VAR: &str = "POLYVAL_TRACE_DIR";

pub fn read_input(path: &str) -> Result<Vec<u8>, Failure> {
    if path == "-" {
        let mut buf = Vec::new();
        std::io::stdin()
            .read_to_end(&mut buf)
            .map_err(|e| Failure::Input(format!("stdin: {e}")))?;
        return Ok(buf);
    }
    fs::read(path).map_err(|e| Failure::Input(format!("{path}: {e}")))
}

pub fn write_output(path: &str, bytes: &[u8]) -> Result<(), Failure> {
    let res = if path == "-" {
        let mut out = std::io::stdout().lock();
        out.write_all(bytes).and_then(|_| out.flush())
    } else {
        fs::write(path, bytes)
    };
    res.map_err(|e| Failure::Input(format!("{path}: {e}")))
}

/// One JSON document plus a trailing newline.
pub fn json_line(v: &Value) -> Vec<u8> {
    let mut bytes = serde_json::to_vec(v).expect("values always serialize");
    bytes.push(b'\n');
    bytes
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

fn trace_dir() -> PathBuf {
    std::env::var_os(TRACE_DIR_VAR).map_or_else(std::env::temp_dir, PathBuf::from)
}

/// Writes `doc` to `<trace dir>/<name>.json` and returns the path.
pub fn dump_trace(name: &str, doc: &Value) -> Result<PathBuf, String> {
    let dir = trace_dir();
    fs::create_dir_all(&dir).map_err(|e| format!("{}: {e}", dir.display()))?;
    let path = dir.join(format!("{name}.json"));
    let bytes = serde_json::to_vec_pretty(doc).expect("values always serialize");
    fs::write(&path, bytes).map_err(|e| format!("{}: {e}", path.display()))?;
    Ok(path)
}
