use std::path::{Path, PathBuf};

use ndarray::Array2;

use super::FeatureError;

/// File signature of a binary matrix dump.
pub const MATRIX_MAGIC: [u8; 4] = *b"IVXM";

/// Encodes `magic, rows (u32 LE), cols (u32 LE), row-major f32 LE`.
pub fn matrix_to_bytes(matrix: &Array2<f64>) -> Vec<u8> {
    let (rows, cols) = matrix.dim();
    let mut out = Vec::with_capacity(12 + 4 * rows * cols);
    out.extend_from_slice(&MATRIX_MAGIC);
    out.extend_from_slice(&(rows as u32).to_le_bytes());
    out.extend_from_slice(&(cols as u32).to_le_bytes());
    for v in matrix.iter() {
        out.extend_from_slice(&(*v as f32).to_le_bytes());
    }
    out
}

pub fn matrix_from_bytes(bytes: &[u8]) -> Result<Array2<f64>, FeatureError> {
    let bad = |m: String| FeatureError::BadDump(m);
    if bytes.len() < 12 {
        return Err(bad(format!("header needs 12 bytes, got {}", bytes.len())));
    }
    if bytes[..4] != MATRIX_MAGIC {
        return Err(bad("wrong magic".into()));
    }
    let word = |at: usize| u32::from_le_bytes(bytes[at..at + 4].try_into().unwrap()) as usize;
    let (rows, cols) = (word(4), word(8));
    let expected = rows
        .checked_mul(cols)
        .and_then(|n| n.checked_mul(4))
        .ok_or_else(|| bad("dimensions overflow".into()))?;
    if bytes.len() - 12 != expected {
        return Err(bad(format!("{rows}x{cols} needs {expected} data bytes, got {}", bytes.len() - 12)));
    }
    let data = bytes[12..]
        .chunks_exact(4)
        .map(|c| f64::from(f32::from_le_bytes(c.try_into().unwrap())))
        .collect();
    Ok(Array2::from_shape_vec((rows, cols), data).expect("length checked above"))
}

/// Path of the JSON metadata stored next to a dump.
pub fn sidecar_path(path: &Path) -> PathBuf {
    let mut name = path.as_os_str().to_owned();
    name.push(".json");
    PathBuf::from(name)
}

/// Writes the matrix and, next to it, `<path>.json` holding `metadata`.
pub fn write_matrix(path: impl AsRef<Path>, matrix: &Array2<f64>, metadata: &serde_json::Value) -> Result<(), FeatureError> {
    let path = path.as_ref();
    std::fs::write(path, matrix_to_bytes(matrix))?;
    let meta = serde_json::to_vec_pretty(metadata).map_err(|e| FeatureError::BadDump(e.to_string()))?;
    std::fs::write(sidecar_path(path), meta)?;
    Ok(())
}

pub fn read_matrix(path: impl AsRef<Path>) -> Result<Array2<f64>, FeatureError> {
    matrix_from_bytes(&std::fs::read(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let m = Array2::from_shape_fn((3, 5), |(i, j)| i as f64 * 0.5 - j as f64);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.bin");
        write_matrix(&path, &m, &serde_json::json!({"kind": "test"})).unwrap();
        assert_eq!(read_matrix(&path).unwrap(), m);
        let meta: serde_json::Value = serde_json::from_slice(&std::fs::read(sidecar_path(&path)).unwrap()).unwrap();
        assert_eq!(meta["kind"], "test");
    }

    #[test]
    fn header_layout() {
        let bytes = matrix_to_bytes(&Array2::from_elem((2, 1), 1.0));
        assert_eq!(&bytes[..4], b"IVXM");
        assert_eq!(&bytes[4..12], &[2, 0, 0, 0, 1, 0, 0, 0]);
        assert_eq!(&bytes[12..16], &1.0f32.to_le_bytes());
    }

    #[test]
    fn malformed_rejected() {
        assert!(matches!(matrix_from_bytes(b"IVX"), Err(FeatureError::BadDump(_))));
        assert!(matches!(matrix_from_bytes(b"NOPE\0\0\0\0\0\0\0\0"), Err(FeatureError::BadDump(_))));
        let mut truncated = matrix_to_bytes(&Array2::zeros((2, 2)));
        truncated.pop();
        assert!(matches!(matrix_from_bytes(&truncated), Err(FeatureError::BadDump(_))));
    }
}
