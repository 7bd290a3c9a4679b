//! Text checkpoint of named parameter tensors.
//!
//! Values are stored as hex-encoded IEEE 754 bit patterns so a save/load
//! cycle is bit-exact.

use std::fmt::Write as _;
use std::path::Path;

use ndarray::Array2;

use crate::error::{Error, Result};

const HEADER: &str = "amlnet-checkpoint v1";

pub fn save_named(path: &Path, tensors: &[(String, &Array2<f64>)]) -> Result<()> {
    let mut out = String::new();
    let _ = writeln!(out, "{}", HEADER);
    for (name, tensor) in tensors {
        let (rows, cols) = tensor.dim();
        let _ = writeln!(out, "tensor {} {} {}", name, rows, cols);
        for row in tensor.rows() {
            let line: Vec<String> = row
                .iter()
                .map(|v| format!("{:016x}", v.to_bits()))
                .collect();
            let _ = writeln!(out, "{}", line.join(" "));
        }
    }
    std::fs::write(path, out).map_err(|e| Error::io(path, e))
}

pub fn load_named(path: &Path) -> Result<Vec<(String, Array2<f64>)>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, line)) if line == HEADER => {}
        _ => return Err(Error::data(path, 1, "missing checkpoint header")),
    }

    let mut tensors = Vec::new();
    let mut pending: Option<(String, usize, usize, Vec<f64>)> = None;
    for (idx, line) in lines {
        let row = idx as u64 + 1;
        if let Some(rest) = line.strip_prefix("tensor ") {
            if let Some((name, rows, cols, values)) = pending.take() {
                tensors.push(finish_tensor(path, row, name, rows, cols, values)?);
            }
            let mut parts = rest.split_whitespace();
            let name = parts
                .next()
                .ok_or_else(|| Error::data(path, row, "tensor line missing name"))?;
            let rows: usize = parse_dim(parts.next(), path, row)?;
            let cols: usize = parse_dim(parts.next(), path, row)?;
            pending = Some((
                name.to_string(),
                rows,
                cols,
                Vec::with_capacity(rows * cols),
            ));
        } else if !line.trim().is_empty() {
            let slot = pending
                .as_mut()
                .ok_or_else(|| Error::data(path, row, "value line before tensor header"))?;
            for word in line.split_whitespace() {
                let bits = u64::from_str_radix(word, 16)
                    .map_err(|_| Error::data(path, row, format!("bad hex word {:?}", word)))?;
                slot.3.push(f64::from_bits(bits));
            }
        }
    }
    if let Some((name, rows, cols, values)) = pending {
        tensors.push(finish_tensor(path, 0, name, rows, cols, values)?);
    }
    Ok(tensors)
}

fn parse_dim(part: Option<&str>, path: &Path, row: u64) -> Result<usize> {
    part.and_then(|p| p.parse().ok())
        .ok_or_else(|| Error::data(path, row, "tensor line missing dimensions"))
}

fn finish_tensor(
    path: &Path,
    row: u64,
    name: String,
    rows: usize,
    cols: usize,
    values: Vec<f64>,
) -> Result<(String, Array2<f64>)> {
    if values.len() != rows * cols {
        return Err(Error::data(
            path,
            row,
            format!(
                "tensor {}: expected {} values, got {}",
                name,
                rows * cols,
                values.len()
            ),
        ));
    }
    let array = Array2::from_shape_vec((rows, cols), values).expect("checked length");
    Ok((name, array))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_is_bit_exact() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.ckpt");
        let a = Array2::from_shape_fn((3, 2), |(i, j)| (i as f64 + 0.1) / (j as f64 + 0.7));
        let b = Array2::from_shape_fn((1, 4), |(_, j)| -(j as f64) * std::f64::consts::PI);
        save_named(&path, &[("w0".into(), &a), ("b0".into(), &b)]).unwrap();
        let loaded = load_named(&path).unwrap();
        assert_eq!(loaded.len(), 2);
        assert_eq!(loaded[0].0, "w0");
        for (x, y) in a.iter().zip(loaded[0].1.iter()) {
            assert_eq!(x.to_bits(), y.to_bits());
        }
        for (x, y) in b.iter().zip(loaded[1].1.iter()) {
            assert_eq!(x.to_bits(), y.to_bits());
        }
    }

    #[test]
    fn rejects_truncated_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.ckpt");
        std::fs::write(
            &path,
            format!("{}\ntensor w 2 2\n{:016x}\n", HEADER, 1.0f64.to_bits()),
        )
        .unwrap();
        assert!(load_named(&path).is_err());
    }
}
