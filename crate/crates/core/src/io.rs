//! File formats: surface descriptors and OFF meshes in, CSV traces and
//! series in and out. Writers use [`fmt_f64`] so output is reproducible
//! byte for byte.

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Deserialize;

use crate::error::{Result, UbvpError};
use crate::format::fmt_f64;
use crate::geometry::{parse_off, Surface, SurfaceDescriptor, Vec3};

/// A surface from a JSON descriptor, or from an OFF mesh when the file
/// name ends in `.off`.
pub fn load_surface(path: &Path) -> Result<Surface> {
    if is_off(path) {
        return Surface::from_mesh(parse_off(&read_text(path)?)?);
    }
    read_surface_descriptor(path)?.build()
}

pub fn is_off(path: &Path) -> bool {
    path.extension().is_some_and(|e| e.eq_ignore_ascii_case("off"))
}

pub fn read_surface_descriptor(path: &Path) -> Result<SurfaceDescriptor> {
    let text = read_text(path)?;
    serde_json::from_str(&text).map_err(|e| UbvpError::Parse(format!("{}: {e}", path.display())))
}

/// `fs::read_to_string` with the path in the error message.
pub fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| UbvpError::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display()))))
}

fn read_rows<T: DeserializeOwned>(path: &Path, header: &[&str]) -> Result<Vec<T>> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| csv_err(path, e))?;
    let got: Vec<String> = reader.headers().map_err(|e| csv_err(path, e))?.iter().map(str::to_string).collect();
    if got != header {
        return Err(UbvpError::Parse(format!(
            "{}: expected header {:?}, found {:?}",
            path.display(),
            header.join(","),
            got.join(",")
        )));
    }
    reader
        .deserialize()
        .map(|row| row.map_err(|e| csv_err(path, e)))
        .collect()
}

fn csv_err(path: &Path, e: csv::Error) -> UbvpError {
    match e.kind() {
        csv::ErrorKind::Io(_) => match e.into_kind() {
            csv::ErrorKind::Io(io) => UbvpError::Io(std::io::Error::new(io.kind(), format!("{}: {io}", path.display()))),
            _ => unreachable!(),
        },
        _ => UbvpError::Parse(format!("{}: {e}", path.display())),
    }
}

#[derive(Deserialize)]
struct TraceRow {
    index: usize,
    x: f64,
    y: f64,
    z: f64,
    value: f64,
}

/// Reads `index,x,y,z,value` rows in surface node order. Node positions
/// must match the surface.
pub fn read_trace_csv(path: &Path, surface: &Surface) -> Result<Vec<f64>> {
    let rows: Vec<TraceRow> = read_rows(path, &["index", "x", "y", "z", "value"])?;
    if rows.len() != surface.len() {
        return Err(UbvpError::invalid(format!(
            "{}: {} rows for a surface with {} nodes",
            path.display(),
            rows.len(),
            surface.len()
        )));
    }
    let tol = 1e-8 * (1.0 + surface.diameter());
    for (i, (row, node)) in rows.iter().zip(surface.nodes()).enumerate() {
        if row.index != i {
            return Err(UbvpError::invalid(format!("{}: row {i} has index {}", path.display(), row.index)));
        }
        if (Vec3::new(row.x, row.y, row.z) - node).norm() > tol {
            return Err(UbvpError::invalid(format!(
                "{}: row {i} is at ({}, {}, {}), surface node is at ({}, {}, {})",
                path.display(),
                row.x,
                row.y,
                row.z,
                node.x,
                node.y,
                node.z
            )));
        }
        if !row.value.is_finite() {
            return Err(UbvpError::invalid(format!("{}: row {i} has a non-finite value", path.display())));
        }
    }
    Ok(rows.into_iter().map(|r| r.value).collect())
}

pub fn write_trace_csv(mut out: impl Write, surface: &Surface, values: &[f64]) -> Result<()> {
    if values.len() != surface.len() {
        return Err(UbvpError::invalid("trace length does not match the surface"));
    }
    writeln!(out, "index,x,y,z,value")?;
    for (i, (p, v)) in surface.nodes().iter().zip(values).enumerate() {
        writeln!(out, "{i},{},{},{},{}", fmt_f64(p.x), fmt_f64(p.y), fmt_f64(p.z), fmt_f64(*v))?;
    }
    Ok(())
}

/// Reads a two-column series with header `<key>,value`, e.g. `t,value`.
pub fn read_series_csv(path: &Path, key: &str) -> Result<(Vec<f64>, Vec<f64>)> {
    let rows: Vec<(f64, f64)> = read_rows(path, &[key, "value"])?;
    Ok(rows.into_iter().unzip())
}

pub fn write_series_csv(mut out: impl Write, key: &str, grid: &[f64], values: &[f64]) -> Result<()> {
    writeln!(out, "{key},value")?;
    for (g, v) in grid.iter().zip(values) {
        writeln!(out, "{},{}", fmt_f64(*g), fmt_f64(*v))?;
    }
    Ok(())
}

/// Reads points with header `x,y,z`.
pub fn read_points_csv(path: &Path) -> Result<Vec<Vec3>> {
    let rows: Vec<(f64, f64, f64)> = read_rows(path, &["x", "y", "z"])?;
    Ok(rows.into_iter().map(|(x, y, z)| Vec3::new(x, y, z)).collect())
}

/// Reads quarter-plane points with header `t,x`.
pub fn read_tx_points_csv(path: &Path) -> Result<Vec<(f64, f64)>> {
    read_rows(path, &["t", "x"])
}

/// Builds the content in memory and writes it in one call, creating
/// parent directories.
pub fn write_file(path: &Path, f: impl FnOnce(&mut Vec<u8>) -> Result<()>) -> Result<()> {
    let mut buf = Vec::new();
    f(&mut buf)?;
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            fs::create_dir_all(dir)?;
        }
    }
    fs::write(path, buf)?;
    Ok(())
}
