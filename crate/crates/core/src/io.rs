//! Binary containers for fields (`.fld`) and path ensembles (`.ens`).
//!
//! Both start with an 8-byte magic, a little-endian `u64` header length and a
//! JSON header, followed by little-endian `f64` payload.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{Arity, SpectralField, TimeField, TimeInterp};
use crate::grid::TorusGrid;
use crate::sde::PathEnsemble;

const FIELD_MAGIC: &[u8; 8] = b"ZVLFLD01";
const ENSEMBLE_MAGIC: &[u8; 8] = b"ZVLENS01";
const MAX_HEADER: u64 = 1 << 20;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FieldHeader {
    pub grid: TorusGrid,
    pub arity: Arity,
    pub interp: TimeInterp,
    /// Number of stored time slices, `K + 1`.
    pub slices: usize,
    pub components: usize,
    /// Free-form metadata carried along with the field.
    #[serde(default)]
    pub meta: serde_json::Value,
}

fn write_header<W: Write>(w: &mut W, magic: &[u8; 8], header: &impl Serialize) -> Result<()> {
    let json = serde_json::to_vec(header)?;
    w.write_all(magic)?;
    w.write_all(&(json.len() as u64).to_le_bytes())?;
    w.write_all(&json)?;
    Ok(())
}

fn read_header<R: Read, H: for<'de> Deserialize<'de>>(r: &mut R, magic: &[u8; 8]) -> Result<H> {
    let mut m = [0u8; 8];
    r.read_exact(&mut m)?;
    if &m != magic {
        return Err(Error::Format(format!("bad magic {:?}", String::from_utf8_lossy(&m))));
    }
    let mut len = [0u8; 8];
    r.read_exact(&mut len)?;
    let len = u64::from_le_bytes(len);
    if len > MAX_HEADER {
        return Err(Error::Format(format!("header of {len} bytes is implausibly large")));
    }
    let mut json = vec![0u8; len as usize];
    r.read_exact(&mut json)?;
    Ok(serde_json::from_slice(&json)?)
}

fn write_f64s<W: Write>(w: &mut W, data: impl IntoIterator<Item = f64>) -> Result<()> {
    for v in data {
        w.write_all(&v.to_le_bytes())?;
    }
    Ok(())
}

fn read_f64s<R: Read>(r: &mut R, count: usize) -> Result<Vec<f64>> {
    let mut bytes = vec![0u8; count * 8];
    r.read_exact(&mut bytes).map_err(|e| match e.kind() {
        std::io::ErrorKind::UnexpectedEof => Error::Format("payload shorter than header announces".into()),
        _ => Error::Io(e),
    })?;
    Ok(bytes.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().expect("chunk of 8"))).collect())
}

/// Writes coefficients slice by slice, component by component, as
/// `(re, im)` pairs in the transform's frequency order.
pub fn encode_field<W: Write>(w: &mut W, field: &TimeField, meta: serde_json::Value) -> Result<()> {
    let header = FieldHeader {
        grid: *field.grid(),
        arity: field.arity(),
        interp: field.interp(),
        slices: field.slices().len(),
        components: field.slice(0).num_components(),
        meta,
    };
    write_header(w, FIELD_MAGIC, &header)?;
    for s in field.slices() {
        for c in 0..header.components {
            write_f64s(w, s.coeffs(c).iter().flat_map(|z| [z.re, z.im]))?;
        }
    }
    Ok(())
}

pub fn decode_field<R: Read>(r: &mut R) -> Result<(TimeField, FieldHeader)> {
    let header: FieldHeader = read_header(r, FIELD_MAGIC)?;
    let grid = header.grid;
    TorusGrid::new(grid.dim, grid.n, grid.period, grid.horizon, grid.steps)
        .map_err(|e| Error::Format(format!("invalid grid in header: {e}")))?;
    if header.components != header.arity.components(grid.dim) || header.slices != grid.steps + 1 {
        return Err(Error::Format("header shape is inconsistent".into()));
    }
    let mut slices = Vec::with_capacity(header.slices);
    for _ in 0..header.slices {
        let mut coeffs = Vec::with_capacity(header.components);
        for _ in 0..header.components {
            let raw = read_f64s(r, 2 * grid.len())?;
            coeffs.push(raw.chunks_exact(2).map(|p| Complex64::new(p[0], p[1])).collect());
        }
        slices.push(SpectralField::from_hermitian_coeffs(grid, header.arity, coeffs));
    }
    let mut rest = [0u8; 1];
    if r.read(&mut rest)? != 0 {
        return Err(Error::Format("trailing bytes after field payload".into()));
    }
    Ok((TimeField::new(slices, header.interp)?, header))
}

pub fn write_field(path: &Path, field: &TimeField, meta: serde_json::Value) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    encode_field(&mut w, field, meta)?;
    w.flush()?;
    Ok(())
}

pub fn read_field(path: &Path) -> Result<(TimeField, FieldHeader)> {
    decode_field(&mut BufReader::new(File::open(path)?))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ArrayEntry {
    pub name: String,
    pub shape: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnsembleHeader {
    pub dim: usize,
    pub paths: usize,
    pub steps: usize,
    pub horizon: f64,
    pub seed: u64,
    pub boundary_fraction: f64,
    /// Arrays in payload order, path-major.
    pub arrays: Vec<ArrayEntry>,
    #[serde(default)]
    pub meta: serde_json::Value,
}

pub fn encode_ensemble<W: Write>(w: &mut W, ens: &PathEnsemble, meta: serde_json::Value) -> Result<()> {
    let (m, s, d) = (ens.paths, ens.steps, ens.dim);
    let mut arrays = Vec::new();
    let mut payload: Vec<&[f64]> = Vec::new();
    for (name, data, steps) in [("x", &ens.x, s + 1), ("y", &ens.y, s + 1), ("dw", &ens.dw, s)] {
        if let Some(v) = data {
            arrays.push(ArrayEntry { name: name.into(), shape: vec![m, steps, d] });
            payload.push(v);
        }
    }
    let header = EnsembleHeader {
        dim: d,
        paths: m,
        steps: s,
        horizon: ens.horizon,
        seed: ens.seed,
        boundary_fraction: ens.boundary_fraction,
        arrays,
        meta,
    };
    write_header(w, ENSEMBLE_MAGIC, &header)?;
    for p in payload {
        write_f64s(w, p.iter().copied())?;
    }
    Ok(())
}

pub fn decode_ensemble<R: Read>(r: &mut R) -> Result<(PathEnsemble, EnsembleHeader)> {
    let header: EnsembleHeader = read_header(r, ENSEMBLE_MAGIC)?;
    let mut ens = PathEnsemble {
        dim: header.dim,
        paths: header.paths,
        steps: header.steps,
        horizon: header.horizon,
        seed: header.seed,
        x: None,
        y: None,
        dw: None,
        boundary_fraction: header.boundary_fraction,
    };
    for a in &header.arrays {
        let steps = if a.name == "dw" { header.steps } else { header.steps + 1 };
        if a.shape != [header.paths, steps, header.dim] {
            return Err(Error::Format(format!("array {} has shape {:?}", a.name, a.shape)));
        }
        let data = Some(read_f64s(r, a.shape.iter().product())?);
        match a.name.as_str() {
            "x" => ens.x = data,
            "y" => ens.y = data,
            "dw" => ens.dw = data,
            other => return Err(Error::Format(format!("unknown array {other}"))),
        }
    }
    Ok((ens, header))
}

pub fn write_ensemble(path: &Path, ens: &PathEnsemble, meta: serde_json::Value) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    encode_ensemble(&mut w, ens, meta)?;
    w.flush()?;
    Ok(())
}

pub fn read_ensemble(path: &Path) -> Result<(PathEnsemble, EnsembleHeader)> {
    decode_ensemble(&mut BufReader::new(File::open(path)?))
}

/// CSV of the positions of every path at grid step `k`.
pub fn write_marginal_csv<W: Write>(w: &mut W, ens: &PathEnsemble, k: usize) -> Result<()> {
    let col = ens.x_column(k)?;
    let names: Vec<String> = (0..ens.dim).map(|a| format!("x{a}")).collect();
    writeln!(w, "path,t,{}", names.join(","))?;
    let t = ens.time(k);
    for (i, p) in col.iter().enumerate() {
        let coords: Vec<String> = p[..ens.dim].iter().map(|v| format!("{v:e}")).collect();
        writeln!(w, "{i},{t:e},{}", coords.join(","))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn field_round_trip_in_memory() {
        let g = TorusGrid::line(16, 3).unwrap();
        let f = TimeField::from_fn(g, |t, x| (x[0] + t).sin());
        let mut buf = Vec::new();
        encode_field(&mut buf, &f, serde_json::json!({"role": "test"})).unwrap();
        let (back, h) = decode_field(&mut buf.as_slice()).unwrap();
        assert_eq!(h.meta["role"], "test");
        for (a, b) in back.slices().iter().zip(f.slices()) {
            assert_eq!(a.coeffs(0), b.coeffs(0));
        }
    }

    #[test]
    fn truncated_field_is_rejected() {
        let g = TorusGrid::line(16, 1).unwrap();
        let f = TimeField::from_fn(g, |_, x| x[0].cos());
        let mut buf = Vec::new();
        encode_field(&mut buf, &f, serde_json::Value::Null).unwrap();
        buf.truncate(buf.len() - 8);
        assert!(matches!(decode_field(&mut buf.as_slice()), Err(Error::Format(_))));
        assert!(matches!(decode_field(&mut &b"NOTAFILE"[..]), Err(Error::Format(_))));
    }
}
