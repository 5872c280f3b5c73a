use std::fs;
use std::io::{BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use nalgebra::{DMatrix, DVector};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::graph::{hex_digest, Graph, LaplacianVariant};
use crate::spectral::Spectrum;

/// Write the edge list as CSV `i,j,weight` with 1-based indices.
pub fn write_edge_list(path: &Path, graph: &Graph) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    w.write_record(["i", "j", "weight"]).map_err(csv_err)?;
    for (i, j, weight) in graph.edges() {
        w.write_record(&[i.to_string(), j.to_string(), weight.to_string()])
            .map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

/// Read an edge-list CSV. The vertex count is the largest index mentioned.
pub fn read_edge_list(path: &Path) -> Result<Graph> {
    let mut reader = csv::Reader::from_path(path).map_err(csv_err)?;
    let mut edges = Vec::new();
    let mut n = 0usize;
    for record in reader.records() {
        let record = record.map_err(csv_err)?;
        if record.len() < 3 {
            return Err(Error::Parse(format!(
                "edge list rows need 3 columns, got {}",
                record.len()
            )));
        }
        let i: usize = parse_field(&record[0], "i")?;
        let j: usize = parse_field(&record[1], "j")?;
        let weight: f64 = parse_field(&record[2], "weight")?;
        n = n.max(i).max(j);
        edges.push((i, j, weight));
    }
    Graph::from_edges(&edges, n)
}

/// Coordinate dump for geometric graphs: `vertex,x,y[,z]`.
pub fn write_coordinates(path: &Path, graph: &Graph) -> Result<()> {
    let coords = graph.coordinates();
    if coords.is_empty() {
        return Err(Error::Parse("graph has no coordinates".into()));
    }
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    let dim = coords[0].len();
    let mut header = vec!["vertex".to_string(), "x".to_string(), "y".to_string()];
    if dim == 3 {
        header.push("z".to_string());
    }
    w.write_record(&header).map_err(csv_err)?;
    for (v, row) in coords.iter().enumerate() {
        let mut record = vec![(v + 1).to_string()];
        record.extend(row.iter().map(|c| c.to_string()));
        w.write_record(&record).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

/// Signal CSV `vertex,value`, 1-based vertices, one row per vertex.
pub fn write_signal(path: &Path, values: &[f64]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    w.write_record(["vertex", "value"]).map_err(csv_err)?;
    for (v, x) in values.iter().enumerate() {
        w.write_record(&[(v + 1).to_string(), x.to_string()])
            .map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_signal(path: &Path) -> Result<Vec<f64>> {
    let columns = read_numeric_csv(path)?;
    if columns.1.len() < 2 {
        return Err(Error::Parse("signal CSV needs vertex,value columns".into()));
    }
    let vertices = &columns.1[0];
    let values = &columns.1[1];
    let n = vertices.len();
    let mut out = vec![0.0; n];
    for (row, (&v, &x)) in vertices.iter().zip(values.iter()).enumerate() {
        let idx = v as usize;
        if idx < 1 || idx > n {
            return Err(Error::Parse(format!("row {row}: vertex {v} out of range")));
        }
        out[idx - 1] = x;
    }
    Ok(out)
}

/// Read any headed CSV of numbers; returns (header, column vectors).
pub fn read_numeric_csv(path: &Path) -> Result<(Vec<String>, Vec<Vec<f64>>)> {
    let mut reader = csv::Reader::from_path(path).map_err(csv_err)?;
    let header: Vec<String> = reader
        .headers()
        .map_err(csv_err)?
        .iter()
        .map(|s| s.to_string())
        .collect();
    let mut columns: Vec<Vec<f64>> = vec![Vec::new(); header.len()];
    for record in reader.records() {
        let record = record.map_err(csv_err)?;
        for (c, field) in record.iter().enumerate() {
            columns[c].push(parse_field(field, &header[c])?);
        }
    }
    Ok((header, columns))
}

/// Eigenvalue export `l,lambda`.
pub fn write_spectrum_csv(path: &Path, spectrum: &Spectrum) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    w.write_record(["l", "lambda"]).map_err(csv_err)?;
    for (l, lam) in spectrum.eigenvalues().iter().enumerate() {
        w.write_record(&[l.to_string(), lam.to_string()])
            .map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

/// Row-major little-endian f64 dump of the eigenvector matrix.
pub fn write_eigenvectors_binary(path: &Path, spectrum: &Spectrum) -> Result<()> {
    let mut w = BufWriter::new(fs::File::create(path)?);
    let chi = spectrum.eigenvectors();
    for row in 0..chi.nrows() {
        for col in 0..chi.ncols() {
            w.write_all(&chi[(row, col)].to_le_bytes())?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Write an N x N nonnegative matrix as CSV, one row per vertex.
pub fn write_matrix_csv(path: &Path, m: &DMatrix<f64>) -> Result<()> {
    let mut w = BufWriter::new(fs::File::create(path)?);
    for i in 0..m.nrows() {
        let row: Vec<String> = (0..m.ncols()).map(|j| m[(i, j)].to_string()).collect();
        writeln!(w, "{}", row.join(","))?;
    }
    w.flush()?;
    Ok(())
}

/// 8-bit binary PGM (P5) with entries scaled by the matrix maximum.
pub fn write_pgm(path: &Path, m: &DMatrix<f64>) -> Result<()> {
    let (rows, cols) = (m.nrows(), m.ncols());
    let max = m.iter().copied().fold(0.0f64, f64::max);
    let mut w = BufWriter::new(fs::File::create(path)?);
    write!(w, "P5\n{cols} {rows}\n255\n")?;
    let mut bytes = Vec::with_capacity(rows * cols);
    for i in 0..rows {
        for j in 0..cols {
            let v = if max > 0.0 {
                (255.0 * m[(i, j)] / max).floor().clamp(0.0, 255.0) as u8
            } else {
                0
            };
            bytes.push(v);
        }
    }
    w.write_all(&bytes)?;
    w.flush()?;
    Ok(())
}

const CACHE_MAGIC: &[u8; 8] = b"VFSPEC1\n";

/// Cache key from raw edge-list file bytes plus the Laplacian variant flag.
pub fn cache_key_from_bytes(edge_list_bytes: &[u8], variant: LaplacianVariant) -> String {
    let mut hasher = Sha256::new();
    hasher.update(edge_list_bytes);
    hasher.update(variant.name().as_bytes());
    hex_digest(hasher)
}

/// Cache key from graph content plus the variant flag.
pub fn cache_key_from_graph(graph: &Graph, variant: LaplacianVariant) -> String {
    let mut hasher = Sha256::new();
    hasher.update(graph.content_hash().as_bytes());
    hasher.update(variant.name().as_bytes());
    hex_digest(hasher)
}

fn cache_path(dir: &Path, key: &str) -> PathBuf {
    dir.join(format!("{key}.spectrum"))
}

/// Persist a spectrum under `dir/<key>.spectrum`.
pub fn write_spectrum_cache(dir: &Path, key: &str, spectrum: &Spectrum) -> Result<PathBuf> {
    fs::create_dir_all(dir)?;
    let path = cache_path(dir, key);
    let mut w = BufWriter::new(fs::File::create(&path)?);
    w.write_all(CACHE_MAGIC)?;
    let n = spectrum.n() as u64;
    w.write_all(&n.to_le_bytes())?;
    let variant_flag: u8 = match spectrum.variant() {
        LaplacianVariant::Combinatorial => 0,
        LaplacianVariant::Normalized => 1,
    };
    w.write_all(&[variant_flag])?;
    let degrees = spectrum.degrees();
    w.write_all(&[degrees.is_some() as u8])?;
    let hash = spectrum.source_hash().as_bytes();
    w.write_all(&(hash.len() as u64).to_le_bytes())?;
    w.write_all(hash)?;
    for v in spectrum.eigenvalues().iter() {
        w.write_all(&v.to_le_bytes())?;
    }
    let chi = spectrum.eigenvectors();
    for row in 0..chi.nrows() {
        for col in 0..chi.ncols() {
            w.write_all(&chi[(row, col)].to_le_bytes())?;
        }
    }
    if let Some(d) = degrees {
        for v in d.iter() {
            w.write_all(&v.to_le_bytes())?;
        }
    }
    w.flush()?;
    Ok(path)
}

/// Load a cached spectrum if present.
pub fn read_spectrum_cache(dir: &Path, key: &str) -> Result<Option<Spectrum>> {
    let path = cache_path(dir, key);
    if !path.exists() {
        return Ok(None);
    }
    let mut bytes = Vec::new();
    fs::File::open(&path)?.read_to_end(&mut bytes)?;
    let parse = || -> Option<Spectrum> {
        let mut at = 0usize;
        let take = |at: &mut usize, len: usize| -> Option<&[u8]> {
            let s = bytes.get(*at..*at + len)?;
            *at += len;
            Some(s)
        };
        if take(&mut at, 8)? != CACHE_MAGIC {
            return None;
        }
        let n = u64::from_le_bytes(take(&mut at, 8)?.try_into().ok()?) as usize;
        let variant = match take(&mut at, 1)?[0] {
            0 => LaplacianVariant::Combinatorial,
            1 => LaplacianVariant::Normalized,
            _ => return None,
        };
        let has_degrees = take(&mut at, 1)?[0] == 1;
        let hash_len = u64::from_le_bytes(take(&mut at, 8)?.try_into().ok()?) as usize;
        let source_hash = String::from_utf8(take(&mut at, hash_len)?.to_vec()).ok()?;
        let read_f64s = |at: &mut usize, count: usize| -> Option<Vec<f64>> {
            let mut out = Vec::with_capacity(count);
            for _ in 0..count {
                out.push(f64::from_le_bytes(take(at, 8)?.try_into().ok()?));
            }
            Some(out)
        };
        let eigenvalues = DVector::from_vec(read_f64s(&mut at, n)?);
        let flat = read_f64s(&mut at, n * n)?;
        let eigenvectors = DMatrix::from_row_iterator(n, n, flat);
        let degrees = if has_degrees {
            Some(DVector::from_vec(read_f64s(&mut at, n)?))
        } else {
            None
        };
        Some(Spectrum::from_raw_parts(
            eigenvalues,
            eigenvectors,
            variant,
            source_hash,
            degrees,
        ))
    };
    match parse() {
        Some(s) => Ok(Some(s)),
        None => Err(Error::Parse(format!(
            "corrupt spectrum cache file {}",
            path.display()
        ))),
    }
}

fn csv_err(e: csv::Error) -> Error {
    Error::Parse(format!("csv: {e}"))
}

fn parse_field<T: std::str::FromStr>(field: &str, name: &str) -> Result<T> {
    field
        .trim()
        .parse::<T>()
        .map_err(|_| Error::Parse(format!("cannot parse {name} value {field:?}")))
}
