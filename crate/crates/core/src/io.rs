//! File formats: sample paths (CSV or raw little-endian `f64`) with a JSON
//! metadata sidecar, coefficient dumps and wavelet-variance tables.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matfun::SymMatrix;
use crate::model::ParamsFile;
use crate::synth::{PathKind, SamplePath};
use crate::wavelet::{Coefficients, OctaveVariance, WaveletVariance};

/// Sidecar stored next to every path file as `<file>.json`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PathMeta {
    pub n: usize,
    pub len: usize,
    pub seed: u64,
    pub kind: PathKind,
    pub params: Option<ParamsFile>,
}

pub fn sidecar(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".json");
    PathBuf::from(s)
}

fn parse_err(path: &Path, e: impl std::fmt::Display) -> Error {
    Error::Parse(format!("{}: {e}", path.display()))
}

fn is_binary(path: &Path) -> bool {
    path.extension().is_some_and(|e| e == "bin")
}

/// Writes `path` as CSV (`t,x1,...,xn`) or, for a `.bin` extension, as
/// row-major little-endian `f64`. The sidecar is always written.
pub fn write_path(file: &Path, path: &SamplePath, params: Option<&ParamsFile>) -> Result<()> {
    if is_binary(file) {
        let bytes: Vec<u8> = path.values.iter().flat_map(|v| v.to_le_bytes()).collect();
        fs::write(file, bytes)?;
    } else {
        let mut w = csv::Writer::from_path(file).map_err(|e| Error::Io(e.to_string()))?;
        let header: Vec<String> = std::iter::once("t".to_string())
            .chain((1..=path.n).map(|c| format!("x{c}")))
            .collect();
        w.write_record(&header).map_err(|e| Error::Io(e.to_string()))?;
        for k in 0..path.len {
            let rec: Vec<String> = std::iter::once(k.to_string())
                .chain(path.row(k).iter().map(|v| format!("{v:e}")))
                .collect();
            w.write_record(&rec).map_err(|e| Error::Io(e.to_string()))?;
        }
        w.flush()?;
    }
    let meta = PathMeta {
        n: path.n,
        len: path.len,
        seed: path.seed,
        kind: path.kind,
        params: params.cloned(),
    };
    let json = serde_json::to_string_pretty(&meta).expect("metadata serializes");
    fs::write(sidecar(file), json)?;
    Ok(())
}

pub fn read_meta(file: &Path) -> Result<Option<PathMeta>> {
    let sc = sidecar(file);
    if !sc.exists() {
        return Ok(None);
    }
    let text = fs::read_to_string(&sc)?;
    serde_json::from_str(&text).map(Some).map_err(|e| parse_err(&sc, e))
}

/// Reads a path written by [`write_path`]. A CSV without sidecar is read as
/// a levels path with seed 0; a binary file needs its sidecar.
pub fn read_path(file: &Path) -> Result<(SamplePath, Option<PathMeta>)> {
    let meta = read_meta(file)?;
    if is_binary(file) {
        let m = meta.ok_or_else(|| parse_err(file, "binary paths need a metadata sidecar"))?;
        let bytes = fs::read(file)?;
        if bytes.len() != 8 * m.n * m.len {
            return Err(parse_err(
                file,
                format!("expected {} bytes for {} x {}, found {}", 8 * m.n * m.len, m.len, m.n, bytes.len()),
            ));
        }
        let values = bytes
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("chunk of 8")))
            .collect();
        let p = SamplePath::new(m.n, values, m.seed, m.kind)?;
        return Ok((p, Some(m)));
    }
    let mut r = csv::Reader::from_path(file).map_err(|e| parse_err(file, e))?;
    let n = r.headers().map_err(|e| parse_err(file, e))?.len().saturating_sub(1);
    if n == 0 {
        return Err(parse_err(file, "expected a header t,x1,...,xn"));
    }
    let mut values = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let rec = rec.map_err(|e| parse_err(file, e))?;
        for field in rec.iter().skip(1) {
            let v: f64 = field
                .trim()
                .parse()
                .map_err(|e| parse_err(file, format!("row {}: {e}", i + 1)))?;
            values.push(v);
        }
    }
    let (seed, kind) = meta.as_ref().map_or((0, PathKind::Levels), |m| (m.seed, m.kind));
    let p = SamplePath::new(n, values, seed, kind)?;
    if let Some(m) = &meta {
        if m.n != p.n || m.len != p.len {
            return Err(parse_err(file, "sidecar shape disagrees with the data"));
        }
    }
    Ok((p, meta))
}

/// Coefficients as `j,k,component,value` rows.
pub fn write_coeffs_csv(file: &Path, c: &Coefficients) -> Result<()> {
    let mut out = std::io::BufWriter::new(fs::File::create(file)?);
    writeln!(out, "j,k,component,value")?;
    for o in &c.octaves {
        for k in 0..o.count {
            for (comp, v) in o.row(k, c.n).iter().enumerate() {
                writeln!(out, "{},{},{},{:e}", o.j, k, comp + 1, v)?;
            }
        }
    }
    out.flush()?;
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OctaveVarianceRecord {
    pub j: u32,
    pub count: usize,
    /// Upper triangle in `vec_sym` order.
    pub w: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WaveletVarianceRecord {
    pub n: usize,
    pub octaves: Vec<OctaveVarianceRecord>,
}

impl From<&WaveletVariance> for WaveletVarianceRecord {
    fn from(wv: &WaveletVariance) -> Self {
        WaveletVarianceRecord {
            n: wv.n,
            octaves: wv
                .octaves
                .iter()
                .map(|o| OctaveVarianceRecord {
                    j: o.j,
                    count: o.count,
                    w: o.w.upper().to_vec(),
                })
                .collect(),
        }
    }
}

impl WaveletVarianceRecord {
    pub fn to_variance(&self) -> Result<WaveletVariance> {
        let octaves = self
            .octaves
            .iter()
            .map(|o| {
                Ok(OctaveVariance {
                    j: o.j,
                    count: o.count,
                    w: SymMatrix::from_upper(self.n, o.w.clone())?,
                })
            })
            .collect::<Result<_>>()?;
        Ok(WaveletVariance { n: self.n, octaves })
    }
}

pub fn write_json<T: Serialize>(file: &Path, value: &T) -> Result<()> {
    let s = serde_json::to_string_pretty(value).map_err(|e| Error::Io(e.to_string()))?;
    fs::write(file, s + "\n")?;
    Ok(())
}

pub fn read_json<T: serde::de::DeserializeOwned>(file: &Path) -> Result<T> {
    let s = fs::read_to_string(file)?;
    serde_json::from_str(&s).map_err(|e| parse_err(file, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> SamplePath {
        let v = vec![0.0, 0.0, 1.5, -2.25e-7, 3.0, 1e300];
        SamplePath::new(2, v, 42, PathKind::Levels).unwrap()
    }

    #[test]
    fn csv_round_trip_is_exact() {
        let dir = tempfile::tempdir().unwrap();
        let f = dir.path().join("p.csv");
        write_path(&f, &sample(), None).unwrap();
        let (p, m) = read_path(&f).unwrap();
        assert_eq!(p, sample());
        assert_eq!(m.unwrap().seed, 42);
        let head = fs::read_to_string(&f).unwrap();
        assert!(head.starts_with("t,x1,x2\n0,"));
    }

    #[test]
    fn binary_round_trip_is_exact() {
        let dir = tempfile::tempdir().unwrap();
        let f = dir.path().join("p.bin");
        write_path(&f, &sample(), None).unwrap();
        assert_eq!(fs::metadata(&f).unwrap().len(), 48);
        assert_eq!(read_path(&f).unwrap().0, sample());
        fs::remove_file(sidecar(&f)).unwrap();
        assert!(matches!(read_path(&f), Err(Error::Parse(_))));
    }

    #[test]
    fn bad_csv_is_a_parse_error() {
        let dir = tempfile::tempdir().unwrap();
        let f = dir.path().join("bad.csv");
        fs::write(&f, "t,x1\n0,abc\n").unwrap();
        assert!(matches!(read_path(&f), Err(Error::Parse(_))));
    }

    #[test]
    fn variance_record_round_trip() {
        let wv = WaveletVariance {
            n: 2,
            octaves: vec![OctaveVariance {
                j: 3,
                count: 17,
                w: SymMatrix::from_upper(2, vec![1.0, 0.25, 2.0]).unwrap(),
            }],
        };
        let rec = WaveletVarianceRecord::from(&wv);
        let s = serde_json::to_string(&rec).unwrap();
        let back: WaveletVarianceRecord = serde_json::from_str(&s).unwrap();
        assert_eq!(back.to_variance().unwrap(), wv);
    }
}
