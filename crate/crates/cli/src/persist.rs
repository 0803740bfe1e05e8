//! On-disk decomposition results.
//!
//! A result directory holds `manifest.toml` (tolerances, bands, partition,
//! diagnostics, input digest), a copy of the input problem as `problem.toml`,
//! and four binary array files: `jm.bin` (the range `J_M`), `base.bin`,
//! `f.bin` and `frames.bin`.
//!
//! Every binary file starts with a 40-byte little-endian header:
//!
//! | offset | size | field                                  |
//! |--------|------|----------------------------------------|
//! | 0      | 8    | magic `HFBRARR\0`                      |
//! | 8      | 4    | format version (u32, currently 1)      |
//! | 12     | 4    | kind (u32, see [`Kind`])               |
//! | 16     | 8    | n_lambda (u64)                         |
//! | 24     | 8    | n_z (u64)                              |
//! | 32     | 8    | k (u64)                                |
//!
//! The payload is fiber after fiber, `m = 0..n_lambda`. Complex numbers are
//! two f64 (re, im) and matrices are column-major.
//! - `OperatorField`: the `d × d` matrix, `d = n_z k`.
//! - `RangeFunction` / `BaseRange`: rank `r` (u64), then the `d × r` (or
//!   `k × r`) orthonormal frame.
//! - `FrameFields`: count `c` (u64) once, then for each fiber the `c`
//!   vectors of length `d`.
//!
//! All values are stored bit-exactly, so a reloaded result reproduces the
//! computed diagnostics.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use hardyfiber::{
    c64, BaseRange, DecompositionResult, Diagnostics, DimensionPartition, FiberSubspace, FiberVector, FiberedField,
    FrameFields, Mat, MatRef, OperatorField, RangeFunction, TruncationLattice,
};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

pub const MAGIC: [u8; 8] = *b"HFBRARR\0";
pub const VERSION: u32 = 1;
pub const RESULT_SCHEMA: &str = "hardyfiber-result/1";
const HEADER_LEN: usize = 40;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u32)]
pub enum Kind {
    OperatorField = 1,
    RangeFunction = 2,
    BaseRange = 3,
    FrameFields = 4,
}

/// A decomposition together with the range it decomposes.
#[derive(Debug, Clone, PartialEq)]
pub struct StoredResult {
    pub jm: RangeFunction,
    pub result: DecompositionResult,
    pub inner_tol: f64,
    pub input_digest: String,
    pub tool_version: String,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Manifest {
    schema: String,
    tool_version: String,
    input_sha256: String,
    rank_tol: f64,
    orth_tol: f64,
    inner_tol: f64,
    bands: Vec<usize>,
    dims: Vec<usize>,
    diagnostics: BTreeMap<String, f64>,
    /// `[isometry, image, commutation, invariance]` per fiber.
    fiber_diagnostics: Vec<[f64; 4]>,
}

fn header(kind: Kind, lat: &TruncationLattice) -> Vec<u8> {
    let mut out = Vec::with_capacity(HEADER_LEN);
    out.extend_from_slice(&MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&(kind as u32).to_le_bytes());
    for v in [lat.n_lambda, lat.n_z, lat.k] {
        out.extend_from_slice(&(v as u64).to_le_bytes());
    }
    out
}

fn push_u64(out: &mut Vec<u8>, v: usize) {
    out.extend_from_slice(&(v as u64).to_le_bytes());
}

fn push_c64(out: &mut Vec<u8>, z: c64) {
    out.extend_from_slice(&z.re.to_le_bytes());
    out.extend_from_slice(&z.im.to_le_bytes());
}

fn push_matrix(out: &mut Vec<u8>, a: MatRef<'_, c64>) {
    for c in 0..a.ncols() {
        for r in 0..a.nrows() {
            push_c64(out, a[(r, c)]);
        }
    }
}

pub fn encode_operator_field(op: &OperatorField) -> Vec<u8> {
    let mut out = header(Kind::OperatorField, op.lattice());
    for a in op.ops() {
        push_matrix(&mut out, a.as_ref());
    }
    out
}

fn encode_subspaces(kind: Kind, lat: &TruncationLattice, fibers: &[FiberSubspace]) -> Vec<u8> {
    let mut out = header(kind, lat);
    for f in fibers {
        push_u64(&mut out, f.rank());
        push_matrix(&mut out, f.frame());
    }
    out
}

pub fn encode_range(range: &RangeFunction) -> Vec<u8> {
    encode_subspaces(Kind::RangeFunction, range.lattice(), range.fibers())
}

pub fn encode_base(base: &BaseRange) -> Vec<u8> {
    encode_subspaces(Kind::BaseRange, base.lattice(), base.fibers())
}

pub fn encode_frames(lat: &TruncationLattice, frames: &FrameFields) -> Vec<u8> {
    let mut out = header(Kind::FrameFields, lat);
    push_u64(&mut out, frames.phis.len());
    for m in 0..lat.n_lambda {
        for phi in &frames.phis {
            for &z in phi.fiber(m).coeffs() {
                push_c64(&mut out, z);
            }
        }
    }
    out
}

/// Cursor over one binary file, reporting truncation against its path.
struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
    path: &'a Path,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> CliResult<&'a [u8]> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.bytes.len());
        let end = end.ok_or_else(|| CliError::format(self.path, format!("truncated at byte {}", self.pos)))?;
        let s = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u32(&mut self) -> CliResult<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().expect("4 bytes")))
    }

    fn u64(&mut self) -> CliResult<usize> {
        let v = u64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes"));
        usize::try_from(v).map_err(|_| CliError::format(self.path, format!("count {v} too large")))
    }

    fn f64(&mut self) -> CliResult<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }

    fn c64(&mut self) -> CliResult<c64> {
        Ok(c64::new(self.f64()?, self.f64()?))
    }

    fn matrix(&mut self, rows: usize, cols: usize) -> CliResult<Mat<c64>> {
        let mut a = Mat::<c64>::zeros(rows, cols);
        for c in 0..cols {
            for r in 0..rows {
                a[(r, c)] = self.c64()?;
            }
        }
        Ok(a)
    }

    fn header(&mut self, kind: Kind, lat: &TruncationLattice) -> CliResult<()> {
        if self.take(8)? != MAGIC {
            return Err(CliError::format(self.path, "bad magic"));
        }
        let version = self.u32()?;
        if version != VERSION {
            return Err(CliError::format(self.path, format!("unsupported version {version}")));
        }
        let found = self.u32()?;
        if found != kind as u32 {
            return Err(CliError::format(self.path, format!("kind {found}, expected {}", kind as u32)));
        }
        let shape = [self.u64()?, self.u64()?, self.u64()?];
        if shape != [lat.n_lambda, lat.n_z, lat.k] {
            return Err(CliError::format(
                self.path,
                format!("shape {shape:?} differs from the manifest lattice ({}, {}, {})", lat.n_lambda, lat.n_z, lat.k),
            ));
        }
        Ok(())
    }

    fn finish(&self) -> CliResult<()> {
        if self.pos != self.bytes.len() {
            return Err(CliError::format(self.path, format!("{} trailing bytes", self.bytes.len() - self.pos)));
        }
        Ok(())
    }
}

/// Reads the lattice shape `(n_lambda, n_z, k)` from a binary header.
fn read_shape(bytes: &[u8], path: &Path) -> CliResult<(usize, usize, usize)> {
    let mut r = Reader { bytes, pos: 0, path };
    if r.take(8)? != MAGIC {
        return Err(CliError::format(path, "bad magic"));
    }
    r.take(8)?;
    Ok((r.u64()?, r.u64()?, r.u64()?))
}

pub fn decode_operator_field(bytes: &[u8], path: &Path, lat: &TruncationLattice) -> CliResult<OperatorField> {
    let mut r = Reader { bytes, pos: 0, path };
    r.header(Kind::OperatorField, lat)?;
    let d = lat.ambient();
    let ops = (0..lat.n_lambda).map(|_| r.matrix(d, d)).collect::<CliResult<Vec<_>>>()?;
    r.finish()?;
    Ok(OperatorField::from_ops(*lat, ops)?)
}

fn decode_subspaces(bytes: &[u8], path: &Path, kind: Kind, lat: &TruncationLattice, ambient: usize) -> CliResult<Vec<FiberSubspace>> {
    let mut r = Reader { bytes, pos: 0, path };
    r.header(kind, lat)?;
    let mut fibers = Vec::with_capacity(lat.n_lambda);
    for m in 0..lat.n_lambda {
        let rank = r.u64()?;
        if rank > ambient {
            return Err(CliError::format(path, format!("fiber {m}: rank {rank} exceeds ambient {ambient}")));
        }
        let frame = r.matrix(ambient, rank)?;
        fibers.push(FiberSubspace::from_frame(frame, lat.orth_tol).map_err(|e| CliError::format(path, format!("fiber {m}: {e}")))?);
    }
    r.finish()?;
    Ok(fibers)
}

pub fn decode_range(bytes: &[u8], path: &Path, lat: &TruncationLattice) -> CliResult<RangeFunction> {
    Ok(RangeFunction::from_fibers(*lat, decode_subspaces(bytes, path, Kind::RangeFunction, lat, lat.ambient())?)?)
}

pub fn decode_base(bytes: &[u8], path: &Path, lat: &TruncationLattice) -> CliResult<BaseRange> {
    Ok(BaseRange::from_fibers(*lat, decode_subspaces(bytes, path, Kind::BaseRange, lat, lat.k)?)?)
}

pub fn decode_frames(bytes: &[u8], path: &Path, lat: &TruncationLattice, dims: &[usize]) -> CliResult<FrameFields> {
    let mut r = Reader { bytes, pos: 0, path };
    r.header(Kind::FrameFields, lat)?;
    let count = r.u64()?;
    let d = lat.ambient();
    let mut per_phi: Vec<Vec<FiberVector>> = vec![Vec::with_capacity(lat.n_lambda); count];
    for _ in 0..lat.n_lambda {
        for fibers in per_phi.iter_mut() {
            let coeffs = (0..d).map(|_| r.c64()).collect::<CliResult<Vec<_>>>()?;
            fibers.push(FiberVector::from_coeffs(lat.n_z, lat.k, coeffs));
        }
    }
    r.finish()?;
    let phis = per_phi.into_iter().map(|f| FiberedField::from_fibers(*lat, f)).collect::<Result<Vec<_>, _>>()?;
    Ok(FrameFields { phis, partition: DimensionPartition::from_dims(dims.to_vec()) })
}

fn write(path: PathBuf, bytes: &[u8]) -> CliResult<()> {
    fs::write(&path, bytes).map_err(|e| CliError::io(path, e))
}

fn read(path: PathBuf) -> CliResult<(Vec<u8>, PathBuf)> {
    let bytes = fs::read(&path).map_err(|e| CliError::io(&path, e))?;
    Ok((bytes, path))
}

/// Writes a result directory (created if missing).
pub fn save_result(dir: &Path, stored: &StoredResult, problem_source: &str) -> CliResult<()> {
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    let res = &stored.result;
    let lat = res.lattice();
    let manifest = Manifest {
        schema: RESULT_SCHEMA.to_string(),
        tool_version: stored.tool_version.clone(),
        input_sha256: stored.input_digest.clone(),
        rank_tol: lat.rank_tol,
        orth_tol: lat.orth_tol,
        inner_tol: stored.inner_tol,
        bands: res.bands.clone(),
        dims: res.partition.dims().to_vec(),
        diagnostics: res.diagnostics.entries().iter().map(|&(k, v)| (k.to_string(), v)).collect(),
        fiber_diagnostics: res.fiber_diagnostics.iter().map(Diagnostics::values).collect(),
    };
    let text = toml::to_string(&manifest).map_err(|e| CliError::format(dir, e.to_string()))?;
    write(dir.join("manifest.toml"), text.as_bytes())?;
    write(dir.join("problem.toml"), problem_source.as_bytes())?;
    write(dir.join("jm.bin"), &encode_range(&stored.jm))?;
    write(dir.join("base.bin"), &encode_base(&res.base))?;
    write(dir.join("f.bin"), &encode_operator_field(&res.f))?;
    write(dir.join("frames.bin"), &encode_frames(lat, &res.frames))?;
    Ok(())
}

/// Reads a result directory written by [`save_result`].
pub fn load_result(dir: &Path) -> CliResult<StoredResult> {
    let manifest_path = dir.join("manifest.toml");
    let text = fs::read_to_string(&manifest_path).map_err(|e| CliError::io(&manifest_path, e))?;
    let manifest: Manifest = toml::from_str(&text).map_err(|e| CliError::format(&manifest_path, e.message().to_string()))?;
    if manifest.schema != RESULT_SCHEMA {
        return Err(CliError::format(&manifest_path, format!("unsupported schema {:?}", manifest.schema)));
    }

    let (f_bytes, f_path) = read(dir.join("f.bin"))?;
    let (n_lambda, n_z, k) = read_shape(&f_bytes, &f_path)?;
    let lat = TruncationLattice::with_tolerances(n_lambda, n_z, k, manifest.rank_tol, manifest.orth_tol)?;
    for (name, len) in [("bands", manifest.bands.len()), ("dims", manifest.dims.len()), ("fiber_diagnostics", manifest.fiber_diagnostics.len())] {
        if len != n_lambda {
            return Err(CliError::format(&manifest_path, format!("{name} has {len} entries for {n_lambda} fibers")));
        }
    }

    let f = decode_operator_field(&f_bytes, &f_path, &lat)?;
    let (bytes, path) = read(dir.join("jm.bin"))?;
    let jm = decode_range(&bytes, &path, &lat)?;
    let (bytes, path) = read(dir.join("base.bin"))?;
    let base = decode_base(&bytes, &path, &lat)?;
    let (bytes, path) = read(dir.join("frames.bin"))?;
    let frames = decode_frames(&bytes, &path, &lat, &manifest.dims)?;

    let fiber_diagnostics: Vec<Diagnostics> = manifest.fiber_diagnostics.iter().map(|v| Diagnostics::from_values(*v)).collect();
    let diagnostics = hardyfiber::factorization::merge_all(&fiber_diagnostics);
    let result = DecompositionResult {
        base,
        f,
        partition: DimensionPartition::from_dims(manifest.dims.clone()),
        frames,
        bands: manifest.bands,
        diagnostics,
        fiber_diagnostics,
    };
    Ok(StoredResult {
        jm,
        result,
        inner_tol: manifest.inner_tol,
        input_digest: manifest.input_sha256,
        tool_version: manifest.tool_version,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use hardyfiber::factorization::decompose;
    use hardyfiber::field::eval_field;
    use hardyfiber::fixtures;
    use hardyfiber::range::range_from_generators;

    fn stored(seed: u64) -> StoredResult {
        let lat = TruncationLattice::new(4, 12, 2).unwrap();
        let gens: Vec<_> = fixtures::random_problem(seed, &lat).iter().map(|p| eval_field(p, &lat).unwrap()).collect();
        StoredResult {
            jm: range_from_generators(&gens, &lat).unwrap(),
            result: decompose(&gens, &lat).unwrap(),
            inner_tol: 1e-6,
            input_digest: "00".into(),
            tool_version: "test".into(),
        }
    }

    #[test]
    fn results_roundtrip_bit_exactly() {
        let dir = tempfile::tempdir().unwrap();
        let s = stored(4);
        save_result(dir.path(), &s, "source").unwrap();
        assert_eq!(load_result(dir.path()).unwrap(), s);
    }

    #[test]
    fn header_is_checked() {
        let s = stored(1);
        let lat = *s.result.lattice();
        let path = Path::new("x.bin");
        let mut bytes = encode_operator_field(&s.result.f);
        assert!(decode_operator_field(&bytes, path, &lat).is_ok());
        assert!(matches!(decode_range(&bytes, path, &lat), Err(CliError::Format { .. })));
        bytes.pop();
        assert!(matches!(decode_operator_field(&bytes, path, &lat), Err(CliError::Format { .. })));
        bytes[0] = b'X';
        assert!(matches!(decode_operator_field(&bytes, path, &lat), Err(CliError::Format { .. })));
        let other = TruncationLattice::new(4, 12, 1).unwrap();
        assert!(decode_operator_field(&encode_operator_field(&s.result.f), path, &other).is_err());
    }
}
