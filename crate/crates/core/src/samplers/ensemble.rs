//! Sampled path ensembles and their on-disk layout.
//!
//! A [`PathEnsemble`] is the unit every sampler returns and every estimator
//! consumes: a rectangular block of paths over one evaluation grid, tagged
//! with the master seed, the sampling method, and a fingerprint of the law
//! it targets. Ensembles are immutable after construction.
//!
//! The binary layout (all integers and floats little-endian):
//!
//! ```text
//! offset  size  field
//!      0     4  magic "FHE1"
//!      4     4  format version (currently 1, u32)
//!      8     1  grid unit (0 = time, 1 = space)
//!      9     1  method (0 = Cholesky, 1 = circulant embedding, 2 = spectral series)
//!     10     6  reserved, zero
//!     16     8  master seed (u64)
//!     24     8  law fingerprint (u64, FNV-1a)
//!     32     8  n_paths (u64)
//!     40     8  n_grid (u64)
//!     48     8  series bias (f64, NaN when not applicable)
//!     56    8g  grid values (g = n_grid f64s)
//!    ...   8pg  paths, row-major (path 0 first)
//! ```

use std::io::{Read, Write};

use crate::error::{Error, Result};

/// What the grid coordinates of an ensemble measure.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GridUnit {
    Time,
    Space,
}

impl GridUnit {
    fn code(self) -> u8 {
        match self {
            GridUnit::Time => 0,
            GridUnit::Space => 1,
        }
    }

    fn from_code(c: u8) -> Result<Self> {
        match c {
            0 => Ok(GridUnit::Time),
            1 => Ok(GridUnit::Space),
            other => Err(Error::Format(format!("unknown grid unit code {other}"))),
        }
    }
}

/// How an ensemble was generated.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SampleMethod {
    /// Dense lower-triangular factor applied to i.i.d. normals.
    Cholesky,
    /// Stationary(-increment) circulant embedding via FFT.
    CirculantEmbedding,
    /// Randomized cosine/sine expansion against the spectral density.
    SpectralSeries,
}

impl SampleMethod {
    fn code(self) -> u8 {
        match self {
            SampleMethod::Cholesky => 0,
            SampleMethod::CirculantEmbedding => 1,
            SampleMethod::SpectralSeries => 2,
        }
    }

    fn from_code(c: u8) -> Result<Self> {
        match c {
            0 => Ok(SampleMethod::Cholesky),
            1 => Ok(SampleMethod::CirculantEmbedding),
            2 => Ok(SampleMethod::SpectralSeries),
            other => Err(Error::Format(format!("unknown sample method code {other}"))),
        }
    }
}

/// FNV-1a over a word stream: the fingerprint primitive shared by all
/// samplers. Stable across runs and platforms; not cryptographic.
pub(crate) fn fnv1a(words: impl IntoIterator<Item = u64>) -> u64 {
    let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
    for w in words {
        for byte in w.to_le_bytes() {
            hash ^= byte as u64;
            hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
        }
    }
    hash
}

/// Largest `n_paths * n_grid` accepted when reading an ensemble back, to
/// reject absurd headers before allocating.
const MAX_VALUES: u64 = 1 << 28;

const MAGIC: &[u8; 4] = b"FHE1";
const VERSION: u32 = 1;

/// A rectangular ensemble of sampled paths over one evaluation grid.
#[derive(Clone, Debug, PartialEq)]
pub struct PathEnsemble {
    grid: Vec<f64>,
    unit: GridUnit,
    /// Row-major: path `j` occupies `[j * n_grid, (j+1) * n_grid)`.
    paths: Vec<f64>,
    seed: u64,
    method: SampleMethod,
    fingerprint: u64,
    series_bias: Option<f64>,
}

impl PathEnsemble {
    /// Assembles an ensemble, enforcing the shape and finiteness invariants.
    pub(crate) fn new(
        grid: Vec<f64>,
        unit: GridUnit,
        paths: Vec<f64>,
        seed: u64,
        method: SampleMethod,
        fingerprint: u64,
        series_bias: Option<f64>,
    ) -> Result<Self> {
        if grid.is_empty() {
            return Err(Error::ParameterDomain(
                "ensemble grid must be nonempty".to_string(),
            ));
        }
        if paths.is_empty() || paths.len() % grid.len() != 0 {
            return Err(Error::ParameterDomain(format!(
                "path block of {} values is not a whole number of paths over {} grid points",
                paths.len(),
                grid.len()
            )));
        }
        if !paths.iter().all(|v| v.is_finite()) {
            return Err(Error::Format(
                "ensemble contains non-finite path values".to_string(),
            ));
        }
        Ok(Self {
            grid,
            unit,
            paths,
            seed,
            method,
            fingerprint,
            series_bias,
        })
    }

    /// The evaluation grid.
    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    /// Whether the grid coordinates are times or positions.
    pub fn unit(&self) -> GridUnit {
        self.unit
    }

    /// Number of paths.
    pub fn n_paths(&self) -> usize {
        self.paths.len() / self.grid.len()
    }

    /// Number of grid points per path.
    pub fn n_grid(&self) -> usize {
        self.grid.len()
    }

    /// Master seed the ensemble was generated from.
    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Method that actually produced the paths (after any fallback).
    pub fn method(&self) -> SampleMethod {
        self.method
    }

    /// FNV-1a fingerprint of the targeted law and grid.
    pub fn fingerprint(&self) -> u64 {
        self.fingerprint
    }

    /// Relative variance neglected by a spectral-series cutoff, when that
    /// method was used.
    pub fn series_bias(&self) -> Option<f64> {
        self.series_bias
    }

    /// Path `j` as a slice of grid values.
    pub fn path(&self, j: usize) -> &[f64] {
        let n = self.n_grid();
        &self.paths[j * n..(j + 1) * n]
    }

    /// All paths in order.
    pub fn iter_paths(&self) -> impl Iterator<Item = &[f64]> {
        self.paths.chunks_exact(self.n_grid())
    }

    /// Serializes the ensemble in the documented binary layout.
    pub fn write_binary<W: Write>(&self, mut out: W) -> Result<()> {
        out.write_all(MAGIC)?;
        out.write_all(&VERSION.to_le_bytes())?;
        out.write_all(&[self.unit.code(), self.method.code(), 0, 0, 0, 0, 0, 0])?;
        out.write_all(&self.seed.to_le_bytes())?;
        out.write_all(&self.fingerprint.to_le_bytes())?;
        out.write_all(&(self.n_paths() as u64).to_le_bytes())?;
        out.write_all(&(self.n_grid() as u64).to_le_bytes())?;
        out.write_all(&self.series_bias.unwrap_or(f64::NAN).to_le_bytes())?;
        for v in self.grid.iter().chain(self.paths.iter()) {
            out.write_all(&v.to_le_bytes())?;
        }
        Ok(())
    }

    /// Reads an ensemble back from the documented binary layout, validating
    /// the header and every invariant.
    pub fn read_binary<R: Read>(mut input: R) -> Result<Self> {
        let mut magic = [0u8; 4];
        input.read_exact(&mut magic)?;
        if &magic != MAGIC {
            return Err(Error::Format(format!(
                "bad magic {magic:?}, expected {MAGIC:?}"
            )));
        }
        let mut word4 = [0u8; 4];
        input.read_exact(&mut word4)?;
        let version = u32::from_le_bytes(word4);
        if version != VERSION {
            return Err(Error::Format(format!(
                "unsupported format version {version}, expected {VERSION}"
            )));
        }
        let mut tags = [0u8; 8];
        input.read_exact(&mut tags)?;
        let unit = GridUnit::from_code(tags[0])?;
        let method = SampleMethod::from_code(tags[1])?;
        let mut word8 = [0u8; 8];
        let mut next_u64 = |input: &mut R| -> Result<u64> {
            input.read_exact(&mut word8)?;
            Ok(u64::from_le_bytes(word8))
        };
        let seed = next_u64(&mut input)?;
        let fingerprint = next_u64(&mut input)?;
        let n_paths = next_u64(&mut input)?;
        let n_grid = next_u64(&mut input)?;
        if n_grid == 0 || n_paths == 0 || n_paths.saturating_mul(n_grid) > MAX_VALUES {
            return Err(Error::Format(format!(
                "implausible ensemble shape {n_paths} x {n_grid}"
            )));
        }
        let mut fword = [0u8; 8];
        input.read_exact(&mut fword)?;
        let bias = f64::from_le_bytes(fword);
        let series_bias = if bias.is_nan() { None } else { Some(bias) };
        let read_f64s = |input: &mut R, count: usize| -> Result<Vec<f64>> {
            let mut out = Vec::with_capacity(count);
            let mut buf = [0u8; 8];
            for _ in 0..count {
                input.read_exact(&mut buf)?;
                out.push(f64::from_le_bytes(buf));
            }
            Ok(out)
        };
        let grid = read_f64s(&mut input, n_grid as usize)?;
        let paths = read_f64s(&mut input, (n_paths * n_grid) as usize)?;
        Self::new(grid, unit, paths, seed, method, fingerprint, series_bias)
    }

    /// Writes the ensemble as long-format CSV rows `path,arg,value` (with
    /// header). Intended for small grids; the binary layout is the bulk
    /// format.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "path,arg,value")?;
        for (j, path) in self.iter_paths().enumerate() {
            for (g, v) in self.grid.iter().zip(path) {
                writeln!(out, "{j},{g},{v}")?;
            }
        }
        Ok(())
    }
}
