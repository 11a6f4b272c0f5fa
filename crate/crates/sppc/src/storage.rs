//! Secure Lagrange storage: each file row is interpolated together with `X`
//! fresh noise values into a degree `K+X-1` polynomial, and server `n` stores
//! that polynomial's value at `alpha_n`. Across servers each (file, row) pair
//! is an `(N, K+X)` Reed-Solomon codeword, so any `K+X` servers reconstruct
//! the data, while any `X` servers see values masked by full-rank noise.
//!
//! The noise is returned to the caller because the privacy audits enumerate
//! over it; protocol clients never receive it.

use rand::Rng;
use thiserror::Error;

use crate::field::{lagrange_interpolate, Fe, Field, FieldError};
use crate::points::PublicPoints;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum StorageError {
    #[error("shape mismatch: {0}")]
    Shape(&'static str),
    #[error("got {got} servers, MDS reconstruction needs at least {need}")]
    NotEnoughShares { got: usize, need: usize },
    #[error("duplicate server id {0} in reconstruction subset")]
    DuplicateServer(usize),
    #[error("shares are not consistent with any degree-bounded storage polynomial")]
    InconsistentShares,
    #[error(transparent)]
    Field(#[from] FieldError),
}

/// `M` files, each an `L x K` matrix of field elements.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct FileSet {
    files: Vec<Vec<Vec<Fe>>>,
}

impl FileSet {
    pub fn new(files: Vec<Vec<Vec<Fe>>>) -> Result<FileSet, StorageError> {
        let l = files.first().map_or(0, Vec::len);
        let k = files.first().and_then(|f| f.first()).map_or(0, Vec::len);
        for f in &files {
            if f.len() != l || f.iter().any(|row| row.len() != k) {
                return Err(StorageError::Shape("files must share one L x K shape"));
            }
        }
        Ok(FileSet { files })
    }

    pub fn random(f: &Field, m: usize, l: usize, k: usize, rng: &mut impl Rng) -> FileSet {
        let files = (0..m)
            .map(|_| (0..l).map(|_| (0..k).map(|_| f.rand(rng)).collect()).collect())
            .collect();
        FileSet { files }
    }

    pub fn num_files(&self) -> usize {
        self.files.len()
    }

    pub fn rows(&self) -> usize {
        self.files.first().map_or(0, Vec::len)
    }

    pub fn cols(&self) -> usize {
        self.files.first().and_then(|f| f.first()).map_or(0, Vec::len)
    }

    pub fn cell(&self, m: usize, l: usize, k: usize) -> Fe {
        self.files[m][l][k]
    }

    pub fn row(&self, m: usize, l: usize) -> &[Fe] {
        &self.files[m][l]
    }

    pub fn set_cell(&mut self, m: usize, l: usize, k: usize, v: Fe) {
        self.files[m][l][k] = v;
    }
}

/// The `X` noise values per (file, row), in column order `K..K+X`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct StorageNoise {
    pub z: Vec<Vec<Vec<Fe>>>,
}

impl StorageNoise {
    pub fn random(f: &Field, m: usize, l: usize, x: usize, rng: &mut impl Rng) -> StorageNoise {
        let z = (0..m)
            .map(|_| (0..l).map(|_| (0..x).map(|_| f.rand(rng)).collect()).collect())
            .collect();
        StorageNoise { z }
    }
}

/// One server's stored symbols, `M * L` of them, row-major with the file row
/// outer and the file index inner: `shares[l * M + m] = phi_l^(m)(alpha_n)`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct ServerState {
    pub server_id: usize,
    pub shares: Vec<Fe>,
}

impl ServerState {
    pub fn share(&self, m_count: usize, l: usize, m: usize) -> Fe {
        self.shares[l * m_count + m]
    }
}

/// Fixture dump, one line per server: `n: v1 v2 ... v_{ML}`.
pub fn dump_shares(states: &[ServerState]) -> String {
    let mut out = String::new();
    for s in states {
        let vals: Vec<String> = s.shares.iter().map(Fe::to_string).collect();
        out.push_str(&format!("{}: {}\n", s.server_id, vals.join(" ")));
    }
    out
}

/// Interpolate the storage polynomial of one (file, row) pair: data at the
/// row's data columns, noise at its noise columns.
fn storage_poly(
    f: &Field,
    pts: &PublicPoints,
    row_data: &[Fe],
    row_noise: &[Fe],
    l: usize,
) -> Result<crate::field::UniPoly, FieldError> {
    let nodes: Vec<(Fe, Fe)> = pts.beta[l][..pts.k]
        .iter()
        .copied()
        .zip(row_data.iter().copied())
        .chain(pts.beta[l][pts.k..].iter().copied().zip(row_noise.iter().copied()))
        .collect();
    lagrange_interpolate(f, &nodes)
}

/// Encode with caller-chosen noise. The audits enumerate noise vectors, so
/// this deterministic path is public; normal use goes through
/// [`encode_storage`].
pub fn encode_with_noise(
    f: &Field,
    pts: &PublicPoints,
    files: &FileSet,
    noise: &StorageNoise,
) -> Result<Vec<ServerState>, StorageError> {
    let (m_count, l_count) = (files.num_files(), files.rows());
    if files.rows() != pts.l || files.cols() != pts.k {
        return Err(StorageError::Shape("file shape must be L x K from the points"));
    }
    if noise.z.len() != m_count
        || noise.z.iter().any(|f| f.len() != l_count || f.iter().any(|r| r.len() != pts.x))
    {
        return Err(StorageError::Shape("noise shape must be M x L x X"));
    }
    let mut states: Vec<ServerState> = (0..pts.n)
        .map(|n| ServerState { server_id: n, shares: vec![Fe::ZERO; m_count * l_count] })
        .collect();
    for l in 0..l_count {
        for m in 0..m_count {
            let phi = storage_poly(f, pts, files.row(m, l), &noise.z[m][l], l)?;
            debug_assert!(phi.degree().map_or(0, |d| d + 1) <= pts.k + pts.x);
            for (n, st) in states.iter_mut().enumerate() {
                st.shares[l * m_count + m] = phi.eval(f, pts.alpha[n]);
            }
        }
    }
    Ok(states)
}

pub fn encode_storage(
    f: &Field,
    pts: &PublicPoints,
    files: &FileSet,
    rng: &mut impl Rng,
) -> Result<(Vec<ServerState>, StorageNoise), StorageError> {
    let noise = StorageNoise::random(f, files.num_files(), files.rows(), pts.x, rng);
    let states = encode_with_noise(f, pts, files, &noise)?;
    Ok((states, noise))
}

/// MDS reconstruction from any `K+X` or more servers. All supplied shares are
/// interpolated together and the degree bound is checked, so an inconsistent
/// superset is reported instead of silently averaged away.
pub fn reconstruct_files(
    f: &Field,
    pts: &PublicPoints,
    subset: &[ServerState],
    m_count: usize,
) -> Result<FileSet, StorageError> {
    let need = pts.k + pts.x;
    if subset.len() < need {
        return Err(StorageError::NotEnoughShares { got: subset.len(), need });
    }
    for (i, s) in subset.iter().enumerate() {
        if s.shares.len() != m_count * pts.l {
            return Err(StorageError::Shape("share vector length must be M * L"));
        }
        if subset[..i].iter().any(|t| t.server_id == s.server_id) {
            return Err(StorageError::DuplicateServer(s.server_id));
        }
    }
    let mut files = vec![vec![vec![Fe::ZERO; pts.k]; pts.l]; m_count];
    for l in 0..pts.l {
        for m in 0..m_count {
            let nodes: Vec<(Fe, Fe)> = subset
                .iter()
                .map(|s| (pts.alpha[s.server_id], s.share(m_count, l, m)))
                .collect();
            let phi = lagrange_interpolate(f, &nodes)?;
            if phi.degree().map_or(0, |d| d + 1) > need {
                return Err(StorageError::InconsistentShares);
            }
            for k in 0..pts.k {
                files[m][l][k] = phi.eval(f, pts.beta[l][k]);
            }
        }
    }
    FileSet::new(files)
}
