//! Executable privacy checks. Each guarantee the scheme makes is an exact
//! distributional statement, so each audit enumerates the relevant randomness
//! space completely and compares probability tables with rational arithmetic.
//! Nothing here samples and nothing is approximate: two tables are either
//! identical or they are not.
//!
//! Three properties are covered. Storage secrecy: any `X` servers' shares are
//! distributed identically for any two file sets, over the storage noise.
//! Query privacy: any `T` servers' query coordinates for one file row are
//! distributed identically for every candidate index, over the query noise.
//! Answer secrecy: the part of the answer word the client can actually
//! resolve is distributed identically for any two file sets that agree on the
//! desired evaluations, over the shared mask values.
//!
//! Each audit also accepts a deliberately broken variant of the component it
//! checks (noise dropped from the encoder, noise weight dropped from one
//! query, mask forced to zero) so tests can demonstrate the audit fails when
//! the protection is absent, not merely passes when it is present.
//!
//! Enumeration sizes are `q` to the power of the randomness dimension; audits
//! refuse with the size estimate when that exceeds the caller's cap rather
//! than silently truncating.

use std::collections::BTreeMap;

use num::rational::Ratio;
use thiserror::Error;

use crate::field::{lagrange_interpolate, Fe, Field, FieldError, UniPoly};
use crate::mvpoly::{from_coords, MvError, SpanBasis};
use crate::points::PublicPoints;
use crate::protocol::{ProtocolError, QueryNoise, RoundNodeSet, SystemParams};
use crate::storage::{FileSet, StorageError, StorageNoise};

pub const DEFAULT_ENUMERATION_CAP: u64 = 1_000_000;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum AuditError {
    #[error("enumeration of {size} outcomes exceeds the cap of {cap}")]
    TooLarge { size: u128, cap: u64 },
    #[error("invalid audit input: {0}")]
    BadInput(&'static str),
    #[error("file sets differ on the desired evaluations, nothing to condition on")]
    EvalsDiffer,
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Span(#[from] MvError),
    #[error(transparent)]
    Storage(#[from] StorageError),
    #[error(transparent)]
    Protocol(#[from] ProtocolError),
}

/// Exact probability table over observable tuples. Keys are the canonical
/// serialization of an observation (field values in order); values are exact
/// rationals that sum to one.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct DistributionTable {
    pmf: BTreeMap<Vec<u64>, Ratio<u64>>,
}

impl DistributionTable {
    pub fn from_counts(counts: BTreeMap<Vec<u64>, u64>, total: u64) -> DistributionTable {
        assert!(total > 0, "empty enumeration");
        debug_assert_eq!(counts.values().sum::<u64>(), total);
        let pmf = counts.into_iter().map(|(k, c)| (k, Ratio::new(c, total))).collect();
        DistributionTable { pmf }
    }

    pub fn pmf(&self) -> &BTreeMap<Vec<u64>, Ratio<u64>> {
        &self.pmf
    }

    pub fn len(&self) -> usize {
        self.pmf.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pmf.is_empty()
    }

    pub fn total_probability(&self) -> Ratio<u64> {
        self.pmf.values().sum()
    }
}

/// Result of one audit: the verdict plus the size of the space that was
/// walked to reach it.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct AuditVerdict {
    pub pass: bool,
    pub enumeration_size: u64,
}

impl AuditVerdict {
    pub fn report_line(&self, name: &str) -> String {
        format!(
            "{name}: enumeration={} verdict={}",
            self.enumeration_size,
            if self.pass { "PASS" } else { "FAIL" }
        )
    }
}

/// Storage encoder under audit. `OmitNoise` interpolates through the data
/// columns only, discarding the noise symbols entirely.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum StorageEncoder {
    Faithful,
    OmitNoise,
}

/// Query builder under audit. `ZeroNoiseWeightAt(n)` drops the noise
/// contribution from server `n`'s coordinates.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum QueryBuilder {
    Faithful,
    ZeroNoiseWeightAt(usize),
}

/// Mask rule under audit. `ZeroMask` sends answers with no mask at all.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum MaskRule {
    Faithful,
    ZeroMask,
}

fn checked_size(q: u64, dimension: u32, cap: u64) -> Result<u64, AuditError> {
    let size = (q as u128)
        .checked_pow(dimension)
        .ok_or(AuditError::TooLarge { size: u128::MAX, cap })?;
    if size > cap as u128 {
        return Err(AuditError::TooLarge { size, cap });
    }
    Ok(size as u64)
}

/// The `idx`-th vector of `F_q^d` in odometer order, least significant first.
fn nth_vector(f: &Field, q: u64, d: usize, mut idx: u64) -> Vec<Fe> {
    let mut v = Vec::with_capacity(d);
    for _ in 0..d {
        v.push(f.elem(idx % q));
        idx /= q;
    }
    v
}

fn check_ids(ids: &[usize], n: usize, what: &'static str) -> Result<(), AuditError> {
    if ids.iter().any(|&i| i >= n) {
        return Err(AuditError::BadInput(what));
    }
    if (1..ids.len()).any(|i| ids[i..].contains(&ids[i - 1])) {
        return Err(AuditError::BadInput(what));
    }
    Ok(())
}

/// Interpolating polynomial for one `(m, l)` storage cell row under the
/// chosen encoder variant.
fn cell_poly(
    f: &Field,
    pts: &PublicPoints,
    data: &[Fe],
    noise: &[Fe],
    l: usize,
    encoder: StorageEncoder,
) -> Result<UniPoly, AuditError> {
    let mut nodes: Vec<(Fe, Fe)> =
        pts.beta[l][..pts.k].iter().copied().zip(data.iter().copied()).collect();
    if encoder == StorageEncoder::Faithful {
        nodes.extend(pts.beta[l][pts.k..].iter().copied().zip(noise.iter().copied()));
    }
    Ok(lagrange_interpolate(f, &nodes)?)
}

/// Shares any `x_set` of servers hold are identically distributed for both
/// file sets, over uniform storage noise. Enumerates `q^X` noise vectors per
/// `(m, l)` cell row; independence across cell rows is structural (the
/// encoder draws fresh noise per row), so per-row equality suffices.
pub fn audit_x_security(
    f: &Field,
    pts: &PublicPoints,
    file_a: &FileSet,
    file_b: &FileSet,
    x_set: &[usize],
    encoder: StorageEncoder,
    cap: u64,
) -> Result<AuditVerdict, AuditError> {
    if file_a.num_files() != file_b.num_files()
        || file_a.rows() != pts.l
        || file_b.rows() != pts.l
        || file_a.cols() != pts.k
        || file_b.cols() != pts.k
    {
        return Err(AuditError::BadInput("file sets must both be M x L x K for these points"));
    }
    check_ids(x_set, pts.n, "x_set ids must be distinct server indices")?;
    let q = f.modulus();
    let size = checked_size(q, pts.x as u32, cap)?;

    let table_for = |data: &[Fe], l: usize| -> Result<DistributionTable, AuditError> {
        let mut counts: BTreeMap<Vec<u64>, u64> = BTreeMap::new();
        for idx in 0..size {
            let z = nth_vector(f, q, pts.x, idx);
            let phi = cell_poly(f, pts, data, &z, l, encoder)?;
            let obs: Vec<u64> = x_set.iter().map(|&n| phi.eval(f, pts.alpha[n]).val()).collect();
            *counts.entry(obs).or_insert(0) += 1;
        }
        Ok(DistributionTable::from_counts(counts, size))
    };

    let mut pass = true;
    'outer: for m in 0..file_a.num_files() {
        for l in 0..pts.l {
            let ta = table_for(file_a.row(m, l), l)?;
            let tb = table_for(file_b.row(m, l), l)?;
            if ta != tb {
                pass = false;
                break 'outer;
            }
        }
    }
    Ok(AuditVerdict { pass, enumeration_size: size })
}

/// Query coordinates seen by any `t_set` of servers for file row `row_i` are
/// identically distributed for every candidate index. Enumerates the
/// `q^(T*F)` noise coordinate choices for that row; rows and rounds use
/// independent draws, so one row certifies the joint claim.
pub fn audit_user_privacy(
    f: &Field,
    pts: &PublicPoints,
    basis: &SpanBasis,
    t_count: usize,
    t_set: &[usize],
    row_i: usize,
    round: usize,
    builder: QueryBuilder,
    cap: u64,
) -> Result<AuditVerdict, AuditError> {
    check_ids(t_set, pts.n, "t_set ids must be distinct server indices")?;
    if t_set.is_empty() || t_set.len() > t_count {
        return Err(AuditError::BadInput("t_set must contain between 1 and T servers"));
    }
    if row_i >= pts.l {
        return Err(AuditError::BadInput("row index out of range"));
    }
    let dim = basis.dim();
    let q = f.modulus();
    let size = checked_size(q, (t_count * dim) as u32, cap)?;

    let node_set = RoundNodeSet::new(f, pts, t_count, round)?;
    let mut sorted = t_set.to_vec();
    sorted.sort_unstable();
    // Per observed server: the row-i data weight and the T noise weights at
    // its evaluation point, with the mutant dropping the noise outright.
    let weights: Vec<(Fe, Vec<Fe>)> = sorted
        .iter()
        .map(|&n| {
            let (rows, noise_w) = node_set.weights_at(f, pts.alpha[n])?;
            let noise_w = match builder {
                QueryBuilder::Faithful => noise_w,
                QueryBuilder::ZeroNoiseWeightAt(target) if n == target => {
                    vec![f.zero(); noise_w.len()]
                }
                QueryBuilder::ZeroNoiseWeightAt(_) => noise_w,
            };
            Ok((rows[row_i], noise_w))
        })
        .collect::<Result<_, AuditError>>()?;

    let mut tables = Vec::with_capacity(basis.num_candidates());
    for theta in 0..basis.num_candidates() {
        let theta_coords = basis.candidate_coords(theta);
        let mut counts: BTreeMap<Vec<u64>, u64> = BTreeMap::new();
        for idx in 0..size {
            let flat = nth_vector(f, q, t_count * dim, idx);
            let mut obs = Vec::with_capacity(sorted.len() * dim);
            for (h, noise_w) in &weights {
                for c in 0..dim {
                    let mut v = f.mul(*h, theta_coords[c]);
                    for (t, &w) in noise_w.iter().enumerate() {
                        v = f.add(v, f.mul(w, flat[t * dim + c]));
                    }
                    obs.push(v.val());
                }
            }
            *counts.entry(obs).or_insert(0) += 1;
        }
        tables.push(DistributionTable::from_counts(counts, size));
    }
    let pass = tables.iter().all(|t| *t == tables[0]);
    Ok(AuditVerdict { pass, enumeration_size: size })
}

/// Unmasked answer polynomial values at the observable points for one round:
/// the mask node points `alpha_0..alpha_{mc-1}` followed by the round window
/// nodes. These `mc + E` values carry everything the answers reveal, since
/// the answer polynomial has exactly that many degrees of freedom.
fn unmasked_view(
    f: &Field,
    params: &SystemParams,
    pts: &PublicPoints,
    basis: &SpanBasis,
    theta: usize,
    files: &FileSet,
    snoise: &StorageNoise,
    qnoise: &QueryNoise,
    round: usize,
) -> Result<Vec<Fe>, AuditError> {
    let phis: Vec<Vec<UniPoly>> = (0..pts.l)
        .map(|l| {
            (0..params.m)
                .map(|m| {
                    cell_poly(f, pts, files.row(m, l), &snoise.z[m][l], l, StorageEncoder::Faithful)
                })
                .collect()
        })
        .collect::<Result<_, _>>()?;
    let node_set = RoundNodeSet::new(f, pts, params.t, round)?;
    let theta_coords = basis.candidate_coords(theta);
    let members = basis.basis();
    let mc = params.mask_count();
    let mut points: Vec<Fe> = pts.alpha[..mc].to_vec();
    points.extend(pts.window_nodes(round));
    points
        .into_iter()
        .map(|at| {
            let (rows, noise_w) = node_set.weights_at(f, at)?;
            let mut acc = f.zero();
            for i in 0..pts.l {
                let args: Vec<Fe> =
                    (0..params.m).map(|m| phis[i][m].eval(f, at)).collect();
                for (c, member) in members.iter().enumerate() {
                    let mut coeff = f.mul(rows[i], theta_coords[c]);
                    for (t, &w) in noise_w.iter().enumerate() {
                        coeff = f.add(coeff, f.mul(w, qnoise.coords[i][t][c]));
                    }
                    acc = f.add(acc, f.mul(coeff, member.eval(f, &args)?));
                }
            }
            Ok(acc)
        })
        .collect()
}

/// With queries and storage noise held fixed, the client-decodable view of
/// the answers is identically distributed for two file sets that agree on
/// the desired evaluations, over the `q^(G(K+X-1)+T)` mask vectors. The view
/// is the answer polynomial at the mask points (masked by `z`) plus the
/// window points (forced to the desired evaluations).
pub fn audit_server_privacy(
    f: &Field,
    params: &SystemParams,
    pts: &PublicPoints,
    basis: &SpanBasis,
    theta: usize,
    file_a: &FileSet,
    file_b: &FileSet,
    round: usize,
    snoise: &StorageNoise,
    qnoise: &QueryNoise,
    mask: MaskRule,
    cap: u64,
) -> Result<AuditVerdict, AuditError> {
    if theta >= basis.num_candidates() {
        return Err(AuditError::BadInput("theta out of range"));
    }
    if file_a.num_files() != params.m || file_b.num_files() != params.m {
        return Err(AuditError::BadInput("file sets must have M members"));
    }
    let cand = from_coords(f, basis, basis.candidate_coords(theta))?;
    for l in 0..pts.l {
        for k in 0..pts.k {
            let args_a: Vec<Fe> = (0..params.m).map(|m| file_a.cell(m, l, k)).collect();
            let args_b: Vec<Fe> = (0..params.m).map(|m| file_b.cell(m, l, k)).collect();
            if cand.eval(f, &args_a)? != cand.eval(f, &args_b)? {
                return Err(AuditError::EvalsDiffer);
            }
        }
    }

    let mc = params.mask_count();
    let q = f.modulus();
    let size = checked_size(q, mc as u32, cap)?;

    let table_for = |files: &FileSet| -> Result<DistributionTable, AuditError> {
        let mu = unmasked_view(f, params, pts, basis, theta, files, snoise, qnoise, round)?;
        let mut counts: BTreeMap<Vec<u64>, u64> = BTreeMap::new();
        for idx in 0..size {
            let z = nth_vector(f, q, mc, idx);
            let obs: Vec<u64> = mu
                .iter()
                .enumerate()
                .map(|(j, &v)| match mask {
                    MaskRule::Faithful if j < mc => f.add(v, z[j]).val(),
                    _ => v.val(),
                })
                .collect();
            *counts.entry(obs).or_insert(0) += 1;
        }
        Ok(DistributionTable::from_counts(counts, size))
    };

    let pass = table_for(file_a)? == table_for(file_b)?;
    Ok(AuditVerdict { pass, enumeration_size: size })
}
