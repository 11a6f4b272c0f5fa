//! Deterministic construction and verification of the public evaluation
//! points: an `L x (K+X)` matrix `beta` (data columns plus replicated noise
//! columns) and `N` server points `alpha`.
//!
//! The construction consumes the field elements `0, 1, 2, ...` in ascending
//! order, so a parameter tuple fully determines the points. It needs
//! `q >= N + max(K, E)` and yields exactly that many distinct elements.
//!
//! The verifier checks the four structural properties the rest of the scheme
//! leans on:
//! rows of `beta` are distinct (storage interpolation is well posed), each
//! round's data-column window is distinct across all rows (query and mask
//! node sets are well posed), the `alpha` are distinct (answers form a
//! Reed-Solomon codeword), and the `alpha` avoid the data columns (desired
//! evaluations are never handed out directly).

use std::collections::BTreeSet;
use std::ops::Range;

use thiserror::Error;

use crate::field::{Fe, Field};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PointsError {
    #[error("field of order {q} too small, construction needs {needed} distinct elements")]
    FieldTooSmall { q: u64, needed: u64 },
    #[error("degenerate shape: {0}")]
    BadShape(&'static str),
    #[error("cannot parse points fixture: {0}")]
    Parse(String),
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 { a } else { gcd(b, a % b) }
}

/// Public points for one system. `beta` is row-major `l x (k+x)`; data
/// columns are `0..k`, noise columns `k..k+x`. `alpha[0..x]` coincide with
/// the noise columns by construction.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct PublicPoints {
    pub q: u64,
    pub n: usize,
    pub k: usize,
    pub x: usize,
    pub e: usize,
    pub delta: usize,
    pub l: usize,
    pub rounds: usize,
    pub beta: Vec<Vec<Fe>>,
    pub alpha: Vec<Fe>,
}

impl PublicPoints {
    /// Data columns belonging to one retrieval round.
    pub fn window(&self, round: usize) -> Range<usize> {
        debug_assert!(round < self.rounds);
        round * self.delta..(round + 1) * self.delta
    }

    /// The round's `E` window entries, row-major.
    pub fn window_nodes(&self, round: usize) -> Vec<Fe> {
        let cols = self.window(round);
        self.beta.iter().flat_map(|row| row[cols.clone()].iter().copied()).collect()
    }

    /// Fixture form: header `q N K X L S Delta`, then the `L` rows of `beta`,
    /// then one row of `alpha`.
    pub fn to_text(&self) -> String {
        let mut out = format!(
            "{} {} {} {} {} {} {}\n",
            self.q, self.n, self.k, self.x, self.l, self.rounds, self.delta
        );
        for row in &self.beta {
            let line: Vec<String> = row.iter().map(Fe::to_string).collect();
            out.push_str(&line.join(" "));
            out.push('\n');
        }
        let line: Vec<String> = self.alpha.iter().map(Fe::to_string).collect();
        out.push_str(&line.join(" "));
        out.push('\n');
        out
    }

    pub fn parse(text: &str) -> Result<PublicPoints, PointsError> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines.next().ok_or_else(|| PointsError::Parse("empty fixture".into()))?;
        let head: Vec<u64> = header
            .split_whitespace()
            .map(|t| t.parse().map_err(|_| PointsError::Parse(format!("bad header token {t:?}"))))
            .collect::<Result<_, _>>()?;
        let [q, n, k, x, l, rounds, delta] = head[..] else {
            return Err(PointsError::Parse("header needs 7 fields: q N K X L S Delta".into()));
        };
        let (n, k, x, l, rounds, delta) =
            (n as usize, k as usize, x as usize, l as usize, rounds as usize, delta as usize);
        if k != rounds * delta {
            return Err(PointsError::Parse("header violates K = S * Delta".into()));
        }
        let field = Field::new(q).map_err(|e| PointsError::Parse(e.to_string()))?;
        let mut read_row = |expect: usize| -> Result<Vec<Fe>, PointsError> {
            let line = lines.next().ok_or_else(|| PointsError::Parse("truncated fixture".into()))?;
            let row: Vec<u64> = line
                .split_whitespace()
                .map(|t| t.parse().map_err(|_| PointsError::Parse(format!("bad value {t:?}"))))
                .collect::<Result<_, _>>()?;
            if row.len() != expect {
                return Err(PointsError::Parse(format!("row has {} values, expected {expect}", row.len())));
            }
            row.into_iter()
                .map(|v| {
                    if v >= q {
                        Err(PointsError::Parse(format!("value {v} outside field of order {q}")))
                    } else {
                        Ok(field.elem(v))
                    }
                })
                .collect()
        };
        let beta: Vec<Vec<Fe>> = (0..l).map(|_| read_row(k + x)).collect::<Result<_, _>>()?;
        let alpha = read_row(n)?;
        if lines.next().is_some() {
            return Err(PointsError::Parse("trailing lines after alpha row".into()));
        }
        Ok(PublicPoints { q, n, k, x, e: l * delta, delta, l, rounds, beta, alpha })
    }
}

/// Build the points for `n` servers, `k` data columns, `x` noise columns and
/// recovery dimension `e`, consuming `0, 1, 2, ...` in order.
pub fn generate_points(f: &Field, n: usize, k: usize, x: usize, e: usize) -> Result<PublicPoints, PointsError> {
    if n == 0 || k == 0 || e == 0 {
        return Err(PointsError::BadShape("n, k and e must all be positive"));
    }
    let needed = (n + k.max(e)) as u64;
    if f.modulus() < needed {
        return Err(PointsError::FieldTooSmall { q: f.modulus(), needed });
    }
    let delta = gcd(k, e);
    let l = e / delta;
    let rounds = k / delta;

    let mut beta = vec![vec![Fe::ZERO; k + x]; l];
    if k >= e {
        // Row r is the first row rotated left by r * delta data columns.
        let row0: Vec<Fe> = (0..k as u64).map(|v| f.elem(v)).collect();
        for (r, row) in beta.iter_mut().enumerate() {
            for (c, slot) in row[..k].iter_mut().enumerate() {
                *slot = row0[(c + r * delta) % k];
            }
        }
    } else {
        // Round block s is the l x delta seed block rotated upward s rows.
        let seed: Vec<Vec<Fe>> =
            (0..l).map(|r| (0..delta).map(|d| f.elem((r * delta + d) as u64)).collect()).collect();
        for s in 0..rounds {
            for (r, row) in beta.iter_mut().enumerate() {
                for d in 0..delta {
                    row[s * delta + d] = seed[(r + s) % l][d];
                }
            }
        }
    }
    let base = k.max(e) as u64;
    for (j, col) in (k..k + x).enumerate() {
        let v = f.elem(base + j as u64);
        for row in beta.iter_mut() {
            row[col] = v;
        }
    }
    let alpha: Vec<Fe> = (0..n as u64).map(|j| f.elem(base + j)).collect();
    Ok(PublicPoints { q: f.modulus(), n, k, x, e, delta, l, rounds, beta, alpha })
}

/// One flag per structural property, plus the distinct-element census.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct PropertyReport {
    /// Every row of `beta` has pairwise distinct entries.
    pub rows_distinct: bool,
    /// Every round's data-column window is distinct across all rows.
    pub windows_distinct: bool,
    /// The `alpha` are pairwise distinct.
    pub alphas_distinct: bool,
    /// No `alpha` appears in the data columns of `beta`.
    pub alpha_data_disjoint: bool,
    /// Total distinct elements used equals `n + max(k, e)`.
    pub distinct_count_ok: bool,
}

impl PropertyReport {
    pub fn all_hold(&self) -> bool {
        self.rows_distinct
            && self.windows_distinct
            && self.alphas_distinct
            && self.alpha_data_disjoint
            && self.distinct_count_ok
    }
}

pub fn verify_points(pts: &PublicPoints) -> PropertyReport {
    let rows_distinct = pts
        .beta
        .iter()
        .all(|row| row.iter().collect::<BTreeSet<_>>().len() == row.len());
    let windows_distinct = (0..pts.rounds).all(|r| {
        let nodes = pts.window_nodes(r);
        nodes.iter().collect::<BTreeSet<_>>().len() == nodes.len()
    });
    let alphas_distinct = pts.alpha.iter().collect::<BTreeSet<_>>().len() == pts.alpha.len();
    let data: BTreeSet<Fe> = pts.beta.iter().flat_map(|row| row[..pts.k].iter().copied()).collect();
    let alpha_data_disjoint = pts.alpha.iter().all(|a| !data.contains(a));
    let mut census: BTreeSet<Fe> = pts.beta.iter().flatten().copied().collect();
    census.extend(pts.alpha.iter().copied());
    let distinct_count_ok = census.len() == pts.n + pts.k.max(pts.e);
    PropertyReport { rows_distinct, windows_distinct, alphas_distinct, alpha_data_disjoint, distinct_count_ok }
}
