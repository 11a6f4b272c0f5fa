//! Reed-Solomon decoding with simultaneous errors and erasures on arbitrary
//! evaluation points. Erasures are punctured away, then an extended-Euclid
//! decoder (Gao's variant: partial gcd of the node product against the
//! interpolant of the received word) corrects up to `b` errors on the
//! shortened code. Every decode ends with a re-evaluation pass; a candidate
//! that disagrees with more than `b` slots is reported as a failure, never
//! returned. A word beyond the error budget that happens to land within
//! distance `b` of a *different* codeword decodes to that codeword; that is
//! inherent to any decoder and outside the contract here.
//!
//! [`brute_force_decode`] is the independent oracle: enumerate error-position
//! subsets, interpolate the rest, keep every degree-bounded candidate within
//! distance `b`. Feasible only for short words, and unlike the fast path it
//! can notice ambiguity when called below the unique-decoding threshold.

use itertools::Itertools;
use thiserror::Error;

use crate::field::{lagrange_interpolate, node_product, Fe, Field, FieldError, UniPoly};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum RsError {
    #[error("malformed word: {0}")]
    Shape(&'static str),
    #[error("duplicate evaluation point {0}")]
    DuplicatePosition(u64),
    #[error("{n_eff} usable slots, correcting {b} errors at dimension {d} needs {}", d + 2 * b)]
    Infeasible { n_eff: usize, d: usize, b: usize },
    #[error("no polynomial within the error budget fits the word")]
    DecodeFailure,
    #[error("multiple distinct polynomials fit within the error budget")]
    Ambiguous,
    #[error(transparent)]
    Field(#[from] FieldError),
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Slot {
    Value(Fe),
    Erased,
}

/// Answer vector as received: one slot per evaluation point, silent servers
/// marked erased.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct ReceivedWord {
    positions: Vec<Fe>,
    slots: Vec<Slot>,
}

impl ReceivedWord {
    pub fn new(positions: Vec<Fe>, slots: Vec<Slot>) -> Result<ReceivedWord, RsError> {
        if positions.len() != slots.len() {
            return Err(RsError::Shape("one slot per evaluation point"));
        }
        for (i, p) in positions.iter().enumerate() {
            if positions[..i].contains(p) {
                return Err(RsError::DuplicatePosition(p.val()));
            }
        }
        Ok(ReceivedWord { positions, slots })
    }

    pub fn len(&self) -> usize {
        self.slots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.slots.is_empty()
    }

    pub fn positions(&self) -> &[Fe] {
        &self.positions
    }

    pub fn slots(&self) -> &[Slot] {
        &self.slots
    }

    pub fn erased_count(&self) -> usize {
        self.slots.iter().filter(|s| matches!(s, Slot::Erased)).count()
    }

    /// Non-erased (position, value) pairs.
    fn present(&self) -> Vec<(Fe, Fe)> {
        self.positions
            .iter()
            .zip(&self.slots)
            .filter_map(|(&p, s)| match s {
                Slot::Value(v) => Some((p, *v)),
                Slot::Erased => None,
            })
            .collect()
    }
}

fn disagreements(f: &Field, poly: &UniPoly, pts: &[(Fe, Fe)]) -> usize {
    pts.iter().filter(|&&(x, y)| poly.eval(f, x) != y).count()
}

/// Recover the degree `< d` polynomial behind `word`, tolerating up to `b`
/// wrong values among the non-erased slots.
pub fn decode_rs(f: &Field, word: &ReceivedWord, d: usize, b: usize) -> Result<UniPoly, RsError> {
    if d == 0 {
        return Err(RsError::Shape("dimension must be positive"));
    }
    let pts = word.present();
    let n_eff = pts.len();
    if n_eff < d + 2 * b {
        return Err(RsError::Infeasible { n_eff, d, b });
    }
    // Partial extended Euclid: r walks from the node product g0 and the
    // interpolant g1 down to the first remainder of degree < (n_eff + d) / 2;
    // the corresponding cofactor v collects the error locators.
    let xs: Vec<Fe> = pts.iter().map(|&(x, _)| x).collect();
    let g0 = node_product(f, &xs);
    let g1 = lagrange_interpolate(f, &pts)?;
    let (mut r_prev, mut r_cur) = (g0, g1);
    let (mut v_prev, mut v_cur) = (UniPoly::zero(), UniPoly::constant(f.one()));
    while r_cur.degree().is_some_and(|dg| 2 * dg >= n_eff + d) {
        let (quot, rem) = r_prev.div_rem(f, &r_cur)?;
        let v_next = v_prev.sub(f, &quot.mul(f, &v_cur));
        (r_prev, r_cur) = (r_cur, rem);
        (v_prev, v_cur) = (v_cur, v_next);
    }
    let (cand, rem) = r_cur.div_rem(f, &v_cur).map_err(|_| RsError::DecodeFailure)?;
    if !rem.is_zero() || cand.degree().map_or(0, |dg| dg + 1) > d {
        return Err(RsError::DecodeFailure);
    }
    if disagreements(f, &cand, &pts) > b {
        return Err(RsError::DecodeFailure);
    }
    Ok(cand)
}

/// Test oracle: try every error-position subset of size at most `b`, keep
/// each interpolant of degree `< d` that disagrees with at most `b` slots.
/// Exactly one distinct survivor is a decode; several are an ambiguity
/// (possible only below the `n_eff >= d + 2b` threshold).
pub fn brute_force_decode(
    f: &Field,
    word: &ReceivedWord,
    d: usize,
    b: usize,
) -> Result<UniPoly, RsError> {
    if d == 0 {
        return Err(RsError::Shape("dimension must be positive"));
    }
    let pts = word.present();
    let n_eff = pts.len();
    if n_eff > 16 {
        return Err(RsError::Shape("oracle is for short words only"));
    }
    if n_eff < d {
        return Err(RsError::Infeasible { n_eff, d, b });
    }
    let mut candidates: Vec<UniPoly> = Vec::new();
    for excl in 0..=b.min(n_eff - d) {
        for subset in (0..n_eff).combinations(excl) {
            let kept: Vec<(Fe, Fe)> = pts
                .iter()
                .enumerate()
                .filter(|(i, _)| !subset.contains(i))
                .map(|(_, &p)| p)
                .collect();
            let cand = lagrange_interpolate(f, &kept)?;
            if cand.degree().map_or(0, |dg| dg + 1) <= d
                && disagreements(f, &cand, &pts) <= b
                && !candidates.contains(&cand)
            {
                candidates.push(cand);
            }
        }
    }
    match candidates.len() {
        0 => Err(RsError::DecodeFailure),
        1 => Ok(candidates.pop().unwrap()),
        _ => Err(RsError::Ambiguous),
    }
}
