//! Sparse multivariate polynomials over a prime field, plus the span-basis
//! machinery that lets a polynomial travel on the wire as a short coordinate
//! vector instead of a term list.
//!
//! All orderings use one fixed monomial order, graded lexicographic: compare
//! total degree first, then exponents left to right. A [`SpanBasis`] is the
//! reduced row echelon form of a candidate set under that order; coordinates
//! of a span member are simply its coefficients at the pivot monomials, and
//! every coordinate read is verified by recombining, so a polynomial outside
//! the span is rejected rather than silently projected.

use std::collections::BTreeMap;
use std::fmt;

use rand::Rng;
use thiserror::Error;

use crate::field::{Fe, Field};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum MvError {
    #[error("expected {expected} variables, got {got}")]
    VarMismatch { expected: usize, got: usize },
    #[error("coordinate vector has length {got}, basis has rank {expected}")]
    CoordLength { expected: usize, got: usize },
    #[error("polynomial is not in the candidate span")]
    OutsideSpan,
    #[error("cannot parse polynomial term {0:?}")]
    Parse(String),
}

/// Exponent vector. The ordering is graded lexicographic and is the single
/// monomial order used everywhere in the crate.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Monomial(Vec<u32>);

impl Monomial {
    pub fn new(exps: Vec<u32>) -> Monomial {
        Monomial(exps)
    }

    pub fn exps(&self) -> &[u32] {
        &self.0
    }

    pub fn total_degree(&self) -> u32 {
        self.0.iter().sum()
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Monomial) -> std::cmp::Ordering {
        debug_assert_eq!(self.0.len(), other.0.len());
        self.total_degree()
            .cmp(&other.total_degree())
            .then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Monomial) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

/// Sparse polynomial in a fixed number of variables.
/// Invariant: no stored coefficient is zero.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct MultiPoly {
    vars: usize,
    terms: BTreeMap<Monomial, Fe>,
}

impl MultiPoly {
    pub fn zero(vars: usize) -> MultiPoly {
        MultiPoly { vars, terms: BTreeMap::new() }
    }

    pub fn constant(vars: usize, c: Fe) -> MultiPoly {
        let mut p = MultiPoly::zero(vars);
        p.set_term(Monomial::new(vec![0; vars]), c);
        p
    }

    pub fn monomial(vars: usize, exps: Vec<u32>, c: Fe) -> MultiPoly {
        assert_eq!(exps.len(), vars);
        let mut p = MultiPoly::zero(vars);
        p.set_term(Monomial::new(exps), c);
        p
    }

    fn set_term(&mut self, m: Monomial, c: Fe) {
        if c.is_zero() {
            self.terms.remove(&m);
        } else {
            self.terms.insert(m, c);
        }
    }

    pub fn vars(&self) -> usize {
        self.vars
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    /// Zero for the zero polynomial.
    pub fn total_degree(&self) -> u32 {
        self.terms.keys().map(Monomial::total_degree).max().unwrap_or(0)
    }

    pub fn coeff(&self, m: &Monomial) -> Fe {
        self.terms.get(m).copied().unwrap_or(Fe::ZERO)
    }

    /// Largest monomial under the graded-lex order; `None` when zero.
    pub fn leading_monomial(&self) -> Option<&Monomial> {
        self.terms.keys().next_back()
    }

    /// Terms in descending monomial order.
    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, Fe)> {
        self.terms.iter().rev().map(|(m, &c)| (m, c))
    }

    /// Evaluate at a point. Per-variable powers are computed once up to the
    /// largest exponent that actually occurs, then shared across terms.
    pub fn eval(&self, f: &Field, point: &[Fe]) -> Result<Fe, MvError> {
        if point.len() != self.vars {
            return Err(MvError::VarMismatch { expected: self.vars, got: point.len() });
        }
        let mut max_exp = vec![0u32; self.vars];
        for m in self.terms.keys() {
            for (v, &e) in m.exps().iter().enumerate() {
                max_exp[v] = max_exp[v].max(e);
            }
        }
        let powers: Vec<Vec<Fe>> = (0..self.vars)
            .map(|v| {
                let mut col = Vec::with_capacity(max_exp[v] as usize + 1);
                col.push(f.one());
                for e in 1..=max_exp[v] as usize {
                    col.push(f.mul(col[e - 1], point[v]));
                }
                col
            })
            .collect();
        let mut acc = f.zero();
        for (m, &c) in &self.terms {
            let mut term = c;
            for (v, &e) in m.exps().iter().enumerate() {
                if e > 0 {
                    term = f.mul(term, powers[v][e as usize]);
                }
            }
            acc = f.add(acc, term);
        }
        Ok(acc)
    }

    pub fn add(&self, f: &Field, other: &MultiPoly) -> Result<MultiPoly, MvError> {
        linear_combination(f, &[(f.one(), self), (f.one(), other)])
    }

    pub fn scale(&self, f: &Field, c: Fe) -> MultiPoly {
        let mut out = MultiPoly::zero(self.vars);
        for (m, &a) in &self.terms {
            out.set_term(m.clone(), f.mul(a, c));
        }
        out
    }

    /// Canonical text form, also produced by `Display`: terms in descending
    /// monomial order as `e1,...,eM:c` separated by single spaces; the zero
    /// polynomial prints as `0`.
    pub fn to_text(&self) -> String {
        if self.is_zero() {
            return "0".to_string();
        }
        self.terms()
            .map(|(m, c)| {
                let exps = m.exps().iter().map(u32::to_string).collect::<Vec<_>>().join(",");
                format!("{exps}:{c}")
            })
            .collect::<Vec<_>>()
            .join(" ")
    }

    /// Parse the text form. Coefficients are reduced into the field, same
    /// monomials accumulate, zero terms drop out, so any well-formed term
    /// list is accepted and re-serializes canonically.
    pub fn parse(f: &Field, vars: usize, text: &str) -> Result<MultiPoly, MvError> {
        let text = text.trim();
        if text == "0" {
            return Ok(MultiPoly::zero(vars));
        }
        let mut p = MultiPoly::zero(vars);
        for term in text.split_whitespace() {
            let (exps_part, coeff_part) =
                term.split_once(':').ok_or_else(|| MvError::Parse(term.to_string()))?;
            let exps: Vec<u32> = exps_part
                .split(',')
                .map(|e| e.parse().map_err(|_| MvError::Parse(term.to_string())))
                .collect::<Result<_, _>>()?;
            if exps.len() != vars {
                return Err(MvError::VarMismatch { expected: vars, got: exps.len() });
            }
            let c: u64 = coeff_part.parse().map_err(|_| MvError::Parse(term.to_string()))?;
            let m = Monomial::new(exps);
            let c = f.add(p.coeff(&m), f.elem(c));
            p.set_term(m, c);
        }
        Ok(p)
    }
}

impl fmt::Display for MultiPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

/// `sum_i coeffs_i * polys_i` in one pass.
pub fn linear_combination(
    f: &Field,
    parts: &[(Fe, &MultiPoly)],
) -> Result<MultiPoly, MvError> {
    let vars = parts.first().map_or(0, |(_, p)| p.vars);
    let mut out = MultiPoly::zero(vars);
    for (c, p) in parts {
        if p.vars != vars {
            return Err(MvError::VarMismatch { expected: vars, got: p.vars });
        }
        for (m, &a) in &p.terms {
            let v = f.add(out.coeff(m), f.mul(*c, a));
            out.set_term(m.clone(), v);
        }
    }
    Ok(out)
}

/// Reduced row echelon basis of the span of a candidate set.
///
/// `dim()` is the span rank F; wire coordinates everywhere in the protocol are
/// vectors of that length. Each original candidate's own coordinate vector is
/// precomputed so callers can turn a candidate index into coordinates without
/// touching the term lists again.
#[derive(Clone, Debug)]
pub struct SpanBasis {
    vars: usize,
    basis: Vec<MultiPoly>,
    pivots: Vec<Monomial>,
    candidate_coords: Vec<Vec<Fe>>,
}

impl SpanBasis {
    pub fn vars(&self) -> usize {
        self.vars
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[MultiPoly] {
        &self.basis
    }

    pub fn pivots(&self) -> &[Monomial] {
        &self.pivots
    }

    pub fn num_candidates(&self) -> usize {
        self.candidate_coords.len()
    }

    /// Coordinates of the idx-th original candidate.
    pub fn candidate_coords(&self, idx: usize) -> &[Fe] {
        &self.candidate_coords[idx]
    }
}

/// Row-reduce the candidates under the graded-lex order. Zero candidates and
/// duplicates are harmless; rank 0 (all candidates zero) is a valid basis.
pub fn span_basis(f: &Field, candidates: &[MultiPoly]) -> Result<SpanBasis, MvError> {
    let vars = candidates.first().map_or(0, MultiPoly::vars);
    let mut rows: Vec<MultiPoly> = Vec::new();
    for c in candidates {
        if c.vars != vars {
            return Err(MvError::VarMismatch { expected: vars, got: c.vars });
        }
        let mut r = c.clone();
        for b in &rows {
            let pivot = b.leading_monomial().unwrap();
            let w = r.coeff(pivot);
            if !w.is_zero() {
                r = linear_combination(f, &[(f.one(), &r), (f.neg(w), b)])?;
            }
        }
        if let Some(lead) = r.leading_monomial().cloned() {
            let r = r.scale(f, f.inv(r.coeff(&lead)).expect("leading coeff nonzero"));
            // Clear the new pivot from the rows already in echelon form.
            for b in rows.iter_mut() {
                let w = b.coeff(&lead);
                if !w.is_zero() {
                    *b = linear_combination(f, &[(f.one(), b), (f.neg(w), &r)])?;
                }
            }
            rows.push(r);
        }
    }
    rows.sort_by(|a, b| b.leading_monomial().cmp(&a.leading_monomial()));
    let pivots: Vec<Monomial> =
        rows.iter().map(|r| r.leading_monomial().unwrap().clone()).collect();
    let mut sb = SpanBasis { vars, basis: rows, pivots, candidate_coords: Vec::new() };
    sb.candidate_coords = candidates
        .iter()
        .map(|c| span_coordinates(f, &sb, c))
        .collect::<Result<_, _>>()
        .expect("candidates lie in their own span");
    Ok(sb)
}

/// Coordinates of `p` in the basis, or `OutsideSpan`. Reads the pivot
/// coefficients, then verifies by recombination, so the result is a proof of
/// membership rather than a projection.
pub fn span_coordinates(f: &Field, basis: &SpanBasis, p: &MultiPoly) -> Result<Vec<Fe>, MvError> {
    if p.vars != basis.vars {
        return Err(MvError::VarMismatch { expected: basis.vars, got: p.vars });
    }
    let coords: Vec<Fe> = basis.pivots.iter().map(|m| p.coeff(m)).collect();
    if &from_coords(f, basis, &coords)? != p {
        return Err(MvError::OutsideSpan);
    }
    Ok(coords)
}

/// Rebuild the span member with the given coordinates.
pub fn from_coords(f: &Field, basis: &SpanBasis, coords: &[Fe]) -> Result<MultiPoly, MvError> {
    if coords.len() != basis.dim() {
        return Err(MvError::CoordLength { expected: basis.dim(), got: coords.len() });
    }
    if basis.dim() == 0 {
        return Ok(MultiPoly::zero(basis.vars));
    }
    let parts: Vec<(Fe, &MultiPoly)> =
        coords.iter().copied().zip(basis.basis.iter()).collect();
    linear_combination(f, &parts)
}

/// Uniform element of the span (uniform coordinates, then recombine).
pub fn sample_span(f: &Field, basis: &SpanBasis, rng: &mut impl Rng) -> MultiPoly {
    let coords: Vec<Fe> = (0..basis.dim()).map(|_| f.rand(rng)).collect();
    from_coords(f, basis, &coords).expect("coords have basis length")
}
