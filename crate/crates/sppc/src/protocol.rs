//! The round machinery: derive system parameters, build coordinate-vector
//! queries, mask answers with shared randomness, evaluate server responses,
//! and decode each round's slice of the desired evaluations.
//!
//! One retrieval runs `S = K/gcd(K,E)` rounds. In round `r` the client wants
//! `phi^(theta)` applied cell-wise to the data columns `r*Delta..(r+1)*Delta`.
//! A query to server `n` is, per file row `i`, a span member fixed by
//! interpolation over the round's node set (the `E` window points plus the
//! first `T` server points): it equals the desired candidate at row `i`'s
//! window nodes, zero at other rows' window nodes, and a fresh uniform span
//! member at each of the `T` alpha nodes. Only span coordinates travel, so a
//! query is `L` vectors of `F` field elements and any `T` of them are a
//! one-time pad of the candidate's coordinates.
//!
//! Each server combines the reconstructed query polynomials with its stored
//! shares and adds a mask polynomial built from `G(K+X-1)+T` shared random
//! values; the mask vanishes on the round window, so it cancels exactly where
//! the client reads. Authentic answers are evaluations of one polynomial of
//! degree `G(K+X-1)+E+T-1` at the `alpha` points, which is what lets the
//! decoder absorb `B` wrong and `U` missing answers.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::field::{
    lagrange_interpolate, smallest_prime_at_least, Fe, Field, FieldError, UniPoly,
};
use crate::mvpoly::{from_coords, span_basis, MultiPoly, MvError, SpanBasis};
use crate::points::{generate_points, PointsError, PublicPoints};
use crate::rscode::{decode_rs, ReceivedWord, RsError, Slot};
use crate::storage::{encode_storage, FileSet, ServerState, StorageError};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ProtocolError {
    #[error("infeasible: need N > G(K+X-1)+T+2B+U = {need}, got N = {n}")]
    Infeasible { n: usize, need: usize },
    #[error("invalid parameter: {0}")]
    BadParam(&'static str),
    #[error("q = {q} is below the required bound N+max(K,E) = {needed}")]
    FieldBelowBound { q: u64, needed: u64 },
    #[error("theta = {theta} is out of range for {p} candidates")]
    ThetaOutOfRange { theta: usize, p: usize },
    #[error("mismatched inputs: {0}")]
    Mismatch(&'static str),
    #[error("adversary plan violates the fault budget in round {round}")]
    AdversaryBudget { round: usize },
    #[error("round {round} failed to decode: {source}")]
    RoundFailed { round: usize, source: RsError },
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Points(#[from] PointsError),
    #[error(transparent)]
    Storage(#[from] StorageError),
    #[error(transparent)]
    Span(#[from] MvError),
}

/// All sizing for one system. Raw inputs plus the derived recovery shape.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct SystemParams {
    pub n: usize,
    pub k: usize,
    pub x: usize,
    pub t: usize,
    pub b: usize,
    pub u: usize,
    pub g: usize,
    pub m: usize,
    pub p: usize,
    pub q: u64,
    pub e: usize,
    pub delta: usize,
    pub l: usize,
    pub s: usize,
}

/// Raw inputs to [`derive_params`]; `q` of `None` picks the smallest prime
/// meeting the field-size bound.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct ParamInput {
    pub n: usize,
    pub k: usize,
    pub x: usize,
    pub t: usize,
    pub b: usize,
    pub u: usize,
    pub g: usize,
    pub m: usize,
    pub p: usize,
    pub q: Option<u64>,
}

impl SystemParams {
    /// Shared random values per round, `G(K+X-1)+T`.
    pub fn mask_count(&self) -> usize {
        self.g * (self.k + self.x - 1) + self.t
    }

    /// Answer codeword dimension, `G(K+X-1)+E+T`.
    pub fn codeword_dim(&self) -> usize {
        self.mask_count() + self.e
    }

    pub fn field(&self) -> Field {
        Field::new(self.q).expect("modulus validated at derivation")
    }

    pub fn points(&self, f: &Field) -> Result<PublicPoints, ProtocolError> {
        Ok(generate_points(f, self.n, self.k, self.x, self.e)?)
    }
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 { a } else { gcd(b, a % b) }
}

pub fn derive_params(inp: ParamInput) -> Result<SystemParams, ProtocolError> {
    if inp.k == 0 || inp.t == 0 || inp.m == 0 || inp.g == 0 || inp.p == 0 || inp.n == 0 {
        return Err(ProtocolError::BadParam("N, K, T, G, M and P must all be positive"));
    }
    let need = inp.g * (inp.k + inp.x - 1) + inp.t + 2 * inp.b + inp.u;
    if inp.n <= need {
        return Err(ProtocolError::Infeasible { n: inp.n, need });
    }
    let e = inp.n - need;
    let delta = gcd(inp.k, e);
    let needed = (inp.n + inp.k.max(e)) as u64;
    let q = match inp.q {
        Some(q) => {
            if q < needed {
                return Err(ProtocolError::FieldBelowBound { q, needed });
            }
            Field::new(q)?;
            q
        }
        None => smallest_prime_at_least(needed),
    };
    Ok(SystemParams {
        n: inp.n,
        k: inp.k,
        x: inp.x,
        t: inp.t,
        b: inp.b,
        u: inp.u,
        g: inp.g,
        m: inp.m,
        p: inp.p,
        q,
        e,
        delta,
        l: e / delta,
        s: inp.k / delta,
    })
}

/// Query to one server for one round: `L` span-coordinate vectors of length
/// `F`, one per file row.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct RoundQuery {
    pub server_id: usize,
    pub round: usize,
    pub coords: Vec<Vec<Fe>>,
}

/// The noise span members drawn for one round's queries, as coordinates:
/// `coords[i][t]` pads row `i` against the `t`-th colluding view.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct QueryNoise {
    pub coords: Vec<Vec<Vec<Fe>>>,
}

/// Per-round shared randomness, `mask_count` values each, known to all
/// servers and withheld from the client role.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct CommonRandomness {
    pub rounds: Vec<Vec<Fe>>,
}

impl CommonRandomness {
    pub fn random(f: &Field, params: &SystemParams, rng: &mut impl Rng) -> CommonRandomness {
        let rounds = (0..params.s)
            .map(|_| (0..params.mask_count()).map(|_| f.rand(rng)).collect())
            .collect();
        CommonRandomness { rounds }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum AnswerPayload {
    Value(Fe),
    Missing,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct RoundAnswer {
    pub server_id: usize,
    pub round: usize,
    pub payload: AnswerPayload,
}

/// The recovered `L x K` evaluation table `V[l][k] = phi^(theta)` applied to
/// cell `(l, k)` of every file.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct DesiredEvals {
    pub v: Vec<Vec<Fe>>,
}

impl DesiredEvals {
    pub fn cell(&self, l: usize, k: usize) -> Fe {
        self.v[l][k]
    }
}

/// Fault directives for one round. Byzantine servers answer with a
/// substituted value, silent servers do not answer; the two sets must be
/// disjoint and within the `B` / `U` budgets.
#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct RoundFaults {
    pub byzantine: Vec<usize>,
    pub silent: Vec<usize>,
}

/// How a Byzantine substitution is drawn. `AvoidTrue` guarantees an actual
/// error so correction paths are exercised; `Uniform` may coincide with the
/// honest value.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum TamperRule {
    AvoidTrue,
    Uniform,
}

/// Lagrange machinery for one round's query node set: the `E` window points
/// followed by `alpha_0..alpha_{T-1}`. Denominators depend only on the node
/// set, so they are computed once and shared across evaluation points.
pub struct RoundNodeSet {
    nodes: Vec<Fe>,
    den_inv: Vec<Fe>,
    l: usize,
    delta: usize,
    t: usize,
}

impl RoundNodeSet {
    pub fn new(
        f: &Field,
        pts: &PublicPoints,
        t_count: usize,
        round: usize,
    ) -> Result<RoundNodeSet, ProtocolError> {
        if round >= pts.rounds {
            return Err(ProtocolError::BadParam("round index out of range"));
        }
        if t_count == 0 || t_count > pts.n {
            return Err(ProtocolError::BadParam("collusion size must be in 1..=N"));
        }
        let mut nodes = pts.window_nodes(round);
        nodes.extend(pts.alpha[..t_count].iter().copied());
        let den_inv = nodes
            .iter()
            .enumerate()
            .map(|(j, &xj)| {
                let mut den = f.one();
                for (i, &xi) in nodes.iter().enumerate() {
                    if i != j {
                        den = f.mul(den, f.sub(xj, xi));
                    }
                }
                f.inv(den)
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(RoundNodeSet { nodes, den_inv, l: pts.l, delta: pts.delta, t: t_count })
    }

    /// Lagrange basis values at `at`, folded into per-row data weights
    /// (`L` of them, summing the basis over each row's window nodes) and the
    /// `T` noise-node weights.
    pub fn weights_at(&self, f: &Field, at: Fe) -> Result<(Vec<Fe>, Vec<Fe>), ProtocolError> {
        let total = self.nodes.len();
        let basis: Vec<Fe> = if let Some(hit) = self.nodes.iter().position(|&x| x == at) {
            (0..total).map(|j| if j == hit { f.one() } else { f.zero() }).collect()
        } else {
            let mut master = f.one();
            for &x in &self.nodes {
                master = f.mul(master, f.sub(at, x));
            }
            self.nodes
                .iter()
                .enumerate()
                .map(|(j, &xj)| {
                    let partial = f.mul(master, f.inv(f.sub(at, xj))?);
                    Ok(f.mul(partial, self.den_inv[j]))
                })
                .collect::<Result<Vec<_>, ProtocolError>>()?
        };
        let rows = (0..self.l)
            .map(|i| {
                let mut acc = f.zero();
                for d in 0..self.delta {
                    acc = f.add(acc, basis[i * self.delta + d]);
                }
                acc
            })
            .collect();
        let noise = basis[self.l * self.delta..].to_vec();
        debug_assert_eq!(noise.len(), self.t);
        Ok((rows, noise))
    }
}

/// One-off form of [`RoundNodeSet::weights_at`].
pub fn query_weights(
    f: &Field,
    pts: &PublicPoints,
    t_count: usize,
    round: usize,
    at: Fe,
) -> Result<(Vec<Fe>, Vec<Fe>), ProtocolError> {
    RoundNodeSet::new(f, pts, t_count, round)?.weights_at(f, at)
}

/// Deterministic core of query construction: given the candidate's
/// coordinates and the already-drawn noise coordinates, produce every
/// server's query. Coordinate `c` of row `i` at point `alpha_n` is
/// `rows[i] * theta_coords[c] + sum_t noise[t] * noise_coords[i][t][c]`.
pub fn build_round_queries_from_coords(
    f: &Field,
    pts: &PublicPoints,
    t_count: usize,
    round: usize,
    theta_coords: &[Fe],
    noise: &QueryNoise,
) -> Result<Vec<RoundQuery>, ProtocolError> {
    let dim = theta_coords.len();
    if noise.coords.len() != pts.l
        || noise.coords.iter().any(|row| {
            row.len() != t_count || row.iter().any(|v| v.len() != dim)
        })
    {
        return Err(ProtocolError::Mismatch("noise coordinates must be L x T x F"));
    }
    let node_set = RoundNodeSet::new(f, pts, t_count, round)?;
    let mut queries = Vec::with_capacity(pts.n);
    for (n, &alpha) in pts.alpha.iter().enumerate() {
        let (rows, noise_w) = node_set.weights_at(f, alpha)?;
        let coords: Vec<Vec<Fe>> = (0..pts.l)
            .map(|i| {
                (0..dim)
                    .map(|c| {
                        let mut acc = f.mul(rows[i], theta_coords[c]);
                        for (t, &w) in noise_w.iter().enumerate() {
                            acc = f.add(acc, f.mul(w, noise.coords[i][t][c]));
                        }
                        acc
                    })
                    .collect()
            })
            .collect();
        queries.push(RoundQuery { server_id: n, round, coords });
    }
    Ok(queries)
}

/// Draw fresh noise span members and build the round's queries for the
/// candidate at `theta`.
pub fn build_round_queries(
    f: &Field,
    pts: &PublicPoints,
    basis: &SpanBasis,
    theta: usize,
    round: usize,
    t_count: usize,
    rng: &mut impl Rng,
) -> Result<(Vec<RoundQuery>, QueryNoise), ProtocolError> {
    if theta >= basis.num_candidates() {
        return Err(ProtocolError::ThetaOutOfRange { theta, p: basis.num_candidates() });
    }
    let dim = basis.dim();
    let noise = QueryNoise {
        coords: (0..pts.l)
            .map(|_| (0..t_count).map(|_| (0..dim).map(|_| f.rand(rng)).collect()).collect())
            .collect(),
    };
    let queries = build_round_queries_from_coords(
        f,
        pts,
        t_count,
        round,
        basis.candidate_coords(theta),
        &noise,
    )?;
    Ok((queries, noise))
}

/// Mask polynomial for one round: zero on every window node, `z[j]` at
/// `alpha_j`. Degree at most `E + len(z) - 1`.
pub fn gen_mask(
    f: &Field,
    pts: &PublicPoints,
    round: usize,
    z: &[Fe],
) -> Result<UniPoly, ProtocolError> {
    if z.len() > pts.n {
        return Err(ProtocolError::BadParam("more mask values than alpha points"));
    }
    if round >= pts.rounds {
        return Err(ProtocolError::BadParam("round index out of range"));
    }
    let mut nodes: Vec<(Fe, Fe)> =
        pts.window_nodes(round).into_iter().map(|b| (b, f.zero())).collect();
    nodes.extend(pts.alpha[..z.len()].iter().copied().zip(z.iter().copied()));
    Ok(lagrange_interpolate(f, &nodes)?)
}

/// Honest answer of one server: rebuild the `L` query polynomials from their
/// coordinates, apply each to the server's `M` stored shares for that row,
/// sum, and add the round mask evaluated at this server's point.
pub fn server_answer(
    f: &Field,
    state: &ServerState,
    query: &RoundQuery,
    z: &[Fe],
    basis: &SpanBasis,
    pts: &PublicPoints,
) -> Result<Fe, ProtocolError> {
    if query.server_id != state.server_id {
        return Err(ProtocolError::Mismatch("query addressed to a different server"));
    }
    let m_count = basis.vars();
    if state.shares.len() != m_count * pts.l {
        return Err(ProtocolError::Mismatch("share vector length must be M * L"));
    }
    if query.coords.len() != pts.l {
        return Err(ProtocolError::Mismatch("query must carry one vector per file row"));
    }
    let alpha = pts.alpha[state.server_id];
    let mut acc = gen_mask(f, pts, query.round, z)?.eval(f, alpha);
    for (i, coords) in query.coords.iter().enumerate() {
        let rho = from_coords(f, basis, coords)?;
        let args: Vec<Fe> = (0..m_count).map(|m| state.share(m_count, i, m)).collect();
        acc = f.add(acc, rho.eval(f, &args)?);
    }
    Ok(acc)
}

/// Decode one round: error-and-erasure decode the answer word at dimension
/// `G(K+X-1)+E+T`, then read the decoded polynomial at the round's window
/// nodes. Returns the `L x Delta` block of desired evaluations.
pub fn decode_round(
    f: &Field,
    answers: &[RoundAnswer],
    round: usize,
    pts: &PublicPoints,
    params: &SystemParams,
) -> Result<Vec<Vec<Fe>>, ProtocolError> {
    if answers.len() != pts.n {
        return Err(ProtocolError::Mismatch("need exactly one answer slot per server"));
    }
    let mut slots = vec![None; pts.n];
    for a in answers {
        if a.round != round {
            return Err(ProtocolError::Mismatch("answer from a different round"));
        }
        if a.server_id >= pts.n || slots[a.server_id].is_some() {
            return Err(ProtocolError::Mismatch("answers must cover each server exactly once"));
        }
        slots[a.server_id] = Some(match a.payload {
            AnswerPayload::Value(v) => Slot::Value(v),
            AnswerPayload::Missing => Slot::Erased,
        });
    }
    let slots: Vec<Slot> = slots.into_iter().map(Option::unwrap).collect();
    let wrap = |source: RsError| ProtocolError::RoundFailed { round, source };
    let word = ReceivedWord::new(pts.alpha.clone(), slots).map_err(wrap)?;
    let zeta = decode_rs(f, &word, params.codeword_dim(), params.b).map_err(wrap)?;
    let cols = pts.window(round);
    Ok(pts
        .beta
        .iter()
        .map(|row| row[cols.clone()].iter().map(|&b| zeta.eval(f, b)).collect())
        .collect())
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, Default)]
pub struct OpCounters {
    pub storage_encode: u64,
    pub query_build: u64,
    pub server_total: u64,
    pub server_max: u64,
    pub decode: u64,
}

impl OpCounters {
    pub fn total(&self) -> u64 {
        self.storage_encode + self.query_build + self.server_total + self.decode
    }
}

/// Every message that crossed the wire, in deterministic order, plus the
/// per-role field-operation counters.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum TranscriptRecord {
    Query { round: usize, server_id: usize, coords: Vec<Vec<Fe>> },
    Answer { round: usize, server_id: usize, payload: AnswerPayload },
}

#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct Transcript {
    pub records: Vec<TranscriptRecord>,
    pub counters: OpCounters,
}

impl Transcript {
    pub fn download_symbols(&self) -> u64 {
        self.records
            .iter()
            .filter(|r| matches!(r, TranscriptRecord::Answer { payload: AnswerPayload::Value(_), .. }))
            .count() as u64
    }

    pub fn upload_symbols(&self) -> u64 {
        self.records
            .iter()
            .map(|r| match r {
                TranscriptRecord::Query { coords, .. } => {
                    coords.iter().map(Vec::len).sum::<usize>() as u64
                }
                TranscriptRecord::Answer { .. } => 0,
            })
            .sum()
    }

    /// One line per record; stable bytes for a fixed seed.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for r in &self.records {
            match r {
                TranscriptRecord::Query { round, server_id, coords } => {
                    let payload: Vec<String> = coords
                        .iter()
                        .map(|v| v.iter().map(Fe::to_string).collect::<Vec<_>>().join(","))
                        .collect();
                    out.push_str(&format!(
                        "round={round} dir=query server={server_id} payload={}\n",
                        payload.join(";")
                    ));
                }
                TranscriptRecord::Answer { round, server_id, payload } => {
                    let p = match payload {
                        AnswerPayload::Value(v) => v.to_string(),
                        AnswerPayload::Missing => "-".to_string(),
                    };
                    out.push_str(&format!("round={round} dir=answer server={server_id} payload={p}\n"));
                }
            }
        }
        out
    }
}

fn validate_faults(
    faults: &[RoundFaults],
    params: &SystemParams,
) -> Result<(), ProtocolError> {
    if faults.len() != params.s {
        return Err(ProtocolError::Mismatch("adversary plan must cover every round"));
    }
    for (round, rf) in faults.iter().enumerate() {
        let bad = rf.byzantine.len() > params.b
            || rf.silent.len() > params.u
            || rf.byzantine.iter().any(|n| *n >= params.n)
            || rf.silent.iter().any(|n| *n >= params.n)
            || rf.byzantine.iter().any(|n| rf.silent.contains(n))
            || (1..rf.byzantine.len()).any(|i| rf.byzantine[i..].contains(&rf.byzantine[i - 1]))
            || (1..rf.silent.len()).any(|i| rf.silent[i..].contains(&rf.silent[i - 1]));
        if bad {
            return Err(ProtocolError::AdversaryBudget { round });
        }
    }
    Ok(())
}

/// Run the full exchange: encode storage once, then for each round build
/// queries, collect (possibly tampered) answers, and decode. Rounds share no
/// state beyond the storage encoding; all randomness is split off the master
/// seed by purpose, so a run is reproducible from `(inputs, seed)`.
pub fn run_protocol(
    theta: usize,
    files: &FileSet,
    candidates: &[MultiPoly],
    params: &SystemParams,
    faults: &[RoundFaults],
    tamper: TamperRule,
    seed: u64,
) -> Result<(DesiredEvals, Transcript), ProtocolError> {
    if candidates.len() != params.p {
        return Err(ProtocolError::Mismatch("candidate count must equal P"));
    }
    if theta >= params.p {
        return Err(ProtocolError::ThetaOutOfRange { theta, p: params.p });
    }
    if candidates.iter().any(|c| c.vars() != params.m) {
        return Err(ProtocolError::Mismatch("candidates must be polynomials in M variables"));
    }
    if candidates.iter().any(|c| c.total_degree() as usize > params.g) {
        return Err(ProtocolError::BadParam("candidate total degree exceeds G"));
    }
    if files.num_files() != params.m {
        return Err(ProtocolError::Mismatch("file count must equal M"));
    }
    validate_faults(faults, params)?;

    let storage_f = params.field();
    let client_f = params.field();
    let adversary_f = params.field();
    let server_fs: Vec<Field> = (0..params.n).map(|_| params.field()).collect();

    let pts = params.points(&client_f)?;
    let basis = span_basis(&client_f, candidates)?;

    // One independent generator per purpose: consumption in one (a tamper
    // draw, say) must never shift another purpose's sequence.
    let rng_for = |stream: u64| {
        let mut r = ChaCha8Rng::seed_from_u64(seed);
        r.set_stream(stream);
        r
    };
    let (states, _noise) = encode_storage(&storage_f, &pts, files, &mut rng_for(1))?;
    let cr = CommonRandomness::random(&storage_f, params, &mut rng_for(2));

    let mut v = vec![vec![Fe::ZERO; params.k]; params.l];
    let mut records = Vec::new();
    let mut decode_ops = 0u64;
    for round in 0..params.s {
        let mut query_rng = rng_for(100 + round as u64);
        let (queries, _qnoise) =
            build_round_queries(&client_f, &pts, &basis, theta, round, params.t, &mut query_rng)?;
        for q in &queries {
            records.push(TranscriptRecord::Query {
                round,
                server_id: q.server_id,
                coords: q.coords.clone(),
            });
        }
        let mut tamper_rng = rng_for(200 + round as u64);
        let rf = &faults[round];
        let answers: Vec<RoundAnswer> = (0..params.n)
            .map(|n| -> Result<RoundAnswer, ProtocolError> {
                let payload = if rf.silent.contains(&n) {
                    AnswerPayload::Missing
                } else {
                    let honest = server_answer(
                        &server_fs[n],
                        &states[n],
                        &queries[n],
                        &cr.rounds[round],
                        &basis,
                        &pts,
                    )?;
                    let sent = if rf.byzantine.contains(&n) {
                        match tamper {
                            TamperRule::AvoidTrue => {
                                adversary_f.add(honest, adversary_f.rand_nonzero(&mut tamper_rng))
                            }
                            TamperRule::Uniform => adversary_f.rand(&mut tamper_rng),
                        }
                    } else {
                        honest
                    };
                    AnswerPayload::Value(sent)
                };
                Ok(RoundAnswer { server_id: n, round, payload })
            })
            .collect::<Result<_, _>>()?;
        for a in &answers {
            records.push(TranscriptRecord::Answer {
                round,
                server_id: a.server_id,
                payload: a.payload,
            });
        }
        let before = client_f.op_count();
        let block = decode_round(&client_f, &answers, round, &pts, params)?;
        decode_ops += client_f.op_count() - before;
        for (l, row) in block.iter().enumerate() {
            for (d, &val) in row.iter().enumerate() {
                v[l][round * params.delta + d] = val;
            }
        }
    }

    let server_ops: Vec<u64> = server_fs.iter().map(Field::op_count).collect();
    let counters = OpCounters {
        storage_encode: storage_f.op_count(),
        query_build: client_f.op_count() - decode_ops,
        server_total: server_ops.iter().sum(),
        server_max: server_ops.iter().copied().max().unwrap_or(0),
        decode: decode_ops,
    };
    Ok((DesiredEvals { v }, Transcript { records, counters }))
}
