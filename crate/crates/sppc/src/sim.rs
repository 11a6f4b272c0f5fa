//! Config-driven simulation harness. A run is fully described by one TOML
//! config (sizes, candidates, adversary, seed); from that it derives the
//! system, executes the protocol under the configured faults, verifies the
//! decoded table against direct plaintext evaluation, and accounts every
//! rate as an exact rational.
//!
//! The rate identities are checked inside `simulate`, not just reported:
//! measured upload must equal `S*N*L*F` and `K*N*E*F / gcd(K,E)^2`, measured
//! shared randomness per evaluation must equal `(G(K+X-1)+T)/E`, and when the
//! adversary silences exactly `U` servers each round the download rate must
//! equal `E/(N-U)`. A mismatch is an error, never a rounding.

use num::rational::Ratio;
use rand::{seq::index::sample, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;
use thiserror::Error;

use crate::field::{Fe, Field, FieldError};
use crate::mvpoly::{span_basis, MultiPoly, MvError};
use crate::protocol::{
    derive_params, run_protocol, DesiredEvals, OpCounters, ParamInput, ProtocolError,
    RoundFaults, SystemParams, TamperRule, Transcript,
};
use crate::storage::{FileSet, StorageError};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SimError {
    #[error("config error: {0}")]
    Config(String),
    #[error("metrics identity violated: {0}")]
    MetricsMismatch(String),
    #[error(transparent)]
    Protocol(#[from] ProtocolError),
    #[error(transparent)]
    Span(#[from] MvError),
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Storage(#[from] StorageError),
}

/// Per-round fault directives plus the substitution rule for Byzantine
/// answers.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct AdversaryPlan {
    pub rounds: Vec<RoundFaults>,
    pub tamper: TamperRule,
}

/// Adversary families. `Random` re-draws disjoint identity sets every round
/// and always spends the full `B` and `U` budgets; `WorstSlot` corrupts the
/// same identities in every round; `Fixed` uses caller-given sets verbatim.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum AdversaryKind {
    None,
    Random,
    Fixed { byzantine: Vec<usize>, silent: Vec<usize> },
    WorstSlot,
}

pub fn make_adversary(
    kind: &AdversaryKind,
    params: &SystemParams,
    seed: u64,
) -> Result<AdversaryPlan, SimError> {
    let rounds = match kind {
        AdversaryKind::None => vec![RoundFaults::default(); params.s],
        AdversaryKind::Random => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(5);
            (0..params.s)
                .map(|_| {
                    let picks = sample(&mut rng, params.n, params.b + params.u).into_vec();
                    RoundFaults {
                        byzantine: picks[..params.b].to_vec(),
                        silent: picks[params.b..].to_vec(),
                    }
                })
                .collect()
        }
        AdversaryKind::Fixed { byzantine, silent } => {
            let rf = RoundFaults { byzantine: byzantine.clone(), silent: silent.clone() };
            vec![rf; params.s]
        }
        AdversaryKind::WorstSlot => {
            let rf = RoundFaults {
                byzantine: (0..params.b).collect(),
                silent: (params.b..params.b + params.u).collect(),
            };
            vec![rf; params.s]
        }
    };
    for (round, rf) in rounds.iter().enumerate() {
        if rf.byzantine.len() > params.b
            || rf.silent.len() > params.u
            || rf.byzantine.iter().chain(&rf.silent).any(|n| *n >= params.n)
            || rf.byzantine.iter().any(|n| rf.silent.contains(n))
        {
            return Err(SimError::Config(format!(
                "adversary sets violate the fault budget in round {round}"
            )));
        }
    }
    Ok(AdversaryPlan { rounds, tamper: TamperRule::AvoidTrue })
}

#[derive(Clone, PartialEq, Eq, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AdversaryConfig {
    pub kind: String,
    #[serde(default)]
    pub byzantine: Vec<usize>,
    #[serde(default)]
    pub silent: Vec<usize>,
    #[serde(default)]
    pub allow_honest_value: bool,
}

/// One experiment. `candidates` hold serialized polynomials in the text form
/// of the span module; `files` may be given inline (values below `q`) or
/// omitted to be drawn uniformly from the seed.
#[derive(Clone, PartialEq, Eq, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    #[serde(alias = "N")]
    pub n: usize,
    #[serde(alias = "K")]
    pub k: usize,
    #[serde(alias = "X")]
    pub x: usize,
    #[serde(alias = "T")]
    pub t: usize,
    #[serde(alias = "B")]
    pub b: usize,
    #[serde(alias = "U")]
    pub u: usize,
    #[serde(alias = "G")]
    pub g: usize,
    #[serde(alias = "M")]
    pub m: usize,
    pub q: Option<u64>,
    pub seed: u64,
    pub theta: usize,
    pub candidates: Vec<String>,
    pub files: Option<Vec<Vec<Vec<u64>>>>,
    pub adversary: Option<AdversaryConfig>,
}

impl SimConfig {
    pub fn from_toml_str(text: &str) -> Result<SimConfig, SimError> {
        toml::from_str(text).map_err(|e| SimError::Config(e.to_string()))
    }

    pub fn param_input(&self) -> ParamInput {
        ParamInput {
            n: self.n,
            k: self.k,
            x: self.x,
            t: self.t,
            b: self.b,
            u: self.u,
            g: self.g,
            m: self.m,
            p: self.candidates.len(),
            q: self.q,
        }
    }

    pub fn adversary_kind(&self) -> Result<AdversaryKind, SimError> {
        let Some(adv) = &self.adversary else { return Ok(AdversaryKind::None) };
        match adv.kind.as_str() {
            "none" => Ok(AdversaryKind::None),
            "random" => Ok(AdversaryKind::Random),
            "worst_slot" => Ok(AdversaryKind::WorstSlot),
            "fixed" => Ok(AdversaryKind::Fixed {
                byzantine: adv.byzantine.clone(),
                silent: adv.silent.clone(),
            }),
            other => Err(SimError::Config(format!("unknown adversary kind '{other}'"))),
        }
    }
}

/// Exact accounting for one run.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct Metrics {
    pub rate_ppc: Ratio<u64>,
    pub rate_secrecy: Ratio<u64>,
    pub upload_symbols: u64,
    pub download_symbols: u64,
    pub rounds: usize,
    pub ops: OpCounters,
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct SimOutcome {
    pub params: SystemParams,
    pub span_dim: usize,
    pub evals: DesiredEvals,
    pub metrics: Metrics,
    pub transcript: Transcript,
    pub verdict: bool,
}

fn decimal(r: Ratio<u64>) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

impl SimOutcome {
    /// Structured metrics report; byte-stable for a fixed config and seed.
    pub fn report(&self, cfg: &SimConfig) -> String {
        let p = &self.params;
        let m = &self.metrics;
        let mut out = String::new();
        out.push_str(&format!(
            "params: N={} K={} X={} T={} B={} U={} G={} M={} P={} q={} seed={} theta={}\n",
            p.n, p.k, p.x, p.t, p.b, p.u, p.g, p.m, p.p, p.q, cfg.seed, cfg.theta
        ));
        out.push_str(&format!(
            "derived: E={} Delta={} L={} S={} F={}\n",
            p.e, p.delta, p.l, p.s, self.span_dim
        ));
        out.push_str(&format!("rate_ppc: {} ({:.6})\n", m.rate_ppc, decimal(m.rate_ppc)));
        out.push_str(&format!(
            "rate_secrecy: {} ({:.6})\n",
            m.rate_secrecy,
            decimal(m.rate_secrecy)
        ));
        out.push_str(&format!("upload_symbols: {}\n", m.upload_symbols));
        out.push_str(&format!("download_symbols: {}\n", m.download_symbols));
        out.push_str(&format!(
            "verdict: {}\n",
            if self.verdict { "correct" } else { "INCORRECT" }
        ));
        out.push_str(&format!(
            "field_ops: storage={} query={} server_total={} server_max={} decode={}\n",
            m.ops.storage_encode, m.ops.query_build, m.ops.server_total, m.ops.server_max,
            m.ops.decode
        ));
        out
    }
}

fn inline_files(
    f: &Field,
    cfg: &SimConfig,
    params: &SystemParams,
) -> Result<Option<FileSet>, SimError> {
    let Some(raw) = &cfg.files else { return Ok(None) };
    let ok_shape = raw.len() == params.m
        && raw.iter().all(|file| {
            file.len() == params.l && file.iter().all(|row| row.len() == params.k)
        });
    if !ok_shape {
        return Err(SimError::Config("inline files must be M x L x K".into()));
    }
    let mut cells = Vec::with_capacity(params.m);
    for file in raw {
        let mut rows = Vec::with_capacity(params.l);
        for row in file {
            if row.iter().any(|&v| v >= f.modulus()) {
                return Err(SimError::Config("inline file value outside the field".into()));
            }
            rows.push(row.iter().map(|&v| f.elem(v)).collect());
        }
        cells.push(rows);
    }
    Ok(Some(FileSet::new(cells)?))
}

pub fn simulate(cfg: &SimConfig) -> Result<SimOutcome, SimError> {
    let params = derive_params(cfg.param_input())?;
    let f = params.field();
    let candidates: Vec<MultiPoly> = cfg
        .candidates
        .iter()
        .map(|text| MultiPoly::parse(&f, params.m, text))
        .collect::<Result<_, _>>()?;
    let basis = span_basis(&f, &candidates)?;

    let files = match inline_files(&f, cfg, &params)? {
        Some(fs) => fs,
        None => {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            rng.set_stream(4);
            FileSet::random(&f, params.m, params.l, params.k, &mut rng)
        }
    };
    let plan = make_adversary(&cfg.adversary_kind()?, &params, cfg.seed)?;
    let tamper = if cfg.adversary.as_ref().is_some_and(|a| a.allow_honest_value) {
        TamperRule::Uniform
    } else {
        plan.tamper
    };

    let (evals, transcript) =
        run_protocol(cfg.theta, &files, &candidates, &params, &plan.rounds, tamper, cfg.seed)?;

    let mut verdict = true;
    for l in 0..params.l {
        for k in 0..params.k {
            let args: Vec<Fe> = (0..params.m).map(|m| files.cell(m, l, k)).collect();
            if evals.cell(l, k) != candidates[cfg.theta].eval(&f, &args)? {
                verdict = false;
            }
        }
    }

    let lk = (params.l * params.k) as u64;
    let download_symbols = transcript.download_symbols();
    let upload_symbols = transcript.upload_symbols();
    let metrics = Metrics {
        rate_ppc: Ratio::new(lk, download_symbols),
        rate_secrecy: Ratio::new((params.s * params.mask_count()) as u64, lk),
        upload_symbols,
        download_symbols,
        rounds: params.s,
        ops: transcript.counters,
    };

    // Accounting identities; violating any of them is a bug, not a result.
    let expected_download: u64 =
        plan.rounds.iter().map(|rf| (params.n - rf.silent.len()) as u64).sum();
    if download_symbols != expected_download {
        return Err(SimError::MetricsMismatch(format!(
            "download {download_symbols} != sum over rounds {expected_download}"
        )));
    }
    let su = (params.s * params.n * params.l * basis.dim()) as u64;
    let via_gcd = (params.k * params.n * params.e * basis.dim()) as u64
        / (params.delta * params.delta) as u64;
    if upload_symbols != su || upload_symbols != via_gcd {
        return Err(SimError::MetricsMismatch(format!(
            "upload {upload_symbols} != S*N*L*F {su} or K*N*E*F/gcd^2 {via_gcd}"
        )));
    }
    if metrics.rate_secrecy != Ratio::new(params.mask_count() as u64, params.e as u64) {
        return Err(SimError::MetricsMismatch(
            "secrecy rate differs from (G(K+X-1)+T)/E".into(),
        ));
    }
    if plan.rounds.iter().all(|rf| rf.silent.len() == params.u)
        && metrics.rate_ppc != Ratio::new(params.e as u64, (params.n - params.u) as u64)
    {
        return Err(SimError::MetricsMismatch(
            "download rate differs from E/(N-U) with exactly U silent per round".into(),
        ));
    }

    Ok(SimOutcome { params, span_dim: basis.dim(), evals, metrics, transcript, verdict })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::protocol::{AnswerPayload, TranscriptRecord};

    fn worked_example_toml(seed: u64) -> String {
        format!(
            r#"
n = 21
k = 4
x = 2
t = 2
b = 1
u = 1
g = 2
m = 2
seed = {seed}
theta = 0
candidates = ["1,1:1 0,1:5", "2,0:3"]
[adversary]
kind = "random"
"#
        )
    }

    #[test]
    fn worked_example_rates_and_verdict() {
        let cfg = SimConfig::from_toml_str(&worked_example_toml(7)).unwrap();
        let out = simulate(&cfg).unwrap();
        assert!(out.verdict);
        assert_eq!(out.params.q, 29);
        assert_eq!(out.metrics.rate_ppc, Ratio::new(3, 10));
        assert_eq!(out.metrics.rate_secrecy, Ratio::new(2, 1));
        assert_eq!(out.span_dim, 2);
        assert_eq!(out.metrics.upload_symbols, 252);
        assert_eq!(out.metrics.download_symbols, 40);
        let report = out.report(&cfg);
        assert!(report.contains("rate_ppc: 3/10 (0.300000)"));
        assert!(report.contains("rate_secrecy: 2 (2.000000)"));
        assert!(report.contains("verdict: correct"));
    }

    #[test]
    fn degraded_setting_reaches_e_over_n() {
        // No faults, no storage noise, T=1: download rate E/N with
        // E = N - (G(K-1)+1).
        let cfg = SimConfig::from_toml_str(
            r#"
n = 10
k = 3
x = 0
t = 1
b = 0
u = 0
g = 1
m = 1
seed = 3
theta = 0
candidates = ["1:4"]
"#,
        )
        .unwrap();
        let out = simulate(&cfg).unwrap();
        assert_eq!(out.params.e, 7);
        assert_eq!(out.metrics.rate_ppc, Ratio::new(7, 10));
        assert!(out.verdict);
    }

    #[test]
    fn reports_and_transcripts_are_deterministic() {
        let cfg = SimConfig::from_toml_str(&worked_example_toml(11)).unwrap();
        let a = simulate(&cfg).unwrap();
        let b = simulate(&cfg).unwrap();
        assert_eq!(a.report(&cfg), b.report(&cfg));
        assert_eq!(a.transcript.to_text(), b.transcript.to_text());

        let other = SimConfig::from_toml_str(&worked_example_toml(12)).unwrap();
        let c = simulate(&other).unwrap();
        assert_ne!(a.transcript.to_text(), c.transcript.to_text());
    }

    #[test]
    fn random_adversary_spends_the_full_budget() {
        let cfg = SimConfig::from_toml_str(&worked_example_toml(5)).unwrap();
        let params = derive_params(cfg.param_input()).unwrap();
        let plan = make_adversary(&AdversaryKind::Random, &params, 5).unwrap();
        assert_eq!(plan.rounds.len(), params.s);
        for rf in &plan.rounds {
            assert_eq!(rf.byzantine.len(), 1);
            assert_eq!(rf.silent.len(), 1);
            assert_ne!(rf.byzantine[0], rf.silent[0]);
        }
    }

    #[test]
    fn corrupted_slots_differ_from_authentic_answers() {
        // Same seed with and without the adversary: the Byzantine slots must
        // carry a different value, everything honest must be untouched.
        let tampered_cfg = SimConfig::from_toml_str(&worked_example_toml(9)).unwrap();
        let mut honest_cfg = tampered_cfg.clone();
        honest_cfg.adversary = None;
        let tampered = simulate(&tampered_cfg).unwrap();
        let honest = simulate(&honest_cfg).unwrap();
        let params = tampered.params;
        let plan = make_adversary(&AdversaryKind::Random, &params, 9).unwrap();
        let value_of = |t: &Transcript, round: usize, server: usize| {
            t.records.iter().find_map(|r| match r {
                TranscriptRecord::Answer { round: rr, server_id, payload }
                    if *rr == round && *server_id == server =>
                {
                    Some(*payload)
                }
                _ => None,
            })
        };
        for (round, rf) in plan.rounds.iter().enumerate() {
            let byz = rf.byzantine[0];
            assert_ne!(
                value_of(&tampered.transcript, round, byz).unwrap(),
                value_of(&honest.transcript, round, byz).unwrap()
            );
            assert_eq!(
                value_of(&tampered.transcript, round, rf.silent[0]).unwrap(),
                AnswerPayload::Missing
            );
            for n in (0..params.n).filter(|n| !rf.byzantine.contains(n) && !rf.silent.contains(n))
            {
                assert_eq!(
                    value_of(&tampered.transcript, round, n).unwrap(),
                    value_of(&honest.transcript, round, n).unwrap()
                );
            }
        }
    }

    #[test]
    fn fixed_and_worst_slot_plans() {
        let cfg = SimConfig::from_toml_str(&worked_example_toml(1)).unwrap();
        let params = derive_params(cfg.param_input()).unwrap();

        let plan = make_adversary(
            &AdversaryKind::Fixed { byzantine: vec![4], silent: vec![9] },
            &params,
            0,
        )
        .unwrap();
        assert!(plan.rounds.iter().all(|rf| rf.byzantine == [4] && rf.silent == [9]));

        let plan = make_adversary(&AdversaryKind::WorstSlot, &params, 0).unwrap();
        assert!(plan.rounds.iter().all(|rf| rf.byzantine == [0] && rf.silent == [1]));

        let err = make_adversary(
            &AdversaryKind::Fixed { byzantine: vec![4, 5], silent: vec![] },
            &params,
            0,
        )
        .unwrap_err();
        assert!(matches!(err, SimError::Config(_)));

        let err = make_adversary(
            &AdversaryKind::Fixed { byzantine: vec![4], silent: vec![4] },
            &params,
            0,
        )
        .unwrap_err();
        assert!(matches!(err, SimError::Config(_)));
    }

    #[test]
    fn inline_files_are_used_verbatim() {
        let cfg = SimConfig::from_toml_str(
            r#"
n = 4
k = 1
x = 0
t = 1
b = 0
u = 0
g = 1
m = 1
seed = 0
theta = 0
candidates = ["1:2"]
files = [[[3], [5], [6]]]
"#,
        )
        .unwrap();
        let out = simulate(&cfg).unwrap();
        let f = out.params.field();
        // Candidate 2*x1 applied to each cell.
        assert_eq!(out.evals.v[0][0], f.elem(6));
        assert_eq!(out.evals.v[1][0], f.elem(10));
        assert_eq!(out.evals.v[2][0], f.elem(12 % out.params.q));
    }

    #[test]
    fn malformed_configs_are_rejected() {
        assert!(matches!(
            SimConfig::from_toml_str("n = 21"),
            Err(SimError::Config(_))
        ));
        assert!(matches!(
            SimConfig::from_toml_str(&(worked_example_toml(0) + "\nbogus_key = 3")),
            Err(SimError::Config(_))
        ));

        let mut cfg = SimConfig::from_toml_str(&worked_example_toml(0)).unwrap();
        cfg.adversary = Some(AdversaryConfig {
            kind: "chaotic".into(),
            byzantine: vec![],
            silent: vec![],
            allow_honest_value: false,
        });
        assert!(matches!(simulate(&cfg), Err(SimError::Config(_))));

        let mut cfg = SimConfig::from_toml_str(&worked_example_toml(0)).unwrap();
        cfg.candidates = vec!["not a polynomial".into(), "2,0:3".into()];
        assert!(matches!(simulate(&cfg), Err(SimError::Span(_))));

        let mut cfg = SimConfig::from_toml_str(&worked_example_toml(0)).unwrap();
        cfg.files = Some(vec![vec![vec![1, 2]; 3]; 2]);
        assert!(matches!(simulate(&cfg), Err(SimError::Config(_))));
    }

    #[test]
    fn uniform_tamper_rule_is_selected_by_config() {
        let mut cfg = SimConfig::from_toml_str(&worked_example_toml(2)).unwrap();
        cfg.adversary.as_mut().unwrap().allow_honest_value = true;
        // Possibly-honest Byzantine values still decode correctly: a wrong
        // value is corrected, an accidentally-true one needs no correction.
        let out = simulate(&cfg).unwrap();
        assert!(out.verdict);
    }
}
