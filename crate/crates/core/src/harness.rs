//! Referee, strategy registry, sweeps, and the built-in verification
//! suite.
//!
//! The referee (`play`) owns the public knowledge state: strategies only
//! ever see that state, never each other's internals. After every answered
//! round it audits whatever per-round guarantees the adversary publishes
//! in its ledger, recomputing each quantity from the public state rather
//! than trusting the strategy's own bookkeeping.

use std::fmt::Write as _;
use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::adversary::{
    find_good_family, min_hitting_set, min_union, Adversary, AdversaryLedger, FixedSetAdversary,
    LedgerMode, LemmaFamilyAdversary, MinUnion, RandomAdversary, RoundClaim,
};
use crate::bounds::{bounds_for, ceil_root, ceil_with_slack, n_sequence, BoundsReport};
use crate::model::{
    verdict_valid, Answer, GameConfig, KnowledgeState, ModelError, Query, RoundRecord, Transcript,
    Verdict,
};
use crate::questioner::{KatonaParallel, KatonaSplit, Questioner, SingletonsQuestioner};
use crate::set::ElemSet;
use crate::solver::{verify_sandwich, SolverAdversary, SolverConfig, SolverQuestioner};

/// Node budget for the referee's own union recomputation during audits.
const AUDIT_UNION_BUDGET: u64 = 2_000_000;

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum PlayError {
    #[error("questioner violation in round {round}: {reason}")]
    QuestionerViolation { round: u32, reason: String },
    #[error("adversary violation in round {round}: {reason}")]
    AdversaryViolation { round: u32, reason: String },
}

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error("unknown questioner '{0}' (katona | katona-parallel | singletons | solver | random:<seed>)")]
    UnknownQuestioner(String),
    #[error("unknown adversary '{0}' (lemma | good-family | endgame-auto | solver | fixed:<ids> | random:<p>)")]
    UnknownAdversary(String),
    #[error("strategy unavailable here: {0}")]
    Strategy(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("game failed: {0}")]
    Game(#[from] PlayError),
    #[error("sweep failed: {0}")]
    Sweep(String),
}

/// One audited fact about one answered round.
#[derive(Debug, Clone, Serialize)]
pub struct LedgerCheck {
    pub round: u32,
    /// "recurrence" (sizes, threshold sequence, residual summaries) or
    /// "claim" (the round's published guarantee).
    pub kind: String,
    pub pass: bool,
    /// True when the claim was unverifiable (heuristic family search or a
    /// union search that ran out of budget), so `pass` carries no weight.
    pub skipped: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct GameResult {
    pub config: GameConfig,
    pub questioner: String,
    pub adversary: String,
    pub total_queries: u64,
    pub per_round: Vec<u64>,
    pub verdict: Verdict,
    pub verdict_valid: bool,
    pub bounds: BoundsReport,
    pub ledger_checks: Vec<LedgerCheck>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub transcript: Option<Transcript>,
}

impl GameResult {
    pub fn ledger_ok(&self) -> bool {
        self.ledger_checks.iter().all(|c| c.pass || c.skipped)
    }
}

/// Audit one answered round against the adversary's ledger, recomputing
/// everything from the post-round public state.
fn audit_round(
    ledger: &AdversaryLedger,
    post: &KnowledgeState,
    round: u32,
    batch_len: u64,
    had_yes: bool,
    d: u32,
    out: &mut Vec<LedgerCheck>,
) {
    let t = (round - 1) as usize;
    let mut pass = true;
    let mut detail = String::new();
    if ledger.ks.len() != round as usize || ledger.claims.len() != round as usize {
        pass = false;
        let _ = write!(
            detail,
            "expected {round} ks/claims entries, found {}/{}",
            ledger.ks.len(),
            ledger.claims.len()
        );
    } else {
        if ledger.ks[t] != batch_len {
            pass = false;
            let _ = write!(detail, "ledger k={}, observed {batch_len}; ", ledger.ks[t]);
        }
        if n_sequence(ledger.n0, &ledger.ks) != ledger.n_seq {
            pass = false;
            detail.push_str("threshold sequence breaks its recurrence; ");
        }
        let m = post.residual_yes.iter().map(|s| s.len() as u64).min();
        if ledger.m_current != m {
            pass = false;
            let _ = write!(
                detail,
                "ledger m={:?}, recomputed {:?}; ",
                ledger.m_current, m
            );
        }
        let ledger_all_no = ledger.mode == LedgerMode::AllNoSoFar;
        if ledger_all_no == had_yes {
            pass = false;
            detail.push_str("mode disagrees with the observed answers; ");
        }
    }
    if detail.is_empty() {
        detail.push_str("sizes, thresholds, and residual summaries agree");
    }
    out.push(LedgerCheck {
        round,
        kind: "recurrence".into(),
        pass,
        skipped: false,
        detail,
    });

    let claim = ledger.claims.get(t).cloned().unwrap_or(RoundClaim::None);
    let (pass, skipped, detail) = match claim {
        RoundClaim::None => (true, true, "no claim published".to_string()),
        RoundClaim::SingleTarget { n_t } => {
            if had_yes {
                let m = post
                    .residual_yes
                    .iter()
                    .map(|s| s.len() as u64)
                    .min()
                    .unwrap_or(u64::MAX);
                (
                    m >= n_t + 1,
                    false,
                    format!("min residual {m} vs required {}", n_t + 1),
                )
            } else {
                let free = post.free_count() as u64;
                (
                    free >= n_t,
                    false,
                    format!("all-no: {free} free vs required {n_t}"),
                )
            }
        }
        RoundClaim::MultiTarget {
            theta,
            all_no_floor,
            exact,
        } => {
            if !exact {
                (
                    true,
                    true,
                    "family search fell back to the heuristic".to_string(),
                )
            } else if had_yes {
                let mut ok = true;
                let mut unknown = false;
                let mut detail = String::new();
                for i in 1..=d {
                    match min_union(&post.residual_yes, i, post.n, AUDIT_UNION_BUDGET) {
                        MinUnion::Infinite => {}
                        MinUnion::Size(u) => {
                            let need = i as u64 * theta;
                            if u < need {
                                ok = false;
                                let _ = write!(detail, "union({i}) = {u} < {need}; ");
                            }
                        }
                        MinUnion::Unknown => unknown = true,
                    }
                }
                if detail.is_empty() {
                    detail = format!("all unions of i <= {d} residuals reach i * {theta}");
                }
                (ok, ok && unknown, detail)
            } else {
                let free = post.free_count() as u64;
                (
                    free >= all_no_floor,
                    false,
                    format!("all-no: {free} free vs required {all_no_floor}"),
                )
            }
        }
    };
    out.push(LedgerCheck {
        round,
        kind: "claim".into(),
        pass,
        skipped,
        detail,
    });
}

/// Run one game to completion. Blame is assigned precisely: out-of-range
/// queries are the questioner's fault; wrong answer counts and
/// inconsistent states are the adversary's.
pub fn play(
    cfg: GameConfig,
    questioner: &mut dyn Questioner,
    adversary: &mut dyn Adversary,
    keep_transcript: bool,
) -> Result<GameResult, PlayError> {
    let mut state = KnowledgeState::new(cfg.n);
    let mut per_round: Vec<u64> = Vec::with_capacity(cfg.r as usize);
    let mut rounds: Vec<RoundRecord> = Vec::new();
    let mut ledger_checks: Vec<LedgerCheck> = Vec::new();
    let mut had_yes = false;
    for round in 1..=cfg.r {
        let batch = questioner.queries(round, &state);
        for q in &batch {
            if let Some(&id) = q.iter().find(|&&x| x < 1 || x > cfg.n) {
                return Err(PlayError::QuestionerViolation {
                    round,
                    reason: format!("query contains element {id}, outside 1..={}", cfg.n),
                });
            }
        }
        let answers = adversary.answer(round, &state, &batch);
        if answers.len() != batch.len() {
            return Err(PlayError::AdversaryViolation {
                round,
                reason: format!("{} answers for {} queries", answers.len(), batch.len()),
            });
        }
        state.apply_round(&batch, &answers).map_err(|e| match e {
            ModelError::ElementOutOfRange { .. } => PlayError::QuestionerViolation {
                round,
                reason: e.to_string(),
            },
            other => PlayError::AdversaryViolation {
                round,
                reason: other.to_string(),
            },
        })?;
        if !state.is_consistent() {
            return Err(PlayError::AdversaryViolation {
                round,
                reason: "inconsistent: a yes-answered query has no live element".into(),
            });
        }
        had_yes |= answers.contains(&Answer::Yes);
        per_round.push(batch.len() as u64);
        if let Some(ledger) = adversary.ledger() {
            audit_round(
                ledger,
                &state,
                round,
                batch.len() as u64,
                had_yes,
                cfg.d,
                &mut ledger_checks,
            );
        }
        questioner.observe(round, &answers);
        if keep_transcript {
            rounds.push(RoundRecord {
                index: round,
                queries: batch,
                answers,
            });
        }
    }
    let verdict = questioner.verdict(&state);
    let valid = verdict_valid(&state, &verdict, cfg.d);
    let bounds = bounds_for(cfg.n as u64, cfg.d as u64, cfg.r)
        .expect("a valid game config always has a bounds report");
    let transcript = keep_transcript.then(|| Transcript {
        config: cfg,
        rounds,
        verdict: verdict.clone(),
    });
    Ok(GameResult {
        config: cfg,
        questioner: questioner.name(),
        adversary: adversary.name(),
        total_queries: per_round.iter().sum(),
        per_round,
        verdict,
        verdict_valid: valid,
        bounds,
        ledger_checks,
        transcript,
    })
}

/// Verdict from forced elements alone: claim the first `d` forced
/// singletons, otherwise claim there are fewer than `d`.
pub fn forced_verdict(state: &KnowledgeState, d: u32) -> Verdict {
    let forced = state.forced_excellent().unwrap_or_default();
    if forced.len() >= d as usize {
        Verdict::Found {
            elements: forced[..d as usize].to_vec(),
        }
    } else {
        Verdict::FewerThanD
    }
}

/// Seeded baseline questioner: a few random nonempty subsets of the free
/// elements each round. Exists to exercise adversaries, not to win.
pub struct RandomQuestioner {
    d: u32,
    r: u32,
    n: u32,
    seed: u64,
    rng: ChaCha8Rng,
}

impl RandomQuestioner {
    pub fn new(cfg: GameConfig, seed: u64) -> Self {
        RandomQuestioner {
            d: cfg.d,
            r: cfg.r,
            n: cfg.n,
            seed,
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }
}

impl Questioner for RandomQuestioner {
    fn name(&self) -> String {
        format!("random:{}", self.seed)
    }

    fn queries(&mut self, _round: u32, state: &KnowledgeState) -> Vec<Query> {
        let free: Vec<u32> = state.free_elements().iter().collect();
        if free.is_empty() {
            return Vec::new();
        }
        let cap = 2 * ceil_root(self.n as u64, self.r) + 2;
        let count = self.rng.gen_range(1..=cap);
        (0..count)
            .map(|_| {
                let mut q: Vec<u32> = free
                    .iter()
                    .copied()
                    .filter(|_| self.rng.gen_bool(0.5))
                    .collect();
                if q.is_empty() {
                    q.push(free[self.rng.gen_range(0..free.len())]);
                }
                q
            })
            .collect()
    }

    fn observe(&mut self, _round: u32, _answers: &[Answer]) {}

    fn verdict(&mut self, state: &KnowledgeState) -> Verdict {
        forced_verdict(state, self.d)
    }
}

/// Plays a fixed per-round script; rounds beyond the script are empty.
pub struct ScriptedQuestioner {
    d: u32,
    script: Vec<Vec<Query>>,
}

impl ScriptedQuestioner {
    pub fn new(d: u32, script: Vec<Vec<Query>>) -> Self {
        ScriptedQuestioner { d, script }
    }
}

impl Questioner for ScriptedQuestioner {
    fn name(&self) -> String {
        "scripted".to_string()
    }

    fn queries(&mut self, round: u32, _state: &KnowledgeState) -> Vec<Query> {
        self.script
            .get(round as usize - 1)
            .cloned()
            .unwrap_or_default()
    }

    fn observe(&mut self, _round: u32, _answers: &[Answer]) {}

    fn verdict(&mut self, state: &KnowledgeState) -> Verdict {
        forced_verdict(state, self.d)
    }
}

/// Negative-control fixture: affirms everything once, then denies
/// everything, which contradicts itself as soon as a yes-set is covered
/// by later denials. The referee must catch it.
pub struct CorruptedAdversary;

impl Adversary for CorruptedAdversary {
    fn name(&self) -> String {
        "corrupted".to_string()
    }

    fn answer(&mut self, round: u32, _state: &KnowledgeState, queries: &[Query]) -> Vec<Answer> {
        let a = if round == 1 { Answer::Yes } else { Answer::No };
        vec![a; queries.len()]
    }
}

pub fn make_questioner(
    name: &str,
    cfg: GameConfig,
) -> Result<Box<dyn Questioner>, HarnessError> {
    let incompat = |e: &dyn std::fmt::Display| HarnessError::Strategy(e.to_string());
    match name {
        "katona" => Ok(Box::new(KatonaSplit::new(cfg).map_err(|e| incompat(&e))?)),
        "katona-parallel" => Ok(Box::new(
            KatonaParallel::new(cfg).map_err(|e| incompat(&e))?,
        )),
        "singletons" => Ok(Box::new(SingletonsQuestioner::new(cfg))),
        "solver" => Ok(Box::new(
            SolverQuestioner::new(cfg, &SolverConfig::from_env()).map_err(|e| incompat(&e))?,
        )),
        s => {
            if let Some(seed) = s.strip_prefix("random:") {
                let seed: u64 = seed
                    .parse()
                    .map_err(|_| HarnessError::UnknownQuestioner(s.to_string()))?;
                Ok(Box::new(RandomQuestioner::new(cfg, seed)))
            } else {
                Err(HarnessError::UnknownQuestioner(s.to_string()))
            }
        }
    }
}

pub fn make_adversary(
    name: &str,
    cfg: GameConfig,
    seed: u64,
) -> Result<Box<dyn Adversary>, HarnessError> {
    match name {
        // Both spellings build the same strategy; it specializes on d and
        // reports its own name accordingly.
        "lemma" | "good-family" => Ok(Box::new(LemmaFamilyAdversary::plain(cfg))),
        "endgame-auto" => Ok(Box::new(LemmaFamilyAdversary::endgame_auto(cfg))),
        "solver" => Ok(Box::new(
            SolverAdversary::new(cfg, &SolverConfig::from_env())
                .map_err(|e| HarnessError::Strategy(e.to_string()))?,
        )),
        s => {
            if let Some(ids) = s.strip_prefix("fixed:") {
                let mut hidden = ElemSet::empty(cfg.n);
                for part in ids.split(',').filter(|p| !p.is_empty()) {
                    let id: u32 = part
                        .trim()
                        .parse()
                        .map_err(|_| HarnessError::UnknownAdversary(s.to_string()))?;
                    if id < 1 || id > cfg.n {
                        return Err(HarnessError::Strategy(format!(
                            "fixed set element {id} outside 1..={}",
                            cfg.n
                        )));
                    }
                    hidden.insert(id);
                }
                Ok(Box::new(FixedSetAdversary::new(hidden)))
            } else if let Some(p) = s.strip_prefix("random:") {
                let p: f64 = p
                    .parse()
                    .map_err(|_| HarnessError::UnknownAdversary(s.to_string()))?;
                if !(0.0..=1.0).contains(&p) {
                    return Err(HarnessError::Strategy(format!(
                        "yes-probability {p} outside [0, 1]"
                    )));
                }
                Ok(Box::new(RandomAdversary::new(p, seed)))
            } else {
                Err(HarnessError::UnknownAdversary(s.to_string()))
            }
        }
    }
}

/// The adversaries every bound-carrying questioner is tested against:
/// both claim-publishing strategies, three truthful oracles (empty,
/// singleton, seeded random hidden set), and two noise makers.
pub fn suite_adversaries(cfg: GameConfig, seed: u64) -> Vec<Box<dyn Adversary>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let hidden = ElemSet::from_ids(cfg.n, (1..=cfg.n).filter(|_| rng.gen_bool(0.5)));
    vec![
        Box::new(LemmaFamilyAdversary::endgame_auto(cfg)),
        Box::new(LemmaFamilyAdversary::plain(cfg)),
        Box::new(FixedSetAdversary::new(ElemSet::empty(cfg.n))),
        Box::new(FixedSetAdversary::new(ElemSet::from_ids(cfg.n, [1]))),
        Box::new(FixedSetAdversary::new(hidden)),
        Box::new(RandomAdversary::new(0.3, rng.gen())),
        Box::new(RandomAdversary::new(0.7, rng.gen())),
    ]
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepFormat {
    Csv,
    Json,
}

#[derive(Debug, Clone)]
pub struct SweepSpec {
    pub ns: Vec<u32>,
    pub ds: Vec<u32>,
    pub rs: Vec<u32>,
    pub questioners: Vec<String>,
    pub adversaries: Vec<String>,
    pub seed: u64,
    pub format: SweepFormat,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct SweepSummary {
    pub rows: u64,
    pub bound_violations: u64,
}

#[derive(Debug, Clone, Serialize)]
struct SweepRow {
    n: u32,
    d: u32,
    r: u32,
    questioner: String,
    adversary: String,
    total_queries: u64,
    lower: f64,
    upper_alg: u64,
    verdict: String,
    valid: bool,
}

pub fn verdict_label(v: &Verdict) -> String {
    match v {
        Verdict::Found { elements } => {
            let ids: Vec<String> = elements.iter().map(|e| e.to_string()).collect();
            format!("found:{}", ids.join(";"))
        }
        Verdict::FewerThanD => "fewer_than_d".to_string(),
    }
}

fn mix_seed(seed: u64, idx: u64) -> u64 {
    // splitmix64 step, so per-row seeds do not correlate.
    let mut z = seed
        .wrapping_add(idx.wrapping_mul(0x9E37_79B9_7F4A_7C15))
        .wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Whether this row breaks a bound it is actually subject to: the
/// guarantee-carrying questioners must stay at or under the algorithmic
/// upper bound with a valid verdict against everyone, and any valid finish
/// against the claim-enforcing adversary must pay the formula lower bound.
fn row_violates(result: &GameResult) -> bool {
    let upper_carrier = matches!(
        result.questioner.as_str(),
        "katona" | "katona-parallel" | "solver"
    );
    if upper_carrier
        && (!result.verdict_valid || result.total_queries > result.bounds.upper_algorithmic)
    {
        return true;
    }
    if result.adversary == "endgame-auto" && result.verdict_valid {
        let need = ceil_with_slack(result.bounds.lower);
        if need > 0 && (result.total_queries as i64) < need {
            return true;
        }
    }
    !result.ledger_ok()
}

fn sweep_row(result: &GameResult) -> SweepRow {
    SweepRow {
        n: result.config.n,
        d: result.config.d,
        r: result.config.r,
        questioner: result.questioner.clone(),
        adversary: result.adversary.clone(),
        total_queries: result.total_queries,
        lower: result.bounds.lower,
        upper_alg: result.bounds.upper_algorithmic,
        verdict: verdict_label(&result.verdict),
        valid: result.verdict_valid,
    }
}

/// Run the grid in deterministic order, producing one row per playable
/// combination. Combos whose config is invalid (d > n corners of a cross
/// product) or whose questioner/adversary cannot play that config are
/// skipped; a failed game or an unknown strategy name aborts after the
/// already-produced rows reach `emit`.
fn sweep_rows(
    spec: &SweepSpec,
    mut emit: impl FnMut(SweepRow) -> Result<(), HarnessError>,
) -> (SweepSummary, Option<String>) {
    let mut summary = SweepSummary {
        rows: 0,
        bound_violations: 0,
    };
    let mut idx: u64 = 0;
    for &n in &spec.ns {
        for &d in &spec.ds {
            for &r in &spec.rs {
                let Ok(cfg) = GameConfig::new(n, d, r) else {
                    continue;
                };
                for qname in &spec.questioners {
                    for aname in &spec.adversaries {
                        idx += 1;
                        let seed = mix_seed(spec.seed, idx);
                        let mut q = match make_questioner(qname, cfg) {
                            Ok(q) => q,
                            Err(HarnessError::Strategy(_)) => continue,
                            Err(e) => return (summary, Some(e.to_string())),
                        };
                        let mut a = match make_adversary(aname, cfg, seed) {
                            Ok(a) => a,
                            Err(HarnessError::Strategy(_)) => continue,
                            Err(e) => return (summary, Some(e.to_string())),
                        };
                        let result = match play(cfg, q.as_mut(), a.as_mut(), false) {
                            Ok(result) => result,
                            Err(e) => return (summary, Some(e.to_string())),
                        };
                        summary.rows += 1;
                        summary.bound_violations += row_violates(&result) as u64;
                        if let Err(e) = emit(sweep_row(&result)) {
                            return (summary, Some(e.to_string()));
                        }
                    }
                }
            }
        }
    }
    (summary, None)
}

/// Stream the grid's rows to `out`. The trailer reports row and violation
/// counts; a mid-sweep failure still flushes the rows produced so far,
/// with an error trailer in place of the summary.
pub fn sweep<W: Write>(spec: &SweepSpec, out: W) -> Result<SweepSummary, HarnessError> {
    match spec.format {
        SweepFormat::Csv => {
            let mut wtr = csv::WriterBuilder::new().has_headers(false).from_writer(out);
            wtr.write_record([
                "n",
                "d",
                "r",
                "questioner",
                "adversary",
                "total_queries",
                "lower",
                "upper_alg",
                "verdict",
                "valid",
            ])
            .map_err(|e| HarnessError::Sweep(e.to_string()))?;
            let (summary, err) = sweep_rows(spec, |row| {
                wtr.serialize(row)
                    .map_err(|e| HarnessError::Sweep(e.to_string()))
            });
            let mut out = wtr
                .into_inner()
                .map_err(|e| HarnessError::Sweep(e.to_string()))?;
            match err {
                None => {
                    writeln!(
                        out,
                        "# summary: rows={} bound_violations={}",
                        summary.rows, summary.bound_violations
                    )?;
                    Ok(summary)
                }
                Some(msg) => {
                    writeln!(out, "# error: {msg}")?;
                    Err(HarnessError::Sweep(msg))
                }
            }
        }
        SweepFormat::Json => {
            #[derive(Serialize)]
            struct Doc {
                rows: Vec<SweepRow>,
                summary: SweepSummary,
                #[serde(skip_serializing_if = "Option::is_none")]
                error: Option<String>,
            }
            let mut rows: Vec<SweepRow> = Vec::new();
            let (summary, err) = sweep_rows(spec, |row| {
                rows.push(row);
                Ok(())
            });
            let doc = Doc {
                rows,
                summary,
                error: err.clone(),
            };
            let mut out = out;
            serde_json::to_writer_pretty(&mut out, &doc)
                .map_err(|e| HarnessError::Sweep(e.to_string()))?;
            writeln!(out)?;
            match err {
                None => Ok(summary),
                Some(msg) => Err(HarnessError::Sweep(msg)),
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VerifyLevel {
    Quick,
    Full,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyRow {
    pub invariant: String,
    pub pass: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyReport {
    pub rows: Vec<VerifyRow>,
    pub pass: bool,
}

fn vrow(rows: &mut Vec<VerifyRow>, invariant: &str, pass: bool, detail: String) {
    rows.push(VerifyRow {
        invariant: invariant.to_string(),
        pass,
        detail,
    });
}

/// Exact re-check of the no-family guarantee: over the queries outside the
/// family, no tuple of up to `d` sets may add fewer than `i * theta` new
/// elements beyond the family's union.
fn family_is_good(fam: &[Vec<u32>], members: &[usize], theta: u64, d: u32, n: u32) -> bool {
    let mut union_a = ElemSet::empty(n);
    for &j in members {
        for &e in &fam[j] {
            union_a.insert(e);
        }
    }
    let outside: Vec<usize> = (0..fam.len()).filter(|j| !members.contains(j)).collect();
    fn rec(
        fam: &[Vec<u32>],
        outside: &[usize],
        from: usize,
        depth: u32,
        max_depth: u32,
        acc: &ElemSet,
        base: &ElemSet,
        theta: u64,
    ) -> bool {
        for (pos, &j) in outside.iter().enumerate().skip(from) {
            let mut next = acc.clone();
            for &e in &fam[j] {
                if !base.contains(e) {
                    next.insert(e);
                }
            }
            let i = depth + 1;
            if (next.len() as u64) < i as u64 * theta {
                return false; // violating tuple found
            }
            if i < max_depth
                && !rec(fam, outside, pos + 1, i, max_depth, &next, base, theta)
            {
                return false;
            }
        }
        true
    }
    rec(
        fam,
        &outside,
        0,
        0,
        d,
        &ElemSet::empty(n),
        &union_a,
        theta,
    )
}

fn brute_min_hitting_size(family: &[Vec<u32>], universe: u32) -> Option<u32> {
    let elems: Vec<u32> = (1..=universe).collect();
    for size in 0..=elems.len() {
        let mut pick: Vec<usize> = Vec::new();
        if brute_pick(family, &elems, 0, size, &mut pick) {
            return Some(size as u32);
        }
    }
    None
}

fn brute_pick(
    family: &[Vec<u32>],
    elems: &[u32],
    from: usize,
    size: usize,
    pick: &mut Vec<usize>,
) -> bool {
    if pick.len() == size {
        return family.iter().all(|m| {
            m.iter()
                .any(|e| pick.iter().any(|&p| elems[p] == *e))
        });
    }
    for j in from..elems.len() {
        pick.push(j);
        if brute_pick(family, elems, j + 1, size, pick) {
            return true;
        }
        pick.pop();
    }
    false
}

/// Self-check suite: replays the documented example games, stress-tests
/// every published per-round guarantee, cross-checks the exact searches
/// against brute force, runs a negative control through the referee, and
/// confirms sweep determinism. `Full` adds the exact-solver grid and its
/// two witness properties.
pub fn verify(level: VerifyLevel) -> VerifyReport {
    let mut rows: Vec<VerifyRow> = Vec::new();

    // Referee examples with known traces.
    {
        let cfg = GameConfig::new(9, 1, 2).unwrap();
        let mut q = KatonaSplit::new(cfg).unwrap();
        let mut a = LemmaFamilyAdversary::endgame_auto(cfg);
        let ok = match play(cfg, &mut q, &mut a, false) {
            Ok(res) => {
                (5..=6).contains(&res.total_queries) && res.verdict_valid && res.ledger_ok()
            }
            Err(_) => false,
        };
        let mut q2 = KatonaSplit::new(cfg).unwrap();
        let mut a2 = FixedSetAdversary::new(ElemSet::from_ids(9, [4]));
        let ok2 = match play(cfg, &mut q2, &mut a2, false) {
            Ok(res) => res.verdict == Verdict::Found { elements: vec![4] } && res.verdict_valid,
            Err(_) => false,
        };
        let cfg3 = GameConfig::new(3, 1, 1).unwrap();
        let mut q3 = SingletonsQuestioner::new(cfg3);
        let mut a3 = LemmaFamilyAdversary::endgame_auto(cfg3);
        let ok3 = match play(cfg3, &mut q3, &mut a3, false) {
            Ok(res) => res.total_queries == 3 && res.verdict_valid,
            Err(_) => false,
        };
        vrow(
            &mut rows,
            "referee-examples",
            ok && ok2 && ok3,
            format!("trace games: split {ok}, oracle {ok2}, exhaustive {ok3}"),
        );
    }

    // Single-target claims audited across random play.
    {
        let mut fails = 0u64;
        let mut games = 0u64;
        for n in [5u32, 9, 16, 30, 57] {
            for r in 2..=4u32 {
                for seed in 0..6u64 {
                    let cfg = GameConfig::new(n, 1, r).unwrap();
                    let mut q = RandomQuestioner::new(cfg, mix_seed(11, seed * 100 + n as u64));
                    let mut a = LemmaFamilyAdversary::plain(cfg);
                    games += 1;
                    match play(cfg, &mut q, &mut a, false) {
                        Ok(res) => {
                            fails += res
                                .ledger_checks
                                .iter()
                                .filter(|c| !c.pass && !c.skipped)
                                .count() as u64;
                        }
                        Err(_) => fails += 1,
                    }
                }
            }
        }
        vrow(
            &mut rows,
            "single-target-claims",
            fails == 0,
            format!("{games} games, {fails} failed checks"),
        );
    }

    // Multi-target claims audited across random play.
    {
        let mut fails = 0u64;
        let mut skips = 0u64;
        let mut games = 0u64;
        for n in [6u32, 13, 27, 40] {
            for d in 2..=3u32 {
                for r in 2..=4u32 {
                    for seed in 0..4u64 {
                        let cfg = GameConfig::new(n, d, r).unwrap();
                        let mut q = RandomQuestioner::new(
                            cfg,
                            mix_seed(13, seed + 10 * n as u64 + d as u64),
                        );
                        let mut a = LemmaFamilyAdversary::plain(cfg);
                        games += 1;
                        match play(cfg, &mut q, &mut a, false) {
                            Ok(res) => {
                                fails += res
                                    .ledger_checks
                                    .iter()
                                    .filter(|c| !c.pass && !c.skipped)
                                    .count() as u64;
                                // The final round publishes no claim, so
                                // one skip per game is structural.
                                skips += (res.ledger_checks.iter().filter(|c| c.skipped).count()
                                    as u64)
                                    .saturating_sub(1);
                            }
                            Err(_) => fails += 1,
                        }
                    }
                }
            }
        }
        vrow(
            &mut rows,
            "multi-target-claims",
            fails == 0,
            format!("{games} games, {fails} failed checks, {skips} extra skips"),
        );
    }

    // The final-round rule realizes the single-target lower bound.
    {
        let mut fails = 0u64;
        let mut games = 0u64;
        for n in 2..=24u32 {
            for r in 2..=3u32 {
                let cfg = GameConfig::new(n, 1, r).unwrap();
                let mut qs: Vec<Box<dyn Questioner>> = vec![
                    Box::new(KatonaSplit::new(cfg).unwrap()),
                    Box::new(SingletonsQuestioner::new(cfg)),
                    Box::new(RandomQuestioner::new(cfg, mix_seed(17, n as u64 * r as u64))),
                    Box::new(RandomQuestioner::new(cfg, mix_seed(19, n as u64 + r as u64))),
                ];
                for q in qs.iter_mut() {
                    let mut a = LemmaFamilyAdversary::endgame_auto(cfg);
                    games += 1;
                    match play(cfg, q.as_mut(), &mut a, false) {
                        Ok(res) => {
                            let need = ceil_with_slack(res.bounds.lower);
                            if res.verdict_valid && (res.total_queries as i64) < need {
                                fails += 1;
                            }
                        }
                        Err(_) => fails += 1,
                    }
                }
            }
        }
        vrow(
            &mut rows,
            "endgame-lower-bound",
            fails == 0,
            format!("{games} games, {fails} undercut the bound"),
        );
    }

    // Exact hitting sets match brute force on small universes.
    {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let mut fails = 0u64;
        for _ in 0..120 {
            let universe = rng.gen_range(1..=9u32);
            let members = rng.gen_range(1..=6usize);
            let family: Vec<Vec<u32>> = (0..members)
                .map(|_| {
                    let mut s: Vec<u32> = (1..=universe).filter(|_| rng.gen_bool(0.4)).collect();
                    if s.is_empty() {
                        s.push(rng.gen_range(1..=universe));
                    }
                    s
                })
                .collect();
            let got = min_hitting_set(&family, universe, 1_000_000).unwrap();
            let hits = family
                .iter()
                .all(|m| m.iter().any(|e| got.binary_search(e).is_ok()));
            let best = brute_min_hitting_size(&family, universe).unwrap();
            if !hits || got.len() as u32 != best {
                fails += 1;
            }
        }
        vrow(
            &mut rows,
            "hitting-set-exactness",
            fails == 0,
            format!("120 random families, {fails} mismatches"),
        );
    }

    // No-family construction: goodness and the union cap, re-checked
    // exactly.
    {
        let mut rng = ChaCha8Rng::seed_from_u64(29);
        let mut fails = 0u64;
        for _ in 0..120 {
            let n = rng.gen_range(4..=16u32);
            let k = rng.gen_range(1..=7usize);
            let d = rng.gen_range(1..=3u32);
            let theta = rng.gen_range(0..=4u64);
            let mut fam: Vec<Vec<u32>> = (0..k)
                .map(|_| (1..=n).filter(|_| rng.gen_bool(0.35)).collect::<Vec<u32>>())
                .collect();
            fam.retain(|q| !q.is_empty());
            fam.sort();
            fam.dedup();
            if fam.is_empty() {
                continue;
            }
            let gf = find_good_family(&fam, n, theta, d, 1_000_000);
            let cap_ok = gf.union_size <= gf.members.len() as u64 * theta;
            let good = gf.heuristic || family_is_good(&fam, &gf.members, theta, d, n);
            if !cap_ok || !good {
                fails += 1;
            }
        }
        vrow(
            &mut rows,
            "no-family-goodness",
            fails == 0,
            format!("120 random batches, {fails} bad families"),
        );
    }

    // Negative control: the referee must reject a self-contradicting
    // answerer.
    {
        let cfg = GameConfig::new(3, 1, 2).unwrap();
        let mut q = ScriptedQuestioner::new(1, vec![vec![vec![1, 2, 3]], vec![vec![1], vec![2], vec![3]]]);
        let mut a = CorruptedAdversary;
        let caught = matches!(
            play(cfg, &mut q, &mut a, false),
            Err(PlayError::AdversaryViolation { .. })
        );
        vrow(
            &mut rows,
            "negative-control",
            caught,
            format!("corrupted adversary rejected: {caught}"),
        );
    }

    // Determinism: identical spec and seed produce byte-identical output.
    {
        let spec = SweepSpec {
            ns: vec![10, 31],
            ds: vec![1, 2],
            rs: vec![2, 3],
            questioners: vec!["katona".into(), "katona-parallel".into(), "random:7".into()],
            adversaries: vec!["endgame-auto".into(), "random:0.4".into()],
            seed: 99,
            format: SweepFormat::Csv,
        };
        let run = || -> Result<Vec<u8>, HarnessError> {
            let mut buf = Vec::new();
            sweep(&spec, &mut buf)?;
            Ok(buf)
        };
        let (a, b) = (run(), run());
        let pass = match (&a, &b) {
            (Ok(a), Ok(b)) => a == b && !a.is_empty(),
            _ => false,
        };
        vrow(
            &mut rows,
            "sweep-determinism",
            pass,
            format!(
                "two runs, {} bytes each, identical: {pass}",
                a.as_ref().map(|v| v.len()).unwrap_or(0)
            ),
        );
    }

    if level == VerifyLevel::Full {
        // Exact solver values sit between the two closed forms.
        {
            let mut grid: Vec<(u32, u32, u32)> = Vec::new();
            for n in 1..=4u32 {
                for r in 1..=3u32 {
                    grid.push((n, 1, r));
                }
            }
            for n in 2..=4u32 {
                for r in 1..=2u32 {
                    grid.push((n, 2, r));
                }
            }
            let (pass, detail) = match verify_sandwich(&grid, &SolverConfig::from_env()) {
                Ok(rows) => {
                    let bad: Vec<String> = rows
                        .iter()
                        .filter(|r| !r.pass)
                        .map(|r| format!("(n={}, d={}, r={})", r.n, r.d, r.r))
                        .collect();
                    (bad.is_empty(), format!("{} rows, failing: {bad:?}", rows.len()))
                }
                Err(e) => (false, e.to_string()),
            };
            vrow(&mut rows, "solver-sandwich", pass, detail);
        }

        // The solver's strategy tree and answer policy witness its value
        // from both sides.
        {
            let scfg = SolverConfig::from_env();
            let mut fails = 0u64;
            let mut games = 0u64;
            for n in 1..=4u32 {
                for d in 1..=2u32.min(n) {
                    for r in 1..=2u32 {
                        let cfg = GameConfig::new(n, d, r).unwrap();
                        let value = match SolverQuestioner::new(cfg, &scfg) {
                            Ok(q) => q.value,
                            Err(_) => {
                                fails += 1;
                                continue;
                            }
                        };
                        for adv in suite_adversaries(cfg, 31).iter_mut() {
                            let mut q = SolverQuestioner::new(cfg, &scfg).unwrap();
                            games += 1;
                            match play(cfg, &mut q, adv.as_mut(), false) {
                                Ok(res) => {
                                    if !res.verdict_valid || res.total_queries > value as u64 {
                                        fails += 1;
                                    }
                                }
                                Err(_) => fails += 1,
                            }
                        }
                        for qname in ["katona", "katona-parallel", "singletons"] {
                            let Ok(mut q) = make_questioner(qname, cfg) else {
                                continue;
                            };
                            let mut a = SolverAdversary::new(cfg, &scfg).unwrap();
                            games += 1;
                            match play(cfg, q.as_mut(), &mut a, false) {
                                Ok(res) => {
                                    if res.verdict_valid && res.total_queries < value as u64 {
                                        fails += 1;
                                    }
                                }
                                Err(_) => fails += 1,
                            }
                        }
                    }
                }
            }
            vrow(
                &mut rows,
                "solver-witnesses",
                fails == 0,
                format!("{games} games, {fails} witness failures"),
            );
        }
    }

    let pass = rows.iter().all(|r| r.pass);
    VerifyReport { rows, pass }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn referee_trace_examples() {
        let cfg = GameConfig::new(9, 1, 2).unwrap();
        let mut q = KatonaSplit::new(cfg).unwrap();
        let mut a = LemmaFamilyAdversary::endgame_auto(cfg);
        let res = play(cfg, &mut q, &mut a, true).unwrap();
        assert!((5..=6).contains(&res.total_queries), "{res:?}");
        assert!(res.verdict_valid);
        assert!(res.ledger_ok());
        assert_eq!(res.total_queries, res.per_round.iter().sum::<u64>());
        let transcript = res.transcript.as_ref().unwrap();
        assert_eq!(transcript.total_queries(), res.total_queries);
        let states = transcript.replay().unwrap();
        assert_eq!(states.len(), 2);
        assert!(states.iter().all(|s| s.is_consistent()));

        let mut q = KatonaSplit::new(cfg).unwrap();
        let mut a = FixedSetAdversary::new(ElemSet::from_ids(9, [4]));
        let res = play(cfg, &mut q, &mut a, false).unwrap();
        assert_eq!(res.verdict, Verdict::Found { elements: vec![4] });
        assert!(res.verdict_valid);

        let cfg = GameConfig::new(3, 1, 1).unwrap();
        let mut q = SingletonsQuestioner::new(cfg);
        let mut a = LemmaFamilyAdversary::endgame_auto(cfg);
        let res = play(cfg, &mut q, &mut a, false).unwrap();
        assert_eq!(res.total_queries, 3);
        assert!(res.verdict_valid);
    }

    #[test]
    fn referee_blames_the_right_side() {
        // Out-of-range query: questioner's fault.
        let cfg = GameConfig::new(3, 1, 1).unwrap();
        let mut q = ScriptedQuestioner::new(1, vec![vec![vec![4]]]);
        let mut a = FixedSetAdversary::new(ElemSet::empty(3));
        assert!(matches!(
            play(cfg, &mut q, &mut a, false),
            Err(PlayError::QuestionerViolation { round: 1, .. })
        ));

        // Self-contradicting answers: adversary's fault.
        let cfg = GameConfig::new(3, 1, 2).unwrap();
        let mut q =
            ScriptedQuestioner::new(1, vec![vec![vec![1, 2, 3]], vec![vec![1], vec![2], vec![3]]]);
        let mut a = CorruptedAdversary;
        assert!(matches!(
            play(cfg, &mut q, &mut a, false),
            Err(PlayError::AdversaryViolation { round: 2, .. })
        ));
    }

    #[test]
    fn ledger_audit_flags_claim_rows_per_round() {
        let cfg = GameConfig::new(20, 2, 3).unwrap();
        let mut q = RandomQuestioner::new(cfg, 5);
        let mut a = LemmaFamilyAdversary::plain(cfg);
        let res = play(cfg, &mut q, &mut a, false).unwrap();
        // Two check rows per answered round.
        assert_eq!(res.ledger_checks.len(), 2 * cfg.r as usize);
        assert!(res.ledger_ok(), "{:#?}", res.ledger_checks);
        // Rounds 1..r−1 publish real claims; round r does not.
        let claims: Vec<&LedgerCheck> = res
            .ledger_checks
            .iter()
            .filter(|c| c.kind == "claim")
            .collect();
        assert!(claims[..claims.len() - 1].iter().all(|c| !c.skipped));
        assert!(claims.last().unwrap().skipped);
    }

    #[test]
    fn registry_builds_and_rejects() {
        let cfg = GameConfig::new(10, 1, 2).unwrap();
        for name in ["katona", "singletons", "random:3"] {
            assert_eq!(make_questioner(name, cfg).unwrap().name(), name);
        }
        assert!(matches!(
            make_questioner("katona-parallel", cfg),
            Err(HarnessError::Strategy(_))
        ));
        assert!(matches!(
            make_questioner("nope", cfg),
            Err(HarnessError::UnknownQuestioner(_))
        ));

        let cfg2 = GameConfig::new(10, 2, 2).unwrap();
        assert_eq!(make_questioner("katona-parallel", cfg2).unwrap().name(), "katona-parallel");
        assert!(matches!(
            make_questioner("katona", cfg2),
            Err(HarnessError::Strategy(_))
        ));

        assert_eq!(make_adversary("lemma", cfg, 1).unwrap().name(), "lemma");
        assert_eq!(
            make_adversary("good-family", cfg2, 1).unwrap().name(),
            "good-family"
        );
        assert_eq!(
            make_adversary("endgame-auto", cfg, 1).unwrap().name(),
            "endgame-auto"
        );
        assert_eq!(
            make_adversary("fixed:1,5", cfg, 1).unwrap().name(),
            "fixed:1,5"
        );
        assert_eq!(make_adversary("fixed:", cfg, 1).unwrap().name(), "fixed:");
        assert_eq!(
            make_adversary("random:0.3", cfg, 1).unwrap().name(),
            "random:0.3"
        );
        assert!(matches!(
            make_adversary("fixed:11", cfg, 1),
            Err(HarnessError::Strategy(_))
        ));
        assert!(matches!(
            make_adversary("random:1.5", cfg, 1),
            Err(HarnessError::Strategy(_))
        ));
        assert!(matches!(
            make_adversary("nope", cfg, 1),
            Err(HarnessError::UnknownAdversary(_))
        ));
    }

    #[test]
    fn suite_has_seven_members_and_all_stay_consistent() {
        let cfg = GameConfig::new(25, 2, 3).unwrap();
        let advs = suite_adversaries(cfg, 7);
        assert_eq!(advs.len(), 7);
        for mut adv in advs {
            let mut q = KatonaParallel::new(cfg).unwrap();
            let res = play(cfg, &mut q, adv.as_mut(), false).unwrap();
            assert!(res.verdict_valid, "{}: {res:?}", res.adversary);
        }
    }

    #[test]
    fn random_questioner_is_deterministic_per_seed() {
        let cfg = GameConfig::new(12, 1, 2).unwrap();
        let state = KnowledgeState::new(12);
        let mut q1 = RandomQuestioner::new(cfg, 42);
        let mut q2 = RandomQuestioner::new(cfg, 42);
        assert_eq!(q1.queries(1, &state), q2.queries(1, &state));
        let mut q3 = RandomQuestioner::new(cfg, 43);
        assert_ne!(q1.queries(1, &state), q3.queries(1, &state));
    }

    #[test]
    fn sweep_csv_matches_documented_shape() {
        let spec = SweepSpec {
            ns: vec![10, 100, 1000],
            ds: vec![1],
            rs: vec![2, 3],
            questioners: vec!["katona".into()],
            adversaries: vec!["endgame-auto".into()],
            seed: 1,
            format: SweepFormat::Csv,
        };
        let mut buf = Vec::new();
        let summary = sweep(&spec, &mut buf).unwrap();
        assert_eq!(summary.rows, 6);
        assert_eq!(summary.bound_violations, 0);
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 8); // header + 6 rows + trailer
        assert_eq!(
            lines[0],
            "n,d,r,questioner,adversary,total_queries,lower,upper_alg,verdict,valid"
        );
        assert_eq!(lines[7], "# summary: rows=6 bound_violations=0");
        for row in &lines[1..7] {
            let cols: Vec<&str> = row.split(',').collect();
            let total: u64 = cols[5].parse().unwrap();
            let upper: u64 = cols[7].parse().unwrap();
            assert!(total <= upper, "{row}");
            assert_eq!(cols[9], "true");
        }
    }

    #[test]
    fn sweep_empty_ranges_yield_header_only() {
        let spec = SweepSpec {
            ns: vec![],
            ds: vec![1],
            rs: vec![2],
            questioners: vec!["katona".into()],
            adversaries: vec!["lemma".into()],
            seed: 1,
            format: SweepFormat::Csv,
        };
        let mut buf = Vec::new();
        let summary = sweep(&spec, &mut buf).unwrap();
        assert_eq!(summary.rows, 0);
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 2); // header + trailer
    }

    #[test]
    fn sweep_skips_incompatible_and_invalid_combos() {
        // d spans both regimes; each questioner only plays its own.
        let spec = SweepSpec {
            ns: vec![1, 10],
            ds: vec![1, 2],
            rs: vec![2],
            questioners: vec!["katona".into(), "katona-parallel".into()],
            adversaries: vec!["lemma".into()],
            seed: 1,
            format: SweepFormat::Csv,
        };
        let mut buf = Vec::new();
        let summary = sweep(&spec, &mut buf).unwrap();
        // (1,1), (10,1) play katona; (10,2) plays katona-parallel; (1,2)
        // is not a valid config at all.
        assert_eq!(summary.rows, 3);
    }

    #[test]
    fn sweep_json_mirrors_the_rows() {
        let spec = SweepSpec {
            ns: vec![10, 100],
            ds: vec![2],
            rs: vec![2],
            questioners: vec!["katona-parallel".into()],
            adversaries: vec!["good-family".into()],
            seed: 1,
            format: SweepFormat::Json,
        };
        let mut buf = Vec::new();
        let summary = sweep(&spec, &mut buf).unwrap();
        assert_eq!(summary.rows, 2);
        let doc: serde_json::Value = serde_json::from_slice(&buf).unwrap();
        assert_eq!(doc["rows"].as_array().unwrap().len(), 2);
        assert_eq!(doc["summary"]["rows"], 2);
        assert_eq!(doc["summary"]["bound_violations"], 0);
        // Two-round window: totals within the tightened pair's
        // upper side.
        for row in doc["rows"].as_array().unwrap() {
            let total = row["total_queries"].as_u64().unwrap();
            let upper = row["upper_alg"].as_u64().unwrap();
            assert!(total <= upper);
        }
    }

    #[test]
    fn quick_verify_passes() {
        let report = verify(VerifyLevel::Quick);
        for row in &report.rows {
            assert!(row.pass, "{}: {}", row.invariant, row.detail);
        }
        assert!(report.pass);
    }

    #[test]
    fn full_verify_adds_solver_rows_and_passes() {
        let report = verify(VerifyLevel::Full);
        assert!(report.rows.iter().any(|r| r.invariant == "solver-sandwich"));
        assert!(report
            .rows
            .iter()
            .any(|r| r.invariant == "solver-witnesses"));
        for row in &report.rows {
            assert!(row.pass, "{}: {}", row.invariant, row.detail);
        }
    }
}
