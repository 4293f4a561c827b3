//! Adversary strategies: consistency-preserving answer rules that keep the
//! questioner's knowledge as useless as possible, plus truthful and random
//! baselines.
//!
//! The bound-enforcing rules revolve around one shrinking threshold: after
//! round `t` with observed batch sizes `k_1, …, k_t`, let
//! `n_t = ⌊n_{t−1}/(k_t+1)⌋` (see [`crate::bounds::n_sequence`]). The
//! single-target rule answers so that either every residual keeps at least
//! `n_t + 1` elements, or every answer so far was "no" and at least `n_t`
//! elements are still untouched. The multi-target rule generalizes this to
//! unions: every `i ≤ d` distinct residuals keep a union of at least
//! `i·θ_t` elements. Each strategy records what it guarantees per round in
//! an [`AdversaryLedger`]; the referee re-derives the same quantities from
//! the public state and fails the game on any mismatch or violation.

use std::collections::{BTreeSet, HashMap};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::model::{Answer, GameConfig, KnowledgeState, Query};
use crate::set::ElemSet;

/// One side of the game: given the public state and a fresh batch, produce
/// one answer per query. Implementations must keep the state consistent;
/// the referee aborts the game otherwise.
pub trait Adversary {
    fn name(&self) -> String;
    fn answer(&mut self, round: u32, state: &KnowledgeState, queries: &[Query]) -> Vec<Answer>;
    /// Per-round guarantees for the referee to audit, if this strategy
    /// makes any.
    fn ledger(&self) -> Option<&AdversaryLedger> {
        None
    }
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum AdversaryError {
    #[error("rule covers rounds 1..={}, not the final round {round}", r - 1)]
    LastRound { round: u32, r: u32 },
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum HittingSetError {
    #[error("a member is empty: no hitting set exists")]
    EmptyMember,
    #[error("search exceeded node budget {budget}")]
    BudgetExceeded { budget: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LedgerMode {
    AllNoSoFar,
    HadYes,
}

/// Minimum size of a union of `i` distinct residual members.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MinUnion {
    /// Fewer than `i` members exist.
    Infinite,
    Size(u64),
    /// Search budget exhausted before the exact value was known.
    Unknown,
}

/// What the strategy guarantees about the state after one round.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RoundClaim {
    None,
    /// Min residual size ≥ n_t + 1, or no yes answer ever and ≥ n_t
    /// elements free.
    SingleTarget { n_t: u64 },
    /// Every union of `i ≤ d` distinct residuals ≥ i·theta, or no yes
    /// answer ever and ≥ all_no_floor elements free. `exact` is false when
    /// the family search fell back to the unverified heuristic.
    MultiTarget {
        theta: u64,
        all_no_floor: u64,
        exact: bool,
    },
}

#[derive(Debug, Clone, Serialize)]
pub struct AdversaryLedger {
    pub n0: u64,
    /// Observed batch sizes, one per answered round.
    pub ks: Vec<u64>,
    /// The recurrence n_t = ⌊n_{t−1}/(k_t+1)⌋, one per answered round.
    pub n_seq: Vec<u64>,
    pub mode: LedgerMode,
    /// One claim per answered round.
    pub claims: Vec<RoundClaim>,
    /// Min residual size after the last answered round.
    pub m_current: Option<u64>,
    /// Index i−1 holds the min size of a union of i distinct residuals
    /// after the last answered round.
    pub m_unions: Vec<MinUnion>,
    /// The penultimate-round divisor ⌊n_{r−2}/(k_{r−1}+d)⌋ once used.
    pub n_prime: Option<u64>,
}

impl AdversaryLedger {
    pub fn new(n: u64) -> Self {
        AdversaryLedger {
            n0: n,
            ks: Vec::new(),
            n_seq: Vec::new(),
            mode: LedgerMode::AllNoSoFar,
            claims: Vec::new(),
            m_current: None,
            m_unions: Vec::new(),
            n_prime: None,
        }
    }

    /// n_{t−1}: the threshold before the next round is folded in.
    pub fn current_n(&self) -> u64 {
        *self.n_seq.last().unwrap_or(&self.n0)
    }

    /// Fold in the next observed batch size; returns the new n_t.
    pub fn push_round(&mut self, k: u64) -> u64 {
        let nt = self.current_n() / (k + 1);
        self.ks.push(k);
        self.n_seq.push(nt);
        nt
    }
}

/// Recompute the ledger's residual-size summaries after a round. Shared by
/// the strategies (to fill the ledger) and by the referee (to audit it).
pub fn record_post_m(
    ledger: &mut AdversaryLedger,
    state: &KnowledgeState,
    queries: &[Query],
    answers: &[Answer],
    d: u32,
    budget: u64,
) {
    if answers.contains(&Answer::Yes) {
        ledger.mode = LedgerMode::HadYes;
    }
    let mut post = state.clone();
    post.apply_round(queries, answers)
        .expect("strategy produced one answer per query");
    ledger.m_current = post.residual_yes.iter().map(|s| s.len() as u64).min();
    ledger.m_unions = (1..=d)
        .map(|i| min_union(&post.residual_yes, i, state.n, budget))
        .collect();
}

/// The greedy ordering behind the single-target rule: repeatedly take the
/// query adding the fewest new elements. The marginals `H_i` (each ordered
/// query minus the union of its predecessors) are pairwise disjoint by
/// construction.
#[derive(Debug, Clone)]
pub struct GreedyOrdering {
    /// Positions into the input family, in greedy order.
    pub order: Vec<usize>,
    /// The input queries restricted to `base`, in greedy order.
    pub ordered_queries: Vec<Vec<u32>>,
    /// `marginals[i]` = `ordered_queries[i]` minus all earlier ones.
    pub marginals: Vec<Vec<u32>>,
}

/// Deterministic greedy ordering; ties on marginal size are broken by the
/// lexicographically smallest (restricted) element list, then input order.
pub fn greedy_ordering(queries: &[Vec<u32>], base: &ElemSet) -> GreedyOrdering {
    let k = queries.len();
    let normalized: Vec<Vec<u32>> = queries
        .iter()
        .map(|q| {
            let mut v: Vec<u32> = q.iter().copied().filter(|&x| base.contains(x)).collect();
            v.sort_unstable();
            v.dedup();
            v
        })
        .collect();
    let mut by_lex: Vec<usize> = (0..k).collect();
    by_lex.sort_by(|&a, &b| normalized[a].cmp(&normalized[b]).then(a.cmp(&b)));
    let mut lex_rank = vec![0usize; k];
    for (pos, &j) in by_lex.iter().enumerate() {
        lex_rank[j] = pos;
    }
    let mut elem_map: HashMap<u32, Vec<usize>> = HashMap::new();
    for (j, q) in normalized.iter().enumerate() {
        for &e in q {
            elem_map.entry(e).or_default().push(j);
        }
    }
    let mut size: Vec<usize> = normalized.iter().map(|q| q.len()).collect();
    let mut live: BTreeSet<(usize, usize)> = (0..k).map(|j| (size[j], lex_rank[j])).collect();
    let mut selected = vec![false; k];
    let mut in_union = ElemSet::empty(base.universe());

    let mut out = GreedyOrdering {
        order: Vec::with_capacity(k),
        ordered_queries: Vec::with_capacity(k),
        marginals: Vec::with_capacity(k),
    };
    while let Some(&(_, rank)) = live.iter().next() {
        let j = by_lex[rank];
        live.remove(&(size[j], rank));
        selected[j] = true;
        let marginal: Vec<u32> = normalized[j]
            .iter()
            .copied()
            .filter(|&e| !in_union.contains(e))
            .collect();
        for &e in &marginal {
            in_union.insert(e);
            for &other in &elem_map[&e] {
                if !selected[other] {
                    live.remove(&(size[other], lex_rank[other]));
                    size[other] -= 1;
                    live.insert((size[other], lex_rank[other]));
                }
            }
        }
        out.order.push(j);
        out.ordered_queries.push(normalized[j].clone());
        out.marginals.push(marginal);
    }
    out
}

/// Distinct normalized queries in first-appearance order, plus the
/// distinct-index each original query maps to.
fn dedup_normalized(state: &KnowledgeState, queries: &[Query]) -> (Vec<Vec<u32>>, Vec<usize>) {
    let mut seen: HashMap<Vec<u32>, usize> = HashMap::new();
    let mut distinct = Vec::new();
    let mut rep = Vec::with_capacity(queries.len());
    for q in queries {
        let norm = state.normalize_query(q);
        let idx = *seen.entry(norm.clone()).or_insert_with(|| {
            distinct.push(norm);
            distinct.len() - 1
        });
        rep.push(idx);
    }
    (distinct, rep)
}

/// Single-target (`d = 1`) answering rule for one round; works at any
/// round, threshold bookkeeping included.
fn lemma_rule(
    state: &KnowledgeState,
    queries: &[Query],
    ledger: &mut AdversaryLedger,
) -> Vec<Answer> {
    let n_t = ledger.push_round(queries.len() as u64);
    let threshold = n_t + 1;
    let (distinct, rep) = dedup_normalized(state, queries);
    let ord = greedy_ordering(&distinct, &state.free_elements());
    let cut = ord
        .marginals
        .iter()
        .position(|h| h.len() as u64 >= threshold);
    let mut per_distinct = vec![Answer::No; distinct.len()];
    if let Some(c) = cut {
        for pos in c..ord.order.len() {
            per_distinct[ord.order[pos]] = Answer::Yes;
        }
    }
    ledger.claims.push(RoundClaim::SingleTarget { n_t });
    rep.iter().map(|&ri| per_distinct[ri]).collect()
}

/// Single-target rule with the round guard: the final round belongs to the
/// endgame rule, not to this one.
pub fn greedy_lemma_answer(
    state: &KnowledgeState,
    queries: &[Query],
    ledger: &mut AdversaryLedger,
    round_t: u32,
    r: u32,
) -> Result<Vec<Answer>, AdversaryError> {
    if round_t >= r {
        return Err(AdversaryError::LastRound { round: round_t, r });
    }
    Ok(lemma_rule(state, queries, ledger))
}

/// A subfamily 𝒜 of a round's queries such that answering "no" exactly on
/// 𝒜 keeps every union of `i ≤ d` distinct surviving queries at size
/// ≥ `i·theta`, while killing at most `|𝒜|·theta` elements.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GoodFamily {
    /// Indices into the input family, ascending.
    pub members: Vec<usize>,
    pub union_size: u64,
    pub theta: u64,
    /// True when the no-violation conclusion was not exactly verified
    /// (tuple count stayed above the exact budget).
    pub heuristic: bool,
}

fn binom(n: u64, k: u64) -> u128 {
    if k > n {
        return 0;
    }
    let mut acc: u128 = 1;
    for j in 0..k.min(n - k) {
        acc = acc.saturating_mul((n - j) as u128) / (j + 1) as u128;
    }
    acc
}

/// Exactly look for `i ≤ d` non-absorbed sets whose union adds fewer than
/// `i·theta` new elements beyond `union`. Pools are pre-filtered: a member
/// alone adding ≥ `i·theta` can never join a violating `i`-tuple.
fn exact_violation(
    family: &[Vec<u32>],
    pools: &[Vec<usize>],
    theta: u64,
    union: &ElemSet,
    universe: u32,
) -> Option<Vec<usize>> {
    #[allow(clippy::too_many_arguments)]
    fn rec(
        family: &[Vec<u32>],
        pool: &[usize],
        start: usize,
        need: usize,
        acc: &mut ElemSet,
        trail: &mut Vec<u32>,
        acc_size: u64,
        bound: u64,
        union: &ElemSet,
        chosen: &mut Vec<usize>,
    ) -> bool {
        if need == 0 {
            return acc_size < bound;
        }
        for p in start..pool.len() {
            if pool.len() - p < need {
                break;
            }
            let j = pool[p];
            let mark = trail.len();
            let mut size2 = acc_size;
            for &e in &family[j] {
                if !union.contains(e) && !acc.contains(e) {
                    acc.insert(e);
                    trail.push(e);
                    size2 += 1;
                }
            }
            let mut hit = false;
            if size2 < bound {
                chosen.push(j);
                hit = rec(
                    family,
                    pool,
                    p + 1,
                    need - 1,
                    acc,
                    trail,
                    size2,
                    bound,
                    union,
                    chosen,
                );
                if !hit {
                    chosen.pop();
                }
            }
            for &e in &trail[mark..] {
                acc.remove(e);
            }
            trail.truncate(mark);
            if hit {
                return true;
            }
        }
        false
    }
    for (ix, pool) in pools.iter().enumerate() {
        let i = ix + 1;
        let mut chosen = Vec::with_capacity(i);
        let mut acc = ElemSet::empty(universe);
        let mut trail: Vec<u32> = Vec::new();
        if rec(
            family,
            pool,
            0,
            i,
            &mut acc,
            &mut trail,
            0,
            i as u64 * theta,
            union,
            &mut chosen,
        ) {
            return Some(chosen);
        }
    }
    None
}

/// Cheap stand-in: only check, for each `i ≤ d`, the `i` smallest-marginal
/// candidates as a tuple.
fn heuristic_violation(
    family: &[Vec<u32>],
    marg: &[u64],
    absorbed: &[bool],
    theta: u64,
    d: u32,
    union: &ElemSet,
    universe: u32,
) -> Option<Vec<usize>> {
    let mut cand: Vec<usize> = (0..family.len()).filter(|&j| !absorbed[j]).collect();
    cand.sort_by_key(|&j| (marg[j], j));
    for i in 1..=(d as usize).min(cand.len()) {
        let tuple = &cand[..i];
        let mut acc = ElemSet::empty(universe);
        let mut size: u64 = 0;
        for &j in tuple {
            for &e in &family[j] {
                if !union.contains(e) && !acc.contains(e) {
                    acc.insert(e);
                    size += 1;
                }
            }
        }
        if size < i as u64 * theta {
            return Some(tuple.to_vec());
        }
    }
    None
}

/// Build a good family over distinct nonempty queries by absorbing
/// violating tuples until none remains. Exact search runs while the number
/// of candidate tuples stays within `exact_budget`; beyond it a greedy
/// prefix heuristic absorbs instead, and the final no-violation conclusion
/// is re-verified exactly once it becomes affordable, else flagged.
pub fn find_good_family(
    family: &[Vec<u32>],
    universe: u32,
    theta: u64,
    d: u32,
    exact_budget: u64,
) -> GoodFamily {
    let k = family.len();
    let mut out = GoodFamily {
        members: Vec::new(),
        union_size: 0,
        theta,
        heuristic: false,
    };
    if theta == 0 || k == 0 {
        return out;
    }
    let mut absorbed = vec![false; k];
    let mut union = ElemSet::empty(universe);
    let mut marg: Vec<u64> = family.iter().map(|s| s.len() as u64).collect();
    let mut elem_map: HashMap<u32, Vec<usize>> = HashMap::new();
    for (j, q) in family.iter().enumerate() {
        for &e in q {
            elem_map.entry(e).or_default().push(j);
        }
    }
    loop {
        // When the live members are pairwise disjoint beyond the current
        // union, tuple unions are additive and the cheapest i-tuple is the
        // i smallest marginals — no search needed.
        let mut seen = vec![false; universe as usize + 1];
        let mut disjoint = true;
        'dj: for (j, q) in family.iter().enumerate() {
            if absorbed[j] {
                continue;
            }
            for &e in q {
                if !union.contains(e) {
                    if seen[e as usize] {
                        disjoint = false;
                        break 'dj;
                    }
                    seen[e as usize] = true;
                }
            }
        }
        let (exact, tuple) = if disjoint {
            let mut order: Vec<usize> = (0..k).filter(|&j| !absorbed[j]).collect();
            order.sort_by_key(|&j| (marg[j], j));
            let mut acc = 0u64;
            let mut pick = None;
            for i in 1..=(d as usize).min(order.len()) {
                acc += marg[order[i - 1]];
                if acc < i as u64 * theta {
                    pick = Some(order[..i].to_vec());
                    break;
                }
            }
            (true, pick)
        } else {
            let pools: Vec<Vec<usize>> = (1..=d as u64)
                .map(|i| {
                    (0..k)
                        .filter(|&j| !absorbed[j] && marg[j] < i * theta)
                        .collect()
                })
                .collect();
            let count: u128 = pools.iter().enumerate().fold(0u128, |acc, (ix, p)| {
                acc.saturating_add(binom(p.len() as u64, ix as u64 + 1))
            });
            let exact = count <= exact_budget as u128;
            let tuple = if exact {
                exact_violation(family, &pools, theta, &union, universe)
            } else {
                heuristic_violation(family, &marg, &absorbed, theta, d, &union, universe)
            };
            (exact, tuple)
        };
        match tuple {
            Some(tuple) => {
                for &j in &tuple {
                    absorbed[j] = true;
                    out.members.push(j);
                    for &e in &family[j] {
                        if !union.contains(e) {
                            union.insert(e);
                            out.union_size += 1;
                            for &other in &elem_map[&e] {
                                marg[other] -= 1;
                            }
                        }
                    }
                }
            }
            None => {
                out.heuristic = !exact;
                break;
            }
        }
    }
    out.members.sort_unstable();
    debug_assert!(out.union_size <= out.members.len() as u64 * theta);
    out
}

/// Multi-target (`d ≥ 2`) answering rule: "no" exactly on a good family.
/// Thresholds: `n_t` up to round `r−2`, the penultimate divisor
/// `⌊n_{r−2}/(k_{r−1}+d)⌋` at round `r−1`, and 0 (answer every nonempty
/// query yes) if invoked on the final round.
pub fn good_family_answer(
    state: &KnowledgeState,
    queries: &[Query],
    ledger: &mut AdversaryLedger,
    round_t: u32,
    cfg: &GameConfig,
    exact_budget: u64,
) -> Vec<Answer> {
    let prev = ledger.current_n();
    let k = queries.len() as u64;
    let n_t = ledger.push_round(k);
    let d = cfg.d;
    let theta = if round_t + 1 < cfg.r {
        n_t
    } else if round_t + 1 == cfg.r {
        let np = crate::bounds::n_prime(prev, k, d as u64);
        ledger.n_prime = Some(np);
        np
    } else {
        0
    };
    let (distinct, rep) = dedup_normalized(state, queries);
    let nonempty: Vec<usize> = (0..distinct.len()).filter(|&j| !distinct[j].is_empty()).collect();
    let fam: Vec<Vec<u32>> = nonempty.iter().map(|&j| distinct[j].clone()).collect();
    let gf = find_good_family(&fam, cfg.n, theta, d, exact_budget);
    // An empty (fully dead) query must be denied regardless of the family:
    // a "yes" on it can never be witnessed.
    let mut per_distinct = vec![Answer::No; distinct.len()];
    let in_family: BTreeSet<usize> = gf.members.iter().map(|&m| nonempty[m]).collect();
    for &j in &nonempty {
        if !in_family.contains(&j) {
            per_distinct[j] = Answer::Yes;
        }
    }
    let claim = if round_t + 1 < cfg.r {
        RoundClaim::MultiTarget {
            theta: n_t,
            all_no_floor: n_t,
            exact: !gf.heuristic,
        }
    } else if round_t + 1 == cfg.r {
        RoundClaim::MultiTarget {
            theta,
            all_no_floor: d as u64 * theta,
            exact: !gf.heuristic,
        }
    } else {
        RoundClaim::None
    };
    ledger.claims.push(claim);
    rep.iter().map(|&ri| per_distinct[ri]).collect()
}

/// Exact minimum hitting set by branch and bound: branch on the elements
/// of a smallest uncovered member; prune with a greedy disjoint-member
/// packing lower bound.
pub fn min_hitting_set(
    family: &[Vec<u32>],
    universe: u32,
    budget: u64,
) -> Result<Vec<u32>, HittingSetError> {
    if family.iter().any(|m| m.is_empty()) {
        return Err(HittingSetError::EmptyMember);
    }
    if family.is_empty() {
        return Ok(Vec::new());
    }
    // Supersets impose no extra constraint; keep the minimal members.
    let mut idx: Vec<usize> = (0..family.len()).collect();
    idx.sort_by_key(|&j| family[j].len());
    let mut kept: Vec<&Vec<u32>> = Vec::new();
    'outer: for &j in &idx {
        let m = &family[j];
        for k in &kept {
            if k.iter().all(|e| m.binary_search(e).is_ok()) {
                continue 'outer;
            }
        }
        kept.push(m);
    }
    // Greedy upper bound: repeatedly hit with the most frequent element.
    let mut covered = vec![false; kept.len()];
    let mut greedy: Vec<u32> = Vec::new();
    while covered.iter().any(|&c| !c) {
        let mut freq: HashMap<u32, u32> = HashMap::new();
        for (mi, m) in kept.iter().enumerate() {
            if !covered[mi] {
                for &e in m.iter() {
                    *freq.entry(e).or_insert(0) += 1;
                }
            }
        }
        let (&best_e, _) = freq
            .iter()
            .max_by_key(|(&e, &c)| (c, std::cmp::Reverse(e)))
            .expect("uncovered nonempty member");
        greedy.push(best_e);
        for (mi, m) in kept.iter().enumerate() {
            if !covered[mi] && m.binary_search(&best_e).is_ok() {
                covered[mi] = true;
            }
        }
    }
    let mut best = greedy;
    let mut nodes: u64 = 0;

    fn packing_bound(kept: &[&Vec<u32>], alive: &[usize], chosen: &ElemSet) -> usize {
        // Greedily collect uncovered members that are pairwise disjoint:
        // each needs its own hitting element.
        let mut used = ElemSet::empty(chosen.universe());
        let mut count = 0;
        'mem: for &mi in alive {
            for &e in kept[mi].iter() {
                if used.contains(e) {
                    continue 'mem;
                }
            }
            for &e in kept[mi].iter() {
                used.insert(e);
            }
            count += 1;
        }
        count
    }

    #[allow(clippy::too_many_arguments)]
    fn dfs(
        kept: &[&Vec<u32>],
        alive: &[usize],
        chosen: &mut Vec<u32>,
        chosen_set: &mut ElemSet,
        best: &mut Vec<u32>,
        nodes: &mut u64,
        budget: u64,
    ) -> Result<(), HittingSetError> {
        *nodes += 1;
        if *nodes > budget {
            return Err(HittingSetError::BudgetExceeded { budget });
        }
        if alive.is_empty() {
            if chosen.len() < best.len() {
                *best = chosen.clone();
                best.sort_unstable();
            }
            return Ok(());
        }
        if chosen.len() + packing_bound(kept, alive, chosen_set) >= best.len() {
            return Ok(());
        }
        let &branch = alive
            .iter()
            .min_by_key(|&&mi| kept[mi].len())
            .expect("alive nonempty");
        for &e in kept[branch].iter() {
            chosen.push(e);
            chosen_set.insert(e);
            let next: Vec<usize> = alive
                .iter()
                .copied()
                .filter(|&mi| kept[mi].binary_search(&e).is_err())
                .collect();
            dfs(kept, &next, chosen, chosen_set, best, nodes, budget)?;
            chosen.pop();
            chosen_set.remove(e);
        }
        Ok(())
    }

    let alive: Vec<usize> = (0..kept.len()).collect();
    let mut chosen = Vec::new();
    let mut chosen_set = ElemSet::empty(universe);
    dfs(
        &kept, &alive, &mut chosen, &mut chosen_set, &mut best, &mut nodes, budget,
    )?;
    best.sort_unstable();
    Ok(best)
}

/// Minimum size of a union of `i` distinct members, exactly, within a node
/// budget.
pub fn min_union(family: &[Vec<u32>], i: u32, universe: u32, budget: u64) -> MinUnion {
    let i = i as usize;
    if family.len() < i {
        return MinUnion::Infinite;
    }
    if i == 1 {
        return MinUnion::Size(family.iter().map(|s| s.len() as u64).min().unwrap());
    }
    if family.iter().all(|s| s.len() == 1) {
        // Closed form for singleton families: reuse the most-repeated
        // elements, so the answer is the least t whose top-t multiplicities
        // cover i picks.
        let mut mult: HashMap<u32, u64> = HashMap::new();
        for s in family {
            *mult.entry(s[0]).or_insert(0) += 1;
        }
        let mut counts: Vec<u64> = mult.into_values().collect();
        counts.sort_unstable_by(|a, b| b.cmp(a));
        let mut covered = 0u64;
        for (t, c) in counts.iter().enumerate() {
            covered += c;
            if covered >= i as u64 {
                return MinUnion::Size(t as u64 + 1);
            }
        }
        return MinUnion::Size(counts.len() as u64);
    }
    {
        // Unions are additive over pairwise-disjoint members, so the i
        // shortest are the minimizer outright.
        let mut seen = vec![false; universe as usize + 1];
        let mut disjoint = true;
        'dj: for s in family {
            for &e in s {
                if seen[e as usize] {
                    disjoint = false;
                    break 'dj;
                }
                seen[e as usize] = true;
            }
        }
        if disjoint {
            let mut lens: Vec<u64> = family.iter().map(|s| s.len() as u64).collect();
            lens.sort_unstable();
            return MinUnion::Size(lens[..i].iter().sum());
        }
    }
    let mut idx: Vec<usize> = (0..family.len()).collect();
    idx.sort_by_key(|&j| family[j].len());

    // Seed with the union of the i shortest members so both prunes bite
    // from the first node; the true minimum is never above a candidate.
    let mut acc = ElemSet::empty(universe);
    let mut best: u64 = 0;
    for &j in idx.iter().take(i) {
        for &e in &family[j] {
            if !acc.contains(e) {
                acc.insert(e);
                best += 1;
            }
        }
    }
    for &j in idx.iter().take(i) {
        for &e in &family[j] {
            acc.remove(e);
        }
    }
    // Only members shorter than the seed can appear in a better tuple; if
    // even that restricted domain is past the budget, decline up front
    // instead of burning the whole allowance first.
    let reach = idx
        .iter()
        .take_while(|&&j| (family[j].len() as u64) < best)
        .count();
    if binom(reach as u64, i as u64) > budget as u128 {
        return MinUnion::Unknown;
    }
    let mut nodes: u64 = 0;
    let mut trail: Vec<u32> = Vec::new();

    #[allow(clippy::too_many_arguments)]
    fn rec(
        family: &[Vec<u32>],
        idx: &[usize],
        start: usize,
        need: usize,
        acc: &mut ElemSet,
        trail: &mut Vec<u32>,
        acc_size: u64,
        best: &mut u64,
        nodes: &mut u64,
        budget: u64,
    ) -> bool {
        if need == 0 {
            *best = (*best).min(acc_size);
            return true;
        }
        let mut complete = true;
        for p in start..idx.len() {
            if idx.len() - p < need {
                break;
            }
            let j = idx[p];
            // idx ascends by length and the final union contains every pick
            // whole, so once one member alone reaches best, all later do.
            if family[j].len() as u64 >= *best {
                break;
            }
            *nodes += 1;
            if *nodes > budget {
                return false;
            }
            let mark = trail.len();
            let mut size2 = acc_size;
            for &e in &family[j] {
                if !acc.contains(e) {
                    acc.insert(e);
                    trail.push(e);
                    size2 += 1;
                }
            }
            if size2 < *best {
                complete &= rec(
                    family,
                    idx,
                    p + 1,
                    need - 1,
                    acc,
                    trail,
                    size2,
                    best,
                    nodes,
                    budget,
                );
            }
            for &e in &trail[mark..] {
                acc.remove(e);
            }
            trail.truncate(mark);
            if !complete {
                return false;
            }
        }
        complete
    }

    if rec(
        family, &idx, 0, i, &mut acc, &mut trail, 0, &mut best, &mut nodes, budget,
    ) {
        MinUnion::Size(best)
    } else {
        MinUnion::Unknown
    }
}

/// Final-round answering rule. Let `A` be a minimum hitting set of the
/// residual family at round entry. Queries are processed smallest current
/// residual first: empty ones are denied; a singleton `{x}` is denied iff
/// no current residual equals `{x}` (consistency) and, when `|A| < d`,
/// additionally `x ∉ A`; once every unanswered query has ≥ 2 live
/// elements, everything remaining is answered yes. The evolving within-
/// round bookkeeping treats each "no" as if asked in an earlier round.
pub fn endgame_answer(
    state: &KnowledgeState,
    queries: &[Query],
    d: u32,
    hs_budget: u64,
) -> Result<Vec<Answer>, HittingSetError> {
    let n = state.n;
    let (a_ge_d, a_set) = if state.residual_yes.is_empty() {
        (false, ElemSet::empty(n))
    } else if d == 1 {
        // Any single element of any member hits a nonempty family.
        (true, ElemSet::empty(n))
    } else {
        let a = min_hitting_set(&state.residual_yes, n, hs_budget)?;
        let ge = a.len() as u32 >= d;
        (ge, ElemSet::from_ids(n, a.into_iter()))
    };

    let mut fam: Vec<Vec<u32>> = state.residual_yes.clone();
    let mut singleton_count: HashMap<u32, u32> = HashMap::new();
    let mut res_elem: HashMap<u32, Vec<usize>> = HashMap::new();
    for (ri, m) in fam.iter().enumerate() {
        if m.len() == 1 {
            *singleton_count.entry(m[0]).or_insert(0) += 1;
        }
        for &e in m {
            res_elem.entry(e).or_default().push(ri);
        }
    }

    let mut cur: Vec<Vec<u32>> = queries.iter().map(|q| state.normalize_query(q)).collect();
    let mut q_elem: HashMap<u32, Vec<usize>> = HashMap::new();
    for (qi, q) in cur.iter().enumerate() {
        for &e in q {
            q_elem.entry(e).or_default().push(qi);
        }
    }
    let key = |q: &[u32], qi: usize| (q.len() as u32, q.first().copied().unwrap_or(0), qi as u32);
    let mut agenda: BTreeSet<(u32, u32, u32)> =
        cur.iter().enumerate().map(|(qi, q)| key(q, qi)).collect();
    let mut answers: Vec<Option<Answer>> = vec![None; queries.len()];

    while let Some(&(size, min_el, qi)) = agenda.iter().next() {
        agenda.remove(&(size, min_el, qi));
        let qi = qi as usize;
        if size == 0 {
            answers[qi] = Some(Answer::No);
            continue;
        }
        if size >= 2 {
            // Smallest remaining has ≥ 2 live elements: yes to the rest,
            // nothing else dies this round.
            answers[qi] = Some(Answer::Yes);
            for &(_, _, oi) in &agenda {
                answers[oi as usize] = Some(Answer::Yes);
            }
            break;
        }
        let x = min_el;
        let deny = singleton_count.get(&x).copied().unwrap_or(0) == 0
            && (a_ge_d || !a_set.contains(x));
        if !deny {
            answers[qi] = Some(Answer::Yes);
            let ri = fam.len();
            fam.push(vec![x]);
            res_elem.entry(x).or_default().push(ri);
            *singleton_count.entry(x).or_insert(0) += 1;
            continue;
        }
        answers[qi] = Some(Answer::No);
        // x is now dead: shrink pending queries and live residuals.
        if let Some(poss) = q_elem.get(&x) {
            for &oi in poss {
                if answers[oi].is_none() && oi != qi {
                    if let Ok(pos) = cur[oi].binary_search(&x) {
                        agenda.remove(&key(&cur[oi], oi));
                        cur[oi].remove(pos);
                        agenda.insert(key(&cur[oi], oi));
                    }
                }
            }
        }
        if let Some(poss) = res_elem.get(&x) {
            for &ri in poss.clone().iter() {
                if let Ok(pos) = fam[ri].binary_search(&x) {
                    fam[ri].remove(pos);
                    debug_assert!(!fam[ri].is_empty(), "deny rule protects singletons");
                    if fam[ri].len() == 1 {
                        *singleton_count.entry(fam[ri][0]).or_insert(0) += 1;
                    }
                }
            }
        }
    }
    Ok(answers.into_iter().map(|a| a.expect("all answered")).collect())
}

/// Truthful oracle for a fixed hidden set: yes iff the query meets it.
pub fn fixed_set_answer(hidden: &ElemSet, queries: &[Query]) -> Vec<Answer> {
    queries
        .iter()
        .map(|q| {
            if q.iter().any(|&x| hidden.contains(x)) {
                Answer::Yes
            } else {
                Answer::No
            }
        })
        .collect()
}

pub struct FixedSetAdversary {
    hidden: ElemSet,
    label: String,
}

impl FixedSetAdversary {
    pub fn new(hidden: ElemSet) -> Self {
        let ids: Vec<String> = hidden.iter().map(|e| e.to_string()).collect();
        let label = format!("fixed:{}", ids.join(","));
        FixedSetAdversary { hidden, label }
    }
}

impl Adversary for FixedSetAdversary {
    fn name(&self) -> String {
        self.label.clone()
    }
    fn answer(&mut self, _round: u32, _state: &KnowledgeState, queries: &[Query]) -> Vec<Answer> {
        fixed_set_answer(&self.hidden, queries)
    }
}

/// Coin-flip answers repaired for consistency: a query with no live
/// element is always denied, and a tentative "no" that would empty any
/// residual (including residuals created earlier in the same batch) is
/// flipped to yes.
pub struct RandomAdversary {
    p: f64,
    rng: ChaCha8Rng,
    label: String,
}

impl RandomAdversary {
    pub fn new(p: f64, seed: u64) -> Self {
        RandomAdversary {
            p,
            rng: ChaCha8Rng::seed_from_u64(seed),
            label: format!("random:{p}"),
        }
    }
}

impl Adversary for RandomAdversary {
    fn name(&self) -> String {
        self.label.clone()
    }

    fn answer(&mut self, _round: u32, state: &KnowledgeState, queries: &[Query]) -> Vec<Answer> {
        let mut fam: Vec<Vec<u32>> = state.residual_yes.clone();
        let mut res_elem: HashMap<u32, Vec<usize>> = HashMap::new();
        for (ri, m) in fam.iter().enumerate() {
            for &e in m {
                res_elem.entry(e).or_default().push(ri);
            }
        }
        let mut batch_dead = ElemSet::empty(state.n);
        let mut answers = Vec::with_capacity(queries.len());
        for q in queries {
            let mut cur: Vec<u32> = q
                .iter()
                .copied()
                .filter(|&x| !state.dead.contains(x) && !batch_dead.contains(x))
                .collect();
            cur.sort_unstable();
            cur.dedup();
            if cur.is_empty() {
                answers.push(Answer::No);
                continue;
            }
            let mut yes = self.rng.gen_bool(self.p);
            if !yes {
                // Would denying this empty a residual?
                let mut hits: HashMap<usize, usize> = HashMap::new();
                for &e in &cur {
                    if let Some(poss) = res_elem.get(&e) {
                        for &ri in poss {
                            if fam[ri].binary_search(&e).is_ok() {
                                *hits.entry(ri).or_insert(0) += 1;
                            }
                        }
                    }
                }
                yes = hits.iter().any(|(&ri, &c)| c == fam[ri].len());
            }
            if yes {
                answers.push(Answer::Yes);
                let ri = fam.len();
                for &e in &cur {
                    res_elem.entry(e).or_default().push(ri);
                }
                fam.push(cur);
            } else {
                answers.push(Answer::No);
                for &e in &cur {
                    batch_dead.insert(e);
                    if let Some(poss) = res_elem.get(&e) {
                        for &ri in poss.clone().iter() {
                            if let Ok(pos) = fam[ri].binary_search(&e) {
                                fam[ri].remove(pos);
                            }
                        }
                    }
                }
            }
        }
        answers
    }
}

/// The bound-enforcing adversary: single-target rule for `d = 1`, good
/// families for `d ≥ 2`; in `endgame_auto` mode the final round switches
/// to [`endgame_answer`]. If the hitting-set search ever exceeds its
/// budget the strategy degrades to a truthful oracle whose hidden set is
/// everything still free (always consistent, no further claims).
pub struct LemmaFamilyAdversary {
    cfg: GameConfig,
    endgame_at_r: bool,
    exact_budget: u64,
    hs_budget: u64,
    m_budget: u64,
    ledger: AdversaryLedger,
    fallback_hidden: Option<ElemSet>,
}

impl LemmaFamilyAdversary {
    pub fn plain(cfg: GameConfig) -> Self {
        Self::build(cfg, false)
    }

    pub fn endgame_auto(cfg: GameConfig) -> Self {
        Self::build(cfg, true)
    }

    fn build(cfg: GameConfig, endgame_at_r: bool) -> Self {
        LemmaFamilyAdversary {
            cfg,
            endgame_at_r,
            exact_budget: 1_000_000,
            hs_budget: 2_000_000,
            m_budget: 2_000_000,
            ledger: AdversaryLedger::new(cfg.n as u64),
            fallback_hidden: None,
        }
    }
}

impl Adversary for LemmaFamilyAdversary {
    fn name(&self) -> String {
        if self.endgame_at_r {
            "endgame-auto".to_string()
        } else if self.cfg.d == 1 {
            "lemma".to_string()
        } else {
            "good-family".to_string()
        }
    }

    fn answer(&mut self, round: u32, state: &KnowledgeState, queries: &[Query]) -> Vec<Answer> {
        let answers = if let Some(h) = &self.fallback_hidden {
            self.ledger.push_round(queries.len() as u64);
            self.ledger.claims.push(RoundClaim::None);
            fixed_set_answer(h, queries)
        } else if self.endgame_at_r && round == self.cfg.r {
            self.ledger.push_round(queries.len() as u64);
            self.ledger.claims.push(RoundClaim::None);
            match endgame_answer(state, queries, self.cfg.d, self.hs_budget) {
                Ok(a) => a,
                Err(_) => {
                    let h = state.free_elements();
                    let a = fixed_set_answer(&h, queries);
                    self.fallback_hidden = Some(h);
                    a
                }
            }
        } else if self.cfg.d == 1 {
            lemma_rule(state, queries, &mut self.ledger)
        } else {
            good_family_answer(
                state,
                queries,
                &mut self.ledger,
                round,
                &self.cfg,
                self.exact_budget,
            )
        };
        record_post_m(
            &mut self.ledger,
            state,
            queries,
            &answers,
            self.cfg.d,
            self.m_budget,
        );
        debug_assert_eq!(self.ledger.claims.len(), self.ledger.ks.len());
        answers
    }

    fn ledger(&self) -> Option<&AdversaryLedger> {
        Some(&self.ledger)
    }
}
