//! Exact minimax game values at desk scale.
//!
//! A position is (free elements, residual antichain, rounds left); the
//! value is the least worst-case number of further queries with which the
//! questioner can still reach a valid verdict, +∞ if it cannot. The
//! recursion minimizes over query families (distinct nonempty subsets of
//! the free elements) and maximizes over consistent answer patterns.
//!
//! Two prunings keep the move space honest and are relied upon throughout:
//! duplicate queries within a round are information-free (consistency
//! forces equal answers), and a query meeting dead elements is equivalent
//! to its restriction to the free ones (the dead part can never witness a
//! yes). Both shrink the family space to subsets of the free power set.
//! Cross-round repeats are covered by the same normalization: after the
//! dead elements are dropped, a repeat either shrank into a new set or
//! answers exactly as before and changes nothing.

use std::collections::{BTreeMap, HashMap};

use serde::Serialize;

use crate::adversary::Adversary;
use crate::bounds::{bounds_for, ceil_with_slack};
use crate::model::{Answer, GameConfig, KnowledgeState, Query, Verdict};
use crate::questioner::Questioner;

/// Sentinel for "no valid verdict reachable".
pub const INF: u32 = u32::MAX;

/// A search position. `residual` holds bitmasks over the free elements
/// (bit i = i-th free element); members are nonempty and form an antichain
/// after normalization (supersets impose no extra constraint).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SolverState {
    pub free_count: u32,
    pub residual: Vec<u32>,
    pub rounds_left: u32,
}

#[derive(Debug, Clone, Copy)]
pub struct SolverConfig {
    pub max_n: u32,
    pub max_r: u32,
    pub memo_limit: usize,
    pub node_budget: u64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            max_n: 4,
            max_r: 3,
            memo_limit: 1 << 20,
            node_budget: 50_000_000,
        }
    }
}

impl SolverConfig {
    /// Default limits, with the node budget overridable through
    /// `EXSEARCH_SOLVER_NODE_BUDGET`.
    pub fn from_env() -> Self {
        let mut cfg = SolverConfig::default();
        if let Ok(s) = std::env::var("EXSEARCH_SOLVER_NODE_BUDGET") {
            if let Ok(v) = s.trim().parse::<u64>() {
                cfg.node_budget = v;
            }
        }
        cfg
    }
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum SolverError {
    #[error("position out of range: n={n}, r={r} exceeds limits n ≤ {max_n}, r ≤ {max_r}")]
    TooLarge { n: u32, r: u32, max_n: u32, max_r: u32 },
    #[error("search budget exhausted after {nodes} nodes, {memo_entries} memo entries")]
    BudgetExceeded { nodes: u64, memo_entries: usize },
}

/// Remove duplicate and superset members; result sorted ascending.
fn antichain(masks: &mut Vec<u32>) {
    masks.sort_unstable_by_key(|m| (m.count_ones(), *m));
    let mut kept: Vec<u32> = Vec::with_capacity(masks.len());
    for &m in masks.iter() {
        if !kept.iter().any(|&k| k & m == k) {
            kept.push(m);
        }
    }
    kept.sort_unstable();
    *masks = kept;
}

fn permutations(m: usize) -> Vec<Vec<u8>> {
    let mut out = Vec::new();
    let mut cur: Vec<u8> = (0..m as u8).collect();
    fn heap(k: usize, cur: &mut Vec<u8>, out: &mut Vec<Vec<u8>>) {
        if k <= 1 {
            out.push(cur.clone());
            return;
        }
        for i in 0..k {
            heap(k - 1, cur, out);
            if k % 2 == 0 {
                cur.swap(i, k - 1);
            } else {
                cur.swap(0, k - 1);
            }
        }
    }
    if m == 0 {
        out.push(Vec::new());
    } else {
        heap(m, &mut cur, &mut out);
    }
    out
}

fn relabel(mask: u32, perm: &[u8]) -> u32 {
    let mut out = 0u32;
    let mut rest = mask;
    while rest != 0 {
        let b = rest.trailing_zeros() as usize;
        out |= 1 << perm[b];
        rest &= rest - 1;
    }
    out
}

fn canonical_with(perms: &[Vec<u8>], masks: &[u32]) -> Vec<u32> {
    let mut best: Option<Vec<u32>> = None;
    for perm in perms {
        let mut relabeled: Vec<u32> = masks.iter().map(|&m| relabel(m, perm)).collect();
        relabeled.sort_unstable();
        if best.as_ref().map_or(true, |b| relabeled < *b) {
            best = Some(relabeled);
        }
    }
    best.unwrap_or_default()
}

/// Canonical form of a residual antichain under relabeling of the free
/// elements: exhaustive over all free_count! permutations (fine at desk
/// scale). Isomorphic states, and only they, share a key.
pub fn canonicalize(free_count: u32, residual: &[u32]) -> Vec<u32> {
    let mut masks = residual.to_vec();
    antichain(&mut masks);
    canonical_with(&permutations(free_count as usize), &masks)
}

/// Successor of (free ids, masks) under one answered family; None when the
/// pattern is inconsistent (some residual would empty out).
fn apply_pattern(
    free: &[u32],
    masks: &[u32],
    family: &[u32],
    pattern: u32,
) -> Option<(Vec<u32>, Vec<u32>)> {
    let mut no_union = 0u32;
    for (i, &q) in family.iter().enumerate() {
        if pattern >> i & 1 == 0 {
            no_union |= q;
        }
    }
    let survive = !no_union;
    let mut next: Vec<u32> = Vec::with_capacity(masks.len() + family.len());
    for &mk in masks.iter() {
        let s = mk & survive;
        if s == 0 {
            return None;
        }
        next.push(s);
    }
    for (i, &q) in family.iter().enumerate() {
        if pattern >> i & 1 == 1 {
            let s = q & survive;
            if s == 0 {
                return None;
            }
            next.push(s);
        }
    }
    let mut map = [0u8; 32];
    let mut free2 = Vec::with_capacity(free.len());
    for (b, &id) in free.iter().enumerate() {
        if survive >> b & 1 == 1 {
            map[b] = free2.len() as u8;
            free2.push(id);
        }
    }
    let compress = |mask: u32| -> u32 {
        let mut out = 0u32;
        let mut rest = mask;
        while rest != 0 {
            let b = rest.trailing_zeros() as usize;
            out |= 1 << map[b];
            rest &= rest - 1;
        }
        out
    };
    let next = next.into_iter().map(compress).collect();
    Some((free2, next))
}

pub struct Solver {
    d: u32,
    cfg: SolverConfig,
    memo: HashMap<(u32, u32, Vec<u32>), u32>,
    perms: Vec<Vec<Vec<u8>>>,
    pub nodes: u64,
}

impl Solver {
    pub fn new(d: u32, cfg: SolverConfig) -> Self {
        Solver {
            d,
            cfg,
            memo: HashMap::new(),
            perms: Vec::new(),
            nodes: 0,
        }
    }

    fn perms_for(&mut self, m: usize) -> &[Vec<u8>] {
        while self.perms.len() <= m {
            self.perms.push(permutations(self.perms.len()));
        }
        &self.perms[m]
    }

    /// A valid verdict exists right now: either FewerThanD (free count
    /// below d) or Found (≥ d forced singletons). Mirrors the core-model
    /// validity rules in mask space.
    fn terminal(&self, m: u32, masks: &[u32]) -> bool {
        if m < self.d {
            return true;
        }
        let forced = masks.iter().filter(|mk| mk.count_ones() == 1).count();
        forced as u32 >= self.d
    }

    /// Game value of (m free elements, residual masks, rl rounds left).
    pub fn value(&mut self, m: u32, mut masks: Vec<u32>, rl: u32) -> Result<u32, SolverError> {
        self.nodes += 1;
        if self.nodes > self.cfg.node_budget {
            return Err(SolverError::BudgetExceeded {
                nodes: self.nodes,
                memo_entries: self.memo.len(),
            });
        }
        antichain(&mut masks);
        if self.terminal(m, &masks) {
            return Ok(0);
        }
        if rl == 0 {
            return Ok(INF);
        }
        let key = {
            let canon = canonical_with(self.perms_for(m as usize), &masks);
            (m, rl, canon)
        };
        if let Some(&v) = self.memo.get(&key) {
            return Ok(v);
        }
        // Asking every free singleton always resolves the game in one
        // round, so m is an upper bound; families are scanned smallest
        // first and abandoned at the current best.
        let free_ids: Vec<u32> = (0..m).collect();
        let mut best: u32 = m;
        let all: u32 = (1u32 << m) - 1;
        let mut family: Vec<u32> = Vec::new();
        for fsize in 1..=m as usize {
            if fsize as u32 >= best {
                break;
            }
            self.families(1, all, fsize, &mut family, &free_ids, &masks, rl, &mut best)?;
        }
        if self.memo.len() >= self.cfg.memo_limit {
            return Err(SolverError::BudgetExceeded {
                nodes: self.nodes,
                memo_entries: self.memo.len(),
            });
        }
        self.memo.insert(key, best);
        Ok(best)
    }

    #[allow(clippy::too_many_arguments)]
    fn families(
        &mut self,
        from: u32,
        all: u32,
        left: usize,
        family: &mut Vec<u32>,
        free_ids: &[u32],
        masks: &[u32],
        rl: u32,
        best: &mut u32,
    ) -> Result<(), SolverError> {
        if left == 0 {
            if let Some(v) = self.family_value(free_ids, masks, family, rl, *best)? {
                *best = (*best).min(v);
            }
            return Ok(());
        }
        for q in from..=all {
            family.push(q);
            self.families(q + 1, all, left - 1, family, free_ids, masks, rl, best)?;
            family.pop();
        }
        Ok(())
    }

    /// |family| + max over consistent patterns of the successor value;
    /// None once that provably reaches `cap`.
    fn family_value(
        &mut self,
        free_ids: &[u32],
        masks: &[u32],
        family: &[u32],
        rl: u32,
        cap: u32,
    ) -> Result<Option<u32>, SolverError> {
        let f = family.len() as u32;
        if f >= cap {
            return Ok(None);
        }
        let mut worst: u32 = 0;
        for pattern in 0u32..1 << family.len() {
            let (free2, masks2) = match apply_pattern(free_ids, masks, family, pattern) {
                Some(s) => s,
                None => continue, // inconsistent: the adversary never picks it
            };
            let sub = self.value(free2.len() as u32, masks2, rl - 1)?;
            worst = worst.max(sub);
            if worst == INF || f.saturating_add(worst) >= cap {
                return Ok(None);
            }
        }
        Ok(Some(f + worst))
    }
}

/// Exact |P(n, d, r)|: minimum worst-case queries from the fresh position.
pub fn solve(n: u32, d: u32, r: u32, cfg: &SolverConfig) -> Result<u32, SolverError> {
    if n > cfg.max_n || r > cfg.max_r {
        return Err(SolverError::TooLarge {
            n,
            r,
            max_n: cfg.max_n,
            max_r: cfg.max_r,
        });
    }
    let mut solver = Solver::new(d, *cfg);
    solver.value(n, Vec::new(), r)
}

#[derive(Debug, Clone, Serialize)]
pub struct SandwichRow {
    pub n: u32,
    pub d: u32,
    pub r: u32,
    pub value: u32,
    pub lower: f64,
    pub upper: u64,
    pub pass: bool,
}

/// Exact values vs the closed-form bound pair over a grid.
pub fn verify_sandwich(
    grid: &[(u32, u32, u32)],
    cfg: &SolverConfig,
) -> Result<Vec<SandwichRow>, SolverError> {
    let mut rows = Vec::with_capacity(grid.len());
    for &(n, d, r) in grid {
        let value = solve(n, d, r, cfg)?;
        let report = bounds_for(n as u64, d as u64, r).expect("grid configs are valid");
        let upper = report.upper_algorithmic;
        let inverted = report.lower > upper as f64;
        let lower_ok =
            inverted || report.lower <= 0.0 || value as i64 >= ceil_with_slack(report.lower);
        let pass = (value as u64) <= upper && lower_ok;
        rows.push(SandwichRow {
            n,
            d,
            r,
            value,
            lower: report.lower,
            upper,
            pass,
        });
    }
    Ok(rows)
}

/// One node of an optimal strategy: the batch to ask (real element ids)
/// and a child per consistent answer pattern, keyed by a y/n string.
#[derive(Debug, Clone, Serialize)]
pub struct StrategyNode {
    pub queries: Vec<Vec<u32>>,
    #[serde(skip_serializing_if = "BTreeMap::is_empty")]
    pub children: BTreeMap<String, StrategyNode>,
}

/// Optimal strategy tree for the fresh position, with its value.
pub fn strategy_tree(
    n: u32,
    d: u32,
    r: u32,
    cfg: &SolverConfig,
) -> Result<(u32, StrategyNode), SolverError> {
    if n > cfg.max_n || r > cfg.max_r {
        return Err(SolverError::TooLarge {
            n,
            r,
            max_n: cfg.max_n,
            max_r: cfg.max_r,
        });
    }
    let mut solver = Solver::new(d, *cfg);
    let value = solver.value(n, Vec::new(), r)?;
    let free: Vec<u32> = (1..=n).collect();
    let tree = build_tree(&mut solver, &free, Vec::new(), r)?;
    Ok((value, tree))
}

fn build_tree(
    solver: &mut Solver,
    free: &[u32],
    mut masks: Vec<u32>,
    rl: u32,
) -> Result<StrategyNode, SolverError> {
    antichain(&mut masks);
    let m = free.len() as u32;
    let leaf = StrategyNode {
        queries: Vec::new(),
        children: BTreeMap::new(),
    };
    if solver.terminal(m, &masks) || rl == 0 {
        return Ok(leaf);
    }
    let value = solver.value(m, masks.clone(), rl)?;
    if value == INF {
        return Ok(leaf); // never reached from winnable roots
    }
    let free_ids: Vec<u32> = (0..m).collect();
    let all: u32 = (1u32 << m) - 1;
    let mut family: Vec<u32> = Vec::new();
    let mut found = false;
    'sizes: for fsize in 1..=m as usize {
        if fsize as u32 > value {
            break;
        }
        family.clear();
        if find_of_size(
            solver, 1, all, fsize, &free_ids, &masks, rl, value, &mut family,
        )? {
            found = true;
            break 'sizes;
        }
    }
    debug_assert!(found, "a finite value is achievable by some family");
    let queries: Vec<Vec<u32>> = family
        .iter()
        .map(|&q| {
            (0..m)
                .filter(|&b| q >> b & 1 == 1)
                .map(|b| free[b as usize])
                .collect()
        })
        .collect();
    let mut children = BTreeMap::new();
    for pattern in 0u32..1 << family.len() {
        let key: String = (0..family.len())
            .map(|i| if pattern >> i & 1 == 1 { 'y' } else { 'n' })
            .collect();
        if let Some((free2, masks2)) = apply_pattern(free, &masks, &family, pattern) {
            let child = build_tree(solver, &free2, masks2, rl - 1)?;
            children.insert(key, child);
        }
    }
    Ok(StrategyNode { queries, children })
}

#[allow(clippy::too_many_arguments)]
fn find_of_size(
    solver: &mut Solver,
    from: u32,
    all: u32,
    left: usize,
    free_ids: &[u32],
    masks: &[u32],
    rl: u32,
    value: u32,
    family: &mut Vec<u32>,
) -> Result<bool, SolverError> {
    if left == 0 {
        let v = solver.family_value(free_ids, masks, family, rl, value + 1)?;
        return Ok(v == Some(value));
    }
    for q in from..=all {
        family.push(q);
        if find_of_size(
            solver,
            q + 1,
            all,
            left - 1,
            free_ids,
            masks,
            rl,
            value,
            family,
        )? {
            return Ok(true);
        }
        family.pop();
    }
    Ok(false)
}

/// Plays an optimal strategy tree. Off-tree answers (inconsistent
/// adversaries) park the walk; the referee aborts such games anyway.
pub struct SolverQuestioner {
    d: u32,
    cur: Option<StrategyNode>,
    pub value: u32,
}

impl SolverQuestioner {
    pub fn new(cfg: GameConfig, scfg: &SolverConfig) -> Result<Self, SolverError> {
        let (value, tree) = strategy_tree(cfg.n, cfg.d, cfg.r, scfg)?;
        Ok(SolverQuestioner {
            d: cfg.d,
            cur: Some(tree),
            value,
        })
    }
}

impl Questioner for SolverQuestioner {
    fn name(&self) -> String {
        "solver".to_string()
    }

    fn queries(&mut self, _round: u32, _state: &KnowledgeState) -> Vec<Query> {
        self.cur
            .as_ref()
            .map(|n| n.queries.clone())
            .unwrap_or_default()
    }

    fn observe(&mut self, _round: u32, answers: &[Answer]) {
        let key: String = answers
            .iter()
            .map(|&a| if a == Answer::Yes { 'y' } else { 'n' })
            .collect();
        self.cur = match self.cur.take() {
            Some(node) => {
                if node.queries.is_empty() && node.children.is_empty() {
                    Some(node) // parked at a leaf
                } else {
                    node.children.get(&key).cloned()
                }
            }
            None => None,
        };
    }

    fn verdict(&mut self, state: &KnowledgeState) -> Verdict {
        let forced = state.forced_excellent().unwrap_or_default();
        if forced.len() >= self.d as usize {
            Verdict::Found {
                elements: forced[..self.d as usize].to_vec(),
            }
        } else {
            Verdict::FewerThanD
        }
    }
}

/// Optimal play on the answering side: pick the consistent pattern whose
/// successor value is largest (ties: smallest pattern integer). Rebuilt
/// from the public state each round, so it composes with any questioner.
pub struct SolverAdversary {
    r: u32,
    solver: Solver,
    degraded: bool,
}

impl SolverAdversary {
    pub fn new(cfg: GameConfig, scfg: &SolverConfig) -> Result<Self, SolverError> {
        if cfg.n > scfg.max_n || cfg.r > scfg.max_r {
            return Err(SolverError::TooLarge {
                n: cfg.n,
                r: cfg.r,
                max_n: scfg.max_n,
                max_r: scfg.max_r,
            });
        }
        Ok(SolverAdversary {
            r: cfg.r,
            solver: Solver::new(cfg.d, *scfg),
            degraded: false,
        })
    }
}

impl Adversary for SolverAdversary {
    fn name(&self) -> String {
        "solver".to_string()
    }

    fn answer(&mut self, round: u32, state: &KnowledgeState, queries: &[Query]) -> Vec<Answer> {
        if self.degraded {
            return vec![Answer::Yes; queries.len()];
        }
        let free: Vec<u32> = state.free_elements().iter().collect();
        let pos: HashMap<u32, usize> = free.iter().enumerate().map(|(i, &x)| (x, i)).collect();
        let to_mask = |ids: &[u32]| -> u32 {
            ids.iter()
                .filter_map(|x| pos.get(x))
                .fold(0u32, |acc, &b| acc | 1 << b)
        };
        let masks: Vec<u32> = state.residual_yes.iter().map(|s| to_mask(s)).collect();
        let fam: Vec<u32> = queries.iter().map(|q| to_mask(q)).collect();
        let rl_after = self.r.saturating_sub(round);
        let mut best: Option<(u32, u32)> = None; // (value, pattern)
        for pattern in 0u32..1 << fam.len() {
            // A query normalized to nothing must be denied: a yes on it is
            // immediately inconsistent.
            if (0..fam.len()).any(|i| fam[i] == 0 && pattern >> i & 1 == 1) {
                continue;
            }
            let nonempty: Vec<u32> = fam.iter().copied().filter(|&q| q != 0).collect();
            let mut sub_pattern = 0u32;
            let mut at = 0;
            for (i, &q) in fam.iter().enumerate() {
                if q != 0 {
                    if pattern >> i & 1 == 1 {
                        sub_pattern |= 1 << at;
                    }
                    at += 1;
                }
            }
            if let Some((free2, masks2)) = apply_pattern(&free, &masks, &nonempty, sub_pattern) {
                match self.solver.value(free2.len() as u32, masks2, rl_after) {
                    Ok(v) => {
                        if best.map_or(true, |(bv, _)| v > bv) {
                            best = Some((v, pattern));
                        }
                    }
                    Err(_) => {
                        self.degraded = true;
                        return vec![Answer::Yes; queries.len()];
                    }
                }
            }
        }
        let (_, pattern) = best.expect("the all-yes pattern is always consistent");
        (0..queries.len())
            .map(|i| {
                if pattern >> i & 1 == 1 {
                    Answer::Yes
                } else {
                    Answer::No
                }
            })
            .collect()
    }
}
