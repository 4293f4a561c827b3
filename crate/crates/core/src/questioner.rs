//! Questioner strategies: the two splitting algorithms (single target and
//! d targets in parallel) plus an exhaustive-singletons baseline.
//!
//! Both splitting strategies keep the branching factor fixed from the
//! original `n`: ⌈n^{1/r}⌉ parts for the single-target search, and
//! `k = ⌈(d^{r−1}·n)^{1/r}⌉` round-1 parts with per-part fan-out
//! `q = min{q : k·q^{r−1} ≥ n}` for the parallel search. All tie-breaking
//! is deterministic: parts are ordered by smallest contained element, the
//! spared part is the last smallest one, and the pursued part is the
//! lowest-ordered yes part.

use crate::bounds::ceil_root;
use crate::model::{Answer, GameConfig, KnowledgeState, Query, Verdict};

pub trait Questioner {
    fn name(&self) -> String;
    /// Emit this round's batch. May be empty.
    fn queries(&mut self, round: u32, state: &KnowledgeState) -> Vec<Query>;
    /// Digest the answers to the batch emitted this round.
    fn observe(&mut self, round: u32, answers: &[Answer]);
    /// Called once, after round r.
    fn verdict(&mut self, state: &KnowledgeState) -> Verdict;
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum QuestionerError {
    #[error("strategy requires d = 1 (got d = {0})")]
    RequiresSingleTarget(u32),
    #[error("strategy requires d ≥ 2 (got d = {0})")]
    RequiresMultiTarget(u32),
}

/// Split `base` (ascending ids) into `parts` contiguous blocks whose sizes
/// differ by at most one, larger blocks first; empty blocks are dropped.
pub fn balanced_partition(base: &[u32], parts: u32) -> Vec<Vec<u32>> {
    assert!(parts >= 1, "parts_count must be positive");
    let m = base.len();
    let parts = parts as usize;
    let small = m / parts;
    let rem = m % parts;
    let mut out = Vec::with_capacity(parts.min(m));
    let mut at = 0usize;
    for i in 0..parts {
        let size = if i < rem { small + 1 } else { small };
        if size == 0 {
            break;
        }
        out.push(base[at..at + size].to_vec());
        at += size;
    }
    out
}

/// All singletons of currently free elements.
pub fn exhaustive_singletons(state: &KnowledgeState) -> Vec<Query> {
    state.free_elements().iter().map(|e| vec![e]).collect()
}

/// Single-target halving search: each round partitions the current search
/// region into p = ⌈n^{1/r}⌉ parts and asks all but the spared part C;
/// a yes narrows to the lowest yes part, all-no narrows to C. In the final
/// round with an all-no history it asks every part instead, so that a
/// fully dead universe is certifiable.
pub struct KatonaSplit {
    cfg: GameConfig,
    p: u32,
    picked: Vec<u32>,
    had_yes: bool,
    asked: Vec<Vec<u32>>,
    spared: Option<Vec<u32>>,
}

impl KatonaSplit {
    pub fn new(cfg: GameConfig) -> Result<Self, QuestionerError> {
        if cfg.d != 1 {
            return Err(QuestionerError::RequiresSingleTarget(cfg.d));
        }
        Ok(KatonaSplit {
            cfg,
            p: ceil_root(cfg.n as u64, cfg.r) as u32,
            picked: (1..=cfg.n).collect(),
            had_yes: false,
            asked: Vec::new(),
            spared: None,
        })
    }
}

impl Questioner for KatonaSplit {
    fn name(&self) -> String {
        "katona".to_string()
    }

    fn queries(&mut self, round: u32, state: &KnowledgeState) -> Vec<Query> {
        self.picked.retain(|&x| !state.dead.contains(x));
        let parts = balanced_partition(&self.picked, self.p);
        let ask_all = round == self.cfg.r && !self.had_yes;
        if ask_all {
            self.spared = None;
            self.asked = parts.clone();
        } else {
            // Spare the last part: with equal-or-smaller blocks at the
            // tail, that is the last smallest one.
            self.spared = parts.last().cloned();
            self.asked = parts[..parts.len().saturating_sub(1)].to_vec();
        }
        self.asked.clone()
    }

    fn observe(&mut self, _round: u32, answers: &[Answer]) {
        let yes = answers.iter().position(|&a| a == Answer::Yes);
        match yes {
            Some(i) => {
                self.picked = self.asked[i].clone();
                self.had_yes = true;
            }
            None => {
                self.picked = self.spared.take().unwrap_or_default();
            }
        }
    }

    fn verdict(&mut self, _state: &KnowledgeState) -> Verdict {
        if self.had_yes {
            if let Some(&x) = self.picked.first() {
                return Verdict::Found { elements: vec![x] };
            }
        }
        Verdict::FewerThanD
    }
}

struct MidGroup {
    asked: usize,
    excluded: Option<Vec<u32>>,
}

struct LastGroup {
    asked: usize,
    excluded: Option<u32>,
}

enum Pending {
    None,
    Round1 {
        parts: Vec<Vec<u32>>,
    },
    Mid {
        subs: Vec<Vec<u32>>,
        groups: Vec<MidGroup>,
        hold: bool,
    },
    Last {
        singles: Vec<u32>,
        groups: Vec<LastGroup>,
    },
}

/// d-targets-in-parallel search. Round 1 asks the whole k-part partition
/// and keeps up to d yes parts. A kept singleton part is a banked
/// certificate; banked + active parts never exceed d. While fewer than d
/// parts are committed, later rounds ask the full q-part sub-partition of
/// every active part (so these rounds can commit new parts and an all-no
/// game ends with everything dead). Once d parts are committed, each
/// active part only needs narrowing: ask all sub-parts except the last,
/// all-no certifying the spared one. The final round does the same with
/// singletons.
pub struct KatonaParallel {
    cfg: GameConfig,
    pub k: u64,
    pub q: u64,
    banked: Vec<u32>,
    active: Vec<Vec<u32>>,
    pending: Pending,
}

impl KatonaParallel {
    pub fn new(cfg: GameConfig) -> Result<Self, QuestionerError> {
        if cfg.d < 2 {
            return Err(QuestionerError::RequiresMultiTarget(cfg.d));
        }
        let dn = (cfg.d as u128)
            .checked_pow(cfg.r - 1)
            .and_then(|p| p.checked_mul(cfg.n as u128))
            .filter(|&p| p <= u64::MAX as u128)
            .expect("d^(r-1)*n fits in u64") as u64;
        let k = ceil_root(dn, cfg.r);
        let q = if cfg.r >= 2 {
            let mut q = 1u64;
            while (k as u128).saturating_mul((q as u128).pow(cfg.r - 1)) < cfg.n as u128 {
                q += 1;
            }
            q
        } else {
            1
        };
        Ok(KatonaParallel {
            cfg,
            k,
            q,
            banked: Vec::new(),
            active: Vec::new(),
            pending: Pending::None,
        })
    }

    fn bank(&mut self, x: u32) {
        if !self.banked.contains(&x) {
            self.banked.push(x);
        }
    }

    /// Drop dead elements from active parts and promote singletons to
    /// banked certificates.
    fn refresh(&mut self, state: &KnowledgeState) {
        let mut kept = Vec::with_capacity(self.active.len());
        for mut part in std::mem::take(&mut self.active) {
            part.retain(|&x| !state.dead.contains(x));
            match part.len() {
                0 => {}
                1 => self.bank(part[0]),
                _ => kept.push(part),
            }
        }
        self.active = kept;
    }

    fn committed(&self) -> usize {
        self.banked.len() + self.active.len()
    }
}

impl Questioner for KatonaParallel {
    fn name(&self) -> String {
        "katona-parallel".to_string()
    }

    fn queries(&mut self, round: u32, state: &KnowledgeState) -> Vec<Query> {
        if round == 1 {
            let base: Vec<u32> = (1..=self.cfg.n).collect();
            let parts = balanced_partition(&base, self.k.min(self.cfg.n as u64) as u32);
            self.pending = Pending::Round1 {
                parts: parts.clone(),
            };
            return parts;
        }
        self.refresh(state);
        let hold = self.committed() >= self.cfg.d as usize;
        if round < self.cfg.r {
            let mut subs = Vec::new();
            let mut groups = Vec::new();
            for part in &self.active {
                let mut ps = balanced_partition(part, self.q.min(part.len() as u64) as u32);
                if hold && ps.len() >= 2 {
                    // Narrowing only: all-no certifies the spared sub-part.
                    let excluded = ps.pop();
                    groups.push(MidGroup {
                        asked: ps.len(),
                        excluded,
                    });
                } else {
                    groups.push(MidGroup {
                        asked: ps.len(),
                        excluded: None,
                    });
                }
                subs.extend(ps);
            }
            self.pending = Pending::Mid {
                subs: subs.clone(),
                groups,
                hold,
            };
            subs
        } else {
            let mut singles = Vec::new();
            let mut groups = Vec::new();
            for part in &self.active {
                if hold {
                    let (last, rest) = part.split_last().expect("active parts are nonempty");
                    singles.extend_from_slice(rest);
                    groups.push(LastGroup {
                        asked: rest.len(),
                        excluded: Some(*last),
                    });
                } else {
                    singles.extend_from_slice(part);
                    groups.push(LastGroup {
                        asked: part.len(),
                        excluded: None,
                    });
                }
            }
            self.pending = Pending::Last {
                singles: singles.clone(),
                groups,
            };
            singles.iter().map(|&x| vec![x]).collect()
        }
    }

    fn observe(&mut self, _round: u32, answers: &[Answer]) {
        match std::mem::replace(&mut self.pending, Pending::None) {
            Pending::None => {}
            Pending::Round1 { parts } => {
                for (part, &a) in parts.iter().zip(answers) {
                    if a == Answer::Yes && self.committed() < self.cfg.d as usize {
                        if part.len() == 1 {
                            self.bank(part[0]);
                        } else {
                            self.active.push(part.clone());
                        }
                    }
                }
            }
            Pending::Mid { subs, groups, hold } => {
                let mut at = 0usize;
                let mut new_active = Vec::new();
                for group in groups {
                    let slice = &subs[at..at + group.asked];
                    let slice_ans = &answers[at..at + group.asked];
                    at += group.asked;
                    if hold {
                        // Exactly one sub-part survives per group.
                        let survivor = slice
                            .iter()
                            .zip(slice_ans)
                            .find(|(_, &a)| a == Answer::Yes)
                            .map(|(s, _)| s.clone())
                            .or(group.excluded)
                            .expect("narrowing group has a survivor");
                        if survivor.len() == 1 {
                            self.bank(survivor[0]);
                        } else {
                            new_active.push(survivor);
                        }
                    } else {
                        for (s, &a) in slice.iter().zip(slice_ans) {
                            if a == Answer::Yes
                                && self.banked.len() + new_active.len() < self.cfg.d as usize
                            {
                                if s.len() == 1 {
                                    self.bank(s[0]);
                                } else {
                                    new_active.push(s.clone());
                                }
                            }
                        }
                    }
                }
                self.active = new_active;
            }
            Pending::Last { singles, groups } => {
                let mut at = 0usize;
                for group in groups {
                    let slice = &singles[at..at + group.asked];
                    let slice_ans = &answers[at..at + group.asked];
                    at += group.asked;
                    let mut any_yes = false;
                    for (&x, &a) in slice.iter().zip(slice_ans) {
                        if a == Answer::Yes {
                            any_yes = true;
                            self.bank(x);
                        }
                    }
                    if !any_yes {
                        if let Some(x) = group.excluded {
                            self.bank(x);
                        }
                    }
                }
                self.active.clear();
            }
        }
    }

    fn verdict(&mut self, _state: &KnowledgeState) -> Verdict {
        let mut certs = self.banked.clone();
        certs.sort_unstable();
        certs.dedup();
        if certs.len() >= self.cfg.d as usize {
            certs.truncate(self.cfg.d as usize);
            Verdict::Found { elements: certs }
        } else {
            Verdict::FewerThanD
        }
    }
}

/// Baseline: resolve everything with singletons in round 1, idle after.
pub struct SingletonsQuestioner {
    d: u32,
}

impl SingletonsQuestioner {
    pub fn new(cfg: GameConfig) -> Self {
        SingletonsQuestioner { d: cfg.d }
    }
}

impl Questioner for SingletonsQuestioner {
    fn name(&self) -> String {
        "singletons".to_string()
    }

    fn queries(&mut self, round: u32, state: &KnowledgeState) -> Vec<Query> {
        if round == 1 {
            exhaustive_singletons(state)
        } else {
            Vec::new()
        }
    }

    fn observe(&mut self, _round: u32, _answers: &[Answer]) {}

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

#[cfg(test)]
mod tests {
    use super::*;
    use crate::adversary::{Adversary, FixedSetAdversary, LemmaFamilyAdversary, RandomAdversary};
    use crate::model::verdict_valid;
    use crate::set::ElemSet;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Minimal referee for strategy tests; the real one lives in harness.
    fn drive(
        cfg: GameConfig,
        q: &mut dyn Questioner,
        adv: &mut dyn Adversary,
    ) -> (u64, Verdict, bool, KnowledgeState) {
        let mut state = KnowledgeState::new(cfg.n);
        let mut total = 0u64;
        for round in 1..=cfg.r {
            let batch = q.queries(round, &state);
            total += batch.len() as u64;
            let answers = adv.answer(round, &state, &batch);
            state.apply_round(&batch, &answers).unwrap();
            assert!(state.is_consistent(), "{} inconsistent", adv.name());
            q.observe(round, &answers);
        }
        let verdict = q.verdict(&state);
        let valid = verdict_valid(&state, &verdict, cfg.d);
        (total, verdict, valid, state)
    }

    #[test]
    fn balanced_partition_examples() {
        let base: Vec<u32> = (1..=9).collect();
        assert_eq!(
            balanced_partition(&base, 3),
            vec![vec![1, 2, 3], vec![4, 5, 6], vec![7, 8, 9]]
        );
        let base: Vec<u32> = (1..=7).collect();
        assert_eq!(
            balanced_partition(&base, 3),
            vec![vec![1, 2, 3], vec![4, 5], vec![6, 7]]
        );
        assert_eq!(balanced_partition(&[1, 2], 4), vec![vec![1], vec![2]]);
        assert_eq!(balanced_partition(&[], 3), Vec::<Vec<u32>>::new());
    }

    #[test]
    fn balanced_partition_properties() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..300 {
            let m = rng.gen_range(0..=40u32);
            let parts = rng.gen_range(1..=10u32);
            let base: Vec<u32> = (1..=m).collect();
            let got = balanced_partition(&base, parts);
            let flat: Vec<u32> = got.iter().flatten().copied().collect();
            assert_eq!(flat, base, "cover and order");
            if !got.is_empty() {
                let sizes: Vec<usize> = got.iter().map(|p| p.len()).collect();
                let mx = *sizes.iter().max().unwrap();
                let mn = *sizes.iter().min().unwrap();
                assert!(mx - mn <= 1);
                assert!(sizes.windows(2).all(|w| w[0] >= w[1]), "larger first");
                assert!(got.len() as u32 <= parts);
            }
        }
    }

    #[test]
    fn katona_trace_n9_r2_all_no() {
        let cfg = GameConfig::new(9, 1, 2).unwrap();
        let mut q = KatonaSplit::new(cfg).unwrap();
        let st = KnowledgeState::new(9);
        let round1 = q.queries(1, &st);
        assert_eq!(round1, vec![vec![1, 2, 3], vec![4, 5, 6]]);
        q.observe(1, &[Answer::No, Answer::No]);
        let mut st = st;
        st.apply_round(&round1, &[Answer::No, Answer::No]).unwrap();
        let round2 = q.queries(2, &st);
        assert_eq!(round2, vec![vec![7], vec![8], vec![9]]);
        st.apply_round(&round2, &[Answer::No; 3]).unwrap();
        q.observe(2, &[Answer::No; 3]);
        assert_eq!(round1.len() + round2.len(), 5);
        let v = q.verdict(&st);
        assert_eq!(v, Verdict::FewerThanD);
        assert!(verdict_valid(&st, &v, 1));
    }

    #[test]
    fn katona_trace_n9_r2_yes_then_no() {
        let cfg = GameConfig::new(9, 1, 2).unwrap();
        let mut q = KatonaSplit::new(cfg).unwrap();
        let mut st = KnowledgeState::new(9);
        let round1 = q.queries(1, &st);
        st.apply_round(&round1, &[Answer::Yes, Answer::No]).unwrap();
        q.observe(1, &[Answer::Yes, Answer::No]);
        let round2 = q.queries(2, &st);
        assert_eq!(round2, vec![vec![1], vec![2]]);
        st.apply_round(&round2, &[Answer::No, Answer::No]).unwrap();
        q.observe(2, &[Answer::No, Answer::No]);
        let v = q.verdict(&st);
        assert_eq!(v, Verdict::Found { elements: vec![3] });
        assert!(verdict_valid(&st, &v, 1));
    }

    #[test]
    fn katona_stays_within_bound_and_valid_on_small_grid() {
        for n in [1u32, 2, 3, 5, 9, 17, 40, 64] {
            for r in 1..=4u32 {
                let cfg = GameConfig::new(n, 1, r).unwrap();
                let upper = r as u64 * ceil_root(n as u64, r);
                let mut advs: Vec<Box<dyn Adversary>> = vec![
                    Box::new(FixedSetAdversary::new(ElemSet::empty(n))),
                    Box::new(FixedSetAdversary::new(ElemSet::from_ids(n, [1].into_iter()))),
                    Box::new(FixedSetAdversary::new(ElemSet::from_ids(
                        n,
                        (1..=n).filter(|x| x % 3 == 0),
                    ))),
                    Box::new(RandomAdversary::new(0.4, 99 + n as u64 + r as u64)),
                    Box::new(LemmaFamilyAdversary::endgame_auto(cfg)),
                ];
                for adv in advs.iter_mut() {
                    let mut q = KatonaSplit::new(cfg).unwrap();
                    let (total, verdict, valid, _) = drive(cfg, &mut q, adv.as_mut());
                    assert!(
                        total <= upper,
                        "n={n} r={r} adv={} total={total} > {upper}",
                        adv.name()
                    );
                    assert!(valid, "n={n} r={r} adv={} verdict={verdict:?}", adv.name());
                }
            }
        }
    }

    #[test]
    fn katona_finds_true_element_against_truthful_oracle() {
        let cfg = GameConfig::new(40, 1, 3).unwrap();
        for hidden in [vec![7u32], vec![13, 29], vec![40]] {
            let mut q = KatonaSplit::new(cfg).unwrap();
            let hs = ElemSet::from_ids(40, hidden.iter().copied());
            let mut adv = FixedSetAdversary::new(hs);
            let (_, verdict, valid, _) = drive(cfg, &mut q, &mut adv);
            assert!(valid);
            match verdict {
                Verdict::Found { elements } => {
                    assert_eq!(elements.len(), 1);
                    assert!(hidden.contains(&elements[0]));
                }
                v => panic!("expected Found, got {v:?}"),
            }
        }
    }

    #[test]
    fn parallel_parameters_n100_d2_r2() {
        let cfg = GameConfig::new(100, 2, 2).unwrap();
        let q = KatonaParallel::new(cfg).unwrap();
        assert_eq!(q.k, 15);
        assert_eq!(q.q, 7);
        let mut advs: Vec<Box<dyn Adversary>> = vec![
            Box::new(FixedSetAdversary::new(ElemSet::from_ids(
                100,
                [3, 50].into_iter(),
            ))),
            Box::new(FixedSetAdversary::new(ElemSet::empty(100))),
            Box::new(LemmaFamilyAdversary::endgame_auto(cfg)),
            Box::new(RandomAdversary::new(0.5, 5)),
        ];
        for adv in advs.iter_mut() {
            let mut q = KatonaParallel::new(cfg).unwrap();
            let (total, verdict, valid, _) = drive(cfg, &mut q, adv.as_mut());
            assert!(total <= 29, "adv={} total={total}", adv.name());
            assert!(valid, "adv={} verdict={verdict:?}", adv.name());
        }
    }

    #[test]
    fn parallel_narrowing_keeps_n30_d4_r2_within_bound() {
        let cfg = GameConfig::new(30, 4, 2).unwrap();
        let q = KatonaParallel::new(cfg).unwrap();
        assert_eq!(q.k, 11);
        let upper = 2 * 11;
        let mut advs: Vec<Box<dyn Adversary>> = vec![
            Box::new(FixedSetAdversary::new(ElemSet::from_ids(
                30,
                [1, 9, 17, 25].into_iter(),
            ))),
            Box::new(FixedSetAdversary::new(ElemSet::from_ids(30, 1..=30))),
            Box::new(FixedSetAdversary::new(ElemSet::from_ids(30, 1..=3))),
            Box::new(LemmaFamilyAdversary::endgame_auto(cfg)),
            Box::new(LemmaFamilyAdversary::plain(cfg)),
            Box::new(RandomAdversary::new(0.7, 8)),
            Box::new(RandomAdversary::new(0.3, 9)),
        ];
        for adv in advs.iter_mut() {
            let mut q = KatonaParallel::new(cfg).unwrap();
            let (total, verdict, valid, _) = drive(cfg, &mut q, adv.as_mut());
            assert!(total <= upper, "adv={} total={total}", adv.name());
            assert!(valid, "adv={} verdict={verdict:?}", adv.name());
        }
    }

    #[test]
    fn parallel_degenerate_full_split() {
        // n = d: round 1 is all singletons and the verdict is immediate.
        let cfg = GameConfig::new(3, 3, 2).unwrap();
        let mut q = KatonaParallel::new(cfg).unwrap();
        let st = KnowledgeState::new(3);
        let r1 = q.queries(1, &st);
        assert_eq!(r1, vec![vec![1], vec![2], vec![3]]);
        let mut adv = FixedSetAdversary::new(ElemSet::from_ids(3, 1..=3));
        let mut q = KatonaParallel::new(cfg).unwrap();
        let (_, verdict, valid, _) = drive(cfg, &mut q, &mut adv);
        assert!(valid);
        assert_eq!(
            verdict,
            Verdict::Found {
                elements: vec![1, 2, 3]
            }
        );
    }

    #[test]
    fn parallel_all_no_certifies_fewer() {
        let cfg = GameConfig::new(50, 3, 3).unwrap();
        let mut q = KatonaParallel::new(cfg).unwrap();
        let mut adv = FixedSetAdversary::new(ElemSet::empty(50));
        let (_, verdict, valid, st) = drive(cfg, &mut q, &mut adv);
        assert_eq!(verdict, Verdict::FewerThanD);
        assert!(valid);
        assert_eq!(st.free_count(), 0);
    }

    #[test]
    fn parallel_banks_partial_certificates() {
        // Two hidden elements with d = 3: the verdict must be FewerThanD
        // and every hidden element stays free or ends banked-but-short.
        let cfg = GameConfig::new(60, 3, 3).unwrap();
        let mut q = KatonaParallel::new(cfg).unwrap();
        let mut adv = FixedSetAdversary::new(ElemSet::from_ids(60, [10, 44].into_iter()));
        let (_, verdict, valid, _) = drive(cfg, &mut q, &mut adv);
        assert_eq!(verdict, Verdict::FewerThanD);
        assert!(valid);
    }

    #[test]
    fn parallel_grid_against_mixed_adversaries() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for _ in 0..60 {
            let d = rng.gen_range(2..=4u32);
            let n = rng.gen_range(d..=80);
            let r = rng.gen_range(1..=4u32);
            let cfg = GameConfig::new(n, d, r).unwrap();
            let upper = r as u64
                * ceil_root((d as u64).pow(r - 1).saturating_mul(n as u64), r);
            let hidden = ElemSet::from_ids(n, (1..=n).filter(|_| rng.gen_bool(0.2)));
            let mut advs: Vec<Box<dyn Adversary>> = vec![
                Box::new(FixedSetAdversary::new(hidden)),
                Box::new(LemmaFamilyAdversary::endgame_auto(cfg)),
                Box::new(RandomAdversary::new(0.5, rng.gen())),
            ];
            for adv in advs.iter_mut() {
                let mut q = KatonaParallel::new(cfg).unwrap();
                let (total, verdict, valid, _) = drive(cfg, &mut q, adv.as_mut());
                assert!(
                    total <= upper,
                    "n={n} d={d} r={r} adv={} total={total} > {upper}",
                    adv.name()
                );
                assert!(
                    valid,
                    "n={n} d={d} r={r} adv={} verdict={verdict:?}",
                    adv.name()
                );
            }
        }
    }

    #[test]
    fn singletons_baseline() {
        let st = KnowledgeState::new(3);
        assert_eq!(
            exhaustive_singletons(&st),
            vec![vec![1], vec![2], vec![3]]
        );
        let mut st = KnowledgeState::new(3);
        st.apply_round(&[vec![2]], &[Answer::No]).unwrap();
        assert_eq!(exhaustive_singletons(&st), vec![vec![1], vec![3]]);

        let cfg = GameConfig::new(12, 2, 3).unwrap();
        let mut q = SingletonsQuestioner::new(cfg);
        let mut adv = FixedSetAdversary::new(ElemSet::from_ids(12, [4, 9].into_iter()));
        let (total, verdict, valid, _) = drive(cfg, &mut q, &mut adv);
        assert_eq!(total, 12);
        assert!(valid);
        assert_eq!(
            verdict,
            Verdict::Found {
                elements: vec![4, 9]
            }
        );
    }

    #[test]
    fn strategy_constructors_enforce_d() {
        let cfg2 = GameConfig::new(10, 2, 2).unwrap();
        assert_eq!(
            KatonaSplit::new(cfg2).err(),
            Some(QuestionerError::RequiresSingleTarget(2))
        );
        let cfg1 = GameConfig::new(10, 1, 2).unwrap();
        assert!(matches!(
            KatonaParallel::new(cfg1).err(),
            Some(QuestionerError::RequiresMultiTarget(1))
        ));
    }
}
