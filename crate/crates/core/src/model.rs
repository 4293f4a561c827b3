//! Game state shared by every strategy and by the referee.
//!
//! The game: a hidden subset of `{1, …, n}` is *excellent*. The questioner
//! asks batches of subset queries ("does this set contain an excellent
//! element?") over `r` rounds, then must either name `d` elements that are
//! excellent in every world consistent with the answers, or assert that
//! fewer than `d` excellent elements exist. Everything either side can
//! legitimately know is captured by [`KnowledgeState`]:
//!
//! * `dead` — the union of all no-answered queries; no excellent element
//!   lies there in any consistent world.
//! * `residual_yes` — every yes-answered query restricted to the live
//!   elements; each member must contain at least one excellent element.
//!
//! A state is *consistent* iff no residual member is empty. An element is
//! *forced* iff it appears as a singleton residual member; on consistent
//! states this coincides with "excellent in every consistent world", which
//! is what verdict validation is defined against (the equivalence is
//! exercised against a brute-force world enumeration in the tests).
//!
//! Queries and residuals are sparse sorted id lists: a round can contain
//! `n` singleton queries, and dense bitsets per query would cost `O(n^2)`
//! memory. Only the dead set is a bitset.

use serde::{Deserialize, Serialize};

use crate::set::ElemSet;

/// A query is a list of element ids in `1..=n`. Strategies emit sorted
/// duplicate-free lists; the model tolerates (and normalizes away) both
/// disorder and duplicates from external transcripts.
pub type Query = Vec<u32>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GameConfig {
    pub n: u32,
    pub d: u32,
    pub r: u32,
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum ModelError {
    #[error("invalid config: require 1 <= d <= n and r >= 1, got n={n} d={d} r={r}")]
    InvalidConfig { n: u32, d: u32, r: u32 },
    #[error("state is inconsistent: some yes-answered query has no live element")]
    Inconsistent,
    #[error("round has {queries} queries but {answers} answers")]
    AnswerCountMismatch { queries: usize, answers: usize },
    #[error("query contains element {id}, outside 1..={n}")]
    ElementOutOfRange { id: u32, n: u32 },
}

impl GameConfig {
    pub fn new(n: u32, d: u32, r: u32) -> Result<Self, ModelError> {
        if n == 0 || d == 0 || d > n || r == 0 {
            return Err(ModelError::InvalidConfig { n, d, r });
        }
        Ok(GameConfig { n, d, r })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Answer {
    Yes,
    No,
}

/// What the questioner asserts once the rounds are over.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Verdict {
    /// Exactly `d` distinct elements claimed excellent.
    Found { elements: Vec<u32> },
    /// Claim that fewer than `d` excellent elements exist.
    FewerThanD,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KnowledgeState {
    pub n: u32,
    /// Union of all no-answered queries.
    pub dead: ElemSet,
    /// Yes-answered queries restricted to the live elements: sorted id
    /// lists, the family itself sorted and deduplicated. Empty members are
    /// kept so inconsistency stays observable.
    pub residual_yes: Vec<Vec<u32>>,
}

impl KnowledgeState {
    pub fn new(n: u32) -> Self {
        KnowledgeState {
            n,
            dead: ElemSet::empty(n),
            residual_yes: Vec::new(),
        }
    }

    /// Elements not yet known to be non-excellent.
    pub fn free_elements(&self) -> ElemSet {
        let mut free = ElemSet::full(self.n);
        free.subtract(&self.dead);
        free
    }

    pub fn free_count(&self) -> u32 {
        self.n - self.dead.len()
    }

    pub fn is_consistent(&self) -> bool {
        self.residual_yes.iter().all(|s| !s.is_empty())
    }

    /// Restrict a query to the live elements (sorted, deduplicated). Answer
    /// semantics only depend on this restriction: dead elements cannot
    /// witness a yes.
    pub fn normalize_query(&self, q: &[u32]) -> Vec<u32> {
        let mut s: Vec<u32> = q.iter().copied().filter(|&x| !self.dead.contains(x)).collect();
        s.sort_unstable();
        s.dedup();
        s
    }

    /// Fold one answered round into the state. Duplicate queries are legal
    /// in transcripts; the residual family is deduplicated after
    /// restriction.
    pub fn apply_round(&mut self, queries: &[Query], answers: &[Answer]) -> Result<(), ModelError> {
        if queries.len() != answers.len() {
            return Err(ModelError::AnswerCountMismatch {
                queries: queries.len(),
                answers: answers.len(),
            });
        }
        for q in queries {
            for &id in q {
                if id == 0 || id > self.n {
                    return Err(ModelError::ElementOutOfRange { id, n: self.n });
                }
            }
        }
        for (q, &a) in queries.iter().zip(answers) {
            if a == Answer::No {
                for &id in q {
                    self.dead.insert(id);
                }
            }
        }
        let mut family: Vec<Vec<u32>> =
            Vec::with_capacity(self.residual_yes.len() + queries.len());
        for s in self.residual_yes.drain(..) {
            // Already sorted; only shrinks.
            family.push(s.into_iter().filter(|&x| !self.dead.contains(x)).collect());
        }
        for (q, &a) in queries.iter().zip(answers) {
            if a == Answer::Yes {
                family.push(self.normalize_query(q));
            }
        }
        family.sort_unstable();
        family.dedup();
        self.residual_yes = family;
        Ok(())
    }

    /// Elements excellent in every consistent world: exactly the singleton
    /// residual members. Errors if no consistent world exists.
    pub fn forced_excellent(&self) -> Result<Vec<u32>, ModelError> {
        if !self.is_consistent() {
            return Err(ModelError::Inconsistent);
        }
        let mut forced: Vec<u32> = self
            .residual_yes
            .iter()
            .filter(|s| s.len() == 1)
            .map(|s| s[0])
            .collect();
        forced.sort_unstable();
        forced.dedup();
        Ok(forced)
    }
}

/// Whether a verdict is correct in *every* world consistent with `state`.
///
/// `Found` must name exactly `d` distinct forced elements; `FewerThanD` is
/// valid iff at most `d - 1` elements are still live. On an inconsistent
/// state no verdict is considered valid.
pub fn verdict_valid(state: &KnowledgeState, verdict: &Verdict, d: u32) -> bool {
    let Ok(forced) = state.forced_excellent() else {
        return false;
    };
    match verdict {
        Verdict::Found { elements } => {
            let mut xs = elements.clone();
            xs.sort_unstable();
            xs.dedup();
            xs.len() == elements.len()
                && elements.len() == d as usize
                && xs.iter().all(|x| forced.binary_search(x).is_ok())
        }
        Verdict::FewerThanD => state.free_count() <= d - 1,
    }
}

/// One answered round as recorded in a transcript. Queries are sorted id
/// lists; `index` is 1-based.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoundRecord {
    pub index: u32,
    pub queries: Vec<Vec<u32>>,
    pub answers: Vec<Answer>,
}

/// Full record of a played game. Serializes to a stable JSON layout so
/// transcripts round-trip byte-for-byte.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Transcript {
    pub config: GameConfig,
    pub rounds: Vec<RoundRecord>,
    pub verdict: Verdict,
}

impl Transcript {
    pub fn total_queries(&self) -> u64 {
        self.rounds.iter().map(|r| r.queries.len() as u64).sum()
    }

    /// Knowledge state after each recorded round.
    pub fn replay(&self) -> Result<Vec<KnowledgeState>, ModelError> {
        let mut state = KnowledgeState::new(self.config.n);
        let mut states = Vec::with_capacity(self.rounds.len());
        for round in &self.rounds {
            state.apply_round(&round.queries, &round.answers)?;
            states.push(state.clone());
        }
        Ok(states)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ids(v: &[u32]) -> Vec<u32> {
        v.to_vec()
    }

    /// Brute-force semantics: enumerate every candidate excellent set.
    fn consistent_worlds(state: &KnowledgeState) -> Vec<Vec<u32>> {
        let free = state.free_elements().ids();
        let mut worlds = Vec::new();
        for mask in 0u32..1 << free.len() {
            let world: Vec<u32> = free
                .iter()
                .enumerate()
                .filter(|(i, _)| mask >> i & 1 == 1)
                .map(|(_, &x)| x)
                .collect();
            if state
                .residual_yes
                .iter()
                .all(|s| s.iter().any(|x| world.binary_search(x).is_ok()))
            {
                worlds.push(world);
            }
        }
        worlds
    }

    #[test]
    fn update_and_forced_walkthrough() {
        let mut st = KnowledgeState::new(9);
        st.apply_round(
            &[ids(&[1, 2, 3]), ids(&[4, 5, 6])],
            &[Answer::Yes, Answer::No],
        )
        .unwrap();
        assert_eq!(st.dead.ids(), vec![4, 5, 6]);
        assert_eq!(st.residual_yes, vec![ids(&[1, 2, 3])]);
        assert!(st.is_consistent());
        assert_eq!(st.forced_excellent().unwrap(), Vec::<u32>::new());

        st.apply_round(&[ids(&[1]), ids(&[2])], &[Answer::No, Answer::No])
            .unwrap();
        assert_eq!(st.dead.ids(), vec![1, 2, 4, 5, 6]);
        assert_eq!(st.residual_yes, vec![ids(&[3])]);
        assert_eq!(st.forced_excellent().unwrap(), vec![3]);
        assert_eq!(st.free_elements().ids(), vec![3, 7, 8, 9]);
    }

    #[test]
    fn yes_on_dead_query_is_inconsistent() {
        let mut st = KnowledgeState::new(5);
        st.apply_round(&[ids(&[1, 2])], &[Answer::No]).unwrap();
        st.apply_round(&[ids(&[1, 2])], &[Answer::Yes]).unwrap();
        assert!(!st.is_consistent());
        assert_eq!(st.forced_excellent(), Err(ModelError::Inconsistent));
        assert!(!verdict_valid(&st, &Verdict::FewerThanD, 1));
    }

    #[test]
    fn duplicates_dedup_in_residual() {
        let mut st = KnowledgeState::new(6);
        st.apply_round(
            &[ids(&[1, 2]), ids(&[2, 1, 1]), ids(&[2, 3])],
            &[Answer::Yes, Answer::Yes, Answer::Yes],
        )
        .unwrap();
        assert_eq!(st.residual_yes.len(), 2);
        // An empty query answered no is legal and changes nothing.
        st.apply_round(&[ids(&[])], &[Answer::No]).unwrap();
        assert!(st.is_consistent());
        assert_eq!(st.residual_yes.len(), 2);
    }

    #[test]
    fn forced_matches_singleton_rule() {
        let mut st = KnowledgeState::new(4);
        st.apply_round(&[ids(&[1, 2]), ids(&[2])], &[Answer::Yes, Answer::Yes])
            .unwrap();
        assert_eq!(st.forced_excellent().unwrap(), vec![2]);
    }

    #[test]
    fn forced_equals_world_intersection_on_small_states() {
        // Oracle first: "forced" must mean "in every consistent world".
        let n = 5u32;
        let subsets: Vec<Vec<u32>> = (0u32..1 << n)
            .map(|m| (1..=n).filter(|i| m >> (i - 1) & 1 == 1).collect())
            .collect();
        let mut checked = 0usize;
        for a in 0..subsets.len() {
            for b in (0..subsets.len()).step_by(3) {
                for dead in [vec![], vec![1u32], vec![4, 5]] {
                    let mut st = KnowledgeState::new(n);
                    let queries = vec![subsets[a].clone(), subsets[b].clone(), dead.clone()];
                    let answers = [Answer::Yes, Answer::Yes, Answer::No];
                    st.apply_round(&queries, &answers).unwrap();
                    if !st.is_consistent() {
                        continue;
                    }
                    let worlds = consistent_worlds(&st);
                    assert!(!worlds.is_empty());
                    let semantic: Vec<u32> = st
                        .free_elements()
                        .ids()
                        .into_iter()
                        .filter(|&x| worlds.iter().all(|w| w.binary_search(&x).is_ok()))
                        .collect();
                    assert_eq!(st.forced_excellent().unwrap(), semantic);
                    checked += 1;
                }
            }
        }
        // Most of the 32·11·3 combinations stay consistent and countable.
        assert!(checked > 800, "only {checked} consistent states covered");
    }

    #[test]
    fn verdict_validity_matches_world_semantics() {
        let n = 4u32;
        for d in 1..=2u32 {
            for ya in 0u32..1 << n {
                for nb in 0u32..1 << n {
                    let yes: Vec<u32> = (1..=n).filter(|i| ya >> (i - 1) & 1 == 1).collect();
                    let no: Vec<u32> = (1..=n).filter(|i| nb >> (i - 1) & 1 == 1).collect();
                    let mut st = KnowledgeState::new(n);
                    st.apply_round(&[yes.clone(), no.clone()], &[Answer::Yes, Answer::No])
                        .unwrap();
                    if !st.is_consistent() {
                        continue;
                    }
                    let worlds = consistent_worlds(&st);
                    // FewerThanD: true in every world iff every world is small.
                    let semantic_few = worlds.iter().all(|w| w.len() < d as usize);
                    assert_eq!(
                        verdict_valid(&st, &Verdict::FewerThanD, d),
                        semantic_few,
                        "n={n} d={d} yes={yes:?} no={no:?}"
                    );
                    // Found: every claimed d-subset must be excellent in
                    // every world.
                    let free = st.free_elements().ids();
                    for m in 0u32..1 << free.len() {
                        let xs: Vec<u32> = free
                            .iter()
                            .enumerate()
                            .filter(|(i, _)| m >> i & 1 == 1)
                            .map(|(_, &x)| x)
                            .collect();
                        if xs.len() != d as usize {
                            continue;
                        }
                        let semantic =
                            worlds.iter().all(|w| {
                                xs.iter().all(|x| w.binary_search(x).is_ok())
                            });
                        assert_eq!(
                            verdict_valid(&st, &Verdict::Found { elements: xs.clone() }, d),
                            semantic
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn found_requires_exactly_d_distinct() {
        let mut st = KnowledgeState::new(4);
        st.apply_round(&[ids(&[1]), ids(&[2])], &[Answer::Yes, Answer::Yes])
            .unwrap();
        assert!(verdict_valid(&st, &Verdict::Found { elements: vec![1, 2] }, 2));
        assert!(!verdict_valid(&st, &Verdict::Found { elements: vec![1, 1] }, 2));
        assert!(!verdict_valid(&st, &Verdict::Found { elements: vec![1] }, 2));
        assert!(!verdict_valid(&st, &Verdict::Found { elements: vec![1, 2, 3] }, 2));
        assert!(!verdict_valid(&st, &Verdict::Found { elements: vec![1, 3] }, 2));
    }

    #[test]
    fn transcript_round_trips_byte_exact() {
        let t = Transcript {
            config: GameConfig::new(9, 1, 2).unwrap(),
            rounds: vec![
                RoundRecord {
                    index: 1,
                    queries: vec![vec![1, 2, 3], vec![4, 5, 6]],
                    answers: vec![Answer::Yes, Answer::No],
                },
                RoundRecord {
                    index: 2,
                    queries: vec![vec![1], vec![2]],
                    answers: vec![Answer::No, Answer::No],
                },
            ],
            verdict: Verdict::Found { elements: vec![3] },
        };
        let json = serde_json::to_string_pretty(&t).unwrap();
        let back: Transcript = serde_json::from_str(&json).unwrap();
        assert_eq!(back, t);
        assert_eq!(serde_json::to_string_pretty(&back).unwrap(), json);
        // Field names are a stable external format.
        let compact = serde_json::to_string(&t).unwrap();
        assert!(compact.contains("\"config\":{\"n\":9,\"d\":1,\"r\":2}"));
        assert!(compact.contains("\"answers\":[\"yes\",\"no\"]"));
        assert!(compact.contains("\"verdict\":{\"kind\":\"found\",\"elements\":[3]}"));

        let few = Transcript {
            verdict: Verdict::FewerThanD,
            ..t
        };
        let s = serde_json::to_string(&few).unwrap();
        assert!(s.contains("{\"kind\":\"fewer_than_d\"}"));

        let states = few.replay().unwrap();
        assert_eq!(states.len(), 2);
        assert_eq!(states[1].forced_excellent().unwrap(), vec![3]);
        assert_eq!(states[1].free_elements().ids(), vec![3, 7, 8, 9]);
        assert_eq!(few.total_queries(), 4);
    }

    #[test]
    fn replay_rejects_out_of_range_ids() {
        let t = Transcript {
            config: GameConfig::new(3, 1, 1).unwrap(),
            rounds: vec![RoundRecord {
                index: 1,
                queries: vec![vec![4]],
                answers: vec![Answer::No],
            }],
            verdict: Verdict::FewerThanD,
        };
        assert_eq!(
            t.replay().unwrap_err(),
            ModelError::ElementOutOfRange { id: 4, n: 3 }
        );
    }

    #[test]
    fn config_validation() {
        assert!(GameConfig::new(0, 1, 1).is_err());
        assert!(GameConfig::new(3, 0, 1).is_err());
        assert!(GameConfig::new(3, 4, 1).is_err());
        assert!(GameConfig::new(3, 1, 0).is_err());
        assert!(GameConfig::new(3, 3, 1).is_ok());
    }
}
