//! Round-limited search games for excellent elements.
//!
//! A hidden subset `S ⊆ {1, …, n}` of "excellent" elements is probed with
//! subset queries ("does `Q` contain an excellent element?"). Queries are
//! issued in `r` batches; every query in a batch must be committed before
//! any answer from that batch is seen. After the last batch the searcher
//! must either name `d` elements that are provably excellent or assert that
//! fewer than `d` exist. The adversary is not bound to a fixed `S`: any
//! answer sequence consistent with *some* `S` is fair game.
//!
//! The crate provides:
//!
//! - [`model`]: knowledge states, round application, verdict validity;
//! - [`bounds`]: lower/upper bounds on worst-case query counts;
//! - [`questioner`]: constructive strategies meeting the upper bounds;
//! - [`adversary`]: answer strategies enforcing the lower bounds;
//! - [`solver`]: exact game value by exhaustive search at tiny sizes;
//! - [`harness`]: a referee that plays the two sides against each other
//!   and audits every move.

pub mod adversary;
pub mod bounds;
pub mod harness;
pub mod model;
pub mod questioner;
pub mod set;
pub mod solver;

pub use bounds::{bounds_d1, bounds_dd, bounds_for, ceil_root, BoundsReport};
pub use model::{
    verdict_valid, Answer, GameConfig, KnowledgeState, ModelError, Query, RoundRecord,
    Transcript, Verdict,
};
pub use set::ElemSet;
