//! Query-count bounds for the search game.
//!
//! For one excellent element the worst-case optimal query count over `r`
//! rounds sits between `r·n^{1/r} − 2r + 1` and `r·n^{1/r}`, with the
//! constructive splitting strategy guaranteeing `r·⌈n^{1/r}⌉`. For `d ≥ 2`
//! targets the sandwich is `r·(dn)^{1/r} − 2d − r(d+1) + 2` from below and
//! `r·⌈(d^{r−1}·n)^{1/r}⌉` from above; at `r = 2` this tightens to
//! `2⌈(dn)^{1/2}⌉ − 4d − 2 … 2⌈(dn)^{1/2}⌉`.
//!
//! Formula sides are reported as `f64` (comparisons elsewhere use a 1e-9
//! slack); anything a strategy can actually count is kept in exact integers.
//! `⌈x^{1/r}⌉` is computed purely with integer arithmetic: rounding the
//! float root would misclassify exact powers like `1000^{1/3}`.

use serde::Serialize;

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum BoundsError {
    #[error("multi-target bounds need 2 <= d <= n, got n={n} d={d}")]
    InvalidD { n: u64, d: u64 },
    #[error("rounds must be >= 1")]
    ZeroRounds,
}

/// Smallest `k` with `k^r >= x` (`x >= 1`, `r >= 1`), exactly.
pub fn ceil_root(x: u64, r: u32) -> u64 {
    assert!(x >= 1 && r >= 1);
    if r == 1 || x == 1 {
        return x;
    }
    // Float guess, then walk to the true boundary with integer powers.
    let mut k = (x as f64).powf(1.0 / r as f64).round().max(1.0) as u64;
    while !pow_at_least(k, r, x) {
        k += 1;
    }
    while k > 1 && pow_at_least(k - 1, r, x) {
        k -= 1;
    }
    k
}

/// `k^r >= x`, overflow-safe (an overflowing power certainly exceeds any u64).
fn pow_at_least(k: u64, r: u32, x: u64) -> bool {
    let mut acc: u128 = 1;
    for _ in 0..r {
        acc = acc.saturating_mul(k as u128);
        if acc >= x as u128 {
            return true;
        }
    }
    acc >= x as u128
}

/// `n_0 = n`, `n_i = ⌊n_{i−1} / (k_i + 1)⌋` for the observed per-round query
/// counts. Returned vector is `[n_1, …, n_t]`.
pub fn n_sequence(n: u64, ks: &[u64]) -> Vec<u64> {
    let mut cur = n;
    ks.iter()
        .map(|&k| {
            cur /= k + 1;
            cur
        })
        .collect()
}

/// Check `n_i >= n / ((k_1+1)…(k_i+1)) − i` for every prefix, in exact
/// integer arithmetic: `(n_i + i) · Π(k_j+1) >= n`.
pub fn n_sequence_obeys_floor_bound(n: u64, ks: &[u64]) -> bool {
    let seq = n_sequence(n, ks);
    let mut prod: u128 = 1;
    for (i, (&k, &ni)) in ks.iter().zip(&seq).enumerate() {
        prod = prod.saturating_mul(k as u128 + 1);
        let i1 = (i + 1) as u128;
        if (ni as u128 + i1).saturating_mul(prod) < n as u128 {
            return false;
        }
    }
    true
}

/// Last-round divisor variant used when `d` targets remain in play:
/// `⌊n_prev / (k_last + d)⌋`.
pub fn n_prime(n_prev: u64, k_last: u64, d: u64) -> u64 {
    n_prev / (k_last + d)
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct BoundsReport {
    pub n: u64,
    pub d: u64,
    pub r: u32,
    /// Formula-side lower bound on the optimal query count.
    pub lower: f64,
    /// Formula-side upper bound.
    pub upper: f64,
    /// What the constructive strategy guarantees (exact integer).
    pub upper_algorithmic: u64,
    /// At `r = 2`, `d >= 2`: the tightened `(lower, upper)` integer pair.
    pub two_round_window: Option<(i64, u64)>,
    /// Flags, e.g. a vacuous configuration where the formula lower bound
    /// exceeds the algorithmic upper bound.
    pub notes: Vec<String>,
}

impl BoundsReport {
    fn flag_if_inverted(mut self) -> Self {
        if self.lower > self.upper_algorithmic as f64 + 1e-9 {
            self.notes.push(format!(
                "lower bound {:.6} exceeds algorithmic upper bound {}; vacuous here",
                self.lower, self.upper_algorithmic
            ));
        }
        self
    }
}

/// Bounds for finding a single excellent element (`d = 1`).
pub fn bounds_d1(n: u64, r: u32) -> Result<BoundsReport, BoundsError> {
    if r == 0 {
        return Err(BoundsError::ZeroRounds);
    }
    assert!(n >= 1);
    let rf = r as f64;
    let root = (n as f64).powf(1.0 / rf);
    Ok(BoundsReport {
        n,
        d: 1,
        r,
        lower: rf * root - 2.0 * rf + 1.0,
        upper: rf * root,
        upper_algorithmic: rf as u64 * ceil_root(n, r),
        two_round_window: None,
        notes: Vec::new(),
    }
    .flag_if_inverted())
}

/// Bounds for finding `d >= 2` excellent elements.
pub fn bounds_dd(n: u64, d: u64, r: u32) -> Result<BoundsReport, BoundsError> {
    if r == 0 {
        return Err(BoundsError::ZeroRounds);
    }
    if d < 2 || d > n {
        return Err(BoundsError::InvalidD { n, d });
    }
    let rf = r as f64;
    let dn_root = ((d * n) as f64).powf(1.0 / rf);
    let lower = rf * dn_root - 2.0 * d as f64 - rf * (d as f64 + 1.0) + 2.0;
    let pow = (d as u128).pow(r - 1).saturating_mul(n as u128);
    let pow64 = u64::try_from(pow).expect("d^(r-1) * n overflows u64");
    let upper_algorithmic = r as u64 * ceil_root(pow64, r);
    let two_round_window = (r == 2).then(|| {
        let c = 2 * ceil_root(d * n, 2);
        (c as i64 - 4 * d as i64 - 2, c)
    });
    Ok(BoundsReport {
        n,
        d,
        r,
        lower,
        upper: upper_algorithmic as f64,
        upper_algorithmic,
        two_round_window,
        notes: Vec::new(),
    }
    .flag_if_inverted())
}

/// Dispatch on `d`.
pub fn bounds_for(n: u64, d: u64, r: u32) -> Result<BoundsReport, BoundsError> {
    if d == 1 {
        bounds_d1(n, r)
    } else {
        bounds_dd(n, d, r)
    }
}

/// Ceiling of a formula-side value, guarded against float fuzz.
pub fn ceil_with_slack(x: f64) -> i64 {
    (x - 1e-9).ceil() as i64
}
