//! Search for grid-valued embeddings `j` of a finite ring into `[−a, a]`
//! that minimize the worst homomorphism error, subject to the images being
//! an `(a, ε)`-grid.
//!
//! Images are multiples `k·h` of `h = ε/r` with `|k·h| ≤ a`. In those units
//! every error is an integer multiple of `1/(r·hd)` of `ε`, where `hd` is the
//! denominator of `h`, so the whole search is exact integer arithmetic.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::rings::FiniteRing;
use crate::algebra::ElemId;
use crate::error::{Error, Result};
use crate::scalar::{format_rational, int};

#[derive(Debug, Clone)]
pub struct SearchConfig {
    /// Images lie on the grid of step `ε/resolution`.
    pub resolution: u32,
    /// Cap on candidate moves tried per restart.
    pub iterations: usize,
    pub restarts: usize,
    pub seed: u64,
    /// Enumerate every assignment when there are at most this many.
    pub exhaustive_limit: u128,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self { resolution: 1, iterations: 20_000, restarts: 8, seed: 0, exhaustive_limit: 200_000 }
    }
}

/// Exact description of the image grid for one `(a, ε, r)`.
#[derive(Debug, Clone)]
pub struct ImageGrid {
    pub h: BigRational,
    pub r: i64,
    hn: i128,
    hd: i128,
    /// Grid indices run over `−k_max..=k_max`.
    pub k_max: i64,
    /// `|k1·k2|·h² ≤ a` iff `|k1·k2| ≤ prod_max`.
    prod_max: i128,
    /// The lowest image must be at most this index, the highest at least
    /// `last_min`, and neighbouring images at most `2r − 1` apart.
    first_max: i64,
    last_min: i64,
}

impl ImageGrid {
    pub fn new(a: &BigRational, eps: &BigRational, resolution: u32) -> Result<Self> {
        if !a.is_positive() || !eps.is_positive() || resolution == 0 {
            return Err(Error::invalid("need a > 0, eps > 0 and resolution ≥ 1"));
        }
        let r = resolution as i64;
        let h = eps / int(r);
        let to_i = |x: BigInt| x.to_i64().ok_or_else(|| Error::invalid("grid too large"));
        let k_max = to_i((a / &h).floor().to_integer())?;
        if k_max > 100_000 {
            return Err(Error::LimitExceeded { size: 2 * k_max as u128 + 1, limit: 200_001 });
        }
        let prod_max = (a / (&h * &h)).floor().to_integer().to_i128().unwrap_or(i128::MAX);
        let first_max = to_i((int(r) - a / &h).ceil().to_integer())? - 1;
        let last_min = to_i((a / &h - int(r)).floor().to_integer())? + 1;
        Ok(Self {
            hn: h.numer().to_i128().ok_or_else(|| Error::invalid("grid step too large"))?,
            hd: h.denom().to_i128().ok_or_else(|| Error::invalid("grid step too fine"))?,
            h,
            r,
            k_max,
            prod_max,
            first_max: first_max.max(-k_max),
            last_min: last_min.min(k_max),
        })
    }

    pub fn points(&self) -> usize {
        (2 * self.k_max + 1) as usize
    }

    /// Fewest images that can form an `(a, ε)`-grid.
    pub fn min_count(&self) -> usize {
        let mut k = self.first_max;
        let mut n = 1;
        while k < self.last_min {
            k += 2 * self.r - 1;
            n += 1;
        }
        n
    }

    /// Errors are `num / unit` times `ε`.
    pub fn unit(&self) -> i128 {
        self.r as i128 * self.hd
    }

    fn add_err(&self, ks: i64, kx: i64, ky: i64) -> i128 {
        if (kx + ky).abs() > self.k_max {
            return 0;
        }
        (ks - kx - ky).abs() as i128 * self.hd
    }

    fn mul_err(&self, kp: i64, kx: i64, ky: i64) -> i128 {
        let p = kx as i128 * ky as i128;
        if p.abs() > self.prod_max {
            return 0;
        }
        (kp as i128 * self.hd - p * self.hn).abs()
    }

    /// How far the sorted distinct images are from forming a grid.
    fn deficit(&self, occupied: &[u32]) -> i64 {
        let mut ks = occupied.iter().enumerate().filter(|(_, &c)| c > 0).map(|(i, _)| i as i64 - self.k_max);
        let Some(first) = ks.next() else { return i64::MAX / 4 };
        let mut d = (first - self.first_max).max(0);
        let mut last = first;
        for k in ks {
            d += (k - last - (2 * self.r - 1)).max(0);
            last = k;
        }
        d + (self.last_min - last).max(0)
    }
}

/// Lexicographic search objective.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
struct Score {
    deficit: i64,
    max: i128,
    sum: i128,
}

struct State<'a> {
    ring: &'a FiniteRing,
    grid: &'a ImageGrid,
    k: Vec<i64>,
    occupied: Vec<u32>,
    /// Worst of the add and mul error per ordered pair.
    err: Vec<i128>,
    hist: BTreeMap<i128, u32>,
    sum: i128,
    /// Pairs whose error depends on each element.
    touch: &'a [Vec<u32>],
}

impl<'a> State<'a> {
    fn new(ring: &'a FiniteRing, grid: &'a ImageGrid, touch: &'a [Vec<u32>], k: Vec<i64>) -> Self {
        let n = ring.order;
        let mut s = State {
            ring,
            grid,
            occupied: vec![0; grid.points()],
            err: vec![0; n * n],
            hist: BTreeMap::new(),
            sum: 0,
            touch,
            k,
        };
        for &k in &s.k {
            s.occupied[(k + grid.k_max) as usize] += 1;
        }
        for p in 0..n * n {
            let e = s.pair_err(p);
            s.err[p] = e;
            *s.hist.entry(e).or_default() += 1;
            s.sum += e;
        }
        s
    }

    fn pair_err(&self, p: usize) -> i128 {
        let n = self.ring.order;
        let (x, y) = ((p / n) as ElemId, (p % n) as ElemId);
        let (kx, ky) = (self.k[x as usize], self.k[y as usize]);
        let ks = self.k[self.ring.add(x, y) as usize];
        let kp = self.k[self.ring.mul(x, y) as usize];
        self.grid.add_err(ks, kx, ky).max(self.grid.mul_err(kp, kx, ky))
    }

    fn score(&self) -> Score {
        Score {
            deficit: self.grid.deficit(&self.occupied),
            max: *self.hist.keys().next_back().unwrap_or(&0),
            sum: self.sum,
        }
    }

    fn set(&mut self, e: usize, k: i64) {
        let km = self.grid.k_max;
        self.occupied[(self.k[e] + km) as usize] -= 1;
        self.k[e] = k;
        self.occupied[(k + km) as usize] += 1;
        for &p in &self.touch[e] {
            let p = p as usize;
            let new = self.pair_err(p);
            let old = std::mem::replace(&mut self.err[p], new);
            if old != new {
                let c = self.hist.get_mut(&old).expect("tracked");
                *c -= 1;
                if *c == 0 {
                    self.hist.remove(&old);
                }
                *self.hist.entry(new).or_default() += 1;
                self.sum += new - old;
            }
        }
    }
}

fn touch_lists(ring: &FiniteRing) -> Vec<Vec<u32>> {
    let n = ring.order;
    let mut touch = vec![Vec::new(); n];
    for x in 0..n {
        for y in 0..n {
            let p = (x * n + y) as u32;
            let s = ring.add(x as ElemId, y as ElemId) as usize;
            let m = ring.mul(x as ElemId, y as ElemId) as usize;
            for e in [x, y, s, m] {
                if touch[e].last() != Some(&p) {
                    touch[e].push(p);
                }
            }
        }
    }
    touch
}

#[derive(Debug, Clone, Serialize)]
pub struct EmbeddingResult {
    pub ring: String,
    pub order: usize,
    /// Worst homomorphism error over both operations, divided by `ε`.
    pub normalized_error: String,
    pub add_error: String,
    pub mul_error: String,
    pub exhaustive: bool,
    #[serde(skip)]
    pub error: BigRational,
    #[serde(skip)]
    pub add: BigRational,
    #[serde(skip)]
    pub mul: BigRational,
    #[serde(skip)]
    pub values: Vec<BigRational>,
}

fn finish(ring: &FiniteRing, grid: &ImageGrid, k: &[i64], exhaustive: bool) -> EmbeddingResult {
    let n = ring.order;
    let (mut add, mut mul) = (0i128, 0i128);
    for x in 0..n as ElemId {
        for y in 0..n as ElemId {
            let (kx, ky) = (k[x as usize], k[y as usize]);
            add = add.max(grid.add_err(k[ring.add(x, y) as usize], kx, ky));
            mul = mul.max(grid.mul_err(k[ring.mul(x, y) as usize], kx, ky));
        }
    }
    let unit = BigInt::from(grid.unit());
    let q = |v: i128| BigRational::new(BigInt::from(v), unit.clone());
    let (add, mul) = (q(add), q(mul));
    let error = add.clone().max(mul.clone());
    EmbeddingResult {
        ring: ring.name.clone(),
        order: n,
        normalized_error: format_rational(&error),
        add_error: format_rational(&add),
        mul_error: format_rational(&mul),
        exhaustive,
        values: k.iter().map(|&k| int(k) * &grid.h).collect(),
        error,
        add,
        mul,
    }
}

/// `k` for `j(x) = λ·balanced(x)` spread over the grid, clamped.
fn affine_start(n: usize, grid: &ImageGrid, stretch: f64, shift: i64) -> Vec<i64> {
    let span = (grid.last_min - grid.first_max) as f64;
    let step = stretch * span / (n.max(2) - 1) as f64;
    (0..n)
        .map(|x| {
            let b = if 2 * x <= n { x as f64 } else { x as f64 - n as f64 };
            ((b * step).round() as i64 + shift).clamp(-grid.k_max, grid.k_max)
        })
        .collect()
}

fn climb(state: &mut State, rng: &mut ChaCha8Rng, budget: usize) {
    let n = state.ring.order;
    let km = state.grid.k_max;
    let mut order: Vec<usize> = (0..n).collect();
    let mut spent = 0;
    let mut best = state.score();
    loop {
        let mut improved = false;
        order.shuffle(rng);
        // reassign one element
        for &e in &order {
            let old = state.k[e];
            let (mut best_k, mut best_here) = (old, best);
            for k in -km..=km {
                if k == old {
                    continue;
                }
                state.set(e, k);
                let s = state.score();
                if s < best_here {
                    best_here = s;
                    best_k = k;
                }
                spent += 1;
            }
            state.set(e, best_k);
            if best_here < best {
                best = best_here;
                improved = true;
            }
            if spent >= budget {
                return;
            }
        }
        // swap two images, which keeps the image set (and so the grid) intact
        for (i, &e) in order.iter().enumerate() {
            for &f in &order[i + 1..] {
                let (ke, kf) = (state.k[e], state.k[f]);
                if ke == kf {
                    continue;
                }
                state.set(e, kf);
                state.set(f, ke);
                let s = state.score();
                spent += 1;
                if s < best {
                    best = s;
                    improved = true;
                } else {
                    state.set(e, ke);
                    state.set(f, kf);
                }
            }
            if spent >= budget {
                return;
            }
        }
        if !improved {
            return;
        }
    }
}

/// Best embedding found for `ring` into the `(a, ε)` image grid.
///
/// Errors with [`Error::Premise`] when the ring has fewer elements than any
/// `(a, ε)`-grid needs.
pub fn best_embedding_error(ring: &FiniteRing, a: &BigRational, eps: &BigRational, cfg: &SearchConfig) -> Result<EmbeddingResult> {
    let grid = ImageGrid::new(a, eps, cfg.resolution)?;
    let need = grid.min_count();
    if ring.order < need {
        return Err(Error::Premise(format!(
            "{} has {} elements but an ({}, {})-grid needs at least {need}",
            ring.name,
            ring.order,
            format_rational(a),
            format_rational(eps)
        )));
    }
    let n = ring.order;
    let g = grid.points();
    let touch = touch_lists(ring);
    let total = (g as u128).checked_pow(n as u32);
    if total.is_some_and(|t| t <= cfg.exhaustive_limit) {
        return Ok(exhaustive(ring, &grid, &touch));
    }
    let runs: Vec<(Score, usize, Vec<i64>)> = (0..cfg.restarts.max(1))
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ (i as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
            let start = match i {
                0 => affine_start(n, &grid, 1.0, 0),
                _ if i % 2 == 1 => affine_start(n, &grid, rng.gen_range(0.6..1.6), rng.gen_range(-grid.r..=grid.r)),
                _ => (0..n).map(|_| rng.gen_range(-grid.k_max..=grid.k_max)).collect(),
            };
            let mut st = State::new(ring, &grid, &touch, start);
            climb(&mut st, &mut rng, cfg.iterations);
            (st.score(), i, st.k)
        })
        .collect();
    let (score, _, k) = runs.into_iter().min_by(|x, y| (x.0, x.1).cmp(&(y.0, y.1))).expect("at least one restart");
    if score.deficit > 0 {
        return Err(Error::Premise(format!("no grid-forming embedding of {} was found", ring.name)));
    }
    Ok(finish(ring, &grid, &k, false))
}

fn exhaustive(ring: &FiniteRing, grid: &ImageGrid, touch: &[Vec<u32>]) -> EmbeddingResult {
    let n = ring.order;
    let km = grid.k_max;
    let mut st = State::new(ring, grid, touch, vec![-km; n]);
    let mut best: Option<(Score, Vec<i64>)> = None;
    loop {
        let s = st.score();
        if s.deficit == 0 && best.as_ref().is_none_or(|b| (s.max, s.sum) < (b.0.max, b.0.sum)) {
            best = Some((s, st.k.clone()));
        }
        // odometer, last element fastest
        let mut i = n;
        loop {
            if i == 0 {
                let (_, k) = best.expect("min_count guarantees a grid-forming assignment");
                return finish(ring, grid, &k, true);
            }
            i -= 1;
            if st.k[i] < km {
                let next = st.k[i] + 1;
                st.set(i, next);
                break;
            }
            st.set(i, -km);
        }
    }
}

/// `balanced(k)·ε`, the fixed-point embedding of `Z/n`.
pub fn balanced_embedding(n: usize, eps: &BigRational) -> Vec<BigRational> {
    (0..n as i64)
        .map(|k| {
            let b = if 2 * k <= n as i64 { k } else { k - n as i64 };
            int(b) * eps
        })
        .collect()
}

/// Worst `(⊕, ⊗)` homomorphism errors of `ring` under `values`, divided by
/// `ε`, over pairs whose exact results stay in `[−a, a]`.
pub fn embedding_errors(
    ring: &FiniteRing,
    values: &[BigRational],
    a: &BigRational,
    eps: &BigRational,
) -> (BigRational, BigRational) {
    let n = ring.order as ElemId;
    let zero = int(0);
    let (mut add, mut mul) = (zero.clone(), zero);
    for x in 0..n {
        for y in 0..n {
            let (vx, vy) = (&values[x as usize], &values[y as usize]);
            let s = vx + vy;
            if s.abs() <= *a {
                add = add.max((&values[ring.add(x, y) as usize] - s).abs());
            }
            let p = vx * vy;
            if p.abs() <= *a {
                mul = mul.max((&values[ring.mul(x, y) as usize] - p).abs());
            }
        }
    }
    (add / eps, mul / eps)
}

/// `true` when `values` are an `(a, ε)`-grid: every point of `[−a, a]` is
/// strictly within `ε` of an image and every image lies in `[−a, a]`.
pub fn is_grid(values: &[BigRational], a: &BigRational, eps: &BigRational) -> bool {
    let mut v: Vec<&BigRational> = values.iter().collect();
    v.sort();
    v.dedup();
    if v.is_empty() || v[0] < &-a.clone() || v[v.len() - 1] > a {
        return false;
    }
    let two = int(2) * eps;
    v[0] - &-a.clone() < *eps && a - v[v.len() - 1] < *eps && v.windows(2).all(|w| w[1] - w[0] < two)
}


#[cfg(test)]
mod tests {
    use super::*;
    use crate::probe::rings::{build_ring, RingSpec};
    use crate::scalar::rat;

    #[test]
    fn grid_geometry() {
        let g = ImageGrid::new(&int(1), &rat(1, 2), 1).unwrap();
        assert_eq!(g.points(), 5);
        // step 1/2 with gaps < 1 forces every grid point
        assert_eq!(g.min_count(), 5);
        let g = ImageGrid::new(&int(2), &rat(1, 8), 2).unwrap();
        assert_eq!(g.points(), 65);
        // from −31/16 to 31/16 in steps of at most 3/16
        assert_eq!(g.min_count(), 22);
    }

    #[test]
    fn too_small_rings_are_infeasible() {
        let r = build_ring(&RingSpec::Zn(2), 100).unwrap();
        assert!(matches!(
            best_embedding_error(&r, &int(1), &rat(1, 2), &SearchConfig::default()),
            Err(Error::Premise(_))
        ));
    }

    #[test]
    fn fixed_point_embedding_adds_well_multiplies_badly() {
        let eps = rat(1, 8);
        let a = int(2);
        let r = build_ring(&RingSpec::Zn(33), 100).unwrap();
        let v = balanced_embedding(33, &eps);
        assert!(is_grid(&v, &a, &eps));
        let (add, mul) = embedding_errors(&r, &v, &a, &eps);
        // sums that stay in [−2, 2] never wrap
        assert_eq!(add, int(0));
        // 8·8 = 64 ≡ −2 (mod 33) against the true 1·1 = 1
        assert!(mul >= int(8), "{mul}");
    }

    #[test]
    fn search_result_is_a_grid_with_the_reported_error() {
        let r = build_ring(&RingSpec::Zn(9), 100).unwrap();
        let (a, eps) = (int(2), rat(1, 2));
        let cfg = SearchConfig { resolution: 2, ..Default::default() };
        let res = best_embedding_error(&r, &a, &eps, &cfg).unwrap();
        assert!(is_grid(&res.values, &a, &eps));
        let (add, mul) = embedding_errors(&r, &res.values, &a, &eps);
        assert_eq!((add, mul), (res.add.clone(), res.mul.clone()));
    }

    #[test]
    fn deterministic_given_seed() {
        let r = build_ring(&RingSpec::Zn(20), 100).unwrap();
        let cfg = SearchConfig { iterations: 5_000, ..Default::default() };
        let x = best_embedding_error(&r, &int(2), &rat(1, 4), &cfg).unwrap();
        let y = best_embedding_error(&r, &int(2), &rat(1, 4), &cfg).unwrap();
        assert_eq!(x.values, y.values);
    }
}

#[cfg(test)]
mod brute_force {
    use super::*;
    use crate::probe::rings::{build_ring, RingSpec};
    use crate::scalar::rat;

    /// Minimum over every assignment of grid points, scored with rationals.
    fn oracle(ring: &FiniteRing, a: &BigRational, eps: &BigRational) -> BigRational {
        let pts: Vec<BigRational> = (-2..=2).map(|k| int(k) * eps).collect();
        let n = ring.order;
        let mut best: Option<BigRational> = None;
        for code in 0..pts.len().pow(n as u32) {
            let mut c = code;
            let vals: Vec<BigRational> = (0..n)
                .map(|_| {
                    let v = pts[c % pts.len()].clone();
                    c /= pts.len();
                    v
                })
                .collect();
            if !is_grid(&vals, a, eps) {
                continue;
            }
            let (x, y) = embedding_errors(ring, &vals, a, eps);
            let e = x.max(y);
            if best.as_ref().is_none_or(|b| &e < b) {
                best = Some(e);
            }
        }
        best.expect("some assignment forms a grid")
    }

    #[test]
    fn search_matches_brute_force_on_tiny_rings() {
        let (a, eps) = (int(1), rat(1, 2));
        for spec in [RingSpec::Zn(5), RingSpec::Zn(6), RingSpec::Product(vec![2, 3]), RingSpec::Gf(5, 1)] {
            let ring = build_ring(&spec, 64).unwrap();
            let want = oracle(&ring, &a, &eps);
            let exhaustive = best_embedding_error(&ring, &a, &eps, &SearchConfig::default()).unwrap();
            assert!(exhaustive.exhaustive);
            let (x, y) = embedding_errors(&ring, &exhaustive.values, &a, &eps);
            assert_eq!(exhaustive.error, want, "{spec} {:?} {x} {y}", exhaustive.values.iter().map(|v| v.to_string()).collect::<Vec<_>>());
            let local = SearchConfig { exhaustive_limit: 0, ..Default::default() };
            let found = best_embedding_error(&ring, &a, &eps, &local).unwrap();
            assert!(!found.exhaustive);
            assert_eq!(found.error, want, "{spec}");
        }
    }
}
