//! Turnstile-stream frequency summaries: a CountMin sketch for heavy
//! hitters and an l1 sampler, the two structures the first streaming pass
//! needs.
//!
//! Serialized blobs are little-endian: magic (u32), version (u32), dims,
//! per-row hash seeds, then counters. See `to_bytes` on each type.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::hash::{hash_key, hash_unit};

#[derive(Debug, Error)]
pub enum SketchError {
    #[error("index {i} out of range (domain {domain})")]
    IndexOutOfRange { i: usize, domain: usize },
    #[error("reservoir sampler is insert-only; got negative weight {0}")]
    InsertOnly(f64),
    #[error("turnstile sampler needs small integer weights, got {0}")]
    NonIntegerWeight(f64),
    #[error("turnstile count for index {0} would go negative")]
    NegativeCount(usize),
    #[error("cannot merge sketches with different shapes or seeds")]
    MergeMismatch,
    #[error("bad serialized sketch: {0}")]
    Decode(String),
}

const CM_MAGIC: u32 = 0x434d_534b; // "CMSK"
const L1_MAGIC: u32 = 0x4c31_534b; // "L1SK"
const VERSION: u32 = 1;

/// CountMin sketch with signed counters.
///
/// `k` is the accuracy parameter: point queries overestimate by at most
/// `||x||_1 / k` with probability `1 - delta_fail` per index (the allocated
/// width is `ceil(e * k)`, which is what makes the per-row Markov bound
/// `1/e`). Depth is `ceil(ln(1/delta_fail))` rows. On insert-only streams
/// queries never underestimate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CountMinSketch {
    k: u64,
    width: usize,
    depth: usize,
    domain: usize,
    seeds: Vec<u64>,
    counters: Vec<f64>,
}

impl CountMinSketch {
    pub fn new(k: usize, delta_fail: f64, domain: usize, rng_seed: u64) -> Self {
        let k = k.max(1);
        let width = (std::f64::consts::E * k as f64).ceil() as usize;
        let depth = ((1.0 / delta_fail).ln().ceil() as usize).max(1);
        let seeds = (0..depth)
            .map(|r| hash_key(rng_seed, 0xc0de_0000 ^ r as u64))
            .collect();
        CountMinSketch {
            k: k as u64,
            width,
            depth,
            domain,
            seeds,
            counters: vec![0.0; width * depth],
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn num_counters(&self) -> usize {
        self.counters.len()
    }

    #[inline]
    fn cell(&self, row: usize, i: usize) -> usize {
        row * self.width + (hash_key(self.seeds[row], i as u64) as usize % self.width)
    }

    pub fn update(&mut self, i: usize, w: f64) -> Result<(), SketchError> {
        if i >= self.domain {
            return Err(SketchError::IndexOutOfRange {
                i,
                domain: self.domain,
            });
        }
        for row in 0..self.depth {
            let c = self.cell(row, i);
            self.counters[c] += w;
        }
        Ok(())
    }

    /// Point estimate f(i): the minimum over rows.
    pub fn query(&self, i: usize) -> Result<f64, SketchError> {
        if i >= self.domain {
            return Err(SketchError::IndexOutOfRange {
                i,
                domain: self.domain,
            });
        }
        Ok((0..self.depth)
            .map(|row| self.counters[self.cell(row, i)])
            .fold(f64::INFINITY, f64::min))
    }

    /// Counterwise sum of two identically-shaped, identically-seeded
    /// sketches; equals sketching the concatenated streams.
    pub fn merged(&self, other: &CountMinSketch) -> Result<CountMinSketch, SketchError> {
        if self.width != other.width
            || self.depth != other.depth
            || self.seeds != other.seeds
            || self.domain != other.domain
        {
            return Err(SketchError::MergeMismatch);
        }
        let mut out = self.clone();
        for (c, o) in out.counters.iter_mut().zip(&other.counters) {
            *c += o;
        }
        Ok(out)
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut buf = Vec::new();
        buf.extend_from_slice(&CM_MAGIC.to_le_bytes());
        buf.extend_from_slice(&VERSION.to_le_bytes());
        buf.extend_from_slice(&self.k.to_le_bytes());
        buf.extend_from_slice(&(self.width as u64).to_le_bytes());
        buf.extend_from_slice(&(self.depth as u64).to_le_bytes());
        buf.extend_from_slice(&(self.domain as u64).to_le_bytes());
        for s in &self.seeds {
            buf.extend_from_slice(&s.to_le_bytes());
        }
        for c in &self.counters {
            buf.extend_from_slice(&c.to_le_bytes());
        }
        buf
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, SketchError> {
        let mut r = Reader::new(bytes);
        if r.u32()? != CM_MAGIC {
            return Err(SketchError::Decode("bad magic".into()));
        }
        if r.u32()? != VERSION {
            return Err(SketchError::Decode("unsupported version".into()));
        }
        let k = r.u64()?;
        let width = r.u64()? as usize;
        let depth = r.u64()? as usize;
        let domain = r.u64()? as usize;
        let seeds = (0..depth).map(|_| r.u64()).collect::<Result<Vec<_>, _>>()?;
        let counters = (0..width * depth)
            .map(|_| r.f64())
            .collect::<Result<Vec<_>, _>>()?;
        Ok(CountMinSketch {
            k,
            width,
            depth,
            domain,
            seeds,
            counters,
        })
    }
}

/// l1 sampler over a nonnegative-net vector: returns an index distributed
/// (approximately) proportionally to the net weights, together with an
/// estimate of that weight. Two backends:
///
/// - `Reservoir`: exact weighted reservoir sampling, insert-only streams,
///   used as ground truth.
/// - `Turnstile`: supports deletions. Each unit of weight becomes a
///   distinct key; a hierarchy of subsampled levels with exact recovery
///   sums picks a uniformly random live unit, which is an exact l1 draw
///   over items. Requires small integer update weights.
///
/// Sampling never mutates state; a failed draw returns `None`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct L1Sampler {
    pub accuracy: f64,
    pub failure: f64,
    pub rng_seed: u64,
    domain: usize,
    backend: Backend,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
enum Backend {
    Reservoir(ReservoirState),
    Turnstile(TurnstileState),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct ReservoirState {
    total: f64,
    current: Option<usize>,
    draws: u64,
    counts: Vec<f64>,
}

pub const TURNSTILE_LEVELS: usize = 26;
const MAX_UNIT_WEIGHT: f64 = 1e6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct TurnstileState {
    counts: Vec<i64>,
    levels: Vec<Level>,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub(crate) struct Level {
    /// Net number of live units surviving at this level.
    pub(crate) s0: i64,
    /// Sum of item ids over surviving units.
    pub(crate) t1: i64,
    /// Wrapping fingerprint sum of item ids.
    pub(crate) tf: u64,
}

impl L1Sampler {
    pub fn new_reservoir(domain: usize, accuracy: f64, failure: f64, rng_seed: u64) -> Self {
        L1Sampler {
            accuracy,
            failure,
            rng_seed,
            domain,
            backend: Backend::Reservoir(ReservoirState {
                total: 0.0,
                current: None,
                draws: 0,
                counts: vec![0.0; domain],
            }),
        }
    }

    pub fn new_turnstile(domain: usize, accuracy: f64, failure: f64, rng_seed: u64) -> Self {
        L1Sampler {
            accuracy,
            failure,
            rng_seed,
            domain,
            backend: Backend::Turnstile(TurnstileState {
                counts: vec![0; domain],
                levels: vec![Level::default(); TURNSTILE_LEVELS],
            }),
        }
    }

    pub fn supports_deletes(&self) -> bool {
        matches!(self.backend, Backend::Turnstile(_))
    }

    pub fn update(&mut self, i: usize, w: f64) -> Result<(), SketchError> {
        if i >= self.domain {
            return Err(SketchError::IndexOutOfRange {
                i,
                domain: self.domain,
            });
        }
        let seed = self.rng_seed;
        match &mut self.backend {
            Backend::Reservoir(state) => {
                if w < 0.0 {
                    return Err(SketchError::InsertOnly(w));
                }
                if w == 0.0 {
                    return Ok(());
                }
                state.counts[i] += w;
                state.total += w;
                let u = hash_unit(seed ^ 0x7e5e_7e5e, state.draws);
                state.draws += 1;
                if u < w / state.total {
                    state.current = Some(i);
                }
                Ok(())
            }
            Backend::Turnstile(state) => {
                if w.fract() != 0.0 || w.abs() > MAX_UNIT_WEIGHT {
                    return Err(SketchError::NonIntegerWeight(w));
                }
                let units = w.abs() as i64;
                let sign: i64 = if w >= 0.0 { 1 } else { -1 };
                for _ in 0..units {
                    if sign > 0 {
                        let c = state.counts[i];
                        apply_unit(&mut state.levels, seed, i, c as u64, 1);
                        state.counts[i] = c + 1;
                    } else {
                        let c = state.counts[i] - 1;
                        if c < 0 {
                            return Err(SketchError::NegativeCount(i));
                        }
                        apply_unit(&mut state.levels, seed, i, c as u64, -1);
                        state.counts[i] = c;
                    }
                }
                Ok(())
            }
        }
    }

    /// Draws (index, weight estimate); `None` on sampler failure or an
    /// all-zero vector. Read-only.
    pub fn sample(&self) -> Option<(usize, f64)> {
        match &self.backend {
            Backend::Reservoir(state) => state.current.map(|i| (i, state.counts[i])),
            Backend::Turnstile(state) => recover_item(&state.levels, self.rng_seed, self.domain)
                .map(|j| (j, state.counts[j] as f64)),
        }
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut buf = Vec::new();
        buf.extend_from_slice(&L1_MAGIC.to_le_bytes());
        buf.extend_from_slice(&VERSION.to_le_bytes());
        let kind: u8 = match self.backend {
            Backend::Reservoir(_) => 0,
            Backend::Turnstile(_) => 1,
        };
        buf.push(kind);
        buf.extend_from_slice(&self.accuracy.to_le_bytes());
        buf.extend_from_slice(&self.failure.to_le_bytes());
        buf.extend_from_slice(&self.rng_seed.to_le_bytes());
        buf.extend_from_slice(&(self.domain as u64).to_le_bytes());
        match &self.backend {
            Backend::Reservoir(state) => {
                buf.extend_from_slice(&state.total.to_le_bytes());
                buf.extend_from_slice(&state.draws.to_le_bytes());
                let cur: i64 = state.current.map_or(-1, |i| i as i64);
                buf.extend_from_slice(&cur.to_le_bytes());
                for c in &state.counts {
                    buf.extend_from_slice(&c.to_le_bytes());
                }
            }
            Backend::Turnstile(state) => {
                buf.extend_from_slice(&(state.levels.len() as u64).to_le_bytes());
                for c in &state.counts {
                    buf.extend_from_slice(&c.to_le_bytes());
                }
                for l in &state.levels {
                    buf.extend_from_slice(&l.s0.to_le_bytes());
                    buf.extend_from_slice(&l.t1.to_le_bytes());
                    buf.extend_from_slice(&l.tf.to_le_bytes());
                }
            }
        }
        buf
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, SketchError> {
        let mut r = Reader::new(bytes);
        if r.u32()? != L1_MAGIC {
            return Err(SketchError::Decode("bad magic".into()));
        }
        if r.u32()? != VERSION {
            return Err(SketchError::Decode("unsupported version".into()));
        }
        let kind = r.u8()?;
        let accuracy = r.f64()?;
        let failure = r.f64()?;
        let rng_seed = r.u64()?;
        let domain = r.u64()? as usize;
        let backend = match kind {
            0 => {
                let total = r.f64()?;
                let draws = r.u64()?;
                let cur = r.i64()?;
                let counts = (0..domain).map(|_| r.f64()).collect::<Result<Vec<_>, _>>()?;
                Backend::Reservoir(ReservoirState {
                    total,
                    current: if cur < 0 { None } else { Some(cur as usize) },
                    draws,
                    counts,
                })
            }
            1 => {
                let nlevels = r.u64()? as usize;
                let counts = (0..domain).map(|_| r.i64()).collect::<Result<Vec<_>, _>>()?;
                let levels = (0..nlevels)
                    .map(|_| {
                        Ok(Level {
                            s0: r.i64()?,
                            t1: r.i64()?,
                            tf: r.u64()?,
                        })
                    })
                    .collect::<Result<Vec<_>, SketchError>>()?;
                Backend::Turnstile(TurnstileState { counts, levels })
            }
            other => return Err(SketchError::Decode(format!("unknown backend {other}"))),
        };
        Ok(L1Sampler {
            accuracy,
            failure,
            rng_seed,
            domain,
            backend,
        })
    }
}

#[inline]
pub(crate) fn unit_key(item: usize, unit: u64) -> u64 {
    ((item as u64) << 32) | (unit & 0xffff_ffff)
}

/// First half of the seeded unit hash; hoistable when the same unit is fed
/// to many samplers.
#[inline]
pub(crate) fn premix_unit(item: usize, unit: u64) -> u64 {
    crate::hash::mix64(unit_key(item, unit))
}

/// Completes the seeded hash of a premixed unit; identical to
/// `hash_key(seed, unit_key(item, unit))`.
#[inline]
pub(crate) fn hash_premixed(seed: u64, premixed: u64) -> u64 {
    crate::hash::mix64(seed ^ premixed)
}

#[inline]
pub(crate) fn item_fingerprint(seed: u64, item: usize) -> u64 {
    hash_key(seed ^ 0xf1f1_f1f1, item as u64) | 1
}

/// Applies one unit of a turnstile update to the subsampled level sums;
/// `fp` is the item fingerprint under the seed used at recovery time.
#[inline]
pub(crate) fn apply_unit_premixed(
    levels: &mut [Level],
    seed: u64,
    item: usize,
    premixed: u64,
    sign: i64,
    fp: u64,
) {
    let h = hash_premixed(seed, premixed);
    let depth = (h.trailing_zeros() as usize).min(levels.len() - 1);
    for level in levels.iter_mut().take(depth + 1) {
        level.s0 += sign;
        level.t1 += sign * item as i64;
        if sign > 0 {
            level.tf = level.tf.wrapping_add(fp);
        } else {
            level.tf = level.tf.wrapping_sub(fp);
        }
    }
}

/// Applies one unit of a turnstile update to the subsampled level sums.
#[inline]
pub(crate) fn apply_unit(levels: &mut [Level], seed: u64, item: usize, unit: u64, sign: i64) {
    let fp = item_fingerprint(seed, item);
    apply_unit_premixed(levels, seed, item, premix_unit(item, unit), sign, fp);
}

/// Recovers the item at the deepest level whose survivors all share one id;
/// by exchangeability of the unit hashes that item is an l1 draw over the
/// net vector. `None` when every level is empty or mixed.
pub(crate) fn recover_item(levels: &[Level], seed: u64, domain: usize) -> Option<usize> {
    for level in levels.iter().rev() {
        if level.s0 <= 0 {
            continue;
        }
        if level.t1 % level.s0 != 0 {
            continue;
        }
        let j = level.t1 / level.s0;
        if j < 0 || j as usize >= domain {
            continue;
        }
        let fp = item_fingerprint(seed, j as usize).wrapping_mul(level.s0 as u64);
        if fp == level.tf {
            return Some(j as usize);
        }
    }
    None
}

struct Reader<'a> {
    bytes: &'a [u8],
    at: usize,
}

impl<'a> Reader<'a> {
    fn new(bytes: &'a [u8]) -> Self {
        Reader { bytes, at: 0 }
    }
    fn take(&mut self, n: usize) -> Result<&'a [u8], SketchError> {
        if self.at + n > self.bytes.len() {
            return Err(SketchError::Decode("truncated".into()));
        }
        let s = &self.bytes[self.at..self.at + n];
        self.at += n;
        Ok(s)
    }
    fn u8(&mut self) -> Result<u8, SketchError> {
        Ok(self.take(1)?[0])
    }
    fn u32(&mut self) -> Result<u32, SketchError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }
    fn u64(&mut self) -> Result<u64, SketchError> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
    fn i64(&mut self) -> Result<i64, SketchError> {
        Ok(i64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
    fn f64(&mut self) -> Result<f64, SketchError> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
}
