//! Distance spectrum of active distances.
//!
//! A codeword of the subset `C_f` leaves the zero state immediately, never
//! sits in the zero state for two consecutive steps, and merges back into
//! the all-zero path after exactly `j` tuples. For each burst length `j`
//! the spectrum records every achievable Hamming weight together with the
//! number of codewords attaining it. The minimum weight at length `j` is
//! the active distance `a_j`; the minimum over all lengths is the free
//! distance.
//!
//! Two independent routes are provided: [`compute_spectrum`] (dynamic
//! programming over the trellis, weight-capped) and [`oracle_spectrum`]
//! (exhaustive enumeration of input sequences, for verification).

use std::collections::BTreeMap;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};
use serde_json::{json, Map, Value};

use crate::codec::Trellis;
use crate::error::{Error, Result};

/// Per-length weight spectrum with multiplicities.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ActiveSpectrum {
    /// Code specification string, e.g. `"(13,17)"`.
    pub code: String,
    /// Bits per tuple.
    pub n: usize,
    /// Code memory.
    pub m: usize,
    /// Largest burst length computed, in tuples.
    pub j_max: u32,
    /// Weight cap actually applied (never larger than `n * j_max`, which is
    /// the largest weight any path of length `j_max` can have).
    pub w_max: u32,
    /// `j -> sorted (weight, count)` pairs; lengths with no path under the
    /// cap are absent.
    pub per_length: BTreeMap<u32, Vec<(u32, BigUint)>>,
    /// `j -> true` if some partial path had been discarded for exceeding
    /// `w_max` by time `j`, i.e. weights above the cap are not enumerated
    /// at that length.
    pub truncated: BTreeMap<u32, bool>,
}

impl ActiveSpectrum {
    /// Active distance `a_j`: the minimum weight at length `j`, if any path
    /// of that length exists under the cap.
    pub fn active_distance(&self, j: u32) -> Option<u32> {
        self.per_length.get(&j).map(|v| v[0].0)
    }

    /// Largest weight recorded at length `j`.
    pub fn max_weight(&self, j: u32) -> Option<u32> {
        self.per_length.get(&j).and_then(|v| v.last()).map(|e| e.0)
    }

    pub fn entries(&self, j: u32) -> Option<&[(u32, BigUint)]> {
        self.per_length.get(&j).map(Vec::as_slice)
    }

    pub fn is_empty(&self) -> bool {
        self.per_length.is_empty()
    }

    /// True if any length was truncated by the weight cap.
    pub fn any_truncated(&self) -> bool {
        self.truncated.values().any(|&t| t)
    }
}

/// Global minimum-weight statistics over the whole spectrum.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpectrumSummary {
    /// Minimum weight over all lengths (the free distance).
    pub w_min: u32,
    /// Total number of codewords of weight `w_min`, summed over lengths.
    pub n_wmin: BigUint,
    /// Smallest length attaining `w_min`.
    pub j_wmin: u32,
}

impl SpectrumSummary {
    pub fn n_wmin_f64(&self) -> f64 {
        self.n_wmin.to_f64().unwrap_or(f64::INFINITY)
    }
}

fn effective_cap(n: usize, j_max: u32, w_max: u32) -> u32 {
    w_max.min(n as u32 * j_max)
}

/// Compute the spectrum by dynamic programming over `(state, weight)` pairs.
///
/// The DP walks the trellis one tuple at a time starting from state 0. The
/// self-loop at state 0 is never taken (that would put two consecutive zero
/// states on the branch); every arrival at state 0 at time `t` contributes
/// the accumulated weight to length `t` and the path then continues, forced
/// to leave immediately. Paths whose weight exceeds `w_max` are dropped and
/// the affected lengths are flagged in `truncated`.
///
/// `w_max >= n * j_max` means no truncation. An empty spectrum (cap too
/// small for any path to merge) is returned as data, not an error.
#[allow(clippy::needless_range_loop)]
pub fn compute_spectrum(
    trellis: &Trellis,
    code: &str,
    j_max: u32,
    w_max: u32,
) -> Result<ActiveSpectrum> {
    let m = trellis.memory();
    if j_max < m as u32 + 1 {
        return Err(Error::Domain(format!(
            "j_max={j_max} is below the shortest branch length m+1={}",
            m + 1
        )));
    }
    if w_max == 0 {
        return Err(Error::Domain("w_max must be at least 1".into()));
    }
    let cap = effective_cap(trellis.n(), j_max, w_max);
    let num_states = trellis.num_states() as usize;

    let mut dp = vec![vec![BigUint::zero(); cap as usize + 1]; num_states];
    let mut next = dp.clone();
    dp[0][0] = BigUint::one();

    let mut per_length: BTreeMap<u32, Vec<(u32, BigUint)>> = BTreeMap::new();
    let mut truncated = BTreeMap::new();
    let mut dropped = false;

    for t in 1..=j_max {
        for row in next.iter_mut() {
            for cell in row.iter_mut() {
                cell.set_zero();
            }
        }
        for s in 0..num_states {
            for w in 0..=cap {
                let count = &dp[s][w as usize];
                if count.is_zero() {
                    continue;
                }
                for u in 0..2u8 {
                    let ns = trellis.next_state(s as u32, u);
                    if s == 0 && ns == 0 {
                        continue; // zero self-loop never lies on a branch
                    }
                    let nw = w + trellis.output(s as u32, u).count_ones();
                    if nw > cap {
                        dropped = true;
                        continue;
                    }
                    next[ns as usize][nw as usize] += count;
                }
            }
        }
        let mut merged = Vec::new();
        for w in 0..=cap {
            let count = &next[0][w as usize];
            if !count.is_zero() {
                merged.push((w, count.clone()));
            }
        }
        if !merged.is_empty() {
            per_length.insert(t, merged);
        }
        if t > m as u32 {
            truncated.insert(t, dropped);
        }
        std::mem::swap(&mut dp, &mut next);
    }

    Ok(ActiveSpectrum {
        code: code.to_string(),
        n: trellis.n(),
        m,
        j_max,
        w_max: cap,
        per_length,
        truncated,
    })
}

/// Exhaustive verification oracle: enumerate every input sequence of every
/// length up to `j_max`, replay the trellis, and apply the branch
/// constraints literally (start at zero, leave immediately, no two
/// consecutive zero states, merge at exactly length `j`). No weight cap.
///
/// Cost is `O(2^j_max * j_max)`; lengths above 24 are rejected.
pub fn oracle_spectrum(trellis: &Trellis, code: &str, j_max: u32) -> Result<ActiveSpectrum> {
    if j_max > 24 {
        return Err(Error::Domain(format!(
            "oracle_spectrum enumerates 2^j_max inputs; j_max={j_max} is too large"
        )));
    }
    let m = trellis.memory();
    let mut per_length: BTreeMap<u32, BTreeMap<u32, BigUint>> = BTreeMap::new();

    for j in 1..=j_max {
        for inputs in 0u64..(1u64 << j) {
            let mut state = 0u32;
            let mut weight = 0u32;
            let mut prev_zero = true; // s_0 = 0
            let mut valid = true;
            for t in 0..j {
                let u = ((inputs >> t) & 1) as u8;
                weight += trellis.output(state, u).count_ones();
                state = trellis.next_state(state, u);
                let is_zero = state == 0;
                if t == 0 && is_zero {
                    valid = false; // s_1 must be nonzero
                    break;
                }
                if prev_zero && is_zero {
                    valid = false; // two consecutive zero states
                    break;
                }
                prev_zero = is_zero;
            }
            if valid && state == 0 {
                *per_length
                    .entry(j)
                    .or_default()
                    .entry(weight)
                    .or_insert_with(BigUint::zero) += 1u32;
            }
        }
    }

    let per_length: BTreeMap<u32, Vec<(u32, BigUint)>> = per_length
        .into_iter()
        .map(|(j, ws)| (j, ws.into_iter().collect()))
        .collect();
    let truncated = (m as u32 + 1..=j_max).map(|j| (j, false)).collect();
    Ok(ActiveSpectrum {
        code: code.to_string(),
        n: trellis.n(),
        m,
        j_max,
        w_max: effective_cap(trellis.n(), j_max, u32::MAX),
        per_length,
        truncated,
    })
}

/// Minimum-weight profile `j -> a_j` via a scalar DP (no counts). Cheaper
/// than the counting DP; used to pick a weight cap before a full run and as
/// an independent check of the spectrum's minima.
#[allow(clippy::needless_range_loop)]
pub fn active_distance_profile(trellis: &Trellis, j_max: u32) -> BTreeMap<u32, u32> {
    let num_states = trellis.num_states() as usize;
    const INF: u32 = u32::MAX;
    let mut dp = vec![INF; num_states];
    let mut next = vec![INF; num_states];
    dp[0] = 0;
    let mut profile = BTreeMap::new();
    for t in 1..=j_max {
        next.fill(INF);
        for s in 0..num_states {
            if dp[s] == INF {
                continue;
            }
            for u in 0..2u8 {
                let ns = trellis.next_state(s as u32, u) as usize;
                if s == 0 && ns == 0 {
                    continue;
                }
                let w = dp[s] + trellis.output(s as u32, u).count_ones();
                if w < next[ns] {
                    next[ns] = w;
                }
            }
        }
        if next[0] != INF {
            profile.insert(t, next[0]);
        }
        std::mem::swap(&mut dp, &mut next);
    }
    profile
}

/// Reduce a spectrum to its global minimum-weight statistics.
pub fn summarize(spectrum: &ActiveSpectrum) -> Result<SpectrumSummary> {
    let w_min = spectrum
        .per_length
        .values()
        .map(|v| v[0].0)
        .min()
        .ok_or(Error::EmptySpectrum)?;
    let mut n_wmin = BigUint::zero();
    let mut j_wmin = None;
    for (&j, entries) in &spectrum.per_length {
        if let Some((_, count)) = entries.iter().find(|(w, _)| *w == w_min) {
            n_wmin += count;
            if j_wmin.is_none() {
                j_wmin = Some(j);
            }
        }
    }
    Ok(SpectrumSummary {
        w_min,
        n_wmin,
        j_wmin: j_wmin.unwrap(),
    })
}

impl ActiveSpectrum {
    /// Serialize to the interchange JSON document. Counts are decimal
    /// strings; map keys are emitted in ascending numeric order so the
    /// output is byte-stable.
    pub fn to_json_string(&self) -> String {
        let mut truncated = Map::new();
        for (j, flag) in &self.truncated {
            truncated.insert(j.to_string(), Value::Bool(*flag));
        }
        let mut spectrum = Map::new();
        for (j, entries) in &self.per_length {
            let rows: Vec<Value> = entries
                .iter()
                .map(|(w, count)| json!([w, count.to_string()]))
                .collect();
            spectrum.insert(j.to_string(), Value::Array(rows));
        }
        let mut doc = Map::new();
        doc.insert("code".into(), json!(self.code));
        doc.insert("n".into(), json!(self.n));
        doc.insert("m".into(), json!(self.m));
        doc.insert("J_max".into(), json!(self.j_max));
        doc.insert("W_max".into(), json!(self.w_max));
        doc.insert("truncated".into(), Value::Object(truncated));
        doc.insert("spectrum".into(), Value::Object(spectrum));
        doc.insert("tool_version".into(), json!(crate::VERSION));
        let mut out = serde_json::to_string_pretty(&Value::Object(doc)).unwrap();
        out.push('\n');
        out
    }

    /// Parse the interchange JSON document, validating the per-length
    /// invariants (weights sorted and distinct, counts positive).
    pub fn from_json_str(text: &str) -> Result<ActiveSpectrum> {
        let doc: Value = serde_json::from_str(text)?;
        let bad = |reason: &str| Error::MalformedFile {
            path: "<spectrum json>".into(),
            reason: reason.to_string(),
        };
        let obj = doc.as_object().ok_or_else(|| bad("not a JSON object"))?;
        let code = obj
            .get("code")
            .and_then(Value::as_str)
            .ok_or_else(|| bad("missing \"code\""))?
            .to_string();
        let n = obj
            .get("n")
            .and_then(Value::as_u64)
            .ok_or_else(|| bad("missing \"n\""))? as usize;
        let m = obj
            .get("m")
            .and_then(Value::as_u64)
            .ok_or_else(|| bad("missing \"m\""))? as usize;
        let j_max = obj
            .get("J_max")
            .and_then(Value::as_u64)
            .ok_or_else(|| bad("missing \"J_max\""))? as u32;
        let w_max = obj
            .get("W_max")
            .and_then(Value::as_u64)
            .ok_or_else(|| bad("missing \"W_max\""))? as u32;
        let mut truncated = BTreeMap::new();
        for (k, v) in obj
            .get("truncated")
            .and_then(Value::as_object)
            .ok_or_else(|| bad("missing \"truncated\""))?
        {
            let j: u32 = k.parse().map_err(|_| bad("non-integer length key"))?;
            truncated.insert(j, v.as_bool().ok_or_else(|| bad("non-boolean flag"))?);
        }
        let mut per_length = BTreeMap::new();
        for (k, v) in obj
            .get("spectrum")
            .and_then(Value::as_object)
            .ok_or_else(|| bad("missing \"spectrum\""))?
        {
            let j: u32 = k.parse().map_err(|_| bad("non-integer length key"))?;
            let rows = v.as_array().ok_or_else(|| bad("spectrum entry not an array"))?;
            let mut entries: Vec<(u32, BigUint)> = Vec::with_capacity(rows.len());
            for row in rows {
                let pair = row.as_array().filter(|a| a.len() == 2).ok_or_else(|| {
                    bad("spectrum row must be a [weight, count] pair")
                })?;
                let w = pair[0]
                    .as_u64()
                    .ok_or_else(|| bad("non-integer weight"))? as u32;
                let count: BigUint = pair[1]
                    .as_str()
                    .ok_or_else(|| bad("count must be a decimal string"))?
                    .parse()
                    .map_err(|_| bad("unparseable count"))?;
                if count.is_zero() {
                    return Err(bad("count must be positive"));
                }
                entries.push((w, count));
            }
            if entries.windows(2).any(|p| p[0].0 >= p[1].0) {
                return Err(bad("weights must be sorted and distinct"));
            }
            if entries.is_empty() {
                return Err(bad("empty spectrum entry"));
            }
            per_length.insert(j, entries);
        }
        Ok(ActiveSpectrum {
            code,
            n,
            m,
            j_max,
            w_max,
            per_length,
            truncated,
        })
    }
}
