//! Analytical BER bounds from the active-distance spectrum.
//!
//! The burst probability is a double sum over error-count classes: the
//! number of channel errors hitting the support of a weight-w burst and the
//! number hitting the rest of the n*s positions. A decoding error toward the
//! burst needs strictly more than w/2 errors on its support; an exact w/2
//! split is a coin-flip tie, contributing half its probability for even w.
//! Everything is evaluated in the log domain (log-gamma binomials,
//! max-shifted summation) so that small crossover probabilities do not
//! underflow.

use num_bigint::BigUint;
use num_traits::ToPrimitive;
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::spectrum::{ActiveSpectrum, SpectrumSummary};

/// One burst-probability evaluation point.
#[derive(Debug, Clone, Copy)]
pub struct BurstQuery {
    /// Burst length in tuples.
    pub s: u32,
    /// Burst Hamming weight.
    pub w: u32,
    /// BSC crossover probability.
    pub p: f64,
    /// Bits per tuple.
    pub n: u32,
}

impl BurstQuery {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..0.5).contains(&self.p) {
            return Err(Error::Domain(format!(
                "crossover probability p={} outside [0, 1/2)",
                self.p
            )));
        }
        if self.w > self.n * self.s {
            return Err(Error::Domain(format!(
                "burst weight w={} exceeds sequence length n*s={}",
                self.w,
                self.n * self.s
            )));
        }
        Ok(())
    }

    fn bits(&self) -> u32 {
        self.n * self.s
    }
}

fn ln_choose(n: u32, k: u32) -> f64 {
    debug_assert!(k <= n);
    ln_gamma(n as f64 + 1.0) - ln_gamma(k as f64 + 1.0) - ln_gamma((n - k) as f64 + 1.0)
}

/// log of C(w,e1) * C(ns-w, e_all-e1) * p^e_all * (1-p)^(ns-e_all), the
/// probability of a specific error-count class on a weight-w sequence of
/// n*s bits. Exactly -inf when p = 0 and e_all > 0.
pub fn log_class_prob(e_all: u32, e1: u32, q: &BurstQuery) -> Result<f64> {
    q.validate()?;
    if e1 > e_all || e1 > q.w || e_all - e1 > q.bits() - q.w {
        return Err(Error::Domain(format!(
            "error class (e_all={e_all}, e1={e1}) impossible for (s={}, w={}, n={})",
            q.s, q.w, q.n
        )));
    }
    Ok(ln_class(e_all, e1, q))
}

fn ln_class(e_all: u32, e1: u32, q: &BurstQuery) -> f64 {
    let bits = q.bits();
    let mut acc = ln_choose(q.w, e1) + ln_choose(bits - q.w, e_all - e1);
    if e_all > 0 {
        acc += e_all as f64 * q.p.ln();
    }
    if bits - e_all > 0 {
        acc += (bits - e_all) as f64 * (1.0 - q.p).ln();
    }
    acc
}

/// Max-shifted log-sum-exp; the empty sum (or all -inf) is -inf.
fn log_sum_exp(terms: &[f64]) -> f64 {
    let max = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    let sum: f64 = terms.iter().map(|t| (t - max).exp()).sum();
    max + sum.ln()
}

fn p_burst_log(q: &BurstQuery) -> Result<f64> {
    q.validate()?;
    let bits = q.bits();
    let half = q.w / 2; // strict majority means > w/2, i.e. >= half + 1
    let mut terms = Vec::new();
    for i in half + 1..=bits {
        for i1 in half + 1..=q.w.min(i) {
            if i - i1 > bits - q.w {
                continue; // no way to place the off-support errors
            }
            terms.push(ln_class(i, i1, q));
        }
    }
    if q.w.is_multiple_of(2) {
        let tie = q.w / 2;
        for i in tie..=bits - tie {
            terms.push(ln_class(i, tie, q) - std::f64::consts::LN_2);
        }
    }
    Ok(log_sum_exp(&terms))
}

/// Probability that an error burst of length `s` tuples and weight `w` wins
/// against the transmitted word on a BSC with crossover probability `p`.
pub fn p_burst(q: &BurstQuery) -> Result<f64> {
    Ok(p_burst_log(q)?.exp())
}

/// Lower bound on the probability of an error burst of length `j`:
/// `(1-p)^(4m) * p_burst(s=j, w=a_j, p)`.
pub fn p_low(j: u32, p: f64, a_j: u32, m: u32, n: u32) -> Result<f64> {
    let q = BurstQuery { s: j, w: a_j, p, n };
    Ok((1.0 - p).powi(4 * m as i32) * p_burst(&q)?)
}

/// Upper bound on the probability of an error burst of length `j`: the sum
/// of `N_w * p_burst(s=j, w, p)` over the per-length spectrum, accumulated
/// in the log domain.
pub fn p_up(j: u32, p: f64, spectrum: &ActiveSpectrum) -> Result<f64> {
    let entries = spectrum.entries(j).ok_or(Error::MissingLength(j))?;
    let n = spectrum.n as u32;
    let mut terms = Vec::with_capacity(entries.len());
    for (w, count) in entries {
        let q = BurstQuery { s: j, w: *w, p, n };
        terms.push(ln_biguint(count) + p_burst_log(&q)?);
    }
    Ok(log_sum_exp(&terms).exp())
}

fn ln_biguint(x: &BigUint) -> f64 {
    if let Some(f) = x.to_f64().filter(|f| f.is_finite()) {
        return f.ln();
    }
    // beyond f64 range: peel off the top 53 bits
    let bits = x.bits();
    let shift = bits - 53;
    let top = (x >> shift).to_f64().unwrap();
    top.ln() + shift as f64 * std::f64::consts::LN_2
}

/// Lower BER bound: only the most probable bursts (global minimum weight)
/// contribute, each corrupting `w_min` bits spread over `n`-bit tuples.
pub fn ber_low(p: f64, summary: &SpectrumSummary, m: u32, n: u32) -> Result<f64> {
    let scale = summary.w_min as f64 * summary.n_wmin_f64() / n as f64;
    Ok(scale * p_low(summary.j_wmin, p, summary.w_min, m, n)?)
}

/// Upper BER bound: sum over burst lengths of the per-length burst
/// probability bound weighted by the largest weight in that length's
/// spectrum, clamped to 1. `j_cap` restricts the sum to lengths `<= j_cap`.
pub fn ber_up(p: f64, spectrum: &ActiveSpectrum, j_cap: Option<u32>) -> Result<f64> {
    if spectrum.is_empty() {
        return Err(Error::EmptySpectrum);
    }
    let n = spectrum.n as f64;
    let hi = j_cap.unwrap_or(spectrum.j_max).min(spectrum.j_max);
    let mut sum = 0.0;
    for (&j, _) in spectrum.per_length.range(..=hi) {
        let w_max = spectrum.max_weight(j).unwrap();
        sum += (w_max as f64 / n) * p_up(j, p, spectrum)?;
    }
    Ok(sum.min(1.0))
}

/// Evaluated bound curves over a grid of crossover probabilities.
#[derive(Debug, Clone)]
pub struct BoundsCurve {
    pub code: String,
    pub grid: Vec<f64>,
    pub ber_low: Vec<f64>,
    pub ber_up: Vec<f64>,
    /// Truncation length of the spectrum the sums ran over.
    pub j_used: u32,
    pub w_min: u32,
    pub n_wmin: BigUint,
    /// SHA-256 of the spectrum file the curve was computed from.
    pub spectrum_id: String,
    /// Optional per-cutoff upper-bound columns `(j_cap, values)`.
    pub per_j: Vec<(u32, Vec<f64>)>,
}

/// Evaluate both bounds on every grid point. `per_j_cutoffs` adds one extra
/// upper-bound column per requested truncation length.
pub fn curve(
    spectrum: &ActiveSpectrum,
    grid: &[f64],
    spectrum_id: &str,
    per_j_cutoffs: &[u32],
) -> Result<BoundsCurve> {
    for &p in grid {
        if !(0.0..0.5).contains(&p) {
            return Err(Error::Domain(format!(
                "grid value p={p} outside [0, 1/2)"
            )));
        }
    }
    let min_j = spectrum.m as u32 + 1;
    for &cap in per_j_cutoffs {
        if cap < min_j || cap > spectrum.j_max {
            return Err(Error::Config(format!(
                "per-j cutoff {cap} outside the spectrum range [{min_j}, {}]",
                spectrum.j_max
            )));
        }
    }
    let summary = crate::spectrum::summarize(spectrum)?;
    let m = spectrum.m as u32;
    let n = spectrum.n as u32;
    let mut low = Vec::with_capacity(grid.len());
    let mut up = Vec::with_capacity(grid.len());
    for &p in grid {
        low.push(ber_low(p, &summary, m, n)?);
        up.push(ber_up(p, spectrum, None)?);
    }
    let mut per_j = Vec::with_capacity(per_j_cutoffs.len());
    for &cap in per_j_cutoffs {
        let mut col = Vec::with_capacity(grid.len());
        for &p in grid {
            col.push(ber_up(p, spectrum, Some(cap))?);
        }
        per_j.push((cap, col));
    }
    Ok(BoundsCurve {
        code: spectrum.code.clone(),
        grid: grid.to_vec(),
        ber_low: low,
        ber_up: up,
        j_used: spectrum.j_max,
        w_min: summary.w_min,
        n_wmin: summary.n_wmin,
        spectrum_id: spectrum_id.to_string(),
        per_j,
    })
}

/// Scientific notation with 13 significant digits, as used in all CSVs.
pub fn fmt_prob(x: f64) -> String {
    format!("{x:.12e}")
}

impl BoundsCurve {
    /// Render the bounds CSV, preamble comments first.
    pub fn to_csv_string(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("# convbounds {}\n", crate::VERSION));
        out.push_str(&format!("# code={}\n", self.code));
        out.push_str(&format!("# spectrum_sha256={}\n", self.spectrum_id));
        out.push_str("p,ber_low,ber_up,j_used,w_min,n_wmin");
        for (cap, _) in &self.per_j {
            out.push_str(&format!(",ber_up_j{cap}"));
        }
        out.push('\n');
        for (i, &p) in self.grid.iter().enumerate() {
            out.push_str(&format!(
                "{},{},{},{},{},{}",
                fmt_prob(p),
                fmt_prob(self.ber_low[i]),
                fmt_prob(self.ber_up[i]),
                self.j_used,
                self.w_min,
                self.n_wmin
            ));
            for (_, col) in &self.per_j {
                out.push_str(&format!(",{}", fmt_prob(col[i])));
            }
            out.push('\n');
        }
        out
    }
}

/// Preamble metadata of a bounds CSV.
#[derive(Debug, Clone, Default)]
pub struct BoundsMeta {
    pub code: Option<String>,
    pub spectrum_sha256: Option<String>,
}

/// One parsed row of a bounds CSV.
#[derive(Debug, Clone)]
pub struct BoundsRow {
    pub p: f64,
    pub ber_low: f64,
    pub ber_up: f64,
}

/// Parse a bounds CSV (comment preamble plus the fixed header).
pub fn read_bounds_csv(text: &str, path: &str) -> Result<(BoundsMeta, Vec<BoundsRow>)> {
    let meta = read_preamble(text);
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let headers = reader.headers()?.clone();
    let col = |name: &str| -> Result<usize> {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::MalformedFile {
                path: path.to_string(),
                reason: format!("missing column {name:?}"),
            })
    };
    let (ip, ilow, iup) = (col("p")?, col("ber_low")?, col("ber_up")?);
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record?;
        let field = |i: usize| -> Result<f64> {
            record
                .get(i)
                .and_then(|v| v.parse().ok())
                .ok_or_else(|| Error::MalformedFile {
                    path: path.to_string(),
                    reason: format!("bad numeric field in row {record:?}"),
                })
        };
        rows.push(BoundsRow {
            p: field(ip)?,
            ber_low: field(ilow)?,
            ber_up: field(iup)?,
        });
    }
    Ok((meta, rows))
}

pub(crate) fn read_preamble(text: &str) -> BoundsMeta {
    let mut meta = BoundsMeta::default();
    for line in text.lines().take_while(|l| l.starts_with('#')) {
        let body = line.trim_start_matches('#').trim();
        if let Some(v) = body.strip_prefix("code=") {
            meta.code = Some(v.to_string());
        } else if let Some(v) = body.strip_prefix("spectrum_sha256=") {
            meta.spectrum_sha256 = Some(v.to_string());
        }
    }
    meta
}
