//! Monte-Carlo BER/FER measurement over the BSC with hard-decision Viterbi
//! decoding of zero-terminated frames.
//!
//! Reproducibility: every random quantity is drawn from a ChaCha8 stream
//! derived from the master seed and a stream id. Frame `f` uses stream
//! `3f` for its information bits, `3f + 1` for the channel, and `3f + 2`
//! for decoder tie-breaks, so campaign results are a pure function of the
//! parameters, independent of how frames are scheduled across threads.

use rand::distributions::Bernoulli;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::codec::{encode, GeneratorSpec, Trellis};
use crate::error::{Error, Result};

/// Identity of the RNG scheme recorded in every report.
pub const RNG_ID: &str = "rand_chacha::ChaCha8Rng seed_from_u64, stream=3*frame+k";

/// BSC parameters plus the campaign master seed.
#[derive(Debug, Clone, Copy)]
pub struct ChannelConfig {
    /// Crossover probability, in [0, 1/2).
    pub p: f64,
    /// 64-bit master seed.
    pub seed: u64,
}

impl ChannelConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..0.5).contains(&self.p) {
            return Err(Error::Config(format!(
                "crossover probability p={} outside [0, 1/2)",
                self.p
            )));
        }
        Ok(())
    }
}

/// Which bits the BER counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BerBasis {
    /// Re-encode the decision and compare full codewords (default).
    CodewordBits,
    /// Compare information bits only.
    InfoBits,
}

impl BerBasis {
    pub fn as_str(&self) -> &'static str {
        match self {
            BerBasis::CodewordBits => "codeword_bits",
            BerBasis::InfoBits => "info_bits",
        }
    }
}

impl std::str::FromStr for BerBasis {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "codeword_bits" | "codeword" => Ok(BerBasis::CodewordBits),
            "info_bits" | "info" => Ok(BerBasis::InfoBits),
            other => Err(Error::Config(format!(
                "unknown BER basis {other:?} (use codeword_bits or info_bits)"
            ))),
        }
    }
}

/// Seeded substream: ChaCha8 keyed from the master seed with a 64-bit
/// stream counter.
pub fn substream(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Flip each bit independently with probability `cfg.p`; deterministic for
/// a given `(seed, stream)`.
pub fn bsc_corrupt(bits: &[bool], cfg: &ChannelConfig, stream: u64) -> Vec<bool> {
    let mut rng = substream(cfg.seed, stream);
    let flip = Bernoulli::new(cfg.p).expect("validated probability");
    bits.iter().map(|&b| b ^ rng.sample(flip)).collect()
}

/// Maximum-likelihood (minimum Hamming distance) decoding of one
/// zero-terminated frame. `received` holds `n * (info_len + m)` hard bits.
/// Metric ties between survivors are resolved by a fair coin from
/// `tie_rng`. Returns the information bits of the winning codeword.
#[allow(clippy::needless_range_loop)]
pub fn viterbi_decode(
    received: &[bool],
    trellis: &Trellis,
    tie_rng: &mut impl Rng,
) -> Result<Vec<bool>> {
    let n = trellis.n();
    let m = trellis.memory();
    if received.is_empty() || !received.len().is_multiple_of(n) {
        return Err(Error::MalformedReceived(format!(
            "length {} is not a positive multiple of n={n}",
            received.len()
        )));
    }
    let tuples = received.len() / n;
    if tuples < m {
        return Err(Error::MalformedReceived(format!(
            "{tuples} tuples cannot hold the {m}-tuple termination tail"
        )));
    }
    let info_len = tuples - m;
    let num_states = trellis.num_states() as usize;

    const INF: u32 = u32::MAX;
    let mut metric = vec![INF; num_states];
    let mut next_metric = vec![INF; num_states];
    metric[0] = 0;
    // survivor edge per (time, state), packed as (prev_state << 1) | input
    let mut backptr = vec![0u32; tuples * num_states];

    for t in 0..tuples {
        let mut rt = 0u32;
        for k in 0..n {
            rt |= (received[t * n + k] as u32) << k;
        }
        next_metric.fill(INF);
        let bp = &mut backptr[t * num_states..(t + 1) * num_states];
        for s in 0..num_states {
            let base = metric[s];
            if base == INF {
                continue;
            }
            let inputs: [u8; 2] = if t < info_len {
                [0, 1]
            } else {
                let u = trellis.tail_input(s as u32);
                [u, u]
            };
            let n_inputs = if t < info_len { 2 } else { 1 };
            for &u in &inputs[..n_inputs] {
                let ns = trellis.next_state(s as u32, u) as usize;
                let cand = base + (trellis.output(s as u32, u) ^ rt).count_ones();
                if cand < next_metric[ns] {
                    next_metric[ns] = cand;
                    bp[ns] = ((s as u32) << 1) | u as u32;
                } else if cand == next_metric[ns] && tie_rng.gen_bool(0.5) {
                    bp[ns] = ((s as u32) << 1) | u as u32;
                }
            }
        }
        std::mem::swap(&mut metric, &mut next_metric);
    }

    debug_assert_ne!(metric[0], INF, "state 0 is always reachable");
    let mut bits = vec![false; tuples];
    let mut state = 0usize;
    for t in (0..tuples).rev() {
        let edge = backptr[t * num_states + state];
        bits[t] = edge & 1 == 1;
        state = (edge >> 1) as usize;
    }
    debug_assert_eq!(state, 0);
    bits.truncate(info_len);
    Ok(bits)
}

/// Campaign shape: how many frames, how long, and what the BER counts.
#[derive(Debug, Clone, Copy)]
pub struct CampaignParams {
    pub frames: u64,
    /// Transmitted frame length in tuples, termination included.
    pub frame_len_tuples: u32,
    pub ber_basis: BerBasis,
}

/// Aggregated result of one Monte-Carlo campaign.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimReport {
    pub code: String,
    pub p: f64,
    pub frames: u64,
    pub frame_len_tuples: u32,
    /// Information tuples per frame (= frame_len_tuples - m; the tail lives
    /// inside the transmitted frame).
    pub info_len_tuples: u32,
    pub bit_errors: u64,
    pub bits_compared: u64,
    pub frame_errors: u64,
    pub ber: f64,
    pub fer: f64,
    /// 95% Wilson interval on the BER.
    pub ci95: (f64, f64),
    pub seed: u64,
    pub ber_basis: BerBasis,
    pub rng: String,
    pub tool_version: String,
}

/// 95% Wilson score interval for `successes` out of `trials`.
pub fn wilson_ci95(successes: u64, trials: u64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let z = 1.959963984540054_f64;
    let n = trials as f64;
    let phat = successes as f64 / n;
    let denom = 1.0 + z * z / n;
    let center = phat + z * z / (2.0 * n);
    let half = z * ((phat * (1.0 - phat) + z * z / (4.0 * n)) / n).sqrt();
    // the endpoints are exact at the degenerate counts; avoid sqrt residue
    let lo = if successes == 0 {
        0.0
    } else {
        ((center - half) / denom).max(0.0)
    };
    let hi = if successes == trials {
        1.0
    } else {
        ((center + half) / denom).min(1.0)
    };
    (lo, hi)
}

/// Run a campaign: per frame, draw random information bits, encode with
/// zero termination, push through the BSC, Viterbi-decode, and count
/// errors on the configured basis. Frames are independent and are summed
/// with an associative reduction, so the report does not depend on the
/// rayon worker count.
pub fn run_campaign(
    spec: &GeneratorSpec,
    cfg: &ChannelConfig,
    params: &CampaignParams,
) -> Result<SimReport> {
    cfg.validate()?;
    if params.frames == 0 {
        return Err(Error::Config("need at least one frame".into()));
    }
    let m = spec.memory() as u32;
    if params.frame_len_tuples <= m {
        return Err(Error::Config(format!(
            "frame length {} tuples leaves no room for information bits (m={m})",
            params.frame_len_tuples
        )));
    }
    let trellis = Trellis::new(spec);
    let n = spec.n();
    let info_len = (params.frame_len_tuples - m) as usize;

    let (bit_errors, frame_errors) = (0..params.frames)
        .into_par_iter()
        .map(|f| {
            let errs = simulate_frame(&trellis, cfg, f, info_len, params.ber_basis);
            (errs, (errs > 0) as u64)
        })
        .reduce(|| (0u64, 0u64), |a, b| (a.0 + b.0, a.1 + b.1));

    let bits_compared = match params.ber_basis {
        BerBasis::CodewordBits => params.frames * params.frame_len_tuples as u64 * n as u64,
        BerBasis::InfoBits => params.frames * info_len as u64,
    };
    let ber = bit_errors as f64 / bits_compared as f64;
    Ok(SimReport {
        code: spec.spec_string(),
        p: cfg.p,
        frames: params.frames,
        frame_len_tuples: params.frame_len_tuples,
        info_len_tuples: info_len as u32,
        bit_errors,
        bits_compared,
        frame_errors,
        ber,
        fer: frame_errors as f64 / params.frames as f64,
        ci95: wilson_ci95(bit_errors, bits_compared),
        seed: cfg.seed,
        ber_basis: params.ber_basis,
        rng: RNG_ID.to_string(),
        tool_version: crate::VERSION.to_string(),
    })
}

fn simulate_frame(
    trellis: &Trellis,
    cfg: &ChannelConfig,
    frame: u64,
    info_len: usize,
    basis: BerBasis,
) -> u64 {
    let mut data_rng = substream(cfg.seed, frame * 3);
    let info: Vec<bool> = (0..info_len).map(|_| data_rng.gen()).collect();
    let tx = encode(&info, trellis);
    let tx_bits = tx.to_bits(trellis.n());
    let rx = bsc_corrupt(&tx_bits, cfg, frame * 3 + 1);
    let mut tie_rng = substream(cfg.seed, frame * 3 + 2);
    let decoded = viterbi_decode(&rx, trellis, &mut tie_rng).expect("frame shape is valid");
    match basis {
        BerBasis::CodewordBits => {
            let re = encode(&decoded, trellis);
            re.tuples
                .iter()
                .zip(&tx.tuples)
                .map(|(a, b)| (a ^ b).count_ones() as u64)
                .sum()
        }
        BerBasis::InfoBits => decoded.iter().zip(&info).filter(|(a, b)| a != b).count() as u64,
    }
}

/// Header of the simulation CSV.
pub const SIM_CSV_HEADER: &str = "p,frames,frame_len,ber,fer,ci_low,ci_high,seed,basis";

impl SimReport {
    pub fn to_csv_row(&self) -> String {
        use crate::bounds::fmt_prob;
        format!(
            "{},{},{},{},{},{},{},{},{}",
            fmt_prob(self.p),
            self.frames,
            self.frame_len_tuples,
            fmt_prob(self.ber),
            fmt_prob(self.fer),
            fmt_prob(self.ci95.0),
            fmt_prob(self.ci95.1),
            self.seed,
            self.ber_basis.as_str()
        )
    }
}

/// One parsed row of a simulation CSV.
#[derive(Debug, Clone)]
pub struct SimRow {
    pub p: f64,
    pub ber: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

/// Parse a simulation CSV (comment preamble plus the fixed header).
pub fn read_sim_csv(text: &str, path: &str) -> Result<(crate::bounds::BoundsMeta, Vec<SimRow>)> {
    let meta = crate::bounds::read_preamble(text);
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
    let (ip, iber, ilo, ihi) = (col("p")?, col("ber")?, col("ci_low")?, col("ci_high")?);
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
        rows.push(SimRow {
            p: field(ip)?,
            ber: field(iber)?,
            ci_low: field(ilo)?,
            ci_high: field(ihi)?,
        });
    }
    Ok((meta, rows))
}
