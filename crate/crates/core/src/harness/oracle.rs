//! Ground truth for the encoder: the uniform distribution over preimages.
//!
//! Full enumeration only works for halves of at most 12 bits, far below any
//! executable profile. For real profiles the oracle is exact rejection
//! sampling (uniform codewords, keep those that decode to the target) and
//! the comparison runs on low-dimensional projections of the codeword and
//! of the values the decoder computes from it.

use std::collections::BTreeMap;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::dist::{l1_maps, Dist};
use super::experiment::{chunk_rng, CHUNK_TRIALS};
use crate::bits::BitString;
use crate::codec::{encode_with_draws, Codeword, Message};
use crate::error::{usage, Error, Result};
use crate::nmext::{trace, NmExt};

/// `2n` bits enumerable by [`brute_force_oracle`].
pub const BRUTE_FORCE_MAX_BITS: usize = 24;

/// Every `(x, y)` with `decode(x, y) = s`, halves of `n` bits.
pub fn brute_force_preimages<D>(n: usize, decode: D, s: &Message) -> Result<Vec<Codeword>>
where
    D: Fn(&Codeword) -> Result<Message>,
{
    if 2 * n > BRUTE_FORCE_MAX_BITS {
        return usage(format!(
            "enumerating 2^{} codewords exceeds 2^{BRUTE_FORCE_MAX_BITS}",
            2 * n
        ));
    }
    let mut out = Vec::new();
    for xv in 0..1u64 << n {
        for yv in 0..1u64 << n {
            let cw = Codeword {
                x: BitString::from_u64(xv, n),
                y: BitString::from_u64(yv, n),
            };
            if decode(&cw)? == *s {
                out.push(cw);
            }
        }
    }
    Ok(out)
}

/// Uniform distribution over the preimages of `s`, labelled `x|y`.
pub fn brute_force_oracle(nm: &NmExt, s: &Message) -> Result<Dist> {
    let n = nm.profile().n;
    if 2 * n > BRUTE_FORCE_MAX_BITS {
        return usage(format!(
            "profile halves have {n} bits; brute force needs 2n <= {BRUTE_FORCE_MAX_BITS}, use the rejection oracle"
        ));
    }
    let pre = brute_force_preimages(n, |cw| crate::codec::decode(nm, cw), s)?;
    uniform_over(&pre, n)
}

pub(crate) fn uniform_over(pre: &[Codeword], n: usize) -> Result<Dist> {
    if pre.is_empty() {
        return Err(Error::Infeasible("message has no preimage".into()));
    }
    let w = 1.0 / pre.len() as f64;
    let weights = pre.iter().map(|cw| (format!("{}|{}", cw.x, cw.y), w)).collect();
    Dist::new(format!("codewords{n}"), weights)
}

/// One coordinate of a projection. Indices are 0-based.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Feature {
    X(usize),
    Y(usize),
    /// Bit of `Z^1`.
    Z1(usize),
    /// Bit of `Z^2`, the first round's output.
    Z2(usize),
    /// Bit of the correlation breaker's output `F`.
    F(usize),
}

/// Values the decoder derives from a codeword, read by internal features.
struct Internals<'a> {
    z1: &'a BitString,
    z2: &'a BitString,
    f: &'a BitString,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Projection {
    pub name: String,
    pub features: Vec<Feature>,
}

impl Projection {
    fn eval(&self, cw: &Codeword, int: &Internals) -> u64 {
        self.features.iter().enumerate().fold(0, |acc, (k, f)| {
            let b = match *f {
                Feature::X(i) => cw.x.get(i),
                Feature::Y(i) => cw.y.get(i),
                Feature::Z1(i) => int.z1.get(i),
                Feature::Z2(i) => int.z2.get(i),
                Feature::F(i) => int.f.get(i),
            };
            acc | (b as u64) << k
        })
    }
}

/// Six-bit projections touching every region the encoder treats differently.
pub fn default_projections(nm: &NmExt) -> Vec<Projection> {
    let p = nm.profile();
    let l = nm.layout();
    let pair = |name: &str, at: usize| {
        let w = 3.min(p.n - at);
        Projection {
            name: name.into(),
            features: (at..at + w)
                .map(Feature::X)
                .chain((at..at + w).map(Feature::Y))
                .collect(),
        }
    };
    let mut out = vec![
        pair("head", 0),
        pair("ip2", l.ip2.offset()),
        pair("round1", l.rounds[0].offset()),
        pair("round_a", l.rounds[p.a - 1].offset()),
        pair("last", l.last.offset()),
    ];
    let free = 3 * p.n1 + p.pinned_symbols() * p.log_q as usize;
    if free < p.n {
        out.push(pair("rs_free", free));
    }
    let mut internal: Vec<Feature> = (0..(2 * p.h).min(3)).map(Feature::Z1).collect();
    internal.extend((0..(2 * p.h).min(2)).map(Feature::Z2));
    internal.push(Feature::F(0));
    out.push(Projection {
        name: "internal".into(),
        features: internal,
    });
    out
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProjectionRow {
    pub name: String,
    pub support: usize,
    pub l1: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MessageOracle {
    pub message: String,
    pub max_l1: f64,
    pub projections: Vec<ProjectionRow>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OracleReport {
    pub profile_id: String,
    pub seed: u64,
    pub draws: usize,
    /// Uniform codewords decoded by the rejection sampler.
    pub oracle_candidates: u64,
    pub max_l1: f64,
    pub wall_time_ms: u64,
    pub messages: Vec<MessageOracle>,
}

impl OracleReport {
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("report serializes")
    }

    pub fn from_toml(s: &str) -> Result<Self> {
        toml::from_str(s).map_err(|e| Error::Format(e.to_string()))
    }
}

type Hist = BTreeMap<u64, u64>;

fn hist_l1(a: &Hist, b: &Hist) -> f64 {
    let norm = |h: &Hist| {
        let n = h.values().sum::<u64>().max(1) as f64;
        h.iter()
            .map(|(&k, &c)| (k, c as f64 / n))
            .collect::<BTreeMap<u64, f64>>()
    };
    l1_maps(&norm(a), &norm(b))
}

// Encoder streams are tagged so they never collide with oracle streams.
const ENCODER_STREAM: u64 = 1 << 63;

/// Compares `draws` encodings of each message with `draws` exact samples of
/// the uniform preimage distribution, projection by projection.
pub fn compare_with_oracle(
    nm: &NmExt,
    messages: &[Message],
    projections: &[Projection],
    draws: usize,
    seed: u64,
) -> Result<OracleReport> {
    let p = nm.profile();
    if messages.iter().any(|s| s.len() != p.output_len) {
        return usage(format!("oracle messages must have {} bits", p.output_len));
    }
    if messages.is_empty() || draws == 0 {
        return usage("need at least one message and one draw");
    }
    let t0 = Instant::now();
    let k = projections.len();
    let eval_all = |cw: &Codeword, int: &Internals| projections.iter().map(|pr| pr.eval(cw, int)).collect::<Vec<u64>>();

    // Encoder side.
    let chunks = draws.div_ceil(CHUNK_TRIALS);
    let jobs: Vec<(usize, usize)> = (0..messages.len())
        .flat_map(|i| (0..chunks).map(move |c| (i, c)))
        .collect();
    let enc = jobs
        .par_iter()
        .map(|&(i, c)| {
            let mut rng = chunk_rng(seed, ENCODER_STREAM | (i as u64) << 32 | c as u64);
            let mut rows = Vec::new();
            for _ in c * CHUNK_TRIALS..((c + 1) * CHUNK_TRIALS).min(draws) {
                let (cw, d) = encode_with_draws(nm, &messages[i], &mut rng)?;
                rows.push(eval_all(
                    &cw,
                    &Internals {
                        z1: &d.z1,
                        z2: &d.rounds[0].out,
                        f: &d.f,
                    },
                ));
            }
            Ok((i, rows))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut enc_hist = vec![vec![Hist::new(); k]; messages.len()];
    for (i, rows) in enc {
        for row in rows {
            for (h, v) in enc_hist[i].iter_mut().zip(row) {
                *h.entry(v).or_default() += 1;
            }
        }
    }

    // Oracle side: rejection sampling in rounds of parallel chunks, consumed
    // in chunk order so the result does not depend on scheduling.
    let mut orc_hist = vec![vec![Hist::new(); k]; messages.len()];
    let mut filled = vec![0usize; messages.len()];
    let mut candidates = 0u64;
    let batch = rayon::current_num_threads().max(1) * 4;
    let mut next = 0u64;
    while filled.iter().any(|&f| f < draws) {
        let got = (next..next + batch as u64)
            .into_par_iter()
            .map(|c| {
                let mut rng = chunk_rng(seed, c);
                let mut rows = Vec::new();
                for _ in 0..CHUNK_TRIALS {
                    let cw = Codeword {
                        x: BitString::random(p.n, &mut rng),
                        y: BitString::random(p.n, &mut rng),
                    };
                    let tr = trace(nm, &cw.x, &cw.y)?;
                    if let Some(i) = messages.iter().position(|s| *s == tr.s_out) {
                        rows.push((
                            i,
                            eval_all(
                                &cw,
                                &Internals {
                                    z1: &tr.z1,
                                    z2: tr.z(2),
                                    f: &tr.f,
                                },
                            ),
                        ));
                    }
                }
                Ok(rows)
            })
            .collect::<Result<Vec<_>>>()?;
        next += batch as u64;
        candidates += (batch * CHUNK_TRIALS) as u64;
        for (i, row) in got.into_iter().flatten() {
            if filled[i] < draws {
                filled[i] += 1;
                for (h, v) in orc_hist[i].iter_mut().zip(row) {
                    *h.entry(v).or_default() += 1;
                }
            }
        }
    }

    let rows: Vec<MessageOracle> = messages
        .iter()
        .enumerate()
        .map(|(i, s)| {
            let projections: Vec<ProjectionRow> = projections
                .iter()
                .enumerate()
                .map(|(j, pr)| ProjectionRow {
                    name: pr.name.clone(),
                    support: enc_hist[i][j]
                        .keys()
                        .chain(orc_hist[i][j].keys())
                        .collect::<std::collections::BTreeSet<_>>()
                        .len(),
                    l1: hist_l1(&enc_hist[i][j], &orc_hist[i][j]),
                })
                .collect();
            MessageOracle {
                message: s.to_string(),
                max_l1: projections.iter().map(|r| r.l1).fold(0.0, f64::max),
                projections,
            }
        })
        .collect();
    Ok(OracleReport {
        profile_id: p.hash_hex(),
        seed,
        draws,
        oracle_candidates: candidates,
        max_l1: rows.iter().map(|r| r.max_l1).fold(0.0, f64::max),
        wall_time_ms: t0.elapsed().as_millis() as u64,
        messages: rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::extractors::{ip_extract, IpSpec};

    #[test]
    fn preimages_partition_the_cube() {
        // A 5-bit-per-half stand-in decoder: inner product over GF(2^5).
        let ip = IpSpec::new(5, 1).unwrap();
        let dec = |cw: &Codeword| ip_extract(&ip, &cw.x, &cw.y).map(|v| v.slice(0, 2));
        let mut total = 0;
        for s in 0..4u64 {
            let s = BitString::from_u64(s, 2);
            let pre = brute_force_preimages(5, dec, &s).unwrap();
            assert!(pre.iter().all(|cw| dec(cw).unwrap() == s));
            let d = uniform_over(&pre, 5).unwrap();
            assert!((d.weights.values().sum::<f64>() - 1.0).abs() < 1e-9);
            total += pre.len();
        }
        assert_eq!(total, 1 << 10);
        assert!(brute_force_preimages(13, dec, &BitString::zeros(2)).is_err());
    }

    #[test]
    fn real_profiles_are_too_large() {
        let nm = NmExt::new(&crate::nmext::ParamProfile::micro()).unwrap();
        assert!(matches!(
            brute_force_oracle(&nm, &BitString::zeros(2)),
            Err(Error::Usage(_))
        ));
    }
}
