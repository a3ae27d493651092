use std::collections::BTreeMap;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::dist::l1_maps;
use super::tamper::{tamper_apply, TamperFamily, TamperSpec};
use crate::bits::BitString;
use crate::codec::{copy_t, encode, Codeword, Message, TamperVerdict};
use crate::error::{usage, Error, Result};
use crate::nmext::{nmext2_t, NmExt};

/// Trials per RNG stream. Chunk `c` uses stream `c` of the master seed, so
/// results do not depend on how chunks are scheduled.
pub const CHUNK_TRIALS: usize = 256;
pub const MIN_TRIALS: usize = 1000;
pub const MAX_FAILURE_RATE: f64 = 0.01;
/// Messages longer than this make the joint distribution too large to hold.
pub const MAX_OUTPUT_BITS: usize = 16;

pub(crate) fn chunk_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(stream);
    r
}

/// `2 * sqrt(support / trials)`.
pub fn confidence_radius(support: usize, trials: usize) -> f64 {
    2.0 * (support as f64 / trials as f64).sqrt()
}

type Verdicts = Vec<TamperVerdict>;

#[derive(Default)]
struct Tally {
    by_message: BTreeMap<Message, BTreeMap<Verdicts, u64>>,
    halves: [BTreeMap<Verdicts, u64>; 2],
    failures: u64,
}

impl Tally {
    fn merge(mut self, o: Tally) -> Tally {
        for (s, row) in o.by_message {
            let mine = self.by_message.entry(s).or_default();
            for (v, c) in row {
                *mine.entry(v).or_default() += c;
            }
        }
        for (h, oh) in self.halves.iter_mut().zip(o.halves) {
            for (v, c) in oh {
                *h.entry(v).or_default() += c;
            }
        }
        self.failures += o.failures;
        self
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComponentReport {
    pub index: usize,
    pub family: String,
    pub l1: f64,
    pub confidence_radius: f64,
    pub split_half_l1: f64,
    pub split_half_radius: f64,
    pub d_f: BTreeMap<String, f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MessageReport {
    pub message: String,
    pub trials: u64,
    /// l1 between this message's verdict distribution and the pooled one.
    pub l1_to_d_f: f64,
    pub confidence_radius: f64,
}

/// One run of the tampering experiment. Scalars first, tables after, so
/// the TOML form reads top-down.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub profile_id: String,
    pub tamper: String,
    pub t: usize,
    pub trials: usize,
    pub seed: u64,
    pub completed: u64,
    pub encoder_failures: u64,
    /// l1 between the empirical joint of `(S, S'_1..S'_t)` and `Z copy_t(D_f, Z)`.
    pub l1: f64,
    pub statistical_distance: f64,
    pub confidence_radius: f64,
    pub joint_support: usize,
    /// l1 between the verdict distributions of the two trial halves.
    pub split_half_l1: f64,
    pub split_half_radius: f64,
    pub max_message_l1: f64,
    pub wall_time_ms: u64,
    pub d_f: BTreeMap<String, f64>,
    pub d_f_first_half: BTreeMap<String, f64>,
    pub d_f_second_half: BTreeMap<String, f64>,
    pub components: Vec<ComponentReport>,
    pub per_message: Vec<MessageReport>,
}

impl ExperimentReport {
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("report serializes")
    }

    pub fn from_toml(s: &str) -> Result<Self> {
        toml::from_str(s).map_err(|e| Error::Format(e.to_string()))
    }

    /// The report with wall time zeroed; equal seeds give equal values.
    pub fn without_timing(&self) -> Self {
        ExperimentReport {
            wall_time_ms: 0,
            ..self.clone()
        }
    }

    pub fn within_radius(&self) -> bool {
        self.l1 <= self.confidence_radius
    }

    pub fn split_half_agrees(&self) -> bool {
        self.split_half_l1 <= 2.0 * self.split_half_radius
    }
}

fn verdicts_label(v: &[TamperVerdict]) -> String {
    v.iter().map(ToString::to_string).collect::<Vec<_>>().join(",")
}

fn normalise<K: Ord + Clone>(counts: &BTreeMap<K, u64>) -> BTreeMap<K, f64> {
    let n: u64 = counts.values().sum();
    counts
        .iter()
        .map(|(k, &c)| (k.clone(), c as f64 / n.max(1) as f64))
        .collect()
}

fn labelled(d: &BTreeMap<Verdicts, f64>) -> BTreeMap<String, f64> {
    d.iter().map(|(k, &w)| (verdicts_label(k), w)).collect()
}

fn project(rows: &BTreeMap<Verdicts, u64>, pick: &dyn Fn(&[TamperVerdict]) -> Verdicts) -> BTreeMap<Verdicts, u64> {
    let mut out = BTreeMap::new();
    for (v, &c) in rows {
        *out.entry(pick(v)).or_default() += c;
    }
    out
}

struct JointStats {
    d_f: BTreeMap<Verdicts, f64>,
    l1: f64,
    support: usize,
}

/// Compares the empirical `(S, copy_t(V, S))` with `Z copy_t(D_f, Z)` where
/// `D_f` is the pooled verdict distribution and `Z` is uniform on `m` bits.
fn joint_stats(
    m: usize,
    by_message: &BTreeMap<Message, BTreeMap<Verdicts, u64>>,
    pick: &dyn Fn(&[TamperVerdict]) -> Verdicts,
) -> JointStats {
    let mut pooled = BTreeMap::new();
    let mut emp: BTreeMap<(Message, Vec<Message>), u64> = BTreeMap::new();
    for (s, row) in by_message {
        for (v, &c) in &project(row, pick) {
            *pooled.entry(v.clone()).or_insert(0u64) += c;
            *emp.entry((s.clone(), copy_t(v, s))).or_default() += c;
        }
    }
    let d_f = normalise(&pooled);
    let emp = normalise(&emp);
    let mut model: BTreeMap<(Message, Vec<Message>), f64> = BTreeMap::new();
    let pz = 1.0 / (1u64 << m) as f64;
    for z in 0..1u64 << m {
        let z = BitString::from_u64(z, m);
        for (d, &w) in &d_f {
            *model.entry((z.clone(), copy_t(d, &z))).or_default() += pz * w;
        }
    }
    JointStats {
        l1: l1_maps(&emp, &model),
        support: emp.len(),
        d_f,
    }
}

fn split_half(
    halves: &[BTreeMap<Verdicts, u64>; 2],
    pick: &dyn Fn(&[TamperVerdict]) -> Verdicts,
) -> (f64, f64, [BTreeMap<Verdicts, f64>; 2]) {
    let a = project(&halves[0], pick);
    let b = project(&halves[1], pick);
    let (da, db) = (normalise(&a), normalise(&b));
    let n = a.values().sum::<u64>().min(b.values().sum::<u64>()).max(1) as usize;
    let support = da
        .keys()
        .chain(db.keys())
        .collect::<std::collections::BTreeSet<_>>()
        .len();
    (l1_maps(&da, &db), confidence_radius(support, n), [da, db])
}

fn run_chunk(nm: &NmExt, fams: &[TamperFamily], seed: u64, chunk: usize, trials: usize) -> Result<Tally> {
    let p = nm.profile();
    let mut rng = chunk_rng(seed, chunk as u64);
    let mut tally = Tally::default();
    let start = chunk * CHUNK_TRIALS;
    for i in start..(start + CHUNK_TRIALS).min(trials) {
        let s = BitString::random(p.output_len, &mut rng);
        let cw = match encode(nm, &s, &mut rng) {
            Ok(cw) => cw,
            Err(Error::EncodingFailure { .. }) => {
                tally.failures += 1;
                continue;
            }
            Err(e) => return Err(e),
        };
        let verdicts = tamper_apply(p.t, fams, &cw)?
            .iter()
            .map(|t: &Codeword| {
                if *t == cw {
                    Ok(TamperVerdict::Same)
                } else {
                    nmext2_t(nm, &t.x, &t.y).map(TamperVerdict::Message)
                }
            })
            .collect::<Result<Verdicts>>()?;
        let half = usize::from(i >= trials / 2);
        *tally.halves[half].entry(verdicts.clone()).or_default() += 1;
        *tally.by_message.entry(s).or_default().entry(verdicts).or_default() += 1;
    }
    Ok(tally)
}

/// The `t`-fold experiment: encode a fresh uniform message, tamper with
/// every family of `spec`, decode each result (or record SAME when the
/// codeword is unchanged) and compare against the simulator.
pub fn run_experiment_t(nm: &NmExt, spec: &TamperSpec, trials: usize, seed: u64) -> Result<ExperimentReport> {
    let p = nm.profile();
    if spec.arity() != p.t {
        return usage(format!(
            "family tuple has {} components, profile has t = {}",
            spec.arity(),
            p.t
        ));
    }
    if trials < MIN_TRIALS {
        return usage(format!("need at least {MIN_TRIALS} trials, got {trials}"));
    }
    if p.output_len > MAX_OUTPUT_BITS {
        return usage(format!(
            "output of {} bits exceeds the {MAX_OUTPUT_BITS}-bit experiment cap",
            p.output_len
        ));
    }
    let fams = spec.build(p.n)?;
    let t0 = Instant::now();
    let chunks = trials.div_ceil(CHUNK_TRIALS);
    let tallies = (0..chunks)
        .into_par_iter()
        .map(|c| run_chunk(nm, &fams, seed, c, trials))
        .collect::<Result<Vec<_>>>()?;
    let tally = tallies.into_iter().fold(Tally::default(), Tally::merge);

    if tally.failures as f64 > MAX_FAILURE_RATE * trials as f64 {
        return Err(Error::Aborted(format!(
            "{} of {trials} encodings hit the retry cap (limit {:.0}%)",
            tally.failures,
            100.0 * MAX_FAILURE_RATE
        )));
    }
    let completed = trials as u64 - tally.failures;
    if completed == 0 {
        return Err(Error::Aborted("no completed trials".into()));
    }
    let m = p.output_len;
    let all = |v: &[TamperVerdict]| v.to_vec();
    let joint = joint_stats(m, &tally.by_message, &all);
    let (split_l1, split_r, [da, db]) = split_half(&tally.halves, &all);

    let mut components = Vec::with_capacity(p.t);
    let names: Vec<String> = spec.to_string().split('+').map(str::to_string).collect();
    for i in 0..p.t {
        let pick = move |v: &[TamperVerdict]| vec![v[i].clone()];
        let js = joint_stats(m, &tally.by_message, &pick);
        let (sl1, sr, _) = split_half(&tally.halves, &pick);
        components.push(ComponentReport {
            index: i + 1,
            family: names[i].clone(),
            l1: js.l1,
            confidence_radius: confidence_radius(js.support, completed as usize),
            split_half_l1: sl1,
            split_half_radius: sr,
            d_f: labelled(&js.d_f),
        });
    }

    let per_message: Vec<MessageReport> = tally
        .by_message
        .iter()
        .map(|(s, row)| {
            let n: u64 = row.values().sum();
            let d = normalise(row);
            MessageReport {
                message: s.to_string(),
                trials: n,
                l1_to_d_f: l1_maps(&d, &joint.d_f),
                confidence_radius: confidence_radius(row.len(), n as usize),
            }
        })
        .collect();

    Ok(ExperimentReport {
        profile_id: p.hash_hex(),
        tamper: spec.to_string(),
        t: p.t,
        trials,
        seed,
        completed,
        encoder_failures: tally.failures,
        l1: joint.l1,
        statistical_distance: joint.l1 / 2.0,
        confidence_radius: confidence_radius(joint.support, completed as usize),
        joint_support: joint.support,
        split_half_l1: split_l1,
        split_half_radius: split_r,
        max_message_l1: per_message.iter().map(|r| r.l1_to_d_f).fold(0.0, f64::max),
        wall_time_ms: t0.elapsed().as_millis() as u64,
        d_f: labelled(&joint.d_f),
        d_f_first_half: labelled(&da),
        d_f_second_half: labelled(&db),
        components,
        per_message,
    })
}

/// Single tampering; the profile must have `t = 1`.
pub fn run_experiment(nm: &NmExt, spec: &TamperSpec, trials: usize, seed: u64) -> Result<ExperimentReport> {
    if spec.arity() != 1 {
        return usage("run_experiment takes a single family; use run_experiment_t for tuples");
    }
    run_experiment_t(nm, spec, trials, seed)
}
