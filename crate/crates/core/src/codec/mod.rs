//! The split-state code: decoding is the extractor, encoding samples a
//! preimage of the message by running the extractor backwards.

mod format;

use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};

pub use format::{read_codeword, write_codeword, MAGIC};

use crate::advice::rs_constrained_sample;
use crate::bits::BitString;
use crate::error::{usage, Error, Result};
use crate::extractors::{invert_ip, SeededExtSpec};
use crate::nmext::{nmext2_t, trace, NmExt, Transcript};

/// Attempts per drawn seed before an encoding is abandoned.
pub const RETRY_CAP: usize = 64;

#[derive(Clone, PartialEq, Eq, Hash, Debug, Serialize, Deserialize)]
pub struct Codeword {
    pub x: BitString,
    pub y: BitString,
}

pub type Message = BitString;

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug, Serialize, Deserialize)]
pub enum TamperVerdict {
    Same,
    Message(Message),
}

impl fmt::Display for TamperVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TamperVerdict::Same => f.write_str("same"),
            TamperVerdict::Message(m) => write!(f, "{m}"),
        }
    }
}

pub fn copy_fn(d: &TamperVerdict, s: &Message) -> Message {
    match d {
        TamperVerdict::Same => s.clone(),
        TamperVerdict::Message(m) => m.clone(),
    }
}

pub fn copy_t(ds: &[TamperVerdict], s: &Message) -> Vec<Message> {
    ds.iter().map(|d| copy_fn(d, s)).collect()
}

pub fn decode(nm: &NmExt, cw: &Codeword) -> Result<Message> {
    nmext2_t(nm, &cw.x, &cw.y)
}

/// What the backward sampler fixed in one round. Values the round leaves
/// undetermined (the unused half-chain) are `None`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RoundDraws {
    pub g: bool,
    pub z: BitString,
    pub a: BitString,
    pub zbar: BitString,
    pub abar: BitString,
    pub b: Option<BitString>,
    pub c: Option<BitString>,
    pub bbar: Option<BitString>,
    pub cbar: Option<BitString>,
    pub out: BitString,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Draws {
    pub g: BitString,
    pub z1: BitString,
    pub rounds: Vec<RoundDraws>,
    pub f: BitString,
}

impl Draws {
    /// Compares every drawn value with a forward transcript.
    pub fn mismatches(&self, t: &Transcript) -> Vec<String> {
        let mut bad = Vec::new();
        let mut eq = |what: String, a: &BitString, b: &BitString| {
            if a != b {
                bad.push(what);
            }
        };
        eq("g".into(), &self.g, &t.advice.g);
        eq("z1".into(), &self.z1, &t.z1);
        eq("f".into(), &self.f, &t.f);
        for (i, (d, r)) in self.rounds.iter().zip(&t.rounds).enumerate() {
            let i = i + 1;
            eq(format!("round {i} z"), &d.z, &r.z);
            eq(format!("round {i} a"), &d.a, &r.a);
            eq(format!("round {i} zbar"), &d.zbar, &r.zbar);
            eq(format!("round {i} abar"), &d.abar, &r.abar);
            eq(format!("round {i} out"), &d.out, &r.out);
            for (name, dv, rv) in [
                ("b", &d.b, &r.b),
                ("c", &d.c, &r.c),
                ("bbar", &d.bbar, &r.bbar),
                ("cbar", &d.cbar, &r.cbar),
            ] {
                if let Some(v) = dv {
                    eq(format!("round {i} {name}"), v, rv);
                }
            }
        }
        if self.rounds.len() != t.rounds.len() {
            bad.push("round count".into());
        }
        bad
    }
}

#[derive(Clone, Copy)]
enum Half {
    X,
    Y,
}

/// Codeword under construction with a write-once bitmap per half.
struct Builder {
    x: BitString,
    y: BitString,
    wx: BitString,
    wy: BitString,
}

impl Builder {
    fn new(n: usize) -> Self {
        Builder {
            x: BitString::zeros(n),
            y: BitString::zeros(n),
            wx: BitString::zeros(n),
            wy: BitString::zeros(n),
        }
    }

    fn put(&mut self, half: Half, offset: usize, bits: &BitString) {
        let (buf, seen) = match half {
            Half::X => (&mut self.x, &mut self.wx),
            Half::Y => (&mut self.y, &mut self.wy),
        };
        assert!(
            seen.slice(offset, bits.len()).is_zero(),
            "encoder wrote a position twice"
        );
        buf.splice(offset, bits);
        seen.splice(offset, &BitString::ones(bits.len()));
    }

    fn finish(self) -> Codeword {
        let n = self.x.len();
        assert_eq!(self.wx.count_ones(), n, "encoder left x positions unset");
        assert_eq!(self.wy.count_ones(), n, "encoder left y positions unset");
        Codeword { x: self.x, y: self.y }
    }
}

/// Draws a seed until `spec` can be inverted at `target` under it.
fn invert_with_redraw<R: Rng + ?Sized>(
    spec: &SeededExtSpec,
    target: &BitString,
    rng: &mut R,
    round: usize,
    role: &str,
) -> Result<(BitString, BitString)> {
    for _ in 0..RETRY_CAP {
        let seed = BitString::random(spec.seed_len(), rng);
        match spec.invert(&seed, target, rng) {
            Ok(x) => return Ok((seed, x)),
            Err(Error::Infeasible(_)) => continue,
            Err(e) => return Err(e),
        }
    }
    Err(Error::EncodingFailure {
        round,
        role: role.into(),
    })
}

struct RoundOut {
    x: [Option<BitString>; 4],
    y: [Option<BitString>; 4],
    draws: RoundDraws,
}

/// Samples `(Y^i, X^i, Z^i)` with `flip_flop(Y^i, X^i, Z^i, g) = out`,
/// filling only the blocks the selected chain reads.
fn backward_round<R: Rng + ?Sized>(
    nm: &NmExt,
    out: &BitString,
    g: bool,
    round: usize,
    rng: &mut R,
) -> Result<RoundOut> {
    let p = nm.profile();
    let (e1, e2, e3) = (&nm.ext1, &nm.ext2, &nm.ext3);
    let mut x: [Option<BitString>; 4] = Default::default();
    let mut y: [Option<BitString>; 4] = Default::default();
    let pad = |rng: &mut R| BitString::random(p.h - p.s, rng);
    let draws = if g {
        let (abar, x4) = invert_with_redraw(e3, out, rng, round, "ext3")?;
        let (zbar_s, y3) = invert_with_redraw(e1, &abar, rng, round, "ext1")?;
        let zbar = BitString::concat(&[&zbar_s, &pad(rng), &BitString::random(p.h, rng)]);
        let (b, x2) = invert_with_redraw(e3, &zbar, rng, round, "ext3")?;
        let (c, y2) = invert_with_redraw(e1, &b, rng, round, "ext1")?;
        let (a, z2) = invert_with_redraw(e2, &c, rng, round, "ext2")?;
        let (zs, y1) = invert_with_redraw(e1, &a, rng, round, "ext1")?;
        let z = BitString::concat(&[&zs, &pad(rng), &z2]);
        (x[3], y[2], x[1], y[1], y[0]) = (Some(x4), Some(y3), Some(x2), Some(y2), Some(y1));
        RoundDraws {
            g,
            z,
            a,
            zbar,
            abar,
            b: Some(b),
            c: Some(c),
            bbar: None,
            cbar: None,
            out: out.clone(),
        }
    } else {
        let (bbar, x3) = invert_with_redraw(e3, out, rng, round, "ext3")?;
        let (cbar, y4) = invert_with_redraw(e1, &bbar, rng, round, "ext1")?;
        let (abar, zbar2) = invert_with_redraw(e2, &cbar, rng, round, "ext2")?;
        let (zbar_s, y3) = invert_with_redraw(e1, &abar, rng, round, "ext1")?;
        let zbar = BitString::concat(&[&zbar_s, &pad(rng), &zbar2]);
        let (a, x1) = invert_with_redraw(e3, &zbar, rng, round, "ext3")?;
        let (zs, y1) = invert_with_redraw(e1, &a, rng, round, "ext1")?;
        let z = BitString::concat(&[&zs, &pad(rng), &BitString::random(p.h, rng)]);
        (x[2], y[3], y[2], x[0], y[0]) = (Some(x3), Some(y4), Some(y3), Some(x1), Some(y1));
        RoundDraws {
            g,
            z,
            a,
            zbar,
            abar,
            b: None,
            c: None,
            bbar: Some(bbar),
            cbar: Some(cbar),
            out: out.clone(),
        }
    };
    Ok(RoundOut { x, y, draws })
}

/// Uniform (up to the documented retry and base-case effects) preimage of `s`.
/// Every encoding is checked: the forward pass must return `s` and reproduce
/// every value the sampler drew.
pub fn encode<R: Rng + ?Sized>(nm: &NmExt, s: &Message, rng: &mut R) -> Result<Codeword> {
    Ok(encode_with_draws(nm, s, rng)?.0)
}

pub fn encode_with_draws<R: Rng + ?Sized>(nm: &NmExt, s: &Message, rng: &mut R) -> Result<(Codeword, Draws)> {
    let p = nm.profile();
    if s.len() != p.output_len {
        return usage(format!(
            "message has {} bits, profile outputs {}",
            s.len(),
            p.output_len
        ));
    }
    let l = nm.layout();
    let adv = &nm.advice;
    let mut cw = Builder::new(p.n);

    // Advice from its marginal: uniform heads, fingerprints of fresh tails.
    let head = 3 * p.n1;
    let (x1, y1) = (BitString::random(head, rng), BitString::random(head, rng));
    let (_, positions) = adv.positions(&x1, &y1)?;
    let fx = adv.fingerprint(&BitString::random(p.n2, rng), &positions)?;
    let fy = adv.fingerprint(&BitString::random(p.n2, rng), &positions)?;
    let g = BitString::concat(&[&x1, &fx, &y1, &fy]);
    cw.put(Half::X, 0, &x1);
    cw.put(Half::Y, 0, &y1);

    // Final extraction and the correlation breaker's last step.
    let (f, x_last) = invert_with_redraw(&nm.ext6, s, rng, p.a + 1, "ext6")?;
    let (mut z, y_last) = invert_with_redraw(&nm.ext4, &f, rng, p.a + 1, "ext4")?;
    cw.put(Half::X, l.last.offset(), &x_last);
    cw.put(Half::Y, l.last.offset(), &y_last);

    let mut rounds = Vec::with_capacity(p.a);
    for i in (1..=p.a).rev() {
        let r = backward_round(nm, &z, g.get(i - 1), i, rng)?;
        let off = l.rounds[i - 1].offset();
        for k in 0..4 {
            let xb = r.x[k].clone().unwrap_or_else(|| BitString::random(p.n_x, rng));
            let yb = r.y[k].clone().unwrap_or_else(|| BitString::random(p.n_y, rng));
            cw.put(Half::X, off + k * p.n_x, &xb);
            cw.put(Half::Y, off + k * p.n_y, &yb);
        }
        z = r.draws.z.clone();
        rounds.push(r.draws);
    }
    rounds.reverse();

    // Z^1 = IP2(X3, Y3) with X3 != 0.
    let x3 = loop {
        let v = BitString::random(p.n6, rng);
        if !v.is_zero() {
            break v;
        }
    };
    let y3 = invert_ip(&nm.ip2, &x3, &z, rng)?;
    cw.put(Half::X, l.ip2.offset(), &x3);
    cw.put(Half::Y, l.ip2.offset(), &y3);

    for (half, fp) in [(Half::X, &fx), (Half::Y, &fy)] {
        complete_tail(nm, &mut cw, half, fp, &positions, rng)?;
    }

    let cw = cw.finish();
    let draws = Draws { g, z1: z, rounds, f };
    let t = trace(nm, &cw.x, &cw.y)?;
    if t.s_out != *s {
        return Err(Error::Internal(format!(
            "codeword decodes to {} instead of {s}",
            t.s_out
        )));
    }
    let bad = draws.mismatches(&t);
    if !bad.is_empty() {
        return Err(Error::Internal(format!(
            "forward pass disagrees with draws: {}",
            bad.join(", ")
        )));
    }
    Ok((cw, draws))
}

/// Fills the spare blocks of one half so its RS fingerprint at `positions`
/// equals `fp`, keeping every already-written symbol.
fn complete_tail<R: Rng + ?Sized>(
    nm: &NmExt,
    cw: &mut Builder,
    half: Half,
    fp: &BitString,
    positions: &[usize],
    rng: &mut R,
) -> Result<()> {
    let p = nm.profile();
    let adv = &nm.advice;
    let field = &adv.rs.field;
    let lq = p.log_q as usize;
    let head = 3 * p.n1;
    let used = p.used_tail_bits();
    let pinned = p.pinned_symbols();
    // Spare bits sharing a symbol with the pinned region are drawn first.
    if pinned * lq > used {
        cw.put(half, head + used, &BitString::random(pinned * lq - used, rng));
    }
    let buf = match half {
        Half::X => &cw.x,
        Half::Y => &cw.y,
    };
    let pinned_bits = buf.slice(head, pinned * lq);
    let fixed_vals: Vec<u64> = (0..pinned).map(|j| field.symbol(&pinned_bits, j)).collect();
    let fixed: Vec<usize> = (1..=pinned).collect();
    let targets: Vec<u64> = (0..positions.len()).map(|j| field.symbol(fp, j)).collect();
    let msg = rs_constrained_sample(&adv.rs, p.t1, positions, &targets, &fixed, &fixed_vals, rng)?;
    let free = field.to_bits(&msg[pinned..]);
    cw.put(half, head + pinned * lq, &free);
    let coded = adv.coded_len();
    if coded < p.n2 {
        cw.put(half, head + coded, &BitString::random(p.n2 - coded, rng));
    }
    let buf = match half {
        Half::X => &cw.x,
        Half::Y => &cw.y,
    };
    if adv.fingerprint(&buf.slice(head, p.n2), positions)? != *fp {
        return Err(Error::Internal("completed tail misses its fingerprint".into()));
    }
    Ok(())
}
