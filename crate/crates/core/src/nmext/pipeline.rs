use serde::{Deserialize, Serialize};

use super::params::{ParamProfile, Role};
use crate::advice::{advice_gen, Advice, AdviceSpec, RsSpec, SampSpec};
use crate::bits::BitString;
use crate::error::{usage, Result};
use crate::extractors::{ip_extract, IpSpec, SeededExtSpec};
use crate::fields::FieldSpec;

/// A profile with every role's extractor built.
#[derive(Clone, Debug)]
pub struct NmExt {
    profile: ParamProfile,
    pub ext1: SeededExtSpec,
    pub ext2: SeededExtSpec,
    pub ext3: SeededExtSpec,
    pub ext4: SeededExtSpec,
    pub ext6: SeededExtSpec,
    pub ip2: IpSpec,
    pub advice: AdviceSpec,
    layout: BlockMap,
}

/// 1-indexed inclusive range of codeword positions.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Interval {
    pub start: usize,
    pub end: usize,
}

impl Interval {
    fn at(offset0: usize, len: usize) -> Self {
        Interval {
            start: offset0 + 1,
            end: offset0 + len,
        }
    }

    pub fn len(&self) -> usize {
        self.end + 1 - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.end < self.start
    }

    pub fn offset(&self) -> usize {
        self.start - 1
    }

    pub fn crop(&self, x: &BitString) -> BitString {
        x.slice(self.offset(), self.len())
    }
}

/// Where each stage reads. The same positions apply to both halves since
/// `n_x = n_y`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockMap {
    pub head: Interval,
    pub ip2: Interval,
    /// Blocks `X^1 .. X^a`.
    pub rounds: Vec<Interval>,
    /// Block `X^{a+1}`, the source of Ext4 / Ext6.
    pub last: Interval,
    /// Blocks `a+2 .. 3a`: cropped, never read.
    pub spare: Vec<Interval>,
}

/// Every value computed inside one flip-flop.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoundRecord {
    pub g: bool,
    pub z: BitString,
    pub a: BitString,
    pub c: BitString,
    pub b: BitString,
    pub zbar: BitString,
    pub abar: BitString,
    pub cbar: BitString,
    pub bbar: BitString,
    pub out: BitString,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Transcript {
    pub advice: Advice,
    /// `Z^1 = IP2(X3, Y3)`.
    pub z1: BitString,
    pub rounds: Vec<RoundRecord>,
    pub f: BitString,
    pub s_out: BitString,
    pub blocks: BlockMap,
    pub spare_x: Vec<BitString>,
    pub spare_y: Vec<BitString>,
}

impl Transcript {
    /// `Z^i` for `i` in `1..=a+1`.
    pub fn z(&self, i: usize) -> &BitString {
        if i == 1 {
            &self.z1
        } else {
            &self.rounds[i - 2].out
        }
    }
}

impl NmExt {
    pub fn new(profile: &ParamProfile) -> Result<Self> {
        profile.validate()?;
        let p = profile;
        let ip1 = IpSpec::new(p.n3 as u32, 3 * p.n1 / p.n3)?;
        let rs = RsSpec::new(FieldSpec::new(p.log_q)?, p.n4, p.rs_len)?;
        let samp = SampSpec::new(p.n3, p.rs_len, p.t1)?;
        let base = 3 * p.n1 + p.n6;
        let blk = 4 * p.n_x;
        let layout = BlockMap {
            head: Interval::at(0, 3 * p.n1),
            ip2: Interval::at(3 * p.n1, p.n6),
            rounds: (0..p.a).map(|i| Interval::at(base + i * blk, blk)).collect(),
            last: Interval::at(base + p.a * blk, blk),
            spare: (p.a + 1..3 * p.a).map(|i| Interval::at(base + i * blk, blk)).collect(),
        };
        Ok(NmExt {
            profile: p.clone(),
            ext1: p.role_spec(Role::Ext1)?,
            ext2: p.role_spec(Role::Ext2)?,
            ext3: p.role_spec(Role::Ext3)?,
            ext4: p.role_spec(Role::Ext4)?,
            ext6: p.role_spec(Role::Ext6)?,
            ip2: IpSpec::new(2 * p.h as u32, p.n6 / (2 * p.h))?,
            advice: AdviceSpec {
                total_len: p.n,
                head_len: 3 * p.n1,
                ip: ip1,
                rs,
                samp,
            },
            layout,
        })
    }

    pub fn profile(&self) -> &ParamProfile {
        &self.profile
    }

    pub fn layout(&self) -> &BlockMap {
        &self.layout
    }

    pub fn spec(&self, role: Role) -> &SeededExtSpec {
        match role {
            Role::Ext1 => &self.ext1,
            Role::Ext2 => &self.ext2,
            Role::Ext3 => &self.ext3,
            Role::Ext4 => &self.ext4,
            Role::Ext6 => &self.ext6,
        }
    }
}

/// One flip-flop round with every intermediate value.
pub fn flip_flop_record(
    nm: &NmExt,
    y_i: &BitString,
    x_i: &BitString,
    z_i: &BitString,
    g_i: bool,
) -> Result<RoundRecord> {
    let p = &nm.profile;
    if y_i.len() != 4 * p.n_y || x_i.len() != 4 * p.n_x || z_i.len() != 2 * p.h {
        return usage(format!(
            "flip-flop expects ({}, {}, {}) bits, got ({}, {}, {})",
            4 * p.n_y,
            4 * p.n_x,
            2 * p.h,
            y_i.len(),
            x_i.len(),
            z_i.len()
        ));
    }
    let yb = |k: usize| y_i.slice(k * p.n_y, p.n_y);
    let xb = |k: usize| x_i.slice(k * p.n_x, p.n_x);
    let (e1, e2, e3) = (&nm.ext1, &nm.ext2, &nm.ext3);

    let zs = z_i.slice(0, p.s);
    let z2 = z_i.slice(p.h, p.h);
    let a = e1.extract(&yb(0), &zs)?;
    let c = e2.extract(&z2, &a)?;
    let b = e1.extract(&yb(1), &c)?;
    let zbar = if g_i {
        e3.extract(&xb(1), &b)?
    } else {
        e3.extract(&xb(0), &a)?
    };

    let zbar_s = zbar.slice(0, p.s);
    let zbar2 = zbar.slice(p.h, p.h);
    let abar = e1.extract(&yb(2), &zbar_s)?;
    let cbar = e2.extract(&zbar2, &abar)?;
    let bbar = e1.extract(&yb(3), &cbar)?;
    let out = if g_i {
        e3.extract(&xb(3), &abar)?
    } else {
        e3.extract(&xb(2), &bbar)?
    };
    Ok(RoundRecord {
        g: g_i,
        z: z_i.clone(),
        a,
        c,
        b,
        zbar,
        abar,
        cbar,
        bbar,
        out,
    })
}

pub fn flip_flop(nm: &NmExt, y_i: &BitString, x_i: &BitString, z_i: &BitString, g_i: bool) -> Result<BitString> {
    Ok(flip_flop_record(nm, y_i, x_i, z_i, g_i)?.out)
}

/// Correlation breaker over the first `rounds` bits of `g`, then Ext4 on the
/// next block. [`adv_cb`] uses `rounds = a`.
pub fn adv_cb_rounds(
    nm: &NmExt,
    y4: &BitString,
    x4: &BitString,
    z1: &BitString,
    g: &BitString,
    rounds: usize,
) -> Result<(BitString, Vec<RoundRecord>)> {
    let p = &nm.profile;
    if y4.len() != p.n7 || x4.len() != p.n7 {
        return usage(format!("correlation breaker expects {}-bit blocks", p.n7));
    }
    if g.len() < rounds || rounds > 3 * p.a - 1 {
        return usage(format!("{rounds} rounds with {}-bit advice", g.len()));
    }
    let (by, bx) = (4 * p.n_y, 4 * p.n_x);
    let mut z = z1.clone();
    let mut recs = Vec::with_capacity(rounds);
    for i in 0..rounds {
        let r = flip_flop_record(nm, &y4.slice(i * by, by), &x4.slice(i * bx, bx), &z, g.get(i))?;
        z = r.out.clone();
        recs.push(r);
    }
    let f = nm.ext4.extract(&y4.slice(rounds * by, by), &z)?;
    Ok((f, recs))
}

pub fn adv_cb(nm: &NmExt, y4: &BitString, x4: &BitString, z1: &BitString, g: &BitString) -> Result<BitString> {
    let a = nm.profile.a;
    if g.len() < a {
        return usage(format!("advice has {} bits, need at least a = {a}", g.len()));
    }
    Ok(adv_cb_rounds(nm, y4, x4, z1, g, a)?.0)
}

pub fn trace(nm: &NmExt, x: &BitString, y: &BitString) -> Result<Transcript> {
    let p = &nm.profile;
    if x.len() != p.n || y.len() != p.n {
        return usage(format!(
            "codeword halves must be {} bits, got {} and {}",
            p.n,
            x.len(),
            y.len()
        ));
    }
    let advice = advice_gen(&nm.advice, x, y)?;
    let l = &nm.layout;
    let z1 = ip_extract(&nm.ip2, &l.ip2.crop(x), &l.ip2.crop(y))?;
    let tail4 = 3 * p.n1 + p.n6;
    let (x4, y4) = (x.slice(tail4, p.n7), y.slice(tail4, p.n7));
    let (f, rounds) = adv_cb_rounds(nm, &y4, &x4, &z1, &advice.g, p.a)?;
    let s_out = nm.ext6.extract(&l.last.crop(x), &f)?;
    Ok(Transcript {
        advice,
        z1,
        rounds,
        f,
        s_out,
        blocks: l.clone(),
        spare_x: l.spare.iter().map(|iv| iv.crop(x)).collect(),
        spare_y: l.spare.iter().map(|iv| iv.crop(y)).collect(),
    })
}

/// The t = 1 extractor. Profiles with `t != 1` must go through [`nmext2_t`].
pub fn nmext2(nm: &NmExt, x: &BitString, y: &BitString) -> Result<BitString> {
    if nm.profile.t != 1 {
        return usage(format!("profile has t = {}; use nmext2_t", nm.profile.t));
    }
    nmext2_t(nm, x, y)
}

pub fn nmext2_t(nm: &NmExt, x: &BitString, y: &BitString) -> Result<BitString> {
    Ok(trace(nm, x, y)?.s_out)
}
