use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::extractors::{Construction, SeededExtSpec};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// Small integers chosen by hand; only structural identities are enforced.
    Toy,
    /// Every field follows from `(n, delta1, delta2, delta3, t)`.
    Asymptotic,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Deltas {
    pub delta1: f64,
    pub delta2: f64,
    pub delta3: f64,
}

/// Optional per-role construction overrides.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoleConstructions {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ext1: Option<Construction>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ext2: Option<Construction>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ext3: Option<Construction>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ext4: Option<Construction>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ext6: Option<Construction>,
}

fn default_construction() -> Construction {
    Construction::ModifiedToeplitz
}

/// Every size in the construction. `log_q` is the Reed-Solomon symbol size;
/// `rs_len` the code length (Samp range); `t1` the number of sampled
/// positions.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParamProfile {
    pub mode: Mode,
    pub t: usize,
    pub n: usize,
    pub n1: usize,
    pub n2: usize,
    pub n3: usize,
    pub n4: usize,
    pub n5: usize,
    pub n6: usize,
    pub n7: usize,
    pub n_x: usize,
    pub n_y: usize,
    pub a: usize,
    pub s: usize,
    pub b: usize,
    pub h: usize,
    pub log_q: u32,
    pub rs_len: usize,
    pub t1: usize,
    pub output_len: usize,
    #[serde(default = "default_construction")]
    pub construction: Construction,
    #[serde(default)]
    pub roles: RoleConstructions,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub deltas: Option<Deltas>,
}

/// Free choices for a toy profile; everything else follows.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ToyParams {
    pub t: usize,
    pub n1: usize,
    pub n3: usize,
    pub n6: usize,
    pub n_x: usize,
    pub s: usize,
    pub b: usize,
    pub h: usize,
    pub log_q: u32,
    pub rs_len: usize,
    pub t1: usize,
    pub construction: Construction,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Role {
    Ext1,
    Ext2,
    Ext3,
    Ext4,
    Ext6,
}

impl Role {
    pub const ALL: [Role; 5] = [Role::Ext1, Role::Ext2, Role::Ext3, Role::Ext4, Role::Ext6];

    pub fn name(self) -> &'static str {
        match self {
            Role::Ext1 => "ext1",
            Role::Ext2 => "ext2",
            Role::Ext3 => "ext3",
            Role::Ext4 => "ext4",
            Role::Ext6 => "ext6",
        }
    }
}

fn ceil_log2(v: usize) -> usize {
    if v <= 1 {
        0
    } else {
        (usize::BITS - (v - 1).leading_zeros()) as usize
    }
}

impl ParamProfile {
    pub fn toy(p: &ToyParams) -> Result<Self> {
        let a = 6 * p.n1 + 2 * p.t1 * p.log_q as usize;
        let n7 = 12 * a * p.n_x;
        let n = 3 * p.n1 + p.n6 + n7;
        let n2 = n - 3 * p.n1;
        let prof = ParamProfile {
            mode: Mode::Toy,
            t: p.t,
            n,
            n1: p.n1,
            n2,
            n3: p.n3,
            n4: if p.log_q == 0 { 0 } else { n2 / p.log_q as usize },
            n5: p.t1,
            n6: p.n6,
            n7,
            n_x: p.n_x,
            n_y: p.n_x,
            a,
            s: p.s,
            b: p.b,
            h: p.h,
            log_q: p.log_q,
            rs_len: p.rs_len,
            t1: p.t1,
            output_len: if p.t == 0 { 0 } else { p.n_x / (4 * p.t) },
            construction: p.construction,
            roles: RoleConstructions::default(),
            deltas: None,
        };
        prof.validate()?;
        Ok(prof)
    }

    /// The repository's canonical toy profile (t = 1).
    pub fn canonical_toy() -> Self {
        Self::from_toml(include_str!("../../profiles/toy.toml")).expect("shipped profile is valid")
    }

    /// Canonical toy profile with multiplicity t = 2.
    pub fn canonical_toy_t2() -> Self {
        Self::from_toml(include_str!("../../profiles/toy_t2.toml")).expect("shipped profile is valid")
    }

    /// A smaller profile (2-bit messages) for exhaustive and Monte Carlo checks.
    pub fn micro() -> Self {
        Self::from_toml(include_str!("../../profiles/micro.toml")).expect("shipped profile is valid")
    }

    pub fn from_toml(s: &str) -> Result<Self> {
        let p: ParamProfile = toml::from_str(s).map_err(|e| Error::Format(e.to_string()))?;
        p.validate()?;
        Ok(p)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("profile serializes")
    }

    /// SHA-256 of the canonical serialization.
    pub fn hash(&self) -> [u8; 32] {
        Sha256::digest(self.to_toml().as_bytes()).into()
    }

    pub fn hash_hex(&self) -> String {
        self.hash().iter().fold(String::new(), |mut s, b| {
            let _ = write!(s, "{b:02x}");
            s
        })
    }

    pub fn f_len(&self) -> usize {
        self.n_y / (8 * self.t.max(1))
    }

    pub fn construction_for(&self, role: Role) -> Construction {
        let o = match role {
            Role::Ext1 => self.roles.ext1,
            Role::Ext2 => self.roles.ext2,
            Role::Ext3 => self.roles.ext3,
            Role::Ext4 => self.roles.ext4,
            Role::Ext6 => self.roles.ext6,
        };
        o.unwrap_or(self.construction)
    }

    /// `(source, seed, output)` bits for each role.
    pub fn shape(&self, role: Role) -> (usize, usize, usize) {
        match role {
            Role::Ext1 => (self.n_y, self.s, self.b),
            Role::Ext2 => (self.h, self.b, self.s),
            Role::Ext3 => (self.n_x, self.b, 2 * self.h),
            Role::Ext4 => (4 * self.n_y, 2 * self.h, self.f_len()),
            Role::Ext6 => (4 * self.n_x, self.f_len(), self.output_len),
        }
    }

    pub fn role_spec(&self, role: Role) -> Result<SeededExtSpec> {
        let (n, d, m) = self.shape(role);
        SeededExtSpec::new(self.construction_for(role), n, d, m)
            .map_err(|e| Error::InvalidProfile(vec![format!("{}: {e}", role.name())]))
    }

    /// Bits of `X2` pinned by the backward chain: IP2 block plus rounds 1..a+1.
    pub fn used_tail_bits(&self) -> usize {
        self.n6 + 4 * self.n_x * (self.a + 1)
    }

    /// RS symbols overlapping the pinned region.
    pub fn pinned_symbols(&self) -> usize {
        self.used_tail_bits().div_ceil(self.log_q.max(1) as usize)
    }

    /// Every violated identity, empty when the profile is consistent.
    pub fn violations(&self) -> Vec<String> {
        let mut v = Vec::new();
        let p = self;
        let mut need = |ok: bool, msg: String| {
            if !ok {
                v.push(msg);
            }
        };
        for (name, val) in [
            ("n1", p.n1),
            ("n3", p.n3),
            ("n6", p.n6),
            ("n_x", p.n_x),
            ("n_y", p.n_y),
            ("s", p.s),
            ("b", p.b),
            ("h", p.h),
            ("t", p.t),
            ("t1", p.t1),
            ("rs_len", p.rs_len),
        ] {
            need(val > 0, format!("{name} must be positive"));
        }
        if !v.is_empty() {
            return v;
        }
        let mut need = |ok: bool, msg: String| {
            if !ok {
                v.push(msg);
            }
        };
        let lq = p.log_q as usize;
        need(
            p.log_q >= 1 && p.log_q <= 32,
            format!("log q = {} outside 1..=32", p.log_q),
        );
        let sum = 3 * p.n1 + p.n6 + p.n7;
        need(p.n == sum, format!("n = 3*n1 + n6 + n7 ({} != {sum})", p.n));
        need(
            p.n2 + 3 * p.n1 == p.n,
            format!("n2 = n - 3*n1 ({} != {})", p.n2, p.n.saturating_sub(3 * p.n1)),
        );
        need(
            p.n7 == 12 * p.a * p.n_x,
            format!("n7 = 12*a*n_x ({} != {})", p.n7, 12 * p.a * p.n_x),
        );
        need(p.n_x == p.n_y, format!("n_x = n_y ({} != {})", p.n_x, p.n_y));
        let a = 6 * p.n1 + 2 * p.t1 * lq;
        need(p.a == a, format!("a = 6*n1 + 2*t1*log q ({} != {a})", p.a));
        need(p.t1 == p.n5, format!("t1 = n5 ({} != {})", p.t1, p.n5));
        if lq > 0 {
            need(
                p.n4 == p.n2 / lq,
                format!("n4 = floor(n2 / log q) ({} != {})", p.n4, p.n2 / lq),
            );
        }
        need(
            (3 * p.n1) % p.n3 == 0,
            format!("n3 divides 3*n1 (3*n1={}, n3={})", 3 * p.n1, p.n3),
        );
        need(
            p.n6 % (2 * p.h) == 0,
            format!("2h divides n6 (n6={}, 2h={})", p.n6, 2 * p.h),
        );
        need(
            p.s <= p.h,
            format!("s <= h for Ext2 and the Z prefix (s={}, h={})", p.s, p.h),
        );
        need(p.b <= p.n_y, format!("b <= n_y for Ext1 (b={}, n_y={})", p.b, p.n_y));
        need(
            2 * p.h <= p.n_x,
            format!("2h <= n_x for Ext3 (2h={}, n_x={})", 2 * p.h, p.n_x),
        );
        need(p.f_len() >= 1, format!("n_y/(8t) >= 1 (n_y={}, t={})", p.n_y, p.t));
        need(
            p.output_len == p.n_x / (4 * p.t),
            format!("output_len = n_x/(4t) ({} != {})", p.output_len, p.n_x / (4 * p.t)),
        );
        need(p.output_len >= 1, "n_x/(4t) >= 1".into());
        need(p.rs_len >= p.n4, format!("rs_len >= n4 ({} < {})", p.rs_len, p.n4));
        if lq <= 32 {
            let q1 = (1u64 << lq) - 1;
            need(p.rs_len as u64 <= q1, format!("rs_len <= q - 1 ({} > {q1})", p.rs_len));
        }
        let read = p.t1 * ceil_log2(p.rs_len);
        need(
            read <= p.n3,
            format!("Samp reads t1*ceil(log2 rs_len) <= n3 bits ({read} > {})", p.n3),
        );
        if lq > 0 {
            let pinned = p.pinned_symbols();
            need(
                pinned + p.t1 <= p.n4,
                format!("pinned symbols + t1 <= n4 ({pinned} + {} > {})", p.t1, p.n4),
            );
        }
        if p.mode == Mode::Asymptotic {
            need(
                p.h == 10 * p.t * p.s,
                format!("h = 10*t*s ({} != {})", p.h, 10 * p.t * p.s),
            );
            need(
                p.n6 == 3 * p.n1.pow(3),
                format!("n6 = 3*n1^3 ({} != {})", p.n6, 3 * p.n1.pow(3)),
            );
            need(
                p.n3 == p.n1 / 10,
                format!("n3 = floor(n1/10) ({} != {})", p.n3, p.n1 / 10),
            );
        }
        if !v.is_empty() {
            return v;
        }
        // Executable limits.
        for (what, k) in [("IP1 field n3", p.n3), ("IP2 field 2h", 2 * p.h)] {
            if k > 32 {
                v.push(format!("{what} = {k} bits exceeds the 32-bit field limit"));
            }
        }
        for role in Role::ALL {
            if let Err(Error::InvalidProfile(e)) = p.role_spec(role) {
                v.extend(e);
            }
        }
        v
    }

    pub fn validate(&self) -> Result<()> {
        let v = self.violations();
        if v.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidProfile(v))
        }
    }
}

/// `floor(n1 / 10)`.
pub fn n3_from_n1(n1: usize) -> usize {
    n1 / 10
}

fn floor_pow(n: f64, e: f64) -> usize {
    (n.powf(e) + 1e-9).floor() as usize
}

/// Profile from the asymptotic formulas, floors everywhere, all hidden
/// constants set to 1. The result is returned even when it violates an
/// identity; call [`ParamProfile::validate`] (or use [`derive_params`]).
pub fn derive_asymptotic(n: usize, d: Deltas, t: usize) -> Result<ParamProfile> {
    if !(d.delta1 > 0.0 && d.delta1 < d.delta2 && d.delta3 > 0.0) {
        return Err(Error::Usage("need 0 < delta1 < delta2 and delta3 > 0".into()));
    }
    if t == 0 {
        return Err(Error::Usage("t must be positive".into()));
    }
    let nf = n as f64;
    if (t as f64) > nf.powf(d.delta3) + 1e-9 {
        return Err(Error::Usage(format!("t = {t} exceeds n^delta3")));
    }
    let n1 = floor_pow(nf, d.delta2);
    let lq = ceil_log2(n + 1);
    let n3 = n3_from_n1(n1);
    let n5 = floor_pow(nf, d.delta2 / 3.0);
    let a = 6 * n1 + 2 * n5 * lq;
    let n6 = 3usize.checked_mul(n1.checked_pow(3).ok_or_else(|| Error::Usage("n1^3 overflows".into()))?);
    let n6 = n6.ok_or_else(|| Error::Usage("n6 overflows".into()))?;
    let rest = n.checked_sub(3 * n1 + n6).filter(|&r| r > 0).ok_or_else(|| {
        Error::Usage(format!(
            "n = {n} leaves no room for n7 after 3*n1 + n6 = {}",
            3 * n1 + n6
        ))
    })?;
    let n_x = rest / (12 * a);
    let n7 = 12 * a * n_x;
    let n_eff = 3 * n1 + n6 + n7;
    let n2 = n_eff - 3 * n1;
    let log_inv_eps = nf.powf(d.delta1);
    let log_inv_eps_p = 2.0 * (log_inv_eps + a as f64);
    let l = nf.log2() + log_inv_eps_p;
    let s = (l * l * nf.log2()).ceil() as usize;
    Ok(ParamProfile {
        mode: Mode::Asymptotic,
        t,
        n: n_eff,
        n1,
        n2,
        n3,
        n4: n2 / lq.max(1),
        n5,
        n6,
        n7,
        n_x,
        n_y: n_x,
        a,
        s,
        b: s,
        h: 10 * t * s,
        log_q: lq as u32,
        rs_len: n_eff,
        t1: n5,
        output_len: n_x / (4 * t),
        construction: Construction::ModifiedToeplitz,
        roles: RoleConstructions::default(),
        deltas: Some(d),
    })
}

/// Derived and validated profile. Toy mode takes explicit integers through
/// [`ParamProfile::toy`]; this entry point is the asymptotic one.
pub fn derive_params(n: usize, d: Deltas, t: usize) -> Result<ParamProfile> {
    let p = derive_asymptotic(n, d, t)?;
    p.validate()?;
    Ok(p)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_profile_is_consistent() {
        let p = ParamProfile::canonical_toy();
        assert_eq!(p.violations(), Vec::<String>::new());
        assert_eq!(p.output_len, p.n_x / 4);
        let p2 = ParamProfile::canonical_toy_t2();
        assert_eq!(p2.t, 2);
        assert_eq!(p2.output_len, p2.n_x / 8);
    }

    #[test]
    fn n3_is_a_tenth_of_n1() {
        assert_eq!(n3_from_n1(100), 10);
        let d = Deltas {
            delta1: 0.1,
            delta2: 1.0 / 3.0,
            delta3: 0.1,
        };
        // n = 10^6 gives n1 = 100 but n6 = 3*10^6 > n: no room.
        assert!(derive_asymptotic(1_000_000, d, 1).is_err());
    }

    #[test]
    fn t1_collapses_h_to_ten_s() {
        let d = Deltas {
            delta1: 0.05,
            delta2: 0.1,
            delta3: 0.1,
        };
        let p = derive_asymptotic(1usize << 60, d, 1).unwrap();
        assert_eq!(p.h, 10 * p.s);
        assert_eq!(p.n3, p.n1 / 10);
        assert_eq!(p.n7, 12 * p.a * p.n_x);
        let p2 = derive_asymptotic(1usize << 60, d, 2).unwrap();
        assert_eq!(p2.h, 20 * p2.s);
    }

    #[test]
    fn broken_identity_is_named() {
        let mut p = ParamProfile::canonical_toy();
        p.n7 += 1;
        let v = p.violations();
        assert!(v.iter().any(|m| m.starts_with("n7 = 12*a*n_x")), "{v:?}");
        assert!(v.iter().any(|m| m.starts_with("n = 3*n1 + n6 + n7")), "{v:?}");
        assert!(matches!(p.validate(), Err(Error::InvalidProfile(_))));
    }

    #[test]
    fn toml_round_trip_and_hash() {
        let p = ParamProfile::canonical_toy();
        let back = ParamProfile::from_toml(&p.to_toml()).unwrap();
        assert_eq!(back, p);
        assert_eq!(back.hash(), p.hash());
        let mut q = p.clone();
        q.construction = Construction::Toeplitz;
        assert_ne!(q.hash(), p.hash());
    }
}
