//! Helpers shared by the pipeline tests and the acceptance target.
#![allow(dead_code)]

use nmc::nmext::{adv_cb_rounds, flip_flop, NmExt};
use nmc::BitString;
use rand::Rng;

/// Which inputs of one flip-flop can influence its output.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Deps {
    pub x: [bool; 4],
    pub y: [bool; 4],
    /// Per bit of `Z`.
    pub z: Vec<bool>,
}

/// Dependence sets read off the round's definition: the g = 1 path reads
/// `Y1 Y2 X2 Y3 X4` and all of `Z` except the pad between `s` and `h`; the
/// g = 0 path reads `Y1 X1 Y3 Y4 X3` and only the seed prefix of `Z`.
pub fn expected_deps(nm: &NmExt, g: bool) -> Deps {
    let p = nm.profile();
    let z = (0..2 * p.h).map(|i| i < p.s || (g && i >= p.h)).collect();
    if g {
        Deps {
            x: [false, true, false, true],
            y: [true, true, true, false],
            z,
        }
    } else {
        Deps {
            x: [true, false, true, false],
            y: [true, false, true, true],
            z,
        }
    }
}

fn flip(v: &BitString, i: usize) -> BitString {
    let mut w = v.clone();
    w.set(i, !v.get(i));
    w
}

/// Toggles every bit of every block of one round, on `samples` random inputs,
/// and records which toggles ever moved the output.
pub fn observed_deps<R: Rng>(nm: &NmExt, g: bool, samples: usize, rng: &mut R) -> Deps {
    let p = nm.profile();
    let mut d = Deps {
        x: [false; 4],
        y: [false; 4],
        z: vec![false; 2 * p.h],
    };
    for _ in 0..samples {
        let y = BitString::random(4 * p.n_y, rng);
        let x = BitString::random(4 * p.n_x, rng);
        let z = BitString::random(2 * p.h, rng);
        let out = flip_flop(nm, &y, &x, &z, g).unwrap();
        for i in 0..4 * p.n_x {
            if flip_flop(nm, &y, &flip(&x, i), &z, g).unwrap() != out {
                d.x[i / p.n_x] = true;
            }
        }
        for i in 0..4 * p.n_y {
            if flip_flop(nm, &flip(&y, i), &x, &z, g).unwrap() != out {
                d.y[i / p.n_y] = true;
            }
        }
        for i in 0..2 * p.h {
            if flip_flop(nm, &y, &x, &flip(&z, i), g).unwrap() != out {
                d.z[i] = true;
            }
        }
    }
    d
}

/// Outcome of toggling bits of round `round`'s blocks (1-indexed) inside
/// the correlation breaker with `g` held fixed.
#[derive(Debug, Default)]
pub struct Isolation {
    /// Toggles that changed some `Z^j` with `j <= round`.
    pub earlier_changed: usize,
    /// Toggles that changed the round's own output `Z^{round+1}`.
    pub own_changed: usize,
    pub toggles: usize,
}

pub fn round_isolation<R: Rng>(nm: &NmExt, round: usize, samples: usize, rng: &mut R) -> Isolation {
    let p = nm.profile();
    let (bx, by) = (4 * p.n_x, 4 * p.n_y);
    let mut iso = Isolation::default();
    for _ in 0..samples {
        let x4 = BitString::random(p.n7, rng);
        let y4 = BitString::random(p.n7, rng);
        let z1 = BitString::random(2 * p.h, rng);
        let g = BitString::random(p.a, rng);
        let (_, base) = adv_cb_rounds(nm, &y4, &x4, &z1, &g, p.a).unwrap();
        let toggles = (0..bx)
            .map(|i| (true, (round - 1) * bx + i))
            .chain((0..by).map(|i| (false, (round - 1) * by + i)));
        for (on_x, pos) in toggles {
            let (x2, y2) = if on_x {
                (flip(&x4, pos), y4.clone())
            } else {
                (x4.clone(), flip(&y4, pos))
            };
            let (_, recs) = adv_cb_rounds(nm, &y2, &x2, &z1, &g, p.a).unwrap();
            iso.toggles += 1;
            // recs[j].z is Z^{j+1}; recs[j].out is Z^{j+2}.
            if (0..round).any(|j| recs[j].z != base[j].z) {
                iso.earlier_changed += 1;
            }
            if recs[round - 1].out != base[round - 1].out {
                iso.own_changed += 1;
            }
        }
    }
    iso
}

/// Toggles of blocks `a+2 .. 3a` (and the X block `a+1`, read only by
/// Ext6 outside the breaker) that changed `F`.
pub fn spare_block_changes<R: Rng>(nm: &NmExt, samples: usize, rng: &mut R) -> (usize, usize) {
    let p = nm.profile();
    let blk = 4 * p.n_x;
    let (mut changed, mut total) = (0, 0);
    for _ in 0..samples {
        let x4 = BitString::random(p.n7, rng);
        let y4 = BitString::random(p.n7, rng);
        let z1 = BitString::random(2 * p.h, rng);
        let g = BitString::random(p.a, rng);
        let (f, _) = adv_cb_rounds(nm, &y4, &x4, &z1, &g, p.a).unwrap();
        let spare_start = (p.a + 1) * blk;
        let xs = (p.a * blk..p.n7).map(|i| (true, i));
        let ys = (spare_start..p.n7).map(|i| (false, i));
        for (on_x, pos) in xs.chain(ys) {
            let (x2, y2) = if on_x {
                (flip(&x4, pos), y4.clone())
            } else {
                (x4.clone(), flip(&y4, pos))
            };
            total += 1;
            if adv_cb_rounds(nm, &y2, &x2, &z1, &g, p.a).unwrap().0 != f {
                changed += 1;
            }
        }
    }
    (changed, total)
}
