mod common;

use nmc::extractors::{ip_extract, seeded_extract};
use nmc::nmext::{adv_cb, adv_cb_rounds, flip_flop, flip_flop_record, nmext2, nmext2_t, trace, NmExt, ParamProfile};
use nmc::stats::max_sigma_deviation;
use nmc::{BitString, Error};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn micro() -> NmExt {
    NmExt::new(&ParamProfile::micro()).unwrap()
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

// Straight from the round's definition, with 1-indexed crops.
fn flip_flop_oracle(nm: &NmExt, y: &BitString, x: &BitString, z: &BitString, g: bool) -> BitString {
    let p = nm.profile();
    let yb = |k: usize| y.crop(k * p.n_y + 1, (k + 1) * p.n_y).unwrap();
    let xb = |k: usize| x.crop(k * p.n_x + 1, (k + 1) * p.n_x).unwrap();
    let ext = |e, src: &BitString, seed: &BitString| seeded_extract(e, src, seed).unwrap();
    let zs = z.prefix(p.s).unwrap();
    let z2 = z.crop(p.h + 1, 2 * p.h).unwrap();
    let a = ext(&nm.ext1, &yb(0), &zs);
    let c = ext(&nm.ext2, &z2, &a);
    let b = ext(&nm.ext1, &yb(1), &c);
    let zbar = if g {
        ext(&nm.ext3, &xb(1), &b)
    } else {
        ext(&nm.ext3, &xb(0), &a)
    };
    let abar = ext(&nm.ext1, &yb(2), &zbar.prefix(p.s).unwrap());
    let cbar = ext(&nm.ext2, &zbar.crop(p.h + 1, 2 * p.h).unwrap(), &abar);
    let bbar = ext(&nm.ext1, &yb(3), &cbar);
    if g {
        ext(&nm.ext3, &xb(3), &abar)
    } else {
        ext(&nm.ext3, &xb(2), &bbar)
    }
}

#[test]
fn flip_flop_matches_its_definition() {
    let nm = micro();
    let p = nm.profile();
    let mut r = rng(1);
    for i in 0..500 {
        let y = BitString::random(4 * p.n_y, &mut r);
        let x = BitString::random(4 * p.n_x, &mut r);
        let z = BitString::random(2 * p.h, &mut r);
        let g = i % 2 == 0;
        let out = flip_flop(&nm, &y, &x, &z, g).unwrap();
        assert_eq!(out, flip_flop_oracle(&nm, &y, &x, &z, g));
        assert_eq!(out, flip_flop(&nm, &y, &x, &z, g).unwrap());
        assert_eq!(out.len(), 2 * p.h);
    }
    let short = BitString::zeros(3);
    assert!(matches!(
        flip_flop(&nm, &short, &short, &short, true),
        Err(Error::Usage(_))
    ));
}

#[test]
fn g_branches_read_exactly_their_blocks() {
    let nm = micro();
    let mut r = rng(2);
    for g in [false, true] {
        assert_eq!(
            common::observed_deps(&nm, g, 60, &mut r),
            common::expected_deps(&nm, g),
            "g = {g}"
        );
    }
}

#[test]
fn later_blocks_never_reach_earlier_rounds() {
    let nm = micro();
    let mut r = rng(3);
    for round in [1, 2, 30] {
        let iso = common::round_isolation(&nm, round, 2, &mut r);
        assert_eq!(iso.earlier_changed, 0, "round {round}");
        assert!(iso.own_changed > 0, "round {round}");
    }
}

#[test]
fn spare_blocks_are_never_read_by_the_breaker() {
    let nm = micro();
    let (changed, total) = common::spare_block_changes(&nm, 1, &mut rng(4));
    assert!(total > 0);
    assert_eq!(changed, 0);
}

#[test]
fn block_map_partitions_the_codeword() {
    for p in [
        ParamProfile::micro(),
        ParamProfile::canonical_toy(),
        ParamProfile::canonical_toy_t2(),
    ] {
        let nm = NmExt::new(&p).unwrap();
        let l = nm.layout();
        let mut iv = vec![l.head, l.ip2];
        iv.extend(&l.rounds);
        iv.push(l.last);
        iv.extend(&l.spare);
        iv.sort_by_key(|i| i.start);
        assert_eq!(iv[0].start, 1);
        for w in iv.windows(2) {
            assert_eq!(w[0].end + 1, w[1].start);
        }
        assert_eq!(iv.last().unwrap().end, p.n);
        assert_eq!(l.rounds.len(), p.a);
        assert_eq!(l.spare.len(), 2 * p.a - 1);
        // Everything the pipeline consumes after the head.
        let used: usize = l.ip2.len() + l.rounds.iter().map(|i| i.len()).sum::<usize>() + l.last.len();
        assert_eq!(used, p.used_tail_bits());
    }
}

#[test]
fn trace_agrees_with_the_extractor_and_replays() {
    let nm = micro();
    let p = nm.profile();
    let mut r = rng(5);
    for _ in 0..100 {
        let (x, y) = (BitString::random(p.n, &mut r), BitString::random(p.n, &mut r));
        let t = trace(&nm, &x, &y).unwrap();
        assert_eq!(t.s_out, nmext2(&nm, &x, &y).unwrap());
        assert_eq!(t.s_out.len(), p.n_x / 4);
        assert_eq!(
            t.z1,
            ip_extract(&nm.ip2, &t.blocks.ip2.crop(&x), &t.blocks.ip2.crop(&y)).unwrap()
        );
        for (i, rec) in t.rounds.iter().enumerate() {
            let iv = t.blocks.rounds[i];
            assert_eq!(rec.z, *t.z(i + 1));
            assert_eq!(rec.g, t.advice.g.get(i));
            let again = flip_flop_record(&nm, &iv.crop(&y), &iv.crop(&x), &rec.z, rec.g).unwrap();
            assert_eq!(&again, rec);
        }
        assert_eq!(t.f, nm.ext4.extract(&t.blocks.last.crop(&y), t.z(p.a + 1)).unwrap());
        assert_eq!(t.s_out, nm.ext6.extract(&t.blocks.last.crop(&x), &t.f).unwrap());
    }
}

#[test]
fn one_round_breaker_is_a_flip_flop_then_ext4() {
    let nm = micro();
    let p = nm.profile();
    let mut r = rng(6);
    for _ in 0..50 {
        let (x4, y4) = (BitString::random(p.n7, &mut r), BitString::random(p.n7, &mut r));
        let z1 = BitString::random(2 * p.h, &mut r);
        let g = BitString::random(p.a, &mut r);
        let (f, recs) = adv_cb_rounds(&nm, &y4, &x4, &z1, &g, 1).unwrap();
        let z2 = flip_flop(&nm, &y4.slice(0, 4 * p.n_y), &x4.slice(0, 4 * p.n_x), &z1, g.get(0)).unwrap();
        assert_eq!(recs.len(), 1);
        assert_eq!(f, nm.ext4.extract(&y4.slice(4 * p.n_y, 4 * p.n_y), &z2).unwrap());
        assert_eq!(
            adv_cb(&nm, &y4, &x4, &z1, &g).unwrap(),
            adv_cb_rounds(&nm, &y4, &x4, &z1, &g, p.a).unwrap().0
        );
    }
    let g = BitString::zeros(p.a - 1);
    let z = BitString::zeros(2 * p.h);
    assert!(adv_cb(&nm, &BitString::zeros(p.n7), &BitString::zeros(p.n7), &z, &g).is_err());
}

#[test]
fn head_bits_steer_the_output() {
    let nm = micro();
    let p = nm.profile();
    let mut r = rng(7);
    let mut moved = 0;
    for _ in 0..100 {
        let (x, y) = (BitString::random(p.n, &mut r), BitString::random(p.n, &mut r));
        let s = nmext2(&nm, &x, &y).unwrap();
        let mut x2 = x.clone();
        x2.set(0, !x.get(0));
        let t2 = trace(&nm, &x2, &y).unwrap();
        assert_ne!(t2.advice.g, trace(&nm, &x, &y).unwrap().advice.g);
        if t2.s_out != s {
            moved += 1;
        }
    }
    assert!(moved > 0);
}

#[test]
fn output_of_uniform_sources_is_uniform() {
    let nm = micro();
    let p = nm.profile();
    let mut r = rng(8);
    let mut counts = vec![0u64; 1 << p.output_len];
    for _ in 0..100_000 {
        let (x, y) = (BitString::random(p.n, &mut r), BitString::random(p.n, &mut r));
        counts[nmext2(&nm, &x, &y).unwrap().to_u64() as usize] += 1;
    }
    let dev = max_sigma_deviation(&counts, 1.0 / counts.len() as f64);
    assert!(dev < 4.0, "{counts:?} deviates by {dev} sigma");
}

#[test]
fn multiplicity_variant() {
    let one = NmExt::new(&ParamProfile::canonical_toy()).unwrap();
    let two = NmExt::new(&ParamProfile::canonical_toy_t2()).unwrap();
    let n = one.profile().n;
    let mut r = rng(9);
    for _ in 0..20 {
        let (x, y) = (BitString::random(n, &mut r), BitString::random(n, &mut r));
        assert_eq!(nmext2(&one, &x, &y).unwrap(), nmext2_t(&one, &x, &y).unwrap());
        let s2 = nmext2_t(&two, &x, &y).unwrap();
        assert_eq!(s2.len(), two.profile().n_x / 8);
        assert!(matches!(nmext2(&two, &x, &y), Err(Error::Usage(_))));
    }
}
