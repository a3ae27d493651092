use nmc::advice::rs_encode;
use nmc::codec::{
    copy_fn, copy_t, decode, encode, encode_with_draws, read_codeword, write_codeword, Codeword, TamperVerdict,
};
use nmc::extractors::Construction;
use nmc::harness::{run_experiment, TamperSpec};
use nmc::nmext::{trace, NmExt, ParamProfile};
use nmc::stats::chi_square_uniform_p;
use nmc::{BitString, Error};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn b(s: &str) -> BitString {
    s.parse().unwrap()
}

#[test]
fn decode_inverts_encode() {
    for p in [
        ParamProfile::canonical_toy(),
        ParamProfile::micro(),
        ParamProfile::canonical_toy_t2(),
    ] {
        let nm = NmExt::new(&p).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..200 {
            let s = BitString::random(p.output_len, &mut rng);
            let cw = encode(&nm, &s, &mut rng).unwrap();
            assert_eq!(cw.x.len(), p.n);
            assert_eq!(decode(&nm, &cw).unwrap(), s);
        }
        assert!(matches!(
            encode(&nm, &BitString::zeros(p.output_len + 1), &mut rng),
            Err(Error::Usage(_))
        ));
    }
}

#[test]
fn encoding_is_a_function_of_the_rng() {
    let nm = NmExt::new(&ParamProfile::micro()).unwrap();
    let s = b("10");
    let a = encode(&nm, &s, &mut ChaCha8Rng::seed_from_u64(5)).unwrap();
    let c = encode(&nm, &s, &mut ChaCha8Rng::seed_from_u64(5)).unwrap();
    let d = encode(&nm, &s, &mut ChaCha8Rng::seed_from_u64(6)).unwrap();
    assert_eq!(a, c);
    assert_ne!(a, d);
}

#[test]
fn forward_pass_reproduces_the_draws() {
    let nm = NmExt::new(&ParamProfile::micro()).unwrap();
    let p = nm.profile();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..100 {
        let s = BitString::random(p.output_len, &mut rng);
        let (cw, draws) = encode_with_draws(&nm, &s, &mut rng).unwrap();
        let t = trace(&nm, &cw.x, &cw.y).unwrap();
        assert!(draws.mismatches(&t).is_empty());
        assert_eq!(draws.rounds.len(), p.a);
        for (i, d) in draws.rounds.iter().enumerate() {
            // The unused half-chain is left open, the used one pinned.
            assert_eq!(d.g, t.advice.g.get(i));
            assert_eq!(d.b.is_some(), d.g);
            assert_eq!(d.bbar.is_some(), !d.g);
        }
    }
}

#[test]
fn completed_tails_hit_the_sampled_fingerprint() {
    let nm = NmExt::new(&ParamProfile::micro()).unwrap();
    let p = nm.profile();
    let rs = &nm.advice.rs;
    let lq = p.log_q as usize;
    let head = 3 * p.n1;
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..50 {
        let s = BitString::random(p.output_len, &mut rng);
        let cw = encode(&nm, &s, &mut rng).unwrap();
        let t = trace(&nm, &cw.x, &cw.y).unwrap();
        let fp_len = p.t1 * lq;
        for (half, fp_at) in [(&cw.x, head), (&cw.y, 2 * head + fp_len)] {
            let msg = rs.field.symbols(&half.slice(head, rs.k * lq)).unwrap();
            let word = rs_encode(rs, &msg).unwrap();
            for (j, &pos) in t.advice.positions.iter().enumerate() {
                let want = t.advice.g.read_u64(fp_at + j * lq, lq);
                assert_eq!(word[pos - 1], want);
            }
        }
    }
}

#[test]
fn free_tail_symbols_are_uniform() {
    let nm = NmExt::new(&ParamProfile::micro()).unwrap();
    let p = nm.profile();
    let first_free = 3 * p.n1 + p.pinned_symbols() * p.log_q as usize;
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut counts = [vec![0u64; 16], vec![0u64; 16]];
    for _ in 0..4000 {
        let s = BitString::random(p.output_len, &mut rng);
        let cw = encode(&nm, &s, &mut rng).unwrap();
        counts[0][cw.x.read_u64(first_free, 4) as usize] += 1;
        counts[1][cw.y.read_u64(p.n - 4, 4) as usize] += 1;
    }
    for c in &counts {
        assert!(chi_square_uniform_p(c) > 0.01, "{c:?}");
    }
}

#[test]
fn copy_rules() {
    let s = b("1010");
    let m = b("0001");
    assert_eq!(copy_fn(&TamperVerdict::Same, &s), s);
    assert_eq!(copy_fn(&TamperVerdict::Message(m.clone()), &s), m);
    assert_eq!(copy_fn(&TamperVerdict::Same, &BitString::zeros(4)), BitString::zeros(4));
    let all_same = copy_t(&[TamperVerdict::Same, TamperVerdict::Same, TamperVerdict::Same], &s);
    assert_eq!(all_same, vec![s.clone(); 3]);
    assert_eq!(
        copy_t(&[TamperVerdict::Same, TamperVerdict::Message(m.clone())], &s),
        vec![s.clone(), m]
    );
    assert_eq!(
        copy_t(&[TamperVerdict::Same], &s),
        vec![copy_fn(&TamperVerdict::Same, &s)]
    );
}

fn toeplitz_micro() -> ParamProfile {
    let mut p = ParamProfile::micro();
    p.construction = Construction::Toeplitz;
    p.validate().unwrap();
    p
}

#[test]
fn rank_deficient_seeds_surface_as_encoding_failures() {
    // Ext1 stretches its 1-bit seed to all zeros or all ones, so its matrix
    // never reaches a target with unequal bits.
    let nm = NmExt::new(&toeplitz_micro()).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut failures = 0;
    for _ in 0..20 {
        match encode(&nm, &b("01"), &mut rng) {
            Ok(cw) => assert_eq!(decode(&nm, &cw).unwrap(), b("01")),
            Err(Error::EncodingFailure { round, role }) => {
                assert!(round >= 1 && round <= nm.profile().a + 1);
                assert!(role.starts_with("ext"));
                failures += 1;
            }
            Err(e) => panic!("unexpected error {e}"),
        }
    }
    assert!(failures > 0);
    let spec: TamperSpec = "identity".parse().unwrap();
    assert!(matches!(run_experiment(&nm, &spec, 1000, 1), Err(Error::Aborted(_))));
}

#[test]
fn codeword_files_round_trip() {
    let p = ParamProfile::canonical_toy();
    let nm = NmExt::new(&p).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let s = b("0110");
    let cw = encode(&nm, &s, &mut rng).unwrap();
    let bytes = write_codeword(&p.hash(), &cw);
    assert_eq!(&bytes[..4], b"NMC1");
    assert_eq!(&bytes[4..36], &p.hash());
    let (_, back): ([u8; 32], Codeword) = read_codeword(&bytes, Some(&p.hash())).unwrap();
    assert_eq!(back, cw);
    assert_eq!(decode(&nm, &back).unwrap(), s);
    let other = ParamProfile::micro().hash();
    assert!(matches!(read_codeword(&bytes, Some(&other)), Err(Error::Format(_))));
}
