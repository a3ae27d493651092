//! Rough per-operation timings for the shipped profiles.
//!
//! cargo run --release -p nmc-core --example timing

use std::time::Instant;

use nmc::codec::{decode, encode};
use nmc::nmext::{NmExt, ParamProfile};
use nmc::BitString;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() {
    for (name, prof) in [("toy", ParamProfile::canonical_toy()), ("micro", ParamProfile::micro())] {
        let nm = NmExt::new(&prof).unwrap();
        let m = prof.output_len;
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let reps = 500u32;
        let t0 = Instant::now();
        let cws: Vec<_> = (0..reps as u64)
            .map(|i| {
                let s = BitString::from_u64(i % (1 << m), m);
                let cw = encode(&nm, &s, &mut rng).unwrap();
                (s, cw)
            })
            .collect();
        let enc = t0.elapsed() / reps;
        let t0 = Instant::now();
        for (s, cw) in &cws {
            assert_eq!(&decode(&nm, cw).unwrap(), s);
        }
        println!("{name}: encode {enc:?}/op, decode {:?}/op", t0.elapsed() / reps);
    }
}
