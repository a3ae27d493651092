use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::bits::BitString;
use crate::error::{usage, Result};
use crate::fields::{FieldSpec, Mat};

/// Inner product over GF(2^k) of two `n_blocks`-symbol sources.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IpSpec {
    pub block_field: FieldSpec,
    pub n_blocks: usize,
}

impl IpSpec {
    pub fn new(k: u32, n_blocks: usize) -> Result<Self> {
        if n_blocks == 0 {
            return usage("inner product needs at least one block");
        }
        Ok(IpSpec {
            block_field: FieldSpec::new(k)?,
            n_blocks,
        })
    }

    pub fn source_len(&self) -> usize {
        self.n_blocks * self.block_field.degree() as usize
    }

    pub fn output_len(&self) -> usize {
        self.block_field.degree() as usize
    }

    fn check(&self, x: &BitString, what: &str) -> Result<()> {
        if x.len() != self.source_len() {
            return usage(format!(
                "{what} has {} bits, inner product expects {}",
                x.len(),
                self.source_len()
            ));
        }
        Ok(())
    }
}

pub fn ip_extract(spec: &IpSpec, x: &BitString, y: &BitString) -> Result<BitString> {
    spec.check(x, "x")?;
    spec.check(y, "y")?;
    let f = &spec.block_field;
    let v = (0..spec.n_blocks).fold(0, |acc, j| acc ^ f.mul(f.symbol(x, j), f.symbol(y, j)));
    Ok(f.to_bits(&[v]))
}

/// Uniform `y` with `<x, y> = target`. `Infeasible` when `x = 0` and the
/// target is not.
pub fn invert_ip<R: Rng + ?Sized>(spec: &IpSpec, x: &BitString, target: &BitString, rng: &mut R) -> Result<BitString> {
    spec.check(x, "x")?;
    if target.len() != spec.output_len() {
        return usage(format!(
            "target has {} bits, expected {}",
            target.len(),
            spec.output_len()
        ));
    }
    let f = &spec.block_field;
    let row = f.symbols(x)?;
    let y = Mat::from_rows(vec![row])?.solve_affine_sample(f, &[f.symbol(target, 0)], rng)?;
    Ok(f.to_bits(&y))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn b(s: &str) -> BitString {
        s.parse().unwrap()
    }

    #[test]
    fn gf2_two_blocks() {
        let spec = IpSpec::new(1, 2).unwrap();
        assert_eq!(ip_extract(&spec, &b("10"), &b("11")).unwrap(), b("1"));
    }

    #[test]
    fn gf4_terms_cancel() {
        // omega = x is "01" (constant term first).
        let spec = IpSpec::new(2, 2).unwrap();
        let x = b("0110"); // (omega, 1)
        let y = b("1001"); // (1, omega)
        assert_eq!(ip_extract(&spec, &x, &y).unwrap(), b("00"));
    }

    #[test]
    fn inversion_hits_both_preimages() {
        let spec = IpSpec::new(1, 2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let mut seen = std::collections::BTreeSet::new();
        for _ in 0..64 {
            seen.insert(invert_ip(&spec, &b("11"), &b("1"), &mut rng).unwrap().to_string());
        }
        assert_eq!(seen.into_iter().collect::<Vec<_>>(), vec!["01", "10"]);
    }

    #[test]
    fn gf4_inversion_pins_first_block() {
        let spec = IpSpec::new(2, 2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..32 {
            let y = invert_ip(&spec, &b("1000"), &b("01"), &mut rng).unwrap();
            assert_eq!(y.crop(1, 2).unwrap(), b("01"));
        }
    }

    #[test]
    fn zero_source_is_infeasible() {
        let spec = IpSpec::new(2, 3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let r = invert_ip(&spec, &BitString::zeros(6), &b("10"), &mut rng);
        assert!(matches!(r, Err(Error::Infeasible(_))));
    }
}
