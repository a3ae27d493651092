use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{usage, Result};

/// A finite distribution over string labels drawn from a named universe.
/// Only distributions over the same universe can be compared.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Dist {
    pub universe: String,
    pub weights: BTreeMap<String, f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Distance {
    /// `sum |p_i - q_i|`.
    pub l1: f64,
    /// Half of `l1`.
    pub statistical: f64,
}

const NORM_TOL: f64 = 1e-9;

impl Dist {
    pub fn new(universe: impl Into<String>, weights: BTreeMap<String, f64>) -> Result<Self> {
        if weights.values().any(|&w| !(w >= 0.0)) {
            return usage("negative or NaN weight");
        }
        let total: f64 = weights.values().sum();
        if (total - 1.0).abs() > NORM_TOL {
            return usage(format!("weights sum to {total}, not 1"));
        }
        Ok(Dist {
            universe: universe.into(),
            weights,
        })
    }

    /// Empirical distribution of the given counts.
    pub fn from_counts<'a>(
        universe: impl Into<String>,
        counts: impl IntoIterator<Item = (&'a String, &'a u64)>,
    ) -> Result<Self> {
        let counts: Vec<(&String, &u64)> = counts.into_iter().collect();
        let n: u64 = counts.iter().map(|(_, &c)| c).sum();
        if n == 0 {
            return usage("no observations");
        }
        let weights = counts
            .into_iter()
            .filter(|(_, &c)| c > 0)
            .map(|(k, &c)| (k.clone(), c as f64 / n as f64))
            .collect();
        Dist::new(universe, weights)
    }

    pub fn point(universe: impl Into<String>, label: impl Into<String>) -> Self {
        Dist {
            universe: universe.into(),
            weights: BTreeMap::from([(label.into(), 1.0)]),
        }
    }

    /// Uniform over the `2^m` bit strings of length `m`, labelled as printed.
    pub fn uniform_bits(m: usize) -> Result<Self> {
        if m > 20 {
            return usage(format!("uniform over 2^{m} labels is too large to enumerate"));
        }
        let w = 1.0 / (1u64 << m) as f64;
        let weights = (0..1u64 << m)
            .map(|v| ((0..m).map(|i| if v >> i & 1 == 1 { '1' } else { '0' }).collect(), w))
            .collect();
        Ok(Dist {
            universe: format!("bits{m}"),
            weights,
        })
    }

    pub fn get(&self, label: &str) -> f64 {
        self.weights.get(label).copied().unwrap_or(0.0)
    }

    pub fn support(&self) -> usize {
        self.weights.values().filter(|&&w| w > 0.0).count()
    }
}

pub fn tv_distance(p: &Dist, q: &Dist) -> Result<Distance> {
    if p.universe != q.universe {
        return usage(format!(
            "cannot compare distributions over {:?} and {:?}",
            p.universe, q.universe
        ));
    }
    let l1 = l1_maps(&p.weights, &q.weights);
    Ok(Distance {
        l1,
        statistical: l1 / 2.0,
    })
}

/// `sum |p - q|` over the union of keys.
pub(crate) fn l1_maps<K: Ord>(p: &BTreeMap<K, f64>, q: &BTreeMap<K, f64>) -> f64 {
    let mut s: f64 = p
        .iter()
        .map(|(k, &w)| (w - q.get(k).copied().unwrap_or(0.0)).abs())
        .sum();
    s += q
        .iter()
        .filter(|(k, _)| !p.contains_key(*k))
        .map(|(_, &w)| w)
        .sum::<f64>();
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn distance_examples() {
        let u = Dist::uniform_bits(1).unwrap();
        assert_eq!(tv_distance(&u, &u).unwrap().l1, 0.0);
        let d = tv_distance(&u, &Dist::point("bits1", "0")).unwrap();
        assert!((d.l1 - 1.0).abs() < 1e-12 && (d.statistical - 0.5).abs() < 1e-12);
        let a = Dist::point("bits1", "0");
        let b = Dist::point("bits1", "1");
        assert_eq!(tv_distance(&a, &b).unwrap().l1, 2.0);
        assert!(tv_distance(&a, &Dist::point("bits2", "00")).is_err());
    }

    #[test]
    fn normalisation_is_enforced() {
        assert!(Dist::new("u", BTreeMap::from([("a".into(), 0.5)])).is_err());
        assert!(Dist::new("u", BTreeMap::from([("a".into(), 1.5), ("b".into(), -0.5)])).is_err());
        let c = BTreeMap::from([("a".to_string(), 3u64), ("b".to_string(), 1)]);
        let d = Dist::from_counts("u", &c).unwrap();
        assert_eq!(d.get("a"), 0.75);
    }
}
