//! Small statistical helpers shared by the harness and the test suites.

use statrs::distribution::{ChiSquared, ContinuousCDF};

/// Pearson chi-square p-value of `counts` against the uniform distribution
/// over `counts.len()` cells.
pub fn chi_square_uniform_p(counts: &[u64]) -> f64 {
    let k = counts.len();
    assert!(k >= 2, "need at least two cells");
    let n: u64 = counts.iter().sum();
    let e = n as f64 / k as f64;
    let stat: f64 = counts.iter().map(|&c| (c as f64 - e).powi(2) / e).sum();
    ChiSquared::new((k - 1) as f64).expect("positive dof").sf(stat)
}

/// Largest deviation of any cell from `n * p`, in units of the binomial
/// standard deviation `sqrt(n p (1 - p))`.
pub fn max_sigma_deviation(counts: &[u64], p: f64) -> f64 {
    let n: u64 = counts.iter().sum();
    let sd = (n as f64 * p * (1.0 - p)).sqrt();
    counts
        .iter()
        .map(|&c| (c as f64 - n as f64 * p).abs() / sd)
        .fold(0.0, f64::max)
}

/// l1 distance between two histograms after normalising each.
pub fn l1_of_counts(a: &[u64], b: &[u64]) -> f64 {
    assert_eq!(a.len(), b.len());
    let (na, nb) = (a.iter().sum::<u64>() as f64, b.iter().sum::<u64>() as f64);
    a.iter()
        .zip(b)
        .map(|(&x, &y)| (x as f64 / na - y as f64 / nb).abs())
        .sum()
}
