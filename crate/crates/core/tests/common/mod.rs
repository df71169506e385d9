//! Closed-form oracles shared by the statistical tests. These never call
//! into the sampler.

#![allow(dead_code)]

/// Poisson pmf for k = 0..=kmax by the recurrence p_k = p_{k-1} * lambda / k.
pub fn poisson_pmf(lambda: f64, kmax: usize) -> Vec<f64> {
    let mut p = vec![0.0; kmax + 1];
    p[0] = (-lambda).exp();
    for k in 1..=kmax {
        p[k] = p[k - 1] * lambda / k as f64;
    }
    p
}

/// Mean and variance of min(X, cap) for X ~ Poisson(lambda).
pub fn clipped_poisson_moments(lambda: f64, cap: u32) -> (f64, f64) {
    let kmax = (lambda + 40.0 * lambda.sqrt() + 40.0) as usize;
    let pmf = poisson_pmf(lambda, kmax);
    let (mut m1, mut m2) = (0.0, 0.0);
    for (k, p) in pmf.iter().enumerate() {
        let v = (k as f64).min(f64::from(cap));
        m1 += p * v;
        m2 += p * v * v;
    }
    (m1, m2 - m1 * m1)
}

pub fn mean(xs: impl IntoIterator<Item = f64>) -> f64 {
    let (s, n) = xs
        .into_iter()
        .fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
    s / n as f64
}

pub fn mean_var(xs: &[f64]) -> (f64, f64) {
    let m = mean(xs.iter().copied());
    let v = xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (xs.len() - 1) as f64;
    (m, v)
}

/// Exact variance and fourth central moment of `f(S)` for S ~ Binomial(n, p).
pub fn binomial_transform_moments(n: u32, p: f64, f: impl Fn(f64) -> f64) -> (f64, f64) {
    let mut pmf = vec![(1.0 - p).powi(n as i32); n as usize + 1];
    for k in 1..=n as usize {
        pmf[k] = pmf[k - 1] * (n as f64 - k as f64 + 1.0) / k as f64 * p / (1.0 - p);
    }
    let m: f64 = pmf.iter().enumerate().map(|(k, q)| q * f(k as f64)).sum();
    let central = |e: i32| -> f64 {
        pmf.iter()
            .enumerate()
            .map(|(k, q)| q * (f(k as f64) - m).powi(e))
            .sum()
    };
    (central(2), central(4))
}
