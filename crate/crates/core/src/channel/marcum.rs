//! First-order Marcum Q function.
//!
//! Evaluated as a Poisson mixture: with `λ = a²/2` and `μ = b²/2`,
//!
//! ```text
//! Q1(a, b)     = Σₙ Pois(n; λ) · P[Pois(μ) ≤ n]
//! 1 − Q1(a, b) = Σₙ Pois(n; λ) · P[Pois(μ) > n]
//! ```
//!
//! Both series have only non-negative terms. Whichever of the two results is
//! smaller is summed directly, so values close to 0 and values close to 1 both
//! keep full relative precision in the quantity that is small.

/// First-order Marcum Q function `Q1(a, b)`.
///
/// `a` enters only through `a²`, so its sign is ignored. `b ≤ 0` gives 1.
pub fn marcum_q(a: f64, b: f64) -> f64 {
    if a.is_nan() || b.is_nan() {
        return f64::NAN;
    }
    if b <= 0.0 {
        return 1.0;
    }
    if b.is_infinite() {
        return 0.0;
    }
    if a.is_infinite() {
        return 1.0;
    }
    let lambda = 0.5 * a * a;
    let mu = 0.5 * b * b;

    let n_max = tail_bound(lambda);
    let weights = poisson_pmf(lambda, n_max);
    let m_max = n_max + tail_bound(n_max as f64) + 1;
    let pmf = poisson_pmf(mu, m_max);

    // suffix[m] = Σ_{j ≥ m} pmf[j]
    let mut suffix = vec![0.0; m_max + 2];
    for m in (0..=m_max).rev() {
        suffix[m] = suffix[m + 1] + pmf[m];
    }

    let mut q = 0.0;
    let mut outage = 0.0;
    let mut cdf = 0.0;
    for (n, w) in weights.iter().enumerate() {
        cdf += pmf[n];
        let upper = if cdf < 0.5 { 1.0 - cdf } else { suffix[n + 1] };
        q += w * cdf;
        outage += w * upper;
    }
    if outage < q {
        (1.0 - outage).clamp(0.0, 1.0)
    } else {
        q.clamp(0.0, 1.0)
    }
}

/// Index past which `Pois(mean)` carries negligible mass (well under 1e-20).
fn tail_bound(mean: f64) -> usize {
    (mean + 12.0 * mean.sqrt() + 40.0).ceil() as usize
}

fn poisson_pmf(mean: f64, upto: usize) -> Vec<f64> {
    let mut out = vec![0.0; upto + 1];
    if mean == 0.0 {
        out[0] = 1.0;
        return out;
    }
    let ln_mean = mean.ln();
    let mut ln_term = -mean;
    out[0] = ln_term.exp();
    for (m, slot) in out.iter_mut().enumerate().skip(1) {
        ln_term += ln_mean - (m as f64).ln();
        *slot = ln_term.exp();
    }
    out
}
