use crate::error::{Error, Result};

/// Empirical quantile with linear interpolation between order statistics
/// (the "type 7" definition: position `p·(n − 1)` in the sorted sample).
///
/// `sample` need not be sorted; NaNs are ordered last.
pub fn empirical_quantile(sample: &[f64], p: f64) -> Result<f64> {
    let mut sorted = sample.to_vec();
    sorted.sort_unstable_by(f64::total_cmp);
    quantile_sorted(&sorted, p)
}

/// As [`empirical_quantile`] for an already sorted sample.
pub fn quantile_sorted(sorted: &[f64], p: f64) -> Result<f64> {
    if sorted.is_empty() {
        return Err(Error::EmptySample);
    }
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::ProbabilityDomain(p));
    }
    let pos = p * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let frac = pos - lo as f64;
    Ok(sorted[lo] + frac * (sorted[hi] - sorted[lo]))
}

/// Lower and upper quantiles `(p, 1 − p)` of a sample, sorting it in place.
pub fn two_sided_quantiles(sample: &mut [f64], p: f64) -> Result<(f64, f64)> {
    sample.sort_unstable_by(f64::total_cmp);
    Ok((quantile_sorted(sample, p)?, quantile_sorted(sample, 1.0 - p)?))
}
