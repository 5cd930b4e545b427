//! Bivariate normal rectangle probabilities.
//!
//! The fast path is Genz's BVNU (Drezner–Wesolowsky with Gauss–Legendre
//! nodes and a separate expansion for |ρ| > 0.925), accurate to about 1e-15.
//! [`bvn_rect_quadrature`] integrates Φ-conditioned slices of the first
//! coordinate instead and is kept as an independent route.

use std::f64::consts::PI;

use super::normal;
use super::quadrature::{integrate, QuadratureTol};
use crate::error::{Error, Result};

/// A rectangle under a bivariate normal with unit variances.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BivariateSpec {
    pub mean1: f64,
    pub mean2: f64,
    pub rho: f64,
    /// `[lo1, hi1]`, either end possibly infinite.
    pub x_range: (f64, f64),
    pub y_range: (f64, f64),
}

impl BivariateSpec {
    pub fn standard(rho: f64, x_range: (f64, f64), y_range: (f64, f64)) -> Self {
        Self {
            mean1: 0.0,
            mean2: 0.0,
            rho,
            x_range,
            y_range,
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.rho.abs() < 1.0) {
            return Err(Error::InvalidDesign(format!(
                "bivariate correlation {} outside (-1, 1)",
                self.rho
            )));
        }
        if !(self.x_range.0 <= self.x_range.1 && self.y_range.0 <= self.y_range.1) {
            return Err(Error::InvalidDesign("rectangle limits out of order".into()));
        }
        if self.mean1.is_nan() || self.mean2.is_nan() {
            return Err(Error::NonFinite("bivariate mean"));
        }
        Ok(())
    }
}

// (weight, abscissa) pairs on [-1, 1], one half of each symmetric rule.
const GL6: [(f64, f64); 3] = [
    (0.171_324_492_379_170_5, -0.932_469_514_203_152_2),
    (0.360_761_573_048_138_4, -0.661_209_386_466_264_7),
    (0.467_913_934_572_690_4, -0.238_619_186_083_197),
];
const GL12: [(f64, f64); 6] = [
    (0.047_175_336_386_511_77, -0.981_560_634_246_719_1),
    (0.106_939_325_995_318_3, -0.904_117_256_370_475),
    (0.160_078_328_543_346_4, -0.769_902_674_194_305),
    (0.203_167_426_723_065_9, -0.587_317_954_286_617_1),
    (0.233_492_536_538_354_7, -0.367_831_498_998_180_2),
    (0.249_147_045_813_402_9, -0.125_233_408_511_469_2),
];
const GL20: [(f64, f64); 10] = [
    (0.017_614_007_139_152_12, -0.993_128_599_185_094_9),
    (0.040_601_429_800_386_94, -0.963_971_927_277_913_8),
    (0.062_672_048_334_109_06, -0.912_234_428_251_325_9),
    (0.083_276_741_576_704_75, -0.839_116_971_822_218_8),
    (0.101_930_119_817_240_4, -0.746_331_906_460_150_8),
    (0.118_194_531_961_518_4, -0.636_053_680_726_515),
    (0.131_688_638_449_176_6, -0.510_867_001_950_827_1),
    (0.142_096_109_318_382_1, -0.373_706_088_715_419_6),
    (0.149_172_986_472_603_7, -0.227_785_851_141_645_1),
    (0.152_753_387_130_725_9, -0.076_526_521_133_497_33),
];

/// P(X > h, Y > k) for a standard bivariate normal with correlation `r`.
///
/// Infinite limits are allowed.
pub fn bvnu(h: f64, k: f64, r: f64) -> f64 {
    if h == f64::INFINITY || k == f64::INFINITY {
        return 0.0;
    }
    if h == f64::NEG_INFINITY {
        return if k == f64::NEG_INFINITY { 1.0 } else { normal::sf(k) };
    }
    if k == f64::NEG_INFINITY {
        return normal::sf(h);
    }
    genz_bvnu(h, k, r)
}

fn genz_bvnu(dh: f64, dk: f64, r: f64) -> f64 {
    let two_pi = 2.0 * PI;
    let quad: &[(f64, f64)] = if r.abs() < 0.3 {
        &GL6
    } else if r.abs() < 0.75 {
        &GL12
    } else {
        &GL20
    };
    let h = dh;
    let mut k = dk;
    let mut hk = h * k;
    let mut bvn = 0.0;
    if r.abs() < 0.925 {
        let hs = (h * h + k * k) / 2.0;
        let asr = r.asin();
        for &(w, x) in quad {
            for sign in [-1.0, 1.0] {
                let sn = (asr * (sign * x + 1.0) / 2.0).sin();
                bvn += w * ((sn * hk - hs) / (1.0 - sn * sn)).exp();
            }
        }
        bvn = bvn * asr / (2.0 * two_pi) + normal::sf(h) * normal::sf(k);
        return bvn.clamp(0.0, 1.0);
    }
    if r < 0.0 {
        k = -k;
        hk = -hk;
    }
    if r.abs() < 1.0 {
        let a_s = (1.0 - r) * (1.0 + r);
        let mut a = a_s.sqrt();
        let b_s = (h - k) * (h - k);
        let c = (4.0 - hk) / 8.0;
        let d = (12.0 - hk) / 16.0;
        let asr = -(b_s / a_s + hk) / 2.0;
        if asr > -100.0 {
            bvn = a
                * asr.exp()
                * (1.0 - c * (b_s - a_s) * (1.0 - d * b_s / 5.0) / 3.0 + c * d * a_s * a_s / 5.0);
        }
        if hk > -160.0 {
            let b = b_s.sqrt();
            bvn -= (-hk / 2.0).exp()
                * two_pi.sqrt()
                * normal::cdf(-b / a)
                * b
                * (1.0 - c * b_s * (1.0 - d * b_s / 5.0) / 3.0);
        }
        a /= 2.0;
        for &(w, x) in quad {
            for sign in [-1.0, 1.0] {
                let xs = (a * (sign * x + 1.0)).powi(2);
                let rs = (1.0 - xs).sqrt();
                let asr = -(b_s / xs + hk) / 2.0;
                if asr > -100.0 {
                    bvn += a
                        * w
                        * asr.exp()
                        * ((-hk * xs / (2.0 * (1.0 + rs) * (1.0 + rs))).exp() / rs
                            - (1.0 + c * xs * (1.0 + d * xs)));
                }
            }
        }
        bvn = -bvn / two_pi;
    }
    if r > 0.0 {
        bvn += normal::sf(h.max(k));
    } else {
        bvn = -bvn;
        if k > h {
            if h < 0.0 {
                bvn += normal::cdf(k) - normal::cdf(h);
            } else {
                bvn += normal::sf(h) - normal::sf(k);
            }
        }
    }
    bvn.clamp(0.0, 1.0)
}

/// Probability of the rectangle in `spec`.
pub fn bvn_rect(spec: &BivariateSpec) -> Result<f64> {
    spec.validate()?;
    let (x0, x1) = (spec.x_range.0 - spec.mean1, spec.x_range.1 - spec.mean1);
    let (y0, y1) = (spec.y_range.0 - spec.mean2, spec.y_range.1 - spec.mean2);
    let r = spec.rho;
    // Inclusion–exclusion over upper orthants.
    let p = bvnu(x0, y0, r) - bvnu(x1, y0, r) - bvnu(x0, y1, r) + bvnu(x1, y1, r);
    Ok(p.clamp(0.0, 1.0))
}

/// Same probability as [`bvn_rect`], by one-dimensional adaptive quadrature
/// of φ(x)·[Φ((y₁ − ρx)/s) − Φ((y₀ − ρx)/s)] over the first coordinate.
pub fn bvn_rect_quadrature(spec: &BivariateSpec) -> Result<f64> {
    spec.validate()?;
    let (x0, x1) = (spec.x_range.0 - spec.mean1, spec.x_range.1 - spec.mean1);
    let (y0, y1) = (spec.y_range.0 - spec.mean2, spec.y_range.1 - spec.mean2);
    let r = spec.rho;
    let s = (1.0 - r * r).sqrt();
    let slice = |x: f64| {
        let upper = if y1 == f64::INFINITY {
            1.0
        } else {
            normal::cdf((y1 - r * x) / s)
        };
        let lower = if y0 == f64::NEG_INFINITY {
            0.0
        } else {
            normal::cdf((y0 - r * x) / s)
        };
        normal::pdf(x) * (upper - lower)
    };
    let tol = QuadratureTol {
        abs: 1e-13,
        rel: 1e-12,
        max_intervals: 4000,
    };
    // Split at the origin so both halves see the bulk of the density.
    let v = if x0 < 0.0 && x1 > 0.0 {
        integrate(slice, x0, 0.0, tol)? + integrate(slice, 0.0, x1, tol)?
    } else {
        integrate(slice, x0, x1, tol)?
    };
    Ok(v.clamp(0.0, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    const INF: f64 = f64::INFINITY;

    #[test]
    fn independent_quadrant() {
        let spec = BivariateSpec::standard(0.0, (-INF, 0.0), (-INF, 0.0));
        assert_abs_diff_eq!(bvn_rect(&spec).unwrap(), 0.25, epsilon = 1e-15);
        assert_abs_diff_eq!(bvn_rect_quadrature(&spec).unwrap(), 0.25, epsilon = 1e-12);
    }

    #[test]
    fn full_plane_is_one() {
        let rho = (312.81f64 / 393.69).sqrt();
        let spec = BivariateSpec::standard(rho, (-INF, INF), (-INF, INF));
        assert_abs_diff_eq!(bvn_rect(&spec).unwrap(), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(bvn_rect_quadrature(&spec).unwrap(), 1.0, epsilon = 1e-10);
    }

    #[test]
    fn orthant_closed_form() {
        // P(X > 0, Y > 0) = 1/4 + asin(ρ)/(2π)
        for &r in &[-0.99f64, -0.95, -0.5, 0.1, 0.6, 0.8913, 0.93, 0.999] {
            let want = 0.25 + r.asin() / (2.0 * PI);
            assert_abs_diff_eq!(bvnu(0.0, 0.0, r), want, epsilon = 1e-14);
        }
    }

    #[test]
    fn genz_agrees_with_quadrature() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..300 {
            let r = rng.random_range(-0.995..0.995);
            let a: f64 = rng.random_range(-4.0..4.0);
            let b: f64 = rng.random_range(-4.0..4.0);
            let spec = BivariateSpec {
                mean1: rng.random_range(-1.0..1.0),
                mean2: rng.random_range(-1.0..1.0),
                rho: r,
                x_range: (a.min(b), a.max(b)),
                y_range: (rng.random_range(-5.0..0.0), if rng.random_bool(0.5) { INF } else { 2.0 }),
            };
            let fast = bvn_rect(&spec).unwrap();
            let slow = bvn_rect_quadrature(&spec).unwrap();
            assert!((fast - slow).abs() < 1e-9, "{spec:?}: {fast} vs {slow}");
        }
    }

    #[test]
    fn partition_is_additive() {
        let (m1, m2, r) = (0.3, -0.2, 0.8913);
        let cuts = [-INF, -1.0, 0.5, 2.797, INF];
        let mut total = 0.0;
        for i in 0..4 {
            for j in 0..4 {
                let spec = BivariateSpec {
                    mean1: m1,
                    mean2: m2,
                    rho: r,
                    x_range: (cuts[i], cuts[i + 1]),
                    y_range: (cuts[j], cuts[j + 1]),
                };
                total += bvn_rect(&spec).unwrap();
            }
        }
        assert_abs_diff_eq!(total, 1.0, epsilon = 1e-7);
    }

    #[test]
    fn rejects_degenerate_correlation() {
        let spec = BivariateSpec::standard(1.0, (-INF, 0.0), (-INF, 0.0));
        assert!(bvn_rect(&spec).is_err());
    }
}
