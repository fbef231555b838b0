//! Standard normal distribution primitives.
//!
//! The classification probabilities, the stopping bound, and the margin
//! formula all push Φ deep into its tails, so the CDF is computed through
//! the complementary error function rather than any low-order polynomial
//! fit. The quantile uses a rational initial guess refined by one Halley
//! step against the high-accuracy CDF.

use std::f64::consts::SQRT_2;

const INV_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

/// Standard normal density φ(x).
#[inline]
pub fn norm_pdf(x: f64) -> f64 {
    INV_SQRT_2PI * (-0.5 * x * x).exp()
}

/// Standard normal CDF Φ(x), absolute error below 1e-15.
#[inline]
pub fn norm_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / SQRT_2)
}

/// Pr(a < Z ≤ b) for a standard normal Z, computed to keep relative
/// accuracy when both endpoints sit in the same tail.
pub fn norm_interval(a: f64, b: f64) -> f64 {
    if b <= a {
        return 0.0;
    }
    let p = if a >= 0.0 {
        // right tail: difference of small upper-tail masses
        0.5 * (libm::erfc(a / SQRT_2) - libm::erfc(b / SQRT_2))
    } else if b <= 0.0 {
        // left tail, mirrored
        0.5 * (libm::erfc(-b / SQRT_2) - libm::erfc(-a / SQRT_2))
    } else {
        norm_cdf(b) - norm_cdf(a)
    };
    p.clamp(0.0, 1.0)
}

/// Standard normal quantile Φ⁻¹(p) for p in (0, 1).
///
/// Acklam's rational approximation followed by a single Halley refinement,
/// which brings the result to within a few ulps everywhere the CDF itself
/// is exact.
pub fn norm_quantile(p: f64) -> f64 {
    assert!(
        p > 0.0 && p < 1.0,
        "quantile argument must lie in (0,1), got {p}"
    );

    const A: [f64; 6] = [
        -3.969_683_028_665_376e1,
        2.209_460_984_245_205e2,
        -2.759_285_104_469_687e2,
        1.383_577_518_672_69e2,
        -3.066_479_806_614_716e1,
        2.506_628_277_459_239,
    ];
    const B: [f64; 5] = [
        -5.447_609_879_822_406e1,
        1.615_858_368_580_409e2,
        -1.556_989_798_598_866e2,
        6.680_131_188_771_972e1,
        -1.328_068_155_288_572e1,
    ];
    const C: [f64; 6] = [
        -7.784_894_002_430_293e-3,
        -3.223_964_580_411_365e-1,
        -2.400_758_277_161_838,
        -2.549_732_539_343_734,
        4.374_664_141_464_968,
        2.938_163_982_698_783,
    ];
    const D: [f64; 4] = [
        7.784_695_709_041_462e-3,
        3.224_671_290_700_398e-1,
        2.445_134_137_142_996,
        3.754_408_661_907_416,
    ];
    const P_LOW: f64 = 0.02425;

    let x = if p < P_LOW {
        let q = (-2.0 * p.ln()).sqrt();
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else if p <= 1.0 - P_LOW {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    } else {
        let q = (-2.0 * (1.0 - p).ln()).sqrt();
        -(((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    };

    // Halley refinement: u = (Φ(x) − p)/φ(x), x ← x − u/(1 + x·u/2).
    let err = norm_cdf(x) - p;
    let u = err / norm_pdf(x);
    let refined = x - u / (1.0 + 0.5 * x * u);
    if refined.is_finite() {
        refined
    } else {
        // pdf underflowed in an extreme tail; the rational guess is already
        // accurate to ~1e-9 there
        x
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    // Reference values from high-precision evaluation of erf.
    const CDF_TABLE: &[(f64, f64)] = &[
        (0.0, 0.5),
        (1.0, 0.841_344_746_068_542_9),
        (-1.0, 0.158_655_253_931_457_05),
        (1.96, 0.975_002_104_851_779_7),
        (2.0, 0.977_249_868_051_820_8),
        (3.0, 0.998_650_101_968_369_9),
        (-3.0, 1.349_898_031_630_094_5e-3),
        (5.0, 0.999_999_713_348_428),
        (-5.0, 2.866_515_718_791_939e-7),
        (-8.0, 6.220_960_574_271_786e-16),
    ];

    #[test]
    fn cdf_matches_reference_values() {
        for &(x, p) in CDF_TABLE {
            let got = norm_cdf(x);
            assert!(
                (got - p).abs() <= 1e-15 + 1e-13 * p.abs(),
                "Phi({x}) = {got}, expected {p}"
            );
        }
    }

    #[test]
    fn quantile_inverts_cdf() {
        for &(x, p) in CDF_TABLE {
            if p <= 0.0 || p >= 1.0 {
                continue;
            }
            let got = norm_quantile(p);
            assert!(
                (got - x).abs() < 1e-9 * x.abs().max(1.0),
                "quantile({p}) = {got}, expected {x}"
            );
        }
        let mut x = -8.0;
        while x <= 8.0 {
            let p = norm_cdf(x);
            if p > 0.0 && p < 1.0 {
                let back = norm_quantile(p);
                // rounding p toward 1 costs ~ulp(1)/pdf(x) of x-resolution,
                // which dominates for large positive x
                let tol = (2e-9 * x.abs().max(1.0)).max(4.0 * f64::EPSILON / norm_pdf(x));
                assert!((back - x).abs() < tol, "x={x} back={back}");
            }
            x += 0.37;
        }
    }

    #[test]
    fn interval_is_stable_in_tails() {
        // Pr(6 < Z <= 7): both endpoints far in the right tail
        let p = norm_interval(6.0, 7.0);
        let reference = norm_cdf(-6.0) - norm_cdf(-7.0);
        assert!(p > 0.0 && (p - reference).abs() < 1e-12 * reference.max(1e-300));
        // symmetric interval equals 2*Phi(1) - 1
        let sym = norm_interval(-1.0, 1.0);
        assert!((sym - 0.682_689_492_137_085_9).abs() < 1e-14);
        // empty and inverted intervals
        assert_eq!(norm_interval(1.0, 1.0), 0.0);
        assert_eq!(norm_interval(2.0, 1.0), 0.0);
    }

    #[test]
    fn quantile_extreme_tails_stay_finite() {
        let q = norm_quantile(1e-300);
        assert!(q.is_finite() && q < -30.0);
        let q = norm_quantile(1.0 - 1e-16);
        assert!(q.is_finite() && q > 8.0);
    }
}
