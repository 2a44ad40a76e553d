//! Special functions backing the factorization-energy seed solutions.
//!
//! The workhorse is the confluent hypergeometric series M(a, b; z).  Seed
//! solutions combine two such series in a bracket whose dominant growing
//! parts cancel on the recessive branch, so the series here accumulate in
//! double-double arithmetic and report how many digits the cancellation
//! consumed.  Callers see plain f64/Complex64 values plus diagnostics.

use crate::dd::{Cdd, Dd};
use crate::error::{Error, Result};
use num_complex::Complex64;
use std::f64::consts::PI;

/// Hard cap on series length.
pub const MAX_TERMS: usize = 5000;

/// Relative tolerance the public series results are good to, provided
/// `digits_lost` stays under [`MAX_DIGITS_LOST`].
pub const SERIES_RTOL: f64 = 1e-11;

/// Internal double-double stop criterion.  Much tighter than the public
/// tolerance on purpose: a term-level stop at 1e-14 would leave a truncated
/// tail of that size in brackets that later cancel 15+ digits, silently
/// destroying the result.  Stopping at the dd noise floor costs a handful
/// of extra terms and keeps the full 31 digits in play.
const DD_TERM_STOP: f64 = 1e-33;

/// Past this many digits lost to cancellation the double-double result no
/// longer guarantees [`SERIES_RTOL`]; treat it as failure.
pub const MAX_DIGITS_LOST: f64 = 25.0;

/// Value of a truncated series together with convergence diagnostics.
#[derive(Debug, Clone, Copy)]
pub struct SeriesResult<T> {
    pub value: T,
    pub terms_used: usize,
    /// True when the stop came from the tolerance test or exact
    /// polynomial termination rather than the term budget.
    pub converged: bool,
    /// log10 of (peak partial sum / final sum): decimal digits eaten by
    /// cancellation inside the accumulation.
    pub digits_lost: f64,
}

const LANCZOS_G: f64 = 4.7421875; // 607/128

// Godfrey's 15-term coefficient set for g = 607/128; good to ~13 digits
// over the right half plane.
const LANCZOS_C: [f64; 15] = [
    0.99999999999999709182,
    57.156235665862923517,
    -59.597960355475491248,
    14.136097974741747174,
    -0.49191381609762019978,
    0.33994649984811888699e-4,
    0.46523628927048575665e-4,
    -0.98374475304879564677e-4,
    0.15808870322491248884e-3,
    -0.21026444172410488319e-3,
    0.21743961811521264320e-3,
    -0.16431810653676389022e-3,
    0.84418223983852743293e-4,
    -0.26190838401581408670e-4,
    0.36899182659531622704e-5,
];

fn is_nonpositive_integer(x: f64) -> bool {
    x <= 0.0 && x.fract() == 0.0
}

/// Complex gamma function, Lanczos approximation with reflection for
/// Re z < 1/2.  Relative accuracy ~1e-13.
pub fn gamma(z: Complex64) -> Result<Complex64> {
    if z.im == 0.0 && is_nonpositive_integer(z.re) {
        return Err(Error::GammaPole(z.re));
    }
    if z.re < 0.5 {
        let s = (Complex64::new(PI, 0.0) * z).sin();
        let g = gamma(Complex64::new(1.0, 0.0) - z)?;
        return Ok(Complex64::new(PI, 0.0) / (s * g));
    }
    let zm = z - 1.0;
    let mut a = Complex64::new(LANCZOS_C[0], 0.0);
    for (k, &c) in LANCZOS_C.iter().enumerate().skip(1) {
        a += c / (zm + k as f64);
    }
    let t = zm + LANCZOS_G + 0.5;
    let half_log_2pi = 0.5 * (2.0 * PI).ln();
    // log form avoids overflow of t^(zm+1/2) for moderate |z|
    let log = (zm + 0.5) * t.ln() - t + half_log_2pi + a.ln();
    Ok(log.exp())
}

/// Gamma on the real line.
pub fn gamma_real(x: f64) -> Result<f64> {
    gamma(Complex64::new(x, 0.0)).map(|g| g.re)
}

/// Error function by its all-positive-term Taylor rearrangement
/// erf(x) = (2x/sqrt(pi)) e^{-x^2} sum_n (2x^2)^n / (2n+1)!!.
/// No cancellation anywhere, so plain f64 gives ~5e-15.
/// Saturates to +-1 for |x| >= 6.5 where 1-|erf| < 4e-20, under one ulp.
pub fn erf(x: f64) -> f64 {
    if x < 0.0 {
        return -erf(-x);
    }
    if x >= 6.5 {
        return 1.0;
    }
    let y = 2.0 * x * x;
    let mut term = 1.0f64;
    let mut sum = 1.0f64;
    let mut n = 0usize;
    while term > 1e-18 * sum {
        n += 1;
        term *= y / (2 * n + 1) as f64;
        sum += term;
    }
    (2.0 / PI.sqrt()) * x * (-x * x).exp() * sum
}

/// Double-double Kummer series; returns (sum, terms, digits_lost).
/// Terminates exactly when `a` is a non-positive integer (polynomial case).
pub(crate) fn kummer_series_dd(a: Cdd, b: Cdd, z: Cdd) -> Result<(Cdd, usize, f64)> {
    let b_f = Complex64::new(b.re.to_f64(), b.im.to_f64());
    if b_f.im == 0.0 && is_nonpositive_integer(b_f.re) {
        return Err(Error::GammaPole(b_f.re));
    }
    let mut term = Cdd::ONE;
    let mut sum = Cdd::ONE;
    let mut peak = 1.0f64;
    for n in 0..MAX_TERMS {
        let nf = n as f64;
        let num = a.add(Cdd::from_f64(nf, 0.0)).mul(z);
        let den = b.add(Cdd::from_f64(nf, 0.0)).mul_f64(nf + 1.0);
        term = term.mul(num).div(den);
        if term.mag() == 0.0 {
            // polynomial: (a)_n hit zero
            let lost = digits_lost(peak, sum.mag());
            return Ok((sum, n + 1, lost));
        }
        sum = sum.add(term);
        peak = peak.max(sum.mag()).max(term.mag());
        if term.mag() <= DD_TERM_STOP * sum.mag().max(f64::MIN_POSITIVE) {
            let lost = digits_lost(peak, sum.mag());
            return Ok((sum, n + 1, lost));
        }
    }
    Err(Error::NoConvergence { terms: MAX_TERMS })
}

fn digits_lost(peak: f64, final_mag: f64) -> f64 {
    if final_mag == 0.0 {
        return f64::INFINITY;
    }
    (peak / final_mag).log10().max(0.0)
}

/// Confluent hypergeometric M(a, b; z) for complex parameters.
///
/// Accumulates in double-double and fails with `PrecisionLoss` once
/// cancellation leaves fewer than ~6 trustworthy digits; otherwise the
/// value is good to [`SERIES_RTOL`].
pub fn kummer_1f1(a: Complex64, b: Complex64, z: Complex64) -> Result<SeriesResult<Complex64>> {
    let (s, terms, lost) = kummer_series_dd(
        Cdd::from_f64(a.re, a.im),
        Cdd::from_f64(b.re, b.im),
        Cdd::from_f64(z.re, z.im),
    )?;
    if lost > MAX_DIGITS_LOST {
        return Err(Error::PrecisionLoss { digits_lost: lost });
    }
    Ok(SeriesResult {
        value: Complex64::new(s.re.to_f64(), s.im.to_f64()),
        terms_used: terms,
        converged: true,
        digits_lost: lost,
    })
}

/// Generalized hypergeometric pFq with real parameters and argument,
/// double-double accumulation.  Negative-integer upper parameters
/// terminate the series exactly; non-positive-integer lower parameters
/// are poles unless the series terminates first.
pub fn pfq(a: &[f64], b: &[f64], x: f64) -> Result<SeriesResult<f64>> {
    let mut term = Dd::ONE;
    let mut sum = Dd::ONE;
    let mut peak = 1.0f64;
    for n in 0..MAX_TERMS {
        let nf = n as f64;
        let mut num = Dd::from_f64(x);
        for &ai in a {
            num = num.mul_f64(ai + nf);
        }
        if num.to_f64() == 0.0 {
            let lost = digits_lost(peak, sum.to_f64().abs());
            return Ok(SeriesResult {
                value: sum.to_f64(),
                terms_used: n + 1,
                converged: true,
                digits_lost: lost,
            });
        }
        let mut den = Dd::from_f64(nf + 1.0);
        for &bj in b {
            if bj + nf == 0.0 {
                return Err(Error::GammaPole(bj));
            }
            den = den.mul_f64(bj + nf);
        }
        term = term.mul(num).div(den);
        sum = sum.add(term);
        let mag = sum.to_f64().abs();
        peak = peak.max(mag).max(term.to_f64().abs());
        if term.to_f64().abs() <= DD_TERM_STOP * mag.max(f64::MIN_POSITIVE) {
            let lost = digits_lost(peak, mag);
            if lost > MAX_DIGITS_LOST {
                return Err(Error::PrecisionLoss { digits_lost: lost });
            }
            return Ok(SeriesResult {
                value: sum.to_f64(),
                terms_used: n + 1,
                converged: true,
                digits_lost: lost,
            });
        }
    }
    Err(Error::NoConvergence { terms: MAX_TERMS })
}

/// Physicists' Hermite polynomial H_n(x) by the three-term recurrence.
/// Stable for the n <= 200 we ever ask for.
pub fn hermite(n: usize, x: f64) -> f64 {
    assert!(n <= 200, "Hermite recurrence only validated up to n = 200");
    if n == 0 {
        return 1.0;
    }
    let mut hm = 1.0; // H_0
    let mut h = 2.0 * x; // H_1
    for k in 1..n {
        let next = 2.0 * x * h - 2.0 * (k as f64) * hm;
        hm = h;
        h = next;
    }
    h
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn gamma_matches_factorials() {
        for (z, want) in [(1.0, 1.0), (2.0, 1.0), (3.0, 2.0), (5.0, 24.0), (8.0, 5040.0)] {
            let g = gamma_real(z).unwrap();
            assert_relative_eq!(g, want, max_relative = 1e-12);
        }
    }

    #[test]
    fn gamma_half_integers() {
        let sqrt_pi = PI.sqrt();
        assert_relative_eq!(gamma_real(0.5).unwrap(), sqrt_pi, max_relative = 1e-12);
        assert_relative_eq!(gamma_real(1.5).unwrap(), 0.5 * sqrt_pi, max_relative = 1e-12);
        // reflection path
        assert_relative_eq!(gamma_real(-0.5).unwrap(), -2.0 * sqrt_pi, max_relative = 1e-12);
        assert_relative_eq!(
            gamma_real(-1.5).unwrap(),
            4.0 / 3.0 * sqrt_pi,
            max_relative = 1e-12
        );
    }

    #[test]
    fn gamma_rejects_poles() {
        for z in [0.0, -1.0, -2.0, -7.0] {
            assert!(gamma(Complex64::new(z, 0.0)).is_err());
        }
    }

    #[test]
    fn gamma_on_critical_line_has_known_modulus() {
        // |Gamma(1/2 + it)|^2 = pi / cosh(pi t)
        for t in [0.3, 1.0, 2.5] {
            let g = gamma(Complex64::new(0.5, t)).unwrap();
            let want = (PI / (PI * t).cosh()).sqrt();
            assert_relative_eq!(g.norm(), want, max_relative = 1e-12);
        }
    }

    #[test]
    fn gamma_recurrence_holds_for_complex_argument() {
        // Gamma(z+1) = z Gamma(z), including through the reflection branch
        for z in [
            Complex64::new(0.25, 0.7),
            Complex64::new(-2.45, -0.025),
            Complex64::new(3.2, 1.1),
        ] {
            let g1 = gamma(z + 1.0).unwrap();
            let g0 = gamma(z).unwrap();
            assert_relative_eq!((g1 / g0).re, z.re, max_relative = 1e-11, epsilon = 1e-12);
            assert_relative_eq!((g1 / g0).im, z.im, max_relative = 1e-11, epsilon = 1e-12);
        }
    }

    #[test]
    fn erf_is_odd_and_saturates() {
        assert_eq!(erf(0.0), 0.0);
        assert_eq!(erf(7.0), 1.0);
        assert_eq!(erf(-7.0), -1.0);
        for x in [0.3, 1.1, 2.7] {
            assert_relative_eq!(erf(-x), -erf(x), max_relative = 1e-15);
        }
    }

    #[test]
    fn erf_derivative_from_difference_quotient() {
        // d/dx erf = 2/sqrt(pi) e^{-x^2}; the quotient itself is
        // cancellation-limited near saturation, hence the loose 1e-6
        let h = 1e-5;
        for x in [0.5, 1.5, 3.0] {
            let fd = (erf(x + h) - erf(x - h)) / (2.0 * h);
            let exact = 2.0 / PI.sqrt() * (-x * x).exp();
            assert_relative_eq!(fd, exact, max_relative = 1e-6);
        }
    }

    #[test]
    fn kummer_reduces_to_exponential_when_a_equals_b() {
        for x in [0.5, -2.0, 4.0] {
            let r = kummer_1f1(
                Complex64::new(0.75, 0.0),
                Complex64::new(0.75, 0.0),
                Complex64::new(x, 0.0),
            )
            .unwrap();
            assert_relative_eq!(r.value.re, x.exp(), max_relative = 1e-13);
            assert!(r.converged);
        }
    }

    #[test]
    fn kummer_terminates_on_negative_integer_a() {
        // M(-2, 1/2; y) = 1 - 4y + 4y^2/3
        let y = 1.7;
        let r = kummer_1f1(
            Complex64::new(-2.0, 0.0),
            Complex64::new(0.5, 0.0),
            Complex64::new(y, 0.0),
        )
        .unwrap();
        assert_eq!(r.terms_used, 3);
        assert_relative_eq!(r.value.re, 1.0 - 4.0 * y + 4.0 * y * y / 3.0, max_relative = 1e-14);
    }

    #[test]
    fn kummer_odd_builder_matches_erf_identity() {
        // x M(1/2, 3/2; -x^2) = sqrt(pi)/2 erf(x)
        for x in [0.4, 1.3, 2.2] {
            let r = kummer_1f1(
                Complex64::new(0.5, 0.0),
                Complex64::new(1.5, 0.0),
                Complex64::new(-x * x, 0.0),
            )
            .unwrap();
            assert_relative_eq!(x * r.value.re, PI.sqrt() / 2.0 * erf(x), max_relative = 1e-12);
        }
    }

    #[test]
    fn kummer_survives_heavy_cancellation_at_negative_argument() {
        // M(a, b; -40) for generic a is a brutal alternating sum in f64;
        // dd keeps it honest. Check against Kummer's transformation
        // M(a, b; z) = e^z M(b-a, b; -z) whose right side is all-positive.
        let a = Complex64::new(0.3, 0.0);
        let b = Complex64::new(1.5, 0.0);
        let z = 40.0;
        let left = kummer_1f1(a, b, Complex64::new(-z, 0.0)).unwrap();
        let right = kummer_1f1(b - a, b, Complex64::new(z, 0.0)).unwrap();
        assert!(left.digits_lost > 10.0, "expected real cancellation, got {}", left.digits_lost);
        assert_relative_eq!(left.value.re, (-z).exp() * right.value.re, max_relative = 1e-9);
    }

    #[test]
    fn kummer_complex_parameters_stay_conjugate_symmetric() {
        let a = Complex64::new(-2.45, -0.025);
        let b = Complex64::new(0.5, 0.0);
        let z = Complex64::new(9.0, 0.0);
        let r = kummer_1f1(a, b, z).unwrap();
        let rc = kummer_1f1(a.conj(), b, z).unwrap();
        assert_relative_eq!(r.value.re, rc.value.re, max_relative = 1e-12);
        assert_relative_eq!(r.value.im, -rc.value.im, max_relative = 1e-12);
    }

    #[test]
    fn pfq_0f0_is_exponential_and_1f1_matches_kummer() {
        let x = 2.3;
        let e = pfq(&[], &[], x).unwrap();
        assert_relative_eq!(e.value, x.exp(), max_relative = 1e-14);
        let m = pfq(&[0.7], &[1.9], x).unwrap();
        let k = kummer_1f1(
            Complex64::new(0.7, 0.0),
            Complex64::new(1.9, 0.0),
            Complex64::new(x, 0.0),
        )
        .unwrap();
        assert_relative_eq!(m.value, k.value.re, max_relative = 1e-13);
    }

    #[test]
    fn pfq_rejects_nonpositive_integer_lower_parameter() {
        assert!(pfq(&[0.5], &[-1.0], 0.3).is_err());
        // ... unless an upper parameter terminates the series first
        let r = pfq(&[-1.0], &[-2.0], 0.3).unwrap();
        assert_relative_eq!(r.value, 1.0 + 0.15, max_relative = 1e-14);
    }

    #[test]
    fn hermite_low_orders_are_exact() {
        let x = 0.83;
        assert_eq!(hermite(0, x), 1.0);
        assert_eq!(hermite(1, x), 2.0 * x);
        assert_relative_eq!(hermite(2, x), 4.0 * x * x - 2.0, max_relative = 1e-15);
        assert_relative_eq!(
            hermite(5, x),
            32.0 * x.powi(5) - 160.0 * x.powi(3) + 120.0 * x,
            max_relative = 1e-13
        );
    }

    #[test]
    fn hermite_satisfies_derivative_relation() {
        // H_n'(x) = 2n H_{n-1}(x), checked by central differences
        let h = 1e-6;
        for n in [3usize, 7, 12] {
            for x in [-1.7, 0.4, 2.9] {
                let fd = (hermite(n, x + h) - hermite(n, x - h)) / (2.0 * h);
                let exact = 2.0 * n as f64 * hermite(n - 1, x);
                assert_relative_eq!(fd, exact, max_relative = 1e-6);
            }
        }
    }
}
