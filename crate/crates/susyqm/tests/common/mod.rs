//! Fixed-point big-integer series evaluation, used as an independent
//! oracle for the f64 special functions. Values carry 60 decimal
//! digits; every operation is exact integer arithmetic except the final
//! truncation, so comparisons at 1e-12 have tens of digits of slack.

use num_bigint::BigInt;

pub const SCALE_DIGITS: u32 = 60;

pub fn unit() -> BigInt {
    BigInt::from(10).pow(SCALE_DIGITS)
}

pub fn from_int(n: i64) -> BigInt {
    BigInt::from(n) * unit()
}

pub fn mul(a: &BigInt, b: &BigInt) -> BigInt {
    a * b / unit()
}

pub fn div(a: &BigInt, b: &BigInt) -> BigInt {
    a * unit() / b
}

/// Decimal render then strtod, which rounds correctly to nearest.
pub fn to_f64(a: &BigInt) -> f64 {
    let negative = a.sign() == num_bigint::Sign::Minus;
    let mag = if negative { -a } else { a.clone() };
    let u = unit();
    let int_part = (&mag / &u).to_string();
    let frac_part = (&mag % &u).to_string();
    let pad = "0".repeat(SCALE_DIGITS as usize - frac_part.len());
    let s = format!("{int_part}.{pad}{frac_part}");
    let v: f64 = s.parse().expect("decimal render always parses");
    if negative {
        -v
    } else {
        v
    }
}

/// Integer Newton square root; input and output are plain integers.
fn isqrt(n: &BigInt) -> BigInt {
    if n.sign() == num_bigint::Sign::NoSign {
        return BigInt::from(0);
    }
    assert!(n.sign() == num_bigint::Sign::Plus, "isqrt of a negative number");
    let mut x = BigInt::from(1) << ((n.bits() + 1) / 2);
    loop {
        let y = (&x + n / &x) >> 1;
        if y >= x {
            return x;
        }
        x = y;
    }
}

/// √a in fixed point.
pub fn sqrt(a: &BigInt) -> BigInt {
    isqrt(&(a * unit()))
}

/// π to 60 digits.
pub fn pi() -> BigInt {
    let digits = "3141592653589793238462643383279502884197169399375105820974944592307816406286";
    digits[..(SCALE_DIGITS as usize + 1)]
        .parse()
        .expect("digit string parses")
}

/// Generalized hypergeometric sum with rational parameters (num, den)
/// and rational argument. The term recursion multiplies and divides by
/// exact integers, so only the 1e-60 truncation per step is lost.
pub fn pfq(a: &[(i64, i64)], b: &[(i64, i64)], x: (i64, i64), max_terms: usize) -> BigInt {
    let mut term = unit();
    let mut sum = unit();
    for m in 0..max_terms as i64 {
        for &(p, q) in a {
            term = term * (p + m * q) / q;
        }
        for &(p, q) in b {
            term = term * q / (p + m * q);
        }
        term = term * x.0 / (x.1 * (m + 1));
        if term.sign() == num_bigint::Sign::NoSign {
            return sum;
        }
        sum += &term;
    }
    panic!("series did not settle within {max_terms} terms");
}

/// erf at a rational point: (2/√π) Σ (-x²)^n x / (n! (2n+1)).
pub fn erf(x: (i64, i64)) -> BigInt {
    let x_fixed = div(&from_int(x.0), &from_int(x.1));
    let x2 = mul(&x_fixed, &x_fixed);
    let mut f = x_fixed; // x^(2n+1) (-1)^n / n!
    let mut sum = BigInt::from(0);
    let mut n: i64 = 0;
    loop {
        sum += &f / (2 * n + 1);
        n += 1;
        f = -mul(&f, &x2) / n;
        if f.sign() == num_bigint::Sign::NoSign {
            break;
        }
    }
    div(&(sum * 2), &sqrt(&pi()))
}

/// Coefficient magnitudes of the one-step natural tower at real z:
/// c_0 = 1/√(series), c_n = z c_{n-1} / √(n·n·(n+1)).
pub fn natural_k1_coefficients(z: (i64, i64), count: usize) -> Vec<BigInt> {
    let z2 = (z.0 * z.0, z.1 * z.1);
    let norm = pfq(&[], &[(1, 1), (2, 1)], z2, 400);
    let z_fixed = div(&from_int(z.0), &from_int(z.1));
    let mut c = div(&unit(), &sqrt(&norm));
    let mut out = vec![c.clone()];
    for n in 1..count as i64 {
        let step = sqrt(&from_int(n * n * (n + 1)));
        c = div(&mul(&z_fixed, &c), &step);
        out.push(c.clone());
    }
    out
}
