//! Double-double arithmetic: ~31 significant digits from pairs of f64.
//!
//! The confluent-hypergeometric seed solutions combine two Kummer series
//! whose leading exponential parts cancel on the recessive branch; at the
//! domain edge the cancellation eats 15-20 digits, past what f64 holds.
//! All series accumulation therefore runs on these error-free-transform
//! pairs.  Only `hi + lo` ever leaves this module.
//!
//! Algorithms are the standard Dekker/Knuth error-free transforms; the
//! product splitting uses fused multiply-add, which every target we care
//! about lowers to a native instruction.

/// Unevaluated sum `hi + lo` with `|lo| <= ulp(hi)/2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dd {
    pub hi: f64,
    pub lo: f64,
}

/// Error-free sum of two arbitrary f64.
#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    let err = (a - (s - bb)) + (b - bb);
    (s, err)
}

/// Error-free sum assuming |a| >= |b|.
#[inline]
fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let err = b - (s - a);
    (s, err)
}

/// Error-free product via FMA.
#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    let err = a.mul_add(b, -p);
    (p, err)
}

impl Dd {
    pub const ZERO: Dd = Dd { hi: 0.0, lo: 0.0 };
    pub const ONE: Dd = Dd { hi: 1.0, lo: 0.0 };

    #[inline]
    pub fn from_f64(x: f64) -> Dd {
        Dd { hi: x, lo: 0.0 }
    }

    /// Renormalized constructor for a raw (hi, lo) pair.
    #[inline]
    pub fn new(hi: f64, lo: f64) -> Dd {
        let (s, e) = quick_two_sum(hi, lo);
        Dd { hi: s, lo: e }
    }

    #[inline]
    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    #[inline]
    pub fn neg(self) -> Dd {
        Dd { hi: -self.hi, lo: -self.lo }
    }

    #[inline]
    pub fn add(self, b: Dd) -> Dd {
        let (s1, s2) = two_sum(self.hi, b.hi);
        let (t1, t2) = two_sum(self.lo, b.lo);
        let (s1, s2b) = quick_two_sum(s1, s2 + t1);
        Dd::new(s1, s2b + t2)
    }

    #[inline]
    pub fn sub(self, b: Dd) -> Dd {
        self.add(b.neg())
    }

    #[inline]
    pub fn add_f64(self, b: f64) -> Dd {
        let (s1, s2) = two_sum(self.hi, b);
        Dd::new(s1, s2 + self.lo)
    }

    #[inline]
    pub fn mul(self, b: Dd) -> Dd {
        let (p1, p2) = two_prod(self.hi, b.hi);
        let p2 = p2 + self.hi * b.lo + self.lo * b.hi;
        Dd::new(p1, p2)
    }

    #[inline]
    pub fn mul_f64(self, b: f64) -> Dd {
        let (p1, p2) = two_prod(self.hi, b);
        Dd::new(p1, p2 + self.lo * b)
    }

    /// Full-precision quotient: one f64 estimate plus two Newton corrections.
    #[inline]
    pub fn div(self, b: Dd) -> Dd {
        let q1 = self.hi / b.hi;
        let r = self.sub(b.mul_f64(q1));
        let q2 = r.hi / b.hi;
        let r = r.sub(b.mul_f64(q2));
        let q3 = r.hi / b.hi;
        Dd::new(q1, q2).add_f64(q3)
    }

    #[inline]
    pub fn sqr(self) -> Dd {
        self.mul(self)
    }
}

/// Complex number with double-double components.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cdd {
    pub re: Dd,
    pub im: Dd,
}

impl Cdd {
    pub const ZERO: Cdd = Cdd { re: Dd::ZERO, im: Dd::ZERO };
    pub const ONE: Cdd = Cdd { re: Dd::ONE, im: Dd::ZERO };

    #[inline]
    pub fn from_f64(re: f64, im: f64) -> Cdd {
        Cdd { re: Dd::from_f64(re), im: Dd::from_f64(im) }
    }

    #[inline]
    pub fn add(self, b: Cdd) -> Cdd {
        Cdd { re: self.re.add(b.re), im: self.im.add(b.im) }
    }

    #[inline]
    pub fn sub(self, b: Cdd) -> Cdd {
        Cdd { re: self.re.sub(b.re), im: self.im.sub(b.im) }
    }

    #[inline]
    pub fn mul(self, b: Cdd) -> Cdd {
        Cdd {
            re: self.re.mul(b.re).sub(self.im.mul(b.im)),
            im: self.re.mul(b.im).add(self.im.mul(b.re)),
        }
    }

    #[inline]
    pub fn mul_f64(self, b: f64) -> Cdd {
        Cdd { re: self.re.mul_f64(b), im: self.im.mul_f64(b) }
    }

    /// Quotient via conjugate multiply; |b|^2 kept in double-double.
    #[inline]
    pub fn div(self, b: Cdd) -> Cdd {
        let denom = b.re.sqr().add(b.im.sqr());
        let num = self.mul(Cdd { re: b.re, im: b.im.neg() });
        Cdd { re: num.re.div(denom), im: num.im.div(denom) }
    }

    /// Cheap magnitude bound (max norm), enough for convergence tests.
    #[inline]
    pub fn mag(self) -> f64 {
        self.re.hi.abs().max(self.im.hi.abs())
    }
}
