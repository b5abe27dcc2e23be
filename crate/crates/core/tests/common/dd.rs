//! Double-double arithmetic (about 106 significant bits) for checking the
//! f64 divergences. Only what the oracle needs: + − × ÷, sqrt, exp, ln.

use std::ops::{Add, Div, Mul, Neg, Sub};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DD {
    pub hi: f64,
    pub lo: f64,
}

fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    (s, b - (s - a))
}

fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

pub const LN2: DD = DD {
    hi: std::f64::consts::LN_2,
    lo: 2.319_046_813_846_299_6e-17,
};

impl DD {
    pub const ZERO: DD = DD { hi: 0.0, lo: 0.0 };
    pub const ONE: DD = DD { hi: 1.0, lo: 0.0 };

    pub fn from(x: f64) -> DD {
        DD { hi: x, lo: 0.0 }
    }

    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    pub fn mul_f64(self, b: f64) -> DD {
        let (p, e) = two_prod(self.hi, b);
        let (hi, lo) = quick_two_sum(p, e + self.lo * b);
        DD { hi, lo }
    }

    pub fn sqrt(self) -> DD {
        if self.hi <= 0.0 {
            return DD::ZERO;
        }
        let y = DD::from(self.hi.sqrt());
        // one Newton step doubles the 53 correct bits
        y + (self - y * y) / (y.mul_f64(2.0))
    }

    pub fn exp(self) -> DD {
        let k = (self.hi / LN2.hi).round();
        let r = self - LN2.mul_f64(k);
        // exp(r) = exp(r / 16)^16
        let s = r.mul_f64(1.0 / 16.0);
        let mut term = DD::ONE;
        let mut sum = DD::ONE;
        for i in 1..=24 {
            term = term * s / DD::from(i as f64);
            sum = sum + term;
        }
        for _ in 0..4 {
            sum = sum * sum;
        }
        sum.mul_f64(2f64.powi(k as i32))
    }

    pub fn ln(self) -> DD {
        assert!(self.hi > 0.0);
        let mut y = DD::from(self.hi.ln());
        for _ in 0..2 {
            y = y + self * (-y).exp() - DD::ONE;
        }
        y
    }

    pub fn log2(self) -> DD {
        self.ln() / LN2
    }
}

impl Add for DD {
    type Output = DD;
    fn add(self, b: DD) -> DD {
        let (s, e) = two_sum(self.hi, b.hi);
        let (t, f) = two_sum(self.lo, b.lo);
        let (s, e) = quick_two_sum(s, e + t);
        let (hi, lo) = quick_two_sum(s, e + f);
        DD { hi, lo }
    }
}

impl Neg for DD {
    type Output = DD;
    fn neg(self) -> DD {
        DD { hi: -self.hi, lo: -self.lo }
    }
}

impl Sub for DD {
    type Output = DD;
    fn sub(self, b: DD) -> DD {
        self + (-b)
    }
}

impl Mul for DD {
    type Output = DD;
    fn mul(self, b: DD) -> DD {
        let (p, e) = two_prod(self.hi, b.hi);
        let e = e + (self.hi * b.lo + self.lo * b.hi);
        let (hi, lo) = quick_two_sum(p, e);
        DD { hi, lo }
    }
}

impl Div for DD {
    type Output = DD;
    fn div(self, b: DD) -> DD {
        let q1 = self.hi / b.hi;
        let r = self - b.mul_f64(q1);
        let q2 = r.hi / b.hi;
        let r = r - b.mul_f64(q2);
        let q3 = r.hi / b.hi;
        let (hi, lo) = quick_two_sum(q1, q2);
        DD { hi, lo } + DD::from(q3)
    }
}

/// KL divergence in bits, evaluated in double-double.
pub fn kl_bits(q: &[f64], p: &[f64]) -> f64 {
    let mut total = DD::ZERO;
    for (&qi, &pi) in q.iter().zip(p) {
        if qi == 0.0 {
            continue;
        }
        if pi == 0.0 {
            return f64::INFINITY;
        }
        let ratio = DD::from(qi) / DD::from(pi);
        total = total + ratio.log2().mul_f64(qi);
    }
    total.to_f64()
}

/// Bhattacharyya distance `−log₂ Σ √(pq)` in double-double.
pub fn bhattacharyya_bits(p: &[f64], q: &[f64]) -> f64 {
    let mut coef = DD::ZERO;
    for (&a, &b) in p.iter().zip(q) {
        let (hi, lo) = two_prod(a, b);
        coef = coef + DD { hi, lo }.sqrt();
    }
    if coef.hi == 0.0 {
        return f64::INFINITY;
    }
    (-coef.log2()).to_f64()
}
