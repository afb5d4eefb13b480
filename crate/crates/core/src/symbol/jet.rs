//! Truncated Taylor series ("jets") for exact high-order derivatives.
//!
//! A jet at `x₀` stores `c_k = f^{(k)}(x₀) / k!` for `k < len`. Arithmetic
//! follows the usual recurrences, so composing jets differentiates exactly up
//! to rounding.

use std::ops::{Add, Div, Mul, Neg, Sub};

/// Maximum number of stored coefficients (derivatives `0..=15`).
pub const JET_CAPACITY: usize = 16;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Jet {
    c: [f64; JET_CAPACITY],
    len: usize,
}

impl Jet {
    /// The identity jet `x₀ + ε` carrying `order` derivatives.
    pub fn variable(x0: f64, order: usize) -> Self {
        let mut j = Jet::constant(x0, order);
        if order > 0 {
            j.c[1] = 1.0;
        }
        j
    }

    pub fn constant(v: f64, order: usize) -> Self {
        assert!(order < JET_CAPACITY, "jet order {order} exceeds capacity");
        let mut c = [0.0; JET_CAPACITY];
        c[0] = v;
        Jet { c, len: order + 1 }
    }

    pub fn order(&self) -> usize {
        self.len - 1
    }

    pub fn value(&self) -> f64 {
        self.c[0]
    }

    /// Taylor coefficient `f^{(k)}/k!`.
    pub fn coeff(&self, k: usize) -> f64 {
        if k < self.len {
            self.c[k]
        } else {
            0.0
        }
    }

    /// `f^{(k)}(x₀)`.
    pub fn derivative(&self, k: usize) -> f64 {
        self.coeff(k) * factorial(k)
    }

    pub fn derivatives(&self) -> Vec<f64> {
        (0..self.len).map(|k| self.derivative(k)).collect()
    }

    /// Same order, new constant value.
    pub fn lift(&self, v: f64) -> Self {
        Jet::constant(v, self.order())
    }

    pub fn scale(mut self, s: f64) -> Self {
        self.c[..self.len].iter_mut().for_each(|v| *v *= s);
        self
    }

    pub fn offset(mut self, s: f64) -> Self {
        self.c[0] += s;
        self
    }

    pub fn exp(&self) -> Self {
        // b' = a' b
        let mut b = self.lift(self.c[0].exp());
        for k in 1..self.len {
            let s: f64 = (1..=k).map(|j| j as f64 * self.c[j] * b.c[k - j]).sum();
            b.c[k] = s / k as f64;
        }
        b
    }

    pub fn ln(&self) -> Self {
        // a = e^b  ⇒  a' = a b'
        let mut b = self.lift(self.c[0].ln());
        for k in 1..self.len {
            let s: f64 = (1..k).map(|j| j as f64 * b.c[j] * self.c[k - j]).sum();
            b.c[k] = (self.c[k] - s / k as f64) / self.c[0];
        }
        b
    }

    pub fn recip(&self) -> Self {
        self.lift(1.0) / *self
    }

    pub fn powi(&self, n: i32) -> Self {
        if n < 0 {
            return self.powi(-n).recip();
        }
        let mut out = self.lift(1.0);
        for _ in 0..n {
            out = out * *self;
        }
        out
    }

    fn order_with(&self, other: &Self) -> usize {
        self.len.min(other.len)
    }
}

impl Add for Jet {
    type Output = Jet;
    fn add(self, o: Jet) -> Jet {
        let len = self.order_with(&o);
        let mut c = [0.0; JET_CAPACITY];
        for k in 0..len {
            c[k] = self.c[k] + o.c[k];
        }
        Jet { c, len }
    }
}

impl Sub for Jet {
    type Output = Jet;
    fn sub(self, o: Jet) -> Jet {
        self + (-o)
    }
}

impl Neg for Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.scale(-1.0)
    }
}

impl Mul for Jet {
    type Output = Jet;
    fn mul(self, o: Jet) -> Jet {
        let len = self.order_with(&o);
        let mut c = [0.0; JET_CAPACITY];
        for k in 0..len {
            c[k] = (0..=k).map(|j| self.c[j] * o.c[k - j]).sum();
        }
        Jet { c, len }
    }
}

impl Div for Jet {
    type Output = Jet;
    fn div(self, o: Jet) -> Jet {
        let len = self.order_with(&o);
        let mut c = [0.0; JET_CAPACITY];
        for k in 0..len {
            let s: f64 = (1..=k).map(|j| o.c[j] * c[k - j]).sum();
            c[k] = (self.c[k] - s) / o.c[0];
        }
        Jet { c, len }
    }
}

pub fn factorial(k: usize) -> f64 {
    (1..=k).map(|i| i as f64).product()
}
