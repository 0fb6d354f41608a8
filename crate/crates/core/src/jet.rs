//! Third-order forward-mode derivatives.
//!
//! A [`Jet`] carries a value together with its first three derivatives with
//! respect to a single scalar parameter. Curves written generically over
//! `Jet` get exact `g'`, `g''` and `g'''` without hand-differentiating.

use std::ops::{Add, Div, Mul, Neg, Sub};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jet {
    /// `[f, f', f'', f''']`
    pub d: [f64; 4],
}

impl Jet {
    pub fn constant(value: f64) -> Self {
        Jet { d: [value, 0.0, 0.0, 0.0] }
    }

    /// The independent variable at `x`.
    pub fn variable(x: f64) -> Self {
        Jet { d: [x, 1.0, 0.0, 0.0] }
    }

    pub fn value(&self) -> f64 {
        self.d[0]
    }

    /// Compose with a scalar function given its value and three derivatives
    /// at `self.value()` (Faa di Bruno up to third order).
    fn compose(&self, phi: [f64; 4]) -> Self {
        let [_, f1, f2, f3] = self.d;
        Jet {
            d: [
                phi[0],
                phi[1] * f1,
                phi[2] * f1 * f1 + phi[1] * f2,
                phi[3] * f1 * f1 * f1 + 3.0 * phi[2] * f1 * f2 + phi[1] * f3,
            ],
        }
    }

    pub fn exp(self) -> Self {
        let e = self.d[0].exp();
        self.compose([e, e, e, e])
    }

    pub fn ln(self) -> Self {
        let x = self.d[0];
        self.compose([x.ln(), 1.0 / x, -1.0 / (x * x), 2.0 / (x * x * x)])
    }

    pub fn powf(self, p: f64) -> Self {
        let x = self.d[0];
        self.compose([
            x.powf(p),
            p * x.powf(p - 1.0),
            p * (p - 1.0) * x.powf(p - 2.0),
            p * (p - 1.0) * (p - 2.0) * x.powf(p - 3.0),
        ])
    }

    pub fn sqrt(self) -> Self {
        self.powf(0.5)
    }

    pub fn sin(self) -> Self {
        let (s, c) = self.d[0].sin_cos();
        self.compose([s, c, -s, -c])
    }

    pub fn cos(self) -> Self {
        let (s, c) = self.d[0].sin_cos();
        self.compose([c, -s, -c, s])
    }

    pub fn scale(self, k: f64) -> Self {
        Jet { d: self.d.map(|v| v * k) }
    }
}

impl From<f64> for Jet {
    fn from(value: f64) -> Self {
        Jet::constant(value)
    }
}

impl Add for Jet {
    type Output = Jet;
    fn add(self, rhs: Jet) -> Jet {
        Jet {
            d: [
                self.d[0] + rhs.d[0],
                self.d[1] + rhs.d[1],
                self.d[2] + rhs.d[2],
                self.d[3] + rhs.d[3],
            ],
        }
    }
}

impl Sub for Jet {
    type Output = Jet;
    fn sub(self, rhs: Jet) -> Jet {
        self + (-rhs)
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
    fn mul(self, rhs: Jet) -> Jet {
        let [a0, a1, a2, a3] = self.d;
        let [b0, b1, b2, b3] = rhs.d;
        Jet {
            d: [
                a0 * b0,
                a1 * b0 + a0 * b1,
                a2 * b0 + 2.0 * a1 * b1 + a0 * b2,
                a3 * b0 + 3.0 * a2 * b1 + 3.0 * a1 * b2 + a0 * b3,
            ],
        }
    }
}

impl Div for Jet {
    type Output = Jet;
    fn div(self, rhs: Jet) -> Jet {
        self * rhs.powf(-1.0)
    }
}

impl Add<f64> for Jet {
    type Output = Jet;
    fn add(self, rhs: f64) -> Jet {
        self + Jet::constant(rhs)
    }
}

impl Sub<f64> for Jet {
    type Output = Jet;
    fn sub(self, rhs: f64) -> Jet {
        self - Jet::constant(rhs)
    }
}

impl Mul<f64> for Jet {
    type Output = Jet;
    fn mul(self, rhs: f64) -> Jet {
        self.scale(rhs)
    }
}

impl Mul<Jet> for f64 {
    type Output = Jet;
    fn mul(self, rhs: Jet) -> Jet {
        rhs.scale(self)
    }
}
