//! Second-order jets: value, gradient and Hessian carried together through arithmetic.

use std::ops::{Add, Mul, Neg, Sub};

/// `(f, ∇f, D²f)` at one point. The Hessian is stored as its three distinct entries, so
/// symmetry holds by construction.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Jet {
    pub v: f64,
    pub gx: f64,
    pub gy: f64,
    pub hxx: f64,
    pub hxy: f64,
    pub hyy: f64,
}

impl Jet {
    pub const ZERO: Jet = Jet {
        v: 0.0,
        gx: 0.0,
        gy: 0.0,
        hxx: 0.0,
        hxy: 0.0,
        hyy: 0.0,
    };

    pub fn constant(c: f64) -> Jet {
        Jet { v: c, ..Jet::ZERO }
    }

    /// The coordinate function `x₁` evaluated at `x`.
    pub fn x(x: f64) -> Jet {
        Jet {
            v: x,
            gx: 1.0,
            ..Jet::ZERO
        }
    }

    /// The coordinate function `x₂` evaluated at `y`.
    pub fn y(y: f64) -> Jet {
        Jet {
            v: y,
            gy: 1.0,
            ..Jet::ZERO
        }
    }

    /// `φ ∘ self`, given `φ`, `φ'` and `φ''` at `self.v`.
    pub fn compose(self, d0: f64, d1: f64, d2: f64) -> Jet {
        Jet {
            v: d0,
            gx: d1 * self.gx,
            gy: d1 * self.gy,
            hxx: d2 * self.gx * self.gx + d1 * self.hxx,
            hxy: d2 * self.gx * self.gy + d1 * self.hxy,
            hyy: d2 * self.gy * self.gy + d1 * self.hyy,
        }
    }

    pub fn sin(self) -> Jet {
        let (s, c) = self.v.sin_cos();
        self.compose(s, c, -s)
    }

    pub fn cos(self) -> Jet {
        let (s, c) = self.v.sin_cos();
        self.compose(c, -s, -c)
    }

    pub fn powi(self, n: i32) -> Jet {
        let nf = n as f64;
        self.compose(
            self.v.powi(n),
            nf * self.v.powi(n - 1),
            nf * (nf - 1.0) * self.v.powi(n - 2),
        )
    }

    pub fn det_hessian(&self) -> f64 {
        self.hxx * self.hyy - self.hxy * self.hxy
    }
}

impl Add for Jet {
    type Output = Jet;
    fn add(self, o: Jet) -> Jet {
        Jet {
            v: self.v + o.v,
            gx: self.gx + o.gx,
            gy: self.gy + o.gy,
            hxx: self.hxx + o.hxx,
            hxy: self.hxy + o.hxy,
            hyy: self.hyy + o.hyy,
        }
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
        self * -1.0
    }
}

impl Mul<f64> for Jet {
    type Output = Jet;
    fn mul(self, s: f64) -> Jet {
        Jet {
            v: self.v * s,
            gx: self.gx * s,
            gy: self.gy * s,
            hxx: self.hxx * s,
            hxy: self.hxy * s,
            hyy: self.hyy * s,
        }
    }
}

impl Add<f64> for Jet {
    type Output = Jet;
    fn add(self, c: f64) -> Jet {
        Jet {
            v: self.v + c,
            ..self
        }
    }
}

impl Mul for Jet {
    type Output = Jet;
    fn mul(self, o: Jet) -> Jet {
        Jet {
            v: self.v * o.v,
            gx: self.gx * o.v + self.v * o.gx,
            gy: self.gy * o.v + self.v * o.gy,
            hxx: self.hxx * o.v + 2.0 * self.gx * o.gx + self.v * o.hxx,
            hxy: self.hxy * o.v + self.gx * o.gy + self.gy * o.gx + self.v * o.hxy,
            hyy: self.hyy * o.v + 2.0 * self.gy * o.gy + self.v * o.hyy,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn product_rule_on_xy() {
        let j = Jet::x(2.0) * Jet::y(3.0);
        assert_eq!((j.v, j.gx, j.gy), (6.0, 3.0, 2.0));
        assert_eq!((j.hxx, j.hxy, j.hyy), (0.0, 1.0, 0.0));
    }

    #[test]
    fn powi_matches_repeated_product() {
        let b = Jet::x(0.3) * Jet::y(-1.2) + Jet::x(0.3);
        let a = b.powi(3);
        let c = b * b * b;
        for (p, q) in [(a.v, c.v), (a.gx, c.gx), (a.hxy, c.hxy), (a.hyy, c.hyy)] {
            assert!((p - q).abs() < 1e-14);
        }
    }
}
