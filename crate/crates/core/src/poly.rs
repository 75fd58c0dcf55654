//! Dense univariate polynomials over [`Scalar`].

use serde::{Deserialize, Serialize};

use crate::scalar::Scalar;

/// Coefficients in increasing degree order; `Poly(vec![a, b, c])` is
/// `a + b x + c x^2`.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct Poly(pub Vec<Scalar>);

impl Poly {
    pub fn zero() -> Poly {
        Poly(vec![])
    }

    pub fn constant(c: Scalar) -> Poly {
        Poly(vec![c])
    }

    pub fn from_i64(coeffs: &[i64]) -> Poly {
        Poly(coeffs.iter().map(|&c| Scalar::int(c)).collect())
    }

    pub fn from_f64(coeffs: &[f64]) -> Poly {
        Poly(coeffs.iter().map(|&c| Scalar::real(c)).collect())
    }

    pub fn degree(&self) -> Option<usize> {
        self.0.iter().rposition(|c| !c.is_zero())
    }

    pub fn is_zero(&self) -> bool {
        self.degree().is_none()
    }

    pub fn eval(&self, x: &Scalar) -> Scalar {
        let mut acc = Scalar::zero();
        for c in self.0.iter().rev() {
            acc = acc * x + c;
        }
        acc
    }

    pub fn eval_f64(&self, x: f64) -> f64 {
        let mut acc = 0.0;
        for c in self.0.iter().rev() {
            acc = acc * x + c.to_f64();
        }
        acc
    }

    pub fn derivative(&self) -> Poly {
        if self.0.len() <= 1 {
            return Poly::zero();
        }
        Poly(
            self.0[1..]
                .iter()
                .enumerate()
                .map(|(i, c)| Scalar::int(i as i64 + 1) * c)
                .collect(),
        )
    }

    /// Antiderivative with zero constant term.
    pub fn antiderivative(&self) -> Poly {
        let mut out = Vec::with_capacity(self.0.len() + 1);
        out.push(Scalar::zero());
        for (i, c) in self.0.iter().enumerate() {
            out.push(c / Scalar::int(i as i64 + 1));
        }
        Poly(out)
    }

    pub fn definite_integral(&self, a: &Scalar, b: &Scalar) -> Scalar {
        let anti = self.antiderivative();
        anti.eval(b) - anti.eval(a)
    }

    /// Multiply by the monomial x^k.
    pub fn shift_up(&self, k: usize) -> Poly {
        if self.0.is_empty() {
            return Poly::zero();
        }
        let mut out = vec![Scalar::zero(); k];
        out.extend(self.0.iter().cloned());
        Poly(out)
    }

    pub fn scale(&self, s: &Scalar) -> Poly {
        Poly(self.0.iter().map(|c| c * s).collect())
    }

    pub fn add(&self, other: &Poly) -> Poly {
        let n = self.0.len().max(other.0.len());
        let mut out = Vec::with_capacity(n);
        for i in 0..n {
            let a = self.0.get(i).cloned().unwrap_or_else(Scalar::zero);
            let b = other.0.get(i).cloned().unwrap_or_else(Scalar::zero);
            out.push(a + b);
        }
        Poly(out)
    }

    pub fn neg(&self) -> Poly {
        Poly(self.0.iter().map(|c| -c).collect())
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        if self.0.is_empty() || other.0.is_empty() {
            return Poly::zero();
        }
        let mut out = vec![Scalar::zero(); self.0.len() + other.0.len() - 1];
        for (i, a) in self.0.iter().enumerate() {
            for (j, b) in other.0.iter().enumerate() {
                out[i + j] = &out[i + j] + &(a * b);
            }
        }
        Poly(out)
    }

    pub fn is_exact(&self) -> bool {
        self.0.iter().all(|c| c.is_exact())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eval_and_integrate() {
        // 1 - f on [0, 1]: integral 1/2, first moment integral of f(1-f) = 1/6
        let p = Poly::from_i64(&[1, -1]);
        assert_eq!(
            p.definite_integral(&Scalar::int(0), &Scalar::int(1)),
            Scalar::ratio(1, 2)
        );
        assert_eq!(
            p.shift_up(1)
                .definite_integral(&Scalar::int(0), &Scalar::int(1)),
            Scalar::ratio(1, 6)
        );
    }

    #[test]
    fn derivative_of_antiderivative() {
        let p = Poly::from_i64(&[3, 0, -2, 5]);
        assert_eq!(p.antiderivative().derivative(), p);
    }
}
