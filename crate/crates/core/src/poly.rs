//! Polynomials in three variables, stored as monomial/coefficient lists.

use serde::{Deserialize, Serialize};

use crate::surface::Vec3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Monomial(pub [u8; 3]);

impl Monomial {
    pub fn degree(&self) -> u32 {
        self.0.iter().map(|&e| e as u32).sum()
    }

    pub fn eval(&self, x: &Vec3) -> f64 {
        let [a, b, c] = self.0;
        x[0].powi(a as i32) * x[1].powi(b as i32) * x[2].powi(c as i32)
    }

    pub fn name(&self) -> String {
        let mut s = String::new();
        for (k, &e) in self.0.iter().enumerate() {
            match e {
                0 => {}
                1 => s.push_str(&format!("x{}", k + 1)),
                _ => s.push_str(&format!("x{}^{}", k + 1, e)),
            }
        }
        if s.is_empty() {
            s.push('1');
        }
        s
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Polynomial {
    pub terms: Vec<(Monomial, f64)>,
}

impl Polynomial {
    pub fn new(terms: Vec<(Monomial, f64)>) -> Self {
        Self { terms }
    }

    /// Linear combination of `basis` with coefficients `c`.
    pub fn combine(basis: &[Monomial], c: &[f64]) -> Self {
        Self { terms: basis.iter().copied().zip(c.iter().copied()).collect() }
    }

    pub fn degree(&self) -> u32 {
        self.terms.iter().filter(|(_, c)| *c != 0.0).map(|(m, _)| m.degree()).max().unwrap_or(0)
    }

    pub fn eval(&self, x: &Vec3) -> f64 {
        self.terms.iter().map(|(m, c)| c * m.eval(x)).sum()
    }

    pub fn shifted(&self, offset: f64) -> Self {
        let mut terms = self.terms.clone();
        terms.push((Monomial([0, 0, 0]), offset));
        Self { terms }
    }
}
