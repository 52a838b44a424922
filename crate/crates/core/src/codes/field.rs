//! Arithmetic in GF(2^m) with a polynomial basis, for m ≤ 16.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BinaryExtField {
    degree: u32,
    // includes the x^degree term
    modulus: u32,
}

impl BinaryExtField {
    /// Builds the field and checks that `x` generates its multiplicative
    /// group, i.e. that `modulus` is primitive.
    pub fn new(degree: u32, modulus: u32) -> Result<Self> {
        if !(1..=16).contains(&degree) || modulus >> degree != 1 {
            return Err(Error::ConstructionFailure(format!(
                "modulus {modulus:#x} does not have degree {degree}"
            )));
        }
        let field = Self { degree, modulus };
        if field.order_of_x() != Some(field.group_order()) {
            return Err(Error::ConstructionFailure(format!(
                "modulus {modulus:#x} is not primitive over GF(2^{degree})"
            )));
        }
        Ok(field)
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn group_order(&self) -> u32 {
        (1 << self.degree) - 1
    }

    pub fn mul(&self, mut a: u32, mut b: u32) -> u32 {
        let top = 1 << self.degree;
        let mut acc = 0;
        while b != 0 {
            if b & 1 == 1 {
                acc ^= a;
            }
            b >>= 1;
            a <<= 1;
            if a & top != 0 {
                a ^= self.modulus;
            }
        }
        acc
    }

    pub fn pow(&self, base: u32, mut e: u64) -> u32 {
        let mut result = 1;
        let mut b = base;
        while e > 0 {
            if e & 1 == 1 {
                result = self.mul(result, b);
            }
            b = self.mul(b, b);
            e >>= 1;
        }
        result
    }

    /// `α^i` for `i` in `0..2^m − 1`, where `α = x`.
    pub fn powers_of_generator(&self) -> Vec<u32> {
        let mut out = Vec::with_capacity(self.group_order() as usize);
        let mut v = 1;
        for _ in 0..self.group_order() {
            out.push(v);
            v = self.mul(v, 2);
        }
        out
    }

    /// Multiplicative order of `x`, checked against the prime factors of the
    /// group order. `None` if `x` is not invertible.
    fn order_of_x(&self) -> Option<u32> {
        let n = self.group_order();
        if self.pow(2, n as u64) != 1 {
            return None;
        }
        let mut order = n;
        for p in prime_factors(n) {
            while order.is_multiple_of(p) && self.pow(2, (order / p) as u64) == 1 {
                order /= p;
            }
        }
        Some(order)
    }
}

fn prime_factors(mut n: u32) -> Vec<u32> {
    let mut out = Vec::new();
    let mut p = 2;
    while p * p <= n {
        if n.is_multiple_of(p) {
            out.push(p);
            while n.is_multiple_of(p) {
                n /= p;
            }
        }
        p += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn known_primitive_polynomials_accepted() {
        assert!(BinaryExtField::new(6, 0b100_0011).is_ok());
        assert!(BinaryExtField::new(12, 0x1053).is_ok());
    }

    #[test]
    fn non_primitive_polynomial_rejected() {
        // x^4 + x^3 + x^2 + x + 1 is irreducible but x has order 5
        assert!(matches!(
            BinaryExtField::new(4, 0b1_1111),
            Err(Error::ConstructionFailure(_))
        ));
        // x^6 + 1 is reducible, x has order 6
        assert!(BinaryExtField::new(6, 0b100_0001).is_err());
    }

    #[test]
    fn powers_cover_every_nonzero_element_once() {
        let f = BinaryExtField::new(6, 0b100_0011).unwrap();
        let mut seen = [false; 64];
        for v in f.powers_of_generator() {
            assert!(!seen[v as usize]);
            seen[v as usize] = true;
        }
        assert!(!seen[0]);
        assert_eq!(seen.iter().filter(|&&s| s).count(), 63);
    }

    #[test]
    fn multiplication_is_consistent_with_powers() {
        let f = BinaryExtField::new(12, 0x1053).unwrap();
        let pw = f.powers_of_generator();
        for (i, j) in [(0, 5), (100, 3000), (4094, 1), (2047, 2048)] {
            assert_eq!(f.mul(pw[i], pw[j]), pw[(i + j) % 4095]);
        }
    }
}
