//! Polynomial arithmetic in `Z_q[X]/(u)` for a monic modulus polynomial `u`.

use crate::arith::{add_mod, mul_mod, reduce_signed, sub_mod};
use crate::error::{AcesError, Result};

/// An element of `Z_q[X]_u`: exactly `deg(u)` canonical coefficients,
/// lowest degree first.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RingPoly {
    coeffs: Vec<u64>,
}

impl RingPoly {
    pub fn coeffs(&self) -> &[u64] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<u64> {
        self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0)
    }
}

/// The ring `Z_q[X]/(u)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuotientRing {
    q: u64,
    // monic, length d + 1, reduced mod q
    u: Vec<u64>,
}

/// Binary and unary operations exposed through [`poly_ops`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PolyOp {
    Add,
    Sub,
    Mul,
    /// Negation of the left operand; the right operand is ignored.
    Neg,
}

impl QuotientRing {
    /// `u` is given over `Z`, lowest degree first, and must be monic of
    /// degree at least one.
    pub fn new(q: u64, u: &[i64]) -> Result<Self> {
        if q < 2 {
            return Err(AcesError::Parameter(format!(
                "modulus q = {q} must be >= 2"
            )));
        }
        match u.last() {
            Some(1) if u.len() >= 2 => {}
            _ => {
                return Err(AcesError::Parameter(
                    "modulus polynomial must be monic of degree >= 1".into(),
                ))
            }
        }
        let u = u.iter().map(|&c| reduce_signed(c as i128, q)).collect();
        Ok(QuotientRing { q, u })
    }

    pub fn q(&self) -> u64 {
        self.q
    }

    pub fn degree(&self) -> usize {
        self.u.len() - 1
    }

    pub fn zero(&self) -> RingPoly {
        RingPoly {
            coeffs: vec![0; self.degree()],
        }
    }

    pub fn constant(&self, c: u64) -> RingPoly {
        let mut p = self.zero();
        p.coeffs[0] = c % self.q;
        p
    }

    pub fn one(&self) -> RingPoly {
        self.constant(1)
    }

    /// Validates a coefficient vector as a canonical element of this ring.
    pub fn from_coeffs(&self, coeffs: Vec<u64>) -> Result<RingPoly> {
        if coeffs.len() != self.degree() {
            return Err(AcesError::Dimension {
                what: "polynomial length",
                expected: self.degree(),
                found: coeffs.len(),
            });
        }
        if let Some(&c) = coeffs.iter().find(|&&c| c >= self.q) {
            return Err(AcesError::Parameter(format!(
                "coefficient {c} is not canonical mod {}",
                self.q
            )));
        }
        Ok(RingPoly { coeffs })
    }

    /// Reduces an arbitrary integer coefficient vector (any length) into the ring.
    pub fn reduce(&self, coeffs: &[i128]) -> RingPoly {
        let mut work: Vec<u64> = coeffs.iter().map(|&c| reduce_signed(c, self.q)).collect();
        self.reduce_in_place(&mut work);
        RingPoly { coeffs: work }
    }

    pub fn check(&self, a: &RingPoly) -> Result<()> {
        if a.coeffs.len() != self.degree() {
            return Err(AcesError::Parameter(format!(
                "polynomial of length {} does not belong to a ring of degree {}",
                a.coeffs.len(),
                self.degree()
            )));
        }
        if a.coeffs.iter().any(|&c| c >= self.q) {
            return Err(AcesError::Parameter(format!(
                "polynomial has non-canonical coefficients mod {}",
                self.q
            )));
        }
        Ok(())
    }

    pub fn add(&self, a: &RingPoly, b: &RingPoly) -> RingPoly {
        debug_assert_eq!(a.coeffs.len(), b.coeffs.len());
        RingPoly {
            coeffs: a
                .coeffs
                .iter()
                .zip(&b.coeffs)
                .map(|(&x, &y)| add_mod(x, y, self.q))
                .collect(),
        }
    }

    pub fn sub(&self, a: &RingPoly, b: &RingPoly) -> RingPoly {
        debug_assert_eq!(a.coeffs.len(), b.coeffs.len());
        RingPoly {
            coeffs: a
                .coeffs
                .iter()
                .zip(&b.coeffs)
                .map(|(&x, &y)| sub_mod(x, y, self.q))
                .collect(),
        }
    }

    pub fn neg(&self, a: &RingPoly) -> RingPoly {
        RingPoly {
            coeffs: a.coeffs.iter().map(|&x| sub_mod(0, x, self.q)).collect(),
        }
    }

    pub fn scale(&self, a: &RingPoly, s: u64) -> RingPoly {
        RingPoly {
            coeffs: a.coeffs.iter().map(|&x| mul_mod(x, s, self.q)).collect(),
        }
    }

    /// Schoolbook product followed by Euclidean division by the monic `u`.
    pub fn mul(&self, a: &RingPoly, b: &RingPoly) -> RingPoly {
        let d = self.degree();
        let q = self.q as u128;
        let mut acc = vec![0u128; 2 * d - 1];
        for (i, &x) in a.coeffs.iter().enumerate() {
            if x == 0 {
                continue;
            }
            for (j, &y) in b.coeffs.iter().enumerate() {
                acc[i + j] += (x as u128 * y as u128) % q;
            }
        }
        let mut work: Vec<u64> = acc.into_iter().map(|c| (c % q) as u64).collect();
        self.reduce_in_place(&mut work);
        RingPoly { coeffs: work }
    }

    /// Sum of pairwise products, `sum(a_i * b_i)`.
    pub fn dot(&self, a: &[RingPoly], b: &[RingPoly]) -> RingPoly {
        debug_assert_eq!(a.len(), b.len());
        a.iter()
            .zip(b)
            .fold(self.zero(), |acc, (x, y)| self.add(&acc, &self.mul(x, y)))
    }

    fn reduce_in_place(&self, work: &mut Vec<u64>) {
        let d = self.degree();
        if work.len() < d {
            work.resize(d, 0);
            return;
        }
        for top in (d..work.len()).rev() {
            let lead = work[top];
            if lead == 0 {
                continue;
            }
            let shift = top - d;
            for (j, &uj) in self.u[..d].iter().enumerate() {
                work[shift + j] = sub_mod(work[shift + j], mul_mod(lead, uj, self.q), self.q);
            }
            work[top] = 0;
        }
        work.truncate(d);
    }
}

/// Checked arithmetic on ring elements: both operands must belong to `ring`.
pub fn poly_ops(ring: &QuotientRing, a: &RingPoly, b: &RingPoly, op: PolyOp) -> Result<RingPoly> {
    ring.check(a)?;
    if op != PolyOp::Neg {
        ring.check(b)?;
    }
    Ok(match op {
        PolyOp::Add => ring.add(a, b),
        PolyOp::Sub => ring.sub(a, b),
        PolyOp::Mul => ring.mul(a, b),
        PolyOp::Neg => ring.neg(a),
    })
}
