//! Dense arbitrary-precision integer matrices.
//!
//! Cocycle entries grow exponentially with the induction depth, so entries
//! are `BigInt` and the layout is a plain row-major `Vec`; dimensions stay
//! tiny (d <= 10).

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use std::fmt;

#[derive(Clone, PartialEq, Eq)]
pub struct IntMatrix {
    dim: usize,
    entries: Vec<BigInt>,
}

impl IntMatrix {
    pub fn identity(dim: usize) -> Self {
        let mut m = IntMatrix {
            dim,
            entries: vec![BigInt::zero(); dim * dim],
        };
        for i in 0..dim {
            m.entries[i * dim + i] = BigInt::one();
        }
        m
    }

    pub fn zero(dim: usize) -> Self {
        IntMatrix {
            dim,
            entries: vec![BigInt::zero(); dim * dim],
        }
    }

    pub fn from_rows(rows: Vec<Vec<i64>>) -> Self {
        let dim = rows.len();
        let mut entries = Vec::with_capacity(dim * dim);
        for r in rows {
            assert_eq!(r.len(), dim);
            entries.extend(r.into_iter().map(BigInt::from));
        }
        IntMatrix { dim, entries }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, r: usize, c: usize) -> &BigInt {
        &self.entries[r * self.dim + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: BigInt) {
        self.entries[r * self.dim + c] = v;
    }

    /// Identity plus a single unit entry at `(r, c)`.
    pub fn elementary(dim: usize, r: usize, c: usize) -> Self {
        let mut m = Self::identity(dim);
        m.entries[r * dim + c] += 1;
        m
    }

    pub fn mul(&self, rhs: &IntMatrix) -> IntMatrix {
        assert_eq!(self.dim, rhs.dim);
        let d = self.dim;
        let mut out = IntMatrix::zero(d);
        for i in 0..d {
            for k in 0..d {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..d {
                    let v = a * rhs.get(k, j);
                    out.entries[i * d + j] += v;
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[BigInt]) -> Vec<BigInt> {
        assert_eq!(v.len(), self.dim);
        (0..self.dim)
            .map(|i| {
                (0..self.dim)
                    .map(|j| self.get(i, j) * &v[j])
                    .fold(BigInt::zero(), |a, b| a + b)
            })
            .collect()
    }

    pub fn mul_vec_rat(&self, v: &[BigRational]) -> Vec<BigRational> {
        assert_eq!(v.len(), self.dim);
        (0..self.dim)
            .map(|i| {
                (0..self.dim)
                    .map(|j| BigRational::from(self.get(i, j).clone()) * &v[j])
                    .fold(BigRational::zero(), |a, b| a + b)
            })
            .collect()
    }

    pub fn transpose(&self) -> IntMatrix {
        let d = self.dim;
        let mut out = IntMatrix::zero(d);
        for i in 0..d {
            for j in 0..d {
                out.entries[j * d + i] = self.get(i, j).clone();
            }
        }
        out
    }

    pub fn is_positive(&self) -> bool {
        self.entries.iter().all(|e| e.is_positive())
    }

    pub fn is_nonnegative(&self) -> bool {
        self.entries.iter().all(|e| !e.is_negative())
    }

    pub fn max_entry(&self) -> BigInt {
        self.entries
            .iter()
            .cloned()
            .max()
            .unwrap_or_else(BigInt::zero)
    }

    pub fn row_sum(&self, r: usize) -> BigInt {
        (0..self.dim)
            .map(|c| self.get(r, c).clone())
            .fold(BigInt::zero(), |a, b| a + b)
    }

    pub fn trace(&self) -> BigInt {
        (0..self.dim)
            .map(|i| self.get(i, i).clone())
            .fold(BigInt::zero(), |a, b| a + b)
    }

    /// Exact determinant by fraction-free Gaussian elimination.
    pub fn det(&self) -> BigInt {
        let d = self.dim;
        let mut m: Vec<BigRational> = self
            .entries
            .iter()
            .map(|e| BigRational::from(e.clone()))
            .collect();
        let mut det = BigRational::one();
        for col in 0..d {
            let pivot = (col..d).find(|&r| !m[r * d + col].is_zero());
            let pr = match pivot {
                Some(p) => p,
                None => return BigInt::zero(),
            };
            if pr != col {
                for j in 0..d {
                    m.swap(pr * d + j, col * d + j);
                }
                det = -det;
            }
            let p = m[col * d + col].clone();
            det *= &p;
            for r in (col + 1)..d {
                let f = &m[r * d + col] / &p;
                if f.is_zero() {
                    continue;
                }
                for j in col..d {
                    let v = &m[col * d + j] * &f;
                    m[r * d + j] -= v;
                }
            }
        }
        debug_assert!(det.is_integer());
        det.to_integer()
    }

    /// Basis of the rational kernel, scaled to coprime integer vectors.
    pub fn kernel_basis(&self) -> Vec<Vec<BigInt>> {
        let d = self.dim;
        let mut m: Vec<BigRational> = self
            .entries
            .iter()
            .map(|e| BigRational::from(e.clone()))
            .collect();
        // Row-reduce, tracking pivot columns.
        let mut pivots: Vec<usize> = Vec::new();
        let mut row = 0usize;
        for col in 0..d {
            let pr = (row..d).find(|&r| !m[r * d + col].is_zero());
            let pr = match pr {
                Some(p) => p,
                None => continue,
            };
            for j in 0..d {
                m.swap(pr * d + j, row * d + j);
            }
            let p = m[row * d + col].clone();
            for j in 0..d {
                m[row * d + j] /= &p;
            }
            for r in 0..d {
                if r == row {
                    continue;
                }
                let f = m[r * d + col].clone();
                if f.is_zero() {
                    continue;
                }
                for j in 0..d {
                    let v = &m[row * d + j] * &f;
                    m[r * d + j] -= v;
                }
            }
            pivots.push(col);
            row += 1;
            if row == d {
                break;
            }
        }
        let free: Vec<usize> = (0..d).filter(|c| !pivots.contains(c)).collect();
        let mut basis = Vec::new();
        for &fc in &free {
            let mut v = vec![BigRational::zero(); d];
            v[fc] = BigRational::one();
            for (ri, &pc) in pivots.iter().enumerate() {
                v[pc] = -m[ri * d + fc].clone();
            }
            // Clear denominators and divide by the gcd.
            let mut lcm = BigInt::one();
            for c in &v {
                lcm = num_integer::lcm(lcm, c.denom().clone());
            }
            let mut ints: Vec<BigInt> = v
                .iter()
                .map(|c| (c * BigRational::from(lcm.clone())).to_integer())
                .collect();
            let mut g = BigInt::zero();
            for c in &ints {
                g = num_integer::gcd(g, c.clone());
            }
            if !g.is_zero() && !g.is_one() {
                for c in ints.iter_mut() {
                    *c /= &g;
                }
            }
            basis.push(ints);
        }
        basis
    }

    pub fn rank(&self) -> usize {
        self.dim - self.kernel_basis().len()
    }

    /// Coefficients of det(x I - M), lowest degree first.
    pub fn char_poly(&self) -> Vec<BigInt> {
        // Faddeev-LeVerrier: exact over the integers for integer matrices.
        let d = self.dim;
        let mut coeffs = vec![BigInt::zero(); d + 1];
        coeffs[d] = BigInt::one();
        let mut m = IntMatrix::zero(d);
        for k in 1..=d {
            // M_k = A (M_{k-1} + c_{d-k+1} I)
            let mut shifted = m.clone();
            for i in 0..d {
                let v = shifted.get(i, i) + &coeffs[d - k + 1];
                shifted.set(i, i, v);
            }
            m = self.mul(&shifted);
            let c = -m.trace() / BigInt::from(k as i64);
            coeffs[d - k] = c;
        }
        coeffs
    }
}

impl fmt::Debug for IntMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in 0..self.dim {
            let row: Vec<String> = (0..self.dim).map(|c| self.get(r, c).to_string()).collect();
            writeln!(f, "[{}]", row.join(" "))?;
        }
        Ok(())
    }
}
