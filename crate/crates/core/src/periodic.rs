//! Periodic-type instances: closed Rauzy loops with a unit eigenvalue,
//! their Perron length data, and the exact central direction.
//!
//! A closed loop gamma with positive length-side matrix `A` determines an
//! exchange whose induction path repeats gamma: the lengths are the Perron
//! eigenvector of `A`, exact in the quadratic field of the Perron root, and
//! the induction contracts them by exactly that root once per period. When
//! 1 is an eigenvalue of `A`, the unit eigenvectors of the transpose are
//! log-slope vectors fixed by the height cocycle over the period.

use crate::error::{Error, Result};
use crate::iet::Iet;
use crate::intmat::IntMatrix;
use crate::perm::{PermutationPair, RvType};
use crate::rauzy::{RauzyMove, RauzyPath};
use crate::scalar::{FieldElement, NumberField, Scalar};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use std::sync::Arc;

/// A closed positive loop whose matrix has 1 as an eigenvalue.
#[derive(Clone)]
pub struct PeriodicInstance {
    pub path: RauzyPath,
    /// Forward length-side product over the loop.
    pub matrix: IntMatrix,
    pub period: usize,
    /// Field of the Perron root.
    pub field: Arc<NumberField>,
    /// Perron root as a field element.
    pub perron_root: FieldElement,
    /// Normalized Perron lengths, exact in the field.
    pub lambda: Vec<Scalar>,
    /// Integer unit eigenvector of the transpose (the fixed log-slope
    /// direction), when one exists.
    pub omega: Vec<BigInt>,
}

impl PeriodicInstance {
    pub fn iet(&self) -> Iet {
        Iet::new(self.path.start.clone(), self.lambda.clone()).unwrap()
    }

    pub fn omega_rational(&self) -> Vec<BigRational> {
        self.omega.iter().map(|v| BigRational::from(v.clone())).collect()
    }
}

/// Depth-first enumeration of closed loops at `base` up to `max_len` moves,
/// in lexicographic move order (Top before Bottom), returning the first one
/// accepted by `pred`.
fn search_loops<F: FnMut(&RauzyPath, &IntMatrix) -> bool>(
    base: &PermutationPair,
    max_len: usize,
    pred: &mut F,
) -> Option<RauzyPath> {
    fn extend(
        base: &PermutationPair,
        moves: &mut Vec<RauzyMove>,
        cur: &PermutationPair,
        max_len: usize,
        pred: &mut impl FnMut(&RauzyPath, &IntMatrix) -> bool,
    ) -> Option<RauzyPath> {
        if !moves.is_empty() && cur == base {
            let path = RauzyPath {
                start: base.clone(),
                moves: moves.clone(),
            };
            let m = crate::rauzy::loop_matrix(&path);
            if pred(&path, &m) {
                return Some(path);
            }
        }
        if moves.len() == max_len {
            return None;
        }
        for t in [RvType::Top, RvType::Bottom] {
            let (winner, loser) = cur.winner_loser(t);
            let next = cur.rauzy_op(t);
            moves.push(RauzyMove {
                rv_type: t,
                winner,
                loser,
                source: cur.clone(),
                target: next.clone(),
            });
            if let Some(found) = extend(base, moves, &next, max_len, pred) {
                return Some(found);
            }
            moves.pop();
        }
        None
    }
    // Iterative deepening keeps the enumeration ordered by length.
    for len in 1..=max_len {
        let mut moves = Vec::new();
        let mut bounded = |path: &RauzyPath, m: &IntMatrix| path.len() == len && pred(path, m);
        if let Some(p) = extend(base, &mut moves, base, len, &mut bounded) {
            return Some(p);
        }
    }
    None
}

/// Finds the shortest positive loop at `base` whose matrix has eigenvalue 1
/// and a Perron root strictly larger than 1, and assembles the exact data.
/// The search is exhaustive over loops of length at most `max_len`.
pub fn find_unit_loop(base: &PermutationPair, max_len: usize) -> Result<PeriodicInstance> {
    let d = base.len();
    let found = search_loops(base, max_len, &mut |_path, m| {
        if !m.is_positive() {
            return false;
        }
        // chi(1) = 0 and a quadratic Perron factor x^2 - t x + 1 with t > 2.
        let cp = m.char_poly();
        let chi1: BigInt = cp.iter().fold(BigInt::zero(), |a, c| a + c);
        if !chi1.is_zero() {
            return false;
        }
        if d == 3 {
            // det = 1 and chi = (x-1)(x^2 - t x + 1) forces trace = t + 1 > 3.
            m.trace() > BigInt::from(3) && m.det() == BigInt::one()
        } else {
            !central_unit_vectors(m).is_empty()
        }
    });
    let path = found.ok_or_else(|| {
        Error::BadSpec(format!(
            "no positive unit-eigenvalue loop of length <= {max_len} at {base}"
        ))
    })?;
    instance_from_loop(path)
}

fn central_unit_vectors(m: &IntMatrix) -> Vec<Vec<BigInt>> {
    crate::spectrum::central_vector_periodic(m)
}

/// Builds the exact Perron data for a positive loop with a unit eigenvalue
/// and quadratic Perron factor.
pub fn instance_from_loop(path: RauzyPath) -> Result<PeriodicInstance> {
    let matrix = crate::rauzy::loop_matrix(&path);
    if !matrix.is_positive() {
        return Err(Error::BadSpec("loop matrix is not positive".into()));
    }
    let omega = central_unit_vectors(&matrix);
    if omega.is_empty() {
        return Err(Error::BadSpec("loop matrix has no unit eigenvalue".into()));
    }
    // Quadratic Perron factor x^2 - t x + 1 with t = trace - (number of
    // unit eigenvalues); for the supported loops t = trace - (d - 2).
    let d = matrix.dim();
    let t = matrix.trace() - BigInt::from(d as i64 - 2);
    if t <= BigInt::from(2) {
        return Err(Error::BadSpec(
            "Perron factor is not a hyperbolic quadratic".into(),
        ));
    }
    let t_rat = BigRational::from(t.clone());
    // Root interval (t - 1, t): p(t-1) = 2 - t < 0 < 1 = p(t).
    let field = NumberField::new(
        vec![BigRational::one(), -t_rat.clone(), BigRational::one()],
        &t_rat - BigRational::one(),
        t_rat.clone(),
    )?;
    let theta = field.theta();
    // Kernel of (A - theta I) over the field.
    let lambda_dir = field_kernel_vector(&matrix, &field, &theta)?;
    // Normalize to unit total length with positive entries.
    let mut total = field.from_rational(BigRational::zero());
    for v in &lambda_dir {
        total = total.add(v);
    }
    if total.is_zero() {
        return Err(Error::BadSpec("degenerate Perron direction".into()));
    }
    let lambda_vec: Vec<FieldElement> = lambda_dir.iter().map(|v| v.div(&total)).collect();
    for v in &lambda_vec {
        if v.sign() != std::cmp::Ordering::Greater {
            return Err(Error::BadSpec("Perron vector is not positive".into()));
        }
    }
    let lambda: Vec<Scalar> = lambda_vec.into_iter().map(Scalar::Alg).collect();
    Ok(PeriodicInstance {
        period: path.len(),
        matrix,
        field,
        perron_root: theta,
        lambda,
        omega: omega.into_iter().next().unwrap(),
        path,
    })
}

/// One nonzero kernel vector of `m - root I` over the field.
fn field_kernel_vector(
    m: &IntMatrix,
    field: &Arc<NumberField>,
    root: &FieldElement,
) -> Result<Vec<FieldElement>> {
    let d = m.dim();
    let mut rows: Vec<Vec<FieldElement>> = (0..d)
        .map(|i| {
            (0..d)
                .map(|j| {
                    let mut e = field.from_rational(BigRational::from(m.get(i, j).clone()));
                    if i == j {
                        e = e.sub(root);
                    }
                    e
                })
                .collect()
        })
        .collect();
    // Gaussian elimination with exact zero tests.
    let mut pivots: Vec<usize> = Vec::new();
    let mut row = 0usize;
    for col in 0..d {
        let pr = (row..d).find(|&r| !rows[r][col].is_zero());
        let pr = match pr {
            Some(p) => p,
            None => continue,
        };
        rows.swap(pr, row);
        let inv = rows[row][col].inv();
        for j in 0..d {
            rows[row][j] = rows[row][j].mul(&inv);
        }
        for r in 0..d {
            if r == row || rows[r][col].is_zero() {
                continue;
            }
            let f = rows[r][col].clone();
            for j in 0..d {
                let v = rows[row][j].mul(&f);
                rows[r][j] = rows[r][j].sub(&v);
            }
        }
        pivots.push(col);
        row += 1;
    }
    let free = (0..d).find(|c| !pivots.contains(c)).ok_or_else(|| {
        Error::BadSpec("Perron root is not an eigenvalue of the loop matrix".into())
    })?;
    let mut v: Vec<FieldElement> = (0..d)
        .map(|_| field.from_rational(BigRational::zero()))
        .collect();
    v[free] = field.from_rational(BigRational::one());
    for (ri, &pc) in pivots.iter().enumerate() {
        v[pc] = rows[ri][free].neg();
    }
    Ok(v)
}

/// Exact basis of the central-stable plane of a periodic instance: the
/// contracting eigenvector of the height period matrix together with the
/// fixed direction. Entries are field elements and rationals.
pub fn periodic_central_stable(inst: &PeriodicInstance) -> Vec<Vec<Scalar>> {
    let d = inst.matrix.dim();
    let field = &inst.field;
    // Height period matrix is the transpose of the loop matrix; its
    // contracting eigenvector solves (A^T - (1/theta) I) v = 0, and
    // 1/theta = t - theta lies in the same field.
    let theta = &inst.perron_root;
    let t = inst.matrix.trace() - BigInt::from(d as i64 - 2);
    let inv_theta = field
        .from_rational(BigRational::from(t))
        .sub(theta);
    let zt = inst.matrix.transpose();
    let stable = field_kernel_vector(&zt, field, &inv_theta)
        .expect("contracting eigenvector exists");
    let mut basis: Vec<Vec<Scalar>> = vec![stable.into_iter().map(Scalar::Alg).collect()];
    basis.push(
        inst.omega
            .iter()
            .map(|v| Scalar::Rat(BigRational::from(v.clone())))
            .collect(),
    );
    basis
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::iet::IntervalMap;
    use crate::perm::make_permutation;
    use crate::rauzy::InductionChain;
    use std::cmp::Ordering;

    #[test]
    fn find_symmetric_three_unit_loop() {
        let base = make_permutation(&["A", "B", "C"], &["C", "B", "A"]).unwrap();
        let inst = find_unit_loop(&base, 12).unwrap();
        assert!(inst.matrix.is_positive());
        assert!(inst.period <= 12);
        // chi(1) = 0.
        let cp = inst.matrix.char_poly();
        let chi1: BigInt = cp.iter().fold(BigInt::zero(), |a, c| a + c);
        assert!(chi1.is_zero());
        // The unit eigenvector is orthogonal to the Perron lengths.
        let mut dot = Scalar::zero();
        for (w, l) in inst.omega.iter().zip(&inst.lambda) {
            dot = dot.add(&l.mul(&Scalar::Rat(BigRational::from(w.clone()))));
        }
        assert!(dot.is_zero(), "omega not orthogonal to lambda");
        // Lengths are positive and sum to 1.
        let total = inst
            .lambda
            .iter()
            .fold(Scalar::zero(), |a, b| a.add(b));
        assert_eq!(total.cmp(&Scalar::one()), Ordering::Equal);
    }

    #[test]
    fn periodic_induction_repeats() {
        let base = make_permutation(&["A", "B", "C"], &["C", "B", "A"]).unwrap();
        let inst = find_unit_loop(&base, 12).unwrap();
        let p = inst.period;
        let chain = InductionChain::new(inst.iet()).extended_to(3 * p).unwrap();
        // Moves repeat with period p.
        for i in 0..2 * p {
            assert_eq!(
                chain.move_at(i).rv_type,
                chain.move_at(i + p).rv_type,
                "step {i}"
            );
            assert_eq!(chain.move_at(i).winner, chain.move_at(i + p).winner);
        }
        // Lengths contract by exactly the Perron root each period.
        let l0 = chain.state(0).lengths();
        let l1 = chain.state(p).lengths();
        for (a, b) in l0.iter().zip(l1) {
            let ratio = a.div(b);
            let diff = ratio.sub(&Scalar::Alg(inst.perron_root.clone()));
            assert!(diff.is_zero(), "contraction is not the Perron root");
        }
    }

    #[test]
    fn central_stable_contains_omega_and_contracts() {
        let base = make_permutation(&["A", "B", "C"], &["C", "B", "A"]).unwrap();
        let inst = find_unit_loop(&base, 12).unwrap();
        let basis = periodic_central_stable(&inst);
        assert_eq!(basis.len(), 2);
        // The height period matrix fixes omega exactly.
        let zt = inst.matrix.transpose();
        let w = inst.omega.clone();
        let zw = zt.mul_vec(&w);
        assert_eq!(zw, w);
        // And contracts the stable direction by 1/theta.
        let stable = &basis[0];
        let mapped: Vec<Scalar> = (0..3)
            .map(|i| {
                (0..3)
                    .map(|j| {
                        stable[j].mul(&Scalar::Rat(BigRational::from(zt.get(i, j).clone())))
                    })
                    .fold(Scalar::zero(), |a, b| a.add(&b))
            })
            .collect();
        // mapped = (1/theta) * stable, i.e. theta * mapped = stable.
        for i in 0..3 {
            let lhs = mapped[i].mul(&Scalar::Alg(inst.perron_root.clone()));
            let diff = lhs.sub(&stable[i]);
            assert!(diff.is_zero(), "component {i}");
        }
    }
}
