//! Exchange matrix, genus, Lyapunov spectrum, and Oseledets subspaces.
//!
//! Exponents of the height cocycle are estimated by QR deflation over
//! Zorich blocks. Subspaces come from the right-singular directions of
//! exactly accumulated cocycle windows: the stable space collects the most
//! contracted directions of the height product, and the central-stable
//! space is computed as the orthocomplement of the contracted directions
//! of the length product, cross-checked against the non-expanding
//! directions of the height product.

use crate::error::{Error, Result};
use crate::iet::IntervalMap;
use crate::intmat::IntMatrix;
use crate::perm::{PermutationPair, Symbol};
use crate::rauzy::{InductionChain, RauzyMove, ZorichStream};
use crate::scalar::RealHp;
use num_bigint::BigInt;
use num_rational::BigRational;
use std::cmp::Ordering;

/// Antisymmetric exchange matrix of a permutation pair.
pub fn omega_matrix(perm: &PermutationPair) -> IntMatrix {
    let d = perm.len();
    let mut m = IntMatrix::zero(d);
    for a in 0..d {
        for b in 0..d {
            let sa = Symbol(a as u8);
            let sb = Symbol(b as u8);
            let v = if perm.bottom_position(sa) > perm.bottom_position(sb)
                && perm.top_position(sa) < perm.top_position(sb)
            {
                1
            } else if perm.bottom_position(sa) < perm.bottom_position(sb)
                && perm.top_position(sa) > perm.top_position(sb)
            {
                -1
            } else {
                0
            };
            m.set(a, b, BigInt::from(v));
        }
    }
    m
}

/// Exact kernel basis of the exchange matrix and the genus
/// `g = (d - dim ker) / 2`.
pub fn kernel_and_genus(perm: &PermutationPair) -> (Vec<Vec<BigRational>>, usize) {
    let omega = omega_matrix(perm);
    let kernel = omega.kernel_basis();
    let d = perm.len();
    let dim_ker = kernel.len();
    assert!((d - dim_ker) % 2 == 0, "antisymmetric rank must be even");
    let g = (d - dim_ker) / 2;
    let basis = kernel
        .into_iter()
        .map(|v| v.into_iter().map(BigRational::from).collect())
        .collect();
    (basis, g)
}

/// Exact integer basis of the unit eigenspace of the transpose of a loop
/// matrix; nonempty exactly when 1 is an eigenvalue.
pub fn central_vector_periodic(loop_matrix: &IntMatrix) -> Vec<Vec<BigInt>> {
    let d = loop_matrix.dim();
    let mut m = loop_matrix.transpose();
    for i in 0..d {
        let v = m.get(i, i) - BigInt::from(1);
        m.set(i, i, v);
    }
    m.kernel_basis()
}

// ---------------------------------------------------------------------------
// f64 helpers for the QR pipeline.

#[derive(Clone)]
struct MatF {
    d: usize,
    a: Vec<f64>, // row-major
}

impl MatF {
    fn identity(d: usize) -> Self {
        let mut a = vec![0.0; d * d];
        for i in 0..d {
            a[i * d + i] = 1.0;
        }
        MatF { d, a }
    }

    fn row_update(&mut self, target: usize, source: usize, factor: f64) {
        for j in 0..self.d {
            self.a[target * self.d + j] += factor * self.a[source * self.d + j];
        }
    }

    /// Modified Gram-Schmidt on columns; returns the diagonal of R.
    fn qr_in_place(&mut self) -> Vec<f64> {
        let d = self.d;
        let mut diag = vec![0.0; d];
        for j in 0..d {
            for k in 0..j {
                let mut dot = 0.0;
                for i in 0..d {
                    dot += self.a[i * d + k] * self.a[i * d + j];
                }
                for i in 0..d {
                    self.a[i * d + j] -= dot * self.a[i * d + k];
                }
            }
            let mut norm = 0.0;
            for i in 0..d {
                norm += self.a[i * d + j] * self.a[i * d + j];
            }
            let norm = norm.sqrt();
            diag[j] = norm;
            if norm > 0.0 {
                for i in 0..d {
                    self.a[i * d + j] /= norm;
                }
            }
        }
        diag
    }
}

/// Exponent estimates for the height cocycle, per Zorich step.
#[derive(Clone, Debug)]
pub struct LyapunovEstimate {
    /// Estimates in the deflation order (decreasing in the limit).
    pub exponents: Vec<f64>,
    /// Zorich steps consumed.
    pub steps: usize,
    /// `(step, estimates)` checkpoints for convergence reporting.
    pub history: Vec<(usize, Vec<f64>)>,
    /// Max exponent drift between the half-run and the full run.
    pub convergence_gap: f64,
    /// Clustering threshold `3 / sqrt(steps)` used to label near-zero
    /// exponents.
    pub zero_threshold: f64,
}

impl LyapunovEstimate {
    pub fn near_zero_count(&self) -> usize {
        self.exponents
            .iter()
            .filter(|t| t.abs() < self.zero_threshold)
            .count()
    }
}

/// QR-deflation estimate of all exponents over `n_blocks` Zorich steps.
pub fn lyapunov_spectrum<M: IntervalMap>(
    map: &M,
    n_blocks: usize,
    guard_bits: u32,
) -> Result<LyapunovEstimate> {
    let d = map.perm().len();
    let mut stream = ZorichStream::new(map.clone(), guard_bits);
    let mut q = MatF::identity(d);
    let mut logs = vec![0.0; d];
    let mut history = Vec::new();
    let mut half_est: Vec<f64> = Vec::new();
    let checkpoint_every = (n_blocks / 16).max(1);
    for step in 1..=n_blocks {
        let block = stream.next_block()?;
        let w = block.winner.0 as usize;
        for (l, c) in &block.losers {
            q.row_update(l.0 as usize, w, *c as f64);
        }
        let diag = q.qr_in_place();
        for (acc, r) in logs.iter_mut().zip(&diag) {
            *acc += r.ln();
        }
        if step % checkpoint_every == 0 || step == n_blocks {
            let est: Vec<f64> = logs.iter().map(|l| l / step as f64).collect();
            if step * 2 <= n_blocks {
                half_est = est.clone();
            }
            history.push((step, est));
        }
    }
    let exponents: Vec<f64> = logs.iter().map(|l| l / n_blocks as f64).collect();
    let convergence_gap = if half_est.is_empty() {
        f64::INFINITY
    } else {
        exponents
            .iter()
            .zip(&half_est)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    };
    Ok(LyapunovEstimate {
        exponents,
        steps: n_blocks,
        history,
        convergence_gap,
        zero_threshold: 3.0 / (n_blocks as f64).sqrt(),
    })
}

// ---------------------------------------------------------------------------
// High-precision SVD.

/// Columns of a RealHp matrix.
type Cols = Vec<Vec<RealHp>>;

fn int_matrix_cols(m: &IntMatrix, prec: u32) -> Cols {
    let d = m.dim();
    (0..d)
        .map(|j| {
            (0..d)
                .map(|i| RealHp::from_bigint(m.get(i, j), prec).with_prec(prec))
                .collect()
        })
        .collect()
}

fn col_dot(a: &[RealHp], b: &[RealHp]) -> RealHp {
    let mut acc = RealHp::zero(a[0].prec());
    for (x, y) in a.iter().zip(b) {
        acc = acc.add(&x.mul(y));
    }
    acc
}

/// One-sided Jacobi SVD: returns singular values (descending) and the
/// matching right-singular vectors as orthonormal columns.
pub fn svd_right(m: &IntMatrix, prec: u32) -> (Vec<RealHp>, Cols) {
    let d = m.dim();
    let mut a = int_matrix_cols(m, prec);
    let mut v: Cols = (0..d)
        .map(|j| {
            (0..d)
                .map(|i| {
                    if i == j {
                        RealHp::one(prec)
                    } else {
                        RealHp::zero(prec)
                    }
                })
                .collect()
        })
        .collect();
    let eps = RealHp::pow2(-(prec as i32) + 24, prec);
    for _sweep in 0..60 {
        let mut rotated = false;
        for i in 0..d {
            for j in (i + 1)..d {
                let app = col_dot(&a[i], &a[i]);
                let aqq = col_dot(&a[j], &a[j]);
                let apq = col_dot(&a[i], &a[j]);
                if apq.is_zero() {
                    continue;
                }
                let thr = eps.mul(&app.sqrt()).mul(&aqq.sqrt());
                if apq.abs().cmp(&thr) != Ordering::Greater {
                    continue;
                }
                rotated = true;
                // Classical two-by-two symmetric Schur rotation.
                let tau = aqq.sub(&app).div(&apq.add(&apq));
                let t = {
                    let root = RealHp::one(prec).add(&tau.mul(&tau)).sqrt();
                    let denom = if tau.is_negative() {
                        tau.sub(&root)
                    } else {
                        tau.add(&root)
                    };
                    RealHp::one(prec).div(&denom)
                };
                let c = RealHp::one(prec)
                    .div(&RealHp::one(prec).add(&t.mul(&t)).sqrt());
                let s = c.mul(&t);
                for row in 0..d {
                    let ai = a[i][row].clone();
                    let aj = a[j][row].clone();
                    a[i][row] = c.mul(&ai).sub(&s.mul(&aj));
                    a[j][row] = s.mul(&ai).add(&c.mul(&aj));
                    let vi = v[i][row].clone();
                    let vj = v[j][row].clone();
                    v[i][row] = c.mul(&vi).sub(&s.mul(&vj));
                    v[j][row] = s.mul(&vi).add(&c.mul(&vj));
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let mut order: Vec<usize> = (0..d).collect();
    let norms: Vec<RealHp> = (0..d).map(|j| col_dot(&a[j], &a[j]).sqrt()).collect();
    order.sort_by(|x, y| norms[*y].cmp(&norms[*x]));
    let sigma: Vec<RealHp> = order.iter().map(|&j| norms[j].clone()).collect();
    let vs: Cols = order.iter().map(|&j| v[j].clone()).collect();
    (sigma, vs)
}

/// Orthonormal basis with metadata about its provenance.
#[derive(Clone, Debug)]
pub struct Subspace {
    /// Orthonormal columns.
    pub basis: Cols,
    pub dim: usize,
    /// Induction window (steps of the underlying path).
    pub window: usize,
    /// Log-gap between the singular values bracketing the split.
    pub split_gap: f64,
    /// Fluctuation estimate against which the gap was tested.
    pub fluctuation: f64,
    /// Principal-angle agreement of the dual route, when one was computed.
    pub cross_check_angle: Option<f64>,
}

impl Subspace {
    pub fn from_columns(basis: Cols) -> Self {
        let dim = basis.len();
        Subspace {
            basis,
            dim,
            window: 0,
            split_gap: f64::INFINITY,
            fluctuation: 0.0,
            cross_check_angle: None,
        }
    }

    /// Largest deviation from orthonormality among pairwise products.
    pub fn orthonormality_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..self.dim {
            for j in i..self.dim {
                let dot = col_dot(&self.basis[i], &self.basis[j]).to_f64();
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((dot - target).abs());
            }
        }
        worst
    }
}

/// Largest principal angle from `inner` into `outer` (radians): zero when
/// `inner` is contained in the span of `outer`.
pub fn containment_angle(inner: &Subspace, outer: &Subspace) -> f64 {
    let mut worst_sin: f64 = 0.0;
    for a in &inner.basis {
        let mut residual: Vec<RealHp> = a.clone();
        for b in &outer.basis {
            let dot = col_dot(a, b);
            for (r, bi) in residual.iter_mut().zip(b) {
                *r = r.sub(&dot.mul(bi));
            }
        }
        let norm = col_dot(&residual, &residual).sqrt().to_f64();
        worst_sin = worst_sin.max(norm.min(1.0));
    }
    worst_sin.asin()
}

/// Symmetric subspace distance: the larger of the two containment angles.
pub fn principal_angle(a: &Subspace, b: &Subspace) -> f64 {
    containment_angle(a, b).max(containment_angle(b, a))
}

fn working_prec(m: &IntMatrix) -> u32 {
    let bits = m.max_entry().bits() as u32;
    (2 * bits + 192).max(192)
}

fn ln_f64(x: &RealHp) -> f64 {
    x.ln().to_f64()
}

/// Fluctuation and gap data for a singular-value split of an exactly
/// accumulated window product.
struct SplitCheck {
    gap: f64,
    fluct: f64,
}

/// Gap test at split position `k` (the first `k` singular values separate
/// from the rest). The fluctuation is estimated as the worst deviation of
/// the partial-window log singular values from linear growth.
fn split_check(moves: &[RauzyMove], n: usize, k: usize, height_side: bool) -> SplitCheck {
    let full = window_product(moves, n, height_side);
    let prec = working_prec(&full);
    let (sigma, _) = svd_right(&full, prec);
    let d = sigma.len();
    let log_full: Vec<f64> = sigma.iter().map(ln_f64).collect();
    let gap = if k == 0 || k >= d {
        f64::INFINITY
    } else {
        log_full[k - 1] - log_full[k]
    };
    // Deviation from linear growth at interior checkpoints.
    let mut fluct: f64 = 0.0;
    let mut checkpoints = 0usize;
    for m in [n / 4, n / 2, 3 * n / 4] {
        if m == 0 || m >= n {
            continue;
        }
        checkpoints += 1;
        let part = window_product(moves, m, height_side);
        let prec_m = working_prec(&part);
        let (sig_m, _) = svd_right(&part, prec_m);
        for i in 0..d {
            let expect = log_full[i] * (m as f64) / (n as f64);
            fluct = fluct.max((ln_f64(&sig_m[i]) - expect).abs());
        }
    }
    // Without checkpoints there is no fluctuation evidence at all.
    let fluct = if checkpoints == 0 {
        f64::INFINITY
    } else {
        fluct.max(0.05)
    };
    SplitCheck { gap, fluct }
}

fn window_product(moves: &[RauzyMove], n: usize, height_side: bool) -> IntMatrix {
    let d = moves[0].source.len();
    let mut z = IntMatrix::identity(d);
    for mv in &moves[..n] {
        let (w, l) = (mv.winner.0 as usize, mv.loser.0 as usize);
        let step = if height_side {
            IntMatrix::elementary(d, l, w)
        } else {
            // Inverse length step: Id - E(winner, loser).
            let mut m = IntMatrix::identity(d);
            m.set(w, l, BigInt::from(-1));
            m
        };
        z = step.mul(&z);
    }
    z
}

/// Estimate of the stable space: the `g` most contracted right-singular
/// directions of the height window `Z(0, n)`.
pub fn stable_space<M: IntervalMap>(chain: &InductionChain<M>, n: usize) -> Result<Subspace> {
    let perm = chain.initial().perm();
    let (_, g) = kernel_and_genus(perm);
    let d = perm.len();
    let check = split_check(chain.moves(), n, d - g, true);
    if check.gap < 10.0 * check.fluct {
        return Err(Error::SpectralGapNotResolved(format!(
            "gap {:.3} vs fluctuation {:.3} over window {n}",
            check.gap, check.fluct
        )));
    }
    let z = window_product(chain.moves(), n, true);
    let prec = working_prec(&z);
    let (_, v) = svd_right(&z, prec);
    let basis: Cols = v[d - g..].to_vec();
    Ok(Subspace {
        basis,
        dim: g,
        window: n,
        split_gap: check.gap,
        fluctuation: check.fluct,
        cross_check_angle: None,
    })
}

/// Estimate of the central-stable space: orthocomplement of the `g` most
/// contracted right-singular directions of the length window, cross-checked
/// against the `d - g` least expanded directions of the height window.
pub fn central_stable_space<M: IntervalMap>(
    chain: &InductionChain<M>,
    n: usize,
) -> Result<Subspace> {
    let perm = chain.initial().perm();
    let (_, g) = kernel_and_genus(perm);
    let d = perm.len();
    let check = split_check(chain.moves(), n, d - g, false);
    if check.gap < 10.0 * check.fluct {
        return Err(Error::SpectralGapNotResolved(format!(
            "gap {:.3} vs fluctuation {:.3} over window {n}",
            check.gap, check.fluct
        )));
    }
    let l = window_product(chain.moves(), n, false);
    let prec = working_prec(&l);
    let (_, v) = svd_right(&l, prec);
    // Most contracted directions of the length product.
    let f_s: Cols = v[d - g..].to_vec();
    let basis = orthocomplement(&f_s, d, prec);
    let mut sub = Subspace {
        basis,
        dim: d - g,
        window: n,
        split_gap: check.gap,
        fluctuation: check.fluct,
        cross_check_angle: None,
    };
    // Dual route: non-expanding right-singular directions of the height side.
    let z = window_product(chain.moves(), n, true);
    let prec_z = working_prec(&z);
    let (_, vz) = svd_right(&z, prec_z);
    let alt = Subspace::from_columns(vz[g..].to_vec());
    sub.cross_check_angle = Some(principal_angle(&sub, &alt));
    Ok(sub)
}

/// Completes the orthocomplement of a set of orthonormal columns.
fn orthocomplement(cols: &Cols, d: usize, prec: u32) -> Cols {
    let mut basis: Cols = cols.clone();
    let mut out: Cols = Vec::new();
    for e in 0..d {
        let mut v: Vec<RealHp> = (0..d)
            .map(|i| {
                if i == e {
                    RealHp::one(prec)
                } else {
                    RealHp::zero(prec)
                }
            })
            .collect();
        for b in &basis {
            let dot = col_dot(&v, b);
            for (vi, bi) in v.iter_mut().zip(b) {
                *vi = vi.sub(&dot.mul(bi));
            }
        }
        let norm = col_dot(&v, &v).sqrt();
        if norm.to_f64() > 1e-6 {
            let v: Vec<RealHp> = v.iter().map(|x| x.div(&norm)).collect();
            basis.push(v.clone());
            out.push(v);
        }
        if basis.len() == d {
            break;
        }
    }
    assert_eq!(out.len(), d - cols.len(), "orthocomplement dimension");
    out
}

/// Exact rational columns as a RealHp subspace (orthonormalized).
pub fn subspace_from_rational(cols: &[Vec<BigRational>], prec: u32) -> Subspace {
    let scalars: Vec<Vec<crate::scalar::Scalar>> = cols
        .iter()
        .map(|c| c.iter().map(|r| crate::scalar::Scalar::Rat(r.clone())).collect())
        .collect();
    subspace_from_scalars(&scalars, prec)
}

/// Exact scalar columns (rational or field elements) as a RealHp subspace.
pub fn subspace_from_scalars(cols: &[Vec<crate::scalar::Scalar>], prec: u32) -> Subspace {
    let d = cols[0].len();
    let mut basis: Cols = Vec::new();
    for col in cols {
        let mut v: Vec<RealHp> = (0..d).map(|i| col[i].to_real(prec)).collect();
        for b in &basis {
            let dot = col_dot(&v, b);
            for (vi, bi) in v.iter_mut().zip(b) {
                *vi = vi.sub(&dot.mul(bi));
            }
        }
        let norm = col_dot(&v, &v).sqrt();
        assert!(norm.to_f64() > 0.0, "dependent columns");
        basis.push(v.iter().map(|x| x.div(&norm)).collect());
    }
    Subspace::from_columns(basis)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::iet::Iet;
    use crate::perm::make_permutation;
    use crate::scalar::{NumberField, Scalar};
    use num_traits::Zero;

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    fn golden_iet() -> Iet {
        let f = NumberField::new(vec![rat(-1, 1), rat(-1, 1), rat(1, 1)], rat(1, 1), rat(2, 1))
            .unwrap();
        let phi = f.theta();
        let one = f.from_rational(rat(1, 1));
        let two = f.from_rational(rat(2, 1));
        let p = make_permutation(&["A", "B"], &["B", "A"]).unwrap();
        Iet::new(
            p,
            vec![Scalar::Alg(phi.sub(&one)), Scalar::Alg(two.sub(&phi))],
        )
        .unwrap()
    }

    #[test]
    fn omega_symmetric_three() {
        let p = make_permutation(&["A", "B", "C"], &["C", "B", "A"]).unwrap();
        let m = omega_matrix(&p);
        let expect = IntMatrix::from_rows(vec![vec![0, 1, 1], vec![-1, 0, 1], vec![-1, -1, 0]]);
        assert_eq!(m, expect);
        // Antisymmetry for a few permutations.
        for perm in [
            make_permutation(&["A", "B"], &["B", "A"]).unwrap(),
            make_permutation(&["A", "B", "C", "D"], &["D", "C", "B", "A"]).unwrap(),
            make_permutation(&["A", "B", "C", "D"], &["B", "D", "A", "C"]).unwrap(),
        ] {
            let m = omega_matrix(&perm);
            for i in 0..perm.len() {
                for j in 0..perm.len() {
                    assert_eq!(m.get(i, j).clone(), -m.get(j, i).clone());
                }
            }
        }
    }

    #[test]
    fn genus_examples() {
        let p = make_permutation(&["A", "B", "C"], &["C", "B", "A"]).unwrap();
        let (kernel, g) = kernel_and_genus(&p);
        assert_eq!(g, 1);
        assert_eq!(kernel.len(), 1);
        // Kernel spanned by (1, -1, 1).
        let v = &kernel[0];
        let r = v[0].clone();
        assert_eq!(v[1], -r.clone());
        assert_eq!(v[2], r);

        let p = make_permutation(&["A", "B"], &["B", "A"]).unwrap();
        let (kernel, g) = kernel_and_genus(&p);
        assert_eq!(g, 1);
        assert!(kernel.is_empty());
    }

    #[test]
    fn unit_eigenvector_of_fib_matrix_absent() {
        let m = IntMatrix::from_rows(vec![vec![2, 1], vec![1, 1]]);
        assert!(central_vector_periodic(&m).is_empty());
    }

    #[test]
    fn unit_eigenvector_present() {
        // Block diag of [1] and [[2,1],[1,1]]: char poly (x-1)(x^2-3x+1).
        let m = IntMatrix::from_rows(vec![vec![1, 0, 0], vec![0, 2, 1], vec![0, 1, 1]]);
        let k = central_vector_periodic(&m);
        assert_eq!(k.len(), 1);
        assert_eq!(k[0][1], BigInt::zero());
        assert_eq!(k[0][2], BigInt::zero());
        assert!(!k[0][0].is_zero());
    }

    #[test]
    fn golden_lyapunov() {
        let est = lyapunov_spectrum(&golden_iet(), 400, 80).unwrap();
        let log_phi = ((1.0 + 5f64.sqrt()) / 2.0).ln();
        assert!(
            (est.exponents[0] - log_phi).abs() < 0.01 * log_phi,
            "top exponent {} vs {}",
            est.exponents[0],
            log_phi
        );
        // Symplectic pairing for d = 2: the two exponents are opposite.
        assert!((est.exponents[0] + est.exponents[1]).abs() < 1e-6);
        assert_eq!(est.near_zero_count(), 0);
    }

    #[test]
    fn golden_stable_direction() {
        let chain = InductionChain::new(golden_iet()).extended_to(60).unwrap();
        let sub = stable_space(&chain, 60).unwrap();
        assert_eq!(sub.dim, 1);
        assert!(sub.orthonormality_defect() < 1e-18);
        // Expected direction (1, -phi), normalized.
        let phi = (1.0 + 5f64.sqrt()) / 2.0;
        let norm = (1.0 + phi * phi).sqrt();
        let expect = [1.0 / norm, -phi / norm];
        let got: Vec<f64> = sub.basis[0].iter().map(|x| x.to_f64()).collect();
        let dot = (got[0] * expect[0] + got[1] * expect[1]).abs();
        assert!(dot > 1.0 - 1e-12, "direction {got:?}");
    }

    #[test]
    fn golden_central_equals_stable() {
        // d=2 has g=1=d/2, so the central-stable space equals the stable one.
        let chain = InductionChain::new(golden_iet()).extended_to(60).unwrap();
        let e_s = stable_space(&chain, 60).unwrap();
        let e_cs = central_stable_space(&chain, 60).unwrap();
        assert_eq!(e_cs.dim, 1);
        let angle = principal_angle(&e_s, &e_cs);
        assert!(angle < 1e-9, "angle {angle}");
        let cross = e_cs.cross_check_angle.unwrap();
        assert!(cross < 1e-9, "cross-check {cross}");
    }

    #[test]
    fn unresolved_gap_reported() {
        let chain = InductionChain::new(golden_iet()).extended_to(2).unwrap();
        assert!(matches!(
            stable_space(&chain, 1),
            Err(Error::SpectralGapNotResolved(_))
        ));
    }
}
