//! Orthogonal Gram matrices, Blaschke rescalings and the three point
//! orthogonality test.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;

use crate::error::{Error, Result};
use crate::gram::{basepoint_rescale, rescale, GramSpace, RescalingMap};
use crate::hyperbolic::{gram_from_points, PointSet};
use crate::invariants::{delta, lf};
use crate::linalg::{frobenius, CMat, ONE, ZERO};
use crate::tol::Tolerances;

fn orthogonality_defect(k: &CMat) -> f64 {
    let n = k.nrows();
    frobenius(&(k.transpose() * k - CMat::identity(n, n)))
}

fn pairing_defect(k: &CMat) -> f64 {
    // (k_i k_j, σ)_ij = Σ_s k_is k_js.
    let n = k.nrows();
    frobenius(&(k * k.transpose() - CMat::identity(n, n)))
}

/// Whether `KᵗK = I` within `tol_eq · n`, cross-checked against the
/// equivalent condition `KKᵗ = I`.
pub fn is_orthogonal(g: &GramSpace, tol: &Tolerances) -> Result<bool> {
    let threshold = tol.tol_eq * g.n() as f64;
    let first = orthogonality_defect(g.matrix());
    let second = pairing_defect(g.matrix());
    let (lo, hi) = if first <= second { (first, second) } else { (second, first) };
    if lo <= threshold && hi > 100.0 * threshold {
        return Err(Error::InternalInconsistency {
            reason: format!("orthogonality forms disagree ({first:.3e} vs {second:.3e})"),
        });
    }
    Ok(first <= threshold)
}

/// Defects of three equivalent orthogonality conditions: `KᵗK = I`,
/// `Θ K Θ* = Kᵗ` with `Θ = K⁻¹`, and `ΘᵗΘ = I`.
pub fn orthogonality_conditions(g: &GramSpace) -> Result<[f64; 3]> {
    let k = g.matrix();
    let n = g.n();
    let theta = k.clone().cholesky().ok_or(Error::IllConditioned { condition: f64::INFINITY })?.inverse();
    let c1 = orthogonality_defect(k);
    let c3 = frobenius(&(&theta * k * theta.adjoint() - k.transpose()));
    let c4 = frobenius(&(theta.transpose() * &theta - CMat::identity(n, n)));
    Ok([c1, c3, c4])
}

/// Finite Blaschke product with simple zeros and front factor 1.
#[derive(Debug, Clone, PartialEq)]
pub struct BlaschkeProduct {
    zeros: Vec<Complex64>,
}

impl BlaschkeProduct {
    pub fn new(zeros: Vec<Complex64>) -> Result<Self> {
        for (i, z) in zeros.iter().enumerate() {
            if !(z.norm() < 1.0) {
                return Err(Error::OutOfBall { index: i, norm: z.norm() });
            }
            for (j, w) in zeros[..i].iter().enumerate() {
                if (z - w).norm() == 0.0 {
                    return Err(Error::DegenerateTriple { i: j, j: i });
                }
            }
        }
        Ok(BlaschkeProduct { zeros })
    }

    pub fn zeros(&self) -> &[Complex64] {
        &self.zeros
    }

    fn factor(a: Complex64, z: Complex64) -> Complex64 {
        (z - a) / (ONE - a.conj() * z)
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        self.zeros.iter().map(|&a| Self::factor(a, z)).product()
    }

    /// `Θ′(x_i)` at the zero `x_i`: the other factors at `x_i` times the
    /// derivative `1/(1 − |x_i|²)` of the vanishing one.
    pub fn derivative_at_zero(&self, i: usize) -> Result<Complex64> {
        let a = *self.zeros.get(i).ok_or(Error::IndexOutOfRange { index: i, n: self.zeros.len() })?;
        let others: Complex64 =
            self.zeros.iter().enumerate().filter(|&(j, _)| j != i).map(|(_, &b)| Self::factor(b, a)).product();
        Ok(others / (1.0 - a.norm_sqr()))
    }
}

pub fn blaschke_derivative(b: &BlaschkeProduct, i: usize) -> Result<Complex64> {
    b.derivative_at_zero(i)
}

/// Rescales the Hardy space Gram matrix at disk points by
/// `γ_i = conj(Θ′(x_i)^{−1/2})`, where `Θ` vanishes exactly at the points.
/// The result is orthogonal.
pub fn orthogonal_rescaling(x: &PointSet) -> Result<(GramSpace, RescalingMap)> {
    if x.dim() != 1 {
        return Err(Error::WrongDimension { expected: 1, got: x.dim() });
    }
    let zeros: Vec<Complex64> = x.points().iter().map(|p| p[0]).collect();
    let b = BlaschkeProduct::new(zeros)?;
    let g = gram_from_points(x)?;
    let gamma = (0..x.len())
        .map(|i| Ok((ONE / b.derivative_at_zero(i)?.sqrt()).conj()))
        .collect::<Result<Vec<_>>>()?;
    let map = RescalingMap::new(gamma);
    Ok((rescale(&g, &map)?, map))
}

/// Outcome of the three point orthogonality test.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ROrthogonal3d {
    /// The cubic determinant divided by `k_22 k_33 |k_23|² δ_12²`, which
    /// equals `LF_123² − δ_13²`.
    pub normalized_determinant: f64,
    /// `LF_123 − δ_13`.
    pub lf_gap: f64,
    pub verdict: bool,
}

/// Three point spaces are rescalings of orthogonal ones exactly when a
/// cubic determinant in the basepoint form vanishes.
pub fn r_orthogonal_3d_report(g: &GramSpace, tol: &Tolerances) -> Result<ROrthogonal3d> {
    if g.n() != 3 {
        return Err(Error::WrongDimension { expected: 3, got: g.n() });
    }
    let b = basepoint_rescale(g, 0)?;
    let (k22, k23, k32, k33) = (b.entry(1, 1), b.entry(1, 2), b.entry(2, 1), b.entry(2, 2));
    let m = DMatrix::from_row_slice(3, 3, &[ONE, k22, k23, ONE, k32, k33, ONE, k22 * k32, k23 * k33]);
    let det = m.determinant().re;
    let d12 = delta(g, 0, 1);
    let scale = k22.re * k33.re * k23.norm_sqr() * d12 * d12;
    let normalized_determinant = det / scale;
    let lf_gap = lf(g, 0, 1, 2)? - delta(g, 0, 2);
    Ok(ROrthogonal3d { normalized_determinant, lf_gap, verdict: normalized_determinant.abs() <= tol.tol_eq })
}

pub fn is_r_orthogonal_3d(g: &GramSpace, tol: &Tolerances) -> Result<bool> {
    Ok(r_orthogonal_3d_report(g, tol)?.verdict)
}

/// Looks for `γ` with `Γ K Γ̄` orthogonal. Writing `u_s = γ_s²`, the
/// off-diagonal conditions `Σ_s u_s k_si k_sj = 0` are linear; random
/// combinations of the approximate null space are tried and the diagonal
/// conditions checked. Returns nothing when no candidate works.
pub fn search_orthogonal_rescaling<R: Rng>(
    g: &GramSpace,
    tol: &Tolerances,
    trials: usize,
    rng: &mut R,
) -> Result<Option<RescalingMap>> {
    let n = g.n();
    let k = g.matrix();
    if n == 1 {
        let gamma = ONE / Complex64::new(k[(0, 0)].re, 0.0);
        return Ok(Some(RescalingMap::new(vec![gamma.sqrt()])));
    }
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| ((i + 1)..n).map(move |j| (i, j))).collect();
    let rows = pairs.len().max(n);
    let sys = DMatrix::from_fn(rows, n, |r, s| match pairs.get(r) {
        Some(&(i, j)) => k[(s, i)] * k[(s, j)],
        None => ZERO,
    });
    let svd = sys.svd(false, true);
    let v_t = svd.v_t.expect("requested");
    let smax = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    let null: Vec<DVector<Complex64>> = (0..n)
        .filter(|&c| svd.singular_values[c] <= tol.tol_eq.sqrt() * smax)
        .map(|c| v_t.row(c).adjoint())
        .collect();
    if null.is_empty() {
        return Ok(None);
    }
    for trial in 0..trials.max(1) {
        let mut v = DVector::from_element(n, ZERO);
        for (idx, basis) in null.iter().enumerate() {
            let w = if trial == 0 && idx == 0 {
                ONE
            } else if trial == 0 {
                ZERO
            } else {
                Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
            };
            v += basis * w;
        }
        if let Some(map) = scale_candidate(g, &v, tol)? {
            return Ok(Some(map));
        }
    }
    Ok(None)
}

fn scale_candidate(g: &GramSpace, v: &DVector<Complex64>, tol: &Tolerances) -> Result<Option<RescalingMap>> {
    let n = g.n();
    let k = g.matrix();
    // Need Σ_s u_s k_si² = 1/conj(u_i), so q_i = conj(v_i) Σ_s v_s k_si² is
    // a common positive real 1/|c|² for u = c v.
    let q: Vec<Complex64> = (0..n).map(|i| v[i].conj() * (0..n).map(|s| v[s] * k[(s, i)] * k[(s, i)]).sum::<Complex64>()).collect();
    if q.iter().any(|z| z.norm() == 0.0 || v.iter().any(|x| x.norm() == 0.0)) {
        return Ok(None);
    }
    let c = ONE / q[0].sqrt();
    let gamma: Vec<Complex64> = v.iter().map(|&x| (c * x).sqrt()).collect();
    let candidate = rescale(g, &RescalingMap::new(gamma.clone()))?;
    Ok(if is_orthogonal(&candidate, tol)? { Some(RescalingMap::new(gamma)) } else { None })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::c;
    use crate::tol::Tolerances;

    #[test]
    fn derivative_examples() {
        let single = BlaschkeProduct::new(vec![ZERO]).unwrap();
        assert_eq!(blaschke_derivative(&single, 0).unwrap(), ONE);
        let r = 0.4;
        let two = BlaschkeProduct::new(vec![ZERO, c(r, 0.0)]).unwrap();
        assert!((blaschke_derivative(&two, 0).unwrap() - c(-r, 0.0)).norm() < 1e-15);
        assert!(BlaschkeProduct::new(vec![c(0.2, 0.0), c(0.2, 0.0)]).is_err());
    }

    #[test]
    fn derivative_matches_finite_difference() {
        let b = BlaschkeProduct::new(vec![c(0.1, 0.2), c(-0.4, 0.3), c(0.5, -0.5)]).unwrap();
        let h = 1e-6;
        for i in 0..3 {
            let z = b.zeros()[i];
            let fd = (b.eval(z + h) - b.eval(z - h)) / (2.0 * h);
            assert!((fd - blaschke_derivative(&b, i).unwrap()).norm() < 1e-8);
            assert!(blaschke_derivative(&b, i).unwrap().norm() > 0.0);
        }
    }

    #[test]
    fn two_point_rescaling_is_orthogonal() {
        let x = PointSet::from_disk(&[ZERO, c(0.6, 0.0)]).unwrap();
        let (g, _) = orthogonal_rescaling(&x).unwrap();
        assert!(orthogonality_defect(g.matrix()) < 1e-9);
        assert!(is_orthogonal(&g, &Tolerances::default()).unwrap());
    }

    #[test]
    fn generic_gram_not_orthogonal() {
        let x = PointSet::from_disk(&[ZERO, c(0.6, 0.0), c(0.1, 0.3)]).unwrap();
        assert!(!is_orthogonal(&gram_from_points(&x).unwrap(), &Tolerances::default()).unwrap());
    }

    #[test]
    fn cubic_examples() {
        let tol = Tolerances::default();
        let x = PointSet::from_disk(&[c(0.1, 0.0), c(0.6, 0.2), c(-0.1, 0.3)]).unwrap();
        assert!(is_r_orthogonal_3d(&gram_from_points(&x).unwrap(), &tol).unwrap());
        let y = PointSet::new(2, vec![vec![ZERO, ZERO], vec![c(0.5, 0.0), ZERO], vec![c(0.1, 0.2), c(0.3, 0.0)]]).unwrap();
        let rep = r_orthogonal_3d_report(&gram_from_points(&y).unwrap(), &tol).unwrap();
        assert!(!rep.verdict);
        let lf = rep.lf_gap + delta(&gram_from_points(&y).unwrap(), 0, 2);
        let d13 = delta(&gram_from_points(&y).unwrap(), 0, 2);
        assert!((rep.normalized_determinant - (lf * lf - d13 * d13)).abs() < 1e-12, "{} {}", rep.normalized_determinant, lf * lf - d13 * d13);
    }

    #[test]
    fn search_recovers_three_point_rescaling() {
        use rand::SeedableRng;
        let tol = Tolerances::default();
        let x = PointSet::from_disk(&[c(0.1, 0.0), c(0.6, 0.2), c(-0.1, 0.3)]).unwrap();
        let g = gram_from_points(&x).unwrap();
        let mut rng = rand::rngs::StdRng::seed_from_u64(7);
        let map = search_orthogonal_rescaling(&g, &tol, 8, &mut rng).unwrap().expect("found");
        assert!(is_orthogonal(&rescale(&g, &map).unwrap(), &tol).unwrap());
        let y = PointSet::new(2, vec![vec![ZERO, ZERO], vec![c(0.5, 0.0), ZERO], vec![c(0.1, 0.2), c(0.3, 0.0)]]).unwrap();
        assert!(search_orthogonal_rescaling(&gram_from_points(&y).unwrap(), &tol, 8, &mut rng).unwrap().is_none());
    }
}
