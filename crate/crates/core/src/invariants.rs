//! Rescaling invariants of a Gram matrix.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{CppViolation, Error, Result};
use crate::gram::GramSpace;
use crate::linalg::{hermitian_eigenvalues, principal_arg, wrap_angle, CMat, ONE, ZERO};
use crate::tol::Tolerances;

/// The metric `δ_ij = (1 − |k̂_ij|²)^{1/2}`.
pub fn delta(g: &GramSpace, i: usize, j: usize) -> f64 {
    if i == j {
        return 0.0;
    }
    (1.0 - g.normalized_entry(i, j).norm_sqr()).max(0.0).sqrt()
}

/// Matrix of all pairwise `δ_ij`.
pub fn delta_matrix(g: &GramSpace) -> Vec<Vec<f64>> {
    let n = g.n();
    (0..n).map(|i| (0..n).map(|j| delta(g, i, j)).collect()).collect()
}

/// `A_ijk = arg(k_ij k_jk k_ki)`, principal branch.
pub fn angular_invariant(g: &GramSpace, i: usize, j: usize, k: usize) -> Result<f64> {
    g.check_distinct(&[i, j, k])?;
    let p = g.entry(i, j) * g.entry(j, k) * g.entry(k, i);
    let scale = (g.diag(i) * g.diag(j) * g.diag(k)).sqrt();
    if p.norm() < 1e-36 * scale {
        return Err(Error::DegenerateArg);
    }
    Ok(principal_arg(p))
}

/// `A_ijk − A_ijl + A_ikl − A_jkl` reduced into `(−π, π]`.
pub fn cocycle_defect(g: &GramSpace, i: usize, j: usize, k: usize, l: usize) -> Result<f64> {
    g.check_distinct(&[i, j, k, l])?;
    let s = angular_invariant(g, i, j, k)? - angular_invariant(g, i, j, l)? + angular_invariant(g, i, k, l)?
        - angular_invariant(g, j, k, l)?;
    Ok(wrap_angle(s))
}

/// `LF_ijk = |1 − k_ji k_ik / (k_jk k_ii)| / δ_ij`.
pub fn lf(g: &GramSpace, i: usize, j: usize, k: usize) -> Result<f64> {
    g.check_distinct(&[i, j, k])?;
    let ratio = g.entry(j, i) * g.entry(i, k) / (g.entry(j, k) * g.entry(i, i));
    Ok((ONE - ratio).norm() / delta(g, i, j))
}

/// The matrix `(1 − k_ir k_rj / (k_ij k_rr))` over `i, j ≠ r`.
#[derive(Debug, Clone, PartialEq)]
pub struct MqMatrix {
    /// Excluded index (0-based).
    pub r: usize,
    pub m: CMat,
}

pub fn mq_matrix(g: &GramSpace, r: usize) -> Result<MqMatrix> {
    g.check_index(r)?;
    let idx: Vec<usize> = (0..g.n()).filter(|&i| i != r).collect();
    let krr = g.entry(r, r);
    let m = DMatrix::from_fn(idx.len(), idx.len(), |a, b| {
        let (i, j) = (idx[a], idx[b]);
        ONE - g.entry(i, r) * g.entry(r, j) / (g.entry(i, j) * krr)
    });
    Ok(MqMatrix { r, m })
}

/// Result of the complete Pick property test.
#[derive(Debug, Clone, PartialEq)]
pub struct CppCertificate {
    pub cpp: bool,
    /// Smallest eigenvalue of each `MQ_r`.
    pub min_eigenvalues: Vec<f64>,
    /// The worst violation when `cpp` is false.
    pub violation: Option<CppViolation>,
}

/// Tests positivity of every `MQ_r`.
pub fn has_cpp(g: &GramSpace, tol: &Tolerances) -> CppCertificate {
    let mut min_eigenvalues = Vec::with_capacity(g.n());
    let mut violation: Option<(usize, f64, f64)> = None;
    for r in 0..g.n() {
        let mq = mq_matrix(g, r).expect("r < n");
        let ev = hermitian_eigenvalues(&mq.m);
        let (lo, hi) = match (ev.first(), ev.last()) {
            (Some(&lo), Some(&hi)) => (lo, hi),
            _ => (0.0, 0.0),
        };
        min_eigenvalues.push(lo);
        let margin = lo + tol.tol_psd * hi.max(1.0);
        if margin < 0.0 && violation.is_none_or(|(_, _, m)| margin < m) {
            violation = Some((r, lo, margin));
        }
    }
    CppCertificate {
        cpp: violation.is_none(),
        min_eigenvalues,
        violation: violation.map(|(r, lambda_min, _)| CppViolation::Eigenvalue { r, lambda_min }),
    }
}

/// Margins of the three equivalent forms of the strong triangle inequality
/// for the triple `(i, j, k)`; each form holds when its margin is `≥ 0`.
pub fn sti_margins(g: &GramSpace, i: usize, j: usize, k: usize) -> Result<[f64; 3]> {
    g.check_distinct(&[i, j, k])?;
    let (d12, d13, d23) = (delta(g, i, j), delta(g, i, k), delta(g, j, k));
    let lower = (d12 - d13).abs() / (1.0 - d12 * d13);
    let upper = (d12 + d13) / (1.0 + d12 * d13);
    let first = (d23 - lower).min(upper - d23);
    let a = g.normalized_entry(i, j).norm();
    let b = g.normalized_entry(i, k).norm();
    let c = g.normalized_entry(j, k).norm();
    let second = d12 * d13 - (1.0 - a * b / c).abs();
    let third = 2.0 / (a * b * c) - (1.0 / (a * a) + 1.0 / (c * c) + 1.0 / (b * b) - 1.0);
    Ok([first, second, third])
}

/// Strong triangle inequality for `δ` on `(i, j, k)`. The three equivalent
/// forms are evaluated and must agree away from the boundary.
pub fn sti_holds(g: &GramSpace, i: usize, j: usize, k: usize, tol: &Tolerances) -> Result<bool> {
    let margins = sti_margins(g, i, j, k)?;
    let verdict = margins[0] >= -tol.tol_eq;
    let third_scale = {
        let a = g.normalized_entry(i, j).norm();
        let b = g.normalized_entry(i, k).norm();
        let c = g.normalized_entry(j, k).norm();
        1.0 / (a * b * c)
    };
    let scaled = [margins[0], margins[1], margins[2] / third_scale];
    let decided: Vec<bool> = scaled.iter().filter(|m| m.abs() > tol.tol_eq).map(|&m| m >= 0.0).collect();
    if decided.windows(2).any(|w| w[0] != w[1]) {
        return Err(Error::InternalInconsistency {
            reason: format!("triangle inequality forms disagree: margins {:?}", margins),
        });
    }
    Ok(verdict)
}

/// Whether every triple satisfies the strong triangle inequality.
pub fn sti_all(g: &GramSpace, tol: &Tolerances) -> Result<bool> {
    for (i, j, k) in triples(g.n()) {
        if !sti_holds(g, i, j, k, tol)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Margin of the three point CPP inequality
/// `1/|k̂_12|² + 1/|k̂_23|² + 1/|k̂_13|² − 1 ≤ 2 cos A_123 / (|k̂_12||k̂_23||k̂_13|)`,
/// scaled by the product of moduli. Nonnegative when it holds.
pub fn three_point_margin(g: &GramSpace, i: usize, j: usize, k: usize) -> Result<f64> {
    let cos_a = angular_invariant(g, i, j, k)?.cos();
    let a = g.normalized_entry(i, j).norm();
    let b = g.normalized_entry(i, k).norm();
    let c = g.normalized_entry(j, k).norm();
    let lhs = 1.0 / (a * a) + 1.0 / (c * c) + 1.0 / (b * b) - 1.0;
    Ok((2.0 * cos_a / (a * b * c) - lhs) * (a * b * c))
}

fn det3(m: &[[Complex64; 3]; 3]) -> Complex64 {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

/// Extremal value `Δ(x; y, z)` from Cramer's rule on the principal
/// `3×3` block ordered `(x, y, z)`.
pub fn capital_delta(g: &GramSpace, x: usize, y: usize, z: usize, tol: &Tolerances) -> Result<f64> {
    g.check_distinct(&[x, y, z])?;
    let idx = [x, y, z];
    let mut k3 = [[ZERO; 3]; 3];
    for a in 0..3 {
        for b in 0..3 {
            k3[a][b] = g.entry(idx[a], idx[b]);
        }
    }
    let mut replaced = k3;
    for row in 0..3 {
        replaced[row][0] = if row == 0 { ONE } else { ZERO };
    }
    let minor = det3(&replaced).re;
    if minor < tol.tol_zero * g.diag(y) * g.diag(z) {
        return Err(Error::SingularSystem { pivot: minor });
    }
    let full = det3(&k3).re;
    Ok((full / (g.diag(x) * minor)).max(0.0).sqrt())
}

/// The closed form of `Δ(x; y, z)` in terms of `δ` and `k̂`.
pub fn capital_delta_closed_form(g: &GramSpace, x: usize, y: usize, z: usize) -> Result<f64> {
    g.check_distinct(&[x, y, z])?;
    let (dxy, dxz, dyz) = (delta(g, x, y), delta(g, x, z), delta(g, y, z));
    let triple = g.normalized_entry(x, y) * g.normalized_entry(y, z) * g.normalized_entry(z, x);
    let num = dyz * dyz + dxy * dxy + dxz * dxz - 2.0 + 2.0 * triple.re;
    Ok((num / (dyz * dyz)).max(0.0).sqrt())
}

/// All pairwise `δ_ij` (`i < j`) and all `A_0rs` (`0 < r < s`), 0-based.
#[derive(Debug, Clone, PartialEq)]
pub struct InvariantData {
    pub n: usize,
    pub deltas: BTreeMap<(usize, usize), f64>,
    pub angulars: BTreeMap<(usize, usize), f64>,
}

impl InvariantData {
    /// Number of real parameters, `(n−1)²` for `n ≥ 1`.
    pub fn count(&self) -> usize {
        self.deltas.len() + self.angulars.len()
    }
}

pub fn invariant_data(g: &GramSpace) -> InvariantData {
    let n = g.n();
    let mut deltas = BTreeMap::new();
    let mut angulars = BTreeMap::new();
    for i in 0..n {
        for j in (i + 1)..n {
            deltas.insert((i, j), delta(g, i, j));
        }
    }
    for r in 1..n {
        for s in (r + 1)..n {
            angulars.insert((r, s), angular_invariant(g, 0, r, s).expect("distinct indices"));
        }
    }
    InvariantData { n, deltas, angulars }
}

/// All `δ_ij` and all `Δ(0; j, k)` for `0 < j < k`.
#[derive(Debug, Clone, PartialEq)]
pub struct FrakD {
    pub n: usize,
    pub deltas: BTreeMap<(usize, usize), f64>,
    pub capital_deltas: BTreeMap<(usize, usize), f64>,
}

pub fn frak_d(g: &GramSpace, tol: &Tolerances) -> Result<FrakD> {
    let cert = has_cpp(g, tol);
    if !cert.cpp {
        return Err(Error::NotCpp { certificate: cert.violation.expect("violation recorded") });
    }
    let n = g.n();
    let data = invariant_data(g);
    let mut capital_deltas = BTreeMap::new();
    for j in 1..n {
        for k in (j + 1)..n {
            capital_deltas.insert((j, k), capital_delta(g, 0, j, k, tol)?);
        }
    }
    Ok(FrakD { n, deltas: data.deltas, capital_deltas })
}

/// Increasing index triples `i < j < k`.
pub fn triples(n: usize) -> impl Iterator<Item = (usize, usize, usize)> {
    (0..n).flat_map(move |i| ((i + 1)..n).flat_map(move |j| ((j + 1)..n).map(move |k| (i, j, k))))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c, from_rows, real_matrix};
    use std::f64::consts::PI;

    fn bergman(r: f64) -> GramSpace {
        let d = (1.0 - r * r).powi(-2);
        let e = (1.0 + r * r).powi(-2);
        GramSpace::new(real_matrix(&[&[d, 1.0, e], &[1.0, 1.0, 1.0], &[e, 1.0, d]])).unwrap()
    }

    fn symmetric_arg_gram(lambda: f64, r2: f64) -> GramSpace {
        let omega = Complex64::from_polar(1.0, 2.0 * PI / 3.0);
        let ys: Vec<Complex64> = (1..=3).map(|j| omega.powi(j) * r2.sqrt()).collect();
        let k = DMatrix::from_fn(3, 3, |i, j| (ONE - ys[i] * ys[j].conj()).powf(-lambda));
        GramSpace::new(k).unwrap()
    }

    #[test]
    fn delta_examples() {
        let g = GramSpace::new(real_matrix(&[&[1.0, 1.0], &[1.0, 4.0 / 3.0]])).unwrap();
        assert!((delta(&g, 0, 1) - 0.5).abs() < 1e-15);
        assert_eq!(delta(&g, 1, 1), 0.0);
        let b = bergman(0.5);
        assert!((delta(&b, 0, 1).powi(2) - 0.4375).abs() < 1e-14);
    }

    #[test]
    fn angular_examples() {
        let g = symmetric_arg_gram(1.0, 0.5);
        let omega = Complex64::from_polar(1.0, 2.0 * PI / 3.0);
        let expected = 3.0 * (ONE - omega * 0.5).arg();
        let a = angular_invariant(&g, 0, 1, 2).unwrap();
        assert!((a - expected).abs() < 1e-12);
        assert!((a + 1.00042).abs() < 1e-4);
        assert!((angular_invariant(&g, 0, 2, 1).unwrap() + a).abs() < 1e-14);
        assert!((angular_invariant(&g, 1, 2, 0).unwrap() - a).abs() < 1e-14);
        assert_eq!(angular_invariant(&bergman(0.3), 0, 1, 2).unwrap(), 0.0);
        assert!(angular_invariant(&g, 0, 0, 2).is_err());
    }

    #[test]
    fn lf_colinear_disk_points() {
        // DA_1 Gram at 0, 0.3, 0.6.
        let xs = [0.0, 0.3, 0.6];
        let k = DMatrix::from_fn(3, 3, |i, j| c(1.0 / (1.0 - xs[i] * xs[j]), 0.0));
        let g = GramSpace::new(k).unwrap();
        assert!((lf(&g, 0, 1, 2).unwrap() - delta(&g, 0, 2)).abs() < 1e-14);
    }

    #[test]
    fn mq_basepoint_form() {
        let k = from_rows(&[
            vec![c(1.0, 0.0), c(1.0, 0.0), c(1.0, 0.0)],
            vec![c(1.0, 0.0), c(2.0, 0.0), c(1.2, 0.3)],
            vec![c(1.0, 0.0), c(1.2, -0.3), c(1.8, 0.0)],
        ]);
        let g = GramSpace::new(k.clone()).unwrap();
        let mq = mq_matrix(&g, 0).unwrap();
        for a in 0..2 {
            for b in 0..2 {
                let expect = ONE - ONE / k[(a + 1, b + 1)];
                assert!((mq.m[(a, b)] - expect).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn mq_is_hermitian() {
        let k = from_rows(&[
            vec![c(2.0, 0.0), c(1.0, 0.5), c(0.8, -0.3)],
            vec![c(1.0, -0.5), c(3.0, 0.0), c(1.1, 0.2)],
            vec![c(0.8, 0.3), c(1.1, -0.2), c(2.5, 0.0)],
        ]);
        let g = GramSpace::new(k).unwrap();
        for r in 0..3 {
            let m = mq_matrix(&g, r).unwrap().m;
            assert!((&m - m.adjoint()).iter().all(|z| z.norm() < 1e-14));
        }
    }

    #[test]
    fn cpp_examples() {
        let tol = Tolerances::default();
        let cert = has_cpp(&bergman(0.5), &tol);
        assert!(!cert.cpp);
        assert!(matches!(cert.violation, Some(CppViolation::Eigenvalue { .. })));
        assert!(!has_cpp(&symmetric_arg_gram(2.0, 0.9), &tol).cpp);
        let xs = [0.1, -0.4, 0.7];
        let k = DMatrix::from_fn(3, 3, |i, j| c(1.0 / (1.0 - xs[i] * xs[j]), 0.0));
        assert!(has_cpp(&GramSpace::new(k).unwrap(), &tol).cpp);
    }

    #[test]
    fn sti_examples() {
        let tol = Tolerances::default();
        assert!(!sti_holds(&bergman(0.1), 0, 1, 2, &tol).unwrap());
        assert!(!sti_holds(&bergman(0.1), 1, 0, 2, &tol).unwrap());
        let xs = [0.1, -0.4, 0.7];
        let k = DMatrix::from_fn(3, 3, |i, j| c(1.0 / (1.0 - xs[i] * xs[j]), 0.0));
        assert!(sti_holds(&GramSpace::new(k).unwrap(), 0, 1, 2, &tol).unwrap());
        assert!(sti_holds(&bergman(0.1), 0, 0, 2, &tol).is_err());
    }

    #[test]
    fn invariant_data_counts() {
        let g = GramSpace::new(real_matrix(&[&[1.0, 1.0], &[1.0, 2.0]])).unwrap();
        let d = invariant_data(&g);
        assert_eq!((d.deltas.len(), d.angulars.len()), (1, 0));
        let n = 5;
        let k = DMatrix::from_fn(n, n, |i, j| c(1.0 / (1.0 - 0.1 * (i * j) as f64 / 2.0), 0.0));
        let d = invariant_data(&GramSpace::new(k).unwrap());
        assert_eq!((d.deltas.len(), d.angulars.len(), d.count()), (10, 6, 16));
    }

    #[test]
    fn frak_d_requires_cpp() {
        let tol = Tolerances::default();
        assert!(matches!(frak_d(&bergman(0.5), &tol), Err(Error::NotCpp { .. })));
    }

    #[test]
    fn triples_enumerates_increasing() {
        let t: Vec<_> = triples(4).collect();
        assert_eq!(t, vec![(0, 1, 2), (0, 1, 3), (0, 2, 3), (1, 2, 3)]);
    }
}
