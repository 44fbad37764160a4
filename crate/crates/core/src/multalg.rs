//! Multipliers: operator norms, extremal multipliers and kernels, and
//! reconstruction of a space from extremal multiplier values.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::embedding::gram_from_invariants;
use crate::error::{Error, Result};
use crate::gram::{basepoint_rescale, conjugate_space, validate_gram, GramSpace};
use crate::invariants::{delta, has_cpp, FrakD, InvariantData};
use crate::linalg::{approx_eq, CMat, ONE, ZERO};
use crate::tol::Tolerances;

/// Values `m(x_i)` of a multiplier on the points of the space.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiplierSymbol {
    pub values: Vec<Complex64>,
}

impl MultiplierSymbol {
    pub fn new(values: Vec<Complex64>) -> Self {
        MultiplierSymbol { values }
    }

    pub fn constant(n: usize, c: Complex64) -> Self {
        MultiplierSymbol { values: vec![c; n] }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Operator norm together with the diagonal shift applied before factoring.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MultiplierNorm {
    pub norm: f64,
    pub jitter: f64,
}

/// Norm of multiplication by `m`. The adjoint acts diagonally on kernels,
/// `M* k_x = conj(m(x)) k_x`, so with `K = L L*` the norm is the largest
/// singular value of `L* D L^{-*}`, `D = diag(m)`.
pub fn multiplier_norm_report(g: &GramSpace, m: &MultiplierSymbol, tol: &Tolerances) -> Result<MultiplierNorm> {
    let n = g.n();
    if m.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: m.len() });
    }
    let k = g.matrix();
    let trace: f64 = (0..n).map(|i| g.diag(i)).sum();
    let mut jitter = 0.0;
    let mut chol = k.clone().cholesky();
    let mut step = tol.tol_psd * trace / n as f64;
    while chol.is_none() {
        if jitter > trace {
            return Err(Error::IllConditioned { condition: f64::INFINITY });
        }
        jitter = step;
        step *= 10.0;
        chol = (k + CMat::identity(n, n) * Complex64::new(jitter, 0.0)).cholesky();
    }
    let l = chol.expect("factored").l();
    let lh = l.adjoint();
    let d = CMat::from_diagonal(&nalgebra::DVector::from_vec(m.values.clone()));
    // B = L* D L^{-*}; solve B L* = L* D for B via a triangular solve on the transpose side.
    let rhs = &lh * &d;
    let b_h = l
        .solve_lower_triangular(&rhs.adjoint())
        .ok_or(Error::SingularSystem { pivot: 0.0 })?;
    let b = b_h.adjoint();
    let norm = b.singular_values().iter().cloned().fold(0.0, f64::max);
    Ok(MultiplierNorm { norm, jitter })
}

pub fn multiplier_norm(g: &GramSpace, m: &MultiplierSymbol) -> Result<f64> {
    Ok(multiplier_norm_report(g, m, &Tolerances::default())?.norm)
}

/// `m(·) = (1 − k_xy k_y(·) / (k_yy k_x(·))) / δ(x, y)`, which vanishes at
/// `y` and equals `δ(x, y)` at `x`.
pub fn extremal_multiplier(g: &GramSpace, x: usize, y: usize) -> Result<MultiplierSymbol> {
    g.check_distinct(&[x, y])?;
    let d = delta(g, x, y);
    let kxy = g.entry(x, y);
    let kyy = g.entry(y, y);
    let values = (0..g.n()).map(|i| (ONE - kxy * g.entry(y, i) / (kyy * g.entry(x, i))) / d).collect();
    Ok(MultiplierSymbol { values })
}

/// Kernel coefficients of the unit vector `(k_x − k_xy k_y / k_yy) / (‖k_x‖ δ)`.
pub fn extremal_kernel(g: &GramSpace, x: usize, y: usize) -> Result<Vec<Complex64>> {
    g.check_distinct(&[x, y])?;
    let scale = g.diag(x).sqrt() * delta(g, x, y);
    let mut c = vec![ZERO; g.n()];
    c[x] = Complex64::new(1.0 / scale, 0.0);
    c[y] = -g.entry(x, y) / (g.entry(y, y) * scale);
    Ok(c)
}

/// Values `f(x_i) = Σ_j c_j k_j(x_i)` of `f = Σ c_j k_j`.
pub fn kernel_values(g: &GramSpace, coeffs: &[Complex64]) -> Vec<Complex64> {
    (0..g.n()).map(|i| (0..g.n()).map(|j| coeffs[j] * g.entry(j, i)).sum()).collect()
}

/// Squared norm of `Σ c_j k_j`.
pub fn kernel_norm_sqr(g: &GramSpace, coeffs: &[Complex64]) -> f64 {
    let mut s = ZERO;
    for i in 0..g.n() {
        for j in 0..g.n() {
            s += coeffs[i] * coeffs[j].conj() * g.entry(i, j);
        }
    }
    s.re
}

/// Values `e_jk = m_j(x_k)` (`j, k ≥ 1`, 0-based) of the norm one
/// multipliers vanishing at the first point.
#[derive(Debug, Clone, PartialEq)]
pub struct HartzData {
    pub e: CMat,
}

impl HartzData {
    /// Number of points of the space.
    pub fn n(&self) -> usize {
        self.e.nrows() + 1
    }
}

/// After basepoint rescaling, `e_jk = (1 − 1/k_jj)^{−1/2} (1 − 1/k_jk)`.
pub fn hartz_data(g: &GramSpace, tol: &Tolerances) -> Result<HartzData> {
    let cert = has_cpp(g, tol);
    if !cert.cpp {
        return Err(Error::NotCpp { certificate: cert.violation.expect("violation recorded") });
    }
    let b = basepoint_rescale(g, 0)?;
    let m = g.n() - 1;
    let e = DMatrix::from_fn(m, m, |j, k| {
        let (j, k) = (j + 1, k + 1);
        (ONE - ONE / b.entry(j, k)) / (1.0 - 1.0 / b.diag(j)).sqrt()
    });
    Ok(HartzData { e })
}

/// Rebuilds the basepoint form `k_jj = 1/(1 − e_jj²)`, `k_jk = 1/(1 − e_jk e_jj)`.
pub fn reconstruct_from_hartz(data: &HartzData, tol: &Tolerances) -> Result<GramSpace> {
    let m = data.e.nrows();
    if data.e.ncols() != m {
        return Err(Error::NotSquare { rows: m, cols: data.e.ncols() });
    }
    let e = &data.e;
    for j in 0..m {
        let ejj = e[(j, j)];
        if !(ejj.re > 0.0 && ejj.re < 1.0) || ejj.im.abs() > tol.tol_eq {
            return Err(Error::Infeasible { reason: format!("diagonal entry {} is {} (must lie in (0, 1))", j + 2, ejj) });
        }
        for k in 0..m {
            if !(e[(j, k)].norm() < 1.0) {
                return Err(Error::Infeasible { reason: format!("entry ({}, {}) has modulus {} ≥ 1", j + 2, k + 2, e[(j, k)].norm()) });
            }
        }
    }
    let n = m + 1;
    let k = DMatrix::from_fn(n, n, |a, b| {
        if a == 0 || b == 0 {
            ONE
        } else if a == b {
            Complex64::new(1.0 / (1.0 - e[(a - 1, a - 1)].re.powi(2)), 0.0)
        } else {
            ONE / (ONE - e[(a - 1, b - 1)] * e[(a - 1, a - 1)].re)
        }
    });
    let g = validate_gram(k, tol).map_err(|err| Error::Infeasible { reason: err.to_string() })?;
    let cert = has_cpp(&g, tol);
    if !cert.cpp {
        return Err(Error::Infeasible {
            reason: format!("reconstruction lacks the complete Pick property ({})", cert.violation.unwrap()),
        });
    }
    Ok(g)
}

/// Upper bound `2^{(n² − 3n)/2}` on the number of congruence classes
/// (identifying a configuration with its conjugate) sharing the data `δ_ij`
/// and `Δ(1; j, k)`.
pub fn ambiguity_classes(_d: &FrakD, n: usize) -> u64 {
    if n <= 3 {
        return 1;
    }
    1u64 << ((n * n - 3 * n) / 2)
}

/// Outcome of enumerating the sign choices left open by the data.
#[derive(Debug, Clone)]
pub struct AmbiguityReport {
    pub bound: u64,
    pub patterns_tried: usize,
    /// Feasible spaces, one per class up to rescaling and conjugation.
    pub classes: Vec<GramSpace>,
}

/// Recovers `cos A_1jk` from `Δ(1; j, k)` and tries every sign of
/// `A_1jk`, keeping the complete Pick spaces. Limited to `n ≤ 6`.
pub fn ambiguity_candidates(d: &FrakD, tol: &Tolerances) -> Result<AmbiguityReport> {
    let n = d.n;
    if n > 6 {
        return Err(Error::HypothesisFailed { reason: format!("sign enumeration is limited to n ≤ 6, got {n}") });
    }
    let bound = ambiguity_classes(d, n);
    let get = |a: usize, b: usize| d.deltas[&(a.min(b), a.max(b))];
    let pairs: Vec<(usize, usize)> = (1..n).flat_map(|j| ((j + 1)..n).map(move |k| (j, k))).collect();
    let mut magnitudes = Vec::with_capacity(pairs.len());
    for &(j, k) in &pairs {
        let (d0j, d0k, djk) = (get(0, j), get(0, k), get(j, k));
        let cap = d.capital_deltas[&(j, k)];
        let moduli = ((1.0 - d0j * d0j) * (1.0 - d0k * d0k) * (1.0 - djk * djk)).sqrt();
        let cos = (djk * djk * cap * cap - djk * djk - d0j * d0j - d0k * d0k + 2.0) / (2.0 * moduli);
        if cos.abs() > 1.0 + tol.tol_eq.sqrt() {
            return Ok(AmbiguityReport { bound, patterns_tried: 0, classes: Vec::new() });
        }
        magnitudes.push(cos.clamp(-1.0, 1.0).acos());
    }
    let total = 1usize << pairs.len();
    let mut classes: Vec<GramSpace> = Vec::new();
    for pattern in 0..total {
        let mut angulars = BTreeMap::new();
        for (bit, (&pair, &mag)) in pairs.iter().zip(&magnitudes).enumerate() {
            let sign = if pattern >> bit & 1 == 1 { -1.0 } else { 1.0 };
            angulars.insert(pair, sign * mag);
        }
        let data = InvariantData { n, deltas: d.deltas.clone(), angulars };
        let g = match gram_from_invariants(&data) {
            Ok(g) => g,
            Err(_) => continue,
        };
        if !has_cpp(&g, tol).cpp {
            continue;
        }
        let conj = conjugate_space(&g);
        let seen = classes.iter().any(|c| {
            approx_eq(c.matrix(), g.matrix(), tol.tol_eq) || approx_eq(c.matrix(), conj.matrix(), tol.tol_eq)
        });
        if !seen {
            classes.push(g);
        }
    }
    Ok(AmbiguityReport { bound, patterns_tried: total, classes })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hyperbolic::{gram_from_points, PointSet};
    use crate::invariants::frak_d;
    use crate::linalg::{c, real_matrix};

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    fn disk_gram(zs: &[Complex64]) -> GramSpace {
        gram_from_points(&PointSet::from_disk(zs).unwrap()).unwrap()
    }

    #[test]
    fn constant_symbol() {
        let g = disk_gram(&[c(0.1, 0.0), c(-0.3, 0.2), c(0.4, 0.4)]);
        let m = MultiplierSymbol::constant(3, c(0.3, -0.4));
        assert!((multiplier_norm(&g, &m).unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn coordinate_multiplier_has_norm_one() {
        let zs = [c(0.1, 0.0), c(-0.3, 0.2), c(0.4, 0.4), c(0.0, -0.6)];
        let g = disk_gram(&zs);
        let norm = multiplier_norm(&g, &MultiplierSymbol::new(zs.to_vec())).unwrap();
        assert!((norm - 1.0).abs() < 1e-10);
    }

    #[test]
    fn extremal_multiplier_on_disk() {
        let s = 0.6;
        let g = disk_gram(&[ZERO, c(s, 0.0)]);
        let m = extremal_multiplier(&g, 0, 1).unwrap();
        assert!((m.values[0] - c(s, 0.0)).norm() < 1e-14);
        assert!(m.values[1].norm() < 1e-14);
        assert!((multiplier_norm(&g, &m).unwrap() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn bergman_multiplier_is_reported() {
        let r: f64 = 0.5;
        let d = (1.0 - r * r).powi(-2);
        let e = (1.0 + r * r).powi(-2);
        let g = GramSpace::new(real_matrix(&[&[d, 1.0, e], &[1.0, 1.0, 1.0], &[e, 1.0, d]])).unwrap();
        let m = extremal_multiplier(&g, 0, 2).unwrap();
        assert!(multiplier_norm(&g, &m).unwrap() > 1.0 - 1e-12);
    }

    #[test]
    fn extremal_kernel_properties() {
        let g = disk_gram(&[c(0.1, 0.2), c(-0.3, 0.2), c(0.4, -0.1)]);
        let h = extremal_kernel(&g, 0, 2).unwrap();
        assert!((kernel_norm_sqr(&g, &h) - 1.0).abs() < 1e-13);
        let vals = kernel_values(&g, &h);
        assert!(vals[2].norm() < 1e-14);
        assert!((vals[0] - c(delta(&g, 0, 2) * g.diag(0).sqrt(), 0.0)).norm() < 1e-13);
        let m = extremal_multiplier(&g, 0, 2).unwrap();
        for i in 0..3 {
            let mk = m.values[i] * g.entry(0, i) / g.diag(0).sqrt();
            assert!((mk - vals[i]).norm() < 1e-13);
        }
    }

    #[test]
    fn hartz_examples() {
        let g = disk_gram(&[ZERO, c(0.5, 0.0)]);
        let h = hartz_data(&g, &tol()).unwrap();
        assert!((h.e[(0, 0)] - c(0.5, 0.0)).norm() < 1e-15);
        let back = reconstruct_from_hartz(&h, &tol()).unwrap();
        assert!(approx_eq(back.matrix(), &real_matrix(&[&[1.0, 1.0], &[1.0, 4.0 / 3.0]]), 1e-14));
    }

    #[test]
    fn hartz_diagonal_is_delta() {
        let g = disk_gram(&[c(0.1, 0.2), c(-0.3, 0.2), c(0.4, -0.1), c(0.0, 0.5)]);
        let h = hartz_data(&g, &tol()).unwrap();
        for j in 1..4 {
            assert!((h.e[(j - 1, j - 1)] - c(delta(&g, 0, j), 0.0)).norm() < 1e-13);
            let m = extremal_multiplier(&g, j, 0).unwrap();
            for k in 1..4 {
                assert!((m.values[k] - h.e[(j - 1, k - 1)]).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn hartz_rejects_large_entries() {
        let e = DMatrix::from_row_slice(2, 2, &[c(0.5, 0.0), c(1.2, 0.0), c(0.3, 0.0), c(0.4, 0.0)]);
        assert!(matches!(reconstruct_from_hartz(&HartzData { e }, &tol()), Err(Error::Infeasible { .. })));
    }

    #[test]
    fn ambiguity_bound_values() {
        let g = disk_gram(&[ZERO, c(0.5, 0.0), c(0.1, 0.4)]);
        let d = frak_d(&g, &tol()).unwrap();
        assert_eq!(ambiguity_classes(&d, 3), 1);
        assert_eq!(ambiguity_classes(&d, 4), 4);
        assert_eq!(ambiguity_classes(&d, 5), 32);
    }

    #[test]
    fn ambiguity_enumeration_contains_original() {
        let x = PointSet::new(
            2,
            vec![vec![ZERO, ZERO], vec![c(0.5, 0.0), ZERO], vec![c(0.1, 0.2), c(0.3, 0.0)], vec![c(-0.2, 0.1), c(0.1, 0.3)]],
        )
        .unwrap();
        let g = gram_from_points(&x).unwrap();
        let d = frak_d(&g, &tol()).unwrap();
        let report = ambiguity_candidates(&d, &tol()).unwrap();
        assert!(report.classes.len() as u64 <= report.bound);
        let b = basepoint_rescale(&g, 0).unwrap();
        let bc = conjugate_space(&b);
        assert!(report
            .classes
            .iter()
            .any(|c| approx_eq(c.matrix(), b.matrix(), 1e-7) || approx_eq(c.matrix(), bc.matrix(), 1e-7)));
    }
}
