//! Gram matrices of finite reproducing kernel Hilbert spaces and the
//! rescaling calculus.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{approx_eq, frobenius, hermitian_eigenvalues, hermitian_part, CMat, ONE};
use crate::tol::Tolerances;

/// A finite RKHS, represented by the Gram matrix `k_ij = ⟨k_i, k_j⟩` of its
/// kernel basis.
#[derive(Debug, Clone, PartialEq)]
pub struct GramSpace {
    k: CMat,
    labels: Option<Vec<String>>,
    reducible: Option<(usize, usize)>,
    tree: bool,
}

/// Outcome of each validation check on a candidate Gram matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    pub hermitian_defect: f64,
    pub hermitian: bool,
    pub lambda_min: f64,
    pub lambda_max: f64,
    pub positive_definite: bool,
    /// First offending pair (0-based) if the space is reducible.
    pub reducible: Option<(usize, usize)>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.hermitian && self.positive_definite && self.reducible.is_none()
    }

    fn first_error(&self) -> Option<Error> {
        if !self.hermitian {
            Some(Error::NotHermitian { defect: self.hermitian_defect })
        } else if !self.positive_definite {
            Some(Error::NotPositiveDefinite { lambda_min: self.lambda_min, lambda_max: self.lambda_max })
        } else {
            self.reducible.map(|(i, j)| Error::Reducible { i, j })
        }
    }
}

fn check_shape(k: &CMat) -> Result<()> {
    if k.nrows() != k.ncols() || k.nrows() == 0 {
        return Err(Error::NotSquare { rows: k.nrows(), cols: k.ncols() });
    }
    for i in 0..k.nrows() {
        for j in 0..k.ncols() {
            let z = k[(i, j)];
            if !(z.re.is_finite() && z.im.is_finite()) {
                return Err(Error::NonFinite { i, j });
            }
        }
    }
    Ok(())
}

fn find_reducible(k: &CMat, tol: &Tolerances) -> Option<(usize, usize)> {
    let n = k.nrows();
    for i in 0..n {
        for j in (i + 1)..n {
            let kii = k[(i, i)].re;
            let kjj = k[(j, j)].re;
            let kij = k[(i, j)].norm();
            if kij <= tol.tol_zero * (kii * kjj).abs().sqrt() {
                return Some((i, j));
            }
            // Parallel kernels: |k̂_ij| = 1.
            if kii > 0.0 && kjj > 0.0 && 1.0 - kij * kij / (kii * kjj) <= tol.tol_zero {
                return Some((i, j));
            }
        }
    }
    None
}

/// Runs every validation check and reports the results without failing on
/// the first one.
pub fn validation_report(k: &CMat, tol: &Tolerances) -> Result<ValidationReport> {
    check_shape(k)?;
    let defect = frobenius(&(k - k.adjoint())) / (1.0 + frobenius(k));
    let hermitian = defect <= tol.tol_eq;
    let ev = hermitian_eigenvalues(k);
    let lambda_min = ev[0];
    let lambda_max = *ev.last().unwrap();
    let positive_definite = lambda_max > 0.0 && lambda_min > tol.tol_psd * lambda_max;
    let reducible = find_reducible(&hermitian_part(k), tol);
    Ok(ValidationReport { hermitian_defect: defect, hermitian, lambda_min, lambda_max, positive_definite, reducible })
}

/// Validates `k` as the Gram matrix of an irreducible space.
pub fn validate_gram(k: CMat, tol: &Tolerances) -> Result<GramSpace> {
    let report = validation_report(&k, tol)?;
    if let Some(e) = report.first_error() {
        return Err(e);
    }
    Ok(GramSpace { k: hermitian_part(&k), labels: None, reducible: None, tree: false })
}

impl GramSpace {
    /// Validates with default tolerances.
    pub fn new(k: CMat) -> Result<Self> {
        validate_gram(k, &Tolerances::default())
    }

    /// Wraps a matrix known to be Hermitian positive definite; only the
    /// reducibility flag is recomputed.
    pub(crate) fn from_trusted(k: CMat) -> Self {
        let k = hermitian_part(&k);
        let reducible = find_reducible(&k, &Tolerances::default());
        GramSpace { k, labels: None, reducible, tree: false }
    }

    pub(crate) fn mark_tree(mut self) -> Self {
        self.tree = true;
        self
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Result<Self> {
        if labels.len() != self.n() {
            return Err(Error::DimensionMismatch { expected: self.n(), got: labels.len() });
        }
        self.labels = Some(labels);
        Ok(self)
    }

    pub fn n(&self) -> usize {
        self.k.nrows()
    }

    pub fn matrix(&self) -> &CMat {
        &self.k
    }

    pub fn into_matrix(self) -> CMat {
        self.k
    }

    pub fn entry(&self, i: usize, j: usize) -> Complex64 {
        self.k[(i, j)]
    }

    /// Diagonal entry `k_ii` as a real number.
    pub fn diag(&self, i: usize) -> f64 {
        self.k[(i, i)].re
    }

    /// `k̂_ij = k_ij / √(k_ii k_jj)`.
    pub fn normalized_entry(&self, i: usize, j: usize) -> Complex64 {
        self.k[(i, j)] / (self.diag(i) * self.diag(j)).sqrt()
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    /// Set when the space fails irreducibility; only possible for outputs of
    /// operations that do not preserve it, such as [`dualized_space`].
    pub fn reducible_pair(&self) -> Option<(usize, usize)> {
        self.reducible
    }

    /// Whether the space was produced by a tree kernel construction.
    pub fn is_tree_kernel(&self) -> bool {
        self.tree
    }

    pub(crate) fn check_index(&self, i: usize) -> Result<()> {
        if i >= self.n() {
            Err(Error::IndexOutOfRange { index: i, n: self.n() })
        } else {
            Ok(())
        }
    }

    pub(crate) fn check_distinct(&self, idx: &[usize]) -> Result<()> {
        for (a, &i) in idx.iter().enumerate() {
            self.check_index(i)?;
            if idx[..a].contains(&i) {
                return Err(Error::RepeatedIndex);
            }
        }
        Ok(())
    }

    /// Principal submatrix on the given indices, in that order.
    pub fn subspace(&self, idx: &[usize]) -> Result<GramSpace> {
        for &i in idx {
            self.check_index(i)?;
        }
        let k = DMatrix::from_fn(idx.len(), idx.len(), |a, b| self.k[(idx[a], idx[b])]);
        let mut g = GramSpace::from_trusted(k);
        g.tree = self.tree;
        Ok(g)
    }
}

/// A rescaling `k̃_ij = γ_i k_{π(i)π(j)} conj(γ_j)`, optionally combined
/// with a relabelling `π` (0-based).
#[derive(Debug, Clone, PartialEq)]
pub struct RescalingMap {
    pub gamma: Vec<Complex64>,
    pub perm: Option<Vec<usize>>,
}

impl RescalingMap {
    pub fn new(gamma: Vec<Complex64>) -> Self {
        RescalingMap { gamma, perm: None }
    }

    pub fn with_perm(gamma: Vec<Complex64>, perm: Vec<usize>) -> Self {
        RescalingMap { gamma, perm: Some(perm) }
    }

    pub fn identity(n: usize) -> Self {
        RescalingMap::new(vec![ONE; n])
    }
}

pub fn rescale(g: &GramSpace, r: &RescalingMap) -> Result<GramSpace> {
    let n = g.n();
    if r.gamma.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: r.gamma.len() });
    }
    for (i, z) in r.gamma.iter().enumerate() {
        if !(z.norm() > 0.0 && z.re.is_finite() && z.im.is_finite()) {
            return Err(Error::ZeroRescaling { index: i });
        }
    }
    let perm: Vec<usize> = match &r.perm {
        Some(p) => {
            if p.len() != n {
                return Err(Error::DimensionMismatch { expected: n, got: p.len() });
            }
            let mut seen = vec![false; n];
            for &v in p {
                if v >= n || seen[v] {
                    return Err(Error::Parse("rescaling permutation is not a bijection".into()));
                }
                seen[v] = true;
            }
            p.clone()
        }
        None => (0..n).collect(),
    };
    let k = DMatrix::from_fn(n, n, |i, j| r.gamma[i] * g.k[(perm[i], perm[j])] * r.gamma[j].conj());
    let mut out = GramSpace::from_trusted(k);
    out.tree = g.tree;
    Ok(out)
}

/// Rescaling by `γ_i = √k_bb / k_ib`, which puts ones in row and column `b`.
pub fn basepoint_rescale(g: &GramSpace, b: usize) -> Result<GramSpace> {
    g.check_index(b)?;
    let root = g.diag(b).sqrt();
    let gamma: Vec<Complex64> = (0..g.n()).map(|i| root / g.entry(i, b)).collect();
    let mut out = rescale(g, &RescalingMap::new(gamma))?;
    for i in 0..g.n() {
        out.k[(i, b)] = ONE;
        out.k[(b, i)] = ONE;
    }
    Ok(out)
}

/// Unit diagonal with a real nonnegative first row.
pub fn normalized_rescale(g: &GramSpace) -> GramSpace {
    let gamma: Vec<Complex64> = (0..g.n())
        .map(|i| {
            let phase = g.entry(0, i) / g.entry(0, i).norm();
            phase / g.diag(i).sqrt()
        })
        .collect();
    let mut out = rescale(g, &RescalingMap::new(gamma)).expect("gamma has length n and no zeros");
    for i in 0..g.n() {
        out.k[(i, i)] = ONE;
        let v = out.k[(0, i)].norm();
        out.k[(0, i)] = Complex64::new(v, 0.0);
        out.k[(i, 0)] = Complex64::new(v, 0.0);
    }
    out
}

/// Searches for a relabelling `π` with `basepoint_rescale(g1, 0)` equal to
/// the basepoint form of `g2` relabelled by `π`. The identity is tried first;
/// other permutations are searched only when `n ≤ 8`.
pub fn find_correspondence(g1: &GramSpace, g2: &GramSpace, tol: &Tolerances) -> Result<Option<Vec<usize>>> {
    let n = g1.n();
    if g2.n() != n {
        return Err(Error::DimensionMismatch { expected: n, got: g2.n() });
    }
    let b1 = basepoint_rescale(g1, 0)?;
    let bound = tol.tol_eq * (1.0 + frobenius(&b1.k));
    let identity: Vec<usize> = (0..n).collect();
    if approx_eq(&b1.k, &basepoint_rescale(g2, 0)?.k, tol.tol_eq) {
        return Ok(Some(identity));
    }
    if n > 8 {
        return Ok(None);
    }
    for b in 0..n {
        let b2 = basepoint_rescale(g2, b)?;
        let mut perm = vec![usize::MAX; n];
        let mut used = vec![false; n];
        perm[0] = b;
        used[b] = true;
        if extend_perm(&b1.k, &b2.k, &mut perm, &mut used, 1, 0.0, bound * bound) {
            return Ok(Some(perm));
        }
    }
    Ok(None)
}

fn extend_perm(a: &CMat, b: &CMat, perm: &mut [usize], used: &mut [bool], depth: usize, acc: f64, budget: f64) -> bool {
    let n = perm.len();
    if depth == n {
        return true;
    }
    for cand in 0..n {
        if used[cand] {
            continue;
        }
        perm[depth] = cand;
        let mut add = (a[(depth, depth)] - b[(cand, cand)]).norm_sqr();
        for prev in 0..depth {
            add += 2.0 * (a[(depth, prev)] - b[(cand, perm[prev])]).norm_sqr();
        }
        if acc + add <= budget {
            used[cand] = true;
            if extend_perm(a, b, perm, used, depth + 1, acc + add, budget) {
                return true;
            }
            used[cand] = false;
        }
    }
    perm[depth] = usize::MAX;
    false
}

/// Whether two spaces agree up to rescaling (and relabelling when `n ≤ 8`).
pub fn rescaling_equivalent(g1: &GramSpace, g2: &GramSpace, tol: &Tolerances) -> Result<bool> {
    Ok(find_correspondence(g1, g2, tol)?.is_some())
}

/// Equivalence under rescaling with a caller-supplied relabelling
/// (`g1` index `i` corresponds to `g2` index `perm[i]`).
pub fn rescaling_equivalent_with(g1: &GramSpace, g2: &GramSpace, perm: &[usize], tol: &Tolerances) -> Result<bool> {
    let relabelled = rescale(g2, &RescalingMap::with_perm(vec![ONE; g2.n()], perm.to_vec()))?;
    let a = basepoint_rescale(g1, 0)?;
    let b = basepoint_rescale(&relabelled, 0)?;
    Ok(approx_eq(&a.k, &b.k, tol.tol_eq))
}

/// The conjugate space, whose Gram matrix is the transpose.
pub fn conjugate_space(g: &GramSpace) -> GramSpace {
    let mut out = g.clone();
    out.k = g.k.transpose();
    out
}

/// The space whose Gram matrix is `K⁻¹`. Irreducibility may fail; the
/// result then carries [`GramSpace::reducible_pair`].
pub fn dualized_space(g: &GramSpace, tol: &Tolerances) -> Result<GramSpace> {
    let ev = hermitian_eigenvalues(&g.k);
    let condition = ev.last().unwrap() / ev[0];
    if !(condition.is_finite() && condition > 0.0) || condition > 1.0 / tol.tol_rank {
        return Err(Error::IllConditioned { condition });
    }
    let inv = g
        .k
        .clone()
        .cholesky()
        .map(|ch| ch.inverse())
        .ok_or(Error::IllConditioned { condition })?;
    Ok(GramSpace::from_trusted(inv))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c, from_rows, real_matrix};

    fn g(rows: &[&[f64]]) -> GramSpace {
        GramSpace::new(real_matrix(rows)).unwrap()
    }

    #[test]
    fn validates_simple_gram() {
        assert_eq!(g(&[&[1.0, 1.0], &[1.0, 2.0]]).n(), 2);
    }

    #[test]
    fn identity_is_reducible() {
        let e = GramSpace::new(real_matrix(&[&[1.0, 0.0], &[0.0, 1.0]])).unwrap_err();
        assert_eq!(e, Error::Reducible { i: 0, j: 1 });
    }

    #[test]
    fn rejects_non_hermitian_and_singular() {
        let k = from_rows(&[vec![c(1.0, 0.0), c(1.0, 0.5)], vec![c(1.0, 0.5), c(3.0, 0.0)]]);
        assert!(matches!(GramSpace::new(k), Err(Error::NotHermitian { .. })));
        let k = from_rows(&[vec![c(1.0, 0.0), c(0.0, 1.0)], vec![c(0.0, -1.0), c(1.0, 0.0)]]);
        assert!(matches!(GramSpace::new(k), Err(Error::NotPositiveDefinite { .. })));
        assert!(matches!(GramSpace::new(CMat::zeros(2, 3)), Err(Error::NotSquare { .. })));
    }

    #[test]
    fn report_lists_all_failures() {
        let r = validation_report(&real_matrix(&[&[1.0, 0.0], &[0.0, -1.0]]), &Tolerances::default()).unwrap();
        assert!(r.hermitian && !r.positive_definite && r.reducible.is_some());
    }

    #[test]
    fn bergman_three_points_valid() {
        let r: f64 = 0.5;
        let d = (1.0 - r * r).powi(-2);
        let e = (1.0 + r * r).powi(-2);
        assert!(GramSpace::new(real_matrix(&[&[d, 1.0, e], &[1.0, 1.0, 1.0], &[e, 1.0, d]])).is_ok());
    }

    #[test]
    fn rescale_examples() {
        let base = g(&[&[1.0, 1.0], &[1.0, 2.0]]);
        let out = rescale(&base, &RescalingMap::new(vec![c(2.0, 0.0), c(1.0, 0.0)])).unwrap();
        assert!(approx_eq(out.matrix(), &real_matrix(&[&[4.0, 2.0], &[2.0, 2.0]]), 1e-15));
        let same = rescale(&base, &RescalingMap::identity(2)).unwrap();
        assert_eq!(same.matrix(), base.matrix());
        let phase = Complex64::from_polar(1.0, 0.7);
        let same = rescale(&base, &RescalingMap::new(vec![phase, phase])).unwrap();
        assert!(approx_eq(same.matrix(), base.matrix(), 1e-14));
        assert!(rescale(&base, &RescalingMap::new(vec![ONE])).is_err());
        assert!(rescale(&base, &RescalingMap::new(vec![ONE, c(0.0, 0.0)])).is_err());
    }

    #[test]
    fn basepoint_examples() {
        let a = basepoint_rescale(&g(&[&[1.0, 1.0], &[1.0, 2.0]]), 0).unwrap();
        assert!(approx_eq(a.matrix(), &real_matrix(&[&[1.0, 1.0], &[1.0, 2.0]]), 1e-15));
        let b = basepoint_rescale(&g(&[&[4.0, 2.0], &[2.0, 2.0]]), 0).unwrap();
        assert!(approx_eq(b.matrix(), &real_matrix(&[&[1.0, 1.0], &[1.0, 2.0]]), 1e-15));
        assert!(basepoint_rescale(&b, 2).is_err());
    }

    #[test]
    fn basepoint_puts_ones_and_is_idempotent() {
        let k = from_rows(&[
            vec![c(2.0, 0.0), c(1.0, 0.5), c(0.8, -0.3)],
            vec![c(1.0, -0.5), c(3.0, 0.0), c(1.1, 0.2)],
            vec![c(0.8, 0.3), c(1.1, -0.2), c(2.5, 0.0)],
        ]);
        let gs = GramSpace::new(k).unwrap();
        for b in 0..3 {
            let once = basepoint_rescale(&gs, b).unwrap();
            for i in 0..3 {
                assert_eq!(once.entry(i, b), ONE);
                assert_eq!(once.entry(b, i), ONE);
            }
            let twice = basepoint_rescale(&once, b).unwrap();
            assert!(approx_eq(once.matrix(), twice.matrix(), 1e-14));
            assert!(validate_gram(once.into_matrix(), &Tolerances::default()).is_ok());
        }
    }

    #[test]
    fn normalized_examples() {
        let out = normalized_rescale(&g(&[&[1.0, 1.0], &[1.0, 4.0]]));
        assert!(approx_eq(out.matrix(), &real_matrix(&[&[1.0, 0.5], &[0.5, 1.0]]), 1e-15));
        let already = g(&[&[1.0, 0.3], &[0.3, 1.0]]);
        assert!(approx_eq(normalized_rescale(&already).matrix(), already.matrix(), 1e-15));
    }

    #[test]
    fn equivalence_examples() {
        let tol = Tolerances::default();
        let a = g(&[&[1.0, 1.0], &[1.0, 2.0]]);
        let b = g(&[&[1.0, 1.0], &[1.0, 3.0]]);
        assert!(!rescaling_equivalent(&a, &b, &tol).unwrap());
        let r = rescale(&a, &RescalingMap::new(vec![c(0.3, 1.2), c(-2.0, 0.1)])).unwrap();
        assert!(rescaling_equivalent(&a, &r, &tol).unwrap());
        let three = g(&[&[1.0, 1.0, 1.0], &[1.0, 2.0, 1.5], &[1.0, 1.5, 3.0]]);
        assert!(rescaling_equivalent(&a, &three, &tol).is_err());
    }

    #[test]
    fn equivalence_finds_relabelling() {
        let tol = Tolerances::default();
        let a = g(&[&[1.0, 1.0, 1.0], &[1.0, 2.0, 1.5], &[1.0, 1.5, 3.0]]);
        let perm = vec![2, 0, 1];
        let gamma = vec![c(0.5, 0.5), c(2.0, 0.0), c(0.0, -1.0)];
        let b = rescale(&a, &RescalingMap::with_perm(gamma, perm.clone())).unwrap();
        let found = find_correspondence(&b, &a, &tol).unwrap().unwrap();
        assert!(rescaling_equivalent_with(&b, &a, &found, &tol).unwrap());
        assert!(rescaling_equivalent_with(&b, &a, &perm, &tol).unwrap());
    }

    #[test]
    fn conjugate_examples() {
        let k = from_rows(&[
            vec![c(2.0, 0.0), c(1.0, 0.0), c(1.0, 0.0)],
            vec![c(1.0, 0.0), c(3.0, 0.0), c(0.5, 0.25)],
            vec![c(1.0, 0.0), c(0.5, -0.25), c(2.5, 0.0)],
        ]);
        let gs = GramSpace::new(k).unwrap();
        let cj = conjugate_space(&gs);
        assert_eq!(cj.entry(1, 2), c(0.5, -0.25));
        assert_eq!(conjugate_space(&cj), gs);
        let real = g(&[&[1.0, 1.0], &[1.0, 2.0]]);
        assert_eq!(conjugate_space(&real), real);
    }

    #[test]
    fn dual_examples() {
        let tol = Tolerances::default();
        let a = g(&[&[1.0, 1.0], &[1.0, 2.0]]);
        let d = dualized_space(&a, &tol).unwrap();
        assert!(approx_eq(d.matrix(), &real_matrix(&[&[2.0, -1.0], &[-1.0, 1.0]]), 1e-14));
        let back = dualized_space(&d, &tol).unwrap();
        assert!(approx_eq(back.matrix(), a.matrix(), 1e-10));
    }

    #[test]
    fn dual_may_be_reducible() {
        // Inverse of a tridiagonal matrix.
        let k = real_matrix(&[&[0.75, 0.5, 0.25], &[0.5, 1.0, 0.5], &[0.25, 0.5, 0.75]]);
        let gs = GramSpace::new(k).unwrap();
        let d = dualized_space(&gs, &Tolerances::default()).unwrap();
        assert_eq!(d.reducible_pair(), Some((0, 2)));
    }
}
