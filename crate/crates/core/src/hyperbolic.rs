//! The unit ball model of complex hyperbolic space.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::gram::{validate_gram, GramSpace};
use crate::linalg::{inner, norm_sqr, CMat, CVec, ONE, ZERO};
use crate::tol::Tolerances;

/// An ordered configuration of points in the open unit ball of `ℂ^d`.
#[derive(Debug, Clone, PartialEq)]
pub struct PointSet {
    d: usize,
    points: Vec<Vec<Complex64>>,
}

impl PointSet {
    pub fn new(d: usize, points: Vec<Vec<Complex64>>) -> Result<Self> {
        if d == 0 {
            return Err(Error::DimensionMismatch { expected: 1, got: 0 });
        }
        let tol = Tolerances::default();
        for (index, p) in points.iter().enumerate() {
            if p.len() != d {
                return Err(Error::DimensionMismatch { expected: d, got: p.len() });
            }
            if p.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
                return Err(Error::NonFinite { i: index, j: 0 });
            }
            let norm = norm_sqr(p).sqrt();
            if norm >= 1.0 - tol.tol_zero {
                return Err(Error::OutOfBall { index, norm });
            }
        }
        Ok(PointSet { d, points })
    }

    /// Points of the unit disk `𝔹¹`.
    pub fn from_disk(points: &[Complex64]) -> Result<Self> {
        PointSet::new(1, points.iter().map(|&z| vec![z]).collect())
    }

    /// Points with real coordinates.
    pub fn from_real(d: usize, points: &[Vec<f64>]) -> Result<Self> {
        PointSet::new(d, points.iter().map(|p| p.iter().map(|&x| Complex64::new(x, 0.0)).collect()).collect())
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn point(&self, i: usize) -> &[Complex64] {
        &self.points[i]
    }

    pub fn points(&self) -> &[Vec<Complex64>] {
        &self.points
    }

    /// Coordinatewise complex conjugate, an antiholomorphic isometry.
    pub fn conjugate(&self) -> PointSet {
        PointSet {
            d: self.d,
            points: self.points.iter().map(|p| p.iter().map(|z| z.conj()).collect()).collect(),
        }
    }

    /// Pads with zero coordinates up to dimension `d`.
    pub fn padded(&self, d: usize) -> PointSet {
        let d = d.max(self.d);
        PointSet {
            d,
            points: self
                .points
                .iter()
                .map(|p| {
                    let mut q = p.clone();
                    q.resize(d, ZERO);
                    q
                })
                .collect(),
        }
    }

    /// Ordered subset.
    pub fn select(&self, idx: &[usize]) -> PointSet {
        PointSet { d: self.d, points: idx.iter().map(|&i| self.points[i].clone()).collect() }
    }

    /// Largest coordinatewise distance to `other`, padding with zeros.
    pub fn max_coordinate_distance(&self, other: &PointSet) -> f64 {
        if self.len() != other.len() {
            return f64::INFINITY;
        }
        let d = self.d.max(other.d);
        let (a, b) = (self.padded(d), other.padded(d));
        a.points
            .iter()
            .zip(&b.points)
            .flat_map(|(p, q)| p.iter().zip(q).map(|(x, y)| (x - y).norm()))
            .fold(0.0, f64::max)
    }
}

fn check_in_ball(z: &[Complex64], index: usize) -> Result<()> {
    let norm = norm_sqr(z).sqrt();
    if norm < 1.0 && norm.is_finite() {
        Ok(())
    } else {
        Err(Error::OutOfBall { index, norm })
    }
}

/// Pseudohyperbolic distance, `ρ² = 1 − (1−|z|²)(1−|w|²)/|1−⟨z,w⟩|²`.
pub fn rho(z: &[Complex64], w: &[Complex64]) -> Result<f64> {
    if z.len() != w.len() {
        return Err(Error::DimensionMismatch { expected: z.len(), got: w.len() });
    }
    check_in_ball(z, 0)?;
    check_in_ball(w, 1)?;
    let num = (1.0 - norm_sqr(z)) * (1.0 - norm_sqr(w));
    let den = (ONE - inner(z, w)).norm_sqr();
    Ok((1.0 - num / den).max(0.0).sqrt())
}

/// Hyperbolic distance `β = artanh ρ`.
pub fn beta(z: &[Complex64], w: &[Complex64]) -> Result<f64> {
    Ok(rho(z, w)?.atanh())
}

/// `ψ_a(z) = (a − P_a z + s_a Q_a z) / (1 − ⟨z, a⟩)` with `s_a = √(1−|a|²)`,
/// where `P_a` projects onto `ℂa` and `Q_a = I − P_a`. An involution
/// exchanging `0` and `a`; `ψ_0` is the identity.
pub fn involution_map(a: &[Complex64], z: &[Complex64]) -> Vec<Complex64> {
    let aa = norm_sqr(a);
    let s = (1.0 - aa).sqrt();
    let za = inner(z, a);
    let denom = ONE - za;
    let proj_coeff = if aa > 0.0 { za / aa } else { ZERO };
    a.iter()
        .zip(z)
        .map(|(&ai, &zi)| {
            let pz = proj_coeff * ai;
            (ai - pz + (zi - pz) * s) / denom
        })
        .collect()
}

/// The map `z ↦ U ψ_a(z)`.
#[derive(Debug, Clone, PartialEq)]
pub struct BallAutomorphism {
    pub a: Vec<Complex64>,
    pub u: CMat,
}

impl BallAutomorphism {
    pub fn identity(d: usize) -> Self {
        BallAutomorphism { a: vec![ZERO; d], u: CMat::identity(d, d) }
    }

    pub fn unitary(u: CMat, tol: &Tolerances) -> Result<Self> {
        let d = u.nrows();
        if u.ncols() != d {
            return Err(Error::NotSquare { rows: d, cols: u.ncols() });
        }
        let defect = crate::linalg::frobenius(&(u.adjoint() * &u - CMat::identity(d, d)));
        if defect > tol.tol_eq * (1.0 + d as f64) {
            return Err(Error::InternalInconsistency { reason: format!("matrix is not unitary (defect {defect:.3e})") });
        }
        Ok(BallAutomorphism { a: vec![ZERO; d], u })
    }

    pub fn new(a: Vec<Complex64>, u: CMat, tol: &Tolerances) -> Result<Self> {
        check_in_ball(&a, 0)?;
        let mut m = BallAutomorphism::unitary(u, tol)?;
        if a.len() != m.dim() {
            return Err(Error::DimensionMismatch { expected: m.dim(), got: a.len() });
        }
        m.a = a;
        Ok(m)
    }

    pub fn dim(&self) -> usize {
        self.a.len()
    }

    pub fn apply_point(&self, z: &[Complex64]) -> Vec<Complex64> {
        let y = CVec::from_vec(involution_map(&self.a, z));
        (&self.u * y).iter().copied().collect()
    }

    pub fn apply(&self, x: &PointSet) -> Result<PointSet> {
        if x.dim() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: x.dim() });
        }
        let points: Vec<Vec<Complex64>> = x.points().iter().map(|p| self.apply_point(p)).collect();
        for (i, p) in points.iter().enumerate() {
            check_in_ball(p, i)?;
        }
        Ok(PointSet { d: x.dim(), points })
    }
}

/// The involution exchanging `0` and `a`.
pub fn involution(a: &[Complex64]) -> Result<BallAutomorphism> {
    check_in_ball(a, 0)?;
    let d = a.len();
    Ok(BallAutomorphism { a: a.to_vec(), u: CMat::identity(d, d) })
}

/// Drury–Arveson Gram matrix `k_ij = (1 − ⟨x_j, x_i⟩)⁻¹`.
pub fn gram_from_points(x: &PointSet) -> Result<GramSpace> {
    let n = x.len();
    if n == 0 {
        return Err(Error::NotSquare { rows: 0, cols: 0 });
    }
    let tol = Tolerances::default();
    for i in 0..n {
        for j in (i + 1)..n {
            if rho(x.point(i), x.point(j))? <= tol.tol_zero {
                return Err(Error::Reducible { i, j });
            }
        }
    }
    let k = DMatrix::from_fn(n, n, |i, j| ONE / (ONE - inner(x.point(j), x.point(i))));
    validate_gram(k, &tol)
}

/// A configuration in normal form together with the automorphism producing it.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalForm {
    pub points: PointSet,
    /// Maps the input onto `points` (padded with zeros to the input dimension).
    pub automorphism: BallAutomorphism,
    /// Largest over smallest pivot; large values flag near-degenerate input.
    pub condition: f64,
}

/// Moves the first point to the origin and puts the rest in lower
/// triangular position with positive pivots, trimming unused coordinates.
pub fn normal_form(x: &PointSet, tol: &Tolerances) -> Result<NormalForm> {
    let d = x.dim();
    if x.is_empty() {
        return Err(Error::SizeMismatch { left: 0, right: 1 });
    }
    let psi = involution(x.point(0))?;
    let ys: Vec<CVec> = x.points().iter().map(|p| CVec::from_vec(involution_map(&psi.a, p))).collect();

    let mut basis: Vec<CVec> = Vec::new();
    let mut owner: Vec<usize> = Vec::new();
    let mut pivots: Vec<f64> = Vec::new();
    for (p, y) in ys.iter().enumerate().skip(1) {
        let mut r = y.clone();
        for _ in 0..2 {
            for e in &basis {
                let coeff = e.dotc(&r);
                r -= e * coeff;
            }
        }
        let rn2 = r.norm_squared();
        if rn2 > tol.tol_rank && basis.len() < d {
            let rn = rn2.sqrt();
            basis.push(r / Complex64::new(rn, 0.0));
            owner.push(p);
            pivots.push(rn);
        }
    }
    let m = basis.len();
    let full = complete_basis(&basis, d);
    let u = DMatrix::from_fn(d, d, |row, col| full[row][col].conj());

    let out_d = m.max(1);
    let mut points = Vec::with_capacity(x.len());
    let mut active = 0;
    for (p, y) in ys.iter().enumerate() {
        let mut coords = vec![ZERO; out_d];
        if p > 0 {
            while active < m && owner[active] <= p {
                active += 1;
            }
            for (c, e) in basis.iter().enumerate().take(active) {
                coords[c] = e.dotc(y);
            }
            if active > 0 && owner[active - 1] == p {
                coords[active - 1] = Complex64::new(pivots[active - 1], 0.0);
            }
        }
        points.push(coords);
    }
    let condition = match (pivots.iter().cloned().fold(f64::NAN, f64::max), pivots.iter().cloned().fold(f64::NAN, f64::min)) {
        (hi, lo) if lo > 0.0 => hi / lo,
        _ => 1.0,
    };
    Ok(NormalForm {
        points: PointSet { d: out_d, points },
        automorphism: BallAutomorphism { a: psi.a, u },
        condition,
    })
}

fn complete_basis(basis: &[CVec], d: usize) -> Vec<CVec> {
    let mut full: Vec<CVec> = basis.to_vec();
    for k in 0..d {
        if full.len() == d {
            break;
        }
        let mut v = DVector::from_element(d, ZERO);
        v[k] = ONE;
        for _ in 0..2 {
            for e in &full {
                let coeff = e.dotc(&v);
                v -= e * coeff;
            }
        }
        let n = v.norm();
        if n > 1e-6 {
            full.push(v / Complex64::new(n, 0.0));
        }
    }
    full
}

/// Congruence under holomorphic automorphisms, decided by comparing normal forms.
pub fn congruent(x: &PointSet, y: &PointSet, tol: &Tolerances) -> Result<bool> {
    if x.len() != y.len() {
        return Err(Error::SizeMismatch { left: x.len(), right: y.len() });
    }
    let nx = normal_form(x, tol)?;
    let ny = normal_form(y, tol)?;
    Ok(nx.points.max_coordinate_distance(&ny.points) <= tol.tol_eq)
}
