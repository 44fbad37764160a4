//! Realizing a complete Pick space as a point configuration in the ball.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{CppViolation, Error, Result};
use crate::gram::{basepoint_rescale, validate_gram, GramSpace};
use crate::hyperbolic::{gram_from_points, PointSet};
use crate::invariants::{has_cpp, InvariantData};
use crate::linalg::{approx_eq, frobenius, norm_sqr, ONE, ZERO};
use crate::tol::Tolerances;

/// An embedding with its quality measures.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbedReport {
    pub points: PointSet,
    /// Relative Frobenius distance between the basepoint forms of the input
    /// and of the Gram matrix rebuilt from `points`.
    pub residual: f64,
    /// Largest over smallest height; large values flag near-degenerate input.
    pub condition: f64,
}

/// Points `X` in normal form with `gram_from_points(X)` a rescaling of `g`.
pub fn embed(g: &GramSpace, tol: &Tolerances) -> Result<PointSet> {
    Ok(embed_with_report(g, tol)?.points)
}

pub fn embed_with_report(g: &GramSpace, tol: &Tolerances) -> Result<EmbedReport> {
    let n = g.n();
    let b = basepoint_rescale(g, 0)?;
    // inner(p, q) = ⟨x_p, x_q⟩ = 1 − 1/k_qp after the basepoint rescaling.
    let inner_target = |p: usize, q: usize| ONE - ONE / b.entry(q, p);

    let mut coords: Vec<Vec<Complex64>> = vec![Vec::new(); n];
    // (point, height) for each coordinate in order of creation.
    let mut pivots: Vec<(usize, f64)> = Vec::new();
    let mut dependent: Vec<usize> = Vec::new();
    let consistency = tol.tol_eq + tol.tol_rank.sqrt();

    for p in 1..n {
        let mut x = Vec::with_capacity(pivots.len() + 1);
        for (c, &(q, height)) in pivots.iter().enumerate() {
            let xq = &coords[q];
            let partial: Complex64 = (0..c).map(|cc| x[cc] * xq[cc].conj()).sum();
            x.push((inner_target(p, q) - partial) / height);
        }
        let radicand = (1.0 - 1.0 / b.diag(p)) - norm_sqr(&x);
        if radicand > tol.tol_rank {
            let height = radicand.sqrt();
            x.push(Complex64::new(height, 0.0));
            pivots.push((p, height));
        } else if radicand < -tol.tol_eq {
            return Err(Error::NotCpp { certificate: CppViolation::Height { index: p, radicand } });
        } else {
            for &q in &dependent {
                let xq = &coords[q];
                let got: Complex64 = x.iter().zip(xq).map(|(a, b)| a * b.conj()).sum();
                let residual = (got - inner_target(p, q)).norm();
                if residual > consistency {
                    return Err(Error::NotCpp { certificate: CppViolation::Inconsistent { index: p, residual } });
                }
            }
            dependent.push(p);
        }
        coords[p] = x;
    }

    let d = pivots.len().max(1);
    let points: Vec<Vec<Complex64>> = coords
        .into_iter()
        .map(|mut x| {
            x.resize(d, ZERO);
            x
        })
        .collect();
    let points = PointSet::new(d, points).map_err(|e| match e {
        Error::OutOfBall { index, norm } => Error::NotCpp {
            certificate: CppViolation::Height { index, radicand: 1.0 - norm * norm },
        },
        other => other,
    })?;
    let rebuilt = basepoint_rescale(&gram_from_points(&points)?, 0)?;
    let residual = frobenius(&(rebuilt.matrix() - b.matrix())) / (1.0 + frobenius(b.matrix()));
    let heights: Vec<f64> = pivots.iter().map(|&(_, h)| h).collect();
    let condition = match heights.iter().cloned().reduce(f64::min) {
        Some(lo) if lo > 0.0 => heights.iter().cloned().fold(0.0, f64::max) / lo,
        _ => 1.0,
    };
    Ok(EmbedReport { points, residual, condition })
}

/// Rebuilds the basepoint form of the Gram matrix from `δ_ij` and `A_0rs`.
pub fn gram_from_invariants(j: &InvariantData) -> Result<GramSpace> {
    let n = j.n;
    if n == 0 {
        return Err(Error::Infeasible { reason: "empty invariant set".into() });
    }
    let get_delta = |a: usize, b: usize| -> Result<f64> {
        let key = if a < b { (a, b) } else { (b, a) };
        j.deltas
            .get(&key)
            .copied()
            .ok_or_else(|| Error::Infeasible { reason: format!("missing delta for pair ({}, {})", key.0 + 1, key.1 + 1) })
    };
    let mut diag = vec![1.0; n];
    for (r, slot) in diag.iter_mut().enumerate().skip(1) {
        let d = get_delta(0, r)?;
        if !(d > 0.0 && d < 1.0) {
            return Err(Error::Infeasible { reason: format!("delta ({}, {}) = {} outside (0, 1)", 1, r + 1, d) });
        }
        *slot = 1.0 / (1.0 - d * d);
    }
    let mut k = DMatrix::from_element(n, n, ONE);
    for r in 1..n {
        k[(r, r)] = Complex64::new(diag[r], 0.0);
        for s in (r + 1)..n {
            let d = get_delta(r, s)?;
            if !(d > 0.0 && d < 1.0) {
                return Err(Error::Infeasible { reason: format!("delta ({}, {}) = {} outside (0, 1)", r + 1, s + 1, d) });
            }
            let angle = j.angulars.get(&(r, s)).copied().ok_or_else(|| Error::Infeasible {
                reason: format!("missing angular invariant (1, {}, {})", r + 1, s + 1),
            })?;
            let modulus = ((1.0 - d * d) * diag[r] * diag[s]).sqrt();
            let z = Complex64::from_polar(modulus, angle);
            k[(r, s)] = z;
            k[(s, r)] = z.conj();
        }
    }
    validate_gram(k, &Tolerances::default()).map_err(|e| Error::Infeasible { reason: e.to_string() })
}

/// Embeds the space determined by the invariant set.
pub fn embed_from_invariants(j: &InvariantData, tol: &Tolerances) -> Result<PointSet> {
    let g = gram_from_invariants(j)?;
    let cert = has_cpp(&g, tol);
    if !cert.cpp {
        return Err(Error::Infeasible {
            reason: format!("reconstructed space lacks the complete Pick property ({})", cert.violation.unwrap()),
        });
    }
    embed(&g, tol).map_err(|e| match e {
        Error::NotCpp { certificate } => Error::Infeasible { reason: certificate.to_string() },
        other => other,
    })
}

/// Whether `embed(g)` rebuilds `g` up to rescaling.
pub fn verify_embedding(g: &GramSpace, x: &PointSet, tol: &Tolerances) -> Result<bool> {
    let a = basepoint_rescale(g, 0)?;
    let b = basepoint_rescale(&gram_from_points(x)?, 0)?;
    Ok(approx_eq(a.matrix(), b.matrix(), tol.tol_eq))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::invariants::invariant_data;
    use crate::linalg::{c, real_matrix};
    use std::collections::BTreeMap;

    #[test]
    fn two_point_space() {
        let g = GramSpace::new(real_matrix(&[&[1.0, 1.0], &[1.0, 2.0]])).unwrap();
        let x = embed(&g, &Tolerances::default()).unwrap();
        assert_eq!(x.dim(), 1);
        assert!((x.point(1)[0] - c(0.5f64.sqrt(), 0.0)).norm() < 1e-15);
    }

    #[test]
    fn recovers_normal_form_triple() {
        let x = PointSet::new(2, vec![vec![ZERO, ZERO], vec![c(0.4, 0.0), ZERO], vec![c(0.1, 0.2), c(0.3, 0.0)]]).unwrap();
        let y = embed(&gram_from_points(&x).unwrap(), &Tolerances::default()).unwrap();
        assert!(y.max_coordinate_distance(&x) < 1e-14);
    }

    #[test]
    fn bergman_is_rejected() {
        let r: f64 = 0.5;
        let d = (1.0 - r * r).powi(-2);
        let e = (1.0 + r * r).powi(-2);
        let g = GramSpace::new(real_matrix(&[&[d, 1.0, e], &[1.0, 1.0, 1.0], &[e, 1.0, d]])).unwrap();
        assert!(matches!(embed(&g, &Tolerances::default()), Err(Error::NotCpp { .. })));
    }

    #[test]
    fn single_point() {
        let g = GramSpace::new(real_matrix(&[&[3.0]])).unwrap();
        let x = embed(&g, &Tolerances::default()).unwrap();
        assert_eq!(x.points(), &[vec![ZERO]]);
    }

    #[test]
    fn degenerate_direction_stays_low_dimensional() {
        let x = PointSet::from_disk(&[ZERO, c(0.3, 0.1), c(-0.2, 0.5), c(0.6, -0.2)]).unwrap();
        let y = embed(&gram_from_points(&x).unwrap(), &Tolerances::default()).unwrap();
        assert_eq!(y.dim(), 1);
    }

    fn data3(d12: f64, d13: f64, d23: f64, a: f64) -> InvariantData {
        let mut deltas = BTreeMap::new();
        deltas.insert((0, 1), d12);
        deltas.insert((0, 2), d13);
        deltas.insert((1, 2), d23);
        let mut angulars = BTreeMap::new();
        angulars.insert((1, 2), a);
        InvariantData { n: 3, deltas, angulars }
    }

    #[test]
    fn invariants_round_trip() {
        let tol = Tolerances::default();
        let j = data3(0.5, 0.5, 0.5, 0.0);
        let x = embed_from_invariants(&j, &tol).unwrap();
        assert!(x.points().iter().flatten().all(|z| z.im.abs() < 1e-15));
        let back = invariant_data(&gram_from_points(&x).unwrap());
        for (key, v) in &j.deltas {
            assert!((back.deltas[key] - v).abs() < 1e-12);
        }
        assert!(back.angulars[&(1, 2)].abs() < 1e-12);
    }

    #[test]
    fn obtuse_angular_invariant_is_infeasible() {
        let j = data3(0.5, 0.5, 0.5, 2.5);
        assert!(matches!(embed_from_invariants(&j, &Tolerances::default()), Err(Error::Infeasible { .. })));
    }

    #[test]
    fn two_point_invariants() {
        let mut deltas = BTreeMap::new();
        deltas.insert((0, 1), 0.3);
        let j = InvariantData { n: 2, deltas, angulars: BTreeMap::new() };
        let x = embed_from_invariants(&j, &Tolerances::default()).unwrap();
        assert!((x.point(1)[0] - c(0.3, 0.0)).norm() < 1e-15);
    }
}
