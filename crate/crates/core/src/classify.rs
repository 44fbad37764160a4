//! Geometric classification of small configurations.

use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gram::{basepoint_rescale, GramSpace};
use crate::hyperbolic::{gram_from_points, normal_form, rho, PointSet};
use crate::invariants::{angular_invariant, delta, has_cpp, lf, mq_matrix, triples};
use crate::linalg::ONE;
use crate::tol::Tolerances;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ConfigTag {
    /// On a single geodesic.
    Geodesic,
    /// In a real geodesic disk.
    RealGeodesicDisk,
    /// In a real geodesic disk with a right angle at the first point.
    RightAngleAtFirst,
    /// In a real geodesic disk with a right angle at the second point.
    RightAngleAtSecond,
    /// In a complex geodesic.
    ComplexGeodesic,
    Generic,
}

impl fmt::Display for ConfigTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ConfigTag::Geodesic => "Geodesic",
            ConfigTag::RealGeodesicDisk => "RealGeodesicDisk",
            ConfigTag::RightAngleAtFirst => "RightAngleAtFirst",
            ConfigTag::RightAngleAtSecond => "RightAngleAtSecond",
            ConfigTag::ComplexGeodesic => "ComplexGeodesic",
            ConfigTag::Generic => "Generic",
        };
        f.write_str(s)
    }
}

/// A classification tag with the residuals it was decided from.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigClass {
    pub tag: ConfigTag,
    pub witnesses: BTreeMap<String, f64>,
}

fn check_distinct_points(x: &PointSet, tol: &Tolerances) -> Result<()> {
    for i in 0..x.len() {
        for j in (i + 1)..x.len() {
            if rho(x.point(i), x.point(j))? <= tol.tol_zero {
                return Err(Error::DegenerateTriple { i, j });
            }
        }
    }
    Ok(())
}

/// Residuals of the defining equations for each class of a three point space.
pub fn triple_witnesses(g: &GramSpace) -> Result<BTreeMap<String, f64>> {
    if g.n() != 3 {
        return Err(Error::WrongDimension { expected: 3, got: g.n() });
    }
    let b = basepoint_rescale(g, 0)?;
    let mut w = BTreeMap::new();
    w.insert("angular".to_string(), angular_invariant(g, 0, 1, 2)?.abs());
    w.insert("lf_minus_delta13".to_string(), (lf(g, 0, 1, 2)? - delta(g, 0, 2)).abs());
    w.insert("k23_minus_one".to_string(), (b.entry(1, 2) - ONE).norm());
    w.insert("k22_minus_k23".to_string(), (b.entry(1, 1) - b.entry(1, 2)).norm() / b.diag(1));
    Ok(w)
}

/// Classifies a three point space, testing the most specific class first.
pub fn classify_gram(g: &GramSpace, tol: &Tolerances) -> Result<ConfigClass> {
    let witnesses = triple_witnesses(g)?;
    let small = |key: &str| witnesses[key] <= tol.tol_class;
    let tag = if small("angular") && small("lf_minus_delta13") {
        ConfigTag::Geodesic
    } else if small("lf_minus_delta13") {
        ConfigTag::ComplexGeodesic
    } else if small("angular") {
        if small("k23_minus_one") {
            ConfigTag::RightAngleAtFirst
        } else if small("k22_minus_k23") {
            ConfigTag::RightAngleAtSecond
        } else {
            ConfigTag::RealGeodesicDisk
        }
    } else {
        ConfigTag::Generic
    };
    Ok(ConfigClass { tag, witnesses })
}

pub fn classify_triple(x: &PointSet, tol: &Tolerances) -> Result<ConfigClass> {
    if x.len() != 3 {
        return Err(Error::WrongDimension { expected: 3, got: x.len() });
    }
    check_distinct_points(x, tol)?;
    classify_gram(&gram_from_points(x)?, tol)
}

/// Every triple has `A_ijk = 0` and `LF_ijk = δ_ik`.
pub fn lies_in_geodesic(x: &PointSet, tol: &Tolerances) -> Result<bool> {
    if x.len() < 3 {
        return Ok(true);
    }
    let g = gram_from_points(x)?;
    for (i, j, k) in triples(g.n()) {
        if angular_invariant(&g, i, j, k)?.abs() > tol.tol_class
            || (lf(&g, i, j, k)? - delta(&g, i, k)).abs() > tol.tol_class
        {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Every angular invariant vanishes.
pub fn lies_in_totally_real(x: &PointSet, tol: &Tolerances) -> Result<bool> {
    if x.len() < 3 {
        return Ok(true);
    }
    let g = gram_from_points(x)?;
    for (i, j, k) in triples(g.n()) {
        if angular_invariant(&g, i, j, k)?.abs() > tol.tol_class {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Totally real, and every four point subset through the first point has
/// a singular `MQ_1` (normalized by its diagonal).
pub fn lies_in_real_disk(x: &PointSet, tol: &Tolerances) -> Result<bool> {
    if !lies_in_totally_real(x, tol)? {
        return Ok(false);
    }
    let g = gram_from_points(x)?;
    let n = g.n();
    for (i, j, k) in triples(n) {
        if i == 0 {
            continue;
        }
        let sub = g.subspace(&[0, i, j, k])?;
        let m = mq_matrix(&sub, 0)?.m;
        let scale: f64 = (0..3).map(|a| m[(a, a)].re).product();
        let det = m.determinant().re / scale;
        if det.abs() > tol.tol_rank {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Whether the space is a rescaling of Hardy space kernels at points of the
/// disk, decided by `LF_ijk = δ_ik` on every increasing triple. Requires the
/// complete Pick property on every subspace of four kernels.
pub fn is_r_pick(g: &GramSpace, tol: &Tolerances) -> Result<bool> {
    let n = g.n();
    if n < 4 {
        if !has_cpp(g, tol).cpp {
            return Err(Error::HypothesisFailed { reason: "space lacks the complete Pick property".into() });
        }
    } else {
        for (i, j, k) in triples(n) {
            for l in (k + 1)..n {
                if !has_cpp(&g.subspace(&[i, j, k, l])?, tol).cpp {
                    return Err(Error::HypothesisFailed {
                        reason: format!("subspace ({}, {}, {}, {}) lacks the complete Pick property", i + 1, j + 1, k + 1, l + 1),
                    });
                }
            }
        }
    }
    for (i, j, k) in triples(n) {
        if (lf(g, i, j, k)? - delta(g, i, k)).abs() > tol.tol_class {
            return Ok(false);
        }
    }
    Ok(true)
}

fn disk_mobius(v: Complex64, z: Complex64) -> Complex64 {
    (v - z) / (ONE - v.conj() * z)
}

fn interior_angle(v: Complex64, a: Complex64, b: Complex64) -> f64 {
    let p = disk_mobius(v, a);
    let q = disk_mobius(v, b);
    (p / q).arg().abs()
}

/// Area of the triangle obtained by moving the side `[x_1, x_2]` into the
/// first coordinate disk and projecting orthogonally onto it. Computed from
/// the angle defect, normalized as half of `π − (α + β + γ)`.
pub fn projected_area(x: &PointSet, tol: &Tolerances) -> Result<f64> {
    if x.len() != 3 {
        return Err(Error::WrongDimension { expected: 3, got: x.len() });
    }
    check_distinct_points(x, tol)?;
    let nf = normal_form(x, tol)?;
    let p: Vec<Complex64> = nf.points.points().iter().map(|q| q[0]).collect();
    for i in 0..3 {
        for j in (i + 1)..3 {
            if disk_mobius(p[i], p[j]).norm() <= tol.tol_eq {
                return Ok(0.0);
            }
        }
    }
    let sum = interior_angle(p[0], p[1], p[2]) + interior_angle(p[1], p[2], p[0]) + interior_angle(p[2], p[0], p[1]);
    Ok(((std::f64::consts::PI - sum) / 2.0).max(0.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c, ZERO};

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    #[test]
    fn colinear_is_geodesic() {
        let x = PointSet::from_disk(&[ZERO, c(0.3, 0.0), c(0.6, 0.0)]).unwrap();
        assert_eq!(classify_triple(&x, &tol()).unwrap().tag, ConfigTag::Geodesic);
    }

    #[test]
    fn orthogonal_axes_right_angle_at_first() {
        let x = PointSet::from_real(2, &[vec![0.0, 0.0], vec![0.5, 0.0], vec![0.0, 0.5]]).unwrap();
        assert_eq!(classify_triple(&x, &tol()).unwrap().tag, ConfigTag::RightAngleAtFirst);
    }

    #[test]
    fn right_angle_at_second() {
        let x = PointSet::from_real(2, &[vec![0.0, 0.0], vec![0.5, 0.0], vec![0.5, 0.3]]).unwrap();
        assert_eq!(classify_triple(&x, &tol()).unwrap().tag, ConfigTag::RightAngleAtSecond);
    }

    #[test]
    fn disk_triple_is_complex_geodesic() {
        let x = PointSet::from_disk(&[ZERO, c(0.5, 0.0), c(0.0, 0.3)]).unwrap();
        let cls = classify_triple(&x, &tol()).unwrap();
        assert_eq!(cls.tag, ConfigTag::ComplexGeodesic);
        assert!(cls.witnesses["angular"] > 0.01);
    }

    #[test]
    fn generic_and_real_disk() {
        let x = PointSet::new(2, vec![vec![ZERO, ZERO], vec![c(0.5, 0.0), ZERO], vec![c(0.1, 0.2), c(0.3, 0.0)]]).unwrap();
        assert_eq!(classify_triple(&x, &tol()).unwrap().tag, ConfigTag::Generic);
        let x = PointSet::from_real(2, &[vec![0.0, 0.0], vec![0.5, 0.0], vec![0.1, 0.3]]).unwrap();
        assert_eq!(classify_triple(&x, &tol()).unwrap().tag, ConfigTag::RealGeodesicDisk);
    }

    #[test]
    fn coincident_points_rejected() {
        let x = PointSet::from_disk(&[ZERO, c(0.5, 0.0), c(0.5, 0.0)]).unwrap();
        assert!(matches!(classify_triple(&x, &tol()), Err(Error::DegenerateTriple { .. })));
    }

    #[test]
    fn geodesic_sets() {
        let t = tol();
        let two = PointSet::from_disk(&[ZERO, c(0.4, 0.1)]).unwrap();
        assert!(lies_in_geodesic(&two, &t).unwrap());
        let line = PointSet::from_disk(&[ZERO, c(0.2, 0.0), c(0.4, 0.0), c(0.6, 0.0)]).unwrap();
        assert!(lies_in_geodesic(&line, &t).unwrap());
        let bent = PointSet::from_real(2, &[vec![0.0, 0.0], vec![0.5, 0.0], vec![0.0, 0.5], vec![0.3, 0.0]]).unwrap();
        assert!(!lies_in_geodesic(&bent, &t).unwrap());
    }

    #[test]
    fn totally_real_sets() {
        let t = tol();
        let real = PointSet::from_real(3, &[vec![0.1, 0.2, 0.0], vec![-0.3, 0.1, 0.2], vec![0.0, 0.4, -0.1]]).unwrap();
        assert!(lies_in_totally_real(&real, &t).unwrap());
        let x = PointSet::from_disk(&[ZERO, c(0.5, 0.0), c(0.0, 0.3)]).unwrap();
        assert!(!lies_in_totally_real(&x, &t).unwrap());
    }

    #[test]
    fn real_disk_sets() {
        let t = tol();
        let planar = PointSet::from_real(2, &[vec![0.0, 0.0], vec![0.5, 0.1], vec![-0.2, 0.4], vec![0.3, -0.3]]).unwrap();
        assert!(lies_in_real_disk(&planar, &t).unwrap());
        let axes =
            PointSet::from_real(3, &[vec![0.0, 0.0, 0.0], vec![0.5, 0.0, 0.0], vec![0.0, 0.5, 0.0], vec![0.0, 0.0, 0.5]]).unwrap();
        assert!(!lies_in_real_disk(&axes, &t).unwrap());
        let three = PointSet::from_real(3, &[vec![0.1, 0.0, 0.2], vec![0.5, 0.1, 0.0], vec![0.0, 0.3, 0.3]]).unwrap();
        assert!(lies_in_real_disk(&three, &t).unwrap());
    }

    #[test]
    fn r_pick_examples() {
        let t = tol();
        let x = PointSet::from_disk(&[ZERO, c(0.2, 0.0), c(0.5, 0.0), c(0.0, 0.7)]).unwrap();
        assert!(is_r_pick(&gram_from_points(&x).unwrap(), &t).unwrap());
        let y = PointSet::new(
            2,
            vec![vec![ZERO, ZERO], vec![c(0.5, 0.0), ZERO], vec![c(0.1, 0.2), c(0.3, 0.0)], vec![c(-0.2, 0.0), c(0.1, 0.1)]],
        )
        .unwrap();
        assert!(!is_r_pick(&gram_from_points(&y).unwrap(), &t).unwrap());
    }

    #[test]
    fn projected_area_examples() {
        let t = tol();
        let real = PointSet::from_real(2, &[vec![0.1, 0.0], vec![0.5, 0.2], vec![-0.1, 0.3]]).unwrap();
        assert!(projected_area(&real, &t).unwrap() < 1e-12);
        let axes = PointSet::from_real(2, &[vec![0.0, 0.0], vec![0.4, 0.0], vec![0.0, 0.6]]).unwrap();
        assert_eq!(projected_area(&axes, &t).unwrap(), 0.0);
        let x = PointSet::new(2, vec![vec![c(0.1, 0.0), ZERO], vec![c(0.5, 0.1), c(0.1, 0.0)], vec![c(0.1, 0.2), c(0.3, -0.1)]]).unwrap();
        let a = angular_invariant(&gram_from_points(&x).unwrap(), 0, 1, 2).unwrap();
        assert!((projected_area(&x, &t).unwrap() - a.abs()).abs() < 1e-12);
    }
}
