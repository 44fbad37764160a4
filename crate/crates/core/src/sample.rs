//! Random instances for tests, benchmarks and search harnesses.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;

use crate::gram::{rescale, validate_gram, GramSpace, RescalingMap};
use crate::hyperbolic::{gram_from_points, rho, BallAutomorphism, PointSet};
use crate::linalg::{norm_sqr, CMat, ZERO};
use crate::tol::Tolerances;
use crate::trees::{RootedTree, TreeWeight};

pub fn complex<R: Rng>(rng: &mut R) -> Complex64 {
    Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
}

pub fn unit_phase<R: Rng>(rng: &mut R) -> Complex64 {
    Complex64::from_polar(1.0, rng.gen_range(-std::f64::consts::PI..std::f64::consts::PI))
}

/// A point of `𝔹^d` with norm at most `max_norm`.
pub fn ball_point<R: Rng>(rng: &mut R, d: usize, max_norm: f64) -> Vec<Complex64> {
    loop {
        let p: Vec<Complex64> = (0..d).map(|_| complex(rng)).collect();
        let norm = norm_sqr(&p).sqrt();
        if norm > 1e-3 && norm <= 1.0 {
            let radius = max_norm * rng.gen_range(0.0f64..1.0).powf(1.0 / (2 * d) as f64);
            return p.into_iter().map(|z| z * (radius / norm)).collect();
        }
    }
}

pub fn point_set<R: Rng>(rng: &mut R, n: usize, d: usize, max_norm: f64) -> PointSet {
    PointSet::new(d, (0..n).map(|_| ball_point(rng, d, max_norm)).collect()).expect("points inside the ball")
}

/// `n` points whose pairwise pseudohyperbolic distances are at least `min_rho`.
pub fn separated_point_set<R: Rng>(rng: &mut R, n: usize, d: usize, max_norm: f64, min_rho: f64) -> PointSet {
    loop {
        let mut pts: Vec<Vec<Complex64>> = Vec::with_capacity(n);
        for _ in 0..(200 * n) {
            if pts.len() == n {
                break;
            }
            let p = ball_point(rng, d, max_norm);
            if pts.iter().all(|q| rho(q, &p).is_ok_and(|r| r >= min_rho)) {
                pts.push(p);
            }
        }
        if pts.len() == n {
            return PointSet::new(d, pts).expect("points inside the ball");
        }
    }
}

/// A point set already in normal form: first point at the origin and
/// point `i` supported on the first `i` coordinates with a positive last
/// coordinate.
pub fn normal_form_set<R: Rng>(rng: &mut R, n: usize, max_norm: f64) -> PointSet {
    let d = n.saturating_sub(1).max(1);
    let mut points = vec![vec![ZERO; d]];
    for i in 1..n {
        let radius = max_norm * rng.gen_range(0.2f64..1.0);
        let mut p: Vec<Complex64> = (0..i).map(|_| complex(rng)).collect();
        p[i - 1] = Complex64::new(rng.gen_range(0.25..1.0), 0.0);
        let norm = norm_sqr(&p).sqrt();
        let mut q: Vec<Complex64> = p.into_iter().map(|z| z * (radius / norm)).collect();
        q.resize(d, ZERO);
        points.push(q);
    }
    PointSet::new(d, points).expect("points inside the ball")
}

pub fn unitary<R: Rng>(rng: &mut R, d: usize) -> CMat {
    loop {
        let m = DMatrix::from_fn(d, d, |_, _| complex(rng));
        if m.determinant().norm() > 1e-3 {
            return m.qr().q();
        }
    }
}

pub fn automorphism<R: Rng>(rng: &mut R, d: usize, max_norm: f64) -> BallAutomorphism {
    BallAutomorphism::new(ball_point(rng, d, max_norm), unitary(rng, d), &Tolerances::default())
        .expect("unitary factor")
}

/// Rescaling with moduli in `[1/2, 2]` and uniform phases.
pub fn rescaling<R: Rng>(rng: &mut R, n: usize) -> RescalingMap {
    RescalingMap::new((0..n).map(|_| unit_phase(rng) * rng.gen_range(0.5..2.0)).collect())
}

/// Drury–Arveson Gram of random points, randomly rescaled.
pub fn cpp_gram<R: Rng>(rng: &mut R, n: usize, d: usize, max_norm: f64) -> GramSpace {
    loop {
        let x = separated_point_set(rng, n, d, max_norm, 0.05);
        if let Ok(g) = gram_from_points(&x) {
            return rescale(&g, &rescaling(rng, n)).expect("nonzero rescaling");
        }
    }
}

/// Random valid Gram matrix `A A* + εI`; it may or may not have the
/// complete Pick property.
pub fn valid_gram<R: Rng>(rng: &mut R, n: usize) -> GramSpace {
    let tol = Tolerances::default();
    loop {
        let a = DMatrix::from_fn(n, n, |_, _| complex(rng));
        let k = &a * a.adjoint() + CMat::identity(n, n) * Complex64::new(rng.gen_range(0.01..0.5), 0.0);
        if let Ok(g) = validate_gram(k, &tol) {
            return g;
        }
    }
}

/// Tree with vertex `i > 0` attached to a uniformly chosen earlier vertex.
pub fn tree<R: Rng>(rng: &mut R, vertices: usize) -> RootedTree {
    let parent: Vec<Option<usize>> = (0..vertices).map(|i| (i > 0).then(|| rng.gen_range(0..i))).collect();
    let edge_len = (0..vertices).map(|_| rng.gen_range(0.5..2.0)).collect();
    RootedTree::new(parent, Some(edge_len)).expect("well-formed parent map")
}

/// Strictly increasing weight with random positive increments.
pub fn tree_weight<R: Rng>(rng: &mut R, t: &RootedTree) -> TreeWeight {
    let increments: Vec<f64> = (0..t.len()).map(|_| rng.gen_range(0.1..2.0)).collect();
    TreeWeight::from_increments(t, &increments).expect("positive increments")
}
