//! Kernels on rooted trees.

use std::collections::VecDeque;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::gram::{validate_gram, GramSpace};
use crate::hyperbolic::PointSet;
use crate::linalg::ZERO;
use crate::tol::Tolerances;

/// Values of a function on the vertices of a tree, indexed by vertex.
pub type TreeFunction = Vec<Complex64>;

/// A finite rooted tree given by its parent map, with positive edge lengths
/// (`edge_len[v]` is the length of the edge from `v` to its parent).
#[derive(Debug, Clone, PartialEq)]
pub struct RootedTree {
    parent: Vec<Option<usize>>,
    edge_len: Vec<f64>,
    root: usize,
    depth: Vec<usize>,
    dist: Vec<f64>,
    children: Vec<Vec<usize>>,
}

impl RootedTree {
    /// Builds a tree from a parent map; missing edge lengths default to 1.
    pub fn new(parent: Vec<Option<usize>>, edge_len: Option<Vec<f64>>) -> Result<Self> {
        let v = parent.len();
        if v == 0 {
            return Err(Error::InvalidTree { reason: "no vertices".into() });
        }
        let roots: Vec<usize> = (0..v).filter(|&i| parent[i].is_none()).collect();
        if roots.len() != 1 {
            return Err(Error::InvalidTree { reason: format!("expected one root, found {}", roots.len()) });
        }
        let root = roots[0];
        let mut edge_len = edge_len.unwrap_or_else(|| vec![1.0; v]);
        if edge_len.len() != v {
            return Err(Error::DimensionMismatch { expected: v, got: edge_len.len() });
        }
        edge_len[root] = 0.0;
        let mut children = vec![Vec::new(); v];
        for (x, p) in parent.iter().enumerate() {
            if let Some(p) = *p {
                if p >= v {
                    return Err(Error::InvalidTree { reason: format!("parent {p} of vertex {x} out of range") });
                }
                if !(edge_len[x] > 0.0 && edge_len[x].is_finite()) {
                    return Err(Error::InvalidTree { reason: format!("edge length at vertex {x} must be positive") });
                }
                children[p].push(x);
            }
        }
        let mut depth = vec![usize::MAX; v];
        let mut dist = vec![0.0; v];
        depth[root] = 0;
        let mut queue = VecDeque::from([root]);
        while let Some(x) = queue.pop_front() {
            for &c in &children[x] {
                depth[c] = depth[x] + 1;
                dist[c] = dist[x] + edge_len[c];
                queue.push_back(c);
            }
        }
        if depth.contains(&usize::MAX) {
            return Err(Error::InvalidTree { reason: "parent map has a cycle".into() });
        }
        Ok(RootedTree { parent, edge_len, root, depth, dist, children })
    }

    /// Builds from a parent array using `-1` for the root.
    pub fn from_parent_array(parent: &[i64], edge_len: Option<Vec<f64>>) -> Result<Self> {
        let parent = parent
            .iter()
            .map(|&p| match p {
                -1 => Ok(None),
                p if p >= 0 => Ok(Some(p as usize)),
                p => Err(Error::InvalidTree { reason: format!("invalid parent {p}") }),
            })
            .collect::<Result<Vec<_>>>()?;
        RootedTree::new(parent, edge_len)
    }

    /// Complete binary tree of the given depth in breadth first numbering.
    pub fn dyadic(levels: usize) -> Self {
        let v = (1usize << (levels + 1)) - 1;
        let parent = (0..v).map(|i| if i == 0 { None } else { Some((i - 1) / 2) }).collect();
        RootedTree::new(parent, None).expect("well formed")
    }

    pub fn len(&self) -> usize {
        self.parent.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parent.is_empty()
    }

    pub fn root(&self) -> usize {
        self.root
    }

    pub fn parent(&self, x: usize) -> Option<usize> {
        self.parent[x]
    }

    pub fn parents(&self) -> &[Option<usize>] {
        &self.parent
    }

    pub fn edge_len(&self, x: usize) -> f64 {
        self.edge_len[x]
    }

    pub fn children(&self, x: usize) -> &[usize] {
        &self.children[x]
    }

    pub fn depth(&self, x: usize) -> usize {
        self.depth[x]
    }

    /// Weighted distance from the root.
    pub fn root_distance(&self, x: usize) -> f64 {
        self.dist[x]
    }

    /// Weighted distance between two vertices.
    pub fn distance(&self, x: usize, y: usize) -> f64 {
        self.dist[x] + self.dist[y] - 2.0 * self.dist[self.meet(x, y)]
    }

    /// Deepest common ancestor.
    pub fn meet(&self, mut x: usize, mut y: usize) -> usize {
        while self.depth[x] > self.depth[y] {
            x = self.parent[x].expect("non-root");
        }
        while self.depth[y] > self.depth[x] {
            y = self.parent[y].expect("non-root");
        }
        while x != y {
            x = self.parent[x].expect("non-root");
            y = self.parent[y].expect("non-root");
        }
        x
    }

    /// Vertices in breadth first order from the root.
    pub fn bfs_order(&self) -> Vec<usize> {
        let mut order = Vec::with_capacity(self.len());
        let mut queue = VecDeque::from([self.root]);
        while let Some(x) = queue.pop_front() {
            order.push(x);
            queue.extend(self.children[x].iter().copied());
        }
        order
    }

    /// The same tree rooted at `new_root`, with unchanged vertex labels and
    /// edge lengths.
    pub fn reroot(&self, new_root: usize) -> Result<RootedTree> {
        let v = self.len();
        if new_root >= v {
            return Err(Error::IndexOutOfRange { index: new_root, n: v });
        }
        let mut adj: Vec<Vec<(usize, f64)>> = vec![Vec::new(); v];
        for x in 0..v {
            if let Some(p) = self.parent[x] {
                adj[x].push((p, self.edge_len[x]));
                adj[p].push((x, self.edge_len[x]));
            }
        }
        let mut parent = vec![None; v];
        let mut len = vec![0.0; v];
        let mut seen = vec![false; v];
        seen[new_root] = true;
        let mut queue = VecDeque::from([new_root]);
        while let Some(x) = queue.pop_front() {
            for &(y, l) in &adj[x] {
                if !seen[y] {
                    seen[y] = true;
                    parent[y] = Some(x);
                    len[y] = l;
                    queue.push_back(y);
                }
            }
        }
        RootedTree::new(parent, Some(len))
    }

    /// Sums over successors, `I*f(z) = Σ_{τ ≥ z} f(τ)`.
    pub fn successor_sums(&self, f: &[Complex64]) -> Vec<Complex64> {
        let mut acc = f.to_vec();
        for &x in self.bfs_order().iter().rev() {
            if let Some(p) = self.parent[x] {
                let v = acc[x];
                acc[p] += v;
            }
        }
        acc
    }
}

pub fn meet(t: &RootedTree, x: usize, y: usize) -> usize {
    t.meet(x, y)
}

/// An increasing weight `Ω` on the vertices with `Ω(root) = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct TreeWeight {
    omega: Vec<f64>,
}

impl TreeWeight {
    pub fn new(t: &RootedTree, omega: Vec<f64>) -> Result<Self> {
        if omega.len() != t.len() {
            return Err(Error::DimensionMismatch { expected: t.len(), got: omega.len() });
        }
        if (omega[t.root()] - 1.0).abs() > 1e-14 {
            return Err(Error::InvalidTree { reason: format!("weight at the root is {}, expected 1", omega[t.root()]) });
        }
        for x in 0..t.len() {
            if let Some(p) = t.parent(x) {
                if !(omega[x] > omega[p]) || !omega[x].is_finite() {
                    return Err(Error::ZeroEdgeWeight { vertex: x });
                }
            }
        }
        Ok(TreeWeight { omega })
    }

    /// `Ω` obtained by summing positive increments `ω` from the root.
    pub fn from_increments(t: &RootedTree, increments: &[f64]) -> Result<Self> {
        let mut omega = vec![1.0; t.len()];
        for &x in t.bfs_order().iter().skip(1) {
            omega[x] = omega[t.parent(x).expect("non-root")] + increments[x];
        }
        TreeWeight::new(t, omega)
    }

    /// `Ω(x) = depth(x) + 1`.
    pub fn unit_increments(t: &RootedTree) -> Self {
        TreeWeight { omega: (0..t.len()).map(|x| t.depth(x) as f64 + 1.0).collect() }
    }

    pub fn omega(&self, x: usize) -> f64 {
        self.omega[x]
    }

    pub fn values(&self) -> &[f64] {
        &self.omega
    }

    /// `ω(x) = Ω(x) − Ω(x⁻)`, and `ω(root) = Ω(root)`.
    pub fn increment(&self, t: &RootedTree, x: usize) -> f64 {
        match t.parent(x) {
            Some(p) => self.omega[x] - self.omega[p],
            None => self.omega[x],
        }
    }
}

fn check_weight(t: &RootedTree, w: &TreeWeight) -> Result<()> {
    if w.omega.len() != t.len() {
        return Err(Error::DimensionMismatch { expected: t.len(), got: w.omega.len() });
    }
    Ok(())
}

/// Gram matrix `k_xy = Ω(x ∧ y)`.
pub fn tree_kernel(t: &RootedTree, w: &TreeWeight) -> Result<GramSpace> {
    check_weight(t, w)?;
    let v = t.len();
    let k = DMatrix::from_fn(v, v, |x, y| Complex64::new(w.omega[t.meet(x, y)], 0.0));
    Ok(validate_gram(k, &Tolerances::default())?.mark_tree())
}

/// Points `Φ(z) = Φ(z⁻) + c(z) e_z` with `c(z)² = 1/Ω(z⁻) − 1/Ω(z)`, one
/// coordinate per vertex in breadth first order.
pub fn spine_embedding(t: &RootedTree, w: &TreeWeight) -> Result<PointSet> {
    check_weight(t, w)?;
    let v = t.len();
    let order = t.bfs_order();
    let mut slot = vec![0; v];
    for (i, &x) in order.iter().enumerate() {
        slot[x] = i;
    }
    let mut points = vec![vec![ZERO; v]; v];
    for &x in order.iter().skip(1) {
        let p = t.parent(x).expect("non-root");
        let radicand = 1.0 / w.omega[p] - 1.0 / w.omega[x];
        if !(radicand > 0.0) {
            return Err(Error::ZeroEdgeWeight { vertex: x });
        }
        let mut coords = points[p].clone();
        coords[slot[x]] = Complex64::new(radicand.sqrt(), 0.0);
        points[x] = coords;
    }
    PointSet::new(v, points)
}

/// Both sides of `Σ h(x∧y) f(x) conj(f(y)) = h(o)|I*f(o)|² + Σ_{z≠o} (h(z) − h(z⁻)) |I*f(z)|²`.
pub fn summation_by_parts_check(t: &RootedTree, h: &[f64], f: &[Complex64]) -> Result<(f64, f64)> {
    let v = t.len();
    if h.len() != v || f.len() != v {
        return Err(Error::DimensionMismatch { expected: v, got: h.len().min(f.len()) });
    }
    let mut lhs = ZERO;
    for x in 0..v {
        for y in 0..v {
            lhs += h[t.meet(x, y)] * f[x] * f[y].conj();
        }
    }
    let sums = t.successor_sums(f);
    let mut rhs = h[t.root()] * sums[t.root()].norm_sqr();
    for z in 0..v {
        if let Some(p) = t.parent(z) {
            rhs += (h[z] - h[p]) * sums[z].norm_sqr();
        }
    }
    Ok((lhs.re, rhs))
}

/// How a [`TreeFunction`] is read by [`tree_norm`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NormMode {
    /// Coefficients `c_x` of `f = Σ c_x k_x`.
    Coefficients,
    /// Point values `f(x)`.
    Values,
}

/// Squared norm of a function in the tree kernel space, either from its
/// kernel coefficients via `|I*c(o)|² + Σ ω(z)|I*c(z)|²`, or from its values
/// via `|f(o)|² + Σ ω(z)⁻¹|f(z) − f(z⁻)|²`.
pub fn tree_norm(t: &RootedTree, w: &TreeWeight, f: &[Complex64], mode: NormMode) -> Result<f64> {
    check_weight(t, w)?;
    if f.len() != t.len() {
        return Err(Error::DimensionMismatch { expected: t.len(), got: f.len() });
    }
    let o = t.root();
    let mut total = 0.0;
    match mode {
        NormMode::Coefficients => {
            let sums = t.successor_sums(f);
            total += sums[o].norm_sqr();
            for z in 0..t.len() {
                if z != o {
                    let wz = w.increment(t, z);
                    if !(wz > 0.0) {
                        return Err(Error::ZeroEdgeWeight { vertex: z });
                    }
                    total += wz * sums[z].norm_sqr();
                }
            }
        }
        NormMode::Values => {
            total += f[o].norm_sqr();
            for z in 0..t.len() {
                if let Some(p) = t.parent(z) {
                    let wz = w.increment(t, z);
                    if !(wz > 0.0) {
                        return Err(Error::ZeroEdgeWeight { vertex: z });
                    }
                    total += (f[z] - f[p]).norm_sqr() / wz;
                }
            }
        }
    }
    Ok(total)
}

/// Values `f(x) = Σ_y c_y Ω(x ∧ y)` of the function with coefficients `c`.
pub fn values_from_coefficients(t: &RootedTree, w: &TreeWeight, c: &[Complex64]) -> Vec<Complex64> {
    (0..t.len()).map(|x| (0..t.len()).map(|y| c[y] * w.omega[t.meet(x, y)]).sum()).collect()
}

/// Kernel `Λ^{d(o, x∧y)}` with meets taken for the root `o`.
pub fn gromov_kernel(t: &RootedTree, root: usize, lambda: f64) -> Result<GramSpace> {
    if !(lambda > 1.0 && lambda.is_finite()) {
        return Err(Error::InvalidTree { reason: format!("base {lambda} must exceed 1") });
    }
    let rooted = t.reroot(root)?;
    let omega: Vec<f64> = (0..t.len()).map(|x| lambda.powf(rooted.root_distance(x))).collect();
    let w = TreeWeight::new(&rooted, omega)?;
    tree_kernel(&rooted, &w)
}

/// Kernel `Γ^{d(x,y)}`.
pub fn distance_kernel(t: &RootedTree, gamma: f64) -> Result<GramSpace> {
    if !(gamma > 0.0 && gamma < 1.0) {
        return Err(Error::InvalidTree { reason: format!("base {gamma} must lie in (0, 1)") });
    }
    let v = t.len();
    let k = DMatrix::from_fn(v, v, |x, y| Complex64::new(gamma.powf(t.distance(x, y)), 0.0));
    Ok(validate_gram(k, &Tolerances::default())?.mark_tree())
}

/// Entrywise power of a tree generated kernel.
pub fn power_kernel(g: &GramSpace, lambda: f64) -> Result<GramSpace> {
    if !g.is_tree_kernel() {
        return Err(Error::NotTreeKernel);
    }
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::InvalidTree { reason: format!("exponent {lambda} must be positive") });
    }
    let k = g.matrix().map(|z| Complex64::new(z.re.powf(lambda), 0.0));
    Ok(validate_gram(k, &Tolerances::default())?.mark_tree())
}

/// Both sides of the root change identity
/// `d(õ, x ∧̃ y) = d(o, x∧y) + d(o, õ) − d(o, x∧õ) − d(o, õ∧y)`,
/// with `∧̃` the meet for the root `õ`. It is the Gromov product identity
/// `(x|y)_õ = (x|y)_o + d(o, õ) − (x|õ)_o − (y|õ)_o`.
pub fn root_change_sides(t: &RootedTree, new_root: usize, x: usize, y: usize) -> Result<(f64, f64)> {
    let re = t.reroot(new_root)?;
    let lhs = re.root_distance(re.meet(x, y));
    let d = |z: usize| t.root_distance(z);
    let rhs = d(t.meet(x, y)) + d(new_root) - d(t.meet(x, new_root)) - d(t.meet(new_root, y));
    Ok((lhs, rhs))
}
