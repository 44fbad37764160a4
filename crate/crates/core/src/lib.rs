//! Finite reproducing kernel Hilbert spaces with the complete Pick property
//! and the point configurations in the complex unit ball that realize them.
//!
//! Indices are 0-based throughout the API. The JSON documents in [`io`] use
//! 1-based indices in their keys.
//!
//! ```
//! use pickgeom::{embed, gram_from_points, has_cpp, Complex64, PointSet, Tolerances};
//!
//! let x = PointSet::from_disk(&[Complex64::new(0.0, 0.0), Complex64::new(0.5, 0.0)]).unwrap();
//! let g = gram_from_points(&x).unwrap();
//! let tol = Tolerances::default();
//! assert!(has_cpp(&g, &tol).cpp);
//! let y = embed(&g, &tol).unwrap();
//! assert!((y.point(1)[0].re - 0.5).abs() < 1e-12);
//! ```

pub mod classify;
pub mod duality;
pub mod embedding;
pub mod error;
pub mod gram;
pub mod hyperbolic;
pub mod invariants;
pub mod io;
pub mod linalg;
pub mod multalg;
pub mod sample;
pub mod tol;
pub mod trees;

pub use classify::{classify_gram, classify_triple, is_r_pick, projected_area, ConfigClass, ConfigTag};
pub use duality::{is_orthogonal, is_r_orthogonal_3d, orthogonal_rescaling, BlaschkeProduct};
pub use embedding::{embed, embed_from_invariants, embed_with_report, gram_from_invariants, EmbedReport};
pub use error::{CppViolation, Error, Result};
pub use gram::{
    basepoint_rescale, conjugate_space, dualized_space, normalized_rescale, rescale, rescaling_equivalent,
    validate_gram, GramSpace, RescalingMap,
};
pub use hyperbolic::{congruent, gram_from_points, normal_form, rho, BallAutomorphism, NormalForm, PointSet};
pub use invariants::{
    angular_invariant, capital_delta, delta, frak_d, has_cpp, invariant_data, lf, mq_matrix, sti_holds,
    CppCertificate, FrakD, InvariantData,
};
pub use linalg::{CMat, CVec};
pub use multalg::{
    ambiguity_classes, extremal_kernel, extremal_multiplier, hartz_data, multiplier_norm, reconstruct_from_hartz,
    HartzData, MultiplierSymbol,
};
pub use num_complex::Complex64;
pub use tol::Tolerances;
pub use trees::{spine_embedding, tree_kernel, RootedTree, TreeWeight};
