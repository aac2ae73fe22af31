//! Small numeric toolbox: quadrature, least squares, dense/sparse eigen
//! machinery and root finding. Everything here is deterministic and
//! allocation-only (`no_std` + `alloc`).

pub mod fit;
pub mod linalg;
pub mod quad;
pub mod roots;
pub mod sparse;
