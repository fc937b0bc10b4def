//! Quadratic Lagrange spectra over the Laurent series field `F_q((Y^{-1}))`.

pub mod algebra;
pub mod cfword;
pub mod laurent;
pub mod oracle;
pub mod spectrum;
