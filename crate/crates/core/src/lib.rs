//! Exact matrix factorizations of rank-two maximal Cohen-Macaulay modules over
//! the Fermat cubic surface x1^3 + x2^3 + x3^3 + x4^3.

pub mod equiv;
pub mod families;
pub mod field;
pub mod linalg;
pub mod matrix;
pub mod moduli6;
pub mod poly;
