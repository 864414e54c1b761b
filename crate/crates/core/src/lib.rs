//! Generalized master fields on the plane.

pub mod corpus;
pub mod freeprob;
pub mod holonomy;
pub mod levy;
pub mod mc;
pub mod ncalg;
pub mod planar;
