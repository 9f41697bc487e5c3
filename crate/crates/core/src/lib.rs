pub mod exactalg;
pub mod groebner;
pub mod catalog;
pub mod equivariance;
pub mod jacobi;
pub mod json;
pub mod mfcore;
pub mod qdim;
pub mod search;
