pub mod cli;
pub mod geom;
pub mod lattice;
pub mod ldmap;
pub mod linalg;
pub mod patterns;
pub mod quad;
pub mod recog;
pub mod subst;
