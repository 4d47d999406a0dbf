pub mod error;
pub mod geometry;
pub mod grid;
pub mod hyperbolic;
pub mod linalg;
pub mod solver;
pub mod estimate;
pub mod codim2;
pub mod io;
pub mod problem;
