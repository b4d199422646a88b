pub mod bigfloat;
pub mod certifier;
pub mod error;
pub mod logpoly;
pub mod parser;
pub mod poly;
pub mod problem;
pub mod reducer;
pub mod roots;
pub mod scalar;
pub mod series;
