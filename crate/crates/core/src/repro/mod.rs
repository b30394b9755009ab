//! Reproductions of the worked experiments.

pub mod linsys;
pub mod poly;
pub mod presets;
