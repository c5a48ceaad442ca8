pub mod graph;
pub mod rng;
pub mod hole;
pub mod tree;
pub mod embed;
pub mod factor;
pub mod gen;
pub mod pipeline;
