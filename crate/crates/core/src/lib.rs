pub mod dilation;
pub mod direct;
pub mod error;
pub mod experiments;
pub mod grid;
pub mod inverse;
pub mod metrics;
pub mod noise;
pub mod rate;
pub mod regularization;
