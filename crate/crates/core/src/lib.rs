pub mod error;
pub mod quadrature;
pub mod trig;
pub mod periodic;
pub mod presets;
pub mod spectral_measure;
pub mod poisson_ops;
pub mod intensity;
pub mod asymptotics;
pub mod sampler;
pub mod zeros;
pub mod experiments;
pub mod continuation;
pub mod cli;
