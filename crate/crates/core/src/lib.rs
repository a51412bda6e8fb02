pub mod cli;
pub mod clique;
pub mod cover;
pub mod error;
pub mod estimator;
pub mod fixtures;
pub mod io;
pub mod metric;
pub mod transport;
pub mod verify;
pub mod zoo;
