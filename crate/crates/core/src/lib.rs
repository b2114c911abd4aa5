pub mod bounds;
pub mod error;
pub mod extreal;
pub mod funcspace;
pub mod gls;
pub mod optimize;
pub mod quad;
pub mod report;
pub mod runner;
pub mod scenario;
pub mod specfun;
pub mod transform;

pub use error::{Error, Result};
