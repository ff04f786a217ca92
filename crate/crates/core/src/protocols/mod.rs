//! One-shot protocols: privacy amplification, decoupling, and the
//! inequality harness that checks the bounds between them.

mod decoupling;
mod harness;
mod iid;
mod privacy;
mod report;

pub use decoupling::*;
pub use harness::*;
pub use iid::*;
pub use privacy::*;
pub use report::*;
