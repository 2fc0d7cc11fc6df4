//! Average age of information for single-server status-update queues:
//! exact expressions, a stochastic hybrid system solver, a discrete-event
//! simulator, and the bound and sweep checks built on them.

pub mod analysis;
pub mod closed_form;
pub mod desim;
pub mod linalg;
pub mod model;
pub mod numfmt;
pub mod poly;
pub mod shs;
