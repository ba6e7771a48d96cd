//! Independent oracles for the analytical engine.

pub mod compare;
pub mod fd;
pub mod ilt;
pub mod limits;

pub use compare::{compare_with_fd, Discrepancy};
pub use fd::{fd_solve, Advection, FdConfig, FdResult, Scheme};
pub use ilt::{numerical_ilt, IltMethod, IltPlan, IltValue};
pub use limits::{open_domain_t, rosenthal2d_cooling, rosenthal3d, steady_state_mean, steady_state_series, steady_state_temperature};
