//! Spectra of graph p-Laplacians.

pub mod complex;
pub mod exactalg;
pub mod graph;
pub mod one_lap;
pub mod homological;
pub mod p_solver;
pub mod cheeger;
pub mod verify;
