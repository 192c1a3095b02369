//! Newton and Hodge polygons, slope algebra for the abelian-origin
//! criterion, filtered φ-modules, and Frobenius data of the Dwork quintic
//! pencil.

pub mod cache;
pub mod cli;
pub mod config;
pub mod dwork;
pub mod linalg;
pub mod phi_module;
pub mod polygon;
pub mod report;
pub mod slopes;
