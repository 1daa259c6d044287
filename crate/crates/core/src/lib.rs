//! Random unitary qubit channels, their attractor spaces, and quantum
//! Darwinism diagnostics.
//!
//! ```
//! use std::f64::consts::PI;
//! use qdarwin::channel::{iterate, uniform_digraph, Schedule};
//! use qdarwin::darwinism::{pip, Ordering, OrderingSet};
//! use qdarwin::gates::{GateSpec, OperatorOrder};
//! use qdarwin::registers::{initial_state, InitialFamily, InitialParams, RegisterLayout};
//!
//! # fn main() -> Result<(), Box<dyn std::error::Error>> {
//! let layout = RegisterLayout::new(1, 6)?;
//! let rho0 = initial_state(InitialFamily::ZurekGround, layout, &InitialParams::uniform())?;
//! let spec = GateSpec::symmetric(PI / 2.0, OperatorOrder::Tot)?;
//! let report = iterate(&rho0, &spec, &uniform_digraph(layout), Schedule::default())?;
//! let curve = pip(&report.final_state, &OrderingSet::Single(Ordering::RightToLeft), Some(1.0))?;
//! let ratio = curve.terminal().unwrap().ratio().unwrap();
//! assert!((ratio - 0.2851).abs() < 1e-4);
//! # Ok(())
//! # }
//! ```

pub mod attractor;
pub mod channel;
pub mod darwinism;
pub mod gates;
pub mod numerics;
pub mod registers;
pub mod zurek;
