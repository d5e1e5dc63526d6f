#![no_std]

extern crate alloc;

pub mod gf256;
pub mod payload;
pub mod pipeline;
pub mod prng;
pub mod qc;
pub mod qr;
pub mod registry;
pub mod rs;
pub mod seal;
pub mod verify;
