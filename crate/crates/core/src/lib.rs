pub mod exactmath;
pub mod quadfield;
pub mod cmfield;
pub mod byformula;
pub mod fixtures;
pub mod quatalg;
pub mod embedcount;
pub mod cli;
