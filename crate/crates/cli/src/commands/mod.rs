pub mod evolve;
pub mod sweep;
pub mod tunnel;
pub mod validate;
