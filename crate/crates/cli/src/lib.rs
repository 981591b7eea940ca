pub mod expr;
pub mod verify;
