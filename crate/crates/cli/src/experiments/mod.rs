pub mod deutsch;
pub mod disaster;
pub mod sweep;
pub mod verify;
