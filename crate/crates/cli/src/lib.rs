pub mod args;
pub mod bench;
pub mod commands;
pub mod table;
