pub mod game;
pub mod gen;
pub mod parser;
pub mod rewrite;
pub mod selftest;
pub mod sos;
pub mod term;
