pub mod expr;
pub mod manifest;
pub mod run;
