pub mod error;
pub mod exec;
pub mod machine;
pub mod numerals;
pub mod polygon;
pub mod covering;
pub mod enumerator;
pub mod diagonal;
pub mod refutation;
pub mod verify;
