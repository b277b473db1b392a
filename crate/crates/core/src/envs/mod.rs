pub mod battleship;
pub mod maze;
pub mod rocksample;
pub mod tmaze;
