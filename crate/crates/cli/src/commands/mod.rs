pub mod adapt;
pub mod bound;
pub mod evaluate;
pub mod generate;
pub mod ot_solve;
pub mod plotdata;
