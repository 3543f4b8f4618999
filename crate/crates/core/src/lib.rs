pub mod bc_code;
pub mod bc_decoder;
pub mod das;
pub mod das_sim;
pub mod field;
pub mod grs;
pub mod matpoly;
pub mod product_rs;
pub mod topology;
