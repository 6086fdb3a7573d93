pub mod experiment;
pub mod instances;
pub mod io;
pub mod lp;
pub mod rational;
pub mod search;
pub mod suite;
pub mod transforms;
pub mod tree;
