pub mod algebra;
pub mod cascade;
pub mod charform;
pub mod cli;
pub mod dini;
pub mod quad;
pub mod telegraph;
pub mod upwind;
pub mod verhulst;
