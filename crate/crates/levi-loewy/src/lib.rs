pub mod chevalley;
pub mod ffla;
pub mod harness;
pub mod homext;
pub mod modules;
pub mod pbw;
pub mod pims;
pub mod series;
pub mod weyl;
