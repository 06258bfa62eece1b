pub mod dynamics;
pub mod fluxqubit;
pub mod graphcode;
pub mod linalg;
pub mod noise;
pub mod resonator;
