pub mod pseudomode;
