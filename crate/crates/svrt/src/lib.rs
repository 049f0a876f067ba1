//! SVRT benchmark tooling: generation of the 23 abstract-rule image
//! classification problems over random non-intersecting contours, symbolic
//! image parsings, a program-synthesis classifier with an MDL cost model,
//! an AdaBoost baseline, and cross-protocol performance statistics.

pub mod agents;
pub mod boost;
pub mod canvas;
pub mod catalog;
pub mod contour;
pub mod geom;
pub mod parsing;
pub mod place;
pub mod rng;
pub mod stats;
pub mod synth;
pub mod tables;
