//! Compiles every code snippet in the book (`book/` at the repository
//! root) as a doctest, so the guide can never drift from the library.
//! Each chapter becomes an empty module whose documentation is the
//! chapter source; `cargo test --doc` then builds and runs the examples.

#[doc = include_str!("../../../book/src/introduction.md")]
mod introduction {}

#[doc = include_str!("../../../book/src/ambient-space.md")]
mod ambient_space {}

#[doc = include_str!("../../../book/src/finite-difference-jets.md")]
mod finite_difference_jets {}

#[doc = include_str!("../../../book/src/minimal-horizontal-surfaces.md")]
mod minimal_horizontal_surfaces {}

#[doc = include_str!("../../../book/src/the-profile-system.md")]
mod the_profile_system {}

#[doc = include_str!("../../../book/src/building-the-immersion.md")]
mod building_the_immersion {}

#[doc = include_str!("../../../book/src/curvature-and-the-chen-bound.md")]
mod curvature_and_the_chen_bound {}

#[doc = include_str!("../../../book/src/command-line.md")]
mod command_line {}
