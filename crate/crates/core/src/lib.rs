//! Grouped, locally repairable threshold secret sharing.
//!
//! A `(k, n)` Shamir sharing is split into `m` disjoint groups of `γ`
//! participants. Each group interpolates a *repairing polynomial* through its
//! own share points, draws one extra point `(x_λ, y_λ)` on it, and shares
//! `y_λ` with a `(γ, γ + 1)` Shamir instance: `γ` sub-shares stay with the
//! members and one is placed blindly on a server outside the group. A single
//! lost share is then repaired from the `γ - 1` surviving members plus the
//! external sub-share, without ever touching the global threshold.
//!
//! Modules:
//!
//! * [`field`]: prime-field arithmetic and polynomial interpolation.
//! * [`shamir`]: `(k, n)` split and recovery.
//! * [`group`]: repairing polynomials, weak/strong redundancy and local repair.
//! * [`protocol`]: a deterministic simulated network running setup,
//!   blind redundancy placement, authorized repair and recovery.
//! * [`threat`]: compromise probabilities, Monte Carlo estimates, attacker
//!   knowledge closure and exhaustive worst-case search.
//! * [`exec`]: sequential or rayon-backed execution of the data-parallel loops.
//!
//! All computations work over a prime field. The modulus is a runtime
//! parameter; `2^31 - 1` is the default.

pub mod error;
pub mod exec;
pub mod field;
pub mod group;
pub mod protocol;
pub mod shamir;
pub mod threat;

pub use error::{Error, ErrorKind, Result};
pub use exec::Exec;
pub use field::{Fe, Field, Polynomial, MERSENNE_31};
pub use shamir::{Share, SharingParams};
