//! Exact metaplectic covers of `GL_r(F)` for local and global fields attached
//! to Q, built from explicit 2-cocycles with values in μ_n.

pub mod adelic;
pub mod arith;
pub mod cocycle;
pub mod cover;
pub mod error;
pub mod levi;
pub mod matq;
pub mod symbols;
pub mod verify;

pub use arith::{Place, PowerClassParams, Rat};
pub use cocycle::CocycleParams;
pub use cover::CoverElement;
pub use error::{Error, Result};
pub use levi::{BlockPerm, LeviShape};
pub use matq::{bruhat, eta_from_perm, torus_part, BruhatForm, EtaElement, MatQ};
pub use symbols::{MuN, Pairing, SharedPairing, SymbolBackend};
