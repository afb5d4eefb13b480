//! Smooth symbols on `(0, ∞)`: the dyadic bump, its companions, Rademacher
//! randomisations and the symbol norms used by the estimates.

pub mod bump;
pub mod jet;
pub mod norms;
pub mod rademacher;

pub use bump::{
    make_dyadic_bump, psi_breve, psi_one, Constant, DyadicBump, DyadicSymbolFamily, Exponential, Log, Plateau, Power,
    Product, Scaled, Symbol,
};
pub use jet::Jet;
pub use norms::{mikhlin_seminorm, psi_norm_n, LogGrid, MikhlinEstimate};
pub use rademacher::{khintchine_check, rademacher, randomized_symbol, RandomizedSymbol, Sign, MAX_KHINTCHINE_LEN};
