//! Coadjoint orbits and characters of finite unipotent groups.

pub mod cyclotomic;
pub mod field;
pub mod heisenberg;
pub mod kirillov;
pub mod linalg;
pub mod mackey;
pub mod orbits;
pub mod poly;
pub mod roots;

pub use cyclotomic::CyclotomicValue;
pub use field::{ElementRepr, FieldCtx, FieldError, FieldOp, Fq};
pub use heisenberg::{BilinearForm, HeisElement, HeisFunctional, OrbitCensus};
pub use linalg::{LinalgError, MatrixFq};
pub use orbits::{BudgetExceeded, DEFAULT_BUDGET};
pub use kirillov::{NamedFamily, UnipotentGroupSpec, VerificationReport};
pub use mackey::{Hei2Spec, MackeyCensus, MackeyError};
pub use poly::{PolyError, VPolynomial};
pub use roots::{Family, RootSystemType};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
