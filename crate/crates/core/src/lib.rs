pub mod appell;
pub mod cyclo;
pub mod error;
pub mod oracle;
pub mod par;
pub mod report;
pub mod series;
pub mod theorems;
pub mod theta;

pub use cyclo::{CycloNum, Rational, RootOfUnity};
pub use error::{Error, Result};
pub use report::{Status, VerificationReport};
pub use series::{Monomial, QSeries};
