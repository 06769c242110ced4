pub mod attention;
pub mod corpus;
pub mod eval;
pub mod features;
pub mod lang;
pub mod speaker;
pub mod script;

pub use lang::{Family, Language};
