pub mod config;
pub mod constructions;
pub mod field;
pub mod linalg;
pub mod linearized;
pub mod oracle;
pub mod translators;
pub mod wire;
