//! The experiment families behind the command-line tool.

pub mod analytic;
pub mod jam;
pub mod oracle;
pub mod validate;
