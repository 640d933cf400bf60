pub mod format;
pub mod oracle;
pub mod suite;
pub mod cli;
