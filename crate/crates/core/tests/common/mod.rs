pub mod compare;
pub mod fixtures;
pub mod oracle;
