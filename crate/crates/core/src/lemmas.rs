//! Placeholder, filled in after the protocol module.
