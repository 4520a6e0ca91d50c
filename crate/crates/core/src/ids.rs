//! Resource identifiers: 128 random bits rendered as 32 lowercase hex digits.

use rand::Rng;

pub fn new_id() -> String {
    format!("{:032x}", rand::rng().random::<u128>())
}

/// Whether `id` is safe to use as a store key and file name.
pub fn is_valid_id(id: &str) -> bool {
    !id.is_empty()
        && id.len() <= 64
        && id
            .bytes()
            .all(|b| b.is_ascii_alphanumeric() || b == b'-' || b == b'_')
}
