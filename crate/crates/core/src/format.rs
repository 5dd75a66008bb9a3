//! Locale-free number formatting and digests shared by the text outputs.

use serde::Serializer;
use sha2::{Digest, Sha256};

/// Twelve significant digits in scientific notation; `inf` for `+∞`.
pub fn fmt_real(v: f64) -> String {
    if v == f64::INFINITY {
        "inf".to_string()
    } else if v == f64::NEG_INFINITY {
        "-inf".to_string()
    } else if v.is_nan() {
        "nan".to_string()
    } else if v == 0.0 {
        // Normalizes -0.0 as well.
        "0".to_string()
    } else {
        format!("{v:.11e}")
    }
}

/// Serializes a possibly infinite real: finite values as JSON numbers,
/// infinities as the strings `"inf"` / `"-inf"`.
pub fn serialize_ext<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
    if v.is_finite() {
        s.serialize_f64(*v)
    } else {
        s.serialize_str(&fmt_real(*v))
    }
}

pub fn serialize_opt_ext<S: Serializer>(v: &Option<f64>, s: S) -> Result<S::Ok, S::Error> {
    match v {
        Some(v) => serialize_ext(v, s),
        None => s.serialize_none(),
    }
}

/// First 16 hex digits of the SHA-256 of `bytes`.
pub fn digest_hex(bytes: &[u8]) -> String {
    let hash = Sha256::digest(bytes);
    hash.iter().take(8).map(|b| format!("{b:02x}")).collect()
}
