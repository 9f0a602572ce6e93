//! Canonical text form shared by every file the engine writes.
//!
//! Documents are pretty-printed JSON with two-space indentation and a single
//! trailing newline. Struct fields keep their declaration order and maps are
//! `BTreeMap`s, so keys come out sorted; the output is byte-reproducible.

use serde::Serialize;

/// Serializes `value` in canonical multi-line form.
pub fn to_canonical_string<T: Serialize + ?Sized>(value: &T) -> serde_json::Result<String> {
    let mut out = serde_json::to_string_pretty(value)?;
    out.push('\n');
    Ok(out)
}

/// Single-line form used by line-oriented files (one object per line).
pub fn to_canonical_line<T: Serialize + ?Sized>(value: &T) -> serde_json::Result<String> {
    serde_json::to_string(value)
}
