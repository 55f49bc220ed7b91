//! Text normalization shared by segmentation and reply matching.

use alloc::string::String;
use unicode_normalization::UnicodeNormalization;

/// Collapses every run of whitespace to a single space and trims both ends.
pub fn normalize_whitespace(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for word in text.split_whitespace() {
        if !out.is_empty() {
            out.push(' ');
        }
        out.push_str(word);
    }
    out
}

pub fn nfc(text: &str) -> String {
    text.nfc().collect()
}

/// Key used when comparing a model-echoed sentence with the source sentence.
pub fn match_key(text: &str) -> String {
    normalize_whitespace(&nfc(text))
}
