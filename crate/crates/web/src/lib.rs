//! Thin wasm-bindgen layer over the core crate. Everything crosses the
//! boundary as JSON strings so the page needs no glue beyond the generated
//! bindings; the logic lives in [`ops`] and is tested natively.

use wasm_bindgen::prelude::*;

pub mod ops;

fn to_js<T: serde::Serialize>(r: Result<T, String>) -> Result<String, JsValue> {
    r.map(|v| serde_json::to_string(&v).expect("serializable"))
        .map_err(|e| JsValue::from_str(&e))
}

/// FK grade, SMOG index and the per-word syllable breakdown of `text`.
#[wasm_bindgen]
pub fn analyze_text(text: &str) -> Result<String, JsValue> {
    to_js(ops::analyze(text))
}

/// Paired t-test of two equally long series given as free text
/// (numbers separated by commas, whitespace or newlines).
#[wasm_bindgen]
pub fn paired_t_test(a: &str, b: &str) -> Result<String, JsValue> {
    to_js(ops::paired(a, b))
}

/// TREC score from a JSON list of `{category, value}` sentence ratings.
#[wasm_bindgen]
pub fn trec_score(ratings_json: &str) -> Result<String, JsValue> {
    to_js(ops::trec(ratings_json))
}
