//! WebAssembly bindings for the static demo page in `www/`.

use masterfield::freeprob::ProductKind;
use masterfield::holonomy::{decompose_loop, evaluate, HolonomyField};
use masterfield::levy::{fubm_moments, Semigroup};
use masterfield::planar::{build_graph, Loop};
use wasm_bindgen::prelude::*;

fn parse(word: &str) -> Result<Loop, String> {
    Loop::parse(word.trim()).map_err(|e| e.to_string())
}

/// `Φ_ℓ(u^k)` of the scalar field with the given product.
pub fn field_value(word: &str, k: i64, t_scale: f64, product: &str) -> Result<f64, String> {
    let product: ProductKind = product.parse()?;
    let field = HolonomyField::new(Semigroup::FreeUnitary, product).with_t_scale(t_scale);
    Ok(evaluate(&field, &parse(word)?, k)
        .map_err(|e| e.to_string())?
        .value
        .re)
}

/// Lassos of the loop's basis (one line each) followed by the loop's word in that basis.
pub fn decomposition(word: &str) -> Result<String, String> {
    let l = parse(word)?.reduce();
    if l.is_empty() {
        return Ok("constant loop\nword 1\n".into());
    }
    let d = decompose_loop(&HolonomyField::master(), &l).map_err(|e| e.to_string())?;
    let mut out = String::new();
    for (i, lasso) in d.basis.lassos().iter().enumerate() {
        let tail: String = lasso.tail.iter().map(|s| s.as_char()).collect();
        let bulk: String = lasso.bulk.iter().map(|s| s.as_char()).collect();
        out.push_str(&format!(
            "L{i}  tail {}  bulk {bulk}  area {}\n",
            if tail.is_empty() { "-" } else { &tail },
            d.areas[i]
        ));
    }
    out.push_str(&format!("word {}\n", d.word));
    Ok(out)
}

/// Vertices visited by the loop, flattened as `x0, y0, x1, y1, …`.
pub fn path_points(word: &str) -> Result<Vec<i32>, String> {
    Ok(parse(word)?
        .points()
        .into_iter()
        .flat_map(|(x, y)| [x as i32, y as i32])
        .collect())
}

/// Unit cells of each bounded face, flattened as `face, x, y, …`.
pub fn cells(word: &str) -> Result<Vec<i32>, String> {
    let l = parse(word)?.reduce();
    if l.is_empty() {
        return Ok(Vec::new());
    }
    let g = build_graph(std::slice::from_ref(&l)).map_err(|e| e.to_string())?;
    let mut out = Vec::new();
    for f in g.faces() {
        for (x, y) in g.face_cells(f.id) {
            out.extend([f.id as i32, x as i32, y as i32]);
        }
    }
    Ok(out)
}

/// `m_0(t), …, m_kmax(t)`.
pub fn moment_table(t: f64, kmax: usize) -> Result<Vec<f64>, String> {
    let m = fubm_moments(t, kmax).map_err(|e| e.to_string())?;
    Ok((0..=kmax as i64)
        .map(|k| m.get(k).expect("k within kmax"))
        .collect())
}

fn js<T>(r: Result<T, String>) -> Result<T, JsError> {
    r.map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = fieldValue)]
pub fn field_value_js(word: &str, k: i32, t_scale: f64, product: &str) -> Result<f64, JsError> {
    js(field_value(word, k as i64, t_scale, product))
}

#[wasm_bindgen(js_name = decomposition)]
pub fn decomposition_js(word: &str) -> Result<String, JsError> {
    js(decomposition(word))
}

#[wasm_bindgen(js_name = pathPoints)]
pub fn path_points_js(word: &str) -> Result<Vec<i32>, JsError> {
    js(path_points(word))
}

#[wasm_bindgen(js_name = faceCells)]
pub fn cells_js(word: &str) -> Result<Vec<i32>, JsError> {
    js(cells(word))
}

#[wasm_bindgen(js_name = momentTable)]
pub fn moment_table_js(t: f64, kmax: u32) -> Result<Vec<f64>, JsError> {
    js(moment_table(t, kmax as usize))
}
