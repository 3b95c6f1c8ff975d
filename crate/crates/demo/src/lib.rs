//! WebAssembly bindings for the static demo page in `www/`.

use wasm_bindgen::prelude::*;

use selfaffine::attractor::raster_attractor;
use selfaffine::beurling::{lebesgue_from_density, lower_density_profile, WindowSchedule};
use selfaffine::cantor::{cantor_hausdorff, cantor_sdensity_sequence, CantorPair};
use selfaffine::expansion::expand_level;
use selfaffine::format::{num, opt_num};
use selfaffine::spec_file::parse_pair_spec;

/// Expansion budget for the demo operations.
pub const DEMO_CAP: u64 = 1 << 20;
const BAND_HEIGHT: usize = 24;
const INK: [u8; 4] = [20, 40, 90, 255];
const BACKGROUND: [u8; 4] = [250, 250, 245, 255];

/// Raster image of an attractor, ready for `ImageData`.
#[wasm_bindgen]
pub struct Raster {
    width: usize,
    height: usize,
    outer: f64,
    converged: bool,
    rgba: Vec<u8>,
}

#[wasm_bindgen]
impl Raster {
    #[wasm_bindgen(getter)]
    pub fn width(&self) -> usize {
        self.width
    }

    #[wasm_bindgen(getter)]
    pub fn height(&self) -> usize {
        self.height
    }

    /// Occupied volume of the raster, an upper estimate of the measure.
    #[wasm_bindgen(getter)]
    pub fn outer(&self) -> f64 {
        self.outer
    }

    #[wasm_bindgen(getter)]
    pub fn converged(&self) -> bool {
        self.converged
    }

    pub fn rgba(&self) -> Vec<u8> {
        self.rgba.clone()
    }
}

pub fn raster_image(spec: &str, resolution: usize) -> Result<Raster, String> {
    let pair = parse_pair_spec(spec).map_err(|e| e.to_string())?;
    let (grid, est) = raster_attractor(&pair, resolution, 200).map_err(|e| e.to_string())?;
    let r = grid.resolution;
    let height = if grid.dim == 1 { BAND_HEIGHT } else { r };
    let mut rgba = Vec::with_capacity(r * height * 4);
    for row in 0..height {
        for ix in 0..r {
            let on = match grid.dim {
                1 => grid.cells[ix],
                _ => grid.cells[(r - 1 - row) * r + ix],
            };
            rgba.extend_from_slice(if on { &INK } else { &BACKGROUND });
        }
    }
    Ok(Raster { width: r, height, outer: est.outer, converged: est.converged, rgba })
}

pub fn density_csv(spec: &str, level: u32, windows: usize) -> Result<String, String> {
    let pair = parse_pair_spec(spec).map_err(|e| e.to_string())?;
    let mu = expand_level(&pair, level, DEMO_CAP).map_err(|e| e.to_string())?;
    let reference = expand_level(&pair, level + 2, DEMO_CAP).map_err(|e| e.to_string())?;
    let schedule = WindowSchedule::natural(mu.extent().max(1.0), windows).map_err(|e| e.to_string())?;
    let est = lower_density_profile(&mu, &schedule, Some(&reference)).map_err(|e| e.to_string())?.with_level(level);
    let mut out = String::from("N,sup,inf,trusted\n");
    for entry in &est.per_size {
        let inf = entry.inf.as_ref();
        out.push_str(&format!(
            "{},{},{},{}\n",
            num(entry.size),
            num(entry.sup_value),
            opt_num(inf.map(|i| i.value)),
            inf.is_some_and(|i| i.trusted)
        ));
    }
    let leb = lebesgue_from_density(std::slice::from_ref(&est)).map_err(|e| e.to_string())?;
    out.push_str(&format!("# lebesgue = {}\n# divergent = {}\n", num(leb.measure), leb.divergent));
    Ok(out)
}

pub fn cantor_csv(dilation: f64, digit: f64, m_max: u32) -> Result<String, String> {
    let cp = CantorPair::new(dilation, digit).map_err(|e| e.to_string())?;
    let seq = cantor_sdensity_sequence(&cp, m_max).map_err(|e| e.to_string())?;
    let mut out = format!(
        "# s = {}\n# hausdorff = {}\n# limit = {}\nm,v_m\n",
        num(cp.s()),
        num(cantor_hausdorff(&cp)),
        num(seq.limit)
    );
    for (m, v) in seq.values {
        out.push_str(&format!("{m},{}\n", num(v)));
    }
    Ok(out)
}

/// Rasterizes the attractor of a pair file.
#[wasm_bindgen(js_name = renderAttractor)]
pub fn render_attractor(spec: &str, resolution: usize) -> Result<Raster, JsError> {
    raster_image(spec, resolution).map_err(|e| JsError::new(&e))
}

/// Upper and lower density profile of `μ_level` as CSV.
#[wasm_bindgen(js_name = densityProfile)]
pub fn density_profile(spec: &str, level: u32, windows: usize) -> Result<String, JsError> {
    density_csv(spec, level, windows).map_err(|e| JsError::new(&e))
}

/// Closed-form Hausdorff measure and s-density sequence of `(N, {0, d})`.
#[wasm_bindgen(js_name = cantorSequence)]
pub fn cantor_sequence(dilation: f64, digit: f64, m_max: u32) -> Result<String, JsError> {
    cantor_csv(dilation, digit, m_max).map_err(|e| JsError::new(&e))
}
