//! Deterministic text output: number formatting, CSV rows and the `#` preamble.

/// Toolkit version embedded in every output.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Fixed twelve-decimal form for moderate magnitudes, scientific notation
/// with eleven mantissa decimals otherwise.
pub fn num(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let a = x.abs();
    if x == 0.0 {
        "0.000000000000".into()
    } else if (1e-4..1e15).contains(&a) {
        format!("{x:.12}")
    } else {
        format!("{x:.11e}")
    }
}

pub fn opt_num(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

pub fn row<I, S>(fields: I) -> String
where
    I: IntoIterator<Item = S>,
    S: AsRef<str>,
{
    let mut out = String::new();
    for (i, f) in fields.into_iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        out.push_str(f.as_ref());
    }
    out.push('\n');
    out
}

/// `# selfaffine <version>` followed by one `# key = value` line per entry.
pub fn preamble(command: &str, config: &[(String, String)]) -> String {
    let mut out = format!("# selfaffine {VERSION}\n# command = {command}\n");
    for (k, v) in config {
        out.push_str(&format!("# {k} = {v}\n"));
    }
    out
}

/// Column names `prefix_1 .. prefix_dim`.
pub fn axis_columns(prefix: &str, dim: usize) -> Vec<String> {
    (1..=dim).map(|i| format!("{prefix}_{i}")).collect()
}
