use selfaffine::beurling::WINDOW_TOL;
use selfaffine::WeightedPointSet;

/// Exhaustive point-anchored window maximum: every window with its lower
/// corner at point coordinates, counted directly.
pub fn brute_sup(pts: &WeightedPointSet, size: f64) -> u64 {
    let tol = WINDOW_TOL * size;
    let dim = pts.dim();
    let anchors: Vec<Vec<f64>> = (0..dim).map(|a| pts.axis(a)).collect();
    let count = |corner: &[f64]| -> u64 {
        pts.iter()
            .filter(|(p, _)| p.iter().zip(corner).all(|(x, c)| *x >= c - tol && *x <= c + size + tol))
            .map(|(_, w)| w)
            .sum()
    };
    match dim {
        1 => anchors[0].iter().map(|&x| count(&[x])).max().unwrap_or(0),
        _ => anchors[0]
            .iter()
            .flat_map(|&x| anchors[1].iter().map(move |&y| [x, y]))
            .map(|c| count(&c))
            .max()
            .unwrap_or(0),
    }
}
