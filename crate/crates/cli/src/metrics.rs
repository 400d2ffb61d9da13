//! Quantitative summaries of reconstructed indicator images.

use elastic_fm::factorization::{Component, IndicatorGrid};
use elastic_fm::medium_geometry::{distance, ParametricBoundary, Point};

/// Max indicator inside the obstacles, max at nodes farther than `margin`
/// outside every obstacle, and their ratio.
#[derive(Debug, Clone, Copy)]
pub struct Contrast {
    pub inside_max: f64,
    pub far_max: f64,
    pub ratio: f64,
}

pub fn contrast(grid: &IndicatorGrid, obstacles: &[ParametricBoundary], margin: f64) -> Contrast {
    let mut inside_max: f64 = 0.0;
    let mut far_max: f64 = 0.0;
    for (p, w) in grid.nodes() {
        if obstacles.iter().any(|o| o.contains(p)) {
            inside_max = inside_max.max(w);
        } else if obstacles.iter().all(|o| o.distance_to(p) > margin) {
            far_max = far_max.max(w);
        }
    }
    let ratio = if far_max > 0.0 { inside_max / far_max } else { f64::INFINITY };
    Contrast { inside_max, far_max, ratio }
}

/// Thresholded components with at least `min_nodes` nodes, largest peak first.
pub fn significant_components(grid: &IndicatorGrid, fraction: f64, min_nodes: usize) -> Vec<Component> {
    grid.components(fraction)
        .into_iter()
        .filter(|c| c.nodes.len() >= min_nodes)
        .collect()
}

/// Whether the components match the targets one-to-one within `tolerance`
/// (every target claimed by exactly one component and no component left over).
pub fn matches_targets(components: &[Component], targets: &[Point], tolerance: f64) -> bool {
    if components.len() != targets.len() {
        return false;
    }
    targets.iter().all(|t| {
        components
            .iter()
            .filter(|c| distance(c.centroid, *t) <= tolerance)
            .count()
            == 1
    })
}
