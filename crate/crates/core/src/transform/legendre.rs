//! Discrete Legendre transform of a sampled function in linear time.

/// Discrete Legendre transform `φ*(x) = max_j x·y_j − φ(y_j)` for every
/// query.
///
/// `nodes` and `queries` must be ascending. The maximisers lie on the lower
/// convex hull of the points `(y_j, φ_j)`, and because the hull slopes
/// increase the maximiser moves monotonically with `x`; one hull pass plus
/// one sweep gives the exact discrete result in `O(n + m)`. Ties go to the
/// smaller node index, and `argmax` receives the maximising node per query.
///
/// `hull` is scratch space and is cleared on entry.
pub fn legendre_1d(
    nodes: &[f64],
    values: &[f64],
    queries: &[f64],
    out: &mut [f64],
    argmax: &mut [usize],
    hull: &mut Vec<usize>,
) {
    debug_assert_eq!(nodes.len(), values.len());
    debug_assert_eq!(queries.len(), out.len());
    debug_assert_eq!(queries.len(), argmax.len());
    if nodes.is_empty() {
        return;
    }
    lower_hull(nodes, values, hull);

    let mut k = 0;
    for (q, &x) in queries.iter().enumerate() {
        let value_at = |k: usize| x * nodes[hull[k]] - values[hull[k]];
        let mut best = value_at(k);
        while k + 1 < hull.len() {
            let v = value_at(k + 1);
            if v > best {
                best = v;
                k += 1;
            } else {
                break;
            }
        }
        out[q] = best;
        argmax[q] = hull[k];
    }
}

/// Indices of the lower convex hull of `(nodes[j], values[j])`, left to
/// right. Collinear interior points are dropped.
pub(crate) fn lower_hull(nodes: &[f64], values: &[f64], hull: &mut Vec<usize>) {
    hull.clear();
    for j in 0..nodes.len() {
        while hull.len() >= 2 {
            let a = hull[hull.len() - 2];
            let b = hull[hull.len() - 1];
            // drop b unless slope(a, b) < slope(b, j)
            let left = (values[b] - values[a]) * (nodes[j] - nodes[b]);
            let right = (values[j] - values[b]) * (nodes[b] - nodes[a]);
            if left >= right {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(j);
    }
}
