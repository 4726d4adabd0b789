//! Divide-and-conquer c-transform on one grid line.

/// Exact discrete c-transform `φ^c(x_k) = min_j h(y_j − x_k) − φ(y_j)` on a
/// line where queries and nodes coincide.
///
/// `table[d]` is the cost between two nodes `d` apart. Because the cost is
/// strictly convex the smallest minimiser is nondecreasing in `k`, so once
/// the minimisers of every second query are known the ones in between are
/// trapped between their neighbours. Queries are resolved coarse to fine,
/// halving the stride each level; each level costs `O(n)` and there are
/// `log n` levels. Ties go to the smaller node index.
pub fn ctransform_1d(table: &[f64], values: &[f64], out: &mut [f64], argmin: &mut [usize]) {
    let n = values.len();
    debug_assert!(table.len() >= n);
    debug_assert_eq!(out.len(), n);
    debug_assert_eq!(argmin.len(), n);
    if n == 0 {
        return;
    }
    let scan = |k: usize, lo: usize, hi: usize| {
        let mut best = table[k.abs_diff(lo)] - values[lo];
        let mut arg = lo;
        for j in lo + 1..=hi {
            let v = table[k.abs_diff(j)] - values[j];
            if v < best {
                best = v;
                arg = j;
            }
        }
        (best, arg)
    };

    (out[0], argmin[0]) = scan(0, 0, n - 1);
    let mut step = 1;
    while 2 * step < n {
        step *= 2;
    }
    loop {
        let mut k = step;
        while k < n {
            let lo = argmin[k - step];
            let hi = if k + step < n { argmin[k + step] } else { n - 1 };
            (out[k], argmin[k]) = scan(k, lo, hi);
            k += 2 * step;
        }
        if step == 1 {
            break;
        }
        step /= 2;
    }
}
