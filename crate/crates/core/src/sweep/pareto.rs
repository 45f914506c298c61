//! Non-dominated filtering of (time cost, Elo) points.
//!
//! A point dominates another if it is no slower and no weaker, and strictly
//! better in at least one of the two. Identical points do not dominate each
//! other, so duplicates of a front point all survive.

/// Marks each point as Pareto-optimal or dominated.
pub fn pareto_flags(points: &[(f64, f64)]) -> Vec<bool> {
    let mut order: Vec<usize> = (0..points.len()).collect();
    // Time ascending, Elo descending within equal times.
    order.sort_by(|&a, &b| {
        points[a]
            .0
            .partial_cmp(&points[b].0)
            .unwrap()
            .then(points[b].1.partial_cmp(&points[a].1).unwrap())
    });

    let mut flags = vec![false; points.len()];
    let mut best_elo_earlier = f64::NEG_INFINITY; // over strictly smaller times
    let mut i = 0;
    while i < order.len() {
        // Group of equal time.
        let time = points[order[i]].0;
        let mut j = i;
        while j < order.len() && points[order[j]].0 == time {
            j += 1;
        }
        let group_max_elo = points[order[i]].1; // sorted desc within the group
        for &idx in &order[i..j] {
            let elo = points[idx].1;
            // Dominated by a same-time point with more Elo, or by any
            // strictly-faster point with at least as much Elo.
            flags[idx] = elo == group_max_elo && elo > best_elo_earlier;
        }
        best_elo_earlier = best_elo_earlier.max(group_max_elo);
        i = j;
    }
    flags
}

/// The non-dominated subset, sorted by time ascending.
pub fn pareto_front(points: &[(f64, f64)]) -> Vec<(f64, f64)> {
    let flags = pareto_flags(points);
    let mut front: Vec<(f64, f64)> = points
        .iter()
        .zip(&flags)
        .filter_map(|(&p, &keep)| keep.then_some(p))
        .collect();
    front.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.partial_cmp(&b.1).unwrap()));
    front
}
