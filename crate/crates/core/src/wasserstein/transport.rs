//! Exact transportation solver for arbitrary marginals: successive shortest
//! paths on the bipartite residual graph with Dijkstra and node potentials.

/// Returns sparse plan entries `(row, col, mass)` for row-major `cost` of shape
/// `supply.len() x demand.len()`. All supplies and demands must be positive.
pub(crate) fn solve_transport(cost: &[f64], supply: &[f64], demand: &[f64]) -> Vec<(usize, usize, f64)> {
    let n0 = supply.len();
    let n1 = demand.len();
    debug_assert_eq!(cost.len(), n0 * n1);
    let nodes = n0 + n1;

    let mut flow = vec![0.0f64; n0 * n1];
    let mut left = supply.to_vec();
    let mut need = demand.to_vec();
    let mut potential = vec![0.0f64; nodes];
    let mut dist = vec![f64::INFINITY; nodes];
    let mut pred = vec![usize::MAX; nodes];
    let mut done = vec![false; nodes];

    while left.iter().any(|&s| s > 0.0) && need.iter().any(|&d| d > 0.0) {
        dist.iter_mut().for_each(|d| *d = f64::INFINITY);
        pred.iter_mut().for_each(|p| *p = usize::MAX);
        done.iter_mut().for_each(|f| *f = false);
        for i in 0..n0 {
            if left[i] > 0.0 {
                dist[i] = 0.0;
            }
        }

        // Dense Dijkstra on reduced costs; lowest index wins ties.
        loop {
            let mut best = usize::MAX;
            let mut best_d = f64::INFINITY;
            for (node, &d) in dist.iter().enumerate() {
                if !done[node] && d < best_d {
                    best_d = d;
                    best = node;
                }
            }
            if best == usize::MAX {
                break;
            }
            done[best] = true;
            if best < n0 {
                let i = best;
                for j in 0..n1 {
                    let node = n0 + j;
                    if done[node] {
                        continue;
                    }
                    let reduced = (cost[i * n1 + j] + potential[i] - potential[node]).max(0.0);
                    let cand = best_d + reduced;
                    if cand < dist[node] {
                        dist[node] = cand;
                        pred[node] = i;
                    }
                }
            } else {
                let j = best - n0;
                for i in 0..n0 {
                    if done[i] || flow[i * n1 + j] <= 0.0 {
                        continue;
                    }
                    let reduced = (-cost[i * n1 + j] + potential[best] - potential[i]).max(0.0);
                    let cand = best_d + reduced;
                    if cand < dist[i] {
                        dist[i] = cand;
                        pred[i] = best;
                    }
                }
            }
        }

        let mut target = usize::MAX;
        let mut target_d = f64::INFINITY;
        for j in 0..n1 {
            if need[j] > 0.0 && dist[n0 + j] < target_d {
                target_d = dist[n0 + j];
                target = n0 + j;
            }
        }
        if target == usize::MAX {
            break;
        }

        let cap = dist.iter().cloned().filter(|d| d.is_finite()).fold(0.0, f64::max);
        for (p, d) in potential.iter_mut().zip(&dist) {
            *p += if d.is_finite() { *d } else { cap };
        }

        // Bottleneck along the path: source supply, sink demand, reverse-arc flows.
        let mut delta = need[target - n0];
        let mut node = target;
        while pred[node] != usize::MAX {
            let prev = pred[node];
            if prev >= n0 {
                let (i, j) = (node, prev - n0);
                delta = delta.min(flow[i * n1 + j]);
            }
            node = prev;
        }
        let source = node;
        delta = delta.min(left[source]);

        let mut node = target;
        while pred[node] != usize::MAX {
            let prev = pred[node];
            if prev < n0 {
                flow[prev * n1 + (node - n0)] += delta;
            } else {
                let (i, j) = (node, prev - n0);
                let f = &mut flow[i * n1 + j];
                *f = if *f == delta { 0.0 } else { *f - delta };
            }
            node = prev;
        }
        left[source] = if left[source] == delta { 0.0 } else { left[source] - delta };
        let t = target - n0;
        need[t] = if need[t] == delta { 0.0 } else { need[t] - delta };
    }

    let mut entries = Vec::new();
    for i in 0..n0 {
        for j in 0..n1 {
            let f = flow[i * n1 + j];
            if f > 0.0 {
                entries.push((i, j, f));
            }
        }
    }
    entries
}
