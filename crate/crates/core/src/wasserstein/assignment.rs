//! Dense linear assignment in the Jonker-Volgenant style: column reduction with
//! reduction transfer, then shortest augmenting paths for the remaining free rows.
//! The augmenting row reduction phase is omitted; on real-valued Euclidean costs
//! it makes little progress per pass and dominated the run time.

const NONE: usize = usize::MAX;

/// Returns `assign[row] = col` minimizing the total cost of a dense `n x n`
/// row-major cost matrix.
pub(crate) fn solve_assignment(cost: &[f64], n: usize) -> Vec<usize> {
    debug_assert_eq!(cost.len(), n * n);
    match n {
        0 => return Vec::new(),
        1 => return vec![0],
        _ => {}
    }
    let mut lap = Jv {
        cost,
        n,
        row_of: vec![NONE; n],
        col_of: vec![NONE; n],
        v: vec![f64::INFINITY; n],
    };
    let free = lap.column_reduction();
    lap.augment(&free);
    lap.col_of
}

struct Jv<'a> {
    cost: &'a [f64],
    n: usize,
    /// column -> assigned row
    row_of: Vec<usize>,
    /// row -> assigned column
    col_of: Vec<usize>,
    /// column duals
    v: Vec<f64>,
}

impl Jv<'_> {
    #[inline]
    fn c(&self, i: usize, j: usize) -> f64 {
        self.cost[i * self.n + j]
    }

    fn column_reduction(&mut self) -> Vec<usize> {
        let n = self.n;
        let mut min_row = vec![0usize; n];
        for i in 0..n {
            let row = &self.cost[i * n..(i + 1) * n];
            for (j, &c) in row.iter().enumerate() {
                if c < self.v[j] {
                    self.v[j] = c;
                    min_row[j] = i;
                }
            }
        }
        let mut unique = vec![true; n];
        for j in (0..n).rev() {
            let i = min_row[j];
            if self.col_of[i] == NONE {
                self.col_of[i] = j;
                self.row_of[j] = i;
            } else {
                unique[i] = false;
            }
        }
        let mut free = Vec::new();
        for (i, &unique) in unique.iter().enumerate() {
            let j = self.col_of[i];
            if j == NONE {
                free.push(i);
            } else if unique {
                let mut min = f64::INFINITY;
                for j2 in 0..n {
                    if j2 != j {
                        min = min.min(self.c(i, j2) - self.v[j2]);
                    }
                }
                self.v[j] -= min;
            }
        }
        free
    }

    /// Dijkstra-like search from `start`; returns the free column reached and
    /// leaves predecessors in `pred`.
    fn find_path(&mut self, start: usize, pred: &mut [usize], cols: &mut [usize], d: &mut [f64]) -> usize {
        let n = self.n;
        for j in 0..n {
            cols[j] = j;
            pred[j] = start;
            d[j] = self.c(start, j) - self.v[j];
        }
        let (mut lo, mut hi) = (0usize, 0usize);
        let mut ready = 0usize;
        let mut end = NONE;
        while end == NONE {
            if lo == hi {
                ready = lo;
                // Collect all columns at the current minimum distance.
                hi = lo + 1;
                let mut mind = d[cols[lo]];
                // `k` runs to n independently of `hi`, which is reset when a smaller distance turns up.
                #[allow(clippy::mut_range_bound)]
                for k in hi..n {
                    let j = cols[k];
                    if d[j] <= mind {
                        if d[j] < mind {
                            hi = lo;
                            mind = d[j];
                        }
                        cols[k] = cols[hi];
                        cols[hi] = j;
                        hi += 1;
                    }
                }
                for &j in &cols[lo..hi] {
                    if self.row_of[j] == NONE {
                        end = j;
                        break;
                    }
                }
            }
            if end == NONE {
                // Scan rows assigned to the frontier columns.
                'scan: while lo != hi {
                    let j0 = cols[lo];
                    lo += 1;
                    let i = self.row_of[j0];
                    let mind = d[j0];
                    let h = self.c(i, j0) - self.v[j0] - mind;
                    let mut k = hi;
                    while k < n {
                        let j = cols[k];
                        let reduced = self.c(i, j) - self.v[j] - h;
                        if reduced < d[j] {
                            d[j] = reduced;
                            pred[j] = i;
                            if reduced == mind {
                                if self.row_of[j] == NONE {
                                    end = j;
                                    break 'scan;
                                }
                                cols[k] = cols[hi];
                                cols[hi] = j;
                                hi += 1;
                            }
                        }
                        k += 1;
                    }
                }
            }
        }
        let mind = d[end];
        for &j in &cols[..ready] {
            self.v[j] += d[j] - mind;
        }
        end
    }

    fn augment(&mut self, free: &[usize]) {
        let n = self.n;
        let mut pred = vec![0usize; n];
        let mut cols = vec![0usize; n];
        let mut d = vec![0.0f64; n];
        for &start in free {
            let mut j = self.find_path(start, &mut pred, &mut cols, &mut d);
            loop {
                let i = pred[j];
                self.row_of[j] = i;
                let previous = self.col_of[i];
                self.col_of[i] = j;
                if i == start {
                    break;
                }
                j = previous;
            }
        }
    }
}


/// Textbook O(n^3) Hungarian method, kept as an independent check on [`solve_assignment`].
#[cfg(test)]
pub(crate) fn hungarian(cost: &[f64], n: usize) -> Vec<usize> {
    debug_assert_eq!(cost.len(), n * n);
    if n == 0 {
        return Vec::new();
    }
    // 1-based arrays; index 0 is the virtual column / unmatched sentinel.
    let mut u = vec![0.0f64; n + 1];
    let mut v = vec![0.0f64; n + 1];
    let mut matched_row = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    let mut min_slack = vec![0.0f64; n + 1];
    let mut used = vec![false; n + 1];

    for row in 1..=n {
        matched_row[0] = row;
        let mut col0 = 0usize;
        min_slack.iter_mut().for_each(|m| *m = f64::INFINITY);
        used.iter_mut().for_each(|f| *f = false);
        loop {
            used[col0] = true;
            let i0 = matched_row[col0];
            let base = (i0 - 1) * n;
            let mut delta = f64::INFINITY;
            let mut col1 = 0usize;
            for j in 1..=n {
                if used[j] {
                    continue;
                }
                let reduced = cost[base + j - 1] - u[i0] - v[j];
                if reduced < min_slack[j] {
                    min_slack[j] = reduced;
                    way[j] = col0;
                }
                if min_slack[j] < delta {
                    delta = min_slack[j];
                    col1 = j;
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[matched_row[j]] += delta;
                    v[j] -= delta;
                } else {
                    min_slack[j] -= delta;
                }
            }
            col0 = col1;
            if matched_row[col0] == 0 {
                break;
            }
        }
        loop {
            let col1 = way[col0];
            matched_row[col0] = matched_row[col1];
            col0 = col1;
            if col0 == 0 {
                break;
            }
        }
    }

    let mut assign = vec![0usize; n];
    for j in 1..=n {
        assign[matched_row[j] - 1] = j - 1;
    }
    assign
}
