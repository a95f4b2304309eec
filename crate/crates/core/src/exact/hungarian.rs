//! Dense linear assignment by shortest augmenting paths with potentials.

/// Minimum-cost assignment of every row to a distinct column.
///
/// `cost` is row-major `rows x cols` with `rows <= cols`. Returns
/// `col_of_row`. Runs in `O(rows^2 * cols)`; each row is inserted with one
/// Dijkstra pass over reduced costs.
pub fn solve_assignment(cost: &[f64], rows: usize, cols: usize) -> Vec<usize> {
    assert!(rows <= cols, "need rows <= cols, got {rows} x {cols}");
    assert_eq!(cost.len(), rows * cols);
    if rows == 0 {
        return Vec::new();
    }

    // Row potentials, column potentials. Index 0 of the column arrays is a
    // virtual column holding the row currently being inserted.
    let mut u = vec![0.0f64; rows + 1];
    let mut v = vec![0.0f64; cols + 1];
    let mut row_of_col = vec![usize::MAX; cols + 1];
    let mut way = vec![0usize; cols + 1];
    let mut minv = vec![f64::INFINITY; cols + 1];
    let mut used = vec![false; cols + 1];
    // Columns not yet reached in the current pass; shrinks as the tree grows.
    let mut frontier: Vec<usize> = Vec::with_capacity(cols);

    for i in 0..rows {
        row_of_col[0] = i;
        let mut j0 = 0usize;
        minv.fill(f64::INFINITY);
        used.fill(false);
        frontier.clear();
        frontier.extend(1..=cols);
        let mut visited: Vec<usize> = vec![0];

        loop {
            used[j0] = true;
            let i0 = row_of_col[j0];
            let row = &cost[i0 * cols..(i0 + 1) * cols];
            let ui0 = u[i0 + 1];
            let mut delta = f64::INFINITY;
            let mut j1 = 0usize;
            let mut j1_pos = 0usize;
            for (pos, &j) in frontier.iter().enumerate() {
                let cur = row[j - 1] - ui0 - v[j];
                if cur < minv[j] {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if minv[j] < delta || (minv[j] == delta && j < j1) {
                    delta = minv[j];
                    j1 = j;
                    j1_pos = pos;
                }
            }
            for &j in &visited {
                u[row_of_col[j] + 1] += delta;
                v[j] -= delta;
            }
            for &j in &frontier {
                minv[j] -= delta;
            }
            frontier.swap_remove(j1_pos);
            visited.push(j1);
            j0 = j1;
            if row_of_col[j0] == usize::MAX {
                break;
            }
        }

        loop {
            let j1 = way[j0];
            row_of_col[j0] = row_of_col[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }

    let mut col_of_row = vec![usize::MAX; rows];
    for j in 1..=cols {
        if row_of_col[j] != usize::MAX {
            col_of_row[row_of_col[j]] = j - 1;
        }
    }
    debug_assert!(col_of_row.iter().all(|&c| c != usize::MAX));
    col_of_row
}
