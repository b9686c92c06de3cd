//! Brute-force reference computations for the test suites. Nothing here
//! touches the library under test: matrices come in as plain rows and every
//! routine is the slowest obvious method.

pub type Rows = Vec<Vec<f64>>;

/// 50-digit evaluations of the probability-bound formulas on a fixed grid,
/// written by `theory_oracle.py`.
pub const THEORY_GRID_JSON: &str = include_str!("../data/theory_grid.json");

/// 1-based generator index of each entry of the `k x n` symmetric Toeplitz
/// slice, written out row by row: row `i` climbs `a_{n-i+1} .. a_n`, then
/// falls `a_{n-1} .. a_i`.
pub fn sym_toeplitz_pattern(k: usize, n: usize) -> Vec<Vec<usize>> {
    (1..=k)
        .map(|i| {
            let mut row: Vec<usize> = (n - i + 1..=n).collect();
            row.extend((i..n).rev());
            row
        })
        .collect()
}

/// Left-shifted variant: row `i` climbs `a_i .. a_n`, then falls
/// `a_{n-1} .. a_{n-i+1}`.
pub fn left_sym_toeplitz_pattern(k: usize, n: usize) -> Vec<Vec<usize>> {
    (1..=k)
        .map(|i| {
            let mut row: Vec<usize> = (i..=n).collect();
            row.extend((n - i + 1..n).rev());
            row
        })
        .collect()
}

/// Rows `i != i'` are adjacent when, restricted to the columns in
/// `subset`, they read a common generator entry. `pattern` holds generator
/// indices per row.
pub fn dependency_edges(pattern: &[Vec<usize>], subset: &[usize]) -> Vec<(usize, usize)> {
    let mut edges = Vec::new();
    for a in 0..pattern.len() {
        for b in a + 1..pattern.len() {
            let shared = subset.iter().any(|&s| subset.iter().any(|&t| pattern[a][s] == pattern[b][t]));
            if shared {
                edges.push((a, b));
            }
        }
    }
    edges
}

/// Exact cover of `0..k` by `q` classes that are independent in `edges`
/// with sizes `floor(k/q)` or `ceil(k/q)`.
pub fn is_equitable_coloring(k: usize, edges: &[(usize, usize)], q: usize, classes: &[Vec<usize>]) -> bool {
    if classes.len() != q {
        return false;
    }
    let mut color = vec![usize::MAX; k];
    for (c, class) in classes.iter().enumerate() {
        if class.len() * q < k - k % q || class.len() > k / q + usize::from(k % q != 0) {
            return false;
        }
        for &v in class {
            if v >= k || color[v] != usize::MAX {
                return false;
            }
            color[v] = c;
        }
    }
    color.iter().all(|&c| c != usize::MAX) && edges.iter().all(|&(a, b)| color[a] != color[b])
}

pub fn combinations(n: usize, s: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, s: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == s {
            out.push(cur.clone());
            return;
        }
        for j in start..n {
            cur.push(j);
            rec(j + 1, n, s, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, n, s, &mut Vec::new(), &mut out);
    out
}

/// Gaussian elimination with partial pivoting; `None` when a pivot is
/// negligible against the largest entry.
pub fn solve_square(mut a: Rows, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    let scale = a.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()));
    for c in 0..n {
        let p = (c..n).max_by(|&i, &j| a[i][c].abs().total_cmp(&a[j][c].abs()))?;
        if a[p][c].abs() <= 1e-12 * scale {
            return None;
        }
        a.swap(c, p);
        b.swap(c, p);
        for r in c + 1..n {
            let f = a[r][c] / a[c][c];
            for j in c..n {
                a[r][j] -= f * a[c][j];
            }
            b[r] -= f * b[c];
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let s: f64 = (r + 1..n).map(|j| a[r][j] * x[j]).sum();
        x[r] = (b[r] - s) / a[r][r];
    }
    Some(x)
}

pub struct LpOptimum {
    pub l1: f64,
    pub x: Vec<f64>,
}

/// `min |x|_1 s.t. A x = y` for a full-row-rank `A` by visiting every basic
/// solution: each set of `k` linearly independent columns.
pub fn l1_min_vertex_enumeration(a: &Rows, y: &[f64]) -> Option<LpOptimum> {
    let k = a.len();
    let n = a[0].len();
    let mut best: Option<LpOptimum> = None;
    for cols in combinations(n, k) {
        let sub: Rows = a.iter().map(|row| cols.iter().map(|&j| row[j]).collect()).collect();
        let Some(z) = solve_square(sub, y.to_vec()) else { continue };
        let l1: f64 = z.iter().map(|v| v.abs()).sum();
        if best.as_ref().is_none_or(|b| l1 < b.l1) {
            let mut x = vec![0.0; n];
            for (&j, &v) in cols.iter().zip(&z) {
                x[j] = v;
            }
            best = Some(LpOptimum { l1, x });
        }
    }
    best
}

/// Columns that reproduce `y` on their own, as `(j, coefficient)`.
pub fn single_atom_fits(a: &Rows, y: &[f64], rel_tol: f64) -> Vec<(usize, f64)> {
    let n = a[0].len();
    let yn = y.iter().map(|v| v * v).sum::<f64>().sqrt();
    (0..n)
        .filter_map(|j| {
            let col: Vec<f64> = a.iter().map(|r| r[j]).collect();
            let cc: f64 = col.iter().map(|v| v * v).sum();
            let c = col.iter().zip(y).map(|(a, b)| a * b).sum::<f64>() / cc;
            let res = col.iter().zip(y).map(|(a, b)| (c * a - b).powi(2)).sum::<f64>().sqrt();
            (res <= rel_tol * yn).then_some((j, c))
        })
        .collect()
}

/// Eigenvalues, ascending, of a symmetric matrix of order at most 3 in
/// closed form.
pub fn small_symmetric_eigenvalues(g: &Rows) -> Vec<f64> {
    match g.len() {
        1 => vec![g[0][0]],
        2 => {
            let (a, b, d) = (g[0][0], g[0][1], g[1][1]);
            let mid = 0.5 * (a + d);
            let rad = (0.25 * (a - d) * (a - d) + b * b).sqrt();
            vec![mid - rad, mid + rad]
        }
        3 => {
            let p1 = g[0][1].powi(2) + g[0][2].powi(2) + g[1][2].powi(2);
            let mut ev = if p1 == 0.0 {
                vec![g[0][0], g[1][1], g[2][2]]
            } else {
                let q = (g[0][0] + g[1][1] + g[2][2]) / 3.0;
                let p2 = (0..3).map(|i| (g[i][i] - q).powi(2)).sum::<f64>() + 2.0 * p1;
                let p = (p2 / 6.0).sqrt();
                let b = |i: usize, j: usize| (g[i][j] - if i == j { q } else { 0.0 }) / p;
                let det = b(0, 0) * (b(1, 1) * b(2, 2) - b(1, 2) * b(2, 1))
                    - b(0, 1) * (b(1, 0) * b(2, 2) - b(1, 2) * b(2, 0))
                    + b(0, 2) * (b(1, 0) * b(2, 1) - b(1, 1) * b(2, 0));
                let phi = (det / 2.0).clamp(-1.0, 1.0).acos() / 3.0;
                let hi = q + 2.0 * p * phi.cos();
                let lo = q + 2.0 * p * (phi + 2.0 * std::f64::consts::PI / 3.0).cos();
                vec![lo, 3.0 * q - hi - lo, hi]
            };
            ev.sort_by(f64::total_cmp);
            ev
        }
        s => panic!("closed form only up to order 3, got {s}"),
    }
}

/// `max(1 - lambda_min, lambda_max - 1)` of the Gram matrix on `subset`
/// (at most three columns).
pub fn subset_deviation(a: &Rows, subset: &[usize]) -> f64 {
    let g: Rows = subset
        .iter()
        .map(|&i| subset.iter().map(|&j| a.iter().map(|r| r[i] * r[j]).sum()).collect())
        .collect();
    let ev = small_symmetric_eigenvalues(&g);
    (1.0 - ev[0]).max(ev[ev.len() - 1] - 1.0)
}

/// Restricted isometry constant of order `s <= 3` by visiting every column
/// subset. Returns `(delta, witness)`; ties keep the first subset in
/// lexicographic order.
pub fn rip_brute_force(a: &Rows, s: usize) -> (f64, Vec<usize>) {
    let n = a[0].len();
    let mut best = (f64::NEG_INFINITY, Vec::new());
    for t in combinations(n, s) {
        let d = subset_deviation(a, &t);
        if d > best.0 {
            best = (d, t);
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn patterns_match_small_displays() {
        assert_eq!(sym_toeplitz_pattern(2, 4), vec![vec![4, 3, 2, 1], vec![3, 4, 3, 2]]);
        assert_eq!(left_sym_toeplitz_pattern(2, 4), vec![vec![1, 2, 3, 4], vec![2, 3, 4, 3]]);
    }

    #[test]
    fn closed_form_eigenvalues() {
        let g = vec![vec![2.0, 1.0, 0.0], vec![1.0, 2.0, 0.0], vec![0.0, 0.0, 5.0]];
        let ev = small_symmetric_eigenvalues(&g);
        for (a, b) in ev.iter().zip([1.0, 3.0, 5.0]) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn lp_vertex_on_known_instance() {
        let a = vec![vec![1.0, 1.0, 0.0], vec![0.0, 1.0, 1.0]];
        let opt = l1_min_vertex_enumeration(&a, &[1.0, 1.0]).unwrap();
        assert_eq!(opt.l1, 1.0);
        assert_eq!(opt.x, vec![0.0, 1.0, 0.0]);
    }
}
