use super::combinatorics::injections;
use super::{bound_rows, ConvexPart};
use crate::conic::ConeKind;
use crate::model::ConicConstraint;
use crate::numerics::DenseMatrix;

/// Minimum-cost assignment of every row of `cost` (`r x c`, `r <= c`) to a
/// distinct column. Returns the total cost and the column of each row.
fn hungarian(cost: &[Vec<f64>]) -> (f64, Vec<usize>) {
    let r = cost.len();
    if r == 0 {
        return (0.0, Vec::new());
    }
    let c = cost[0].len();
    let mut u = vec![0.0; r + 1];
    let mut v = vec![0.0; c + 1];
    let mut p = vec![0usize; c + 1];
    let mut way = vec![0usize; c + 1];
    for i in 1..=r {
        p[0] = i;
        let mut j0 = 0;
        let mut minv = vec![f64::INFINITY; c + 1];
        let mut used = vec![false; c + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0;
            for j in 1..=c {
                if !used[j] {
                    let cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
                    if cur < minv[j] {
                        minv[j] = cur;
                        way[j] = j0;
                    }
                    if minv[j] < delta {
                        delta = minv[j];
                        j1 = j;
                    }
                }
            }
            for j in 0..=c {
                if used[j] {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut assign = vec![0; r];
    for j in 1..=c {
        if p[j] != 0 {
            assign[p[j] - 1] = j - 1;
        }
    }
    let total = (0..r).map(|i| cost[i][assign[i]]).sum();
    (total, assign)
}

/// Best total weight assigning columns `cols` to distinct rows in `rows`.
fn best_weight(z: &DenseMatrix, rows: &[usize], cols: &[usize]) -> f64 {
    let cost: Vec<Vec<f64>> = cols.iter().map(|&j| rows.iter().map(|&i| -z[(i, j)]).collect()).collect();
    -hungarian(&cost).0
}

/// Column-to-row map of the maximum-weight assignment, choosing the
/// lexicographically smallest map among optimal ones.
fn assignment_map(z: &DenseMatrix) -> Vec<usize> {
    let (m, n) = (z.rows(), z.cols());
    if let Some(map) = member_map(z) {
        return map;
    }
    let all_rows: Vec<usize> = (0..m).collect();
    let all_cols: Vec<usize> = (0..n).collect();
    let opt = best_weight(z, &all_rows, &all_cols);
    let scale: f64 = z.as_slice().iter().map(|x| x.abs()).sum::<f64>() + 1.0;
    let tol = 1e-12 * scale;
    let mut used = vec![false; m];
    let mut map = Vec::with_capacity(n);
    let mut acc = 0.0;
    for j in 0..n {
        let rest_cols: Vec<usize> = (j + 1..n).collect();
        let mut chosen = None;
        for i in 0..m {
            if used[i] {
                continue;
            }
            let rest_rows: Vec<usize> = (0..m).filter(|&r| !used[r] && r != i).collect();
            let val = acc + z[(i, j)] + best_weight(z, &rest_rows, &rest_cols);
            if val >= opt - tol {
                chosen = Some(i);
                break;
            }
        }
        let i = chosen.expect("some row attains the optimum");
        used[i] = true;
        acc += z[(i, j)];
        map.push(i);
    }
    map
}

/// The map of `z` when it already is an assignment matrix; it is then the
/// unique optimum.
fn member_map(z: &DenseMatrix) -> Option<Vec<usize>> {
    let (m, n) = (z.rows(), z.cols());
    let mut used = vec![false; m];
    let mut map = Vec::with_capacity(n);
    for j in 0..n {
        let mut row = None;
        for i in 0..m {
            match z[(i, j)] {
                0.0 => {}
                1.0 if row.is_none() && !used[i] => row = Some(i),
                _ => return None,
            }
        }
        let i = row?;
        used[i] = true;
        map.push(i);
    }
    Some(map)
}

fn map_to_matrix(map: &[usize], m: usize, n: usize) -> Vec<f64> {
    let mut out = vec![0.0; m * n];
    for (j, &i) in map.iter().enumerate() {
        out[i * n + j] = 1.0;
    }
    out
}

/// Nearest assignment matrix (one 1 per column, at most one per row) via
/// maximum-weight matching; ties go to the lexicographically smallest
/// column-to-row map.
pub fn project_assignment(z: &DenseMatrix) -> DenseMatrix {
    let (m, n) = (z.rows(), z.cols());
    DenseMatrix::new(m, n, map_to_matrix(&assignment_map(z), m, n)).expect("shape")
}

pub(super) fn assign(z: &[f64], m: usize, n: usize) -> Vec<f64> {
    let zm = DenseMatrix::new(m, n, z.to_vec()).expect("shape");
    map_to_matrix(&assignment_map(&zm), m, n)
}

pub(super) fn assign_relax(m: usize, n: usize) -> ConvexPart {
    let cols: Vec<ConicConstraint> =
        (0..n).map(|j| ConicConstraint::eq(&(0..m).map(|i| (i * n + j, 1.0)).collect::<Vec<_>>(), 1.0)).collect();
    let mut constraints = vec![bound_rows(0..m * n, 0.0, 1.0)];
    for i in 0..m {
        let row: Vec<(usize, f64)> = (0..n).map(|j| (i * n + j, 1.0)).collect();
        constraints.push(if m == n { ConicConstraint::eq(&row, 1.0) } else { ConicConstraint::le(&row, 1.0) });
    }
    constraints.extend(cols);
    ConvexPart { constraints, num_aux: 0 }
}

fn push_unique(out: &mut Vec<Vec<f64>>, z: &[f64], y: Vec<f64>) {
    if y != z && !out.contains(&y) {
        out.push(y);
    }
}

/// Swaps of adjacent rows and adjacent columns, without duplicates.
pub(super) fn assign_neighbors(z: &[f64], m: usize, n: usize) -> Vec<Vec<f64>> {
    let mut out = Vec::new();
    for i in 0..m.saturating_sub(1) {
        let mut y = z.to_vec();
        for j in 0..n {
            y.swap(i * n + j, (i + 1) * n + j);
        }
        push_unique(&mut out, z, y);
    }
    for j in 0..n.saturating_sub(1) {
        let mut y = z.to_vec();
        for i in 0..m {
            y.swap(i * n + j, i * n + j + 1);
        }
        push_unique(&mut out, z, y);
    }
    out
}

pub(super) fn assign_members(m: usize, n: usize) -> Vec<Vec<f64>> {
    injections(m, n).iter().map(|map| map_to_matrix(map, m, n)).collect()
}

fn find(parent: &mut [usize], mut x: usize) -> usize {
    while parent[x] != x {
        parent[x] = parent[parent[x]];
        x = parent[x];
    }
    x
}

/// Greedy Hamiltonian cycle on weights `(Z + Z')/2`: take edges by
/// decreasing weight (ties in lexicographic order) unless they give a node
/// degree three or close a cycle early, then join the path's endpoints.
pub fn project_cycle_approx(z: &DenseMatrix) -> DenseMatrix {
    let n = z.rows();
    DenseMatrix::new(n, n, cycle(z.as_slice(), n)).expect("shape")
}

pub(super) fn cycle(z: &[f64], n: usize) -> Vec<f64> {
    let mut edges = Vec::with_capacity(n * (n - 1) / 2);
    for i in 0..n {
        for j in i + 1..n {
            edges.push((0.5 * (z[i * n + j] + z[j * n + i]), i, j));
        }
    }
    edges.sort_by(|a, b| b.0.total_cmp(&a.0));
    let mut deg = vec![0usize; n];
    let mut parent: Vec<usize> = (0..n).collect();
    let mut out = vec![0.0; n * n];
    let mut taken = 0;
    for &(_, i, j) in &edges {
        if taken == n - 1 {
            break;
        }
        if deg[i] >= 2 || deg[j] >= 2 {
            continue;
        }
        let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
        if ri == rj {
            continue;
        }
        parent[ri] = rj;
        deg[i] += 1;
        deg[j] += 1;
        out[i * n + j] = 1.0;
        out[j * n + i] = 1.0;
        taken += 1;
    }
    let ends: Vec<usize> = (0..n).filter(|&i| deg[i] == 1).collect();
    let (a, b) = (ends[0], ends[1]);
    out[a * n + b] = 1.0;
    out[b * n + a] = 1.0;
    out
}

pub(super) fn cycle_relax(n: usize) -> ConvexPart {
    let mut constraints = vec![bound_rows(0..n * n, 0.0, 1.0)];
    let mut a = Vec::new();
    let mut rows = 0;
    for i in 0..n {
        for j in i + 1..n {
            a.push((rows, i * n + j, 1.0));
            a.push((rows, j * n + i, -1.0));
            rows += 1;
        }
    }
    for i in 0..n {
        a.push((rows, i * n + i, 1.0));
        rows += 1;
    }
    let mut b = vec![0.0; rows];
    for i in 0..n {
        for j in 0..n {
            a.push((rows, i * n + j, 1.0));
        }
        b.push(-2.0);
        rows += 1;
    }
    constraints.push(ConicConstraint::new(ConeKind::Zero, a, b));
    ConvexPart { constraints, num_aux: 0 }
}

/// Visiting order starting at node 0 towards its smaller neighbor.
fn tour_of(z: &[f64], n: usize) -> Vec<usize> {
    let mut tour = vec![0];
    let mut prev = usize::MAX;
    let mut cur = 0;
    while tour.len() < n {
        let next = (0..n).find(|&j| j != prev && j != cur && z[cur * n + j] > 0.5).expect("valid cycle");
        tour.push(next);
        prev = cur;
        cur = next;
    }
    tour
}

pub(super) fn tour_matrix(tour: &[usize]) -> Vec<f64> {
    let n = tour.len();
    let mut out = vec![0.0; n * n];
    for p in 0..n {
        let (a, b) = (tour[p], tour[(p + 1) % n]);
        out[a * n + b] = 1.0;
        out[b * n + a] = 1.0;
    }
    out
}

/// Cycles obtained by exchanging two consecutive nodes of the tour.
pub(super) fn cycle_neighbors(z: &[f64], n: usize) -> Vec<Vec<f64>> {
    let tour = tour_of(z, n);
    let mut out = Vec::new();
    for p in 0..n {
        let mut t = tour.clone();
        t.swap(p, (p + 1) % n);
        push_unique(&mut out, z, tour_matrix(&t));
    }
    out
}

pub(super) fn cycle_members(n: usize) -> Vec<Vec<f64>> {
    injections(n - 1, n - 1)
        .into_iter()
        .filter(|perm| perm[0] < perm[n - 2])
        .map(|perm| {
            let mut tour = vec![0];
            tour.extend(perm.iter().map(|&i| i + 1));
            tour_matrix(&tour)
        })
        .collect()
}
