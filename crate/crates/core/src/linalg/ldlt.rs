//! Envelope `LDLᵀ` factorization of sparse symmetric matrices, used for
//! inertia (negative eigenvalue) counting via Sylvester's law.
//!
//! Rows are reordered with reverse Cuthill–McKee to keep the envelope small.
//! No pivoting is done: a pivot that is tiny relative to the matrix scale is
//! reported as [`LdltError::Breakdown`] and the caller decides how to recover.

use std::collections::VecDeque;

use super::sparse::CsrMatrix;

#[derive(Debug, Clone, PartialEq)]
pub enum LdltError {
    NotSquare,
    Breakdown { row: usize, pivot: f64 },
}

/// Signs of the pivots of a factorization.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Inertia {
    pub negative: usize,
    pub zero: usize,
    pub positive: usize,
}

/// Reverse Cuthill–McKee ordering of the symmetrized sparsity pattern.
/// Returns `perm` with `perm[new] = old`.
pub fn rcm_ordering(a: &CsrMatrix<f64>) -> Vec<usize> {
    let n = a.nrows();
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (i, j, _) in a.triplets() {
        if i != j {
            adj[i].push(j);
            adj[j].push(i);
        }
    }
    for row in adj.iter_mut() {
        row.sort_unstable();
        row.dedup();
    }
    let degree: Vec<usize> = adj.iter().map(Vec::len).collect();
    let mut visited = vec![false; n];
    let mut order = Vec::with_capacity(n);
    while order.len() < n {
        // Start each component from a minimum-degree vertex, then move to a
        // pseudo-peripheral vertex with one extra BFS sweep.
        let seed = (0..n)
            .filter(|&v| !visited[v])
            .min_by_key(|&v| degree[v])
            .expect("unvisited vertex exists");
        let start = farthest_vertex(seed, &adj, &visited, &degree);
        let mut queue = VecDeque::from([start]);
        visited[start] = true;
        while let Some(v) = queue.pop_front() {
            order.push(v);
            let mut next: Vec<usize> = adj[v].iter().copied().filter(|&w| !visited[w]).collect();
            next.sort_by_key(|&w| degree[w]);
            for w in next {
                visited[w] = true;
                queue.push_back(w);
            }
        }
    }
    order.reverse();
    order
}

fn farthest_vertex(seed: usize, adj: &[Vec<usize>], visited: &[bool], degree: &[usize]) -> usize {
    let mut dist = vec![usize::MAX; adj.len()];
    dist[seed] = 0;
    let mut queue = VecDeque::from([seed]);
    let mut best = seed;
    while let Some(v) = queue.pop_front() {
        let better = dist[v] > dist[best] || (dist[v] == dist[best] && degree[v] < degree[best]);
        if better {
            best = v;
        }
        for &w in &adj[v] {
            if !visited[w] && dist[w] == usize::MAX {
                dist[w] = dist[v] + 1;
                queue.push_back(w);
            }
        }
    }
    best
}

/// Symmetric permutation `P A Pᵀ` with `perm[new] = old`.
pub fn permute_symmetric(a: &CsrMatrix<f64>, perm: &[usize]) -> CsrMatrix<f64> {
    let n = a.nrows();
    let mut inv = vec![0; n];
    for (new, &old) in perm.iter().enumerate() {
        inv[old] = new;
    }
    CsrMatrix::from_triplets(n, n, a.triplets().map(|(i, j, v)| (inv[i], inv[j], v)))
        .expect("permutation preserves shape")
}

/// Envelope `LDLᵀ` factor: row `i` of `L` stores columns `first[i]..i`.
#[derive(Debug, Clone)]
pub struct EnvelopeLdlt {
    first: Vec<usize>,
    offsets: Vec<usize>,
    lower: Vec<f64>,
    pivots: Vec<f64>,
}

impl EnvelopeLdlt {
    /// Factors a symmetric matrix in its given ordering. Only the lower
    /// triangle is read.
    pub fn factor(a: &CsrMatrix<f64>, rel_tol: f64) -> Result<Self, LdltError> {
        if !a.is_square() {
            return Err(LdltError::NotSquare);
        }
        let n = a.nrows();
        let mut first: Vec<usize> = (0..n).collect();
        for (i, j, _) in a.triplets() {
            if j < i {
                first[i] = first[i].min(j);
            }
        }
        let mut offsets = Vec::with_capacity(n + 1);
        offsets.push(0);
        for i in 0..n {
            offsets.push(offsets[i] + (i - first[i]));
        }
        let scale = a.max_abs().max(f64::MIN_POSITIVE);
        let mut lower = vec![0.0; offsets[n]];
        let mut pivots = vec![0.0; n];
        let mut u = Vec::new();
        for i in 0..n {
            let fi = first[i];
            let width = i - fi;
            // u holds a_ij, then u_ij = l_ij d_j once column j is processed.
            u.clear();
            u.resize(width, 0.0);
            let mut diag = 0.0;
            for (j, v) in a.row(i) {
                if j < i {
                    u[j - fi] = v;
                } else if j == i {
                    diag = v;
                }
            }
            for j in fi..i {
                let fj = first[j];
                let k0 = fi.max(fj);
                let lj = &lower[offsets[j]..offsets[j + 1]];
                let dot: f64 = u[k0 - fi..j - fi]
                    .iter()
                    .zip(&lj[k0 - fj..j - fj])
                    .map(|(a, b)| a * b)
                    .sum();
                u[j - fi] -= dot;
            }
            let row = &mut lower[offsets[i]..offsets[i + 1]];
            for (k, col) in (fi..i).enumerate() {
                let l = u[k] / pivots[col];
                row[k] = l;
                diag -= l * u[k];
            }
            if diag.abs() <= rel_tol * scale {
                return Err(LdltError::Breakdown { row: i, pivot: diag });
            }
            pivots[i] = diag;
        }
        Ok(Self {
            first,
            offsets,
            lower,
            pivots,
        })
    }

    pub fn pivots(&self) -> &[f64] {
        &self.pivots
    }

    pub fn envelope_size(&self) -> usize {
        self.lower.len()
    }

    pub fn inertia(&self) -> Inertia {
        let mut out = Inertia {
            negative: 0,
            zero: 0,
            positive: 0,
        };
        for &d in &self.pivots {
            if d < 0.0 {
                out.negative += 1;
            } else if d > 0.0 {
                out.positive += 1;
            } else {
                out.zero += 1;
            }
        }
        out
    }

    /// Solves `L D Lᵀ x = b`.
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.pivots.len();
        let mut x = b.to_vec();
        for i in 0..n {
            let fi = self.first[i];
            let row = &self.lower[self.offsets[i]..self.offsets[i + 1]];
            let s: f64 = row.iter().zip(&x[fi..i]).map(|(l, v)| l * v).sum();
            x[i] -= s;
        }
        for i in 0..n {
            x[i] /= self.pivots[i];
        }
        for i in (0..n).rev() {
            let fi = self.first[i];
            let xi = x[i];
            let row = &self.lower[self.offsets[i]..self.offsets[i + 1]];
            for (k, l) in row.iter().enumerate() {
                x[fi + k] -= l * xi;
            }
        }
        x
    }
}

/// Inertia of a sparse symmetric matrix: RCM reordering followed by an
/// envelope `LDLᵀ`.
pub fn sparse_inertia(a: &CsrMatrix<f64>, rel_tol: f64) -> Result<Inertia, LdltError> {
    if !a.is_square() {
        return Err(LdltError::NotSquare);
    }
    let perm = rcm_ordering(a);
    let pa = permute_symmetric(a, &perm);
    Ok(EnvelopeLdlt::factor(&pa, rel_tol)?.inertia())
}
