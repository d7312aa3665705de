//! Disjoint orthonormal bases inside a set of states, as disjoint `d`-cliques
//! of the orthogonality graph.

use crate::error::Result;
use crate::linalg::{check_dims, inner_unchecked, Basis, CVec};

/// Up to this many vectors the packing is exact; beyond it, greedy.
pub const EXACT_LIMIT: usize = 64;

/// Groups states into disjoint orthonormal bases.
///
/// Two states are adjacent when `|⟨u|v⟩|² ≤ tol`. Every `d`-clique is an
/// orthonormal basis. For at most [`EXACT_LIMIT`] states the number of
/// disjoint cliques is maximized by backtracking; larger inputs take cliques
/// greedily in index order. Output bases are ordered by their smallest
/// member index, rows by index.
pub fn partition_into_bases(vs: &[CVec], tol: f64) -> Result<Vec<Basis>> {
    let Some(first) = vs.first() else {
        return Ok(Vec::new());
    };
    let d = first.dim();
    for v in vs {
        check_dims(d, v.dim())?;
        v.check_state(1e-8)?;
    }
    let n = vs.len();
    let adj: Vec<Vec<bool>> = (0..n)
        .map(|i| {
            (0..n).map(|j| i != j && inner_unchecked(vs[i].entries(), vs[j].entries()).norm_sqr() <= tol).collect()
        })
        .collect();

    let chosen = if n <= EXACT_LIMIT { exact_packing(&adj, d) } else { greedy_packing(&adj, d) };

    let mut chosen = chosen;
    chosen.sort_by_key(|c| c[0]);
    chosen
        .into_iter()
        .enumerate()
        .map(|(k, clique)| Basis::from_rows(clique.iter().map(|&i| vs[i].clone()).collect(), format!("found{k}")))
        .collect()
}

/// All cliques of exactly `size` vertices whose members are drawn from
/// `allowed`, as sorted index lists.
fn cliques_of_size(adj: &[Vec<bool>], size: usize, allowed: &[bool], limit: usize) -> Vec<Vec<usize>> {
    fn extend(
        adj: &[Vec<bool>],
        size: usize,
        current: &mut Vec<usize>,
        candidates: &[usize],
        out: &mut Vec<Vec<usize>>,
        limit: usize,
    ) {
        if out.len() >= limit {
            return;
        }
        if current.len() == size {
            out.push(current.clone());
            return;
        }
        if current.len() + candidates.len() < size {
            return;
        }
        for (pos, &c) in candidates.iter().enumerate() {
            let next: Vec<usize> = candidates[pos + 1..].iter().copied().filter(|&o| adj[c][o]).collect();
            current.push(c);
            extend(adj, size, current, &next, out, limit);
            current.pop();
            if out.len() >= limit {
                return;
            }
        }
    }
    let candidates: Vec<usize> = (0..adj.len()).filter(|&i| allowed[i]).collect();
    let mut out = Vec::new();
    extend(adj, size, &mut Vec::with_capacity(size), &candidates, &mut out, limit);
    out
}

fn exact_packing(adj: &[Vec<bool>], d: usize) -> Vec<Vec<usize>> {
    let n = adj.len();
    let cliques = cliques_of_size(adj, d, &vec![true; n], usize::MAX);
    let masks: Vec<u64> = cliques.iter().map(|c| c.iter().fold(0u64, |m, &i| m | (1 << i))).collect();

    fn search(
        masks: &[u64],
        start: usize,
        used: u64,
        current: &mut Vec<usize>,
        best: &mut Vec<usize>,
        n: usize,
        d: usize,
    ) {
        if current.len() > best.len() {
            *best = current.clone();
        }
        let free = n - used.count_ones() as usize;
        if current.len() + free / d <= best.len() {
            return;
        }
        for k in start..masks.len() {
            if masks[k] & used == 0 {
                current.push(k);
                search(masks, k + 1, used | masks[k], current, best, n, d);
                current.pop();
            }
        }
    }
    let mut best = Vec::new();
    search(&masks, 0, 0, &mut Vec::new(), &mut best, n, d);
    best.into_iter().map(|k| cliques[k].clone()).collect()
}

fn greedy_packing(adj: &[Vec<bool>], d: usize) -> Vec<Vec<usize>> {
    let n = adj.len();
    let mut allowed = vec![true; n];
    let mut out = Vec::new();
    loop {
        let found = cliques_of_size(adj, d, &allowed, 1);
        let Some(c) = found.into_iter().next() else { break };
        for &i in &c {
            allowed[i] = false;
        }
        out.push(c);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{fourier_basis, haar_unitary, validate_mub_set, MubSet};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn empty_input() {
        assert!(partition_into_bases(&[], 1e-8).unwrap().is_empty());
    }

    #[test]
    fn single_basis_recovered() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let b = Basis::identity(4).transform(&haar_unitary(4, &mut rng)).unwrap();
        let out = partition_into_bases(b.rows(), 1e-8).unwrap();
        assert_eq!(out.len(), 1);
        assert!(validate_mub_set(&MubSet::new(out).unwrap(), 1e-10).unwrap().ok);
    }

    #[test]
    fn interleaved_bases_separated() {
        // identity and Fourier rows interleaved: two disjoint 3-cliques
        let f = fourier_basis(3).unwrap();
        let i = Basis::identity(3);
        let vs: Vec<CVec> = (0..3).flat_map(|k| [f.row(k).clone(), i.row(k).clone()]).collect();
        let out = partition_into_bases(&vs, 1e-8).unwrap();
        assert_eq!(out.len(), 2);
        assert_eq!(out[0].row(0), f.row(0));
        assert_eq!(out[1].row(0), i.row(0));
    }

    #[test]
    fn exact_beats_greedy_order() {
        // edges 0-1, 0-2, 1-3: greedy takes {0,1} and strands 2 and 3
        let adj = vec![
            vec![false, true, true, false],
            vec![true, false, false, true],
            vec![true, false, false, false],
            vec![false, true, false, false],
        ];
        assert_eq!(greedy_packing(&adj, 2).len(), 1);
        assert_eq!(exact_packing(&adj, 2), vec![vec![0, 2], vec![1, 3]]);
    }
}
