//! Invariant-support detection.
//!
//! The protocol dynamics conserve `n_a1 + n_a2 + #(B in |2>) - #(A in |2>)`
//! under the Hamiltonian, and every jump operator lowers it or leaves it
//! unchanged. Starting from the computational manifold, only a few hundred of
//! the 900 basis states are ever populated. Rather than hard-coding that
//! charge, the integrators compute the closure of the initial support under
//! every operator that can move amplitude and evolve on that subspace only.
//! The restriction is exact: amplitudes outside the closure stay zero.

use crate::operator::CsrMatrix;

/// Smallest index set containing `seed` and closed under the column-to-row
/// maps of every operator in `ops`, sorted ascending.
pub(crate) fn closure(n: usize, seed: impl IntoIterator<Item = usize>, ops: &[&CsrMatrix]) -> Vec<usize> {
    // column -> rows adjacency, merged over all operators
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
    for op in ops {
        for (i, j, _) in op.entries() {
            adj[j].push(i);
        }
    }
    let mut inside = vec![false; n];
    let mut stack: Vec<usize> = Vec::new();
    for s in seed {
        if !inside[s] {
            inside[s] = true;
            stack.push(s);
        }
    }
    while let Some(j) = stack.pop() {
        for &i in &adj[j] {
            if !inside[i] {
                inside[i] = true;
                stack.push(i);
            }
        }
    }
    (0..n).filter(|&k| inside[k]).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::ONE;

    #[test]
    fn follows_direction_of_maps() {
        // 0 -> 1 -> 2, nothing reaches 3
        let m = CsrMatrix::from_triplets(4, vec![(1, 0, ONE), (2, 1, ONE), (0, 3, ONE)]);
        assert_eq!(closure(4, [0], &[&m]), vec![0, 1, 2]);
        assert_eq!(closure(4, [3], &[&m]), vec![0, 1, 2, 3]);
        assert_eq!(closure(4, [2], &[&m]), vec![2]);
    }
}
