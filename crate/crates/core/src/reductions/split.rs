//! Occurrence splitting: every occurrence gets its own copy of the variable,
//! with equality clauses tying the copies together along a cycle.

use super::cnf::{CnfFormula, Lit};
use crate::error::Result;

/// Copies of each input variable in the split formula.
pub type CopyMap = Vec<Vec<usize>>;

/// Replaces each occurrence by a fresh variable and adds `(a ∨ ¬b)`, `(¬a ∨ b)`
/// for consecutive copies around a cycle (a single edge for two copies).
pub fn split_occurrences(phi: &CnfFormula) -> Result<(CnfFormula, CopyMap)> {
    let mut copies: CopyMap = vec![Vec::new(); phi.n_vars()];
    let mut next = 0usize;
    let mut clauses: Vec<Vec<Lit>> = Vec::with_capacity(phi.m());
    for c in phi.clauses() {
        let mut out = Vec::with_capacity(c.len());
        for l in c {
            copies[l.var].push(next);
            out.push(Lit { var: next, positive: l.positive });
            next += 1;
        }
        clauses.push(out);
    }
    for cs in &copies {
        let edges: Vec<(usize, usize)> = match cs.len() {
            0 | 1 => Vec::new(),
            2 => vec![(cs[0], cs[1])],
            k => (0..k).map(|i| (cs[i], cs[(i + 1) % k])).collect(),
        };
        for (a, b) in edges {
            clauses.push(vec![Lit::pos(a), Lit::neg(b)]);
            clauses.push(vec![Lit::neg(a), Lit::pos(b)]);
        }
    }
    // variables that never occur keep one copy so the variable count is honest
    for cs in copies.iter_mut().filter(|c| c.is_empty()) {
        cs.push(next);
        next += 1;
    }
    Ok((CnfFormula::new(next, clauses)?, copies))
}

/// `Φ_n` over `z = x0` and `x1..xn`: `z ∨ ¬xi` for each `i`, then `¬xi` for each
/// `i`, then `¬z`; and its occurrence split.
pub fn occurrence_split_family(n: usize) -> Result<(CnfFormula, CnfFormula)> {
    let mut clauses = Vec::with_capacity(2 * n + 1);
    for i in 1..=n {
        clauses.push(vec![Lit::pos(0), Lit::neg(i)]);
    }
    for i in 1..=n {
        clauses.push(vec![Lit::neg(i)]);
    }
    clauses.push(vec![Lit::neg(0)]);
    let phi = CnfFormula::new(n + 1, clauses)?;
    let (psi, _) = split_occurrences(&phi)?;
    Ok((phi, psi))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn family_shapes() {
        let (phi, psi) = occurrence_split_family(1).unwrap();
        assert_eq!(phi.m(), 3);
        assert_eq!(phi.n_vars(), 2);
        // z has 2 copies, x1 has 2 copies, one equality edge each
        assert_eq!(psi.n_vars(), 4);
        assert_eq!(psi.m(), 3 + 4);
        for n in 1..=6 {
            let (phi, psi) = occurrence_split_family(n).unwrap();
            assert_eq!(phi.m(), 2 * n + 1);
            assert_eq!(psi.n_vars(), 3 * n + 1);
            assert!(psi.occurrence_bound() <= 5);
        }
    }

    #[test]
    fn copies_agree_in_every_model() {
        let (_, psi) = occurrence_split_family(3).unwrap();
        let sat: Vec<u64> = (0u64..1 << psi.n_vars()).filter(|&x| psi.unsatisfied_count(x) == 0).collect();
        assert_eq!(sat, vec![0]);
    }
}
