//! Parsimonious rewriting of bounded-width CNF into exactly-3-literal CNF.

use std::ops::Range;

use serde::Serialize;

use super::cnf::{CnfFormula, Lit};
use crate::error::{Error, Result};

/// Seven 3-clauses satisfied only when `l1`, `l2` and `l3` are all false.
pub fn f_gadget(l1: Lit, l2: Lit, l3: Lit) -> Result<Vec<Vec<Lit>>> {
    if l1.var == l2.var || l1.var == l3.var {
        return Err(Error::RepeatedVariable(l1.var));
    }
    if l2.var == l3.var {
        return Err(Error::RepeatedVariable(l2.var));
    }
    let (n1, n2, n3) = (l1.negate(), l2.negate(), l3.negate());
    Ok(vec![
        vec![n1, l2, l3],
        vec![n1, l2, n3],
        vec![n1, n2, l3],
        vec![n1, n2, n3],
        vec![l1, n2, l3],
        vec![l1, n2, n3],
        vec![l1, l2, n3],
    ])
}

/// Where each input clause went.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Exact3Provenance {
    pub input_vars: usize,
    pub input_clauses: usize,
    /// Occurrence bound `B` of the input.
    pub b: usize,
    /// Width bound `Q` of the input.
    pub q: usize,
    /// Guaranteed output occurrence bound `max{7B, 4BQ²}`.
    pub b_prime: usize,
    /// Output clause range generated by each input clause.
    pub clause_map: Vec<Range<usize>>,
    /// Auxiliary variables introduced for each input clause.
    pub aux_vars: Vec<Range<usize>>,
}

/// Rewrites every clause into exactly-3 clauses, preserving the number of
/// satisfying assignments. Input variables keep their indices.
pub fn qsat_to_e3sat(phi: &CnfFormula) -> Result<(CnfFormula, Exact3Provenance)> {
    if phi.m() == 0 {
        return Err(Error::EmptyInput("formula has no clauses"));
    }
    if let Some(i) = phi.clauses().iter().position(Vec::is_empty) {
        return Err(Error::EmptyClause(i));
    }
    let mut next_var = phi.n_vars();
    let mut fresh = |count: usize| {
        let r = next_var..next_var + count;
        next_var += count;
        r
    };
    let mut out: Vec<Vec<Lit>> = Vec::new();
    let mut clause_map = Vec::with_capacity(phi.m());
    let mut aux_vars = Vec::with_capacity(phi.m());
    for c in phi.clauses() {
        let start = out.len();
        let width = c.len();
        let aux = match width {
            1 => {
                let r = fresh(2);
                let (y, z) = (Lit::pos(r.start), Lit::pos(r.start + 1));
                out.extend(f_gadget(c[0].negate(), y, z)?);
                r
            }
            2 => {
                let r = fresh(3);
                let (w, y, z) = (Lit::pos(r.start), Lit::pos(r.start + 1), Lit::pos(r.start + 2));
                out.push(vec![c[0], c[1], w]);
                out.extend(f_gadget(w, y, z)?);
                r
            }
            3 => {
                out.push(c.clone());
                fresh(0)
            }
            _ => {
                // y^0..y^w then z
                let r = fresh(width + 2);
                let y = |i: usize| Lit::pos(r.start + i);
                let z = Lit::pos(r.start + width + 1);
                for i in 1..=width {
                    out.push(vec![y(i - 1), c[i - 1], y(i).negate()]);
                }
                for i in 1..=width {
                    out.push(vec![y(i - 1).negate(), y(i), z]);
                }
                for i in 1..=width {
                    for j in i + 1..=width {
                        out.push(vec![c[i - 1].negate(), y(j - 1), z]);
                    }
                }
                out.extend(f_gadget(y(0), y(width).negate(), z)?);
                r
            }
        };
        clause_map.push(start..out.len());
        aux_vars.push(aux);
    }
    let b = phi.occurrence_bound();
    let q = phi.max_width();
    let prov = Exact3Provenance {
        input_vars: phi.n_vars(),
        input_clauses: phi.m(),
        b,
        q,
        b_prime: (7 * b).max(4 * b * q * q),
        clause_map,
        aux_vars,
    };
    Ok((CnfFormula::new(next_var, out)?, prov))
}

/// The unique extension of a satisfying input assignment to the auxiliary
/// variables (all gadget variables false except the chain's switch suffix).
pub fn extend_assignment(phi: &CnfFormula, prov: &Exact3Provenance, x: u64) -> u64 {
    let mut out = x;
    for (c, aux) in phi.clauses().iter().zip(&prov.aux_vars) {
        if c.len() >= 4 {
            let width = c.len();
            let first_true = c.iter().position(|l| l.eval(x)).map_or(width, |i| i + 1);
            for i in first_true..=width {
                out |= 1 << (aux.start + i);
            }
        }
    }
    out
}
