//! Truth-table SAT oracles.

use num_bigint::BigInt;
use num_rational::BigRational;
use rayon::prelude::*;
use serde::Serialize;

use super::budget::SearchBudget;
use crate::error::{Error, Result};
use crate::reductions::CnfFormula;

/// Largest variable count handled by the bitmask enumerators.
pub const MAX_VARS: usize = 40;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SatCount {
    pub count: u64,
    /// Satisfying assignments as bitmasks (bit `v` = variable `v` true), ascending.
    pub assignments: Vec<u64>,
}

/// Clauses as (positive mask, negative mask).
fn masks(phi: &CnfFormula) -> Vec<(u64, u64)> {
    phi.clauses()
        .iter()
        .map(|c| {
            c.iter().fold((0u64, 0u64), |(p, n), l| {
                if l.positive { (p | 1 << l.var, n) } else { (p, n | 1 << l.var) }
            })
        })
        .collect()
}

fn unsat(masks: &[(u64, u64)], x: u64) -> usize {
    masks.iter().filter(|&&(p, n)| x & p == 0 && !x & n == 0).count()
}

fn admit(phi: &CnfFormula, budget: &SearchBudget) -> Result<()> {
    if phi.n_vars() > MAX_VARS {
        return Err(Error::budget(format!("truth table over {} variables", phi.n_vars()), 1u128 << MAX_VARS));
    }
    budget.admit(&format!("truth table over {} variables", phi.n_vars()), 1u128 << phi.n_vars())
}

pub fn count_sat(phi: &CnfFormula, budget: &SearchBudget) -> Result<SatCount> {
    admit(phi, budget)?;
    let ms = masks(phi);
    let assignments: Vec<u64> = (0u64..1 << phi.n_vars())
        .into_par_iter()
        .filter(|&x| unsat(&ms, x) == 0)
        .collect();
    Ok(SatCount {
        count: assignments.len() as u64,
        assignments,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SatStability {
    /// `min_x (unsat(x)/m) / (HW(x, x*)/n)` over `x ≠ x*`.
    pub value: String,
    #[serde(skip)]
    pub exact: BigRational,
    pub satisfier: u64,
    /// An assignment attaining the minimum.
    pub witness: u64,
}

/// Exact stability of a uniquely satisfiable formula.
pub fn measure_sat_stability(phi: &CnfFormula, budget: &SearchBudget) -> Result<SatStability> {
    let sat = count_sat(phi, budget)?;
    if sat.count != 1 {
        return Err(Error::NotUniquelySatisfiable { count: sat.count });
    }
    let star = sat.assignments[0];
    let ms = masks(phi);
    if phi.n_vars() == 0 || phi.m() == 0 {
        return Err(Error::EmptyInput("stability needs variables and clauses"));
    }
    // ratio unsat·n / (m·hw); compare unsat/hw as fractions
    let best = (0u64..1 << phi.n_vars())
        .into_par_iter()
        .filter(|&x| x != star)
        .map(|x| (unsat(&ms, x) as u64, (x ^ star).count_ones() as u64, x))
        .min_by(|a, b| (a.0 * b.1).cmp(&(b.0 * a.1)).then(a.2.cmp(&b.2)))
        .expect("at least two assignments exist");
    let exact = BigRational::new(
        BigInt::from(best.0) * BigInt::from(phi.n_vars()),
        BigInt::from(phi.m() as u64) * BigInt::from(best.1),
    );
    Ok(SatStability {
        value: crate::exact::format_rational(&exact),
        exact,
        satisfier: star,
        witness: best.2,
    })
}
