//! CNF formulas with DIMACS I/O.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A literal over a 0-based variable index.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Lit {
    pub var: usize,
    pub positive: bool,
}

impl Lit {
    pub fn pos(var: usize) -> Self {
        Self { var, positive: true }
    }

    pub fn neg(var: usize) -> Self {
        Self { var, positive: false }
    }

    pub fn negate(self) -> Self {
        Self { var: self.var, positive: !self.positive }
    }

    /// Value under an assignment given as a bitmask (bit `var` = true).
    pub fn eval(self, assignment: u64) -> bool {
        (assignment >> self.var & 1 == 1) == self.positive
    }

    /// Signed 1-based DIMACS form.
    pub fn to_dimacs(self) -> i64 {
        let v = self.var as i64 + 1;
        if self.positive { v } else { -v }
    }

    pub fn from_dimacs(v: i64) -> Self {
        let var = v.unsigned_abs() as usize - 1;
        if v > 0 { Self::pos(var) } else { Self::neg(var) }
    }
}

impl fmt::Display for Lit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.positive {
            write!(f, "x{}", self.var)
        } else {
            write!(f, "¬x{}", self.var)
        }
    }
}

/// A CNF formula; each clause mentions each variable at most once.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CnfFormula {
    n_vars: usize,
    clauses: Vec<Vec<Lit>>,
}

impl CnfFormula {
    pub fn new(n_vars: usize, clauses: Vec<Vec<Lit>>) -> Result<Self> {
        for clause in &clauses {
            for (i, l) in clause.iter().enumerate() {
                if l.var >= n_vars {
                    return Err(Error::Parse(format!("literal on variable {} but only {n_vars} variables", l.var + 1)));
                }
                if clause[..i].iter().any(|o| o.var == l.var) {
                    return Err(Error::RepeatedVariable(l.var));
                }
            }
        }
        Ok(Self { n_vars, clauses })
    }

    pub fn n_vars(&self) -> usize {
        self.n_vars
    }

    pub fn m(&self) -> usize {
        self.clauses.len()
    }

    pub fn clauses(&self) -> &[Vec<Lit>] {
        &self.clauses
    }

    /// Number of clauses mentioning each variable (either sign).
    pub fn occurrences(&self) -> Vec<usize> {
        let mut occ = vec![0; self.n_vars];
        for c in &self.clauses {
            for l in c {
                occ[l.var] += 1;
            }
        }
        occ
    }

    /// Largest occurrence count `B`.
    pub fn occurrence_bound(&self) -> usize {
        self.occurrences().into_iter().max().unwrap_or(0)
    }

    /// Largest clause width `Q`.
    pub fn max_width(&self) -> usize {
        self.clauses.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn clause_satisfied(clause: &[Lit], assignment: u64) -> bool {
        clause.iter().any(|l| l.eval(assignment))
    }

    pub fn unsatisfied_count(&self, assignment: u64) -> usize {
        self.clauses.iter().filter(|c| !Self::clause_satisfied(c, assignment)).count()
    }

    pub fn from_dimacs(text: &str) -> Result<Self> {
        let mut header: Option<(usize, usize)> = None;
        let mut clauses = Vec::new();
        let mut current: Vec<Lit> = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('c') {
                continue;
            }
            if line.starts_with('%') {
                break;
            }
            if let Some(rest) = line.strip_prefix('p') {
                let parts: Vec<&str> = rest.split_whitespace().collect();
                if parts.len() != 3 || parts[0] != "cnf" {
                    return Err(Error::Parse(format!("line {}: bad header {line:?}", lineno + 1)));
                }
                let parse = |s: &str| s.parse::<usize>().map_err(|e| Error::Parse(format!("line {}: {e}", lineno + 1)));
                header = Some((parse(parts[1])?, parse(parts[2])?));
                continue;
            }
            let Some((n_vars, _)) = header else {
                return Err(Error::Parse(format!("line {}: clause before header", lineno + 1)));
            };
            for tok in line.split_whitespace() {
                let v: i64 = tok.parse().map_err(|e| Error::Parse(format!("line {}: {tok:?}: {e}", lineno + 1)))?;
                if v == 0 {
                    clauses.push(std::mem::take(&mut current));
                } else {
                    if v.unsigned_abs() as usize > n_vars {
                        return Err(Error::Parse(format!("line {}: variable {v} exceeds header", lineno + 1)));
                    }
                    current.push(Lit::from_dimacs(v));
                }
            }
        }
        let Some((n_vars, m)) = header else {
            return Err(Error::Parse("missing 'p cnf' header".into()));
        };
        if !current.is_empty() {
            clauses.push(current);
        }
        if clauses.len() != m {
            return Err(Error::Parse(format!("header declares {m} clauses, found {}", clauses.len())));
        }
        Self::new(n_vars, clauses)
    }

    pub fn to_dimacs(&self) -> String {
        let mut out = format!("p cnf {} {}\n", self.n_vars, self.clauses.len());
        for c in &self.clauses {
            for l in c {
                out.push_str(&l.to_dimacs().to_string());
                out.push(' ');
            }
            out.push_str("0\n");
        }
        out
    }
}

/// Shorthand for tests and examples: clauses as signed 1-based integers.
pub fn cnf(n_vars: usize, clauses: &[&[i64]]) -> Result<CnfFormula> {
    CnfFormula::new(
        n_vars,
        clauses.iter().map(|c| c.iter().map(|&v| Lit::from_dimacs(v)).collect()).collect(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dimacs_round_trip() {
        let text = "c demo\np cnf 3 2\n1 -2 0\n2 3\n-1 0\n";
        let f = CnfFormula::from_dimacs(text).unwrap();
        assert_eq!(f.m(), 2);
        assert_eq!(f.clauses()[1], vec![Lit::pos(1), Lit::pos(2), Lit::neg(0)]);
        assert_eq!(CnfFormula::from_dimacs(&f.to_dimacs()).unwrap(), f);
        assert_eq!(f.occurrence_bound(), 2);
        assert_eq!(f.max_width(), 3);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(cnf(2, &[&[1, -1]]), Err(Error::RepeatedVariable(0))));
        assert!(CnfFormula::from_dimacs("1 2 0\n").is_err());
        assert!(CnfFormula::from_dimacs("p cnf 1 1\n2 0\n").is_err());
        assert!(CnfFormula::from_dimacs("p cnf 2 2\n1 0\n").is_err());
    }

    #[test]
    fn evaluation() {
        let f = cnf(2, &[&[1, 2], &[-1]]).unwrap();
        assert_eq!(f.unsatisfied_count(0b00), 1);
        assert_eq!(f.unsatisfied_count(0b10), 0);
        assert_eq!(f.unsatisfied_count(0b01), 1);
    }
}
