//! Exactly-3 CNF to triple systems: wheels of alternating tips, binary trees
//! joining the copies, and one small gadget per satisfying clause assignment.

use std::ops::Range;

use serde::Serialize;

use super::cnf::{CnfFormula, Lit};
use super::triples::{TripleSystem, TripleTag, VertexRole};
use crate::error::{Error, Result};

/// Smallest `4^p` with `4^p ≥ 6B + 1/2`.
pub fn wheel_copies(b: usize) -> (usize, u32) {
    let mut p = 0u32;
    while 2 * 4usize.pow(p) < 12 * b + 1 {
        p += 1;
    }
    (4usize.pow(p), p)
}

/// `2^{2⌊log₂(3B/2 + 1)⌋}`, the floor variant of the copy count.
pub fn wheel_copies_floor(b: usize) -> usize {
    let e = (3 * b + 2).ilog2() - 1;
    4usize.pow(e)
}

fn check_override(k: usize) -> Result<()> {
    let mut v = k;
    if v < 4 {
        return Err(Error::BadOverride(k));
    }
    while v % 4 == 0 {
        v /= 4;
    }
    if v != 1 {
        return Err(Error::BadOverride(k));
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct VariableSpan {
    pub var: usize,
    pub beta: usize,
    pub vertices: Range<usize>,
    pub triples: Range<usize>,
    /// `(u, ū)` root vertices per occurrence.
    pub roots: Vec<[usize; 2]>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ClauseSpan {
    pub clause: usize,
    pub vertices: Range<usize>,
    pub triples: Range<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct WheelProvenance {
    /// Occurrence bound of the input formula.
    pub b: usize,
    pub k: usize,
    pub k_override: Option<usize>,
    /// Copy count required by the full construction, `4^p`.
    pub k_required: usize,
    pub p: u32,
    /// Copy count of the floor formula, recorded for comparison.
    pub k_floor_formula: usize,
    /// Tree depth `log₂ K`.
    pub depth: u32,
    pub variables: Vec<VariableSpan>,
    pub clauses: Vec<ClauseSpan>,
    pub expected_vertices: usize,
    pub expected_triples: usize,
    pub expected_matching: usize,
    pub note: Option<String>,
}

#[derive(Default)]
struct Builder {
    roles: Vec<VertexRole>,
    triples: Vec<[usize; 3]>,
    tags: Vec<TripleTag>,
}

impl Builder {
    fn vertex(&mut self, role: VertexRole) -> usize {
        self.roles.push(role);
        self.roles.len() - 1
    }

    fn vertices(&mut self, role: VertexRole, count: usize) -> Vec<usize> {
        (0..count).map(|_| self.vertex(role)).collect()
    }

    fn triple(&mut self, t: [usize; 3], tag: TripleTag) {
        self.triples.push(t);
        self.tags.push(tag);
    }

    fn finish(self) -> TripleSystem {
        TripleSystem::new(self.roles, self.triples, self.tags).expect("gadget construction is well formed")
    }
}

/// Emits the `k` wheels and `2β` trees of one variable. Returns `(u, ū)` per occurrence.
fn emit_variable(bld: &mut Builder, var: usize, beta: usize, k: usize) -> Vec<[usize; 2]> {
    let ring = 2 * beta;
    // tips[copy][t]; even t is the positive tip of occurrence t/2
    let mut tips = Vec::with_capacity(k);
    for copy in 0..k {
        let hubs = bld.vertices(VertexRole::WheelHub, ring);
        let tip = bld.vertices(VertexRole::WheelTip, ring);
        for t in 0..ring {
            bld.triple([tip[t], hubs[t], hubs[(t + 1) % ring]], TripleTag::Wheel { var, copy, pos: t });
        }
        tips.push(tip);
    }
    let mut roots = Vec::with_capacity(beta);
    for b in 0..beta {
        let mut pair = [0; 2];
        for (side, positive) in [true, false].into_iter().enumerate() {
            // own[i] for heap index i in 1..k; own[1] is the root
            let mut own = vec![usize::MAX; k];
            own[1] = bld.vertex(VertexRole::Root);
            for slot in own.iter_mut().skip(2) {
                *slot = bld.vertex(VertexRole::TreeNode);
            }
            let port = |x: usize| {
                if x < k {
                    own[x]
                } else {
                    tips[x - k][2 * b + usize::from(!positive)]
                }
            };
            for i in 1..k {
                bld.triple(
                    [own[i], port(2 * i), port(2 * i + 1)],
                    TripleTag::Tree {
                        var,
                        occurrence: b,
                        positive,
                        level: i.ilog2() as usize + 1,
                        pos: i,
                    },
                );
            }
            pair[side] = own[1];
        }
        roots.push(pair);
    }
    roots
}

/// Emits the seven per-assignment gadgets of one clause. `roots[i]` is `(u, ū)`
/// for the clause's `i`-th literal.
fn emit_clause(bld: &mut Builder, clause: usize, lits: &[Lit], roots: [[usize; 2]; 3]) {
    for a in 0u8..8 {
        let value = |i: usize| a >> i & 1 == 1;
        if !(0..3).any(|i| value(i) == lits[i].positive) {
            continue;
        }
        let r = |i: usize| roots[i][usize::from(!value(i))];
        let f = bld.vertices(VertexRole::Clause, 3);
        bld.triple([f[0], f[1], f[2]], TripleTag::Clause { clause, assignment: a, slot: 0 });
        bld.triple([f[0], r(0), r(1)], TripleTag::Clause { clause, assignment: a, slot: 1 });
        bld.triple([f[1], f[2], r(2)], TripleTag::Clause { clause, assignment: a, slot: 2 });
    }
}

/// Builds the triple system whose perfect matchings correspond one-to-one to
/// satisfying assignments of `psi`.
pub fn e3sat_to_3dm(psi: &CnfFormula, k_override: Option<usize>) -> Result<(TripleSystem, WheelProvenance)> {
    for (i, c) in psi.clauses().iter().enumerate() {
        if c.len() != 3 {
            return Err(Error::NotExactly3Sat { clause: i, width: c.len() });
        }
    }
    if psi.m() == 0 {
        return Err(Error::EmptyInput("formula has no clauses"));
    }
    let occ = psi.occurrences();
    if let Some(v) = occ.iter().position(|&o| o == 0) {
        return Err(Error::UnusedVariable(v));
    }
    if let Some(k) = k_override {
        check_override(k)?;
    }
    let b = psi.occurrence_bound();
    let (k_required, p) = wheel_copies(b);
    let k = k_override.unwrap_or(k_required);
    let m = psi.m();

    let mut bld = Builder::default();
    let mut variables = Vec::with_capacity(psi.n_vars());
    for (var, &beta) in occ.iter().enumerate() {
        let (v0, t0) = (bld.roles.len(), bld.triples.len());
        let roots = emit_variable(&mut bld, var, beta, k);
        variables.push(VariableSpan {
            var,
            beta,
            vertices: v0..bld.roles.len(),
            triples: t0..bld.triples.len(),
            roots,
        });
    }
    let mut seen = vec![0usize; psi.n_vars()];
    let mut clauses = Vec::with_capacity(m);
    for (ci, c) in psi.clauses().iter().enumerate() {
        let mut roots = [[0; 2]; 3];
        for (i, l) in c.iter().enumerate() {
            roots[i] = variables[l.var].roots[seen[l.var]];
            seen[l.var] += 1;
        }
        let (v0, t0) = (bld.roles.len(), bld.triples.len());
        emit_clause(&mut bld, ci, c, roots);
        clauses.push(ClauseSpan {
            clause: ci,
            vertices: v0..bld.roles.len(),
            triples: t0..bld.triples.len(),
        });
    }
    let ts = bld.finish();
    let prov = WheelProvenance {
        b,
        k,
        k_override,
        k_required,
        p,
        k_floor_formula: wheel_copies_floor(b),
        depth: k.ilog2(),
        variables,
        clauses,
        expected_vertices: (18 * k + 15) * m,
        expected_triples: (12 * k + 15) * m,
        expected_matching: (6 * k + 5) * m,
        note: k_override
            .filter(|&o| o != k_required)
            .map(|o| format!("copy count {o} overrides the required {k_required}; stability constants assume the required value")),
    };
    Ok((ts, prov))
}

/// Whether a triple belongs to the matching that encodes `value` for its variable.
fn canonical_variable_triple(tag: &TripleTag, value: bool, depth: usize) -> Option<bool> {
    match *tag {
        TripleTag::Wheel { pos, .. } => Some((pos % 2 == 1) == value),
        TripleTag::Tree { positive, level, .. } => {
            let exposed_side = positive == value;
            Some(((depth - level) % 2 == 0) == exposed_side)
        }
        _ => None,
    }
}

/// The perfect matching encoding a satisfying assignment `x` (bitmask).
pub fn canonical_matching(psi: &CnfFormula, ts: &TripleSystem, prov: &WheelProvenance, x: u64) -> Vec<usize> {
    let depth = prov.depth as usize;
    let mut out = Vec::new();
    for (i, tag) in ts.tags().iter().enumerate() {
        let keep = match *tag {
            TripleTag::Wheel { var, .. } | TripleTag::Tree { var, .. } => {
                canonical_variable_triple(tag, x >> var & 1 == 1, depth).unwrap_or(false)
            }
            TripleTag::Clause { clause, assignment, slot } => {
                let lits = &psi.clauses()[clause];
                let actual = (0..3).fold(0u8, |acc, i| acc | (u8::from(x >> lits[i].var & 1 == 1) << i));
                (assignment == actual) == (slot != 0)
            }
            TripleTag::Plain => false,
        };
        if keep {
            out.push(i);
        }
    }
    out
}

/// The wheels and trees of a single variable with `beta` occurrences, with no
/// clause gadgets attached, and its two canonical matchings (false, true).
pub fn variable_gadget(beta: usize, k: usize) -> Result<(TripleSystem, [Vec<usize>; 2])> {
    check_override(k)?;
    if beta == 0 {
        return Err(Error::UnusedVariable(0));
    }
    let mut bld = Builder::default();
    emit_variable(&mut bld, 0, beta, k);
    let ts = bld.finish();
    let depth = k.ilog2() as usize;
    let pick = |value: bool| -> Vec<usize> {
        ts.tags()
            .iter()
            .enumerate()
            .filter(|(_, t)| canonical_variable_triple(t, value, depth) == Some(true))
            .map(|(i, _)| i)
            .collect()
    };
    let canon = [pick(false), pick(true)];
    Ok((ts, canon))
}

/// An isolated clause gadget: vertices `0..6` are the roots `(u₀, ū₀, u₁, ū₁, u₂, ū₂)`
/// followed by 21 fresh vertices.
pub fn clause_gadget(lits: [Lit; 3]) -> TripleSystem {
    let mut bld = Builder::default();
    let mut roots = [[0; 2]; 3];
    for r in &mut roots {
        *r = [bld.vertex(VertexRole::Root), bld.vertex(VertexRole::Root)];
    }
    emit_clause(&mut bld, 0, &lits, roots);
    bld.finish()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::reductions::cnf::cnf;

    #[test]
    fn copy_counts() {
        assert_eq!(wheel_copies(3), (64, 3));
        assert_eq!(wheel_copies(1), (16, 2));
        assert_eq!(wheel_copies(2), (16, 2));
        assert_eq!(wheel_copies_floor(3), 16);
    }

    #[test]
    fn overrides() {
        let psi = cnf(3, &[&[1, 2, 3]]).unwrap();
        for bad in [0, 1, 2, 8, 12, 32] {
            assert!(matches!(e3sat_to_3dm(&psi, Some(bad)), Err(Error::BadOverride(_))), "{bad}");
        }
        assert!(e3sat_to_3dm(&psi, Some(16)).is_ok());
    }

    #[test]
    fn sizes_for_one_clause() {
        let psi = cnf(3, &[&[1, -2, 3]]).unwrap();
        let (ts, prov) = e3sat_to_3dm(&psi, None).unwrap();
        assert_eq!(prov.k, 16);
        let (ts64, _) = e3sat_to_3dm(&psi, Some(64)).unwrap();
        assert_eq!(ts64.n_vertices(), 1167);
        assert_eq!(ts64.triples().len(), 783);
        assert_eq!(ts.n_vertices(), prov.expected_vertices);
        assert_eq!(ts.triples().len(), prov.expected_triples);
    }

    #[test]
    fn rejects_bad_formulas() {
        assert!(matches!(e3sat_to_3dm(&cnf(2, &[&[1, 2]]).unwrap(), None), Err(Error::NotExactly3Sat { .. })));
        assert!(matches!(e3sat_to_3dm(&cnf(4, &[&[1, 2, 3]]).unwrap(), None), Err(Error::UnusedVariable(3))));
    }

    #[test]
    fn canonical_matching_is_perfect() {
        let psi = cnf(4, &[&[1, -2, 3], &[-1, 2, 4]]).unwrap();
        let (ts, prov) = e3sat_to_3dm(&psi, Some(4)).unwrap();
        for x in 0u64..16 {
            if psi.unsatisfied_count(x) != 0 {
                continue;
            }
            let chosen = canonical_matching(&psi, &ts, &prov, x);
            assert_eq!(chosen.len(), prov.expected_matching);
            let mut covered = vec![false; ts.n_vertices()];
            for &t in &chosen {
                for &v in &ts.triples()[t] {
                    assert!(!covered[v], "vertex {v} covered twice for x={x:b}");
                    covered[v] = true;
                }
            }
            assert!(covered.iter().all(|&c| c));
        }
    }

    #[test]
    fn variable_gadget_canonical_sizes() {
        for beta in 1..=2 {
            let (ts, canon) = variable_gadget(beta, 4).unwrap();
            assert_eq!(ts.triples().len(), beta * (4 * 4 - 2));
            for c in &canon {
                assert_eq!(c.len(), beta * 7);
            }
        }
    }
}
