//! Exhaustive matching and covering oracles on triple systems.

use super::budget::{Meter, SearchBudget};
use crate::error::{Error, Result};
use crate::reductions::TripleSystem;

struct Search<'a> {
    ts: &'a TripleSystem,
    incident: Vec<Vec<usize>>,
    covered: Vec<bool>,
    meter: Meter,
}

impl<'a> Search<'a> {
    fn new(ts: &'a TripleSystem, budget: &SearchBudget, what: &str) -> Self {
        let mut incident = vec![Vec::new(); ts.n_vertices()];
        for (i, t) in ts.triples().iter().enumerate() {
            for &v in t {
                incident[v].push(i);
            }
        }
        Self {
            ts,
            incident,
            covered: vec![false; ts.n_vertices()],
            meter: budget.meter(what),
        }
    }

    fn free(&self, t: usize) -> bool {
        self.ts.triples()[t].iter().all(|&v| !self.covered[v])
    }

    fn available(&self, v: usize) -> impl Iterator<Item = usize> + '_ {
        self.incident[v].iter().copied().filter(move |&t| self.free(t))
    }

    fn set(&mut self, t: usize, value: bool) {
        for &v in &self.ts.triples()[t] {
            self.covered[v] = value;
        }
    }

    fn count_perfect(&mut self, remaining: usize) -> Result<u64> {
        self.meter.tick()?;
        if remaining == 0 {
            return Ok(1);
        }
        let mut pick = None;
        let mut fewest = usize::MAX;
        for v in 0..self.covered.len() {
            if self.covered[v] {
                continue;
            }
            let d = self.available(v).count();
            if d < fewest {
                fewest = d;
                pick = Some(v);
                if d == 0 {
                    return Ok(0);
                }
            }
        }
        let v = pick.expect("uncovered vertex exists while remaining > 0");
        let options: Vec<usize> = self.available(v).collect();
        let mut total = 0;
        for t in options {
            self.set(t, true);
            total += self.count_perfect(remaining - 3)?;
            self.set(t, false);
        }
        Ok(total)
    }

    /// Enumerates matchings, visiting each exactly once: the lowest undecided
    /// vertex is either matched by one of its free triples or left exposed.
    /// `slack` bounds how many vertices may stay exposed; `visit` returns the new bound.
    fn enumerate(
        &mut self,
        from: usize,
        used: usize,
        slack: &mut usize,
        chosen: &mut Vec<usize>,
        visit: &mut dyn FnMut(&[usize]) -> usize,
    ) -> Result<()> {
        self.meter.tick()?;
        let mut v = from;
        while v < self.covered.len() && self.covered[v] {
            v += 1;
        }
        if v == self.covered.len() {
            *slack = visit(chosen).min(*slack);
            return Ok(());
        }
        let options: Vec<usize> = self.available(v).collect();
        for t in options {
            self.set(t, true);
            chosen.push(t);
            self.enumerate(v + 1, used, slack, chosen, visit)?;
            chosen.pop();
            self.set(t, false);
        }
        if used < *slack {
            // an exposed vertex is blocked for every later triple
            self.covered[v] = true;
            self.enumerate(v + 1, used + 1, slack, chosen, visit)?;
            self.covered[v] = false;
        }
        Ok(())
    }
}

/// Number of perfect matchings (0 when `|V|` is not a multiple of 3).
pub fn count_perfect_matchings(ts: &TripleSystem, budget: &SearchBudget) -> Result<u64> {
    if ts.target_size().is_none() {
        return Ok(0);
    }
    Search::new(ts, budget, "perfect matching").count_perfect(ts.n_vertices())
}

/// Every matching with at least `min_size` triples, as sorted triple-index lists.
pub fn matchings_at_least(ts: &TripleSystem, min_size: usize, budget: &SearchBudget) -> Result<Vec<Vec<usize>>> {
    let mut out = Vec::new();
    for_each_matching(ts, min_size, budget, |m| out.push(m.to_vec()))?;
    Ok(out)
}

/// Calls `visit` on every matching with at least `min_size` triples (sorted
/// triple indices) without collecting them.
pub fn for_each_matching(
    ts: &TripleSystem,
    min_size: usize,
    budget: &SearchBudget,
    mut visit: impl FnMut(&[usize]),
) -> Result<()> {
    let n = ts.n_vertices();
    let Some(mut slack) = n.checked_sub(3 * min_size) else {
        return Ok(());
    };
    let mut search = Search::new(ts, budget, "matching enumeration");
    let limit = slack;
    let mut buf = Vec::new();
    let mut each = |m: &[usize]| {
        buf.clear();
        buf.extend_from_slice(m);
        buf.sort_unstable();
        visit(&buf);
        limit
    };
    search.enumerate(0, 0, &mut slack, &mut Vec::new(), &mut each)
}

/// Largest number of pairwise disjoint triples.
pub fn max_matching(ts: &TripleSystem, budget: &SearchBudget) -> Result<usize> {
    let n = ts.n_vertices();
    let mut search = Search::new(ts, budget, "maximum matching");
    // tighten the permitted number of exposed vertices as better matchings appear
    let mut best = 0usize;
    let mut visit = |m: &[usize]| {
        if m.len() > best {
            best = m.len();
        }
        n - 3 * best
    };
    let mut slack = n;
    search.enumerate(0, 0, &mut slack, &mut Vec::new(), &mut visit)?;
    Ok(best)
}

/// Most vertices covered by `size` distinct triples.
pub fn max_cover(ts: &TripleSystem, size: usize, budget: &SearchBudget) -> Result<usize> {
    let triples = ts.triples();
    if size > triples.len() {
        return Err(Error::MalformedTripleSystem(format!(
            "cannot pick {size} distinct triples from {}",
            triples.len()
        )));
    }
    struct Cover<'a> {
        triples: &'a [[usize; 3]],
        mult: Vec<u32>,
        best: usize,
        meter: Meter,
    }
    impl Cover<'_> {
        fn rec(&mut self, i: usize, left: usize, covered: usize) -> Result<()> {
            self.meter.tick()?;
            if left == 0 {
                self.best = self.best.max(covered);
                return Ok(());
            }
            if self.triples.len() - i < left || covered + 3 * left <= self.best {
                return Ok(());
            }
            let t = self.triples[i];
            let gain = t.iter().filter(|&&v| self.mult[v] == 0).count();
            for &v in &t {
                self.mult[v] += 1;
            }
            self.rec(i + 1, left - 1, covered + gain)?;
            for &v in &t {
                self.mult[v] -= 1;
            }
            self.rec(i + 1, left, covered)
        }
    }
    let mut c = Cover {
        triples,
        mult: vec![0; ts.n_vertices()],
        best: 0,
        meter: budget.meter("maximum cover"),
    };
    c.rec(0, size, 0)?;
    Ok(c.best)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn b() -> SearchBudget {
        SearchBudget::default()
    }

    #[test]
    fn tiny_systems() {
        let one = TripleSystem::plain(3, vec![[0, 1, 2]]).unwrap();
        assert_eq!(count_perfect_matchings(&one, &b()).unwrap(), 1);
        assert_eq!(max_matching(&one, &b()).unwrap(), 1);
        let overlap = TripleSystem::plain(5, vec![[0, 1, 2], [2, 3, 4]]).unwrap();
        assert_eq!(max_matching(&overlap, &b()).unwrap(), 1);
        assert_eq!(count_perfect_matchings(&overlap, &b()).unwrap(), 0);
    }

    #[test]
    fn cover_counts() {
        let ts = TripleSystem::plain(6, vec![[0, 1, 2], [2, 3, 4]]).unwrap();
        assert_eq!(max_cover(&ts, 2, &b()).unwrap(), 5);
        let perfect = TripleSystem::plain(6, vec![[0, 1, 2], [3, 4, 5], [1, 2, 3]]).unwrap();
        assert_eq!(max_cover(&perfect, 2, &b()).unwrap(), 6);
    }

    #[test]
    fn enumeration_lists_each_matching_once() {
        // a 6-cycle of triples on 9 vertices
        let ts = TripleSystem::plain(9, vec![[0, 1, 2], [2, 3, 4], [4, 5, 6], [6, 7, 8], [8, 0, 3], [1, 5, 7]]).unwrap();
        let all = matchings_at_least(&ts, 0, &SearchBudget::unlimited()).unwrap();
        // brute force over subsets
        let mut expect = 0;
        for mask in 0u32..64 {
            let mut used = [false; 9];
            let mut ok = true;
            for t in 0..6 {
                if mask >> t & 1 == 1 {
                    for &v in &ts.triples()[t] {
                        ok &= !used[v];
                        used[v] = true;
                    }
                }
            }
            expect += usize::from(ok);
        }
        assert_eq!(all.len(), expect);
        let mut dedup = all.clone();
        dedup.sort();
        dedup.dedup();
        assert_eq!(dedup.len(), all.len());
    }

    #[test]
    fn budget_exceeded() {
        let ts = TripleSystem::plain(6, vec![[0, 1, 2], [3, 4, 5]]).unwrap();
        assert!(count_perfect_matchings(&ts, &SearchBudget::nodes(0)).unwrap_err().is_budget());
    }
}
