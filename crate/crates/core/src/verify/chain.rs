//! End-to-end verification of the reduction chain with per-stage checks.

use std::fmt::Write as _;
use std::time::Instant;

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::ToPrimitive;
use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::budget::SearchBudget;
use super::matching::{count_perfect_matchings, for_each_matching, max_matching};
use super::sat::{count_sat, measure_sat_stability};
use crate::combin::binomial;
use crate::error::{Error, Result};
use crate::exact::{format_rational, rational};
use crate::metric::{Cost, MetricInstance, Solution};
use crate::oracle::certify_stability_budgeted;
use crate::reductions::embed::{cost_from_cover, COVERED, UNCOVERED};
use crate::reductions::wheels::canonical_matching;
use crate::reductions::{e3sat_to_3dm, full_chain, CnfFormula, TripleSystem};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail,
    Inconclusive,
}

impl Verdict {
    /// 0 pass, 1 fail, 2 inconclusive.
    pub fn exit_code(self) -> i32 {
        match self {
            Verdict::Pass => 0,
            Verdict::Fail => 1,
            Verdict::Inconclusive => 2,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckStatus {
    Pass,
    Fail,
    /// A budget ran out before the check could finish.
    Inconclusive,
    /// The check does not apply to this input.
    NotApplicable,
}

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub stage: &'static str,
    pub name: String,
    /// The relation being checked, written out.
    pub formula: String,
    pub expected: String,
    pub actual: String,
    pub status: CheckStatus,
}

/// A measured quantity that is reported but never affects the verdict.
#[derive(Clone, Debug, Serialize)]
pub struct Measurement {
    pub stage: &'static str,
    pub name: String,
    pub value: Option<String>,
    pub note: Option<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct StageTiming {
    pub stage: &'static str,
    pub millis: u128,
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct ChainBudgets {
    /// Truth-table counting on the input and exactly-3 formulas.
    pub sat: SearchBudget,
    /// Perfect-matching counting.
    pub matching: SearchBudget,
    /// Optional exhaustive measurements (maximum matching, matching stability).
    pub measurement: SearchBudget,
    /// Enumerated k-subsets allowed for the stability certifier.
    pub certifier: u128,
}

impl Default for ChainBudgets {
    fn default() -> Self {
        Self {
            sat: SearchBudget::default(),
            matching: SearchBudget::default(),
            measurement: SearchBudget::nodes(2_000_000),
            certifier: 200_000,
        }
    }
}

impl ChainBudgets {
    /// One budget for the verdict-bearing searches; measurements stay capped
    /// at the default so they never dominate a run.
    pub fn all(budget: SearchBudget) -> Self {
        let d = Self::default();
        let cap = |x: Option<u64>, y: Option<u64>| match (x, y) {
            (Some(a), Some(b)) => Some(a.min(b)),
            (a, b) => a.or(b),
        };
        Self {
            sat: budget,
            matching: budget,
            measurement: SearchBudget {
                max_nodes: cap(budget.max_nodes, d.measurement.max_nodes),
                max_time: budget.max_time,
            },
            certifier: budget.max_nodes.map_or(d.certifier, |n| u128::from(n).min(d.certifier)),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ChainInput {
    pub n_vars: usize,
    pub m: usize,
    pub occurrence_bound: usize,
    pub max_width: usize,
    pub k_override: Option<usize>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ChainSizes {
    pub exact3_vars: usize,
    pub exact3_clauses: usize,
    pub wheel_copies: usize,
    pub vertices: usize,
    pub triples: usize,
    pub cover_size: usize,
    pub points: usize,
    pub centres: usize,
    pub k: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct ChainReport {
    pub input: ChainInput,
    pub budgets: ChainBudgets,
    pub sizes: ChainSizes,
    pub satisfying_assignments: Option<u64>,
    pub perfect_matchings: Option<u64>,
    /// Optimal k-means cost when it was determined exactly.
    pub optimal_cost: Option<u128>,
    /// Proven lower bound on the optimal k-means cost.
    pub cost_lower_bound: u128,
    pub checks: Vec<Check>,
    pub measurements: Vec<Measurement>,
    pub timings: Vec<StageTiming>,
    pub constants: crate::reductions::Constants,
    pub notes: Vec<String>,
    pub verdict: Verdict,
}

impl ChainReport {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Human-readable summary, one line per check and measurement.
    pub fn summary(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(
            s,
            "input: {} vars, {} clauses (B={}, Q={}); K={}",
            self.input.n_vars, self.input.m, self.input.occurrence_bound, self.input.max_width, self.sizes.wheel_copies
        );
        let _ = writeln!(
            s,
            "sizes: {} vertices, {} triples, {} points, {} centres, k={}",
            self.sizes.vertices, self.sizes.triples, self.sizes.points, self.sizes.centres, self.sizes.k
        );
        for c in &self.checks {
            let tag = match c.status {
                CheckStatus::Pass => "ok  ",
                CheckStatus::Fail => "FAIL",
                CheckStatus::Inconclusive => "??  ",
                CheckStatus::NotApplicable => "n/a ",
            };
            let _ = writeln!(
                s,
                "[{tag}] {:<9} {}: {} (expected {}, actual {})",
                c.stage, c.name, c.formula, c.expected, c.actual
            );
        }
        for m in &self.measurements {
            let _ = writeln!(
                s,
                "       {:<9} {} = {}{}",
                m.stage,
                m.name,
                m.value.as_deref().unwrap_or("-"),
                m.note.as_ref().map(|n| format!(" ({n})")).unwrap_or_default()
            );
        }
        for n in &self.notes {
            let _ = writeln!(s, "note: {n}");
        }
        let _ = writeln!(s, "verdict: {:?}", self.verdict);
        s
    }
}

struct Recorder {
    checks: Vec<Check>,
    measurements: Vec<Measurement>,
    timings: Vec<StageTiming>,
    clock: Instant,
}

impl Recorder {
    fn check(&mut self, stage: &'static str, name: &str, formula: &str, expected: impl ToString, actual: impl ToString, ok: bool) {
        self.checks.push(Check {
            stage,
            name: name.into(),
            formula: formula.into(),
            expected: expected.to_string(),
            actual: actual.to_string(),
            status: if ok { CheckStatus::Pass } else { CheckStatus::Fail },
        });
    }

    fn with_status(&mut self, stage: &'static str, name: &str, formula: &str, expected: impl ToString, actual: impl ToString, status: CheckStatus) {
        self.checks.push(Check {
            stage,
            name: name.into(),
            formula: formula.into(),
            expected: expected.to_string(),
            actual: actual.to_string(),
            status,
        });
    }

    fn measure(&mut self, stage: &'static str, name: &str, value: Option<String>, note: Option<String>) {
        self.measurements.push(Measurement { stage, name: name.into(), value, note });
    }

    fn lap(&mut self, stage: &'static str) {
        self.timings.push(StageTiming { stage, millis: self.clock.elapsed().as_millis() });
        self.clock = Instant::now();
    }
}

/// Splits a budget failure from real errors.
fn budgeted<T>(r: Result<T>) -> Result<std::result::Result<T, String>> {
    match r {
        Ok(v) => Ok(Ok(v)),
        Err(e) if e.is_budget() => Ok(Err(e.to_string())),
        Err(e) => Err(e),
    }
}

/// Stability of the unique perfect matching `optimum` among all matchings:
/// the smallest `(1 − |T|/|T*|) / HW(T*, T)` over matchings `T ≠ T*`, under
/// both normalizations of `HW`.
#[derive(Clone, Debug, Serialize)]
pub struct MatchingStability {
    /// `HW = |T* Δ T| / (2|T*|)`.
    pub over_optimum_size: Option<String>,
    /// `HW = |T* Δ T| / (2n)` with `3n` vertices.
    pub over_vertex_count: Option<String>,
    pub matchings_checked: usize,
}

pub fn measure_matching_stability(ts: &TripleSystem, optimum: &[usize], budget: &SearchBudget) -> Result<MatchingStability> {
    let star = optimum.len();
    let n = ts.n_vertices() / 3;
    let mut best_a: Option<BigRational> = None;
    let mut best_b: Option<BigRational> = None;
    let mut checked = 0;
    for_each_matching(ts, 0, budget, |m| {
        checked += 1;
        let common = m.iter().filter(|t| optimum.binary_search(t).is_ok()).count();
        let delta = (star - common) + (m.len() - common);
        if delta == 0 {
            return;
        }
        let deficit = rational(star as i64 - m.len() as i64, star as i64);
        let ra = &deficit / rational(delta as i64, 2 * star as i64);
        let rb = &deficit / rational(delta as i64, 2 * n as i64);
        if best_a.as_ref().is_none_or(|b| &ra < b) {
            best_a = Some(ra);
        }
        if best_b.as_ref().is_none_or(|b| &rb < b) {
            best_b = Some(rb);
        }
    })?;
    Ok(MatchingStability {
        over_optimum_size: best_a.as_ref().map(format_rational),
        over_vertex_count: best_b.as_ref().map(format_rational),
        matchings_checked: checked,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct AlphaVerdict {
    pub alpha: String,
    pub stable: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct StabilityMargin {
    pub verdicts: Vec<AlphaVerdict>,
    /// Largest tested factor certified stable.
    pub largest_stable: Option<String>,
}

/// Certifies each factor in `alphas` (tested in increasing order).
pub fn measure_kmeans_stability_margin(instance: &MetricInstance, alphas: &[BigRational], budget: u128) -> Result<StabilityMargin> {
    let mut sorted = alphas.to_vec();
    sorted.sort();
    sorted.dedup();
    let mut verdicts = Vec::with_capacity(sorted.len());
    let mut largest = None;
    for a in &sorted {
        let r = certify_stability_budgeted(instance, a, budget)?;
        if r.stable {
            largest = Some(format_rational(a));
        }
        verdicts.push(AlphaVerdict { alpha: format_rational(a), stable: r.stable });
    }
    Ok(StabilityMargin { verdicts, largest_stable: largest })
}

fn covered_by(ts: &TripleSystem, chosen: &[usize]) -> usize {
    let mut seen = vec![false; ts.n_vertices()];
    for &t in chosen {
        for &v in &ts.triples()[t] {
            seen[v] = true;
        }
    }
    seen.into_iter().filter(|&c| c).count()
}

const COST_IDENTITY_SAMPLES: u64 = 64;

/// Runs every stage on `phi` and checks the size, counting and cost relations
/// between them.
pub fn verify_chain(phi: &CnfFormula, k_override: Option<usize>, budgets: &ChainBudgets) -> Result<ChainReport> {
    let mut rec = Recorder {
        checks: Vec::new(),
        measurements: Vec::new(),
        timings: Vec::new(),
        clock: Instant::now(),
    };
    let chain = full_chain(phi, k_override)?;
    rec.lap("reduce");
    let psi = &chain.exact3;
    let ts = &chain.triples;
    let inst = &chain.instance;
    let prov = &chain.provenance;
    let (b, q) = (phi.occurrence_bound(), phi.max_width());
    let (n, m) = (phi.n_vars(), phi.m());
    let mut notes = Vec::new();

    // exactly-3 rewriting
    let widths_ok = psi.clauses().iter().all(|c| c.len() == 3);
    rec.check("exact3", "clause width", "every clause has exactly 3 literals", 3, psi.max_width(), widths_ok);
    let b_prime = prov.exact3.b_prime;
    rec.check(
        "exact3",
        "occurrence bound",
        "B(psi) <= max{7B, 4BQ^2}",
        format!("<= {b_prime}"),
        psi.occurrence_bound(),
        psi.occurrence_bound() <= b_prime,
    );
    let size_status = |ok: bool| match (q >= 2, ok) {
        (false, _) => CheckStatus::NotApplicable,
        (true, true) => CheckStatus::Pass,
        (true, false) => CheckStatus::Fail,
    };
    rec.with_status(
        "exact3",
        "variable bound",
        "n' <= 2QB*n (defined for Q >= 2)",
        format!("<= {}", 2 * q * b * n),
        psi.n_vars(),
        size_status(psi.n_vars() <= 2 * q * b * n),
    );
    rec.with_status(
        "exact3",
        "clause bound",
        "m' <= 3Q^2*m (defined for Q >= 2)",
        format!("<= {}", 3 * q * q * m),
        psi.m(),
        size_status(psi.m() <= 3 * q * q * m),
    );
    if q < 2 {
        notes.push("size bounds n' <= 2QBn and m' <= 3Q^2m do not apply to unit-clause inputs".into());
    }
    let sat_phi = budgeted(count_sat(phi, &budgets.sat))?;
    let sat_psi = budgeted(count_sat(psi, &budgets.sat))?;
    let mut satisfying = None;
    match (&sat_phi, &sat_psi) {
        (Ok(a), Ok(c)) => {
            satisfying = Some(a.count);
            rec.check("exact3", "parsimony", "#sat(phi) = #sat(psi)", a.count, c.count, a.count == c.count);
        }
        (Err(e), _) | (_, Err(e)) => {
            rec.with_status("exact3", "parsimony", "#sat(phi) = #sat(psi)", "-", e, CheckStatus::Inconclusive);
        }
    }
    for (name, f) in [("input stability", phi), ("exact3 stability", psi)] {
        let stage = if name.starts_with("input") { "input" } else { "exact3" };
        match budgeted(measure_sat_stability(f, &budgets.sat)) {
            Ok(Ok(s)) => rec.measure(stage, name, Some(s.value), None),
            Ok(Err(e)) => rec.measure(stage, name, None, Some(e)),
            Err(Error::NotUniquelySatisfiable { count }) => {
                rec.measure(stage, name, None, Some(format!("{count} satisfying assignments")))
            }
            Err(e) => return Err(e),
        }
    }
    rec.lap("exact3");

    // triple system
    let wp = &prov.wheels;
    let mp = psi.m();
    let kk = wp.k;
    rec.check(
        "matching",
        "vertex count",
        "|V| = (18K+15)m'",
        (18 * kk + 15) * mp,
        ts.n_vertices(),
        ts.n_vertices() == (18 * kk + 15) * mp,
    );
    rec.check(
        "matching",
        "triple count",
        "|T| = (12K+15)m'",
        (12 * kk + 15) * mp,
        ts.triples().len(),
        ts.triples().len() == (12 * kk + 15) * mp,
    );
    rec.check(
        "matching",
        "matching size",
        "|V|/3 = (6K+5)m'",
        (6 * kk + 5) * mp,
        ts.n_vertices() / 3,
        ts.target_size() == Some((6 * kk + 5) * mp),
    );
    rec.measure("matching", "degree bound", Some(ts.degree_bound().to_string()), None);
    if let Some(note) = &wp.note {
        notes.push(note.clone());
    }
    let pm = budgeted(count_perfect_matchings(ts, &budgets.matching))?;
    let mut perfect = None;
    match (&pm, &sat_psi) {
        (Ok(c), Ok(s)) => {
            perfect = Some(*c);
            rec.check("matching", "parsimony", "#perfect matchings = #sat(psi)", s.count, c, *c == s.count);
        }
        (Ok(c), Err(e)) => {
            perfect = Some(*c);
            rec.with_status("matching", "parsimony", "#perfect matchings = #sat(psi)", e, c, CheckStatus::Inconclusive);
        }
        (Err(e), _) => {
            rec.with_status("matching", "parsimony", "#perfect matchings = #sat(psi)", "-", e, CheckStatus::Inconclusive);
        }
    }
    let target = ts.n_vertices() / 3;
    let mut canonical = None;
    if let Ok(s) = &sat_psi {
        for &x in &s.assignments {
            let chosen = canonical_matching(psi, ts, wp, x);
            let ok = chosen.len() == target && covered_by(ts, &chosen) == ts.n_vertices();
            rec.check(
                "matching",
                "canonical matching",
                "satisfier encodes a perfect matching",
                format!("{target} disjoint triples"),
                format!("{} triples covering {} vertices", chosen.len(), covered_by(ts, &chosen)),
                ok,
            );
            canonical.get_or_insert(chosen);
        }
    }
    match budgeted(max_matching(ts, &budgets.measurement))? {
        Ok(mm) => {
            let ok = mm <= target && (mm == target) == perfect.is_some_and(|p| p > 0);
            rec.check(
                "matching",
                "maximum matching",
                "max matching <= (6K+5)m', equal iff a perfect matching exists",
                format!("<= {target}"),
                mm,
                ok,
            );
        }
        Err(e) => rec.measure("matching", "maximum matching", None, Some(format!("skipped: {e}"))),
    }
    match (&canonical, perfect) {
        (Some(opt), Some(1)) => match budgeted(measure_matching_stability(ts, opt, &budgets.measurement))? {
            Ok(st) => {
                rec.measure("matching", "matching stability |T*Δ T|/(2|T*|)", st.over_optimum_size, None);
                rec.measure("matching", "matching stability |T*Δ T|/(2n)", st.over_vertex_count, None);
            }
            Err(e) => rec.measure("matching", "matching stability", None, Some(format!("skipped: {e}"))),
        },
        _ => rec.measure("matching", "matching stability", None, Some("needs a unique perfect matching".into())),
    }
    rec.lap("matching");

    // covering stage is the identity on structure
    let (matching_stage, _) = e3sat_to_3dm(psi, k_override)?;
    let same = &matching_stage == ts;
    rec.check(
        "covering",
        "identity",
        "covering system equals the matching system",
        "equal",
        if same { "equal" } else { "different" },
        same,
    );
    let has_constants = prov.constants.contains_key("s2") && prov.constants.contains_key("gamma2");
    rec.check("covering", "constants", "s2 and gamma2 recorded", "present", has_constants, has_constants);
    rec.lap("covering");

    // k-means embedding
    let cover_n = target;
    rec.check("kmeans", "point count", "points = 3n", 3 * cover_n, inst.n_points(), inst.n_points() == 3 * cover_n);
    rec.check(
        "kmeans",
        "centre count",
        "centres = |T|",
        ts.triples().len(),
        inst.n_centres(),
        inst.n_centres() == ts.triples().len(),
    );
    rec.check("kmeans", "k", "k = n", cover_n, inst.k(), inst.k() == cover_n);
    let s2 = inst.scale() * inst.scale();
    let unit = s2.to_u64().unwrap_or(u64::MAX);
    let mut table_ok = true;
    for (c, row) in inst.sqdist().iter().enumerate() {
        let t = &ts.triples()[c];
        for (j, &d) in row.iter().enumerate() {
            let want = if t.contains(&j) { COVERED } else { UNCOVERED };
            table_ok &= BigUint::from(d) == BigUint::from(want) * &s2;
        }
    }
    rec.check(
        "kmeans",
        "distance table",
        "sqdist = 2 if the vertex is in the triple, else 4 (times scale^2)",
        format!("{{{}, {}}}", 2 * unit, 4 * unit),
        if table_ok { "matches" } else { "mismatch" },
        table_ok,
    );
    // cost(S) = 12n - 2 cov(S), checked on seeded random solutions
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut identity_ok = true;
    for _ in 0..COST_IDENTITY_SAMPLES {
        let mut pick = sample(&mut rng, inst.n_centres(), inst.k()).into_vec();
        pick.sort_unstable();
        let cost = inst.cost(&Solution::new(pick.clone(), inst.n_centres(), inst.k())?);
        identity_ok &= cost == Cost::Squared(cost_from_cover(cover_n, covered_by(ts, &pick)) * u128::from(unit));
    }
    rec.check(
        "kmeans",
        "cost identity",
        "cost(S) = 12n - 2*cov(S) on sampled solutions",
        format!("{COST_IDENTITY_SAMPLES} matches"),
        if identity_ok { "all match" } else { "mismatch" },
        identity_ok,
    );
    let lower = 6 * cover_n as u128;
    let mut optimal_cost = None;
    let mut cost_lower_bound = lower;
    match perfect {
        Some(p) if p > 0 => {
            if let Some(opt) = &canonical {
                let cost = inst.cost(&Solution::new(opt.clone(), inst.n_centres(), inst.k())?);
                let ok = cost == Cost::Squared(lower * u128::from(unit));
                rec.check("kmeans", "yes-case cost", "cost of the encoded cover = 6n", lower, cost.to_string(), ok);
                if ok {
                    optimal_cost = Some(lower);
                }
            }
            rec.check(
                "kmeans",
                "unique optimum",
                "#solutions of cost 6n = #perfect matchings = 1",
                1,
                p,
                p == 1,
            );
        }
        Some(_) => {
            cost_lower_bound = lower + 2;
            rec.check(
                "kmeans",
                "no-case bound",
                "no perfect matching => cov <= 3n-1 => opt >= 6n+2",
                format!(">= {}", lower + 2),
                format!(">= {}", cost_from_cover(cover_n, 3 * cover_n - 1)),
                identity_ok && cost_from_cover(cover_n, 3 * cover_n - 1) == lower + 2,
            );
        }
        None => rec.with_status(
            "kmeans",
            "optimum",
            "opt = 6n iff a perfect matching exists",
            "-",
            "matching count unavailable",
            CheckStatus::Inconclusive,
        ),
    }
    let subsets = binomial(inst.n_centres(), inst.k());
    if subsets <= budgets.certifier {
        let alphas = [rational(21, 20), rational(11, 10), rational(3, 2), rational(2, 1)];
        match measure_kmeans_stability_margin(inst, &alphas, budgets.certifier) {
            Ok(mg) => rec.measure("kmeans", "largest certified stability factor", mg.largest_stable, None),
            Err(e) => rec.measure("kmeans", "largest certified stability factor", None, Some(e.to_string())),
        }
    } else {
        rec.measure(
            "kmeans",
            "largest certified stability factor",
            None,
            Some(format!("skipped: C({}, {}) solutions exceed the certifier budget", inst.n_centres(), inst.k())),
        );
    }
    rec.lap("kmeans");

    let verdict = if rec.checks.iter().any(|c| c.status == CheckStatus::Fail) {
        Verdict::Fail
    } else if rec.checks.iter().any(|c| c.status == CheckStatus::Inconclusive) {
        Verdict::Inconclusive
    } else {
        Verdict::Pass
    };
    Ok(ChainReport {
        input: ChainInput { n_vars: n, m, occurrence_bound: b, max_width: q, k_override },
        budgets: *budgets,
        sizes: ChainSizes {
            exact3_vars: psi.n_vars(),
            exact3_clauses: psi.m(),
            wheel_copies: kk,
            vertices: ts.n_vertices(),
            triples: ts.triples().len(),
            cover_size: cover_n,
            points: inst.n_points(),
            centres: inst.n_centres(),
            k: inst.k(),
        },
        satisfying_assignments: satisfying,
        perfect_matchings: perfect,
        optimal_cost,
        cost_lower_bound,
        checks: rec.checks,
        measurements: rec.measurements,
        timings: rec.timings,
        constants: prov.constants.clone(),
        notes,
        verdict,
    })
}
