//! Brute-force ground truth: global optima, Ψ, the nearly-good test and an
//! exact α-stability certifier with randomized and grid cross-checks.

use std::ops::{Add, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::combin::{binomial, k_subsets};
use crate::error::{Error, Result};
use crate::exact::{format_rational, square_free_split, RootSum};
use crate::local_search::SearchTrace;
use crate::metric::{Cost, MetricInstance, Objective, Solution};

/// Default cap on `C(|centres|, k)` for exhaustive enumeration.
pub const DEFAULT_ENUMERATION_BUDGET: u128 = 2_000_000;

/// Denominator of the sampled stretch factors `1 + (α−1)·u/U`.
const SAMPLE_RESOLUTION: u64 = 1 << 20;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Optimum {
    pub optima: Vec<Solution>,
    pub cost: Cost,
}

impl Optimum {
    pub fn unique(&self) -> Option<&Solution> {
        (self.optima.len() == 1).then(|| &self.optima[0])
    }
}

fn all_solutions(instance: &MetricInstance, budget: u128) -> Result<Vec<Solution>> {
    let count = binomial(instance.n_centres(), instance.k());
    if count > budget {
        return Err(Error::budget(
            format!("C({}, {}) solutions to enumerate", instance.n_centres(), instance.k()),
            budget,
        ));
    }
    Ok(k_subsets(instance.n_centres(), instance.k()).map(Solution::from_sorted).collect())
}

pub fn brute_force_optimum(instance: &MetricInstance) -> Result<Optimum> {
    brute_force_optimum_budgeted(instance, DEFAULT_ENUMERATION_BUDGET)
}

/// Every minimum-cost k-subset, in lexicographic order.
pub fn brute_force_optimum_budgeted(instance: &MetricInstance, budget: u128) -> Result<Optimum> {
    let sols = all_solutions(instance, budget)?;
    let costs: Vec<Cost> = sols.par_iter().map(|s| instance.cost(s)).collect();
    let best = costs.iter().min().expect("at least one solution").clone();
    let optima = sols
        .into_iter()
        .zip(&costs)
        .filter(|(_, c)| **c == best)
        .map(|(s, _)| s)
        .collect();
    Ok(Optimum { optima, cost: best })
}

/// Connection cost of points served by `S∖O` in `S` and by `O∖S` in `O`.
pub fn psi(instance: &MetricInstance, s: &Solution, o: &Solution) -> Cost {
    let mut total = Cost::Squared(0);
    for j in 0..instance.n_points() {
        let si = instance.nearest(j, s.indices());
        let oi = instance.nearest(j, o.indices());
        if !o.contains(si) && !s.contains(oi) {
            total = total + instance.pair_cost(si, j) + instance.pair_cost(oi, j);
        }
    }
    total
}

/// `cost(S) ≤ cost(O) + 2ε·Ψ(S)`, exactly.
pub fn is_nearly_good(instance: &MetricInstance, s: &Solution, o: &Solution, eps: &BigRational) -> bool {
    let two_eps = eps * BigRational::from_integer(BigInt::from(2));
    let rhs = instance.cost(o).to_root_sum() + psi(instance, s, o).to_root_sum().scale(&two_eps);
    instance.cost(s).to_root_sum() <= rhs
}

/// Records the first iterate of `trace` that is nearly good against `optimum`.
pub fn annotate_nearly_good(instance: &MetricInstance, trace: &mut SearchTrace, optimum: &Solution, eps: &BigRational) {
    trace.first_nearly_good_index = trace
        .iterates
        .iter()
        .position(|e| is_nearly_good(instance, &e.centre_indices, optimum, eps));
}

/// `ε` with `1 + 6ε = (1 + ε')²`.
pub fn eps_from_eps_prime(eps_prime: &BigRational) -> BigRational {
    let one = BigRational::one();
    let a = &one + eps_prime;
    eps_from_alpha_squared(&(&a * &a))
}

/// `ε = (α² − 1)/6`, for stretch factors whose square is rational.
pub fn eps_from_alpha_squared(alpha_squared: &BigRational) -> BigRational {
    (alpha_squared - BigRational::one()) / BigRational::from_integer(BigInt::from(6))
}

/// Exact scalar used by the certifier: machine integers when they fit,
/// sums of square roots otherwise.
trait Scalar: Clone + Ord + Send + Sync {
    fn zero() -> Self;
    fn plus(&self, other: &Self) -> Self;
    fn minus(&self, other: &Self) -> Self;
    fn times(&self, factor: u64) -> Self;
    fn into_root_sum(self) -> RootSum;
}

impl Scalar for i128 {
    fn zero() -> Self {
        0
    }
    fn plus(&self, other: &Self) -> Self {
        self + other
    }
    fn minus(&self, other: &Self) -> Self {
        self - other
    }
    fn times(&self, factor: u64) -> Self {
        self * factor as i128
    }
    fn into_root_sum(self) -> RootSum {
        RootSum::from_integer(self)
    }
}

impl Scalar for RootSum {
    fn zero() -> Self {
        RootSum::zero()
    }
    fn plus(&self, other: &Self) -> Self {
        self.add(other)
    }
    fn minus(&self, other: &Self) -> Self {
        self.sub(other)
    }
    fn times(&self, factor: u64) -> Self {
        self.scale(&BigRational::from_integer(BigInt::from(factor)))
    }
    fn into_root_sum(self) -> RootSum {
        self
    }
}

/// Largest magnitude kept in `i128` tables, leaving room for sums.
const I128_HEADROOM: u128 = 1 << 100;

/// Per-pair connection costs, stretched by a rational factor `num/den` applied
/// to the distance, expressed in units where the unstretched factor is `den`.
enum Table {
    Int(Vec<Vec<i128>>),
    Root(Vec<Vec<RootSum>>),
}

fn scaled_table(instance: &MetricInstance, factor: &BigInt) -> Table {
    let rows = instance.sqdist();
    match instance.objective() {
        Objective::Means => {
            let f2 = factor * factor;
            let ints: Option<Vec<Vec<i128>>> = rows
                .iter()
                .map(|row| {
                    row.iter()
                        .map(|&d| {
                            let v = &f2 * BigInt::from(d);
                            v.to_u128().filter(|&x| x <= I128_HEADROOM).map(|x| x as i128)
                        })
                        .collect()
                })
                .collect();
            match ints {
                Some(t) => Table::Int(t),
                None => Table::Root(
                    rows.iter()
                        .map(|row| {
                            row.iter()
                                .map(|&d| RootSum::from_integer(&f2 * BigInt::from(d)))
                                .collect()
                        })
                        .collect(),
                ),
            }
        }
        Objective::Median => {
            let coef = BigRational::from_integer(factor.clone());
            Table::Root(
                rows.iter()
                    .map(|row| {
                        row.iter()
                            .map(|&d| {
                                let (s, r) = square_free_split(d);
                                let mut v = RootSum::zero();
                                v.add_split(&coef, s, r);
                                v
                            })
                            .collect()
                    })
                    .collect(),
            )
        }
    }
}

fn min_over<T: Scalar>(table: &[Vec<T>], centres: &[usize], j: usize) -> Option<T> {
    centres.iter().map(|&i| &table[i][j]).min().cloned()
}

fn capped<T: Scalar>(x: &T, cap: &Option<T>) -> T {
    match cap {
        Some(m) if m < x => m.clone(),
        _ => x.clone(),
    }
}

/// Minimum over admissible perturbations of `cost'(S) − cost'(O)`, with the
/// points whose shared centres the adversary stretches.
fn extremal_margin<T: Scalar>(base: &[Vec<T>], stretched: &[Vec<T>], s: &Solution, o: &Solution) -> (T, Vec<usize>) {
    let only_s: Vec<usize> = s.indices().iter().copied().filter(|&i| !o.contains(i)).collect();
    let only_o: Vec<usize> = o.indices().iter().copied().filter(|&i| !s.contains(i)).collect();
    let shared: Vec<usize> = s.indices().iter().copied().filter(|&i| o.contains(i)).collect();
    let n = base[0].len();
    let mut total = T::zero();
    let mut stretched_points = Vec::new();
    for j in 0..n {
        let a = min_over(base, &only_s, j).expect("S differs from O");
        let b = min_over(stretched, &only_o, j).expect("O differs from S");
        let lo = min_over(base, &shared, j);
        let hi = min_over(stretched, &shared, j);
        let f_lo = capped(&a, &lo).minus(&capped(&b, &lo));
        let f_hi = capped(&a, &hi).minus(&capped(&b, &hi));
        if f_hi < f_lo {
            total = total.plus(&f_hi);
            stretched_points.push(j);
        } else {
            total = total.plus(&f_lo);
        }
    }
    (total, stretched_points)
}

/// A (centre, point) pair whose distance the witness stretches by α.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct StretchedPair {
    pub centre: usize,
    pub point: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct StabilityReport {
    /// Distance stretch bound, as `p/q`.
    pub alpha: String,
    pub optimal_cost: Cost,
    pub optima_count: usize,
    pub unique_optimum: Option<Solution>,
    pub stable: bool,
    /// Smallest (lexicographic) S whose extremal margin is ≤ 0.
    pub violating_solution: Option<Solution>,
    /// `cost'(S) − cost'(O)` under the witness perturbation.
    pub violating_margin: Option<String>,
    /// Smallest extremal margin over all S ≠ O.
    pub min_margin: Option<String>,
    pub witness: Vec<StretchedPair>,
    pub solutions_checked: usize,
}

fn alpha_parts(alpha: &BigRational) -> Result<(BigInt, BigInt)> {
    if *alpha <= BigRational::one() {
        return Err(Error::InvalidAlpha(format_rational(alpha)));
    }
    Ok((alpha.numer().clone(), alpha.denom().clone()))
}

/// Units of certifier tables relative to true costs.
fn unit_divisor(instance: &MetricInstance, q: &BigInt) -> BigRational {
    match instance.objective() {
        Objective::Means => BigRational::from_integer(q * q),
        Objective::Median => BigRational::from_integer(q.clone()),
    }
}

pub fn certify_stability(instance: &MetricInstance, alpha: &BigRational) -> Result<StabilityReport> {
    certify_stability_budgeted(instance, alpha, DEFAULT_ENUMERATION_BUDGET)
}

pub fn certify_stability_budgeted(
    instance: &MetricInstance,
    alpha: &BigRational,
    budget: u128,
) -> Result<StabilityReport> {
    let (p, q) = alpha_parts(alpha)?;
    let optimum = brute_force_optimum_budgeted(instance, budget)?;
    let sols = all_solutions(instance, budget)?;
    let mut report = StabilityReport {
        alpha: format_rational(alpha),
        optimal_cost: optimum.cost.clone(),
        optima_count: optimum.optima.len(),
        unique_optimum: optimum.unique().cloned(),
        stable: false,
        violating_solution: None,
        violating_margin: None,
        min_margin: None,
        witness: Vec::new(),
        solutions_checked: sols.len(),
    };
    let Some(o) = optimum.unique().cloned() else {
        return Ok(report);
    };
    let unit = unit_divisor(instance, &q).recip();
    let scan = match (scaled_table(instance, &q), scaled_table(instance, &p)) {
        (Table::Int(b), Table::Int(s)) => scan_margins(&b, &s, &sols, &o),
        (b, s) => scan_margins(&to_root(b), &to_root(s), &sols, &o),
    };
    report.min_margin = scan.min.map(|m| m.scale(&unit).to_string());
    match scan.violation {
        Some((s, margin, points)) => {
            let mut witness = Vec::new();
            for &i in o.indices() {
                if !s.contains(i) {
                    witness.extend((0..instance.n_points()).map(|j| StretchedPair { centre: i, point: j }));
                } else {
                    witness.extend(points.iter().map(|&j| StretchedPair { centre: i, point: j }));
                }
            }
            witness.sort();
            report.violating_margin = Some(margin.scale(&unit).to_string());
            report.violating_solution = Some(s);
            report.witness = witness;
        }
        None => report.stable = true,
    }
    Ok(report)
}

fn to_root(t: Table) -> Vec<Vec<RootSum>> {
    match t {
        Table::Int(rows) => rows
            .into_iter()
            .map(|r| r.into_iter().map(RootSum::from_integer).collect())
            .collect(),
        Table::Root(rows) => rows,
    }
}

struct Scan {
    min: Option<RootSum>,
    violation: Option<(Solution, RootSum, Vec<usize>)>,
}

fn scan_margins<T: Scalar>(base: &[Vec<T>], stretched: &[Vec<T>], sols: &[Solution], o: &Solution) -> Scan {
    let margins: Vec<Option<(T, Vec<usize>)>> = sols
        .par_iter()
        .map(|s| (s != o).then(|| extremal_margin(base, stretched, s, o)))
        .collect();
    let mut min: Option<T> = None;
    let mut violation = None;
    for (s, m) in sols.iter().zip(margins) {
        let Some((margin, points)) = m else { continue };
        if min.as_ref().is_none_or(|cur| margin < *cur) {
            min = Some(margin.clone());
        }
        if violation.is_none() && margin <= T::zero() {
            violation = Some((s.clone(), margin.into_root_sum(), points));
        }
    }
    Scan {
        min: min.map(Scalar::into_root_sum),
        violation,
    }
}

/// Perturbed cost of an index set under a full table.
fn table_cost<T: Scalar>(table: &[Vec<T>], open: &[usize]) -> T {
    let n = table[0].len();
    let mut total = T::zero();
    for j in 0..n {
        total = total.plus(&min_over(table, open, j).expect("open set is non-empty"));
    }
    total
}

/// Applies the report's witness and checks `cost'(S) ≤ cost'(O)`.
pub fn replay_witness(instance: &MetricInstance, report: &StabilityReport) -> Result<bool> {
    let (Some(o), Some(s)) = (&report.unique_optimum, &report.violating_solution) else {
        return Ok(false);
    };
    let alpha = crate::exact::parse_rational(&report.alpha)?;
    let (p, q) = alpha_parts(&alpha)?;
    let mut table = to_root(scaled_table(instance, &q));
    let stretched = to_root(scaled_table(instance, &p));
    for w in &report.witness {
        table[w.centre][w.point] = stretched[w.centre][w.point].clone();
    }
    Ok(table_cost(&table, s.indices()) <= table_cost(&table, o.indices()))
}

/// Exhaustive check over every per-pair choice of factor 1 or α.
///
/// Returns `true` iff a unique base optimum stays strictly cheapest at every
/// grid point. Requires `|centres|·|points| ≤ max_pairs`.
pub fn grid_certify(instance: &MetricInstance, alpha: &BigRational, max_pairs: usize) -> Result<bool> {
    let (p, q) = alpha_parts(alpha)?;
    let (m, n) = (instance.n_centres(), instance.n_points());
    if m * n > max_pairs || m * n >= 63 {
        return Err(Error::budget("grid of per-pair extremes", max_pairs as u128));
    }
    let optimum = brute_force_optimum(instance)?;
    let Some(o) = optimum.unique().cloned() else {
        return Ok(false);
    };
    let sols = all_solutions(instance, DEFAULT_ENUMERATION_BUDGET)?;
    let base = to_root(scaled_table(instance, &q));
    let stretched = to_root(scaled_table(instance, &p));
    let violated = (0u64..1 << (m * n)).into_par_iter().any(|mask| {
        let table: Vec<Vec<RootSum>> = (0..m)
            .map(|i| {
                (0..n)
                    .map(|j| {
                        if mask >> (i * n + j) & 1 == 1 {
                            stretched[i][j].clone()
                        } else {
                            base[i][j].clone()
                        }
                    })
                    .collect()
            })
            .collect();
        let co = table_cost(&table, o.indices());
        sols.iter().any(|s| *s != o && table_cost(&table, s.indices()) <= co)
    });
    Ok(!violated)
}

/// Outcome of random perturbation sampling against the certifier.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct SampleAudit {
    pub trials: usize,
    /// Samples where some S ≠ O was at least as cheap as O.
    pub optimum_lost: usize,
    /// Samples where a perturbed cost fell below its unperturbed cost.
    pub monotonicity_violations: usize,
    /// Samples where `cost'(S) − cost'(O)` fell below the extremal margin.
    pub dominance_violations: usize,
    /// True when the certifier said stable but a sample dethroned O.
    pub contradicts_certifier: bool,
}

impl SampleAudit {
    pub fn clean(&self) -> bool {
        self.monotonicity_violations == 0 && self.dominance_violations == 0 && !self.contradicts_certifier
    }
}

/// Returns `true` iff the unique optimum stays strictly cheapest under every
/// sampled perturbation. Used only to falsify.
pub fn sample_perturbation_check(instance: &MetricInstance, alpha: &BigRational, trials: usize, seed: u64) -> Result<bool> {
    Ok(sample_audit(instance, alpha, trials, seed)?.optimum_lost == 0)
}

/// Samples `trials` perturbations with per-pair factors `1 + (α−1)·u/U` and
/// audits them against the certifier's extremal margins. With tied optima the
/// first optimum plays the role of `O`.
pub fn sample_audit(instance: &MetricInstance, alpha: &BigRational, trials: usize, seed: u64) -> Result<SampleAudit> {
    let (p, q) = alpha_parts(alpha)?;
    let report = certify_stability(instance, alpha)?;
    // with tied optima the audit runs against the first one; the certifier
    // already reports instability, so only the margin checks bite
    let o = match report.unique_optimum.clone() {
        Some(o) => o,
        None => brute_force_optimum(instance)?.optima.swap_remove(0),
    };
    if trials == 0 {
        return Ok(SampleAudit::default());
    }
    let sols = all_solutions(instance, DEFAULT_ENUMERATION_BUDGET)?;
    let u = SAMPLE_RESOLUTION;
    let big_u = BigInt::from(u);
    let lift = match instance.objective() {
        Objective::Means => u * u,
        Objective::Median => u,
    };
    let fits = (&p * &big_u).to_u64().is_some_and(|pu| {
        let f2 = (pu as u128) * (pu as u128);
        instance.objective() == Objective::Means && f2.checked_mul(instance.delta_max() as u128).is_some_and(|v| v <= I128_HEADROOM)
    });
    let audit = if fits {
        let (Table::Int(base), Table::Int(stretched)) = (scaled_table(instance, &q), scaled_table(instance, &p)) else {
            unreachable!("sample-unit values fit, so certifier units do too")
        };
        run_audit(instance, &base, &stretched, &sols, &o, report.stable, trials, seed, &p, &q, lift, |f, d| {
            let f = f.to_i128().expect("checked above");
            f * f * d as i128
        })
    } else {
        let base = to_root(scaled_table(instance, &q));
        let stretched = to_root(scaled_table(instance, &p));
        run_audit(instance, &base, &stretched, &sols, &o, report.stable, trials, seed, &p, &q, lift, |f, d| {
            match instance.objective() {
                Objective::Means => RootSum::from_integer(f * f * BigInt::from(d)),
                Objective::Median => RootSum::term(BigRational::from_integer(f.clone()), d),
            }
        })
    };
    Ok(audit)
}

#[allow(clippy::too_many_arguments)]
fn run_audit<T: Scalar>(
    instance: &MetricInstance,
    base: &[Vec<T>],
    stretched: &[Vec<T>],
    sols: &[Solution],
    o: &Solution,
    certified_stable: bool,
    trials: usize,
    seed: u64,
    p: &BigInt,
    q: &BigInt,
    lift: u64,
    value: impl Fn(&BigInt, u64) -> T + Sync,
) -> SampleAudit {
    let (m, n) = (instance.n_centres(), instance.n_points());
    let u = SAMPLE_RESOLUTION;
    let qu = q * BigInt::from(u);
    let step = p - q;
    // Extremal margins and base costs, lifted to sample units.
    let margins: Vec<Option<T>> = sols
        .par_iter()
        .map(|s| (s != o).then(|| extremal_margin(base, stretched, s, o).0.times(lift)))
        .collect();
    let base_costs: Vec<T> = sols.par_iter().map(|s| table_cost(base, s.indices()).times(lift)).collect();
    let o_index = sols.iter().position(|s| s == o).expect("optimum is enumerated");

    let per_trial: Vec<(bool, bool, bool)> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(t as u64);
            let table: Vec<Vec<T>> = (0..m)
                .map(|i| {
                    (0..n)
                        .map(|j| {
                            let draw: u64 = rng.random_range(0..=u);
                            let f = &qu + &step * BigInt::from(draw);
                            value(&f, instance.sqdist()[i][j])
                        })
                        .collect()
                })
                .collect();
            let costs: Vec<T> = sols.iter().map(|s| table_cost(&table, s.indices())).collect();
            let co = &costs[o_index];
            let mut lost = false;
            let mut mono = false;
            let mut dom = false;
            for (idx, c) in costs.iter().enumerate() {
                if *c < base_costs[idx] {
                    mono = true;
                }
                if idx == o_index {
                    continue;
                }
                let diff = c.minus(co);
                if diff <= T::zero() {
                    lost = true;
                }
                if let Some(mg) = &margins[idx] {
                    if diff < *mg {
                        dom = true;
                    }
                }
            }
            (lost, mono, dom)
        })
        .collect();
    let optimum_lost = per_trial.iter().filter(|r| r.0).count();
    SampleAudit {
        trials,
        optimum_lost,
        monotonicity_violations: per_trial.iter().filter(|r| r.1).count(),
        dominance_violations: per_trial.iter().filter(|r| r.2).count(),
        contradicts_certifier: certified_stable && optimum_lost > 0,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{parse_rational, rational};
    use num_traits::Zero;
    use crate::metric::int_coords;

    fn line() -> MetricInstance {
        MetricInstance::build(int_coords(&[vec![0], vec![10]]), int_coords(&[vec![0], vec![10], vec![4]]), 1, Objective::Means)
            .unwrap()
    }

    #[test]
    fn optimum_of_line() {
        let opt = brute_force_optimum(&line()).unwrap();
        assert_eq!(opt.optima, vec![Solution::new([2], 3, 1).unwrap()]);
        assert_eq!(opt.cost, Cost::Squared(52));
    }

    #[test]
    fn symmetric_centres_tie() {
        let inst = MetricInstance::from_table(vec![vec![3, 3], vec![3, 3]], 1, Objective::Means).unwrap();
        assert_eq!(brute_force_optimum(&inst).unwrap().optima.len(), 2);
        let rep = certify_stability(&inst, &rational(11, 10)).unwrap();
        assert!(!rep.stable);
        assert!(rep.unique_optimum.is_none());
        let full = inst.with_k(2).unwrap();
        let opt = brute_force_optimum(&full).unwrap();
        assert_eq!(opt.optima.len(), 1);
        assert_eq!(opt.cost, Cost::Squared(6));
    }

    #[test]
    fn psi_and_nearly_good() {
        let inst = line();
        let o = Solution::new([2], 3, 1).unwrap();
        let s = Solution::new([0], 3, 1).unwrap();
        assert_eq!(psi(&inst, &o, &o), Cost::Squared(0));
        assert_eq!(psi(&inst, &s, &o), Cost::Squared(152));
        assert!(is_nearly_good(&inst, &o, &o, &rational(1, 100)));
        assert!(is_nearly_good(&inst, &s, &o, &rational(1, 6)));
        assert!(!is_nearly_good(&inst, &s, &o, &rational(1, 100)));
    }

    #[test]
    fn eps_conversion() {
        assert_eq!(eps_from_eps_prime(&rational(1, 2)), rational(5, 24));
        assert_eq!(eps_from_eps_prime(&BigRational::zero()), BigRational::zero());
        assert_eq!(eps_from_alpha_squared(&rational(2, 1)), rational(1, 6));
        assert_eq!(eps_from_eps_prime(&rational(1, 20)), rational(41, 2400));
    }

    #[test]
    fn alpha_must_exceed_one() {
        assert!(matches!(certify_stability(&line(), &BigRational::one()), Err(Error::InvalidAlpha(_))));
    }

    #[test]
    fn certifier_matches_grid_on_line() {
        let inst = line();
        for a in ["1.05", "1.2", "1.3", "1.5", "2", "3"] {
            let alpha = parse_rational(a).unwrap();
            let rep = certify_stability(&inst, &alpha).unwrap();
            assert_eq!(rep.stable, grid_certify(&inst, &alpha, 20).unwrap(), "alpha {a}");
            if !rep.stable {
                assert!(replay_witness(&inst, &rep).unwrap());
            }
        }
    }

    #[test]
    fn median_certifier_matches_grid() {
        let inst = MetricInstance::build(
            int_coords(&[vec![0], vec![1], vec![9], vec![10]]),
            int_coords(&[vec![0], vec![10], vec![5], vec![1]]),
            2,
            Objective::Median,
        )
        .unwrap();
        for a in ["1.05", "1.5", "3"] {
            let alpha = parse_rational(a).unwrap();
            let rep = certify_stability(&inst, &alpha).unwrap();
            assert_eq!(rep.stable, grid_certify(&inst, &alpha, 20).unwrap(), "alpha {a}");
        }
    }

    #[test]
    fn sampling_agrees_on_line() {
        let audit = sample_audit(&line(), &parse_rational("1.05").unwrap(), 500, 7).unwrap();
        assert!(audit.clean(), "{audit:?}");
        assert!(sample_perturbation_check(&line(), &rational(21, 20), 0, 1).unwrap());
    }
}
