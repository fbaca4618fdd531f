//! Best-improvement multi-swap local search and a generic local search engine.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::combin::Subsets;
use crate::error::{Error, Result};
use crate::exact::format_rational;
use crate::metric::{Cost, MetricInstance, Solution};

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TraceEntry {
    pub iteration: usize,
    pub centre_indices: Solution,
    pub cost: Cost,
}

/// Iterates of one local-search run, costs strictly decreasing.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SearchTrace {
    pub iterates: Vec<TraceEntry>,
    pub terminated_locally_optimal: bool,
    pub iteration_cap_hit: bool,
    /// Index of the first iterate that passes the nearly-good test, filled by the caller.
    pub first_nearly_good_index: Option<usize>,
}

impl SearchTrace {
    pub fn last(&self) -> &TraceEntry {
        self.iterates.last().expect("trace is never empty")
    }

    /// Number of improving steps taken.
    pub fn steps(&self) -> usize {
        self.iterates.len() - 1
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("iteration,cost\n");
        for e in &self.iterates {
            out.push_str(&format!("{},{}\n", e.iteration, e.cost));
        }
        out
    }
}

fn check_rho(instance: &MetricInstance, rho: usize) -> Result<()> {
    if rho < 1 || rho > instance.k() {
        return Err(Error::RhoOutOfRange { rho, k: instance.k() });
    }
    Ok(())
}

/// Every k-subset within `rho` swaps of `s`, including `s`, in lexicographic order.
pub fn neighborhood(instance: &MetricInstance, s: &Solution, rho: usize) -> Result<Vec<Solution>> {
    check_rho(instance, rho)?;
    instance.check_solution(s)?;
    let inside = s.indices().to_vec();
    let outside: Vec<usize> = (0..instance.n_centres()).filter(|&i| !s.contains(i)).collect();
    let mut out = Vec::new();
    for t in 0..=rho.min(outside.len()) {
        for drop in Subsets::new(&inside, t) {
            let kept: Vec<usize> = inside.iter().copied().filter(|i| !drop.contains(i)).collect();
            for add in Subsets::new(&outside, t) {
                let mut v = kept.clone();
                v.extend_from_slice(&add);
                v.sort_unstable();
                out.push(Solution::from_sorted(v));
            }
        }
    }
    out.sort();
    Ok(out)
}

/// Cheapest neighbour, smallest index set among equal costs; `s` itself when
/// nothing is strictly cheaper.
pub fn best_swap(instance: &MetricInstance, s: &Solution, rho: usize) -> Result<(Solution, Cost)> {
    let neighbours = neighborhood(instance, s, rho)?;
    let current = instance.cost(s);
    let best = neighbours
        .into_par_iter()
        .map(|n| (instance.cost(&n), n))
        .min()
        .expect("neighbourhood contains s");
    if best.0 < current {
        Ok((best.1, best.0))
    } else {
        Ok((s.clone(), current))
    }
}

pub fn run_local_search(
    instance: &MetricInstance,
    rho: usize,
    start: &Solution,
    cap: Option<usize>,
) -> Result<SearchTrace> {
    check_rho(instance, rho)?;
    instance.check_solution(start)?;
    let mut iterates = vec![TraceEntry {
        iteration: 0,
        centre_indices: start.clone(),
        cost: instance.cost(start),
    }];
    let mut locally_optimal = false;
    let mut cap_hit = false;
    loop {
        let steps = iterates.len() - 1;
        if cap.is_some_and(|c| steps >= c) {
            cap_hit = true;
            break;
        }
        let current = &iterates[steps].centre_indices;
        let (next, cost) = best_swap(instance, current, rho)?;
        if &next == current {
            locally_optimal = true;
            break;
        }
        iterates.push(TraceEntry {
            iteration: steps + 1,
            centre_indices: next,
            cost,
        });
    }
    Ok(SearchTrace {
        iterates,
        terminated_locally_optimal: locally_optimal,
        iteration_cap_hit: cap_hit,
        first_nearly_good_index: None,
    })
}

/// `⌈2k·ln(nΔ)⌉`, or 0 when every squared distance is 0.
pub fn iteration_bound(instance: &MetricInstance) -> usize {
    let delta = instance.delta_max();
    if delta == 0 {
        return 0;
    }
    let n_delta = instance.n_points() as f64 * delta as f64;
    let v = 2.0 * instance.k() as f64 * n_delta.ln();
    v.ceil().max(0.0) as usize
}

/// Local search from the first `k` centres, truncated after [`iteration_bound`] steps.
pub fn run_truncated_trace(instance: &MetricInstance, rho: usize) -> Result<SearchTrace> {
    run_local_search(instance, rho, &Solution::first(instance.k()), Some(iteration_bound(instance)))
}

pub fn run_truncated(instance: &MetricInstance, rho: usize) -> Result<(Solution, Cost)> {
    let trace = run_truncated_trace(instance, rho)?;
    let last = trace.last();
    Ok((last.centre_indices.clone(), last.cost.clone()))
}

/// A problem the generic engine can search.
pub trait LocalSearchProblem: Sync {
    type Solution: Clone + Ord + Send + Sync;
    type Cost: Ord + Clone + Send;

    fn cost(&self, s: &Self::Solution) -> Self::Cost;
    /// Deterministic neighbourhood; must contain `s`.
    fn neighbours(&self, s: &Self::Solution) -> Vec<Self::Solution>;
}

/// Parameters of the generic engine: guarantee `α·cost(O) − β·cost(S)` per step.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GenericConfig {
    alpha: BigRational,
    beta: BigRational,
    kappa: u64,
    delta_bound: u64,
    m: u64,
}

impl GenericConfig {
    pub fn new(alpha: BigRational, beta: BigRational, kappa: u64, delta_bound: u64, m: u64) -> Result<Self> {
        if alpha < BigRational::one() {
            return Err(Error::InvalidConfig(format!("alpha {} below 1", format_rational(&alpha))));
        }
        if beta <= BigRational::zero() || beta > BigRational::one() {
            return Err(Error::InvalidConfig(format!("beta {} outside (0, 1]", format_rational(&beta))));
        }
        if kappa == 0 {
            return Err(Error::InvalidConfig("kappa must be positive".into()));
        }
        if m == 0 {
            return Err(Error::InvalidConfig("M must be positive".into()));
        }
        let mm = BigRational::from_integer(BigInt::from(m));
        if !(&alpha * &mm).is_integer() || !(&beta * &mm).is_integer() {
            return Err(Error::InvalidConfig(format!("alpha and beta must be multiples of 1/{m}")));
        }
        Ok(Self { alpha, beta, kappa, delta_bound, m })
    }

    pub fn alpha(&self) -> &BigRational {
        &self.alpha
    }

    pub fn beta(&self) -> &BigRational {
        &self.beta
    }

    /// `max(⌈(κ/β)·ln(ΔM)⌉, ⌈κ·ln(Δ)·M/β⌉)`, clamped at 0.
    pub fn iterations(&self) -> u64 {
        let beta = self.beta.to_f64().expect("beta is finite");
        let kappa = self.kappa as f64;
        let m = self.m as f64;
        let delta = self.delta_bound as f64;
        let proof = if delta * m > 1.0 { (kappa / beta * (delta * m).ln()).ceil() } else { 0.0 };
        let header = if delta > 1.0 { (kappa * delta.ln() * m / beta).ceil() } else { 0.0 };
        proof.max(header).max(0.0) as u64
    }
}

/// Takes the best neighbour for up to `config.iterations()` rounds.
pub fn run_generic<P: LocalSearchProblem>(
    problem: &P,
    config: &GenericConfig,
    start: P::Solution,
) -> (P::Solution, P::Cost) {
    let mut current = start;
    let mut cost = problem.cost(&current);
    for _ in 0..config.iterations() {
        let best = problem
            .neighbours(&current)
            .into_par_iter()
            .map(|n| (problem.cost(&n), n))
            .min()
            .expect("neighbourhood contains the current solution");
        if best.0 >= cost {
            break;
        }
        cost = best.0;
        current = best.1;
    }
    (current, cost)
}

/// Single-swap neighbourhood over a clustering instance.
pub struct SingleSwap<'a> {
    instance: &'a MetricInstance,
}

impl<'a> SingleSwap<'a> {
    pub fn new(instance: &'a MetricInstance) -> Self {
        Self { instance }
    }

    /// Engine settings `(α, β, κ) = (5, 1, k)` with `Δ = n·⌈√max δ²⌉`.
    pub fn five_approx_config(&self) -> GenericConfig {
        let root = {
            let d = self.instance.delta_max();
            let r = d.isqrt();
            if r * r == d { r } else { r + 1 }
        };
        let delta = (self.instance.n_points() as u64).saturating_mul(root.max(1));
        GenericConfig::new(
            BigRational::from_integer(5.into()),
            BigRational::one(),
            self.instance.k() as u64,
            delta,
            1,
        )
        .expect("constant configuration is valid")
    }
}

impl LocalSearchProblem for SingleSwap<'_> {
    type Solution = Solution;
    type Cost = Cost;

    fn cost(&self, s: &Solution) -> Cost {
        self.instance.cost(s)
    }

    fn neighbours(&self, s: &Solution) -> Vec<Solution> {
        neighborhood(self.instance, s, 1).expect("k >= 1 admits rho = 1")
    }
}
