//! End-to-end acceptance checks. Each test prints one PASS/FAIL line.

use std::process::Command;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::One;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use stable_kmeans::exact::rational;
use stable_kmeans::generators::{generate, GenSpec};
use stable_kmeans::local_search::{
    iteration_bound, run_generic, run_local_search, run_truncated_trace, LocalSearchProblem, SingleSwap,
};
use stable_kmeans::metric::{Cost, MetricInstance, Objective, Solution};
use stable_kmeans::oracle::{
    annotate_nearly_good, brute_force_optimum, certify_stability, eps_from_eps_prime, replay_witness, sample_audit,
};
use stable_kmeans::reductions::embed::cost_from_cover;
use stable_kmeans::reductions::exact3::f_gadget;
use stable_kmeans::reductions::wheels::{clause_gadget, variable_gadget};
use stable_kmeans::reductions::{
    cbt_to_kmeans, e3sat_to_3dm, occurrence_split_family, qsat_to_e3sat, CnfFormula, Lit, TripleSystem,
};
use stable_kmeans::verify::{
    count_perfect_matchings, count_sat, matchings_at_least, max_cover, max_matching, measure_sat_stability,
    verify_chain, ChainBudgets, SearchBudget, Verdict,
};

fn report(name: &str, ok: bool, detail: String) {
    println!("[{}] {name}: {detail}", if ok { "PASS" } else { "FAIL" });
    assert!(ok, "{name}: {detail}");
}

/// Small Euclidean instances: n ≤ 12, |C| ≤ 8, k ≤ 4, d ≤ 3.
fn small_instance(i: u64) -> MetricInstance {
    let mut rng = ChaCha8Rng::seed_from_u64(1_000 + i);
    let k = rng.random_range(1..=4usize);
    let dim = rng.random_range(1..=3usize);
    let n = rng.random_range(k.max(4)..=12usize);
    let c = rng.random_range((k + 1).max(3)..=8usize);
    let spec = match i % 4 {
        0 => GenSpec::uniform(n, c, k, dim, i),
        _ => {
            let gap = [rational(3, 1), rational(6, 1), rational(12, 1)][(i % 3) as usize].clone();
            GenSpec::separated(n, c, k, dim, gap, i)
        }
    };
    generate(&spec).expect("valid spec")
}

#[test]
fn exact_recovery_on_certified_stable_instances() {
    let eps_prime = rational(1, 20);
    let alpha = BigRational::one() + &eps_prime;
    let eps = eps_from_eps_prime(&eps_prime);
    let (mut certified, mut solved, mut late) = (0, 0, 0);
    let total = 240u64;
    for i in 0..total {
        let inst = small_instance(i);
        let rep = certify_stability(&inst, &alpha).unwrap();
        if !rep.stable {
            continue;
        }
        certified += 1;
        let opt = rep.unique_optimum.clone().unwrap();
        let bound = iteration_bound(&inst);
        let mut all = true;
        for rho in 1..=2.min(inst.k()) {
            let mut trace = run_truncated_trace(&inst, rho).unwrap();
            annotate_nearly_good(&inst, &mut trace, &opt, &eps);
            all &= trace.last().centre_indices == opt;
            if trace.first_nearly_good_index.is_none_or(|j| j > bound) {
                late += 1;
                all = false;
            }
        }
        solved += usize::from(all);
    }
    report(
        "exact recovery on certified-stable instances",
        certified > 0 && solved == certified && late == 0,
        format!("{total} instances, {certified} certified stable at 21/20, {solved} solved exactly, {late} late"),
    );
}

#[test]
fn generic_engine_five_approximation() {
    let mut violations = 0;
    let runs = 110u64;
    for i in 0..runs {
        let mut rng = ChaCha8Rng::seed_from_u64(2_000 + i);
        let k = rng.random_range(1..=5usize);
        let c = rng.random_range(k + 1..=12usize);
        let n = rng.random_range(k..=30usize);
        let dim = rng.random_range(1..=3usize);
        let inst = generate(&GenSpec::uniform(n, c, k, dim, i).with_objective(Objective::Median)).unwrap();
        let opt = brute_force_optimum(&inst).unwrap().cost;
        let problem = SingleSwap::new(&inst);
        let (_, cost) = run_generic(&problem, &problem.five_approx_config(), Solution::first(k));
        let five = opt.to_root_sum().scale(&rational(5, 1));
        if cost.to_root_sum() > five {
            violations += 1;
        }
        assert_eq!(problem.cost(&Solution::first(k)), inst.cost(&Solution::first(k)));
    }
    report(
        "single-swap generic engine within 5x optimum (k-median)",
        violations == 0,
        format!("{runs} instances, {violations} violations"),
    );
}

#[test]
fn certifier_agrees_with_sampled_perturbations() {
    let alpha = rational(11, 10);
    let (mut stable, mut unstable, mut tied, mut contradictions, mut bad_replays) = (0, 0, 0, 0, 0);
    let count = 54u64;
    for i in 0..count {
        let inst = match i % 3 {
            0 => generate(&GenSpec::separated(8, 6, 2, 2, rational(8, 1), i)).unwrap(),
            1 => generate(&GenSpec::uniform(8, 6, 2, 2, i)).unwrap(),
            _ => generate(&GenSpec::colinear_tie(6, 4 + (i % 2) as usize, 2, i)).unwrap(),
        };
        let rep = certify_stability(&inst, &alpha).unwrap();
        match (rep.stable, rep.optima_count > 1) {
            (true, _) => stable += 1,
            (false, true) => tied += 1,
            (false, false) => unstable += 1,
        }
        if rep.violating_solution.is_some() && !replay_witness(&inst, &rep).unwrap() {
            bad_replays += 1;
        }
        let audit = sample_audit(&inst, &alpha, 10_000, i).unwrap();
        if !audit.clean() {
            contradictions += 1;
        }
    }
    report(
        "certifier verdicts survive 10^4 sampled perturbations each",
        contradictions == 0 && bad_replays == 0 && stable > 0 && unstable > 0 && tied > 0,
        format!(
            "{count} instances ({stable} stable, {unstable} unstable, {tied} tied), {contradictions} contradictions, {bad_replays} failed witness replays"
        ),
    );
}

fn random_cnf(rng: &mut ChaCha8Rng, n: usize, m: usize, max_width: usize) -> CnfFormula {
    let clauses = (0..m)
        .map(|_| {
            let w = rng.random_range(1..=max_width.min(n));
            let mut vars: Vec<usize> = (0..n).collect();
            for j in 0..w {
                let t = rng.random_range(j..n);
                vars.swap(j, t);
            }
            vars[..w]
                .iter()
                .map(|&v| Lit { var: v, positive: rng.random_bool(0.5) })
                .collect()
        })
        .collect();
    CnfFormula::new(n, clauses).unwrap()
}

#[test]
fn exactly_three_rewriting_is_parsimonious() {
    let mut gadget_ok = true;
    for signs in 0u8..8 {
        let l = |i: usize| Lit { var: i, positive: signs >> i & 1 == 1 };
        let f = CnfFormula::new(3, f_gadget(l(0), l(1), l(2)).unwrap()).unwrap();
        let c = count_sat(&f, &SearchBudget::default()).unwrap();
        gadget_ok &= c.count == 1;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(4_000);
    let (mut checked, mut mismatched, mut shape) = (0, 0, 0);
    for i in 0..150 {
        let n = rng.random_range(1..=6usize);
        let width = 1 + i % 6;
        // keeps the rewritten formula within a 2^22 truth table
        let m = rng.random_range(1..=if width >= 4 { 2 } else { 4 });
        let mut phi = random_cnf(&mut rng, n, m, width.min(n));
        if width <= n {
            // guarantee a clause of exactly this width
            let mut clauses = phi.clauses().to_vec();
            clauses[0] = (0..width).map(|v| Lit { var: v, positive: rng.random_bool(0.5) }).collect();
            phi = CnfFormula::new(n, clauses).unwrap();
        }
        let (psi, prov) = qsat_to_e3sat(&phi).unwrap();
        let a = count_sat(&phi, &SearchBudget::default()).unwrap().count;
        let b = count_sat(&psi, &SearchBudget::unlimited()).unwrap().count;
        checked += 1;
        mismatched += usize::from(a != b);
        let widths = psi.clauses().iter().all(|c| c.len() == 3);
        shape += usize::from(!widths || psi.occurrence_bound() > prov.b_prime);
    }
    report(
        "exactly-3 rewriting preserves model counts",
        gadget_ok && mismatched == 0 && shape == 0,
        format!("8 gadget sign patterns unique={gadget_ok}; {checked} formulas, {mismatched} count mismatches, {shape} width/occurrence violations"),
    );
}

fn random_e3sat(rng: &mut ChaCha8Rng, m: usize) -> CnfFormula {
    loop {
        let n = rng.random_range(3..=3 * m);
        let f = random_cnf_exact3(rng, n, m);
        if f.occurrences().iter().all(|&o| o > 0) {
            return f;
        }
    }
}

fn random_cnf_exact3(rng: &mut ChaCha8Rng, n: usize, m: usize) -> CnfFormula {
    let clauses = (0..m)
        .map(|_| {
            let mut vars: Vec<usize> = (0..n).collect();
            for j in 0..3 {
                let t = rng.random_range(j..n);
                vars.swap(j, t);
            }
            vars[..3].iter().map(|&v| Lit { var: v, positive: rng.random_bool(0.5) }).collect()
        })
        .collect();
    CnfFormula::new(n, clauses).unwrap()
}

#[test]
fn triple_construction_identities() {
    let mut rng = ChaCha8Rng::seed_from_u64(5_000);
    let budget = SearchBudget::default().with_time(std::time::Duration::from_secs(60));
    let (mut sizes_bad, mut counts_bad, mut formulas) = (0, 0, 0);
    for i in 0..24 {
        let m = 1 + i % 2;
        let psi = random_e3sat(&mut rng, m);
        let (ts, prov) = e3sat_to_3dm(&psi, Some(4)).unwrap();
        let k = prov.k;
        sizes_bad += usize::from(ts.n_vertices() != (18 * k + 15) * m || ts.triples().len() != (12 * k + 15) * m);
        let pm = count_perfect_matchings(&ts, &budget).unwrap();
        let sat = count_sat(&psi, &budget).unwrap().count;
        counts_bad += usize::from(pm != sat);
        formulas += 1;
    }
    // larger copy counts only for the size identities
    for k in [16, 64] {
        let psi = random_e3sat(&mut rng, 2);
        let (ts, _) = e3sat_to_3dm(&psi, Some(k)).unwrap();
        sizes_bad += usize::from(ts.n_vertices() != (18 * k + 15) * 2 || ts.triples().len() != (12 * k + 15) * 2);
    }

    // isolated clause gadgets: 8 with the satisfying roots exposed, 7 with none
    let mut gadget_bad = 0;
    for signs in 0u8..8 {
        let lits: [Lit; 3] = std::array::from_fn(|i| Lit { var: i, positive: signs >> i & 1 == 1 });
        let g = clause_gadget(lits);
        let all_roots: Vec<usize> = (0..6).collect();
        gadget_bad += usize::from(max_matching(&g.without_vertices(&all_roots), &budget).unwrap() != 7);
        for a in 0u8..8 {
            let value = |i: usize| a >> i & 1 == 1;
            if !(0..3).any(|i| value(i) == lits[i].positive) {
                continue;
            }
            let keep: Vec<usize> = (0..3).map(|i| 2 * i + usize::from(!value(i))).collect();
            let removed: Vec<usize> = all_roots.iter().copied().filter(|r| !keep.contains(r)).collect();
            gadget_bad += usize::from(max_matching(&g.without_vertices(&removed), &budget).unwrap() != 8);
        }
    }

    // single-variable gadgets: large matchings are exactly the two canonical ones
    let mut variable_bad = 0;
    for beta in 1..=2 {
        let (ts, canon) = variable_gadget(beta, 4).unwrap();
        let big = matchings_at_least(&ts, beta * 7, &SearchBudget::unlimited()).unwrap();
        let mut sorted = canon.clone();
        for c in &mut sorted {
            c.sort_unstable();
        }
        variable_bad += big.iter().filter(|m| !sorted.contains(m)).count();
        variable_bad += sorted.iter().filter(|c| !big.contains(c)).count();
    }
    report(
        "triple-system sizes, parsimony and gadget matching bounds",
        sizes_bad == 0 && counts_bad == 0 && gadget_bad == 0 && variable_bad == 0,
        format!(
            "{formulas} formulas: {sizes_bad} size mismatches, {counts_bad} count mismatches; clause gadgets {gadget_bad} bad; variable gadgets {variable_bad} non-canonical large matchings"
        ),
    );
}

/// A planted perfect matching on `3n` shuffled vertices plus `extra` random triples.
fn planted_system(rng: &mut ChaCha8Rng, n: usize, extra: usize) -> TripleSystem {
    let mut perm: Vec<usize> = (0..3 * n).collect();
    for j in (1..perm.len()).rev() {
        perm.swap(j, rng.random_range(0..=j));
    }
    let mut triples: Vec<[usize; 3]> = perm.chunks(3).map(|c| [c[0], c[1], c[2]]).collect();
    let mut seen: std::collections::BTreeSet<[usize; 3]> = triples
        .iter()
        .map(|t| {
            let mut s = *t;
            s.sort_unstable();
            s
        })
        .collect();
    while triples.len() < n + extra {
        let mut t;
        loop {
            t = [rng.random_range(0..3 * n), rng.random_range(0..3 * n), rng.random_range(0..3 * n)];
            if t[0] != t[1] && t[1] != t[2] && t[0] != t[2] {
                break;
            }
        }
        t.sort_unstable();
        if seen.insert(t) {
            triples.push(t);
        }
    }
    TripleSystem::plain(3 * n, triples).unwrap()
}

#[test]
fn embedding_cost_identities() {
    let mut rng = ChaCha8Rng::seed_from_u64(6_000);
    let budget = SearchBudget::default();
    let (mut entries_bad, mut identity_bad, mut unique_bad, mut instances, mut unique_seen) = (0, 0, 0, 0, 0);
    for i in 0..40 {
        let n = 2 + i % 3;
        let ts = planted_system(&mut rng, n, 2 + i % 4);
        let (inst, _) = cbt_to_kmeans(&ts, i % 5 == 0).unwrap();
        let unit = inst.scale() * inst.scale();
        entries_bad += inst
            .sqdist()
            .iter()
            .flatten()
            .filter(|&&d| {
                let d = num_bigint::BigUint::from(d);
                d != &unit * 2u32 && d != &unit * 4u32
            })
            .count();
        let opt = brute_force_optimum(&inst).unwrap();
        let cover = max_cover(&ts, n, &budget).unwrap();
        let scale = u128::try_from(BigInt::from(unit)).unwrap();
        identity_bad += usize::from(opt.cost != Cost::Squared(cost_from_cover(n, cover) * scale));
        if count_perfect_matchings(&ts, &budget).unwrap() == 1 {
            unique_seen += 1;
            unique_bad += usize::from(opt.optima.len() != 1 || opt.cost != Cost::Squared(6 * n as u128 * scale));
        }
        instances += 1;
    }
    // covering instances without a perfect matching (odd overlap structure)
    for i in 0..20 {
        let n = 2 + i % 2;
        let mut ts_rng = ChaCha8Rng::seed_from_u64(6_500 + i as u64);
        let mut triples = Vec::new();
        while triples.len() < n + 2 {
            let t = [ts_rng.random_range(0..3 * n - 1), ts_rng.random_range(0..3 * n - 1), 3 * n - 1];
            let mut s = t;
            s.sort_unstable();
            if s[0] != s[1] && s[1] != s[2] && !triples.contains(&s) {
                triples.push(s);
            }
        }
        // every triple uses the last vertex, so at most one can be picked disjointly
        let ts = TripleSystem::plain(3 * n, triples).unwrap();
        let (inst, _) = cbt_to_kmeans(&ts, false).unwrap();
        let opt = brute_force_optimum(&inst).unwrap();
        let cover = max_cover(&ts, n, &budget).unwrap();
        identity_bad += usize::from(opt.cost != Cost::Squared(cost_from_cover(n, cover)));
        instances += 1;
    }
    // unsatisfiable chain: no cover, optimum at least 6n + 2
    let phi = CnfFormula::new(1, vec![vec![Lit::pos(0)], vec![Lit::neg(0)]]).unwrap();
    let r = verify_chain(&phi, Some(4), &ChainBudgets::default()).unwrap();
    let n = r.sizes.cover_size as u128;
    let no_case = r.verdict == Verdict::Pass && r.perfect_matchings == Some(0) && r.cost_lower_bound == 6 * n + 2;
    report(
        "embedding distances and cost identities",
        entries_bad == 0 && identity_bad == 0 && unique_bad == 0 && unique_seen > 0 && no_case,
        format!(
            "{instances} instances: {entries_bad} bad entries, {identity_bad} cost/cover mismatches, {unique_bad}/{unique_seen} unique-cover failures; unsatisfiable chain bound holds={no_case}"
        ),
    );
}

#[test]
fn occurrence_split_degrades_stability() {
    let half = rational(1, 2);
    let budget = SearchBudget::unlimited();
    let mut phi_ok = true;
    let mut psi_values = Vec::new();
    let mut line = Vec::new();
    for n in 1..=6 {
        let (phi, psi) = occurrence_split_family(n).unwrap();
        let sp = measure_sat_stability(&phi, &budget).unwrap();
        phi_ok &= sp.exact >= half;
        if n >= 2 {
            let ss = measure_sat_stability(&psi, &budget).unwrap();
            line.push(format!("n={n}: {} / {}", sp.value, ss.value));
            psi_values.push(ss.exact);
        } else {
            line.push(format!("n=1: {}", sp.value));
        }
    }
    let decreasing = psi_values.windows(2).all(|w| w[1] < w[0]);
    report(
        "split family: original stays 1/2-stable, split copies lose stability",
        phi_ok && decreasing,
        line.join(", "),
    );
}

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_stable-kmeans")
}

#[test]
fn descent_and_determinism() {
    let mut rises = 0;
    let mut runs = 0;
    for i in 0..60u64 {
        let inst = small_instance(i);
        for rho in 1..=2.min(inst.k()) {
            let start = Solution::new((inst.n_centres() - inst.k())..inst.n_centres(), inst.n_centres(), inst.k()).unwrap();
            let t = run_local_search(&inst, rho, &start, None).unwrap();
            rises += t.iterates.windows(2).filter(|w| w[1].cost >= w[0].cost).count();
            let again = run_local_search(&inst, rho, &start, None).unwrap();
            rises += usize::from(serde_json::to_string(&t).unwrap() != serde_json::to_string(&again).unwrap());
            runs += 1;
        }
    }
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("spec.json");
    std::fs::write(&spec, serde_json::to_string(&GenSpec::uniform(12, 8, 3, 2, 77)).unwrap()).unwrap();
    let inst = dir.path().join("inst.json");
    let ok = Command::new(bin()).args(["generate", "--spec"]).arg(&spec).arg("--out").arg(&inst).status().unwrap();
    assert!(ok.success());
    let mut outputs = Vec::new();
    for (run, threads) in [(0, "4"), (1, "4"), (2, "1")] {
        // identical relative output paths keep the embedded config identical
        let cwd = dir.path().join(format!("run{run}"));
        std::fs::create_dir(&cwd).unwrap();
        let prefix = cwd.join("trace");
        let st = Command::new(bin())
            .current_dir(&cwd)
            .args(["--threads", threads, "solve", "--rho", "2", "--instance"])
            .arg(&inst)
            .args(["--out", "trace"])
            .status()
            .unwrap();
        assert!(st.success());
        let json = std::fs::read_to_string(prefix.with_extension("json")).unwrap();
        let csv = std::fs::read_to_string(prefix.with_extension("csv")).unwrap();
        let v: serde_json::Value = serde_json::from_str(&json).unwrap();
        outputs.push((json, csv, v["trace"].to_string()));
    }
    let identical = outputs[0].0 == outputs[1].0 && outputs[0].1 == outputs[1].1;
    let thread_independent = outputs[0].2 == outputs[2].2 && outputs[0].1 == outputs[2].1;
    report(
        "strict descent and byte-identical reruns",
        rises == 0 && identical && thread_independent,
        format!("{runs} runs, {rises} non-decreasing steps or rerun diffs; --threads 4 reruns identical={identical}; trace same under 1 vs 4 threads={thread_independent}"),
    );
}
