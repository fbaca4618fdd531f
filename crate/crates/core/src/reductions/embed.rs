//! Covering-by-triples to discrete k-means: basis-vector points, one centre per triple.

use std::collections::BTreeMap;

use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::Serialize;

use super::triples::TripleSystem;
use crate::error::{Error, Result};
use crate::metric::{MetricInstance, Objective};

/// Squared distance from `e_v` to `e_a + e_b + e_c` when `v ∈ {a, b, c}`.
pub const COVERED: u64 = 2;
/// Squared distance when `v ∉ {a, b, c}`.
pub const UNCOVERED: u64 = 4;

/// Symbolic stability constants carried along the chain.
pub type Constants = BTreeMap<String, String>;

/// The matching system re-read as a covering instance (the structure is unchanged).
pub fn tdm_to_cbt(ts: &TripleSystem, constants: &mut Constants) -> TripleSystem {
    constants.insert("s2".into(), "s1/(3*s1 + 4)".into());
    constants.insert("gamma2".into(), "gamma1/3".into());
    ts.clone()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct EmbedProvenance {
    /// `n`: a cover uses `n` triples on `3n` vertices.
    pub n: usize,
    /// Centre `i` is triple `i`; point `j` is vertex `j`.
    pub centre_to_triple: Vec<usize>,
    pub point_to_vertex: Vec<usize>,
    /// Cost of any exact cover, `6n`.
    pub cover_cost: u128,
    pub with_coordinates: bool,
}

/// Points `e_v` for each vertex and centres `e_a + e_b + e_c` for each triple,
/// with `k = n`. Emits the distance table only unless `coordinates` is set.
pub fn cbt_to_kmeans(ts: &TripleSystem, coordinates: bool) -> Result<(MetricInstance, EmbedProvenance)> {
    let n = ts
        .target_size()
        .filter(|&n| n > 0)
        .ok_or_else(|| Error::MalformedTripleSystem(format!("{} vertices is not a positive multiple of 3", ts.n_vertices())))?;
    if ts.triples().len() < n {
        return Err(Error::MalformedTripleSystem(format!(
            "{} triples cannot cover {} vertices",
            ts.triples().len(),
            ts.n_vertices()
        )));
    }
    let v = ts.n_vertices();
    let instance = if coordinates {
        let unit = |hot: &[usize]| -> Vec<BigRational> {
            (0..v)
                .map(|d| if hot.contains(&d) { BigRational::one() } else { BigRational::zero() })
                .collect()
        };
        let points = (0..v).map(|j| unit(&[j])).collect();
        let centres = ts.triples().iter().map(|t| unit(t)).collect();
        MetricInstance::build(points, centres, n, Objective::Means)?
    } else {
        let table = ts
            .triples()
            .iter()
            .map(|t| (0..v).map(|j| if t.contains(&j) { COVERED } else { UNCOVERED }).collect())
            .collect();
        MetricInstance::from_table(table, n, Objective::Means)?
    };
    let prov = EmbedProvenance {
        n,
        centre_to_triple: (0..ts.triples().len()).collect(),
        point_to_vertex: (0..v).collect(),
        cover_cost: 6 * n as u128,
        with_coordinates: coordinates,
    };
    Ok((instance, prov))
}

/// `12n − 2·covered`: the k-means cost of choosing triples that cover `covered` vertices.
pub fn cost_from_cover(n: usize, covered: usize) -> u128 {
    12 * n as u128 - 2 * covered as u128
}
