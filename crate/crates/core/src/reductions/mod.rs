//! The reduction chain: bounded CNF → exactly-3 CNF → triple matching →
//! covering by triples → discrete k-means, plus the occurrence-split family.

pub mod cnf;
pub mod embed;
pub mod exact3;
pub mod split;
pub mod triples;
pub mod wheels;

use serde::Serialize;

pub use cnf::{cnf, CnfFormula, Lit};
pub use embed::{cbt_to_kmeans, tdm_to_cbt, Constants, EmbedProvenance};
pub use exact3::{f_gadget, qsat_to_e3sat, Exact3Provenance};
pub use split::{occurrence_split_family, split_occurrences};
pub use triples::{TripleSystem, TripleTag, VertexRole};
pub use wheels::{e3sat_to_3dm, WheelProvenance};

use crate::error::Result;
use crate::metric::MetricInstance;

/// Provenance threaded through every stage.
#[derive(Clone, Debug, Serialize)]
pub struct ChainProvenance {
    pub exact3: Exact3Provenance,
    pub wheels: WheelProvenance,
    pub embed: EmbedProvenance,
    /// Stability constants, kept symbolic where no closed form exists.
    pub constants: Constants,
}

/// Every artifact produced by [`full_chain`].
#[derive(Clone, Debug)]
pub struct ChainOutput {
    pub exact3: CnfFormula,
    pub triples: TripleSystem,
    pub instance: MetricInstance,
    pub provenance: ChainProvenance,
}

fn base_constants(ex: &Exact3Provenance, wh: &WheelProvenance) -> Constants {
    let mut c = Constants::new();
    c.insert("B".into(), ex.b.to_string());
    c.insert("Q".into(), ex.q.to_string());
    c.insert("B_prime".into(), ex.b_prime.to_string());
    c.insert("s_prime".into(), format!("s/(8*{}*{}*{}^2)", ex.b, ex.b_prime, ex.q));
    c.insert("gamma_prime".into(), "unspecified universal constant".into());
    c.insert("K".into(), wh.k.to_string());
    c.insert("K_required".into(), format!("4^{} = {}", wh.p, wh.k_required));
    c.insert("K_floor_formula".into(), wh.k_floor_formula.to_string());
    c.insert("p".into(), wh.p.to_string());
    c.insert("s1".into(), "universal constant in (0, 1)".into());
    c.insert("gamma1".into(), format!("(gamma_prime + 3*(1 - zeta))/{}", wh.b));
    c.insert("s3".into(), "unfixed; constrained through eps0".into());
    c.insert("gamma3".into(), "unfixed; constrained through eps0".into());
    c.insert("eps0".into(), "min{(6*s2 - s3)/(6*(1 + s2)), gamma2 - gamma3}".into());
    c
}

/// Runs every stage on `phi`.
pub fn full_chain(phi: &CnfFormula, k_override: Option<usize>) -> Result<ChainOutput> {
    let (psi, exact3) = qsat_to_e3sat(phi)?;
    let (ts, wheels) = e3sat_to_3dm(&psi, k_override)?;
    let mut constants = base_constants(&exact3, &wheels);
    let cover = tdm_to_cbt(&ts, &mut constants);
    let (instance, embed) = cbt_to_kmeans(&cover, false)?;
    Ok(ChainOutput {
        exact3: psi,
        triples: cover,
        instance,
        provenance: ChainProvenance { exact3, wheels, embed, constants },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_clause_chain_sizes() {
        let phi = cnf(1, &[&[1]]).unwrap();
        let out = full_chain(&phi, Some(4)).unwrap();
        let m = out.exact3.m();
        assert_eq!(m, 7);
        assert_eq!(out.triples.n_vertices(), 87 * m);
        assert_eq!(out.instance.n_points(), 87 * m);
        assert_eq!(out.instance.k(), 29 * m);
        assert_eq!(out.instance.n_centres(), 63 * m);
        assert_eq!(out.provenance.embed.cover_cost, 6 * 29 * m as u128);
        assert!(out.provenance.constants.contains_key("s2"));
    }
}
