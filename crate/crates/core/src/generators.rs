//! Seeded instance families: well-separated clusters, uniform noise and
//! mirror-symmetric ties.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use num_rational::BigRational;
use num_traits::ToPrimitive;

use crate::error::{Error, Result};
use crate::metric::{int_coords, MetricInstance, Objective, RationalRepr};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GenKind {
    SeparatedClusters,
    UniformRandom,
    ColinearTie,
}

fn default_spread() -> i64 {
    4
}

fn default_range() -> i64 {
    100
}

fn default_objective() -> Objective {
    Objective::Means
}

/// Parameters for [`generate`].
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GenSpec {
    pub kind: GenKind,
    pub n_points: usize,
    pub n_centres: usize,
    pub k: usize,
    pub dim: usize,
    /// Inter-cluster spacing over intra-cluster spread (separated clusters only).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gap: Option<RationalRepr>,
    pub seed: u64,
    #[serde(default = "default_objective")]
    pub objective: Objective,
    /// Jitter radius per coordinate inside a cluster.
    #[serde(default = "default_spread")]
    pub spread: i64,
    /// Coordinate range `[0, range]` for uniform instances.
    #[serde(default = "default_range")]
    pub range: i64,
}

impl GenSpec {
    pub fn separated(n_points: usize, n_centres: usize, k: usize, dim: usize, gap: BigRational, seed: u64) -> Self {
        Self {
            kind: GenKind::SeparatedClusters,
            n_points,
            n_centres,
            k,
            dim,
            gap: Some(RationalRepr(gap)),
            seed,
            objective: Objective::Means,
            spread: default_spread(),
            range: default_range(),
        }
    }

    pub fn uniform(n_points: usize, n_centres: usize, k: usize, dim: usize, seed: u64) -> Self {
        Self {
            kind: GenKind::UniformRandom,
            gap: None,
            ..Self::separated(n_points, n_centres, k, dim, BigRational::from_integer(2.into()), seed)
        }
    }

    pub fn colinear_tie(n_points: usize, n_centres: usize, k: usize, seed: u64) -> Self {
        Self {
            kind: GenKind::ColinearTie,
            gap: None,
            ..Self::separated(n_points, n_centres, k, 1, BigRational::from_integer(2.into()), seed)
        }
    }

    pub fn with_objective(mut self, objective: Objective) -> Self {
        self.objective = objective;
        self
    }

    fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::SpecInvalid(m));
        if self.k < 1 || self.n_points < self.k {
            return bad(format!("need n_points >= k >= 1 (n_points={}, k={})", self.n_points, self.k));
        }
        if self.n_centres < self.k {
            return bad(format!("need n_centres >= k (n_centres={}, k={})", self.n_centres, self.k));
        }
        if self.dim < 1 {
            return bad("dim must be at least 1".into());
        }
        if self.spread < 1 || self.range < 1 {
            return bad("spread and range must be positive".into());
        }
        match self.kind {
            GenKind::SeparatedClusters => {
                let ok = self.gap.as_ref().is_some_and(|g| g.0 > BigRational::from_integer(1.into()));
                if !ok {
                    return bad("separated clusters need gap > 1".into());
                }
            }
            GenKind::ColinearTie => {
                if self.n_centres < 2 * self.k {
                    return bad(format!("colinear ties need n_centres >= 2k (n_centres={}, k={})", self.n_centres, self.k));
                }
            }
            GenKind::UniformRandom => {}
        }
        Ok(())
    }
}

pub fn generate(spec: &GenSpec) -> Result<MetricInstance> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let (points, centres) = match spec.kind {
        GenKind::SeparatedClusters => separated(spec, &mut rng)?,
        GenKind::UniformRandom => uniform(spec, &mut rng),
        GenKind::ColinearTie => colinear(spec),
    };
    MetricInstance::build(int_coords(&points), int_coords(&centres), spec.k, spec.objective)
}

type Coords = Vec<Vec<i64>>;

/// `k` cluster centres on a lattice of spacing `⌈gap·spread⌉`, points jittered
/// within `spread`, candidates at the cluster centres plus decoys at midpoints.
fn separated(spec: &GenSpec, rng: &mut ChaCha8Rng) -> Result<(Coords, Coords)> {
    let gap = &spec.gap.as_ref().expect("validated").0;
    let spacing = (gap * BigRational::from_integer(spec.spread.into()))
        .ceil()
        .to_integer()
        .to_i64()
        .ok_or_else(|| Error::SpecInvalid("gap too large".into()))?;
    // smallest side length whose lattice holds k sites
    let mut side = 1usize;
    while side.pow(spec.dim as u32) < spec.k {
        side += 1;
    }
    let mut sites: Vec<Vec<i64>> = Vec::new();
    for idx in 0..side.pow(spec.dim as u32) {
        let mut rest = idx;
        let mut v = Vec::with_capacity(spec.dim);
        for _ in 0..spec.dim {
            v.push((rest % side) as i64 * spacing);
            rest /= side;
        }
        sites.push(v);
    }
    sites.shuffle(rng);
    sites.truncate(spec.k);

    let points: Coords = (0..spec.n_points)
        .map(|p| {
            let c = &sites[p % spec.k];
            c.iter().map(|&x| x + rng.random_range(-spec.spread..=spec.spread)).collect()
        })
        .collect();

    let mut centres = sites.clone();
    let mut pairs: Vec<(usize, usize)> = Vec::new();
    for a in 0..spec.k {
        for b in a + 1..spec.k {
            pairs.push((a, b));
        }
    }
    pairs.shuffle(rng);
    let mut decoy = 0usize;
    while centres.len() < spec.n_centres {
        let v: Vec<i64> = if pairs.is_empty() {
            // a single cluster: decoys sit just outside its spread
            let c = &sites[0];
            let off = spec.spread * (2 + decoy as i64);
            c.iter().enumerate().map(|(d, &x)| if d == 0 { x + off } else { x }).collect()
        } else {
            let (a, b) = pairs[decoy % pairs.len()];
            let lift = (decoy / pairs.len()) as i64;
            sites[a]
                .iter()
                .zip(&sites[b])
                .enumerate()
                .map(|(d, (&x, &y))| (x + y) / 2 + if d == 0 { lift } else { 0 })
                .collect()
        };
        decoy += 1;
        centres.push(v);
    }
    centres.shuffle(rng);
    Ok((points, centres))
}

fn uniform(spec: &GenSpec, rng: &mut ChaCha8Rng) -> (Coords, Coords) {
    let mut draw = |count: usize| -> Coords {
        (0..count)
            .map(|_| (0..spec.dim).map(|_| rng.random_range(0..=spec.range)).collect())
            .collect()
    };
    let points = draw(spec.n_points);
    let centres = draw(spec.n_centres);
    (points, centres)
}

/// Mirror-symmetric clusters on a line; every cluster has two candidate
/// centres at equal distance from all its points, so optima always tie.
fn colinear(spec: &GenSpec) -> (Coords, Coords) {
    let spacing = 100 * spec.spread.max(1);
    let mut points = Vec::with_capacity(spec.n_points);
    for p in 0..spec.n_points {
        let cluster = p % spec.k;
        let t = p / spec.k;
        let size = spec.n_points / spec.k + usize::from(cluster < spec.n_points % spec.k);
        let c = cluster as i64 * spacing;
        // mirrored pairs c±m; a leftover odd point sits on c itself
        let x = if t < size / 2 * 2 {
            let m = ((t / 2 + 1) as i64).min(spacing / 4);
            if t % 2 == 0 { c + m } else { c - m }
        } else {
            c
        };
        points.push(vec![x]);
    }
    let mut centres = Vec::with_capacity(spec.n_centres);
    for i in 0..spec.k {
        let c = i as i64 * spacing;
        centres.push(vec![c - 1]);
        centres.push(vec![c + 1]);
    }
    let mut far = 0i64;
    while centres.len() < spec.n_centres {
        far += 1;
        centres.push(vec![-spacing * far]);
    }
    (points, centres)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::brute_force_optimum;

    #[test]
    fn deterministic_under_seed() {
        let spec = GenSpec::uniform(8, 5, 2, 2, 99);
        let a = generate(&spec).unwrap().to_json().unwrap();
        let b = generate(&spec).unwrap().to_json().unwrap();
        assert_eq!(a, b);
        let c = generate(&GenSpec::uniform(8, 5, 2, 2, 100)).unwrap().to_json().unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn integer_coordinates() {
        let inst = generate(&GenSpec::separated(10, 6, 3, 2, BigRational::from_integer(20.into()), 1)).unwrap();
        assert_eq!(inst.scale(), &num_bigint::BigUint::from(1u8));
        assert_eq!(inst.n_centres(), 6);
        assert_eq!(inst.n_points(), 10);
    }

    #[test]
    fn colinear_ties_are_not_unique() {
        for k in 1..=3 {
            let inst = generate(&GenSpec::colinear_tie(3 * k + 1, 2 * k + 1, k, 0)).unwrap();
            assert!(brute_force_optimum(&inst).unwrap().optima.len() >= 2);
        }
    }

    #[test]
    fn invalid_specs() {
        assert!(generate(&GenSpec::uniform(1, 5, 2, 2, 0)).is_err());
        assert!(generate(&GenSpec::separated(8, 6, 2, 2, BigRational::from_integer(1.into()), 0)).is_err());
        assert!(generate(&GenSpec::colinear_tie(8, 3, 2, 0)).is_err());
    }
}
