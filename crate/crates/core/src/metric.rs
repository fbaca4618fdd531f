//! Discrete k-means / k-median instances with exact integer squared distances.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::ser::Serializer;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::{format_rational, parse_rational, square_free_split, RootSum};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Objective {
    /// Sum of squared distances.
    #[serde(rename = "kmeans")]
    Means,
    /// Sum of distances.
    #[serde(rename = "kmedian")]
    Median,
}

impl fmt::Display for Objective {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Objective::Means => "kmeans",
            Objective::Median => "kmedian",
        })
    }
}

/// A set of exactly `k` distinct centre indices, kept sorted.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Solution(Vec<usize>);

impl Solution {
    pub fn new(indices: impl IntoIterator<Item = usize>, n_centres: usize, k: usize) -> Result<Self> {
        let mut v: Vec<usize> = indices.into_iter().collect();
        v.sort_unstable();
        if v.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidSolution(format!("repeated centre in {v:?}")));
        }
        if let Some(&bad) = v.iter().find(|&&i| i >= n_centres) {
            return Err(Error::InvalidSolution(format!(
                "centre index {bad} out of range (have {n_centres})"
            )));
        }
        if v.len() != k {
            return Err(Error::InvalidSolution(format!("expected {k} centres, got {}", v.len())));
        }
        Ok(Self(v))
    }

    /// `indices` must already be sorted and distinct.
    pub(crate) fn from_sorted(indices: Vec<usize>) -> Self {
        debug_assert!(indices.windows(2).all(|w| w[0] < w[1]));
        Self(indices)
    }

    /// The lexicographically first k-subset `{0, …, k-1}`.
    pub fn first(k: usize) -> Self {
        Self((0..k).collect())
    }

    pub fn indices(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, centre: usize) -> bool {
        self.0.binary_search(&centre).is_ok()
    }

    /// Number of centres of `self` that are not in `other`.
    pub fn difference_size(&self, other: &Solution) -> usize {
        self.0.iter().filter(|&&i| !other.contains(i)).count()
    }
}

impl fmt::Display for Solution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (n, i) in self.0.iter().enumerate() {
            if n > 0 {
                write!(f, ",")?;
            }
            write!(f, "{i}")?;
        }
        write!(f, "}}")
    }
}

/// Nearest open centre per point (`sigma[j]`), ties to the smallest index.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Assignment {
    pub sigma: Vec<usize>,
}

/// Exact clustering cost.
///
/// k-means costs are integers; k-median costs are sums of square roots.
#[derive(Clone, Debug)]
pub enum Cost {
    Squared(u128),
    Radical(RootSum),
}

impl Cost {
    pub fn to_root_sum(&self) -> RootSum {
        match self {
            Cost::Squared(v) => RootSum::from_integer(*v),
            Cost::Radical(r) => r.clone(),
        }
    }

    pub fn as_integer(&self) -> Option<u128> {
        match self {
            Cost::Squared(v) => Some(*v),
            Cost::Radical(r) => r.as_rational().filter(|q| q.is_integer()).and_then(|q| q.to_integer().to_u128()),
        }
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            Cost::Squared(v) => *v as f64,
            Cost::Radical(r) => r.to_f64(),
        }
    }
}

impl PartialEq for Cost {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Cost {}

impl Ord for Cost {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Cost::Squared(a), Cost::Squared(b)) => a.cmp(b),
            (Cost::Radical(a), Cost::Radical(b)) => a.cmp(b),
            _ => self.to_root_sum().cmp(&other.to_root_sum()),
        }
    }
}

impl PartialOrd for Cost {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Cost {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Cost::Squared(v) => write!(f, "{v}"),
            Cost::Radical(r) => write!(f, "{r}"),
        }
    }
}

impl Serialize for Cost {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Cost::Squared(v) => serializer.serialize_u128(*v),
            Cost::Radical(r) => serializer.serialize_str(&r.to_string()),
        }
    }
}

/// An immutable discrete clustering instance.
///
/// `sqdist[i][j]` is the exact squared distance between centre `i` and point
/// `j` after multiplying every coordinate by `scale`.
#[derive(Clone, Debug)]
pub struct MetricInstance {
    objective: Objective,
    k: usize,
    points: Option<Vec<Vec<BigRational>>>,
    centres: Option<Vec<Vec<BigRational>>>,
    sqdist: Vec<Vec<u64>>,
    scale: BigUint,
    dim: usize,
    duplicate_centres: Vec<(usize, usize)>,
    radicals: Option<Vec<Vec<(u64, u64)>>>,
}

impl MetricInstance {
    /// Builds an instance from rational coordinates.
    pub fn build(
        points: Vec<Vec<BigRational>>,
        centres: Vec<Vec<BigRational>>,
        k: usize,
        objective: Objective,
    ) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::EmptyInput("no points"));
        }
        if centres.is_empty() {
            return Err(Error::EmptyInput("no centres"));
        }
        let dim = points[0].len();
        for v in points.iter().chain(centres.iter()) {
            if v.len() != dim {
                return Err(Error::DimensionMismatch { expected: dim, got: v.len() });
            }
        }
        check_k(k, centres.len())?;

        let mut scale = BigInt::one();
        for c in points.iter().chain(centres.iter()).flatten() {
            scale = scale.lcm(c.denom());
        }
        let scaled = |v: &Vec<BigRational>| -> Vec<BigInt> {
            v.iter().map(|c| (c * &scale).to_integer()).collect()
        };
        let sp: Vec<Vec<BigInt>> = points.iter().map(scaled).collect();
        let sc: Vec<Vec<BigInt>> = centres.iter().map(scaled).collect();
        let mut sqdist = Vec::with_capacity(sc.len());
        for c in &sc {
            let mut row = Vec::with_capacity(sp.len());
            for p in &sp {
                let d: BigInt = c.iter().zip(p).map(|(a, b)| (a - b) * (a - b)).sum();
                row.push(d.to_u64().ok_or(Error::Overflow("scaled squared distance exceeds u64"))?);
            }
            sqdist.push(row);
        }
        let scale = scale.to_biguint().expect("lcm of denominators is positive");
        let mut inst = Self::assemble(objective, k, sqdist, scale, dim)?;
        inst.points = Some(points);
        inst.centres = Some(centres);
        Ok(inst)
    }

    /// Builds an instance from an explicit squared-distance table `[centre][point]`.
    pub fn from_table(sqdist: Vec<Vec<u64>>, k: usize, objective: Objective) -> Result<Self> {
        if sqdist.is_empty() {
            return Err(Error::EmptyInput("no centres"));
        }
        let n = sqdist[0].len();
        if n == 0 {
            return Err(Error::EmptyInput("no points"));
        }
        if let Some(row) = sqdist.iter().find(|r| r.len() != n) {
            return Err(Error::DimensionMismatch { expected: n, got: row.len() });
        }
        check_k(k, sqdist.len())?;
        Self::assemble(objective, k, sqdist, BigUint::one(), 0)
    }

    fn assemble(objective: Objective, k: usize, sqdist: Vec<Vec<u64>>, scale: BigUint, dim: usize) -> Result<Self> {
        let mut duplicate_centres = Vec::new();
        for a in 0..sqdist.len() {
            for b in a + 1..sqdist.len() {
                if sqdist[a] == sqdist[b] {
                    duplicate_centres.push((a, b));
                }
            }
        }
        let radicals = (objective == Objective::Median).then(|| {
            sqdist
                .iter()
                .map(|row| row.iter().map(|&d| square_free_split(d)).collect())
                .collect()
        });
        Ok(Self {
            objective,
            k,
            points: None,
            centres: None,
            sqdist,
            scale,
            dim,
            duplicate_centres,
            radicals,
        })
    }

    pub fn objective(&self) -> Objective {
        self.objective
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn n_points(&self) -> usize {
        self.sqdist[0].len()
    }

    pub fn n_centres(&self) -> usize {
        self.sqdist.len()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn scale(&self) -> &BigUint {
        &self.scale
    }

    pub fn sqdist(&self) -> &[Vec<u64>] {
        &self.sqdist
    }

    pub fn points(&self) -> Option<&[Vec<BigRational>]> {
        self.points.as_deref()
    }

    pub fn centres(&self) -> Option<&[Vec<BigRational>]> {
        self.centres.as_deref()
    }

    /// Pairs of centres with identical distance rows.
    pub fn duplicate_centres(&self) -> &[(usize, usize)] {
        &self.duplicate_centres
    }

    /// The same instance with a different `k`.
    pub fn with_k(&self, k: usize) -> Result<Self> {
        check_k(k, self.n_centres())?;
        let mut out = self.clone();
        out.k = k;
        Ok(out)
    }

    pub fn check_solution(&self, s: &Solution) -> Result<()> {
        if s.len() != self.k {
            return Err(Error::InvalidSolution(format!("expected {} centres, got {}", self.k, s.len())));
        }
        match s.indices().last() {
            Some(&last) if last >= self.n_centres() => Err(Error::InvalidSolution(format!(
                "centre index {last} out of range (have {})",
                self.n_centres()
            ))),
            _ => Ok(()),
        }
    }

    /// Nearest centre among `open` to point `j`; ties go to the smallest index.
    /// `open` must be sorted ascending and non-empty.
    pub fn nearest(&self, j: usize, open: &[usize]) -> usize {
        let mut best = open[0];
        let mut best_d = self.sqdist[best][j];
        for &i in &open[1..] {
            let d = self.sqdist[i][j];
            if d < best_d {
                best = i;
                best_d = d;
            }
        }
        best
    }

    pub fn assign(&self, s: &Solution) -> Assignment {
        Assignment {
            sigma: (0..self.n_points()).map(|j| self.nearest(j, s.indices())).collect(),
        }
    }

    pub fn cost(&self, s: &Solution) -> Cost {
        self.cost_of_indices(s.indices())
    }

    /// Cost with an arbitrary non-empty sorted set of open centres (ignores `k`).
    pub fn cost_of_indices(&self, open: &[usize]) -> Cost {
        match &self.radicals {
            None => Cost::Squared(
                (0..self.n_points())
                    .map(|j| self.sqdist[self.nearest(j, open)][j] as u128)
                    .sum(),
            ),
            Some(rad) => {
                let mut counts: BTreeMap<u64, u128> = BTreeMap::new();
                for j in 0..self.n_points() {
                    let (s, r) = rad[self.nearest(j, open)][j];
                    if s != 0 {
                        *counts.entry(r).or_default() += s as u128;
                    }
                }
                Cost::Radical(RootSum::from_square_free_counts(counts))
            }
        }
    }

    /// Connection cost of point `j` to centre `i`: `δ²` for k-means, `δ` for k-median.
    pub fn pair_cost(&self, i: usize, j: usize) -> Cost {
        match &self.radicals {
            None => Cost::Squared(self.sqdist[i][j] as u128),
            Some(rad) => {
                let (s, r) = rad[i][j];
                let mut out = RootSum::zero();
                out.add_split(&BigRational::one(), s, r);
                Cost::Radical(out)
            }
        }
    }

    /// Largest squared distance over all centre/point pairs.
    pub fn delta_max(&self) -> u64 {
        self.sqdist.iter().flatten().copied().max().unwrap_or(0)
    }

    pub fn to_file(&self) -> InstanceFile {
        match (&self.points, &self.centres) {
            (Some(points), Some(centres)) => InstanceFile::Coordinates {
                objective: self.objective,
                k: self.k,
                points: points.iter().map(|v| v.iter().map(RationalRepr::from).collect()).collect(),
                centres: centres.iter().map(|v| v.iter().map(RationalRepr::from).collect()).collect(),
            },
            _ => InstanceFile::Table {
                objective: Some(self.objective),
                k: self.k,
                sqdist: self.sqdist.clone(),
            },
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.to_file())?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: InstanceFile = serde_json::from_str(text)?;
        file.into_instance()
    }
}

fn check_k(k: usize, centres: usize) -> Result<()> {
    if k < 1 || k > centres {
        return Err(Error::KOutOfRange { k, centres });
    }
    Ok(())
}

/// A rational coordinate serialized as `"p/q"` (integers also accepted on input).
#[derive(Clone, Debug, PartialEq)]
pub struct RationalRepr(pub BigRational);

impl From<&BigRational> for RationalRepr {
    fn from(v: &BigRational) -> Self {
        Self(v.clone())
    }
}

impl Serialize for RationalRepr {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(&format_rational(&self.0))
    }
}

impl<'de> Deserialize<'de> for RationalRepr {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Int(i64),
            Text(String),
        }
        match Raw::deserialize(deserializer)? {
            Raw::Int(v) => Ok(Self(BigRational::from_integer(BigInt::from(v)))),
            Raw::Text(s) => parse_rational(&s).map(Self).map_err(serde::de::Error::custom),
        }
    }
}

/// On-disk instance schema: coordinates, or an explicit squared-distance table.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum InstanceFile {
    Coordinates {
        objective: Objective,
        k: usize,
        points: Vec<Vec<RationalRepr>>,
        centres: Vec<Vec<RationalRepr>>,
    },
    Table {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        objective: Option<Objective>,
        k: usize,
        sqdist: Vec<Vec<u64>>,
    },
}

impl InstanceFile {
    pub fn into_instance(self) -> Result<MetricInstance> {
        match self {
            InstanceFile::Coordinates { objective, k, points, centres } => MetricInstance::build(
                points.into_iter().map(|v| v.into_iter().map(|c| c.0).collect()).collect(),
                centres.into_iter().map(|v| v.into_iter().map(|c| c.0).collect()).collect(),
                k,
                objective,
            ),
            InstanceFile::Table { objective, k, sqdist } => {
                MetricInstance::from_table(sqdist, k, objective.unwrap_or(Objective::Means))
            }
        }
    }
}

/// Integer coordinates as rationals.
pub fn int_coords(rows: &[Vec<i64>]) -> Vec<Vec<BigRational>> {
    rows.iter()
        .map(|r| r.iter().map(|&c| BigRational::from_integer(BigInt::from(c))).collect())
        .collect()
}

impl Zero for Cost {
    fn zero() -> Self {
        Cost::Squared(0)
    }

    fn is_zero(&self) -> bool {
        match self {
            Cost::Squared(v) => *v == 0,
            Cost::Radical(r) => r.is_zero(),
        }
    }
}

impl std::ops::Add for Cost {
    type Output = Cost;
    fn add(self, rhs: Cost) -> Cost {
        match (self, rhs) {
            (Cost::Squared(a), Cost::Squared(b)) => Cost::Squared(a + b),
            (a, b) => Cost::Radical(a.to_root_sum() + b.to_root_sum()),
        }
    }
}
