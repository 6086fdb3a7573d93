//! Integral affine maps `f(x) = Cx + d` built from flipping, embedding and
//! duplicating coordinates, and their action on points and polytopes.
//!
//! Coordinates are 0-indexed throughout.

use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::lp::{LinearConstraint, OracleDescriptor, Polytope, SeparationOracle};
use crate::rational::{self, Rational};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum MapError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("coordinate {index} out of range for dimension {dim}")]
    IndexOutOfRange { index: usize, dim: usize },
    #[error("positions are not a permutation of 0..{0}")]
    InvalidPermutation(usize),
    #[error("map was not built from flip/embed/dup steps")]
    NonCanonicalMap,
    #[error("map matrix does not match its spec")]
    SpecMismatch,
}

/// Flip the coordinates in `j`: `y_i = 1 - x_i` for `i ∈ j`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FlipSpec {
    pub n: usize,
    pub j: Vec<usize>,
}

/// Append `zeros` coordinates fixed to 0 and `ones` fixed to 1, then move
/// canonical coordinate `i` to output position `positions[i]`. An empty
/// `positions` means the identity placement.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EmbedSpec {
    pub n: usize,
    pub zeros: usize,
    pub ones: usize,
    #[serde(default)]
    pub positions: Vec<usize>,
}

/// Append copies `y_{n+i} = x_{tuple[i]}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DupSpec {
    pub n: usize,
    pub tuple: Vec<usize>,
}

/// One canonical step of a composed map.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "spec", rename_all = "snake_case")]
pub enum MapStep {
    Flip(FlipSpec),
    Embed(EmbedSpec),
    Dup(DupSpec),
}

impl MapStep {
    fn input_dim(&self) -> usize {
        match self {
            MapStep::Flip(s) => s.n,
            MapStep::Embed(s) => s.n,
            MapStep::Dup(s) => s.n,
        }
    }

    fn output_dim(&self) -> usize {
        match self {
            MapStep::Flip(s) => s.n,
            MapStep::Embed(s) => s.n + s.zeros + s.ones,
            MapStep::Dup(s) => s.n + s.tuple.len(),
        }
    }

    fn positions(spec: &EmbedSpec) -> Vec<usize> {
        if spec.positions.is_empty() {
            (0..spec.n + spec.zeros + spec.ones).collect()
        } else {
            spec.positions.clone()
        }
    }

    fn validate(&self) -> Result<(), MapError> {
        match self {
            MapStep::Flip(s) => {
                for &i in &s.j {
                    if i >= s.n {
                        return Err(MapError::IndexOutOfRange { index: i, dim: s.n });
                    }
                }
            }
            MapStep::Embed(s) => {
                let m = s.n + s.zeros + s.ones;
                let pos = Self::positions(s);
                let mut seen = vec![false; m];
                if pos.len() != m {
                    return Err(MapError::InvalidPermutation(m));
                }
                for &p in &pos {
                    if p >= m || seen[p] {
                        return Err(MapError::InvalidPermutation(m));
                    }
                    seen[p] = true;
                }
            }
            MapStep::Dup(s) => {
                for &i in &s.tuple {
                    if i >= s.n {
                        return Err(MapError::IndexOutOfRange { index: i, dim: s.n });
                    }
                }
            }
        }
        Ok(())
    }

    fn matrix(&self) -> (Vec<Vec<BigInt>>, Vec<BigInt>) {
        let n = self.input_dim();
        let m = self.output_dim();
        let mut c = vec![vec![BigInt::zero(); n]; m];
        let mut d = vec![BigInt::zero(); m];
        match self {
            MapStep::Flip(s) => {
                for (i, row) in c.iter_mut().enumerate() {
                    row[i] = BigInt::one();
                }
                for &i in &s.j {
                    c[i][i] = -BigInt::one();
                    d[i] = BigInt::one();
                }
            }
            MapStep::Embed(s) => {
                let pos = Self::positions(s);
                for i in 0..n {
                    c[pos[i]][i] = BigInt::one();
                }
                for k in 0..s.ones {
                    d[pos[n + s.zeros + k]] = BigInt::one();
                }
            }
            MapStep::Dup(s) => {
                for (i, row) in c.iter_mut().enumerate().take(n) {
                    row[i] = BigInt::one();
                }
                for (k, &j) in s.tuple.iter().enumerate() {
                    c[n + k][j] = BigInt::one();
                }
            }
        }
        (c, d)
    }

    /// Image of `{x : row}` under the step, as a row in the output space.
    fn map_row(&self, row: &LinearConstraint) -> LinearConstraint {
        match self {
            MapStep::Flip(s) => {
                let mut coeffs = row.coeffs.clone();
                let mut rhs = row.rhs.clone();
                for &i in &s.j {
                    rhs -= &row.coeffs[i];
                    coeffs[i] = -&row.coeffs[i];
                }
                LinearConstraint::new(coeffs, row.relation, rhs)
            }
            MapStep::Embed(s) => {
                let pos = Self::positions(s);
                let mut coeffs = rational::zeros(self.output_dim());
                for (i, a) in row.coeffs.iter().enumerate() {
                    coeffs[pos[i]] = a.clone();
                }
                LinearConstraint::new(coeffs, row.relation, row.rhs.clone())
            }
            MapStep::Dup(_) => {
                let mut coeffs = row.coeffs.clone();
                coeffs.resize(self.output_dim(), Rational::zero());
                LinearConstraint::new(coeffs, row.relation, row.rhs.clone())
            }
        }
    }

    /// Preimage coordinates of an output point (the step is injective).
    fn pull_point(&self, y: &[Rational]) -> Vec<Rational> {
        match self {
            MapStep::Flip(s) => {
                let mut x = y.to_vec();
                for &i in &s.j {
                    x[i] = Rational::one() - &y[i];
                }
                x
            }
            MapStep::Embed(s) => {
                let pos = Self::positions(s);
                (0..s.n).map(|i| y[pos[i]].clone()).collect()
            }
            MapStep::Dup(s) => y[..s.n].to_vec(),
        }
    }

    /// Preimage of an output row that is supported on the image
    /// coordinates only, or `None` if it touches the appended ones.
    fn pull_row(&self, row: &LinearConstraint) -> Option<LinearConstraint> {
        match self {
            MapStep::Flip(_) => Some(self.map_row(row)),
            MapStep::Embed(s) => {
                let pos = Self::positions(s);
                let mut extra = vec![true; self.output_dim()];
                let coeffs: Vec<Rational> = (0..s.n)
                    .map(|i| {
                        extra[pos[i]] = false;
                        row.coeffs[pos[i]].clone()
                    })
                    .collect();
                let clean = row.coeffs.iter().zip(&extra).all(|(a, e)| !e || a.is_zero());
                clean.then(|| LinearConstraint::new(coeffs, row.relation, row.rhs.clone()))
            }
            MapStep::Dup(s) => {
                let clean = row.coeffs[s.n..].iter().all(Zero::is_zero);
                clean.then(|| LinearConstraint::new(row.coeffs[..s.n].to_vec(), row.relation, row.rhs.clone()))
            }
        }
    }

    /// Rows that pin the appended coordinates.
    fn fixing_rows(&self) -> Vec<LinearConstraint> {
        let m = self.output_dim();
        match self {
            MapStep::Flip(_) => Vec::new(),
            MapStep::Embed(s) => {
                let pos = Self::positions(s);
                (0..s.zeros + s.ones)
                    .map(|k| {
                        let v = if k < s.zeros { 0 } else { 1 };
                        LinearConstraint::eq(rational::unit(m, pos[s.n + k]), rational::int(v))
                    })
                    .collect()
            }
            MapStep::Dup(s) => s
                .tuple
                .iter()
                .enumerate()
                .map(|(k, &j)| {
                    let mut a = rational::unit(m, s.n + k);
                    a[j] -= Rational::one();
                    LinearConstraint::eq(a, Rational::zero())
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MapKind {
    Identity,
    Flip,
    Embed,
    Dup,
    Compose,
    General,
}

/// `f(x) = Cx + d` with integer `C` (`m x n`) and `d`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AffineMap {
    c: Vec<Vec<BigInt>>,
    d: Vec<BigInt>,
    n: usize,
    kind: MapKind,
    /// Canonical steps, innermost first; `None` for general maps.
    steps: Option<Vec<MapStep>>,
}

impl AffineMap {
    pub fn identity(n: usize) -> Self {
        let c = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| if i == j { BigInt::one() } else { BigInt::zero() })
                    .collect()
            })
            .collect();
        AffineMap {
            c,
            d: vec![BigInt::zero(); n],
            n,
            kind: MapKind::Identity,
            steps: Some(Vec::new()),
        }
    }

    /// An arbitrary integral map. Such maps can be applied to points and
    /// trees but not to polytopes.
    pub fn general(c: Vec<Vec<BigInt>>, d: Vec<BigInt>, n: usize) -> Result<Self, MapError> {
        if c.len() != d.len() {
            return Err(MapError::DimensionMismatch {
                expected: c.len(),
                found: d.len(),
            });
        }
        for row in &c {
            if row.len() != n {
                return Err(MapError::DimensionMismatch {
                    expected: n,
                    found: row.len(),
                });
            }
        }
        Ok(AffineMap {
            c,
            d,
            n,
            kind: MapKind::General,
            steps: None,
        })
    }

    fn from_step(step: MapStep) -> Result<Self, MapError> {
        step.validate()?;
        let (c, d) = step.matrix();
        let kind = match step {
            MapStep::Flip(_) => MapKind::Flip,
            MapStep::Embed(_) => MapKind::Embed,
            MapStep::Dup(_) => MapKind::Dup,
        };
        Ok(AffineMap {
            c,
            d,
            n: step.input_dim(),
            kind,
            steps: Some(vec![step]),
        })
    }

    pub fn input_dim(&self) -> usize {
        self.n
    }

    pub fn output_dim(&self) -> usize {
        self.d.len()
    }

    pub fn matrix(&self) -> &[Vec<BigInt>] {
        &self.c
    }

    pub fn offset(&self) -> &[BigInt] {
        &self.d
    }

    pub fn kind(&self) -> MapKind {
        self.kind
    }

    pub fn steps(&self) -> Option<&[MapStep]> {
        self.steps.as_deref()
    }

    /// `Cx + d`.
    pub fn apply(&self, x: &[Rational]) -> Result<Vec<Rational>, MapError> {
        if x.len() != self.n {
            return Err(MapError::DimensionMismatch {
                expected: self.n,
                found: x.len(),
            });
        }
        Ok(self
            .c
            .iter()
            .zip(&self.d)
            .map(|(row, di)| {
                let mut acc = Rational::from_integer(di.clone());
                for (a, v) in row.iter().zip(x) {
                    if !a.is_zero() {
                        acc += Rational::from_integer(a.clone()) * v;
                    }
                }
                acc
            })
            .collect())
    }

    /// `(C^T a, b - a . d)` for an output-space row `a . y <= b`.
    pub fn pull_back(&self, a: &[BigInt], b: &BigInt) -> Result<(Vec<BigInt>, BigInt), MapError> {
        if a.len() != self.output_dim() {
            return Err(MapError::DimensionMismatch {
                expected: self.output_dim(),
                found: a.len(),
            });
        }
        let pi = (0..self.n)
            .map(|j| self.c.iter().zip(a).map(|(row, ai)| &row[j] * ai).sum())
            .collect();
        let ad: BigInt = a.iter().zip(&self.d).map(|(x, y)| x * y).sum();
        Ok((pi, b - ad))
    }
}

pub fn make_flip(spec: FlipSpec) -> Result<AffineMap, MapError> {
    if spec.j.is_empty() {
        return Ok(AffineMap::identity(spec.n));
    }
    AffineMap::from_step(MapStep::Flip(spec))
}

pub fn make_embed(spec: EmbedSpec) -> Result<AffineMap, MapError> {
    let step = MapStep::Embed(spec);
    step.validate()?;
    if step.output_dim() == step.input_dim() {
        return Ok(AffineMap::identity(step.input_dim()));
    }
    AffineMap::from_step(step)
}

pub fn make_dup(spec: DupSpec) -> Result<AffineMap, MapError> {
    if spec.tuple.is_empty() {
        let step = MapStep::Dup(spec.clone());
        step.validate()?;
        return Ok(AffineMap::identity(spec.n));
    }
    AffineMap::from_step(MapStep::Dup(spec))
}

/// `outer ∘ inner`: `(C2 C1, C2 d1 + d2)`.
pub fn compose(outer: &AffineMap, inner: &AffineMap) -> Result<AffineMap, MapError> {
    if inner.output_dim() != outer.input_dim() {
        return Err(MapError::DimensionMismatch {
            expected: outer.input_dim(),
            found: inner.output_dim(),
        });
    }
    let c: Vec<Vec<BigInt>> = outer
        .c
        .iter()
        .map(|row| {
            (0..inner.n)
                .map(|j| row.iter().zip(&inner.c).map(|(a, r)| a * &r[j]).sum())
                .collect()
        })
        .collect();
    let d: Vec<BigInt> = outer
        .c
        .iter()
        .zip(&outer.d)
        .map(|(row, d2)| row.iter().zip(&inner.d).map(|(a, v)| a * v).sum::<BigInt>() + d2)
        .collect();
    let steps = match (&inner.steps, &outer.steps) {
        (Some(a), Some(b)) => Some(a.iter().chain(b).cloned().collect::<Vec<_>>()),
        _ => None,
    };
    let kind = match &steps {
        None => MapKind::General,
        Some(s) if s.is_empty() => MapKind::Identity,
        Some(s) if s.len() == 1 => match s[0] {
            MapStep::Flip(_) => MapKind::Flip,
            MapStep::Embed(_) => MapKind::Embed,
            MapStep::Dup(_) => MapKind::Dup,
        },
        Some(_) => MapKind::Compose,
    };
    Ok(AffineMap {
        c,
        d,
        n: inner.n,
        kind,
        steps,
    })
}

/// Rebuilds a map from its steps (innermost first).
pub fn from_steps(n: usize, steps: &[MapStep]) -> Result<AffineMap, MapError> {
    let mut f = AffineMap::identity(n);
    for s in steps {
        let g = AffineMap::from_step(s.clone())?;
        f = compose(&g, &f)?;
    }
    Ok(f)
}

/// Exact image `f(P)` for maps built from flip/embed/dup steps.
pub fn apply_map_polytope(f: &AffineMap, p: &Polytope) -> Result<Polytope, MapError> {
    let steps = f.steps.as_ref().ok_or(MapError::NonCanonicalMap)?;
    if p.dim() != f.n {
        return Err(MapError::DimensionMismatch {
            expected: f.n,
            found: p.dim(),
        });
    }
    let mut cur = p.clone();
    for step in steps {
        let mut rows: Vec<LinearConstraint> = cur.rows().iter().map(|r| step.map_row(r)).collect();
        rows.extend(step.fixing_rows());
        let mut next =
            Polytope::new(step.output_dim(), rows, cur.is_boxed()).map_err(|_| MapError::DimensionMismatch {
                expected: step.output_dim(),
                found: cur.dim(),
            })?;
        if let Some(o) = cur.oracle() {
            next = next
                .with_oracle(Arc::new(MappedOracle {
                    inner: o.clone(),
                    step: step.clone(),
                }))
                .expect("mapped oracle has the output dimension");
        }
        cur = next;
    }
    Ok(cur)
}

/// The rows of an inner oracle transported through one injective step.
struct MappedOracle {
    inner: Arc<dyn SeparationOracle>,
    step: MapStep,
}

impl fmt::Debug for MappedOracle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MappedOracle")
            .field("inner", &self.inner)
            .field("step", &self.step)
            .finish()
    }
}

impl SeparationOracle for MappedOracle {
    fn dim(&self) -> usize {
        self.step.output_dim()
    }

    fn family_size(&self) -> u128 {
        self.inner.family_size()
    }

    fn most_violated(&self, y: &[Rational]) -> Option<LinearConstraint> {
        let x = self.step.pull_point(y);
        self.inner.most_violated(&x).map(|r| self.step.map_row(&r))
    }

    fn is_family_row(&self, row: &LinearConstraint) -> bool {
        self.step.pull_row(row).is_some_and(|r| self.inner.is_family_row(&r))
    }

    fn descriptor(&self) -> Option<OracleDescriptor> {
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, ratio};

    fn bi(v: &[i64]) -> Vec<BigInt> {
        v.iter().map(|&x| BigInt::from(x)).collect()
    }

    #[test]
    fn flip_example() {
        let f = make_flip(FlipSpec { n: 2, j: vec![1] }).unwrap();
        assert_eq!(f.matrix(), &[bi(&[1, 0]), bi(&[0, -1])]);
        assert_eq!(f.offset(), bi(&[0, 1]).as_slice());
        assert_eq!(
            f.apply(&[ratio(1, 2), ratio(1, 4)]).unwrap(),
            vec![ratio(1, 2), ratio(3, 4)]
        );
        let full = make_flip(FlipSpec { n: 3, j: vec![0, 1, 2] }).unwrap();
        assert_eq!(full.apply(&rational::zeros(3)).unwrap(), vec![int(1); 3]);
        assert_eq!(
            make_flip(FlipSpec { n: 2, j: vec![] }).unwrap().kind(),
            MapKind::Identity
        );
    }

    #[test]
    fn embed_examples() {
        let f = make_embed(EmbedSpec {
            n: 1,
            zeros: 1,
            ones: 1,
            positions: vec![],
        })
        .unwrap();
        assert_eq!(f.apply(&[ratio(1, 3)]).unwrap(), vec![ratio(1, 3), int(0), int(1)]);
        let g = make_embed(EmbedSpec {
            n: 2,
            zeros: 0,
            ones: 1,
            positions: vec![1, 2, 0],
        })
        .unwrap();
        assert_eq!(
            g.apply(&[ratio(1, 3), ratio(1, 5)]).unwrap(),
            vec![int(1), ratio(1, 3), ratio(1, 5)]
        );
        assert_eq!(
            make_embed(EmbedSpec {
                n: 1,
                zeros: 1,
                ones: 0,
                positions: vec![0, 0]
            }),
            Err(MapError::InvalidPermutation(2))
        );
    }

    #[test]
    fn dup_and_compose() {
        let f = make_dup(DupSpec {
            n: 2,
            tuple: vec![1, 1],
        })
        .unwrap();
        assert_eq!(
            f.apply(&[int(0), int(1)]).unwrap(),
            vec![int(0), int(1), int(1), int(1)]
        );
        assert!(make_dup(DupSpec { n: 2, tuple: vec![2] }).is_err());
        let flip = make_flip(FlipSpec { n: 1, j: vec![0] }).unwrap();
        let emb = make_embed(EmbedSpec {
            n: 1,
            zeros: 1,
            ones: 0,
            positions: vec![],
        })
        .unwrap();
        let h = compose(&emb, &flip).unwrap();
        assert_eq!(h.apply(&[ratio(1, 4)]).unwrap(), vec![ratio(3, 4), int(0)]);
        assert_eq!(h.kind(), MapKind::Compose);
        let twice = compose(&flip, &flip).unwrap();
        assert_eq!(twice.matrix(), AffineMap::identity(1).matrix());
        assert_eq!(twice.offset(), AffineMap::identity(1).offset());
    }

    #[test]
    fn dup_image_of_segment() {
        let f = make_dup(DupSpec { n: 1, tuple: vec![0] }).unwrap();
        let img = apply_map_polytope(&f, &Polytope::unit_cube(1)).unwrap();
        assert_eq!(img.rows(), &[LinearConstraint::eq(vec![int(-1), int(1)], int(0))]);
        assert!(img.contains(&[ratio(1, 3), ratio(1, 3)]).unwrap());
        assert!(!img.contains(&[ratio(1, 3), ratio(1, 2)]).unwrap());
    }
}
