//! The p-cyclic multivalued map and the subsets it cycles through.
//!
//! Subset indices are 0-based here and wrap modulo `p`, so the successor of
//! the last subset is the first one. Reports and traces print them 1-based.

use thiserror::Error;

use crate::geometry::{
    check_dim, nearest_point, point_to_set_distance, set_distance, GeometryError, Point, Region, DEFAULT_TOL,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SystemError {
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("a cyclic system needs at least one subset")]
    NoSubsets,
    #[error("expected {expected} {what}, found {found}")]
    CountMismatch { what: &'static str, expected: usize, found: usize },
    #[error("constant k[{index}] must be finite and nonnegative, got {value}")]
    BadConstant { index: usize, value: f64 },
    #[error("product of constants ≥ 1 (got {0})")]
    ProductNotContractive(f64),
    #[error("image radius for subset {index} must be finite and nonnegative, got {value}")]
    BadRadius { index: usize, value: f64 },
    #[error("matrix for subset {index} must be {dim}x{dim}")]
    BadMatrix { index: usize, dim: usize },
    #[error("point {0:?} is outside cyclic union")]
    OutsideUnion(Vec<f64>),
    #[error("point {point:?} is not in the table domain of subset {subset}")]
    NotInTable { subset: usize, point: Vec<f64> },
    #[error("table image for subset {0} is empty")]
    EmptyImage(usize),
}

/// Affine rule `y(x) = offset + matrix · (x − anchor)` with a row-major
/// `d × d` matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct AffinePiece {
    pub anchor: Vec<f64>,
    pub offset: Vec<f64>,
    pub matrix: Vec<f64>,
}

impl AffinePiece {
    pub fn new(anchor: Vec<f64>, offset: Vec<f64>, matrix: Vec<f64>) -> Self {
        AffinePiece { anchor, offset, matrix }
    }

    /// The 1-D map `y = offset + slope · (x − anchor)`.
    pub fn scalar(anchor: f64, offset: f64, slope: f64) -> Self {
        AffinePiece { anchor: vec![anchor], offset: vec![offset], matrix: vec![slope] }
    }

    fn dim(&self) -> usize {
        self.anchor.len()
    }

    fn validate(&self, index: usize, d: usize) -> Result<(), SystemError> {
        check_dim(d, self.anchor.len())?;
        check_dim(d, self.offset.len())?;
        if self.matrix.len() != d * d {
            return Err(SystemError::BadMatrix { index, dim: d });
        }
        let all = self.anchor.iter().chain(&self.offset).chain(&self.matrix);
        if let Some(axis) = all.clone().position(|v| !v.is_finite()) {
            return Err(GeometryError::NonFinite { axis }.into());
        }
        Ok(())
    }

    /// Fails with `NonFinite` when the result overflows.
    pub fn eval(&self, x: &Point) -> Result<Point, GeometryError> {
        let d = self.dim();
        let shifted: Vec<f64> = x.coords().iter().zip(&self.anchor).map(|(a, b)| a - b).collect();
        let out = (0..d)
            .map(|r| {
                self.offset[r]
                    + self.matrix[r * d..(r + 1) * d].iter().zip(&shifted).map(|(m, s)| m * s).sum::<f64>()
            })
            .collect();
        Point::new(out)
    }
}

/// Explicit image of one domain point.
#[derive(Debug, Clone, PartialEq)]
pub struct TableEntry {
    pub point: Point,
    pub image: Vec<Point>,
}

/// The multivalued map `T`, one rule per subset.
#[derive(Debug, Clone, PartialEq)]
pub enum MultiMap {
    /// Singleton images `{y(x)}`.
    Affine(Vec<AffinePiece>),
    /// Ball images centred at `y(x)` with a per-subset radius.
    Ball(Vec<(AffinePiece, f64)>),
    /// Finite domain per subset with explicit image clouds.
    Table(Vec<Vec<TableEntry>>),
}

impl MultiMap {
    fn pieces(&self) -> usize {
        match self {
            MultiMap::Affine(v) => v.len(),
            MultiMap::Ball(v) => v.len(),
            MultiMap::Table(v) => v.len(),
        }
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            MultiMap::Affine(_) => "affine",
            MultiMap::Ball(_) => "ball",
            MultiMap::Table(_) => "table",
        }
    }

    fn validate(&self, d: usize) -> Result<(), SystemError> {
        match self {
            MultiMap::Affine(pieces) => {
                for (i, piece) in pieces.iter().enumerate() {
                    piece.validate(i, d)?;
                }
            }
            MultiMap::Ball(pieces) => {
                for (i, (piece, radius)) in pieces.iter().enumerate() {
                    piece.validate(i, d)?;
                    if !radius.is_finite() || *radius < 0.0 {
                        return Err(SystemError::BadRadius { index: i, value: *radius });
                    }
                }
            }
            MultiMap::Table(tables) => {
                for (i, entries) in tables.iter().enumerate() {
                    for entry in entries {
                        check_dim(d, entry.point.dim())?;
                        if entry.image.is_empty() {
                            return Err(SystemError::EmptyImage(i));
                        }
                        for y in &entry.image {
                            check_dim(d, y.dim())?;
                        }
                    }
                }
            }
        }
        Ok(())
    }
}

/// `p` compact subsets, the map cycling through them, and the constants
/// `k_i` of the contraction condition.
#[derive(Debug, Clone, PartialEq)]
pub struct CyclicSystem {
    subsets: Vec<Region>,
    map: MultiMap,
    constants: Vec<f64>,
    gaps: Vec<f64>,
    tol: f64,
}

impl CyclicSystem {
    pub fn new(subsets: Vec<Region>, map: MultiMap, constants: Vec<f64>) -> Result<Self, SystemError> {
        let p = subsets.len();
        if p == 0 {
            return Err(SystemError::NoSubsets);
        }
        let d = subsets[0].dim();
        for s in &subsets {
            check_dim(d, s.dim())?;
        }
        if map.pieces() != p {
            return Err(SystemError::CountMismatch { what: "map pieces", expected: p, found: map.pieces() });
        }
        map.validate(d)?;
        if constants.len() != p {
            return Err(SystemError::CountMismatch {
                what: "constants",
                expected: p,
                found: constants.len(),
            });
        }
        for (index, &value) in constants.iter().enumerate() {
            if !value.is_finite() || value < 0.0 {
                return Err(SystemError::BadConstant { index, value });
            }
        }
        let product: f64 = constants.iter().product();
        if product >= 1.0 {
            return Err(SystemError::ProductNotContractive(product));
        }
        let gaps = (0..p)
            .map(|i| set_distance(&subsets[i], &subsets[(i + 1) % p]))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(CyclicSystem { subsets, map, constants, gaps, tol: DEFAULT_TOL })
    }

    pub fn with_tolerance(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    /// Number of subsets `p`.
    pub fn len(&self) -> usize {
        self.subsets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.subsets.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.subsets[0].dim()
    }

    pub fn tol(&self) -> f64 {
        self.tol
    }

    pub fn subsets(&self) -> &[Region] {
        &self.subsets
    }

    pub fn subset(&self, i: usize) -> &Region {
        &self.subsets[i % self.len()]
    }

    pub fn map(&self) -> &MultiMap {
        &self.map
    }

    pub fn constants(&self) -> &[f64] {
        &self.constants
    }

    pub fn constant(&self, i: usize) -> f64 {
        self.constants[i % self.len()]
    }

    /// `k = Π k_i`.
    pub fn contraction_product(&self) -> f64 {
        self.constants.iter().product()
    }

    /// `D_i = d(A_i, A_{i+1})` for every subset.
    pub fn gaps(&self) -> &[f64] {
        &self.gaps
    }

    pub fn gap(&self, i: usize) -> f64 {
        self.gaps[i % self.len()]
    }

    /// `D = max_i D_i`.
    pub fn max_gap(&self) -> f64 {
        self.gaps.iter().copied().fold(0.0, f64::max)
    }

    pub fn next(&self, i: usize) -> usize {
        (i + 1) % self.len()
    }

    /// Smallest index of a subset containing `x` within tolerance.
    pub fn subset_index(&self, x: &Point) -> Result<usize, SystemError> {
        for (i, s) in self.subsets.iter().enumerate() {
            if point_to_set_distance(x, s)? <= self.tol {
                return Ok(i);
            }
        }
        Err(SystemError::OutsideUnion(x.coords().to_vec()))
    }

    /// Image `Tx` of a point known to sit at cyclic position `i`.
    pub fn apply_at(&self, i: usize, x: &Point) -> Result<Region, SystemError> {
        check_dim(self.dim(), x.dim())?;
        let i = i % self.len();
        Ok(match &self.map {
            MultiMap::Affine(pieces) => Region::singleton(pieces[i].eval(x)?),
            MultiMap::Ball(pieces) => {
                let (piece, radius) = &pieces[i];
                Region::ball(piece.eval(x)?, *radius)?
            }
            MultiMap::Table(tables) => {
                let entry = tables[i]
                    .iter()
                    .find(|e| e.point.approx_eq(x, self.tol))
                    .ok_or_else(|| SystemError::NotInTable { subset: i, point: x.coords().to_vec() })?;
                Region::cloud(entry.image.clone())?
            }
        })
    }

    /// Image `Tx` and the index of the subset it lands in.
    pub fn apply(&self, x: &Point) -> Result<(Region, usize), SystemError> {
        let i = self.subset_index(x)?;
        Ok((self.apply_at(i, x)?, self.next(i)))
    }

    /// Points where the map is evaluated when scanning subset `i`.
    ///
    /// Table maps are only defined on their listed domain, so those points
    /// replace the geometric sample.
    pub(crate) fn domain_sample(&self, i: usize, n: usize, seed: u64) -> Vec<Point> {
        match &self.map {
            MultiMap::Table(tables) => tables[i].iter().map(|e| e.point.clone()).collect(),
            _ => crate::geometry::sample(&self.subsets[i], n, seed),
        }
    }

    /// Nearest point of `Tx` to `x`, for `x` at position `i`.
    pub(crate) fn nearest_image_point(&self, i: usize, x: &Point) -> Result<Point, SystemError> {
        Ok(nearest_point(x, &self.apply_at(i, x)?)?)
    }
}
