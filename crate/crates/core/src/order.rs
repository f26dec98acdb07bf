//! Partial orders on R^d and the order-induction rule used to certify
//! iterated sequences.

use thiserror::Error;

use crate::geometry::{check_dim, GeometryError, Point, DEFAULT_TOL};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OrderError {
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("order table is not antisymmetric: {0:?} and {1:?} precede each other")]
    Cycle(Vec<f64>, Vec<f64>),
    #[error("order table is empty")]
    EmptyTable,
    #[error("threshold {name} must be positive and finite, got {value}")]
    BadThreshold { name: String, value: f64 },
}

/// Explicit order given by generating pairs `x ⪯ y`, closed transitively.
#[derive(Debug, Clone, PartialEq)]
pub struct OrderTable {
    pairs: Vec<(Point, Point)>,
    nodes: Vec<Point>,
    reach: Vec<Vec<bool>>,
}

impl OrderTable {
    #[allow(clippy::needless_range_loop)]
    fn new(pairs: Vec<(Point, Point)>, tol: f64) -> Result<Self, OrderError> {
        let d = pairs.first().ok_or(OrderError::EmptyTable)?.0.dim();
        let mut nodes: Vec<Point> = Vec::new();
        let index_of = |p: &Point, nodes: &mut Vec<Point>| -> usize {
            match nodes.iter().position(|q| q.approx_eq(p, tol)) {
                Some(i) => i,
                None => {
                    nodes.push(p.clone());
                    nodes.len() - 1
                }
            }
        };
        let mut edges = Vec::with_capacity(pairs.len());
        for (x, y) in &pairs {
            check_dim(d, x.dim())?;
            check_dim(d, y.dim())?;
            let a = index_of(x, &mut nodes);
            let b = index_of(y, &mut nodes);
            edges.push((a, b));
        }
        let n = nodes.len();
        let mut reach = vec![vec![false; n]; n];
        for (a, b) in edges {
            reach[a][b] = true;
        }
        for k in 0..n {
            for i in 0..n {
                if reach[i][k] {
                    for j in 0..n {
                        if reach[k][j] {
                            reach[i][j] = true;
                        }
                    }
                }
            }
        }
        for i in 0..n {
            for j in 0..n {
                if i != j && reach[i][j] && reach[j][i] {
                    return Err(OrderError::Cycle(nodes[i].coords().to_vec(), nodes[j].coords().to_vec()));
                }
            }
        }
        Ok(OrderTable { pairs, nodes, reach })
    }

    pub fn pairs(&self) -> &[(Point, Point)] {
        &self.pairs
    }

    fn dim(&self) -> usize {
        self.nodes[0].dim()
    }

    fn precedes(&self, x: &Point, y: &Point, tol: f64) -> bool {
        let find = |p: &Point| self.nodes.iter().position(|q| q.approx_eq(p, tol));
        match (find(x), find(y)) {
            (Some(i), Some(j)) => self.reach[i][j],
            _ => false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum OrderKind {
    /// `x ⪯ y` iff every coordinate of `x` is at most the matching one of `y`.
    Componentwise,
    /// `x ⪯ y` iff `x = y` or `x[axis] < y[axis]`.
    Coordinate {
        axis: usize,
    },
    Table(OrderTable),
}

/// A partial order on R^d.
///
/// Coordinates within `tol` of each other compare as equal. With `strict`
/// set the relation drops its diagonal, so `leq(x, x)` is false.
#[derive(Debug, Clone, PartialEq)]
pub struct OrderRelation {
    pub kind: OrderKind,
    pub strict: bool,
    pub tol: f64,
}

impl Default for OrderRelation {
    fn default() -> Self {
        Self::componentwise()
    }
}

impl OrderRelation {
    pub fn componentwise() -> Self {
        OrderRelation { kind: OrderKind::Componentwise, strict: false, tol: DEFAULT_TOL }
    }

    pub fn coordinate(axis: usize) -> Self {
        OrderRelation { kind: OrderKind::Coordinate { axis }, strict: false, tol: DEFAULT_TOL }
    }

    pub fn table(pairs: Vec<(Point, Point)>) -> Result<Self, OrderError> {
        Ok(OrderRelation {
            kind: OrderKind::Table(OrderTable::new(pairs, DEFAULT_TOL)?),
            strict: false,
            tol: DEFAULT_TOL,
        })
    }

    pub fn with_strict(mut self, strict: bool) -> Self {
        self.strict = strict;
        self
    }

    pub fn kind_name(&self) -> &'static str {
        match self.kind {
            OrderKind::Componentwise => "componentwise",
            OrderKind::Coordinate { .. } => "coordinate",
            OrderKind::Table(_) => "table",
        }
    }

    /// Whether `x ⪯ y`.
    pub fn leq(&self, x: &Point, y: &Point) -> Result<bool, GeometryError> {
        check_dim(x.dim(), y.dim())?;
        if x.approx_eq(y, self.tol) {
            return Ok(!self.strict);
        }
        Ok(match &self.kind {
            OrderKind::Componentwise => x.coords().iter().zip(y.coords()).all(|(a, b)| *a <= *b + self.tol),
            OrderKind::Coordinate { axis } => {
                if *axis >= x.dim() {
                    return Err(GeometryError::DimensionMismatch { expected: axis + 1, found: x.dim() });
                }
                x.coords()[*axis] < y.coords()[*axis]
            }
            OrderKind::Table(table) => {
                check_dim(table.dim(), x.dim())?;
                table.precedes(x, y, self.tol)
            }
        })
    }

    /// `x ⪯ y` or `y ⪯ x`.
    pub fn comparable(&self, x: &Point, y: &Point) -> Result<bool, GeometryError> {
        Ok(self.leq(x, y)? || self.leq(y, x)?)
    }
}

/// Distance thresholds: a global `d0` and one `d0i` per subset.
#[derive(Debug, Clone, PartialEq)]
pub struct OrderThresholds {
    pub d0: f64,
    pub d0i: Vec<f64>,
}

impl OrderThresholds {
    pub fn new(d0: f64, d0i: Vec<f64>) -> Result<Self, OrderError> {
        let check = |name: String, value: f64| {
            if value.is_finite() && value > 0.0 {
                Ok(())
            } else {
                Err(OrderError::BadThreshold { name, value })
            }
        };
        check("d0".into(), d0)?;
        for (i, v) in d0i.iter().enumerate() {
            check(format!("d0i[{i}]"), *v)?;
        }
        Ok(OrderThresholds { d0, d0i })
    }

    /// Order-generation rule: a successor `y ∈ Tx` strictly closer than
    /// `d0` to `x` is recorded as `x ⪯ y`.
    pub fn induces_order(&self, y_in_image: bool, dist: f64) -> bool {
        y_in_image && dist < self.d0
    }
}

/// Outcome of checking that a sequence is a nondecreasing chain.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ChainCheck {
    pub ordered: bool,
    /// Index `t` of the first pair with `seq[t] ⋠ seq[t + 1]`.
    pub first_violation: Option<usize>,
}

pub fn verify_chain(order: &OrderRelation, seq: &[Point]) -> Result<ChainCheck, GeometryError> {
    for (t, w) in seq.windows(2).enumerate() {
        if !order.leq(&w[0], &w[1])? {
            return Ok(ChainCheck { ordered: false, first_violation: Some(t) });
        }
    }
    Ok(ChainCheck { ordered: true, first_violation: None })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(c: &[f64]) -> Point {
        Point::new(c.to_vec()).unwrap()
    }

    #[test]
    fn componentwise_examples() {
        let o = OrderRelation::componentwise();
        assert!(o.leq(&p(&[0.0, 0.0]), &p(&[1.0, 1.0])).unwrap());
        assert!(!o.leq(&p(&[0.0, 1.0]), &p(&[1.0, 0.0])).unwrap());
        assert!(!o.leq(&p(&[1.0, 0.0]), &p(&[0.0, 1.0])).unwrap());
        assert!(o.leq(&p(&[0.3, 0.7]), &p(&[0.3, 0.7])).unwrap());
        assert!(o.leq(&p(&[0.0]), &p(&[0.0, 1.0])).is_err());
    }

    #[test]
    fn strict_drops_diagonal() {
        let o = OrderRelation::componentwise().with_strict(true);
        assert!(!o.leq(&p(&[1.0]), &p(&[1.0])).unwrap());
        assert!(o.leq(&p(&[1.0]), &p(&[2.0])).unwrap());
    }

    #[test]
    fn coordinate_order() {
        let o = OrderRelation::coordinate(1);
        assert!(o.leq(&p(&[5.0, 0.0]), &p(&[-5.0, 1.0])).unwrap());
        assert!(!o.leq(&p(&[0.0, 1.0]), &p(&[1.0, 1.0])).unwrap());
        assert!(!o.leq(&p(&[1.0, 1.0]), &p(&[0.0, 1.0])).unwrap());
        assert!(OrderRelation::coordinate(3).leq(&p(&[0.0]), &p(&[1.0])).is_err());
    }

    #[test]
    fn table_order_is_transitively_closed() {
        let o = OrderRelation::table(vec![(p(&[0.0]), p(&[1.0])), (p(&[1.0]), p(&[2.0]))]).unwrap();
        assert!(o.leq(&p(&[0.0]), &p(&[2.0])).unwrap());
        assert!(!o.leq(&p(&[2.0]), &p(&[0.0])).unwrap());
        assert!(!o.leq(&p(&[0.0]), &p(&[7.0])).unwrap());
        assert!(o.leq(&p(&[7.0]), &p(&[7.0])).unwrap());
    }

    #[test]
    fn table_order_rejects_cycles() {
        let err = OrderRelation::table(vec![
            (p(&[0.0]), p(&[1.0])),
            (p(&[1.0]), p(&[2.0])),
            (p(&[2.0]), p(&[0.0])),
        ]);
        assert!(matches!(err, Err(OrderError::Cycle(..))));
        assert_eq!(OrderRelation::table(vec![]), Err(OrderError::EmptyTable));
    }

    #[test]
    fn induction_rule() {
        let t = OrderThresholds::new(1.0, vec![1.0, 1.0]).unwrap();
        assert!(t.induces_order(true, 0.5));
        assert!(!t.induces_order(false, 0.5));
        assert!(!t.induces_order(false, 100.0));
        assert!(!t.induces_order(true, 1.0));
    }

    #[test]
    fn thresholds_validate() {
        assert!(OrderThresholds::new(0.0, vec![]).is_err());
        assert!(OrderThresholds::new(1.0, vec![1.0, -2.0]).is_err());
        assert!(OrderThresholds::new(f64::INFINITY, vec![]).is_err());
    }

    #[test]
    fn chain_examples() {
        let o = OrderRelation::componentwise();
        let ok = verify_chain(&o, &[p(&[0.0]), p(&[0.5]), p(&[1.0])]).unwrap();
        assert_eq!(ok, ChainCheck { ordered: true, first_violation: None });
        let bad = verify_chain(&o, &[p(&[0.0]), p(&[1.0]), p(&[0.5])]).unwrap();
        assert_eq!(bad, ChainCheck { ordered: false, first_violation: Some(1) });
        assert!(verify_chain(&o, &[p(&[3.0])]).unwrap().ordered);
    }
}
