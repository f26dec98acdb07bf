use bestprox::geometry::Point;
use bestprox::order::{verify_chain, OrderRelation, OrderThresholds};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn p(c: &[f64]) -> Point {
    Point::new(c.to_vec()).unwrap()
}

/// Coarse grid so that comparable and equal pairs actually occur.
fn points(n: usize, d: usize, seed: u64) -> Vec<Point> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| p(&(0..d).map(|_| rng.gen_range(0..4) as f64 * 0.5).collect::<Vec<_>>())).collect()
}

fn assert_partial_order(o: &OrderRelation, pts: &[Point]) {
    for x in pts {
        assert!(o.leq(x, x).unwrap(), "reflexivity at {x:?}");
    }
    // Windows keep the cubic transitivity loop small.
    for w in pts.chunks(40) {
        for x in w {
            for y in w {
                let xy = o.leq(x, y).unwrap();
                if xy && o.leq(y, x).unwrap() {
                    assert!(x.approx_eq(y, o.tol), "antisymmetry {x:?} {y:?}");
                }
                if !xy {
                    continue;
                }
                for z in w {
                    if o.leq(y, z).unwrap() {
                        assert!(o.leq(x, z).unwrap(), "transitivity {x:?} {y:?} {z:?}");
                    }
                }
            }
        }
    }
}

#[test]
fn componentwise_is_a_partial_order() {
    for d in 1..=3 {
        assert_partial_order(&OrderRelation::componentwise(), &points(1000, d, d as u64));
    }
}

#[test]
fn coordinate_order_is_a_partial_order() {
    for axis in 0..2 {
        assert_partial_order(&OrderRelation::coordinate(axis), &points(1000, 2, 40 + axis as u64));
    }
}

#[test]
fn table_order_is_a_partial_order() {
    let nodes: Vec<Point> = (0..12).map(|i| p(&[i as f64, (i * 7 % 5) as f64])).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    // Edges only go forward in index, so the table is acyclic.
    let pairs: Vec<(Point, Point)> = (0..30)
        .filter_map(|_| {
            let a = rng.gen_range(0..nodes.len());
            let b = rng.gen_range(0..nodes.len());
            (a < b).then(|| (nodes[a].clone(), nodes[b].clone()))
        })
        .collect();
    assert_partial_order(&OrderRelation::table(pairs).unwrap(), &nodes);
}

#[test]
fn table_order_closes_transitively() {
    let (a, b, c) = (p(&[0.0]), p(&[1.0]), p(&[2.0]));
    let o = OrderRelation::table(vec![(a.clone(), b.clone()), (b.clone(), c.clone())]).unwrap();
    assert!(o.leq(&a, &c).unwrap());
    assert!(!o.leq(&c, &a).unwrap());
    assert!(OrderRelation::table(vec![(a.clone(), b.clone()), (b, a)]).is_err());
}

#[test]
fn strict_order_is_irreflexive_and_transitive() {
    let o = OrderRelation::componentwise().with_strict(true);
    let pts = points(300, 2, 99);
    for x in &pts {
        assert!(!o.leq(x, x).unwrap());
    }
    for x in pts.iter().take(40) {
        for y in pts.iter().take(40) {
            for z in pts.iter().take(40) {
                if o.leq(x, y).unwrap() && o.leq(y, z).unwrap() {
                    assert!(o.leq(x, z).unwrap());
                }
            }
        }
    }
}

#[test]
fn chain_verification() {
    let o = OrderRelation::componentwise();
    let up = [p(&[0.0, 0.0]), p(&[0.5, 0.0]), p(&[0.5, 1.0])];
    let check = verify_chain(&o, &up).unwrap();
    assert!(check.ordered);
    let broken = [p(&[0.0, 0.0]), p(&[0.5, 0.0]), p(&[0.4, 1.0])];
    let check = verify_chain(&o, &broken).unwrap();
    assert_eq!((check.ordered, check.first_violation), (false, Some(1)));
    assert!(verify_chain(&o, &[]).unwrap().ordered);
}

#[test]
fn order_induction_thresholds() {
    let t = OrderThresholds::new(1.5, vec![1.5, 1.5]).unwrap();
    assert!(t.induces_order(true, 1.0));
    assert!(!t.induces_order(true, 1.5));
    assert!(!t.induces_order(false, 0.1));
    assert!(OrderThresholds::new(0.0, vec![1.0]).is_err());
    assert!(OrderThresholds::new(1.0, vec![f64::NAN]).is_err());
}
