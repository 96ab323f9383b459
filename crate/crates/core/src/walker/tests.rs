use nalgebra::Matrix2;
use proptest::prelude::*;

use super::*;
use crate::grid::TriLabel;

fn z(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// `e^{iφ} [[cos θ e^{iα}, sin θ e^{iβ}], [−sin θ e^{−iβ}, cos θ e^{−iα}]]`.
fn unitary(phi: f64, theta: f64, alpha: f64, beta: f64) -> Unitary2 {
    let g = Complex64::from_polar(1.0, phi);
    let (s, c) = theta.sin_cos();
    Matrix2::new(
        g * Complex64::from_polar(c, alpha),
        g * Complex64::from_polar(s, beta),
        g * Complex64::from_polar(-s, -beta),
        g * Complex64::from_polar(c, -alpha),
    )
}

fn spread_field(t: &mut Triangulation) -> Field {
    let mut f = Field::new();
    let o = t.origin();
    let a = t.neighbor_mat(o, Side::ONE).unwrap();
    let b = t.neighbor_mat(a, Side::TWO).unwrap();
    let vals = [(o, 0.3, -0.1), (a, 0.2, 0.4), (b, -0.5, 0.25)];
    for (i, (tri, re, im)) in vals.into_iter().enumerate() {
        f.set(Slot::new(tri, Side::from_idx(i)), z(re, im));
        f.set(Slot::new(tri, Side::from_idx(i + 1)), z(im, re));
    }
    let n = f.total_norm().sqrt();
    for (s, v) in f.nonzero_slots().collect::<Vec<_>>() {
        f.set(s, v / n);
    }
    f.compact();
    f
}

#[test]
fn origin_state() {
    let t = Triangulation::new_flat(2.0);
    let f = init_origin_state(&t);
    let c = CoinSet::default();
    assert!((f.total_norm() - 1.0).abs() < 1e-15);
    assert!((component_prob(&f, &t, &c, t.origin()).unwrap() - 1.0).abs() < 1e-15);
    let other = t.neighbor(t.origin(), Side::ONE).unwrap();
    assert_eq!(component_prob(&f, &t, &c, other).unwrap(), 0.0);
    assert_eq!(Field::new().total_norm(), 0.0);
}

#[test]
fn rotation_cycles_values() {
    let t = Triangulation::new_flat(1.0);
    let o = t.origin();
    let mut f = Field::new();
    let (a, b, c) = (z(1.0, 0.0), z(0.0, 2.0), z(-3.0, 0.5));
    f.set(Slot::new(o, Side::ONE), a);
    f.set(Slot::new(o, Side::TWO), b);
    f.set(Slot::new(o, Side::THREE), c);
    let before = f.total_norm();
    f.rotate_substep();
    assert_eq!(f.triangle(o), [c, a, b]);
    assert_eq!(f.total_norm(), before);
    f.rotate_substep();
    f.rotate_substep();
    assert_eq!(f.triangle(o), [a, b, c]);
}

#[test]
fn identity_coin_leaves_field_alone() {
    let mut t = Triangulation::new_flat(2.0);
    let mut f = spread_field(&mut t);
    let before: Vec<_> = f.nonzero_slots().collect();
    f.coin_substep(&mut t, &CoinSet::identity()).unwrap();
    let after: Vec<_> = f.nonzero_slots().collect();
    assert_eq!(before, after);
}

#[test]
fn swap_coin_exchanges_edge_slots() {
    let mut t = Triangulation::new_flat(2.0);
    let mut f = spread_field(&mut t);
    let x = Matrix2::new(z(0.0, 0.0), z(1.0, 0.0), z(1.0, 0.0), z(0.0, 0.0));
    let coins = CoinSet::identity().with_w(x).unwrap();
    let before = f.clone();
    f.coin_substep(&mut t, &coins).unwrap();
    for (slot, v) in before.nonzero_slots() {
        let p = partner(&t, slot).unwrap();
        assert_eq!(f.get(p), v);
    }
    for (slot, v) in f.nonzero_slots() {
        assert_eq!(before.get(partner(&t, slot).unwrap()), v);
    }
}

#[test]
fn coin_rejects_equal_spins_on_an_edge() {
    let mut t = Triangulation::new_flat(2.0);
    let f0 = init_origin_state(&t);
    let n = t.neighbor(t.origin(), Side::ONE).unwrap();
    t.force_label(n, TriLabel::UP);
    let mut f = f0.clone();
    let err = f.coin_substep(&mut t, &CoinSet::default()).unwrap_err();
    assert!(matches!(err, Error::SpinConflict { .. }));
}

#[test]
fn component_prob_sums_slot_probabilities() {
    let mut t = Triangulation::new_flat(2.0);
    let f = spread_field(&mut t);
    let c = CoinSet::default();
    for &tri in f.support() {
        let direct: f64 = Side::ALL.iter().map(|&k| f.get(Slot::new(tri, k)).norm_sqr()).sum();
        assert_eq!(component_prob(&f, &t, &c, tri).unwrap(), direct);
    }
}

#[test]
fn field_csv_is_sorted_with_header() {
    let mut t = Triangulation::new_flat(2.0);
    let f = spread_field(&mut t);
    let mut buf = Vec::new();
    write_field_csv(&f, &t, &CoinSet::default(), &mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("triangle,side,re,im"));
    let keys: Vec<(u32, u8)> = lines
        .map(|l| {
            let mut it = l.split(',');
            (it.next().unwrap().parse().unwrap(), it.next().unwrap().parse().unwrap())
        })
        .collect();
    assert_eq!(keys.len(), 6);
    assert!(keys.windows(2).all(|w| w[0] < w[1]));
}

proptest! {
    #[test]
    fn coin_preserves_norm(phi in 0.0..6.3f64, theta in 0.0..6.3f64, a in 0.0..6.3f64, b in 0.0..6.3f64) {
        let mut t = Triangulation::new_flat(2.0);
        let mut f = spread_field(&mut t);
        let coins = CoinSet::identity().with_w(unitary(phi, theta, a, b)).unwrap();
        for _ in 0..5 {
            f.rotate_substep();
            f.coin_substep(&mut t, &coins).unwrap();
        }
        prop_assert!((f.total_norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn gauge_round_trip(p in proptest::array::uniform12(0.0..6.3f64)) {
        let mut t = Triangulation::new_flat(2.0);
        let f = spread_field(&mut t);
        let u = [
            unitary(p[0], p[1], p[2], p[3]),
            unitary(p[4], p[5], p[6], p[7]),
            unitary(p[8], p[9], p[10], p[11]),
        ];
        let c = CoinSet::new(Matrix2::identity(), u).unwrap();
        let phys = gauge_to_physical(&f, &t, &c).unwrap();
        // Per-edge spinor norms survive the gauge change.
        for &tri in f.support() {
            for k in Side::ALL {
                let s = Slot::new(tri, k);
                let q = partner(&t, s).unwrap();
                let before = f.get(s).norm_sqr() + f.get(q).norm_sqr();
                let after = phys.get(s).norm_sqr() + phys.get(q).norm_sqr();
                prop_assert!((before - after).abs() < 1e-12);
            }
        }
        let back = physical_to_gauged(&phys, &t, &c).unwrap();
        for (s, v) in f.nonzero_slots() {
            prop_assert!((back.get(s) - v).norm() < 1e-12);
        }
        for (s, v) in back.nonzero_slots() {
            prop_assert!((f.get(s) - v).norm() < 1e-12);
        }
    }
}

#[test]
fn identity_gauge_is_passthrough() {
    let mut t = Triangulation::new_flat(2.0);
    let f = spread_field(&mut t);
    let phys = gauge_to_physical(&f, &t, &CoinSet::default()).unwrap();
    let a: Vec<_> = f.nonzero_slots().collect();
    let b: Vec<_> = phys.nonzero_slots().collect();
    assert_eq!(a, b);
}
