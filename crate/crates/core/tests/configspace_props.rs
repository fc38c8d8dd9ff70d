use neckstack::configspace::{
    check_hypotheses, forces, forces_reduced, jacobian, realize, reduce, Configuration, C64,
};
use proptest::prelude::*;

fn point() -> impl Strategy<Value = C64> {
    (-3.0..3.0f64, -3.0..3.0f64).prop_map(|(re, im)| C64::new(re, im))
}

/// Random configuration with level sizes in 1..=3 and levels spread vertically
/// so that points stay comfortably apart.
fn configuration() -> impl Strategy<Value = Configuration> {
    (prop::collection::vec(1usize..=3, 2..=5), -2i64..2)
        .prop_flat_map(|(sizes, first)| {
            let levels: Vec<_> = sizes
                .iter()
                .enumerate()
                .map(|(k, &n)| {
                    prop::collection::vec(point(), n).prop_map(move |pts| {
                        pts.into_iter()
                            .enumerate()
                            .map(|(i, p)| p * 0.3 + C64::new(1.5 * i as f64, 2.0 * k as f64))
                            .collect::<Vec<_>>()
                    })
                })
                .collect();
            (levels, Just(first))
        })
        .prop_filter_map("distinct", |(levels, first)| Configuration::new(first, levels).ok())
}

fn close(a: C64, b: C64, tol: f64) -> bool {
    (a - b).norm() <= tol
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn translation_invariance(cfg in configuration(), w in point()) {
        let a = forces(&cfg);
        let b = forces(&cfg.translated(w).unwrap());
        for (x, y) in a.stacked.iter().zip(&b.stacked) {
            prop_assert!(close(*x, *y, 1e-11 * (1.0 + x.norm())));
        }
    }

    #[test]
    fn scaling_covariance(cfg in configuration(), lam in point()) {
        prop_assume!(lam.norm() > 0.1);
        let a = forces(&cfg);
        let b = forces(&cfg.scaled(lam).unwrap());
        for (x, y) in a.stacked.iter().zip(&b.stacked) {
            prop_assert!(close(*x / lam, *y, 1e-11 * (1.0 + x.norm() / lam.norm())));
        }
    }

    #[test]
    fn conjugation_equivariance(cfg in configuration()) {
        let a = forces(&cfg);
        let b = forces(&cfg.conjugated().unwrap());
        for (x, y) in a.stacked.iter().zip(&b.stacked) {
            prop_assert!(close(x.conj(), *y, 1e-12 * (1.0 + x.norm())));
        }
    }

    #[test]
    fn telescoping(cfg in configuration()) {
        let fs = forces(&cfg);
        for k in cfg.levels() {
            if k == cfg.first_level() || k == cfg.last_level() {
                continue;
            }
            let sum: C64 = fs.level(k).iter().sum();
            let (g, gu) = (fs.g(k).unwrap(), fs.g(k + 1).unwrap());
            prop_assert!(close(sum, gu - g, 1e-12 * (1.0 + g.norm() + gu.norm())));
        }
    }

    #[test]
    fn stacked_length_matches_parameters(cfg in configuration()) {
        let rp = reduce(&cfg, cfg.first_level()).unwrap();
        prop_assert_eq!(forces(&cfg).stacked.len(), rp.stacked().len());
        prop_assert_eq!(jacobian(&rp).unwrap().dimension(), rp.stacked().len());
    }

    #[test]
    fn reduce_realize_round_trip(cfg in configuration(), k0 in 0usize..5) {
        let k0 = cfg.first_level() + (k0 % cfg.level_type().len()) as i64;
        let rp = reduce(&cfg, k0).unwrap();
        let back = realize(&rp).unwrap();
        for k in cfg.levels() {
            for (p, q) in cfg.level(k).iter().zip(back.level(k)) {
                prop_assert!(close(*p, *q, 1e-13));
            }
        }
        let a = forces(&cfg);
        let b = forces_reduced(&rp);
        for (x, y) in a.stacked.iter().zip(&b.stacked) {
            prop_assert!(close(*x, *y, 1e-11 * (1.0 + x.norm())));
        }
    }

    #[test]
    fn jacobian_matches_finite_differences(cfg in configuration()) {
        let rp = reduce(&cfg, cfg.first_level()).unwrap();
        let band = jacobian(&rp).unwrap();
        let dense = band.to_dense();
        let u0 = rp.stacked();
        let h = 1e-6;
        for col in 0..u0.len() {
            for dir in [C64::new(1.0, 0.0), C64::new(0.0, 1.0)] {
                let mut up = u0.clone();
                let mut dn = u0.clone();
                up[col] += dir * h;
                dn[col] -= dir * h;
                let fu = forces_reduced(&rp.with_stacked(&up).unwrap()).stacked;
                let fd = forces_reduced(&rp.with_stacked(&dn).unwrap()).stacked;
                for row in 0..u0.len() {
                    let fdiff = (fu[row] - fd[row]) / (2.0 * h);
                    let an = dense[(row, col)] * dir;
                    prop_assert!(
                        close(an, fdiff, 1e-6 * (1.0 + an.norm())),
                        "row {} col {}: {} vs {}", row, col, an, fdiff
                    );
                }
            }
        }
    }

    #[test]
    fn jacobian_is_tridiagonal_across_levels(cfg in configuration()) {
        let rp = reduce(&cfg, cfg.first_level()).unwrap();
        let band = jacobian(&rp).unwrap();
        let dense = band.to_dense();
        let lt = rp.level_type();
        for k in lt.levels() {
            for m in lt.levels() {
                if (k - m).abs() < 2 {
                    continue;
                }
                let (rk, rm) = ((k - lt.first()) as usize, (m - lt.first()) as usize);
                for r in 0..band.dims[rk] {
                    for c in 0..band.dims[rm] {
                        prop_assert_eq!(dense[(band.offsets[rk] + r, band.offsets[rm] + c)], C64::new(0.0, 0.0));
                    }
                }
            }
        }
    }

    #[test]
    fn within_level_relabeling_permutes_forces(cfg in configuration()) {
        let k = cfg.levels().find(|&k| cfg.n(k) >= 2);
        prop_assume!(k.is_some());
        let k = k.unwrap();
        let levels: Vec<Vec<C64>> = cfg
            .levels()
            .map(|m| {
                let mut v = cfg.level(m).to_vec();
                if m == k {
                    v.reverse();
                }
                v
            })
            .collect();
        let swapped = Configuration::new(cfg.first_level(), levels).unwrap();
        let a = forces(&cfg);
        let b = forces(&swapped);
        let n = cfg.n(k);
        for i in 0..n {
            prop_assert!(close(a.force(k, i), b.force(k, n - 1 - i), 1e-12 * (1.0 + a.force(k, i).norm())));
        }
    }
}

#[test]
fn repeated_block_is_finitely_valued() {
    let cot = 1.0 / 3f64.sqrt();
    let mut levels = vec![vec![C64::new(0.0, 0.0)]];
    for m in 0..6 {
        let base = C64::new(0.0, 2.0 * m as f64);
        levels.push(vec![base + C64::new(cot, 1.0), base + C64::new(-cot, 1.0)]);
        levels.push(vec![base + C64::new(0.0, 2.0)]);
    }
    let cfg = Configuration::new(0, levels).unwrap();
    let rep = check_hypotheses(&cfg);
    assert!(rep.finitely_valued);
    assert!(rep.passes);
    assert_eq!(rep.width, 2);
}
