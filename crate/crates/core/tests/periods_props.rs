use neckstack::balance::{builtin, Builtin};
use neckstack::configspace::{Configuration, C64};
use neckstack::periods::chart::{
    a_cycle_telescoping, a_period_lower, a_period_upper, square_residue_check, two_pi_i, ChartSet,
};
use neckstack::periods::laurent::{laurent, DEFAULT_CUTOFF};
use neckstack::periods::quadrature::{contour_integral, Circle, Contour, QuadOptions};
use neckstack::periods::rational::residue_of_product;
use neckstack::periods::{limit_balance, omega0, zero_alignment};
use proptest::prelude::*;

fn window(sizes: Vec<usize>) -> impl Strategy<Value = Configuration> {
    let levels: Vec<_> = sizes
        .into_iter()
        .enumerate()
        .map(|(k, n)| {
            prop::collection::vec((-1.0..1.0f64, -0.4..0.4f64), n).prop_map(move |v| {
                v.into_iter()
                    .enumerate()
                    .map(|(i, (x, y))| C64::new(x + 1.3 * i as f64, y + 1.1 * k as f64))
                    .collect::<Vec<_>>()
            })
        })
        .collect();
    (-3i64..3, levels).prop_filter_map("distinct", |(first, l)| Configuration::new(first, l).ok())
}

fn any_window() -> impl Strategy<Value = Configuration> {
    prop_oneof![
        window(vec![1, 1]),
        window(vec![1, 2, 1]),
        window(vec![2, 2, 3]),
        window(vec![1, 3, 1, 2]),
    ]
}

fn examples() -> Vec<Configuration> {
    let mut out: Vec<Configuration> = [
        Builtin::Fan { n: 2 },
        Builtin::Fan { n: 3 },
        Builtin::Ladder22,
        Builtin::Chain { a: [1.0, 0.5], h: 3 },
    ]
    .iter()
    .map(|b| builtin(b).unwrap().into_configuration())
    .collect();
    out.push(Configuration::new(-3, (-3..=3).map(|k| vec![C64::new(k as f64, 0.0)]).collect()).unwrap());
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn limit_balance_is_four_pi_i_force(cfg in any_window()) {
        let cs = ChartSet::central(&cfg).unwrap();
        let rep = limit_balance(&cs, &cfg).unwrap();
        prop_assert!(rep.passes, "deviation {}", rep.max_deviation);
    }

    #[test]
    fn compatible_omega_has_no_residue_at_infinity(cfg in any_window()) {
        let cs = ChartSet::central(&cfg).unwrap();
        for ch in cs.complete_spheres() {
            let w = omega0(ch).unwrap();
            prop_assert!(w.total_residue().norm() < 1e-13);
        }
    }
}

#[test]
fn residues_agree_with_quadrature_on_examples() {
    for cfg in examples() {
        let cs = ChartSet::central(&cfg).unwrap();
        for ch in &cs.charts {
            for node in ch.nodes() {
                let (exact, numeric) = square_residue_check(ch, node).unwrap();
                assert!((exact - numeric).norm() < 1e-10);
            }
            if ch.is_partial() {
                continue;
            }
            let g = ch.g_form();
            let w = omega0(ch).unwrap();
            let eps = neckstack::periods::chart::a_cycle_radius(ch);
            for &a in &ch.nodes_a {
                let exact = two_pi_i() * residue_of_product(&g, &w, a).unwrap();
                let numeric = contour_integral(
                    |z| g.eval(z) * w.eval(z),
                    &Contour::Circle(Circle::new(a, eps)),
                    QuadOptions::default(),
                )
                .unwrap()
                .value;
                assert!((exact - numeric).norm() < 1e-10);
            }
        }
    }
}

#[test]
fn a_period_orientation_on_examples() {
    for cfg in examples() {
        let cs = ChartSet::central(&cfg).unwrap();
        for k in cfg.levels() {
            let (lo, hi) = (cs.sphere(k).unwrap(), cs.sphere(k + 1).unwrap());
            for i in 0..cfg.n(k) {
                let up = a_period_upper(hi, i).unwrap();
                let down = a_period_lower(lo, i).unwrap();
                assert!((up - two_pi_i() * lo.gamma_a[i]).norm() < 1e-10);
                assert!((up - down).norm() < 1e-10);
            }
        }
        for ch in cs.complete_spheres() {
            assert!(a_cycle_telescoping(ch).unwrap().norm() < 1e-10);
            assert!((ch.leading_coefficient() - ch.fitted_leading_coefficient(1e4)).norm() < 1e-8);
            assert!(ch.leading_coefficient().norm() > 1e-8);
        }
    }
}

#[test]
fn zero_counts_on_examples() {
    for cfg in examples() {
        let cs = ChartSet::central(&cfg).unwrap();
        for ch in cs.complete_spheres() {
            let rep = zero_alignment(ch).unwrap();
            assert!(rep.passes, "sphere {}: {:?}", ch.level, rep);
        }
    }
}

#[test]
fn laurent_coefficients_bounded_and_decaying() {
    for cfg in examples() {
        let cs = ChartSet::central(&cfg).unwrap();
        for (k, i) in cs.interior_necks() {
            let b = laurent(cs.sphere(k).unwrap(), cs.sphere(k + 1).unwrap(), i, DEFAULT_CUTOFF).unwrap();
            assert!((b.c_plus(-1) + b.gamma).norm() < 1e-12);
            let bound = b.plus.iter().chain(&b.minus).map(|c| c.norm()).fold(0.0, f64::max);
            assert!(bound.is_finite());
            let late: Vec<f64> = (30..=DEFAULT_CUTOFF as i64).map(|n| b.c_plus(n).norm()).collect();
            assert!(late.windows(2).all(|w| w[1] <= w[0] + 1e-300));
        }
    }
}
