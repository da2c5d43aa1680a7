use kmtlab_core::metrics::{exceedance_from_values, hellinger_affinity, wilson_interval};
use kmtlab_core::normal;
use kmtlab_core::*;
use proptest::prelude::*;
use rand::Rng;

fn dist(w: &[f64]) -> FiniteDist {
    FiniteDist::from_weights(w).unwrap()
}

proptest! {
    #[test]
    fn tv_is_a_metric(
        a in prop::collection::vec(0.01f64..1.0, 6),
        b in prop::collection::vec(0.01f64..1.0, 6),
        c in prop::collection::vec(0.01f64..1.0, 6),
    ) {
        let (p, q, r) = (dist(&a), dist(&b), dist(&c));
        let pq = tv_finite(&p, &q).unwrap();
        prop_assert_eq!(pq, tv_finite(&q, &p).unwrap());
        prop_assert!(pq <= tv_finite(&p, &r).unwrap() + tv_finite(&r, &q).unwrap() + 1e-14);
        prop_assert!(tv_finite(&p, &p).unwrap() < 1e-14);
        prop_assert!((0.0..=1.0).contains(&pq));
    }

    #[test]
    fn sup_is_symmetric_and_shift_invariant(
        a in prop::collection::vec(-1.0f64..1.0, 17),
        b in prop::collection::vec(-1.0f64..1.0, 17),
        s in prop::collection::vec(-1.0f64..1.0, 17),
    ) {
        let pa = DyadicPath::new(4, a.clone(), PathKind::Bridge).unwrap();
        let pb = DyadicPath::new(4, b.clone(), PathKind::Bridge).unwrap();
        let (d, t) = sup_distance(&pa, &pb).unwrap();
        prop_assert_eq!(sup_distance(&pb, &pa).unwrap(), (d, t));
        let brute = a.iter().zip(&b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
        prop_assert_eq!(d, brute);
        let sa = DyadicPath::new(4, a.iter().zip(&s).map(|(x, y)| x + y).collect(), PathKind::Bridge).unwrap();
        let sb = DyadicPath::new(4, b.iter().zip(&s).map(|(x, y)| x + y).collect(), PathKind::Bridge).unwrap();
        prop_assert!((sup_distance(&sa, &sb).unwrap().0 - d).abs() < 1e-14);
    }

    #[test]
    fn exceedance_is_monotone(v in prop::collection::vec(0.0f64..5.0, 1..50)) {
        let th: Vec<f64> = (0..20).map(|i| i as f64 * 0.3).collect();
        let c = exceedance_from_values(&v, &th);
        for w in c.survival.windows(2) {
            prop_assert!(w[1] <= w[0]);
        }
        for i in 0..th.len() {
            prop_assert!(c.lower[i] <= c.survival[i] && c.survival[i] <= c.upper[i]);
        }
    }
}

#[test]
fn wilson_interval_coverage() {
    let mut rng = seed_stream(40, 0, StreamRole::Auxiliary);
    for &p in &[0.02, 0.1, 0.4] {
        let trials = 2000;
        let covered = (0..trials)
            .filter(|_| {
                let k = (0..200).filter(|_| rng.random::<f64>() < p).count();
                let (lo, hi) = wilson_interval(k, 200);
                lo <= p && p <= hi
            })
            .count();
        let rate = covered as f64 / trials as f64;
        assert!(rate > 0.92, "coverage {rate} at p = {p}");
    }
}

/// Direct TV between two product Gaussians in 2-d by midpoint quadrature.
fn direct_tv_2d(a: [(f64, f64); 2], b: [(f64, f64); 2]) -> f64 {
    let dens = |(m, s): (f64, f64), x: f64| {
        (-(x - m).powi(2) / (2.0 * s * s)).exp() / (s * (2.0 * std::f64::consts::PI).sqrt())
    };
    let (lo, hi, k) = (-12.0, 12.0, 1200);
    let h = (hi - lo) / k as f64;
    let mut sum = 0.0;
    for i in 0..k {
        let x = lo + (i as f64 + 0.5) * h;
        for j in 0..k {
            let y = lo + (j as f64 + 0.5) * h;
            sum += (dens(a[0], x) * dens(a[1], y) - dens(b[0], x) * dens(b[1], y)).abs();
        }
    }
    0.5 * sum * h * h
}

#[test]
fn product_bound_dominates_direct_tv() {
    let cases = [
        ([(0.0, 1.0), (0.0, 1.0)], [(0.5, 1.0), (-0.3, 1.0)]),
        ([(0.0, 1.0), (1.0, 0.5)], [(0.0, 1.3), (1.2, 0.6)]),
        ([(2.0, 2.0), (0.0, 1.0)], [(0.0, 2.0), (0.0, 0.8)]),
    ];
    for (a, b) in cases {
        let la: Vec<Law1d> = a.iter().map(|&(mean, sd)| Law1d::Gaussian { mean, sd }).collect();
        let lb: Vec<Law1d> = b.iter().map(|&(mean, sd)| Law1d::Gaussian { mean, sd }).collect();
        let bound = tv_product_bound(&la, &lb).unwrap();
        let direct = direct_tv_2d(a, b);
        assert!(bound >= direct, "{bound} < {direct}");
    }
}

#[test]
fn product_bound_dominates_lattice_tv() {
    // Discrete against binned Gaussian: exact TV on the lattice is computable.
    for &(lambda, mu) in &[(4.0, 2.0), (16.0, 3.9), (1.0, 1.2), (30.0, 5.6)] {
        let a = Law1d::SqrtPoisson { lambda };
        let b = Law1d::Gaussian { mean: mu, sd: 0.5 };
        let bound = tv_product_bound(&[a], &[b]).unwrap();
        let tv: f64 = 0.5
            * (0..400u64)
                .map(|c| {
                    let p = kmtlab_core::coupling::quantile::poisson_pmf(lambda, c);
                    (p - kmtlab_core::coupling::lattice::gaussian_bin_mass(mu, 0.5, c)).abs()
                })
                .sum::<f64>();
        assert!(bound >= tv, "λ = {lambda}: {bound} < {tv}");
    }
}

#[test]
fn discretized_gaussian_affinity_against_itself_is_one() {
    // A lattice law built from binned Gaussian masses matches the Gaussian exactly.
    let (mean, sd) = (3.3, 0.5);
    let pmf: Vec<f64> =
        (0..200).map(|c| kmtlab_core::coupling::lattice::gaussian_bin_mass(mean, sd, c)).collect();
    let rho =
        hellinger_affinity(&Law1d::Lattice { lo: 0, pmf }, &Law1d::Gaussian { mean, sd }).unwrap();
    assert!((rho - 1.0).abs() < 1e-8);
    assert!(normal::cdf(0.0) == 0.5);
}

#[test]
fn unsupported_laws_are_rejected() {
    let bad = Law1d::SqrtBinomial { m: 4, p: 1.0 };
    let g = Law1d::Gaussian { mean: 0.0, sd: 1.0 };
    assert!(matches!(tv_product_bound(&[bad], &[g]), Err(Error::UnsupportedLaw(_))));
}

#[test]
fn rate_fit_with_perturbed_point() {
    let ns = [64u64, 256, 1024, 4096];
    let mut m: Vec<f64> = ns.iter().map(|&n| 0.7 * (n as f64).ln()).collect();
    m[2] *= 1.2;
    let r = rate_fit(&ns, &m).unwrap();
    assert!(r.residual > 0.0);
    let slopes: Vec<f64> = ns.iter().zip(&m).map(|(&n, y)| y / (n as f64).ln()).collect();
    let (lo, hi) = slopes.iter().fold((f64::MAX, f64::MIN), |(a, b), &s| (a.min(s), b.max(s)));
    assert!(r.d > lo && r.d < hi);
}
