//! Invariants of every module, checked over generated inputs.

use fframe_core::beurling::{
    default_dimension_radii, dimension, dimension_with_shape, WindowShape,
};
use fframe_core::frame::{
    frame_bounds, gram_matrix, CylinderFunction, FrameReport, GramAccumulator,
};
use fframe_core::ifs::{AffineIfs, TruncationBudget};
use fframe_core::linalg::hermitian_extremes;
use fframe_core::measure::{
    convolve, discretize, make_atomic, mollify, AtomicMeasure, DensityMeasure, Measure, PointRule,
};
use fframe_core::reconstruct::{fourier_reconstruct, SplitSystem};
use fframe_core::{cis_turns, Complex64};
use proptest::prelude::*;

const TOL: f64 = 1e-12;

fn budget() -> TruncationBudget {
    TruncationBudget::default()
}

fn mu4() -> AffineIfs {
    AffineIfs::new(4, &[0, 2]).unwrap()
}

fn mu4_dual() -> AffineIfs {
    AffineIfs::new(4, &[0, 1]).unwrap()
}

fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1e-300)
}

fn atomic_strategy() -> impl Strategy<Value = AtomicMeasure> {
    prop::collection::vec((-200i32..200, 0.01f64..3.0), 1..40).prop_map(|pairs| {
        let pts: Vec<f64> = pairs.iter().map(|p| p.0 as f64 * 0.25).collect();
        let ws: Vec<f64> = pairs.iter().map(|p| p.1).collect();
        make_atomic(&pts, &ws).unwrap()
    })
}

fn density_strategy() -> impl Strategy<Value = DensityMeasure> {
    (
        -20i32..20,
        prop::sample::select(vec![0.125, 0.25, 0.5, 1.0]),
        prop::collection::vec(0.0f64..2.0, 1..30),
    )
        .prop_map(|(s, h, m)| DensityMeasure::new(s as f64 * 0.5, h, m).unwrap())
}

fn measure_strategy() -> impl Strategy<Value = Measure> {
    prop_oneof![
        atomic_strategy().prop_map(Measure::from),
        density_strategy().prop_map(Measure::from),
        (atomic_strategy(), density_strategy())
            .prop_map(|(a, d)| Measure::sum(vec![a.into(), d.into()])),
    ]
}

/// Systems in the no-overlap regime with small digit sets.
fn ifs_strategy() -> impl Strategy<Value = AffineIfs> {
    (2i64..10)
        .prop_flat_map(|r| {
            (
                Just(r),
                prop::collection::btree_set(-12i64..12, 1..=r as usize),
            )
        })
        .prop_filter_map("digits must be distinct mod R", |(r, set)| {
            let d: Vec<i64> = set.into_iter().collect();
            AffineIfs::new(r, &d).ok().filter(|s| s.distinct_mod_r())
        })
}

// measure

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn discretize_conserves_mass(nu in measure_strategy(), r in 0.1f64..4.0) {
        for rule in [PointRule::Left, PointRule::Center] {
            let d = discretize(&nu, r, rule).unwrap();
            prop_assert!(rel_close(d.total_mass(), nu.total_mass(), 1e-12));
        }
    }

    #[test]
    fn mollify_conserves_mass(nu in measure_strategy(), w in prop::sample::select(vec![0.25, 0.5, 1.0, 2.0])) {
        let m = mollify(&nu, w).unwrap();
        prop_assert!(rel_close(m.total_mass(), nu.total_mass(), 1e-12));
    }

    #[test]
    fn convolution_with_probability_conserves_mass(nu in measure_strategy(), rho in measure_strategy()) {
        let p = rho.total_mass();
        prop_assume!(p > 0.0);
        let c = convolve(&nu, &rho);
        prop_assert!(rel_close(c.total_mass(), nu.total_mass() * p, 1e-12));
    }

    #[test]
    fn discretize_is_idempotent(nu in measure_strategy(), k in 1i32..16) {
        let r = k as f64 * 0.25;
        let once = discretize(&nu, r, PointRule::Left).unwrap();
        let twice = discretize(&once.clone().into(), r, PointRule::Left).unwrap();
        prop_assert_eq!(once.points(), twice.points());
        for (a, b) in once.weights().iter().zip(twice.weights()) {
            prop_assert!(rel_close(*a, *b, 1e-12));
        }
    }

    #[test]
    fn window_shapes_bracket_each_other(nu in measure_strategy(), r in 0.1f64..10.0) {
        // every half-open window of length r sits inside a closed one, and
        // every closed window inside a half-open one of length r + ε
        let co = nu.sup_window_mass(r);
        let oc = nu.reflect().sup_window_mass(r);
        prop_assert!(co <= nu.sup_window_mass(r * (1.0 + 1e-6) + 1e-9) + 1e-12);
        prop_assert!(oc <= nu.sup_window_mass(r * (1.0 + 1e-6) + 1e-9) + 1e-12);
        prop_assert!(co <= nu.total_mass() + 1e-12);
    }
}

#[test]
fn local_finiteness_of_dual_weights() {
    let nu: Measure = mu4_dual().dual_weights_integers(10_000, &budget()).into();
    let sup = nu.sup_window_mass(1.0);
    assert!(sup <= 10.0, "{sup}");
    // integer atoms of weight at most 1
    assert!(sup <= 1.0 + 1e-12);
}

#[test]
fn convolution_keeps_bessel_bound() {
    let b = budget();
    let rho = make_atomic(&[0.0, 0.3, 1.7], &[0.5, 0.25, 0.25]).unwrap();
    let catalog: Vec<(AffineIfs, AtomicMeasure)> = vec![
        (mu4(), mu4_dual().dual_weights_integers(128, &b)),
        (
            AffineIfs::new(2, &[0, 1]).unwrap(),
            AtomicMeasure::integer_comb(64),
        ),
        (
            AffineIfs::new(3, &[0, 2]).unwrap(),
            make_atomic(&[-3.0, 0.0, 2.5, 7.0], &[1.0, 2.0, 0.5, 1.0]).unwrap(),
        ),
    ];
    for (ifs, nu) in &catalog {
        let conv = match convolve(&nu.clone().into(), &rho.clone().into()) {
            Measure::Atomic(a) => a,
            other => panic!("atomic convolution expected, got {other:?}"),
        };
        for n in 1..=3 {
            let before = frame_bounds(ifs, n, nu, &b).unwrap();
            let after = frame_bounds(ifs, n, &conv, &b).unwrap();
            assert!(
                after.upper <= before.upper + 1e-6,
                "n={n}: {} > {}",
                after.upper,
                before.upper
            );
        }
    }
}

// ifs

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn truncation_is_certified(ifs in ifs_strategy(), ts in prop::collection::vec(-1e3f64..1e3, 16)) {
        let fine = TruncationBudget::new(TOL / 100.0).unwrap();
        for t in ts {
            let a = ifs.ft_invariant(t, &budget());
            let b = ifs.ft_invariant(t, &fine);
            prop_assert!((a - b).norm() <= TOL, "t={}", t);
        }
    }

    #[test]
    fn refinement_identity(ifs in ifs_strategy(), t in -1e3f64..1e3) {
        let r = ifs.scale() as f64;
        let n = ifs.digit_count() as f64;
        let m: Complex64 = ifs.digits().iter().map(|&b| cis_turns(-t / r * b as f64)).sum::<Complex64>() / n;
        let lhs = ifs.ft_invariant(t, &budget());
        let rhs = m * ifs.ft_invariant(t / r, &budget());
        prop_assert!((lhs - rhs).norm() <= 2.0 * TOL);
    }

    #[test]
    fn partition_identity(ifs in ifs_strategy(), level in 0usize..=5, t in -500f64..500.0) {
        prop_assume!(ifs.digit_count().pow(level as u32) <= 4096);
        let total: Complex64 = ifs
            .words(level)
            .iter()
            .map(|w| ifs.ft_cylinder(w, t, &budget()).unwrap())
            .sum();
        let whole = ifs.ft_invariant(t, &budget());
        prop_assert!((total - whole).norm() <= (level.max(1) as f64) * TOL, "{} vs {}", total, whole);
    }

    #[test]
    fn complements_are_valid(ifs in ifs_strategy()) {
        let r = ifs.scale();
        for c in ifs.find_complement(2 * r) {
            prop_assert_eq!(c.len() * ifs.digit_count(), r as usize);
            let mut hit: Vec<i64> = ifs
                .digits()
                .iter()
                .flat_map(|b| c.iter().map(move |c| (b + c).rem_euclid(r)))
                .collect();
            hit.sort_unstable();
            hit.dedup();
            prop_assert_eq!(hit.len(), r as usize);
        }
    }
}

fn is_zero_set_integer(z: i64) -> bool {
    // z = 4^m (4k + 2)
    if z == 0 {
        return false;
    }
    let mut z = z;
    while z % 4 == 0 {
        z /= 4;
    }
    z.rem_euclid(4) == 2
}

#[test]
fn zero_set_law() {
    let ifs = mu4_dual();
    for z in -10_000i64..=10_000 {
        let v = ifs.ft_invariant(z as f64, &budget()).norm();
        if is_zero_set_integer(z) {
            assert!(v < 1e-8, "{z}: {v}");
        } else {
            assert!(v > 1e-8, "{z}: {v}");
        }
    }
}

// frame

fn catalog() -> Vec<(AffineIfs, AtomicMeasure, &'static str)> {
    let b = budget();
    vec![
        (
            mu4(),
            mu4_dual().dual_weights_integers(256, &b),
            "mu4 / dual(mu4')",
        ),
        (
            AffineIfs::new(2, &[0, 1]).unwrap(),
            AtomicMeasure::integer_comb(128),
            "lebesgue / comb",
        ),
        (
            AffineIfs::new(3, &[0, 2]).unwrap(),
            AtomicMeasure::integer_comb(64),
            "mu3 / comb",
        ),
    ]
}

fn bounds(ifs: &AffineIfs, n: usize, nu: &AtomicMeasure) -> FrameReport {
    frame_bounds(ifs, n, nu, &budget()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn gram_is_psd(nu in atomic_strategy(), level in 0usize..=3) {
        let g = gram_matrix(&mu4(), level, &nu, &budget()).unwrap();
        prop_assert!(g.hermitian_residual() <= 1e-12 * g.max_abs().max(1.0));
        let e = hermitian_extremes(&g, 1e-10).unwrap();
        prop_assert!(e.lambda_min >= -1e-10 * g.frobenius_norm().max(1.0));
    }

    #[test]
    fn adding_atoms_never_lowers_bounds(nu in atomic_strategy(), extra in atomic_strategy()) {
        let both = make_atomic(
            &nu.points().iter().chain(extra.points()).copied().collect::<Vec<_>>(),
            &nu.weights().iter().chain(extra.weights()).copied().collect::<Vec<_>>(),
        ).unwrap();
        for n in 1..=2 {
            let a = bounds(&mu4(), n, &nu);
            let b = bounds(&mu4(), n, &both);
            prop_assert!(b.lower >= a.lower - 1e-10);
            prop_assert!(b.upper >= a.upper - 1e-10);
        }
    }

    #[test]
    fn modulation_two_route_identity(nu in atomic_strategy(), s in -20f64..20.0, level in 1usize..=3) {
        // Gram of ν translated by s equals the modulated-subspace Gram of ν
        // conjugated by the diagonal unitary diag(e^{-2πi s a_w}).
        let ifs = mu4();
        let b = budget();
        let direct = gram_matrix(&ifs, level, &nu.translate(s), &b).unwrap();
        let mut acc = GramAccumulator::with_modulation(&ifs, level, b, s).unwrap();
        acc.add_measure(&nu);
        let modulated = acc.finish();
        let phases: Vec<Complex64> = ifs.words(level).iter().map(|w| cis_turns(-s * ifs.anchor(w))).collect();
        let conj = modulated.conjugate_by_diagonal(&phases);
        for (x, y) in direct.as_slice().iter().zip(conj.as_slice()) {
            prop_assert!((x - y).norm() <= 1e-9 * direct.max_abs().max(1.0));
        }
        let e1 = hermitian_extremes(&direct, 1e-10).unwrap();
        let e2 = hermitian_extremes(&modulated, 1e-10).unwrap();
        let scale = direct.max_abs().max(1.0);
        prop_assert!((e1.lambda_min - e2.lambda_min).abs() <= 1e-9 * scale);
        prop_assert!((e1.lambda_max - e2.lambda_max).abs() <= 1e-9 * scale);
    }
}

#[test]
fn bounds_monotone_in_lambda() {
    let b = budget();
    for (ifs, nu_of) in [
        (
            mu4(),
            Box::new(|l| mu4_dual().dual_weights_integers(l, &b))
                as Box<dyn Fn(i64) -> AtomicMeasure>,
        ),
        (
            AffineIfs::new(2, &[0, 1]).unwrap(),
            Box::new(AtomicMeasure::integer_comb),
        ),
    ] {
        for n in 1..=3 {
            let mut prev: Option<FrameReport> = None;
            for k in 1..=9 {
                let r = bounds(&ifs, n, &nu_of(1 << k));
                if let Some(p) = &prev {
                    assert!(r.lower >= p.lower - 1e-12, "n={n} Λ=2^{k}");
                    assert!(r.upper >= p.upper - 1e-12, "n={n} Λ=2^{k}");
                }
                prev = Some(r);
            }
        }
    }
}

#[test]
fn subspace_consistency() {
    for (ifs, nu, name) in catalog() {
        let reports: Vec<FrameReport> = (0..=4)
            .filter(|&n| ifs.digit_count().pow(n as u32) <= 64)
            .map(|n| bounds(&ifs, n, &nu))
            .collect();
        for w in reports.windows(2) {
            assert!(
                w[1].lower <= w[0].lower + 1e-10,
                "{name}: level {}",
                w[1].level
            );
            assert!(
                w[1].upper >= w[0].upper - 1e-10,
                "{name}: level {}",
                w[1].level
            );
        }
    }
}

#[test]
fn parseval_ceiling() {
    // (R, B, C) with B ⊕ C a complete residue system and ℤ a spectrum of μ_D
    let b = budget();
    let systems = [
        (4, vec![0, 2], vec![0, 1]),
        (4, vec![0, 2], vec![0, 3]),
        (9, vec![0, 1, 2], vec![0, 3, 6]),
        (6, vec![0, 3], vec![0, 1, 2]),
        (2, vec![0, 1], vec![0]),
    ];
    for (r, bd, cd) in systems {
        let sys = SplitSystem::new(
            AffineIfs::new(r, &bd).unwrap(),
            AffineIfs::new(r, &cd).unwrap(),
        )
        .unwrap();
        assert!(sys.combined().integer_spectrum_residual(100, &b) < 1e-8);
        for lambda in [8, 64, 512] {
            let nu = sys.complement().dual_weights_integers(lambda, &b);
            for n in 1..=3 {
                if sys.base().digit_count().pow(n as u32) > 512 {
                    continue;
                }
                let rep = frame_bounds(sys.base(), n, &nu, &b).unwrap();
                assert!(
                    rep.upper <= 1.0 + 10.0 * TOL,
                    "R={r} B={bd:?} Λ={lambda} n={n}: {}",
                    rep.upper
                );
            }
        }
    }
}

#[test]
fn bessel_transfer() {
    let b = budget();
    for (r, bd, cd) in [
        (4, vec![0, 2], vec![0, 1]),
        (9, vec![0, 1, 2], vec![0, 3, 6]),
    ] {
        let sys = SplitSystem::new(
            AffineIfs::new(r, &bd).unwrap(),
            AffineIfs::new(r, &cd).unwrap(),
        )
        .unwrap();
        for lambda in [16, 128] {
            let comb = AtomicMeasure::integer_comb(lambda);
            let weighted = sys.complement().dual_weights_integers(lambda, &b);
            for n in 1..=2 {
                let base = frame_bounds(sys.base(), n, &weighted, &b).unwrap();
                let tile = frame_bounds(sys.combined(), n, &comb, &b).unwrap();
                assert!(base.upper <= tile.upper + 1e-6, "R={r} Λ={lambda} n={n}");
            }
        }
    }
}

#[test]
fn discretization_preserves_frame_bounds() {
    let b = budget();
    let nu: Measure = DensityMeasure::lebesgue(-64.0, 1.0, 128).unwrap().into();
    for n in 1..=2 {
        let reports: Vec<FrameReport> = (1..=6)
            .map(|k| {
                let d = discretize(&nu, 0.5f64.powi(k), PointRule::Center).unwrap();
                frame_bounds(&mu4(), n, &d, &b).unwrap()
            })
            .collect();
        let diffs: Vec<f64> = reports
            .windows(2)
            .map(|w| (w[1].lower - w[0].lower).abs() + (w[1].upper - w[0].upper).abs())
            .collect();
        for w in diffs.windows(2) {
            assert!(w[1] < w[0], "n={n} {diffs:?}");
        }
        let fine = reports.last().unwrap();
        for r in &reports {
            assert!(r.lower > 0.0);
            assert!(rel_close(r.lower, fine.lower, 0.05), "n={n} {} vs {}", r.lower, fine.lower);
            assert!(rel_close(r.upper, fine.upper, 0.05), "n={n} {} vs {}", r.upper, fine.upper);
        }
    }
}

// beurling

fn dimension_catalog() -> Vec<(&'static str, Measure)> {
    let b = budget();
    vec![
        ("comb", AtomicMeasure::integer_comb(20_000).into()),
        (
            "dual(mu4')",
            mu4_dual().dual_weights_integers(4i64.pow(7), &b).into(),
        ),
        (
            "dual(9,{0,3})",
            AffineIfs::new(9, &[0, 3])
                .unwrap()
                .dual_weights_integers(20_000, &b)
                .into(),
        ),
        (
            "dual(9,{0,3,6})",
            AffineIfs::new(9, &[0, 3, 6])
                .unwrap()
                .dual_weights_integers(20_000, &b)
                .into(),
        ),
    ]
}

#[test]
fn window_shape_robustness() {
    let radii = default_dimension_radii();
    for (name, nu) in dimension_catalog() {
        let a = dimension_with_shape(&nu, &radii, WindowShape::ClosedOpen).unwrap();
        let b = dimension_with_shape(&nu, &radii, WindowShape::OpenClosed).unwrap();
        assert!(
            (a.slope - b.slope).abs() <= 0.05,
            "{name}: {} vs {}",
            a.slope,
            b.slope
        );
    }
}

#[test]
fn dimension_invariant_under_convolution_and_discretization() {
    let radii = default_dimension_radii();
    let unif: Measure = DensityMeasure::uniform(0.0, 1.0).unwrap().into();
    for (name, nu) in dimension_catalog() {
        let d0 = dimension(&nu, &radii).unwrap().slope;
        let dc = dimension(&convolve(&nu, &unif), &radii).unwrap().slope;
        assert!((dc - d0).abs() <= 0.1, "{name}: convolution {dc} vs {d0}");
        for r in [0.5, 1.0, 2.0] {
            let disc: Measure = discretize(&nu, r, PointRule::Left).unwrap().into();
            let dd = dimension(&disc, &radii).unwrap().slope;
            assert!(
                (dd - d0).abs() <= 0.1,
                "{name}: discretization r={r} {dd} vs {d0}"
            );
        }
    }
}

#[test]
fn dimension_ceilings() {
    let radii = default_dimension_radii();
    let b = budget();
    for (name, nu) in dimension_catalog() {
        let d = dimension(&nu, &radii).unwrap();
        assert!(d.slope <= 1.05, "{name}: {}", d.slope);
    }
    // ν = dual weights of a complement C is a frame candidate for μ_B, and
    // its dimension is capped by that of the base system
    for (r, bd, cd) in [
        (4i64, vec![0, 2], vec![0, 1]),
        (4, vec![0, 2], vec![0, 3]),
        (9, vec![0, 1, 2], vec![0, 3, 6]),
        (6, vec![0, 3], vec![0, 1, 2]),
    ] {
        let sys = SplitSystem::new(
            AffineIfs::new(r, &bd).unwrap(),
            AffineIfs::new(r, &cd).unwrap(),
        )
        .unwrap();
        let nu: Measure = sys.complement().dual_weights_integers(20_000, &b).into();
        let d = dimension(&nu, &radii).unwrap();
        let ceiling = (bd.len() as f64).ln() / (r as f64).ln() + 0.1;
        assert!(
            d.slope <= ceiling,
            "R={r} B={bd:?}: {} > {ceiling}",
            d.slope
        );
    }
}

// reconstruct

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn factorization_identity(t in -1e3f64..1e3) {
        let sys = SplitSystem::new(mu4(), mu4_dual()).unwrap();
        let b = budget();
        let lhs = sys.base().ft_invariant(t, &b) * sys.complement().ft_invariant(t, &b);
        let rhs = sys.combined().ft_invariant(t, &b);
        prop_assert!((lhs - rhs).norm() <= 2.0 * TOL);
    }

    #[test]
    fn combined_is_lebesgue(t in -1e3f64..1e3) {
        prop_assume!(t.abs() > 1e-6);
        let sys = SplitSystem::new(mu4(), mu4_dual()).unwrap();
        let exact = (Complex64::new(1.0, 0.0) - cis_turns(-t))
            / Complex64::new(0.0, 2.0 * std::f64::consts::PI * t);
        prop_assert!((sys.combined().ft_invariant(t, &budget()) - exact).norm() <= TOL);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn reconstruction_is_linear(
        cf in prop::collection::vec((-2f64..2.0, -2f64..2.0), 4),
        cg in prop::collection::vec((-2f64..2.0, -2f64..2.0), 4),
        alpha in (-2f64..2.0, -2f64..2.0),
        beta in (-2f64..2.0, -2f64..2.0),
        t in 0.01f64..0.6,
    ) {
        let sys = SplitSystem::new(mu4(), mu4_dual()).unwrap();
        let to_c = |v: &Vec<(f64, f64)>| v.iter().map(|&(a, b)| Complex64::new(a, b)).collect::<Vec<_>>();
        let f = CylinderFunction::new(sys.base(), 2, to_c(&cf)).unwrap();
        let g = CylinderFunction::new(sys.base(), 2, to_c(&cg)).unwrap();
        let (a, bb) = (Complex64::new(alpha.0, alpha.1), Complex64::new(beta.0, beta.1));
        let h = f.combine(a, &g, bb).unwrap();
        let b = budget();
        let rf = fourier_reconstruct(&sys, &f, t, 20.0, 1.0 / 16.0, &b).unwrap().value;
        let rg = fourier_reconstruct(&sys, &g, t, 20.0, 1.0 / 16.0, &b).unwrap().value;
        let rh = fourier_reconstruct(&sys, &h, t, 20.0, 1.0 / 16.0, &b).unwrap().value;
        prop_assert!((rh - (a * rf + bb * rg)).norm() <= 1e-10);
    }
}
