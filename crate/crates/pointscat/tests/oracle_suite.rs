//! Slow-reference cross-checks: every fast path against its brute-force
//! counterpart at working precision.

use pointscat::lattice::{build_norm_table, weyl_count, TorusGeometry};
use pointscat::oracle;
use pointscat::spectrum::{
    coupling_rhs, secular_lhs, solve_new_eigenvalues, CouplingConfig, TailMode,
};

fn sqrt2() -> TorusGeometry {
    TorusGeometry::sqrt2(50).unwrap()
}

fn golden() -> TorusGeometry {
    TorusGeometry::golden(50).unwrap()
}

#[test]
fn multiplicity_partition_matches_raw_point_count() {
    let g = sqrt2();
    let table = build_norm_table(&g, 1000.0).unwrap();
    let summed: u64 = table.items().iter().map(|it| u64::from(it.r)).sum();
    let brute = oracle::lattice_point_count_brute(&g, 1000.0);
    assert_eq!(summed, brute);
}

#[test]
fn weyl_count_equals_brute_force() {
    let g = sqrt2();
    let table = build_norm_table(&g, 100.0).unwrap();
    let brute = oracle::weyl_count_brute(&g, 100.0);
    assert_eq!(weyl_count(&table, 100.0).unwrap() as u64, brute);
}

#[test]
fn no_norm_collisions_at_working_precision() {
    use dashu::base::Abs;
    for g in [golden(), sqrt2()] {
        let bits = g.precision_bits();
        let tol = pointscat::precision::parse_decimal("1e-30", bits).unwrap();
        let table = build_norm_table(&g, 2000.0).unwrap();
        for w in table.items().windows(2) {
            let diff = (&w[1].n_hp - &w[0].n_hp).abs();
            assert!(diff > tol, "collision near n = {}", w[0].n);
        }
    }
}

#[test]
fn secular_sum_matches_high_cutoff_brute_force() {
    let g = sqrt2();
    let table = build_norm_table(&g, 1e4).unwrap();
    let cfg = CouplingConfig::new(0.0, 1e4, TailMode::IntegralCorrection).unwrap();
    let fast = secular_lhs(0.5, &table, &cfg).unwrap();
    let brute = oracle::secular_sum_hp(&g, 0.5, 1e6, true).unwrap();
    assert!(
        (fast - brute).abs() < 1e-3,
        "fast {fast} vs 50-digit brute {brute}"
    );
}

#[test]
fn hard_truncate_matches_explicit_sum_at_same_cutoff() {
    let g = sqrt2();
    let table = build_norm_table(&g, 5e3).unwrap();
    let cfg = CouplingConfig::new(0.0, 5e3, TailMode::HardTruncate).unwrap();
    let fast = secular_lhs(7.25, &table, &cfg).unwrap();
    let brute = oracle::secular_sum_hp(&g, 7.25, 5e3, false).unwrap();
    assert!(
        (fast - brute).abs() < 1e-9,
        "hard-truncated sums disagree: {fast} vs {brute}"
    );
}

#[test]
fn coupling_sum_matches_high_cutoff_brute_force() {
    let g = sqrt2();
    let table = build_norm_table(&g, 1e4).unwrap();
    let cfg =
        CouplingConfig::new(std::f64::consts::FRAC_PI_2, 1e4, TailMode::IntegralCorrection)
            .unwrap();
    let fast = coupling_rhs(&cfg, &table).unwrap();
    let brute =
        oracle::coupling_sum_hp(&g, 1e6, true).unwrap() * (std::f64::consts::FRAC_PI_2 / 2.0).tan();
    assert!(
        (fast - brute).abs() < 1e-6,
        "fast {fast} vs 50-digit brute {brute}"
    );
}

#[test]
fn green_norm_matches_high_cutoff_lattice_sum() {
    let g = sqrt2();
    let table = build_norm_table(&g, 1e4).unwrap();
    let cfg =
        CouplingConfig::new(std::f64::consts::FRAC_PI_2, 1e4, TailMode::IntegralCorrection)
            .unwrap();
    // the eigenvalue solved in the tenth interlacing interval
    let lower = table.items()[9].n;
    let upper = table.items()[10].n;
    let eigs = solve_new_eigenvalues(&table, &cfg, (lower, upper)).unwrap();
    assert_eq!(eigs.len(), 1);
    let lambda = eigs[0].lambda;
    let gc = pointscat::eigenfunction::green_coefficients(lambda, &table, 1e4).unwrap();
    let brute = oracle::green_norm_sq_hp(&g, lambda, 1e6, true).unwrap();
    assert!(
        ((gc.norm_sq - brute) / brute).abs() < 1e-3,
        "norm_sq {} vs 50-digit brute {brute}",
        gc.norm_sq
    );
}

#[test]
fn solver_matches_fine_grid_sign_scan_on_first_intervals() {
    let g = sqrt2();
    let table = build_norm_table(&g, 1e3).unwrap();
    let cfg =
        CouplingConfig::new(std::f64::consts::FRAC_PI_2, 1e3, TailMode::IntegralCorrection)
            .unwrap();
    let c = coupling_rhs(&cfg, &table).unwrap();
    let upper_limit = table.items()[20].n;
    let eigs = solve_new_eigenvalues(&table, &cfg, (0.0, upper_limit)).unwrap();
    let interior: Vec<_> = eigs.iter().filter(|e| !e.is_ground()).collect();
    assert_eq!(interior.len(), 20);
    for e in interior {
        let margin = 1e-9 * e.m.max(1.0);
        let scanned = oracle::grid_scan_root(
            |x| secular_lhs(x, &table, &cfg).unwrap() - c,
            e.lower + margin,
            e.m - margin,
            1000,
            3,
        )
        .unwrap();
        assert!(
            (scanned - e.lambda).abs() < 1e-6,
            "interval ({}, {}): solver {} vs scan {scanned}",
            e.lower,
            e.m,
            e.lambda
        );
    }
}

#[test]
fn exponential_sums_match_direct_summation_exhaustively() {
    let g = sqrt2();
    let table = build_norm_table(&g, 1e3).unwrap();
    for it in table.items() {
        for harmonic in -10i64..=10 {
            let direct = oracle::exp_sum_direct(&g, it.k, it.l, harmonic);
            let closed = pointscat::lattice::exp_sum_w(it, harmonic);
            assert!(
                (direct.re - closed).abs() < 1e-11 && direct.im.abs() < 1e-11,
                "norm ({}, {}), harmonic {harmonic}",
                it.k,
                it.l
            );
        }
    }
}

#[test]
fn doubling_tail_cutoff_barely_moves_roots() {
    let g = golden();
    let table = build_norm_table(&g, 2e3).unwrap();
    let lo_cfg = CouplingConfig::new(1.0, 1e3, TailMode::IntegralCorrection).unwrap();
    let hi_cfg = CouplingConfig::new(1.0, 2e3, TailMode::IntegralCorrection).unwrap();
    let a = solve_new_eigenvalues(&table, &lo_cfg, (0.0, 500.0)).unwrap();
    let b = solve_new_eigenvalues(&table, &hi_cfg, (0.0, 500.0)).unwrap();
    assert_eq!(a.len(), b.len());
    for (x, y) in a.iter().zip(&b) {
        assert!(
            (x.lambda - y.lambda).abs() < 1e-4,
            "root at m = {} moved by {:e}",
            x.m,
            (x.lambda - y.lambda).abs()
        );
    }
}

#[test]
fn roots_move_monotonically_with_phi() {
    let table = build_norm_table(&golden(), 1e3).unwrap();
    let phis = [-2.8, -std::f64::consts::FRAC_PI_2, 0.0, std::f64::consts::FRAC_PI_2, 2.8];
    let mut previous: Option<Vec<f64>> = None;
    for phi in phis {
        let cfg = CouplingConfig::new(phi, 1e3, TailMode::IntegralCorrection).unwrap();
        let eigs = solve_new_eigenvalues(&table, &cfg, (10.0, 300.0)).unwrap();
        let lambdas: Vec<f64> = eigs.iter().map(|e| e.lambda).collect();
        if let Some(prev) = &previous {
            assert_eq!(prev.len(), lambdas.len());
            for (a, b) in prev.iter().zip(&lambdas) {
                // c_φ grows with φ and S is increasing, so every root moves right
                assert!(a < b, "lambda not monotone in phi: {a} !< {b} at phi = {phi}");
            }
        }
        previous = Some(lambdas);
    }
}

#[test]
fn difference_kernel_constant_is_stable() {
    let table = build_norm_table(&golden(), 3.2e4).unwrap();
    let mut fitted = Vec::new();
    for x in [1e3, 1e4, 3e4] {
        for a in [3.0, 10.0, 30.0] {
            let s = pointscat::statistics::difference_kernel_sum(&table, x, a).unwrap();
            fitted.push(s * a / x);
        }
    }
    let max = fitted.iter().copied().fold(f64::MIN, f64::max);
    let min = fitted.iter().copied().fold(f64::MAX, f64::min);
    assert!(
        max / min < 1.6,
        "fitted constants not stable: {fitted:?}"
    );
}

#[test]
fn dirichlet_roots_match_fine_grid_sign_scan() {
    use pointscat::dirichlet::{dirichlet_secular_solve, DirichletConfig, DirichletSystem};
    let g = sqrt2();
    let table = build_norm_table(&g, 400.0).unwrap();
    let cfg = DirichletConfig::new(
        g,
        (1.0 / 7.0f64.sqrt(), 1.0 / 6.0f64.sqrt()),
        std::f64::consts::FRAC_PI_2,
    )
    .unwrap();
    let eigs = dirichlet_secular_solve(&cfg, &table, (0.0, 200.0)).unwrap();
    let system = DirichletSystem::new(&cfg, &table);
    for e in eigs.iter().take(10) {
        let margin = 1e-9 * e.m.max(1.0);
        let scanned = oracle::grid_scan_root(
            |x| system.secular_lhs(x) - system.rhs,
            e.lower + margin,
            e.m - margin,
            1000,
            3,
        )
        .unwrap();
        assert!(
            (scanned - e.lambda).abs() < 1e-6,
            "dirichlet root {} vs scan {scanned}",
            e.lambda
        );
    }
}

#[test]
fn theta_angles_dense_at_large_scale() {
    let table = build_norm_table(&golden(), 1e5).unwrap();
    let mut thetas: Vec<f64> = table.items().iter().skip(1).map(|it| it.theta).collect();
    thetas.sort_by(f64::total_cmp);
    let mut worst = thetas[0];
    for w in thetas.windows(2) {
        worst = worst.max(w[1] - w[0]);
    }
    worst = worst.max(std::f64::consts::FRAC_PI_2 - thetas.last().unwrap());
    // every subinterval of [0, π/2] of length 0.05 contains an angle
    assert!(worst < 0.05, "largest angle gap {worst}");
}
