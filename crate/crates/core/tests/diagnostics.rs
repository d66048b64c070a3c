mod oracle;

use cmot::diagnostics::{continuity_residual, density_change, energy, mass_per_slice_max_dev, residuals, History};
use cmot::operators::{div_ts, grad_ts};
use cmot::solver::SolverState;
use cmot::{GridSpec, PairField, ScalarField, SpaceBoundary, SpatialField};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

fn random_scalar(g: GridSpec, rng: &mut StdRng, lo: f64, hi: f64) -> ScalarField {
    ScalarField::from_vec(g, (0..g.len()).map(|_| rng.gen_range(lo..hi)).collect()).unwrap()
}

fn random_pair(g: GridSpec, rng: &mut StdRng) -> PairField {
    PairField::new(random_scalar(g, rng, 0.0, 2.0), random_scalar(g, rng, -1.0, 1.0), random_scalar(g, rng, -1.0, 1.0))
        .unwrap()
}

fn grids() -> [GridSpec; 2] {
    [
        GridSpec::unit(6, 5, 4, SpaceBoundary::Neumann).unwrap(),
        GridSpec::unit(5, 6, 3, SpaceBoundary::Periodic).unwrap(),
    ]
}

#[test]
fn energy_reference_values() {
    for g in grids() {
        assert_eq!(energy(&PairField::uniform(g, 1.0, [0.0, 0.0])), 0.0);
        let e = energy(&PairField::uniform(g, 1.0, [0.6, 0.8]));
        assert!((e - 0.5).abs() < 1e-14);
    }
}

#[test]
fn energy_matches_naive_quadrature() {
    let mut rng = StdRng::seed_from_u64(51);
    for g in grids() {
        let mut mu = random_pair(g, &mut rng);
        // Include vacuum points, where the floor applies.
        mu.scalar.values_mut()[3] = 0.0;
        mu.scalar.values_mut()[5] = -0.2;
        let [rho, mx, my] = mu.components();
        let naive = oracle::energy_naive(&g, rho, mx, my);
        assert!((energy(&mu) - naive).abs() <= 1e-12 * naive.max(1.0));

        // Flipping the momentum leaves the energy unchanged.
        let mut flipped = mu.clone();
        let [_, fx, fy] = flipped.components_mut();
        fx.iter_mut().chain(fy.iter_mut()).for_each(|v| *v = -*v);
        assert_eq!(energy(&flipped), energy(&mu));
    }
}

#[test]
fn residual_norms_match_naive_loops() {
    let mut rng = StdRng::seed_from_u64(52);
    for g in grids() {
        let mut st = SolverState::zeros(g);
        st.phi = random_scalar(g, &mut rng, -1.0, 1.0);
        for f in [&mut st.q, &mut st.p, &mut st.b, &mut st.mu, &mut st.nu, &mut st.eta] {
            *f = random_pair(g, &mut rng);
        }
        let rho0 = SpatialField::from_vec(g.nx, g.ny, st.mu.scalar.slice(0).to_vec()).unwrap();
        let rho1 = SpatialField::from_vec(g.nx, g.ny, st.mu.scalar.slice(g.nt - 1).to_vec()).unwrap();
        let prev = random_scalar(g, &mut rng, 0.0, 2.0);
        let rec = residuals(&st, &rho0, &rho1, Some(&prev));

        let bphi = oracle::dense_grad(&g) * nalgebra::DVector::from_column_slice(st.phi.values());
        let st3 = |f: &PairField| oracle::stack(f.components());
        let nd = |a: &nalgebra::DVector<f64>, b: &nalgebra::DVector<f64>| oracle::norm_naive(&g, (a - b).as_slice());
        let close = |x: f64, y: f64| (x - y).abs() <= 1e-12 * y.max(1.0);
        assert!(close(rec.res_bphi_p, nd(&bphi, &st3(&st.p))));
        assert!(close(rec.res_b_q, nd(&st3(&st.b), &st3(&st.q))));
        assert!(close(rec.res_mu_nu, nd(&st3(&st.mu), &st3(&st.nu))));
        assert!(close(rec.res_mu_eta, nd(&st3(&st.mu), &st3(&st.eta))));
        assert!(close(rec.res_bphi_q, nd(&bphi, &st3(&st.q))));

        let [rho, mx, my] = st.mu.components();
        assert!(close(rec.energy, oracle::energy_naive(&g, rho, mx, my)));

        let naive_change = rho.iter().zip(prev.values()).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
        assert!(close(rec.density_change, naive_change));
        assert_eq!(rec.density_change, density_change(&st.mu.scalar, &prev));

        let m0 = oracle::mass_naive(&g, rho0.values());
        let dev = (0..g.nt).map(|k| (oracle::mass_naive(&g, st.mu.scalar.slice(k)) - m0).abs()).fold(0.0, f64::max);
        assert!(close(rec.mass_per_slice_max_dev, dev));

        // div μ with the endpoint data folded into the boundary slices.
        let mut d = oracle::dense_div(&g) * st3(&st.mu);
        let wt = g.time_weights();
        let last = g.nt - 1;
        for x in 0..g.spatial_len() {
            d[x] -= rho0.values()[x] / wt[0];
            d[last * g.spatial_len() + x] += rho1.values()[x] / wt[last];
        }
        assert!(close(rec.continuity_residual, oracle::norm_naive(&g, d.as_slice())));
    }
}

#[test]
fn static_density_has_no_mass_drift_and_no_continuity_defect() {
    let g = GridSpec::unit(7, 6, 6, SpaceBoundary::Neumann).unwrap();
    let rho = SpatialField::from_fn(&g, |x, y| 1.0 + x * y);
    let mut mu = PairField::zeros(g);
    for k in 0..g.nt {
        mu.scalar.slice_mut(k).copy_from_slice(rho.values());
    }
    assert_eq!(mass_per_slice_max_dev(&mu.scalar, &rho), 0.0);
    assert!(continuity_residual(&mu, &rho, &rho) < 1e-12);
    // Without the boundary data, the first and last slices carry ±ρ/w.
    assert!(div_ts(&mu).norm() > 1.0);
}

#[test]
fn saddle_state_has_vanishing_residuals() {
    let g = GridSpec::unit(6, 5, 5, SpaceBoundary::Periodic).unwrap();
    let mut st = SolverState::zeros(g);
    st.phi = ScalarField::from_fn(g, |t, x, _| t * t + (6.283185307179586 * x).sin());
    st.p = grad_ts(&st.phi);
    st.mu = PairField::uniform(g, 1.0, [0.3, 0.0]);
    st.nu = st.mu.clone();
    st.eta = st.mu.clone();
    st.q = PairField::uniform(g, -1.0, [0.5, 0.5]);
    st.b = st.q.clone();
    let rho = SpatialField::constant(5, 5, 1.0);
    let rec = residuals(&st, &rho, &rho, None);
    for v in [rec.res_bphi_p, rec.res_b_q, rec.res_mu_nu, rec.res_mu_eta, rec.density_change] {
        assert!(v <= 1e-10);
    }
    assert!(rec.res_bphi_q > 0.1);
}

#[test]
fn relative_history_divides_by_first_record() {
    let g = GridSpec::unit(4, 4, 4, SpaceBoundary::Neumann).unwrap();
    let mut rng = StdRng::seed_from_u64(53);
    let mut h = History::default();
    let rho = SpatialField::constant(4, 4, 1.0);
    let mut prev = None;
    for _ in 0..3 {
        let mut st = SolverState::zeros(g);
        st.mu = random_pair(g, &mut rng);
        st.p = random_pair(g, &mut rng);
        h.push(residuals(&st, &rho, &rho, prev.as_ref()));
        prev = Some(st.mu.scalar.clone());
    }
    let rel = h.relative();
    assert_eq!(rel.len(), 3);
    let first = h.records[0].values();
    for (r, a) in rel.iter().zip(&h.records) {
        for ((x, y), f) in r.values().iter().zip(a.values()).zip(first) {
            if f != 0.0 {
                assert!((x - y / f).abs() < 1e-15);
            }
        }
    }
    // The first density change is 0 (no predecessor); later ones are finite
    // nonzero over 0, reported as infinity.
    assert_eq!(rel[0].density_change, 0.0);
    assert_eq!(rel[1].density_change, f64::INFINITY);
}
