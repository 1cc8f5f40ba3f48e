//! Golden eigenvalues for the default configuration, ℓ = 0, s = +1.
//!
//! Regenerate with `ACCAVITY_REGEN_GOLDEN=1 cargo test --test oracle_golden`.

use accavity::model::{derive, Channel, DerivedParams, PhysicalConfig, Spin};
use accavity::oracle::{eigenvector, fd_eigenvalues, sign_changes, sturm_count, GridSpec, OracleFixture};

const GOLDEN: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/tests/fixtures/oracle_golden.json");
const K: usize = 5;

fn setup() -> (PhysicalConfig, Channel, DerivedParams) {
    let cfg = PhysicalConfig::default();
    let ch = Channel::new(0, Spin::Up);
    let dp = derive(&cfg, ch).unwrap();
    (cfg, ch, dp)
}

fn grid(dp: &DerivedParams, nodes: usize) -> GridSpec {
    GridSpec::for_energy(dp, 12.0 * dp.omega_ac, nodes).unwrap()
}

fn golden() -> OracleFixture {
    let (cfg, ch, dp) = setup();
    if std::env::var_os("ACCAVITY_REGEN_GOLDEN").is_some() {
        let g = grid(&dp, 80_000);
        let spec = fd_eigenvalues(&dp, &g, K).unwrap();
        let fixture = OracleFixture {
            config: cfg,
            channel: ch,
            grid: g,
            eigenvalues: spec.extrapolated.clone(),
        };
        let text = serde_json::to_string_pretty(&vec![&fixture]).unwrap();
        std::fs::write(GOLDEN, text + "\n").unwrap();
    }
    let text = std::fs::read_to_string(GOLDEN).expect("golden fixture present");
    let mut all: Vec<OracleFixture> = serde_json::from_str(&text).unwrap();
    all.remove(0)
}

#[test]
fn golden_fixture_reproduces() {
    let (cfg, ch, dp) = setup();
    let fx = golden();
    assert_eq!(fx.config, cfg);
    assert_eq!(fx.channel, ch);
    assert_eq!(fx.eigenvalues.len(), K);
    let spec = fd_eigenvalues(&dp, &grid(&dp, 20_000), K).unwrap();
    assert!(!spec.truncation_warning);
    for (got, want) in spec.extrapolated.iter().zip(&fx.eigenvalues) {
        assert!(((got - want) / want).abs() < 1e-8, "{got} vs {want}");
    }
}

#[test]
fn sturm_count_between_fixture_levels() {
    let (_, _, dp) = setup();
    let fx = golden();
    let g = grid(&dp, 20_000);
    let e = &fx.eigenvalues;
    assert_eq!(sturm_count(&dp, &g, e[0] - 1.0), 0);
    assert_eq!(sturm_count(&dp, &g, 0.5 * (e[2] + e[3])), 3);
    for &ev in e {
        let d = 1e-3;
        assert_eq!(sturm_count(&dp, &g, ev + d) - sturm_count(&dp, &g, ev - d), 1);
    }
}

#[test]
fn second_order_convergence() {
    let (_, _, dp) = setup();
    let g0 = grid(&dp, 2_000);
    let g1 = g0.refined();
    let g2 = g1.refined();
    let a = fd_eigenvalues(&dp, &g0, K).unwrap().coarse;
    let b = fd_eigenvalues(&dp, &g1, K).unwrap().coarse;
    let c = fd_eigenvalues(&dp, &g2, K).unwrap().coarse;
    for i in 0..K {
        let order = ((a[i] - b[i]) / (b[i] - c[i])).log2();
        assert!((1.9..=2.1).contains(&order), "level {i}: order {order}");
    }
}

#[test]
fn count_matches_eigenvalue_list() {
    let (_, _, dp) = setup();
    let g = grid(&dp, 4_000);
    let spec = fd_eigenvalues(&dp, &g, 8).unwrap();
    let top = spec.coarse[7];
    for e in [0.5, 2.0, 4.4, 7.0, 0.5 * (spec.coarse[6] + top), top - 1e-6] {
        let below = spec.coarse.iter().filter(|&&x| x < e).count();
        assert_eq!(sturm_count(&dp, &g, e), below, "E = {e}");
    }
}

#[test]
fn spectra_are_simple_and_nodes_count_levels() {
    for (ell, s) in [(0, Spin::Up), (-2, Spin::Down), (3, Spin::Up)] {
        let dp = derive(&PhysicalConfig::default(), Channel::new(ell, s)).unwrap();
        let g = grid(&dp, 4_000);
        let spec = fd_eigenvalues(&dp, &g, 6).unwrap();
        for w in spec.coarse.windows(2) {
            assert!(w[1] - w[0] > 1e-8 * dp.omega_ac);
        }
        for (n, &e) in spec.coarse.iter().enumerate() {
            assert_eq!(sign_changes(&eigenvector(&dp, &g, e)), n, "ell {ell} s {s} n {n}");
        }
    }
}

#[test]
fn rejects_coarse_or_short_grids() {
    let (_, _, dp) = setup();
    assert!(GridSpec::new(&dp, dp.r_a + 12.0 * dp.length_scale(), 500).is_err());
    assert!(GridSpec::new(&dp, dp.r_a + 2.0 * dp.length_scale(), 5_000).is_err());
    assert!(fd_eigenvalues(&dp, &grid(&dp, 2_000), 0).is_err());
}
