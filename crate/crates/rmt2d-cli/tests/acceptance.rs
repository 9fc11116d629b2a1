//! Acceptance suite: every release criterion as one test, each printing a
//! PASS line with the measured values (visible with --nocapture).
//!
//! Monte Carlo criteria pin (matrix size, sample count, seed); expensive
//! ensembles are shared between criteria through lazily initialized runs.

use num_complex::Complex64;
use rmt2d::analytic::{
    self, FiniteNConditionalRatio, GinibreSpacingLaw, PentadiagonalSpec, SurmiseParams,
    SurmiseVariant,
};
use rmt2d::edgegap::{
    conditional_kernel_finite, edge_kernel, gap_first_order,
    gap_small_s_coefficient, EdgeKernelParams,
};
use rmt2d::ensembles::ClassTag;
use rmt2d::harness::{run, ExperimentConfig, RunOutput, SpectraRetention, UnfoldPolicy};
use rmt2d::quad::{gauss_legendre, integrate_gl};
use rmt2d::stats::ks_distance;
use std::sync::OnceLock;
use std::time::Instant;

fn base_config(class: ClassTag, n: usize, samples: u64, seed: u64) -> ExperimentConfig {
    let mut c = ExperimentConfig::new(class, n, samples, seed);
    c.retention = SpectraRetention::InMemory;
    c
}

/// Class A, N = 512, 2000 samples: criteria 2, 5 and 7.
fn run_a512() -> &'static (RunOutput, f64) {
    static CELL: OnceLock<(RunOutput, f64)> = OnceLock::new();
    CELL.get_or_init(|| {
        let t0 = Instant::now();
        let out = run(&base_config(ClassTag::A, 512, 2000, 20_240_512)).expect("class A run");
        (out, t0.elapsed().as_secs_f64())
    })
}

/// Complex self-dual, 2N = 512, 4000 samples: criteria 3 and 7.
fn run_aii512() -> &'static RunOutput {
    static CELL: OnceLock<RunOutput> = OnceLock::new();
    CELL.get_or_init(|| {
        run(&base_config(ClassTag::AiiDag, 256, 4000, 20_240_002)).expect("class AII run")
    })
}

/// Class A, N = 256, 2000 samples: criterion 4.
fn run_a256() -> &'static RunOutput {
    static CELL: OnceLock<RunOutput> = OnceLock::new();
    CELL.get_or_init(|| {
        run(&base_config(ClassTag::A, 256, 2000, 20_240_004)).expect("class A 256 run")
    })
}

/// Complex symmetric, N = 256, 2000 samples: criteria 4 and 7.
fn run_ai256() -> &'static RunOutput {
    static CELL: OnceLock<RunOutput> = OnceLock::new();
    CELL.get_or_init(|| {
        run(&base_config(ClassTag::AiDag, 256, 2000, 20_240_005)).expect("class AI run")
    })
}

/// Poisson cloud, N = 1024, 2000 samples, fully unfolded: criteria 6 and 7.
fn run_poisson_unfolded() -> &'static RunOutput {
    static CELL: OnceLock<RunOutput> = OnceLock::new();
    CELL.get_or_init(|| {
        let mut c = base_config(ClassTag::PoissonGauss, 1024, 2000, 20_240_006);
        c.unfold = UnfoldPolicy::EdgeAndPoissonBulk;
        run(&c).expect("poisson run")
    })
}

#[test]
fn c01_poisson_exact_bulk_moments() {
    let t0 = Instant::now();
    let mut config = base_config(ClassTag::PoissonGauss, 1024, 500, 20_240_001);
    config.unfold = UnfoldPolicy::None;
    config.radial_bins = 1 << 16;
    let out = run(&config).expect("poisson moments run");
    let m = out.bulk.moments().expect("bulk moments");
    let elapsed = t0.elapsed().as_secs_f64();
    let checks = [
        ("<r>", m.r.mean, 2.0 / 3.0, m.r.stderr),
        ("<r^2>", m.r2.mean, 0.5, m.r2.stderr),
        ("<cos>", m.cos_phi.mean, 0.0, m.cos_phi.stderr),
        ("<cos^2>", m.cos2_phi.mean, 0.5, m.cos2_phi.stderr),
        ("<r cos>", m.r_cos_phi.mean, 0.0, m.r_cos_phi.stderr),
    ];
    for (name, got, expect, se) in checks {
        assert!(
            (got - expect).abs() <= 3.0 * se,
            "{name}: {got} vs {expect} (se {se})"
        );
    }
    assert!(elapsed < 120.0, "runtime {elapsed:.1}s exceeds 2 minutes");
    println!(
        "criterion 1: PASS Poisson bulk moments within 3 SE (r={:.5}, r2={:.5}, cos={:.5}, cos2={:.5}, rcos={:.5}; {:.1}s)",
        m.r.mean, m.r2.mean, m.cos_phi.mean, m.cos2_phi.mean, m.r_cos_phi.mean, elapsed
    );
}

#[test]
fn c02_class_a_bulk_moments() {
    let (out, elapsed) = run_a512();
    let m = out.bulk.moments().expect("bulk moments");
    assert!((m.r.mean - 0.73867).abs() < 0.01, "<r> = {}", m.r.mean);
    assert!((m.cos_phi.mean - (-0.24685)).abs() < 0.01, "<cos> = {}", m.cos_phi.mean);
    assert!(*elapsed < 3600.0, "runtime {elapsed:.0}s exceeds 60 minutes");
    println!(
        "criterion 2: PASS class A bulk moments (<r>={:.5} vs 0.73867, <cos>={:.5} vs -0.24685; {:.0}s)",
        m.r.mean, m.cos_phi.mean, elapsed
    );
}

#[test]
fn c03_self_dual_edge_sign_flip() {
    let out = run_aii512();
    let bulk = out.bulk.moments().expect("bulk moments");
    let edge = out.edge.moments().expect("edge moments");
    assert!(edge.cos_phi.mean > 0.0, "edge <cos> = {}", edge.cos_phi.mean);
    assert!(bulk.cos_phi.mean < 0.0, "bulk <cos> = {}", bulk.cos_phi.mean);
    assert!(
        (edge.cos_phi.mean - 0.22132).abs() < 0.03,
        "edge <cos> = {} vs 0.22132",
        edge.cos_phi.mean
    );
    assert!(
        (bulk.cos_phi.mean - (-0.28580)).abs() < 0.03,
        "bulk <cos> = {} vs -0.28580",
        bulk.cos_phi.mean
    );
    println!(
        "criterion 3: PASS self-dual <cos> sign flip (edge {:.5} > 0 > bulk {:.5})",
        edge.cos_phi.mean, bulk.cos_phi.mean
    );
}

/// Aggregate the fine radial histogram onto `coarse` bins and compare the
/// counts with the analytic density's per-bin probabilities at 3 sigma.
fn density_band_check(out: &RunOutput, density: impl Fn(f64) -> f64, label: &str) -> f64 {
    let hist = &out.histogram;
    let fine = hist.bins();
    let coarse = 64usize;
    assert_eq!(fine % coarse, 0);
    let per = fine / coarse;
    let total = hist.total_points() as f64;
    let dr = hist.r_max() / coarse as f64;
    let (nodes, weights) = gauss_legendre(24);
    let mut worst: f64 = 0.0;
    for b in 0..coarse {
        let r0 = b as f64 * dr;
        let r1 = r0 + dr;
        if r1 > 0.8 {
            break; // bulk bins only
        }
        let p = integrate_gl(
            |r: f64| 2.0 * std::f64::consts::PI * r * density(r),
            r0,
            r1,
            &nodes,
            &weights,
        );
        let count: u64 = hist.counts()[b * per..(b + 1) * per].iter().sum();
        let sigma = (total * p * (1.0 - p)).sqrt();
        let dev = (count as f64 - total * p).abs() / sigma;
        worst = worst.max(dev);
        assert!(
            dev <= 3.0,
            "{label} bin [{r0:.3},{r1:.3}): count {count} vs {:.1} ({dev:.2} sigma)",
            total * p
        );
    }
    worst
}

#[test]
fn c04_finite_size_densities() {
    let worst_a = density_band_check(run_a256(), |r| analytic::density_ginue(r, 256).unwrap(), "A");
    let worst_ai =
        density_band_check(run_ai256(), |r| analytic::density_ai_dag(r, 256).unwrap(), "AI");
    println!(
        "criterion 4: PASS finite-size densities within 3 sigma bands (worst A {:.2} sigma, AI {:.2} sigma)",
        worst_a, worst_ai
    );
}

#[test]
fn c05_ginibre_bulk_spacing_law() {
    let law = GinibreSpacingLaw::new(20).expect("spacing law");
    let c = law.rescale_constant();
    assert!((c - 1.1429).abs() < 0.005, "rescale constant {c}");
    let (out, _) = run_a512();
    let nn = out.bulk.nn_sorted_normalized().expect("nn spacings");
    let d_nn = ks_distance(&nn, |s| law.nn_cdf(s));
    let nnn = out.bulk.nnn_sorted_normalized().expect("nnn spacings");
    let d_nnn = ks_distance(&nnn, |s| law.nnn_cdf(s));
    assert!(d_nn < 0.015, "NN KS distance {d_nn}");
    assert!(d_nnn < 0.015, "NNN KS distance {d_nnn}");
    println!(
        "criterion 5: PASS Ginibre bulk spacing (KS nn={:.4}, nnn={:.4}; rescale {:.4} vs 1.1429)",
        d_nn, d_nnn, c
    );
}

#[test]
fn c06_poisson_edge_equals_bulk_after_unfolding() {
    let out = run_poisson_unfolded();
    let edge_nn = out.edge.nn_sorted_normalized().expect("edge spacings");
    let d = ks_distance(&edge_nn, analytic::poisson_nn_cdf);
    assert!(d < 0.02, "unfolded Poisson edge NN KS distance {d}");
    println!(
        "criterion 6: PASS unfolded Poisson edge NN matches the bulk law (KS={:.4}, {} samples)",
        d,
        edge_nn.len()
    );
}

#[test]
fn c07_small_s_cumulative_exponents() {
    let fit = 0.3;
    let (a_out, _) = run_a512();
    let (a_bulk, _, _) = a_out.bulk.small_s_exponent(fit).expect("A bulk fit");
    let (a_edge, _, _) = a_out.edge.small_s_exponent(fit).expect("A edge fit");
    assert!((a_bulk - 4.0).abs() <= 0.3, "class A bulk slope {a_bulk}");
    assert!((a_edge - 4.0).abs() <= 0.3, "class A edge slope {a_edge}");

    let poi = run_poisson_unfolded();
    let (p_bulk, _, _) = poi.bulk.small_s_exponent(fit).expect("poisson bulk fit");
    assert!((p_bulk - 2.0).abs() <= 0.1, "poisson bulk slope {p_bulk}");

    let ai = run_ai256();
    let (ai_bulk, _, _) = ai.bulk.small_s_exponent(fit).expect("AI bulk fit");
    let (ai_edge, _, _) = ai.edge.small_s_exponent(fit).expect("AI edge fit");
    let aii = run_aii512();
    let (aii_bulk, _, _) = aii.bulk.small_s_exponent(fit).expect("AII bulk fit");
    let (aii_edge, _, _) = aii.edge.small_s_exponent(fit).expect("AII edge fit");
    for (name, slope) in [
        ("AI bulk", ai_bulk),
        ("AI edge", ai_edge),
        ("AII bulk", aii_bulk),
        ("AII edge", aii_edge),
    ] {
        assert!((3.5..=4.5).contains(&slope), "{name} slope {slope}");
    }
    println!(
        "criterion 7: PASS small-s slopes (A bulk {:.2}, A edge {:.2}, Poi bulk {:.2}, AI {:.2}/{:.2}, AII {:.2}/{:.2})",
        a_bulk, a_edge, p_bulk, ai_bulk, ai_edge, aii_bulk, aii_edge
    );
}

#[test]
fn c08_edge_gap_quartic_coefficients() {
    let edge = gap_small_s_coefficient(0.0);
    let expect = (std::f64::consts::PI - 2.0) / (4.0 * std::f64::consts::PI);
    assert!((edge - expect).abs() < 1e-10, "edge coefficient {edge} vs {expect}");

    // bulk counterpart 1/2 from the series expansion of the bulk gap law
    let law = GinibreSpacingLaw::new(30).expect("law");
    let f = |s: f64| law.gap_depletion_raw(s) / s.powi(4);
    let bulk = (4.0 * f(5e-4) - f(1e-3)) / 3.0;
    assert!((bulk - 0.5).abs() < 1e-8, "bulk coefficient {bulk}");
    println!(
        "criterion 8: PASS gap coefficients (edge {:.10} = (pi-2)/(4 pi), bulk {:.10})",
        edge, bulk
    );
}

#[test]
fn c09_surmise_identities() {
    // normalization by 2D quadrature
    for &tau in &[0.0, 0.5, 0.9, 0.99] {
        for variant in [SurmiseVariant::Conditional, SurmiseVariant::Unconditional] {
            let p = SurmiseParams::new(tau, variant).unwrap();
            let m = 720usize;
            let dt = 2.0 * std::f64::consts::PI / m as f64;
            let total = rmt2d::quad::adaptive_simpson(
                &|r: f64| {
                    let mut ring = 0.0;
                    for k in 0..m {
                        let t = -std::f64::consts::PI + (k as f64 + 0.5) * dt;
                        ring += analytic::surmise_eginue(r * t.cos(), r * t.sin(), &p);
                    }
                    r * ring * dt
                },
                0.0,
                1.0,
                1e-9,
                1e-12,
            )
            .expect("normalization quadrature");
            assert!(
                (total - 1.0).abs() < 1e-6,
                "tau={tau} {variant:?}: integral {total}"
            );
        }
    }
    // tau = 0 closed forms
    let pc = SurmiseParams::new(0.0, SurmiseVariant::Conditional).unwrap();
    let pu = SurmiseParams::new(0.0, SurmiseVariant::Unconditional).unwrap();
    for i in 0..200 {
        let r = (i as f64 + 0.5) / 200.0;
        let theta = 2.9 * (i as f64 / 200.0) - 1.4;
        let (x, y) = (r * theta.cos(), r * theta.sin());
        let c_expect = 12.0 / std::f64::consts::PI * r * r * (r * r + 1.0 - 2.0 * r * theta.cos())
            / (r * r + 1.0f64).powi(5);
        assert!((analytic::surmise_eginue(x, y, &pc) - c_expect).abs() < 1e-12);
        let g = r * r + 1.0 - r * theta.cos();
        let u_expect = 81.0 / (8.0 * std::f64::consts::PI) * r * r
            * (r * r + 1.0 - 2.0 * r * theta.cos())
            / g.powi(5);
        assert!((analytic::surmise_eginue(x, y, &pu) - u_expect).abs() < 1e-12);
    }
    // Hermitian limit marginals and mass splits
    for i in 0..400 {
        let x = -1.0 + 2.0 * (i as f64 + 0.5) / 400.0;
        let fc = analytic::hermitian_limit_marginal(x, SurmiseVariant::Conditional);
        let gc = analytic::gue_surmise(x, analytic::GueSurmiseKind::ConditionalNn);
        assert!((fc - gc).abs() < 1e-12);
        let fu = analytic::hermitian_limit_marginal(x, SurmiseVariant::Unconditional);
        let gu = analytic::gue_surmise(x, analytic::GueSurmiseKind::Nn);
        assert!((fu - gu).abs() < 1e-12);
    }
    let (nodes, weights) = gauss_legendre(200);
    let int_c = |a, b| {
        integrate_gl(
            |x| analytic::hermitian_limit_marginal(x, SurmiseVariant::Conditional),
            a,
            b,
            &nodes,
            &weights,
        )
    };
    let int_u = |a, b| {
        integrate_gl(
            |x| analytic::hermitian_limit_marginal(x, SurmiseVariant::Unconditional),
            a,
            b,
            &nodes,
            &weights,
        )
    };
    let pi = std::f64::consts::PI;
    assert!((int_c(0.0, 1.0) - (3.0 * pi - 8.0) / (6.0 * pi)).abs() < 1e-8);
    assert!((int_c(-1.0, 0.0) - (3.0 * pi + 8.0) / (6.0 * pi)).abs() < 1e-8);
    assert!((int_u(0.0, 1.0) - 2.0 / 3.0).abs() < 1e-8);
    assert!((int_u(-1.0, 0.0) - 1.0 / 3.0).abs() < 1e-8);
    println!("criterion 9: PASS surmise normalizations, tau=0 closed forms, Hermitian limits and mass splits");
}

#[test]
fn c10_pentadiagonal_machinery() {
    // N = 3 reduction to the conditional tau = 0 surmise on a 50 x 50 grid
    let law = FiniteNConditionalRatio::new(PentadiagonalSpec::new(3).unwrap()).unwrap();
    let p = SurmiseParams::new(0.0, SurmiseVariant::Conditional).unwrap();
    let mut sup: f64 = 0.0;
    for iy in 0..50 {
        for ix in 0..50 {
            let x = -1.0 + 2.0 * (ix as f64 + 0.5) / 50.0;
            let y = -1.0 + 2.0 * (iy as f64 + 0.5) / 50.0;
            let ours = law.density(x, y).unwrap();
            let surmise = analytic::surmise_eginue(x, y, &p);
            sup = sup.max((ours - surmise).abs());
        }
    }
    assert!(sup < 1e-8, "sup-norm deviation {sup}");

    // selection rule: exact zero outside the band
    let z = Complex64::new(0.37, -0.21);
    for j in 1..=10usize {
        for k in 1..=10usize {
            if j.abs_diff(k) > 2 {
                let e = analytic::pentadiagonal_entry(j, k, z, 1.3, &analytic::GaussianWeight);
                assert_eq!(e, Complex64::new(0.0, 0.0));
            }
        }
    }

    // phase independence of the determinant
    let dim = 7usize;
    let dense_det = |m: &mut Vec<Vec<Complex64>>| -> Complex64 {
        let n = m.len();
        let mut det = Complex64::new(1.0, 0.0);
        for i in 0..n {
            let pivot = m[i][i];
            det *= pivot;
            for r in (i + 1)..n {
                let f = m[r][i] / pivot;
                for c in i..n {
                    let sub = f * m[i][c];
                    m[r][c] -= sub;
                }
            }
        }
        det
    };
    let mut base = vec![vec![Complex64::new(0.0, 0.0); dim]; dim];
    for j in 1..=dim {
        for k in 1..=dim {
            base[j - 1][k - 1] =
                analytic::pentadiagonal_entry(j, k, z, 0.8, &analytic::GaussianWeight);
        }
    }
    let d0 = dense_det(&mut base.clone());
    for &alpha in &[0.9f64, -2.2, 3.0] {
        let mut phased = base.clone();
        for j in 1..=dim {
            for k in 1..=dim {
                phased[j - 1][k - 1] *= Complex64::from_polar(1.0, alpha * (j as f64 - k as f64));
            }
        }
        let d1 = dense_det(&mut phased);
        assert!(
            (d0 - d1).norm() < 1e-12 * d0.norm(),
            "alpha={alpha}: {d0} vs {d1}"
        );
    }
    println!(
        "criterion 10: PASS pentadiagonal machinery (N=3 sup dev {:.2e}, band zeros exact, phase drop to 1e-12)",
        sup
    );
}

#[test]
fn c11_edge_kernel_convergence() {
    // finite size 400 against the limiting kernel on a 5 x 5 argument grid
    let n = 400usize;
    let xi_grid = [
        Complex64::new(0.0, 0.0),
        Complex64::new(0.3, 0.1),
        Complex64::new(-0.25, 0.3),
        Complex64::new(0.15, -0.35),
        Complex64::new(-0.2, -0.2),
    ];
    let mut worst: f64 = 0.0;
    for &d in &[-1.0f64, 0.0, 1.0] {
        let p = EdgeKernelParams::new(d);
        let z0 = Complex64::new((n as f64).sqrt() + d, 0.0);
        for &xi1 in &xi_grid {
            for &xi2 in &xi_grid {
                let fin = conditional_kernel_finite(z0 + xi1, (z0 + xi2).conj(), z0, n).unwrap();
                let lim = edge_kernel(xi1, xi2.conj(), &p).unwrap();
                let dev = (fin - lim).norm();
                worst = worst.max(dev);
                assert!(dev < 1e-3, "d={d} xi1={xi1} xi2={xi2}: deviation {dev}");
            }
        }
    }

    // first-order term against direct 2D quadrature of the kernel diagonal
    let p = EdgeKernelParams::new(0.0);
    let (nr, wr) = gauss_legendre(48);
    let (np_, wp) = gauss_legendre(48);
    let mut worst_i1: f64 = 0.0;
    for &s in &[0.25f64, 0.5, 1.0] {
        let series = 1.0 - gap_first_order(s, &p).unwrap();
        let quad = integrate_gl(
            |r: f64| {
                let ring = integrate_gl(
                    |phi: f64| {
                        let xi = Complex64::from_polar(r, phi);
                        edge_kernel(xi, xi.conj(), &p).unwrap().re
                    },
                    -std::f64::consts::PI,
                    std::f64::consts::PI,
                    &np_,
                    &wp,
                );
                r * ring
            },
            0.0,
            s,
            &nr,
            &wr,
        );
        let dev = (series - quad).abs();
        worst_i1 = worst_i1.max(dev);
        assert!(dev < 1e-6, "s={s}: series {series} vs quadrature {quad}");
    }
    println!(
        "criterion 11: PASS edge-kernel convergence (worst kernel dev {:.2e}, worst I1 dev {:.2e})",
        worst, worst_i1
    );
}

#[test]
fn c12_determinism_and_worker_independence() {
    let bin = env!("CARGO_BIN_EXE_rmt2d");
    let base = std::env::temp_dir().join(format!("rmt2d-acceptance-{}", std::process::id()));
    let dirs = [base.join("w1a"), base.join("w8"), base.join("w1b")];
    for (dir, workers) in dirs.iter().zip(["1", "8", "1"]) {
        std::fs::create_dir_all(dir).unwrap();
        let status = std::process::Command::new(bin)
            .args([
                "run",
                "--ensemble",
                "a",
                "--n",
                "64",
                "--samples",
                "40",
                "--seed",
                "99",
                "--workers",
                workers,
                "--out",
            ])
            .arg(dir)
            .status()
            .expect("spawn rmt2d");
        assert!(status.success());
    }
    let files =
        ["moments.json", "marginals.csv", "ratio2d.csv", "spacing.csv", "radial_density.csv"];
    for file in files {
        let a = std::fs::read(dirs[0].join(file)).unwrap();
        let b = std::fs::read(dirs[1].join(file)).unwrap();
        let c = std::fs::read(dirs[2].join(file)).unwrap();
        // workers and the output path differ in the config echo by
        // construction, so null them before comparing
        if file == "moments.json" {
            let norm = |bytes: &[u8]| {
                let mut v: serde_json::Value = serde_json::from_slice(bytes).unwrap();
                v["meta"]["config"]["workers"] = serde_json::json!(0);
                v["meta"]["config"]["output_dir"] = serde_json::json!(null);
                serde_json::to_string(&v).unwrap()
            };
            assert_eq!(norm(&a), norm(&b), "{file} differs between worker counts");
            assert_eq!(norm(&a), norm(&c), "{file} differs between repeated runs");
        } else {
            assert_eq!(a, b, "{file} differs between worker counts");
            assert_eq!(a, c, "{file} differs between repeated runs");
        }
    }
    std::fs::remove_dir_all(&base).ok();
    println!("criterion 12: PASS bit-exact artifacts for workers in {{1, 8}} and repeated runs");
}
