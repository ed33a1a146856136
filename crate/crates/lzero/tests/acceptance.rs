//! End-to-end acceptance checks, one per headline guarantee of the
//! crate. Every test prints a single `acceptance NN PASS/FAIL` line
//! with the measured numbers (run with `--nocapture` to see them all),
//! and the expected values are re-derived in place — closed forms,
//! gamma-function identities, or independent quadratures — rather than
//! read back from the code under test.

use lzero::approximation::{dyadicize_weights, fit_ellipsoid_product};
use lzero::bodies::{ball, directional_ellipsoid, ellipsoid, linear_image, lq_ball, mult_sum};
use lzero::embedding::{
    embedding_constant, embeds_in_l0, log_ft, log_ft_ellipsoid_closed_form, log_ft_with,
    log_kernel_integral, neg_p_embed_test, spectral_measure_density, transform_coefficient,
    verify_log_representation, Verdict,
};
use lzero::experiments::{
    cauchy_log_moment_mc, counterexample_body, counterexample_value,
    counterexample_support, find_counterexample_threshold,
};
use lzero::numerics::grid::{sphere_grid, GridKind, SphereGrid};
use lzero::numerics::linalg::{mat_vec, transpose};
use lzero::numerics::quad::{integrate_1d, EndpointHint, UpperBound};
use lzero::numerics::special::{gamma, sphere_area};
use lzero::numerics::tol::Tolerances;
use lzero::sections::{SectionMethod, SectionProfile};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

/// Prints the one-line verdict for a check and then enforces it.
fn check(index: usize, name: &str, pass: bool, detail: String) {
    let verdict = if pass { "PASS" } else { "FAIL" };
    println!("acceptance {index:02} {verdict} {name}: {detail}");
    assert!(pass, "acceptance {index:02} {name}: {detail}");
}

fn rel(value: f64, target: f64) -> f64 {
    ((value - target) / target).abs()
}

fn unit(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let norm: f64 = v.iter().map(|c| c * c).sum::<f64>().sqrt();
        if norm > 0.2 {
            return v.iter().map(|c| c / norm).collect();
        }
    }
}

fn grid3(res: usize) -> SphereGrid {
    sphere_grid(3, res, GridKind::Deterministic).unwrap()
}

#[test]
fn ball_transform_in_odd_dimensions() {
    let tol = Tolerances::default();
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let xi3 = unit(&mut rng, 3);
    let xi5 = unit(&mut rng, 5);
    // −2^{n−1} π^{n/2} Γ(n/2): −2π² for n = 3 and −12π³ for n = 5.
    let t3 = -2.0 * PI * PI;
    let t5 = -12.0 * PI.powi(3);
    let closed3 = log_ft_with(&ball(3), &xi3, SectionMethod::ClosedForm, &tol).unwrap();
    let radial3 = log_ft_with(&ball(3), &xi3, SectionMethod::RadialSlice, &tol).unwrap();
    let closed5 = log_ft_with(&ball(5), &xi5, SectionMethod::ClosedForm, &tol).unwrap();
    let radial5 = log_ft_with(&ball(5), &xi5, SectionMethod::RadialSlice, &tol).unwrap();
    // the a = b = 1 ellipsoid formula must collapse to the same numbers
    let formula3 = log_ft_ellipsoid_closed_form(&xi3, 1.0, 1.0, &xi3, 3);
    let pass = rel(closed3, t3) < 1e-6
        && rel(radial3, t3) < 1e-3
        && rel(closed5, t5) < 1e-4
        && rel(radial5, t5) < 1e-3
        && rel(formula3, t3) < 1e-12;
    check(
        1,
        "ball transform in odd dimensions",
        pass,
        format!(
            "B3 -> -2pi^2 rel {:.1e} (sections) / {:.1e} (radial slice); B5 -> -12pi^3 rel {:.1e} / {:.1e}",
            rel(closed3, t3),
            rel(radial3, t3),
            rel(closed5, t5),
            rel(radial5, t5),
        ),
    );
}

#[test]
fn regularized_integral_in_even_dimensions() {
    let tol = Tolerances::default();
    let xi = unit(&mut ChaCha8Rng::seed_from_u64(102), 4);
    let target = 2.0 * PI * PI / 3.0;
    let closed = SectionProfile::new(&ball(4), &xi, SectionMethod::Auto, &tol)
        .and_then(|p| p.regularized_integral())
        .unwrap();
    let radial = SectionProfile::new(&ball(4), &xi, SectionMethod::RadialSlice, &tol)
        .and_then(|p| p.regularized_integral())
        .unwrap();
    let a4 = transform_coefficient(4);
    let scaled = a4 * closed;
    let target_ft = -8.0 * PI * PI;
    let pass = rel(closed, target) < 1e-4
        && rel(radial, target) < 1e-3
        && a4 == -12.0
        && rel(scaled, target_ft) < 1e-4;
    check(
        2,
        "regularized integral in even dimensions",
        pass,
        format!(
            "I(B4) -> 2pi^2/3 rel {:.1e} (sections) / {:.1e} (radial slice); a4*I -> -8pi^2 rel {:.1e}",
            rel(closed, target),
            rel(radial, target),
            rel(scaled, target_ft),
        ),
    );
}

#[test]
fn ellipsoid_sections_match_the_closed_form() {
    let tol = Tolerances::default();
    let mut rng = ChaCha8Rng::seed_from_u64(103);
    let mut worst3 = 0.0f64;
    let mut worst5 = 0.0f64;
    for case in 0..20 {
        // the generic radial-slice quadrature is integration-grade for
        // n = 3; in n = 5 it is a coarse scan grid, so the pipeline is
        // exercised there through the section profile's own closed form
        let n = if case % 2 == 0 { 3 } else { 5 };
        let axis = unit(&mut rng, n);
        let a = rng.gen_range(0.5..2.5);
        let b = rng.gen_range(0.5..2.5);
        let theta = unit(&mut rng, n);
        let body = directional_ellipsoid(&axis, a, b);
        let exact = log_ft_ellipsoid_closed_form(&axis, a, b, &theta, n);
        if n == 3 {
            let got = log_ft_with(&body, &theta, SectionMethod::RadialSlice, &tol).unwrap();
            worst3 = worst3.max(rel(got, exact));
        } else {
            let got = log_ft_with(&body, &theta, SectionMethod::Auto, &tol).unwrap();
            worst5 = worst5.max(rel(got, exact));
        }
    }
    // spot value: a = 2, b = 1 along the axis gives exactly −π²/2
    let e3 = [0.0, 0.0, 1.0];
    let spot_body = directional_ellipsoid(&e3, 2.0, 1.0);
    let spot = log_ft_with(&spot_body, &e3, SectionMethod::RadialSlice, &tol).unwrap();
    let spot_target = -PI * PI / 2.0;
    let pass = worst3 < 1e-3 && worst5 < 1e-3 && rel(spot, spot_target) < 1e-3;
    check(
        3,
        "ellipsoid sections match the closed form",
        pass,
        format!(
            "20 random (axis,a,b,theta): worst rel {:.1e} (n=3, radial slice) / {:.1e} (n=5); spot -pi^2/2 rel {:.1e}",
            worst3,
            worst5,
            rel(spot, spot_target),
        ),
    );
}

#[test]
fn embedding_constant_of_the_ball() {
    let tol = Tolerances::default();
    let c_digamma = embedding_constant(&ball(3), &grid3(24)).unwrap();
    // independent route: the uniform probability measure represents the
    // Euclidean norm, and ∫ ln|(x,ξ)| dσ(ξ) = −1 at |x| = 1, so C = 1
    let x = unit(&mut ChaCha8Rng::seed_from_u64(104), 3);
    let one = |_: &[f64]| 1.0;
    let mean = log_kernel_integral(&one, &x, 3, 12, &tol).unwrap() / sphere_area(3);
    let c_quadrature = -mean;
    let pass = (c_digamma - 1.0).abs() < 1e-8 && (c_quadrature - 1.0).abs() < 1e-3;
    check(
        4,
        "embedding constant of the ball",
        pass,
        format!(
            "C(B3) = 1 within {:.1e} (digamma) and {:.1e} (log-kernel quadrature)",
            (c_digamma - 1.0).abs(),
            (c_quadrature - 1.0).abs(),
        ),
    );
}

#[test]
fn spectral_measures_carry_unit_mass() {
    let tol = Tolerances::default();
    let grid = grid3(24);
    let mass_of = |body: &lzero::bodies::StarBody, grid: &SphereGrid| -> f64 {
        let density = spectral_measure_density(body, grid, &tol).unwrap();
        grid.iter().zip(&density).map(|((_, w), d)| w * d).sum()
    };
    let mut worst = (mass_of(&ball(3), &grid) - 1.0).abs();
    let grid4 = sphere_grid(4, 8, GridKind::Deterministic).unwrap();
    worst = worst.max((mass_of(&ball(4), &grid4) - 1.0).abs());
    let mut rng = ChaCha8Rng::seed_from_u64(105);
    for case in 0..10 {
        let body = if case % 2 == 0 {
            directional_ellipsoid(&unit(&mut rng, 3), rng.gen_range(0.5..2.0), rng.gen_range(0.5..2.0))
        } else {
            // symmetric positive definite with a random rank-one bump
            let q = unit(&mut rng, 3);
            let base = rng.gen_range(0.5..2.0);
            let bump = rng.gen_range(0.5..2.0) - base;
            let mut m = vec![vec![0.0; 3]; 3];
            for i in 0..3 {
                m[i][i] = base;
                for j in 0..3 {
                    m[i][j] += bump * q[i] * q[j];
                }
            }
            ellipsoid(m).unwrap()
        };
        worst = worst.max((mass_of(&body, &grid) - 1.0).abs());
    }
    for _ in 0..5 {
        let e1 = directional_ellipsoid(&unit(&mut rng, 3), rng.gen_range(0.5..2.0), rng.gen_range(0.5..2.0));
        let e2 = directional_ellipsoid(&unit(&mut rng, 3), rng.gen_range(0.5..2.0), rng.gen_range(0.5..2.0));
        worst = worst.max((mass_of(&mult_sum(e1, e2), &grid) - 1.0).abs());
    }
    check(
        5,
        "spectral measures carry unit mass",
        worst < 1e-3,
        format!("worst |mass - 1| over B3, B4, 10 ellipsoids, 5 mult sums: {worst:.1e}"),
    );
}

#[test]
fn lq_balls_embed_in_three_dimensions() {
    let tol = Tolerances::scan();
    let grid = grid3(12);
    let mut detail = String::new();
    let mut pass = true;
    for &q in &[1.5f64, 2.0, 3.0, 6.0] {
        let report = embeds_in_l0(&lq_ball(3, q), &grid, &tol).unwrap();
        pass = pass
            && report.verdict == Verdict::Embeds
            && report.min_margin >= -report.tolerance;
        if !detail.is_empty() {
            detail.push_str(", ");
        }
        detail.push_str(&format!("q={q}: margin {:.1e}", report.min_margin));
    }
    check(6, "lq balls embed in three dimensions", pass, detail);
}

#[test]
fn quartic_counterexample_and_threshold() {
    let record = counterexample_value(1.0).unwrap();
    // at N = 1 the support solves a⁴ + a² = 1, so a² is the reciprocal
    // golden ratio and the axis value has its own closed form
    let a = ((5f64.sqrt() - 1.0) / 2.0).sqrt();
    let oracle = 4.0 * PI / 3.0 * (-a + 1.0 / a - 1.0 / (3.0 * a * a * a));
    let axis_witness = record
        .witness
        .as_ref()
        .map(|w| w[3].abs() > 0.99)
        .unwrap_or(false);
    let record0 = counterexample_value(0.0).unwrap();
    let target0 = 8.0 * PI / 9.0;
    let threshold = find_counterexample_threshold(0.0, 1.0).unwrap();
    let a_big = counterexample_support(1e8).unwrap();
    let tail = (1e8f64.powf(0.25) * a_big - 1.0).abs();
    let pass = (record.closed_form_value - oracle).abs() < 1e-3
        && rel(record.numeric_i, record.closed_form_value) < 1e-3
        && record.verdict == Verdict::Fails
        && axis_witness
        && rel(record0.closed_form_value, target0) < 1e-3
        && record0.closed_form_value > 0.0
        && threshold > 0.0
        && threshold < 1.0
        && tail < 0.01;
    check(
        7,
        "quartic counterexample and threshold",
        pass,
        format!(
            "value(1) = {:.6} (oracle {:.6}, numeric I rel {:.1e}, fails at the axis); value(0) = 8pi/9 rel {:.1e}; threshold {:.4}; N^(1/4) a_N -> 1 within {:.1e} at N = 1e8",
            record.closed_form_value,
            oracle,
            rel(record.numeric_i, record.closed_form_value),
            rel(record0.closed_form_value, target0),
            threshold,
            tail,
        ),
    );
}

#[test]
fn log_representation_identity() {
    let tol = Tolerances::default();
    let mut rng = ChaCha8Rng::seed_from_u64(108);
    let points: Vec<Vec<f64>> = (0..6)
        .map(|_| {
            let u = unit(&mut rng, 3);
            let r = rng.gen_range(0.5..2.0);
            u.iter().map(|c| c * r).collect()
        })
        .collect();
    let ball_report = verify_log_representation(&ball(3), 1.0, &points, 12, &tol).unwrap();
    let cgrid = grid3(24);
    let mut worst = 0.0f64;
    for _ in 0..10 {
        let body = directional_ellipsoid(
            &unit(&mut rng, 3),
            rng.gen_range(0.7..1.6),
            rng.gen_range(0.7..1.6),
        );
        let c = embedding_constant(&body, &cgrid).unwrap();
        let report = verify_log_representation(&body, c, &points[..3], 12, &tol).unwrap();
        worst = worst.max(report.max_residual);
    }
    let pass = ball_report.max_residual < 5e-3 && worst < 5e-3;
    check(
        8,
        "log representation identity",
        pass,
        format!(
            "max residual {:.1e} (ball, C = 1) and {:.1e} (10 random ellipsoids)",
            ball_report.max_residual, worst,
        ),
    );
}

#[test]
fn ellipsoid_product_approximation_pipeline() {
    let tol = Tolerances::default();
    let body = lq_ball(3, 4.0);
    let grid = grid3(24);
    let schedule = [(0.4, 0.4), (0.2, 0.2), (0.1, 0.1)];
    let mut errors = Vec::new();
    let mut weight_drift = 0.0f64;
    let mut last = None;
    for &(a, sigma) in &schedule {
        let fit = fit_ellipsoid_product(&body, a, 1.0, sigma, &grid, &tol).unwrap();
        errors.push(fit.sup_log_error);
        weight_drift = weight_drift.max((fit.product.weight_sum() - 1.0).abs());
        last = Some(fit.product);
    }
    let product = last.unwrap();
    let dyadic = dyadicize_weights(&product, 10).unwrap();
    weight_drift = weight_drift.max((dyadic.weight_sum() - 1.0).abs());
    let mut perturbation = 0.0f64;
    for (node, _) in grid.iter() {
        let d = (dyadic.gauge(node).ln() - product.gauge(node).ln()).abs();
        perturbation = perturbation.max(d);
    }
    let embed = embeds_in_l0(&product.to_star_body(), &grid3(12), &Tolerances::scan()).unwrap();
    let pass = errors[0] > errors[1]
        && errors[1] > errors[2]
        && errors[2] < 0.05
        && weight_drift < 1e-12
        && perturbation < 1e-2
        && embed.verdict == Verdict::Embeds;
    check(
        9,
        "ellipsoid product approximation pipeline",
        pass,
        format!(
            "sup-log errors {:.4} > {:.4} > {:.4} (< 0.05); weight drift {:.1e}; dyadic depth-10 perturbation {:.1e}; fitted product embeds: {}",
            errors[0],
            errors[1],
            errors[2],
            weight_drift,
            perturbation,
            embed.verdict == Verdict::Embeds,
        ),
    );
}

#[test]
fn covariance_under_diagonal_maps() {
    let tol = Tolerances::default();
    let mut rng = ChaCha8Rng::seed_from_u64(110);
    let mut worst = 0.0f64;
    for _ in 0..6 {
        let base = directional_ellipsoid(
            &unit(&mut rng, 3),
            rng.gen_range(0.6..1.8),
            rng.gen_range(0.6..1.8),
        );
        let t: Vec<Vec<f64>> = (0..3)
            .map(|i| {
                (0..3)
                    .map(|j| if i == j { rng.gen_range(0.5..2.0) } else { 0.0 })
                    .collect()
            })
            .collect();
        let det: f64 = (0..3).map(|i| t[i][i]).product();
        let image = linear_image(t.clone(), base.clone()).unwrap();
        let xi = unit(&mut rng, 3);
        // transform of T K at ξ = |det T| · |Tᵀξ|^{−n} · transform of K
        // at the direction of Tᵀξ; the left side goes through the
        // numeric section pipeline of the image body
        let z = mat_vec(&transpose(&t), &xi);
        let zn: f64 = z.iter().map(|c| c * c).sum::<f64>().sqrt();
        let zu: Vec<f64> = z.iter().map(|c| c / zn).collect();
        let rhs = det.abs() * zn.powi(-3) * log_ft(&base, &zu, &tol).unwrap();
        let lhs = log_ft_with(&image, &xi, SectionMethod::RadialSlice, &tol).unwrap();
        worst = worst.max(rel(lhs, rhs));
    }
    check(
        10,
        "covariance under diagonal maps",
        worst < 1e-3,
        format!("worst rel deviation over 6 random (ellipsoid, T, xi): {worst:.1e}"),
    );
}

#[test]
fn negative_power_transforms() {
    let tol = Tolerances::default();
    let report = neg_p_embed_test(&ball(3), 0.5, &grid3(6), false, &tol).unwrap();
    // |x|^{−1/2} on R³ has transform 2^{5/2} π^{3/2} Γ(5/4)/Γ(1/4) > 0
    let oracle = 2.0f64.powf(2.5) * PI.powf(1.5) * gamma(1.25) / gamma(0.25);
    let ball_ok = rel(report.min_value, oracle) < 1e-3 && report.verdict == Verdict::Embeds;
    let body = counterexample_body(1.0).unwrap();
    let grid4 = sphere_grid(4, 3, GridKind::Deterministic).unwrap();
    let mut failing_p = None;
    for &p in &[0.5f64, 0.25, 0.1] {
        let r = neg_p_embed_test(&body, p, &grid4, false, &tol).unwrap();
        if r.verdict == Verdict::Fails {
            failing_p = Some((p, r.min_value));
            break;
        }
    }
    let pass = ball_ok && failing_p.is_some();
    check(
        11,
        "negative power transforms",
        pass,
        format!(
            "ball p=0.5 value rel {:.1e} vs gamma oracle; counterexample fails at p={:?}",
            rel(report.min_value, oracle),
            failing_p,
        ),
    );
}

#[test]
fn cauchy_log_moments() {
    let mc = cauchy_log_moment_mc(1.0, &[1.0], 1_000_000, 0);
    let target = 0.5 * 2f64.ln();
    let dev = (mc.estimate - target).abs();
    // the moment formula rests on (1/π)∫ ln|x|/(1+x²) dx = 0; check it
    // by quadrature after x = tan θ, splitting at the symmetry point
    let tol = Tolerances::default();
    let f = |t: f64| t.tan().abs().max(1e-300).ln();
    let q = PI / 4.0;
    let i1 = integrate_1d(&f, 0.0, UpperBound::Finite(q), EndpointHint::Regular, &tol).unwrap();
    let i2 =
        integrate_1d(&f, q, UpperBound::Finite(2.0 * q), EndpointHint::Regular, &tol).unwrap();
    let lone = (i1 + i2) * 2.0 / PI;
    let pass = (mc.target - target).abs() < 1e-15 && dev < 3.0 * mc.stderr && lone.abs() < 1e-6;
    check(
        12,
        "cauchy log moments",
        pass,
        format!(
            "E ln|1 + f| = {:.6} vs ln(2)/2 = {:.6} ({:.2} sigma at 1e6 samples); log-moment quadrature {:.1e}",
            mc.estimate,
            target,
            dev / mc.stderr,
            lone.abs(),
        ),
    );
}

#[test]
fn fractional_derivative_orders() {
    let tol = Tolerances::default();
    let e3 = [0.0, 0.0, 1.0];
    let closed = SectionProfile::new(&ball(3), &e3, SectionMethod::Auto, &tol).unwrap();
    let radial = SectionProfile::new(&ball(3), &e3, SectionMethod::RadialSlice, &tol).unwrap();
    // A(t) = π(1 − t²) for B³ has A^{(3/2)}(0) = −2√π
    let target = -2.0 * PI.sqrt();
    let f_closed = closed.fractional_derivative(1.5).unwrap();
    let f_radial = radial.fractional_derivative(1.5).unwrap();
    let near_two = closed.fractional_derivative(1.999).unwrap();
    let second = closed.derivative(2).unwrap();
    let pass = rel(f_closed, target) < 1e-4
        && rel(f_radial, target) < 1e-4
        && rel(near_two, second) < 1e-2;
    check(
        13,
        "fractional derivative orders",
        pass,
        format!(
            "A^(1.5)(0) -> -2 sqrt(pi) rel {:.1e} (sections) / {:.1e} (radial slice); q = 1.999 vs A''(0) rel {:.1e}",
            rel(f_closed, target),
            rel(f_radial, target),
            rel(near_two, second),
        ),
    );
}
