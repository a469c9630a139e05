//! Slower oracle cross-checks: brute-force character sums, Monte-Carlo
//! estimates against exact transition probabilities, and numeric semigroup
//! convolutions for the stable factor.

use adeheat::{
    character, char_integral_ball, char_integral_sphere, Filtration, FiniteAdele, HeatKernelFin,
    NormValue, StableKernel, TestFunction, TransitionFunction,
};
use adeheat::markov::{derive_stream, simulate_path, FiniteAdeleSampler};
use adeheat::quadrature::gl16;
use num_complex::Complex64;
use rand::Rng;

/// Riemann-sum oracle for the ball character integral: enumerate coset
/// representatives of B_n / B_{n−j} and weight the exact character values
/// by the coset measure.
#[test]
fn char_integral_ball_matches_riemann_character_sum() {
    let f = Filtration::factorial();
    let n = 1i64;
    let j = 4i64; // resolution B_{n−j}
    let tf = TestFunction::zero(&f, n, n - j).unwrap();
    let mu = f.ball_measure_f64(n - j).unwrap();

    for xi_norm in [-3i64, -1, 0, 1] {
        // one ξ per norm: canonical sphere point
        let mut rng = derive_stream(1234, xi_norm as u64 as u64);
        let xi =
            adeheat::sample_uniform_sphere(&f, xi_norm, xi_norm.abs() + 8, &mut rng).unwrap();
        let mut acc = Complex64::new(0.0, 0.0);
        for rank in 0..tf.dim() {
            let rep = tf.coset_rep(rank).unwrap();
            acc += character(&xi, &rep.neg()).unwrap();
        }
        let brute = acc * mu;
        let closed = char_integral_ball(&f, n, NormValue::Index(xi_norm)).unwrap();
        assert!(
            (brute.re - closed).abs() < 1e-9 && brute.im.abs() < 1e-9,
            "xi_norm={xi_norm}: brute {brute} vs closed {closed}"
        );
    }
}

#[test]
fn char_integral_sphere_matches_ball_differences() {
    // the sphere integral is the difference of two ball integrals at every
    // frequency norm, including the middle regime
    let f = Filtration::lcm();
    for n in -3..=3i64 {
        for xi in [
            NormValue::Zero,
            NormValue::Index(-n - 1),
            NormValue::Index(-n),
            NormValue::Index(-n + 1),
            NormValue::Index(-n + 2),
        ] {
            let sphere = char_integral_sphere(&f, n, xi).unwrap();
            let diff = char_integral_ball(&f, n, xi).unwrap()
                - char_integral_ball(&f, n - 1, xi).unwrap();
            assert!(
                (sphere - diff).abs() < 1e-10,
                "n={n} xi={xi:?}: {sphere} vs {diff}"
            );
        }
    }
}

/// Dense-matrix oracle at the acceptance dimension 576.
#[test]
fn fourier_matrix_oracle_at_dim_576() {
    let f = Filtration::factorial();
    let (k, l) = (3i64, -3i64);
    let dim = adeheat::schwartz::space_dim(&f, k, l).unwrap();
    assert_eq!(dim, 576);

    let mut rng = derive_stream(555, 0);
    let coeffs: Vec<Complex64> = (0..dim)
        .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        .collect();
    let tf = TestFunction::new(&f, k, l, coeffs).unwrap();
    let ft = tf.fourier().unwrap();

    let mat = adeheat::schwartz::fourier_matrix(&f, k, l).unwrap();
    for b in (0..dim).step_by(37) {
        let acc: Complex64 = mat[b].iter().zip(tf.coeffs()).map(|(m, c)| m * c).sum();
        assert!(
            (acc - ft.coeffs()[b]).norm() < 1e-9,
            "rank {b}: {acc} vs {}",
            ft.coeffs()[b]
        );
    }
}

/// Monte-Carlo oracle for the exact transition probability: the empirical
/// hit frequency of a ball must match P(t, x, B) within 3 standard errors.
#[test]
fn transition_probability_matches_monte_carlo() {
    let filt = Filtration::factorial();
    let hk = HeatKernelFin::new(&filt, 1.0, None, None).unwrap();
    let t = 0.7;
    let tf = TransitionFunction::new(hk.clone());
    let sampler = FiniteAdeleSampler::new(&hk, t, None).unwrap();
    let mut rng = derive_stream(99, 0);

    let start = FiniteAdele::from_digits(&filt, 0, &[1, 1], 20).unwrap();
    let draws = 1_000_000u64;

    // two balls: one containing the start point, one a shifted coset
    let center_in = FiniteAdele::zero(&filt, 20);
    let center_out = FiniteAdele::from_digits(&filt, -2, &[1], 20).unwrap();
    let k = 1i64;
    let p_in = tf.prob_ball(t, &start, &center_in, k).unwrap();
    let p_out = tf.prob_ball(t, &start, &center_out, k).unwrap();

    let mut hit_in = 0u64;
    let mut hit_out = 0u64;
    for _ in 0..draws {
        let inc = sampler.sample(&mut rng).unwrap();
        let x = start.add(&inc).unwrap();
        if x.in_ball(&center_in, k).unwrap() {
            hit_in += 1;
        }
        if x.in_ball(&center_out, k).unwrap() {
            hit_out += 1;
        }
    }
    for (hits, p, tag) in [(hit_in, p_in, "containing"), (hit_out, p_out, "shifted")] {
        let got = hits as f64 / draws as f64;
        let sigma = (p * (1.0 - p) / draws as f64).sqrt().max(1e-9);
        assert!(
            (got - p).abs() <= 3.0 * sigma,
            "{tag} ball: empirical {got} vs exact {p} (σ {sigma:.2e})"
        );
    }
}

/// Translation homogeneity: with the same stream, a path started at x0 is
/// the zero-started path shifted by x0.
#[test]
fn paths_are_translation_homogeneous() {
    let filt = Filtration::factorial();
    let hk = HeatKernelFin::new(&filt, 1.0, None, None).unwrap();
    let times = [0.0, 0.3, 0.8, 1.4];
    let x0 = FiniteAdele::from_digits(&filt, -1, &[1, 0, 2], 24).unwrap();

    let mut r1 = derive_stream(2024, 0);
    let mut r2 = derive_stream(2024, 0);
    let from_zero = simulate_path(&hk, &times, None, None, &mut r1).unwrap();
    let from_x0 = simulate_path(&hk, &times, Some(x0.clone()), None, &mut r2).unwrap();
    for (a, b) in from_zero.states.iter().zip(&from_x0.states) {
        let shifted = a.add(&x0).unwrap();
        let diff = shifted.sub(b).unwrap();
        assert!(diff.is_zero(), "states differ by {diff}");
    }
}

/// Numeric convolution oracle for the stable semigroup:
/// `Z(·,t) * Z(·,s) = Z(·,t+s)` on a grid. Closed-form exponents cover the
/// convention; the quadrature path is spot-checked at β = 1.5.
#[test]
fn stable_semigroup_under_numeric_convolution() {
    let (t, s) = (0.6, 0.9);
    // panels graded toward the peaks at y = 0 and y = x (width ~ t/(2π))
    let step_at = |y: f64| -> f64 {
        let d = y.abs().min((y - 1.5).abs());
        if d <= 2.0 {
            0.02
        } else if d <= 10.0 {
            0.25
        } else if d <= 50.0 {
            1.0
        } else {
            5.0
        }
    };
    for beta in [1.0f64, 2.0] {
        let k = StableKernel::new(beta).unwrap();
        for x in [0.0, 0.4, 1.3] {
            let mut f = |y: f64| k.eval(x - y, t).unwrap() * k.eval(y, s).unwrap();
            let mut conv = 0.0;
            let mut a = -400.0f64;
            while a < 400.0 {
                let step = step_at(a);
                conv += gl16(&mut f, a, a + step);
                a += step;
            }
            let direct = k.eval(x, t + s).unwrap();
            assert!(
                (conv - direct).abs() < 1e-5,
                "β={beta} x={x}: {conv} vs {direct}"
            );
        }
    }

    let k = StableKernel::new(1.5).unwrap();
    for x in [0.0, 0.8] {
        let mut f = |y: f64| k.eval(x - y, t).unwrap() * k.eval(y, s).unwrap();
        let mut conv = 0.0;
        let mut a = -200.0f64;
        while a < 200.0 {
            let step = step_at(a);
            conv += gl16(&mut f, a, a + step);
            a += step;
        }
        let direct = k.eval(x, t + s).unwrap();
        assert!(
            (conv - direct).abs() < 1e-4,
            "β=1.5 x={x}: {conv} vs {direct}"
        );
    }
}

/// Isotropic-Laplacian comparison kernel: unit mass by its own telescoping
/// and sphere-decomposition consistency.
#[test]
fn isotropic_kernel_mass_oracle() {
    for filt in [Filtration::factorial(), Filtration::prime_power(3).unwrap()] {
        let hk = HeatKernelFin::new(&filt, 0.8, None, None).unwrap();
        for t in [0.2, 2.0] {
            let (lo, hi) = hk.window();
            let mut mass = 0.0;
            for m in lo..=hi {
                mass += filt.sphere_measure_f64(m).unwrap()
                    * hk.isotropic_kernel_radial(m, t).unwrap();
            }
            assert!((mass - 1.0).abs() < 1e-10, "{} t={t}: {mass}", filt.name());
        }
    }
}
