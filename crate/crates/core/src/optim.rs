//! Derivative-free minimisation and finite-difference derivatives.

use alloc::vec;
use alloc::vec::Vec;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NelderMeadOptions {
    pub max_iterations: usize,
    /// Stop when `|f_worst - f_best| <= f_rel_tol * max(|f_best|, 1)` ...
    pub f_rel_tol: f64,
    /// ... and every vertex is within `x_tol` (max-norm) of the best.
    pub x_tol: f64,
}

impl Default for NelderMeadOptions {
    fn default() -> Self {
        Self {
            max_iterations: 2000,
            f_rel_tol: 1e-10,
            x_tol: 1e-8,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub f: f64,
    pub iterations: usize,
    pub evaluations: usize,
    pub converged: bool,
}

/// Minimises `f` starting from the simplex `x0, x0 + steps[i]·eᵢ`.
/// Non-finite objective values are treated as `+∞`.
pub fn nelder_mead<F: FnMut(&[f64]) -> f64>(
    mut f: F,
    x0: &[f64],
    steps: &[f64],
    opts: &NelderMeadOptions,
) -> Minimum {
    let n = x0.len();
    let mut evaluations = 0usize;
    let mut eval = |x: &[f64]| {
        evaluations += 1;
        let v = f(x);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    };

    let mut simplex: Vec<Vec<f64>> = Vec::with_capacity(n + 1);
    simplex.push(x0.to_vec());
    for i in 0..n {
        let mut v = x0.to_vec();
        v[i] += if steps[i] != 0.0 { steps[i] } else { 0.05 };
        simplex.push(v);
    }
    let mut values: Vec<f64> = simplex.iter().map(|v| eval(v)).collect();

    let (alpha, gamma, rho, sigma) = (1.0, 2.0, 0.5, 0.5);
    let mut centroid = vec![0.0; n];
    let mut trial = vec![0.0; n];
    let mut trial2 = vec![0.0; n];
    let mut iterations = 0;
    let mut converged = false;

    loop {
        let mut order: Vec<usize> = (0..=n).collect();
        order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
        simplex = order.iter().map(|&i| simplex[i].clone()).collect();
        values = order.iter().map(|&i| values[i]).collect();

        let best = values[0];
        let worst = values[n];
        let spread = (worst - best).abs();
        let diameter = simplex[1..]
            .iter()
            .flat_map(|v| v.iter().zip(&simplex[0]).map(|(a, b)| (a - b).abs()))
            .fold(0.0, f64::max);
        if best.is_finite()
            && spread <= opts.f_rel_tol * best.abs().max(1.0)
            && diameter <= opts.x_tol
        {
            converged = true;
            break;
        }
        if iterations >= opts.max_iterations {
            break;
        }
        iterations += 1;

        centroid.iter_mut().for_each(|c| *c = 0.0);
        for v in &simplex[..n] {
            for (c, x) in centroid.iter_mut().zip(v) {
                *c += x / n as f64;
            }
        }
        let worst_x = simplex[n].clone();
        let along = |coef: f64, out: &mut [f64]| {
            for k in 0..n {
                out[k] = centroid[k] + coef * (centroid[k] - worst_x[k]);
            }
        };

        along(alpha, &mut trial);
        let fr = eval(&trial);
        if fr < values[0] {
            along(gamma, &mut trial2);
            let fe = eval(&trial2);
            if fe < fr {
                simplex[n].copy_from_slice(&trial2);
                values[n] = fe;
            } else {
                simplex[n].copy_from_slice(&trial);
                values[n] = fr;
            }
            continue;
        }
        if fr < values[n - 1] {
            simplex[n].copy_from_slice(&trial);
            values[n] = fr;
            continue;
        }
        // contraction, outside if the reflection improved on the worst point
        let (coef, target) = if fr < values[n] {
            (rho, fr)
        } else {
            (-rho, values[n])
        };
        along(coef, &mut trial2);
        let fc = eval(&trial2);
        if fc < target {
            simplex[n].copy_from_slice(&trial2);
            values[n] = fc;
            continue;
        }
        let best_x = simplex[0].clone();
        for (v, fv) in simplex.iter_mut().zip(values.iter_mut()).skip(1) {
            for k in 0..n {
                v[k] = best_x[k] + sigma * (v[k] - best_x[k]);
            }
            *fv = eval(v);
        }
    }

    Minimum {
        x: simplex.swap_remove(0),
        f: values[0],
        iterations,
        evaluations,
        converged,
    }
}

/// Finite-difference step on the optimisation scale.
pub fn fd_step(x: f64) -> f64 {
    (1e-4 * x.abs()).max(1e-4)
}

/// Central-difference gradient.
pub fn gradient<F: FnMut(&[f64]) -> f64>(mut f: F, x: &[f64]) -> Vec<f64> {
    let mut p = x.to_vec();
    (0..x.len())
        .map(|i| {
            let h = fd_step(x[i]);
            p[i] = x[i] + h;
            let up = f(&p);
            p[i] = x[i] - h;
            let down = f(&p);
            p[i] = x[i];
            (up - down) / (2.0 * h)
        })
        .collect()
}

/// Central-difference Hessian, row-major and exactly symmetric.
pub fn hessian<F: FnMut(&[f64]) -> f64>(mut f: F, x: &[f64]) -> Vec<f64> {
    let n = x.len();
    let f0 = f(x);
    let h: Vec<f64> = x.iter().map(|&v| fd_step(v)).collect();
    let mut out = vec![0.0; n * n];
    let mut p = x.to_vec();
    for i in 0..n {
        p[i] = x[i] + h[i];
        let up = f(&p);
        p[i] = x[i] - h[i];
        let down = f(&p);
        p[i] = x[i];
        out[i * n + i] = (up - 2.0 * f0 + down) / (h[i] * h[i]);
        for j in 0..i {
            let mut corner = |si: f64, sj: f64| {
                p[i] = x[i] + si * h[i];
                p[j] = x[j] + sj * h[j];
                let v = f(&p);
                p[i] = x[i];
                p[j] = x[j];
                v
            };
            let v = (corner(1.0, 1.0) - corner(1.0, -1.0) - corner(-1.0, 1.0) + corner(-1.0, -1.0))
                / (4.0 * h[i] * h[j]);
            out[i * n + j] = v;
            out[j * n + i] = v;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rosenbrock(x: &[f64]) -> f64 {
        (1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2)
    }

    #[test]
    fn minimises_rosenbrock() {
        let m = nelder_mead(
            rosenbrock,
            &[-1.2, 1.0],
            &[0.5, 0.5],
            &NelderMeadOptions::default(),
        );
        assert!(m.converged);
        assert!(
            (m.x[0] - 1.0).abs() < 1e-6 && (m.x[1] - 1.0).abs() < 1e-6,
            "{:?}",
            m.x
        );
    }

    #[test]
    fn minimises_quadratic_in_four_dims() {
        let target = [0.3, -1.0, 2.0, 0.5];
        let f = |x: &[f64]| {
            x.iter()
                .zip(&target)
                .enumerate()
                .map(|(i, (a, b))| (i as f64 + 1.0) * (a - b).powi(2))
                .sum::<f64>()
                + 0.3 * (x[0] - target[0]) * (x[2] - target[2])
        };
        let m = nelder_mead(f, &[0.0; 4], &[0.5; 4], &NelderMeadOptions::default());
        assert!(m.converged);
        for (a, b) in m.x.iter().zip(&target) {
            assert!((a - b).abs() < 1e-7);
        }
    }

    #[test]
    fn iteration_cap_is_reported() {
        let opts = NelderMeadOptions {
            max_iterations: 5,
            ..Default::default()
        };
        let m = nelder_mead(rosenbrock, &[-1.2, 1.0], &[0.5, 0.5], &opts);
        assert!(!m.converged);
        assert_eq!(m.iterations, 5);
    }

    #[test]
    fn nan_is_rejected() {
        let f = |x: &[f64]| {
            if x[0] < 0.0 {
                f64::NAN
            } else {
                (x[0] - 1.0).powi(2)
            }
        };
        let m = nelder_mead(f, &[0.5], &[0.1], &NelderMeadOptions::default());
        assert!((m.x[0] - 1.0).abs() < 1e-7);
    }

    #[test]
    fn finite_differences_of_a_cubic() {
        let f = |x: &[f64]| x[0].powi(3) + 2.0 * x[0] * x[1] + x[1] * x[1];
        let x = [1.5, -0.5];
        let g = gradient(f, &x);
        assert!((g[0] - (3.0 * 2.25 - 1.0)).abs() < 1e-6);
        assert!((g[1] - (3.0 - 1.0)).abs() < 1e-6);
        let h = hessian(f, &x);
        assert!((h[0] - 9.0).abs() < 1e-5);
        assert!((h[1] - 2.0).abs() < 1e-6 && h[1] == h[2]);
        assert!((h[3] - 2.0).abs() < 1e-6);
    }
}
