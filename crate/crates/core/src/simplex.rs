//! Nelder-Mead on the unit box `[0, 1]^n`. Trial points are clamped onto the
//! box; the caller maps unit coordinates onto physical ones.

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimplexOptions {
    pub reflection: f64,
    pub expansion: f64,
    pub contraction: f64,
    pub shrink: f64,
    pub max_evals: usize,
    /// Converged once the largest vertex distance from the best vertex
    /// falls below this.
    pub diameter_tol: f64,
    pub initial_step: f64,
}

impl Default for SimplexOptions {
    fn default() -> Self {
        SimplexOptions {
            reflection: 1.0,
            expansion: 2.0,
            contraction: 0.5,
            shrink: 0.5,
            max_evals: 2000,
            diameter_tol: 1e-6,
            initial_step: 0.1,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimplexResult {
    pub x: Vec<f64>,
    pub f: f64,
    pub evals: usize,
    pub converged: bool,
}

fn clamp_unit(x: &mut [f64]) {
    for v in x {
        *v = v.clamp(0.0, 1.0);
    }
}

fn diameter(simplex: &[Vec<f64>]) -> f64 {
    let best = &simplex[0];
    simplex[1..]
        .iter()
        .map(|v| v.iter().zip(best).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt())
        .fold(0.0, f64::max)
}

/// Minimizes `f` from `start`. Non-finite objective values are treated as
/// `+inf`, so infeasible regions are simply never accepted.
pub fn minimize<F>(mut f: F, start: &[f64], opts: &SimplexOptions) -> SimplexResult
where
    F: FnMut(&[f64]) -> f64,
{
    let n = start.len();
    let mut evals = 0usize;
    let mut eval = |x: &[f64], evals: &mut usize| {
        *evals += 1;
        let v = f(x);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    };

    if n == 0 {
        let v = eval(start, &mut evals);
        return SimplexResult {
            x: Vec::new(),
            f: v,
            evals,
            converged: true,
        };
    }

    let mut x0 = start.to_vec();
    clamp_unit(&mut x0);
    let mut simplex = vec![x0.clone()];
    for i in 0..n {
        let mut v = x0.clone();
        // step inward when the start sits on the upper face
        v[i] = if v[i] + opts.initial_step <= 1.0 {
            v[i] + opts.initial_step
        } else {
            v[i] - opts.initial_step
        };
        simplex.push(v);
    }
    let mut values: Vec<f64> = simplex.iter().map(|v| eval(v, &mut evals)).collect();

    let mut converged = false;
    loop {
        // order best .. worst
        let mut idx: Vec<usize> = (0..=n).collect();
        idx.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
        simplex = idx.iter().map(|&i| simplex[i].clone()).collect();
        values = idx.iter().map(|&i| values[i]).collect();

        if diameter(&simplex) < opts.diameter_tol {
            converged = true;
            break;
        }
        if evals >= opts.max_evals {
            break;
        }

        let mut centroid = vec![0.0; n];
        for v in &simplex[..n] {
            for (c, x) in centroid.iter_mut().zip(v) {
                *c += x / n as f64;
            }
        }
        let along = |t: f64| -> Vec<f64> {
            let mut p: Vec<f64> = centroid.iter().zip(&simplex[n]).map(|(c, w)| c + t * (c - w)).collect();
            clamp_unit(&mut p);
            p
        };

        let xr = along(opts.reflection);
        let fr = eval(&xr, &mut evals);
        if fr < values[0] {
            let xe = along(opts.reflection * opts.expansion);
            let fe = eval(&xe, &mut evals);
            if fe < fr {
                simplex[n] = xe;
                values[n] = fe;
            } else {
                simplex[n] = xr;
                values[n] = fr;
            }
            continue;
        }
        if fr < values[n - 1] {
            simplex[n] = xr;
            values[n] = fr;
            continue;
        }
        let (xc, fc) = if fr < values[n] {
            let xc = along(opts.reflection * opts.contraction);
            let fc = eval(&xc, &mut evals);
            (xc, fc)
        } else {
            let xc = along(-opts.contraction);
            let fc = eval(&xc, &mut evals);
            (xc, fc)
        };
        if fc < fr.min(values[n]) {
            simplex[n] = xc;
            values[n] = fc;
            continue;
        }
        let best = simplex[0].clone();
        for i in 1..=n {
            for (x, b) in simplex[i].iter_mut().zip(&best) {
                *x = b + opts.shrink * (*x - b);
            }
            values[i] = eval(&simplex[i], &mut evals);
        }
    }

    SimplexResult {
        x: simplex.swap_remove(0),
        f: values[0],
        evals,
        converged,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_interior_quadratic_minimum() {
        let r = minimize(
            |x| (x[0] - 0.3).powi(2) + 4.0 * (x[1] - 0.7).powi(2),
            &[0.9, 0.1],
            &SimplexOptions::default(),
        );
        assert!(r.converged);
        assert!((r.x[0] - 0.3).abs() < 1e-5 && (r.x[1] - 0.7).abs() < 1e-5);
    }

    #[test]
    fn rosenbrock_in_box() {
        // minimum at (0.5, 0.25) after scaling into the unit box
        let f = |x: &[f64]| {
            let (a, b) = (2.0 * x[0] - 0.0, 4.0 * x[1]);
            (1.0 - a).powi(2) + 100.0 * (b - a * a).powi(2)
        };
        let opts = SimplexOptions {
            max_evals: 10_000,
            ..Default::default()
        };
        let r = minimize(f, &[0.1, 0.9], &opts);
        assert!(r.f < 1e-9, "{r:?}");
    }

    #[test]
    fn respects_box_and_infeasible_region() {
        // unconstrained minimum at x = -1 lies outside; x > 0.8 is infeasible
        let f = |x: &[f64]| {
            if x[0] > 0.8 {
                f64::INFINITY
            } else {
                (x[0] + 1.0).powi(2)
            }
        };
        let r = minimize(f, &[0.5], &SimplexOptions::default());
        assert!(r.x[0].abs() < 1e-6);
    }

    #[test]
    fn evaluation_cap() {
        let opts = SimplexOptions {
            max_evals: 25,
            diameter_tol: 0.0,
            ..Default::default()
        };
        let r = minimize(|x| x.iter().map(|v| v.sin()).sum(), &[0.5, 0.5, 0.5], &opts);
        assert!(!r.converged);
        // one iteration can overshoot the cap by at most a shrink step
        assert!(r.evals <= 25 + 3 + 1);
    }
}
