//! Damped Gauss-Newton (Levenberg-Marquardt) minimizer with a
//! forward-difference Jacobian and a Nelder-Mead fallback for stretches
//! where the damped step keeps failing.

use crate::error::Result;
use crate::fit::FitResult;
use crate::linalg::solve_lu;

#[derive(Clone, Debug)]
pub struct EngineOptions {
    pub max_iterations: usize,
    pub ftol: f64,
    pub xtol: f64,
    /// relative forward-difference step
    pub jacobian_step: f64,
    pub initial_lambda: f64,
}

impl Default for EngineOptions {
    fn default() -> Self {
        EngineOptions {
            max_iterations: 200,
            ftol: 1e-12,
            xtol: 1e-10,
            jacobian_step: 1e-6,
            initial_lambda: 1e-3,
        }
    }
}

pub struct EngineOutcome {
    pub params: Vec<f64>,
    pub rss: f64,
    pub converged: bool,
    pub iterations: usize,
    /// 1σ uncertainties from the covariance estimate (empty if unavailable)
    pub uncertainties: Vec<f64>,
}

fn clamp(p: &mut [f64], bounds: &[(f64, f64)]) {
    for (x, &(lo, hi)) in p.iter_mut().zip(bounds) {
        *x = x.clamp(lo, hi);
    }
}

fn rss_of(r: &[f64]) -> f64 {
    r.iter().map(|x| x * x).sum()
}

fn jacobian<F>(residual: &mut F, p: &[f64], r0: &[f64], step_rel: f64, bounds: &[(f64, f64)]) -> Vec<Vec<f64>>
where
    F: FnMut(&[f64]) -> Vec<f64>,
{
    let m = p.len();
    let n = r0.len();
    let mut jac = vec![vec![0.0; m]; n];
    let mut probe = p.to_vec();
    for j in 0..m {
        let step = step_rel * p[j].abs().max(1.0);
        // step away from an active bound rather than into it
        let step = if p[j] + step > bounds[j].1 { -step } else { step };
        let orig = probe[j];
        probe[j] = orig + step;
        let r1 = residual(&probe);
        probe[j] = orig;
        for i in 0..n {
            jac[i][j] = (r1[i] - r0[i]) / step;
        }
    }
    jac
}

/// Minimize the sum of squared residuals starting from `guess`.
///
/// Levenberg-Marquardt with multiplicative damping; after three consecutive
/// failed damping escalations a bounded Nelder-Mead burst runs from the
/// current best point, and LM resumes if the simplex found an improvement.
pub fn minimize_residuals<F>(
    residual: &mut F,
    guess: &[f64],
    bounds: &[(f64, f64)],
    opts: &EngineOptions,
) -> EngineOutcome
where
    F: FnMut(&[f64]) -> Vec<f64>,
{
    assert_eq!(guess.len(), bounds.len());
    let m = guess.len();
    let mut p = guess.to_vec();
    clamp(&mut p, bounds);
    let mut r = residual(&p);
    let mut rss = rss_of(&r);
    let mut lambda = opts.initial_lambda;
    let mut iterations = 0;
    let mut converged = false;
    let mut last_jac: Option<Vec<Vec<f64>>> = None;

    'outer: while iterations < opts.max_iterations {
        iterations += 1;
        let jac = jacobian(residual, &p, &r, opts.jacobian_step, bounds);
        // normal equations
        let mut jtj = vec![vec![0.0; m]; m];
        let mut g = vec![0.0; m];
        for i in 0..r.len() {
            for a in 0..m {
                g[a] += jac[i][a] * r[i];
                for b in a..m {
                    jtj[a][b] += jac[i][a] * jac[i][b];
                }
            }
        }
        for a in 0..m {
            for b in 0..a {
                jtj[a][b] = jtj[b][a];
            }
        }
        last_jac = Some(jac);

        let mut escalations = 0;
        let mut simplex_tried = false;
        loop {
            let lambda_used = lambda;
            let mut damped = jtj.clone();
            for a in 0..m {
                damped[a][a] += lambda * jtj[a][a].max(1e-12);
            }
            let rhs: Vec<f64> = g.iter().map(|x| -x).collect();
            let step = solve_lu(&damped, &rhs).unwrap_or_else(|_| vec![0.0; m]);
            let mut trial: Vec<f64> = p.iter().zip(&step).map(|(a, b)| a + b).collect();
            clamp(&mut trial, bounds);
            let r_trial = residual(&trial);
            let rss_trial = rss_of(&r_trial);
            if rss_trial.is_finite() && rss_trial < rss {
                let step_norm: f64 = trial
                    .iter()
                    .zip(&p)
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum::<f64>()
                    .sqrt();
                let p_norm: f64 = p.iter().map(|x| x * x).sum::<f64>().sqrt();
                let improvement = rss - rss_trial;
                p = trial;
                r = r_trial;
                rss = rss_trial;
                lambda = (lambda / 3.0).max(1e-12);
                // a tiny gain on a heavily damped step is not convergence,
                // only a near-undamped step that gains nothing is
                if lambda_used <= opts.initial_lambda
                    && (improvement <= opts.ftol * rss.max(1e-300)
                        || step_norm <= opts.xtol * (p_norm + opts.xtol))
                {
                    converged = true;
                    break 'outer;
                }
                break;
            }
            lambda *= 4.0;
            escalations += 1;
            if escalations == 3 && !simplex_tried {
                // Nelder-Mead burst from the current best point
                simplex_tried = true;
                let (np, nrss) = nelder_mead(residual, &p, bounds, 200 * m.max(1));
                if nrss + opts.ftol * rss < rss {
                    p = np;
                    r = residual(&p);
                    rss = rss_of(&r);
                    lambda = opts.initial_lambda;
                    break;
                }
            }
            if escalations >= 16 {
                // no damping level improves: stationary to machine precision
                converged = true;
                break 'outer;
            }
        }
    }

    // covariance from J^T J at the solution
    let uncertainties = match (&last_jac, converged) {
        (Some(jac), true) => covariance_sigmas(jac, rss).unwrap_or_default(),
        _ => Vec::new(),
    };

    EngineOutcome {
        params: p,
        rss,
        converged,
        iterations,
        uncertainties,
    }
}

fn covariance_sigmas(jac: &[Vec<f64>], rss: f64) -> Result<Vec<f64>> {
    let n = jac.len();
    let m = jac.first().map_or(0, Vec::len);
    if n <= m {
        return Ok(vec![0.0; m]);
    }
    let mut jtj = vec![vec![0.0; m]; m];
    for row in jac {
        for a in 0..m {
            for b in a..m {
                jtj[a][b] += row[a] * row[b];
            }
        }
    }
    for a in 0..m {
        for b in 0..a {
            jtj[a][b] = jtj[b][a];
        }
    }
    let sigma2 = rss / (n - m) as f64;
    let mut out = vec![0.0; m];
    for k in 0..m {
        let mut e = vec![0.0; m];
        e[k] = 1.0;
        match solve_lu(&jtj, &e) {
            Ok(col) => out[k] = (sigma2 * col[k]).max(0.0).sqrt(),
            Err(_) => out[k] = f64::INFINITY,
        }
    }
    Ok(out)
}

/// Bounded Nelder-Mead on the RSS objective. Returns (best point, best rss).
pub(crate) fn nelder_mead<F>(
    residual: &mut F,
    start: &[f64],
    bounds: &[(f64, f64)],
    max_evals: usize,
) -> (Vec<f64>, f64)
where
    F: FnMut(&[f64]) -> Vec<f64>,
{
    let m = start.len();
    let mut evals = 0;
    let mut f = |p: &[f64], evals: &mut usize| -> f64 {
        *evals += 1;
        let v = rss_of(&residual(p));
        if v.is_finite() {
            v
        } else {
            f64::MAX
        }
    };

    let mut simplex: Vec<Vec<f64>> = Vec::with_capacity(m + 1);
    simplex.push(start.to_vec());
    for j in 0..m {
        let mut v = start.to_vec();
        let span = bounds[j].1 - bounds[j].0;
        let step = (0.05 * start[j].abs()).max(1e-4).min(if span.is_finite() { 0.25 * span } else { f64::MAX });
        v[j] = (v[j] + step).clamp(bounds[j].0, bounds[j].1);
        if v[j] == start[j] {
            v[j] = (start[j] - step).clamp(bounds[j].0, bounds[j].1);
        }
        simplex.push(v);
    }
    let mut values: Vec<f64> = simplex.iter().map(|p| f(p, &mut evals)).collect();

    while evals < max_evals {
        let mut order: Vec<usize> = (0..simplex.len()).collect();
        order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
        let best = order[0];
        let worst = order[m];
        let second_worst = order[m - 1];
        if values[worst] - values[best] <= 1e-14 * values[best].abs().max(1e-300) {
            break;
        }
        let centroid: Vec<f64> = (0..m)
            .map(|j| {
                order[..m].iter().map(|&i| simplex[i][j]).sum::<f64>() / m as f64
            })
            .collect();
        let mk = |coef: f64| -> Vec<f64> {
            centroid
                .iter()
                .zip(&simplex[worst])
                .zip(bounds)
                .map(|((&c, &w), &(lo, hi))| (c + coef * (c - w)).clamp(lo, hi))
                .collect()
        };
        let reflected = mk(1.0);
        let fr = f(&reflected, &mut evals);
        if fr < values[best] {
            let expanded = mk(2.0);
            let fe = f(&expanded, &mut evals);
            if fe < fr {
                simplex[worst] = expanded;
                values[worst] = fe;
            } else {
                simplex[worst] = reflected;
                values[worst] = fr;
            }
        } else if fr < values[second_worst] {
            simplex[worst] = reflected;
            values[worst] = fr;
        } else {
            let contracted = mk(-0.5);
            let fc = f(&contracted, &mut evals);
            if fc < values[worst] {
                simplex[worst] = contracted;
                values[worst] = fc;
            } else {
                // shrink toward the best vertex
                let best_pt = simplex[best].clone();
                for i in 0..simplex.len() {
                    if i == best {
                        continue;
                    }
                    for j in 0..m {
                        simplex[i][j] = best_pt[j] + 0.5 * (simplex[i][j] - best_pt[j]);
                    }
                    values[i] = f(&simplex[i].clone(), &mut evals);
                }
            }
        }
    }
    let mut best_i = 0;
    for i in 1..values.len() {
        if values[i] < values[best_i] {
            best_i = i;
        }
    }
    (simplex[best_i].clone(), values[best_i])
}

/// Fit `model(params, t)` to `(t, y)` data by least squares.
pub fn fit_least_squares<F>(
    model: F,
    t: &[f64],
    y: &[f64],
    names: &[&str],
    guess: &[f64],
    bounds: &[(f64, f64)],
) -> Result<FitResult>
where
    F: Fn(&[f64], &[f64]) -> Vec<f64>,
{
    assert_eq!(t.len(), y.len());
    assert_eq!(guess.len(), bounds.len());
    assert_eq!(guess.len(), names.len());
    for (g, &(lo, hi)) in guess.iter().zip(bounds) {
        if !(lo <= *g && *g <= hi) {
            return Err(crate::error::Error::InvalidArgument(format!(
                "initial guess {g} outside bounds [{lo}, {hi}]"
            )));
        }
    }
    if y.iter().chain(t.iter()).any(|v| !v.is_finite()) {
        return Err(crate::error::Error::NonFinite {
            name: "data",
            value: f64::NAN,
        });
    }
    let mut residual = |p: &[f64]| -> Vec<f64> {
        model(p, t)
            .iter()
            .zip(y)
            .map(|(m, d)| m - d)
            .collect()
    };
    let out = minimize_residuals(&mut residual, guess, bounds, &EngineOptions::default());
    Ok(FitResult {
        names: names.iter().map(|s| s.to_string()).collect(),
        values: out.params,
        uncertainties: out.uncertainties,
        rss: out.rss,
        converged: out.converged,
        iterations: out.iterations,
        warnings: Vec::new(),
    })
}
