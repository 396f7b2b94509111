//! Nelder–Mead downhill simplex for small unconstrained problems.

#[derive(Debug, Clone, Copy)]
pub struct NelderMeadOptions {
    /// Stop once every vertex lies within this distance of the best one.
    pub diameter_tol: f64,
    pub max_iter: usize,
    pub reflection: f64,
    pub expansion: f64,
    pub contraction: f64,
    pub shrink: f64,
}

impl Default for NelderMeadOptions {
    fn default() -> Self {
        Self {
            diameter_tol: 1e-8,
            max_iter: 20_000,
            reflection: 1.0,
            expansion: 2.0,
            contraction: 0.5,
            shrink: 0.5,
        }
    }
}

#[derive(Debug, Clone)]
pub struct NelderMeadResult<const N: usize> {
    pub x: [f64; N],
    pub value: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Best value after each iteration.
    pub trace: Vec<f64>,
}

fn diameter<const N: usize>(simplex: &[([f64; N], f64)]) -> f64 {
    let best = &simplex[0].0;
    simplex[1..]
        .iter()
        .map(|(x, _)| {
            x.iter()
                .zip(best)
                .map(|(a, b)| (a - b).powi(2))
                .sum::<f64>()
                .sqrt()
        })
        .fold(0.0, f64::max)
}

fn combine<const N: usize>(a: &[f64; N], b: &[f64; N], t: f64) -> [f64; N] {
    // a + t (b − a)
    let mut out = [0.0; N];
    for i in 0..N {
        out[i] = a[i] + t * (b[i] - a[i]);
    }
    out
}

/// Minimizes `f` from `x0` with an axis-aligned initial simplex of edge `step`.
pub fn minimize<const N: usize, F>(
    f: F,
    x0: [f64; N],
    step: [f64; N],
    options: NelderMeadOptions,
) -> NelderMeadResult<N>
where
    F: Fn(&[f64; N]) -> f64,
{
    let mut simplex: Vec<([f64; N], f64)> = Vec::with_capacity(N + 1);
    simplex.push((x0, f(&x0)));
    for i in 0..N {
        let mut x = x0;
        x[i] += step[i];
        simplex.push((x, f(&x)));
    }

    let mut trace = Vec::new();
    let mut iterations = 0;
    let mut converged = false;
    while iterations < options.max_iter {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        if diameter(&simplex) < options.diameter_tol {
            converged = true;
            break;
        }
        iterations += 1;

        let mut centroid = [0.0; N];
        for (x, _) in &simplex[..N] {
            for i in 0..N {
                centroid[i] += x[i] / N as f64;
            }
        }
        let (worst, f_worst) = simplex[N];
        let f_best = simplex[0].1;
        let f_second_worst = simplex[N - 1].1;

        let reflected = combine(&centroid, &worst, -options.reflection);
        let f_reflected = f(&reflected);
        if f_reflected < f_best {
            let expanded = combine(&centroid, &worst, -options.expansion);
            let f_expanded = f(&expanded);
            simplex[N] = if f_expanded < f_reflected {
                (expanded, f_expanded)
            } else {
                (reflected, f_reflected)
            };
        } else if f_reflected < f_second_worst {
            simplex[N] = (reflected, f_reflected);
        } else {
            let (target, f_target) = if f_reflected < f_worst {
                (reflected, f_reflected)
            } else {
                (worst, f_worst)
            };
            let contracted = combine(&centroid, &target, options.contraction);
            let f_contracted = f(&contracted);
            if f_contracted < f_target {
                simplex[N] = (contracted, f_contracted);
            } else {
                let best = simplex[0].0;
                for vertex in simplex.iter_mut().skip(1) {
                    let x = combine(&best, &vertex.0, options.shrink);
                    *vertex = (x, f(&x));
                }
            }
        }
        trace.push(simplex.iter().map(|v| v.1).fold(f64::INFINITY, f64::min));
    }

    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    let (x, value) = simplex[0];
    NelderMeadResult {
        x,
        value,
        iterations,
        converged,
        trace,
    }
}
