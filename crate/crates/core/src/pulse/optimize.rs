// Copyright 2026 The lcsim Developers
// SPDX-License-Identifier: Apache-2.0

//! Nelder-Mead simplex search.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::hamiltonian::TransmonPair;
use super::metrics::objective;
use super::waveform::Waveform;
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NelderMeadOptions {
    pub max_iters: usize,
    /// Stop when the spread of objective values across the simplex falls below this.
    pub f_tol: f64,
    /// ... and every vertex is within this distance of the best one (max norm).
    pub x_tol: f64,
    /// Relative size of the initial simplex.
    pub initial_step: f64,
    /// Initial step used for zero coordinates.
    pub zero_step: f64,
}

impl Default for NelderMeadOptions {
    fn default() -> Self {
        Self { max_iters: 3000, f_tol: 1e-10, x_tol: 1e-8, initial_step: 0.05, zero_step: 2.5e-4 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TraceRow {
    pub iteration: usize,
    pub params: Vec<f64>,
    pub objective: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NelderMeadResult {
    pub x: Vec<f64>,
    pub f: f64,
    pub iterations: usize,
    pub evaluations: usize,
    pub converged: bool,
    /// Best vertex after each iteration (row 0 is the initial simplex).
    pub trace: Vec<TraceRow>,
}

impl NelderMeadResult {
    /// `iteration,p1,...,pk,objective` rows with a header.
    pub fn trace_csv(&self) -> String {
        let k = self.x.len();
        let mut s = String::from("iteration");
        for i in 1..=k {
            let _ = write!(s, ",p{i}");
        }
        s.push_str(",objective\n");
        for row in &self.trace {
            let _ = write!(s, "{}", row.iteration);
            for p in &row.params {
                let _ = write!(s, ",{p:e}");
            }
            let _ = writeln!(s, ",{:e}", row.objective);
        }
        s
    }

    pub fn write_trace_csv(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.trace_csv())?;
        Ok(())
    }
}

/// Minimizes `f` from `x0` with dimension-adaptive coefficients.
///
/// The initial simplex is `x0` plus one vertex per coordinate displaced by
/// `initial_step * x0_i` (or `zero_step` when `x0_i == 0`). Deterministic.
pub fn nelder_mead<F>(mut f: F, x0: &[f64], opts: &NelderMeadOptions) -> Result<NelderMeadResult>
where
    F: FnMut(&[f64]) -> Result<f64>,
{
    let n = x0.len();
    if n == 0 {
        return Err(Error::Domain("nothing to optimize".into()));
    }
    if opts.max_iters == 0 {
        return Err(Error::Domain("max_iters must be at least 1".into()));
    }
    let nf = n as f64;
    let (alpha, gamma, rho, sigma) = (1.0, 1.0 + 2.0 / nf, 0.75 - 0.5 / nf, 1.0 - 1.0 / nf);
    let mut evals = 0usize;
    let mut eval = |x: &[f64]| -> Result<f64> {
        evals += 1;
        let v = f(x)?;
        if !v.is_finite() {
            return Err(Error::Optimization(format!("objective is {v} at {x:?}")));
        }
        Ok(v)
    };

    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
    simplex.push((x0.to_vec(), eval(x0)?));
    for i in 0..n {
        let mut x = x0.to_vec();
        x[i] = if x[i] != 0.0 { x[i] * (1.0 + opts.initial_step) } else { opts.zero_step };
        let v = eval(&x)?;
        simplex.push((x, v));
    }
    let order = |s: &mut Vec<(Vec<f64>, f64)>| s.sort_by(|a, b| a.1.total_cmp(&b.1));
    order(&mut simplex);
    let mut trace = vec![TraceRow { iteration: 0, params: simplex[0].0.clone(), objective: simplex[0].1 }];
    let mut converged = false;
    let mut it = 0;
    while it < opts.max_iters {
        let f_spread = simplex[n].1 - simplex[0].1;
        let x_spread = simplex[1..]
            .iter()
            .flat_map(|(x, _)| x.iter().zip(&simplex[0].0).map(|(a, b)| (a - b).abs()))
            .fold(0.0, f64::max);
        if f_spread <= opts.f_tol && x_spread <= opts.x_tol {
            converged = true;
            break;
        }
        it += 1;
        let centroid: Vec<f64> = (0..n).map(|j| simplex[..n].iter().map(|(x, _)| x[j]).sum::<f64>() / nf).collect();
        let worst = simplex[n].clone();
        let along = |t: f64| -> Vec<f64> { centroid.iter().zip(&worst.0).map(|(c, w)| c + t * (c - w)).collect() };
        let xr = along(alpha);
        let fr = eval(&xr)?;
        if fr < simplex[0].1 {
            let xe = along(alpha * gamma);
            let fe = eval(&xe)?;
            simplex[n] = if fe < fr { (xe, fe) } else { (xr, fr) };
        } else if fr < simplex[n - 1].1 {
            simplex[n] = (xr, fr);
        } else {
            let (xc, fc) = if fr < worst.1 {
                let xc = along(alpha * rho);
                let fc = eval(&xc)?;
                (xc, fc)
            } else {
                let xc = along(-rho);
                let fc = eval(&xc)?;
                (xc, fc)
            };
            if fc < fr.min(worst.1) {
                simplex[n] = (xc, fc);
            } else {
                let best = simplex[0].0.clone();
                for v in simplex.iter_mut().skip(1) {
                    let x: Vec<f64> = best.iter().zip(&v.0).map(|(b, x)| b + sigma * (x - b)).collect();
                    let fx = eval(&x)?;
                    *v = (x, fx);
                }
            }
        }
        order(&mut simplex);
        trace.push(TraceRow { iteration: it, params: simplex[0].0.clone(), objective: simplex[0].1 });
    }
    let (x, fbest) = simplex.swap_remove(0);
    Ok(NelderMeadResult { x, f: fbest, iterations: it, evaluations: evals, converged, trace })
}

/// Optimizes the eight waveform coefficients against the CZ objective.
pub fn optimize(
    pair: &TransmonPair,
    initial: &Waveform,
    dt_ns: f64,
    opts: &NelderMeadOptions,
) -> Result<(Waveform, NelderMeadResult)> {
    initial.validate()?;
    let res = nelder_mead(|x| objective(pair, &initial.with_lambdas(x), dt_ns), &initial.lambdas, opts)?;
    Ok((initial.with_lambdas(&res.x), res))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadratic_in_eight_dimensions() {
        let center: Vec<f64> = (0..8).map(|i| 0.3 * i as f64 - 1.0).collect();
        let scale: Vec<f64> = (0..8).map(|i| 1.0 + i as f64).collect();
        let q = |x: &[f64]| -> Result<f64> {
            Ok(x.iter().zip(&center).zip(&scale).map(|((a, c), s)| s * (a - c) * (a - c)).sum::<f64>() + 2.0)
        };
        let opts = NelderMeadOptions { max_iters: 2000, f_tol: 1e-14, x_tol: 1e-9, ..Default::default() };
        let r = nelder_mead(q, &[0.5; 8], &opts).unwrap();
        assert!(r.iterations <= 2000);
        assert!((r.f - 2.0).abs() < 1e-6, "{}", r.f);
        assert!(r.x.iter().zip(&center).all(|(a, c)| (a - c).abs() < 1e-3));
        assert!(r.trace.windows(2).all(|w| w[1].objective <= w[0].objective));
    }

    #[test]
    fn non_finite_objective_is_reported() {
        let r =
            nelder_mead(|x| Ok(if x[0] > 1.02 { f64::NAN } else { x[0] }), &[1.0, 1.0], &NelderMeadOptions::default());
        assert!(matches!(r, Err(Error::Optimization(_))));
    }

    #[test]
    fn trace_csv_has_header_and_rows() {
        let r = nelder_mead(|x| Ok(x[0] * x[0]), &[1.0], &NelderMeadOptions { max_iters: 3, ..Default::default() })
            .unwrap();
        let csv = r.trace_csv();
        assert!(csv.starts_with("iteration,p1,objective\n"));
        assert_eq!(csv.lines().count(), r.trace.len() + 1);
    }
}
