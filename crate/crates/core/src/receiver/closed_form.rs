use alloc::vec;
use alloc::vec::Vec;

use crate::numerics::{hermitian_solve_vec, inner, norm_sqr, ComplexMat};
use crate::stc::{CoopLink, RandomizedCode, SpaceTimeCode};
use crate::{Error, Result, C64, SIGNAL_POWER};

use super::FilterBank;

const MAX_MULTIPLIER: f64 = 1e12;
const BISECTION_STEPS: usize = 200;
const TRACE_TOL: f64 = 1e-12;

/// The summed MSE `Σ_j E|s_j − w_jᴴ r|²` as a real quadratic in the relay
/// code entries, for fixed filters.
///
/// The code is flattened per relay as `[Re vec(R_k); Im vec(R_k)]`
/// (row-major). The relay rows of `r` depend on both `R_k` and `conj(R_k)`
/// (conjugated slots), so the objective is quadratic over the real
/// coordinates rather than over `vec(R)`:
/// `J(x) = constant − 2 bᵀx + xᵀ A x`.
#[derive(Debug, Clone, PartialEq)]
pub struct CodeQuadratic {
    pub hessian: ComplexMat,
    pub linear: Vec<f64>,
    pub constant: f64,
    /// `N·T`: the equivalent trace is `trace_weight · ‖x‖²`.
    pub trace_weight: f64,
}

impl CodeQuadratic {
    pub fn build<C: SpaceTimeCode>(
        link: &CoopLink<C>,
        filters: &FilterBank,
        layout_code: &RandomizedCode,
    ) -> Result<Self> {
        let n = link.antennas();
        let relays = link.relays();
        if relays == 0 {
            return Err(Error::Unsupported("code design needs at least one relay"));
        }
        if filters.len() != link.rows() || filters.symbols() != n {
            return Err(Error::LengthMismatch {
                expected: link.rows(),
                found: filters.len(),
            });
        }
        let block = 2 * n * n;
        let dim = block * relays;
        let sigma = libm::sqrt(link.noise.sigma2());
        let g = link.gain.gain();
        let sig = libm::sqrt(SIGNAL_POWER);

        // rows of the stacked residual c − Φ x
        let mut rows: Vec<(C64, Vec<C64>)> = Vec::new();
        let mut constant = 0.0;
        for j in 0..n {
            let w = filters.filter(j);
            constant += link.noise.sigma2() * norm_sqr(w);
            for m in 0..n {
                let mut target = if j == m {
                    C64::new(sig, 0.0)
                } else {
                    C64::new(0.0, 0.0)
                };
                if link.direct_link {
                    let h_col = link.channels.direct.col(m);
                    target -= inner(&w[..n], &h_col) * sig;
                }
                let mut phi = vec![C64::new(0.0, 0.0); dim];
                for k in 0..relays {
                    let drive: Vec<C64> = link.channels.source_relay[k]
                        .col(m)
                        .into_iter()
                        .map(|x| x * g * sig)
                        .collect();
                    relay_coefficients(link, k, w, &drive, &mut phi[k * block..(k + 1) * block])?;
                }
                rows.push((target, phi));
            }
            // relay receive noise, carried through relay k only
            if sigma > 0.0 {
                for k in 0..relays {
                    for m in 0..n {
                        let mut unit = vec![C64::new(0.0, 0.0); n];
                        unit[m] = C64::new(sigma * g, 0.0);
                        let mut phi = vec![C64::new(0.0, 0.0); dim];
                        relay_coefficients(
                            link,
                            k,
                            w,
                            &unit,
                            &mut phi[k * block..(k + 1) * block],
                        )?;
                        rows.push((C64::new(0.0, 0.0), phi));
                    }
                }
            }
        }

        let mut hessian = ComplexMat::zeros(dim, dim);
        let mut linear = vec![0.0; dim];
        for (target, phi) in &rows {
            constant += target.norm_sqr();
            for a in 0..dim {
                linear[a] += (phi[a].conj() * target).re;
                for b in 0..dim {
                    hessian[(a, b)] += C64::new((phi[a].conj() * phi[b]).re, 0.0);
                }
            }
        }
        Ok(CodeQuadratic {
            hessian,
            linear,
            constant,
            trace_weight: (layout_code.antennas() * layout_code.slots()) as f64,
        })
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        let xc: Vec<C64> = x.iter().map(|&v| C64::new(v, 0.0)).collect();
        let ax = self.hessian.mul_vec(&xc).expect("dimension");
        let quad: f64 = x.iter().zip(&ax).map(|(a, b)| a * b.re).sum();
        let lin: f64 = x.iter().zip(&self.linear).map(|(a, b)| a * b).sum();
        self.constant - 2.0 * lin + quad
    }

    /// `(A + λ·N·T·I)⁻¹ b`.
    fn solve(&self, multiplier: f64) -> Result<Vec<f64>> {
        let mut m = self.hessian.clone();
        for i in 0..m.rows() {
            m[(i, i)] += C64::new(multiplier * self.trace_weight, 0.0);
        }
        let rhs: Vec<C64> = self.linear.iter().map(|&v| C64::new(v, 0.0)).collect();
        Ok(hermitian_solve_vec(&m, &rhs)?
            .into_iter()
            .map(|z| z.re)
            .collect())
    }

    fn trace_of(&self, x: &[f64]) -> f64 {
        self.trace_weight * x.iter().map(|v| v * v).sum::<f64>()
    }
}

/// Coefficients of `w_jᴴ (relay k rows)` over the real coordinates of `R_k`
/// for encoder input `drive`: `Σ α R + β conj(R)` rewritten as
/// `(α+β)·Re R + i(α−β)·Im R`.
fn relay_coefficients<C: SpaceTimeCode>(
    link: &CoopLink<C>,
    relay: usize,
    w: &[C64],
    drive: &[C64],
    out: &mut [C64],
) -> Result<()> {
    let n = link.antennas();
    let gk = &link.channels.relay_dest[relay];
    let mut alpha = vec![C64::new(0.0, 0.0); n * n];
    let mut beta = vec![C64::new(0.0, 0.0); n * n];
    for t in 0..link.stc.slots() {
        let map = link.stc.slot_map(t);
        let w_t = &w[link.direct_rows() + t * n..link.direct_rows() + (t + 1) * n];
        let u = map.dispersion.mul_vec(drive)?;
        if map.conjugated {
            // w_tᴴ conj(G R) u: coefficient of conj(R_mn) is conj((Gᵀ w_t)_m) u_n
            let a = gk.transpose().mul_vec(w_t)?;
            for mi in 0..n {
                for ni in 0..n {
                    beta[mi * n + ni] += a[mi].conj() * u[ni];
                }
            }
        } else {
            // w_tᴴ G R u: coefficient of R_mn is conj((Gᴴ w_t)_m) u_n
            let a = gk.adjoint().mul_vec(w_t)?;
            for mi in 0..n {
                for ni in 0..n {
                    alpha[mi * n + ni] += a[mi].conj() * u[ni];
                }
            }
        }
    }
    let i = C64::new(0.0, 1.0);
    for e in 0..n * n {
        out[e] += alpha[e] + beta[e];
        out[n * n + e] += i * (alpha[e] - beta[e]);
    }
    Ok(())
}

fn flatten(code: &RandomizedCode) -> Vec<f64> {
    let mut x = Vec::new();
    for m in code.matrices() {
        x.extend(m.as_slice().iter().map(|z| z.re));
        x.extend(m.as_slice().iter().map(|z| z.im));
    }
    x
}

fn unflatten(template: &RandomizedCode, x: &[f64]) -> Result<RandomizedCode> {
    let n = template.antennas();
    let block = 2 * n * n;
    let matrices = (0..template.relays())
        .map(|k| {
            let part = &x[k * block..(k + 1) * block];
            ComplexMat::from_vec(
                n,
                n,
                (0..n * n)
                    .map(|e| C64::new(part[e], part[n * n + e]))
                    .collect(),
            )
        })
        .collect::<Result<Vec<_>>>()?;
    RandomizedCode::from_layout(&template.layout(), matrices)
}

/// Summed MSE of a code for fixed filters, through the quadratic form.
pub fn code_objective<C: SpaceTimeCode>(
    link: &CoopLink<C>,
    filters: &FilterBank,
    code: &RandomizedCode,
) -> Result<f64> {
    Ok(CodeQuadratic::build(link, filters, code)?.value(&flatten(code)))
}

/// Result of the closed-form code design.
#[derive(Debug, Clone, PartialEq)]
pub struct ClosedFormCode {
    pub code: RandomizedCode,
    /// Lagrange multiplier of the power constraint; zero when inactive.
    pub multiplier: f64,
}

/// Minimizes the summed MSE over the relay codes for fixed filters subject to
/// `equivalent_trace ≤ P_R`.
///
/// The stationarity condition `(A + λ N T I) x = b` is solved for increasing
/// `λ`; the multiplier is found by bisection on the monotone map
/// `λ ↦ trace(x(λ))` so the constraint holds with equality. `λ = 0` is
/// returned when the unconstrained optimum is already inside the budget.
/// `template` supplies the layout and `P_R`.
pub fn rstc_closed_form<C: SpaceTimeCode>(
    link: &CoopLink<C>,
    filters: &FilterBank,
    template: &RandomizedCode,
) -> Result<ClosedFormCode> {
    let quad = CodeQuadratic::build(link, filters, template)?;
    let budget = template.budget();
    let excess = |x: &[f64]| quad.trace_of(x) - budget;

    if let Ok(x) = quad.solve(0.0) {
        if x.iter().all(|v| v.is_finite()) && excess(&x) <= TRACE_TOL * budget {
            return Ok(ClosedFormCode {
                code: unflatten(template, &x)?,
                multiplier: 0.0,
            });
        }
    }
    if quad.linear.iter().all(|&v| v == 0.0) {
        return Err(Error::ConstraintInfeasible);
    }

    let mut lo = 0.0;
    let mut hi = 1.0;
    loop {
        let x = quad.solve(hi)?;
        if excess(&x) <= 0.0 {
            break;
        }
        lo = hi;
        hi *= 2.0;
        if hi > MAX_MULTIPLIER {
            return Err(Error::ConstraintInfeasible);
        }
    }
    let mut best = quad.solve(hi)?;
    let mut multiplier = hi;
    for _ in 0..BISECTION_STEPS {
        let mid = 0.5 * (lo + hi);
        let x = quad.solve(mid)?;
        let ex = excess(&x);
        if ex > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if ex.abs() < (excess(&best)).abs() {
            best = x;
            multiplier = mid;
        }
        if ex.abs() <= TRACE_TOL * budget || hi - lo <= f64::EPSILON * hi {
            break;
        }
    }
    Ok(ClosedFormCode {
        code: unflatten(template, &best)?,
        multiplier,
    })
}

#[cfg(test)]
pub(super) fn flatten_code(code: &RandomizedCode) -> Vec<f64> {
    flatten(code)
}

#[cfg(test)]
pub(super) fn unflatten_code(template: &RandomizedCode, x: &[f64]) -> Result<RandomizedCode> {
    unflatten(template, x)
}
