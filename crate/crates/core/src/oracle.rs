//! Independent numerical ground truth: quadrature-level moments and
//! cumulants of the truncated pdf C P_L(x) g(x/l), used to validate the
//! small-epsilon closed forms.

use std::cell::RefCell;

use crate::cumulant::a_coefficient;
use crate::error::{Result, TlfError};
use crate::quad::{adaptive, gk15};
use crate::stable::{self, StableParams};
use crate::truncation::{DeformationKind, DeformationSpec, TlfModel};

/// Raw even moments of a truncated model, with the normalization constant.
#[derive(Debug, Clone, Copy)]
pub struct MomentVector {
    pub m2: f64,
    pub m4: f64,
    pub m6: f64,
    /// Normalizing constant C of the truncated pdf; >= 1 always.
    pub normalization_c: f64,
    pub epsilon: f64,
}

/// One comparison row produced by a convergence sweep.
#[derive(Debug, Clone, Copy)]
pub struct OracleReport {
    pub order: u32,
    pub m_numeric: f64,
    pub kappa_numeric: f64,
    pub kappa_asymptotic: f64,
    /// |kappa_numeric - kappa_asymptotic| / |kappa_asymptotic|.
    pub rel_error: f64,
    pub epsilon: f64,
}

/// Even moment <-> cumulant relations to order six:
/// kappa_2 = m_2, kappa_4 = m_4 - 3 m_2^2,
/// kappa_6 = m_6 - 15 m_2 m_4 + 30 m_2^3.
pub fn cumulants_from_moments(m: &MomentVector) -> (f64, f64, f64) {
    let k2 = m.m2;
    let k4 = m.m4 - 3.0 * m.m2 * m.m2;
    let k6 = m.m6 - 15.0 * m.m2 * m.m4 + 30.0 * m.m2.powi(3);
    (k2, k4, k6)
}

/// A truncated Levy distribution with its normalization precomputed.
pub struct TruncatedDist {
    model: TlfModel,
    c: f64,
}

impl TruncatedDist {
    pub fn new(model: &TlfModel) -> Result<Self> {
        let mut dist = Self {
            model: model.clone(),
            c: 1.0,
        };
        let half_mass = dist.half_integral(0)?;
        dist.c = 1.0 / (2.0 * half_mass);
        Ok(dist)
    }

    pub fn model(&self) -> &TlfModel {
        &self.model
    }

    /// The normalizing constant C = 1 / int P_L(x) g(x/l) dx.
    pub fn normalization(&self) -> f64 {
        self.c
    }

    /// Truncated density C P_L(x) g(x/l).
    pub fn pdf(&self, x: f64) -> Result<f64> {
        let g = self.model.deformation.eval(x / self.model.deformation.ell());
        if g == 0.0 {
            return Ok(0.0);
        }
        Ok(self.c * self.model.stable.pdf(x)? * g)
    }

    /// Raw even moment m_j = int x^j C P_L g dx by quadrature, 2 <= j <= 8.
    pub fn raw_moment(&self, j: u32) -> Result<f64> {
        if j % 2 != 0 || !(2..=8).contains(&j) {
            return Err(TlfError::Domain(format!(
                "raw moments are computed for even j in [2, 8], got {j}"
            )));
        }
        Ok(2.0 * self.c * self.half_integral(j)?)
    }

    pub fn moment_vector(&self) -> Result<MomentVector> {
        Ok(MomentVector {
            m2: self.raw_moment(2)?,
            m4: self.raw_moment(4)?,
            m6: self.raw_moment(6)?,
            normalization_c: self.c,
            epsilon: self.model.epsilon(),
        })
    }

    /// int_0^inf x^j P_L(x) g(x/l) dx, split at an inner radius (where the
    /// stable pdf switches evaluation regime) and integrated in log space
    /// beyond it, with a breakpoint at l where the deformation sets in.
    fn half_integral(&self, j: u32) -> Result<f64> {
        let alpha = self.model.stable.alpha();
        let gam = self.model.stable.gamma();
        let ell = self.model.deformation.ell();

        let inner_radius = if alpha < 1.0 {
            8.0
        } else {
            stable::switch_radius(alpha)
        };
        let x_max = ell * self.tail_cutoff(j)?;
        let x_break = (inner_radius * gam).min(x_max);

        // error channel for pdf failures inside the integrand closures
        let pdf_err: RefCell<Option<TlfError>> = RefCell::new(None);
        let pdf = |x: f64| -> f64 {
            match self.model.stable.pdf(x) {
                Ok(v) => v,
                Err(e) => {
                    pdf_err.borrow_mut().get_or_insert(e);
                    0.0
                }
            }
        };
        let inner_f = |x: f64| {
            x.powi(j as i32) * pdf(x) * self.model.deformation.eval(x / ell)
        };
        let outer_f = |v: f64| {
            let x = v.exp();
            x.powi(j as i32 + 1) * pdf(x) * self.model.deformation.eval(x / ell)
        };

        let run = |rel_tol: f64, abs_inner: f64, abs_outer: f64| -> Result<f64> {
            let mut total = adaptive(&inner_f, 0.0, x_break, rel_tol, abs_inner, 120_000)?.value;
            if x_break < x_max {
                let mut marks = vec![x_break.ln()];
                if ell > x_break && ell < x_max {
                    marks.push(ell.ln());
                }
                marks.push(x_max.ln());
                for pair in marks.windows(2) {
                    total +=
                        adaptive(&outer_f, pair[0], pair[1], rel_tol, abs_outer, 120_000)?.value;
                }
            }
            if let Some(e) = pdf_err.borrow_mut().take() {
                return Err(e);
            }
            Ok(total)
        };

        // rough pass fixes the scale, second pass refines against it
        let rough = run(1e-5, 1e-280, 1e-280)?;
        let floor = 1e-10 * rough.abs();
        run(3e-10, floor, floor)
    }

    /// Dimensionless upper integration limit: the smallest Xi with
    /// g(Xi) Xi^{j+2} < 1e-16 (exactly 1 for the abrupt cut).
    fn tail_cutoff(&self, j: u32) -> Result<f64> {
        if matches!(
            self.model.deformation.kind(),
            DeformationKind::MantegnaStanley
        ) {
            return Ok(1.0);
        }
        let mut xi = 1.0f64;
        while self.model.deformation.eval(xi) * xi.powi(j as i32 + 2) >= 1e-16 {
            xi *= 1.3;
            if xi > 1e9 {
                return Err(TlfError::DivergentIntegral(
                    "deformation tail refuses to die within xi <= 1e9".into(),
                ));
            }
        }
        Ok(xi)
    }
}

/// For each epsilon, sets l = gamma / eps^{1/alpha} (gamma = 1), computes the
/// numeric cumulant via quadrature moments and Eq.-12 conversion, and
/// compares with the closed-form asymptotic kappa_j.
pub fn convergence_sweep(
    alpha: f64,
    kind: DeformationKind,
    j: u32,
    eps_list: &[f64],
) -> Result<Vec<OracleReport>> {
    if j % 2 != 0 || !(2..=6).contains(&j) {
        return Err(TlfError::Domain(format!(
            "convergence sweeps cover even orders j in {{2, 4, 6}}, got {j}"
        )));
    }
    for &eps in eps_list {
        if !(eps > 0.0 && eps <= 0.1) {
            return Err(TlfError::Domain(format!(
                "epsilon values must lie in (0, 0.1], got {eps}"
            )));
        }
    }
    let mut out = Vec::with_capacity(eps_list.len());
    for &eps in eps_list {
        let ell = eps.powf(-1.0 / alpha);
        let model = TlfModel::new(
            StableParams::new(alpha, 1.0)?,
            DeformationSpec::new(kind.clone(), ell)?,
        );
        let dist = TruncatedDist::new(&model).map_err(|e| {
            TlfError::QuadratureNonconvergence(format!("normalization at eps = {eps}: {e}"))
        })?;
        let mv = dist.moment_vector().map_err(|e| {
            TlfError::QuadratureNonconvergence(format!("moments at eps = {eps}: {e}"))
        })?;
        let (k2, k4, k6) = cumulants_from_moments(&mv);
        let (m_numeric, kappa_numeric) = match j {
            2 => (mv.m2, k2),
            4 => (mv.m4, k4),
            _ => (mv.m6, k6),
        };
        let mu = model.deformation.influence_numeric(j, alpha)?;
        let kappa_asymptotic =
            ell.powf(j as f64 - alpha) * a_coefficient(alpha)? * mu;
        out.push(OracleReport {
            order: j,
            m_numeric,
            kappa_numeric,
            kappa_asymptotic,
            rel_error: (kappa_numeric - kappa_asymptotic).abs() / kappa_asymptotic.abs(),
            epsilon: eps,
        });
    }
    Ok(out)
}

/// Tabulated CDF of a symmetric density, with inverse lookup. The grid is
/// linear out to `x_lin`, then geometric out to `x_max`; mass beyond the
/// grid must be negligible at the caller's accuracy (the table renormalizes
/// the half mass to 1/2).
pub struct CdfTable {
    xs: Vec<f64>,
    cum: Vec<f64>,
    half_mass: f64,
}

impl CdfTable {
    pub fn build(
        pdf: impl Fn(f64) -> Result<f64>,
        x_lin: f64,
        n_lin: usize,
        x_max: f64,
        n_log: usize,
    ) -> Result<Self> {
        assert!(x_lin > 0.0 && x_max > x_lin && n_lin >= 2 && n_log >= 2);
        let mut xs = Vec::with_capacity(n_lin + n_log + 1);
        for i in 0..=n_lin {
            xs.push(x_lin * i as f64 / n_lin as f64);
        }
        let ratio = (x_max / x_lin).powf(1.0 / n_log as f64);
        let mut x = x_lin;
        for _ in 0..n_log {
            x *= ratio;
            xs.push(x.min(x_max));
        }

        let pdf_err: RefCell<Option<TlfError>> = RefCell::new(None);
        let f = |x: f64| -> f64 {
            match pdf(x) {
                Ok(v) => v,
                Err(e) => {
                    pdf_err.borrow_mut().get_or_insert(e);
                    0.0
                }
            }
        };
        let mut cum = Vec::with_capacity(xs.len());
        cum.push(0.0);
        let mut acc = 0.0;
        for w in xs.windows(2) {
            acc += gk15(&f, w[0], w[1]).value;
            cum.push(acc);
        }
        if let Some(e) = pdf_err.into_inner() {
            return Err(e);
        }
        Ok(Self {
            xs,
            half_mass: acc,
            cum,
        })
    }

    /// CDF at any x (symmetry supplies the negative axis).
    pub fn cdf(&self, x: f64) -> f64 {
        if x < 0.0 {
            return 1.0 - self.cdf(-x);
        }
        let h = match self.xs.binary_search_by(|v| v.total_cmp(&x)) {
            Ok(i) => self.cum[i],
            Err(0) => 0.0,
            Err(i) if i >= self.xs.len() => self.half_mass,
            Err(i) => {
                let (x0, x1) = (self.xs[i - 1], self.xs[i]);
                let t = (x - x0) / (x1 - x0);
                self.cum[i - 1] + t * (self.cum[i] - self.cum[i - 1])
            }
        };
        0.5 + 0.5 * h / self.half_mass
    }

    /// Inverse CDF for u in (0, 1), by symmetry and linear interpolation.
    pub fn inverse(&self, u: f64) -> f64 {
        if u < 0.5 {
            return -self.inverse(1.0 - u);
        }
        let target = (u - 0.5) * 2.0 * self.half_mass;
        let i = self.cum.partition_point(|&c| c < target);
        if i == 0 {
            return 0.0;
        }
        if i >= self.cum.len() {
            return *self.xs.last().unwrap();
        }
        let (c0, c1) = (self.cum[i - 1], self.cum[i]);
        let t = if c1 > c0 { (target - c0) / (c1 - c0) } else { 0.0 };
        self.xs[i - 1] + t * (self.xs[i] - self.xs[i - 1])
    }
}
