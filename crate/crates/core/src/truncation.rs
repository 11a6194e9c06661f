//! Deformation (truncation) functions g and their influence functions
//! mu_j(alpha) — the Mellin transforms that control how truncation shape
//! enters every cumulant.

use std::fmt;
use std::sync::Arc;

use crate::error::{Result, TlfError};
use crate::quad::adaptive;
use crate::special::gamma;
use crate::stable::StableParams;

/// Admissibility probe for custom deformations: g must decay faster than
/// any power, tested as g(XI_PROBE) * XI_PROBE^16 < 1.
const XI_PROBE: f64 = 1e6;
const PROBE_POWER: i32 = 16;

/// Truncation family. Custom evaluators must be pure, reentrant, even in
/// xi, normalized to g(0) = 1 and take values in [0, 1].
#[derive(Clone)]
pub enum DeformationKind {
    /// Abrupt cut: 1 for |xi| <= 1, 0 beyond.
    MantegnaStanley,
    /// exp(-|xi|).
    Exponential,
    /// exp(-|xi|^h), h > 0.
    PowerExponential { h: f64 },
    /// User-supplied pointwise evaluator in the dimensionless coordinate.
    Custom {
        eval: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    },
}

impl fmt::Debug for DeformationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::MantegnaStanley => write!(f, "MantegnaStanley"),
            Self::Exponential => write!(f, "Exponential"),
            Self::PowerExponential { h } => write!(f, "PowerExponential {{ h: {h} }}"),
            Self::Custom { .. } => write!(f, "Custom"),
        }
    }
}

/// A deformation function together with its spatial scale l. The function
/// itself always lives in the dimensionless coordinate xi = x / l.
#[derive(Debug, Clone)]
pub struct DeformationSpec {
    kind: DeformationKind,
    ell: f64,
}

impl DeformationSpec {
    pub fn new(kind: DeformationKind, ell: f64) -> Result<Self> {
        if !(ell > 0.0) || !ell.is_finite() {
            return Err(TlfError::Domain(format!(
                "truncation scale must be positive and finite, got {ell}"
            )));
        }
        if let DeformationKind::PowerExponential { h } = kind {
            if !(h > 0.0) || !h.is_finite() {
                return Err(TlfError::Domain(format!(
                    "power-exponential shape parameter must be positive, got {h}"
                )));
            }
        }
        if let DeformationKind::Custom { ref eval } = kind {
            let at_zero = eval(0.0);
            if (at_zero - 1.0).abs() > 1e-12 {
                return Err(TlfError::Domain(format!(
                    "custom deformation must satisfy g(0) = 1, got {at_zero}"
                )));
            }
            for xi in [0.1, 0.5, 1.0, 2.0, 10.0, 100.0] {
                let v = eval(xi);
                if !(0.0..=1.0 + 1e-12).contains(&v) {
                    return Err(TlfError::Domain(format!(
                        "custom deformation must take values in [0, 1]; g({xi}) = {v}"
                    )));
                }
            }
        }
        Ok(Self { kind, ell })
    }

    pub fn mantegna_stanley(ell: f64) -> Result<Self> {
        Self::new(DeformationKind::MantegnaStanley, ell)
    }

    pub fn exponential(ell: f64) -> Result<Self> {
        Self::new(DeformationKind::Exponential, ell)
    }

    pub fn power_exponential(ell: f64, h: f64) -> Result<Self> {
        Self::new(DeformationKind::PowerExponential { h }, ell)
    }

    pub fn custom<F>(ell: f64, eval: F) -> Result<Self>
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        Self::new(
            DeformationKind::Custom {
                eval: Arc::new(eval),
            },
            ell,
        )
    }

    pub fn kind(&self) -> &DeformationKind {
        &self.kind
    }

    pub fn ell(&self) -> f64 {
        self.ell
    }

    pub fn is_custom(&self) -> bool {
        matches!(self.kind, DeformationKind::Custom { .. })
    }

    /// Pointwise g(xi). Evenness is enforced by evaluating at |xi|.
    pub fn eval(&self, xi: f64) -> f64 {
        let xi = xi.abs();
        match &self.kind {
            DeformationKind::MantegnaStanley => {
                if xi <= 1.0 {
                    1.0
                } else {
                    0.0
                }
            }
            DeformationKind::Exponential => (-xi).exp(),
            DeformationKind::PowerExponential { h } => {
                let t = h * xi.ln();
                if t > 700.0 {
                    0.0
                } else {
                    (-t.exp()).exp()
                }
            }
            DeformationKind::Custom { eval } => eval(xi),
        }
    }

    /// Closed-form influence function mu_j(alpha) for the named families:
    /// MS: 1/(j-alpha); Exp: Gamma(j-alpha); PowerExp: Gamma((j-alpha)/h)/h.
    pub fn influence_closed(&self, j: u32, alpha: f64) -> Result<f64> {
        check_order(j, alpha)?;
        let s = j as f64 - alpha;
        match &self.kind {
            DeformationKind::MantegnaStanley => Ok(1.0 / s),
            DeformationKind::Exponential => gamma(s),
            DeformationKind::PowerExponential { h } => Ok(gamma(s / h)? / h),
            DeformationKind::Custom { .. } => Err(TlfError::UnsupportedFamily(
                "no closed-form influence function for a custom deformation; \
                 use influence_numeric"
                    .into(),
            )),
        }
    }

    /// Influence function by quadrature of the Mellin integral
    /// mu_j(alpha) = int_0^inf xi^{j-1-alpha} g(xi) dxi.
    pub fn influence_numeric(&self, j: u32, alpha: f64) -> Result<f64> {
        check_order(j, alpha)?;
        self.mellin(j as f64 - alpha)
    }

    /// Half-line deformation moment M_k = int_0^inf xi^k g(xi) dxi,
    /// evaluated as the Mellin integral at s = k + 1 so that the identity
    /// M_{j-2} = mu_j(1) holds by construction.
    pub fn moment(&self, k: u32) -> Result<f64> {
        self.mellin(k as f64 + 1.0)
    }

    /// int_0^inf xi^{s-1} g(xi) dxi for s > 0, integrated in v = ln xi
    /// where the integrand e^{s v} g(e^v) is free of endpoint singularities.
    fn mellin(&self, s: f64) -> Result<f64> {
        if self.is_custom() {
            self.probe_tail()?;
        }
        let h = |v: f64| (s * v).exp() * self.eval(v.exp());

        // scan right from v = 0 for the point where the integrand is dead
        let mut v_hi = 0.0f64;
        let mut h_max = h(0.0).max(f64::MIN_POSITIVE);
        if !matches!(self.kind, DeformationKind::MantegnaStanley) {
            let mut v = 0.0f64;
            loop {
                v += 0.5;
                let hv = h(v);
                h_max = h_max.max(hv);
                if hv < 1e-18 * h_max {
                    v_hi = v;
                    break;
                }
                if v > 500.0 {
                    return Err(TlfError::DivergentIntegral(format!(
                        "Mellin integrand still alive at xi = e^{v}; \
                         deformation decays too slowly"
                    )));
                }
            }
        }
        let v_lo = (h_max.ln() - 41.5) / s;

        let mut total = 0.0;
        let mut segments = vec![v_lo, 0.0];
        if v_hi > 0.0 {
            segments.push(v_hi);
        }
        for pair in segments.windows(2) {
            let r = adaptive(&h, pair[0], pair[1], 1e-12, 1e-16 * h_max, 60_000)?;
            total += r.value;
        }
        Ok(total)
    }

    fn probe_tail(&self) -> Result<()> {
        let g = self.eval(XI_PROBE);
        if g * XI_PROBE.powi(PROBE_POWER) >= 1.0 {
            return Err(TlfError::DivergentIntegral(format!(
                "custom deformation fails the tail probe: g({XI_PROBE:e}) = {g:e} \
                 does not beat xi^-{PROBE_POWER}"
            )));
        }
        Ok(())
    }
}

fn check_order(j: u32, alpha: f64) -> Result<()> {
    if j % 2 != 0 || j < 2 {
        return Err(TlfError::Domain(format!(
            "influence functions are defined for even orders j >= 2, got {j}"
        )));
    }
    if (j as f64) <= alpha {
        return Err(TlfError::Domain(format!(
            "influence function requires j > alpha, got j = {j}, alpha = {alpha}"
        )));
    }
    Ok(())
}

/// A stable law paired with a deformation; epsilon = (gamma/l)^alpha is the
/// scale-separation small parameter and is always recomputed, never stored.
#[derive(Debug, Clone)]
pub struct TlfModel {
    pub stable: StableParams,
    pub deformation: DeformationSpec,
}

impl TlfModel {
    /// Logs a warning when epsilon exceeds 0.1, where the first-order
    /// asymptotics stop being quantitative.
    pub fn new(stable: StableParams, deformation: DeformationSpec) -> Self {
        let model = Self {
            stable,
            deformation,
        };
        let eps = model.epsilon();
        if eps > 0.1 {
            log::warn!(
                "scale separation is weak: epsilon = (gamma/l)^alpha = {eps:.4} > 0.1; \
                 first-order cumulant asymptotics degrade"
            );
        }
        model
    }

    pub fn epsilon(&self) -> f64 {
        (self.stable.gamma() / self.deformation.ell()).powf(self.stable.alpha())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn eval_families() {
        let ms = DeformationSpec::mantegna_stanley(1.0).unwrap();
        assert_eq!(ms.eval(0.5), 1.0);
        assert_eq!(ms.eval(1.0), 1.0);
        assert_eq!(ms.eval(1.5), 0.0);
        let e = DeformationSpec::exponential(1.0).unwrap();
        assert_eq!(e.eval(0.0), 1.0);
        assert!(rel(e.eval(-2.0), (-2.0f64).exp()) < 1e-15);
        let p = DeformationSpec::power_exponential(1.0, 2.0).unwrap();
        assert!(rel(p.eval(1.0), (-1.0f64).exp()) < 1e-15);
        assert!(rel(p.eval(2.0), (-4.0f64).exp()) < 1e-15);
    }

    #[test]
    fn influence_closed_values() {
        let ms = DeformationSpec::mantegna_stanley(1.0).unwrap();
        assert!(rel(ms.influence_closed(2, 1.0).unwrap(), 1.0) < 1e-15);
        let e = DeformationSpec::exponential(1.0).unwrap();
        assert!(rel(e.influence_closed(4, 1.0).unwrap(), 2.0) < 1e-13);
        // (1/h) Gamma((j-alpha)/h) at h = 1/2, j = 2, alpha = 1
        let p = DeformationSpec::power_exponential(1.0, 0.5).unwrap();
        assert!(rel(p.influence_closed(2, 1.0).unwrap(), 2.0) < 1e-13);
    }

    #[test]
    fn influence_numeric_values() {
        let ms = DeformationSpec::mantegna_stanley(1.0).unwrap();
        assert!(rel(ms.influence_numeric(2, 0.5).unwrap(), 1.0 / 1.5) < 1e-10);
        let e = DeformationSpec::exponential(1.0).unwrap();
        assert!(rel(e.influence_numeric(6, 1.5).unwrap(), 11.631728396567449) < 1e-10);
        let p = DeformationSpec::power_exponential(1.0, 1e6).unwrap();
        let got = p.influence_numeric(4, 1.0).unwrap();
        assert!((got - 1.0 / 3.0).abs() < 1e-4, "got {got}");
    }

    #[test]
    fn numeric_matches_closed_across_grid() {
        let alphas = [0.3, 0.7, 1.0, 1.3, 1.7, 1.9];
        let mut specs = vec![
            DeformationSpec::mantegna_stanley(1.0).unwrap(),
            DeformationSpec::exponential(1.0).unwrap(),
        ];
        for h in [0.5, 1.0, 2.0] {
            specs.push(DeformationSpec::power_exponential(1.0, h).unwrap());
        }
        for spec in &specs {
            for &alpha in &alphas {
                for j in [2u32, 4, 6] {
                    let closed = spec.influence_closed(j, alpha).unwrap();
                    let numeric = spec.influence_numeric(j, alpha).unwrap();
                    assert!(
                        rel(numeric, closed) <= 1e-8,
                        "{:?} j={j} alpha={alpha}: numeric {numeric}, closed {closed}",
                        spec.kind()
                    );
                }
            }
        }
    }

    #[test]
    fn ms_influence_increases_with_alpha() {
        // 1/(j - alpha) grows as alpha grows
        let ms = DeformationSpec::mantegna_stanley(1.0).unwrap();
        for j in [2u32, 4, 6] {
            let mut prev = 0.0;
            for k in 1..10 {
                let alpha = 0.2 * k as f64;
                if alpha >= 1.95 {
                    break;
                }
                let v = ms.influence_closed(j, alpha).unwrap();
                assert!(v > prev);
                prev = v;
            }
        }
    }

    #[test]
    fn power_exponential_approaches_abrupt_cut() {
        let ms = DeformationSpec::mantegna_stanley(1.0).unwrap();
        for (h, tol) in [(1e3, 1e-2), (1e6, 1e-4)] {
            let p = DeformationSpec::power_exponential(1.0, h).unwrap();
            for j in [2u32, 4] {
                for alpha in [0.5, 1.2] {
                    let a = p.influence_closed(j, alpha).unwrap();
                    let b = ms.influence_closed(j, alpha).unwrap();
                    assert!(rel(a, b) < tol, "h={h} j={j} alpha={alpha}");
                }
            }
        }
    }

    #[test]
    fn moment_values_and_identity() {
        let e = DeformationSpec::exponential(1.0).unwrap();
        assert!(rel(e.moment(0).unwrap(), 1.0) < 1e-11);
        assert!(rel(e.moment(2).unwrap(), 2.0) < 1e-11);
        let ms = DeformationSpec::mantegna_stanley(1.0).unwrap();
        assert!(rel(ms.moment(2).unwrap(), 1.0 / 3.0) < 1e-11);
        // M_{j-2} = mu_j(1), same quadrature on both sides
        for spec in [&e, &ms] {
            for j in [2u32, 4, 6] {
                let m = spec.moment(j - 2).unwrap();
                let mu = spec.influence_numeric(j, 1.0).unwrap();
                assert_eq!(m, mu);
            }
        }
    }

    #[test]
    fn custom_deformation_works() {
        let c = DeformationSpec::custom(1.0, |xi| (-xi * xi).exp()).unwrap();
        let p = DeformationSpec::power_exponential(1.0, 2.0).unwrap();
        for j in [2u32, 4] {
            let a = c.influence_numeric(j, 0.7).unwrap();
            let b = p.influence_closed(j, 0.7).unwrap();
            assert!(rel(a, b) < 1e-9);
        }
        assert!(c.influence_closed(2, 0.7).is_err());
    }

    #[test]
    fn custom_tail_probe_rejects_slow_decay() {
        // power-law decay is not admissible
        let c = DeformationSpec::custom(1.0, |xi| 1.0 / (1.0 + xi * xi)).unwrap();
        assert!(matches!(
            c.influence_numeric(2, 0.5),
            Err(TlfError::DivergentIntegral(_))
        ));
    }

    #[test]
    fn custom_constructor_validates() {
        assert!(DeformationSpec::custom(1.0, |xi| 0.5 + xi).is_err()); // g(0) != 1
        assert!(DeformationSpec::custom(1.0, |xi| 1.0 + xi).is_err()); // exceeds 1
        assert!(DeformationSpec::exponential(0.0).is_err());
        assert!(DeformationSpec::power_exponential(1.0, 0.0).is_err());
    }

    #[test]
    fn order_preconditions() {
        let e = DeformationSpec::exponential(1.0).unwrap();
        assert!(e.influence_closed(3, 1.0).is_err());
        assert!(e.influence_closed(0, 1.0).is_err());
        assert!(e.influence_numeric(2, 1.99).is_ok());
    }

    #[test]
    fn model_epsilon() {
        let m = TlfModel::new(
            StableParams::new(0.5, 2.0).unwrap(),
            DeformationSpec::exponential(200.0).unwrap(),
        );
        assert!(rel(m.epsilon(), 0.1) < 1e-15);
    }
}
