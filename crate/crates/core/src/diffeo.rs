//! Diffeomorphisms of a chart: explicit coordinate expressions, compositions
//! and inverses, all evaluable as jets.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{FinjetError, Result};
use crate::fields::ScalarField;
use crate::jets::{lift_variables, Jet};

/// Where an explicit map may be evaluated.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Domain {
    /// Per-coordinate closed intervals.
    #[serde(default, rename = "box", skip_serializing_if = "Option::is_none")]
    pub bounds: Option<Vec<[f64; 2]>>,
    /// Points closer than this to `center` are rejected.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exclude_radius: Option<f64>,
    /// Points farther than this from `center` are rejected.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_radius: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub center: Option<Vec<f64>>,
}

impl Domain {
    pub fn contains(&self, x: &[f64]) -> bool {
        if let Some(b) = &self.bounds {
            if b.iter().zip(x).any(|(iv, v)| *v < iv[0] || *v > iv[1]) {
                return false;
            }
        }
        let r = match &self.center {
            Some(c) => x.iter().zip(c).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt(),
            None => x.iter().map(|a| a * a).sum::<f64>().sqrt(),
        };
        !(self.exclude_radius.is_some_and(|e| r < e) || self.max_radius.is_some_and(|m| r > m))
    }
}

#[derive(Debug, Clone)]
pub enum Diffeo {
    Expr { forward: Vec<ScalarField>, inverse: Option<Vec<ScalarField>>, domain: Domain },
    /// `outer ∘ inner` (inner applied first).
    Compose(Arc<Diffeo>, Arc<Diffeo>),
    /// Numerical inverse.
    Inverse(Arc<Diffeo>),
}

/// JSON form: `{"forward": [expr], "inverse": [expr], "domain": {...}}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DiffeoSpec {
    pub forward: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub inverse: Option<Vec<String>>,
    #[serde(default)]
    pub domain: Domain,
}

const NEWTON_TOL: f64 = 1e-12;

fn parse_components(exprs: &[String], n: usize) -> Result<Vec<ScalarField>> {
    if exprs.len() != n {
        return Err(FinjetError::Dimension(format!("map needs {n} components, got {}", exprs.len())));
    }
    exprs.iter().map(|e| ScalarField::parse(e, n, false)).collect()
}

impl Diffeo {
    pub fn from_spec(spec: &DiffeoSpec) -> Result<Diffeo> {
        let n = spec.forward.len();
        if n == 0 {
            return Err(FinjetError::Config("map without components".into()));
        }
        let forward = parse_components(&spec.forward, n)?;
        let inverse = spec.inverse.as_ref().map(|inv| parse_components(inv, n)).transpose()?;
        Ok(Diffeo::Expr { forward, inverse, domain: spec.domain.clone() })
    }

    /// Parses an explicit map from coordinate expressions.
    pub fn parse(forward: &[&str], inverse: Option<&[&str]>, domain: Domain) -> Result<Diffeo> {
        let spec = DiffeoSpec {
            forward: forward.iter().map(|s| s.to_string()).collect(),
            inverse: inverse.map(|v| v.iter().map(|s| s.to_string()).collect()),
            domain,
        };
        Diffeo::from_spec(&spec)
    }

    pub fn identity(n: usize) -> Diffeo {
        let comps: Vec<String> = (1..=n).map(|i| format!("x{i}")).collect();
        let spec = DiffeoSpec { forward: comps.clone(), inverse: Some(comps), domain: Domain::default() };
        Diffeo::from_spec(&spec).expect("identity map parses")
    }

    pub fn dim(&self) -> usize {
        match self {
            Diffeo::Expr { forward, .. } => forward.len(),
            Diffeo::Compose(f, _) => f.dim(),
            Diffeo::Inverse(f) => f.dim(),
        }
    }

    /// `self ∘ inner`.
    pub fn compose(self: &Arc<Self>, inner: &Arc<Diffeo>) -> Diffeo {
        Diffeo::Compose(self.clone(), inner.clone())
    }

    /// The inverse map, using explicit inverses where known.
    pub fn inverse(self: &Arc<Self>) -> Arc<Diffeo> {
        match &**self {
            Diffeo::Expr { forward, inverse: Some(inv), .. } => {
                Arc::new(Diffeo::Expr { forward: inv.clone(), inverse: Some(forward.clone()), domain: Domain::default() })
            }
            Diffeo::Expr { .. } => Arc::new(Diffeo::Inverse(self.clone())),
            Diffeo::Compose(f, h) => Arc::new(Diffeo::Compose(h.inverse(), f.inverse())),
            Diffeo::Inverse(f) => f.clone(),
        }
    }

    fn check_domain(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim() {
            return Err(FinjetError::Dimension(format!("map of dimension {} applied to {} coordinates", self.dim(), x.len())));
        }
        if let Diffeo::Expr { domain, .. } = self {
            if !domain.contains(x) {
                return Err(FinjetError::OutsideDomain(format!("{x:?}")));
            }
        }
        Ok(())
    }

    pub fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_domain(x)?;
        match self {
            Diffeo::Expr { forward, .. } => forward.iter().map(|c| c.eval(x)).collect(),
            Diffeo::Compose(f, h) => f.apply(&h.apply(x)?),
            Diffeo::Inverse(f) => f.solve(x),
        }
    }

    pub fn jacobian(&self, x: &[f64]) -> Result<DMatrix<f64>> {
        let jets = self.jets(x, 1)?;
        let n = self.dim();
        Ok(DMatrix::from_fn(n, n, |i, j| jets[i].gradient()[j]))
    }

    /// Solves `self(x) = target` by damped Newton iteration started at `target`.
    fn solve(&self, target: &[f64]) -> Result<Vec<f64>> {
        let n = target.len();
        let t = DVector::from_column_slice(target);
        let mut x = t.clone();
        let residual = |x: &DVector<f64>| -> Result<DVector<f64>> {
            Ok(DVector::from_vec(self.apply(x.as_slice())?) - &t)
        };
        let mut r = residual(&x)?;
        for _ in 0..100 {
            if r.amax() <= NEWTON_TOL * (1.0 + t.amax()) {
                return Ok(x.as_slice().to_vec());
            }
            let jac = self.jacobian(x.as_slice())?;
            let step = jac
                .lu()
                .solve(&r)
                .ok_or_else(|| FinjetError::NumericDomain("singular jacobian in inversion".into()))?;
            let mut damping = 1.0;
            loop {
                let trial = &x - &step * damping;
                if let Ok(rt) = residual(&trial) {
                    if rt.norm() < r.norm() || damping < 1e-4 {
                        x = trial;
                        r = rt;
                        break;
                    }
                }
                damping *= 0.5;
                if damping < 1e-6 {
                    return Err(FinjetError::NumericDomain("inversion left the domain".into()));
                }
            }
        }
        if r.amax() <= 1e3 * NEWTON_TOL * (1.0 + t.amax()) && n > 0 {
            return Ok(x.as_slice().to_vec());
        }
        Err(FinjetError::NumericDomain(format!("inversion did not converge at {target:?}")))
    }

    /// Jets of the components at `x`, in `dim()` variables.
    pub fn jets(&self, x: &[f64], order: usize) -> Result<Vec<Jet>> {
        self.check_domain(x)?;
        match self {
            Diffeo::Expr { forward, .. } => {
                let vars = lift_variables(x, order);
                forward.iter().map(|c| c.eval_jets(&vars)).collect()
            }
            Diffeo::Compose(f, h) => {
                let inner = h.jets(x, order)?;
                let at: Vec<f64> = inner.iter().map(Jet::value).collect();
                let outer = f.jets(&at, order)?;
                Ok(outer.iter().map(|o| o.compose(&inner)).collect())
            }
            Diffeo::Inverse(f) => {
                let x0 = f.solve(x)?;
                let fj = f.jets(&x0, order)?;
                let n = x.len();
                let jac = DMatrix::from_fn(n, n, |i, j| fj[i].gradient()[j]);
                let jinv = jac
                    .try_inverse()
                    .ok_or_else(|| FinjetError::NumericDomain("singular jacobian in inversion".into()))?;
                let s = lift_variables(x, order);
                // series reversion: g <- g - J^{-1} (f∘g - id), one order per pass
                let mut g: Vec<Jet> = (0..n).map(|i| Jet::constant(n, order, x0[i])).collect();
                for _ in 0..=order {
                    let fg: Vec<Jet> = fj.iter().map(|c| c.compose(&g)).collect();
                    let err: Vec<Jet> = fg.iter().zip(&s).map(|(a, b)| a - b).collect();
                    for (i, gi) in g.iter_mut().enumerate() {
                        for (k, e) in err.iter().enumerate() {
                            if jinv[(i, k)] != 0.0 {
                                *gi -= &e.scale(jinv[(i, k)]);
                            }
                        }
                    }
                }
                Ok(g)
            }
        }
    }
}

/// Affine and conformal generators plus small polynomial perturbations used by
/// the verification suites.
pub mod corpus {
    use super::*;

    fn arc(forward: Vec<String>, inverse: Option<Vec<String>>, domain: Domain) -> Arc<Diffeo> {
        Arc::new(Diffeo::from_spec(&DiffeoSpec { forward, inverse, domain }).expect("corpus map parses"))
    }

    fn lit(v: f64) -> String {
        format!("({v:?})")
    }

    pub fn translation(c: &[f64]) -> Arc<Diffeo> {
        let fwd = c.iter().enumerate().map(|(i, v)| format!("x{} + {}", i + 1, lit(*v))).collect();
        let inv = c.iter().enumerate().map(|(i, v)| format!("x{} - {}", i + 1, lit(*v))).collect();
        arc(fwd, Some(inv), Domain::default())
    }

    /// Rotation by `angle` in the coordinate plane `(p, q)`.
    pub fn rotation(n: usize, p: usize, q: usize, angle: f64) -> Arc<Diffeo> {
        let (s, c) = angle.sin_cos();
        let build = |s: f64| -> Vec<String> {
            (0..n)
                .map(|i| {
                    if i == p {
                        format!("{}*x{} - {}*x{}", lit(c), p + 1, lit(s), q + 1)
                    } else if i == q {
                        format!("{}*x{} + {}*x{}", lit(s), p + 1, lit(c), q + 1)
                    } else {
                        format!("x{}", i + 1)
                    }
                })
                .collect()
        };
        arc(build(s), Some(build(-s)), Domain::default())
    }

    pub fn dilation(n: usize, factor: f64) -> Arc<Diffeo> {
        let fwd = (1..=n).map(|i| format!("{}*x{i}", lit(factor))).collect();
        let inv = (1..=n).map(|i| format!("{}*x{i}", lit(1.0 / factor))).collect();
        arc(fwd, Some(inv), Domain::default())
    }

    /// `x ↦ x/|x|²` on the shell `0.3 ≤ |x| ≤ 3`; an involution.
    pub fn inversion(n: usize) -> Arc<Diffeo> {
        let r2: Vec<String> = (1..=n).map(|i| format!("x{i}^2")).collect();
        let r2 = r2.join(" + ");
        let comps: Vec<String> = (1..=n).map(|i| format!("x{i}/({r2})")).collect();
        let domain = Domain { exclude_radius: Some(0.3), max_radius: Some(3.0), ..Domain::default() };
        arc(comps.clone(), Some(comps), domain)
    }

    /// Inversion centred at `c`: `x ↦ c + (x - c)/|x - c|²`.
    pub fn inversion_about(c: &[f64]) -> Arc<Diffeo> {
        let n = c.len();
        let d: Vec<String> = (0..n).map(|i| format!("(x{} - {})", i + 1, lit(c[i]))).collect();
        let r2 = d.iter().map(|e| format!("{e}^2")).collect::<Vec<_>>().join(" + ");
        let comps: Vec<String> = (0..n).map(|i| format!("{} + {}/({r2})", lit(c[i]), d[i])).collect();
        let domain = Domain {
            exclude_radius: Some(0.3),
            max_radius: Some(3.0),
            center: Some(c.to_vec()),
            ..Domain::default()
        };
        arc(comps.clone(), Some(comps), domain)
    }

    /// `x ↦ x + eps·p(x)` with a fixed cubic `p` chosen by `seed`; the inverse
    /// is numerical. Requires `|eps| ≤ 0.05`.
    pub fn cubic_perturbation(n: usize, eps: f64, seed: u64) -> Arc<Diffeo> {
        assert!(eps.abs() <= 0.05, "perturbation too large for guaranteed invertibility");
        let pick = |k: u64| -> usize { ((seed.wrapping_mul(6364136223846793005).wrapping_add(k * 1442695040888963407)) >> 33) as usize % n + 1 };
        let comps = (1..=n)
            .map(|i| {
                let (a, b, c) = (pick(3 * i as u64), pick(3 * i as u64 + 1), pick(3 * i as u64 + 2));
                format!("x{i} + {}*(x{a}^3 - x{b}*x{c}^2 + 0.5*x{a}*x{b} + x{c})", lit(eps))
            })
            .collect();
        arc(comps, None, Domain::default())
    }
}

#[cfg(test)]
mod tests {
    use super::corpus::*;
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn explicit_and_numeric_inverses_agree() {
        let f = cubic_perturbation(2, 0.05, 7);
        let finv = f.inverse();
        assert!(matches!(*finv, Diffeo::Inverse(_)));
        let x = [0.4, -0.7];
        let y = finv.apply(&f.apply(&x).unwrap()).unwrap();
        assert_relative_eq!(y[0], x[0], epsilon = 1e-11);
        assert_relative_eq!(y[1], x[1], epsilon = 1e-11);
    }

    #[test]
    fn inverse_jets_compose_to_identity() {
        let f = Arc::new(Diffeo::parse(&["x1 + 0.1*x2^2 + 0.03*x1^3", "x2 + 0.05*sin(x1)"], None, Domain::default()).unwrap());
        let finv = f.inverse();
        let id = Arc::new(f.compose(&finv));
        let x = [0.3, 0.2];
        let jets = id.jets(&x, 4).unwrap();
        for (i, j) in jets.iter().enumerate() {
            assert_relative_eq!(j.value(), x[i], epsilon = 1e-11);
            for (k, c) in j.coeffs().iter().enumerate().skip(1) {
                let expect = if k == 1 + i { 1.0 } else { 0.0 };
                assert!((c - expect).abs() < 1e-10, "component {i} coefficient {k}: {c}");
            }
        }
    }

    #[test]
    fn inversion_respects_its_domain() {
        let f = inversion(2);
        assert_eq!(f.apply(&[1.0, 0.0]).unwrap(), vec![1.0, 0.0]);
        assert!(matches!(f.apply(&[0.1, 0.0]), Err(FinjetError::OutsideDomain(_))));
        let j = f.jacobian(&[1.0, 0.0]).unwrap();
        // I - 2 x xᵀ at a unit vector
        assert_relative_eq!(j[(0, 0)], -1.0, epsilon = 1e-14);
        assert_relative_eq!(j[(1, 1)], 1.0, epsilon = 1e-14);
    }

    #[test]
    fn rotation_and_translation_invert_exactly() {
        let r = rotation(3, 0, 2, 0.7);
        let t = translation(&[0.1, -0.2, 0.3]);
        let m = Arc::new(r.compose(&t));
        let x = [0.2, 0.5, -0.4];
        let back = m.inverse().apply(&m.apply(&x).unwrap()).unwrap();
        for i in 0..3 {
            assert_relative_eq!(back[i], x[i], epsilon = 1e-14);
        }
    }
}
