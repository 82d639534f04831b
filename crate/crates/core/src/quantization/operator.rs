use std::sync::Arc;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::metric::{christoffel_jets, ricci_from, riemann_from, MetricField};
use crate::error::{FinjetError, Result};
use crate::fields::{DensityField, SymbolField};
use crate::jets::{lift_variables, Jet, JetMatrix};

/// The six constants of the quantization map in dimension `m`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BetaConstants {
    pub m: usize,
    pub lambda: f64,
    pub mu: f64,
    pub delta: f64,
    pub beta: [f64; 6],
}

const RESONANCE_TOL: f64 = 1e-12;

/// β₁…β₆ for `(m, λ, μ)` with `δ = μ − λ`. Fails for `m ≤ 2` and when δ hits
/// one of the four resonant values, each of which zeroes a denominator.
pub fn beta_constants(m: usize, lambda: f64, mu: f64) -> Result<BetaConstants> {
    if m <= 2 {
        return Err(FinjetError::Dimension(format!("quantization needs m > 2, got m = {m}")));
    }
    let delta = mu - lambda;
    let mf = m as f64;
    let excluded = [
        (2.0 / mf, "delta = 2/m"),
        ((mf + 2.0) / (2.0 * mf), "delta = (m+2)/(2m)"),
        ((mf + 1.0) / mf, "delta = (m+1)/m"),
        ((mf + 2.0) / mf, "delta = (m+2)/m"),
    ];
    for (value, rule) in excluded {
        if (delta - value).abs() <= RESONANCE_TOL * value.abs().max(1.0) {
            return Err(FinjetError::ResonantWeight { m, delta, excluded: value, rule });
        }
    }
    let (l, d) = (lambda, delta);
    let a = 2.0 + mf * (1.0 - d); // (m+2)/m
    let b = 2.0 - mf * d; // 2/m
    let c = 1.0 + mf * (1.0 - d); // (m+1)/m
    let e = 2.0 + mf * (1.0 - 2.0 * d); // (m+2)/(2m)
    let b1 = 2.0 * (mf * l + 1.0) / a;
    let b2 = mf * (2.0 * l + d - 1.0) / (a * b);
    let b3 = mf * l * (mf * l + 1.0) / (c * a);
    let b4 = mf * l * (mf * mf * mu * (2.0 - 2.0 * l - d) + 2.0 * (mf * l + 1.0).powi(2) - mf * (mf + 1.0)) / (c * a * e * b);
    let b5 = mf * mf * l * (l + d - 1.0) / ((mf - 2.0) * c);
    let b6 = (mf * d - 2.0) / ((mf - 1.0) * e) * b5;
    let beta = [b1, b2, b3, b4, b5, b6];
    if beta.iter().any(|v| !v.is_finite()) {
        return Err(FinjetError::NumericDomain(format!("non-finite constants for m = {m}, lambda = {lambda}, mu = {mu}")));
    }
    Ok(BetaConstants { m, lambda, mu, delta, beta })
}

impl BetaConstants {
    /// `|β₆·(m−1)(2+m(1−2δ)) − β₅·(mδ−2)|`.
    pub fn ratio_defect(&self) -> f64 {
        let mf = self.m as f64;
        let [_, _, _, _, b5, b6] = self.beta;
        (b6 * (mf - 1.0) * (2.0 + mf * (1.0 - 2.0 * self.delta)) - b5 * (mf * self.delta - 2.0)).abs()
    }
}

/// A symmetric contravariant 2-tensor density known through jets on some chart.
pub trait SymbolJets: Send + Sync {
    fn dim(&self) -> usize;
    fn weight(&self) -> f64;
    /// Components as jets of the given order at `pt`, one variable per chart
    /// coordinate.
    fn jets(&self, pt: &[f64], order: usize) -> Result<JetMatrix>;
}

impl SymbolJets for SymbolField {
    fn dim(&self) -> usize {
        SymbolField::dim(self)
    }

    fn weight(&self) -> f64 {
        SymbolField::weight(self)
    }

    fn jets(&self, pt: &[f64], order: usize) -> Result<JetMatrix> {
        if pt.len() != self.dim() {
            return Err(FinjetError::Dimension(format!("symbol of dimension {} at {} coordinates", self.dim(), pt.len())));
        }
        Ok(JetMatrix::from_entries(self.dim(), SymbolField::jets(self, pt, order)?))
    }
}

/// `P^ij ∂_i∂_j + b^j ∂_j + c` at one point: the operator written against
/// plain partial derivatives of the density's component.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OperatorCoefficients {
    pub leading: Vec<Vec<f64>>,
    pub first: Vec<f64>,
    pub zeroth: f64,
}

/// `Q_{λ,μ}(P) = P^ij ∇_i∇_j + (β₁ ∇_iP^ij + β₂ a^ij ∇_i(a_kl P^kl)) ∇_j
///   + β₃ ∇_i∇_jP^ij + β₄ a^st ∇_s∇_t(a_ij P^ij) + β₅ R_ij P^ij + β₆ R a_ij P^ij`.
///
/// `∇` is the Levi-Civita connection of the metric acting on densities,
/// with `−w Γ^t_ts` for weight `w`. Arguments are λ-densities, values are
/// μ-densities.
#[derive(Clone)]
pub struct QuantizedOperator {
    metric: MetricField,
    symbol: Arc<dyn SymbolJets>,
    beta: BetaConstants,
}

impl std::fmt::Debug for QuantizedOperator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("QuantizedOperator").field("metric", &self.metric).field("beta", &self.beta).finish_non_exhaustive()
    }
}

/// Builds `Q_{λ,μ}(P)` for the metric. The resonance check uses `m = metric.dim()`
/// and runs before anything else; the symbol weight must be `μ − λ`.
pub fn quantize(metric: &MetricField, lambda: f64, mu: f64, p: Arc<dyn SymbolJets>) -> Result<QuantizedOperator> {
    let beta = beta_constants(metric.dim(), lambda, mu)?;
    if p.dim() != metric.dim() {
        return Err(FinjetError::Dimension(format!("symbol of dimension {} on a metric of dimension {}", p.dim(), metric.dim())));
    }
    if (p.weight() - beta.delta).abs() > 1e-12 {
        return Err(FinjetError::Precondition(format!(
            "symbol weight {} differs from mu - lambda = {}",
            p.weight(),
            beta.delta
        )));
    }
    Ok(QuantizedOperator { metric: metric.clone(), symbol: p, beta })
}

impl QuantizedOperator {
    pub fn beta(&self) -> &BetaConstants {
        &self.beta
    }

    pub fn metric(&self) -> &MetricField {
        &self.metric
    }

    pub fn dim(&self) -> usize {
        self.metric.dim()
    }

    /// Geometric data at `pt`, reusable across densities.
    pub fn at(&self, pt: &[f64]) -> Result<OperatorAt> {
        OperatorAt::new(self, pt)
    }

    /// `Q(P)φ` at `pt` for a λ-density `φ` on the metric's chart.
    pub fn apply(&self, phi: &DensityField, pt: &[f64]) -> Result<f64> {
        if (phi.weight - self.beta.lambda).abs() > 1e-12 {
            return Err(FinjetError::Precondition(format!(
                "density weight {} differs from lambda = {}",
                phi.weight, self.beta.lambda
            )));
        }
        let at = self.at(pt)?;
        at.apply_jet(&phi.scalar.eval_jets(&lift_variables(pt, 2))?)
    }

    pub fn coefficients(&self, pt: &[f64]) -> Result<OperatorCoefficients> {
        Ok(self.at(pt)?.coefficients())
    }
}

/// The operator's coefficients frozen at one point.
#[derive(Debug, Clone)]
pub struct OperatorAt {
    point: Vec<f64>,
    lambda: f64,
    p: DMatrix<f64>,
    /// `Γ^t_ij` values, `[t][i][j]` flat.
    gamma: Vec<f64>,
    /// `Γ^t_ti` as order-1 jets.
    trace: Vec<Jet>,
    /// Coefficient of `∇_jφ`.
    vector: Vec<f64>,
    scalar: f64,
}

impl OperatorAt {
    fn new(op: &QuantizedOperator, pt: &[f64]) -> Result<Self> {
        let d = op.dim();
        let [b1, b2, b3, b4, b5, b6] = op.beta.beta;
        let (lambda, delta) = (op.beta.lambda, op.beta.delta);
        let gj = christoffel_jets(&op.metric, pt, 1)?;
        let g = |k: usize, i: usize, j: usize| &gj[(k * d + i) * d + j];
        let gv = |k: usize, i: usize, j: usize| g(k, i, j).value();
        let trace: Vec<Jet> = (0..d)
            .map(|i| {
                let mut acc = g(0, 0, i).clone();
                for t in 1..d {
                    acc += g(t, t, i);
                }
                acc
            })
            .collect();
        let a = op.metric.jets(pt, 2)?;
        let a_inv = a.values().try_inverse().ok_or_else(|| FinjetError::ModelInvalid("singular metric".into()))?;
        let pj = op.symbol.jets(pt, 2)?;
        let p = pj.values();

        // W^j = ∇_i P^ij, order-1 jets
        let w: Vec<Jet> = (0..d)
            .map(|j| {
                let mut acc = pj.get(0, j).derivative(0);
                for i in 1..d {
                    acc += &pj.get(i, j).derivative(i);
                }
                for i in 0..d {
                    for t in 0..d {
                        let pt1 = pj.get(t, j).truncate(1);
                        let pt2 = pj.get(i, t).truncate(1);
                        acc += &(g(i, i, t) * &pt1);
                        acc += &(g(j, i, t) * &pt2);
                    }
                    acc -= &(&(&trace[i] * &pj.get(i, j).truncate(1)) * delta);
                }
                acc
            })
            .collect();
        let div_w = (0..d)
            .map(|j| {
                let mut v = w[j].derivative(j).value() - delta * trace[j].value() * w[j].value();
                for t in 0..d {
                    v += gv(j, j, t) * w[t].value();
                }
                v
            })
            .sum::<f64>();

        // u = a_kl P^kl, a δ-density; du_i = ∇_i u
        let mut u = a.get(0, 0) * pj.get(0, 0);
        for k in 0..d {
            for l in 0..d {
                if k + l > 0 {
                    u += &(a.get(k, l) * pj.get(k, l));
                }
            }
        }
        let du: Vec<Jet> = (0..d).map(|i| &u.derivative(i) - &(&(&trace[i] * &u.truncate(1)) * delta)).collect();
        let mut lap_u = 0.0;
        for s in 0..d {
            for t in 0..d {
                let mut v = du[t].derivative(s).value() - delta * trace[s].value() * du[t].value();
                for k in 0..d {
                    v -= gv(k, s, t) * du[k].value();
                }
                lap_u += a_inv[(s, t)] * v;
            }
        }

        let riem = riemann_from(&gj, d);
        let (ric, r) = ricci_from(&riem, &a_inv);
        let ric_p: f64 = (0..d).flat_map(|i| (0..d).map(move |j| (i, j))).map(|(i, j)| ric.get(&[i, j]) * p[(i, j)]).sum();
        let u0 = u.value();

        let vector = (0..d)
            .map(|j| b1 * w[j].value() + b2 * (0..d).map(|i| a_inv[(i, j)] * du[i].value()).sum::<f64>())
            .collect();
        let scalar = b3 * div_w + b4 * lap_u + b5 * ric_p + b6 * r * u0;
        Ok(OperatorAt {
            point: pt.to_vec(),
            lambda,
            p,
            gamma: (0..d * d * d).map(|k| gj[k].value()).collect(),
            trace,
            vector,
            scalar,
        })
    }

    pub fn dim(&self) -> usize {
        self.point.len()
    }

    /// Applies the operator to the component of a λ-density given as a
    /// second-order jet at the point.
    pub fn apply_jet(&self, phi: &Jet) -> Result<f64> {
        let d = self.dim();
        if phi.dim() != d {
            return Err(FinjetError::Dimension(format!("density jet in {} variables, chart has {d}", phi.dim())));
        }
        if phi.order() < 2 {
            return Err(FinjetError::OrderExceeded { requested: 2, available: phi.order() });
        }
        let lam = self.lambda;
        let phi1 = phi.truncate(1);
        // ∇_jφ as order-1 jets
        let dphi: Vec<Jet> = (0..d).map(|j| &phi.derivative(j) - &(&(&self.trace[j] * &phi1) * lam)).collect();
        let mut out = 0.0;
        for i in 0..d {
            for j in 0..d {
                let mut h = dphi[j].derivative(i).value() - lam * self.trace[i].value() * dphi[j].value();
                for t in 0..d {
                    h -= self.gamma[(t * d + i) * d + j] * dphi[t].value();
                }
                out += self.p[(i, j)] * h;
            }
            out += self.vector[i] * dphi[i].value();
        }
        Ok(out + self.scalar * phi.value())
    }

    /// Coefficients against plain partials, read off from the action on
    /// `1` and on the coordinate functions centred at the point.
    pub fn coefficients(&self) -> OperatorCoefficients {
        let d = self.dim();
        let one = Jet::constant(d, 2, 1.0);
        let zeroth = self.apply_jet(&one).expect("order-2 jet");
        let first = (0..d)
            .map(|j| self.apply_jet(&Jet::variable(d, 2, j, 0.0)).expect("order-2 jet"))
            .collect();
        let leading = (0..d).map(|i| (0..d).map(|j| self.p[(i, j)]).collect()).collect();
        OperatorCoefficients { leading, first, zeroth }
    }
}

/// The density test basis `{1, x^i, x^i x^j, exp(x^1)}` of the given weight.
pub fn density_test_basis(n: usize, weight: f64) -> Vec<DensityField> {
    let mut exprs = vec!["1".to_string()];
    exprs.extend((1..=n).map(|i| format!("x{i}")));
    for i in 1..=n {
        for j in i..=n {
            exprs.push(format!("x{i}*x{j}"));
        }
    }
    exprs.push("exp(x1)".into());
    exprs.iter().map(|e| DensityField::parse(n, e, weight).expect("basis expression parses")).collect()
}
