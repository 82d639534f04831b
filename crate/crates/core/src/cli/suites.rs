//! Verification suites run over the scenario's sample points.

use std::sync::Arc;

use rayon::prelude::*;

use super::report::CheckRecord;
use super::sampler::{sample_points, SplitMix64};
use super::scenario::Loaded;
use crate::connections::{berwald_coeffs, cartan_coeffs, chern_compatibility_defect, chern_from, landsberg_tensor, ConnectionKind};
use crate::diffeo::{corpus, Diffeo};
use crate::error::{FinjetError, Result};
use crate::fields::{DensityField, SymbolField};
use crate::finsler::{homogeneity_residuals, raise_index, FinslerJets, HomogeneityResiduals, PointOnSlit};
use crate::quantization::{
    density_test_basis, descent_probe, kinetic_formula, levi_civita, q01_descended, quantize, ricci_contractions_flat,
    ricci_scalar_signed, sasaki_metric, CurvatureSign, DescentVerdict, MetricField, RestrictedQuantization,
    DESCENDS_BELOW, OBSTRUCTED_ABOVE,
};
use crate::schwarzian::{schwarzian, schwarzian_reduced, verify_cocycle, verify_rescaling_invariance};

pub const SUITES: [&str; 13] = [
    "homogeneity",
    "euler-identities",
    "connection-compat",
    "riemannian-coincidence",
    "landsberg-coincidence",
    "cocycle",
    "rescaling",
    "conformal-vanishing",
    "sasaki-curvature",
    "ricci-contractions",
    "quantization-rescaling",
    "kin-formula",
    "descent",
];

pub fn default_tolerance(suite: &str) -> f64 {
    match suite {
        "homogeneity" | "euler-identities" => 1e-9,
        "connection-compat" | "landsberg-coincidence" => 1e-8,
        "riemannian-coincidence" | "conformal-vanishing" | "ricci-contractions" => 1e-7,
        _ => 1e-6,
    }
}

/// Checks `names` against the known suites; an empty list means all of them.
pub fn parse_suites(names: &[String]) -> Result<Vec<&'static str>> {
    if names.is_empty() {
        return Ok(SUITES.to_vec());
    }
    names
        .iter()
        .map(|n| {
            SUITES
                .iter()
                .find(|s| **s == n.trim())
                .copied()
                .ok_or_else(|| FinjetError::Config(format!("unknown suite `{n}`; known: {}", SUITES.join(", "))))
        })
        .collect()
}

struct Ctx<'a> {
    l: &'a Loaded,
    samples: Vec<PointOnSlit>,
    seed: u64,
    tol: f64,
}

/// Largest value of `f` over the points, evaluated in parallel. NaN wins.
fn max_over<F>(pts: &[PointOnSlit], f: F) -> Result<f64>
where
    F: Fn(&PointOnSlit) -> Result<f64> + Sync,
{
    let vals = pts.par_iter().map(&f).collect::<Result<Vec<_>>>()?;
    Ok(vals.into_iter().fold(0.0, |m: f64, v| if v.is_nan() || m.is_nan() { f64::NAN } else { m.max(v) }))
}

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}

fn symbols_or_na(ctx: &Ctx, suite: &str, anchor: &str) -> std::result::Result<(), CheckRecord> {
    if ctx.l.symbols.is_empty() {
        return Err(CheckRecord::not_applicable(suite, anchor, ctx.tol, "scenario defines no symbols"));
    }
    Ok(())
}

/// Runs the named suites; records come back in suite order.
pub fn run_suites(l: &Loaded, suites: &[&str], seed: u64, tol_override: Option<f64>) -> Result<Vec<CheckRecord>> {
    let maps: Vec<&Diffeo> = l.diffeos.values().map(|d| d.as_ref()).collect();
    let mut rng = SplitMix64::new(seed);
    let samples = sample_points(&mut rng, l.scenario.samples.count, &l.bounds, l.scenario.samples.y_shell, &maps)?;
    let mut out = Vec::new();
    for suite in suites {
        let tol = tol_override.or_else(|| l.scenario.tolerances.get(*suite).copied()).unwrap_or_else(|| default_tolerance(suite));
        let ctx = Ctx { l, samples: samples.clone(), seed, tol };
        let records = match *suite {
            "homogeneity" => homogeneity(&ctx)?,
            "euler-identities" => euler(&ctx)?,
            "connection-compat" => connection_compat(&ctx)?,
            "riemannian-coincidence" => riemannian_coincidence(&ctx)?,
            "landsberg-coincidence" => landsberg_coincidence(&ctx)?,
            "cocycle" => cocycle(&ctx)?,
            "rescaling" => rescaling(&ctx)?,
            "conformal-vanishing" => conformal_vanishing(&ctx)?,
            "sasaki-curvature" => sasaki_curvature(&ctx)?,
            "ricci-contractions" => ricci_contractions(&ctx)?,
            "quantization-rescaling" => quantization_rescaling(&ctx)?,
            "kin-formula" => kin_formula(&ctx)?,
            "descent" => descent(&ctx)?,
            other => return Err(FinjetError::Config(format!("unknown suite `{other}`"))),
        };
        out.extend(records);
    }
    Ok(out)
}

type Pick = fn(&HomogeneityResiduals) -> f64;

fn residual_checks(ctx: &Ctx, suite: &str, checks: &[(&str, &str, Pick)]) -> Result<Vec<CheckRecord>> {
    let model = &ctx.l.model;
    let rows = ctx.samples.par_iter().map(|p| homogeneity_residuals(model, p)).collect::<Result<Vec<_>>>()?;
    Ok(checks
        .iter()
        .map(|(name, anchor, pick)| {
            let r = rows.iter().map(pick).fold(0.0, f64::max);
            CheckRecord::new(suite, *name, anchor, rows.len(), r, ctx.tol)
        })
        .collect())
}

fn homogeneity(ctx: &Ctx) -> Result<Vec<CheckRecord>> {
    residual_checks(
        ctx,
        "homogeneity",
        &[
            ("F degree one", "F is positively homogeneous of degree one in y", |r| r.f_degree_one),
            ("g degree zero", "g_ij is homogeneous of degree zero in y", |r| r.g_degree_zero),
            ("cartan symmetric", "the Cartan tensor is totally symmetric", |r| r.cartan_symmetry),
            ("cartan from dg", "∂g_ij/∂y^k = 2A_ijk/F", |r| r.cartan_vs_dg),
        ],
    )
}

fn euler(ctx: &Ctx) -> Result<Vec<CheckRecord>> {
    residual_checks(
        ctx,
        "euler-identities",
        &[
            ("omega y = F", "ω_i y^i = F", |r| r.euler_f),
            ("omega = g y / F", "ω_i = g_ij y^j / F", |r| r.omega_vs_g),
            ("g y y = F^2", "g_ij y^i y^j = F²", |r| r.g_yy),
            ("A y = 0", "A_ijk y^k = 0", |r| r.cartan_y),
        ],
    )
}

fn connection_compat(ctx: &Ctx) -> Result<Vec<CheckRecord>> {
    let model = &ctx.l.model;
    let n = ctx.samples.len();
    let compat = max_over(&ctx.samples, |p| chern_compatibility_defect(&FinslerJets::new(model, p, 4)?))?;
    let sym = max_over(&ctx.samples, |p| Ok(chern_from(&FinslerJets::new(model, p, 4)?)?.permuted(&[0, 2, 1]).max_abs_diff(&chern_from(&FinslerJets::new(model, p, 4)?)?)))?;
    Ok(vec![
        CheckRecord::new("connection-compat", "chern metric compatibility", "the Chern connection is almost metric: δg_ij/δx^s = γ_is g_tj + γ_js g_it", n, compat, ctx.tol),
        CheckRecord::new("connection-compat", "chern torsion free", "the Chern connection is torsion free: γ^k_ij = γ^k_ji", n, sym, ctx.tol),
    ])
}

fn riemannian_coincidence(ctx: &Ctx) -> Result<Vec<CheckRecord>> {
    const SUITE: &str = "riemannian-coincidence";
    const ANCHOR: &str = "Chern, Berwald and Cartan data coincide with Levi-Civita data on Riemannian models";
    let l = ctx.l;
    let model = &l.model;
    if !model.is_riemannian() {
        return Ok(vec![CheckRecord::not_applicable(SUITE, ANCHOR, ctx.tol, "model is not riemannian")]);
    }
    let metric = MetricField::from_model(model)?;
    let pts = &ctx.samples;
    let n = pts.len();
    let mut out = Vec::new();
    let lc = max_over(pts, |p| {
        let lc = levi_civita(&metric, &p.x)?;
        Ok(crate::connections::chern_coeffs(model, p)?.horizontal.max_abs_diff(&lc))
    })?;
    out.push(CheckRecord::new(SUITE, "chern = levi-civita", ANCHOR, n, lc, ctx.tol));
    let cb = max_over(pts, |p| {
        Ok(crate::connections::chern_coeffs(model, p)?.horizontal.max_abs_diff(&berwald_coeffs(model, p)?.horizontal))
    })?;
    out.push(CheckRecord::new(SUITE, "chern = berwald", ANCHOR, n, cb, ctx.tol));
    let cc = max_over(pts, |p| {
        Ok(crate::connections::chern_coeffs(model, p)?.horizontal.max_abs_diff(&cartan_coeffs(model, p)?.horizontal))
    })?;
    out.push(CheckRecord::new(SUITE, "chern = cartan horizontal", ANCHOR, n, cc, ctx.tol));
    let lb = max_over(pts, |p| Ok(landsberg_tensor(model, p)?.max_abs()))?;
    out.push(CheckRecord::new(SUITE, "landsberg vanishes", "Riemannian models are Landsberg spaces", n, lb, ctx.tol / 10.0));
    let map = l.diffeos.iter().next();
    for (pname, p) in &l.symbols {
        let Some((fname, f)) = map else { break };
        let values = |kind| -> Result<Vec<Vec<f64>>> {
            pts.par_iter().map(|pt| Ok(schwarzian(f, model, kind, p, pt)?.components)).collect()
        };
        let chern = values(ConnectionKind::Chern)?;
        for kind in [ConnectionKind::Berwald, ConnectionKind::Cartan] {
            let other = values(kind)?;
            let r = chern.iter().zip(&other).map(|(a, b)| max_diff(a, b)).fold(0.0, f64::max);
            out.push(CheckRecord::new(
                SUITE,
                format!("operator chern = {} f={fname} P={pname}", kind.name()),
                "the three Schwarzian-type operators agree on Riemannian models",
                n,
                r,
                ctx.tol,
            ));
        }
        let reduced: Vec<Vec<f64>> =
            pts.par_iter().map(|pt| Ok(schwarzian_reduced(f, model, p, &pt.x)?.components)).collect::<Result<_>>()?;
        let r = chern.iter().zip(&reduced).map(|(a, b)| max_diff(a, b)).fold(0.0, f64::max);
        out.push(CheckRecord::new(
            SUITE,
            format!("operator = reduced form f={fname} P={pname}"),
            "on Riemannian models the operator reduces to the Levi-Civita multidimensional Schwarzian",
            n,
            r,
            ctx.tol,
        ));
    }
    Ok(out)
}

fn landsberg_coincidence(ctx: &Ctx) -> Result<Vec<CheckRecord>> {
    const SUITE: &str = "landsberg-coincidence";
    let model = &ctx.l.model;
    let pts = &ctx.samples;
    let r = max_over(pts, |p| {
        let c = crate::connections::chern_coeffs(model, p)?.horizontal;
        let b = berwald_coeffs(model, p)?.horizontal;
        let lu = raise_index(model, p, &landsberg_tensor(model, p)?, 0)?;
        Ok(b.sub(&c).max_abs_diff(&lu))
    })?;
    let mut out = vec![CheckRecord::new(
        SUITE,
        "berwald - chern = landsberg",
        "Berwald and Chern coefficients differ by the Landsberg tensor, so they coincide exactly on Landsberg spaces",
        pts.len(),
        r,
        ctx.tol,
    )];
    if model.is_riemannian() {
        let lb = max_over(pts, |p| Ok(landsberg_tensor(model, p)?.max_abs()))?;
        out.push(CheckRecord::new(SUITE, "landsberg vanishes", "Riemannian models are Landsberg spaces", pts.len(), lb, ctx.tol));
    }
    Ok(out)
}

const COCYCLE_ANCHOR: &str = "cocycle identity 𝒜(f∘h) = f_♭𝒜(h) + 𝒜(f)";

fn cocycle(ctx: &Ctx) -> Result<Vec<CheckRecord>> {
    const SUITE: &str = "cocycle";
    if let Err(na) = symbols_or_na(ctx, SUITE, COCYCLE_ANCHOR) {
        return Ok(vec![na]);
    }
    let l = ctx.l;
    let mut pairs: Vec<(String, String)> = l.scenario.params.cocycle_pairs.iter().map(|[a, b]| (a.clone(), b.clone())).collect();
    let id = Arc::new(Diffeo::identity(l.dim()));
    if pairs.is_empty() {
        let names: Vec<&String> = l.diffeos.keys().collect();
        match names.as_slice() {
            [] => pairs.push(("identity".into(), "identity".into())),
            [a] => pairs.push(((*a).clone(), (*a).clone())),
            [a, b, ..] => pairs.push(((*a).clone(), (*b).clone())),
        }
    }
    let get = |name: &str| if name == "identity" && !l.diffeos.contains_key(name) { Ok(&id) } else { l.diffeo(name) };
    let mut out = Vec::new();
    for (fname, hname) in &pairs {
        let (f, h) = (get(fname)?, get(hname)?);
        for kind in ConnectionKind::ALL {
            for (pname, p) in &l.symbols {
                let r = verify_cocycle(f, h, &l.model, kind, p, &ctx.samples)?;
                out.push(CheckRecord::new(
                    SUITE,
                    format!("{} f={fname} h={hname} P={pname}", kind.name()),
                    COCYCLE_ANCHOR,
                    r.samples,
                    r.max,
                    ctx.tol,
                ));
            }
        }
    }
    Ok(out)
}

fn rescaling(ctx: &Ctx) -> Result<Vec<CheckRecord>> {
    const SUITE: &str = "rescaling";
    const ANCHOR: &str = "the operator is unchanged under F ↦ √ψ·F";
    if let Err(na) = symbols_or_na(ctx, SUITE, ANCHOR) {
        return Ok(vec![na]);
    }
    let l = ctx.l;
    let psi = l.psi()?;
    let (fname, f) = match &l.scenario.params.rescaling_map {
        Some(name) => (name.clone(), l.diffeo(name)?.clone()),
        None => match l.diffeos.iter().next() {
            Some((k, v)) => (k.clone(), v.clone()),
            None => ("identity".to_string(), Arc::new(Diffeo::identity(l.dim()))),
        },
    };
    let mut out = Vec::new();
    for kind in ConnectionKind::ALL {
        for (pname, p) in &l.symbols {
            let rep = verify_rescaling_invariance(&l.model, &psi, &f, kind, p, &ctx.samples)?;
            let label = format!("{} f={fname} P={pname}", kind.name());
            for (what, anchor, r) in [
                ("operator", ANCHOR, rep.operator),
                ("connection", "connection coefficients shift by the ψ-terms and the bracket term", rep.connection),
                ("derivative", "D P shifts by its closed form under rescaling", rep.derivative),
                ("ell", "ℓ(f) shifts by the pulled-back difference of the ψ-terms", rep.ell),
            ] {
                out.push(CheckRecord::new(SUITE, format!("{what} {label}"), anchor, r.samples, r.max, ctx.tol));
            }
        }
    }
    Ok(out)
}

fn conformal_vanishing(ctx: &Ctx) -> Result<Vec<CheckRecord>> {
    const SUITE: &str = "conformal-vanishing";
    const ANCHOR: &str = "the operator vanishes on the conformal group of flat space";
    let l = ctx.l;
    if !l.model.is_flat_euclidean() {
        return Ok(vec![CheckRecord::not_applicable(SUITE, ANCHOR, ctx.tol, "requires the flat euclidean model")]);
    }
    if let Err(na) = symbols_or_na(ctx, SUITE, ANCHOR) {
        return Ok(vec![na]);
    }
    let n = l.dim();
    let shift: Vec<f64> = (0..n).map(|i| 0.1 * (i as f64 + 1.0)).collect();
    let mut gens: Vec<(String, Arc<Diffeo>)> = vec![
        ("translation".into(), corpus::translation(&shift)),
        ("dilation".into(), corpus::dilation(n, 1.3)),
        ("inversion".into(), corpus::inversion(n)),
        ("inversion∘translation".into(), Arc::new(corpus::inversion(n).compose(&corpus::translation(&shift)))),
    ];
    if n >= 2 {
        gens.insert(1, ("rotation".into(), corpus::rotation(n, 0, 1, 0.7)));
    }
    let mut out = Vec::new();
    for (gname, g) in &gens {
        // the inversion is only defined on a shell
        let pts: Vec<PointOnSlit> = ctx.samples.iter().filter(|p| g.apply(&p.x).is_ok()).cloned().collect();
        for kind in ConnectionKind::ALL {
            for (pname, p) in &l.symbols {
                let r = max_over(&pts, |pt| Ok(schwarzian(g, &l.model, kind, p, pt)?.max_abs()))?;
                out.push(CheckRecord::new(SUITE, format!("{} {gname} P={pname}", kind.name()), ANCHOR, pts.len(), r, ctx.tol));
            }
        }
    }
    Ok(out)
}

fn sasaki_curvature(ctx: &Ctx) -> Result<Vec<CheckRecord>> {
    const SUITE: &str = "sasaki-curvature";
    const ANCHOR: &str = "scalar curvature 3n - n^2 - 2 of the flat Sasaki-type metric";
    let l = ctx.l;
    if !l.model.is_flat_euclidean() {
        return Ok(vec![CheckRecord::not_applicable(SUITE, ANCHOR, ctx.tol, "closed forms hold for the flat euclidean model")]);
    }
    let n = l.dim();
    let nf = n as f64;
    let metric = sasaki_metric(&l.model);
    let pts = &ctx.samples;
    let expected = 3.0 * nf - nf * nf - 2.0;
    let rev = max_over(pts, |p| Ok((ricci_scalar_signed(&metric, &p.coords(), CurvatureSign::Reversed)?.1 - expected).abs()))?;
    let cyl = (nf - 1.0) * (nf - 2.0);
    let std = max_over(pts, |p| Ok((ricci_scalar_signed(&metric, &p.coords(), CurvatureSign::Standard)?.1 - cyl).abs()))?;
    let chris = max_over(pts, |p| {
        let g = levi_civita(&metric, &p.coords())?;
        let f = p.y.iter().map(|v| v * v).sum::<f64>().sqrt();
        let w: Vec<f64> = p.y.iter().map(|v| v / f).collect();
        let d = |a: usize, b: usize| if a == b { 1.0 } else { 0.0 };
        let want = crate::tensor::Tensor::from_fn(2 * n, 3, |idx| {
            let (k, i, j) = (idx[0], idx[1], idx[2]);
            if k >= n && i >= n && j >= n {
                let (k, i, j) = (k - n, i - n, j - n);
                -(w[j] * d(k, i) + w[i] * d(k, j) - w[k] * d(i, j)) / f
            } else {
                0.0
            }
        });
        Ok(g.max_abs_diff(&want))
    })?;
    Ok(vec![
        CheckRecord::new(SUITE, format!("scalar curvature = {expected} (reversed sign)"), ANCHOR, pts.len(), rev, ctx.tol)
            .with_note("Ricci contraction R_bd = R^a_bda"),
        CheckRecord::new(SUITE, format!("scalar curvature = {cyl} (standard sign)"), "the flat fiber metric is the cylinder R × S^{n-1}", pts.len(), std, ctx.tol)
            .with_note("Ricci contraction R_bd = R^a_bad"),
        CheckRecord::new(SUITE, "christoffel closed form", "Christoffel symbols of the flat Sasaki-type metric", pts.len(), chris, ctx.tol / 10.0),
    ])
}

fn ricci_contractions(ctx: &Ctx) -> Result<Vec<CheckRecord>> {
    const SUITE: &str = "ricci-contractions";
    const ANCHOR: &str = "contractions of the Sasaki Ricci tensor with the lifted symbol on flat space";
    let l = ctx.l;
    if !l.model.is_flat_euclidean() {
        return Ok(vec![CheckRecord::not_applicable(SUITE, ANCHOR, ctx.tol, "closed forms hold for the flat euclidean model")]);
    }
    if let Err(na) = symbols_or_na(ctx, SUITE, ANCHOR) {
        return Ok(vec![na]);
    }
    let n = l.dim();
    let nf = n as f64;
    let mut out = Vec::new();
    for (pname, p) in &l.symbols {
        let rows: Vec<[f64; 2]> = ctx
            .samples
            .par_iter()
            .map(|pt| {
                let c = ricci_contractions_flat(&l.model, p, pt, CurvatureSign::Reversed)?;
                let pm = p.values(&pt.x)?;
                let f = pt.y.iter().map(|v| v * v).sum::<f64>().sqrt();
                let (mut oo, mut gp) = (0.0, 0.0);
                for i in 0..n {
                    gp += pm[(i, i)];
                    for j in 0..n {
                        oo += pt.y[i] * pt.y[j] / (f * f) * pm[(i, j)];
                    }
                }
                let want = (nf - 2.0) * oo + (2.0 - nf) * gp;
                Ok([c[0].abs().max(c[1].abs()).max(c[2].abs()), (c[3] - want).abs()])
            })
            .collect::<Result<_>>()?;
        let first = rows.iter().map(|r| r[0]).fold(0.0, f64::max);
        let fourth = rows.iter().map(|r| r[1]).fold(0.0, f64::max);
        out.push(
            CheckRecord::new(SUITE, format!("mixed and horizontal contractions vanish P={pname}"), ANCHOR, rows.len(), first, ctx.tol)
                .with_note("reversed sign convention"),
        );
        out.push(
            CheckRecord::new(SUITE, format!("vertical contraction (n-2)ωωP + (2-n)gP P={pname}"), ANCHOR, rows.len(), fourth, ctx.tol * 10.0)
                .with_note("reversed sign convention"),
        );
    }
    Ok(out)
}

fn weight_list(ctx: &Ctx) -> Vec<super::scenario::WeightTriple> {
    if ctx.l.scenario.weights.is_empty() {
        vec![super::scenario::WeightTriple { lambda: 0.0, mu: 1.0, delta: None, expect: None }]
    } else {
        ctx.l.scenario.weights.clone()
    }
}

fn test_densities(ctx: &Ctx, weight: f64) -> Vec<DensityField> {
    let mut v = density_test_basis(ctx.l.dim(), weight);
    v.extend(ctx.l.densities.values().map(|d| DensityField::new(d.scalar.clone(), weight)));
    v
}

fn quantization_rescaling(ctx: &Ctx) -> Result<Vec<CheckRecord>> {
    const SUITE: &str = "quantization-rescaling";
    const ANCHOR: &str = "the quantization map depends only on the conformal class of the metric";
    let l = ctx.l;
    if !l.model.is_riemannian() || l.model.riemannian_metric().is_none() {
        return Ok(vec![CheckRecord::not_applicable(SUITE, ANCHOR, ctx.tol, "needs an explicit riemannian metric")]);
    }
    if let Err(na) = symbols_or_na(ctx, SUITE, ANCHOR) {
        return Ok(vec![na]);
    }
    let metric = MetricField::from_model(&l.model)?;
    let rescaled = metric.clone().conformal(l.sigma()?);
    let mut out = Vec::new();
    for w in weight_list(ctx) {
        for (pname, p) in &l.symbols {
            let label = format!("lambda={} mu={} P={pname}", w.lambda, w.mu);
            let sym: Arc<dyn crate::quantization::SymbolJets> = Arc::new(p.with_weight(w.delta()));
            let (a, b) = match (quantize(&metric, w.lambda, w.mu, sym.clone()), quantize(&rescaled, w.lambda, w.mu, sym)) {
                (Ok(a), Ok(b)) => (a, b),
                (Err(e @ (FinjetError::ResonantWeight { .. } | FinjetError::Dimension(_))), _) => {
                    out.push(CheckRecord::not_applicable(SUITE, ANCHOR, ctx.tol, &e.to_string()).with_note(format!("{label}: {e}")));
                    continue;
                }
                (Err(e), _) | (_, Err(e)) => return Err(e),
            };
            let phis = test_densities(ctx, w.lambda);
            let r = max_over(&ctx.samples, |pt| {
                let mut m: f64 = 0.0;
                for phi in &phis {
                    m = m.max((a.apply(phi, &pt.x)? - b.apply(phi, &pt.x)?).abs());
                }
                Ok(m)
            })?;
            out.push(CheckRecord::new(SUITE, label, ANCHOR, ctx.samples.len(), r, ctx.tol));
        }
    }
    Ok(out)
}

fn kin_formula(ctx: &Ctx) -> Result<Vec<CheckRecord>> {
    const SUITE: &str = "kin-formula";
    const ANCHOR: &str = "at (λ, μ) = (0, 1) the restricted operator is P∂∂φ + (∂_iP^ij − P^sj ∂_{y^i}N^i_s)∂_jφ";
    let l = ctx.l;
    if let Err(na) = symbols_or_na(ctx, SUITE, ANCHOR) {
        return Ok(vec![na]);
    }
    let phis = test_densities(ctx, 0.0);
    let riem = MetricField::from_model(&l.model).ok();
    let mut out = Vec::new();
    for (pname, p) in &l.symbols {
        let p2: SymbolField = p.with_weight(2.0);
        let rq = RestrictedQuantization::new(&l.model, 0.0, 1.0, &p2)?;
        let kin = max_over(&ctx.samples, |pt| {
            let q = rq.eval_many(&phis, pt)?;
            let mut m: f64 = 0.0;
            for (phi, v) in phis.iter().zip(q) {
                m = m.max((v - kinetic_formula(&l.model, &p2, &phi.scalar, pt)?).abs());
            }
            Ok(m)
        })?;
        out.push(CheckRecord::new(SUITE, format!("kinetic formula P={pname}"), ANCHOR, ctx.samples.len(), kin, ctx.tol));
        if let Some(metric) = &riem {
            let r = max_over(&ctx.samples, |pt| {
                let q = rq.eval_many(&phis, pt)?;
                let mut m: f64 = 0.0;
                for (phi, v) in phis.iter().zip(q) {
                    m = m.max((v - q01_descended(metric, &p2, &phi.scalar, &pt.x)?).abs());
                }
                Ok(m)
            })?;
            out.push(CheckRecord::new(
                SUITE,
                format!("descended operator P={pname}"),
                "on Riemannian models the (0, 1) operator descends to P^ij∇_i∇_j + ∇_iP^ij∇_j",
                ctx.samples.len(),
                r,
                ctx.tol,
            ));
        }
    }
    Ok(out)
}

fn descent(ctx: &Ctx) -> Result<Vec<CheckRecord>> {
    const SUITE: &str = "descent";
    const ANCHOR: &str = "the restricted operator descends to the base only for Riemannian models at (λ, μ) = (0, 1)";
    let l = ctx.l;
    if let Err(na) = symbols_or_na(ctx, SUITE, ANCHOR) {
        return Ok(vec![na]);
    }
    let n = l.dim();
    let count = l.scenario.params.fiber_samples.max(2);
    // fiber directions come from their own stream so other suites are unaffected
    let mut rng = SplitMix64::new(ctx.seed ^ 0xD1B5_4A32_D192_ED03);
    let shell = l.scenario.samples.y_shell;
    let fibers: Vec<Vec<Vec<f64>>> = ctx
        .samples
        .iter()
        .map(|_| {
            (0..count)
                .map(|_| {
                    let r = rng.uniform(shell[0], shell[1]);
                    rng.direction(n).into_iter().map(|v| v * r).collect()
                })
                .collect()
        })
        .collect();
    let mut out = Vec::new();
    for w in weight_list(ctx) {
        let expect_descends = match w.expect.as_deref() {
            Some(e) => e == "descends",
            None => l.model.is_riemannian() && w.lambda == 0.0 && w.mu == 1.0,
        };
        for (pname, p) in &l.symbols {
            let p2 = p.with_weight(2.0 * w.delta());
            let reports = ctx
                .samples
                .par_iter()
                .zip(&fibers)
                .map(|(pt, ys)| descent_probe(&l.model, w.lambda, w.mu, &p2, &pt.x, ys))
                .collect::<Result<Vec<_>>>()?;
            let label = format!("lambda={} mu={} P={pname}", w.lambda, w.mu);
            let count = reports.len();
            let verdicts: Vec<DescentVerdict> = reports.iter().map(|r| r.verdict).collect();
            let summary = format!(
                "base weight {}, bundle weight {}, 1 - beta1 = {}, flat omega coefficient {}, verdicts {:?}",
                2.0 * w.lambda,
                w.lambda,
                reports.first().map_or(f64::NAN, |r| r.one_minus_beta1),
                reports.first().map_or(f64::NAN, |r| r.omega_coefficient),
                verdicts
            );
            let rec = if expect_descends {
                let r = reports.iter().map(|r| r.variation / r.scale).fold(0.0, f64::max);
                CheckRecord::new(SUITE, format!("descends {label}"), ANCHOR, count, r, DESCENDS_BELOW.min(ctx.tol))
            } else {
                // smallest ratio scale/variation: the most clearly obstructed point
                let r = reports.iter().map(|r| r.scale / r.variation).fold(f64::INFINITY, f64::min);
                CheckRecord::new(SUITE, format!("obstructed {label}"), ANCHOR, count, r, 1.0 / OBSTRUCTED_ABOVE)
            };
            out.push(rec.with_note(summary));
        }
    }
    Ok(out)
}
