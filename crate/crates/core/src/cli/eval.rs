//! Point evaluation of single quantities.

use crate::connections::{berwald_coeffs, cartan_coeffs, chern_coeffs, landsberg_tensor};
use crate::error::{FinjetError, Result};
use crate::finsler::{cartan_tensor, fundamental_tensor, hilbert_form, nonlinear_connection, PointOnSlit};
use crate::quantization::{beta_constants, sasaki_metric};
use crate::tensor::Tensor;

use super::scenario::Loaded;

pub const QUANTITIES: [&str; 11] = ["F", "g", "A", "omega", "N", "chern", "berwald", "cartan", "landsberg", "sasaki", "betas"];

/// Parses `x=0.1,0.2;y=1,0`.
pub fn parse_point(text: &str) -> Result<PointOnSlit> {
    let mut x = None;
    let mut y = None;
    for part in text.split(';').map(str::trim).filter(|p| !p.is_empty()) {
        let (key, vals) = part
            .split_once('=')
            .ok_or_else(|| FinjetError::Config(format!("point part `{part}` lacks `=`")))?;
        let vals = vals
            .split(',')
            .map(|v| v.trim().parse::<f64>().map_err(|e| FinjetError::Config(format!("`{v}`: {e}"))))
            .collect::<Result<Vec<_>>>()?;
        match key.trim() {
            "x" => x = Some(vals),
            "y" => y = Some(vals),
            other => return Err(FinjetError::Config(format!("unknown point key `{other}`"))),
        }
    }
    match (x, y) {
        (Some(x), Some(y)) if x.len() == y.len() => PointOnSlit::new(x, y),
        (Some(_), Some(_)) => Err(FinjetError::Config("x and y have different lengths".into())),
        _ => Err(FinjetError::Config("point needs both x and y".into())),
    }
}

/// `%.17g`: 17 significant digits, trailing zeros dropped.
pub fn format_g17(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    if !v.is_finite() {
        return format!("{v}");
    }
    let sci = format!("{v:.16e}");
    let (mant, exp) = sci.split_once('e').expect("scientific format has an exponent");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..17).contains(&exp) {
        let decimals = (16 - exp).max(0) as usize;
        let s = format!("{v:.decimals$}");
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s
        }
    } else {
        let mant = if mant.contains('.') { mant.trim_end_matches('0').trim_end_matches('.') } else { mant };
        format!("{mant}e{}{:02}", if exp < 0 { '-' } else { '+' }, exp.abs())
    }
}

fn rows_of(t: &Tensor) -> Vec<Vec<f64>> {
    let n = t.n();
    if t.rank() == 0 {
        return vec![t.data().to_vec()];
    }
    t.data().chunks(n).map(<[f64]>::to_vec).collect()
}

fn matrix_rows(m: &nalgebra::DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows()).map(|i| m.row(i).iter().copied().collect()).collect()
}

/// The requested quantity as rows of numbers, in row-major order. Rank-3
/// tensors print one row per pair of leading indices.
pub fn eval_quantity(l: &Loaded, point: Option<&PointOnSlit>, quantity: &str) -> Result<Vec<Vec<f64>>> {
    if quantity == "betas" {
        let w = l.scenario.weights.first().map_or((0.0, 1.0), |w| (w.lambda, w.mu));
        return Ok(vec![beta_constants(l.dim(), w.0, w.1)?.beta.to_vec()]);
    }
    if !QUANTITIES.contains(&quantity) {
        return Err(FinjetError::Config(format!("unknown quantity `{quantity}`; known: {}", QUANTITIES.join(", "))));
    }
    let pt = point.ok_or_else(|| FinjetError::Config(format!("quantity `{quantity}` needs --point")))?;
    let model = &l.model;
    if pt.dim() != model.dim() {
        return Err(FinjetError::Dimension(format!("point has dimension {}, model {}", pt.dim(), model.dim())));
    }
    Ok(match quantity {
        "F" => vec![vec![model.f_value(&pt.x, &pt.y)?]],
        "g" => matrix_rows(&fundamental_tensor(model, pt)?),
        "A" => rows_of(&cartan_tensor(model, pt)?),
        "omega" => vec![hilbert_form(model, pt)?],
        "N" => matrix_rows(&nonlinear_connection(model, pt)?),
        "chern" => rows_of(&chern_coeffs(model, pt)?.horizontal),
        "berwald" => rows_of(&berwald_coeffs(model, pt)?.horizontal),
        "cartan" => rows_of(&cartan_coeffs(model, pt)?.horizontal),
        "landsberg" => rows_of(&landsberg_tensor(model, pt)?),
        "sasaki" => matrix_rows(&sasaki_metric(model).jets(&pt.coords(), 0)?.values()),
        _ => unreachable!("checked above"),
    })
}

pub fn format_rows(rows: &[Vec<f64>]) -> String {
    let mut s = String::new();
    for r in rows {
        s.push_str(&r.iter().map(|v| format_g17(*v)).collect::<Vec<_>>().join(" "));
        s.push('\n');
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cli::scenario::load_str;

    #[test]
    fn g17_matches_printf() {
        assert_eq!(format_g17(1.0), "1");
        assert_eq!(format_g17(-0.0), "0");
        assert_eq!(format_g17(0.1), "0.10000000000000001");
        assert_eq!(format_g17(1.0 / 3.0), "0.33333333333333331");
        assert_eq!(format_g17(1e20), "1e+20");
        assert_eq!(format_g17(1.5e-7), "1.4999999999999999e-07");
        assert_eq!(format_g17(123456.0), "123456");
        assert_eq!(format_g17(-2.5), "-2.5");
    }

    #[test]
    fn g17_round_trips() {
        for v in [std::f64::consts::PI, 1e-300, 6.02214076e23, -7.0 / 9.0] {
            assert_eq!(format_g17(v).parse::<f64>().unwrap(), v);
        }
    }

    #[test]
    fn point_syntax() {
        let p = parse_point("x=0.1, 0.2; y=1,0").unwrap();
        assert_eq!(p.x, vec![0.1, 0.2]);
        assert_eq!(p.y, vec![1.0, 0.0]);
        for bad in ["x=1", "x=1;y=1,2", "x=a;y=1", "z=1;x=1;y=1"] {
            assert_eq!(parse_point(bad).unwrap_err().exit_code(), 2, "{bad}");
        }
    }

    fn euclid(n: usize) -> Loaded {
        let rows: Vec<Vec<String>> =
            (0..n).map(|i| (0..n).map(|j| if i == j { "1".into() } else { "0".into() }).collect()).collect();
        let text = serde_json::json!({
            "model": {"kind": "riemannian", "dim": n, "metric": rows},
            "weights": [{"lambda": 0.0, "mu": 1.0}]
        });
        load_str(&text.to_string()).unwrap()
    }

    #[test]
    fn euclidean_quantities() {
        let l = euclid(2);
        let pt = parse_point("x=0.3,-0.2;y=1,0").unwrap();
        assert_eq!(format_rows(&eval_quantity(&l, Some(&pt), "g").unwrap()), "1 0\n0 1\n");
        assert_eq!(
            format_rows(&eval_quantity(&l, Some(&pt), "sasaki").unwrap()),
            "1 0 0 0\n0 1 0 0\n0 0 1 0\n0 0 0 1\n"
        );
        assert_eq!(eval_quantity(&l, Some(&pt), "chern").unwrap().len(), 4);
    }

    #[test]
    fn betas_at_the_kinetic_pair() {
        assert_eq!(format_rows(&eval_quantity(&euclid(3), None, "betas").unwrap()), "1 0 0 0 0 0\n");
    }

    #[test]
    fn errors_map_to_exit_codes() {
        let l = euclid(2);
        assert_eq!(eval_quantity(&l, None, "g").unwrap_err().exit_code(), 2);
        assert_eq!(eval_quantity(&l, None, "nope").unwrap_err().exit_code(), 2);
        let pt = parse_point("x=0;y=1").unwrap();
        assert_eq!(eval_quantity(&l, Some(&pt), "g").unwrap_err().exit_code(), 2);
    }
}
