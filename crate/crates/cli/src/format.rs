//! JSON file formats, all tagged with `"format": "adelic-baker/1"`.

use std::fmt;

use adelic_baker_core::baker::{BoundBranch, BoundInstance, BoundKind, ParamProperties, ParamSet, TheoremBound};
use adelic_baker_core::field::parse_rational;
use adelic_baker_core::heights::HeightReport;
use adelic_baker_core::linalg::Matrix;
use adelic_baker_core::linform::{HypothesisStatus, LambdaValue, LinFormInstance, USpec, VerificationReport};
use adelic_baker_core::places::find_place;
use adelic_baker_core::{AdelicBundle, Error, FieldElement, LogReal, LogScaleReal, NumberField, PrecisionContext};
use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

pub const FORMAT: &str = "adelic-baker/1";

/// Input problems, reported with exit code 2.
#[derive(Debug)]
pub struct InputError(pub String);

impl fmt::Display for InputError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for InputError {}

impl From<Error> for InputError {
    fn from(e: Error) -> Self {
        InputError(e.to_string())
    }
}

impl From<serde_json::Error> for InputError {
    fn from(e: serde_json::Error) -> Self {
        InputError(format!("malformed JSON: {e}"))
    }
}

fn check_format(f: &Option<String>) -> Result<(), InputError> {
    match f.as_deref() {
        None | Some(FORMAT) => Ok(()),
        Some(other) => Err(InputError(format!("unsupported format '{other}', expected '{FORMAT}'"))),
    }
}

/// Accepts JSON numbers as well as strings for rational entries.
#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(untagged)]
pub enum Scalar {
    Int(i64),
    Text(String),
}

impl Scalar {
    pub fn text(&self) -> String {
        match self {
            Scalar::Int(v) => v.to_string(),
            Scalar::Text(s) => s.clone(),
        }
    }

    pub fn rational(&self) -> Result<BigRational, InputError> {
        Ok(parse_rational(&self.text())?)
    }

    pub fn element(&self, k: &NumberField) -> Result<FieldElement, InputError> {
        Ok(k.parse_element(&self.text())?)
    }
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum USpecFile {
    Arch { branches: Vec<i64> },
    Padic { p: u64 },
}

#[derive(Clone, Debug, Deserialize, Serialize)]
pub struct InstanceFile {
    #[serde(default)]
    pub format: Option<String>,
    pub field: String,
    pub alpha: Vec<Scalar>,
    pub u: USpecFile,
    pub beta: Vec<Vec<Scalar>>,
    pub v0: String,
    #[serde(default)]
    pub declared_s: Option<usize>,
    /// One-based indices.
    #[serde(default, rename = "declared_I")]
    pub declared_i: Option<Vec<usize>>,
    #[serde(default)]
    pub kind: Option<String>,
}

impl InstanceFile {
    pub fn parse(text: &str) -> Result<InstanceFile, InputError> {
        let f: InstanceFile = serde_json::from_str(text)?;
        check_format(&f.format)?;
        Ok(f)
    }

    pub fn kind(&self) -> Result<Option<BoundKind>, InputError> {
        self.kind
            .as_deref()
            .map(|s| BoundKind::parse(s).ok_or_else(|| InputError(format!("unknown bound kind '{s}'"))))
            .transpose()
    }

    pub fn build(&self, ctx: &PrecisionContext) -> Result<LinFormInstance, InputError> {
        let k = NumberField::parse(&self.field)?;
        let alpha = self
            .alpha
            .iter()
            .map(|a| a.element(&k))
            .collect::<Result<Vec<_>, _>>()?;
        let beta = self
            .beta
            .iter()
            .map(|r| r.iter().map(|b| b.element(&k)).collect::<Result<Vec<_>, _>>())
            .collect::<Result<Vec<_>, _>>()?;
        let v0 = find_place(&k, &self.v0, ctx)?;
        let u = match &self.u {
            USpecFile::Arch { branches } => USpec::Arch {
                branches: branches.clone(),
            },
            USpecFile::Padic { p } => {
                if v0.prime() != Some(*p) {
                    return Err(InputError(format!("u.p = {p} does not match v0 = {}", self.v0)));
                }
                USpec::Padic
            }
        };
        let mut inst = LinFormInstance::new(k, alpha, u, beta, v0, ctx)?;
        inst.declared_s = self.declared_s;
        if let Some(i) = &self.declared_i {
            if i.iter().any(|&j| j == 0 || j > inst.n()) {
                return Err(InputError("declared_I entries must lie in 1..=n".into()));
            }
            inst.declared_i = Some(i.iter().map(|j| j - 1).collect());
        }
        Ok(inst)
    }
}

/// A log-magnitude term list such as `"1/2"`, `"log(2)"`, `"3/4*log(5) + 1"`.
pub fn parse_log_real(s: &str, prec: u32) -> Result<LogReal, InputError> {
    let mut acc = LogReal::zero(prec);
    for term in s.split('+') {
        let t = term.trim();
        if let Some(pos) = t.find("log(") {
            let coeff = t[..pos].trim().trim_end_matches('*').trim();
            let c = if coeff.is_empty() {
                BigRational::one()
            } else {
                parse_rational(coeff)?
            };
            let inner = t[pos + 4..]
                .strip_suffix(')')
                .ok_or_else(|| InputError(format!("unbalanced log term '{t}'")))?;
            let q = parse_rational(inner)?;
            if q <= BigRational::zero() {
                return Err(InputError(format!("log of a nonpositive number in '{t}'")));
            }
            acc = acc.add(&LogReal::log_rational(&q, prec).scale(&c));
        } else {
            acc = acc.add(&LogReal::from_rational(&parse_rational(t)?, prec));
        }
    }
    Ok(acc)
}

#[derive(Clone, Debug, Deserialize, Serialize)]
pub struct BoundInstanceFile {
    #[serde(default)]
    pub format: Option<String>,
    pub n: usize,
    pub t: usize,
    pub d: u64,
    /// `"arch"` or a prime such as `"5"`.
    pub place: String,
    /// Defaults to `1` (the frak-e parameter equal to `e`) at archimedean places.
    #[serde(default)]
    pub log_e: Option<String>,
    pub log_a: Vec<String>,
    pub log_b: String,
    #[serde(default)]
    pub s: Option<usize>,
    /// One-based indices.
    #[serde(default, rename = "I")]
    pub i_set: Option<Vec<usize>>,
    #[serde(default)]
    pub beta10_nonzero: bool,
    #[serde(default)]
    pub kind: Option<String>,
}

impl BoundInstanceFile {
    pub fn parse(text: &str) -> Result<BoundInstanceFile, InputError> {
        let f: BoundInstanceFile = serde_json::from_str(text)?;
        check_format(&f.format)?;
        Ok(f)
    }

    pub fn build(&self, prec: u32) -> Result<BoundInstance, InputError> {
        let log_a = self
            .log_a
            .iter()
            .map(|s| parse_log_real(s, prec))
            .collect::<Result<Vec<_>, _>>()?;
        let log_b = parse_log_real(&self.log_b, prec)?;
        let mut inst = if self.place == "arch" || self.place == "inf" {
            let mut b = BoundInstance::archimedean(self.n, self.t, self.d, log_a, log_b);
            if let Some(e) = &self.log_e {
                b.log_e = parse_log_real(e, prec)?;
            }
            b
        } else {
            let p: u64 = self
                .place
                .trim_start_matches('p')
                .parse()
                .map_err(|_| InputError(format!("place must be 'arch' or a prime, got '{}'", self.place)))?;
            let e = self
                .log_e
                .as_deref()
                .ok_or_else(|| InputError("log_e is required at a finite place".into()))?;
            BoundInstance::ultrametric(self.n, self.t, self.d, p, parse_log_real(e, prec)?, log_a, log_b)
        };
        if let Some(s) = self.s {
            inst.s = s;
        }
        if let Some(i) = &self.i_set {
            if i.iter().any(|&j| j == 0) {
                return Err(InputError("I uses one-based indices".into()));
            }
            inst.i_set = i.iter().map(|j| j - 1).collect();
        }
        inst.beta10_nonzero = self.beta10_nonzero;
        inst.validate()?;
        Ok(inst)
    }
}

#[derive(Clone, Debug, Deserialize, Serialize)]
pub struct DeviationFile {
    pub place: String,
    pub matrix: Vec<Vec<Scalar>>,
}

#[derive(Clone, Debug, Deserialize, Serialize)]
pub struct BundleFile {
    #[serde(default)]
    pub format: Option<String>,
    pub field: String,
    pub dim: usize,
    #[serde(default)]
    pub deviations: Vec<DeviationFile>,
}

pub fn parse_matrix(k: &NumberField, rows: &[Vec<Scalar>]) -> Result<Matrix<FieldElement>, InputError> {
    rows.iter()
        .map(|r| r.iter().map(|x| x.element(k)).collect::<Result<Vec<_>, _>>())
        .collect()
}

impl BundleFile {
    pub fn parse(text: &str) -> Result<BundleFile, InputError> {
        let f: BundleFile = serde_json::from_str(text)?;
        check_format(&f.format)?;
        Ok(f)
    }

    pub fn from_value(v: &Value) -> Result<BundleFile, InputError> {
        let f: BundleFile = serde_json::from_value(v.clone())?;
        check_format(&f.format)?;
        Ok(f)
    }

    pub fn build(&self, ctx: &PrecisionContext) -> Result<AdelicBundle, InputError> {
        let k = NumberField::parse(&self.field)?;
        let mut b = AdelicBundle::standard(k.clone(), self.dim);
        for dev in &self.deviations {
            let v = find_place(&k, &dev.place, ctx)?;
            b = b.with_matrix(v, parse_matrix(&k, &dev.matrix)?)?;
        }
        Ok(b)
    }
}

pub fn bundle_to_json(b: &AdelicBundle) -> Value {
    let k = b.field();
    let devs: Vec<Value> = b
        .deviations()
        .iter()
        .filter_map(|(v, spec)| {
            spec.square_matrix(k).map(|m| {
                json!({
                    "place": v.label(),
                    "matrix": m.iter().map(|r| r.iter().map(|x| k.format_element(x)).collect::<Vec<_>>()).collect::<Vec<_>>(),
                })
            })
        })
        .collect();
    json!({"format": FORMAT, "field": k.format_poly(), "dim": b.dim(), "deviations": devs})
}

pub fn log_scale_json(x: &LogScaleReal) -> Value {
    json!({
        "sign": x.sign(),
        "log_magnitude": x.log_magnitude().to_string(),
        "decimal": x.to_scientific(6),
    })
}

pub fn branch_name(b: BoundBranch) -> &'static str {
    match b {
        BoundBranch::Main => "main",
        BoundBranch::PrimeTerm => "prime",
    }
}

pub fn bound_json(b: &TheoremBound) -> Value {
    json!({
        "format": FORMAT,
        "kind": b.kind.name(),
        "sign": b.value.sign(),
        "log_magnitude": b.value.log_magnitude().to_string(),
        "log_magnitude_decimal": format!("{:.15e}", b.value.log_magnitude().to_f64()),
        "exponent_log": b.exponent_log.to_string(),
        "factor_log": b.factor_log.to_string(),
        "branch": branch_name(b.branch),
        "frak_a": b.frak_a,
        "refined": b.refined,
    })
}

pub fn params_json(ps: &ParamSet, props: &ParamProperties) -> Value {
    json!({
        "format": FORMAT,
        "C0": ps.c0.to_string(),
        "log_C0": ps.log_c0.to_string(),
        "y": ps.y,
        "frak_a": ps.frak_a,
        "S0": log_scale_json(&ps.s0),
        "S": log_scale_json(&ps.s),
        "U_minus1": log_scale_json(&ps.u_minus1),
        "U0": log_scale_json(&ps.u0),
        "U0_prime_branch": ps.u0_prime_branch,
        "T_tilde0": log_scale_json(&ps.t_tilde0),
        "T_tilde": log_scale_json(&ps.t_tilde),
        "D_tilde": ps.d_tilde.iter().map(log_scale_json).collect::<Vec<_>>(),
        "x0": log_scale_json(&ps.x0),
        "properties": {
            "i": props.i, "ii": props.ii, "iii": props.iii, "iv": props.iv, "x_le_one": props.x_le_one,
        },
    })
}

pub fn lambda_string(v: &LambdaValue) -> String {
    match v {
        LambdaValue::Arch(b) => b.to_string(),
        LambdaValue::Padic {
            p,
            valuation: Some(e),
            ..
        } => format!("{p}^{}", -e),
        LambdaValue::Padic {
            p,
            valuation: None,
            precision,
        } => format!("<= {p}^{}", -precision),
    }
}

pub fn hypothesis_name(s: HypothesisStatus) -> &'static str {
    match s {
        HypothesisStatus::Certified => "certified",
        HypothesisStatus::Assumed => "assumed",
    }
}

pub fn report_json(r: &VerificationReport) -> Value {
    json!({
        "format": FORMAT,
        "lambda_abs": r.lambda_abs.iter().map(lambda_string).collect::<Vec<_>>(),
        "max_log_lambda": r.max_log_lambda.to_string(),
        "bound": {
            "kind": r.bound.kind.name(),
            "sign": r.bound.value.sign(),
            "log_magnitude": r.bound.value.log_magnitude().to_string(),
            "branch": branch_name(r.bound.branch),
        },
        "margin_log": log_scale_json(&r.margin),
        "pass": r.pass,
        "hypothesis_status": hypothesis_name(r.hypothesis.status),
        "s": r.hypothesis.s,
        "I": r.hypothesis.i_set.iter().map(|i| i + 1).collect::<Vec<_>>(),
        "squared_domain": r.squared_domain,
    })
}

pub fn height_json(k: &NumberField, h: &HeightReport) -> Value {
    let mut places: Vec<Value> = h
        .per_place
        .iter()
        .map(|c| {
            json!({
                "p_or_inf": c.place.prime().map_or_else(|| "inf".to_string(), |p| p.to_string()),
                "place": c.place.label(),
                "n_v": c.n_v,
                "contribution": c.value.to_string(),
            })
        })
        .collect();
    for (p, l) in &h.ramified {
        places.push(json!({
            "p_or_inf": p.to_string(),
            "place": format!("above {p}"),
            "n_v": k.degree(),
            "contribution": l.to_string(),
        }));
    }
    json!({"format": FORMAT, "value": h.value.to_string(), "places": places})
}

/// Input of the `siegel` subcommand. Which fields are needed depends on the kind.
#[derive(Clone, Debug, Deserialize, Serialize)]
pub struct SiegelFile {
    #[serde(default)]
    pub format: Option<String>,
    /// Rows of the system `a x = 0` (classical) or `|a x| <= eps` (approx).
    #[serde(default)]
    pub matrix: Option<Vec<Vec<Scalar>>>,
    /// Number of unknowns; defaults to the row length.
    #[serde(default)]
    pub nu: Option<usize>,
    #[serde(default, rename = "H")]
    pub h: Option<u64>,
    #[serde(default)]
    pub eps: Option<Scalar>,
    #[serde(default)]
    pub bundle: Option<BundleFile>,
    /// `log rd_k` in the `parse_log_real` syntax, for fields without a built-in value.
    #[serde(default)]
    pub log_rd: Option<String>,
    /// Twist `(v0, alpha, a)` for the approximate absolute bound.
    #[serde(default)]
    pub twist: Option<TwistFile>,
    #[serde(default)]
    pub radius: Option<u64>,
    #[serde(default)]
    pub budget: Option<u64>,
}

#[derive(Clone, Debug, Deserialize, Serialize)]
pub struct TwistFile {
    pub v0: String,
    pub alpha: Scalar,
    pub matrix: Vec<Vec<Scalar>>,
}

impl SiegelFile {
    pub fn parse(text: &str) -> Result<SiegelFile, InputError> {
        let f: SiegelFile = serde_json::from_str(text)?;
        check_format(&f.format)?;
        if let Some(b) = &f.bundle {
            check_format(&b.format)?;
        }
        Ok(f)
    }

    pub fn rows(&self) -> Result<&[Vec<Scalar>], InputError> {
        let m = self.matrix.as_deref().ok_or_else(|| InputError("'matrix' is required".into()))?;
        let width = m.first().map_or(0, |r| r.len());
        if m.is_empty() || width == 0 || m.iter().any(|r| r.len() != width) {
            return Err(InputError("'matrix' must be a nonempty rectangular array".into()));
        }
        Ok(m)
    }

    pub fn unknowns(&self) -> Result<usize, InputError> {
        let width = self.rows()?[0].len();
        match self.nu {
            Some(n) if n != width => Err(InputError(format!("nu = {n} but rows have length {width}"))),
            _ => Ok(width),
        }
    }
}

/// Integer matrix entries for the classical Siegel search.
pub fn integer_matrix(rows: &[Vec<Scalar>]) -> Result<Matrix<BigInt>, InputError> {
    rows.iter()
        .map(|r| {
            r.iter()
                .map(|x| {
                    let q = x.rational()?;
                    if !q.is_integer() {
                        return Err(InputError(format!("entry {} is not an integer", x.text())));
                    }
                    Ok(q.to_integer())
                })
                .collect::<Result<Vec<_>, _>>()
        })
        .collect()
}

pub fn biguint_string(v: &BigUint) -> String {
    v.to_string()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn log_terms() {
        let l = parse_log_real("1/2*log(4) + 1", 128).unwrap();
        assert!((l.to_f64() - (2f64.ln() + 1.0)).abs() < 1e-15);
        assert!(parse_log_real("log(0)", 128).is_err());
        assert!(parse_log_real("log(2", 128).is_err());
    }

    #[test]
    fn instance_round_trip() {
        let text = r#"{"format":"adelic-baker/1","field":"x","alpha":["2"],
            "u":{"kind":"arch","branches":[0]},"beta":[["0","1"]],"v0":"inf","kind":"principal"}"#;
        let f = InstanceFile::parse(text).unwrap();
        assert_eq!(f.kind().unwrap(), Some(BoundKind::Principal));
        let inst = f.build(&PrecisionContext::default()).unwrap();
        assert_eq!(inst.n(), 1);
        let back: InstanceFile = serde_json::from_str(&serde_json::to_string(&f).unwrap()).unwrap();
        assert_eq!(back.v0, "inf");
    }

    #[test]
    fn rejects_other_formats() {
        let text = r#"{"format":"other/2","field":"x","dim":1}"#;
        assert!(BundleFile::parse(text).is_err());
    }

    #[test]
    fn padic_prime_must_match() {
        let text = r#"{"field":"x","alpha":["6"],"u":{"kind":"padic","p":7},"beta":[["0","1"]],"v0":"5"}"#;
        assert!(InstanceFile::parse(text).unwrap().build(&PrecisionContext::default()).is_err());
    }
}
