use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::determining::{EvolutionEq, Family, SymOperator};
use crate::error::{Error, Result};
use crate::expr::{parse, Expr};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub x0: f64,
    pub x1: f64,
    pub nx: usize,
    pub t0: f64,
    pub dt: f64,
    pub steps: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct OperatorFile {
    tau: String,
    xi: String,
    eta: String,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct InstanceFile {
    family: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    p: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    m: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    k: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    n: Option<f64>,
    lambda: f64,
    #[serde(rename = "F")]
    source: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    operator: Option<OperatorFile>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    grid: Option<GridSpec>,
    #[serde(default)]
    seed: u64,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    params: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    epsilon: Option<f64>,
}

/// An equation of the power or exponential family with every parameter fixed.
#[derive(Clone, Debug)]
pub struct Instance {
    pub family: Family,
    /// `p`, `k` (power) or `n` (exponential), `lambda` and any extra symbols.
    pub params: BTreeMap<String, f64>,
    pub source: Expr,
    /// Closed forms for named functions, used by [`super::eval_expr`].
    pub functions: BTreeMap<String, Expr>,
    pub operator: Option<SymOperator>,
    pub grid: Option<GridSpec>,
    pub seed: u64,
    pub epsilon: Option<f64>,
}

const EPS: f64 = 1e-12;

impl Instance {
    pub fn power(p: f64, k: f64, lambda: f64, source: Expr) -> Result<Self> {
        Self::build(
            Family::Power,
            [("p", p), ("k", k), ("lambda", lambda)],
            source,
        )
    }

    pub fn exponential(n: f64, lambda: f64, source: Expr) -> Result<Self> {
        Self::build(Family::Exponential, [("n", n), ("lambda", lambda)], source)
    }

    fn build<const N: usize>(family: Family, ps: [(&str, f64); N], source: Expr) -> Result<Self> {
        let inst = Instance {
            family,
            params: ps.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
            source,
            functions: BTreeMap::new(),
            operator: None,
            grid: None,
            seed: 0,
            epsilon: None,
        };
        inst.validate()?;
        Ok(inst)
    }

    pub fn with_param(mut self, name: &str, value: f64) -> Self {
        self.params.insert(name.to_string(), value);
        self
    }

    pub fn with_function(mut self, name: &str, value: Expr) -> Self {
        self.functions.insert(name.to_string(), value);
        self
    }

    pub fn with_operator(mut self, op: SymOperator) -> Self {
        self.operator = Some(op);
        self
    }

    pub fn param(&self, name: &str) -> f64 {
        self.params.get(name).copied().unwrap_or(0.0)
    }

    /// Checks the family's exclusions numerically. `k = p + 1` is allowed:
    /// it only matters for the classification, not for evaluation.
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::Invalid(msg.to_string()));
        let lambda = self.param("lambda");
        if !lambda.is_finite() || lambda.abs() < EPS {
            return bad("lambda must be nonzero");
        }
        match self.family {
            Family::Power => {
                let (p, k) = (self.param("p"), self.param("k"));
                if (p + 1.0).abs() < EPS {
                    return bad("p = -1 is excluded");
                }
                if k.abs() < EPS {
                    return bad("k = 0 is excluded");
                }
                if (k - p).abs() < EPS {
                    return bad("k = p is excluded");
                }
            }
            Family::Exponential => {
                let n = self.param("n");
                if n.abs() < EPS || (n + 1.0).abs() < EPS {
                    return bad("n must avoid 0 and -1");
                }
            }
            Family::Concrete => return bad("instances use the power or exponential family"),
        }
        if self.params.values().any(|v| !v.is_finite()) {
            return bad("parameters must be finite");
        }
        Ok(())
    }

    pub fn equation(&self) -> EvolutionEq {
        let base = match self.family {
            Family::Exponential => EvolutionEq::exponential(),
            _ => EvolutionEq::power(),
        };
        base.with_source(self.source.clone())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let f: InstanceFile =
            serde_json::from_str(text).map_err(|e| Error::Invalid(e.to_string()))?;
        let family: Family = f.family.parse()?;
        let mut params = f.params.clone();
        params.insert("lambda".into(), f.lambda);
        match family {
            Family::Power => {
                let p = match (f.p, f.m) {
                    (Some(p), None) => p,
                    (None, Some(m)) if (m + 1.0).abs() > EPS => -m / (m + 1.0),
                    (None, Some(_)) => {
                        return Err(Error::Invalid("m = -1 belongs to the exp family".into()))
                    }
                    _ => return Err(Error::Invalid("give exactly one of p, m".into())),
                };
                let k = f.k.ok_or_else(|| Error::Invalid("missing k".into()))?;
                params.insert("p".into(), p);
                params.insert("k".into(), k);
            }
            Family::Exponential => {
                let n = f.n.ok_or_else(|| Error::Invalid("missing n".into()))?;
                params.insert("n".into(), n);
            }
            Family::Concrete => {
                return Err(Error::Invalid(
                    "instances use the power or exponential family".into(),
                ))
            }
        }
        let operator = f
            .operator
            .map(|o| SymOperator::parse(&o.tau, &o.xi, &o.eta))
            .transpose()?;
        let inst = Instance {
            family,
            params,
            source: parse(&f.source)?,
            functions: BTreeMap::new(),
            operator,
            grid: f.grid,
            seed: f.seed,
            epsilon: f.epsilon,
        };
        inst.validate()?;
        Ok(inst)
    }

    pub fn to_json(&self) -> serde_json::Value {
        let mut params = self.params.clone();
        let take = |ps: &mut BTreeMap<String, f64>, k: &str| ps.remove(k);
        let lambda = take(&mut params, "lambda").unwrap_or(0.0);
        let (p, k, n) = (
            take(&mut params, "p"),
            take(&mut params, "k"),
            take(&mut params, "n"),
        );
        let file = InstanceFile {
            family: self.family.as_str().to_string(),
            p,
            m: None,
            k,
            n,
            lambda,
            source: self.source.to_string(),
            operator: self.operator.as_ref().map(|o| OperatorFile {
                tau: o.tau.to_string(),
                xi: o.xi.to_string(),
                eta: o.eta.to_string(),
            }),
            grid: self.grid.clone(),
            seed: self.seed,
            params,
            epsilon: self.epsilon,
        };
        serde_json::to_value(file).expect("instance serializes")
    }
}
