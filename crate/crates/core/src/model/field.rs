use std::sync::Arc;

use serde_json::Value;

use crate::error::{CoreError, Result};
use crate::model::expr::Expr;

/// Regularity class of a field: strong Carathéodory (continuous in the space
/// variables) or Lipschitz Carathéodory, with the integrability exponent of
/// its bounds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub struct Regularity {
    pub class: RegularityClass,
    pub p: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum RegularityClass {
    SC,
    LC,
}

impl Default for Regularity {
    fn default() -> Self {
        Regularity {
            class: RegularityClass::LC,
            p: 1,
        }
    }
}

#[derive(Debug, Clone)]
enum FieldKind {
    Expr { components: Vec<Expr> },
    Translated { base: Arc<VectorField>, shift: f64 },
    Difference { left: Arc<VectorField>, right: Arc<VectorField> },
}

/// An evaluable vector field `f(t, x, u)` mapping `R x R^N x R^N -> R^N`,
/// with declared time breakpoints where it may be discontinuous in `t`.
/// Immutable after construction; translation and difference share their
/// operands behind `Arc`.
#[derive(Debug, Clone)]
pub struct VectorField {
    dim: usize,
    regularity: Regularity,
    breakpoints: Vec<f64>,
    kind: FieldKind,
}

fn sorted_dedup(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(|a, b| a.partial_cmp(b).expect("breakpoints must not be NaN"));
    v.dedup_by(|a, b| (*a - *b).abs() <= 1e-12);
    v
}

impl VectorField {
    /// Builds a field from component expressions. Piecewise cut times are
    /// folded into the breakpoint list automatically.
    pub fn new(
        dim: usize,
        components: Vec<Expr>,
        breakpoints: Vec<f64>,
        regularity: Regularity,
    ) -> Result<Self> {
        if dim == 0 {
            return Err(CoreError::InvalidField("state dimension must be positive".into()));
        }
        if components.len() != dim {
            return Err(CoreError::DimensionMismatch {
                expected: dim,
                got: components.len(),
            });
        }
        for c in &components {
            if c.contains_param() {
                return Err(CoreError::InvalidField(
                    "field still references the family parameter `n`".into(),
                ));
            }
            if let Some(i) = c.max_component() {
                if i >= dim {
                    return Err(CoreError::InvalidField(format!(
                        "component index {} exceeds dimension {dim}",
                        i + 1
                    )));
                }
            }
        }
        let mut bps = breakpoints;
        for c in &components {
            c.collect_cuts(&mut bps);
        }
        Ok(VectorField {
            dim,
            regularity,
            breakpoints: sorted_dedup(bps),
            kind: FieldKind::Expr { components },
        })
    }

    /// Scalar field (`N = 1`) shorthand.
    pub fn scalar(expr: Expr) -> Result<Self> {
        VectorField::new(1, vec![expr], Vec::new(), Regularity::default())
    }

    pub fn scalar_with(expr: Expr, breakpoints: Vec<f64>, regularity: Regularity) -> Result<Self> {
        VectorField::new(1, vec![expr], breakpoints, regularity)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn regularity(&self) -> Regularity {
        self.regularity
    }

    /// Times where the field may jump in `t`, sorted ascending.
    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    /// Evaluates `f(t, x, u)` into a fresh vector.
    pub fn eval(&self, t: f64, x: &[f64], u: &[f64]) -> Result<Vec<f64>> {
        let mut out = vec![0.0; self.dim];
        self.eval_into(t, x, u, &mut out)?;
        Ok(out)
    }

    /// Evaluates into `out`, avoiding the allocation in hot loops.
    pub fn eval_into(&self, t: f64, x: &[f64], u: &[f64], out: &mut [f64]) -> Result<()> {
        if x.len() != self.dim {
            return Err(CoreError::DimensionMismatch { expected: self.dim, got: x.len() });
        }
        if u.len() != self.dim {
            return Err(CoreError::DimensionMismatch { expected: self.dim, got: u.len() });
        }
        debug_assert_eq!(out.len(), self.dim);
        match &self.kind {
            FieldKind::Expr { components } => {
                for (o, c) in out.iter_mut().zip(components) {
                    *o = c.eval(t, x, u)?;
                }
                Ok(())
            }
            FieldKind::Translated { base, shift } => base.eval_into(t + shift, x, u, out),
            FieldKind::Difference { left, right } => {
                let mut rhs = vec![0.0; self.dim];
                left.eval_into(t, x, u, out)?;
                right.eval_into(t, x, u, &mut rhs)?;
                for (o, r) in out.iter_mut().zip(&rhs) {
                    *o -= r;
                }
                Ok(())
            }
        }
    }

    /// Euclidean norm of `f(t, x, u)`.
    pub fn eval_norm(&self, t: f64, x: &[f64], u: &[f64]) -> Result<f64> {
        let v = self.eval(t, x, u)?;
        Ok(v.iter().map(|c| c * c).sum::<f64>().sqrt())
    }

    /// The time translation `f_t`, evaluating as `f(s + t, x, u)`.
    /// Translating by 0 still wraps, which is harmless.
    pub fn translate(&self, t: f64) -> VectorField {
        VectorField {
            dim: self.dim,
            regularity: self.regularity,
            breakpoints: sorted_dedup(self.breakpoints.iter().map(|b| b - t).collect()),
            kind: FieldKind::Translated {
                base: Arc::new(self.clone()),
                shift: t,
            },
        }
    }

    /// Pointwise difference `f - g`; breakpoints are the union.
    pub fn difference(&self, other: &VectorField) -> Result<VectorField> {
        if self.dim != other.dim {
            return Err(CoreError::DimensionMismatch {
                expected: self.dim,
                got: other.dim,
            });
        }
        let mut bps = self.breakpoints.clone();
        bps.extend_from_slice(&other.breakpoints);
        Ok(VectorField {
            dim: self.dim,
            regularity: Regularity {
                class: if self.regularity.class == RegularityClass::LC
                    && other.regularity.class == RegularityClass::LC
                {
                    RegularityClass::LC
                } else {
                    RegularityClass::SC
                },
                p: self.regularity.p.min(other.regularity.p),
            },
            breakpoints: sorted_dedup(bps),
            kind: FieldKind::Difference {
                left: Arc::new(self.clone()),
                right: Arc::new(other.clone()),
            },
        })
    }

    /// Parses the JSON schema
    /// `{"dim": N, "expr": <tree> | [<tree>; N], "breakpoints": [..],
    ///   "regularity": {"class": "LC", "p": 1}}`.
    pub fn from_json(value: &Value) -> Result<Self> {
        let obj = value
            .as_object()
            .ok_or_else(|| CoreError::InvalidField("field definition must be an object".into()))?;
        let dim = obj
            .get("dim")
            .and_then(Value::as_u64)
            .ok_or_else(|| CoreError::InvalidField("field misses `dim`".into()))? as usize;
        let expr = obj
            .get("expr")
            .ok_or_else(|| CoreError::InvalidField("field misses `expr`".into()))?;
        let components = match expr {
            Value::Array(items) => items
                .iter()
                .map(Expr::from_json)
                .collect::<Result<Vec<_>>>()?,
            single => vec![Expr::from_json(single)?],
        };
        let breakpoints = match obj.get("breakpoints") {
            Some(Value::Array(items)) => items
                .iter()
                .map(|v| {
                    v.as_f64()
                        .ok_or_else(|| CoreError::InvalidField("breakpoint must be a number".into()))
                })
                .collect::<Result<Vec<f64>>>()?,
            Some(_) => return Err(CoreError::InvalidField("`breakpoints` must be an array".into())),
            None => Vec::new(),
        };
        let regularity = match obj.get("regularity") {
            Some(v) => serde_json::from_value(v.clone())
                .map_err(|e| CoreError::InvalidField(format!("bad regularity: {e}")))?,
            None => Regularity::default(),
        };
        VectorField::new(dim, components, breakpoints, regularity)
    }

    pub fn to_json(&self) -> Value {
        match &self.kind {
            FieldKind::Expr { components } => serde_json::json!({
                "dim": self.dim,
                "expr": components.iter().map(Expr::to_json).collect::<Vec<_>>(),
                "breakpoints": self.breakpoints,
                "regularity": self.regularity,
            }),
            FieldKind::Translated { base, shift } => serde_json::json!({
                "translate": { "shift": shift, "base": base.to_json() },
            }),
            FieldKind::Difference { left, right } => serde_json::json!({
                "difference": { "left": left.to_json(), "right": right.to_json() },
            }),
        }
    }
}

/// A parameterized family `f_n` given by a template over the symbol `n`,
/// plus breakpoint templates that may depend on `n` as well.
#[derive(Debug, Clone)]
pub struct FieldTemplate {
    pub dim: usize,
    pub components: Vec<Expr>,
    pub breakpoints: Vec<Expr>,
    pub regularity: Regularity,
}

impl FieldTemplate {
    pub fn new(dim: usize, components: Vec<Expr>, regularity: Regularity) -> Self {
        FieldTemplate {
            dim,
            components,
            breakpoints: Vec::new(),
            regularity,
        }
    }

    pub fn scalar(expr: Expr) -> Self {
        FieldTemplate::new(1, vec![expr], Regularity::default())
    }

    pub fn instantiate(&self, n: f64) -> Result<VectorField> {
        let components = self
            .components
            .iter()
            .map(|c| c.substitute_param(n))
            .collect::<Result<Vec<_>>>()?;
        let breakpoints = self
            .breakpoints
            .iter()
            .map(|b| b.substitute_param(n)?.eval(f64::NAN, &[], &[]))
            .collect::<Result<Vec<f64>>>()?;
        VectorField::new(self.dim, components, breakpoints, self.regularity)
    }

    pub fn from_json(value: &Value) -> Result<Self> {
        let obj = value
            .as_object()
            .ok_or_else(|| CoreError::InvalidField("template must be an object".into()))?;
        let dim = obj
            .get("dim")
            .and_then(Value::as_u64)
            .ok_or_else(|| CoreError::InvalidField("template misses `dim`".into()))?
            as usize;
        let expr = obj
            .get("expr")
            .ok_or_else(|| CoreError::InvalidField("template misses `expr`".into()))?;
        let components = match expr {
            Value::Array(items) => items
                .iter()
                .map(Expr::from_json)
                .collect::<Result<Vec<_>>>()?,
            single => vec![Expr::from_json(single)?],
        };
        let breakpoints = match obj.get("breakpoints") {
            Some(Value::Array(items)) => items
                .iter()
                .map(Expr::from_json)
                .collect::<Result<Vec<_>>>()?,
            _ => Vec::new(),
        };
        let regularity = match obj.get("regularity") {
            Some(v) => serde_json::from_value(v.clone())
                .map_err(|e| CoreError::InvalidField(format!("bad regularity: {e}")))?,
            None => Regularity::default(),
        };
        Ok(FieldTemplate {
            dim,
            components,
            breakpoints,
            regularity,
        })
    }
}
