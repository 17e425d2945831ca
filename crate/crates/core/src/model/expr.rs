use serde_json::Value;

use crate::error::{CoreError, Result};

/// Binary operators of the field grammar.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinaryOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
    Min,
    Max,
}

impl BinaryOp {
    pub fn name(&self) -> &'static str {
        match self {
            BinaryOp::Add => "add",
            BinaryOp::Sub => "sub",
            BinaryOp::Mul => "mul",
            BinaryOp::Div => "div",
            BinaryOp::Pow => "pow",
            BinaryOp::Min => "min",
            BinaryOp::Max => "max",
        }
    }
}

/// Unary operators of the field grammar.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UnaryOp {
    Neg,
    Abs,
    Sin,
    Cos,
    Exp,
}

impl UnaryOp {
    pub fn name(&self) -> &'static str {
        match self {
            UnaryOp::Neg => "neg",
            UnaryOp::Abs => "abs",
            UnaryOp::Sin => "sin",
            UnaryOp::Cos => "cos",
            UnaryOp::Exp => "exp",
        }
    }
}

/// An expression tree over the symbols `t`, `x1..xN`, `u1..uN` and the family
/// parameter `n`. Piecewise branches may only switch on `t`; the switch times
/// are the expression's intrinsic breakpoints.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Const(f64),
    /// The time variable `t`.
    Time,
    /// Current-state component `x{i+1}`.
    State(usize),
    /// Delayed-state component `u{i+1}`.
    Delayed(usize),
    /// Family parameter `n`; must be substituted before evaluation.
    Param,
    Unary(UnaryOp, Box<Expr>),
    Binary(BinaryOp, Box<Expr>, Box<Expr>),
    /// `t < cuts[0]` selects `branches[0]`, ..., `t >= cuts[last]` selects the
    /// final branch, so evaluation at a cut takes the right-hand value.
    Piecewise { cuts: Vec<f64>, branches: Vec<Expr> },
    /// Piecewise whose cut times are constant expressions of the family
    /// parameter (e.g. `1/n`); folded into `Piecewise` by `substitute_param`.
    PiecewiseDeferred { cuts: Vec<Expr>, branches: Vec<Expr> },
}

#[allow(clippy::should_implement_trait)] // builder DSL, not operator overloads
impl Expr {
    pub fn constant(v: f64) -> Expr {
        Expr::Const(v)
    }

    pub fn time() -> Expr {
        Expr::Time
    }

    pub fn state(i: usize) -> Expr {
        Expr::State(i)
    }

    pub fn delayed(i: usize) -> Expr {
        Expr::Delayed(i)
    }

    pub fn add(a: Expr, b: Expr) -> Expr {
        Expr::Binary(BinaryOp::Add, Box::new(a), Box::new(b))
    }

    pub fn sub(a: Expr, b: Expr) -> Expr {
        Expr::Binary(BinaryOp::Sub, Box::new(a), Box::new(b))
    }

    pub fn mul(a: Expr, b: Expr) -> Expr {
        Expr::Binary(BinaryOp::Mul, Box::new(a), Box::new(b))
    }

    pub fn div(a: Expr, b: Expr) -> Expr {
        Expr::Binary(BinaryOp::Div, Box::new(a), Box::new(b))
    }

    pub fn pow(a: Expr, b: Expr) -> Expr {
        Expr::Binary(BinaryOp::Pow, Box::new(a), Box::new(b))
    }

    pub fn min(a: Expr, b: Expr) -> Expr {
        Expr::Binary(BinaryOp::Min, Box::new(a), Box::new(b))
    }

    pub fn max(a: Expr, b: Expr) -> Expr {
        Expr::Binary(BinaryOp::Max, Box::new(a), Box::new(b))
    }

    pub fn neg(a: Expr) -> Expr {
        Expr::Unary(UnaryOp::Neg, Box::new(a))
    }

    pub fn abs(a: Expr) -> Expr {
        Expr::Unary(UnaryOp::Abs, Box::new(a))
    }

    pub fn sin(a: Expr) -> Expr {
        Expr::Unary(UnaryOp::Sin, Box::new(a))
    }

    pub fn cos(a: Expr) -> Expr {
        Expr::Unary(UnaryOp::Cos, Box::new(a))
    }

    pub fn exp(a: Expr) -> Expr {
        Expr::Unary(UnaryOp::Exp, Box::new(a))
    }

    pub fn piecewise(cuts: Vec<f64>, branches: Vec<Expr>) -> Result<Expr> {
        if branches.len() != cuts.len() + 1 {
            return Err(CoreError::InvalidField(format!(
                "piecewise needs cuts+1 branches, got {} cuts and {} branches",
                cuts.len(),
                branches.len()
            )));
        }
        if cuts.windows(2).any(|w| w[0] >= w[1]) {
            return Err(CoreError::InvalidField(
                "piecewise cut times must be strictly increasing".into(),
            ));
        }
        Ok(Expr::Piecewise { cuts, branches })
    }

    /// Evaluates the tree at `(t, x, u)`. Division by zero and powers that
    /// produce non-finite values are reported as singular evaluations naming
    /// the offending node.
    pub fn eval(&self, t: f64, x: &[f64], u: &[f64]) -> Result<f64> {
        match self {
            Expr::Const(v) => Ok(*v),
            Expr::Time => Ok(t),
            Expr::State(i) => x.get(*i).copied().ok_or(CoreError::DimensionMismatch {
                expected: *i + 1,
                got: x.len(),
            }),
            Expr::Delayed(i) => u.get(*i).copied().ok_or(CoreError::DimensionMismatch {
                expected: *i + 1,
                got: u.len(),
            }),
            Expr::Param => Err(CoreError::InvalidField(
                "family parameter `n` must be substituted before evaluation".into(),
            )),
            Expr::Unary(op, a) => {
                let v = a.eval(t, x, u)?;
                let r = match op {
                    UnaryOp::Neg => -v,
                    UnaryOp::Abs => v.abs(),
                    UnaryOp::Sin => v.sin(),
                    UnaryOp::Cos => v.cos(),
                    UnaryOp::Exp => v.exp(),
                };
                if r.is_finite() {
                    Ok(r)
                } else {
                    Err(CoreError::SingularEvaluation {
                        node: op.name().into(),
                        t,
                        detail: format!("argument {v} produced {r}"),
                    })
                }
            }
            Expr::Binary(op, a, b) => {
                let va = a.eval(t, x, u)?;
                let vb = b.eval(t, x, u)?;
                let r = match op {
                    BinaryOp::Add => va + vb,
                    BinaryOp::Sub => va - vb,
                    BinaryOp::Mul => va * vb,
                    BinaryOp::Div => {
                        if vb == 0.0 {
                            return Err(CoreError::SingularEvaluation {
                                node: "div".into(),
                                t,
                                detail: format!("division of {va} by zero"),
                            });
                        }
                        va / vb
                    }
                    BinaryOp::Pow => va.powf(vb),
                    BinaryOp::Min => va.min(vb),
                    BinaryOp::Max => va.max(vb),
                };
                if r.is_finite() {
                    Ok(r)
                } else {
                    Err(CoreError::SingularEvaluation {
                        node: op.name().into(),
                        t,
                        detail: format!("operands ({va}, {vb}) produced {r}"),
                    })
                }
            }
            Expr::Piecewise { cuts, branches } => {
                let idx = cuts.partition_point(|&c| t >= c);
                branches[idx].eval(t, x, u)
            }
            Expr::PiecewiseDeferred { .. } => Err(CoreError::InvalidField(
                "piecewise cut times still reference the family parameter".into(),
            )),
        }
    }

    /// Replaces the family parameter `n` with a constant and folds any
    /// deferred piecewise cuts to numbers.
    pub fn substitute_param(&self, n: f64) -> Result<Expr> {
        match self {
            Expr::Param => Ok(Expr::Const(n)),
            Expr::Const(_) | Expr::Time | Expr::State(_) | Expr::Delayed(_) => Ok(self.clone()),
            Expr::Unary(op, a) => Ok(Expr::Unary(*op, Box::new(a.substitute_param(n)?))),
            Expr::Binary(op, a, b) => Ok(Expr::Binary(
                *op,
                Box::new(a.substitute_param(n)?),
                Box::new(b.substitute_param(n)?),
            )),
            Expr::Piecewise { cuts, branches } => Ok(Expr::Piecewise {
                cuts: cuts.clone(),
                branches: branches
                    .iter()
                    .map(|b| b.substitute_param(n))
                    .collect::<Result<Vec<_>>>()?,
            }),
            Expr::PiecewiseDeferred { cuts, branches } => {
                let cut_values = cuts
                    .iter()
                    .map(|c| c.substitute_param(n)?.eval(f64::NAN, &[], &[]))
                    .collect::<Result<Vec<f64>>>()?;
                let folded = branches
                    .iter()
                    .map(|b| b.substitute_param(n))
                    .collect::<Result<Vec<_>>>()?;
                Expr::piecewise(cut_values, folded)
            }
        }
    }

    pub fn contains_param(&self) -> bool {
        match self {
            Expr::Param => true,
            Expr::Const(_) | Expr::Time | Expr::State(_) | Expr::Delayed(_) => false,
            Expr::Unary(_, a) => a.contains_param(),
            Expr::Binary(_, a, b) => a.contains_param() || b.contains_param(),
            Expr::Piecewise { branches, .. } => branches.iter().any(|b| b.contains_param()),
            Expr::PiecewiseDeferred { .. } => true,
        }
    }

    /// Collects every piecewise cut time, the potential discontinuities in `t`.
    pub fn collect_cuts(&self, out: &mut Vec<f64>) {
        match self {
            Expr::Const(_) | Expr::Time | Expr::State(_) | Expr::Delayed(_) | Expr::Param => {}
            Expr::Unary(_, a) => a.collect_cuts(out),
            Expr::Binary(_, a, b) => {
                a.collect_cuts(out);
                b.collect_cuts(out);
            }
            Expr::Piecewise { cuts, branches } => {
                out.extend_from_slice(cuts);
                for b in branches {
                    b.collect_cuts(out);
                }
            }
            Expr::PiecewiseDeferred { branches, .. } => {
                for b in branches {
                    b.collect_cuts(out);
                }
            }
        }
    }

    /// Largest state/delayed component index referenced, if any.
    pub fn max_component(&self) -> Option<usize> {
        match self {
            Expr::State(i) | Expr::Delayed(i) => Some(*i),
            Expr::Const(_) | Expr::Time | Expr::Param => None,
            Expr::Unary(_, a) => a.max_component(),
            Expr::Binary(_, a, b) => a.max_component().max(b.max_component()),
            Expr::Piecewise { branches, .. } | Expr::PiecewiseDeferred { branches, .. } => {
                branches.iter().filter_map(|b| b.max_component()).max()
            }
        }
    }

    /// Parses the JSON grammar: bare numbers, `{"const": v}`, `{"var": name}`
    /// and `{"op": ..., "args": [...]}` nodes. Piecewise nodes carry a `cuts`
    /// array whose entries are numbers or constant subexpressions.
    pub fn from_json(value: &Value) -> Result<Expr> {
        match value {
            Value::Number(n) => Ok(Expr::Const(n.as_f64().ok_or_else(|| {
                CoreError::InvalidField(format!("non-finite literal {n}"))
            })?)),
            Value::Object(map) => {
                if let Some(c) = map.get("const") {
                    let v = c
                        .as_f64()
                        .ok_or_else(|| CoreError::InvalidField("const must be a number".into()))?;
                    return Ok(Expr::Const(v));
                }
                if let Some(var) = map.get("var") {
                    let name = var
                        .as_str()
                        .ok_or_else(|| CoreError::InvalidField("var must be a string".into()))?;
                    return Expr::var_from_name(name);
                }
                let op = map
                    .get("op")
                    .and_then(Value::as_str)
                    .ok_or_else(|| CoreError::InvalidField("expression node misses `op`".into()))?;
                let args: Vec<Expr> = match map.get("args") {
                    Some(Value::Array(items)) => items
                        .iter()
                        .map(Expr::from_json)
                        .collect::<Result<Vec<_>>>()?,
                    Some(_) => {
                        return Err(CoreError::InvalidField("`args` must be an array".into()))
                    }
                    None => Vec::new(),
                };
                Expr::from_op(op, args, map)
            }
            other => Err(CoreError::InvalidField(format!(
                "unsupported expression node: {other}"
            ))),
        }
    }

    fn var_from_name(name: &str) -> Result<Expr> {
        match name {
            "t" => Ok(Expr::Time),
            "n" => Ok(Expr::Param),
            "x" => Ok(Expr::State(0)),
            "u" => Ok(Expr::Delayed(0)),
            _ => {
                if let Some(idx) = name.strip_prefix('x') {
                    let i: usize = idx.parse().map_err(|_| {
                        CoreError::InvalidField(format!("unknown variable `{name}`"))
                    })?;
                    if i == 0 {
                        return Err(CoreError::InvalidField("state indices start at 1".into()));
                    }
                    Ok(Expr::State(i - 1))
                } else if let Some(idx) = name.strip_prefix('u') {
                    let i: usize = idx.parse().map_err(|_| {
                        CoreError::InvalidField(format!("unknown variable `{name}`"))
                    })?;
                    if i == 0 {
                        return Err(CoreError::InvalidField("delayed indices start at 1".into()));
                    }
                    Ok(Expr::Delayed(i - 1))
                } else {
                    Err(CoreError::InvalidField(format!("unknown variable `{name}`")))
                }
            }
        }
    }

    fn from_op(op: &str, mut args: Vec<Expr>, map: &serde_json::Map<String, Value>) -> Result<Expr> {
        let take2 = |args: &mut Vec<Expr>| -> Result<(Expr, Expr)> {
            if args.len() != 2 {
                return Err(CoreError::InvalidField(format!(
                    "binary operator expects 2 args, got {}",
                    args.len()
                )));
            }
            let b = args.pop().unwrap();
            let a = args.pop().unwrap();
            Ok((a, b))
        };
        let take1 = |args: &mut Vec<Expr>| -> Result<Expr> {
            if args.len() != 1 {
                return Err(CoreError::InvalidField(format!(
                    "unary operator expects 1 arg, got {}",
                    args.len()
                )));
            }
            Ok(args.pop().unwrap())
        };
        match op {
            "add" | "+" => take2(&mut args).map(|(a, b)| Expr::add(a, b)),
            "sub" | "-" => {
                if args.len() == 1 {
                    Ok(Expr::neg(args.pop().unwrap()))
                } else {
                    take2(&mut args).map(|(a, b)| Expr::sub(a, b))
                }
            }
            "mul" | "*" => take2(&mut args).map(|(a, b)| Expr::mul(a, b)),
            "div" | "/" => take2(&mut args).map(|(a, b)| Expr::div(a, b)),
            "pow" => take2(&mut args).map(|(a, b)| Expr::pow(a, b)),
            "min" => take2(&mut args).map(|(a, b)| Expr::min(a, b)),
            "max" => take2(&mut args).map(|(a, b)| Expr::max(a, b)),
            "neg" => take1(&mut args).map(Expr::neg),
            "abs" => take1(&mut args).map(Expr::abs),
            "sin" => take1(&mut args).map(Expr::sin),
            "cos" => take1(&mut args).map(Expr::cos),
            "exp" => take1(&mut args).map(Expr::exp),
            "piecewise" => {
                let cuts_json = map
                    .get("cuts")
                    .and_then(Value::as_array)
                    .ok_or_else(|| CoreError::InvalidField("piecewise misses `cuts`".into()))?;
                // Cut times may be constant subexpressions of the family
                // parameter, e.g. 1/n; they fold once `n` is known.
                let cuts = cuts_json
                    .iter()
                    .map(Expr::from_json)
                    .collect::<Result<Vec<_>>>()?;
                if cuts.iter().any(Expr::contains_param) {
                    if args.len() != cuts.len() + 1 {
                        return Err(CoreError::InvalidField(
                            "piecewise needs cuts+1 branches".into(),
                        ));
                    }
                    Ok(Expr::PiecewiseDeferred { cuts, branches: args })
                } else {
                    let cut_values = cuts
                        .iter()
                        .map(|c| c.eval(f64::NAN, &[], &[]))
                        .collect::<Result<Vec<f64>>>()?;
                    Expr::piecewise(cut_values, args)
                }
            }
            other => Err(CoreError::InvalidField(format!("unknown operator `{other}`"))),
        }
    }

    /// Serializes back to the JSON grammar.
    pub fn to_json(&self) -> Value {
        match self {
            Expr::Const(v) => serde_json::json!({ "const": v }),
            Expr::Time => serde_json::json!({ "var": "t" }),
            Expr::Param => serde_json::json!({ "var": "n" }),
            Expr::State(i) => serde_json::json!({ "var": format!("x{}", i + 1) }),
            Expr::Delayed(i) => serde_json::json!({ "var": format!("u{}", i + 1) }),
            Expr::Unary(op, a) => serde_json::json!({ "op": op.name(), "args": [a.to_json()] }),
            Expr::Binary(op, a, b) => {
                serde_json::json!({ "op": op.name(), "args": [a.to_json(), b.to_json()] })
            }
            Expr::Piecewise { cuts, branches } => serde_json::json!({
                "op": "piecewise",
                "cuts": cuts,
                "args": branches.iter().map(Expr::to_json).collect::<Vec<_>>(),
            }),
            Expr::PiecewiseDeferred { cuts, branches } => serde_json::json!({
                "op": "piecewise",
                "cuts": cuts.iter().map(Expr::to_json).collect::<Vec<_>>(),
                "args": branches.iter().map(Expr::to_json).collect::<Vec<_>>(),
            }),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn projection_and_sum() {
        // f = u at (t, x, u) = (0.3, 2, 5)
        let f = Expr::delayed(0);
        assert_eq!(f.eval(0.3, &[2.0], &[5.0]).unwrap(), 5.0);
        // f = x + u at (0, 1, 1)
        let g = Expr::add(Expr::state(0), Expr::delayed(0));
        assert_eq!(g.eval(0.0, &[1.0], &[1.0]).unwrap(), 2.0);
    }

    #[test]
    fn branch_selection() {
        // piecewise(t<0.5: 1, else 2) * u at t = 0.7, u = 3
        let pw = Expr::piecewise(vec![0.5], vec![Expr::constant(1.0), Expr::constant(2.0)])
            .unwrap();
        let f = Expr::mul(pw, Expr::delayed(0));
        assert_eq!(f.eval(0.7, &[0.0], &[3.0]).unwrap(), 6.0);
        // at the cut the right-hand branch applies
        let pw2 = Expr::piecewise(vec![0.5], vec![Expr::constant(1.0), Expr::constant(2.0)])
            .unwrap();
        assert_eq!(pw2.eval(0.5, &[], &[]).unwrap(), 2.0);
        assert_eq!(pw2.eval(0.49, &[], &[]).unwrap(), 1.0);
    }

    #[test]
    fn division_by_zero_names_node() {
        let f = Expr::div(Expr::constant(1.0), Expr::time());
        match f.eval(0.0, &[], &[]) {
            Err(CoreError::SingularEvaluation { node, .. }) => assert_eq!(node, "div"),
            other => panic!("expected singular evaluation, got {other:?}"),
        }
    }

    #[test]
    fn fractional_power_of_negative_base_is_singular() {
        let f = Expr::pow(Expr::state(0), Expr::constant(0.5));
        assert!(f.eval(0.0, &[-1.0], &[]).is_err());
        // integer exponents of negative bases are fine
        let g = Expr::pow(Expr::state(0), Expr::constant(2.0));
        assert_eq!(g.eval(0.0, &[-3.0], &[]).unwrap(), 9.0);
    }

    #[test]
    fn json_round_trip() {
        let txt = r#"{"op":"mul","args":[{"op":"sin","args":[{"op":"mul","args":[{"const":6.283185307179586},{"var":"t"}]}]},{"var":"x"}]}"#;
        let v: Value = serde_json::from_str(txt).unwrap();
        let e = Expr::from_json(&v).unwrap();
        let back = Expr::from_json(&e.to_json()).unwrap();
        assert_eq!(e, back);
        let at = |t: f64| e.eval(t, &[2.0], &[0.0]).unwrap();
        assert!((at(0.25) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn param_substitution() {
        let v: Value = serde_json::from_str(
            r#"{"op":"div","args":[{"var":"u"},{"var":"n"}]}"#,
        )
        .unwrap();
        let tpl = Expr::from_json(&v).unwrap();
        assert!(tpl.contains_param());
        let f = tpl.substitute_param(4.0).unwrap();
        assert!(!f.contains_param());
        assert_eq!(f.eval(0.0, &[0.0], &[8.0]).unwrap(), 2.0);
    }

    #[test]
    fn deferred_cuts_fold_with_param() {
        // n * indicator(0 <= t < 1/n) as a piecewise with a 1/n cut
        let txt = r#"{"op":"piecewise",
                      "cuts":[0, {"op":"div","args":[1,{"var":"n"}]}],
                      "args":[0, {"var":"n"}, 0]}"#;
        let v: Value = serde_json::from_str(txt).unwrap();
        let tpl = Expr::from_json(&v).unwrap();
        assert!(tpl.contains_param());
        assert!(tpl.eval(0.1, &[], &[]).is_err());
        let f = tpl.substitute_param(4.0).unwrap();
        assert_eq!(f.eval(0.1, &[], &[]).unwrap(), 4.0);
        assert_eq!(f.eval(0.26, &[], &[]).unwrap(), 0.0);
        assert_eq!(f.eval(-0.1, &[], &[]).unwrap(), 0.0);
    }
}
