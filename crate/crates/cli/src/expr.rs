//! Scalar expressions over named `f64` variables, e.g. `0.5 - 0.3*tanh(x)`.
//!
//! Parsing is delegated to `evalexpr`; every literal is promoted to a float
//! so `1/2` means one half. Only the functions listed in [`FUNCTIONS`] and
//! the constants `pi` and `e` are available.

use evalexpr::{build_operator_tree, Context, DefaultNumericTypes, EvalexprError, EvalexprResult, Node, Operator, Value};
use thiserror::Error;

/// Input longer than this is refused before parsing.
pub const MAX_LEN: usize = 4096;
/// Deepest accepted parenthesis nesting.
pub const MAX_DEPTH: usize = 64;

pub const FUNCTIONS: &[&str] = &[
    "sin", "cos", "tan", "asin", "acos", "atan", "sinh", "cosh", "tanh", "exp", "ln", "log10", "sqrt", "cbrt", "abs", "sign",
    "floor", "ceil", "pow", "min", "max", "atan2", "hypot",
];

#[derive(Debug, Clone, Error, PartialEq)]
#[error("expression {source_text:?}: {message}")]
pub struct ExprError {
    pub source_text: String,
    pub message: String,
}

/// A compiled expression. Variables are bound by position, in the order
/// given to [`Expr::parse`].
#[derive(Debug, Clone)]
pub struct Expr {
    text: String,
    vars: Vec<String>,
    tree: Node<DefaultNumericTypes>,
}

fn floatify(node: &mut Node<DefaultNumericTypes>) {
    if let Operator::Const { value } = node.operator_mut() {
        if let Value::Int(i) = value {
            *value = Value::Float(*i as f64);
        }
    }
    for child in node.children_mut() {
        floatify(child);
    }
}

fn nesting_depth(text: &str) -> usize {
    let (mut depth, mut worst) = (0usize, 0usize);
    for c in text.chars() {
        match c {
            '(' => {
                depth += 1;
                worst = worst.max(depth);
            }
            ')' => depth = depth.saturating_sub(1),
            _ => {}
        }
    }
    worst
}

struct Scope<'a> {
    names: &'a [String],
    values: Vec<Value<DefaultNumericTypes>>,
}

const PI: Value<DefaultNumericTypes> = Value::Float(std::f64::consts::PI);
const E: Value<DefaultNumericTypes> = Value::Float(std::f64::consts::E);

fn numbers(arg: &Value<DefaultNumericTypes>) -> EvalexprResult<Vec<f64>, DefaultNumericTypes> {
    match arg {
        Value::Tuple(items) => items.iter().map(|v| v.as_number()).collect(),
        v => Ok(vec![v.as_number()?]),
    }
}

fn apply(name: &str, args: &[f64]) -> Option<f64> {
    let unary = |f: fn(f64) -> f64| match args {
        [a] => Some(f(*a)),
        _ => None,
    };
    match name {
        "sin" => unary(f64::sin),
        "cos" => unary(f64::cos),
        "tan" => unary(f64::tan),
        "asin" => unary(f64::asin),
        "acos" => unary(f64::acos),
        "atan" => unary(f64::atan),
        "sinh" => unary(f64::sinh),
        "cosh" => unary(f64::cosh),
        "tanh" => unary(f64::tanh),
        "exp" => unary(f64::exp),
        "ln" => unary(f64::ln),
        "log10" => unary(f64::log10),
        "sqrt" => unary(f64::sqrt),
        "cbrt" => unary(f64::cbrt),
        "abs" => unary(f64::abs),
        "floor" => unary(f64::floor),
        "ceil" => unary(f64::ceil),
        "sign" => unary(|a| if a == 0.0 { 0.0 } else { a.signum() }),
        _ => match (name, args) {
            ("pow", [a, b]) => Some(a.powf(*b)),
            ("atan2", [a, b]) => Some(a.atan2(*b)),
            ("hypot", [a, b]) => Some(a.hypot(*b)),
            ("min", [a, rest @ ..]) => Some(rest.iter().fold(*a, |m, v| m.min(*v))),
            ("max", [a, rest @ ..]) => Some(rest.iter().fold(*a, |m, v| m.max(*v))),
            _ => None,
        },
    }
}

impl Context for Scope<'_> {
    type NumericTypes = DefaultNumericTypes;

    fn get_value(&self, identifier: &str) -> Option<&Value<DefaultNumericTypes>> {
        match self.names.iter().position(|n| n == identifier) {
            Some(k) => self.values.get(k),
            None => match identifier {
                "pi" => Some(&PI),
                "e" => Some(&E),
                _ => None,
            },
        }
    }

    fn call_function(
        &self,
        identifier: &str,
        argument: &Value<DefaultNumericTypes>,
    ) -> EvalexprResult<Value<DefaultNumericTypes>, DefaultNumericTypes> {
        if !FUNCTIONS.contains(&identifier) {
            return Err(EvalexprError::FunctionIdentifierNotFound(identifier.to_string()));
        }
        let args = numbers(argument)?;
        apply(identifier, &args)
            .map(Value::Float)
            .ok_or_else(|| EvalexprError::CustomMessage(format!("{identifier} does not take {} argument(s)", args.len())))
    }

    fn are_builtin_functions_disabled(&self) -> bool {
        true
    }

    fn set_builtin_functions_disabled(&mut self, disabled: bool) -> EvalexprResult<(), DefaultNumericTypes> {
        if disabled {
            Ok(())
        } else {
            Err(EvalexprError::CustomMessage("builtin functions are not available".into()))
        }
    }
}

impl Expr {
    /// Compile `text` with the variables `vars`. Unknown identifiers are
    /// rejected here rather than at evaluation time.
    pub fn parse(text: &str, vars: &[&str]) -> Result<Self, ExprError> {
        let err = |message: String| ExprError {
            source_text: text.chars().take(80).collect(),
            message,
        };
        if text.len() > MAX_LEN {
            return Err(err(format!("longer than {MAX_LEN} bytes")));
        }
        if nesting_depth(text) > MAX_DEPTH {
            return Err(err(format!("nested deeper than {MAX_DEPTH} levels")));
        }
        if text.trim().is_empty() {
            return Err(err("empty expression".into()));
        }
        let mut tree = build_operator_tree::<DefaultNumericTypes>(text).map_err(|e| err(e.to_string()))?;
        floatify(&mut tree);
        if tree.iter_write_variable_identifiers().next().is_some() {
            return Err(err("assignments are not allowed".into()));
        }
        for id in tree.iter_read_variable_identifiers() {
            if !vars.contains(&id) && id != "pi" && id != "e" {
                return Err(err(format!("unknown variable `{id}` (available: {})", vars.join(", "))));
            }
        }
        for id in tree.iter_function_identifiers() {
            if !FUNCTIONS.contains(&id) {
                return Err(err(format!("unknown function `{id}`")));
            }
        }
        Ok(Self {
            text: text.to_string(),
            vars: vars.iter().map(|v| v.to_string()).collect(),
            tree,
        })
    }

    pub fn text(&self) -> &str {
        &self.text
    }

    pub fn vars(&self) -> &[String] {
        &self.vars
    }

    /// Evaluate with `values[k]` bound to the `k`-th variable.
    pub fn eval(&self, values: &[f64]) -> Result<f64, ExprError> {
        let err = |message: String| ExprError {
            source_text: self.text.chars().take(80).collect(),
            message,
        };
        if values.len() != self.vars.len() {
            return Err(err(format!("{} values for {} variables", values.len(), self.vars.len())));
        }
        let scope = Scope {
            names: &self.vars,
            values: values.iter().map(|&v| Value::Float(v)).collect(),
        };
        match self.tree.eval_with_context(&scope) {
            Ok(Value::Float(v)) => Ok(v),
            Ok(Value::Int(i)) => Ok(i as f64),
            Ok(other) => Err(err(format!("evaluates to {other}, not a number"))),
            Err(e) => Err(err(e.to_string())),
        }
    }

    /// Evaluate, mapping failures (and non-finite results) to NaN.
    pub fn eval_or_nan(&self, values: &[f64]) -> f64 {
        self.eval(values).unwrap_or(f64::NAN)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integer_literals_divide_as_floats() {
        let e = Expr::parse("1/2 + 3", &[]).unwrap();
        assert_eq!(e.eval(&[]).unwrap(), 3.5);
    }

    #[test]
    fn variables_and_functions() {
        let e = Expr::parse("0.5 - 0.3*tanh(x) + pow(u, 2) + max(1, 2, 3) + pi", &["x", "u"]).unwrap();
        let v = e.eval(&[0.7, 1.5]).unwrap();
        let want = 0.5 - 0.3 * 0.7f64.tanh() + 2.25 + 3.0 + std::f64::consts::PI;
        assert!((v - want).abs() < 1e-15);
    }

    #[test]
    fn power_operator_with_float_base() {
        let e = Expr::parse("rho^2 / 2", &["rho"]).unwrap();
        assert_eq!(e.eval(&[3.0]).unwrap(), 4.5);
    }

    #[test]
    fn unknown_names_are_rejected_at_parse() {
        assert!(Expr::parse("y + 1", &["x"])
            .unwrap_err()
            .message
            .contains("unknown variable `y`"));
        assert!(Expr::parse("gamma(x)", &["x"])
            .unwrap_err()
            .message
            .contains("unknown function"));
        assert!(Expr::parse("x = 3", &["x"]).is_err());
        assert!(Expr::parse("", &[]).is_err());
    }

    #[test]
    fn deep_nesting_is_refused() {
        let text = format!("{}1{}", "(".repeat(100), ")".repeat(100));
        assert!(Expr::parse(&text, &[]).unwrap_err().message.contains("nested"));
    }

    #[test]
    fn wrong_arity_is_an_error() {
        let e = Expr::parse("sin(x, x)", &["x"]).unwrap();
        assert!(e.eval(&[1.0]).is_err());
    }

    #[test]
    fn non_numeric_result_is_an_error() {
        let e = Expr::parse("x > 1", &["x"]).unwrap();
        assert!(e.eval(&[2.0]).is_err());
    }
}
