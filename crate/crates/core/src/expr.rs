//! Builtin scalar fields over chart coordinates: polynomials, exponentials,
//! and sums/products of them. Values and gradients are exact.

use serde::{Deserialize, Serialize};

use crate::linalg::Vector;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ScalarExpr {
    Number(f64),
    Node(ExprNode),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum ExprNode {
    Const(f64),
    /// `constant + gradient · x`
    Linear { constant: f64, gradient: Vec<f64> },
    /// Sum of monomials `coef · Π x_i^{p_i}`.
    Poly(Vec<Monomial>),
    /// `scale · exp(rate · x + shift)`
    Exp {
        scale: f64,
        rate: Vec<f64>,
        #[serde(default)]
        shift: f64,
    },
    Sum(Vec<ScalarExpr>),
    Product(Vec<ScalarExpr>),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Monomial {
    pub coef: f64,
    pub powers: Vec<u32>,
}

impl From<f64> for ScalarExpr {
    fn from(c: f64) -> Self {
        ScalarExpr::Number(c)
    }
}

fn dot_prefix(a: &[f64], x: &[f64]) -> f64 {
    a.iter().zip(x).map(|(a, b)| a * b).sum()
}

impl ScalarExpr {
    pub fn constant(c: f64) -> Self {
        ScalarExpr::Number(c)
    }

    pub fn linear(constant: f64, gradient: Vec<f64>) -> Self {
        ScalarExpr::Node(ExprNode::Linear { constant, gradient })
    }

    pub fn exp(scale: f64, rate: Vec<f64>, shift: f64) -> Self {
        ScalarExpr::Node(ExprNode::Exp { scale, rate, shift })
    }

    pub fn is_constant(&self) -> bool {
        match self {
            ScalarExpr::Number(_) => true,
            ScalarExpr::Node(n) => match n {
                ExprNode::Const(_) => true,
                ExprNode::Linear { gradient, .. } => gradient.iter().all(|&g| g == 0.0),
                ExprNode::Poly(ms) => ms
                    .iter()
                    .all(|m| m.coef == 0.0 || m.powers.iter().all(|&p| p == 0)),
                ExprNode::Exp { scale, rate, .. } => {
                    *scale == 0.0 || rate.iter().all(|&r| r == 0.0)
                }
                ExprNode::Sum(es) | ExprNode::Product(es) => es.iter().all(|e| e.is_constant()),
            },
        }
    }

    /// Number of coordinates the expression refers to (largest index + 1).
    pub fn arity(&self) -> usize {
        match self {
            ScalarExpr::Number(_) => 0,
            ScalarExpr::Node(n) => match n {
                ExprNode::Const(_) => 0,
                ExprNode::Linear { gradient, .. } => gradient.len(),
                ExprNode::Poly(ms) => ms.iter().map(|m| m.powers.len()).max().unwrap_or(0),
                ExprNode::Exp { rate, .. } => rate.len(),
                ExprNode::Sum(es) | ExprNode::Product(es) => {
                    es.iter().map(|e| e.arity()).max().unwrap_or(0)
                }
            },
        }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        match self {
            ScalarExpr::Number(c) => *c,
            ScalarExpr::Node(n) => match n {
                ExprNode::Const(c) => *c,
                ExprNode::Linear { constant, gradient } => constant + dot_prefix(gradient, x),
                ExprNode::Poly(ms) => ms
                    .iter()
                    .map(|m| {
                        m.coef
                            * m.powers
                                .iter()
                                .enumerate()
                                .map(|(i, &p)| x[i].powi(p as i32))
                                .product::<f64>()
                    })
                    .sum(),
                ExprNode::Exp { scale, rate, shift } => scale * (dot_prefix(rate, x) + shift).exp(),
                ExprNode::Sum(es) => es.iter().map(|e| e.eval(x)).sum(),
                ExprNode::Product(es) => es.iter().map(|e| e.eval(x)).product(),
            },
        }
    }

    /// Gradient with respect to all `x.len()` coordinates.
    pub fn grad(&self, x: &[f64]) -> Vector {
        let d = x.len();
        let mut g = Vector::zeros(d);
        match self {
            ScalarExpr::Number(_) => {}
            ScalarExpr::Node(n) => match n {
                ExprNode::Const(_) => {}
                ExprNode::Linear { gradient, .. } => {
                    for (i, &gi) in gradient.iter().enumerate() {
                        g[i] = gi;
                    }
                }
                ExprNode::Poly(ms) => {
                    for m in ms {
                        for k in 0..m.powers.len() {
                            let pk = m.powers[k];
                            if pk == 0 {
                                continue;
                            }
                            let mut term = m.coef * pk as f64;
                            for (i, &p) in m.powers.iter().enumerate() {
                                let e = if i == k { p - 1 } else { p };
                                term *= x[i].powi(e as i32);
                            }
                            g[k] += term;
                        }
                    }
                }
                ExprNode::Exp { scale, rate, shift } => {
                    let v = scale * (dot_prefix(rate, x) + shift).exp();
                    for (i, &r) in rate.iter().enumerate() {
                        g[i] = r * v;
                    }
                }
                ExprNode::Sum(es) => {
                    for e in es {
                        g += e.grad(x);
                    }
                }
                ExprNode::Product(es) => {
                    let vals: Vec<f64> = es.iter().map(|e| e.eval(x)).collect();
                    for (k, e) in es.iter().enumerate() {
                        let others: f64 = vals
                            .iter()
                            .enumerate()
                            .filter(|(i, _)| *i != k)
                            .map(|(_, v)| v)
                            .product();
                        g += e.grad(x) * others;
                    }
                }
            },
        }
        g
    }
}
