//! Arithmetic expressions over named variables, with exact derivatives up
//! to third order through nested dual numbers.
//!
//! ```
//! use tn_core::expr::Expression;
//! let e = Expression::parse("x1^2 * x2", &["x1", "x2"]).unwrap();
//! let jet = e.jet3(&[3.0, 2.0]).unwrap();
//! assert_eq!(jet.value, 18.0);
//! assert_eq!(jet.grad, vec![12.0, 9.0]);
//! ```

mod parse;
pub mod scalar;

use std::fmt;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::tensor::Tensor;
use scalar::{seed1, seed2, seed3, Scalar};

/// Elementary functions accepted by the grammar.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Tan,
    Exp,
    Log,
    Sqrt,
    Abs,
}

impl Func {
    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Tan => "tan",
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sqrt => "sqrt",
            Func::Abs => "abs",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Some(match name {
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "tan" => Func::Tan,
            "exp" => Func::Exp,
            "log" => Func::Log,
            "sqrt" => Func::Sqrt,
            "abs" => Func::Abs,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Node {
    Const(f64),
    /// Index into the owning expression's variable list.
    Var(usize),
    Neg(Box<Node>),
    Add(Box<Node>, Box<Node>),
    Sub(Box<Node>, Box<Node>),
    Mul(Box<Node>, Box<Node>),
    Div(Box<Node>, Box<Node>),
    Pow(Box<Node>, Box<Node>),
    Func(Func, Box<Node>),
}

impl Node {
    fn precedence(&self) -> u8 {
        match self {
            Node::Add(..) | Node::Sub(..) => 1,
            Node::Mul(..) | Node::Div(..) => 2,
            Node::Neg(_) => 3,
            Node::Pow(..) => 4,
            Node::Const(_) | Node::Var(_) | Node::Func(..) => 5,
        }
    }

    fn has_vars(&self) -> bool {
        match self {
            Node::Const(_) => false,
            Node::Var(_) => true,
            Node::Neg(a) | Node::Func(_, a) => a.has_vars(),
            Node::Add(a, b) | Node::Sub(a, b) | Node::Mul(a, b) | Node::Div(a, b) | Node::Pow(a, b) => {
                a.has_vars() || b.has_vars()
            }
        }
    }

    fn max_var(&self) -> Option<usize> {
        match self {
            Node::Const(_) => None,
            Node::Var(i) => Some(*i),
            Node::Neg(a) | Node::Func(_, a) => a.max_var(),
            Node::Add(a, b) | Node::Sub(a, b) | Node::Mul(a, b) | Node::Div(a, b) | Node::Pow(a, b) => {
                a.max_var().max(b.max_var())
            }
        }
    }
}

/// A parsed expression together with its ordered variable names.
#[derive(Debug, Clone, PartialEq)]
pub struct Expression {
    root: Node,
    vars: Vec<String>,
}

/// Value and partial derivatives up to third order at a point.
///
/// `hess` and `third` are fully symmetric; entries above the requested
/// order are left at zero.
#[derive(Debug, Clone, PartialEq)]
pub struct Jet3 {
    pub value: f64,
    pub grad: Vec<f64>,
    pub hess: DMatrix<f64>,
    pub third: Tensor,
}

impl Expression {
    pub fn parse(source: &str, variables: &[&str]) -> Result<Self> {
        let vars: Vec<String> = variables.iter().map(|s| s.to_string()).collect();
        Self::parse_owned(source, vars)
    }

    pub fn parse_owned(source: &str, vars: Vec<String>) -> Result<Self> {
        for (i, v) in vars.iter().enumerate() {
            let valid = v.chars().next().is_some_and(|c| c.is_ascii_alphabetic() || c == '_')
                && v.chars().all(|c| c.is_ascii_alphanumeric() || c == '_');
            if !valid || Func::from_name(v).is_some() {
                return Err(Error::InvalidParams(format!("`{v}` is not a usable variable name")));
            }
            if vars[..i].contains(v) {
                return Err(Error::InvalidParams(format!("variable `{v}` declared twice")));
            }
        }
        let root = parse::Parser::parse(source, &vars)?;
        Ok(Self { root, vars })
    }

    /// Build from an existing tree. Fails if the tree references a variable
    /// index outside `vars`.
    pub fn from_node(root: Node, vars: Vec<String>) -> Result<Self> {
        if let Some(i) = root.max_var() {
            if i >= vars.len() {
                return Err(Error::Undeclared(format!("#{i}")));
            }
        }
        Ok(Self { root, vars })
    }

    pub fn constant(value: f64, vars: Vec<String>) -> Self {
        Self {
            root: Node::Const(value),
            vars,
        }
    }

    pub fn root(&self) -> &Node {
        &self.root
    }

    pub fn variables(&self) -> &[String] {
        &self.vars
    }

    pub fn arity(&self) -> usize {
        self.vars.len()
    }

    pub fn is_constant(&self) -> bool {
        !self.root.has_vars()
    }

    /// Evaluate with any scalar type; `x` must have one entry per variable.
    pub fn eval_with<T: Scalar>(&self, x: &[T]) -> Result<T> {
        assert_eq!(x.len(), self.vars.len(), "argument count mismatch");
        self.eval_node(&self.root, x)
    }

    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        self.eval_with(x)
    }

    pub fn jet3(&self, x: &[f64]) -> Result<Jet3> {
        self.jet(x, 3)
    }

    /// Derivatives up to `order` (0..=3).
    pub fn jet(&self, x: &[f64], order: usize) -> Result<Jet3> {
        assert!(order <= 3, "derivative order above 3 is not supported");
        let n = self.vars.len();
        assert_eq!(x.len(), n, "argument count mismatch");
        let mut jet = Jet3 {
            value: self.eval(x)?,
            grad: vec![0.0; n],
            hess: DMatrix::zeros(n, n),
            third: Tensor::zeros(n, 3),
        };
        match order {
            0 => {}
            1 => {
                for a in 0..n {
                    let args: Vec<_> = (0..n).map(|m| seed1(x[m], m, a)).collect();
                    jet.grad[a] = self.eval_with(&args)?.eps;
                }
            }
            2 => {
                for a in 0..n {
                    for b in a..n {
                        let args: Vec<_> = (0..n).map(|m| seed2(x[m], m, a, b)).collect();
                        let y = self.eval_with(&args)?;
                        jet.grad[a] = y.eps.re;
                        jet.grad[b] = y.re.eps;
                        jet.hess[(a, b)] = y.eps.eps;
                        jet.hess[(b, a)] = y.eps.eps;
                    }
                }
            }
            _ => {
                for a in 0..n {
                    for b in a..n {
                        for c in b..n {
                            let args: Vec<_> = (0..n).map(|m| seed3(x[m], m, a, b, c)).collect();
                            let y = self.eval_with(&args)?;
                            jet.grad[a] = y.eps.re.re;
                            jet.grad[c] = y.re.re.eps;
                            jet.hess[(a, b)] = y.eps.eps.re;
                            jet.hess[(b, a)] = y.eps.eps.re;
                            jet.hess[(a, c)] = y.eps.re.eps;
                            jet.hess[(c, a)] = y.eps.re.eps;
                            jet.hess[(b, c)] = y.re.eps.eps;
                            jet.hess[(c, b)] = y.re.eps.eps;
                            let d3 = y.eps.eps.eps;
                            for [i, j, k] in permutations3(a, b, c) {
                                jet.third[[i, j, k]] = d3;
                            }
                        }
                    }
                }
            }
        }
        Ok(jet)
    }

    /// Symbolic partial derivative with respect to variable `var`.
    /// Only trivial constant folding is applied.
    pub fn partial(&self, var: usize) -> Expression {
        assert!(var < self.vars.len());
        Expression {
            root: diff(&self.root, var),
            vars: self.vars.clone(),
        }
    }

    fn domain_err(&self, node: &Node, reason: &str) -> Error {
        Error::Domain {
            node: Printer(node, &self.vars).to_string(),
            reason: reason.to_string(),
        }
    }

    fn eval_node<T: Scalar>(&self, node: &Node, x: &[T]) -> Result<T> {
        Ok(match node {
            Node::Const(v) => T::cst(*v),
            Node::Var(i) => x[*i],
            Node::Neg(a) => -self.eval_node(a, x)?,
            Node::Add(a, b) => self.eval_node(a, x)? + self.eval_node(b, x)?,
            Node::Sub(a, b) => self.eval_node(a, x)? - self.eval_node(b, x)?,
            Node::Mul(a, b) => self.eval_node(a, x)? * self.eval_node(b, x)?,
            Node::Div(a, b) => {
                let den = self.eval_node(b, x)?;
                if den.re() == 0.0 {
                    return Err(self.domain_err(node, "division by zero"));
                }
                self.eval_node(a, x)? / den
            }
            Node::Pow(a, b) => {
                let base = self.eval_node(a, x)?;
                if !b.has_vars() {
                    let e: f64 = self.eval_node(b, &[] as &[f64])?;
                    if e.fract() == 0.0 && e.abs() <= 1024.0 {
                        if e < 0.0 && base.re() == 0.0 {
                            return Err(self.domain_err(node, "negative power of zero"));
                        }
                        return Ok(base.powi(e as i64));
                    }
                    if base.re() <= 0.0 {
                        return Err(self.domain_err(node, "non-integer power of a non-positive base"));
                    }
                    return Ok(base.powf(T::cst(e)));
                }
                if base.re() <= 0.0 {
                    return Err(self.domain_err(node, "variable power of a non-positive base"));
                }
                base.powf(self.eval_node(b, x)?)
            }
            Node::Func(f, a) => {
                let v = self.eval_node(a, x)?;
                match f {
                    Func::Sin => v.sin(),
                    Func::Cos => v.cos(),
                    Func::Tan => {
                        if v.re().cos().abs() < 1e-12 {
                            return Err(self.domain_err(node, "tan at a pole"));
                        }
                        v.tan()
                    }
                    Func::Exp => v.exp(),
                    Func::Log => {
                        if v.re() <= 0.0 {
                            return Err(self.domain_err(node, "log of a non-positive value"));
                        }
                        v.ln()
                    }
                    Func::Sqrt => {
                        if v.re() <= 0.0 {
                            return Err(self.domain_err(node, "sqrt of a non-positive value"));
                        }
                        v.sqrt()
                    }
                    Func::Abs => {
                        if v.re().abs() < 1e-12 {
                            return Err(self.domain_err(node, "abs is not differentiable at 0"));
                        }
                        v.abs()
                    }
                }
            }
        })
    }
}

fn permutations3(a: usize, b: usize, c: usize) -> [[usize; 3]; 6] {
    [[a, b, c], [a, c, b], [b, a, c], [b, c, a], [c, a, b], [c, b, a]]
}

impl fmt::Display for Expression {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        Printer(&self.root, &self.vars).fmt(f)
    }
}

struct Printer<'a>(&'a Node, &'a [String]);

impl Printer<'_> {
    fn write(&self, node: &Node, min_prec: u8, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let wrap = node.precedence() < min_prec;
        if wrap {
            f.write_str("(")?;
        }
        match node {
            Node::Const(v) => {
                if *v < 0.0 || (*v == 0.0 && v.is_sign_negative()) {
                    write!(f, "(-{})", -v)?;
                } else {
                    write!(f, "{v}")?;
                }
            }
            Node::Var(i) => f.write_str(&self.1[*i])?,
            Node::Neg(a) => {
                f.write_str("-")?;
                self.write(a, 3, f)?;
            }
            Node::Add(a, b) => self.binary(a, "+", b, 1, f)?,
            Node::Sub(a, b) => self.binary(a, "-", b, 1, f)?,
            Node::Mul(a, b) => self.binary(a, "*", b, 2, f)?,
            Node::Div(a, b) => self.binary(a, "/", b, 2, f)?,
            Node::Pow(a, b) => {
                self.write(a, 5, f)?;
                f.write_str("^")?;
                self.write(b, 3, f)?;
            }
            Node::Func(func, a) => {
                write!(f, "{}(", func.name())?;
                self.write(a, 0, f)?;
                f.write_str(")")?;
            }
        }
        if wrap {
            f.write_str(")")?;
        }
        Ok(())
    }

    fn binary(&self, a: &Node, op: &str, b: &Node, prec: u8, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.write(a, prec, f)?;
        f.write_str(op)?;
        self.write(b, prec + 1, f)
    }
}

impl fmt::Display for Printer<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.write(self.0, 0, f)
    }
}

// --- symbolic differentiation -------------------------------------------

fn is_const(n: &Node, v: f64) -> bool {
    matches!(n, Node::Const(c) if *c == v)
}

fn add(a: Node, b: Node) -> Node {
    match (&a, &b) {
        _ if is_const(&a, 0.0) => b,
        _ if is_const(&b, 0.0) => a,
        (Node::Const(x), Node::Const(y)) => Node::Const(x + y),
        _ => Node::Add(Box::new(a), Box::new(b)),
    }
}

fn sub(a: Node, b: Node) -> Node {
    if is_const(&b, 0.0) {
        a
    } else if is_const(&a, 0.0) {
        neg(b)
    } else {
        Node::Sub(Box::new(a), Box::new(b))
    }
}

fn mul(a: Node, b: Node) -> Node {
    match (&a, &b) {
        _ if is_const(&a, 0.0) || is_const(&b, 0.0) => Node::Const(0.0),
        _ if is_const(&a, 1.0) => b,
        _ if is_const(&b, 1.0) => a,
        (Node::Const(x), Node::Const(y)) if x * y >= 0.0 => Node::Const(x * y),
        _ => Node::Mul(Box::new(a), Box::new(b)),
    }
}

fn div(a: Node, b: Node) -> Node {
    if is_const(&a, 0.0) {
        Node::Const(0.0)
    } else if is_const(&b, 1.0) {
        a
    } else {
        Node::Div(Box::new(a), Box::new(b))
    }
}

fn neg(a: Node) -> Node {
    match a {
        Node::Const(0.0) => Node::Const(0.0),
        Node::Neg(inner) => *inner,
        other => Node::Neg(Box::new(other)),
    }
}

fn num(v: f64) -> Node {
    if v < 0.0 {
        Node::Neg(Box::new(Node::Const(-v)))
    } else {
        Node::Const(v)
    }
}

fn func(f: Func, a: &Node) -> Node {
    Node::Func(f, Box::new(a.clone()))
}

fn diff(node: &Node, v: usize) -> Node {
    match node {
        Node::Const(_) => Node::Const(0.0),
        Node::Var(i) => Node::Const(if *i == v { 1.0 } else { 0.0 }),
        Node::Neg(a) => neg(diff(a, v)),
        Node::Add(a, b) => add(diff(a, v), diff(b, v)),
        Node::Sub(a, b) => sub(diff(a, v), diff(b, v)),
        Node::Mul(a, b) => add(mul(diff(a, v), (**b).clone()), mul((**a).clone(), diff(b, v))),
        Node::Div(a, b) => {
            let da = diff(a, v);
            let db = diff(b, v);
            if is_const(&db, 0.0) {
                div(da, (**b).clone())
            } else {
                div(
                    sub(mul(da, (**b).clone()), mul((**a).clone(), db)),
                    Node::Pow(b.clone(), Box::new(Node::Const(2.0))),
                )
            }
        }
        Node::Pow(a, b) => {
            let da = diff(a, v);
            if !b.has_vars() {
                if is_const(&da, 0.0) {
                    return Node::Const(0.0);
                }
                // d(a^c) = c a^(c-1) da, with c folded when it is a literal
                let lowered = match constant_value(b) {
                    Some(c) if c - 1.0 == 1.0 => (**a).clone(),
                    Some(c) => Node::Pow(a.clone(), Box::new(num(c - 1.0))),
                    None => Node::Pow(a.clone(), Box::new(sub((**b).clone(), Node::Const(1.0)))),
                };
                let coeff = match constant_value(b) {
                    Some(c) => num(c),
                    None => (**b).clone(),
                };
                return mul(mul(coeff, lowered), da);
            }
            // d(a^b) = a^b (b' log a + b a'/a)
            let db = diff(b, v);
            mul(
                node.clone(),
                add(mul(db, func(Func::Log, a)), div(mul((**b).clone(), da), (**a).clone())),
            )
        }
        Node::Func(f, a) => {
            let da = diff(a, v);
            if is_const(&da, 0.0) {
                return Node::Const(0.0);
            }
            let outer = match f {
                Func::Sin => func(Func::Cos, a),
                Func::Cos => neg(func(Func::Sin, a)),
                Func::Tan => add(
                    Node::Const(1.0),
                    Node::Pow(Box::new(func(Func::Tan, a)), Box::new(Node::Const(2.0))),
                ),
                Func::Exp => func(Func::Exp, a),
                Func::Log => return div(da, (**a).clone()),
                Func::Sqrt => {
                    return div(da, mul(Node::Const(2.0), func(Func::Sqrt, a)));
                }
                Func::Abs => div(func(Func::Abs, a), (**a).clone()),
            };
            mul(outer, da)
        }
    }
}

/// Value of a variable-free subtree, when it evaluates cleanly.
fn constant_value(node: &Node) -> Option<f64> {
    if node.has_vars() {
        return None;
    }
    let e = Expression {
        root: node.clone(),
        vars: Vec::new(),
    };
    e.eval(&[]).ok()
}
