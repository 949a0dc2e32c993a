//! Vectorised tree evaluation with protected operators.
//!
//! Every node output is kept finite: division by a near-zero denominator
//! yields 1, `log` takes the absolute value of its argument, `exp` is capped,
//! and anything that still comes out non-finite is replaced by [`PENALTY`].

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::error_model::PENALTY;
use crate::gp::tree::{Node, ProgramTree};

/// Denominators smaller than this in magnitude make `/` return 1.
pub const DIV_GUARD: f64 = 1e-12;

/// Input samples stored column-wise (one vector per feature).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleMatrix {
    columns: Vec<Vec<f64>>,
    samples: usize,
}

impl SampleMatrix {
    pub fn from_columns(columns: Vec<Vec<f64>>) -> Result<Self> {
        let samples = columns.first().map(Vec::len).unwrap_or(0);
        if columns.iter().any(|c| c.len() != samples) {
            return Err(Error::invalid("feature columns have different lengths"));
        }
        Ok(Self { columns, samples })
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let d = rows.first().map(|r| r.as_ref().len()).unwrap_or(0);
        let mut columns = vec![Vec::with_capacity(rows.len()); d];
        for (i, r) in rows.iter().enumerate() {
            let r = r.as_ref();
            if r.len() != d {
                return Err(Error::invalid(format!("sample {i} has {} features, expected {d}", r.len())));
            }
            for (c, v) in columns.iter_mut().zip(r) {
                c.push(*v);
            }
        }
        Ok(Self { columns, samples: rows.len() })
    }

    pub fn samples(&self) -> usize {
        self.samples
    }

    pub fn features(&self) -> usize {
        self.columns.len()
    }

    pub fn column(&self, feature: usize) -> &[f64] {
        &self.columns[feature]
    }

    /// Subset of samples, in the given order.
    pub fn select(&self, indices: &[usize]) -> SampleMatrix {
        let columns = self.columns.iter().map(|c| indices.iter().map(|&i| c[i]).collect()).collect();
        SampleMatrix { columns, samples: indices.len() }
    }
}

#[inline]
fn finite_or_penalty(v: f64) -> f64 {
    if v.is_finite() {
        v
    } else {
        PENALTY
    }
}

#[inline]
fn unary(op: Node, x: f64) -> f64 {
    let v = match op {
        Node::Sin => x.sin(),
        Node::Cos => x.cos(),
        Node::Exp => x.exp().min(PENALTY),
        Node::Log => x.abs().ln(),
        _ => unreachable!("not a unary operator"),
    };
    finite_or_penalty(v)
}

#[inline]
fn binary(op: Node, a: f64, b: f64) -> f64 {
    let v = match op {
        Node::Add => a + b,
        Node::Sub => a - b,
        Node::Mul => a * b,
        Node::Div => {
            if b.abs() < DIV_GUARD {
                1.0
            } else {
                a / b
            }
        }
        _ => unreachable!("not a binary operator"),
    };
    finite_or_penalty(v)
}

/// Evaluates `tree` on every sample; the result is always finite.
pub fn evaluate(tree: &ProgramTree, inputs: &SampleMatrix) -> Result<Vec<f64>> {
    if let Some(v) = tree.max_var() {
        if v >= inputs.features() {
            return Err(Error::invalid(format!("tree uses x{v} but inputs have {} features", inputs.features())));
        }
    }
    let s = inputs.samples();
    let mut stack: Vec<Vec<f64>> = Vec::new();
    for &node in tree.nodes().iter().rev() {
        match node {
            Node::Var(i) => stack.push(inputs.column(i).to_vec()),
            Node::Const(c) => stack.push(vec![finite_or_penalty(c); s]),
            Node::Sin | Node::Cos | Node::Exp | Node::Log => {
                let mut a = stack.pop().expect("well-formed tree");
                for x in &mut a {
                    *x = unary(node, *x);
                }
                stack.push(a);
            }
            Node::Add | Node::Sub | Node::Mul | Node::Div => {
                // reversed prefix order: the left operand is on top
                let mut left = stack.pop().expect("well-formed tree");
                let right = stack.pop().expect("well-formed tree");
                for (a, b) in left.iter_mut().zip(&right) {
                    *a = binary(node, *a, *b);
                }
                stack.push(left);
            }
        }
    }
    Ok(stack.pop().expect("well-formed tree"))
}
