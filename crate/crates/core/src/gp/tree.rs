use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Program length limits applied after every variation.
pub const MIN_LENGTH: usize = 3;
pub const MAX_LENGTH: usize = 50;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Node {
    Var(usize),
    Const(f64),
    Add,
    Sub,
    Mul,
    Div,
    Sin,
    Cos,
    Exp,
    Log,
}

impl Node {
    pub const UNARY: [Node; 4] = [Node::Sin, Node::Cos, Node::Exp, Node::Log];
    pub const BINARY: [Node; 4] = [Node::Add, Node::Sub, Node::Mul, Node::Div];

    pub fn arity(self) -> usize {
        match self {
            Node::Var(_) | Node::Const(_) => 0,
            Node::Sin | Node::Cos | Node::Exp | Node::Log => 1,
            Node::Add | Node::Sub | Node::Mul | Node::Div => 2,
        }
    }

    pub fn is_terminal(self) -> bool {
        self.arity() == 0
    }

    fn symbol(self) -> Option<&'static str> {
        Some(match self {
            Node::Add => "+",
            Node::Sub => "-",
            Node::Mul => "*",
            Node::Div => "/",
            Node::Sin => "sin",
            Node::Cos => "cos",
            Node::Exp => "exp",
            Node::Log => "log",
            Node::Var(_) | Node::Const(_) => return None,
        })
    }
}

impl fmt::Display for Node {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Node::Var(i) => write!(f, "x{i}"),
            Node::Const(c) => write!(f, "{c}"),
            op => f.write_str(op.symbol().unwrap_or("?")),
        }
    }
}

impl FromStr for Node {
    type Err = Error;

    fn from_str(tok: &str) -> Result<Self> {
        let node = match tok {
            "+" => Node::Add,
            "-" => Node::Sub,
            "*" => Node::Mul,
            "/" => Node::Div,
            "sin" => Node::Sin,
            "cos" => Node::Cos,
            "exp" => Node::Exp,
            "log" => Node::Log,
            _ => {
                if let Some(idx) = tok.strip_prefix('x') {
                    Node::Var(idx.parse().map_err(|_| Error::invalid(format!("bad variable {tok:?}")))?)
                } else {
                    Node::Const(tok.parse().map_err(|_| Error::invalid(format!("bad token {tok:?}")))?)
                }
            }
        };
        Ok(node)
    }
}

/// Expression tree stored in prefix order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProgramTree {
    nodes: Vec<Node>,
}

impl ProgramTree {
    /// Wraps a prefix sequence after checking that arities close exactly.
    pub fn new(nodes: Vec<Node>) -> Result<Self> {
        let mut open = 1usize;
        for (i, n) in nodes.iter().enumerate() {
            if open == 0 {
                return Err(Error::invalid(format!("trailing nodes after position {i}")));
            }
            open = open - 1 + n.arity();
        }
        if open != 0 || nodes.is_empty() {
            return Err(Error::invalid("incomplete prefix expression"));
        }
        Ok(Self { nodes })
    }

    pub(crate) fn from_nodes_unchecked(nodes: Vec<Node>) -> Self {
        debug_assert!(Self::new(nodes.clone()).is_ok());
        Self { nodes }
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Exclusive end of the subtree rooted at `start`.
    pub fn subtree_end(&self, start: usize) -> usize {
        subtree_end(&self.nodes, start)
    }

    pub fn subtree(&self, start: usize) -> &[Node] {
        &self.nodes[start..self.subtree_end(start)]
    }

    pub fn depth(&self) -> usize {
        let mut max = 0;
        let mut stack: Vec<usize> = Vec::new(); // remaining children per open ancestor
        for n in &self.nodes {
            max = max.max(stack.len());
            if let Some(top) = stack.last_mut() {
                *top -= 1;
            }
            if n.arity() > 0 {
                stack.push(n.arity());
            }
            while stack.last() == Some(&0) {
                stack.pop();
            }
        }
        max
    }

    /// Highest variable index used, if any.
    pub fn max_var(&self) -> Option<usize> {
        self.nodes.iter().filter_map(|n| if let Node::Var(i) = n { Some(*i) } else { None }).max()
    }

    /// Copy with the subtree at `start` replaced by `replacement`.
    pub fn replace_subtree(&self, start: usize, replacement: &[Node]) -> ProgramTree {
        let end = self.subtree_end(start);
        let mut nodes = Vec::with_capacity(self.len() - (end - start) + replacement.len());
        nodes.extend_from_slice(&self.nodes[..start]);
        nodes.extend_from_slice(replacement);
        nodes.extend_from_slice(&self.nodes[end..]);
        ProgramTree::from_nodes_unchecked(nodes)
    }

    pub(crate) fn nodes_mut(&mut self) -> &mut [Node] {
        &mut self.nodes
    }
}

pub(crate) fn subtree_end(nodes: &[Node], start: usize) -> usize {
    let mut need = 1usize;
    let mut i = start;
    while need > 0 {
        need = need - 1 + nodes[i].arity();
        i += 1;
    }
    i
}

impl fmt::Display for ProgramTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, n) in self.nodes.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{n}")?;
        }
        Ok(())
    }
}

/// Parses whitespace-separated prefix tokens, e.g. `"+ x0 * 2 x1"`.
impl FromStr for ProgramTree {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let nodes = s.split_whitespace().map(str::parse).collect::<Result<Vec<Node>>>()?;
        ProgramTree::new(nodes)
    }
}
