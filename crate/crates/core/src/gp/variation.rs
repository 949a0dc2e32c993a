//! Random tree construction, subtree crossover and mutation.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::gp::tree::{Node, ProgramTree, MAX_LENGTH, MIN_LENGTH};

/// Ephemeral random constants are drawn from this closed range.
pub const ERC_RANGE: (f64, f64) = (-1.0, 1.0);
/// Per-node probability of point mutation.
pub const POINT_MUTATION_RATE: f64 = 0.1;
/// Initial depth range for ramped half-and-half.
pub const INIT_DEPTH: (usize, usize) = (2, 6);

const MAX_ATTEMPTS: usize = 20;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Variation {
    Crossover,
    Mutation,
}

pub fn random_terminal<R: Rng + ?Sized>(rng: &mut R, n_vars: usize) -> Node {
    if n_vars > 0 && rng.gen_bool(0.5) {
        Node::Var(rng.gen_range(0..n_vars))
    } else {
        Node::Const(rng.gen_range(ERC_RANGE.0..=ERC_RANGE.1))
    }
}

fn random_function<R: Rng + ?Sized>(rng: &mut R) -> Node {
    let all = [Node::UNARY, Node::BINARY].concat();
    all[rng.gen_range(0..all.len())]
}

/// Appends a random tree of at most `depth` to `out`. `full` forces functions
/// until the depth is reached.
fn build<R: Rng + ?Sized>(rng: &mut R, depth: usize, full: bool, n_vars: usize, out: &mut Vec<Node>) {
    let terminal = depth == 0 || (!full && rng.gen_bool(0.3));
    if terminal {
        out.push(random_terminal(rng, n_vars));
        return;
    }
    let f = random_function(rng);
    out.push(f);
    for _ in 0..f.arity() {
        build(rng, depth - 1, full, n_vars, out);
    }
}

pub fn random_tree<R: Rng + ?Sized>(rng: &mut R, depth: usize, full: bool, n_vars: usize) -> ProgramTree {
    let mut nodes = Vec::new();
    build(rng, depth, full, n_vars, &mut nodes);
    ProgramTree::from_nodes_unchecked(nodes)
}

fn within_limits(len: usize) -> bool {
    (MIN_LENGTH..=MAX_LENGTH).contains(&len)
}

/// Ramped half-and-half member `index`: depth cycles through
/// [`INIT_DEPTH`], alternating full and grow. Retries (shrinking the depth
/// when the full method keeps overshooting) until the length limits hold.
pub fn ramped_half_and_half<R: Rng + ?Sized>(rng: &mut R, index: usize, n_vars: usize) -> ProgramTree {
    let span = INIT_DEPTH.1 - INIT_DEPTH.0 + 1;
    let mut depth = INIT_DEPTH.0 + index % span;
    let full = (index / span).is_multiple_of(2);
    loop {
        for _ in 0..MAX_ATTEMPTS {
            let t = random_tree(rng, depth, full, n_vars);
            if within_limits(t.len()) {
                return t;
            }
        }
        depth = (depth - 1).max(INIT_DEPTH.0);
        if depth == INIT_DEPTH.0 {
            // grow at the minimum depth always reaches a valid length eventually
            let t = random_tree(rng, depth, true, n_vars);
            if within_limits(t.len()) {
                return t;
            }
        }
    }
}

/// Child of `a` with the subtree at `at` replaced by `b`'s subtree at `from`.
pub fn crossover_at(a: &ProgramTree, at: usize, b: &ProgramTree, from: usize) -> ProgramTree {
    a.replace_subtree(at, b.subtree(from))
}

pub fn subtree_crossover<R: Rng + ?Sized>(rng: &mut R, a: &ProgramTree, b: &ProgramTree) -> ProgramTree {
    for _ in 0..MAX_ATTEMPTS {
        let i = rng.gen_range(0..a.len());
        let j = rng.gen_range(0..b.len());
        let child = crossover_at(a, i, b, j);
        if within_limits(child.len()) {
            return child;
        }
    }
    a.clone()
}

/// Point mutation: each node is replaced, with probability
/// [`POINT_MUTATION_RATE`], by a random primitive of the same arity. A pass
/// that draws no node returns an unchanged copy. Every arity in the primitive
/// set has alternatives, so no subtree fallback is needed.
pub fn mutate<R: Rng + ?Sized>(rng: &mut R, parent: &ProgramTree, n_vars: usize) -> ProgramTree {
    let mut child = parent.clone();
    for node in child.nodes_mut() {
        if !rng.gen_bool(POINT_MUTATION_RATE) {
            continue;
        }
        *node = match node.arity() {
            0 => random_terminal(rng, n_vars),
            1 => Node::UNARY[rng.gen_range(0..4)],
            _ => Node::BINARY[rng.gen_range(0..4)],
        };
    }
    child
}

/// Produces one child: crossover with probability `crossover_rate`, otherwise
/// mutation of `a`.
pub fn vary<R: Rng + ?Sized>(
    rng: &mut R,
    a: &ProgramTree,
    b: &ProgramTree,
    crossover_rate: f64,
    n_vars: usize,
) -> (ProgramTree, Variation) {
    if rng.gen_bool(crossover_rate.clamp(0.0, 1.0)) {
        (subtree_crossover(rng, a, b), Variation::Crossover)
    } else {
        (mutate(rng, a, n_vars), Variation::Mutation)
    }
}
