use alloc::vec::Vec;

use super::{boolean_bits, classify_cause, CauseKind, DepsMap, GroundTruthError, Responsibility, ResponsibilityMap};
use crate::formula::{Assignment, Formula};

/// Node-visit counts of the two passes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ReadOnceStats {
    pub depends_visits: usize,
    pub responsibility_visits: usize,
}

#[derive(Debug, Clone, Copy)]
struct NodeInfo {
    deps: u32,
    /// `None` for leaves.
    cause: Option<CauseKind>,
    /// Pre-order id of the right child, if any.
    right: usize,
}

struct Annotation {
    nodes: Vec<NodeInfo>,
    visits: usize,
}

impl Annotation {
    /// Post-order evaluation, pre-order numbering. Returns the node's value.
    fn visit(&mut self, node: &Formula, bits: u64) -> bool {
        self.visits += 1;
        let id = self.nodes.len();
        self.nodes.push(NodeInfo {
            deps: 1,
            cause: None,
            right: 0,
        });
        match node.children() {
            (None, _) => (bits >> leaf_index(node)) & 1 == 1,
            (Some(child), None) => {
                let value = self.visit(child, bits);
                self.nodes[id].deps = self.nodes[id + 1].deps;
                self.nodes[id].cause = Some(CauseKind::Pass);
                !value
            }
            (Some(l), Some(r)) => {
                let op = node.operator().expect("binary node");
                let left = self.visit(l, bits);
                let right_id = self.nodes.len();
                let right = self.visit(r, bits);
                let (dl, dr) = (self.nodes[id + 1].deps, self.nodes[right_id].deps);
                let cause = classify_cause(op, left, right);
                self.nodes[id] = NodeInfo {
                    deps: match cause {
                        CauseKind::Both => dl + dr,
                        CauseKind::Either => dl.min(dr),
                        CauseKind::Left | CauseKind::Pass => dl,
                        CauseKind::Right => dr,
                    },
                    cause: Some(cause),
                    right: right_id,
                };
                op.apply(left, right)
            }
        }
    }
}

fn leaf_index(node: &Formula) -> usize {
    match node {
        Formula::Var(i) => *i,
        _ => unreachable!("leaf_index on a gate"),
    }
}

fn annotate(formula: &Formula, assignment: &Assignment) -> Result<Annotation, GroundTruthError> {
    if !formula.meta().read_once {
        return Err(GroundTruthError::NotReadOnce);
    }
    let bits = boolean_bits(formula, assignment)?;
    let mut ann = Annotation {
        nodes: Vec::with_capacity(formula.size()),
        visits: 0,
    };
    ann.visit(formula, bits);
    Ok(ann)
}

/// Bottom-up pass: per-node minimum number of leaf flips that change the
/// node's value. At the root this is the smallest number of variables that
/// must change to change the formula's output.
pub fn depends(formula: &Formula, assignment: &Assignment) -> Result<DepsMap, GroundTruthError> {
    let ann = annotate(formula, assignment)?;
    Ok(DepsMap(ann.nodes.into_iter().map(|n| n.deps).collect()))
}

/// Exact responsibility of every variable of a read-once formula in
/// `O(|formula|)` time.
pub fn responsibility_read_once(
    formula: &Formula,
    assignment: &Assignment,
) -> Result<ResponsibilityMap, GroundTruthError> {
    responsibility_read_once_with_stats(formula, assignment).map(|(map, _)| map)
}

pub fn responsibility_read_once_with_stats(
    formula: &Formula,
    assignment: &Assignment,
) -> Result<(ResponsibilityMap, ReadOnceStats), GroundTruthError> {
    let ann = annotate(formula, assignment)?;
    let mut map = ResponsibilityMap::zeros(assignment.width());
    let mut visits = 0;
    distribute(formula, 0, 0, &ann.nodes, &mut map, &mut visits);
    Ok((
        map,
        ReadOnceStats {
            depends_visits: ann.visits,
            responsibility_visits: visits,
        },
    ))
}

/// Top-down pass. `ctx` is the size of the witness collected on the way
/// down; a leaf reached with `ctx` has responsibility `1/(1+ctx)`. Subtrees
/// that are never entered keep responsibility 0.
fn distribute(
    node: &Formula,
    id: usize,
    ctx: u32,
    nodes: &[NodeInfo],
    map: &mut ResponsibilityMap,
    visits: &mut usize,
) {
    *visits += 1;
    let info = nodes[id];
    let (left, right) = node.children();
    let left_id = id + 1;
    match info.cause {
        None => map.set(leaf_index(node), Responsibility::from_witness_size(ctx)),
        Some(CauseKind::Pass) | Some(CauseKind::Left) => {
            distribute(left.unwrap(), left_id, ctx, nodes, map, visits)
        }
        Some(CauseKind::Right) => distribute(right.unwrap(), info.right, ctx, nodes, map, visits),
        Some(CauseKind::Either) => {
            distribute(left.unwrap(), left_id, ctx, nodes, map, visits);
            distribute(right.unwrap(), info.right, ctx, nodes, map, visits);
        }
        Some(CauseKind::Both) => {
            let (dl, dr) = (nodes[left_id].deps, nodes[info.right].deps);
            distribute(left.unwrap(), left_id, ctx + dr, nodes, map, visits);
            distribute(right.unwrap(), info.right, ctx + dl, nodes, map, visits);
        }
    }
}
