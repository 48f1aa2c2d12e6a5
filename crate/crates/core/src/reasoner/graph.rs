use std::collections::{BTreeSet, HashMap, VecDeque};
use std::fmt::Write as _;

use thiserror::Error;

use crate::extractor::{ElementInfo, RuleSets};
use crate::sim::{ElementState, EnvAction, Item};

pub type NodeId = usize;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ReasonError {
    #[error("unknown node {0}")]
    UnknownNode(NodeId),
    #[error("malformed precondition line: {0}")]
    Malformed(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Node {
    Info(ElementInfo),
    /// Fresh per player-caused rule.
    Action {
        rule: usize,
        action: EnvAction,
    },
}

/// One rule instantiated in the graph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GraphRule {
    pub prerequisites: Vec<NodeId>,
    /// After-infos whose state differs from the before-info.
    pub results: Vec<NodeId>,
    /// `None` for spontaneous rules.
    pub action_node: Option<NodeId>,
}

impl GraphRule {
    pub fn is_spontaneous(&self) -> bool {
        self.action_node.is_none()
    }
}

/// Bipartite transition graph. Equal element infos share a node, except
/// `player.empty`, which gets a fresh node at every occurrence.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TransitionGraph {
    nodes: Vec<Node>,
    index: HashMap<ElementInfo, NodeId>,
    rules: Vec<GraphRule>,
    edges: Vec<(NodeId, NodeId)>,
    /// Rules in which each node is a prerequisite.
    as_prereq: Vec<Vec<usize>>,
}

fn is_player_empty(info: &ElementInfo) -> bool {
    info.point_type().is_none() && info.state == ElementState::Held(Item::Empty)
}

impl TransitionGraph {
    pub fn build(rules: &RuleSets) -> Self {
        let mut g = TransitionGraph::default();
        for r in &rules.player {
            let id = g.rules.len();
            let action = g.push_node(Node::Action {
                rule: id,
                action: r.action,
            });
            let prerequisites: Vec<NodeId> = r
                .signature
                .changes()
                .iter()
                .map(|c| g.info_node(c.before))
                .collect();
            let results: Vec<NodeId> = r
                .signature
                .changes()
                .iter()
                .filter(|c| c.state_changed())
                .map(|c| g.info_node(c.after))
                .collect();
            for &p in &prerequisites {
                g.edges.push((p, action));
            }
            for &q in &results {
                g.edges.push((action, q));
            }
            g.add_rule(GraphRule {
                prerequisites,
                results,
                action_node: Some(action),
            });
        }
        for s in &rules.spontaneous {
            let prerequisites: Vec<NodeId> =
                s.changes().iter().map(|c| g.info_node(c.before)).collect();
            let results: Vec<NodeId> = s
                .changes()
                .iter()
                .filter(|c| c.state_changed())
                .map(|c| g.info_node(c.after))
                .collect();
            for (&p, &q) in prerequisites.iter().zip(&results) {
                g.edges.push((p, q));
            }
            g.add_rule(GraphRule {
                prerequisites,
                results,
                action_node: None,
            });
        }
        g
    }

    fn push_node(&mut self, n: Node) -> NodeId {
        self.nodes.push(n);
        self.as_prereq.push(Vec::new());
        self.nodes.len() - 1
    }

    fn info_node(&mut self, info: ElementInfo) -> NodeId {
        if is_player_empty(&info) {
            return self.push_node(Node::Info(info));
        }
        if let Some(&id) = self.index.get(&info) {
            return id;
        }
        let id = self.push_node(Node::Info(info));
        self.index.insert(info, id);
        id
    }

    fn add_rule(&mut self, rule: GraphRule) {
        let id = self.rules.len();
        for &p in &rule.prerequisites {
            if !self.as_prereq[p].contains(&id) {
                self.as_prereq[p].push(id);
            }
        }
        self.rules.push(rule);
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn rules(&self) -> &[GraphRule] {
        &self.rules
    }

    pub fn edges(&self) -> &[(NodeId, NodeId)] {
        &self.edges
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn info(&self, id: NodeId) -> Option<&ElementInfo> {
        match self.nodes.get(id) {
            Some(Node::Info(i)) => Some(i),
            _ => None,
        }
    }

    /// All nodes carrying `info` (several for `player.empty`).
    pub fn nodes_of(&self, info: &ElementInfo) -> Vec<NodeId> {
        self.nodes
            .iter()
            .enumerate()
            .filter_map(|(i, n)| matches!(n, Node::Info(x) if x == info).then_some(i))
            .collect()
    }

    pub fn rules_with_prerequisite(&self, node: NodeId) -> Result<&[usize], ReasonError> {
        self.as_prereq
            .get(node)
            .map(Vec::as_slice)
            .ok_or(ReasonError::UnknownNode(node))
    }

    /// Definition 1: the other prerequisites of every rule `node` takes part
    /// in.
    pub fn conjunctive_conditions(&self, node: NodeId) -> Result<BTreeSet<NodeId>, ReasonError> {
        let mut out = BTreeSet::new();
        for &r in self.rules_with_prerequisite(node)? {
            out.extend(
                self.rules[r]
                    .prerequisites
                    .iter()
                    .copied()
                    .filter(|&p| p != node),
            );
        }
        Ok(out)
    }

    /// Definition 2: the after-infos of every rule `node` takes part in.
    pub fn results(&self, node: NodeId) -> Result<BTreeSet<NodeId>, ReasonError> {
        let mut out = BTreeSet::new();
        for &r in self.rules_with_prerequisite(node)? {
            out.extend(self.rules[r].results.iter().copied());
        }
        Ok(out)
    }

    /// [`results`](Self::results) followed through any chain of spontaneous
    /// rules.
    pub fn expanded_results(&self, node: NodeId) -> Result<BTreeSet<NodeId>, ReasonError> {
        let mut out = self.results(node)?;
        let mut queue: VecDeque<NodeId> = out.iter().copied().collect();
        while let Some(n) = queue.pop_front() {
            for &r in &self.as_prereq[n] {
                if self.rules[r].is_spontaneous() {
                    for &q in &self.rules[r].results {
                        if out.insert(q) {
                            queue.push_back(q);
                        }
                    }
                }
            }
        }
        Ok(out)
    }

    /// Graphviz rendering.
    pub fn to_dot(&self) -> String {
        let mut s = String::from("digraph transitions {\n  rankdir=LR;\n");
        for (i, n) in self.nodes.iter().enumerate() {
            match n {
                Node::Info(info) => {
                    let _ = writeln!(s, "  n{i} [label=\"{info}\"];");
                }
                Node::Action { action, .. } => {
                    let _ = writeln!(s, "  n{i} [label=\"{action}\", shape=box];");
                }
            }
        }
        for (a, b) in &self.edges {
            let _ = writeln!(s, "  n{a} -> n{b};");
        }
        s.push_str("}\n");
        s
    }
}
