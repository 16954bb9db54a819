use std::fmt;

use crate::span::SourceSpan;

/// Stable node identity within one compilation. Also the memo-table key.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodeId(u32);

impl NodeId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Debug for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

/// Per-node payload of a tree. The variant name selects equations, the
/// child role selects inherited equations on the parent.
pub trait NodeData: Clone + fmt::Debug + 'static {
    fn variant(&self) -> &'static str;

    fn child_role(&self, _index: usize) -> &'static str {
        "child"
    }
}

/// Where a node hangs below its parent.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Slot {
    /// The tree root, or a node not (yet) placed anywhere.
    Detached,
    Child(usize),
    /// Root of a non-terminal attribute value, owned by the parent but not
    /// one of its children.
    Attached(&'static str),
}

#[derive(Clone, Debug)]
pub struct Node<K> {
    pub data: K,
    pub span: SourceSpan,
    parent: Option<NodeId>,
    slot: Slot,
    children: Vec<NodeId>,
    copied_from: Option<NodeId>,
    rewritten_from: Option<NodeId>,
}

/// Arena of nodes. Nodes are never freed during a compilation, so ids
/// held by attribute values stay valid even after a rewrite detaches them.
#[derive(Clone, Debug)]
pub struct Tree<K> {
    nodes: Vec<Node<K>>,
    root: Option<NodeId>,
}

impl<K: NodeData> Default for Tree<K> {
    fn default() -> Self {
        Tree::new()
    }
}

impl<K: NodeData> Tree<K> {
    pub fn new() -> Self {
        Tree {
            nodes: Vec::new(),
            root: None,
        }
    }

    /// Adds a node owning `children`, which must be detached.
    pub fn add(&mut self, data: K, span: SourceSpan, children: Vec<NodeId>) -> NodeId {
        let id = NodeId(self.nodes.len() as u32);
        for (i, &c) in children.iter().enumerate() {
            let child = &mut self.nodes[c.index()];
            assert!(child.parent.is_none(), "node {c:?} already has a parent");
            child.parent = Some(id);
            child.slot = Slot::Child(i);
        }
        self.nodes.push(Node {
            data,
            span,
            parent: None,
            slot: Slot::Detached,
            children,
            copied_from: None,
            rewritten_from: None,
        });
        id
    }

    pub fn set_root(&mut self, root: NodeId) {
        assert!(self.nodes[root.index()].parent.is_none());
        self.root = Some(root);
    }

    pub fn root(&self) -> NodeId {
        self.root.expect("tree has no root")
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn node(&self, id: NodeId) -> &Node<K> {
        &self.nodes[id.index()]
    }

    pub fn data(&self, id: NodeId) -> &K {
        &self.nodes[id.index()].data
    }

    pub fn variant(&self, id: NodeId) -> &'static str {
        self.data(id).variant()
    }

    pub fn span(&self, id: NodeId) -> &SourceSpan {
        &self.nodes[id.index()].span
    }

    pub fn parent(&self, id: NodeId) -> Option<NodeId> {
        self.nodes[id.index()].parent
    }

    pub fn slot(&self, id: NodeId) -> Slot {
        self.nodes[id.index()].slot
    }

    /// Current children, without applying any pending rewrite.
    pub fn children(&self, id: NodeId) -> &[NodeId] {
        &self.nodes[id.index()].children
    }

    /// Role of `id` as seen from its parent.
    pub fn role(&self, id: NodeId) -> Option<&'static str> {
        let parent = self.parent(id)?;
        match self.slot(id) {
            Slot::Child(i) => Some(self.data(parent).child_role(i)),
            Slot::Attached(role) => Some(role),
            Slot::Detached => None,
        }
    }

    /// Source node this node was copied from, if it is a copy.
    pub fn copied_from(&self, id: NodeId) -> Option<NodeId> {
        self.nodes[id.index()].copied_from
    }

    pub fn is_copy(&self, id: NodeId) -> bool {
        self.copied_from(id).is_some()
    }

    /// The node a copy stands for, or the node itself.
    pub fn origin(&self, id: NodeId) -> NodeId {
        self.copied_from(id).unwrap_or(id)
    }

    pub fn rewritten_from(&self, id: NodeId) -> Option<NodeId> {
        self.nodes[id.index()].rewritten_from
    }

    /// Follows rewrite history back to the node that first occupied this
    /// position.
    pub fn original(&self, mut id: NodeId) -> NodeId {
        while let Some(prev) = self.rewritten_from(id) {
            id = prev;
        }
        id
    }

    /// Deep copy of the subtree at `src`. The copy is detached and every
    /// copied node remembers the source node it stands for.
    pub fn clone_subtree(&mut self, src: NodeId) -> NodeId {
        let children: Vec<NodeId> = self.children(src).to_vec();
        let copies = children
            .into_iter()
            .map(|c| self.clone_subtree(c))
            .collect();
        let node = self.node(src);
        let (data, span, origin) = (node.data.clone(), node.span.clone(), self.origin(src));
        let id = self.add(data, span, copies);
        self.nodes[id.index()].copied_from = Some(origin);
        id
    }

    /// Puts detached `new` at the position of `old`. `old` keeps its own
    /// parent pointer but is no longer reachable from the root.
    pub fn replace(&mut self, old: NodeId, new: NodeId) {
        assert!(self.nodes[new.index()].parent.is_none());
        let parent = self.parent(old);
        let slot = self.slot(old);
        if let (Some(p), Slot::Child(i)) = (parent, slot) {
            self.nodes[p.index()].children[i] = new;
        }
        if self.root == Some(old) {
            self.root = Some(new);
        }
        let n = &mut self.nodes[new.index()];
        n.parent = parent;
        n.slot = slot;
        n.rewritten_from = Some(old);
    }

    /// Hangs detached `node` below `parent` without making it a child.
    pub fn attach(&mut self, parent: NodeId, node: NodeId, role: &'static str) {
        let n = &mut self.nodes[node.index()];
        assert!(n.parent.is_none());
        n.parent = Some(parent);
        n.slot = Slot::Attached(role);
    }

    /// Pre-order over the current tree, children only.
    pub fn preorder(&self) -> Vec<NodeId> {
        let mut out = Vec::new();
        let mut stack = vec![self.root()];
        while let Some(n) = stack.pop() {
            out.push(n);
            stack.extend(self.children(n).iter().rev());
        }
        out
    }

    pub fn ancestors(&self, id: NodeId) -> impl Iterator<Item = NodeId> + '_ {
        std::iter::successors(self.parent(id), move |&p| self.parent(p))
    }
}
