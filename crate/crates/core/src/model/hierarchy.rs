use std::collections::HashMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::geo::Centroid;
use crate::error::{Error, Result};

/// One of the five event dimensions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Dimension {
    Location,
    Date,
    Disease,
    Host,
    Source,
}

impl Dimension {
    /// Single-letter code: Z, T, D, H or S.
    pub fn code(self) -> char {
        match self {
            Dimension::Location => 'Z',
            Dimension::Date => 'T',
            Dimension::Disease => 'D',
            Dimension::Host => 'H',
            Dimension::Source => 'S',
        }
    }

    pub fn root_label(self) -> String {
        format!("ALL_{}", self.code())
    }
}

impl fmt::Display for Dimension {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Dimension::Location => "location",
            Dimension::Date => "date",
            Dimension::Disease => "disease",
            Dimension::Host => "host",
            Dimension::Source => "source",
        };
        f.write_str(name)
    }
}

/// Administrative level of a spatial node, ordered from coarse to fine.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AdminLevel {
    World,
    Continent,
    Country,
    Region,
    Subregion,
    City,
}

impl AdminLevel {
    pub fn as_str(self) -> &'static str {
        match self {
            AdminLevel::World => "world",
            AdminLevel::Continent => "continent",
            AdminLevel::Country => "country",
            AdminLevel::Region => "region",
            AdminLevel::Subregion => "subregion",
            AdminLevel::City => "city",
        }
    }
}

impl fmt::Display for AdminLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for AdminLevel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "world" => Ok(AdminLevel::World),
            "continent" => Ok(AdminLevel::Continent),
            "country" => Ok(AdminLevel::Country),
            "region" => Ok(AdminLevel::Region),
            "subregion" => Ok(AdminLevel::Subregion),
            "city" => Ok(AdminLevel::City),
            other => Err(Error::Config(format!("unknown admin level {other:?}"))),
        }
    }
}

/// Handle to a node of a specific hierarchy. The dimension tag lets
/// operations reject nodes that come from a different hierarchy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodeId {
    dim: Dimension,
    index: u32,
}

impl NodeId {
    pub fn dimension(self) -> Dimension {
        self.dim
    }

    pub fn index(self) -> usize {
        self.index as usize
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Node {
    /// External identifier, unique within the hierarchy.
    pub key: String,
    pub label: String,
    pub depth: u32,
    pub parent: Option<NodeId>,
    pub admin_level: Option<AdminLevel>,
    pub centroid: Option<Centroid>,
}

/// A rooted tree of domain values for one dimension.
#[derive(Debug, Clone)]
pub struct Hierarchy {
    dim: Dimension,
    nodes: Vec<Node>,
    by_key: HashMap<String, NodeId>,
    by_label: HashMap<String, Vec<NodeId>>,
}

#[derive(Debug, Deserialize)]
struct HierarchyRow {
    node_id: String,
    label: String,
    depth: u32,
    #[serde(default)]
    parent_id: String,
    #[serde(default)]
    admin_level: Option<String>,
    #[serde(default)]
    lat: Option<f64>,
    #[serde(default)]
    lon: Option<f64>,
}

/// Spec for one node when building a hierarchy programmatically.
#[derive(Debug, Clone)]
pub struct NodeSpec {
    pub key: String,
    pub label: String,
    pub parent: Option<String>,
    pub depth: Option<u32>,
    pub admin_level: Option<AdminLevel>,
    pub centroid: Option<Centroid>,
}

impl NodeSpec {
    pub fn new(key: impl Into<String>, label: impl Into<String>, parent: Option<&str>) -> Self {
        NodeSpec {
            key: key.into(),
            label: label.into(),
            parent: parent.map(str::to_owned),
            depth: None,
            admin_level: None,
            centroid: None,
        }
    }

    pub fn admin(mut self, level: AdminLevel) -> Self {
        self.admin_level = Some(level);
        self
    }

    pub fn at(mut self, lat: f64, lon: f64) -> Self {
        self.centroid = Some(Centroid { lat, lon });
        self
    }
}

fn fold(label: &str) -> String {
    label.trim().to_lowercase()
}

impl Hierarchy {
    /// Builds a hierarchy from node specs listed in any order. The root is the
    /// single spec without a parent.
    pub fn from_specs(dim: Dimension, specs: Vec<NodeSpec>) -> Result<Self> {
        Self::from_specs_with_lines(dim, specs.into_iter().map(|s| (0, s)).collect(), None)
    }

    /// A two-level hierarchy: the root plus one leaf per key (label = key).
    pub fn flat<I, S>(dim: Dimension, keys: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let root_key = dim.root_label();
        let mut specs = vec![NodeSpec::new(root_key.clone(), root_key.clone(), None)];
        for k in keys {
            let k = k.as_ref();
            specs.push(NodeSpec::new(k, k, Some(&root_key)));
        }
        Self::from_specs(dim, specs)
    }

    pub fn load(dim: Dimension, path: &Path) -> Result<Self> {
        let mut specs = Vec::new();
        crate::csvio::read_rows(path, |line, row: HierarchyRow| {
            let admin_level = match row.admin_level.as_deref().map(str::trim) {
                None | Some("") => None,
                Some(s) => Some(
                    s.parse::<AdminLevel>()
                        .map_err(|e| Error::parse(path, line, e.to_string()))?,
                ),
            };
            let centroid = match (row.lat, row.lon) {
                (Some(lat), Some(lon)) => Some(
                    Centroid::new(lat, lon).map_err(|e| Error::parse(path, line, e.to_string()))?,
                ),
                (None, None) => None,
                _ => return Err(Error::parse(path, line, "lat and lon must be given together")),
            };
            let parent = (!row.parent_id.is_empty()).then_some(row.parent_id);
            specs.push((
                line,
                NodeSpec {
                    key: row.node_id,
                    label: row.label,
                    parent,
                    depth: Some(row.depth),
                    admin_level,
                    centroid,
                },
            ));
            Ok(())
        })?;
        Self::from_specs_with_lines(dim, specs, Some(path))
    }

    fn from_specs_with_lines(
        dim: Dimension,
        specs: Vec<(u64, NodeSpec)>,
        path: Option<&Path>,
    ) -> Result<Self> {
        let fail = |line: u64, msg: String| match path {
            Some(p) => Error::parse(p, line, msg),
            None => Error::Data(format!("{dim} hierarchy: {msg}")),
        };

        let mut by_key: HashMap<String, NodeId> = HashMap::new();
        for (i, (line, spec)) in specs.iter().enumerate() {
            if spec.key.is_empty() {
                return Err(fail(*line, "empty node_id".into()));
            }
            let id = NodeId {
                dim,
                index: i as u32,
            };
            if by_key.insert(spec.key.clone(), id).is_some() {
                return Err(fail(*line, format!("duplicate node_id {:?}", spec.key)));
            }
        }

        let roots: Vec<_> = specs.iter().filter(|(_, s)| s.parent.is_none()).collect();
        match roots.len() {
            1 => {}
            0 => return Err(fail(0, "no root node (row with empty parent_id)".into())),
            _ => {
                return Err(fail(
                    roots[1].0,
                    format!("second root {:?}; exactly one root is allowed", roots[1].1.key),
                ))
            }
        }

        let mut parents = Vec::with_capacity(specs.len());
        for (line, spec) in &specs {
            let parent = match &spec.parent {
                None => None,
                Some(p) => match by_key.get(p) {
                    Some(&pid) => Some(pid),
                    None => {
                        return Err(fail(*line, format!("unknown parent_id {p:?} for {:?}", spec.key)))
                    }
                },
            };
            parents.push(parent);
        }

        // depths by walking to the root; a walk longer than the node count is a cycle
        let n = specs.len();
        let mut depths = vec![u32::MAX; n];
        for start in 0..n {
            let mut chain = vec![start];
            let mut cur = start;
            while depths[cur] == u32::MAX {
                match parents[cur] {
                    None => {
                        depths[cur] = 0;
                        break;
                    }
                    Some(p) => {
                        cur = p.index();
                        chain.push(cur);
                        if chain.len() > n + 1 {
                            return Err(fail(specs[start].0, format!("cycle through {:?}", specs[start].1.key)));
                        }
                    }
                }
            }
            let base = depths[cur];
            for (offset, &node) in chain.iter().rev().enumerate() {
                if depths[node] == u32::MAX {
                    depths[node] = base + offset as u32;
                }
            }
        }

        let mut nodes = Vec::with_capacity(n);
        let mut by_label: HashMap<String, Vec<NodeId>> = HashMap::new();
        let mut sibling_labels: HashMap<(Option<NodeId>, String), usize> = HashMap::new();
        for (i, (line, spec)) in specs.into_iter().enumerate() {
            let depth = depths[i];
            if let Some(d) = spec.depth {
                if d != depth {
                    return Err(fail(
                        line,
                        format!("node {:?} declares depth {d} but its parent chain gives {depth}", spec.key),
                    ));
                }
            }
            let folded = fold(&spec.label);
            if sibling_labels.insert((parents[i], folded.clone()), i).is_some() {
                return Err(fail(
                    line,
                    format!("label {:?} repeated under the same parent", spec.label),
                ));
            }
            let id = NodeId {
                dim,
                index: i as u32,
            };
            by_label.entry(folded).or_default().push(id);
            nodes.push(Node {
                key: spec.key,
                label: spec.label,
                depth,
                parent: parents[i],
                admin_level: spec.admin_level,
                centroid: spec.centroid,
            });
        }

        let hierarchy = Hierarchy {
            dim,
            nodes,
            by_key,
            by_label,
        };
        hierarchy.check_admin_levels(&|line, msg| fail(line, msg))?;
        Ok(hierarchy)
    }

    fn check_admin_levels(&self, fail: &dyn Fn(u64, String) -> Error) -> Result<()> {
        for id in self.ids() {
            let Some(level) = self.node(id).admin_level else {
                continue;
            };
            let above = self
                .ancestors(id)
                .find_map(|a| self.node(a).admin_level);
            if let Some(parent_level) = above {
                if parent_level >= level {
                    return Err(fail(
                        0,
                        format!(
                            "admin level of {:?} ({level}) is not finer than its ancestor's ({parent_level})",
                            self.node(id).key
                        ),
                    ));
                }
            }
        }
        Ok(())
    }

    pub fn dimension(&self) -> Dimension {
        self.dim
    }

    pub fn root(&self) -> NodeId {
        self.ids()
            .find(|&id| self.node(id).parent.is_none())
            .expect("hierarchy has a root")
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn ids(&self) -> impl Iterator<Item = NodeId> + '_ {
        let dim = self.dim;
        (0..self.nodes.len() as u32).map(move |index| NodeId { dim, index })
    }

    pub fn contains(&self, id: NodeId) -> bool {
        id.dim == self.dim && id.index() < self.nodes.len()
    }

    /// Panics if `id` does not belong to this hierarchy.
    pub fn node(&self, id: NodeId) -> &Node {
        assert_eq!(id.dim, self.dim, "node from the {} hierarchy used with {}", id.dim, self.dim);
        &self.nodes[id.index()]
    }

    pub fn get(&self, key: &str) -> Option<NodeId> {
        self.by_key.get(key).copied()
    }

    pub fn key(&self, id: NodeId) -> &str {
        &self.node(id).key
    }

    pub fn label(&self, id: NodeId) -> &str {
        &self.node(id).label
    }

    pub fn depth(&self, id: NodeId) -> u32 {
        self.node(id).depth
    }

    /// All nodes whose case-folded label equals `label`.
    pub fn find_by_label(&self, label: &str) -> &[NodeId] {
        self.by_label
            .get(&fold(label))
            .map(Vec::as_slice)
            .unwrap_or(&[])
    }

    /// Resolves a node key, or a label when it is unique in the hierarchy.
    pub fn resolve(&self, reference: &str) -> Option<NodeId> {
        self.get(reference).or_else(|| match self.find_by_label(reference) {
            [only] => Some(*only),
            _ => None,
        })
    }

    pub fn check(&self, id: NodeId) -> Result<()> {
        if id.dim != self.dim {
            return Err(Error::DimensionMismatch {
                left: id.dim,
                right: self.dim,
            });
        }
        if id.index() >= self.nodes.len() {
            return Err(Error::Data(format!("node index {} out of range in {}", id.index, self.dim)));
        }
        Ok(())
    }

    /// Proper ancestors from the parent up to and including the root.
    pub fn ancestors(&self, id: NodeId) -> impl Iterator<Item = NodeId> + '_ {
        let mut cur = self.node(id).parent;
        std::iter::from_fn(move || {
            let out = cur?;
            cur = self.nodes[out.index()].parent;
            Some(out)
        })
    }

    /// `id` followed by its ancestors.
    pub fn ancestors_or_self(&self, id: NodeId) -> impl Iterator<Item = NodeId> + '_ {
        std::iter::once(id).chain(self.ancestors(id))
    }

    pub fn ancestor_at_depth(&self, id: NodeId, depth: u32) -> Option<NodeId> {
        self.ancestors_or_self(id).find(|&a| self.depth(a) == depth)
    }

    pub fn ancestor_at_admin(&self, id: NodeId, level: AdminLevel) -> Option<NodeId> {
        self.ancestors_or_self(id)
            .find(|&a| self.node(a).admin_level == Some(level))
    }

    /// True when `general` is `specific` or one of its ancestors
    /// (`specific ≼ general`).
    pub fn is_ancestor_or_self(&self, general: NodeId, specific: NodeId) -> bool {
        self.ancestors_or_self(specific).any(|a| a == general)
    }

    /// Identical or on the same root-to-leaf path.
    pub fn linked(&self, x: NodeId, y: NodeId) -> bool {
        self.is_ancestor_or_self(x, y) || self.is_ancestor_or_self(y, x)
    }

    pub fn common_ancestor(&self, x: NodeId, y: NodeId) -> NodeId {
        let (mut a, mut b) = (x, y);
        while self.depth(a) > self.depth(b) {
            a = self.node(a).parent.expect("non-root has a parent");
        }
        while self.depth(b) > self.depth(a) {
            b = self.node(b).parent.expect("non-root has a parent");
        }
        while a != b {
            a = self.node(a).parent.expect("non-root has a parent");
            b = self.node(b).parent.expect("non-root has a parent");
        }
        a
    }

    /// The nearest ancestor-or-self at country level, if any.
    pub fn country_of(&self, id: NodeId) -> Option<NodeId> {
        self.ancestor_at_admin(id, AdminLevel::Country)
    }
}
