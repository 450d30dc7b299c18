//! Software stand-in for ray-tracing hardware: a BVH over primitive boxes
//! answering point-containment queries through an any-hit callback.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::geometry::{aabb_around, Aabb, Point3, PointQuery};

pub const DEFAULT_LEAF_SIZE: usize = 4;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Primitive {
    pub id: usize,
    pub bbox: Aabb,
    pub center: Point3,
}

impl Primitive {
    pub fn around(id: usize, center: Point3, half_width: f64) -> Result<Self> {
        Ok(Primitive {
            id,
            bbox: aabb_around(center, half_width)?,
            center,
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HitRecord {
    pub id: usize,
    pub center: Point3,
}

/// What the any-hit callback asks the traversal to do next.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HitControl {
    Continue,
    Terminate,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NodeKind {
    Internal { left: u32, right: u32 },
    Leaf { start: u32, len: u32 },
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Node {
    pub bbox: Aabb,
    pub kind: NodeKind,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct TraversalStats {
    /// Any-hit callbacks delivered.
    pub hits: usize,
    /// Node boxes tested against the query point.
    pub node_visits: usize,
}

/// Immutable bounding volume hierarchy. Node 0 is the root; nodes are laid
/// out in pre-order.
#[derive(Clone, Debug)]
pub struct Bvh {
    nodes: Vec<Node>,
    primitives: Vec<Primitive>,
    leaf_size: usize,
}

impl Bvh {
    /// Builds by median split on the longest axis of the centroid extent.
    pub fn build(primitives: &[Primitive], leaf_size: usize) -> Result<Self> {
        if primitives.is_empty() {
            return Err(Error::Empty("BVH needs at least one primitive"));
        }
        if leaf_size == 0 {
            return Err(Error::InvalidLeafSize);
        }
        for p in primitives {
            if !p.bbox.min.is_finite() || !p.bbox.max.is_finite() || !p.center.is_finite() {
                return Err(Error::NonFinite("primitive"));
            }
        }
        let mut prims = primitives.to_vec();
        let mut nodes = Vec::with_capacity(2 * prims.len() / leaf_size + 1);
        build_node(&mut nodes, &mut prims, 0, leaf_size);
        Ok(Bvh {
            nodes,
            primitives: prims,
            leaf_size,
        })
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    /// Primitives in leaf order.
    pub fn primitives(&self) -> &[Primitive] {
        &self.primitives
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn leaf_size(&self) -> usize {
        self.leaf_size
    }

    pub fn root_bounds(&self) -> Aabb {
        self.nodes[0].bbox
    }

    pub fn leaf_count(&self) -> usize {
        self.nodes
            .iter()
            .filter(|n| matches!(n.kind, NodeKind::Leaf { .. }))
            .count()
    }

    pub fn depth(&self) -> usize {
        fn walk(nodes: &[Node], i: usize) -> usize {
            match nodes[i].kind {
                NodeKind::Leaf { .. } => 1,
                NodeKind::Internal { left, right } => {
                    1 + walk(nodes, left as usize).max(walk(nodes, right as usize))
                }
            }
        }
        walk(&self.nodes, 0)
    }

    /// Calls `anyhit` once for every primitive whose box contains the query
    /// point, depth-first with left children first. Stops as soon as the
    /// callback returns [`HitControl::Terminate`].
    pub fn traverse_point<F>(&self, query: &PointQuery, mut anyhit: F) -> TraversalStats
    where
        F: FnMut(HitRecord) -> HitControl,
    {
        let q = query.origin;
        let mut stats = TraversalStats::default();
        let mut stack: Vec<u32> = Vec::with_capacity(64);
        stack.push(0);
        while let Some(i) = stack.pop() {
            let node = &self.nodes[i as usize];
            stats.node_visits += 1;
            if !node.bbox.contains(&q) {
                continue;
            }
            match node.kind {
                NodeKind::Internal { left, right } => {
                    stack.push(right);
                    stack.push(left);
                }
                NodeKind::Leaf { start, len } => {
                    let leaf = &self.primitives[start as usize..(start + len) as usize];
                    for prim in leaf {
                        if prim.bbox.contains(&q) {
                            stats.hits += 1;
                            let hit = HitRecord {
                                id: prim.id,
                                center: prim.center,
                            };
                            if anyhit(hit) == HitControl::Terminate {
                                return stats;
                            }
                        }
                    }
                }
            }
        }
        stats
    }

    /// Number of node boxes tested by a full traversal of `query`.
    pub fn node_visits(&self, query: &PointQuery) -> usize {
        self.traverse_point(query, |_| HitControl::Continue)
            .node_visits
    }

    /// Indented text rendering of the tree, one node per line.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        let mut stack = vec![(0u32, 0usize)];
        while let Some((i, depth)) = stack.pop() {
            let node = &self.nodes[i as usize];
            let (lo, hi) = (node.bbox.min, node.bbox.max);
            let _ = write!(
                out,
                "{:indent$}#{i} [{:.4}, {:.4}, {:.4}]..[{:.4}, {:.4}, {:.4}]",
                "",
                lo.x,
                lo.y,
                lo.z,
                hi.x,
                hi.y,
                hi.z,
                indent = 2 * depth
            );
            match node.kind {
                NodeKind::Internal { left, right } => {
                    out.push('\n');
                    stack.push((right, depth + 1));
                    stack.push((left, depth + 1));
                }
                NodeKind::Leaf { start, len } => {
                    let ids: Vec<String> = self.primitives[start as usize..(start + len) as usize]
                        .iter()
                        .map(|p| p.id.to_string())
                        .collect();
                    let _ = writeln!(out, " leaf {{{}}}", ids.join(", "));
                }
            }
        }
        out
    }
}

fn bounds_of(prims: &[Primitive]) -> (Aabb, Aabb) {
    let mut bbox = prims[0].bbox;
    let mut centroids = Aabb::point(prims[0].center);
    for p in &prims[1..] {
        bbox = bbox.union(&p.bbox);
        centroids.grow(&p.center);
    }
    (bbox, centroids)
}

/// Index of the largest component; earlier axes win ties.
fn longest_axis(extent: &Point3) -> usize {
    let e = extent.coords();
    let mut axis = 0;
    for i in 1..3 {
        if e[i] > e[axis] {
            axis = i;
        }
    }
    axis
}

fn build_node(
    nodes: &mut Vec<Node>,
    prims: &mut [Primitive],
    offset: usize,
    leaf_size: usize,
) -> u32 {
    let (bbox, centroids) = bounds_of(prims);
    let index = nodes.len() as u32;
    if prims.len() <= leaf_size {
        nodes.push(Node {
            bbox,
            kind: NodeKind::Leaf {
                start: offset as u32,
                len: prims.len() as u32,
            },
        });
        return index;
    }

    let axis = longest_axis(&centroids.extent());
    let mid = prims.len() / 2;
    prims.select_nth_unstable_by(mid, |a, b| {
        a.center
            .axis(axis)
            .total_cmp(&b.center.axis(axis))
            .then(a.id.cmp(&b.id))
    });

    // placeholder, patched once both children exist
    nodes.push(Node {
        bbox,
        kind: NodeKind::Internal { left: 0, right: 0 },
    });
    let (lo, hi) = prims.split_at_mut(mid);
    let left = build_node(nodes, lo, offset, leaf_size);
    let right = build_node(nodes, hi, offset + mid, leaf_size);
    nodes[index as usize].kind = NodeKind::Internal { left, right };
    index
}
