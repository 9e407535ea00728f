//! Incremental k-d tree with exact k-nearest-neighbour queries.
//!
//! Points are inserted one at a time and never removed. Results are ordered by squared
//! Euclidean distance, ties broken by the lower item id, so a query always agrees exactly with
//! a linear scan that sorts by `(distance, id)`.

use std::cmp::Ordering;

use crate::scalar::Scalar;
use crate::space::squared_distance;

const NONE: u32 = u32::MAX;

#[derive(Debug, Clone)]
struct Node<T, const D: usize> {
    point: [T; D],
    id: usize,
    left: u32,
    right: u32,
}

#[derive(Debug, Clone)]
pub struct KdTree<T: Scalar, const D: usize> {
    nodes: Vec<Node<T, D>>,
}

impl<T: Scalar, const D: usize> Default for KdTree<T, D> {
    fn default() -> Self {
        Self { nodes: Vec::new() }
    }
}

/// One query hit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Neighbor<T> {
    pub id: usize,
    pub squared_distance: T,
}

fn cmp_hit<T: Scalar>(a: &Neighbor<T>, b: &Neighbor<T>) -> Ordering {
    a.squared_distance
        .partial_cmp(&b.squared_distance)
        .unwrap_or(Ordering::Equal)
        .then(a.id.cmp(&b.id))
}

impl<T: Scalar, const D: usize> KdTree<T, D> {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn insert(&mut self, point: [T; D], id: usize) {
        let new = u32::try_from(self.nodes.len()).expect("k-d tree capacity");
        self.nodes.push(Node {
            point,
            id,
            left: NONE,
            right: NONE,
        });
        if new == 0 {
            return;
        }
        let mut cur = 0u32;
        let mut depth = 0usize;
        loop {
            let axis = depth % D;
            let node = &self.nodes[cur as usize];
            let go_left = point[axis] < node.point[axis];
            let next = if go_left { node.left } else { node.right };
            if next == NONE {
                let node = &mut self.nodes[cur as usize];
                if go_left {
                    node.left = new;
                } else {
                    node.right = new;
                }
                return;
            }
            cur = next;
            depth += 1;
        }
    }

    /// The `k` nearest stored points, nearest first.
    pub fn nearest(&self, query: &[T; D], k: usize) -> Vec<Neighbor<T>> {
        let mut best: Vec<Neighbor<T>> = Vec::with_capacity(k + 1);
        if k == 0 || self.nodes.is_empty() {
            return best;
        }
        self.search(0, 0, query, k, &mut best);
        best
    }

    fn search(&self, cur: u32, depth: usize, query: &[T; D], k: usize, best: &mut Vec<Neighbor<T>>) {
        let node = &self.nodes[cur as usize];
        let hit = Neighbor {
            id: node.id,
            squared_distance: squared_distance(query, &node.point),
        };
        if best.len() < k || cmp_hit(&hit, &best[best.len() - 1]) == Ordering::Less {
            let pos = best
                .binary_search_by(|probe| cmp_hit(probe, &hit))
                .unwrap_or_else(|e| e);
            best.insert(pos, hit);
            best.truncate(k);
        }
        let axis = depth % D;
        let diff = query[axis] - node.point[axis];
        let (near, far) = if diff < T::zero() {
            (node.left, node.right)
        } else {
            (node.right, node.left)
        };
        if near != NONE {
            self.search(near, depth + 1, query, k, best);
        }
        // Equal-distance points on the far side may still win on id, so prune only strictly.
        if far != NONE && (best.len() < k || diff * diff <= best[best.len() - 1].squared_distance) {
            self.search(far, depth + 1, query, k, best);
        }
    }
}
