use super::square::MadicSquare;
use crate::scalar::Rational;
use num_bigint::BigInt;
use num_traits::Zero;
use std::collections::BTreeMap;

/// Finite union of squares of the `base`-adic tree, kept normalized: a split
/// node has at least one nonempty child and is not entirely full.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Region {
    base: u32,
    root: Node,
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Node {
    Empty,
    Full,
    /// Keyed by digit; absent children are empty.
    Split(BTreeMap<u32, Node>),
}

impl Node {
    fn normalize(children: BTreeMap<u32, Node>, base: u32) -> Node {
        let children: BTreeMap<u32, Node> = children.into_iter().filter(|(_, n)| *n != Node::Empty).collect();
        if children.is_empty() {
            Node::Empty
        } else if children.len() == (base * base) as usize && children.values().all(|n| *n == Node::Full) {
            Node::Full
        } else {
            Node::Split(children)
        }
    }

    fn insert(&mut self, path: &[u32], base: u32) {
        if *self == Node::Full {
            return;
        }
        let Some((&d, rest)) = path.split_first() else {
            *self = Node::Full;
            return;
        };
        let mut children = match std::mem::replace(self, Node::Empty) {
            Node::Split(c) => c,
            _ => BTreeMap::new(),
        };
        children.entry(d).or_insert(Node::Empty).insert(rest, base);
        *self = Node::normalize(children, base);
    }

    fn expand(&self, base: u32) -> BTreeMap<u32, Node> {
        match self {
            Node::Empty => BTreeMap::new(),
            Node::Full => (1..=base * base).map(|d| (d, Node::Full)).collect(),
            Node::Split(c) => c.clone(),
        }
    }

    fn combine(a: &Node, b: &Node, base: u32, op: Op) -> Node {
        match (op, a, b) {
            (Op::Union, Node::Full, _) | (Op::Union, _, Node::Full) => Node::Full,
            (Op::Union, Node::Empty, x) | (Op::Union, x, Node::Empty) => x.clone(),
            (Op::Inter, Node::Empty, _) | (Op::Inter, _, Node::Empty) => Node::Empty,
            (Op::Inter, Node::Full, x) | (Op::Inter, x, Node::Full) => x.clone(),
            (Op::Diff, Node::Empty, _) | (Op::Diff, _, Node::Full) => Node::Empty,
            (Op::Diff, x, Node::Empty) => x.clone(),
            _ => {
                let ca = a.expand(base);
                let cb = b.expand(base);
                let mut out = BTreeMap::new();
                for d in ca.keys().chain(cb.keys()) {
                    if out.contains_key(d) {
                        continue;
                    }
                    let na = ca.get(d).unwrap_or(&Node::Empty);
                    let nb = cb.get(d).unwrap_or(&Node::Empty);
                    out.insert(*d, Node::combine(na, nb, base, op));
                }
                Node::normalize(out, base)
            }
        }
    }

    /// Area in units where a node at this level has area `scale`.
    fn count(&self, base: u32, scale: &BigInt) -> BigInt {
        match self {
            Node::Empty => BigInt::zero(),
            Node::Full => scale.clone(),
            Node::Split(c) => {
                let sub = scale / BigInt::from(base * base);
                c.values().map(|n| n.count(base, &sub)).sum()
            }
        }
    }

    fn max_depth(&self) -> u32 {
        match self {
            Node::Split(c) => 1 + c.values().map(Node::max_depth).max().unwrap_or(0),
            _ => 0,
        }
    }

    fn collect(&self, prefix: &mut Vec<u32>, base: u32, out: &mut Vec<MadicSquare>) {
        match self {
            Node::Empty => {}
            Node::Full => out.push(MadicSquare { base, path: prefix.clone() }),
            Node::Split(c) => {
                for (d, n) in c {
                    prefix.push(*d);
                    n.collect(prefix, base, out);
                    prefix.pop();
                }
            }
        }
    }
}

#[derive(Debug, Clone, Copy)]
enum Op {
    Union,
    Inter,
    Diff,
}

impl Region {
    pub fn empty(base: u32) -> Self {
        Region { base, root: Node::Empty }
    }

    pub fn full(base: u32) -> Self {
        Region { base, root: Node::Full }
    }

    pub fn from_squares<'a>(base: u32, squares: impl IntoIterator<Item = &'a MadicSquare>) -> Self {
        let mut r = Region::empty(base);
        for s in squares {
            r.insert(s);
        }
        r
    }

    pub fn base(&self) -> u32 {
        self.base
    }

    pub fn insert(&mut self, sq: &MadicSquare) {
        assert_eq!(sq.base, self.base, "square base differs from region base");
        self.root.insert(&sq.path, self.base);
    }

    pub fn union(&self, o: &Region) -> Region {
        Region { base: self.base, root: Node::combine(&self.root, &o.root, self.base, Op::Union) }
    }

    pub fn intersection(&self, o: &Region) -> Region {
        Region { base: self.base, root: Node::combine(&self.root, &o.root, self.base, Op::Inter) }
    }

    pub fn difference(&self, o: &Region) -> Region {
        Region { base: self.base, root: Node::combine(&self.root, &o.root, self.base, Op::Diff) }
    }

    pub fn is_empty(&self) -> bool {
        self.root == Node::Empty
    }

    /// `self ⊆ o` up to null sets.
    pub fn subset_of(&self, o: &Region) -> bool {
        self.difference(o).is_empty()
    }

    /// Area as a fraction of `area(S)`.
    pub fn area(&self) -> Rational {
        let d = self.root.max_depth();
        let scale = BigInt::from(self.base).pow(2 * d);
        Rational::new(self.root.count(self.base, &scale), scale)
    }

    /// Maximal full squares in lexicographic path order.
    pub fn squares(&self) -> Vec<MadicSquare> {
        let mut out = Vec::new();
        self.root.collect(&mut Vec::new(), self.base, &mut out);
        out
    }

    /// Whether the square lies entirely inside the region.
    pub fn covers(&self, sq: &MadicSquare) -> bool {
        let mut node = &self.root;
        for d in &sq.path {
            match node {
                Node::Empty => return false,
                Node::Full => return true,
                Node::Split(c) => match c.get(d) {
                    Some(n) => node = n,
                    None => return false,
                },
            }
        }
        *node == Node::Full
    }

    /// Whether the square lies entirely outside the region (disjoint interiors).
    pub fn misses(&self, sq: &MadicSquare) -> bool {
        let mut node = &self.root;
        for d in &sq.path {
            match node {
                Node::Empty => return true,
                Node::Full => return false,
                Node::Split(c) => match c.get(d) {
                    Some(n) => node = n,
                    None => return true,
                },
            }
        }
        *node == Node::Empty
    }
}

/// Pair of regions standing for a subset of `S ∪ (S + 2l)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TwoCopies {
    pub copy0: Region,
    pub copy1: Region,
}

impl TwoCopies {
    pub fn empty(base: u32) -> Self {
        TwoCopies { copy0: Region::empty(base), copy1: Region::empty(base) }
    }

    pub fn doubled(r: &Region) -> Self {
        TwoCopies { copy0: r.clone(), copy1: r.clone() }
    }

    pub fn union(&self, o: &TwoCopies) -> TwoCopies {
        TwoCopies { copy0: self.copy0.union(&o.copy0), copy1: self.copy1.union(&o.copy1) }
    }

    pub fn intersection(&self, o: &TwoCopies) -> TwoCopies {
        TwoCopies { copy0: self.copy0.intersection(&o.copy0), copy1: self.copy1.intersection(&o.copy1) }
    }

    pub fn difference(&self, o: &TwoCopies) -> TwoCopies {
        TwoCopies { copy0: self.copy0.difference(&o.copy0), copy1: self.copy1.difference(&o.copy1) }
    }

    pub fn is_empty(&self) -> bool {
        self.copy0.is_empty() && self.copy1.is_empty()
    }

    /// Area as a fraction of `area(S)`.
    pub fn area(&self) -> Rational {
        self.copy0.area() + self.copy1.area()
    }
}
