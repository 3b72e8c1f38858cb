//! Seeded, deterministic generators for instances, d-values, and queries.
//!
//! Everything here is a pure function of `(seed, params)`: the same inputs
//! produce the same artifacts, so every failing case is replayable from its
//! seed alone.  Generated instances always pass [`load_instance`]'s
//! validation and generated queries always survive a print/parse round
//! trip — the differential campaigns depend on both contracts.
//!
//! [`load_instance`]: crate::syntax::load_instance

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dvalue::{DValue, DatabaseInstance, Object, Path, SemanticsMode};
use crate::engine::{PathDefinition, Query, Stage, VariableDefinition};
use crate::expr::{BoolExpr, PathRef, Term};

/// Bounds for the generators.  All sizes are inclusive upper bounds.
#[derive(Clone, Debug)]
pub struct GenParams {
    pub seed: u64,
    pub max_docs: usize,
    pub max_depth: usize,
    pub max_fanout: usize,
    pub key_alphabet: usize,
    pub literal_pool: usize,
    pub max_stages: usize,
    /// Whether null may appear as a document value.  Campaigns for the
    /// unwind/project commutations turn this off: unwinding an explicit
    /// null element materializes a null pair that a later projection
    /// erases, which those rewrites cannot see syntactically.
    pub include_null: bool,
}

impl Default for GenParams {
    fn default() -> GenParams {
        GenParams {
            seed: 0,
            max_docs: 6,
            max_depth: 2,
            max_fanout: 3,
            key_alphabet: 6,
            literal_pool: 8,
            max_stages: 4,
            include_null: true,
        }
    }
}

impl GenParams {
    pub fn with_seed(seed: u64) -> GenParams {
        GenParams { seed, ..GenParams::default() }
    }
}

/// The stage families the query generator may draw from.  Sort, limit and
/// skip are deliberately absent: their output order is not bag-comparable.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StageFamily {
    Match,
    Unwind,
    Project,
    Group,
    Lookup,
    Union,
}

/// Every family the generator supports.
pub const CORE_FAMILIES: [StageFamily; 6] = [
    StageFamily::Match,
    StageFamily::Unwind,
    StageFamily::Project,
    StageFamily::Group,
    StageFamily::Lookup,
    StageFamily::Union,
];

const KEYS: [&str; 10] = ["a", "b", "c", "d", "e", "f", "g", "h", "k", "m"];

fn literal_pool(n: usize) -> Vec<DValue> {
    let full = [
        DValue::null(),
        DValue::bool(true),
        DValue::bool(false),
        DValue::number(0.0),
        DValue::number(1.0),
        DValue::number(2.0),
        DValue::number(-1.0),
        DValue::number(1.5),
        DValue::string(""),
        DValue::string("x"),
        DValue::string("yy"),
        DValue::string("guitar"),
    ];
    full.into_iter().take(n.clamp(1, 12)).collect()
}

fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    // Mix the stream into the seed so the sub-generators are independent.
    ChaCha8Rng::seed_from_u64(seed ^ stream.wrapping_mul(0x9e37_79b9_7f4a_7c15))
}

pub(crate) struct Draw<'a> {
    rng: ChaCha8Rng,
    keys: Vec<&'static str>,
    literals: Vec<DValue>,
    doc_literals: Vec<DValue>,
    params: &'a GenParams,
}

impl<'a> Draw<'a> {
    pub(crate) fn new(params: &'a GenParams, stream: u64) -> Draw<'a> {
        let literals = literal_pool(params.literal_pool);
        // Document values may be restricted to non-null; query constants
        // always draw from the full pool.
        let mut doc_literals: Vec<DValue> = if params.include_null {
            literals.clone()
        } else {
            literals.iter().filter(|v| !v.is_null()).cloned().collect()
        };
        if doc_literals.is_empty() {
            doc_literals.push(DValue::number(0.0));
        }
        Draw {
            rng: rng_for(params.seed, stream),
            keys: KEYS.into_iter().take(params.key_alphabet.clamp(1, KEYS.len())).collect(),
            literals,
            doc_literals,
            params,
        }
    }

    fn chance(&mut self, p: f64) -> bool {
        self.rng.gen_bool(p)
    }

    fn upto(&mut self, n: usize) -> usize {
        self.rng.gen_range(0..=n)
    }

    fn pick<T: Clone>(&mut self, items: &[T]) -> T {
        items[self.rng.gen_range(0..items.len())].clone()
    }

    pub(crate) fn key(&mut self) -> &'static str {
        let i = self.rng.gen_range(0..self.keys.len());
        self.keys[i]
    }

    pub(crate) fn literal(&mut self) -> DValue {
        let i = self.rng.gen_range(0..self.literals.len());
        self.literals[i].clone()
    }

    /// A 1- or 2-segment key path.
    pub(crate) fn path(&mut self) -> Path {
        let head = Path::key(self.key());
        if self.chance(0.3) {
            head.join(&Path::key(self.key()))
        } else {
            head
        }
    }

    fn doc_literal(&mut self) -> DValue {
        let i = self.rng.gen_range(0..self.doc_literals.len());
        self.doc_literals[i].clone()
    }

    fn value(&mut self, depth: usize) -> DValue {
        if depth == 0 || self.chance(0.5) {
            return self.doc_literal();
        }
        if self.chance(0.5) {
            let n = self.upto(self.params.max_fanout);
            DValue::Array((0..n).map(|_| self.value(depth - 1)).collect())
        } else {
            let mut o = Object::new();
            let keys = self.keys.clone();
            for k in keys {
                if self.chance(0.4) {
                    let v = self.value(depth - 1);
                    o.push(k, v);
                }
            }
            DValue::Object(o)
        }
    }

    fn document(&mut self, id: usize) -> Object {
        let mut o = Object::new();
        o.push("_id", DValue::number(id as f64));
        let keys = self.keys.clone();
        for k in keys {
            // Missing keys are as important as present ones: the totality
            // of path evaluation is exactly about these asymmetries.
            if self.chance(0.6) {
                let v = self.value(self.params.max_depth);
                o.push(k, v);
            }
        }
        o
    }

    fn collection(&mut self) -> Vec<Object> {
        let n = self.upto(self.params.max_docs);
        (0..n).map(|i| self.document(i)).collect()
    }

    // --- query pieces ---------------------------------------------------

    pub(crate) fn bool_leaf(&mut self) -> BoolExpr {
        match self.rng.gen_range(0..6) {
            0 => BoolExpr::Eq(Term::path(self.path()), Term::Const(self.literal())),
            1 => BoolExpr::Lte(Term::path(self.path()), Term::Const(self.literal())),
            2 => BoolExpr::Eq(Term::path(self.path()), Term::path(self.path())),
            3 => BoolExpr::In(Term::Const(self.literal()), Term::path(self.path())),
            4 => {
                let items = (0..self.upto(2)).map(|_| Term::Const(self.literal())).collect();
                BoolExpr::In(Term::path(self.path()), Term::Array(items))
            }
            _ => BoolExpr::Exists(PathRef::root(self.path())),
        }
    }

    pub(crate) fn bool_expr(&mut self, depth: usize) -> BoolExpr {
        if depth == 0 || self.chance(0.5) {
            return self.bool_leaf();
        }
        match self.rng.gen_range(0..3) {
            0 => BoolExpr::and(self.bool_expr(depth - 1), self.bool_expr(depth - 1)),
            1 => BoolExpr::or(self.bool_expr(depth - 1), self.bool_expr(depth - 1)),
            _ => BoolExpr::not(self.bool_expr(depth - 1)),
        }
    }

    fn definition_value(&mut self, target: &Path) -> Term {
        match self.rng.gen_range(0..6) {
            0 | 1 => Term::path(target.clone()),
            2 => Term::path(self.path()),
            3 => Term::Const(self.literal()),
            4 => Term::FnCall { name: "size".into(), arg: Box::new(Term::path(self.path())) },
            _ => Term::Map {
                input: PathRef::root(self.path()),
                var: "v".into(),
                body: Box::new(Term::Path(PathRef::var("v", Path::key(self.key())))),
            },
        }
    }

    pub(crate) fn project(&mut self) -> Stage {
        // Distinct single-segment targets are compatible by construction.
        let mut targets = self.keys.clone();
        let n = self.rng.gen_range(1..=3.min(targets.len()));
        let mut defs = Vec::with_capacity(n);
        for _ in 0..n {
            let i = self.rng.gen_range(0..targets.len());
            let target = Path::key(targets.swap_remove(i));
            let value = self.definition_value(&target);
            defs.push(PathDefinition { target, value });
        }
        Stage::Project(defs)
    }

    fn group(&mut self) -> Stage {
        let id = if self.chance(0.75) { Some(self.key().to_string()) } else { None };
        let mut collect = Vec::new();
        let mut pool = self.keys.clone();
        for _ in 0..self.upto(2) {
            let i = self.rng.gen_range(0..pool.len());
            collect.push(pool.swap_remove(i).to_string());
        }
        Stage::Group { id, collect }
    }

    fn template(&mut self, allow_var: bool) -> Query {
        let mut stages = Vec::new();
        for _ in 0..self.upto(2) {
            if self.chance(0.5) {
                let cond = if allow_var && self.chance(0.5) {
                    BoolExpr::Eq(
                        Term::Path(PathRef::var("x", Path::empty())),
                        Term::path(Path::key(self.key())),
                    )
                } else {
                    self.bool_expr(1)
                };
                stages.push(Stage::Match(cond));
            } else {
                stages.push(self.project());
            }
        }
        Query::new("d", stages)
    }

    fn lookup(&mut self) -> Stage {
        let vars = if self.chance(0.7) {
            vec![VariableDefinition { var: "x".into(), source: self.path() }]
        } else {
            Vec::new()
        };
        let template = self.template(!vars.is_empty());
        Stage::Lookup { vars, template: Box::new(template), as_: Path::key(self.key()) }
    }

    fn stage(&mut self, families: &[StageFamily]) -> Stage {
        match self.pick(families) {
            StageFamily::Match => Stage::Match(self.bool_expr(2)),
            StageFamily::Unwind => Stage::Unwind(self.path()),
            StageFamily::Project => self.project(),
            StageFamily::Group => self.group(),
            StageFamily::Lookup => self.lookup(),
            StageFamily::Union => Stage::UnionWith(Box::new(self.template(false))),
        }
    }
}

/// Generates a database instance with collections `c` and `d`.
///
/// Documents mix nested arrays and objects (up to `max_depth`), explicit
/// nulls, and missing keys; `_id`s are the document positions, so
/// uniqueness holds by construction.
pub fn gen_instance(params: &GenParams, mode: SemanticsMode) -> DatabaseInstance {
    let mut draw = Draw::new(params, 1);
    let mut instance = DatabaseInstance::new(mode);
    instance.collections.insert("c".into(), draw.collection());
    instance.collections.insert("d".into(), draw.collection());
    instance
}

/// Generates `count` standalone d-values (for order-law style tests).
pub fn gen_values(params: &GenParams, count: usize) -> Vec<DValue> {
    let mut draw = Draw::new(params, 2);
    let depth = params.max_depth;
    (0..count).map(|_| draw.value(depth)).collect()
}

/// Generates a core-fragment query over collection `c` whose paths collide
/// with [`gen_instance`]'s key alphabet.  The result is valid by
/// construction and round-trips through the surface syntax.
pub fn gen_query(params: &GenParams, families: &[StageFamily]) -> Query {
    assert!(!families.is_empty(), "at least one stage family is required");
    let mut draw = Draw::new(params, 3);
    let n = draw.rng.gen_range(1..=params.max_stages.max(1));
    let stages = (0..n).map(|_| draw.stage(families)).collect();
    Query::new("c", stages)
}

/// A deterministically shuffled copy of an object's pairs (for mode
/// contract tests).
pub fn permuted_object(o: &Object, seed: u64) -> Object {
    let mut pairs: Vec<(String, DValue)> = o.pairs().to_vec();
    let mut rng = StdRng::seed_from_u64(seed);
    // Fisher-Yates; StdRng keeps this reproducible across runs.
    for i in (1..pairs.len()).rev() {
        let j = rng.gen_range(0..=i);
        pairs.swap(i, j);
    }
    Object::from_pairs(pairs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dvalue::write_dvalue;
    use crate::syntax::{load_instance, parse_query, print_query};

    fn instance_text(i: &DatabaseInstance) -> String {
        write_dvalue(&crate::syntax::instance_to_dvalue(i), SemanticsMode::Ordered)
    }

    #[test]
    fn instances_are_deterministic() {
        let p = GenParams::with_seed(7);
        let a = gen_instance(&p, SemanticsMode::Ordered);
        let b = gen_instance(&p, SemanticsMode::Ordered);
        assert_eq!(instance_text(&a), instance_text(&b));
    }

    #[test]
    fn instances_pass_their_own_validation() {
        for seed in 0..50 {
            let p = GenParams::with_seed(seed);
            let i = gen_instance(&p, SemanticsMode::Ordered);
            load_instance(&instance_text(&i), SemanticsMode::Ordered)
                .unwrap_or_else(|e| panic!("seed {seed}: {e:?}"));
        }
    }

    #[test]
    fn max_depth_zero_keeps_documents_flat() {
        let p = GenParams { max_depth: 0, ..GenParams::with_seed(3) };
        let i = gen_instance(&p, SemanticsMode::Ordered);
        for coll in i.collections.values() {
            for doc in coll {
                for (_, v) in doc.iter() {
                    assert!(matches!(v, DValue::Literal(_)), "non-flat value {v}");
                }
            }
        }
    }

    #[test]
    fn queries_are_deterministic_and_roundtrip() {
        for seed in 0..100 {
            let p = GenParams::with_seed(seed);
            let q1 = gen_query(&p, &CORE_FAMILIES);
            let q2 = gen_query(&p, &CORE_FAMILIES);
            assert_eq!(q1, q2);
            let printed = print_query(&q1);
            assert_eq!(parse_query(&printed).unwrap(), q1, "seed {seed}:\n{printed}");
        }
    }

    #[test]
    fn single_family_restricts_the_stages() {
        for seed in 0..20 {
            let p = GenParams::with_seed(seed);
            let q = gen_query(&p, &[StageFamily::Match]);
            assert!(q.stages.iter().all(|s| matches!(s, Stage::Match(_))));
        }
    }

    #[test]
    fn permuted_object_keeps_the_pairs() {
        let mut o = Object::new();
        for k in ["a", "b", "c", "d"] {
            o.push(k, DValue::string(k));
        }
        let shuffled = permuted_object(&o, 11);
        assert_eq!(shuffled.len(), o.len());
        for (k, v) in o.iter() {
            assert_eq!(shuffled.get(k), Some(v));
        }
    }
}
