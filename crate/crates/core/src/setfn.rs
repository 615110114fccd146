//! Success probability functions with value, marginal, and demand oracles,
//! plus brute-force membership checks for the monotone/submodular classes.

use std::cmp::Ordering;

use rayon::prelude::*;

use crate::bitset::BitSet;
use crate::error::{Error, Result};
use crate::gadgets::{CliqueGadgetFn, HiddenSetFn};
use crate::itemset::ItemSet;
use crate::value::{Quad, Rational, Value, REAL_TOL};

/// Cap for the exhaustive class-membership checks (2^16 cached values).
pub const CLASS_CHECK_CAP: usize = 16;

/// Additive function: `f(S) = sum of weights over S`.
#[derive(Clone, Debug)]
pub struct AdditiveFn {
    weights: Vec<Value>,
}

impl AdditiveFn {
    pub fn new(weights: Vec<Value>) -> Result<Self> {
        for w in &weights {
            if w.is_negative() || w.is_infinite() {
                return Err(Error::invalid("additive weights must be finite and >= 0"));
            }
        }
        Ok(AdditiveFn { weights })
    }

    pub fn weights(&self) -> &[Value] {
        &self.weights
    }
}

/// Normalized unweighted coverage function given by `(U, A, h)`:
/// `f(S) = |union of h(i) over S| / |U|`.
#[derive(Clone, Debug)]
pub struct CoverageFn {
    universe_size: usize,
    covers: Vec<BitSet>,
}

impl CoverageFn {
    pub fn new(universe_size: usize, covers: Vec<BitSet>) -> Result<Self> {
        if universe_size == 0 {
            return Err(Error::invalid("coverage universe must be non-empty"));
        }
        for c in &covers {
            if c.len() != universe_size {
                return Err(Error::Dimension {
                    context: "cover bitset length vs universe size",
                    expected: universe_size,
                    got: c.len(),
                });
            }
        }
        Ok(CoverageFn {
            universe_size,
            covers,
        })
    }

    pub fn from_index_covers(universe_size: usize, covers: &[Vec<usize>]) -> Result<Self> {
        let mut sets = Vec::with_capacity(covers.len());
        for cover in covers {
            for &u in cover {
                if u >= universe_size {
                    return Err(Error::Dimension {
                        context: "cover element vs universe size",
                        expected: universe_size,
                        got: u,
                    });
                }
            }
            sets.push(BitSet::from_indices(universe_size, cover));
        }
        CoverageFn::new(universe_size, sets)
    }

    pub fn universe_size(&self) -> usize {
        self.universe_size
    }

    pub fn item_count(&self) -> usize {
        self.covers.len()
    }

    pub fn cover(&self, i: usize) -> &BitSet {
        &self.covers[i]
    }

    pub fn cover_indices(&self, i: usize) -> Vec<usize> {
        self.covers[i].iter_ones().collect()
    }

    pub fn covered_count(&self, s: &ItemSet) -> usize {
        let mut acc = BitSet::new(self.universe_size);
        for i in s.iter() {
            acc.union_with(&self.covers[i]);
        }
        acc.count_ones()
    }

    pub fn value_rational(&self, s: &ItemSet) -> Rational {
        Rational::new(self.covered_count(s).into(), self.universe_size.into())
    }

    pub fn singleton_value(&self, i: usize) -> Rational {
        Rational::new(
            self.covers[i].count_ones().into(),
            self.universe_size.into(),
        )
    }
}

/// XOS function: pointwise max of finitely many non-negative additive clauses.
#[derive(Clone, Debug)]
pub struct XosFn {
    clauses: Vec<Vec<Value>>,
}

impl XosFn {
    pub fn new(clauses: Vec<Vec<Value>>) -> Result<Self> {
        if clauses.is_empty() {
            return Err(Error::invalid("XOS needs at least one clause"));
        }
        let n = clauses[0].len();
        for c in &clauses {
            if c.len() != n {
                return Err(Error::Dimension {
                    context: "XOS clause length",
                    expected: n,
                    got: c.len(),
                });
            }
            for w in c {
                if w.is_negative() || w.is_infinite() {
                    return Err(Error::invalid("XOS clause entries must be finite and >= 0"));
                }
            }
        }
        Ok(XosFn { clauses })
    }

    pub fn clauses(&self) -> &[Vec<Value>] {
        &self.clauses
    }

    pub fn clause_value(&self, clause: usize, s: &ItemSet) -> Value {
        s.iter()
            .fold(Value::zero(), |acc, i| &acc + &self.clauses[clause][i])
    }
}

/// Explicit value table indexed by bitmask; declares its own `f(empty)`.
#[derive(Clone, Debug)]
pub struct TableFn {
    n: usize,
    values: Vec<Value>,
}

impl TableFn {
    pub fn new(values: Vec<Value>) -> Result<Self> {
        let len = values.len();
        if len == 0 || !len.is_power_of_two() {
            return Err(Error::invalid(format!(
                "table length must be a power of two, got {len}"
            )));
        }
        let n = len.trailing_zeros() as usize;
        ItemSet::check_enum_cap(n, "table function size")?;
        for v in &values {
            if v.is_negative() || v.is_infinite() {
                return Err(Error::invalid("table values must be finite and >= 0"));
            }
        }
        Ok(TableFn { n, values })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn values(&self) -> &[Value] {
        &self.values
    }
}

/// The concrete representation behind a [`SetFunction`].
#[derive(Clone, Debug)]
pub enum SetFnKind {
    Additive(AdditiveFn),
    Coverage(CoverageFn),
    Xos(XosFn),
    Table(TableFn),
    HiddenSet(HiddenSetFn),
    CliqueGadget(CliqueGadgetFn),
}

/// A success probability function: one of the concrete representations plus
/// a divide-by normalization scalar (default 1).
#[derive(Clone, Debug)]
pub struct SetFunction {
    kind: SetFnKind,
    normalize_by: Value,
}

/// Result of the exhaustive monotonicity/submodularity check.
///
/// `monotone_witness` holds `(i, S)` with `f(S + i) < f(S)`;
/// `submodular_witness` holds `(i, S, S')` with `S` nested in `S'` and
/// `f(i | S) < f(i | S')`.
#[derive(Clone, Debug)]
pub struct ClassReport {
    pub monotone: bool,
    pub submodular: bool,
    pub monotone_witness: Option<(usize, ItemSet)>,
    pub submodular_witness: Option<(usize, ItemSet, ItemSet)>,
}

impl SetFunction {
    pub fn additive(weights: Vec<Value>) -> Result<Self> {
        Ok(AdditiveFn::new(weights)?.into())
    }

    pub fn coverage(f: CoverageFn) -> Self {
        f.into()
    }

    pub fn xos(clauses: Vec<Vec<Value>>) -> Result<Self> {
        Ok(XosFn::new(clauses)?.into())
    }

    pub fn table(values: Vec<Value>) -> Result<Self> {
        Ok(TableFn::new(values)?.into())
    }

    pub fn hidden_set(f: HiddenSetFn) -> Self {
        f.into()
    }

    pub fn clique_gadget(f: CliqueGadgetFn) -> Self {
        f.into()
    }

    /// Replaces the normalization scalar; values are divided by it.
    pub fn with_normalization(mut self, scalar: Value) -> Result<Self> {
        if !scalar.is_positive() || scalar.is_infinite() {
            return Err(Error::invalid(
                "normalization scalar must be finite and > 0",
            ));
        }
        self.normalize_by = scalar;
        Ok(self)
    }

    pub fn kind(&self) -> &SetFnKind {
        &self.kind
    }

    pub fn normalize_by(&self) -> &Value {
        &self.normalize_by
    }

    pub fn ground_size(&self) -> usize {
        match &self.kind {
            SetFnKind::Additive(f) => f.weights.len(),
            SetFnKind::Coverage(f) => f.covers.len(),
            SetFnKind::Xos(f) => f.clauses[0].len(),
            SetFnKind::Table(f) => f.n,
            SetFnKind::HiddenSet(f) => f.ground_size(),
            SetFnKind::CliqueGadget(f) => f.ground_size(),
        }
    }

    /// True when every value this function produces is an exact rational.
    pub fn is_exact(&self) -> bool {
        let data_exact = match &self.kind {
            SetFnKind::Additive(f) => f.weights.iter().all(Value::is_exact),
            SetFnKind::Coverage(_) => true,
            SetFnKind::Xos(f) => f.clauses.iter().flatten().all(Value::is_exact),
            SetFnKind::Table(f) => f.values.iter().all(Value::is_exact),
            SetFnKind::HiddenSet(_) => false,
            SetFnKind::CliqueGadget(_) => true,
        };
        data_exact && self.normalize_by.is_exact()
    }

    fn check_ground(&self, s: &ItemSet) -> Result<()> {
        let n = self.ground_size();
        if s.ground_size() != n {
            return Err(Error::Dimension {
                context: "set vs function ground set",
                expected: n,
                got: s.ground_size(),
            });
        }
        Ok(())
    }

    fn raw_value(&self, s: &ItemSet) -> Value {
        match &self.kind {
            SetFnKind::Additive(f) => s.iter().fold(Value::zero(), |acc, i| &acc + &f.weights[i]),
            SetFnKind::Coverage(f) => Value::Exact(f.value_rational(s)),
            SetFnKind::Xos(f) => (0..f.clauses.len())
                .map(|c| f.clause_value(c, s))
                .max()
                .expect("XOS has at least one clause"),
            SetFnKind::Table(f) => f.values[s.as_mask() as usize].clone(),
            SetFnKind::HiddenSet(f) => Value::real(f.value_f64(s)),
            SetFnKind::CliqueGadget(f) => Value::Exact(f.raw_value(s)),
        }
    }

    /// `f(S)`, divided by the normalization scalar.
    pub fn value(&self, s: &ItemSet) -> Result<Value> {
        self.check_ground(s)?;
        let raw = self.raw_value(s);
        if self.normalize_by == Value::one() {
            Ok(raw)
        } else {
            Ok(&raw / &self.normalize_by)
        }
    }

    /// Exact evaluation in the quadratic extension, when representable.
    ///
    /// Returns `Ok(None)` for functions carrying float data.
    pub fn value_quad(&self, s: &ItemSet) -> Result<Option<Quad>> {
        self.check_ground(s)?;
        let raw = match &self.kind {
            SetFnKind::HiddenSet(f) => Some(f.value_quad(s)),
            _ => match self.raw_value(s) {
                Value::Exact(r) => Some(Quad::rational(r)),
                Value::Real(_) => None,
            },
        };
        Ok(raw.and_then(|q| match &self.normalize_by {
            Value::Exact(r) => Some(q.div(&Quad::rational(r.clone()))),
            Value::Real(x) if *x == 1.0 => Some(q),
            Value::Real(_) => None,
        }))
    }

    /// Marginal contribution `f(i | S) = f(S + i) - f(S)`. Requires `i` not in `S`.
    pub fn marginal(&self, i: usize, s: &ItemSet) -> Result<Value> {
        self.check_ground(s)?;
        if i >= self.ground_size() {
            return Err(Error::Dimension {
                context: "marginal item index",
                expected: self.ground_size(),
                got: i,
            });
        }
        if s.contains(i) {
            return Err(Error::precondition(format!(
                "marginal of item {i} requires it to be outside the set"
            )));
        }
        Ok(&self.value(&s.with(i))? - &self.value(s)?)
    }

    /// Exhaustive demand oracle: argmax of `f(S) - sum of prices over S`,
    /// ties broken towards the smaller bitmask.
    pub fn demand(&self, prices: &[Value]) -> Result<ItemSet> {
        let n = self.ground_size();
        ItemSet::check_enum_cap(n, "demand enumeration")?;
        if prices.len() != n {
            return Err(Error::Dimension {
                context: "price vector length",
                expected: n,
                got: prices.len(),
            });
        }

        let surplus = |mask: u64| -> Value {
            let set = ItemSet::from_mask(n, mask);
            let mut v = self.value(&set).expect("ground size checked");
            for i in set.iter() {
                v = &v - &prices[i];
            }
            v
        };

        let best = parallel_argmax_mask(n, surplus);
        Ok(ItemSet::from_mask(n, best.1))
    }

    /// Exhaustively tests monotonicity and submodularity on the full lattice.
    ///
    /// Submodularity is tested through the equivalent adjacent-pair form
    /// `f(S+i) + f(S+j) >= f(S+i+j) + f(S)`; a violation is reported as the
    /// nested witness `(i, S, S+j)` with `f(i | S) < f(i | S+j)`.
    pub fn check_classes(&self) -> Result<ClassReport> {
        let n = self.ground_size();
        if n > CLASS_CHECK_CAP {
            return Err(Error::CapExceeded {
                what: "class membership check",
                limit: CLASS_CHECK_CAP,
                got: n,
            });
        }
        let size = 1usize << n;
        let mut table = Vec::with_capacity(size);
        for mask in 0..size as u64 {
            table.push(self.value(&ItemSet::from_mask(n, mask))?);
        }
        let approx: Vec<f64> = table.iter().map(Value::to_f64).collect();
        let exact = self.is_exact();
        // Comfortably above f64 rounding noise, comfortably below real signals.
        const PREFILTER_MARGIN: f64 = 1e-6;

        let ge = |lhs: &Value, rhs: &Value| -> bool {
            if exact {
                lhs >= rhs
            } else {
                lhs.to_f64() >= rhs.to_f64() - REAL_TOL
            }
        };

        let mut monotone_witness = None;
        'mono: for mask in 0..size as u64 {
            for i in 0..n {
                if mask & (1 << i) != 0 {
                    continue;
                }
                let with = mask | (1 << i);
                if approx[with as usize] >= approx[mask as usize] - PREFILTER_MARGIN
                    && ge(&table[with as usize], &table[mask as usize])
                {
                    continue;
                }
                if !ge(&table[with as usize], &table[mask as usize]) {
                    monotone_witness = Some((i, ItemSet::from_mask(n, mask)));
                    break 'mono;
                }
            }
        }

        let mut submodular_witness = None;
        'sub: for mask in 0..size as u64 {
            for i in 0..n {
                if mask & (1 << i) != 0 {
                    continue;
                }
                for j in i + 1..n {
                    if mask & (1 << j) != 0 {
                        continue;
                    }
                    let (mi, mj, mij) =
                        (mask | (1 << i), mask | (1 << j), mask | (1 << i) | (1 << j));
                    let lhs_f = approx[mi as usize] + approx[mj as usize];
                    let rhs_f = approx[mij as usize] + approx[mask as usize];
                    if lhs_f >= rhs_f + PREFILTER_MARGIN {
                        continue;
                    }
                    let lhs = &table[mi as usize] + &table[mj as usize];
                    let rhs = &table[mij as usize] + &table[mask as usize];
                    if !ge(&lhs, &rhs) {
                        submodular_witness =
                            Some((i, ItemSet::from_mask(n, mask), ItemSet::from_mask(n, mj)));
                        break 'sub;
                    }
                }
            }
        }

        Ok(ClassReport {
            monotone: monotone_witness.is_none(),
            submodular: submodular_witness.is_none(),
            monotone_witness,
            submodular_witness,
        })
    }
}

impl From<AdditiveFn> for SetFunction {
    fn from(f: AdditiveFn) -> Self {
        SetFunction {
            kind: SetFnKind::Additive(f),
            normalize_by: Value::one(),
        }
    }
}

impl From<CoverageFn> for SetFunction {
    fn from(f: CoverageFn) -> Self {
        SetFunction {
            kind: SetFnKind::Coverage(f),
            normalize_by: Value::one(),
        }
    }
}

impl From<XosFn> for SetFunction {
    fn from(f: XosFn) -> Self {
        SetFunction {
            kind: SetFnKind::Xos(f),
            normalize_by: Value::one(),
        }
    }
}

impl From<TableFn> for SetFunction {
    fn from(f: TableFn) -> Self {
        SetFunction {
            kind: SetFnKind::Table(f),
            normalize_by: Value::one(),
        }
    }
}

impl From<HiddenSetFn> for SetFunction {
    fn from(f: HiddenSetFn) -> Self {
        SetFunction {
            kind: SetFnKind::HiddenSet(f),
            normalize_by: Value::one(),
        }
    }
}

impl From<CliqueGadgetFn> for SetFunction {
    fn from(f: CliqueGadgetFn) -> Self {
        SetFunction {
            kind: SetFnKind::CliqueGadget(f),
            normalize_by: Value::one(),
        }
    }
}

/// Argmax of `score` over all masks `0..2^n`, ties towards the smaller mask.
/// Partitions the mask range across rayon workers for larger ground sets.
pub(crate) fn parallel_argmax_mask<F>(n: usize, score: F) -> (Value, u64)
where
    F: Fn(u64) -> Value + Sync,
{
    let total: u64 = 1 << n;
    let pick = |acc: (Value, u64), cand: (Value, u64)| -> (Value, u64) {
        match acc.0.total_cmp(&cand.0) {
            Ordering::Less => cand,
            Ordering::Equal if cand.1 < acc.1 => cand,
            _ => acc,
        }
    };
    if n < 14 {
        (0..total)
            .map(|m| (score(m), m))
            .reduce(pick)
            .expect("at least the empty mask")
    } else {
        (0..total)
            .into_par_iter()
            .map(|m| (score(m), m))
            .reduce_with(|a, b| if a.1 < b.1 { pick(a, b) } else { pick(b, a) })
            .expect("at least the empty mask")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn additive_03_05() -> SetFunction {
        SetFunction::additive(vec![Value::ratio(3, 10), Value::ratio(5, 10)]).unwrap()
    }

    fn coverage_two_elt() -> SetFunction {
        // U = {u1, u2}; h(1) = {u1}, h(2) = {u1, u2}
        SetFunction::coverage(CoverageFn::from_index_covers(2, &[vec![0], vec![0, 1]]).unwrap())
    }

    #[test]
    fn additive_value() {
        let f = additive_03_05();
        let s = ItemSet::from_mask(2, 0b11);
        assert_eq!(f.value(&s).unwrap(), Value::ratio(4, 5));
        assert_eq!(f.value(&ItemSet::empty(2)).unwrap(), Value::zero());
    }

    #[test]
    fn coverage_value() {
        let f = coverage_two_elt();
        assert_eq!(
            f.value(&ItemSet::from_mask(2, 0b01)).unwrap(),
            Value::ratio(1, 2)
        );
        assert_eq!(f.value(&ItemSet::from_mask(2, 0b11)).unwrap(), Value::one());
    }

    #[test]
    fn xos_value_takes_max() {
        let f = SetFunction::xos(vec![
            vec![Value::ratio(2, 5), Value::zero()],
            vec![Value::ratio(1, 10), Value::ratio(3, 10)],
        ])
        .unwrap();
        // both clauses evaluate to 0.4 on the full set; max is 0.4
        assert_eq!(
            f.value(&ItemSet::from_mask(2, 0b11)).unwrap(),
            Value::ratio(2, 5)
        );
        assert_eq!(
            f.value(&ItemSet::from_mask(2, 0b10)).unwrap(),
            Value::ratio(3, 10)
        );
    }

    #[test]
    fn marginals() {
        let f = additive_03_05();
        assert_eq!(
            f.marginal(0, &ItemSet::from_mask(2, 0b10)).unwrap(),
            Value::ratio(3, 10)
        );
        let c = coverage_two_elt();
        assert_eq!(
            c.marginal(0, &ItemSet::from_mask(2, 0b10)).unwrap(),
            Value::zero()
        );
        assert_eq!(
            c.marginal(1, &ItemSet::from_mask(2, 0b01)).unwrap(),
            Value::ratio(1, 2)
        );
        assert!(matches!(
            c.marginal(0, &ItemSet::from_mask(2, 0b01)),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn demand_enumerates() {
        let f = additive_03_05();
        let d = f
            .demand(&[Value::ratio(1, 10), Value::ratio(6, 10)])
            .unwrap();
        assert_eq!(d.indices(), vec![0]);
        // all-negative surplus picks the empty set
        let d = f
            .demand(&[Value::ratio(4, 10), Value::ratio(6, 10)])
            .unwrap();
        assert!(d.is_empty());
        // zero prices on a strictly monotone function pick the full set
        let d = f.demand(&[Value::zero(), Value::zero()]).unwrap();
        assert_eq!(d.len(), 2);
    }

    #[test]
    fn demand_rejects_oversized_ground() {
        let f = SetFunction::additive(vec![Value::one(); 25]).unwrap();
        assert!(matches!(
            f.demand(&vec![Value::zero(); 25]),
            Err(Error::CapExceeded { .. })
        ));
    }

    #[test]
    fn class_check_additive_and_coverage() {
        let rep = additive_03_05().check_classes().unwrap();
        assert!(rep.monotone && rep.submodular);
        let rep = coverage_two_elt().check_classes().unwrap();
        assert!(rep.monotone && rep.submodular);
    }

    #[test]
    fn class_check_finds_supermodular_witness() {
        let f = SetFunction::table(vec![
            Value::zero(),
            Value::zero(),
            Value::zero(),
            Value::one(),
        ])
        .unwrap();
        let rep = f.check_classes().unwrap();
        assert!(!rep.submodular);
        let (i, s, superset) = rep.submodular_witness.unwrap();
        assert_eq!(i, 0);
        assert!(s.is_empty());
        assert_eq!(superset.indices(), vec![1]);
        assert!(rep.monotone);
    }

    #[test]
    fn normalization_divides() {
        let f = additive_03_05()
            .with_normalization(Value::ratio(4, 5))
            .unwrap();
        assert_eq!(f.value(&ItemSet::from_mask(2, 0b11)).unwrap(), Value::one());
    }

    #[test]
    fn dimension_errors() {
        let f = additive_03_05();
        assert!(matches!(
            f.value(&ItemSet::empty(3)),
            Err(Error::Dimension { .. })
        ));
        assert!(matches!(
            f.demand(&[Value::zero()]),
            Err(Error::Dimension { .. })
        ));
    }
}
