//! Hinge functions and their products, the building blocks of every MARS-family model here.
//!
//! A [`HingeTerm`] is `max(0, x[j] - c)` (positive sign) or `max(0, c - x[j])`
//! (negative sign). A [`BasisFunction`] is a product of hinges on distinct
//! variables; the empty product is the constant function `1`.

use std::collections::HashMap;
use std::fmt;

use ndarray::{Array1, ArrayView1};
use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "i8", into = "i8")]
pub enum Sign {
    Negative,
    Positive,
}

impl Sign {
    pub fn as_f64(self) -> f64 {
        match self {
            Sign::Positive => 1.0,
            Sign::Negative => -1.0,
        }
    }
}

impl From<Sign> for i8 {
    fn from(s: Sign) -> i8 {
        match s {
            Sign::Positive => 1,
            Sign::Negative => -1,
        }
    }
}

impl TryFrom<i8> for Sign {
    type Error = String;

    fn try_from(v: i8) -> Result<Self, String> {
        match v {
            1 => Ok(Sign::Positive),
            -1 => Ok(Sign::Negative),
            other => Err(format!("hinge sign must be +1 or -1, got {other}")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HingeTerm {
    pub variable: usize,
    pub sign: Sign,
    pub knot: f64,
}

impl HingeTerm {
    pub fn new(variable: usize, sign: Sign, knot: f64) -> Self {
        Self {
            variable,
            sign,
            knot,
        }
    }

    /// Hinge value at a scalar covariate value.
    #[inline]
    pub fn apply(&self, xj: f64) -> f64 {
        match self.sign {
            Sign::Positive => (xj - self.knot).max(0.0),
            Sign::Negative => (self.knot - xj).max(0.0),
        }
    }

    /// Hinge value at a full covariate vector.
    pub fn eval(&self, x: ArrayView1<'_, f64>) -> Result<f64> {
        match x.get(self.variable) {
            Some(&xj) => Ok(self.apply(xj)),
            None => Err(Error::InvalidInput(format!(
                "hinge on variable {} evaluated at a {}-vector",
                self.variable,
                x.len()
            ))),
        }
    }

    fn key(&self) -> (usize, i8, u64) {
        // -0.0 and 0.0 are the same knot
        let knot = if self.knot == 0.0 { 0.0 } else { self.knot };
        (self.variable, i8::from(self.sign), knot.to_bits())
    }
}

/// Product of hinge terms, kept sorted by variable index.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(try_from = "Vec<HingeTerm>", into = "Vec<HingeTerm>")]
pub struct BasisFunction {
    terms: Vec<HingeTerm>,
}

impl BasisFunction {
    pub fn constant() -> Self {
        Self { terms: Vec::new() }
    }

    /// Builds a basis function; rejects repeated variables and non-finite knots.
    pub fn new(mut terms: Vec<HingeTerm>) -> Result<Self> {
        if let Some(t) = terms.iter().find(|t| !t.knot.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "non-finite knot {} on variable {}",
                t.knot, t.variable
            )));
        }
        terms.sort_by(|a, b| a.key().cmp(&b.key()));
        if terms.windows(2).any(|w| w[0].variable == w[1].variable) {
            return Err(Error::InvalidInput(
                "a basis function may use each variable at most once".into(),
            ));
        }
        Ok(Self { terms })
    }

    /// This function multiplied by one more hinge.
    pub fn with_term(&self, term: HingeTerm) -> Result<Self> {
        let mut terms = self.terms.clone();
        terms.push(term);
        Self::new(terms)
    }

    pub fn terms(&self) -> &[HingeTerm] {
        &self.terms
    }

    pub fn degree(&self) -> usize {
        self.terms.len()
    }

    pub fn is_constant(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn uses_variable(&self, j: usize) -> bool {
        self.terms.iter().any(|t| t.variable == j)
    }

    /// One past the largest variable index referenced (0 for the constant).
    pub fn min_dimension(&self) -> usize {
        self.terms.iter().map(|t| t.variable + 1).max().unwrap_or(0)
    }

    /// Product of hinges at `x`; the constant function evaluates to 1.
    pub fn eval(&self, x: ArrayView1<'_, f64>) -> Result<f64> {
        self.terms
            .iter()
            .try_fold(1.0, |acc, t| Ok(acc * t.eval(x)?))
    }

    /// Unchecked evaluation on a row slice; callers validate dimensions up front.
    #[inline]
    pub(crate) fn eval_slice(&self, x: &[f64]) -> f64 {
        let mut v = 1.0;
        for t in &self.terms {
            v *= t.apply(x[t.variable]);
            if v == 0.0 {
                return 0.0;
            }
        }
        v
    }

    /// Multiset equality of `(variable, sign, knot)` with exact knot comparison.
    pub fn same_as(&self, other: &BasisFunction) -> bool {
        self.terms.len() == other.terms.len()
            && self
                .terms
                .iter()
                .zip(&other.terms)
                .all(|(a, b)| a.key() == b.key())
    }

    fn key(&self) -> Vec<(usize, i8, u64)> {
        self.terms.iter().map(HingeTerm::key).collect()
    }
}

impl TryFrom<Vec<HingeTerm>> for BasisFunction {
    type Error = String;

    fn try_from(terms: Vec<HingeTerm>) -> Result<Self, String> {
        BasisFunction::new(terms).map_err(|e| e.to_string())
    }
}

impl From<BasisFunction> for Vec<HingeTerm> {
    fn from(b: BasisFunction) -> Self {
        b.terms
    }
}

impl fmt::Display for BasisFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "1");
        }
        for (k, t) in self.terms.iter().enumerate() {
            if k > 0 {
                write!(f, "*")?;
            }
            match t.sign {
                Sign::Positive => write!(f, "[x{}-{}]+", t.variable + 1, t.knot)?,
                Sign::Negative => write!(f, "[{}-x{}]+", t.knot, t.variable + 1)?,
            }
        }
        Ok(())
    }
}

/// Hinge value `max(0, ±(x[j] - c))`.
/// Rejects functions that read a covariate beyond `p` or carry a non-finite knot.
pub(crate) fn check_functions<'a>(functions: impl IntoIterator<Item = &'a BasisFunction>, p: usize) -> Result<()> {
    for f in functions {
        for term in f.terms() {
            if term.variable >= p || !term.knot.is_finite() {
                return Err(Error::ArchiveSchema(format!(
                    "basis term on variable {} with knot {} does not fit {p} covariates",
                    term.variable, term.knot
                )));
            }
        }
    }
    Ok(())
}

pub fn hinge_eval(term: &HingeTerm, x: ArrayView1<'_, f64>) -> Result<f64> {
    term.eval(x)
}

pub fn basis_eval(b: &BasisFunction, x: ArrayView1<'_, f64>) -> Result<f64> {
    b.eval(x)
}

pub fn basis_equal(a: &BasisFunction, b: &BasisFunction) -> bool {
    a.same_as(b)
}

/// Basis function evaluated on every row of a dataset.
pub fn design_column(b: &BasisFunction, data: &Dataset) -> Result<Array1<f64>> {
    check_dimension(b, data.p())?;
    Ok(evaluate_rows(b, data.covariates()))
}

pub(crate) fn check_dimension(b: &BasisFunction, p: usize) -> Result<()> {
    if b.min_dimension() > p {
        return Err(Error::InvalidInput(format!(
            "basis function {b} references variable {} but data has {p} covariates",
            b.min_dimension()
        )));
    }
    Ok(())
}

pub(crate) fn evaluate_rows(b: &BasisFunction, x: &ndarray::Array2<f64>) -> Array1<f64> {
    let mut col = Array1::zeros(x.nrows());
    for (i, row) in x.rows().into_iter().enumerate() {
        col[i] = match row.as_slice() {
            Some(s) => b.eval_slice(s),
            None => b.eval_slice(&row.to_vec()),
        };
    }
    col
}

/// Deduplicated union of basis functions; the constant function is always first.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(try_from = "CollectionRepr", into = "CollectionRepr")]
pub struct BasisCollection {
    functions: Vec<BasisFunction>,
    /// Bootstrap replicate that first produced each function.
    provenance: Vec<usize>,
    index: HashMap<Vec<(usize, i8, u64)>, usize>,
}

impl PartialEq for BasisCollection {
    fn eq(&self, other: &Self) -> bool {
        self.functions == other.functions && self.provenance == other.provenance
    }
}

#[derive(Serialize, Deserialize)]
struct CollectionRepr {
    functions: Vec<BasisFunction>,
    provenance: Vec<usize>,
}

impl TryFrom<CollectionRepr> for BasisCollection {
    type Error = String;

    fn try_from(r: CollectionRepr) -> Result<Self, String> {
        BasisCollection::from_parts(r.functions, r.provenance).map_err(|e| e.to_string())
    }
}

impl From<BasisCollection> for CollectionRepr {
    fn from(c: BasisCollection) -> Self {
        CollectionRepr {
            functions: c.functions,
            provenance: c.provenance,
        }
    }
}

impl Default for BasisCollection {
    fn default() -> Self {
        Self::new()
    }
}

impl BasisCollection {
    pub fn new() -> Self {
        let mut c = Self {
            functions: Vec::new(),
            provenance: Vec::new(),
            index: HashMap::new(),
        };
        c.insert(BasisFunction::constant(), 0);
        c
    }

    /// Adds `f` unless an equal function is present; returns whether it was new.
    pub fn insert(&mut self, f: BasisFunction, replicate: usize) -> bool {
        let key = f.key();
        if self.index.contains_key(&key) {
            return false;
        }
        self.index.insert(key, self.functions.len());
        self.functions.push(f);
        self.provenance.push(replicate);
        true
    }

    pub fn len(&self) -> usize {
        self.functions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.functions.is_empty()
    }

    pub fn functions(&self) -> &[BasisFunction] {
        &self.functions
    }

    pub fn provenance(&self) -> &[usize] {
        &self.provenance
    }

    pub fn get(&self, i: usize) -> &BasisFunction {
        &self.functions[i]
    }

    pub fn position(&self, f: &BasisFunction) -> Option<usize> {
        self.functions.iter().position(|g| g.same_as(f))
    }

    /// Keeps only the functions for which `keep` returns true; the constant always stays.
    pub fn retain_indices(&self, keep: &[bool]) -> BasisCollection {
        let mut out = BasisCollection::new();
        for (k, f) in self.functions.iter().enumerate().skip(1) {
            if keep[k] {
                out.insert(f.clone(), self.provenance[k]);
            }
        }
        out
    }

    /// Validates an archive-loaded collection (constant first, no duplicates).
    pub fn from_parts(
        functions: Vec<BasisFunction>,
        provenance: Vec<usize>,
    ) -> Result<Self> {
        if functions.len() != provenance.len() {
            return Err(Error::ArchiveSchema(
                "basis provenance length differs from basis length".into(),
            ));
        }
        if functions.first().map(|f| !f.is_constant()).unwrap_or(true) {
            return Err(Error::ArchiveSchema(
                "basis collection must start with the constant function".into(),
            ));
        }
        let mut c = BasisCollection::new();
        c.provenance[0] = provenance[0];
        for (f, r) in functions.into_iter().zip(provenance).skip(1) {
            if !c.insert(f, r) {
                return Err(Error::ArchiveSchema(
                    "basis collection contains duplicate functions".into(),
                ));
            }
        }
        Ok(c)
    }
}
