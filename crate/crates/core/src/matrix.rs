//! Matrix semantics for the concurrency-free fragment.
//!
//! A program denotes a `|W| × |W|` matrix over the lattice; choice is the
//! entrywise join, composition is the matrix product with `;` as product and
//! `+` as sum, and star is computed by the block construction.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::lattice::{ActionLattice, LatticeValue};
use crate::mrel::FuzzyMultirelation;
use crate::syntax::{Formula, Program};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GdlError {
    #[error("dimension mismatch: {0}×{1} against {2}×{3}")]
    Dimension(usize, usize, usize, usize),
    #[error("parallel composition has no matrix semantics: `{0}`")]
    Parallel(String),
    #[error("unknown program `{0}`")]
    UnknownProgram(String),
    #[error("unknown proposition `{0}`")]
    UnknownProposition(String),
    #[error("state {0} is out of range")]
    State(usize),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LatticeMatrix {
    lattice: ActionLattice,
    rows: usize,
    cols: usize,
    data: Vec<LatticeValue>,
}

impl LatticeMatrix {
    pub fn zero(lattice: &ActionLattice, n: usize) -> Self {
        Self::filled(lattice, n, n, lattice.zero())
    }

    pub fn identity(lattice: &ActionLattice, n: usize) -> Self {
        let mut m = Self::zero(lattice, n);
        for i in 0..n {
            m.set(i, i, lattice.one());
        }
        m
    }

    fn filled(lattice: &ActionLattice, rows: usize, cols: usize, v: LatticeValue) -> Self {
        LatticeMatrix {
            lattice: lattice.clone(),
            rows,
            cols,
            data: vec![v; rows * cols],
        }
    }

    /// Square matrix from rows; fails unless every row has `rows.len()` entries.
    pub fn from_rows(lattice: &ActionLattice, rows: Vec<Vec<LatticeValue>>) -> Result<Self, GdlError> {
        let n = rows.len();
        let mut data = Vec::with_capacity(n * n);
        for r in &rows {
            if r.len() != n {
                return Err(GdlError::Dimension(n, n, 1, r.len()));
            }
            data.extend_from_slice(r);
        }
        Ok(LatticeMatrix {
            lattice: lattice.clone(),
            rows: n,
            cols: n,
            data,
        })
    }

    /// `M(w, w') = Σ_{(w,φ)} φ(w')`; exact for singleton-support relations.
    pub fn from_multirelation(r: &FuzzyMultirelation) -> Self {
        let l = r.lattice();
        let mut m = Self::zero(l, r.universe());
        for (s, fs) in r.pairs() {
            for &(t, x) in fs.entries() {
                let cur = m.get(s.0, t.0);
                m.set(s.0, t.0, l.join(cur, x));
            }
        }
        m
    }

    pub fn lattice(&self) -> &ActionLattice {
        &self.lattice
    }

    pub fn dimension(&self) -> usize {
        self.rows
    }

    pub fn get(&self, i: usize, j: usize) -> LatticeValue {
        self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: LatticeValue) {
        self.data[i * self.cols + j] = v;
    }

    pub fn rows(&self) -> Vec<Vec<LatticeValue>> {
        self.data.chunks(self.cols.max(1)).take(self.rows).map(<[_]>::to_vec).collect()
    }

    pub fn add(&self, other: &Self) -> Result<Self, GdlError> {
        if (self.rows, self.cols) != (other.rows, other.cols) {
            return Err(GdlError::Dimension(self.rows, self.cols, other.rows, other.cols));
        }
        let l = &self.lattice;
        let data = self.data.iter().zip(&other.data).map(|(&a, &b)| l.join(a, b)).collect();
        Ok(LatticeMatrix { data, ..self.clone() })
    }

    pub fn mul(&self, other: &Self) -> Result<Self, GdlError> {
        if self.cols != other.rows {
            return Err(GdlError::Dimension(self.rows, self.cols, other.rows, other.cols));
        }
        let l = &self.lattice;
        let mut out = Self::filled(l, self.rows, other.cols, l.zero());
        for i in 0..self.rows {
            for j in 0..other.cols {
                let v = l.sum((0..self.cols).map(|k| l.seq(self.get(i, k), other.get(k, j))));
                out.set(i, j, v);
            }
        }
        Ok(out)
    }

    /// Pointwise order.
    pub fn leq(&self, other: &Self) -> bool {
        self.data.iter().zip(&other.data).all(|(&a, &b)| self.lattice.leq(a, b))
    }

    fn block(&self, r0: usize, r1: usize, c0: usize, c1: usize) -> Self {
        let mut m = Self::filled(&self.lattice, r1 - r0, c1 - c0, self.lattice.zero());
        for i in r0..r1 {
            for j in c0..c1 {
                m.set(i - r0, j - c0, self.get(i, j));
            }
        }
        m
    }

    fn paste(&mut self, r0: usize, c0: usize, m: &Self) {
        for i in 0..m.rows {
            for j in 0..m.cols {
                self.set(r0 + i, c0 + j, m.get(i, j));
            }
        }
    }

    /// Kleene star of a square matrix, splitting at `⌈n/2⌉`:
    ///
    /// ```text
    /// [A B]*   [A* + A*B F* C A*   A*B F*]
    /// [C D]  = [F* C A*            F*    ]     F = D + C A* B
    /// ```
    pub fn star(&self) -> Self {
        assert_eq!(self.rows, self.cols, "star of a non-square matrix");
        let n = self.rows;
        let l = &self.lattice;
        match n {
            0 => self.clone(),
            1 => Self::filled(l, 1, 1, l.star(self.get(0, 0))),
            _ => {
                let k = n.div_ceil(2);
                let a = self.block(0, k, 0, k);
                let b = self.block(0, k, k, n);
                let c = self.block(k, n, 0, k);
                let d = self.block(k, n, k, n);
                let mul = |x: &Self, y: &Self| x.mul(y).expect("block dimensions");
                let add = |x: &Self, y: &Self| x.add(y).expect("block dimensions");
                let a_s = a.star();
                let a_s_b = mul(&a_s, &b);
                let c_a_s = mul(&c, &a_s);
                let f_s = add(&d, &mul(&c, &a_s_b)).star();
                let tr = mul(&a_s_b, &f_s);
                let tl = add(&a_s, &mul(&tr, &c_a_s));
                let bl = mul(&f_s, &c_a_s);
                let mut out = Self::zero(l, n);
                out.paste(0, 0, &tl);
                out.paste(0, k, &tr);
                out.paste(k, 0, &bl);
                out.paste(k, k, &f_s);
                out
            }
        }
    }
}

/// A concurrency-free model: valuation plus one matrix per atomic program.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GdlModel {
    pub lattice: ActionLattice,
    pub states: usize,
    pub valuation: BTreeMap<String, Vec<LatticeValue>>,
    pub programs: BTreeMap<String, LatticeMatrix>,
}

pub fn gdl_interpret(model: &GdlModel, program: &Program) -> Result<LatticeMatrix, GdlError> {
    match program {
        Program::Atomic(n) => model
            .programs
            .get(n)
            .cloned()
            .ok_or_else(|| GdlError::UnknownProgram(n.clone())),
        Program::Par(..) => Err(GdlError::Parallel(program.render())),
        Program::Seq(a, b) => gdl_interpret(model, a)?.mul(&gdl_interpret(model, b)?),
        Program::Choice(a, b) => gdl_interpret(model, a)?.add(&gdl_interpret(model, b)?),
        Program::Star(a) => Ok(gdl_interpret(model, a)?.star()),
    }
}

/// Satisfaction degree of `formula` at every state.
pub fn gdl_sat_all(model: &GdlModel, formula: &Formula) -> Result<Vec<LatticeValue>, GdlError> {
    let l = &model.lattice;
    let n = model.states;
    let zip = |a: Vec<LatticeValue>, b: Vec<LatticeValue>, f: &dyn Fn(LatticeValue, LatticeValue) -> LatticeValue| {
        a.into_iter().zip(b).map(|(x, y)| f(x, y)).collect::<Vec<_>>()
    };
    Ok(match formula {
        Formula::Top => vec![l.top(); n],
        Formula::Bot => vec![l.bottom(); n],
        Formula::Prop(p) => model
            .valuation
            .get(p)
            .cloned()
            .ok_or_else(|| GdlError::UnknownProposition(p.clone()))?,
        Formula::And(a, b) => zip(gdl_sat_all(model, a)?, gdl_sat_all(model, b)?, &|x, y| l.meet(x, y)),
        Formula::Or(a, b) => zip(gdl_sat_all(model, a)?, gdl_sat_all(model, b)?, &|x, y| l.join(x, y)),
        Formula::Implies(a, b) => {
            zip(gdl_sat_all(model, a)?, gdl_sat_all(model, b)?, &|x, y| l.residuum(x, y))
        }
        Formula::Iff(a, b) => zip(gdl_sat_all(model, a)?, gdl_sat_all(model, b)?, &|x, y| {
            l.seq(l.residuum(x, y), l.residuum(y, x))
        }),
        Formula::Diamond(p, a) => {
            let m = gdl_interpret(model, p)?;
            let v = gdl_sat_all(model, a)?;
            (0..n).map(|w| l.sum((0..n).map(|u| l.seq(m.get(w, u), v[u])))).collect()
        }
        Formula::Box(p, a) => {
            let m = gdl_interpret(model, p)?;
            let v = gdl_sat_all(model, a)?;
            (0..n).map(|w| l.product((0..n).map(|u| l.residuum(m.get(w, u), v[u])))).collect()
        }
    })
}

pub fn gdl_sat(model: &GdlModel, w: usize, formula: &Formula) -> Result<LatticeValue, GdlError> {
    if w >= model.states {
        return Err(GdlError::State(w));
    }
    Ok(gdl_sat_all(model, formula)?[w])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse_formula;
    use proptest::prelude::*;

    fn bool_matrix(n: usize, bits: u32) -> LatticeMatrix {
        let l = ActionLattice::boolean();
        let mut m = LatticeMatrix::zero(&l, n);
        for i in 0..n {
            for j in 0..n {
                if bits >> (i * n + j) & 1 == 1 {
                    m.set(i, j, l.top());
                }
            }
        }
        m
    }

    fn warshall(n: usize, bits: u32) -> u32 {
        let mut r = vec![vec![false; n]; n];
        for (i, row) in r.iter_mut().enumerate() {
            for (j, cell) in row.iter_mut().enumerate() {
                *cell = i == j || bits >> (i * n + j) & 1 == 1;
            }
        }
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    r[i][j] = r[i][j] || (r[i][k] && r[k][j]);
                }
            }
        }
        let mut out = 0;
        for i in 0..n {
            for j in 0..n {
                if r[i][j] {
                    out |= 1 << (i * n + j);
                }
            }
        }
        out
    }

    #[test]
    fn arithmetic_examples() {
        let l = ActionLattice::godel(3).unwrap();
        let half = l.parse_literal("1/2").unwrap();
        let m = LatticeMatrix::from_rows(&l, vec![vec![half, l.top()], vec![l.zero(), half]]).unwrap();
        assert_eq!(m.add(&LatticeMatrix::zero(&l, 2)).unwrap(), m);
        assert_eq!(m.mul(&LatticeMatrix::identity(&l, 2)).unwrap(), m);
        assert_eq!(bool_matrix(2, 0b0010).mul(&bool_matrix(2, 0b0010)).unwrap(), bool_matrix(2, 0));
        assert!(m.add(&LatticeMatrix::zero(&l, 3)).is_err());
    }

    #[test]
    fn star_examples() {
        assert_eq!(bool_matrix(2, 0b0010).star(), bool_matrix(2, 0b1011));
        let l = ActionLattice::godel(3).unwrap();
        let z = LatticeMatrix::zero(&l, 3).star();
        for i in 0..3 {
            assert_eq!(z.get(i, i), l.top());
        }
        let half = l.parse_literal("1/2").unwrap();
        let one = LatticeMatrix::from_rows(&l, vec![vec![half]]).unwrap();
        assert_eq!(one.star().get(0, 0), l.star(half));
    }

    #[test]
    fn boolean_star_is_reflexive_transitive_closure() {
        for n in 1..=3 {
            for bits in 0..(1u32 << (n * n)) {
                assert_eq!(bool_matrix(n, bits).star(), bool_matrix(n, warshall(n, bits)), "n={n} bits={bits:b}");
            }
        }
    }

    #[test]
    fn parallel_is_rejected() {
        let l = ActionLattice::boolean();
        let model = GdlModel {
            lattice: l.clone(),
            states: 1,
            valuation: BTreeMap::new(),
            programs: [("a".to_string(), LatticeMatrix::zero(&l, 1))].into_iter().collect(),
        };
        let f = parse_formula("<a & a>true").unwrap();
        assert!(matches!(gdl_sat(&model, 0, &f), Err(GdlError::Parallel(_))));
        let f = parse_formula("<b>true").unwrap();
        assert_eq!(gdl_sat(&model, 0, &f), Err(GdlError::UnknownProgram("b".into())));
    }

    #[test]
    fn graded_diamond_example() {
        let l = ActionLattice::godel(3).unwrap();
        let half = l.parse_literal("1/2").unwrap();
        let z = l.zero();
        let model = GdlModel {
            lattice: l.clone(),
            states: 2,
            valuation: [("p".to_string(), vec![z, l.top()])].into_iter().collect(),
            programs: [(
                "a".to_string(),
                LatticeMatrix::from_rows(&l, vec![vec![z, half], vec![z, z]]).unwrap(),
            )]
            .into_iter()
            .collect(),
        };
        assert_eq!(gdl_sat(&model, 0, &parse_formula("<a>p").unwrap()), Ok(half));
        assert_eq!(gdl_sat(&model, 0, &parse_formula("true").unwrap()), Ok(l.top()));
        assert_eq!(gdl_sat(&model, 0, &parse_formula("false").unwrap()), Ok(l.bottom()));
    }

    fn godel_matrix(n: usize) -> impl Strategy<Value = LatticeMatrix> {
        proptest::collection::vec(0usize..3, n * n).prop_map(move |v| {
            let l = ActionLattice::godel(3).unwrap();
            let rows = v.chunks(n).map(|r| r.iter().map(|&i| l.value(i).unwrap()).collect()).collect();
            LatticeMatrix::from_rows(&l, rows).unwrap()
        })
    }

    proptest! {
        #[test]
        fn star_dominates_identity_and_unfolds(m in (1usize..5).prop_flat_map(godel_matrix)) {
            let l = m.lattice().clone();
            let s = m.star();
            let n = m.dimension();
            prop_assert!(LatticeMatrix::identity(&l, n).leq(&s));
            prop_assert!(m.leq(&s));
            prop_assert!(s.mul(&s).unwrap().leq(&s));
        }

        #[test]
        fn diamond_distributes_over_or(
            m in godel_matrix(3),
            p in proptest::collection::vec(0usize..3, 3),
            q in proptest::collection::vec(0usize..3, 3),
        ) {
            let l = m.lattice().clone();
            let val = |v: &Vec<usize>| v.iter().map(|&i| l.value(i).unwrap()).collect::<Vec<_>>();
            let model = GdlModel {
                lattice: l.clone(),
                states: 3,
                valuation: [("p".to_string(), val(&p)), ("q".to_string(), val(&q))].into_iter().collect(),
                programs: [("a".to_string(), m)].into_iter().collect(),
            };
            let lhs = gdl_sat_all(&model, &parse_formula("<a>(p | q)").unwrap()).unwrap();
            let rhs = gdl_sat_all(&model, &parse_formula("<a>p | <a>q").unwrap()).unwrap();
            prop_assert_eq!(lhs, rhs);
        }
    }
}
