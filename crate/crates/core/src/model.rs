//! Parameters, product basis and Hamiltonian assembly for the Rabi dimer.
//!
//! The Hamiltonian in units of the cavity frequency is
//!
//! ```text
//! H/ω = Σ_{i=L,R} [ a†_i a_i + (η/2) σᶻ_i − (g√η/2)(a_i + a†_i) σˣ_i ]
//!       + J (a_L + a†_L)(a_R + a†_R)
//! ```
//!
//! with `η = Ω/ω` and `g = 2λ/√(Ωω)`. Each mode keeps the occupations
//! `0 .. n_cut`; creation amplitudes that would leave that range are dropped.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sparse::SparseHamiltonian;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    /// Atom-cavity coupling `2λ/√(Ωω)`.
    pub g: f64,
    /// Frequency ratio `Ω/ω`.
    pub eta: f64,
    /// Inter-cavity hopping strength.
    pub j: f64,
    /// Number of Fock states kept per mode (occupations `0 .. n_cut`).
    pub n_cut: usize,
}

impl ModelParams {
    pub fn new(g: f64, eta: f64, j: f64, n_cut: usize) -> Result<Self> {
        let p = Self { g, eta, j, n_cut };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.g.is_finite() && self.g >= 0.0) {
            return Err(Error::InvalidParams(format!("g must be >= 0, got {}", self.g)));
        }
        if !(self.eta.is_finite() && self.eta > 0.0) {
            return Err(Error::InvalidParams(format!("eta must be > 0, got {}", self.eta)));
        }
        if !(self.j.is_finite() && self.j >= 0.0) {
            return Err(Error::InvalidParams(format!("J must be >= 0, got {}", self.j)));
        }
        // n_cut = 1 freezes both modes in the vacuum; still a valid (if trivial) model.
        if self.n_cut == 0 {
            return Err(Error::InvalidParams("n_cut must be >= 1".into()));
        }
        Ok(())
    }

    pub fn with_j(self, j: f64) -> Self {
        Self { j, ..self }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Spin {
    Down,
    Up,
}

impl Spin {
    pub fn bit(self) -> usize {
        match self {
            Spin::Down => 0,
            Spin::Up => 1,
        }
    }

    pub fn from_bit(bit: usize) -> Self {
        if bit == 0 {
            Spin::Down
        } else {
            Spin::Up
        }
    }

    /// Eigenvalue of σᶻ.
    pub fn sz(self) -> f64 {
        match self {
            Spin::Down => -1.0,
            Spin::Up => 1.0,
        }
    }

    pub fn flipped(self) -> Self {
        match self {
            Spin::Down => Spin::Up,
            Spin::Up => Spin::Down,
        }
    }
}

/// One product state `|n_L, n_R; s_L, s_R⟩`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct BasisIndex {
    pub n_l: usize,
    pub n_r: usize,
    pub s_l: Spin,
    pub s_r: Spin,
}

impl BasisIndex {
    /// Flat index `((n_l·n_cut + n_r)·2 + s_l)·2 + s_r`.
    pub fn encode(&self, n_cut: usize) -> usize {
        debug_assert!(self.n_l < n_cut && self.n_r < n_cut);
        ((self.n_l * n_cut + self.n_r) * 2 + self.s_l.bit()) * 2 + self.s_r.bit()
    }

    pub fn decode(index: usize, n_cut: usize) -> Self {
        let s_r = Spin::from_bit(index & 1);
        let s_l = Spin::from_bit((index >> 1) & 1);
        let photons = index >> 2;
        Self {
            n_l: photons / n_cut,
            n_r: photons % n_cut,
            s_l,
            s_r,
        }
    }

    /// Eigenvalue of `σᶻ_L σᶻ_R (−1)^(n_L + n_R)`.
    pub fn parity(&self) -> i8 {
        let spin = if self.s_l == self.s_r { 1 } else { -1 };
        if (self.n_l + self.n_r) % 2 == 0 {
            spin
        } else {
            -spin
        }
    }

    /// The same state with the two cavities exchanged.
    pub fn swapped(&self) -> Self {
        Self {
            n_l: self.n_r,
            n_r: self.n_l,
            s_l: self.s_r,
            s_r: self.s_l,
        }
    }
}

pub fn basis_dim(params: &ModelParams) -> usize {
    4 * params.n_cut * params.n_cut
}

/// Nonzero matrix elements of `a + a†` acting on `|n⟩` within `0 .. n_cut`.
fn quadrature_moves(n: usize, n_cut: usize) -> impl Iterator<Item = (usize, f64)> {
    let down = (n > 0).then(|| (n - 1, (n as f64).sqrt()));
    let up = (n + 1 < n_cut).then(|| (n + 1, ((n + 1) as f64).sqrt()));
    down.into_iter().chain(up)
}

fn assemble(n_cut: usize, mut row_entries: impl FnMut(BasisIndex, &mut Vec<(usize, f64)>)) -> SparseHamiltonian {
    let dim = 4 * n_cut * n_cut;
    let mut row_ptr = Vec::with_capacity(dim + 1);
    let mut col_idx = Vec::with_capacity(dim * 9);
    let mut values = Vec::with_capacity(dim * 9);
    let mut scratch = Vec::with_capacity(9);
    row_ptr.push(0);
    for r in 0..dim {
        scratch.clear();
        row_entries(BasisIndex::decode(r, n_cut), &mut scratch);
        scratch.sort_by_key(|&(c, _)| c);
        for &(c, v) in &scratch {
            col_idx.push(c);
            values.push(v);
        }
        row_ptr.push(col_idx.len());
    }
    SparseHamiltonian::from_csr_parts(dim, row_ptr, col_idx, values)
}

/// Assembles `H(J)/ω` over the truncated product basis.
pub fn build_hamiltonian(params: &ModelParams) -> Result<SparseHamiltonian> {
    params.validate()?;
    let n_cut = params.n_cut;
    let half_eta = 0.5 * params.eta;
    let coupling = -0.5 * params.g * params.eta.sqrt();
    let hop = params.j;

    Ok(assemble(n_cut, |b, row| {
        let diag = (b.n_l + b.n_r) as f64 + half_eta * (b.s_l.sz() + b.s_r.sz());
        row.push((b.encode(n_cut), diag));

        if coupling != 0.0 {
            for (n, amp) in quadrature_moves(b.n_l, n_cut) {
                let to = BasisIndex { n_l: n, s_l: b.s_l.flipped(), ..b };
                row.push((to.encode(n_cut), coupling * amp));
            }
            for (n, amp) in quadrature_moves(b.n_r, n_cut) {
                let to = BasisIndex { n_r: n, s_r: b.s_r.flipped(), ..b };
                row.push((to.encode(n_cut), coupling * amp));
            }
        }

        if hop != 0.0 {
            for (nl, al) in quadrature_moves(b.n_l, n_cut) {
                for (nr, ar) in quadrature_moves(b.n_r, n_cut) {
                    let to = BasisIndex { n_l: nl, n_r: nr, ..b };
                    row.push((to.encode(n_cut), hop * (al * ar)));
                }
            }
        }
    }))
}

/// The hopping operator `(a_L + a†_L)(a_R + a†_R)`, i.e. `∂H/∂J`.
pub fn hopping_operator(n_cut: usize) -> SparseHamiltonian {
    assemble(n_cut, |b, row| {
        for (nl, al) in quadrature_moves(b.n_l, n_cut) {
            for (nr, ar) in quadrature_moves(b.n_r, n_cut) {
                let to = BasisIndex { n_l: nl, n_r: nr, ..b };
                row.push((to.encode(n_cut), al * ar));
            }
        }
    })
}

/// Applies `a_i + a†_i` for one cavity to a state vector.
pub(crate) fn apply_quadrature(state: &[f64], n_cut: usize, left: bool, out: &mut [f64]) {
    out.iter_mut().for_each(|x| *x = 0.0);
    for (idx, &amp) in state.iter().enumerate() {
        if amp == 0.0 {
            continue;
        }
        let b = BasisIndex::decode(idx, n_cut);
        let n = if left { b.n_l } else { b.n_r };
        for (m, a) in quadrature_moves(n, n_cut) {
            let to = if left {
                BasisIndex { n_l: m, ..b }
            } else {
                BasisIndex { n_r: m, ..b }
            };
            out[to.encode(n_cut)] += a * amp;
        }
    }
}

/// Diagonal of the total parity `σᶻ_L σᶻ_R (−1)^(n_L + n_R)`.
pub fn parity_operator(params: &ModelParams) -> Vec<i8> {
    (0..basis_dim(params))
        .map(|i| BasisIndex::decode(i, params.n_cut).parity())
        .collect()
}

/// Basis indices belonging to one parity sector, in increasing order.
pub fn sector_indices(n_cut: usize, parity: i8) -> Vec<usize> {
    (0..4 * n_cut * n_cut)
        .filter(|&i| BasisIndex::decode(i, n_cut).parity() == parity)
        .collect()
}

/// Text dump: `# dim=<d> g=<g> eta=<η> J=<J> ncut=<n>` then `row col value` lines.
pub fn write_hamiltonian_dump<W: Write>(
    h: &SparseHamiltonian,
    params: &ModelParams,
    out: W,
) -> Result<()> {
    let header = format!(
        "# dim={} g={} eta={} J={} ncut={}",
        h.dim(),
        params.g,
        params.eta,
        params.j,
        params.n_cut
    );
    h.write_triplets(out, &header)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eigensolve::lowest_k_dense;
    use proptest::prelude::*;

    fn params(g: f64, eta: f64, j: f64, n_cut: usize) -> ModelParams {
        ModelParams::new(g, eta, j, n_cut).unwrap()
    }

    /// Independent dense construction from Kronecker products, ordering (n_l, n_r, s_l, s_r).
    fn kron_oracle(p: &ModelParams) -> nalgebra::DMatrix<f64> {
        use nalgebra::DMatrix;
        let n = p.n_cut;
        let mut a = DMatrix::zeros(n, n);
        for k in 1..n {
            a[(k - 1, k)] = (k as f64).sqrt();
        }
        let x = &a + a.transpose();
        let num = DMatrix::from_fn(n, n, |r, c| if r == c { r as f64 } else { 0.0 });
        let idn = DMatrix::<f64>::identity(n, n);
        let id2 = DMatrix::<f64>::identity(2, 2);
        let sz = DMatrix::from_row_slice(2, 2, &[-1.0, 0.0, 0.0, 1.0]);
        let sx = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]);
        let k4 = |a: &DMatrix<f64>, b: &DMatrix<f64>, c: &DMatrix<f64>, d: &DMatrix<f64>| {
            a.kronecker(b).kronecker(c).kronecker(d)
        };
        let c = p.g * p.eta.sqrt() / 2.0;
        k4(&num, &idn, &id2, &id2) + k4(&idn, &num, &id2, &id2)
            + (k4(&idn, &idn, &sz, &id2) + k4(&idn, &idn, &id2, &sz)) * (p.eta / 2.0)
            - (k4(&x, &idn, &sx, &id2) + k4(&idn, &x, &id2, &sx)) * c
            + k4(&x, &x, &id2, &id2) * p.j
    }

    #[test]
    fn basis_dimensions() {
        assert_eq!(basis_dim(&params(0.5, 1.0, 0.0, 2)), 16);
        assert_eq!(basis_dim(&params(0.5, 1.0, 0.0, 80)), 25_600);
        assert_eq!(basis_dim(&params(0.5, 1.0, 0.0, 180)), 129_600);
    }

    #[test]
    fn rejects_invalid_params() {
        assert!(ModelParams::new(-0.1, 1.0, 0.0, 4).is_err());
        assert!(ModelParams::new(0.1, 0.0, 0.0, 4).is_err());
        assert!(ModelParams::new(0.1, 1.0, -0.2, 4).is_err());
        assert!(ModelParams::new(0.1, 1.0, 0.2, 0).is_err());
        assert!(ModelParams::new(f64::NAN, 1.0, 0.2, 3).is_err());
        let bad = ModelParams { g: 0.1, eta: -1.0, j: 0.0, n_cut: 3 };
        assert!(build_hamiltonian(&bad).is_err());
    }

    #[test]
    fn frozen_photons_leave_bare_atoms() {
        let p = params(0.9, 3.0, 0.4, 1);
        let h = build_hamiltonian(&p).unwrap();
        let vals: Vec<f64> = lowest_k_dense(&h, 4).unwrap().iter().map(|e| e.value).collect();
        for (v, want) in vals.iter().zip([-3.0, 0.0, 0.0, 3.0]) {
            assert!((v - want).abs() < 1e-12, "{vals:?}");
        }
    }

    #[test]
    fn creation_amplitudes() {
        let n_cut = 6;
        let x = hopping_operator(n_cut);
        // ⟨n+1, 1| x_L x_R |n, 0⟩ = √(n+1)·√1
        for n in 0..n_cut - 1 {
            let from = BasisIndex { n_l: n, n_r: 0, s_l: Spin::Down, s_r: Spin::Up };
            let to = BasisIndex { n_l: n + 1, n_r: 1, ..from };
            let v = x.get(to.encode(n_cut), from.encode(n_cut));
            assert!((v - ((n + 1) as f64).sqrt()).abs() < 1e-15);
        }
    }

    #[test]
    fn decoupled_ground_energy() {
        let h = build_hamiltonian(&params(0.0, 7.5, 0.0, 3)).unwrap();
        let e0 = lowest_k_dense(&h, 1).unwrap()[0].value;
        assert!((e0 + 7.5).abs() < 1e-12);
    }

    #[test]
    fn parity_examples() {
        let p = params(0.5, 2.0, 0.1, 4);
        let pi = parity_operator(&p);
        let vac = BasisIndex { n_l: 0, n_r: 0, s_l: Spin::Down, s_r: Spin::Down };
        assert_eq!(pi[vac.encode(4)], 1);
        let one = BasisIndex { n_l: 1, ..vac };
        assert_eq!(pi[one.encode(4)], -1);
    }

    #[test]
    fn matches_kronecker_oracle() {
        for p in [params(0.7, 5.0, 0.2, 2), params(1.1, 2.5, 0.45, 3), params(0.3, 9.0, 0.1, 4)] {
            let h = build_hamiltonian(&p).unwrap();
            let diff = (h.to_dense() - kron_oracle(&p)).abs().max();
            assert!(diff < 1e-13, "max deviation {diff}");
            assert!(h.max_row_nnz() <= 9);
        }
    }

    #[test]
    fn dump_header() {
        let p = params(0.5, 2.0, 0.1, 2);
        let h = build_hamiltonian(&p).unwrap();
        let mut buf = Vec::new();
        write_hamiltonian_dump(&h, &p, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), "# dim=16 g=0.5 eta=2 J=0.1 ncut=2");
        assert_eq!(lines.count(), h.nnz());
    }

    proptest! {
        #[test]
        fn encode_decode_roundtrip(n_cut in 1usize..40, seed in any::<u64>()) {
            let idx = (seed as usize) % (4 * n_cut * n_cut);
            let b = BasisIndex::decode(idx, n_cut);
            prop_assert!(b.n_l < n_cut && b.n_r < n_cut);
            prop_assert_eq!(b.encode(n_cut), idx);
        }

        #[test]
        fn hamiltonian_invariants(
            g in 0.0f64..1.5, eta in 0.1f64..100.0, j in 0.0f64..0.8, n_cut in 1usize..7,
            seed in any::<u64>(),
        ) {
            use rand::{Rng, SeedableRng};
            let p = params(g, eta, j, n_cut);
            let h = build_hamiltonian(&p).unwrap();
            prop_assert!(h.is_symmetric());
            prop_assert!(h.max_row_nnz() <= 9);

            let pi = parity_operator(&p);
            // no element couples opposite parities
            for (r, c, _) in h.triplets() {
                prop_assert_eq!(pi[r], pi[c]);
            }
            // swap L <-> R maps H onto itself
            for (r, c, v) in h.triplets() {
                let rs = BasisIndex::decode(r, n_cut).swapped().encode(n_cut);
                let cs = BasisIndex::decode(c, n_cut).swapped().encode(n_cut);
                prop_assert_eq!(h.get(rs, cs), v);
            }
            // parity commutation through the matvec
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let v: Vec<f64> = (0..h.dim()).map(|_| rng.random_range(-1.0..1.0)).collect();
            let pv: Vec<f64> = v.iter().zip(&pi).map(|(x, &s)| x * s as f64).collect();
            let hpv = h.apply(&pv).unwrap();
            let phv: Vec<f64> = h.apply(&v).unwrap().iter().zip(&pi).map(|(x, &s)| x * s as f64).collect();
            let diff = hpv.iter().zip(&phv).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
            let vnorm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            prop_assert!(diff <= 1e-12 * vnorm * h.norm1());
            // symmetry of the bilinear form
            let w: Vec<f64> = (0..h.dim()).map(|_| rng.random_range(-1.0..1.0)).collect();
            let hv = h.apply(&v).unwrap();
            let hw = h.apply(&w).unwrap();
            let a: f64 = hv.iter().zip(&w).map(|(x, y)| x * y).sum();
            let b: f64 = v.iter().zip(&hw).map(|(x, y)| x * y).sum();
            prop_assert!((a - b).abs() <= 1e-12 * (1.0 + a.abs()));
        }
    }
}
