//! Stationary state of a generator by direct solution of L(ρ) = 0, Tr ρ = 1.
//!
//! ρ is stacked column-major, vec(ρ)[i + j·d] = ρ[i, j]. The vectorized
//! generator is block diagonal over the connected components of its
//! sparsity graph (for a thermometer these are the coherence sectors
//! j − k = const). Each block is solved exactly by Gaussian elimination
//! with threshold partial pivoting on sparse rows. In the block holding the
//! populations, the equation for the first diagonal element is replaced by
//! the trace condition; every other block must have only the trivial
//! solution, otherwise the steady state is not unique.

use super::generator::Generator;
use crate::error::{Error, Result};
use crate::qcore::{ComplexMatrix, DensityMatrix, C64, ZERO};

/// Maximum residual ‖L(ρ_ss)‖_max accepted, relative to max(1, max rate).
pub const RESIDUAL_TOL: f64 = 1e-10;
/// Pivots below this fraction of the largest block entry count as zero.
const SINGULAR_TOL: f64 = 1e-12;
/// Threshold partial pivoting parameter.
const PIVOT_THRESHOLD: f64 = 0.1;

/// Non-zero entries (output index, coefficient) of L(|j⟩⟨k|).
fn superop_column(gen: &Generator, j: usize, k: usize, out: &mut Vec<(usize, C64)>) {
    let d = gen.dim();
    out.clear();
    let h_eff = gen.h_eff();
    // −i H_eff |j⟩⟨k|
    for &(i, v) in h_eff.column(j) {
        out.push((i + k * d, C64::new(0.0, -1.0) * v));
    }
    // +i |j⟩⟨k| H_eff†  = Σ_l i conj(H_eff[l, k]) |j⟩⟨l|
    for &(l, v) in h_eff.column(k) {
        out.push((j + l * d, C64::new(0.0, 1.0) * v.conj()));
    }
    // rate J|j⟩⟨k|J†
    for (dis, op) in gen.active_jumps() {
        for &(i, a) in op.column(j) {
            for &(l, b) in op.column(k) {
                out.push((i + l * d, a * b.conj() * dis.rate));
            }
        }
    }
}

struct UnionFind {
    parent: Vec<u32>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        Self {
            parent: (0..n as u32).collect(),
        }
    }

    fn find(&mut self, mut x: u32) -> u32 {
        while self.parent[x as usize] != x {
            let p = self.parent[x as usize];
            self.parent[x as usize] = self.parent[p as usize];
            x = p;
        }
        x
    }

    fn union(&mut self, a: u32, b: u32) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
            self.parent[hi as usize] = lo;
        }
    }
}

/// Sparse row: strictly increasing column indices.
#[derive(Clone, Debug, Default)]
struct Row {
    cols: Vec<usize>,
    vals: Vec<C64>,
}

impl Row {
    fn get(&self, c: usize) -> Option<C64> {
        self.cols.binary_search(&c).ok().map(|i| self.vals[i])
    }

    /// self − f · pivot, with column `drop` removed from the result.
    fn subtract_scaled(&self, f: C64, pivot: &Row, drop: usize, new_cols: &mut Vec<usize>) -> Row {
        let mut out = Row {
            cols: Vec::with_capacity(self.cols.len() + pivot.cols.len()),
            vals: Vec::with_capacity(self.cols.len() + pivot.cols.len()),
        };
        let (mut a, mut b) = (0, 0);
        while a < self.cols.len() || b < pivot.cols.len() {
            let ca = self.cols.get(a).copied().unwrap_or(usize::MAX);
            let cb = pivot.cols.get(b).copied().unwrap_or(usize::MAX);
            let (c, v) = if ca == cb {
                a += 1;
                b += 1;
                (ca, self.vals[a - 1] - f * pivot.vals[b - 1])
            } else if ca < cb {
                a += 1;
                (ca, self.vals[a - 1])
            } else {
                b += 1;
                new_cols.push(cb);
                (cb, -f * pivot.vals[b - 1])
            };
            if c != drop && v != ZERO {
                out.cols.push(c);
                out.vals.push(v);
            }
        }
        out
    }
}

/// Solves A x = b for sparse square A. Returns None when singular.
fn solve_sparse(mut rows: Vec<Row>, mut rhs: Vec<C64>) -> Option<Vec<C64>> {
    let n = rows.len();
    let scale = rows
        .iter()
        .flat_map(|r| r.vals.iter())
        .map(|v| v.norm())
        .fold(0.0, f64::max);
    if scale == 0.0 {
        return None;
    }
    let mut col_rows: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (r, row) in rows.iter().enumerate() {
        for &c in &row.cols {
            col_rows[c].push(r);
        }
    }
    let mut pivoted = vec![false; n];
    let mut stamp = vec![usize::MAX; n];
    let mut pivot_of = vec![0usize; n];
    let mut candidates: Vec<(usize, C64)> = Vec::new();
    let mut new_cols = Vec::new();

    for c in 0..n {
        candidates.clear();
        for &r in &col_rows[c] {
            if pivoted[r] || stamp[r] == c {
                continue;
            }
            stamp[r] = c;
            if let Some(v) = rows[r].get(c) {
                candidates.push((r, v));
            }
        }
        col_rows[c] = Vec::new();
        let max = candidates.iter().map(|(_, v)| v.norm()).fold(0.0, f64::max);
        if max <= SINGULAR_TOL * scale {
            return None;
        }
        let (p, pv) = candidates
            .iter()
            .filter(|(_, v)| v.norm() >= PIVOT_THRESHOLD * max)
            .min_by(|x, y| {
                rows[x.0]
                    .cols
                    .len()
                    .cmp(&rows[y.0].cols.len())
                    .then(y.1.norm().total_cmp(&x.1.norm()))
            })
            .copied()
            .expect("at least the maximal candidate passes the threshold");
        pivoted[p] = true;
        pivot_of[c] = p;
        let pivot_row = std::mem::take(&mut rows[p]);
        for &(r, v) in candidates.iter().filter(|(r, _)| *r != p) {
            let f = v / pv;
            new_cols.clear();
            rows[r] = rows[r].subtract_scaled(f, &pivot_row, c, &mut new_cols);
            let rp = rhs[p];
            rhs[r] -= f * rp;
            for &nc in &new_cols {
                col_rows[nc].push(r);
            }
        }
        rows[p] = pivot_row;
    }

    let mut x = vec![ZERO; n];
    for c in (0..n).rev() {
        let row = &rows[pivot_of[c]];
        let mut s = rhs[pivot_of[c]];
        let mut diag = ZERO;
        for (&col, &v) in row.cols.iter().zip(&row.vals) {
            if col == c {
                diag = v;
            } else {
                s -= v * x[col];
            }
        }
        x[c] = s / diag;
    }
    Some(x)
}

/// Unique stationary state of `gen`.
pub fn steady_state(gen: &Generator) -> Result<DensityMatrix> {
    if !gen.has_dissipation() {
        return Err(Error::param("generator", "steady state needs at least one nonzero rate"));
    }
    let d = gen.dim();
    let n = d * d;
    let mut uf = UnionFind::new(n);
    let mut col = Vec::new();
    for k in 0..d {
        for j in 0..d {
            let c = j + k * d;
            superop_column(gen, j, k, &mut col);
            for &(r, v) in &col {
                if v != ZERO {
                    uf.union(c as u32, r as u32);
                }
            }
        }
    }
    // Members of each component in increasing vec index.
    let mut members: Vec<Vec<u32>> = Vec::new();
    let mut comp_of_root = vec![u32::MAX; n];
    for idx in 0..n as u32 {
        let root = uf.find(idx) as usize;
        if comp_of_root[root] == u32::MAX {
            comp_of_root[root] = members.len() as u32;
            members.push(Vec::new());
        }
        members[comp_of_root[root] as usize].push(idx);
    }
    drop(comp_of_root);
    drop(uf);

    let is_diag = |idx: usize| idx % d == idx / d;
    let trace_blocks = members
        .iter()
        .filter(|m| m.iter().any(|&i| is_diag(i as usize)))
        .count();
    if trace_blocks != 1 {
        return Err(Error::AmbiguousSteadyState(format!(
            "populations split into {trace_blocks} decoupled blocks"
        )));
    }

    let mut local = vec![u32::MAX; n];
    let mut x = vec![ZERO; n];
    for block in &members {
        for (li, &g) in block.iter().enumerate() {
            local[g as usize] = li as u32;
        }
        let size = block.len();
        let mut raw: Vec<Vec<(usize, C64)>> = vec![Vec::new(); size];
        for &g in block {
            let g = g as usize;
            let (j, k) = (g % d, g / d);
            superop_column(gen, j, k, &mut col);
            let lc = local[g] as usize;
            for &(r, v) in &col {
                if v != ZERO {
                    raw[local[r] as usize].push((lc, v));
                }
            }
        }
        let mut rows: Vec<Row> = raw
            .into_iter()
            .map(|mut entries| {
                entries.sort_by_key(|e| e.0);
                let mut row = Row::default();
                for (c, v) in entries {
                    if row.cols.last() == Some(&c) {
                        *row.vals.last_mut().unwrap() += v;
                    } else {
                        row.cols.push(c);
                        row.vals.push(v);
                    }
                }
                let keep: Vec<usize> = (0..row.cols.len()).filter(|&i| row.vals[i] != ZERO).collect();
                Row {
                    cols: keep.iter().map(|&i| row.cols[i]).collect(),
                    vals: keep.iter().map(|&i| row.vals[i]).collect(),
                }
            })
            .collect();
        let mut rhs = vec![ZERO; size];
        let diag_locals: Vec<usize> = block
            .iter()
            .enumerate()
            .filter(|(_, &g)| is_diag(g as usize))
            .map(|(li, _)| li)
            .collect();
        if let Some(&first) = diag_locals.first() {
            rows[first] = Row {
                cols: diag_locals.clone(),
                vals: vec![C64::new(1.0, 0.0); diag_locals.len()],
            };
            rhs[first] = C64::new(1.0, 0.0);
        }
        let sol = solve_sparse(rows, rhs).ok_or_else(|| {
            Error::AmbiguousSteadyState(format!(
                "singular block of size {size} (first element index {})",
                block[0]
            ))
        })?;
        for (li, &g) in block.iter().enumerate() {
            x[g as usize] = sol[li];
        }
    }

    // column-major → row-major
    let mut m = ComplexMatrix::zeros(d);
    for k in 0..d {
        for j in 0..d {
            m[(j, k)] = x[j + k * d];
        }
    }
    let m = m.hermitian_part();
    let tr = m.trace().re;
    let m = m.scale_real(1.0 / tr);
    let residual = gen.apply_matrix(&m)?.max_abs();
    let tol = RESIDUAL_TOL * gen.max_rate().max(1.0);
    if residual > tol {
        return Err(Error::AmbiguousSteadyState(format!(
            "stationarity residual {residual:e} exceeds {tol:e}"
        )));
    }
    DensityMatrix::new(m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::baths::{kms_ratio, BathModel, TabulatedSpectrum};
    use crate::dynamics::{build_thermometer_generator, BathCoupling, Direction, DissipatorSpec, ThermometerKind};
    use crate::qcore::{fock_operators, gibbs_state, trace_distance, FockTruncation};
    use std::collections::BTreeMap;

    #[test]
    fn dense_solve_agrees_on_small_system() {
        // 3x3 dense system solved by hand
        let rows = vec![
            Row { cols: vec![0, 1, 2], vals: vec![C64::new(2.0, 0.0), C64::new(1.0, 0.0), C64::new(0.0, 1.0)] },
            Row { cols: vec![0, 2], vals: vec![C64::new(1.0, 0.0), C64::new(3.0, 0.0)] },
            Row { cols: vec![1, 2], vals: vec![C64::new(4.0, 0.0), C64::new(1.0, 0.0)] },
        ];
        let want = [C64::new(1.0, 1.0), C64::new(-2.0, 0.0), C64::new(0.5, -0.5)];
        let rhs: Vec<C64> = rows
            .iter()
            .map(|r| r.cols.iter().zip(&r.vals).map(|(&c, &v)| v * want[c]).sum())
            .collect();
        let x = solve_sparse(rows, rhs).unwrap();
        for (a, b) in x.iter().zip(&want) {
            assert!((a - b).norm() < 1e-14);
        }
    }

    #[test]
    fn singular_system_detected() {
        let rows = vec![
            Row { cols: vec![0, 1], vals: vec![C64::new(1.0, 0.0), C64::new(2.0, 0.0)] },
            Row { cols: vec![0, 1], vals: vec![C64::new(2.0, 0.0), C64::new(4.0, 0.0)] },
        ];
        assert!(solve_sparse(rows, vec![ZERO, ZERO]).is_none());
    }

    #[test]
    fn two_level_detailed_balance() {
        for bath in [
            BathModel::thermal(0.7).unwrap(),
            BathModel::squeezed(1.0, 1.0).unwrap(),
            BathModel::tabulated(TabulatedSpectrum::new(vec![0.5, 2.0], vec![1.0, 2.0], vec![0.3, 0.5]).unwrap()),
        ] {
            let gen = build_thermometer_generator(ThermometerKind::TwoLevel, 1.0, &bath, 0.1).unwrap();
            let ss = steady_state(&gen).unwrap();
            let p = ss.populations();
            assert!((p[1] / p[0] - kms_ratio(&bath, 1.0).unwrap()).abs() < 1e-10);
        }
    }

    #[test]
    fn thermal_oscillator_is_gibbs() {
        let kind = ThermometerKind::Oscillator(FockTruncation::new(30).unwrap());
        let gen = build_thermometer_generator(kind, 1.0, &BathModel::thermal(1.0).unwrap(), 0.1).unwrap();
        let ss = steady_state(&gen).unwrap();
        let g = gibbs_state(gen.hamiltonian(), 1.0).unwrap();
        assert!(trace_distance(&ss, &g).unwrap() <= 1e-8);
        assert!(gen.apply_matrix(ss.matrix()).unwrap().max_abs() <= 1e-10);
    }

    #[test]
    fn squeezed_oscillator_occupation() {
        // d = 60 keeps the truncation error of the mean below 1e-5 relative
        let trunc = FockTruncation::new(60).unwrap();
        let gen = build_thermometer_generator(
            ThermometerKind::Oscillator(trunc),
            1.0,
            &BathModel::squeezed(1.0, 1.0).unwrap(),
            0.1,
        )
        .unwrap();
        let ss = steady_state(&gen).unwrap();
        let n = ss.expectation(&fock_operators(trunc).n_op).re;
        assert!(((n - 3.570608104436637) / 3.570608104436637).abs() < 1e-4, "{n}");
        let p = ss.populations();
        let q = kms_ratio(&BathModel::squeezed(1.0, 1.0).unwrap(), 1.0).unwrap();
        for k in 0..58 {
            assert!((p[k + 1] / p[k] - q).abs() < 1e-8, "k={k}");
        }
    }

    #[test]
    fn pure_dephasing_is_ambiguous() {
        let mut baths = BTreeMap::new();
        baths.insert("b".to_string(), BathCoupling { model: BathModel::thermal(1.0).unwrap(), gamma0: 1.0 });
        let dis = vec![DissipatorSpec {
            jump: ComplexMatrix::from_diagonal(&[1.0, -1.0]),
            rate: 0.5,
            bath_id: "b".into(),
            bohr_omega: 1.0,
            direction: Direction::Down,
        }];
        let gen = Generator::new(ComplexMatrix::from_diagonal(&[0.0, 1.0]), baths, dis).unwrap();
        assert!(matches!(steady_state(&gen), Err(Error::AmbiguousSteadyState(_))));
    }

    #[test]
    fn decay_into_one_of_two_dark_levels_is_ambiguous() {
        // |2> decays to |0> only; |1> is decoupled, so any mix of |0>,|1> is stationary
        let mut baths = BTreeMap::new();
        baths.insert("b".to_string(), BathCoupling { model: BathModel::thermal(1.0).unwrap(), gamma0: 1.0 });
        let mut j = ComplexMatrix::zeros(3);
        j[(0, 2)] = C64::new(1.0, 0.0);
        let dis = vec![DissipatorSpec { jump: j, rate: 1.0, bath_id: "b".into(), bohr_omega: 1.0, direction: Direction::Down }];
        let gen = Generator::new(ComplexMatrix::from_diagonal(&[0.0, 0.5, 1.0]), baths, dis).unwrap();
        assert!(matches!(steady_state(&gen), Err(Error::AmbiguousSteadyState(_))));
    }

    #[test]
    fn no_dissipation_rejected() {
        let gen = Generator::new(ComplexMatrix::from_diagonal(&[0.0, 1.0]), BTreeMap::new(), vec![]).unwrap();
        assert!(matches!(steady_state(&gen), Err(Error::InvalidParameter { .. })));
    }

    #[test]
    fn coherent_drive_steady_state_matches_evolution() {
        // driven qubit: H has off-diagonal terms so coherences couple to populations
        let mut h = ComplexMatrix::from_diagonal(&[0.0, 1.0]);
        h[(0, 1)] = C64::new(0.2, 0.1);
        h[(1, 0)] = C64::new(0.2, -0.1);
        let mut baths = BTreeMap::new();
        baths.insert("b".to_string(), BathCoupling { model: BathModel::thermal(1.0).unwrap(), gamma0: 0.3 });
        let dis = vec![DissipatorSpec {
            jump: crate::qcore::qubit_lowering(),
            rate: 0.3,
            bath_id: "b".into(),
            bohr_omega: 1.0,
            direction: Direction::Down,
        }];
        let gen = Generator::new(h, baths, dis).unwrap();
        let ss = steady_state(&gen).unwrap();
        let rho0 = DensityMatrix::basis_state(2, 0).unwrap();
        let dt = crate::dynamics::max_stable_dt(&gen);
        let traj = crate::dynamics::evolve(&gen, &rho0, 150.0, dt).unwrap();
        assert!(trace_distance(&ss, traj.final_state()).unwrap() < 1e-8);
        assert!(ss.matrix()[(0, 1)].norm() > 1e-3);
    }
}
