//! Fully symmetric rank-4 coefficient tensors in packed canonical storage.
//!
//! One value is stored per index multiset i ≤ j ≤ k ≤ l (colex rank), which
//! keeps chi_max = 32 flows inside memory and lets the transport below run as
//! a chain of dense matrix products over canonical slices instead of an
//! O(dim^4 · dim) rank-4 contraction.

use ndarray::{Array2, Array4, ArrayView2, ArrayView4};

/// Colex ranking tables for canonical tuples over a fixed dimension.
#[derive(Debug, Clone)]
struct SymIndex {
    dim: usize,
    /// b2[x] = x(x+1)/2, b3[x] = C(x+2,3), b4[x] = C(x+3,4).
    b2: Vec<usize>,
    b3: Vec<usize>,
    b4: Vec<usize>,
}

impl SymIndex {
    fn new(dim: usize) -> Self {
        let n = dim + 1;
        let mut b2 = vec![0usize; n];
        let mut b3 = vec![0usize; n];
        let mut b4 = vec![0usize; n];
        for x in 0..n {
            b2[x] = x * (x + 1) / 2;
            b3[x] = x * (x + 1) * (x + 2) / 6;
            b4[x] = x * (x + 1) * (x + 2) * (x + 3) / 24;
        }
        SymIndex { dim, b2, b3, b4 }
    }

    #[inline]
    fn rank4(&self, i: usize, j: usize, k: usize, l: usize) -> usize {
        debug_assert!(i <= j && j <= k && k <= l && l < self.dim);
        i + self.b2[j] + self.b3[k] + self.b4[l]
    }

    #[inline]
    fn rank3(&self, i: usize, j: usize, k: usize) -> usize {
        debug_assert!(i <= j && j <= k && k < self.dim);
        i + self.b2[j] + self.b3[k]
    }

    #[inline]
    fn rank2(&self, i: usize, j: usize) -> usize {
        debug_assert!(i <= j && j < self.dim);
        i + self.b2[j]
    }

    fn len4(&self) -> usize {
        let d = self.dim;
        d * (d + 1) * (d + 2) * (d + 3) / 24
    }

    fn len3(&self) -> usize {
        let d = self.dim;
        d * (d + 1) * (d + 2) / 6
    }

    fn len2(&self) -> usize {
        let d = self.dim;
        d * (d + 1) / 2
    }
}

#[inline]
fn sort4(mut a: usize, mut b: usize, mut c: usize, mut d: usize) -> (usize, usize, usize, usize) {
    if a > b {
        std::mem::swap(&mut a, &mut b);
    }
    if c > d {
        std::mem::swap(&mut c, &mut d);
    }
    if a > c {
        std::mem::swap(&mut a, &mut c);
    }
    if b > d {
        std::mem::swap(&mut b, &mut d);
    }
    if b > c {
        std::mem::swap(&mut b, &mut c);
    }
    (a, b, c, d)
}

/// Distinct permutations of the sorted tuple, as index quadruples.
fn distinct_perms(t: (usize, usize, usize, usize)) -> Vec<[usize; 4]> {
    let arr = [t.0, t.1, t.2, t.3];
    let mut out: Vec<[usize; 4]> = Vec::with_capacity(24);
    const P: [[usize; 4]; 24] = [
        [0, 1, 2, 3], [0, 1, 3, 2], [0, 2, 1, 3], [0, 2, 3, 1], [0, 3, 1, 2], [0, 3, 2, 1],
        [1, 0, 2, 3], [1, 0, 3, 2], [1, 2, 0, 3], [1, 2, 3, 0], [1, 3, 0, 2], [1, 3, 2, 0],
        [2, 0, 1, 3], [2, 0, 3, 1], [2, 1, 0, 3], [2, 1, 3, 0], [2, 3, 0, 1], [2, 3, 1, 0],
        [3, 0, 1, 2], [3, 0, 2, 1], [3, 1, 0, 2], [3, 1, 2, 0], [3, 2, 0, 1], [3, 2, 1, 0],
    ];
    for p in P {
        let cand = [arr[p[0]], arr[p[1]], arr[p[2]], arr[p[3]]];
        if !out.contains(&cand) {
            out.push(cand);
        }
    }
    out
}

/// repetition factor r = prod over distinct values of (multiplicity!)
#[inline]
fn repetition(t: (usize, usize, usize, usize)) -> usize {
    let arr = [t.0, t.1, t.2, t.3];
    let mut r = 1usize;
    let mut run = 1usize;
    for w in 1..4 {
        if arr[w] == arr[w - 1] {
            run += 1;
            r *= run;
        } else {
            run = 1;
        }
    }
    r
}

#[derive(Debug, Clone)]
pub struct SymTensor4 {
    idx: SymIndex,
    data: Vec<f64>,
}

impl SymTensor4 {
    pub fn zeros(dim: usize) -> Self {
        let idx = SymIndex::new(dim);
        let len = idx.len4();
        SymTensor4 { idx, data: vec![0.0; len] }
    }

    pub fn dim(&self) -> usize {
        self.idx.dim
    }

    pub fn packed_len(&self) -> usize {
        self.data.len()
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize, k: usize, l: usize) -> f64 {
        let (a, b, c, d) = sort4(i, j, k, l);
        self.data[self.idx.rank4(a, b, c, d)]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, k: usize, l: usize, v: f64) {
        let (a, b, c, d) = sort4(i, j, k, l);
        let r = self.idx.rank4(a, b, c, d);
        self.data[r] = v;
    }

    #[inline]
    pub fn add(&mut self, i: usize, j: usize, k: usize, l: usize, v: f64) {
        let (a, b, c, d) = sort4(i, j, k, l);
        let r = self.idx.rank4(a, b, c, d);
        self.data[r] += v;
    }

    pub fn scaled_add(&mut self, s: f64, other: &SymTensor4) {
        assert_eq!(self.dim(), other.dim(), "dimension mismatch");
        for (a, &b) in self.data.iter_mut().zip(other.data.iter()) {
            *a += s * b;
        }
    }

    pub fn scale(&mut self, s: f64) {
        for a in self.data.iter_mut() {
            *a *= s;
        }
    }

    pub fn norm_sq(&self) -> f64 {
        // weighted by tuple multiplicity so it equals the dense Frobenius norm
        let mut s = 0.0;
        self.for_each_canonical(|t, v| {
            s += (24 / repetition(t)) as f64 * v * v;
        });
        s
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0f64, |m, &v| m.max(v.abs()))
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&v| v == 0.0)
    }

    fn for_each_canonical<F: FnMut((usize, usize, usize, usize), f64)>(&self, mut f: F) {
        let n = self.idx.dim;
        let mut r = 0usize;
        for l in 0..n {
            for k in 0..=l {
                for j in 0..=k {
                    for i in 0..=j {
                        f((i, j, k, l), self.data[r]);
                        r += 1;
                    }
                }
            }
        }
    }

    /// Packs a dense tensor, averaging over all 24 leg orders so tiny
    /// round-off asymmetries from chained mode products are projected out.
    pub fn from_dense(c4: ArrayView4<f64>) -> Self {
        let (n0, n1, n2, n3) = c4.dim();
        assert!(n0 == n1 && n1 == n2 && n2 == n3, "tensor must be hypercubic");
        let mut out = SymTensor4::zeros(n0);
        let mut r = 0usize;
        for l in 0..n0 {
            for k in 0..=l {
                for j in 0..=k {
                    for i in 0..=j {
                        let perms = distinct_perms((i, j, k, l));
                        let mut s = 0.0;
                        for p in &perms {
                            s += c4[[p[0], p[1], p[2], p[3]]];
                        }
                        out.data[r] = s / perms.len() as f64;
                        r += 1;
                    }
                }
            }
        }
        out
    }

    pub fn to_dense(&self) -> Array4<f64> {
        let n = self.idx.dim;
        let mut out = Array4::zeros((n, n, n, n));
        self.for_each_canonical(|t, v| {
            if v != 0.0 {
                for p in distinct_perms(t) {
                    out[[p[0], p[1], p[2], p[3]]] = v;
                }
            }
        });
        out
    }

    /// sum_{ijkl} T[ijkl] K[ij] K[kl] for symmetric K.
    pub fn double_contract(&self, k: ArrayView2<f64>) -> f64 {
        let n = self.idx.dim;
        assert_eq!(k.dim(), (n, n), "kernel dimension mismatch");
        let mut acc = 0.0;
        self.for_each_canonical(|t, v| {
            if v != 0.0 {
                let (a, b, c, d) = t;
                let pair = k[[a, b]] * k[[c, d]] + k[[a, c]] * k[[b, d]] + k[[a, d]] * k[[b, c]];
                acc += v * (8.0 / repetition(t) as f64) * pair;
            }
        });
        acc
    }

    /// cross[k,l] = sum_{ij} T[ijkl] K[ij] for symmetric K (dense output).
    pub fn contract_pair(&self, k: ArrayView2<f64>) -> Array2<f64> {
        let n = self.idx.dim;
        assert_eq!(k.dim(), (n, n), "kernel dimension mismatch");
        let mut out = Array2::zeros((n, n));
        self.for_each_canonical(|t, v| {
            if v != 0.0 {
                for p in distinct_perms(t) {
                    out[[p[2], p[3]]] += v * k[[p[0], p[1]]];
                }
            }
        });
        out
    }

    /// out[i] = sum_{jkl} |T[ijkl]|.
    pub fn leg_abs_sums(&self) -> Vec<f64> {
        let n = self.idx.dim;
        let mut out = vec![0.0; n];
        self.for_each_canonical(|t, v| {
            if v != 0.0 {
                for p in distinct_perms(t) {
                    out[p[0]] += v.abs();
                }
            }
        });
        out
    }

    /// out[i,j] = sum_{kl} |T[ijkl]|.
    pub fn pair_abs_sums(&self) -> Array2<f64> {
        let n = self.idx.dim;
        let mut out = Array2::zeros((n, n));
        self.for_each_canonical(|t, v| {
            if v != 0.0 {
                for p in distinct_perms(t) {
                    out[[p[0], p[1]]] += v.abs();
                }
            }
        });
        out
    }

    /// Sub-tensor over coordinates [lo, hi), reindexed from zero.
    pub fn sub_block(&self, lo: usize, hi: usize) -> SymTensor4 {
        assert!(lo <= hi && hi <= self.idx.dim);
        let mut out = SymTensor4::zeros(hi - lo);
        let mut r = 0usize;
        for l in lo..hi {
            for k in lo..=l {
                for j in lo..=k {
                    for i in lo..=j {
                        out.data[r] = self.data[self.idx.rank4(i, j, k, l)];
                        r += 1;
                    }
                }
            }
        }
        out
    }

    /// Rescales every entry by v_i v_j v_k v_l for a per-coordinate vector.
    pub fn scale_legs(&mut self, v: &[f64]) {
        assert_eq!(v.len(), self.idx.dim);
        let n = self.idx.dim;
        let mut r = 0usize;
        for l in 0..n {
            for k in 0..=l {
                for j in 0..=k {
                    for i in 0..=j {
                        self.data[r] *= v[i] * v[j] * v[k] * v[l];
                        r += 1;
                    }
                }
            }
        }
    }

    /// Reindexes the tensor by a coordinate permutation: out[p(i),..] = in[i,..].
    pub fn permute_coords(&self, perm: &[usize]) -> SymTensor4 {
        assert_eq!(perm.len(), self.idx.dim);
        let mut out = SymTensor4::zeros(self.idx.dim);
        self.for_each_canonical(|(i, j, k, l), v| {
            if v != 0.0 {
                out.set(perm[i], perm[j], perm[k], perm[l], v);
            }
        });
        out
    }
}

/// Transports all four legs through g (dim_in x dim_out):
/// out[abcd] = sum_{ijkl} T[ijkl] g[ia] g[jb] g[kc] g[ld].
///
/// Runs as four staged contractions over canonical slices; every GEMM-sized
/// piece is delegated to dense matrix products, and each canonical output
/// entry is produced exactly once.
pub fn transport4_sym(c4: &SymTensor4, g: ArrayView2<f64>) -> SymTensor4 {
    let n = c4.idx.dim;
    let m = g.ncols();
    assert_eq!(g.nrows(), n, "map row count must match tensor dimension");
    if n == 0 || m == 0 {
        return SymTensor4::zeros(m);
    }
    let idx_n = &c4.idx;
    let idx_m = SymIndex::new(m);

    // stage 1: X1[(i<=j<=k), d] = sum_l T[ijk l] g[l, d]
    let mut x1 = vec![0.0f64; idx_n.len3() * m];
    {
        const BATCH: usize = 64;
        let mut rows = Array2::<f64>::zeros((BATCH, n));
        let mut triples: Vec<usize> = Vec::with_capacity(BATCH);
        let mut flush = |rows: &mut Array2<f64>, triples: &mut Vec<usize>, x1: &mut Vec<f64>| {
            if triples.is_empty() {
                return;
            }
            let nb = triples.len();
            let prod = rows.slice(ndarray::s![..nb, ..]).dot(&g);
            for (bi, &t3) in triples.iter().enumerate() {
                let dst = &mut x1[t3 * m..(t3 + 1) * m];
                for (d, &v) in prod.row(bi).iter().enumerate() {
                    dst[d] = v;
                }
            }
            triples.clear();
        };
        for k in 0..n {
            for j in 0..=k {
                for i in 0..=j {
                    let bi = triples.len();
                    {
                        // value row over l: the four sorted-position segments of
                        // sorted(i,j,k,l) each advance one colex digit linearly
                        let mut row = rows.row_mut(bi);
                        let base_a = idx_n.b2[i] + idx_n.b3[j] + idx_n.b4[k];
                        for l in 0..=i {
                            row[l] = c4.data[l + base_a];
                        }
                        let base_b = i + idx_n.b3[j] + idx_n.b4[k];
                        for l in i..=j {
                            row[l] = c4.data[base_b + idx_n.b2[l]];
                        }
                        let base_c = i + idx_n.b2[j] + idx_n.b4[k];
                        for l in j..=k {
                            row[l] = c4.data[base_c + idx_n.b3[l]];
                        }
                        let base_d = i + idx_n.b2[j] + idx_n.b3[k];
                        for l in k..n {
                            row[l] = c4.data[base_d + idx_n.b4[l]];
                        }
                    }
                    triples.push(idx_n.rank3(i, j, k));
                    if triples.len() == BATCH {
                        flush(&mut rows, &mut triples, &mut x1);
                    }
                }
            }
        }
        flush(&mut rows, &mut triples, &mut x1);
    }

    // stage 2: X2[(i<=j), (c<=d)] = sum_k g[k,c] X1[(ijk), d]
    let len2n = idx_n.len2();
    let len2m = idx_m.len2();
    let mut x2 = vec![0.0f64; len2n * len2m];
    {
        let mut rbuf = Array2::<f64>::zeros((n, m));
        for j in 0..n {
            for i in 0..=j {
                for k in 0..n {
                    let t3 = {
                        let (a, b, c) = sort3(i, j, k);
                        idx_n.rank3(a, b, c)
                    };
                    let src = &x1[t3 * m..(t3 + 1) * m];
                    for (d, &v) in src.iter().enumerate() {
                        rbuf[[k, d]] = v;
                    }
                }
                let p = g.t().dot(&rbuf); // (m x m): p[c,d]
                let p2 = idx_n.rank2(i, j);
                let dst = &mut x2[p2 * len2m..(p2 + 1) * len2m];
                for d in 0..m {
                    for c in 0..=d {
                        dst[idx_m.rank2(c, d)] = 0.5 * (p[[c, d]] + p[[d, c]]);
                    }
                }
            }
        }
    }
    drop(x1);

    // stages 3+4: for each (c<=d), out[a,b,c,d] = (g^T S g)[a,b] with
    // S[i,j] = X2[(ij),(cd)]; written once per canonical (a<=b<=c<=d).
    let mut out = SymTensor4::zeros(m);
    {
        let mut s = Array2::<f64>::zeros((n, n));
        for d in 0..m {
            for c in 0..=d {
                let p2 = idx_m.rank2(c, d);
                for j in 0..n {
                    for i in 0..=j {
                        let v = x2[idx_n.rank2(i, j) * len2m + p2];
                        s[[i, j]] = v;
                        s[[j, i]] = v;
                    }
                }
                let u = g.t().dot(&s).dot(&g); // (m x m): u[a,b]
                for b in 0..=c {
                    for a in 0..=b {
                        let val = 0.5 * (u[[a, b]] + u[[b, a]]);
                        out.data[idx_m.rank4(a, b, c, d)] = val;
                    }
                }
            }
        }
    }
    out
}

#[inline]
fn sort3(mut a: usize, mut b: usize, mut c: usize) -> (usize, usize, usize) {
    if a > b {
        std::mem::swap(&mut a, &mut b);
    }
    if b > c {
        std::mem::swap(&mut b, &mut c);
    }
    if a > b {
        std::mem::swap(&mut a, &mut b);
    }
    (a, b, c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::Array2;

    fn rng_tensor(dim: usize, seed: u64) -> SymTensor4 {
        let mut t = SymTensor4::zeros(dim);
        let mut s = seed;
        let mut next = move || {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((s >> 11) as f64 / (1u64 << 53) as f64) - 0.5
        };
        for l in 0..dim {
            for k in 0..=l {
                for j in 0..=k {
                    for i in 0..=j {
                        t.set(i, j, k, l, next());
                    }
                }
            }
        }
        t
    }

    fn rng_matrix(r: usize, c: usize, seed: u64) -> Array2<f64> {
        let mut s = seed;
        let mut next = move || {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((s >> 11) as f64 / (1u64 << 53) as f64) - 0.5
        };
        Array2::from_shape_fn((r, c), |_| next())
    }

    #[test]
    fn packed_roundtrip_through_dense() {
        let t = rng_tensor(5, 7);
        let d = t.to_dense();
        let t2 = SymTensor4::from_dense(d.view());
        for l in 0..5 {
            for k in 0..=l {
                for j in 0..=k {
                    for i in 0..=j {
                        let (a, b) = (t.get(i, j, k, l), t2.get(i, j, k, l));
                        assert!((a - b).abs() <= 1e-15 * a.abs(), "{a} vs {b}");
                    }
                }
            }
        }
    }

    #[test]
    fn transport_matches_dense_mode_products() {
        let t = rng_tensor(6, 3);
        let g = rng_matrix(6, 4, 11);
        let packed = transport4_sym(&t, g.view());
        let dense = wick::transport4(t.to_dense().view(), g.view());
        let dense_packed = SymTensor4::from_dense(dense.view());
        let mut worst = 0.0f64;
        for l in 0..4 {
            for k in 0..=l {
                for j in 0..=k {
                    for i in 0..=j {
                        worst = worst
                            .max((packed.get(i, j, k, l) - dense_packed.get(i, j, k, l)).abs());
                    }
                }
            }
        }
        assert!(worst < 1e-12, "packed transport deviates: {worst:e}");
    }

    #[test]
    fn transport_grows_dimension() {
        let t = rng_tensor(3, 5);
        let g = rng_matrix(3, 7, 13);
        let packed = transport4_sym(&t, g.view());
        let dense = wick::transport4(t.to_dense().view(), g.view());
        for _ in 0..1 {
            let mut worst = 0.0f64;
            for l in 0..7 {
                for k in 0..=l {
                    for j in 0..=k {
                        for i in 0..=j {
                            worst = worst.max((packed.get(i, j, k, l) - dense[[i, j, k, l]]).abs());
                        }
                    }
                }
            }
            assert!(worst < 1e-12);
        }
    }

    #[test]
    fn contractions_match_dense() {
        let t = rng_tensor(6, 9);
        let k0 = rng_matrix(6, 6, 17);
        let k = (&k0 + &k0.t()).mapv(|x| 0.5 * x);
        let dense = t.to_dense();

        let dc = t.double_contract(k.view());
        let dc_dense = wick::contract4_full(dense.view(), k.view());
        assert!((dc - dc_dense).abs() < 1e-11 * dc_dense.abs().max(1.0));

        let cp = t.contract_pair(k.view());
        let cp_dense = wick::contract4_pair(dense.view(), k.view());
        let mut worst = 0.0f64;
        for i in 0..6 {
            for j in 0..6 {
                worst = worst.max((cp[[i, j]] - cp_dense[[i, j]]).abs());
            }
        }
        assert!(worst < 1e-12, "pair contraction deviates: {worst:e}");
    }

    #[test]
    fn abs_sums_match_dense() {
        let t = rng_tensor(5, 21);
        let dense = t.to_dense();
        let legs = t.leg_abs_sums();
        let pairs = t.pair_abs_sums();
        for i in 0..5 {
            let mut s1 = 0.0;
            for j in 0..5 {
                let mut s2 = 0.0;
                for k in 0..5 {
                    for l in 0..5 {
                        s2 += dense[[i, j, k, l]].abs();
                    }
                }
                assert!((pairs[[i, j]] - s2).abs() < 1e-12);
                s1 += s2;
            }
            assert!((legs[i] - s1).abs() < 1e-12);
        }
    }

    #[test]
    fn frobenius_norm_matches_dense() {
        let t = rng_tensor(4, 33);
        let dense = t.to_dense();
        let nd: f64 = dense.iter().map(|v| v * v).sum();
        assert!((t.norm_sq() - nd).abs() < 1e-12 * nd.max(1.0));
    }
}
