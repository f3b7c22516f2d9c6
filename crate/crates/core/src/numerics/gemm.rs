//! Packed, register-blocked matrix product.
//!
//! Blocking over the shared dimension only splits each element's sum into
//! consecutive runs that are stored and resumed, so every output element sees
//! exactly `fma(a1, b1, fma(a0, b0, 0)) …` in index order. Every path uses a
//! correctly rounded fused multiply-add, so all instruction sets give the
//! same bits as a naive triple loop over `f64::mul_add`.

const MR: usize = 8;
const NR: usize = 16;
const KC: usize = 256;
const MC: usize = 64;

type Tile = [[f64; NR]; MR];

/// `a` is m×k, `b` is k×n, both row-major. Returns m×n row-major.
pub(crate) fn gemm(a: &[f64], b: &[f64], m: usize, k: usize, n: usize) -> Vec<f64> {
    #[cfg(target_arch = "x86_64")]
    {
        if std::arch::is_x86_feature_detected!("avx512f") {
            // SAFETY: the CPU supports AVX-512F.
            return unsafe { gemm_avx512(a, b, m, k, n) };
        }
        if std::arch::is_x86_feature_detected!("avx2") && std::arch::is_x86_feature_detected!("fma")
        {
            // SAFETY: the CPU supports AVX2 and FMA.
            return unsafe { gemm_avx2(a, b, m, k, n) };
        }
    }
    gemm_with(a, b, m, k, n, micro_scalar)
}

/// Portable path, also used by tests to pin the vector kernels.
#[cfg(test)]
pub(crate) fn gemm_scalar(a: &[f64], b: &[f64], m: usize, k: usize, n: usize) -> Vec<f64> {
    gemm_with(a, b, m, k, n, micro_scalar)
}

#[cfg(target_arch = "x86_64")]
#[target_feature(enable = "avx512f")]
unsafe fn gemm_avx512(a: &[f64], b: &[f64], m: usize, k: usize, n: usize) -> Vec<f64> {
    // SAFETY: only reached when AVX-512F was detected.
    gemm_with(a, b, m, k, n, |ap, bp, kc, acc| unsafe {
        micro_avx512(ap, bp, kc, acc)
    })
}

#[cfg(target_arch = "x86_64")]
#[target_feature(enable = "avx2,fma")]
unsafe fn gemm_avx2(a: &[f64], b: &[f64], m: usize, k: usize, n: usize) -> Vec<f64> {
    // SAFETY: only reached when AVX2 and FMA were detected.
    gemm_with(a, b, m, k, n, |ap, bp, kc, acc| unsafe {
        for row0 in (0..MR).step_by(4) {
            for col0 in (0..NR).step_by(8) {
                micro_avx2(ap, bp, kc, acc, row0, col0);
            }
        }
    })
}

#[inline(always)]
fn gemm_with(
    a: &[f64],
    b: &[f64],
    m: usize,
    k: usize,
    n: usize,
    micro: impl Fn(&[f64], &[f64], usize, &mut Tile),
) -> Vec<f64> {
    debug_assert_eq!(a.len(), m * k);
    debug_assert_eq!(b.len(), k * n);
    let mut c = vec![0.0; m * n];
    let panels = n.div_ceil(NR);
    let mut bpack = vec![0.0; KC * panels * NR];
    let mut apack = vec![0.0; MC.div_ceil(MR) * MR * KC];

    for k0 in (0..k).step_by(KC) {
        let kc = KC.min(k - k0);
        pack_b(b, n, k0, kc, panels, &mut bpack);
        for i0 in (0..m).step_by(MC) {
            let mc = MC.min(m - i0);
            pack_a(a, k, i0, mc, k0, kc, &mut apack);
            for p in 0..panels {
                let j0 = p * NR;
                let nr = NR.min(n - j0);
                let bp = &bpack[p * kc * NR..(p + 1) * kc * NR];
                for (blk, ap) in apack[..mc.div_ceil(MR) * MR * kc]
                    .chunks_exact(MR * kc)
                    .enumerate()
                {
                    let i = i0 + blk * MR;
                    let mr = MR.min(i0 + mc - i);
                    let mut acc = [[0.0; NR]; MR];
                    for (r, row) in acc.iter_mut().enumerate().take(mr) {
                        row[..nr].copy_from_slice(&c[(i + r) * n + j0..(i + r) * n + j0 + nr]);
                    }
                    micro(ap, bp, kc, &mut acc);
                    for (r, row) in acc.iter().enumerate().take(mr) {
                        c[(i + r) * n + j0..(i + r) * n + j0 + nr].copy_from_slice(&row[..nr]);
                    }
                }
            }
        }
    }
    c
}

/// B rows `k0..k0+kc` as column panels of width NR, each stored k-major and
/// zero-padded on the right edge.
fn pack_b(b: &[f64], n: usize, k0: usize, kc: usize, panels: usize, out: &mut [f64]) {
    for p in 0..panels {
        let j0 = p * NR;
        let nr = NR.min(n - j0);
        let dst = &mut out[p * kc * NR..(p + 1) * kc * NR];
        for kk in 0..kc {
            let src = &b[(k0 + kk) * n + j0..(k0 + kk) * n + j0 + nr];
            let d = &mut dst[kk * NR..kk * NR + NR];
            d[..nr].copy_from_slice(src);
            d[nr..].fill(0.0);
        }
    }
}

/// A rows `i0..i0+mc`, columns `k0..k0+kc`, as MR-row slivers stored
/// k-major and zero-padded at the bottom edge.
fn pack_a(a: &[f64], k: usize, i0: usize, mc: usize, k0: usize, kc: usize, out: &mut [f64]) {
    for blk in 0..mc.div_ceil(MR) {
        let dst = &mut out[blk * MR * kc..(blk + 1) * MR * kc];
        for r in 0..MR {
            if blk * MR + r < mc {
                let i = i0 + blk * MR + r;
                let src = &a[i * k + k0..i * k + k0 + kc];
                for (kk, &v) in src.iter().enumerate() {
                    dst[kk * MR + r] = v;
                }
            } else {
                for kk in 0..kc {
                    dst[kk * MR + r] = 0.0;
                }
            }
        }
    }
}

fn micro_scalar(ap: &[f64], bp: &[f64], kc: usize, acc: &mut Tile) {
    let (ap, _) = ap.as_chunks::<MR>();
    let (bp, _) = bp.as_chunks::<NR>();
    for (av, bv) in ap[..kc].iter().zip(&bp[..kc]) {
        for r in 0..MR {
            for j in 0..NR {
                acc[r][j] = av[r].mul_add(bv[j], acc[r][j]);
            }
        }
    }
}

#[cfg(target_arch = "x86_64")]
#[target_feature(enable = "avx512f")]
unsafe fn micro_avx512(ap: &[f64], bp: &[f64], kc: usize, acc: &mut Tile) {
    use std::arch::x86_64::*;
    assert!(ap.len() >= kc * MR && bp.len() >= kc * NR);
    let p = acc.as_mut_ptr() as *mut f64;
    // SAFETY: offsets stay within `acc` (MR×NR), `ap` (kc×MR) and `bp`
    // (kc×NR), checked above.
    unsafe {
        let mut lo: [__m512d; MR] = std::array::from_fn(|r| _mm512_loadu_pd(p.add(r * NR)));
        let mut hi: [__m512d; MR] = std::array::from_fn(|r| _mm512_loadu_pd(p.add(r * NR + 8)));
        let (mut a, mut b) = (ap.as_ptr(), bp.as_ptr());
        for _ in 0..kc {
            let b0 = _mm512_loadu_pd(b);
            let b1 = _mm512_loadu_pd(b.add(8));
            for r in 0..MR {
                let av = _mm512_set1_pd(*a.add(r));
                lo[r] = _mm512_fmadd_pd(av, b0, lo[r]);
                hi[r] = _mm512_fmadd_pd(av, b1, hi[r]);
            }
            a = a.add(MR);
            b = b.add(NR);
        }
        for r in 0..MR {
            _mm512_storeu_pd(p.add(r * NR), lo[r]);
            _mm512_storeu_pd(p.add(r * NR + 8), hi[r]);
        }
    }
}

/// Rows `row0..row0 + 4`, columns `col0..col0 + 8` of the tile.
#[cfg(target_arch = "x86_64")]
#[target_feature(enable = "avx2,fma")]
unsafe fn micro_avx2(ap: &[f64], bp: &[f64], kc: usize, acc: &mut Tile, row0: usize, col0: usize) {
    use std::arch::x86_64::*;
    assert!(ap.len() >= kc * MR && bp.len() >= kc * NR && row0 + 4 <= MR && col0 + 8 <= NR);
    let p = (acc[row0..].as_mut_ptr() as *mut f64).wrapping_add(col0);
    // SAFETY: offsets stay within the 4×8 block of `acc`, `ap` and `bp`.
    unsafe {
        let mut lo: [__m256d; 4] = std::array::from_fn(|r| _mm256_loadu_pd(p.add(r * NR)));
        let mut hi: [__m256d; 4] = std::array::from_fn(|r| _mm256_loadu_pd(p.add(r * NR + 4)));
        let (mut a, mut b) = (ap.as_ptr().add(row0), bp.as_ptr().add(col0));
        for _ in 0..kc {
            let b0 = _mm256_loadu_pd(b);
            let b1 = _mm256_loadu_pd(b.add(4));
            for r in 0..4 {
                let av = _mm256_broadcast_sd(&*a.add(r));
                lo[r] = _mm256_fmadd_pd(av, b0, lo[r]);
                hi[r] = _mm256_fmadd_pd(av, b1, hi[r]);
            }
            a = a.add(MR);
            b = b.add(NR);
        }
        for r in 0..4 {
            _mm256_storeu_pd(p.add(r * NR), lo[r]);
            _mm256_storeu_pd(p.add(r * NR + 4), hi[r]);
        }
    }
}
