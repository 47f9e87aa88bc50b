//! Minimal dense kernels for the Gram-matrix products that dominate training.

/// Multiplies a symmetric row-major `p x p` matrix by a row-major `p x ncols`
/// block, writing into `out` (`p x ncols`, row-major).
///
/// Accumulation over the shared index runs in ascending order for every
/// output column, so a single-column call reproduces the blocked call
/// bit-for-bit column by column.
pub(crate) fn sym_mat_block(mat: &[f64], p: usize, block: &[f64], ncols: usize, out: &mut [f64]) {
    debug_assert_eq!(mat.len(), p * p);
    debug_assert_eq!(block.len(), p * ncols);
    debug_assert_eq!(out.len(), p * ncols);

    if ncols == 1 {
        for (row, o) in mat.chunks_exact(p).zip(out.iter_mut()) {
            *o = dot_sequential(row, block);
        }
        return;
    }

    // One pass over the matrix; four shared-index steps fused per sweep so
    // the output row is loaded and stored once per four multiply-adds. The
    // left-to-right adds keep each column's accumulation in ascending order
    // of the shared index.
    for (row, out_row) in mat.chunks_exact(p).zip(out.chunks_exact_mut(ncols)) {
        out_row.fill(0.0);
        let mut nu = 0;
        while nu + 4 <= p {
            let k0 = row[nu];
            let k1 = row[nu + 1];
            let k2 = row[nu + 2];
            let k3 = row[nu + 3];
            let b0 = &block[nu * ncols..(nu + 1) * ncols];
            let b1 = &block[(nu + 1) * ncols..(nu + 2) * ncols];
            let b2 = &block[(nu + 2) * ncols..(nu + 3) * ncols];
            let b3 = &block[(nu + 3) * ncols..(nu + 4) * ncols];
            for i in 0..ncols {
                out_row[i] = out_row[i] + k0 * b0[i] + k1 * b1[i] + k2 * b2[i] + k3 * b3[i];
            }
            nu += 4;
        }
        while nu < p {
            let k = row[nu];
            let b = &block[nu * ncols..(nu + 1) * ncols];
            for i in 0..ncols {
                out_row[i] += k * b[i];
            }
            nu += 1;
        }
    }
}

/// Plain left-to-right dot product. Kept strictly sequential so the
/// single-column and blocked matrix products agree exactly.
pub(crate) fn dot_sequential(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = 0.0;
    for (&x, &y) in a.iter().zip(b) {
        acc += x * y;
    }
    acc
}
