#pragma once
/*
Inner-loop kernels for the per-round statistics updates.  Each operation
touches independent array lanes (no horizontal reductions), so the vector
variants produce bit-identical results to the scalar references; the
equivalence tests assert exact equality.  Callers go through active(),
which points at the widest variant the CPU supports, selected once at
startup.
*/

#include <cstddef>

namespace pairelim::simd {

struct Kernels {
    // dst[j] += s * mask[j]            (mask entries are 0.0 or 1.0)
    void (*masked_add)(double* dst, double s, const double* mask, std::size_t n);
    // dst[j] += (x - f[j])^2 * mask[j]
    void (*masked_sqdiff_add)(double* dst, double x, const double* f, const double* mask,
                              std::size_t n);
    // out[j] = (y - f[j])^2
    void (*squared_residuals)(double* out, double y, const double* f, std::size_t n);
    const char* name;
};

const Kernels& scalar_kernels();

// Null when the instruction set is unavailable on this machine.
const Kernels* avx2_kernels();
const Kernels* neon_kernels();

// Widest supported variant, chosen once per process.
const Kernels& active();

}  // namespace pairelim::simd
