#pragma once

#include "povmforge/linalg.hpp"
#include "povmforge/rng.hpp"

namespace povmforge::testing {

inline Matrix random_matrix(int rows, int cols, SplitMix64& rng) {
    Matrix m(rows, cols);
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c) m(r, c) = Cplx(rng.gaussian(), rng.gaussian());
    return m;
}

inline Matrix random_hermitian(int n, SplitMix64& rng) {
    Matrix m = random_matrix(n, n, rng);
    return 0.5 * (m + m.adjoint());
}

inline Matrix random_psd(int n, SplitMix64& rng) {
    Matrix m = random_matrix(n, n, rng);
    return m * m.adjoint();
}

inline Ket random_ket(int n, SplitMix64& rng) {
    Ket k(n);
    for (int i = 0; i < n; ++i) k(i) = Cplx(rng.gaussian(), rng.gaussian());
    return k / k.norm();
}

}  // namespace povmforge::testing
