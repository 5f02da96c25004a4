#pragma once

// Seeded random group elements for tests, benchmarks, and the CLI.

#include <cstdint>
#include <random>

#include "cartan/densela.hpp"

namespace cartan {

using Rng = std::mt19937_64;

RMat gaussian_real(int rows, int cols, Rng& rng);
CMat gaussian_complex(int rows, int cols, Rng& rng);

// Haar measure via QR of a Gaussian matrix with phase-fixed R diagonal.
CMat haar_unitary(int n, Rng& rng);
// Haar measure on SO(n) (O(n) Haar, first column negated when det = -1).
RMat haar_special_orthogonal(int n, Rng& rng);
// Random element of Sp(n) = U(2n) cap Sp(2n, C), as exp of a random algebra element.
CMat random_symplectic_unitary(int n, Rng& rng);
// Random real skew-symmetric matrix with Gaussian entries.
RMat random_skew(int n, Rng& rng);

}  // namespace cartan
