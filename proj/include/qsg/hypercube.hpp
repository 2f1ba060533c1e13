#pragma once

#include <span>
#include <vector>

#include "qsg/config.hpp"

namespace qsg {

// A complex function on A = {+-1}^{2p} or its character-basis transform.
// Round-tripping wht / wht_inverse reproduces the input to <1e-12 relative.
struct HypercubeSpectrum {
    std::vector<cplx> values;
    bool spectral = false;
};

// In-place unnormalized Walsh-Hadamard butterflies over (Z/2)^k, len = 2^k.
void wht_inplace(std::span<cplx> v);

// f_hat(k) = sum_x (-1)^{popcount(k & x)} f(x). Length must be a power of 4.
HypercubeSpectrum wht(const HypercubeSpectrum& f);
// Inverse transform: wht scaled by 1/len.
HypercubeSpectrum wht_inverse(const HypercubeSpectrum& f);

// XOR convolution (f * g)(c) = sum_{ab=c} f(a) g(b) via the transform.
std::vector<cplx> xor_convolve(std::span<const cplx> f, std::span<const cplx> g);

}  // namespace qsg
