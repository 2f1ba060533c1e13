#include "qsg/hypercube.hpp"

#include <bit>

#include "qsg/errors.hpp"
#include "qsg/parallel.hpp"

namespace qsg {

namespace {
bool power_of_four(std::size_t n) {
    return n != 0 && std::has_single_bit(n) && (std::countr_zero(n) % 2 == 0);
}
}  // namespace

void wht_inplace(std::span<cplx> v) {
    const std::size_t n = v.size();
    if (n == 0 || !std::has_single_bit(n)) throw shape_error("wht: length must be a power of two");
    for (std::size_t h = 1; h < n; h <<= 1) {
        // one butterfly stage; blocks of size 2h are independent
        parallel_for_chunks(0, n / (2 * h), [&](std::size_t blo, std::size_t bhi) {
            for (std::size_t b = blo; b < bhi; ++b) {
                std::size_t i = b * 2 * h;
                for (std::size_t j = i; j < i + h; ++j) {
                    cplx x = v[j], y = v[j + h];
                    v[j] = x + y;
                    v[j + h] = x - y;
                }
            }
        }, std::size_t{1} << 16);
    }
}

HypercubeSpectrum wht(const HypercubeSpectrum& f) {
    if (!power_of_four(f.values.size()))
        throw shape_error("wht: length must be a power of 4 (got " +
                          std::to_string(f.values.size()) + ")");
    HypercubeSpectrum out{f.values, !f.spectral};
    wht_inplace(out.values);
    return out;
}

HypercubeSpectrum wht_inverse(const HypercubeSpectrum& f) {
    HypercubeSpectrum out = wht(f);
    out.spectral = !f.spectral;
    const double scale = 1.0 / static_cast<double>(out.values.size());
    for (auto& z : out.values) z *= scale;
    return out;
}

std::vector<cplx> xor_convolve(std::span<const cplx> f, std::span<const cplx> g) {
    if (f.size() != g.size()) throw shape_error("xor_convolve: length mismatch");
    if (!power_of_four(f.size())) throw shape_error("xor_convolve: length must be a power of 4");
    std::vector<cplx> a(f.begin(), f.end()), b(g.begin(), g.end());
    wht_inplace(a);
    wht_inplace(b);
    for (std::size_t i = 0; i < a.size(); ++i) a[i] *= b[i];
    wht_inplace(a);
    const double scale = 1.0 / static_cast<double>(a.size());
    for (auto& z : a) z *= scale;
    return a;
}

}  // namespace qsg
