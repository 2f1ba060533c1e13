#pragma once

#include <complex>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace qsg {

using cplx = std::complex<double>;

// A configuration is a 2p-bit string (a_1..a_p, a_{-p}..a_{-1}).
// Bit j-1 holds a_j for j=1..p; bit p+(p-k) holds a_{-k} for k=1..p.
// Bit value 0 encodes spin +1, bit value 1 encodes spin -1, so the bitwise
// spin product of two configurations is the XOR of their masks.
struct SpinConfig {
    std::uint32_t mask = 0;
};

inline SpinConfig xor_product(SpinConfig a, SpinConfig b) { return {a.mask ^ b.mask}; }

// Spin a_j of `mask` for j in {1..p} (forward) or {-1..-p} (backward).
inline int spin_at(std::uint32_t mask, int j, int p) {
    int bit = j > 0 ? (j - 1) : (2 * p + j);  // a_{-k} lives at bit 2p-k
    return (mask >> bit) & 1u ? -1 : +1;
}

enum class Partition : std::uint8_t { A0 = 0, D = 1, Dbar = 2 };

// Largest index i with a_i != a_{-i}, or 0 for mirror strings.
int rank_of(std::uint32_t mask, int p);
// Flips the two entries at the rank position; identity on rank-0 strings.
std::uint32_t bar_of(std::uint32_t mask, int p);
Partition partition_of(std::uint32_t mask, int p);
// Lexicographic key over the tuple (a_1..a_p, a_{-p}..a_{-1}) with -1 < +1;
// larger key = lexically greater.
std::uint64_t lex_key(std::uint32_t mask, int p);
// Rank-then-lexicographic comparison on D: negative / 0 / positive.
// Throws domain_error unless both arguments lie in D.
int compare_order(std::uint32_t a, std::uint32_t b, int p);

// Everything the rest of the library needs to know about A = {+-1}^{2p} at
// fixed angles: the per-configuration amplitudes Q_a, phases Phi_a, and the
// rank / bar / partition / order structure. Immutable after build and safe to
// share across threads.
struct BasisTables {
    int p = 0;
    std::vector<double> gamma, beta;
    std::vector<double> phi;            // Phi_a, length 4^p
    std::vector<cplx> q_amp;            // Q_a, length 4^p
    std::vector<std::uint8_t> rank;     // l(a) in 0..p
    std::vector<std::uint32_t> bar;     // partner index under the bar op
    std::vector<Partition> partition;   // A0 | D | Dbar
    std::vector<std::uint32_t> order_index;  // masks of D, ascending in (rank, lex)

    std::size_t size() const { return phi.size(); }
    std::size_t d_size() const { return order_index.size(); }
};

inline constexpr int kDefaultPCap = 13;  // dense 4^p tables stay under ~2 GB

BasisTables build_tables(int p, std::span<const double> gamma, std::span<const double> beta,
                         int p_cap = kDefaultPCap);

// Little-endian binary dump (magic + p + angles + tables) and a JSON form for
// small p. Both round-trip bit-exactly for the double fields.
void save_binary(const BasisTables& t, std::ostream& os);
BasisTables load_binary(std::istream& is);
std::string to_json(const BasisTables& t);
BasisTables tables_from_json(const std::string& text);

}  // namespace qsg
