#include "qsg/config.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <istream>
#include <numeric>
#include <ostream>

#include "json.hpp"
#include "qsg/errors.hpp"
#include "qsg/parallel.hpp"

namespace qsg {

int rank_of(std::uint32_t mask, int p) {
    for (int r = p; r >= 1; --r) {
        int fwd = (mask >> (r - 1)) & 1u;
        int bwd = (mask >> (2 * p - r)) & 1u;
        if (fwd != bwd) return r;
    }
    return 0;
}

std::uint32_t bar_of(std::uint32_t mask, int p) {
    int l = rank_of(mask, p);
    if (l == 0) return mask;
    return mask ^ (1u << (l - 1)) ^ (1u << (2 * p - l));
}

Partition partition_of(std::uint32_t mask, int p) {
    if (rank_of(mask, p) == 0) return Partition::A0;
    // prod_{j=1..p} a_j = +1 iff the forward half has an even number of -1 bits
    std::uint32_t fwd = mask & ((1u << p) - 1u);
    return (std::popcount(fwd) % 2 == 0) ? Partition::D : Partition::Dbar;
}

std::uint64_t lex_key(std::uint32_t mask, int p) {
    // tuple slot t (1-based) lives at bit t-1; digit 1 for spin +1, 0 for -1
    std::uint64_t key = 0;
    for (int t = 1; t <= 2 * p; ++t) {
        key = (key << 1) | (1u - ((mask >> (t - 1)) & 1u));
    }
    return key;
}

int compare_order(std::uint32_t a, std::uint32_t b, int p) {
    if (partition_of(a, p) != Partition::D || partition_of(b, p) != Partition::D)
        throw domain_error("compare_order: both arguments must lie in D");
    int ra = rank_of(a, p), rb = rank_of(b, p);
    if (ra != rb) return ra < rb ? -1 : 1;
    std::uint64_t ka = lex_key(a, p), kb = lex_key(b, p);
    if (ka != kb) return ka < kb ? -1 : 1;
    return 0;
}

BasisTables build_tables(int p, std::span<const double> gamma, std::span<const double> beta,
                         int p_cap) {
    if (p < 1) throw capacity_error("build_tables: p must be >= 1");
    if (p > p_cap)
        throw capacity_error("build_tables: p=" + std::to_string(p) + " exceeds cap " +
                             std::to_string(p_cap) + " (4^p table would need ~" +
                             std::to_string((std::size_t{1} << (2 * p)) * 34 / (1u << 20)) +
                             " MiB); raise the cap to override");
    if (static_cast<int>(gamma.size()) != p || static_cast<int>(beta.size()) != p)
        throw usage_error("build_tables: gamma and beta must each have length p");

    const std::size_t n = std::size_t{1} << (2 * p);
    BasisTables t;
    t.p = p;
    t.gamma.assign(gamma.begin(), gamma.end());
    t.beta.assign(beta.begin(), beta.end());
    t.phi.resize(n);
    t.q_amp.resize(n);
    t.rank.resize(n);
    t.bar.resize(n);
    t.partition.resize(n);

    std::vector<double> cb(p), sb(p);
    for (int r = 0; r < p; ++r) {
        cb[r] = std::cos(beta[r]);
        sb[r] = std::sin(beta[r]);
    }

    parallel_for_chunks(0, n, [&](std::size_t lo, std::size_t hi) {
        for (std::size_t m = lo; m < hi; ++m) {
            const auto mask = static_cast<std::uint32_t>(m);
            // Q by direct products of cos/sin/i factors so exact zeros survive
            cplx q{1.0, 0.0};
            for (int r = 1; r <= p; ++r) {
                int ar = spin_at(mask, r, p);
                int amr = spin_at(mask, -r, p);
                if (ar == amr) {
                    q *= (ar > 0) ? cb[r - 1] * cb[r - 1] : sb[r - 1] * sb[r - 1];
                } else {
                    double sc = sb[r - 1] * cb[r - 1];
                    // i^{(a_{-r}-a_r)/2}: -i when a_r=+1, +i when a_r=-1
                    q *= (ar > 0) ? cplx{0.0, -sc} : cplx{0.0, sc};
                }
            }
            t.q_amp[m] = q;
            // Phi via suffix products: fwd_r = a_r...a_p, bwd_r = a_{-r}...a_{-p}
            double phi = 0.0;
            int fwd = 1, bwd = 1;
            for (int r = p; r >= 1; --r) {
                fwd *= spin_at(mask, r, p);
                bwd *= spin_at(mask, -r, p);
                phi += t.gamma[r - 1] * (fwd - bwd);
            }
            t.phi[m] = phi;
            int rk = rank_of(mask, p);
            t.rank[m] = static_cast<std::uint8_t>(rk);
            t.bar[m] = bar_of(mask, p);
            t.partition[m] = partition_of(mask, p);
        }
    });

    t.order_index.reserve((n - (std::size_t{1} << p)) / 2);
    for (std::size_t m = 0; m < n; ++m)
        if (t.partition[m] == Partition::D) t.order_index.push_back(static_cast<std::uint32_t>(m));
    std::sort(t.order_index.begin(), t.order_index.end(), [&](std::uint32_t a, std::uint32_t b) {
        if (t.rank[a] != t.rank[b]) return t.rank[a] < t.rank[b];
        return lex_key(a, p) < lex_key(b, p);
    });
    return t;
}

namespace {
constexpr char kMagic[8] = {'q', 's', 'g', 't', 'a', 'b', '0', '1'};

template <typename T>
void write_pod(std::ostream& os, const T& v) {
    os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}
template <typename T>
T read_pod(std::istream& is) {
    T v;
    is.read(reinterpret_cast<char*>(&v), sizeof(T));
    return v;
}
}  // namespace

void save_binary(const BasisTables& t, std::ostream& os) {
    os.write(kMagic, sizeof(kMagic));
    write_pod<std::int32_t>(os, t.p);
    for (double g : t.gamma) write_pod(os, g);
    for (double b : t.beta) write_pod(os, b);
    const std::uint64_t n = t.size();
    write_pod(os, n);
    os.write(reinterpret_cast<const char*>(t.phi.data()), n * sizeof(double));
    os.write(reinterpret_cast<const char*>(t.q_amp.data()), n * sizeof(cplx));
    os.write(reinterpret_cast<const char*>(t.rank.data()), n * sizeof(std::uint8_t));
    os.write(reinterpret_cast<const char*>(t.bar.data()), n * sizeof(std::uint32_t));
    os.write(reinterpret_cast<const char*>(t.partition.data()), n * sizeof(Partition));
    const std::uint64_t nd = t.order_index.size();
    write_pod(os, nd);
    os.write(reinterpret_cast<const char*>(t.order_index.data()), nd * sizeof(std::uint32_t));
}

BasisTables load_binary(std::istream& is) {
    char magic[8];
    is.read(magic, sizeof(magic));
    if (!is || std::memcmp(magic, kMagic, sizeof(magic)) != 0)
        throw usage_error("load_binary: bad magic");
    BasisTables t;
    t.p = read_pod<std::int32_t>(is);
    t.gamma.resize(t.p);
    t.beta.resize(t.p);
    for (auto& g : t.gamma) g = read_pod<double>(is);
    for (auto& b : t.beta) b = read_pod<double>(is);
    const auto n = read_pod<std::uint64_t>(is);
    t.phi.resize(n);
    t.q_amp.resize(n);
    t.rank.resize(n);
    t.bar.resize(n);
    t.partition.resize(n);
    is.read(reinterpret_cast<char*>(t.phi.data()), n * sizeof(double));
    is.read(reinterpret_cast<char*>(t.q_amp.data()), n * sizeof(cplx));
    is.read(reinterpret_cast<char*>(t.rank.data()), n * sizeof(std::uint8_t));
    is.read(reinterpret_cast<char*>(t.bar.data()), n * sizeof(std::uint32_t));
    is.read(reinterpret_cast<char*>(t.partition.data()), n * sizeof(Partition));
    const auto nd = read_pod<std::uint64_t>(is);
    t.order_index.resize(nd);
    is.read(reinterpret_cast<char*>(t.order_index.data()), nd * sizeof(std::uint32_t));
    if (!is) throw usage_error("load_binary: truncated stream");
    return t;
}

std::string to_json(const BasisTables& t) {
    nlohmann::json j;
    j["p"] = t.p;
    j["gamma"] = t.gamma;
    j["beta"] = t.beta;
    j["phi"] = t.phi;
    nlohmann::json q = nlohmann::json::array();
    for (const auto& z : t.q_amp) q.push_back({z.real(), z.imag()});
    j["q_amp"] = std::move(q);
    j["rank"] = t.rank;
    j["bar"] = t.bar;
    nlohmann::json part = nlohmann::json::array();
    for (auto v : t.partition) part.push_back(static_cast<int>(v));
    j["partition"] = std::move(part);
    j["order_index"] = t.order_index;
    return j.dump();
}

BasisTables tables_from_json(const std::string& text) {
    auto j = nlohmann::json::parse(text);
    BasisTables t;
    t.p = j.at("p").get<int>();
    t.gamma = j.at("gamma").get<std::vector<double>>();
    t.beta = j.at("beta").get<std::vector<double>>();
    t.phi = j.at("phi").get<std::vector<double>>();
    for (const auto& z : j.at("q_amp")) t.q_amp.emplace_back(z.at(0).get<double>(), z.at(1).get<double>());
    t.rank = j.at("rank").get<std::vector<std::uint8_t>>();
    t.bar = j.at("bar").get<std::vector<std::uint32_t>>();
    for (const auto& v : j.at("partition")) t.partition.push_back(static_cast<Partition>(v.get<int>()));
    t.order_index = j.at("order_index").get<std::vector<std::uint32_t>>();
    return t;
}

}  // namespace qsg
