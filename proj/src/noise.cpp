#include "sdwave/noise.hpp"

#include "sdwave/error.hpp"
#include "sdwave/philox.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <istream>
#include <numbers>
#include <ostream>
#include <string>

namespace sdwave {

QSpec build_q_spec(NoiseKind kind, double r, int n_modes) {
    if (n_modes < 1)
        throw Error(ErrorKind::invalid_spec, "need at least one mode, got " + std::to_string(n_modes));
    if (kind == NoiseKind::fractional && !(r >= 0.0 && std::isfinite(r)))
        throw Error(ErrorKind::invalid_spec, "fractional exponent r must be finite and >= 0");
    QSpec q;
    q.kind = kind;
    q.r = kind == NoiseKind::white ? 0.0 : r;
    q.n_modes = n_modes;
    q.mode_weights.resize(n_modes);
    q.mode_eigvals.resize(n_modes);
    for (int j = 0; j < n_modes; ++j) {
        const double root = (j + 1) * std::numbers::pi;
        q.mode_eigvals[j] = root * root;
        // lambda^{-r} = (j pi)^{-2r}; r = 0 gives exactly 1.
        q.mode_weights[j] = kind == NoiseKind::white ? 1.0 : std::pow(root, -2.0 * q.r);
    }
    return q;
}

double hs_norm_partial(const QSpec& q, double gamma) {
    // Sum smallest terms first; for divergent cases the order is immaterial.
    double acc = 0.0;
    for (int j = q.n_modes - 1; j >= 0; --j)
        acc += std::pow(q.mode_eigvals[j], gamma - 1.0) * q.mode_weights[j];
    return std::sqrt(acc);
}

ModeIncrements sample_mode_increments(const QSpec& q, int n_steps, double k, std::uint64_t seed) {
    if (n_steps < 1) throw Error(ErrorKind::configuration, "need at least one step");
    if (!(k > 0.0)) throw Error(ErrorKind::configuration, "step size must be positive");
    ModeIncrements inc;
    inc.n_steps = n_steps;
    inc.k = k;
    inc.seed = seed;
    inc.increments.resize(n_steps, q.n_modes);
    const double sqrt_k = std::sqrt(k);
    for (int j = 0; j < q.n_modes; ++j) {
        const double scale = std::sqrt(q.mode_weights[j]) * sqrt_k;
        for (int n = 0; n < n_steps; ++n)
            inc.increments(n, j) = scale * keyed_standard_normal(seed, static_cast<std::uint64_t>(j),
                                                                 static_cast<std::uint64_t>(n));
    }
    return inc;
}

ModeIncrements coarsen_increments(const ModeIncrements& fine, int factor) {
    if (factor < 1 || fine.n_steps % factor != 0)
        throw Error(ErrorKind::shape, "cannot coarsen " + std::to_string(fine.n_steps) +
                                          " steps by a factor of " + std::to_string(factor));
    ModeIncrements coarse;
    coarse.n_steps = fine.n_steps / factor;
    coarse.k = fine.k * factor;
    coarse.seed = fine.seed;
    coarse.increments = RowMatrix::Zero(coarse.n_steps, fine.n_modes());
    for (int n = 0; n < coarse.n_steps; ++n)
        for (int f = 0; f < factor; ++f) coarse.increments.row(n) += fine.increments.row(n * factor + f);
    return coarse;
}

SineLoadTable build_sine_load_table(const Mesh1D& mesh, int n_modes) {
    if (n_modes < 1) throw Error(ErrorKind::invalid_spec, "need at least one mode");
    SineLoadTable table;
    table.G.resize(mesh.n_interior(), n_modes);
    for (int j = 0; j < n_modes; ++j) table.G.col(j) = sine_mode_load(j + 1, mesh);
    return table;
}

void increments_to_load(const Eigen::Ref<const Vector>& inc_row, const SineLoadTable& table, Vector& out) {
    if (inc_row.size() != table.n_modes())
        throw Error(ErrorKind::shape, "increment row has " + std::to_string(inc_row.size()) +
                                          " modes, load table has " + std::to_string(table.n_modes()));
    out.noalias() = table.G * inc_row;
}

Vector increments_to_load(const Eigen::Ref<const Vector>& inc_row, const SineLoadTable& table) {
    Vector out(table.n_interior());
    increments_to_load(inc_row, table, out);
    return out;
}

namespace {

constexpr std::array<char, 8> kMagic{'S', 'D', 'W', 'I', 'N', 'C', '\0', '\0'};
constexpr std::uint32_t kVersion = 1;

template <typename T>
void put_le(std::ostream& os, T value) {
    auto bytes = std::bit_cast<std::array<unsigned char, sizeof(T)>>(value);
    if constexpr (std::endian::native == std::endian::big) std::reverse(bytes.begin(), bytes.end());
    os.write(reinterpret_cast<const char*>(bytes.data()), bytes.size());
}

template <typename T>
T get_le(std::istream& is) {
    std::array<unsigned char, sizeof(T)> bytes{};
    is.read(reinterpret_cast<char*>(bytes.data()), bytes.size());
    if (!is) throw Error(ErrorKind::io, "truncated increments file");
    if constexpr (std::endian::native == std::endian::big) std::reverse(bytes.begin(), bytes.end());
    return std::bit_cast<T>(bytes);
}

} // namespace

void write_increments(std::ostream& os, const ModeIncrements& inc) {
    os.write(kMagic.data(), kMagic.size());
    put_le<std::uint32_t>(os, kVersion);
    put_le<std::uint32_t>(os, static_cast<std::uint32_t>(inc.n_modes()));
    put_le<std::uint64_t>(os, static_cast<std::uint64_t>(inc.n_steps));
    put_le<double>(os, inc.k);
    put_le<std::uint64_t>(os, inc.seed);
    for (int n = 0; n < inc.n_steps; ++n)
        for (int j = 0; j < inc.n_modes(); ++j) put_le<double>(os, inc.increments(n, j));
    if (!os) throw Error(ErrorKind::io, "failed writing increments");
}

ModeIncrements read_increments(std::istream& is) {
    std::array<char, 8> magic{};
    is.read(magic.data(), magic.size());
    if (!is || magic != kMagic) throw Error(ErrorKind::io, "not an increments file");
    const auto version = get_le<std::uint32_t>(is);
    if (version != kVersion)
        throw Error(ErrorKind::io, "unsupported increments version " + std::to_string(version));
    const auto modes = get_le<std::uint32_t>(is);
    const auto steps = get_le<std::uint64_t>(is);
    ModeIncrements inc;
    inc.k = get_le<double>(is);
    inc.seed = get_le<std::uint64_t>(is);
    inc.n_steps = static_cast<int>(steps);
    inc.increments.resize(static_cast<Eigen::Index>(steps), modes);
    for (std::uint64_t n = 0; n < steps; ++n)
        for (std::uint32_t j = 0; j < modes; ++j) inc.increments(n, j) = get_le<double>(is);
    return inc;
}

} // namespace sdwave
