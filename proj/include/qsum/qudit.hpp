#pragma once

// Dense state-vector simulation of d-level systems.
//
// Digit convention: a PureState over m sites stores d^m amplitudes indexed by
// the base-d number whose most significant digit is site 0. Party labels in
// transcripts are 1-based; sites here are 0-based.

#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "qsum/random.hpp"

namespace qsum {

using Amplitude = std::complex<double>;

inline constexpr double kTolerance = 1e-9;

/// Largest amplitude vector a PureState may hold.
inline constexpr std::size_t kMaxAmplitudes = std::size_t{1} << 22;

/// Qudit level count, d >= 2.
class Dimension {
public:
    explicit Dimension(int d) : d_(d) {
        if (d < 2) throw std::invalid_argument("dimension must be >= 2, got " + std::to_string(d));
    }
    int value() const noexcept { return d_; }
    operator int() const noexcept { return d_; }

private:
    int d_;
};

enum class Basis { Computational, Fourier };

inline const char* to_string(Basis b) {
    return b == Basis::Computational ? "computational" : "fourier";
}

struct MeasurementRecord {
    std::size_t site;
    Basis basis;
    int outcome;
};

/// x (+) y, addition mod d.
inline int add_mod(int x, int y, int d) { return ((x + y) % d + d) % d; }
inline int sub_mod(int x, int y, int d) { return add_mod(x, -y, d); }

/// d^m, or throws if it exceeds the amplitude budget.
inline std::size_t checked_power(int d, std::size_t m) {
    std::size_t size = 1;
    for (std::size_t i = 0; i < m; ++i) {
        if (size > kMaxAmplitudes / static_cast<std::size_t>(d))
            throw std::length_error("state of " + std::to_string(m) + " sites with d=" +
                                    std::to_string(d) + " exceeds 2^22 amplitudes");
        size *= static_cast<std::size_t>(d);
    }
    return size;
}

/// Base-d digits of `index` over `sites` digits, site 0 first.
inline std::vector<int> to_digits(std::size_t index, int d, std::size_t sites) {
    std::vector<int> digits(sites);
    for (std::size_t s = sites; s-- > 0;) {
        digits[s] = static_cast<int>(index % static_cast<std::size_t>(d));
        index /= static_cast<std::size_t>(d);
    }
    return digits;
}

inline std::size_t from_digits(std::span<const int> digits, int d) {
    std::size_t index = 0;
    for (int digit : digits) {
        if (digit < 0 || digit >= d) throw std::out_of_range("digit out of range [0, d)");
        index = index * static_cast<std::size_t>(d) + static_cast<std::size_t>(digit);
    }
    return index;
}

/// d x d complex matrix, row-major. Unitarity is checked on construction.
class SingleQuditUnitary {
public:
    SingleQuditUnitary(Dimension d, std::vector<Amplitude> entries)
        : d_(d), entries_(std::move(entries)) {
        const auto n = static_cast<std::size_t>(d_.value());
        if (entries_.size() != n * n) throw std::invalid_argument("unitary must have d*d entries");
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < n; ++j) {
                Amplitude acc{};
                for (std::size_t k = 0; k < n; ++k) acc += entries_[i * n + k] * std::conj(entries_[j * n + k]);
                const Amplitude expected = i == j ? 1.0 : 0.0;
                if (std::abs(acc - expected) > kTolerance)
                    throw std::invalid_argument("matrix is not unitary within 1e-9");
            }
        }
    }

    int dim() const noexcept { return d_.value(); }
    Amplitude operator()(int row, int col) const {
        return entries_[static_cast<std::size_t>(row) * static_cast<std::size_t>(dim()) +
                        static_cast<std::size_t>(col)];
    }
    std::span<const Amplitude> entries() const noexcept { return entries_; }

    SingleQuditUnitary adjoint() const {
        const auto n = static_cast<std::size_t>(dim());
        std::vector<Amplitude> out(n * n);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) out[j * n + i] = std::conj(entries_[i * n + j]);
        return {d_, std::move(out)};
    }

    /// this * rhs
    SingleQuditUnitary operator*(const SingleQuditUnitary& rhs) const {
        if (rhs.dim() != dim()) throw std::invalid_argument("unitary dimension mismatch");
        const auto n = static_cast<std::size_t>(dim());
        std::vector<Amplitude> out(n * n);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t k = 0; k < n; ++k) {
                const Amplitude a = entries_[i * n + k];
                for (std::size_t j = 0; j < n; ++j) out[i * n + j] += a * rhs.entries_[k * n + j];
            }
        return {d_, std::move(out)};
    }

private:
    Dimension d_;
    std::vector<Amplitude> entries_;
};

/// F|r> = d^{-1/2} sum_l zeta^{lr} |l>, zeta = e^{2 pi i / d}.
inline SingleQuditUnitary fourier_transform(Dimension d) {
    const int n = d.value();
    const double scale = 1.0 / std::sqrt(static_cast<double>(n));
    std::vector<Amplitude> entries(static_cast<std::size_t>(n) * static_cast<std::size_t>(n));
    for (int l = 0; l < n; ++l)
        for (int r = 0; r < n; ++r) {
            // Reduce the exponent first so the phase is exact on the unit circle.
            const int e = (l * r) % n;
            const double angle = 2.0 * std::numbers::pi * e / n;
            entries[static_cast<std::size_t>(l * n + r)] = std::polar(scale, angle);
        }
    return {d, std::move(entries)};
}

/// U_k = sum_u |u (+) k><u|.
inline SingleQuditUnitary shift_operator(int k, Dimension d) {
    const int n = d.value();
    if (k < 0 || k >= n)
        throw std::out_of_range("shift amount " + std::to_string(k) + " outside [0, " + std::to_string(n) + ")");
    std::vector<Amplitude> entries(static_cast<std::size_t>(n) * static_cast<std::size_t>(n));
    for (int u = 0; u < n; ++u) entries[static_cast<std::size_t>(add_mod(u, k, n) * n + u)] = 1.0;
    return {d, std::move(entries)};
}

/// Normalized pure state over `sites` qudits.
class PureState {
public:
    /// |0...0>
    PureState(Dimension d, std::size_t sites) : d_(d), sites_(sites) {
        if (sites == 0) throw std::invalid_argument("a state needs at least one site");
        amps_.assign(checked_power(d, sites), Amplitude{});
        amps_[0] = 1.0;
    }

    PureState(Dimension d, std::size_t sites, std::vector<Amplitude> amps)
        : d_(d), sites_(sites), amps_(std::move(amps)) {
        if (sites == 0) throw std::invalid_argument("a state needs at least one site");
        if (amps_.size() != checked_power(d, sites))
            throw std::invalid_argument("amplitude vector length must be d^sites");
        for (const auto& a : amps_)
            if (!std::isfinite(a.real()) || !std::isfinite(a.imag()))
                throw std::invalid_argument("amplitudes must be finite");
        if (std::abs(norm_squared() - 1.0) > kTolerance)
            throw std::invalid_argument("state is not normalized within 1e-9");
    }

    /// Computational basis product state |digits[0] digits[1] ...>.
    static PureState basis_state(Dimension d, std::span<const int> digits) {
        PureState s(d, digits.size());
        s.amps_[0] = 0.0;
        s.amps_[from_digits(digits, d)] = 1.0;
        return s;
    }

    int dim() const noexcept { return d_.value(); }
    Dimension dimension() const noexcept { return d_; }
    std::size_t sites() const noexcept { return sites_; }
    std::size_t size() const noexcept { return amps_.size(); }
    std::span<const Amplitude> amplitudes() const noexcept { return amps_; }
    Amplitude amplitude(std::span<const int> digits) const { return amps_[from_digits(digits, dim())]; }
    Amplitude operator[](std::size_t index) const { return amps_[index]; }

    double norm_squared() const {
        double total = 0.0;
        for (const auto& a : amps_) total += std::norm(a);
        return total;
    }

    /// Stride between consecutive digit values at `site`.
    std::size_t stride(std::size_t site) const {
        std::size_t s = 1;
        for (std::size_t i = site + 1; i < sites_; ++i) s *= static_cast<std::size_t>(dim());
        return s;
    }

    /// Tensor product this (x) other; this occupies the leading sites.
    PureState tensor(const PureState& other) const {
        if (other.dim() != dim()) throw std::invalid_argument("tensor: dimension mismatch");
        checked_power(dim(), sites_ + other.sites_);
        std::vector<Amplitude> out;
        out.reserve(amps_.size() * other.amps_.size());
        for (const auto& a : amps_)
            for (const auto& b : other.amps_) out.push_back(a * b);
        return {d_, sites_ + other.sites_, std::move(out)};
    }

private:
    friend PureState apply_single(const PureState&, std::size_t, const SingleQuditUnitary&);
    friend std::pair<double, PureState> project_site(const PureState&, std::size_t, int);

    struct Unchecked {};
    PureState(Unchecked, Dimension d, std::size_t sites, std::vector<Amplitude> amps)
        : d_(d), sites_(sites), amps_(std::move(amps)) {}

    Dimension d_;
    std::size_t sites_;
    std::vector<Amplitude> amps_;
};

/// (1/sqrt d) sum_r |r>^{(x) n}.
inline PureState omega_state(int n, Dimension d) {
    if (n < 2) throw std::invalid_argument("omega_state needs n >= 2");
    const auto sites = static_cast<std::size_t>(n);
    std::vector<Amplitude> amps(checked_power(d, sites));
    const double a = 1.0 / std::sqrt(static_cast<double>(d.value()));
    for (int r = 0; r < d.value(); ++r) {
        std::vector<int> digits(sites, r);
        amps[from_digits(digits, d)] = a;
    }
    return {d, sites, std::move(amps)};
}

/// I (x) ... (x) op (x) ... (x) I with op acting on `site`.
inline PureState apply_single(const PureState& state, std::size_t site, const SingleQuditUnitary& op) {
    if (op.dim() != state.dim()) throw std::invalid_argument("apply_single: operator dimension mismatch");
    if (site >= state.sites()) throw std::out_of_range("apply_single: site out of range");
    const auto d = static_cast<std::size_t>(state.dim());
    const std::size_t stride = state.stride(site);
    const std::size_t block = stride * d;
    const auto& in = state.amps_;
    std::vector<Amplitude> out(in.size());
    std::vector<Amplitude> column(d);
    for (std::size_t base = 0; base < in.size(); base += block) {
        for (std::size_t offset = 0; offset < stride; ++offset) {
            for (std::size_t u = 0; u < d; ++u) column[u] = in[base + offset + u * stride];
            for (std::size_t v = 0; v < d; ++v) {
                Amplitude acc{};
                for (std::size_t u = 0; u < d; ++u)
                    acc += op(static_cast<int>(v), static_cast<int>(u)) * column[u];
                out[base + offset + v * stride] = acc;
            }
        }
    }
    return {PureState::Unchecked{}, state.dimension(), state.sites(), std::move(out)};
}

/// Probability of computational outcome `value` at `site` and the renormalized
/// post-measurement state. Throws if the outcome has zero probability.
inline std::pair<double, PureState> project_site(const PureState& state, std::size_t site, int value) {
    if (site >= state.sites()) throw std::out_of_range("project_site: site out of range");
    const auto d = static_cast<std::size_t>(state.dim());
    const std::size_t stride = state.stride(site);
    std::vector<Amplitude> out(state.size());
    double p = 0.0;
    for (std::size_t i = 0; i < state.size(); ++i) {
        if ((i / stride) % d == static_cast<std::size_t>(value)) {
            out[i] = state.amps_[i];
            p += std::norm(out[i]);
        }
    }
    if (p <= 0.0) throw std::logic_error("renormalization of a zero-probability outcome");
    const double scale = 1.0 / std::sqrt(p);
    for (auto& a : out) a *= scale;
    return {p, PureState{PureState::Unchecked{}, state.dimension(), state.sites(), std::move(out)}};
}

/// Outcome probabilities of a computational measurement at `site`.
inline std::vector<double> site_probabilities(const PureState& state, std::size_t site) {
    const auto d = static_cast<std::size_t>(state.dim());
    const std::size_t stride = state.stride(site);
    std::vector<double> p(d, 0.0);
    const auto amps = state.amplitudes();
    for (std::size_t i = 0; i < amps.size(); ++i) p[(i / stride) % d] += std::norm(amps[i]);
    return p;
}

/// Projective measurement of one site. Fourier outcome l means projection onto F|l>.
inline std::pair<MeasurementRecord, PureState> measure_site(const PureState& state, std::size_t site,
                                                            Basis basis, Sampler& sampler) {
    if (site >= state.sites()) throw std::out_of_range("measure_site: site out of range");
    const auto F = fourier_transform(state.dimension());
    const PureState rotated = basis == Basis::Fourier ? apply_single(state, site, F.adjoint()) : state;
    const auto probs = site_probabilities(rotated, site);
    const double u = sampler.uniform();
    double cumulative = 0.0;
    int outcome = -1;
    int last_nonzero = 0;
    for (std::size_t v = 0; v < probs.size(); ++v) {
        if (probs[v] > 0.0) last_nonzero = static_cast<int>(v);
        cumulative += probs[v];
        if (outcome < 0 && u < cumulative && probs[v] > 0.0) outcome = static_cast<int>(v);
    }
    // Rounding can leave u just above the accumulated total.
    if (outcome < 0) outcome = last_nonzero;
    auto [p, collapsed] = project_site(rotated, site, outcome);
    if (basis == Basis::Fourier) collapsed = apply_single(collapsed, site, F);
    return {MeasurementRecord{site, basis, outcome}, std::move(collapsed)};
}

/// Exhaustive joint outcome distribution for per-site measurement bases.
class OutcomeDistribution {
public:
    OutcomeDistribution(int d, std::size_t sites, std::vector<double> probs)
        : d_(d), sites_(sites), probs_(std::move(probs)) {}

    int dim() const noexcept { return d_; }
    std::size_t sites() const noexcept { return sites_; }
    std::size_t size() const noexcept { return probs_.size(); }
    std::span<const double> probabilities() const noexcept { return probs_; }
    double operator[](std::size_t index) const { return probs_[index]; }
    double at(std::span<const int> outcome) const { return probs_[from_digits(outcome, d_)]; }
    std::vector<int> outcome(std::size_t index) const { return to_digits(index, d_, sites_); }

    /// Outcome tuples with probability above `threshold`.
    std::vector<std::vector<int>> support(double threshold = kTolerance) const {
        std::vector<std::vector<int>> out;
        for (std::size_t i = 0; i < probs_.size(); ++i)
            if (probs_[i] > threshold) out.push_back(outcome(i));
        return out;
    }

    double total() const {
        double t = 0.0;
        for (double p : probs_) t += p;
        return t;
    }

private:
    int d_;
    std::size_t sites_;
    std::vector<double> probs_;
};

inline OutcomeDistribution outcome_distribution(const PureState& state, std::span<const Basis> bases) {
    if (bases.size() != state.sites()) throw std::invalid_argument("outcome_distribution: one basis per site");
    PureState rotated = state;
    const auto Fdag = fourier_transform(state.dimension()).adjoint();
    for (std::size_t s = 0; s < bases.size(); ++s)
        if (bases[s] == Basis::Fourier) rotated = apply_single(rotated, s, Fdag);
    std::vector<double> probs(rotated.size());
    for (std::size_t i = 0; i < probs.size(); ++i) probs[i] = std::norm(rotated[i]);
    return {state.dim(), state.sites(), std::move(probs)};
}

inline OutcomeDistribution outcome_distribution(const PureState& state, Basis basis) {
    const std::vector<Basis> bases(state.sites(), basis);
    return outcome_distribution(state, bases);
}

/// Total variation distance between two distributions over the same space.
inline double total_variation(const OutcomeDistribution& a, const OutcomeDistribution& b) {
    if (a.size() != b.size()) throw std::invalid_argument("total_variation: size mismatch");
    double sum = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) sum += std::abs(a[i] - b[i]);
    return 0.5 * sum;
}

/// Debug listing, one amplitude per line: "index(digits) re im".
/// Digits are comma-separated when d > 10.
inline void dump(std::ostream& os, const PureState& state) {
    for (std::size_t i = 0; i < state.size(); ++i) {
        os << i << '(';
        const auto digits = to_digits(i, state.dim(), state.sites());
        for (std::size_t s = 0; s < digits.size(); ++s) {
            if (s > 0 && state.dim() > 10) os << ',';
            os << digits[s];
        }
        os << ") " << state[i].real() << ' ' << state[i].imag() << '\n';
    }
}

}  // namespace qsum
