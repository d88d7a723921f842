#pragma once

// Attack strategies available to the state preparer P1 and to an outside
// eavesdropper, plus the quantum and classical pieces those attacks use.
// Whole-run drivers live in attacks.hpp.

#include <cstddef>
#include <map>
#include <numeric>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "qsum/channel.hpp"
#include "qsum/qudit.hpp"
#include "qsum/random.hpp"

namespace qsum {

struct Honest {};

/// Measure every prepared state, send F^dagger|r> product components.
struct Attack1 {};

/// Steal digit `digit` (0-based) of party `party` with one F-rotated state.
struct Attack2 {
    PartyId party = 2;
    int digit = 0;
};

/// Replace `count` of the N+q states by (F|r>)^{(x) n}.
struct FakeState {
    int r = 0;
    int count = 1;
};

/// Outside eavesdropper measuring a fraction of transmitted qudits.
struct InterceptResend {
    double fraction = 1.0;
};

using AttackStrategy = std::variant<Honest, Attack1, Attack2, FakeState, InterceptResend>;

inline std::string strategy_name(const AttackStrategy& s) {
    struct Visitor {
        std::string operator()(const Honest&) const { return "honest"; }
        std::string operator()(const Attack1&) const { return "attack1"; }
        std::string operator()(const Attack2&) const { return "attack2"; }
        std::string operator()(const FakeState&) const { return "fake_state"; }
        std::string operator()(const InterceptResend&) const { return "intercept_resend"; }
    };
    return std::visit(Visitor{}, s);
}

/// Who speaks first when a sampled state is checked.
enum class AnnouncementModel {
    P1First,         // P1 commits before hearing anyone
    P1LastAdaptive,  // P1 hears P2..Pn first and may pick her value
};

inline const char* to_string(AnnouncementModel m) {
    return m == AnnouncementModel::P1First ? "p1_first" : "p1_last_adaptive";
}

enum class DetectionStage { Channel, Correlation };

inline const char* to_string(DetectionStage s) {
    return s == DetectionStage::Channel ? "channel" : "correlation";
}

struct EveRecord {
    PartyId receiver;
    std::size_t position;
    Basis basis;
    int outcome;
};

/// What the attacker learned. `correct_fraction` is filled by score_recovered()
/// from the true secrets; the attacker never sees it.
struct AdversaryReport {
    std::string strategy = "honest";
    std::map<std::pair<PartyId, int>, int> recovered;  // (party, digit) -> guess
    std::optional<double> correct_fraction;
    bool detected = false;
    std::optional<DetectionStage> detection_stage;
    // Fake-state attack: whether every fake state avoided the correlation
    // check sample, and whether guesses came from a fake state (informed) or
    // from a genuine one (blind).
    std::optional<bool> escaped_sampling;
    std::optional<bool> informed;
    std::vector<EveRecord> eavesdropper;
};

/// Fraction of recovered guesses matching the true digits; nullopt if none.
inline std::optional<double> score_recovered(const AdversaryReport& report,
                                             const std::vector<std::vector<int>>& secrets) {
    if (report.recovered.empty()) return std::nullopt;
    std::size_t correct = 0;
    for (const auto& [key, guess] : report.recovered) {
        const auto& [party, digit] = key;
        if (secrets.at(static_cast<std::size_t>(party - 1)).at(static_cast<std::size_t>(digit)) == guess) ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(report.recovered.size());
}

// ---------------------------------------------------------------------------
// Outside eavesdropper

/// Each position of `stream` is attacked independently with probability
/// `fraction`: Eve measures in a uniformly random basis and forwards the
/// collapsed qudit. She cannot tell decoys from payload.
inline std::vector<EveRecord> intercept_resend_eve(ChannelStream& stream, QuantumRegister& reg, double fraction,
                                                   Sampler& eve, Sampler& nature) {
    if (!(fraction >= 0.0 && fraction <= 1.0)) throw std::invalid_argument("intercept fraction must be in [0, 1]");
    std::vector<EveRecord> records;
    for (std::size_t pos = 0; pos < stream.slots.size(); ++pos) {
        if (fraction <= 0.0 || !eve.bernoulli(fraction)) continue;
        const Basis basis = eve.coin() ? Basis::Fourier : Basis::Computational;
        const int outcome = reg.measure(stream.slots[pos], basis, nature);
        records.push_back(EveRecord{stream.receiver, pos, basis, outcome});
    }
    return records;
}

// ---------------------------------------------------------------------------
// Attack states and extraction arithmetic

/// (F|r>)^{(x) n}
inline PureState fake_state(int n, Dimension d, int r) {
    if (r < 0 || r >= d.value()) throw std::out_of_range("fake state r outside [0, d)");
    const std::vector<int> digits(static_cast<std::size_t>(n), r);
    auto s = PureState::basis_state(d, digits);
    const auto F = fourier_transform(d);
    for (std::size_t site = 0; site < s.sites(); ++site) s = apply_single(s, site, F);
    return s;
}

/// (F^dagger|r>)^{(x) n}, the product state Attack 1 distributes.
inline PureState attack1_product_state(int n, Dimension d, int r) {
    if (r < 0 || r >= d.value()) throw std::out_of_range("r outside [0, d)");
    const std::vector<int> digits(static_cast<std::size_t>(n), r);
    auto s = PureState::basis_state(d, digits);
    const auto Fdag = fourier_transform(d).adjoint();
    for (std::size_t site = 0; site < s.sites(); ++site) s = apply_single(s, site, Fdag);
    return s;
}

/// Literal Attack 1 preparation on a register-held omega state: measure every
/// component computationally, then apply F^dagger to each. Returns r.
inline int attack1_collapse(QuantumRegister& reg, std::size_t state, Sampler& nature) {
    const std::size_t sites = reg.state(state).sites();
    int r = -1;
    for (std::size_t site = 0; site < sites; ++site) {
        const int outcome = reg.measure(StateRef{state, site}, Basis::Computational, nature);
        if (r < 0) r = outcome;
        if (outcome != r) throw std::logic_error("omega state components disagree");
    }
    const auto Fdag = fourier_transform(reg.dimension()).adjoint();
    for (std::size_t site = 0; site < sites; ++site) reg.apply(StateRef{state, site}, Fdag);
    return r;
}

/// k = m (-) r
inline int attack1_extract(int announced, int r, int d) { return sub_mod(announced, r, d); }

/// (1/sqrt d) sum_r |r> F|r> ... F|r>: omega with F on sites 1..n-1.
/// Site 0 goes to the victim; P1 keeps the rest.
inline PureState attack2_state(int n, Dimension d) {
    auto s = omega_state(n, d);
    const auto F = fourier_transform(d);
    for (std::size_t site = 1; site < s.sites(); ++site) s = apply_single(s, site, F);
    return s;
}

/// k_j = (l_1 (+) k_j) (+) l_2 (+) ... (+) l_n
inline int attack2_extract(int announced, std::span<const int> held_outcomes, int d) {
    int k = announced;
    for (int l : held_outcomes) k = add_mod(k, l, d);
    return k;
}

// ---------------------------------------------------------------------------
// Correlation-check announcements

/// Computational: all values equal. Fourier: values sum to 0 mod d.
inline bool correlation_pass(Basis basis, std::span<const int> announced, int d) {
    if (announced.empty()) return true;
    if (basis == Basis::Computational) {
        for (int v : announced)
            if (v != announced.front()) return false;
        return true;
    }
    int sum = 0;
    for (int v : announced) sum = add_mod(sum, v, d);
    return sum == 0;
}

/// Value a cheating P1 commits to before hearing anyone: the v maximizing the
/// pass probability against the other sites' exact outcome distribution.
/// Ties resolve to the smallest v.
inline int p1_precommit(const PureState& state, std::size_t p1_site, Basis basis) {
    const auto dist = outcome_distribution(state, basis);
    const int d = state.dim();
    int best = 0;
    double best_p = -1.0;
    for (int v = 0; v < d; ++v) {
        double p = 0.0;
        for (std::size_t i = 0; i < dist.size(); ++i) {
            if (dist[i] == 0.0) continue;
            auto tuple = dist.outcome(i);
            tuple[p1_site] = v;
            if (correlation_pass(basis, tuple, d)) p += dist[i];
        }
        if (p > best_p + kTolerance) {
            best_p = p;
            best = v;
        }
    }
    return best;
}

/// Value a cheating P1 announces after hearing the others: one that makes the
/// check pass if any exists, otherwise her own outcome.
inline int p1_adaptive(Basis basis, std::span<const int> others, int own_outcome, int d) {
    if (basis == Basis::Fourier) {
        int sum = 0;
        for (int v : others) sum = add_mod(sum, v, d);
        return sub_mod(0, sum, d);
    }
    if (others.empty()) return own_outcome;
    return correlation_pass(basis, others, d) ? others.front() : own_outcome;
}

}  // namespace qsum
