#pragma once

// Exact probability oracles and the Monte Carlo experiment engine.
//
// Oracles work on rationals: outcome probabilities of the enumerated states
// are k / d^m, recovered from the floating-point distribution by rounding to
// that grid (residual checked against 1e-9) and then combined exactly.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "qsum/adversary.hpp"
#include "qsum/channel.hpp"
#include "qsum/protocol.hpp"
#include "qsum/qudit.hpp"
#include "qsum/random.hpp"

namespace qsum {

using BigInt = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

/// Shortest round-trip decimal rendering of a double.
inline std::string format_decimal(double x) {
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, x);
    if (ec != std::errc{}) throw std::runtime_error("format_decimal failed");
    return {buf, end};
}

/// A probability held as a reduced fraction.
class ExactProbability {
public:
    ExactProbability() = default;
    explicit ExactProbability(Rational value) : value_(std::move(value)) {
        if (value_ < 0 || value_ > 1) throw std::domain_error("probability outside [0, 1]");
    }
    ExactProbability(const BigInt& num, const BigInt& den) : ExactProbability(Rational(num, den)) {}

    const Rational& value() const noexcept { return value_; }
    BigInt numerator() const { return boost::multiprecision::numerator(value_); }
    BigInt denominator() const { return boost::multiprecision::denominator(value_); }
    double to_double() const { return static_cast<double>(value_); }

    /// "a/b"
    std::string fraction() const { return numerator().str() + "/" + denominator().str(); }
    /// "a/b = 0.xyz"
    std::string render() const { return fraction() + " = " + format_decimal(to_double()); }

    friend bool operator==(const ExactProbability& a, const ExactProbability& b) { return a.value_ == b.value_; }

private:
    Rational value_{0};
};

/// Nearest k/denominator to p; throws if further than 1e-9 away.
inline Rational rationalize(double p, std::uint64_t denominator) {
    const double scaled = p * static_cast<double>(denominator);
    const auto k = static_cast<std::int64_t>(std::llround(scaled));
    if (std::abs(p - static_cast<double>(k) / static_cast<double>(denominator)) > kTolerance)
        throw std::domain_error("probability " + format_decimal(p) + " is not a multiple of 1/" +
                                std::to_string(denominator));
    return Rational(k, static_cast<std::int64_t>(denominator));
}

inline BigInt binomial(unsigned n, unsigned k) {
    if (k > n) return 0;
    k = std::min(k, n - k);
    BigInt out = 1;
    for (unsigned i = 1; i <= k; ++i) out = out * (n - k + i) / i;
    return out;
}

/// Chance a single fake state avoids a uniformly random q-subset of N+q: N/(N+q).
inline ExactProbability escape_probability(int N, int q) {
    if (N < 1 || q < 0) throw std::invalid_argument("escape_probability needs N >= 1, q >= 0");
    return ExactProbability(BigInt(N), BigInt(N + q));
}

/// Same quantity from the subset count C(N+q-1, q) / C(N+q, q).
inline ExactProbability escape_probability_binomial(int N, int q) {
    if (N < 1 || q < 0) throw std::invalid_argument("escape_probability needs N >= 1, q >= 0");
    const auto total = static_cast<unsigned>(N + q);
    return ExactProbability(binomial(total - 1, static_cast<unsigned>(q)), binomial(total, static_cast<unsigned>(q)));
}

/// Exact joint distribution of `state` measured entirely in `basis`,
/// as (outcome tuple, probability) pairs with nonzero probability.
inline std::vector<std::pair<std::vector<int>, Rational>> exact_distribution(const PureState& state, Basis basis) {
    const auto dist = outcome_distribution(state, basis);
    const auto grid = static_cast<std::uint64_t>(state.size());
    std::vector<std::pair<std::vector<int>, Rational>> out;
    Rational total = 0;
    for (std::size_t i = 0; i < dist.size(); ++i) {
        Rational p = rationalize(dist[i], grid);
        if (p == 0) continue;
        total += p;
        out.emplace_back(dist.outcome(i), std::move(p));
    }
    if (total != 1) throw std::logic_error("exact distribution does not sum to 1");
    return out;
}

/// Pass probability of the correlation check on `state` in `basis` when
/// every party announces its true outcome.
inline ExactProbability truthful_pass_probability(const PureState& state, Basis basis) {
    Rational p = 0;
    for (const auto& [tuple, prob] : exact_distribution(state, basis))
        if (correlation_pass(basis, tuple, state.dim())) p += prob;
    return ExactProbability(p);
}

/// Pass probability in one basis when P1 (site 0) cheats under `model`.
inline ExactProbability cheating_pass_probability(const PureState& state, Basis basis, AnnouncementModel model) {
    const int d = state.dim();
    const auto dist = exact_distribution(state, basis);
    auto passes_with = [&](std::vector<int> tuple, int v) {
        tuple[0] = v;
        return correlation_pass(basis, tuple, d);
    };
    if (model == AnnouncementModel::P1LastAdaptive) {
        Rational p = 0;
        for (const auto& [tuple, prob] : dist) {
            for (int v = 0; v < d; ++v)
                if (passes_with(tuple, v)) {
                    p += prob;
                    break;
                }
        }
        return ExactProbability(p);
    }
    Rational best = 0;
    for (int v = 0; v < d; ++v) {
        Rational p = 0;
        for (const auto& [tuple, prob] : dist)
            if (passes_with(tuple, v)) p += prob;
        best = std::max(best, p);
    }
    return ExactProbability(best);
}

/// Probability that the fake state (F|r>)^{(x) n}, once sampled, passes the
/// correlation check: basis chosen uniformly, P1 announcing per `model`.
inline ExactProbability conditional_pass_probability(int n, int d, int r, AnnouncementModel model) {
    if (n < 3 || d < 2 || r < 0 || r >= d)
        throw std::invalid_argument("conditional_pass_probability needs n >= 3, d >= 2, 0 <= r < d");
    const auto state = fake_state(n, Dimension(d), r);
    const Rational half(1, 2);
    return ExactProbability(half * cheating_pass_probability(state, Basis::Computational, model).value() +
                            half * cheating_pass_probability(state, Basis::Fourier, model).value());
}

/// Per-decoy detection probability of a full intercept-resend attack, by
/// enumeration over decoy basis and value, Eve's basis and outcome, and the
/// receiver's outcome.
inline ExactProbability eve_detection_probability(int d) {
    if (d < 2) throw std::invalid_argument("eve_detection_probability needs d >= 2");
    const Dimension dim(d);
    const QuantumRegister reg(dim);
    const Basis bases[] = {Basis::Computational, Basis::Fourier};
    const Rational half(1, 2);
    const Rational uniform_value(1, d);
    Rational detect = 0;
    for (Basis decoy_basis : bases)
        for (int value = 0; value < d; ++value)
            for (Basis eve_basis : bases) {
                const auto decoy = reg.eigenstate(decoy_basis, value);
                for (const auto& [eve_out, p_eve] : exact_distribution(decoy, eve_basis)) {
                    const auto resent = reg.eigenstate(eve_basis, eve_out[0]);
                    for (const auto& [recv, p_recv] : exact_distribution(resent, decoy_basis))
                        if (recv[0] != value) detect += half * uniform_value * half * p_eve * p_recv;
                }
            }
    return ExactProbability(detect);
}

// ---------------------------------------------------------------------------
// Monte Carlo

struct MonteCarloEstimate {
    std::uint64_t trials = 0;
    std::uint64_t successes = 0;
    double point = 0.0;
    double std_error = 0.0;
    std::uint64_t seed = 0;

    static MonteCarloEstimate from_counts(std::uint64_t trials, std::uint64_t successes, std::uint64_t seed) {
        MonteCarloEstimate e{trials, successes, 0.0, 0.0, seed};
        if (trials > 0) {
            e.point = static_cast<double>(successes) / static_cast<double>(trials);
            e.std_error = std::sqrt(e.point * (1.0 - e.point) / static_cast<double>(trials));
        }
        return e;
    }

    /// |point - value| <= sigmas * stderr. A zero stderr requires exact agreement.
    bool agrees_with(double value, double sigmas) const {
        return std::abs(point - value) <= sigmas * std_error + 1e-12;
    }
};

enum class ScenarioKind {
    HonestSuccess,        // completed with the correct sum
    Attack1Recovery,      // yy2018 attack1 recovers every digit, undetected, sum intact
    FakeStateEscape,      // every fake state avoided the correlation sample
    FakeStateSuccess,     // escaped and every informed guess correct
    FakeStateBlindGuess,  // per guess made from a genuine state: guess correct
    ConditionalPass,      // sampled fake state passes one check
    EveDetection,         // one intercepted decoy reveals an error
};

inline const char* to_string(ScenarioKind k) {
    switch (k) {
        case ScenarioKind::HonestSuccess: return "honest_success";
        case ScenarioKind::Attack1Recovery: return "attack1_recovery";
        case ScenarioKind::FakeStateEscape: return "fake_state_escape";
        case ScenarioKind::FakeStateSuccess: return "fake_state_success";
        case ScenarioKind::FakeStateBlindGuess: return "fake_state_blind_guess";
        case ScenarioKind::ConditionalPass: return "conditional_pass";
        case ScenarioKind::EveDetection: return "eve_detection";
    }
    return "?";
}

inline ScenarioKind scenario_from_string(const std::string& s) {
    for (auto k : {ScenarioKind::HonestSuccess, ScenarioKind::Attack1Recovery, ScenarioKind::FakeStateEscape,
                   ScenarioKind::FakeStateSuccess, ScenarioKind::FakeStateBlindGuess, ScenarioKind::ConditionalPass,
                   ScenarioKind::EveDetection})
        if (s == to_string(k)) return k;
    throw std::invalid_argument("unknown Monte Carlo scenario '" + s + "'");
}

enum class ProtocolKind { YY2018, Improved };

inline const char* to_string(ProtocolKind p) { return p == ProtocolKind::YY2018 ? "yy2018" : "improved"; }

/// What one trial runs. The config seed is replaced per trial.
struct Experiment {
    ScenarioKind scenario = ScenarioKind::HonestSuccess;
    ProtocolKind protocol = ProtocolKind::Improved;
    ProtocolConfig config;
    AttackStrategy strategy = Honest{};
    AnnouncementModel model = AnnouncementModel::P1First;
};

/// Contribution of one trial: `units` Bernoulli observations, `hits` successes.
struct TrialTally {
    std::uint64_t units = 0;
    std::uint64_t hits = 0;
};

inline RoundResult run_protocol(ProtocolKind p, const ProtocolConfig& c, const std::vector<std::vector<int>>& secrets,
                                const RunOptions& opts) {
    return p == ProtocolKind::YY2018 ? run_yy2018(c, secrets, opts) : run_improved(c, secrets, opts);
}

inline TrialTally run_trial(const Experiment& e, std::uint64_t trial_seed) {
    ProtocolConfig c = e.config;
    c.seed = trial_seed;
    const int fake_r = std::holds_alternative<FakeState>(e.strategy) ? std::get<FakeState>(e.strategy).r : 0;

    switch (e.scenario) {
        case ScenarioKind::ConditionalPass: {
            const Dimension d(c.d);
            QuantumRegister reg(d);
            const std::size_t id = reg.add_state(fake_state(c.n, d, fake_r));
            std::vector<std::vector<StateRef>> holdings;
            for (std::size_t i = 0; i < static_cast<std::size_t>(c.n); ++i) holdings.push_back({StateRef{id, i}});
            Sampler parties(trial_seed, Stream::Parties);
            Sampler nature(trial_seed, Stream::Nature);
            const CheckSample sample{0, parties.coin() ? Basis::Fourier : Basis::Computational, true};
            const auto event = correlation_check(reg, holdings, std::span(&sample, 1), e.model, nature);
            return {1, event.samples.front().passed ? 1u : 0u};
        }
        case ScenarioKind::EveDetection: {
            QuantumRegister reg(Dimension(c.d));
            Sampler sender(trial_seed, Stream::Preparer);
            Sampler eve(trial_seed, Stream::Eavesdropper);
            Sampler nature(trial_seed, Stream::Nature);
            auto stream = insert_decoys(reg, 2, {}, 1, sender);
            intercept_resend_eve(stream, reg, 1.0, eve, nature);
            const auto results = measure_decoys(reg, stream, nature);
            return {1, decoy_check(stream.decoys, results) > 0.0 ? 1u : 0u};
        }
        default: break;
    }

    Sampler secret_rng(trial_seed, Stream::Secrets);
    const auto secrets = random_secrets(c, secret_rng);
    const auto result = run_protocol(e.protocol, c, secrets, RunOptions{e.strategy, e.model});
    const auto& report = result.adversary;
    const bool sum_ok = result.sum && *result.sum == digitwise_sum(secrets, c.d);
    const auto accuracy = score_recovered(report, secrets);

    switch (e.scenario) {
        case ScenarioKind::HonestSuccess:
            return {1, sum_ok ? 1u : 0u};
        case ScenarioKind::Attack1Recovery:
            return {1, (sum_ok && !report.detected && accuracy && *accuracy == 1.0) ? 1u : 0u};
        case ScenarioKind::FakeStateEscape:
            return {1, report.escaped_sampling.value_or(false) ? 1u : 0u};
        case ScenarioKind::FakeStateSuccess:
            return {1, (result.sum && report.informed.value_or(false) && accuracy && *accuracy == 1.0) ? 1u : 0u};
        case ScenarioKind::FakeStateBlindGuess: {
            if (report.informed.value_or(true) || report.recovered.empty()) return {0, 0};
            TrialTally t;
            for (const auto& [key, guess] : report.recovered) {
                ++t.units;
                if (secrets[static_cast<std::size_t>(key.first - 1)][static_cast<std::size_t>(key.second)] == guess)
                    ++t.hits;
            }
            return t;
        }
        default: break;
    }
    throw std::logic_error("unhandled scenario");
}

/// Runs trials 0..trials-1 with seeds derive_seed(seed, i). Work is split
/// across `workers` threads; the result is identical for any worker count.
inline MonteCarloEstimate monte_carlo(const Experiment& e, std::uint64_t trials, std::uint64_t seed,
                                      unsigned workers = 1) {
    if (trials < 1) throw std::invalid_argument("monte_carlo needs at least one trial");
    e.config.validate();
    workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(std::min<std::uint64_t>(trials, 256))));
    std::vector<TrialTally> partial(workers);
    auto work = [&](unsigned w) {
        TrialTally acc;
        for (std::uint64_t i = w; i < trials; i += workers) {
            const auto t = run_trial(e, derive_seed(seed, i));
            acc.units += t.units;
            acc.hits += t.hits;
        }
        partial[w] = acc;
    };
    if (workers == 1) {
        work(0);
    } else {
        std::vector<std::jthread> pool;
        for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work, w);
    }
    TrialTally total;
    for (const auto& p : partial) {
        total.units += p.units;
        total.hits += p.hits;
    }
    return MonteCarloEstimate::from_counts(total.units, total.hits, seed);
}

}  // namespace qsum
