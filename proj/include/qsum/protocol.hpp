#pragma once

// Multi-party quantum summation over Z_d.
//
// run_yy2018: P1 distributes omega states, every party encodes its digit with
// U_k F, measures computationally and announces; P1 adds the announcements.
//
// run_improved: P1 distributes N+q omega states; P2..Pn sample q of them and
// check the omega correlations in a random basis; the remaining N are measured
// in the Fourier basis and each party announces K_j (+) L_j.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "qsum/adversary.hpp"
#include "qsum/channel.hpp"
#include "qsum/qudit.hpp"
#include "qsum/random.hpp"

namespace qsum {

/// Thrown with every violated bound, collected before any simulation work.
class ConfigError : public std::invalid_argument {
public:
    explicit ConfigError(std::vector<std::string> problems)
        : std::invalid_argument(join(problems)), problems_(std::move(problems)) {}
    const std::vector<std::string>& problems() const noexcept { return problems_; }

private:
    static std::string join(const std::vector<std::string>& p) {
        std::string out = "invalid configuration:";
        for (const auto& s : p) out += "\n  " + s;
        return out;
    }
    std::vector<std::string> problems_;
};

struct ProtocolConfig {
    int n = 3;
    int d = 2;
    int N = 10;
    int q = 30;  // improved protocol only
    int decoys_per_channel = 4;
    double channel_error_threshold = 0.0;
    double correlation_error_threshold = 0.0;
    std::uint64_t seed = 0;

    std::vector<std::string> violations() const {
        std::vector<std::string> out;
        if (n <= 2) out.push_back("n must be > 2 (got " + std::to_string(n) + ")");
        if (d < 2) out.push_back("d must be >= 2 (got " + std::to_string(d) + ")");
        if (N < 1) out.push_back("N must be >= 1 (got " + std::to_string(N) + ")");
        if (q < 0) out.push_back("q must be >= 0 (got " + std::to_string(q) + ")");
        if (decoys_per_channel < 0)
            out.push_back("decoys_per_channel must be >= 0 (got " + std::to_string(decoys_per_channel) + ")");
        if (!(channel_error_threshold >= 0.0 && channel_error_threshold <= 1.0))
            out.push_back("channel_error_threshold must be in [0, 1]");
        if (!(correlation_error_threshold >= 0.0 && correlation_error_threshold <= 1.0))
            out.push_back("correlation_error_threshold must be in [0, 1]");
        if (n > 2 && d >= 2) {
            try {
                checked_power(d, static_cast<std::size_t>(n));
            } catch (const std::length_error& e) {
                out.push_back(std::string("size guard: ") + e.what());
            }
        }
        return out;
    }

    void validate() const {
        if (auto v = violations(); !v.empty()) throw ConfigError(std::move(v));
    }
};

struct SecretString {
    PartyId owner;
    std::vector<int> digits;
};

inline std::vector<SecretString> make_secrets(const std::vector<std::vector<int>>& digits) {
    std::vector<SecretString> out;
    for (std::size_t i = 0; i < digits.size(); ++i) out.push_back({static_cast<PartyId>(i + 1), digits[i]});
    return out;
}

inline std::vector<std::vector<int>> random_secrets(const ProtocolConfig& c, Sampler& sampler) {
    std::vector<std::vector<int>> out(static_cast<std::size_t>(c.n), std::vector<int>(static_cast<std::size_t>(c.N)));
    for (auto& row : out)
        for (auto& digit : row) digit = sampler.below(c.d);
    return out;
}

struct Announcement {
    PartyId party;
    std::vector<int> payload;
};

enum class Verdict { Completed, AbortedChannel, AbortedCorrelation };

inline const char* to_string(Verdict v) {
    switch (v) {
        case Verdict::Completed: return "completed";
        case Verdict::AbortedChannel: return "aborted_channel";
        case Verdict::AbortedCorrelation: return "aborted_correlation";
    }
    return "?";
}

struct ChannelEvent {
    PartyId receiver;
    std::size_t length;  // transmitted slots including decoys
    std::vector<DecoyRecord> decoys;
    double error_rate;
    bool passed;
};

struct SampleEvent {
    std::size_t state_index;
    Basis basis;
    std::vector<int> announced;  // indexed by party - 1
    bool passed;
};

struct CorrelationEvent {
    std::vector<std::size_t> sampled;
    std::vector<SampleEvent> samples;
    double error_rate = 0.0;
    bool passed = true;
};

struct Transcript {
    std::string protocol;
    ProtocolConfig config;
    std::string strategy = "honest";
    std::string announcement_model;
    std::vector<std::string> log;
    std::vector<ChannelEvent> channel;
    std::optional<CorrelationEvent> correlation;
    std::vector<Announcement> announcements;
    Verdict verdict = Verdict::Completed;
    std::optional<std::vector<int>> published_sum;
};

struct RoundResult {
    std::optional<std::vector<int>> sum;
    Transcript transcript;
    AdversaryReport adversary;
    // Improved protocol: each party's Fourier outcomes L_j on the retained
    // states. Private to the parties; kept for verification only.
    std::vector<std::vector<int>> fourier_outcomes;
};

struct RunOptions {
    AttackStrategy strategy = Honest{};
    AnnouncementModel announcement_model = AnnouncementModel::P1First;
};

/// Digitwise sum mod d of equal-length announcements.
inline std::vector<int> compute_sum(std::span<const Announcement> announcements, int d) {
    if (announcements.empty()) throw std::invalid_argument("compute_sum: no announcements");
    const std::size_t len = announcements.front().payload.size();
    std::vector<int> sum(len, 0);
    for (const auto& a : announcements) {
        if (a.payload.size() != len) throw std::invalid_argument("compute_sum: announcement length mismatch");
        for (std::size_t t = 0; t < len; ++t) sum[t] = add_mod(sum[t], a.payload[t], d);
    }
    return sum;
}

inline std::vector<int> digitwise_sum(std::span<const std::vector<int>> strings, int d) {
    std::vector<Announcement> a;
    for (std::size_t i = 0; i < strings.size(); ++i) a.push_back({static_cast<PartyId>(i + 1), strings[i]});
    return compute_sum(a, d);
}

/// q distinct positions out of `total`, uniformly, returned in increasing order.
inline std::vector<std::size_t> choose_sample_positions(std::size_t total, std::size_t q, Sampler& sampler) {
    if (q > total) throw std::invalid_argument("cannot sample more positions than exist");
    std::vector<std::size_t> order(total);
    for (std::size_t i = 0; i < total; ++i) order[i] = i;
    for (std::size_t i = 0; i < q; ++i) std::swap(order[i], order[i + sampler.below(total - i)]);
    order.resize(q);
    std::sort(order.begin(), order.end());
    return order;
}

struct CheckSample {
    std::size_t position;
    Basis basis;
    bool p1_cheats = false;  // P1 announces per the announcement model instead of her outcome
};

/// Correlation check on sampled positions. `holdings[i][t]` is party i+1's
/// component of state t. Every party measures its component in the sample's
/// basis and announces; a sample passes if the announcements carry the omega
/// signature in that basis.
inline CorrelationEvent correlation_check(QuantumRegister& reg, std::span<const std::vector<StateRef>> holdings,
                                          std::span<const CheckSample> samples, AnnouncementModel model,
                                          Sampler& nature) {
    if (holdings.empty()) throw std::invalid_argument("correlation_check: no parties");
    const std::size_t positions = holdings.front().size();
    for (const auto& h : holdings)
        if (h.size() != positions) throw std::invalid_argument("correlation_check: ragged holdings");
    for (const auto& s : samples)
        if (s.position >= positions) throw std::out_of_range("correlation_check: sample position out of range");

    const int d = reg.dim();
    CorrelationEvent event;
    std::size_t failures = 0;
    for (const auto& s : samples) {
        event.sampled.push_back(s.position);
        const StateRef p1_ref = holdings[0][s.position];
        std::optional<int> commitment;
        if (s.p1_cheats && model == AnnouncementModel::P1First)
            commitment = p1_precommit(reg.state(p1_ref.state), p1_ref.site, s.basis);

        std::vector<int> announced(holdings.size());
        for (std::size_t i = 0; i < holdings.size(); ++i)
            announced[i] = reg.measure(holdings[i][s.position], s.basis, nature);

        if (s.p1_cheats) {
            if (commitment) {
                announced[0] = *commitment;
            } else {
                const std::span<const int> others(announced.data() + 1, announced.size() - 1);
                announced[0] = p1_adaptive(s.basis, others, announced[0], d);
            }
        }
        const bool ok = correlation_pass(s.basis, announced, d);
        if (!ok) ++failures;
        event.samples.push_back(SampleEvent{s.position, s.basis, std::move(announced), ok});
    }
    event.error_rate = samples.empty() ? 0.0 : static_cast<double>(failures) / static_cast<double>(samples.size());
    return event;
}

/// Joint distributions for the two encodings of digits k_i on omega_state(n, d):
/// A applies U_{k_i} F at each site then measures computationally; B measures
/// in the Fourier basis and adds k_i to party i's outcome.
inline std::pair<OutcomeDistribution, OutcomeDistribution> encode_equivalence_probe(Dimension d, int n,
                                                                                   std::span<const int> secrets) {
    if (secrets.size() != static_cast<std::size_t>(n))
        throw std::invalid_argument("encode_equivalence_probe: one digit per party");
    const auto F = fourier_transform(d);
    const auto omega = omega_state(n, d);

    PureState encoded = omega;
    for (std::size_t i = 0; i < secrets.size(); ++i)
        encoded = apply_single(encoded, i, shift_operator(secrets[i], d) * F);
    auto a = outcome_distribution(encoded, Basis::Computational);

    const auto fourier = outcome_distribution(omega, Basis::Fourier);
    std::vector<double> shifted(fourier.size(), 0.0);
    for (std::size_t idx = 0; idx < fourier.size(); ++idx) {
        auto tuple = fourier.outcome(idx);
        for (std::size_t i = 0; i < tuple.size(); ++i) tuple[i] = add_mod(tuple[i], secrets[i], d);
        shifted[from_digits(tuple, d)] += fourier[idx];
    }
    return {std::move(a), OutcomeDistribution(d, static_cast<std::size_t>(n), std::move(shifted))};
}

namespace detail {

inline std::string digits_string(std::span<const int> v) {
    std::ostringstream os;
    os << '(';
    for (std::size_t i = 0; i < v.size(); ++i) os << (i ? "," : "") << v[i];
    os << ')';
    return os.str();
}

inline void check_secrets(const ProtocolConfig& c, std::span<const SecretString> secrets) {
    std::vector<std::string> problems = c.violations();
    if (secrets.size() != static_cast<std::size_t>(c.n))
        problems.push_back("expected " + std::to_string(c.n) + " secret strings, got " +
                           std::to_string(secrets.size()));
    for (const auto& s : secrets) {
        if (s.digits.size() != static_cast<std::size_t>(c.N))
            problems.push_back("secret of P" + std::to_string(s.owner) + " has length " +
                               std::to_string(s.digits.size()) + ", expected N=" + std::to_string(c.N));
        for (int digit : s.digits)
            if (digit < 0 || digit >= c.d) {
                problems.push_back("secret of P" + std::to_string(s.owner) + " has digit " + std::to_string(digit) +
                                   " outside [0, d)");
                break;
            }
    }
    if (!problems.empty()) throw ConfigError(std::move(problems));
}

inline void check_strategy(const ProtocolConfig& c, const AttackStrategy& s, bool improved) {
    std::vector<std::string> problems;
    if (const auto* a2 = std::get_if<Attack2>(&s)) {
        if (improved) problems.push_back("attack2 applies to the yy2018 protocol only");
        if (a2->party < 2 || a2->party > c.n) problems.push_back("attack2 target party must be in [2, n]");
        if (a2->digit < 0 || a2->digit >= c.N) problems.push_back("attack2 target digit must be in [0, N)");
    } else if (const auto* f = std::get_if<FakeState>(&s)) {
        if (!improved) problems.push_back("fake_state applies to the improved protocol only");
        if (f->r < 0 || f->r >= c.d) problems.push_back("fake_state r must be in [0, d)");
        if (f->count < 1 || f->count > c.N + c.q) problems.push_back("fake_state count must be in [1, N+q]");
    } else if (const auto* e = std::get_if<InterceptResend>(&s)) {
        if (!(e->fraction >= 0.0 && e->fraction <= 1.0)) problems.push_back("intercept fraction must be in [0, 1]");
    } else if (std::holds_alternative<Attack1>(s) && improved) {
        problems.push_back("attack1 applies to the yy2018 protocol only");
    }
    if (!problems.empty()) throw ConfigError(std::move(problems));
}

struct Samplers {
    explicit Samplers(std::uint64_t seed)
        : preparer(seed, Stream::Preparer),
          parties(seed, Stream::Parties),
          nature(seed, Stream::Nature),
          eve(seed, Stream::Eavesdropper) {}
    Sampler preparer, parties, nature, eve;
};

/// Send party j's payload (j >= 2) through a decoy-protected channel, let the
/// eavesdropper act, and run the decoy check. Returns false on abort.
inline bool transmit(QuantumRegister& reg, const ProtocolConfig& c, std::vector<std::vector<StateRef>>& holdings,
                     const AttackStrategy& strategy, Samplers& rng, Transcript& tr, AdversaryReport& report) {
    const auto* eve = std::get_if<InterceptResend>(&strategy);
    std::vector<ChannelStream> streams;
    for (std::size_t i = 1; i < holdings.size(); ++i) {
        const std::vector<Slot> payload(holdings[i].begin(), holdings[i].end());
        streams.push_back(insert_decoys(reg, static_cast<PartyId>(i + 1), payload, c.decoys_per_channel, rng.preparer));
        tr.log.push_back("P1 sends S'_" + std::to_string(i + 1) + " (" + std::to_string(streams.back().slots.size()) +
                         " qudits, " + std::to_string(c.decoys_per_channel) + " decoys) to P" + std::to_string(i + 1));
    }
    if (eve != nullptr) {
        for (auto& stream : streams) {
            auto records = intercept_resend_eve(stream, reg, eve->fraction, rng.eve, rng.nature);
            report.eavesdropper.insert(report.eavesdropper.end(), records.begin(), records.end());
        }
        tr.log.push_back("Eve intercepted " + std::to_string(report.eavesdropper.size()) + " qudits");
    }

    bool ok = true;
    for (auto& stream : streams) {
        const auto results = measure_decoys(reg, stream, rng.nature);
        for (std::size_t k = 0; k < results.size(); ++k) stream.decoys[k].measured = results[k];
        const double rate = decoy_check(stream.decoys, results);
        const bool passed = rate <= c.channel_error_threshold;
        tr.channel.push_back(ChannelEvent{stream.receiver, stream.slots.size(), stream.decoys, rate, passed});
        tr.log.push_back("decoy check with P" + std::to_string(stream.receiver) + ": error rate " +
                         std::to_string(rate) + (passed ? " (pass)" : " (abort)"));
        ok = ok && passed;
        holdings[static_cast<std::size_t>(stream.receiver - 1)] = strip_decoys(stream.slots);
    }
    return ok;
}

inline void abort_run(RoundResult& out, Verdict v, AdversaryReport& report, DetectionStage stage) {
    out.transcript.verdict = v;
    out.transcript.log.push_back(std::string("protocol aborted: ") + to_string(v));
    report.detected = true;
    report.detection_stage = stage;
    report.recovered.clear();
}

}  // namespace detail

/// YY2018 summation. With an honest P1 and a clean channel the result is
/// K_1 (+) ... (+) K_n.
inline RoundResult run_yy2018(const ProtocolConfig& c, std::span<const SecretString> secrets,
                              const RunOptions& opts = {}) {
    detail::check_secrets(c, secrets);
    detail::check_strategy(c, opts.strategy, false);
    const Dimension d(c.d);
    const auto n = static_cast<std::size_t>(c.n);
    const auto N = static_cast<std::size_t>(c.N);
    detail::Samplers rng(c.seed);

    RoundResult out;
    auto& tr = out.transcript;
    auto& report = out.adversary;
    tr.protocol = "yy2018";
    tr.config = c;
    tr.strategy = strategy_name(opts.strategy);
    report.strategy = tr.strategy;

    // Step 1: preparation. holdings[i][t] = party i+1's component of digit t.
    QuantumRegister reg(d);
    std::vector<std::vector<StateRef>> holdings(n, std::vector<StateRef>(N));
    std::vector<int> attack1_r;
    std::optional<std::size_t> stolen;
    const auto* a2 = std::get_if<Attack2>(&opts.strategy);

    for (std::size_t t = 0; t < N; ++t) {
        if (a2 != nullptr && static_cast<std::size_t>(a2->digit) == t) {
            // Victim gets site 0 of the F-rotated state; P1 keeps sites 1..n-1.
            // The other parties share a genuine omega state among themselves
            // and P1 so that the published sum stays correct.
            stolen = reg.add_state(attack2_state(c.n, d));
            const std::size_t rest = reg.add_state(omega_state(c.n - 1, d));
            const auto victim = static_cast<std::size_t>(a2->party - 1);
            holdings[victim][t] = StateRef{*stolen, 0};
            std::size_t site = 0;
            for (std::size_t i = 0; i < n; ++i)
                if (i != victim) holdings[i][t] = StateRef{rest, site++};
            continue;
        }
        const std::size_t id = reg.add_state(omega_state(c.n, d));
        for (std::size_t i = 0; i < n; ++i) holdings[i][t] = StateRef{id, i};
        if (std::holds_alternative<Attack1>(opts.strategy)) attack1_r.push_back(attack1_collapse(reg, id, rng.nature));
    }
    tr.log.push_back("P1 prepares " + std::to_string(N) + " omega states (n=" + std::to_string(c.n) +
                     ", d=" + std::to_string(c.d) + ")");
    if (!attack1_r.empty())
        tr.log.push_back("P1 measures every component, records r=" + detail::digits_string(attack1_r) +
                         " and applies F^dagger to each component");
    if (a2 != nullptr)
        tr.log.push_back("P1 replaces state " + std::to_string(a2->digit) + " by sum_r |r>F|r>...F|r> and sends site 1 to P" +
                         std::to_string(a2->party));

    // Step 2: decoy-protected distribution.
    if (!detail::transmit(reg, c, holdings, opts.strategy, rng, tr, report)) {
        detail::abort_run(out, Verdict::AbortedChannel, report, DetectionStage::Channel);
        return out;
    }

    // Step 3: encode with U_k F.
    const auto F = fourier_transform(d);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t t = 0; t < N; ++t)
            reg.apply(holdings[i][t], shift_operator(secrets[i].digits[t], d) * F);
    tr.log.push_back("every party applies U_k F to each component");

    // Step 4: computational measurement and announcement.
    for (std::size_t i = 0; i < n; ++i) {
        Announcement a{static_cast<PartyId>(i + 1), std::vector<int>(N)};
        for (std::size_t t = 0; t < N; ++t) a.payload[t] = reg.measure(holdings[i][t], Basis::Computational, rng.nature);
        tr.log.push_back("P" + std::to_string(i + 1) + " announces M=" + detail::digits_string(a.payload));
        tr.announcements.push_back(std::move(a));
    }

    std::vector<int> sum = compute_sum(tr.announcements, c.d);
    if (!attack1_r.empty()) {
        for (std::size_t t = 0; t < N; ++t) {
            sum[t] = sub_mod(sum[t], c.n * attack1_r[t], c.d);
            for (std::size_t i = 1; i < n; ++i)
                report.recovered[{static_cast<PartyId>(i + 1), static_cast<int>(t)}] =
                    attack1_extract(tr.announcements[i].payload[t], attack1_r[t], c.d);
        }
        tr.log.push_back("P1 extracts k_j = m_j (-) r for every other party");
    }
    if (a2 != nullptr) {
        const auto t = static_cast<std::size_t>(a2->digit);
        std::vector<int> held;
        for (std::size_t site = 1; site < n; ++site)
            held.push_back(reg.measure(StateRef{*stolen, site}, Basis::Computational, rng.nature));
        const int announced = tr.announcements[static_cast<std::size_t>(a2->party - 1)].payload[t];
        const int k = attack2_extract(announced, held, c.d);
        report.recovered[{a2->party, a2->digit}] = k;
        // The victim's announcement carries l_1 (+) k, not k; replace it.
        sum[t] = add_mod(sub_mod(sum[t], announced, c.d), k, c.d);
        tr.log.push_back("P1 measures her components l=" + detail::digits_string(held) + ", extracts k = " +
                         std::to_string(announced) + " (+) sum(l) = " + std::to_string(k));
    }

    tr.verdict = Verdict::Completed;
    tr.published_sum = sum;
    tr.log.push_back("P1 publishes K=" + detail::digits_string(sum));
    out.sum = std::move(sum);
    return out;
}

inline RoundResult run_yy2018(const ProtocolConfig& c, const std::vector<std::vector<int>>& secrets,
                              const RunOptions& opts = {}) {
    const auto s = make_secrets(secrets);
    return run_yy2018(c, s, opts);
}

/// Improved summation with the q-sample correlation check and Fourier-basis
/// measurement in place of U_k F encoding.
inline RoundResult run_improved(const ProtocolConfig& c, std::span<const SecretString> secrets,
                                const RunOptions& opts = {}) {
    detail::check_secrets(c, secrets);
    detail::check_strategy(c, opts.strategy, true);
    const Dimension d(c.d);
    const auto n = static_cast<std::size_t>(c.n);
    const auto N = static_cast<std::size_t>(c.N);
    const auto total = N + static_cast<std::size_t>(c.q);
    detail::Samplers rng(c.seed);

    RoundResult out;
    auto& tr = out.transcript;
    auto& report = out.adversary;
    tr.protocol = "improved";
    tr.config = c;
    tr.strategy = strategy_name(opts.strategy);
    tr.announcement_model = to_string(opts.announcement_model);
    report.strategy = tr.strategy;

    // S1: preparation.
    const auto* fake = std::get_if<FakeState>(&opts.strategy);
    std::vector<bool> is_fake(total, false);
    if (fake != nullptr)
        for (auto pos : choose_sample_positions(total, static_cast<std::size_t>(fake->count), rng.preparer))
            is_fake[pos] = true;

    QuantumRegister reg(d);
    std::vector<std::vector<StateRef>> holdings(n, std::vector<StateRef>(total));
    for (std::size_t t = 0; t < total; ++t) {
        const std::size_t id = reg.add_state(is_fake[t] ? fake_state(c.n, d, fake->r) : omega_state(c.n, d));
        for (std::size_t i = 0; i < n; ++i) holdings[i][t] = StateRef{id, i};
    }
    tr.log.push_back("P1 prepares " + std::to_string(total) + " omega states (N=" + std::to_string(c.N) +
                     ", q=" + std::to_string(c.q) + ")");
    if (fake != nullptr) {
        std::vector<int> positions;
        for (std::size_t t = 0; t < total; ++t)
            if (is_fake[t]) positions.push_back(static_cast<int>(t));
        tr.log.push_back("P1 substitutes (F|" + std::to_string(fake->r) + ">)^n at positions " +
                         detail::digits_string(positions));
    }

    // S2: decoy-protected distribution.
    if (!detail::transmit(reg, c, holdings, opts.strategy, rng, tr, report)) {
        detail::abort_run(out, Verdict::AbortedChannel, report, DetectionStage::Channel);
        return out;
    }

    // S3: P2..Pn sample q states and pick a basis for each.
    const auto sampled = choose_sample_positions(total, static_cast<std::size_t>(c.q), rng.parties);
    std::vector<CheckSample> samples;
    for (auto pos : sampled) {
        const Basis b = rng.parties.coin() ? Basis::Fourier : Basis::Computational;
        samples.push_back(CheckSample{pos, b, is_fake[pos]});
    }
    auto event = correlation_check(reg, holdings, samples, opts.announcement_model, rng.nature);
    event.passed = event.error_rate <= c.correlation_error_threshold;
    tr.log.push_back("correlation check on " + std::to_string(samples.size()) + " sampled states: error rate " +
                     std::to_string(event.error_rate) + (event.passed ? " (pass)" : " (abort)"));
    const bool passed = event.passed;
    tr.correlation = std::move(event);

    std::vector<bool> in_sample(total, false);
    for (auto pos : sampled) in_sample[pos] = true;
    if (fake != nullptr) {
        bool escaped = true;
        for (std::size_t t = 0; t < total; ++t)
            if (is_fake[t] && in_sample[t]) escaped = false;
        report.escaped_sampling = escaped;
    }
    if (!passed) {
        detail::abort_run(out, Verdict::AbortedCorrelation, report, DetectionStage::Correlation);
        return out;
    }

    // S4: Fourier measurement of the retained states, M_j = K_j (+) L_j.
    std::vector<std::size_t> retained;
    for (std::size_t t = 0; t < total; ++t)
        if (!in_sample[t]) retained.push_back(t);
    out.fourier_outcomes.assign(n, std::vector<int>(N));
    for (std::size_t i = 0; i < n; ++i) {
        Announcement a{static_cast<PartyId>(i + 1), std::vector<int>(N)};
        for (std::size_t t = 0; t < N; ++t) {
            const int l = reg.measure(holdings[i][retained[t]], Basis::Fourier, rng.nature);
            out.fourier_outcomes[i][t] = l;
            a.payload[t] = add_mod(secrets[i].digits[t], l, c.d);
        }
        tr.log.push_back("P" + std::to_string(i + 1) + " announces M=" + detail::digits_string(a.payload));
        tr.announcements.push_back(std::move(a));
    }

    std::vector<int> sum = compute_sum(tr.announcements, c.d);
    if (fake != nullptr) {
        bool informed = false;
        for (std::size_t t = 0; t < N; ++t) {
            if (!is_fake[retained[t]]) continue;
            informed = true;
            sum[t] = sub_mod(sum[t], c.n * fake->r, c.d);
            for (std::size_t i = 1; i < n; ++i)
                report.recovered[{static_cast<PartyId>(i + 1), static_cast<int>(t)}] =
                    attack1_extract(tr.announcements[i].payload[t], fake->r, c.d);
        }
        if (!informed) {
            // Every fake state was consumed by the check. P1 still applies her
            // extraction rule to digit 0, which now sits on a genuine state.
            for (std::size_t i = 1; i < n; ++i)
                report.recovered[{static_cast<PartyId>(i + 1), 0}] =
                    attack1_extract(tr.announcements[i].payload[0], fake->r, c.d);
        }
        report.informed = informed;
    }

    tr.verdict = Verdict::Completed;
    tr.published_sum = sum;
    tr.log.push_back("P1 publishes K=" + detail::digits_string(sum));
    out.sum = std::move(sum);
    return out;
}

inline RoundResult run_improved(const ProtocolConfig& c, const std::vector<std::vector<int>>& secrets,
                                const RunOptions& opts = {}) {
    const auto s = make_secrets(secrets);
    return run_improved(c, s, opts);
}

}  // namespace qsum
