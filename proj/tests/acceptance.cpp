// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <iterator>
#include <sstream>
#include <string>
#include <vector>

#include "naive_oracle.hpp"
#include "qsum/analysis.hpp"
#include "qsum/attacks.hpp"
#include "qsum/scenario.hpp"

using namespace qsum;

namespace {

struct Outcome {
    bool pass = true;
    std::string detail;
};

ProtocolConfig config(int n, int d, int N, int q, std::uint64_t seed = 0) {
    ProtocolConfig c;
    c.n = n;
    c.d = d;
    c.N = N;
    c.q = q;
    c.seed = seed;
    return c;
}

std::vector<std::vector<int>> secrets_for(const ProtocolConfig& c, std::uint64_t seed) {
    Sampler rng(seed, Stream::Secrets);
    return random_secrets(c, rng);
}

std::string fmt(double x) {
    std::ostringstream os;
    os.precision(6);
    os << x;
    return os.str();
}

std::string estimate_text(const MonteCarloEstimate& e, double oracle) {
    const double z = e.std_error > 0 ? (e.point - oracle) / e.std_error : 0.0;
    return fmt(e.point) + " +- " + fmt(e.std_error) + " vs " + fmt(oracle) + " (z=" + fmt(z) + ")";
}

// 1. Honest correctness of both protocols.
Outcome protocol_correctness() {
    int runs = 0, failures = 0;
    for (int n : {3, 4})
        for (int d : {2, 3, 5})
            for (int N = 1; N <= 6; ++N)
                for (std::uint64_t seed = 0; seed < 100; ++seed) {
                    const auto c = config(n, d, N, N, seed);
                    const auto k = secrets_for(c, seed);
                    const auto expected = digitwise_sum(k, d);
                    auto yy = c;
                    yy.q = 0;
                    const auto a = run_yy2018(yy, k);
                    const auto b = run_improved(c, k);
                    runs += 2;
                    if (!a.sum || *a.sum != expected) ++failures;
                    if (!b.sum || *b.sum != expected) ++failures;
                }
    return {failures == 0, std::to_string(runs) + " runs, " + std::to_string(failures) + " failures"};
}

// 2. Fourier-product amplitudes of omega sit on the sum-zero shell.
Outcome decomposition() {
    double worst = 0;
    int configs = 0;
    for (int n = 2; n <= 5; ++n)
        for (int d = 2; d <= 5; ++d) {
            const Dimension dim(d);
            auto s = omega_state(n, dim);
            const auto Fdag = fourier_transform(dim).adjoint();
            for (std::size_t site = 0; site < s.sites(); ++site) s = apply_single(s, site, Fdag);
            const double shell = std::pow(static_cast<double>(d), -(n - 1) / 2.0);
            for (std::size_t i = 0; i < s.size(); ++i) {
                int sum = 0;
                for (int digit : naive::digits_of(i, d, n)) sum += digit;
                worst = std::max(worst, std::abs(s[i] - Amplitude(sum % d == 0 ? shell : 0.0)));
            }
            ++configs;
        }
    return {worst < 1e-9, std::to_string(configs) + " (n,d) pairs, max deviation " + fmt(worst)};
}

// 3. Attack 1 recovers everything, undetected, sum intact.
Outcome attack1_reproduction() {
    int runs = 0, bad = 0;
    for (int n : {3, 4})
        for (int d : {2, 5, 10})
            for (int N = 1; N <= 6; ++N)
                for (std::uint64_t seed = 0; seed < 20; ++seed) {
                    const auto c = config(n, d, N, 0, seed);
                    const auto k = make_secrets(secrets_for(c, seed));
                    const auto out = attack1_run(c, k);
                    std::vector<std::vector<int>> digits;
                    for (const auto& s : k) digits.push_back(s.digits);
                    ++runs;
                    const bool ok = out.round.transcript.verdict == Verdict::Completed && !out.report.detected &&
                                    out.report.correct_fraction == 1.0 &&
                                    out.report.recovered.size() == static_cast<std::size_t>((n - 1) * N) &&
                                    out.round.sum && *out.round.sum == digitwise_sum(digits, d);
                    if (!ok) ++bad;
                }
    return {bad == 0, std::to_string(runs) + " runs, " + std::to_string(bad) + " with incomplete recovery or detection"};
}

// 4. Attack 2 extraction on every support point.
Outcome attack2_reproduction() {
    std::size_t points = 0, wrong = 0;
    for (int d : {2, 3, 5}) {
        const auto res = attack2_support_check(3, Dimension(d));
        points += res.points;
        wrong += res.points - res.correct;
        // independent: full-matrix construction of the encoded stolen state
        const int n = 3;
        const auto stolen =
            naive::apply(naive::kron_all({naive::identity(d), naive::dft(d), naive::dft(d)}), naive::omega(n, d));
        for (int k = 0; k < d; ++k) {
            const auto enc = naive::kron_all({naive::mul(naive::shift(k, d), naive::dft(d)), naive::identity(d),
                                              naive::identity(d)});
            const auto probs = naive::probabilities(naive::apply(enc, stolen));
            for (std::size_t i = 0; i < probs.size(); ++i) {
                if (probs[i] < 1e-12) continue;
                const auto t = naive::digits_of(i, d, n);
                const std::vector<int> held{t[1], t[2]};
                ++points;
                if (attack2_extract(t[0], held, d) != k) ++wrong;
            }
        }
    }
    return {wrong == 0 && points > 0, std::to_string(points) + " support points, " + std::to_string(wrong) + " wrong"};
}

// 5. Escape probability: exact identity and Monte Carlo.
Outcome escape() {
    std::size_t mismatches = 0, pairs = 0;
    for (int N = 1; N <= 100; ++N)
        for (int q = 0; q <= 1000; ++q) {
            ++pairs;
            const auto v = escape_probability(N, q).value();
            if (v != Rational(N, N + q) || v != escape_probability_binomial(N, q).value()) ++mismatches;
        }
    Experiment e;
    e.scenario = ScenarioKind::FakeStateEscape;
    e.config = config(3, 2, 10, 30);
    e.strategy = FakeState{};
    const auto est = monte_carlo(e, 100000, 2025);
    const bool ok = mismatches == 0 && escape_probability(10, 30).fraction() == "1/4" && est.agrees_with(0.25, 5.0);
    return {ok, std::to_string(pairs) + " (N,q) pairs exact, MC " + estimate_text(est, 0.25)};
}

// 6. Conditional pass probability of a sampled fake state.
Outcome conditional_pass() {
    bool ok = true;
    std::string detail;
    for (int d : {2, 3, 5, 7}) {
        const auto oracle = conditional_pass_probability(3, d, 0, AnnouncementModel::P1LastAdaptive);
        const Rational reference = Rational(1, 2) + Rational(1, 2 * d);
        Experiment e;
        e.scenario = ScenarioKind::ConditionalPass;
        e.config = config(3, d, 1, 0);
        e.strategy = FakeState{};
        e.model = AnnouncementModel::P1LastAdaptive;
        const auto est = monte_carlo(e, 100000, 600 + static_cast<std::uint64_t>(d));
        const bool this_ok = oracle.value() == reference && est.agrees_with(oracle.to_double(), 5.0);
        ok = ok && this_ok;
        detail += "d=" + std::to_string(d) + " " + oracle.fraction() + " MC " + fmt(est.point) + "; ";
    }
    // n = 4: enumeration deviates from the closed form and the report says so.
    ScenarioFile s;
    s.name = "n4_flag";
    s.protocol = ProtocolKind::Improved;
    s.config = config(4, 2, 10, 30, 6);
    s.attack = FakeState{};
    s.model = AnnouncementModel::P1LastAdaptive;
    s.trials = 400;
    const auto cmp = run_scenario(s).aggregate["oracle_comparisons"][1];
    const bool flagged = cmp["quantity"] == "fake_state_conditional_pass" && !cmp["matches_reference"].get<bool>();
    ok = ok && flagged;
    detail += "n=4 oracle " + cmp["oracle"]["fraction"].get<std::string>() + " vs reference " +
              cmp["reference_constant"]["fraction"].get<std::string>() + (flagged ? " (flagged)" : " (NOT flagged)");
    return {ok, detail};
}

// 7. Sampled fake states are caught or useless.
Outcome defense() {
    std::size_t cases = 0, wrong = 0;
    for (int n : {3, 4, 5})
        for (int d = 2; d <= 7; ++d)
            for (int r = 0; r < d; ++r) {
                if ((n * r) % d == 0) continue;
                ++cases;
                const auto state = attack1_product_state(n, Dimension(d), r);
                if (truthful_pass_probability(state, Basis::Fourier).value() != 0) ++wrong;
                for (std::uint64_t seed = 0; seed < 5; ++seed) {
                    QuantumRegister reg{Dimension(d)};
                    const auto id = reg.add_state(state);
                    std::vector<std::vector<StateRef>> holdings;
                    for (int i = 0; i < n; ++i) holdings.push_back({StateRef{id, static_cast<std::size_t>(i)}});
                    const CheckSample sample{0, Basis::Fourier};
                    Sampler nature(seed);
                    if (correlation_check(reg, holdings, std::span(&sample, 1), AnnouncementModel::P1First, nature)
                            .samples[0]
                            .passed)
                        ++wrong;
                }
            }
    bool ok = wrong == 0;
    std::string detail = std::to_string(cases) + " (n,d,r) cases with n*r != 0 always fail; blind guesses";
    for (int d : {2, 5}) {
        Experiment e;
        e.scenario = ScenarioKind::FakeStateBlindGuess;
        e.config = config(3, d, 10, 30);
        e.strategy = FakeState{};
        e.model = AnnouncementModel::P1LastAdaptive;
        const auto est = monte_carlo(e, 10000, 700 + static_cast<std::uint64_t>(d));
        ok = ok && est.agrees_with(1.0 / d, 5.0);
        detail += " d=" + std::to_string(d) + ": " + estimate_text(est, 1.0 / d) + " over " + std::to_string(est.trials);
    }
    return {ok, detail};
}

// 8. Encode-then-measure equals measure-then-add.
Outcome equivalence() {
    double worst = 0, worst_oracle = 0;
    int tuples = 0;
    Sampler rng(8);
    for (int n = 2; n <= 4; ++n)
        for (int d = 2; d <= 5; ++d)
            for (int trial = 0; trial < 20; ++trial) {
                std::vector<int> k(static_cast<std::size_t>(n));
                for (auto& x : k) x = rng.below(d);
                const auto [a, b] = encode_equivalence_probe(Dimension(d), n, k);
                worst = std::max(worst, total_variation(a, b));
                std::vector<naive::Mat> ops;
                for (int x : k) ops.push_back(naive::mul(naive::shift(x, d), naive::dft(d)));
                const auto ref = naive::probabilities(naive::apply(naive::kron_all(ops), naive::omega(n, d)));
                double tv = 0;
                for (std::size_t i = 0; i < ref.size(); ++i) tv += std::abs(ref[i] - b[i]);
                worst_oracle = std::max(worst_oracle, tv / 2);
                ++tuples;
            }
    return {worst < 1e-9 && worst_oracle < 1e-9,
            std::to_string(tuples) + " k-tuples, max TV " + fmt(worst) + ", vs matrix oracle " + fmt(worst_oracle)};
}

// 9. Intercept-resend detection per decoy.
Outcome eavesdropper() {
    bool ok = true;
    std::string detail;
    for (int d : {2, 3, 4, 5}) {
        const auto exact = eve_detection_probability(d);
        Experiment e;
        e.scenario = ScenarioKind::EveDetection;
        e.config = config(3, d, 1, 0);
        const auto est = monte_carlo(e, 100000, 900 + static_cast<std::uint64_t>(d));
        const double oracle = (d - 1) / (2.0 * d);
        ok = ok && exact.value() == Rational(d - 1, 2 * d) && est.agrees_with(oracle, 5.0);
        detail += "d=" + std::to_string(d) + " " + exact.fraction() + " MC " + fmt(est.point) + "; ";
    }
    return {ok, detail};
}

// 10. Same scenario and seed, same bytes.
Outcome determinism() {
    int scenarios = 0, differ = 0;
    for (const char* f : {"honest_improved.json", "attack1_yy2018.json", "attack2_yy2018.json", "fake_state.json",
                          "intercept_resend.json"}) {
        std::ifstream in(std::string(QSUM_SCENARIO_DIR) + "/" + f);
        auto s = parse_scenario({std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()});
        s.trials = std::min<std::uint64_t>(s.trials, 300);
        s.transcripts = true;
        const auto first = run_scenario(s, 1).str();
        if (first != run_scenario(s, 1).str() || first != run_scenario(s, 3).str()) ++differ;
        ++scenarios;
    }
    return {differ == 0, std::to_string(scenarios) + " scenarios re-run (1 and 3 workers), " + std::to_string(differ) +
                             " differ"};
}

}  // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"protocol correctness", protocol_correctness},
        {"omega Fourier decomposition", decomposition},
        {"attack 1 reproduction", attack1_reproduction},
        {"attack 2 reproduction", attack2_reproduction},
        {"escape probability", escape},
        {"conditional pass probability", conditional_pass},
        {"improved-protocol defense", defense},
        {"encode/measure equivalence", equivalence},
        {"eavesdropper baseline", eavesdropper},
        {"determinism", determinism},
    };
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const auto start = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        if (!o.pass) ++failed;
        std::cout << (o.pass ? "PASS" : "FAIL") << "  [" << i + 1 << "] " << criteria[i].first << ": " << o.detail
                  << " (" << fmt(secs) << " s)" << std::endl;
    }
    std::cout << (failed == 0 ? "all criteria passed" : std::to_string(failed) + " criteria failed") << std::endl;
    return failed == 0 ? 0 : 1;
}
