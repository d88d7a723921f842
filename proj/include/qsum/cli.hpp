#pragma once

// Command implementations behind tools/qsum.cpp: `oracle` and `demo`.
// `run` is run_scenario() from scenario.hpp.

#include <cstddef>
#include <cstdint>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "qsum/analysis.hpp"
#include "qsum/protocol.hpp"
#include "qsum/scenario.hpp"

namespace qsum::cli {

namespace detail {

inline int parse_int(const std::string& name, const std::string& text) {
    std::size_t used = 0;
    int v = 0;
    try {
        v = std::stoi(text, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used != text.size() || text.empty())
        throw std::invalid_argument(name + ": expected an integer, got '" + text + "'");
    return v;
}

inline double parse_double(const std::string& name, const std::string& text) {
    std::size_t used = 0;
    double v = 0;
    try {
        v = std::stod(text, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used != text.size() || text.empty())
        throw std::invalid_argument(name + ": expected a number, got '" + text + "'");
    return v;
}

inline void expect_args(const std::string& kind, const std::vector<std::string>& args, std::size_t count,
                        const char* usage) {
    if (args.size() != count) throw std::invalid_argument("oracle " + kind + " expects: " + usage);
}

}  // namespace detail

/// `oracle <kind> <params...>`; returns "a/b = decimal".
inline std::string oracle_command(const std::string& kind, const std::vector<std::string>& args) {
    if (kind == "escape") {
        detail::expect_args(kind, args, 2, "<N> <q>");
        const int N = detail::parse_int("N", args[0]);
        const int q = detail::parse_int("q", args[1]);
        if (N < 1 || q < 0) throw std::invalid_argument("escape needs N >= 1 and q >= 0");
        return escape_probability(N, q).render();
    }
    if (kind == "conditional_pass") {
        detail::expect_args(kind, args, 4, "<n> <d> <r> <first|adaptive>");
        const int n = detail::parse_int("n", args[0]);
        const int d = detail::parse_int("d", args[1]);
        const int r = detail::parse_int("r", args[2]);
        if (n < 3 || d < 2 || r < 0 || r >= d)
            throw std::invalid_argument("conditional_pass needs n >= 3, d >= 2, 0 <= r < d");
        checked_power(d, static_cast<std::size_t>(n));
        return conditional_pass_probability(n, d, r, parse_model(args[3])).render();
    }
    if (kind == "eve_detection") {
        detail::expect_args(kind, args, 1, "<d>");
        const int d = detail::parse_int("d", args[0]);
        if (d < 2) throw std::invalid_argument("eve_detection needs d >= 2");
        return eve_detection_probability(d).render();
    }
    throw std::invalid_argument("unknown oracle kind '" + kind + "' (expected escape, conditional_pass, eve_detection)");
}

/// Scenario for `demo <protocol> [k=v...]`. `protocol` is yy2018, improved,
/// or an attack name (attack1, attack2, fake_state, intercept_resend) which
/// selects its target protocol.
inline ScenarioFile demo_scenario(const std::string& protocol, const std::vector<std::string>& kv) {
    ScenarioFile s;
    s.name = "demo";
    s.config.N = 4;
    s.config.q = 8;
    s.config.seed = 1;
    std::string attack = "honest";
    if (protocol == "yy2018" || protocol == "improved") {
        s.protocol = parse_protocol(protocol);
    } else if (protocol == "attack1" || protocol == "attack2") {
        s.protocol = ProtocolKind::YY2018;
        attack = protocol;
    } else if (protocol == "fake_state" || protocol == "intercept_resend") {
        s.protocol = ProtocolKind::Improved;
        attack = protocol;
    } else {
        throw std::invalid_argument("unknown demo protocol '" + protocol + "'");
    }

    std::map<std::string, std::string> opts;
    for (const auto& item : kv) {
        const auto eq = item.find('=');
        if (eq == std::string::npos || eq == 0) throw std::invalid_argument("demo option '" + item + "' is not k=v");
        opts[item.substr(0, eq)] = item.substr(eq + 1);
    }
    Attack2 a2;
    FakeState fake;
    InterceptResend eve;
    for (const auto& [key, value] : opts) {
        if (key == "n") s.config.n = detail::parse_int(key, value);
        else if (key == "d") s.config.d = detail::parse_int(key, value);
        else if (key == "N") s.config.N = detail::parse_int(key, value);
        else if (key == "q") s.config.q = detail::parse_int(key, value);
        else if (key == "decoys") s.config.decoys_per_channel = detail::parse_int(key, value);
        else if (key == "seed") s.config.seed = std::stoull(value);
        else if (key == "attack") attack = value;
        else if (key == "party") a2.party = detail::parse_int(key, value);
        else if (key == "digit") a2.digit = detail::parse_int(key, value);
        else if (key == "r") fake.r = detail::parse_int(key, value);
        else if (key == "count") fake.count = detail::parse_int(key, value);
        else if (key == "fraction") eve.fraction = detail::parse_double(key, value);
        else if (key == "model") s.model = parse_model(value);
        else if (key == "secrets") {
            // "3,9;4,8;5,7": one comma-separated string per party
            std::vector<std::vector<int>> rows;
            std::stringstream all(value);
            std::string row;
            while (std::getline(all, row, ';')) {
                std::vector<int> digits;
                std::stringstream rs(row);
                std::string digit;
                while (std::getline(rs, digit, ',')) digits.push_back(detail::parse_int("secrets", digit));
                rows.push_back(std::move(digits));
            }
            s.secrets = std::move(rows);
        } else {
            throw std::invalid_argument("unknown demo option '" + key + "'");
        }
    }
    if (attack == "honest") s.attack = Honest{};
    else if (attack == "attack1") s.attack = Attack1{};
    else if (attack == "attack2") s.attack = a2;
    else if (attack == "fake_state") s.attack = fake;
    else if (attack == "intercept_resend") s.attack = eve;
    else throw std::invalid_argument("unknown attack '" + attack + "'");
    if (s.protocol == ProtocolKind::YY2018 && !opts.contains("q")) s.config.q = 0;

    if (auto v = scenario_violations(s); !v.empty()) throw ConfigError(std::move(v));
    return s;
}

inline std::string render_demo(const ScenarioFile& s) {
    const auto rec = execute_run(s, 0);
    const auto& tr = rec.result.transcript;
    const auto& adv = rec.result.adversary;
    const auto& c = s.config;
    const auto digits = [](const std::vector<int>& v) { return qsum::detail::digits_string(v); };

    std::ostringstream os;
    os << "== " << to_string(s.protocol) << " (n=" << c.n << ", d=" << c.d << ", N=" << c.N;
    if (s.protocol == ProtocolKind::Improved) os << ", q=" << c.q << ", model=" << to_string(s.model);
    os << ", strategy=" << tr.strategy << ", seed=" << c.seed << ")\n";
    os << "private strings:\n";
    for (std::size_t i = 0; i < rec.secrets.size(); ++i) os << "  P" << i + 1 << " K=" << digits(rec.secrets[i]) << '\n';
    os << "steps:\n";
    for (std::size_t i = 0; i < tr.log.size(); ++i) os << "  " << i + 1 << ". " << tr.log[i] << '\n';
    if (tr.correlation) {
        os << "correlation check samples:\n";
        for (const auto& sample : tr.correlation->samples)
            os << "  state " << sample.state_index << ' ' << to_string(sample.basis) << " announced "
               << digits(sample.announced) << (sample.passed ? " pass" : " FAIL") << '\n';
    }
    os << "verdict: " << to_string(tr.verdict) << '\n';
    if (tr.published_sum) {
        os << "published sum: " << digits(*tr.published_sum)
           << "  (true sum " << digits(digitwise_sum(rec.secrets, c.d)) << ")\n";
    }
    if (!adv.recovered.empty() || adv.detected || !adv.eavesdropper.empty()) {
        os << "adversary (" << adv.strategy << "):\n";
        for (const auto& [key, guess] : adv.recovered)
            os << "  P" << key.first << " digit " << key.second << ": guessed " << guess << ", actual "
               << rec.secrets[static_cast<std::size_t>(key.first - 1)][static_cast<std::size_t>(key.second)] << '\n';
        if (adv.correct_fraction) os << "  correct fraction " << format_decimal(*adv.correct_fraction) << '\n';
        if (!adv.eavesdropper.empty()) os << "  eavesdropper measured " << adv.eavesdropper.size() << " qudits\n";
        os << "  detected: " << (adv.detected ? "yes" : "no");
        if (adv.detection_stage) os << " (" << to_string(*adv.detection_stage) << ")";
        os << '\n';
    }
    return os.str();
}

}  // namespace qsum::cli
