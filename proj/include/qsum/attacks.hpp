#pragma once

// Whole-run attack drivers. Each executes the target protocol with the
// corresponding P1 strategy and scores the attacker's guesses against the
// true secrets.

#include <cstddef>
#include <span>
#include <vector>

#include "qsum/adversary.hpp"
#include "qsum/protocol.hpp"

namespace qsum {

struct AttackOutcome {
    RoundResult round;
    AdversaryReport report;  // round.adversary with correct_fraction filled in
};

namespace detail {
inline AttackOutcome scored(RoundResult round, std::span<const SecretString> secrets) {
    std::vector<std::vector<int>> digits;
    for (const auto& s : secrets) digits.push_back(s.digits);
    AdversaryReport report = round.adversary;
    report.correct_fraction = score_recovered(report, digits);
    return {std::move(round), std::move(report)};
}
}  // namespace detail

/// P1 collapses every omega state and sends F^dagger|r> components against YY2018.
inline AttackOutcome attack1_run(const ProtocolConfig& c, std::span<const SecretString> secrets) {
    return detail::scored(run_yy2018(c, secrets, RunOptions{Attack1{}}), secrets);
}

/// P1 steals digit `digit` of party `party` against YY2018.
inline AttackOutcome attack2_run(const ProtocolConfig& c, std::span<const SecretString> secrets, PartyId party,
                                 int digit) {
    return detail::scored(run_yy2018(c, secrets, RunOptions{Attack2{party, digit}}), secrets);
}

/// One fake (F|r>)^n state among N+q against the improved protocol.
inline AttackOutcome fake_state_attack_run(const ProtocolConfig& c, std::span<const SecretString> secrets, int r,
                                           AnnouncementModel model, int count = 1) {
    return detail::scored(run_improved(c, secrets, RunOptions{FakeState{r, count}, model}), secrets);
}

/// Attack 2 checked on the exact joint distribution: for every victim digit
/// k and every support point of the measured attack state, the extraction
/// should return k.
struct SupportCheck {
    std::size_t points = 0;
    std::size_t correct = 0;
    std::size_t cases = 0;          // victim digits tried
    std::size_t cases_correct = 0;  // digits with extraction exact on all points
};

inline SupportCheck attack2_support_check(int n, Dimension d) {
    SupportCheck result;
    const auto F = fourier_transform(d);
    for (int k = 0; k < d.value(); ++k) {
        auto state = apply_single(attack2_state(n, d), 0, shift_operator(k, d) * F);
        const auto dist = outcome_distribution(state, Basis::Computational);
        bool all = true;
        for (const auto& tuple : dist.support()) {
            const std::span<const int> held(tuple.data() + 1, tuple.size() - 1);
            const bool ok = attack2_extract(tuple[0], held, d) == k;
            ++result.points;
            if (ok) ++result.correct;
            all = all && ok;
        }
        ++result.cases;
        if (all) ++result.cases_correct;
    }
    return result;
}

}  // namespace qsum
