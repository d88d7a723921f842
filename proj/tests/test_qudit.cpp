#include <gtest/gtest.h>

#include <cmath>
#include <complex>
#include <numbers>
#include <sstream>
#include <vector>

#include "naive_oracle.hpp"
#include "qsum/qudit.hpp"
#include "qsum/random.hpp"

using namespace qsum;

namespace {

constexpr double kTol = 1e-9;

void expect_close(Amplitude a, Amplitude b, double tol = kTol) {
    EXPECT_NEAR(a.real(), b.real(), tol);
    EXPECT_NEAR(a.imag(), b.imag(), tol);
}

void expect_unitary(const SingleQuditUnitary& m) {
    const int d = m.dim();
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) {
            Amplitude acc{};
            for (int k = 0; k < d; ++k) acc += m(i, k) * std::conj(m(j, k));
            expect_close(acc, i == j ? 1.0 : 0.0);
        }
}

PureState random_state(Dimension d, std::size_t sites, Sampler& rng) {
    std::vector<Amplitude> amps(checked_power(d, sites));
    double norm = 0;
    for (auto& a : amps) {
        a = {rng.uniform() - 0.5, rng.uniform() - 0.5};
        norm += std::norm(a);
    }
    for (auto& a : amps) a /= std::sqrt(norm);
    return PureState(d, sites, std::move(amps));
}

}  // namespace

TEST(Dimension, RejectsBelowTwo) {
    EXPECT_THROW(Dimension(1), std::invalid_argument);
    EXPECT_THROW(Dimension(0), std::invalid_argument);
    EXPECT_EQ(Dimension(6).value(), 6);  // composite d is fine
}

TEST(FourierTransform, QubitIsHadamard) {
    const auto F = fourier_transform(Dimension(2));
    const double h = 1 / std::sqrt(2.0);
    expect_close(F(0, 0), h);
    expect_close(F(0, 1), h);
    expect_close(F(1, 0), h);
    expect_close(F(1, 1), -h);
}

TEST(FourierTransform, QutritEntry21) {
    const auto F = fourier_transform(Dimension(3));
    expect_close(F(2, 1), std::exp(Amplitude(0, 4 * std::numbers::pi / 3)) / std::sqrt(3.0));
}

TEST(FourierTransform, MatchesTextbookMatrix) {
    for (int d = 2; d <= 9; ++d) {
        const auto F = fourier_transform(Dimension(d));
        const auto ref = naive::dft(d);
        for (int l = 0; l < d; ++l)
            for (int r = 0; r < d; ++r) expect_close(F(l, r), ref[l][r]);
    }
}

TEST(ShiftOperator, FiveLevelShiftByTwo) {
    const Dimension d(5);
    const std::vector<int> three{3};
    const auto s = apply_single(PureState::basis_state(d, three), 0, shift_operator(2, d));
    const std::vector<int> zero{0};
    expect_close(s.amplitude(zero), 1.0);
}

TEST(ShiftOperator, ZeroIsIdentity) {
    const auto U = shift_operator(0, Dimension(4));
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) expect_close(U(i, j), i == j ? 1.0 : 0.0);
}

TEST(ShiftOperator, RejectsOutOfRange) {
    EXPECT_THROW(shift_operator(5, Dimension(5)), std::out_of_range);
    EXPECT_THROW(shift_operator(-1, Dimension(5)), std::out_of_range);
}

TEST(Unitarity, FourierAndShiftUpTo16) {
    for (int d = 2; d <= 16; ++d) {
        expect_unitary(fourier_transform(Dimension(d)));
        for (int k = 0; k < d; ++k) expect_unitary(shift_operator(k, Dimension(d)));
    }
}

TEST(Unitarity, ConstructorRejectsNonUnitary) {
    std::vector<Amplitude> m{1.0, 1.0, 0.0, 1.0};
    EXPECT_THROW(SingleQuditUnitary(Dimension(2), m), std::invalid_argument);
}

TEST(OmegaState, BellPair) {
    const auto s = omega_state(2, Dimension(2));
    const double h = 1 / std::sqrt(2.0);
    expect_close(s[0], h);
    expect_close(s[1], 0.0);
    expect_close(s[2], 0.0);
    expect_close(s[3], h);
}

TEST(OmegaState, ThreeQutrits) {
    const auto s = omega_state(3, Dimension(3));
    const std::vector<int> ones{1, 1, 1}, mixed{0, 1, 2};
    expect_close(s.amplitude(ones), 1 / std::sqrt(3.0));
    expect_close(s.amplitude(mixed), 0.0);
}

TEST(OmegaState, SizeGuard) {
    EXPECT_THROW(omega_state(23, Dimension(2)), std::length_error);
    EXPECT_THROW(omega_state(12, Dimension(5)), std::length_error);
    EXPECT_NO_THROW(omega_state(22, Dimension(2)));
}

TEST(ApplySingle, FourierThenInverseRestores) {
    Sampler rng(7);
    for (int d = 2; d <= 5; ++d) {
        const auto s = random_state(Dimension(d), 3, rng);
        const auto F = fourier_transform(Dimension(d));
        for (std::size_t site = 0; site < 3; ++site) {
            const auto back = apply_single(apply_single(s, site, F), site, F.adjoint());
            for (std::size_t i = 0; i < s.size(); ++i) expect_close(back[i], s[i]);
        }
    }
}

TEST(ApplySingle, ShiftChangesOneDigit) {
    const Dimension d(7);
    const std::vector<int> digits{1, 4, 6};
    for (std::size_t site = 0; site < 3; ++site)
        for (int k = 0; k < 7; ++k) {
            const auto s = apply_single(PureState::basis_state(d, digits), site, shift_operator(k, d));
            auto expected = digits;
            expected[site] = (expected[site] + k) % 7;
            expect_close(s.amplitude(expected), 1.0);
        }
}

TEST(ApplySingle, FourierOnBothHalvesOfBellPairMatchesMatrixProduct) {
    const Dimension d(2);
    auto s = omega_state(2, d);
    const auto F = fourier_transform(d);
    s = apply_single(apply_single(s, 0, F), 1, F);

    const auto H = naive::dft(2);
    const auto expected = naive::apply(naive::kron(H, H), naive::omega(2, 2));
    for (std::size_t i = 0; i < 4; ++i) expect_close(s[i], expected[i]);
    const double h = 1 / std::sqrt(2.0);
    expect_close(s[0], h);
    expect_close(s[3], h);
}

TEST(ApplySingle, AgreesWithKroneckerOracleOnRandomStates) {
    Sampler rng(11);
    for (int d = 2; d <= 4; ++d)
        for (std::size_t site = 0; site < 3; ++site) {
            const auto s = random_state(Dimension(d), 3, rng);
            const int k = static_cast<int>(rng.below(d));
            const auto op = shift_operator(k, Dimension(d)) * fourier_transform(Dimension(d));
            const auto got = apply_single(s, site, op);

            std::vector<naive::Mat> factors(3, naive::identity(d));
            factors[site] = naive::mul(naive::shift(k, d), naive::dft(d));
            naive::Vec v(s.amplitudes().begin(), s.amplitudes().end());
            const auto ref = naive::apply(naive::kron_all(factors), v);
            for (std::size_t i = 0; i < ref.size(); ++i) expect_close(got[i], ref[i]);
        }
}

TEST(ApplySingle, RejectsSiteOrDimensionMismatch) {
    const auto s = omega_state(3, Dimension(3));
    EXPECT_THROW(apply_single(s, 3, fourier_transform(Dimension(3))), std::out_of_range);
    EXPECT_THROW(apply_single(s, 0, fourier_transform(Dimension(2))), std::invalid_argument);
}

TEST(Measure, OmegaComputationalCollapsesToRepeatedDigit) {
    const auto s = omega_state(3, Dimension(3));
    const auto probs = site_probabilities(s, 0);
    for (double p : probs) EXPECT_NEAR(p, 1.0 / 3, kTol);
    Sampler rng(3);
    for (int trial = 0; trial < 30; ++trial) {
        const auto [rec, post] = measure_site(s, 0, Basis::Computational, rng);
        const std::vector<int> rrr(3, rec.outcome);
        expect_close(post.amplitude(rrr), 1.0);
        EXPECT_NEAR(post.norm_squared(), 1.0, kTol);
    }
}

TEST(Measure, FourierEigenstateIsDeterministic) {
    const Dimension d(5);
    const std::vector<int> zero{0};
    const auto s = apply_single(PureState::basis_state(d, zero), 0, fourier_transform(d));
    const auto dist = outcome_distribution(s, Basis::Fourier);
    EXPECT_NEAR(dist.at(zero), 1.0, kTol);
    Sampler rng(5);
    for (int trial = 0; trial < 20; ++trial) EXPECT_EQ(measure_site(s, 0, Basis::Fourier, rng).first.outcome, 0);
}

TEST(Measure, QubitZeroInFourierIsFair) {
    const Dimension d(2);
    const std::vector<int> zero{0}, one{1};
    const auto dist = outcome_distribution(PureState::basis_state(d, zero), Basis::Fourier);
    EXPECT_NEAR(dist.at(zero), 0.5, kTol);
    EXPECT_NEAR(dist.at(one), 0.5, kTol);
}

TEST(Measure, RepeatedMeasurementIsStable) {
    Sampler rng(17);
    for (int d = 2; d <= 5; ++d)
        for (Basis b : {Basis::Computational, Basis::Fourier}) {
            const auto s = random_state(Dimension(d), 3, rng);
            for (std::size_t site = 0; site < 3; ++site) {
                const auto [first, post] = measure_site(s, site, b, rng);
                for (int again = 0; again < 5; ++again) {
                    const auto [second, post2] = measure_site(post, site, b, rng);
                    EXPECT_EQ(second.outcome, first.outcome);
                    EXPECT_NEAR(post2.norm_squared(), 1.0, kTol);
                }
            }
        }
}

TEST(Measure, ProjectOntoZeroProbabilityThrows) {
    const auto s = omega_state(3, Dimension(2));
    const auto [p, post] = project_site(s, 0, 1);
    EXPECT_NEAR(p, 0.5, kTol);
    EXPECT_THROW(project_site(post, 1, 0), std::logic_error);
}

TEST(Measure, SamplingMatchesDistributionWithinFiveSigma) {
    const Dimension d(3);
    const auto F = fourier_transform(d);
    auto s = omega_state(2, d);
    s = apply_single(s, 0, shift_operator(1, d) * F);  // uneven marginal in both bases
    s = apply_single(s, 1, F);
    for (Basis b : {Basis::Computational, Basis::Fourier}) {
        const auto exact = outcome_distribution(s, b);
        std::vector<double> marginal(3, 0.0);
        for (std::size_t i = 0; i < exact.size(); ++i) marginal[static_cast<std::size_t>(exact.outcome(i)[0])] += exact[i];
        Sampler rng(2024);
        constexpr int T = 100000;
        std::vector<int> counts(3, 0);
        for (int t = 0; t < T; ++t) ++counts[static_cast<std::size_t>(measure_site(s, 0, b, rng).first.outcome)];
        for (int v = 0; v < 3; ++v) {
            const double p = marginal[static_cast<std::size_t>(v)];
            const double se = std::sqrt(p * (1 - p) / T);
            EXPECT_NEAR(counts[static_cast<std::size_t>(v)] / static_cast<double>(T), p, 5 * se + 1e-12)
                << "basis " << to_string(b) << " value " << v;
        }
    }
}

TEST(OutcomeDistribution, OmegaFourierIsEvenParity) {
    const auto dist = outcome_distribution(omega_state(3, Dimension(2)), Basis::Fourier);
    for (std::size_t i = 0; i < dist.size(); ++i) {
        const auto t = dist.outcome(i);
        const bool even = (t[0] + t[1] + t[2]) % 2 == 0;
        EXPECT_NEAR(dist[i], even ? 0.25 : 0.0, kTol);
    }
}

TEST(OutcomeDistribution, OmegaComputationalIsRepeatedDigit) {
    const auto dist = outcome_distribution(omega_state(3, Dimension(2)), Basis::Computational);
    const std::vector<int> zeros{0, 0, 0}, ones{1, 1, 1};
    EXPECT_NEAR(dist.at(zeros), 0.5, kTol);
    EXPECT_NEAR(dist.at(ones), 0.5, kTol);
    EXPECT_EQ(dist.support().size(), 2u);
}

TEST(OutcomeDistribution, FourierProductIsUniformComputationally) {
    const Dimension d(2);
    const std::vector<int> ones{1, 1};
    const auto F = fourier_transform(d);
    const auto s = apply_single(apply_single(PureState::basis_state(d, ones), 0, F), 1, F);
    const auto dist = outcome_distribution(s, Basis::Computational);
    for (std::size_t i = 0; i < 4; ++i) EXPECT_NEAR(dist[i], 0.25, kTol);
}

TEST(OutcomeDistribution, MixedBasesMatchKroneckerOracle) {
    const int d = 3;
    const auto s = omega_state(3, Dimension(d));
    const std::vector<Basis> bases{Basis::Fourier, Basis::Computational, Basis::Fourier};
    const auto dist = outcome_distribution(s, bases);
    const auto Fd = naive::adjoint(naive::dft(d));
    const auto ref = naive::probabilities(
        naive::apply(naive::kron_all({Fd, naive::identity(d), Fd}), naive::omega(3, d)));
    for (std::size_t i = 0; i < ref.size(); ++i) EXPECT_NEAR(dist[i], ref[i], kTol);
    EXPECT_NEAR(dist.total(), 1.0, kTol);
}

TEST(Properties, DecompositionIdentity) {
    for (int n = 2; n <= 5; ++n)
        for (int d = 2; d <= 5; ++d) {
            const Dimension dim(d);
            auto s = omega_state(n, dim);
            const auto Fdag = fourier_transform(dim).adjoint();
            for (std::size_t site = 0; site < s.sites(); ++site) s = apply_single(s, site, Fdag);
            const double shell = std::pow(static_cast<double>(d), -(n - 1) / 2.0);
            for (std::size_t i = 0; i < s.size(); ++i) {
                int sum = 0;
                for (int digit : to_digits(i, d, s.sites())) sum += digit;
                expect_close(s[i], sum % d == 0 ? shell : 0.0);
            }
        }
}

TEST(Properties, EncodeUndoesInverseFourier) {
    for (int d = 2; d <= 7; ++d) {
        const Dimension dim(d);
        const auto F = fourier_transform(dim);
        for (int k = 0; k < d; ++k)
            for (int r = 0; r < d; ++r) {
                const std::vector<int> rv{r};
                auto s = apply_single(PureState::basis_state(dim, rv), 0, F.adjoint());
                s = apply_single(s, 0, shift_operator(k, dim) * F);
                const std::vector<int> expected{(k + r) % d};
                expect_close(s.amplitude(expected), 1.0);
            }
    }
}

TEST(Properties, OperationsPreserveNorm) {
    Sampler rng(99);
    for (int d = 2; d <= 6; ++d) {
        auto s = random_state(Dimension(d), 3, rng);
        for (int step = 0; step < 20; ++step) {
            const auto site = static_cast<std::size_t>(rng.below(3));
            if (rng.coin()) {
                s = apply_single(s, site, shift_operator(static_cast<int>(rng.below(d)), Dimension(d)) *
                                              fourier_transform(Dimension(d)));
            } else {
                s = measure_site(s, site, rng.coin() ? Basis::Fourier : Basis::Computational, rng).second;
            }
            EXPECT_NEAR(s.norm_squared(), 1.0, kTol);
        }
    }
}

TEST(PureState, RejectsUnnormalizedOrWrongLength) {
    EXPECT_THROW(PureState(Dimension(2), 2, std::vector<Amplitude>{1.0, 1.0, 0.0, 0.0}), std::invalid_argument);
    EXPECT_THROW(PureState(Dimension(2), 2, std::vector<Amplitude>{1.0, 0.0, 0.0}), std::invalid_argument);
    EXPECT_THROW(PureState(Dimension(2), 1, std::vector<Amplitude>{std::nan(""), 0.0}), std::invalid_argument);
}

TEST(PureState, DumpFormat) {
    std::ostringstream os;
    dump(os, omega_state(2, Dimension(2)));
    std::istringstream in(os.str());
    std::string line;
    std::vector<std::string> lines;
    while (std::getline(in, line)) lines.push_back(line);
    ASSERT_EQ(lines.size(), 4u);
    EXPECT_EQ(lines[0].rfind("0(00) ", 0), 0u);
    EXPECT_EQ(lines[3].rfind("3(11) ", 0), 0u);
}

TEST(TotalVariation, IdenticalIsZero) {
    const auto a = outcome_distribution(omega_state(3, Dimension(3)), Basis::Fourier);
    EXPECT_NEAR(total_variation(a, a), 0.0, kTol);
    const auto b = outcome_distribution(omega_state(3, Dimension(3)), Basis::Computational);
    EXPECT_GT(total_variation(a, b), 0.5);
}
