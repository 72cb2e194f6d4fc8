#include <cmath>
#include <numeric>
#include <random>
#include <vector>

#include "catmon/errors.hpp"
#include "catmon/local_monitor.hpp"
#include "doctest.h"

using namespace catmon;

namespace {

// Generic multinomial log-likelihood; the LRT oracle maximizes it at n / N.
double multinomial_loglik(std::span<const int> n, std::span<const double> pi) {
    double l = 0.0;
    for (std::size_t j = 0; j < n.size(); ++j) {
        if (n[j] > 0) l += n[j] * std::log(pi[j]);
    }
    return l;
}

}  // namespace

TEST_CASE("init_state") {
    const StreamSpec a(0, NominalSpec({0.5, 0.5}));
    const auto s = init_state(a, 100);
    CHECK(s.w == std::vector<double>{50.0, 50.0});
    CHECK(s.k == 0);
    const StreamSpec b(1, NominalSpec({0.3, 0.4, 0.3}));
    const auto t = init_state(b, 100);
    CHECK(t.w[0] == doctest::Approx(30.0));
    CHECK(t.w[1] == doctest::Approx(40.0));
    CHECK(std::accumulate(t.w.begin(), t.w.end(), 0.0) == doctest::Approx(100.0).epsilon(1e-12));
    CHECK(smoothed_stat(t, b, 100) == 0.0);
    CHECK_THROWS_AS(init_state(a, 0), DomainError);
}

TEST_CASE("ewma_update") {
    EwmaState s{{50.0, 50.0}, 0};
    const std::vector<int> n{60, 40};
    const auto u = ewma_update(s, n, 0.1);
    CHECK(u.w[0] == doctest::Approx(51.0));
    CHECK(u.w[1] == doctest::Approx(49.0));
    CHECK(u.k == 1);
    const auto full = ewma_update(s, n, 1.0);
    CHECK(full.w == std::vector<double>{60.0, 40.0});
    CHECK_THROWS_AS(ewma_update(s, std::vector<int>{1, 2, 97}, 0.1), DimensionMismatch);
    CHECK_THROWS_AS(ewma_update(s, n, 0.0), DomainError);
    CHECK_THROWS_AS(ewma_update(s, n, 1.5), DomainError);
}

TEST_CASE("mass conservation and positivity over 1e6 updates") {
    const StreamSpec spec(0, NominalSpec({0.2, 0.3, 0.1, 0.4}));
    const int n_size = 100;
    const double lambda = 0.1;
    auto state = init_state(spec, n_size);
    Rng rng(RngSeed{99, 0});
    const MultinomialSampler sampler(n_size, spec.pi0());
    std::vector<int> counts(4);
    double min_ratio = 1.0;
    for (int k = 0; k < 1000000; ++k) {
        sampler.sample(rng, counts);
        ewma_update_in_place(state, counts, lambda);
        for (int j = 0; j < 4; ++j) min_ratio = std::min(min_ratio, state.w[j]);
    }
    CHECK(std::fabs(std::accumulate(state.w.begin(), state.w.end(), 0.0) - n_size) < 1e-9);
    CHECK(min_ratio > 0.0);
    CHECK(state.k == 1000000);
}

TEST_CASE("raw_lrt_nominal") {
    const NominalSpec half({0.5, 0.5});
    CHECK(raw_lrt_nominal(std::vector<int>{50, 50}, half, 100) == 0.0);
    CHECK(std::fabs(raw_lrt_nominal(std::vector<int>{60, 40}, half, 100) - 4.0271027101377747) < 1e-12);
    CHECK(std::fabs(raw_lrt_nominal(std::vector<int>{100, 0}, half, 100) - 138.62943611198906) < 1e-10);
    const NominalSpec tri({0.3, 0.4, 0.3});
    CHECK(std::fabs(raw_lrt_nominal(std::vector<int>{30, 40, 30}, tri, 100)) < 1e-12);
}

TEST_CASE("raw_lrt_nominal equals the multinomial likelihood-ratio oracle") {
    std::mt19937_64 gen(17);
    for (int t = 0; t < 1000; ++t) {
        const int h = 2 + static_cast<int>(gen() % 6);
        std::vector<double> pi(h);
        double total = 0.0;
        for (auto& v : pi) total += (v = std::uniform_real_distribution<double>(0.05, 1.0)(gen));
        for (auto& v : pi) v /= total;
        const int n_size = 1 + static_cast<int>(gen() % 200);
        Rng rng(RngSeed{static_cast<std::uint64_t>(t), 3});
        const auto n = multinomial_sample(rng, n_size, pi);
        std::vector<double> mle(h);
        for (int j = 0; j < h; ++j) mle[j] = static_cast<double>(n[j]) / n_size;
        const double oracle = 2.0 * (multinomial_loglik(n, mle) - multinomial_loglik(n, pi));
        CHECK(std::fabs(raw_lrt_nominal(n, NominalSpec(pi), n_size) - oracle) < 1e-10);
    }
}

TEST_CASE("raw_lrt_ordinal") {
    const auto spec = OrdinalSpec::from_cutpoints({-1.0, 0.2, 0.8});
    const std::vector<int> n{10, 40, 25, 25};
    // brute-force alpha' Lambda alpha from the module's alpha and an explicit double sum
    const auto alpha = spec.scores();
    const auto pi = spec.pi0();
    double brute = 0.0;
    for (int r = 0; r < 4; ++r)
        for (int c = 0; c < 4; ++c) brute += alpha[r] * ((r == c ? pi[r] : 0.0) - pi[r] * pi[c]) * alpha[c];
    CHECK(std::fabs(brute - 0.86717320281753444) < 1e-12);
    CHECK(std::fabs(spec.score_variance() - brute) < 1e-13);
    double dot = 0.0;
    for (int j = 0; j < 4; ++j) dot += alpha[j] * n[j];
    CHECK(std::fabs(dot - 16.886799625081835) < 1e-9);
    CHECK(std::fabs(raw_lrt_ordinal(n, spec, 100) - 3.2884318917044138) < 1e-9);

    // a centered sample (alpha' n = 0) for the binary stream
    const auto bin = OrdinalSpec::from_probabilities({0.5, 0.5});
    CHECK(raw_lrt_ordinal(std::vector<int>{50, 50}, bin, 100) == doctest::Approx(0.0));
}

TEST_CASE("ordinal statistic invariant to score rescaling") {
    const auto spec = OrdinalSpec::from_cutpoints({-1.0, 0.2, 0.8});
    const std::vector<int> n{12, 35, 28, 25};
    for (double c : {2.0, -3.5, 0.01}) {
        std::vector<double> scaled(spec.scores().begin(), spec.scores().end());
        for (auto& a : scaled) a *= c;
        const auto lam = lambda_matrix(spec.pi0());
        double dot = 0.0, quad = 0.0;
        for (int r = 0; r < 4; ++r) {
            dot += scaled[r] * n[r];
            for (int k = 0; k < 4; ++k) quad += scaled[r] * lam[r * 4 + k] * scaled[k];
        }
        CHECK(dot * dot / (100 * quad) == doctest::Approx(raw_lrt_ordinal(n, spec, 100)).epsilon(1e-12));
    }
}

TEST_CASE("smoothed_stat") {
    const StreamSpec half(0, NominalSpec({0.5, 0.5}));
    EwmaState s{{51.0, 49.0}, 1};
    CHECK(std::fabs(smoothed_stat(s, half, 100) - 0.040002667093424785) < 1e-13);

    const StreamSpec ord(1, OrdinalSpec::from_cutpoints({-1.0, 0.2, 0.8}));
    auto base = init_state(ord, 100);
    CHECK(smoothed_stat(base, ord, 100) == doctest::Approx(0.0).epsilon(1e-20));
    double prev = -1.0;
    for (double eps = 0.0; eps <= 2.0; eps += 0.25) {
        EwmaState moved = base;
        for (int j = 0; j < 4; ++j) moved.w[j] += eps * ord.ordinal().scores()[j];
        const double a = smoothed_stat(moved, ord, 100);
        CHECK(a > prev);
        prev = a;
    }
}

TEST_CASE("normalize") {
    CHECK(normalize(0.0, 1, 0.1) == kScoreClamp);
    CHECK(normalize(1e6, 3, 0.1) == 1.0 - kScoreClamp);
    CHECK(std::fabs(normalize(0.040002667093424785, 1, 0.1) - 0.61668733542636947) < 1e-12);
    CHECK(std::fabs(normalize(3.841459, 1, 1.0) - 0.95000000534680423) < 1e-10);
}
