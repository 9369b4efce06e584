// Copyright 2026 The MCL Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "mcl/ensemble.hpp"

#include <gtest/gtest.h>

#include "test_util.hpp"

using namespace mcl;
using mcl::testing::dense_mixture;
using mcl::testing::random_state;

namespace {

CircuitConfig adaptive(size_t L, double pm, double theta, uint64_t seed = 9) {
    return {Model::kAdaptive, L, 0, pm, theta, 0.5, seed};
}

CircuitConfig u1(size_t L, double pm, double theta, uint64_t seed = 9) {
    return {Model::kU1, L, 0, pm, theta, 0.5, seed};
}

}  // namespace

TEST(Purity, examples) {
    auto a = StateVector::plus_state(3);
    std::vector<StateVector> same(5, a);
    EXPECT_NEAR(purity_from_overlaps(same), 1, 1e-14);
    std::vector<StateVector> orth = {StateVector::basis_state(2, 1), StateVector::basis_state(2, 2)};
    EXPECT_NEAR(purity_from_overlaps(orth), 0.5, 1e-15);
    EXPECT_THROW(purity_from_overlaps(std::vector<StateVector>{}), std::invalid_argument);
    std::vector<StateVector> mixed = {StateVector(2), StateVector(3)};
    EXPECT_THROW(purity_from_overlaps(mixed), std::invalid_argument);
}

TEST(Purity, matches_dense_density_matrix) {
    Rng rng = make_rng(51);
    std::vector<StateVector> states;
    for (int i = 0; i < 20; ++i) {
        states.push_back(random_state(4, rng));
    }
    EXPECT_NEAR(purity_from_overlaps(states), dense_mixture(states).purity, 1e-10);
}

TEST(Purity, bounded_by_one_over_n_and_one) {
    Rng rng = make_rng(52);
    for (size_t n = 1; n <= 12; ++n) {
        std::vector<StateVector> states;
        for (size_t i = 0; i < n; ++i) {
            states.push_back(random_state(3, rng));
        }
        double p = purity_from_overlaps(states);
        EXPECT_GE(p, 1.0 / static_cast<double>(n) - 1e-12);
        EXPECT_LE(p, 1 + 1e-12);
    }
    // Global phases do not make a state distinct.
    auto s = random_state(3, rng);
    std::vector<cplx> amps(s.amplitudes().begin(), s.amplitudes().end());
    for (auto &x : amps) {
        x *= std::polar(1.0, 0.7);
    }
    std::vector<StateVector> pair = {s, StateVector::from_amplitudes(3, amps)};
    EXPECT_NEAR(purity_from_overlaps(pair), 1, 1e-14);
}

TEST(Histogram, examples) {
    std::vector<double> zeros(50, 0.0);
    auto h = fluctuation_histogram(zeros, 20);
    EXPECT_EQ(h.counts[0], 50u);
    EXPECT_DOUBLE_EQ(h.mass[0], 1.0);
    EXPECT_EQ(h.peak_bin(), 0u);

    std::vector<double> uniform;
    Rng rng = make_rng(53);
    for (int i = 0; i < 100000; ++i) {
        uniform.push_back(uniform01(rng));
    }
    auto u = fluctuation_histogram(uniform, 20);
    double width = u.bin_width();
    for (size_t b = 0; b + 1 < u.bins(); ++b) {  // last bin is 1% shorter in effective support
        EXPECT_NEAR(u.mass[b], width, 4 * std::sqrt(width / 100000));
    }
    double total = 0;
    for (double m : u.mass) {
        total += m;
    }
    EXPECT_NEAR(total, 1, 1e-12);
    EXPECT_DOUBLE_EQ(u.bin_left(0), 0);
    EXPECT_DOUBLE_EQ(u.bin_right(19), u.hi);
    EXPECT_THROW(fluctuation_histogram(zeros, 0), std::invalid_argument);
}

TEST(Histogram, nominal_range) {
    std::vector<double> v = {0.1, 0.2};
    auto h = fluctuation_histogram(v, 10, 3.0);
    EXPECT_DOUBLE_EQ(h.hi, 3.03);
    auto g = fluctuation_histogram(std::vector<double>{5.0}, 10, 3.0);
    EXPECT_DOUBLE_EQ(g.hi, 5.05);
    EXPECT_EQ(g.counts[9], 1u);
}

TEST(AdaptiveEnsemble, full_measurement) {
    auto r = adaptive_ensemble(adaptive(6, 1.0, 0.0), 10);
    for (size_t t = 1; t < r.n_bar.size(); ++t) {
        EXPECT_NEAR(r.n_bar[t], 1, 1e-12);
        EXPECT_NEAR(r.fluct[t], 0, 1e-9);
    }
    EXPECT_THROW(adaptive_ensemble(adaptive(6, 1.0, 0.0), 1), std::invalid_argument);
    EXPECT_THROW(adaptive_ensemble(u1(6, 1.0, 0.0), 4), std::invalid_argument);
}

TEST(AdaptiveEnsemble, fuzzy_limit_fluctuations) {
    for (double theta : {0.0, 1.0}) {
        auto r = adaptive_ensemble(adaptive(8, 0.0, theta), 200);
        EXPECT_NEAR(r.steady_fluct_scaled(), 1, 0.1) << theta;
    }
}

TEST(AdaptiveEnsemble, linearity_and_mixing) {
    auto cfg = adaptive(6, 0.2, 0.5);
    auto r = adaptive_ensemble(cfg, 30);
    EXPECT_EQ(r.meta.window_begin, 19u);
    EXPECT_EQ(r.meta.window_end, 23u);
    for (size_t t = 0; t < r.n_bar.size(); ++t) {
        double s = 0;
        for (uint64_t i = 0; i < 30; ++i) {
            s += run_adaptive_trajectory(cfg, i).q1[t];
        }
        // Same summation order as the ensemble, so the match is exact.
        EXPECT_EQ(r.n_bar[t], 2 * (s / 30) / 6 - 1);
        EXPECT_GE(r.fluct[t], r.mean_variance[t] - 1e-9);
        EXPECT_GE(r.n_bar[t], -1 - 1e-12);
        EXPECT_LE(r.n_bar[t], 1 + 1e-12);
        EXPECT_GE(r.fluct[t], -1e-9);
    }
}

TEST(AdaptiveEnsemble, worker_count_independence) {
    auto cfg = adaptive(6, 0.3, 0.8);
    auto a = adaptive_ensemble(cfg, 40, {1, false});
    auto b = adaptive_ensemble(cfg, 40, {4, false});
    EXPECT_EQ(a.n_bar, b.n_bar);
    EXPECT_EQ(a.fluct, b.fluct);
    auto c = u1_ensemble(u1(6, 0.3, 0.5), 6, 4, {1, false});
    auto d = u1_ensemble(u1(6, 0.3, 0.5), 6, 4, {3, false});
    EXPECT_EQ(c.fluct, d.fluct);
    EXPECT_EQ(c.script_purity, d.script_purity);
}

TEST(AdaptiveEnsemble, matches_dense_density_matrix) {
    for (uint64_t seed = 0; seed < 5; ++seed) {
        for (size_t L : {4, 6}) {
            auto cfg = adaptive(L, 0.1 + 0.15 * static_cast<double>(seed), 0.2 * static_cast<double>(seed), seed);
            auto r = adaptive_ensemble(cfg, 20, {1, true});
            auto d = dense_mixture(r.final_states);
            size_t T = r.n_bar.size() - 1;
            EXPECT_NEAR(r.n_bar[T], 2 * d.q1 / static_cast<double>(L) - 1, 1e-10);
            EXPECT_NEAR(r.fluct[T], d.q2 - d.q1 * d.q1, 1e-10);
            EXPECT_NEAR(purity_from_overlaps(r.final_states), d.purity, 1e-10);
        }
    }
}

TEST(U1Ensemble, noiseless_scripts_stay_pure) {
    for (double pm : {0.1, 0.8}) {
        auto r = u1_ensemble(u1(6, pm, 0.0), 5, 3);
        EXPECT_NEAR(*r.purity, 1, 1e-10);
        EXPECT_EQ(r.meta.discarded, 0u);
    }
}

TEST(U1Ensemble, fuzzy_limit_fluctuations) {
    for (double theta : {0.0, 0.7}) {
        auto r = u1_ensemble(u1(8, 0.0, theta), 20, 4);
        EXPECT_NEAR(r.steady_fluct_scaled(), 1, 0.1) << theta;
    }
}

TEST(U1Ensemble, noiseless_high_rate_is_sharp) {
    auto r = u1_ensemble(u1(8, 0.8, 0.0), 20, 2);
    EXPECT_LT(r.steady_fluct, 0.05 * 2);
}

TEST(U1Ensemble, matches_dense_density_matrix) {
    for (uint64_t seed = 0; seed < 5; ++seed) {
        auto cfg = u1(4, 0.1 + 0.15 * static_cast<double>(seed), 0.2 * static_cast<double>(seed + 1), seed);
        auto r = u1_ensemble(cfg, 3, 10, {1, true});
        ASSERT_EQ(r.script_states.size(), r.script_fluct.size());
        double fluct = 0, purity = 0;
        for (size_t s = 0; s < r.script_states.size(); ++s) {
            auto d = dense_mixture(r.script_states[s]);
            EXPECT_NEAR(r.script_fluct[s], d.q2 - d.q1 * d.q1, 1e-10);
            EXPECT_NEAR(r.script_purity[s], d.purity, 1e-10);
            fluct += d.q2 - d.q1 * d.q1;
            purity += d.purity;
        }
        double n = static_cast<double>(r.script_states.size());
        EXPECT_NEAR(r.steady_fluct, fluct / n, 1e-10);
        EXPECT_NEAR(*r.purity, purity / n, 1e-10);
    }
}

TEST(U1Ensemble, invariants) {
    auto r = u1_ensemble(u1(6, 0.3, 0.6), 10, 5);
    size_t total = 0;
    for (size_t c : r.histogram->counts) {
        total += c;
    }
    EXPECT_EQ(total, r.meta.scripts - r.meta.dropped_scripts);
    EXPECT_GE(*r.purity, 1.0 / 5 - 1e-9);
    EXPECT_LE(*r.purity, 1 + 1e-9);
    for (size_t t = 0; t < r.fluct.size(); ++t) {
        EXPECT_GE(r.fluct[t], r.mean_variance[t] - 1e-9);
        EXPECT_GE(r.n_bar[t], -1 - 1e-12);
        EXPECT_LE(r.n_bar[t], 1 + 1e-12);
    }
    EXPECT_THROW(u1_ensemble(u1(6, 0.3, 0.6), 0, 5), std::invalid_argument);
    EXPECT_THROW(u1_ensemble(u1(6, 0.3, 0.6), 2, 1), std::invalid_argument);
}

TEST(Sweep, single_cell_equals_single_ensemble) {
    std::vector<double> pm = {0.3}, th = {0.5};
    SweepCounts counts{20, 4, 3, 0, 0.5};
    auto rows = sweep_grid(Model::kAdaptive, 6, pm, th, counts, 9);
    ASSERT_EQ(rows.size(), 1u);
    auto single = adaptive_ensemble(adaptive(6, 0.3, 0.5), 20);
    EXPECT_EQ(rows[0].result.n_bar, single.n_bar);
    auto urows = sweep_grid(Model::kU1, 6, pm, th, counts, 9);
    auto usingle = u1_ensemble(u1(6, 0.3, 0.5), 4, 3);
    EXPECT_EQ(urows[0].result.fluct, usingle.fluct);
    EXPECT_THROW(sweep_grid(Model::kU1, 6, std::vector<double>{}, th, counts, 9), std::invalid_argument);
}

TEST(Sweep, grid_order_and_noise_trend) {
    std::vector<double> pm = {0.05, 0.2}, th = {0.0, 1.0};
    SweepCounts counts{100, 0, 0, 0, 0.5};
    auto rows = sweep_grid(Model::kAdaptive, 8, pm, th, counts, 9);
    ASSERT_EQ(rows.size(), 4u);
    EXPECT_EQ(rows[1].p_m, 0.05);
    EXPECT_EQ(rows[1].theta, 1.0);
    EXPECT_EQ(rows[2].p_m, 0.2);
    EXPECT_GT(rows[2].result.steady_n, rows[3].result.steady_n);
}
