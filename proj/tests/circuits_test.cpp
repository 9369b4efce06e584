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

#include "mcl/circuits.hpp"

#include <gtest/gtest.h>

#include <algorithm>

using namespace mcl;

namespace {

CircuitConfig adaptive(size_t L, double pm, double theta, uint64_t seed = 5) {
    return {Model::kAdaptive, L, 0, pm, theta, 0.5, seed};
}

CircuitConfig u1(size_t L, double pm, double theta, uint64_t seed = 5) {
    return {Model::kU1, L, 0, pm, theta, 0.5, seed};
}

void expect_identical(const TrajectoryRecord &a, const TrajectoryRecord &b) {
    ASSERT_EQ(a.q1.size(), b.q1.size());
    for (size_t t = 0; t < a.q1.size(); ++t) {
        EXPECT_EQ(a.q1[t], b.q1[t]) << "t=" << t;
        EXPECT_EQ(a.q2[t], b.q2[t]) << "t=" << t;
    }
    EXPECT_EQ(a.discarded, b.discarded);
}

}  // namespace

TEST(Circuits, config_defaults_and_validation) {
    EXPECT_EQ(adaptive(12, 0.1, 0).effective_depth(), 48u);
    EXPECT_EQ(u1(12, 0.1, 0).effective_depth(), 24u);
    CircuitConfig c = adaptive(12, 0.1, 0);
    c.depth = 7;
    EXPECT_EQ(c.effective_depth(), 7u);
    EXPECT_THROW(adaptive(1, 0.1, 0).validate(), std::invalid_argument);
    EXPECT_THROW(adaptive(4, 1.1, 0).validate(), std::invalid_argument);
    EXPECT_THROW(adaptive(4, 0.1, -1).validate(), std::invalid_argument);
    EXPECT_THROW(run_adaptive_trajectory(u1(4, 0.1, 0), 0), std::invalid_argument);
    EXPECT_THROW(build_circuit_script(adaptive(4, 0.1, 0), 0), std::invalid_argument);
}

TEST(Circuits, brickwork_schedule) {
    EXPECT_EQ(brickwork_pairs(6, 2), (std::vector<size_t>{0, 2, 4}));
    EXPECT_EQ(brickwork_pairs(6, 1), (std::vector<size_t>{1, 3}));
    EXPECT_EQ(brickwork_pairs(5, 1), (std::vector<size_t>{1, 3}));
    EXPECT_EQ(brickwork_pairs(5, 2), (std::vector<size_t>{0, 2}));
    EXPECT_EQ(brickwork_pairs(2, 1), (std::vector<size_t>{}));
}

TEST(Circuits, record_shape_and_moment_bounds) {
    auto cfg = adaptive(6, 0.3, 0.5);
    auto rec = run_adaptive_trajectory(cfg, 3);
    ASSERT_EQ(rec.q1.size(), cfg.effective_depth() + 1);
    ASSERT_EQ(rec.q2.size(), cfg.effective_depth() + 1);
    EXPECT_NEAR(rec.order_parameter(0, 6), 0, 1e-14);
    for (size_t t = 0; t < rec.q1.size(); ++t) {
        EXPECT_GE(rec.q1[t], -1e-12);
        EXPECT_LE(rec.q1[t], 6 + 1e-12);
        EXPECT_GE(rec.q2[t], rec.q1[t] * rec.q1[t] - 1e-9);
    }
    EXPECT_FALSE(rec.final_state.has_value());
    auto kept = run_adaptive_trajectory(cfg, 3, {true});
    ASSERT_TRUE(kept.final_state.has_value());
    EXPECT_LT(std::abs(kept.final_state->norm_squared() - 1), 1e-10);
}

TEST(Circuits, full_measurement_absorbs_after_one_layer) {
    auto cfg = adaptive(8, 1.0, 0.0);
    auto rec = run_adaptive_trajectory(cfg, 0, {true});
    for (size_t t = 1; t < rec.q1.size(); ++t) {
        EXPECT_NEAR(rec.order_parameter(t, 8), 1, 1e-12);
    }
    EXPECT_NEAR(std::abs((*rec.final_state)[0xFF]), 1, 1e-12);
    EXPECT_EQ(absorbing_time(rec, 8), std::optional<size_t>(1));
}

TEST(Circuits, absorbing_ray_is_invariant_under_gates) {
    Rng rng = make_rng(41);
    for (int k = 0; k < 100; ++k) {
        auto s = StateVector::basis_state(2, 0b11);
        s.apply_two_qubit(sample_absorbing_unitary(rng).matrix, 0);
        EXPECT_NEAR(std::abs(s[0b11]), 1, 1e-12);
    }
}

TEST(Circuits, full_feedback_never_lowers_order_parameter) {
    for (uint64_t i = 0; i < 20; ++i) {
        auto rec = run_adaptive_trajectory(adaptive(6, 1.0, 0.0, i), i);
        for (size_t t = 1; t < rec.q1.size(); ++t) {
            EXPECT_GE(rec.q1[t], rec.q1[t - 1] - 1e-12);
        }
    }
}

TEST(Circuits, noiseless_absorbing_phase_reaches_unity) {
    auto cfg = adaptive(12, 0.4, 0.0, 17);
    const size_t L = 12;
    double sum = 0;
    size_t count = 0;
    std::vector<size_t> times;
    for (uint64_t i = 0; i < 100; ++i) {
        auto rec = run_adaptive_trajectory(cfg, i);
        for (size_t t = 3 * L + 1; t < 4 * L; ++t) {
            sum += rec.order_parameter(t, L);
            ++count;
        }
        auto ta = absorbing_time(rec, L);
        times.push_back(ta.value_or(rec.q1.size()));
    }
    EXPECT_GE(sum / static_cast<double>(count), 0.99);
    std::nth_element(times.begin(), times.begin() + 50, times.end());
    EXPECT_LE(times[50], 2 * L);
}

TEST(Circuits, determinism) {
    auto cfg = adaptive(8, 0.3, 0.7, 99);
    expect_identical(run_adaptive_trajectory(cfg, 4), run_adaptive_trajectory(cfg, 4));
    auto other = run_adaptive_trajectory(cfg, 5);
    EXPECT_NE(other.q1, run_adaptive_trajectory(cfg, 4).q1);
    auto s1 = record_circuit_script(u1(6, 0.3, 0.4), 2);
    auto s2 = record_circuit_script(u1(6, 0.3, 0.4), 2);
    expect_identical(s1.reference, s2.reference);
    ASSERT_EQ(s1.script.measurement_count(), s2.script.measurement_count());
}

TEST(Circuits, script_replay_reproduces_reference) {
    for (double theta : {0.0, 0.6}) {
        auto cfg = u1(6, 0.3, theta, 8);
        for (uint64_t i = 0; i < 5; ++i) {
            auto recorded = record_circuit_script(cfg, i, {true});
            auto replay = replay_with_noise(recorded.script, theta, 0.5, recorded.script.seeds.noise, {true});
            expect_identical(recorded.reference, replay);
            ASSERT_TRUE(replay.final_state.has_value());
            for (size_t b = 0; b < replay.final_state->dim(); ++b) {
                ASSERT_EQ((*replay.final_state)[b], (*recorded.reference.final_state)[b]);
            }
        }
    }
}

TEST(Circuits, script_gates_conserve_charge) {
    auto script = build_circuit_script(u1(8, 0.2, 0.5), 1);
    EXPECT_EQ(script.depth(), 16u);
    for (const auto &layer : script.layers) {
        for (const auto &g : layer.gates) {
            EXPECT_LT(symmetry_residual(g.matrix, SymmetryOperator::charge()), 1e-12);
        }
    }
}

TEST(Circuits, noisy_gates_break_symmetry) {
    Rng rng = make_rng(42), noise = make_rng(43);
    int broken = 0;
    for (int k = 0; k < 200; ++k) {
        Mat4 u = sample_absorbing_unitary(rng).matrix;
        Mat4 v = detail::attach_noise(u, 0, 1.0, 0.5, noise);
        broken += symmetry_residual(v, SymmetryOperator::absorbing()) > 1e-6;
    }
    // z rotations on both qubits are diagonal and commute with the symmetry,
    // which happens with probability 1/9.
    EXPECT_NEAR(broken / 200.0, 8.0 / 9, 0.07);
}

TEST(Circuits, measurement_site_count_is_binomial) {
    const size_t L = 8;
    const double pm = 0.3;
    auto cfg = u1(L, pm, 0.0, 21);
    const int scripts = 300;
    double total = 0;
    for (int i = 0; i < scripts; ++i) {
        total += static_cast<double>(build_circuit_script(cfg, i).measurement_count());
    }
    double trials = static_cast<double>(L * cfg.effective_depth());
    double mean = total / scripts;
    double sigma = std::sqrt(trials * pm * (1 - pm) / scripts);
    EXPECT_NEAR(mean, pm * trials, 3 * sigma);
}

TEST(Circuits, noiseless_replay_sharpens_at_high_measurement_rate) {
    auto cfg = u1(8, 0.8, 0.0, 3);
    for (uint64_t i = 0; i < 10; ++i) {
        auto script = build_circuit_script(cfg, i);
        auto rec = replay_with_noise(script, 0.0, 0.5, derive_seed(3, i, Stream::kReplayNoise));
        ASSERT_FALSE(rec.discarded);
        size_t T = script.depth();
        EXPECT_LT(rec.q2[T] - rec.q1[T] * rec.q1[T], 0.05);
    }
}

TEST(Circuits, noiseless_replays_are_never_discarded) {
    auto cfg = u1(6, 0.5, 0.0, 4);
    for (uint64_t i = 0; i < 20; ++i) {
        auto script = build_circuit_script(cfg, i);
        for (uint64_t r = 0; r < 5; ++r) {
            EXPECT_FALSE(replay_with_noise(script, 0.0, 0.5, 1000 + r).discarded);
        }
    }
}

TEST(Circuits, orthogonal_forced_outcome_is_discarded) {
    // Two consecutive measurements of the same qubit with opposite outcomes.
    CircuitScript script;
    script.num_qubits = 2;
    script.layers.resize(3);
    script.layers[0].measurements.push_back({0, 1});
    script.layers[1].measurements.push_back({0, 0});
    auto rec = replay_with_noise(script, 0.0, 0.5, 1);
    EXPECT_TRUE(rec.discarded);
    EXPECT_EQ(rec.discarded_at_layer, 2u);
    EXPECT_EQ(rec.q1.size(), 2u);
    EXPECT_FALSE(rec.final_state.has_value());
}

TEST(Circuits, charge_conserving_layers_preserve_moments) {
    Rng rng = make_rng(44);
    auto s = StateVector::basis_state(8, 0b10110100);
    auto before = s.charge_moments();
    for (size_t t = 1; t <= 16; ++t) {
        for (size_t first : brickwork_pairs(8, t)) {
            s.apply_two_qubit(sample_u1_unitary(rng).matrix, first);
        }
    }
    auto after = s.charge_moments();
    EXPECT_NEAR(after.q1, before.q1, 1e-10);
    EXPECT_NEAR(after.q2, before.q2, 1e-10);
}

TEST(Circuits, absorbing_time_cases) {
    TrajectoryRecord fuzzy;
    fuzzy.q1.assign(10, 2.0);  // n = 0 at L = 4
    fuzzy.q2.assign(10, 4.0);
    EXPECT_FALSE(absorbing_time(fuzzy, 4).has_value());

    TrajectoryRecord late = fuzzy;
    late.q1[7] = late.q1[8] = late.q1[9] = 4.0;
    EXPECT_EQ(absorbing_time(late, 4), std::optional<size_t>(7));

    TrajectoryRecord relapse = late;
    relapse.q1[5] = 4.0;  // reached early but not sustained
    EXPECT_EQ(absorbing_time(relapse, 4), std::optional<size_t>(7));
}
