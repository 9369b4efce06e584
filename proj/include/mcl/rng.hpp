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

#pragma once

#include <cstdint>
#include <random>

namespace mcl {

using Rng = std::mt19937_64;

/// Named random streams. Each trajectory draws from several independent
/// streams so that changing one parameter (say the noise amplitude) does not
/// reshuffle the unitaries or the measurement schedule.
enum class Stream : uint64_t {
    kUnitaries = 1,
    kMeasurementSites = 2,
    kBornDraws = 3,
    kNoise = 4,
    kReplayNoise = 5,
};

inline uint64_t splitmix64(uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

/// Seed for (master, index, stream). Order-independent: any worker can derive
/// any trajectory's stream without touching shared state.
inline uint64_t derive_seed(uint64_t master, uint64_t index, Stream tag, uint64_t sub = 0) {
    uint64_t h = splitmix64(master);
    h = splitmix64(h ^ splitmix64(index + 0x5851F42D4C957F2DULL));
    h = splitmix64(h ^ static_cast<uint64_t>(tag));
    return splitmix64(h ^ splitmix64(sub + 0x14057B7EF767814FULL));
}

inline Rng make_rng(uint64_t seed) {
    return Rng(seed);
}

/// Uniform double on [0, 1) using the top 53 bits.
inline double uniform01(Rng &rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace mcl
