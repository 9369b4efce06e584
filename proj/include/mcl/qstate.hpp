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

#include <bit>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace mcl {

using cplx = std::complex<double>;
using Mat2 = Eigen::Matrix2cd;
using Mat4 = Eigen::Matrix4cd;

/// Projected branch whose Born probability is too small to renormalize.
struct ZeroBranchError : std::runtime_error {
    ZeroBranchError(size_t qubit, int outcome, double prob)
        : std::runtime_error("zero-probability branch: qubit " + std::to_string(qubit) + " outcome " +
                             std::to_string(outcome) + " has probability " + std::to_string(prob)),
          qubit(qubit),
          outcome(outcome),
          probability(prob) {
    }
    size_t qubit;
    int outcome;
    double probability;
};

/// Forced outcomes below this probability are treated as zero branches.
inline constexpr double kZeroBranchThreshold = 1e-12;
/// Born-sampled outcomes below this probability signal a degenerate branch.
inline constexpr double kDegenerateBranchThreshold = 1e-14;

enum class GateCheck { kNone, kUnitary };

struct ChargeMoments {
    double q1 = 0;  // <Q>
    double q2 = 0;  // <Q^2>
    double variance() const {
        return q2 - q1 * q1;
    }
};

struct MeasureResult {
    int outcome;
    double probability;
};

namespace detail {

/// Neumaier-compensated accumulator.
class CompensatedSum {
   public:
    void add(double x) {
        double t = sum_ + x;
        if (std::abs(sum_) >= std::abs(x)) {
            comp_ += (sum_ - t) + x;
        } else {
            comp_ += (x - t) + sum_;
        }
        sum_ = t;
    }
    double value() const {
        return sum_ + comp_;
    }

   private:
    double sum_ = 0;
    double comp_ = 0;
};

/// Plain partial sums over short runs, folded into a compensated total. Keeps
/// the inner loop branch-light while bounding error growth on long vectors.
class ChunkedSum {
   public:
    void add(double x) {
        part_ += x;
        if (++count_ == kChunk) {
            flush();
        }
    }
    double value() {
        flush();
        return total_.value();
    }

   private:
    static constexpr int kChunk = 64;
    void flush() {
        total_.add(part_);
        part_ = 0;
        count_ = 0;
    }
    CompensatedSum total_;
    double part_ = 0;
    int count_ = 0;
};

template <typename M>
double unitarity_error(const M &m) {
    auto d = (m.adjoint() * m - M::Identity(m.rows(), m.cols())).eval();
    return d.cwiseAbs().maxCoeff();
}

}  // namespace detail

/// Dense pure state over L qubits. Qubit j is bit j of the amplitude index and
/// a set bit means the qubit is in |1>, so the charge of a basis state is its
/// popcount.
class StateVector {
   public:
    static constexpr size_t kMaxQubits = 30;

    /// |00...0>.
    explicit StateVector(size_t num_qubits) : num_qubits_(num_qubits) {
        if (num_qubits == 0 || num_qubits > kMaxQubits) {
            throw std::invalid_argument("StateVector: qubit count must be in [1, 30]");
        }
        amps_.assign(size_t{1} << num_qubits, cplx{0, 0});
        amps_[0] = 1;
    }

    static StateVector basis_state(size_t num_qubits, uint64_t bits) {
        StateVector s(num_qubits);
        if (bits >= s.dim()) {
            throw std::out_of_range("basis_state: bit pattern exceeds 2^L");
        }
        s.amps_[0] = 0;
        s.amps_[bits] = 1;
        return s;
    }

    /// Product of |+> on every qubit.
    static StateVector plus_state(size_t num_qubits) {
        StateVector s(num_qubits);
        double a = 1.0 / std::sqrt(static_cast<double>(s.dim()));
        for (auto &x : s.amps_) {
            x = a;
        }
        return s;
    }

    /// Takes ownership of `amps`; rejects wrong lengths and non-normalized input.
    static StateVector from_amplitudes(size_t num_qubits, std::vector<cplx> amps) {
        StateVector s(num_qubits);
        if (amps.size() != s.dim()) {
            throw std::invalid_argument("from_amplitudes: length must be 2^L");
        }
        s.amps_ = std::move(amps);
        if (std::abs(s.norm_squared() - 1) > 1e-10) {
            throw std::invalid_argument("from_amplitudes: state is not normalized");
        }
        return s;
    }

    size_t num_qubits() const {
        return num_qubits_;
    }
    size_t dim() const {
        return amps_.size();
    }
    std::span<const cplx> amplitudes() const {
        return amps_;
    }
    cplx operator[](size_t i) const {
        return amps_[i];
    }

    double norm_squared() const {
        detail::ChunkedSum acc;
        for (const auto &a : amps_) {
            acc.add(std::norm(a));
        }
        return acc.value();
    }

    void apply_single_qubit(const Mat2 &gate, size_t target, GateCheck check = GateCheck::kNone) {
        check_qubit(target);
        if (check == GateCheck::kUnitary && detail::unitarity_error(gate) > 1e-10) {
            throw std::invalid_argument("apply_single_qubit: gate is not unitary");
        }
        const cplx g00 = gate(0, 0), g01 = gate(0, 1), g10 = gate(1, 0), g11 = gate(1, 1);
        const size_t stride = size_t{1} << target;
        const size_t n = dim();
        for (size_t hi = 0; hi < n; hi += 2 * stride) {
            for (size_t i = hi; i < hi + stride; ++i) {
                cplx a0 = amps_[i];
                cplx a1 = amps_[i + stride];
                amps_[i] = g00 * a0 + g01 * a1;
                amps_[i + stride] = g10 * a0 + g11 * a1;
            }
        }
    }

    /// Applies `gate` to the adjacent pair (first, first + 1). The gate's basis
    /// is {|00>, |01>, |10>, |11>} with qubit `first` as the left (high) digit.
    void apply_two_qubit(const Mat4 &gate, size_t first, GateCheck check = GateCheck::kNone) {
        if (first + 1 >= num_qubits_) {
            throw std::out_of_range("apply_two_qubit: pair (" + std::to_string(first) + ", " +
                                    std::to_string(first + 1) + ") out of range");
        }
        if (check == GateCheck::kUnitary && detail::unitarity_error(gate) > 1e-10) {
            throw std::invalid_argument("apply_two_qubit: gate is not unitary");
        }
        cplx g[4][4];
        for (int r = 0; r < 4; ++r) {
            for (int c = 0; c < 4; ++c) {
                g[r][c] = gate(r, c);
            }
        }
        const size_t lo = size_t{1} << first;   // bit of qubit `first`
        const size_t hi = lo << 1;              // bit of qubit `first + 1`
        const size_t n = dim();
        const size_t block = 4 * lo;
        for (size_t outer = 0; outer < n; outer += block) {
            for (size_t i = outer; i < outer + lo; ++i) {
                // local index 2*bit(first) + bit(first+1)
                const size_t idx[4] = {i, i + hi, i + lo, i + lo + hi};
                cplx a[4] = {amps_[idx[0]], amps_[idx[1]], amps_[idx[2]], amps_[idx[3]]};
                for (int r = 0; r < 4; ++r) {
                    amps_[idx[r]] = g[r][0] * a[0] + g[r][1] * a[1] + g[r][2] * a[2] + g[r][3] * a[3];
                }
            }
        }
    }

    /// Born probability that `target` reads 1.
    double probability_one(size_t target) const {
        check_qubit(target);
        const size_t stride = size_t{1} << target;
        detail::ChunkedSum acc;
        const size_t n = dim();
        for (size_t hi = stride; hi < n; hi += 2 * stride) {
            for (size_t i = hi; i < hi + stride; ++i) {
                acc.add(std::norm(amps_[i]));
            }
        }
        return acc.value();
    }

    /// Born-rule measurement in the computational basis. The outcome is 1 iff
    /// `uniform_draw` < P(1). Throws ZeroBranchError if the selected branch is
    /// degenerate, which a draw in [0, 1) cannot select for a normalized state.
    MeasureResult measure_qubit(size_t target, double uniform_draw) {
        double p1 = probability_one(target);
        int outcome = uniform_draw < p1 ? 1 : 0;
        double prob = outcome ? p1 : 1 - p1;
        if (prob < kDegenerateBranchThreshold) {
            throw ZeroBranchError(target, outcome, prob);
        }
        project(target, outcome, prob);
        return {outcome, prob};
    }

    /// Projects onto a prescribed outcome and renormalizes. Returns the Born
    /// probability of that outcome; throws ZeroBranchError below 1e-12.
    double force_outcome(size_t target, int outcome) {
        if (outcome != 0 && outcome != 1) {
            throw std::invalid_argument("force_outcome: outcome must be 0 or 1");
        }
        double p1 = probability_one(target);
        double prob = outcome ? p1 : 1 - p1;
        if (prob < kZeroBranchThreshold) {
            throw ZeroBranchError(target, outcome, prob);
        }
        project(target, outcome, prob);
        return prob;
    }

    ChargeMoments charge_moments() const {
        detail::ChunkedSum s1, s2;
        const size_t n = dim();
        for (size_t b = 0; b < n; ++b) {
            double w = std::norm(amps_[b]);
            double c = std::popcount(b);
            s1.add(w * c);
            s2.add(w * c * c);
        }
        return {s1.value(), s2.value()};
    }

   private:
    void check_qubit(size_t q) const {
        if (q >= num_qubits_) {
            throw std::out_of_range("qubit index " + std::to_string(q) + " out of range for L=" +
                                    std::to_string(num_qubits_));
        }
    }

    void project(size_t target, int outcome, double prob) {
        const size_t stride = size_t{1} << target;
        const double scale = 1.0 / std::sqrt(prob);
        const size_t n = dim();
        const size_t kill = outcome ? 0 : stride;
        const size_t keep = outcome ? stride : 0;
        for (size_t hi = 0; hi < n; hi += 2 * stride) {
            for (size_t i = hi; i < hi + stride; ++i) {
                amps_[i + kill] = 0;
                amps_[i + keep] *= scale;
            }
        }
    }

    size_t num_qubits_;
    std::vector<cplx> amps_;
};

/// <a|b>.
inline cplx overlap(const StateVector &a, const StateVector &b) {
    if (a.num_qubits() != b.num_qubits()) {
        throw std::invalid_argument("overlap: qubit count mismatch");
    }
    auto x = a.amplitudes();
    auto y = b.amplitudes();
    detail::CompensatedSum re, im;
    for (size_t i = 0; i < x.size(); ++i) {
        cplx t = std::conj(x[i]) * y[i];
        re.add(t.real());
        im.add(t.imag());
    }
    return {re.value(), im.value()};
}

}  // namespace mcl
