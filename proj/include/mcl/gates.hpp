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

#include <array>
#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "mcl/qstate.hpp"
#include "mcl/rng.hpp"

namespace mcl {

enum class SymmetryClass { kAbsorbing, kChargeConserving, kUnconstrained };

enum class Axis { kX = 0, kY = 1, kZ = 2 };

inline constexpr std::array<Axis, 3> kAllAxes = {Axis::kX, Axis::kY, Axis::kZ};

inline std::string_view axis_name(Axis a) {
    switch (a) {
        case Axis::kX:
            return "x";
        case Axis::kY:
            return "y";
        case Axis::kZ:
            return "z";
    }
    return "?";
}

struct TwoQubitUnitary {
    Mat4 matrix;
    SymmetryClass symmetry_class;
};

/// One noisy qubit: R_axis(angle) applied right after a gate.
struct NoiseEvent {
    size_t qubit;
    Axis axis;
    double angle;
};

/// Diagonal symmetry generator on a two-qubit block.
struct SymmetryOperator {
    std::array<double, 4> diag;

    /// Projector onto the non-absorbing sector, diag(1, 1, 1, 0).
    static SymmetryOperator absorbing() {
        return {{1, 1, 1, 0}};
    }
    /// Pair charge, diag(0, 1, 1, 2).
    static SymmetryOperator charge() {
        return {{0, 1, 1, 2}};
    }
};

/// Haar-random element of U(N): QR of a complex Ginibre matrix with the
/// phases of R's diagonal moved into Q.
template <int N>
Eigen::Matrix<cplx, N, N> haar_unitary(Rng &rng) {
    std::normal_distribution<double> normal(0.0, std::sqrt(0.5));
    Eigen::Matrix<cplx, N, N> z;
    for (int c = 0; c < N; ++c) {
        for (int r = 0; r < N; ++r) {
            double re = normal(rng);
            double im = normal(rng);
            z(r, c) = cplx(re, im);
        }
    }
    Eigen::HouseholderQR<Eigen::Matrix<cplx, N, N>> qr(z);
    Eigen::Matrix<cplx, N, N> q = qr.householderQ();
    const auto &r = qr.matrixQR();
    for (int i = 0; i < N; ++i) {
        cplx d = r(i, i);
        double mag = std::abs(d);
        cplx phase = mag > 0 ? d / mag : cplx(1, 0);
        q.col(i) *= phase;
    }
    return q;
}

inline double uniform_phase(Rng &rng) {
    return 2 * std::numbers::pi * uniform01(rng);
}

/// Haar U(3) on {|00>, |01>, |10>} and a uniform phase on |11>.
inline TwoQubitUnitary sample_absorbing_unitary(Rng &rng) {
    Mat4 m = Mat4::Zero();
    m.topLeftCorner<3, 3>() = haar_unitary<3>(rng);
    m(3, 3) = std::polar(1.0, uniform_phase(rng));
    return {m, SymmetryClass::kAbsorbing};
}

/// diag(e^{i phi00}, Haar U(2) on {|01>, |10>}, e^{i phi11}).
inline TwoQubitUnitary sample_u1_unitary(Rng &rng) {
    Mat4 m = Mat4::Zero();
    m(0, 0) = std::polar(1.0, uniform_phase(rng));
    m.block<2, 2>(1, 1) = haar_unitary<2>(rng);
    m(3, 3) = std::polar(1.0, uniform_phase(rng));
    return {m, SymmetryClass::kChargeConserving};
}

inline TwoQubitUnitary sample_unconstrained_unitary(Rng &rng) {
    return {haar_unitary<4>(rng), SymmetryClass::kUnconstrained};
}

/// Pauli matrix in the computational basis ordered (|0>, |1>).
inline Mat2 pauli(Axis axis) {
    Mat2 m;
    switch (axis) {
        case Axis::kX:
            m << 0, 1, 1, 0;
            break;
        case Axis::kY:
            m << 0, cplx(0, -1), cplx(0, 1), 0;
            break;
        case Axis::kZ:
            m << 1, 0, 0, -1;
            break;
    }
    return m;
}

/// exp(i theta sigma / 2) = cos(theta/2) 1 + i sin(theta/2) sigma.
inline Mat2 rotation_gate(Axis axis, double theta) {
    return std::cos(theta / 2) * Mat2::Identity() + cplx(0, std::sin(theta / 2)) * pauli(axis);
}

inline void check_unit_interval(double x, const char *what) {
    if (!(x >= 0 && x <= 1)) {
        throw std::invalid_argument(std::string(what) + " must lie in [0, 1]");
    }
}

/// Draws at most one noise event for `qubit`: present with probability gamma,
/// axis uniform over {x, y, z}, angle uniform on [0, pi * theta_amp].
/// Always consumes the same number of draws so streams stay aligned across
/// parameter values.
inline bool sample_noise_event(size_t qubit, double gamma, double theta_amp, Rng &rng, NoiseEvent &out) {
    double u_hit = uniform01(rng);
    double u_axis = uniform01(rng);
    double u_angle = uniform01(rng);
    if (!(u_hit < gamma)) {
        return false;
    }
    int a = std::min(2, static_cast<int>(u_axis * 3));
    out = {qubit, static_cast<Axis>(a), std::numbers::pi * theta_amp * u_angle};
    return true;
}

/// Independent noise on every qubit of an L-qubit register.
inline std::vector<NoiseEvent> sample_noise_layer(size_t num_qubits, double gamma, double theta_amp, Rng &rng) {
    check_unit_interval(gamma, "noise rate");
    check_unit_interval(theta_amp, "noise amplitude");
    std::vector<NoiseEvent> events;
    NoiseEvent ev{};
    for (size_t q = 0; q < num_qubits; ++q) {
        if (sample_noise_event(q, gamma, theta_amp, rng, ev)) {
            events.push_back(ev);
        }
    }
    return events;
}

/// Max-entry norm of [U, diag(pi)].
inline double symmetry_residual(const Mat4 &u, const SymmetryOperator &pi) {
    double worst = 0;
    for (int r = 0; r < 4; ++r) {
        for (int c = 0; c < 4; ++c) {
            worst = std::max(worst, std::abs(u(r, c) * (pi.diag[c] - pi.diag[r])));
        }
    }
    return worst;
}

inline double symmetry_residual(const TwoQubitUnitary &u, const SymmetryOperator &pi) {
    return symmetry_residual(u.matrix, pi);
}

/// Kronecker product a (x) b; `a` acts on the left (high) digit.
inline Mat4 kron(const Mat2 &a, const Mat2 &b) {
    Mat4 m;
    for (int i = 0; i < 2; ++i) {
        for (int j = 0; j < 2; ++j) {
            m.block<2, 2>(2 * i, 2 * j) = a(i, j) * b;
        }
    }
    return m;
}

/// True if `u` passes the invariants of its declared symmetry class.
inline bool satisfies_class_invariants(const TwoQubitUnitary &u, double tol = 1e-12) {
    if (detail::unitarity_error(u.matrix) > tol) {
        return false;
    }
    switch (u.symmetry_class) {
        case SymmetryClass::kAbsorbing:
            return symmetry_residual(u, SymmetryOperator::absorbing()) <= tol &&
                   std::abs(std::abs(u.matrix(3, 3)) - 1) <= tol;
        case SymmetryClass::kChargeConserving:
            return symmetry_residual(u, SymmetryOperator::charge()) <= tol;
        case SymmetryClass::kUnconstrained:
            return true;
    }
    return false;
}

}  // namespace mcl
