#pragma once

#include <cmath>

#include "ptm/model.hpp"

namespace fixtures {

using ptm::Complex;

inline ptm::ModelParams params(double N, double Delta = 0.05) {
    ptm::ModelParams p;
    p.N = N;
    p.Delta = Delta;
    return p;
}

/// Two channels with opposite forces and a purely imaginary coupling.
inline ptm::ObjectSystem benchmark() {
    ptm::ObjectSystem s;
    s.lambdas.resize(2);
    s.lambdas << 1, -1;
    s.H = ptm::CMatrix::Zero(2, 2);
    s.H(1, 0) = Complex(0, 0.1);
    s.H(0, 1) = Complex(0, -0.1);
    s.C.resize(2);
    s.C << 1 / std::sqrt(2.0), 1 / std::sqrt(2.0);
    return s;
}

/// Three channels, generic complex couplings, zero diagonal.
inline ptm::ObjectSystem three_channel() {
    ptm::ObjectSystem s;
    s.lambdas.resize(3);
    s.lambdas << 2, 1, -1;
    s.H = ptm::CMatrix::Zero(3, 3);
    s.H(0, 1) = 0.1;
    s.H(0, 2) = Complex(0, 0.05);
    s.H(1, 2) = 0.08;
    s.H(1, 0) = std::conj(s.H(0, 1));
    s.H(2, 0) = std::conj(s.H(0, 2));
    s.H(2, 1) = std::conj(s.H(1, 2));
    s.C = ptm::CVector::Constant(3, 1 / std::sqrt(3.0));
    return s;
}

/// Three well separated channels with an object Hamiltonian diagonal in the
/// measured basis.
inline ptm::ObjectSystem commuting_three_channel() {
    ptm::ObjectSystem s;
    s.lambdas.resize(3);
    s.lambdas << 4, 0, -4;
    s.H = ptm::CMatrix::Zero(3, 3);
    s.H(0, 0) = 0.3;
    s.H(1, 1) = -0.2;
    s.H(2, 2) = 0.5;
    s.C.resize(3);
    s.C << 0.6, Complex(0, 0.48), 0.64;
    return s;
}

}  // namespace fixtures
