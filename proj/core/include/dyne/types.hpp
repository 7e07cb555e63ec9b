#pragma once

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include <cstdint>
#include <stdexcept>
#include <string>

namespace dyne {

using Index = Eigen::Index;
using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using SpMat = Eigen::SparseMatrix<double>;
using SpVec = Eigen::SparseVector<double>;
using Triplet = Eigen::Triplet<double>;

// Eigen 3.4 sparse matrices have no move operations, so "moving" one deep
// copies the buffers. Types that own large sparse members declare their move
// operations with these swaps to keep transfers O(1).
#define DYNE_MOVE_BY_SWAP(Type)                                                       \
    Type() = default;                                                                 \
    Type(const Type&) = default;                                                      \
    Type& operator=(const Type&) = default;                                           \
    Type(Type&& other) noexcept { swap(other); }                                      \
    Type& operator=(Type&& other) noexcept {                                          \
        swap(other);                                                                  \
        return *this;                                                                 \
    }

/// Base class for all library errors.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Malformed input data (files, matrices that violate a contract).
struct ParseError : Error {
    using Error::Error;
};

/// A numerical stage failed (non-convergence, singular system, ...).
struct NumericError : Error {
    using Error::Error;
};

/// The online update cannot proceed safely; the caller should fall back
/// to a full offline re-solve.
struct RefreshRequired : NumericError {
    using NumericError::NumericError;
};

/// A persisted artifact was written by an incompatible version.
struct StaleCheckpoint : Error {
    using Error::Error;
};

} // namespace dyne
