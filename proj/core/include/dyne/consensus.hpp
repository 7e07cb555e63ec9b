#pragma once

#include "dyne/types.hpp"

#include <utility>

namespace dyne {

/// Projection that fuses the two intermediate embeddings: the stacked top-l
/// eigenvectors [p_net; p_attr] of the cross-correlation generalized
/// eigen-problem, columns ordered by descending gamma and orthonormal in the
/// block-diagonal right-hand matrix.
struct ConsensusProjection {
    Mat p;      // 2k x l
    Vec gammas; // l, descending
};

struct ConsensusEmbedding {
    Mat y; // n x l, exactly [ya, yx] * p
};

/// Correlation-maximizing fusion. Assembles the 2k x 2k left matrix
/// [[Ya'Ya, Ya'Yx], [Yx'Ya, Yx'Yx]] and right matrix blockdiag(Ya'Ya, Yx'Yx)
/// + ridge*I, solves the generalized symmetric eigen-problem, and keeps the
/// l eigenvectors with the largest gamma (the objective is a maximization).
/// ridge < 0 selects the default 1e-8 * trace(right) / 2k; ridge = 0 is
/// honored but a singular right-hand matrix then raises an Error advising
/// ridge > 0.
std::pair<ConsensusProjection, ConsensusEmbedding> fuse(const Mat& ya, const Mat& yx,
                                                        Index l, double ridge = -1.0);

} // namespace dyne
