#pragma once

#include "horls/linalg.hpp"

namespace horls {

/// Nominal-noise model: the (known) correlation matrix R_vv, its inverse
/// W = R_vv⁻¹ used as the error weighting, and the cached spectral norm ‖W‖.
struct NoiseModel {
    Mat R_vv;
    Mat W;
    double W_norm = 0.0;

    NoiseModel() = default;

    explicit NoiseModel(Mat R_vv_in) : R_vv(std::move(R_vv_in)) {
        detail::require(R_vv.rows() == R_vv.cols(), "NoiseModel: R_vv not square");
        detail::require(detail::is_symmetric(R_vv, 1e-8), "NoiseModel: R_vv not symmetric");
        Eigen::LLT<Mat> llt(R_vv);
        if (llt.info() != Eigen::Success)
            throw std::invalid_argument("NoiseModel: R_vv not positive definite");
        W = llt.solve(Mat::Identity(R_vv.rows(), R_vv.cols()));
        W = 0.5 * (W + W.transpose()).eval();
        W_norm = spectral_norm(W, 1e-10);
    }

    int L() const { return static_cast<int>(R_vv.rows()); }
};

}  // namespace horls
