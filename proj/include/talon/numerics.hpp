#pragma once

#include <span>
#include <vector>

#include "talon/core.hpp"

namespace talon {

/// C x T feature matrix, row-major by channel.
struct FeatureSequence {
    int channels = 0;
    int length = 0;
    std::vector<double> data;

    FeatureSequence() = default;
    FeatureSequence(int c, int t, double fill = 0.0)
        : channels(c), length(t), data(static_cast<std::size_t>(c) * t, fill) {}

    double& at(int c, int t) { return data[static_cast<std::size_t>(c) * length + t]; }
    double at(int c, int t) const { return data[static_cast<std::size_t>(c) * length + t]; }

    void validate() const;

    friend bool operator==(const FeatureSequence&, const FeatureSequence&) = default;
};

/// Region of a feature sequence in grid units: cell t covers [t, t + 1) and its
/// value sits at the cell center t + 0.5. Between centers the signal is linearly
/// interpolated; beyond the first and last centers it ramps to zero one cell out.
struct RoiRegion {
    double lo = 0.0;
    double hi = 0.0;
};

/// Bin-averaged interpolation of `feats` over `region`. Returns C x bins, row-major.
std::vector<double> roi_align_1d(const FeatureSequence& feats, RoiRegion region, int bins,
                                 int samples_per_bin);

/// Adjoint of roi_align_1d with respect to the features. Returns C x T, row-major.
std::vector<double> roi_align_1d_grad(const FeatureSequence& feats, RoiRegion region,
                                      int bins, int samples_per_bin,
                                      std::span<const double> upstream);

/// Value of channel `c` of the interpolated signal at grid coordinate `x`.
double sample_feature(const FeatureSequence& feats, int c, double x);

enum class AlignMode { centers, corners };

/// Resamples `v` to length `m` by linear interpolation.
std::vector<double> resize_linear(std::span<const double> v, int m,
                                  AlignMode mode = AlignMode::centers);

enum class ResizeOrder { rows_first, cols_first };

/// Separable linear resize of a square map to d_new x d_new.
Matrix resize_bilinear_map(const Matrix& m, int d_new, AlignMode mode = AlignMode::centers,
                           ResizeOrder order = ResizeOrder::rows_first);

/// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations, ascending.
std::vector<double> symmetric_eigenvalues(Matrix a, int max_sweeps = 100);

/// Sum of singular values of `a`, via the eigenvalues of the smaller Gram matrix.
double nuclear_norm(const Matrix& a);

}  // namespace talon
