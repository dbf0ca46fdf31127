#include "talon/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace talon {

void FeatureSequence::validate() const {
    if (channels < 1 || length < 1) {
        throw ContractError("feature sequence needs C >= 1 and T >= 1");
    }
    if (data.size() != static_cast<std::size_t>(channels) * length) {
        throw FormatError("feature sequence payload does not match C x T");
    }
    for (double x : data) {
        if (!std::isfinite(x)) throw ContractError("feature sequence has non-finite entries");
    }
}

namespace {

// Sample position -> (left index, right weight). Cell t's value sits at t + 0.5.
struct Tap {
    int left;
    double w;
};

Tap tap_at(double x) {
    const double u = x - 0.5;
    const double fl = std::floor(u);
    return {static_cast<int>(fl), u - fl};
}

void check_region(RoiRegion region, int bins, int samples_per_bin) {
    if (bins < 1) throw ContractError("roi_align_1d: bins must be >= 1");
    if (samples_per_bin < 1) throw ContractError("roi_align_1d: samples_per_bin must be >= 1");
    if (!std::isfinite(region.lo) || !std::isfinite(region.hi) || !(region.lo < region.hi)) {
        throw ContractError("roi_align_1d: region needs lo < hi");
    }
}

template <class Fn>
void for_each_sample(RoiRegion region, int bins, int samples_per_bin, Fn&& fn) {
    const double width = region.hi - region.lo;
    for (int b = 0; b < bins; ++b) {
        for (int s = 0; s < samples_per_bin; ++s) {
            const double frac = (b + (s + 0.5) / samples_per_bin) / bins;
            fn(b, region.lo + width * frac);
        }
    }
}

}  // namespace

double sample_feature(const FeatureSequence& feats, int c, double x) {
    const Tap tap = tap_at(x);
    double v = 0.0;
    if (tap.left >= 0 && tap.left < feats.length) v += (1.0 - tap.w) * feats.at(c, tap.left);
    const int right = tap.left + 1;
    if (right >= 0 && right < feats.length) v += tap.w * feats.at(c, right);
    return v;
}

std::vector<double> roi_align_1d(const FeatureSequence& feats, RoiRegion region, int bins,
                                 int samples_per_bin) {
    check_region(region, bins, samples_per_bin);
    std::vector<double> out(static_cast<std::size_t>(feats.channels) * bins, 0.0);
    const double inv = 1.0 / samples_per_bin;
    for_each_sample(region, bins, samples_per_bin, [&](int b, double x) {
        const Tap tap = tap_at(x);
        const int right = tap.left + 1;
        const bool has_left = tap.left >= 0 && tap.left < feats.length;
        const bool has_right = right >= 0 && right < feats.length;
        for (int c = 0; c < feats.channels; ++c) {
            double v = 0.0;
            if (has_left) v += (1.0 - tap.w) * feats.at(c, tap.left);
            if (has_right) v += tap.w * feats.at(c, right);
            out[static_cast<std::size_t>(c) * bins + b] += v * inv;
        }
    });
    return out;
}

std::vector<double> roi_align_1d_grad(const FeatureSequence& feats, RoiRegion region,
                                      int bins, int samples_per_bin,
                                      std::span<const double> upstream) {
    check_region(region, bins, samples_per_bin);
    if (upstream.size() != static_cast<std::size_t>(feats.channels) * bins) {
        throw FormatError("roi_align_1d_grad: upstream must be C x bins");
    }
    std::vector<double> grad(static_cast<std::size_t>(feats.channels) * feats.length, 0.0);
    const double inv = 1.0 / samples_per_bin;
    for_each_sample(region, bins, samples_per_bin, [&](int b, double x) {
        const Tap tap = tap_at(x);
        const int right = tap.left + 1;
        for (int c = 0; c < feats.channels; ++c) {
            const double g = upstream[static_cast<std::size_t>(c) * bins + b] * inv;
            const std::size_t row = static_cast<std::size_t>(c) * feats.length;
            if (tap.left >= 0 && tap.left < feats.length) grad[row + tap.left] += (1.0 - tap.w) * g;
            if (right >= 0 && right < feats.length) grad[row + right] += tap.w * g;
        }
    });
    return grad;
}

std::vector<double> resize_linear(std::span<const double> v, int m, AlignMode mode) {
    const int n = static_cast<int>(v.size());
    if (n < 1) throw ContractError("resize_linear: input must be non-empty");
    if (m < 1) throw ContractError("resize_linear: output length must be >= 1");
    if (m == n) return {v.begin(), v.end()};

    std::vector<double> out(m);
    for (int k = 0; k < m; ++k) {
        double src;
        if (mode == AlignMode::centers) {
            src = (k + 0.5) * n / m - 0.5;
        } else {
            src = m == 1 ? 0.0 : static_cast<double>(k) * (n - 1) / (m - 1);
        }
        src = std::clamp(src, 0.0, static_cast<double>(n - 1));
        const int lo = std::min(static_cast<int>(std::floor(src)), n - 1);
        const int hi = std::min(lo + 1, n - 1);
        const double w = src - lo;
        out[k] = w == 0.0 ? v[lo] : v[lo] + w * (v[hi] - v[lo]);
    }
    return out;
}

namespace {

Matrix resize_rows(const Matrix& m, int new_cols, AlignMode mode) {
    Matrix out(m.rows(), new_cols);
    for (std::size_t r = 0; r < m.rows(); ++r) {
        std::span<const double> row(m.data().data() + r * m.cols(), m.cols());
        const auto res = resize_linear(row, new_cols, mode);
        std::copy(res.begin(), res.end(), out.data().begin() + r * new_cols);
    }
    return out;
}

Matrix resize_cols(const Matrix& m, int new_rows, AlignMode mode) {
    Matrix out(new_rows, m.cols());
    std::vector<double> col(m.rows());
    for (std::size_t c = 0; c < m.cols(); ++c) {
        for (std::size_t r = 0; r < m.rows(); ++r) col[r] = m(r, c);
        const auto res = resize_linear(col, new_rows, mode);
        for (int r = 0; r < new_rows; ++r) out(r, c) = res[r];
    }
    return out;
}

}  // namespace

Matrix resize_bilinear_map(const Matrix& m, int d_new, AlignMode mode, ResizeOrder order) {
    if (m.rows() < 1 || m.cols() < 1) throw ContractError("resize_bilinear_map: empty map");
    if (d_new < 1) throw ContractError("resize_bilinear_map: d_new must be >= 1");
    if (order == ResizeOrder::rows_first) {
        return resize_cols(resize_rows(m, d_new, mode), d_new, mode);
    }
    return resize_rows(resize_cols(m, d_new, mode), d_new, mode);
}

std::vector<double> symmetric_eigenvalues(Matrix a, int max_sweeps) {
    const std::size_t n = a.rows();
    if (a.cols() != n) throw ContractError("symmetric_eigenvalues: matrix must be square");

    auto off_norm = [&] {
        double s = 0.0;
        for (std::size_t p = 0; p < n; ++p)
            for (std::size_t q = p + 1; q < n; ++q) s += a(p, q) * a(p, q);
        return s;
    };
    double scale = 0.0;
    for (double x : a.data()) scale += x * x;

    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        if (off_norm() <= 1e-32 * scale) break;
        for (std::size_t p = 0; p + 1 < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                const double apq = a(p, q);
                if (apq == 0.0) continue;
                const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
                const double t = (theta >= 0 ? 1.0 : -1.0) /
                                 (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (std::size_t k = 0; k < n; ++k) {
                    const double akp = a(k, p);
                    const double akq = a(k, q);
                    a(k, p) = c * akp - s * akq;
                    a(k, q) = s * akp + c * akq;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double apk = a(p, k);
                    const double aqk = a(q, k);
                    a(p, k) = c * apk - s * aqk;
                    a(q, k) = s * apk + c * aqk;
                }
            }
        }
    }
    std::vector<double> ev(n);
    for (std::size_t i = 0; i < n; ++i) ev[i] = a(i, i);
    std::sort(ev.begin(), ev.end());
    return ev;
}

double nuclear_norm(const Matrix& a) {
    if (a.rows() < 1 || a.cols() < 1) throw ContractError("nuclear_norm: empty matrix");
    for (double x : a.data()) {
        if (!std::isfinite(x)) throw ContractError("nuclear_norm: non-finite entry");
    }
    const std::size_t rows = a.rows();
    const std::size_t cols = a.cols();
    const bool use_cols = cols <= rows;  // Gram of the smaller side
    const std::size_t k = use_cols ? cols : rows;
    Matrix gram(k, k);
    for (std::size_t p = 0; p < k; ++p) {
        for (std::size_t q = p; q < k; ++q) {
            double s = 0.0;
            if (use_cols) {
                for (std::size_t r = 0; r < rows; ++r) s += a(r, p) * a(r, q);
            } else {
                for (std::size_t c = 0; c < cols; ++c) s += a(p, c) * a(q, c);
            }
            gram(p, q) = s;
            gram(q, p) = s;
        }
    }
    double total = 0.0;
    for (double ev : symmetric_eigenvalues(std::move(gram))) total += std::sqrt(std::max(ev, 0.0));
    return total;
}

}  // namespace talon
