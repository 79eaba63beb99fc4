#pragma once

#include <Eigen/Core>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace bodycorr {

// Dense NCHW tensor. The batch dimension doubles as the phase-copy dimension
// inside the descriptor tower (see PhaseMap). Scalar is double in test mode
// and float in fast mode.
template <typename Scalar>
struct Tensor {
    int n = 0, c = 0, h = 0, w = 0;
    Eigen::Array<Scalar, Eigen::Dynamic, 1> data;

    Tensor() = default;
    Tensor(int n_, int c_, int h_, int w_) { resize(n_, c_, h_, w_); }

    void resize(int n_, int c_, int h_, int w_) {
        n = n_;
        c = c_;
        h = h_;
        w = w_;
        data.setZero(static_cast<Eigen::Index>(n) * c * h * w);
    }

    Eigen::Index size() const { return data.size(); }

    Eigen::Index index(int in, int ic, int iy, int ix) const {
        return ((static_cast<Eigen::Index>(in) * c + ic) * h + iy) * w + ix;
    }
    Scalar& at(int in, int ic, int iy, int ix) { return data[index(in, ic, iy, ix)]; }
    Scalar at(int in, int ic, int iy, int ix) const { return data[index(in, ic, iy, ix)]; }

    bool same_shape(const Tensor& other) const {
        return n == other.n && c == other.c && h == other.h && w == other.w;
    }
    std::string shape_string() const {
        return "(" + std::to_string(n) + "," + std::to_string(c) + "," + std::to_string(h) +
               "," + std::to_string(w) + ")";
    }
};

template <typename Scalar>
void check_finite(const Tensor<Scalar>& t, const char* where) {
    if (!t.data.isFinite().all()) {
        throw std::runtime_error(std::string("tensor: non-finite values after ") + where);
    }
}

// Phase bookkeeping for the all-offsets pooling scheme: batch copy i of a
// tensor holds the samples of the pre-pooling grid at positions
// (scale*y + offset_y[i], scale*x + offset_x[i]).
struct PhaseMap {
    int scale = 1;
    std::vector<std::pair<int, int>> offsets = {{0, 0}};

    int copies() const { return static_cast<int>(offsets.size()); }
};

}  // namespace bodycorr
