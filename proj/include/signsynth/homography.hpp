#pragma once

#include <array>
#include <cmath>
#include <utility>

#include "signsynth/error.hpp"

namespace signsynth {

struct Point2 {
    double x = 0;
    double y = 0;
};

/// Row-major 3x3 projective transform, normalized so that m[8] == 1.
struct Homography {
    std::array<double, 9> m{1, 0, 0, 0, 1, 0, 0, 0, 1};

    Point2 apply(Point2 p) const {
        const double w = m[6] * p.x + m[7] * p.y + m[8];
        return {(m[0] * p.x + m[1] * p.y + m[2]) / w, (m[3] * p.x + m[4] * p.y + m[5]) / w};
    }

    Homography inverse() const {
        const auto& a = m;
        const double c00 = a[4] * a[8] - a[5] * a[7];
        const double c01 = a[5] * a[6] - a[3] * a[8];
        const double c02 = a[3] * a[7] - a[4] * a[6];
        const double det = a[0] * c00 + a[1] * c01 + a[2] * c02;
        if (std::abs(det) < 1e-15) throw ArgumentError("homography is singular");
        Homography inv;
        inv.m = {c00,
                 a[2] * a[7] - a[1] * a[8],
                 a[1] * a[5] - a[2] * a[4],
                 c01,
                 a[0] * a[8] - a[2] * a[6],
                 a[2] * a[3] - a[0] * a[5],
                 c02,
                 a[1] * a[6] - a[0] * a[7],
                 a[0] * a[4] - a[1] * a[3]};
        const double s = inv.m[8];
        for (auto& v : inv.m) v /= (std::abs(s) > 1e-15 ? s : det);
        return inv;
    }
};

/// Solve the homography taking src[i] to dst[i] for the four correspondences
/// (direct linear transform with h33 fixed to 1, Gaussian elimination with
/// partial pivoting).
inline Homography solve_homography(const std::array<Point2, 4>& src, const std::array<Point2, 4>& dst) {
    double a[8][9] = {};
    for (int i = 0; i < 4; ++i) {
        const double x = src[i].x, y = src[i].y, u = dst[i].x, v = dst[i].y;
        double* r0 = a[2 * i];
        double* r1 = a[2 * i + 1];
        r0[0] = x, r0[1] = y, r0[2] = 1, r0[6] = -x * u, r0[7] = -y * u, r0[8] = u;
        r1[3] = x, r1[4] = y, r1[5] = 1, r1[6] = -x * v, r1[7] = -y * v, r1[8] = v;
    }
    for (int col = 0; col < 8; ++col) {
        int pivot = col;
        for (int r = col + 1; r < 8; ++r)
            if (std::abs(a[r][col]) > std::abs(a[pivot][col])) pivot = r;
        if (std::abs(a[pivot][col]) < 1e-12)
            throw ArgumentError("degenerate corner configuration for homography");
        if (pivot != col)
            for (int k = 0; k < 9; ++k) std::swap(a[pivot][k], a[col][k]);
        for (int r = 0; r < 8; ++r) {
            if (r == col) continue;
            const double f = a[r][col] / a[col][col];
            if (f == 0.0) continue;
            for (int k = col; k < 9; ++k) a[r][k] -= f * a[col][k];
        }
    }
    Homography h;
    for (int i = 0; i < 8; ++i) h.m[i] = a[i][8] / a[i][i];
    h.m[8] = 1.0;
    return h;
}

}  // namespace signsynth
