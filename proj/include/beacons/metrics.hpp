// Error and conservation metrics of a predicted frame series against the reference.
#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "fv.hpp"

namespace beacons {

struct MetricsRow {
    std::string arch;
    std::vector<std::string> components;
    int headline = 0;  // density for Euler, the only component otherwise
    double l_inf_final = 0, l2_final = 0, l_inf_all = 0, l2_all = 0;
    std::vector<double> conservation_final, conservation_total;  // per component
    double l_inf_all_abs = 0;  // unnormalized headline max error over the evaluated frames

    double headline_conservation_final() const { return conservation_final[headline]; }
    double headline_conservation_total() const { return conservation_total[headline]; }
    bool finite() const {
        for (double v : {l_inf_final, l2_final, l_inf_all, l2_all, l_inf_all_abs})
            if (!std::isfinite(v)) return false;
        for (auto* vs : {&conservation_final, &conservation_total})
            for (double v : *vs)
                if (!std::isfinite(v)) return false;
        return true;
    }
};

namespace detail {

inline void require_aligned(const FrameSeries& a, const FrameSeries& b) {
    if (a.frames.size() != b.frames.size() || a.frames.empty()) throw std::invalid_argument("frame counts differ");
    if (a.components != b.components) throw std::invalid_argument("component lists differ");
    for (size_t k = 0; k < a.frames.size(); ++k) {
        if (a.times[k] != b.times[k]) throw std::invalid_argument("frame times differ");
        if (!(a.frames[k].grid == b.frames[k].grid) || a.frames[k].m != b.frames[k].m)
            throw std::invalid_argument("grid mismatch");
    }
}

}  // namespace detail

// Metrics over frames [cutoff, end). Normalizers: max |ref| (L-inf) and the
// mean per-frame discrete L2 norm of the reference (L2), both over the same
// frames and the headline component; conservation sums are in cell units.
inline MetricsRow compute_metrics(const FrameSeries& ref, const FrameSeries& pred, size_t cutoff,
                                  const std::string& arch = "") {
    detail::require_aligned(ref, pred);
    if (cutoff >= ref.frames.size()) throw std::invalid_argument("no frames after the training cutoff");
    MetricsRow r;
    r.arch = arch;
    r.components = ref.components;
    const int m = static_cast<int>(ref.components.size());
    const int c = 0;
    r.headline = c;
    const double dV = ref.grid().cell_volume();
    const size_t last = ref.frames.size() - 1, count = ref.frames.size() - cutoff;

    double ref_max = 0.0, ref_l2 = 0.0;
    std::vector<double> diff_max(ref.frames.size(), 0.0), diff_l2(ref.frames.size(), 0.0);
    r.conservation_final.assign(m, 0.0);
    r.conservation_total.assign(m, 0.0);
    for (size_t k = cutoff; k <= last; ++k) {
        const auto &A = ref.frames[k], &B = pred.frames[k];
        double l2r = 0.0, l2d = 0.0, dmax = 0.0;
        std::vector<double> sum(m, 0.0);
        for (int j = 0; j < A.ny(); ++j)
            for (int i = 0; i < A.nx(); ++i) {
                const auto &a = A.at(i, j), &b = B.at(i, j);
                for (int q = 0; q < m; ++q) sum[q] += b[q] - a[q];
                const double d = b[c] - a[c];
                ref_max = std::max(ref_max, std::abs(a[c]));
                dmax = std::max(dmax, std::abs(d));
                l2r += a[c] * a[c];
                l2d += d * d;
            }
        ref_l2 += std::sqrt(l2r * dV);
        diff_l2[k] = std::sqrt(l2d * dV);
        diff_max[k] = dmax;
        for (int q = 0; q < m; ++q) {
            r.conservation_total[q] += sum[q];
            if (k == last) r.conservation_final[q] = sum[q];
        }
    }
    ref_l2 /= static_cast<double>(count);
    if (ref_max == 0.0) ref_max = 1.0;
    if (ref_l2 == 0.0) ref_l2 = 1.0;
    double all_max = 0.0, all_l2 = 0.0;
    for (size_t k = cutoff; k <= last; ++k) {
        all_max = std::max(all_max, diff_max[k]);
        all_l2 += diff_l2[k];
    }
    r.l_inf_final = diff_max[last] / ref_max;
    r.l2_final = diff_l2[last] / ref_l2;
    r.l_inf_all = all_max / ref_max;
    r.l2_all = all_l2 / static_cast<double>(count) / ref_l2;
    r.l_inf_all_abs = all_max;
    return r;
}

}  // namespace beacons
