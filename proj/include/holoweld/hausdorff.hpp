#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <map>
#include <stdexcept>
#include <vector>

#include "geometry.hpp"
#include "rects.hpp"

namespace holoweld {

/// An element of the induced Hausdorff space: a finite point set.
using FiniteSetH = std::vector<cplx>;

inline double directed_hausdorff(const FiniteSetH& a, const FiniteSetH& b) {
    if (a.empty() || b.empty())
        throw std::invalid_argument("hausdorff: empty set");
    double worst = 0.0;
    for (cplx p : a) {
        double best = std::numeric_limits<double>::infinity();
        for (cplx q : b) best = std::min(best, std::abs(p - q));
        worst = std::max(worst, best);
    }
    return worst;
}

inline double hausdorff(const FiniteSetH& a, const FiniteSetH& b) {
    return std::max(directed_hausdorff(a, b), directed_hausdorff(b, a));
}

/// Return-time configurations of one fiber: the set R^l per previous-level
/// class l.
struct FiberReturns {
    std::vector<FiniteSetH> returns;
};

struct Partition {
    std::vector<int> cell_of;              // fiber -> cell
    std::vector<std::vector<int>> cells;   // cell -> fiber ids
    int cell_count() const { return static_cast<int>(cells.size()); }
};

namespace hsimpl {
// Distance used by the partition: empty sets compare equal to each other
// and infinitely far from nonempty ones.
inline double f_ell(const FiniteSetH& a, const FiniteSetH& b) {
    if (a.empty() && b.empty()) return 0.0;
    if (a.empty() || b.empty()) return std::numeric_limits<double>::infinity();
    return hausdorff(a, b);
}
} // namespace hsimpl

/// Greedy delta/2 covers per class, then their common refinement. Every
/// output cell is delta-fine: pairwise d_H(R^l(x), R^l(y)) < delta for all l
/// by the triangle inequality through the cell representative.
inline Partition delta_fine_partition(const std::vector<FiberReturns>& fibers, double delta,
                                      int k_prev) {
    if (!(delta > 0)) throw std::invalid_argument("delta_fine_partition: delta must be > 0");
    const int n = static_cast<int>(fibers.size());
    for (const auto& f : fibers)
        if (static_cast<int>(f.returns.size()) != k_prev)
            throw std::invalid_argument("delta_fine_partition: fiber class count mismatch");

    // cluster ids per class
    std::vector<std::vector<int>> q(k_prev, std::vector<int>(n, -1));
    for (int l = 0; l < k_prev; ++l) {
        std::vector<int> reps;
        for (int i = 0; i < n; ++i) {
            for (std::size_t r = 0; r < reps.size(); ++r) {
                if (hsimpl::f_ell(fibers[i].returns[l], fibers[reps[r]].returns[l]) <
                    0.5 * delta) {
                    q[l][i] = static_cast<int>(r);
                    break;
                }
            }
            if (q[l][i] < 0) {
                q[l][i] = static_cast<int>(reps.size());
                reps.push_back(i);
            }
        }
    }

    Partition part;
    part.cell_of.assign(n, -1);
    std::map<std::vector<int>, int> keys;
    for (int i = 0; i < n; ++i) {
        std::vector<int> key(k_prev);
        for (int l = 0; l < k_prev; ++l) key[l] = q[l][i];
        auto [it, fresh] = keys.try_emplace(key, static_cast<int>(part.cells.size()));
        if (fresh) part.cells.emplace_back();
        part.cell_of[i] = it->second;
        part.cells[it->second].push_back(i);
    }
    return part;
}

/// Exhaustive pairwise check that a partition is delta-fine.
inline bool verify_delta_fine(const std::vector<FiberReturns>& fibers, const Partition& part,
                              double delta, double* worst = nullptr) {
    double w = 0.0;
    for (const auto& cell : part.cells)
        for (std::size_t i = 0; i < cell.size(); ++i)
            for (std::size_t j = i + 1; j < cell.size(); ++j)
                for (std::size_t l = 0; l < fibers[cell[i]].returns.size(); ++l)
                    w = std::max(w, hsimpl::f_ell(fibers[cell[i]].returns[l],
                                                  fibers[cell[j]].returns[l]));
    if (worst) *worst = w;
    return w < delta;
}

/// Signature-based epsilon net over a cover of small-diameter cells.
struct EpsilonNet {
    std::vector<int> group_of;          // set index -> group
    std::vector<int> representative;    // group -> set index
    int size() const { return static_cast<int>(representative.size()); }
};

inline EpsilonNet epsilon_net(const std::vector<FiniteSetH>& sets, double eps,
                              const std::vector<Rect>& cover) {
    for (const auto& c : cover) {
        const double diam = std::hypot(c.x1 - c.x0, c.y1 - c.y0);
        if (!(diam < eps))
            throw std::invalid_argument("epsilon_net: cover cell diameter >= eps");
    }
    EpsilonNet net;
    net.group_of.assign(sets.size(), -1);
    std::map<std::vector<std::uint8_t>, int> keys;
    for (std::size_t i = 0; i < sets.size(); ++i) {
        std::vector<std::uint8_t> sig(cover.size(), 0);
        for (cplx p : sets[i]) {
            bool hit = false;
            for (std::size_t c = 0; c < cover.size(); ++c)
                if (cover[c].contains(p.real(), p.imag())) {
                    sig[c] = 1;
                    hit = true;
                }
            if (!hit)
                throw std::invalid_argument("epsilon_net: cover does not cover all points");
        }
        auto [it, fresh] = keys.try_emplace(sig, static_cast<int>(net.representative.size()));
        if (fresh) net.representative.push_back(static_cast<int>(i));
        net.group_of[i] = it->second;
    }
    return net;
}

} // namespace holoweld
