#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "geometry.hpp"
#include "hausdorff.hpp"
#include "rects.hpp"
#include "rng.hpp"
#include "windows.hpp"

namespace holoweld {

/// a_1 = 1, a_n = D n log^2 n a_{n-1} (natural logs), with the series
/// sum a_n / a_{n+1} that the nested-tower hypothesis needs below 1/2.
struct ASequence {
    std::vector<double> a;
    double ratio_sum = 0.0;
    bool hypothesis_ok = false;
};

inline ASequence a_sequence(double D, int N) {
    if (!(D > 0) || N < 1) throw std::invalid_argument("a_sequence: need D > 0, N >= 1");
    ASequence s;
    s.a.resize(N);
    s.a[0] = 1.0;
    for (int n = 2; n <= N; ++n) {
        const double ln = std::log(static_cast<double>(n));
        s.a[n - 1] = D * n * ln * ln * s.a[n - 2];
    }
    for (int n = 0; n + 1 < N; ++n) s.ratio_sum += s.a[n] / s.a[n + 1];
    s.hypothesis_ok = s.ratio_sum < 0.5;
    return s;
}

/// Hash-grid separation test, linear in the point count. Bucket width 2
/// means any pair at inf-distance <= 2 shares or neighbors a bucket.
inline bool separation_exceeds_two(const std::vector<cplx>& pts) {
    std::unordered_map<long long, std::vector<int>> buckets;
    auto key = [](int bx, int by) {
        return (static_cast<long long>(bx) << 32) ^ static_cast<std::uint32_t>(by);
    };
    for (std::size_t i = 0; i < pts.size(); ++i) {
        const int bx = static_cast<int>(std::floor(pts[i].real() / 2.0));
        const int by = static_cast<int>(std::floor(pts[i].imag() / 2.0));
        for (int dx = -1; dx <= 1; ++dx)
            for (int dy = -1; dy <= 1; ++dy) {
                const auto it = buckets.find(key(bx + dx, by + dy));
                if (it == buckets.end()) continue;
                for (int j : it->second)
                    if (norm_inf(pts[i] - pts[j]) <= 2.0) return false;
            }
        buckets[key(bx, by)].push_back(static_cast<int>(i));
    }
    return true;
}

struct TubeMeasure {
    double value = 0.0;
    bool clipped = false; // A exceeded S and was clipped
};

/// mu(A B) = m(A)/m(S) * mu(S B) for measurable A inside the tower square.
inline TubeMeasure tube_measure(const RectRegion& A, const Square& S, double tower_mass) {
    const Rect frame = Rect::square(S.center, S.half_edge);
    const double full = A.area();
    const double inside = A.area_in(frame);
    TubeMeasure t;
    t.clipped = full > inside * (1.0 + 1e-12) + 1e-300;
    t.value = inside / S.area() * tower_mass;
    return t;
}

/// Area-ratio form for analytically known regions (discs, annuli).
inline double tube_measure_area(double region_area, const Square& S, double tower_mass) {
    return region_area / S.area() * tower_mass;
}

// ---- the finite tower model ----

struct TowerFiber {
    double weight = 1.0; // mu-mass carried by this fiber's part of the tower
    cplx jitter{0.0, 0.0}; // offset of the embedded configuration, scaled units
};

struct TowerClass {
    double mass = 0.0;              // mu(S_{a_n} B_n^j) summed over fibers
    std::vector<TowerFiber> fibers;
    /// Embedded configuration of level-(n-1) sub-towers: positions in
    /// S_{a_n/a_{n-1}}-scaled coordinates, labels = level-(n-1) classes.
    Configuration config;           // empty at the bottom level
};

struct TowerLevel {
    double a = 1.0;
    std::vector<TowerClass> classes;
};

struct TowerModel {
    double D = 100.0;
    std::vector<TowerLevel> levels;        // levels[0] = level 1 (bottom)
    std::vector<double> eps_targets;       // per-level coverage gaps aimed for
    std::uint64_t seed = 0;

    int depth() const { return static_cast<int>(levels.size()); }

    void validate() const {
        if (levels.empty()) throw std::invalid_argument("TowerModel: no levels");
        double prev_mass = 0.0;
        for (int i = 0; i < depth(); ++i) {
            const auto& lv = levels[i];
            if (i > 0 && !(lv.a > levels[i - 1].a))
                throw std::invalid_argument("TowerModel: a_n must increase");
            double mass = 0.0;
            for (const auto& cl : lv.classes) {
                mass += cl.mass;
                double w = 0.0;
                for (const auto& f : cl.fibers) w += f.weight;
                if (std::fabs(w - cl.mass) > 1e-9 * std::max(1.0, cl.mass))
                    throw std::invalid_argument("TowerModel: fiber weights do not sum to class mass");
                if (i > 0) {
                    if (!(cl.config.C >= 1.0))
                        throw std::invalid_argument("TowerModel: configuration C < 1");
                    if (!separation_exceeds_two(cl.config.points))
                        throw std::invalid_argument("TowerModel: separation violation");
                    const double C = lv.a / levels[i - 1].a;
                    for (cplx p : cl.config.points)
                        if (!(norm_inf(p) <= C))
                            throw std::invalid_argument("TowerModel: configuration outside S_C");
                    for (int lbl : cl.config.labels)
                        if (lbl < 0 ||
                            lbl >= static_cast<int>(levels[i - 1].classes.size()))
                            throw std::invalid_argument("TowerModel: bad label");
                    if (cl.config.labels.size() != cl.config.points.size())
                        throw std::invalid_argument("TowerModel: labels required");
                }
            }
            if (mass > 1.0 + 1e-9)
                throw std::invalid_argument("TowerModel: level mass exceeds 1");
            if (mass + 1e-12 < prev_mass)
                throw std::invalid_argument("TowerModel: masses must be nondecreasing in n");
            prev_mass = mass;
        }
    }

    double level_mass(int i) const {
        double m = 0.0;
        for (const auto& cl : levels[i].classes) m += cl.mass;
        return m;
    }
};

struct TowerGenOptions {
    double D = 100.0;
    int levels = 3;
    std::vector<double> a;        // explicit a_n override (else the recurrence)
    double eps = 0.01;            // coverage gap target, every level
    int classes = 1;              // class count per level
    int fibers_per_class = 1;
    double jitter = 0.0;          // fiber jitter radius, scaled units
    std::uint64_t seed = 1;
    bool sparse = false;          // small clustered configurations (desk runs)
    int sparse_points = 4;
    double sparse_pitch = 2.25;   // lattice pitch in sparse mode
};

/// Perturbed-lattice model generator. Full mode lays a near-critical square
/// lattice of sub-towers per class (coverage close to the target); sparse
/// mode places a small cluster near the origin for field-level work.
inline TowerModel generate_tower_model(const TowerGenOptions& opt) {
    TowerModel model;
    model.D = opt.D;
    model.seed = opt.seed;
    Rng rng(opt.seed);
    const int N = opt.levels;
    if (N < 1) throw std::invalid_argument("generate_tower_model: levels >= 1");

    std::vector<double> a = opt.a;
    if (a.empty()) a = a_sequence(opt.D, N).a;
    if (static_cast<int>(a.size()) != N)
        throw std::invalid_argument("generate_tower_model: a override size mismatch");

    model.eps_targets.assign(N, opt.eps);
    model.levels.resize(N);
    // conditional per-level coverage so the bottom-level product still
    // clears the target gap
    const double cond = 1.0 - 0.25 * opt.eps;

    for (int i = 0; i < N; ++i) {
        model.levels[i].a = a[i];
        model.levels[i].classes.resize(opt.classes);
    }

    // top-level masses
    {
        const double top_mass = opt.sparse ? 1.0 - 0.5 * opt.eps : cond;
        auto& top = model.levels[N - 1];
        for (int j = 0; j < opt.classes; ++j) top.classes[j].mass = top_mass / opt.classes;
    }

    // Configurations, top-down. Sub-towers overhang their holder square a
    // little (that is the 4 a_m / a_{m+1} loss term of the refinement), but
    // never further than half the gap between holder squares, which keeps
    // the global family disjoint.
    double holder_pitch = 0.0; // pitch of the level above, in its own units
    for (int i = N - 1; i >= 1; --i) {
        const double C = a[i] / a[i - 1];
        const int k_prev = opt.classes;
        double max_poke = 0.45;
        if (i < N - 1)
            max_poke = std::min(0.45, 0.49 * (holder_pitch - 2.0) * C);
        int q;
        double pitch;
        if (opt.sparse) {
            q = std::max(1, static_cast<int>(std::round(
                    std::sqrt(static_cast<double>(opt.sparse_points)))));
            pitch = opt.sparse_pitch;
            while (q > 1 && 0.5 * (q - 1) * pitch + 1.0 > C) --q;
        } else {
            q = std::max(1, static_cast<int>(std::ceil(C * std::sqrt(cond))));
            for (;;) {
                pitch = q > 1 ? 2.0 * (C - 1.0 + max_poke) / (q - 1) : 2.1;
                if (pitch > 2.0 + 1e-9) break;
                --q; // coverage dips slightly; separation cannot
                if (q < 1) throw std::runtime_error("generate_tower_model: geometry infeasible");
            }
        }
        for (int j = 0; j < opt.classes; ++j) {
            auto& cl = model.levels[i].classes[j];
            cl.config.C = std::max(1.0, C);
            for (int iy = 0; iy < q; ++iy)
                for (int ix = 0; ix < q; ++ix) {
                    cl.config.points.push_back(
                        {(ix - 0.5 * (q - 1)) * pitch, (iy - 0.5 * (q - 1)) * pitch});
                    cl.config.labels.push_back(static_cast<int>(rng.below(k_prev)));
                }
        }
        holder_pitch = pitch;
    }

    // fibers and their jitters
    for (int i = 0; i < N; ++i)
        for (auto& cl : model.levels[i].classes) {
            cl.fibers.resize(opt.fibers_per_class);
            for (int f = 0; f < opt.fibers_per_class; ++f) {
                cl.fibers[f].jitter =
                    f == 0 || opt.jitter == 0.0
                        ? cplx(0, 0)
                        : cplx(rng.uniform(-opt.jitter, opt.jitter),
                               rng.uniform(-opt.jitter, opt.jitter));
            }
        }

    // masses below the top level follow from the counts via the tube rule
    for (int i = N - 2; i >= 0; --i) {
        const double ratio2 = (a[i] / a[i + 1]) * (a[i] / a[i + 1]);
        for (int j = 0; j < opt.classes; ++j) model.levels[i].classes[j].mass = 0.0;
        for (int j1 = 0; j1 < opt.classes; ++j1) {
            const auto& parent = model.levels[i + 1].classes[j1];
            for (std::size_t p = 0; p < parent.config.points.size(); ++p)
                model.levels[i].classes[parent.config.labels[p]].mass +=
                    parent.mass * ratio2;
        }
    }
    for (int i = 0; i < N; ++i)
        for (auto& cl : model.levels[i].classes) {
            const double w = cl.mass / std::max<std::size_t>(1, cl.fibers.size());
            for (auto& f : cl.fibers) f.weight = w;
        }
    model.validate();
    return model;
}

// ---- nested refinement ----

struct RefineStep {
    int level = 0; // 1-based
    int step = 0;  // k: loss from B(k) to B(k+1)
    double mass_before = 0.0, mass_after = 0.0, loss = 0.0;
    double bound = 0.0; // 2 eps_m + 4 a_m / a_{m+1}, m = level + step
    bool bound_ok = true;
    bool bound_applicable = true; // false once m+1 exceeds the model depth
};

struct RefineReport {
    std::vector<double> initial_mass;  // per level
    std::vector<double> eps_measured;  // 1 - initial mass
    std::vector<RefineStep> steps;
    std::vector<double> final_mass;
    std::vector<double> final_gap;        // 1 - final mass
    std::vector<double> final_gap_bound;  // 2 sum_{k>=j} (eps_k + 2 a_k/a_{k+1})
    double ratio_sum = 0.0;
    bool sum_hypothesis_ok = true;
    bool pass = true;
};

/// Measure dynamics of the top-down square-containment refinement
///   B_j(k+1) = { x in B_j(k) : S_{a_j} x inside S_{a_{j+1}} B_{j+1}(k) },
/// computed exactly on the class templates. Sub-tower squares poke out of
/// their parents only at the margin band, and sibling squares never touch,
/// so containment in the union is containment in the single parent.
inline RefineReport nested_refinement(const TowerModel& model,
                                      std::vector<double> eps_inputs = {}) {
    model.validate();
    const int N = model.depth();
    if (eps_inputs.empty()) eps_inputs = model.eps_targets;
    if (static_cast<int>(eps_inputs.size()) != N)
        throw std::invalid_argument("nested_refinement: eps size mismatch");

    RefineReport rep;
    {
        double s = 0.0;
        for (int i = 0; i + 1 < N; ++i) s += model.levels[i].a / model.levels[i + 1].a;
        rep.ratio_sum = s;
        rep.sum_hypothesis_ok = s < 0.5; // warn only; the run continues
    }

    // margin-pass counts per (parent level, class, fiber, child label)
    // margin: |lambda + jitter|_inf <= C - 1 keeps S_{a_{i-1}}(a_{i-1} lambda)
    // inside the parent square
    std::vector<std::vector<std::vector<std::vector<double>>>> cnt(N);
    for (int i = 1; i < N; ++i) {
        const double C = model.levels[i].a / model.levels[i - 1].a;
        const int kprev = static_cast<int>(model.levels[i - 1].classes.size());
        cnt[i].resize(model.levels[i].classes.size());
        for (std::size_t j = 0; j < model.levels[i].classes.size(); ++j) {
            const auto& cl = model.levels[i].classes[j];
            cnt[i][j].assign(cl.fibers.size(), std::vector<double>(kprev, 0.0));
            for (std::size_t f = 0; f < cl.fibers.size(); ++f)
                for (std::size_t p = 0; p < cl.config.points.size(); ++p)
                    if (norm_inf(cl.config.points[p] + cl.fibers[f].jitter) <= C - 1.0)
                        cnt[i][j][f][cl.config.labels[p]] += 1.0;
        }
    }

    // FiberMass[i][j][f] at the current step; top level never loses mass
    const int K = N + 1;
    std::vector<std::vector<std::vector<double>>> cur(N), prev;
    for (int i = 0; i < N; ++i) {
        cur[i].resize(model.levels[i].classes.size());
        for (std::size_t j = 0; j < cur[i].size(); ++j) {
            const auto& cl = model.levels[i].classes[j];
            cur[i][j].resize(cl.fibers.size());
            for (std::size_t f = 0; f < cl.fibers.size(); ++f)
                cur[i][j][f] = cl.fibers[f].weight;
        }
    }
    auto level_sum = [&](const std::vector<std::vector<double>>& v) {
        double s = 0.0;
        for (const auto& c : v) for (double w : c) s += w;
        return s;
    };
    for (int i = 0; i < N; ++i) {
        rep.initial_mass.push_back(level_sum(cur[i]));
        rep.eps_measured.push_back(1.0 - rep.initial_mass.back());
    }

    std::vector<std::vector<std::vector<std::vector<double>>>> history;
    history.push_back(cur);
    for (int k = 0; k < K; ++k) {
        prev = cur;
        for (int i = 0; i < N - 1; ++i) {
            const double ratio2 = (model.levels[i].a / model.levels[i + 1].a) *
                                  (model.levels[i].a / model.levels[i + 1].a);
            const int kids = static_cast<int>(model.levels[i].classes.size());
            std::vector<double> class_mass(kids, 0.0);
            for (std::size_t j1 = 0; j1 < model.levels[i + 1].classes.size(); ++j1)
                for (std::size_t f1 = 0; f1 < prev[i + 1][j1].size(); ++f1)
                    for (int j = 0; j < kids; ++j)
                        class_mass[j] += prev[i + 1][j1][f1] * ratio2 * cnt[i + 1][j1][f1][j];
            for (int j = 0; j < kids; ++j) {
                double wsum = 0.0;
                for (std::size_t f = 0; f < model.levels[i].classes[j].fibers.size(); ++f)
                    wsum += model.levels[i].classes[j].fibers[f].weight;
                for (std::size_t f = 0; f < cur[i][j].size(); ++f)
                    cur[i][j][f] = wsum > 0
                                       ? class_mass[j] *
                                             model.levels[i].classes[j].fibers[f].weight / wsum
                                       : 0.0;
            }
        }
        history.push_back(cur);
        for (int i = 0; i < N - 1; ++i) {
            RefineStep st;
            st.level = i + 1;
            st.step = k;
            st.mass_before = level_sum(history[k][i]);
            st.mass_after = level_sum(history[k + 1][i]);
            st.loss = st.mass_before - st.mass_after;
            const int m = st.level + st.step; // 1-based level index m
            st.bound_applicable = m + 1 <= N;
            if (st.bound_applicable) {
                const double am = model.levels[m - 1].a, am1 = model.levels[m].a;
                st.bound = 2.0 * eps_inputs[m - 1] + 4.0 * am / am1;
                st.bound_ok = st.loss <= st.bound + 1e-12;
            }
            rep.pass = rep.pass && st.bound_ok;
            if (st.loss > 1e-15 || st.bound_applicable) rep.steps.push_back(st);
        }
    }

    for (int i = 0; i < N; ++i) {
        rep.final_mass.push_back(level_sum(cur[i]));
        rep.final_gap.push_back(1.0 - rep.final_mass.back());
        double bound = 0.0;
        for (int kk = i; kk < N; ++kk) {
            bound += 2.0 * eps_inputs[kk];
            if (kk + 1 < N)
                bound += 4.0 * model.levels[kk].a / model.levels[kk + 1].a;
        }
        rep.final_gap_bound.push_back(bound);
        rep.pass = rep.pass && rep.final_gap[i] <= bound + 1e-12;
    }
    return rep;
}

// ---- geometric spot checks ----

struct FourCornerReport {
    int trials = 0;
    int max_meets = 0;          // most parent squares one small square met
    bool corners_unique = true; // each corner in at most one parent
    bool decomposition_ok = true; // covered squares split into disjoint rects
    bool pass = true;
};

/// Random placements of a level-j square against the disjoint level-(j+1)
/// sibling squares of one template: at most four can be met, each corner
/// lies in at most one, and when the union covers the square the
/// intersection rectangles tile it exactly. Needs three levels so that a
/// configuration of level-(j+1) squares exists.
inline FourCornerReport four_corner_check(const TowerModel& model, int trials,
                                          std::uint64_t seed) {
    model.validate();
    FourCornerReport rep;
    Rng rng(seed);
    const int N = model.depth();
    if (N < 3) return rep;
    for (int t = 0; t < trials; ++t) {
        // holder = 0-based level whose configs position the big squares
        const int holder = 2 + static_cast<int>(rng.below(N - 2));
        const auto& cl =
            model.levels[holder].classes[rng.below(model.levels[holder].classes.size())];
        if (cl.config.points.empty()) continue;
        const double a_big = model.levels[holder - 1].a;   // big square edge
        const double a_small = model.levels[holder - 2].a; // roving square edge
        std::vector<Rect> sib;
        sib.reserve(cl.config.points.size());
        for (cplx p : cl.config.points) sib.push_back(Rect::square(p * a_big, a_big));
        // rove a small square near a random sibling so straddles happen
        const cplx base = cl.config.points[rng.below(cl.config.points.size())] * a_big;
        const cplx z = base + cplx(rng.uniform(-1.2, 1.2) * a_big,
                                   rng.uniform(-1.2, 1.2) * a_big);
        const Rect small = Rect::square(z, a_small);
        std::vector<Rect> hits;
        for (const auto& s : sib)
            if (auto isec = s.intersect(small)) hits.push_back(*isec);
        rep.max_meets = std::max(rep.max_meets, static_cast<int>(hits.size()));
        // each corner of the small square lies in at most one sibling
        for (auto [cx, cy] : {std::pair{small.x0, small.y0}, {small.x1, small.y0},
                              {small.x0, small.y1}, {small.x1, small.y1}}) {
            int owners = 0;
            for (const auto& s : sib)
                if (s.contains(cx, cy)) ++owners;
            if (owners > 1) rep.corners_unique = false;
        }
        // covered => the intersection rectangles tile the square
        RectRegion hit_region{hits};
        if (hit_region.covers(small)) {
            double sum = 0.0;
            for (const auto& h : hits) sum += h.area();
            if (std::fabs(sum - small.area()) > 1e-9 * small.area())
                rep.decomposition_ok = false;
        }
        ++rep.trials;
    }
    rep.pass = rep.max_meets <= 4 && rep.corners_unique && rep.decomposition_ok;
    return rep;
}

/// Composed top-coordinate retained/removed regions for one parent fiber
/// square (exercises the removed-region nesting as actual geometry).
struct InstanceRegions {
    RectRegion retained; // child squares kept by the margin rule
    RectRegion removed;  // child squares poking out of the parent
};

inline InstanceRegions instance_regions(const TowerModel& model, int parent_level_1based,
                                        int parent_class, cplx parent_center_physical) {
    const int i = parent_level_1based - 1;
    if (i < 1) throw std::invalid_argument("instance_regions: need a level above the bottom");
    const auto& cl = model.levels[i].classes[parent_class];
    const double a_child = model.levels[i - 1].a;
    const double C = model.levels[i].a / a_child;
    InstanceRegions out;
    for (cplx p : cl.config.points) {
        const Rect r = Rect::square(parent_center_physical + p * a_child, a_child);
        if (norm_inf(p) <= C - 1.0)
            out.retained.add(r);
        else
            out.removed.add(r);
    }
    return out;
}

} // namespace holoweld
