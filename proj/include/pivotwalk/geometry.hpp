#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace pw {

// Constant ladder for the hyperbolic branch, all derived from the gluing
// bound C0 and the hyperbolicity constant delta.
struct GromovConstants {
    double delta = 0;
    double C0 = 0;
    double D0 = 0;
    double E0 = 0;
    double F0 = 0;
    double G0 = 0;
    double L0 = 0;
    // Length thresholds attached to the E, F and G steps.
    double L1 = 0, L2 = 0, L3 = 0;
    // Quasi-geodesic additive constant for the concatenated pivot path.
    double D3 = 0;

    // Smallest admissible L0 for the given ladder.
    double required_L0() const;
    // Throws std::logic_error naming the first broken relation.
    void check() const;

    // L0 defaults to required_L0(); a larger value may be requested.
    static GromovConstants from(double C0, double delta, std::optional<double> L0 = std::nullopt);
};

template <class P>
struct Segment {
    P initial;
    P terminal;
};

template <class Space>
using SegmentOf = Segment<typename Space::Point>;

// Strict "< D"; on floating models the margin 1e-9 keeps results stable.
template <class Space>
bool below(const Space& space, double value, double D) {
    return space.exact() ? value < D : value < D - 1e-9;
}

template <class Space>
bool same_point(const Space& space, const typename Space::Point& x, const typename Space::Point& y) {
    double d = space.dist(x, y);
    return space.exact() ? d == 0 : d <= 1e-9;
}

// (y, z)_x
template <class Space>
double gromov_product(const Space& space, const typename Space::Point& x, const typename Space::Point& y,
                      const typename Space::Point& z) {
    return 0.5 * (space.dist(x, y) + space.dist(x, z) - space.dist(y, z));
}

template <class Space>
double segment_length(const Space& space, const SegmentOf<Space>& s) {
    return space.dist(s.initial, s.terminal);
}

template <class Space>
bool check_four_point(const Space& space, const typename Space::Point& x, const typename Space::Point& y,
                      const typename Space::Point& z, const typename Space::Point& w, double delta) {
    double lhs = gromov_product(space, w, x, y);
    double rhs = std::min(gromov_product(space, w, x, z), gromov_product(space, w, y, z)) - delta;
    return space.exact() ? lhs >= rhs : lhs >= rhs - 1e-9;
}

template <class Space>
bool is_witnessed(const Space& space, const SegmentOf<Space>& seg, const std::vector<SegmentOf<Space>>& chain,
                  double D) {
    if (chain.empty()) throw std::invalid_argument("empty witness chain");
    const std::size_t n = chain.size();
    auto x = [&](std::size_t i) -> const typename Space::Point& {
        if (i == 0) return seg.initial;
        if (i == n + 1) return seg.terminal;
        return chain[i - 1].initial;
    };
    auto y = [&](std::size_t i) -> const typename Space::Point& {
        if (i == 0) return seg.initial;
        if (i == n + 1) return seg.terminal;
        return chain[i - 1].terminal;
    };
    for (std::size_t i = 1; i <= n; ++i) {
        if (!below(space, gromov_product(space, x(i), x(i - 1), x(i + 1)), D)) return false;
        if (!below(space, gromov_product(space, y(i), y(i - 1), y(i + 1)), D)) return false;
        if (!below(space, gromov_product(space, x(i), y(i - 1), y(i)), D)) return false;
        if (!below(space, gromov_product(space, y(i), x(i), x(i + 1)), D)) return false;
    }
    return true;
}

// Two-segment witnessing, the only form the pivot search needs.
template <class Space>
bool is_witnessed(const Space& space, const SegmentOf<Space>& seg, const SegmentOf<Space>& first,
                  const SegmentOf<Space>& second, double D) {
    return is_witnessed(space, seg, std::vector<SegmentOf<Space>>{first, second}, D);
}

template <class Space>
bool is_glued(const Space& space, const SegmentOf<Space>& g1, const SegmentOf<Space>& g2, double C) {
    if (!same_point(space, g1.initial, g2.initial)) return false;
    return below(space, gromov_product(space, g1.initial, g1.terminal, g2.terminal), C);
}

template <class Space>
struct AlignmentResult {
    bool aligned = false;
    std::vector<typename Space::Point> loci;
    std::string failure;
    explicit operator bool() const { return aligned; }
};

namespace detail {

// Index i runs over 1..N; gamma_i or eta_i may be absent at the ends.
// Present pairs must be C-glued at a common point p_i; consecutive loci
// [p_{i-1}, p_i] must be D-witnessed by (gamma_{i-1}, eta_i).
template <class Space>
AlignmentResult<Space> check_chain(const Space& space,
                                   const std::vector<std::optional<SegmentOf<Space>>>& gammas,
                                   const std::vector<std::optional<SegmentOf<Space>>>& etas, double C,
                                   double D) {
    AlignmentResult<Space> r;
    const std::size_t N = gammas.size();
    for (std::size_t i = 0; i < N; ++i) {
        const auto& g = gammas[i];
        const auto& e = etas[i];
        if (g && e) {
            SegmentOf<Space> back{e->terminal, e->initial};
            if (!is_glued(space, *g, back, C)) {
                r.failure = "gluing fails at " + std::to_string(i + 1);
                return r;
            }
        }
        r.loci.push_back(g ? g->initial : e->terminal);
    }
    for (std::size_t i = 1; i < N; ++i) {
        if (!gammas[i - 1] || !etas[i]) throw std::invalid_argument("chain is missing a witnessing segment");
        SegmentOf<Space> seg{r.loci[i - 1], r.loci[i]};
        if (!is_witnessed(space, seg, *gammas[i - 1], *etas[i], D)) {
            r.failure = "witnessing fails between " + std::to_string(i) + " and " + std::to_string(i + 1);
            return r;
        }
    }
    r.aligned = true;
    return r;
}

template <class Space>
std::vector<std::optional<SegmentOf<Space>>> wrap(const std::vector<SegmentOf<Space>>& v, std::size_t lead,
                                                  std::size_t total) {
    std::vector<std::optional<SegmentOf<Space>>> out(total);
    for (std::size_t i = 0; i < v.size(); ++i) out[lead + i] = v[i];
    return out;
}

}  // namespace detail

template <class Space>
AlignmentResult<Space> is_aligned(const Space& space, const std::vector<SegmentOf<Space>>& gammas,
                                  const std::vector<SegmentOf<Space>>& etas, double C, double D) {
    if (gammas.size() != etas.size()) throw std::invalid_argument("gamma and eta chains differ in length");
    if (gammas.empty()) throw std::invalid_argument("empty chain");
    const std::size_t N = gammas.size();
    return detail::check_chain(space, detail::wrap<Space>(gammas, 0, N), detail::wrap<Space>(etas, 0, N), C, D);
}

// [x, y] marked with gamma_1..N, eta_1..N.
template <class Space>
bool is_marked(const Space& space, const SegmentOf<Space>& seg, const std::vector<SegmentOf<Space>>& gammas,
               const std::vector<SegmentOf<Space>>& etas, double C, double D) {
    auto r = is_aligned(space, gammas, etas, C, D);
    if (!r) return false;
    const auto& e1 = etas.front();
    const auto& gN = gammas.back();
    return below(space, gromov_product(space, e1.initial, e1.terminal, seg.initial), C) &&
           below(space, gromov_product(space, gN.terminal, gN.initial, seg.terminal), C);
}

// [p_1, y] with gamma_1..N and eta_2..N.
template <class Space>
bool is_head_marked(const Space& space, const SegmentOf<Space>& seg, const std::vector<SegmentOf<Space>>& gammas,
                    const std::vector<SegmentOf<Space>>& etas, double C, double D) {
    if (gammas.empty()) throw std::invalid_argument("empty chain");
    const std::size_t N = gammas.size();
    if (etas.size() + 1 != N) throw std::invalid_argument("head marking needs one fewer eta than gamma");
    auto r = detail::check_chain(space, detail::wrap<Space>(gammas, 0, N), detail::wrap<Space>(etas, 1, N), C, D);
    if (!r) return false;
    if (!same_point(space, seg.initial, r.loci.front())) return false;
    const auto& gN = gammas.back();
    return below(space, gromov_product(space, gN.terminal, gN.initial, seg.terminal), C);
}

// [x, p_N] with gamma_1..N-1 and eta_1..N.
template <class Space>
bool is_tail_marked(const Space& space, const SegmentOf<Space>& seg, const std::vector<SegmentOf<Space>>& gammas,
                    const std::vector<SegmentOf<Space>>& etas, double C, double D) {
    if (etas.empty()) throw std::invalid_argument("empty chain");
    const std::size_t N = etas.size();
    if (gammas.size() + 1 != N) throw std::invalid_argument("tail marking needs one fewer gamma than eta");
    auto r = detail::check_chain(space, detail::wrap<Space>(gammas, 0, N), detail::wrap<Space>(etas, 0, N), C, D);
    if (!r) return false;
    if (!same_point(space, seg.terminal, r.loci.back())) return false;
    const auto& e1 = etas.front();
    return below(space, gromov_product(space, e1.initial, e1.terminal, seg.initial), C);
}

// [p_1, p_N] with gamma_1..N-1 and eta_2..N.
template <class Space>
bool is_fully_marked(const Space& space, const SegmentOf<Space>& seg, const std::vector<SegmentOf<Space>>& gammas,
                     const std::vector<SegmentOf<Space>>& etas, double C, double D) {
    if (gammas.empty()) throw std::invalid_argument("empty chain");
    if (gammas.size() != etas.size()) throw std::invalid_argument("full marking needs equal chain lengths");
    const std::size_t N = gammas.size() + 1;
    auto r = detail::check_chain(space, detail::wrap<Space>(gammas, 0, N), detail::wrap<Space>(etas, 1, N), C, D);
    if (!r) return false;
    return same_point(space, seg.initial, r.loci.front()) && same_point(space, seg.terminal, r.loci.back());
}

struct TripleBound {
    double value = 0;
    std::size_t i = 0, j = 0, k = 0;
};

// max over i < j < k of (p_i, p_k)_{p_j}, with the maximizing triple.
template <class Space>
TripleBound chain_product_bound(const Space& space, const std::vector<typename Space::Point>& pts) {
    TripleBound best;
    const std::size_t n = pts.size();
    if (n < 3) return best;
    std::vector<double> d(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) d[i * n + j] = d[j * n + i] = space.dist(pts[i], pts[j]);
    best.value = -1;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            for (std::size_t k = j + 1; k < n; ++k) {
                double v = 0.5 * (d[j * n + i] + d[j * n + k] - d[i * n + k]);
                if (v > best.value) best = {v, i, j, k};
            }
    return best;
}

}  // namespace pw
