#include "pivotwalk/stats.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <thread>
#include <tuple>

namespace pw {

namespace {

constexpr double kZ95 = 1.959963984540054;

template <class E>
struct Walker;

template <>
struct Walker<Word> {
    RunWord w;
    void push(const Word& g) { w.push(g); }
    double d() const { return static_cast<double>(w.length()); }
    double tau() const { return static_cast<double>(w.cyclic_length()); }
    static constexpr double tol = 0.0;
};

// Product kept as e^L times a matrix with largest entry 1; the factors have
// determinant 1, so the product does too and is never renormalized by its
// computed determinant (which cancels to noise after a few dozen steps).
template <>
struct Walker<Moebius> {
    double e[4] = {1, 0, 0, 1};
    double L = 0;
    void push(const Moebius& g) {
        double r[4] = {e[0] * g.a + e[1] * g.c, e[0] * g.b + e[1] * g.d, e[2] * g.a + e[3] * g.c,
                       e[2] * g.b + e[3] * g.d};
        double m = std::max({std::abs(r[0]), std::abs(r[1]), std::abs(r[2]), std::abs(r[3])});
        if (!(m > 0) || !std::isfinite(m)) throw std::overflow_error("plane walk left the representable range");
        for (int k = 0; k < 4; ++k) e[k] = r[k] / m;
        L += std::log(m);
    }
    // cosh d = |w|^2 / 2 for the base point i.
    double d() const {
        const double S = e[0] * e[0] + e[1] * e[1] + e[2] * e[2] + e[3] * e[3];
        const double lg = 2 * L + std::log(S / 2);
        return lg > 20 ? lg + std::log(2.0) : std::acosh(std::max(1.0, std::exp(lg)));
    }
    // 2 cosh(tau / 2) = |trace|.
    double tau() const {
        const double t = std::abs(e[0] + e[3]);
        if (t == 0) return 0;
        const double lg = L + std::log(t / 2);
        if (lg <= 0) return 0;
        return lg > 20 ? 2 * (lg + std::log(2.0)) : 2 * std::acosh(std::exp(lg));
    }
    static constexpr double tol = 1e-9;
};

template <class E>
double endpoint_distance(const StepDistribution<E>& mu, std::size_t n, Rng& rng) {
    Walker<E> w;
    for (std::size_t k = 0; k < n; ++k) w.push(mu.support()[mu.sample(rng)]);
    return w.d();
}

double iqr(const std::vector<double>& xs) { return quantile(xs, 0.75) - quantile(xs, 0.25); }

double normal_cdf(double x, double sigma) { return 0.5 * std::erfc(-x / (sigma * std::sqrt(2.0))); }

}  // namespace

Estimate mean_estimate(const std::vector<double>& xs, std::uint64_t seed) {
    Estimate e;
    e.trials = xs.size();
    e.seed = seed;
    if (xs.empty()) return e;
    double s = 0;
    for (double x : xs) s += x;
    e.value = s / static_cast<double>(xs.size());
    if (xs.size() > 1) {
        double v = 0;
        for (double x : xs) v += (x - e.value) * (x - e.value);
        v /= static_cast<double>(xs.size() - 1);
        e.half_width = kZ95 * std::sqrt(v / static_cast<double>(xs.size()));
    }
    return e;
}

double quantile(std::vector<double> xs, double p) {
    if (xs.empty()) throw std::invalid_argument("quantile of an empty sample");
    std::sort(xs.begin(), xs.end());
    double h = (static_cast<double>(xs.size()) - 1) * p;
    auto lo = static_cast<std::size_t>(std::floor(h));
    auto hi = std::min(lo + 1, xs.size() - 1);
    return xs[lo] + (h - static_cast<double>(lo)) * (xs[hi] - xs[lo]);
}

Fit linear_fit(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size()) throw std::invalid_argument("fit: size mismatch");
    Fit f;
    f.points = x.size();
    if (x.size() < 2) return f;
    const double n = static_cast<double>(x.size());
    double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
    double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
    double sxx = 0, sxy = 0, syy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
        syy += (y[i] - my) * (y[i] - my);
    }
    if (sxx == 0) return f;
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    f.r2 = syy == 0 ? 1.0 : sxy * sxy / (sxx * syy);
    if (x.size() > 2) {
        double rss = std::max(0.0, syy - f.slope * sxy);
        f.slope_se = std::sqrt(rss / (n - 2) / sxx);
    }
    return f;
}

void parallel_for(std::size_t count, unsigned threads, const std::function<void(std::size_t)>& f) {
    if (threads <= 1 || count <= 1) {
        for (std::size_t i = 0; i < count; ++i) f(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr err;
    std::atomic<bool> failed{false};
    std::vector<std::thread> pool;
    const unsigned k = static_cast<unsigned>(std::min<std::size_t>(threads, count));
    for (unsigned w = 0; w < k; ++w)
        pool.emplace_back([&, w] {
            (void)w;
            for (std::size_t i; !failed && (i = next++) < count;) {
                try {
                    f(i);
                } catch (...) {
                    if (!failed.exchange(true)) err = std::current_exception();
                }
            }
        });
    for (auto& t : pool) t.join();
    if (err) std::rethrow_exception(err);
}

template <class E>
Estimate estimate_drift(const StepDistribution<E>& mu, std::size_t n, std::size_t trials, std::uint64_t seed,
                        unsigned threads, std::uint64_t stream) {
    if (n < 1 || trials < 1) throw std::invalid_argument("n and trials must be positive");
    std::vector<double> v(trials);
    parallel_for(trials, threads, [&](std::size_t i) {
        Rng rng(seed, stream, i);
        v[i] = endpoint_distance(mu, n, rng) / static_cast<double>(n);
    });
    return mean_estimate(v, seed);
}

template <class E>
Estimate estimate_variance(const StepDistribution<E>& mu, std::size_t n, std::size_t trials, std::uint64_t seed,
                           unsigned threads) {
    if (n < 1 || trials < 2) throw std::invalid_argument("need n >= 1 and at least two trials");
    std::vector<double> v(trials);
    parallel_for(trials, threads, [&](std::size_t i) {
        Rng rng(seed, streams::variance, i);
        v[i] = endpoint_distance(mu, n, rng);
    });
    const double T = static_cast<double>(trials);
    double m = std::accumulate(v.begin(), v.end(), 0.0) / T;
    double m2 = 0, m4 = 0;
    for (double x : v) {
        double c = (x - m) * (x - m);
        m2 += c;
        m4 += c * c;
    }
    double s2 = m2 / (T - 1);
    m4 /= T;
    Estimate e;
    e.trials = trials;
    e.seed = seed;
    e.value = s2 / static_cast<double>(n);
    e.half_width = kZ95 * std::sqrt(std::max(0.0, m4 - s2 * s2) / T) / static_cast<double>(n);
    return e;
}

template <class E>
PathSample sample_checkpoints(const StepDistribution<E>& mu, const std::vector<std::size_t>& checkpoints, Rng& rng) {
    PathSample p;
    if (checkpoints.empty()) return p;
    for (std::size_t i = 1; i < checkpoints.size(); ++i)
        if (checkpoints[i] <= checkpoints[i - 1]) throw std::invalid_argument("checkpoints must increase");
    Walker<E> w;
    std::size_t next = 0;
    auto record = [&](std::size_t k) {
        while (next < checkpoints.size() && checkpoints[next] == k) {
            p.n.push_back(k);
            p.d.push_back(w.d());
            p.tau.push_back(w.tau());
            ++next;
        }
    };
    record(0);
    for (std::size_t k = 1; k <= checkpoints.back(); ++k) {
        w.push(mu.support()[mu.sample(rng)]);
        double d = w.d(), t = w.tau();
        if (t > d + Walker<E>::tol * (1 + d)) ++p.tau_violations;
        record(k);
    }
    return p;
}

double LL(double n) { return n >= 3 ? std::log(std::log(n)) : 1.0; }
double lil_alpha(double n) { return std::sqrt(2 * n * LL(n)); }
double lil_beta(double n) { return std::sqrt(n / LL(n)); }

namespace {
Series with_extrema(Series s) {
    double hi = -std::numeric_limits<double>::infinity(), lo = std::numeric_limits<double>::infinity();
    for (double v : s.value) {
        hi = std::max(hi, v);
        lo = std::min(lo, v);
        s.running_max.push_back(hi);
        s.running_min.push_back(lo);
    }
    return s;
}
}  // namespace

Series log_deviation_series(const PathSample& p) {
    Series s;
    s.n = p.n;
    for (std::size_t i = 0; i < p.n.size(); ++i) s.value.push_back(p.d[i] - p.tau[i]);
    return with_extrema(std::move(s));
}

Series lil_series(const PathSample& p, double lambda, bool use_tau) {
    Series s;
    s.n = p.n;
    for (std::size_t i = 0; i < p.n.size(); ++i) {
        double n = static_cast<double>(p.n[i]);
        double x = use_tau ? p.tau[i] : p.d[i];
        s.value.push_back(n == 0 ? 0.0 : (x - lambda * n) / lil_alpha(n));
    }
    return with_extrema(std::move(s));
}

double ks_normal(std::vector<double> xs, double sigma) {
    if (xs.empty()) throw std::invalid_argument("ks of an empty sample");
    if (!(sigma > 0)) throw std::invalid_argument("ks needs sigma > 0");
    std::sort(xs.begin(), xs.end());
    const double n = static_cast<double>(xs.size());
    double D = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        double F = normal_cdf(xs[i], sigma);
        D = std::max({D, F - static_cast<double>(i) / n, static_cast<double>(i + 1) / n - F});
    }
    return D;
}

template <class E>
CltReport clt_samples(const StepDistribution<E>& mu, std::size_t n, std::size_t trials, std::uint64_t seed,
                      unsigned threads, std::size_t lambda_trials) {
    if (n < 1 || trials < 2) throw std::invalid_argument("need n >= 1 and at least two trials");
    CltReport r;
    r.n = n;
    r.trials = trials;
    r.seed = seed;
    r.arithmetic_warning = !is_non_arithmetic(mu, 3).found;
    r.lambda = estimate_drift(mu, n, lambda_trials ? lambda_trials : trials, seed, threads, streams::lambda);
    r.displacement.resize(trials);
    r.translation.resize(trials);
    const double rn = std::sqrt(static_cast<double>(n));
    const double lam = r.lambda.value;
    parallel_for(trials, threads, [&](std::size_t i) {
        Rng rng(seed, streams::clt, i);
        Walker<E> w;
        for (std::size_t k = 0; k < n; ++k) w.push(mu.support()[mu.sample(rng)]);
        r.displacement[i] = (w.d() - lam * static_cast<double>(n)) / rn;
        r.translation[i] = (w.tau() - lam * static_cast<double>(n)) / rn;
    });
    double m = std::accumulate(r.displacement.begin(), r.displacement.end(), 0.0) / static_cast<double>(trials);
    double v = 0;
    for (double x : r.displacement) v += (x - m) * (x - m);
    r.sigma = std::sqrt(v / static_cast<double>(trials - 1));
    for (std::size_t i = 0; i < trials; ++i)
        r.max_pair_diff = std::max(r.max_pair_diff, std::abs(r.displacement[i] - r.translation[i]));
    r.pair_bound = 10 * std::log(static_cast<double>(n)) / rn;
    if (r.sigma > 0) {
        r.ks_displacement = ks_normal(r.displacement, r.sigma);
        r.ks_translation = ks_normal(r.translation, r.sigma);
    } else {
        r.ks_displacement = r.ks_translation = 1.0;
    }
    return r;
}

HeavyTailModel::HeavyTailModel(double q, std::uint64_t T, double heavy_mass) : q_(q), T_(T), heavy_mass_(heavy_mass) {
    if (!(q > 1)) throw std::invalid_argument("tail exponent must exceed 1");
    if (T < 1) throw std::invalid_argument("truncation level must be positive");
    if (!(heavy_mass > 0 && heavy_mass < 1)) throw std::invalid_argument("heavy mass must lie in (0, 1)");
    cumulative_.resize(T);
    double acc = 0;
    for (std::uint64_t k = 1; k <= T; ++k) cumulative_[k - 1] = (acc += std::pow(static_cast<double>(k), -q));
    for (double& c : cumulative_) c /= acc;
    cumulative_.back() = 1.0;
}

std::pair<int, std::uint64_t> HeavyTailModel::sample(Rng& rng) const {
    double u = rng.uniform();
    if (u >= heavy_mass_) return {rng.below(2) ? 2 : -2, 1};
    double v = rng.uniform();
    auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), v);
    auto k = static_cast<std::uint64_t>(it - cumulative_.begin()) + 1;
    return {rng.below(2) ? 1 : -1, std::min(k, T_)};
}

namespace {

template <class Push>
std::pair<double, double> spread_one(std::size_t n, std::size_t g, std::uint64_t seed, std::size_t i, Push push) {
    Rng rng(seed, trial_stream(streams::converse, g), i);
    RunWord w;
    for (std::size_t k = 0; k < n; ++k) push(w, rng);
    return {static_cast<double>(w.length()), static_cast<double>(w.cyclic_length())};
}

auto heavy_push(const HeavyTailModel& heavy) {
    return [&heavy](RunWord& w, Rng& rng) {
        auto [l, k] = heavy.sample(rng);
        w.push(l, k);
    };
}

auto law_push(const WordDistribution& mu) {
    return [&mu](RunWord& w, Rng& rng) { w.push(mu.support()[mu.sample(rng)]); };
}

template <class Push>
SpreadReport spread_growth_impl(const std::vector<std::size_t>& grid, std::size_t trials, std::uint64_t seed,
                                unsigned threads, Push push) {
    if (grid.size() < 2) throw std::invalid_argument("spread growth needs at least two n");
    if (trials < 4) throw std::invalid_argument("spread growth needs at least four trials");
    SpreadReport r;
    std::vector<double> lx, ld, lt;
    for (std::size_t g = 0; g < grid.size(); ++g) {
        const std::size_t n = grid[g];
        std::vector<double> d(trials), t(trials);
        parallel_for(trials, threads, [&](std::size_t i) { std::tie(d[i], t[i]) = spread_one(n, g, seed, i, push); });
        // The IQR does not see the centring by the median.
        const double rn = std::sqrt(static_cast<double>(n));
        SpreadPoint p{n, iqr(d) / rn, iqr(t) / rn};
        r.points.push_back(p);
        lx.push_back(std::log(static_cast<double>(n)));
        ld.push_back(std::log(p.iqr_d));
        lt.push_back(std::log(p.iqr_tau));
    }
    r.fit_d = linear_fit(lx, ld);
    r.fit_tau = linear_fit(lx, lt);
    return r;
}

}  // namespace

SpreadReport spread_growth(const HeavyTailModel& heavy, const std::vector<std::size_t>& grid, std::size_t trials,
                           std::uint64_t seed, unsigned threads) {
    return spread_growth_impl(grid, trials, seed, threads, heavy_push(heavy));
}

SpreadReport spread_growth(const WordDistribution& mu, const std::vector<std::size_t>& grid, std::size_t trials,
                           std::uint64_t seed, unsigned threads) {
    return spread_growth_impl(grid, trials, seed, threads, law_push(mu));
}

std::pair<double, double> spread_trial(const HeavyTailModel& heavy, std::size_t n, std::size_t g, std::uint64_t seed,
                                       std::size_t i) {
    return spread_one(n, g, seed, i, heavy_push(heavy));
}

std::pair<double, double> spread_trial(const WordDistribution& mu, std::size_t n, std::size_t g, std::uint64_t seed,
                                       std::size_t i) {
    return spread_one(n, g, seed, i, law_push(mu));
}

ConverseReport converse_diagnostic(double q, std::uint64_t T, const WordDistribution& control,
                                   const std::vector<std::size_t>& grid, std::size_t trials, std::uint64_t seed,
                                   const std::vector<std::uint64_t>& sweep, unsigned threads) {
    ConverseReport r;
    r.heavy = spread_growth(HeavyTailModel(q, T), grid, trials, seed, threads);
    r.control = spread_growth(control, grid, trials, seed, threads);
    for (auto t : sweep) {
        double slope = t == T ? r.heavy.fit_d.slope : spread_growth(HeavyTailModel(q, t), grid, trials, seed, threads).fit_d.slope;
        r.truncation_sweep.emplace_back(t, slope);
    }
    return r;
}

DyadicDecomposition dyadic_decompose(const std::function<double(std::size_t, std::size_t)>& dist,
                                     std::size_t path_length, int m, int k_max, double tol) {
    if (m < 0 || k_max < 0 || m + k_max > 40) throw std::invalid_argument("bad dyadic exponents");
    const std::size_t M = std::size_t{1} << m;
    if (path_length < (std::size_t{1} << (m + k_max))) throw std::invalid_argument("path too short for the decomposition");
    DyadicDecomposition D;
    D.m = m;
    D.k_max = k_max;
    D.Y.resize(static_cast<std::size_t>(k_max) + 1);
    D.b.resize(static_cast<std::size_t>(k_max) + 1);
    for (int k = 0; k <= k_max; ++k) {
        const std::size_t step = (std::size_t{1} << k) * M;
        const std::size_t count = std::size_t{1} << (k_max - k);
        auto& Y = D.Y[static_cast<std::size_t>(k)];
        auto& b = D.b[static_cast<std::size_t>(k)];
        for (std::size_t i = 1; i <= count; ++i) Y.push_back(dist(step * (i - 1), step * i));
        for (std::size_t i = 1; i < count; ++i) {
            // (w_{i-1}, w_{i+1})_{w_i}
            b.push_back(0.5 * (Y[i - 1] + Y[i] - dist(step * (i - 1), step * (i + 1))));
        }
    }
    for (int k = 0; k < k_max; ++k) {
        const auto& Y = D.Y[static_cast<std::size_t>(k)];
        const auto& b = D.b[static_cast<std::size_t>(k)];
        const auto& Y1 = D.Y[static_cast<std::size_t>(k) + 1];
        for (std::size_t i = 1; i <= Y1.size(); ++i) {
            double err = std::abs(Y1[i - 1] - (Y[2 * i - 2] + Y[2 * i - 1] - 2 * b[2 * i - 2]));
            D.max_identity_error = std::max(D.max_identity_error, err);
            if (err > tol) ++D.identity_failures;
        }
    }
    for (int k = 1; k <= k_max; ++k) {
        double rhs = 0;
        const std::size_t width = std::size_t{1} << k;
        for (std::size_t i = 0; i < width; ++i) rhs += D.Y[0][i];
        for (int t = 0; t < k; ++t) {
            const auto& b = D.b[static_cast<std::size_t>(t)];
            for (std::size_t i = 1; i <= (std::size_t{1} << (k - t - 1)); ++i) rhs -= 2 * b[2 * i - 2];
        }
        D.max_telescoping_error = std::max(D.max_telescoping_error, std::abs(D.Y[static_cast<std::size_t>(k)][0] - rhs));
    }
    return D;
}

DyadicDecomposition dyadic_decompose(const TreeArena& arena, const std::vector<TreeArena::Node>& pos, int m,
                                     int k_max) {
    if (pos.empty()) throw std::invalid_argument("path too short for the decomposition");
    return dyadic_decompose(
        [&](std::size_t i, std::size_t j) { return static_cast<double>(arena.distance(pos[i], pos[j])); },
        pos.size() - 1, m, k_max, 0.0);
}

DyadicDecomposition dyadic_decompose(const std::vector<Plane>& pos, int m, int k_max) {
    if (pos.empty()) throw std::invalid_argument("path too short for the decomposition");
    return dyadic_decompose([&](std::size_t i, std::size_t j) { return plane_distance(pos[i], pos[j]); },
                            pos.size() - 1, m, k_max, 1e-6);
}

std::vector<double> dyadic_trial_moments(const WordDistribution& mu, int m, int k_max, std::uint64_t seed,
                                         std::size_t i) {
    Rng rng(seed, streams::dyadic, i);
    TreeArena arena(mu.support().front().rank());
    auto tokens = register_tokens(arena, mu);
    auto pos = sample_path(arena, tokens, mu, std::size_t{1} << (m + k_max), rng);
    auto D = dyadic_decompose(arena, pos, m, k_max);
    std::vector<double> out;
    for (int k = 0; k < k_max; ++k) {
        double s = 0;
        for (double b : D.b[static_cast<std::size_t>(k)]) s += b * b * b * b;
        out.push_back(s / static_cast<double>(D.b[static_cast<std::size_t>(k)].size()));
    }
    return out;
}

std::vector<Estimate> dyadic_fourth_moments(const WordDistribution& mu, int m, int k_max, std::size_t trials,
                                            std::uint64_t seed, unsigned threads) {
    std::vector<std::vector<double>> per(static_cast<std::size_t>(k_max), std::vector<double>(trials));
    parallel_for(trials, threads, [&](std::size_t i) {
        auto v = dyadic_trial_moments(mu, m, k_max, seed, i);
        for (std::size_t k = 0; k < v.size(); ++k) per[k][i] = v[k];
    });
    std::vector<Estimate> out;
    for (auto& v : per) out.push_back(mean_estimate(v, seed));
    return out;
}

double diff_ineq_simple_bound(double t, double s, double p) {
    double e = std::abs(t - s);
    if (p <= 1) return std::pow(e, p);
    return std::pow(2.0, p) * (std::pow(e, p) + std::pow(s, p - 1) * e);
}

double diff_ineq_bound(double t1, double t2, double s1, double s2, double p, double q) {
    double np = p <= 1 ? p : 1, nq = q <= 1 ? q : 1;
    double e1 = std::abs(t1 - s1), e2 = std::abs(t2 - s2);
    double A = std::pow(e1, p) + std::pow(s1, p - np) * std::pow(e1, np);
    double B = std::pow(e2, q) + std::pow(s2, q - nq) * std::pow(e2, nq);
    return std::pow(2.0, p + q) * (A + std::pow(s1, p)) * B + std::pow(2.0, p) * A * std::pow(s2, q);
}

std::vector<std::uint8_t> deviation_trial(const WordDistribution& mu, const Word& x, const std::vector<std::size_t>& ks,
                                          std::size_t horizon_mult, std::uint64_t seed, std::size_t i) {
    const std::size_t H = *std::max_element(ks.begin(), ks.end()) * horizon_mult;
    Rng rng(seed, streams::deviation, i);
    TreeArena arena(mu.support().front().rank());
    auto tokens = register_tokens(arena, mu);
    auto X = arena.from_word(x);
    auto pos = sample_path(arena, tokens, mu, H, rng);
    std::vector<std::uint8_t> hit(ks.size(), 0);
    for (std::size_t j = 0; j < ks.size(); ++j) {
        const std::size_t k = ks[j];
        const auto dk = arena.length(pos[k]);
        for (std::size_t n = k; n <= k * horizon_mult; ++n)
            if (arena.lcp(X, pos[n]) >= dk) {
                hit[j] = 1;
                break;
            }
    }
    return hit;
}

DeviationReport deviation_probability_check(const WordDistribution& mu, const Word& x,
                                            const std::vector<std::size_t>& ks, std::size_t trials,
                                            std::uint64_t seed, std::size_t horizon_mult, unsigned threads) {
    if (ks.empty()) throw std::invalid_argument("no k given");
    if (horizon_mult < 4) throw std::invalid_argument("horizon must be at least 4k");
    std::vector<std::vector<std::uint8_t>> hit(trials);
    parallel_for(trials, threads, [&](std::size_t i) { hit[i] = deviation_trial(mu, x, ks, horizon_mult, seed, i); });
    DeviationReport r;
    r.k = ks;
    r.trials = trials;
    std::vector<double> xs, ys;
    for (std::size_t j = 0; j < ks.size(); ++j) {
        std::size_t h = 0;
        for (std::size_t i = 0; i < trials; ++i) h += hit[i][j];
        r.hits.push_back(h);
        r.frequency.push_back(static_cast<double>(h) / static_cast<double>(trials));
        xs.push_back(static_cast<double>(ks[j]));
        ys.push_back(std::log((static_cast<double>(h) + 0.5) / (static_cast<double>(trials) + 1)));
    }
    r.fit = linear_fit(xs, ys);
    return r;
}

std::vector<OppositeMoment> opposite_deviation_moment(const WordDistribution& mu, double p, double K,
                                                      const std::vector<std::size_t>& horizons, std::size_t trials,
                                                      std::uint64_t seed, unsigned threads) {
    if (horizons.empty()) throw std::invalid_argument("no horizon given");
    if (!std::is_sorted(horizons.begin(), horizons.end())) throw std::invalid_argument("horizons must increase");
    const std::size_t H = horizons.back();
    std::vector<std::vector<double>> mx(horizons.size(), std::vector<double>(trials));
    parallel_for(trials, threads, [&](std::size_t i) {
        Rng rng(seed, streams::opposite, i);
        TreeArena arena(mu.support().front().rank());
        auto tokens = register_tokens(arena, mu);
        TreeArena::Node f = TreeArena::root, bw = TreeArena::root;
        double best = 0;
        std::size_t h = 0;
        for (std::size_t n = 1; n <= H; ++n) {
            f = arena.push(f, tokens[mu.sample(rng)]);
            bw = arena.push(bw, TreeArena::inverse_token(tokens[mu.sample(rng)]));
            best = std::max(best, static_cast<double>(arena.lcp(f, bw)));
            while (h < horizons.size() && horizons[h] == n) mx[h++][i] = best;
        }
    });
    std::vector<OppositeMoment> out;
    for (std::size_t h = 0; h < horizons.size(); ++h) {
        std::vector<double> pw_(trials), ex(trials);
        for (std::size_t i = 0; i < trials; ++i) {
            pw_[i] = std::pow(mx[h][i], 2 * p);
            ex[i] = std::exp(K * mx[h][i]);
        }
        out.push_back({horizons[h], mean_estimate(pw_, seed), mean_estimate(ex, seed)});
    }
    return out;
}

TrackingReport tracking_series(const Trajectory& t, const PivotRecord& r, std::size_t K, Rng& pair_rng,
                               std::size_t pair_samples) {
    if (K > t.n()) throw std::invalid_argument("tracking range exceeds the trajectory");
    TreeArena& arena = *t.arena;
    const GromovConstants& c = r.constants();
    TrackingReport rep;
    rep.mult = 1 + 8 * c.F0 / c.L0;
    rep.add = 2 * c.F0 + 2 * c.D3;
    rep.gamma.push_back(TreeArena::root);
    for (auto i : r.at_time(t.n()).P) {
        rep.gamma.push_back(r.loci(i).y0m);
        rep.gamma.push_back(r.loci(i).y0p);
    }
    if (rep.gamma.size() < 3) throw std::runtime_error("fewer than 2 pivotal loci");
    const auto& g = rep.gamma;
    const std::size_t S = g.size() - 1;  // segments [g_j, g_{j+1}]
    std::vector<double> len(S), lo(S), hi(S);
    rep.arc.push_back(0);
    for (std::size_t j = 0; j < S; ++j) {
        len[j] = static_cast<double>(arena.distance(g[j], g[j + 1]));
        lo[j] = static_cast<double>(arena.lcp(g[j], g[j + 1]));
        hi[j] = static_cast<double>(std::max(arena.length(g[j]), arena.length(g[j + 1])));
        rep.arc.push_back(rep.arc.back() + len[j]);
    }
    auto seg_dist = [&](TreeArena::Node p, std::size_t j) {
        return 0.5 * (static_cast<double>(arena.distance(p, g[j])) + static_cast<double>(arena.distance(p, g[j + 1])) -
                      len[j]);
    };
    // Depth along a segment ranges over [lo, hi], which bounds the distance from below.
    std::vector<std::size_t> order(S);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return lo[a] < lo[b]; });
    std::vector<double> sorted_lo(S), prefmax_hi(S);
    for (std::size_t q = 0; q < S; ++q) {
        sorted_lo[q] = lo[order[q]];
        prefmax_hi[q] = std::max(q ? prefmax_hi[q - 1] : -1.0, hi[order[q]]);
    }
    std::size_t guess = 0;
    rep.dist.resize(K + 1);
    for (std::size_t k = 0; k <= K; ++k) {
        const auto p = t.pos[k];
        const double h = static_cast<double>(arena.length(p));
        double best = seg_dist(p, guess);
        std::size_t q = static_cast<std::size_t>(std::lower_bound(sorted_lo.begin(), sorted_lo.end(), h + best) -
                                                 sorted_lo.begin());
        while (q > 0 && best > 0) {
            --q;
            if (prefmax_hi[q] <= h - best) break;
            const std::size_t j = order[q];
            if (std::max({0.0, lo[j] - h, h - hi[j]}) >= best) continue;
            double v = seg_dist(p, j);
            if (v < best) {
                best = v;
                guess = j;
            }
        }
        rep.dist[k] = best;
    }

    // Quasi-geodesic inequality for pairs of points of Gamma, half of them marked points.
    const double A = rep.arc.back();
    auto point_at = [&](double u) {
        std::size_t j = static_cast<std::size_t>(std::upper_bound(rep.arc.begin(), rep.arc.end(), u) - rep.arc.begin());
        j = std::min(j == 0 ? 0 : j - 1, S - 1);
        auto s = static_cast<std::uint64_t>(u - rep.arc[j]);
        const auto x = g[j], y = g[j + 1];
        const auto l = arena.lcp(x, y), lx = arena.length(x);
        if (s <= lx - l) return arena.prefix(x, lx - s);
        return arena.prefix(y, l + (s - (lx - l)));
    };
    for (std::size_t s = 0; s < pair_samples; ++s) {
        double u1, u2;
        if (s % 2 == 0) {
            u1 = rep.arc[pair_rng.below(rep.arc.size())];
            u2 = rep.arc[pair_rng.below(rep.arc.size())];
        } else {
            u1 = static_cast<double>(pair_rng.below(static_cast<std::uint64_t>(A) + 1));
            u2 = static_cast<double>(pair_rng.below(static_cast<std::uint64_t>(A) + 1));
        }
        if (u1 > u2) std::swap(u1, u2);
        const double d = static_cast<double>(arena.distance(point_at(u1), point_at(u2)));
        const double excess = (u2 - u1) - (rep.mult * d + rep.add);
        rep.max_excess = s == 0 ? excess : std::max(rep.max_excess, excess);
        if (excess > 0) ++rep.quasi_violations;
        ++rep.pairs_checked;
    }
    return rep;
}

double PivotStats::sigma(double p) const {
    return steps ? std::sqrt(p * (1 - p) / static_cast<double>(steps)) : 0;
}

PivotStats pivot_stats(const std::shared_ptr<const DecomposedModel>& model, const GromovConstants& c, std::size_t n, std::size_t trials,
                       std::uint64_t seed, unsigned threads) {
    std::vector<PivotStats> per(trials);
    parallel_for(trials, threads, [&](std::size_t i) {
        auto t = sample_trajectory(model, n, seed, trial_stream(streams::pivot_stats, i));
        PivotRecord r(t, c);
        PivotStats& s = per[i];
        for (const auto& h : r.history()) {
            ++s.steps;
            if (h.increment == 1) ++s.gains;
            for (int j = 0; j < 3; ++j)
                if (h.increment < -j) ++s.drops[j];
            s.max_depth = std::max(s.max_depth, h.backtrack_depth);
            ++s.depth_histogram[h.backtrack_depth];
        }
    });
    PivotStats all;
    for (const auto& s : per) {
        all.steps += s.steps;
        all.gains += s.gains;
        for (int j = 0; j < 3; ++j) all.drops[j] += s.drops[j];
        all.max_depth = std::max(all.max_depth, s.max_depth);
        for (auto [d, c] : s.depth_histogram) all.depth_histogram[d] += c;
    }
    return all;
}

DecayReport pivot_decay(const std::shared_ptr<const DecomposedModel>& model, const GromovConstants& c,
                        const std::vector<std::size_t>& blocks,
                        std::size_t trials, std::uint64_t seed, double kappa, unsigned threads) {
    if (blocks.empty() || !std::is_sorted(blocks.begin(), blocks.end()) || blocks.front() < 1)
        throw std::invalid_argument("block grid must be positive and increasing");
    const std::size_t L = static_cast<std::size_t>(model->block_length());
    std::vector<std::vector<double>> sizes(blocks.size(), std::vector<double>(trials));
    parallel_for(trials, threads, [&](std::size_t i) {
        auto t = sample_trajectory(model, blocks.back() * L, seed, trial_stream(streams::decay, i));
        PivotRecord r(t, c);
        for (std::size_t g = 0; g < blocks.size(); ++g) sizes[g][i] = static_cast<double>(r.at_time(blocks[g] * L).P.size());
    });
    DecayReport rep;
    rep.blocks = blocks;
    rep.trials = trials;
    rep.density = std::accumulate(sizes.back().begin(), sizes.back().end(), 0.0) / static_cast<double>(trials) /
                  static_cast<double>(blocks.back());
    rep.kappa = kappa > 0 ? kappa : rep.density / 2;
    std::vector<double> xs, ys;
    for (std::size_t g = 0; g < blocks.size(); ++g) {
        const double cut = rep.kappa * static_cast<double>(blocks[g]);
        std::size_t h = 0;
        for (double s : sizes[g]) h += s <= cut;
        rep.hits.push_back(h);
        rep.probability.push_back(static_cast<double>(h) / static_cast<double>(trials));
        if (h > 0) {
            xs.push_back(static_cast<double>(blocks[g]));
            ys.push_back(std::log(rep.probability.back()));
        }
    }
    rep.fit = linear_fit(xs, ys);
    return rep;
}

template Estimate estimate_drift(const StepDistribution<Word>&, std::size_t, std::size_t, std::uint64_t, unsigned,
                                 std::uint64_t);
template Estimate estimate_drift(const StepDistribution<Moebius>&, std::size_t, std::size_t, std::uint64_t, unsigned,
                                 std::uint64_t);
template Estimate estimate_variance(const StepDistribution<Word>&, std::size_t, std::size_t, std::uint64_t, unsigned);
template Estimate estimate_variance(const StepDistribution<Moebius>&, std::size_t, std::size_t, std::uint64_t,
                                    unsigned);
template PathSample sample_checkpoints(const StepDistribution<Word>&, const std::vector<std::size_t>&, Rng&);
template PathSample sample_checkpoints(const StepDistribution<Moebius>&, const std::vector<std::size_t>&, Rng&);
template CltReport clt_samples(const StepDistribution<Word>&, std::size_t, std::size_t, std::uint64_t, unsigned,
                               std::size_t);
template CltReport clt_samples(const StepDistribution<Moebius>&, std::size_t, std::size_t, std::uint64_t, unsigned,
                               std::size_t);

}  // namespace pw
