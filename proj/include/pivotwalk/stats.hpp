#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "pivotwalk/arena.hpp"
#include "pivotwalk/pivots.hpp"
#include "pivotwalk/walk.hpp"

namespace pw {

// RNG streams; trial i of an experiment draws from Rng(seed, stream, i).
namespace streams {
inline constexpr std::uint64_t drift = 101, variance = 102, clt = 103, lambda = 104, logdev = 105, lil = 106,
                               converse = 107, deviation = 108, opposite = 109, dyadic = 110, tracking = 111,
                               decay = 112, pivot_stats = 113, dyadic_exact = 114;
}

// Trajectory stream of trial i in a pivot experiment.
inline std::uint64_t trial_stream(std::uint64_t experiment, std::size_t trial) {
    return (experiment << 32) | static_cast<std::uint64_t>(trial);
}

// Mean with a 95% normal-approximation half width.
struct Estimate {
    double value = 0;
    double half_width = 0;
    std::size_t trials = 0;
    std::uint64_t seed = 0;
    double lo() const { return value - half_width; }
    double hi() const { return value + half_width; }
};

Estimate mean_estimate(const std::vector<double>& xs, std::uint64_t seed);
// Type 7 quantile (linear interpolation between order statistics).
double quantile(std::vector<double> xs, double p);

struct Fit {
    double slope = 0, intercept = 0, r2 = 0;
    double slope_se = 0;
    std::size_t points = 0;
};
Fit linear_fit(const std::vector<double>& x, const std::vector<double>& y);

// Runs f(i) for i < count on up to `threads` workers. Callers write results
// by index, so the outcome does not depend on the worker count.
void parallel_for(std::size_t count, unsigned threads, const std::function<void(std::size_t)>& f);

template <class E>
Estimate estimate_drift(const StepDistribution<E>& mu, std::size_t n, std::size_t trials, std::uint64_t seed,
                        unsigned threads = 1, std::uint64_t stream = streams::drift);

// Per-step variance Var[d(o, w_n o)] / n.
template <class E>
Estimate estimate_variance(const StepDistribution<E>& mu, std::size_t n, std::size_t trials, std::uint64_t seed,
                           unsigned threads = 1);

// d(o, w_n o) and tau(w_n) along one path at increasing checkpoints.
struct PathSample {
    std::vector<std::size_t> n;
    std::vector<double> d, tau;
    // Steps where tau > d (+ tolerance on the plane); checked at every step.
    std::size_t tau_violations = 0;
};

template <class E>
PathSample sample_checkpoints(const StepDistribution<E>& mu, const std::vector<std::size_t>& checkpoints, Rng& rng);

struct Series {
    std::vector<std::size_t> n;
    std::vector<double> value;
    std::vector<double> running_max, running_min;
};

// log log n for n >= 3, and 1 below.
double LL(double n);
double lil_alpha(double n);  // (2 n LLn)^{1/2}
double lil_beta(double n);   // (n / LLn)^{1/2}

// (n, d - tau) at the checkpoints of a path.
Series log_deviation_series(const PathSample& p);
// (n, (d - lambda n) / alpha(n)); tau instead of d when use_tau.
Series lil_series(const PathSample& p, double lambda, bool use_tau = false);

// Kolmogorov distance between the empirical law of xs and N(0, sigma^2).
double ks_normal(std::vector<double> xs, double sigma);

struct CltReport {
    std::size_t n = 0, trials = 0;
    std::uint64_t seed = 0;
    Estimate lambda;  // from the disjoint lambda stream
    double sigma = 0;
    std::vector<double> displacement, translation;
    double ks_displacement = 0, ks_translation = 0;
    double max_pair_diff = 0;  // max |disp - trans| over trials
    double pair_bound = 0;     // 10 log n / sqrt n
    bool arithmetic_warning = false;
};

template <class E>
CltReport clt_samples(const StepDistribution<E>& mu, std::size_t n, std::size_t trials, std::uint64_t seed,
                      unsigned threads = 1, std::size_t lambda_trials = 0);

// Steps a^{+-k} with P(k) proportional to k^-q for k <= T, carrying total
// mass heavy_mass, and b^{+-1} with the rest.
class HeavyTailModel {
public:
    HeavyTailModel(double q, std::uint64_t T, double heavy_mass = 0.5);
    double q() const { return q_; }
    std::uint64_t T() const { return T_; }
    // Signed letter and multiplicity.
    std::pair<int, std::uint64_t> sample(Rng& rng) const;

private:
    double q_;
    std::uint64_t T_;
    double heavy_mass_;
    std::vector<double> cumulative_;
};

struct SpreadPoint {
    std::size_t n = 0;
    double iqr_d = 0, iqr_tau = 0;
};

struct SpreadReport {
    std::vector<SpreadPoint> points;
    Fit fit_d, fit_tau;  // log IQR against log n
};

struct ConverseReport {
    SpreadReport heavy;
    SpreadReport control;
    // slope of the displacement spread for each truncation level swept
    std::vector<std::pair<std::uint64_t, double>> truncation_sweep;
};

SpreadReport spread_growth(const HeavyTailModel& heavy, const std::vector<std::size_t>& grid, std::size_t trials,
                           std::uint64_t seed, unsigned threads = 1);
SpreadReport spread_growth(const WordDistribution& mu, const std::vector<std::size_t>& grid, std::size_t trials,
                           std::uint64_t seed, unsigned threads = 1);

// (d, tau) of trial i at grid point g, as used by spread_growth.
std::pair<double, double> spread_trial(const HeavyTailModel& heavy, std::size_t n, std::size_t g, std::uint64_t seed,
                                       std::size_t i);
std::pair<double, double> spread_trial(const WordDistribution& mu, std::size_t n, std::size_t g, std::uint64_t seed,
                                       std::size_t i);

ConverseReport converse_diagnostic(double q, std::uint64_t T, const WordDistribution& control,
                                   const std::vector<std::size_t>& grid, std::size_t trials, std::uint64_t seed,
                                   const std::vector<std::uint64_t>& sweep = {}, unsigned threads = 1);

struct DyadicDecomposition {
    int m = 0, k_max = 0;
    // Y[k][i-1], b[k][i-1] with the 1-based indices used in the formulas.
    std::vector<std::vector<double>> Y, b;
    std::size_t identity_failures = 0;
    double max_identity_error = 0;
    double max_telescoping_error = 0;
};

// dist(i, j) = d(w_i o, w_j o).
DyadicDecomposition dyadic_decompose(const std::function<double(std::size_t, std::size_t)>& dist,
                                     std::size_t path_length, int m, int k_max, double tol = 0.0);
DyadicDecomposition dyadic_decompose(const TreeArena& arena, const std::vector<TreeArena::Node>& pos, int m,
                                     int k_max);
DyadicDecomposition dyadic_decompose(const std::vector<Plane>& pos, int m, int k_max);

// Level means of b_{k,i}^4 for path i alone.
std::vector<double> dyadic_trial_moments(const WordDistribution& mu, int m, int k_max, std::uint64_t seed,
                                         std::size_t i);
// Mean of b_{k,i}^4 per level over independent paths of length 2^{m + k_max}.
std::vector<Estimate> dyadic_fourth_moments(const WordDistribution& mu, int m, int k_max, std::size_t trials,
                                            std::uint64_t seed, unsigned threads = 1);

// Bounds on |t^p - s^p| and |t1^p t2^q - s1^p s2^q| for nonnegative arguments.
double diff_ineq_simple_bound(double t, double s, double p);
double diff_ineq_bound(double t1, double t2, double s1, double s2, double p, double q);

struct DeviationReport {
    std::vector<std::size_t> k;
    std::vector<std::size_t> hits;
    std::vector<double> frequency;
    std::size_t trials = 0;
    Fit fit;  // log((hits + 1/2) / (trials + 1)) against k
};

// Per-k hit flags of trial i.
std::vector<std::uint8_t> deviation_trial(const WordDistribution& mu, const Word& x, const std::vector<std::size_t>& ks,
                                          std::size_t horizon_mult, std::uint64_t seed, std::size_t i);

// P[sup_{k <= n <= horizon_mult k} (x, w_n o)_o >= d(o, w_k o)].
DeviationReport deviation_probability_check(const WordDistribution& mu, const Word& x,
                                            const std::vector<std::size_t>& ks, std::size_t trials,
                                            std::uint64_t seed, std::size_t horizon_mult = 4, unsigned threads = 1);

struct OppositeMoment {
    std::size_t horizon = 0;
    Estimate power;        // E[max_{n <= H} (wb_n o, w_n o)_o^{2p}]
    Estimate exponential;  // E[exp(K max)]
};

// Forward walk of mu and backward walk of the reflected law in one tree.
// One entry per horizon, all from the same paths.
std::vector<OppositeMoment> opposite_deviation_moment(const WordDistribution& mu, double p, double K,
                                                      const std::vector<std::size_t>& horizons, std::size_t trials,
                                                      std::uint64_t seed, unsigned threads = 1);

struct TrackingReport {
    std::vector<TreeArena::Node> gamma;  // o, then y0m, y0p per pivotal time
    std::vector<double> arc;             // arc length of gamma at each marked point
    std::vector<double> dist;            // dist[k] = d(w_k o, Gamma), k = 0..K
    std::size_t pairs_checked = 0;
    std::size_t quasi_violations = 0;
    double max_excess = 0;  // max of arc - (mult d + add) over checked pairs
    double mult = 0, add = 0;
};

// Gamma through the pivotal loci at the end of t; distances for k <= K.
TrackingReport tracking_series(const Trajectory& t, const PivotRecord& r, std::size_t K, Rng& pair_rng,
                               std::size_t pair_samples = 2000);

struct PivotStats {
    std::size_t steps = 0;
    std::size_t gains = 0;
    // drops[j]: steps with |P_{n+1}| < |P_n| - j, j = 0, 1, 2
    std::size_t drops[3] = {0, 0, 0};
    std::size_t max_depth = 0;
    std::map<std::size_t, std::size_t> depth_histogram;
    double gain_frequency() const { return steps ? static_cast<double>(gains) / static_cast<double>(steps) : 0; }
    double drop_frequency(int j) const {
        return steps ? static_cast<double>(drops[j]) / static_cast<double>(steps) : 0;
    }
    // Monte Carlo standard error of a frequency over these steps.
    double sigma(double p) const;
};

PivotStats pivot_stats(const std::shared_ptr<const DecomposedModel>& model, const GromovConstants& c, std::size_t n, std::size_t trials,
                       std::uint64_t seed, unsigned threads = 1);

struct DecayReport {
    std::vector<std::size_t> blocks;
    std::vector<double> probability;
    std::vector<std::size_t> hits;
    double density = 0;  // mean |P| per block at the largest n
    double kappa = 0;
    std::size_t trials = 0;
    Fit fit;  // log probability against n
};

// P(|P| <= kappa n) after n blocks; kappa <= 0 means half the empirical density.
DecayReport pivot_decay(const std::shared_ptr<const DecomposedModel>& model, const GromovConstants& c,
                        const std::vector<std::size_t>& blocks,
                        std::size_t trials, std::uint64_t seed, double kappa = 0, unsigned threads = 1);

}  // namespace pw
