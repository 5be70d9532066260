#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "pivotwalk/arena.hpp"
#include "pivotwalk/geometry.hpp"
#include "pivotwalk/schottky.hpp"
#include "pivotwalk/walk.hpp"

namespace pw {

using Node = TreeArena::Node;

// Positions inside the i-th Schottky block a^2 c^2 b^2, in order along the walk.
struct Loci {
    Node y2m = 0;  // block start
    Node y1m = 0;  // after a
    Node y0m = 0;  // after a^2
    Node y0p = 0;  // after a^2 c^2
    Node y2p = 0;  // after a^2 c^2 b^2
};

// i is 1-based over Schottky blocks (successes) of the trajectory.
Loci compute_loci(const Trajectory& t, std::size_t i);
std::vector<Loci> compute_all_loci(const Trajectory& t);

enum class StepKind : std::uint8_t { gain, backtrack, reset };
std::string to_string(StepKind k);

struct StepRecord {
    std::size_t step = 0;
    StepKind kind = StepKind::gain;
    std::size_t P_size = 0;
    long long increment = 0;
    std::size_t backtrack_depth = 0;
    Node z = 0;
    // gain: {n}; backtrack: i(1) < ... < i(N); reset: empty.
    std::vector<std::uint32_t> chain;
};

struct PivotState {
    std::vector<std::uint32_t> P;
    Node z = TreeArena::root;
    std::size_t n = 0;
};

// Case (2) search over P: chains i(1) < ... < i(N), N > 1, head-marking
// [y0p(i(1)), Y]. Maximal i(1), then longest, then lexicographically largest.
// Empty when no chain exists.
std::vector<std::uint32_t> find_backtrack_chain(const std::vector<std::uint32_t>& P, const std::vector<Loci>& loci,
                                                Node Y, const GromovConstants& c, const TreeArena& arena);

// One inductive step n = st.n + 1, with Y the start of the next Schottky
// block (or the current position for a provisional verdict).
StepRecord advance_pivots(PivotState& st, const std::vector<Loci>& loci, Node Y, const GromovConstants& c,
                          const TreeArena& arena);

// Pivotal times of a whole trajectory. Step i is final when block i + 1
// exists; the last step is only known provisionally.
class PivotRecord {
public:
    PivotRecord(const Trajectory& t, const GromovConstants& c);

    std::size_t final_steps() const { return history_.size(); }
    const std::vector<StepRecord>& history() const { return history_; }
    const std::vector<Loci>& loci() const { return loci_; }
    const Loci& loci(std::size_t i) const { return loci_.at(i - 1); }
    const GromovConstants& constants() const { return c_; }

    // P_n and z_n for n = 0..final_steps().
    std::vector<std::uint32_t> P(std::size_t n) const;
    std::size_t P_size(std::size_t n) const { return n == 0 ? 0 : history_.at(n - 1).P_size; }
    Node z(std::size_t n) const { return n == 0 ? TreeArena::root : history_.at(n - 1).z; }

    // State at walk time t: every Schottky block completed by t counts, the
    // last one judged against omega_t o.
    PivotState at_time(std::size_t t) const;

private:
    const Trajectory* traj_;
    GromovConstants c_;
    std::vector<Loci> loci_;
    std::vector<StepRecord> history_;
    // Persistent stack: P_n is the path from top_[n] to the root.
    std::vector<std::uint32_t> elem_, parent_, top_;
};

struct EventualPivots {
    std::vector<std::uint32_t> Q;
    std::size_t n = 0;
    std::size_t horizon = 0;
    bool stable_within_horizon = true;
};

// First min_{n <= k <= H} |P_k| elements of P_n.
EventualPivots eventual_pivots(const PivotRecord& r, std::size_t n, std::optional<std::size_t> horizon = std::nullopt);

// Replacement a_bar in S for a_j is admissible when
// (z_{j-1}, ybar_t)_{y2m(j)} < C0 for t = 0, 1.
std::vector<bool> admissible_replacements(const Trajectory& t, const PivotRecord& r, std::size_t j);

// New trajectory with a_j replaced; everything else is kept.
// Throws "not a pivoting move" unless j is in the final P and a_bar is admissible.
Trajectory pivot_trajectory(const Trajectory& t, const PivotRecord& r, std::size_t j, std::uint32_t a_bar);

struct AlignmentReport {
    bool ok = true;
    std::vector<Node> points;
    TripleBound max_product;
    double min_gain = 0;  // min over i <= j of d(x_i, x_{j+1}) - d(x_i, x_j)
    std::size_t product_violations = 0;
    std::size_t gain_violations = 0;
    std::string failure;
    void require() const;
};

// Marked points o, (y0m, y0p) per pivotal time of P at walk time t, omega_t o.
AlignmentReport pivotal_alignment(const Trajectory& t, const PivotRecord& r, std::size_t time);

// Structure between consecutive pivotal times and at both ends of P_n;
// returns the number of failed predicates.
std::size_t check_marking_structure(const Trajectory& t, const PivotRecord& r, std::size_t n);

struct BidirectionalReport {
    bool found = false;
    std::size_t m = 0;
    std::size_t forward_pivots = 0, backward_pivots = 0;
    std::size_t checked = 0;
    std::size_t violations = 0;
    double max_product = 0;
};

BidirectionalReport bidirectional_pivot_check(const Trajectory& backward, const PivotRecord& back_record,
                                              const Trajectory& forward, const PivotRecord& fwd_record);

struct CBlockReport {
    bool ok = false;
    double max_c_a = 0;  // max over a in S of (co, a^-2 o)_o
    double max_c_b = 0;  // max over b in S of (c^-1 o, b^2 o)_o
    bool witnessed = false;
};
CBlockReport check_c_block(const std::vector<Word>& S, const Word& c, const GromovConstants& k);

struct PivotModelConfig {
    int rank = 2;
    std::size_t schottky_size = 310;
    std::size_t S_size = 305;
    int N = 1;
    int pattern_length = 10;
    AlphaMode mode = AlphaMode::mixture;
    double alpha = 0.5;
    std::uint64_t probe_seed = 1;
};

struct PivotModel {
    SchottkyParams S0;
    VerificationReport schottky_report;
    GromovConstants constants;
    CBlockReport cblock;
    std::shared_ptr<const DecomposedModel> forward;
    std::shared_ptr<const DecomposedModel> backward;
};

// Schottky set S0 from the pattern search with C0 = K and K' = L0; c is the
// first element of S0 in sorted order, S the next S_size. The base step law
// is uniform on S0, S0^-1 and the generators with their inverses.
PivotModel build_pivot_model(const PivotModelConfig& cfg);
// Same, from a stored set; it is verified again and must have K' >= L0.
PivotModel build_pivot_model(const PivotModelConfig& cfg, const SchottkyParams& S0);

}  // namespace pw
