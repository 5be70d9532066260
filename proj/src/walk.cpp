#include "pivotwalk/walk.hpp"

#include <algorithm>
#include <limits>
#include <map>

namespace pw {

namespace {

template <class E>
std::vector<std::vector<E>> levels_impl(const std::vector<E>& gens, int depth, std::size_t cap) {
    std::vector<std::vector<E>> out;
    if (depth < 1) return out;
    out.push_back(gens);
    std::size_t total = gens.size();
    std::set<Word> seen;
    if constexpr (std::is_same_v<E, Word>) seen.insert(gens.begin(), gens.end());
    for (int d = 2; d <= depth && total < cap; ++d) {
        std::vector<E> next;
        for (const E& x : out.back()) {
            for (const E& s : gens) {
                E y = x * s;
                if constexpr (std::is_same_v<E, Word>) {
                    if (!seen.insert(y).second) continue;
                }
                next.push_back(std::move(y));
                if (++total >= cap) break;
            }
            if (total >= cap) break;
        }
        out.push_back(std::move(next));
    }
    return out;
}

}  // namespace

std::vector<std::vector<Word>> semigroup_levels(const std::vector<Word>& gens, int depth, std::size_t cap) {
    return levels_impl(gens, depth, cap);
}

std::vector<std::vector<Moebius>> semigroup_levels(const std::vector<Moebius>& gens, int depth, std::size_t cap) {
    return levels_impl(gens, depth, cap);
}

DecomposedModel::DecomposedModel(WordDistribution base, int N, std::vector<Word> S, Word c, AlphaMode mode,
                                 double mixture_alpha)
    : base_(std::move(base)), N_(N), S_(std::move(S)), c_(std::move(c)), mode_(mode) {
    if (N_ < 1) throw std::invalid_argument("block length N must be positive");
    if (S_.empty()) throw std::invalid_argument("empty Schottky set");
    for (const Word& s : S_)
        if (s == c_) throw std::invalid_argument("c must not belong to S");
    for (double w : base_.weights()) log_w_.push_back(std::log(w));
    for (const Word& s : S_) {
        spell_S_.push_back(spell(s));
        double lm = 0;
        for (auto i : spell_S_.back()) lm += log_w_[i];
        log_m_S_.push_back(lm);
        spell_lookup_.emplace_back(spell_S_.back(), static_cast<std::uint32_t>(spell_S_.size() - 1));
    }
    std::sort(spell_lookup_.begin(), spell_lookup_.end());
    spell_c_ = spell(c_);
    for (auto i : spell_c_) log_m_c_ += log_w_[i];

    if (mode_ == AlphaMode::exact) {
        double min_m = *std::min_element(log_m_S_.begin(), log_m_S_.end());
        log_alpha_ = 2.0 * std::log(static_cast<double>(S_.size())) + 2.0 * log_m_c_ + 4.0 * min_m;
        if (!(log_alpha_ < 0)) throw std::invalid_argument("decomposition would need alpha >= 1");
        alpha_ = std::exp(static_cast<long double>(log_alpha_));
    } else {
        if (!(mixture_alpha > 0 && mixture_alpha < 1)) throw std::invalid_argument("alpha must lie in (0, 1)");
        alpha_ = mixture_alpha;
        log_alpha_ = std::log(mixture_alpha);
    }
}

DecomposedModel DecomposedModel::reversed() const {
    std::vector<Word> inv;
    for (const Word& g : base_.support()) inv.push_back(g.inverse());
    std::vector<Word> Sinv;
    for (const Word& s : S_) Sinv.push_back(s.inverse());
    return DecomposedModel(WordDistribution(inv, base_.weights()), N_, Sinv, c_.inverse(), mode_,
                           mode_ == AlphaMode::mixture ? static_cast<double>(alpha_) : 0.0);
}

std::vector<std::uint32_t> DecomposedModel::spell(const Word& s) const {
    const auto& sup = base_.support();
    if (N_ == 1) {
        auto i = base_.find(s);
        if (!i) throw std::invalid_argument("Schottky element " + s.str() + " is not in the base support");
        return {static_cast<std::uint32_t>(*i)};
    }
    double combos = std::pow(static_cast<double>(sup.size()), N_);
    if (combos > 4e6) throw std::invalid_argument("spelling search too large; use N = 1 or a smaller support");
    std::vector<std::uint32_t> cur;
    std::vector<std::uint32_t> found;
    // Depth-first over N-tuples; first hit in index order wins.
    auto rec = [&](auto&& self, const Word& prefix) -> bool {
        if (static_cast<int>(cur.size()) == N_) {
            if (prefix == s) {
                found = cur;
                return true;
            }
            return false;
        }
        for (std::uint32_t i = 0; i < sup.size(); ++i) {
            cur.push_back(i);
            if (self(self, prefix * sup[i])) return true;
            cur.pop_back();
        }
        return false;
    };
    if (!rec(rec, Word(s.rank()))) throw std::invalid_argument("no spelling of " + s.str() + " by N base steps");
    return found;
}

void DecomposedModel::schottky_block(std::uint32_t a, std::uint32_t b, std::vector<std::uint32_t>& out) const {
    out.clear();
    for (int r = 0; r < 2; ++r) out.insert(out.end(), spell_S_[a].begin(), spell_S_[a].end());
    for (int r = 0; r < 2; ++r) out.insert(out.end(), spell_c_.begin(), spell_c_.end());
    for (int r = 0; r < 2; ++r) out.insert(out.end(), spell_S_[b].begin(), spell_S_[b].end());
}

long double DecomposedModel::keep_probability(const std::vector<std::uint32_t>& t) const {
    const auto n = static_cast<std::size_t>(N_);
    auto part = [&](std::size_t k) { return std::vector<std::uint32_t>(t.begin() + k * n, t.begin() + (k + 1) * n); };
    auto p0 = part(0), p1 = part(1), p2 = part(2), p3 = part(3), p4 = part(4), p5 = part(5);
    if (p0 != p1 || p4 != p5 || p2 != spell_c_ || p3 != spell_c_) return 1.0L;
    auto look = [&](const std::vector<std::uint32_t>& p) -> std::optional<std::uint32_t> {
        auto it = std::lower_bound(spell_lookup_.begin(), spell_lookup_.end(), std::make_pair(p, 0u));
        if (it != spell_lookup_.end() && it->first == p) return it->second;
        return std::nullopt;
    };
    auto a = look(p0), b = look(p4);
    if (!a || !b) return 1.0L;
    // alpha eta(t) / mu^{6N}(t)
    double log_ratio = log_alpha_ - 2.0 * std::log(static_cast<double>(S_.size())) - log_atom_mass(*a, *b);
    return 1.0L - std::exp(static_cast<long double>(log_ratio));
}

double DecomposedModel::log_atom_mass(std::uint32_t a, std::uint32_t b) const {
    return 2.0 * (log_m_S_[a] + log_m_c_ + log_m_S_[b]);
}

double DecomposedModel::decomposition_slack_log() const {
    double worst = std::numeric_limits<double>::infinity();
    double log_eta = -2.0 * std::log(static_cast<double>(S_.size()));
    for (std::uint32_t a = 0; a < S_.size(); ++a)
        for (std::uint32_t b = 0; b < S_.size(); ++b)
            worst = std::min(worst, log_atom_mass(a, b) - (log_alpha_ + log_eta));
    return worst;
}

void DecomposedModel::nu_block(Rng& rng, std::vector<std::uint32_t>& out) const {
    const auto L = static_cast<std::size_t>(block_length());
    for (;;) {
        out.resize(L);
        for (std::size_t k = 0; k < L; ++k) out[k] = static_cast<std::uint32_t>(base_.sample(rng));
        if (mode_ == AlphaMode::mixture) return;
        long double keep = keep_probability(out);
        if (keep >= 1.0L || rng.bernoulli(keep)) return;
    }
}

bool DecomposedModel::sample_block(Rng& rng, std::vector<std::uint32_t>& out, std::uint32_t& a,
                                   std::uint32_t& b) const {
    if (rng.bernoulli(alpha_)) {
        a = static_cast<std::uint32_t>(rng.below(S_.size()));
        b = static_cast<std::uint32_t>(rng.below(S_.size()));
        schottky_block(a, b, out);
        return true;
    }
    nu_block(rng, out);
    return false;
}

std::vector<int> register_tokens(TreeArena& arena, const WordDistribution& mu) {
    std::vector<int> tokens;
    for (const Word& g : mu.support()) tokens.push_back(g.empty() ? -1 : arena.add_token(g));
    return tokens;
}

namespace {
TreeArena::Node advance(TreeArena& arena, TreeArena::Node u, int token) {
    return token < 0 ? u : arena.push(u, token);
}
}  // namespace

void Trajectory::rematerialize(std::size_t from) {
    pos.resize(from + 1);
    for (std::size_t k = from; k < steps.size(); ++k) pos.push_back(advance(*arena, pos[k], token_of[steps[k]]));
}

Trajectory sample_trajectory(std::shared_ptr<const DecomposedModel> model, std::size_t n, std::uint64_t seed,
                             std::uint64_t stream, std::shared_ptr<TreeArena> arena,
                             const SampleOverrides* overrides) {
    if (n < 1) throw std::invalid_argument("trajectory length must be positive");
    Trajectory t;
    t.model = model;
    t.seed = seed;
    t.stream = stream;
    t.arena = arena ? std::move(arena) : std::make_shared<TreeArena>(model->base().support().front().rank());
    t.token_of = register_tokens(*t.arena, model->base());

    Rng rng(seed, stream, 0);
    const auto L = static_cast<std::size_t>(model->block_length());
    const std::size_t full = n / L;
    t.steps.reserve(n);
    t.rho.reserve(full);
    t.B.reserve(full + 1);
    t.B.push_back(0);
    std::vector<std::uint32_t> block;
    for (std::size_t k = 1; k <= full; ++k) {
        int force = -1;
        if (overrides && k - 1 < overrides->rho.size()) force = overrides->rho[k - 1];
        std::uint32_t a = 0, b = 0;
        bool r;
        if (force < 0) {
            r = model->sample_block(rng, block, a, b);
        } else if (force == 1) {
            a = static_cast<std::uint32_t>(rng.below(model->S().size()));
            b = static_cast<std::uint32_t>(rng.below(model->S().size()));
            model->schottky_block(a, b, block);
            r = true;
        } else {
            model->nu_block(rng, block);
            r = false;
        }
        t.rho.push_back(r ? 1 : 0);
        if (r) {
            t.a.push_back(a);
            t.b.push_back(b);
            t.T.push_back(static_cast<std::uint32_t>(k));
        }
        t.B.push_back(t.B.back() + (r ? 1 : 0));
        t.steps.insert(t.steps.end(), block.begin(), block.end());
    }
    while (t.steps.size() < n) t.steps.push_back(static_cast<std::uint32_t>(model->base().sample(rng)));
    t.pos.reserve(n + 1);
    t.pos.push_back(TreeArena::root);
    t.rematerialize(0);
    return t;
}

Bidirectional sample_bidirectional(std::shared_ptr<const DecomposedModel> model,
                                   std::shared_ptr<const DecomposedModel> backward_model, std::size_t n,
                                   std::uint64_t seed) {
    auto arena = std::make_shared<TreeArena>(model->base().support().front().rank());
    Bidirectional r;
    r.forward = sample_trajectory(model, n, seed, 1, arena);
    r.backward = sample_trajectory(backward_model, n, seed, 2, arena);
    return r;
}

std::vector<TreeArena::Node> sample_path(TreeArena& arena, const std::vector<int>& tokens, const WordDistribution& mu,
                                         std::size_t n, Rng& rng) {
    std::vector<TreeArena::Node> pos;
    pos.reserve(n + 1);
    pos.push_back(TreeArena::root);
    for (std::size_t k = 0; k < n; ++k) pos.push_back(advance(arena, pos.back(), tokens[mu.sample(rng)]));
    return pos;
}

void RunWord::push(int letter, std::uint64_t count) {
    while (count > 0) {
        if (!runs_.empty() && runs_.back().first == -letter) {
            std::uint64_t m = std::min(runs_.back().second, count);
            runs_.back().second -= m;
            count -= m;
            length_ -= m;
            if (runs_.back().second == 0) runs_.pop_back();
            continue;
        }
        if (!runs_.empty() && runs_.back().first == letter) runs_.back().second += count;
        else runs_.emplace_back(letter, count);
        length_ += count;
        count = 0;
    }
}

void RunWord::push(const Word& w) {
    for (int l : w.letters()) push(l, 1);
}

std::uint64_t RunWord::cyclic_length() const {
    if (runs_.size() < 2) return length_;
    std::size_t i = 0, j = runs_.size() - 1;
    std::uint64_t fc = runs_[i].second, bc = runs_[j].second, cancelled = 0;
    while (i < j && runs_[i].first == -runs_[j].first) {
        std::uint64_t m = std::min(fc, bc);
        cancelled += m;
        fc -= m;
        bc -= m;
        if (fc == 0) {
            ++i;
            fc = runs_[i].second;
        }
        if (bc == 0) {
            --j;
            bc = runs_[j].second;
        }
    }
    return length_ - 2 * cancelled;
}

}  // namespace pw
