#include "pivotwalk/pivots.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>

namespace pw {

namespace {

using Seg = Segment<Node>;

bool better(const std::vector<std::uint32_t>& x, const std::vector<std::uint32_t>& y) {
    if (x.size() != y.size()) return x.size() > y.size();
    return x > y;
}

}  // namespace

std::string to_string(StepKind k) {
    switch (k) {
        case StepKind::gain: return "gain";
        case StepKind::backtrack: return "backtrack";
        case StepKind::reset: return "reset";
    }
    return "?";
}

Loci compute_loci(const Trajectory& t, std::size_t i) {
    if (i < 1 || i > t.successes()) throw std::out_of_range("missing loci for block " + std::to_string(i));
    const std::size_t N = static_cast<std::size_t>(t.model->N());
    const std::size_t t0 = t.block_start(t.T[i - 1]);
    if (t0 + 6 * N >= t.pos.size()) throw std::out_of_range("block " + std::to_string(i) + " not materialized");
    return {t.pos[t0], t.pos[t0 + N], t.pos[t0 + 2 * N], t.pos[t0 + 4 * N], t.pos[t0 + 6 * N]};
}

std::vector<Loci> compute_all_loci(const Trajectory& t) {
    std::vector<Loci> out;
    out.reserve(t.successes());
    for (std::size_t i = 1; i <= t.successes(); ++i) out.push_back(compute_loci(t, i));
    return out;
}

std::vector<std::uint32_t> find_backtrack_chain(const std::vector<std::uint32_t>& P, const std::vector<Loci>& loci,
                                                Node Y, const GromovConstants& c, const TreeArena& arena) {
    const std::size_t m = P.size();
    if (m < 2) return {};
    ArenaSpace sp(arena);
    auto L = [&](std::size_t k) -> const Loci& { return loci.at(P[k] - 1); };
    auto lt = [&](double v, double bound) { return v < bound; };

    // Node k in a later role: p = y1m, gamma = [y1m, y0m], eta = [y2m, y1m].
    auto usable = [&](std::size_t k) { return lt(arena.gromov(L(k).y0m, L(k).y2m, L(k).y1m), c.C0); };
    auto terminal = [&](std::size_t k) { return lt(arena.gromov(L(k).y1m, Y, L(k).y0m), c.C0); };
    auto edge = [&](Node p, const Seg& gamma, std::size_t l) {
        Seg eta{L(l).y2m, L(l).y1m};
        return is_witnessed(sp, Seg{p, L(l).y1m}, gamma, eta, c.D0);
    };

    std::vector<std::int8_t> state(m, 0);  // 0 unknown, 1 has chain, -1 none
    std::vector<std::vector<std::uint32_t>> best(m);
    auto later = [&](auto&& self, std::size_t k) -> const std::vector<std::uint32_t>& {
        if (state[k] != 0) return best[k];
        state[k] = -1;
        if (!usable(k)) return best[k];
        const std::vector<std::uint32_t>* cont = nullptr;
        Seg gamma{L(k).y1m, L(k).y0m};
        for (std::size_t l = k + 1; l < m; ++l) {
            const auto& b = self(self, l);
            if (b.empty()) continue;
            if (cont && !better(b, *cont)) continue;
            if (edge(L(k).y1m, gamma, l)) cont = &b;
        }
        if (cont) {
            best[k].reserve(cont->size() + 1);
            best[k].push_back(P[k]);
            best[k].insert(best[k].end(), cont->begin(), cont->end());
        } else if (terminal(k)) {
            best[k] = {P[k]};
        }
        if (!best[k].empty()) state[k] = 1;
        return best[k];
    };

    for (std::size_t j = m - 1; j-- > 0;) {
        Seg gamma{L(j).y0p, L(j).y2p};
        const std::vector<std::uint32_t>* cont = nullptr;
        for (std::size_t l = j + 1; l < m; ++l) {
            const auto& b = later(later, l);
            if (b.empty()) continue;
            if (cont && !better(b, *cont)) continue;
            if (edge(L(j).y0p, gamma, l)) cont = &b;
        }
        if (cont) {
            std::vector<std::uint32_t> chain{P[j]};
            chain.insert(chain.end(), cont->begin(), cont->end());
            return chain;
        }
    }
    return {};
}

StepRecord advance_pivots(PivotState& st, const std::vector<Loci>& loci, Node Y, const GromovConstants& c,
                          const TreeArena& arena) {
    const std::size_t n = st.n + 1;
    if (n > loci.size()) throw std::out_of_range("missing loci for block " + std::to_string(n));
    const Loci& L = loci[n - 1];
    const std::size_t before = st.P.size();
    StepRecord rec;
    rec.step = n;
    bool case1 = arena.gromov(st.z, L.y0m, L.y2m) < c.C0 && arena.gromov(st.z, L.y1m, L.y2m) < c.C0 &&
                 arena.gromov(L.y0p, Y, L.y2p) < c.C0;
    if (case1) {
        st.P.push_back(static_cast<std::uint32_t>(n));
        st.z = L.y0p;
        rec.kind = StepKind::gain;
        rec.chain = {static_cast<std::uint32_t>(n)};
    } else {
        rec.chain = find_backtrack_chain(st.P, loci, Y, c, arena);
        if (!rec.chain.empty()) {
            auto keep = std::upper_bound(st.P.begin(), st.P.end(), rec.chain.front());
            st.P.erase(keep, st.P.end());
            st.z = loci[rec.chain.back() - 1].y1m;
            rec.kind = StepKind::backtrack;
        } else {
            st.P.clear();
            st.z = TreeArena::root;
            rec.kind = StepKind::reset;
        }
    }
    st.n = n;
    rec.P_size = st.P.size();
    rec.increment = static_cast<long long>(st.P.size()) - static_cast<long long>(before);
    rec.backtrack_depth = case1 ? 0 : before - st.P.size();
    rec.z = st.z;
    return rec;
}

PivotRecord::PivotRecord(const Trajectory& t, const GromovConstants& c)
    : traj_(&t), c_(c), loci_(compute_all_loci(t)) {
    elem_ = {0};
    parent_ = {0};
    top_ = {0};
    std::vector<std::uint32_t> depth{0};
    PivotState st;
    for (std::size_t i = 1; i < loci_.size(); ++i) {
        auto rec = advance_pivots(st, loci_, loci_[i].y2m, c_, *t.arena);
        std::uint32_t top = top_.back();
        if (rec.kind == StepKind::gain) {
            elem_.push_back(static_cast<std::uint32_t>(i));
            parent_.push_back(top);
            depth.push_back(depth[top] + 1);
            top = static_cast<std::uint32_t>(elem_.size() - 1);
        } else {
            while (depth[top] > rec.P_size) top = parent_[top];
        }
        top_.push_back(top);
        history_.push_back(std::move(rec));
    }
}

std::vector<std::uint32_t> PivotRecord::P(std::size_t n) const {
    std::vector<std::uint32_t> out;
    for (std::uint32_t u = top_.at(n); u != 0; u = parent_[u]) out.push_back(elem_[u]);
    std::reverse(out.begin(), out.end());
    return out;
}

PivotState PivotRecord::at_time(std::size_t time) const {
    const Trajectory& t = *traj_;
    if (time >= t.pos.size()) throw std::out_of_range("time beyond trajectory");
    const std::size_t L = static_cast<std::size_t>(t.model->block_length());
    std::size_t m = 0;
    while (m < t.successes() && t.block_start(t.T[m]) + L <= time) ++m;
    PivotState st;
    if (m == 0) return st;
    st.n = m - 1;
    st.P = P(m - 1);
    st.z = z(m - 1);
    advance_pivots(st, loci_, t.pos[time], c_, *t.arena);
    return st;
}

EventualPivots eventual_pivots(const PivotRecord& r, std::size_t n, std::optional<std::size_t> horizon) {
    std::size_t H = horizon.value_or(2 * n);
    if (H <= n) throw std::invalid_argument("horizon must exceed n");
    if (H > r.final_steps()) throw std::out_of_range("horizon beyond the final pivot steps");
    std::size_t lo = r.P_size(n);
    for (std::size_t k = n; k <= H; ++k) lo = std::min(lo, r.P_size(k));
    EventualPivots e;
    e.n = n;
    e.horizon = H;
    e.Q = r.P(n);
    e.Q.resize(lo);
    return e;
}

std::vector<bool> admissible_replacements(const Trajectory& t, const PivotRecord& r, std::size_t j) {
    if (j < 1 || j > r.final_steps()) throw std::out_of_range("no pivot step " + std::to_string(j));
    const auto& model = *t.model;
    const double C0 = r.constants().C0;
    Node z = r.z(j - 1);
    Node y2 = r.loci(j).y2m;
    TreeArena& arena = *t.arena;
    std::vector<bool> ok(model.S().size(), false);
    auto mark = arena.mark();
    for (std::size_t u = 0; u < model.S().size(); ++u) {
        Node y = y2;
        for (auto idx : model.spelling(u)) y = arena.push(y, t.token_of[idx]);
        Node y1 = y;
        for (auto idx : model.spelling(u)) y = arena.push(y, t.token_of[idx]);
        ok[u] = arena.gromov(z, y1, y2) < C0 && arena.gromov(z, y, y2) < C0;
        arena.rollback(mark);
    }
    return ok;
}

Trajectory pivot_trajectory(const Trajectory& t, const PivotRecord& r, std::size_t j, std::uint32_t a_bar) {
    auto P = r.P(r.final_steps());
    if (!std::binary_search(P.begin(), P.end(), static_cast<std::uint32_t>(j)))
        throw std::invalid_argument("not a pivoting move: " + std::to_string(j) + " is not a pivotal time");
    if (a_bar >= t.model->S().size()) throw std::invalid_argument("replacement outside S");
    if (!admissible_replacements(t, r, j)[a_bar]) throw std::invalid_argument("not a pivoting move");
    Trajectory out = t;
    const std::size_t N = static_cast<std::size_t>(t.model->N());
    const std::size_t t0 = t.block_start(t.T[j - 1]);
    const auto& sp = t.model->spelling(a_bar);
    for (std::size_t k = 0; k < N; ++k) out.steps[t0 + k] = out.steps[t0 + N + k] = sp[k];
    out.a[j - 1] = a_bar;
    out.rematerialize(t0);
    return out;
}

void AlignmentReport::require() const {
    if (!ok) throw std::runtime_error("alignment violated: " + failure);
}

AlignmentReport pivotal_alignment(const Trajectory& t, const PivotRecord& r, std::size_t time) {
    const auto st = r.at_time(time);
    const GromovConstants& c = r.constants();
    AlignmentReport rep;
    rep.points.push_back(TreeArena::root);
    for (auto i : st.P) {
        rep.points.push_back(r.loci(i).y0m);
        rep.points.push_back(r.loci(i).y0p);
    }
    rep.points.push_back(t.pos[time]);
    const auto& x = rep.points;
    const std::size_t n = x.size();
    const TreeArena& arena = *t.arena;
    std::vector<double> d(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) d[i * n + j] = d[j * n + i] = static_cast<double>(arena.distance(x[i], x[j]));
    rep.min_gain = std::numeric_limits<double>::infinity();
    rep.max_product.value = 0;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i; j + 1 < n; ++j) {
            double gain = d[i * n + j + 1] - d[i * n + j];
            rep.min_gain = std::min(rep.min_gain, gain);
            if (gain < c.L0 / 2) {
                if (rep.gain_violations++ == 0)
                    rep.failure = "gain " + std::to_string(gain) + " at (" + std::to_string(i) + ", " + std::to_string(j) + ")";
            }
        }
        for (std::size_t j = i + 1; j < n; ++j)
            for (std::size_t k = j + 1; k < n; ++k) {
                double v = 0.5 * (d[j * n + i] + d[j * n + k] - d[i * n + k]);
                if (v > rep.max_product.value) rep.max_product = {v, i, j, k};
                if (!(v < c.F0)) {
                    if (rep.product_violations++ == 0 && rep.failure.empty())
                        rep.failure = "product " + std::to_string(v) + " at (" + std::to_string(i) + ", " +
                                      std::to_string(j) + ", " + std::to_string(k) + ")";
                }
            }
    }
    if (n < 2) rep.min_gain = 0;
    rep.ok = rep.product_violations == 0 && rep.gain_violations == 0;
    return rep;
}

std::size_t check_marking_structure(const Trajectory& t, const PivotRecord& r, std::size_t n) {
    if (n > r.final_steps()) throw std::out_of_range("step beyond the final pivot steps");
    const GromovConstants& c = r.constants();
    ArenaSpace sp(*t.arena);
    auto P = r.P(n);
    std::size_t failures = 0;
    auto chain_segments = [&](const std::vector<std::uint32_t>& chain, std::vector<Seg>& gammas, std::vector<Seg>& etas) {
        gammas.push_back({r.loci(chain[0]).y0p, r.loci(chain[0]).y2p});
        for (std::size_t k = 1; k < chain.size(); ++k) {
            const Loci& L = r.loci(chain[k]);
            gammas.push_back({L.y1m, L.y0m});
            etas.push_back({L.y2m, L.y1m});
        }
    };
    for (std::size_t q = 0; q + 1 < P.size(); ++q) {
        const std::uint32_t l = P[q], m = P[q + 1];
        std::vector<std::uint32_t> chain{l};
        if (l + 1 < m) {
            const auto& prev = r.history()[m - 2];
            if (prev.kind != StepKind::backtrack || prev.chain.front() != l) {
                ++failures;
                continue;
            }
            chain = prev.chain;
        }
        for (int tt = 0; tt < 2; ++tt) {
            Node yt = tt == 0 ? r.loci(m).y0m : r.loci(m).y1m;
            std::vector<Seg> gammas, etas;
            chain_segments(chain, gammas, etas);
            etas.push_back({r.loci(m).y2m, yt});
            if (!is_fully_marked(sp, Seg{r.loci(l).y0p, yt}, gammas, etas, c.C0, c.D0)) ++failures;
        }
    }
    if (!P.empty()) {
        const Loci& K = r.loci(P.front());
        for (Node yt : {K.y0m, K.y1m})
            if (!is_tail_marked(sp, Seg{TreeArena::root, yt}, std::vector<Seg>{}, std::vector<Seg>{{K.y2m, yt}}, c.C0, c.D0))
                ++failures;
        const std::uint32_t m = P.back();
        const Node Y = r.loci(n + 1).y2m;
        std::vector<std::uint32_t> chain{m};
        const auto& rec = r.history()[n - 1];
        if (m != n) chain = rec.chain;
        if (chain.front() != m) {
            ++failures;
        } else {
            std::vector<Seg> gammas, etas;
            chain_segments(chain, gammas, etas);
            if (!is_head_marked(sp, Seg{r.loci(m).y0p, Y}, gammas, etas, c.C0, c.D0)) ++failures;
        }
    }
    return failures;
}

BidirectionalReport bidirectional_pivot_check(const Trajectory& backward, const PivotRecord& back_record,
                                              const Trajectory& forward, const PivotRecord& fwd_record) {
    if (backward.arena != forward.arena) throw std::invalid_argument("paths must share one arena");
    if (fwd_record.final_steps() < 2 || back_record.final_steps() < 2)
        throw std::runtime_error("insufficient pivots");
    auto qf = eventual_pivots(fwd_record, fwd_record.final_steps() / 2, fwd_record.final_steps()).Q;
    auto qb = eventual_pivots(back_record, back_record.final_steps() / 2, back_record.final_steps()).Q;
    if (qf.empty() || qb.empty()) throw std::runtime_error("insufficient pivots");
    const TreeArena& arena = *forward.arena;
    const GromovConstants& c = fwd_record.constants();
    BidirectionalReport rep;
    rep.forward_pivots = qf.size();
    rep.backward_pivots = qb.size();
    for (std::size_t k = 0; k < std::min(qf.size(), qb.size()); ++k) {
        const Loci& f = fwd_record.loci(qf[k]);
        const Loci& b = back_record.loci(qb[k]);
        if (arena.gromov(b.y0m, f.y2m, b.y2m) < c.C0 && arena.gromov(b.y0m, f.y0m, f.y2m) < c.C0) {
            rep.found = true;
            rep.m = k + 1;
            break;
        }
    }
    if (!rep.found) return rep;
    const Node wb = backward.pos.back(), wf = forward.pos.back();
    for (std::size_t l = rep.m; l <= qf.size(); ++l) {
        const Loci& f = fwd_record.loci(qf[l - 1]);
        for (Node x : {f.y0m, f.y0p}) {
            double v = arena.gromov(wb, wf, x);
            rep.max_product = std::max(rep.max_product, v);
            ++rep.checked;
            if (v > c.F0) ++rep.violations;
        }
    }
    return rep;
}

CBlockReport check_c_block(const std::vector<Word>& S, const Word& c, const GromovConstants& k) {
    CBlockReport rep;
    WordSpace sp;
    const Word o(c.rank());
    for (const Word& s : S) {
        rep.max_c_a = std::max(rep.max_c_a, gromov_product(sp, o, c, s.pow(-2)));
        rep.max_c_b = std::max(rep.max_c_b, gromov_product(sp, o, c.inverse(), s.pow(2)));
    }
    rep.witnessed = is_witnessed(sp, Segment<Word>{o, c.pow(2)}, Segment<Word>{o, c}, Segment<Word>{c, c.pow(2)}, k.D0);
    rep.ok = rep.max_c_a < k.C0 && rep.max_c_b < k.C0 && rep.witnessed;
    return rep;
}

namespace {

PivotModel assemble(const PivotModelConfig& cfg, PivotModel m) {
    const Word c = m.S0.set.front();
    std::vector<Word> S(m.S0.set.begin() + 1, m.S0.set.begin() + 1 + static_cast<long>(cfg.S_size));
    m.cblock = check_c_block(S, c, m.constants);
    if (!m.cblock.ok) throw std::runtime_error("c-block checks failed");

    std::vector<Word> support;
    for (const Word& s : m.S0.set) support.push_back(s);
    for (const Word& s : m.S0.set) support.push_back(s.inverse());
    for (int g = 1; g <= cfg.rank; ++g) {
        support.push_back(Word::generator(cfg.rank, g));
        support.push_back(Word::generator(cfg.rank, -g));
    }
    auto base = WordDistribution::uniform(std::move(support));
    auto fwd = std::make_shared<DecomposedModel>(std::move(base), cfg.N, std::move(S), c, cfg.mode, cfg.alpha);
    m.backward = std::make_shared<DecomposedModel>(fwd->reversed());
    m.forward = std::move(fwd);
    return m;
}

void check_config(const PivotModelConfig& cfg) {
    if (cfg.rank < 2) throw std::invalid_argument("rank must be at least 2");
    if (cfg.S_size + 1 > cfg.schottky_size) throw std::invalid_argument("S plus c does not fit in S0");
}

}  // namespace

PivotModel build_pivot_model(const PivotModelConfig& cfg) {
    check_config(cfg);
    const Word a = Word::generator(cfg.rank, 1), b = Word::generator(cfg.rank, 2);
    PivotModel m;
    const double K = pattern_constant(a, b, cfg.pattern_length);
    m.constants = GromovConstants::from(K, 0.0);
    auto found = search_schottky(a, b, cfg.schottky_size, m.constants.L0, cfg.probe_seed, cfg.pattern_length);
    m.S0 = schottky_subset(found.params, cfg.schottky_size);
    m.schottky_report = found.report;
    return assemble(cfg, std::move(m));
}

PivotModel build_pivot_model(const PivotModelConfig& cfg, const SchottkyParams& S0) {
    check_config(cfg);
    if (S0.set.size() < cfg.schottky_size) throw std::invalid_argument("Schottky set smaller than configured");
    PivotModel m;
    m.constants = GromovConstants::from(S0.K, 0.0);
    m.S0 = schottky_subset(S0, cfg.schottky_size);
    m.schottky_report = verify_schottky(m.S0, tree_probes(m.S0, cfg.probe_seed, 256));
    if (!m.schottky_report.pass) throw std::runtime_error("given Schottky set fails verification");
    if (m.S0.Kprime < m.constants.L0) throw std::runtime_error("given Schottky set has K' below L0");
    return assemble(cfg, std::move(m));
}

}  // namespace pw
