#include "pivotwalk/arena.hpp"

#include <algorithm>
#include <stdexcept>

namespace pw {

TreeArena::TreeArena(int rank) : rank_(rank) {
    nodes_.push_back(Slice{root, root, 0, -1, 0, 0, 0});
}

int TreeArena::add_token(const Word& w) {
    if (w.empty()) throw std::invalid_argument("empty token");
    if (w.rank() != rank_) throw std::invalid_argument("token rank mismatch");
    auto it = token_ids_.find(w.letters());
    if (it != token_ids_.end()) return it->second;
    int id = static_cast<int>(tokens_.size());
    Word inv = w.inverse();
    tokens_.push_back(w.letters());
    tokens_.push_back(inv.letters());
    token_ids_.emplace(w.letters(), id);
    token_ids_.emplace(inv.letters(), id ^ 1);
    // A word equal to its own inverse cannot be reduced, so ids never collide.
    return id;
}

TreeArena::Node TreeArena::make(Node parent, int token, std::uint32_t begin, std::uint32_t end) {
    const Slice& p = nodes_[parent];
    Slice s;
    s.parent = parent;
    s.depth = p.depth + 1;
    s.token = token;
    s.begin = begin;
    s.end = end;
    s.len = p.len + (end - begin);
    if (s.len > max_length) throw std::length_error("arena word capacity exceeded");
    if (parent == root) {
        s.jump = root;
    } else {
        Node j = p.jump;
        const Slice& sj = nodes_[j];
        if (p.depth - sj.depth == sj.depth - nodes_[sj.jump].depth)
            s.jump = sj.jump;
        else
            s.jump = parent;
    }
    nodes_.push_back(s);
    return static_cast<Node>(nodes_.size() - 1);
}

TreeArena::Node TreeArena::push(Node u, int token) {
    const std::vector<int>& t = tokens_[token];
    const std::uint32_t tlen = static_cast<std::uint32_t>(t.size());
    std::uint32_t tb = 0;
    Node cur = u;
    std::uint32_t cend = nodes_[cur].end;
    while (cur != root && tb < tlen) {
        const Slice s = nodes_[cur];
        const std::vector<int>& S = tokens_[s.token];
        if (s.token == inverse_token(token) && cend == S.size() - tb) {
            std::uint32_t m = std::min(cend - s.begin, tlen - tb);
            cend -= m;
            tb += m;
        } else {
            while (cend > s.begin && tb < tlen && S[cend - 1] == -t[tb]) {
                --cend;
                ++tb;
            }
        }
        if (cend > s.begin) break;
        cur = s.parent;
        cend = nodes_[cur].end;
    }
    if (cur != root && cend != nodes_[cur].end) {
        const Slice s = nodes_[cur];
        cur = make(s.parent, s.token, s.begin, cend);
    }
    if (tb < tlen) cur = make(cur, token, tb, tlen);
    return cur;
}

TreeArena::Node TreeArena::push_word(Node u, const Word& w) {
    if (w.empty()) return u;
    return push(u, add_token(w));
}

TreeArena::Node TreeArena::ancestor_at_depth(Node u, std::uint32_t depth) const {
    while (nodes_[u].depth > depth) {
        Node j = nodes_[u].jump;
        u = nodes_[j].depth >= depth ? j : nodes_[u].parent;
    }
    return u;
}

TreeArena::Node TreeArena::slice_containing(Node u, std::uint64_t i) const {
    // Shallowest ancestor whose cumulative length exceeds i.
    for (;;) {
        Node p = nodes_[u].parent;
        if (p == root || nodes_[p].len <= i) return u;
        Node j = nodes_[u].jump;
        u = (j != root && nodes_[j].len > i) ? j : p;
    }
}

TreeArena::Node TreeArena::common_ancestor(Node u, Node v) const {
    if (nodes_[u].depth > nodes_[v].depth) u = ancestor_at_depth(u, nodes_[v].depth);
    if (nodes_[v].depth > nodes_[u].depth) v = ancestor_at_depth(v, nodes_[u].depth);
    while (u != v) {
        Node ju = nodes_[u].jump, jv = nodes_[v].jump;
        if (ju != jv) {
            u = ju;
            v = jv;
        } else {
            u = nodes_[u].parent;
            v = nodes_[v].parent;
        }
    }
    return u;
}

std::uint64_t TreeArena::lcp(Node u, Node v) const {
    if (u == v) return nodes_[u].len;
    Node w = common_ancestor(u, v);
    std::uint64_t k = nodes_[w].len;
    const std::uint64_t lu = nodes_[u].len, lv = nodes_[v].len;
    while (k < lu && k < lv) {
        Node a = slice_containing(u, k), b = slice_containing(v, k);
        const Slice& sa = nodes_[a];
        const Slice& sb = nodes_[b];
        std::uint64_t oa = sa.begin + (k - nodes_[sa.parent].len);
        std::uint64_t ob = sb.begin + (k - nodes_[sb.parent].len);
        std::uint64_t m = std::min(sa.end - oa, sb.end - ob);
        if (sa.token == sb.token && oa == ob) {
            k += m;
            continue;
        }
        const std::vector<int>& A = tokens_[sa.token];
        const std::vector<int>& B = tokens_[sb.token];
        std::uint64_t j = 0;
        while (j < m && A[oa + j] == B[ob + j]) ++j;
        k += j;
        if (j < m) break;
    }
    return std::min({k, lu, lv});
}

double TreeArena::gromov(Node x, Node y, Node p) const {
    std::int64_t dx = static_cast<std::int64_t>(distance(p, x));
    std::int64_t dy = static_cast<std::int64_t>(distance(p, y));
    std::int64_t dxy = static_cast<std::int64_t>(distance(x, y));
    return 0.5 * static_cast<double>(dx + dy - dxy);
}

TreeArena::Node TreeArena::prefix(Node u, std::uint64_t len) {
    if (len >= nodes_[u].len) return u;
    if (len == 0) return root;
    Node s = slice_containing(u, len - 1);
    if (nodes_[s].len == len) return s;
    const Slice sl = nodes_[s];
    std::uint64_t keep = len - nodes_[sl.parent].len;
    return make(sl.parent, sl.token, sl.begin, sl.begin + static_cast<std::uint32_t>(keep));
}

int TreeArena::letter_at(Node u, std::uint64_t i) const {
    Node s = slice_containing(u, i);
    const Slice& sl = nodes_[s];
    return tokens_[sl.token][sl.begin + (i - nodes_[sl.parent].len)];
}

Word TreeArena::word(Node u) const {
    std::vector<Node> chain;
    for (Node x = u; x != root; x = nodes_[x].parent) chain.push_back(x);
    std::vector<int> letters;
    letters.reserve(nodes_[u].len);
    for (auto it = chain.rbegin(); it != chain.rend(); ++it) {
        const Slice& s = nodes_[*it];
        const std::vector<int>& T = tokens_[s.token];
        letters.insert(letters.end(), T.begin() + s.begin, T.begin() + s.end);
    }
    return Word(rank_, std::move(letters));
}

std::uint64_t TreeArena::cyclic_length(Node u) const {
    const std::uint64_t n = nodes_[u].len;
    if (n < 2) return n;
    // Walk inward from both ends, one slice lookup per slice crossed.
    std::uint64_t k = 0;
    Node front = root, back = root;
    std::uint64_t front_lo = 1, front_hi = 0, back_lo = 1, back_hi = 0;
    while (2 * k + 1 < n) {
        std::uint64_t i = k, j = n - 1 - k;
        if (i < front_lo || i > front_hi) {
            front = slice_containing(u, i);
            front_lo = nodes_[nodes_[front].parent].len;
            front_hi = nodes_[front].len - 1;
        }
        if (j < back_lo || j > back_hi) {
            back = slice_containing(u, j);
            back_lo = nodes_[nodes_[back].parent].len;
            back_hi = nodes_[back].len - 1;
        }
        const Slice& f = nodes_[front];
        const Slice& b = nodes_[back];
        int li = tokens_[f.token][f.begin + (i - front_lo)];
        int lj = tokens_[b.token][b.begin + (j - back_lo)];
        if (li != -lj) break;
        ++k;
    }
    return n - 2 * k;
}

}  // namespace pw
