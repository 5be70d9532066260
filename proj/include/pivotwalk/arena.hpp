#pragma once

#include <cstdint>
#include <map>
#include <vector>

#include "pivotwalk/words.hpp"

namespace pw {

// Persistent store of reduced words in a free group, shared by all positions
// of one or more walks. A node is a reduced word represented as its parent
// word followed by a slice of a registered token; pushing a token onto a node
// performs free reduction against the slices below it. Nodes are never
// mutated, so any earlier position stays valid after further pushes.
//
// Distances come from longest common prefixes of reduced words: the node
// tree gives a common ancestor in O(log depth) through jump pointers, and the
// slices above it are compared token-wise.
class TreeArena {
public:
    using Node = std::uint32_t;
    static constexpr Node root = 0;
    // Nodes hold no letters, so words here may be far longer than a Word.
    static constexpr std::uint64_t max_length = std::uint64_t{1} << 40;

    explicit TreeArena(int rank);

    int rank() const { return rank_; }

    // Registers w (nonempty, reduced) and its inverse; returns the id of w.
    // The inverse has id ^ 1. Registering the same word twice returns the same id.
    int add_token(const Word& w);
    static int inverse_token(int token) { return token ^ 1; }
    const std::vector<int>& token_letters(int token) const { return tokens_[token]; }
    std::size_t token_count() const { return tokens_.size(); }

    Node push(Node u, int token);
    Node push_word(Node u, const Word& w);
    Node from_word(const Word& w) { return push_word(root, w); }

    std::uint64_t length(Node u) const { return nodes_[u].len; }
    std::uint64_t lcp(Node u, Node v) const;
    std::uint64_t distance(Node u, Node v) const {
        return nodes_[u].len + nodes_[v].len - 2 * lcp(u, v);
    }
    // (x, y)_p as an integer multiple of one half; exact.
    double gromov(Node x, Node y, Node p) const;

    // Node for the first len letters of u.
    Node prefix(Node u, std::uint64_t len);
    int letter_at(Node u, std::uint64_t i) const;
    Word word(Node u) const;

    // Length of the cyclic reduction, i.e. the translation length of u.
    std::uint64_t cyclic_length(Node u) const;

    std::size_t size() const { return nodes_.size(); }
    void reserve(std::size_t n) { nodes_.reserve(n); }
    // Nodes created after mark() can be dropped again with rollback(); any
    // handle to them is then dangling.
    std::size_t mark() const { return nodes_.size(); }
    void rollback(std::size_t m) {
        if (m >= 1 && m < nodes_.size()) nodes_.resize(m);
    }

private:
    struct Slice {
        Node parent;
        Node jump;
        std::uint32_t depth;
        std::int32_t token;
        std::uint32_t begin;
        std::uint32_t end;
        std::uint64_t len;
    };

    Node make(Node parent, int token, std::uint32_t begin, std::uint32_t end);
    Node ancestor_at_depth(Node u, std::uint32_t depth) const;
    Node slice_containing(Node u, std::uint64_t i) const;
    Node common_ancestor(Node u, Node v) const;

    int rank_;
    std::vector<std::vector<int>> tokens_;
    std::map<std::vector<int>, int> token_ids_;
    std::vector<Slice> nodes_;
};

}  // namespace pw
