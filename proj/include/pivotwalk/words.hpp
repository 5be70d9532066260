#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace pw {

// Hard cap on stored word length; longer products throw std::length_error.
inline constexpr std::size_t kMaxWordLength = std::size_t{1} << 24;

// Freely reduced word in the free group of the given rank.
// Letter k in 1..rank is the k-th generator, -k its inverse.
class Word {
public:
    Word() = default;
    explicit Word(int rank) : rank_(rank) {}
    Word(int rank, std::vector<int> letters);

    // Generators are a, b, c, ...; upper case is the inverse ("abA" = a b a^-1).
    static Word parse(int rank, std::string_view text);
    static Word generator(int rank, int letter);

    int rank() const { return rank_; }
    const std::vector<int>& letters() const { return letters_; }
    std::size_t length() const { return letters_.size(); }
    bool empty() const { return letters_.empty(); }
    int operator[](std::size_t i) const { return letters_[i]; }

    Word inverse() const;
    Word operator*(const Word& other) const;
    Word& operator*=(const Word& other);
    Word pow(long long n) const;

    // Splits w = u c u^-1 with c cyclically reduced; returns c.
    Word cyclic_core() const;
    std::size_t conjugator_length() const;
    bool cyclically_reduced() const;

    std::string str() const;

    friend bool operator==(const Word& x, const Word& y) { return x.letters_ == y.letters_; }
    friend bool operator<(const Word& x, const Word& y) { return x.letters_ < y.letters_; }

private:
    void append(int letter);

    int rank_ = 2;
    std::vector<int> letters_;
};

std::size_t common_prefix(const Word& x, const Word& y);

// Number of cancelling letters between the two ends of a reduced word.
std::size_t end_cancellation(const std::vector<int>& letters);

void check_letter(int rank, int letter);

}  // namespace pw
