#include "pivotwalk/words.hpp"

#include <cctype>
#include <cstdlib>
#include <stdexcept>

namespace pw {

void check_letter(int rank, int letter) {
    if (letter == 0 || std::abs(letter) > rank)
        throw std::invalid_argument("letter out of range for rank " + std::to_string(rank));
}

Word::Word(int rank, std::vector<int> letters) : rank_(rank) {
    letters_.reserve(letters.size());
    for (int l : letters) append(l);
}

Word Word::parse(int rank, std::string_view text) {
    Word w(rank);
    for (char ch : text) {
        if (std::isspace(static_cast<unsigned char>(ch)) || ch == '1') continue;
        if (!std::isalpha(static_cast<unsigned char>(ch)))
            throw std::invalid_argument(std::string("bad letter '") + ch + "' in word");
        int k = std::tolower(static_cast<unsigned char>(ch)) - 'a' + 1;
        w.append(std::isupper(static_cast<unsigned char>(ch)) ? -k : k);
    }
    return w;
}

Word Word::generator(int rank, int letter) {
    Word w(rank);
    w.append(letter);
    return w;
}

void Word::append(int letter) {
    check_letter(rank_, letter);
    if (!letters_.empty() && letters_.back() == -letter) {
        letters_.pop_back();
        return;
    }
    if (letters_.size() >= kMaxWordLength) throw std::length_error("word capacity exceeded");
    letters_.push_back(letter);
}

Word Word::inverse() const {
    Word w(rank_);
    w.letters_.resize(letters_.size());
    for (std::size_t i = 0; i < letters_.size(); ++i)
        w.letters_[i] = -letters_[letters_.size() - 1 - i];
    return w;
}

Word& Word::operator*=(const Word& other) {
    std::size_t k = 0;
    while (k < other.length() && !letters_.empty() && letters_.back() == -other.letters_[k]) {
        letters_.pop_back();
        ++k;
    }
    if (letters_.size() + (other.length() - k) > kMaxWordLength)
        throw std::length_error("word capacity exceeded");
    letters_.insert(letters_.end(), other.letters_.begin() + static_cast<std::ptrdiff_t>(k),
                    other.letters_.end());
    return *this;
}

Word Word::operator*(const Word& other) const {
    Word w = *this;
    w *= other;
    return w;
}

Word Word::pow(long long n) const {
    if (n < 0) return inverse().pow(-n);
    std::size_t u = conjugator_length();
    std::size_t core = letters_.size() - 2 * u;
    if (core > 0 && 2 * u + static_cast<std::size_t>(n) * core > kMaxWordLength)
        throw std::length_error("word capacity exceeded");
    Word result(rank_);
    if (n == 0 || empty()) return result;
    result.letters_.reserve(2 * u + static_cast<std::size_t>(n) * core);
    result.letters_.assign(letters_.begin(), letters_.begin() + static_cast<std::ptrdiff_t>(u));
    for (long long i = 0; i < n; ++i)
        result.letters_.insert(result.letters_.end(), letters_.begin() + static_cast<std::ptrdiff_t>(u),
                               letters_.end() - static_cast<std::ptrdiff_t>(u));
    result.letters_.insert(result.letters_.end(), letters_.end() - static_cast<std::ptrdiff_t>(u),
                           letters_.end());
    return result;
}

std::size_t end_cancellation(const std::vector<int>& letters) {
    std::size_t k = 0, n = letters.size();
    while (2 * k + 1 < n && letters[k] == -letters[n - 1 - k]) ++k;
    return k;
}

std::size_t Word::conjugator_length() const { return end_cancellation(letters_); }

Word Word::cyclic_core() const {
    std::size_t u = conjugator_length();
    Word w(rank_);
    w.letters_.assign(letters_.begin() + static_cast<std::ptrdiff_t>(u),
                      letters_.end() - static_cast<std::ptrdiff_t>(u));
    return w;
}

bool Word::cyclically_reduced() const {
    return letters_.size() < 2 || letters_.front() != -letters_.back();
}

std::string Word::str() const {
    if (letters_.empty()) return "1";
    std::string s;
    s.reserve(letters_.size());
    for (int l : letters_) {
        char ch = static_cast<char>('a' + std::abs(l) - 1);
        s.push_back(l > 0 ? ch : static_cast<char>(std::toupper(ch)));
    }
    return s;
}

std::size_t common_prefix(const Word& x, const Word& y) {
    std::size_t n = std::min(x.length(), y.length()), k = 0;
    while (k < n && x[k] == y[k]) ++k;
    return k;
}

}  // namespace pw
