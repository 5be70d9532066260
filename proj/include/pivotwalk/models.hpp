#pragma once

#include <complex>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>

#include "pivotwalk/arena.hpp"
#include "pivotwalk/words.hpp"

namespace pw {

// Orientation-preserving isometry of the upper half plane, z -> (az+b)/(cz+d).
struct Moebius {
    double a = 1, b = 0, c = 0, d = 1;

    static Moebius identity() { return {}; }
    // Rescales by sqrt|det| so the determinant returns to 1.
    Moebius normalized() const;
    Moebius operator*(const Moebius& o) const;
    Moebius inverse() const { return {d, -b, -c, a}; }
    double det() const { return a * d - b * c; }
    double trace() const { return a + d; }
    std::complex<double> apply(std::complex<double> z) const;
};

using Plane = std::complex<double>;
inline const Plane kPlaneBase{0.0, 1.0};

enum class IsometryKind { elliptic, parabolic, loxodromic };
std::string to_string(IsometryKind k);

// Hyperbolicity constant used for the plane; the tree model has 0.
inline constexpr double kPlaneDelta = 0.7;
inline constexpr double kPlaneTol = 1e-9;

double plane_distance(Plane z, Plane w);

// Word metric on the Cayley tree of a free group, basepoint the identity.
struct WordSpace {
    using Point = Word;
    bool exact() const { return true; }
    double dist(const Word& x, const Word& y) const {
        return static_cast<double>(x.length() + y.length() - 2 * common_prefix(x, y));
    }
    double delta() const { return 0.0; }
};

// Same metric, with points held in a shared arena.
struct ArenaSpace {
    using Point = TreeArena::Node;
    bool exact() const { return true; }
    const TreeArena* arena;
    explicit ArenaSpace(const TreeArena& a) : arena(&a) {}
    double dist(Point x, Point y) const { return static_cast<double>(arena->distance(x, y)); }
    double delta() const { return 0.0; }
};

struct PlaneSpace {
    using Point = Plane;
    bool exact() const { return false; }
    double dist(Plane x, Plane y) const { return plane_distance(x, y); }
    double delta() const { return kPlaneDelta; }
};

// Tree model.
std::uint64_t translation_length(const Word& g);
double translation_length_limit_oracle(const Word& g, long long n_max);
IsometryKind classify_isometry(const Word& g);
// Loxodromic elements of a free group have a common fixed point exactly when
// they commute.
bool are_independent(const Word& g, const Word& h);

// Plane model.
double translation_length(const Moebius& g);
double translation_length_limit_oracle(const Moebius& g, long long n_max);
IsometryKind classify_isometry(const Moebius& g);
bool are_independent(const Moebius& g, const Moebius& h);

// Boundary fixed points of g in R ∪ {∞}; nullopt stands for ∞.
struct BoundaryPoints {
    int count = 0;
    std::optional<double> p[2];
};
BoundaryPoints fixed_points(const Moebius& g);

// Runtime-tagged values for config-driven code and the Python bindings.
using GroupElement = std::variant<Word, Moebius>;
using Point = std::variant<Word, Plane>;

class SpaceModel {
public:
    enum class Kind { tree, hyperbolic_plane };
    using Point = ::pw::Point;

    static SpaceModel tree(int rank) { return SpaceModel(Kind::tree, rank); }
    static SpaceModel plane() { return SpaceModel(Kind::hyperbolic_plane, 0); }

    Kind kind() const { return kind_; }
    int rank() const { return rank_; }
    double delta() const { return kind_ == Kind::tree ? 0.0 : kPlaneDelta; }
    bool exact() const { return kind_ == Kind::tree; }

    Point basepoint() const;
    Point act(const GroupElement& g, const Point& x) const;
    double dist(const Point& x, const Point& y) const;
    double translation_length(const GroupElement& g) const;
    IsometryKind classify(const GroupElement& g) const;
    bool independent(const GroupElement& g, const GroupElement& h) const;
    GroupElement multiply(const GroupElement& g, const GroupElement& h) const;
    GroupElement identity() const;

private:
    SpaceModel(Kind k, int rank) : kind_(k), rank_(rank) {}
    void check(const GroupElement& g) const;
    Kind kind_;
    int rank_;
};

}  // namespace pw
