#include "pivotwalk/models.hpp"

#include <algorithm>
#include <cmath>

namespace pw {

std::string to_string(IsometryKind k) {
    switch (k) {
        case IsometryKind::elliptic: return "elliptic";
        case IsometryKind::parabolic: return "parabolic";
        case IsometryKind::loxodromic: return "loxodromic";
    }
    return "?";
}

Moebius Moebius::normalized() const {
    double s = std::sqrt(std::abs(det()));
    if (s == 0) throw std::domain_error("singular matrix");
    return {a / s, b / s, c / s, d / s};
}

Moebius Moebius::operator*(const Moebius& o) const {
    Moebius m{a * o.a + b * o.c, a * o.b + b * o.d, c * o.a + d * o.c, c * o.b + d * o.d};
    return m.normalized();
}

Plane Moebius::apply(Plane z) const { return (a * z + b) / (c * z + d); }

double plane_distance(Plane z, Plane w) {
    double r = std::abs(z - w) / (2.0 * std::sqrt(z.imag() * w.imag()));
    return 2.0 * std::asinh(r);
}

std::uint64_t translation_length(const Word& g) {
    return g.length() - 2 * g.conjugator_length();
}

double translation_length_limit_oracle(const Word& g, long long n_max) {
    if (n_max < 1) throw std::invalid_argument("n_max must be positive");
    return static_cast<double>(g.pow(n_max).length()) / static_cast<double>(n_max);
}

IsometryKind classify_isometry(const Word& g) {
    return translation_length(g) > 0 ? IsometryKind::loxodromic : IsometryKind::elliptic;
}

bool are_independent(const Word& g, const Word& h) {
    if (classify_isometry(g) != IsometryKind::loxodromic ||
        classify_isometry(h) != IsometryKind::loxodromic)
        throw std::invalid_argument("independence needs loxodromic elements");
    return !(g * h == h * g);
}

double translation_length(const Moebius& g) {
    double t = std::abs(g.normalized().trace());
    return t > 2.0 ? 2.0 * std::acosh(t / 2.0) : 0.0;
}

double translation_length_limit_oracle(const Moebius& g, long long n_max) {
    if (n_max < 1) throw std::invalid_argument("n_max must be positive");
    // g^n = e^L * m, rescaled after each product so entries stay near 1.
    struct Scaled {
        double e[4];
        double L;
    };
    auto mul = [](const Scaled& x, const Scaled& y) {
        Scaled r{{x.e[0] * y.e[0] + x.e[1] * y.e[2], x.e[0] * y.e[1] + x.e[1] * y.e[3],
                  x.e[2] * y.e[0] + x.e[3] * y.e[2], x.e[2] * y.e[1] + x.e[3] * y.e[3]},
                 x.L + y.L};
        double m = std::max({std::abs(r.e[0]), std::abs(r.e[1]), std::abs(r.e[2]), std::abs(r.e[3])});
        for (double& v : r.e) v /= m;
        r.L += std::log(m);
        return r;
    };
    Moebius h = g.normalized();
    Scaled base{{h.a, h.b, h.c, h.d}, 0.0}, acc{{1, 0, 0, 1}, 0.0};
    for (long long n = n_max; n > 0; n >>= 1) {
        if (n & 1) acc = mul(acc, base);
        base = mul(base, base);
    }
    // d(i, M i) = acosh(|M|_F^2 / 2) for det M = 1.
    double f2 = acc.e[0] * acc.e[0] + acc.e[1] * acc.e[1] + acc.e[2] * acc.e[2] + acc.e[3] * acc.e[3];
    double logx = 2.0 * acc.L + std::log(f2) - std::log(2.0);
    double d = logx > 30.0 ? logx + std::log(2.0) : std::acosh(std::max(1.0, std::exp(logx)));
    return d / static_cast<double>(n_max);
}

IsometryKind classify_isometry(const Moebius& g) {
    double t = std::abs(g.normalized().trace());
    if (std::abs(t - 2.0) <= kPlaneTol) return IsometryKind::parabolic;
    return t < 2.0 ? IsometryKind::elliptic : IsometryKind::loxodromic;
}

BoundaryPoints fixed_points(const Moebius& g) {
    Moebius h = g.normalized();
    BoundaryPoints r;
    // c z^2 + (d - a) z - b = 0
    if (std::abs(h.c) <= kPlaneTol) {
        r.p[r.count++] = std::nullopt;
        if (std::abs(h.d - h.a) > kPlaneTol) r.p[r.count++] = h.b / (h.d - h.a);
        return r;
    }
    double disc = (h.d - h.a) * (h.d - h.a) + 4.0 * h.b * h.c;
    if (disc < -kPlaneTol) return r;
    if (std::abs(disc) <= kPlaneTol) {
        r.p[r.count++] = (h.a - h.d) / (2.0 * h.c);
        return r;
    }
    double s = std::sqrt(disc);
    r.p[r.count++] = (h.a - h.d - s) / (2.0 * h.c);
    r.p[r.count++] = (h.a - h.d + s) / (2.0 * h.c);
    return r;
}

namespace {
bool same_boundary_point(const std::optional<double>& x, const std::optional<double>& y) {
    if (!x || !y) return !x && !y;
    return std::abs(*x - *y) <= kPlaneTol * std::max({1.0, std::abs(*x), std::abs(*y)});
}
}  // namespace

bool are_independent(const Moebius& g, const Moebius& h) {
    if (classify_isometry(g) != IsometryKind::loxodromic ||
        classify_isometry(h) != IsometryKind::loxodromic)
        throw std::invalid_argument("independence needs loxodromic elements");
    BoundaryPoints fg = fixed_points(g), fh = fixed_points(h);
    for (int i = 0; i < fg.count; ++i)
        for (int j = 0; j < fh.count; ++j)
            if (same_boundary_point(fg.p[i], fh.p[j])) return false;
    return true;
}

void SpaceModel::check(const GroupElement& g) const {
    bool ok = kind_ == Kind::tree ? std::holds_alternative<Word>(g) : std::holds_alternative<Moebius>(g);
    if (!ok) throw std::invalid_argument("element does not belong to this space model");
    if (kind_ == Kind::tree && std::get<Word>(g).rank() != rank_)
        throw std::invalid_argument("word rank does not match the tree");
}

Point SpaceModel::basepoint() const {
    if (kind_ == Kind::tree) return Word(rank_);
    return kPlaneBase;
}

GroupElement SpaceModel::identity() const {
    if (kind_ == Kind::tree) return Word(rank_);
    return Moebius::identity();
}

Point SpaceModel::act(const GroupElement& g, const Point& x) const {
    check(g);
    if (kind_ == Kind::tree) {
        if (!std::holds_alternative<Word>(x)) throw std::invalid_argument("mixed space models");
        return std::get<Word>(g) * std::get<Word>(x);
    }
    if (!std::holds_alternative<Plane>(x)) throw std::invalid_argument("mixed space models");
    return std::get<Moebius>(g).apply(std::get<Plane>(x));
}

double SpaceModel::dist(const Point& x, const Point& y) const {
    if (x.index() != y.index()) throw std::invalid_argument("mixed space models");
    if (kind_ == Kind::tree) {
        if (!std::holds_alternative<Word>(x)) throw std::invalid_argument("mixed space models");
        return WordSpace{}.dist(std::get<Word>(x), std::get<Word>(y));
    }
    if (!std::holds_alternative<Plane>(x)) throw std::invalid_argument("mixed space models");
    return plane_distance(std::get<Plane>(x), std::get<Plane>(y));
}

double SpaceModel::translation_length(const GroupElement& g) const {
    check(g);
    if (kind_ == Kind::tree) return static_cast<double>(pw::translation_length(std::get<Word>(g)));
    return pw::translation_length(std::get<Moebius>(g));
}

IsometryKind SpaceModel::classify(const GroupElement& g) const {
    check(g);
    if (kind_ == Kind::tree) return classify_isometry(std::get<Word>(g));
    return classify_isometry(std::get<Moebius>(g));
}

bool SpaceModel::independent(const GroupElement& g, const GroupElement& h) const {
    check(g);
    check(h);
    if (kind_ == Kind::tree) return are_independent(std::get<Word>(g), std::get<Word>(h));
    return are_independent(std::get<Moebius>(g), std::get<Moebius>(h));
}

GroupElement SpaceModel::multiply(const GroupElement& g, const GroupElement& h) const {
    check(g);
    check(h);
    if (kind_ == Kind::tree) return std::get<Word>(g) * std::get<Word>(h);
    return std::get<Moebius>(g) * std::get<Moebius>(h);
}

}  // namespace pw
