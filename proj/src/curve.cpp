#include "idq/curve.hpp"

#include <algorithm>

#include "idq/errors.hpp"

namespace idq {

Rate Rate::bits(double value) {
  if (!(value >= 0.0)) throw Error(ErrorKind::kDomainError, "rate must be >= 0");
  Rate r;
  r.infinite_ = false;
  r.bits_ = value;
  return r;
}

double Rate::value() const {
  if (infinite_) throw Error(ErrorKind::kDomainError, "rate is infinite");
  return bits_;
}

namespace {

bool lower_rate(const Rate& a, const Rate& b) {
  if (a.is_infinite()) return false;
  if (b.is_infinite()) return true;
  return a.value() < b.value();
}

}  // namespace

void Curve::normalize() {
  std::stable_sort(points.begin(), points.end(),
                   [](const auto& a, const auto& b) { return a.d_id < b.d_id; });
  std::vector<RateSimilarityPoint> kept;
  kept.reserve(points.size());
  for (const auto& p : points) {
    if (!kept.empty() && kept.back().d_id == p.d_id) {
      if (lower_rate(p.rate, kept.back().rate)) kept.back() = p;
      continue;
    }
    kept.push_back(p);
  }
  points = std::move(kept);
}

bool Curve::satisfies_monotonicity(double slack) const {
  for (std::size_t i = 1; i < points.size(); ++i) {
    if (!(points[i].d_id > points[i - 1].d_id)) return false;
    const Rate& a = points[i - 1].rate;
    const Rate& b = points[i].rate;
    switch (monotonicity) {
      case Monotonicity::kNonDecreasing:
        if (a.is_infinite() && b.is_finite()) return false;
        if (a.is_finite() && b.is_finite() && b.value() < a.value() - slack) return false;
        break;
      case Monotonicity::kNonIncreasing:
        if (b.is_infinite() && a.is_finite()) return false;
        if (a.is_finite() && b.is_finite() && b.value() > a.value() + slack) return false;
        break;
      case Monotonicity::kUnspecified:
        break;
    }
  }
  return true;
}

std::optional<double> Curve::rate_at(double d_id) const {
  if (points.empty() || d_id < points.front().d_id || d_id > points.back().d_id)
    return std::nullopt;
  const auto hi = std::lower_bound(points.begin(), points.end(), d_id,
                                   [](const auto& p, double d) { return p.d_id < d; });
  if (hi->d_id == d_id) {
    if (hi->rate.is_infinite()) return std::nullopt;
    return hi->rate.value();
  }
  const auto lo = hi - 1;
  if (lo->rate.is_infinite() || hi->rate.is_infinite()) return std::nullopt;
  const double w = (d_id - lo->d_id) / (hi->d_id - lo->d_id);
  return (1.0 - w) * lo->rate.value() + w * hi->rate.value();
}

double Curve::min_d_id() const {
  if (points.empty()) throw Error(ErrorKind::kDomainError, "empty curve");
  return points.front().d_id;
}

double Curve::max_d_id() const {
  if (points.empty()) throw Error(ErrorKind::kDomainError, "empty curve");
  return points.back().d_id;
}

}  // namespace idq
