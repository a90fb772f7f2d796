#pragma once

#include <optional>
#include <string>
#include <vector>

namespace idq {

/// A rate in bits per sample, or the distinguished value Infinite.
class Rate {
 public:
  static Rate bits(double value);
  static Rate infinite() { return Rate(); }

  bool is_infinite() const { return infinite_; }
  bool is_finite() const { return !infinite_; }
  /// Throws DomainError for an infinite rate.
  double value() const;

  friend bool operator==(const Rate&, const Rate&) = default;

 private:
  Rate() = default;
  bool infinite_ = true;
  double bits_ = 0.0;
};

struct RateSimilarityPoint {
  double d_id = 0.0;
  Rate rate = Rate::bits(0.0);
};

/// Direction of rate along increasing d_id.
enum class Monotonicity { kNonDecreasing, kNonIncreasing, kUnspecified };

struct Curve {
  std::vector<RateSimilarityPoint> points;  ///< strictly increasing d_id
  std::string label;
  Monotonicity monotonicity = Monotonicity::kNonDecreasing;

  /// Sorts by d_id and keeps the lowest-rate point among equal d_id values.
  void normalize();
  bool satisfies_monotonicity(double slack = 0.0) const;
  /// Linear interpolation of finite rates; nullopt outside the covered range
  /// or next to an infinite point.
  std::optional<double> rate_at(double d_id) const;
  double min_d_id() const;
  double max_d_id() const;
};

}  // namespace idq
