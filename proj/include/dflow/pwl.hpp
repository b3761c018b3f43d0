#pragma once

#include <iosfwd>
#include <limits>
#include <vector>

namespace dflow {

// Breakpoints closer than this (absolute, in time units) are merged.
inline constexpr double kMergeTol = 1e-9;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Right-continuous piecewise-constant function on [0, inf).
///
/// values()[0] holds on [0, b_0), values()[i] on [b_{i-1}, b_i) and
/// values().back() after the last breakpoint. Instances are always kept in
/// canonical form: breakpoints strictly increasing and positive, adjacent
/// values distinct.
class StepFunction {
 public:
  StepFunction() : values_{0.0} {}
  explicit StepFunction(double constant) : values_{constant} {}
  StepFunction(std::vector<double> breakpoints, std::vector<double> values);

  /// `height` on [start, end), zero elsewhere. `end` may be kInf.
  static StepFunction indicator(double start, double end, double height);

  double operator()(double t) const;

  const std::vector<double>& breakpoints() const { return breakpoints_; }
  const std::vector<double>& values() const { return values_; }
  double tail() const { return values_.back(); }

  /// Start of the interval that contains t (0 for the first interval).
  double piece_start(std::size_t piece) const {
    return piece == 0 ? 0.0 : breakpoints_[piece - 1];
  }
  double piece_end(std::size_t piece) const {
    return piece < breakpoints_.size() ? breakpoints_[piece] : kInf;
  }
  std::size_t num_pieces() const { return values_.size(); }

  double min_value() const;
  double max_value() const;

  friend bool operator==(const StepFunction&, const StepFunction&) = default;

 private:
  void canonicalize();

  std::vector<double> breakpoints_;
  std::vector<double> values_;
};

StepFunction add(const StepFunction& f, const StepFunction& g);
StepFunction scale(const StepFunction& f, double factor);
StepFunction pointwise_min(const StepFunction& f, const StepFunction& g);
StepFunction clamp_below(const StepFunction& f, double cap);
/// g(t) = f(t - delta) for t >= delta, `fill` on [0, delta). delta >= 0.
StepFunction shift(const StepFunction& f, double delta, double fill = 0.0);
/// f on [0, horizon), zero afterwards.
StepFunction truncate(const StepFunction& f, double horizon);

struct Point {
  double x;
  double y;
  friend bool operator==(const Point&, const Point&) = default;
};

/// Nondecreasing piecewise-linear function given by its vertices and the
/// slope after the last vertex.
///
/// Functions are continuous except for upward jumps, which appear when a
/// flat segment is inverted; a jump is two consecutive vertices with the same
/// x. At a jump the function takes the lower value, so every instance is
/// left-continuous. Below the first vertex the function is constant.
/// A tail slope of kInf means the value is +inf beyond the last vertex.
class MonotonePwl {
 public:
  /// The identity on [0, inf).
  MonotonePwl() : points_{{0.0, 0.0}}, tail_slope_(1.0) {}
  MonotonePwl(std::vector<Point> points, double tail_slope);

  static MonotonePwl identity() { return MonotonePwl(); }
  /// t -> slope * t + offset on [0, inf).
  static MonotonePwl affine(double slope, double offset);
  static MonotonePwl constant(double value) { return affine(0.0, value); }

  double operator()(double x) const;
  double right_limit(double x) const;
  /// Slope immediately to the right of x.
  double right_slope(double x) const;

  /// inf{x >= x_first : f(x) >= y}: the earliest point that reaches y.
  double first_reach(double y) const;

  const std::vector<Point>& points() const { return points_; }
  double tail_slope() const { return tail_slope_; }
  double first_x() const { return points_.front().x; }
  double last_x() const { return points_.back().x; }

  friend bool operator==(const MonotonePwl&, const MonotonePwl&) = default;

 private:
  void canonicalize();
  // Index of the last vertex with x-coordinate <= x (first one on a jump).
  std::size_t segment_of(double x) const;

  std::vector<Point> points_;
  double tail_slope_;
};

/// Cumulative integral from 0. Throws NegativeRate for negative rates.
MonotonePwl integrate(const StepFunction& rate);
/// Slopes of a cumulative function; jumps above 1e-7 throw std::domain_error.
StepFunction differentiate(const MonotonePwl& cumulative);
/// outer(inner(x)).
MonotonePwl compose(const MonotonePwl& outer, const MonotonePwl& inner);
/// Generalized inverse y -> inf{x : f(x) >= y}; flat segments map to their
/// left endpoint.
MonotonePwl inverse(const MonotonePwl& f);
MonotonePwl add(const MonotonePwl& f, const MonotonePwl& g);
MonotonePwl pointwise_min(const MonotonePwl& f, const MonotonePwl& g);
/// g(x) = f(x - dx) (x-shift) plus dy.
MonotonePwl shift(const MonotonePwl& f, double dx, double dy = 0.0);

/// General continuous piecewise-linear function (not necessarily monotone),
/// used for queue masses.
struct PiecewiseLinear {
  std::vector<Point> points;
  double tail_slope = 0.0;

  double operator()(double x) const;
  double min_value() const;
};

void write_csv(std::ostream& out, const StepFunction& f);
void write_csv(std::ostream& out, const MonotonePwl& f);

}  // namespace dflow
