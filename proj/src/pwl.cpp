#include "dflow/pwl.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>

#include "dflow/csv.hpp"
#include "dflow/errors.hpp"

namespace dflow {
namespace {

bool nearly_equal(double a, double b) {
  if (a == b) return true;
  if (std::isinf(a) || std::isinf(b)) return false;
  return std::abs(a - b) <= 1e-12 * std::max({1.0, std::abs(a), std::abs(b)});
}

// Applies `op` piecewise on the merged breakpoint set of f and g.
template <typename Op>
StepFunction combine(const StepFunction& f, const StepFunction& g, Op op) {
  std::vector<double> cuts;
  cuts.reserve(f.breakpoints().size() + g.breakpoints().size());
  std::merge(f.breakpoints().begin(), f.breakpoints().end(),
             g.breakpoints().begin(), g.breakpoints().end(),
             std::back_inserter(cuts));
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
  std::vector<double> values;
  values.reserve(cuts.size() + 1);
  values.push_back(op(f(0.0), g(0.0)));
  for (double c : cuts) values.push_back(op(f(c), g(c)));
  return StepFunction(std::move(cuts), std::move(values));
}

}  // namespace

// ---------------------------------------------------------------------------
// StepFunction

StepFunction::StepFunction(std::vector<double> breakpoints, std::vector<double> values)
    : breakpoints_(std::move(breakpoints)), values_(std::move(values)) {
  if (values_.size() != breakpoints_.size() + 1) {
    throw std::invalid_argument("StepFunction: need one value per interval");
  }
  for (std::size_t i = 0; i < breakpoints_.size(); ++i) {
    if (!std::isfinite(breakpoints_[i])) {
      throw std::invalid_argument("StepFunction: breakpoints must be finite");
    }
    if (i > 0 && breakpoints_[i] < breakpoints_[i - 1]) {
      throw std::invalid_argument("StepFunction: breakpoints must be increasing");
    }
  }
  for (double v : values_) {
    if (std::isnan(v)) throw std::invalid_argument("StepFunction: NaN value");
  }
  canonicalize();
}

void StepFunction::canonicalize() {
  std::vector<double> bps;
  std::vector<double> vals;
  bps.reserve(breakpoints_.size());
  vals.reserve(values_.size());
  vals.push_back(values_[0]);
  for (std::size_t i = 0; i < breakpoints_.size(); ++i) {
    const double b = breakpoints_[i];
    const double v = values_[i + 1];
    if (b <= kMergeTol) {
      // The interval before b is negligible; the new value starts at 0.
      vals.back() = v;
      continue;
    }
    if (!bps.empty() && b - bps.back() <= kMergeTol) {
      // Drop the sliver [bps.back(), b); its successor starts earlier.
      vals.back() = v;
      continue;
    }
    bps.push_back(b);
    vals.push_back(v);
  }
  // Merge equal neighbours.
  breakpoints_.clear();
  values_.clear();
  values_.push_back(vals[0]);
  for (std::size_t i = 0; i < bps.size(); ++i) {
    if (nearly_equal(vals[i + 1], values_.back())) continue;
    breakpoints_.push_back(bps[i]);
    values_.push_back(vals[i + 1]);
  }
}

StepFunction StepFunction::indicator(double start, double end, double height) {
  start = std::max(start, 0.0);
  if (!(end > start)) return StepFunction();
  std::vector<double> bps;
  std::vector<double> vals;
  if (start > 0.0) {
    bps.push_back(start);
    vals.push_back(0.0);
  }
  vals.push_back(height);
  if (std::isfinite(end)) {
    bps.push_back(end);
    vals.push_back(0.0);
  }
  return StepFunction(std::move(bps), std::move(vals));
}

double StepFunction::operator()(double t) const {
  auto it = std::upper_bound(breakpoints_.begin(), breakpoints_.end(), t);
  return values_[static_cast<std::size_t>(it - breakpoints_.begin())];
}

double StepFunction::min_value() const {
  return *std::min_element(values_.begin(), values_.end());
}

double StepFunction::max_value() const {
  return *std::max_element(values_.begin(), values_.end());
}

StepFunction add(const StepFunction& f, const StepFunction& g) {
  return combine(f, g, [](double a, double b) { return a + b; });
}

StepFunction scale(const StepFunction& f, double factor) {
  std::vector<double> vals = f.values();
  for (double& v : vals) v *= factor;
  return StepFunction(f.breakpoints(), std::move(vals));
}

StepFunction pointwise_min(const StepFunction& f, const StepFunction& g) {
  return combine(f, g, [](double a, double b) { return std::min(a, b); });
}

StepFunction clamp_below(const StepFunction& f, double cap) {
  return pointwise_min(f, StepFunction(cap));
}

StepFunction shift(const StepFunction& f, double delta, double fill) {
  if (delta < 0.0) throw std::invalid_argument("shift: delta must be >= 0");
  if (delta == 0.0) return f;
  std::vector<double> bps{delta};
  std::vector<double> vals{fill};
  for (double b : f.breakpoints()) bps.push_back(b + delta);
  vals.insert(vals.end(), f.values().begin(), f.values().end());
  return StepFunction(std::move(bps), std::move(vals));
}

StepFunction truncate(const StepFunction& f, double horizon) {
  if (!std::isfinite(horizon)) return f;
  return combine(f, StepFunction::indicator(0.0, horizon, 1.0),
                 [](double a, double b) { return b > 0.0 ? a : 0.0; });
}

// ---------------------------------------------------------------------------
// MonotonePwl

MonotonePwl::MonotonePwl(std::vector<Point> points, double tail_slope)
    : points_(std::move(points)), tail_slope_(tail_slope) {
  if (points_.empty()) throw std::invalid_argument("MonotonePwl: no vertices");
  if (std::isnan(tail_slope_) || tail_slope_ < 0.0) {
    throw std::invalid_argument("MonotonePwl: tail slope must be >= 0");
  }
  for (std::size_t i = 0; i < points_.size(); ++i) {
    Point& p = points_[i];
    if (!std::isfinite(p.x) || !std::isfinite(p.y)) {
      throw std::invalid_argument("MonotonePwl: vertices must be finite");
    }
    if (i == 0) continue;
    const Point& q = points_[i - 1];
    if (p.x < q.x) throw std::invalid_argument("MonotonePwl: x must be nondecreasing");
    if (p.y < q.y) {
      if (q.y - p.y > 1e-9 * std::max(1.0, std::abs(q.y))) {
        throw std::invalid_argument("MonotonePwl: y must be nondecreasing");
      }
      p.y = q.y;  // rounding noise
    }
  }
  canonicalize();
}

MonotonePwl MonotonePwl::affine(double slope, double offset) {
  return MonotonePwl({{0.0, offset}}, slope);
}

void MonotonePwl::canonicalize() {
  std::vector<Point> pts;
  pts.reserve(points_.size());
  for (const Point& p : points_) {
    if (pts.empty()) {
      pts.push_back(p);
      continue;
    }
    Point& last = pts.back();
    const double dx = p.x - last.x;
    if (dx <= kMergeTol) {
      if (p.y - last.y <= kMergeTol) continue;  // near-duplicate
      Point q{last.x, p.y};                     // steep sliver becomes a jump
      // Keep at most two vertices per x: the lowest and the highest.
      if (pts.size() >= 2 && pts[pts.size() - 2].x == last.x) {
        last = q;
      } else {
        pts.push_back(q);
      }
      continue;
    }
    pts.push_back(p);
  }

  // Drop interior vertices lying on the segment between their neighbours.
  std::vector<Point> out;
  out.reserve(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (out.size() >= 1 && i + 1 < pts.size()) {
      const Point& a = out.back();
      const Point& b = pts[i];
      const Point& c = pts[i + 1];
      if (a.x < b.x && b.x < c.x) {
        const double interp = a.y + (c.y - a.y) * (b.x - a.x) / (c.x - a.x);
        if (std::abs(interp - b.y) <= 1e-12 * (1.0 + std::abs(b.y))) continue;
      }
    }
    out.push_back(pts[i]);
  }
  // Drop trailing vertices that lie on the tail ray.
  while (out.size() >= 2 && std::isfinite(tail_slope_)) {
    const Point& a = out[out.size() - 2];
    const Point& b = out.back();
    if (a.x == b.x) break;
    const double pred = a.y + tail_slope_ * (b.x - a.x);
    if (std::abs(pred - b.y) > 1e-12 * (1.0 + std::abs(b.y))) break;
    out.pop_back();
  }
  points_ = std::move(out);
}

std::size_t MonotonePwl::segment_of(double x) const {
  auto it = std::upper_bound(points_.begin(), points_.end(), x,
                             [](double v, const Point& p) { return v < p.x; });
  return static_cast<std::size_t>(it - points_.begin()) - 1;
}

double MonotonePwl::operator()(double x) const {
  if (x <= points_.front().x) return points_.front().y;
  std::size_t i = segment_of(x);
  if (points_[i].x == x) {
    while (i > 0 && points_[i - 1].x == x) --i;
    return points_[i].y;
  }
  if (i + 1 == points_.size()) {
    if (std::isinf(tail_slope_)) return kInf;
    return points_[i].y + tail_slope_ * (x - points_[i].x);
  }
  const Point& a = points_[i];
  const Point& b = points_[i + 1];
  return a.y + (b.y - a.y) * (x - a.x) / (b.x - a.x);
}

double MonotonePwl::right_limit(double x) const {
  if (x < points_.front().x) return points_.front().y;
  std::size_t i = segment_of(x);
  if (points_[i].x == x) {
    if (i + 1 == points_.size() && std::isinf(tail_slope_)) return kInf;
    return points_[i].y;
  }
  return (*this)(x);
}

double MonotonePwl::right_slope(double x) const {
  if (x < points_.front().x) return 0.0;
  std::size_t i = segment_of(x);
  if (i + 1 == points_.size()) return tail_slope_;
  const Point& a = points_[i];
  const Point& b = points_[i + 1];
  return (b.y - a.y) / (b.x - a.x);
}

double MonotonePwl::first_reach(double y) const {
  if (points_.front().y >= y) return points_.front().x;
  auto it = std::lower_bound(points_.begin(), points_.end(), y,
                             [](const Point& p, double v) { return p.y < v; });
  if (it == points_.end()) {
    const Point& last = points_.back();
    if (tail_slope_ == 0.0) return kInf;
    if (std::isinf(tail_slope_)) return last.x;
    return last.x + (y - last.y) / tail_slope_;
  }
  const Point& b = *it;
  const Point& a = *(it - 1);
  if (a.x == b.x) return b.x;
  return a.x + (y - a.y) * (b.x - a.x) / (b.y - a.y);
}

MonotonePwl integrate(const StepFunction& rate) {
  for (double v : rate.values()) {
    if (v < -1e-12) throw NegativeRate("integrate: rate takes negative value");
  }
  std::vector<Point> pts{{0.0, 0.0}};
  double acc = 0.0;
  for (std::size_t i = 0; i < rate.breakpoints().size(); ++i) {
    const double start = rate.piece_start(i);
    const double end = rate.breakpoints()[i];
    acc += std::max(rate.values()[i], 0.0) * (end - start);
    pts.push_back({end, acc});
  }
  return MonotonePwl(std::move(pts), std::max(rate.tail(), 0.0));
}

StepFunction differentiate(const MonotonePwl& cumulative) {
  const auto& pts = cumulative.points();
  std::vector<double> starts;
  std::vector<double> slopes;
  // Constant region before the first vertex.
  starts.push_back(-kInf);
  slopes.push_back(0.0);
  for (std::size_t i = 0; i < pts.size(); ++i) {
    double slope;
    if (i + 1 == pts.size()) {
      slope = cumulative.tail_slope();
    } else if (pts[i + 1].x == pts[i].x) {
      if (pts[i + 1].y - pts[i].y > 1e-7 * (1.0 + std::abs(pts[i].y))) {
        throw std::domain_error("differentiate: cumulative function has a jump");
      }
      continue;
    } else {
      slope = (pts[i + 1].y - pts[i].y) / (pts[i + 1].x - pts[i].x);
    }
    starts.push_back(pts[i].x);
    slopes.push_back(slope);
  }
  std::vector<double> bps;
  std::vector<double> vals;
  vals.push_back(0.0);
  for (std::size_t i = 0; i < starts.size(); ++i) {
    if (starts[i] <= 0.0) {
      vals.back() = slopes[i];
    } else {
      bps.push_back(starts[i]);
      vals.push_back(slopes[i]);
    }
  }
  return StepFunction(std::move(bps), std::move(vals));
}

namespace {

// Moves y onto a vertex of f when it lies within rounding distance of one.
double snap_to_vertex(const MonotonePwl& f, double y) {
  if (!std::isfinite(y)) return y;
  const auto& pts = f.points();
  auto it = std::lower_bound(pts.begin(), pts.end(), y,
                             [](const Point& p, double v) { return p.x < v; });
  const double tol = kMergeTol * std::max(1.0, std::abs(y));
  if (it != pts.end() && it->x - y <= tol) return it->x;
  if (it != pts.begin() && y - (it - 1)->x <= tol) return (it - 1)->x;
  return y;
}

}  // namespace

MonotonePwl compose(const MonotonePwl& outer, const MonotonePwl& inner) {
  std::vector<double> cand;
  cand.reserve(inner.points().size() + outer.points().size());
  for (const Point& p : inner.points()) cand.push_back(p.x);
  for (const Point& p : outer.points()) {
    const double x = inner.first_reach(p.x);
    if (std::isfinite(x)) cand.push_back(x);
  }
  std::sort(cand.begin(), cand.end());
  cand.erase(std::unique(cand.begin(), cand.end()), cand.end());

  std::vector<Point> pts;
  pts.reserve(2 * cand.size());
  for (double x : cand) {
    const double v = outer(snap_to_vertex(outer, inner(x)));
    const double ir = snap_to_vertex(outer, inner.right_limit(x));
    double r;
    if (std::isinf(ir)) {
      r = outer.tail_slope() > 0.0 ? kInf : outer(outer.last_x());
    } else if (inner.right_slope(x) > 0.0) {
      r = outer.right_limit(ir);
    } else {
      r = outer(ir);
    }
    pts.push_back({x, v});
    if (r > v && std::isfinite(r)) pts.push_back({x, r});
  }

  const double last = cand.back();
  const double ir = snap_to_vertex(outer, inner.right_limit(last));
  double tail;
  if (std::isinf(ir)) {
    tail = outer.tail_slope() > 0.0 ? kInf : 0.0;
  } else {
    const double s_in = inner.right_slope(last);
    const double s_out = outer.right_slope(ir);
    tail = (s_in == 0.0 || s_out == 0.0) ? 0.0 : s_out * s_in;
  }
  return MonotonePwl(std::move(pts), tail);
}

MonotonePwl inverse(const MonotonePwl& f) {
  std::vector<Point> pts;
  pts.reserve(f.points().size());
  for (const Point& p : f.points()) pts.push_back({p.y, p.x});
  double tail;
  if (f.tail_slope() == 0.0) {
    tail = kInf;
  } else if (std::isinf(f.tail_slope())) {
    tail = 0.0;
  } else {
    tail = 1.0 / f.tail_slope();
  }
  return MonotonePwl(std::move(pts), tail);
}

namespace {

std::vector<double> merged_xs(const MonotonePwl& f, const MonotonePwl& g) {
  std::vector<double> xs;
  for (const Point& p : f.points()) xs.push_back(p.x);
  for (const Point& p : g.points()) xs.push_back(p.x);
  std::sort(xs.begin(), xs.end());
  xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
  return xs;
}

}  // namespace

MonotonePwl add(const MonotonePwl& f, const MonotonePwl& g) {
  std::vector<Point> pts;
  for (double x : merged_xs(f, g)) {
    const double v = f(x) + g(x);
    const double r = f.right_limit(x) + g.right_limit(x);
    pts.push_back({x, v});
    if (r > v && std::isfinite(r)) pts.push_back({x, r});
  }
  return MonotonePwl(std::move(pts), f.tail_slope() + g.tail_slope());
}

MonotonePwl pointwise_min(const MonotonePwl& f, const MonotonePwl& g) {
  std::vector<double> xs = merged_xs(f, g);
  std::vector<double> cand = xs;
  auto diff_right = [&](double x) { return f.right_limit(x) - g.right_limit(x); };
  auto diff = [&](double x) { return f(x) - g(x); };
  for (std::size_t i = 0; i + 1 < xs.size(); ++i) {
    const double a = xs[i];
    const double b = xs[i + 1];
    const double da = diff_right(a);
    const double db = diff(b);
    if ((da < 0.0 && db > 0.0) || (da > 0.0 && db < 0.0)) {
      cand.push_back(a + (b - a) * da / (da - db));
    }
  }
  const double last = xs.back();
  const double dl = diff_right(last);
  const double ds = f.tail_slope() - g.tail_slope();
  if (std::isfinite(ds) && ds != 0.0 && dl * ds < 0.0) {
    cand.push_back(last - dl / ds);
  }
  std::sort(cand.begin(), cand.end());
  cand.erase(std::unique(cand.begin(), cand.end()), cand.end());

  std::vector<Point> pts;
  for (double x : cand) {
    const double v = std::min(f(x), g(x));
    const double r = std::min(f.right_limit(x), g.right_limit(x));
    pts.push_back({x, v});
    if (r > v && std::isfinite(r)) pts.push_back({x, r});
  }
  const double end = cand.back();
  const double d_end = diff_right(end);
  double tail;
  if (d_end < 0.0) {
    tail = f.tail_slope();
  } else if (d_end > 0.0) {
    tail = g.tail_slope();
  } else {
    tail = std::min(f.tail_slope(), g.tail_slope());
  }
  return MonotonePwl(std::move(pts), tail);
}

MonotonePwl shift(const MonotonePwl& f, double dx, double dy) {
  std::vector<Point> pts = f.points();
  for (Point& p : pts) {
    p.x += dx;
    p.y += dy;
  }
  return MonotonePwl(std::move(pts), f.tail_slope());
}

// ---------------------------------------------------------------------------
// PiecewiseLinear

double PiecewiseLinear::operator()(double x) const {
  if (points.empty()) return 0.0;
  if (x <= points.front().x) return points.front().y;
  auto it = std::upper_bound(points.begin(), points.end(), x,
                             [](double v, const Point& p) { return v < p.x; });
  const Point& a = *(it - 1);
  if (it == points.end()) return a.y + tail_slope * (x - a.x);
  const Point& b = *it;
  if (b.x == a.x) return a.y;
  return a.y + (b.y - a.y) * (x - a.x) / (b.x - a.x);
}

double PiecewiseLinear::min_value() const {
  if (points.empty()) return 0.0;
  if (tail_slope < 0.0) return -kInf;
  double m = points.front().y;
  for (const Point& p : points) m = std::min(m, p.y);
  return m;
}

void write_csv(std::ostream& out, const StepFunction& f) {
  out << "interval_start,value\n";
  for (std::size_t i = 0; i < f.num_pieces(); ++i) {
    out << format_number(f.piece_start(i)) << ',' << format_number(f.values()[i]) << '\n';
  }
}

void write_csv(std::ostream& out, const MonotonePwl& f) {
  out << "x,y\n";
  for (const Point& p : f.points()) {
    out << format_number(p.x) << ',' << format_number(p.y) << '\n';
  }
}

}  // namespace dflow
