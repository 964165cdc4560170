#include "slitlab/cantor.hpp"

#include <algorithm>
#include <cmath>

namespace slitlab {

CantorSpec CantorSpec::fixed(double lambda, int codim, int max_depth) {
  CantorSpec s;
  s.kind = Kind::FixedRatio;
  s.lambda = lambda;
  s.codim = codim;
  s.max_depth = max_depth;
  s.validate();
  return s;
}

CantorSpec CantorSpec::variable(std::vector<double> ratios, int codim) {
  CantorSpec s;
  s.kind = Kind::VariableRatio;
  s.max_depth = static_cast<int>(ratios.size());
  s.ratios = std::move(ratios);
  s.codim = codim;
  s.lambda = 0.0;
  s.validate();
  return s;
}

void CantorSpec::validate() const {
  require(codim >= 1, "cantor: codim must be >= 1");
  require(max_depth >= 1, "cantor: max_depth must be >= 1");
  if (kind == Kind::FixedRatio) {
    require(lambda > 0.0 && lambda < 0.5, "lambda must be in (0, 1/2)");
  } else {
    require(static_cast<int>(ratios.size()) >= max_depth, "cantor: ratio sequence shorter than max_depth");
    for (double r : ratios) require(r > 0.0 && r <= 0.5, "cantor: variable ratios must lie in (0, 1/2]");
  }
}

double k_distance(double x, const CantorSpec& spec, double tol) {
  require(std::isfinite(x), "k_distance: non-finite x");
  require(tol > 0.0, "k_distance: tol must be positive");
  if (x <= 0.0) return -x;
  if (x >= 1.0) return x - 1.0;
  double a = 0.0;
  double len = 1.0;
  for (int level = 0; level < spec.max_depth && len >= tol; ++level) {
    const double lam = spec.ratio(level);
    const double left_end = a + lam * len;
    const double right_start = a + len - lam * len;
    if (x <= left_end) {
      len *= lam;
    } else if (x >= right_start) {
      a = right_start;
      len *= lam;
    } else {
      return std::min(x - left_end, right_start - x);
    }
  }
  return 0.0;
}

double c_distance(std::span<const double> x, const CantorSpec& spec, double tol) {
  require(static_cast<int>(x.size()) == spec.codim, "c_distance: dimension mismatch");
  double s = 0.0;
  for (double xi : x) {
    const double d = k_distance(xi, spec, tol);
    s += d * d;
  }
  return std::sqrt(s);
}

double cantor_dim(const CantorSpec& spec, int n) {
  require(spec.kind == CantorSpec::Kind::FixedRatio,
          "cantor_dim: no closed form for variable-ratio sets; use the dimension estimator");
  require(n >= 2, "cantor_dim: n must be >= 2");
  return -(n - 1) * std::log(2.0) / std::log(spec.lambda);
}

CantorSpec fat_thin_cantor(int depth) {
  require(depth >= 1, "fat_thin_cantor: depth must be >= 1");
  std::vector<double> ratios;
  ratios.reserve(static_cast<std::size_t>(depth));
  for (int k = 1; k <= depth; ++k) {
    const double removed = 1.0 / (k + 2.0);
    ratios.push_back((1.0 - removed) / 2.0);
  }
  return CantorSpec::variable(std::move(ratios));
}

bool k_member(double x, const CantorSpec& spec, int depth) {
  if (x < 0.0 || x > 1.0) return false;
  depth = std::min(depth, spec.max_depth);
  double a = 0.0;
  double len = 1.0;
  for (int level = 0; level < depth; ++level) {
    const double lam = spec.ratio(level);
    if (x <= a + lam * len) {
      len *= lam;
    } else if (x >= a + len - lam * len) {
      a = a + len - lam * len;
      len *= lam;
    } else {
      return false;
    }
  }
  return true;
}

std::vector<Interval> construction_intervals(const CantorSpec& spec, int depth) {
  require(depth >= 0 && depth <= spec.max_depth, "construction_intervals: depth out of range");
  require(depth <= 30, "construction_intervals: depth too large to enumerate");
  std::vector<Interval> cur{{0.0, 1.0}};
  for (int level = 0; level < depth; ++level) {
    const double lam = spec.ratio(level);
    std::vector<Interval> next;
    next.reserve(cur.size() * 2);
    for (const Interval& iv : cur) {
      const double len = iv.length();
      next.push_back({iv.lo, iv.lo + lam * len});
      next.push_back({iv.hi - lam * len, iv.hi});
    }
    cur = std::move(next);
  }
  return cur;
}

std::vector<double> construction_corners(const CantorSpec& spec, int depth) {
  std::vector<double> out;
  for (const Interval& iv : construction_intervals(spec, depth)) out.push_back(iv.lo);
  return out;
}

std::vector<Point> product_corners(const CantorSpec& spec, int depth) {
  const std::vector<double> c = construction_corners(spec, depth);
  std::vector<Point> out{Point{}};
  for (int axis = 0; axis < spec.codim; ++axis) {
    std::vector<Point> next;
    next.reserve(out.size() * c.size());
    for (const Point& p : out)
      for (double v : c) {
        Point q = p;
        q.push_back(v);
        next.push_back(std::move(q));
      }
    out = std::move(next);
  }
  return out;
}

double retained_measure(const CantorSpec& spec, int depth) {
  require(depth >= 0 && depth <= spec.max_depth, "retained_measure: depth out of range");
  double m = 1.0;
  for (int level = 0; level < depth; ++level) m *= 2.0 * spec.ratio(level);
  return m;
}

double box_dimension_estimate(const CantorSpec& spec, int depth) {
  require(depth >= 1 && depth <= spec.max_depth, "box_dimension_estimate: depth out of range");
  // Cover at depth k: 2^k intervals of common length l_k.
  double coarse_len = 1.0;
  for (int level = 0; level < depth - 1; ++level) coarse_len *= spec.ratio(level);
  const double fine_len = coarse_len * spec.ratio(depth - 1);
  return std::log(2.0) / std::log(coarse_len / fine_len);
}

}  // namespace slitlab
