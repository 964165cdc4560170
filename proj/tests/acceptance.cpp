#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>

#include "slitlab/dimension.hpp"
#include "slitlab/experiment.hpp"
#include "slitlab/extension.hpp"
#include "slitlab/parallel.hpp"
#include "slitlab/whitney.hpp"

using namespace slitlab;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

Box box2(double x0, double y0, double x1, double y1) {
  Box b;
  b.lo = {x0, y0};
  b.hi = {x1, y1};
  return b;
}

std::string fmt(double v) { return format_number(v); }

Outcome dimension_formula() {
  Outcome o{true, ""};
  for (double lam : {0.25, 0.125}) {
    const auto est = dim_upper_estimate(build_hierarchy(CantorSpec::fixed(lam), 2, 5));
    const double want = -std::log(2.0) / std::log(lam);
    o.pass = o.pass && est.certified && std::abs(est.s - want) <= 0.05;
    o.detail += "lambda=" + fmt(lam) + " s=" + fmt(est.s) + " want=" + fmt(want) + " ";
  }
  return o;
}

Outcome exact_net_counts() {
  Outcome o{true, ""};
  const auto cs = CantorSpec::fixed(0.25);
  for (int i = 1; i <= 6; ++i) {
    std::vector<Point> cands;
    for (double x : construction_corners(cs, i)) cands.push_back({x});
    const auto net = separated_net(cands, 2.0 * std::pow(0.25, i), std::pow(0.25, i));
    o.pass = o.pass && net.points.size() == (std::size_t{1} << i);
    o.detail += std::to_string(net.points.size()) + " ";
  }
  return o;
}

struct Quarter8 {
  WhitneyDecomposition w, wt;
  ReflectMap r;
};

const Quarter8& quarter8() {
  static const Quarter8 s = [] {
    Quarter8 q;
    const auto cs = CantorSpec::fixed(0.25);
    q.w = whitney_decompose(RegionSpec::make(RegionSpec::Kind::NLambda, 2, cs), 8);
    q.wt = whitney_decompose(RegionSpec::make(RegionSpec::Kind::NLambdaComplement, 2, cs), 8);
    q.r = reflect_assign(q.w, q.wt);
    return q;
  }();
  return s;
}

Outcome whitney_soundness() {
  const auto& s = quarter8();
  const auto a = verify_whitney(s.w), b = verify_whitney(s.wt);
  Outcome o;
  o.pass = a.violations() == 0 && b.violations() == 0 && a.face_crossings == 0 && b.face_crossings == 0;
  o.detail = "interior violations=" + std::to_string(a.violations()) + " complement violations=" +
             std::to_string(b.violations()) + " face crossings=" + std::to_string(a.face_crossings + b.face_crossings);
  return o;
}

Outcome reflect_correctness() {
  const auto& s = quarter8();
  const auto audit = audit_reflect(s.w, s.wt, s.r);
  Outcome o;
  o.pass = audit.failures() == 0 && audit.checked == s.r.assigned && s.r.unassigned_fraction() <= 0.05;
  o.detail = "assigned=" + std::to_string(s.r.assigned) + " failures=" + std::to_string(audit.failures()) +
             " unassigned fraction=" + fmt(s.r.unassigned_fraction());
  return o;
}

Outcome claim_growth() {
  Outcome o{true, ""};
  for (double lam : {0.25, 0.125}) {
    const auto cs = CantorSpec::fixed(lam);
    const auto w = whitney_decompose(RegionSpec::make(RegionSpec::Kind::NLambda, 2, cs), 10);
    const auto wt = whitney_decompose(RegionSpec::make(RegionSpec::Kind::NLambdaComplement, 2, cs), 10);
    const auto cc = claim_count(w, wt, reflect_assign(w, wt), 4);
    const double want = lam == 0.25 ? 0.5 : 1.0 / 3.0;
    bool ok = std::abs(cc.fitted_exponent - want) <= 0.15;
    if (lam == 0.25) {
      const double A = static_cast<double>(cc.max_count[0]);
      for (int k = 0; k <= 4; ++k) ok = ok && cc.max_count[static_cast<std::size_t>(k)] <= A * std::pow(2.0, k / 2.0);
    }
    o.pass = o.pass && ok;
    o.detail += "lambda=" + fmt(lam) + " c_k=";
    for (auto c : cc.max_count) o.detail += std::to_string(c) + ",";
    o.detail += " exponent=" + fmt(cc.fitted_exponent) + " ";
  }
  return o;
}

double poly_bump(double t, double a) {
  const double s = std::abs(t) / a;
  if (s >= 1.0) return 0.0;
  const double q = 1.0 - s * s;
  return q * q * q;
}

double smoothstep(double t) {
  t = std::clamp(t, 0.0, 1.0);
  return t * t * (3.0 - 2.0 * t);
}

Outcome operator_sanity() {
  Outcome o{true, ""};
  {
    const double h = std::ldexp(1.0, -8);
    const ExtensionOperator E(CantorSpec::fixed(0.25), 2, 5, h);
    const auto one = grid_sample([](std::span<const double>) { return 1.0; }, E.omega(), h, box2(-2.0, -1.5, 1.0, 1.5));
    const auto res = E.apply(one);
    bool exact = true;
    for (std::size_t c = 0; c < res.eu.size(); ++c)
      if (res.eu.mask[c] && res.eu.value(c) != 1.0) exact = false;
    o.pass = o.pass && exact;
    o.detail += std::string("constants ") + (exact ? "exact" : "inexact");
  }
  {
    const double h = std::ldexp(1.0, -10);
    const ExtensionOperator E(CantorSpec::fixed(0.25), 2, 7, h);
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    auto u = grid_sample([](std::span<const double>) { return 0.0; }, E.omega(), h, box2(-0.5, -0.75, 1.0, 0.75));
    auto v = u;
    for (auto& a : u.values) a = U(rng);
    for (auto& a : v.values) a = U(rng) - 0.5;
    auto w = u;
    for (std::size_t k = 0; k < w.size(); ++k) w.values[k] = 0.7 * u.values[k] - 1.3 * v.values[k];
    const auto eu = E.apply(u), ev = E.apply(v), ew = E.apply(w);
    double worst = 0.0;
    bool range = true;
    for (std::size_t c = 0; c < ew.eu.size(); ++c) {
      if (!ew.eu.mask[c]) continue;
      worst = std::max(worst, std::abs(ew.eu.value(c) - (0.7 * eu.eu.value(c) - 1.3 * ev.eu.value(c))));
      if (eu.eu.value(c) < 0.0 || eu.eu.value(c) > 1.0) range = false;
    }
    o.pass = o.pass && worst <= 1e-12 && range;
    o.detail += " linearity=" + fmt(worst) + (range ? " range kept" : " range broken");
  }
  auto f = [](std::span<const double> x) {
    return poly_bump(x[0] - 0.5, 0.45) * poly_bump(x[1], 0.45) * smoothstep((std::abs(x[1]) - 1.0 / 64.0) * 64.0) *
           (1.0 + 0.5 * x[0] * (x[1] > 0.0 ? 1.0 : -1.0));
  };
  double sk = 0, sl = 0, skk = 0, skl = 0;
  for (int k = 8; k <= 11; ++k) {
    const double h = std::ldexp(1.0, -k);
    const ExtensionOperator E(CantorSpec::fixed(0.25), 2, k - 3, h);
    const auto res = E.apply(grid_sample(f, E.omega(), h, box2(-0.5, -1.0, 1.5, 1.0)));
    const double l = std::log2(trace_mismatch(E, res, f, 1.0 / 32.0).mean);
    sk += k;
    sl += l;
    skk += k * k;
    skl += k * l;
  }
  const double order = -(4 * skl - sk * sl) / (4 * skk - sk * sk);
  o.pass = o.pass && order >= 0.8;
  o.detail += " trace order=" + fmt(order);
  return o;
}

Outcome bound_sweep() {
  const auto rows = bound_report(2, 1.5, {0.125, 0.0625, 0.03125}, 1.0);
  Outcome o{true, ""};
  for (const auto& r : rows) {
    o.pass = o.pass && !r.factor.diverges && r.c_eff >= 2.0 && r.c_eff <= 2.5;
    o.detail += "C_eff=" + fmt(r.c_eff) + " ";
  }
  const bool div = norm_factor(0.25, 2, 1.5).diverges;
  o.pass = o.pass && div;
  o.detail += std::string("lambda=1/4 ") + (div ? "diverges" : "finite");
  return o;
}

Outcome empirical_monotonicity() {
  Outcome o{true, ""};
  double prev = -1.0;
  for (double lam : {0.0625, 0.125, 0.25}) {
    const auto r = jump_ratio(CantorSpec::fixed(lam), 2, 1.5, std::ldexp(1.0, -10));
    o.pass = o.pass && r.ratio > prev;
    prev = r.ratio;
    o.detail += "lambda=" + fmt(lam) + " ratio=" + fmt(r.ratio) + " ";
  }
  return o;
}

Outcome measure_density() {
  const auto om = RegionSpec::make(RegionSpec::Kind::OmegaLambda, 2, CantorSpec::fixed(0.25));
  Outcome o{true, ""};
  for (int side : {1, -1}) {
    const auto d = measure_density_check(om, {0.0, 0.0}, {0.25, 0.125, 0.0625}, 1000000, 42, side);
    double hw = 0.0;
    for (const auto& row : d.per_radius) {
      o.pass = o.pass && row.found;
      hw = std::max(hw, row.half_width);
    }
    o.pass = o.pass && d.c_fit >= 0.05 && hw <= 0.005;
    o.detail += "side " + std::to_string(side) + " c=" + fmt(d.c_fit) + " half-width=" + fmt(hw) + " ";
  }
  return o;
}

Outcome projection_machinery() {
  const double lam = 0.25;
  const auto h = build_hierarchy(CantorSpec::fixed(lam), 2, 6);
  Outcome o{true, ""};
  std::vector<double> m;
  for (int i = 0; i <= 3; ++i) {
    const auto F = removed_set(h, i);
    const auto exact = projection_measure(F, 2);
    const double pix = projection_measure_pixels(F, 2, std::ldexp(1.0, -16));
    o.pass = o.pass && exact.exact && std::abs(pix - exact.value) <= 0.01 * exact.value;
    m.push_back(exact.value);
  }
  o.detail = "decay";
  for (std::size_t i = 1; i < m.size(); ++i) {
    const double ratio = m[i] / m[i - 1];
    o.pass = o.pass && std::abs(ratio - 2.0 * lam) <= 0.25 * 2.0 * lam;
    o.detail += " " + fmt(ratio);
  }
  o.detail += " predicted " + fmt(2.0 * lam);
  return o;
}

Outcome energy_check() {
  const auto om = RegionSpec::make(RegionSpec::Kind::OmegaLambda, 2, CantorSpec::fixed(0.25));
  const double r = 0.0625;
  const Box Q = box2(0.25 * r, 0.25 * r, 3.25 * r, 3.25 * r);
  Outcome o{true, ""};
  std::vector<double> ratios;
  GridField last;
  for (int k : {9, 10}) {
    const double h = std::ldexp(1.0, -k);
    const auto J = jump_test_function(om, {0.0, 0.0}, r, 1, h);
    last = grid_sample([&](std::span<const double> x) { return J(x); }, om, h, box2(-0.25, -0.25, 0.5, 0.5));
    ratios.push_back(poincare_energy_check(Q, BoxUnion{}, last, 0.05, 1.5).ratio);
  }
  o.pass = ratios[0] > 0.0 && ratios[1] > 0.0 && std::abs(ratios[1] / ratios[0] - 1.0) <= 0.2;
  o.detail = "ratios " + fmt(ratios[0]) + " " + fmt(ratios[1]);
  std::string clause;
  try {
    poincare_energy_check(Q, BoxUnion{}, last, 0.05, 2.5);
  } catch (const HypothesisError& e) {
    clause = e.clause();
  }
  o.pass = o.pass && clause == "exponent";
  o.detail += " p=2.5 rejected by '" + clause + "'";
  return o;
}

std::string body(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome determinism() {
  const auto root = std::filesystem::temp_directory_path() / "slitlab_acceptance";
  std::filesystem::remove_all(root);
  std::string out[2][2];
  const int workers[2] = {1, 3};
  for (int t = 0; t < 2; ++t) {
    set_worker_count(workers[t]);
    ExperimentConfig d;
    d.kind = ExperimentKind::Density;
    d.lambdas = {{"1/4", 0.25}};
    d.samples = 300000;
    d.seed = 7;
    d.out_dir = (root / ("density" + std::to_string(t))).string();
    run(d);
    out[t][0] = body(std::filesystem::path(d.out_dir) / "density.csv");
    ExperimentConfig s;
    s.kind = ExperimentKind::BoundSweep;
    s.h = {"2^-8", 0x1p-8};
    s.out_dir = (root / ("sweep" + std::to_string(t))).string();
    run(s);
    out[t][1] = body(std::filesystem::path(s.out_dir) / "report.csv");
  }
  set_worker_count(0);
  Outcome o;
  o.pass = !out[0][0].empty() && !out[0][1].empty() && out[0][0] == out[1][0] && out[0][1] == out[1][1];
  o.detail = std::string("density csv ") + (out[0][0] == out[1][0] ? "identical" : "differs") + ", sweep csv " +
             (out[0][1] == out[1][1] ? "identical" : "differs") + " (workers 1 vs 3)";
  return o;
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"dimension formula", dimension_formula},
      {"exact net counts", exact_net_counts},
      {"whitney soundness", whitney_soundness},
      {"reflect map", reflect_correctness},
      {"claim count growth", claim_growth},
      {"operator sanity", operator_sanity},
      {"bound sweep", bound_sweep},
      {"empirical monotonicity", empirical_monotonicity},
      {"measure density", measure_density},
      {"projection machinery", projection_machinery},
      {"energy check", energy_check},
      {"determinism", determinism},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("criterion %2zu %-24s %s  %s (%.1fs)\n", i + 1, criteria[i].first.c_str(), o.pass ? "PASS" : "FAIL",
                o.detail.c_str(), secs);
    std::fflush(stdout);
    failed += !o.pass;
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
