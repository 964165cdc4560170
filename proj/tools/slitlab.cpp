#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "slitlab/cantor.hpp"
#include "slitlab/dimension.hpp"
#include "slitlab/experiment.hpp"
#include "slitlab/extension.hpp"
#include "slitlab/grid_io.hpp"
#include "slitlab/regions.hpp"
#include "slitlab/whitney.hpp"

using namespace slitlab;

namespace {

Point parse_point(const std::string& s) {
  Point p;
  for (const auto& r : parse_rational_list(s)) p.push_back(r.value);
  return p;
}

ExperimentConfig load_config(const std::string& path) {
  if (path.empty()) return {};
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ExperimentConfig::from_text(ss.str());
}

int finish(const RunResult& r) {
  if (!r.message.empty()) std::cerr << r.message << "\n";
  for (const auto& f : r.files) std::cout << f << "\n";
  return r.status;
}

// Splits "dir/name.ext" into out_dir and output.
void set_output(ExperimentConfig& cfg, const std::string& out) {
  if (out.empty()) return;
  const std::filesystem::path p(out);
  cfg.out_dir = p.has_parent_path() ? p.parent_path().string() : ".";
  cfg.output = p.filename().string();
}

ScalarFunction parse_function(const std::string& spec, const RegionSpec& omega, double h,
                              std::shared_ptr<JumpFunction>& keep) {
  if (spec == "x1") return [](std::span<const double> x) { return x[0]; };
  if (spec.rfind("const:", 0) == 0) {
    const double c = parse_rational(spec.substr(6)).value;
    return [c](std::span<const double>) { return c; };
  }
  if (spec.rfind("jump", 0) == 0) {
    int depth = 3;
    double r = 0.25;
    int side = 1;
    std::stringstream ss(spec.size() > 5 ? spec.substr(5) : "");
    std::string kv;
    while (std::getline(ss, kv, ';')) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos) continue;
      const std::string key = kv.substr(0, eq), val = kv.substr(eq + 1);
      if (key == "depth") depth = std::stoi(val);
      else if (key == "r") r = parse_rational(val).value;
      else if (key == "side") side = std::stoi(val);
      else throw ConfigError("unknown jump parameter '" + key + "'");
    }
    Point x0(static_cast<std::size_t>(omega.n), 0.0);
    x0[0] = 1.0 - std::pow(omega.cantor.lambda, depth);
    keep = std::make_shared<JumpFunction>(jump_test_function(omega, x0, r, side, h));
    auto* j = keep.get();
    return [j](std::span<const double> x) { return (*j)(x); };
  }
  throw ConfigError("unknown function '" + spec + "' (x1, const:c, jump:depth=3;r=1/4;side=1)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cantor-slit extension-domain laboratory"};
  app.set_help_flag("--help", "print this help and exit");
  app.require_subcommand(1);

  // cantor dist
  auto* cantor = app.add_subcommand("cantor", "Cantor set oracles");
  cantor->require_subcommand(1);
  auto* cdist = cantor->add_subcommand("dist", "distance from x to K_lambda");
  std::string c_lambda = "1/4", c_x;
  double c_tol = kCantorTol;
  cdist->add_option("--lambda", c_lambda, "contraction ratio");
  cdist->add_option("--x", c_x, "comma separated abscissae")->required();
  cdist->add_option("--tol", c_tol, "distance tolerance");

  // region probe | components
  auto* region = app.add_subcommand("region", "region oracles");
  region->require_subcommand(1);
  auto* probe = region->add_subcommand("probe", "membership and boundary-distance bracket");
  std::string r_kind = "omega", r_lambda = "1/4", r_point;
  int r_n = 2;
  probe->add_option("--kind", r_kind, "D, N, omega, complement, Q0");
  probe->add_option("--lambda", r_lambda);
  probe->add_option("--n", r_n);
  probe->add_option("--point", r_point, "x1,...,xn")->required();
  auto* comps = region->add_subcommand("components", "flood-fill components in a ball");
  std::string rc_radius = "1/4", rc_h;
  comps->add_option("--kind", r_kind);
  comps->add_option("--lambda", r_lambda);
  comps->add_option("--n", r_n);
  comps->add_option("--point", r_point)->required();
  comps->add_option("--radius", rc_radius);
  comps->add_option("--h", rc_h, "cell size (default radius/64)");

  // whitney build | verify | claim-count
  auto* whitney = app.add_subcommand("whitney", "Whitney decompositions");
  whitney->require_subcommand(1);
  std::string w_lambda = "1/4", w_region = "N", w_out, w_config;
  int w_max_gen = 8, w_k = 4, w_n = 2;
  auto* wbuild = whitney->add_subcommand("build", "write the cube list as CSV");
  wbuild->add_option("--lambda", w_lambda);
  wbuild->add_option("--n", w_n);
  wbuild->add_option("--max-gen", w_max_gen);
  wbuild->add_option("--region", w_region, "N or complement");
  wbuild->add_option("--out", w_out, "CSV path (stdout when omitted)");
  auto* wverify = whitney->add_subcommand("verify", "W1-W4 audit of both decompositions");
  auto* wclaim = whitney->add_subcommand("claim-count", "reflected-neighbour counts per k");
  for (auto* s : {wverify, wclaim}) {
    s->add_option("--config", w_config, "JSON config");
    s->add_option("--lambda", w_lambda);
    s->add_option("--n", w_n);
    s->add_option("--max-gen", w_max_gen);
    s->add_option("--out", w_out, "report path");
  }
  wclaim->add_option("--k", w_k, "largest k");

  // field sample | grad | norm
  auto* field = app.add_subcommand("field", "grid fields");
  field->require_subcommand(1);
  std::string f_lambda = "1/4", f_fn = "x1", f_h = "2^-8", f_window, f_in, f_out;
  double f_p = 1.5;
  auto* fsample = field->add_subcommand("sample", "sample a function on Omega_lambda");
  fsample->add_option("--lambda", f_lambda);
  fsample->add_option("--fn", f_fn, "x1, const:c or jump:depth=3;r=1/4;side=1");
  fsample->add_option("--h", f_h);
  fsample->add_option("--window", f_window, "lo1,lo2,hi1,hi2 (default: D's bounding box)");
  fsample->add_option("--out", f_out)->required();
  auto* fgrad = field->add_subcommand("grad", "discrete gradient of a grid dump");
  fgrad->add_option("--in", f_in)->required();
  fgrad->add_option("--out", f_out)->required();
  auto* fnorm = field->add_subcommand("norm", "L^p norm of the gradient of a grid dump");
  fnorm->add_option("--in", f_in)->required();
  fnorm->add_option("--p", f_p);

  // extend
  auto* extend = app.add_subcommand("extend", "apply the extension operator");
  std::string e_lambda = "1/4", e_p = "3/2", e_u = "jump:depth=3", e_grid = "2^-10", e_out;
  int e_n = 2;
  extend->add_option("--lambda", e_lambda);
  extend->add_option("--n", e_n);
  extend->add_option("--p", e_p);
  extend->add_option("--u", e_u, "x1, const:c or jump:depth=3;r=1/4;side=1");
  extend->add_option("--grid", e_grid, "cell size, a power of 2");
  extend->add_option("--out", e_out, "grid dump of Eu");

  // sweep
  auto* sweep = app.add_subcommand("sweep", "bound-consistency sweep");
  std::string s_config, s_p, s_lambdas, s_h, s_out;
  int s_n = 2, s_depth = 3;
  double s_c = 1.0;
  bool s_no_emp = false;
  sweep->add_option("--config", s_config);
  sweep->add_option("--n", s_n);
  sweep->add_option("--p", s_p);
  sweep->add_option("--lambdas", s_lambdas, "comma separated, fractions allowed");
  sweep->add_option("--h", s_h, "grid for the empirical ratios");
  sweep->add_option("--depth", s_depth);
  sweep->add_option("--C", s_c, "constant of the upper-bound curve");
  sweep->add_flag("--no-empirical", s_no_emp);
  sweep->add_option("--out", s_out, "CSV path");

  // dim estimate
  auto* dim = app.add_subcommand("dim", "dimension estimates");
  dim->require_subcommand(1);
  auto* dest = dim->add_subcommand("estimate", "separated-net dimension upper bound");
  std::string d_config, d_set = "cantor-slit", d_lambda, d_out;
  int d_levels = 5, d_n = 2;
  bool d_two = false;
  dest->add_option("--config", d_config);
  dest->add_option("--set", d_set)->check(CLI::IsMember({"cantor-slit"}));
  dest->add_option("--lambda", d_lambda);
  dest->add_option("--n", d_n);
  dest->add_option("--levels", d_levels);
  dest->add_flag("--two-lambda", d_two, "separation 2 lambda^i");
  dest->add_option("--out", d_out);

  // density
  auto* density = app.add_subcommand("density", "measure density at a boundary point");
  std::string m_config, m_lambda, m_point, m_radii, m_out, m_sides;
  std::int64_t m_samples = 0;
  std::uint64_t m_seed = 0;
  density->add_option("--config", m_config);
  density->add_option("--lambda", m_lambda);
  density->add_option("--point", m_point);
  density->add_option("--radii", m_radii);
  density->add_option("--samples", m_samples);
  density->add_option("--seed", m_seed);
  density->add_option("--sides", m_sides, "comma separated +1/-1");
  density->add_option("--out", m_out, "JSON path; a CSV is written next to it");

  // run
  auto* runc = app.add_subcommand("run", "run an experiment config");
  std::string run_config;
  runc->add_option("config", run_config)->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*cdist) {
      const auto cs = CantorSpec::fixed(parse_rational(c_lambda).value);
      std::cout << "x,dist\n";
      for (const auto& x : parse_rational_list(c_x))
        std::cout << format_number(x.value) << ',' << format_number(k_distance(x.value, cs, c_tol)) << '\n';
      return 0;
    }
    if (*probe || *comps) {
      const auto cs = CantorSpec::fixed(parse_rational(r_lambda).value, r_n - 1);
      const auto spec = RegionSpec::make(parse_kind(r_kind), r_n, cs);
      const Point x = parse_point(r_point);
      if (*probe) {
        std::cout << "kind,member,dist_lo,dist_hi\n";
        std::cout << kind_name(spec.kind) << ',' << region_membership(spec, x) << ',';
        if (has_distance_oracle(spec)) {
          const auto b = refined_boundary_distance(spec, x);
          std::cout << format_number(b.lo) << ',' << format_number(b.hi) << '\n';
        } else {
          std::cout << ",\n";
        }
        return 0;
      }
      const double radius = parse_rational(rc_radius).value;
      const double h = rc_h.empty() ? radius / 64.0 : parse_rational(rc_h).value;
      const auto map = component_label(spec, x, radius, h);
      std::cout << "label,cells,side\n";
      const auto up = map.side_label(x, 1), lo = map.side_label(x, -1);
      for (int l = 0; l < map.count; ++l)
        std::cout << l << ',' << map.sizes[static_cast<std::size_t>(l)] << ','
                  << (l == up ? "upper" : (l == lo ? "lower" : "")) << '\n';
      return 0;
    }
    if (*wbuild) {
      const auto cs = CantorSpec::fixed(parse_rational(w_lambda).value, w_n - 1);
      const auto kind = w_region == "complement" ? RegionSpec::Kind::NLambdaComplement : RegionSpec::Kind::NLambda;
      const auto w = whitney_decompose(RegionSpec::make(kind, w_n, cs), w_max_gen);
      std::ofstream file;
      if (!w_out.empty()) file.open(w_out, std::ios::binary);
      std::ostream& out = w_out.empty() ? std::cout : file;
      out << "id,gen";
      for (int i = 0; i < w_n; ++i) out << ",idx" << i + 1;
      out << ",side,status\n";
      for (std::size_t i = 0; i < w.cubes.size(); ++i) {
        const auto& q = w.cubes[i];
        out << i << ',' << q.gen;
        for (int a = 0; a < w_n; ++a) out << ',' << q.idx[a];
        out << ',' << format_number(q.side()) << ','
            << (w.resolved(static_cast<std::int32_t>(i)) ? "resolved" : "frontier") << '\n';
      }
      return 0;
    }
    if (*wverify || *wclaim) {
      ExperimentConfig cfg = load_config(w_config);
      cfg.kind = *wverify ? ExperimentKind::WhitneyAudit : ExperimentKind::ClaimCount;
      if (w_config.empty() || whitney->get_subcommands().front()->count("--lambda"))
        cfg.lambdas = {parse_rational(w_lambda)};
      if (w_config.empty() || whitney->get_subcommands().front()->count("--max-gen")) cfg.max_gen = w_max_gen;
      if (w_config.empty() || whitney->get_subcommands().front()->count("--n")) cfg.n = w_n;
      if (*wclaim && (w_config.empty() || wclaim->count("--k"))) cfg.k_max = w_k;
      set_output(cfg, w_out);
      return finish(run(cfg));
    }
    if (*fsample) {
      const double lam = parse_rational(f_lambda).value;
      const auto om = RegionSpec::make(RegionSpec::Kind::OmegaLambda, 2, CantorSpec::fixed(lam));
      const double h = parse_rational(f_h).value;
      std::shared_ptr<JumpFunction> keep;
      const auto fn = parse_function(f_fn, om, h, keep);
      std::optional<Box> win;
      if (!f_window.empty()) {
        const auto v = parse_point(f_window);
        if (v.size() != 4) throw ConfigError("--window needs lo1,lo2,hi1,hi2");
        win = Box{{v[0], v[1]}, {v[2], v[3]}};
      }
      save_grid(f_out, grid_sample(fn, om, h, win));
      return 0;
    }
    if (*fgrad) {
      save_grid(f_out, gradient(load_grid(f_in)));
      return 0;
    }
    if (*fnorm) {
      const auto u = load_grid(f_in);
      const auto g = u.components == 1 ? gradient(u) : u;
      std::cout << "p,seminorm,energy\n"
                << format_number(f_p) << ',' << format_number(seminorm_p(g, f_p)) << ','
                << format_number(energy_p(g, f_p)) << '\n';
      return 0;
    }
    if (*extend) {
      const double lam = parse_rational(e_lambda).value;
      const double h = parse_rational(e_grid).value;
      const double p = parse_rational(e_p).value;
      const double k = std::log2(1.0 / h);
      if (std::abs(k - std::round(k)) > 1e-9) throw ConfigError("--grid must be a power of 2");
      const ExtensionOperator E(CantorSpec::fixed(lam, e_n - 1), e_n, static_cast<int>(std::lround(k)) - 3, h);
      std::shared_ptr<JumpFunction> keep;
      const auto fn = parse_function(e_u, E.omega(), h, keep);
      const auto u = grid_sample(fn, E.omega(), h, d_bbox(e_n));
      const auto res = E.apply(u);
      const double num = seminorm_p(gradient(res.eu), p, &res.resolved);
      const double den = seminorm_p(gradient(u), p);
      std::cout << "lambda,h,max_gen,numerator,denominator,ratio,uncovered_cells,excluded_volume\n"
                << format_number(lam) << ',' << format_number(h) << ',' << std::lround(k) - 3 << ','
                << format_number(num) << ',' << format_number(den) << ',' << format_number(num / den) << ','
                << res.uncovered_cells << ',' << format_number(res.excluded_volume) << '\n';
      if (!e_out.empty()) save_grid(e_out, res.eu);
      return 0;
    }
    if (*sweep) {
      ExperimentConfig cfg = load_config(s_config);
      cfg.kind = ExperimentKind::BoundSweep;
      if (sweep->count("--n")) cfg.n = s_n;
      if (!s_p.empty()) cfg.p = parse_rational(s_p);
      if (!s_lambdas.empty()) cfg.lambdas = parse_rational_list(s_lambdas);
      if (!s_h.empty()) cfg.h = parse_rational(s_h);
      if (sweep->count("--depth")) cfg.depth = s_depth;
      if (sweep->count("--C")) cfg.c = s_c;
      if (s_no_emp) cfg.empirical = false;
      set_output(cfg, s_out);
      return finish(run(cfg));
    }
    if (*dest) {
      ExperimentConfig cfg = load_config(d_config);
      cfg.kind = ExperimentKind::DimEstimate;
      if (!d_lambda.empty()) cfg.lambdas = {parse_rational(d_lambda)};
      if (dest->count("--levels")) cfg.levels = d_levels;
      if (dest->count("--n")) cfg.n = d_n;
      if (d_two) cfg.two_lambda = true;
      set_output(cfg, d_out);
      return finish(run(cfg));
    }
    if (*density) {
      ExperimentConfig cfg = load_config(m_config);
      cfg.kind = ExperimentKind::Density;
      if (m_config.empty()) cfg.lambdas = {{"1/4", 0.25}};
      if (!m_lambda.empty()) cfg.lambdas = {parse_rational(m_lambda)};
      if (!m_point.empty()) cfg.point = parse_point(m_point);
      if (!m_radii.empty()) cfg.radii = parse_rational_list(m_radii);
      if (density->count("--samples")) cfg.samples = m_samples;
      if (density->count("--seed")) cfg.seed = m_seed;
      if (!m_sides.empty()) {
        cfg.sides.clear();
        for (const auto& s : parse_rational_list(m_sides)) cfg.sides.push_back(static_cast<int>(s.value));
      }
      set_output(cfg, m_out);
      return finish(run(cfg));
    }
    if (*runc) return finish(run(load_config(run_config)));
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
