#include "slitlab/experiment.hpp"

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "slitlab/cantor.hpp"
#include "slitlab/dimension.hpp"
#include "slitlab/extension.hpp"
#include "slitlab/parallel.hpp"
#include "slitlab/whitney.hpp"

namespace slitlab {

using nlohmann::json;

namespace {

constexpr const char* kVersion = "0.1.0";

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t");
  return s.substr(a, b - a + 1);
}

double parse_plain(const std::string& s, const std::string& whole) {
  if (s.empty()) throw ConfigError("bad number '" + whole + "'");
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end != s.c_str() + s.size()) throw ConfigError("bad number '" + whole + "'");
  return v;
}

json rationals_to_json(const std::vector<Rational>& v) {
  json a = json::array();
  for (const auto& r : v) a.push_back(r.text);
  return a;
}

std::vector<Rational> rationals_from_json(const json& a) {
  std::vector<Rational> out;
  for (const auto& e : a) out.push_back(e.is_string() ? parse_rational(e.get<std::string>())
                                                      : parse_rational(format_number(e.get<double>())));
  return out;
}

json number_or_null(double v) {
  if (std::isfinite(v)) return v;
  return nullptr;
}

void write_file(const std::filesystem::path& path, const std::string& body) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << body;
}

std::string timestamp() {
  const std::time_t t = std::time(nullptr);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
  return buf;
}

struct Report {
  int status = 0;
  std::vector<std::pair<std::string, std::string>> files;  // name, body
  std::string message;
};

Report bound_sweep(const ExperimentConfig& cfg) {
  std::vector<double> lambdas;
  std::vector<std::optional<double>> ratios;
  for (const auto& l : cfg.lambdas) {
    lambdas.push_back(l.value);
    if (cfg.empirical) ratios.push_back(jump_ratio(CantorSpec::fixed(l.value, cfg.n - 1), cfg.n, cfg.p.value, cfg.h.value, cfg.depth).ratio);
  }
  const auto rows = bound_report(cfg.n, cfg.p.value, lambdas, cfg.c, ratios);
  std::ostringstream csv;
  csv << "lambda,dim,norm_factor,empirical_ratio,C_eff,thm11_upper\n";
  json jrows = json::array();
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    csv << format_number(r.lambda) << ',' << format_number(r.dim) << ',' << format_number(r.factor.value) << ','
        << (r.empirical_ratio ? format_number(*r.empirical_ratio) : std::string()) << ',' << format_number(r.c_eff)
        << ',' << format_number(r.upper_curve) << '\n';
    json j;
    j["lambda"] = cfg.lambdas[i].text;
    j["dim"] = r.dim;
    j["norm_factor"] = number_or_null(r.factor.value);
    j["diverges"] = r.factor.diverges;
    j["empirical_ratio"] = r.empirical_ratio ? json(*r.empirical_ratio) : json(nullptr);
    j["C_eff"] = number_or_null(r.c_eff);
    j["thm11_upper"] = r.upper_curve;
    j["improved_upper"] = r.improved ? json(*r.improved) : json(nullptr);
    jrows.push_back(j);
  }
  json doc;
  doc["n"] = cfg.n;
  doc["p"] = cfg.p.text;
  doc["C"] = cfg.c;
  doc["h"] = cfg.h.text;
  doc["jump"] = {{"x0", "1 - lambda^depth"}, {"depth", cfg.depth}, {"r", 0.25}, {"side", "upper"}};
  doc["rows"] = jrows;
  Report rep;
  const std::string name = cfg.report_name();
  rep.files.emplace_back(name, csv.str());
  rep.files.emplace_back(std::filesystem::path(name).replace_extension(".json").string(), doc.dump(2) + "\n");
  return rep;
}

struct Decompositions {
  WhitneyDecomposition w, wt;
  ReflectMap r;
};

Decompositions decompose(const ExperimentConfig& cfg) {
  const auto cs = CantorSpec::fixed(cfg.lambdas.front().value, cfg.n - 1);
  Decompositions d;
  d.w = whitney_decompose(RegionSpec::make(RegionSpec::Kind::NLambda, cfg.n, cs), cfg.max_gen);
  d.wt = whitney_decompose(RegionSpec::make(RegionSpec::Kind::NLambdaComplement, cfg.n, cs), cfg.max_gen);
  d.r = reflect_assign(d.w, d.wt);
  return d;
}

json report_json(const WhitneyReport& r) {
  return {{"resolved", r.resolved},           {"frontier", r.frontier},
          {"W1", r.w1},                       {"W2", r.w2},
          {"W3", r.w3},                       {"W4", r.w4},
          {"face_crossings", r.face_crossings}, {"frontier_fraction", r.frontier_fraction},
          {"resolved_volume", r.resolved_volume}, {"frontier_volume", r.frontier_volume}};
}

Report whitney_audit(const ExperimentConfig& cfg) {
  const auto d = decompose(cfg);
  const auto a = verify_whitney(d.w), b = verify_whitney(d.wt);
  const auto audit = audit_reflect(d.w, d.wt, d.r);
  json doc;
  doc["lambda"] = cfg.lambdas.front().text;
  doc["max_gen"] = cfg.max_gen;
  doc["interior"] = report_json(a);
  doc["complement"] = report_json(b);
  doc["reflect"] = {{"assigned", d.r.assigned},
                    {"unassigned", d.r.unassigned},
                    {"unassigned_fraction", d.r.unassigned_fraction()},
                    {"half_space_failures", audit.half_space},
                    {"projection_failures", audit.projection},
                    {"size_failures", audit.size}};
  Report rep;
  rep.status = (a.violations() + b.violations() + a.face_crossings + b.face_crossings + audit.failures()) == 0 ? 0 : 1;
  if (rep.status) rep.message = "whitney audit found violations";
  rep.files.emplace_back(cfg.report_name(), doc.dump(2) + "\n");
  return rep;
}

Report claim_count_report(const ExperimentConfig& cfg) {
  const auto d = decompose(cfg);
  const auto cc = claim_count(d.w, d.wt, d.r, cfg.k_max);
  std::ostringstream csv;
  csv << "k,max_count\n";
  for (std::size_t k = 0; k < cc.max_count.size(); ++k) csv << k << ',' << cc.max_count[k] << '\n';
  json doc;
  doc["lambda"] = cfg.lambdas.front().text;
  doc["max_gen"] = cfg.max_gen;
  doc["max_count"] = cc.max_count;
  doc["sources"] = cc.sources;
  doc["unreachable"] = cc.unreachable;
  doc["fitted_exponent"] = cc.fitted_exponent;
  doc["fitted_constant"] = cc.fitted_constant;
  doc["predicted_exponent"] = cantor_dim(CantorSpec::fixed(cfg.lambdas.front().value, cfg.n - 1), cfg.n);
  Report rep;
  const std::string name = cfg.report_name();
  rep.files.emplace_back(name, csv.str());
  rep.files.emplace_back(std::filesystem::path(name).replace_extension(".json").string(), doc.dump(2) + "\n");
  return rep;
}

Report dim_estimate_report(const ExperimentConfig& cfg) {
  const auto cs = CantorSpec::fixed(cfg.lambdas.front().value);
  const auto h = build_hierarchy(cs, cfg.n, cfg.levels, cfg.two_lambda ? Separation::TwoLambda : Separation::Lambda);
  const auto est = dim_upper_estimate(h);
  json doc;
  doc["set"] = "cantor-slit";
  doc["lambda"] = cfg.lambdas.front().text;
  doc["n"] = cfg.n;
  doc["separation"] = cfg.two_lambda ? "2 lambda^i" : "lambda^i";
  doc["levels"] = cfg.levels;
  doc["estimate"] = est.s;
  doc["certified"] = est.certified;
  doc["truncation"] = est.truncation;
  doc["closed_form"] = cantor_dim(cs, cfg.n);
  json sizes = json::array();
  for (const auto& lv : h.levels) sizes.push_back(lv.net.points.size());
  doc["net_sizes"] = sizes;
  json rows = json::array();
  for (const auto& r : est.certificate)
    rows.push_back({{"i", r.i}, {"k", r.k}, {"j", r.j}, {"count", r.count}, {"threshold", r.threshold}});
  doc["certificate"] = rows;
  Report rep;
  rep.status = est.certified ? 0 : 1;
  if (!est.certified) rep.message = "no s on the grid is certified";
  rep.files.emplace_back(cfg.report_name(), doc.dump(2) + "\n");
  return rep;
}

Report density_report(const ExperimentConfig& cfg) {
  const auto om = RegionSpec::make(RegionSpec::Kind::OmegaLambda, cfg.n, CantorSpec::fixed(cfg.lambdas.front().value, cfg.n - 1));
  std::vector<double> radii;
  for (const auto& r : cfg.radii) radii.push_back(r.value);
  std::ostringstream csv;
  csv << "side,r,samples,hits,c,half_width\n";
  json doc;
  doc["lambda"] = cfg.lambdas.front().text;
  doc["point"] = cfg.point;
  doc["seed"] = cfg.seed;
  doc["samples"] = cfg.samples;
  json sides = json::array();
  double c_fit = 0.0, hw = 0.0;
  bool first = true;
  for (int side : cfg.sides) {
    const auto d = measure_density_check(om, cfg.point, radii, cfg.samples, cfg.seed, side);
    json per = json::array();
    for (const auto& row : d.per_radius) {
      csv << side << ',' << format_number(row.r) << ',' << row.samples << ',' << row.hits << ','
          << format_number(row.c) << ',' << format_number(row.half_width) << '\n';
      json j{{"r", row.r}, {"found", row.found}, {"hits", row.hits}, {"c", row.c}, {"half_width", row.half_width}};
      if (!row.note.empty()) j["note"] = row.note;
      per.push_back(j);
    }
    sides.push_back({{"side", side}, {"c_fit", d.c_fit}, {"half_width", d.half_width}, {"per_radius", per}});
    if (first || d.c_fit < c_fit) {
      c_fit = d.c_fit;
      hw = d.half_width;
      first = false;
    }
  }
  doc["c_fit"] = c_fit;
  doc["half_width"] = hw;
  doc["sides"] = sides;
  Report rep;
  const std::string name = cfg.report_name();
  rep.files.emplace_back(name, doc.dump(2) + "\n");
  rep.files.emplace_back(std::filesystem::path(name).replace_extension(".csv").string(), csv.str());
  return rep;
}

}  // namespace

Rational parse_rational(const std::string& raw) {
  const std::string s = trim(raw);
  Rational r;
  r.text = s;
  if (const auto slash = s.find('/'); slash != std::string::npos) {
    const double a = parse_plain(trim(s.substr(0, slash)), s), b = parse_plain(trim(s.substr(slash + 1)), s);
    if (b == 0.0) throw ConfigError("zero denominator in '" + s + "'");
    r.value = a / b;
  } else if (const auto caret = s.find('^'); caret != std::string::npos) {
    r.value = std::pow(parse_plain(trim(s.substr(0, caret)), s), parse_plain(trim(s.substr(caret + 1)), s));
  } else {
    r.value = parse_plain(s, s);
  }
  return r;
}

std::vector<Rational> parse_rational_list(const std::string& text) {
  std::vector<Rational> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_rational(item));
  return out;
}

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v == 0.0 ? 0.0 : v);
  return buf;
}

std::string experiment_name(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::BoundSweep: return "bound-sweep";
    case ExperimentKind::ClaimCount: return "claim-count";
    case ExperimentKind::DimEstimate: return "dim-estimate";
    case ExperimentKind::Density: return "density";
    case ExperimentKind::WhitneyAudit: return "whitney-audit";
  }
  return "";
}

ExperimentKind parse_experiment(const std::string& name) {
  for (auto k : {ExperimentKind::BoundSweep, ExperimentKind::ClaimCount, ExperimentKind::DimEstimate,
                 ExperimentKind::Density, ExperimentKind::WhitneyAudit})
    if (experiment_name(k) == name) return k;
  throw ConfigError("unknown experiment kind '" + name + "'");
}

std::string ExperimentConfig::report_name() const {
  if (!output.empty()) return output;
  switch (kind) {
    case ExperimentKind::BoundSweep: return "report.csv";
    case ExperimentKind::ClaimCount: return "claim_count.csv";
    case ExperimentKind::DimEstimate: return "cert.json";
    case ExperimentKind::Density: return "density.json";
    case ExperimentKind::WhitneyAudit: return "audit.json";
  }
  return "report";
}

std::string ExperimentConfig::to_text() const {
  json j;
  j["kind"] = experiment_name(kind);
  j["n"] = n;
  j["p"] = p.text;
  j["lambdas"] = rationals_to_json(lambdas);
  j["max_gen"] = max_gen;
  j["h"] = h.text;
  j["depth"] = depth;
  j["levels"] = levels;
  j["separation"] = two_lambda ? "2lambda" : "lambda";
  j["k_max"] = k_max;
  j["seed"] = seed;
  j["samples"] = samples;
  j["point"] = point;
  j["radii"] = rationals_to_json(radii);
  j["sides"] = sides;
  j["C"] = c;
  j["empirical"] = empirical;
  j["out_dir"] = out_dir;
  j["output"] = output;
  return j.dump(2) + "\n";
}

ExperimentConfig ExperimentConfig::from_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  ExperimentConfig c;
  try {
    for (auto it = j.begin(); it != j.end(); ++it) {
      const std::string& key = it.key();
      const json& v = it.value();
      if (key == "kind") c.kind = parse_experiment(v.get<std::string>());
      else if (key == "n") c.n = v.get<int>();
      else if (key == "p") c.p = v.is_string() ? parse_rational(v.get<std::string>()) : parse_rational(format_number(v.get<double>()));
      else if (key == "lambdas") c.lambdas = rationals_from_json(v);
      else if (key == "max_gen") c.max_gen = v.get<int>();
      else if (key == "h") c.h = v.is_string() ? parse_rational(v.get<std::string>()) : parse_rational(format_number(v.get<double>()));
      else if (key == "depth") c.depth = v.get<int>();
      else if (key == "levels") c.levels = v.get<int>();
      else if (key == "separation") {
        const auto s = v.get<std::string>();
        if (s != "lambda" && s != "2lambda") throw ConfigError("separation must be 'lambda' or '2lambda'");
        c.two_lambda = s == "2lambda";
      } else if (key == "k_max") c.k_max = v.get<int>();
      else if (key == "seed") c.seed = v.get<std::uint64_t>();
      else if (key == "samples") c.samples = v.get<std::int64_t>();
      else if (key == "point") c.point = v.get<std::vector<double>>();
      else if (key == "radii") c.radii = rationals_from_json(v);
      else if (key == "sides") c.sides = v.get<std::vector<int>>();
      else if (key == "C") c.c = v.get<double>();
      else if (key == "empirical") c.empirical = v.get<bool>();
      else if (key == "out_dir") c.out_dir = v.get<std::string>();
      else if (key == "output") c.output = v.get<std::string>();
      else throw ConfigError("unknown config key '" + key + "'");
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config value has the wrong type: ") + e.what());
  }
  return c;
}

void ExperimentConfig::validate() const {
  auto fail = [](const std::string& what) { throw ConfigError(what); };
  if (n < 2 || n > kMaxDim) fail("n must be in [2, 4]");
  if (lambdas.empty()) fail("lambdas must not be empty");
  for (const auto& l : lambdas)
    if (!(l.value > 0.0 && l.value < 0.5)) fail("lambda must be in (0, 1/2)");
  switch (kind) {
    case ExperimentKind::BoundSweep: {
      if (!(p.value > 1.0 && p.value < n)) fail("p must be in (1, n)");
      const double k = std::log2(1.0 / h.value);
      if (!(h.value > 0.0) || std::abs(k - std::round(k)) > 1e-9 || k < 7) fail("h must be a power of 2 at most 2^-7");
      if (depth < 1) fail("depth must be at least 1");
      if (empirical && n != 2) fail("empirical ratios need n = 2");
      break;
    }
    case ExperimentKind::ClaimCount:
    case ExperimentKind::WhitneyAudit:
      if (max_gen < 4 || max_gen > 14) fail("max_gen must be in [4, 14]");
      if (kind == ExperimentKind::ClaimCount && k_max < 0) fail("k_max must be non-negative");
      break;
    case ExperimentKind::DimEstimate:
      if (levels < 2) fail("levels must be at least 2");
      break;
    case ExperimentKind::Density:
      if (samples <= 0) fail("samples must be positive");
      if (static_cast<int>(point.size()) != n) fail("point must have n coordinates");
      if (radii.empty()) fail("radii must not be empty");
      for (const auto& r : radii)
        if (!(r.value > 0.0)) fail("radii must be positive");
      for (int s : sides)
        if (s != 1 && s != -1) fail("sides must be +1 or -1");
      break;
  }
}

RunResult run(const ExperimentConfig& config) {
  RunResult res;
  try {
    config.validate();
  } catch (const ConfigError& e) {
    res.status = 2;
    res.message = e.what();
    return res;
  }
  const auto started = timestamp();
  const auto t0 = std::chrono::steady_clock::now();
  Report rep;
  switch (config.kind) {
    case ExperimentKind::BoundSweep: rep = bound_sweep(config); break;
    case ExperimentKind::ClaimCount: rep = claim_count_report(config); break;
    case ExperimentKind::DimEstimate: rep = dim_estimate_report(config); break;
    case ExperimentKind::Density: rep = density_report(config); break;
    case ExperimentKind::WhitneyAudit: rep = whitney_audit(config); break;
  }
  const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  const std::filesystem::path dir(config.out_dir);
  std::filesystem::create_directories(dir);
  json outputs = json::array();
  for (const auto& [name, body] : rep.files) {
    write_file(dir / name, body);
    res.files.push_back((dir / name).string());
    outputs.push_back(name);
  }
  json manifest;
  manifest["tool"] = "slitlab";
  manifest["version"] = kVersion;
#ifdef __VERSION__
  manifest["compiler"] = __VERSION__;
#endif
  manifest["kind"] = experiment_name(config.kind);
  manifest["config"] = json::parse(config.to_text());
  manifest["seed"] = config.seed;
  manifest["workers"] = worker_count();
  manifest["started"] = started;
  manifest["elapsed_seconds"] = elapsed;
  manifest["outputs"] = outputs;
  manifest["status"] = rep.status;
  const auto mpath = dir / "manifest.json";
  write_file(mpath, manifest.dump(2) + "\n");
  res.files.push_back(mpath.string());
  res.status = rep.status;
  res.message = rep.message;
  return res;
}

}  // namespace slitlab
