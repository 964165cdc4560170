#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "slitlab/common.hpp"

namespace slitlab {

// A number given as text: "1/8", "2^-10", "0.125" or "3".
struct Rational {
  std::string text;
  double value = 0.0;
  bool operator==(const Rational&) const = default;
};

Rational parse_rational(const std::string& text);
std::vector<Rational> parse_rational_list(const std::string& text);  // comma separated

enum class ExperimentKind { BoundSweep, ClaimCount, DimEstimate, Density, WhitneyAudit };

std::string experiment_name(ExperimentKind kind);
ExperimentKind parse_experiment(const std::string& name);

class ConfigError : public Error {
 public:
  using Error::Error;
};

struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::BoundSweep;
  int n = 2;
  Rational p{"3/2", 1.5};
  std::vector<Rational> lambdas{{"1/8", 0.125}, {"1/16", 0.0625}, {"1/32", 0.03125}};
  int max_gen = 8;
  Rational h{"2^-10", 0x1p-10};
  int depth = 3;
  int levels = 5;
  bool two_lambda = false;  // net separation 2 lambda^i instead of lambda^i
  int k_max = 4;
  std::uint64_t seed = 1;
  std::int64_t samples = 1000000;
  std::vector<double> point{0.0, 0.0};
  std::vector<Rational> radii{{"1/4", 0.25}, {"1/8", 0.125}, {"1/16", 0.0625}};
  std::vector<int> sides{1, -1};
  double c = 1.0;          // constant of the upper-bound curve
  bool empirical = true;   // sweep: include jump-function ratios
  std::string out_dir = ".";
  std::string output;      // report file name; a default per kind when empty

  bool operator==(const ExperimentConfig&) const = default;

  std::string to_text() const;  // JSON
  static ExperimentConfig from_text(const std::string& text);
  // Throws ConfigError naming the first failed check.
  void validate() const;
  std::string report_name() const;
};

struct RunResult {
  int status = 0;
  std::vector<std::string> files;
  std::string message;
};

// Validates, runs, writes the report(s) and a manifest into out_dir.
RunResult run(const ExperimentConfig& config);

// Number formatting shared by every CSV writer: %.12g, "inf", "nan".
std::string format_number(double v);

}  // namespace slitlab
