// carnot-holonomy: verification suites and holonomy reports for the free
// step-two Carnot group.
//
//   carnot-holonomy verify --m 3 [--format text|json|csv]
//   carnot-holonomy holonomy --m 3 --mode horizontal --method both
//
// Exit codes: 0 success, 1 claim mismatch / failed suite, 2 usage,
// 3 inconclusive rank decision.

#include "carnot_holonomy/carnot.hpp"
#include "carnot_holonomy/holonomy.hpp"
#include "carnot_holonomy/report.hpp"
#include "carnot_holonomy/verify.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>

namespace {

constexpr int kExitOk = 0;
constexpr int kExitMismatch = 1;
constexpr int kExitUsage = 2;
constexpr int kExitInconclusive = 3;

enum class Format { text, json, csv };

struct RunConfig {
  int m = 2;
  carnot::Mode mode = carnot::Mode::horizontal;
  carnot::Method method = carnot::Method::both;
  int loops = -1;
  double amplitude = 0.3;
  double tol = 1e-6;
  std::uint64_t seed = 42;
  std::optional<Format> format;
  std::string out;
  bool timing = false;
};

int env_threads() {
  const char* s = std::getenv("HOLONOMY_THREADS");
  if (s == nullptr || *s == '\0') return 0;
  try {
    return std::max(0, std::stoi(s));
  } catch (const std::exception&) {
    return 0;
  }
}

// Writes to --out when given, otherwise stdout.
bool emit(const RunConfig& cfg, const std::string& text) {
  if (cfg.out.empty() || cfg.out == "-") {
    std::cout << text;
    return true;
  }
  std::ofstream f(cfg.out, std::ios::binary);
  if (!f) {
    std::cerr << "error: cannot open " << cfg.out << " for writing\n";
    return false;
  }
  f << text;
  return static_cast<bool>(f);
}

int cmd_verify(const RunConfig& cfg) {
  const carnot::CarnotModel model(cfg.m);
  const carnot::VerifyReport rep = carnot::run_verification(model, cfg.seed);
  std::ostringstream os;
  switch (cfg.format.value_or(Format::text)) {
    case Format::json:
      os << carnot::to_json(rep).dump(2) << '\n';
      break;
    case Format::csv:
      os << "m,suite,pass,max_residual,tol\n";
      for (const auto& s : rep.suites) {
        char buf[128];
        std::snprintf(buf, sizeof buf, "%d,%s,%d,%.17g,%.17g\n", rep.m, s.name.c_str(),
                      s.pass() ? 1 : 0, s.max_residual, s.tol);
        os << buf;
      }
      break;
    case Format::text:
      os << "verify m=" << rep.m << " (N=" << model.dim() << ")\n";
      for (const auto& s : rep.suites) {
        char buf[256];
        std::snprintf(buf, sizeof buf, "  %-4s %-20s max residual %.3e (tol %.0e)  %s\n",
                      s.pass() ? "PASS" : "FAIL", s.name.c_str(), s.max_residual, s.tol,
                      s.detail.c_str());
        os << buf;
      }
      os << (rep.pass() ? "all suites passed\n" : "some suites FAILED\n");
      break;
  }
  if (!emit(cfg, os.str())) return kExitMismatch;
  return rep.pass() ? kExitOk : kExitMismatch;
}

int cmd_holonomy(const RunConfig& cfg) {
  const carnot::CarnotModel model(cfg.m);
  carnot::HolonomyOptions opt;
  opt.loops = cfg.loops;
  opt.amplitude = cfg.amplitude;
  opt.tol = cfg.tol;
  opt.seed = cfg.seed;
  opt.threads = env_threads();
  const carnot::HolonomyReport rep = carnot::holonomy(model, cfg.mode, cfg.method, opt);

  std::ostringstream os;
  if (cfg.format.value_or(Format::json) == Format::csv) {
    os << carnot::csv_header() << '\n' << carnot::to_csv_row(rep, cfg.timing) << '\n';
  } else {
    os << carnot::to_json(rep, cfg.timing).dump(2) << '\n';
  }
  if (!emit(cfg, os.str())) return kExitMismatch;

  switch (rep.verdict()) {
    case carnot::Verdict::confirmed: return kExitOk;
    case carnot::Verdict::mismatch:
      std::cerr << "claim mismatch: dim " << rep.dim_estimate << " (expected " << rep.expected_dim
                << "), containment residual " << rep.containment_residual << '\n';
      return kExitMismatch;
    case carnot::Verdict::inconclusive:
      std::cerr << "inconclusive rank decision: gap " << rep.rank_gap << " <= "
                << carnot::kExactRankGap << "\nsingular values:";
      for (double s : rep.singular_values) std::cerr << ' ' << s;
      std::cerr << '\n';
      return kExitInconclusive;
  }
  return kExitMismatch;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Holonomy of the free step-two Carnot group"};
  app.require_subcommand(1);

  RunConfig cfg;
  const std::map<std::string, carnot::Mode> modes{{"full", carnot::Mode::full},
                                                  {"horizontal", carnot::Mode::horizontal},
                                                  {"affine_horizontal", carnot::Mode::affine_horizontal}};
  const std::map<std::string, carnot::Method> methods{{"algebraic", carnot::Method::algebraic},
                                                      {"numeric", carnot::Method::numeric},
                                                      {"both", carnot::Method::both}};
  const std::map<std::string, Format> formats{{"text", Format::text}, {"json", Format::json},
                                              {"csv", Format::csv}};
  Format fmt = Format::json;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--m", cfg.m, "number of generators (m >= 2)")->required()->check(CLI::Range(2, 64));
    sub->add_option("--seed", cfg.seed, "RNG seed");
    sub->add_option("--format", fmt, "output format")
        ->transform(CLI::CheckedTransformer(formats, CLI::ignore_case));
    sub->add_option("--out", cfg.out, "output path (default stdout)");
  };

  CLI::App* verify = app.add_subcommand("verify", "run the invariant suites for one m");
  add_common(verify);

  CLI::App* holo = app.add_subcommand("holonomy", "compute a holonomy report");
  add_common(holo);
  holo->add_option("--mode", cfg.mode, "full | horizontal | affine_horizontal")
      ->transform(CLI::CheckedTransformer(modes, CLI::ignore_case));
  holo->add_option("--method", cfg.method, "algebraic | numeric | both")
      ->transform(CLI::CheckedTransformer(methods, CLI::ignore_case));
  holo->add_option("--loops", cfg.loops, "sampled loops (default 4 x expected dim)")
      ->check(CLI::NonNegativeNumber);
  holo->add_option("--amplitude", cfg.amplitude, "target ||P - I|| per loop")
      ->check(CLI::Range(1e-6, 0.99));
  holo->add_option("--tol", cfg.tol, "containment tolerance")->check(CLI::PositiveNumber);
  holo->add_flag("--timing", cfg.timing, "report elapsed_s (output is then not reproducible)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  for (const CLI::App* sub : {verify, holo}) {
    if (sub->parsed() && sub->count("--format") > 0) cfg.format = fmt;
  }

  try {
    if (verify->parsed()) return cmd_verify(cfg);
    return cmd_holonomy(cfg);
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitMismatch;
  }
}
