#pragma once

// Stable JSON / CSV serialization of holonomy reports.

#include "holonomy.hpp"

#include <json.hpp>

#include <cstdio>
#include <sstream>
#include <string>

namespace carnot {

inline constexpr int kReportSchemaVersion = 1;

/// Field order is part of the output contract. elapsed_s is null unless
/// `with_timing`, so identical runs serialize byte-identically.
inline nlohmann::ordered_json to_json(const HolonomyReport& r, bool with_timing = false) {
  nlohmann::ordered_json j;
  j["schema_version"] = kReportSchemaVersion;
  j["m"] = r.m;
  j["n"] = r.n;
  j["N"] = r.N;
  j["mode"] = to_string(r.mode);
  j["method"] = to_string(r.method);
  j["expected_dim"] = r.expected_dim;
  j["dim_estimate"] = r.dim_estimate;
  j["containment_residual"] = r.containment_residual;
  j["singular_values"] = r.singular_values;
  j["loops_used"] = r.loops_used;
  j["amplitude"] = r.amplitude;
  j["tol"] = r.tol;
  j["rng_seed"] = r.rng_seed;
  j["elapsed_s"] = with_timing ? nlohmann::ordered_json(r.elapsed_s) : nlohmann::ordered_json(nullptr);
  j["verdict"] = to_string(r.verdict());
  return j;
}

namespace detail {

inline std::string fmt_double(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

}  // namespace detail

inline std::string csv_header() {
  return "schema_version,m,n,N,mode,method,expected_dim,dim_estimate,containment_residual,"
         "loops_used,amplitude,tol,rng_seed,elapsed_s,verdict";
}

/// One CSV row with the scalar report fields (singular values omitted).
inline std::string to_csv_row(const HolonomyReport& r, bool with_timing = false) {
  std::ostringstream os;
  os << kReportSchemaVersion << ',' << r.m << ',' << r.n << ',' << r.N << ','
     << to_string(r.mode) << ',' << to_string(r.method) << ',' << r.expected_dim << ','
     << r.dim_estimate << ',' << detail::fmt_double(r.containment_residual) << ','
     << r.loops_used << ',' << detail::fmt_double(r.amplitude) << ','
     << detail::fmt_double(r.tol) << ',' << r.rng_seed << ','
     << (with_timing ? detail::fmt_double(r.elapsed_s) : std::string()) << ','
     << to_string(r.verdict());
  return os.str();
}

}  // namespace carnot
