#pragma once

#include "clab/reconstruction.hpp"
#include "clab/verifier.hpp"
#include "clab/weight.hpp"

#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace clab {

class ReportError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Shortest decimal text that parses back to the same double ("inf", "-inf", "nan" otherwise).
std::string format_double(double x);
/// Inverse of format_double; throws std::invalid_argument on anything else.
double parse_double(const std::string& text);

std::string tool_version();

/// Written into every report.
struct ReportMeta {
  std::string config_hash;
  std::string tool_version = clab::tool_version();
};

/// Ordered `key=value` lines, LF terminated. Keys carry no '='; values no newline.
using KeyValues = std::vector<std::pair<std::string, std::string>>;
std::string format_key_values(const KeyValues& kv);
KeyValues parse_key_values(const std::string& text);
const std::string& lookup(const KeyValues& kv, const std::string& key);
double lookup_double(const KeyValues& kv, const std::string& key);

void write_text_file(const std::string& path, const std::string& text);
std::string read_text_file(const std::string& path);

// --- weight plan -------------------------------------------------------------

KeyValues plan_report(const WeightPlan& plan, const SigmaGapReport* gap, const ReportMeta& meta);

// --- Carleman certificate ----------------------------------------------------

/// '#'-prefixed `key=value` header, then `member,s,lhs_log,rhs_log,ratio` rows.
std::string carleman_table(const CarlemanReport& report, const ReportMeta& meta);
CarlemanReport parse_carleman_table(const std::string& text, ReportMeta* meta = nullptr);

// --- Lemma 1 identity study ---------------------------------------------------

std::string lemma1_table(const Lemma1Study& study, const ReportMeta& meta);
Lemma1Study parse_lemma1_table(const std::string& text, ReportMeta* meta = nullptr);

// --- stability sweep ----------------------------------------------------------

/// Header `noise,D_u,err_region,err_global`, one row per level, then a footer
/// of `key=value` lines starting with `theta_emp=`.
std::string sweep_csv(const SweepReport& report, const ReportMeta& meta);
/// Rows, theta_emp, sigma0, sigma1, fit_rows and invariants_ok; f_hat stays empty.
SweepReport parse_sweep_csv(const std::string& text, ReportMeta* meta = nullptr);

}  // namespace clab
