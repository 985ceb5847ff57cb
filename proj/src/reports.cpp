#include "clab/reports.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <limits>
#include <fstream>
#include <sstream>
#include <system_error>

namespace clab {

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

double parse_double(const std::string& text) {
  if (text == "nan") return std::numeric_limits<double>::quiet_NaN();
  if (text == "inf") return std::numeric_limits<double>::infinity();
  if (text == "-inf") return -std::numeric_limits<double>::infinity();
  double x = 0.0;
  const char* end = text.data() + text.size();
  const auto res = std::from_chars(text.data(), end, x);
  if (res.ec != std::errc() || res.ptr != end || text.empty()) {
    throw std::invalid_argument("not a number: '" + text + "'");
  }
  return x;
}

std::string tool_version() { return CLAB_VERSION; }

std::string format_key_values(const KeyValues& kv) {
  std::string out;
  for (const auto& [k, v] : kv) {
    if (k.find('=') != std::string::npos || k.find('\n') != std::string::npos ||
        v.find('\n') != std::string::npos) {
      throw ReportError("key/value entry '" + k + "' cannot be written on one line");
    }
    out += k + "=" + v + "\n";
  }
  return out;
}

KeyValues parse_key_values(const std::string& text) {
  KeyValues kv;
  std::istringstream is(text);
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ReportError("line " + std::to_string(lineno) + " is not key=value");
    kv.emplace_back(line.substr(0, eq), line.substr(eq + 1));
  }
  return kv;
}

const std::string& lookup(const KeyValues& kv, const std::string& key) {
  for (const auto& [k, v] : kv) {
    if (k == key) return v;
  }
  throw ReportError("report lacks '" + key + "'");
}

double lookup_double(const KeyValues& kv, const std::string& key) {
  try {
    return parse_double(lookup(kv, key));
  } catch (const std::invalid_argument&) {
    throw ReportError("report entry '" + key + "' is not a number");
  }
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw ReportError("cannot open '" + path + "' for writing");
  os.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!os) throw ReportError("write to '" + path + "' failed");
}

std::string read_text_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ReportError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

namespace {

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::uint64_t parse_hex64(const std::string& s) {
  std::uint64_t v = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v, 16);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) throw ReportError("bad hash '" + s + "'");
  return v;
}

long long parse_int(const std::string& s) {
  long long v = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) throw ReportError("bad integer '" + s + "'");
  return v;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

std::vector<double> parse_row(const std::string& line, std::size_t columns, int lineno) {
  const auto cells = split(line, ',');
  if (cells.size() != columns) {
    throw ReportError("line " + std::to_string(lineno) + ": expected " + std::to_string(columns) + " columns");
  }
  std::vector<double> v;
  for (const auto& c : cells) {
    try {
      v.push_back(parse_double(c));
    } catch (const std::invalid_argument&) {
      throw ReportError("line " + std::to_string(lineno) + ": '" + c + "' is not a number");
    }
  }
  return v;
}

std::string join_doubles(const std::vector<double>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ";" : "") + format_double(v[i]);
  return s;
}

std::vector<double> split_doubles(const std::string& s) {
  std::vector<double> v;
  if (s.empty()) return v;
  for (const auto& c : split(s, ';')) {
    try {
      v.push_back(parse_double(c));
    } catch (const std::invalid_argument&) {
      throw ReportError("'" + c + "' is not a number");
    }
  }
  return v;
}

// A table: '#'-prefixed key=value header lines, a column header, numeric rows.
struct Table {
  KeyValues header;
  std::vector<std::vector<double>> rows;
};

std::string format_table(const KeyValues& header, const std::string& columns,
                         const std::vector<std::vector<double>>& rows) {
  std::string out;
  for (const auto& line : split(format_key_values(header), '\n')) {
    if (!line.empty()) out += "# " + line + "\n";
  }
  out += columns + "\n";
  for (const auto& r : rows) {
    for (std::size_t i = 0; i < r.size(); ++i) out += (i ? "," : "") + format_double(r[i]);
    out += "\n";
  }
  return out;
}

Table parse_table(const std::string& text, const std::string& columns) {
  Table t;
  std::istringstream is(text);
  std::string line;
  int lineno = 0;
  bool seen_columns = false;
  const std::size_t ncol = split(columns, ',').size();
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    if (!seen_columns && line.rfind("# ", 0) == 0) {
      const auto kv = parse_key_values(line.substr(2));
      t.header.insert(t.header.end(), kv.begin(), kv.end());
    } else if (!seen_columns) {
      if (line != columns) throw ReportError("expected column header '" + columns + "'");
      seen_columns = true;
    } else {
      t.rows.push_back(parse_row(line, ncol, lineno));
    }
  }
  if (!seen_columns) throw ReportError("table has no column header");
  return t;
}

void read_meta(const KeyValues& kv, ReportMeta* meta) {
  if (!meta) return;
  meta->config_hash = lookup(kv, "config_hash");
  meta->tool_version = lookup(kv, "tool_version");
}

const std::string kCarlemanColumns = "member,s,lhs_log,rhs_log,ratio";
const std::string kLemma1Columns = "member,residual,residual_refined,ratio,absolute";
const std::string kSweepColumns = "noise,D_u,err_region,err_global";

}  // namespace

KeyValues plan_report(const WeightPlan& plan, const SigmaGapReport* gap, const ReportMeta& meta) {
  const auto& g = plan.geometry;
  KeyValues kv{
      {"report", "weight_plan"},
      {"tool_version", meta.tool_version},
      {"config_hash", meta.config_hash},
      {"geometry_hash", hex64(g.hash())},
      {"d", plan.d.description},
      {"lambda", format_double(plan.lambda)},
      {"alpha", format_double(plan.alpha)},
      {"beta", format_double(plan.beta)},
      {"delta", format_double(g.delta)},
      {"delta0", format_double(plan.delta0)},
      {"ell", format_double(g.ell)},
      {"D0_lo", format_double(plan.D0_lo)},
      {"D0_hi", format_double(plan.D0_hi)},
      {"d0", format_double(plan.d0)},
      {"d1", format_double(plan.d1)},
      {"margin", format_double(plan.margin)},
      {"delta0_sup", format_double(plan.delta0_sup)},
      {"beta_lo", format_double(plan.beta_lo)},
      {"beta_hi", format_double(plan.beta_hi)},
      {"alpha_inf", format_double(plan.alpha_inf)},
      {"sigma0", format_double(plan.sigma0)},
      {"sigma1", format_double(plan.sigma1)},
      {"sigma1_terminal", format_double(plan.sigma_parts.terminal)},
      {"sigma1_off_gamma", format_double(plan.sigma_parts.off_gamma)},
      {"sigma1_far_face", format_double(plan.sigma_parts.far_face)},
      {"gap_ratio", format_double(plan.sigma0 / plan.sigma1)},
      {"c0", format_double(plan.c0)},
  };
  const auto ineq = plan.derived_inequalities();
  kv.emplace_back("check_terminal_below_window", ineq[0] ? "1" : "0");
  kv.emplace_back("check_window_positive", ineq[1] ? "1" : "0");
  kv.emplace_back("check_far_face_below_window", ineq[2] ? "1" : "0");
  if (gap) {
    kv.emplace_back("sigma0_refined", format_double(gap->sigma0_refined));
    kv.emplace_back("sigma1_refined", format_double(gap->sigma1_refined));
    kv.emplace_back("gap_ratio_2lambda", format_double(gap->gap_ratio_2lambda));
    kv.emplace_back("gap_strict", gap->strict ? "1" : "0");
  }
  for (std::size_t i = 0; i < plan.warnings.size(); ++i) {
    kv.emplace_back("warning_" + std::to_string(i), plan.warnings[i]);
  }
  return kv;
}

std::string carleman_table(const CarlemanReport& r, const ReportMeta& meta) {
  const KeyValues header{{"report", "carleman_certificate"},
                         {"certificate", "empirical (finite corpus, finite s range)"},
                         {"tool_version", meta.tool_version},
                         {"config_hash", meta.config_hash},
                         {"geometry_hash", hex64(r.geometry_hash)},
                         {"corpus_size", std::to_string(r.corpus_size)},
                         {"s_grid", join_doubles(r.s_grid)},
                         {"C_cap", format_double(r.C_cap)},
                         {"C_emp", format_double(r.C_emp)},
                         {"s_min_emp", format_double(r.s_min_emp)}};
  std::vector<std::vector<double>> rows;
  for (const auto& row : r.rows) rows.push_back({double(row.member), row.s, row.lhs_log, row.rhs_log, row.ratio});
  return format_table(header, kCarlemanColumns, rows);
}

CarlemanReport parse_carleman_table(const std::string& text, ReportMeta* meta) {
  const Table t = parse_table(text, kCarlemanColumns);
  CarlemanReport r;
  read_meta(t.header, meta);
  r.geometry_hash = parse_hex64(lookup(t.header, "geometry_hash"));
  r.corpus_size = static_cast<int>(parse_int(lookup(t.header, "corpus_size")));
  r.s_grid = split_doubles(lookup(t.header, "s_grid"));
  r.C_cap = lookup_double(t.header, "C_cap");
  r.C_emp = lookup_double(t.header, "C_emp");
  r.s_min_emp = lookup_double(t.header, "s_min_emp");
  for (const auto& v : t.rows) r.rows.push_back({static_cast<int>(v[0]), v[1], v[2], v[3], v[4]});
  return r;
}

std::string lemma1_table(const Lemma1Study& st, const ReportMeta& meta) {
  const KeyValues header{{"report", "lemma1_identity"},
                         {"tool_version", meta.tool_version},
                         {"config_hash", meta.config_hash},
                         {"geometry_hash", hex64(st.geometry_hash)},
                         {"fraction_in_band", format_double(st.fraction_in_band)}};
  std::vector<std::vector<double>> rows;
  for (const auto& r : st.rows) {
    rows.push_back({double(r.member), r.residual, r.residual_refined, r.ratio, r.absolute ? 1.0 : 0.0});
  }
  return format_table(header, kLemma1Columns, rows);
}

Lemma1Study parse_lemma1_table(const std::string& text, ReportMeta* meta) {
  const Table t = parse_table(text, kLemma1Columns);
  Lemma1Study st;
  read_meta(t.header, meta);
  st.geometry_hash = parse_hex64(lookup(t.header, "geometry_hash"));
  st.fraction_in_band = lookup_double(t.header, "fraction_in_band");
  for (const auto& v : t.rows) st.rows.push_back({static_cast<int>(v[0]), v[1], v[2], v[3], v[4] != 0.0});
  return st;
}

std::string sweep_csv(const SweepReport& r, const ReportMeta& meta) {
  std::string out = kSweepColumns + "\n";
  for (const auto& row : r.rows) {
    out += format_double(row.noise) + "," + format_double(row.D_u) + "," + format_double(row.err_region) + "," +
           format_double(row.err_global) + "\n";
  }
  std::string fit;
  for (std::size_t i = 0; i < r.fit_rows.size(); ++i) fit += (i ? ";" : "") + std::to_string(r.fit_rows[i]);
  out += format_key_values({{"theta_emp", format_double(r.theta_emp)},
                            {"sigma0", format_double(r.sigma0)},
                            {"sigma1", format_double(r.sigma1)},
                            {"fit_rows", fit},
                            {"invariants_ok", r.invariants_ok ? "1" : "0"},
                            {"config_hash", meta.config_hash},
                            {"tool_version", meta.tool_version}});
  return out;
}

SweepReport parse_sweep_csv(const std::string& text, ReportMeta* meta) {
  std::istringstream is(text);
  std::string line;
  if (!std::getline(is, line) || line != kSweepColumns) {
    throw ReportError("sweep CSV must start with '" + kSweepColumns + "'");
  }
  SweepReport r;
  std::string footer;
  int lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    if (!footer.empty() || line.find('=') != std::string::npos) {
      footer += line + "\n";
      continue;
    }
    const auto v = parse_row(line, 4, lineno);
    r.rows.push_back({v[0], v[1], v[2], v[3]});
  }
  const KeyValues kv = parse_key_values(footer);
  if (kv.empty() || kv.front().first != "theta_emp") throw ReportError("sweep CSV footer must start with theta_emp=");
  read_meta(kv, meta);
  r.theta_emp = lookup_double(kv, "theta_emp");
  r.sigma0 = lookup_double(kv, "sigma0");
  r.sigma1 = lookup_double(kv, "sigma1");
  const std::string& fit = lookup(kv, "fit_rows");
  if (!fit.empty()) {
    for (const auto& c : split(fit, ';')) r.fit_rows.push_back(static_cast<int>(parse_int(c)));
  }
  r.invariants_ok = lookup(kv, "invariants_ok") == "1";
  return r;
}

}  // namespace clab
