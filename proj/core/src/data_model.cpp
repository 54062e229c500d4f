#include "rocsurf/data_model.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "rocsurf/rng.hpp"

namespace rocsurf {

namespace {

std::string trim(const std::string& s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= line.size(); ++i) {
    if (i == line.size() || line[i] == sep) {
      out.push_back(line.substr(start, i - start));
      start = i + 1;
    }
  }
  return out;
}

[[noreturn]] void fail_row(const std::string& message, std::size_t row) {
  std::ostringstream msg;
  msg << message << ", row " << row;
  throw validation_error(msg.str());
}

double parse_double(const std::string& cell, const std::string& column,
                    std::size_t row) {
  const std::string s = trim(cell);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc{} || ptr != s.data() + s.size()) {
    fail_row("malformed number '" + s + "' in column '" + column + "'", row);
  }
  if (!std::isfinite(value)) {
    fail_row("non-finite value in column '" + column + "'", row);
  }
  return value;
}

long parse_int(const std::string& cell, const std::string& column,
               std::size_t row) {
  const std::string s = trim(cell);
  long value = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc{} || ptr != s.data() + s.size()) {
    fail_row("malformed integer '" + s + "' in column '" + column + "'", row);
  }
  return value;
}

std::string format_double(double value) {
  std::array<char, 40> buf{};
  const int len = std::snprintf(buf.data(), buf.size(), "%.17g", value);
  return std::string(buf.data(), static_cast<std::size_t>(len));
}

// Reads one logical line, tolerating trailing carriage returns.
bool read_line(std::istream& in, std::string& line) {
  if (!std::getline(in, line)) return false;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return true;
}

}  // namespace

Dataset load_dataset(std::istream& in) {
  std::string line;
  if (!read_line(in, line)) throw validation_error("empty input: missing header");
  const std::vector<std::string> header = split(line, ',');
  if (header.size() < 4) {
    throw validation_error("header must name columns t,a1..ap,v,d");
  }
  const std::size_t p = header.size() - 3;
  if (trim(header[0]) != "t") {
    throw validation_error("first header column must be 't'");
  }
  for (std::size_t j = 0; j < p; ++j) {
    const std::string expected = "a" + std::to_string(j + 1);
    if (trim(header[1 + j]) != expected) {
      throw validation_error("covariate column " + std::to_string(j + 1) +
                             " must be named '" + expected + "'");
    }
  }
  if (trim(header[1 + p]) != "v" || trim(header[2 + p]) != "d") {
    throw validation_error("last header columns must be 'v' and 'd'");
  }

  Dataset dataset;
  dataset.p = p;
  std::size_t row = 1;
  while (read_line(in, line)) {
    ++row;
    if (trim(line).empty()) continue;
    const std::vector<std::string> cells = split(line, ',');
    if (cells.size() != header.size()) {
      std::ostringstream msg;
      msg << "expected " << header.size() << " columns, found " << cells.size();
      fail_row(msg.str(), row);
    }
    Unit unit;
    unit.t = parse_double(cells[0], "t", row);
    unit.a.resize(p);
    for (std::size_t j = 0; j < p; ++j) {
      unit.a[j] = parse_double(cells[1 + j], "a" + std::to_string(j + 1), row);
    }
    const long v = parse_int(cells[1 + p], "v", row);
    if (v != 0 && v != 1) fail_row("v must be 0 or 1", row);
    unit.v = static_cast<int>(v);
    const std::string d_cell = trim(cells[2 + p]);
    if (unit.v == 0) {
      if (!d_cell.empty()) fail_row("label present for unverified unit", row);
      unit.d = 0;
    } else {
      if (d_cell.empty()) fail_row("label missing for verified unit", row);
      const long d = parse_int(d_cell, "d", row);
      if (d < 1 || d > 3) fail_row("d must be in {1,2,3}", row);
      unit.d = static_cast<int>(d);
    }
    dataset.units.push_back(std::move(unit));
  }
  if (dataset.units.empty()) throw validation_error("dataset has no data rows");
  return dataset;
}

Dataset load_dataset_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw validation_error("cannot open input file: " + path);
  return load_dataset(in);
}

void serialize_dataset(const Dataset& dataset, std::ostream& out) {
  out << "t";
  for (std::size_t j = 0; j < dataset.p; ++j) out << ",a" << (j + 1);
  out << ",v,d\n";
  for (const auto& unit : dataset.units) {
    out << format_double(unit.t);
    for (std::size_t j = 0; j < dataset.p; ++j) {
      out << ',' << format_double(unit.a[j]);
    }
    out << ',' << unit.v << ',';
    if (unit.v == 1) out << unit.d;
    out << '\n';
  }
}

ValidationReport validate(const Dataset& dataset, const CutPair& cut) {
  check_cut(cut);
  ValidationReport report;
  report.n = dataset.n();
  double t_min = dataset.units.front().t;
  double t_max = t_min;
  for (const auto& unit : dataset.units) {
    t_min = std::min(t_min, unit.t);
    t_max = std::max(t_max, unit.t);
    if (unit.v == 1) {
      ++report.n_verified;
      ++report.verified_per_class[static_cast<std::size_t>(unit.d - 1)];
    }
  }
  report.verification_rate =
      static_cast<double>(report.n_verified) / static_cast<double>(report.n);
  for (std::size_t k = 0; k < 3; ++k) {
    if (report.verified_per_class[k] == 0) {
      report.warnings.push_back("class " + std::to_string(k + 1) +
                                " has 0 verified units");
    }
  }
  if (cut.c1 < t_min) report.warnings.push_back("c1 is below observed test range");
  if (cut.c1 > t_max) report.warnings.push_back("c1 exceeds observed test range");
  if (cut.c2 < t_min) report.warnings.push_back("c2 is below observed test range");
  if (cut.c2 > t_max) report.warnings.push_back("c2 exceeds observed test range");
  return report;
}

double SubsampleRule::probability(const Unit& unit) const {
  double prob = base;
  for (const auto& term : terms) {
    const double x =
        term.variable < 0 ? unit.t : unit.a[static_cast<std::size_t>(term.variable)];
    if (x > term.threshold) prob += term.coefficient;
  }
  return prob;
}

namespace {

int parse_variable(const std::string& name) {
  const std::string v = trim(name);
  if (v == "t") return -1;
  if (v.size() >= 2 && v[0] == 'a') {
    long idx = 0;
    const auto [ptr, ec] = std::from_chars(v.data() + 1, v.data() + v.size(), idx);
    if (ec == std::errc{} && ptr == v.data() + v.size() && idx >= 1) {
      return static_cast<int>(idx - 1);
    }
  }
  throw validation_error("unknown variable '" + v + "' (expected t or a1..ap)");
}

double parse_number(const std::string& text, const std::string& what) {
  const std::string s = trim(text);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc{} || ptr != s.data() + s.size()) {
    throw validation_error("malformed " + what + " '" + s + "'");
  }
  return value;
}

}  // namespace

SubsampleRule parse_subsample_rule(const std::string& text) {
  SubsampleRule rule;
  bool saw_base = false;
  for (const std::string& raw : split(text, '+')) {
    const std::string term = trim(raw);
    if (term.empty()) throw validation_error("empty term in subsample rule");
    const std::size_t ipos = term.find("I(");
    if (ipos == std::string::npos) {
      rule.base += parse_number(term, "base probability");
      saw_base = true;
      continue;
    }
    std::string head = trim(term.substr(0, ipos));
    if (head.empty() || head.back() != '*') {
      throw validation_error("expected 'coefficient*I(var>thr)' in term '" +
                             term + "'");
    }
    head.pop_back();
    const double coefficient = parse_number(head, "coefficient");
    if (term.back() != ')') {
      throw validation_error("unterminated indicator in term '" + term + "'");
    }
    const std::string inner = term.substr(ipos + 2, term.size() - ipos - 3);
    const std::size_t gt = inner.find('>');
    if (gt == std::string::npos) {
      throw validation_error("indicator must compare with '>' in term '" + term +
                             "'");
    }
    SubsampleTerm st;
    st.variable = parse_variable(inner.substr(0, gt));
    st.threshold = parse_number(inner.substr(gt + 1), "threshold");
    st.coefficient = coefficient;
    rule.terms.push_back(st);
  }
  if (!saw_base && rule.terms.empty()) {
    throw validation_error("subsample rule is empty");
  }
  return rule;
}

Dataset subsample_verification(const Dataset& dataset, const SubsampleRule& rule,
                               std::uint64_t seed) {
  if (!dataset.fully_verified()) {
    throw validation_error("subsample requires a fully verified input dataset");
  }
  for (const auto& term : rule.terms) {
    if (term.variable >= static_cast<int>(dataset.p)) {
      throw validation_error("rule references covariate a" +
                             std::to_string(term.variable + 1) +
                             " but the dataset has p = " + std::to_string(dataset.p));
    }
  }
  Dataset out = dataset;
  Rng rng(seed);
  for (std::size_t i = 0; i < out.units.size(); ++i) {
    double prob = rule.probability(out.units[i]);
    // Sums like 0.05 + 0.35 + 0.25 + 0.35 can overshoot a bound by one
    // ulp; fold it back before rejecting.
    if (prob > 1.0 && prob < 1.0 + 1e-12) prob = 1.0;
    if (prob < 0.0 && prob > -1e-12) prob = 0.0;
    if (!(prob >= 0.0 && prob <= 1.0)) {
      std::ostringstream msg;
      msg << "selection probability " << prob << " outside [0,1], row " << (i + 2);
      throw validation_error(msg.str());
    }
    const bool keep = rng.bernoulli(prob);
    out.units[i].v = keep ? 1 : 0;
    if (!keep) out.units[i].d = 0;
  }
  return out;
}

}  // namespace rocsurf
