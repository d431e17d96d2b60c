#include "ecoap/rss_matrix.hpp"

#include <charconv>
#include <cstdio>
#include <istream>
#include <ostream>
#include <set>
#include <string_view>

#include "ecoap/error.hpp"

namespace ecoap {

RssMatrix::RssMatrix(std::vector<int> ues, std::vector<int> aps, std::vector<double> ref)
    : ue_ids(std::move(ues)), ap_ids(std::move(aps)), ref_power(std::move(ref)) {
  values.assign(ue_ids.size() * ap_ids.size(), kNotDetected);
  if (ref_power.empty()) ref_power.assign(ap_ids.size(), 0.0);
}

void RssMatrix::validate() const {
  if (values.size() != ue_ids.size() * ap_ids.size())
    throw Error(ErrorKind::Input, "rss matrix: value count does not match id lists");
  if (ref_power.size() != ap_ids.size())
    throw Error(ErrorKind::Input, "rss matrix: ref_power size does not match AP count");
  if (std::set<int>(ue_ids.begin(), ue_ids.end()).size() != ue_ids.size())
    throw Error(ErrorKind::Input, "rss matrix: duplicate UE id");
  if (std::set<int>(ap_ids.begin(), ap_ids.end()).size() != ap_ids.size())
    throw Error(ErrorKind::Input, "rss matrix: duplicate AP id");
  for (double v : values) {
    if (is_detected(v) && (v < kMinRssDbm || v > kMaxRssDbm))
      throw Error(ErrorKind::Input, "rss matrix: entry " + std::to_string(v) + " dBm outside [-120, 30]");
  }
}

bool operator==(const RssMatrix& a, const RssMatrix& b) {
  if (a.ue_ids != b.ue_ids || a.ap_ids != b.ap_ids || a.ref_power != b.ref_power) return false;
  if (a.values.size() != b.values.size()) return false;
  for (std::size_t i = 0; i < a.values.size(); ++i) {
    const bool da = is_detected(a.values[i]);
    if (da != is_detected(b.values[i])) return false;
    if (da && a.values[i] != b.values[i]) return false;
  }
  return true;
}

std::string format_dbm(double dbm) {
  if (!is_detected(dbm)) return "NA";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.1f", dbm);
  return buf;
}

void write_rss_csv(std::ostream& out, const RssMatrix& m) {
  out << "ue_id";
  for (int id : m.ap_ids) out << ',' << id;
  out << '\n';
  for (std::size_t u = 0; u < m.ue_count(); ++u) {
    out << m.ue_ids[u];
    for (double v : m.row(u)) out << ',' << format_dbm(v);
    out << '\n';
  }
}

namespace {

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> cells;
  std::size_t start = 0;
  for (;;) {
    const auto comma = line.find(',', start);
    cells.push_back(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return cells;
}

[[noreturn]] void parse_fail(std::size_t line_no, const std::string& msg) {
  throw Error(ErrorKind::Parse, "line " + std::to_string(line_no) + ": " + msg);
}

int parse_int(std::string_view s, std::size_t line_no) {
  int v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || p != s.data() + s.size()) parse_fail(line_no, "expected integer, got '" + std::string(s) + "'");
  return v;
}

double parse_double(std::string_view s, std::size_t line_no) {
  double v = 0.0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || p != s.data() + s.size() || !std::isfinite(v))
    parse_fail(line_no, "expected number, got '" + std::string(s) + "'");
  return v;
}

}  // namespace

RssMatrix read_rss_csv(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  auto next_line = [&]() -> bool {
    if (!std::getline(in, line)) return false;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return true;
  };

  if (!next_line()) parse_fail(1, "empty file, expected header");
  auto header = split(line);
  if (header.front() != "ue_id") parse_fail(line_no, "header must start with 'ue_id'");
  std::vector<int> aps;
  for (std::size_t i = 1; i < header.size(); ++i) aps.push_back(parse_int(header[i], line_no));

  std::vector<int> ues;
  std::vector<double> values;
  while (next_line()) {
    if (line.empty()) continue;
    auto cells = split(line);
    if (cells.size() != aps.size() + 1)
      parse_fail(line_no, "expected " + std::to_string(aps.size() + 1) + " cells, got " + std::to_string(cells.size()));
    ues.push_back(parse_int(cells[0], line_no));
    for (std::size_t i = 1; i < cells.size(); ++i)
      values.push_back(cells[i] == "NA" ? kNotDetected : parse_double(cells[i], line_no));
  }

  RssMatrix m(std::move(ues), std::move(aps), {});
  m.values = std::move(values);
  try {
    m.validate();
  } catch (const Error& e) {
    throw Error(ErrorKind::Parse, e.what());
  }
  return m;
}

}  // namespace ecoap
