#include "ecoap/io.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

#include "ecoap/error.hpp"
#include "ecoap/harness.hpp"

namespace ecoap {

using nlohmann::json;

namespace {

json vec2(Vec2 v) { return json::array({v.x, v.y}); }
Vec2 vec2(const json& j) { return {j.at(0).get<double>(), j.at(1).get<double>()}; }

json prov_json(const Provenance& p) { return {{"config_hash", p.config_hash}, {"seed", p.seed}}; }

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> cells;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

template <class T>
T parse_cell(const std::string& s, std::size_t line_no) {
  T v{};
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || p != s.data() + s.size())
    throw Error(ErrorKind::Parse, "line " + std::to_string(line_no) + ": cannot parse '" + s + "'");
  return v;
}

// Iterates non-empty data lines after a header that must start with `first`.
template <class Fn>
void for_each_row(std::istream& in, const std::string& first, std::size_t cols, Fn&& fn) {
  std::string line;
  std::size_t line_no = 0;
  if (!std::getline(in, line)) throw Error(ErrorKind::Parse, "line 1: missing header");
  ++line_no;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line.rfind(first, 0) != 0) throw Error(ErrorKind::Parse, "line 1: header must start with '" + first + "'");
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto cells = split_csv(line);
    if (cells.size() != cols)
      throw Error(ErrorKind::Parse, "line " + std::to_string(line_no) + ": expected " + std::to_string(cols) +
                                        " cells, got " + std::to_string(cells.size()));
    fn(cells, line_no);
  }
}

}  // namespace

json scenario_to_json(const GroundTruthScenario& sc, const Provenance& prov) {
  json j;
  j["provenance"] = prov_json(prov);
  j["area"] = vec2(sc.area);
  j["grid_spacing"] = sc.grid_spacing;
  j["seed"] = sc.seed;
  j["aps"] = json::array();
  for (const auto& ap : sc.aps) {
    j["aps"].push_back({{"id", ap.id},
                        {"position", vec2(ap.position)},
                        {"tx_power", ap.tx_power},
                        {"power_levels", ap.power_levels},
                        {"watts_on", ap.watts_on},
                        {"watts_standby", ap.watts_standby}});
  }
  j["ues"] = json::array();
  for (std::size_t i = 0; i < sc.ues.size(); ++i) {
    const auto& ue = sc.ues[i];
    j["ues"].push_back(
        {{"id", ue.id}, {"position", vec2(ue.position)}, {"demand", ue.demand}, {"label", sc.true_label[i]}});
  }
  j["cluster_zones"] = json::array();
  for (const auto& z : sc.zones) j["cluster_zones"].push_back({{"center", vec2(z.center)}, {"radius", z.radius}});
  return j;
}

GroundTruthScenario scenario_from_json(const json& j) {
  try {
    GroundTruthScenario sc;
    sc.area = vec2(j.at("area"));
    sc.grid_spacing = j.at("grid_spacing").get<double>();
    sc.seed = j.at("seed").get<std::uint64_t>();
    for (const auto& a : j.at("aps")) {
      ApNode ap;
      ap.id = a.at("id").get<int>();
      ap.position = vec2(a.at("position"));
      ap.tx_power = a.at("tx_power").get<double>();
      ap.power_levels = a.at("power_levels").get<std::vector<double>>();
      ap.watts_on = a.at("watts_on").get<double>();
      ap.watts_standby = a.at("watts_standby").get<double>();
      sc.aps.push_back(std::move(ap));
    }
    for (const auto& u : j.at("ues")) {
      sc.ues.push_back({u.at("id").get<int>(), vec2(u.at("position")), u.at("demand").get<double>()});
      sc.true_label.push_back(u.at("label").get<int>());
    }
    for (const auto& z : j.at("cluster_zones")) sc.zones.push_back({vec2(z.at("center")), z.at("radius").get<double>()});
    return sc;
  } catch (const json::exception& e) {
    throw Error(ErrorKind::Parse, std::string("scenario file: ") + e.what());
  }
}

json sidecar_to_json(const RssSidecar& s) {
  json j;
  j["provenance"] = prov_json(s.provenance);
  j["sensitivity"] = s.sensitivity;
  j["aps"] = json::array();
  for (std::size_t a = 0; a < s.ap_ids.size(); ++a) {
    j["aps"].push_back({{"id", s.ap_ids[a]},
                        {"ref_power", s.ref_power[a]},
                        {"power_levels", s.aps[a].power_levels},
                        {"watts_on", s.aps[a].watts_on},
                        {"watts_standby", s.aps[a].watts_standby}});
  }
  return j;
}

RssSidecar sidecar_from_json(const json& j) {
  try {
    RssSidecar s;
    s.sensitivity = j.at("sensitivity").get<double>();
    if (j.contains("provenance")) {
      s.provenance.config_hash = j["provenance"].at("config_hash").get<std::string>();
      s.provenance.seed = j["provenance"].at("seed").get<std::uint64_t>();
    }
    for (const auto& a : j.at("aps")) {
      s.ap_ids.push_back(a.at("id").get<int>());
      s.ref_power.push_back(a.at("ref_power").get<double>());
      ApSpec spec{a.at("power_levels").get<std::vector<double>>(), a.at("watts_on").get<double>(),
                  a.at("watts_standby").get<double>()};
      if (spec.power_levels.empty()) throw Error(ErrorKind::Parse, "sidecar: empty power_levels");
      s.aps.push_back(std::move(spec));
    }
    return s;
  } catch (const json::exception& e) {
    throw Error(ErrorKind::Parse, std::string("rss sidecar: ") + e.what());
  }
}

std::filesystem::path sidecar_path(const std::filesystem::path& rss_csv) {
  auto p = rss_csv;
  p.replace_extension(".json");
  return p;
}

void write_labels_csv(std::ostream& out, const ClusteringResult& r) {
  out << "ue_id,label,density,converged\n";
  for (std::size_t i = 0; i < r.ue_ids.size(); ++i)
    out << r.ue_ids[i] << ',' << r.labels[i] << ',' << format_number(r.density[i]) << ','
        << (r.converged[i] ? 1 : 0) << '\n';
}

ClusteringResult read_labels_csv(std::istream& in) {
  ClusteringResult r;
  int max_label = 0;
  for_each_row(in, "ue_id", 4, [&](const std::vector<std::string>& c, std::size_t line_no) {
    r.ue_ids.push_back(parse_cell<int>(c[0], line_no));
    const int label = parse_cell<int>(c[1], line_no);
    if (label < 0) throw Error(ErrorKind::Parse, "line " + std::to_string(line_no) + ": negative label");
    max_label = std::max(max_label, label);
    r.labels.push_back(label);
    r.density.push_back(parse_cell<double>(c[2], line_no));
    r.converged.push_back(parse_cell<int>(c[3], line_no) != 0);
  });
  r.k = max_label;
  return r;
}

json cluster_summary_json(const ClusteringResult& r, const Provenance& prov) {
  json j;
  j["provenance"] = prov_json(prov);
  j["k"] = r.k;
  j["bandwidth_db"] = r.bandwidth;
  j["threshold"] = r.threshold;
  j["degenerate"] = r.degenerate;
  j["ascent_violations"] = r.ascent_violations;
  j["modes"] = r.modes;
  return j;
}

std::vector<double> read_demands_csv(std::istream& in, const std::vector<int>& ue_ids) {
  std::map<int, double> by_id;
  for_each_row(in, "ue_id", 2, [&](const std::vector<std::string>& c, std::size_t line_no) {
    const int id = parse_cell<int>(c[0], line_no);
    const double mbps = parse_cell<double>(c[1], line_no);
    if (!(mbps >= 0.0)) throw Error(ErrorKind::Parse, "line " + std::to_string(line_no) + ": demand must be >= 0");
    if (!by_id.emplace(id, mbps).second)
      throw Error(ErrorKind::Parse, "line " + std::to_string(line_no) + ": duplicate ue_id " + std::to_string(id));
  });
  std::vector<double> out;
  for (int id : ue_ids) {
    auto it = by_id.find(id);
    if (it == by_id.end()) throw Error(ErrorKind::Consistency, "demands: no entry for UE " + std::to_string(id));
    out.push_back(it->second);
    by_id.erase(it);
  }
  if (!by_id.empty())
    throw Error(ErrorKind::Consistency, "demands: UE " + std::to_string(by_id.begin()->first) + " not in the matrix");
  return out;
}

json plan_to_json(const TopologyPlan& plan) {
  json j;
  j["feasible"] = plan.feasible;
  j["off_count"] = plan.off_count;
  j["total_watts"] = plan.total_watts;
  j["active"] = json::array();
  j["inactive"] = json::array();
  for (std::size_t a = 0; a < plan.ap_ids.size(); ++a) {
    if (plan.active[a])
      j["active"].push_back({{"ap_id", plan.ap_ids[a]}, {"power_dbm", plan.power[a]}});
    else
      j["inactive"].push_back(plan.ap_ids[a]);
  }
  j["assignment"] = json::object();
  for (std::size_t u = 0; u < plan.ue_ids.size(); ++u) {
    const int a = plan.assignment[u];
    j["assignment"][std::to_string(plan.ue_ids[u])] =
        a == kUnserved ? json("UNSERVED") : json(plan.ap_ids[static_cast<std::size_t>(a)]);
  }
  j["violations"] = json::array();
  for (const auto& v : plan.violations) {
    if (v.kind == Violation::Kind::Uncovered)
      j["violations"].push_back({{"kind", "uncovered"}, {"ue_id", plan.ue_ids[v.index]}});
    else
      j["violations"].push_back({{"kind", "overloaded"}, {"ap_id", plan.ap_ids[v.index]}, {"airtime", v.airtime}});
  }
  return j;
}

void write_assignment_csv(std::ostream& out, const TopologyPlan& plan) {
  out << "ue_id,ap_id\n";
  for (std::size_t u = 0; u < plan.ue_ids.size(); ++u) {
    const int a = plan.assignment[u];
    out << plan.ue_ids[u] << ',';
    if (a == kUnserved) out << "UNSERVED";
    else out << plan.ap_ids[static_cast<std::size_t>(a)];
    out << '\n';
  }
}

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot read '" + p.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& p, const std::string& content) {
  std::ofstream out(p, std::ios::binary);
  if (!out || !(out << content) || !out.flush()) throw Error(ErrorKind::Io, "cannot write '" + p.string() + "'");
}

json read_json_file(const std::filesystem::path& p) {
  const std::string text = read_file(p);
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::Parse, p.string() + ": " + e.what());
  }
}

}  // namespace ecoap
