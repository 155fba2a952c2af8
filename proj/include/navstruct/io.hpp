#pragma once

// File formats: scenario, structure and policy files are JSON; size tables
// and tradeoff tables are CSV. Numbers are written in shortest round-trip
// form so load(save(x)) reproduces x exactly.

#include <algorithm>
#include <array>
#include <cerrno>
#include <cmath>
#include <charconv>
#include <cstring>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "navstruct/cost.hpp"
#include "navstruct/errors.hpp"
#include "navstruct/evaluator.hpp"
#include "navstruct/oracle.hpp"
#include "navstruct/scenario.hpp"

namespace navstruct {

using nlohmann::json;

// ---------------------------------------------------------------------------
// Files and numbers

inline std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidInput("cannot open " + path + ": " + std::strerror(errno));
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

inline void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InvalidInput("cannot write " + path + ": " + std::strerror(errno));
  out << text;
  out.flush();
  if (!out) throw InvalidInput("write failed for " + path + ": " + std::strerror(errno));
}

inline std::string format_double(double v) {
  std::array<char, 64> buf{};
  auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), end);
}

inline double parse_double(std::string_view s, const std::string& where) {
  double v = 0.0;
  auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || end != s.data() + s.size()) throw InvalidInput(where + ": bad number '" + std::string(s) + "'");
  return v;
}

inline long long parse_int(std::string_view s, const std::string& where) {
  long long v = 0;
  auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || end != s.data() + s.size()) throw InvalidInput(where + ": bad integer '" + std::string(s) + "'");
  return v;
}

namespace io_detail {

inline json parse_json(const std::string& text, const std::string& what) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw InvalidInput(what + ": " + e.what());
  }
}

/// Runs a json accessor, turning library type errors into InvalidInput.
template <class F>
auto guarded(const std::string& what, F&& f) {
  try {
    return f();
  } catch (const json::exception& e) {
    throw InvalidInput(what + ": " + e.what());
  }
}

inline void require_keys(const json& obj, std::initializer_list<const char*> allowed,
                         std::initializer_list<const char*> required, const std::string& what) {
  if (!obj.is_object()) throw InvalidInput(what + ": expected a JSON object");
  std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& [key, value] : obj.items())
    if (!ok.contains(key)) throw InvalidInput(what + ": unknown key '" + key + "'");
  for (const char* key : required)
    if (!obj.contains(key)) throw InvalidInput(what + ": missing key '" + std::string(key) + "'");
}

inline json mdu_or_null(Mdu m) { return m == kNone ? json(nullptr) : json(m); }
inline Mdu mdu_from(const json& j) { return j.is_null() ? kNone : j.get<Mdu>(); }

/// Splits one CSV line on commas; no quoting is used by these formats.
inline std::vector<std::string_view> split_csv(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    out.push_back(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

inline std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) out.push_back(line);
  }
  return out;
}

}  // namespace io_detail

// ---------------------------------------------------------------------------
// Scenario

inline json scenario_to_json(const Scenario& sc) {
  json j;
  j["n"] = sc.graph.size();
  j["start"] = sc.graph.start();
  j["neighbors"] = sc.graph.adjacency();
  json start = json::array();
  for (const auto& tr : sc.nav.start_row()) start.push_back({tr.next, tr.prob});
  j["p_start"] = std::move(start);
  json rows = json::array();
  for (const auto& [key, row] : sc.nav.rows())
    for (const auto& tr : row) rows.push_back({key.first, key.second, tr.next, tr.prob});
  j["p_switch"] = std::move(rows);
  j["lifetime"] = {{"mu", sc.lifetime.mu()}, {"t_max", sc.lifetime.t_max()}};
  return j;
}

/// Parses and validates a scenario; the navigation model must pass
/// validate_navigation_model.
inline Scenario scenario_from_json(const json& j) {
  const std::string what = "scenario";
  io_detail::require_keys(j, {"n", "start", "neighbors", "p_start", "p_switch", "lifetime"},
                          {"n", "start", "neighbors", "p_start", "p_switch", "lifetime"}, what);
  return io_detail::guarded(what, [&] {
    Scenario sc;
    const auto n = j.at("n").get<std::size_t>();
    auto nb = j.at("neighbors").get<std::vector<std::vector<Mdu>>>();
    if (nb.size() != n) throw InvalidInput("scenario: neighbors has " + std::to_string(nb.size()) + " rows, n = " + std::to_string(n));
    for (auto& row : nb) std::sort(row.begin(), row.end());
    sc.graph = MediaGraph(std::move(nb), j.at("start").get<Mdu>());

    std::vector<Transition> start;
    for (const auto& e : j.at("p_start")) {
      if (!e.is_array() || e.size() != 2) throw InvalidInput("scenario: p_start entries are [j, p]");
      start.push_back({e[0].get<Mdu>(), e[1].get<double>()});
    }
    sc.nav.set_start_row(std::move(start));
    std::map<std::pair<Mdu, Mdu>, std::vector<Transition>> rows;
    for (const auto& e : j.at("p_switch")) {
      if (!e.is_array() || e.size() != 4) throw InvalidInput("scenario: p_switch entries are [k, i, j, p]");
      rows[{e[0].get<Mdu>(), e[1].get<Mdu>()}].push_back({e[2].get<Mdu>(), e[3].get<double>()});
    }
    for (auto& [key, row] : rows) {
      if (key.first == kNone) throw InvalidInput("scenario: p_switch uses k = -1; put start moves in p_start");
      sc.nav.set_row(key.first, key.second, std::move(row));
    }

    const auto& life = j.at("lifetime");
    io_detail::require_keys(life, {"mu", "t_max"}, {"mu", "t_max"}, "scenario lifetime");
    sc.lifetime = build_lifetime_tail(life.at("mu").get<double>(), life.at("t_max").get<int>());
    require_valid(sc);
    return sc;
  });
}

inline void save_scenario(const std::string& path, const Scenario& sc) { write_text(path, scenario_to_json(sc).dump(1) + "\n"); }
inline Scenario load_scenario(const std::string& path) {
  return scenario_from_json(io_detail::parse_json(read_text(path), path));
}

// ---------------------------------------------------------------------------
// Sizes

inline std::string sizes_to_csv(const SizeTable& t) {
  std::string out = "kind,i,j,bits\n";
  const auto n = static_cast<Mdu>(t.size());
  for (Mdu j = 0; j < n; ++j) {
    if (t.has_intra(j)) out += "I," + std::to_string(j) + ",," + format_double(t.intra(j)) + "\n";
    if (t.has_merge(j)) out += "M," + std::to_string(j) + ",," + format_double(t.merge(j)) + "\n";
  }
  for (Mdu i = 0; i < n; ++i)
    for (Mdu j = 0; j < n; ++j)
      if (i != j && t.has_inter(i, j))
        out += "P," + std::to_string(i) + "," + std::to_string(j) + "," + format_double(t.inter(i, j)) + "\n";
  return out;
}

/// Rows `kind,i,j,bits`. For P rows i is the predictor and j the target; I
/// and M rows leave j empty. The table size is one past the largest index.
inline SizeTable sizes_from_csv(const std::string& text, const std::string& what = "sizes") {
  const auto lines = io_detail::lines_of(text);
  if (lines.empty() || lines.front() != "kind,i,j,bits") throw InvalidInput(what + ": header must be kind,i,j,bits");
  struct Row {
    char kind;
    Mdu i, j;
    double bits;
  };
  std::vector<Row> rows;
  Mdu top = -1;
  for (std::size_t k = 1; k < lines.size(); ++k) {
    const std::string where = what + " line " + std::to_string(k + 1);
    const auto f = io_detail::split_csv(lines[k]);
    if (f.size() != 4) throw InvalidInput(where + ": expected 4 fields");
    if (f[0] != "I" && f[0] != "M" && f[0] != "P") throw InvalidInput(where + ": kind must be I, M or P");
    Row r{f[0][0], static_cast<Mdu>(parse_int(f[1], where)), kNone, parse_double(f[3], where)};
    if (r.kind == 'P') r.j = static_cast<Mdu>(parse_int(f[2], where));
    else if (!f[2].empty()) throw InvalidInput(where + ": j must be empty for " + std::string(f[0]) + " rows");
    if (r.i < 0 || (r.kind == 'P' && (r.j < 0 || r.j == r.i))) throw InvalidInput(where + ": bad MDU index");
    top = std::max({top, r.i, r.j});
    rows.push_back(r);
  }
  if (top < 0) throw InvalidInput(what + ": no rows");
  SizeTable t(static_cast<std::size_t>(top) + 1);
  for (const auto& r : rows) {
    if (r.kind == 'I') t.set_intra(r.i, r.bits);
    else if (r.kind == 'M') t.set_merge(r.i, r.bits);
    else t.set_inter(r.i, r.j, r.bits);
  }
  return t;
}

inline void save_sizes(const std::string& path, const SizeTable& t) { write_text(path, sizes_to_csv(t)); }
inline SizeTable load_sizes(const std::string& path) { return sizes_from_csv(read_text(path), path); }

/// Size table for exactly n MDUs with every entry present.
inline void require_complete(const SizeTable& t, std::size_t n) {
  if (t.size() != n)
    throw CorruptTable("size table covers " + std::to_string(t.size()) + " MDUs, scenario has " + std::to_string(n));
  if (!t.complete()) throw CorruptTable("size table is missing entries");
}

// ---------------------------------------------------------------------------
// Structure

inline json structure_to_json(const Structure& s) {
  json j;
  j["i_set"] = std::vector<Mdu>(s.intra.begin(), s.intra.end());
  json edges = json::array();
  for (const auto& e : s.edges) edges.push_back({e.predictor, e.target});
  j["p_edges"] = std::move(edges);
  json lms = json::array();
  for (const auto& p : s.landmarks) lms.push_back({{"l", p.landmark}, {"members", p.members}});
  j["landmarks"] = std::move(lms);
  return j;
}

inline Structure structure_from_json(const json& j, std::optional<std::size_t> n = std::nullopt) {
  const std::string what = "structure";
  io_detail::require_keys(j, {"i_set", "p_edges", "landmarks"}, {"i_set", "p_edges"}, what);
  Structure s = io_detail::guarded(what, [&] {
    Structure s;
    for (Mdu m : j.at("i_set").get<std::vector<Mdu>>()) s.intra.insert(m);
    for (const auto& e : j.at("p_edges")) {
      if (!e.is_array() || e.size() != 2) throw InvalidInput("structure: p_edges entries are [i, j]");
      s.edges.insert({e[0].get<Mdu>(), e[1].get<Mdu>()});
    }
    if (j.contains("landmarks"))
      for (const auto& p : j.at("landmarks")) {
        io_detail::require_keys(p, {"l", "members"}, {"l", "members"}, "structure landmark");
        Partition part{p.at("l").get<Mdu>(), p.at("members").get<std::vector<Mdu>>()};
        std::sort(part.members.begin(), part.members.end());
        s.landmarks.push_back(std::move(part));
      }
    return s;
  });
  if (n) {
    if (auto problems = validate_structure(s, *n); !problems.empty())
      throw InvalidInput("structure: " + problems.front());
  }
  return s;
}

inline void save_structure(const std::string& path, const Structure& s) { write_text(path, structure_to_json(s).dump(1) + "\n"); }
inline Structure load_structure(const std::string& path, std::optional<std::size_t> n = std::nullopt) {
  return structure_from_json(io_detail::parse_json(read_text(path), path), n);
}

// ---------------------------------------------------------------------------
// Policy

inline ActionKind parse_action_kind(const std::string& s) {
  if (s == "0-hop") return ActionKind::zero_hop;
  if (s == "1-hop") return ActionKind::one_hop;
  if (s == "2-hop") return ActionKind::two_hop;
  throw InvalidInput("unknown action kind '" + s + "'");
}

struct PolicyFile {
  BufferModel buffer = BufferModel::flexible;
  Policy policy;
};

inline json policy_to_json(const Policy& policy, BufferModel buffer) {
  using io_detail::mdu_or_null;
  json entries = json::array();
  for (const auto& [k, a] : policy)
    entries.push_back({{"t", k.t},
                       {"prev", mdu_or_null(k.prev)},
                       {"cur", k.cur},
                       {"buffer", mdu_or_null(k.buffer)},
                       {"target", k.target},
                       {"kind", to_string(a.kind)},
                       {"predictor", mdu_or_null(a.predictor)},
                       {"via", mdu_or_null(a.via)},
                       {"next_buffer", mdu_or_null(a.next_buffer)},
                       {"bits", a.bits}});
  return {{"buffer", to_string(buffer)}, {"entries", std::move(entries)}};
}

inline PolicyFile policy_from_json(const json& j) {
  io_detail::require_keys(j, {"buffer", "entries"}, {"buffer", "entries"}, "policy");
  return io_detail::guarded("policy", [&] {
    using io_detail::mdu_from;
    PolicyFile out;
    out.buffer = parse_buffer_model(j.at("buffer").get<std::string>());
    for (const auto& e : j.at("entries")) {
      io_detail::require_keys(e, {"t", "prev", "cur", "buffer", "target", "kind", "predictor", "via", "next_buffer", "bits"},
                              {"t", "prev", "cur", "buffer", "target", "kind", "predictor", "via", "next_buffer", "bits"},
                              "policy entry");
      PolicyKey k{e.at("t").get<int>(), mdu_from(e.at("prev")), e.at("cur").get<Mdu>(), mdu_from(e.at("buffer")),
                  e.at("target").get<Mdu>()};
      Action a{parse_action_kind(e.at("kind").get<std::string>()), mdu_from(e.at("predictor")), mdu_from(e.at("via")),
               mdu_from(e.at("next_buffer")), e.at("bits").get<double>()};
      out.policy.emplace(k, a);
    }
    return out;
  });
}

inline void save_policy(const std::string& path, const Policy& p, BufferModel b) {
  write_text(path, policy_to_json(p, b).dump() + "\n");
}
inline PolicyFile load_policy(const std::string& path) {
  return policy_from_json(io_detail::parse_json(read_text(path), path));
}

inline json trace_to_json(const SessionTrace& tr) {
  json actions = json::array();
  for (const auto& a : tr.actions)
    actions.push_back({{"kind", to_string(a.kind)},
                       {"predictor", io_detail::mdu_or_null(a.predictor)},
                       {"via", io_detail::mdu_or_null(a.via)},
                       {"bits", a.bits}});
  return {{"path", tr.path}, {"lifetime", tr.lifetime}, {"bits", tr.bits}, {"actions", std::move(actions)}};
}

// ---------------------------------------------------------------------------
// Tradeoff tables

struct TradeoffRow {
  std::string method;
  double lambda = 0.0;
  double storage_bits = 0.0;
  double expected_bits = 0.0;
  std::size_t landmarks = 0;
  std::size_t p_edges = 0;
  friend bool operator==(const TradeoffRow&, const TradeoffRow&) = default;
};

inline constexpr std::string_view kTradeoffHeader = "method,lambda,storage_bits,expected_bits,landmarks,p_edges";
inline constexpr std::string_view kSweepHeader = "lambda,storage_bits,expected_bits,landmarks,p_edges";

/// Rows grouped by method (first appearance order), then by lambda.
inline std::string tradeoff_to_csv(std::vector<TradeoffRow> rows) {
  if (rows.empty()) throw InvalidInput("no tradeoff rows to write");
  std::vector<std::string> order;
  for (const auto& r : rows)
    if (std::find(order.begin(), order.end(), r.method) == order.end()) order.push_back(r.method);
  std::stable_sort(rows.begin(), rows.end(), [&](const TradeoffRow& a, const TradeoffRow& b) {
    const auto ia = std::find(order.begin(), order.end(), a.method) - order.begin();
    const auto ib = std::find(order.begin(), order.end(), b.method) - order.begin();
    return ia != ib ? ia < ib : a.lambda < b.lambda;
  });
  std::string out(kTradeoffHeader);
  out += "\n";
  for (const auto& r : rows) {
    if (r.method.find_first_of(",\n") != std::string::npos) throw InvalidInput("method name contains a separator");
    out += r.method + "," + format_double(r.lambda) + "," + format_double(r.storage_bits) + "," +
           format_double(r.expected_bits) + "," + std::to_string(r.landmarks) + "," + std::to_string(r.p_edges) + "\n";
  }
  return out;
}

inline std::vector<TradeoffRow> tradeoff_from_csv(const std::string& text, const std::string& what = "tradeoff") {
  const auto lines = io_detail::lines_of(text);
  if (lines.empty() || lines.front() != kTradeoffHeader)
    throw InvalidInput(what + ": header must be " + std::string(kTradeoffHeader));
  std::vector<TradeoffRow> rows;
  for (std::size_t k = 1; k < lines.size(); ++k) {
    const std::string where = what + " line " + std::to_string(k + 1);
    const auto f = io_detail::split_csv(lines[k]);
    if (f.size() != 6) throw InvalidInput(where + ": expected 6 fields");
    rows.push_back({std::string(f[0]), parse_double(f[1], where), parse_double(f[2], where), parse_double(f[3], where),
                    static_cast<std::size_t>(parse_int(f[4], where)), static_cast<std::size_t>(parse_int(f[5], where))});
  }
  return rows;
}

/// Same columns without the method, for a single-method sweep.
inline std::string sweep_to_csv(const std::vector<TradeoffRow>& rows) {
  std::string out(kSweepHeader);
  out += "\n";
  for (const auto& r : rows)
    out += format_double(r.lambda) + "," + format_double(r.storage_bits) + "," + format_double(r.expected_bits) + "," +
           std::to_string(r.landmarks) + "," + std::to_string(r.p_edges) + "\n";
  return out;
}

/// Comma-separated list of non-negative reals, e.g. "0.5,1,2".
inline std::vector<double> parse_lambda_list(const std::string& s) {
  std::vector<double> out;
  for (auto f : io_detail::split_csv(s)) {
    const double v = parse_double(f, "lambda list");
    if (!(v >= 0.0) || !std::isfinite(v)) throw InvalidInput("lambda values must be finite and non-negative");
    out.push_back(v);
  }
  return out;
}

}  // namespace navstruct
