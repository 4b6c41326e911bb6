#include "hvrp/io.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>

#include "hvrp/error.hpp"
#include "hvrp/json_io.hpp"

namespace hvrp {

std::string format_number(double v) {
  std::array<char, 64> buf{};
  auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), res.ptr);
}

namespace {

struct Line {
  std::size_t number = 0;
  std::vector<std::string> tokens;
};

std::vector<std::string> split_ws(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream is(s);
  std::string t;
  while (is >> t) out.push_back(t);
  return out;
}

/// Non-empty lines with their 1-based line numbers.
std::vector<Line> tokenized_lines(const std::string& text) {
  std::vector<Line> lines;
  std::istringstream is(text);
  std::string raw;
  std::size_t no = 0;
  while (std::getline(is, raw)) {
    ++no;
    auto toks = split_ws(raw);
    if (!toks.empty()) lines.push_back({no, std::move(toks)});
  }
  return lines;
}

double to_double(const std::string& tok, const std::string& source, std::size_t line, const char* field) {
  double v = 0;
  const char* b = tok.data();
  const char* e = b + tok.size();
  if (!tok.empty() && *b == '+') ++b;
  auto res = std::from_chars(b, e, v);
  if (res.ec != std::errc() || res.ptr != e || !std::isfinite(v))
    throw ParseError(source, line, std::string("invalid number '") + tok + "' for " + field);
  return v;
}

long to_int(const std::string& tok, const std::string& source, std::size_t line, const char* field) {
  const double v = to_double(tok, source, line, field);
  if (v != std::floor(v)) throw ParseError(source, line, std::string("expected an integer for ") + field);
  return static_cast<long>(v);
}

/// Sequential token reader ignoring line structure but remembering positions.
class TokenStream {
 public:
  TokenStream(const std::string& text, std::string source) : source_(std::move(source)) {
    for (auto& l : tokenized_lines(text))
      for (auto& t : l.tokens) toks_.push_back({l.number, t});
  }

  bool done() const { return pos_ >= toks_.size(); }

  double real(const char* field) {
    const auto& [line, tok] = next(field);
    return to_double(tok, source_, line, field);
  }

  long integer(const char* field) {
    const auto& [line, tok] = next(field);
    return to_int(tok, source_, line, field);
  }

  std::size_t line() const { return pos_ < toks_.size() ? toks_[pos_].first : last_line(); }

 private:
  const std::pair<std::size_t, std::string>& next(const char* field) {
    if (pos_ >= toks_.size()) throw ParseError(source_, last_line(), std::string("unexpected end of file, expected ") + field);
    return toks_[pos_++];
  }
  std::size_t last_line() const { return toks_.empty() ? 1 : toks_.back().first; }

  std::string source_;
  std::vector<std::pair<std::size_t, std::string>> toks_;
  std::size_t pos_ = 0;
};

void require_positive(long v, const std::string& source, std::size_t line, const char* field) {
  if (v <= 0) throw ParseError(source, line, std::string(field) + " must be positive");
}

}  // namespace

// --- Cordeau -------------------------------------------------------------

MdvrpInstance parse_cordeau(const std::string& text, const std::string& source) {
  const auto lines = tokenized_lines(text);
  std::size_t at = 0;
  auto need = [&](const char* what) -> const Line& {
    if (at >= lines.size()) {
      const std::size_t ln = lines.empty() ? 1 : lines.back().number;
      throw ParseError(source, ln, std::string("unexpected end of file, expected ") + what);
    }
    return lines[at++];
  };

  const Line& head = need("problem header");
  if (head.tokens.size() < 4) throw ParseError(source, head.number, "header needs 'type m n t'");
  const long type = to_int(head.tokens[0], source, head.number, "type");
  const long m = to_int(head.tokens[1], source, head.number, "m");
  const long n = to_int(head.tokens[2], source, head.number, "n");
  const long t = to_int(head.tokens[3], source, head.number, "t");
  if (type != 2) throw ParseError(source, head.number, "only problem type 2 (MDVRP) is supported");
  if (m < 0) throw ParseError(source, head.number, "m must be non-negative");
  require_positive(n, source, head.number, "n");
  require_positive(t, source, head.number, "t");

  MdvrpInstance inst;
  inst.name = source;
  for (long d = 0; d < t; ++d) {
    const Line& l = need("depot limits 'D Q'");
    if (l.tokens.size() < 2) throw ParseError(source, l.number, "depot limit line needs 'D Q'");
    const double duration = to_double(l.tokens[0], source, l.number, "D");
    const long q = to_int(l.tokens[1], source, l.number, "Q");
    if (duration != 0) throw ParseError(source, l.number, "route-duration limits are not supported");
    require_positive(q, source, l.number, "Q");
    if (d == 0) inst.capacity = static_cast<int>(q);
    else if (q != inst.capacity) throw ParseError(source, l.number, "heterogeneous vehicle capacities are not supported");
  }
  for (long i = 0; i < n; ++i) {
    const Line& l = need("customer line");
    if (l.tokens.size() < 7) throw ParseError(source, l.number, "customer line needs 'i x y d q f a list'");
    const long a = to_int(l.tokens[6], source, l.number, "a");
    if (a < 0 || l.tokens.size() != static_cast<std::size_t>(7 + a))
      throw ParseError(source, l.number, "customer visit-combination list length does not match a");
    Customer c;
    c.pos = {to_double(l.tokens[1], source, l.number, "x"), to_double(l.tokens[2], source, l.number, "y")};
    const long q = to_int(l.tokens[4], source, l.number, "q");
    require_positive(q, source, l.number, "q");
    if (q > inst.capacity) throw ParseError(source, l.number, "demand exceeds vehicle capacity");
    c.demand = static_cast<int>(q);
    inst.customers.push_back(c);
  }
  for (long d = 0; d < t; ++d) {
    const Line& l = need("depot line");
    if (l.tokens.size() < 3) throw ParseError(source, l.number, "depot line needs 'i x y'");
    inst.depots.push_back({to_double(l.tokens[1], source, l.number, "x"), to_double(l.tokens[2], source, l.number, "y")});
  }
  if (at != lines.size()) throw ParseError(source, lines[at].number, "trailing data after depot lines");
  inst.vehicles.assign(t, m == 0 ? std::nullopt : std::optional<int>(static_cast<int>(m)));
  try {
    inst.validate();
  } catch (const ConfigError& e) {
    throw ParseError(source, head.number, e.what());
  }
  return inst;
}

std::string format_cordeau(const MdvrpInstance& inst) {
  const auto t = inst.num_depots();
  const auto& fleet = inst.vehicles.empty() ? std::optional<int>() : inst.vehicles.front();
  for (const auto& v : inst.vehicles)
    if (v != fleet) throw ConfigError("cordeau format requires the same fleet size at every depot");
  std::ostringstream os;
  os << "2 " << (fleet ? *fleet : 0) << ' ' << inst.num_customers() << ' ' << t << '\n';
  for (std::size_t d = 0; d < t; ++d) os << "0 " << inst.capacity << '\n';
  for (std::size_t i = 0; i < inst.num_customers(); ++i) {
    const auto& c = inst.customers[i];
    os << (i + 1) << ' ' << format_number(c.pos.x) << ' ' << format_number(c.pos.y) << " 0 " << c.demand << " 1 " << t;
    for (std::size_t d = 0; d < t; ++d) os << ' ' << (1UL << d);
    os << '\n';
  }
  for (std::size_t d = 0; d < t; ++d)
    os << (inst.num_customers() + d + 1) << ' ' << format_number(inst.depots[d].x) << ' '
       << format_number(inst.depots[d].y) << " 0 0 0 0\n";
  return os.str();
}

// --- TSPLIB-like CVRP ----------------------------------------------------

CvrpInstance parse_tsplib_cvrp(const std::string& text, const std::string& source) {
  const auto lines = tokenized_lines(text);
  CvrpInstance inst;
  inst.name = source;
  long dimension = -1;
  std::vector<std::optional<Point>> coords;
  std::vector<std::optional<long>> demands;
  std::vector<long> depot_ids;
  bool seen_coords = false, seen_demands = false, seen_depots = false, seen_eof = false;
  std::size_t at = 0;

  auto node_index = [&](const Line& l) {
    const long id = to_int(l.tokens[0], source, l.number, "node id");
    if (id < 1 || id > dimension) throw ParseError(source, l.number, "node id out of range");
    return static_cast<std::size_t>(id - 1);
  };

  while (at < lines.size()) {
    const Line& l = lines[at++];
    std::string joined;
    for (const auto& t : l.tokens) joined += (joined.empty() ? "" : " ") + t;
    const auto colon = joined.find(':');
    const std::string key = [&] {
      std::string k = colon == std::string::npos ? joined : joined.substr(0, colon);
      while (!k.empty() && std::isspace(static_cast<unsigned char>(k.back()))) k.pop_back();
      return k;
    }();
    const std::string value = [&] {
      if (colon == std::string::npos) return std::string();
      std::string v = joined.substr(colon + 1);
      while (!v.empty() && std::isspace(static_cast<unsigned char>(v.front()))) v.erase(v.begin());
      return v;
    }();

    if (key == "NAME") inst.name = value;
    else if (key == "TYPE") {
      if (value != "CVRP") throw ParseError(source, l.number, "TYPE must be CVRP");
    } else if (key == "COMMENT") {
    } else if (key == "DIMENSION") {
      dimension = to_int(value, source, l.number, "DIMENSION");
      if (dimension < 2) throw ParseError(source, l.number, "DIMENSION must be at least 2");
      coords.assign(dimension, std::nullopt);
      demands.assign(dimension, std::nullopt);
    } else if (key == "EDGE_WEIGHT_TYPE") {
      if (value != "EUC_2D") throw ParseError(source, l.number, "EDGE_WEIGHT_TYPE must be EUC_2D");
    } else if (key == "CAPACITY") {
      const long q = to_int(value, source, l.number, "CAPACITY");
      require_positive(q, source, l.number, "CAPACITY");
      inst.capacity = static_cast<int>(q);
    } else if (key == "VEHICLES") {
      const long m = to_int(value, source, l.number, "VEHICLES");
      require_positive(m, source, l.number, "VEHICLES");
      inst.fleet_limit = static_cast<int>(m);
    } else if (key == "NODE_COORD_SECTION" || key == "DEMAND_SECTION") {
      if (dimension < 0) throw ParseError(source, l.number, "section before DIMENSION");
      const bool is_coord = key == "NODE_COORD_SECTION";
      for (long k = 0; k < dimension; ++k) {
        if (at >= lines.size()) throw ParseError(source, l.number, "unexpected end of file inside " + key);
        const Line& row = lines[at++];
        if (row.tokens.size() != (is_coord ? 3u : 2u))
          throw ParseError(source, row.number, is_coord ? "coordinate line needs 'id x y'" : "demand line needs 'id q'");
        const auto idx = node_index(row);
        if (is_coord) {
          if (coords[idx]) throw ParseError(source, row.number, "duplicate node id");
          coords[idx] = Point{to_double(row.tokens[1], source, row.number, "x"),
                              to_double(row.tokens[2], source, row.number, "y")};
        } else {
          if (demands[idx]) throw ParseError(source, row.number, "duplicate node id");
          const long q = to_int(row.tokens[1], source, row.number, "demand");
          if (q < 0) throw ParseError(source, row.number, "negative demand");
          demands[idx] = q;
        }
      }
      (is_coord ? seen_coords : seen_demands) = true;
    } else if (key == "DEPOT_SECTION") {
      if (dimension < 0) throw ParseError(source, l.number, "section before DIMENSION");
      bool terminated = false;
      while (at < lines.size()) {
        const Line& row = lines[at++];
        const long id = to_int(row.tokens[0], source, row.number, "depot id");
        if (id == -1) {
          terminated = true;
          break;
        }
        if (id < 1 || id > dimension) throw ParseError(source, row.number, "depot id out of range");
        depot_ids.push_back(id - 1);
      }
      if (!terminated) throw ParseError(source, l.number, "DEPOT_SECTION is not terminated by -1");
      seen_depots = true;
    } else if (key == "EOF") {
      seen_eof = true;
      break;
    } else {
      throw ParseError(source, l.number, "unknown keyword '" + key + "'");
    }
  }
  const std::size_t last = lines.empty() ? 1 : lines.back().number;
  if (dimension < 0) throw ParseError(source, last, "missing DIMENSION");
  if (inst.capacity <= 0) throw ParseError(source, last, "missing CAPACITY");
  if (!seen_coords) throw ParseError(source, last, "missing NODE_COORD_SECTION");
  if (!seen_demands) throw ParseError(source, last, "missing DEMAND_SECTION");
  if (!seen_eof) throw ParseError(source, last, "missing EOF");
  if (!seen_depots) depot_ids = {0};
  if (depot_ids.size() != 1) throw ParseError(source, last, "exactly one depot is required");
  const auto depot = static_cast<std::size_t>(depot_ids.front());
  if (*demands[depot] != 0) throw ParseError(source, last, "depot demand must be 0");
  inst.depot = *coords[depot];
  for (std::size_t i = 0; i < coords.size(); ++i) {
    if (i == depot) continue;
    if (*demands[i] <= 0) throw ParseError(source, last, "customer " + std::to_string(i + 1) + " has non-positive demand");
    inst.customers.push_back({*coords[i], static_cast<int>(*demands[i])});
  }
  try {
    inst.validate();
  } catch (const ConfigError& e) {
    throw ParseError(source, last, e.what());
  }
  return inst;
}

std::string format_tsplib_cvrp(const CvrpInstance& inst) {
  std::ostringstream os;
  os << "NAME : " << (inst.name.empty() ? "unnamed" : inst.name) << '\n'
     << "TYPE : CVRP\n"
     << "DIMENSION : " << inst.size() + 1 << '\n'
     << "EDGE_WEIGHT_TYPE : EUC_2D\n"
     << "CAPACITY : " << inst.capacity << '\n';
  if (inst.fleet_limit) os << "VEHICLES : " << *inst.fleet_limit << '\n';
  os << "NODE_COORD_SECTION\n";
  os << "1 " << format_number(inst.depot.x) << ' ' << format_number(inst.depot.y) << '\n';
  for (std::size_t i = 0; i < inst.size(); ++i)
    os << i + 2 << ' ' << format_number(inst.customers[i].pos.x) << ' ' << format_number(inst.customers[i].pos.y) << '\n';
  os << "DEMAND_SECTION\n1 0\n";
  for (std::size_t i = 0; i < inst.size(); ++i) os << i + 2 << ' ' << inst.customers[i].demand << '\n';
  os << "DEPOT_SECTION\n1\n-1\nEOF\n";
  return os.str();
}

// --- Barreto CLRP --------------------------------------------------------

ClrpInstance parse_barreto(const std::string& text, const std::string& source) {
  TokenStream ts(text, source);
  const std::size_t head_line = ts.line();
  const long n = ts.integer("number of customers");
  require_positive(n, source, head_line, "number of customers");
  const long m = ts.integer("number of depots");
  require_positive(m, source, head_line, "number of depots");

  ClrpInstance inst;
  inst.network.name = source;
  for (long d = 0; d < m; ++d) {
    const double x = ts.real("depot x");
    const double y = ts.real("depot y");
    inst.network.depots.push_back({x, y});
  }
  for (long i = 0; i < n; ++i) {
    const double x = ts.real("customer x");
    const double y = ts.real("customer y");
    inst.network.customers.push_back({{x, y}, 0});
  }
  {
    const std::size_t ln = ts.line();
    const long q = ts.integer("vehicle capacity");
    require_positive(q, source, ln, "vehicle capacity");
    inst.network.capacity = static_cast<int>(q);
  }
  for (long d = 0; d < m; ++d) inst.depot_capacity.push_back(ts.real("depot capacity"));
  for (long i = 0; i < n; ++i) {
    const std::size_t ln = ts.line();
    const long q = ts.integer("customer demand");
    require_positive(q, source, ln, "customer demand");
    inst.network.customers[i].demand = static_cast<int>(q);
  }
  for (long d = 0; d < m; ++d) inst.opening_cost.push_back(ts.real("depot opening cost"));
  inst.route_cost = ts.real("route opening cost");
  {
    const std::size_t ln = ts.line();
    const long flag = ts.integer("cost type flag");
    if (flag != 0 && flag != 1) throw ParseError(source, ln, "cost type flag must be 0 or 1");
  }
  if (!ts.done()) throw ParseError(source, ts.line(), "trailing data after cost type flag");
  inst.network.vehicles.assign(m, std::nullopt);
  try {
    inst.validate();
  } catch (const ConfigError& e) {
    throw ParseError(source, head_line, e.what());
  }
  return inst;
}

std::string format_barreto(const ClrpInstance& inst) {
  std::ostringstream os;
  const auto& net = inst.network;
  os << net.num_customers() << '\n' << net.num_depots() << "\n\n";
  for (const auto& d : net.depots) os << format_number(d.x) << '\t' << format_number(d.y) << '\n';
  os << '\n';
  for (const auto& c : net.customers) os << format_number(c.pos.x) << '\t' << format_number(c.pos.y) << '\n';
  os << '\n' << net.capacity << "\n\n";
  for (double w : inst.depot_capacity) os << format_number(w) << '\n';
  os << '\n';
  for (const auto& c : net.customers) os << c.demand << '\n';
  os << '\n';
  for (double f : inst.opening_cost) os << format_number(f) << '\n';
  os << '\n' << format_number(inst.route_cost) << "\n\n0\n";
  return os.str();
}

// --- JSON ----------------------------------------------------------------

namespace {

Json point_json(const Point& p) { return Json::array({p.x, p.y}); }

Json customers_json(std::span<const Customer> cs) {
  Json arr = Json::array();
  for (const auto& c : cs) arr.push_back(Json::array({c.pos.x, c.pos.y, c.demand}));
  return arr;
}

Point point_from(const Json& j) {
  if (!j.is_array() || j.size() != 2) throw ConfigError("json: point must be [x, y]");
  return {j[0].get<double>(), j[1].get<double>()};
}

std::vector<Customer> customers_from(const Json& j) {
  std::vector<Customer> out;
  for (const auto& c : j.at("customers")) {
    if (!c.is_array() || c.size() != 3) throw ConfigError("json: customer must be [x, y, demand]");
    out.push_back({{c[0].get<double>(), c[1].get<double>()}, c[2].get<int>()});
  }
  return out;
}

void expect_kind(const Json& j, const char* kind) {
  if (j.at("kind").get<std::string>() != kind) throw ConfigError(std::string("json: expected kind '") + kind + "'");
}

}  // namespace

Json to_json_value(const CvrpInstance& inst) {
  Json j;
  j["kind"] = "cvrp";
  j["name"] = inst.name;
  j["capacity"] = inst.capacity;
  j["fleet_limit"] = inst.fleet_limit ? Json(*inst.fleet_limit) : Json(nullptr);
  j["depot"] = point_json(inst.depot);
  j["customers"] = customers_json(inst.customers);
  return j;
}

Json to_json_value(const MdvrpInstance& inst) {
  Json j;
  j["kind"] = "mdvrp";
  j["name"] = inst.name;
  j["capacity"] = inst.capacity;
  Json depots = Json::array();
  for (std::size_t d = 0; d < inst.num_depots(); ++d) {
    Json dj;
    dj["x"] = inst.depots[d].x;
    dj["y"] = inst.depots[d].y;
    dj["vehicles"] = inst.vehicles[d] ? Json(*inst.vehicles[d]) : Json(nullptr);
    depots.push_back(dj);
  }
  j["depots"] = depots;
  j["customers"] = customers_json(inst.customers);
  return j;
}

Json to_json_value(const ClrpInstance& inst) {
  Json j;
  j["kind"] = "clrp";
  j["name"] = inst.network.name;
  j["capacity"] = inst.network.capacity;
  j["route_cost"] = inst.route_cost;
  Json depots = Json::array();
  for (std::size_t d = 0; d < inst.num_depots(); ++d) {
    Json dj;
    dj["x"] = inst.network.depots[d].x;
    dj["y"] = inst.network.depots[d].y;
    dj["capacity"] = inst.depot_capacity[d];
    dj["opening_cost"] = inst.opening_cost[d];
    depots.push_back(dj);
  }
  j["depots"] = depots;
  j["customers"] = customers_json(inst.network.customers);
  return j;
}

Json to_json_value(const RoutingSolution& sol) {
  Json j;
  j["routing_cost"] = sol.routing_cost;
  j["opening_cost"] = sol.opening_cost;
  j["total_cost"] = sol.total_cost;
  Json depots = Json::array();
  for (const auto& dr : sol.depots) {
    Json dj;
    dj["depot"] = dr.depot;
    Json routes = Json::array();
    for (const auto& r : dr.routes) {
      Json rj;
      rj["customers"] = r.customers;
      rj["load"] = r.load;
      rj["cost"] = r.cost;
      routes.push_back(rj);
    }
    dj["routes"] = routes;
    depots.push_back(dj);
  }
  j["depots"] = depots;
  return j;
}

CvrpInstance cvrp_from_json(const Json& j) {
  expect_kind(j, "cvrp");
  CvrpInstance inst;
  inst.name = j.value("name", std::string());
  inst.capacity = j.at("capacity").get<int>();
  if (j.contains("fleet_limit") && !j["fleet_limit"].is_null()) inst.fleet_limit = j["fleet_limit"].get<int>();
  inst.depot = point_from(j.at("depot"));
  inst.customers = customers_from(j);
  inst.validate();
  return inst;
}

MdvrpInstance mdvrp_from_json(const Json& j) {
  expect_kind(j, "mdvrp");
  MdvrpInstance inst;
  inst.name = j.value("name", std::string());
  inst.capacity = j.at("capacity").get<int>();
  for (const auto& d : j.at("depots")) {
    inst.depots.push_back({d.at("x").get<double>(), d.at("y").get<double>()});
    const auto& v = d.at("vehicles");
    inst.vehicles.push_back(v.is_null() ? std::nullopt : std::optional<int>(v.get<int>()));
  }
  inst.customers = customers_from(j);
  inst.validate();
  return inst;
}

ClrpInstance clrp_from_json(const Json& j) {
  expect_kind(j, "clrp");
  ClrpInstance inst;
  inst.network.name = j.value("name", std::string());
  inst.network.capacity = j.at("capacity").get<int>();
  inst.route_cost = j.at("route_cost").get<double>();
  for (const auto& d : j.at("depots")) {
    inst.network.depots.push_back({d.at("x").get<double>(), d.at("y").get<double>()});
    inst.network.vehicles.push_back(std::nullopt);
    inst.depot_capacity.push_back(d.at("capacity").get<double>());
    inst.opening_cost.push_back(d.at("opening_cost").get<double>());
  }
  inst.network.customers = customers_from(j);
  inst.validate();
  return inst;
}

std::string to_json(const CvrpInstance& inst) { return to_json_value(inst).dump(2) + "\n"; }
std::string to_json(const MdvrpInstance& inst) { return to_json_value(inst).dump(2) + "\n"; }
std::string to_json(const ClrpInstance& inst) { return to_json_value(inst).dump(2) + "\n"; }

AnyInstance instance_from_json(const std::string& text, const std::string& source) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw ParseError(source, 1, e.what());
  }
  try {
    const auto kind = j.at("kind").get<std::string>();
    if (kind == "cvrp") return cvrp_from_json(j);
    if (kind == "mdvrp") return mdvrp_from_json(j);
    if (kind == "clrp") return clrp_from_json(j);
    throw ConfigError("json: unknown instance kind '" + kind + "'");
  } catch (const Json::exception& e) {
    throw ParseError(source, 1, e.what());
  } catch (const ConfigError& e) {
    throw ParseError(source, 1, e.what());
  }
}

// --- files ---------------------------------------------------------------

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path.string() + "'");
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write '" + path.string() + "'");
  out << text;
  if (!out) throw Error("write failed for '" + path.string() + "'");
}

AnyInstance load_instance(const std::filesystem::path& path) {
  const std::string text = read_text_file(path);
  const std::string source = path.string();
  const auto first = text.find_first_not_of(" \t\r\n");
  AnyInstance inst;
  std::string* name = nullptr;
  if (path.extension() == ".json" || (first != std::string::npos && text[first] == '{')) {
    inst = instance_from_json(text, source);
  } else if (text.find("NODE_COORD_SECTION") != std::string::npos) {
    inst = parse_tsplib_cvrp(text, source);
  } else {
    const auto lines = tokenized_lines(text);
    if (!lines.empty() && lines.front().tokens.size() == 4) inst = parse_cordeau(text, source);
    else inst = parse_barreto(text, source);
  }
  std::visit(
      [&](auto& v) {
        if constexpr (std::is_same_v<std::decay_t<decltype(v)>, ClrpInstance>) name = &v.network.name;
        else name = &v.name;
      },
      inst);
  if (name && (name->empty() || *name == source)) *name = path.stem().string();
  return inst;
}

MdvrpInstance load_mdvrp(const std::filesystem::path& path) {
  auto any = load_instance(path);
  if (auto* p = std::get_if<MdvrpInstance>(&any)) return std::move(*p);
  throw ConfigError("'" + path.string() + "' is not an MDVRP instance");
}

CvrpInstance load_cvrp(const std::filesystem::path& path) {
  auto any = load_instance(path);
  if (auto* p = std::get_if<CvrpInstance>(&any)) return std::move(*p);
  throw ConfigError("'" + path.string() + "' is not a CVRP instance");
}

ClrpInstance load_clrp(const std::filesystem::path& path) {
  auto any = load_instance(path);
  if (auto* p = std::get_if<ClrpInstance>(&any)) return std::move(*p);
  throw ConfigError("'" + path.string() + "' is not a CLRP instance");
}

void write_instance(const AnyInstance& inst, const std::filesystem::path& path) {
  const bool json = path.extension() == ".json";
  std::visit(
      [&](const auto& v) {
        using T = std::decay_t<decltype(v)>;
        if (json) write_text_file(path, to_json(v));
        else if constexpr (std::is_same_v<T, CvrpInstance>) write_text_file(path, format_tsplib_cvrp(v));
        else if constexpr (std::is_same_v<T, MdvrpInstance>) write_text_file(path, format_cordeau(v));
        else write_text_file(path, format_barreto(v));
      },
      inst);
}

}  // namespace hvrp
